//! High-temperature behaviour: the precision loss of the greedy scheme against
//! −(1/T)∂_T of the sequential diagonal discord, their T⁴ scaling, and the
//! exactly solvable flip-flop coupling where both equal a sech² law.
//!
//! cargo run --example high_temperature_identity

use qthermo::high_temp::{identity_comparison, in_high_t_regime, sech_exact, xstate_leading_terms};
use qthermo::models::{build_two_qubit, TwoQubitXYZParams};
use qthermo::{DerivativePolicy, GreedyPath, MeasurementMode, Result, ThermalModel};

fn main() -> Result<()> {
    let policy = DerivativePolicy::default();
    let path = GreedyPath::identity(2)?;

    let p = TwoQubitXYZParams::new(3.0, 1.0, 1.0, 1.0, 2.0);
    let model = ThermalModel::new(build_two_qubit(&p)?);
    let lead = xstate_leading_terms(&p);
    println!("XYZ pair, leading coefficient of T^4 dF: {:.4}", lead.delta_f);
    println!("{:>8} {:>13} {:>13} {:>10} {:>10} {:>9}", "T", "dF", "-dD/T", "T^4 dF", "metric", "regime");
    for t in [1.0, 3.0, 10.0, 30.0, 100.0, 300.0] {
        let c = identity_comparison(&model, &path, t, MeasurementMode::SldEigenbasis, &policy)?;
        let metric = c.relative_metric.map_or("NA".to_string(), |m| format!("{m:.3e}"));
        println!(
            "{t:8.1} {:13.6e} {:13.6e} {:10.5} {metric:>10} {:>9}",
            c.delta_f,
            c.minus_dd_over_t,
            c.delta_f * t.powi(4),
            if in_high_t_regime(&model, t) { "high" } else { "low" }
        );
    }

    let jx = 1.0;
    let flip_flop = ThermalModel::new(build_two_qubit(&TwoQubitXYZParams::new(0.0, 0.0, jx, 0.0, 2.0))?);
    println!("\nflip-flop coupling Jx = {jx}: dF against (Jx^2/4T^4) sech^2(Jx/2T)");
    for t in [0.3, 1.0, 3.0, 10.0] {
        let c = identity_comparison(&flip_flop, &path, t, MeasurementMode::SldEigenbasis, &policy)?;
        let exact = sech_exact(jx, t);
        println!("T = {t:5.1}: dF = {:.10e}  exact = {exact:.10e}  -dD/T = {:.10e}", c.delta_f, c.minus_dd_over_t);
    }
    Ok(())
}
