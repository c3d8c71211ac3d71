//! Quantum Fisher information of a two-qubit Gibbs state, computed three ways:
//! from the heat capacity, from the symmetric logarithmic derivative, and from
//! the curvature of the Uhlmann fidelity. Local QFIs of each qubit follow.
//!
//! cargo run --example gibbs_thermometry

use qthermo::models::{build_two_qubit, TwoQubitXYZParams};
use qthermo::thermometry::{heat_capacity, local_qfi, qfi_from_fidelity, qfi_general, qfi_gibbs};
use qthermo::{DerivativePolicy, Result, ThermalModel};

fn main() -> Result<()> {
    let model = ThermalModel::new(build_two_qubit(&TwoQubitXYZParams::new(3.0, 1.0, 1.0, 1.0, 2.0))?);
    let policy = DerivativePolicy::default();
    let family = |t: f64| Ok(model.gibbs(t)?.state().clone());

    println!("{:>8} {:>14} {:>14} {:>14} {:>14} {:>12} {:>12}", "T", "C", "F (C/T^2)", "F (SLD)", "F (fidelity)", "F_1", "F_2");
    for t in [0.25, 0.5, 1.0, 2.0, 5.0, 20.0] {
        let ens = model.gibbs(t)?;
        let f_sld = qfi_general(&family, t, &policy)?;
        let f_fid = qfi_from_fidelity(&family, t, 1e-2)?;
        println!(
            "{t:8.2} {:14.6e} {:14.6e} {f_sld:14.6e} {f_fid:14.6e} {:12.4e} {:12.4e}",
            heat_capacity(&ens),
            qfi_gibbs(&ens),
            local_qfi(&ens, 0, &policy)?,
            local_qfi(&ens, 1, &policy)?,
        );
    }
    Ok(())
}
