//! Acceptance checks run by `qthermo verify` and by the test suite.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::figures::{generate_figure, FIGURE_NAMES};
use super::record::{Cell, Table};
use crate::correlations::{
    classical_correlation_derivative, diagonal_discord, discord_report, discord_temperature_derivative,
    multipartite_diagonal_discord, mutual_information_derivative, quantum_discord,
};
use crate::derivative::DerivativePolicy;
use crate::error::Result;
use crate::high_temp::{
    doubling_check, identity_comparison, order_check_probability_term, order_check_qfi, sech_exact,
    xstate_leading_terms,
};
use crate::linalg::SubsystemLayout;
use crate::measurement::Bipartition;
use crate::models::{build_appendix_e, build_chain, build_two_qubit, random_model, ChainParams, TwoQubitXYZParams};
use crate::thermometry::{
    classical_fisher, greedy_locc, local_qfi, precision_loss, qfi_from_fidelity, qfi_general, qfi_gibbs,
    scheme_outcome_probabilities, GibbsEnsemble, GreedyPath, MeasurementMode, MeasurementScheme, ThermalModel,
};

#[derive(Clone, Debug, PartialEq)]
pub struct CheckOutcome {
    pub id: u32,
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

impl CheckOutcome {
    fn from_result(id: u32, name: &'static str, r: Result<(bool, String)>) -> Self {
        match r {
            Ok((pass, detail)) => Self { id, name, pass, detail },
            Err(e) => Self { id, name, pass: false, detail: format!("error: {e}") },
        }
    }

    pub fn line(&self) -> String {
        let tag = if self.pass { "PASS" } else { "FAIL" };
        format!("criterion {:>2} [{tag}] {}: {}", self.id, self.name, self.detail)
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct VerifyReport {
    pub checks: Vec<CheckOutcome>,
}

impl VerifyReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn to_table(&self) -> Table {
        let mut t = Table::new(vec!["criterion".into(), "name".into(), "result".into(), "detail".into()]);
        for c in &self.checks {
            let row = vec![
                Cell::Text(c.id.to_string()),
                Cell::from(c.name),
                Cell::from(if c.pass { "pass" } else { "fail" }),
                Cell::Text(c.detail.clone()),
            ];
            t.push(row).expect("four columns");
        }
        t
    }
}

fn policy() -> DerivativePolicy {
    DerivativePolicy::default()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}

fn two_qubit(b1: f64, b2: f64, jx: f64, jy: f64, jz: f64) -> Result<Arc<ThermalModel>> {
    Ok(ThermalModel::new(build_two_qubit(&TwoQubitXYZParams::new(b1, b2, jx, jy, jz))?))
}

pub const FIG2A: TwoQubitXYZParams = TwoQubitXYZParams { b1: 3.0, b2: 1.0, jx: 1.0, jy: 1.0, jz: 2.0 };
pub const FIG2B: TwoQubitXYZParams = TwoQubitXYZParams { b1: 0.0, b2: 0.0, jx: 1.0, jy: 0.0, jz: 2.0 };
pub const CHAIN: ChainParams = ChainParams { n: 3, b: 1.0, j: 1.0, alpha: 0.3 };
pub const SEED: u64 = 0x5eed_7e57;

fn fig2a() -> Result<Arc<ThermalModel>> {
    Ok(ThermalModel::new(build_two_qubit(&FIG2A)?))
}

/// Criterion 1: three routes to the Gibbs QFI on random models.
pub fn gibbs_qfi_consistency() -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut worst: f64 = 0.0;
    for k in 0..20 {
        let layout = SubsystemLayout::qubits(1 + k % 3);
        let m = ThermalModel::new(random_model(&layout, &mut rng)?);
        let norm = m.energy_scale();
        for s in [0.5, 2.0, 10.0] {
            let t = s * norm;
            let a = qfi_gibbs(&m.gibbs(t)?);
            let fam = |x: f64| Ok(m.gibbs(x)?.state().clone());
            let b = qfi_general(&fam, t, &policy())?;
            let c = qfi_from_fidelity(&fam, t, 1e-2)?;
            worst = worst.max(rel(a, b)).max(rel(a, c)).max(rel(b, c));
        }
    }
    Ok((worst <= 1e-6, format!("max pairwise relative deviation {worst:.3e} (tol 1e-6)")))
}

/// Greedy LOCC QFI against the classical Fisher information of the full joint
/// outcome distribution of the frozen scheme.
pub fn greedy_additivity_with(
    greedy: impl Fn(&GibbsEnsemble, &GreedyPath) -> Result<(f64, MeasurementScheme)>,
) -> Result<(bool, String)> {
    let m = fig2a()?;
    let path = GreedyPath::identity(2)?;
    let mut worst: f64 = 0.0;
    let mut outcomes = 0;
    for t in [1.0, 2.0, 10.0] {
        let (value, scheme) = greedy(&m.gibbs(t)?, &path)?;
        outcomes = scheme_outcome_probabilities(&m, &scheme, t)?.len();
        let joint = classical_fisher(|s| scheme_outcome_probabilities(&m, &scheme, s), t, &policy())?;
        worst = worst.max(rel(value, joint));
    }
    Ok((worst <= 1e-8, format!("max relative deviation {worst:.3e} over {outcomes} joint outcomes (tol 1e-8)")))
}

/// Criterion 2.
pub fn greedy_additivity() -> Result<(bool, String)> {
    greedy_additivity_with(|e, p| {
        let g = greedy_locc(e, p, MeasurementMode::SldEigenbasis, &policy())?;
        Ok((g.total, g.scheme))
    })
}

/// Criterion 3.
pub fn xstate_leading_order() -> Result<(bool, String)> {
    let m = fig2a()?;
    let t: f64 = 100.0;
    let c = identity_comparison(&m, &GreedyPath::identity(2)?, t, MeasurementMode::SldEigenbasis, &policy())?;
    let lead = xstate_leading_terms(&FIG2A).delta_f;
    let t4 = t.powi(4);
    let e1 = (t4 * c.delta_f - lead).abs() / lead;
    let e2 = (t4 * c.minus_dd_over_t - lead).abs() / lead;
    let e3 = c.abs_diff / c.delta_f.abs().min(c.minus_dd_over_t.abs());
    Ok((
        e1 <= 0.05 && e2 <= 0.05 && e3 <= 0.05,
        format!("T^4 dF rel err {e1:.3e}, T^4 (-dD/T) rel err {e2:.3e}, |dF - (-dD/T)| rel {e3:.3e} (tol 0.05)"),
    ))
}

/// Criterion 4.
pub fn correlation_asymptotics() -> Result<(bool, String)> {
    let m = fig2a()?;
    let t: f64 = 100.0;
    let split = Bipartition::site(0);
    let coeff = xstate_leading_terms(&FIG2A);
    let t4 = t.powi(4);
    let di = t4 * mutual_information_derivative(&m, &split, t, &policy())?;
    let dj = t4 * classical_correlation_derivative(&m, &split, t, &policy())?;
    let ei = (di - coeff.d_mutual_information).abs() / coeff.d_mutual_information;
    let ej = (dj - coeff.d_classical_correlation).abs() / coeff.d_classical_correlation;
    Ok((
        ei <= 0.05 && ej <= 0.05,
        format!("T^4(-dI/T) = {di:.6} vs {:.4} (rel {ei:.3e}); T^4(-dJ/T) = {dj:.6} vs {:.4} (rel {ej:.3e})", coeff.d_mutual_information, coeff.d_classical_correlation),
    ))
}

/// Criterion 5.
pub fn sech_exact_case() -> Result<(bool, String)> {
    let m = ThermalModel::new(build_two_qubit(&FIG2B)?);
    let path = GreedyPath::identity(2)?;
    let mut worst: f64 = 0.0;
    for t in [0.5, 2.0, 10.0] {
        let c = identity_comparison(&m, &path, t, MeasurementMode::SldEigenbasis, &policy())?;
        let exact = sech_exact(FIG2B.jx, t);
        worst = worst.max(rel(c.delta_f, exact)).max(rel(c.minus_dd_over_t, exact));
    }
    Ok((worst <= 1e-5, format!("max relative deviation from closed form {worst:.3e} (tol 1e-5)")))
}

/// Criterion 6.
pub fn ising_exactness() -> Result<(bool, String)> {
    let battery = [(0.5, 1.0, 1.5), (-1.0, 2.0, 0.7), (0.0, 0.0, 1.0)];
    let path = GreedyPath::identity(2)?;
    let split = Bipartition::site(0);
    let mut worst: f64 = 0.0;
    for (b1, b2, jz) in battery {
        let m = two_qubit(b1, b2, 0.0, 0.0, jz)?;
        for t in [0.5, 2.0, 10.0] {
            let e = m.gibbs(t)?;
            let df = precision_loss(&e, &path, MeasurementMode::SldEigenbasis, &policy())?;
            let d = quantum_discord(e.state(), &split)?;
            let dd = diagonal_discord(e.state(), &split)?;
            let md = discord_temperature_derivative(&m, &path, t, &policy())?;
            worst = worst.max(df.abs()).max(d.abs()).max(dd.abs()).max(md.abs());
        }
    }
    Ok((worst <= 1e-10, format!("max |dF|, |D|, |diag D|, |dD/T| = {worst:.3e} (tol 1e-10)")))
}

/// Criterion 7.
pub fn chain_checks() -> Result<(bool, String)> {
    let m = ThermalModel::new(build_chain(&CHAIN)?);
    let t: f64 = 100.0;
    let c = identity_comparison(&m, &GreedyPath::parse("123")?, t, MeasurementMode::SldEigenbasis, &policy())?;
    let j2 = CHAIN.j * CHAIN.j;
    let t4 = t.powi(4);
    let e1 = (t4 * c.delta_f - j2).abs() / j2;
    let e2 = (t4 * c.minus_dd_over_t - j2).abs() / j2;
    let (p, q) = (GreedyPath::parse("132")?, GreedyPath::parse("213")?);
    let mut path_gap: f64 = 0.0;
    for t in [0.5, 1.0, 2.0, 10.0, 100.0] {
        let e = m.gibbs(t)?;
        let fa = precision_loss(&e, &p, MeasurementMode::SldEigenbasis, &policy())?;
        let fb = precision_loss(&e, &q, MeasurementMode::SldEigenbasis, &policy())?;
        let da = multipartite_diagonal_discord(e.state(), &p)?;
        let db = multipartite_diagonal_discord(e.state(), &q)?;
        let ma = discord_temperature_derivative(&m, &p, t, &policy())?;
        let mb = discord_temperature_derivative(&m, &q, t, &policy())?;
        path_gap = path_gap.max(rel(fa, fb)).max(rel(da, db)).max(rel(ma, mb));
    }
    Ok((
        e1 <= 0.05 && e2 <= 0.05 && path_gap <= 1e-8,
        format!("T^4 dF_123 rel err {e1:.3e}, T^4 (-dD_123/T) rel err {e2:.3e} (tol 0.05); paths 132/213 max rel gap {path_gap:.3e} (tol 1e-8)"),
    ))
}

/// Criterion 8.
pub fn order_checks() -> Result<(bool, String)> {
    let models: Vec<(&str, Arc<ThermalModel>)> = vec![
        ("fig2a", fig2a()?),
        ("fig2b", ThermalModel::new(build_two_qubit(&FIG2B)?)),
        ("ising", two_qubit(0.5, 1.0, 0.0, 0.0, 1.5)?),
        ("chain B=1", ThermalModel::new(build_chain(&CHAIN)?)),
        ("chain B=2", ThermalModel::new(build_chain(&ChainParams { b: 2.0, ..CHAIN })?)),
        ("chain N=4", ThermalModel::new(build_chain(&ChainParams { n: 4, ..CHAIN })?)),
        ("appendix_e", ThermalModel::new(build_appendix_e(1.0, 0.3, 0.7)?)),
    ];
    let mut ok = true;
    let mut worst_qfi: f64 = 0.0;
    for (_, m) in &models {
        let chk = order_check_qfi(m, 100.0 * m.energy_scale())?;
        ok &= chk.pass;
        worst_qfi = worst_qfi.max(chk.scaled_residual);
    }
    let m = fig2a()?;
    let split = Bipartition::site(0);
    let mut prob_ratios = Vec::new();
    for t in [50.0, 100.0] {
        let chk = order_check_probability_term(&m, &split, t, &policy())?;
        ok &= chk.pass;
        prob_ratios.push(chk.predicted / chk.numeric);
    }
    let path = GreedyPath::identity(2)?;
    let mut scaled = Vec::new();
    let mut warn = false;
    for t in [25.0, 50.0, 100.0, 200.0] {
        let c = identity_comparison(&m, &path, t, MeasurementMode::SldEigenbasis, &policy())?;
        warn |= c.regime_warning;
        scaled.push(c.abs_diff * t.powi(5));
    }
    let mut eq4_ratios = Vec::new();
    for k in 0..3 {
        let chk = doubling_check("T^5 |dF - (-dD/T)|", 25.0 * 2f64.powi(k as i32), scaled[k], scaled[k + 1], false);
        ok &= chk.pass;
        eq4_ratios.push(scaled[k + 1] / scaled[k]);
    }
    Ok((
        ok,
        format!(
            "worst |T^4 F - var|/var {worst_qfi:.3e} over {} models; probability-term doubling ratios {}; residual doubling ratios {}{}",
            models.len(),
            fmt_list(&prob_ratios),
            fmt_list(&eq4_ratios),
            if warn { " (T=25 below regime threshold)" } else { "" }
        ),
    ))
}

fn fmt_list(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.3}")).collect();
    format!("[{}]", parts.join(", "))
}

/// Criterion 9.
pub fn bounds_battery() -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 9);
    let path = GreedyPath::identity(2)?;
    let split = Bipartition::site(0);
    let slack = 1e-8;
    let mut violations = 0;
    let mut first = String::new();
    for k in 0..50 {
        let m = ThermalModel::new(random_model(&SubsystemLayout::qubits(2), &mut rng)?);
        let t = [0.2, 0.5, 1.0, 2.0, 5.0][k % 5] * m.energy_scale();
        let e = m.gibbs(t)?;
        let fa = local_qfi(&e, 0, &policy())?;
        let flocc = greedy_locc(&e, &path, MeasurementMode::SldEigenbasis, &policy())?.total;
        let fab = qfi_gibbs(&e);
        let r = discord_report(e.state(), &split)?;
        let ok = fa <= flocc + slack
            && flocc <= fab + slack
            && r.quantum_discord >= -slack
            && r.quantum_discord <= r.diagonal_discord + slack
            && r.diagonal_discord <= r.mutual_information + slack;
        if !ok {
            violations += 1;
            if first.is_empty() {
                first = format!(
                    "; first at point {k}: F_A {fa:.6e} F_AtoB {flocc:.6e} F_AB {fab:.6e} D {:.6e} diag {:.6e} I {:.6e}",
                    r.quantum_discord, r.diagonal_discord, r.mutual_information
                );
            }
        }
    }
    Ok((violations == 0, format!("{violations} of 50 points violate a bound (slack 1e-8){first}")))
}

/// Criterion 10. `jobs` is the thread count of the second, compared run.
pub fn figure_reproduction(jobs: usize) -> Result<(bool, String)> {
    let mut ok = true;
    let mut notes = Vec::new();
    for name in FIGURE_NAMES {
        let a = generate_figure(name, 1)?;
        let b = generate_figure(name, jobs)?;
        let same = a.to_csv_string()? == b.to_csv_string()?;
        ok &= same;
        if !same {
            notes.push(format!("{name} differs between runs"));
        }
        let failed = a.column("status").map_or(0, |c| c.iter().filter(|s| **s != &Cell::from("ok")).count());
        if failed > 0 {
            ok = false;
            notes.push(format!("{name}: {failed} failed rows"));
        }
        match name {
            "fig2b" => {
                let df = a.numbers("delta_F_12").unwrap_or_default();
                let ex = a.numbers("sech_exact").unwrap_or_default();
                let mut worst: f64 = 0.0;
                for (x, y) in df.iter().zip(&ex) {
                    if let (Some(x), Some(y)) = (x, y) {
                        worst = worst.max(rel(*x, *y));
                    }
                }
                ok &= worst <= 1e-5;
                notes.push(format!("fig2b max rel dev from sech^2 form {worst:.2e}"));
            }
            "fig3a" => {
                let mut worst: f64 = 0.0;
                for col in ["delta_F", "diag_discord", "minus_dD_over_T"] {
                    let x = a.numbers(&format!("{col}_132")).unwrap_or_default();
                    let y = a.numbers(&format!("{col}_213")).unwrap_or_default();
                    for (x, y) in x.iter().zip(&y) {
                        if let (Some(x), Some(y)) = (x, y) {
                            worst = worst.max(rel(*x, *y));
                        }
                    }
                }
                ok &= worst <= 1e-8;
                notes.push(format!("fig3a paths 132/213 max rel gap {worst:.2e}"));
            }
            "fig4b" => {
                let metric = a.numbers("relative_metric").unwrap_or_default();
                let flagged = a.column("flagged").unwrap_or_default();
                let n = metric.len();
                let mut n_flagged = 0;
                let mut worst: f64 = 0.0;
                for (m, f) in metric.iter().zip(&flagged) {
                    if **f == Cell::from("true") {
                        n_flagged += 1;
                    } else if let Some(m) = m {
                        worst = worst.max(*m);
                    }
                }
                let frac = n_flagged as f64 / n.max(1) as f64;
                ok &= worst <= 0.2 && frac <= 0.1;
                notes.push(format!("fig4b max metric outside flagged region {worst:.3} over {n} points, flagged {n_flagged}"));
            }
            _ => {}
        }
    }
    Ok((ok, notes.join("; ")))
}

pub const CRITERIA: [&str; 10] = [
    "Gibbs QFI consistency",
    "greedy additivity",
    "X-state leading order",
    "correlation-term asymptotics",
    "exact sech^2 case",
    "classical Ising exactness",
    "three-qubit chain",
    "order checks",
    "monotonicity and bounds",
    "figure reproduction",
];

pub fn run_criterion(id: u32, jobs: usize) -> CheckOutcome {
    let r = match id {
        1 => gibbs_qfi_consistency(),
        2 => greedy_additivity(),
        3 => xstate_leading_order(),
        4 => correlation_asymptotics(),
        5 => sech_exact_case(),
        6 => ising_exactness(),
        7 => chain_checks(),
        8 => order_checks(),
        9 => bounds_battery(),
        10 => figure_reproduction(jobs),
        _ => return CheckOutcome { id, name: "unknown", pass: false, detail: "no such criterion".into() },
    };
    CheckOutcome::from_result(id, CRITERIA[id as usize - 1], r)
}

/// Runs every criterion in order; `on_check` sees each outcome as it completes.
pub fn run_all(jobs: usize, mut on_check: impl FnMut(&CheckOutcome)) -> VerifyReport {
    let mut report = VerifyReport::default();
    for id in 1..=CRITERIA.len() as u32 {
        let c = run_criterion(id, jobs);
        on_check(&c);
        report.checks.push(c);
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_table_shape() {
        let r = VerifyReport {
            checks: vec![CheckOutcome { id: 1, name: "x", pass: true, detail: "fine, really".into() }],
        };
        let s = r.to_table().to_csv_string().unwrap();
        assert!(s.starts_with("criterion,name,result,detail\n"));
        assert!(s.contains("\"fine, really\""));
        assert!(r.all_pass());
    }
}
