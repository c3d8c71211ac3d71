//! Temperature sweeps, figure presets, and the verification suite behind the
//! command-line front end.

pub mod config;
pub mod figures;
pub mod record;
pub mod verify;

use std::sync::Arc;

use rayon::prelude::*;

use crate::correlations::{
    discord_report, discord_temperature_derivative, multipartite_diagonal_discord, total_correlation,
};
use crate::derivative::DerivativePolicy;
use crate::error::{Error, Result};
use crate::high_temp::{in_high_t_regime, relative_metric};
use crate::measurement::Bipartition;
use crate::thermometry::{greedy_locc, local_qfi, qfi_gibbs, GreedyPath, MeasurementMode, ThermalModel};

pub use config::{ExperimentConfig, ModelSpec, Spacing, TemperatureGrid};
pub use record::{Cell, Table};

/// Per-path quantities at one temperature.
#[derive(Clone, Debug, PartialEq)]
pub struct PathValues {
    pub path: String,
    pub f_locc: f64,
    pub delta_f: f64,
    pub diagonal_discord: f64,
    pub minus_dd_over_t: f64,
    pub relative_metric: Option<f64>,
}

/// Bipartite correlation measures (two-site models only).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BipartiteValues {
    pub mutual_information: f64,
    pub classical_correlation: f64,
    pub quantum_discord: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PointValues {
    pub f_global: f64,
    pub f_local: Vec<f64>,
    pub paths: Vec<PathValues>,
    pub bipartite: Option<BipartiteValues>,
    pub total_correlation: f64,
}

/// One output row: model parameters, temperature, and either the computed
/// quantities or the reason the point failed.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepRecord {
    pub parameters: Vec<(String, f64)>,
    pub temperature: f64,
    pub high_t_regime: bool,
    pub values: std::result::Result<PointValues, String>,
}

pub fn evaluate_point(
    model: &Arc<ThermalModel>,
    t: f64,
    paths: &[GreedyPath],
    mode: MeasurementMode,
    policy: &DerivativePolicy,
) -> Result<PointValues> {
    let ens = model.gibbs(t)?;
    let f_global = qfi_gibbs(&ens);
    let n = model.layout().len();
    let f_local = (0..n).map(|k| local_qfi(&ens, k, policy)).collect::<Result<Vec<_>>>()?;
    let mut per_path = Vec::with_capacity(paths.len());
    for path in paths {
        let g = greedy_locc(&ens, path, mode, policy)?;
        let delta_f = f_global - g.total;
        let dd = multipartite_diagonal_discord(ens.state(), path)?;
        let m = discord_temperature_derivative(model, path, t, policy)?;
        per_path.push(PathValues {
            path: path.label(),
            f_locc: g.total,
            delta_f,
            diagonal_discord: dd,
            minus_dd_over_t: m,
            relative_metric: relative_metric(delta_f, m, f_global),
        });
    }
    let bipartite = if n == 2 && model.layout().dims()[0] == 2 {
        let r = discord_report(ens.state(), &Bipartition::site(0))?;
        Some(BipartiteValues {
            mutual_information: r.mutual_information,
            classical_correlation: r.classical_correlation,
            quantum_discord: r.quantum_discord,
        })
    } else {
        None
    };
    Ok(PointValues { f_global, f_local, paths: per_path, bipartite, total_correlation: total_correlation(ens.state())? })
}

/// Column layout shared by every row of one sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepSchema {
    pub parameters: Vec<String>,
    pub sites: usize,
    pub paths: Vec<String>,
}

impl SweepSchema {
    pub fn columns(&self) -> Vec<String> {
        let mut c: Vec<String> = self.parameters.clone();
        c.push("T".into());
        c.push("F_global".into());
        for k in 1..=self.sites {
            c.push(format!("F_local_{k}"));
        }
        for p in &self.paths {
            c.push(format!("F_locc_{p}"));
            c.push(format!("delta_F_{p}"));
            c.push(format!("diag_discord_{p}"));
            c.push(format!("minus_dD_over_T_{p}"));
            c.push(format!("relative_metric_{p}"));
        }
        for name in ["I_AB", "J_B_given_A", "D_A_to_B", "total_correlation", "regime", "status"] {
            c.push(name.into());
        }
        c
    }

    pub fn row(&self, r: &SweepRecord) -> Vec<Cell> {
        let mut row: Vec<Cell> = r.parameters.iter().map(|(_, v)| Cell::Num(*v)).collect();
        row.push(Cell::Num(r.temperature));
        let regime = Cell::from(if r.high_t_regime { "high_t" } else { "below_threshold" });
        match &r.values {
            Ok(v) => {
                row.push(Cell::Num(v.f_global));
                row.extend(v.f_local.iter().map(|f| Cell::Num(*f)));
                for p in &v.paths {
                    row.push(Cell::Num(p.f_locc));
                    row.push(Cell::Num(p.delta_f));
                    row.push(Cell::Num(p.diagonal_discord));
                    row.push(Cell::Num(p.minus_dd_over_t));
                    row.push(Cell::opt(p.relative_metric));
                }
                match v.bipartite {
                    Some(b) => {
                        row.push(Cell::Num(b.mutual_information));
                        row.push(Cell::Num(b.classical_correlation));
                        row.push(Cell::Num(b.quantum_discord));
                    }
                    None => row.extend([Cell::Na, Cell::Na, Cell::Na]),
                }
                row.push(Cell::Num(v.total_correlation));
                row.push(regime);
                row.push("ok".into());
            }
            Err(msg) => {
                let numeric = 1 + self.sites + 5 * self.paths.len() + 4;
                row.extend(std::iter::repeat_n(Cell::Na, numeric));
                row.push(regime);
                row.push(Cell::Text(format!("failed: {msg}")));
            }
        }
        row
    }
}

/// Evaluates every grid point of `config` on at most `jobs` threads. Rows come
/// back in grid order and do not depend on `jobs`.
pub fn run_sweep(config: &ExperimentConfig, jobs: usize) -> Result<(SweepSchema, Vec<SweepRecord>)> {
    config.validate()?;
    let model = ThermalModel::new(config.model.build()?);
    let paths = config.greedy_paths()?;
    let parameters: Vec<(String, f64)> =
        config.model.parameters().into_iter().map(|(k, v)| (k.to_string(), v)).collect();
    let schema = SweepSchema {
        parameters: parameters.iter().map(|(k, _)| k.clone()).collect(),
        sites: config.model.sites(),
        paths: paths.iter().map(GreedyPath::label).collect(),
    };
    let grid = config.temperature.points();
    let eval = |t: &f64| SweepRecord {
        parameters: parameters.clone(),
        temperature: *t,
        high_t_regime: in_high_t_regime(&model, *t),
        values: evaluate_point(&model, *t, &paths, config.mode, &config.derivative).map_err(|e| e.to_string()),
    };
    let records: Vec<SweepRecord> = with_jobs(jobs, || grid.par_iter().map(eval).collect())?;
    if records.iter().all(|r| r.values.is_err()) {
        let first = records[0].values.as_ref().err().cloned().unwrap_or_default();
        return Err(Error::Domain(format!("every grid point failed; first failure: {first}")));
    }
    Ok((schema, records))
}

pub fn sweep_table(schema: &SweepSchema, records: &[SweepRecord]) -> Result<Table> {
    let mut table = Table::new(schema.columns());
    for r in records {
        table.push(schema.row(r))?;
    }
    Ok(table)
}

/// Runs `f` on a dedicated pool of `jobs` threads (`0` = rayon's default).
pub fn with_jobs<T: Send>(jobs: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Resource(e.to_string()))?;
    Ok(pool.install(f))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(model: ModelSpec, count: usize) -> ExperimentConfig {
        ExperimentConfig {
            model,
            temperature: TemperatureGrid { min: 0.5, max: 5.0, count, spacing: Spacing::Log },
            paths: vec![],
            mode: MeasurementMode::SldEigenbasis,
            derivative: DerivativePolicy::default(),
            output: None,
        }
    }

    #[test]
    fn zero_hamiltonian_has_no_information() {
        let cfg = config(ModelSpec::TwoQubit { b1: 0.0, b2: 0.0, jx: 0.0, jy: 0.0, jz: 0.0 }, 2);
        // the Gibbs family is constant, so the SLD has nothing to act on
        let (schema, records) = run_sweep(&cfg, 1).unwrap();
        let table = sweep_table(&schema, &records).unwrap();
        for name in ["F_global", "F_local_1", "F_locc_12", "delta_F_12", "I_AB", "D_A_to_B", "diag_discord_12"] {
            for v in table.numbers(name).unwrap() {
                assert!(v.unwrap().abs() < 1e-14, "{name}: {v:?}");
            }
        }
    }

    #[test]
    fn ising_sweep_is_zero() {
        let cfg = config(ModelSpec::TwoQubit { b1: 1.0, b2: 0.5, jx: 0.0, jy: 0.0, jz: 2.0 }, 4);
        let (schema, records) = run_sweep(&cfg, 2).unwrap();
        let table = sweep_table(&schema, &records).unwrap();
        for name in ["delta_F_12", "minus_dD_over_T_12"] {
            for v in table.numbers(name).unwrap() {
                assert!(v.unwrap().abs() < 1e-10, "{name}: {v:?}");
            }
        }
    }

    #[test]
    fn job_count_does_not_change_output() {
        let mut cfg = config(ModelSpec::TwoQubit { b1: 3.0, b2: 1.0, jx: 1.0, jy: 1.0, jz: 2.0 }, 6);
        cfg.paths = vec!["12".into(), "21".into()];
        let one = sweep_table(&run_sweep(&cfg, 1).unwrap().0, &run_sweep(&cfg, 1).unwrap().1).unwrap();
        let (s, r) = run_sweep(&cfg, 4).unwrap();
        let four = sweep_table(&s, &r).unwrap();
        assert_eq!(one.to_csv_string().unwrap(), four.to_csv_string().unwrap());
    }
}
