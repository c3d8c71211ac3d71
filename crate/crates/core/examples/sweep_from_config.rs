//! Temperature sweep driven by a TOML experiment description, written as CSV
//! to standard output. The same configuration format is read by
//! `qthermo compute --config`.
//!
//! cargo run --example sweep_from_config

use qthermo::sweep::{run_sweep, sweep_table, ExperimentConfig};
use qthermo::Result;

const CONFIG: &str = r#"
paths = ["123", "213"]
mode = "sld_eigenbasis"

[model]
kind = "chain"
n = 3
b = 2.0
j = 1.0
alpha = 0.3

[temperature]
min = 0.5
max = 50.0
count = 8
spacing = "log"
"#;

fn main() -> Result<()> {
    let config = ExperimentConfig::from_toml(CONFIG)?;
    let (schema, records) = run_sweep(&config, 0)?;
    let table = sweep_table(&schema, &records)?;
    table.write_csv(std::io::stdout().lock(), &[])?;
    Ok(())
}
