//! Relative metric |(dF − m)/(dF + m)| over a coarse (λ/J, Jz/J) grid of the
//! anisotropic XY pair. Flagged points (some coupling above T, or a vanishing
//! denominator) are marked with `*`.
//!
//! cargo run --release --example relative_metric_map -- 2.0

use qthermo::sweep::figures::{metric_map, MetricGrid};
use qthermo::Result;

fn main() -> Result<()> {
    let t: f64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(2.0);
    let axis = |lo: f64, hi: f64, n: usize| -> Vec<f64> {
        (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()
    };
    let grid = MetricGrid { j: 1.0, temperature: t, lambdas: axis(-1.0, 1.0, 5), jzs: axis(-2.0, 2.0, 9) };
    let table = metric_map(&grid, 0)?;
    let metric = table.numbers("relative_metric").expect("metric column");
    let flagged = table.column("flagged").expect("flag column");

    print!("{:>8}", "Jz\\λ");
    for l in &grid.lambdas {
        print!("{l:>10.2}");
    }
    println!();
    for (iz, jz) in grid.jzs.iter().enumerate() {
        print!("{jz:8.2}");
        for il in 0..grid.lambdas.len() {
            let k = il * grid.jzs.len() + iz;
            let mark = if flagged[k].render() == "true" { "*" } else { " " };
            match metric[k] {
                Some(m) => print!("{m:>9.4}{mark}"),
                None => print!("{:>9}{mark}", "NA"),
            }
        }
        println!();
    }
    Ok(())
}
