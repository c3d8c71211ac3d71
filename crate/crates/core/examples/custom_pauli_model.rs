//! A user-defined Hamiltonian from weighted Pauli strings: a transverse-field
//! triangle. Local fields become the local terms and the rest the interaction,
//! so the greedy and discord machinery applies unchanged.
//!
//! cargo run --example custom_pauli_model

use qthermo::correlations::multipartite_diagonal_discord;
use qthermo::models::PauliModel;
use qthermo::thermometry::{greedy_locc, qfi_gibbs};
use qthermo::{DerivativePolicy, GreedyPath, MeasurementMode, Result, ThermalModel};

fn main() -> Result<()> {
    let h = PauliModel::new()
        .term(1.0, "ZZI")?
        .term(1.0, "IZZ")?
        .term(1.0, "ZIZ")?
        .term(0.7, "XII")?
        .term(0.7, "IXI")?
        .term(0.7, "IIX")?
        .build()?;
    println!("recomposition residual {:.1e}", h.recomposition_residual());
    let model = ThermalModel::new(h);
    let policy = DerivativePolicy::default();
    let path = GreedyPath::identity(3)?;
    for t in [0.5, 1.0, 2.0, 4.0] {
        let ens = model.gibbs(t)?;
        let g = greedy_locc(&ens, &path, MeasurementMode::ReducedStateEigenbasis, &policy)?;
        println!(
            "T = {t}: F = {:.6e}  F_LOCC = {:.6e}  D = {:.6e}",
            qfi_gibbs(&ens),
            g.total,
            multipartite_diagonal_discord(ens.state(), &path)?
        );
    }
    Ok(())
}
