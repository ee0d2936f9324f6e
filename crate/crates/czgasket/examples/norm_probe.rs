//! Discretized operator norms, level by level.
//!
//! T restricted to level-n cell indicators is an antisymmetric 3^n x 3^n
//! matrix. For the plateau kernel its L^2(mu) -> L^2(mu) norm is the same at
//! every level — the natural discrete probe of boundedness, and the levels
//! agreeing is exactly what uniform L^2 bounds look like from below. The
//! homogeneous kernel |x-y|^(-d) Omega lacks the plateau cancellation and
//! its norms creep upward instead.

use czgasket::operator::{build_matrix, operator_norm};
use czgasket::{GasketParams, KernelSpec, KernelVariant};

fn main() -> Result<(), czgasket::Error> {
    let params = GasketParams::from_fraction(1, 4)?;
    let seed = 0;

    println!("level   nodes   plateau norm        homogeneous norm");
    for level in 1..=6 {
        let mut norms = Vec::new();
        for variant in [KernelVariant::Plateau, KernelVariant::Homogeneous] {
            let spec = KernelSpec::new(params.clone(), variant)?;
            let m = build_matrix(level, &spec)?;
            norms.push(operator_norm(&m, seed)?);
        }
        println!("{:>5}   {:>5}   {:<17.15}   {:<17.15}", level, 3u32.pow(level), norms[0], norms[1]);
    }
    println!("\n1/sqrt(3) = {:.15}", 1.0 / 3f64.sqrt());

    // mean-zero rows: T annihilates constants also in the discretization
    let spec = KernelSpec::new(params, KernelVariant::Plateau)?;
    let m = build_matrix(4, &spec)?;
    let worst = (0..m.dim()).map(|i| m.row_sum(i).abs()).fold(0.0f64, f64::max);
    println!("largest |row sum| at level 4: {:.3e}", worst);
    println!("antisymmetry defect: {:.3e}", m.antisymmetry_defect());
    Ok(())
}
