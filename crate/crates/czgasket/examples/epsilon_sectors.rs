//! The direction-cone half-width epsilon_lambda and the sector conditions.
//!
//! Directions between distinct cells of the gasket cluster around the six
//! directions k pi/3. epsilon is the widest deviation over sibling-cell
//! vertex pairs; the kernel's angular factor is well defined because
//! epsilon < pi/6 keeps the six cones disjoint. `verify_sector_conditions`
//! then proves, exhaustively and exactly, that every ordered sibling pair
//! (down to a depth) lands in a single cone, that swapping the pair moves
//! the cone by exactly 3, and that the three cones around one parent are
//! pairwise distinct mod 3.

use czgasket::kernel::{compute_epsilon, verify_sector_conditions};
use czgasket::GasketParams;

fn main() -> Result<(), czgasket::Error> {
    let limit = std::f64::consts::PI / 6.0;
    println!("pi/6 = {:.6}", limit);
    for (p, q) in [(1i64, 4i64), (1, 5), (3, 10), (1, 6), (1, 10)] {
        let params = GasketParams::from_fraction(p, q)?;
        let eps = compute_epsilon(&params)?;
        let report = verify_sector_conditions(&params, 4)?;
        println!(
            "lambda = {:>4}: epsilon = {:.6}  margin = {:.6}  ({} pairs, {} triples exact to depth {})",
            format!("{}/{}", p, q),
            eps,
            limit - eps,
            report.pairs_checked,
            report.triples_checked,
            report.max_depth,
        );
    }

    // epsilon grows as lambda approaches 1/3 and the margin closes
    println!("\nnear the 1/3 boundary:");
    for q in [100i64, 1000] {
        let params = GasketParams::from_fraction(q / 3, q)?;
        let eps = compute_epsilon(&params)?;
        println!("  lambda = {}: epsilon = {:.6}, margin = {:.6}", params.lambda(), eps, limit - eps);
    }
    Ok(())
}
