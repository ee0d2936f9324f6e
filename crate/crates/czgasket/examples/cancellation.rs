//! The headline identity: every truncation of T(1) at a cell-aligned cutoff
//! is exactly zero, at every point of the gasket.
//!
//! The truncated integral over {|x-y| > lambda^n} decomposes into the two
//! sibling cells of x's ancestors at each level; on each pair the kernel is
//! the constant +-3^(k-1) and both cells carry measure 3^-k, so the levels
//! cancel pairwise. Here the whole computation runs in exact arithmetic and
//! the result is the rational 0 — not a small float.

use czgasket::operator::{level_contributions, truncated_apply_exact};
use czgasket::{CellFunction, Code, EPoint, GasketParams, KernelSpec, KernelVariant};

fn main() -> Result<(), czgasket::Error> {
    let one = CellFunction::one(0);

    for (p, q) in [(1i64, 4i64), (1, 5), (3, 10)] {
        let params = GasketParams::from_fraction(p, q)?;
        let spec = KernelSpec::new(params.clone(), KernelVariant::Plateau)?;
        // a vertex, a periodic point, and a pre-periodic point
        let points = [
            EPoint::cell_vertex(&params, &"312".parse()?, 2)?,
            EPoint::new(&params, Code::root(), "123".parse()?)?,
            EPoint::new(&params, "22".parse()?, "13".parse()?)?,
        ];
        println!("lambda = {}/{}", p, q);
        for x in &points {
            for n in 1..=8 {
                let v = truncated_apply_exact(&one, x, n, &spec)?;
                assert_eq!(v, czgasket::exactfield::rat_int(0));
            }
            println!("  T_n(1)({}) = 0 exactly, n = 1..8", x);
        }
    }

    // the cancellation made visible: the two terms of each level
    let params = GasketParams::from_fraction(1, 4)?;
    let spec = KernelSpec::new(params.clone(), KernelVariant::Plateau)?;
    let x = EPoint::new(&params, Code::root(), "132".parse()?)?;
    println!("\nper-level terms at x = {} (lambda = 1/4):", x);
    for lt in level_contributions(&one, &x, 4, &spec)? {
        let line: Vec<String> = lt
            .terms
            .iter()
            .map(|(code, v)| format!("S_{} -> {}", code, v))
            .collect();
        println!("  level {}: {}", lt.level, line.join(", "));
    }
    Ok(())
}
