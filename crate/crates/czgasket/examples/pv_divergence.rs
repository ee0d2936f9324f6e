//! Why the principal value fails to exist almost everywhere.
//!
//! A typical code switches symbols at two thirds of its indices. At each
//! switch index i there is an isolating annulus around the point: between
//! radius R_i and C R_i the gasket meets exactly one far cell S_beta, and
//! widening the truncation across the annulus changes T(1) by the fixed
//! amount 3^-m. The jumps recur at every scale, so eps -> T_eps(1)(z) keeps
//! oscillating and never converges — even though the cell-aligned cutoffs
//! lambda^i all give exactly 0.
//!
//! Each annulus comes with a machine-checked certificate: exact radii in
//! Q(sqrt 3) and an exhaustive cell-pruning log proving the isolation.

use czgasket::pv::{find_annulus, oscillation_exact, pv_trace, switch_indices, TraceKind};
use czgasket::{Code, EPoint, GasketParams, KernelSpec, KernelVariant};

fn main() -> Result<(), czgasket::Error> {
    let params = GasketParams::from_fraction(1, 4)?;
    let spec = KernelSpec::new(params.clone(), KernelVariant::Plateau)?;
    let z = EPoint::new(&params, Code::root(), "12".parse()?)?;
    println!("z = {} = ({}, {})", z, z.point().x, z.point().y);

    let depth = 6;
    let switches = switch_indices(&z.code_prefix(depth + 1));
    println!("switch indices up to {}: {:?}\n", depth, switches.indices);

    for &i in &switches.indices {
        let cert = find_annulus(&z, i, &spec)?;
        let osc = oscillation_exact(&cert, &spec)?;
        println!(
            "i = {}: beta = {:<9} m = {}  R = {:.3e}  C = {:.4}  jump = {} (log: {} cells, depth {})",
            i,
            cert.beta.to_string(),
            cert.m,
            cert.r(),
            cert.c(),
            osc,
            cert.isolation_log.len(),
            cert.depth,
        );
    }

    println!("\ntruncation trace (value of T_eps(1)(z) as eps shrinks):");
    for row in pv_trace(&z, depth, &spec)? {
        let kind = match row.kind {
            TraceKind::Outer => "outer  C R_i",
            TraceKind::Inner => "inner    R_i",
            TraceKind::Aligned => "aligned  l^i",
        };
        println!(
            "  i = {}  {}  eps = {:.6e}  T_eps(1)(z) = {:+.12}",
            row.switch_index, kind, row.epsilon, row.value
        );
    }
    println!("\nthe inner/outer values differ by 1/9 at every switch index;");
    println!("no Cauchy tail, no principal value.");
    Ok(())
}
