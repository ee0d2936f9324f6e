//! Walk the cell tree of a lambda-gasket and print exact geometry.
//!
//! Every quantity shown here is an exact rational (or element of Q(sqrt 3)):
//! vertices, measures, diameters, and the gap separating sibling cells.

use czgasket::gasket::min_vertex_gap_sq;
use czgasket::{Code, GasketParams};

fn main() -> Result<(), czgasket::Error> {
    let params = GasketParams::from_fraction(1, 4)?;
    println!("lambda = {}, d = {:.12}", params.lambda(), params.dim());

    println!("\nlevel-2 cells:");
    for idx in 0..9 {
        let code = Code::from_index(2, idx);
        let cell = params.cell(&code);
        let [v1, _, _] = cell.vertices();
        println!(
            "  cell {}  measure {}  diam^2 {}  v1 = ({}, {})",
            code,
            cell.measure(),
            cell.diam_sq(),
            v1.x,
            v1.y
        );
    }

    // sibling separation beats child diameter at every level; this strict
    // inequality is what makes all the exact kernel bookkeeping possible
    println!("\nsibling gap vs. child diameter:");
    for level in 0..4 {
        let gap = params.sibling_gap(level);
        let child_diam = params.scale_pow(level + 1);
        println!(
            "  level {}: gap = {} > {} = diam  ({})",
            level,
            gap,
            child_diam,
            gap > child_diam
        );
    }

    // the gap is attained between actual sibling cells
    let a = params.cell(&"11".parse()?);
    let b = params.cell(&"12".parse()?);
    let gap_sq = min_vertex_gap_sq(&a, &b);
    println!("\nmin vertex gap^2 between cells 11 and 12: {} + {} sqrt3", gap_sq.a, gap_sq.b);

    Ok(())
}
