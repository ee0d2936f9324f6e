//! Divergence of principal values: certified isolating annuli.
//!
//! At every index `i` where a point's code switches (`z_i != z_(i+1)`) there
//! is a sibling cell `S_beta`, `beta = (z_1 .. z_(i-1), y, .., y)` with `y`
//! the symbol distinct from both `z_i` and `z_(i+1)`, that an annulus around
//! `z` isolates from the rest of the gasket: between the inner radius `R` and
//! the outer radius `C R` the gasket meets *only* `S_beta`. Widening the
//! truncation cutoff from `R` to `C R` therefore changes `T_eps(1)(z)` by
//! exactly `mu(S_beta) / h = 3^-m` — a fixed jump that recurs at every
//! switch scale, so the truncations never form a Cauchy sequence and the
//! principal value fails to exist.
//!
//! Certificates here are exact: radii are rationals in Q(sqrt 3) chosen with
//! a 1% safety margin inside the gaps, and isolation is proved by exhaustive
//! cell-tree pruning with exact distance comparisons, never floats.

use crate::exactfield::{third_pow, Rat, QReal};
use crate::gasket::{dist_bounds, Cell, Code, EPoint, GasketParams, Point};
use crate::kernel::{point_cell_sector, KernelSpec, KernelVariant};
use crate::operator::{truncated_apply, truncated_apply_exact, CellFunction};
use crate::Error;
use num_bigint::BigInt;
use num_traits::Zero;
use serde::Serialize;

/// Search cap for the isolation parameter m.
pub const M_CAP: u32 = 12;

/// The switch indices of a finite code: positions `i` (1-based) with
/// `z_i != z_(i+1)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SwitchIndices {
    pub code_prefix: Code,
    pub indices: Vec<usize>,
}

pub fn switch_indices(code_prefix: &Code) -> SwitchIndices {
    let s = code_prefix.symbols();
    let indices = (1..s.len()).filter(|&i| s[i - 1] != s[i]).collect();
    SwitchIndices { code_prefix: code_prefix.clone(), indices }
}

/// How a cell was eliminated during annulus certification.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PruneVerdict {
    /// Entirely inside the inner ball (max distance < R).
    InsideInner,
    /// Entirely beyond the outer radius (min distance > C R).
    OutsideOuter,
}

#[derive(Clone, Debug, Serialize)]
pub struct PrunedCell {
    pub code: Code,
    pub verdict: PruneVerdict,
}

/// A certified isolating annulus for one switch index of one point.
#[derive(Clone, Debug, Serialize)]
pub struct PvCertificate {
    /// Finite truncation of z's code used by the certificate (length i+1).
    pub z_code: Code,
    /// Exact coordinates of z.
    pub z: Point,
    /// The switch index i.
    pub switch_index: usize,
    /// Isolation parameter: beta appends m copies of y to z's level-(i-1) code.
    pub m: u32,
    pub beta: Code,
    /// Exact squared inner radius.
    pub r_sq: QReal,
    /// Exact squared annulus ratio C^2 (outer radius = C R).
    pub c_sq: QReal,
    /// Certification depth L: every cell at this level intersecting the
    /// closed annulus was proved to be a descendant of beta.
    pub depth: u32,
    /// The cells pruned during certification, with their verdicts.
    pub isolation_log: Vec<PrunedCell>,
}

impl PvCertificate {
    /// Exact squared outer radius `C^2 R^2`.
    pub fn outer_sq(&self) -> QReal {
        &self.c_sq * &self.r_sq
    }

    pub fn r(&self) -> f64 {
        self.r_sq.to_f64().sqrt()
    }

    pub fn c(&self) -> f64 {
        self.c_sq.to_f64().sqrt()
    }
}

/// Searches m = 1, 2, ... for the first certifiable isolating annulus at
/// switch index `i` of `z`, with exact radii
/// `R^2 = mindist^2 (99/100)^2`, `(CR)^2 = maxdist^2 (101/100)^2`
/// around the candidate cell S_beta.
///
/// Certification walks the cell tree from the root, pruning cells that sit
/// entirely inside the inner ball or entirely beyond the outer radius; the
/// beta cell itself must land strictly inside the open annulus and every
/// other branch must die out by depth `L = i + m + 8`, else the candidate m
/// is rejected and the search moves on. Larger m is not automatically easier
/// (the annulus thins as the margin stays proportional), which is why the
/// search returns the *minimal* certified m.
pub fn find_annulus(z: &EPoint, i: usize, spec: &KernelSpec) -> Result<PvCertificate, Error> {
    let params = spec.params();
    if i == 0 || z.symbol_at(i - 1) == z.symbol_at(i) {
        return Err(Error::NotSwitchIndex(i));
    }
    let y = 6 - z.symbol_at(i - 1) - z.symbol_at(i);
    let hundredth = Rat::new(BigInt::from(99), BigInt::from(100));
    let hundredth_up = Rat::new(BigInt::from(101), BigInt::from(100));
    let shrink = &hundredth * &hundredth;
    let grow = &hundredth_up * &hundredth_up;
    for m in 1..=M_CAP {
        let mut beta_symbols = z.code_prefix(i - 1).symbols().to_vec();
        beta_symbols.extend(std::iter::repeat(y).take(m as usize));
        let beta = Code::from_symbols(&beta_symbols)?;
        let cell_beta = params.cell(&beta);
        let db = dist_bounds(z.point(), &cell_beta);
        let r_sq = db.min_sq.scale(&shrink);
        let outer_sq = db.max_sq.scale(&grow);
        let depth = (i as u32) + m + 8;
        match certify(params, z.point(), &beta, &r_sq, &outer_sq, depth) {
            Ok(isolation_log) => {
                let c_sq = &outer_sq * &r_sq.inv().expect("positive inner radius");
                return Ok(PvCertificate {
                    z_code: z.code_prefix(i + 1),
                    z: z.point().clone(),
                    switch_index: i,
                    m,
                    beta,
                    r_sq,
                    c_sq,
                    depth,
                    isolation_log,
                });
            }
            Err(Error::CertificationUndecided { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::AnnulusExhausted { index: i, m_cap: M_CAP })
}

/// Exhaustive exact isolation proof: returns the prune log, or the first
/// undecided cell at the depth cap.
fn certify(
    params: &GasketParams,
    z: &Point,
    beta: &Code,
    r_sq: &QReal,
    outer_sq: &QReal,
    depth: u32,
) -> Result<Vec<PrunedCell>, Error> {
    let mut log = Vec::new();
    let root = Cell::root(params);
    certify_cell(params, z, beta, r_sq, outer_sq, depth, &root, &mut log)?;
    Ok(log)
}

#[allow(clippy::too_many_arguments)]
fn certify_cell(
    params: &GasketParams,
    z: &Point,
    beta: &Code,
    r_sq: &QReal,
    outer_sq: &QReal,
    depth: u32,
    cell: &Cell,
    log: &mut Vec<PrunedCell>,
) -> Result<(), Error> {
    if beta.is_prefix_of(cell.code()) {
        // the candidate cell itself: it must sit strictly inside the open
        // annulus, which holds by construction of the margins
        let db = dist_bounds(z, cell);
        if (&db.min_sq - r_sq).sign() <= 0 || (&db.max_sq - outer_sq).sign() >= 0 {
            return Err(Error::OscillationInvalid(format!(
                "candidate cell {} is not strictly inside its own annulus",
                cell.code()
            )));
        }
        return Ok(());
    }
    let db = dist_bounds(z, cell);
    if (&db.max_sq - r_sq).sign() < 0 {
        log.push(PrunedCell { code: cell.code().clone(), verdict: PruneVerdict::InsideInner });
        return Ok(());
    }
    if (&db.min_sq - outer_sq).sign() > 0 {
        log.push(PrunedCell { code: cell.code().clone(), verdict: PruneVerdict::OutsideOuter });
        return Ok(());
    }
    if cell.level() >= depth {
        return Err(Error::CertificationUndecided {
            depth,
            cell: cell.code().to_string(),
        });
    }
    for i in 1..=3 {
        certify_cell(params, z, beta, r_sq, outer_sq, depth, &cell.child(i, params), log)?;
    }
    Ok(())
}

/// The exact jump of the truncations across a certified annulus:
/// `|int_{R < |z-y| <= CR} K(z, y) dmu y| = mu(S_beta) * 3^(i-1) = 3^-m`.
///
/// Both constancy claims behind the computation are re-verified exactly:
/// the distance range from z to S_beta must lie inside the plateau band i,
/// and the direction set from z into S_beta must stay in one sector.
pub fn oscillation_exact(cert: &PvCertificate, spec: &KernelSpec) -> Result<Rat, Error> {
    if spec.variant() != KernelVariant::Plateau {
        return Err(Error::PlateauRequired("oscillation_exact"));
    }
    let params = spec.params();
    let i = cert.switch_index as u32;
    let cell_beta = params.cell(&cert.beta);
    let db = dist_bounds(&cert.z, &cell_beta);
    let left = params.sibling_gap(i - 1);
    let right = params.scale_pow(i - 1);
    if (&db.min_sq - &QReal::from_rat(&left * &left)).sign() < 0
        || (&db.max_sq - &QReal::from_rat(&right * &right)).sign() > 0
    {
        return Err(Error::OscillationInvalid(format!(
            "distance range from z to {} leaves plateau band {}",
            cert.beta, i
        )));
    }
    // errors if the direction hull touches a sector boundary or splits
    point_cell_sector(&cert.z, &cell_beta)?;
    let value = cell_beta.measure() * Rat::from_integer(BigInt::from(3).pow(i - 1));
    debug_assert_eq!(value, third_pow(cert.m));
    Ok(value)
}

/// What a trace row's cutoff is anchored to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceKind {
    /// The certified outer radius C R_i.
    Outer,
    /// The certified inner radius R_i.
    Inner,
    /// The cell-aligned cutoff lambda^i.
    Aligned,
}

#[derive(Clone, Debug, Serialize)]
pub struct PvTraceRow {
    pub switch_index: usize,
    pub kind: TraceKind,
    pub epsilon: f64,
    pub value: f64,
}

/// The truncation values of `T_eps(1)(z)` along the certified radii of every
/// switch index `i <= depth`, with the vanishing cell-aligned cutoffs
/// interleaved. Values are computed by the exact machinery (the certificate
/// guarantees full resolution) and reported as floats; adjacent inner/outer
/// rows differ by exactly `3^-m`.
pub fn pv_trace(z: &EPoint, depth: usize, spec: &KernelSpec) -> Result<Vec<PvTraceRow>, Error> {
    let one = CellFunction::one(0);
    let mut rows = Vec::new();
    for i in switch_indices(&z.code_prefix(depth + 1)).indices {
        let cert = find_annulus(z, i, spec)?;
        for (kind, eps_sq) in [(TraceKind::Outer, cert.outer_sq()), (TraceKind::Inner, cert.r_sq.clone())] {
            let t = truncated_apply(&one, z, &eps_sq, cert.depth + 2, spec)?;
            if !t.straddle_bound.is_zero() {
                return Err(Error::OscillationInvalid(format!(
                    "certified cutoff at switch index {} did not resolve exactly",
                    i
                )));
            }
            rows.push(PvTraceRow {
                switch_index: i,
                kind,
                epsilon: eps_sq.to_f64().sqrt(),
                value: crate::exactfield::rat_to_f64(&t.value),
            });
        }
        let aligned = truncated_apply_exact(&one, z, i as u32, spec)?;
        rows.push(PvTraceRow {
            switch_index: i,
            kind: TraceKind::Aligned,
            epsilon: crate::exactfield::rat_to_f64(&spec.params().scale_pow(i as u32)),
            value: crate::exactfield::rat_to_f64(&aligned),
        });
    }
    Ok(rows)
}
