//! The kernel `K(x, y) = Omega(dir(x -> y)) / h(|x - y|)`.
//!
//! Between points of the gasket only six directions occur, up to a small
//! angular spread `epsilon < pi/6`: the multiples of pi/3 spanned by the base
//! triangle. The sector function `Omega` is `(-1)^k` on the k-th sector; on
//! gasket pairs it is evaluated *exactly* by rotating the direction vector
//! with matrices whose entries lie in Q(sqrt 3) and testing the half-angle
//! inequality `3 v_y'^2 <= v_x'^2` (tan(pi/6) = 1/sqrt 3).
//!
//! The radial profile `h` is constant (`3^-(k-1)`) on the closed bands
//! `[(1 - 2 lambda) lambda^(k-1), lambda^(k-1)]` — exactly the distance
//! ranges realized between points in distinct sibling cells — so `1/h` is a
//! power of three on every gasket pair, and K is an exact rational. Floats
//! enter only through the C-infinity interpolations used off the gasket.

use crate::exactfield::{rat_to_f64, third_pow, Rat, QReal};
use crate::gasket::{Cell, GasketParams, Point};
use crate::Error;
use num_bigint::BigInt;
use num_traits::One;
use serde::Serialize;
use std::f64::consts::PI;

/// One of the six angular sectors around the directions `k pi/3`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Sector {
    pub k: u8,
}

impl Sector {
    /// `(-1)^k`.
    pub fn sign(&self) -> i32 {
        if self.k % 2 == 0 {
            1
        } else {
            -1
        }
    }
}

/// Radial profile choice: the exact plateau kernel of the construction, or
/// the d-homogeneous comparison kernel (float only — d is irrational).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelVariant {
    Plateau,
    Homogeneous,
}

impl std::fmt::Display for KernelVariant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            KernelVariant::Plateau => write!(f, "plateau"),
            KernelVariant::Homogeneous => write!(f, "homogeneous"),
        }
    }
}

/// A kernel bound to one gasket: the parameters, a certified sector
/// half-width `epsilon < pi/6`, the variant, and the table of sector signs
/// between distinct sibling cells (constant at every level by
/// self-similarity).
#[derive(Clone, Debug)]
pub struct KernelSpec {
    params: GasketParams,
    epsilon: f64,
    variant: KernelVariant,
    sign_table: [[i32; 3]; 3],
}

impl KernelSpec {
    pub fn new(params: GasketParams, variant: KernelVariant) -> Result<Self, Error> {
        let epsilon = compute_epsilon(&params)?;
        let mut sign_table = [[0i32; 3]; 3];
        let cells: Vec<Cell> = (1..=3)
            .map(|i| params.cell(&crate::gasket::Code::from_symbols(&[i]).unwrap()))
            .collect();
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    let s = sector_of(&cells[i].barycenter(), &cells[j].barycenter())?;
                    sign_table[i][j] = s.sign();
                }
            }
        }
        Ok(KernelSpec { params, epsilon, variant, sign_table })
    }

    pub fn params(&self) -> &GasketParams {
        &self.params
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn variant(&self) -> KernelVariant {
        self.variant
    }

    /// Sign of `Omega` on directions from sibling cell `i` towards sibling
    /// cell `j` (1-based symbols; they share a parent at any level).
    pub fn sibling_sign(&self, i: u8, j: u8) -> i32 {
        self.sign_table[i as usize - 1][j as usize - 1]
    }

    /// Closed plateau band number `k >= 1`: `[(1 - 2 lambda) lambda^(k-1), lambda^(k-1)]`.
    pub fn plateau_interval(&self, k: u32) -> (Rat, Rat) {
        let right = self.params.scale_pow(k - 1);
        let left = self.params.sibling_gap(k - 1);
        (left, right)
    }

    /// Value of h on band k: `3^-(k-1)`.
    pub fn plateau_value(&self, k: u32) -> Rat {
        third_pow(k - 1)
    }
}

/// cos(k pi/3), sin(k pi/3) for k = 0..5, exactly.
fn rotation_table() -> [(QReal, QReal); 6] {
    let half = Rat::new(BigInt::one(), BigInt::from(2));
    let c = |r: Rat| QReal::from_rat(r);
    let s = |r: Rat| QReal::new(Rat::from_integer(BigInt::from(0)), r);
    [
        (QReal::one(), QReal::zero()),
        (c(half.clone()), s(half.clone())),
        (c(-half.clone()), s(half.clone())),
        (-&QReal::one(), QReal::zero()),
        (c(-half.clone()), s(-half.clone())),
        (c(half.clone()), s(-half)),
    ]
}

/// Exact nearest-sector classification of a nonzero direction vector.
/// Returns the sector index and whether the direction lies exactly on a
/// sector boundary (a tie, resolved to the lower k by the scan order).
fn classify_direction(vx: &QReal, vy: &QReal) -> Result<(u8, bool), Error> {
    if vx.is_zero() && vy.is_zero() {
        return Err(Error::CoincidentPoints);
    }
    for (k, (cos_k, sin_k)) in rotation_table().iter().enumerate() {
        // rotate v by -k pi/3
        let rx = &(cos_k * vx) + &(sin_k * vy);
        if rx.sign() <= 0 {
            continue;
        }
        let ry = &(cos_k * vy) - &(sin_k * vx);
        let margin = &(&rx * &rx) - &(&(&ry * &ry).scale(&Rat::from_integer(BigInt::from(3))));
        if margin.sign() >= 0 {
            return Ok((k as u8, margin.sign() == 0));
        }
    }
    unreachable!("six closed sectors cover every nonzero direction")
}

/// The sector of the direction from `x` to `y` (per the `y - x` convention).
pub fn sector_of(x: &Point, y: &Point) -> Result<Sector, Error> {
    let v = y.sub(x);
    let (k, _) = classify_direction(&v.x, &v.y)?;
    Ok(Sector { k })
}

/// Certified sector half-width: the maximum angular deviation from the
/// nearest multiple of pi/3 over all directions between two distinct level-1
/// sibling cells. Directions between convex hulls are extremized at vertex
/// pairs, so a 9-pair max per sibling pair suffices; by self-similarity
/// (similitudes carry no rotation) the same bound holds at every level.
pub fn compute_epsilon(params: &GasketParams) -> Result<f64, Error> {
    let cells: Vec<Cell> = (1..=3)
        .map(|i| params.cell(&crate::gasket::Code::from_symbols(&[i]).unwrap()))
        .collect();
    let sector_width = PI / 3.0;
    let mut eps: f64 = 0.0;
    for a in 0..3 {
        for b in (a + 1)..3 {
            for va in cells[a].vertices() {
                for vb in cells[b].vertices() {
                    let d = vb.sub(va);
                    let [dx, dy] = d.to_f64();
                    let theta = dy.atan2(dx);
                    let dev = theta - sector_width * (theta / sector_width).round();
                    eps = eps.max(dev.abs());
                }
            }
        }
    }
    let limit = PI / 6.0;
    if eps >= limit {
        return Err(Error::SectorTooWide { epsilon: eps, limit });
    }
    Ok(eps)
}

/// Index `k >= 1` of the closed plateau band containing `sqrt(dist_sq)`,
/// by exact comparison against squared band endpoints.
pub fn plateau_index(params: &GasketParams, dist_sq: &QReal) -> Result<u32, Error> {
    if dist_sq.sign() <= 0 {
        return Err(Error::NonPositiveRadius);
    }
    let lambda_sq = params.scale_pow(2);
    let gap0 = params.sibling_gap(0);
    let mut right_sq = Rat::one(); // lambda^(2(k-1))
    let mut left_sq = &gap0 * &gap0; // ((1 - 2 lambda) lambda^(k-1))^2
    // distances above 1 never occur between gasket points
    if (dist_sq - &QReal::from_rat(right_sq.clone())).sign() > 0 {
        return Err(Error::PlateauGap { dist_sq: dist_sq.to_string() });
    }
    for k in 1..=4096u32 {
        if (dist_sq - &QReal::from_rat(left_sq.clone())).sign() >= 0 {
            return if (dist_sq - &QReal::from_rat(right_sq)).sign() <= 0 {
                Ok(k)
            } else {
                Err(Error::PlateauGap { dist_sq: dist_sq.to_string() })
            };
        }
        right_sq *= &lambda_sq;
        left_sq *= &lambda_sq;
    }
    // left endpoints decrease geometrically, so a positive dist_sq is always
    // reached; the loop bound is a defensive cap
    Err(Error::PlateauGap { dist_sq: dist_sq.to_string() })
}

/// Exact plateau value `h(|x - y|) = 3^-(k-1)` for a pair of gasket points.
pub fn h_exact(x: &Point, y: &Point, spec: &KernelSpec) -> Result<Rat, Error> {
    if spec.variant != KernelVariant::Plateau {
        return Err(Error::PlateauRequired("h_exact"));
    }
    let k = plateau_index(&spec.params, &x.dist_sq(y))?;
    Ok(spec.plateau_value(k))
}

/// Exact kernel value on a pair of gasket points: `(-1)^sector * 3^(k-1)`.
pub fn kernel_eval_exact(x: &Point, y: &Point, spec: &KernelSpec) -> Result<Rat, Error> {
    if spec.variant != KernelVariant::Plateau {
        return Err(Error::PlateauRequired("kernel_eval_exact"));
    }
    let sector = sector_of(x, y)?;
    let k = plateau_index(&spec.params, &x.dist_sq(y))?;
    let magnitude = Rat::from_integer(BigInt::from(3).pow(k - 1));
    Ok(if sector.sign() > 0 { magnitude } else { -magnitude })
}

/// Outcome of a (k2) rigidity comparison.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum K2Outcome {
    Holds,
    NotApplicable,
}

/// The strongest form of kernel regularity: if `|x - z| < (1 - 2 lambda) |x - y|`
/// (checked exactly on squares) then `K(x, y) = K(z, y)` exactly. A violation
/// is an error carrying the witness triple.
pub fn check_k2(x: &Point, z: &Point, y: &Point, spec: &KernelSpec) -> Result<K2Outcome, Error> {
    let gap = spec.params.sibling_gap(0);
    let gate_rhs = QReal::from_rat(&gap * &gap) * x.dist_sq(y).clone();
    let dxz = x.dist_sq(z);
    if (&dxz - &gate_rhs).sign() >= 0 {
        return Ok(K2Outcome::NotApplicable);
    }
    let kxy = kernel_eval_exact(x, y, spec)?;
    let kzy = kernel_eval_exact(z, y, spec)?;
    if kxy == kzy {
        Ok(K2Outcome::Holds)
    } else {
        Err(Error::RigidityViolated {
            x: format!("({}, {})", x.x, x.y),
            z: format!("({}, {})", z.x, z.y),
            y: format!("({}, {})", y.x, y.y),
            kxy: kxy.to_string(),
            kzy: kzy.to_string(),
        })
    }
}

/// `exp(-1/t)` continued by 0 for `t <= 0`: the flat bump primitive.
fn flat(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else {
        (-1.0 / t).exp()
    }
}

/// Monotone C-infinity step: 0 for `t <= 0`, 1 for `t >= 1`, flat at both ends.
fn smooth_step(t: f64) -> f64 {
    let a = flat(t);
    let b = flat(1.0 - t);
    a / (a + b)
}

/// The smooth radial profile: equals the plateau values exactly on the closed
/// bands, interpolates monotonically (flat-ended, so globally C-infinity)
/// across the gaps, and continues with value 1 above the first band.
pub fn h_smooth(r: f64, spec: &KernelSpec) -> Result<f64, Error> {
    if r <= 0.0 {
        return Err(Error::NonPositiveRadius);
    }
    let lambda = rat_to_f64(spec.params.lambda());
    let gap_factor = 1.0 - 2.0 * lambda; // left endpoint factor
    if r >= gap_factor {
        // band 1 = [1 - 2 lambda, 1], extended for r > 1
        return Ok(1.0);
    }
    let mut k: i32 = 1;
    loop {
        let right = lambda.powi(k); // right endpoint of band k+1
        let value = 3f64.powi(-k); // 3^-k, value on band k+1
        if r > right {
            // in the open gap (lambda^k, (1 - 2 lambda) lambda^(k-1)):
            // interpolate between 3^-k and 3^-(k-1)
            let gap_hi = gap_factor * lambda.powi(k - 1);
            let t = (r - right) / (gap_hi - right);
            return Ok(value * (1.0 + 2.0 * smooth_step(t)));
        }
        if r >= gap_factor * right {
            // on the closed band [ (1-2 lambda) lambda^k, lambda^k ]
            return Ok(value);
        }
        k += 1;
        if right == 0.0 {
            // r underflowed every band boundary; h -> 0 smoothly with r
            return Ok(0.0);
        }
    }
}

/// Smooth odd sector function: `(-1)^k` within `epsilon` of the direction
/// `k pi/3`, with flat-ended C-infinity sign changes across the complementary
/// arcs.
pub fn omega_smooth(theta: f64, spec: &KernelSpec) -> f64 {
    let sector_width = PI / 3.0;
    let t = theta.rem_euclid(2.0 * PI);
    let k0 = (t / sector_width).floor().min(5.0) as i32;
    let dev = t - k0 as f64 * sector_width;
    let sign0 = if k0 % 2 == 0 { 1.0 } else { -1.0 };
    let eps = spec.epsilon;
    if dev <= eps {
        sign0
    } else if dev >= sector_width - eps {
        -sign0
    } else {
        let s = (dev - eps) / (sector_width - 2.0 * eps);
        sign0 * (1.0 - 2.0 * smooth_step(s))
    }
}

/// Float kernel for arbitrary plane points: smooth Omega over h_smooth
/// (plateau variant) or over `r^d` (homogeneous variant). On gasket pairs the
/// plateau variant reproduces the exact kernel to float precision. Returns
/// NaN for coincident points.
pub fn kernel_eval_float(x: [f64; 2], y: [f64; 2], spec: &KernelSpec) -> f64 {
    let dx = y[0] - x[0];
    let dy = y[1] - x[1];
    let r = dx.hypot(dy);
    if r == 0.0 {
        return f64::NAN;
    }
    let omega = omega_smooth(dy.atan2(dx), spec);
    match spec.variant {
        KernelVariant::Plateau => match h_smooth(r, spec) {
            Ok(h) => omega / h,
            Err(_) => f64::NAN,
        },
        KernelVariant::Homogeneous => omega * r.powf(-spec.params.dim()),
    }
}

/// The sector shared by *every* direction from cell `a` to cell `b`.
///
/// The direction set between two convex hulls is the hull of the 9 vertex
/// differences; if all of them classify strictly into one sector (a convex
/// cone), so does every pair. Ambiguity (mixed sectors or a boundary tie) is
/// an error.
pub fn cell_pair_sector(a: &Cell, b: &Cell) -> Result<Sector, Error> {
    let mut seen: Option<u8> = None;
    let mut bad: Vec<u8> = Vec::new();
    for va in a.vertices() {
        for vb in b.vertices() {
            let v = vb.sub(va);
            let (k, tie) = classify_direction(&v.x, &v.y)?;
            if tie || seen.map_or(false, |s| s != k) {
                bad.push(k);
            }
            seen.get_or_insert(k);
        }
    }
    match (seen, bad.is_empty()) {
        (Some(k), true) => Ok(Sector { k }),
        (s, _) => Err(Error::SectorNotConstant {
            a: a.code().to_string(),
            b: b.code().to_string(),
            seen: s.into_iter().chain(bad).collect(),
        }),
    }
}

/// The sector shared by every direction from the point `p` into the cell:
/// same hull argument with the three vertex differences.
pub fn point_cell_sector(p: &Point, cell: &Cell) -> Result<Sector, Error> {
    let mut seen: Option<u8> = None;
    for v in cell.vertices() {
        let d = v.sub(p);
        let (k, tie) = classify_direction(&d.x, &d.y)?;
        if tie || seen.map_or(false, |s| s != k) {
            return Err(Error::SectorNotConstant {
                a: format!("point ({}, {})", p.x, p.y),
                b: cell.code().to_string(),
                seen: seen.into_iter().chain([k]).collect(),
            });
        }
        seen.get_or_insert(k);
    }
    Ok(Sector { k: seen.expect("three vertices scanned") })
}

/// Exhaustive verification report for the sector conditions.
#[derive(Clone, Debug, Serialize)]
pub struct SectorReport {
    pub max_depth: u32,
    pub pairs_checked: usize,
    pub triples_checked: usize,
}

/// Verifies, for every parent cell up to `max_depth` and all ordered pairs /
/// triples of its children: (3b) the direction set of each distinct pair is
/// contained in a single sector, and (3a) the sectors seen from one child
/// towards its two siblings are adjacent-but-distinct (differ by 1 mod 6).
/// Antipodality of opposite pairs is checked along the way.
pub fn verify_sector_conditions(params: &GasketParams, max_depth: u32) -> Result<SectorReport, Error> {
    let mut report = SectorReport { max_depth, pairs_checked: 0, triples_checked: 0 };
    for depth in 1..=max_depth {
        for_each_cell(params, depth - 1, &mut |parent| {
            let children: Vec<Cell> = (1..=3).map(|i| parent.child(i, params)).collect();
            let mut k = [[0u8; 3]; 3];
            for a in 0..3 {
                for b in 0..3 {
                    if a == b {
                        continue;
                    }
                    k[a][b] = cell_pair_sector(&children[a], &children[b])?.k;
                    report.pairs_checked += 1;
                }
            }
            for a in 0..3 {
                for b in 0..3 {
                    if b == a {
                        continue;
                    }
                    if k[b][a] != (k[a][b] + 3) % 6 {
                        return Err(Error::SectorSeparation {
                            parent: parent.code().to_string(),
                            a: a as u8 + 1,
                            b: b as u8 + 1,
                            ka: k[a][b],
                            kb: k[b][a],
                            diff: 3,
                        });
                    }
                    for c in 0..3 {
                        if c == a || c == b || c < b {
                            continue;
                        }
                        let diff = (6 + k[a][b] as i32 - k[a][c] as i32) as u8 % 6;
                        if diff != 1 && diff != 5 {
                            return Err(Error::SectorSeparation {
                                parent: parent.code().to_string(),
                                a: b as u8 + 1,
                                b: c as u8 + 1,
                                ka: k[a][b],
                                kb: k[a][c],
                                diff,
                            });
                        }
                        report.triples_checked += 1;
                    }
                }
            }
            Ok(())
        })?;
    }
    Ok(report)
}

/// Depth-first visit of every cell at exactly `level`, in code order.
pub(crate) fn for_each_cell<E>(
    params: &GasketParams,
    level: u32,
    f: &mut impl FnMut(&Cell) -> Result<(), E>,
) -> Result<(), E> {
    fn go<E>(
        params: &GasketParams,
        cell: &Cell,
        level: u32,
        f: &mut impl FnMut(&Cell) -> Result<(), E>,
    ) -> Result<(), E> {
        if cell.level() == level {
            return f(cell);
        }
        for i in 1..=3 {
            go(params, &cell.child(i, params), level, f)?;
        }
        Ok(())
    }
    go(params, &Cell::root(params), level, f)
}
