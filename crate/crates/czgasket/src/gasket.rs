//! The lambda-Sierpinski gasket: similitudes, symbolic codes, exact cell
//! geometry, the natural measure and point-to-cell distance bounds.
//!
//! For `0 < lambda < 1/3` the three maps `s_i(p) = lambda p + (1 - lambda) V_i`
//! contract the unit equilateral triangle with vertices `V_1 = (0,0)`,
//! `V_2 = (1,0)`, `V_3 = (1/2, sqrt3/2)` towards its corners. The attractor E
//! carries the natural measure giving each of the `3^k` level-k cells mass
//! `3^-k`; a cell has diameter `lambda^k` and two distinct children of a
//! level-k cell are separated by exactly `(1 - 2 lambda) lambda^k`, which is
//! *larger* than the child diameter — the strict inequality behind every
//! exactness argument downstream.

use crate::exactfield::{rat_pow, rat_to_f64, Rat, QReal};
use crate::Error;
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Serialize, Serializer};
use std::fmt;
use std::str::FromStr;

/// A word over the alphabet `{1, 2, 3}` addressing a nested cell of the
/// gasket; the empty word addresses the whole attractor.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Code(Vec<u8>);

impl Code {
    pub fn root() -> Self {
        Code(Vec::new())
    }

    pub fn from_symbols(symbols: &[u8]) -> Result<Self, Error> {
        for &s in symbols {
            if !(1..=3).contains(&s) {
                return Err(Error::BadSymbol(s));
            }
        }
        Ok(Code(symbols.to_vec()))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn symbols(&self) -> &[u8] {
        &self.0
    }

    pub fn child(&self, i: u8) -> Code {
        debug_assert!((1..=3).contains(&i));
        let mut v = self.0.clone();
        v.push(i);
        Code(v)
    }

    pub fn prefix(&self, n: usize) -> Code {
        Code(self.0[..n.min(self.0.len())].to_vec())
    }

    pub fn is_prefix_of(&self, other: &Code) -> bool {
        other.0.len() >= self.0.len() && other.0[..self.0.len()] == self.0[..]
    }

    pub fn common_prefix_len(&self, other: &Code) -> usize {
        self.0
            .iter()
            .zip(other.0.iter())
            .take_while(|(a, b)| a == b)
            .count()
    }

    /// Position of this code among all codes of its length, in lexicographic
    /// order (the base-3 value of the word with digits shifted to 0..2).
    pub fn index(&self) -> usize {
        self.0.iter().fold(0, |acc, &s| acc * 3 + (s as usize - 1))
    }

    pub fn from_index(level: u32, mut index: usize) -> Code {
        let mut v = vec![0u8; level as usize];
        for slot in v.iter_mut().rev() {
            *slot = (index % 3) as u8 + 1;
            index /= 3;
        }
        Code(v)
    }
}

impl fmt::Display for Code {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &s in &self.0 {
            write!(f, "{}", s)?;
        }
        Ok(())
    }
}

impl fmt::Debug for Code {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Code({})", self)
    }
}

impl FromStr for Code {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        let mut v = Vec::with_capacity(s.len());
        for c in s.bytes() {
            match c {
                b'1'..=b'3' => v.push(c - b'0'),
                _ => return Err(Error::BadSymbol(c)),
            }
        }
        Ok(Code(v))
    }
}

impl Serialize for Code {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// A point of the plane with coordinates in Q(sqrt 3). Serializes as the
/// exact coordinate pair `[x, y]`.
#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct Point {
    pub x: QReal,
    pub y: QReal,
}

impl Point {
    pub fn new(x: QReal, y: QReal) -> Self {
        Point { x, y }
    }

    pub fn origin() -> Self {
        Point::new(QReal::zero(), QReal::zero())
    }

    pub fn add(&self, o: &Point) -> Point {
        Point::new(&self.x + &o.x, &self.y + &o.y)
    }

    pub fn sub(&self, o: &Point) -> Point {
        Point::new(&self.x - &o.x, &self.y - &o.y)
    }

    pub fn scale(&self, c: &Rat) -> Point {
        Point::new(self.x.scale(c), self.y.scale(c))
    }

    pub fn dist_sq(&self, o: &Point) -> QReal {
        let dx = &self.x - &o.x;
        let dy = &self.y - &o.y;
        &(&dx * &dx) + &(&dy * &dy)
    }

    pub fn to_f64(&self) -> [f64; 2] {
        [self.x.to_f64(), self.y.to_f64()]
    }
}

/// `(b - a) x (c - a)`, twice the signed area of the triangle `a b c`.
fn cross(a: &Point, b: &Point, c: &Point) -> QReal {
    let abx = &b.x - &a.x;
    let aby = &b.y - &a.y;
    let acx = &c.x - &a.x;
    let acy = &c.y - &a.y;
    &(&abx * &acy) - &(&aby * &acx)
}

/// Contraction ratio, similarity dimension and base geometry of one gasket.
#[derive(Clone, Debug)]
pub struct GasketParams {
    lambda: Rat,
    dim: f64,
    base: [Point; 3],
}

impl GasketParams {
    /// Validates `0 < lambda < 1/3` and the float dimension identity
    /// `3 * lambda^d = 1` (to 1e-12) before handing out a parameter set.
    pub fn new(lambda: Rat) -> Result<Self, Error> {
        let third = Rat::new(BigInt::one(), BigInt::from(3));
        if !lambda.is_positive() || lambda >= third {
            return Err(Error::InvalidLambda(lambda.to_string()));
        }
        let lf = rat_to_f64(&lambda);
        let dim = (3f64).ln() / (1.0 / lf).ln();
        let identity = 3.0 * lf.powf(dim);
        if (identity - 1.0).abs() > 1e-12 {
            return Err(Error::DimensionIdentity(identity));
        }
        let half = Rat::new(BigInt::one(), BigInt::from(2));
        let base = [
            Point::origin(),
            Point::new(QReal::one(), QReal::zero()),
            Point::new(
                QReal::from_rat(half.clone()),
                QReal::new(Rat::zero(), half),
            ),
        ];
        Ok(GasketParams { lambda, dim, base })
    }

    /// Convenience constructor from an integer fraction `p/q`.
    pub fn from_fraction(p: i64, q: i64) -> Result<Self, Error> {
        if q == 0 {
            return Err(Error::InvalidLambda(format!("{}/0", p)));
        }
        Self::new(Rat::new(BigInt::from(p), BigInt::from(q)))
    }

    pub fn lambda(&self) -> &Rat {
        &self.lambda
    }

    /// Similarity dimension `d = log 3 / log(1/lambda)`, as a float.
    pub fn dim(&self) -> f64 {
        self.dim
    }

    pub fn base(&self) -> &[Point; 3] {
        &self.base
    }

    /// `lambda^k` as an exact rational.
    pub fn scale_pow(&self, k: u32) -> Rat {
        rat_pow(&self.lambda, k)
    }

    /// `s_i(p) = lambda p + (1 - lambda) V_i`.
    pub fn apply_similitude(&self, i: u8, p: &Point) -> Point {
        debug_assert!((1..=3).contains(&i));
        let shift = self.base[i as usize - 1].scale(&(Rat::one() - &self.lambda));
        p.scale(&self.lambda).add(&shift)
    }

    /// `s_code = s_{i_1} o ... o s_{i_n}` applied to `p` (innermost map is the
    /// last symbol).
    pub fn apply_word(&self, code: &Code, p: &Point) -> Point {
        let mut q = p.clone();
        for &i in code.symbols().iter().rev() {
            q = self.apply_similitude(i, &q);
        }
        q
    }

    /// The closed-triangle cell addressed by `code`, with exact vertices.
    pub fn cell(&self, code: &Code) -> Cell {
        let mut c = Cell::root(self);
        for &i in code.symbols() {
            c = c.child(i, self);
        }
        c
    }

    /// Exact distance between two distinct children of a level-`level` cell:
    /// `(1 - 2 lambda) lambda^level`.
    pub fn sibling_gap(&self, level: u32) -> Rat {
        (Rat::one() - Rat::from_integer(BigInt::from(2)) * &self.lambda) * self.scale_pow(level)
    }

    /// The point of E whose code is `prefix` followed by `period` repeated
    /// forever: the image under `s_prefix` of the fixed point of `s_period`.
    pub fn point_of_periodic_code(&self, prefix: &Code, period: &Code) -> Result<Point, Error> {
        if period.is_empty() {
            return Err(Error::EmptyPeriod);
        }
        // s_period is affine with linear part lambda^n, so its fixed point is
        // t / (1 - lambda^n) where t = s_period(origin).
        let t = self.apply_word(period, &Point::origin());
        let denom = Rat::one() - self.scale_pow(period.len() as u32);
        let fixed = t.scale(&(Rat::one() / denom));
        Ok(self.apply_word(prefix, &fixed))
    }
}

/// A level-k cell: the closed triangle `s_code(base)` together with the exact
/// affine data of `s_code`, so children are built incrementally in O(1) field
/// operations.
#[derive(Clone, Debug)]
pub struct Cell {
    code: Code,
    scale: Rat,
    shift: Point,
    vertices: [Point; 3],
}

impl Cell {
    pub fn root(params: &GasketParams) -> Cell {
        Cell {
            code: Code::root(),
            scale: Rat::one(),
            shift: Point::origin(),
            vertices: params.base.clone(),
        }
    }

    /// `s_code o s_i`: scale picks up a factor lambda, the shift moves by the
    /// parent image of `s_i(origin)`.
    pub fn child(&self, i: u8, params: &GasketParams) -> Cell {
        debug_assert!((1..=3).contains(&i));
        let t_i = params.base[i as usize - 1].scale(&(Rat::one() - &params.lambda));
        let scale = &self.scale * &params.lambda;
        let shift = self.shift.add(&t_i.scale(&self.scale));
        let vertices = [
            params.base[0].scale(&scale).add(&shift),
            params.base[1].scale(&scale).add(&shift),
            params.base[2].scale(&scale).add(&shift),
        ];
        Cell { code: self.code.child(i), scale, shift, vertices }
    }

    pub fn code(&self) -> &Code {
        &self.code
    }

    pub fn level(&self) -> u32 {
        self.code.len() as u32
    }

    pub fn vertices(&self) -> &[Point; 3] {
        &self.vertices
    }

    /// Natural measure `3^-level`.
    pub fn measure(&self) -> Rat {
        Rat::new(BigInt::one(), BigInt::from(3).pow(self.level()))
    }

    /// Squared diameter `lambda^(2 level)` (the squared side of the triangle).
    pub fn diam_sq(&self) -> Rat {
        &self.scale * &self.scale
    }

    pub fn barycenter(&self) -> Point {
        let third = Rat::new(BigInt::one(), BigInt::from(3));
        self.vertices[0]
            .add(&self.vertices[1])
            .add(&self.vertices[2])
            .scale(&third)
    }

    /// Exact membership of `p` in the closed triangle (vertices are CCW).
    pub fn contains(&self, p: &Point) -> bool {
        let [v0, v1, v2] = &self.vertices;
        cross(v0, v1, p).sign() >= 0 && cross(v1, v2, p).sign() >= 0 && cross(v2, v0, p).sign() >= 0
    }
}

/// Exact lower/upper bounds `min |p - q|^2` and `max |p - q|^2` over `q` in a
/// closed cell triangle.
#[derive(Clone, Debug)]
pub struct DistBounds {
    pub min_sq: QReal,
    pub max_sq: QReal,
}

/// Squared distance from `p` to the closed segment `[a, b]`, exactly.
fn segment_dist_sq(p: &Point, a: &Point, b: &Point) -> QReal {
    let ab = b.sub(a);
    let ap = p.sub(a);
    let dot = &(&ap.x * &ab.x) + &(&ap.y * &ab.y);
    if dot.sign() <= 0 {
        return p.dist_sq(a);
    }
    let len_sq = &(&ab.x * &ab.x) + &(&ab.y * &ab.y);
    if (&dot - &len_sq).sign() >= 0 {
        return p.dist_sq(b);
    }
    // interior projection: |ap|^2 - dot^2 / |ab|^2
    let ap_sq = &(&ap.x * &ap.x) + &(&ap.y * &ap.y);
    let correction = &(&dot * &dot) * &len_sq.inv().expect("segment has positive length");
    &ap_sq - &correction
}

/// Exact min/max squared distance from a point to a closed cell. The minimum
/// is the distance to the triangle (zero if inside); the maximum over the
/// triangle is attained at a vertex, and cell vertices lie in E, so both
/// bounds are tight for the gasket.
pub fn dist_bounds(p: &Point, cell: &Cell) -> DistBounds {
    let [v0, v1, v2] = cell.vertices();
    let min_sq = if cell.contains(p) {
        QReal::zero()
    } else {
        let mut m = segment_dist_sq(p, v0, v1);
        for (a, b) in [(v1, v2), (v2, v0)] {
            let d = segment_dist_sq(p, a, b);
            if (&d - &m).sign() < 0 {
                m = d;
            }
        }
        m
    };
    let mut max_sq = p.dist_sq(v0);
    for v in [v1, v2] {
        let d = p.dist_sq(v);
        if (&d - &max_sq).sign() > 0 {
            max_sq = d;
        }
    }
    DistBounds { min_sq, max_sq }
}

/// Exact bracketing of the measure of a closed ball.
#[derive(Clone, Debug, Serialize)]
pub struct BallMeasure {
    /// Total mass of cells certified inside the ball.
    #[serde(serialize_with = "crate::exactfield::serialize_rat")]
    pub lower: Rat,
    /// `lower` plus the mass of cells still straddling the sphere at the
    /// depth cap.
    #[serde(serialize_with = "crate::exactfield::serialize_rat")]
    pub upper: Rat,
    /// True if any straddling cell survived to the cap (so `upper > lower`).
    pub depth_capped: bool,
}

/// Brackets `mu(closed ball B(center, radius))` by classifying cells against
/// the sphere exactly and recursing on straddlers down to `depth_cap`.
pub fn ball_measure_bounds(
    params: &GasketParams,
    center: &Point,
    radius: &Rat,
    depth_cap: u32,
) -> Result<BallMeasure, Error> {
    if !radius.is_positive() || radius > &Rat::one() {
        return Err(Error::InvalidRadius(radius.to_string()));
    }
    let r_sq = QReal::from_rat(radius * radius);
    let mut out = BallMeasure {
        lower: Rat::zero(),
        upper: Rat::zero(),
        depth_capped: false,
    };
    let root = Cell::root(params);
    classify_ball(params, center, &r_sq, &root, depth_cap, &mut out);
    Ok(out)
}

fn classify_ball(
    params: &GasketParams,
    center: &Point,
    r_sq: &QReal,
    cell: &Cell,
    depth_cap: u32,
    out: &mut BallMeasure,
) {
    let db = dist_bounds(center, cell);
    if (&db.max_sq - r_sq).sign() <= 0 {
        // cell entirely inside the closed ball
        out.lower += cell.measure();
        out.upper += cell.measure();
    } else if (&db.min_sq - r_sq).sign() > 0 {
        // cell entirely outside
    } else if cell.level() >= depth_cap {
        out.upper += cell.measure();
        out.depth_capped = true;
    } else {
        for i in 1..=3 {
            classify_ball(params, center, r_sq, &cell.child(i, params), depth_cap, out);
        }
    }
}

/// A point of E addressed by an eventually periodic code
/// `prefix . period period period ...`, stored with its exact coordinates.
#[derive(Clone, Debug)]
pub struct EPoint {
    prefix: Code,
    period: Code,
    point: Point,
}

impl EPoint {
    pub fn new(params: &GasketParams, prefix: Code, period: Code) -> Result<Self, Error> {
        let point = params.point_of_periodic_code(&prefix, &period)?;
        Ok(EPoint { prefix, period, point })
    }

    pub fn point(&self) -> &Point {
        &self.point
    }

    pub fn prefix(&self) -> &Code {
        &self.prefix
    }

    pub fn period(&self) -> &Code {
        &self.period
    }

    /// Symbol at 0-based position `i` of the infinite code.
    pub fn symbol_at(&self, i: usize) -> u8 {
        if i < self.prefix.len() {
            self.prefix.symbols()[i]
        } else {
            self.period.symbols()[(i - self.prefix.len()) % self.period.len()]
        }
    }

    /// The first `n` symbols, i.e. the code of the level-n cell containing
    /// this point.
    pub fn code_prefix(&self, n: usize) -> Code {
        Code((0..n).map(|i| self.symbol_at(i)).collect())
    }

    /// The corner `corner` of the cell `code`: the point with code
    /// `code . corner^inf` (the fixed point of `s_corner` pushed through
    /// `s_code`).
    pub fn cell_vertex(params: &GasketParams, code: &Code, corner: u8) -> Result<Self, Error> {
        Self::new(params, code.clone(), Code::from_symbols(&[corner])?)
    }

    /// `s_j(self)`: prepends `j` to the prefix.
    pub fn shifted(&self, params: &GasketParams, j: u8) -> Result<Self, Error> {
        let mut symbols = vec![j];
        symbols.extend_from_slice(self.prefix.symbols());
        Self::new(params, Code::from_symbols(&symbols)?, self.period.clone())
    }
}

impl fmt::Display for EPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})({})^inf", self.prefix, self.period)
    }
}

/// Parses `"(prefix)(period)^inf"` (the notation printed by [`EPoint`]);
/// the `^inf` suffix is optional, the prefix group may be empty or omitted
/// entirely (`"(12)^inf"` is the purely periodic point).
pub fn parse_periodic_code(s: &str) -> Result<(Code, Code), Error> {
    let bad = || Error::BadCodeFormat(s.to_string());
    let rest = s.trim().strip_prefix('(').ok_or_else(bad)?;
    let (first_str, rest) = rest.split_once(')').ok_or_else(bad)?;
    let (prefix_str, period_str, rest) = match rest.strip_prefix('(') {
        Some(rest) => {
            let (period_str, rest) = rest.split_once(')').ok_or_else(bad)?;
            (first_str, period_str, rest)
        }
        None => ("", first_str, rest),
    };
    if !(rest.is_empty() || rest == "^inf") {
        return Err(bad());
    }
    let prefix: Code = prefix_str.parse()?;
    let period: Code = period_str.parse()?;
    if period.is_empty() {
        return Err(Error::EmptyPeriod);
    }
    Ok((prefix, period))
}

/// Uniformly random eventually periodic point: prefix length in
/// `0..=max_prefix_len`, period length in `1..=max_period_len`, symbols
/// uniform over the alphabet.
pub fn sample_epoint<R: rand::Rng + ?Sized>(
    params: &GasketParams,
    rng: &mut R,
    max_prefix_len: usize,
    max_period_len: usize,
) -> EPoint {
    let plen = rng.gen_range(0..=max_prefix_len);
    let prefix: Vec<u8> = (0..plen).map(|_| rng.gen_range(1..=3u8)).collect();
    let qlen = rng.gen_range(1..=max_period_len.max(1));
    let period: Vec<u8> = (0..qlen).map(|_| rng.gen_range(1..=3u8)).collect();
    EPoint::new(
        params,
        Code::from_symbols(&prefix).expect("alphabet respected"),
        Code::from_symbols(&period).expect("alphabet respected"),
    )
    .expect("nonempty period")
}

pub fn min_vertex_gap_sq(a: &Cell, b: &Cell) -> QReal {
    let mut best: Option<QReal> = None;
    for v in a.vertices() {
        let db = dist_bounds(v, b);
        best = Some(match best {
            None => db.min_sq,
            Some(cur) => {
                if (&db.min_sq - &cur).sign() < 0 {
                    db.min_sq
                } else {
                    cur
                }
            }
        });
    }
    best.expect("three vertices scanned")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactfield::{rat, rat_int};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn params_quarter() -> GasketParams {
        GasketParams::from_fraction(1, 4).unwrap()
    }

    #[test]
    fn lambda_validation() {
        assert!(GasketParams::from_fraction(1, 3).is_err());
        assert!(GasketParams::from_fraction(0, 1).is_err());
        assert!(GasketParams::from_fraction(-1, 4).is_err());
        assert!(GasketParams::from_fraction(2, 5).is_err());
        assert!(GasketParams::from_fraction(1, 4).is_ok());
        assert!(GasketParams::from_fraction(3, 10).is_ok());
    }

    #[test]
    fn dimension_value() {
        let p = params_quarter();
        assert!((p.dim() - 3f64.ln() / 4f64.ln()).abs() < 1e-15);
        assert!((3.0 * 0.25f64.powf(p.dim()) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn base_triangle_is_unit_equilateral() {
        let p = params_quarter();
        let [a, b, c] = p.base();
        assert_eq!(a.dist_sq(b), QReal::one());
        assert_eq!(b.dist_sq(c), QReal::one());
        assert_eq!(c.dist_sq(a), QReal::one());
    }

    #[test]
    fn cell_12_exact_geometry() {
        // s_1(s_2(.)) at lambda = 1/4: first vertex is s_1(s_2(V1)) =
        // lambda (1 - lambda, 0) = (3/16, 0)
        let p = params_quarter();
        let cell = p.cell(&"12".parse().unwrap());
        assert_eq!(cell.level(), 2);
        assert_eq!(cell.measure(), rat(1, 9));
        assert_eq!(cell.diam_sq(), rat(1, 256));
        assert_eq!(
            cell.vertices()[0],
            Point::new(QReal::from_rat(rat(3, 16)), QReal::zero())
        );
        // all three sides have the cell diameter
        let [a, b, c] = cell.vertices();
        for (u, v) in [(a, b), (b, c), (c, a)] {
            assert_eq!(u.dist_sq(v), QReal::from_rat(rat(1, 256)));
        }
    }

    #[test]
    fn apply_word_matches_cell_construction() {
        let p = params_quarter();
        let code: Code = "3121".parse().unwrap();
        let cell = p.cell(&code);
        for (j, v) in cell.vertices().iter().enumerate() {
            assert_eq!(*v, p.apply_word(&code, &p.base()[j]));
        }
    }

    #[test]
    fn children_nest_and_partition_measure() {
        let p = params_quarter();
        let parent = p.cell(&"21".parse().unwrap());
        let mut total = Rat::zero();
        for i in 1..=3 {
            let ch = parent.child(i, &p);
            total += ch.measure();
            for v in ch.vertices() {
                assert!(parent.contains(v));
            }
        }
        assert_eq!(total, parent.measure());
    }

    #[test]
    fn sibling_gap_is_exact() {
        let p = params_quarter();
        for (parent_code, level) in [("", 0u32), ("3", 1), ("12", 2)] {
            let parent: Code = parent_code.parse().unwrap();
            let gap = p.sibling_gap(level);
            let gap_sq = QReal::from_rat(&gap * &gap);
            let cells: Vec<Cell> = (1..=3).map(|i| p.cell(&parent.child(i))).collect();
            for a in 0..3 {
                for b in 0..3 {
                    if a == b {
                        continue;
                    }
                    let m = min_vertex_gap_sq(&cells[a], &cells[b]);
                    // separation at least the gap...
                    assert!((&m - &gap_sq).sign() >= 0);
                }
            }
            // ...and attained by some vertex pair
            let attained = (0..3).any(|a| {
                (0..3).any(|b| {
                    a != b && min_vertex_gap_sq(&cells[a], &cells[b]) == gap_sq
                })
            });
            assert!(attained);
        }
    }

    #[test]
    fn periodic_fixed_points() {
        let p = params_quarter();
        // fixed points of the three generators are the base vertices
        for i in 1..=3u8 {
            let pt = p
                .point_of_periodic_code(&Code::root(), &Code::from_symbols(&[i]).unwrap())
                .unwrap();
            assert_eq!(pt, p.base()[i as usize - 1]);
        }
        // fixed point of s_1 s_2 is (lambda/(1+lambda), 0) = (1/5, 0)
        let pt = p
            .point_of_periodic_code(&Code::root(), &"12".parse().unwrap())
            .unwrap();
        assert_eq!(pt, Point::new(QReal::from_rat(rat(1, 5)), QReal::zero()));
    }

    #[test]
    fn epoint_consistency() {
        let p = params_quarter();
        let code: Code = "12".parse().unwrap();
        let cell = p.cell(&code);
        for corner in 1..=3u8 {
            let ep = EPoint::cell_vertex(&p, &code, corner).unwrap();
            assert_eq!(ep.point(), &cell.vertices()[corner as usize - 1]);
        }
        let z = EPoint::new(&p, "31".parse().unwrap(), "12".parse().unwrap()).unwrap();
        assert_eq!(z.symbol_at(0), 3);
        assert_eq!(z.symbol_at(1), 1);
        assert_eq!(z.symbol_at(2), 1);
        assert_eq!(z.symbol_at(3), 2);
        assert_eq!(z.symbol_at(4), 1);
        assert_eq!(z.code_prefix(5).to_string(), "31121");
        // the point lies in the cell of every code prefix
        for n in 0..=6 {
            assert!(p.cell(&z.code_prefix(n)).contains(z.point()));
        }
        // shifting by s_j prepends to the code and maps the point
        let sz = z.shifted(&p, 2).unwrap();
        assert_eq!(sz.code_prefix(3).to_string(), "231");
        assert_eq!(sz.point(), &p.apply_similitude(2, z.point()));
    }

    #[test]
    fn parse_periodic_code_roundtrip() {
        let (pre, per) = parse_periodic_code("(3)(12)^inf").unwrap();
        assert_eq!(pre.to_string(), "3");
        assert_eq!(per.to_string(), "12");
        let (pre, per) = parse_periodic_code("()(2)").unwrap();
        assert!(pre.is_empty());
        assert_eq!(per.to_string(), "2");
        let (pre, per) = parse_periodic_code("(12)^inf").unwrap();
        assert!(pre.is_empty());
        assert_eq!(per.to_string(), "12");
        assert!(parse_periodic_code("()").is_err());
        assert!(parse_periodic_code("(1)()^inf").is_err());
        assert!(parse_periodic_code("(1)(4)^inf").is_err());
        let p = params_quarter();
        let z = EPoint::new(&p, "3".parse().unwrap(), "12".parse().unwrap()).unwrap();
        assert_eq!(z.to_string(), "(3)(12)^inf");
    }

    #[test]
    fn dist_bounds_outside_cell() {
        let p = params_quarter();
        let cell = p.cell(&"2".parse().unwrap());
        let db = dist_bounds(&Point::origin(), &cell);
        // nearest point of s_2(base) to the origin is (3/4, 0), farthest (1, 0)
        assert_eq!(db.min_sq, QReal::from_rat(rat(9, 16)));
        assert_eq!(db.max_sq, QReal::one());
    }

    #[test]
    fn dist_bounds_inside_cell() {
        let p = params_quarter();
        let cell = p.cell(&"13".parse().unwrap());
        let db = dist_bounds(&cell.barycenter(), &cell);
        assert!(db.min_sq.is_zero());
        // barycenter-to-vertex distance: diam^2 / 3
        assert_eq!(db.max_sq, QReal::from_rat(cell.diam_sq() / rat_int(3)));
    }

    #[test]
    fn dist_bounds_edge_projection() {
        let p = params_quarter();
        // point above the middle of the root base edge but outside cell "1":
        // nearest point is the vertex (1/4, 0) or an edge projection
        let cell = p.cell(&"1".parse().unwrap());
        let q = Point::new(QReal::from_rat(rat(1, 2)), QReal::zero());
        let db = dist_bounds(&q, &cell);
        assert_eq!(db.min_sq, QReal::from_rat(rat(1, 16)));
    }

    #[test]
    fn ball_measure_unit_radius() {
        let p = params_quarter();
        let m = ball_measure_bounds(&p, &Point::origin(), &Rat::one(), 8).unwrap();
        assert_eq!(m.lower, Rat::one());
        assert_eq!(m.upper, Rat::one());
        assert!(!m.depth_capped);
    }

    #[test]
    fn ball_measure_lambda_radius() {
        // closed ball of radius lambda about the corner captures exactly the
        // first cell
        let p = params_quarter();
        let m = ball_measure_bounds(&p, &Point::origin(), &rat(1, 4), 8).unwrap();
        assert_eq!(m.lower, rat(1, 3));
        assert_eq!(m.upper, rat(1, 3));
    }

    #[test]
    fn ball_measure_rejects_bad_radius() {
        let p = params_quarter();
        assert!(ball_measure_bounds(&p, &Point::origin(), &rat_int(0), 8).is_err());
        assert!(ball_measure_bounds(&p, &Point::origin(), &rat_int(2), 8).is_err());
    }

    #[test]
    fn ball_measure_generic_radius_brackets() {
        let p = params_quarter();
        let z = EPoint::new(&p, "1".parse().unwrap(), "23".parse().unwrap()).unwrap();
        let r = rat(1, 10);
        let m = ball_measure_bounds(&p, z.point(), &r, 14).unwrap();
        assert!(!num_traits::Signed::is_negative(&(&m.upper - &m.lower)));
        assert!(m.lower.is_positive());
        // Ahlfors-David bracket with constant 3: r^d / 3 <= mu <= 3 r^d
        let rd = rat_to_f64(&r).powf(p.dim());
        assert!(rat_to_f64(&m.upper) <= 3.0 * rd * 1.01);
        assert!(rat_to_f64(&m.lower) >= rd / 3.0 * 0.99);
    }

    #[test]
    fn code_index_roundtrip() {
        for level in 0..5u32 {
            let n = 3usize.pow(level);
            for idx in 0..n {
                let c = Code::from_index(level, idx);
                assert_eq!(c.len() as u32, level);
                assert_eq!(c.index(), idx);
            }
        }
        assert_eq!("123".parse::<Code>().unwrap().index(), 5); // digits 012 base 3
    }

    #[test]
    fn random_epoints_lie_in_their_cells() {
        let p = params_quarter();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let z = sample_epoint(&p, &mut rng, 5, 4);
            for n in 0..8 {
                assert!(p.cell(&z.code_prefix(n)).contains(z.point()));
            }
        }
    }
}
