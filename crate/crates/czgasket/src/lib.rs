//! Singular integral operators on lambda-Sierpinski gaskets, in exact arithmetic.
//!
//! For a contraction ratio `0 < lambda < 1/3` the gasket `E` is the attractor of
//! three similitudes that shrink an equilateral triangle towards its corners.
//! Because the three level-k cells of a cell are separated by a definite gap,
//! the direction and the distance between points in *different* cells are
//! controlled by combinatorics alone, and a natural Calderon-Zygmund kernel
//!
//! ```text
//! K(x, y) = Omega((x - y) / |x - y|) / h(|x - y|)
//! ```
//!
//! (a +/-1 sector function over a piecewise-constant radial profile) can be
//! evaluated *exactly* on pairs of gasket points. This crate builds that
//! kernel, verifies its cancellation and regularity properties in exact
//! rational arithmetic over the field Q(sqrt 3), probes the L^2 operator norms
//! of discretized truncations, and certifies the annulus geometry that makes
//! principal values oscillate at almost every point instead of converging.
//!
//! Modules, bottom up:
//!
//! * [`exactfield`] - rationals and the quadratic field Q(sqrt 3); every
//!   coordinate in the crate lives here and every advertised "exact" verdict
//!   is a sign computation in this field, never a float tolerance.
//! * [`gasket`] - similitudes, symbolic codes, cells, the natural measure,
//!   exact point-to-cell distance bounds and ball-measure bracketing.
//! * [`kernel`] - the sector function Omega, the radial profile h (plateau
//!   and smooth variants), exact kernel evaluation and the Calderon-Zygmund
//!   estimates (growth and rigidity).
//! * [`operator`] - cell-constant functions, exact truncated operators
//!   T_eps(f), discretized operator matrices and power-iteration norms.
//! * [`pv`] - certified isolating annuli around switch scales of a point's
//!   code, and the exact oscillation lower bound for principal values.
//! * [`cli`] - the `czgasket` command-line front end.
//!
//! The `examples/` directory is the guided tour: each example is a runnable
//! demonstration of one capability (exact cancellation, kernel estimates,
//! sector geometry, norm probes, certified principal-value divergence, ball
//! measures, cell dumps).

pub mod cli;
pub mod exactfield;
pub mod gasket;
pub mod kernel;
pub mod operator;
pub mod pv;

pub use exactfield::{QReal, Rat};
pub use gasket::{Cell, Code, DistBounds, EPoint, GasketParams, Point};
pub use kernel::{KernelSpec, KernelVariant, Sector};
pub use operator::{CellFunction, OpMatrix};
pub use pv::PvCertificate;

/// Crate-wide error type. Variants that report a falsified exact property
/// carry enough of the witness to reconstruct the failure.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("division by zero in Q(sqrt 3)")]
    DivisionByZero,

    #[error("lambda must be a rational in (0, 1/3), got {0}")]
    InvalidLambda(String),

    #[error("dimension identity check failed: 3 * lambda^d = {0}, expected 1")]
    DimensionIdentity(f64),

    #[error("code symbol {0} outside alphabet {{1,2,3}}")]
    BadSymbol(u8),

    #[error("periodic code must have a nonempty period")]
    EmptyPeriod,

    #[error("malformed periodic code {0:?}; expected \"(prefix)(period)^inf\"")]
    BadCodeFormat(String),

    #[error("radius must satisfy 0 < r <= 1, got {0}")]
    InvalidRadius(String),

    #[error("sector direction undefined: the two points coincide")]
    CoincidentPoints,

    #[error("sector width check failed: epsilon = {epsilon} does not leave a gap below pi/6 = {limit}")]
    SectorTooWide { epsilon: f64, limit: f64 },

    #[error("direction set of cell pair ({a}, {b}) is not contained in one sector (saw sectors {seen:?})")]
    SectorNotConstant { a: String, b: String, seen: Vec<u8> },

    #[error("sector separation violated at parent {parent}: sectors {ka} and {kb} for children {a},{b} differ by {diff} mod 6")]
    SectorSeparation { parent: String, a: u8, b: u8, ka: u8, kb: u8, diff: u8 },

    #[error("squared distance {dist_sq} falls in the gap between radial plateaus; the pair is not in gasket-admissible position")]
    PlateauGap { dist_sq: String },

    #[error("radial profile undefined for r <= 0")]
    NonPositiveRadius,

    #[error("kernel variant mismatch: {0} requires the plateau variant")]
    PlateauRequired(&'static str),

    #[error("kernel rigidity violated: K(x,y) = {kxy} but K(z,y) = {kzy} inside the comparison gate (x={x}, z={z}, y={y})")]
    RigidityViolated { x: String, z: String, y: String, kxy: String, kzy: String },

    #[error("matrix level {level} would need {nodes} nodes, above the 10^4 guard")]
    MatrixTooLarge { level: u32, nodes: usize },

    #[error("power iteration did not converge in {iters} iterations (last relative change {rel_change:e})")]
    NormNotConverged { iters: u64, rel_change: f64 },

    #[error("truncation cutoff straddles a cell even at an aligned scale; this falsifies the gap inequality")]
    AlignedStraddle { cell: String },

    #[error("eventually periodic code for x is too short: need {need} symbols, prefix+period gives {have}")]
    CodeTooShort { need: usize, have: usize },

    #[error("index {0} is not a switch index of the code")]
    NotSwitchIndex(usize),

    #[error("no isolating annulus certified for switch index {index} with m <= {m_cap}")]
    AnnulusExhausted { index: usize, m_cap: u32 },

    #[error("annulus certification undecided at depth cap {depth}: cell {cell} straddles the annulus")]
    CertificationUndecided { depth: u32, cell: String },

    #[error("oscillation bound invalid: {0}")]
    OscillationInvalid(String),

    #[error("invalid CLI value for {flag}: {message}")]
    CliUsage { flag: &'static str, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("serialization failed: {0}")]
    Serialize(#[from] serde_json::Error),
}
