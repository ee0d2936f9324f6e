//! Exact two-sided brackets for ball measures: mu(B(z, r)) vs. r^d.
//!
//! The natural measure is Ahlfors-David regular with constant 3:
//! r^d / 3 <= mu(B(z, r)) <= 3 r^d for z in the gasket and r <= 1. The
//! bracketing here is exact — cells are classified against the sphere with
//! rational arithmetic, and [lower, upper] is a certified enclosure of the
//! true measure.

use czgasket::exactfield::{rat, rat_to_f64};
use czgasket::gasket::{ball_measure_bounds, sample_epoint};
use czgasket::{Code, EPoint, GasketParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), czgasket::Error> {
    let params = GasketParams::from_fraction(1, 4)?;
    let z = EPoint::new(&params, Code::root(), "123".parse()?)?;

    println!("exact radii at z = {}:", z);
    for (r, label) in [(rat(1, 1), "r = 1"), (rat(1, 4), "r = lambda"), (rat(1, 16), "r = lambda^2")] {
        let b = ball_measure_bounds(&params, z.point(), &r, 12)?;
        println!("  {}: mu in [{}, {}]", label, b.lower, b.upper);
    }

    println!("\nrandom balls against the regularity bracket [r^d/3, 3 r^d]:");
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst: f64 = 1.0;
    for _ in 0..12 {
        let center = sample_epoint(&params, &mut rng, 5, 3);
        let radius = czgasket::Rat::from_float(rng.gen_range(0.05..=1.0f64)).expect("finite");
        let b = ball_measure_bounds(&params, center.point(), &radius, 14)?;
        let rd = rat_to_f64(&radius).powf(params.dim());
        let factor = (rat_to_f64(&b.upper) / rd).max(rd / rat_to_f64(&b.lower));
        worst = worst.max(factor);
        println!(
            "  r = {:.4}  mu in [{:.6e}, {:.6e}]  r^d = {:.6e}  factor <= {:.3}",
            rat_to_f64(&radius),
            rat_to_f64(&b.lower),
            rat_to_f64(&b.upper),
            rd,
            factor
        );
    }
    println!("\nworst certified factor: {:.3} (theory: 3)", worst);
    Ok(())
}
