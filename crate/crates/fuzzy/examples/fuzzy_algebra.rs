//! Arithmetic on type-I fuzzy numbers: the extension principle on a grid
//! against the closed forms for interval and gaussian affine combinations.

use t2fuzzy::t1::{affine_combine_gaussian, affine_combine_interval, centroid_defuzz, extend_binary};
use t2fuzzy::{FuzzyNumber, GaussianT1, GridSpec, IntervalT1, TNorm};

fn main() -> t2fuzzy::Result<()> {
    let a = IntervalT1::new(2.0, 0.5);
    let b = IntervalT1::new(-1.0, 0.25);
    let closed = affine_combine_interval(&[a, b], &[3.0, -2.0], 1.0)?;
    let grid = extend_binary(&a.into(), &b.into(), |x, y| 3.0 * x - 2.0 * y + 1.0, TNorm::Minimum, GridSpec::Step(0.01))?;
    println!("3a - 2b + 1 with a = 2 +/- 0.5, b = -1 +/- 0.25");
    println!("  closed form: [{:.4}, {:.4}]", closed.lo(), closed.hi());
    let (lo, hi) = grid.support().expect("non-empty");
    println!("  extension principle on a grid: [{lo:.4}, {hi:.4}]");

    let g1 = GaussianT1::new(1.0, 0.2);
    let g2 = GaussianT1::new(3.0, 0.1);
    for tnorm in [TNorm::Minimum, TNorm::Product] {
        let c = affine_combine_gaussian(&[g1, g2], &[1.0, 1.0], 0.0, tnorm)?;
        let num = extend_binary(&g1.into(), &g2.into(), |x, y| x + y, tnorm, GridSpec::Points(201))?;
        println!(
            "g1 + g2 under {tnorm:?}: mean {:.4} sigma {:.4}; grid centroid {:.4}",
            c.mean,
            c.sigma,
            centroid_defuzz(&num)?
        );
    }

    let tri: FuzzyNumber = t2fuzzy::MembershipFunction::triangular(0.0, 1.0, 3.0).into();
    println!("centroid of triangle (0, 1, 3): {:.4}", centroid_defuzz(&tri)?);
    Ok(())
}
