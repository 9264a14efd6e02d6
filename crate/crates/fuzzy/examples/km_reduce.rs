//! Interval type reduction: exact Karnik-Mendel switch points, the closed-form
//! approximation and a brute-force check over all endpoint combinations.

use t2fuzzy::reduction::{approx_gc_interval, km_bruteforce, km_exact_interval};

fn main() -> t2fuzzy::Result<()> {
    let c = [1.0, 2.0, 3.0, 4.5, 6.0];
    let s = [0.1, 0.2, 0.1, 0.3, 0.2];
    let h = [0.3, 0.9, 1.0, 0.6, 0.2];
    for scale in [0.01, 0.05, 0.2] {
        let delta: Vec<f64> = h.iter().map(|h| h * scale).collect();
        let km = km_exact_interval(&c, &s, &h, &delta)?;
        let (blo, bhi) = km_bruteforce(&c, &s, &h, &delta)?;
        let (ap, q) = approx_gc_interval(&c, &s, &h, &delta)?;
        println!("weight spread {:.0}% of height (ratio {:.3})", scale * 100.0, q.ratio);
        println!(
            "  exact   [{:.5}, {:.5}] in {}+{} iterations",
            km.lower, km.upper, km.iterations_lower, km.iterations_upper
        );
        println!("  brute   [{blo:.5}, {bhi:.5}]");
        println!(
            "  approx  [{:.5}, {:.5}]{}",
            ap.lo(),
            ap.hi(),
            if q.warning { "  (outside the validity regime)" } else { "" }
        );
    }
    Ok(())
}
