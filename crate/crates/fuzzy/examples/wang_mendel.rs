//! Table-lookup rule learning from samples of a smooth function, with type-I
//! and interval type-II labels, evaluated through a shared-grade rule bank.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use t2fuzzy::fls::{wang_mendel_learn, LearnOptions};
use t2fuzzy::{LinguisticVariable, RuleBank};

fn target(x: f64, y: f64) -> f64 {
    (2.0 * x).sin() + 0.5 * y * y
}

fn main() -> t2fuzzy::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let samples: Vec<(Vec<f64>, f64)> = (0..2000)
        .map(|_| {
            let (x, y) = (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            (vec![x, y], target(x, y))
        })
        .collect();
    for labels in [3, 5, 7] {
        let vars = |rho| -> t2fuzzy::Result<Vec<LinguisticVariable>> {
            Ok(vec![
                LinguisticVariable::uniform("x", -1.0, 1.0, labels, rho)?,
                LinguisticVariable::uniform("y", -1.0, 1.0, labels, rho)?,
            ])
        };
        let (t1, rep) = wang_mendel_learn(&samples, vars(None)?, &LearnOptions::default())?;
        let (it2, _) = wang_mendel_learn(&samples, vars(Some(0.2))?, &LearnOptions::default())?;
        let mut bank = RuleBank::new(&[it2])?;
        let mut out = [None];
        let (mut e1, mut e2, mut n) = (0.0, 0.0, 0);
        for i in 0..=20 {
            for j in 0..=20 {
                let x = [-1.0 + 0.1 * i as f64, -1.0 + 0.1 * j as f64];
                let truth = target(x[0], x[1]);
                e1 += (t1.infer_t1(&x)? - truth).powi(2);
                bank.eval_it2(&x, &mut out)?;
                e2 += (out[0].expect("rules cover the grid").center - truth).powi(2);
                n += 1;
            }
        }
        println!(
            "{labels} labels: {} rules of {} cells, rms error type-I {:.4}, interval center {:.4}",
            rep.rules,
            rep.cells,
            (e1 / n as f64).sqrt(),
            (e2 / n as f64).sqrt()
        );
    }
    Ok(())
}
