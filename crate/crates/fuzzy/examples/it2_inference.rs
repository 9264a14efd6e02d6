//! A two-input interval type-II rule base with uncertain-mean gaussian labels:
//! firing intervals, center-of-sets output and its type-I downgrade.

use t2fuzzy::fls::{Rule, RuleBase};
use t2fuzzy::{IntervalT1, LinguisticVariable, TNorm};

fn main() -> t2fuzzy::Result<()> {
    let vars = vec![
        LinguisticVariable::uniform("error", -1.0, 1.0, 3, Some(0.3))?,
        LinguisticVariable::uniform("rate", -1.0, 1.0, 3, Some(0.3))?,
    ];
    let mut rules = Vec::new();
    for i in 0..3 {
        for j in 0..3 {
            let y = (i as f64 - 1.0) + 0.5 * (j as f64 - 1.0);
            rules.push(Rule {
                antecedent: vec![i, j],
                consequent: IntervalT1::new(y, 0.1),
                weight: 1.0,
            });
        }
    }
    let it2 = RuleBase::new(vars, "torque", rules, TNorm::Product)?;
    let t1 = it2.downgrade_to_t1()?;
    println!("{:>6} {:>6} {:>22} {:>10} {:>10}", "error", "rate", "interval output", "center", "type-I");
    for (e, r) in [(-0.8, 0.1), (0.0, 0.0), (0.3, -0.6), (0.9, 0.9)] {
        let x = [e, r];
        let km = it2.infer_it2_km(&x)?;
        println!(
            "{e:>6.2} {r:>6.2}   [{:>8.4}, {:>8.4}] {:>10.4} {:>10.4}",
            km.lower,
            km.upper,
            km.center(),
            t1.infer_t1(&x)?
        );
    }
    let fired = it2.fire_it2(&[0.3, -0.6])?;
    println!("firing intervals at (0.3, -0.6):");
    for (rule, f) in it2.rules.iter().zip(&fired) {
        println!("  {:?}: [{:.4}, {:.4}]", rule.antecedent, f[0], f[1]);
    }
    Ok(())
}
