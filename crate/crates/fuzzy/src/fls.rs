//! Rule-based inference with singleton fuzzification: type-I and interval
//! type-II engines with center-of-sets output, table-lookup rule learning and
//! the type-II to type-I downgrade.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{FuzzyError, Result};
use crate::reduction::{km_pass, KmResult};
use crate::t1::{linspace, IntervalT1, MembershipFunction, TNorm};
use crate::t2::It2Set;

/// Grade below which a sample counts as outside every label of a variable.
const UNCOVERED: f64 = 1e-6;

/// Linguistic label shape: a type-I membership function or an interval type-II set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LabelSet {
    It2(It2Set),
    T1(MembershipFunction),
}

impl LabelSet {
    #[inline]
    pub fn fou(&self, x: f64) -> (f64, f64) {
        match self {
            LabelSet::It2(s) => s.fou(x),
            LabelSet::T1(mf) => {
                let g = mf.eval(x);
                (g, g)
            }
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            LabelSet::It2(s) => s.validate(),
            LabelSet::T1(mf) => mf.validate(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Label {
    pub name: String,
    pub set: LabelSet,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Flavor {
    T1,
    It2,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinguisticVariable {
    pub name: String,
    pub range: [f64; 2],
    pub labels: Vec<Label>,
}

impl LinguisticVariable {
    /// `count` gaussian labels with evenly spaced centers across `range`,
    /// neighbours crossing at grade 0.5. With `rho = Some(r)` each label is an
    /// interval set whose mean ranges over `center -/+ r sigma`.
    pub fn uniform(name: &str, lo: f64, hi: f64, count: usize, rho: Option<f64>) -> Result<Self> {
        if count == 0 || !(lo < hi) {
            return Err(FuzzyError::Config(format!("variable {name}: need count >= 1 and lo < hi, got {count}, [{lo}, {hi}]")));
        }
        let (centers, sigma) = if count == 1 {
            (vec![0.5 * (lo + hi)], 0.5 * (hi - lo))
        } else {
            let spacing = (hi - lo) / (count - 1) as f64;
            (linspace(lo, hi, count), spacing / (2.0 * (2.0 * std::f64::consts::LN_2).sqrt()))
        };
        let names: &[&str] = match count {
            2 => &["low", "high"],
            3 => &["low", "medium", "high"],
            _ => &[],
        };
        let labels = centers
            .iter()
            .enumerate()
            .map(|(i, &m)| {
                let set = match rho {
                    None => LabelSet::T1(MembershipFunction::gaussian(m, sigma)),
                    Some(r) => LabelSet::It2(It2Set::uncertain_mean(m - r * sigma, m + r * sigma, sigma)?),
                };
                let name = names.get(i).map_or_else(|| format!("l{i}"), |s| s.to_string());
                Ok(Label { name, set })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(LinguisticVariable {
            name: name.to_string(),
            range: [lo, hi],
            labels,
        })
    }

    pub fn flavor(&self) -> Flavor {
        if self.labels.iter().all(|l| matches!(l.set, LabelSet::T1(_))) {
            Flavor::T1
        } else {
            Flavor::It2
        }
    }

    /// Smallest over the range of the best upper grade.
    pub fn coverage(&self, samples: usize) -> f64 {
        linspace(self.range[0], self.range[1], samples.max(2))
            .into_iter()
            .map(|x| self.labels.iter().map(|l| l.set.fou(x).1).fold(0.0, f64::max))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn validate(&self) -> Result<()> {
        if self.labels.is_empty() {
            return Err(FuzzyError::Config(format!("variable {} has no labels", self.name)));
        }
        for l in &self.labels {
            l.set.validate()?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rule {
    /// One label index per input variable.
    pub antecedent: Vec<usize>,
    /// Crisp consequents carry a zero spread.
    pub consequent: IntervalT1,
    /// Learning-time weight (product of the antecedent grades of the sample).
    pub weight: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum TrMethod {
    #[default]
    #[serde(rename = "cos")]
    CenterOfSets,
}

/// Rule order by consequent endpoints, cached for the exact interval reduction.
#[derive(Debug, Clone, Default)]
struct EndpointOrder(OnceLock<(Vec<usize>, Vec<usize>)>);

impl PartialEq for EndpointOrder {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleBase {
    pub variables: Vec<LinguisticVariable>,
    #[serde(default)]
    pub output: String,
    pub rules: Vec<Rule>,
    #[serde(default)]
    pub tnorm: TNorm,
    #[serde(default)]
    pub tr: TrMethod,
    #[serde(skip)]
    order: EndpointOrder,
}

impl RuleBase {
    pub fn new(variables: Vec<LinguisticVariable>, output: &str, rules: Vec<Rule>, tnorm: TNorm) -> Result<Self> {
        let rb = RuleBase {
            variables,
            output: output.to_string(),
            rules,
            tnorm,
            tr: TrMethod::CenterOfSets,
            order: EndpointOrder::default(),
        };
        rb.validate()?;
        Ok(rb)
    }

    pub fn validate(&self) -> Result<()> {
        for v in &self.variables {
            v.validate()?;
        }
        let mut seen = std::collections::BTreeSet::new();
        for r in &self.rules {
            if r.antecedent.len() != self.variables.len() {
                return Err(FuzzyError::Arity {
                    expected: self.variables.len(),
                    got: r.antecedent.len(),
                });
            }
            for (i, (&a, v)) in r.antecedent.iter().zip(&self.variables).enumerate() {
                if a >= v.labels.len() {
                    return Err(FuzzyError::Config(format!("rule label {a} out of range for input {i}")));
                }
            }
            if !(r.consequent.spread >= 0.0) {
                return Err(FuzzyError::Config("negative consequent spread".into()));
            }
            if !seen.insert(&r.antecedent) {
                return Err(FuzzyError::Config(format!("duplicate antecedent {:?}", r.antecedent)));
            }
        }
        Ok(())
    }

    pub fn flavor(&self) -> Flavor {
        if self.variables.iter().all(|v| v.flavor() == Flavor::T1) {
            Flavor::T1
        } else {
            Flavor::It2
        }
    }

    pub fn arity(&self) -> usize {
        self.variables.len()
    }

    fn check_arity(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.arity() {
            return Err(FuzzyError::Arity {
                expected: self.arity(),
                got: x.len(),
            });
        }
        Ok(())
    }

    /// Lower/upper grade of every label of every variable, flattened.
    fn label_grades(&self, x: &[f64]) -> (Vec<(f64, f64)>, Vec<usize>) {
        let mut offsets = Vec::with_capacity(self.variables.len());
        let mut grades = Vec::new();
        for (v, &xi) in self.variables.iter().zip(x) {
            offsets.push(grades.len());
            grades.extend(v.labels.iter().map(|l| l.set.fou(xi)));
        }
        (grades, offsets)
    }

    /// Firing strength of each rule: the t-norm of its antecedent grades.
    pub fn fire_t1(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_arity(x)?;
        if self.flavor() != Flavor::T1 {
            return Err(FuzzyError::Unsupported("type-I firing on an interval type-II rule base".into()));
        }
        let (g, off) = self.label_grades(x);
        Ok(self
            .rules
            .iter()
            .map(|r| self.tnorm.fold(r.antecedent.iter().enumerate().map(|(i, &a)| g[off[i] + a].0)))
            .collect())
    }

    /// Center-of-sets output: consequent centers averaged by firing strength.
    pub fn infer_t1(&self, x: &[f64]) -> Result<f64> {
        let f = self.fire_t1(x)?;
        let (mut num, mut den) = (0.0, 0.0);
        for (r, s) in self.rules.iter().zip(&f) {
            num += r.consequent.center * s;
            den += s;
        }
        if !(den > 0.0) {
            return Err(FuzzyError::NoRuleFired);
        }
        Ok(num / den)
    }

    /// Interval firing `[lower, upper]` of each rule from the lower and upper
    /// antecedent grades.
    pub fn fire_it2(&self, x: &[f64]) -> Result<Vec<[f64; 2]>> {
        self.check_arity(x)?;
        let (g, off) = self.label_grades(x);
        Ok(self
            .rules
            .iter()
            .map(|r| {
                let (mut lo, mut up) = (1.0, 1.0);
                for (i, &a) in r.antecedent.iter().enumerate() {
                    let (l, u) = g[off[i] + a];
                    lo = self.tnorm.apply(lo, l);
                    up = self.tnorm.apply(up, u);
                }
                [lo, up]
            })
            .collect())
    }

    fn endpoint_order(&self) -> &(Vec<usize>, Vec<usize>) {
        self.order.0.get_or_init(|| {
            let sorted = |sign: f64| {
                let mut o: Vec<usize> = (0..self.rules.len()).collect();
                let key = |i: usize| self.rules[i].consequent.center + sign * self.rules[i].consequent.spread;
                o.sort_by(|&a, &b| key(a).total_cmp(&key(b)));
                o
            };
            (sorted(-1.0), sorted(1.0))
        })
    }

    /// Center-of-sets type reduction with interval firing: consequent intervals
    /// are the values, firing intervals the weights, reduced exactly.
    pub fn infer_it2_cos(&self, x: &[f64]) -> Result<IntervalT1> {
        Ok(self.infer_it2_km(x)?.interval())
    }

    pub fn infer_it2_km(&self, x: &[f64]) -> Result<KmResult> {
        let fire = self.fire_it2(x)?;
        let (lo_order, up_order) = self.endpoint_order();
        let pass = |order: &[usize], sign: f64, maximize: bool| {
            let n = order.len();
            let (mut z, mut h, mut d) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
            for &i in order {
                let [l, u] = fire[i];
                if u > 0.0 {
                    let c = &self.rules[i].consequent;
                    z.push(c.center + sign * c.spread);
                    h.push(0.5 * (l + u));
                    d.push(0.5 * (u - l));
                }
            }
            if z.is_empty() {
                return None;
            }
            Some(km_pass(&z, &h, &d, maximize, None))
        };
        let (upper, iterations_upper) = pass(up_order, 1.0, true).ok_or(FuzzyError::NoRuleFired)?;
        let (lower, iterations_lower) = pass(lo_order, -1.0, false).ok_or(FuzzyError::NoRuleFired)?;
        Ok(KmResult {
            lower,
            upper,
            iterations_lower,
            iterations_upper,
        })
    }

    /// Replaces every uncertain-mean antecedent by the gaussian at its mean
    /// midpoint and collapses consequents to their centers.
    pub fn downgrade_to_t1(&self) -> Result<RuleBase> {
        let variables = self
            .variables
            .iter()
            .map(|v| {
                let labels = v
                    .labels
                    .iter()
                    .map(|l| {
                        let set = match &l.set {
                            LabelSet::It2(It2Set::GaussianUncertainMean { m1, m2, sigma }) => {
                                LabelSet::T1(MembershipFunction::gaussian(0.5 * (m1 + m2), *sigma))
                            }
                            LabelSet::T1(mf) => LabelSet::T1(mf.clone()),
                            other => return Err(FuzzyError::Unsupported(format!("cannot downgrade {other:?}"))),
                        };
                        Ok(Label { name: l.name.clone(), set })
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(LinguisticVariable {
                    name: v.name.clone(),
                    range: v.range,
                    labels,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let rules = self
            .rules
            .iter()
            .map(|r| Rule {
                antecedent: r.antecedent.clone(),
                consequent: IntervalT1::crisp(r.consequent.center),
                weight: r.weight,
            })
            .collect();
        RuleBase::new(variables, &self.output, rules, self.tnorm)
    }

    /// Same rules with every gaussian antecedent turned into an uncertain-mean
    /// set spanning `center -/+ rho sigma`.
    pub fn with_mean_uncertainty(&self, rho: f64) -> Result<RuleBase> {
        if !(rho >= 0.0) {
            return Err(FuzzyError::Config(format!("mean uncertainty must be >= 0, got {rho}")));
        }
        let mut rb = self.clone();
        rb.order = EndpointOrder::default();
        for v in &mut rb.variables {
            for l in &mut v.labels {
                let (m, sigma) = match &l.set {
                    LabelSet::It2(It2Set::GaussianUncertainMean { m1, m2, sigma }) => (0.5 * (m1 + m2), *sigma),
                    LabelSet::T1(MembershipFunction::Gaussian { mean, sigma }) => (*mean, *sigma),
                    other => return Err(FuzzyError::Unsupported(format!("cannot widen {other:?}"))),
                };
                l.set = LabelSet::It2(It2Set::uncertain_mean(m - rho * sigma, m + rho * sigma, sigma)?);
            }
        }
        Ok(rb)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearnOptions {
    pub output: String,
    pub tnorm: TNorm,
    /// Consequent spread used when a cell's outputs do not vary, as a fraction
    /// of the overall output range.
    pub fallback_spread: f64,
}

impl Default for LearnOptions {
    fn default() -> Self {
        LearnOptions {
            output: "y".into(),
            tnorm: TNorm::Product,
            fallback_spread: 0.01,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearnReport {
    pub samples: usize,
    pub skipped: usize,
    pub rules: usize,
    pub cells: usize,
}

impl LearnReport {
    pub fn coverage(&self) -> f64 {
        self.rules as f64 / self.cells as f64
    }
}

struct Cell {
    weight: f64,
    y: f64,
    sum: f64,
    sum_sq: f64,
    count: usize,
}

/// Table-lookup rule learning.
///
/// Each sample is assigned, per input, the label with the highest (upper)
/// grade; the rule weight is the product of those grades and each antecedent
/// cell keeps the rule of its heaviest sample. Type-II variables produce interval
/// consequents whose spread is the standard deviation of the cell's outputs.
pub fn wang_mendel_learn(samples: &[(Vec<f64>, f64)], variables: Vec<LinguisticVariable>, options: &LearnOptions) -> Result<(RuleBase, LearnReport)> {
    if samples.is_empty() {
        return Err(FuzzyError::Config("no training samples".into()));
    }
    let flavor = if variables.iter().all(|v| v.flavor() == Flavor::T1) { Flavor::T1 } else { Flavor::It2 };
    let mut cells: BTreeMap<Vec<usize>, Cell> = BTreeMap::new();
    let mut skipped = 0;
    let (mut ymin, mut ymax) = (f64::INFINITY, f64::NEG_INFINITY);
    for (x, y) in samples {
        if x.len() != variables.len() {
            return Err(FuzzyError::Arity {
                expected: variables.len(),
                got: x.len(),
            });
        }
        let mut antecedent = Vec::with_capacity(x.len());
        let mut weight = 1.0;
        for (v, &xi) in variables.iter().zip(x) {
            let (best, g) = v
                .labels
                .iter()
                .map(|l| l.set.fou(xi).1)
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |acc, (i, g)| if g > acc.1 { (i, g) } else { acc });
            antecedent.push(best);
            weight *= g;
        }
        if !(weight >= UNCOVERED) {
            skipped += 1;
            continue;
        }
        ymin = ymin.min(*y);
        ymax = ymax.max(*y);
        let cell = cells.entry(antecedent).or_insert(Cell {
            weight: f64::NEG_INFINITY,
            y: 0.0,
            sum: 0.0,
            sum_sq: 0.0,
            count: 0,
        });
        if weight > cell.weight {
            cell.weight = weight;
            cell.y = *y;
        }
        cell.sum += y;
        cell.sum_sq += y * y;
        cell.count += 1;
    }
    if cells.is_empty() {
        return Err(FuzzyError::Config(format!("all {skipped} samples fall outside the label supports")));
    }
    let fallback = options.fallback_spread * (ymax - ymin);
    let rules: Vec<Rule> = cells
        .into_iter()
        .map(|(antecedent, c)| {
            let spread = match flavor {
                Flavor::T1 => 0.0,
                Flavor::It2 => {
                    let n = c.count as f64;
                    let var = (c.sum_sq / n - (c.sum / n).powi(2)).max(0.0);
                    let sd = var.sqrt();
                    if c.count > 1 && sd > 0.0 {
                        sd
                    } else {
                        fallback
                    }
                }
            };
            Rule {
                antecedent,
                consequent: IntervalT1::new(c.y, spread),
                weight: c.weight,
            }
        })
        .collect();
    let report = LearnReport {
        samples: samples.len(),
        skipped,
        rules: rules.len(),
        cells: variables.iter().map(|v| v.labels.len()).product(),
    };
    Ok((RuleBase::new(variables, &options.output, rules, options.tnorm)?, report))
}

/// Several rule bases over one set of input variables, evaluated together.
///
/// Label grades are computed once per input and shared by every base; rule
/// orders for the interval reduction are fixed at construction and scratch
/// buffers are reused, so evaluation does not allocate.
#[derive(Debug, Clone)]
pub struct RuleBank {
    variables: Vec<LinguisticVariable>,
    tnorm: TNorm,
    flavor: Flavor,
    offsets: Vec<usize>,
    bases: Vec<CompiledBase>,
    grades: Vec<(f64, f64)>,
    fire: Vec<[f64; 2]>,
    z: Vec<f64>,
    h: Vec<f64>,
    d: Vec<f64>,
}

#[derive(Debug, Clone)]
struct CompiledBase {
    /// Flattened label-grade indices, `arity` per rule.
    labels: Vec<usize>,
    center: Vec<f64>,
    spread: Vec<f64>,
    lo_order: Vec<usize>,
    up_order: Vec<usize>,
}

impl RuleBank {
    pub fn new(bases: &[RuleBase]) -> Result<Self> {
        let first = bases.first().ok_or_else(|| FuzzyError::Config("empty rule bank".into()))?;
        for b in bases {
            b.validate()?;
            if b.variables != first.variables || b.tnorm != first.tnorm {
                return Err(FuzzyError::Config(format!("rule base {} does not share the bank's inputs", b.output)));
            }
        }
        let mut offsets = Vec::new();
        let mut n_labels = 0;
        for v in &first.variables {
            offsets.push(n_labels);
            n_labels += v.labels.len();
        }
        let max_rules = bases.iter().map(|b| b.rules.len()).max().unwrap_or(0);
        let compiled = bases
            .iter()
            .map(|b| {
                let (lo_order, up_order) = b.endpoint_order().clone();
                CompiledBase {
                    labels: b.rules.iter().flat_map(|r| r.antecedent.iter().enumerate().map(|(i, &a)| offsets[i] + a)).collect(),
                    center: b.rules.iter().map(|r| r.consequent.center).collect(),
                    spread: b.rules.iter().map(|r| r.consequent.spread).collect(),
                    lo_order,
                    up_order,
                }
            })
            .collect();
        Ok(RuleBank {
            variables: first.variables.clone(),
            tnorm: first.tnorm,
            flavor: first.flavor(),
            offsets,
            bases: compiled,
            grades: vec![(0.0, 0.0); n_labels],
            fire: vec![[0.0; 2]; max_rules],
            z: Vec::with_capacity(max_rules),
            h: Vec::with_capacity(max_rules),
            d: Vec::with_capacity(max_rules),
        })
    }

    pub fn len(&self) -> usize {
        self.bases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bases.is_empty()
    }

    pub fn flavor(&self) -> Flavor {
        self.flavor
    }

    fn load(&mut self, x: &[f64]) -> Result<()> {
        if x.len() != self.variables.len() {
            return Err(FuzzyError::Arity {
                expected: self.variables.len(),
                got: x.len(),
            });
        }
        for ((v, &xi), &off) in self.variables.iter().zip(x).zip(&self.offsets) {
            for (k, l) in v.labels.iter().enumerate() {
                self.grades[off + k] = l.set.fou(xi);
            }
        }
        Ok(())
    }

    /// Type-I center-of-sets output of every base; `None` where no rule fired.
    pub fn eval_t1(&mut self, x: &[f64], out: &mut [Option<f64>]) -> Result<()> {
        if self.flavor != Flavor::T1 {
            return Err(FuzzyError::Unsupported("type-I evaluation of an interval type-II bank".into()));
        }
        self.load(x)?;
        let arity = self.variables.len();
        for (b, slot) in self.bases.iter().zip(out.iter_mut()) {
            let (mut num, mut den) = (0.0, 0.0);
            for (r, labels) in b.labels.chunks_exact(arity).enumerate() {
                let f = self.tnorm.fold(labels.iter().map(|&g| self.grades[g].0));
                num += b.center[r] * f;
                den += f;
            }
            *slot = (den > 0.0).then(|| num / den);
        }
        Ok(())
    }

    /// Interval center-of-sets output of every base; `None` where no rule fired.
    pub fn eval_it2(&mut self, x: &[f64], out: &mut [Option<IntervalT1>]) -> Result<()> {
        self.load(x)?;
        let arity = self.variables.len();
        let tnorm = self.tnorm;
        for (b, slot) in self.bases.iter().zip(out.iter_mut()) {
            for (r, labels) in b.labels.chunks_exact(arity).enumerate() {
                let (mut lo, mut up) = (1.0, 1.0);
                for &g in labels {
                    let (l, u) = self.grades[g];
                    lo = tnorm.apply(lo, l);
                    up = tnorm.apply(up, u);
                }
                self.fire[r] = [lo, up];
            }
            let mut pass = |order: &[usize], sign: f64, maximize: bool| {
                self.z.clear();
                self.h.clear();
                self.d.clear();
                for &i in order {
                    let [l, u] = self.fire[i];
                    if u > 0.0 {
                        self.z.push(b.center[i] + sign * b.spread[i]);
                        self.h.push(0.5 * (l + u));
                        self.d.push(0.5 * (u - l));
                    }
                }
                (!self.z.is_empty()).then(|| km_pass(&self.z, &self.h, &self.d, maximize, None).0)
            };
            *slot = match (pass(&b.lo_order, -1.0, false), pass(&b.up_order, 1.0, true)) {
                (Some(lo), Some(up)) => Some(IntervalT1::from_bounds(lo, up.max(lo))),
                _ => None,
            };
        }
        Ok(())
    }
}
