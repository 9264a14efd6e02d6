//! Fuzzy estimators of the actuator-space model: one rule base per element of
//! `M` (upper triangle), `C` and `G`, all driven by the four actuator
//! difference features.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};
use t2fuzzy::fls::{wang_mendel_learn, LearnOptions, LinguisticVariable, RuleBank, RuleBase};
use t2fuzzy::{IntervalT1, TNorm};

use crate::error::{Result, SimError};
use crate::robot::DynamicTerms;

pub const N_ELEMENTS: usize = 18;

pub const ELEMENTS: [&str; N_ELEMENTS] = [
    "m11", "m12", "m13", "m22", "m23", "m33", "c11", "c12", "c13", "c21", "c22", "c23", "c31", "c32", "c33", "g1", "g2", "g3",
];

pub const FEATURES: [&str; 4] = ["dq12", "dq13", "dqdot12", "dqdot13"];

const M_INDEX: [(usize, usize); 6] = [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)];

/// Pairwise actuator differences `(q1 - q2, q1 - q3, qd1 - qd2, qd1 - qd3)`.
pub fn features(qa: &Vector3<f64>, qad: &Vector3<f64>) -> [f64; 4] {
    [qa[0] - qa[1], qa[0] - qa[2], qad[0] - qad[1], qad[0] - qad[2]]
}

/// Model terms flattened in [`ELEMENTS`] order.
pub fn element_values(t: &DynamicTerms) -> [f64; N_ELEMENTS] {
    let mut v = [0.0; N_ELEMENTS];
    for (k, &(i, j)) in M_INDEX.iter().enumerate() {
        v[k] = 0.5 * (t.m[(i, j)] + t.m[(j, i)]);
    }
    for i in 0..3 {
        for j in 0..3 {
            v[6 + 3 * i + j] = t.c[(i, j)];
        }
        v[15 + i] = t.g[i];
    }
    v
}

/// Interval estimates of every model element.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FuzzyDynamicTerms {
    pub m: [[IntervalT1; 3]; 3],
    pub c: [[IntervalT1; 3]; 3],
    pub g: [IntervalT1; 3],
}

impl FuzzyDynamicTerms {
    pub fn from_elements(v: &[IntervalT1; N_ELEMENTS]) -> Self {
        let mut m = [[IntervalT1::crisp(0.0); 3]; 3];
        for (k, &(i, j)) in M_INDEX.iter().enumerate() {
            m[i][j] = v[k];
            m[j][i] = v[k];
        }
        let c = std::array::from_fn(|i| std::array::from_fn(|j| v[6 + 3 * i + j]));
        FuzzyDynamicTerms {
            m,
            c,
            g: [v[15], v[16], v[17]],
        }
    }

    /// Crisp model from the interval centers.
    pub fn centers(&self) -> DynamicTerms {
        DynamicTerms {
            m: Matrix3::from_fn(|i, j| self.m[i][j].center),
            c: Matrix3::from_fn(|i, j| self.c[i][j].center),
            g: Vector3::from_fn(|i, _| self.g[i].center),
        }
    }

    /// Whether every true element lies inside its estimated interval.
    pub fn contains(&self, t: &DynamicTerms) -> [bool; N_ELEMENTS] {
        let v = element_values(t);
        let mut flat = [IntervalT1::crisp(0.0); N_ELEMENTS];
        for (k, &(i, j)) in M_INDEX.iter().enumerate() {
            flat[k] = self.m[i][j];
        }
        for i in 0..3 {
            for j in 0..3 {
                flat[6 + 3 * i + j] = self.c[i][j];
            }
            flat[15 + i] = self.g[i];
        }
        std::array::from_fn(|k| flat[k].contains(v[k]))
    }
}

/// One recorded state: features and the true model elements there.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainingSample {
    pub features: [f64; 4],
    pub targets: [f64; N_ELEMENTS],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainOptions {
    pub labels: usize,
    /// Widening of each feature range on both sides, as a fraction of its span.
    pub margin: f64,
    pub tnorm: TNorm,
    pub fallback_spread: f64,
}

impl Default for TrainOptions {
    fn default() -> Self {
        TrainOptions {
            labels: 2,
            margin: 0.05,
            tnorm: TNorm::Product,
            fallback_spread: 0.01,
        }
    }
}

/// Half-width used for a feature that never varies in the data.
const DEGENERATE_HALF_WIDTH: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaseReport {
    pub element: String,
    pub rules: usize,
    pub cells: usize,
    pub skipped: usize,
    /// Median of `|estimate - target| / max(|target|, floor)` over the
    /// training samples, type-I estimates.
    pub median_rel_error: f64,
    pub max_abs_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub samples: usize,
    pub feature_ranges: [[f64; 2]; 4],
    pub degenerate_features: Vec<String>,
    pub bases: Vec<BaseReport>,
    pub warnings: Vec<String>,
}

/// The eighteen rule bases, in [`ELEMENTS`] order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorSet {
    pub bases: Vec<RuleBase>,
}

impl EstimatorSet {
    pub fn new(bases: Vec<RuleBase>) -> Result<Self> {
        if bases.len() != N_ELEMENTS {
            return Err(SimError::Config(format!("expected {N_ELEMENTS} estimators, got {}", bases.len())));
        }
        RuleBank::new(&bases)?;
        Ok(EstimatorSet { bases })
    }

    /// Antecedent labels widened to uncertain means `m -/+ rho sigma`.
    pub fn with_mean_uncertainty(&self, rho: f64) -> Result<Self> {
        let bases = self.bases.iter().map(|b| b.with_mean_uncertainty(rho)).collect::<t2fuzzy::Result<_>>()?;
        Ok(EstimatorSet { bases })
    }

    pub fn downgrade(&self) -> Result<Self> {
        let bases = self.bases.iter().map(|b| b.downgrade_to_t1()).collect::<t2fuzzy::Result<_>>()?;
        Ok(EstimatorSet { bases })
    }

    /// Mean consequent center of each base.
    fn consequent_means(&self) -> [f64; N_ELEMENTS] {
        std::array::from_fn(|k| {
            let r = &self.bases[k].rules;
            r.iter().map(|r| r.consequent.center).sum::<f64>() / r.len().max(1) as f64
        })
    }
}

/// Learns one table-lookup base per model element.
pub fn train_estimators(samples: &[TrainingSample], opts: &TrainOptions) -> Result<(EstimatorSet, TrainReport)> {
    if samples.is_empty() {
        return Err(SimError::Training("no samples recorded".into()));
    }
    if opts.labels == 0 {
        return Err(SimError::Config("labels per feature must be positive".into()));
    }
    let mut ranges = [[0.0; 2]; 4];
    let mut degenerate = Vec::new();
    for (f, range) in ranges.iter_mut().enumerate() {
        let (lo, hi) = samples.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| (lo.min(s.features[f]), hi.max(s.features[f])));
        let span = hi - lo;
        *range = if span > 1e-12 {
            [lo - opts.margin * span, hi + opts.margin * span]
        } else {
            degenerate.push(FEATURES[f].to_string());
            [lo - DEGENERATE_HALF_WIDTH, hi + DEGENERATE_HALF_WIDTH]
        };
    }
    let variables: Vec<LinguisticVariable> = FEATURES
        .iter()
        .zip(&ranges)
        .map(|(name, r)| LinguisticVariable::uniform(name, r[0], r[1], opts.labels, Some(0.0)))
        .collect::<t2fuzzy::Result<_>>()?;

    let mut bases = Vec::with_capacity(N_ELEMENTS);
    let mut reports = Vec::with_capacity(N_ELEMENTS);
    let mut warnings = Vec::new();
    if !degenerate.is_empty() {
        warnings.push(format!("features without variation: {}", degenerate.join(", ")));
    }
    for (k, name) in ELEMENTS.iter().enumerate() {
        let data: Vec<(Vec<f64>, f64)> = samples.iter().map(|s| (s.features.to_vec(), s.targets[k])).collect();
        let learn = LearnOptions {
            output: name.to_string(),
            tnorm: opts.tnorm,
            fallback_spread: opts.fallback_spread,
        };
        let (rb, rep) = wang_mendel_learn(&data, variables.clone(), &learn)?;
        if rep.coverage() < 0.5 {
            warnings.push(format!("{name}: only {} of {} antecedent cells populated", rep.rules, rep.cells));
        }
        reports.push(BaseReport {
            element: name.to_string(),
            rules: rep.rules,
            cells: rep.cells,
            skipped: rep.skipped,
            median_rel_error: 0.0,
            max_abs_error: 0.0,
        });
        bases.push(rb);
    }
    let set = EstimatorSet::new(bases)?;

    // resubstitution error of the type-I estimates
    let mut bank = RuleBank::new(&set.downgrade()?.bases)?;
    let mut out = [None; N_ELEMENTS];
    let mut rel: Vec<Vec<f64>> = vec![Vec::with_capacity(samples.len()); N_ELEMENTS];
    let scale: [f64; N_ELEMENTS] = std::array::from_fn(|k| samples.iter().map(|s| s.targets[k].abs()).fold(0.0, f64::max));
    for s in samples {
        bank.eval_t1(&s.features, &mut out)?;
        for k in 0..N_ELEMENTS {
            if let Some(y) = out[k] {
                let err = (y - s.targets[k]).abs();
                let r = &mut reports[k];
                r.max_abs_error = r.max_abs_error.max(err);
                rel[k].push(err / s.targets[k].abs().max(1e-3 * scale[k]).max(1e-12));
            }
        }
    }
    for (r, mut v) in reports.iter_mut().zip(rel) {
        v.sort_by(f64::total_cmp);
        r.median_rel_error = if v.is_empty() { f64::NAN } else { v[v.len() / 2] };
    }
    Ok((
        set,
        TrainReport {
            samples: samples.len(),
            feature_ranges: ranges,
            degenerate_features: degenerate,
            bases: reports,
            warnings,
        },
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FuzzyMode {
    T1,
    It2,
}

/// Evaluates all eighteen estimators; an element whose rules do not fire
/// keeps its previous value and is flagged.
#[derive(Debug, Clone)]
pub struct FuzzyEstimator {
    mode: FuzzyMode,
    bank: RuleBank,
    last: [IntervalT1; N_ELEMENTS],
    t1_out: [Option<f64>; N_ELEMENTS],
    it2_out: [Option<IntervalT1>; N_ELEMENTS],
    held: u64,
}

impl FuzzyEstimator {
    /// Type-I mode expects the downgraded set; interval mode the widened one.
    pub fn new(set: &EstimatorSet, mode: FuzzyMode) -> Result<Self> {
        let bank = RuleBank::new(&set.bases)?;
        if mode == FuzzyMode::T1 && bank.flavor() != t2fuzzy::fls::Flavor::T1 {
            return Err(SimError::Config("type-I estimator needs a downgraded estimator set".into()));
        }
        let means = set.consequent_means();
        Ok(FuzzyEstimator {
            mode,
            bank,
            last: std::array::from_fn(|k| IntervalT1::crisp(means[k])),
            t1_out: [None; N_ELEMENTS],
            it2_out: [None; N_ELEMENTS],
            held: 0,
        })
    }

    pub fn mode(&self) -> FuzzyMode {
        self.mode
    }

    /// Number of element evaluations that fell back to the held value.
    pub fn held_count(&self) -> u64 {
        self.held
    }

    pub fn estimate(&mut self, x: &[f64; 4]) -> Result<FuzzyDynamicTerms> {
        match self.mode {
            FuzzyMode::T1 => {
                self.bank.eval_t1(x, &mut self.t1_out)?;
                for (last, out) in self.last.iter_mut().zip(&self.t1_out) {
                    match out {
                        Some(y) => *last = IntervalT1::crisp(*y),
                        None => self.held += 1,
                    }
                }
            }
            FuzzyMode::It2 => {
                self.bank.eval_it2(x, &mut self.it2_out)?;
                for (last, out) in self.last.iter_mut().zip(&self.it2_out) {
                    match out {
                        Some(y) => *last = *y,
                        None => self.held += 1,
                    }
                }
            }
        }
        Ok(FuzzyDynamicTerms::from_elements(&self.last))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn feature_examples() {
        let f = features(&Vector3::new(0.1, 0.2, 0.05), &Vector3::new(0.15, 0.12, 0.1));
        let want = [-0.1, 0.05, 0.03, 0.05];
        for (a, b) in f.iter().zip(want) {
            assert!((a - b).abs() < 1e-15);
        }
        assert_eq!(features(&Vector3::repeat(0.3), &Vector3::repeat(-1.0)), [0.0; 4]);
        // the dropped pair difference is implied by the other two
        let q = Vector3::new(0.3, -0.7, 0.11);
        let f = features(&q, &q);
        assert!((f[1] - f[0] - (q[1] - q[2])).abs() < 1e-15);
    }

    #[test]
    fn element_round_trip() {
        let t = DynamicTerms {
            m: Matrix3::new(3.0, 1.0, 0.5, 1.0, 4.0, 0.2, 0.5, 0.2, 5.0),
            c: Matrix3::from_fn(|i, j| (3 * i + j) as f64),
            g: Vector3::new(1.0, 2.0, 3.0),
        };
        let v = element_values(&t);
        let f = FuzzyDynamicTerms::from_elements(&v.map(IntervalT1::crisp));
        assert_eq!(f.centers(), t);
        assert!(f.contains(&t).iter().all(|&b| b));
    }

    #[test]
    fn constant_data_gives_degenerate_single_cell_bases() {
        let s = TrainingSample {
            features: [0.01, -0.02, 0.0, 0.0],
            targets: [1.0; N_ELEMENTS],
        };
        let (set, rep) = train_estimators(&[s; 20], &TrainOptions::default()).unwrap();
        assert!(set.bases.iter().all(|b| b.rules.len() == 1));
        assert_eq!(rep.degenerate_features.len(), 4);
        assert!(!rep.warnings.is_empty());
    }
}
