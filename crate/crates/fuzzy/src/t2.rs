//! Type-II fuzzy sets: interval sets given by lower/upper membership functions,
//! general sets stored as a grid of secondary slices, and the join/meet algebra.

use serde::{Deserialize, Serialize};

use crate::error::{FuzzyError, Result};
use crate::t1::{linspace, GaussianT1, MembershipFunction, TNorm};

/// Default cap on the number of embedded sets a brute-force routine may visit.
pub const DEFAULT_EMBEDDED_CAP: u128 = 1_000_000;

/// Primary grades are snapped to this lattice before duplicate points merge, so
/// that products computed in different orders land on the same point.
const CANONICAL_SCALE: f64 = 1e12;

fn canonical(u: f64) -> f64 {
    (u * CANONICAL_SCALE).round() / CANONICAL_SCALE
}

fn check_grade(g: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&g) {
        return Err(FuzzyError::GradeOutOfRange(g));
    }
    Ok(())
}

/// Secondary membership function at one domain point: primary grades `u` with
/// secondary grades `f(u)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SecondarySlice {
    points: Vec<f64>,
    grades: Vec<f64>,
}

impl SecondarySlice {
    pub fn new(points: Vec<f64>, grades: Vec<f64>) -> Result<Self> {
        if points.len() != grades.len() {
            return Err(FuzzyError::LengthMismatch {
                what: "secondary slice",
                left: points.len(),
                right: grades.len(),
            });
        }
        Self::from_pairs(points.into_iter().zip(grades))
    }

    /// Builds a slice from unordered `(u, f(u))` pairs; duplicate points keep the
    /// larger grade.
    pub fn from_pairs<I: IntoIterator<Item = (f64, f64)>>(pairs: I) -> Result<Self> {
        let mut v: Vec<(f64, f64)> = Vec::new();
        for (u, g) in pairs {
            check_grade(u)?;
            check_grade(g)?;
            v.push((canonical(u), g));
        }
        if v.is_empty() {
            return Err(FuzzyError::EmptySet);
        }
        v.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut points: Vec<f64> = Vec::with_capacity(v.len());
        let mut grades: Vec<f64> = Vec::with_capacity(v.len());
        for (u, g) in v {
            match points.last() {
                Some(&last) if last == u => {
                    let k = grades.len() - 1;
                    grades[k] = grades[k].max(g);
                }
                _ => {
                    points.push(u);
                    grades.push(g);
                }
            }
        }
        Ok(SecondarySlice { points, grades })
    }

    pub fn singleton(u: f64) -> Result<Self> {
        Self::from_pairs([(u, 1.0)])
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn grades(&self) -> &[f64] {
        &self.grades
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.points.iter().copied().zip(self.grades.iter().copied())
    }

    pub fn grade_at(&self, u: f64) -> f64 {
        let u = canonical(u);
        self.points.iter().position(|&p| p == u).map_or(0.0, |i| self.grades[i])
    }

    fn combine(&self, other: &Self, point: impl Fn(f64, f64) -> f64, tnorm: TNorm) -> Self {
        let pairs = self
            .iter()
            .flat_map(|(u, f)| other.iter().map(move |(w, g)| (u, f, w, g)))
            .map(|(u, f, w, g)| (point(u, w), tnorm.apply(f, g)));
        SecondarySlice::from_pairs(pairs).expect("combination of valid slices is valid")
    }
}

/// Join of two secondary slices: each pair contributes at `max(u, w)`.
pub fn join_discrete(a: &SecondarySlice, b: &SecondarySlice, tnorm: TNorm) -> SecondarySlice {
    a.combine(b, f64::max, tnorm)
}

/// Meet of two secondary slices: each pair contributes at `tnorm(u, w)`.
pub fn meet_discrete(a: &SecondarySlice, b: &SecondarySlice, tnorm: TNorm) -> SecondarySlice {
    a.combine(b, |u, w| tnorm.apply(u, w), tnorm)
}

fn sorted_peaks(mfs: &[MembershipFunction]) -> Result<Vec<(f64, &MembershipFunction)>> {
    if mfs.is_empty() {
        return Err(FuzzyError::Config("join/meet of an empty list".into()));
    }
    let mut v = Vec::with_capacity(mfs.len());
    for mf in mfs {
        mf.validate()?;
        let peak = mf.peak();
        let h = mf.eval(peak);
        if (h - 1.0).abs() > 1e-9 {
            return Err(FuzzyError::NotNormal(h));
        }
        v.push((peak, mf));
    }
    v.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(v)
}

/// Closed-form join of convex normal type-I sets sampled on `grid`.
///
/// With peaks sorted `v_1 <= ... <= v_n`: below `v_1` all grades are combined by
/// the t-norm, between `v_k` and `v_(k+1)` only the sets peaking to the right,
/// and at or past `v_n` the maximum is taken.
pub fn join_closed_convex(mfs: &[MembershipFunction], tnorm: TNorm, grid: &[f64]) -> Result<MembershipFunction> {
    let sets = sorted_peaks(mfs)?;
    let n = sets.len();
    let grades = grid
        .iter()
        .map(|&t| {
            let k = sets.partition_point(|(v, _)| *v <= t);
            if k == n {
                sets.iter().map(|(_, f)| f.eval(t)).fold(0.0, f64::max)
            } else {
                tnorm.fold(sets[k..].iter().map(|(_, f)| f.eval(t)))
            }
        })
        .collect();
    MembershipFunction::sampled(grid.to_vec(), grades)
}

/// Closed-form meet of convex normal type-I sets under the minimum t-norm.
///
/// Below `v_1` the maximum of all grades; between `v_k` and `v_(k+1)` the minimum
/// over the sets peaking at or left of `v_k`; past `v_n` the minimum of all.
pub fn meet_closed_convex(mfs: &[MembershipFunction], tnorm: TNorm, grid: &[f64]) -> Result<MembershipFunction> {
    if tnorm == TNorm::Product {
        return Err(FuzzyError::NoClosedForm("meet under the product t-norm"));
    }
    let sets = sorted_peaks(mfs)?;
    let grades = grid
        .iter()
        .map(|&t| {
            let k = sets.partition_point(|(v, _)| *v <= t);
            if k == 0 {
                sets.iter().map(|(_, f)| f.eval(t)).fold(0.0, f64::max)
            } else {
                sets[..k].iter().map(|(_, f)| f.eval(t)).fold(1.0, f64::min)
            }
        })
        .collect();
    MembershipFunction::sampled(grid.to_vec(), grades)
}

fn check_bounds(sets: &[[f64; 2]]) -> Result<()> {
    if sets.is_empty() {
        return Err(FuzzyError::Config("interval join/meet of an empty list".into()));
    }
    for &[l, r] in sets {
        check_grade(l)?;
        check_grade(r)?;
        if l > r {
            return Err(FuzzyError::InvalidMf(format!("grade interval [{l}, {r}] is reversed")));
        }
    }
    Ok(())
}

/// Meet of interval grade sets `[l_i, r_i]`: endpoint-wise t-norm.
pub fn meet_interval(sets: &[[f64; 2]], tnorm: TNorm) -> Result<[f64; 2]> {
    check_bounds(sets)?;
    Ok([tnorm.fold(sets.iter().map(|s| s[0])), tnorm.fold(sets.iter().map(|s| s[1]))])
}

/// Join of interval grade sets: endpoint-wise maximum.
pub fn join_interval(sets: &[[f64; 2]]) -> Result<[f64; 2]> {
    check_bounds(sets)?;
    let max = |i: usize| sets.iter().map(|s| s[i]).fold(0.0, f64::max);
    Ok([max(0), max(1)])
}

/// Result of the gaussian meet approximation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianMeet {
    pub set: GaussianT1,
    /// Set when some mean is below 0.1, where the approximation degrades.
    pub low_mean_warning: bool,
}

/// Approximate product meet of gaussian grade sets: mean is the product of the
/// means, variance is `sum_j sigma_j^2 prod_(i != j) m_i^2`.
pub fn meet_gaussian_approx(sets: &[GaussianT1]) -> Result<GaussianMeet> {
    if sets.is_empty() {
        return Err(FuzzyError::Config("gaussian meet of an empty list".into()));
    }
    let mean = sets.iter().map(|s| s.mean).product();
    let var: f64 = (0..sets.len())
        .map(|j| {
            let others: f64 = sets.iter().enumerate().filter(|(i, _)| *i != j).map(|(_, s)| s.mean * s.mean).product();
            sets[j].sigma * sets[j].sigma * others
        })
        .sum();
    Ok(GaussianMeet {
        set: GaussianT1::new(mean, var.sqrt()),
        low_mean_warning: sets.iter().any(|s| s.mean < 0.1),
    })
}

/// Interval type-II set described by its lower and upper membership functions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum It2Set {
    /// Gaussian with fixed sigma and mean anywhere in `[m1, m2]`.
    #[serde(rename = "it2-gaussian-umean")]
    GaussianUncertainMean { m1: f64, m2: f64, sigma: f64 },
    /// Gaussian with fixed mean and sigma anywhere in `[sigma1, sigma2]`.
    #[serde(rename = "it2-gaussian-usigma")]
    GaussianUncertainSigma { mean: f64, sigma1: f64, sigma2: f64 },
    #[serde(rename = "it2-general")]
    General {
        lower: MembershipFunction,
        upper: MembershipFunction,
    },
}

#[inline]
fn gauss(x: f64, m: f64, s: f64) -> f64 {
    let u = (x - m) / s;
    (-0.5 * u * u).exp()
}

impl It2Set {
    pub fn uncertain_mean(m1: f64, m2: f64, sigma: f64) -> Result<Self> {
        let s = It2Set::GaussianUncertainMean { m1, m2, sigma };
        s.validate()?;
        Ok(s)
    }

    pub fn uncertain_sigma(mean: f64, sigma1: f64, sigma2: f64) -> Result<Self> {
        let s = It2Set::GaussianUncertainSigma { mean, sigma1, sigma2 };
        s.validate()?;
        Ok(s)
    }

    pub fn general(lower: MembershipFunction, upper: MembershipFunction) -> Result<Self> {
        let s = It2Set::General { lower, upper };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            It2Set::GaussianUncertainMean { m1, m2, sigma } => {
                if !(m1 <= m2) || !(*sigma > 0.0) || !m1.is_finite() || !m2.is_finite() || !sigma.is_finite() {
                    return Err(FuzzyError::InvalidMf(format!("uncertain-mean gaussian needs m1 <= m2, sigma > 0; got ({m1}, {m2}, {sigma})")));
                }
            }
            It2Set::GaussianUncertainSigma { mean, sigma1, sigma2 } => {
                if !(*sigma1 > 0.0 && sigma1 <= sigma2) || !mean.is_finite() || !sigma2.is_finite() {
                    return Err(FuzzyError::InvalidMf(format!(
                        "uncertain-sigma gaussian needs 0 < sigma1 <= sigma2; got ({mean}, {sigma1}, {sigma2})"
                    )));
                }
            }
            It2Set::General { lower, upper } => {
                lower.validate()?;
                upper.validate()?;
                let (a, b) = upper.support();
                let (c, d) = lower.support();
                let (lo, hi) = (a.min(c), b.max(d));
                for x in linspace(lo, hi, 1000) {
                    if lower.eval(x) > upper.eval(x) + 1e-12 {
                        return Err(FuzzyError::InvalidMf(format!("lower membership exceeds upper at x = {x}")));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn lower(&self, x: f64) -> f64 {
        self.fou(x).0
    }

    pub fn upper(&self, x: f64) -> f64 {
        self.fou(x).1
    }

    /// Lower and upper grade at `x`.
    #[inline]
    pub fn fou(&self, x: f64) -> (f64, f64) {
        match *self {
            It2Set::GaussianUncertainMean { m1, m2, sigma } => {
                let upper = if x < m1 {
                    gauss(x, m1, sigma)
                } else if x > m2 {
                    gauss(x, m2, sigma)
                } else {
                    1.0
                };
                let far = if x <= 0.5 * (m1 + m2) { m2 } else { m1 };
                (gauss(x, far, sigma), upper)
            }
            It2Set::GaussianUncertainSigma { mean, sigma1, sigma2 } => (gauss(x, mean, sigma1), gauss(x, mean, sigma2)),
            It2Set::General { ref lower, ref upper } => (lower.eval(x), upper.eval(x)),
        }
    }

    /// Support of the upper membership function.
    pub fn support(&self) -> (f64, f64) {
        use crate::t1::GAUSS_TRUNCATION as K;
        match *self {
            It2Set::GaussianUncertainMean { m1, m2, sigma } => (m1 - K * sigma, m2 + K * sigma),
            It2Set::GaussianUncertainSigma { mean, sigma2, .. } => (mean - K * sigma2, mean + K * sigma2),
            It2Set::General { ref upper, .. } => upper.support(),
        }
    }
}

/// General type-II set on a discrete domain: one secondary slice per point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneralT2Discrete {
    domain: Vec<f64>,
    slices: Vec<SecondarySlice>,
}

impl GeneralT2Discrete {
    pub fn new(domain: Vec<f64>, slices: Vec<SecondarySlice>) -> Result<Self> {
        if domain.is_empty() {
            return Err(FuzzyError::EmptySet);
        }
        if domain.len() != slices.len() {
            return Err(FuzzyError::LengthMismatch {
                what: "domain/slices",
                left: domain.len(),
                right: slices.len(),
            });
        }
        if domain.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(FuzzyError::InvalidMf("domain must be strictly ascending".into()));
        }
        Ok(GeneralT2Discrete { domain, slices })
    }

    /// A type-I set viewed as type-II: singleton slices at the given grades.
    pub fn from_type1(domain: Vec<f64>, grades: &[f64]) -> Result<Self> {
        let slices = grades.iter().map(|&g| SecondarySlice::singleton(g)).collect::<Result<Vec<_>>>()?;
        Self::new(domain, slices)
    }

    /// Samples an interval set: `levels` evenly spaced primary grades between the
    /// lower and upper grade at each domain point, all with secondary grade 1.
    pub fn from_it2(set: &It2Set, domain: &[f64], levels: usize) -> Result<Self> {
        let slices = domain
            .iter()
            .map(|&x| {
                let (lo, hi) = set.fou(x);
                if hi - lo <= 0.0 || levels < 2 {
                    SecondarySlice::singleton(hi)
                } else {
                    SecondarySlice::from_pairs(linspace(lo, hi, levels).into_iter().map(|u| (u, 1.0)))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(domain.to_vec(), slices)
    }

    pub fn domain(&self) -> &[f64] {
        &self.domain
    }

    pub fn slices(&self) -> &[SecondarySlice] {
        &self.slices
    }

    /// Number of embedded type-I sets, the product of the slice sizes.
    pub fn embedded_count(&self) -> u128 {
        self.slices.iter().map(|s| s.len() as u128).product()
    }

    /// Smallest and largest primary grade at each domain point.
    pub fn fou(&self) -> Vec<(f64, f64)> {
        self.slices.iter().map(|s| (s.points[0], *s.points.last().unwrap())).collect()
    }
}

/// Complement: every primary grade `u` moves to `1 - u`.
pub fn complement_discrete(set: &GeneralT2Discrete) -> GeneralT2Discrete {
    let slices = set
        .slices
        .iter()
        .map(|s| SecondarySlice::from_pairs(s.iter().map(|(u, g)| (1.0 - u, g))).expect("complement of a valid slice"))
        .collect();
    GeneralT2Discrete {
        domain: set.domain.clone(),
        slices,
    }
}

/// One embedded type-I set: a primary grade chosen at every domain point.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddedSelection {
    pub indices: Vec<usize>,
    pub primary: Vec<f64>,
    pub secondary: Vec<f64>,
}

/// Iterates all embedded sets in mixed-radix order, last domain point fastest.
pub struct EmbeddedIter<'a> {
    set: &'a GeneralT2Discrete,
    tnorm: TNorm,
    next: u128,
    total: u128,
}

impl<'a> EmbeddedIter<'a> {
    pub fn total(&self) -> u128 {
        self.total
    }

    /// The selection at position `index` of the enumeration order, for sharding.
    pub fn selection_at(&self, mut index: u128) -> Option<(EmbeddedSelection, f64)> {
        if index >= self.total {
            return None;
        }
        let n = self.set.slices.len();
        let mut indices = vec![0usize; n];
        for i in (0..n).rev() {
            let m = self.set.slices[i].len() as u128;
            indices[i] = (index % m) as usize;
            index /= m;
        }
        let primary: Vec<f64> = indices.iter().zip(&self.set.slices).map(|(&j, s)| s.points[j]).collect();
        let secondary: Vec<f64> = indices.iter().zip(&self.set.slices).map(|(&j, s)| s.grades[j]).collect();
        let grade = self.tnorm.fold(secondary.iter().copied());
        Some((
            EmbeddedSelection {
                indices,
                primary,
                secondary,
            },
            grade,
        ))
    }
}

impl Iterator for EmbeddedIter<'_> {
    type Item = (EmbeddedSelection, f64);

    fn next(&mut self) -> Option<Self::Item> {
        let item = self.selection_at(self.next)?;
        self.next += 1;
        Some(item)
    }
}

/// Streams every embedded set with its combined secondary grade.
pub fn enumerate_embedded(set: &GeneralT2Discrete, tnorm: TNorm, cap: u128) -> Result<EmbeddedIter<'_>> {
    let total = set.embedded_count();
    if total > cap {
        return Err(FuzzyError::EmbeddedExplosion { count: total, cap });
    }
    Ok(EmbeddedIter {
        set,
        tnorm,
        next: 0,
        total,
    })
}
