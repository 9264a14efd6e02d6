//! Type-I fuzzy sets: membership functions, fuzzy numbers, extension-principle
//! arithmetic and centroid defuzzification.

use serde::{Deserialize, Serialize};

use crate::error::{FuzzyError, Result};

/// Gaussians are treated as zero beyond this many standard deviations whenever
/// a bounded support is needed.
pub const GAUSS_TRUNCATION: f64 = 6.0;

/// Default number of grid points used to discretize a support.
pub const DEFAULT_GRID_POINTS: usize = 201;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TNorm {
    Minimum,
    #[default]
    Product,
}

impl TNorm {
    #[inline]
    pub fn apply(self, a: f64, b: f64) -> f64 {
        match self {
            TNorm::Minimum => a.min(b),
            TNorm::Product => a * b,
        }
    }

    /// Folds the t-norm over `grades`; the empty fold is 1.
    #[inline]
    pub fn fold<I: IntoIterator<Item = f64>>(self, grades: I) -> f64 {
        grades.into_iter().fold(1.0, |acc, g| self.apply(acc, g))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum MembershipFunction {
    Gaussian { mean: f64, sigma: f64 },
    Triangular { left: f64, peak: f64, right: f64 },
    Interval { lo: f64, hi: f64 },
    Singleton { point: f64 },
    Sampled { domain: Vec<f64>, grades: Vec<f64> },
}

impl MembershipFunction {
    pub fn gaussian(mean: f64, sigma: f64) -> Self {
        MembershipFunction::Gaussian { mean, sigma }
    }

    pub fn triangular(left: f64, peak: f64, right: f64) -> Self {
        MembershipFunction::Triangular { left, peak, right }
    }

    pub fn interval(lo: f64, hi: f64) -> Self {
        MembershipFunction::Interval { lo, hi }
    }

    pub fn singleton(point: f64) -> Self {
        MembershipFunction::Singleton { point }
    }

    pub fn sampled(domain: Vec<f64>, grades: Vec<f64>) -> Result<Self> {
        let mf = MembershipFunction::Sampled { domain, grades };
        mf.validate()?;
        Ok(mf)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(FuzzyError::InvalidMf(msg));
        match self {
            MembershipFunction::Gaussian { mean, sigma } => {
                if !mean.is_finite() || !(sigma.is_finite() && *sigma > 0.0) {
                    return bad(format!("gaussian needs finite mean and sigma > 0, got ({mean}, {sigma})"));
                }
            }
            MembershipFunction::Triangular { left, peak, right } => {
                if !(left <= peak && peak <= right) || !left.is_finite() || !right.is_finite() {
                    return bad(format!("triangular needs left <= peak <= right, got ({left}, {peak}, {right})"));
                }
            }
            MembershipFunction::Interval { lo, hi } => {
                if !(lo <= hi) || !lo.is_finite() || !hi.is_finite() {
                    return bad(format!("interval needs lo <= hi, got [{lo}, {hi}]"));
                }
            }
            MembershipFunction::Singleton { point } => {
                if !point.is_finite() {
                    return bad("singleton point must be finite".into());
                }
            }
            MembershipFunction::Sampled { domain, grades } => check_grid(domain, grades, false)?,
        }
        Ok(())
    }

    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            MembershipFunction::Gaussian { mean, sigma } => {
                let u = (x - mean) / sigma;
                (-0.5 * u * u).exp()
            }
            MembershipFunction::Triangular { left, peak, right } => {
                if x < left || x > right {
                    0.0
                } else if x == peak {
                    1.0
                } else if x < peak {
                    (x - left) / (peak - left)
                } else {
                    (right - x) / (right - peak)
                }
            }
            MembershipFunction::Interval { lo, hi } => {
                if (lo..=hi).contains(&x) {
                    1.0
                } else {
                    0.0
                }
            }
            MembershipFunction::Singleton { point } => {
                if x == point {
                    1.0
                } else {
                    0.0
                }
            }
            MembershipFunction::Sampled { ref domain, ref grades } => interpolate(domain, grades, x),
        }
    }

    /// Bounded support; gaussians are cut at `GAUSS_TRUNCATION` sigmas.
    pub fn support(&self) -> (f64, f64) {
        match *self {
            MembershipFunction::Gaussian { mean, sigma } => {
                (mean - GAUSS_TRUNCATION * sigma, mean + GAUSS_TRUNCATION * sigma)
            }
            MembershipFunction::Triangular { left, right, .. } => (left, right),
            MembershipFunction::Interval { lo, hi } => (lo, hi),
            MembershipFunction::Singleton { point } => (point, point),
            MembershipFunction::Sampled { ref domain, ref grades } => {
                grid_support(domain, grades).unwrap_or((domain[0], domain[0]))
            }
        }
    }

    /// Location of the maximum grade (first one for sampled functions; the
    /// midpoint for intervals).
    pub fn peak(&self) -> f64 {
        match *self {
            MembershipFunction::Gaussian { mean, .. } => mean,
            MembershipFunction::Triangular { peak, .. } => peak,
            MembershipFunction::Interval { lo, hi } => 0.5 * (lo + hi),
            MembershipFunction::Singleton { point } => point,
            MembershipFunction::Sampled { ref domain, ref grades } => domain[argmax(grades)],
        }
    }

    pub fn height(&self) -> f64 {
        match self {
            MembershipFunction::Sampled { grades, .. } => grades.iter().cloned().fold(0.0, f64::max),
            _ => 1.0,
        }
    }

    /// Center of symmetry, when the function is even-symmetric about one.
    pub fn symmetry_center(&self) -> Option<f64> {
        match *self {
            MembershipFunction::Gaussian { mean, .. } => Some(mean),
            MembershipFunction::Interval { lo, hi } => Some(0.5 * (lo + hi)),
            MembershipFunction::Singleton { point } => Some(point),
            MembershipFunction::Triangular { left, peak, right } => {
                if ((peak - left) - (right - peak)).abs() <= 1e-15 * (1.0 + left.abs() + right.abs()) {
                    Some(peak)
                } else {
                    None
                }
            }
            MembershipFunction::Sampled { .. } => None,
        }
    }
}

fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &g) in v.iter().enumerate() {
        if g > v[best] {
            best = i;
        }
    }
    best
}

fn check_grid(domain: &[f64], grades: &[f64], strict: bool) -> Result<()> {
    if domain.is_empty() {
        return Err(FuzzyError::InvalidMf("empty grid".into()));
    }
    if domain.len() != grades.len() {
        return Err(FuzzyError::LengthMismatch {
            what: "grid domain/grades",
            left: domain.len(),
            right: grades.len(),
        });
    }
    for w in domain.windows(2) {
        if !(w[0] < w[1]) && (strict || !(w[0] <= w[1])) {
            return Err(FuzzyError::InvalidMf(format!("grid domain not ascending at {} -> {}", w[0], w[1])));
        }
    }
    if let Some(&g) = grades.iter().find(|g| !(0.0..=1.0).contains(*g)) {
        return Err(FuzzyError::GradeOutOfRange(g));
    }
    Ok(())
}

fn interpolate(domain: &[f64], grades: &[f64], x: f64) -> f64 {
    let n = domain.len();
    if x < domain[0] || x > domain[n - 1] {
        return 0.0;
    }
    let j = domain.partition_point(|&d| d < x);
    if j == 0 || domain[j] == x {
        return grades[j];
    }
    let (x0, x1) = (domain[j - 1], domain[j]);
    let t = (x - x0) / (x1 - x0);
    grades[j - 1] + t * (grades[j] - grades[j - 1])
}

fn grid_support(domain: &[f64], grades: &[f64]) -> Option<(f64, f64)> {
    let first = grades.iter().position(|&g| g > 0.0)?;
    let last = grades.iter().rposition(|&g| g > 0.0)?;
    Some((domain[first], domain[last]))
}

/// A discretized fuzzy set: strictly ascending points with grades in [0, 1].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSet {
    domain: Vec<f64>,
    grades: Vec<f64>,
}

impl GridSet {
    pub fn new(domain: Vec<f64>, grades: Vec<f64>) -> Result<Self> {
        check_grid(&domain, &grades, true)?;
        Ok(GridSet { domain, grades })
    }

    pub fn domain(&self) -> &[f64] {
        &self.domain
    }

    pub fn grades(&self) -> &[f64] {
        &self.grades
    }

    pub fn len(&self) -> usize {
        self.domain.len()
    }

    pub fn is_empty(&self) -> bool {
        self.domain.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.domain.iter().copied().zip(self.grades.iter().copied())
    }

    pub fn centroid(&self) -> Result<f64> {
        let (mut num, mut den) = (0.0, 0.0);
        for (x, g) in self.iter() {
            num += x * g;
            den += g;
        }
        if den <= 0.0 {
            return Err(FuzzyError::EmptySet);
        }
        Ok(num / den)
    }

    /// Multiplies every grade by `lambda` in (0, 1].
    pub fn scale_grades(&self, lambda: f64) -> GridSet {
        GridSet {
            domain: self.domain.clone(),
            grades: self.grades.iter().map(|g| g * lambda).collect(),
        }
    }
}

/// A type-I fuzzy number, either parametric or grid-sampled.
///
/// Serialized as a `{ "kind": ..., params }` object; the grid form uses
/// `"kind": "grid"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FuzzyNumber {
    Grid {
        domain: Vec<f64>,
        grades: Vec<f64>,
    },
    #[serde(untagged)]
    Parametric(MembershipFunction),
}

impl From<MembershipFunction> for FuzzyNumber {
    fn from(mf: MembershipFunction) -> Self {
        FuzzyNumber::Parametric(mf)
    }
}

impl From<GridSet> for FuzzyNumber {
    fn from(g: GridSet) -> Self {
        FuzzyNumber::Grid {
            domain: g.domain,
            grades: g.grades,
        }
    }
}

impl From<IntervalT1> for FuzzyNumber {
    fn from(i: IntervalT1) -> Self {
        i.to_mf().into()
    }
}

impl From<GaussianT1> for FuzzyNumber {
    fn from(g: GaussianT1) -> Self {
        g.to_mf().into()
    }
}

impl FuzzyNumber {
    pub fn grid(domain: Vec<f64>, grades: Vec<f64>) -> Result<Self> {
        Ok(GridSet::new(domain, grades)?.into())
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            FuzzyNumber::Grid { domain, grades } => check_grid(domain, grades, true),
            FuzzyNumber::Parametric(mf) => mf.validate(),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            FuzzyNumber::Grid { domain, grades } => interpolate(domain, grades, x),
            FuzzyNumber::Parametric(mf) => mf.eval(x),
        }
    }

    pub fn support(&self) -> Option<(f64, f64)> {
        match self {
            FuzzyNumber::Grid { domain, grades } => grid_support(domain, grades),
            FuzzyNumber::Parametric(MembershipFunction::Sampled { domain, grades }) => grid_support(domain, grades),
            FuzzyNumber::Parametric(mf) => Some(mf.support()),
        }
    }

    /// Samples the number into a grid of `n` points spanning its support
    /// (exact points for singletons and existing grids).
    pub fn to_grid(&self, n: usize) -> Result<GridSet> {
        match self {
            FuzzyNumber::Grid { domain, grades } => GridSet::new(domain.clone(), grades.clone()),
            FuzzyNumber::Parametric(MembershipFunction::Sampled { domain, grades }) => {
                GridSet::new(domain.clone(), grades.clone())
            }
            FuzzyNumber::Parametric(mf) => {
                let (lo, hi) = mf.support();
                if lo == hi || n < 2 {
                    return GridSet::new(vec![mf.peak()], vec![mf.height()]);
                }
                let domain = linspace(lo, hi, n);
                let grades = domain.iter().map(|&x| mf.eval(x)).collect();
                GridSet::new(domain, grades)
            }
        }
    }

    /// Exact image under x -> alpha * x + beta.
    pub fn affine(&self, alpha: f64, beta: f64) -> FuzzyNumber {
        if alpha == 0.0 {
            return MembershipFunction::singleton(beta).into();
        }
        let map = |x: f64| alpha * x + beta;
        match self {
            FuzzyNumber::Parametric(mf) => match *mf {
                MembershipFunction::Gaussian { mean, sigma } => MembershipFunction::gaussian(map(mean), alpha.abs() * sigma).into(),
                MembershipFunction::Triangular { left, peak, right } => {
                    let (a, b) = if alpha > 0.0 { (map(left), map(right)) } else { (map(right), map(left)) };
                    MembershipFunction::triangular(a, map(peak), b).into()
                }
                MembershipFunction::Interval { lo, hi } => {
                    let (a, b) = if alpha > 0.0 { (map(lo), map(hi)) } else { (map(hi), map(lo)) };
                    MembershipFunction::interval(a, b).into()
                }
                MembershipFunction::Singleton { point } => MembershipFunction::singleton(map(point)).into(),
                MembershipFunction::Sampled { ref domain, ref grades } => map_grid(domain, grades, alpha, beta, true),
            },
            FuzzyNumber::Grid { domain, grades } => map_grid(domain, grades, alpha, beta, false),
        }
    }
}

fn map_grid(domain: &[f64], grades: &[f64], alpha: f64, beta: f64, sampled: bool) -> FuzzyNumber {
    let mut pts: Vec<(f64, f64)> = domain.iter().map(|&x| alpha * x + beta).zip(grades.iter().copied()).collect();
    if alpha < 0.0 {
        pts.reverse();
    }
    let (d, g): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
    if sampled {
        MembershipFunction::Sampled { domain: d, grades: g }.into()
    } else {
        FuzzyNumber::Grid { domain: d, grades: g }
    }
}

pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let step = (hi - lo) / (n - 1) as f64;
    (0..n)
        .map(|i| if i == n - 1 { hi } else { lo + step * i as f64 })
        .collect()
}

/// Crisp-centered interval set `[c - s, c + s]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntervalT1 {
    pub center: f64,
    pub spread: f64,
}

impl IntervalT1 {
    pub fn new(center: f64, spread: f64) -> Self {
        IntervalT1 { center, spread }
    }

    pub fn crisp(x: f64) -> Self {
        IntervalT1 { center: x, spread: 0.0 }
    }

    pub fn from_bounds(lo: f64, hi: f64) -> Self {
        IntervalT1 {
            center: 0.5 * (lo + hi),
            spread: 0.5 * (hi - lo),
        }
    }

    pub fn lo(&self) -> f64 {
        self.center - self.spread
    }

    pub fn hi(&self) -> f64 {
        self.center + self.spread
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo() && x <= self.hi()
    }

    pub fn to_mf(&self) -> MembershipFunction {
        if self.spread == 0.0 {
            MembershipFunction::singleton(self.center)
        } else {
            MembershipFunction::interval(self.lo(), self.hi())
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianT1 {
    pub mean: f64,
    pub sigma: f64,
}

impl GaussianT1 {
    pub fn new(mean: f64, sigma: f64) -> Self {
        GaussianT1 { mean, sigma }
    }

    pub fn to_mf(&self) -> MembershipFunction {
        if self.sigma == 0.0 {
            MembershipFunction::singleton(self.mean)
        } else {
            MembershipFunction::gaussian(self.mean, self.sigma)
        }
    }
}

/// Discretization used by [`extend_binary`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GridSpec {
    /// `n` points across each operand support and across the output range.
    Points(usize),
    /// Operands sampled on multiples of `step` (plus their support endpoints);
    /// outputs bucketed to the nearest multiple of `step`.
    Step(f64),
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec::Points(DEFAULT_GRID_POINTS)
    }
}

fn operand_points(f: &FuzzyNumber, spec: GridSpec) -> Result<Vec<(f64, f64)>> {
    let pts: Vec<(f64, f64)> = match (f, spec) {
        (FuzzyNumber::Grid { domain, grades }, _)
        | (FuzzyNumber::Parametric(MembershipFunction::Sampled { domain, grades }), _) => {
            domain.iter().copied().zip(grades.iter().copied()).collect()
        }
        (FuzzyNumber::Parametric(_), GridSpec::Points(n)) => f.to_grid(n.max(2))?.iter().collect(),
        (FuzzyNumber::Parametric(mf), GridSpec::Step(step)) => {
            let (lo, hi) = mf.support();
            let mut xs = vec![lo];
            let first = (lo / step).ceil() as i64;
            let last = (hi / step).floor() as i64;
            for k in first..=last {
                let x = k as f64 * step;
                if x > lo && x < hi {
                    xs.push(x);
                }
            }
            if hi > lo {
                xs.push(hi);
            }
            xs.into_iter().map(|x| (x, mf.eval(x))).collect()
        }
    };
    let pts: Vec<(f64, f64)> = pts.into_iter().filter(|&(_, g)| g > 0.0).collect();
    if pts.is_empty() {
        return Err(FuzzyError::DegenerateOperand("operand has empty support"));
    }
    Ok(pts)
}

/// Extension-principle image of `op` applied to `f` and `g`.
///
/// Every operand pair `(v, w)` contributes `tnorm(f(v), g(w))` to the output
/// bucket nearest `op(v, w)`; each bucket keeps its largest contribution.
pub fn extend_binary<Op>(f: &FuzzyNumber, g: &FuzzyNumber, op: Op, tnorm: TNorm, spec: GridSpec) -> Result<FuzzyNumber>
where
    Op: Fn(f64, f64) -> f64,
{
    if let GridSpec::Step(s) = spec {
        if !(s > 0.0 && s.is_finite()) {
            return Err(FuzzyError::Config(format!("grid step must be positive, got {s}")));
        }
    }
    if let GridSpec::Points(n) = spec {
        if n < 2 {
            return Err(FuzzyError::Config(format!("grid needs at least 2 points, got {n}")));
        }
    }
    let fp = operand_points(f, spec)?;
    let gp = operand_points(g, spec)?;

    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for &(v, _) in &fp {
        for &(w, _) in &gp {
            let y = op(v, w);
            lo = lo.min(y);
            hi = hi.max(y);
        }
    }
    if !lo.is_finite() || !hi.is_finite() {
        return Err(FuzzyError::DegenerateOperand("operation produced non-finite values"));
    }

    let (domain, mut grades, bucket): (Vec<f64>, Vec<f64>, Box<dyn Fn(f64) -> usize>) = match spec {
        GridSpec::Points(n) => {
            if hi == lo {
                (vec![lo], vec![0.0], Box::new(|_| 0))
            } else {
                let step = (hi - lo) / (n - 1) as f64;
                (
                    linspace(lo, hi, n),
                    vec![0.0; n],
                    Box::new(move |y| (((y - lo) / step).round() as usize).min(n - 1)),
                )
            }
        }
        GridSpec::Step(step) => {
            let k0 = (lo / step).round() as i64;
            let k1 = (hi / step).round() as i64;
            let n = (k1 - k0 + 1) as usize;
            let domain = (k0..=k1).map(|k| k as f64 * step).collect();
            (domain, vec![0.0; n], Box::new(move |y| ((y / step).round() as i64 - k0) as usize))
        }
    };
    for &(v, fv) in &fp {
        for &(w, gw) in &gp {
            let b = bucket(op(v, w));
            let g = tnorm.apply(fv, gw);
            if g > grades[b] {
                grades[b] = g;
            }
        }
    }
    Ok(FuzzyNumber::Grid { domain, grades })
}

fn check_lengths(what: &'static str, a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(FuzzyError::LengthMismatch { what, left: a, right: b });
    }
    if a == 0 {
        return Err(FuzzyError::Config(format!("{what}: empty input")));
    }
    Ok(())
}

/// Affine combination of interval sets: centers combine linearly, spreads by |alpha|.
pub fn affine_combine_interval(sets: &[IntervalT1], alphas: &[f64], beta: f64) -> Result<IntervalT1> {
    check_lengths("affine_combine_interval", sets.len(), alphas.len())?;
    let mut c = beta;
    let mut s = 0.0;
    for (set, &a) in sets.iter().zip(alphas) {
        c += a * set.center;
        s += a.abs() * set.spread;
    }
    Ok(IntervalT1::new(c, s))
}

/// Affine combination of gaussian numbers; the spread rule depends on the t-norm
/// (root-sum-square for product, absolute sum for minimum).
pub fn affine_combine_gaussian(sets: &[GaussianT1], alphas: &[f64], beta: f64, tnorm: TNorm) -> Result<GaussianT1> {
    check_lengths("affine_combine_gaussian", sets.len(), alphas.len())?;
    let mean = beta + sets.iter().zip(alphas).map(|(s, a)| a * s.mean).sum::<f64>();
    let sigma = match tnorm {
        TNorm::Product => sets.iter().zip(alphas).map(|(s, a)| (a * s.sigma).powi(2)).sum::<f64>().sqrt(),
        TNorm::Minimum => sets.iter().zip(alphas).map(|(s, a)| (a * s.sigma).abs()).sum::<f64>(),
    };
    Ok(GaussianT1::new(mean, sigma))
}

/// Centroid defuzzification. Symmetric parametric sets return their center;
/// everything else uses the discrete ratio sum(x mu) / sum(mu).
pub fn centroid_defuzz(f: &FuzzyNumber) -> Result<f64> {
    match f {
        FuzzyNumber::Parametric(mf) => {
            if let Some(c) = mf.symmetry_center() {
                return Ok(c);
            }
            f.to_grid(DEFAULT_GRID_POINTS)?.centroid()
        }
        FuzzyNumber::Grid { domain, grades } => {
            let (mut num, mut den) = (0.0, 0.0);
            for (x, g) in domain.iter().zip(grades) {
                num += x * g;
                den += g;
            }
            if den <= 0.0 {
                return Err(FuzzyError::EmptySet);
            }
            Ok(num / den)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn eval_examples() {
        assert_eq!(MembershipFunction::gaussian(0.0, 1.0).eval(0.0), 1.0);
        let iv = MembershipFunction::interval(0.2, 0.4);
        assert_eq!(iv.eval(0.3), 1.0);
        assert_eq!(iv.eval(0.5), 0.0);
        assert_abs_diff_eq!(MembershipFunction::gaussian(1.0, 0.5).eval(1.5), (-0.5f64).exp(), epsilon = 1e-15);
        assert_abs_diff_eq!(MembershipFunction::gaussian(1.0, 0.5).eval(1.5), 0.6065, epsilon = 1e-4);
    }

    #[test]
    fn sampled_interpolates_and_vanishes_outside() {
        let mf = MembershipFunction::sampled(vec![0.0, 1.0, 2.0], vec![0.0, 1.0, 0.5]).unwrap();
        assert_abs_diff_eq!(mf.eval(0.5), 0.5);
        assert_abs_diff_eq!(mf.eval(1.5), 0.75);
        assert_eq!(mf.eval(-0.1), 0.0);
        assert_eq!(mf.eval(2.1), 0.0);
        assert!(MembershipFunction::sampled(vec![0.0, 1.0], vec![0.3]).is_err());
    }

    #[test]
    fn json_round_trip_uses_kind_tag() {
        let f: FuzzyNumber = MembershipFunction::gaussian(1.0, 0.2).into();
        let s = serde_json::to_string(&f).unwrap();
        assert_eq!(s, r#"{"kind":"gaussian","mean":1.0,"sigma":0.2}"#);
        assert_eq!(serde_json::from_str::<FuzzyNumber>(&s).unwrap(), f);
        let g = FuzzyNumber::grid(vec![0.0, 1.0], vec![0.5, 1.0]).unwrap();
        let s = serde_json::to_string(&g).unwrap();
        assert!(s.starts_with(r#"{"kind":"grid""#));
        assert_eq!(serde_json::from_str::<FuzzyNumber>(&s).unwrap(), g);
    }

    #[test]
    fn adding_crisp_zero_preserves_grid_grades() {
        let f = FuzzyNumber::grid(vec![0.0, 0.5, 1.0], vec![0.2, 1.0, 0.4]).unwrap();
        let z: FuzzyNumber = MembershipFunction::singleton(0.0).into();
        let out = extend_binary(&f, &z, |a, b| a + b, TNorm::Minimum, GridSpec::Points(3)).unwrap();
        assert_eq!(out, f);
    }

    #[test]
    fn interval_sum_support_matches_endpoint_arithmetic() {
        let a: FuzzyNumber = IntervalT1::new(1.0, 0.5).into();
        let b: FuzzyNumber = IntervalT1::new(3.0, 1.0).into();
        let out = extend_binary(&a, &b, |x, y| x + y, TNorm::Minimum, GridSpec::default()).unwrap();
        let (lo, hi) = out.support().unwrap();
        assert_abs_diff_eq!(lo, 2.5, epsilon = 1e-12);
        assert_abs_diff_eq!(hi, 5.5, epsilon = 1e-12);
        let closed = affine_combine_interval(&[IntervalT1::new(1.0, 0.5), IntervalT1::new(3.0, 1.0)], &[1.0, 1.0], 0.0).unwrap();
        assert_eq!(closed, IntervalT1::new(4.0, 1.5));
    }

    #[test]
    fn interval_affine_examples() {
        let one = affine_combine_interval(&[IntervalT1::new(2.0, 0.3)], &[1.0], 0.0).unwrap();
        assert_eq!(one, IntervalT1::new(2.0, 0.3));
        let neg = affine_combine_interval(&[IntervalT1::new(1.0, 0.5)], &[-2.0], 1.0).unwrap();
        assert_eq!(neg, IntervalT1::new(-1.0, 1.0));
        assert!(affine_combine_interval(&[IntervalT1::new(1.0, 0.5)], &[1.0, 2.0], 0.0).is_err());
    }

    /// Grid oracle for a two-term gaussian affine combination.
    fn gaussian_oracle(a: GaussianT1, b: GaussianT1, alphas: [f64; 2], beta: f64, tnorm: TNorm, step: f64) -> FuzzyNumber {
        let fa = FuzzyNumber::from(a).affine(alphas[0], 0.0);
        let fb = FuzzyNumber::from(b).affine(alphas[1], 0.0);
        extend_binary(&fa, &fb, |x, y| x + y, tnorm, GridSpec::Step(step)).unwrap().affine(1.0, beta)
    }

    fn sup_gap(grid: &FuzzyNumber, closed: GaussianT1) -> f64 {
        let FuzzyNumber::Grid { domain, grades } = grid else { unreachable!() };
        let mf = closed.to_mf();
        domain.iter().zip(grades).map(|(&x, &g)| (mf.eval(x) - g).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn gaussian_affine_matches_extension_oracle() {
        let a = GaussianT1::new(1.0, 0.1);
        let b = GaussianT1::new(2.0, 0.2);
        let prod = affine_combine_gaussian(&[a, b], &[2.0, -1.0], 0.5, TNorm::Product).unwrap();
        assert_abs_diff_eq!(prod.mean, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(prod.sigma, 0.08f64.sqrt(), epsilon = 1e-15);
        let min = affine_combine_gaussian(&[a, b], &[2.0, -1.0], 0.5, TNorm::Minimum).unwrap();
        assert_abs_diff_eq!(min.sigma, 0.4, epsilon = 1e-15);

        let step = 0.1 / 200.0;
        let g = gaussian_oracle(a, b, [2.0, -1.0], 0.5, TNorm::Product, step);
        assert!(sup_gap(&g, prod) < 1e-3, "product gap {}", sup_gap(&g, prod));
        let g = gaussian_oracle(a, b, [2.0, -1.0], 0.5, TNorm::Minimum, step);
        assert!(sup_gap(&g, min) < 1e-3, "min gap {}", sup_gap(&g, min));

        let sum = affine_combine_gaussian(&[a, b], &[1.0, 1.0], 0.0, TNorm::Product).unwrap();
        assert_abs_diff_eq!(sum.sigma, 0.05f64.sqrt(), epsilon = 1e-15);
        let g = gaussian_oracle(a, b, [1.0, 1.0], 0.0, TNorm::Product, step);
        assert!(sup_gap(&g, sum) < 1e-3);
    }

    #[test]
    fn centroid_examples() {
        assert_eq!(centroid_defuzz(&IntervalT1::new(2.0, 0.5).into()).unwrap(), 2.0);
        assert_eq!(centroid_defuzz(&MembershipFunction::gaussian(3.0, 0.2).into()).unwrap(), 3.0);
        let g = FuzzyNumber::grid(vec![1.0, 2.0, 3.0], vec![0.5, 1.0, 0.5]).unwrap();
        assert_eq!(centroid_defuzz(&g).unwrap(), 2.0);
        let empty = FuzzyNumber::grid(vec![1.0, 2.0], vec![0.0, 0.0]).unwrap();
        assert_eq!(centroid_defuzz(&empty), Err(FuzzyError::EmptySet));
    }

    #[test]
    fn asymmetric_triangle_uses_grid_centroid() {
        let c = centroid_defuzz(&MembershipFunction::triangular(0.0, 0.0, 3.0).into()).unwrap();
        // Discrete ratio on 201 points; the continuous centroid is 1.
        assert_abs_diff_eq!(c, 1.0, epsilon = 1e-2);
    }

    fn arb_mf() -> impl Strategy<Value = MembershipFunction> {
        prop_oneof![
            (-5.0..5.0f64, 0.01..3.0f64).prop_map(|(m, s)| MembershipFunction::gaussian(m, s)),
            (-5.0..5.0f64, 0.0..2.0f64, 0.0..2.0f64).prop_map(|(p, l, r)| MembershipFunction::triangular(p - l, p, p + r)),
            (-5.0..5.0f64, 0.0..2.0f64).prop_map(|(c, w)| MembershipFunction::interval(c - w, c + w)),
            (-5.0..5.0f64).prop_map(MembershipFunction::singleton),
            proptest::collection::vec(0.0..=1.0f64, 1..20).prop_map(|g| {
                let d = (0..g.len()).map(|i| i as f64 * 0.3 - 2.0).collect();
                MembershipFunction::Sampled { domain: d, grades: g }
            }),
        ]
    }

    proptest! {
        #[test]
        fn grades_stay_in_unit_interval(mf in arb_mf(), x in -10.0..10.0f64) {
            let g = mf.eval(x);
            prop_assert!((0.0..=1.0).contains(&g));
        }

        #[test]
        fn interval_affine_matches_extension_support(
            sets in proptest::collection::vec((-3.0..3.0f64, 0.0..1.0f64), 1..=4),
            alphas in proptest::collection::vec(-5.0..5.0f64, 4),
            beta in -2.0..2.0f64,
        ) {
            let sets: Vec<IntervalT1> = sets.into_iter().map(|(c, s)| IntervalT1::new(c, s)).collect();
            let alphas = &alphas[..sets.len()];
            let closed = affine_combine_interval(&sets, alphas, beta).unwrap();
            let mut acc: FuzzyNumber = MembershipFunction::singleton(beta).into();
            for (s, &a) in sets.iter().zip(alphas) {
                let term = FuzzyNumber::from(*s).affine(a, 0.0);
                acc = extend_binary(&acc, &term, |x, y| x + y, TNorm::Minimum, GridSpec::Points(DEFAULT_GRID_POINTS)).unwrap();
            }
            let (lo, hi) = acc.support().unwrap();
            let resolution = (hi - lo).max(1e-12) / (DEFAULT_GRID_POINTS - 1) as f64;
            prop_assert!((lo - closed.lo()).abs() <= resolution + 1e-9);
            prop_assert!((hi - closed.hi()).abs() <= resolution + 1e-9);
        }

        #[test]
        fn symmetric_sets_defuzz_to_center(c in -10.0..10.0f64, w in 0.01..3.0f64, half in proptest::collection::vec(0.0..=1.0f64, 1..15)) {
            let n = half.len();
            let mut domain = Vec::new();
            let mut grades = Vec::new();
            for i in (1..=n).rev() { domain.push(c - w * i as f64); grades.push(half[i - 1]); }
            domain.push(c); grades.push(1.0);
            for i in 1..=n { domain.push(c + w * i as f64); grades.push(half[i - 1]); }
            let g = FuzzyNumber::grid(domain, grades).unwrap();
            prop_assert!((centroid_defuzz(&g).unwrap() - c).abs() <= 1e-12 * (1.0 + c.abs() + w * n as f64));
            prop_assert_eq!(centroid_defuzz(&MembershipFunction::triangular(c - w, c, c + w).into()).unwrap(), c);
        }

        #[test]
        fn centroid_is_scale_invariant(grades in proptest::collection::vec(0.01..=1.0f64, 2..30), lambda in 0.01..=1.0f64) {
            let domain: Vec<f64> = (0..grades.len()).map(|i| i as f64 * 0.7 - 3.0).collect();
            let g = GridSet::new(domain, grades).unwrap();
            let a = g.centroid().unwrap();
            let b = g.scale_grades(lambda).centroid().unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
        }
    }
}
