//! Type reduction: brute-force centroid, height and center-of-sets reducers,
//! closed-form approximations of the generalized centroid, and the exact
//! Karnik–Mendel iteration for interval sets.

use serde::{Deserialize, Serialize};

use crate::error::{FuzzyError, Result};
use crate::t1::{
    affine_combine_gaussian, affine_combine_interval, extend_binary, FuzzyNumber, GaussianT1, GridSpec, IntervalT1,
    MembershipFunction, TNorm,
};
use crate::t2::GeneralT2Discrete;

/// Ratio above which a closed-form approximation is flagged.
pub const QUALITY_THRESHOLD: f64 = 0.1;

/// Default multiplier on the minimum-t-norm spread of the gaussian approximation.
pub const DEFAULT_MIN_BRANCH_K: f64 = 2.0;

/// Points per parametric set when brute-force reducers discretize their inputs.
pub const DEFAULT_TR_LEVELS: usize = 5;

/// Relative tolerance under which brute-force output points are merged.
const MERGE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrQuality {
    /// `sum(delta) / sum(h)`.
    pub ratio: f64,
    pub warning: bool,
}

impl TrQuality {
    pub fn new(ratio: f64) -> Self {
        TrQuality {
            ratio,
            warning: ratio > QUALITY_THRESHOLD,
        }
    }
}

fn merge_points(mut pts: Vec<(f64, f64)>) -> Result<FuzzyNumber> {
    if pts.is_empty() {
        return Err(FuzzyError::NoRuleFired);
    }
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut domain: Vec<f64> = Vec::with_capacity(pts.len());
    let mut grades: Vec<f64> = Vec::with_capacity(pts.len());
    for (x, g) in pts {
        match domain.last() {
            Some(&last) if (x - last).abs() <= MERGE_TOL * (1.0 + x.abs()) => {
                let k = grades.len() - 1;
                grades[k] = grades[k].max(g);
            }
            _ => {
                domain.push(x);
                grades.push(g);
            }
        }
    }
    FuzzyNumber::grid(domain, grades)
}

/// Centroid type reduction by enumerating every embedded set.
///
/// Each embedded set `{theta_i}` contributes the point `sum x_i theta_i / sum theta_i`
/// with grade equal to the t-norm of its secondary grades; coincident points keep
/// the largest grade. The product t-norm is refused beyond 20 domain points since
/// the combined grades vanish.
pub fn centroid_tr_bruteforce(set: &GeneralT2Discrete, tnorm: TNorm, cap: u128) -> Result<FuzzyNumber> {
    let n = set.domain().len();
    if tnorm == TNorm::Product && n > 20 {
        return Err(FuzzyError::Config(format!("product t-norm centroid reduction over {n} > 20 points")));
    }
    let total = set.embedded_count();
    if total > cap {
        return Err(FuzzyError::EmbeddedExplosion { count: total, cap });
    }
    let slices = set.slices();
    let x = set.domain();
    let mut idx = vec![0usize; n];
    let mut pts = Vec::new();
    loop {
        let (mut num, mut den, mut grade) = (0.0, 0.0, 1.0);
        for i in 0..n {
            let th = slices[i].points()[idx[i]];
            num += x[i] * th;
            den += th;
            grade = tnorm.apply(grade, slices[i].grades()[idx[i]]);
        }
        if den > 0.0 {
            pts.push((num / den, grade));
        }
        // odometer, last index fastest
        let mut i = n;
        loop {
            if i == 0 {
                return merge_points(pts);
            }
            i -= 1;
            idx[i] += 1;
            if idx[i] < slices[i].len() {
                break;
            }
            idx[i] = 0;
        }
    }
}

/// Weighted average of fuzzy numbers `sum z_l w_l / sum w_l`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneralizedCentroidInput {
    pub z: Vec<FuzzyNumber>,
    pub w: Vec<FuzzyNumber>,
    /// Combines the grade of a value with the grade of its weight.
    #[serde(default)]
    pub inner: TNorm,
    /// Combines the per-term grades.
    #[serde(default)]
    pub outer: TNorm,
    /// Points per parametric set when enumerating.
    #[serde(default = "default_levels")]
    pub levels: usize,
}

fn default_levels() -> usize {
    DEFAULT_TR_LEVELS
}

impl GeneralizedCentroidInput {
    pub fn new(z: Vec<FuzzyNumber>, w: Vec<FuzzyNumber>) -> Self {
        GeneralizedCentroidInput {
            z,
            w,
            inner: TNorm::default(),
            outer: TNorm::default(),
            levels: DEFAULT_TR_LEVELS,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.z.len() != self.w.len() {
            return Err(FuzzyError::LengthMismatch {
                what: "generalized centroid z/w",
                left: self.z.len(),
                right: self.w.len(),
            });
        }
        if self.z.is_empty() {
            return Err(FuzzyError::Config("generalized centroid needs at least one term".into()));
        }
        for f in self.z.iter().chain(&self.w) {
            f.validate()?;
        }
        for w in &self.w {
            if let Some((lo, _)) = w.support() {
                if lo < 0.0 {
                    return Err(FuzzyError::InvalidWeights(format!("weight support starts below zero at {lo}")));
                }
            }
        }
        Ok(())
    }

    /// Center and half-width of the support of every value and weight.
    pub fn center_spread(&self) -> Result<(Vec<IntervalT1>, Vec<IntervalT1>)> {
        let cs = |f: &FuzzyNumber| -> Result<IntervalT1> {
            let (lo, hi) = f.support().ok_or(FuzzyError::EmptySet)?;
            Ok(IntervalT1::from_bounds(lo, hi))
        };
        Ok((
            self.z.iter().map(cs).collect::<Result<_>>()?,
            self.w.iter().map(cs).collect::<Result<_>>()?,
        ))
    }
}

fn discrete_points(f: &FuzzyNumber, levels: usize) -> Result<Vec<(f64, f64)>> {
    let pts: Vec<(f64, f64)> = match f {
        FuzzyNumber::Parametric(MembershipFunction::Singleton { point }) => vec![(*point, 1.0)],
        _ => f.to_grid(levels.max(1))?.iter().filter(|&(_, g)| g > 0.0).collect(),
    };
    if pts.is_empty() {
        return Err(FuzzyError::EmptySet);
    }
    Ok(pts)
}

/// Center-of-sets reduction by full enumeration of the discretized values and
/// weights.
pub fn cos_tr_bruteforce(input: &GeneralizedCentroidInput, cap: u128) -> Result<FuzzyNumber> {
    input.validate()?;
    let zs = input.z.iter().map(|f| discrete_points(f, input.levels)).collect::<Result<Vec<_>>>()?;
    let ws = input.w.iter().map(|f| discrete_points(f, input.levels)).collect::<Result<Vec<_>>>()?;
    let total: u128 = zs.iter().chain(&ws).map(|v| v.len() as u128).product();
    if total > cap {
        return Err(FuzzyError::EmbeddedExplosion { count: total, cap });
    }
    let m = zs.len();
    let radix: Vec<usize> = zs.iter().chain(&ws).map(Vec::len).collect();
    let mut idx = vec![0usize; 2 * m];
    let mut pts = Vec::new();
    loop {
        let (mut num, mut den, mut grade) = (0.0, 0.0, 1.0);
        let mut fired = 0;
        let mut lone = 0.0;
        for l in 0..m {
            let (z, gz) = zs[l][idx[l]];
            let (w, gw) = ws[l][idx[m + l]];
            grade = input.outer.apply(grade, input.inner.apply(gz, gw));
            if w != 0.0 {
                fired += 1;
                lone = z;
                num += z * w;
                den += w;
            }
        }
        // With a single nonzero weight the average is that value; returning it
        // directly avoids the rounding of z * w / w.
        if fired == 1 {
            pts.push((lone, grade));
        } else if den > 0.0 {
            pts.push((num / den, grade));
        }
        let mut i = 2 * m;
        loop {
            if i == 0 {
                return merge_points(pts);
            }
            i -= 1;
            idx[i] += 1;
            if idx[i] < radix[i] {
                break;
            }
            idx[i] = 0;
        }
    }
}

/// Height reduction: crisp rule peaks `y_l` weighted by the fuzzy firing sets `D_l`.
pub fn height_tr(outputs: &[(f64, FuzzyNumber)], tnorm: TNorm, levels: usize, cap: u128) -> Result<FuzzyNumber> {
    let input = GeneralizedCentroidInput {
        z: outputs.iter().map(|(y, _)| MembershipFunction::singleton(*y).into()).collect(),
        w: outputs.iter().map(|(_, d)| d.clone()).collect(),
        inner: tnorm,
        outer: tnorm,
        levels,
    };
    cos_tr_bruteforce(&input, cap)
}

fn weight_sums(h: &[f64], delta: &[f64]) -> Result<(f64, f64)> {
    let sh: f64 = h.iter().sum();
    if !(sh > 0.0) {
        return Err(FuzzyError::NoRuleFired);
    }
    Ok((sh, delta.iter().sum()))
}

fn check_len4(a: usize, b: usize, c: usize, d: usize) -> Result<()> {
    for (what, x) in [("spreads", b), ("weights", c), ("weight spreads", d)] {
        if x != a {
            return Err(FuzzyError::LengthMismatch { what, left: a, right: x });
        }
    }
    if a == 0 {
        return Err(FuzzyError::Config("type reduction of an empty rule set".into()));
    }
    Ok(())
}

enum Shape {
    Interval,
    Gaussian,
    Other,
}

fn shape_of(f: &FuzzyNumber) -> Shape {
    match f {
        FuzzyNumber::Parametric(MembershipFunction::Interval { .. }) => Shape::Interval,
        FuzzyNumber::Parametric(MembershipFunction::Gaussian { .. }) => Shape::Gaussian,
        _ => Shape::Other,
    }
}

fn is_singleton(f: &FuzzyNumber) -> bool {
    matches!(f, FuzzyNumber::Parametric(MembershipFunction::Singleton { .. }))
}

/// Closed-form approximation of the generalized centroid:
/// `sum [Z_l' h_l / sum h + W_l' (c_l - xi) / sum h] + xi`, where primes denote
/// sets recentred at zero and `xi = sum h_l c_l / sum h_l`.
///
/// Interval inputs give an interval, gaussian inputs a gaussian; anything else is
/// assembled on a grid with the extension principle.
pub fn approx_generalized_centroid(input: &GeneralizedCentroidInput) -> Result<(FuzzyNumber, TrQuality)> {
    input.validate()?;
    let all = || input.z.iter().chain(&input.w);
    let gaussian = all().all(|f| matches!(shape_of(f), Shape::Gaussian) || is_singleton(f));
    let interval = all().all(|f| matches!(shape_of(f), Shape::Interval) || is_singleton(f));

    if gaussian && !interval {
        let g = |f: &FuzzyNumber| match f {
            FuzzyNumber::Parametric(MembershipFunction::Gaussian { mean, sigma }) => GaussianT1::new(*mean, *sigma),
            FuzzyNumber::Parametric(MembershipFunction::Singleton { point }) => GaussianT1::new(*point, 0.0),
            _ => unreachable!(),
        };
        let z: Vec<GaussianT1> = input.z.iter().map(g).collect();
        let w: Vec<GaussianT1> = input.w.iter().map(g).collect();
        let h: Vec<f64> = w.iter().map(|s| s.mean).collect();
        let (sh, sd) = weight_sums(&h, &w.iter().map(|s| s.sigma).collect::<Vec<_>>())?;
        let xi = z.iter().zip(&h).map(|(s, h)| s.mean * h).sum::<f64>() / sh;
        let mut sets = Vec::with_capacity(2 * z.len());
        let mut alphas = Vec::with_capacity(2 * z.len());
        for (zs, ws) in z.iter().zip(&w) {
            sets.push(GaussianT1::new(0.0, zs.sigma));
            alphas.push(ws.mean / sh);
        }
        for (zs, ws) in z.iter().zip(&w) {
            sets.push(GaussianT1::new(0.0, ws.sigma));
            alphas.push((zs.mean - xi) / sh);
        }
        let out = affine_combine_gaussian(&sets, &alphas, xi, input.inner)?;
        return Ok((out.to_mf().into(), TrQuality::new(sd / sh)));
    }

    let (z, w) = input.center_spread()?;
    let h: Vec<f64> = w.iter().map(|s| s.center).collect();
    let (sh, sd) = weight_sums(&h, &w.iter().map(|s| s.spread).collect::<Vec<_>>())?;
    let xi = z.iter().zip(&h).map(|(s, h)| s.center * h).sum::<f64>() / sh;
    let quality = TrQuality::new(sd / sh);

    if interval {
        let mut sets = Vec::with_capacity(2 * z.len());
        let mut alphas = Vec::with_capacity(2 * z.len());
        for (zs, hl) in z.iter().zip(&h) {
            sets.push(IntervalT1::new(0.0, zs.spread));
            alphas.push(hl / sh);
        }
        for (zs, ws) in z.iter().zip(&w) {
            sets.push(IntervalT1::new(0.0, ws.spread));
            alphas.push((zs.center - xi) / sh);
        }
        let out = affine_combine_interval(&sets, &alphas, xi)?;
        return Ok((out.into(), quality));
    }

    let mut acc: FuzzyNumber = MembershipFunction::singleton(xi).into();
    let terms = input
        .z
        .iter()
        .zip(&z)
        .zip(&h)
        .map(|((f, c), hl)| f.affine(1.0, -c.center).affine(hl / sh, 0.0))
        .chain(
            input
                .w
                .iter()
                .zip(&w)
                .zip(&z)
                .map(|((f, ws), zs)| f.affine(1.0, -ws.center).affine((zs.center - xi) / sh, 0.0)),
        );
    for t in terms {
        acc = extend_binary(&acc, &t, |a, b| a + b, input.inner, GridSpec::default())?;
    }
    Ok((acc, quality))
}

/// Interval form of the approximation: mean `xi`, spread
/// `kappa = sum(h_l s_l + |c_l - xi| delta_l) / sum h_l`.
pub fn approx_gc_interval(c: &[f64], s: &[f64], h: &[f64], delta: &[f64]) -> Result<(IntervalT1, TrQuality)> {
    check_len4(c.len(), s.len(), h.len(), delta.len())?;
    let (sh, sd) = weight_sums(h, delta)?;
    let xi = c.iter().zip(h).map(|(c, h)| c * h).sum::<f64>() / sh;
    let kappa = (0..c.len()).map(|l| h[l] * s[l] + (c[l] - xi).abs() * delta[l]).sum::<f64>() / sh;
    Ok((IntervalT1::new(xi, kappa), TrQuality::new(sd / sh)))
}

/// Gaussian form of the approximation. Mean `sum h m / sum h`; the spread is a
/// root-sum-square under the product t-norm and `k` times an absolute sum under
/// the minimum t-norm.
pub fn approx_gc_gaussian(
    m: &[f64],
    sigma: &[f64],
    h: &[f64],
    delta: &[f64],
    tnorm: TNorm,
    k: f64,
) -> Result<(GaussianT1, TrQuality)> {
    check_len4(m.len(), sigma.len(), h.len(), delta.len())?;
    let (sh, sd) = weight_sums(h, delta)?;
    let mean = m.iter().zip(h).map(|(m, h)| m * h).sum::<f64>() / sh;
    let spread = match tnorm {
        TNorm::Product => {
            (0..m.len()).map(|l| (h[l] * sigma[l]).powi(2) + ((m[l] - mean) * delta[l]).powi(2)).sum::<f64>().sqrt() / sh
        }
        TNorm::Minimum => k * (0..m.len()).map(|l| h[l] * sigma[l] + (m[l] - mean).abs() * delta[l]).sum::<f64>() / sh,
    };
    Ok((GaussianT1::new(mean, spread), TrQuality::new(sd / sh)))
}

/// Output of [`km_exact_interval`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KmResult {
    pub lower: f64,
    pub upper: f64,
    pub iterations_lower: usize,
    pub iterations_upper: usize,
}

impl KmResult {
    pub fn interval(&self) -> IntervalT1 {
        IntervalT1::from_bounds(self.lower, self.upper.max(self.lower))
    }

    pub fn center(&self) -> f64 {
        0.5 * (self.lower + self.upper)
    }
}

fn validate_km(c: &[f64], s: &[f64], h: &[f64], delta: &[f64]) -> Result<()> {
    check_len4(c.len(), s.len(), h.len(), delta.len())?;
    for l in 0..c.len() {
        let ok = c[l].is_finite() && s[l] >= 0.0 && s[l].is_finite() && delta[l] >= 0.0 && h[l] >= delta[l] && h[l].is_finite();
        if !ok {
            return Err(FuzzyError::InvalidWeights(format!(
                "term {l}: need s >= 0 and h >= delta >= 0, got c={}, s={}, h={}, delta={}",
                c[l], s[l], h[l], delta[l]
            )));
        }
    }
    Ok(())
}

/// One Karnik–Mendel pass over values `z` sorted ascending.
///
/// `maximize` selects the upper endpoint: low weights left of the switch point,
/// high weights to the right (mirrored for the lower endpoint). Values equal to
/// the current estimate belong to the left block. Returns the extremum and the
/// number of weighted averages computed after the initial guess.
pub(crate) fn km_pass(z: &[f64], h: &[f64], delta: &[f64], maximize: bool, mut trace: Option<&mut Vec<f64>>) -> (f64, usize) {
    let n = z.len();
    let avg = |k: usize| {
        let (mut num, mut den) = (0.0, 0.0);
        for l in 0..n {
            let left = l < k;
            let w = if left == maximize { h[l] - delta[l] } else { h[l] + delta[l] };
            num += w * z[l];
            den += w;
        }
        num / den
    };
    let (mut num, mut den) = (0.0, 0.0);
    for l in 0..n {
        num += h[l] * z[l];
        den += h[l];
    }
    let mut y = num / den;
    if let Some(t) = trace.as_deref_mut() {
        t.push(y);
    }
    if n == 1 {
        return (z[0], 0);
    }
    let mut prev: Option<usize> = None;
    let mut iterations = 0;
    loop {
        let mut k = z.partition_point(|&zl| zl <= y);
        // keep both blocks nonempty so the active weights never all vanish
        k = k.clamp(1, n - 1);
        if prev == Some(k) {
            return (y, iterations);
        }
        y = avg(k);
        iterations += 1;
        if let Some(t) = trace.as_deref_mut() {
            t.push(y);
        }
        prev = Some(k);
    }
}

fn km_sorted(c: &[f64], s: &[f64], h: &[f64], delta: &[f64], maximize: bool, trace: Option<&mut Vec<f64>>) -> (f64, usize) {
    let sign = if maximize { 1.0 } else { -1.0 };
    let mut order: Vec<usize> = (0..c.len()).filter(|&l| h[l] + delta[l] > 0.0).collect();
    let zval = |l: usize| c[l] + sign * s[l];
    order.sort_by(|&a, &b| zval(a).total_cmp(&zval(b)));
    let z: Vec<f64> = order.iter().map(|&l| zval(l)).collect();
    let hh: Vec<f64> = order.iter().map(|&l| h[l]).collect();
    let dd: Vec<f64> = order.iter().map(|&l| delta[l]).collect();
    km_pass(&z, &hh, &dd, maximize, trace)
}

/// Exact interval type reduction of `sum z_l w_l / sum w_l` with
/// `z_l in [c_l - s_l, c_l + s_l]` and `w_l in [h_l - delta_l, h_l + delta_l]`.
///
/// Inputs may be in any order; terms whose upper weight is zero are ignored.
pub fn km_exact_interval(c: &[f64], s: &[f64], h: &[f64], delta: &[f64]) -> Result<KmResult> {
    validate_km(c, s, h, delta)?;
    if !h.iter().zip(delta).any(|(h, d)| h + d > 0.0) {
        return Err(FuzzyError::NoRuleFired);
    }
    let (upper, iterations_upper) = km_sorted(c, s, h, delta, true, None);
    let (lower, iterations_lower) = km_sorted(c, s, h, delta, false, None);
    Ok(KmResult {
        lower,
        upper,
        iterations_lower,
        iterations_upper,
    })
}

/// Sequence of estimates produced by the upper-endpoint pass, starting with the
/// plain weighted average.
pub fn km_upper_trace(c: &[f64], s: &[f64], h: &[f64], delta: &[f64]) -> Result<Vec<f64>> {
    validate_km(c, s, h, delta)?;
    if !h.iter().zip(delta).any(|(h, d)| h + d > 0.0) {
        return Err(FuzzyError::NoRuleFired);
    }
    let mut trace = Vec::new();
    km_sorted(c, s, h, delta, true, Some(&mut trace));
    Ok(trace)
}

/// Endpoint enumeration over all `2^N` weight choices; the reference the
/// iterative algorithm is checked against.
pub fn km_bruteforce(c: &[f64], s: &[f64], h: &[f64], delta: &[f64]) -> Result<(f64, f64)> {
    validate_km(c, s, h, delta)?;
    let n = c.len();
    if n > 24 {
        return Err(FuzzyError::Config(format!("endpoint enumeration over {n} terms")));
    }
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for mask in 0u32..(1u32 << n) {
        let (mut nl, mut nu, mut den) = (0.0, 0.0, 0.0);
        for l in 0..n {
            let w = if mask >> l & 1 == 1 { h[l] + delta[l] } else { h[l] - delta[l] };
            nl += w * (c[l] - s[l]);
            nu += w * (c[l] + s[l]);
            den += w;
        }
        if den > 0.0 {
            lo = lo.min(nl / den);
            hi = hi.max(nu / den);
        }
    }
    if !lo.is_finite() {
        return Err(FuzzyError::NoRuleFired);
    }
    Ok((lo, hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::t1::{centroid_defuzz, linspace};
    use crate::t2::{GeneralT2Discrete, It2Set, SecondarySlice, DEFAULT_EMBEDDED_CAP};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn grid_of(f: &FuzzyNumber) -> (&[f64], &[f64]) {
        match f {
            FuzzyNumber::Grid { domain, grades } => (domain, grades),
            _ => panic!("expected grid output"),
        }
    }

    #[test]
    fn centroid_of_disguised_type1_set_is_crisp() {
        let domain = vec![0.0, 1.0, 2.0, 3.0];
        let grades = [0.2, 1.0, 0.6, 0.1];
        let set = GeneralT2Discrete::from_type1(domain.clone(), &grades).unwrap();
        let out = centroid_tr_bruteforce(&set, TNorm::Minimum, DEFAULT_EMBEDDED_CAP).unwrap();
        let (d, g) = grid_of(&out);
        assert_eq!(d.len(), 1);
        assert_eq!(g, &[1.0]);
        let t1 = centroid_defuzz(&FuzzyNumber::grid(domain, grades.to_vec()).unwrap()).unwrap();
        assert_abs_diff_eq!(d[0], t1, epsilon = 1e-15);
    }

    #[test]
    fn two_point_centroid_enumeration() {
        let s = || SecondarySlice::from_pairs([(0.5, 1.0), (1.0, 1.0)]).unwrap();
        let set = GeneralT2Discrete::new(vec![0.0, 1.0], vec![s(), s()]).unwrap();
        let out = centroid_tr_bruteforce(&set, TNorm::Minimum, DEFAULT_EMBEDDED_CAP).unwrap();
        let (d, g) = grid_of(&out);
        assert_eq!(d.len(), 3);
        assert_abs_diff_eq!(d[0], 1.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(d[1], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(d[2], 2.0 / 3.0, epsilon = 1e-15);
        assert!(g.iter().all(|&x| x == 1.0));
    }

    #[test]
    fn symmetric_fou_gives_symmetric_reduction() {
        let it2 = It2Set::uncertain_mean(1.9, 2.1, 0.6).unwrap();
        let x = linspace(0.0, 4.0, 9);
        let set = GeneralT2Discrete::from_it2(&it2, &x, 4).unwrap();
        let out = centroid_tr_bruteforce(&set, TNorm::Minimum, DEFAULT_EMBEDDED_CAP).unwrap();
        let (d, g) = grid_of(&out);
        let (lo, hi) = (d[0], d[d.len() - 1]);
        assert_abs_diff_eq!(lo + hi, 4.0, epsilon = 1e-9);
        assert!(g.iter().all(|&x| x == 1.0));
        // interval secondaries: the extremes coincide with the exact interval reduction
        let fou = set.fou();
        let h: Vec<f64> = fou.iter().map(|(l, u)| 0.5 * (l + u)).collect();
        let dl: Vec<f64> = fou.iter().map(|(l, u)| 0.5 * (u - l)).collect();
        let km = km_exact_interval(&x, &vec![0.0; x.len()], &h, &dl).unwrap();
        assert_abs_diff_eq!(km.lower, lo, epsilon = 1e-12);
        assert_abs_diff_eq!(km.upper, hi, epsilon = 1e-12);
    }

    #[test]
    fn product_centroid_rejected_for_large_domains() {
        let x = linspace(0.0, 1.0, 21);
        let set = GeneralT2Discrete::from_type1(x, &[0.5; 21]).unwrap();
        assert!(matches!(centroid_tr_bruteforce(&set, TNorm::Product, DEFAULT_EMBEDDED_CAP), Err(FuzzyError::Config(_))));
        assert!(centroid_tr_bruteforce(&set, TNorm::Minimum, DEFAULT_EMBEDDED_CAP).is_ok());
    }

    #[test]
    fn height_reduction_examples() {
        let crisp = |x: f64| -> FuzzyNumber { MembershipFunction::singleton(x).into() };
        let one = height_tr(
            &[(0.7, IntervalT1::new(0.6, 0.2).into()), (2.0, crisp(0.0)), (3.0, crisp(0.0))],
            TNorm::Minimum,
            5,
            DEFAULT_EMBEDDED_CAP,
        )
        .unwrap();
        assert_eq!(grid_of(&one), (&[0.7][..], &[1.0][..]));

        let all_crisp = height_tr(&[(0.0, crisp(0.3)), (1.0, crisp(0.9))], TNorm::Minimum, 5, DEFAULT_EMBEDDED_CAP).unwrap();
        assert_abs_diff_eq!(grid_of(&all_crisp).0[0], 0.9 / 1.2, epsilon = 1e-15);

        let d: FuzzyNumber = MembershipFunction::interval(0.4, 0.6).into();
        let out = height_tr(&[(0.0, d.clone()), (1.0, d)], TNorm::Minimum, 5, DEFAULT_EMBEDDED_CAP).unwrap();
        let (dom, _) = grid_of(&out);
        assert_abs_diff_eq!(dom[0], 0.4, epsilon = 1e-12);
        assert_abs_diff_eq!(*dom.last().unwrap(), 0.6, epsilon = 1e-12);
    }

    #[test]
    fn cos_single_rule_returns_its_consequent() {
        let c: FuzzyNumber = MembershipFunction::triangular(1.0, 1.5, 2.5).into();
        let input = GeneralizedCentroidInput::new(
            vec![c.clone(), MembershipFunction::interval(4.0, 5.0).into()],
            vec![MembershipFunction::triangular(0.2, 0.5, 0.8).into(), MembershipFunction::singleton(0.0).into()],
        );
        let out = cos_tr_bruteforce(&input, DEFAULT_EMBEDDED_CAP).unwrap();
        let expect = c.to_grid(DEFAULT_TR_LEVELS).unwrap();
        let (d, g) = grid_of(&out);
        let keep: Vec<(f64, f64)> = expect.iter().filter(|&(_, g)| g > 0.0).collect();
        assert_eq!(d.len(), keep.len());
        for ((x, gx), (y, gy)) in d.iter().zip(g).zip(keep) {
            assert_eq!(*x, y);
            assert_eq!(*gx, gy);
        }
    }

    #[test]
    fn cos_crisp_cases() {
        let crisp = |x: f64| -> FuzzyNumber { MembershipFunction::singleton(x).into() };
        let input = GeneralizedCentroidInput::new(vec![crisp(1.0), crisp(4.0)], vec![crisp(0.25), crisp(0.75)]);
        let out = cos_tr_bruteforce(&input, DEFAULT_EMBEDDED_CAP).unwrap();
        assert_eq!(grid_of(&out).0, &[3.25]);

        let input = GeneralizedCentroidInput::new(
            vec![IntervalT1::new(1.0, 0.5).into(), IntervalT1::new(3.0, 1.0).into()],
            vec![crisp(0.5), crisp(0.5)],
        );
        let out = cos_tr_bruteforce(&input, DEFAULT_EMBEDDED_CAP).unwrap();
        let (lo, hi) = out.support().unwrap();
        assert_abs_diff_eq!(lo, 1.25, epsilon = 1e-12);
        assert_abs_diff_eq!(hi, 2.75, epsilon = 1e-12);
        assert_abs_diff_eq!(centroid_defuzz(&out).unwrap(), 2.0, epsilon = 1e-12);
    }

    #[test]
    fn approx_exact_without_weight_uncertainty() {
        let crisp = |x: f64| -> FuzzyNumber { MembershipFunction::singleton(x).into() };
        let input = GeneralizedCentroidInput::new(
            vec![IntervalT1::new(1.0, 0.2).into(), IntervalT1::new(3.0, 0.4).into()],
            vec![crisp(1.0), crisp(3.0)],
        );
        let (out, q) = approx_generalized_centroid(&input).unwrap();
        assert_eq!(q.ratio, 0.0);
        assert!(!q.warning);
        assert_abs_diff_eq!(centroid_defuzz(&out).unwrap(), 2.5, epsilon = 1e-15);
        let bf = cos_tr_bruteforce(&input, DEFAULT_EMBEDDED_CAP).unwrap();
        let (a, b) = out.support().unwrap();
        let (c, d) = bf.support().unwrap();
        assert_abs_diff_eq!(a, c, epsilon = 1e-12);
        assert_abs_diff_eq!(b, d, epsilon = 1e-12);

        let input = GeneralizedCentroidInput::new(vec![crisp(1.0), crisp(2.0)], vec![crisp(1.0), crisp(3.0)]);
        let (out, _) = approx_generalized_centroid(&input).unwrap();
        assert_eq!(out, crisp(1.75));
        let zero = GeneralizedCentroidInput::new(vec![crisp(1.0)], vec![crisp(0.0)]);
        assert_eq!(approx_generalized_centroid(&zero), Err(FuzzyError::NoRuleFired));
    }

    #[test]
    fn approx_small_delta_matches_bruteforce_support() {
        let input = GeneralizedCentroidInput::new(
            vec![IntervalT1::new(1.0, 0.1).into(), IntervalT1::new(2.0, 0.2).into(), IntervalT1::new(4.0, 0.1).into()],
            vec![IntervalT1::new(0.8, 0.01).into(), IntervalT1::new(0.6, 0.02).into(), IntervalT1::new(0.4, 0.01).into()],
        );
        let (out, q) = approx_generalized_centroid(&input).unwrap();
        assert!(q.ratio <= 0.05);
        let bf = cos_tr_bruteforce(&input, DEFAULT_EMBEDDED_CAP).unwrap();
        let (a, b) = out.support().unwrap();
        let (c, d) = bf.support().unwrap();
        assert!(((a - c) / c).abs() < 0.03, "{a} vs {c}");
        assert!(((b - d) / d).abs() < 0.03, "{b} vs {d}");
    }

    #[test]
    fn approx_gc_interval_examples() {
        let (i, q) = approx_gc_interval(&[1.0, 2.0], &[0.0, 0.0], &[1.0, 1.0], &[0.0, 0.0]).unwrap();
        assert_eq!(i, IntervalT1::crisp(1.5));
        assert_eq!(q.ratio, 0.0);
        let (c, s, h, d) = ([1.0, 2.0, 3.0], [0.0; 3], [1.0; 3], [0.02; 3]);
        let (i, _) = approx_gc_interval(&c, &s, &h, &d).unwrap();
        assert_abs_diff_eq!(i.center, 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(i.spread, 0.04 / 3.0, epsilon = 1e-15);
        let km = km_exact_interval(&c, &s, &h, &d).unwrap();
        let half = 0.5 * (km.upper - km.lower);
        assert!((i.spread - half).abs() / half < 0.1);
        assert_eq!(approx_gc_interval(&c, &s, &[0.0; 3], &[0.0; 3]), Err(FuzzyError::NoRuleFired));
    }

    #[test]
    fn approx_gc_gaussian_examples() {
        let (g, _) = approx_gc_gaussian(&[1.0, 3.0], &[0.0, 0.0], &[1.0, 3.0], &[0.0, 0.0], TNorm::Product, 2.0).unwrap();
        assert_eq!(g, GaussianT1::new(2.5, 0.0));
        let args = ([0.0, 1.0], [0.1, 0.1], [1.0, 1.0], [0.0, 0.0]);
        let (g, _) = approx_gc_gaussian(&args.0, &args.1, &args.2, &args.3, TNorm::Product, DEFAULT_MIN_BRANCH_K).unwrap();
        assert_abs_diff_eq!(g.mean, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(g.sigma, 0.02f64.sqrt() / 2.0, epsilon = 1e-15);
        let (g, _) = approx_gc_gaussian(&args.0, &args.1, &args.2, &args.3, TNorm::Minimum, DEFAULT_MIN_BRANCH_K).unwrap();
        assert_abs_diff_eq!(g.sigma, 0.2, epsilon = 1e-15);
    }

    #[test]
    fn gaussian_generalized_centroid_matches_product_affine_rule() {
        // crisp weights: the product-branch spread must agree with the direct
        // affine combination and with a fine extension-principle grid
        let input = GeneralizedCentroidInput {
            z: vec![MembershipFunction::gaussian(0.0, 0.1).into(), MembershipFunction::gaussian(1.0, 0.1).into()],
            w: vec![MembershipFunction::singleton(1.0).into(), MembershipFunction::singleton(1.0).into()],
            inner: TNorm::Product,
            outer: TNorm::Product,
            levels: 5,
        };
        let (out, _) = approx_generalized_centroid(&input).unwrap();
        let (g, _) = approx_gc_gaussian(&[0.0, 1.0], &[0.1, 0.1], &[1.0, 1.0], &[0.0, 0.0], TNorm::Product, 2.0).unwrap();
        assert_eq!(out, FuzzyNumber::from(g));
        let half = |m: f64| FuzzyNumber::from(MembershipFunction::gaussian(m, 0.1)).affine(0.5, 0.0);
        let grid = extend_binary(&half(0.0), &half(1.0), |a, b| a + b, TNorm::Product, GridSpec::Step(0.05 / 200.0)).unwrap();
        let (d, gr) = grid_of(&grid);
        let mf = g.to_mf();
        let gap = d.iter().zip(gr).map(|(&x, &y)| (mf.eval(x) - y).abs()).fold(0.0, f64::max);
        assert!(gap < 1e-3, "gap {gap}");
    }

    #[test]
    fn km_examples() {
        let r = km_exact_interval(&[1.0, 2.0, 3.0], &[0.0; 3], &[1.0; 3], &[0.0; 3]).unwrap();
        assert_eq!((r.lower, r.upper), (2.0, 2.0));
        let r = km_exact_interval(&[1.0, 2.0, 3.0], &[0.0; 3], &[1.0; 3], &[0.2; 3]).unwrap();
        assert_abs_diff_eq!(r.upper, 15.0 / 7.0, epsilon = 1e-15);
        assert_abs_diff_eq!(r.lower, 13.0 / 7.0, epsilon = 1e-15);
        let (lo, hi) = km_bruteforce(&[1.0, 2.0, 3.0], &[0.0; 3], &[1.0; 3], &[0.2; 3]).unwrap();
        assert_abs_diff_eq!(lo, 13.0 / 7.0, epsilon = 1e-15);
        assert_abs_diff_eq!(hi, 15.0 / 7.0, epsilon = 1e-15);
        // stationarity: the maximizer's switch point sits at the optimum value
        let y = r.upper;
        assert!(2.0 <= y && y <= 3.0);
        assert_eq!(km_exact_interval(&[1.0], &[0.0], &[0.0], &[0.0]), Err(FuzzyError::NoRuleFired));
        assert!(km_exact_interval(&[1.0], &[0.0], &[0.1], &[0.2]).is_err());
    }

    #[test]
    fn km_single_term_returns_its_interval() {
        let r = km_exact_interval(&[2.0, 5.0], &[0.3, 1.0], &[0.5, 0.0], &[0.5, 0.0]).unwrap();
        assert_abs_diff_eq!(r.lower, 1.7, epsilon = 1e-15);
        assert_abs_diff_eq!(r.upper, 2.3, epsilon = 1e-15);
    }

    fn arb_instance(max_n: usize) -> impl Strategy<Value = (Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>)> {
        proptest::collection::vec((-10.0..10.0f64, 0.0..2.0f64, 0.01..1.0f64, 0.0..=1.0f64), 1..=max_n).prop_map(|v| {
            let c = v.iter().map(|t| t.0).collect();
            let s = v.iter().map(|t| t.1).collect();
            let h = v.iter().map(|t| t.2).collect();
            let d = v.iter().map(|t| t.2 * t.3).collect();
            (c, s, h, d)
        })
    }

    proptest! {
        #[test]
        fn km_matches_endpoint_enumeration((c, s, h, d) in arb_instance(10)) {
            let r = km_exact_interval(&c, &s, &h, &d).unwrap();
            let (lo, hi) = km_bruteforce(&c, &s, &h, &d).unwrap();
            let scale = 1.0 + lo.abs().max(hi.abs());
            prop_assert!((r.lower - lo).abs() <= 1e-12 * scale);
            prop_assert!((r.upper - hi).abs() <= 1e-12 * scale);
            prop_assert!(r.iterations_lower <= c.len() && r.iterations_upper <= c.len());
        }

        #[test]
        fn km_brackets_weighted_average_and_ascends((c, s, h, d) in arb_instance(12)) {
            let r = km_exact_interval(&c, &s, &h, &d).unwrap();
            let y = c.iter().zip(&h).map(|(c, h)| c * h).sum::<f64>() / h.iter().sum::<f64>();
            prop_assert!(r.lower <= y + 1e-12 && y <= r.upper + 1e-12);
            let trace = km_upper_trace(&c, &s, &h, &d).unwrap();
            prop_assert!(trace.windows(2).all(|w| w[1] >= w[0] - 1e-12));
        }

        #[test]
        fn reductions_are_permutation_invariant((c, s, h, d) in arb_instance(8), seed in 0usize..1000) {
            let n = c.len();
            let perm: Vec<usize> = (0..n).rev().map(|i| (i + seed) % n).collect();
            let p = |v: &Vec<f64>| perm.iter().map(|&i| v[i]).collect::<Vec<f64>>();
            let a = km_exact_interval(&c, &s, &h, &d).unwrap();
            let b = km_exact_interval(&p(&c), &p(&s), &p(&h), &p(&d)).unwrap();
            let tol = 1e-12 * (1.0 + a.lower.abs() + a.upper.abs());
            prop_assert!((a.lower - b.lower).abs() <= tol && (a.upper - b.upper).abs() <= tol);
            let (x, _) = approx_gc_interval(&c, &s, &h, &d).unwrap();
            let (y, _) = approx_gc_interval(&p(&c), &p(&s), &p(&h), &p(&d)).unwrap();
            prop_assert!((x.center - y.center).abs() <= tol && (x.spread - y.spread).abs() <= tol);
        }
    }
}
