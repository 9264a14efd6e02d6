use std::fmt;

use nalgebra::Vector3;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Signal-to-noise ratio in decibels; infinite means no noise. Serialized as a
/// number or the string `"inf"`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Snr(f64);

impl Snr {
    pub const INFINITE: Snr = Snr(f64::INFINITY);

    pub fn db(value: f64) -> Option<Snr> {
        (value > 0.0 && !value.is_nan()).then_some(Snr(value))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_infinite(self) -> bool {
        self.0.is_infinite()
    }

    /// Noise variance for a signal of mean-square `power`.
    pub fn noise_variance(self, power: f64) -> f64 {
        if self.is_infinite() {
            0.0
        } else {
            power / 10f64.powf(self.0 / 10.0)
        }
    }
}

impl fmt::Display for Snr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_infinite() {
            f.write_str("inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl std::str::FromStr for Snr {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("inf") || s == "∞" {
            return Ok(Snr::INFINITE);
        }
        let v: f64 = s.parse().map_err(|_| format!("bad SNR {s:?}"))?;
        Snr::db(v).ok_or_else(|| format!("SNR must be positive, got {v}"))
    }
}

impl Serialize for Snr {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for Snr {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Snr::db(v).ok_or_else(|| serde::de::Error::custom(format!("SNR must be positive, got {v}"))),
            Raw::Str(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub snr_db: Snr,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn none() -> Self {
        NoiseSpec {
            snr_db: Snr::INFINITE,
            seed: 0,
        }
    }
}

/// Seeded additive white gaussian noise.
#[derive(Debug, Clone)]
pub struct NoiseSource {
    snr: Snr,
    rng: ChaCha8Rng,
}

impl NoiseSource {
    pub fn new(spec: &NoiseSpec) -> Self {
        NoiseSource {
            snr: spec.snr_db,
            rng: ChaCha8Rng::seed_from_u64(spec.seed),
        }
    }

    pub fn snr(&self) -> Snr {
        self.snr
    }

    /// Adds zero-mean noise of variance `power / 10^(snr/10)` to each entry.
    /// An infinite SNR returns the input untouched and draws nothing.
    pub fn inject(&mut self, value: &Vector3<f64>, power: f64) -> Vector3<f64> {
        if self.snr.is_infinite() {
            return *value;
        }
        let sigma = self.snr.noise_variance(power).sqrt();
        value.map(|v| {
            let n: f64 = StandardNormal.sample(&mut self.rng);
            v + sigma * n
        })
    }
}

/// `rho` such that uncertain-mean labels span `m -/+ rho sigma`: `rho_10db` at
/// 10 dB, scaled by `10^(-(snr - 10)/20)`, zero without noise.
pub fn mean_uncertainty(snr: Snr, rho_10db: f64) -> f64 {
    if snr.is_infinite() {
        0.0
    } else {
        rho_10db * 10f64.powf(-(snr.value() - 10.0) / 20.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn infinite_snr_is_identity() {
        let mut n = NoiseSource::new(&NoiseSpec::none());
        let v = Vector3::new(1.0, -2.0, 3.0);
        assert_eq!(n.inject(&v, 5.0), v);
    }

    #[test]
    fn empirical_snr_matches() {
        for snr in [10.0, 15.0, 20.0] {
            let mut n = NoiseSource::new(&NoiseSpec { snr_db: Snr::db(snr).unwrap(), seed: 3 });
            let power = 2.5;
            let mut acc = 0.0;
            let count = 100_000 / 3 + 1;
            for _ in 0..count {
                acc += n.inject(&Vector3::zeros(), power).norm_squared();
            }
            let measured = 10.0 * (power / (acc / (3 * count) as f64)).log10();
            assert!((measured - snr).abs() <= 0.2, "{measured} vs {snr}");
        }
    }

    #[test]
    fn same_seed_same_stream() {
        let spec = NoiseSpec { snr_db: Snr::db(10.0).unwrap(), seed: 42 };
        let (mut a, mut b) = (NoiseSource::new(&spec), NoiseSource::new(&spec));
        for _ in 0..100 {
            let x = a.inject(&Vector3::zeros(), 1.0);
            let y = b.inject(&Vector3::zeros(), 1.0);
            assert_eq!(x.map(f64::to_bits), y.map(f64::to_bits));
        }
    }

    #[test]
    fn snr_serde() {
        assert_eq!(serde_json::to_string(&Snr::INFINITE).unwrap(), "\"inf\"");
        assert_eq!(serde_json::from_str::<Snr>("15").unwrap(), Snr::db(15.0).unwrap());
        assert_eq!(serde_json::from_str::<Snr>("\"inf\"").unwrap(), Snr::INFINITE);
        assert!(serde_json::from_str::<Snr>("-3").is_err());
    }

    #[test]
    fn uncertainty_scaling() {
        assert_eq!(mean_uncertainty(Snr::db(10.0).unwrap(), 0.25), 0.25);
        assert!((mean_uncertainty(Snr::db(30.0).unwrap(), 0.25) - 0.025).abs() < 1e-15);
        assert_eq!(mean_uncertainty(Snr::INFINITE, 0.25), 0.0);
    }
}
