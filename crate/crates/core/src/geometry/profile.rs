use alloc::format;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Flare profile of the connector ends, defined on `q ∈ [-2, 0]` with
/// `value(0) = 2` and `value(q) = 1` on `[-2, -1]`.
///
/// Samples are joined by a monotone piecewise-cubic Hermite interpolant
/// (Fritsch–Butland slopes, flat end slopes), so the interpolant never
/// overshoots the sample values and stays positive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<(f64, f64)>", into = "Vec<(f64, f64)>")]
pub struct BumpProfile {
    samples: Vec<(f64, f64)>,
    slopes: Vec<f64>,
}

impl Default for BumpProfile {
    /// Smoothstep flare: `1 + 3t² − 2t³` with `t = 1 + q` on `[-1, 0]`.
    fn default() -> Self {
        Self::new(alloc::vec![(-2.0, 1.0), (-1.0, 1.0), (0.0, 2.0)]).expect("default profile is valid")
    }
}

impl TryFrom<Vec<(f64, f64)>> for BumpProfile {
    type Error = Error;
    fn try_from(samples: Vec<(f64, f64)>) -> Result<Self> {
        Self::new(samples)
    }
}

impl From<BumpProfile> for Vec<(f64, f64)> {
    fn from(p: BumpProfile) -> Self {
        p.samples
    }
}

impl BumpProfile {
    pub fn new(samples: Vec<(f64, f64)>) -> Result<Self> {
        if samples.len() < 3 {
            return Err(Error::InvalidProfile("need at least the samples q = -2, -1, 0".into()));
        }
        if samples.iter().any(|(q, v)| !q.is_finite() || !v.is_finite()) {
            return Err(Error::InvalidProfile("non-finite sample".into()));
        }
        if samples.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::InvalidProfile("abscissae must be strictly increasing".into()));
        }
        if samples[0].0 != -2.0 || samples[samples.len() - 1].0 != 0.0 {
            return Err(Error::InvalidProfile("samples must span exactly [-2, 0]".into()));
        }
        if samples[samples.len() - 1].1 != 2.0 {
            return Err(Error::InvalidProfile("value(0) must equal 2".into()));
        }
        if !samples.iter().any(|&(q, _)| q == -1.0) {
            return Err(Error::InvalidProfile("a sample at q = -1 is required".into()));
        }
        if let Some(&(q, v)) = samples.iter().find(|&&(q, v)| q <= -1.0 && v != 1.0) {
            return Err(Error::InvalidProfile(format!("value({q}) = {v}, expected 1 on [-2, -1]")));
        }
        if let Some(&(q, v)) = samples.iter().find(|&&(_, v)| v <= 0.0) {
            return Err(Error::InvalidProfile(format!("value({q}) = {v} is not positive")));
        }
        let slopes = monotone_slopes(&samples);
        Ok(Self { samples, slopes })
    }

    pub fn samples(&self) -> &[(f64, f64)] {
        &self.samples
    }

    /// Interpolated value; `q` is clamped into `[-2, 0]`.
    pub fn value(&self, q: f64) -> f64 {
        let q = q.clamp(-2.0, 0.0);
        let n = self.samples.len();
        let k = match self.samples.iter().position(|&(qk, _)| qk >= q) {
            Some(0) => return self.samples[0].1,
            Some(k) => k - 1,
            None => n - 2,
        };
        let (q0, v0) = self.samples[k];
        let (q1, v1) = self.samples[k + 1];
        let (d0, d1) = (self.slopes[k], self.slopes[k + 1]);
        if v0 == v1 && d0 == 0.0 && d1 == 0.0 {
            return v0;
        }
        if q == q1 {
            return v1;
        }
        let h = q1 - q0;
        let t = (q - q0) / h;
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * v0 + h10 * h * d0 + h01 * v1 + h11 * h * d1
    }
}

fn monotone_slopes(samples: &[(f64, f64)]) -> Vec<f64> {
    let n = samples.len();
    let h: Vec<f64> = samples.windows(2).map(|w| w[1].0 - w[0].0).collect();
    let delta: Vec<f64> = samples.windows(2).zip(&h).map(|(w, &hk)| (w[1].1 - w[0].1) / hk).collect();
    let mut d = alloc::vec![0.0; n];
    for k in 1..n - 1 {
        let (a, b) = (delta[k - 1], delta[k]);
        if a * b > 0.0 {
            let w1 = 2.0 * h[k] + h[k - 1];
            let w2 = h[k] + 2.0 * h[k - 1];
            d[k] = (w1 + w2) / (w1 / a + w2 / b);
        }
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn default_endpoint_conditions() {
        let p = BumpProfile::default();
        assert_eq!(p.value(0.0), 2.0);
        for q in [-2.0, -1.7, -1.2, -1.0] {
            assert_eq!(p.value(q), 1.0);
        }
        // smoothstep at the midpoint of the flare
        assert!((p.value(-0.5) - 1.5).abs() < 1e-15);
        let t: f64 = 0.3;
        assert!((p.value(-0.7) - (1.0 + 3.0 * t * t - 2.0 * t * t * t)).abs() < 1e-14);
    }

    #[test]
    fn rejects_broken_profiles() {
        assert!(BumpProfile::new(vec![(-2.0, 1.0), (-1.0, 1.0), (0.0, 1.9)]).is_err());
        assert!(BumpProfile::new(vec![(-2.0, 1.0), (-1.5, 1.2), (-1.0, 1.0), (0.0, 2.0)]).is_err());
        assert!(BumpProfile::new(vec![(-2.0, 1.0), (-0.5, 1.5), (0.0, 2.0)]).is_err());
        assert!(BumpProfile::new(vec![(-2.0, 1.0), (-1.0, 1.0), (-0.5, -0.1), (0.0, 2.0)]).is_err());
    }

    proptest::proptest! {
        #[test]
        fn custom_profiles_stay_within_sample_range(
            mids in proptest::collection::vec(1.0f64..2.0, 1..6),
            q in -2.0f64..0.0,
        ) {
            let mut sorted = mids.clone();
            sorted.sort_by(f64::total_cmp);
            let mut samples = vec![(-2.0, 1.0), (-1.0, 1.0)];
            let n = sorted.len();
            for (i, v) in sorted.into_iter().enumerate() {
                samples.push((-1.0 + (i + 1) as f64 / (n + 1) as f64, v));
            }
            samples.push((0.0, 2.0));
            let p = BumpProfile::new(samples).unwrap();
            let v = p.value(q);
            proptest::prop_assert!((1.0 - 1e-12..=2.0 + 1e-12).contains(&v));
        }
    }
}
