//! Parametric multi-modal normal mixture densities.
//!
//! The bimodal normal mixture
//!
//! ```text
//! f(y) = alpha phi(y; mu1, sigma1^2) + (1 - alpha) phi(y; mu2, sigma2^2)
//! ```
//!
//! is the marginal law targeted by the quantile transform. The mixture
//! may carry two or three components (the construction extends to any
//! multi-modal target); the inference layer works with the bimodal
//! case and its five-dimensional parameter gradient.

use crate::error::{Error, Result};
use crate::math::normal;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixtureComponent {
    pub weight: f64,
    pub mean: f64,
    pub sd: f64,
}

/// A finite normal mixture with strictly positive weights summing to
/// one and strictly positive component scales.
#[derive(Clone, Debug, PartialEq)]
pub struct MixtureDensity {
    components: Vec<MixtureComponent>,
}

impl MixtureDensity {
    pub fn new(components: Vec<MixtureComponent>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::Invalid("mixture needs at least one component".into()));
        }
        let mut total = 0.0;
        for (i, c) in components.iter().enumerate() {
            if !(c.weight > 0.0 && c.weight < 1.0) && components.len() > 1 {
                return Err(Error::Invalid(format!(
                    "component {i} weight {} outside (0,1)",
                    c.weight
                )));
            }
            if components.len() == 1 && (c.weight - 1.0).abs() > 1e-12 {
                return Err(Error::Invalid("single component must have weight 1".into()));
            }
            if !(c.sd > 0.0) || !c.sd.is_finite() {
                return Err(Error::Invalid(format!("component {i} sd {} not positive", c.sd)));
            }
            if !c.mean.is_finite() {
                return Err(Error::Invalid(format!("component {i} mean not finite")));
            }
            total += c.weight;
        }
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::Invalid(format!("weights sum to {total}, expected 1")));
        }
        Ok(Self { components })
    }

    /// Two-component mixture with weight `alpha` on the first component.
    pub fn bimodal(alpha: f64, mu1: f64, sigma1: f64, mu2: f64, sigma2: f64) -> Result<Self> {
        Self::new(vec![
            MixtureComponent { weight: alpha, mean: mu1, sd: sigma1 },
            MixtureComponent { weight: 1.0 - alpha, mean: mu2, sd: sigma2 },
        ])
    }

    /// Standard normal as a (degenerate) two-component mixture; handy
    /// as the identity target of the transform.
    pub fn standard_normal() -> Self {
        Self::bimodal(0.5, 0.0, 1.0, 0.0, 1.0).unwrap()
    }

    pub fn components(&self) -> &[MixtureComponent] {
        &self.components
    }

    pub fn n_components(&self) -> usize {
        self.components.len()
    }

    pub fn pdf(&self, y: f64) -> f64 {
        assert!(y.is_finite(), "pdf at non-finite point");
        self.components
            .iter()
            .map(|c| c.weight * normal::pdf((y - c.mean) / c.sd) / c.sd)
            .sum()
    }

    /// log f(y) via log-sum-exp; stable far into the tails where the
    /// plain pdf underflows.
    pub fn log_pdf(&self, y: f64) -> f64 {
        let logs: Vec<f64> = self
            .components
            .iter()
            .map(|c| c.weight.ln() + normal::log_pdf((y - c.mean) / c.sd) - c.sd.ln())
            .collect();
        let m = logs.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
        m + logs.iter().map(|l| (l - m).exp()).sum::<f64>().ln()
    }

    /// f'(y).
    pub fn pdf_deriv(&self, y: f64) -> f64 {
        self.components
            .iter()
            .map(|c| {
                let z = (y - c.mean) / c.sd;
                -c.weight * z / (c.sd * c.sd) * normal::pdf(z)
            })
            .sum()
    }

    pub fn cdf(&self, y: f64) -> f64 {
        self.components
            .iter()
            .map(|c| c.weight * normal::cdf((y - c.mean) / c.sd))
            .sum()
    }

    /// Upper tail 1 - F(y) without cancellation.
    pub fn sf(&self, y: f64) -> f64 {
        self.components
            .iter()
            .map(|c| c.weight * normal::sf((y - c.mean) / c.sd))
            .sum()
    }

    /// Quantile F^{-1}(p) by a safeguarded Newton iteration bracketed
    /// by the extreme component quantiles.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::OutOfRange(format!("quantile probability {p} outside (0,1)")));
        }
        let z = normal::quantile(p);
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for c in &self.components {
            lo = lo.min(c.mean + c.sd * z);
            hi = hi.max(c.mean + c.sd * z);
        }
        if hi - lo < 1e-300 {
            return Ok(lo);
        }
        let scale = 1.0 + lo.abs().max(hi.abs());
        let mut y = 0.5 * (lo + hi);
        for _ in 0..200 {
            let err = self.cdf(y) - p;
            if err > 0.0 {
                hi = y;
            } else {
                lo = y;
            }
            let f = self.pdf(y);
            let mut next = if f > 1e-300 { y - err / f } else { f64::NAN };
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - y).abs() < 1e-15 * scale {
                return Ok(next);
            }
            y = next;
            if hi - lo < 1e-15 * scale {
                break;
            }
        }
        Ok(y)
    }

    /// The five partial derivatives of F(y) with respect to
    /// (alpha, mu1, sigma1, mu2, sigma2); bimodal mixtures only.
    pub fn grad_cdf_params(&self, y: f64) -> [f64; 5] {
        assert_eq!(self.components.len(), 2, "parameter gradient requires a bimodal mixture");
        let c1 = self.components[0];
        let c2 = self.components[1];
        let z1 = (y - c1.mean) / c1.sd;
        let z2 = (y - c2.mean) / c2.sd;
        let phi1 = normal::pdf(z1);
        let phi2 = normal::pdf(z2);
        [
            normal::cdf(z1) - normal::cdf(z2),
            -c1.weight / c1.sd * phi1,
            -c1.weight * z1 / c1.sd * phi1,
            -c2.weight / c2.sd * phi2,
            -c2.weight * z2 / c2.sd * phi2,
        ]
    }

    /// Raw moment E[Y^k]; mixture moments are the weighted component
    /// moments.
    pub fn raw_moment(&self, k: usize) -> f64 {
        self.components
            .iter()
            .map(|c| {
                c.weight * crate::math::poly::normal_raw_moments(k, c.mean, c.sd * c.sd)[k]
            })
            .sum()
    }

    pub fn mean(&self) -> f64 {
        self.components.iter().map(|c| c.weight * c.mean).sum()
    }

    /// Mixture variance: weighted component variances plus the
    /// between-component spread. For two components this is
    /// a var1 + (1-a) var2 + a (1-a) (mu1 - mu2)^2.
    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.components
            .iter()
            .map(|c| c.weight * (c.sd * c.sd + (c.mean - m) * (c.mean - m)))
            .sum()
    }

    /// Range that carries all but ~1e-14 of the mass; used as the
    /// default domain for quadrature and mode scans.
    pub fn support_hint(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for c in &self.components {
            lo = lo.min(c.mean - 8.5 * c.sd);
            hi = hi.max(c.mean + 8.5 * c.sd);
        }
        (lo, hi)
    }

    /// Locations of the local maxima of the density, by a 10^4-point
    /// grid scan over +-8 pooled sd around the component means followed
    /// by golden-section refinement. Modes of the mixture need not sit
    /// at the component means when the components overlap, and the
    /// mixture may have fewer modes than components.
    pub fn modes(&self) -> Vec<f64> {
        let max_sd = self.components.iter().map(|c| c.sd).fold(0.0, f64::max);
        let lo = self.components.iter().map(|c| c.mean).fold(f64::INFINITY, f64::min) - 8.0 * max_sd;
        let hi = self.components.iter().map(|c| c.mean).fold(f64::NEG_INFINITY, f64::max) + 8.0 * max_sd;
        let n = 10_000;
        let h = (hi - lo) / n as f64;
        let vals: Vec<f64> = (0..=n).map(|i| self.pdf(lo + i as f64 * h)).collect();
        let mut out = Vec::new();
        for i in 1..n {
            if vals[i] > vals[i - 1] && vals[i] >= vals[i + 1] {
                let a = lo + (i - 1) as f64 * h;
                let b = lo + (i + 1) as f64 * h;
                let (m, _) = crate::math::optim::brent_min(|x| -self.pdf(x), a, b, 1e-12, 200);
                if out.last().map_or(true, |&prev: &f64| (m - prev).abs() > 10.0 * h) {
                    out.push(m);
                }
            }
        }
        out
    }

    /// Component means, ordered; the case-study convention locates the
    /// regimes at the fitted means rather than at the numeric modes.
    pub fn component_means(&self) -> Vec<f64> {
        let mut m: Vec<f64> = self.components.iter().map(|c| c.mean).collect();
        m.sort_by(|a, b| a.partial_cmp(b).unwrap());
        m
    }
}

// JSON forms: `{alpha, mu1, sigma1, mu2, sigma2}` for the bimodal case
// or `{components: [{weight, mean, sd}, ...]}` in general.
#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum MixtureJson {
    Bimodal { alpha: f64, mu1: f64, sigma1: f64, mu2: f64, sigma2: f64 },
    General { components: Vec<MixtureComponent> },
}

impl Serialize for MixtureDensity {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.components.len() == 2 {
            MixtureJson::Bimodal {
                alpha: self.components[0].weight,
                mu1: self.components[0].mean,
                sigma1: self.components[0].sd,
                mu2: self.components[1].mean,
                sigma2: self.components[1].sd,
            }
            .serialize(s)
        } else {
            MixtureJson::General { components: self.components.clone() }.serialize(s)
        }
    }
}

impl<'de> Deserialize<'de> for MixtureDensity {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = MixtureJson::deserialize(d)?;
        let built = match raw {
            MixtureJson::Bimodal { alpha, mu1, sigma1, mu2, sigma2 } => {
                MixtureDensity::bimodal(alpha, mu1, sigma1, mu2, sigma2)
            }
            MixtureJson::General { components } => MixtureDensity::new(components),
        };
        built.map_err(serde::de::Error::custom)
    }
}


#[cfg(test)]
mod prop_tests {
    use super::*;
    use proptest::prelude::*;

    fn arb_bimodal() -> impl Strategy<Value = MixtureDensity> {
        (
            0.05f64..0.95,
            -5.0f64..5.0,
            0.2f64..3.0,
            -5.0f64..5.0,
            0.2f64..3.0,
        )
            .prop_map(|(a, m1, s1, m2, s2)| MixtureDensity::bimodal(a, m1, s1, m2, s2).unwrap())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn quantile_cdf_round_trip(d in arb_bimodal(), p in 0.001f64..0.999) {
            let q = d.quantile(p).unwrap();
            prop_assert!((d.cdf(q) - p).abs() < 1e-10);
        }

        #[test]
        fn pdf_positive_cdf_bounded(d in arb_bimodal(), y in -20.0f64..20.0) {
            prop_assert!(d.pdf(y) > 0.0);
            let c = d.cdf(y);
            prop_assert!((0.0..=1.0).contains(&c));
        }
    }
}
