//! The binormal score model with equal class variances.
//!
//! Scores are `N(nu, sigma²)` for positives and `N(mu, sigma²)` for
//! negatives, with `mu < nu` and positive prior `p`. Under these conditions
//! the posterior `P[A | X]` is strictly increasing in the score, so every
//! posterior-threshold classifier is a score threshold `{X > t}`.

mod normal;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optimize::bisect_boundary;

pub use normal::{std_normal_cdf, std_normal_pdf, std_normal_quantile, std_normal_sf};

/// Exponents beyond this are treated as saturated.
const EXP_CLAMP: f64 = 700.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinormalModel {
    mu: f64,
    nu: f64,
    sigma: f64,
    p: f64,
}

impl BinormalModel {
    pub fn new(mu: f64, nu: f64, sigma: f64, p: f64) -> Result<Self> {
        if !(mu.is_finite() && nu.is_finite() && sigma.is_finite() && p.is_finite()) {
            return Err(Error::InvalidModel("parameters must be finite".into()));
        }
        if sigma <= 0.0 {
            return Err(Error::InvalidModel(format!("sigma must be > 0, got {sigma}")));
        }
        if mu >= nu {
            return Err(Error::InvalidModel(format!(
                "negative-class mean must be below positive-class mean (mu={mu}, nu={nu})"
            )));
        }
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::InvalidModel(format!("prior p must lie in (0,1), got {p}")));
        }
        Ok(Self { mu, nu, sigma, p })
    }

    /// mu = 0, nu = 2, sigma = 1, p = 0.25.
    pub fn reference() -> Self {
        Self {
            mu: 0.0,
            nu: 2.0,
            sigma: 1.0,
            p: 0.25,
        }
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// Same class-conditional distributions, different positive prior.
    pub fn with_prior(&self, p: f64) -> Result<Self> {
        Self::new(self.mu, self.nu, self.sigma, p)
    }

    /// Slope of the posterior's logistic exponent, (mu − nu)/sigma² < 0.
    pub fn logit_slope(&self) -> f64 {
        (self.mu - self.nu) / (self.sigma * self.sigma)
    }

    /// Intercept of the posterior's logistic exponent.
    pub fn logit_intercept(&self) -> f64 {
        (self.nu * self.nu - self.mu * self.mu) / (2.0 * self.sigma * self.sigma)
            + ((1.0 - self.p) / self.p).ln()
    }

    fn z_pos(&self, x: f64) -> f64 {
        (x - self.nu) / self.sigma
    }

    fn z_neg(&self, x: f64) -> f64 {
        (x - self.mu) / self.sigma
    }

    /// P[X ≤ x] under the training mixture.
    pub fn mixture_cdf(&self, x: f64) -> f64 {
        self.p * std_normal_cdf(self.z_pos(x)) + (1.0 - self.p) * std_normal_cdf(self.z_neg(x))
    }

    /// P[X > x] under the training mixture, i.e. the predicted-positive mass
    /// of the threshold classifier at `x`.
    pub fn mixture_sf(&self, x: f64) -> f64 {
        self.p * std_normal_sf(self.z_pos(x)) + (1.0 - self.p) * std_normal_sf(self.z_neg(x))
    }

    /// Inverts [`mixture_cdf`](Self::mixture_cdf) at probability level `u`.
    pub fn mixture_quantile(&self, u: f64) -> Result<f64> {
        if !(u > 0.0 && u < 1.0) {
            return Err(Error::domain("probability level", u));
        }
        if u <= 0.5 {
            Ok(self.bisect(|x| self.mixture_cdf(x) < u))
        } else {
            Ok(self.bisect(|x| self.mixture_sf(x) > 1.0 - u))
        }
    }

    /// Threshold `t` with `P[X > t] = mass`.
    pub(crate) fn upper_quantile(&self, mass: f64) -> Result<f64> {
        if !(mass > 0.0 && mass < 1.0) {
            return Err(Error::domain("positive mass", mass));
        }
        if mass <= 0.5 {
            Ok(self.bisect(|x| self.mixture_sf(x) > mass))
        } else {
            Ok(self.bisect(|x| self.mixture_cdf(x) < 1.0 - mass))
        }
    }

    /// Bisection for the boundary of a predicate that is true to the left.
    fn bisect(&self, below: impl Fn(f64) -> bool) -> f64 {
        let mut half = 10.0 * self.sigma;
        let (mut lo, mut hi) = (self.mu - half, self.nu + half);
        while below(hi) || !below(lo) {
            half *= 2.0;
            lo = self.mu - half;
            hi = self.nu + half;
            if !half.is_finite() {
                break;
            }
        }
        bisect_boundary(below, lo, hi)
    }

    /// P[A | X = x] = 1 / (1 + exp(a·x + b)).
    pub fn posterior(&self, x: f64) -> f64 {
        let e = self.logit_slope() * x + self.logit_intercept();
        if e > EXP_CLAMP {
            0.0
        } else if e < -EXP_CLAMP {
            1.0
        } else {
            1.0 / (1.0 + e.exp())
        }
    }

    /// Density ratio f⁺(x) / f⁻(x).
    pub fn likelihood_ratio(&self, x: f64) -> f64 {
        let e = (x * (self.nu - self.mu) - 0.5 * (self.nu * self.nu - self.mu * self.mu))
            / (self.sigma * self.sigma);
        if e > EXP_CLAMP {
            f64::INFINITY
        } else if e < -EXP_CLAMP {
            0.0
        } else {
            e.exp()
        }
    }

    pub fn classifier_rates(&self, clf: ThresholdClassifier) -> Rates {
        let t = clf.threshold;
        Rates {
            tpr: std_normal_sf(self.z_pos(t)),
            fpr: std_normal_sf(self.z_neg(t)),
        }
    }

    /// Positive-class score density.
    pub fn density_pos(&self, x: f64) -> f64 {
        std_normal_pdf(self.z_pos(x)) / self.sigma
    }

    pub fn density_neg(&self, x: f64) -> f64 {
        std_normal_pdf(self.z_neg(x)) / self.sigma
    }
}

/// Predicts positive iff `score > threshold`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdClassifier {
    pub threshold: f64,
}

impl ThresholdClassifier {
    pub fn new(threshold: f64) -> Self {
        Self { threshold }
    }

    #[inline]
    pub fn predicts_positive(&self, score: f64) -> bool {
        score > self.threshold
    }
}

/// True- and false-positive rate of a classifier on the training population.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rates {
    pub tpr: f64,
    pub fpr: f64,
}

impl Rates {
    pub fn new(tpr: f64, fpr: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&tpr) {
            return Err(Error::domain("true positive rate", tpr));
        }
        if !(0.0..=1.0).contains(&fpr) {
            return Err(Error::domain("false positive rate", fpr));
        }
        Ok(Self { tpr, fpr })
    }

    pub fn fnr(&self) -> f64 {
        1.0 - self.tpr
    }
}
