//! Classification and quantification measures on probabilities.
//!
//! Everything here works on (joint) probabilities, never raw counts.
//! Sample-based callers turn counts into relative frequencies first.

use serde::{Deserialize, Serialize};

use crate::binormal::Rates;
use crate::error::{Error, Result};

/// Misclassification costs: `fn_cost` per false negative, `fp_cost` per false positive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostParams {
    fn_cost: f64,
    fp_cost: f64,
}

impl CostParams {
    pub fn new(fn_cost: f64, fp_cost: f64) -> Result<Self> {
        if !(fn_cost >= 0.0 && fn_cost.is_finite()) {
            return Err(Error::domain("false-negative cost", fn_cost));
        }
        if !(fp_cost >= 0.0 && fp_cost.is_finite()) {
            return Err(Error::domain("false-positive cost", fp_cost));
        }
        if fn_cost + fp_cost <= 0.0 {
            return Err(Error::domain("total cost", fn_cost + fp_cost));
        }
        Ok(Self { fn_cost, fp_cost })
    }

    pub fn fn_cost(&self) -> f64 {
        self.fn_cost
    }

    pub fn fp_cost(&self) -> f64 {
        self.fp_cost
    }

    /// Posterior level b/(a+b) at which the Bayes classifier cuts.
    pub fn posterior_cutoff(&self) -> f64 {
        self.fp_cost / (self.fn_cost + self.fp_cost)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum NasVariant {
    Nas,
    #[default]
    NasStar,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QConfig {
    beta: f64,
    pub nas_variant: NasVariant,
}

impl QConfig {
    pub fn new(beta: f64, nas_variant: NasVariant) -> Result<Self> {
        check_beta(beta)?;
        Ok(Self { beta, nas_variant })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn nas(&self, p_pred: f64, p_pos: f64) -> Result<f64> {
        match self.nas_variant {
            NasVariant::Nas => nas(p_pred, p_pos),
            NasVariant::NasStar => nas_star(p_pred, p_pos),
        }
    }
}

pub(crate) fn check_beta(beta: f64) -> Result<()> {
    if beta > 0.0 && beta.is_finite() {
        Ok(())
    } else {
        Err(Error::domain("beta", beta))
    }
}

/// Joint probabilities of a classifier `H` against the positive class `A`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfusionProbs {
    /// P[H ∩ A]
    pub p_pos_and_pred: f64,
    /// P[H ∩ Aᶜ]
    pub p_neg_and_pred: f64,
    /// P[A]
    pub p_pos: f64,
    /// P[H]
    pub p_pred: f64,
}

impl ConfusionProbs {
    /// Builds the joint masses from a class prior and the two rates.
    pub fn from_rates(p_pos: f64, rates: Rates) -> Self {
        let p_pos_and_pred = p_pos * rates.tpr;
        let p_neg_and_pred = (1.0 - p_pos) * rates.fpr;
        Self {
            p_pos_and_pred,
            p_neg_and_pred,
            p_pos,
            p_pred: p_pos_and_pred + p_neg_and_pred,
        }
    }

    /// Validates the carrier invariants up to `tol`.
    pub fn check(&self, tol: f64) -> Result<()> {
        let all = [self.p_pos_and_pred, self.p_neg_and_pred, self.p_pos, self.p_pred];
        if all.iter().any(|v| !(-tol..=1.0 + tol).contains(v)) {
            return Err(Error::InvalidPopulation(format!("probability out of range: {self:?}")));
        }
        if self.p_pos_and_pred > self.p_pos.min(self.p_pred) + tol
            || (self.p_pos_and_pred + self.p_neg_and_pred - self.p_pred).abs() > tol
        {
            return Err(Error::InvalidPopulation(format!("inconsistent joint masses: {self:?}")));
        }
        Ok(())
    }

    pub fn tpr(&self) -> f64 {
        self.p_pos_and_pred / self.p_pos
    }

    pub fn fpr(&self) -> f64 {
        self.p_neg_and_pred / (1.0 - self.p_pos)
    }
}

/// Expected cost a·P[Hᶜ ∩ A] + b·P[H ∩ Aᶜ].
pub fn misclassification_cost(cost: CostParams, probs: &ConfusionProbs) -> f64 {
    cost.fn_cost * (probs.p_pos - probs.p_pos_and_pred) + cost.fp_cost * probs.p_neg_and_pred
}

fn check_prevalence(p_pos: f64) -> Result<()> {
    if p_pos > 0.0 && p_pos < 1.0 {
        Ok(())
    } else {
        Err(Error::domain("class prevalence", p_pos))
    }
}

/// Normalized absolute score, 1 − |P[H] − P[A]| / max(P[A], 1 − P[A]).
pub fn nas(p_pred: f64, p_pos: f64) -> Result<f64> {
    check_prevalence(p_pos)?;
    Ok(1.0 - (p_pred - p_pos).abs() / p_pos.max(1.0 - p_pos))
}

/// Range-normalized NAS: 1 at calibration, 0 exactly at P[H] ∈ {0, 1}.
pub fn nas_star(p_pred: f64, p_pos: f64) -> Result<f64> {
    check_prevalence(p_pos)?;
    Ok(1.0 - (p_pred - p_pos).max(0.0) / (1.0 - p_pos) - (p_pos - p_pred).max(0.0) / p_pos)
}

/// F_β = (1 + β²)·P[H∩A] / (β²·P[A] + P[H]); zero when nothing is predicted positive.
pub fn f_beta(probs: &ConfusionProbs, beta: f64) -> f64 {
    if probs.p_pred <= 0.0 {
        return 0.0;
    }
    let b2 = beta * beta;
    (1.0 + b2) * probs.p_pos_and_pred / (b2 * probs.p_pos + probs.p_pred)
}

/// Weighted harmonic mean of TPR and a NAS value; zero if either argument is.
pub fn q_beta(tpr: f64, nas_value: f64, beta: f64) -> f64 {
    if tpr <= 0.0 || nas_value <= 0.0 {
        return 0.0;
    }
    let b2 = beta * beta;
    (1.0 + b2) * tpr * nas_value / (b2 * tpr + nas_value)
}

/// Predicted-positive mass on a target population with positive prior `w`,
/// assuming the class-conditional score laws did not change.
pub fn shifted_prevalence(rates: Rates, w: f64) -> f64 {
    w * (rates.tpr - rates.fpr) + rates.fpr
}

/// Absolute error of Classify & Count at target prevalence `w`.
pub fn prediction_error(rates: Rates, w: f64) -> f64 {
    (w - shifted_prevalence(rates, w)).abs()
}

/// The V-shaped form of [`prediction_error`]: a decreasing line up to the
/// zero at [`error_breakpoint`], an increasing line after it.
pub fn prediction_error_piecewise(rates: Rates, w: f64) -> f64 {
    let Rates { tpr, fpr } = rates;
    if w <= error_breakpoint(rates) {
        w * (tpr - fpr - 1.0) + fpr
    } else {
        w * (1.0 - tpr + fpr) - fpr
    }
}

/// The target prevalence at which Classify & Count is exact,
/// FPR / (FPR + 1 − TPR). Returns NaN for a perfect classifier, whose
/// error is identically zero.
pub fn error_breakpoint(rates: Rates) -> f64 {
    rates.fpr / (rates.fpr + 1.0 - rates.tpr)
}

/// max(FPR, FNR), the worst-case Classify & Count error over all target priors.
pub fn error_bound(rates: Rates) -> f64 {
    rates.fpr.max(1.0 - rates.tpr)
}
