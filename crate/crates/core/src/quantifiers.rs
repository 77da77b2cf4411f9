//! Optimal threshold classifiers on a binormal model, and the two
//! prevalence estimators built on top of them.
//!
//! Every classifier here has the shape `{X > t}`. Optimizing over
//! classifiers therefore reduces to a one-dimensional search, carried out
//! in terms of the predicted-positive mass `u = P[X > t]`.

use serde::{Deserialize, Serialize};

use crate::binormal::{BinormalModel, Rates, ThresholdClassifier};
use crate::error::{Error, Result};
use crate::metrics::{self, check_beta, ConfusionProbs, CostParams, QConfig};
use crate::optimize::{maximize, MaximizeOptions};

/// Smallest |TPR − FPR| for which the count adjustment is attempted.
pub const DEGENERATE_RATE_GAP: f64 = 1e-12;

/// Distance kept from the ends of the unit interval during searches over `u`.
const U_MARGIN: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizedClassifier {
    pub classifier: ThresholdClassifier,
    /// Predicted-positive mass P[X > t] on the training population.
    pub u_star: f64,
    pub objective_value: f64,
    pub rates: Rates,
}

impl OptimizedClassifier {
    fn at_threshold(model: &BinormalModel, threshold: f64, objective_value: f64) -> Self {
        let classifier = ThresholdClassifier::new(threshold);
        Self {
            classifier,
            u_star: model.mixture_sf(threshold),
            objective_value,
            rates: model.classifier_rates(classifier),
        }
    }

    pub fn threshold(&self) -> f64 {
        self.classifier.threshold
    }
}

/// Outcome of the cost-optimal rule. Zero costs on one side make the rule
/// trivial, which is reported explicitly instead of as an infinite cut.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum BayesDecision {
    Threshold(ThresholdClassifier),
    /// False positives are free (b = 0): predict positive everywhere.
    AllPositive,
    /// False negatives are free (a = 0): predict negative everywhere.
    AllNegative,
}

impl BayesDecision {
    pub fn rates(&self, model: &BinormalModel) -> Rates {
        match self {
            BayesDecision::Threshold(clf) => model.classifier_rates(*clf),
            BayesDecision::AllPositive => Rates { tpr: 1.0, fpr: 1.0 },
            BayesDecision::AllNegative => Rates { tpr: 0.0, fpr: 0.0 },
        }
    }
}

/// Cost-minimizing classifier `{posterior > b/(a+b)}`.
pub fn bayes_classifier(model: &BinormalModel, cost: CostParams) -> BayesDecision {
    if cost.fp_cost() == 0.0 {
        return BayesDecision::AllPositive;
    }
    if cost.fn_cost() == 0.0 {
        return BayesDecision::AllNegative;
    }
    let c = cost.posterior_cutoff();
    // posterior(t) = c  <=>  slope·t + intercept = ln((1 − c)/c)
    let t = (((1.0 - c) / c).ln() - model.logit_intercept()) / model.logit_slope();
    BayesDecision::Threshold(ThresholdClassifier::new(t))
}

/// Threshold whose predicted-positive mass P[X > t] equals `u`.
pub fn threshold_for_positive_mass(model: &BinormalModel, u: f64) -> Result<ThresholdClassifier> {
    model.upper_quantile(u).map(ThresholdClassifier::new)
}

/// Classifier with FPR = FNR; for equal variances the cut is the midpoint
/// of the two class means.
pub fn minimax_classifier(model: &BinormalModel) -> OptimizedClassifier {
    let t = 0.5 * (model.mu() + model.nu());
    let rates = model.classifier_rates(ThresholdClassifier::new(t));
    OptimizedClassifier::at_threshold(model, t, metrics::error_bound(rates))
}

/// Calibrated classifier with P[X > t] = p. Its Classify & Count estimate
/// is exact when the target prior equals the training prior.
pub fn locally_best_classifier(model: &BinormalModel) -> OptimizedClassifier {
    let t = model
        .upper_quantile(model.p())
        .expect("training prior lies in (0,1) by construction");
    let rates = model.classifier_rates(ThresholdClassifier::new(t));
    OptimizedClassifier::at_threshold(model, t, metrics::error_bound(rates))
}

/// TPR of the threshold classifier with predicted-positive mass `u`.
fn tpr_at_mass(model: &BinormalModel, u: f64) -> f64 {
    if u <= 0.0 {
        return 0.0;
    }
    if u >= 1.0 {
        return 1.0;
    }
    let t = model.upper_quantile(u).expect("u checked to be in (0,1)");
    model.classifier_rates(ThresholdClassifier::new(t)).tpr
}

/// Q_β of `{X > q_{1−u}(X)}` as a function of the predicted-positive mass.
pub fn q_measure_at_mass(model: &BinormalModel, config: QConfig, u: f64) -> f64 {
    if u <= 0.0 || u >= 1.0 {
        return 0.0;
    }
    let nas = config
        .nas(u, model.p())
        .expect("model prior lies in (0,1)");
    metrics::q_beta(tpr_at_mass(model, u), nas, config.beta())
}

/// F_β of `{X > q_{1−u}(X)}` as a function of the predicted-positive mass.
pub fn f_measure_at_mass(model: &BinormalModel, beta: f64, u: f64) -> f64 {
    let probs = ConfusionProbs {
        p_pos_and_pred: model.p() * tpr_at_mass(model, u),
        p_neg_and_pred: 0.0,
        p_pos: model.p(),
        p_pred: u.clamp(0.0, 1.0),
    };
    metrics::f_beta(&probs, beta)
}

/// Q_β-optimal threshold classifier. The search runs over u ∈ [p, 1), where
/// Q_β attains its supremum; the kink at u = p is always evaluated exactly.
pub fn q_optimal_classifier(model: &BinormalModel, config: QConfig) -> OptimizedClassifier {
    let p = model.p();
    let best = maximize(
        |u| q_measure_at_mass(model, config, u),
        p,
        1.0 - U_MARGIN,
        &[p],
        MaximizeOptions::default(),
    );
    let t = model
        .upper_quantile(best.x)
        .expect("search interval lies inside (0,1)");
    let mut out = OptimizedClassifier::at_threshold(model, t, best.value);
    out.u_star = best.x;
    out
}

/// F_β-optimal threshold classifier over all predicted-positive masses.
pub fn f_optimal_classifier(model: &BinormalModel, beta: f64) -> Result<OptimizedClassifier> {
    check_beta(beta)?;
    let best = maximize(
        |u| f_measure_at_mass(model, beta, u),
        U_MARGIN,
        1.0 - U_MARGIN,
        &[],
        MaximizeOptions::default(),
    );
    let t = model
        .upper_quantile(best.x)
        .expect("search interval lies inside (0,1)");
    let mut out = OptimizedClassifier::at_threshold(model, t, best.value);
    out.u_star = best.x;
    Ok(out)
}

/// Classify & Count estimate, P₁[H], for a target population with prior `w_true`.
pub fn classify_and_count(rates: Rates, w_true: f64) -> f64 {
    metrics::shifted_prevalence(rates, w_true)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantificationEstimate {
    /// Classify & Count: the predicted-positive fraction.
    pub cc: f64,
    /// Adjusted Count before clamping; can leave [0, 1].
    pub ac: f64,
    pub ac_clamped: f64,
}

/// Adjusted Count (confusion matrix method): (P₁[H] − FPR) / (TPR − FPR).
pub fn adjusted_count(p1_h: f64, rates: Rates) -> Result<QuantificationEstimate> {
    if !(0.0..=1.0).contains(&p1_h) {
        return Err(Error::domain("predicted-positive fraction", p1_h));
    }
    let gap = rates.tpr - rates.fpr;
    if gap.abs() < DEGENERATE_RATE_GAP {
        return Err(Error::DegenerateClassifier { diff: gap });
    }
    let ac = (p1_h - rates.fpr) / gap;
    Ok(QuantificationEstimate {
        cc: p1_h,
        ac,
        ac_clamped: ac.clamp(0.0, 1.0),
    })
}
