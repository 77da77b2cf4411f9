//! Curve tables behind the two figures and the optimizer summary.
//!
//! Every table carries a one-line parameter comment so written CSV files
//! are self-describing.

use std::fmt::Write as _;
use std::io::Write;

use crate::binormal::BinormalModel;
use crate::error::Result;
use crate::metrics::{self, check_beta, ConfusionProbs, CostParams, NasVariant, QConfig};
use crate::quantifiers::{self, BayesDecision, OptimizedClassifier};

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub comment: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "# {}", self.comment)?;
        writeln!(out, "{}", self.columns.join(","))?;
        let mut line = String::new();
        for row in &self.rows {
            line.clear();
            for (i, v) in row.iter().enumerate() {
                if i > 0 {
                    line.push(',');
                }
                write!(line, "{v}").expect("writing to a String");
            }
            writeln!(out, "{line}")?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("in-memory write");
        String::from_utf8(buf).expect("CSV output is UTF-8")
    }
}

pub fn nas_name(v: NasVariant) -> &'static str {
    match v {
        NasVariant::Nas => "nas",
        NasVariant::NasStar => "nas-star",
    }
}

fn model_desc(m: &BinormalModel) -> String {
    format!("mu={} nu={} sigma={} p={}", m.mu(), m.nu(), m.sigma(), m.p())
}

fn beta_list(betas: &[f64]) -> String {
    betas.iter().map(|b| b.to_string()).collect::<Vec<_>>().join(";")
}

/// `points` evenly spaced values on [0, 1] (endpoints included), with each
/// value of `pinned` inserted exactly if the grid misses it.
pub fn unit_grid(points: usize, pinned: &[f64]) -> Vec<f64> {
    let points = points.max(2);
    let last = (points - 1) as f64;
    let mut g: Vec<f64> = (0..points).map(|i| i as f64 / last).collect();
    for &x in pinned {
        if (0.0..=1.0).contains(&x) && !g.contains(&x) {
            g.push(x);
        }
    }
    g.sort_by(f64::total_cmp);
    g
}

/// u ↦ Q_β({X > q_{1−u}(X)}) for each β, on a grid over the unit interval
/// that always contains u = p.
pub fn q_curve(model: &BinormalModel, betas: &[f64], nas: NasVariant, grid: usize) -> Result<Table> {
    let configs = betas
        .iter()
        .map(|&b| QConfig::new(b, nas))
        .collect::<Result<Vec<_>>>()?;
    let us = unit_grid(grid, &[model.p()]);
    let mut columns = vec!["u".to_string()];
    columns.extend(betas.iter().map(|b| format!("Q_beta={b}")));
    let rows = us
        .iter()
        .map(|&u| {
            let mut row = vec![u];
            row.extend(configs.iter().map(|&c| quantifiers::q_measure_at_mass(model, c, u)));
            row
        })
        .collect();
    Ok(Table {
        comment: format!(
            "figure-qcurve {} beta={} nas={} grid={}",
            model_desc(model),
            beta_list(betas),
            nas_name(nas),
            grid
        ),
        columns,
        rows,
    })
}

/// Absolute Classify & Count error as a function of the target prior `w`,
/// for the Q-optimal, minimax and locally best classifiers.
pub fn error_curve(model: &BinormalModel, beta: f64, nas: NasVariant, grid: usize) -> Result<Table> {
    let qopt = quantifiers::q_optimal_classifier(model, QConfig::new(beta, nas)?);
    let minimax = quantifiers::minimax_classifier(model);
    let local = quantifiers::locally_best_classifier(model);
    let ws = unit_grid(grid, &[model.p(), 0.5]);
    let rows = ws
        .iter()
        .map(|&w| {
            vec![
                w,
                metrics::prediction_error(qopt.rates, w),
                metrics::prediction_error(minimax.rates, w),
                metrics::prediction_error(local.rates, w),
            ]
        })
        .collect();
    Ok(Table {
        comment: format!(
            "figure-error {} beta={} nas={} grid={} qopt_threshold={} minimax_threshold={} locallybest_threshold={}",
            model_desc(model),
            beta,
            nas_name(nas),
            grid,
            qopt.threshold(),
            minimax.threshold(),
            local.threshold()
        ),
        columns: ["w", "err_qopt", "err_minimax", "err_locallybest"]
            .map(String::from)
            .to_vec(),
        rows,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub name: String,
    pub threshold: f64,
    pub u_star: f64,
    pub tpr: f64,
    pub fpr: f64,
    pub objective: f64,
}

impl ReportRow {
    fn from_optimized(name: String, o: &OptimizedClassifier) -> Self {
        Self {
            name,
            threshold: o.threshold(),
            u_star: o.u_star,
            tpr: o.rates.tpr,
            fpr: o.rates.fpr,
            objective: o.objective_value,
        }
    }
}

/// Threshold, positive mass, rates and attained objective of every
/// construction: Bayes (cost), minimax (max error rate), locally best
/// (max error rate), Q-optimal and F-optimal per β.
pub fn optimize_report(
    model: &BinormalModel,
    cost: CostParams,
    betas: &[f64],
    nas: NasVariant,
) -> Result<Vec<ReportRow>> {
    for &b in betas {
        check_beta(b)?;
    }
    let mut rows = Vec::new();

    let bayes = quantifiers::bayes_classifier(model, cost);
    let rates = bayes.rates(model);
    let (threshold, u_star) = match bayes {
        BayesDecision::Threshold(c) => (c.threshold, model.mixture_sf(c.threshold)),
        BayesDecision::AllPositive => (f64::NEG_INFINITY, 1.0),
        BayesDecision::AllNegative => (f64::INFINITY, 0.0),
    };
    rows.push(ReportRow {
        name: format!("bayes(a={},b={})", cost.fn_cost(), cost.fp_cost()),
        threshold,
        u_star,
        tpr: rates.tpr,
        fpr: rates.fpr,
        objective: metrics::misclassification_cost(cost, &ConfusionProbs::from_rates(model.p(), rates)),
    });

    rows.push(ReportRow::from_optimized(
        "minimax".into(),
        &quantifiers::minimax_classifier(model),
    ));
    rows.push(ReportRow::from_optimized(
        "locally-best".into(),
        &quantifiers::locally_best_classifier(model),
    ));
    for &b in betas {
        let q = quantifiers::q_optimal_classifier(model, QConfig::new(b, nas)?);
        rows.push(ReportRow::from_optimized(format!("q-optimal(beta={b})"), &q));
    }
    for &b in betas {
        let f = quantifiers::f_optimal_classifier(model, b)?;
        rows.push(ReportRow::from_optimized(format!("f-optimal(beta={b})"), &f));
    }
    Ok(rows)
}

pub fn write_report_csv<W: Write>(mut out: W, comment: &str, rows: &[ReportRow]) -> Result<()> {
    writeln!(out, "# {comment}")?;
    writeln!(out, "classifier,threshold,u_star,tpr,fpr,objective")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            r.name, r.threshold, r.u_star, r.tpr, r.fpr, r.objective
        )?;
    }
    out.flush()?;
    Ok(())
}
