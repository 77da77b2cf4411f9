//! Sample-based quantification: seeded generation from a binormal model,
//! rate estimation from labeled scores, and CC/AC on unlabeled scores.
//!
//! CSV formats: labeled files have header `score,label` with labels `1` or
//! `-1`; unlabeled files have a `score` column. Lines starting with `#` are
//! comments.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::binormal::{std_normal_quantile, BinormalModel, Rates, ThresholdClassifier};
use crate::error::{Error, Result};
use crate::quantifiers::{adjusted_count, QuantificationEstimate};
use crate::rng::Stream;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Label {
    Positive,
    Negative,
}

impl Label {
    pub fn as_i8(self) -> i8 {
        match self {
            Label::Positive => 1,
            Label::Negative => -1,
        }
    }

    fn parse(token: &str) -> Option<Self> {
        match token.trim() {
            "1" | "+1" => Some(Label::Positive),
            "-1" => Some(Label::Negative),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub score: f64,
    pub label: Label,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledSample {
    records: Vec<Record>,
}

impl LabeledSample {
    pub fn new(records: Vec<Record>) -> Result<Self> {
        if records.is_empty() {
            return Err(Error::EmptySample);
        }
        Ok(Self { records })
    }

    pub fn records(&self) -> &[Record] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn positive_fraction(&self) -> f64 {
        let pos = self
            .records
            .iter()
            .filter(|r| r.label == Label::Positive)
            .count();
        pos as f64 / self.records.len() as f64
    }

    /// Drops the labels.
    pub fn scores(&self) -> ScoreSample {
        ScoreSample {
            scores: self.records.iter().map(|r| r.score).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreSample {
    scores: Vec<f64>,
}

impl ScoreSample {
    pub fn new(scores: Vec<f64>) -> Result<Self> {
        if scores.is_empty() {
            return Err(Error::EmptySample);
        }
        Ok(Self { scores })
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    /// Fraction of scores strictly above the classifier's threshold.
    pub fn predicted_positive_fraction(&self, clf: ThresholdClassifier) -> f64 {
        let hits = self.scores.iter().filter(|&&s| clf.predicts_positive(s)).count();
        hits as f64 / self.scores.len() as f64
    }
}

/// Draws `n` labeled scores. Each record consumes two uniforms from the
/// stream: one for the label, one for the score's normal quantile.
pub fn sample_binormal(model: &BinormalModel, n: usize, seed: u64) -> Result<LabeledSample> {
    if n == 0 {
        return Err(Error::EmptySample);
    }
    let mut rng = Stream::new(seed);
    let records = (0..n)
        .map(|_| {
            let label = if rng.uniform_open() < model.p() {
                Label::Positive
            } else {
                Label::Negative
            };
            let mean = match label {
                Label::Positive => model.nu(),
                Label::Negative => model.mu(),
            };
            let z = std_normal_quantile(rng.uniform_open()).expect("open-interval uniform");
            Record {
                score: mean + model.sigma() * z,
                label,
            }
        })
        .collect();
    Ok(LabeledSample { records })
}

/// Empirical TPR and FPR of `{score > t}`. Scores equal to the threshold
/// count as negative predictions.
pub fn estimate_rates(sample: &LabeledSample, clf: ThresholdClassifier) -> Result<Rates> {
    let (mut pos, mut tp, mut neg, mut fp) = (0usize, 0usize, 0usize, 0usize);
    for r in &sample.records {
        let hit = clf.predicts_positive(r.score) as usize;
        match r.label {
            Label::Positive => {
                pos += 1;
                tp += hit;
            }
            Label::Negative => {
                neg += 1;
                fp += hit;
            }
        }
    }
    if pos == 0 {
        return Err(Error::MissingClass("positive"));
    }
    if neg == 0 {
        return Err(Error::MissingClass("negative"));
    }
    Ok(Rates {
        tpr: tp as f64 / pos as f64,
        fpr: fp as f64 / neg as f64,
    })
}

/// Classify & Count and Adjusted Count on an unlabeled target sample.
pub fn quantify_sample(
    target: &ScoreSample,
    clf: ThresholdClassifier,
    rates: Rates,
) -> Result<QuantificationEstimate> {
    adjusted_count(target.predicted_positive_fraction(clf), rates)
}

/// Moment fit of the equal-variance binormal model: class means, pooled
/// standard deviation (divisor n − 2) and the positive fraction as prior.
pub fn fit_binormal(sample: &LabeledSample) -> Result<BinormalModel> {
    let (mut n_pos, mut n_neg, mut sum_pos, mut sum_neg) = (0usize, 0usize, 0.0, 0.0);
    for r in &sample.records {
        match r.label {
            Label::Positive => {
                n_pos += 1;
                sum_pos += r.score;
            }
            Label::Negative => {
                n_neg += 1;
                sum_neg += r.score;
            }
        }
    }
    if n_pos == 0 {
        return Err(Error::MissingClass("positive"));
    }
    if n_neg == 0 {
        return Err(Error::MissingClass("negative"));
    }
    let (mean_pos, mean_neg) = (sum_pos / n_pos as f64, sum_neg / n_neg as f64);
    let ss: f64 = sample
        .records
        .iter()
        .map(|r| {
            let m = match r.label {
                Label::Positive => mean_pos,
                Label::Negative => mean_neg,
            };
            (r.score - m).powi(2)
        })
        .sum();
    let dof = sample.records.len().saturating_sub(2).max(1);
    let sigma = (ss / dof as f64).sqrt();
    BinormalModel::new(mean_neg, mean_pos, sigma, sample.positive_fraction())
}

fn reader_for<R: Read>(input: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(input)
}

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line()).unwrap_or(0);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        csv::ErrorKind::UnequalLengths { len, expected_len, .. } => Error::Parse {
            line,
            token: format!("{len} fields"),
            message: format!("expected {expected_len} fields"),
        },
        csv::ErrorKind::Utf8 { err, .. } => Error::Parse {
            line,
            token: String::new(),
            message: format!("invalid UTF-8: {err}"),
        },
        other => Error::Parse {
            line,
            token: String::new(),
            message: format!("{other:?}"),
        },
    }
}

fn column(headers: &csv::StringRecord, name: &'static str) -> Result<usize> {
    headers.iter().position(|h| h == name).ok_or_else(|| Error::Parse {
        line: 1,
        token: headers.iter().collect::<Vec<_>>().join(","),
        message: format!("header has no `{name}` column"),
    })
}

fn parse_score(token: &str, line: u64) -> Result<f64> {
    match token.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(Error::Parse {
            line,
            token: token.to_string(),
            message: "score is not a finite decimal number".into(),
        }),
    }
}

fn record_line(rec: &csv::StringRecord) -> u64 {
    rec.position().map(|p| p.line()).unwrap_or(0)
}

pub fn read_labeled_csv<R: Read>(input: R) -> Result<LabeledSample> {
    let mut rdr = reader_for(input);
    let headers = rdr.headers().map_err(csv_error)?.clone();
    let (si, li) = (column(&headers, "score")?, column(&headers, "label")?);
    let mut records = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(csv_error)?;
        let line = record_line(&rec);
        let score = parse_score(&rec[si], line)?;
        let label = Label::parse(&rec[li]).ok_or_else(|| Error::Parse {
            line,
            token: rec[li].to_string(),
            message: "label must be 1 or -1".into(),
        })?;
        records.push(Record { score, label });
    }
    LabeledSample::new(records)
}

/// Reads the `score` column; any other columns (such as `label`) are ignored.
pub fn read_scores_csv<R: Read>(input: R) -> Result<ScoreSample> {
    let mut rdr = reader_for(input);
    let headers = rdr.headers().map_err(csv_error)?.clone();
    let si = column(&headers, "score")?;
    let mut scores = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(csv_error)?;
        scores.push(parse_score(&rec[si], record_line(&rec))?);
    }
    ScoreSample::new(scores)
}

/// Writes `score,label` rows, preceded by `# ` comment lines.
pub fn write_labeled_csv<W: Write>(mut out: W, sample: &LabeledSample, comments: &[String]) -> Result<()> {
    for c in comments {
        writeln!(out, "# {c}")?;
    }
    writeln!(out, "score,label")?;
    for r in &sample.records {
        writeln!(out, "{},{}", r.score, r.label.as_i8())?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_scores_csv<W: Write>(mut out: W, sample: &ScoreSample, comments: &[String]) -> Result<()> {
    for c in comments {
        writeln!(out, "# {c}")?;
    }
    writeln!(out, "score")?;
    for s in &sample.scores {
        writeln!(out, "{s}")?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::binormal::std_normal_cdf;

    #[test]
    fn fit_recovers_reference_model() {
        let s = sample_binormal(&BinormalModel::reference(), 100_000, 11).unwrap();
        let m = fit_binormal(&s).unwrap();
        assert!(m.mu().abs() < 0.02 && (m.nu() - 2.0).abs() < 0.03);
        assert!((m.sigma() - 1.0).abs() < 0.01 && (m.p() - 0.25).abs() < 0.005);
    }

    #[test]
    fn fit_needs_both_classes_and_spread() {
        let one = |score, label| Record { score, label };
        let s = LabeledSample::new(vec![one(1.0, Label::Positive)]).unwrap();
        assert!(matches!(fit_binormal(&s), Err(Error::MissingClass("negative"))));
        let s = LabeledSample::new(vec![one(1.0, Label::Positive), one(0.0, Label::Negative)]).unwrap();
        assert!(fit_binormal(&s).is_err());
    }

    fn rec(score: f64, label: Label) -> Record {
        Record { score, label }
    }

    #[test]
    fn sampling_is_deterministic_per_seed() {
        let m = BinormalModel::reference();
        let a = sample_binormal(&m, 500, 42).unwrap();
        let b = sample_binormal(&m, 500, 42).unwrap();
        assert_eq!(a, b);
        let c = sample_binormal(&m, 500, 43).unwrap();
        assert_ne!(a, c);
        let one = sample_binormal(&m, 1, 9).unwrap();
        assert_eq!(one.len(), 1);
        assert_eq!(one, sample_binormal(&m, 1, 9).unwrap());
        assert!(sample_binormal(&m, 0, 1).is_err());
    }

    #[test]
    fn sample_prefix_is_stable() {
        let m = BinormalModel::reference();
        let long = sample_binormal(&m, 200, 3).unwrap();
        let short = sample_binormal(&m, 50, 3).unwrap();
        assert_eq!(&long.records()[..50], short.records());
    }

    #[test]
    fn positive_fraction_matches_prior() {
        let n = 100_000;
        let s = sample_binormal(&BinormalModel::reference(), n, 2024).unwrap();
        let se = (0.25f64 * 0.75 / n as f64).sqrt();
        assert!((s.positive_fraction() - 0.25).abs() < 3.0 * se);
    }

    #[test]
    fn estimated_rates_examples() {
        let s = LabeledSample::new(vec![
            rec(2.0, Label::Positive),
            rec(3.0, Label::Positive),
            rec(-1.0, Label::Negative),
            rec(0.5, Label::Negative),
        ])
        .unwrap();
        let r = estimate_rates(&s, ThresholdClassifier::new(1.0)).unwrap();
        assert_eq!((r.tpr, r.fpr), (1.0, 0.0));

        let s = LabeledSample::new(vec![rec(0.0, Label::Positive), rec(-3.0, Label::Negative)]).unwrap();
        assert_eq!(estimate_rates(&s, ThresholdClassifier::new(1.0)).unwrap().tpr, 0.0);
    }

    #[test]
    fn ties_at_threshold_are_negative() {
        let s = LabeledSample::new(vec![rec(1.0, Label::Positive), rec(1.0, Label::Negative)]).unwrap();
        let r = estimate_rates(&s, ThresholdClassifier::new(1.0)).unwrap();
        assert_eq!((r.tpr, r.fpr), (0.0, 0.0));
    }

    #[test]
    fn rates_need_both_classes() {
        let s = LabeledSample::new(vec![rec(0.0, Label::Positive)]).unwrap();
        assert!(matches!(
            estimate_rates(&s, ThresholdClassifier::new(0.0)),
            Err(Error::MissingClass("negative"))
        ));
        let s = LabeledSample::new(vec![rec(0.0, Label::Negative)]).unwrap();
        assert!(matches!(
            estimate_rates(&s, ThresholdClassifier::new(0.0)),
            Err(Error::MissingClass("positive"))
        ));
    }

    #[test]
    fn large_sample_rates_are_consistent() {
        let s = sample_binormal(&BinormalModel::reference(), 100_000, 77).unwrap();
        let r = estimate_rates(&s, ThresholdClassifier::new(1.0)).unwrap();
        assert!((r.tpr - std_normal_cdf(1.0)).abs() < 0.005);
        assert!((r.fpr - (1.0 - std_normal_cdf(1.0))).abs() < 0.005);
    }

    #[test]
    fn quantify_all_below_threshold() {
        let target = ScoreSample::new(vec![-5.0, -4.0, 0.0]).unwrap();
        let rates = Rates::new(0.8, 0.1).unwrap();
        let est = quantify_sample(&target, ThresholdClassifier::new(1.0), rates).unwrap();
        assert_eq!(est.cc, 0.0);
        assert!((est.ac - (-0.1 / 0.7)).abs() < 1e-15);
        assert_eq!(est.ac_clamped, 0.0);
    }

    #[test]
    fn labeled_csv_round_trip() {
        let s = sample_binormal(&BinormalModel::reference(), 64, 5).unwrap();
        let mut buf = Vec::new();
        write_labeled_csv(&mut buf, &s, &["seed=5".into()]).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("# seed=5\nscore,label\n"));
        assert_eq!(read_labeled_csv(buf.as_slice()).unwrap(), s);
        assert_eq!(read_scores_csv(buf.as_slice()).unwrap(), s.scores());
    }

    #[test]
    fn parse_errors_carry_line_and_token() {
        let err = read_labeled_csv("score,label\n0.5,1\n0.7,2\n".as_bytes()).unwrap_err();
        match err {
            Error::Parse { line, token, .. } => {
                assert_eq!(line, 3);
                assert_eq!(token, "2");
            }
            e => panic!("unexpected {e:?}"),
        }
        let err = read_scores_csv("score\n1.5\nabc\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, ref token, .. } if token == "abc"));
        let err = read_scores_csv("score\n1,000\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
        let err = read_scores_csv("value\n1\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
        assert!(matches!(read_scores_csv("score\n".as_bytes()), Err(Error::EmptySample)));
        assert!(read_scores_csv("score\nNaN\n".as_bytes()).is_err());
    }
}
