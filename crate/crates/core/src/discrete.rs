//! Finite populations on which "all classifiers" can be enumerated.
//!
//! A population is a list of feature atoms, each carrying a positive and a
//! negative probability mass. A classifier is any subset of atoms. With at
//! most [`MAX_ATOMS`] atoms every subset can be visited, which turns the
//! optimality statements for posterior-threshold classifiers into exact,
//! checkable comparisons.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{self, check_beta, ConfusionProbs, CostParams};
use crate::rng::Stream;

pub const MAX_ATOMS: usize = 20;

/// Absolute tolerance for comparing probabilities built from ≤ 20 terms.
pub const ORACLE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub mass_pos: f64,
    pub mass_neg: f64,
}

impl Atom {
    pub fn posterior(&self) -> f64 {
        self.mass_pos / (self.mass_pos + self.mass_neg)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscretePopulation {
    atoms: Vec<Atom>,
}

impl DiscretePopulation {
    pub fn new(atoms: Vec<Atom>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidPopulation("no atoms".into()));
        }
        if atoms.len() > MAX_ATOMS {
            return Err(Error::TooManyAtoms {
                atoms: atoms.len(),
                limit: MAX_ATOMS,
            });
        }
        for (i, a) in atoms.iter().enumerate() {
            if !(a.mass_pos >= 0.0 && a.mass_neg >= 0.0) || a.mass_pos + a.mass_neg <= 0.0 {
                return Err(Error::InvalidPopulation(format!(
                    "atom {i} has invalid masses ({}, {})",
                    a.mass_pos, a.mass_neg
                )));
            }
        }
        let total: f64 = atoms.iter().map(|a| a.mass_pos + a.mass_neg).sum();
        if (total - 1.0).abs() > ORACLE_TOL {
            return Err(Error::InvalidPopulation(format!("total mass {total} != 1")));
        }
        let p: f64 = atoms.iter().map(|a| a.mass_pos).sum();
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::InvalidPopulation(format!("prevalence {p} outside (0,1)")));
        }
        Ok(Self { atoms })
    }

    /// Convenience constructor from `(mass_pos, mass_neg)` pairs.
    pub fn from_pairs(pairs: &[(f64, f64)]) -> Result<Self> {
        Self::new(
            pairs
                .iter()
                .map(|&(mass_pos, mass_neg)| Atom { mass_pos, mass_neg })
                .collect(),
        )
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn prevalence(&self) -> f64 {
        self.atoms.iter().map(|a| a.mass_pos).sum()
    }

    pub fn posteriors(&self) -> Vec<f64> {
        self.atoms.iter().map(Atom::posterior).collect()
    }

    fn full_mask(&self) -> u32 {
        ((1u64 << self.len()) - 1) as u32
    }

    fn mask_where(&self, pred: impl Fn(f64) -> bool) -> u32 {
        self.atoms
            .iter()
            .enumerate()
            .filter(|(_, a)| pred(a.posterior()))
            .fold(0, |m, (i, _)| m | (1 << i))
    }

    /// Posterior values in ascending order, without duplicates.
    fn distinct_posteriors(&self) -> Vec<f64> {
        let mut q = self.posteriors();
        q.sort_by(f64::total_cmp);
        q.dedup();
        q
    }
}

impl fmt::Display for DiscretePopulation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, a) in self.atoms.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "({:e}, {:e})", a.mass_pos, a.mass_neg)?;
        }
        write!(f, "]")
    }
}

/// A classifier on a discrete population: predict positive on these atoms.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SubsetClassifier {
    included: Vec<usize>,
}

impl SubsetClassifier {
    pub fn new(pop: &DiscretePopulation, mut included: Vec<usize>) -> Result<Self> {
        included.sort_unstable();
        included.dedup();
        if let Some(&bad) = included.iter().find(|&&i| i >= pop.len()) {
            return Err(Error::InvalidPopulation(format!(
                "atom index {bad} out of range for {} atoms",
                pop.len()
            )));
        }
        Ok(Self { included })
    }

    fn from_mask(mask: u32) -> Self {
        Self {
            included: (0..32).filter(|i| mask & (1 << i) != 0).collect(),
        }
    }

    fn mask(&self) -> u32 {
        self.included.iter().fold(0, |m, &i| m | (1 << i))
    }

    pub fn included(&self) -> &[usize] {
        &self.included
    }
}

/// Joint probabilities of a subset classifier. Masses are summed in atom
/// index order.
pub fn subset_confusion(pop: &DiscretePopulation, h: &SubsetClassifier) -> ConfusionProbs {
    confusion_of_mask(pop, h.mask())
}

fn confusion_of_mask(pop: &DiscretePopulation, mask: u32) -> ConfusionProbs {
    let (mut hit, mut false_alarm) = (0.0, 0.0);
    for (i, a) in pop.atoms.iter().enumerate() {
        if mask & (1 << i) != 0 {
            hit += a.mass_pos;
            false_alarm += a.mass_neg;
        }
    }
    ConfusionProbs {
        p_pos_and_pred: hit,
        p_neg_and_pred: false_alarm,
        p_pos: pop.prevalence(),
        p_pred: hit + false_alarm,
    }
}

/// Joint masses of every subset, indexed by bitmask.
///
/// Entry `m` extends the entry of `m` minus its highest bit by that bit's
/// atom, so each sum is accumulated in index order and matches
/// [`subset_confusion`] bit for bit.
struct SubsetTable {
    hit: Vec<f64>,
    false_alarm: Vec<f64>,
    p_pos: f64,
}

impl SubsetTable {
    fn build(pop: &DiscretePopulation) -> Result<Self> {
        if pop.len() > MAX_ATOMS {
            return Err(Error::TooManyAtoms {
                atoms: pop.len(),
                limit: MAX_ATOMS,
            });
        }
        let size = 1usize << pop.len();
        let mut hit = vec![0.0; size];
        let mut false_alarm = vec![0.0; size];
        for m in 1..size {
            let top = usize::BITS - 1 - m.leading_zeros();
            let rest = m & !(1 << top);
            let a = pop.atoms[top as usize];
            hit[m] = hit[rest] + a.mass_pos;
            false_alarm[m] = false_alarm[rest] + a.mass_neg;
        }
        Ok(Self {
            hit,
            false_alarm,
            p_pos: pop.prevalence(),
        })
    }

    fn probs(&self, mask: u32) -> ConfusionProbs {
        let m = mask as usize;
        ConfusionProbs {
            p_pos_and_pred: self.hit[m],
            p_neg_and_pred: self.false_alarm[m],
            p_pos: self.p_pos,
            p_pred: self.hit[m] + self.false_alarm[m],
        }
    }

    fn masks(&self) -> impl Iterator<Item = u32> {
        0..self.hit.len() as u32
    }
}

/// Lexicographic order of the sorted index lists encoded by two masks.
fn lex_cmp(mut a: u32, mut b: u32) -> Ordering {
    loop {
        match (a, b) {
            (0, 0) => return Ordering::Equal,
            (0, _) => return Ordering::Less,
            (_, 0) => return Ordering::Greater,
            _ => {}
        }
        match a.trailing_zeros().cmp(&b.trailing_zeros()) {
            Ordering::Equal => {
                a &= a - 1;
                b &= b - 1;
            }
            // the list whose next element is smaller sorts first
            Ordering::Less => return Ordering::Less,
            Ordering::Greater => return Ordering::Greater,
        }
    }
}

/// Exhaustive maximum of F_β over all subsets. Among equal values the
/// lexicographically smallest index set is returned.
pub fn brute_force_fbeta_max(
    pop: &DiscretePopulation,
    beta: f64,
) -> Result<(SubsetClassifier, f64)> {
    check_beta(beta)?;
    let table = SubsetTable::build(pop)?;
    let (mask, value) = fbeta_argmax(&table, beta);
    Ok((SubsetClassifier::from_mask(mask), value))
}

fn fbeta_argmax(table: &SubsetTable, beta: f64) -> (u32, f64) {
    let mut best = (0u32, metrics::f_beta(&table.probs(0), beta));
    for m in table.masks().skip(1) {
        let v = metrics::f_beta(&table.probs(m), beta);
        if v > best.1 || (v == best.1 && lex_cmp(m, best.0) == Ordering::Less) {
            best = (m, v);
        }
    }
    best
}

/// Supremum of F_β over the posterior-threshold sets `{post > q}` and
/// `{post ≥ q}`, with `q` ranging over 0, 1 and every atom posterior.
pub fn thresholded_fbeta_sup(pop: &DiscretePopulation, beta: f64) -> Result<f64> {
    check_beta(beta)?;
    let mut levels = pop.distinct_posteriors();
    levels.extend([0.0, 1.0]);
    let best = levels
        .iter()
        .flat_map(|&q| [pop.mask_where(|x| x > q), pop.mask_where(|x| x >= q)])
        .map(|m| metrics::f_beta(&confusion_of_mask(pop, m), beta))
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(best)
}

/// Which side of the Bayes cutoff b/(a+b) the level `q` lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LocalBranch {
    /// q < b/(a+b): compare against all H with P[H] ≥ P[H_q].
    Below,
    /// q > b/(a+b): compare against all H with P[H] ≤ P[H_q].
    Above,
    /// q = b/(a+b): H_q is the unconstrained Bayes classifier.
    AtCutoff,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalBayesReport {
    pub q: f64,
    pub cutoff: f64,
    pub branch: LocalBranch,
    pub h_q: SubsetClassifier,
    /// P[H_q]
    pub p_q: f64,
    pub h_q_cost: f64,
    /// Minimum cost over the subsets admitted by the branch constraint.
    pub constrained_min_cost: f64,
    pub constrained_minimizer: SubsetClassifier,
    pub global_min_cost: f64,
}

impl LocalBayesReport {
    /// True when no admitted subset beats H_q by more than [`ORACLE_TOL`].
    pub fn holds(&self) -> bool {
        self.h_q_cost <= self.constrained_min_cost + ORACLE_TOL
    }
}

/// Checks by enumeration that `H_q = {post > q}` minimizes the cost among
/// classifiers with a one-sidedly bounded predicted-positive mass.
pub fn local_bayes_check(
    pop: &DiscretePopulation,
    cost: CostParams,
    q: f64,
) -> Result<LocalBayesReport> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::domain("posterior level q", q));
    }
    let table = SubsetTable::build(pop)?;
    let cutoff = cost.posterior_cutoff();
    let branch = match q.partial_cmp(&cutoff) {
        Some(Ordering::Less) => LocalBranch::Below,
        Some(Ordering::Greater) => LocalBranch::Above,
        _ => LocalBranch::AtCutoff,
    };
    let h_q = pop.mask_where(|x| x > q);
    let hq_probs = table.probs(h_q);
    let p_q = hq_probs.p_pred;

    let mut constrained = (u32::MAX, f64::INFINITY);
    let mut global = f64::INFINITY;
    for m in table.masks() {
        let probs = table.probs(m);
        let c = metrics::misclassification_cost(cost, &probs);
        global = global.min(c);
        let admitted = match branch {
            LocalBranch::Below => probs.p_pred >= p_q,
            LocalBranch::Above => probs.p_pred <= p_q,
            LocalBranch::AtCutoff => true,
        };
        if admitted && c < constrained.1 {
            constrained = (m, c);
        }
    }

    Ok(LocalBayesReport {
        q,
        cutoff,
        branch,
        h_q: SubsetClassifier::from_mask(h_q),
        p_q,
        h_q_cost: metrics::misclassification_cost(cost, &hq_probs),
        constrained_min_cost: constrained.1,
        constrained_minimizer: SubsetClassifier::from_mask(constrained.0),
        global_min_cost: global,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinimaxReport {
    /// min over all subsets of max(FPR, FNR).
    pub brute_force_min: f64,
    pub brute_force_minimizer: SubsetClassifier,
    /// min over likelihood-ratio upper sets `{λ > ℓ}`.
    pub threshold_min: f64,
    pub threshold_minimizer: SubsetClassifier,
}

impl MinimaxReport {
    /// Brute force never does worse than the threshold family.
    pub fn consistent(&self) -> bool {
        self.brute_force_min <= self.threshold_min + ORACLE_TOL
    }

    /// The threshold family attains the overall minimum. Not guaranteed for
    /// discrete populations, whose likelihood ratio has atoms.
    pub fn attained_by_threshold(&self) -> bool {
        (self.threshold_min - self.brute_force_min).abs() <= ORACLE_TOL
    }
}

fn max_error_rate(probs: &ConfusionProbs) -> f64 {
    let fpr = probs.p_neg_and_pred / (1.0 - probs.p_pos);
    let fnr = 1.0 - probs.p_pos_and_pred / probs.p_pos;
    fpr.max(fnr)
}

/// Compares the exhaustive minimax error with the best likelihood-ratio
/// threshold test. The likelihood ratio is an increasing function of the
/// atom posterior, so its upper sets are the posterior upper sets.
pub fn minimax_comparison(pop: &DiscretePopulation) -> Result<MinimaxReport> {
    let table = SubsetTable::build(pop)?;

    let mut brute = (0u32, max_error_rate(&table.probs(0)));
    for m in table.masks().skip(1) {
        let v = max_error_rate(&table.probs(m));
        if v < brute.1 {
            brute = (m, v);
        }
    }

    let mut thresh = (pop.full_mask(), max_error_rate(&table.probs(pop.full_mask())));
    for q in pop.distinct_posteriors() {
        let m = pop.mask_where(|x| x > q);
        let v = max_error_rate(&table.probs(m));
        if v < thresh.1 {
            thresh = (m, v);
        }
    }

    Ok(MinimaxReport {
        brute_force_min: brute.1,
        brute_force_minimizer: SubsetClassifier::from_mask(brute.0),
        threshold_min: thresh.1,
        threshold_minimizer: SubsetClassifier::from_mask(thresh.0),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PopulationKind {
    /// Atom posteriors pairwise distinct.
    Distinct,
    /// Few posterior levels shared by several atoms, with exact ties.
    Tied,
}

/// Draws a random population with `n_atoms` atoms.
///
/// `Distinct`: masses from the grid {0, 1/1000, …, 1}, normalized; atoms
/// whose posterior collides with an earlier one get 1e-6 extra positive
/// mass before normalization. `Tied`: dyadic weights c/1024 times dyadic
/// posteriors k/8, so equal levels stay exactly equal in floating point.
pub fn random_population(
    rng: &mut Stream,
    n_atoms: usize,
    kind: PopulationKind,
) -> Result<DiscretePopulation> {
    if n_atoms == 0 || n_atoms > MAX_ATOMS {
        return Err(Error::TooManyAtoms {
            atoms: n_atoms,
            limit: MAX_ATOMS,
        });
    }
    loop {
        let atoms = match kind {
            PopulationKind::Distinct => distinct_atoms(rng, n_atoms),
            PopulationKind::Tied => tied_atoms(rng, n_atoms),
        };
        if let Ok(pop) = DiscretePopulation::new(atoms) {
            return Ok(pop);
        }
    }
}

fn distinct_atoms(rng: &mut Stream, n: usize) -> Vec<Atom> {
    let mut raw: Vec<(f64, f64)> = Vec::with_capacity(n);
    while raw.len() < n {
        let pos = rng.below(1001) as f64 / 1000.0;
        let neg = rng.below(1001) as f64 / 1000.0;
        if pos + neg <= 0.0 {
            continue;
        }
        let mut pos = pos;
        while raw
            .iter()
            .any(|&(p, q)| (p / (p + q) - pos / (pos + neg)).abs() < 1e-9)
        {
            pos += 1e-6;
        }
        raw.push((pos, neg));
    }
    let total: f64 = raw.iter().map(|(p, q)| p + q).sum();
    raw.into_iter()
        .map(|(p, q)| Atom {
            mass_pos: p / total,
            mass_neg: q / total,
        })
        .collect()
}

fn tied_atoms(rng: &mut Stream, n: usize) -> Vec<Atom> {
    const UNITS: u64 = 1024;
    let n_levels = 1 + rng.below(3.min(n as u64)) as usize;
    let levels: Vec<u64> = (0..n_levels).map(|_| rng.below(9)).collect();

    // random composition of UNITS into n positive parts
    let mut cuts: Vec<u64> = Vec::with_capacity(n + 1);
    while cuts.len() < n - 1 {
        let c = 1 + rng.below(UNITS - 1);
        if !cuts.contains(&c) {
            cuts.push(c);
        }
    }
    cuts.push(0);
    cuts.push(UNITS);
    cuts.sort_unstable();

    cuts.windows(2)
        .map(|w| {
            let weight = (w[1] - w[0]) as f64 / UNITS as f64;
            let k = levels[rng.below(n_levels as u64) as usize] as f64;
            Atom {
                mass_pos: weight * k / 8.0,
                mass_neg: weight * (8.0 - k) / 8.0,
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleConfig {
    pub trials: usize,
    pub seed: u64,
    pub max_atoms: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub suite: String,
    pub trial: usize,
    pub detail: String,
    pub population: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub trials: usize,
    pub fbeta_checks: usize,
    pub local_bayes_checks: usize,
    pub minimax_checks: usize,
    /// Populations on which the threshold family attained the minimax value.
    pub minimax_attained: usize,
    pub tied_populations: usize,
    pub violations: Vec<Violation>,
}

impl OracleReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

pub const ORACLE_BETAS: [f64; 3] = [0.5, 1.0, 2.0];

/// Runs the three oracle suites on `trials` seeded random populations.
/// Every fourth population is drawn with tied posteriors.
pub fn run_oracle_suite(config: OracleConfig) -> Result<OracleReport> {
    if config.max_atoms == 0 || config.max_atoms > MAX_ATOMS {
        return Err(Error::TooManyAtoms {
            atoms: config.max_atoms,
            limit: MAX_ATOMS,
        });
    }
    let mut rng = Stream::new(config.seed);
    let mut report = OracleReport {
        trials: config.trials,
        ..Default::default()
    };

    for trial in 0..config.trials {
        let n = 1 + rng.below(config.max_atoms as u64) as usize;
        let kind = if trial % 4 == 3 {
            report.tied_populations += 1;
            PopulationKind::Tied
        } else {
            PopulationKind::Distinct
        };
        let pop = random_population(&mut rng, n, kind)?;
        let mut fail = |suite: &'static str, detail: String| {
            report.violations.push(Violation {
                suite: suite.to_string(),
                trial,
                detail,
                population: pop.to_string(),
            })
        };

        for beta in ORACLE_BETAS {
            let (_, brute) = brute_force_fbeta_max(&pop, beta)?;
            let thresholded = thresholded_fbeta_sup(&pop, beta)?;
            if (brute - thresholded).abs() > ORACLE_TOL {
                fail(
                    "fbeta",
                    format!("beta={beta}: brute force {brute} vs thresholded {thresholded}"),
                );
            }
        }

        for branch in [LocalBranch::Below, LocalBranch::Above] {
            let a = 0.05 + rng.uniform();
            let b = 0.05 + rng.uniform();
            let cost = CostParams::new(a, b)?;
            let cutoff = cost.posterior_cutoff();
            let q = match branch {
                LocalBranch::Below => cutoff * rng.uniform_open(),
                _ => cutoff + (1.0 - cutoff) * rng.uniform_open(),
            };
            let r = local_bayes_check(&pop, cost, q)?;
            if !r.holds() {
                fail(
                    "local_bayes",
                    format!(
                        "a={a} b={b} q={q} ({:?}): H_q cost {} > constrained min {}",
                        r.branch, r.h_q_cost, r.constrained_min_cost
                    ),
                );
            }
        }

        let mm = minimax_comparison(&pop)?;
        if !mm.consistent() {
            fail(
                "minimax",
                format!(
                    "brute force {} exceeds threshold family {}",
                    mm.brute_force_min, mm.threshold_min
                ),
            );
        }
        report.minimax_attained += mm.attained_by_threshold() as usize;
        report.fbeta_checks += ORACLE_BETAS.len();
        report.local_bayes_checks += 2;
        report.minimax_checks += 1;
    }
    Ok(report)
}
