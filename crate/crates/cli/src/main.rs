use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use binquant::discrete::{run_oracle_suite, OracleConfig, ORACLE_BETAS};
use binquant::empirical::{self, LabeledSample, ScoreSample};
use binquant::figures::{self, nas_name};
use binquant::quantifiers;
use binquant::rng::RNG_ALGORITHM;
use binquant::{BinormalModel, CostParams, NasVariant, QConfig, ThresholdClassifier};

/// Optimal threshold classifiers and prevalence quantifiers under prior
/// probability shift.
#[derive(Parser)]
#[command(name = "binquant", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// CSV of u ↦ Q_β for the threshold classifier with positive mass u.
    FigureQcurve {
        #[command(flatten)]
        model: ModelArgs,
        /// Comma-separated β values.
        #[arg(long, value_delimiter = ',', default_value = "1,2")]
        beta: Vec<f64>,
        #[arg(long, value_enum, default_value_t = Nas::NasStar)]
        nas: Nas,
        #[arg(long, default_value_t = 1001)]
        grid: usize,
        #[command(flatten)]
        out: OutArg,
    },
    /// CSV of the Classify & Count error against the target prevalence w.
    FigureError {
        #[command(flatten)]
        model: ModelArgs,
        /// β of the Q-optimal curve.
        #[arg(long, default_value_t = 1.0)]
        beta: f64,
        #[arg(long, value_enum, default_value_t = Nas::NasStar)]
        nas: Nas,
        #[arg(long, default_value_t = 1001)]
        grid: usize,
        #[command(flatten)]
        out: OutArg,
    },
    /// Report every optimal classifier construction for a model.
    Optimize {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, value_delimiter = ',', default_value = "1,2")]
        beta: Vec<f64>,
        #[arg(long, value_enum, default_value_t = Nas::NasStar)]
        nas: Nas,
        /// Cost of a false negative (Bayes row).
        #[arg(long, default_value_t = 1.0)]
        cost_fn: f64,
        /// Cost of a false positive (Bayes row).
        #[arg(long, default_value_t = 1.0)]
        cost_fp: f64,
        #[command(flatten)]
        out: OutArg,
    },
    /// Draw a seeded labeled (or score-only) sample from a binormal model.
    Simulate {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write only the score column.
        #[arg(long)]
        unlabeled: bool,
        #[command(flatten)]
        out: OutArg,
    },
    /// Estimate the positive prevalence of a target file.
    Quantify {
        /// Labeled training CSV (`score,label`).
        #[arg(long)]
        train: PathBuf,
        /// Target CSV with a `score` column.
        #[arg(long)]
        target: PathBuf,
        #[arg(long, value_enum, default_value_t = Method::Ac)]
        method: Method,
        /// Explicit threshold; overrides --construction.
        #[arg(long, allow_hyphen_values = true)]
        threshold: Option<f64>,
        #[arg(long, value_enum, default_value_t = Construction::LocallyBest)]
        construction: Construction,
        /// Model the construction is computed under.
        #[arg(long = "model", value_enum, default_value_t = ModelSource::Fitted)]
        model_source: ModelSource,
        #[command(flatten)]
        model: ModelArgs,
        /// β for --construction q-optimal.
        #[arg(long, default_value_t = 1.0)]
        beta: f64,
        #[arg(long, value_enum, default_value_t = Nas::NasStar)]
        nas: Nas,
        #[command(flatten)]
        out: OutArg,
    },
    /// Brute-force enumeration checks on random finite populations.
    Oracle {
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Largest population size, at most 20.
        #[arg(long, default_value_t = 12)]
        max_atoms: usize,
        #[command(flatten)]
        out: OutArg,
    },
}

#[derive(Args, Clone, Copy)]
struct ModelArgs {
    /// Negative-class score mean.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    mu: f64,
    /// Positive-class score mean.
    #[arg(long, default_value_t = 2.0, allow_hyphen_values = true)]
    nu: f64,
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    /// Positive-class prior.
    #[arg(long, default_value_t = 0.25)]
    p: f64,
}

impl ModelArgs {
    fn build(self) -> Result<BinormalModel, Failure> {
        BinormalModel::new(self.mu, self.nu, self.sigma, self.p).map_err(Failure::usage)
    }
}

#[derive(Args)]
struct OutArg {
    /// Output file; standard output if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy)]
enum Nas {
    Nas,
    NasStar,
}

impl From<Nas> for NasVariant {
    fn from(n: Nas) -> Self {
        match n {
            Nas::Nas => NasVariant::Nas,
            Nas::NasStar => NasVariant::NasStar,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, PartialEq)]
enum Method {
    Cc,
    Ac,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Construction {
    Minimax,
    LocallyBest,
    QOptimal,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum ModelSource {
    Fitted,
    Flags,
}

enum Failure {
    Usage(anyhow::Error),
    Data(anyhow::Error),
    Violation(usize),
}

impl Failure {
    fn usage(e: impl Into<anyhow::Error>) -> Self {
        Failure::Usage(e.into())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Data(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Violation(n)) => {
            eprintln!("oracle: {n} violation(s)");
            ExitCode::from(3)
        }
    }
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::FigureQcurve { model, beta, nas, grid, out } => {
            let model = model.build()?;
            check_betas(&beta, nas)?;
            let table = figures::q_curve(&model, &beta, nas.into(), grid).map_err(Failure::usage)?;
            emit(&out, |w| table.write_csv(w).map_err(Into::into))
        }
        Command::FigureError { model, beta, nas, grid, out } => {
            let model = model.build()?;
            check_betas(&[beta], nas)?;
            let table = figures::error_curve(&model, beta, nas.into(), grid).map_err(Failure::usage)?;
            emit(&out, |w| table.write_csv(w).map_err(Into::into))?;
            let (w, gap) = max_gap(&table);
            eprintln!("max |err_qopt - err_minimax| = {gap} at w = {w}");
            Ok(())
        }
        Command::Optimize { model, beta, nas, cost_fn, cost_fp, out } => {
            let m = model.build()?;
            check_betas(&beta, nas)?;
            let cost = CostParams::new(cost_fn, cost_fp).map_err(Failure::usage)?;
            let rows = figures::optimize_report(&m, cost, &beta, nas.into()).map_err(Failure::usage)?;
            let comment = format!(
                "optimize mu={} nu={} sigma={} p={} beta={} nas={} cost_fn={} cost_fp={}",
                m.mu(),
                m.nu(),
                m.sigma(),
                m.p(),
                join(&beta),
                nas_name(nas.into()),
                cost_fn,
                cost_fp
            );
            emit(&out, |w| figures::write_report_csv(w, &comment, &rows).map_err(Into::into))
        }
        Command::Simulate { model, n, seed, unlabeled, out } => {
            let m = model.build()?;
            if n == 0 {
                return Err(Failure::usage(anyhow!("--n must be at least 1")));
            }
            let sample = empirical::sample_binormal(&m, n, seed).map_err(Failure::usage)?;
            let comments = [format!(
                "simulate mu={} nu={} sigma={} p={} n={} seed={} rng={}",
                m.mu(),
                m.nu(),
                m.sigma(),
                m.p(),
                n,
                seed,
                RNG_ALGORITHM
            )];
            if unlabeled {
                emit(&out, |w| {
                    empirical::write_scores_csv(w, &sample.scores(), &comments).map_err(Into::into)
                })
            } else {
                emit(&out, |w| {
                    empirical::write_labeled_csv(w, &sample, &comments).map_err(Into::into)
                })
            }
        }
        Command::Quantify {
            train,
            target,
            method,
            threshold,
            construction,
            model_source,
            model,
            beta,
            nas,
            out,
        } => {
            let config = QConfig::new(beta, nas.into()).map_err(Failure::usage)?;
            let flags_model = match model_source {
                ModelSource::Flags => Some(model.build()?),
                ModelSource::Fitted => None,
            };
            let train_sample = read_labeled(&train)?;
            let target_sample = read_scores(&target)?;

            let (clf, source) = match threshold {
                Some(t) => {
                    if !t.is_finite() {
                        return Err(Failure::usage(anyhow!("--threshold must be finite")));
                    }
                    (ThresholdClassifier::new(t), "explicit".to_string())
                }
                None => {
                    let (m, tag) = match flags_model {
                        Some(m) => (m, "flags"),
                        None => (
                            empirical::fit_binormal(&train_sample)
                                .with_context(|| format!("fitting a binormal model to {}", train.display()))
                                .map_err(Failure::Data)?,
                            "fitted",
                        ),
                    };
                    let o = match construction {
                        Construction::Minimax => quantifiers::minimax_classifier(&m),
                        Construction::LocallyBest => quantifiers::locally_best_classifier(&m),
                        Construction::QOptimal => quantifiers::q_optimal_classifier(&m, config),
                    };
                    let name = match construction {
                        Construction::Minimax => "minimax".to_string(),
                        Construction::LocallyBest => "locally-best".to_string(),
                        Construction::QOptimal => format!("q-optimal(beta={beta};nas={})", nas_name(nas.into())),
                    };
                    let source = format!(
                        "{name} under {tag} model mu={} nu={} sigma={} p={}",
                        m.mu(),
                        m.nu(),
                        m.sigma(),
                        m.p()
                    );
                    (o.classifier, source)
                }
            };

            let rates = empirical::estimate_rates(&train_sample, clf)
                .with_context(|| format!("estimating rates from {}", train.display()))
                .map_err(Failure::Data)?;
            let cc = target_sample.predicted_positive_fraction(clf);
            let comment = format!(
                "quantify train={} target={} method={} threshold_source={}",
                train.display(),
                target.display(),
                if method == Method::Ac { "ac" } else { "cc" },
                source
            );
            let mut header = "threshold,tpr,fpr,n_train,n_target,cc".to_string();
            let mut row = format!(
                "{},{},{},{},{},{}",
                clf.threshold,
                rates.tpr,
                rates.fpr,
                train_sample.len(),
                target_sample.len(),
                cc
            );
            if method == Method::Ac {
                let est = empirical::quantify_sample(&target_sample, clf, rates)
                    .context("adjusting the count")
                    .map_err(Failure::Data)?;
                header.push_str(",ac,ac_clamped");
                row.push_str(&format!(",{},{}", est.ac, est.ac_clamped));
            }
            emit(&out, |w| {
                writeln!(w, "# {comment}")?;
                writeln!(w, "{header}")?;
                writeln!(w, "{row}")?;
                Ok(())
            })
        }
        Command::Oracle { trials, seed, max_atoms, out } => {
            let report = run_oracle_suite(OracleConfig { trials, seed, max_atoms }).map_err(Failure::usage)?;
            emit(&out, |w| {
                writeln!(
                    w,
                    "# oracle trials={trials} seed={seed} max_atoms={max_atoms} beta={} rng={RNG_ALGORITHM}",
                    join(&ORACLE_BETAS)
                )?;
                writeln!(
                    w,
                    "trials,tied_populations,fbeta_checks,local_bayes_checks,minimax_checks,minimax_attained,violations"
                )?;
                writeln!(
                    w,
                    "{},{},{},{},{},{},{}",
                    report.trials,
                    report.tied_populations,
                    report.fbeta_checks,
                    report.local_bayes_checks,
                    report.minimax_checks,
                    report.minimax_attained,
                    report.violations.len()
                )?;
                for v in &report.violations {
                    writeln!(
                        w,
                        "# violation suite={} trial={}: {} population={}",
                        v.suite, v.trial, v.detail, v.population
                    )?;
                }
                Ok(())
            })?;
            if report.passed() {
                Ok(())
            } else {
                Err(Failure::Violation(report.violations.len()))
            }
        }
    }
}

fn check_betas(betas: &[f64], nas: Nas) -> Result<(), Failure> {
    if betas.is_empty() {
        return Err(Failure::usage(anyhow!("--beta needs at least one value")));
    }
    for &b in betas {
        QConfig::new(b, nas.into()).map_err(Failure::usage)?;
    }
    Ok(())
}

fn join(xs: &[f64]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(";")
}

fn max_gap(t: &figures::Table) -> (f64, f64) {
    let (ws, q, mm) = (
        t.column("w").unwrap_or_default(),
        t.column("err_qopt").unwrap_or_default(),
        t.column("err_minimax").unwrap_or_default(),
    );
    ws.iter()
        .zip(q.iter().zip(&mm))
        .map(|(&w, (a, b))| (w, (a - b).abs()))
        .fold((f64::NAN, 0.0), |best, cur| if cur.1 > best.1 || best.0.is_nan() { cur } else { best })
}

fn read_labeled(path: &Path) -> Result<LabeledSample, Failure> {
    File::open(path)
        .map_err(anyhow::Error::from)
        .and_then(|f| Ok(empirical::read_labeled_csv(io::BufReader::new(f))?))
        .with_context(|| format!("reading {}", path.display()))
        .map_err(Failure::Data)
}

fn read_scores(path: &Path) -> Result<ScoreSample, Failure> {
    File::open(path)
        .map_err(anyhow::Error::from)
        .and_then(|f| Ok(empirical::read_scores_csv(io::BufReader::new(f))?))
        .with_context(|| format!("reading {}", path.display()))
        .map_err(Failure::Data)
}

fn emit(out: &OutArg, body: impl FnOnce(&mut dyn Write) -> anyhow::Result<()>) -> Result<(), Failure> {
    match &out.out {
        Some(path) => {
            let ctx = || format!("writing {}", path.display());
            let file = File::create(path).with_context(ctx).map_err(Failure::Data)?;
            let mut w = BufWriter::new(file);
            body(&mut w)
                .and_then(|()| Ok(w.flush()?))
                .with_context(ctx)
                .map_err(Failure::Data)
        }
        None => {
            let stdout = io::stdout();
            let mut w = BufWriter::new(stdout.lock());
            body(&mut w)
                .and_then(|()| Ok(w.flush()?))
                .context("writing standard output")
                .map_err(Failure::Data)
        }
    }
}
