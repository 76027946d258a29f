use std::fs;
use std::io::Write;
use std::path::Path;

use log::{info, warn};
use moikit::documents::{
    self, from_json, haar_samples, to_json, Document, FrechetRequestDoc, HigherDifferenceRequestDoc,
    KthDerivativeRequestDoc, MoiRequestDoc, MtiRequestDoc, PolyDecomposeRequestDoc, RemainderRequestDoc,
};
use moikit::harness::{convergence_in_mean_check, run_tail_bound, ConvergenceExperiment, TailBoundExperiment, TailBoundReport};
use moikit::Error;

use crate::{Command, Common, Format};

pub const EXIT_OK: u8 = 0;
pub const EXIT_INVALID: u8 = 2;
pub const EXIT_NUMERICAL: u8 = 3;
pub const EXIT_BOUND_VIOLATED: u8 = 4;

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    fn invalid(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_INVALID,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = if e.is_validation() || matches!(e, Error::Capability(_)) {
            EXIT_INVALID
        } else {
            EXIT_NUMERICAL
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

type Outcome = Result<u8, Failure>;

fn read_input(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::invalid(format!("cannot read {}: {e}", path.display())))
}

/// Write via a temporary file in the target directory and rename into place.
fn write_output(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    let fail = |e: std::io::Error| Failure {
        code: EXIT_NUMERICAL,
        message: format!("cannot write output: {e}"),
    };
    match path {
        None => std::io::stdout().write_all(text.as_bytes()).map_err(fail),
        Some(p) => {
            let dir = match p.parent() {
                Some(d) if !d.as_os_str().is_empty() => d,
                _ => Path::new("."),
            };
            let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(fail)?;
            tmp.write_all(text.as_bytes()).map_err(fail)?;
            tmp.as_file().sync_all().map_err(fail)?;
            tmp.persist(p).map_err(|e| fail(e.error))?;
            info!("wrote {}", p.display());
            Ok(())
        }
    }
}

fn json_only(c: &Common) -> Result<(), Failure> {
    if c.format == Format::Csv {
        return Err(Failure::invalid("CSV output is only available for tailbound and conv-mean"));
    }
    Ok(())
}

fn ignored_seed(c: &Common) {
    if c.seed.is_some() {
        warn!("--seed has no effect on this command");
    }
}

fn simple<Req: Document, Out: Document>(c: &Common, run: impl Fn(&Req) -> moikit::Result<Out>) -> Outcome {
    json_only(c)?;
    ignored_seed(c);
    let req: Req = from_json(&read_input(&c.input)?)?;
    let out = run(&req)?;
    write_output(c.output.as_deref(), &to_json(&out)?)?;
    Ok(EXIT_OK)
}

fn in_pool(workers: Option<usize>, f: impl FnOnce() -> Outcome + Send) -> Outcome {
    match workers {
        None => f(),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| Failure::invalid(format!("cannot start {n} workers: {e}")))?
            .install(f),
    }
}

fn tailbound(c: &Common) -> Outcome {
    let mut exp: TailBoundExperiment = from_json(&read_input(&c.input)?)?;
    if let Some(seed) = c.seed {
        exp.seed = seed;
    }
    let report = run_tail_bound(&exp)?;
    let text = match c.format {
        Format::Json => to_json(&report)?,
        Format::Csv => report.to_csv(),
    };
    write_output(c.output.as_deref(), &text)?;
    Ok(tail_status(&report))
}

/// Exit status of a written tail-bound report.
fn tail_status(report: &TailBoundReport) -> u8 {
    if report.all_satisfied {
        return EXIT_OK;
    }
    let bad: Vec<f64> = report.rows.iter().filter(|r| !r.satisfied).map(|r| r.theta).collect();
    eprintln!("moikit: bound violated at theta {bad:?}");
    EXIT_BOUND_VIOLATED
}

fn conv_mean(c: &Common) -> Outcome {
    let mut exp: ConvergenceExperiment = from_json(&read_input(&c.input)?)?;
    if let Some(seed) = c.seed {
        exp.seed = seed;
    }
    let report = convergence_in_mean_check(&exp)?;
    if !report.reaches_threshold {
        warn!("last mean is above 1e-3 of the first");
    }
    let text = match c.format {
        Format::Json => to_json(&report)?,
        Format::Csv => report.to_csv(),
    };
    write_output(c.output.as_deref(), &text)?;
    Ok(EXIT_OK)
}

fn poly_decompose(c: &Common) -> Outcome {
    json_only(c)?;
    let mut req: PolyDecomposeRequestDoc = from_json(&read_input(&c.input)?)?;
    if let Some(seed) = c.seed {
        req.seed = seed;
    }
    write_output(c.output.as_deref(), &to_json(&req.run()?)?)?;
    Ok(EXIT_OK)
}

pub fn dispatch(cmd: Command) -> Outcome {
    match cmd {
        Command::MoiEval(c) => in_pool(c.workers, || simple(&c, MoiRequestDoc::run)),
        Command::Frechet(c) => in_pool(c.workers, || simple(&c, FrechetRequestDoc::run)),
        Command::KthDeriv(c) => in_pool(c.workers, || simple(&c, KthDerivativeRequestDoc::run)),
        Command::HigherDiff(c) => in_pool(c.workers, || simple(&c, HigherDifferenceRequestDoc::run)),
        Command::Remainder(c) => in_pool(c.workers, || simple(&c, RemainderRequestDoc::run)),
        Command::MtiEval(c) => in_pool(c.workers, || simple(&c, MtiRequestDoc::run)),
        Command::Tailbound(c) => in_pool(c.workers, || tailbound(&c)),
        Command::ConvMean(c) => in_pool(c.workers, || conv_mean(&c)),
        Command::PolyDecompose(c) => in_pool(c.workers, || poly_decompose(&c)),
        Command::Haar(h) => {
            let doc = haar_samples(h.dim, h.count, h.seed)?;
            write_output(h.output.as_deref(), &to_json(&doc)?)?;
            Ok(EXIT_OK)
        }
        Command::Validate(v) => {
            let report = documents::validate_document(&read_input(&v.input)?);
            for d in &report.diagnostics {
                eprintln!("moikit: {d}");
            }
            write_output(v.output.as_deref(), &to_json(&report)?)?;
            Ok(EXIT_OK)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn violated_report_exits_four() {
        let exp: TailBoundExperiment =
            from_json(&fs::read_to_string("../../configs/tailbound/kth_derivative.json").unwrap()).unwrap();
        let mut exp = exp;
        exp.samples = 1000;
        let mut report = run_tail_bound(&exp).unwrap();
        assert_eq!(tail_status(&report), EXIT_OK);
        report.rows[0].satisfied = false;
        report.all_satisfied = false;
        assert_eq!(tail_status(&report), EXIT_BOUND_VIOLATED);
    }

    #[test]
    fn error_classes_map_to_exit_codes() {
        assert_eq!(Failure::from(Error::Parameter("x".into())).code, EXIT_INVALID);
        assert_eq!(Failure::from(Error::Capability("x".into())).code, EXIT_INVALID);
        assert_eq!(Failure::from(Error::Domain("x".into())).code, EXIT_NUMERICAL);
        assert_eq!(Failure::from(Error::Eigensolver { residual: 1.0 }).code, EXIT_NUMERICAL);
        let aborted = Error::TooManyAborted { aborted: 5, total: 100, first: String::new() };
        assert_eq!(Failure::from(aborted).code, EXIT_NUMERICAL);
    }
}
