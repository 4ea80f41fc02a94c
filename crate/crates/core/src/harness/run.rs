use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::time::Instant;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::harness::config::{Plan, Suite};
use crate::harness::suites::{execute, Check, SuiteOutput};
use crate::swap::monte_carlo::GapReport;

/// Record of one run. Everything except `wall_clock_seconds` is a function of
/// the plan.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub suite: Suite,
    pub version: &'static str,
    #[serde(serialize_with = "as_object")]
    pub config: Vec<(&'static str, String)>,
    pub wall_clock_seconds: f64,
    pub reports: Vec<GapReport>,
    pub checks: Vec<Check>,
    pub rows: usize,
    pub output: Option<PathBuf>,
}

fn as_object<S: serde::Serializer>(pairs: &[(&'static str, String)], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_map(pairs.iter().map(|(k, v)| (k, v)))
}

impl RunManifest {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Executes the suite on a pool of `plan.threads` workers (or the global pool).
pub fn execute_with_threads(plan: &Plan) -> Result<SuiteOutput> {
    match plan.threads {
        None => execute(plan),
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| Error::InvalidParameter(format!("cannot start {t} worker threads: {e}")))?
            .install(|| execute(plan)),
    }
}

/// Runs the suite and writes its table to `plan.out`, or to `stdout` when no
/// path is set.
pub fn run(plan: &Plan, stdout: &mut dyn Write) -> Result<RunManifest> {
    let start = Instant::now();
    let out = execute_with_threads(plan)?;
    match &plan.out {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            out.table.write(plan.format, &mut w)?;
            w.flush()?;
        }
        None => out.table.write(plan.format, &mut *stdout)?,
    }
    Ok(RunManifest {
        suite: plan.suite,
        version: env!("CARGO_PKG_VERSION"),
        config: plan.echo(),
        wall_clock_seconds: start.elapsed().as_secs_f64(),
        reports: out.reports,
        checks: out.checks,
        rows: out.table.rows.len(),
        output: plan.out.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::ExperimentConfig;

    #[test]
    fn one_failed_check_fails_the_run() {
        let plan = ExperimentConfig { grid: Some(vec![8]), ..Default::default() }.validate(Suite::BoundTable).unwrap();
        let mut sink = Vec::new();
        let mut m = run(&plan, &mut sink).unwrap();
        assert!(m.passed());
        assert_eq!(m.rows, sink.iter().filter(|&&b| b == b'\n').count() - 1);
        m.checks.push(Check { label: "x".into(), passed: true });
        m.checks.push(Check { label: "y".into(), passed: false });
        assert!(!m.passed());
    }

    #[test]
    fn thread_count_does_not_change_results() {
        let base = ExperimentConfig { size: Some(12), replicates: Some(400), ..Default::default() };
        let run_with = |t| {
            let plan = ExperimentConfig { threads: Some(t), ..base.clone() }.validate(Suite::ErdosKac).unwrap();
            let mut sink = Vec::new();
            run(&plan, &mut sink).unwrap();
            sink
        };
        assert_eq!(run_with(1), run_with(3));
    }
}
