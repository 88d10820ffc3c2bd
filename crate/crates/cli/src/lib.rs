//! Job execution, file formats and acceptance checks behind the `symcap`
//! binary.

pub mod jobs;
pub mod output;
pub mod params;
pub mod validate;

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::Context;

use jobs::Output;
use output::{output_paths, write_csv, Manifest};
use params::{Job, Overrides, Params};

/// Exit status for a failed run: 2 for numerical-domain failures, 1 for
/// everything else (bad input, IO).
pub fn exit_code(err: &anyhow::Error) -> u8 {
    let numerical = err.chain().any(|e| {
        matches!(
            e.downcast_ref::<symcap_core::Error>(),
            Some(symcap_core::Error::NumericalDomain(_))
        )
    });
    if numerical {
        2
    } else {
        1
    }
}

/// Files written by a run and the summary printed for `bound`.
#[derive(Clone, Debug, PartialEq)]
pub struct RunOutcome {
    pub manifest: PathBuf,
    pub csv: Option<PathBuf>,
    pub summary: Option<String>,
}

/// Resolves parameters for `job` from its defaults and `overrides`.
pub fn resolve(job: &Job, overrides: &Overrides) -> anyhow::Result<Params> {
    Ok(overrides.apply(jobs::defaults(job)?))
}

/// Runs `job` with fully resolved parameters and writes its CSV (if any) and
/// manifest into `out_dir`.
pub fn execute(job: Job, params: Params, out_dir: &Path) -> anyhow::Result<RunOutcome> {
    let start = Instant::now();
    let result = jobs::run(&job, &params)?;
    fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    let (csv_path, manifest_path) = output_paths(out_dir, &job.stem());
    let mut manifest = Manifest::new(job, params);
    let (csv, summary) = match result {
        Output::Rows(rows) => {
            write_csv(&csv_path, &rows)?;
            manifest.output = csv_path
                .file_name()
                .map(|n| n.to_string_lossy().into_owned());
            (Some(csv_path), None)
        }
        Output::Value(value, summary) => {
            manifest.value = Some(value);
            (None, Some(summary))
        }
    };
    manifest.wall_time_s = start.elapsed().as_secs_f64();
    manifest.write(&manifest_path)?;
    Ok(RunOutcome {
        manifest: manifest_path,
        csv,
        summary,
    })
}

/// Re-runs the job stored in a manifest with its recorded parameters.
pub fn replay(manifest: &Path, out_dir: &Path) -> anyhow::Result<RunOutcome> {
    let m = Manifest::read(manifest)?;
    execute(m.job, m.params, out_dir)
}
