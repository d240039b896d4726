//! Run manifests and the `repro` replay.

use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::commands::{self, Executed};
use crate::{report_error, Command, ReproArgs, EXIT_FAILURE, EXIT_SUCCESS, EXIT_USAGE};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileDigest {
    pub path: PathBuf,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema: String,
    pub tool: String,
    pub version: String,
    pub subcommand: String,
    pub argv: Vec<String>,
    /// Every flag after defaults are filled in, inputs made absolute.
    pub command: Command,
    pub seeds: Vec<u64>,
    pub threads: Option<usize>,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
    pub exit_code: i32,
    pub wall_clock_secs: f64,
}

pub fn sha256_file(path: &Path) -> anyhow::Result<String> {
    let mut file = fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let mut hasher = Sha256::new();
    let mut buf = [0u8; 1 << 16];
    loop {
        let read = file.read(&mut buf)?;
        if read == 0 {
            break;
        }
        hasher.update(&buf[..read]);
    }
    Ok(hex::encode(hasher.finalize()))
}

fn digests(paths: &[PathBuf]) -> anyhow::Result<Vec<FileDigest>> {
    paths
        .iter()
        .map(|p| {
            Ok(FileDigest {
                path: p.clone(),
                sha256: sha256_file(p)?,
            })
        })
        .collect()
}

/// `<out>.manifest.json` next to the primary output.
pub fn manifest_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

pub(crate) fn run_recorded(mut command: Command, argv: Vec<String>, threads: Option<usize>) -> i32 {
    if let Command::Repro(args) = &command {
        return match repro(args) {
            Ok(code) => code,
            Err(e) => {
                report_error("input", format!("{e:#}"));
                EXIT_USAGE
            }
        };
    }
    let inputs = match commands::absolutize_inputs(&mut command) {
        Ok(i) => i,
        Err(e) => {
            report_error("input", format!("{e:#}"));
            return EXIT_USAGE;
        }
    };
    let start = Instant::now();
    let executed = match commands::execute(&command) {
        Ok(x) => x,
        Err(e) => {
            report_error("input", format!("{e:#}"));
            return EXIT_USAGE;
        }
    };
    let wall = start.elapsed().as_secs_f64();
    let Executed {
        code,
        outputs,
        seeds,
    } = executed;
    let Some(primary) = outputs.first() else {
        return code;
    };
    let manifest = (|| -> anyhow::Result<()> {
        let m = Manifest {
            schema: "manifest/1".into(),
            tool: "hyperpack".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            subcommand: command.name().into(),
            argv,
            seeds,
            threads,
            inputs: digests(&inputs)?,
            outputs: digests(&outputs)?,
            exit_code: code,
            wall_clock_secs: wall,
            command,
        };
        let path = manifest_path(primary);
        fs::write(&path, serde_json::to_string_pretty(&m)? + "\n")
            .with_context(|| format!("writing {}", path.display()))
    })();
    match manifest {
        Ok(()) => code,
        Err(e) => {
            report_error("runtime", format!("{e:#}"));
            EXIT_USAGE
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReproOutput {
    pub path: PathBuf,
    pub rerun: PathBuf,
    pub expected: String,
    pub actual: Option<String>,
    pub identical: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReproReport {
    pub schema: String,
    pub manifest: PathBuf,
    pub inputs_unchanged: bool,
    pub expected_exit_code: i32,
    pub exit_code: i32,
    pub outputs: Vec<ReproOutput>,
    pub reproduced: bool,
}

pub fn read_manifest(path: &Path) -> anyhow::Result<Manifest> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let m: Manifest =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    if m.schema != "manifest/1" {
        bail!("unsupported manifest schema `{}`", m.schema);
    }
    Ok(m)
}

fn repro(args: &ReproArgs) -> anyhow::Result<i32> {
    let m = read_manifest(&args.manifest)?;
    let inputs_unchanged = m
        .inputs
        .iter()
        .all(|d| sha256_file(&d.path).is_ok_and(|s| s == d.sha256));
    let tmp;
    let dir = match &args.keep {
        Some(d) => {
            fs::create_dir_all(d)?;
            d.clone()
        }
        None => {
            tmp = tempfile::tempdir()?;
            tmp.path().to_path_buf()
        }
    };
    let mut command = m.command.clone();
    let reruns = commands::redirect_outputs(&mut command, &dir);
    let executed = commands::execute(&command)?;
    if executed.outputs.len() != m.outputs.len() {
        bail!(
            "re-run wrote {} outputs, manifest lists {}",
            executed.outputs.len(),
            m.outputs.len()
        );
    }
    let outputs: Vec<ReproOutput> = m
        .outputs
        .iter()
        .zip(&reruns)
        .map(|(d, rerun)| {
            let actual = sha256_file(rerun).ok();
            ReproOutput {
                path: d.path.clone(),
                rerun: rerun.clone(),
                identical: actual.as_deref() == Some(d.sha256.as_str()),
                expected: d.sha256.clone(),
                actual,
            }
        })
        .collect();
    let reproduced =
        inputs_unchanged && executed.code == m.exit_code && outputs.iter().all(|o| o.identical);
    let report = ReproReport {
        schema: "repro/1".into(),
        manifest: args.manifest.clone(),
        inputs_unchanged,
        expected_exit_code: m.exit_code,
        exit_code: executed.code,
        outputs,
        reproduced,
    };
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(if reproduced {
        EXIT_SUCCESS
    } else {
        EXIT_FAILURE
    })
}
