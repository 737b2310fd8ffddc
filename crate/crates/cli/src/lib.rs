//! Command-line front end. [`execute`] runs one invocation and returns its
//! exit status and output.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Serialize;

use gasket_lab::anchored::AnchoredError;
use gasket_lab::branched_cover::{validate_core, CoreSpec, CoverError, Tower, MAX_DEPTH};
use gasket_lab::certificate::{compare, core_certificate, CoreCertificate};
use gasket_lab::export::{Artifact, ExportError, ExporterRegistry};
use gasket_lab::packing::{generate_apollonian, packing_certificate, PackingCertificate, PackingError};
use gasket_lab::per2::{enumerate_small_cores, Per2Core, Per2Error};
use gasket_lab::plane_graph::{is_bipartite, Bipartition, DotStyle};

#[derive(Parser, Debug)]
#[command(name = "gasket-lab", version, about = "Fatou graphs from finite cores, and Apollonian packings")]
struct Cli {
    /// Output format: json, dot or svg.
    #[arg(long, global = true, default_value = "json")]
    format: String,
    /// Write to this path instead of stdout (a directory for `iterate`).
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    /// Leave out timestamps.
    #[arg(long, global = true)]
    deterministic: bool,
    /// Worker threads.
    #[arg(long, global = true, env = "GASKET_LAB_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check a core against every validation rule.
    Validate { core: PathBuf },
    /// Build the tower of pullbacks and export its levels.
    Iterate {
        core: PathBuf,
        #[arg(long, default_value_t = 3)]
        depth: usize,
    },
    /// Full certificate for a quadratic core.
    Certify {
        core: PathBuf,
        #[arg(long, default_value_t = 3)]
        depth: usize,
    },
    /// List every valid quadratic core up to a size.
    EnumerateCores {
        #[arg(long, default_value_t = 8)]
        max_vertices: usize,
    },
    /// Generate an Apollonian packing and certify its contact graph.
    Apollonian {
        #[arg(long, default_value = "-1,2,2,3", allow_hyphen_values = true)]
        root: String,
        #[arg(long, default_value_t = 100.0)]
        bound: f64,
        /// Also write the certificate here when the format is not json.
        #[arg(long)]
        certificate: Option<PathBuf>,
    },
    /// Compare a core certificate with a packing certificate.
    Compare { core_certificate: PathBuf, packing_certificate: PathBuf },
}

/// A failure reported as `{"error": code, "message": ..}` on stderr.
#[derive(Debug)]
struct Failure {
    code: String,
    message: String,
}

impl Failure {
    fn new(code: impl Into<String>, message: impl Into<String>) -> Failure {
        Failure { code: code.into(), message: message.into() }
    }
}

macro_rules! failure_from {
    ($($t:ty),*) => {$(
        impl From<$t> for Failure {
            fn from(e: $t) -> Failure {
                Failure::new(e.code(), e.to_string())
            }
        }
    )*};
}

failure_from!(CoverError, Per2Error, AnchoredError, PackingError, ExportError);

impl From<gasket_lab::branched_cover::CoreError> for Failure {
    fn from(e: gasket_lab::branched_cover::CoreError) -> Failure {
        Failure::new(e.code(), e.to_string())
    }
}

/// Outcome of a command: the checks it ran either all passed or not.
enum Outcome {
    Pass,
    ChecksFailed,
}

fn read_input(path: &Path) -> Result<String, Failure> {
    if !path.is_file() {
        return Err(Failure::new("InputNotFound", format!("{} is not a readable file", path.display())));
    }
    fs::read_to_string(path).map_err(|e| Failure::new("Io", format!("{}: {e}", path.display())))
}

fn emit(stdout: &mut String, out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Failure::new("Io", format!("{}: {e}", p.display()))),
        None => {
            stdout.push_str(text);
            Ok(())
        }
    }
}

fn to_json<T: Serialize>(v: &T) -> serde_json::Value {
    serde_json::to_value(v).expect("report serializes")
}

fn check_depth(depth: usize) -> Result<(), Failure> {
    if depth > MAX_DEPTH {
        return Err(CoverError::DepthExceeded(depth).into());
    }
    Ok(())
}

fn parse_root(s: &str) -> Result<[f64; 4], Failure> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|x| x.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| Failure::new("InvalidRoot", format!("`{s}`: {e}")))?;
    parts
        .try_into()
        .map_err(|_| Failure::new("InvalidRoot", format!("`{s}` needs four curvatures")))
}

fn run(cli: &Cli, stdout: &mut String) -> Result<Outcome, Failure> {
    let registry = ExporterRegistry::default();
    let exporter = registry.get(&cli.format)?;
    let out = cli.output.as_deref();
    match &cli.command {
        Command::Validate { core } => {
            let text = read_input(core)?;
            let spec = CoreSpec::from_json_str(&text)?;
            let report = validate_core(&spec);
            emit(stdout, out, &exporter.render(&Artifact::Report(&to_json(&report)))?)?;
            if let Some(f) = report.first_failure() {
                return Err(Failure::new(f.code.clone().unwrap_or_else(|| "ValidationFailed".into()), f.detail.clone()));
            }
            Ok(Outcome::Pass)
        }
        Command::Iterate { core, depth } => {
            check_depth(*depth)?;
            let spec = CoreSpec::from_json_str(&read_input(core)?)?;
            let t = Tower::build(&spec, *depth)?;
            let levels: Vec<usize> = if out.is_some() { (0..=*depth).collect() } else { vec![*depth] };
            if let Some(dir) = out {
                fs::create_dir_all(dir).map_err(|e| Failure::new("Io", format!("{}: {e}", dir.display())))?;
            }
            for k in levels {
                let g = t.level(k);
                let colors = match is_bipartite(g) {
                    Bipartition::Bipartite { color } => Some(color),
                    Bipartition::OddCycle { .. } => None,
                };
                let images = t.level_map_names(k);
                let name = format!("{}_G{k}", spec.name);
                let style = DotStyle {
                    name: &name,
                    colors: colors.as_deref(),
                    highlight: g.edge_between(t.fixed.0, t.fixed.1),
                    notes: None,
                };
                let text = exporter.render(&Artifact::Level { graph: g, style, images: Some(&images) })?;
                match out {
                    Some(dir) => emit(stdout, Some(&dir.join(format!("level_{k}.{}", exporter.extension()))), &text)?,
                    None => emit(stdout, None, &text)?,
                }
            }
            Ok(Outcome::Pass)
        }
        Command::Certify { core, depth } => {
            check_depth(*depth)?;
            if *depth == 0 {
                return Err(Failure::new("TooShallow", "certificates need depth at least 1"));
            }
            let core = Per2Core::from_json_str(&read_input(core)?)?;
            let cert = core_certificate(&core, *depth, cli.deterministic)?;
            emit(stdout, out, &exporter.render(&Artifact::Report(&to_json(&cert)))?)?;
            let ok = cert.bipartite
                && cert.classes_match_eventual_image
                && cert.siblings.verdict_ok
                && cert.arcs.iter().all(|a| a.bound_holds != Some(false))
                && cert.symmetry.iter().all(|s| !s.symmetric);
            Ok(if ok { Outcome::Pass } else { Outcome::ChecksFailed })
        }
        Command::EnumerateCores { max_vertices } => {
            let cores = enumerate_small_cores(*max_vertices)?;
            emit(stdout, out, &exporter.render(&Artifact::Report(&to_json(&cores)))?)?;
            Ok(Outcome::Pass)
        }
        Command::Apollonian { root, bound, certificate } => {
            let root = parse_root(root)?;
            let packing = generate_apollonian(root, *bound)?;
            let (contact, cert) = packing_certificate(&packing)?;
            let cert_json = to_json(&cert);
            let text = if cli.format == "json" {
                exporter.render(&Artifact::Report(&cert_json))?
            } else {
                exporter.render(&Artifact::Packing { packing: &packing, contact: &contact })?
            };
            emit(stdout, out, &text)?;
            if let Some(p) = certificate {
                let json = registry.get("json")?.render(&Artifact::Report(&cert_json))?;
                emit(stdout, Some(p), &json)?;
            }
            Ok(Outcome::Pass)
        }
        Command::Compare { core_certificate: core_path, packing_certificate: pack_path } => {
            let core: CoreCertificate = serde_json::from_str(&read_input(core_path)?)
                .map_err(|e| Failure::new("SchemaError", format!("{}: {e}", core_path.display())))?;
            let packing: PackingCertificate = serde_json::from_str(&read_input(pack_path)?)
                .map_err(|e| Failure::new("SchemaError", format!("{}: {e}", pack_path.display())))?;
            if core.kind != "core" || packing.kind != "packing" {
                return Err(Failure::new("SchemaError", "expected a core certificate then a packing certificate"));
            }
            let c = compare(&core, &packing);
            if cli.format == "json" && out.is_some() {
                emit(stdout, out, &exporter.render(&Artifact::Report(&to_json(&c)))?)?;
            } else if cli.format == "json" {
                stdout.push_str(&format!("{}\n{}\n", c.verdict, c.note));
            } else {
                return Err(ExportError::Unsupported(exporter.format(), "reports").into());
            }
            Ok(Outcome::Pass)
        }
    }
}

/// Result of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Execution {
    /// 0 on success, 1 when a requested check failed, 2 on errors.
    pub status: u8,
    pub stdout: String,
    pub stderr: String,
}

/// Runs the command line `args`, the first being the program name.
pub fn execute<I, T>(args: I) -> Execution
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let status = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            return if status == 0 {
                Execution { status, stdout: text, stderr: String::new() }
            } else {
                Execution { status, stdout: String::new(), stderr: text }
            };
        }
    };
    let mut stdout = String::new();
    if let Some(n) = cli.threads {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let (status, stderr) = match run(&cli, &mut stdout) {
        Ok(Outcome::Pass) => (0, String::new()),
        Ok(Outcome::ChecksFailed) => (1, String::new()),
        Err(f) => (2, format!("{}\n", serde_json::json!({"error": f.code, "message": f.message}))),
    };
    Execution { status, stdout, stderr }
}
