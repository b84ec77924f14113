mod manifest;
mod run;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nlform::instance::{random_instance, GenerateOptions, Instance};
use nlform::lattice::truncated_window;
use nlform::WeightFunction;
use serde::Deserialize;
use serde_json::json;

use manifest::{peek_kind, CliError, CliResult, Kind};
use run::{Outcome, Overrides};

/// Overrides the output directory of every subcommand.
const OUT_ENV: &str = "NLFORM_OUT";
const DEFAULT_OUT: &str = "nlform-out";

#[derive(Parser)]
#[command(name = "nlform", version, about = "Verify isoperimetric, super-Poincare and Orlicz-Sobolev inequalities for non-local forms")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Experiment manifest (JSON).
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; beats the environment and the manifest.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Slack tolerance for inequality checks.
    #[arg(long)]
    tol: Option<f64>,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    jobs: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Theorem suites on finite instances (finite-verify, theorem-batch).
    Verify(Common),
    /// Isoperimetric profiles by subset enumeration (finite-verify, theorem-batch).
    Enumerate(Common),
    /// Subordinated lattice kernels and their decay (lattice-subordination).
    Subordinate(Common),
    /// Radial scaling exponents and the dominance dichotomy (sharpness-scan).
    Sharpness(Common),
    /// Weighted stable-like forms (perturbed-threshold).
    Perturbed(Common),
    /// Write instance files.
    Generate(GenerateArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum GenKind {
    FiniteSpace,
    LatticeWindow,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, value_enum)]
    kind: GenKind,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    count: usize,
    /// Generator parameters: inline JSON or a path to a JSON file.
    #[arg(long)]
    params: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct WindowParams {
    n: usize,
    side: usize,
}

fn out_dir(flag: Option<PathBuf>, manifest: Option<PathBuf>) -> PathBuf {
    if let Some(p) = flag {
        return p;
    }
    if let Some(p) = std::env::var_os(OUT_ENV).filter(|v| !v.is_empty()) {
        return PathBuf::from(p);
    }
    manifest.unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
}

fn write_files(dir: &Path, files: &std::collections::BTreeMap<String, String>) -> CliResult<()> {
    for (rel, contents) in files {
        let path = dir.join(rel);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).map_err(|e| CliError::Io(format!("{}: {e}", parent.display())))?;
        }
        std::fs::write(&path, contents).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    }
    Ok(())
}

fn run_manifest(c: Common, allowed: &[Kind], f: impl FnOnce(Kind, &str, &Path, &Overrides) -> CliResult<Outcome> + Send) -> CliResult<bool> {
    let text = std::fs::read_to_string(&c.manifest).map_err(|e| CliError::Validation(format!("manifest {}: {e}", c.manifest.display())))?;
    let base = c.manifest.parent().map(Path::to_path_buf).unwrap_or_default();
    let kind = peek_kind(&text)?;
    if !allowed.contains(&kind) {
        let names: Vec<&str> = allowed.iter().map(|k| k.name()).collect();
        return Err(CliError::Validation(format!("manifest kind {} is not handled here; expected {}", kind.name(), names.join(" or "))));
    }
    let pool = rayon::ThreadPoolBuilder::new().num_threads(c.jobs).build().map_err(|e| CliError::Io(e.to_string()))?;
    let ov = Overrides { seed: c.seed, tol: c.tol };
    let outcome = pool.install(|| f(kind, &text, &base, &ov))?;
    let dir = out_dir(c.out, outcome.output_dir.clone());
    write_files(&dir, &outcome.files)?;
    for (label, r) in &outcome.reports {
        let status = if r.pass { "PASS" } else { "FAIL" };
        println!("{status} {label} {} worst scaled slack {:e}", r.theorem, r.worst_slack());
    }
    println!("wrote {} files to {}", outcome.files.len(), dir.display());
    Ok(outcome.pass())
}

fn generate(a: GenerateArgs) -> CliResult<bool> {
    let params = match &a.params {
        None => serde_json::Value::Object(Default::default()),
        Some(s) if s.trim_start().starts_with('{') => serde_json::from_str(s).map_err(|e| CliError::Validation(format!("--params: {e}")))?,
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| CliError::Validation(format!("--params {p}: {e}")))?;
            serde_json::from_str(&text).map_err(|e| CliError::Validation(format!("--params {p}: {e}")))?
        }
    };
    let dir = out_dir(a.out, None);
    let mut files = std::collections::BTreeMap::new();
    let mut index = Vec::new();
    match a.kind {
        GenKind::FiniteSpace => {
            let opts: GenerateOptions = serde_json::from_value(params).map_err(|e| CliError::Validation(format!("--params: {e}")))?;
            opts.validate().map_err(|e| CliError::Validation(format!("--params: {e}")))?;
            for i in 0..a.count {
                let seed = a.seed.wrapping_add(i as u64);
                let inst = random_instance(&opts, seed);
                let name = format!("instance-{i:03}.json");
                files.insert(name.clone(), serde_json::to_string_pretty(&inst.to_doc()).expect("serializable") + "\n");
                index.push(json!({"file": name, "seed": seed, "points": inst.len(), "killing": inst.potential.is_some()}));
            }
            files.insert("index.json".into(), serde_json::to_string_pretty(&json!({"kind": "finite-space", "options": opts, "instances": index})).expect("serializable") + "\n");
        }
        GenKind::LatticeWindow => {
            let p: WindowParams = serde_json::from_value(params).map_err(|e| CliError::Validation(format!("--params: {e}")))?;
            if !(1..=3).contains(&p.n) || p.side < 2 || p.side.pow(p.n as u32) > 4096 {
                return Err(CliError::Validation("--params: need n in 1..=3, side >= 2 and side^n <= 4096".into()));
            }
            let (space, kernel) = truncated_window(p.n, p.side).map_err(|e| CliError::Validation(format!("--params: {e}")))?;
            let m = space.len();
            let inst = Instance { space, kernel, gamma: WeightFunction::ones(m), potential: None };
            let name = format!("window-n{}-side{}.json", p.n, p.side);
            files.insert(name.clone(), serde_json::to_string_pretty(&inst.to_doc()).expect("serializable") + "\n");
            index.push(json!({"file": name, "points": m}));
            files.insert("index.json".into(), serde_json::to_string_pretty(&json!({"kind": "lattice-window", "n": p.n, "side": p.side, "instances": index})).expect("serializable") + "\n");
        }
    }
    write_files(&dir, &files)?;
    println!("wrote {} files to {}", files.len(), dir.display());
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let finite = [Kind::FiniteVerify, Kind::TheoremBatch];
    let result = match cli.command {
        Command::Verify(c) => run_manifest(c, &finite, run::verify),
        Command::Enumerate(c) => run_manifest(c, &finite, run::enumerate),
        Command::Subordinate(c) => run_manifest(c, &[Kind::LatticeSubordination], |_, t, b, o| run::subordinate(t, b, o)),
        Command::Sharpness(c) => run_manifest(c, &[Kind::SharpnessScan], |_, t, b, o| run::sharpness(t, b, o)),
        Command::Perturbed(c) => run_manifest(c, &[Kind::PerturbedThreshold], |_, t, b, o| run::perturbed(t, b, o)),
        Command::Generate(a) => generate(a),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
