//! Command-line front end: parse -> validate -> analyze -> emit/verify ->
//! report. Exit codes: 0 all checks pass, 1 security findings (violated or
//! unproven queries, uncovered root attacks), 2 usage, parse or validation
//! errors.

use clap::{Parser, Subcommand};
use ssec_core::diag::has_errors;
use ssec_core::dy::Bounds;
use ssec_core::model::trace_requirements;
use ssec_core::report::{
    analyze_attacks, build_report, check, export_pi, render_attacks, render_partitioning,
    render_report_text, render_traceability, render_verdicts, run_verification, ExternalProverif,
};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "ssec", version, about = "Analyze, verify and estimate security-extended system models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct BoundArgs {
    /// Protocol sessions to instantiate (default 2, env SSEC_SESSIONS)
    #[arg(long)]
    sessions: Option<usize>,
    /// Step budget per block instance (default 40, env SSEC_STEPS)
    #[arg(long)]
    steps: Option<usize>,
    /// Attacker term depth bound (default 6, env SSEC_DEPTH)
    #[arg(long)]
    depth: Option<usize>,
    /// State budget before the run is flagged inconclusive
    #[arg(long)]
    max_states: Option<usize>,
}

impl BoundArgs {
    fn resolve(&self) -> Result<Bounds, String> {
        let default = Bounds::default();
        let from_env = |name: &str| -> Result<Option<usize>, String> {
            match std::env::var(name) {
                Ok(v) => v
                    .parse::<usize>()
                    .map(Some)
                    .map_err(|_| format!("{name} must be a positive integer, got `{v}`")),
                Err(_) => Ok(None),
            }
        };
        let sessions = match self.sessions {
            Some(s) => s,
            None => from_env("SSEC_SESSIONS")?.unwrap_or(default.sessions),
        };
        let steps = match self.steps {
            Some(s) => s,
            None => from_env("SSEC_STEPS")?.unwrap_or(default.steps),
        };
        let depth = match self.depth {
            Some(d) => d,
            None => from_env("SSEC_DEPTH")?.unwrap_or(default.depth),
        };
        let max_states = match self.max_states {
            Some(m) => m,
            None => from_env("SSEC_MAX_STATES")?.unwrap_or(default.max_states),
        };
        if sessions == 0 || steps == 0 || depth == 0 || max_states == 0 {
            return Err("bounds must be positive".to_string());
        }
        Ok(Bounds {
            sessions,
            steps,
            depth,
            max_states,
        })
    }
}

#[derive(Subcommand)]
enum Command {
    /// Parse the model files and check well-formedness
    Check {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        /// Print diagnostics as JSON
        #[arg(long)]
        json: bool,
    },
    /// Check attack coverage and enumerate attack orderings
    Attacks {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        /// Maximum orderings listed per root attack
        #[arg(long, default_value_t = 4)]
        traces: usize,
        #[arg(long)]
        json: bool,
    },
    /// Prove or refute the declared security properties within bounds
    Verify {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        #[command(flatten)]
        bounds: BoundArgs,
        #[arg(long)]
        json: bool,
    },
    /// Emit the applied-pi specification for external proving
    #[command(name = "emit-pv")]
    EmitPv {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        /// Output path (defaults to the first input with extension .pv)
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Emit injective correspondence queries
        #[arg(long)]
        injective: bool,
        /// Run an externally installed ProVerif binary on the output
        #[arg(long)]
        external_proverif: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Estimate bus load, processor utilization and path latencies
    Estimate {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Run every analysis and write one consolidated JSON report
    Report {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        /// Report file (defaults to the first input with extension .report.json)
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[command(flatten)]
        bounds: BoundArgs,
        #[arg(long)]
        injective: bool,
        /// Run an externally installed ProVerif binary and embed its verdicts
        #[arg(long)]
        external_proverif: Option<PathBuf>,
        /// Maximum orderings listed per root attack
        #[arg(long, default_value_t = 4)]
        traces: usize,
        #[arg(long)]
        json: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match run(cli.command) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            2
        }
    };
    ExitCode::from(code)
}

fn print_json<T: serde::Serialize>(value: &T) {
    println!("{}", serde_json::to_string_pretty(value).expect("serializable"));
}

/// Load + validate, or fail with exit 2 semantics (diagnostics printed).
fn checked_model(files: &[PathBuf], json: bool) -> Result<(ssec_core::Model, Vec<ssec_core::Diagnostic>), u8> {
    let (model, diags) = check(files);
    if has_errors(&diags) {
        if json {
            print_json(&diags);
        } else {
            for d in &diags {
                eprintln!("{d}");
            }
        }
        return Err(2);
    }
    Ok((model, diags))
}

fn run(command: Command) -> Result<u8, String> {
    match command {
        Command::Check { files, json } => {
            let (_, diags) = check(&files);
            if json {
                print_json(&diags);
            } else {
                for d in &diags {
                    println!("{d}");
                }
                let errors = diags.iter().filter(|d| d.is_error()).count();
                let warnings = diags.len() - errors;
                println!(
                    "{}: {} error(s), {} warning(s)",
                    if errors == 0 { "ok" } else { "invalid" },
                    errors,
                    warnings
                );
            }
            Ok(if has_errors(&diags) { 2 } else { 0 })
        }
        Command::Attacks { files, traces, json } => {
            let (model, diags) = match checked_model(&files, json) {
                Ok(x) => x,
                Err(code) => return Ok(code),
            };
            let analysis = analyze_attacks(&model, traces);
            if json {
                print_json(&analysis);
            } else {
                for d in &diags {
                    println!("{d}");
                }
                let mut out = String::new();
                render_attacks(&mut out, &analysis);
                let trace_report = trace_requirements(&model);
                render_traceability(&mut out, &trace_report);
                print!("{out}");
            }
            Ok(if analysis.coverage.uncovered > 0 { 1 } else { 0 })
        }
        Command::Verify { files, bounds, json } => {
            let bounds = bounds.resolve()?;
            let (model, diags) = match checked_model(&files, json) {
                Ok(x) => x,
                Err(code) => return Ok(code),
            };
            match run_verification(&model, &bounds) {
                Ok(outcome) => {
                    if json {
                        print_json(&outcome);
                    } else {
                        for d in &diags {
                            println!("{d}");
                        }
                        let mut out = String::new();
                        render_verdicts(&mut out, &outcome);
                        print!("{out}");
                    }
                    Ok(if outcome.all_satisfied() { 0 } else { 1 })
                }
                Err(errs) => {
                    for d in &errs {
                        eprintln!("{d}");
                    }
                    Ok(2)
                }
            }
        }
        Command::EmitPv {
            files,
            output,
            injective,
            external_proverif,
            json,
        } => {
            let (model, _) = match checked_model(&files, json) {
                Ok(x) => x,
                Err(code) => return Ok(code),
            };
            let text = match export_pi(&model, injective) {
                Ok(t) => t,
                Err(errs) => {
                    for d in &errs {
                        eprintln!("{d}");
                    }
                    return Ok(2);
                }
            };
            let path = output.unwrap_or_else(|| files[0].with_extension("pv"));
            std::fs::write(&path, &text).map_err(|e| format!("cannot write `{}`: {e}", path.display()))?;
            let external = external_proverif
                .as_deref()
                .map(|bin| run_external_proverif(bin, &path));
            if json {
                #[derive(serde::Serialize)]
                struct EmitOutcome<'a> {
                    output: String,
                    bytes: usize,
                    self_check: &'a str,
                    #[serde(skip_serializing_if = "Option::is_none")]
                    external: Option<ExternalProverif>,
                }
                print_json(&EmitOutcome {
                    output: path.display().to_string(),
                    bytes: text.len(),
                    self_check: "passed",
                    external,
                });
            } else {
                println!("wrote {} ({} bytes); self-check passed", path.display(), text.len());
                if let Some(ext) = &external {
                    println!("external prover ({}): {}", ext.command, ext.status);
                    for r in &ext.results {
                        println!("  {r}");
                    }
                }
            }
            Ok(0)
        }
        Command::Estimate { files, json } => {
            let (model, diags) = match checked_model(&files, json) {
                Ok(x) => x,
                Err(code) => return Ok(code),
            };
            let (report, warnings) = ssec_core::partition::estimate(&model);
            if json {
                print_json(&report);
            } else {
                for d in diags.iter().chain(warnings.iter()) {
                    println!("{d}");
                }
                let mut out = String::new();
                render_partitioning(&mut out, &report);
                print!("{out}");
            }
            Ok(0)
        }
        Command::Report {
            files,
            output,
            bounds,
            injective,
            external_proverif,
            traces,
            json,
        } => {
            let bounds = bounds.resolve()?;
            let (model, diags) = match checked_model(&files, json) {
                Ok(x) => x,
                Err(code) => return Ok(code),
            };
            let inputs: Vec<String> = files.iter().map(|f| f.display().to_string()).collect();
            let mut report = build_report(inputs, &model, diags, &bounds, injective, traces);
            if let Some(bin) = external_proverif.as_deref() {
                if let Ok(text) = export_pi(&model, injective) {
                    let tmp = std::env::temp_dir().join(format!("ssec_report_{}.pv", std::process::id()));
                    if std::fs::write(&tmp, &text).is_ok() {
                        let ext = run_external_proverif(bin, &tmp);
                        if let Some(pi) = report.pi_export.as_mut() {
                            pi.external = Some(ext);
                        }
                        let _ = std::fs::remove_file(&tmp);
                    }
                }
            }
            let path = output.unwrap_or_else(|| files[0].with_extension("report.json"));
            let json_text = serde_json::to_string_pretty(&report).expect("serializable");
            std::fs::write(&path, &json_text)
                .map_err(|e| format!("cannot write `{}`: {e}", path.display()))?;
            if json {
                println!("{json_text}");
            } else {
                print!("{}", render_report_text(&report));
                println!("report written to {}", path.display());
            }
            Ok(if report.has_findings() { 1 } else { 0 })
        }
    }
}

/// Best effort: a missing or failing external binary is reported, never
/// fatal, and never affects the exit code.
fn run_external_proverif(binary: &Path, spec: &Path) -> ExternalProverif {
    let command = format!("{} {}", binary.display(), spec.display());
    match std::process::Command::new(binary).arg(spec).output() {
        Err(e) => ExternalProverif {
            command,
            status: format!("not run ({e})"),
            results: Vec::new(),
        },
        Ok(out) => {
            let stdout = String::from_utf8_lossy(&out.stdout);
            let results: Vec<String> = stdout
                .lines()
                .filter(|l| l.starts_with("RESULT"))
                .map(|l| l.trim().to_string())
                .collect();
            ExternalProverif {
                command,
                status: if out.status.success() {
                    "completed".to_string()
                } else {
                    format!("exited with {}", out.status)
                },
                results,
            }
        }
    }
}
