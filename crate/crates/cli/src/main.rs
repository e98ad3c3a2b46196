use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use schlicht_cli::{
    exit_code, load_json, parse_manifest, run_manifest, scenario_from_parts, to_pretty, Manifest, Options, Status,
};

#[derive(Parser)]
#[command(name = "schlicht", version, about = "Runs schlicht scenarios and prints JSON reports")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// Tolerance for comparing numbers against an expected block.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Seeds per axis for grid-based scenarios.
    #[arg(long, global = true)]
    seeds: Option<usize>,
    /// Directory for reports, CSV artifacts and timings.json.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// JSON file (or inline JSON) with an expected verdict block.
    #[arg(long, global = true)]
    expect: Option<String>,
    /// Run manifest scenarios in parallel.
    #[arg(long, global = true)]
    parallel: bool,
    #[arg(long, global = true)]
    rng_seed: Option<u64>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Polynomial-field counterexample and figure data.
    Counterexample,
    /// Hermitian boundary singularity battery.
    Thm51 {
        /// rho spec (JSON or file); default is the saddle plus a random cubic.
        #[arg(long)]
        rho: Option<String>,
        #[arg(long, default_value_t = 0.1)]
        r: f64,
        #[arg(long)]
        refine: Option<usize>,
    },
    /// Classify a quadratic gradient field.
    Classify {
        /// `{"h": ..., "s": ...}` as JSON or a file.
        #[arg(long)]
        form: String,
    },
    /// Harmonic rectification of a level-constant ratio.
    Rectify {
        /// `{"name": ..., "params": [...]}` as JSON or a file.
        #[arg(long)]
        alpha: String,
        /// `{"x": [lo, hi], "y": [lo, hi]}`.
        #[arg(long)]
        window: String,
    },
    /// Analytic continuation of a germ along a path.
    Continue {
        #[arg(long)]
        germ: String,
        #[arg(long)]
        path: String,
    },
    /// Spectral analysis and interval check for a linear field.
    Linear {
        #[arg(long)]
        matrix: String,
        /// Orbit seed points in C^n as JSON or a file.
        #[arg(long)]
        points: String,
        #[arg(long)]
        domain: Option<String>,
        #[arg(long)]
        t_max: Option<f64>,
    },
    /// Runs every scenario of a manifest; `shipped` selects the built-in one.
    RunManifest { path: String },
}

fn single(name: &str, op: &str, params: Value) -> Result<Manifest, String> {
    Ok(Manifest {
        rng_seed: None,
        scenarios: vec![scenario_from_parts(name, op, params, None)?],
    })
}

fn build(cli: &Cli) -> Result<Manifest, String> {
    let mut m = match &cli.cmd {
        Cmd::Counterexample => single("counterexample", "counterexample", json!({}))?,
        Cmd::Thm51 { rho, r, refine } => {
            let rho = match rho {
                Some(s) => load_json(s)?,
                None => json!({"kind": "saddle_random_cubic", "max_coef": 0.05}),
            };
            single("thm51", "thm51", json!({"rho": rho, "r": r, "refine_grid": refine}))?
        }
        Cmd::Classify { form } => single("classify", "classify", json!({"form": load_json(form)?}))?,
        Cmd::Rectify { alpha, window } => single(
            "rectify",
            "rectify",
            json!({"alpha": load_json(alpha)?, "window": load_json(window)?}),
        )?,
        Cmd::Continue { germ, path } => single(
            "continue",
            "continue",
            json!({"germ": load_json(germ)?, "path": load_json(path)?}),
        )?,
        Cmd::Linear {
            matrix,
            points,
            domain,
            t_max,
        } => {
            let mut p = json!({"matrix": load_json(matrix)?, "seeds": load_json(points)?});
            if let Some(d) = domain {
                p["domain"] = load_json(d)?;
            }
            if let Some(t) = t_max {
                p["t_max"] = json!(t);
            }
            single("linear", "linear", p)?
        }
        Cmd::RunManifest { path } => {
            let v = if path == "shipped" {
                serde_json::from_str(schlicht_cli::SHIPPED_MANIFEST).map_err(|e| e.to_string())?
            } else {
                load_json(path)?
            };
            parse_manifest(v)?
        }
    };
    if let Some(e) = &cli.expect {
        let expected: schlicht_cli::Expected = serde_json::from_value(load_json(e)?).map_err(|e| format!("invalid expected block: {e}"))?;
        for s in &mut m.scenarios {
            s.expected = Some(expected.clone());
        }
    }
    Ok(m)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let manifest = match build(&cli) {
        Ok(m) => m,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(Status::InputError.exit_code());
        }
    };
    let opts = Options {
        out_dir: cli.out_dir.clone(),
        tol: cli.tol,
        seeds_per_axis: cli.seeds,
        rng_seed: cli.rng_seed,
        parallel: cli.parallel,
    };
    match run_manifest(&manifest, &opts) {
        Ok(reports) => {
            print!("{}", to_pretty(&reports));
            for r in &reports {
                if let Some(e) = &r.error {
                    eprintln!("{}: {e}", r.scenario);
                }
                if let Some(x) = r.expectation.as_ref().filter(|x| !x.met) {
                    eprintln!("{}: {}", r.scenario, x.mismatches.join("; "));
                }
            }
            ExitCode::from(exit_code(&reports))
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(Status::InputError.exit_code())
        }
    }
}
