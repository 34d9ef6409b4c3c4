//! `gausscard`: command-line front end for the interpolation library.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gausscard::analysis::{inverse_transform_profile, mp_norm_bounds, DEFAULT_BUDGET};
use gausscard::cutoff::build_cutoff;
use gausscard::experiments::config::parse_h_list;
use gausscard::experiments::convergence::{run_convergence, run_logfactor_probe, run_sweep};
use gausscard::experiments::report::render_report;
use gausscard::experiments::{run_stability, run_verify, KeyValues, Operator, ReportFormat, SweepConfig, TargetFunction};
use gausscard::interpolator::{interpolate_grid_spectral, interpolate_points, Padding, SampledField, SpectralOptions};
use gausscard::lagrange::{chi_table, GridSpec};
use gausscard::norms::PNorm;
use gausscard::quasi::quasi_interpolant;
use gausscard::{Error, LatticeArray, MultiplierContext, Result};

#[derive(Parser)]
#[command(name = "gausscard", version, about = "Cardinal interpolation with Gaussian translates")]
struct Cli {
    /// Seed for every randomised step.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output file (default: stdout).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, default_value = "csv")]
    format: ReportFormat,
    /// `key = value` file; command-line flags win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate m_h or its derivatives.
    Multiplier {
        #[arg(long)]
        h: f64,
        /// Comma-separated frequencies.
        #[arg(long, allow_hyphen_values = true, value_delimiter = ',', required = true)]
        xi: Vec<f64>,
        #[arg(long, default_value_t = 0, value_parser = clap::value_parser!(u8).range(0..=2))]
        deriv: u8,
    },
    /// Lagrange coefficients and the profile of χ_h.
    Lagrange {
        #[arg(long)]
        h: f64,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=2))]
        dim: u8,
        #[arg(long, default_value_t = 16)]
        n: usize,
        #[arg(long, default_value_t = 8)]
        fine: usize,
    },
    /// Interpolate lattice data from a CSV file.
    Interp {
        #[arg(long)]
        h: f64,
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value_t = 8)]
        fine: usize,
        #[arg(long, value_enum, default_value_t = Route::Spectral)]
        route: Route,
    },
    /// Tabulate the cutoff ρ̂ and its kernel φ.
    Cutoff {
        #[arg(long, default_value_t = 1.0)]
        eps: f64,
    },
    /// Band-limited quasi-interpolant of lattice data.
    Quasi {
        #[arg(long)]
        h: f64,
        #[arg(long, default_value_t = 1.0)]
        eps: f64,
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value_t = 8)]
        fine: usize,
    },
    /// Bounds on the L_p multiplier norm of m_h.
    Analyze {
        #[arg(long, required = true)]
        h_list: String,
        #[arg(long)]
        p: PNorm,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: usize,
    },
    /// Decay profile of h·m_h^∨.
    Decay {
        #[arg(long)]
        h: f64,
        #[arg(long)]
        xmax: f64,
        #[arg(long, default_value_t = 1001)]
        samples: usize,
    },
    /// Convergence sweep over a dyadic h list.
    Sweep(SweepArgs),
    /// Stability factors Q_p(h).
    Stability(StabilityArgs),
    /// Run the invariant suite.
    Verify,
}

#[derive(Clone, Copy, ValueEnum)]
enum Route {
    Point,
    Spectral,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum SweepOperator {
    Interp,
    Quasi,
}

/// Sweep settings shared with the config file.
#[derive(Args)]
struct SharedSweep {
    #[arg(long)]
    fine: Option<usize>,
    #[arg(long)]
    box_radius: Option<f64>,
    #[arg(long)]
    padding: Option<usize>,
    #[arg(long)]
    fit_levels: Option<usize>,
    #[arg(long)]
    stability_points: Option<usize>,
}

#[derive(Args)]
struct SweepArgs {
    /// bspline<d>[:dim], gauss:<sigma>[:dim], band:<w>[:dim] or zero[:dim].
    #[arg(long)]
    target: Option<String>,
    #[arg(long)]
    p: Option<String>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    h_list: Option<String>,
    #[arg(long, value_enum)]
    operator: Option<SweepOperator>,
    /// Cutoff width for the quasi-interpolant.
    #[arg(long)]
    eps: Option<f64>,
    /// Fit normalised ratios against 1 + |ln h| (1-D).
    #[arg(long)]
    logfactor: bool,
    #[command(flatten)]
    shared: SharedSweep,
}

#[derive(Args)]
struct StabilityArgs {
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    p: Option<String>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    h_list: Option<String>,
    #[arg(long)]
    trials: Option<usize>,
    #[command(flatten)]
    shared: SharedSweep,
}

/// Named numeric columns; several tables go out as separate CSV blocks.
struct Table {
    name: &'static str,
    columns: Vec<&'static str>,
    rows: Vec<Vec<f64>>,
}

fn render_tables(tables: &[Table], format: ReportFormat) -> Result<String> {
    match format {
        ReportFormat::Csv => {
            let blocks: Vec<String> = tables
                .iter()
                .map(|t| {
                    let mut s = t.columns.join(",") + "\n";
                    for row in &t.rows {
                        s += &row.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",");
                        s.push('\n');
                    }
                    s
                })
                .collect();
            Ok(blocks.join("\n"))
        }
        ReportFormat::Json => {
            let map: serde_json::Map<String, serde_json::Value> = tables
                .iter()
                .map(|t| (t.name.to_string(), serde_json::json!({ "columns": t.columns, "rows": t.rows })))
                .collect();
            Ok(serde_json::to_string_pretty(&map)? + "\n")
        }
    }
}

fn write_output(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| with_path(e, path))?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn with_path(e: std::io::Error, path: &Path) -> Error {
    Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
}

/// Reads `j1[,j2],value` rows; a non-numeric first row is taken as a header.
fn read_lattice_csv(path: &Path) -> Result<LatticeArray> {
    let file = std::fs::File::open(path).map_err(|e| with_path(e, path))?;
    let mut reader = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_reader(file);
    let mut entries: Vec<(Vec<i64>, f64)> = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record?;
        let fields: Vec<&str> = record.iter().collect();
        let parsed: Option<Vec<i64>> = fields[..fields.len().saturating_sub(1)].iter().map(|f| f.parse().ok()).collect();
        let value = fields.last().and_then(|f| f.parse::<f64>().ok());
        match (parsed, value) {
            (Some(j), Some(v)) if !j.is_empty() => entries.push((j, v)),
            _ if line == 0 => continue,
            _ => return Err(Error::Parameter(format!("{}: row {} is not `j1[,j2],value`", path.display(), line + 1))),
        }
    }
    let dim = entries.first().map(|(j, _)| j.len()).ok_or_else(|| Error::Parameter(format!("{} holds no data", path.display())))?;
    if !(1..=2).contains(&dim) || entries.iter().any(|(j, _)| j.len() != dim) {
        return Err(Error::Parameter("data must have one or two index columns throughout".into()));
    }
    // One spare shell so compactly supported data leave a zero boundary.
    let radius = entries.iter().flat_map(|(j, _)| j.iter().map(|c| c.unsigned_abs() as usize)).max().unwrap_or(0) + 1;
    let mut values = LatticeArray::zeros(dim, radius);
    for (j, v) in entries {
        values.set(&j, v)?;
    }
    Ok(values)
}

/// Fine-grid samples as `x1[,x2],value` rows.
fn grid_rows(grid: &gausscard::GridValues) -> Vec<Vec<f64>> {
    (0..grid.data.len())
        .map(|flat| {
            let mut row = grid.point(flat);
            row.push(grid.data[flat]);
            row
        })
        .collect()
}

fn point_columns(dim: usize) -> Vec<&'static str> {
    if dim == 1 {
        vec!["x", "value"]
    } else {
        vec!["x1", "x2", "value"]
    }
}

/// The file config overlaid with explicit flags.
fn sweep_config(base: &KeyValues, shared: &SharedSweep, seed: Option<u64>) -> Result<SweepConfig> {
    let mut kv = base.clone();
    if let Some(v) = shared.fine {
        kv.set("fine_factor", v);
    }
    if let Some(v) = shared.box_radius {
        kv.set("box_radius", v);
    }
    if let Some(v) = shared.padding {
        kv.set("padding", v);
    }
    if let Some(v) = shared.fit_levels {
        kv.set("fit_levels", v);
    }
    if let Some(v) = shared.stability_points {
        kv.set("stability_points", v);
    }
    if let Some(v) = seed {
        kv.set("seed", v);
    }
    SweepConfig::from_key_values(&kv)
}

fn pick<T: std::str::FromStr>(cli: Option<T>, kv: &KeyValues, key: &str, default: T) -> Result<T> {
    match cli {
        Some(v) => Ok(v),
        None => Ok(kv.get(key)?.unwrap_or(default)),
    }
}

fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Parameter(format!("cannot start {n} threads: {e}")))?;
    }
    let kv = match &cli.config {
        Some(path) => KeyValues::load(path)?,
        None => KeyValues::default(),
    };
    let seed = match cli.seed {
        Some(s) => s,
        None => kv.get("seed")?.unwrap_or(0),
    };
    let out = cli.out.as_deref();
    let format = cli.format;
    match cli.command {
        Command::Multiplier { h, xi, deriv } => {
            let ctx = MultiplierContext::new(h, 1)?;
            let rows = xi
                .iter()
                .map(|&x| {
                    let v = match deriv {
                        0 => ctx.m(x)?,
                        1 => ctx.m_prime(x)?,
                        _ => ctx.m_second(x)?,
                    };
                    Ok(vec![x, v])
                })
                .collect::<Result<_>>()?;
            write_output(out, &render_tables(&[Table { name: "multiplier", columns: vec!["xi", "value"], rows }], format)?)
        }
        Command::Lagrange { h, dim, n, fine } => {
            let dim = dim as usize;
            let grid = GridSpec::new(h, dim, n, (0.5 * n as f64 * h).max(4.0 * h))?;
            let table = chi_table(&grid, fine)?;
            let coeffs = table.coeffs()?;
            let coeff_rows = coeffs
                .iter()
                .map(|(j, b)| j.iter().map(|&c| c as f64).chain([b]).collect())
                .collect();
            let (coeff_cols, chi_cols) =
                if dim == 1 { (vec!["j", "b_j"], vec!["x", "chi"]) } else { (vec!["j1", "j2", "b_j"], vec!["x1", "x2", "chi"]) };
            let samples = table.samples();
            let tables = [
                Table { name: "coefficients", columns: coeff_cols, rows: coeff_rows },
                Table { name: "chi", columns: chi_cols, rows: grid_rows(&samples) },
            ];
            write_output(out, &render_tables(&tables, format)?)
        }
        Command::Interp { h, data, fine, route } => {
            let values = read_lattice_csv(&data)?;
            let dim = values.dim();
            let n = values.radius();
            let grid = GridSpec::new(h, dim, 16, (2.0 * h * n as f64).max(4.0 * h) + h)?;
            let field = SampledField::new(grid, values, true)?;
            let rows = match route {
                Route::Spectral => {
                    let ctx = MultiplierContext::new(h, dim)?;
                    let opts = SpectralOptions { fine_factor: fine, padding: Padding::Auto, ..Default::default() };
                    let result = interpolate_grid_spectral(&field, &ctx, &opts)?;
                    for w in &result.warnings {
                        eprintln!("warning: {w}");
                    }
                    grid_rows(&result.grid_values())
                }
                Route::Point => {
                    let table = chi_table(&grid, fine)?;
                    let limit = field.trusted_radius();
                    let step = h / fine as f64;
                    let m = (limit / step + 1e-9).floor() as usize;
                    let side = 2 * m + 1;
                    let points: Vec<Vec<f64>> = (0..side.pow(dim as u32))
                        .map(|flat| {
                            let mut rest = flat;
                            let mut x = vec![0.0; dim];
                            for axis in (0..dim).rev() {
                                x[axis] = step * ((rest % side) as f64 - m as f64);
                                rest /= side;
                            }
                            x
                        })
                        .collect();
                    let values = interpolate_points(&field, &table, &points)?;
                    points.into_iter().zip(values).map(|(mut x, v)| {
                        x.push(v);
                        x
                    }).collect()
                }
            };
            write_output(out, &render_tables(&[Table { name: "interpolant", columns: point_columns(dim), rows }], format)?)
        }
        Command::Cutoff { eps } => {
            let spec = build_cutoff(eps)?;
            let top = spec.declared_band + 0.5;
            let freq = (0..=400)
                .map(|i| {
                    let xi = -top + 2.0 * top * i as f64 / 400.0;
                    vec![xi, spec.rho_hat(xi)]
                })
                .collect();
            let reach = spec.phi_radius.min(64.0);
            let count = (reach * 16.0).round() as i64;
            let phi = (-count..=count)
                .map(|i| {
                    let t = i as f64 / 16.0;
                    vec![t, spec.phi_eval(t)]
                })
                .collect();
            let tables = [
                Table { name: "rho_hat", columns: vec!["xi", "rho_hat"], rows: freq },
                Table { name: "phi", columns: vec!["t", "phi"], rows: phi },
            ];
            eprintln!("{}", spec.tail_note());
            write_output(out, &render_tables(&tables, format)?)
        }
        Command::Quasi { h, eps, data, fine } => {
            let spec = build_cutoff(eps)?;
            let values = read_lattice_csv(&data)?;
            let dim = values.dim();
            let n = values.radius();
            let field = SampledField::new(GridSpec::new(h, dim, 8, (h * n as f64).max(4.0 * h))?, values, true)?;
            let g = quasi_interpolant(&field, &spec)?;
            let syn = g.synthesize(fine, None)?;
            let grid = gausscard::spectral::crop_centered(&syn.values(), h * n as f64);
            write_output(out, &render_tables(&[Table { name: "quasi", columns: point_columns(dim), rows: grid_rows(&grid) }], format)?)
        }
        Command::Analyze { h_list, p, budget } => {
            let hs = parse_h_list(&h_list)?;
            let p_code = match p {
                PNorm::Inf => f64::INFINITY,
                PNorm::Finite(v) => v,
            };
            let rows = hs
                .iter()
                .map(|&h| {
                    let est = mp_norm_bounds(&MultiplierContext::new(h, 1)?, p, budget, seed)?;
                    Ok(vec![h, p_code, est.lower_bound, est.upper_bound])
                })
                .collect::<Result<_>>()?;
            let table = Table { name: "multiplier_norm", columns: vec!["h", "p", "lower", "upper"], rows };
            write_output(out, &render_tables(&[table], format)?)
        }
        Command::Decay { h, xmax, samples } => {
            let prof = inverse_transform_profile(&MultiplierContext::new(h, 1)?, xmax, samples)?;
            let rows = prof.x.iter().zip(&prof.values).map(|(&x, &v)| vec![x, v]).collect();
            eprintln!("max |v|/min(1, 2/x) = {:.6}, max h³x²|v| = {:.3e}", prof.c1, prof.c2);
            write_output(out, &render_tables(&[Table { name: "decay", columns: vec!["x", "value"], rows }], format)?)
        }
        Command::Sweep(args) => {
            let cfg = sweep_config(&kv, &args.shared, Some(seed))?;
            let target: TargetFunction = pick(args.target, &kv, "target", "bspline3".to_string())?.parse()?;
            let p: PNorm = pick(args.p, &kv, "p", "2".to_string())?.parse()?;
            let k = pick(args.k, &kv, "k", 3usize)?;
            let default_h = if target.dim == 1 { "2^-2..2^-6" } else { "2^-1..2^-4" };
            let hs = parse_h_list(&pick(args.h_list, &kv, "h_list", default_h.to_string())?)?;
            let operator = match args.operator {
                Some(op) => op,
                None => match kv.raw("operator") {
                    None | Some("interp") => SweepOperator::Interp,
                    Some("quasi") => SweepOperator::Quasi,
                    Some(other) => return Err(Error::Parameter(format!("unknown operator {other:?}"))),
                },
            };
            let report = if args.logfactor {
                run_logfactor_probe(&target, p, k, &hs, &cfg)?.report
            } else if operator == SweepOperator::Quasi {
                let spec = build_cutoff(pick(args.eps, &kv, "eps", 1.0)?)?;
                run_sweep(&target, Operator::Quasi(&spec), &hs, p, k, &cfg)?
            } else {
                run_convergence(&target, p, k, &hs, &cfg)?
            };
            write_output(out, &render_report(&report, format)?)
        }
        Command::Stability(args) => {
            let cfg = sweep_config(&kv, &args.shared, Some(seed))?;
            let spec = build_cutoff(pick(args.eps, &kv, "eps", 1.0)?)?;
            let p: PNorm = pick(args.p, &kv, "p", "2".to_string())?.parse()?;
            let k = pick(args.k, &kv, "k", 1usize)?;
            let hs = parse_h_list(&pick(args.h_list, &kv, "h_list", "2^-1..2^-5".to_string())?)?;
            let trials = pick(args.trials, &kv, "trials", 32usize)?;
            let report = run_stability(&spec, p, k, &hs, trials, &cfg)?;
            write_output(out, &render_report(&report, format)?)
        }
        Command::Verify => {
            let report = run_verify(seed)?;
            let text = match format {
                ReportFormat::Csv => report.to_csv()?,
                ReportFormat::Json => report.to_json()?,
            };
            write_output(out, &text)?;
            if report.passed {
                Ok(())
            } else {
                let failed: Vec<&str> = report.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
                Err(Error::Accuracy(format!("failed checks: {}", failed.join(", "))))
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
