//! Command-line front end: model loading, flag parsing, and deterministic
//! CSV/JSON serialization for every library operation. Exit codes: 0 ok,
//! 1 runtime failure (including a failed compare), 2 usage error.

// !(x > 0.0) rejects NaN as well; x <= 0.0 would not.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::needless_range_loop)]

use std::fmt::Write as _;
use std::path::PathBuf;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use floqpol::analytic::{convergence_radius, sos_polarizability, two_level_p1, TwoLevelParams};
use floqpol::{
    defaults, dipole_of, fit_susceptibilities, fourier_components, initial_expansion, load_model,
    polarization_time_series, propagate, propagate_with_forced_step, run_scan, solve_floquet,
    FieldConfig, FloquetSolution, MolecularModel, Observables, ScanSpec, ScanVariable, Spacing,
    TruncationConfig,
};

#[derive(Parser)]
#[command(
    name = "floqpol",
    version,
    about = "Floquet quasienergies, steady states, and strong-field polarization for few-level models"
)]
struct Cli {
    /// Worker threads for scans; defaults to FLOQPOL_WORKERS, then all cores.
    #[arg(long, global = true)]
    workers: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct OutputArgs {
    /// Write here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,

    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Args)]
struct ProblemArgs {
    /// Model description (JSON; see docs/model-format.md).
    #[arg(long)]
    model: PathBuf,

    /// Field amplitude F (a.u.).
    #[arg(long)]
    field: f64,

    /// Drive frequency w (a.u.).
    #[arg(long)]
    omega: f64,

    /// Photon-block cutoff N.
    #[arg(long, default_value_t = defaults::N_MAX)]
    nmax: usize,

    /// Double N until P_1w moves less than --conv-tol.
    #[arg(long)]
    auto: bool,

    /// Convergence tolerance for --auto.
    #[arg(long, default_value_t = defaults::CONVERGENCE_TOL)]
    conv_tol: f64,

    /// Initial stationary state (1-based).
    #[arg(long, default_value_t = 1)]
    k: usize,
}

impl ProblemArgs {
    fn load(&self) -> Result<(MolecularModel, FieldConfig, TruncationConfig)> {
        let model = load_model(&self.model)
            .with_context(|| format!("loading model {}", self.model.display()))?;
        let field = FieldConfig::new(self.field, self.omega)?;
        let trunc = TruncationConfig::new(self.nmax, self.auto, self.conv_tol)?;
        Ok((model, field, trunc))
    }
}

#[derive(Subcommand)]
enum Command {
    /// Quasienergy spectrum, representatives, and superposition weights.
    Solve {
        #[command(flatten)]
        problem: ProblemArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Fourier components P_nw of the periodic polarization.
    Fourier {
        #[command(flatten)]
        problem: ProblemArgs,
        /// Highest harmonic to report; defaults to the full support 2N.
        #[arg(long)]
        max_order: Option<usize>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// P(t) from the Floquet expansion, optionally next to the integrator.
    Timeseries {
        #[command(flatten)]
        problem: ProblemArgs,
        /// Window length in field cycles.
        #[arg(long, default_value_t = 10.0)]
        cycles: f64,
        #[arg(long, default_value_t = 64)]
        samples_per_cycle: usize,
        /// Add a P_oracle column from direct integration.
        #[arg(long)]
        with_oracle: bool,
        /// Integrator steps per cycle (rounded up to a multiple of
        /// --samples-per-cycle so grids coincide).
        #[arg(long, default_value_t = defaults::ORACLE_STEPS_PER_PERIOD)]
        oracle_steps: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Direct integration of the driven Schroedinger equation.
    Propagate {
        #[command(flatten)]
        problem: ProblemArgs,
        /// Propagation end time (a.u.); conflicts with --cycles.
        #[arg(long, conflicts_with = "cycles")]
        t_end: Option<f64>,
        /// Window length in field cycles (used when --t-end is absent).
        #[arg(long)]
        cycles: Option<f64>,
        #[arg(long, default_value_t = defaults::MIN_STEPS_PER_PERIOD)]
        steps_per_period: usize,
        /// Override the step size, bypassing the resolution guard.
        #[arg(long)]
        force_dt: Option<f64>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Sweep amplitude or frequency; rows survive per-point failures.
    Scan {
        #[arg(long, value_enum)]
        variable: ScanVar,
        #[arg(long)]
        start: f64,
        #[arg(long)]
        stop: f64,
        #[arg(long)]
        points: usize,
        #[arg(long, value_enum, default_value_t = Space::Linear)]
        spacing: Space,
        /// Fixed amplitude for frequency scans.
        #[arg(long)]
        field: Option<f64>,
        /// Fixed frequency for amplitude scans.
        #[arg(long)]
        omega: Option<f64>,
        #[arg(long)]
        model: PathBuf,
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[arg(long, default_value_t = defaults::N_MAX)]
        nmax: usize,
        #[arg(long)]
        auto: bool,
        #[arg(long, default_value_t = defaults::CONVERGENCE_TOL)]
        conv_tol: f64,
        /// Harmonics to report, comma separated.
        #[arg(long, value_delimiter = ',', default_value = "1")]
        orders: Vec<usize>,
        /// Skip the chi column.
        #[arg(long)]
        no_chi: bool,
        /// Add folded representative quasienergies.
        #[arg(long)]
        quasienergies: bool,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Least-squares weak-field expansion P_1w ~ alpha F + gamma F^3.
    Fit {
        /// CSV input: either a scan output (columns amplitude and P_1) or
        /// bare two-column amplitude,P_1 data.
        #[arg(long)]
        input: PathBuf,
        /// Include an F^2 term for polar models.
        #[arg(long)]
        even: bool,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Closed-form desk checks.
    Analytic {
        #[command(subcommand)]
        what: AnalyticCommand,
    },
    /// Floquet vs integrator deviation on P(t), with pass/fail gate.
    Compare {
        #[command(flatten)]
        problem: ProblemArgs,
        #[arg(long, default_value_t = 10.0)]
        cycles: f64,
        /// Integrator steps per cycle.
        #[arg(long, default_value_t = defaults::ORACLE_STEPS_PER_PERIOD)]
        oracle_steps: usize,
        /// Gate on the maximum absolute deviation.
        #[arg(long, default_value_t = defaults::COMPARE_TOL)]
        tol: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ScanVar {
    Amplitude,
    Frequency,
}

#[derive(Clone, Copy, ValueEnum)]
enum Space {
    Linear,
    Log,
}

#[derive(Subcommand)]
enum AnalyticCommand {
    /// Two-level P_1w closed form -D12 (w12-w) F / ((w12-w)^2 - D12^2 F^2).
    TwoLevelP1 {
        #[arg(long)]
        omega12: f64,
        #[arg(long)]
        d12: f64,
        #[arg(long)]
        omega: f64,
        #[arg(long)]
        field: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Convergence radius |w - w12| / |D12| of the two-level series.
    Radius {
        #[arg(long)]
        omega12: f64,
        #[arg(long)]
        d12: f64,
        #[arg(long)]
        omega: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Sum-over-states polarizability of state k at frequency w.
    Sos {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[arg(long)]
        omega: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
}

/// 17 significant digits: round-trips f64 exactly and keeps every run
/// byte-identical.
fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

fn write_output(output: &OutputArgs, content: &str) -> Result<()> {
    match &output.out {
        Some(path) => {
            std::fs::write(path, content).with_context(|| format!("writing {}", path.display()))?
        }
        None => print!("{content}"),
    }
    Ok(())
}

fn usage_error(msg: &str) -> ! {
    eprintln!("error: {msg}");
    std::process::exit(2);
}

fn main() {
    let cli = Cli::parse();

    let workers = cli
        .workers
        .or_else(|| match std::env::var("FLOQPOL_WORKERS") {
            Ok(raw) => match raw.trim().parse::<usize>() {
                Ok(n) if n >= 1 => Some(n),
                _ => usage_error(&format!(
                    "FLOQPOL_WORKERS must be a positive integer, got {raw:?}"
                )),
            },
            Err(_) => None,
        });
    if let Some(n) = workers {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: worker pool: {e}");
            std::process::exit(1);
        }
    }

    match run(cli.command) {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            std::process::exit(1);
        }
    }
}

fn run(command: Command) -> Result<i32> {
    match command {
        Command::Solve { problem, output } => cmd_solve(&problem, &output),
        Command::Fourier {
            problem,
            max_order,
            output,
        } => cmd_fourier(&problem, max_order, &output),
        Command::Timeseries {
            problem,
            cycles,
            samples_per_cycle,
            with_oracle,
            oracle_steps,
            output,
        } => cmd_timeseries(
            &problem,
            cycles,
            samples_per_cycle,
            with_oracle,
            oracle_steps,
            &output,
        ),
        Command::Propagate {
            problem,
            t_end,
            cycles,
            steps_per_period,
            force_dt,
            output,
        } => cmd_propagate(&problem, t_end, cycles, steps_per_period, force_dt, &output),
        Command::Scan {
            variable,
            start,
            stop,
            points,
            spacing,
            field,
            omega,
            model,
            k,
            nmax,
            auto,
            conv_tol,
            orders,
            no_chi,
            quasienergies,
            output,
        } => {
            let fixed = match variable {
                ScanVar::Frequency => {
                    if omega.is_some() {
                        usage_error("--omega conflicts with --variable frequency; the frequency comes from the grid");
                    }
                    field.unwrap_or_else(|| {
                        usage_error("frequency scans need --field for the fixed amplitude")
                    })
                }
                ScanVar::Amplitude => {
                    if field.is_some() {
                        usage_error("--field conflicts with --variable amplitude; the amplitude comes from the grid");
                    }
                    omega.unwrap_or_else(|| {
                        usage_error("amplitude scans need --omega for the fixed frequency")
                    })
                }
            };
            cmd_scan(
                variable,
                start,
                stop,
                points,
                spacing,
                fixed,
                &model,
                k,
                TruncationConfig::new(nmax, auto, conv_tol)?,
                orders,
                !no_chi,
                quasienergies,
                &output,
            )
        }
        Command::Fit {
            input,
            even,
            output,
        } => cmd_fit(&input, even, &output),
        Command::Analytic { what } => cmd_analytic(what),
        Command::Compare {
            problem,
            cycles,
            oracle_steps,
            tol,
            output,
        } => cmd_compare(&problem, cycles, oracle_steps, tol, &output),
    }
}

fn cmd_solve(problem: &ProblemArgs, output: &OutputArgs) -> Result<i32> {
    let (model, field, trunc) = problem.load()?;
    let sol = solve_floquet(&model, &field, &trunc)?;
    let init = initial_expansion(&sol, problem.k)?;

    let content = match output.format {
        Format::Csv => {
            let mut s =
                String::from("j,E_j,folded_E_j,dominant_state,central_weight,is_representative\n");
            let reps = sol.representatives();
            for j in 0..sol.dim() {
                let e = sol.quasienergies()[j];
                let _ = writeln!(
                    s,
                    "{j},{},{},{},{},{}",
                    fmt(e),
                    fmt(floqpol::fold_to_zone(e, sol.omega())),
                    sol.dominant_state(j) + 1,
                    fmt(sol.central_weight(j)),
                    reps.contains(&j)
                );
            }
            s
        }
        Format::Json => {
            let value = serde_json::json!({
                "model": model.name(),
                "amplitude": field.amplitude(),
                "omega": field.omega(),
                "n_max": sol.n_max(),
                "quasienergies": sol.quasienergies(),
                "representatives": sol.representatives(),
                "representative_quasienergies": sol.representative_quasienergies(),
                "folded_representative_quasienergies": sol.folded_representative_quasienergies(),
                "selection_tie": sol.selection_tie(),
                "initial_expansion": {
                    "k": init.k,
                    "a": init.a,
                    "b_condition": init.b_condition,
                    "reconstruction_error": init.reconstruction_error,
                    "degenerate": init.degenerate,
                },
            });
            format!("{}\n", serde_json::to_string_pretty(&value)?)
        }
    };
    write_output(output, &content)?;
    Ok(0)
}

fn cmd_fourier(
    problem: &ProblemArgs,
    max_order: Option<usize>,
    output: &OutputArgs,
) -> Result<i32> {
    let (model, field, trunc) = problem.load()?;
    let sol = solve_floquet(&model, &field, &trunc)?;
    let init = initial_expansion(&sol, problem.k)?;
    let n_report = max_order.unwrap_or(2 * sol.n_max());
    let fourier = fourier_components(&sol, &init, &model, n_report);

    let content = match output.format {
        Format::Csv => {
            let mut s = String::from("n,P_n\n");
            for (n, p) in fourier.iter().enumerate() {
                let _ = writeln!(s, "{n},{}", fmt(*p));
            }
            s
        }
        Format::Json => {
            let value = serde_json::json!({
                "model": model.name(),
                "amplitude": field.amplitude(),
                "omega": field.omega(),
                "n_max": sol.n_max(),
                "fourier": fourier,
            });
            format!("{}\n", serde_json::to_string_pretty(&value)?)
        }
    };
    write_output(output, &content)?;
    Ok(0)
}

fn cmd_timeseries(
    problem: &ProblemArgs,
    cycles: f64,
    samples_per_cycle: usize,
    with_oracle: bool,
    oracle_steps: usize,
    output: &OutputArgs,
) -> Result<i32> {
    if !(cycles > 0.0) {
        bail!("--cycles must be positive, got {cycles}");
    }
    if samples_per_cycle == 0 {
        bail!("--samples-per-cycle must be positive");
    }
    let (model, field, trunc) = problem.load()?;
    let sol = solve_floquet(&model, &field, &trunc)?;
    let init = initial_expansion(&sol, problem.k)?;

    let period = field.period();
    let n_samples = (cycles * samples_per_cycle as f64).round() as usize;
    let sample_dt = period / samples_per_cycle as f64;
    let times: Vec<f64> = (0..=n_samples).map(|i| i as f64 * sample_dt).collect();
    let p_floquet = polarization_time_series(&sol, &init, &model, &times)?;

    let p_oracle = if with_oracle {
        // Integer stride so integrator samples land exactly on the grid.
        let per_cycle = oracle_steps.div_ceil(samples_per_cycle) * samples_per_cycle;
        let stride = per_cycle / samples_per_cycle;
        let dt = period / per_cycle as f64;
        let run = propagate(&model, &field, problem.k, times[n_samples], dt)?;
        let p = dipole_of(&run, &model);
        Some(
            (0..=n_samples)
                .map(|i| p[(i * stride).min(p.len() - 1)])
                .collect::<Vec<f64>>(),
        )
    } else {
        None
    };

    let content = match output.format {
        Format::Csv => {
            let mut s = String::from(if p_oracle.is_some() {
                "t,P_floquet,P_oracle\n"
            } else {
                "t,P_floquet\n"
            });
            for i in 0..=n_samples {
                match &p_oracle {
                    Some(po) => {
                        let _ =
                            writeln!(s, "{},{},{}", fmt(times[i]), fmt(p_floquet[i]), fmt(po[i]));
                    }
                    None => {
                        let _ = writeln!(s, "{},{}", fmt(times[i]), fmt(p_floquet[i]));
                    }
                }
            }
            s
        }
        Format::Json => {
            let mut map = serde_json::Map::new();
            map.insert("t".into(), serde_json::json!(times));
            map.insert("P_floquet".into(), serde_json::json!(p_floquet));
            if let Some(po) = &p_oracle {
                map.insert("P_oracle".into(), serde_json::json!(po));
            }
            format!(
                "{}\n",
                serde_json::to_string_pretty(&serde_json::Value::Object(map))?
            )
        }
    };
    write_output(output, &content)?;
    Ok(0)
}

fn cmd_propagate(
    problem: &ProblemArgs,
    t_end: Option<f64>,
    cycles: Option<f64>,
    steps_per_period: usize,
    force_dt: Option<f64>,
    output: &OutputArgs,
) -> Result<i32> {
    let (model, field, _) = problem.load()?;
    let period = field.period();
    let t_end = match (t_end, cycles) {
        (Some(t), _) => t,
        (None, Some(c)) => c * period,
        (None, None) => 10.0 * period,
    };
    if steps_per_period == 0 {
        bail!("--steps-per-period must be positive");
    }

    let run = match force_dt {
        Some(dt) => {
            eprintln!(
                "warning: forcing dt = {dt}; the {}-steps-per-period resolution guard is bypassed",
                defaults::MIN_STEPS_PER_PERIOD
            );
            propagate_with_forced_step(&model, &field, problem.k, t_end, dt)?
        }
        None => propagate(
            &model,
            &field,
            problem.k,
            t_end,
            period / steps_per_period as f64,
        )?,
    };
    let p = dipole_of(&run, &model);
    let s_dim = model.n_states();

    let content = match output.format {
        Format::Csv => {
            let mut header = String::from("t");
            for s in 1..=s_dim {
                let _ = write!(header, ",re_c{s},im_c{s}");
            }
            header.push_str(",P\n");
            let mut out = header;
            for i in 0..run.len() {
                let mut row = fmt(run.times()[i]);
                for s in 0..s_dim {
                    let (re, im) = run.amplitude(i, s);
                    let _ = write!(row, ",{},{}", fmt(re), fmt(im));
                }
                let _ = writeln!(out, "{row},{}", fmt(p[i]));
            }
            out
        }
        Format::Json => {
            let amplitudes: Vec<Vec<(f64, f64)>> = (0..run.len())
                .map(|i| (0..s_dim).map(|s| run.amplitude(i, s)).collect())
                .collect();
            let value = serde_json::json!({
                "t": run.times(),
                "amplitudes": amplitudes,
                "P": p,
                "norm_drift": run.norm_drift(),
            });
            format!("{}\n", serde_json::to_string_pretty(&value)?)
        }
    };
    write_output(output, &content)?;
    Ok(0)
}

#[allow(clippy::too_many_arguments)]
fn cmd_scan(
    variable: ScanVar,
    start: f64,
    stop: f64,
    points: usize,
    spacing: Space,
    fixed: f64,
    model_path: &PathBuf,
    k: usize,
    trunc: TruncationConfig,
    orders: Vec<usize>,
    chi: bool,
    quasienergies: bool,
    output: &OutputArgs,
) -> Result<i32> {
    let model = load_model(model_path)
        .with_context(|| format!("loading model {}", model_path.display()))?;
    let s_dim = model.n_states();
    let spec = ScanSpec {
        variable: match variable {
            ScanVar::Amplitude => ScanVariable::Amplitude,
            ScanVar::Frequency => ScanVariable::Frequency,
        },
        start,
        stop,
        points,
        spacing: match spacing {
            Space::Linear => Spacing::Linear,
            Space::Log => Spacing::Log,
        },
        fixed,
        model,
        k,
        trunc,
        observables: Observables {
            fourier_orders: orders.clone(),
            chi,
            quasienergies,
        },
    };
    let rows = run_scan(&spec)?;

    let var_name = match variable {
        ScanVar::Amplitude => "amplitude",
        ScanVar::Frequency => "frequency",
    };
    let content = match output.format {
        Format::Csv => {
            let mut header = format!("index,{var_name},status");
            if chi {
                header.push_str(",chi,chi_kind");
            }
            for n in &orders {
                let _ = write!(header, ",P_{n}");
            }
            if quasienergies {
                for s in 1..=s_dim {
                    let _ = write!(header, ",quasi_{s}");
                }
            }
            header.push('\n');
            let mut out = header;
            for row in &rows {
                let status = match &row.error {
                    None => "ok".to_string(),
                    Some(msg) => msg.replace(',', ";").replace('\n', " "),
                };
                let mut line = format!("{},{},{status}", row.index, fmt(row.value));
                if chi {
                    match (row.chi, row.chi_kind) {
                        (Some(c), Some(kind)) => {
                            let _ = write!(line, ",{},{}", fmt(c), kind.label());
                        }
                        _ => line.push_str(",,"),
                    }
                }
                for n in &orders {
                    match row.fourier.iter().find(|(m, _)| m == n) {
                        Some((_, p)) => {
                            let _ = write!(line, ",{}", fmt(*p));
                        }
                        None => line.push(','),
                    }
                }
                if quasienergies {
                    if row.quasienergies.is_empty() {
                        for _ in 0..s_dim {
                            line.push(',');
                        }
                    } else {
                        for q in &row.quasienergies {
                            let _ = write!(line, ",{}", fmt(*q));
                        }
                    }
                }
                let _ = writeln!(out, "{line}");
            }
            out
        }
        Format::Json => {
            let rows_json: Vec<serde_json::Value> = rows
                .iter()
                .map(|row| {
                    let mut m = serde_json::Map::new();
                    m.insert("index".into(), serde_json::json!(row.index));
                    m.insert(var_name.into(), serde_json::json!(row.value));
                    m.insert(
                        "status".into(),
                        serde_json::json!(row.error.clone().unwrap_or_else(|| "ok".into())),
                    );
                    if chi {
                        m.insert("chi".into(), serde_json::json!(row.chi));
                        m.insert(
                            "chi_kind".into(),
                            serde_json::json!(row.chi_kind.map(|k| k.label())),
                        );
                    }
                    if !orders.is_empty() {
                        let f: serde_json::Map<String, serde_json::Value> = row
                            .fourier
                            .iter()
                            .map(|(n, p)| (format!("P_{n}"), serde_json::json!(p)))
                            .collect();
                        m.insert("fourier".into(), serde_json::Value::Object(f));
                    }
                    if quasienergies {
                        m.insert("quasienergies".into(), serde_json::json!(row.quasienergies));
                    }
                    serde_json::Value::Object(m)
                })
                .collect();
            format!("{}\n", serde_json::to_string_pretty(&rows_json)?)
        }
    };
    write_output(output, &content)?;
    Ok(0)
}

/// Pulls (amplitude, P_1) pairs out of a scan CSV by header name, or out of
/// bare two-column data.
fn read_fit_input(path: &PathBuf) -> Result<(Vec<f64>, Vec<f64>)> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let first = lines
        .next()
        .ok_or_else(|| anyhow!("{}: empty input", path.display()))?;
    let header: Vec<&str> = first.split(',').map(str::trim).collect();

    let named = {
        let col = |name: &str| header.iter().position(|h| *h == name);
        col("amplitude").zip(col("P_1"))
    };

    let mut amplitudes = Vec::new();
    let mut p1 = Vec::new();
    match named {
        Some((a_col, p_col)) => {
            for line in lines {
                let cells: Vec<&str> = line.split(',').collect();
                if cells.len() <= a_col.max(p_col) {
                    continue;
                }
                // Failed scan rows carry empty observable cells; skip them.
                match (cells[a_col].trim().parse(), cells[p_col].trim().parse()) {
                    (Ok(f), Ok(p)) => {
                        amplitudes.push(f);
                        p1.push(p);
                    }
                    _ => continue,
                }
            }
        }
        None => {
            let parse_pair = |line: &str| -> Option<(f64, f64)> {
                let cells: Vec<&str> = line.split(',').map(str::trim).collect();
                if cells.len() != 2 {
                    return None;
                }
                Some((cells[0].parse().ok()?, cells[1].parse().ok()?))
            };
            // The first line may be a header; keep it only if it parses.
            if let Some(pair) = parse_pair(first) {
                amplitudes.push(pair.0);
                p1.push(pair.1);
            }
            for line in lines {
                let (f, p) = parse_pair(line)
                    .ok_or_else(|| anyhow!("{}: malformed row {line:?}", path.display()))?;
                amplitudes.push(f);
                p1.push(p);
            }
        }
    }
    if amplitudes.is_empty() {
        bail!("{}: no usable (amplitude, P_1) rows", path.display());
    }
    Ok((amplitudes, p1))
}

fn cmd_fit(input: &PathBuf, even: bool, output: &OutputArgs) -> Result<i32> {
    let (amplitudes, p1) = read_fit_input(input)?;
    let fit = fit_susceptibilities(&amplitudes, &p1, even)?;

    let content = match output.format {
        Format::Csv => match fit.beta2 {
            Some(b2) => format!(
                "alpha,beta2,gamma,residual,points\n{},{},{},{},{}\n",
                fmt(fit.alpha),
                fmt(b2),
                fmt(fit.gamma),
                fmt(fit.residual),
                fit.amplitudes_used.len()
            ),
            None => format!(
                "alpha,gamma,residual,points\n{},{},{},{}\n",
                fmt(fit.alpha),
                fmt(fit.gamma),
                fmt(fit.residual),
                fit.amplitudes_used.len()
            ),
        },
        Format::Json => {
            let value = serde_json::json!({
                "alpha": fit.alpha,
                "beta2": fit.beta2,
                "gamma": fit.gamma,
                "residual": fit.residual,
                "amplitudes_used": fit.amplitudes_used,
            });
            format!("{}\n", serde_json::to_string_pretty(&value)?)
        }
    };
    write_output(output, &content)?;
    Ok(0)
}

fn single_value(name: &str, value: f64, output: &OutputArgs) -> Result<i32> {
    let content = match output.format {
        Format::Csv => format!("quantity,value\n{name},{}\n", fmt(value)),
        Format::Json => format!(
            "{}\n",
            serde_json::to_string_pretty(&serde_json::json!({ name: value }))?
        ),
    };
    write_output(output, &content)?;
    Ok(0)
}

fn cmd_analytic(what: AnalyticCommand) -> Result<i32> {
    match what {
        AnalyticCommand::TwoLevelP1 {
            omega12,
            d12,
            omega,
            field,
            output,
        } => {
            let p1 = two_level_p1(&TwoLevelParams {
                omega12,
                d12,
                omega,
                amplitude: field,
            })?;
            single_value("two_level_p1", p1, &output)
        }
        AnalyticCommand::Radius {
            omega12,
            d12,
            omega,
            output,
        } => {
            let r = convergence_radius(&TwoLevelParams {
                omega12,
                d12,
                omega,
                amplitude: 0.0,
            })?;
            single_value("convergence_radius", r, &output)
        }
        AnalyticCommand::Sos {
            model,
            k,
            omega,
            output,
        } => {
            let m =
                load_model(&model).with_context(|| format!("loading model {}", model.display()))?;
            let value = sos_polarizability(&m, k, omega)?;
            single_value("sos_polarizability", value, &output)
        }
    }
}

fn compare_deviations(
    model: &MolecularModel,
    field: &FieldConfig,
    sol: &FloquetSolution,
    k: usize,
    cycles: f64,
    oracle_steps: usize,
) -> Result<(f64, f64)> {
    let init = initial_expansion(sol, k)?;
    let period = field.period();
    let dt = period / oracle_steps as f64;
    let run = propagate(model, field, k, cycles * period, dt)?;
    let p_oracle = dipole_of(&run, model);
    let p_floquet = polarization_time_series(sol, &init, model, run.times())?;

    let mut max_abs = 0.0_f64;
    let mut sum_sq = 0.0_f64;
    for (a, b) in p_floquet.iter().zip(p_oracle.iter()) {
        let d = a - b;
        max_abs = max_abs.max(d.abs());
        sum_sq += d * d;
    }
    Ok((max_abs, (sum_sq / p_floquet.len() as f64).sqrt()))
}

fn cmd_compare(
    problem: &ProblemArgs,
    cycles: f64,
    oracle_steps: usize,
    tol: f64,
    output: &OutputArgs,
) -> Result<i32> {
    if !(cycles > 0.0) {
        bail!("--cycles must be positive, got {cycles}");
    }
    if oracle_steps < defaults::MIN_STEPS_PER_PERIOD {
        bail!(
            "--oracle-steps must be at least {}",
            defaults::MIN_STEPS_PER_PERIOD
        );
    }
    let (model, field, trunc) = problem.load()?;
    let sol = solve_floquet(&model, &field, &trunc)?;
    let (max_abs, rms) = compare_deviations(&model, &field, &sol, problem.k, cycles, oracle_steps)?;
    let pass = max_abs <= tol;
    let status = if pass { "PASS" } else { "FAIL" };

    let content = match output.format {
        Format::Csv => format!(
            "max_abs_deviation,rms_deviation,tolerance,status\n{},{},{},{status}\n",
            fmt(max_abs),
            fmt(rms),
            fmt(tol)
        ),
        Format::Json => format!(
            "{}\n",
            serde_json::to_string_pretty(&serde_json::json!({
                "max_abs_deviation": max_abs,
                "rms_deviation": rms,
                "tolerance": tol,
                "status": status,
            }))?
        ),
    };
    write_output(output, &content)?;
    Ok(if pass { 0 } else { 1 })
}
