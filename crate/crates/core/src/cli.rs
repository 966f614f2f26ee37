//! Command-line front end.
//!
//! Subcommands map onto the library pipeline: `decay` integrates a system
//! and emits a time-series CSV, `poles` tabulates pole sets (swept over the
//! dimensionless delay for the single-delay atom), `ep2`/`ep3`/`design`/
//! `collective` emit exceptional-point reports as JSON, and `oracle` runs
//! the microscopic mode sum side by side with the delay equation.
//!
//! Parameters may come from flags or from a flat JSON config file whose keys
//! mirror the flag names with dashes replaced by underscores; flags override
//! the file. `--seed-figure` selects a preset parameter panel. Exit codes:
//! 0 success, 2 structured no-EP / infeasible outcomes, 1 numerical or I/O
//! errors, 64 malformed usage or config.
//!
//! All numeric output is printed with 17 significant digits, so identical
//! configurations produce byte-identical files. The `NMEP_THREADS`
//! environment variable caps sweep parallelism (default: machine cores).

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Deserialize;
use std::ffi::OsString;
use std::path::PathBuf;

use crate::dynamics::{field_oracle, field_oracle_defaults, integrate, TimeSeries};
use crate::ep::{collective_ep, design_ep_n, find_ep2_single_delay, find_ep3_symmetric, EpOutcome};
use crate::models::{DelaySystem, GiantAtomModel, ModelDescriptor};
use crate::spectral::{poles_closed_form, poles_search, PoleSet, Rect};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// Resolved invocation: one command plus output routing.
#[derive(Debug, Parser)]
#[command(
    name = "nmep",
    version,
    about = "Relaxation dynamics, pole spectra, and non-Markovian exceptional points of waveguide-QED delay systems"
)]
pub struct RunConfig {
    /// Flat JSON config file; keys mirror flag names with underscores.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output path; '-' or absent writes to stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// Output format (csv for tables, json for reports).
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Figure preset: 2a, 2b, 2c, 2d, 3, or 4.
    #[arg(long, value_name = "ID")]
    pub seed_figure: Option<String>,
    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Integrate a decay curve and emit t,re_a,im_a,abs2 rows.
    Decay {
        #[arg(long)]
        gamma: Option<f64>,
        #[arg(long)]
        phi: Option<f64>,
        /// Dimensionless delay gamma*tau (with --gamma fixes tau).
        #[arg(long)]
        gamma_tau: Option<f64>,
        #[arg(long)]
        tau: Option<f64>,
        #[arg(long)]
        t_max: Option<f64>,
        #[arg(long)]
        dt: Option<f64>,
        /// JSON model descriptor file (overrides gamma/phi/tau).
        #[arg(long)]
        model: Option<PathBuf>,
    },
    /// Tabulate characteristic poles (closed form for single-delay systems).
    Poles {
        #[arg(long)]
        gamma: Option<f64>,
        #[arg(long)]
        phi: Option<f64>,
        /// Sweep of gamma*tau as start:end:step (default 0.05:1.0:0.005).
        #[arg(long)]
        tau_range: Option<String>,
        /// Single gamma*tau value instead of a sweep.
        #[arg(long)]
        gamma_tau: Option<f64>,
        /// Lambert branch window as lo:hi (default -3:3).
        #[arg(long, allow_hyphen_values = true)]
        branches: Option<String>,
        /// JSON model descriptor; multi-delay models use the Newton search.
        #[arg(long)]
        model: Option<PathBuf>,
        /// Search rectangle re_min:re_max:im_min:im_max (model mode).
        #[arg(long, allow_hyphen_values = true)]
        rect: Option<String>,
        #[arg(long)]
        max_poles: Option<usize>,
    },
    /// Locate the second-order exceptional point of the two-point atom.
    Ep2 {
        #[arg(long)]
        gamma: Option<f64>,
        #[arg(long)]
        phi: Option<f64>,
    },
    /// Solve the three-point solvability conditions for a third-order point.
    Ep3 {
        #[arg(long)]
        g1: Option<f64>,
        #[arg(long)]
        g2: Option<f64>,
        #[arg(long)]
        phi: Option<f64>,
    },
    /// Design an order-N exceptional point at a prescribed rate and delay.
    Design {
        #[arg(long)]
        order: Option<usize>,
        #[arg(long, allow_hyphen_values = true)]
        s_ep: Option<f64>,
        #[arg(long)]
        tau: Option<f64>,
        #[arg(long)]
        phi: Option<f64>,
    },
    /// Critical separation of the collectively emitting pair.
    Collective {
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long)]
        gamma: Option<f64>,
    },
    /// Run the microscopic mode sum against the delay equation.
    Oracle {
        #[arg(long)]
        gamma: Option<f64>,
        #[arg(long)]
        phi: Option<f64>,
        #[arg(long)]
        gamma_tau: Option<f64>,
        #[arg(long)]
        modes: Option<usize>,
        #[arg(long)]
        t_max: Option<f64>,
        #[arg(long)]
        dt: Option<f64>,
    },
}

/// Flat file-config mirror of the flag surface.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    command: Option<String>,
    gamma: Option<f64>,
    phi: Option<f64>,
    gamma_tau: Option<f64>,
    tau: Option<f64>,
    t_max: Option<f64>,
    dt: Option<f64>,
    model: Option<PathBuf>,
    tau_range: Option<String>,
    branches: Option<String>,
    rect: Option<String>,
    max_poles: Option<usize>,
    g1: Option<f64>,
    g2: Option<f64>,
    order: Option<usize>,
    s_ep: Option<f64>,
    beta: Option<f64>,
    modes: Option<usize>,
    seed_figure: Option<String>,
    output: Option<PathBuf>,
    format: Option<String>,
}

/// Process entry point: parse `std::env` arguments and run.
pub fn main() -> i32 {
    main_with_args(std::env::args_os())
}

/// Testable entry point over explicit arguments; returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let config = match RunConfig::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return 64;
        }
    };
    match run(config) {
        Ok(RunStatus::Done) => 0,
        Ok(RunStatus::Structured) => 2,
        Err(Error::InvalidInput(msg)) if msg.starts_with("config:") => {
            eprintln!("nmep: {msg}");
            eprintln!(
                "usage: nmep [--config FILE] [--output PATH] [--format csv|json] \
                 <command | --seed-figure ID>"
            );
            64
        }
        Err(e) => {
            eprintln!("nmep: {e}");
            1
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunStatus {
    Done,
    /// A structured no-EP or infeasible outcome (exit code 2).
    Structured,
}

/// Execute a resolved configuration and write its artifact files.
pub fn run(config: RunConfig) -> Result<RunStatus> {
    let file = match &config.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::InvalidInput(format!("config: cannot read {path:?}: {e}")))?;
            serde_json::from_str::<FileConfig>(&text)
                .map_err(|e| Error::InvalidInput(format!("config: malformed JSON: {e}")))?
        }
        None => FileConfig::default(),
    };

    let output = config.output.or_else(|| file.output.clone());
    let format = match config.format {
        Some(f) => Some(f),
        None => match file.format.as_deref() {
            Some("csv") => Some(Format::Csv),
            Some("json") => Some(Format::Json),
            Some(other) => {
                return Err(Error::InvalidInput(format!(
                    "config: unknown format {other:?}"
                )))
            }
            None => None,
        },
    };

    let preset = config
        .seed_figure
        .clone()
        .or_else(|| file.seed_figure.clone());
    let pool = install_pool();
    if let Some(id) = preset {
        if config.command.is_some() {
            return Err(Error::InvalidInput(
                "config: --seed-figure replaces the subcommand; give one or the other".into(),
            ));
        }
        return run_preset(&id, output.as_deref(), &pool);
    }

    let command = match config.command {
        Some(c) => c.merged(&file),
        None => Command::from_file(&file)?,
    };

    match command {
        Command::Decay {
            gamma,
            phi,
            gamma_tau,
            tau,
            t_max,
            dt,
            model,
        } => {
            let system = match model {
                Some(path) => load_model(&path)?,
                None => {
                    let gamma = gamma.unwrap_or(1.0);
                    let phi = phi.unwrap_or(0.0);
                    let tau = resolve_tau(gamma, gamma_tau, tau, 0.5)?;
                    DelaySystem::single_delay(gamma, phi, tau)?
                }
            };
            let tau = system.base_delay();
            let dt = dt.unwrap_or(tau / 64.0);
            let t_max = t_max.unwrap_or(10.0);
            let ts = integrate(&system, Complex64::new(1.0, 0.0), t_max, dt)?;
            match format.unwrap_or(Format::Csv) {
                Format::Csv => {
                    let mut buf = Vec::new();
                    ts.write_csv(&mut buf)?;
                    write_output(output.as_deref(), &String::from_utf8(buf).expect("ascii"))?;
                }
                Format::Json => write_output(output.as_deref(), &series_json(&ts)?)?,
            }
            Ok(RunStatus::Done)
        }

        Command::Poles {
            gamma,
            phi,
            tau_range,
            gamma_tau,
            branches,
            model,
            rect,
            max_poles,
        } => {
            let branch_window = parse_branches(branches.as_deref().unwrap_or("-3:3"))?;
            if let Some(path) = model {
                let system = load_model(&path)?;
                let set = if system.classes() == 2 {
                    poles_closed_form(&system, branch_window)?
                } else {
                    let rect = match rect.as_deref() {
                        Some(spec) => parse_rect(spec)?,
                        None => default_rect(&system),
                    };
                    poles_search(&system, rect, max_poles.unwrap_or(256))?
                };
                return emit_pole_set(&set, format, output.as_deref());
            }

            let gamma = gamma.unwrap_or(1.0);
            let phi = phi.unwrap_or(0.0);
            if let Some(gt) = gamma_tau {
                let system = DelaySystem::single_delay(gamma, phi, gt / gamma)?;
                let set = poles_closed_form(&system, branch_window)?;
                return emit_pole_set(&set, format, output.as_deref());
            }

            let (start, end, step) = parse_range(tau_range.as_deref().unwrap_or("0.05:1.0:0.005"))?;
            let taus = sweep_values(start, end, step);
            let rows: Vec<Result<(f64, PoleSet)>> = pool.install(|| {
                taus.par_iter()
                    .map(|&gt| {
                        let system = DelaySystem::single_delay(gamma, phi, gt / gamma)?;
                        Ok((gt, poles_closed_form(&system, branch_window.clone())?))
                    })
                    .collect()
            });
            let mut out =
                String::from("gamma_tau,branch,re_s,im_s,re_residue,im_residue,multiplicity\n");
            for row in rows {
                let (gt, set) = row?;
                push_sweep_rows(&mut out, gt, &set);
            }
            write_output(output.as_deref(), &out)?;
            Ok(RunStatus::Done)
        }

        Command::Ep2 { gamma, phi } => emit_ep_outcome(
            find_ep2_single_delay(gamma.unwrap_or(1.0), phi.unwrap_or(0.0)),
            output.as_deref(),
        ),

        Command::Ep3 { g1, g2, phi } => emit_ep_outcome(
            find_ep3_symmetric(g1.unwrap_or(1.0), g2.unwrap_or(1.0), phi.unwrap_or(0.0)),
            output.as_deref(),
        ),

        Command::Design {
            order,
            s_ep,
            tau,
            phi,
        } => {
            let order =
                order.ok_or_else(|| Error::InvalidInput("config: design needs --order".into()))?;
            let s_ep =
                s_ep.ok_or_else(|| Error::InvalidInput("config: design needs --s-ep".into()))?;
            let tau =
                tau.ok_or_else(|| Error::InvalidInput("config: design needs --tau".into()))?;
            emit_ep_outcome(
                design_ep_n(order, s_ep, tau, phi.unwrap_or(0.0)),
                output.as_deref(),
            )
        }

        Command::Collective { beta, gamma } => {
            let report = collective_ep(gamma.unwrap_or(1.0), beta.unwrap_or(1.0))?;
            write_output(output.as_deref(), &report_json(&report)?)?;
            Ok(RunStatus::Done)
        }

        Command::Oracle {
            gamma,
            phi,
            gamma_tau,
            modes,
            t_max,
            dt,
        } => {
            let gamma = gamma.unwrap_or(1.0);
            let phi = phi.unwrap_or(0.0);
            let tau = resolve_tau(gamma, gamma_tau, None, 0.5)?;
            // Two equal couplings with delay-class weight kappa_0 = gamma.
            let g = (gamma / (2.0 * std::f64::consts::PI)).sqrt();
            let model = GiantAtomModel::new(vec![g, g], 1.0, tau, phi)?;
            let system = model.delay_system();
            let (omega0, k_max, default_modes) = field_oracle_defaults(&model);
            let modes = modes.unwrap_or(default_modes);
            let t_max = t_max.unwrap_or(5.0 / gamma);
            let dt = dt.unwrap_or(tau / 64.0);
            let run = field_oracle(&model, omega0, k_max, modes, t_max, dt)?;
            let dde = integrate(&system, Complex64::new(1.0, 0.0), t_max, dt)?;

            let n = dde.len().min(run.series.len());
            let mut max_dev = 0.0f64;
            let mut out = String::from(
                "t,re_a_dde,im_a_dde,abs2_dde,re_a_oracle,im_a_oracle,abs2_oracle\n",
            );
            for k in 0..n {
                let a = dde.sample(k);
                let b = run.series.sample(k);
                max_dev = max_dev.max((b.norm() - a.norm()).abs());
                out.push_str(&format!(
                    "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n",
                    dde.time(k),
                    a.re,
                    a.im,
                    a.norm_sqr(),
                    b.re,
                    b.im,
                    b.norm_sqr()
                ));
            }
            write_output(output.as_deref(), &out)?;
            let summary = serde_json::json!({
                "max_abs_deviation": max_dev,
                "norm_drift": run.norm_drift,
                "warning": run.warning,
            });
            println!("{summary}");
            Ok(RunStatus::Done)
        }
    }
}

impl Command {
    /// Fill unset flags from the file config.
    fn merged(self, f: &FileConfig) -> Command {
        match self {
            Command::Decay {
                gamma,
                phi,
                gamma_tau,
                tau,
                t_max,
                dt,
                model,
            } => Command::Decay {
                gamma: gamma.or(f.gamma),
                phi: phi.or(f.phi),
                gamma_tau: gamma_tau.or(f.gamma_tau),
                tau: tau.or(f.tau),
                t_max: t_max.or(f.t_max),
                dt: dt.or(f.dt),
                model: model.or_else(|| f.model.clone()),
            },
            Command::Poles {
                gamma,
                phi,
                tau_range,
                gamma_tau,
                branches,
                model,
                rect,
                max_poles,
            } => Command::Poles {
                gamma: gamma.or(f.gamma),
                phi: phi.or(f.phi),
                tau_range: tau_range.or_else(|| f.tau_range.clone()),
                gamma_tau: gamma_tau.or(f.gamma_tau),
                branches: branches.or_else(|| f.branches.clone()),
                model: model.or_else(|| f.model.clone()),
                rect: rect.or_else(|| f.rect.clone()),
                max_poles: max_poles.or(f.max_poles),
            },
            Command::Ep2 { gamma, phi } => Command::Ep2 {
                gamma: gamma.or(f.gamma),
                phi: phi.or(f.phi),
            },
            Command::Ep3 { g1, g2, phi } => Command::Ep3 {
                g1: g1.or(f.g1),
                g2: g2.or(f.g2),
                phi: phi.or(f.phi),
            },
            Command::Design {
                order,
                s_ep,
                tau,
                phi,
            } => Command::Design {
                order: order.or(f.order),
                s_ep: s_ep.or(f.s_ep),
                tau: tau.or(f.tau),
                phi: phi.or(f.phi),
            },
            Command::Collective { beta, gamma } => Command::Collective {
                beta: beta.or(f.beta),
                gamma: gamma.or(f.gamma),
            },
            Command::Oracle {
                gamma,
                phi,
                gamma_tau,
                modes,
                t_max,
                dt,
            } => Command::Oracle {
                gamma: gamma.or(f.gamma),
                phi: phi.or(f.phi),
                gamma_tau: gamma_tau.or(f.gamma_tau),
                modes: modes.or(f.modes),
                t_max: t_max.or(f.t_max),
                dt: dt.or(f.dt),
            },
        }
    }

    /// Build a command entirely from the file config.
    fn from_file(f: &FileConfig) -> Result<Command> {
        let name = f.command.as_deref().ok_or_else(|| {
            Error::InvalidInput("config: no subcommand given and no \"command\" in file".into())
        })?;
        let template = match name {
            "decay" => Command::Decay {
                gamma: None,
                phi: None,
                gamma_tau: None,
                tau: None,
                t_max: None,
                dt: None,
                model: None,
            },
            "poles" => Command::Poles {
                gamma: None,
                phi: None,
                tau_range: None,
                gamma_tau: None,
                branches: None,
                model: None,
                rect: None,
                max_poles: None,
            },
            "ep2" => Command::Ep2 {
                gamma: None,
                phi: None,
            },
            "ep3" => Command::Ep3 {
                g1: None,
                g2: None,
                phi: None,
            },
            "design" => Command::Design {
                order: None,
                s_ep: None,
                tau: None,
                phi: None,
            },
            "collective" => Command::Collective {
                beta: None,
                gamma: None,
            },
            "oracle" => Command::Oracle {
                gamma: None,
                phi: None,
                gamma_tau: None,
                modes: None,
                t_max: None,
                dt: None,
            },
            other => {
                return Err(Error::InvalidInput(format!(
                    "config: unknown command {other:?}"
                )))
            }
        };
        Ok(template.merged(f))
    }
}

fn install_pool() -> rayon::ThreadPool {
    let threads = std::env::var("NMEP_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n > 0);
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    builder.build().expect("thread pool")
}

fn resolve_tau(
    gamma: f64,
    gamma_tau: Option<f64>,
    tau: Option<f64>,
    default_gamma_tau: f64,
) -> Result<f64> {
    if !(gamma > 0.0) {
        return Err(Error::InvalidInput("config: gamma must be positive".into()));
    }
    match (gamma_tau, tau) {
        (Some(gt), None) => Ok(gt / gamma),
        (None, Some(t)) => Ok(t),
        (None, None) => Ok(default_gamma_tau / gamma),
        (Some(_), Some(_)) => Err(Error::InvalidInput(
            "config: give either --gamma-tau or --tau, not both".into(),
        )),
    }
}

fn load_model(path: &std::path::Path) -> Result<DelaySystem> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidInput(format!("config: cannot read model {path:?}: {e}")))?;
    let descriptor: ModelDescriptor = serde_json::from_str(&text)
        .map_err(|e| Error::InvalidInput(format!("config: malformed model JSON: {e}")))?;
    descriptor.delay_system()
}

fn parse_branches(spec: &str) -> Result<std::ops::RangeInclusive<i32>> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 2 {
        return Err(Error::InvalidInput(format!(
            "config: branches must be lo:hi, got {spec:?}"
        )));
    }
    let lo: i32 = parts[0]
        .parse()
        .map_err(|_| Error::InvalidInput(format!("config: bad branch bound {:?}", parts[0])))?;
    let hi: i32 = parts[1]
        .parse()
        .map_err(|_| Error::InvalidInput(format!("config: bad branch bound {:?}", parts[1])))?;
    if lo > hi {
        return Err(Error::InvalidInput("config: branches lo > hi".into()));
    }
    Ok(lo..=hi)
}

fn parse_range(spec: &str) -> Result<(f64, f64, f64)> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(Error::InvalidInput(format!(
            "config: range must be start:end:step, got {spec:?}"
        )));
    }
    let nums: Vec<f64> = parts
        .iter()
        .map(|p| {
            p.parse::<f64>()
                .map_err(|_| Error::InvalidInput(format!("config: bad range number {p:?}")))
        })
        .collect::<Result<_>>()?;
    if !(nums[2] > 0.0) || nums[1] < nums[0] {
        return Err(Error::InvalidInput(
            "config: empty or backwards range".into(),
        ));
    }
    Ok((nums[0], nums[1], nums[2]))
}

fn parse_rect(spec: &str) -> Result<Rect> {
    let nums: Vec<f64> = spec
        .split(':')
        .map(|p| {
            p.parse::<f64>()
                .map_err(|_| Error::InvalidInput(format!("config: bad rect number {p:?}")))
        })
        .collect::<Result<_>>()?;
    if nums.len() != 4 {
        return Err(Error::InvalidInput(
            "config: rect must be re_min:re_max:im_min:im_max".into(),
        ));
    }
    Rect::new(nums[0], nums[1], nums[2], nums[3])
}

/// Default search window: generous margins around the dominant pole strings.
fn default_rect(system: &DelaySystem) -> Rect {
    let tau = system.base_delay();
    let scale: f64 = system.coeffs().iter().map(|c| c.norm()).sum();
    let depth = scale + 6.0 / tau;
    let height = 3.0 * std::f64::consts::PI / tau;
    Rect {
        re_min: -depth,
        re_max: 1e-6,
        im_min: -height,
        im_max: height,
    }
}

fn sweep_values(start: f64, end: f64, step: f64) -> Vec<f64> {
    let n = ((end - start) / step + 1e-9).floor() as usize;
    (0..=n).map(|k| start + step * k as f64).collect()
}

fn push_sweep_rows(out: &mut String, gt: f64, set: &PoleSet) {
    for p in set.poles() {
        let branch = p.branch.map(|n| n.to_string()).unwrap_or_default();
        out.push_str(&format!(
            "{:.16e},{},{:.16e},{:.16e},{:.16e},{:.16e},{}\n",
            gt, branch, p.s.re, p.s.im, p.residue_weight.re, p.residue_weight.im, p.multiplicity
        ));
    }
}

fn write_output(path: Option<&std::path::Path>, content: &str) -> Result<()> {
    match path {
        Some(p) if p.as_os_str() != "-" => {
            std::fs::write(p, content)?;
            Ok(())
        }
        _ => {
            print!("{content}");
            Ok(())
        }
    }
}

fn series_json(ts: &TimeSeries) -> Result<String> {
    let rows: Vec<serde_json::Value> = (0..ts.len())
        .map(|k| {
            let s = ts.sample(k);
            serde_json::json!({
                "t": ts.time(k), "re_a": s.re, "im_a": s.im, "abs2": s.norm_sqr(),
            })
        })
        .collect();
    Ok(format!(
        "{}\n",
        serde_json::to_string_pretty(&rows).map_err(|e| Error::Io(e.to_string()))?
    ))
}

fn pole_set_json(set: &PoleSet) -> Result<String> {
    let rows: Vec<serde_json::Value> = set
        .poles()
        .iter()
        .map(|p| {
            serde_json::json!({
                "branch": p.branch,
                "s": {"re": p.s.re, "im": p.s.im},
                "residue_weight": {"re": p.residue_weight.re, "im": p.residue_weight.im},
                "multiplicity": p.multiplicity,
            })
        })
        .collect();
    Ok(format!(
        "{}\n",
        serde_json::to_string_pretty(&rows).map_err(|e| Error::Io(e.to_string()))?
    ))
}

fn report_json(report: &crate::ep::EpReport) -> Result<String> {
    Ok(format!(
        "{}\n",
        serde_json::to_string_pretty(report).map_err(|e| Error::Io(e.to_string()))?
    ))
}

fn emit_pole_set(
    set: &PoleSet,
    format: Option<Format>,
    output: Option<&std::path::Path>,
) -> Result<RunStatus> {
    match format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let mut buf = Vec::new();
            set.write_csv(&mut buf)?;
            write_output(output, &String::from_utf8(buf).expect("ascii"))?;
        }
        Format::Json => write_output(output, &pole_set_json(set)?)?,
    }
    Ok(RunStatus::Done)
}

fn emit_ep_outcome(
    outcome: Result<EpOutcome>,
    output: Option<&std::path::Path>,
) -> Result<RunStatus> {
    match outcome {
        Ok(EpOutcome::Found(report)) => {
            write_output(output, &report_json(&report)?)?;
            Ok(RunStatus::Done)
        }
        Ok(EpOutcome::NoEp(no)) => {
            let body = serde_json::json!({ "outcome": "no_ep", "reason": no.reason });
            write_output(
                output,
                &format!("{}\n", serde_json::to_string_pretty(&body).unwrap()),
            )?;
            Ok(RunStatus::Structured)
        }
        Err(Error::Infeasible(msg)) => {
            let body = serde_json::json!({ "outcome": "infeasible", "reason": msg });
            write_output(
                output,
                &format!("{}\n", serde_json::to_string_pretty(&body).unwrap()),
            )?;
            Ok(RunStatus::Structured)
        }
        Err(e) => Err(e),
    }
}

/// Figure presets: pole-trajectory sweeps for the four phase panels, the
/// decay family crossing the second-order point, and the three-point decay
/// family crossing its third-order point.
fn run_preset(
    id: &str,
    output: Option<&std::path::Path>,
    pool: &rayon::ThreadPool,
) -> Result<RunStatus> {
    match id {
        "2a" | "2b" | "2c" | "2d" => {
            let phi = match id {
                "2a" => 0.0,
                "2b" => std::f64::consts::PI / 3.0,
                "2c" => 2.0 * std::f64::consts::PI / 3.0,
                _ => std::f64::consts::PI,
            };
            let taus = sweep_values(0.05, 1.0, 0.005);
            let rows: Vec<Result<(f64, PoleSet)>> = pool.install(|| {
                taus.par_iter()
                    .map(|&gt| {
                        let system = DelaySystem::single_delay(1.0, phi, gt)?;
                        Ok((gt, poles_closed_form(&system, -3..=3)?))
                    })
                    .collect()
            });
            let mut out =
                String::from("gamma_tau,branch,re_s,im_s,re_residue,im_residue,multiplicity\n");
            for row in rows {
                let (gt, set) = row?;
                push_sweep_rows(&mut out, gt, &set);
            }
            write_output(output, &out)?;
            Ok(RunStatus::Done)
        }

        "3" => {
            // Decay family for increasing delay, crossing the coalescence.
            let gamma_tau_ep = crate::special::lambert_w0_real(crate::special::INV_E)?;
            let mut out = String::from("gamma_tau,t,re_a,im_a,abs2\n");
            for gt in [0.1, 0.2, gamma_tau_ep, 0.4, 0.6, 1.0] {
                let system = DelaySystem::single_delay(1.0, 0.0, gt)?;
                let ts = integrate(&system, Complex64::new(1.0, 0.0), 10.0, gt / 64.0)?;
                for k in 0..ts.len() {
                    let s = ts.sample(k);
                    out.push_str(&format!(
                        "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n",
                        gt,
                        ts.time(k),
                        s.re,
                        s.im,
                        s.norm_sqr()
                    ));
                }
            }
            write_output(output, &out)?;
            Ok(RunStatus::Done)
        }

        "4" => {
            // Three-point decay family bracketing the third-order point.
            let report = match find_ep3_symmetric(1.0, 1.0, 0.0)? {
                EpOutcome::Found(r) => r,
                EpOutcome::NoEp(no) => {
                    return Err(Error::InvalidInput(format!(
                        "preset 4: unexpected no-EP outcome: {}",
                        no.reason
                    )))
                }
            };
            let g3 = report
                .parameter("g3")
                .ok_or_else(|| Error::InvalidInput("preset 4: missing g3".into()))?;
            let gamma = report
                .parameter("gamma")
                .ok_or_else(|| Error::InvalidInput("preset 4: missing gamma".into()))?;
            let tau_ep = report.tau_ep;
            let mut out = String::from("gamma_tau,t,re_a,im_a,abs2\n");
            for factor in [0.8, 1.0, 1.2] {
                let tau = factor * tau_ep;
                let model = GiantAtomModel::new(vec![1.0, 1.0, g3], 1.0, tau, 0.0)?;
                let system = model.delay_system();
                let ts = integrate(&system, Complex64::new(1.0, 0.0), 10.0 / gamma, tau / 64.0)?;
                for k in 0..ts.len() {
                    let s = ts.sample(k);
                    out.push_str(&format!(
                        "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n",
                        gamma * tau,
                        ts.time(k),
                        s.re,
                        s.im,
                        s.norm_sqr()
                    ));
                }
            }
            write_output(output, &out)?;
            Ok(RunStatus::Done)
        }

        other => Err(Error::InvalidInput(format!(
            "config: unknown figure preset {other:?} (expected 2a, 2b, 2c, 2d, 3, 4)"
        ))),
    }
}
