//! Command-line front end. `run` is the testable entry point; `main` only
//! forwards `std::env::args` and the exit code.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use crate::envelopes::{lue, rue};
use crate::error::{Error, Result};
use crate::evacuation::{optimal_sink, regret, theta};
use crate::io::{parse_instance, parse_scenario, put_rational, render};
use crate::oracle::{check_shift, grid_rmax, simulate_evacuation, sweep_ropt, GridConfig, SimConfig};
use crate::path_model::{PathInstance, Point, Scenario};
use crate::profiles::{m_edge, m_k, WeightBox};
use crate::rational::{fmt, frac, int, parse, zero, Q};
use crate::regret::{f_upper, r_max, r_opt, Witness};

#[derive(Debug, Parser)]
#[command(
    name = "pathregret",
    version,
    about = "Minmax-regret sink location on dynamic path networks"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check an instance file.
    Validate {
        #[arg(long)]
        instance: PathBuf,
    },
    /// Evacuation time to a sink under a scenario.
    Evacuate {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        sink: String,
    },
    /// Optimal sink for a fixed scenario.
    OptimalSink {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        scenario: PathBuf,
    },
    /// Regret of a sink under a scenario.
    Regret {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        sink: String,
    },
    /// Maximum regret of a sink over all scenarios.
    Maxregret {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        sink: String,
    },
    /// Minmax-regret sink.
    MinmaxRegret {
        #[arg(long)]
        instance: PathBuf,
    },
    /// Brute-force cross-checks.
    Oracle {
        #[arg(value_enum)]
        mode: OracleMode,
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        scenario: Option<PathBuf>,
        #[arg(long)]
        sink: Option<String>,
        /// Weight grid step (default: widest interval / 64).
        #[arg(long)]
        grid: Option<String>,
        /// Simulation time step (default: shortest edge / 1024).
        #[arg(long)]
        dt: Option<String>,
        /// Uniform sink samples for `sweep`.
        #[arg(long, default_value_t = 64)]
        samples: usize,
        /// Trials for `shift`.
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Print a named profile as CSV: lue:i:j, rue:i:j, mk:i:j:k, medge:i:j:k, F:i:j:x.
    DumpPwl {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        name: String,
        /// Base scenario for lue/rue (default: all lower bounds).
        #[arg(long)]
        scenario: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OracleMode {
    /// Time-stepped evacuation against the closed form (needs --scenario, --sink).
    Simulate,
    /// Grid maximum regret against the exact one (needs --sink).
    GridRmax,
    /// Grid minmax-regret sweep against the exact solver.
    Sweep,
    /// Randomised check that shifting weight never lowers the maximum regret.
    Shift,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

enum Output {
    Json(Value),
    Text(String),
}

/// Parses `argv` (program name first) and runs the command.
pub fn run<I, T>(argv: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            return if code == 0 {
                Outcome {
                    code,
                    stdout: text,
                    stderr: String::new(),
                }
            } else {
                Outcome {
                    code,
                    stdout: String::new(),
                    stderr: text,
                }
            };
        }
    };
    match execute(cli.command) {
        Ok(Output::Json(v)) => Outcome {
            code: 0,
            stdout: render(&v),
            stderr: String::new(),
        },
        Ok(Output::Text(t)) => Outcome {
            code: 0,
            stdout: t,
            stderr: String::new(),
        },
        Err(e) => {
            let diagnostics = diagnostics(&e);
            let stderr = diagnostics.iter().map(|d| format!("error: {d}\n")).collect();
            let v = json!({"ok": false, "errors": diagnostics});
            Outcome {
                code: 1,
                stdout: render(&v),
                stderr,
            }
        }
    }
}

fn diagnostics(e: &Error) -> Vec<String> {
    match e {
        Error::InvalidInstance(vs) => vs.iter().map(|v| v.to_string()).collect(),
        other => vec![other.to_string()],
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Malformed(format!("{}: {e}", path.display())))
}

fn load_instance(path: &Path) -> Result<PathInstance> {
    parse_instance(&read(path)?)
}

fn load_scenario(path: &Path, p: &PathInstance) -> Result<Scenario> {
    parse_scenario(&read(path)?, p)
}

fn sink(p: &PathInstance, s: &str) -> Result<Q> {
    let x = parse(s).map_err(|e| Error::Malformed(format!("sink: {e}")))?;
    p.point(x.clone())?;
    Ok(x)
}

fn rational_arg(s: &str, what: &str) -> Result<Q> {
    let q = parse(s).map_err(|e| Error::Malformed(format!("{what}: {e}")))?;
    if q <= zero() {
        return Err(Error::Malformed(format!("{what} must be positive")));
    }
    Ok(q)
}

fn point_json(m: &mut Map<String, Value>, key: &str, pt: &Point) {
    put_rational(m, key, &pt.value);
    m.insert(format!("{key}_vertex"), json!(pt.vertex));
}

fn witness_json(w: &Witness) -> Value {
    let mut m = Map::new();
    m.insert("family".into(), json!(w.family.name()));
    m.insert("i".into(), json!(w.i));
    m.insert("j".into(), json!(w.j));
    m.insert("edge".into(), json!(w.u));
    put_rational(&mut m, "alpha", &w.alpha);
    put_rational(&mut m, "beta", &w.beta);
    m.insert(
        "scenario".into(),
        json!(w.scenario.weights().iter().map(fmt).collect::<Vec<_>>()),
    );
    m.insert("attained".into(), json!(w.attained));
    Value::Object(m)
}

fn default_grid(p: &PathInstance) -> Q {
    let widest = (0..=p.n()).map(|i| p.hi(i) - p.lo(i)).max().unwrap_or_else(zero);
    if widest > zero() {
        widest / int(64)
    } else {
        frac(1, 64)
    }
}

fn default_dt(p: &PathInstance) -> Q {
    let shortest = (0..p.n()).map(|k| p.x(k + 1) - p.x(k)).min().unwrap_or_else(|| int(1));
    shortest / int(1024)
}

fn execute(cmd: Command) -> Result<Output> {
    let mut m = Map::new();
    match cmd {
        Command::Validate { instance } => {
            let p = load_instance(&instance)?;
            m.insert("ok".into(), json!(true));
            m.insert("vertices".into(), json!(p.n() + 1));
        }
        Command::Evacuate {
            instance,
            scenario,
            sink: x,
        } => {
            let p = load_instance(&instance)?;
            let s = load_scenario(&scenario, &p)?;
            let x = sink(&p, &x)?;
            let r = theta(&p, &x, &s)?;
            put_rational(&mut m, "theta_left", &r.theta_left);
            put_rational(&mut m, "theta_right", &r.theta_right);
            put_rational(&mut m, "theta", &r.theta);
            m.insert("left_critical".into(), json!(r.lcv));
            m.insert("right_critical".into(), json!(r.rcv));
        }
        Command::OptimalSink { instance, scenario } => {
            let p = load_instance(&instance)?;
            let s = load_scenario(&scenario, &p)?;
            let o = optimal_sink(&p, &s)?;
            point_json(&mut m, "location", &o.location);
            put_rational(&mut m, "value", &o.value);
        }
        Command::Regret {
            instance,
            scenario,
            sink: x,
        } => {
            let p = load_instance(&instance)?;
            let s = load_scenario(&scenario, &p)?;
            let x = sink(&p, &x)?;
            let t = theta(&p, &x, &s)?;
            let o = optimal_sink(&p, &s)?;
            put_rational(&mut m, "regret", &regret(&p, &x, &s)?);
            put_rational(&mut m, "theta", &t.theta);
            put_rational(&mut m, "optimum", &o.value);
            point_json(&mut m, "optimal_location", &o.location);
        }
        Command::Maxregret { instance, sink: x } => {
            let p = load_instance(&instance)?;
            let x = sink(&p, &x)?;
            let r = r_max(&p, &x)?;
            point_json(&mut m, "sink", &r.location);
            put_rational(&mut m, "value", &r.value);
            m.insert("witness".into(), r.witness.as_ref().map_or(Value::Null, witness_json));
        }
        Command::MinmaxRegret { instance } => {
            let p = load_instance(&instance)?;
            let r = r_opt(&p)?;
            point_json(&mut m, "location", &r.location);
            put_rational(&mut m, "value", &r.value);
            m.insert("witness".into(), r.witness.as_ref().map_or(Value::Null, witness_json));
        }
        Command::Oracle {
            mode,
            instance,
            scenario,
            sink: x,
            grid,
            dt,
            samples,
            trials,
            seed,
        } => {
            let p = load_instance(&instance)?;
            let h = match grid {
                Some(g) => rational_arg(&g, "grid")?,
                None => default_grid(&p),
            };
            let dt = match dt {
                Some(d) => rational_arg(&d, "dt")?,
                None => default_dt(&p),
            };
            m.insert("mode".into(), json!(format!("{mode:?}").to_lowercase()));
            match mode {
                OracleMode::Simulate => {
                    let (Some(sp), Some(x)) = (scenario, x) else {
                        return Err(Error::Malformed("simulate needs --scenario and --sink".into()));
                    };
                    let s = load_scenario(&sp, &p)?;
                    let x = sink(&p, &x)?;
                    put_rational(&mut m, "dt", &dt);
                    put_rational(
                        &mut m,
                        "simulated",
                        &simulate_evacuation(&p, &x, &s, &SimConfig::new(dt.clone()))?,
                    );
                    put_rational(&mut m, "exact", &theta(&p, &x, &s)?.theta);
                }
                OracleMode::GridRmax => {
                    let Some(x) = x else {
                        return Err(Error::Malformed("grid-rmax needs --sink".into()));
                    };
                    let x = sink(&p, &x)?;
                    put_rational(&mut m, "grid", &h);
                    put_rational(&mut m, "grid_value", &grid_rmax(&p, &x, &GridConfig { h: h.clone() })?);
                    put_rational(&mut m, "exact", &r_max(&p, &x)?.value);
                }
                OracleMode::Sweep => {
                    let (loc, val) = sweep_ropt(&p, &GridConfig { h: h.clone() }, samples.max(p.n() + 1))?;
                    let exact = r_opt(&p)?;
                    put_rational(&mut m, "grid", &h);
                    put_rational(&mut m, "grid_location", &loc);
                    put_rational(&mut m, "grid_value", &val);
                    put_rational(&mut m, "exact_location", &exact.location.value);
                    put_rational(&mut m, "exact", &exact.value);
                }
                OracleMode::Shift => {
                    let r = check_shift(&p, trials, seed)?;
                    m.insert("trials".into(), json!(r.trials));
                    m.insert("checked".into(), json!(r.checked));
                    m.insert("violations".into(), json!(r.violations));
                }
            }
        }
        Command::DumpPwl {
            instance,
            name,
            scenario,
        } => {
            let p = load_instance(&instance)?;
            let base = match scenario {
                Some(sp) => load_scenario(&sp, &p)?,
                None => Scenario::new(p.weight_lo().to_vec())?,
            };
            return dump(&p, &base, &name).map(Output::Text);
        }
    }
    Ok(Output::Json(Value::Object(m)))
}

fn index(s: &str) -> Result<usize> {
    s.parse().map_err(|_| Error::Malformed(format!("bad index {s:?}")))
}

fn dump(p: &PathInstance, base: &Scenario, name: &str) -> Result<String> {
    let parts: Vec<&str> = name.split(':').collect();
    let bad = || Error::Malformed(format!("unknown profile name {name:?}"));
    match parts.as_slice() {
        ["lue", i, j] | ["rue", i, j] => {
            let (i, j) = (index(i)?, index(j)?);
            p.check_index(i)?;
            let (lo, hi) = (p.lo(i), p.hi(i));
            let e = if parts[0] == "lue" {
                lue(p, base, i, j, lo, hi)?
            } else {
                rue(p, base, i, j, lo, hi)?
            };
            Ok(e.to_partial().to_csv())
        }
        ["mk", i, j, k] | ["medge", i, j, k] => {
            let (i, j, k) = (index(i)?, index(j)?, index(k)?);
            p.check_index(i)?;
            p.check_index(j)?;
            let bx = WeightBox::new(p.lo(i).clone(), p.hi(i).clone(), p.lo(j).clone(), p.hi(j).clone())?;
            let base = p.two_varying(i, j, zero(), zero())?;
            let f = if parts[0] == "mk" {
                m_k(p, &base, i, j, k, &bx)?
            } else {
                m_edge(p, &base, i, j, k, &bx)?
            };
            Ok(f.to_csv())
        }
        ["F", i, j, x] => {
            let x = parse(x).map_err(|e| Error::Malformed(format!("F: {e}")))?;
            Ok(f_upper(p, index(i)?, index(j)?, &x)?.to_partial().to_csv())
        }
        _ => Err(bad()),
    }
}
