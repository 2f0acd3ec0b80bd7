//! `segmarket`: segmentations under interval price regulation from JSON
//! market files.
//!
//! Exit codes: 0 success (or feasible/valid), 1 usage or I/O error,
//! 2 infeasible window (or invalid scheme), 3 point outside the region.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Parser, Subcommand, ValueEnum};

use segmarket::active::{cs_max_active, lifted_segmentation, ps_max_active, sw_min_active};
use segmarket::io::{self, RegionJson, SchemeJson};
use segmarket::lp::{build_lp, oracle_eta0, oracle_feasible, oracle_max_cs, oracle_max_ps, oracle_min_cs, oracle_min_ps};
use segmarket::passive::{
    cs_max_scheme_with_limit, default_iteration_limit, ps_max_scheme_with_limit, sw_min_scheme_with_limit, Step,
};
use segmarket::rational::{format_dual, format_exact, parse_rational};
use segmarket::region::{region, scheme_for_point, SurplusPoint};
use segmarket::regulator::{design_f, feasibility_sweep, sufficient_condition, write_sweep_csv};
use segmarket::scheme::{scheme_surplus, validate_scheme};
use segmarket::{Error, Market, MarketScheme, Model, RegulatedSet, ValueGrid};

/// `println!` that tolerates a closed stdout (e.g. piped into `head`).
macro_rules! say {
    ($($arg:tt)*) => {{
        use std::io::Write;
        let _ = writeln!(std::io::stdout(), $($arg)*);
    }};
}

const MAX_ITERS_VAR: &str = "SEGMARKET_MAX_ITERS";
const DESK_SCALE_R: i64 = 49;

#[derive(Parser)]
#[command(name = "segmarket", version, about = "Market segmentation under interval price regulation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    Passive,
    Active,
}

impl From<ModelArg> for Model {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::Passive => Model::Passive,
            ModelArg::Active => Model::Active,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Objective {
    PsMax,
    CsMax,
    SwMin,
}

#[derive(Clone, Copy, ValueEnum)]
enum OracleObjective {
    MinCs,
    MaxCs,
    MaxPs,
    MinPs,
    Eta0,
    Feasible,
}

/// Market file plus the regulated window. Window ends are grid values
/// (`3`, `5/2`, `0.5`) or 1-based indices (`#2`).
#[derive(clap::Args)]
struct Instance {
    #[arg(long)]
    market: PathBuf,
    #[arg(long)]
    flo: String,
    #[arg(long)]
    fhi: String,
}

impl Instance {
    fn load(&self) -> anyhow::Result<(Market, RegulatedSet)> {
        let market = load_market(&self.market)?;
        let lo = grid_position(market.grid(), &self.flo)?;
        let hi = grid_position(market.grid(), &self.fhi)?;
        let window = RegulatedSet::new(lo, hi, market.len())?;
        Ok((market, window))
    }
}

#[derive(Subcommand)]
enum Command {
    /// Build one of the extreme schemes.
    Segment {
        #[arg(long, value_enum)]
        model: ModelArg,
        #[arg(long, value_enum)]
        objective: Objective,
        #[command(flatten)]
        instance: Instance,
        /// Write the extraction trace as JSON.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Write the scheme JSON here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Vertices of the achievable (CS, PS) triangle.
    Region {
        #[arg(long, value_enum)]
        model: ModelArg,
        #[command(flatten)]
        instance: Instance,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Scheme achieving a given (CS, PS) pair by mixing the extreme schemes.
    Point {
        #[arg(long, value_enum)]
        model: ModelArg,
        #[command(flatten)]
        instance: Instance,
        #[arg(long)]
        cs: String,
        #[arg(long)]
        ps: String,
        /// Merge segments sharing a price into standard form.
        #[arg(long)]
        merge: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exit 0 when some valid passive scheme exists, 2 otherwise.
    Feasible {
        #[command(flatten)]
        instance: Instance,
    },
    /// Lowest window starting at the bottom value that is feasible.
    DesignF {
        #[arg(long)]
        market: PathBuf,
    },
    /// Feasibility of windows excluding the monopoly price on uniform markets.
    Sweep {
        #[arg(long = "r")]
        r: i64,
        #[arg(long = "l-from", default_value_t = 1)]
        l_from: i64,
        /// Defaults to R.
        #[arg(long = "l-to")]
        l_to: Option<i64>,
        /// Allow R above 49.
        #[arg(long)]
        large: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a scheme file against a window; exit 2 when it is not valid.
    Validate {
        #[arg(long, value_enum)]
        model: ModelArg,
        #[arg(long)]
        scheme: PathBuf,
        #[arg(long)]
        flo: String,
        #[arg(long)]
        fhi: String,
    },
    /// Solve the linear program directly.
    Oracle {
        #[arg(long, value_enum)]
        objective: OracleObjective,
        #[arg(long, value_enum, default_value = "passive")]
        model: ModelArg,
        #[command(flatten)]
        instance: Instance,
        /// Tail start for `eta0`, as a grid value or `#k`.
        #[arg(long)]
        i0: Option<String>,
        /// Write the program in plain text.
        #[arg(long)]
        dump: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            let code = match e.downcast_ref::<Error>() {
                Some(Error::InfeasibleSet) => 2,
                Some(Error::PointOutsideRegion) => 3,
                _ => 1,
            };
            eprintln!("error: {e:#}");
            ExitCode::from(code)
        }
    }
}

fn load_market(path: &Path) -> anyhow::Result<Market> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    io::parse_market(&text).with_context(|| format!("parsing {}", path.display()))
}

fn grid_position(grid: &ValueGrid, text: &str) -> anyhow::Result<usize> {
    if let Some(k) = text.strip_prefix('#') {
        let k: usize = k.parse().with_context(|| format!("bad index {text:?}"))?;
        if k == 0 || k > grid.len() {
            bail!("index {text} outside 1..={}", grid.len());
        }
        return Ok(k - 1);
    }
    let value = parse_rational(text)?;
    grid.index_of(&value).ok_or_else(|| anyhow!("{text} is not a grid value"))
}

fn iteration_limit(market: &Market) -> anyhow::Result<usize> {
    match std::env::var(MAX_ITERS_VAR) {
        Ok(v) => v.parse().with_context(|| format!("{MAX_ITERS_VAR}={v:?} is not a count")),
        Err(_) => Ok(default_iteration_limit(market.len())),
    }
}

fn emit(text: &str, out: Option<&Path>) -> anyhow::Result<()> {
    match out {
        Some(path) => fs::write(path, format!("{text}\n")).with_context(|| format!("writing {}", path.display())),
        None => {
            say!("{text}");
            Ok(())
        }
    }
}

fn print_surplus(scheme: &MarketScheme) -> anyhow::Result<()> {
    let s = scheme_surplus(scheme)?;
    say!("CS={}", format_dual(&s.cs));
    say!("PS={}", format_dual(&s.ps));
    say!("SW={}", format_dual(&s.sw));
    Ok(())
}

fn run(command: Command) -> anyhow::Result<u8> {
    match command {
        Command::Segment { model, objective, instance, trace, out } => {
            let (market, window) = instance.load()?;
            let (scheme, steps) = segment(&market, window, model.into(), objective)?;
            if let Some(path) = trace {
                fs::write(&path, io::trace_json(&steps)).with_context(|| format!("writing {}", path.display()))?;
            }
            print_surplus(&scheme)?;
            emit(&io::scheme_json(&scheme), out.as_deref())?;
            Ok(0)
        }
        Command::Region { model, instance, out } => {
            let (market, window) = instance.load()?;
            let r = region(&market, window, model.into())?;
            emit(&io::pretty(&RegionJson::from_region(&r)), out.as_deref())?;
            Ok(0)
        }
        Command::Point { model, instance, cs, ps, merge, out } => {
            let (market, window) = instance.load()?;
            let target = SurplusPoint::new(parse_rational(&cs)?, parse_rational(&ps)?);
            let mixed = scheme_for_point(&market, window, &target, model.into(), merge)?;
            let w = &mixed.weights;
            say!("weights: min={} seller={} buyer={}", format_exact(&w.min), format_exact(&w.seller), format_exact(&w.buyer));
            print_surplus(&mixed.scheme)?;
            let body = serde_json::json!({
                "weights": {
                    "min": format_exact(&w.min),
                    "seller": format_exact(&w.seller),
                    "buyer": format_exact(&w.buyer),
                },
                "scheme": SchemeJson::from_scheme(&mixed.scheme),
            });
            emit(&io::pretty(&body), out.as_deref())?;
            Ok(0)
        }
        Command::Feasible { instance } => {
            let (market, window) = instance.load()?;
            let limit = iteration_limit(&market)?;
            let feasible = ps_max_scheme_with_limit(&market, window, limit)?.remainder.is_zero();
            let certificate = match sufficient_condition(&market, window) {
                Ok(true) => "holds",
                Ok(false) => "does not hold",
                Err(_) => "not applicable",
            };
            say!("{}", if feasible { "feasible" } else { "infeasible" });
            say!("closed-form certificate: {certificate}");
            Ok(if feasible { 0 } else { 2 })
        }
        Command::DesignF { market } => {
            let market = load_market(&market)?;
            let window = design_f(&market)?;
            say!("{}", window.describe(market.grid()));
            Ok(0)
        }
        Command::Sweep { r, l_from, l_to, large, out } => {
            if r > DESK_SCALE_R && !large {
                bail!("R={r} is above {DESK_SCALE_R}; pass --large to run it anyway");
            }
            if r > DESK_SCALE_R {
                eprintln!("warning: R={r} enumerates O(R^2) windows per L with exact arithmetic; expect a long run");
            }
            let l_to = l_to.unwrap_or(r);
            let lows: Vec<i64> = (l_from..=l_to).collect();
            eprintln!("note: tied optimal prices are all excluded from each window; such rows have opt_tie=true and no certificate");
            let rows = feasibility_sweep(r, &lows)?;
            let mut buf = Vec::new();
            write_sweep_csv(&rows, &mut buf)?;
            match out {
                Some(path) => fs::write(&path, buf).with_context(|| format!("writing {}", path.display()))?,
                None => {
                    use std::io::Write;
                    let _ = std::io::stdout().write_all(&buf);
                }
            }
            Ok(0)
        }
        Command::Validate { model, scheme, flo, fhi } => {
            let text = fs::read_to_string(&scheme).with_context(|| format!("reading {}", scheme.display()))?;
            let scheme = io::parse_scheme(&text).with_context(|| "parsing scheme")?;
            let grid = scheme.aggregate.grid();
            let window = RegulatedSet::new(grid_position(grid, &flo)?, grid_position(grid, &fhi)?, grid.len())?;
            let report = validate_scheme(&scheme, window, model.into());
            if report.is_valid() {
                say!("valid");
                return Ok(0);
            }
            for v in &report.violations {
                say!("{v}");
            }
            say!("{} violation(s)", report.violations.len());
            Ok(2)
        }
        Command::Oracle { objective, model, instance, i0, dump } => {
            let (market, window) = instance.load()?;
            let model: Model = model.into();
            if let Some(path) = dump {
                let lp = build_lp(&market, window, model, window)?;
                fs::write(&path, lp.to_string()).with_context(|| format!("writing {}", path.display()))?;
            }
            let value = match objective {
                OracleObjective::Feasible => {
                    let ok = oracle_feasible(&market, window, model)?;
                    say!("{}", if ok { "feasible" } else { "infeasible" });
                    return Ok(if ok { 0 } else { 2 });
                }
                OracleObjective::MinCs => oracle_min_cs(&market, window, model)?,
                OracleObjective::MaxCs => oracle_max_cs(&market, window, model)?,
                OracleObjective::MaxPs => oracle_max_ps(&market, window, model)?,
                OracleObjective::MinPs => oracle_min_ps(&market, window, model)?,
                OracleObjective::Eta0 => {
                    let i0 = i0.ok_or_else(|| anyhow!("--i0 is required for eta0"))?;
                    oracle_eta0(&market, window, grid_position(market.grid(), &i0)?)?
                }
            };
            say!("{}", format_dual(&value));
            Ok(0)
        }
    }
}

fn segment(
    market: &Market,
    window: RegulatedSet,
    model: Model,
    objective: Objective,
) -> anyhow::Result<(MarketScheme, Vec<Step>)> {
    let limit = iteration_limit(market)?;
    Ok(match model {
        Model::Passive => {
            let run = match objective {
                Objective::PsMax => ps_max_scheme_with_limit(market, window, limit)?,
                Objective::CsMax => cs_max_scheme_with_limit(market, window, limit)?,
                Objective::SwMin => sw_min_scheme_with_limit(market, window, limit)?,
            };
            if !run.remainder.is_zero() {
                return Err(Error::InfeasibleSet.into());
            }
            (run.scheme, run.steps)
        }
        Model::Active => match objective {
            Objective::PsMax => (ps_max_active(market, window)?, Vec::new()),
            Objective::CsMax => (cs_max_active(market, window)?, lifted_segmentation(market, window)?.base.steps),
            Objective::SwMin => (sw_min_active(market, window)?, lifted_segmentation(market, window)?.base.steps),
        },
    })
}
