//! The operations behind the `aegis` command line: pretraining, single
//! runs, seed sweeps and the self-test.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::agents::{hotboot, store_path, HotbootArtifact};
use crate::analysis::{
    convergence_or_end, dat_series, median, ne_reference, report_text, summarize, summary_csv, RunSummary,
    DEFAULT_ETA,
};
use crate::channel::ObservationCase;
use crate::error::{Error, Result};
use crate::game::{batch_threads, run_batch, run_episode, ScenarioConfig, Trace, UavKind};
use crate::numerics::RandomStream;
use crate::presets;
use crate::selftest;
use crate::util::atomic_write;

/// Slot at which sweeps compare moving-average BER.
pub const BER_SLOT: usize = 1000;
/// Slot at which sweeps compare cumulative energy.
pub const ENERGY_SLOT: usize = 1500;

/// Process exit code for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::Domain(_) | Error::Structural(_) | Error::ColdStart(_) => 2,
        Error::Io(_) | Error::Format(_) => 3,
        Error::Numeric(_) => 4,
    }
}

/// Reads a scenario file, or a shipped preset when `spec` names one and no
/// such file exists.
pub fn load_config(spec: &str) -> Result<ScenarioConfig> {
    let path = Path::new(spec);
    if !path.exists() {
        if let Some(text) = presets::text(spec) {
            return ScenarioConfig::from_text(text);
        }
    }
    ScenarioConfig::from_text(&std::fs::read_to_string(path)?)
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

#[derive(Clone, Debug)]
pub struct PretrainArgs {
    pub config: ScenarioConfig,
    pub out: PathBuf,
    pub scenarios: usize,
    pub slots: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PretrainOutcome {
    /// Where the artifact went; `None` when there was nothing to train.
    pub path: Option<PathBuf>,
    pub digest: Option<u64>,
}

pub fn cmd_pretrain(args: &PretrainArgs) -> Result<PretrainOutcome> {
    let mut cfg = args.config.clone();
    cfg.uav.hotboot.scenarios = args.scenarios;
    cfg.uav.hotboot.slots = args.slots;
    cfg.uav.hotboot.seed = args.seed;
    let path = store_path(&args.out, &cfg)
        .ok_or_else(|| Error::Config(format!("a {} agent has nothing to pretrain", cfg.uav.kind.name())))?;
    let Some(art) = hotboot(&cfg, args.scenarios, args.slots, &mut RandomStream::new(args.seed))? else {
        return Ok(PretrainOutcome { path: None, digest: None });
    };
    std::fs::create_dir_all(&args.out)?;
    art.save(&path)?;
    log::info!("wrote {} (digest {:016x})", path.display(), art.digest());
    Ok(PretrainOutcome { path: Some(path), digest: Some(art.digest()) })
}

/// Loads the pretrained artifact for `cfg` from a hotboot store.
pub fn load_hotboot(dir: &Path, cfg: &ScenarioConfig) -> Result<Option<HotbootArtifact>> {
    match store_path(dir, cfg) {
        None => Ok(None),
        Some(p) => {
            if !p.exists() {
                return Err(Error::Io(std::io::Error::new(
                    std::io::ErrorKind::NotFound,
                    format!("no pretrained artifact at {}; run `aegis pretrain` for this scenario first", p.display()),
                )));
            }
            HotbootArtifact::load(&p).map(Some)
        }
    }
}

fn apply_case(cfg: &mut ScenarioConfig, case: Option<u8>) -> Result<()> {
    match case {
        None => {}
        Some(1) => cfg.channel.case = ObservationCase::Ideal,
        Some(2) => {
            cfg.channel.case = ObservationCase::NoisyDelayed;
            cfg.channel.noise_sigma = 1.5;
        }
        Some(c) => return Err(Error::Config(format!("--case must be 1 or 2, got {c}"))),
    }
    Ok(())
}

#[derive(Clone, Debug)]
pub struct RunArgs {
    pub config: ScenarioConfig,
    pub seed: Option<u64>,
    pub slots: Option<usize>,
    pub case: Option<u8>,
    pub hotboot: Option<PathBuf>,
    pub out: PathBuf,
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub trace: Trace,
    pub summary: RunSummary,
    pub report: String,
}

/// One episode: writes the trace CSV at `out` plus `.summary.csv`,
/// `.report.txt`, `.ber.dat` and `.energy.dat` beside it.
pub fn cmd_run(args: &RunArgs) -> Result<RunOutcome> {
    let mut cfg = args.config.clone();
    if let Some(s) = args.seed {
        cfg.run.seed = s;
    }
    if let Some(k) = args.slots {
        cfg.run.slots = k;
    }
    apply_case(&mut cfg, args.case)?;
    cfg.validate()?;
    let art = match &args.hotboot {
        Some(dir) => load_hotboot(dir, &cfg)?,
        None => {
            if cfg.uav.kind == UavKind::Drlur {
                log::info!("no --hotboot store given: DRLUR starts from fresh weights");
            }
            None
        }
    };
    let trace = run_episode(&cfg, art.as_ref())?;
    let summary = summarize(&trace, cfg.run.window, &ne_reference(&cfg)?, DEFAULT_ETA)?;
    let label = format!("{} seed {}", cfg.uav.kind.name(), cfg.run.seed);
    let report = report_text(&label, &trace, &summary);
    let out = &args.out;
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    atomic_write(out, trace.to_csv().as_bytes())?;
    atomic_write(&with_suffix(out, ".summary.csv"), summary_csv(&summary).as_bytes())?;
    atomic_write(&with_suffix(out, ".report.txt"), report.as_bytes())?;
    atomic_write(&with_suffix(out, ".ber.dat"), dat_series(summary.window, &summary.ma_ber).as_bytes())?;
    atomic_write(&with_suffix(out, ".energy.dat"), dat_series(1, &summary.cumulative_energy).as_bytes())?;
    Ok(RunOutcome { trace, summary, report })
}

/// Parses `a..b` (inclusive) or a comma list of seeds.
pub fn parse_seeds(spec: &str) -> Result<Vec<u64>> {
    let bad = || Error::Config(format!("cannot read seeds '{spec}': use 'a..b' or 'a,b,c'"));
    let seeds: Vec<u64> = if let Some((a, b)) = spec.split_once("..") {
        let (a, b): (u64, u64) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
        if a > b {
            return Err(bad());
        }
        (a..=b).collect()
    } else {
        spec.split(',').map(|s| s.trim().parse().map_err(|_| bad())).collect::<Result<_>>()?
    };
    if seeds.is_empty() {
        return Err(bad());
    }
    Ok(seeds)
}

pub fn parse_agents(spec: &str) -> Result<Vec<UavKind>> {
    let agents: Vec<UavKind> = spec.split(',').map(|s| UavKind::parse(s.trim())).collect::<Result<_>>()?;
    if agents.is_empty() {
        return Err(Error::Config("no agents given".into()));
    }
    Ok(agents)
}

#[derive(Clone, Debug)]
pub struct SweepArgs {
    pub config: ScenarioConfig,
    pub agents: Vec<UavKind>,
    pub seeds: Vec<u64>,
    pub hotboot: Option<PathBuf>,
    pub out: PathBuf,
    pub threads: Option<usize>,
}

/// Headline numbers of one sweep cell.
#[derive(Clone, Debug, PartialEq)]
pub struct CellMetrics {
    pub agent: UavKind,
    pub seed: u64,
    pub ma_ber: f64,
    pub energy: f64,
    /// Convergence slot, or slots + 1 when the run never converged.
    pub convergence: f64,
    pub converged: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AgentAggregate {
    pub agent: UavKind,
    pub runs: usize,
    pub ma_ber: f64,
    pub energy: f64,
    pub convergence: f64,
    pub converged_runs: usize,
}

#[derive(Clone, Debug)]
pub struct SweepOutcome {
    pub cells: Vec<CellMetrics>,
    pub aggregate: Vec<AgentAggregate>,
    pub table: String,
}

/// Per-cell metrics at the sweep's comparison slots (clipped to the run).
pub fn cell_metrics(agent: UavKind, seed: u64, trace: &Trace, cfg: &ScenarioConfig) -> Result<CellMetrics> {
    let s = summarize(trace, cfg.run.window, &ne_reference(cfg)?, DEFAULT_ETA)?;
    let n = trace.len();
    Ok(CellMetrics {
        agent,
        seed,
        ma_ber: s.ma_ber_at(BER_SLOT.min(n)).unwrap_or(f64::NAN),
        energy: s.cumulative_energy_at(ENERGY_SLOT.min(n)).unwrap_or(0.0),
        convergence: convergence_or_end(&s, n),
        converged: s.convergence_slot.is_some(),
    })
}

pub fn aggregate(cells: &[CellMetrics], agents: &[UavKind]) -> Vec<AgentAggregate> {
    agents
        .iter()
        .map(|&agent| {
            let mine: Vec<&CellMetrics> = cells.iter().filter(|c| c.agent == agent).collect();
            let col = |f: fn(&CellMetrics) -> f64| median(&mine.iter().map(|c| f(c)).collect::<Vec<_>>());
            AgentAggregate {
                agent,
                runs: mine.len(),
                ma_ber: col(|c| c.ma_ber),
                energy: col(|c| c.energy),
                convergence: col(|c| c.convergence),
                converged_runs: mine.iter().filter(|c| c.converged).count(),
            }
        })
        .collect()
}

pub fn comparison_table(agg: &[AgentAggregate], slots: usize) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:8} {:>5} {:>18} {:>22} {:>20}",
        "agent",
        "runs",
        format!("MA-BER @{}", BER_SLOT.min(slots)),
        format!("energy @{} (mJ)", ENERGY_SLOT.min(slots)),
        "convergence slot"
    );
    for a in agg {
        let conv = if a.converged_runs * 2 > a.runs {
            format!("{:.0}", a.convergence)
        } else {
            format!("> {slots} ({}/{} conv.)", a.converged_runs, a.runs)
        };
        let _ = writeln!(out, "{:8} {:>5} {:>18.6e} {:>22.3} {:>20}", a.agent.name(), a.runs, a.ma_ber, a.energy, conv);
    }
    out
}

/// Every agent against every seed. Writes `<agent>-seed<N>.csv` per cell,
/// `cells.csv`, `aggregate.csv` and `comparison.txt` into `out`.
pub fn cmd_sweep(args: &SweepArgs) -> Result<SweepOutcome> {
    std::fs::create_dir_all(&args.out)?;
    let threads = args.threads.unwrap_or_else(batch_threads);
    let mut cells = Vec::new();
    for &agent in &args.agents {
        let mut cfg = args.config.clone();
        cfg.uav.kind = agent;
        let art = match &args.hotboot {
            Some(dir) => match store_path(dir, &cfg) {
                Some(p) if p.exists() => Some(HotbootArtifact::load(&p)?),
                _ => {
                    log::info!("no pretrained {} artifact in {}: fresh start", agent.name(), dir.display());
                    None
                }
            },
            None => None,
        };
        let traces = run_batch(&cfg, &args.seeds, art.as_ref(), threads)?;
        for (&seed, trace) in args.seeds.iter().zip(&traces) {
            let path = args.out.join(format!("{}-seed{seed}.csv", agent.name()));
            atomic_write(&path, trace.to_csv().as_bytes())?;
            cells.push(cell_metrics(agent, seed, trace, &cfg)?);
        }
    }
    let agg = aggregate(&cells, &args.agents);
    let mut cells_csv = String::from("agent,seed,ma_ber,energy_mJ,convergence_slot,converged\n");
    for c in &cells {
        let _ = writeln!(cells_csv, "{},{},{},{},{},{}", c.agent.name(), c.seed, c.ma_ber, c.energy, c.convergence, c.converged);
    }
    let mut agg_csv = String::from("agent,runs,median_ma_ber,median_energy_mJ,median_convergence_slot,converged_runs\n");
    for a in &agg {
        let _ = writeln!(agg_csv, "{},{},{},{},{},{}", a.agent.name(), a.runs, a.ma_ber, a.energy, a.convergence, a.converged_runs);
    }
    let table = comparison_table(&agg, args.config.run.slots);
    atomic_write(&args.out.join("cells.csv"), cells_csv.as_bytes())?;
    atomic_write(&args.out.join("aggregate.csv"), agg_csv.as_bytes())?;
    atomic_write(&args.out.join("comparison.txt"), table.as_bytes())?;
    Ok(SweepOutcome { cells, aggregate: agg, table })
}

/// Runs every self-check. Returns the report and whether all passed.
pub fn cmd_selftest() -> (String, bool) {
    let checks = selftest::run_all();
    (selftest::format_report(&checks), checks.iter().all(|c| c.passed))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_lists() {
        assert_eq!(parse_seeds("1..3").unwrap(), vec![1, 2, 3]);
        assert_eq!(parse_seeds("4, 9").unwrap(), vec![4, 9]);
        assert!(parse_seeds("3..1").is_err());
        assert!(parse_seeds("x").is_err());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::Config(String::new())), 2);
        assert_eq!(exit_code(&Error::Io(std::io::Error::other("x"))), 3);
        assert_eq!(exit_code(&Error::Numeric(String::new())), 4);
    }

    #[test]
    fn bad_case_is_a_config_error() {
        let mut cfg = ScenarioConfig::default();
        assert!(apply_case(&mut cfg, Some(3)).is_err());
        apply_case(&mut cfg, Some(2)).unwrap();
        assert_eq!(cfg.channel.case, ObservationCase::NoisyDelayed);
        assert_eq!(cfg.channel.noise_sigma, 1.5);
    }
}
