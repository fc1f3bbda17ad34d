//! Closed-form equilibrium BERs, the brute-force stage-game solver and trace
//! metrics.

use std::fmt::Write as _;

use crate::agents::ActionGrid;
use crate::channel::{abstract_median, ChannelGains, Link};
use crate::error::{Error, Result};
use crate::game::{ChannelModel, ScenarioConfig, Trace};
use crate::numerics::{db_to_linear, erfc_finite};
use crate::phy::{jammer_utility, message_ber, uav_utility, RadioConfig};

/// Relative band around the equilibrium utility that counts as converged.
pub const DEFAULT_ETA: f64 = 0.1;
/// Slack in best-response comparisons.
pub const BR_TOLERANCE: f64 = 1e-12;

/// BER when neither side transmits: the direct link alone.
pub fn ne_ber_weak(p: f64, h1: f64, noise: f64) -> f64 {
    0.5 * erfc_finite((p * h1 / noise).sqrt())
}

/// BER with the UAV relaying at full power against full-power jamming.
pub fn ne_ber_smart(p: f64, uav_max: f64, jam_max: f64, h: &ChannelGains, noise: f64) -> f64 {
    let direct = (p * h.h1 / (noise + h.h3 * jam_max)).sqrt();
    let hop1 = (p * h.h2 / (noise + h.h4 * jam_max)).sqrt();
    let hop2 = (uav_max * h.h5 / noise).sqrt();
    0.5 * erfc_finite(direct.max(hop1.min(hop2)))
}

#[derive(Clone, Debug, PartialEq)]
pub struct StageGame {
    pub gains: ChannelGains,
    pub radio: RadioConfig,
    pub uav_grid: ActionGrid,
    pub jam_grid: ActionGrid,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Equilibrium {
    pub x: f64,
    pub y: f64,
    pub uav_value: f64,
    pub jam_value: f64,
    pub ber: f64,
}

impl StageGame {
    pub fn uav_value(&self, x: f64, y: f64) -> f64 {
        let r = &self.radio;
        uav_utility(r.user_power, x, y, &self.gains, r.noise_power, r.relay_cost)
    }

    pub fn jam_value(&self, x: f64, y: f64) -> f64 {
        jammer_utility(self.uav_value(x, y), y, self.radio.jam_cost)
    }
}

/// Range any equilibrium BER must fall in: no worse than a coin flip, no
/// better than full relay power against a silent jammer.
pub fn message_ber_bounds(game: &StageGame) -> (f64, f64) {
    let r = &game.radio;
    (message_ber(r.user_power, game.uav_grid.max(), 0.0, &game.gains, r.noise_power), 0.5)
}

/// Every pure-strategy equilibrium on the grids, by exhaustive
/// mutual-best-response check. Sorted by (x, y).
pub fn solve_stage_game(game: &StageGame) -> Vec<Equilibrium> {
    let xs = game.uav_grid.levels();
    let ys = game.jam_grid.levels();
    let u: Vec<Vec<f64>> = xs.iter().map(|&x| ys.iter().map(|&y| game.uav_value(x, y)).collect()).collect();
    let v: Vec<Vec<f64>> = xs.iter().map(|&x| ys.iter().map(|&y| game.jam_value(x, y)).collect()).collect();
    let mut out = Vec::new();
    for (i, &x) in xs.iter().enumerate() {
        for (j, &y) in ys.iter().enumerate() {
            let uav_best = (0..xs.len()).map(|a| u[a][j]).fold(f64::NEG_INFINITY, f64::max);
            let jam_best = v[i].iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if u[i][j] >= uav_best - BR_TOLERANCE && v[i][j] >= jam_best - BR_TOLERANCE {
                let r = &game.radio;
                out.push(Equilibrium {
                    x,
                    y,
                    uav_value: u[i][j],
                    jam_value: v[i][j],
                    ber: message_ber(r.user_power, x, y, &game.gains, r.noise_power),
                });
            }
        }
    }
    out
}

/// What a trace is compared against.
#[derive(Clone, Debug, PartialEq)]
pub enum NeReference {
    /// One equilibrium utility and BER for every slot.
    Constant { utility: f64, ber: f64 },
    /// The equilibrium action pair evaluated on each slot's recorded gains.
    PerSlot { x: f64, y: f64, radio: RadioConfig },
}

impl NeReference {
    fn series(&self, trace: &Trace) -> (Vec<f64>, Vec<f64>) {
        match self {
            NeReference::Constant { utility, ber } => (vec![*utility; trace.len()], vec![*ber; trace.len()]),
            NeReference::PerSlot { x, y, radio } => trace
                .records
                .iter()
                .map(|r| {
                    let (p, n) = (radio.user_power, radio.noise_power);
                    (
                        uav_utility(p, *x, *y, &r.gains, n, radio.relay_cost),
                        message_ber(p, *x, *y, &r.gains, n),
                    )
                })
                .unzip(),
        }
    }
}

/// Median gains of a scenario: the configured medians in abstract mode, the
/// path-loss medians at the starting positions in geometry mode.
pub fn median_gains(cfg: &ScenarioConfig) -> ChannelGains {
    match &cfg.channel.model {
        ChannelModel::Abstract(links) => ChannelGains::from_array(links.map(|l| abstract_median(&l))),
        ChannelModel::Geometry(g) => {
            let d = g.geometry.distances();
            let params = g.link_params();
            ChannelGains::from_array(Link::ALL.map(|l| db_to_linear(params[l as usize].mean_db_at(d[l as usize]))))
        }
    }
}

/// The stage game a scenario plays at its median gains.
pub fn stage_game(cfg: &ScenarioConfig) -> Result<StageGame> {
    Ok(StageGame {
        gains: median_gains(cfg),
        radio: cfg.radio.clone(),
        uav_grid: cfg.uav_grid()?,
        jam_grid: cfg.jammer.grid.clone(),
    })
}

/// Equilibrium reference for a scenario's traces. With several pure
/// equilibria the one best for the UAV is used; with none, the UAV's
/// maximin pair stands in.
pub fn ne_reference(cfg: &ScenarioConfig) -> Result<NeReference> {
    let game = stage_game(cfg)?;
    let best = solve_stage_game(&game)
        .into_iter()
        .fold(None::<Equilibrium>, |acc, e| match acc {
            Some(a) if a.uav_value >= e.uav_value => Some(a),
            _ => Some(e),
        });
    let (x, y) = match best {
        Some(e) => (e.x, e.y),
        None => {
            let ys = game.jam_grid.levels();
            let mut pick = (f64::NEG_INFINITY, 0.0, 0.0);
            for &x in game.uav_grid.levels() {
                let (worst, y) = ys
                    .iter()
                    .map(|&y| (game.uav_value(x, y), y))
                    .fold((f64::INFINITY, 0.0), |a, b| if b.0 < a.0 { b } else { a });
                if worst > pick.0 {
                    pick = (worst, x, y);
                }
            }
            (pick.1, pick.2)
        }
    };
    Ok(NeReference::PerSlot { x, y, radio: cfg.radio.clone() })
}

/// Trailing means: entry `i` is the mean of `values[i..i + w]`, i.e. the
/// window ending at slot `i + w`.
pub fn moving_average(values: &[f64], w: usize) -> Vec<f64> {
    if w == 0 || values.len() < w {
        return Vec::new();
    }
    // Each window is summed afresh so long runs accumulate no drift.
    values.windows(w).map(|win| win.iter().sum::<f64>() / w as f64).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunSummary {
    /// Window actually used (the trace length when shorter than requested).
    pub window: usize,
    /// Moving averages indexed by their last slot: entry `i` is slot `window + i`.
    pub ma_ber: Vec<f64>,
    pub ma_utility: Vec<f64>,
    pub ma_ne_utility: Vec<f64>,
    pub energy: Vec<f64>,
    pub cumulative_energy: Vec<f64>,
    pub convergence_slot: Option<usize>,
    pub terminal_ber: f64,
    pub ne_ber: f64,
    pub ne_gap: f64,
}

impl RunSummary {
    /// Moving-average BER of the window ending at `slot`, if defined.
    pub fn ma_ber_at(&self, slot: usize) -> Option<f64> {
        slot.checked_sub(self.window).and_then(|i| self.ma_ber.get(i)).copied()
    }

    pub fn cumulative_energy_at(&self, slot: usize) -> Option<f64> {
        slot.checked_sub(1).and_then(|i| self.cumulative_energy.get(i)).copied()
    }
}

/// Moving averages, energy and convergence of a trace against `ne`.
/// Convergence is the first slot whose window-mean utility lies within
/// `eta * |NE|` of the window-mean NE utility and stays there to the end.
pub fn summarize(trace: &Trace, window: usize, ne: &NeReference, eta: f64) -> Result<RunSummary> {
    if window == 0 {
        return Err(Error::Domain("summary window must be at least 1".into()));
    }
    let w = window.min(trace.len()).max(1);
    let ber = trace.column(|r| r.pe);
    let util = trace.column(|r| r.u_uav);
    let energy = trace.column(|r| r.energy);
    let (ne_u, ne_b) = ne.series(trace);
    let ma_ber = moving_average(&ber, w);
    let ma_utility = moving_average(&util, w);
    let ma_ne_utility = moving_average(&ne_u, w);
    let ma_ne_ber = moving_average(&ne_b, w);
    let mut convergence_slot = None;
    for i in (0..ma_utility.len()).rev() {
        if (ma_utility[i] - ma_ne_utility[i]).abs() <= eta * ma_ne_utility[i].abs() {
            convergence_slot = Some(i + w);
        } else {
            break;
        }
    }
    let cumulative_energy = energy
        .iter()
        .scan(0.0, |acc, e| {
            *acc += e;
            Some(*acc)
        })
        .collect();
    let terminal_ber = ma_ber.last().copied().unwrap_or(f64::NAN);
    let ne_ber = ma_ne_ber.last().copied().unwrap_or(f64::NAN);
    Ok(RunSummary {
        window: w,
        ma_ber,
        ma_utility,
        ma_ne_utility,
        energy,
        cumulative_energy,
        convergence_slot,
        terminal_ber,
        ne_ber,
        ne_gap: (terminal_ber - ne_ber).abs(),
    })
}

pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Most frequent value (lowest on ties) and its share of `values`.
pub fn modal_value(values: &[f64]) -> Option<(f64, f64)> {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let mut best: Option<(f64, usize)> = None;
    let mut i = 0;
    while i < v.len() {
        let j = v[i..].iter().position(|x| *x != v[i]).map_or(v.len(), |p| i + p);
        if best.map_or(true, |(_, c)| j - i > c) {
            best = Some((v[i], j - i));
        }
        i = j;
    }
    best.map(|(x, c)| (x, c as f64 / values.len() as f64))
}

/// Convergence slots with "not converged" counted as one past the end.
pub fn convergence_or_end(summary: &RunSummary, slots: usize) -> f64 {
    summary.convergence_slot.map_or(slots as f64 + 1.0, |s| s as f64)
}

/// Summary as `slot,ma_ber,ma_utility,ma_ne_utility,cumulative_energy_mJ` rows.
pub fn summary_csv(s: &RunSummary) -> String {
    let mut out = String::from("slot,ma_ber,ma_utility,ma_ne_utility,cumulative_energy_mJ\n");
    for i in 0..s.ma_ber.len() {
        let slot = i + s.window;
        let _ = writeln!(
            out,
            "{slot},{},{},{},{}",
            s.ma_ber[i], s.ma_utility[i], s.ma_ne_utility[i], s.cumulative_energy[slot - 1]
        );
    }
    out
}

/// Plot-ready two-column `slot value` lines.
pub fn dat_series(first_slot: usize, values: &[f64]) -> String {
    let mut out = String::new();
    for (i, v) in values.iter().enumerate() {
        let _ = writeln!(out, "{} {}", first_slot + i, v);
    }
    out
}

pub fn report_text(label: &str, trace: &Trace, s: &RunSummary) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "run           {label}");
    let _ = writeln!(out, "config digest {:016x}", trace.config_digest);
    if let Some(d) = trace.artifact_digest {
        let _ = writeln!(out, "agent digest  {d:016x}");
    }
    let _ = writeln!(out, "slots         {}", trace.len());
    let _ = writeln!(out, "window        {}", s.window);
    let _ = writeln!(out, "terminal BER  {:.6e}", s.terminal_ber);
    let _ = writeln!(out, "NE BER        {:.6e}", s.ne_ber);
    let _ = writeln!(out, "NE gap        {:.6e}", s.ne_gap);
    match s.convergence_slot {
        Some(k) => {
            let _ = writeln!(out, "converged at  slot {k}");
        }
        None => {
            let _ = writeln!(out, "converged at  not converged");
        }
    }
    let _ = writeln!(out, "energy        {:.6} mJ", s.cumulative_energy.last().copied().unwrap_or(0.0));
    if trace.len() >= 1 {
        let tail = &trace.records[trace.len().saturating_sub(200)..];
        let xs: Vec<f64> = tail.iter().map(|r| r.x).collect();
        let ys: Vec<f64> = tail.iter().map(|r| r.y).collect();
        if let (Some((x, fx)), Some((y, fy))) = (modal_value(&xs), modal_value(&ys)) {
            let _ = writeln!(out, "modal x       {x} mW ({:.1}% of last {})", 100.0 * fx, tail.len());
            let _ = writeln!(out, "modal y       {y} mW ({:.1}% of last {})", 100.0 * fy, tail.len());
        }
    }
    out
}
