//! Acceptance criteria A1-A9. Runs as a plain binary so every criterion
//! prints its own PASS/FAIL line; exits non-zero if any fails.

use std::time::{Duration, Instant};

use aegis::agents::{hotboot, HotbootArtifact};
use aegis::analysis::{
    convergence_or_end, median, modal_value, ne_ber_smart, ne_ber_weak, ne_reference, solve_stage_game, stage_game,
    summarize, RunSummary, DEFAULT_ETA,
};
use aegis::game::{run_batch, ScenarioConfig, Trace, UavKind};
use aegis::nn::{forward_counted, CnnArchitecture, CnnWeights, OpCounts};
use aegis::numerics::RandomStream;
use aegis::presets;
use aegis::selftest;

const SEEDS: [u64; 10] = [1, 2, 3, 4, 5, 6, 7, 8, 9, 10];

struct Outcome {
    id: &'static str,
    pass: bool,
    detail: String,
    elapsed: Duration,
}

struct Runs {
    cfg: ScenarioConfig,
    traces: Vec<Trace>,
    summaries: Vec<RunSummary>,
}

impl Runs {
    fn modal_share(&self, x: f64, y: f64) -> usize {
        self.traces
            .iter()
            .filter(|t| {
                let tail = &t.records[t.len() - 200..];
                let xs: Vec<f64> = tail.iter().map(|r| r.x).collect();
                let ys: Vec<f64> = tail.iter().map(|r| r.y).collect();
                modal_value(&xs).map(|m| m.0) == Some(x) && modal_value(&ys).map(|m| m.0) == Some(y)
            })
            .count()
    }

    fn median_of(&self, f: impl Fn(&RunSummary, &Trace) -> f64) -> f64 {
        median(&self.summaries.iter().zip(&self.traces).map(|(s, t)| f(s, t)).collect::<Vec<_>>())
    }
}

fn pretrain(cfg: &ScenarioConfig) -> Option<HotbootArtifact> {
    let h = &cfg.uav.hotboot;
    hotboot(cfg, h.scenarios, h.slots, &mut RandomStream::new(h.seed)).expect("pretraining failed")
}

fn runs(base: &ScenarioConfig, kind: UavKind, hot: bool) -> Runs {
    let mut cfg = base.clone();
    cfg.uav.kind = kind;
    let art = if hot { pretrain(&cfg) } else { None };
    let traces = run_batch(&cfg, &SEEDS, art.as_ref(), 1).expect("episode failed");
    let ne = ne_reference(&cfg).unwrap();
    let summaries = traces.iter().map(|t| summarize(t, cfg.run.window, &ne, DEFAULT_ETA).unwrap()).collect();
    Runs { cfg, traces, summaries }
}

fn ber_at(s: &RunSummary, slot: usize) -> f64 {
    s.ma_ber_at(slot).unwrap()
}

fn a1() -> (bool, String) {
    let cfg = presets::load("weak-jammer").unwrap();
    let eq = solve_stage_game(&stage_game(&cfg).unwrap());
    let unique_silent = eq.len() == 1 && eq[0].x == 0.0 && eq[0].y == 0.0;
    let r = runs(&cfg, UavKind::Drlur, true);
    let silent = r
        .traces
        .iter()
        .filter(|t| t.records[t.len() - 200..].iter().filter(|r| r.x == 0.0).count() as f64 >= 0.95 * 200.0)
        .count();
    let g = stage_game(&cfg).unwrap().gains;
    let weak = ne_ber_weak(cfg.radio.user_power, g.h1, cfg.radio.noise_power);
    let worst_gap = r.summaries.iter().map(|s| (s.terminal_ber - weak).abs()).fold(0.0, f64::max);
    let pass = unique_silent && silent >= 8 && worst_gap <= 1e-9;
    (
        pass,
        format!(
            "brute-force NE {:?}; x = 0 in >= 95% of last 200 slots for {silent}/10 seeds; max |terminal MA-BER - {weak:.9}| = {worst_gap:.2e}",
            eq.iter().map(|e| (e.x, e.y)).collect::<Vec<_>>()
        ),
    )
}

struct Smart {
    hot: Runs,
    fresh: Runs,
    hpur: Runs,
    qlearn: Runs,
}

fn a2(s: &Smart) -> (bool, String) {
    let cfg = &s.hot.cfg;
    let r = &cfg.radio;
    let eq = solve_stage_game(&stage_game(cfg).unwrap());
    let has_ne = eq.iter().any(|e| e.x == r.max_uav_power && e.y == r.max_jam_power);
    let modal = s.hot.modal_share(r.max_uav_power, r.max_jam_power);
    let g = stage_game(cfg).unwrap().gains;
    let smart = ne_ber_smart(r.user_power, r.max_uav_power, r.max_jam_power, &g, r.noise_power);
    let term = s.hot.median_of(|s, _| s.terminal_ber);
    let rel = (term - smart).abs() / smart;
    let pass = has_ne && modal >= 8 && rel <= 0.05;
    (
        pass,
        format!(
            "brute-force NE {:?}; modal (150, 80) for {modal}/10 seeds; median terminal MA-BER {term:.5} vs {smart:.5} ({:.2}% off)",
            eq.iter().map(|e| (e.x, e.y)).collect::<Vec<_>>(),
            100.0 * rel
        ),
    )
}

fn a3(s: &Smart) -> (bool, String) {
    let d = s.hot.median_of(|s, _| ber_at(s, 1000));
    let h = s.hpur.median_of(|s, _| ber_at(s, 1000));
    let q = s.qlearn.median_of(|s, _| ber_at(s, 1000));
    let pass = d < h && h < q && d <= 0.5 * q;
    (
        pass,
        format!("median MA-BER @1000: DRLUR {d:.5}, HPUR {h:.5}, Q-learning {q:.5}; DRLUR/Q-learning = {:.3}", d / q),
    )
}

fn a4(s: &Smart) -> (bool, String) {
    let conv = |r: &Runs| r.median_of(|s, t| convergence_or_end(s, t.len()));
    let converged = |r: &Runs| r.summaries.iter().filter(|s| s.convergence_slot.is_some()).count();
    let (d, h, f) = (conv(&s.hot), conv(&s.hpur), conv(&s.fresh));
    let pass = d <= 0.5 * h && d <= f;
    (
        pass,
        format!(
            "median convergence slot (2001 = never): DRLUR {d} ({}/10 converged), HPUR {h} ({}/10), fresh DRLUR {f} ({}/10); need DRLUR <= {:.1} and <= fresh",
            converged(&s.hot),
            converged(&s.hpur),
            converged(&s.fresh),
            0.5 * h
        ),
    )
}

fn a5(s: &Smart) -> (bool, String) {
    let e = |r: &Runs| r.median_of(|s, _| s.cumulative_energy_at(1500).unwrap());
    let (d, h) = (e(&s.hot), e(&s.hpur));
    (d <= h, format!("median cumulative energy @1500: DRLUR {d:.3} mJ, HPUR {h:.3} mJ"))
}

fn a6(s: &Smart) -> (bool, String) {
    let cfg = presets::load("case2").unwrap();
    let c2 = runs(&cfg, UavKind::Drlur, true);
    let r = &cfg.radio;
    let modal = c2.modal_share(r.max_uav_power, r.max_jam_power);
    let t1 = s.hot.median_of(|s, _| s.terminal_ber);
    let t2 = c2.median_of(|s, _| s.terminal_ber);
    let degrade = (t2 - t1) / t1;
    let pass = modal >= 6 && degrade < 0.5;
    (
        pass,
        format!(
            "case 2 modal (150, 80) for {modal}/10 seeds; median terminal MA-BER {t2:.5} vs case 1 {t1:.5} ({:+.2}%)",
            100.0 * degrade
        ),
    )
}

fn a7() -> (bool, String) {
    let checks = [
        selftest::erfc_check(),
        selftest::gradient_check(None).unwrap(),
        selftest::monte_carlo_ber_check(1_000_000).unwrap(),
    ];
    let pass = checks.iter().all(|c| c.passed);
    let detail = checks
        .iter()
        .map(|c| format!("{} {:.2e} (tol {:.0e})", c.name, c.measured, c.tolerance))
        .collect::<Vec<_>>()
        .join("; ");
    (pass, detail)
}

fn a8() -> (bool, String) {
    let mut same = 0;
    for name in presets::NAMES {
        let mut cfg = presets::load(name).unwrap();
        cfg.run.slots = 300;
        let a = run_batch(&cfg, &[5], None, 1).unwrap().remove(0).to_csv();
        let b = run_batch(&cfg, &[5], None, 1).unwrap().remove(0).to_csv();
        same += usize::from(a == b);
    }
    let mut cfg = presets::load("smart-jammer").unwrap();
    cfg.run.slots = 300;
    let seq: Vec<String> = run_batch(&cfg, &[3, 1, 2], None, 1).unwrap().iter().map(Trace::to_csv).collect();
    let par: Vec<String> = run_batch(&cfg, &[3, 1, 2], None, 3).unwrap().iter().map(Trace::to_csv).collect();
    let batch_same = seq == par;
    (
        same == presets::NAMES.len() && batch_same,
        format!(
            "{same}/{} presets bytewise identical on rerun; parallel batch identical to sequential: {batch_same}",
            presets::NAMES.len()
        ),
    )
}

fn a9() -> (bool, String) {
    let arch = CnnArchitecture::default();
    let w = CnnWeights::init(arch, &mut RandomStream::new(9));
    let mut counts = OpCounts::default();
    forward_counted(&w, &vec![0.5; arch.input_len()], &mut counts).unwrap();
    let closed = (arch.f1 * arch.f2 * arch.n3 * arch.n3 * (arch.n1 - arch.n2 - arch.n3 + 2).pow(2)) as u64;
    let pass = counts.conv2 == 180_000 && closed == 180_000 && arch.conv2_multiplies() == 180_000;
    (pass, format!("instrumented conv2 multiplies {}, closed form {closed}", counts.conv2))
}

fn timed(id: &'static str, out: &mut Vec<Outcome>, f: impl FnOnce() -> (bool, String)) {
    let t0 = Instant::now();
    let (pass, detail) = f();
    let o = Outcome { id, pass, detail, elapsed: t0.elapsed() };
    println!("{} {}: {} [{:.1}s]", o.id, if o.pass { "PASS" } else { "FAIL" }, o.detail, o.elapsed.as_secs_f64());
    out.push(o);
}

fn main() {
    let mut out = Vec::new();
    timed("A7", &mut out, a7);
    timed("A9", &mut out, a9);
    timed("A8", &mut out, a8);
    timed("A1", &mut out, || {
        let t0 = Instant::now();
        let (pass, detail) = a1();
        let secs = t0.elapsed().as_secs_f64();
        (pass && secs < 600.0, format!("{detail}; runtime {secs:.0}s (limit 600s)"))
    });

    let t0 = Instant::now();
    let cfg = presets::load("smart-jammer").unwrap();
    let smart = Smart {
        hot: runs(&cfg, UavKind::Drlur, true),
        fresh: runs(&cfg, UavKind::Drlur, false),
        hpur: runs(&cfg, UavKind::Hpur, true),
        qlearn: runs(&cfg, UavKind::QLearn, false),
    };
    let smart_secs = t0.elapsed().as_secs_f64();
    println!("smart-jammer preset: 40 episodes and 2 pretraining runs in {smart_secs:.0}s");
    timed("A2", &mut out, || a2(&smart));
    timed("A3", &mut out, || {
        let (pass, detail) = a3(&smart);
        (pass && smart_secs < 1800.0, format!("{detail}; runtime {smart_secs:.0}s (limit 1800s)"))
    });
    timed("A4", &mut out, || a4(&smart));
    timed("A5", &mut out, || a5(&smart));
    timed("A6", &mut out, || a6(&smart));

    out.sort_by_key(|o| o.id[1..].parse::<u32>().unwrap());
    let failed: Vec<&str> = out.iter().filter(|o| !o.pass).map(|o| o.id).collect();
    println!("acceptance: {}/{} criteria pass", out.len() - failed.len(), out.len());
    for o in &out {
        println!("  {} {}", o.id, if o.pass { "PASS" } else { "FAIL" });
    }
    if !failed.is_empty() {
        println!("failed: {}", failed.join(", "));
        std::process::exit(1);
    }
}
