//! Built-in numerical checks, each against an oracle that shares no code
//! with the routine under test.

use std::fmt::Write as _;
use std::f64::consts::PI;

use crate::analysis::{ne_ber_smart, ne_ber_weak, solve_stage_game, stage_game};
use crate::error::Result;
use crate::nn::{loss_and_gradients, CnnArchitecture, CnnWeights, Sample};
use crate::numerics::{erfc, RandomStream};
use crate::phy::{message_ber, simulate_qpsk_ber};
use crate::presets;

pub const ERFC_TOLERANCE: f64 = 1e-10;
pub const GRADIENT_TOLERANCE: f64 = 1e-4;
pub const MC_SIGMAS: f64 = 3.0;
pub const STAGE_GAME_TOLERANCE: f64 = 1e-12;

/// Outcome of one check: the worst measured error against its bound.
#[derive(Clone, Debug, PartialEq)]
pub struct CheckReport {
    pub name: &'static str,
    pub measured: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub detail: String,
}

impl CheckReport {
    fn new(name: &'static str, measured: f64, tolerance: f64, detail: String) -> Self {
        // NaN never passes.
        let passed = measured <= tolerance;
        Self { name, measured, tolerance, passed, detail }
    }
}

const GL_NODES: [f64; 5] = [-0.906_179_845_938_664, -0.538_469_310_105_683_1, 0.0, 0.538_469_310_105_683_1, 0.906_179_845_938_664];
const GL_WEIGHTS: [f64; 5] = [
    0.236_926_885_056_189_1,
    0.478_628_670_499_366_5,
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_1,
];

/// Composite 5-point Gauss-Legendre integral of `f` over [a, b].
pub fn gauss_legendre(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * h;
        for (t, w) in GL_NODES.iter().zip(GL_WEIGHTS) {
            total += w * f(mid + 0.5 * h * t);
        }
    }
    0.5 * h * total
}

/// erfc by quadrature of the Gaussian density.
pub fn erfc_quadrature(x: f64) -> f64 {
    let g = |t: f64| (-t * t).exp();
    let c = 2.0 / PI.sqrt();
    if x >= 0.0 {
        // The tail beyond x + 9 is below 1e-35.
        c * gauss_legendre(g, x, x + 9.0, 450)
    } else {
        1.0 + c * gauss_legendre(g, 0.0, -x, 300)
    }
}

pub fn erfc_check() -> CheckReport {
    let n = 1000;
    let mut worst = (0.0_f64, 0.0);
    for i in 0..n {
        let x = -6.0 + 12.0 * i as f64 / (n - 1) as f64;
        let err = match erfc(x) {
            Ok(v) => (v - erfc_quadrature(x)).abs(),
            Err(_) => f64::INFINITY,
        };
        if !(err <= worst.0) {
            worst = (err, x);
        }
    }
    CheckReport::new(
        "erfc vs quadrature",
        worst.0,
        ERFC_TOLERANCE,
        format!("{n} points on [-6, 6], worst at x = {:.4}", worst.1),
    )
}

/// Error injected into one analytic conv bias gradient, to prove the
/// gradient check can fail.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GradientFault {
    pub delta: f64,
}

/// Analytic gradients against central differences on `params_per_input`
/// parameters (spread evenly over the eight parameter groups) for each of
/// `inputs` random inputs.
pub fn gradient_check_with(
    arch: CnnArchitecture,
    inputs: usize,
    params_per_input: usize,
    fault: Option<GradientFault>,
    seed: u64,
) -> Result<CheckReport> {
    let root = RandomStream::new(seed);
    let mut init = root.split("gradcheck-init");
    let mut draw = root.split("gradcheck-draw");
    let mut w = CnnWeights::init(arch, &mut init);
    let l = arch.layout();
    let groups = [l.conv1_b.clone(), l.conv1_w, l.conv2_w, l.conv2_b, l.fc1_w, l.fc1_b, l.fc2_w, l.fc2_b];
    let h = 1e-5;
    // Absolute floor so that gradients at round-off level do not dominate.
    let floor = 1e-6;
    let mut worst = 0.0_f64;
    let mut checked = 0;
    for _ in 0..inputs {
        let input: Vec<f64> = (0..arch.input_len()).map(|_| draw.uniform()).collect();
        let action = draw.below(arch.r2);
        let target = draw.uniform_range(-1.0, 0.0);
        let sample = [Sample { input: &input, action, target }];
        let (_, grad) = loss_and_gradients(&w, &sample)?;
        for k in 0..params_per_input {
            let g = &groups[k % groups.len()];
            let idx = g.start + draw.below(g.len());
            let mut analytic = grad.params()[idx];
            if k == 0 {
                if let Some(f) = fault {
                    analytic += f.delta;
                }
            }
            let orig = w.params()[idx];
            w.params_mut()[idx] = orig + h;
            let up = loss_and_gradients(&w, &sample)?.0;
            w.params_mut()[idx] = orig - h;
            let down = loss_and_gradients(&w, &sample)?.0;
            w.params_mut()[idx] = orig;
            let numeric = (up - down) / (2.0 * h);
            let rel = (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(floor);
            worst = worst.max(if rel.is_nan() { f64::INFINITY } else { rel });
            checked += 1;
        }
    }
    Ok(CheckReport::new(
        "cnn gradient vs central differences",
        worst,
        GRADIENT_TOLERANCE,
        format!("{checked} parameter/input pairs, step {h:e}, max relative error"),
    ))
}

pub fn gradient_check(fault: Option<GradientFault>) -> Result<CheckReport> {
    gradient_check_with(CnnArchitecture::default(), 5, 200, fault, 11)
}

/// Monte Carlo QPSK BER against the closed form, in binomial standard
/// deviations.
pub fn monte_carlo_ber_check(symbols: usize) -> Result<CheckReport> {
    let mut stream = RandomStream::new(13).split("selftest-mc");
    let mut worst = (0.0_f64, 0.0);
    for i in 0..10 {
        let sinr = 0.25 + 0.25 * i as f64;
        let exact = 0.5 * erfc(sinr.sqrt())?;
        let bits = 2.0 * symbols as f64;
        let sigma = (exact * (1.0 - exact) / bits).sqrt();
        let z = (simulate_qpsk_ber(sinr, symbols, &mut stream)? - exact).abs() / sigma;
        if !(z <= worst.0) {
            worst = (z, sinr);
        }
    }
    Ok(CheckReport::new(
        "monte carlo qpsk ber",
        worst.0,
        MC_SIGMAS,
        format!("10 sinr points in [0.25, 2.5], {symbols} symbols each, worst z at sinr {}", worst.1),
    ))
}

/// Brute-force equilibria of the shipped weak and smart presets against the
/// closed-form equilibrium BERs.
pub fn stage_game_check() -> Result<CheckReport> {
    let mut worst = 0.0_f64;
    let mut notes = Vec::new();

    let weak = presets::load("weak-jammer")?;
    let g = stage_game(&weak)?;
    let r = &weak.radio;
    let closed = ne_ber_weak(r.user_power, g.gains.h1, r.noise_power);
    match solve_stage_game(&g).as_slice() {
        [e] if e.x == 0.0 && e.y == 0.0 => {
            worst = worst.max((e.uav_value + closed).abs()).max((e.ber - closed).abs());
            worst = worst.max((message_ber(r.user_power, 0.0, 0.0, &g.gains, r.noise_power) - closed).abs());
        }
        other => {
            worst = f64::INFINITY;
            notes.push(format!("weak preset equilibria {:?}", other.iter().map(|e| (e.x, e.y)).collect::<Vec<_>>()));
        }
    }

    let smart = presets::load("smart-jammer")?;
    let g = stage_game(&smart)?;
    let r = &smart.radio;
    let closed = ne_ber_smart(r.user_power, r.max_uav_power, r.max_jam_power, &g.gains, r.noise_power);
    let eq = solve_stage_game(&g);
    match eq.iter().find(|e| e.x == r.max_uav_power && e.y == r.max_jam_power) {
        Some(e) => worst = worst.max((e.ber - closed).abs()),
        None => {
            worst = f64::INFINITY;
            notes.push(format!("smart preset equilibria {:?}", eq.iter().map(|e| (e.x, e.y)).collect::<Vec<_>>()));
        }
    }
    let detail = if notes.is_empty() {
        "weak preset NE (0, 0), smart preset NE at full powers".to_string()
    } else {
        notes.join("; ")
    };
    Ok(CheckReport::new("stage-game equilibria vs closed forms", worst, STAGE_GAME_TOLERANCE, detail))
}

/// Every check in order. A check that errors out is reported as failed.
pub fn run_all() -> Vec<CheckReport> {
    let failed = |name: &'static str, tol: f64, e: crate::Error| CheckReport::new(name, f64::INFINITY, tol, e.to_string());
    vec![
        erfc_check(),
        gradient_check(None).unwrap_or_else(|e| failed("cnn gradient vs central differences", GRADIENT_TOLERANCE, e)),
        monte_carlo_ber_check(1_000_000).unwrap_or_else(|e| failed("monte carlo qpsk ber", MC_SIGMAS, e)),
        stage_game_check().unwrap_or_else(|e| failed("stage-game equilibria vs closed forms", STAGE_GAME_TOLERANCE, e)),
    ]
}

pub fn format_report(checks: &[CheckReport]) -> String {
    let mut out = String::new();
    for c in checks {
        let _ = writeln!(
            out,
            "{:4} {:40} measured {:.3e}  tolerance {:.1e}  ({})",
            if c.passed { "ok" } else { "FAIL" },
            c.name,
            c.measured,
            c.tolerance,
            c.detail
        );
    }
    out
}
