//! One pretrained DRLUR episode against the learning jammer, printed as a
//! learning curve.

use aegis::agents::hotboot;
use aegis::analysis::{ne_reference, summarize, DEFAULT_ETA};
use aegis::game::run_episode;
use aegis::numerics::RandomStream;
use aegis::presets;

fn main() -> aegis::Result<()> {
    let mut cfg = presets::load("smart-jammer")?;
    cfg.run.seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(1);
    let h = cfg.uav.hotboot.clone();
    let art = hotboot(&cfg, h.scenarios, h.slots, &mut RandomStream::new(h.seed))?;
    let trace = run_episode(&cfg, art.as_ref())?;
    let s = summarize(&trace, cfg.run.window, &ne_reference(&cfg)?, DEFAULT_ETA)?;
    println!("{:>6} {:>10} {:>10} {:>8}", "slot", "MA-BER", "MA-util", "x");
    for slot in (200..=trace.len()).step_by(200) {
        let i = slot - s.window;
        println!("{slot:>6} {:>10.5} {:>10.5} {:>8.1}", s.ma_ber[i], s.ma_utility[i], trace.records[slot - 1].x);
    }
    println!("terminal MA-BER {:.5}, equilibrium {:.5}, converged at {:?}", s.terminal_ber, s.ne_ber, s.convergence_slot);
    Ok(())
}
