//! Ideal feedback against delayed, noisy feedback for the same seeds.

use aegis::agents::hotboot;
use aegis::analysis::{median, ne_reference, summarize, DEFAULT_ETA};
use aegis::channel::ObservationCase;
use aegis::game::run_batch;
use aegis::numerics::RandomStream;
use aegis::presets;

fn main() -> aegis::Result<()> {
    let seeds = [1, 2, 3];
    for case in [ObservationCase::Ideal, ObservationCase::NoisyDelayed] {
        let mut cfg = presets::load("smart-jammer")?;
        cfg.channel.case = case;
        cfg.channel.noise_sigma = 1.5;
        let h = cfg.uav.hotboot.clone();
        let art = hotboot(&cfg, h.scenarios, h.slots, &mut RandomStream::new(h.seed))?;
        let ne = ne_reference(&cfg)?;
        let mut terminal = Vec::new();
        for t in run_batch(&cfg, &seeds, art.as_ref(), 1)? {
            terminal.push(summarize(&t, cfg.run.window, &ne, DEFAULT_ETA)?.terminal_ber);
        }
        println!("{case:?}: median terminal MA-BER {:.5} over seeds {seeds:?}", median(&terminal));
    }
    Ok(())
}
