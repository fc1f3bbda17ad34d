//! Pretraining on perturbed scenarios, a store round trip, and how far the
//! pretrained Q-values moved from a fresh network.

use aegis::agents::{build_sequence_matrix, hotboot, DrlurAgent, HotbootArtifact, SequenceLayout, UavState};
use aegis::numerics::RandomStream;
use aegis::presets;

fn main() -> aegis::Result<()> {
    let cfg = presets::load("smart-jammer")?;
    let h = &cfg.uav.hotboot;
    println!("pretraining on {} scenarios x {} slots", h.scenarios, h.slots);
    let art = hotboot(&cfg, h.scenarios, h.slots, &mut RandomStream::new(h.seed))?.expect("DRLUR has weights");
    let path = std::env::temp_dir().join("aegis-hotboot-example.uavq");
    art.save(&path)?;
    let back = HotbootArtifact::load(&path)?;
    println!("{} digest {:016x}, reloaded digest {:016x}", path.display(), art.digest(), back.digest());

    let grid = cfg.uav_grid()?;
    let d = &cfg.uav.drlur;
    let fresh = DrlurAgent::fresh(d.clone(), grid.clone(), &mut RandomStream::new(cfg.run.seed))?;
    let HotbootArtifact::Weights(w) = back else { unreachable!() };
    let hot = DrlurAgent::new(d.clone(), grid.clone(), w)?;
    let layout = SequenceLayout::new(d.history, d.arch.n1)?;
    let seq = build_sequence_matrix(&layout, &[UavState::neutral()], &[])?;
    let (qf, qh) = (fresh.q_values(&seq)?, hot.q_values(&seq)?);
    let best = |q: &[f64]| q.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).map(|(i, _)| grid.level(i)).unwrap();
    println!("greedy relay power on a neutral state: fresh {} mW, pretrained {} mW", best(&qf), best(&qh));
    Ok(())
}
