//! DRLUR, HPUR and Q-learning on the same seeds, with the comparison table.
//! Usage: benchmark_sweep [slots] [seeds]

use aegis::cli::{cmd_pretrain, cmd_sweep, PretrainArgs, SweepArgs};
use aegis::game::UavKind;
use aegis::presets;

fn main() -> aegis::Result<()> {
    let mut args = std::env::args().skip(1).map(|a| a.parse::<u64>().ok());
    let slots = args.next().flatten().unwrap_or(1000) as usize;
    let seeds = args.next().flatten().unwrap_or(3);
    let mut config = presets::load("smart-jammer")?;
    config.run.slots = slots;
    let out = std::env::temp_dir().join("aegis-sweep-example");
    let agents = vec![UavKind::Drlur, UavKind::Hpur, UavKind::QLearn];
    for &kind in &agents[..2] {
        let mut c = config.clone();
        c.uav.kind = kind;
        let h = c.uav.hotboot.clone();
        cmd_pretrain(&PretrainArgs { config: c, out: out.clone(), scenarios: h.scenarios, slots: h.slots, seed: h.seed })?;
    }
    let sweep = cmd_sweep(&SweepArgs {
        config,
        agents,
        seeds: (1..=seeds).collect(),
        hotboot: Some(out.clone()),
        out: out.clone(),
        threads: None,
    })?;
    print!("{}", sweep.table);
    println!("traces and tables in {}", out.display());
    Ok(())
}
