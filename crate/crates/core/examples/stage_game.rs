//! Pure equilibria of the one-shot relay game for each shipped scenario.

use aegis::analysis::{ne_ber_smart, ne_ber_weak, solve_stage_game, stage_game};
use aegis::presets;

fn main() -> aegis::Result<()> {
    for name in presets::NAMES {
        let cfg = presets::load(name)?;
        let game = stage_game(&cfg)?;
        let r = &cfg.radio;
        let eq = solve_stage_game(&game);
        println!("{name}: {} pure equilibria on a {}x{} grid", eq.len(), game.uav_grid.len(), game.jam_grid.len());
        for e in &eq {
            println!("  x = {:5.1} mW  y = {:4.1} mW  BER {:.6}  u = {:.6}", e.x, e.y, e.ber, e.uav_value);
        }
        let weak = ne_ber_weak(r.user_power, game.gains.h1, r.noise_power);
        let smart = ne_ber_smart(r.user_power, r.max_uav_power, r.max_jam_power, &game.gains, r.noise_power);
        println!("  silent-play BER {weak:.6}, full-power BER {smart:.6}");
    }
    Ok(())
}
