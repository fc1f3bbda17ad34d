//! Path loss and shadowing for the five links while the user roams its cell.

use aegis::channel::{gains_from_geometry, Link, Mobility};
use aegis::game::ChannelModel;
use aegis::numerics::RandomStream;
use aegis::presets;

fn main() -> aegis::Result<()> {
    let cfg = presets::load("degraded-relay")?;
    let ChannelModel::Geometry(model) = &cfg.channel.model else {
        unreachable!("this preset places nodes explicitly");
    };
    let params = model.link_params();
    let center = model.cell_center();
    let speeds = (model.speed_min, model.speed_max);
    let mut stream = RandomStream::new(3);
    let mut geom = model.geometry.clone();
    let mut walk = Mobility::start(geom.user, center, geom.cell_radius, speeds, &mut stream);

    let slots = 10_000;
    let mut sum_db = [0.0; 5];
    let mut farthest: f64 = 0.0;
    for _ in 0..slots {
        walk.step(center, geom.cell_radius, speeds, 1.0, &mut stream)?;
        geom.user = walk.pos;
        farthest = farthest.max(walk.pos.distance(&center));
        let h = gains_from_geometry(&geom, &params, &mut stream)?;
        for (s, g) in sum_db.iter_mut().zip(h.to_array()) {
            *s += 10.0 * g.log10();
        }
    }
    for (i, link) in Link::ALL.iter().enumerate() {
        println!("{link:?}: mean gain {:.2} dB over {slots} slots", sum_db[i] / slots as f64);
    }
    println!("user stayed within {farthest:.1} m of the cell center (radius {})", geom.cell_radius);
    Ok(())
}
