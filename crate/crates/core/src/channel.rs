//! Node geometry, user mobility, per-slot channel gains and the UAV's view of
//! them.

use crate::error::{Error, Result};
use crate::numerics::{db_to_linear, RandomStream};

/// Distances below this are clamped before path loss is applied.
pub const MIN_DISTANCE_M: f64 = 1.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Point2) -> f64 {
        ((self.x - other.x).powi(2) + (self.y - other.y).powi(2)).sqrt()
    }

    /// Distance to an elevated point; ground nodes sit at altitude 0.
    pub fn distance_3d(&self, other: &Point3) -> f64 {
        ((self.x - other.x).powi(2) + (self.y - other.y).powi(2) + other.z.powi(2)).sqrt()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

/// The five links, in gain-vector order.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Link {
    UserBs0 = 0,
    UserUav = 1,
    JammerBs0 = 2,
    JammerUav = 3,
    UavBs1 = 4,
}

impl Link {
    pub const ALL: [Link; 5] = [
        Link::UserBs0,
        Link::UserUav,
        Link::JammerBs0,
        Link::JammerUav,
        Link::UavBs1,
    ];

    pub fn is_air(self) -> bool {
        matches!(self, Link::UserUav | Link::JammerUav | Link::UavBs1)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Geometry {
    pub user: Point2,
    pub bs0: Point2,
    pub bs1: Point2,
    pub jammer: Point2,
    pub uav: Point3,
    pub cell_radius: f64,
}

impl Geometry {
    pub fn validate(&self) -> Result<()> {
        if !(self.uav.z > 0.0) {
            return Err(Error::Config("uav altitude must be positive".into()));
        }
        if !(self.cell_radius > 0.0) {
            return Err(Error::Config("cell radius must be positive".into()));
        }
        if self.bs1.distance(&self.jammer) <= self.bs0.distance(&self.jammer) {
            return Err(Error::Config("bs1 must be farther from the jammer than bs0".into()));
        }
        Ok(())
    }

    /// Clamped link distances in gain-vector order.
    pub fn distances(&self) -> [f64; 5] {
        let d = [
            self.user.distance(&self.bs0),
            self.user.distance_3d(&self.uav),
            self.jammer.distance(&self.bs0),
            self.jammer.distance_3d(&self.uav),
            self.bs1.distance_3d(&self.uav),
        ];
        d.map(|x| x.max(MIN_DISTANCE_M))
    }
}

/// Log-distance path loss with log-normal shadowing for one link.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinkParams {
    pub mean_db_at_ref: f64,
    pub pathloss_exp: f64,
    pub shadow_sigma_db: f64,
    pub ref_dist: f64,
}

impl LinkParams {
    pub const GROUND: LinkParams = LinkParams {
        mean_db_at_ref: -30.0,
        pathloss_exp: 3.0,
        shadow_sigma_db: 6.0,
        ref_dist: 1.0,
    };
    pub const AIR: LinkParams = LinkParams {
        mean_db_at_ref: -30.0,
        pathloss_exp: 2.05,
        shadow_sigma_db: 3.0,
        ref_dist: 1.0,
    };

    pub fn default_for(link: Link) -> Self {
        if link.is_air() {
            Self::AIR
        } else {
            Self::GROUND
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(1.5..=6.0).contains(&self.pathloss_exp) {
            return Err(Error::Config(format!("pathloss exponent {} outside [1.5, 6]", self.pathloss_exp)));
        }
        if !(0.0..=12.0).contains(&self.shadow_sigma_db) {
            return Err(Error::Config(format!("shadow sigma {} dB outside [0, 12]", self.shadow_sigma_db)));
        }
        if !(self.ref_dist > 0.0) {
            return Err(Error::Config("reference distance must be positive".into()));
        }
        Ok(())
    }

    /// Median gain in dB at distance `d`.
    pub fn mean_db_at(&self, d: f64) -> f64 {
        self.mean_db_at_ref - 10.0 * self.pathloss_exp * (d.max(MIN_DISTANCE_M) / self.ref_dist).log10()
    }
}

/// A link specified directly by its median gain and shadowing spread.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AbstractLink {
    pub mean_db: f64,
    pub sigma_db: f64,
}

/// Linear power gains h1..h5 for one slot.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChannelGains {
    /// user -> BS0
    pub h1: f64,
    /// user -> UAV
    pub h2: f64,
    /// jammer -> BS0
    pub h3: f64,
    /// jammer -> UAV
    pub h4: f64,
    /// UAV -> BS1
    pub h5: f64,
}

impl ChannelGains {
    pub fn from_array(h: [f64; 5]) -> Self {
        Self { h1: h[0], h2: h[1], h3: h[2], h4: h[3], h5: h[4] }
    }

    pub fn to_array(&self) -> [f64; 5] {
        [self.h1, self.h2, self.h3, self.h4, self.h5]
    }

    pub fn is_valid(&self) -> bool {
        self.to_array().iter().all(|h| h.is_finite() && *h > 0.0)
    }
}

/// Samples the gains of every link from geometry-derived path loss.
pub fn gains_from_geometry(geom: &Geometry, params: &[LinkParams; 5], stream: &mut RandomStream) -> Result<ChannelGains> {
    let d = geom.distances();
    let mut h = [0.0; 5];
    for link in Link::ALL {
        let p = &params[link as usize];
        h[link as usize] = stream.lognormal_db(p.mean_db_at(d[link as usize]), p.shadow_sigma_db)?;
    }
    Ok(ChannelGains::from_array(h))
}

/// Samples the gains of every link from per-link median and spread.
pub fn gains_from_abstract(links: &[AbstractLink; 5], stream: &mut RandomStream) -> Result<ChannelGains> {
    let mut h = [0.0; 5];
    for (slot, link) in h.iter_mut().zip(links) {
        *slot = stream.lognormal_db(link.mean_db, link.sigma_db)?;
    }
    Ok(ChannelGains::from_array(h))
}

/// Random-waypoint state of the user inside the serving cell.
#[derive(Clone, Debug, PartialEq)]
pub struct Mobility {
    pub pos: Point2,
    pub waypoint: Point2,
    pub speed: f64,
}

fn uniform_in_disc(center: Point2, radius: f64, stream: &mut RandomStream) -> Point2 {
    let r = radius * stream.uniform().sqrt();
    let theta = 2.0 * std::f64::consts::PI * stream.uniform();
    Point2::new(center.x + r * theta.cos(), center.y + r * theta.sin())
}

impl Mobility {
    /// Starts at `pos` with a fresh waypoint and speed.
    pub fn start(pos: Point2, center: Point2, cell_radius: f64, speed_range: (f64, f64), stream: &mut RandomStream) -> Self {
        Self {
            pos,
            waypoint: uniform_in_disc(center, cell_radius, stream),
            speed: stream.uniform_range(speed_range.0, speed_range.1),
        }
    }

    /// Advances the user by `dt` seconds toward its waypoint. On arrival the
    /// user stops at the waypoint and draws the next waypoint and speed.
    pub fn step(&mut self, center: Point2, cell_radius: f64, speed_range: (f64, f64), dt: f64, stream: &mut RandomStream) -> Result<()> {
        if !(dt > 0.0) {
            return Err(Error::Domain(format!("mobility dt must be positive, got {dt}")));
        }
        let remaining = self.pos.distance(&self.waypoint);
        let travel = self.speed * dt;
        if travel >= remaining {
            self.pos = self.waypoint;
            self.waypoint = uniform_in_disc(center, cell_radius, stream);
            self.speed = stream.uniform_range(speed_range.0, speed_range.1);
        } else if travel > 0.0 {
            let f = travel / remaining;
            self.pos = Point2::new(
                self.pos.x + f * (self.waypoint.x - self.pos.x),
                self.pos.y + f * (self.waypoint.y - self.pos.y),
            );
        }
        Ok(())
    }
}

/// How the UAV perceives the previous slots.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ObservationCase {
    /// Exact values from slot k-1.
    Ideal,
    /// Values from slot k-2 with Gaussian error on the normalized scale.
    NoisyDelayed,
}

impl ObservationCase {
    pub fn delay(self) -> usize {
        match self {
            ObservationCase::Ideal => 1,
            ObservationCase::NoisyDelayed => 2,
        }
    }
}

/// Maps gains and jamming power onto [0, 1].
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureScale {
    pub max_gain: [f64; 5],
    pub max_jam_power: f64,
}

/// Smallest normalized gain an estimate may take, so estimates stay positive.
pub const MIN_NORMALIZED_GAIN: f64 = 1e-6;

impl FeatureScale {
    pub fn gain_to_unit(&self, h: &ChannelGains) -> [f64; 5] {
        let h = h.to_array();
        std::array::from_fn(|i| (h[i] / self.max_gain[i]).clamp(0.0, 1.0))
    }

    pub fn jam_to_unit(&self, y: f64) -> f64 {
        (y / self.max_jam_power).clamp(0.0, 1.0)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct UavObservation {
    pub est_gains: ChannelGains,
    pub est_jam_power: f64,
    /// Slot the estimate describes; 0 for the neutral cold-start observation.
    pub slot_of_origin: usize,
}

impl UavObservation {
    /// Every component at mid-scale.
    pub fn neutral(scale: &FeatureScale) -> Self {
        Self {
            est_gains: ChannelGains::from_array(scale.max_gain.map(|g| 0.5 * g)),
            est_jam_power: 0.5 * scale.max_jam_power,
            slot_of_origin: 0,
        }
    }
}

/// The UAV's estimate, available at the start of slot `k` (1-based), of the
/// gains and jamming power. `gains_history[i]` and `jam_history[i]` hold slot
/// `i + 1`.
pub fn observe(
    gains_history: &[ChannelGains],
    jam_history: &[f64],
    k: usize,
    case: ObservationCase,
    noise_sigma: f64,
    scale: &FeatureScale,
    stream: &mut RandomStream,
) -> Result<UavObservation> {
    let delay = case.delay();
    if k <= delay {
        return Err(Error::ColdStart(k));
    }
    let origin = k - delay;
    let (Some(gains), Some(&jam)) = (gains_history.get(origin - 1), jam_history.get(origin - 1)) else {
        return Err(Error::Structural(format!("history does not reach slot {origin}")));
    };
    match case {
        ObservationCase::Ideal => Ok(UavObservation {
            est_gains: *gains,
            est_jam_power: jam,
            slot_of_origin: origin,
        }),
        ObservationCase::NoisyDelayed => {
            let unit = scale.gain_to_unit(gains);
            let mut est = [0.0; 5];
            for i in 0..5 {
                let noisy = stream.gaussian(unit[i], noise_sigma)?;
                est[i] = noisy.clamp(MIN_NORMALIZED_GAIN, 1.0) * scale.max_gain[i];
            }
            let jam_noisy = stream.gaussian(scale.jam_to_unit(jam), noise_sigma)?;
            Ok(UavObservation {
                est_gains: ChannelGains::from_array(est),
                est_jam_power: jam_noisy.clamp(0.0, 1.0) * scale.max_jam_power,
                slot_of_origin: origin,
            })
        }
    }
}

/// Default per-link parameters: ground links NLOS, UAV links LOS.
pub fn default_link_params() -> [LinkParams; 5] {
    Link::ALL.map(LinkParams::default_for)
}

/// Median linear gain of an abstract link.
pub fn abstract_median(link: &AbstractLink) -> f64 {
    db_to_linear(link.mean_db)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn geom() -> Geometry {
        Geometry {
            user: Point2::new(100.0, 0.0),
            bs0: Point2::new(0.0, 0.0),
            bs1: Point2::new(600.0, 0.0),
            jammer: Point2::new(-50.0, 0.0),
            uav: Point3 { x: 300.0, y: 0.0, z: 100.0 },
            cell_radius: 250.0,
        }
    }

    #[test]
    fn reference_distance_gain() {
        let mut g = geom();
        g.user = Point2::new(1.0, 0.0);
        let p = LinkParams { mean_db_at_ref: -20.0, pathloss_exp: 2.0, shadow_sigma_db: 0.0, ref_dist: 1.0 };
        let mut s = RandomStream::new(1);
        let h = gains_from_geometry(&g, &[p; 5], &mut s).unwrap();
        assert!((h.h1 - 0.01).abs() < 1e-15);
    }

    #[test]
    fn inverse_square_at_twice_reference() {
        let p = LinkParams { mean_db_at_ref: 0.0, pathloss_exp: 2.0, shadow_sigma_db: 0.0, ref_dist: 1.0 };
        assert!((db_to_linear(p.mean_db_at(2.0)) - 0.25).abs() < 1e-12);
    }

    #[test]
    fn los_beats_nlos_at_equal_distance() {
        let mut s = RandomStream::new(9);
        let d = 200.0;
        let (mut air, mut ground) = (0.0, 0.0);
        for _ in 0..10_000 {
            air += s.lognormal_db(LinkParams::AIR.mean_db_at(d), LinkParams::AIR.shadow_sigma_db).unwrap();
            ground += s.lognormal_db(LinkParams::GROUND.mean_db_at(d), LinkParams::GROUND.shadow_sigma_db).unwrap();
        }
        assert!(air > ground);
    }

    #[test]
    fn zero_speed_is_stationary() {
        let mut s = RandomStream::new(2);
        let c = Point2::new(0.0, 0.0);
        let mut m = Mobility::start(Point2::new(10.0, 5.0), c, 100.0, (0.0, 0.0), &mut s);
        for _ in 0..100 {
            m.step(c, 100.0, (0.0, 0.0), 1.0, &mut s).unwrap();
        }
        assert_eq!(m.pos, Point2::new(10.0, 5.0));
    }

    #[test]
    fn waypoint_arrival_kinematics() {
        let mut s = RandomStream::new(2);
        let c = Point2::new(0.0, 0.0);
        let mut m = Mobility { pos: c, waypoint: Point2::new(6.0, 8.0), speed: 5.0 };
        m.step(c, 100.0, (1.0, 2.0), 1.0, &mut s).unwrap();
        assert!((m.pos.distance(&Point2::new(3.0, 4.0))) < 1e-12);
        m.step(c, 100.0, (1.0, 2.0), 1.0, &mut s).unwrap();
        assert_eq!(m.pos, Point2::new(6.0, 8.0));
        assert!(m.step(c, 100.0, (1.0, 2.0), 0.0, &mut s).is_err());
    }

    #[test]
    fn mobility_stays_in_cell() {
        let mut s = RandomStream::new(4);
        let c = Point2::new(20.0, -30.0);
        let r = 50.0;
        let mut m = Mobility::start(c, c, r, (1.0, 20.0), &mut s);
        for _ in 0..100_000 {
            m.step(c, r, (1.0, 20.0), 0.5, &mut s).unwrap();
            assert!(m.pos.distance(&c) <= r + 1e-9);
        }
    }

    #[test]
    fn geometry_validation() {
        let mut g = geom();
        assert!(g.validate().is_ok());
        g.bs1 = Point2::new(-60.0, 0.0);
        assert!(g.validate().is_err());
        let mut g = geom();
        g.uav.z = 0.0;
        assert!(g.validate().is_err());
    }

    fn scale() -> FeatureScale {
        FeatureScale { max_gain: [2.0; 5], max_jam_power: 80.0 }
    }

    fn history(n: usize) -> (Vec<ChannelGains>, Vec<f64>) {
        let g = (1..=n).map(|k| ChannelGains::from_array([k as f64 * 0.01; 5])).collect();
        let y = (1..=n).map(|k| k as f64).collect();
        (g, y)
    }

    #[test]
    fn ideal_returns_previous_slot() {
        let (g, y) = history(10);
        let mut s = RandomStream::new(1);
        let o = observe(&g, &y, 6, ObservationCase::Ideal, 1.5, &scale(), &mut s).unwrap();
        assert_eq!(o.slot_of_origin, 5);
        assert_eq!(o.est_gains, g[4]);
        assert_eq!(o.est_jam_power, 5.0);
        assert!(matches!(observe(&g, &y, 1, ObservationCase::Ideal, 0.0, &scale(), &mut s), Err(Error::ColdStart(1))));
    }

    #[test]
    fn noiseless_delayed_is_pure_delay() {
        let (g, y) = history(10);
        let mut s = RandomStream::new(1);
        let o = observe(&g, &y, 6, ObservationCase::NoisyDelayed, 0.0, &scale(), &mut s).unwrap();
        assert_eq!(o.slot_of_origin, 4);
        for (a, b) in o.est_gains.to_array().iter().zip(g[3].to_array()) {
            assert!((a - b).abs() < 1e-15);
        }
        assert!((o.est_jam_power - 4.0).abs() < 1e-12);
        assert!(observe(&g, &y, 2, ObservationCase::NoisyDelayed, 0.0, &scale(), &mut s).is_err());
    }

    #[test]
    fn clamped_noise_is_symmetric_at_midscale() {
        let g = vec![ChannelGains::from_array([1.0; 5]); 3];
        let y = vec![40.0; 3];
        let sc = scale();
        let mut s = RandomStream::new(77);
        let n = 100_000;
        let mut sum = 0.0;
        for _ in 0..n {
            let o = observe(&g, &y, 3, ObservationCase::NoisyDelayed, 1.5, &sc, &mut s).unwrap();
            sum += sc.jam_to_unit(o.est_jam_power);
            assert!(o.est_gains.is_valid());
            assert!((0.0..=80.0).contains(&o.est_jam_power));
        }
        let mean = sum / n as f64;
        assert!((0.45..=0.55).contains(&mean), "mean {mean}");
    }
}
