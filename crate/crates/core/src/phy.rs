//! QPSK bit-error rates, the relay game utilities and energy accounting.

use crate::channel::ChannelGains;
use crate::error::{Error, Result};
use crate::numerics::{erfc_finite, RandomStream};

/// Powers in mW, costs in utility per mW, slot duration in seconds.
#[derive(Clone, Debug, PartialEq)]
pub struct RadioConfig {
    pub user_power: f64,
    pub noise_power: f64,
    pub relay_cost: f64,
    pub jam_cost: f64,
    pub max_uav_power: f64,
    pub max_jam_power: f64,
    pub slot_duration: f64,
    /// Upper limit accepted for the user transmit power.
    pub user_power_limit: f64,
}

impl Default for RadioConfig {
    fn default() -> Self {
        Self {
            user_power: 50.0,
            noise_power: 1e-6,
            relay_cost: 0.001,
            jam_cost: 0.001,
            max_uav_power: 150.0,
            max_jam_power: 80.0,
            slot_duration: 0.001,
            user_power_limit: 200.0,
        }
    }
}

impl RadioConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("user_power", self.user_power),
            ("noise_power", self.noise_power),
            ("relay_cost", self.relay_cost),
            ("max_uav_power", self.max_uav_power),
            ("max_jam_power", self.max_jam_power),
            ("slot_duration", self.slot_duration),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("radio.{name} must be positive, got {v}")));
            }
        }
        if !(self.jam_cost >= 0.0 && self.jam_cost.is_finite()) {
            return Err(Error::Config(format!("radio.jam_cost must be >= 0, got {}", self.jam_cost)));
        }
        if self.user_power > self.user_power_limit {
            return Err(Error::Config(format!(
                "radio.user_power {} exceeds limit {}",
                self.user_power, self.user_power_limit
            )));
        }
        Ok(())
    }
}

/// QPSK bit-error rate in AWGN: `0.5 * erfc(sqrt(sinr))`.
pub fn ber_from_sinr(sinr: f64) -> Result<f64> {
    if !(sinr >= 0.0) || sinr.is_nan() {
        return Err(Error::Domain(format!("sinr must be >= 0, got {sinr}")));
    }
    Ok(ber_unchecked(sinr))
}

fn ber_unchecked(sinr: f64) -> f64 {
    if sinr.is_infinite() {
        return 0.0;
    }
    0.5 * erfc_finite(sinr.sqrt())
}

/// Per-path SINRs of one slot.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PathSinr {
    pub direct: f64,
    pub user_uav: f64,
    pub uav_bs1: f64,
}

pub fn path_sinr(p: f64, x: f64, y: f64, h: &ChannelGains, noise: f64) -> PathSinr {
    PathSinr {
        direct: p * h.h1 / (noise + y * h.h3),
        user_uav: p * h.h2 / (noise + y * h.h4),
        uav_bs1: x * h.h5 / noise,
    }
}

fn check_powers(p: f64, x: f64, y: f64, noise: f64) -> Result<()> {
    for (name, v) in [("user power", p), ("relay power", x), ("jam power", y)] {
        if !(v >= 0.0 && v.is_finite()) {
            return Err(Error::Domain(format!("{name} must be finite and >= 0, got {v}")));
        }
    }
    if !(noise > 0.0) {
        return Err(Error::Domain(format!("noise power must be positive, got {noise}")));
    }
    Ok(())
}

/// BERs measured by the server: direct link, user-to-UAV hop, UAV-to-BS1 hop.
/// A silent UAV (x = 0) leaves the third entry at 0.5.
pub fn ber_vector(p: f64, x: f64, y: f64, h: &ChannelGains, noise: f64) -> Result<[f64; 3]> {
    check_powers(p, x, y, noise)?;
    let s = path_sinr(p, x, y, h, noise);
    let rho3 = if x > 0.0 { ber_unchecked(s.uav_bs1) } else { 0.5 };
    Ok([ber_unchecked(s.direct), ber_unchecked(s.user_uav), rho3])
}

/// BER of the user message: the better of the direct path and the relay
/// path, the relay path being limited by its weaker hop.
pub fn message_ber(p: f64, x: f64, y: f64, h: &ChannelGains, noise: f64) -> f64 {
    let s = path_sinr(p, x, y, h, noise);
    let relay = s.user_uav.sqrt().min(s.uav_bs1.sqrt());
    0.5 * erfc_finite(s.direct.sqrt().max(relay))
}

/// UAV utility: negative message BER minus the relay cost.
pub fn uav_utility(p: f64, x: f64, y: f64, h: &ChannelGains, noise: f64, relay_cost: f64) -> f64 {
    -message_ber(p, x, y, h, noise) - x * relay_cost
}

/// Jammer utility: the UAV's loss minus the jamming cost.
pub fn jammer_utility(u_uav: f64, y: f64, jam_cost: f64) -> f64 {
    -u_uav - y * jam_cost
}

/// Energy spent by user and UAV in one slot, in mJ.
pub fn slot_energy(p: f64, x: f64, slot_duration: f64) -> f64 {
    (p + x) * slot_duration
}

/// Monte Carlo bit error rate of Gray-coded QPSK over AWGN at per-bit SNR
/// `sinr`, using `symbols` symbols (two bits each). Independent of `erfc`.
pub fn simulate_qpsk_ber(sinr: f64, symbols: usize, stream: &mut RandomStream) -> Result<f64> {
    if !(sinr > 0.0) {
        return Err(Error::Domain(format!("simulation sinr must be positive, got {sinr}")));
    }
    // Unit-amplitude bits on I and Q, noise variance N0/2 per dimension.
    let sigma = (1.0 / (2.0 * sinr)).sqrt();
    let mut errors = 0usize;
    for _ in 0..symbols {
        let bits = stream.next_u64();
        for shift in 0..2 {
            let tx = if (bits >> shift) & 1 == 1 { 1.0 } else { -1.0 };
            let rx = tx + sigma * stream.standard_normal();
            if (rx >= 0.0) != (tx > 0.0) {
                errors += 1;
            }
        }
    }
    Ok(errors as f64 / (2 * symbols) as f64)
}
