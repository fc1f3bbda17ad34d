use std::fmt::Write as _;

use crate::channel::ChannelGains;
use crate::error::{Error, Result};

pub const TRACE_HEADER: &str = "slot,x_mW,y_mW,rho1,rho2,rho3,pe,u_uav,u_jam,energy_mJ,eps,h1,h2,h3,h4,h5";

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SlotRecord {
    pub slot: usize,
    pub x: f64,
    pub y: f64,
    pub rho: [f64; 3],
    /// BER of the user message.
    pub pe: f64,
    pub u_uav: f64,
    pub u_jam: f64,
    /// Energy of user plus UAV in this slot, mJ.
    pub energy: f64,
    /// UAV exploration rate in force when it chose `x`.
    pub eps: f64,
    pub gains: ChannelGains,
}

impl SlotRecord {
    pub fn is_finite(&self) -> bool {
        [self.x, self.y, self.pe, self.u_uav, self.u_jam, self.energy, self.eps]
            .iter()
            .chain(&self.rho)
            .chain(&self.gains.to_array())
            .all(|v| v.is_finite())
    }

    fn csv_row(&self, out: &mut String) {
        let h = self.gains.to_array();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.slot,
            self.x,
            self.y,
            self.rho[0],
            self.rho[1],
            self.rho[2],
            self.pe,
            self.u_uav,
            self.u_jam,
            self.energy,
            self.eps,
            h[0],
            h[1],
            h[2],
            h[3],
            h[4]
        );
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trace {
    pub config_digest: u64,
    pub records: Vec<SlotRecord>,
    /// Digest of the UAV's learned weights or tables at the end of the run.
    pub artifact_digest: Option<u64>,
}

impl Trace {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn column(&self, f: impl Fn(&SlotRecord) -> f64) -> Vec<f64> {
        self.records.iter().map(f).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(200 * (self.records.len() + 1));
        out.push_str(TRACE_HEADER);
        out.push('\n');
        for r in &self.records {
            r.csv_row(&mut out);
        }
        out
    }

    /// Parses trace CSV back into records.
    pub fn records_from_csv(text: &str) -> Result<Vec<SlotRecord>> {
        let mut lines = text.lines();
        if lines.next() != Some(TRACE_HEADER) {
            return Err(Error::Format("trace header mismatch".into()));
        }
        let mut out = Vec::new();
        for (n, line) in lines.enumerate() {
            let bad = || Error::Format(format!("trace row {}: malformed", n + 1));
            let cells: Vec<&str> = line.split(',').collect();
            if cells.len() != 16 {
                return Err(bad());
            }
            let slot: usize = cells[0].parse().map_err(|_| bad())?;
            let mut v = [0.0; 15];
            for (dst, c) in v.iter_mut().zip(&cells[1..]) {
                *dst = c.parse().map_err(|_| bad())?;
            }
            out.push(SlotRecord {
                slot,
                x: v[0],
                y: v[1],
                rho: [v[2], v[3], v[4]],
                pe: v[5],
                u_uav: v[6],
                u_jam: v[7],
                energy: v[8],
                eps: v[9],
                gains: ChannelGains::from_array([v[10], v[11], v[12], v[13], v[14]]),
            });
        }
        Ok(out)
    }
}
