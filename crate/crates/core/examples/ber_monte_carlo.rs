//! QPSK bit error rate: closed form against simulated symbols.

use aegis::numerics::RandomStream;
use aegis::phy::{ber_from_sinr, simulate_qpsk_ber};

fn main() -> aegis::Result<()> {
    let symbols = 200_000;
    let mut stream = RandomStream::new(1).split("ber-example");
    println!("{:>6} {:>12} {:>12} {:>8}", "sinr", "closed", "simulated", "z");
    for i in 1..=10 {
        let sinr = 0.25 * i as f64;
        let exact = ber_from_sinr(sinr)?;
        let mc = simulate_qpsk_ber(sinr, symbols, &mut stream)?;
        let sd = (exact * (1.0 - exact) / (2.0 * symbols as f64)).sqrt();
        println!("{sinr:>6.2} {exact:>12.6} {mc:>12.6} {:>8.2}", (mc - exact) / sd);
    }
    Ok(())
}
