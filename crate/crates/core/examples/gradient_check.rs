//! Backpropagation through the Q-network against central differences, with
//! and without a deliberately corrupted bias gradient.

use aegis::nn::CnnArchitecture;
use aegis::selftest::{gradient_check_with, GradientFault};

fn main() -> aegis::Result<()> {
    let arch = CnnArchitecture::default();
    println!("{} parameters, {} conv2 multiplies per forward pass", arch.param_count(), arch.conv2_multiplies());
    let clean = gradient_check_with(arch, 2, 64, None, 5)?;
    println!("clean:  max relative error {:.2e} (tolerance {:.0e}) -> {}", clean.measured, clean.tolerance, clean.passed);
    let faulty = gradient_check_with(arch, 2, 64, Some(GradientFault { delta: 1e-2 }), 5)?;
    println!("faulty: max relative error {:.2e} (tolerance {:.0e}) -> {}", faulty.measured, faulty.tolerance, faulty.passed);
    Ok(())
}
