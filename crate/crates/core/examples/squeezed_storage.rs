//! Storage of a known squeezed vacuum state: the protection is asymmetric,
//! so orienting the protected quadrature along the squeezing keeps the
//! fidelity near unity for hundreds of cycles.
//!
//! Run with `cargo run -p cavity-erasure --example squeezed_storage`.

use cavity_erasure::analytic::{storage_fidelity, ProtocolConfig, Strategy, VariancePair};
use cavity_erasure::gaussian::variance_to_db;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let reflectivity = 0.99;
    let meter_var = 0.5 * (-2.0f64).exp();
    // signal squeezed in P well below the meter squeezing
    let input_var_p = 0.5 * (-5.0f64).exp();
    let input = VariancePair::new(0.25 / input_var_p, input_var_p);

    println!(
        "squeezed-vacuum storage: input var_p = {:.3e} ({:.1} dB), R = {}",
        input.var_p,
        variance_to_db(input.var_p),
        reflectivity
    );
    println!("meter squeezed to {:.5} ({:.1} dB)", meter_var, variance_to_db(meter_var));
    println!();
    println!("{:>6} {:>10} {:>10} {:>10} {:>10}", "N", "F_A", "F_B", "F_C", "F_D");

    // known zero-mean input: passive strategies need no amplification
    for n in [1u32, 10, 50, 100, 250, 500] {
        let mut row = format!("{n:>6}");
        for strategy in Strategy::ALL {
            let cfg = ProtocolConfig::storage(strategy, reflectivity, n, meter_var, false)?;
            let f = storage_fidelity(&cfg, input)?;
            row.push_str(&format!(" {f:>10.6}"));
        }
        println!("{row}");
    }

    println!();
    println!("the protected quadrature is preserved exactly and the added X noise is");
    println!("negligible next to the anti-squeezing already present, so strategy A");
    println!("stays above F = 0.99 through 100 cycles:");
    let mut min_f: f64 = 1.0;
    for n in 0..=100 {
        let cfg = ProtocolConfig::storage(
            Strategy::SqueezedMeterErasing,
            reflectivity,
            n,
            meter_var,
            false,
        )?;
        min_f = min_f.min(storage_fidelity(&cfg, input)?);
    }
    println!("  min F over N <= 100: {min_f:.6}");
    Ok(())
}
