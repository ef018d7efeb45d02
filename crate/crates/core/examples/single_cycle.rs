//! Anatomy of one protected round trip: mix the cavity mode with a squeezed
//! meter pulse at the imperfect mirror, homodyne the leaked P quadrature,
//! condition the cavity state on the outcome, and undo the back-action with
//! the feed-forward displacement.
//!
//! Run with `cargo run -p cavity-erasure --example single_cycle`.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use cavity_erasure::gaussian::{mirror_mix, variance_to_db};
use cavity_erasure::{Axis, MeterSpec, QuadratureState};

fn print_state(label: &str, s: &QuadratureState) {
    println!(
        "{label:<26} mean = ({:+.4}, {:+.4})  var = ({:.5}, {:.5})  det = {:.6}  pure: {}",
        s.mean_x(),
        s.mean_p(),
        s.var_x(),
        s.var_p(),
        s.det_cov(),
        s.is_pure()
    );
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let reflectivity = 0.99;
    let meter_spec = MeterSpec::new(Axis::X, 0.5 * (-2.0f64).exp())?;

    println!("mirror reflectivity R = {reflectivity}, T^2 = {:.4}", 1.0 - reflectivity * reflectivity);
    println!(
        "meter pulse squeezed in X to {:.5} ({:.2} dB), anti-squeezed in P to {:.4}",
        meter_spec.var_x(),
        variance_to_db(meter_spec.var_x()),
        meter_spec.var_p()
    );
    println!();

    let signal = QuadratureState::coherent(3.0, 1.0);
    let meter = QuadratureState::squeezed(&meter_spec);
    print_state("cavity mode (in)", &signal);
    print_state("meter pulse", &meter);

    // the lossy mirror correlates the two modes
    let joint = mirror_mix(&signal, &meter, reflectivity)?;
    print_state("cavity marginal (mixed)", &joint.signal_marginal());
    println!(
        "{:<26} mean = {:+.4}, var = {:.4}",
        "leaked P quadrature", joint.meter_p_mean(), joint.meter_p_var()
    );

    // homodyne the leaked beam; the cavity state conditions on the current
    let mut rng = ChaCha12Rng::seed_from_u64(7);
    let (outcome, conditioned) = joint.homodyne_meter_p(&mut rng)?;
    println!("homodyne current i_P = {outcome:+.4}");
    print_state("cavity mode (conditioned)", &conditioned);

    // single-cycle feed-forward: displacement weight T/R on the current
    let t = (1.0f64 - reflectivity * reflectivity).sqrt();
    let corrected = conditioned.displaced(0.0, (t / reflectivity) * outcome);
    // final squeezing correction X -> X/R, P -> R P restores both means
    let released = corrected.squeeze_gain(1.0 / reflectivity)?;
    print_state("released (fed forward)", &released);

    // the conditional variance sits below the input because the measurement
    // gained information; the outcome-dependent displacement spreads the
    // corrected means by exactly the missing amount
    let cond_gain = joint.cov()[(1, 3)] / joint.meter_p_var();
    let mean_response = reflectivity * (cond_gain + t / reflectivity);
    let outcome_spread = mean_response * mean_response * joint.meter_p_var();
    println!();
    println!(
        "ensemble P variance = conditional {:.6} + outcome spread {:.6} = {:.6}",
        released.var_p(),
        outcome_spread,
        released.var_p() + outcome_spread
    );
    println!(
        "X picks up (R^-2 - 1) * meter var_x = {:.6} of excess noise: {:.6}",
        (reflectivity.powi(-2) - 1.0) * meter_spec.var_x(),
        released.var_x() - signal.var_x()
    );
    Ok(())
}
