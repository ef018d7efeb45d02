//! Sweeping cavity parameters: how many round trips the protected cavity
//! needs to reach a squeezing target across reflectivities and gains, using
//! both the library inversion and the sweep driver.
//!
//! Run with `cargo run -p cavity-erasure --example parameter_sweep`.

use cavity_erasure::analytic::{min_cycles_to_var_p, AnalyticError};
use cavity_erasure::experiments::{
    cmd_sweep, Cell, CycleRange, ExperimentSpec, GridSpec, InputSpec, ScalarOrList, Scenario,
    TargetSpec,
};
use cavity_erasure::Strategy;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let target_var_p = 0.5 * (-5.0f64).exp();

    // direct closed-form inversion over a small grid
    println!("cycles to squeeze vacuum to var_p <= {target_var_p:.3e} with protection:");
    println!("{:>8} {:>10} {:>12}", "R", "gain", "min cycles");
    for r in [0.9, 0.99, 0.999] {
        for gain in [1.0, (0.02f64).exp(), 1.05] {
            match min_cycles_to_var_p(r, gain, target_var_p) {
                Ok(n) => println!("{r:>8} {gain:>10.5} {n:>12}"),
                Err(AnalyticError::UnreachableTarget { rg, .. }) => {
                    println!("{r:>8} {gain:>10.5} {:>12}  (RG = {rg:.4})", "never")
                }
                Err(e) => return Err(e.into()),
            }
        }
    }

    // the same sweep through the experiment driver, as the CLI would run it
    let spec = ExperimentSpec {
        scenario: Scenario::Generation,
        strategies: vec![Strategy::SqueezedMeterErasing],
        universal_correction: false,
        trajectories: 0,
        seed: 0,
        input: InputSpec::Vacuum,
        grid: GridSpec {
            reflectivity: ScalarOrList::List(vec![0.9, 0.99, 0.999]),
            gain: ScalarOrList::List(vec![1.0, (0.02f64).exp(), 1.05]),
            meter_var: ScalarOrList::Scalar(0.5 * (-2.0f64).exp()),
            cycles: CycleRange { start: 1, stop: 5000, step: 1 },
        },
        target: Some(TargetSpec {
            var_p: target_var_p,
            fidelity: None,
        }),
        out: None,
    };
    let table = cmd_sweep(&spec)?;
    let unreachable = table
        .rows()
        .iter()
        .filter(|row| matches!(row[3], Cell::Text(_)))
        .count();
    println!();
    println!(
        "sweep driver emitted {} grid points ({} unreachable); CSV preview:",
        table.rows().len(),
        unreachable
    );
    for line in table.to_csv().lines().filter(|l| !l.starts_with('#')).take(5) {
        println!("  {line}");
    }
    println!("  ...");

    // fidelity-threshold variant: first N whose target fidelity reaches 0.9
    let mut fidelity_spec = spec.clone();
    fidelity_spec.grid.reflectivity = ScalarOrList::Scalar(0.99);
    fidelity_spec.grid.gain = ScalarOrList::Scalar((0.02f64).exp());
    fidelity_spec.target = Some(TargetSpec {
        var_p: target_var_p,
        fidelity: Some(0.9),
    });
    let table = cmd_sweep(&fidelity_spec)?;
    println!();
    match &table.rows()[0][3] {
        Cell::Int(n) => println!("first cycle with target fidelity >= 0.9 at the figure parameters: N = {n}"),
        cell => println!("target fidelity 0.9: {cell:?}"),
    }
    Ok(())
}
