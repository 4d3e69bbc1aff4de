//! One asymmetric Huber trigonometric regression, compared with least squares.
use std::f64::consts::PI;

use ahp::loss::AHParams;
use ahp::periodogram::ahp_ordinate;
use ahp::regress::{fit_ahr, SolverConfig};
use ahp::simgen::gen_white_noise;

fn main() -> ahp::Result<()> {
    let n = 128;
    let k = 16;
    let omega = 2.0 * PI * k as f64 / n as f64;
    let noise = gen_white_noise(n, 7);
    // cosine of amplitude 2 plus noise, with one gross outlier
    let mut y: Vec<f64> = (1..=n)
        .map(|t| 2.0 * (omega * t as f64).cos() + 0.5 * noise[t - 1])
        .collect();
    y[40] += 40.0;

    let cfg = SolverConfig::default();
    for (name, mult) in [("least squares", 1e6), ("huber 1.345", 1.345), ("huber 0.674", 0.674)] {
        let p = AHParams::std_multiple(0.5, mult, &y)?;
        let fit = fit_ahr(&y, omega, &p, &cfg)?;
        println!(
            "{name:<14} beta = ({:+.4}, {:+.4})  ordinate {:>8.3}  iterations {:>3}  converged {}",
            fit.beta1,
            fit.beta2,
            ahp_ordinate(&fit, n),
            fit.iterations,
            fit.converged
        );
    }
    Ok(())
}
