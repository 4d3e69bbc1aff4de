//! Fisher's test for a hidden periodicity, with the exact and Monte Carlo nulls.
use std::f64::consts::PI;

use ahp::estimator::Estimator;
use ahp::inference::{fisher_test, MonteCarloNull};
use ahp::loss::PsiSpec;
use ahp::regress::{fourier_frequencies, SolverConfig};
use ahp::simgen::gen_white_noise;

fn main() -> ahp::Result<()> {
    let n = 128;
    let noise = gen_white_noise(n, 21);
    let omega = 2.0 * PI * 20.0 / n as f64;
    let freqs = fourier_frequencies(n)?;
    let cfg = SolverConfig::default();
    let est = Estimator::Ahp {
        alpha: 0.5,
        psi: PsiSpec::StdMultiple(1.345),
    };
    let null = MonteCarloNull::simulate(&est, n, 500, 1, &cfg)?;

    for amp in [0.0, 0.6, 1.0] {
        let y: Vec<f64> = noise
            .iter()
            .enumerate()
            .map(|(t, e)| e + amp * (omega * (t + 1) as f64).cos())
            .collect();
        let col = est.ordinates(&y, &cfg)?;
        let r = fisher_test(&col.values, &freqs, &[0.01, 0.05])?;
        println!(
            "amplitude {amp:.1}: g = {:.4} at f = {:.4}, exact p = {:.3e}, monte carlo p = {:.3}, reject {:?}",
            r.g_stat,
            r.argmax_freq / (2.0 * PI),
            r.p_value,
            null.pvalue(r.g_stat),
            r.reject
        );
    }
    Ok(())
}
