//! Quantile-frequency matrix of an AR(2) series over the default alpha grid.
use ahp::loss::PsiSpec;
use ahp::periodogram::{compute_ahp, default_alpha_grid};
use ahp::regress::SolverConfig;
use ahp::simgen::{ar2_peak_frequency, gen_ar2};
use ahp::util::argmax;
use std::f64::consts::PI;

fn main() -> ahp::Result<()> {
    let (phi1, phi2) = (0.9, -0.9);
    let y = gen_ar2(phi1, phi2, 200, 500, 3)?;
    let alphas = default_alpha_grid();
    let m = compute_ahp(&y, &alphas, PsiSpec::StdMultiple(1.345), &SolverConfig::default())?;
    println!(
        "{} frequencies x {} alphas, psi = {:.3}, {} non-converged fits",
        m.nfreqs(),
        m.ncols(),
        m.psi.unwrap(),
        m.total_nonconverged()
    );
    println!(
        "spectral peak of the model: f = {:.4}",
        ar2_peak_frequency(phi1, phi2)? / (2.0 * PI)
    );
    let f = m.normalized_freqs();
    for j in (0..m.ncols()).step_by(5) {
        let col = m.column(j);
        let k = argmax(&col).unwrap();
        println!("alpha {:.2}: peak at f = {:.3} ({:.2})", m.alphas[j], f[k], col[k]);
    }
    Ok(())
}
