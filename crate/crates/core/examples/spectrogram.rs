//! Robust versus ordinary spectrogram of a series with bursts.
use ahp::estimator::Estimator;
use ahp::loss::PsiSpec;
use ahp::regress::SolverConfig;
use ahp::simgen::{gen_ar2, inject_outliers, OutlierKind, OutlierSpec, Placement};
use ahp::spectrogram::spectrogram;

fn main() -> ahp::Result<()> {
    let clean = gen_ar2(0.9, -0.9, 2000, 500, 41)?;
    let mut y = clean.clone();
    for t in [300, 1150] {
        let bumped = inject_outliers(
            &clean,
            &OutlierSpec::new(OutlierKind::Burst, 20.0, Placement::Fixed(t), 0),
        )?;
        y.iter_mut()
            .zip(bumped.iter().zip(&clean))
            .for_each(|(v, (b, c))| *v += b - c);
    }
    let cfg = SolverConfig::default();
    let robust = Estimator::Ahp {
        alpha: 0.8,
        psi: PsiSpec::StdMultiple(0.674),
    };
    let a = spectrogram(&y, 400, 200, &robust, &cfg)?;
    let b = spectrogram(&y, 400, 200, &Estimator::Pg, &cfg)?;
    println!("{:>7} {:>8} {:>8}", "centre", "ahp f", "pg f");
    for (w, (ka, kb)) in a.argmax_bins().into_iter().zip(b.argmax_bins()).enumerate() {
        let f = |k: usize| (k + 1) as f64 / a.window_len as f64;
        println!("{:>7} {:>8.3} {:>8.3}", a.centers[w], f(ka), f(kb));
    }
    Ok(())
}
