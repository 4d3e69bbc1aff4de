//! The estimator family on one contaminated series: ordinary, Huber,
//! expectile, quantile-approximating and asymmetric Huber periodograms.
use ahp::estimator::Estimator;
use ahp::inference::fisher_test;
use ahp::loss::PsiSpec;
use ahp::regress::{fourier_frequencies, SolverConfig};
use ahp::simgen::{gen_ar2, inject_outliers, OutlierKind, OutlierSpec, Placement};
use ahp::util::argmax;

fn main() -> ahp::Result<()> {
    let n = 200;
    let clean = gen_ar2(0.9, -0.9, n, 500, 11)?;
    let y = inject_outliers(
        &clean,
        &OutlierSpec::new(OutlierKind::SinglePoint, 30.0, Placement::Fixed(90), 0),
    )?;

    let estimators = [
        Estimator::Pg,
        Estimator::Hp {
            psi: PsiSpec::StdMultiple(1.345),
        },
        Estimator::Ep { alpha: 0.8 },
        Estimator::QpApprox { alpha: 0.5 },
        Estimator::Ahp {
            alpha: 0.8,
            psi: PsiSpec::StdMultiple(0.674),
        },
    ];
    let cfg = SolverConfig::default();
    println!("true peak near f = 0.171; single outlier of 30 sd at t = 90");
    for e in &estimators {
        for (tag, series) in [("clean", &clean), ("contaminated", &y)] {
            let col = e.ordinates(series, &cfg)?;
            let k = argmax(&col.values).unwrap();
            let r = fisher_test(&col.values, &fourier_frequencies(n)?, &[0.01])?;
            println!(
                "{:<22} {tag:<13} peak f = {:.3}  fisher p = {:.2e}",
                e.label(),
                (k + 1) as f64 / n as f64,
                r.p_value
            );
        }
    }
    Ok(())
}
