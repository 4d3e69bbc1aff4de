//! A small power study: detection rates of Fisher's test under contamination.
use ahp::estimator::Estimator;
use ahp::inference::{power_study, NullMethod, PowerStudy, Scenario};
use ahp::loss::PsiSpec;
use ahp::regress::SolverConfig;
use ahp::simgen::{Model, ModelSpec, OutlierKind, OutlierSpec, Placement};

fn main() -> ahp::Result<()> {
    let outlier = |c: f64| Scenario {
        label: format!("single_{c}"),
        outlier: Some(OutlierSpec::new(OutlierKind::SinglePoint, c, Placement::Random, 0)),
    };
    let study = PowerStudy {
        model: ModelSpec::new(Model::Ar2 { phi1: 0.9, phi2: -0.9 }, 200),
        scenarios: vec![Scenario::clean(), outlier(20.0), outlier(40.0)],
        estimators: vec![
            Estimator::Pg,
            Estimator::Ep { alpha: 0.8 },
            Estimator::Ahp {
                alpha: 0.8,
                psi: PsiSpec::StdMultiple(0.674),
            },
        ],
        reps: 100,
        levels: vec![0.01, 0.05],
        seed: 3,
        null: NullMethod::Exact,
        solver: SolverConfig::default(),
    };
    let table = power_study(&study)?;
    print!("{}", table.to_csv());
    Ok(())
}
