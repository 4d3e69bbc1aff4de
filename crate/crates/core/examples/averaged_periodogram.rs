//! Monte Carlo averaged periodograms of the amplitude-modulated model. The
//! envelope frequencies show up in the upper-quantile AHP but not in the
//! ordinary periodogram.
use ahp::estimator::Estimator;
use ahp::loss::PsiSpec;
use ahp::montecarlo::{average_periodograms, AverageOptions};
use ahp::simgen::{HiddenParams, Model, ModelSpec};
use ahp::util::argmax;

fn main() -> ahp::Result<()> {
    let model: ModelSpec =
        serde_json::from_str(r#"{"model":{"kind":"hidden_periodicity","phi1":0.0,"phi2":-0.36},"n":200}"#)?;
    let estimators = [
        Estimator::Pg,
        Estimator::Ahp {
            alpha: 0.8,
            psi: PsiSpec::StdMultiple(1.345),
        },
    ];
    let m = average_periodograms(&model, None, &estimators, &AverageOptions::new(100, 4))?;
    let h = HiddenParams::default();
    println!("carrier peak f = 0.25, envelope frequencies {} and {}", h.f0, h.f1);
    let f = m.normalized_freqs();
    for j in 0..m.ncols() {
        let col = m.column(j);
        let mut order: Vec<usize> = (0..col.len()).collect();
        order.sort_by(|&a, &b| col[b].total_cmp(&col[a]));
        let top: Vec<String> = order[..4].iter().map(|&k| format!("{:.3}", f[k])).collect();
        println!("{:<22} largest ordinates at f = {}", m.labels[j], top.join(", "));
    }
    let white = ModelSpec::new(Model::WhiteNoise, 200);
    let w = average_periodograms(&white, None, &estimators[..1], &AverageOptions::new(100, 4).smoothed(7))?;
    println!(
        "white noise, smoothed: peak at f = {:.3} (no preferred frequency)",
        w.normalized_freqs()[argmax(&w.column(0)).unwrap()]
    );
    Ok(())
}
