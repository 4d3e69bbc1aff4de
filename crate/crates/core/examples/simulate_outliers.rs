//! Simulation models and the three contamination families.
use ahp::simgen::{eyeblink_waveform, inject_outliers, Model, ModelSpec, OutlierKind, OutlierSpec, Placement};
use ahp::util::sample_std;

fn main() -> ahp::Result<()> {
    let models = [
        Model::WhiteNoise,
        Model::Ar2 { phi1: 0.9, phi2: -0.9 },
        Model::Mixture,
        Model::Garch11 {
            omega0: 1e-6,
            arch: 0.49,
            garch: 0.49,
        },
    ];
    for m in models {
        let y = ModelSpec::new(m, 500).generate(1)?;
        println!("{:<70} sd {:.4}", serde_json::to_string(&m)?, sample_std(&y));
    }

    let y = ModelSpec::new(Model::Ar2 { phi1: 0.9, phi2: -0.9 }, 200).generate(2)?;
    for kind in [OutlierKind::SinglePoint, OutlierKind::Burst, OutlierKind::Eyeblink] {
        let spec = OutlierSpec::new(kind, 10.0, Placement::Random, 7);
        let z = inject_outliers(&y, &spec)?;
        let touched: Vec<usize> = (0..y.len()).filter(|&i| y[i] != z[i]).map(|i| i + 1).collect();
        println!(
            "{kind:?}: onset t = {}, {} samples changed ({}..={})",
            spec.onset(y.len())?,
            touched.len(),
            touched[0],
            touched[touched.len() - 1]
        );
    }
    let w = eyeblink_waveform();
    let peak = w.iter().cloned().fold(f64::MIN, f64::max);
    let trough = w.iter().cloned().fold(f64::MAX, f64::min);
    println!("eyeblink waveform: {} samples, peak {peak}, trough {trough}", w.len());
    Ok(())
}
