//! Normalising columns to unit mass and Daniell smoothing.
use ahp::loss::PsiSpec;
use ahp::periodogram::{compute_ahp, default_bandwidth, normalize, smooth};
use ahp::regress::SolverConfig;
use ahp::simgen::gen_ar2;

fn main() -> ahp::Result<()> {
    let y = gen_ar2(0.0, -0.36, 256, 500, 5)?;
    let m = compute_ahp(
        &y,
        &[0.25, 0.5, 0.75],
        PsiSpec::StdMultiple(1.345),
        &SolverConfig::default(),
    )?;
    let nm = normalize(&m)?;
    let bw = default_bandwidth(y.len());
    let sm = smooth(&nm, bw)?;
    println!("bandwidth {bw}");
    for j in 0..m.ncols() {
        let raw = m.column(j);
        let s = sm.column(j);
        let rough = |v: &[f64]| v.windows(2).map(|w| (w[1] - w[0]).abs()).sum::<f64>();
        println!(
            "{}: raw sum {:.3}, normalised sum {:.6}, roughness {:.4} -> {:.4}",
            m.labels[j],
            raw.iter().sum::<f64>(),
            nm.column(j).iter().sum::<f64>(),
            rough(&nm.column(j)),
            rough(&s)
        );
    }
    Ok(())
}
