//! The asymmetric Huber loss, its derivatives, and the sample AHQ.
//!
//! ```text
//! cargo run --example loss_and_ahq
//! ```
use ahp::loss::{rho, rho_ddot, rho_dot, sample_ahq, AHParams};
use ahp::simgen::gen_white_noise;
use ahp::util::mean;

fn main() -> ahp::Result<()> {
    let p = AHParams::new(0.8, 1.0)?;
    println!("{:>6} {:>10} {:>10} {:>6}", "u", "rho", "rho'", "rho''");
    for u in [-3.0, -1.0, -0.5, 0.0, 0.5, 1.0, 3.0] {
        println!(
            "{u:>6.2} {:>10.4} {:>10.4} {:>6.2}",
            rho(u, &p)?,
            rho_dot(u, &p)?,
            rho_ddot(u, &p)
        );
    }

    let y = gen_white_noise(1000, 1);
    println!("\nsample mean {:.4}", mean(&y));
    for alpha in [0.1, 0.25, 0.5, 0.75, 0.9] {
        let small = AHParams::std_multiple(alpha, 1e-6, &y)?;
        let huber = AHParams::std_multiple(alpha, 1.345, &y)?;
        let large = AHParams::std_multiple(alpha, 1e6, &y)?;
        println!(
            "alpha {alpha:.2}: quantile-like {:>7.4}  huber {:>7.4}  expectile {:>7.4}",
            sample_ahq(&y, &small)?,
            sample_ahq(&y, &huber)?,
            sample_ahq(&y, &large)?
        );
    }
    Ok(())
}
