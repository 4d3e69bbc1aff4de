//! Run a bundled experiment preset with fewer replicates and list its outputs.
//!
//! ```text
//! cargo run --release --example experiment_presets -- fig1_desk 50 out/
//! ```
use std::path::PathBuf;

use ahp::experiment::{preset, ExperimentConfig, PRESETS};

fn main() -> ahp::Result<()> {
    let mut args = std::env::args().skip(1);
    let name = args.next().unwrap_or_else(|| "fig1_desk".into());
    let reps: usize = args.next().and_then(|r| r.parse().ok()).unwrap_or(20);
    let out = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("ahp_presets"));

    println!(
        "presets: {}",
        PRESETS.iter().map(|(n, _)| *n).collect::<Vec<_>>().join(", ")
    );
    let text = preset(&name).ok_or_else(|| ahp::Error::Config(format!("unknown preset {name}")))?;
    let mut value: serde_json::Value = serde_json::from_str(text)?;
    if value.get("reps").is_some() {
        value["reps"] = reps.into();
    }
    let cfg = ExperimentConfig::from_json(&value.to_string())?;
    cfg.validate()?;
    for p in cfg.run_to_dir(&out)? {
        println!("wrote {}", p.display());
    }
    Ok(())
}
