//! Runs the certification experiment from a config file, as the command-line
//! tool does, and prints the per-grid-point summary.

use std::path::Path;

use zonoridge::experiment::{cmd_certify, ExperimentConfig};

fn main() -> zonoridge::Result<()> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/configs/synthetic.toml");
    let cfg = ExperimentConfig::load(path)?;
    let report = cmd_certify(&cfg)?;
    print!("{}", report.summary.to_csv_string()?);
    Ok(())
}
