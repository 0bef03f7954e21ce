use std::path::PathBuf;
use std::process::Command;

const EXAMPLES: [&str; 9] = [
    "zonotope_algebra",
    "abstract_training",
    "certify_robustness",
    "loss_range",
    "oracle_check",
    "missing_data",
    "parameter_bounds",
    "splitting",
    "experiment",
];

fn example_dir() -> PathBuf {
    // target/<profile>/deps/<test> -> target/<profile>/examples
    let exe = std::env::current_exe().unwrap();
    exe.parent().unwrap().parent().unwrap().join("examples")
}

#[test]
fn every_example_runs() {
    for name in EXAMPLES {
        let bin = example_dir().join(format!("{name}{}", std::env::consts::EXE_SUFFIX));
        assert!(bin.exists(), "{} not built", bin.display());
        let out = Command::new(&bin).output().unwrap();
        assert!(out.status.success(), "{name}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(!out.stdout.is_empty(), "{name} printed nothing");
    }
}
