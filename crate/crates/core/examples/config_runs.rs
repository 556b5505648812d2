// Driving the command-line runners from code: the same JSON a user would
// pass with `--config`.

use qcmt::cli::{run, ExperimentConfig, Mode};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let moments = ExperimentConfig::from_json(
        r#"{
            "kernel": {"type": "explicit", "matrix": [[1, 0.5], [0.5, 1]]},
            "words": ["M1*M2", "M1", "M1*M2*M1*M2", "M1*V*M2", "V*M1*M2"]
        }"#,
    )?;
    let table = run(Mode::Moments, &moments)?;
    print!("{}", table.body());

    let scan = ExperimentConfig::from_json(
        r#"{
            "kernel": {"type": "field", "mass": 1, "beta": 1},
            "packets": [
                {"name": "f", "center": [0, 0], "sigma": 1},
                {"name": "g", "center": [0, 1], "sigma": 1}
            ],
            "rapidities": [0, 0.5, 1]
        }"#,
    )?;
    let scan = run(Mode::BoostScan, &scan)?;
    print!("{}", scan.body());

    let verify = run(Mode::Verify, &ExperimentConfig::default())?;
    for c in &verify.report.checks {
        println!("{:<30} {}", c.name, if c.passed { "pass" } else { "FAIL" });
    }
    println!("exit code {}", verify.exit_code());
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
