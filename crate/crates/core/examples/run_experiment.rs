//! Runs a configured experiment and prints its flags.

use hawkes_impact::experiment::{run_experiment, ExperimentConfig};

fn main() -> hawkes_impact::Result<()> {
    let out = std::env::temp_dir().join("hawkes-impact-example");
    let config = ExperimentConfig::from_json(&format!(
        r#"{{"experiment": "impact_convergence",
            "parameters": {{"alpha": [0.5, 0.7], "K": 1, "gamma": 0.1, "T": [100, 1000, 10000], "seed": 1}},
            "output_dir": {out:?}}}"#
    ))?;
    let artifact = run_experiment(&config)?;
    println!("{}", serde_json::to_string_pretty(&artifact.summary)?);
    for (flag, ok) in &artifact.flags {
        println!("{flag}: {ok}");
    }
    println!("tables in {}", out.display());
    Ok(())
}
