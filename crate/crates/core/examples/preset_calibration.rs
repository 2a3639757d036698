//! Prints the calibration evidence behind the shipped generator presets:
//! the Bayes-accuracy ceiling of the target-survey preset and the mean-row
//! deltas of a full-size source-survey draw against the published table.
//!
//! Run with: cargo run --release --example preset_calibration

use survey_transfer::data::describe;
use survey_transfer::synth::builtin::{anes_2020_spec, ces_2020_spec, ces_2020_stats};
use survey_transfer::synth::{bayes_accuracy_mc, generate};

fn main() {
    let oracle = bayes_accuracy_mc(&anes_2020_spec(), "vote_trump", 200_000).unwrap();
    println!(
        "target-preset Bayes accuracy: {:.4} (mc se {:.5}, {} samples)",
        oracle.bayes_accuracy, oracle.mc_std_error, oracle.mc_samples
    );

    let stats_target = ces_2020_stats();
    let n = stats_target.columns[0].count;
    let ds = generate(&ces_2020_spec(), n).unwrap();
    let stats = describe(&ds).unwrap();
    println!("\nsource-preset mean-row deltas at n = {n}:");
    for target in &stats_target.columns {
        let got = stats.column(&target.name).unwrap().mean;
        println!(
            "  {:<18} generated {:.4}  published {:.4}  delta {:+.4}",
            target.name,
            got,
            target.mean,
            got - target.mean
        );
    }
}
