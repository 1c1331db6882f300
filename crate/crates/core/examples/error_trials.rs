//! Monte Carlo error rates for the stressed q' = 2^8 config, with Wilson
//! intervals and the chained fidelity and leakage bounds.
//!
//! cargo run --example error_trials [-- path/to/config.json]

use sqnc::harness::config::ExperimentConfig;
use sqnc::harness::trials::run_error_trials;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/configs/stressed_q8.json").to_string());
    let mut cfg = ExperimentConfig::load(&path)?;
    cfg.trials = cfg.trials.min(500);
    let out = run_error_trials(&cfg)?;
    let s = &out.summary;
    println!("envelope {:.3e}, threshold {:.3e}", s.error_envelope, s.threshold);
    for c in &s.cells {
        println!(
            "{:<20} bit {:>3}/{} [{:.4}, {:.4}]  phase {:>3}/{} [{:.4}, {:.4}]  F >= {:.4}  leak <= {:.3} bits",
            c.strategy.name(),
            c.bit.failures,
            c.bit.trials,
            c.bit.wilson_low,
            c.bit.wilson_high,
            c.phase.failures,
            c.phase.trials,
            c.phase.wilson_low,
            c.phase.wilson_high,
            c.fidelity_lower,
            c.leakage_bits
        );
    }
    println!("passed: {}", s.passed);
    Ok(())
}
