//! Monte Carlo estimation of the bit and phase error probabilities.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::bounds::{fidelity_bound, leakage_bound_log2, wilson_interval};
use super::config::{ExperimentConfig, NamedNetwork};
use super::{derive_seed, HarnessError, Z95};
use crate::adversary::{transcript_digest, AttackStrategy, Attacker};
use crate::codec::{
    decode_bit, decode_phase, encode_bit, encode_phase, BitPlaintext, ChannelModel, CodeParams,
    EncoderRandomness, PhasePlaintext, SharedRandomness,
};
use crate::gf::FieldSpec;
use crate::linalg::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Basis {
    Bit,
    Phase,
}

impl Basis {
    fn index(self) -> u64 {
        match self {
            Basis::Bit => 0,
            Basis::Phase => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureClass {
    None,
    /// No valid row operation existed.
    DbMissing,
    /// A row operation was found but the message came out wrong.
    WrongMessage,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TrialRecord {
    /// Global index; cell `c` owns `c * trials .. (c + 1) * trials`.
    pub trial: u64,
    pub cell: usize,
    pub basis: Basis,
    pub seed: u64,
    pub attack_digest: String,
    pub decode_ok: bool,
    pub failure_class: FailureClass,
}

#[derive(Serialize)]
struct CsvRow {
    trial: u64,
    basis: Basis,
    decode_ok: bool,
    failure_class: FailureClass,
    seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BasisSummary {
    pub trials: u64,
    pub failures: u64,
    pub db_missing: u64,
    pub wrong_message: u64,
    pub rate: f64,
    pub wilson_low: f64,
    pub wilson_high: f64,
    /// Without an attack any failure is a violation; otherwise the Wilson
    /// lower limit has to exceed `margin * envelope`.
    pub bound_violated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellSummary {
    pub index: usize,
    pub network: String,
    pub strategy: AttackStrategy,
    pub m_a: usize,
    /// Whether the attack fits the budget `m_a <= m1` the bound assumes.
    pub bound_applicable: bool,
    pub trial_start: u64,
    pub trial_end: u64,
    pub bit: BasisSummary,
    pub phase: BasisSummary,
    /// `1 - (p_bit + p_phase)` from the point estimates.
    pub fidelity_lower: f64,
    /// The same with both Wilson upper limits.
    pub fidelity_lower_wilson: f64,
    pub leakage_bits: f64,
    pub leakage_bits_wilson: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub config_digest: String,
    pub root_seed: u64,
    pub trials_per_cell: u64,
    pub params: CodeParams,
    pub log2_q_prime: f64,
    /// `max{1/q', (n')^m0 / (q')^(m0 - m1)}`
    pub error_envelope: f64,
    pub margin: f64,
    /// `margin * error_envelope`
    pub threshold: f64,
    pub z: f64,
    pub log_base: u32,
    pub log2_code_dimension: f64,
    pub coverage: String,
    pub cells: Vec<CellSummary>,
    pub passed: bool,
}

#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub summary: Summary,
    pub records: Vec<TrialRecord>,
}

const COVERAGE: &str =
    "sweep over the configured networks and strategies only; not a worst-case certificate";

struct Cell {
    label: String,
    strategy: AttackStrategy,
    bit: ChannelModel,
    phase: ChannelModel,
}

/// One encode, attack and decode round in one basis.
pub fn run_trial(
    params: &CodeParams,
    field: &FieldSpec,
    chan: &ChannelModel,
    strategy: &AttackStrategy,
    basis: Basis,
    seed: u64,
) -> Result<(FailureClass, String), HarnessError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shared = SharedRandomness::sample(params, field, &mut rng);
    let enc = EncoderRandomness::sample(params, field, &mut rng);
    let attacker_seed: u64 = rng.gen();
    let (codeword, message) = match basis {
        Basis::Bit => {
            let plain = BitPlaintext::random(params, field, &mut rng);
            (encode_bit(&plain, &shared.r2b, &enc.re, &shared.s, params)?, plain.m)
        }
        Basis::Phase => {
            let plain = PhasePlaintext::random(params, field, &mut rng);
            (encode_phase(&plain, &shared.r2p, &enc.re, &shared.s, params)?, plain.m)
        }
    };
    let injection = if strategy.is_no_attack() || chan.m_a() == 0 {
        None
    } else {
        let obs = chan.observe(&codeword)?;
        let mut attacker = Attacker::new(strategy, field, chan.m_a(), attacker_seed)?;
        Some(attacker.attack_block(&obs)?)
    };
    let digest = transcript_digest(injection.as_ref().unwrap_or(&Matrix::zeros(field, 0, 0)));
    let y = chan.transmit(&codeword, injection.as_ref())?;
    let decoded = match basis {
        Basis::Bit => decode_bit(&y, &shared.s, &shared.r2b, params)?,
        Basis::Phase => decode_phase(&y, &shared.s, &shared.r2p, params)?,
    };
    let class = match decoded {
        None => FailureClass::DbMissing,
        Some(d) if d.message != message => FailureClass::WrongMessage,
        Some(_) => FailureClass::None,
    };
    Ok((class, digest))
}

fn summarize_basis(records: &[&TrialRecord], no_attack: bool, threshold: f64) -> BasisSummary {
    let trials = records.len() as u64;
    let db_missing = records.iter().filter(|r| r.failure_class == FailureClass::DbMissing).count() as u64;
    let wrong_message = records.iter().filter(|r| r.failure_class == FailureClass::WrongMessage).count() as u64;
    let failures = db_missing + wrong_message;
    let (wilson_low, wilson_high) = wilson_interval(failures, trials, Z95);
    let bound_violated = if no_attack { failures > 0 } else { wilson_low > threshold };
    BasisSummary {
        trials,
        failures,
        db_missing,
        wrong_message,
        rate: failures as f64 / trials as f64,
        wilson_low,
        wilson_high,
        bound_violated,
    }
}

/// Runs every (network, strategy) cell of the config.
///
/// All preconditions are checked before the first trial. Trials run in
/// parallel, each from a seed derived from the root seed and its index, so
/// results do not depend on scheduling.
pub fn run_error_trials(config: &ExperimentConfig) -> Result<ExperimentOutcome, HarnessError> {
    let (params, networks) = config.validate()?;
    let field = params.extension_field()?;
    let mut cells = Vec::new();
    for NamedNetwork { label, spec } in &networks {
        let bit = ChannelModel::bit(spec, &field)?;
        let phase = ChannelModel::phase(spec, &field)?;
        for strategy in &config.strategies {
            // Strategy parameters are checked here rather than mid-run.
            if !strategy.is_no_attack() && spec.m_a() > 0 {
                Attacker::new(strategy, &field, spec.m_a(), 0)?;
            }
            cells.push(Cell {
                label: label.clone(),
                strategy: strategy.clone(),
                bit: bit.clone(),
                phase: phase.clone(),
            });
        }
    }

    let per_cell = config.trials as u64;
    let jobs: Vec<(usize, u64, Basis)> = (0..cells.len())
        .flat_map(|c| (0..per_cell).flat_map(move |t| [(c, t, Basis::Bit), (c, t, Basis::Phase)]))
        .collect();
    let records = jobs
        .par_iter()
        .map(|&(c, t, basis)| {
            let trial = c as u64 * per_cell + t;
            let seed = derive_seed(config.root_seed, 2 * trial + basis.index());
            let cell = &cells[c];
            let chan = match basis {
                Basis::Bit => &cell.bit,
                Basis::Phase => &cell.phase,
            };
            let (class, digest) = run_trial(&params, &field, chan, &cell.strategy, basis, seed)?;
            Ok(TrialRecord {
                trial,
                cell: c,
                basis,
                seed,
                attack_digest: digest,
                decode_ok: class == FailureClass::None,
                failure_class: class,
            })
        })
        .collect::<Result<Vec<_>, HarnessError>>()?;

    let envelope = params.error_envelope();
    let threshold = config.margin * envelope;
    let log2_d = params.log2_code_dimension();
    let mut summaries = Vec::with_capacity(cells.len());
    for (c, cell) in cells.iter().enumerate() {
        let of = |b: Basis| records.iter().filter(|r| r.cell == c && r.basis == b).collect::<Vec<_>>();
        let no_attack = cell.strategy.is_no_attack() || cell.bit.m_a() == 0;
        let bit = summarize_basis(&of(Basis::Bit), no_attack, threshold);
        let phase = summarize_basis(&of(Basis::Phase), no_attack, threshold);
        let fidelity_lower = fidelity_bound(bit.rate, phase.rate)?;
        let fidelity_lower_wilson = fidelity_bound(bit.wilson_high, phase.wilson_high)?;
        let m_a = cell.bit.m_a();
        let bound_applicable = m_a <= params.m1;
        let violated = bound_applicable && (bit.bound_violated || phase.bound_violated);
        summaries.push(CellSummary {
            index: c,
            network: cell.label.clone(),
            strategy: cell.strategy.clone(),
            m_a,
            bound_applicable,
            trial_start: c as u64 * per_cell,
            trial_end: (c as u64 + 1) * per_cell,
            leakage_bits: leakage_bound_log2(fidelity_lower, log2_d)?,
            leakage_bits_wilson: leakage_bound_log2(fidelity_lower_wilson, log2_d)?,
            bit,
            phase,
            fidelity_lower,
            fidelity_lower_wilson,
            passed: !violated,
        });
    }
    let summary = Summary {
        config_digest: config.digest(),
        root_seed: config.root_seed,
        trials_per_cell: per_cell,
        log2_q_prime: params.log2_q_prime(),
        error_envelope: envelope,
        margin: config.margin,
        threshold,
        z: Z95,
        log_base: 2,
        log2_code_dimension: log2_d,
        coverage: COVERAGE.into(),
        passed: summaries.iter().all(|s| s.passed),
        cells: summaries,
        params,
    };
    Ok(ExperimentOutcome { summary, records })
}

impl ExperimentOutcome {
    pub fn summary_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.summary).expect("summary serializes");
        s.push('\n');
        s
    }

    /// Per-trial CSV, sorted by trial index and basis.
    pub fn trials_csv(&self) -> Result<Vec<u8>, HarnessError> {
        let mut rows: Vec<&TrialRecord> = self.records.iter().collect();
        rows.sort_by_key(|r| (r.trial, r.basis.index()));
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in rows {
            w.serialize(CsvRow {
                trial: r.trial,
                basis: r.basis,
                decode_ok: r.decode_ok,
                failure_class: r.failure_class,
                seed: r.seed,
            })?;
        }
        w.into_inner().map_err(|e| HarnessError::Config(e.to_string()))
    }

    /// Writes `summary.json` and `trials.csv` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<(), HarnessError> {
        std::fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
        let summary = dir.join("summary.json");
        std::fs::write(&summary, self.summary_json()).map_err(|e| HarnessError::io(&summary, e))?;
        let csv = dir.join("trials.csv");
        std::fs::write(&csv, self.trials_csv()?).map_err(|e| HarnessError::io(&csv, e))?;
        Ok(())
    }
}
