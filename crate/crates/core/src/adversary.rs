//! Additive attacks on the attacked edges.
//!
//! An [`Attacker`] is driven one channel use at a time. At use `i` it sees
//! the uninjected symbols on its edges and returns the symbols to add.
//! Because the attacker knows its own earlier injections, seeing the
//! uninjected values carries the same information as seeing the raw ones.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::gf::FieldSpec;
use crate::linalg::{sample_uniform, LinalgError, Matrix};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AdversaryError {
    #[error("observation for use {got} arrived, expected use {expected}")]
    OutOfOrder { expected: usize, got: usize },
    #[error("observation has {found} symbols, expected {expected}")]
    ObservationLength { expected: usize, found: usize },
    #[error("fixed pattern has no column for use {0}")]
    PatternExhausted(usize),
    #[error("strategy parameter {what}: expected {expected}, found {found}")]
    Parameter {
        what: &'static str,
        expected: String,
        found: String,
    },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Attack strategy as written in experiment configs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AttackStrategy {
    NoAttack,
    /// Fresh uniform symbols at every use.
    UniformRandom,
    /// Column `i` of `z` (packed rows, one per attacked edge) at use `i`.
    FixedPattern { z: Vec<Vec<u64>> },
    /// Forces each attacked edge to carry `target` (one value per edge, or a
    /// single value for all edges).
    OverwriteConstant { target: Vec<u64> },
    /// `inj_i = sum_k F_k obs_(i-k)` over the last `window` observations.
    /// `f` is `m_a x (m_a * window)` with `F_k` in columns
    /// `k*m_a..(k+1)*m_a`; when absent it is drawn uniformly per trial.
    AdaptiveLinear {
        window: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        f: Option<Vec<Vec<u64>>>,
    },
}

impl AttackStrategy {
    pub fn name(&self) -> &'static str {
        match self {
            AttackStrategy::NoAttack => "no_attack",
            AttackStrategy::UniformRandom => "uniform_random",
            AttackStrategy::FixedPattern { .. } => "fixed_pattern",
            AttackStrategy::OverwriteConstant { .. } => "overwrite_constant",
            AttackStrategy::AdaptiveLinear { .. } => "adaptive_linear",
        }
    }

    pub fn is_no_attack(&self) -> bool {
        matches!(self, AttackStrategy::NoAttack)
    }
}

enum State {
    None,
    Uniform,
    Pattern(Matrix),
    Overwrite(Vec<u64>),
    Linear { f: Matrix, window: usize },
}

/// A strategy bound to a field, an edge count and a private RNG.
pub struct Attacker {
    field: FieldSpec,
    m_a: usize,
    state: State,
    rng: ChaCha8Rng,
    history: Vec<Vec<u64>>,
}

impl Attacker {
    pub fn new(strategy: &AttackStrategy, field: &FieldSpec, m_a: usize, seed: u64) -> Result<Self, AdversaryError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let state = match strategy {
            AttackStrategy::NoAttack => State::None,
            AttackStrategy::UniformRandom => State::Uniform,
            AttackStrategy::FixedPattern { z } => {
                let z = Matrix::from_rows(field, z)?;
                if z.rows() != m_a {
                    return Err(AdversaryError::Parameter {
                        what: "fixed pattern rows",
                        expected: m_a.to_string(),
                        found: z.rows().to_string(),
                    });
                }
                State::Pattern(z)
            }
            AttackStrategy::OverwriteConstant { target } => {
                let t = match target.len() {
                    1 => vec![target[0]; m_a],
                    n if n == m_a => target.clone(),
                    n => {
                        return Err(AdversaryError::Parameter {
                            what: "overwrite targets",
                            expected: format!("1 or {m_a}"),
                            found: n.to_string(),
                        })
                    }
                };
                if let Some(&bad) = t.iter().find(|&&v| !field.contains(v)) {
                    return Err(AdversaryError::Parameter {
                        what: "overwrite target",
                        expected: format!("element of {field}"),
                        found: bad.to_string(),
                    });
                }
                State::Overwrite(t)
            }
            AttackStrategy::AdaptiveLinear { window, f } => {
                if *window == 0 {
                    return Err(AdversaryError::Parameter {
                        what: "window",
                        expected: "at least 1".into(),
                        found: "0".into(),
                    });
                }
                let f = match f {
                    Some(rows) => Matrix::from_rows(field, rows)?,
                    None => sample_uniform(field, m_a, m_a * window, &mut rng),
                };
                if f.shape() != (m_a, m_a * window) {
                    return Err(AdversaryError::Parameter {
                        what: "coefficient matrix",
                        expected: format!("{m_a}x{}", m_a * window),
                        found: format!("{}x{}", f.rows(), f.cols()),
                    });
                }
                State::Linear { f, window: *window }
            }
        };
        Ok(Self {
            field: field.clone(),
            m_a,
            state,
            rng,
            history: Vec::new(),
        })
    }

    /// Injection for use `index`, given the symbols observed at that use.
    /// Uses must arrive in order starting at 0.
    pub fn observe_and_inject(&mut self, observed: &[u64], index: usize) -> Result<Vec<u64>, AdversaryError> {
        if index != self.history.len() {
            return Err(AdversaryError::OutOfOrder {
                expected: self.history.len(),
                got: index,
            });
        }
        if observed.len() != self.m_a {
            return Err(AdversaryError::ObservationLength {
                expected: self.m_a,
                found: observed.len(),
            });
        }
        self.history.push(observed.to_vec());
        let f = &self.field;
        let out = match &self.state {
            State::None => vec![0; self.m_a],
            State::Uniform => (0..self.m_a).map(|_| f.random(&mut self.rng)).collect(),
            State::Pattern(z) => {
                if index >= z.cols() {
                    return Err(AdversaryError::PatternExhausted(index));
                }
                z.column(index)
            }
            State::Overwrite(t) => t.iter().zip(observed).map(|(&t, &o)| f.sub(t, o)).collect(),
            State::Linear { f: coef, window } => {
                let mut acc = vec![0u64; self.m_a];
                for k in 0..(*window).min(index + 1) {
                    let obs = &self.history[index - k];
                    for (r, slot) in acc.iter_mut().enumerate() {
                        for (c, &o) in obs.iter().enumerate() {
                            *slot = f.add(*slot, f.mul(coef.get(r, k * self.m_a + c), o));
                        }
                    }
                }
                acc
            }
        };
        Ok(out)
    }

    /// Runs the attacker over a whole block of observations
    /// (`m_a x n'`, one column per use) and returns the injections.
    pub fn attack_block(&mut self, observations: &Matrix) -> Result<Matrix, AdversaryError> {
        let n = observations.cols();
        let mut z = Matrix::zeros(&self.field, self.m_a, n);
        for i in 0..n {
            let inj = self.observe_and_inject(&observations.column(i), i)?;
            for (r, v) in inj.into_iter().enumerate() {
                z.set(r, i, v);
            }
        }
        Ok(z)
    }
}

/// Hex SHA-256 of the packed injection matrix, as a transcript digest.
pub fn transcript_digest(z: &Matrix) -> String {
    let mut h = Sha256::new();
    h.update((z.rows() as u64).to_le_bytes());
    h.update((z.cols() as u64).to_le_bytes());
    for &v in z.data() {
        h.update(v.to_le_bytes());
    }
    hex::encode(h.finalize())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::{ChannelModel, CodeParams};
    use crate::linalg::solve_row;
    use crate::network::{random_network, FieldDesc, NetworkSpec};
    use proptest::prelude::*;

    fn gf(p: u64, d: u32) -> FieldSpec {
        FieldSpec::new(p, d).unwrap()
    }

    fn all_strategies(m_a: usize, n: usize) -> Vec<AttackStrategy> {
        vec![
            AttackStrategy::NoAttack,
            AttackStrategy::UniformRandom,
            AttackStrategy::FixedPattern { z: vec![(0..n as u64).map(|v| v % 4).collect(); m_a] },
            AttackStrategy::OverwriteConstant { target: vec![0] },
            AttackStrategy::AdaptiveLinear { window: 3, f: None },
        ]
    }

    #[test]
    fn no_attack_is_zero() {
        let f = gf(2, 8);
        let mut a = Attacker::new(&AttackStrategy::NoAttack, &f, 2, 0).unwrap();
        for i in 0..10 {
            assert_eq!(a.observe_and_inject(&[i, 7], i as usize).unwrap(), vec![0, 0]);
        }
    }

    #[test]
    fn overwrite_forwards_target() {
        let f = gf(7, 1);
        let mut a = Attacker::new(&AttackStrategy::OverwriteConstant { target: vec![0] }, &f, 1, 0).unwrap();
        for (i, o) in [3u64, 0, 6, 1].into_iter().enumerate() {
            let inj = a.observe_and_inject(&[o], i).unwrap();
            assert_eq!(inj, vec![f.neg(o)]);
            assert_eq!(f.add(o, inj[0]), 0);
        }
        let mut b = Attacker::new(&AttackStrategy::OverwriteConstant { target: vec![2, 5] }, &f, 2, 0).unwrap();
        let inj = b.observe_and_inject(&[4, 4], 0).unwrap();
        assert_eq!((f.add(4, inj[0]), f.add(4, inj[1])), (2, 5));
    }

    #[test]
    fn uniform_frequencies() {
        let f = gf(2, 2);
        let mut a = Attacker::new(&AttackStrategy::UniformRandom, &f, 1, 42).unwrap();
        let mut counts = [0usize; 4];
        for i in 0..10_000 {
            counts[a.observe_and_inject(&[0], i).unwrap()[0] as usize] += 1;
        }
        for c in counts {
            assert!((c as f64 / 10_000.0 - 0.25).abs() <= 0.02, "{counts:?}");
        }
        // Pearson statistic against 7.81, the 95% point of chi-square(3).
        let chi: f64 = counts.iter().map(|&c| (c as f64 - 2500.0).powi(2) / 2500.0).sum();
        assert!(chi < 7.81, "{chi}");
    }

    #[test]
    fn fixed_pattern_and_linear() {
        let f = gf(5, 1);
        let z = vec![vec![1, 2, 3], vec![4, 0, 1]];
        let mut a = Attacker::new(&AttackStrategy::FixedPattern { z }, &f, 2, 0).unwrap();
        assert_eq!(a.observe_and_inject(&[0, 0], 0).unwrap(), vec![1, 4]);
        assert_eq!(a.observe_and_inject(&[0, 0], 1).unwrap(), vec![2, 0]);
        assert_eq!(a.observe_and_inject(&[0, 0], 2).unwrap(), vec![3, 1]);
        assert_eq!(a.observe_and_inject(&[0, 0], 3).unwrap_err(), AdversaryError::PatternExhausted(3));

        // window 2 on one edge: inj_i = 2 obs_i + 3 obs_(i-1)
        let s = AttackStrategy::AdaptiveLinear { window: 2, f: Some(vec![vec![2, 3]]) };
        let mut a = Attacker::new(&s, &f, 1, 0).unwrap();
        assert_eq!(a.observe_and_inject(&[1], 0).unwrap(), vec![2]);
        assert_eq!(a.observe_and_inject(&[4], 1).unwrap(), vec![(8 + 3) % 5]);
        assert_eq!(a.observe_and_inject(&[0], 2).unwrap(), vec![12 % 5]);
    }

    #[test]
    fn errors() {
        let f = gf(3, 1);
        let mut a = Attacker::new(&AttackStrategy::UniformRandom, &f, 2, 0).unwrap();
        assert!(matches!(a.observe_and_inject(&[0], 0), Err(AdversaryError::ObservationLength { .. })));
        assert!(matches!(a.observe_and_inject(&[0, 0], 1), Err(AdversaryError::OutOfOrder { .. })));
        let bad = AttackStrategy::AdaptiveLinear { window: 2, f: Some(vec![vec![1]]) };
        assert!(Attacker::new(&bad, &f, 1, 0).is_err());
        let bad = AttackStrategy::OverwriteConstant { target: vec![1, 1, 1] };
        assert!(Attacker::new(&bad, &f, 2, 0).is_err());
    }

    #[test]
    fn strategy_json_round_trip() {
        for s in all_strategies(1, 4) {
            let text = serde_json::to_string(&s).unwrap();
            assert_eq!(serde_json::from_str::<AttackStrategy>(&text).unwrap(), s);
        }
        let s: AttackStrategy = serde_json::from_str(r#"{"kind":"overwrite_constant","target":[0]}"#).unwrap();
        assert_eq!(s, AttackStrategy::OverwriteConstant { target: vec![0] });
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn injections_are_causal(seed in any::<u64>(), which in 0usize..5, cut in 1usize..12, m_a in 1usize..3) {
            let f = gf(2, 4);
            let n = 12;
            let strategy = all_strategies(m_a, n)[which].clone();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let obs = sample_uniform(&f, m_a, n, &mut rng);
            let mut mutated = obs.clone();
            for j in cut..n {
                for r in 0..m_a {
                    mutated.set(r, j, f.random(&mut rng));
                }
            }
            let z1 = Attacker::new(&strategy, &f, m_a, seed).unwrap().attack_block(&obs).unwrap();
            let z2 = Attacker::new(&strategy, &f, m_a, seed).unwrap().attack_block(&mutated).unwrap();
            prop_assert_eq!(z1.columns(0, cut), z2.columns(0, cut));
        }

        #[test]
        fn output_decomposes_through_injection_matrix(seed in any::<u64>(), which in 0usize..5) {
            let base = gf(2, 1);
            let params = CodeParams::with_override(FieldDesc { p: 2, d: 1 }, 3, 1, 8, 12).unwrap();
            let f = params.extension_field().unwrap();
            let mut net = random_network(seed % 50, 3, 3, &base);
            net.attacked = vec![(seed as usize) % net.edges.len()];
            let chan = ChannelModel::bit(&net, &f).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x = sample_uniform(&f, 3, 12, &mut rng);
            let strategy = all_strategies(1, 12)[which].clone();
            let z = Attacker::new(&strategy, &f, 1, seed).unwrap().attack_block(&chan.observe(&x).unwrap()).unwrap();
            let y = chan.transmit(&x, Some(&z)).unwrap();
            // Recover some Z' with Y - K X' = W Z' column by column.
            let delta = y.sub(&chan.k.mul(&x).unwrap()).unwrap();
            let wt = chan.w.transpose();
            let mut recovered = Matrix::zeros(&f, 1, 12);
            for j in 0..12 {
                let col = solve_row(&wt, &delta.column(j)).unwrap();
                prop_assert!(col.is_some());
                recovered.set(0, j, col.unwrap()[0]);
            }
            let residual = delta.sub(&chan.w.mul(&recovered).unwrap()).unwrap();
            prop_assert!(residual.is_zero());
        }
    }

    #[test]
    fn overwrite_on_parallel_network_delivers_targets() {
        let params = CodeParams::with_override(FieldDesc { p: 2, d: 1 }, 3, 1, 8, 12).unwrap();
        let f = params.extension_field().unwrap();
        let net = NetworkSpec::parallel(&gf(2, 1), 3).with_attacked(vec![2]);
        let chan = ChannelModel::bit(&net, &f).unwrap();
        let x = sample_uniform(&f, 3, 12, &mut ChaCha8Rng::seed_from_u64(1));
        let mut a = Attacker::new(&AttackStrategy::OverwriteConstant { target: vec![9] }, &f, 1, 0).unwrap();
        let z = a.attack_block(&chan.observe(&x).unwrap()).unwrap();
        let y = chan.transmit(&x, Some(&z)).unwrap();
        assert_eq!(y.row(2), &[9; 12]);
        assert_eq!(y.row_range(0, 2), x.row_range(0, 2));
        assert_eq!(transcript_digest(&z).len(), 64);
    }
}
