//! Statistical checks of the probabilistic lemmas behind the error bound.
//!
//! Each check draws seeded samples in parallel and compares the observed
//! frequency with an exact value or an upper bound, allowing three
//! standard deviations of slack.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{derive_seed, HarnessError};
use crate::codec::{build_r1, build_r1_inv, q_blocks, CodeParams};
use crate::gf::FieldSpec;
use crate::linalg::{sample_full_rank, sample_uniform, Matrix};

/// Places a chosen band and the other band into (A, B).
type Place = fn(Vec<u64>, Vec<u64>) -> (Vec<u64>, Vec<u64>);

/// Number of standard deviations allowed between estimate and reference.
pub const SIGMAS: f64 = 3.0;

fn rng_for(seed: u64, trial: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, trial))
}

fn sigma(p: f64, n: u64) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

fn count_hits(trials: u64, seed: u64, hit: impl Fn(&mut ChaCha8Rng) -> bool + Sync) -> u64 {
    (0..trials)
        .into_par_iter()
        .filter(|&t| hit(&mut rng_for(seed, t)))
        .count() as u64
}

fn pow_f(q: u128, e: usize) -> f64 {
    (q as f64).powi(e as i32)
}

fn all_matrices(field: &FieldSpec, rows: usize, cols: usize) -> Result<Vec<Matrix>, HarnessError> {
    let q = field.order();
    let count = (0..rows * cols).try_fold(1u128, |acc, _| acc.checked_mul(q).filter(|&c| c <= 1 << 20));
    let Some(count) = count else {
        return Err(HarnessError::Precondition("enumeration too large".into()));
    };
    let mut out = Vec::with_capacity(count as usize);
    for mut idx in 0..count {
        let mut data = vec![0u64; rows * cols];
        for slot in data.iter_mut() {
            *slot = (idx % q) as u64;
            idx /= q;
        }
        out.push(Matrix::from_vec(field, rows, cols, data)?);
    }
    Ok(out)
}

fn meets_trivially(w: &Matrix, r: &Matrix) -> Result<bool, HarnessError> {
    Ok(Matrix::vstack(&[w, r])?.rank() == w.rows() + r.rows())
}

#[derive(Debug, Clone, Serialize)]
pub struct SubspaceReport {
    pub n0: usize,
    pub n1: usize,
    pub n2: usize,
    pub q: u128,
    pub trials: u64,
    pub hits: u64,
    pub frequency: f64,
    /// `prod_{i<n2} (q^n0 - q^(n1+i)) / (q^n0 - q^i)`
    pub exact: f64,
    /// Exact value by enumerating every full-rank `n2 x n0` matrix, when small.
    pub exhaustive: Option<f64>,
    /// `C` with `exact = 1 - C q^(n1 + n2 - n0 - 1)`.
    pub constant: f64,
    /// The telescoping product with first denominator `q^n0`.
    pub first_factor_q_n0: f64,
    pub sigma: f64,
    pub within_exact: bool,
    pub within_first_factor_q_n0: bool,
    pub passed: bool,
}

/// Frequency with which a uniform `n2`-dimensional subspace of GF(q)^n0
/// meets the span of the first `n1` standard basis vectors only in 0.
pub fn lemma_check_subspace(
    n0: usize,
    n1: usize,
    n2: usize,
    field: &FieldSpec,
    trials: u64,
    seed: u64,
) -> Result<SubspaceReport, HarnessError> {
    if n0 < n1 + n2 {
        return Err(HarnessError::Precondition(format!("need n0 >= n1 + n2, got {n0} < {n1} + {n2}")));
    }
    if trials == 0 {
        return Err(HarnessError::Precondition("trials must be positive".into()));
    }
    let q = field.order();
    let mut w = Matrix::zeros(field, n1, n0);
    for i in 0..n1 {
        w.set(i, i, 1);
    }
    let qn0 = pow_f(q, n0);
    let mut exact = 1.0;
    let mut first_factor_q_n0 = 1.0;
    for i in 0..n2 {
        let num = qn0 - pow_f(q, n1 + i);
        exact *= num / (qn0 - pow_f(q, i));
        first_factor_q_n0 *= num / if i == 0 { qn0 } else { qn0 - pow_f(q, i) };
    }
    let e = n1 as i32 + n2 as i32 - n0 as i32 - 1;
    let constant = (1.0 - exact) / (q as f64).powi(e);

    let exhaustive = if n2 > 0 && (q as f64).powi((n0 * n2) as i32) <= 65536.0 {
        let mut full = 0u64;
        let mut good = 0u64;
        for r in all_matrices(field, n2, n0)? {
            if r.rank() == n2 {
                full += 1;
                if meets_trivially(&w, &r)? {
                    good += 1;
                }
            }
        }
        Some(good as f64 / full as f64)
    } else {
        None
    };

    let hits = if n2 == 0 {
        trials
    } else {
        count_hits(trials, seed, |rng| {
            let r = sample_full_rank(field, n2, n0, rng);
            meets_trivially(&w, &r).expect("shapes agree")
        })
    };
    let frequency = hits as f64 / trials as f64;
    let s = sigma(exact, trials);
    let within_exact = (frequency - exact).abs() <= SIGMAS * s + 1e-12;
    let s_alt = sigma(first_factor_q_n0, trials);
    let within_first_factor_q_n0 = (frequency - first_factor_q_n0).abs() <= SIGMAS * s_alt + 1e-12;
    let exhaustive_agrees = exhaustive.is_none_or(|x| (x - exact).abs() < 1e-12);
    Ok(SubspaceReport {
        n0,
        n1,
        n2,
        q,
        trials,
        hits,
        frequency,
        exact,
        exhaustive,
        constant,
        first_factor_q_n0,
        sigma: s,
        within_exact,
        within_first_factor_q_n0,
        passed: within_exact && exhaustive_agrees,
    })
}

/// Evaluates `sum_i y_i s^i` for `i = 1..=len(y)`.
fn power_sum(field: &FieldSpec, y: &[u64], s: u64) -> u64 {
    let mut acc = 0;
    let mut pw = s;
    for &c in y {
        acc = field.add(acc, field.mul(c, pw));
        pw = field.mul(pw, s);
    }
    acc
}

#[derive(Debug, Clone, Serialize)]
pub struct VandermondeCase {
    pub label: String,
    pub x: Vec<u64>,
    pub y: Vec<u64>,
    pub hits: u64,
    pub frequency: f64,
    /// Product over columns of (roots of `y(s) - x_j`) / q, by enumeration.
    pub exact: f64,
    pub within_exact: bool,
    pub within_bound: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct VandermondeReport {
    pub q: u128,
    pub l: usize,
    pub m: usize,
    pub trials: u64,
    /// `(l / q)^m`
    pub bound: f64,
    pub cases: Vec<VandermondeCase>,
    pub passed: bool,
}

/// Frequency of `x = y Q` with `Q_{ij} = S_j^i` (`i = 1..=l`) over uniform
/// `S`, for a panel of fixed pairs with `y != 0`.
pub fn lemma_check_vandermonde(
    l: usize,
    m: usize,
    field: &FieldSpec,
    trials: u64,
    seed: u64,
) -> Result<VandermondeReport, HarnessError> {
    if l < m || trials == 0 {
        return Err(HarnessError::Precondition(format!("need l >= m and trials > 0, got l={l}, m={m}")));
    }
    let q = field.order();
    if q > 1 << 16 {
        return Err(HarnessError::Precondition("field too large for root enumeration".into()));
    }
    let bound = (l as f64 / q as f64).powi(m as i32);
    let mut panel: Vec<(String, Vec<u64>, Vec<u64>)> = Vec::new();

    let mut e1 = vec![0; l];
    e1[0] = 1;
    panel.push(("y=e1,x=0".into(), vec![0; m], e1));

    // y(s) - c = prod_k (s - r_k) has l distinct roots in every column.
    if (l as u128) < q {
        let mut poly = vec![1u64];
        for r in 1..=l as u64 {
            let mut next = vec![0u64; poly.len() + 1];
            for (i, &c) in poly.iter().enumerate() {
                next[i + 1] = field.add(next[i + 1], c);
                next[i] = field.sub(next[i], field.mul(c, r));
            }
            poly = next;
        }
        let x = vec![field.neg(poly[0]); m];
        panel.push(("tight: l distinct roots per column".into(), x, poly[1..].to_vec()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    for i in 0..4 {
        let y = loop {
            let y: Vec<u64> = (0..l).map(|_| field.random(&mut rng)).collect();
            if y.iter().any(|&v| v != 0) {
                break y;
            }
        };
        let x = (0..m).map(|_| field.random(&mut rng)).collect();
        panel.push((format!("random {i}"), x, y));
    }
    let y: Vec<u64> = (0..l).map(|k| if k == l - 1 { 1 } else { field.random(&mut rng) }).collect();
    let s: Vec<u64> = (0..m).map(|_| field.random(&mut rng)).collect();
    let x = s.iter().map(|&sj| power_sum(field, &y, sj)).collect();
    panel.push(("witness: x = yQ at a drawn S".into(), x, y));

    let mut cases = Vec::new();
    for (label, x, y) in panel {
        let exact: f64 = x
            .iter()
            .map(|&xj| field.elements().filter(|&s| power_sum(field, &y, s) == xj).count() as f64 / q as f64)
            .product();
        let hits = count_hits(trials, seed, |rng| {
            x.iter().all(|&xj| power_sum(field, &y, field.random(rng)) == xj)
        });
        let frequency = hits as f64 / trials as f64;
        let slack_exact = SIGMAS * sigma(exact, trials) + 1e-12;
        let slack_bound = SIGMAS * sigma(bound, trials) + 1e-12;
        cases.push(VandermondeCase {
            label,
            x,
            y,
            hits,
            frequency,
            exact,
            within_exact: (frequency - exact).abs() <= slack_exact,
            within_bound: frequency <= bound + slack_bound && exact <= bound + 1e-12,
        });
    }
    let witness_seen = cases.last().is_some_and(|c| c.hits > 0);
    Ok(VandermondeReport {
        q,
        l,
        m,
        trials,
        bound,
        passed: witness_seen && cases.iter().all(|c| c.within_exact && c.within_bound),
        cases,
    })
}

/// Which of the two zero-hit events is being estimated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum R1Form {
    /// `x (R_1^-1)^A = 0`
    Bit,
    /// `x ([R_1]_p^-1)^B = 0`, with `[R_1]_p^-1 = R_1^T`
    Phase,
}

#[derive(Debug, Clone, Serialize)]
pub struct R1Case {
    pub form: R1Form,
    /// 1: `x^C != 0`; 2: the other non-target band set, `x^C = 0`;
    /// 3: only the target band set.
    pub case: u8,
    pub label: String,
    pub hits: u64,
    pub frequency: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct R1Report {
    pub log2_q_prime: f64,
    pub m0: usize,
    pub n_prime: usize,
    pub trials: u64,
    /// `((n' - 2 m0) / q')^m0`
    pub bound: f64,
    /// Trials on which the closed forms were compared with the matrix route.
    pub cross_checked: u64,
    pub cross_check_mismatches: u64,
    pub cases: Vec<R1Case>,
    pub passed: bool,
}

fn vec_mat(field: &FieldSpec, x: &[u64], q: &Matrix) -> Vec<u64> {
    (0..q.cols())
        .map(|j| x.iter().enumerate().fold(0, |acc, (i, &xi)| field.add(acc, field.mul(xi, q.get(i, j)))))
        .collect()
}

fn add_vec(field: &FieldSpec, a: &mut [u64], b: &[u64]) {
    for (x, &y) in a.iter_mut().zip(b) {
        *x = field.add(*x, y);
    }
}

/// `x (R_1^-1)^A = x^A - x^B (Q3^T + Q4) - x^C Q1`.
fn bit_form(field: &FieldSpec, x: &[u64], qs: &[Matrix; 4], m0: usize) -> Vec<u64> {
    let [q1, _, q3, q4] = qs;
    let mut out = x[..m0].to_vec();
    let b = vec_mat(field, &x[m0..2 * m0], &q3.transpose().add(q4).expect("square"));
    let c = vec_mat(field, &x[2 * m0..], q1);
    for (o, (bi, ci)) in out.iter_mut().zip(b.iter().zip(&c)) {
        *o = field.sub(field.sub(*o, *bi), *ci);
    }
    out
}

/// `x R_1^T` restricted to B: `x^B + x^A (Q4^T + Q3 + Q1^T Q2) + x^C Q2`.
fn phase_form(field: &FieldSpec, x: &[u64], qs: &[Matrix; 4], m0: usize) -> Vec<u64> {
    let [q1, q2, q3, q4] = qs;
    let mix = q4
        .transpose()
        .add(q3)
        .and_then(|m| m.add(&q1.transpose().mul(q2)?))
        .expect("square");
    let mut out = x[m0..2 * m0].to_vec();
    add_vec(field, &mut out, &vec_mat(field, &x[..m0], &mix));
    add_vec(field, &mut out, &vec_mat(field, &x[2 * m0..], q2));
    out
}

fn r1_panel(field: &FieldSpec, m0: usize, n: usize, seed: u64) -> Vec<(R1Form, u8, String, Vec<u64>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xa11ce);
    let mut rand_band = |len: usize| -> Vec<u64> {
        loop {
            let v: Vec<u64> = (0..len).map(|_| field.random(&mut rng)).collect();
            if v.iter().any(|&x| x != 0) {
                break v;
            }
        }
    };
    let zero = |len: usize| vec![0u64; len];
    let c = n - 2 * m0;
    let join = |a: Vec<u64>, b: Vec<u64>, cc: Vec<u64>| [a, b, cc].concat();
    let mut unit_c = zero(c);
    unit_c[0] = 1;
    let mut out = Vec::new();
    for form in [R1Form::Bit, R1Form::Phase] {
        // Case 2 sets the non-target band among A and B; case 3 the target.
        let (case2, case3): (Place, Place) =
            match form {
                R1Form::Bit => (|set, other| (other, set), |set, other| (set, other)),
                R1Form::Phase => (|set, other| (set, other), |set, other| (other, set)),
            };
        out.push((form, 1, "x^C = e1".into(), join(zero(m0), zero(m0), unit_c.clone())));
        out.push((form, 1, "all bands random".into(), join(rand_band(m0), rand_band(m0), rand_band(c))));
        let z = zero(m0);
        let (a, b) = case2(rand_band(m0), z.clone());
        out.push((form, 2, "one band random, x^C = 0".into(), join(a, b, zero(c))));
        let (a, b) = case2(rand_band(m0), rand_band(m0));
        out.push((form, 2, "A and B random, x^C = 0".into(), join(a, b, zero(c))));
        for i in 0..2 {
            let (a, b) = case3(rand_band(m0), z.clone());
            out.push((form, 3, format!("target band only {i}"), join(a, b, zero(c))));
        }
    }
    out
}

/// Zero-hit frequencies of both `R_1` forms over uniform `S`, on a panel
/// covering the three cases of each form. The first `cross_check` trials
/// also evaluate both forms through the full matrices.
pub fn lemma_check_r1(params: &CodeParams, trials: u64, seed: u64, cross_check: u64) -> Result<R1Report, HarnessError> {
    if params.n_prime < 3 * params.m0 {
        return Err(HarnessError::Precondition("need n' >= 3 m0".into()));
    }
    if trials == 0 {
        return Err(HarnessError::Precondition("trials must be positive".into()));
    }
    let field = params.extension_field()?;
    let (m0, n) = (params.m0, params.n_prime);
    let panel = r1_panel(&field, m0, n, seed);
    if panel.is_empty() {
        return Err(HarnessError::Precondition("panel empty".into()));
    }
    let bound = ((n - 2 * m0) as f64).log2() * m0 as f64 - params.log2_q_prime() * m0 as f64;
    let bound = bound.exp2();
    let cross_checked = cross_check.min(trials);

    let per_trial: Vec<(Vec<bool>, bool)> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = rng_for(seed, t);
            let s: Vec<u64> = (0..params.s_len()).map(|_| field.random(&mut rng)).collect();
            let qs = q_blocks(&field, &s, params)?;
            let mut mismatch = false;
            let full = if t < cross_checked {
                Some((build_r1_inv(&field, &s, params)?, build_r1(&field, &s, params)?.transpose()))
            } else {
                None
            };
            let hits = panel
                .iter()
                .map(|(form, _, _, x)| {
                    let v = match form {
                        R1Form::Bit => bit_form(&field, x, &qs, m0),
                        R1Form::Phase => phase_form(&field, x, &qs, m0),
                    };
                    if let Some((inv, tr)) = &full {
                        let row = Matrix::row_vector(&field, x);
                        let prod = row.and_then(|row| match form {
                            R1Form::Bit => row.mul(inv).map(|r| r.row(0)[..m0].to_vec()),
                            R1Form::Phase => row.mul(tr).map(|r| r.row(0)[m0..2 * m0].to_vec()),
                        });
                        if prod.ok().as_deref() != Some(&v[..]) {
                            mismatch = true;
                        }
                    }
                    v.iter().all(|&e| e == 0)
                })
                .collect();
            Ok((hits, mismatch))
        })
        .collect::<Result<_, HarnessError>>()?;

    let cross_check_mismatches = per_trial.iter().filter(|(_, m)| *m).count() as u64;
    let slack = SIGMAS * sigma(bound, trials) + 1e-12;
    let cases: Vec<R1Case> = panel
        .iter()
        .enumerate()
        .map(|(i, (form, case, label, _))| {
            let hits = per_trial.iter().filter(|(h, _)| h[i]).count() as u64;
            let frequency = hits as f64 / trials as f64;
            let passed = if *case == 3 { hits == 0 } else { frequency <= bound + slack };
            R1Case {
                form: *form,
                case: *case,
                label: label.clone(),
                hits,
                frequency,
                passed,
            }
        })
        .collect();
    Ok(R1Report {
        log2_q_prime: params.log2_q_prime(),
        m0,
        n_prime: n,
        trials,
        bound,
        cross_checked,
        cross_check_mismatches,
        passed: cross_check_mismatches == 0 && cases.iter().all(|c| c.passed),
        cases,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct FullRankReport {
    pub q: u128,
    pub k: usize,
    pub trials: u64,
    pub hits: u64,
    pub frequency: f64,
    /// `prod_{i=1..k} (1 - q^-i)`
    pub exact: f64,
    pub exhaustive: Option<f64>,
    pub lower_bound: f64,
    pub passed: bool,
}

/// Frequency with which a uniform `k x k` matrix has full rank.
pub fn full_rank_check(k: usize, field: &FieldSpec, trials: u64, seed: u64) -> Result<FullRankReport, HarnessError> {
    if k == 0 || trials == 0 {
        return Err(HarnessError::Precondition("need k > 0 and trials > 0".into()));
    }
    let q = field.order();
    let exact: f64 = (1..=k).map(|i| 1.0 - (q as f64).powi(-(i as i32))).product();
    let exhaustive = if (q as f64).powi((k * k) as i32) <= 65536.0 {
        let all = all_matrices(field, k, k)?;
        Some(all.iter().filter(|m| m.rank() == k).count() as f64 / all.len() as f64)
    } else {
        None
    };
    let hits = count_hits(trials, seed, |rng| sample_uniform(field, k, k, rng).rank() == k);
    let frequency = hits as f64 / trials as f64;
    let lower_bound = (1.0 - 2.0 / q as f64).max(0.0);
    let ok = (frequency - exact).abs() <= SIGMAS * sigma(exact, trials) + 1e-12
        && exact >= lower_bound
        && exhaustive.is_none_or(|x| (x - exact).abs() < 1e-12);
    Ok(FullRankReport {
        q,
        k,
        trials,
        hits,
        frequency,
        exact,
        exhaustive,
        lower_bound,
        passed: ok,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct LemmaSuite {
    pub sigmas: f64,
    pub subspace: Vec<SubspaceReport>,
    pub vandermonde: VandermondeReport,
    pub r1: R1Report,
    pub full_rank: Vec<FullRankReport>,
    pub passed: bool,
}

/// The standard panel: subspace at (4,2,2,2) and (8,2,2,3), Vandermonde at
/// (q,l,m) = (64,4,2), both R_1 forms at q' = 2^8, m0 = 3, n' = 12, and
/// full rank of 2 x 2 matrices over GF(2), GF(3) and GF(2^8).
pub fn run_suite(trials: u64, seed: u64) -> Result<LemmaSuite, HarnessError> {
    let gf = |p, d| FieldSpec::new(p, d).expect("small field");
    let small = (trials / 10).max(1);
    let subspace = vec![
        lemma_check_subspace(4, 2, 2, &gf(2, 1), small, seed)?,
        lemma_check_subspace(8, 2, 2, &gf(3, 1), small, seed.wrapping_add(1))?,
    ];
    let vandermonde = lemma_check_vandermonde(4, 2, &gf(2, 6), trials, seed.wrapping_add(2))?;
    let params = CodeParams::with_override(crate::network::FieldDesc { p: 2, d: 1 }, 3, 1, 8, 12)?;
    let r1 = lemma_check_r1(&params, trials, seed.wrapping_add(3), 200)?;
    let full_rank = vec![
        full_rank_check(2, &gf(2, 1), small, seed.wrapping_add(4))?,
        full_rank_check(2, &gf(3, 1), small, seed.wrapping_add(5))?,
        full_rank_check(2, &gf(2, 8), small, seed.wrapping_add(6))?,
    ];
    let passed = subspace.iter().all(|s| s.passed) && vandermonde.passed && r1.passed && full_rank.iter().all(|f| f.passed);
    Ok(LemmaSuite {
        sigmas: SIGMAS,
        subspace,
        vandermonde,
        r1,
        full_rank,
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::FieldDesc;

    fn gf(p: u64, d: u32) -> FieldSpec {
        FieldSpec::new(p, d).unwrap()
    }

    #[test]
    fn subspace_exact_values() {
        let r = lemma_check_subspace(4, 2, 2, &gf(2, 1), 2000, 1).unwrap();
        assert!((r.exact - 16.0 / 35.0).abs() < 1e-12);
        assert!((r.exhaustive.unwrap() - 16.0 / 35.0).abs() < 1e-12);
        assert!((r.first_factor_q_n0 - 0.75 * 8.0 / 14.0).abs() < 1e-12);
        assert!(r.passed, "{r:?}");

        let r = lemma_check_subspace(4, 2, 0, &gf(2, 1), 10, 1).unwrap();
        assert_eq!(r.frequency, 1.0);
        assert!(lemma_check_subspace(3, 2, 2, &gf(2, 1), 10, 1).is_err());
    }

    #[test]
    fn subspace_q3_meets_bound() {
        let r = lemma_check_subspace(8, 2, 2, &gf(3, 1), 3000, 2).unwrap();
        assert!(r.frequency >= 1.0 - 3.0 * 3f64.powi(-5));
        assert!(r.passed);
    }

    #[test]
    fn vandermonde_panel() {
        let r = lemma_check_vandermonde(4, 2, &gf(2, 6), 20_000, 3).unwrap();
        assert!((r.bound - 1.0 / 256.0).abs() < 1e-15);
        let tight = &r.cases[1];
        assert!((tight.exact - r.bound).abs() < 1e-12);
        // y = e1, x = 0 needs S_j = 0 in both columns.
        assert!((r.cases[0].exact - 1.0 / 4096.0).abs() < 1e-15);
        assert!(r.passed, "{r:#?}");
    }

    #[test]
    fn r1_forms_match_matrices_and_degenerate_s() {
        let p = CodeParams::with_override(FieldDesc { p: 2, d: 1 }, 3, 1, 8, 12).unwrap();
        let f = p.extension_field().unwrap();
        let qs = q_blocks(&f, &[0; 12], &p).unwrap();
        let x: Vec<u64> = (1..=12).collect();
        // S = 0 makes R_1 the identity.
        assert_eq!(bit_form(&f, &x, &qs, 3), x[..3].to_vec());
        assert_eq!(phase_form(&f, &x, &qs, 3), x[3..6].to_vec());

        let r = lemma_check_r1(&p, 2000, 4, 300).unwrap();
        assert_eq!(r.cross_check_mismatches, 0);
        for c in r.cases.iter().filter(|c| c.case == 3) {
            assert_eq!(c.hits, 0);
        }
        assert!(r.passed, "{r:#?}");
    }

    #[test]
    fn full_rank_examples() {
        let r = full_rank_check(2, &gf(2, 1), 4000, 5).unwrap();
        assert!((r.exact - 0.375).abs() < 1e-15);
        assert_eq!(r.exhaustive, Some(0.375));
        assert!(r.passed);
        assert!(full_rank_check(2, &gf(2, 8), 2000, 6).unwrap().passed);
    }
}
