//! Closed-form bound calculators and rate accounting.

use num_bigint::BigUint;
use serde::Serialize;

use super::HarnessError;
use crate::codec::derive_params;
use crate::network::FieldDesc;

/// `1 - (p_bit + p_phase)`, floored at 0.
pub fn fidelity_bound(p_bit: f64, p_phase: f64) -> Result<f64, HarnessError> {
    for p in [p_bit, p_phase] {
        if !(0.0..=1.0).contains(&p) {
            return Err(HarnessError::Precondition(format!("probability {p} outside [0, 1]")));
        }
    }
    Ok((1.0 - (p_bit + p_phase)).max(0.0))
}

/// Binary entropy in bits, with `h(0) = h(1) = 0`.
pub fn binary_entropy(x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        return 0.0;
    }
    -x * x.log2() - (1.0 - x) * (1.0 - x).log2()
}

/// `h(F) + (1 - F) log2((d - 1)^2)` in bits.
pub fn leakage_bound(fidelity: f64, d: u128) -> Result<f64, HarnessError> {
    if d < 2 {
        return Err(HarnessError::Precondition(format!("code dimension must be at least 2, got {d}")));
    }
    check_fidelity(fidelity)?;
    Ok(binary_entropy(fidelity) + (1.0 - fidelity) * 2.0 * ((d - 1) as f64).log2())
}

/// [`leakage_bound`] for a dimension given as `log2 d`, so that `d` may
/// exceed any machine integer.
pub fn leakage_bound_log2(fidelity: f64, log2_d: f64) -> Result<f64, HarnessError> {
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    if !(log2_d >= 1.0) {
        return Err(HarnessError::Precondition(format!("code dimension must be at least 2, got 2^{log2_d}")));
    }
    check_fidelity(fidelity)?;
    // log2(d - 1) = log2 d + log2(1 - 1/d)
    let log2_dm1 = log2_d + (-(-log2_d).exp2()).ln_1p() / std::f64::consts::LN_2;
    Ok(binary_entropy(fidelity) + (1.0 - fidelity) * 2.0 * log2_dm1)
}

fn check_fidelity(f: f64) -> Result<(), HarnessError> {
    if !(0.0..=1.0).contains(&f) {
        return Err(HarnessError::Precondition(format!("fidelity {f} outside [0, 1]")));
    }
    Ok(())
}

/// Wilson score interval for `k` successes out of `n`.
pub fn wilson_interval(k: u64, n: u64, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let n = n as f64;
    let p = k as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// Block lengths, overhead and rate for a scale index `ell`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateReport {
    pub q: FieldDesc,
    pub m0: usize,
    pub m1: usize,
    pub ell: u128,
    pub alpha: u64,
    pub n_prime: usize,
    /// Uses spent on the quantum code, `alpha * n'`.
    pub n1: u128,
    pub log2_q_prime: f64,
    /// `q'` in decimal.
    pub q_prime: String,
    /// Secret bits to agree on.
    pub k: u128,
    pub beta: u64,
    /// Uses spent on the classical secret-agreement protocol.
    pub n2: u128,
    pub total_n: u128,
    /// Rate in `log_q` units per network use.
    pub rate: f64,
    pub asymptotic_rate: usize,
    /// Size of the shared randomness in GF(q') symbols.
    pub rs_symbols: usize,
    /// `rs_symbols * alpha / total_n`.
    pub rs_ratio: f64,
    /// `log2` of the secret-agreement error bound `k m0 / q^(beta m0)`.
    pub log2_agreement_error: f64,
}

/// Largest `b` with `base^b <= value`.
fn floor_log_big(base: &BigUint, value: &BigUint) -> u64 {
    let mut b = 0;
    let mut acc = base.clone();
    while &acc <= value {
        b += 1;
        acc *= base;
    }
    b
}

/// Accounting for the full protocol at scale `ell`.
pub fn rate_accounting(q: FieldDesc, m0: usize, m1: usize, ell: u128) -> Result<RateReport, HarnessError> {
    let params = derive_params(q, m0, m1, ell)?;
    let field = q.build()?;
    let q_order = field.order();
    let alpha = params.alpha;
    let n1 = params.n();
    let log2_q = (q.d as f64) * (q.p as f64).log2();
    let log2_q_prime = alpha as f64 * log2_q;
    let q_prime = BigUint::from(q_order).pow(alpha as u32);

    let secret_symbols = (4 * m0 + 2 * m0 * (m0 - m1)) as u128;
    let k = if q.p == 2 {
        secret_symbols * alpha as u128 * q.d as u128
    } else {
        (secret_symbols as f64 * log2_q_prime).ceil() as u128
    };

    // beta = floor(2 log_q log2 ell) = largest b with q^b <= (log2 ell)^2.
    let beta = if ell.is_power_of_two() {
        let t = BigUint::from(ell.trailing_zeros());
        floor_log_big(&BigUint::from(q_order), &(&t * &t))
    } else {
        let l = (ell as f64).log2();
        if l <= 1.0 {
            0
        } else {
            (2.0 * l.ln() / (q_order as f64).ln()).floor() as u64
        }
    };
    if beta == 0 {
        return Err(HarnessError::Precondition(format!("scale {ell} too small: beta = 0")));
    }
    let n2 = k * beta as u128 * m0 as u128 * (m0 - m1 + 1) as u128;
    let total_n = n1 + n2;
    let useful = params.message_rows() as u128 * (n1 - 2 * m0 as u128 * alpha as u128);
    let rs_symbols = 4 * m0 + 2 * (m0 - m1) * m0;
    Ok(RateReport {
        q,
        m0,
        m1,
        ell,
        alpha,
        n_prime: params.n_prime,
        n1,
        log2_q_prime,
        q_prime: q_prime.to_string(),
        k,
        beta,
        n2,
        total_n,
        rate: useful as f64 / total_n as f64,
        asymptotic_rate: params.message_rows(),
        rs_symbols,
        rs_ratio: (rs_symbols as f64 * alpha as f64) / total_n as f64,
        log2_agreement_error: (k as f64 * m0 as f64).log2() - (beta as f64 * m0 as f64) * log2_q,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const GF2: FieldDesc = FieldDesc { p: 2, d: 1 };

    #[test]
    fn fidelity_examples() {
        assert_eq!(fidelity_bound(0.0, 0.0).unwrap(), 1.0);
        assert_eq!(fidelity_bound(0.3, 0.8).unwrap(), 0.0);
        assert!((fidelity_bound(0.01, 0.02).unwrap() - 0.97).abs() < 1e-15);
        assert!(fidelity_bound(-0.1, 0.0).is_err());
    }

    #[test]
    fn leakage_examples() {
        assert_eq!(leakage_bound(1.0, 2).unwrap(), 0.0);
        assert!((leakage_bound(0.5, 2).unwrap() - 1.0).abs() < 1e-12);
        // h(0.99) + 0.01 * log2(1023^2)
        let h = -0.99 * 0.99f64.log2() - 0.01 * 0.01f64.log2();
        let expect = h + 0.01 * 2.0 * 1023f64.log2();
        let got = leakage_bound(0.99, 1 << 10).unwrap();
        assert!((got - expect).abs() < 1e-12);
        assert!((got - 0.2808).abs() < 5e-4);
        assert!((leakage_bound_log2(0.99, 10.0).unwrap() - got).abs() < 1e-12);
        assert!(leakage_bound(0.9, 1).is_err());
        assert!(leakage_bound_log2(0.9, 0.0).is_err());
    }

    #[test]
    fn entropy_is_symmetric_and_peaks_at_half() {
        assert_eq!(binary_entropy(0.0), 0.0);
        assert_eq!(binary_entropy(1.0), 0.0);
        assert!((binary_entropy(0.5) - 1.0).abs() < 1e-15);
        for x in [0.01, 0.2, 0.37] {
            assert!((binary_entropy(x) - binary_entropy(1.0 - x)).abs() < 1e-12);
            assert!(binary_entropy(x) < 1.0);
        }
    }

    #[test]
    fn wilson_examples() {
        let (lo, hi) = wilson_interval(0, 2000, 1.96);
        assert_eq!(lo, 0.0);
        // z^2 / (n + z^2)
        assert!((hi - 1.96f64.powi(2) / (2000.0 + 1.96f64.powi(2))).abs() < 1e-12);
        let (lo, hi) = wilson_interval(50, 100, 1.96);
        assert!(lo < 0.5 && hi > 0.5 && ((0.5 - lo) - (hi - 0.5)).abs() < 1e-12);
    }

    #[test]
    fn rate_example_at_two_to_twenty() {
        let r = rate_accounting(GF2, 3, 1, 1 << 20).unwrap();
        assert_eq!((r.alpha, r.n_prime, r.n1), (100, 10485, 1_048_500));
        assert_eq!((r.k, r.beta, r.n2, r.total_n), (2400, 8, 172_800, 1_221_300));
        assert!((r.rate - 1_047_900.0 / 1_221_300.0).abs() < 1e-15);
        assert_eq!(r.rs_symbols, 24);
        assert_eq!(r.q_prime, BigUint::from(2u8).pow(100).to_string());
        assert!((r.log2_agreement_error - ((7200f64).log2() - 24.0)).abs() < 1e-12);
    }

    #[test]
    fn rate_sweep_is_increasing() {
        let rates: Vec<f64> = [14, 16, 18, 20]
            .iter()
            .map(|&t| rate_accounting(GF2, 3, 1, 1 << t).unwrap().rate)
            .collect();
        assert!(rates.windows(2).all(|w| w[0] < w[1]), "{rates:?}");
        assert!((rates[0] - 15_960.0 / 122_220.0).abs() < 1e-12);
    }

    #[test]
    fn no_adversary_rate_tends_to_m0() {
        let r = rate_accounting(GF2, 3, 0, 1 << 40).unwrap();
        assert!(r.n2 > 0);
        assert!(r.rate > 2.9 && r.rate < 3.0, "{}", r.rate);
        assert!(rate_accounting(GF2, 3, 1, 16).is_err());
    }
}
