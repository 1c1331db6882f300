//! Encoder and decoder, run as the two classical reductions.
//!
//! A block of `n'` uses over GF(q') is an `m0 x n'` matrix whose columns
//! split into three bands: A (`0..m0`), B (`m0..2m0`) and C (`2m0..n'`).
//! The bit pipeline carries `X' = R_e X R_1`; the phase pipeline carries
//! `[R_e]_p Z [R_1]_p`. Both decoders undo `R_1`, solve for a row operation
//! from the check band and read the message off the middle rows of C.

use num_bigint::BigUint;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gf::{FieldError, FieldSpec};
use crate::linalg::{
    complete_to_invertible, sample_full_rank, sample_invertible, sample_uniform, solve_row,
    LinalgError, Matrix,
};
use crate::network::{FieldDesc, NetworkError, NetworkSpec, Transfer};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CodecError {
    #[error("rate condition violated: need 2*m1 < m0, got m0={m0}, m1={m1}")]
    RateViolation { m0: usize, m1: usize },
    #[error("scale too small: n'={n_prime} but at least {needed} is required")]
    TooSmallScale { n_prime: u128, needed: u128 },
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("GF({p}^{degree}) is too large to simulate")]
    FieldTooLarge { p: u64, degree: u64 },
    #[error("{what}: expected {expected:?}, found {found:?}")]
    Shape {
        what: &'static str,
        expected: (usize, usize),
        found: (usize, usize),
    },
    #[error("shared randomness needs {expected} symbols, found {found}")]
    RandomnessLength { expected: usize, found: usize },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Network(#[from] NetworkError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParamMode {
    /// `alpha` and `n'` follow from the scale index `ell`.
    Derived,
    /// Explicit `alpha` and `n'`.
    Override,
}

/// Block-length parameters of the code.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeParams {
    pub q: FieldDesc,
    pub m0: usize,
    pub m1: usize,
    pub ell: Option<u128>,
    pub alpha: u64,
    pub n_prime: usize,
    pub mode: ParamMode,
}

/// Largest `k` with `base^k <= value`.
fn floor_log(base: &BigUint, value: &BigUint) -> u64 {
    let mut k = 0;
    let mut acc = base.clone();
    while &acc <= value {
        k += 1;
        acc *= base;
    }
    k
}

fn check_rate(m0: usize, m1: usize) -> Result<(), CodecError> {
    if m0 == 0 || 2 * m1 >= m0 {
        return Err(CodecError::RateViolation { m0, m1 });
    }
    Ok(())
}

/// Exponent `alpha = max(floor(5 log_q ell), 1)` and the resulting ratio
/// `n' = floor(ell / alpha)`, in exact integer arithmetic.
pub fn derived_lengths(q_order: u128, ell: u128) -> (u64, u128) {
    let ell5 = BigUint::from(ell).pow(5);
    let alpha = floor_log(&BigUint::from(q_order), &ell5).max(1);
    (alpha, ell / alpha as u128)
}

/// Parameters from the scale index `ell`.
pub fn derive_params(q: FieldDesc, m0: usize, m1: usize, ell: u128) -> Result<CodeParams, CodecError> {
    check_rate(m0, m1)?;
    let q_order = field_order(q)?;
    let (alpha, n_prime) = derived_lengths(q_order, ell);
    let needed = 3 * m0 as u128;
    if n_prime < needed {
        return Err(CodecError::TooSmallScale { n_prime, needed });
    }
    Ok(CodeParams {
        q,
        m0,
        m1,
        ell: Some(ell),
        alpha,
        n_prime: usize::try_from(n_prime).map_err(|_| CodecError::InvalidParams("n' too large".into()))?,
        mode: ParamMode::Derived,
    })
}

fn field_order(q: FieldDesc) -> Result<u128, CodecError> {
    Ok(q.build()?.order())
}

impl CodeParams {
    /// Explicit `(alpha, n')` for desk-scale runs.
    pub fn with_override(q: FieldDesc, m0: usize, m1: usize, alpha: u64, n_prime: usize) -> Result<Self, CodecError> {
        check_rate(m0, m1)?;
        q.build()?;
        if alpha == 0 {
            return Err(CodecError::InvalidParams("alpha must be at least 1".into()));
        }
        if n_prime < 3 * m0 {
            return Err(CodecError::TooSmallScale {
                n_prime: n_prime as u128,
                needed: 3 * m0 as u128,
            });
        }
        Ok(Self {
            q,
            m0,
            m1,
            ell: None,
            alpha,
            n_prime,
            mode: ParamMode::Override,
        })
    }

    /// Total block length `n = alpha * n'` in uses of the base field.
    pub fn n(&self) -> u128 {
        self.alpha as u128 * self.n_prime as u128
    }

    /// Width of the C band, `n' - 2 m0`.
    pub fn c_width(&self) -> usize {
        self.n_prime - 2 * self.m0
    }

    /// Number of message rows, `m0 - 2 m1`.
    pub fn message_rows(&self) -> usize {
        self.m0 - 2 * self.m1
    }

    /// Number of shared symbols in `S`.
    pub fn s_len(&self) -> usize {
        4 * self.m0
    }

    /// `log2 q' = alpha * log2 q`.
    pub fn log2_q_prime(&self) -> f64 {
        self.alpha as f64 * (self.q.d as f64) * (self.q.p as f64).log2()
    }

    /// `q'` when it fits in a `u128`.
    pub fn q_prime(&self) -> Option<u128> {
        let q = self.q.build().ok()?.order();
        let mut acc = 1u128;
        for _ in 0..self.alpha {
            acc = acc.checked_mul(q)?;
        }
        Some(acc)
    }

    /// The extension field GF(q') used by the simulation.
    pub fn extension_field(&self) -> Result<FieldSpec, CodecError> {
        let degree = self.q.d as u64 * self.alpha;
        let too_large = CodecError::FieldTooLarge { p: self.q.p, degree };
        let degree = u32::try_from(degree).map_err(|_| too_large.clone())?;
        FieldSpec::new(self.q.p, degree).map_err(|e| match e {
            FieldError::OrderOverflow { .. } => too_large,
            other => other.into(),
        })
    }

    /// `log2` of `n (n')^m0 / (q')^(m0 - m1)`, the ratio that must vanish.
    pub fn log2_vanishing_ratio(&self) -> f64 {
        (self.n() as f64).log2() + self.m0 as f64 * (self.n_prime as f64).log2()
            - (self.m0 - self.m1) as f64 * self.log2_q_prime()
    }

    /// `max{1/q', (n')^m0 / (q')^(m0 - m1)}`.
    pub fn error_envelope(&self) -> f64 {
        let lq = self.log2_q_prime();
        let a = -lq;
        let b = self.m0 as f64 * (self.n_prime as f64).log2() - (self.m0 - self.m1) as f64 * lq;
        a.max(b).exp2()
    }

    /// Dimension of the code space, as `log2`: `(m0 - 2 m1)(n' - 2 m0) log2 q'`.
    pub fn log2_code_dimension(&self) -> f64 {
        (self.message_rows() * self.c_width()) as f64 * self.log2_q_prime()
    }
}

/// Secret randomness shared by encoder and decoder.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SharedRandomness {
    pub s: Vec<u64>,
    pub r2b: Matrix,
    pub r2p: Matrix,
}

impl SharedRandomness {
    pub fn sample<R: Rng + ?Sized>(params: &CodeParams, field: &FieldSpec, rng: &mut R) -> Self {
        let rows = params.m0 - params.m1;
        let s = (0..params.s_len()).map(|_| field.random(rng)).collect();
        let r2b = sample_full_rank(field, rows, params.m0, rng);
        let r2p = sample_full_rank(field, rows, params.m0, rng);
        Self { s, r2b, r2p }
    }
}

/// The encoder's private mixing matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncoderRandomness {
    pub re: Matrix,
}

impl EncoderRandomness {
    pub fn sample<R: Rng + ?Sized>(params: &CodeParams, field: &FieldSpec, rng: &mut R) -> Self {
        Self {
            re: sample_invertible(field, params.m0, rng),
        }
    }
}

/// Bit-basis input: message `M` plus the free blocks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitPlaintext {
    pub m: Matrix,
    /// `(m0 - m1) x m0`
    pub e1: Matrix,
    /// `m1 x m0`
    pub e2: Matrix,
    /// `m1 x (n' - 2 m0)`
    pub e3: Matrix,
}

/// Phase-basis input: message `M` plus the free blocks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhasePlaintext {
    pub m: Matrix,
    /// `m1 x m0`
    pub e1: Matrix,
    /// `(m0 - m1) x m0`
    pub e2: Matrix,
    /// `m1 x (n' - 2 m0)`
    pub e3: Matrix,
}

impl BitPlaintext {
    pub fn random<R: Rng + ?Sized>(params: &CodeParams, field: &FieldSpec, rng: &mut R) -> Self {
        let (m0, m1, c) = (params.m0, params.m1, params.c_width());
        Self {
            m: sample_uniform(field, params.message_rows(), c, rng),
            e1: sample_uniform(field, m0 - m1, m0, rng),
            e2: sample_uniform(field, m1, m0, rng),
            e3: sample_uniform(field, m1, c, rng),
        }
    }

    /// Message `m` with every free block zero.
    pub fn message_only(params: &CodeParams, m: Matrix) -> Self {
        let f = m.field().clone();
        let (m0, m1, c) = (params.m0, params.m1, params.c_width());
        Self {
            m,
            e1: Matrix::zeros(&f, m0 - m1, m0),
            e2: Matrix::zeros(&f, m1, m0),
            e3: Matrix::zeros(&f, m1, c),
        }
    }
}

impl PhasePlaintext {
    pub fn random<R: Rng + ?Sized>(params: &CodeParams, field: &FieldSpec, rng: &mut R) -> Self {
        let (m0, m1, c) = (params.m0, params.m1, params.c_width());
        Self {
            m: sample_uniform(field, params.message_rows(), c, rng),
            e1: sample_uniform(field, m1, m0, rng),
            e2: sample_uniform(field, m0 - m1, m0, rng),
            e3: sample_uniform(field, m1, c, rng),
        }
    }

    pub fn message_only(params: &CodeParams, m: Matrix) -> Self {
        let f = m.field().clone();
        let (m0, m1, c) = (params.m0, params.m1, params.c_width());
        Self {
            m,
            e1: Matrix::zeros(&f, m1, m0),
            e2: Matrix::zeros(&f, m0 - m1, m0),
            e3: Matrix::zeros(&f, m1, c),
        }
    }
}

fn expect_shape(what: &'static str, m: &Matrix, expected: (usize, usize)) -> Result<(), CodecError> {
    if m.shape() != expected {
        return Err(CodecError::Shape {
            what,
            expected,
            found: m.shape(),
        });
    }
    Ok(())
}

/// `rows x m0` block with entries `s[offset + j]^(i + 1)`.
fn vandermonde(field: &FieldSpec, s: &[u64], offset: usize, rows: usize, m0: usize) -> Matrix {
    let mut q = Matrix::zeros(field, rows, m0);
    for j in 0..m0 {
        let base = s[offset + j];
        let mut acc = base;
        for i in 0..rows {
            q.set(i, j, acc);
            acc = field.mul(acc, base);
        }
    }
    q
}

/// The four blocks `Q1, Q2` (`(n' - 2 m0) x m0`) and `Q3, Q4` (`m0 x m0`).
pub fn q_blocks(field: &FieldSpec, s: &[u64], params: &CodeParams) -> Result<[Matrix; 4], CodecError> {
    if s.len() != params.s_len() {
        return Err(CodecError::RandomnessLength {
            expected: params.s_len(),
            found: s.len(),
        });
    }
    if params.n_prime < 3 * params.m0 {
        return Err(CodecError::TooSmallScale {
            n_prime: params.n_prime as u128,
            needed: 3 * params.m0 as u128,
        });
    }
    let (m0, c) = (params.m0, params.c_width());
    Ok([
        vandermonde(field, s, 0, c, m0),
        vandermonde(field, s, m0, c, m0),
        vandermonde(field, s, 2 * m0, m0, m0),
        vandermonde(field, s, 3 * m0, m0, m0),
    ])
}

/// The three unipotent factors `L3, L2, L1` of `R_1 = L3 L2 L1`, with the
/// off-diagonal blocks negated when `negate` is set.
fn r1_factors(field: &FieldSpec, s: &[u64], params: &CodeParams, negate: bool) -> Result<[Matrix; 3], CodecError> {
    let [q1, q2, q3, q4] = q_blocks(field, s, params)?;
    let m0 = params.m0;
    let n = params.n_prime;
    let sign = |m: Matrix| if negate { m.neg() } else { m };
    let mut l3 = Matrix::identity(field, n);
    l3.set_block(m0, 0, &sign(q3.transpose().add(&q4)?));
    let mut l2 = Matrix::identity(field, n);
    l2.set_block(m0, 2 * m0, &sign(q2.transpose()));
    let mut l1 = Matrix::identity(field, n);
    l1.set_block(2 * m0, 0, &sign(q1));
    Ok([l3, l2, l1])
}

/// Horizontal mixing matrix `R_1 = L3 L2 L1` (`n' x n'`).
pub fn build_r1(field: &FieldSpec, s: &[u64], params: &CodeParams) -> Result<Matrix, CodecError> {
    let [l3, l2, l1] = r1_factors(field, s, params, false)?;
    Ok(l3.mul(&l2)?.mul(&l1)?)
}

/// Closed-form inverse `L1^-1 L2^-1 L3^-1`, each factor with its
/// off-diagonal block negated.
pub fn build_r1_inv(field: &FieldSpec, s: &[u64], params: &CodeParams) -> Result<Matrix, CodecError> {
    let [l3, l2, l1] = r1_factors(field, s, params, true)?;
    Ok(l1.mul(&l2)?.mul(&l3)?)
}

/// Check-embedded bit block `X`.
pub fn bit_layout(plain: &BitPlaintext, r2b: &Matrix, params: &CodeParams) -> Result<Matrix, CodecError> {
    let (m0, m1, c) = (params.m0, params.m1, params.c_width());
    expect_shape("M", &plain.m, (params.message_rows(), c))?;
    expect_shape("E1", &plain.e1, (m0 - m1, m0))?;
    expect_shape("E2", &plain.e2, (m1, m0))?;
    expect_shape("E3", &plain.e3, (m1, c))?;
    expect_shape("R2b", r2b, (m0 - m1, m0))?;
    let mut x = Matrix::zeros(plain.m.field(), m0, params.n_prime);
    x.set_block(m1, 0, r2b);
    x.set_block(0, m0, &plain.e1);
    x.set_block(m0 - m1, m0, &plain.e2);
    x.set_block(m1, 2 * m0, &plain.m);
    x.set_block(m0 - m1, 2 * m0, &plain.e3);
    Ok(x)
}

/// Check-embedded phase block `Z`.
pub fn phase_layout(plain: &PhasePlaintext, r2p: &Matrix, params: &CodeParams) -> Result<Matrix, CodecError> {
    let (m0, m1, c) = (params.m0, params.m1, params.c_width());
    expect_shape("M", &plain.m, (params.message_rows(), c))?;
    expect_shape("E1'", &plain.e1, (m1, m0))?;
    expect_shape("E2'", &plain.e2, (m0 - m1, m0))?;
    expect_shape("E3'", &plain.e3, (m1, c))?;
    expect_shape("R2p", r2p, (m0 - m1, m0))?;
    let mut z = Matrix::zeros(plain.m.field(), m0, params.n_prime);
    z.set_block(0, 0, &plain.e1);
    z.set_block(m1, 0, &plain.e2);
    z.set_block(0, m0, r2p);
    z.set_block(0, 2 * m0, &plain.e3);
    z.set_block(m1, 2 * m0, &plain.m);
    Ok(z)
}

/// `X' = R_e X R_1`.
pub fn encode_bit(
    plain: &BitPlaintext,
    r2b: &Matrix,
    re: &Matrix,
    s: &[u64],
    params: &CodeParams,
) -> Result<Matrix, CodecError> {
    let x = bit_layout(plain, r2b, params)?;
    expect_shape("R_e", re, (params.m0, params.m0))?;
    let r1 = build_r1(x.field(), s, params)?;
    Ok(re.mul(&x)?.mul(&r1)?)
}

/// `[R_e]_p Z [R_1]_p`.
pub fn encode_phase(
    plain: &PhasePlaintext,
    r2p: &Matrix,
    re: &Matrix,
    s: &[u64],
    params: &CodeParams,
) -> Result<Matrix, CodecError> {
    let z = phase_layout(plain, r2p, params)?;
    expect_shape("R_e", re, (params.m0, params.m0))?;
    // [R_1]_p = (R_1^-1)^T
    let r1p = build_r1_inv(z.field(), s, params)?.transpose();
    Ok(re.phase_transform()?.mul(&z)?.mul(&r1p)?)
}

/// A network's action on one basis, over the simulation field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChannelModel {
    pub k: Matrix,
    pub w: Matrix,
    pub tap: Matrix,
}

impl ChannelModel {
    fn from_transfer(t: Transfer) -> Self {
        Self {
            k: t.k,
            w: t.w,
            tap: t.tap,
        }
    }

    /// Bit-basis model of `net` embedded into `field`.
    pub fn bit(net: &NetworkSpec, field: &FieldSpec) -> Result<Self, CodecError> {
        Ok(Self::from_transfer(net.extend_field(field)?.bit_side()?))
    }

    /// Phase-basis model of `net` embedded into `field`.
    pub fn phase(net: &NetworkSpec, field: &FieldSpec) -> Result<Self, CodecError> {
        Ok(Self::from_transfer(net.extend_field(field)?.phase_side()?))
    }

    pub fn m_a(&self) -> usize {
        self.w.cols()
    }

    /// Uninjected symbols on the attacked edges, one row per edge.
    pub fn observe(&self, codeword: &Matrix) -> Result<Matrix, CodecError> {
        Ok(self.tap.mul(codeword)?)
    }

    /// `Y = K codeword + W injection`; `None` means no attack.
    pub fn transmit(&self, codeword: &Matrix, injection: Option<&Matrix>) -> Result<Matrix, CodecError> {
        let y = self.k.mul(codeword)?;
        match injection {
            None => Ok(y),
            Some(z) => {
                expect_shape("injection", z, (self.m_a(), codeword.cols()))?;
                Ok(y.add(&self.w.mul(z)?)?)
            }
        }
    }
}

/// Bit-basis channel output `Y = K X' + W Z`.
pub fn channel_bit(x: &Matrix, chan: &ChannelModel, injection: Option<&Matrix>) -> Result<Matrix, CodecError> {
    chan.transmit(x, injection)
}

/// Phase-basis channel output `Y = [K]_p C + W' Z'`.
pub fn channel_phase(cw: &Matrix, chan: &ChannelModel, injection: Option<&Matrix>) -> Result<Matrix, CodecError> {
    chan.transmit(cw, injection)
}

/// Invertible `D_b` whose last `m0 - m1` rows map `O_b` onto `R_2b`, or
/// `None` when no such matrix exists.
pub fn solve_db(o_b: &Matrix, r2b: &Matrix, m1: usize) -> Result<Option<Matrix>, CodecError> {
    let m0 = o_b.rows();
    expect_shape("O_b", o_b, (m0, m0))?;
    expect_shape("R2b", r2b, (m0 - m1, m0))?;
    solve_rows(o_b, r2b, m1)
}

/// Invertible `D_p` with `P_p [D_p]_p O_p = [R_2p; 0]`, or `None`.
///
/// The first `m0 - m1` rows of `E = [D_p]_p` are solved for directly and
/// `D_p = [E]_p`.
pub fn solve_dp(o_p: &Matrix, r2p: &Matrix, m1: usize) -> Result<Option<Matrix>, CodecError> {
    let m0 = o_p.rows();
    expect_shape("O_p", o_p, (m0, m0))?;
    expect_shape("R2p", r2p, (m0 - m1, m0))?;
    match solve_rows(o_p, r2p, 0)? {
        Some(e) => Ok(Some(e.phase_transform()?)),
        None => Ok(None),
    }
}

fn solve_rows(o: &Matrix, target: &Matrix, at: usize) -> Result<Option<Matrix>, CodecError> {
    let mut rows = Vec::with_capacity(target.rows());
    for i in 0..target.rows() {
        match solve_row(o, target.row(i))? {
            Some(d) => rows.push(d),
            None => return Ok(None),
        }
    }
    match complete_to_invertible(o.field(), &rows, o.rows(), at) {
        Ok(d) => Ok(Some(d)),
        Err(LinalgError::DependentRows) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

/// Result of a decoding attempt that found its row operation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decoded {
    /// `D_b` on the bit side, `[D_p]_p` on the phase side.
    pub row_op: Matrix,
    /// Row-operated block `Y_2`.
    pub y2: Matrix,
    /// Estimate of `M`: rows `m1..m0-m1` of the C band of `Y_2`.
    pub message: Matrix,
}

fn message_rows(y2: &Matrix, params: &CodeParams) -> Matrix {
    y2.block(params.m1, params.m0 - params.m1, 2 * params.m0, params.n_prime)
}

/// Bit decoder. `Ok(None)` is the transmission failure where no valid
/// `D_b` exists.
pub fn decode_bit(y: &Matrix, s: &[u64], r2b: &Matrix, params: &CodeParams) -> Result<Option<Decoded>, CodecError> {
    expect_shape("Y", y, (params.m0, params.n_prime))?;
    let y1 = y.mul(&build_r1_inv(y.field(), s, params)?)?;
    let o_b = y1.columns(0, params.m0);
    let Some(d) = solve_db(&o_b, r2b, params.m1)? else {
        return Ok(None);
    };
    let y2 = d.mul(&y1)?;
    Ok(Some(Decoded {
        message: message_rows(&y2, params),
        row_op: d,
        y2,
    }))
}

/// Phase decoder, mirroring [`decode_bit`] on the B band.
pub fn decode_phase(y: &Matrix, s: &[u64], r2p: &Matrix, params: &CodeParams) -> Result<Option<Decoded>, CodecError> {
    expect_shape("Y", y, (params.m0, params.n_prime))?;
    // [(R_1)^-1]_p = R_1^T
    let y1 = y.mul(&build_r1(y.field(), s, params)?.transpose())?;
    let o_p = y1.columns(params.m0, 2 * params.m0);
    let Some(dp) = solve_dp(&o_p, r2p, params.m1)? else {
        return Ok(None);
    };
    let e = dp.phase_transform()?;
    let y2 = e.mul(&y1)?;
    Ok(Some(Decoded {
        message: message_rows(&y2, params),
        row_op: e,
        y2,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::random_network;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn desk(alpha: u64, n_prime: usize) -> (CodeParams, FieldSpec) {
        let p = CodeParams::with_override(FieldDesc { p: 2, d: 1 }, 3, 1, alpha, n_prime).unwrap();
        let f = p.extension_field().unwrap();
        (p, f)
    }

    #[test]
    fn derive_params_examples() {
        let p = derive_params(FieldDesc { p: 2, d: 1 }, 3, 1, 1024).unwrap();
        assert_eq!((p.alpha, p.n_prime, p.n()), (50, 20, 1000));
        assert_eq!(p.q_prime(), Some(1u128 << 50));
        assert!(p.log2_vanishing_ratio().is_finite());
        // 1000 * 20^3 / 2^100
        let expect = 1000f64.log2() + 3.0 * 20f64.log2() - 100.0;
        assert!((p.log2_vanishing_ratio() - expect).abs() < 1e-9);

        assert_eq!(
            derive_params(FieldDesc { p: 2, d: 1 }, 3, 1, 2).unwrap_err(),
            CodecError::TooSmallScale { n_prime: 0, needed: 9 }
        );
        assert_eq!(
            derive_params(FieldDesc { p: 2, d: 1 }, 2, 1, 1 << 20).unwrap_err(),
            CodecError::RateViolation { m0: 2, m1: 1 }
        );
        assert!(CodeParams::with_override(FieldDesc { p: 2, d: 1 }, 3, 1, 16, 8).is_err());
    }

    #[test]
    fn alpha_matches_float_formula_away_from_boundaries() {
        for (q, ell) in [(2u128, 1000u128), (3, 5000), (7, 123_456), (2, 1 << 20), (4, 999)] {
            let (alpha, n_prime) = derived_lengths(q, ell);
            let float = (5.0 * (ell as f64).ln() / (q as f64).ln()).floor().max(1.0) as u64;
            assert_eq!(alpha, float, "q={q} ell={ell}");
            assert_eq!(n_prime, ell / alpha as u128);
        }
        // Exact power: 5 log_2 2^20 = 100 exactly.
        assert_eq!(derived_lengths(2, 1 << 20).0, 100);
    }

    #[test]
    fn r1_examples() {
        let (p, f) = desk(8, 12);
        let zero = vec![0u64; 12];
        assert!(build_r1(&f, &zero, &p).unwrap().is_identity());
        assert!(build_r1_inv(&f, &zero, &p).unwrap().is_identity());

        let f7 = FieldSpec::new(7, 1).unwrap();
        let p7 = CodeParams::with_override(FieldDesc { p: 7, d: 1 }, 1, 0, 1, 3).unwrap();
        let [q1, ..] = q_blocks(&f7, &[2, 0, 0, 0], &p7).unwrap();
        assert_eq!(q1.column(0), vec![2]);
        let p7 = CodeParams::with_override(FieldDesc { p: 7, d: 1 }, 2, 0, 1, 7).unwrap();
        let [q1, ..] = q_blocks(&f7, &[2, 0, 0, 0, 0, 0, 0, 0], &p7).unwrap();
        assert_eq!(q1.column(0), vec![2, 4, 1]);

        let (p, f) = desk(16, 12);
        for seed in 0..100 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let s: Vec<u64> = (0..12).map(|_| f.random(&mut rng)).collect();
            let r1 = build_r1(&f, &s, &p).unwrap();
            let inv = build_r1_inv(&f, &s, &p).unwrap();
            assert!(r1.mul(&inv).unwrap().is_identity());
            assert_eq!(inv, r1.invert().unwrap());
        }
        assert!(matches!(
            build_r1(&f, &[1, 2, 3], &p),
            Err(CodecError::RandomnessLength { expected: 12, found: 3 })
        ));
    }

    #[test]
    fn encode_examples() {
        let (p, f) = desk(8, 12);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let shared = SharedRandomness::sample(&p, &f, &mut rng);
        let id = Matrix::identity(&f, 3);
        let zero_s = vec![0u64; 12];
        let zero_m = Matrix::zeros(&f, 1, 6);
        let x = encode_bit(&BitPlaintext::message_only(&p, zero_m.clone()), &shared.r2b, &id, &zero_s, &p).unwrap();
        let mut expect = Matrix::zeros(&f, 3, 12);
        expect.set_block(1, 0, &shared.r2b);
        assert_eq!(x, expect);

        let plain = PhasePlaintext::random(&p, &f, &mut rng);
        let z = encode_phase(&plain, &shared.r2p, &id, &zero_s, &p).unwrap();
        assert_eq!(z, phase_layout(&plain, &shared.r2p, &p).unwrap());

        // Complementary zero bands of the C block.
        let m = sample_uniform(&f, 1, 6, &mut rng);
        let xb = bit_layout(&BitPlaintext::message_only(&p, m.clone()), &shared.r2b, &p).unwrap();
        let zp = phase_layout(&PhasePlaintext::message_only(&p, m), &shared.r2p, &p).unwrap();
        assert!(xb.block(0, 1, 6, 12).is_zero());
        assert!(zp.block(2, 3, 6, 12).is_zero());
        assert_eq!(xb.block(1, 2, 6, 12), zp.block(1, 2, 6, 12));
    }

    #[test]
    fn encode_is_deterministic_and_linear() {
        let (p, f) = desk(8, 12);
        let run = || {
            let mut rng = ChaCha8Rng::seed_from_u64(77);
            let shared = SharedRandomness::sample(&p, &f, &mut rng);
            let enc = EncoderRandomness::sample(&p, &f, &mut rng);
            let plain = BitPlaintext::random(&p, &f, &mut rng);
            encode_bit(&plain, &shared.r2b, &enc.re, &shared.s, &p).unwrap()
        };
        assert_eq!(run(), run());

        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let shared = SharedRandomness::sample(&p, &f, &mut rng);
        let enc = EncoderRandomness::sample(&p, &f, &mut rng);
        let zero_r2 = Matrix::zeros(&f, 2, 3);
        let m1 = sample_uniform(&f, 1, 6, &mut rng);
        let m2 = sample_uniform(&f, 1, 6, &mut rng);
        let e = |m: &Matrix| encode_bit(&BitPlaintext::message_only(&p, m.clone()), &zero_r2, &enc.re, &shared.s, &p).unwrap();
        assert_eq!(e(&m1.add(&m2).unwrap()), e(&m1).add(&e(&m2)).unwrap());
        let ep = |m: &Matrix| encode_phase(&PhasePlaintext::message_only(&p, m.clone()), &zero_r2, &enc.re, &shared.s, &p).unwrap();
        assert_eq!(ep(&m1.add(&m2).unwrap()), ep(&m1).add(&ep(&m2)).unwrap());
    }

    #[test]
    fn solve_db_examples() {
        let (_, f) = desk(8, 12);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let r2b = sample_full_rank(&f, 2, 3, &mut rng);
        let target = Matrix::vstack(&[&Matrix::zeros(&f, 1, 3), &r2b]).unwrap();
        let d = solve_db(&target, &r2b, 1).unwrap().unwrap();
        assert_eq!(d.mul(&target).unwrap().row_range(1, 3), r2b);
        assert_eq!(solve_db(&Matrix::zeros(&f, 3, 3), &r2b, 1).unwrap(), None);

        for seed in 0..50 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let g = sample_invertible(&f, 3, &mut rng);
            let o = g.mul(&target).unwrap();
            let d = solve_db(&o, &r2b, 1).unwrap().unwrap();
            assert!(d.is_invertible());
            assert_eq!(d.mul(&o).unwrap().row_range(1, 3), r2b);
        }
    }

    #[test]
    fn solve_dp_examples() {
        let (_, f) = desk(8, 12);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let r2p = sample_full_rank(&f, 2, 3, &mut rng);
        let target = Matrix::vstack(&[&r2p, &Matrix::zeros(&f, 1, 3)]).unwrap();
        let dp = solve_dp(&target, &r2p, 1).unwrap().unwrap();
        let e = dp.phase_transform().unwrap();
        assert_eq!(e.mul(&target).unwrap().row_range(0, 2), r2p);
        assert_eq!(solve_dp(&Matrix::zeros(&f, 3, 3), &r2p, 1).unwrap(), None);
        for seed in 0..50 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed + 100);
            let g = sample_invertible(&f, 3, &mut rng);
            let o = g.mul(&target).unwrap();
            let dp = solve_dp(&o, &r2p, 1).unwrap().unwrap();
            assert_eq!(dp.phase_transform().unwrap().phase_transform().unwrap(), dp);
            let e = dp.phase_transform().unwrap();
            assert_eq!(e.mul(&o).unwrap().row_range(0, 2), r2p);
        }
    }

    #[test]
    fn identity_pipeline_is_identity_on_message() {
        let (p, f) = desk(8, 12);
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let shared = SharedRandomness::sample(&p, &f, &mut rng);
        let id = Matrix::identity(&f, 3);
        let zero_s = vec![0u64; 12];
        let plain = BitPlaintext::random(&p, &f, &mut rng);
        let x = encode_bit(&plain, &shared.r2b, &id, &zero_s, &p).unwrap();
        let out = decode_bit(&x, &zero_s, &shared.r2b, &p).unwrap().unwrap();
        assert_eq!(out.message, plain.m);
        let pp = PhasePlaintext::random(&p, &f, &mut rng);
        let z = encode_phase(&pp, &shared.r2p, &id, &zero_s, &p).unwrap();
        assert_eq!(decode_phase(&z, &zero_s, &shared.r2p, &p).unwrap().unwrap().message, pp.m);
    }

    #[test]
    fn block_bookkeeping_without_channel() {
        let (p, f) = desk(8, 12);
        for seed in 0..50 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let shared = SharedRandomness::sample(&p, &f, &mut rng);
            let enc = EncoderRandomness::sample(&p, &f, &mut rng);
            let plain = BitPlaintext::random(&p, &f, &mut rng);
            let x = encode_bit(&plain, &shared.r2b, &enc.re, &shared.s, &p).unwrap();
            let out = decode_bit(&x, &shared.s, &shared.r2b, &p).unwrap().unwrap();
            assert_eq!(out.y2.block(1, 3, 0, 3), shared.r2b);
            assert_eq!(out.y2.block(1, 2, 6, 12), plain.m);
            assert_eq!(out.y2.block(2, 3, 6, 12), plain.e3);

            let pp = PhasePlaintext::random(&p, &f, &mut rng);
            let z = encode_phase(&pp, &shared.r2p, &enc.re, &shared.s, &p).unwrap();
            let out = decode_phase(&z, &shared.s, &shared.r2p, &p).unwrap().unwrap();
            assert_eq!(out.y2.block(0, 2, 3, 6), shared.r2p);
            assert_eq!(out.y2.block(0, 1, 6, 12), pp.e3);
            assert_eq!(out.y2.block(1, 2, 6, 12), pp.m);
        }
    }

    #[test]
    fn no_attack_decoding_is_exact() {
        let (p, f) = desk(8, 12);
        for seed in 0..200u64 {
            let net = random_network(seed, 3, (seed % 5) as usize, &FieldSpec::new(2, 1).unwrap());
            let bit = ChannelModel::bit(&net, &f).unwrap();
            let phase = ChannelModel::phase(&net, &f).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let shared = SharedRandomness::sample(&p, &f, &mut rng);
            let enc = EncoderRandomness::sample(&p, &f, &mut rng);
            let plain = BitPlaintext::random(&p, &f, &mut rng);
            let y = channel_bit(&encode_bit(&plain, &shared.r2b, &enc.re, &shared.s, &p).unwrap(), &bit, None).unwrap();
            assert_eq!(decode_bit(&y, &shared.s, &shared.r2b, &p).unwrap().unwrap().message, plain.m);
            let pp = PhasePlaintext::random(&p, &f, &mut rng);
            let y = channel_phase(&encode_phase(&pp, &shared.r2p, &enc.re, &shared.s, &p).unwrap(), &phase, None).unwrap();
            assert_eq!(decode_phase(&y, &shared.s, &shared.r2p, &p).unwrap().unwrap().message, pp.m);
        }
    }

    #[test]
    fn over_budget_attack_causes_failures_at_small_field() {
        // q' = 4; every edge of the parallel network attacked with full-rank noise.
        let params = CodeParams::with_override(FieldDesc { p: 2, d: 1 }, 3, 1, 2, 9).unwrap();
        let f = params.extension_field().unwrap();
        let net = NetworkSpec::parallel(&FieldSpec::new(2, 1).unwrap(), 3).with_attacked(vec![0, 1, 2]);
        let bit = ChannelModel::bit(&net, &f).unwrap();
        let phase = ChannelModel::phase(&net, &f).unwrap();
        let mut bit_fail = 0;
        let mut phase_fail = 0;
        for seed in 0..200u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let shared = SharedRandomness::sample(&params, &f, &mut rng);
            let enc = EncoderRandomness::sample(&params, &f, &mut rng);
            let z = sample_full_rank(&f, 3, 9, &mut rng);
            let plain = BitPlaintext::random(&params, &f, &mut rng);
            let y = channel_bit(&encode_bit(&plain, &shared.r2b, &enc.re, &shared.s, &params).unwrap(), &bit, Some(&z)).unwrap();
            if decode_bit(&y, &shared.s, &shared.r2b, &params).unwrap().map(|d| d.message) != Some(plain.m) {
                bit_fail += 1;
            }
            let pp = PhasePlaintext::random(&params, &f, &mut rng);
            let y = channel_phase(&encode_phase(&pp, &shared.r2p, &enc.re, &shared.s, &params).unwrap(), &phase, Some(&z)).unwrap();
            if decode_phase(&y, &shared.s, &shared.r2p, &params).unwrap().map(|d| d.message) != Some(pp.m) {
                phase_fail += 1;
            }
        }
        assert!(bit_fail > 0 && phase_fail > 0, "{bit_fail} {phase_fail}");
    }

    #[test]
    fn channel_examples() {
        let (p, f) = desk(8, 12);
        let base = FieldSpec::new(2, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = sample_uniform(&f, 3, p.n_prime, &mut rng);
        let par = ChannelModel::bit(&NetworkSpec::parallel(&base, 3).with_attacked(vec![1]), &f).unwrap();
        assert_eq!(channel_bit(&x, &par, None).unwrap(), x);
        let ones = Matrix::from_vec(&f, 1, 12, vec![1; 12]).unwrap();
        let diff = channel_bit(&x, &par, Some(&ones)).unwrap().sub(&x).unwrap();
        assert!(diff.row_range(0, 1).is_zero() && diff.row_range(2, 3).is_zero());
        assert_eq!(diff.row_range(1, 2), ones);
        let par_p = ChannelModel::phase(&NetworkSpec::parallel(&base, 3).with_attacked(vec![1]), &f).unwrap();
        assert_eq!(channel_phase(&x, &par_p, None).unwrap(), x);
        assert_eq!(channel_phase(&x, &par_p, Some(&ones)).unwrap().sub(&x).unwrap().row_range(1, 2), ones);
    }

    #[test]
    fn fig1_superposition() {
        let params = CodeParams::with_override(FieldDesc { p: 7, d: 1 }, 6, 1, 2, 18).unwrap();
        let f = params.extension_field().unwrap();
        let net = NetworkSpec::fig1();
        let wide = net.extend_field(&f).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = sample_uniform(&f, 6, 18, &mut rng);
        let z = sample_uniform(&f, 1, 18, &mut rng);
        for phase in [false, true] {
            let chan = if phase { ChannelModel::phase(&net, &f) } else { ChannelModel::bit(&net, &f) }.unwrap();
            let maps: Vec<Matrix> = wide
                .nodes
                .iter()
                .map(|n| if phase { n.matrix.phase_transform().unwrap() } else { n.matrix.clone() })
                .collect();
            let (clean, _) = wide.propagate(&maps, &x, None).unwrap();
            let (noise, _) = wide.propagate(&maps, &Matrix::zeros(&f, 6, 18), Some(&z)).unwrap();
            assert_eq!(chan.transmit(&x, Some(&z)).unwrap(), clean.add(&noise).unwrap());
        }
    }
}
