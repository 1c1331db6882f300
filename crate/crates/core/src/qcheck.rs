//! Exact state-vector checks on tiny systems.
//!
//! A register of `m x n` symbols from GF(q) is a vector of length
//! `q^(mn)`. Basis labels are matrices read row-major, with entry `(0, 0)`
//! as the most significant base-q digit.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::gf::FieldSpec;
use crate::linalg::{LinalgError, Matrix};

/// Equality tolerance for amplitudes and operator entries.
pub const TOLERANCE: f64 = 1e-12;
/// Tolerance for the trace-preservation check on Kraus sets.
pub const TP_TOLERANCE: f64 = 1e-10;
/// Largest state dimension.
pub const MAX_STATE_DIM: usize = 1 << 12;
/// Largest dimension for which dense operators are formed.
pub const MAX_OPERATOR_DIM: usize = 1 << 8;

pub type Operator = DMatrix<Complex64>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QcheckError {
    #[error("dimension {dim} exceeds the cap of {cap}")]
    DimensionCap { dim: u128, cap: usize },
    #[error("operator set is not trace preserving (deviation {0:e})")]
    NotTracePreserving(f64),
    #[error("{0}")]
    Shape(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

fn dimension(q: u128, symbols: usize, cap: usize) -> Result<usize, QcheckError> {
    let mut dim = 1u128;
    for _ in 0..symbols {
        dim = dim.saturating_mul(q);
        if dim > cap as u128 {
            return Err(QcheckError::DimensionCap { dim, cap });
        }
    }
    Ok(dim as usize)
}

/// Pure state of an `m x n` register over GF(q).
#[derive(Debug, Clone, PartialEq)]
pub struct DenseState {
    field: FieldSpec,
    m: usize,
    n: usize,
    amps: DVector<Complex64>,
}

impl DenseState {
    pub fn zero(field: &FieldSpec, m: usize, n: usize) -> Result<Self, QcheckError> {
        let dim = dimension(field.order(), m * n, MAX_STATE_DIM)?;
        Ok(Self {
            field: field.clone(),
            m,
            n,
            amps: DVector::zeros(dim),
        })
    }

    pub fn from_amplitudes(field: &FieldSpec, m: usize, n: usize, amps: DVector<Complex64>) -> Result<Self, QcheckError> {
        let dim = dimension(field.order(), m * n, MAX_STATE_DIM)?;
        if amps.len() != dim {
            return Err(QcheckError::Shape(format!("expected {dim} amplitudes, got {}", amps.len())));
        }
        Ok(Self {
            field: field.clone(),
            m,
            n,
            amps,
        })
    }

    /// Normalised random state.
    pub fn random<R: Rng + ?Sized>(field: &FieldSpec, m: usize, n: usize, rng: &mut R) -> Result<Self, QcheckError> {
        let mut s = Self::zero(field, m, n)?;
        for a in s.amps.iter_mut() {
            *a = Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5);
        }
        let norm = s.norm();
        s.amps /= Complex64::new(norm, 0.0);
        Ok(s)
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.m, self.n)
    }

    pub fn amplitudes(&self) -> &DVector<Complex64> {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.norm()
    }

    pub fn inner(&self, other: &DenseState) -> Complex64 {
        self.amps.dotc(&other.amps)
    }

    /// Largest entry-wise distance to `other`.
    pub fn distance(&self, other: &DenseState) -> f64 {
        max_abs_diff(self.amps.as_slice(), other.amps.as_slice())
    }

    fn q(&self) -> u64 {
        self.field.order() as u64
    }

    /// Basis index of a label matrix.
    pub fn index_of(&self, label: &Matrix) -> usize {
        let q = self.q() as usize;
        label.data().iter().fold(0usize, |acc, &v| acc * q + v as usize)
    }

    /// Label matrix of a basis index.
    pub fn label_of(&self, mut index: usize) -> Matrix {
        let q = self.q() as usize;
        let mut data = vec![0u64; self.m * self.n];
        for slot in data.iter_mut().rev() {
            *slot = (index % q) as u64;
            index /= q;
        }
        Matrix::from_vec(&self.field, self.m, self.n, data).expect("label in range")
    }

    /// Amplitude-wise complex conjugate.
    pub fn conjugate(&self) -> DenseState {
        DenseState {
            amps: self.amps.map(|a| a.conj()),
            ..self.clone()
        }
    }

    /// Tensor product, with `self` as the more significant register.
    pub fn tensor(&self, other: &DenseState) -> Result<DenseState, QcheckError> {
        if self.field != other.field || self.n != other.n {
            return Err(QcheckError::Shape("tensor factors must share field and width".into()));
        }
        let dim = dimension(self.field.order(), (self.m + other.m) * self.n, MAX_STATE_DIM)?;
        let mut amps = DVector::zeros(dim);
        for (i, a) in self.amps.iter().enumerate() {
            for (j, b) in other.amps.iter().enumerate() {
                amps[i * other.dim() + j] = a * b;
            }
        }
        Ok(DenseState {
            field: self.field.clone(),
            m: self.m + other.m,
            n: self.n,
            amps,
        })
    }
}

fn max_abs_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// `exp(2 pi i k / p)`.
fn root_of_unity(k: u64, p: u64) -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * PI * (k % p) as f64 / p as f64)
}

/// Bit-basis state `|X>_b`.
pub fn ket_bit(x: &Matrix) -> Result<DenseState, QcheckError> {
    let mut s = DenseState::zero(x.field(), x.rows(), x.cols())?;
    let i = s.index_of(x);
    s.amps[i] = Complex64::new(1.0, 0.0);
    Ok(s)
}

/// Phase-basis state `|Z>_p`, the tensor product over entries of
/// `q^(-1/2) sum_x w^(-tr(x z)) |x>_b` with `w = exp(2 pi i / p)`.
pub fn ket_phase(z: &Matrix) -> Result<DenseState, QcheckError> {
    let f = z.field();
    let p = f.characteristic();
    let mut s = DenseState::zero(f, z.rows(), z.cols())?;
    let scale = 1.0 / (s.dim() as f64).sqrt();
    for idx in 0..s.dim() {
        let x = s.label_of(idx);
        let t = x
            .data()
            .iter()
            .zip(z.data())
            .fold(0u64, |acc, (&a, &b)| (acc + f.trace(f.mul(a, b))) % p);
        // w^(-t)
        s.amps[idx] = root_of_unity(p - t, p) * scale;
    }
    Ok(s)
}

fn permute(state: &DenseState, map: impl Fn(&Matrix) -> Result<Matrix, LinalgError>) -> Result<DenseState, QcheckError> {
    let mut out = DenseState {
        amps: DVector::zeros(state.dim()),
        ..state.clone()
    };
    for idx in 0..state.dim() {
        let a = state.amps[idx];
        if a == Complex64::new(0.0, 0.0) {
            continue;
        }
        let image = map(&state.label_of(idx))?;
        let j = out.index_of(&image);
        out.amps[j] = a;
    }
    Ok(out)
}

/// The unitary `|X>_b -> |AX>_b`.
pub fn apply_left(a: &Matrix, state: &DenseState) -> Result<DenseState, QcheckError> {
    if a.shape() != (state.m, state.m) || !a.is_invertible() {
        return Err(LinalgError::SingularMatrix.into());
    }
    permute(state, |x| a.mul(x))
}

/// The unitary `|X>_b -> |XB>_b`.
pub fn apply_right(b: &Matrix, state: &DenseState) -> Result<DenseState, QcheckError> {
    if b.shape() != (state.n, state.n) || !b.is_invertible() {
        return Err(LinalgError::SingularMatrix.into());
    }
    permute(state, |x| x.mul(b))
}

/// Every invertible `m x m` matrix over a small field.
pub fn general_linear_group(field: &FieldSpec, m: usize) -> Result<Vec<Matrix>, QcheckError> {
    let q = field.order() as usize;
    let count = dimension(field.order(), m * m, 1 << 20)?;
    let mut out = Vec::new();
    for mut idx in 0..count {
        let mut data = vec![0u64; m * m];
        for slot in data.iter_mut().rev() {
            *slot = (idx % q) as u64;
            idx /= q;
        }
        let a = Matrix::from_vec(field, m, m, data)?;
        if a.is_invertible() {
            out.push(a);
        }
    }
    Ok(out)
}

/// All `m x n` label matrices.
pub fn all_labels(field: &FieldSpec, m: usize, n: usize) -> Result<Vec<Matrix>, QcheckError> {
    let s = DenseState::zero(field, m, n)?;
    Ok((0..s.dim()).map(|i| s.label_of(i)).collect())
}

/// Maximally entangled pair on two `m`-symbol registers and its two
/// basis-matching projectors.
pub struct MaxEntangled {
    /// `q^(-m/2) sum_i |i, i>_b`
    pub phi1: DenseState,
    /// `q^(-m/2) sum_z |z>_p |conj z>_p`
    pub phi2: DenseState,
    /// `sum_i |i,i><i,i|` in the bit basis.
    pub p1: Operator,
    /// `sum_z |z, conj z><z, conj z|` in the phase basis.
    pub p2: Operator,
}

pub fn max_entangled(field: &FieldSpec, m: usize) -> Result<MaxEntangled, QcheckError> {
    dimension(field.order(), 2 * m, MAX_OPERATOR_DIM)?;
    let labels = all_labels(field, m, 1)?;
    let scale = Complex64::new(1.0 / (labels.len() as f64).sqrt(), 0.0);
    let mut phi1 = DenseState::zero(field, 2 * m, 1)?;
    let mut phi2 = phi1.clone();
    let dim = phi1.dim();
    let mut p1 = Operator::zeros(dim, dim);
    let mut p2 = Operator::zeros(dim, dim);
    for i in &labels {
        let b = ket_bit(i)?;
        let pair = b.tensor(&b)?;
        phi1.amps += &pair.amps * scale;
        p1 += &pair.amps * pair.amps.adjoint();
        let z = ket_phase(i)?;
        let pair = z.tensor(&z.conjugate())?;
        phi2.amps += &pair.amps * scale;
        p2 += &pair.amps * pair.amps.adjoint();
    }
    Ok(MaxEntangled { phi1, phi2, p1, p2 })
}

/// The encoded state of message `M` on an `m0 x n_c` band, built two ways:
/// as the uniform superposition over the coset `M + C2^perp`, and as
/// `|0>_b (top m1 rows) (x) |M>_b (x) |0>_p (bottom m1 rows)`.
pub fn css_codeword(m: &Matrix, m0: usize, m1: usize) -> Result<(DenseState, DenseState), QcheckError> {
    let f = m.field();
    let n_c = m.cols();
    if m.rows() + 2 * m1 != m0 {
        return Err(QcheckError::Shape(format!("message has {} rows, expected {}", m.rows(), m0 - 2 * m1)));
    }
    let mut coset = DenseState::zero(f, m0, n_c)?;
    let mut base = Matrix::zeros(f, m0, n_c);
    base.set_block(m1, 0, m);
    let tails = all_labels(f, m1, n_c)?;
    let amp = Complex64::new(1.0 / (tails.len() as f64).sqrt(), 0.0);
    for j in &tails {
        let mut word = base.clone();
        word.set_block(m0 - m1, 0, j);
        let i = coset.index_of(&word);
        coset.amps[i] += amp;
    }
    let top = ket_bit(&Matrix::zeros(f, m1, n_c))?;
    let mid = ket_bit(m)?;
    let bottom = ket_phase(&Matrix::zeros(f, m1, n_c))?;
    let tensor = top.tensor(&mid)?.tensor(&bottom)?;
    Ok((coset, tensor))
}

fn check_tp(kraus: &[Operator]) -> Result<usize, QcheckError> {
    let d = kraus.first().map(|k| k.nrows()).ok_or_else(|| QcheckError::Shape("empty operator set".into()))?;
    if d * d > MAX_STATE_DIM {
        return Err(QcheckError::DimensionCap { dim: (d * d) as u128, cap: MAX_STATE_DIM });
    }
    let mut sum = Operator::zeros(d, d);
    for k in kraus {
        if k.shape() != (d, d) {
            return Err(QcheckError::Shape("operators must be square and equal-sized".into()));
        }
        sum += k.adjoint() * k;
    }
    let dev = (sum - Operator::identity(d, d)).iter().map(|c| c.norm()).fold(0.0, f64::max);
    if dev > TP_TOLERANCE {
        return Err(QcheckError::NotTracePreserving(dev));
    }
    Ok(d)
}

/// Entanglement fidelity on the maximally mixed input, as
/// `sum_k |Tr K_k / d|^2`.
pub fn entanglement_fidelity(kraus: &[Operator]) -> Result<f64, QcheckError> {
    let d = check_tp(kraus)? as f64;
    Ok(kraus.iter().map(|k| (k.trace() / d).norm_sqr()).sum())
}

/// The same quantity as `<Phi| (Lambda (x) id)(|Phi><Phi|) |Phi>`.
pub fn entanglement_fidelity_direct(kraus: &[Operator]) -> Result<f64, QcheckError> {
    let d = check_tp(kraus)?;
    let mut phi = DVector::<Complex64>::zeros(d * d);
    let s = Complex64::new(1.0 / (d as f64).sqrt(), 0.0);
    for i in 0..d {
        phi[i * d + i] = s;
    }
    let id = Operator::identity(d, d);
    let mut total = 0.0;
    for k in kraus {
        let v = k.kronecker(&id) * &phi;
        total += phi.dotc(&v).norm_sqr();
    }
    Ok(total)
}

/// Average probability that a bit-basis input is read back wrongly.
pub fn bit_error_probability(kraus: &[Operator]) -> Result<f64, QcheckError> {
    let d = check_tp(kraus)?;
    let mut keep = 0.0;
    for x in 0..d {
        for k in kraus {
            keep += k[(x, x)].norm_sqr();
        }
    }
    Ok(1.0 - keep / d as f64)
}

/// Average probability that a phase-basis input of a single GF(q) symbol
/// is read back wrongly.
pub fn phase_error_probability(field: &FieldSpec, kraus: &[Operator]) -> Result<f64, QcheckError> {
    let d = check_tp(kraus)?;
    if d as u128 != field.order() {
        return Err(QcheckError::Shape("phase error probability is defined on one symbol".into()));
    }
    let mut keep = 0.0;
    for z in field.elements() {
        let ket = ket_phase(&Matrix::from_vec(field, 1, 1, vec![z])?)?;
        for k in kraus {
            keep += ket.amps.dotc(&(k * &ket.amps)).norm_sqr();
        }
    }
    Ok(1.0 - keep / d as f64)
}

/// Shift `|x> -> |x + a>` on one symbol.
pub fn shift_operator(field: &FieldSpec, a: u64) -> Operator {
    let d = field.order() as usize;
    let mut op = Operator::zeros(d, d);
    for x in field.elements() {
        op[(field.add(x, a) as usize, x as usize)] = Complex64::new(1.0, 0.0);
    }
    op
}

/// Phase `|x> -> w^(tr(c x)) |x>` on one symbol.
pub fn phase_operator(field: &FieldSpec, c: u64) -> Operator {
    let d = field.order() as usize;
    let p = field.characteristic();
    let mut op = Operator::zeros(d, d);
    for x in field.elements() {
        op[(x as usize, x as usize)] = root_of_unity(field.trace(field.mul(c, x)), p);
    }
    op
}

/// Independent random shift (probability `b`) and random phase
/// (probability `f`) on one symbol; nonzero shifts and phases are uniform.
pub fn bit_phase_channel(field: &FieldSpec, b: f64, f: f64) -> Vec<Operator> {
    let others = (field.order() - 1) as f64;
    let mut out = Vec::new();
    for a in field.elements() {
        let pa = if a == 0 { 1.0 - b } else { b / others };
        for c in field.elements() {
            let pc = if c == 0 { 1.0 - f } else { f / others };
            let w = (pa * pc).sqrt();
            if w > 0.0 {
                out.push(shift_operator(field, a) * phase_operator(field, c) * Complex64::new(w, 0.0));
            }
        }
    }
    out
}

/// Outcome of one exact check.
#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub cases: usize,
    pub max_error: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub tolerance: f64,
    pub passed: bool,
    pub checks: Vec<CheckResult>,
}

fn record(name: impl Into<String>, cases: usize, max_error: f64) -> CheckResult {
    CheckResult {
        name: name.into(),
        passed: max_error <= TOLERANCE,
        cases,
        max_error,
    }
}

/// Left and right Lemma-1 identities for every invertible matrix and every
/// phase label of an `m x n` register over GF(q).
pub fn check_phase_action(field: &FieldSpec, m: usize, n: usize) -> Result<CheckResult, QcheckError> {
    let labels = all_labels(field, m, n)?;
    let kets: Vec<DenseState> = labels.iter().map(ket_phase).collect::<Result<_, _>>()?;
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for a in general_linear_group(field, m)? {
        let ap = a.phase_transform()?;
        for (z, ket) in labels.iter().zip(&kets) {
            let lhs = apply_left(&a, ket)?;
            let rhs = ket_phase(&ap.mul(z)?)?;
            worst = worst.max(lhs.distance(&rhs));
            cases += 1;
        }
    }
    for b in general_linear_group(field, n)? {
        let bp = b.phase_transform()?;
        for (z, ket) in labels.iter().zip(&kets) {
            let lhs = apply_right(&b, ket)?;
            let rhs = ket_phase(&z.mul(&bp)?)?;
            worst = worst.max(lhs.distance(&rhs));
            cases += 1;
        }
    }
    Ok(record(format!("phase_action q={} m={m} n={n}", field.order()), cases, worst))
}

/// Gram matrix of the phase kets against the identity.
pub fn check_phase_orthonormal(field: &FieldSpec, m: usize, n: usize) -> Result<CheckResult, QcheckError> {
    let kets: Vec<DenseState> = all_labels(field, m, n)?.iter().map(ket_phase).collect::<Result<_, _>>()?;
    let mut worst: f64 = 0.0;
    for (i, a) in kets.iter().enumerate() {
        for (j, b) in kets.iter().enumerate() {
            let expect = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((a.inner(b) - Complex64::new(expect, 0.0)).norm());
        }
    }
    Ok(record(format!("phase_orthonormal q={} m={m} n={n}", field.order()), kets.len() * kets.len(), worst))
}

/// `|Phi1> = |Phi2>` and `P1 P2 = P2 P1 = |Phi><Phi|`.
pub fn check_max_entangled(field: &FieldSpec, m: usize) -> Result<CheckResult, QcheckError> {
    let me = max_entangled(field, m)?;
    let proj = &me.phi1.amps * me.phi1.amps.adjoint();
    let e1 = me.phi1.distance(&me.phi2);
    let e2 = max_abs_diff((&me.p1 * &me.p2).as_slice(), proj.as_slice());
    let e3 = max_abs_diff((&me.p2 * &me.p1).as_slice(), proj.as_slice());
    Ok(record(format!("max_entangled q={} m={m}", field.order()), 3, e1.max(e2).max(e3)))
}

/// Coset-sum and tensor forms of every codeword agree.
pub fn check_css(field: &FieldSpec, m0: usize, m1: usize, n_c: usize) -> Result<CheckResult, QcheckError> {
    let mut worst: f64 = 0.0;
    let messages = all_labels(field, m0 - 2 * m1, n_c)?;
    for msg in &messages {
        let (a, b) = css_codeword(msg, m0, m1)?;
        worst = worst.max(a.distance(&b));
    }
    Ok(record(format!("css q={} m0={m0} m1={m1} n_c={n_c}", field.order()), messages.len(), worst))
}

/// Norm preservation, `L(A1) L(A2) = L(A1 A2)` and commutation of left and
/// right actions on random states.
pub fn check_unitary_actions(field: &FieldSpec, m: usize, n: usize, seed: u64) -> Result<CheckResult, QcheckError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gl_m = general_linear_group(field, m)?;
    let gl_n = general_linear_group(field, n)?;
    let mut worst: f64 = 0.0;
    let trials = 20;
    for _ in 0..trials {
        let psi = DenseState::random(field, m, n, &mut rng)?;
        let a1 = &gl_m[rng.gen_range(0..gl_m.len())];
        let a2 = &gl_m[rng.gen_range(0..gl_m.len())];
        let b = &gl_n[rng.gen_range(0..gl_n.len())];
        let seq = apply_left(a1, &apply_left(a2, &psi)?)?;
        let prod = apply_left(&a1.mul(a2)?, &psi)?;
        worst = worst.max(seq.distance(&prod));
        worst = worst.max((seq.norm() - 1.0).abs());
        let lr = apply_left(a1, &apply_right(b, &psi)?)?;
        let rl = apply_right(b, &apply_left(a1, &psi)?)?;
        worst = worst.max(lr.distance(&rl));
    }
    Ok(record(format!("unitary_actions q={} m={m} n={n}", field.order()), trials, worst))
}

/// Both fidelity routes on a panel of channels, and `1 - F <= b + f`.
pub fn check_fidelity(field: &FieldSpec) -> Result<CheckResult, QcheckError> {
    let d = field.order() as usize;
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    let identity = vec![Operator::identity(d, d)];
    worst = worst.max((entanglement_fidelity(&identity)? - 1.0).abs());
    for (b, f) in [(0.0, 0.0), (0.1, 0.0), (0.0, 0.2), (0.3, 0.25), (0.5, 0.5)] {
        let ch = bit_phase_channel(field, b, f);
        let fe = entanglement_fidelity(&ch)?;
        worst = worst.max((fe - entanglement_fidelity_direct(&ch)?).abs());
        let bhat = bit_error_probability(&ch)?;
        let fhat = phase_error_probability(field, &ch)?;
        worst = worst.max((bhat - b).abs()).max((fhat - f).abs());
        if 1.0 - fe > bhat + fhat + TOLERANCE {
            worst = worst.max(1.0 - fe - bhat - fhat);
        }
        cases += 1;
    }
    Ok(record(format!("fidelity q={}", field.order()), cases, worst))
}

/// The full exact suite.
pub fn run_suite() -> Result<SuiteReport, QcheckError> {
    let f2 = FieldSpec::new(2, 1).expect("GF(2)");
    let f3 = FieldSpec::new(3, 1).expect("GF(3)");
    let f4 = FieldSpec::new(2, 2).expect("GF(4)");
    let mut checks = Vec::new();
    for (f, m, n) in [(&f2, 2, 1), (&f2, 1, 2), (&f3, 1, 1), (&f2, 2, 2), (&f3, 2, 1), (&f2, 3, 1), (&f4, 1, 2)] {
        checks.push(check_phase_action(f, m, n)?);
    }
    for (f, m, n) in [(&f2, 1, 1), (&f3, 1, 1), (&f3, 1, 2), (&f4, 1, 1)] {
        checks.push(check_phase_orthonormal(f, m, n)?);
    }
    for (f, m) in [(&f2, 1), (&f3, 1), (&f2, 2), (&f4, 1)] {
        checks.push(check_max_entangled(f, m)?);
    }
    checks.push(check_css(&f2, 3, 1, 1)?);
    checks.push(check_css(&f2, 3, 1, 2)?);
    checks.push(check_css(&f3, 3, 1, 1)?);
    checks.push(check_unitary_actions(&f3, 2, 2, 11)?);
    checks.push(check_unitary_actions(&f2, 3, 2, 12)?);
    checks.push(check_fidelity(&f2)?);
    checks.push(check_fidelity(&f3)?);
    Ok(SuiteReport {
        tolerance: TOLERANCE,
        passed: checks.iter().all(|c| c.passed),
        checks,
    })
}
