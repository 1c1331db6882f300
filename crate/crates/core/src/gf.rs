//! Exact arithmetic in prime-power fields GF(p^d).
//!
//! Elements are packed as base-p digit integers (`u64`): the coefficient of
//! `x^i` is digit `i`, so the packed value of a prime-field element is the
//! residue itself. Every field is represented as a single extension of its
//! prime field; [`Embedding`] provides the view of a smaller field GF(p^a)
//! inside GF(p^(a*b)).

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use thiserror::Error;

/// Largest supported field order.
pub const MAX_ORDER: u128 = 1u128 << 64;

/// Largest source field order accepted by [`Embedding::new`] for non-prime
/// sources, which are embedded by enumerating the target's subfield.
pub const MAX_EMBED_SOURCE_ORDER: u128 = 1 << 20;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("extension degree must be at least 1")]
    ZeroDegree,
    #[error("field order {p}^{degree} exceeds 2^64")]
    OrderOverflow { p: u64, degree: u32 },
    #[error("operands belong to different fields: GF({left}) vs GF({right})")]
    Mismatch { left: String, right: String },
    #[error("zero has no multiplicative inverse")]
    ZeroInverse,
    #[error("value {value} is not an element of a field of order {order}")]
    InvalidElement { value: u64, order: u128 },
    #[error("GF({source_order}) is not a subfield of GF({target_order})")]
    IncompatibleExtension {
        source_order: u128,
        target_order: u128,
    },
    #[error("embedding a non-prime field of order {0} is not supported")]
    UnsupportedSubfield(u128),
}

struct FieldInner {
    p: u64,
    degree: u32,
    order: u128,
    /// Monic modulus, coefficients low to high, length `degree + 1`.
    modulus: Vec<u64>,
    /// Modulus as a bit pattern when `p == 2`.
    binary_modulus: u128,
}

/// A finite field GF(p^d) with a deterministically chosen modulus.
///
/// Cheap to clone; two specs compare equal iff they share `(p, d)`, which
/// fixes the modulus as well.
#[derive(Clone)]
pub struct FieldSpec {
    inner: Arc<FieldInner>,
}

impl PartialEq for FieldSpec {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner)
            || (self.inner.p == other.inner.p && self.inner.degree == other.inner.degree)
    }
}

impl Eq for FieldSpec {}

impl fmt::Debug for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF({}^{})", self.inner.p, self.inner.degree)
    }
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.inner.degree == 1 {
            write!(f, "GF({})", self.inner.p)
        } else {
            write!(f, "GF({}^{})", self.inner.p, self.inner.degree)
        }
    }
}

impl FieldSpec {
    /// Builds GF(p^d). The modulus is the monic irreducible whose lower
    /// coefficients, packed like an element, give the smallest integer;
    /// GF(p) uses `x`.
    pub fn new(p: u64, degree: u32) -> Result<Self, FieldError> {
        if !is_prime(p) {
            return Err(FieldError::NotPrime(p));
        }
        if degree == 0 {
            return Err(FieldError::ZeroDegree);
        }
        let order = checked_order(p, degree).ok_or(FieldError::OrderOverflow { p, degree })?;
        let modulus = smallest_irreducible(p, degree);
        let binary_modulus = if p == 2 {
            modulus
                .iter()
                .enumerate()
                .fold(0u128, |acc, (i, &c)| acc | ((c as u128) << i))
        } else {
            0
        };
        Ok(Self {
            inner: Arc::new(FieldInner {
                p,
                degree,
                order,
                modulus,
                binary_modulus,
            }),
        })
    }

    /// Prime field GF(p).
    pub fn prime(p: u64) -> Result<Self, FieldError> {
        Self::new(p, 1)
    }

    pub fn characteristic(&self) -> u64 {
        self.inner.p
    }

    pub fn degree(&self) -> u32 {
        self.inner.degree
    }

    pub fn order(&self) -> u128 {
        self.inner.order
    }

    /// Monic modulus coefficients, constant term first.
    pub fn modulus(&self) -> &[u64] {
        &self.inner.modulus
    }

    pub fn is_prime_field(&self) -> bool {
        self.inner.degree == 1
    }

    pub fn contains(&self, value: u64) -> bool {
        (value as u128) < self.inner.order
    }

    pub fn element(&self, value: u64) -> Result<FieldElement, FieldError> {
        if !self.contains(value) {
            return Err(FieldError::InvalidElement {
                value,
                order: self.inner.order,
            });
        }
        Ok(FieldElement {
            field: self.clone(),
            value,
        })
    }

    pub fn zero_element(&self) -> FieldElement {
        FieldElement {
            field: self.clone(),
            value: 0,
        }
    }

    pub fn one_element(&self) -> FieldElement {
        FieldElement {
            field: self.clone(),
            value: 1,
        }
    }

    /// Iterates over every packed element; intended for small fields.
    pub fn elements(&self) -> impl Iterator<Item = u64> {
        let order = self.inner.order;
        (0..order).map(|v| v as u64)
    }

    /// Uniformly random packed element.
    pub fn random<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        if self.inner.order == MAX_ORDER {
            rng.gen::<u64>()
        } else {
            rng.gen_range(0..self.inner.order as u64)
        }
    }

    /// Uniformly random nonzero packed element.
    pub fn random_nonzero<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        if self.inner.order == MAX_ORDER {
            loop {
                let v = rng.gen::<u64>();
                if v != 0 {
                    return v;
                }
            }
        }
        rng.gen_range(1..self.inner.order as u64)
    }

    /// Base-p digits of a packed element, length `degree`.
    pub fn digits(&self, mut value: u64) -> Vec<u64> {
        let p = self.inner.p;
        let mut out = vec![0u64; self.inner.degree as usize];
        if self.inner.degree == 1 {
            out[0] = value;
            return out;
        }
        for d in out.iter_mut() {
            *d = value % p;
            value /= p;
        }
        out
    }

    /// Packs base-p digits (constant term first). Digits are reduced mod p.
    pub fn from_digits(&self, digits: &[u64]) -> u64 {
        let p = self.inner.p;
        digits
            .iter()
            .take(self.inner.degree as usize)
            .rev()
            .fold(0u128, |acc, &d| acc * p as u128 + (d % p) as u128) as u64
    }

    pub fn add(&self, a: u64, b: u64) -> u64 {
        let f = &*self.inner;
        if f.p == 2 {
            return a ^ b;
        }
        if f.degree == 1 {
            return add_mod(a, b, f.p);
        }
        let p = f.p;
        let (mut a, mut b) = (a, b);
        let mut out = 0u128;
        let mut place = 1u128;
        for _ in 0..f.degree {
            out += add_mod(a % p, b % p, p) as u128 * place;
            a /= p;
            b /= p;
            place *= p as u128;
        }
        out as u64
    }

    pub fn neg(&self, a: u64) -> u64 {
        let f = &*self.inner;
        if f.p == 2 {
            return a;
        }
        if f.degree == 1 {
            return if a == 0 { 0 } else { f.p - a };
        }
        let p = f.p;
        let mut a = a;
        let mut out = 0u128;
        let mut place = 1u128;
        for _ in 0..f.degree {
            let d = a % p;
            out += (if d == 0 { 0 } else { p - d }) as u128 * place;
            a /= p;
            place *= p as u128;
        }
        out as u64
    }

    pub fn sub(&self, a: u64, b: u64) -> u64 {
        self.add(a, self.neg(b))
    }

    pub fn mul(&self, a: u64, b: u64) -> u64 {
        let f = &*self.inner;
        if a == 0 || b == 0 {
            return 0;
        }
        if f.degree == 1 {
            return mul_mod(a, b, f.p);
        }
        if f.p == 2 {
            return binary_mul(a, b, f.degree, f.binary_modulus);
        }
        self.generic_mul(a, b)
    }

    fn generic_mul(&self, a: u64, b: u64) -> u64 {
        let f = &*self.inner;
        let d = f.degree as usize;
        let p = f.p;
        let mut da = [0u64; 64];
        let mut db = [0u64; 64];
        let (mut x, mut y) = (a, b);
        for i in 0..d {
            da[i] = x % p;
            db[i] = y % p;
            x /= p;
            y /= p;
        }
        let mut prod = [0u64; 128];
        for i in 0..d {
            if da[i] == 0 {
                continue;
            }
            for j in 0..d {
                if db[j] != 0 {
                    prod[i + j] = add_mod(prod[i + j], mul_mod(da[i], db[j], p), p);
                }
            }
        }
        // x^d = -(m_0 + m_1 x + ... + m_{d-1} x^{d-1})
        for k in (d..2 * d - 1).rev() {
            let c = prod[k];
            if c == 0 {
                continue;
            }
            prod[k] = 0;
            for (i, &m) in f.modulus[..d].iter().enumerate() {
                if m != 0 {
                    let t = mul_mod(c, m, p);
                    prod[k - d + i] = add_mod(prod[k - d + i], p - t, p);
                }
            }
        }
        prod[..d]
            .iter()
            .rev()
            .fold(0u128, |acc, &c| acc * p as u128 + c as u128) as u64
    }

    pub fn pow(&self, a: u64, mut exp: u128) -> u64 {
        let mut base = a;
        let mut acc = 1u64;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            exp >>= 1;
        }
        acc
    }

    pub fn inv(&self, a: u64) -> Option<u64> {
        if a == 0 {
            return None;
        }
        if self.inner.degree == 1 {
            return Some(inv_mod_prime(a, self.inner.p));
        }
        Some(self.pow(a, self.inner.order - 2))
    }

    pub fn div(&self, a: u64, b: u64) -> Option<u64> {
        self.inv(b).map(|bi| self.mul(a, bi))
    }

    /// Frobenius map `a -> a^p`.
    pub fn frobenius(&self, a: u64) -> u64 {
        self.pow(a, self.inner.p as u128)
    }

    /// Absolute trace to GF(p): the sum of Frobenius conjugates
    /// `a + a^p + ... + a^(p^(d-1))`, returned as a residue in `0..p`.
    pub fn trace(&self, a: u64) -> u64 {
        let mut conj = a;
        let mut sum = a;
        for _ in 1..self.inner.degree {
            conj = self.frobenius(conj);
            sum = self.add(sum, conj);
        }
        debug_assert!(sum < self.inner.p, "trace left the prime field");
        sum
    }

    /// Trace of the GF(p)-linear map `x -> a x` in the monomial basis.
    pub fn trace_via_matrix(&self, a: u64) -> u64 {
        let p = self.inner.p;
        let d = self.inner.degree as usize;
        let mut basis = 1u64;
        let mut total = 0u64;
        for j in 0..d {
            let image = self.mul(a, basis);
            total = add_mod(total, self.digits(image)[j], p);
            if j + 1 < d {
                basis = if p == 2 {
                    basis << 1
                } else {
                    basis * p
                };
            }
        }
        total
    }
}

/// Element of a [`FieldSpec`] carrying its field, for checked arithmetic.
#[derive(Clone, PartialEq, Eq)]
pub struct FieldElement {
    field: FieldSpec,
    value: u64,
}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{}", self.value, self.field)
    }
}

impl FieldElement {
    pub fn field(&self) -> &FieldSpec {
        &self.field
    }

    /// Packed value.
    pub fn value(&self) -> u64 {
        self.value
    }

    /// Canonical coefficient vector over GF(p), constant term first.
    pub fn coefficients(&self) -> Vec<u64> {
        self.field.digits(self.value)
    }

    pub fn is_zero(&self) -> bool {
        self.value == 0
    }

    fn check(&self, other: &FieldElement) -> Result<(), FieldError> {
        if self.field != other.field {
            return Err(FieldError::Mismatch {
                left: self.field.to_string(),
                right: other.field.to_string(),
            });
        }
        Ok(())
    }

    fn with(&self, value: u64) -> FieldElement {
        FieldElement {
            field: self.field.clone(),
            value,
        }
    }

    pub fn add(&self, other: &FieldElement) -> Result<FieldElement, FieldError> {
        self.check(other)?;
        Ok(self.with(self.field.add(self.value, other.value)))
    }

    pub fn sub(&self, other: &FieldElement) -> Result<FieldElement, FieldError> {
        self.check(other)?;
        Ok(self.with(self.field.sub(self.value, other.value)))
    }

    pub fn mul(&self, other: &FieldElement) -> Result<FieldElement, FieldError> {
        self.check(other)?;
        Ok(self.with(self.field.mul(self.value, other.value)))
    }

    pub fn div(&self, other: &FieldElement) -> Result<FieldElement, FieldError> {
        self.check(other)?;
        let inv = other.inv()?;
        Ok(self.with(self.field.mul(self.value, inv.value)))
    }

    pub fn neg(&self) -> FieldElement {
        self.with(self.field.neg(self.value))
    }

    pub fn inv(&self) -> Result<FieldElement, FieldError> {
        self.field
            .inv(self.value)
            .map(|v| self.with(v))
            .ok_or(FieldError::ZeroInverse)
    }

    pub fn pow(&self, exp: u128) -> FieldElement {
        self.with(self.field.pow(self.value, exp))
    }

    /// Absolute trace as a residue in `0..p`.
    pub fn trace(&self) -> u64 {
        self.field.trace(self.value)
    }

    pub fn embed(&self, target: &FieldSpec) -> Result<FieldElement, FieldError> {
        let emb = Embedding::new(&self.field, target)?;
        Ok(FieldElement {
            field: target.clone(),
            value: emb.apply(self.value),
        })
    }
}

/// Ring embedding GF(p^a) -> GF(p^(a*b)).
///
/// For a non-prime source the generator `x` is sent to the smallest packed
/// root of the source modulus inside the target.
#[derive(Clone, Debug)]
pub struct Embedding {
    source: FieldSpec,
    target: FieldSpec,
    /// Images of `1, x, ..., x^(a-1)`.
    basis: Vec<u64>,
}

impl Embedding {
    pub fn new(source: &FieldSpec, target: &FieldSpec) -> Result<Self, FieldError> {
        if source.characteristic() != target.characteristic()
            || !target.degree().is_multiple_of(source.degree())
        {
            return Err(FieldError::IncompatibleExtension {
                source_order: source.order(),
                target_order: target.order(),
            });
        }
        if source.is_prime_field() {
            return Ok(Self {
                source: source.clone(),
                target: target.clone(),
                basis: vec![1],
            });
        }
        if source.order() > MAX_EMBED_SOURCE_ORDER {
            return Err(FieldError::UnsupportedSubfield(source.order()));
        }
        let root = subfield_root(source, target);
        let mut basis = Vec::with_capacity(source.degree() as usize);
        let mut power = 1u64;
        for _ in 0..source.degree() {
            basis.push(power);
            power = target.mul(power, root);
        }
        Ok(Self {
            source: source.clone(),
            target: target.clone(),
            basis,
        })
    }

    pub fn source(&self) -> &FieldSpec {
        &self.source
    }

    pub fn target(&self) -> &FieldSpec {
        &self.target
    }

    pub fn apply(&self, value: u64) -> u64 {
        if self.source.is_prime_field() {
            return value;
        }
        self.source
            .digits(value)
            .into_iter()
            .zip(&self.basis)
            .fold(0u64, |acc, (c, &b)| self.target.add(acc, self.target.mul(c, b)))
    }
}

/// Free-function form of [`FieldElement::embed`].
pub fn embed(a: &FieldElement, target: &FieldSpec) -> Result<FieldElement, FieldError> {
    a.embed(target)
}

fn subfield_root(source: &FieldSpec, target: &FieldSpec) -> u64 {
    let sub_order = source.order();
    let group = sub_order - 1;
    let cofactor = (target.order() - 1) / group;
    let primes = prime_factors(group);
    // A generator of the order-(p^a) subfield's multiplicative group.
    let generator = (2..)
        .map(|g: u64| target.pow(g, cofactor))
        .find(|&h| primes.iter().all(|&r| target.pow(h, group / r) != 1))
        .expect("a primitive element exists in every finite field");
    let modulus = source.modulus();
    let eval = |y: u64| {
        modulus
            .iter()
            .rev()
            .fold(0u64, |acc, &c| target.add(target.mul(acc, y), c))
    };
    let mut best = None;
    let mut y = 1u64;
    for _ in 0..group {
        if eval(y) == 0 {
            best = Some(best.map_or(y, |b: u64| b.min(y)));
        }
        y = target.mul(y, generator);
    }
    best.expect("the source modulus splits in the target field")
}

fn prime_factors(mut n: u128) -> Vec<u128> {
    let mut out = Vec::new();
    let mut f = 2u128;
    while f * f <= n {
        if n.is_multiple_of(f) {
            out.push(f);
            while n.is_multiple_of(f) {
                n /= f;
            }
        }
        f += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

fn checked_order(p: u64, degree: u32) -> Option<u128> {
    let mut order = 1u128;
    for _ in 0..degree {
        order = order.checked_mul(p as u128)?;
        if order > MAX_ORDER {
            return None;
        }
    }
    Some(order)
}

pub(crate) fn add_mod(a: u64, b: u64, p: u64) -> u64 {
    let s = a as u128 + b as u128;
    (if s >= p as u128 { s - p as u128 } else { s }) as u64
}

pub(crate) fn mul_mod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, p: u64) -> u64 {
    let mut acc = 1u64 % p;
    base %= p;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, p);
        }
        base = mul_mod(base, base, p);
        exp >>= 1;
    }
    acc
}

fn inv_mod_prime(a: u64, p: u64) -> u64 {
    // Extended Euclid on (a, p).
    let (mut r0, mut r1) = (p as i128, a as i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    t0.rem_euclid(p as i128) as u64
}

fn binary_mul(a: u64, b: u64, degree: u32, modulus: u128) -> u64 {
    let (mut x, mut y) = (a as u128, b);
    let mut prod = 0u128;
    while y != 0 {
        if y & 1 == 1 {
            prod ^= x;
        }
        x <<= 1;
        y >>= 1;
    }
    let d = degree as usize;
    for k in (d..2 * d - 1).rev() {
        if (prod >> k) & 1 == 1 {
            prod ^= modulus << (k - d);
        }
    }
    prod as u64
}

/// Deterministic Miller-Rabin, exact for all `u64`.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const WITNESSES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for &w in &WITNESSES {
        if n == w {
            return true;
        }
        if n.is_multiple_of(w) {
            return false;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'witness: for &a in &WITNESSES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn smallest_irreducible(p: u64, degree: u32) -> Vec<u64> {
    let d = degree as usize;
    if d == 1 {
        return vec![0, 1];
    }
    let mut lower = vec![0u64; d];
    loop {
        // Odometer over the lower coefficients, constant term least significant.
        if lower[0] != 0 {
            let mut f = lower.clone();
            f.push(1);
            if poly::is_irreducible(&f, p) {
                return f;
            }
        }
        let mut i = 0;
        loop {
            lower[i] += 1;
            if lower[i] < p {
                break;
            }
            lower[i] = 0;
            i += 1;
            assert!(i < d, "irreducible polynomials exist in every degree");
        }
    }
}

/// Dense polynomials over GF(p), coefficients low to high.
pub(crate) mod poly {
    use super::{add_mod, inv_mod_prime, mul_mod};

    pub fn trim(mut a: Vec<u64>) -> Vec<u64> {
        while a.last() == Some(&0) {
            a.pop();
        }
        a
    }

    pub fn degree(a: &[u64]) -> Option<usize> {
        a.iter().rposition(|&c| c != 0)
    }

    pub fn sub(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
        let n = a.len().max(b.len());
        let out = (0..n)
            .map(|i| {
                let x = a.get(i).copied().unwrap_or(0);
                let y = b.get(i).copied().unwrap_or(0);
                add_mod(x, if y == 0 { 0 } else { p - y }, p)
            })
            .collect();
        trim(out)
    }

    /// Remainder of `a` modulo nonzero `m`.
    pub fn rem(a: &[u64], m: &[u64], p: u64) -> Vec<u64> {
        let mut r = trim(a.to_vec());
        let dm = degree(m).expect("nonzero modulus");
        let lead_inv = inv_mod_prime(m[dm], p);
        while let Some(dr) = degree(&r) {
            if dr < dm {
                break;
            }
            let c = mul_mod(r[dr], lead_inv, p);
            for (i, &mi) in m[..=dm].iter().enumerate() {
                let t = mul_mod(c, mi, p);
                let idx = dr - dm + i;
                r[idx] = add_mod(r[idx], if t == 0 { 0 } else { p - t }, p);
            }
            r = trim(r);
        }
        r
    }

    pub fn mul_mod_poly(a: &[u64], b: &[u64], m: &[u64], p: u64) -> Vec<u64> {
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let mut prod = vec![0u64; a.len() + b.len() - 1];
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.iter().enumerate() {
                prod[i + j] = add_mod(prod[i + j], mul_mod(x, y, p), p);
            }
        }
        rem(&prod, m, p)
    }

    pub fn pow_mod_poly(base: &[u64], mut exp: u64, m: &[u64], p: u64) -> Vec<u64> {
        let mut acc = vec![1u64];
        let mut b = rem(base, m, p);
        while exp > 0 {
            if exp & 1 == 1 {
                acc = mul_mod_poly(&acc, &b, m, p);
            }
            b = mul_mod_poly(&b, &b, m, p);
            exp >>= 1;
        }
        acc
    }

    pub fn gcd(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
        let mut x = trim(a.to_vec());
        let mut y = trim(b.to_vec());
        while !y.is_empty() {
            let r = rem(&x, &y, p);
            x = y;
            y = r;
        }
        x
    }

    /// Ben-Or test: `f` of degree d is irreducible iff
    /// gcd(x^(p^i) - x, f) = 1 for i = 1..=d/2.
    pub fn is_irreducible(f: &[u64], p: u64) -> bool {
        let d = match degree(f) {
            Some(d) if d >= 1 => d,
            _ => return false,
        };
        let x = vec![0u64, 1];
        let mut h = x.clone();
        for _ in 0..d / 2 {
            h = pow_mod_poly(&h, p, f, p);
            let g = gcd(&sub(&h, &x, p), f, p);
            if degree(&g).unwrap_or(0) > 0 {
                return false;
            }
        }
        true
    }
}
