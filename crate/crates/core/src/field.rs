//! Arithmetic in `F_p` and `F_{p^m}` for odd primes `p`.
//!
//! An element of `F_{p^m}` is encoded as an integer in `[0, p^m)`. Its base-`p`
//! digits are the coordinates in the polynomial basis `{1, α, …, α^{m-1}}`,
//! where `α` is a root of the field modulus. The modulus is the first monic
//! irreducible polynomial of degree `m` in lexicographic order of the
//! coefficient tuple `(c_{m-1}, …, c_0)`, so every field built here is
//! reproducible.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};

/// Encoded field element.
pub type Elem = u32;

/// Largest field (number of elements) built unless a caller raises the limit.
pub const DEFAULT_CEILING: u64 = 2187;

/// Fields up to this size get log/antilog tables.
const TABLE_LIMIT: u64 = 1 << 20;

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Distinct prime factors of `n`, ascending.
pub fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

pub fn mod_pow(mut base: u64, mut exp: u64, modulus: u64) -> u64 {
    if modulus == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= modulus;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = ((acc as u128 * base as u128) % modulus as u128) as u64;
        }
        base = ((base as u128 * base as u128) % modulus as u128) as u64;
        exp >>= 1;
    }
    acc
}

/// Quadratic character of `F_p` (Legendre symbol), with `η₀(0) = 0`.
pub fn eta0(p: u32, c: u32) -> i8 {
    let c = c % p;
    if c == 0 {
        return 0;
    }
    if mod_pow(c as u64, (p as u64 - 1) / 2, p as u64) == 1 {
        1
    } else {
        -1
    }
}

/// Inverse in `F_p`. Panics on zero.
pub fn fp_inv(p: u32, c: u32) -> u32 {
    assert!(!c.is_multiple_of(p), "inverse of zero in F_{p}");
    mod_pow(c as u64, p as u64 - 2, p as u64) as u32
}

/// Reduce a signed integer into `[0, p)`.
pub fn fp_from_i64(p: u32, v: i64) -> u32 {
    v.rem_euclid(p as i64) as u32
}

// Polynomials over F_p as coefficient vectors, constant term first, no trailing zeros.

fn poly_trim(a: &mut Vec<u32>) {
    while a.last() == Some(&0) {
        a.pop();
    }
}

fn poly_rem(p: u32, a: &[u32], b: &[u32]) -> Vec<u32> {
    let mut r = a.to_vec();
    poly_trim(&mut r);
    let db = b.len() - 1;
    let lead_inv = fp_inv(p, b[db]) as u64;
    while r.len() > db {
        let shift = r.len() - 1 - db;
        let factor = (*r.last().unwrap() as u64 * lead_inv) % p as u64;
        for (i, &bc) in b.iter().enumerate() {
            let sub = (factor * bc as u64) % p as u64;
            r[shift + i] = ((r[shift + i] as u64 + p as u64 - sub) % p as u64) as u32;
        }
        poly_trim(&mut r);
    }
    r
}

/// Irreducibility of a monic polynomial by trial division over every monic
/// polynomial of degree `1..=deg/2`.
pub fn is_irreducible(p: u32, poly: &[u32]) -> bool {
    let deg = poly.len() - 1;
    if deg == 0 {
        return false;
    }
    for d in 1..=deg / 2 {
        let count = (p as u64).pow(d as u32);
        for idx in 0..count {
            let mut divisor = digits(idx, p, d);
            divisor.push(1);
            if poly_rem(p, poly, &divisor).is_empty() {
                return false;
            }
        }
    }
    true
}

fn digits(mut x: u64, p: u32, len: usize) -> Vec<u32> {
    let mut out = Vec::with_capacity(len);
    for _ in 0..len {
        out.push((x % p as u64) as u32);
        x /= p as u64;
    }
    out
}

/// Symbolic and numeric value of the quadratic Gauss sum `Σ_{x≠0} η(x) ζ_p^{Tr(x)}`.
///
/// The symbolic value is `sign · i^i_power · p^{m/2}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussSumValue {
    pub p: u32,
    pub m: u32,
    pub sign: i8,
    pub i_power: u8,
    pub numeric: Complex64,
}

impl GaussSumValue {
    pub fn symbolic_numeric(&self) -> Complex64 {
        let mag = (self.p as f64).powf(self.m as f64 / 2.0);
        let unit = match self.i_power % 4 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        };
        unit * (self.sign as f64 * mag)
    }
}

/// A concrete model of `F_{p^m}`. Immutable after construction.
#[derive(Debug, Clone)]
pub struct FieldCtx {
    p: u32,
    m: u32,
    order: u32,
    modulus: Vec<u32>,
    primitive: Elem,
    log: Option<Vec<u32>>,
    antilog: Option<Vec<Elem>>,
    traces: Vec<u32>,
}

/// `make_field` with the default size ceiling.
pub fn make_field(p: u32, m: u32) -> Result<FieldCtx> {
    FieldCtx::new(p, m, DEFAULT_CEILING)
}

impl FieldCtx {
    pub fn new(p: u32, m: u32, ceiling: u64) -> Result<Self> {
        if p == 2 || !is_prime(p as u64) {
            return invalid(format!("p = {p} must be an odd prime"));
        }
        if m == 0 {
            return invalid("m must be positive");
        }
        let size = (p as u64).checked_pow(m).unwrap_or(u64::MAX);
        if size > ceiling {
            return Err(Error::CapacityExceeded(format!(
                "F_{{{p}^{m}}} has {size} elements, ceiling is {ceiling}"
            )));
        }
        if size > u32::MAX as u64 {
            return Err(Error::CapacityExceeded(format!("{size} elements do not fit the encoding")));
        }
        let modulus = (0..size)
            .map(|idx| {
                let mut c = digits(idx, p, m as usize);
                c.push(1);
                c
            })
            .find(|c| is_irreducible(p, c))
            .ok_or_else(|| Error::InternalConsistency(format!("no irreducible of degree {m} over F_{p}")))?;

        let mut ctx = FieldCtx {
            p,
            m,
            order: size as u32,
            modulus,
            primitive: 0,
            log: None,
            antilog: None,
            traces: Vec::new(),
        };
        ctx.primitive = ctx.find_primitive();
        if size <= TABLE_LIMIT {
            let n = size as usize - 1;
            let mut log = vec![0u32; size as usize];
            let mut antilog = Vec::with_capacity(n);
            let mut x: Elem = 1;
            for i in 0..n {
                antilog.push(x);
                log[x as usize] = i as u32;
                x = ctx.mul_poly(x, ctx.primitive);
            }
            ctx.log = Some(log);
            ctx.antilog = Some(antilog);
        }
        ctx.traces = (0..ctx.order).map(|x| ctx.trace_frobenius(x)).collect();
        Ok(ctx)
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    /// Number of elements `p^m`.
    pub fn order(&self) -> u32 {
        self.order
    }

    /// Modulus coefficients, constant term first, monic.
    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    pub fn elements(&self) -> std::ops::Range<Elem> {
        0..self.order
    }

    pub fn is_valid(&self, x: Elem) -> bool {
        x < self.order
    }

    /// Coordinates of `x` in the polynomial basis.
    pub fn decode(&self, x: Elem) -> Vec<u32> {
        digits(x as u64, self.p, self.m as usize)
    }

    pub fn encode(&self, coords: &[u32]) -> Elem {
        coords
            .iter()
            .rev()
            .fold(0u32, |acc, &c| acc * self.p + (c % self.p))
    }

    /// `α^i` for `i < m`: the `i`-th polynomial basis vector.
    pub fn basis(&self) -> Vec<Elem> {
        (0..self.m).map(|i| self.p.pow(i)).collect()
    }

    /// Embed a prime-field scalar.
    pub fn scalar(&self, c: u32) -> Elem {
        c % self.p
    }

    pub fn add(&self, x: Elem, y: Elem) -> Elem {
        let p = self.p;
        let (mut x, mut y) = (x, y);
        let mut out = 0;
        let mut place = 1;
        while x > 0 || y > 0 {
            let d = (x % p + y % p) % p;
            out += d * place;
            place *= p;
            x /= p;
            y /= p;
        }
        out
    }

    pub fn neg(&self, x: Elem) -> Elem {
        let p = self.p;
        let mut x = x;
        let mut out = 0;
        let mut place = 1;
        while x > 0 {
            out += ((p - x % p) % p) * place;
            place *= p;
            x /= p;
        }
        out
    }

    pub fn sub(&self, x: Elem, y: Elem) -> Elem {
        self.add(x, self.neg(y))
    }

    /// Scalar multiple `c·x` with `c ∈ F_p`.
    pub fn scale(&self, c: u32, x: Elem) -> Elem {
        let p = self.p;
        let c = c % p;
        let mut x = x;
        let mut out = 0;
        let mut place = 1;
        while x > 0 {
            out += ((x % p) * c % p) * place;
            place *= p;
            x /= p;
        }
        out
    }

    pub fn mul(&self, x: Elem, y: Elem) -> Elem {
        if x == 0 || y == 0 {
            return 0;
        }
        match (&self.log, &self.antilog) {
            (Some(log), Some(antilog)) => {
                let n = self.order - 1;
                let e = (log[x as usize] as u64 + log[y as usize] as u64) % n as u64;
                antilog[e as usize]
            }
            _ => self.mul_poly(x, y),
        }
    }

    /// Schoolbook multiplication modulo the field modulus. Table-free.
    pub fn mul_poly(&self, x: Elem, y: Elem) -> Elem {
        let p = self.p as u64;
        let m = self.m as usize;
        let a = self.decode(x);
        let b = self.decode(y);
        let mut prod = vec![0u64; 2 * m - 1];
        for (i, &ai) in a.iter().enumerate() {
            if ai == 0 {
                continue;
            }
            for (j, &bj) in b.iter().enumerate() {
                prod[i + j] = (prod[i + j] + ai as u64 * bj as u64) % p;
            }
        }
        // x^m = -(c_{m-1} x^{m-1} + ... + c_0)
        for deg in (m..prod.len()).rev() {
            let lead = prod[deg];
            if lead == 0 {
                continue;
            }
            prod[deg] = 0;
            for (j, &c) in self.modulus[..m].iter().enumerate() {
                let idx = deg - m + j;
                prod[idx] = (prod[idx] + p * p - lead * c as u64 % p) % p;
            }
        }
        let coords: Vec<u32> = prod[..m].iter().map(|&c| c as u32).collect();
        self.encode(&coords)
    }

    pub fn pow(&self, x: Elem, mut e: u64) -> Elem {
        let mut base = x;
        let mut acc: Elem = 1;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    pub fn inv(&self, x: Elem) -> Option<Elem> {
        if x == 0 {
            return None;
        }
        Some(self.pow(x, self.order as u64 - 2))
    }

    /// `x^{p^i}`.
    pub fn frobenius(&self, x: Elem, i: u32) -> Elem {
        let mut y = x;
        for _ in 0..(i % self.m) {
            y = self.pow(y, self.p as u64);
        }
        y
    }

    /// Absolute trace `Tr(x) = Σ x^{p^i}` as a prime-field value.
    pub fn trace(&self, x: Elem) -> u32 {
        self.traces[x as usize]
    }

    /// Trace by explicit Frobenius summation.
    pub fn trace_frobenius(&self, x: Elem) -> u32 {
        let mut acc = 0;
        let mut y = x;
        for _ in 0..self.m {
            acc = self.add(acc, y);
            y = self.pow(y, self.p as u64);
        }
        debug_assert!(acc < self.p, "trace left the prime field");
        acc
    }

    /// Norm `x^{(p^m-1)/(p-1)}`, an element of `F_p`.
    pub fn norm(&self, x: Elem) -> u32 {
        let e = (self.order as u64 - 1) / (self.p as u64 - 1);
        self.pow(x, e)
    }

    /// Quadratic character `η` of `F_{p^m}`.
    pub fn quadratic_character(&self, x: Elem) -> i8 {
        if x == 0 {
            return 0;
        }
        let r = self.pow(x, (self.order as u64 - 1) / 2);
        if r == 1 {
            1
        } else {
            debug_assert_eq!(r, self.neg(1));
            -1
        }
    }

    pub fn multiplicative_order(&self, x: Elem) -> Option<u64> {
        if x == 0 {
            return None;
        }
        let n = self.order as u64 - 1;
        let mut ord = n;
        for r in prime_factors(n) {
            while ord.is_multiple_of(r) && self.pow(x, ord / r) == 1 {
                ord /= r;
            }
        }
        Some(ord)
    }

    /// Smallest encoding of multiplicative order `p^m - 1`.
    pub fn primitive_element(&self) -> Elem {
        self.primitive
    }

    fn find_primitive(&self) -> Elem {
        let n = self.order as u64 - 1;
        let factors = prime_factors(n);
        let pow_slow = |x: Elem, mut e: u64| {
            let (mut base, mut acc) = (x, 1);
            while e > 0 {
                if e & 1 == 1 {
                    acc = self.mul_poly(acc, base);
                }
                base = self.mul_poly(base, base);
                e >>= 1;
            }
            acc
        };
        (1..self.order)
            .find(|&x| factors.iter().all(|&r| pow_slow(x, n / r) != 1))
            .expect("a finite field has a primitive element")
    }

    /// Quadratic Gauss sum, evaluated directly and checked against the
    /// closed form.
    pub fn gauss_sum(&self) -> Result<GaussSumValue> {
        let p = self.p;
        let numeric = self
            .elements()
            .skip(1)
            .map(|x| {
                let angle = 2.0 * PI * self.trace(x) as f64 / p as f64;
                Complex64::from_polar(1.0, angle) * self.quadratic_character(x) as f64
            })
            .sum::<Complex64>();
        let sign = if self.m % 2 == 1 { 1 } else { -1 };
        let i_power = if p % 4 == 1 { 0 } else { (self.m % 4) as u8 };
        let value = GaussSumValue { p, m: self.m, sign, i_power, numeric };
        let expected = value.symbolic_numeric();
        let rel = (numeric - expected).norm() / expected.norm();
        if rel > 1e-9 {
            return Err(Error::InternalConsistency(format!(
                "Gauss sum over F_{{{p}^{}}}: direct {numeric} vs closed form {expected}",
                self.m
            )));
        }
        Ok(value)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f9_modulus_is_x2_plus_1() {
        let f = make_field(3, 2).unwrap();
        assert_eq!(f.modulus(), &[1, 0, 1]);
    }

    #[test]
    fn prime_field_modulus_is_x() {
        let f = make_field(3, 1).unwrap();
        assert_eq!(f.modulus(), &[0, 1]);
        assert_eq!(f.mul(2, 2), 1);
        assert_eq!(f.add(2, 2), 1);
    }

    #[test]
    fn f25_modulus_matches_root_scan() {
        // A quadratic is irreducible iff it has no root; first such in scan order.
        let p = 5u32;
        let expected = (0..p * p)
            .map(|idx| (idx % p, idx / p))
            .find(|&(c0, c1)| (0..p).all(|x| (x * x + c1 * x + c0) % p != 0))
            .unwrap();
        let f = make_field(5, 2).unwrap();
        assert_eq!(f.modulus(), &[expected.0, expected.1, 1]);
        assert_eq!(f.modulus(), &[2, 0, 1]);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(matches!(make_field(2, 3), Err(Error::InvalidParameter(_))));
        assert!(matches!(make_field(9, 1), Err(Error::InvalidParameter(_))));
        assert!(matches!(make_field(3, 0), Err(Error::InvalidParameter(_))));
        assert!(matches!(make_field(3, 8), Err(Error::CapacityExceeded(_))));
        assert!(FieldCtx::new(3, 8, 6561).is_ok());
    }

    #[test]
    fn f9_trace_values() {
        let f = make_field(3, 2).unwrap();
        let alpha = 3;
        assert_eq!(f.trace(0), 0);
        assert_eq!(f.trace(alpha), 0);
        assert_eq!(f.trace(1), 2);
    }

    #[test]
    fn quadratic_character_small_cases() {
        let f3 = make_field(3, 1).unwrap();
        assert_eq!(f3.quadratic_character(2), -1);
        assert_eq!(f3.quadratic_character(0), 0);
        let f9 = make_field(3, 2).unwrap();
        for z in 1..9 {
            let expect = if f9.pow(z, 4) == 1 { 1 } else { -1 };
            assert_eq!(f9.quadratic_character(z), expect);
        }
    }

    #[test]
    fn primitive_elements() {
        assert_eq!(make_field(3, 1).unwrap().primitive_element(), 2);
        assert_eq!(make_field(5, 1).unwrap().primitive_element(), 2);
        let f9 = make_field(3, 2).unwrap();
        // brute-force: smallest x whose powers hit all 8 nonzero elements
        let expected = (1..9u32)
            .find(|&x| {
                let mut seen = std::collections::HashSet::new();
                let mut y = 1;
                for _ in 0..8 {
                    y = f9.mul_poly(y, x);
                    seen.insert(y);
                }
                seen.len() == 8
            })
            .unwrap();
        assert_eq!(f9.primitive_element(), expected);
        assert_eq!(expected, 4);
    }

    #[test]
    fn gauss_sum_small_cases() {
        let g5 = make_field(5, 1).unwrap().gauss_sum().unwrap();
        assert!((g5.numeric - Complex64::new(5f64.sqrt(), 0.0)).norm() < 1e-9);
        let g3 = make_field(3, 1).unwrap().gauss_sum().unwrap();
        assert!((g3.numeric - Complex64::new(0.0, 3f64.sqrt())).norm() < 1e-9);
        let g9 = make_field(3, 2).unwrap().gauss_sum().unwrap();
        assert!((g9.numeric - Complex64::new(3.0, 0.0)).norm() < 1e-9);
    }

    #[test]
    fn encode_decode_round_trip() {
        let f = make_field(5, 3).unwrap();
        for x in f.elements() {
            assert_eq!(f.encode(&f.decode(x)), x);
        }
    }

    #[test]
    fn norm_lands_in_prime_field() {
        let f = make_field(3, 3).unwrap();
        for x in f.elements() {
            assert!(f.norm(x) < 3);
        }
    }
}
