//! The known families of perfect nonlinear (planar) functions on `F_{p^m}`.
//!
//! Every family is stored as a sparse polynomial `Σ cᵢ x^{eᵢ}` whose exponents
//! are already reduced into `[1, p^m - 1]`, together with a full evaluation
//! table built once at construction.

use std::fmt;
use std::sync::Arc;

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::field::{mod_pow, Elem, FieldCtx};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    /// Dembowski–Ostrom `x^{p^k+1}`.
    F1,
    /// Coulter–Matthews `x^{(3^k+1)/2}`.
    #[serde(rename = "cm")]
    F2Cm,
    F3,
    F4,
    F5,
    F6,
    F7,
    F8,
    /// Arbitrary polynomial, never validated as PN.
    Raw,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Family::F1 => "f1",
            Family::F2Cm => "cm",
            Family::F3 => "f3",
            Family::F4 => "f4",
            Family::F5 => "f5",
            Family::F6 => "f6",
            Family::F7 => "f7",
            Family::F8 => "f8",
            Family::Raw => "raw",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for Family {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "f1" => Family::F1,
            "f2" | "cm" | "f2_cm" | "f2cm" => Family::F2Cm,
            "f3" => Family::F3,
            "f4" => Family::F4,
            "f5" => Family::F5,
            "f6" => Family::F6,
            "f7" => Family::F7,
            "f8" => Family::F8,
            "raw" => Family::Raw,
            other => return Err(format!("unknown family `{other}`")),
        })
    }
}

/// Family parameters. Which fields are read depends on the family:
///
/// | family | fields |
/// |--------|--------|
/// | F1, F2Cm | `k` |
/// | F3 | `beta` |
/// | F4 | `beta`, `k` (`s = m/3`) |
/// | F5 | `beta`, `k`, `coeffs = c_0..c_{s-1}` (`s = m/2`) |
/// | F6 | `beta`, `k`, `t`, `r`, `coeffs = w_0..w_{s-1}` (`s = m/2`) |
/// | F7 | `beta`, `t` (`s = m/3`) |
/// | F8 | `beta`, `t` (`s = m/4`) |
///
/// `scale`, when set, multiplies the whole function by a nonzero constant.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PnParams {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<Elem>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<u64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub coeffs: Vec<Elem>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scale: Option<Elem>,
}

/// One monomial `coeff · x^exp`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Term {
    pub coeff: Elem,
    pub exp: u64,
}

#[derive(Debug, Clone)]
pub struct PnFunction {
    family: Family,
    params: PnParams,
    ctx: Arc<FieldCtx>,
    terms: Vec<Term>,
    table: Vec<Elem>,
}

fn gcd(a: u64, b: u64) -> u64 {
    a.gcd(&b)
}

fn need<T: Copy>(v: Option<T>, name: &str, family: Family) -> Result<T> {
    v.ok_or_else(|| crate::Error::InvalidParameter(format!("{family} requires parameter `{name}`")))
}

/// Reduce a positive exponent into `[1, q-1]`; `x^e` is unchanged as a map.
fn reduce_exp(e: u64, q: u32) -> u64 {
    let n = q as u64 - 1;
    let r = e % n;
    if r == 0 {
        n
    } else {
        r
    }
}

/// Smallest element of the given multiplicative order.
pub fn first_element_of_order(ctx: &FieldCtx, order: u64) -> Option<Elem> {
    ctx.elements()
        .skip(1)
        .find(|&x| ctx.multiplicative_order(x) == Some(order))
}

fn is_permutation(ctx: &FieldCtx, map: impl Fn(Elem) -> Elem) -> bool {
    let mut seen = vec![false; ctx.order() as usize];
    for x in ctx.elements() {
        let y = map(x) as usize;
        if seen[y] {
            return false;
        }
        seen[y] = true;
    }
    true
}

/// `s` for families defined on `m = d·s`.
fn split_m(m: u32, d: u32, given: Option<u32>, family: Family) -> Result<u32> {
    if !m.is_multiple_of(d) {
        return invalid(format!("{family} requires m = {d}s, got m = {m}"));
    }
    let s = m / d;
    if let Some(g) = given {
        if g != s {
            return invalid(format!("{family}: s = {g} does not satisfy m = {d}s with m = {m}"));
        }
    }
    Ok(s)
}

pub fn build_pn(ctx: &Arc<FieldCtx>, family: Family, params: PnParams) -> Result<PnFunction> {
    let p = ctx.p() as u64;
    let m = ctx.m();
    let q = ctx.order();
    // p^{i mod m}: exact as a map on F_{p^m}
    let pp = |i: i64| -> u64 { p.pow(i.rem_euclid(m as i64) as u32) };
    let one: Elem = 1;

    let terms: Vec<Term> = match family {
        Family::F1 => {
            let k = need(params.k, "k", family)?;
            let g = gcd(m as u64, k as u64);
            if (m as u64 / g).is_multiple_of(2) {
                return invalid(format!("f1: m/gcd(m,k) = {} must be odd", m as u64 / g));
            }
            vec![Term { coeff: one, exp: pp(k as i64) + 1 }]
        }
        Family::F2Cm => {
            let k = need(params.k, "k", family)?;
            if p != 3 {
                return invalid(format!("cm requires p = 3, got p = {p}"));
            }
            if k % 2 == 0 {
                return invalid(format!("cm: k = {k} must be odd"));
            }
            if gcd(m as u64, k as u64) != 1 {
                return invalid(format!("cm: gcd(m,k) = {} must be 1", gcd(m as u64, k as u64)));
            }
            // (3^k + 1)/2 mod (q-1), via 3^k mod 2(q-1)
            let n = q as u64 - 1;
            let r = mod_pow(3, k as u64, 2 * n);
            vec![Term { coeff: one, exp: r.div_ceil(2) }]
        }
        Family::F3 => {
            let beta = need(params.beta, "beta", family)?;
            if p != 3 {
                return invalid(format!("f3 requires p = 3, got p = {p}"));
            }
            if m.is_multiple_of(2) {
                return invalid(format!("f3: m = {m} must be odd"));
            }
            if beta == 0 || !ctx.is_valid(beta) {
                return invalid("f3: beta must be a nonzero field element");
            }
            let minus = |x: Elem| ctx.neg(x);
            vec![
                Term { coeff: one, exp: 10 },
                Term { coeff: minus(beta), exp: 6 },
                Term { coeff: minus(ctx.mul(beta, beta)), exp: 2 },
            ]
        }
        Family::F4 => {
            let beta = need(params.beta, "beta", family)?;
            let k = need(params.k, "k", family)?;
            let s = split_m(m, 3, params.s, family)?;
            if !ctx.is_valid(beta) || ctx.multiplicative_order(beta) != Some(q as u64 - 1) {
                return invalid("f4: beta must be a primitive element");
            }
            if s % 3 == 0 {
                return invalid(format!("f4: gcd(3,s) must be 1, s = {s}"));
            }
            if (s as u64 / gcd(s as u64, k as u64)).is_multiple_of(2) {
                return invalid("f4: s/gcd(s,k) must be odd");
            }
            let minus_ok = (s as i64 - k as i64).rem_euclid(3) == 0;
            let plus_ok = (s as i64 + k as i64).rem_euclid(3) == 0;
            let l: i64 = match (minus_ok, plus_ok) {
                (true, false) => 1,
                (false, true) => -1,
                (false, false) => return invalid("f4: k must satisfy k ≡ ±s (mod 3)"),
                (true, true) => return invalid("f4: both l = 1 and l = -1 qualify; ambiguous"),
            };
            let ls = l * s as i64;
            vec![
                Term { coeff: beta, exp: pp(k as i64) + 1 },
                Term {
                    coeff: ctx.neg(ctx.frobenius(beta, s)),
                    exp: pp(ls) + pp(k as i64 - ls),
                },
            ]
        }
        Family::F5 => {
            let beta = need(params.beta, "beta", family)?;
            let k = need(params.k, "k", family)?;
            let s = split_m(m, 2, params.s, family)?;
            if k == 0 {
                return invalid("f5: k must be positive");
            }
            if gcd((s + k) as u64, 2 * s as u64) != gcd((s + k) as u64, s as u64) {
                return invalid("f5: gcd(s+k, 2s) must equal gcd(s+k, s)");
            }
            let ps1 = p.pow(s) + 1;
            let lhs = gcd((mod_pow(p, k as u64, ps1) + 1) % ps1, ps1);
            let half = ps1 / 2;
            let rhs = gcd((mod_pow(p, k as u64, half) + 1) % half, half);
            if lhs == rhs {
                return invalid("f5: gcd(p^k+1, p^s+1) must differ from gcd(p^k+1, (p^s+1)/2)");
            }
            if beta == 0 || !ctx.is_valid(beta) {
                return invalid("f5: beta must be a nonzero field element");
            }
            if params.coeffs.len() != s as usize || params.coeffs.iter().any(|&c| !ctx.is_valid(c)) {
                return invalid(format!("f5: expected {s} coefficients c_0..c_{{s-1}}"));
            }
            let lin = |x: Elem| {
                params.coeffs.iter().enumerate().fold(0, |acc, (i, &c)| {
                    ctx.add(acc, ctx.mul(c, ctx.frobenius(x, i as u32)))
                })
            };
            if !is_permutation(ctx, lin) {
                return invalid("f5: Σ c_i x^{p^i} must be a permutation polynomial");
            }
            // (βx)^{p^k+1} - ((βx)^{p^k+1})^{p^s}
            let b1 = ctx.pow(beta, pp(k as i64) + 1);
            let mut terms = vec![
                Term { coeff: b1, exp: pp(k as i64) + 1 },
                Term {
                    coeff: ctx.neg(ctx.frobenius(b1, s)),
                    exp: pp(k as i64 + s as i64) + pp(s as i64),
                },
            ];
            for (i, &c) in params.coeffs.iter().enumerate() {
                terms.push(Term { coeff: c, exp: pp(i as i64 + s as i64) + pp(i as i64) });
            }
            terms
        }
        Family::F6 => {
            let beta = need(params.beta, "beta", family)?;
            let k = need(params.k, "k", family)?;
            let t = need(params.t, "t", family)?;
            let r = need(params.r, "r", family)?;
            let s = split_m(m, 2, params.s, family)?;
            if k == 0 {
                return invalid("f6: k must be positive");
            }
            if t > k {
                return invalid("f6: requires t <= k so that p^{k-t} is an integer");
            }
            let in_subfield = |x: Elem| ctx.frobenius(x, s) == x;
            if params.coeffs.len() != s as usize
                || params.coeffs.iter().any(|&w| !ctx.is_valid(w) || !in_subfield(w))
            {
                return invalid(format!("f6: expected {s} coefficients w_i in F_{{p^s}}"));
            }
            if (m as u64 / gcd(m as u64, (k - t) as u64)).is_multiple_of(2) {
                return invalid("f6: m/gcd(m, t-k) must be odd");
            }
            if !ctx.is_valid(beta) || in_subfield(beta) {
                return invalid("f6: beta must lie in F_{p^m} \\ F_{p^s}");
            }
            let ps1 = p.pow(s) + 1;
            let g = gcd((mod_pow(p, (k - t) as u64, ps1) + 1) % ps1, ps1);
            if r % g == 0 {
                return invalid(format!("f6: gcd(p^(k-t)+1, p^s+1) = {g} must not divide r = {r}"));
            }
            let z = ctx.pow(ctx.primitive_element(), r);
            let (ki, ti, si) = (k as i64, t as i64, s as i64);
            let mut terms = vec![
                Term { coeff: beta, exp: pp(si) + 1 },
                Term { coeff: z, exp: pp(ki) + pp(ti) },
                Term { coeff: ctx.frobenius(z, s), exp: pp(ki + si) + pp(si + ti) },
            ];
            for (i, &w) in params.coeffs.iter().enumerate() {
                terms.push(Term { coeff: w, exp: pp(i as i64 + si) + pp(i as i64) });
            }
            terms
        }
        Family::F7 => {
            let beta = need(params.beta, "beta", family)?;
            let t = need(params.t, "t", family)?;
            let s = split_m(m, 3, params.s, family)?;
            let g = gcd(s as u64, t as u64);
            let (s1, t1) = (s as u64 / g, t as u64 / g);
            if s1 % 2 == 0 {
                return invalid("f7: s/gcd(s,t) must be odd");
            }
            let want = p.pow(2 * s) + p.pow(s) + 1;
            if !ctx.is_valid(beta) || ctx.multiplicative_order(beta) != Some(want) {
                return invalid(format!("f7: ord(beta) must be p^2s + p^s + 1 = {want}"));
            }
            // The second branch is read as p^s ≡ p^t ≡ 1 (mod 3); with
            // p^s ≡ p^t ≡ 0 or 2 the binomial need not be planar.
            let both_one = mod_pow(p, s as u64, 3) == 1 && mod_pow(p, t as u64, 3) == 1;
            if (t1 + s1) % 3 != 0 && !both_one {
                return invalid("f7: need t'+s' ≡ 0 (mod 3) or p^s ≡ p^t ≡ 1 (mod 3)");
            }
            let (ti, si) = (t as i64, s as i64);
            vec![
                Term { coeff: one, exp: pp(ti) + 1 },
                Term { coeff: ctx.neg(beta), exp: pp(2 * si) + pp(si + ti) },
            ]
        }
        Family::F8 => {
            let beta = need(params.beta, "beta", family)?;
            let t = need(params.t, "t", family)?;
            let s = split_m(m, 4, params.s, family)?;
            if (2 * s as u64 / gcd(2 * s as u64, t as u64)).is_multiple_of(2) {
                return invalid("f8: 2s/gcd(2s,t) must be odd");
            }
            if mod_pow(p, s as u64, 4) != 1 || mod_pow(p, t as u64, 4) != 1 {
                return invalid("f8: need p^s ≡ p^t ≡ 1 (mod 4)");
            }
            let want = p.pow(3 * s) + p.pow(2 * s) + p.pow(s) + 1;
            if !ctx.is_valid(beta) || ctx.multiplicative_order(beta) != Some(want) {
                return invalid(format!("f8: ord(beta) must be p^3s + p^2s + p^s + 1 = {want}"));
            }
            let (ti, si) = (t as i64, s as i64);
            vec![
                Term { coeff: one, exp: pp(ti) + 1 },
                Term { coeff: ctx.neg(beta), exp: pp(3 * si) + pp(ti + si) },
            ]
        }
        Family::Raw => return invalid("use PnFunction::raw for unvalidated polynomials"),
    };

    let terms = match params.scale {
        None => terms,
        Some(c) if c != 0 && ctx.is_valid(c) => terms
            .into_iter()
            .map(|t| Term { coeff: ctx.mul(c, t.coeff), exp: t.exp })
            .collect(),
        Some(_) => return invalid("scale must be a nonzero field element"),
    };
    Ok(PnFunction::assemble(ctx.clone(), family, params, terms))
}

impl PnFunction {
    /// An arbitrary polynomial, bypassing all family validation. Marked as
    /// [`Family::Raw`]; only useful as a negative control.
    pub fn raw(ctx: &Arc<FieldCtx>, terms: Vec<Term>) -> Self {
        PnFunction::assemble(ctx.clone(), Family::Raw, PnParams::default(), terms)
    }

    fn assemble(ctx: Arc<FieldCtx>, family: Family, params: PnParams, terms: Vec<Term>) -> Self {
        let q = ctx.order();
        let terms: Vec<Term> = terms
            .into_iter()
            .filter(|t| t.coeff != 0 && t.exp > 0)
            .map(|t| Term { coeff: t.coeff, exp: reduce_exp(t.exp, q) })
            .collect();
        let mut f = PnFunction { family, params, ctx, terms, table: Vec::new() };
        f.table = f.ctx.elements().map(|x| f.evaluate_direct(x)).collect();
        f
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn params(&self) -> &PnParams {
        &self.params
    }

    pub fn ctx(&self) -> &Arc<FieldCtx> {
        &self.ctx
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn table(&self) -> &[Elem] {
        &self.table
    }

    pub fn evaluate(&self, x: Elem) -> Elem {
        self.table[x as usize]
    }

    /// Per-point evaluation by square-and-multiply, ignoring the table.
    pub fn evaluate_direct(&self, x: Elem) -> Elem {
        self.terms.iter().fold(0, |acc, t| {
            self.ctx.add(acc, self.ctx.mul(t.coeff, self.ctx.pow(x, t.exp)))
        })
    }

    /// Whether this is a Dembowski–Ostrom polynomial, i.e. every exponent is
    /// `p^i + p^j`. The Coulter–Matthews family is never treated as DO.
    pub fn is_do(&self) -> bool {
        if self.family == Family::F2Cm {
            return false;
        }
        let p = self.ctx.p() as u64;
        self.terms.iter().all(|t| {
            let mut e = t.exp;
            let mut weight = 0;
            while e > 0 {
                weight += e % p;
                e /= p;
            }
            weight == 2
        })
    }

    /// Exhaustive planarity check: every nonzero shift gives a bijective
    /// difference map.
    pub fn verify_pn(&self) -> bool {
        let ctx = &*self.ctx;
        let q = ctx.order() as usize;
        let mut seen = vec![0u32; q];
        for a in 1..ctx.order() {
            for x in ctx.elements() {
                let d = ctx.sub(self.evaluate(ctx.add(x, a)), self.evaluate(x)) as usize;
                if seen[d] == a {
                    return false;
                }
                seen[d] = a;
            }
        }
        true
    }

    /// Short human-readable description.
    pub fn describe(&self) -> String {
        let body = self
            .terms
            .iter()
            .map(|t| {
                if t.coeff == 1 {
                    format!("x^{}", t.exp)
                } else {
                    format!("[{}]x^{}", t.coeff, t.exp)
                }
            })
            .collect::<Vec<_>>()
            .join(" + ");
        format!("{}: {}", self.family, body)
    }
}
