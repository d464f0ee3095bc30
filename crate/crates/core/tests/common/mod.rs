#![allow(dead_code)]

use std::collections::BTreeMap;
use std::sync::Arc;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Pow, Zero};

use pncodes::field::{is_prime, FieldCtx};
use pncodes::pn::{build_pn, first_element_of_order, Family, PnFunction, PnParams};
use pncodes::report::{run_experiment, Check, ExperimentConfig, Report};
use pncodes::{Elem, WeightDistribution};

pub const LIMIT: u64 = 2187;

/// Every `(p, m)` with `p` odd prime and `p^m <= limit`.
pub fn all_fields(limit: u64) -> Vec<(u32, u32)> {
    let mut out = Vec::new();
    for p in (3..=limit).filter(|&p| is_prime(p)) {
        let mut q = p;
        let mut m = 1;
        while q <= limit {
            out.push((p as u32, m));
            q *= p;
            m += 1;
        }
    }
    out
}

pub fn field(p: u32, m: u32) -> Arc<FieldCtx> {
    Arc::new(FieldCtx::new(p, m, LIMIT).unwrap())
}

pub fn params() -> PnParams {
    PnParams::default()
}

pub fn with_k(k: u32) -> PnParams {
    PnParams { k: Some(k), ..Default::default() }
}

/// `k` in `0..m` with `m / gcd(m, k)` odd.
pub fn admissible_f1(m: u32) -> Vec<u32> {
    (0..m).filter(|&k| (m / gcd(m, k)) % 2 == 1).collect()
}

/// Odd `k` in `1..2m` coprime to `m`; `k` and `k + 2m` give the same map.
pub fn admissible_cm(m: u32) -> Vec<u32> {
    (1..2 * m).filter(|&k| k % 2 == 1 && gcd(m, k) == 1).collect()
}

pub fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// A spread of parameter choices for every family; the ones the catalog
/// admits are returned.
pub fn family_instances(ctx: &Arc<FieldCtx>) -> Vec<PnFunction> {
    let (p, m) = (ctx.p(), ctx.m());
    let xi = ctx.primitive_element();
    let mut cands: Vec<(Family, PnParams)> = Vec::new();
    for k in 0..m.max(1) {
        cands.push((Family::F1, with_k(k)));
        cands.push((Family::F1, PnParams { k: Some(k), scale: Some(xi), ..params() }));
    }
    if p == 3 {
        for k in 1..2 * m {
            cands.push((Family::F2Cm, with_k(k)));
        }
        for beta in [1, xi, ctx.pow(xi, 5)] {
            cands.push((Family::F3, PnParams { beta: Some(beta), ..params() }));
        }
    }
    if m % 3 == 0 {
        for k in 0..m {
            cands.push((Family::F4, PnParams { beta: Some(xi), k: Some(k), ..params() }));
        }
        let s = (m / 3) as u64;
        let p = p as u64;
        if let Some(beta) = first_element_of_order(ctx, p.pow(2 * s as u32) + p.pow(s as u32) + 1) {
            for t in 0..m {
                cands.push((Family::F7, PnParams { beta: Some(beta), t: Some(t), ..params() }));
            }
        }
    }
    if m % 2 == 0 {
        let s = m / 2;
        let mut unit = vec![0; s as usize];
        unit[0] = 1;
        for k in 1..m {
            for beta in [1, xi] {
                cands.push((
                    Family::F5,
                    PnParams { beta: Some(beta), k: Some(k), coeffs: unit.clone(), ..params() },
                ));
            }
            for t in 0..=k {
                for r in 1..4 {
                    cands.push((
                        Family::F6,
                        PnParams {
                            beta: Some(xi),
                            k: Some(k),
                            t: Some(t),
                            r: Some(r),
                            coeffs: vec![0; s as usize],
                            ..params()
                        },
                    ));
                }
            }
        }
    }
    if m % 4 == 0 {
        let s = m / 4;
        let pp = p as u64;
        let want = pp.pow(3 * s) + pp.pow(2 * s) + pp.pow(s) + 1;
        if let Some(beta) = first_element_of_order(ctx, want) {
            for t in 0..m {
                cands.push((Family::F8, PnParams { beta: Some(beta), t: Some(t), ..params() }));
            }
        }
    }
    cands.into_iter().filter_map(|(fam, prm)| build_pn(ctx, fam, prm).ok()).collect()
}

/// Planarity straight from the definition: every difference map is onto.
pub fn is_planar_oracle(f: &PnFunction) -> bool {
    let ctx = f.ctx();
    let q = ctx.order() as usize;
    let vals: Vec<Elem> = ctx.elements().map(|x| f.evaluate_direct(x)).collect();
    (1..q as Elem).all(|a| {
        let mut seen = vec![false; q];
        for x in ctx.elements() {
            let d = ctx.sub(vals[ctx.add(x, a) as usize], vals[x as usize]);
            if std::mem::replace(&mut seen[d as usize], true) {
                return false;
            }
        }
        true
    })
}

fn stirling2(n: usize, k: usize) -> BigInt {
    let mut s = vec![vec![BigInt::zero(); k + 1]; n + 1];
    s[0][0] = BigInt::one();
    for i in 1..=n {
        for j in 1..=k.min(i) {
            s[i][j] = BigInt::from(j) * &s[i - 1][j] + &s[i - 1][j - 1];
        }
    }
    s[n][k].clone()
}

fn binom(n: usize, k: usize) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    (0..k).fold(BigInt::one(), |acc, i| acc * BigInt::from(n - i) / BigInt::from(i + 1))
}

fn factorial(n: usize) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, i| acc * BigInt::from(i))
}

/// General power-moment identity
/// `Σ i^r A_i = Σ_{ν≤r} (-1)^ν A⊥_ν Σ_{j=ν}^{r} j! S(r,j) q^{k-j} (q-1)^{j-ν} C(n-ν, n-j)`,
/// for `r = 0..=4`, from the full dual distribution.
pub fn pless_oracle(primal: &WeightDistribution, dual: &WeightDistribution) -> bool {
    let (n, q, k) = (primal.n, primal.q as i64, primal.k as i64);
    let qr = |e: i64| -> BigRational {
        let qb = BigInt::from(q);
        if e >= 0 {
            BigRational::from_integer(qb.pow(e as u32))
        } else {
            BigRational::new(BigInt::one(), qb.pow((-e) as u32))
        }
    };
    (0..=4usize).all(|r| {
        let lhs: BigInt = primal
            .counts
            .iter()
            .map(|(&i, a)| BigInt::from(i).pow(r as u32) * BigInt::from(a.clone()))
            .sum();
        let mut rhs = BigRational::zero();
        for nu in 0..=r.min(n) {
            let a = BigInt::from(dual.count(nu));
            let sign = if nu % 2 == 0 { 1 } else { -1 };
            let mut inner = BigRational::zero();
            for j in nu..=r.min(n) {
                let t = factorial(j)
                    * stirling2(r, j)
                    * BigInt::from(q - 1).pow((j - nu) as u32)
                    * binom(n - nu, n - j);
                inner += BigRational::from_integer(t) * qr(k - j as i64);
            }
            rhs += BigRational::from_integer(a * sign) * inner;
        }
        BigRational::from_integer(lhs) == rhs
    })
}

pub fn config(p: u32, m: u32, family: Family) -> ExperimentConfig {
    ExperimentConfig::new(p, m, family)
}

pub fn run(cfg: &ExperimentConfig) -> Report {
    run_experiment(cfg).unwrap_or_else(|e| panic!("{cfg:?}: {e}"))
}

pub fn run_checks(cfg: ExperimentConfig, checks: &[Check]) -> Report {
    run(&cfg.with_checks(checks.iter().copied()))
}

/// Parse a printed enumerator `1+a x^{w}+…` (braces optional).
pub fn parse_enumerator(s: &str) -> Vec<(usize, BigUint)> {
    s.replace(['{', '}', ' ', '$'], "")
        .split('+')
        .map(|t| match t.split_once("x^") {
            Some((c, w)) => {
                let c = if c.is_empty() { BigUint::one() } else { c.parse().unwrap() };
                (w.parse().unwrap(), c)
            }
            None if t == "x" => (1, BigUint::one()),
            None => (0, t.parse().unwrap()),
        })
        .collect()
}

pub fn histogram(terms: &[(usize, BigUint)]) -> BTreeMap<usize, BigUint> {
    let mut out = BTreeMap::new();
    for (w, c) in terms {
        *out.entry(*w).or_insert_with(BigUint::zero) += c;
    }
    out
}

/// Euler's criterion in `F_p`.
pub fn eta_p(p: u32, c: u32) -> i8 {
    let c = c % p;
    if c == 0 {
        return 0;
    }
    let mut acc = 1u64;
    for _ in 0..(p - 1) / 2 {
        acc = acc * c as u64 % p as u64;
    }
    if acc == 1 {
        1
    } else {
        -1
    }
}

fn inv_p(p: u32, c: u32) -> u32 {
    (1..p).find(|&x| x as u64 * c as u64 % p as u64 == 1).unwrap()
}

/// Gram matrix of `x ↦ Tr(a f(x))` on the basis `p^i`, by polarization.
pub fn gram_by_polarization(f: &PnFunction, a: Elem) -> Vec<Vec<u32>> {
    let ctx = f.ctx();
    let (p, m) = (ctx.p(), ctx.m() as usize);
    let q = |x: Elem| ctx.trace(ctx.mul(a, f.evaluate_direct(x)));
    let basis: Vec<Elem> = (0..m).map(|i| p.pow(i as u32)).collect();
    let half = inv_p(p, 2);
    let mut g = vec![vec![0; m]; m];
    for i in 0..m {
        for j in 0..m {
            g[i][j] = if i == j {
                q(basis[i])
            } else {
                let s = q(ctx.add(basis[i], basis[j])) + 2 * p - q(basis[i]) - q(basis[j]);
                (s % p) * half % p
            };
        }
    }
    g
}

/// Determinant mod `p` by Gaussian elimination.
pub fn det_mod_p(mut a: Vec<Vec<u32>>, p: u32) -> u32 {
    let n = a.len();
    let pp = p as u64;
    let mut det = 1u64;
    for col in 0..n {
        let Some(piv) = (col..n).find(|&r| a[r][col] != 0) else { return 0 };
        if piv != col {
            a.swap(piv, col);
            det = (pp - det) % pp;
        }
        det = det * a[col][col] as u64 % pp;
        let inv = inv_p(p, a[col][col]) as u64;
        for r in col + 1..n {
            let factor = a[r][col] as u64 * inv % pp;
            for c in col..n {
                let v = (a[r][c] as u64 + pp * pp - factor * a[col][c] as u64 % pp) % pp;
                a[r][c] = v as u32;
            }
        }
    }
    det as u32
}

/// `N(a)` as the product of the conjugates of `a`.
pub fn norm_by_conjugates(ctx: &FieldCtx, a: Elem) -> Elem {
    (0..ctx.m()).fold(1, |acc, i| ctx.mul(acc, ctx.frobenius(a, i)))
}

/// The `N_{b,c}` multiplicities for a nondegenerate form with `η₀(det) = eta`.
pub fn closed_form_profile(p: u32, m: u32, eta: i8) -> BTreeMap<u64, u64> {
    let (pi, pm) = (p as i64, (p as i64).pow(m));
    let rows: Vec<(i64, i64)> = if m % 2 == 1 {
        let r = pi.pow((m - 1) / 2);
        let pm1 = pi.pow(m - 1);
        vec![(pm1, pm), (pm1 - r, (pi - 1) * pm / 2), (pm1 + r, (pi - 1) * pm / 2)]
    } else {
        let sign = if (m as i64 * (pi - 1) / 4) % 2 == 0 { 1 } else { -1 };
        let e0 = sign * eta as i64;
        let r = pi.pow((m - 2) / 2);
        let pm1 = pi.pow(m - 1);
        vec![(pm1 + e0 * (pi - 1) * r, pm), (pm1 - e0 * r, (pi - 1) * pm)]
    };
    let mut out = BTreeMap::new();
    for (n, times) in rows {
        *out.entry(n as u64).or_insert(0) += times as u64;
    }
    out
}

/// `N_{b,c}` histogram straight from the definition.
pub fn profile_by_definition(f: &PnFunction, a: Elem) -> BTreeMap<u64, u64> {
    let ctx = f.ctx();
    let p = ctx.p();
    let qx: Vec<u32> = ctx.elements().map(|x| ctx.trace(ctx.mul(a, f.evaluate_direct(x)))).collect();
    let mut out = BTreeMap::new();
    for b in ctx.elements() {
        let mut hist = vec![0u64; p as usize];
        for x in ctx.elements() {
            hist[((qx[x as usize] + ctx.trace(ctx.mul(b, x))) % p) as usize] += 1;
        }
        for n in hist {
            *out.entry(n).or_insert(0) += 1;
        }
    }
    out
}
