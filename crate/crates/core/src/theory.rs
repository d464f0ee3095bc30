//! Closed-form weight distributions, power-moment identities, and the two
//! optimality bounds. All arithmetic here is exact.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Pow, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::code::{CodeParams, WeightDistribution};
use crate::error::{invalid, Error, Result};
use crate::field::{is_prime, prime_factors, Elem, FieldCtx};
use crate::pn::{build_pn, Family, PnParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PredictionSource {
    /// PN-DO function, `m` odd.
    PnDoOdd,
    /// PN-DO function, `m` even (depends on `ε`).
    PnDoEven,
    /// Coulter–Matthews function, `m` odd.
    CmOdd,
    /// Coulter–Matthews function, `m` even.
    CmEven,
    /// PN-DO code with the last coordinate deleted.
    PnDoPunctured,
    /// Coulter–Matthews code with the last coordinate deleted.
    CmPunctured,
}

impl fmt::Display for PredictionSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self).unwrap();
        f.write_str(s.as_str().unwrap())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PuncturedKind {
    PnDo,
    Cm,
}

/// One instantiated table row before merging.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Row {
    pub weight: i64,
    pub count: BigInt,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Prediction {
    pub source: PredictionSource,
    pub p: u32,
    pub m: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<i8>,
    pub distribution: WeightDistribution,
    /// Claimed parameters of the dual code.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dual_claim: Option<CodeParams>,
    /// Claimed number of weight-4 dual codewords.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dual_a4: Option<BigUint>,
    /// Set when the dual claim does not apply (e.g. the dual is the zero code).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub degenerate: Option<String>,
}

fn pow(b: i64, e: u32) -> BigInt {
    BigInt::from(b).pow(e)
}

fn check_pm(p: u32, m: u32) -> Result<()> {
    if p == 2 || !is_prime(p as u64) {
        return invalid(format!("p = {p} must be an odd prime"));
    }
    if m == 0 {
        return invalid("m must be positive");
    }
    Ok(())
}

/// Merge rows (colliding weights are summed) and check the result is a
/// distribution of `total` words of length `n`.
fn merge_rows(rows: Vec<Row>, n: usize, q: u32, k: u32) -> Result<WeightDistribution> {
    let mut merged: BTreeMap<i64, BigInt> = BTreeMap::new();
    for r in rows {
        *merged.entry(r.weight).or_default() += r.count;
    }
    let mut counts = BTreeMap::new();
    for (w, c) in merged {
        if c.is_negative() {
            return Err(Error::InternalConsistency(format!("negative count {c} at weight {w}")));
        }
        if c.is_zero() {
            continue;
        }
        if w < 0 || w as usize > n {
            return Err(Error::InternalConsistency(format!("weight {w} outside [0, {n}]")));
        }
        counts.insert(w as usize, c.to_biguint().unwrap());
    }
    let wd = WeightDistribution { n, k, q, counts };
    wd.validate().map_err(|e| Error::InternalConsistency(format!("prediction: {e}")))?;
    Ok(wd)
}

/// Half of an even integer; odd input means a transcription error.
fn half(v: BigInt) -> Result<BigInt> {
    if (&v % 2u32).is_zero() {
        Ok(v / 2)
    } else {
        Err(Error::InternalConsistency(format!("{v} is not even")))
    }
}

fn sign_m_p(p: u32, m: u32) -> i64 {
    crate::quadform::sign_m_p(p, m)
}

/// Weight distribution of `C_f` for a PN-DO `f`. `epsilon` is required for
/// even `m` and ignored for odd `m`.
pub fn predict_pn_do(p: u32, m: u32, epsilon: Option<i8>) -> Result<Prediction> {
    check_pm(p, m)?;
    let pi = p as i64;
    let pm = pow(pi, m);
    let pm1 = pow(pi, m - 1);
    let base: BigInt = (pi - 1) * &pm1;
    let n = pm.to_usize().unwrap() + 1;
    let mut rows = vec![
        Row { weight: 0, count: BigInt::one() },
        Row { weight: pm.to_i64().unwrap(), count: BigInt::from(pi - 1) },
    ];
    let (source, eps) = if m % 2 == 1 {
        let r = pow(pi, (m - 1) / 2);
        rows.push(Row {
            weight: (&base + 1i64).to_i64().unwrap(),
            count: (&pm - &pm1) * &pm,
        });
        rows.push(Row {
            weight: base.to_i64().unwrap(),
            count: pi * (&pm - 1) + &pm * (&pm1 - 1),
        });
        for sgn in [1i64, -1] {
            rows.push(Row {
                weight: (&base + sgn * &r + 1i64).to_i64().unwrap(),
                count: half((&pm - &pm1) * (pi - 1) * &pm)?,
            });
            rows.push(Row {
                weight: (&base + sgn * &r).to_i64().unwrap(),
                count: half((&pm1 - 1) * (pi - 1) * &pm)?,
            });
        }
        (PredictionSource::PnDoOdd, None)
    } else {
        let e = match epsilon {
            Some(e @ (1 | -1)) => e as i64,
            Some(other) => return invalid(format!("epsilon must be ±1, got {other}")),
            None => return invalid("epsilon is required for even m"),
        };
        let s = sign_m_p(p, m);
        let r = pow(pi, (m - 2) / 2);
        let spread = (pi - 1) * &r * s;
        rows.push(Row { weight: base.to_i64().unwrap(), count: pi * (&pm - 1) });
        for sgn in [1i64, -1] {
            let er = sgn * e * &r;
            // (p-1)(p^{m-1} ± εr) + 1
            rows.push(Row {
                weight: ((pi - 1) * (&pm1 + &er) + 1i64).to_i64().unwrap(),
                count: half((&pm - &pm1 - sgn * &spread) * &pm)?,
            });
            // (p-1)p^{m-1} ± εr + 1
            rows.push(Row {
                weight: (&base + &er + 1i64).to_i64().unwrap(),
                count: half((&pm - &pm1 + sgn * &spread) * (pi - 1) * &pm)?,
            });
            // (p-1)(p^{m-1} ± εr)
            rows.push(Row {
                weight: ((pi - 1) * (&pm1 + &er)).to_i64().unwrap(),
                count: half((&pm1 - 1 + sgn * &spread) * &pm)?,
            });
            // (p-1)p^{m-1} ± εr
            rows.push(Row {
                weight: (&base + &er).to_i64().unwrap(),
                count: half((&pm1 - 1 - sgn * &spread) * (pi - 1) * &pm)?,
            });
        }
        (PredictionSource::PnDoEven, Some(e as i8))
    };
    let distribution = merge_rows(rows, n, p, 2 * m + 1)?;
    Ok(Prediction {
        source,
        p,
        m,
        epsilon: eps,
        distribution,
        dual_claim: Some(CodeParams { n, k: n as u32 - 2 * m - 1, d: 4 }),
        dual_a4: None,
        degenerate: None,
    })
}

/// Weight distribution of `C_f` for the Coulter–Matthews function over
/// `F_{3^m}`.
pub fn predict_cm(m: u32) -> Result<Prediction> {
    check_pm(3, m)?;
    let pm = pow(3, m);
    let pm1 = pow(3, m - 1);
    let two_pm1: BigInt = 2 * &pm1;
    let n = pm.to_usize().unwrap() + 1;
    let w = |v: BigInt| v.to_i64().unwrap();
    let mut rows = vec![
        Row { weight: 0, count: BigInt::one() },
        Row { weight: w(pm.clone()), count: BigInt::from(2) },
    ];
    let source = if m % 2 == 1 {
        let r = pow(3, (m - 1) / 2);
        rows.push(Row { weight: w(two_pm1.clone()), count: pow(3, 2 * m - 1) + 2i64 * &pm - 3i64 });
        rows.push(Row { weight: w(&two_pm1 + 1i64), count: (&pm - &pm1) * &pm });
        for sgn in [1i64, -1] {
            rows.push(Row { weight: w(&two_pm1 + sgn * &r), count: (&pm1 - 1) * &pm });
            rows.push(Row { weight: w(&two_pm1 + sgn * &r + 1i64), count: (&pm - &pm1) * &pm });
        }
        PredictionSource::CmOdd
    } else {
        let r = pow(3, (m - 2) / 2);
        let big = pow(3, (3 * m - 2) / 2);
        let p2m1 = pow(3, 2 * m - 1);
        rows.push(Row { weight: w(two_pm1.clone()), count: 3i64 * (&pm - 1i64) });
        for sgn in [1i64, -1] {
            let sr = sgn * &r;
            rows.push(Row {
                weight: w(2 * (&pm1 + &sr)),
                count: half(&p2m1 - &pm)? - sgn * &big,
            });
            rows.push(Row { weight: w(2i64 * (&pm1 + &sr) + 1i64), count: &p2m1 + sgn * &big });
            rows.push(Row { weight: w(&two_pm1 + &sr), count: &p2m1 - &pm + sgn * 2i64 * &big });
            rows.push(Row { weight: w(&two_pm1 + &sr + 1i64), count: 2i64 * (&p2m1 - sgn * &big) });
        }
        PredictionSource::CmEven
    };
    let distribution = merge_rows(rows, n, 3, 2 * m + 1)?;
    let a4 = if m.is_multiple_of(2) { 4i64 * &pm1 } else { 2i64 * &pm1 };
    Ok(Prediction {
        source,
        p: 3,
        m,
        epsilon: None,
        distribution,
        dual_claim: Some(CodeParams { n, k: n as u32 - 2 * m - 1, d: 4 }),
        dual_a4: Some(a4.to_biguint().unwrap()),
        degenerate: None,
    })
}

/// Weight distribution of the punctured code (last coordinate deleted).
pub fn predict_punctured(p: u32, m: u32, kind: PuncturedKind) -> Result<Prediction> {
    check_pm(p, m)?;
    if kind == PuncturedKind::Cm && p != 3 {
        return invalid("the Coulter–Matthews family needs p = 3");
    }
    let pi = p as i64;
    let pm = pow(pi, m);
    let pm1 = pow(pi, m - 1);
    let n = pm.to_usize().unwrap();
    let base: BigInt = (pi - 1) * &pm1;
    let w = |v: BigInt| v.to_i64().unwrap();
    let mut rows = vec![
        Row { weight: 0, count: BigInt::one() },
        Row { weight: w(pm.clone()), count: BigInt::from(pi - 1) },
    ];
    if m % 2 == 1 {
        let r = pow(pi, (m - 1) / 2);
        let (centre, spread) = match kind {
            PuncturedKind::PnDo => ((&pm - 1) * (&pm1 + 1) * pi, half((&pm - 1) * &pm * (pi - 1))?),
            PuncturedKind::Cm => ((&pm - 1) * (&pm + 3), (&pm - 1) * &pm),
        };
        rows.push(Row { weight: w(base.clone()), count: centre });
        for sgn in [1i64, -1] {
            rows.push(Row { weight: w(&base + sgn * &r), count: spread.clone() });
        }
    } else {
        let r = pow(pi, (m - 2) / 2);
        let (centre, outer, inner) = match kind {
            PuncturedKind::PnDo => (
                (&pm - 1) * pi,
                half((&pm - 1) * &pm)?,
                half((&pm - 1) * (pi - 1) * &pm)?,
            ),
            PuncturedKind::Cm => (pow(3, m + 1) - 3, half((&pm - 1) * &pm)?, (&pm - 1) * &pm),
        };
        rows.push(Row { weight: w(base.clone()), count: centre });
        for sgn in [1i64, -1] {
            rows.push(Row { weight: w(&base + sgn * (pi - 1) * &r), count: outer.clone() });
            rows.push(Row { weight: w(&base + sgn * &r), count: inner.clone() });
        }
    }
    let distribution = merge_rows(rows, n, p, 2 * m + 1)?;
    let (dual_claim, degenerate) = match kind {
        PuncturedKind::Cm => (None, None),
        PuncturedKind::PnDo if p == 3 && m == 1 => {
            (None, Some("[3,3,1] code; its dual is the zero code".to_string()))
        }
        PuncturedKind::PnDo => {
            let d = if p == 3 { 5 } else { 4 };
            (Some(CodeParams { n, k: n as u32 - 2 * m - 1, d }), None)
        }
    };
    Ok(Prediction {
        source: match kind {
            PuncturedKind::PnDo => PredictionSource::PnDoPunctured,
            PuncturedKind::Cm => PredictionSource::CmPunctured,
        },
        p,
        m,
        epsilon: None,
        distribution,
        dual_claim,
        dual_a4: None,
        degenerate,
    })
}

/// Residuals of the first five power-moment identities.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlessCheck {
    /// `Σ i^j A_i − RHS_j` for `j = 0..=4`.
    pub residuals: [BigRational; 5],
}

impl PlessCheck {
    pub fn holds(&self) -> bool {
        self.residuals.iter().all(Zero::is_zero)
    }
}

/// Evaluate the first five Pless power-moment identities for a primal
/// distribution and the dual's `A⊥_1..A⊥_4`.
pub fn pless_verify(primal: &WeightDistribution, dual_a: &[BigUint; 4]) -> PlessCheck {
    let p = BigInt::from(primal.q);
    let n = BigInt::from(primal.n);
    let [a1, a2, a3, a4] = dual_a.clone().map(BigInt::from);
    let one = BigInt::one();
    let (p2, p3) = (&p * &p, &p * &p * &p);
    let (n2, n3) = (&n * &n, &n * &n * &n);
    let c = |v: i64| BigInt::from(v);

    let b0 = one.clone();
    let b1 = &p * &n - &n - &a1;
    let b2 = (&p - 1) * &n * (&p * &n - &n + 1) - (c(2) * &p * &n - &p - c(2) * &n + 2) * &a1
        + c(2) * &a2;
    let b3 = (&p - 1) * &n * (&p2 * &n2 - c(2) * &p * &n2 + c(3) * &p * &n - &p + &n2 - c(3) * &n + 2)
        - (c(3) * &p2 * &n2 - c(3) * &p2 * &n - c(6) * &p * &n2 + c(12) * &p * &n + &p2 - c(6) * &p
            + c(3) * &n2
            - c(9) * &n
            + 6)
            * &a1
        + c(6) * (&p * &n - &p - &n + 2) * &a2
        - c(6) * &a3;
    let b4 = (&p - 1)
        * &n
        * (&p3 * &n3 - c(3) * &p2 * &n3 + c(6) * &p2 * &n2 - c(4) * &p2 * &n + &p2 + c(3) * &p * &n3
            - c(12) * &p * &n2
            + c(15) * &p * &n
            - c(6) * &p
            - &n3
            + c(6) * &n2
            - c(11) * &n
            + 6)
        - (c(4) * &p3 * &n3 - c(6) * &p3 * &n2 + c(4) * &p3 * &n - &p3 - c(12) * &p2 * &n3
            + c(36) * &p2 * &n2
            - c(38) * &p2 * &n
            + c(14) * &p2
            + c(12) * &p * &n3
            - c(54) * &p * &n2
            + c(78) * &p * &n
            - c(36) * &p
            - c(4) * &n3
            + c(24) * &n2
            - c(44) * &n
            + 24)
            * &a1
        + (c(12) * &p2 * &n2 - c(24) * &p2 * &n + c(14) * &p2 - c(24) * &p * &n2 + c(84) * &p * &n
            - c(72) * &p
            + c(12) * &n2
            - c(60) * &n
            + 72)
            * &a2
        - (c(24) * &p * &n - c(36) * &p - c(24) * &n + 72) * &a3
        + c(24) * &a4;

    let brackets = [b0, b1, b2, b3, b4];
    let k = primal.k as i64;
    let residuals = std::array::from_fn(|j| {
        let moment: BigInt = primal
            .counts
            .iter()
            .map(|(&i, a)| BigInt::from(i).pow(j as u32) * BigInt::from(a.clone()))
            .sum();
        let e = k - j as i64;
        let scale = if e >= 0 {
            BigRational::from_integer(p.clone().pow(e as u32))
        } else {
            BigRational::new(one.clone(), p.clone().pow((-e) as u32))
        };
        BigRational::from_integer(moment) - scale * BigRational::from_integer(brackets[j].clone())
    });
    PlessCheck { residuals }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bound {
    SpherePacking,
    /// `A_q(n, d) ≤ q^{t+2r} / Σ_{i≤r} C(t+2r, i)(q−1)^i`.
    Rouayheb,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    /// The parameters pass and `[n, k, d+1]` is ruled out.
    Optimal,
    RuledOut,
    Inconclusive,
}

/// Verdict plus the compared quantities, as decimal strings.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BoundVerdict {
    pub bound: Bound,
    pub n: usize,
    pub k: u32,
    pub d: usize,
    pub q: u32,
    pub verdict: Verdict,
    /// Size the bound demands (`q^k · ball` or `q^k`).
    pub lhs: String,
    /// Size the bound allows (`q^n` or the bound value).
    pub rhs: String,
    /// Largest `d'` for which `[n, k, d']` passes.
    pub max_d: usize,
}

fn is_prime_power(q: u32) -> bool {
    let f = prime_factors(q as u64);
    f.len() == 1
}

pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    acc
}

/// `Σ_{i≤t} C(n, i)(q−1)^i`.
pub fn hamming_ball(n: u64, t: u64, q: u32) -> BigUint {
    let qm1 = BigUint::from(q - 1);
    (0..=t.min(n)).map(|i| binomial(n, i) * qm1.clone().pow(i as u32)).sum()
}

fn sphere_packing_passes(n: usize, k: u32, d: usize, q: u32) -> (bool, BigUint, BigUint) {
    let t = ((d - 1) / 2) as u64;
    let lhs = BigUint::from(q).pow(k) * hamming_ball(n as u64, t, q);
    let rhs = BigUint::from(q).pow(n as u32);
    (lhs <= rhs, lhs, rhs)
}

pub fn sphere_packing_check(n: usize, k: u32, d: usize, q: u32) -> Result<BoundVerdict> {
    if n == 0 || k == 0 || d == 0 {
        return invalid("n, k, d must be positive");
    }
    if !is_prime_power(q) {
        return invalid(format!("q = {q} is not a prime power"));
    }
    let (passes, lhs, rhs) = sphere_packing_passes(n, k, d, q);
    let max_d = (1..=n)
        .take_while(|&dd| sphere_packing_passes(n, k, dd, q).0)
        .last()
        .unwrap_or(0);
    let verdict = if !passes {
        Verdict::RuledOut
    } else if d == max_d && d < n {
        Verdict::Optimal
    } else {
        Verdict::Inconclusive
    };
    Ok(BoundVerdict {
        bound: Bound::SpherePacking,
        n,
        k,
        d,
        q,
        verdict,
        lhs: lhs.to_string(),
        rhs: rhs.to_string(),
        max_d,
    })
}

/// Upper bound on the size of any `q`-ary code of length `n` and minimum
/// distance `d`, for `q ≥ 3`.
pub fn rouayheb_bound(q: u32, n: usize, d: usize) -> Result<BigRational> {
    if q < 3 {
        return invalid("the bound needs q >= 3");
    }
    if d == 0 || d > n {
        return invalid(format!("need 1 <= d <= n, got d = {d}, n = {n}"));
    }
    let t = (n - d + 1) as u64;
    let r = ((n as u64 - t) / 2).min((t - 1) / (q as u64 - 2));
    let numer = BigUint::from(q).pow((t + 2 * r) as u32);
    let denom = hamming_ball(t + 2 * r, r, q);
    Ok(BigRational::new(numer.into(), denom.into()))
}

pub fn rouayheb_check(n: usize, k: u32, d: usize, q: u32) -> Result<BoundVerdict> {
    let size = BigRational::from_integer(BigUint::from(q).pow(k).into());
    let bound = rouayheb_bound(q, n, d)?;
    let passes = |dd: usize| -> Result<bool> { Ok(size <= rouayheb_bound(q, n, dd)?) };
    let mut max_d = 0;
    for dd in 1..=n {
        if passes(dd)? {
            max_d = dd;
        } else {
            break;
        }
    }
    let verdict = if size > bound {
        Verdict::RuledOut
    } else if d < n && !passes(d + 1)? {
        Verdict::Optimal
    } else {
        Verdict::Inconclusive
    };
    Ok(BoundVerdict {
        bound: Bound::Rouayheb,
        n,
        k,
        d,
        q,
        verdict,
        lhs: size.to_string(),
        rhs: bound.to_string(),
        max_d,
    })
}

fn cm_function(ctx: &std::sync::Arc<FieldCtx>, k: u32) -> Result<crate::pn::PnFunction> {
    build_pn(ctx, Family::F2Cm, PnParams { k: Some(k), ..Default::default() })
}

/// `N_u` for every `u`, by enumerating `(x, y)` with `z = −x−y`.
pub fn nu_profile(ctx: &std::sync::Arc<FieldCtx>, k: u32) -> Result<Vec<u64>> {
    let f = cm_function(ctx, k)?;
    let mut counts = vec![0u64; ctx.order() as usize];
    for x in ctx.elements() {
        for y in ctx.elements() {
            let z = ctx.neg(ctx.add(x, y));
            let s = ctx.add(ctx.add(f.evaluate(x), f.evaluate(y)), f.evaluate(z));
            // s + u = 0
            counts[ctx.neg(s) as usize] += 1;
        }
    }
    Ok(counts)
}

/// Predicted `N_u`: `3^m`, `2·3^m`, or `0` as `u` is zero, a square, or not.
pub fn nu_predicted(ctx: &FieldCtx, u: Elem) -> u64 {
    let q = ctx.order() as u64;
    match ctx.quadratic_character(u) {
        0 => q,
        1 => 2 * q,
        _ => 0,
    }
}

/// Number of `(x, y, z)` with `x+y+z = 0` and `f(x)+f(y)+f(z)+u = 0` for the
/// Coulter–Matthews `f`, checked against the prediction.
pub fn nu_count(ctx: &std::sync::Arc<FieldCtx>, k: u32, u: Elem) -> Result<u64> {
    if !ctx.is_valid(u) {
        return invalid(format!("u = {u} is not a field element"));
    }
    let f = cm_function(ctx, k)?;
    let mut count = 0;
    for x in ctx.elements() {
        for y in ctx.elements() {
            let z = ctx.neg(ctx.add(x, y));
            let s = ctx.add(ctx.add(f.evaluate(x), f.evaluate(y)), f.evaluate(z));
            if ctx.add(s, u) == 0 {
                count += 1;
            }
        }
    }
    let want = nu_predicted(ctx, u);
    if count != want {
        return Err(Error::InternalConsistency(format!("N_u for u = {u}: counted {count}, predicted {want}")));
    }
    Ok(count)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::make_field;
    use std::sync::Arc;

    #[test]
    fn pn_do_even_matches_known_enumerators() {
        let p = predict_pn_do(3, 2, Some(1)).unwrap();
        assert_eq!(p.distribution.enumerator_string(), "1+18x^4+18x^5+96x^6+36x^7+36x^8+38x^9");
        let p = predict_pn_do(5, 2, Some(-1)).unwrap();
        assert_eq!(
            p.distribution.enumerator_string(),
            "1+100x^16+200x^17+1320x^20+400x^21+800x^22+304x^25"
        );
    }

    #[test]
    fn pn_do_odd_matches_known_enumerator() {
        let p = predict_pn_do(3, 3, None).unwrap();
        assert_eq!(
            p.distribution.enumerator_string(),
            "1+216x^15+486x^16+294x^18+486x^19+216x^21+486x^22+2x^27"
        );
        assert_eq!(p.dual_claim, Some(CodeParams { n: 28, k: 21, d: 4 }));
    }

    #[test]
    fn epsilon_required_for_even_m() {
        assert!(predict_pn_do(3, 2, None).is_err());
        assert!(predict_pn_do(3, 2, Some(0)).is_err());
    }

    #[test]
    fn cm_tables() {
        let p = predict_cm(2).unwrap();
        assert_eq!(p.distribution.enumerator_string(), "1+18x^4+18x^5+96x^6+36x^7+36x^8+38x^9");
        assert_eq!(p.dual_a4, Some(BigUint::from(12u32)));
        let p = predict_cm(3).unwrap();
        assert_eq!(p.distribution, predict_pn_do(3, 3, None).unwrap().distribution);
        assert_eq!(p.dual_a4, Some(BigUint::from(18u32)));
    }

    #[test]
    fn punctured_tables() {
        let p = predict_punctured(5, 2, PuncturedKind::PnDo).unwrap();
        assert_eq!(
            p.distribution.enumerator_string(),
            "1+300x^16+1200x^19+120x^20+1200x^21+300x^24+4x^25"
        );
        let p = predict_punctured(3, 3, PuncturedKind::PnDo).unwrap();
        assert_eq!(p.distribution.enumerator_string(), "1+702x^15+780x^18+702x^21+2x^27");
        assert_eq!(p.dual_claim, Some(CodeParams { n: 27, k: 20, d: 5 }));
        let p = predict_punctured(3, 1, PuncturedKind::PnDo).unwrap();
        assert!(p.degenerate.is_some());
        assert!(predict_punctured(5, 3, PuncturedKind::Cm).is_err());
        let cm = predict_punctured(3, 3, PuncturedKind::Cm).unwrap();
        assert_eq!(cm.distribution.count(18), BigUint::from(26u32 * 30));
    }

    #[test]
    fn every_table_sums_to_code_size() {
        for (p, m) in [(3, 1), (3, 2), (3, 3), (3, 4), (3, 5), (3, 6), (5, 1), (5, 2), (5, 3), (7, 2), (11, 4)] {
            let total = BigUint::from(p).pow(2 * m + 1);
            if m % 2 == 1 {
                assert_eq!(predict_pn_do(p, m, None).unwrap().distribution.total(), total);
            } else {
                for e in [1, -1] {
                    assert_eq!(predict_pn_do(p, m, Some(e)).unwrap().distribution.total(), total);
                }
            }
            assert_eq!(predict_punctured(p, m, PuncturedKind::PnDo).unwrap().distribution.total(), total);
            if p == 3 {
                assert_eq!(predict_cm(m).unwrap().distribution.total(), total);
                assert_eq!(predict_punctured(3, m, PuncturedKind::Cm).unwrap().distribution.total(), total);
            }
        }
    }

    #[test]
    fn zero_code_pless() {
        let wd = WeightDistribution::from_counts(7, 3, [(0usize, 1u32)]).unwrap();
        let check = pless_verify(&wd, &[BigUint::zero(), BigUint::zero(), BigUint::zero(), BigUint::zero()]);
        assert!(check.residuals[0].is_zero());
    }

    #[test]
    fn sphere_packing_examples() {
        let v = sphere_packing_check(26, 21, 5, 5).unwrap();
        assert_eq!(v.verdict, Verdict::RuledOut);
        let v = sphere_packing_check(26, 21, 4, 5).unwrap();
        assert_eq!(v.verdict, Verdict::Optimal);
        assert_eq!(v.max_d, 4);
        let v = sphere_packing_check(28, 21, 4, 3).unwrap();
        assert_eq!(v.verdict, Verdict::Inconclusive);
        assert_eq!(v.max_d, 6);
        assert_ne!(sphere_packing_check(10, 3, 1, 3).unwrap().verdict, Verdict::RuledOut);
        assert!(sphere_packing_check(10, 3, 1, 6).is_err());
    }

    #[test]
    fn rouayheb_examples() {
        assert!(rouayheb_bound(2, 9, 6).is_err());
        assert!(rouayheb_bound(3, 9, 10).is_err());
        let b = rouayheb_bound(3, 27, 6).unwrap();
        assert_eq!(b, BigRational::new(BigInt::from(3).pow(26u32), BigInt::from(1353)));
        assert_eq!(rouayheb_check(27, 20, 6, 3).unwrap().verdict, Verdict::RuledOut);
        assert_eq!(rouayheb_check(27, 20, 5, 3).unwrap().verdict, Verdict::Optimal);
    }

    #[test]
    fn nu_small() {
        let ctx = Arc::new(make_field(3, 2).unwrap());
        assert_eq!(nu_count(&ctx, 1, 0).unwrap(), 9);
        let sq = ctx.elements().skip(1).find(|&u| ctx.quadratic_character(u) == 1).unwrap();
        assert_eq!(nu_count(&ctx, 1, sq).unwrap(), 18);
        let ctx = Arc::new(make_field(3, 3).unwrap());
        let ns = ctx.elements().skip(1).find(|&u| ctx.quadratic_character(u) == -1).unwrap();
        assert_eq!(nu_count(&ctx, 1, ns).unwrap(), 0);
        assert!(nu_count(&Arc::new(make_field(5, 1).unwrap()), 1, 0).is_err());
    }
}
