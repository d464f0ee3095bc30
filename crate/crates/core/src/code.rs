//! The subfield code
//! `C_f = {((Tr(a f(x) + b x) + c)_{x ∈ F_{p^m}}, Tr(a)) : a, b ∈ F_{p^m}, c ∈ F_p}`,
//! its exact weight distribution, the punctured code, and duals.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Pow, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::Elem;
use crate::pn::PnFunction;

/// Default cap on `(a, b)` pairs times code length visited by enumeration.
pub const DEFAULT_BUDGET: u64 = 100_000_000;

/// Exact weight distribution of a code of length `n` and dimension `k` over
/// `F_q`. Only nonzero counts are stored.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeightDistribution {
    pub n: usize,
    pub k: u32,
    pub q: u32,
    #[serde(with = "counts_serde")]
    pub counts: BTreeMap<usize, BigUint>,
}

mod counts_serde {
    use std::collections::BTreeMap;

    use num_bigint::BigUint;
    use serde::de::{Error as _, MapAccess, Visitor};
    use serde::ser::SerializeMap;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(counts: &BTreeMap<usize, BigUint>, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(counts.len()))?;
        for (w, c) in counts {
            map.serialize_entry(&w.to_string(), &c.to_string())?;
        }
        map.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<usize, BigUint>, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = BTreeMap<usize, BigUint>;

            fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
                f.write_str("a map from weight to decimal count")
            }

            fn visit_map<A: MapAccess<'de>>(self, mut access: A) -> Result<Self::Value, A::Error> {
                let mut out = BTreeMap::new();
                while let Some((k, v)) = access.next_entry::<String, String>()? {
                    let w: usize = k.parse().map_err(A::Error::custom)?;
                    let c: BigUint = v.parse().map_err(A::Error::custom)?;
                    if out.insert(w, c).is_some() {
                        return Err(A::Error::custom(format!("duplicate weight {w}")));
                    }
                }
                Ok(out)
            }
        }
        d.deserialize_map(V)
    }
}

/// `log_q(total)` when `total` is an exact power of `q`.
pub fn exact_log(total: &BigUint, q: u32) -> Option<u32> {
    if total.is_zero() {
        return None;
    }
    let mut t = total.clone();
    let q = BigUint::from(q);
    let mut k = 0;
    while !t.is_one() {
        let (d, r) = t.div_rem(&q);
        if !r.is_zero() {
            return None;
        }
        t = d;
        k += 1;
    }
    Some(k)
}

impl WeightDistribution {
    /// Build from raw counts; zero entries are dropped and `k` is taken from
    /// the total, which must be a power of `q`.
    pub fn from_counts<C: Into<BigUint>>(
        n: usize,
        q: u32,
        counts: impl IntoIterator<Item = (usize, C)>,
    ) -> Result<Self> {
        let mut map: BTreeMap<usize, BigUint> = BTreeMap::new();
        for (w, c) in counts {
            let c = c.into();
            if !c.is_zero() {
                *map.entry(w).or_default() += c;
            }
        }
        let total: BigUint = map.values().sum();
        let k = exact_log(&total, q).ok_or_else(|| {
            Error::InvalidInput(format!("total count {total} is not a power of {q}"))
        })?;
        let wd = WeightDistribution { n, k, q, counts: map };
        wd.validate()?;
        Ok(wd)
    }

    pub fn total(&self) -> BigUint {
        self.counts.values().sum()
    }

    pub fn count(&self, w: usize) -> BigUint {
        self.counts.get(&w).cloned().unwrap_or_default()
    }

    /// Linear-code invariants: weights within `[0, n]`, `A_0 = 1`, total `q^k`.
    pub fn validate(&self) -> Result<()> {
        if let Some((&w, _)) = self.counts.iter().next_back() {
            if w > self.n {
                return Err(Error::InvalidInput(format!("weight {w} exceeds length {}", self.n)));
            }
        }
        if !self.count(0).is_one() {
            return Err(Error::InvalidInput(format!("A_0 = {} (expected 1)", self.count(0))));
        }
        let expect = BigUint::from(self.q).pow(self.k);
        if self.total() != expect {
            return Err(Error::InvalidInput(format!(
                "counts sum to {} but q^k = {expect}",
                self.total()
            )));
        }
        Ok(())
    }

    /// Weight enumerator `1+A_1x^1+…`, ascending weight.
    pub fn enumerator_string(&self) -> String {
        self.counts
            .iter()
            .map(|(&w, c)| match w {
                0 => c.to_string(),
                _ if c.is_one() => format!("x^{w}"),
                _ => format!("{c}x^{w}"),
            })
            .collect::<Vec<_>>()
            .join("+")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("weight distribution serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::InvalidInput(e.to_string()))
    }

    /// First weight where the two distributions differ.
    pub fn first_difference(&self, other: &WeightDistribution) -> Option<usize> {
        let weights: std::collections::BTreeSet<usize> =
            self.counts.keys().chain(other.counts.keys()).copied().collect();
        weights.into_iter().find(|&w| self.count(w) != other.count(w))
    }
}

impl fmt::Display for WeightDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]_{}: {}", self.n, self.k, self.q, self.enumerator_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeParams {
    pub n: usize,
    pub k: u32,
    pub d: usize,
}

impl fmt::Display for CodeParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{},{}]", self.n, self.k, self.d)
    }
}

/// `[n, k, d]` of a distribution.
pub fn code_params(wd: &WeightDistribution) -> Result<CodeParams> {
    let total = wd.total();
    let k = exact_log(&total, wd.q)
        .ok_or_else(|| Error::InvalidInput(format!("total {total} is not a power of {}", wd.q)))?;
    let d = wd
        .counts
        .iter()
        .find(|(&w, c)| w > 0 && !c.is_zero())
        .map(|(&w, _)| w)
        .ok_or_else(|| Error::InvalidInput("zero code has no minimum distance".into()))?;
    Ok(CodeParams { n: wd.n, k, d })
}

/// Dual distribution by the MacWilliams transform, exact.
///
/// `A⊥_j = q^{-k} Σ_i A_i K_j(i)` with Krawtchouk polynomials `K_j`, evaluated
/// by their three-term recurrence in `j`.
pub fn macwilliams_dual(wd: &WeightDistribution) -> Result<WeightDistribution> {
    wd.validate()?;
    let n = wd.n;
    let mut sums = vec![BigInt::zero(); n + 1];
    for (&i, a) in &wd.counts {
        let a = BigInt::from(a.clone());
        for (j, kj) in krawtchouk_row(n, wd.q, i).into_iter().enumerate() {
            sums[j] += &a * kj;
        }
    }
    let scale = BigInt::from(wd.q).pow(wd.k);
    let mut counts = BTreeMap::new();
    for (j, s) in sums.into_iter().enumerate() {
        let (quot, rem) = s.div_rem(&scale);
        if !rem.is_zero() || quot.is_negative() {
            return Err(Error::InvalidInput(format!(
                "MacWilliams coefficient at weight {j} is {s}/{scale}; not a linear code"
            )));
        }
        if !quot.is_zero() {
            counts.insert(j, quot.to_biguint().unwrap());
        }
    }
    let dual = WeightDistribution { n, k: n as u32 - wd.k, q: wd.q, counts };
    dual.validate()?;
    Ok(dual)
}

/// `[K_0(i), …, K_n(i)]` for length `n` over `F_q`.
pub fn krawtchouk_row(n: usize, q: u32, i: usize) -> Vec<BigInt> {
    let q = BigInt::from(q);
    let qm1 = &q - 1;
    let mut row = Vec::with_capacity(n + 1);
    row.push(BigInt::one());
    if n == 0 {
        return row;
    }
    // K_1(i) = (n - i)(q - 1) - i
    row.push(BigInt::from(n - i) * &qm1 - BigInt::from(i));
    for j in 1..n {
        // (j+1) K_{j+1} = [(n-j)(q-1) + j - q i] K_j - (q-1)(n-j+1) K_{j-1}
        let coef = BigInt::from(n - j) * &qm1 + BigInt::from(j) - &q * BigInt::from(i);
        let next: BigInt = coef * &row[j] - &qm1 * BigInt::from(n - j + 1) * &row[j - 1];
        let (quot, rem) = next.div_rem(&BigInt::from(j + 1));
        debug_assert!(rem.is_zero());
        row.push(quot);
    }
    row
}

/// `C_f` for a fixed function `f`. Coordinates are ordered by ascending
/// element encoding, followed by the `Tr(a)` coordinate.
#[derive(Debug, Clone)]
pub struct SubfieldCode {
    f: PnFunction,
}

/// Both distributions from one pass, plus the dimension bookkeeping.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Enumeration {
    pub full: WeightDistribution,
    pub punctured: WeightDistribution,
    pub claimed_dimension: u32,
    /// Number of parameter triples `(a, b, c)` mapping to the zero word.
    pub kernel_size: u64,
}

impl Enumeration {
    pub fn is_injective(&self) -> bool {
        self.kernel_size == 1
    }
}

impl SubfieldCode {
    pub fn new(f: PnFunction) -> Self {
        SubfieldCode { f }
    }

    pub fn function(&self) -> &PnFunction {
        &self.f
    }

    pub fn length(&self) -> usize {
        self.f.ctx().order() as usize + 1
    }

    pub fn claimed_dimension(&self) -> u32 {
        2 * self.f.ctx().m() + 1
    }

    /// Work units for a full enumeration: `(a, b)` pairs times length.
    pub fn cost(&self) -> u64 {
        let q = self.f.ctx().order() as u64;
        q * q * (q + 1)
    }

    pub fn codeword(&self, a: Elem, b: Elem, c: u32) -> Vec<u32> {
        let ctx = self.f.ctx();
        let p = ctx.p();
        let mut word: Vec<u32> = ctx
            .elements()
            .map(|x| {
                let v = ctx.add(ctx.mul(a, self.f.evaluate(x)), ctx.mul(b, x));
                (ctx.trace(v) + c) % p
            })
            .collect();
        word.push(ctx.trace(a));
        word
    }

    /// Exact distributions of `C_f` and of the code with the last coordinate
    /// deleted, over all `(a, b, c)`.
    pub fn enumerate(&self, budget: u64) -> Result<Enumeration> {
        if self.cost() > budget {
            return Err(Error::CapacityExceeded(format!(
                "enumeration needs {} work units, budget is {budget}",
                self.cost()
            )));
        }
        let ctx = self.f.ctx();
        let p = ctx.p();
        let q = ctx.order() as usize;
        // Tr(b x) for every (b, x)
        let tr_lin: Vec<u16> = ctx
            .elements()
            .flat_map(|b| ctx.elements().map(move |x| ctx.trace(ctx.mul(b, x)) as u16))
            .collect();

        let (full, punct) = ctx
            .elements()
            .into_par_iter()
            .map(|a| {
                let mut full = vec![0u64; q + 2];
                let mut punct = vec![0u64; q + 1];
                let row: Vec<u16> = ctx
                    .elements()
                    .map(|x| ctx.trace(ctx.mul(a, self.f.evaluate(x))) as u16)
                    .collect();
                let sigma = usize::from(ctx.trace(a) != 0);
                let mut hist = vec![0usize; p as usize];
                for b in 0..q {
                    hist.iter_mut().for_each(|h| *h = 0);
                    let lin = &tr_lin[b * q..(b + 1) * q];
                    for (&u, &v) in row.iter().zip(lin) {
                        let mut s = u as u32 + v as u32;
                        if s >= p {
                            s -= p;
                        }
                        hist[s as usize] += 1;
                    }
                    for c in 0..p {
                        let zeros = hist[((p - c) % p) as usize];
                        let w = q - zeros;
                        punct[w] += 1;
                        full[w + sigma] += 1;
                    }
                }
                (full, punct)
            })
            .reduce(
                || (vec![0u64; q + 2], vec![0u64; q + 1]),
                |(mut f1, mut p1), (f2, p2)| {
                    f1.iter_mut().zip(f2).for_each(|(a, b)| *a += b);
                    p1.iter_mut().zip(p2).for_each(|(a, b)| *a += b);
                    (f1, p1)
                },
            );

        let kernel_size = full[0];
        let full = distinct_codewords(q + 1, p, &full)?;
        let punctured = distinct_codewords(q, p, &punct)?;
        Ok(Enumeration { full, punctured, claimed_dimension: self.claimed_dimension(), kernel_size })
    }
}

/// Divide parameter-triple counts by the kernel size to count distinct words.
fn distinct_codewords(n: usize, q: u32, hist: &[u64]) -> Result<WeightDistribution> {
    let kernel = hist[0];
    let mut counts = Vec::new();
    for (w, &c) in hist.iter().enumerate() {
        if c % kernel != 0 {
            return Err(Error::InternalConsistency(format!(
                "weight {w} count {c} not divisible by kernel size {kernel}"
            )));
        }
        counts.push((w, BigUint::from(c / kernel)));
    }
    WeightDistribution::from_counts(n, q, counts)
}

/// `enumerate_weight_distribution` as a free function.
pub fn enumerate_weight_distribution(code: &SubfieldCode, budget: u64) -> Result<WeightDistribution> {
    Ok(code.enumerate(budget)?.full)
}

/// Weight distribution of `C_f` with its last coordinate deleted.
pub fn puncture_last(code: &SubfieldCode, budget: u64) -> Result<WeightDistribution> {
    Ok(code.enumerate(budget)?.punctured)
}

/// Low-weight dual counts `[A⊥_1, …, A⊥_4]`.
pub fn dual_low_weights(dual: &WeightDistribution) -> [BigUint; 4] {
    [1, 2, 3, 4].map(|w| dual.count(w))
}

/// Convenience: counts as `u64` when they fit.
pub fn counts_u64(wd: &WeightDistribution) -> BTreeMap<usize, u64> {
    wd.counts
        .iter()
        .map(|(&w, c)| (w, c.to_u64().expect("count fits in u64")))
        .collect()
}
