//! Quadratic forms `x ↦ Tr(a·f(x))` over `F_p` for Dembowski–Ostrom `f`.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::field::{eta0, fp_inv, Elem, FieldCtx};
use crate::pn::{Family, PnFunction};

type Matrix = Vec<Vec<u32>>;

/// Symmetric matrix `A` with `Q(x) = X A Xᵀ`, where `X` are the coordinates of
/// `x` in `basis`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct QuadraticForm {
    p: u32,
    m: u32,
    matrix: Matrix,
    basis: Vec<Elem>,
    /// `(family, a)` the form was extracted from.
    source: Option<(Family, Elem)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RankDetReport {
    pub rank: u32,
    /// `η₀(det A)`; zero iff the form is degenerate.
    pub det_class: i8,
    /// `η₀` of the product of the nonzero diagonal entries after a congruent
    /// diagonalization.
    pub form_type: i8,
}

fn mat_rank(p: u32, mut a: Matrix) -> u32 {
    let rows = a.len();
    let cols = if rows == 0 { 0 } else { a[0].len() };
    let mut rank = 0;
    for col in 0..cols {
        let Some(piv) = (rank..rows).find(|&r| a[r][col] != 0) else {
            continue;
        };
        a.swap(rank, piv);
        let inv = fp_inv(p, a[rank][col]) as u64;
        for r in 0..rows {
            if r != rank && a[r][col] != 0 {
                let f = (a[r][col] as u64 * inv) % p as u64;
                for c in 0..cols {
                    let sub = (f * a[rank][c] as u64) % p as u64;
                    a[r][c] = ((a[r][c] as u64 + p as u64 - sub) % p as u64) as u32;
                }
            }
        }
        rank += 1;
    }
    rank as u32
}

fn mat_det(p: u32, mut a: Matrix) -> u32 {
    let n = a.len();
    let pp = p as u64;
    let mut det = 1u64;
    for col in 0..n {
        let Some(piv) = (col..n).find(|&r| a[r][col] != 0) else {
            return 0;
        };
        if piv != col {
            a.swap(piv, col);
            det = (pp - det) % pp;
        }
        det = det * a[col][col] as u64 % pp;
        let inv = fp_inv(p, a[col][col]) as u64;
        for r in col + 1..n {
            if a[r][col] == 0 {
                continue;
            }
            let f = a[r][col] as u64 * inv % pp;
            for c in col..n {
                let sub = f * a[col][c] as u64 % pp;
                a[r][c] = ((a[r][c] as u64 + pp - sub) % pp) as u32;
            }
        }
    }
    det as u32
}

/// Iterate all coordinate vectors of `F_p^m` in base-`p` order.
fn coord_vectors(p: u32, m: u32) -> impl Iterator<Item = Vec<u32>> {
    let total = (p as u64).pow(m);
    (0..total).map(move |mut idx| {
        (0..m)
            .map(|_| {
                let d = (idx % p as u64) as u32;
                idx /= p as u64;
                d
            })
            .collect()
    })
}

fn combine(ctx: &FieldCtx, basis: &[Elem], coords: &[u32]) -> Elem {
    basis
        .iter()
        .zip(coords)
        .fold(0, |acc, (&v, &c)| ctx.add(acc, ctx.scale(c, v)))
}

impl QuadraticForm {
    pub fn from_matrix(p: u32, matrix: Matrix, basis: Vec<Elem>) -> Result<Self> {
        let m = matrix.len();
        if matrix.iter().any(|r| r.len() != m) {
            return Err(Error::InvalidInput("matrix is not square".into()));
        }
        for i in 0..m {
            for j in 0..m {
                if matrix[i][j] >= p || matrix[i][j] != matrix[j][i] {
                    return Err(Error::InvalidInput("matrix is not symmetric over F_p".into()));
                }
            }
        }
        Ok(QuadraticForm { p, m: m as u32, matrix, basis, source: None })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn basis(&self) -> &[Elem] {
        &self.basis
    }

    pub fn source(&self) -> Option<(Family, Elem)> {
        self.source
    }

    /// `X A Xᵀ` for coordinates `X`.
    pub fn eval(&self, x: &[u32]) -> u32 {
        let p = self.p as u64;
        let mut acc = 0u64;
        for (i, row) in self.matrix.iter().enumerate() {
            if x[i] == 0 {
                continue;
            }
            let inner = row
                .iter()
                .zip(x)
                .fold(0u64, |s, (&a, &xj)| (s + a as u64 * xj as u64) % p);
            acc = (acc + x[i] as u64 * inner) % p;
        }
        acc as u32
    }

    /// Determinant of `A` in this form's basis. Only its square class is
    /// basis-independent.
    pub fn raw_determinant(&self) -> u32 {
        mat_det(self.p, self.matrix.clone())
    }

    pub fn matrix_rank(&self) -> u32 {
        mat_rank(self.p, self.matrix.clone())
    }

    /// `m` minus the dimension of the radical `{x : B(x, z) = 0 ∀z}`, found by
    /// enumerating `F_p^m`.
    pub fn radical_rank(&self) -> u32 {
        let p = self.p as u64;
        let kernel = coord_vectors(self.p, self.m)
            .filter(|x| {
                (0..self.m as usize).all(|j| {
                    self.matrix
                        .iter()
                        .zip(x)
                        .fold(0u64, |s, (row, &xi)| (s + xi as u64 * row[j] as u64) % p)
                        == 0
                })
            })
            .count() as u64;
        let mut dim = 0;
        let mut size = 1;
        while size < kernel {
            size *= p;
            dim += 1;
        }
        self.m - dim
    }

    /// Congruent diagonalization: returns `(P, D)` with `P A Pᵀ = D` diagonal.
    pub fn diagonalize(&self) -> (Matrix, Vec<u32>) {
        let p = self.p as u64;
        let n = self.m as usize;
        let mut a = self.matrix.clone();
        let mut pm: Matrix = (0..n)
            .map(|i| (0..n).map(|j| u32::from(i == j)).collect())
            .collect();
        let add_scaled = |row: &mut Vec<u32>, src: &[u32], f: u64| {
            for (x, &s) in row.iter_mut().zip(src) {
                *x = ((*x as u64 + f * s as u64) % p) as u32;
            }
        };
        for i in 0..n {
            if a[i][i] == 0 {
                if let Some(j) = (i + 1..n).find(|&j| a[j][j] != 0) {
                    a.swap(i, j);
                    for row in a.iter_mut() {
                        row.swap(i, j);
                    }
                    pm.swap(i, j);
                } else if let Some(j) = (i + 1..n).find(|&j| a[i][j] != 0) {
                    // row_i += row_j, col_i += col_j gives a[i][i] = 2 a[i][j] != 0
                    let rj = a[j].clone();
                    add_scaled(&mut a[i], &rj, 1);
                    for row in a.iter_mut() {
                        row[i] = ((row[i] as u64 + row[j] as u64) % p) as u32;
                    }
                    let pj = pm[j].clone();
                    add_scaled(&mut pm[i], &pj, 1);
                } else {
                    continue;
                }
            }
            let inv = fp_inv(self.p, a[i][i]) as u64;
            for j in i + 1..n {
                if a[j][i] == 0 {
                    continue;
                }
                let f = (p - a[j][i] as u64 * inv % p) % p;
                let ri = a[i].clone();
                add_scaled(&mut a[j], &ri, f);
                for row in a.iter_mut() {
                    row[j] = ((row[j] as u64 + f * row[i] as u64) % p) as u32;
                }
                let pi = pm[i].clone();
                add_scaled(&mut pm[j], &pi, f);
            }
        }
        let diag = (0..n).map(|i| a[i][i]).collect();
        (pm, diag)
    }

    pub fn rank_and_det(&self) -> Result<RankDetReport> {
        let rank = self.matrix_rank();
        let radical = self.radical_rank();
        if rank != radical {
            return Err(Error::InternalConsistency(format!(
                "rank by elimination {rank} != rank by radical {radical}"
            )));
        }
        let det_class = eta0(self.p, self.raw_determinant());
        let (_, diag) = self.diagonalize();
        let prod = diag
            .iter()
            .filter(|&&d| d != 0)
            .fold(1u64, |acc, &d| acc * d as u64 % self.p as u64);
        let form_type = eta0(self.p, prod as u32);
        Ok(RankDetReport { rank, det_class, form_type })
    }
}

/// Matrix of `Tr(a·f(x))` in the polynomial basis.
pub fn trace_form_matrix(f: &PnFunction, a: Elem) -> Result<QuadraticForm> {
    let basis = f.ctx().basis();
    trace_form_matrix_in_basis(f, a, &basis)
}

/// Matrix of `Tr(a·f(x))` in an arbitrary `F_p`-basis of `F_{p^m}`.
pub fn trace_form_matrix_in_basis(f: &PnFunction, a: Elem, basis: &[Elem]) -> Result<QuadraticForm> {
    let ctx = f.ctx();
    if f.family() == Family::F2Cm {
        return invalid("the Coulter–Matthews family does not give a quadratic form");
    }
    if !f.is_do() {
        return invalid("Tr(a f(x)) is a quadratic form only for DO polynomials");
    }
    let (p, m) = (ctx.p(), ctx.m());
    if basis.len() != m as usize {
        return invalid("basis has the wrong length");
    }
    let coords: Matrix = basis.iter().map(|&v| ctx.decode(v)).collect();
    if mat_rank(p, coords) != m {
        return invalid("basis vectors are linearly dependent");
    }
    let q = |x: Elem| ctx.trace(ctx.mul(a, f.evaluate(x)));
    let half = fp_inv(p, 2) as u64;
    let n = m as usize;
    let mut matrix = vec![vec![0u32; n]; n];
    for k in 0..n {
        matrix[k][k] = q(basis[k]);
        for l in k + 1..n {
            let cross = q(ctx.add(basis[k], basis[l])) as u64 + 2 * p as u64
                - q(basis[k]) as u64
                - q(basis[l]) as u64;
            let v = (cross % p as u64 * half % p as u64) as u32;
            matrix[k][l] = v;
            matrix[l][k] = v;
        }
    }
    let form = QuadraticForm {
        p,
        m,
        matrix,
        basis: basis.to_vec(),
        source: Some((f.family(), a)),
    };
    for y in coord_vectors(p, m) {
        let x = combine(ctx, basis, &y);
        if form.eval(&y) != q(x) {
            return Err(Error::InternalConsistency(format!(
                "matrix form disagrees with Tr(a f(x)) at x = {x}"
            )));
        }
    }
    Ok(form)
}

/// `|{x : Q(x) + Tr(bx) = c}|`, by enumeration and by the closed-form count
/// after completing the square; the two must agree.
pub fn count_solutions(ctx: &FieldCtx, qf: &QuadraticForm, b: Elem, c: u32) -> Result<u64> {
    let brute = count_solutions_brute(ctx, qf, b, c);
    let closed = count_solutions_closed(ctx, qf, b, c)?;
    if brute != closed {
        return Err(Error::InternalConsistency(format!(
            "N_{{b,c}} for b = {b}, c = {c}: enumeration {brute}, closed form {closed}"
        )));
    }
    Ok(brute)
}

fn linear_coeffs(ctx: &FieldCtx, qf: &QuadraticForm, b: Elem) -> Vec<u32> {
    qf.basis.iter().map(|&v| ctx.trace(ctx.mul(b, v))).collect()
}

pub fn count_solutions_brute(ctx: &FieldCtx, qf: &QuadraticForm, b: Elem, c: u32) -> u64 {
    let p = qf.p;
    coord_vectors(p, qf.m)
        .filter(|y| {
            let x = combine(ctx, &qf.basis, y);
            (qf.eval(y) + ctx.trace(ctx.mul(b, x))) % p == c % p
        })
        .count() as u64
}

/// Closed-form count for a nondegenerate form: diagonalize, complete the
/// square, then count solutions of `Σ dᵢ zᵢ² = c'`.
pub fn count_solutions_closed(ctx: &FieldCtx, qf: &QuadraticForm, b: Elem, c: u32) -> Result<u64> {
    let p = qf.p;
    let pp = p as u64;
    let m = qf.m;
    let (pm, diag) = qf.diagonalize();
    if diag.contains(&0) {
        return invalid("count_solutions requires a nondegenerate form");
    }
    let beta = linear_coeffs(ctx, qf, b);
    // X = Y P, so X·β = Y·(P β)
    let shifted: Vec<u64> = pm
        .iter()
        .map(|row| row.iter().zip(&beta).fold(0, |s, (&a, &b)| (s + a as u64 * b as u64) % pp))
        .collect();
    let inv4 = fp_inv(p, 4) as u64;
    let mut target = c as u64 % pp;
    for (&bi, &di) in shifted.iter().zip(&diag) {
        let term = bi * bi % pp * inv4 % pp * fp_inv(p, di) as u64 % pp;
        target = (target + term) % pp;
    }
    let det = diag.iter().fold(1u64, |acc, &d| acc * d as u64 % pp);
    Ok(lidl_count(p, m, target as u32, det as u32))
}

/// Number of solutions of a nondegenerate quadratic form `= b` in `m`
/// variables over `F_p` with determinant `det`.
pub fn lidl_count(p: u32, m: u32, b: u32, det: u32) -> u64 {
    let pi = p as i64;
    let base = pi.pow(m - 1);
    let minus_one = p - 1;
    let signed_pow = |c: u32, e: u32| -> u32 {
        if e.is_multiple_of(2) {
            1
        } else {
            c
        }
    };
    let value = if m.is_multiple_of(2) {
        let nu = if b.is_multiple_of(p) { pi - 1 } else { -1 };
        let s = signed_pow(minus_one, m / 2) as u64 * det as u64 % p as u64;
        base + nu * pi.pow((m - 2) / 2) * eta0(p, s as u32) as i64
    } else {
        let s = signed_pow(minus_one, (m - 1) / 2) as u64 * b as u64 % p as u64 * det as u64
            % p as u64;
        base + pi.pow((m - 1) / 2) * eta0(p, s as u32) as i64
    };
    value as u64
}

/// Histogram `N_{b,c} → multiplicity` over all `(b, c)`, by enumeration.
pub fn solution_profile(ctx: &FieldCtx, qf: &QuadraticForm) -> BTreeMap<u64, u64> {
    let p = qf.p;
    let points: Vec<(Elem, u32)> = coord_vectors(p, qf.m)
        .map(|y| (combine(ctx, &qf.basis, &y), qf.eval(&y)))
        .collect();
    let mut profile = BTreeMap::new();
    for b in ctx.elements() {
        let mut hist = vec![0u64; p as usize];
        for &(x, qx) in &points {
            hist[((qx + ctx.trace(ctx.mul(b, x))) % p) as usize] += 1;
        }
        for n in hist {
            *profile.entry(n).or_insert(0) += 1;
        }
    }
    profile
}

/// Predicted histogram of `N_{b,c}` for a nondegenerate form with
/// determinant class `det_class`.
pub fn predicted_profile(p: u32, m: u32, det_class: i8) -> BTreeMap<u64, u64> {
    let pi = p as i64;
    let pm = pi.pow(m);
    let mut out = BTreeMap::new();
    let mut put = |n: i64, times: i64| {
        if times != 0 {
            *out.entry(n as u64).or_insert(0) += times as u64;
        }
    };
    if m % 2 == 1 {
        let r = pi.pow((m - 1) / 2);
        put(pi.pow(m - 1), pm);
        put(pi.pow(m - 1) - r, (pi - 1) * pm / 2);
        put(pi.pow(m - 1) + r, (pi - 1) * pm / 2);
    } else {
        let eps0 = sign_m_p(p, m) * det_class as i64;
        let r = pi.pow((m - 2) / 2);
        put(pi.pow(m - 1) + eps0 * (pi - 1) * r, pm);
        put(pi.pow(m - 1) - eps0 * r, (pi - 1) * pm);
    }
    out
}

/// `(-1)^{m(p-1)/4}` for even `m`.
pub(crate) fn sign_m_p(p: u32, m: u32) -> i64 {
    if (m as u64 * (p as u64 - 1) / 4).is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// `ε = (-1)^{m(p-1)/4} · η₀(det Tr(f))` for even `m`.
pub fn epsilon_of(f: &PnFunction) -> Result<i8> {
    let m = f.ctx().m();
    if m % 2 == 1 {
        return invalid("epsilon is only defined for even m");
    }
    let report = trace_form_matrix(f, 1)?.rank_and_det()?;
    if report.rank != m {
        return invalid("Tr(f) is degenerate; epsilon undefined");
    }
    Ok((sign_m_p(f.ctx().p(), m) * report.det_class as i64) as i8)
}

/// Outcome of checking `det Tr(a f) = a^{(p^m-1)/(p-1)} det Tr(f)` for all
/// nonzero `a`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DetRelation {
    /// `f` is a single term. The identity is only guaranteed when the DO
    /// coefficient matrix has rank one, which monomials satisfy.
    pub monomial: bool,
    pub checked: u64,
    /// Square-class form: `η₀(det Tr(af)) = η₀(N(a)) η₀(det Tr(f))`.
    pub square_class_holds: bool,
    /// Exact scalar identity in the polynomial basis.
    pub scalar_holds: bool,
}

pub fn det_relation(f: &PnFunction) -> Result<DetRelation> {
    let ctx = f.ctx();
    let p = ctx.p();
    let base = trace_form_matrix(f, 1)?;
    let det1 = base.raw_determinant();
    if det1 == 0 {
        return invalid("Tr(f) must be nondegenerate");
    }
    let mut out = DetRelation { monomial: f.terms().len() == 1, checked: 0, square_class_holds: true, scalar_holds: true };
    for a in ctx.elements().skip(1) {
        let det_a = trace_form_matrix(f, a)?.raw_determinant();
        let norm = ctx.norm(a);
        let expect = (norm as u64 * det1 as u64 % p as u64) as u32;
        out.checked += 1;
        out.scalar_holds &= det_a == expect;
        out.square_class_holds &= eta0(p, det_a) == eta0(p, norm) * eta0(p, det1);
    }
    Ok(out)
}

/// Square-class determinant relation over every nonzero `a`.
pub fn check_det_relation(f: &PnFunction) -> Result<bool> {
    Ok(det_relation(f)?.square_class_holds)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::make_field;
    use crate::pn::{build_pn, PnParams};
    use std::sync::Arc;

    fn square_map(p: u32, m: u32) -> PnFunction {
        let ctx = Arc::new(make_field(p, m).unwrap());
        build_pn(&ctx, Family::F1, PnParams { k: Some(0), ..Default::default() }).unwrap()
    }

    #[test]
    fn zero_form() {
        let f = square_map(3, 2);
        let qf = trace_form_matrix(&f, 0).unwrap();
        assert!(qf.matrix().iter().flatten().all(|&v| v == 0));
        let r = qf.rank_and_det().unwrap();
        assert_eq!((r.rank, r.det_class), (0, 0));
    }

    #[test]
    fn trace_of_square_on_f9() {
        let f = square_map(3, 2);
        let ctx = f.ctx().clone();
        let qf = trace_form_matrix(&f, 1).unwrap();
        for x in ctx.elements() {
            assert_eq!(qf.eval(&ctx.decode(x)), ctx.trace(ctx.mul(x, x)));
        }
        let r = qf.rank_and_det().unwrap();
        assert_eq!(r.rank, 2);
        assert_eq!(r.det_class, -1);
        assert_eq!(r.form_type, -1);
    }

    #[test]
    fn nonsquare_flips_det_class_on_f9() {
        let f = square_map(3, 2);
        let ctx = f.ctx().clone();
        let a = ctx.elements().skip(1).find(|&a| ctx.quadratic_character(a) == -1).unwrap();
        let r = trace_form_matrix(&f, a).unwrap().rank_and_det().unwrap();
        assert_eq!(r.det_class, 1);
    }

    #[test]
    fn cm_is_rejected() {
        let ctx = Arc::new(make_field(3, 3).unwrap());
        let f = build_pn(&ctx, Family::F2Cm, PnParams { k: Some(1), ..Default::default() }).unwrap();
        assert!(matches!(trace_form_matrix(&f, 1), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn diagonalization_is_congruence() {
        // zero diagonal forces the mixing step
        let qf = QuadraticForm::from_matrix(5, vec![vec![0, 1, 0], vec![1, 0, 2], vec![0, 2, 0]], vec![1, 5, 25]).unwrap();
        let (pm, diag) = qf.diagonalize();
        let p = 5u64;
        let n = 3;
        for i in 0..n {
            for j in 0..n {
                let mut s = 0u64;
                for k in 0..n {
                    for l in 0..n {
                        s += pm[i][k] as u64 * qf.matrix()[k][l] as u64 * pm[j][l] as u64;
                    }
                }
                let want = if i == j { diag[i] as u64 } else { 0 };
                assert_eq!(s % p, want, "entry ({i},{j})");
            }
        }
        assert_eq!(qf.matrix_rank(), qf.radical_rank());
    }

    #[test]
    fn epsilon_values() {
        assert_eq!(epsilon_of(&square_map(3, 2)).unwrap(), 1);
        assert_eq!(epsilon_of(&square_map(5, 2)).unwrap(), -1);
        assert!(epsilon_of(&square_map(3, 3)).is_err());
        let ctx = Arc::new(make_field(5, 2).unwrap());
        let xi = ctx.primitive_element();
        let f = build_pn(&ctx, Family::F1, PnParams { k: Some(0), scale: Some(xi), ..Default::default() }).unwrap();
        assert_eq!(epsilon_of(&f).unwrap(), 1);
    }

    #[test]
    fn det_relation_on_f9() {
        let rel = det_relation(&square_map(3, 2)).unwrap();
        assert_eq!(rel.checked, 8);
        assert!(rel.square_class_holds && rel.scalar_holds);
    }

    #[test]
    fn count_solutions_f9() {
        let f = square_map(3, 2);
        let ctx = f.ctx().clone();
        let qf = trace_form_matrix(&f, 1).unwrap();
        let brute = ctx.elements().filter(|&x| ctx.trace(ctx.mul(x, x)) == 0).count() as u64;
        assert_eq!(count_solutions(&ctx, &qf, 0, 0).unwrap(), brute);
        for b in ctx.elements() {
            let total: u64 = (0..3).map(|c| count_solutions(&ctx, &qf, b, c).unwrap()).sum();
            assert_eq!(total, 9);
        }
    }

    #[test]
    fn degenerate_form_rejected_by_closed_count() {
        let f = square_map(3, 2);
        let ctx = f.ctx().clone();
        let qf = trace_form_matrix(&f, 0).unwrap();
        assert!(count_solutions(&ctx, &qf, 0, 0).is_err());
    }
}
