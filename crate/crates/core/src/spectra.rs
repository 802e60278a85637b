//! Eigenvalues of small dense real matrices and comparison of spectra.
//!
//! Orders one and two use the characteristic polynomial directly. Larger
//! matrices are balanced, reduced to upper Hessenberg form by stabilized
//! elimination and then deflated with the Francis double-shift QR
//! iteration, whose implicit shift pair is the eigenvalue pair of the
//! trailing 2x2 block.

use std::fmt;
use std::ops::{Index, IndexMut};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SquareMatrix {
    order: usize,
    entries: Vec<f64>,
}

impl SquareMatrix {
    pub fn new(order: usize, entries: Vec<f64>) -> Result<Self> {
        if order == 0 || entries.len() != order * order {
            return Err(Error::Definition(format!(
                "{} entries cannot form a square matrix of order {order}",
                entries.len()
            )));
        }
        if entries.iter().any(|v| !v.is_finite()) {
            return Err(Error::Definition("matrix has non-finite entries".into()));
        }
        Ok(SquareMatrix { order, entries })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let order = rows.len();
        if rows.iter().any(|r| r.len() != order) {
            return Err(Error::Definition("rows have inconsistent lengths".into()));
        }
        SquareMatrix::new(order, rows.concat())
    }

    pub fn zeros(order: usize) -> Self {
        SquareMatrix { order, entries: vec![0.0; order * order] }
    }

    pub fn identity(order: usize) -> Self {
        let mut m = SquareMatrix::zeros(order);
        for i in 0..order {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let mut m = SquareMatrix::zeros(values.len());
        for (i, v) in values.iter().enumerate() {
            m[(i, i)] = *v;
        }
        m
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.order..(i + 1) * self.order]
    }

    pub fn trace(&self) -> f64 {
        (0..self.order).map(|i| self[(i, i)]).sum()
    }

    /// Largest absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.order)
            .map(|i| self.row(i).iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn transpose(&self) -> Self {
        let n = self.order;
        let mut t = SquareMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn mul(&self, other: &SquareMatrix) -> Result<SquareMatrix> {
        if self.order != other.order {
            return Err(Error::OrderMismatch { left: self.order, right: other.order });
        }
        let n = self.order;
        let mut out = SquareMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                for j in 0..n {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        (0..self.order)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn sub(&self, other: &SquareMatrix) -> Result<SquareMatrix> {
        if self.order != other.order {
            return Err(Error::OrderMismatch { left: self.order, right: other.order });
        }
        let entries = self.entries.iter().zip(&other.entries).map(|(a, b)| a - b).collect();
        Ok(SquareMatrix { order: self.order, entries })
    }

    /// Inverse by Gauss-Jordan elimination with partial pivoting.
    pub fn inverse(&self) -> Result<SquareMatrix> {
        let n = self.order;
        let lu = Lu::factor(self)?;
        let mut inv = SquareMatrix::zeros(n);
        let mut e = vec![0.0; n];
        for j in 0..n {
            e.iter_mut().for_each(|v| *v = 0.0);
            e[j] = 1.0;
            let col = lu.solve(&e);
            for i in 0..n {
                inv[(i, j)] = col[i];
            }
        }
        Ok(inv)
    }

    /// Smallest pivot magnitude met by partially pivoted elimination.
    pub fn min_pivot(&self) -> f64 {
        let (_, _, pivot) = eliminate(self);
        pivot
    }
}

impl Index<(usize, usize)> for SquareMatrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.entries[i * self.order + j]
    }
}

impl IndexMut<(usize, usize)> for SquareMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.entries[i * self.order + j]
    }
}

impl fmt::Display for SquareMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for i in 0..self.order {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{:?}", self.row(i))?;
        }
        f.write_str("]")
    }
}

/// Row-echelon factors: (LU in place, permutation, smallest pivot).
fn eliminate(m: &SquareMatrix) -> (SquareMatrix, Vec<usize>, f64) {
    let n = m.order;
    let mut a = m.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut min_pivot = f64::INFINITY;
    for k in 0..n {
        let p = (k..n)
            .max_by(|&i, &j| a[(i, k)].abs().total_cmp(&a[(j, k)].abs()))
            .unwrap_or(k);
        if p != k {
            for j in 0..n {
                a.entries.swap(k * n + j, p * n + j);
            }
            perm.swap(k, p);
        }
        let pivot = a[(k, k)];
        min_pivot = min_pivot.min(pivot.abs());
        if pivot == 0.0 {
            continue;
        }
        for i in k + 1..n {
            let factor = a[(i, k)] / pivot;
            a[(i, k)] = factor;
            for j in k + 1..n {
                a[(i, j)] -= factor * a[(k, j)];
            }
        }
    }
    (a, perm, min_pivot)
}

struct Lu {
    factors: SquareMatrix,
    perm: Vec<usize>,
}

impl Lu {
    fn factor(m: &SquareMatrix) -> Result<Lu> {
        let (factors, perm, pivot) = eliminate(m);
        if pivot < 1e-13 * m.norm_inf() || pivot == 0.0 {
            return Err(Error::Singular { pivot });
        }
        Ok(Lu { factors, perm })
    }

    fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let n = self.factors.order;
        let a = &self.factors;
        let mut x: Vec<f64> = self.perm.iter().map(|&p| rhs[p]).collect();
        for i in 0..n {
            for j in 0..i {
                x[i] -= a[(i, j)] * x[j];
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                x[i] -= a[(i, j)] * x[j];
            }
            x[i] /= a[(i, i)];
        }
        x
    }
}

/// Solve `m x = rhs` by partially pivoted elimination.
///
/// Fails with [`Error::Singular`] when a pivot falls below `1e-13 * ||m||`.
pub fn solve_linear(m: &SquareMatrix, rhs: &[f64]) -> Result<Vec<f64>> {
    if rhs.len() != m.order {
        return Err(Error::OrderMismatch { left: m.order, right: rhs.len() });
    }
    Ok(Lu::factor(m)?.solve(rhs))
}

/// Eigenvalue multiset sorted lexicographically by (re, im).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Spectrum(Vec<Complex64>);

impl Spectrum {
    pub fn new(mut values: Vec<Complex64>) -> Self {
        values.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        Spectrum(values)
    }

    pub fn real(values: &[f64]) -> Self {
        Spectrum::new(values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    pub fn values(&self) -> &[Complex64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn sum(&self) -> Complex64 {
        self.0.iter().sum()
    }

    pub fn product(&self) -> Complex64 {
        self.0.iter().product()
    }

    /// All eigenvalues are real (imaginary parts below `tol`).
    pub fn is_real(&self, tol: f64) -> bool {
        self.0.iter().all(|z| z.im.abs() <= tol)
    }
}

impl fmt::Display for Spectrum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, z) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            if z.im == 0.0 {
                write!(f, "{}", z.re)?;
            } else {
                write!(f, "{}{:+}i", z.re, z.im)?;
            }
        }
        f.write_str("}")
    }
}

pub fn eigenvalues(m: &SquareMatrix) -> Result<Spectrum> {
    match m.order {
        1 => Ok(Spectrum::real(&[m[(0, 0)]])),
        2 => Ok(Spectrum::new(eig2(m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]).to_vec())),
        _ => {
            let mut a = m.clone();
            balance(&mut a);
            hessenberg(&mut a);
            hqr(&mut a).map(Spectrum::new).map_err(|iterations| Error::EigenNoConvergence {
                order: m.order,
                iterations,
                matrix: m.entries.clone(),
            })
        }
    }
}

/// Roots of `t^2 - (a+d) t + (ad - bc)`.
fn eig2(a: f64, b: f64, c: f64, d: f64) -> [Complex64; 2] {
    let half_trace = 0.5 * (a + d);
    let half_diff = 0.5 * (a - d);
    // discriminant / 4 written without cancellation in the trace
    let disc = half_diff * half_diff + b * c;
    if disc >= 0.0 {
        let root = disc.sqrt();
        let big = if half_trace >= 0.0 { half_trace + root } else { half_trace - root };
        let det = a * d - b * c;
        let small = if big != 0.0 { det / big } else { half_trace - root.copysign(half_trace) };
        [Complex64::new(big, 0.0), Complex64::new(small, 0.0)]
    } else {
        let im = (-disc).sqrt();
        [Complex64::new(half_trace, im), Complex64::new(half_trace, -im)]
    }
}

/// Diagonal similarity scaling by powers of two so rows and columns have
/// comparable norms.
fn balance(a: &mut SquareMatrix) {
    const RADIX: f64 = 2.0;
    let n = a.order;
    let sqrdx = RADIX * RADIX;
    let mut done = false;
    while !done {
        done = true;
        for i in 0..n {
            let mut r = 0.0;
            let mut c = 0.0;
            for j in 0..n {
                if j != i {
                    c += a[(j, i)].abs();
                    r += a[(i, j)].abs();
                }
            }
            if c != 0.0 && r != 0.0 {
                let mut g = r / RADIX;
                let mut f = 1.0;
                let s = c + r;
                while c < g {
                    f *= RADIX;
                    c *= sqrdx;
                }
                g = r * RADIX;
                while c > g {
                    f /= RADIX;
                    c /= sqrdx;
                }
                if (c + r) / f < 0.95 * s {
                    done = false;
                    let g = 1.0 / f;
                    for j in 0..n {
                        a[(i, j)] *= g;
                    }
                    for j in 0..n {
                        a[(j, i)] *= f;
                    }
                }
            }
        }
    }
}

/// Reduction to upper Hessenberg form by elimination with pivoting.
/// Entries below the subdiagonal are zeroed on return.
fn hessenberg(a: &mut SquareMatrix) {
    let n = a.order;
    for m in 1..n.saturating_sub(1) {
        let mut x: f64 = 0.0;
        let mut pivot_row = m;
        for j in m..n {
            if a[(j, m - 1)].abs() > x.abs() {
                x = a[(j, m - 1)];
                pivot_row = j;
            }
        }
        if pivot_row != m {
            for j in m - 1..n {
                let tmp = a[(pivot_row, j)];
                a[(pivot_row, j)] = a[(m, j)];
                a[(m, j)] = tmp;
            }
            for j in 0..n {
                let tmp = a[(j, pivot_row)];
                a[(j, pivot_row)] = a[(j, m)];
                a[(j, m)] = tmp;
            }
        }
        if x != 0.0 {
            for i in m + 1..n {
                let mut y = a[(i, m - 1)];
                if y != 0.0 {
                    y /= x;
                    a[(i, m - 1)] = y;
                    for j in m..n {
                        a[(i, j)] -= y * a[(m, j)];
                    }
                    for j in 0..n {
                        a[(j, m)] += y * a[(j, i)];
                    }
                }
            }
        }
    }
    for i in 2..n {
        for j in 0..i - 1 {
            a[(i, j)] = 0.0;
        }
    }
}

/// Francis double-shift QR on an upper Hessenberg matrix. Returns the
/// eigenvalues or the number of iterations spent when the cap of
/// `30 * n` sweeps (or 30 on a single eigenvalue) is hit.
fn hqr(a: &mut SquareMatrix) -> std::result::Result<Vec<Complex64>, usize> {
    let n = a.order as isize;
    let at = |a: &SquareMatrix, i: isize, j: isize| a[(i as usize, j as usize)];
    let mut wr = vec![Complex64::new(0.0, 0.0); n as usize];
    let mut anorm = 0.0;
    for i in 0..n {
        for j in (i - 1).max(0)..n {
            anorm += at(a, i, j).abs();
        }
    }
    let cap = 30 * n as usize;
    let mut total = 0usize;
    let mut nn = n - 1;
    let mut t = 0.0;
    while nn >= 0 {
        let mut its = 0;
        loop {
            let mut l = nn;
            while l > 0 {
                let mut s = at(a, l - 1, l - 1).abs() + at(a, l, l).abs();
                if s == 0.0 {
                    s = anorm;
                }
                if at(a, l, l - 1).abs() <= f64::EPSILON * s {
                    a[(l as usize, (l - 1) as usize)] = 0.0;
                    break;
                }
                l -= 1;
            }
            let mut x = at(a, nn, nn);
            if l == nn {
                wr[nn as usize] = Complex64::new(x + t, 0.0);
                nn -= 1;
            } else {
                let mut y = at(a, nn - 1, nn - 1);
                let mut w = at(a, nn, nn - 1) * at(a, nn - 1, nn);
                if l == nn - 1 {
                    let p = 0.5 * (y - x);
                    let q = p * p + w;
                    let mut z = q.abs().sqrt();
                    x += t;
                    if q >= 0.0 {
                        z = p + z.copysign(p);
                        let first = x + z;
                        let second = if z != 0.0 { x - w / z } else { first };
                        wr[(nn - 1) as usize] = Complex64::new(first, 0.0);
                        wr[nn as usize] = Complex64::new(second, 0.0);
                    } else {
                        wr[(nn - 1) as usize] = Complex64::new(x + p, z);
                        wr[nn as usize] = Complex64::new(x + p, -z);
                    }
                    nn -= 2;
                } else {
                    if its == 30 || total >= cap {
                        return Err(total);
                    }
                    if its == 10 || its == 20 {
                        // exceptional shift
                        t += x;
                        for i in 0..=nn {
                            a[(i as usize, i as usize)] -= x;
                        }
                        let s = at(a, nn, nn - 1).abs() + at(a, nn - 1, nn - 2).abs();
                        x = 0.75 * s;
                        y = x;
                        w = -0.4375 * s * s;
                    }
                    its += 1;
                    total += 1;
                    let mut m = nn - 2;
                    let (mut p, mut q, mut r);
                    let mut z;
                    loop {
                        z = at(a, m, m);
                        let rr = x - z;
                        let ss = y - z;
                        p = (rr * ss - w) / at(a, m + 1, m) + at(a, m, m + 1);
                        q = at(a, m + 1, m + 1) - z - rr - ss;
                        r = at(a, m + 2, m + 1);
                        let s = p.abs() + q.abs() + r.abs();
                        p /= s;
                        q /= s;
                        r /= s;
                        if m == l {
                            break;
                        }
                        let u = at(a, m, m - 1).abs() * (q.abs() + r.abs());
                        let v = p.abs() * (at(a, m - 1, m - 1).abs() + z.abs() + at(a, m + 1, m + 1).abs());
                        if u <= f64::EPSILON * v {
                            break;
                        }
                        m -= 1;
                    }
                    for i in m..nn - 1 {
                        a[((i + 2) as usize, i as usize)] = 0.0;
                        if i != m {
                            a[((i + 2) as usize, (i - 1) as usize)] = 0.0;
                        }
                    }
                    let mut k = m;
                    while k < nn {
                        if k != m {
                            p = at(a, k, k - 1);
                            q = at(a, k + 1, k - 1);
                            r = 0.0;
                            if k + 1 != nn {
                                r = at(a, k + 2, k - 1);
                            }
                            x = p.abs() + q.abs() + r.abs();
                            if x != 0.0 {
                                p /= x;
                                q /= x;
                                r /= x;
                            }
                        }
                        let s = (p * p + q * q + r * r).sqrt().copysign(p);
                        if s != 0.0 {
                            if k == m {
                                if l != m {
                                    let v = -at(a, k, k - 1);
                                    a[(k as usize, (k - 1) as usize)] = v;
                                }
                            } else {
                                a[(k as usize, (k - 1) as usize)] = -s * x;
                            }
                            p += s;
                            x = p / s;
                            y = q / s;
                            z = r / s;
                            q /= p;
                            r /= p;
                            for j in k..=nn {
                                let mut pp = at(a, k, j) + q * at(a, k + 1, j);
                                if k + 1 != nn {
                                    pp += r * at(a, k + 2, j);
                                    a[((k + 2) as usize, j as usize)] -= pp * z;
                                }
                                a[((k + 1) as usize, j as usize)] -= pp * y;
                                a[(k as usize, j as usize)] -= pp * x;
                            }
                            let mmin = if nn < k + 3 { nn } else { k + 3 };
                            for i in l..=mmin {
                                let mut pp = x * at(a, i, k) + y * at(a, i, k + 1);
                                if k + 1 != nn {
                                    pp += z * at(a, i, k + 2);
                                    a[(i as usize, (k + 2) as usize)] -= pp * r;
                                }
                                a[(i as usize, (k + 1) as usize)] -= pp * q;
                                a[(i as usize, k as usize)] -= pp;
                            }
                        }
                        k += 1;
                    }
                }
            }
            if l + 1 >= nn {
                break;
            }
        }
    }
    Ok(wr)
}

/// Smallest achievable maximum distance between paired eigenvalues.
///
/// Exhaustive over all pairings up to order 8, greedy nearest pairing above.
pub fn spectrum_distance(a: &Spectrum, b: &Spectrum) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::OrderMismatch { left: a.len(), right: b.len() });
    }
    let n = a.len();
    let dist: Vec<Vec<f64>> =
        a.0.iter().map(|x| b.0.iter().map(|y| (x - y).norm()).collect()).collect();
    if n <= 8 {
        let mut perm: Vec<usize> = (0..n).collect();
        let mut best = f64::INFINITY;
        permute(&mut perm, 0, &dist, 0.0, &mut best);
        Ok(if n == 0 { 0.0 } else { best })
    } else {
        let mut used = vec![false; n];
        let mut worst: f64 = 0.0;
        for row in &dist {
            let (j, d) = row
                .iter()
                .enumerate()
                .filter(|(j, _)| !used[*j])
                .min_by(|x, y| x.1.total_cmp(y.1))
                .map(|(j, d)| (j, *d))
                .unwrap_or((0, f64::INFINITY));
            used[j] = true;
            worst = worst.max(d);
        }
        Ok(worst)
    }
}

fn permute(perm: &mut [usize], k: usize, dist: &[Vec<f64>], so_far: f64, best: &mut f64) {
    if so_far >= *best {
        return;
    }
    if k == perm.len() {
        *best = so_far;
        return;
    }
    for i in k..perm.len() {
        perm.swap(k, i);
        let d = dist[k][perm[k]];
        permute(perm, k + 1, dist, so_far.max(d), best);
        perm.swap(k, i);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn reals(s: &Spectrum) -> Vec<f64> {
        s.values().iter().map(|z| z.re).collect()
    }

    #[test]
    fn companion_two_by_two() {
        // t^2 + 3t + 2 = (t + 1)(t + 2)
        let disc: f64 = 9.0 - 8.0;
        let oracle = [(-3.0 - disc.sqrt()) / 2.0, (-3.0 + disc.sqrt()) / 2.0];
        let m = SquareMatrix::from_rows(&[vec![0.0, 1.0], vec![-2.0, -3.0]]).unwrap();
        let s = eigenvalues(&m).unwrap();
        assert_eq!(reals(&s), oracle);
        assert!(s.is_real(0.0));
    }

    #[test]
    fn identity_and_scalar() {
        let s = eigenvalues(&SquareMatrix::identity(3)).unwrap();
        assert_eq!(reals(&s), [1.0, 1.0, 1.0]);
        let a = 1.0;
        let s = eigenvalues(&SquareMatrix::from_rows(&[vec![-2.0 * a * a]]).unwrap()).unwrap();
        assert_eq!(reals(&s), [-2.0]);
    }

    #[test]
    fn rotation_has_conjugate_pair() {
        let m = SquareMatrix::from_rows(&[vec![0.0, 1.0], vec![-1.0, 0.0]]).unwrap();
        let s = eigenvalues(&m).unwrap();
        assert_eq!(s.values(), [Complex64::new(0.0, -1.0), Complex64::new(0.0, 1.0)]);
    }

    #[test]
    fn three_by_three_known_spectrum() {
        // upper triangular after similarity with a fixed permutation-ish P
        let t = SquareMatrix::from_rows(&[
            vec![2.0, 1.0, -1.0],
            vec![0.0, -3.0, 4.0],
            vec![0.0, 0.0, 0.5],
        ])
        .unwrap();
        let p = SquareMatrix::from_rows(&[
            vec![1.0, 2.0, 0.0],
            vec![0.0, 1.0, 3.0],
            vec![1.0, 0.0, 1.0],
        ])
        .unwrap();
        let m = p.mul(&t).unwrap().mul(&p.inverse().unwrap()).unwrap();
        let s = eigenvalues(&m).unwrap();
        let want = Spectrum::real(&[-3.0, 0.5, 2.0]);
        assert!(spectrum_distance(&s, &want).unwrap() < 1e-12);
    }

    #[test]
    fn complex_pair_in_larger_matrix() {
        let m = SquareMatrix::from_rows(&[
            vec![0.0, -2.0, 0.0, 0.0],
            vec![2.0, 0.0, 0.0, 0.0],
            vec![0.0, 0.0, 1.0, 5.0],
            vec![0.0, 0.0, 0.0, -1.0],
        ])
        .unwrap();
        let s = eigenvalues(&m).unwrap();
        let want = Spectrum::new(vec![
            Complex64::new(0.0, 2.0),
            Complex64::new(0.0, -2.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(-1.0, 0.0),
        ]);
        assert!(spectrum_distance(&s, &want).unwrap() < 1e-12);
    }

    #[test]
    fn solve_linear_cases() {
        let b = [3.0, -1.0, 2.5];
        assert_eq!(solve_linear(&SquareMatrix::identity(3), &b).unwrap(), b);
        let d = SquareMatrix::diagonal(&[2.0, 4.0]);
        assert_eq!(solve_linear(&d, &[2.0, 8.0]).unwrap(), [1.0, 2.0]);
        let s = SquareMatrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        assert!(matches!(solve_linear(&s, &[1.0, 2.0]), Err(Error::Singular { .. })));
    }

    #[test]
    fn distance_matches_multisets() {
        let a = Spectrum::real(&[-2.0, -1.0]);
        let b = Spectrum::new(vec![Complex64::new(-1.0, 0.0), Complex64::new(-2.0, 0.0)]);
        assert_eq!(spectrum_distance(&a, &b).unwrap(), 0.0);
        let big_a = 2.0;
        let c = Spectrum::real(&[2.0 * big_a]);
        assert_eq!(spectrum_distance(&c, &c).unwrap(), 0.0);
        assert_eq!(spectrum_distance(&Spectrum::real(&[0.0]), &Spectrum::real(&[1.0])).unwrap(), 1.0);
        assert!(spectrum_distance(&a, &c).is_err());
        // greedy path for order > 8
        let many: Vec<f64> = (0..10).map(f64::from).collect();
        let rev: Vec<f64> = many.iter().rev().copied().collect();
        assert_abs_diff_eq!(
            spectrum_distance(&Spectrum::real(&many), &Spectrum::real(&rev)).unwrap(),
            0.0
        );
    }

    #[test]
    fn inverse_round_trip() {
        let m = SquareMatrix::from_rows(&[vec![4.0, 1.0], vec![2.0, 3.0]]).unwrap();
        let prod = m.mul(&m.inverse().unwrap()).unwrap();
        assert!(prod.sub(&SquareMatrix::identity(2)).unwrap().max_abs() < 1e-15);
        assert!(SquareMatrix::new(2, vec![1.0, f64::NAN, 0.0, 1.0]).is_err());
    }
}
