//! Dense linear algebra over a prime field F_p.
//!
//! Residues are stored as `u32` and reduced eagerly. Pivoting is deterministic
//! (first nonzero entry in scan order), so every basis produced downstream is
//! reproducible bit for bit.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Multiplicative inverse of a nonzero residue.
pub fn inv(p: u32, a: u32) -> u32 {
    debug_assert!(!a.is_multiple_of(p));
    let mut result = 1u64;
    let mut base = a as u64 % p as u64;
    let mut e = p - 2;
    while e > 0 {
        if e & 1 == 1 {
            result = result * base % p as u64;
        }
        base = base * base % p as u64;
        e >>= 1;
    }
    result as u32
}

#[inline]
pub fn neg(p: u32, a: u32) -> u32 {
    if a == 0 {
        0
    } else {
        p - a
    }
}

/// Reduce a signed integer into `[0, p)`.
pub fn residue(p: u32, a: i64) -> u32 {
    a.rem_euclid(p as i64) as u32
}

pub fn is_prime(n: u32) -> bool {
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

/// `row += c * other`, reduced mod p.
#[inline]
pub(crate) fn axpy(p: u32, row: &mut [u32], c: u32, other: &[u32]) {
    if c == 0 {
        return;
    }
    for (x, &y) in row.iter_mut().zip(other) {
        if y != 0 {
            *x = (*x + c * y) % p;
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FpMatrix {
    p: u32,
    rows: usize,
    cols: usize,
    data: Vec<u32>,
}

impl FpMatrix {
    pub fn zeros(p: u32, rows: usize, cols: usize) -> Self {
        FpMatrix { p, rows, cols, data: vec![0; rows * cols] }
    }

    pub fn identity(p: u32, n: usize) -> Self {
        let mut m = Self::zeros(p, n, n);
        for i in 0..n {
            m.data[i * n + i] = 1;
        }
        m
    }

    pub fn from_vec(p: u32, rows: usize, cols: usize, data: Vec<u32>) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::Config(format!("{p} is not prime")));
        }
        if data.len() != rows * cols {
            return Err(Error::Malformed(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if let Some(x) = data.iter().find(|&&x| x >= p) {
            return Err(Error::Malformed(format!("entry {x} not reduced mod {p}")));
        }
        Ok(FpMatrix { p, rows, cols, data })
    }

    pub fn from_rows(p: u32, rows: &[Vec<u32>]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::Malformed("ragged rows".into()));
        }
        Self::from_vec(p, rows.len(), cols, rows.concat())
    }

    /// Matrix whose columns are the given vectors (all of length `rows`).
    pub fn from_columns(p: u32, rows: usize, columns: &[Vec<u32>]) -> Self {
        let mut m = Self::zeros(p, rows, columns.len());
        for (j, c) in columns.iter().enumerate() {
            debug_assert_eq!(c.len(), rows);
            for (i, &x) in c.iter().enumerate() {
                m.data[i * m.cols + j] = x;
            }
        }
        m
    }

    pub fn prime(&self) -> u32 {
        self.p
    }
    pub fn rows(&self) -> usize {
        self.rows
    }
    pub fn cols(&self) -> usize {
        self.cols
    }
    pub fn entries(&self) -> &[u32] {
        &self.data
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> u32 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: u32) {
        self.data[r * self.cols + c] = v % self.p;
    }

    pub fn add_to(&mut self, r: usize, c: usize, v: u32) {
        let i = r * self.cols + c;
        self.data[i] = (self.data[i] + v % self.p) % self.p;
    }

    pub fn row(&self, r: usize) -> &[u32] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<u32> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn row_vectors(&self) -> Vec<Vec<u32>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&x| x == 0)
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.p, self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.data[c * self.rows + r] = self.data[r * self.cols + c];
            }
        }
        t
    }

    pub fn mul(&self, other: &FpMatrix) -> FpMatrix {
        assert_eq!(self.cols, other.rows, "matrix shapes do not compose");
        let p = self.p;
        let mut out = Self::zeros(p, self.rows, other.cols);
        for r in 0..self.rows {
            let out_row = &mut out.data[r * other.cols..(r + 1) * other.cols];
            for k in 0..self.cols {
                let a = self.data[r * self.cols + k];
                if a != 0 {
                    axpy(p, out_row, a, &other.data[k * other.cols..(k + 1) * other.cols]);
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[u32]) -> Vec<u32> {
        assert_eq!(self.cols, v.len());
        let p = self.p as u64;
        (0..self.rows)
            .map(|r| {
                let s: u64 = self
                    .row(r)
                    .iter()
                    .zip(v)
                    .map(|(&a, &b)| a as u64 * b as u64)
                    .sum();
                (s % p) as u32
            })
            .collect()
    }

    pub fn add(&self, other: &FpMatrix) -> FpMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let p = self.p;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| (a + b) % p).collect();
        FpMatrix { p, rows: self.rows, cols: self.cols, data }
    }

    pub fn scale(&self, c: u32) -> FpMatrix {
        let p = self.p;
        let data = self.data.iter().map(|&a| a * (c % p) % p).collect();
        FpMatrix { p, rows: self.rows, cols: self.cols, data }
    }

    /// Reduced row-echelon form, rank and pivot columns.
    pub fn rref(&self) -> (FpMatrix, usize, Vec<usize>) {
        let mut m = self.clone();
        let pivots = m.rref_in_place();
        let rank = pivots.len();
        (m, rank, pivots)
    }

    fn rref_in_place(&mut self) -> Vec<usize> {
        let p = self.p;
        let (rows, cols) = (self.rows, self.cols);
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..cols {
            if r == rows {
                break;
            }
            let Some(pr) = (r..rows).find(|&i| self.data[i * cols + c] != 0) else {
                continue;
            };
            if pr != r {
                for j in 0..cols {
                    self.data.swap(pr * cols + j, r * cols + j);
                }
            }
            let s = inv(p, self.data[r * cols + c]);
            for x in &mut self.data[r * cols..(r + 1) * cols] {
                *x = *x * s % p;
            }
            let pivot_row = self.data[r * cols..(r + 1) * cols].to_vec();
            for i in 0..rows {
                if i != r {
                    let f = self.data[i * cols + c];
                    if f != 0 {
                        axpy(p, &mut self.data[i * cols..(i + 1) * cols], p - f, &pivot_row);
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    pub fn rank(&self) -> usize {
        self.rref().1
    }

    pub fn kernel_basis(&self) -> Subspace {
        let (r, _, pivots) = self.rref();
        let p = self.p;
        let mut is_pivot = vec![false; self.cols];
        for &c in &pivots {
            is_pivot[c] = true;
        }
        let vectors: Vec<Vec<u32>> = (0..self.cols)
            .filter(|&f| !is_pivot[f])
            .map(|f| {
                let mut v = vec![0; self.cols];
                v[f] = 1;
                for (i, &c) in pivots.iter().enumerate() {
                    v[c] = neg(p, r.get(i, f));
                }
                v
            })
            .collect();
        Subspace::spanned_by(p, self.cols, vectors)
    }

    pub fn image_basis(&self) -> Subspace {
        let (r, rank, _) = self.transpose().rref();
        Subspace::spanned_by(self.p, self.rows, r.row_vectors().into_iter().take(rank).collect())
    }

    /// Some `x` with `self * x = b`, or `None` if the system is inconsistent.
    pub fn solve(&self, b: &[u32]) -> Option<Vec<u32>> {
        assert_eq!(b.len(), self.rows);
        let mut aug = FpMatrix::zeros(self.p, self.rows, self.cols + 1);
        for r in 0..self.rows {
            aug.data[r * (self.cols + 1)..r * (self.cols + 1) + self.cols]
                .copy_from_slice(self.row(r));
            aug.data[r * (self.cols + 1) + self.cols] = b[r] % self.p;
        }
        let pivots = aug.rref_in_place();
        if pivots.last() == Some(&self.cols) {
            return None;
        }
        let mut x = vec![0; self.cols];
        for (i, &c) in pivots.iter().enumerate() {
            x[c] = aug.get(i, self.cols);
        }
        Some(x)
    }
}

/// A subspace of F_p^n stored as a reduced echelon basis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Subspace {
    p: u32,
    ambient: usize,
    basis: Vec<Vec<u32>>,
    pivots: Vec<usize>,
}

impl Subspace {
    pub fn zero(p: u32, ambient: usize) -> Self {
        Subspace { p, ambient, basis: Vec::new(), pivots: Vec::new() }
    }

    pub fn full(p: u32, ambient: usize) -> Self {
        Self::spanned_by(p, ambient, FpMatrix::identity(p, ambient).row_vectors())
    }

    /// Span of an arbitrary (possibly dependent) family.
    pub fn spanned_by(p: u32, ambient: usize, vectors: Vec<Vec<u32>>) -> Self {
        if vectors.is_empty() {
            return Self::zero(p, ambient);
        }
        let m = FpMatrix {
            p,
            rows: vectors.len(),
            cols: ambient,
            data: vectors.concat(),
        };
        let (r, rank, pivots) = m.rref();
        let basis = r.row_vectors().into_iter().take(rank).collect();
        Subspace { p, ambient, basis, pivots }
    }

    /// Wrap a family that the caller asserts is an independent basis. The
    /// claim is validated by [`quotient_basis`] and [`Subspace::validate`].
    pub fn from_basis_unchecked(p: u32, ambient: usize, basis: Vec<Vec<u32>>) -> Self {
        Subspace { p, ambient, basis, pivots: Vec::new() }
    }

    /// Check that the stored family is independent and in reduced echelon form.
    pub fn validate(&self) -> Result<()> {
        if self.basis.iter().any(|v| v.len() != self.ambient) {
            return Err(Error::Malformed("basis vector of wrong length".into()));
        }
        let s = Self::spanned_by(self.p, self.ambient, self.basis.clone());
        if s.dim() != self.basis.len() {
            return Err(Error::Malformed(format!(
                "{} basis vectors span only a {}-dimensional space",
                self.basis.len(),
                s.dim()
            )));
        }
        Ok(())
    }

    pub fn prime(&self) -> u32 {
        self.p
    }
    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }
    pub fn dim(&self) -> usize {
        self.basis.len()
    }
    pub fn basis(&self) -> &[Vec<u32>] {
        &self.basis
    }
    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    /// Subtract multiples of basis vectors to clear every pivot column of `v`.
    pub fn reduce(&self, v: &mut [u32]) {
        for (b, &c) in self.basis.iter().zip(&self.pivots) {
            let f = v[c];
            if f != 0 {
                axpy(self.p, v, self.p - f, b);
            }
        }
    }

    pub fn contains(&self, v: &[u32]) -> bool {
        let mut w = v.to_vec();
        self.reduce(&mut w);
        w.iter().all(|&x| x == 0)
    }

    /// Coordinates of `v` (assumed to lie in the subspace) in the echelon basis.
    pub fn coordinates(&self, v: &[u32]) -> Vec<u32> {
        self.pivots.iter().map(|&c| v[c]).collect()
    }

    pub fn sum(&self, other: &Subspace) -> Subspace {
        let mut vs = self.basis.clone();
        vs.extend(other.basis.iter().cloned());
        Self::spanned_by(self.p, self.ambient, vs)
    }

    pub fn is_subspace_of(&self, other: &Subspace) -> bool {
        self.basis.iter().all(|v| other.contains(v))
    }

    /// Matrix whose columns are the basis vectors (an inclusion map).
    pub fn inclusion_matrix(&self) -> FpMatrix {
        FpMatrix::from_columns(self.p, self.ambient, &self.basis)
    }
}

/// Coset representatives completing `sub` to a basis of F_p^ambient: the
/// standard vectors at the non-pivot columns of the echelon form, in index
/// order.
pub fn quotient_basis(ambient_dim: usize, sub: &Subspace) -> Result<Vec<Vec<u32>>> {
    if sub.ambient_dim() != ambient_dim {
        return Err(Error::Malformed(format!(
            "subspace lives in dimension {}, not {ambient_dim}",
            sub.ambient_dim()
        )));
    }
    sub.validate()?;
    let echelon = Subspace::spanned_by(sub.p, ambient_dim, sub.basis.clone());
    Ok(complement_indices(ambient_dim, echelon.pivots())
        .into_iter()
        .map(|j| {
            let mut e = vec![0; ambient_dim];
            e[j] = 1;
            e
        })
        .collect())
}

/// Indices in `0..n` that are not pivots.
pub(crate) fn complement_indices(n: usize, pivots: &[usize]) -> Vec<usize> {
    let mut is_pivot = vec![false; n];
    for &c in pivots {
        is_pivot[c] = true;
    }
    (0..n).filter(|&j| !is_pivot[j]).collect()
}

/// A subquotient Z/B of F_p^n with B ⊆ Z, with chosen representatives and a
/// coordinate map for cycles.
#[derive(Clone, Debug)]
pub struct Subquotient {
    boundaries: Subspace,
    reps: Subspace,
}

impl Subquotient {
    pub fn new(cycles: &Subspace, boundaries: Subspace) -> Self {
        let residues = cycles
            .basis()
            .iter()
            .map(|z| {
                let mut z = z.clone();
                boundaries.reduce(&mut z);
                z
            })
            .collect();
        let reps = Subspace::spanned_by(cycles.prime(), cycles.ambient_dim(), residues);
        Subquotient { boundaries, reps }
    }

    pub fn dim(&self) -> usize {
        self.reps.dim()
    }

    pub fn representatives(&self) -> &[Vec<u32>] {
        self.reps.basis()
    }

    /// Class of a cycle in the representative basis.
    pub fn coordinates(&self, z: &[u32]) -> Vec<u32> {
        let mut z = z.to_vec();
        self.boundaries.reduce(&mut z);
        self.reps.coordinates(&z)
    }

    pub fn is_boundary(&self, z: &[u32]) -> bool {
        self.boundaries.contains(z)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(p: u32, rows: &[&[u32]]) -> FpMatrix {
        FpMatrix::from_rows(p, &rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn rref_examples() {
        let id = FpMatrix::identity(3, 2);
        assert_eq!(id.rref(), (id.clone(), 2, vec![0, 1]));
        let z = FpMatrix::zeros(5, 3, 4);
        assert_eq!(z.rref().1, 0);
        assert!(z.rref().0.is_zero());
        let a = m(5, &[&[1, 2], &[2, 4]]);
        let (r, rank, piv) = a.rref();
        assert_eq!(r, m(5, &[&[1, 2], &[0, 0]]));
        assert_eq!((rank, piv), (1, vec![0]));
    }

    #[test]
    fn kernel_examples() {
        assert_eq!(FpMatrix::zeros(3, 2, 3).kernel_basis().dim(), 3);
        assert_eq!(FpMatrix::identity(5, 4).kernel_basis().dim(), 0);
        let k = m(5, &[&[1, 2], &[2, 4]]).kernel_basis();
        assert_eq!(k.dim(), 1);
        assert!(k.contains(&[3, 1]));
    }

    #[test]
    fn image_examples() {
        assert_eq!(FpMatrix::identity(5, 3).image_basis().dim(), 3);
        assert_eq!(FpMatrix::zeros(5, 3, 3).image_basis().dim(), 0);
        let im = m(5, &[&[1, 2], &[2, 4]]).image_basis();
        assert_eq!(im.dim(), 1);
        assert!(im.contains(&[1, 2]));
    }

    #[test]
    fn quotient_examples() {
        let e1 = Subspace::spanned_by(3, 3, vec![vec![1, 0, 0]]);
        assert_eq!(quotient_basis(3, &e1).unwrap(), vec![vec![0, 1, 0], vec![0, 0, 1]]);
        assert!(quotient_basis(2, &Subspace::full(3, 2)).unwrap().is_empty());
        let s = Subspace::spanned_by(5, 2, vec![vec![1, 2]]);
        assert_eq!(quotient_basis(2, &s).unwrap(), vec![vec![0, 1]]);
        let bad = Subspace::from_basis_unchecked(5, 2, vec![vec![1, 2], vec![2, 4]]);
        assert!(matches!(quotient_basis(2, &bad), Err(Error::Malformed(_))));
    }

    #[test]
    fn solve_and_subquotient() {
        let a = m(7, &[&[1, 2, 3], &[0, 1, 4]]);
        let x = a.solve(&[5, 6]).unwrap();
        assert_eq!(a.mul_vec(&x), vec![5, 6]);
        assert!(m(7, &[&[1, 1], &[2, 2]]).solve(&[1, 0]).is_none());

        let z = Subspace::full(3, 3);
        let b = Subspace::spanned_by(3, 3, vec![vec![1, 1, 0]]);
        let h = Subquotient::new(&z, b);
        assert_eq!(h.dim(), 2);
        assert_eq!(h.coordinates(&[1, 1, 0]), vec![0, 0]);
    }

    #[test]
    fn inverse_is_inverse() {
        for p in [3, 5, 7, 11, 13] {
            for a in 1..p {
                assert_eq!(a * inv(p, a) % p, 1);
            }
        }
    }
}
