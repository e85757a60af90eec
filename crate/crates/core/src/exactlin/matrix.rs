//! Dense matrices over a [`Ring`], plus exact linear algebra over a [`Field`].

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use super::ring::{Field, Rational, Ring};

#[derive(Clone, PartialEq)]
pub struct Mat<R: Ring> {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<R>,
    /// Any element of the ring; used to build zeros and ones.
    pub proto: R,
}

impl<R: Ring> fmt::Debug for Mat<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Mat {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|c| format!("{:?}", self.get(r, c))).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}

impl<R: Ring> Mat<R> {
    pub fn zeros(rows: usize, cols: usize, proto: &R) -> Self {
        let z = proto.zero_like();
        Mat { rows, cols, data: vec![z.clone(); rows * cols], proto: z }
    }

    pub fn identity(n: usize, proto: &R) -> Self {
        let mut m = Mat::zeros(n, n, proto);
        for i in 0..n {
            m.set(i, i, proto.one_like());
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<R>>, proto: &R) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        let mut m = Mat::zeros(r, c, proto);
        for (i, row) in rows.into_iter().enumerate() {
            assert_eq!(row.len(), c, "ragged matrix rows");
            for (j, v) in row.into_iter().enumerate() {
                m.set(i, j, v);
            }
        }
        m
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> &R {
        &self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: R) {
        self.data[r * self.cols + c] = v;
    }

    pub fn add_at(&mut self, r: usize, c: usize, v: R) {
        let i = r * self.cols + c;
        let old = std::mem::replace(&mut self.data[i], self.proto.zero_like());
        self.data[i] = old + v;
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn nonzero_entries(&self) -> Vec<(usize, usize, R)> {
        let mut out = Vec::new();
        for r in 0..self.rows {
            for c in 0..self.cols {
                let v = self.get(r, c);
                if !v.is_zero() {
                    out.push((r, c, v.clone()));
                }
            }
        }
        out
    }

    pub fn transpose(&self) -> Self {
        let mut m = Mat::zeros(self.cols, self.rows, &self.proto);
        for r in 0..self.rows {
            for c in 0..self.cols {
                m.set(c, r, self.get(r, c).clone());
            }
        }
        m
    }

    pub fn scale(&self, q: &Rational) -> Self {
        self.map(|x| x.scale(q))
    }

    pub fn scale_by(&self, s: &R) -> Self {
        self.map(|x| if x.is_zero() { x.clone() } else { s.clone() * x.clone() })
    }

    pub fn map<S: Ring>(&self, f: impl Fn(&R) -> S) -> Mat<S> {
        let data: Vec<S> = self.data.iter().map(&f).collect();
        let proto = f(&self.proto).zero_like();
        Mat { rows: self.rows, cols: self.cols, data, proto }
    }

    pub fn matmul(&self, o: &Mat<R>) -> Mat<R> {
        assert_eq!(self.cols, o.rows, "matmul shape mismatch {}x{} * {}x{}", self.rows, self.cols, o.rows, o.cols);
        let mut out = Mat::zeros(self.rows, o.cols, &self.proto);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..o.cols {
                    let b = o.get(k, j);
                    if b.is_zero() {
                        continue;
                    }
                    out.add_at(i, j, a.clone() * b.clone());
                }
            }
        }
        out
    }

    /// Plain (unsigned) Kronecker product; row index `r1*rows2 + r2`.
    pub fn kron(&self, o: &Mat<R>) -> Mat<R> {
        let mut out = Mat::zeros(self.rows * o.rows, self.cols * o.cols, &self.proto);
        for r1 in 0..self.rows {
            for c1 in 0..self.cols {
                let a = self.get(r1, c1);
                if a.is_zero() {
                    continue;
                }
                for r2 in 0..o.rows {
                    for c2 in 0..o.cols {
                        let b = o.get(r2, c2);
                        if b.is_zero() {
                            continue;
                        }
                        out.set(r1 * o.rows + r2, c1 * o.cols + c2, a.clone() * b.clone());
                    }
                }
            }
        }
        out
    }

    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Mat<R> {
        let mut m = Mat::zeros(rows.len(), cols.len(), &self.proto);
        for (i, &r) in rows.iter().enumerate() {
            for (j, &c) in cols.iter().enumerate() {
                m.set(i, j, self.get(r, c).clone());
            }
        }
        m
    }

    pub fn column(&self, c: usize) -> Vec<R> {
        (0..self.rows).map(|r| self.get(r, c).clone()).collect()
    }

    pub fn apply(&self, v: &[R]) -> Vec<R> {
        assert_eq!(v.len(), self.cols);
        let mut out = vec![self.proto.zero_like(); self.rows];
        for r in 0..self.rows {
            for (c, x) in v.iter().enumerate() {
                let a = self.get(r, c);
                if a.is_zero() || x.is_zero() {
                    continue;
                }
                let old = std::mem::replace(&mut out[r], self.proto.zero_like());
                out[r] = old + a.clone() * x.clone();
            }
        }
        out
    }
}

impl<R: Ring> Add for &Mat<R> {
    type Output = Mat<R>;
    fn add(self, o: &Mat<R>) -> Mat<R> {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols), "add shape mismatch");
        let data = self.data.iter().zip(&o.data).map(|(a, b)| a.clone() + b.clone()).collect();
        Mat { rows: self.rows, cols: self.cols, data, proto: self.proto.clone() }
    }
}

impl<R: Ring> Sub for &Mat<R> {
    type Output = Mat<R>;
    fn sub(self, o: &Mat<R>) -> Mat<R> {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols), "sub shape mismatch");
        let data = self.data.iter().zip(&o.data).map(|(a, b)| a.clone() - b.clone()).collect();
        Mat { rows: self.rows, cols: self.cols, data, proto: self.proto.clone() }
    }
}

impl<R: Ring> Neg for &Mat<R> {
    type Output = Mat<R>;
    fn neg(self) -> Mat<R> {
        self.map(|x| -x.clone())
    }
}

impl<R: Ring> Mul for &Mat<R> {
    type Output = Mat<R>;
    fn mul(self, o: &Mat<R>) -> Mat<R> {
        self.matmul(o)
    }
}

macro_rules! owned_ops {
    ($tr:ident, $f:ident) => {
        impl<R: Ring> $tr for Mat<R> {
            type Output = Mat<R>;
            fn $f(self, o: Mat<R>) -> Mat<R> {
                (&self).$f(&o)
            }
        }
    };
}
owned_ops!(Add, add);
owned_ops!(Sub, sub);
owned_ops!(Mul, mul);

impl<R: Ring> Neg for Mat<R> {
    type Output = Mat<R>;
    fn neg(self) -> Mat<R> {
        -&self
    }
}

/// Result of row reduction: reduced matrix, pivot columns, and the
/// row operations applied (as a left multiplier).
pub struct Rref<F: Field> {
    pub reduced: Mat<F>,
    pub pivots: Vec<usize>,
    pub transform: Mat<F>,
}

impl<F: Field> Mat<F> {
    pub fn rref(&self) -> Rref<F> {
        let mut a = self.clone();
        let mut t = Mat::identity(self.rows, &self.proto);
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..a.cols {
            if row == a.rows {
                break;
            }
            let Some(p) = (row..a.rows).find(|&r| !a.get(r, col).is_zero()) else {
                continue;
            };
            a.swap_rows(row, p);
            t.swap_rows(row, p);
            let inv = a.get(row, col).inv().expect("nonzero pivot");
            a.scale_row(row, &inv);
            t.scale_row(row, &inv);
            for r in 0..a.rows {
                if r != row && !a.get(r, col).is_zero() {
                    let f = a.get(r, col).clone();
                    a.axpy_row(r, row, &f);
                    t.axpy_row(r, row, &f);
                }
            }
            pivots.push(col);
            row += 1;
        }
        Rref { reduced: a, pivots, transform: t }
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
    }

    fn scale_row(&mut self, r: usize, s: &F) {
        for c in 0..self.cols {
            let v = self.get(r, c).clone();
            if !v.is_zero() {
                self.set(r, c, v * s.clone());
            }
        }
    }

    /// row_r -= f * row_p
    fn axpy_row(&mut self, r: usize, p: usize, f: &F) {
        for c in 0..self.cols {
            let b = self.get(p, c).clone();
            if b.is_zero() {
                continue;
            }
            let v = self.get(r, c).clone() - f.clone() * b;
            self.set(r, c, v);
        }
    }

    pub fn rank(&self) -> usize {
        self.rref().pivots.len()
    }

    /// Basis of the kernel, one column per free variable (in increasing order).
    pub fn nullspace(&self) -> Mat<F> {
        let Rref { reduced, pivots, .. } = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        let mut k = Mat::zeros(self.cols, free.len(), &self.proto);
        for (j, &f) in free.iter().enumerate() {
            k.set(f, j, self.proto.one_like());
            for (i, &p) in pivots.iter().enumerate() {
                let v = reduced.get(i, f);
                if !v.is_zero() {
                    k.set(p, j, -v.clone());
                }
            }
        }
        k
    }

    /// Solves `self * X = b`, setting all free variables to zero.
    /// Returns `None` if the system is inconsistent.
    pub fn solve(&self, b: &Mat<F>) -> Option<Mat<F>> {
        assert_eq!(self.rows, b.rows);
        let Rref { reduced, pivots, transform } = self.rref();
        let tb = transform.matmul(b);
        for r in pivots.len()..self.rows {
            for c in 0..b.cols {
                if !tb.get(r, c).is_zero() {
                    return None;
                }
            }
        }
        let _ = reduced;
        let mut x = Mat::zeros(self.cols, b.cols, &self.proto);
        for (i, &p) in pivots.iter().enumerate() {
            for c in 0..b.cols {
                x.set(p, c, tb.get(i, c).clone());
            }
        }
        Some(x)
    }

    pub fn inverse(&self) -> Option<Mat<F>> {
        if !self.is_square() {
            return None;
        }
        let r = self.rref();
        if r.pivots.len() != self.rows {
            return None;
        }
        Some(r.transform)
    }
}

pub fn rat_mat(rows: &[&[i64]]) -> Mat<Rational> {
    let proto = Rational::from_integer(0.into());
    Mat::from_rows(
        rows.iter().map(|r| r.iter().map(|&x| Rational::from_integer(x.into())).collect()).collect(),
        &proto,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactlin::ring::int;

    #[test]
    fn inverse_roundtrip() {
        let a = rat_mat(&[&[2, 1, 0], &[1, 1, 0], &[0, 3, 1]]);
        let inv = a.inverse().unwrap();
        assert_eq!(&a * &inv, Mat::identity(3, &int(0)));
        assert!(rat_mat(&[&[1, 2], &[2, 4]]).inverse().is_none());
    }

    #[test]
    fn nullspace_and_solve() {
        let a = rat_mat(&[&[1, 2, 3], &[2, 4, 6]]);
        let k = a.nullspace();
        assert_eq!(k.cols, 2);
        assert!((&a * &k).is_zero());
        let b = rat_mat(&[&[1], &[2]]);
        let x = a.solve(&b).unwrap();
        assert_eq!(&a * &x, b);
        assert!(a.solve(&rat_mat(&[&[1], &[3]])).is_none());
    }

    #[test]
    fn kron_index_convention() {
        let a = rat_mat(&[&[0, 1], &[0, 0]]);
        let b = rat_mat(&[&[1, 0], &[0, 2]]);
        let k = a.kron(&b);
        assert_eq!(k.get(1, 3), &int(2));
        assert_eq!(k.get(0, 2), &int(1));
    }
}
