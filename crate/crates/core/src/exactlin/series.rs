//! Truncated multivariate power series with an optional Laurent variable.
//!
//! Ordinary variables `t_1..t_m` are truncated at total degree `order`.
//! The extra variable `z` (if enabled) lives in the window `[-zwin, zwin]`;
//! any product landing outside the window sets a sticky overflow flag which
//! callers turn into an error instead of silently dropping terms.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use super::graded::GradedMap;
use super::matrix::Mat;
use super::ring::{Rational, Ring, Scalar};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeriesCtx {
    pub names: Vec<String>,
    pub order: u32,
    /// `None` disables the Laurent variable.
    pub zwin: Option<i32>,
}

impl SeriesCtx {
    pub fn new(names: &[&str], order: u32) -> Arc<Self> {
        Arc::new(SeriesCtx { names: names.iter().map(|s| s.to_string()).collect(), order, zwin: None })
    }
    pub fn with_z(names: &[&str], order: u32, zwin: i32) -> Arc<Self> {
        Arc::new(SeriesCtx {
            names: names.iter().map(|s| s.to_string()).collect(),
            order,
            zwin: Some(zwin),
        })
    }
    pub fn nvars(&self) -> usize {
        self.names.len()
    }
}

/// Monomial key: z exponent first, then the exponents of `t`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Mono {
    pub z: i32,
    pub e: Vec<u32>,
}

impl Mono {
    pub fn degree(&self) -> u32 {
        self.e.iter().sum()
    }
}

#[derive(Clone)]
pub struct Series<C: Scalar = Rational> {
    pub ctx: Arc<SeriesCtx>,
    pub terms: BTreeMap<Mono, C>,
    pub overflow: bool,
}

impl<C: Scalar> PartialEq for Series<C> {
    fn eq(&self, o: &Self) -> bool {
        self.terms == o.terms
    }
}

impl<C: Scalar> Series<C> {
    pub fn zero(ctx: &Arc<SeriesCtx>) -> Self {
        Series { ctx: ctx.clone(), terms: BTreeMap::new(), overflow: false }
    }
    pub fn constant(ctx: &Arc<SeriesCtx>, c: C) -> Self {
        let mut s = Series::zero(ctx);
        s.add_term(Mono { z: 0, e: vec![0; ctx.nvars()] }, c);
        s
    }
    pub fn var(ctx: &Arc<SeriesCtx>, k: usize) -> Self {
        let mut e = vec![0; ctx.nvars()];
        e[k] = 1;
        let mut s = Series::zero(ctx);
        s.add_term(Mono { z: 0, e }, C::one_s());
        s
    }
    pub fn monomial(ctx: &Arc<SeriesCtx>, z: i32, e: Vec<u32>, c: C) -> Self {
        let mut s = Series::zero(ctx);
        s.add_term(Mono { z, e }, c);
        s
    }
    pub fn z_pow(ctx: &Arc<SeriesCtx>, k: i32) -> Self {
        Series::monomial(ctx, k, vec![0; ctx.nvars()], C::one_s())
    }

    /// Adds a term, respecting the truncation and window.
    pub fn add_term(&mut self, m: Mono, c: C) {
        if c.is_zero() || m.degree() > self.ctx.order {
            return;
        }
        match self.ctx.zwin {
            None => debug_assert_eq!(m.z, 0),
            Some(w) => {
                if m.z.abs() > w {
                    self.overflow = true;
                    return;
                }
            }
        }
        self.add_term_fast(m, c);
    }

    fn add_term_fast(&mut self, m: Mono, c: C) {
        use std::collections::btree_map::Entry;
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                let v = o.get().clone() + c;
                if v.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = v;
                }
            }
        }
    }

    pub fn coeff(&self, z: i32, e: &[u32]) -> C {
        self.terms.get(&Mono { z, e: e.to_vec() }).cloned().unwrap_or_else(C::zero_s)
    }

    pub fn constant_term(&self) -> C {
        self.coeff(0, &vec![0; self.ctx.nvars()])
    }

    /// Part of exact total t-degree `d`.
    pub fn homogeneous(&self, d: u32) -> Series<C> {
        let mut s = Series::zero(&self.ctx);
        for (m, c) in &self.terms {
            if m.degree() == d {
                s.terms.insert(m.clone(), c.clone());
            }
        }
        s
    }

    /// Coefficient of `z^k` as a series with no z dependence.
    pub fn z_coeff(&self, k: i32) -> Series<C> {
        let mut s = Series::zero(&self.ctx);
        for (m, c) in &self.terms {
            if m.z == k {
                s.terms.insert(Mono { z: 0, e: m.e.clone() }, c.clone());
            }
        }
        s
    }

    pub fn z_range(&self) -> Option<(i32, i32)> {
        let lo = self.terms.keys().map(|m| m.z).min()?;
        let hi = self.terms.keys().map(|m| m.z).max()?;
        Some((lo, hi))
    }

    pub fn truncate(&self, order: u32) -> Series<C> {
        let mut s = self.clone();
        s.terms.retain(|m, _| m.degree() <= order);
        s
    }

    pub fn mul_z(&self, k: i32) -> Series<C> {
        let mut s = Series::zero(&self.ctx);
        s.overflow = self.overflow;
        for (m, c) in &self.terms {
            s.add_term(Mono { z: m.z + k, e: m.e.clone() }, c.clone());
        }
        s
    }

    /// Partial derivative in `t_k`.
    pub fn diff(&self, k: usize) -> Series<C> {
        let mut s = Series::zero(&self.ctx);
        s.overflow = self.overflow;
        for (m, c) in &self.terms {
            if m.e[k] > 0 {
                let mut e = m.e.clone();
                let p = e[k];
                e[k] -= 1;
                s.add_term_fast(Mono { z: m.z, e }, c.scale(&Rational::from_integer(p.into())));
            }
        }
        s
    }

    /// Evaluates `t_k` at a rational value (other variables untouched).
    pub fn subst_var(&self, k: usize, v: &C) -> Series<C> {
        let mut s = Series::zero(&self.ctx);
        s.overflow = self.overflow;
        for (m, c) in &self.terms {
            let mut e = m.e.clone();
            let p = e[k];
            e[k] = 0;
            let mut f = c.clone();
            for _ in 0..p {
                f = f * v.clone();
            }
            s.add_term_fast(Mono { z: m.z, e }, f);
        }
        s
    }

    /// Substitutes a series (same context) for `t_k`.
    pub fn subst_series(&self, k: usize, v: &Series<C>) -> Series<C> {
        let mut out = Series::zero(&self.ctx);
        out.overflow = self.overflow || v.overflow;
        for (m, c) in &self.terms {
            let mut e = m.e.clone();
            let p = e[k];
            e[k] = 0;
            let mut term = Series::monomial(&self.ctx, m.z, e, c.clone());
            for _ in 0..p {
                term = &term * v;
            }
            out = out + term;
        }
        out
    }

    /// Moves the series into `ctx`, sending variable `k` to `positions[k]`.
    pub fn embed(&self, ctx: &Arc<SeriesCtx>, positions: &[usize]) -> Series<C> {
        let mut s = Series::zero(ctx);
        s.overflow = self.overflow;
        for (m, c) in &self.terms {
            let mut e = vec![0; ctx.nvars()];
            for (k, &p) in m.e.iter().enumerate() {
                e[positions[k]] += p;
            }
            s.add_term(Mono { z: m.z, e }, c.clone());
        }
        s
    }

    /// Multiplies every coefficient by `c`.
    pub fn scale_by_scalar(&self, c: &C) -> Series<C> {
        if c.is_zero() {
            let mut s = Series::zero(&self.ctx);
            s.overflow = self.overflow;
            return s;
        }
        let mut s = self.clone();
        for v in s.terms.values_mut() {
            *v = v.clone() * c.clone();
        }
        s
    }

    pub fn max_degree(&self) -> Option<u32> {
        self.terms.keys().map(|m| m.degree()).max()
    }
}

impl<C: Scalar> fmt::Debug for Series<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl<C: Scalar> fmt::Display for Series<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({})", c.render())?;
            if m.z != 0 {
                write!(f, "*z^{}", m.z)?;
            }
            for (k, p) in m.e.iter().enumerate() {
                if *p > 0 {
                    write!(f, "*{}^{}", self.ctx.names[k], p)?;
                }
            }
        }
        Ok(())
    }
}

impl<C: Scalar> Add for Series<C> {
    type Output = Series<C>;
    fn add(mut self, o: Series<C>) -> Series<C> {
        self.overflow |= o.overflow;
        for (m, c) in o.terms {
            self.add_term_fast(m, c);
        }
        self
    }
}

impl<C: Scalar> Sub for Series<C> {
    type Output = Series<C>;
    fn sub(self, o: Series<C>) -> Series<C> {
        self + (-o)
    }
}

impl<C: Scalar> Neg for Series<C> {
    type Output = Series<C>;
    fn neg(mut self) -> Series<C> {
        for c in self.terms.values_mut() {
            *c = -c.clone();
        }
        self
    }
}

impl<C: Scalar> Mul for Series<C> {
    type Output = Series<C>;
    fn mul(self, o: Series<C>) -> Series<C> {
        &self * &o
    }
}

impl<'a, C: Scalar> Mul<&'a Series<C>> for &'a Series<C> {
    type Output = Series<C>;
    fn mul(self, o: &Series<C>) -> Series<C> {
        let mut s = Series::zero(&self.ctx);
        s.overflow = self.overflow || o.overflow;
        let order = self.ctx.order;
        let win = self.ctx.zwin;
        for (m1, c1) in &self.terms {
            let d1 = m1.degree();
            for (m2, c2) in &o.terms {
                if d1 + m2.degree() > order {
                    continue;
                }
                let z = m1.z + m2.z;
                if let Some(w) = win {
                    if z.abs() > w {
                        s.overflow = true;
                        continue;
                    }
                }
                let e = m1.e.iter().zip(&m2.e).map(|(a, b)| a + b).collect();
                s.add_term_fast(Mono { z, e }, c1.clone() * c2.clone());
            }
        }
        s
    }
}

impl<C: Scalar> Ring for Series<C> {
    fn render(&self) -> String {
        self.to_string()
    }
    fn zero_like(&self) -> Self {
        Series::zero(&self.ctx)
    }
    fn one_like(&self) -> Self {
        Series::constant(&self.ctx, C::one_s())
    }
    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
    fn scale(&self, q: &Rational) -> Self {
        if num_traits::Zero::is_zero(q) {
            let mut s = Series::zero(&self.ctx);
            s.overflow = self.overflow;
            return s;
        }
        let mut s = self.clone();
        for c in s.terms.values_mut() {
            *c = c.scale(q);
        }
        s
    }
}

/// Embeds a scalar matrix as constant series.
pub fn lift_mat<C: Scalar>(m: &Mat<C>, ctx: &Arc<SeriesCtx>) -> Mat<Series<C>> {
    let z = Series::zero(ctx);
    let data = m.data.iter().map(|c| if c.is_zero() { z.clone() } else { Series::constant(ctx, c.clone()) }).collect();
    Mat { rows: m.rows, cols: m.cols, data, proto: z }
}

pub fn lift_map<C: Scalar>(m: &GradedMap<C>, ctx: &Arc<SeriesCtx>) -> GradedMap<Series<C>> {
    GradedMap::new_unchecked(m.source.clone(), m.target.clone(), m.parity, lift_mat(&m.mat, ctx))
}

/// Coefficient of a fixed monomial, entrywise.
pub fn coeff_mat<C: Scalar>(m: &Mat<Series<C>>, z: i32, e: &[u32]) -> Mat<C> {
    let data = m.data.iter().map(|s| s.coeff(z, e)).collect();
    Mat { rows: m.rows, cols: m.cols, data, proto: C::zero_s() }
}

pub fn coeff_map<C: Scalar>(m: &GradedMap<Series<C>>, z: i32, e: &[u32]) -> GradedMap<C> {
    GradedMap::new_unchecked(m.source.clone(), m.target.clone(), m.parity, coeff_mat(&m.mat, z, e))
}

/// True if any entry overflowed its z window.
pub fn overflowed<C: Scalar>(m: &Mat<Series<C>>) -> bool {
    m.data.iter().any(|s| s.overflow)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactlin::ring::{int, rat};

    #[test]
    fn truncation_drops_high_degree() {
        let ctx = SeriesCtx::new(&["t", "s"], 2);
        let t: Series = Series::var(&ctx, 0);
        let s = Series::var(&ctx, 1);
        let p = &(&t * &s) * &t;
        assert!(Ring::is_zero(&p));
        let q = (t.clone() + s.clone()) * (t.clone() - s.clone());
        assert_eq!(q.coeff(0, &[2, 0]), int(1));
        assert_eq!(q.coeff(0, &[0, 2]), int(-1));
        assert_eq!(q.coeff(0, &[1, 1]), int(0));
    }

    #[test]
    fn window_overflow_is_sticky() {
        let ctx = SeriesCtx::with_z(&["t"], 3, 2);
        let z = Series::z_pow(&ctx, 2);
        let p = &z * &z;
        assert!(p.overflow);
        let q = p + Series::constant(&ctx, rat(1, 2));
        assert!(q.overflow);
        assert!(!(&Series::z_pow(&ctx, -1) * &z).overflow);
    }

    #[test]
    fn derivative_and_substitution() {
        let ctx = SeriesCtx::new(&["t"], 4);
        let t = Series::var(&ctx, 0);
        let p = &(&t * &t) * &t;
        assert_eq!(p.diff(0).coeff(0, &[2]), int(3));
        assert_eq!(p.subst_var(0, &int(2)).constant_term(), int(8));
    }
}
