//! ℤ/2-graded spaces and parity-carrying maps.
//!
//! Sign rule used everywhere: `(A⊗B)(x⊗y) = (-1)^{|B||x|} Ax ⊗ By`.
//! The basis of `X⊗Y` is ordered so that `x_i⊗y_j` has index `i*dim(Y)+j`.

use std::sync::Arc;

use super::matrix::Mat;
use super::ring::{Rational, Ring};
use crate::error::{EngineError, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GradedSpace {
    /// `None` for generated spaces (tensor powers); see [`GradedSpace::label`].
    labels: Option<Arc<Vec<String>>>,
    pub parity: Arc<Vec<u8>>,
    pub degree: Option<Arc<Vec<i32>>>,
}

impl GradedSpace {
    pub fn new(labels: Vec<String>, parity: Vec<u8>) -> Self {
        assert_eq!(labels.len(), parity.len());
        assert!(parity.iter().all(|&p| p < 2));
        GradedSpace { labels: Some(Arc::new(labels)), parity: Arc::new(parity), degree: None }
    }

    pub fn from_parities(parity: &[u8]) -> Self {
        let labels = (0..parity.len()).map(|i| format!("e{}", i)).collect();
        GradedSpace::new(labels, parity.to_vec())
    }

    pub fn with_degrees(labels: Vec<String>, degree: Vec<i32>) -> Self {
        let parity = degree.iter().map(|d| d.rem_euclid(2) as u8).collect();
        let mut s = GradedSpace::new(labels, parity);
        s.degree = Some(Arc::new(degree));
        s
    }

    pub fn label(&self, i: usize) -> String {
        match &self.labels {
            Some(l) => l[i].clone(),
            None => format!("b{}", i),
        }
    }

    pub fn labels(&self) -> Vec<String> {
        (0..self.dim()).map(|i| self.label(i)).collect()
    }

    pub fn dim(&self) -> usize {
        self.parity.len()
    }

    pub fn even_dim(&self) -> usize {
        self.parity.iter().filter(|&&p| p == 0).count()
    }

    pub fn tensor(&self, o: &GradedSpace) -> GradedSpace {
        let mut parity = Vec::with_capacity(self.dim() * o.dim());
        for pa in self.parity.iter() {
            for pb in o.parity.iter() {
                parity.push((pa + pb) % 2);
            }
        }
        GradedSpace { labels: None, parity: Arc::new(parity), degree: None }
    }

    /// The unit space (one even basis vector); `tensor_power(0)`.
    pub fn unit() -> GradedSpace {
        GradedSpace::new(vec!["1".into()], vec![0])
    }

    pub fn tensor_power(&self, n: usize) -> GradedSpace {
        let mut s = GradedSpace::unit();
        for k in 0..n {
            s = if k == 0 { self.clone() } else { s.tensor(self) };
        }
        s
    }

    /// Decomposes an index of `V^{⊗n}` into its factor indices.
    pub fn split_index(&self, n: usize, mut idx: usize) -> Vec<usize> {
        let d = self.dim();
        let mut out = vec![0; n];
        for k in (0..n).rev() {
            out[k] = idx % d;
            idx /= d;
        }
        out
    }

    pub fn join_index(&self, parts: &[usize]) -> usize {
        parts.iter().fold(0, |acc, &i| acc * self.dim() + i)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GradedMap<R: Ring> {
    pub source: GradedSpace,
    pub target: GradedSpace,
    pub parity: u8,
    pub mat: Mat<R>,
}

impl<R: Ring> GradedMap<R> {
    pub fn new(source: GradedSpace, target: GradedSpace, parity: u8, mat: Mat<R>) -> Result<Self> {
        if mat.rows != target.dim() || mat.cols != source.dim() {
            return Err(EngineError::Structural(format!(
                "matrix is {}x{} but spaces have dims {}->{}",
                mat.rows,
                mat.cols,
                source.dim(),
                target.dim()
            )));
        }
        let m = GradedMap { source, target, parity, mat };
        if let Some((r, c)) = m.parity_violation() {
            return Err(EngineError::Parity(format!(
                "entry ({},{}) connects parities {}->{} in a map of parity {}",
                r, c, m.source.parity[c], m.target.parity[r], m.parity
            )));
        }
        Ok(m)
    }

    /// Builds without checking; callers guarantee the parity rule.
    pub fn new_unchecked(source: GradedSpace, target: GradedSpace, parity: u8, mat: Mat<R>) -> Self {
        GradedMap { source, target, parity, mat }
    }

    pub fn parity_violation(&self) -> Option<(usize, usize)> {
        for r in 0..self.mat.rows {
            for c in 0..self.mat.cols {
                if !self.mat.get(r, c).is_zero() && (self.source.parity[c] + self.parity) % 2 != self.target.parity[r] {
                    return Some((r, c));
                }
            }
        }
        None
    }

    pub fn zero(source: &GradedSpace, target: &GradedSpace, parity: u8, proto: &R) -> Self {
        GradedMap::new_unchecked(source.clone(), target.clone(), parity, Mat::zeros(target.dim(), source.dim(), proto))
    }

    pub fn identity(space: &GradedSpace, proto: &R) -> Self {
        GradedMap::new_unchecked(space.clone(), space.clone(), 0, Mat::identity(space.dim(), proto))
    }

    pub fn proto(&self) -> &R {
        &self.mat.proto
    }

    pub fn is_zero(&self) -> bool {
        self.mat.is_zero()
    }

    pub fn is_endo(&self) -> bool {
        self.source == self.target
    }

    /// `self ∘ o`
    pub fn compose(&self, o: &GradedMap<R>) -> Result<GradedMap<R>> {
        if o.target.parity != self.source.parity || o.target.dim() != self.source.dim() {
            return Err(EngineError::Structural("composition of maps with mismatched spaces".into()));
        }
        Ok(self.compose_unchecked(o))
    }

    pub fn compose_unchecked(&self, o: &GradedMap<R>) -> GradedMap<R> {
        GradedMap::new_unchecked(o.source.clone(), self.target.clone(), (self.parity + o.parity) % 2, self.mat.matmul(&o.mat))
    }

    pub fn add(&self, o: &GradedMap<R>) -> Result<GradedMap<R>> {
        self.same_shape(o)?;
        Ok(GradedMap::new_unchecked(self.source.clone(), self.target.clone(), self.parity, &self.mat + &o.mat))
    }

    pub fn sub(&self, o: &GradedMap<R>) -> Result<GradedMap<R>> {
        self.same_shape(o)?;
        Ok(GradedMap::new_unchecked(self.source.clone(), self.target.clone(), self.parity, &self.mat - &o.mat))
    }

    fn same_shape(&self, o: &GradedMap<R>) -> Result<()> {
        if self.source.parity != o.source.parity || self.target.parity != o.target.parity {
            return Err(EngineError::Structural("adding maps between different spaces".into()));
        }
        if self.parity != o.parity && !self.is_zero() && !o.is_zero() {
            return Err(EngineError::Parity("adding maps of different parity".into()));
        }
        Ok(())
    }

    pub fn scale(&self, q: &Rational) -> GradedMap<R> {
        GradedMap::new_unchecked(self.source.clone(), self.target.clone(), self.parity, self.mat.scale(q))
    }

    pub fn scale_by(&self, s: &R) -> GradedMap<R> {
        GradedMap::new_unchecked(self.source.clone(), self.target.clone(), self.parity, self.mat.scale_by(s))
    }

    pub fn neg(&self) -> GradedMap<R> {
        GradedMap::new_unchecked(self.source.clone(), self.target.clone(), self.parity, -&self.mat)
    }

    pub fn map_entries<S: Ring>(&self, f: impl Fn(&R) -> S) -> GradedMap<S> {
        GradedMap::new_unchecked(self.source.clone(), self.target.clone(), self.parity, self.mat.map(f))
    }

    /// Koszul tensor product `(A⊗B)(x⊗y) = (-1)^{|B||x|} Ax⊗By`.
    pub fn tensor(&self, o: &GradedMap<R>) -> GradedMap<R> {
        let mut m = self.mat.kron(&o.mat);
        if o.parity == 1 {
            let ocols = o.mat.cols;
            for c1 in 0..self.mat.cols {
                if self.source.parity[c1] == 1 {
                    for r in 0..m.rows {
                        for c2 in 0..ocols {
                            let c = c1 * ocols + c2;
                            let v = m.get(r, c);
                            if !v.is_zero() {
                                let nv = -v.clone();
                                m.set(r, c, nv);
                            }
                        }
                    }
                }
            }
        }
        GradedMap::new_unchecked(
            self.source.tensor(&o.source),
            self.target.tensor(&o.target),
            (self.parity + o.parity) % 2,
            m,
        )
    }
}

/// `{A,B} = AB - (-1)^{|A||B|} BA`
pub fn supercommutator<R: Ring>(a: &GradedMap<R>, b: &GradedMap<R>) -> Result<GradedMap<R>> {
    if !a.is_endo() || !b.is_endo() || a.source != b.source {
        return Err(EngineError::Structural("supercommutator needs endomorphisms of one space".into()));
    }
    let ab = a.mat.matmul(&b.mat);
    let ba = b.mat.matmul(&a.mat);
    let m = if a.parity * b.parity == 1 { &ab + &ba } else { &ab - &ba };
    Ok(GradedMap::new_unchecked(a.source.clone(), a.source.clone(), (a.parity + b.parity) % 2, m))
}

/// Koszul sign of moving the factors `x_1..x_n` (with the given parities)
/// into the order `perm[0], perm[1], ...`.
/// `Σ_k id^{⊗k} ⊗ q ⊗ id^{⊗(n-k-1)}`, the differential induced on `V^{⊗n}`.
pub fn tensor_differential<R: Ring>(q: &GradedMap<R>, n: usize) -> GradedMap<R> {
    let v = &q.source;
    let proto = q.proto();
    let mut acc = GradedMap::zero(&v.tensor_power(n), &v.tensor_power(n), q.parity, proto);
    for k in 0..n {
        let mut t: Option<GradedMap<R>> = None;
        for j in 0..n {
            let f = if j == k { q.clone() } else { GradedMap::identity(v, proto) };
            t = Some(match t {
                None => f,
                Some(t) => t.tensor(&f),
            });
        }
        acc = acc.add(&t.expect("n > 0")).expect("same shape");
    }
    acc
}

pub fn koszul_sign(parities: &[u8], perm: &[usize]) -> i8 {
    let mut odd_inversions = 0usize;
    for i in 0..perm.len() {
        for j in i + 1..perm.len() {
            if perm[i] > perm[j] && parities[perm[i]] == 1 && parities[perm[j]] == 1 {
                odd_inversions += 1;
            }
        }
    }
    if odd_inversions % 2 == 0 {
        1
    } else {
        -1
    }
}

/// All permutations of `0..n` in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..n).collect();
    loop {
        out.push(cur.clone());
        // next lexicographic permutation
        let Some(i) = (0..n.saturating_sub(1)).rev().find(|&i| cur[i] < cur[i + 1]) else {
            break;
        };
        let j = (i + 1..n).rev().find(|&j| cur[j] > cur[i]).unwrap();
        cur.swap(i, j);
        cur[i + 1..].reverse();
    }
    out
}

pub fn factorial(n: usize) -> u64 {
    (1..=n as u64).product()
}

/// Multilinear operation `V^{⊗n} → V`.
#[derive(Clone, Debug, PartialEq)]
pub struct MultiOp<R: Ring> {
    pub arity: usize,
    pub space: GradedSpace,
    pub map: GradedMap<R>,
}

impl<R: Ring> MultiOp<R> {
    pub fn new(space: &GradedSpace, arity: usize, map: GradedMap<R>) -> Result<Self> {
        if map.source.dim() != space.dim().pow(arity as u32) || map.target != *space {
            return Err(EngineError::Structural(format!("map does not have shape V^⊗{} → V", arity)));
        }
        Ok(MultiOp { arity, space: space.clone(), map })
    }

    pub fn zero(space: &GradedSpace, arity: usize, parity: u8, proto: &R) -> Self {
        let src = space.tensor_power(arity);
        MultiOp { arity, space: space.clone(), map: GradedMap::zero(&src, space, parity, proto) }
    }

    pub fn parity(&self) -> u8 {
        self.map.parity
    }

    pub fn is_zero(&self) -> bool {
        self.map.is_zero()
    }

    /// `(m∘P_σ)(x_1..x_n) = ± m(x_{σ(1)}, …, x_{σ(n)})` with the Koszul sign
    /// of the reordering.
    pub fn permute_inputs(&self, perm: &[usize]) -> MultiOp<R> {
        let n = self.arity;
        assert_eq!(perm.len(), n);
        let v = &self.space;
        let mut out = Mat::zeros(self.map.mat.rows, self.map.mat.cols, self.map.proto());
        for col in 0..self.map.mat.cols {
            let parts = v.split_index(n, col);
            let pars: Vec<u8> = parts.iter().map(|&i| v.parity[i]).collect();
            let moved: Vec<usize> = perm.iter().map(|&k| parts[k]).collect();
            let src = v.join_index(&moved);
            let s = koszul_sign(&pars, perm);
            for r in 0..out.rows {
                let e = self.map.mat.get(r, src);
                if !e.is_zero() {
                    out.set(r, col, if s > 0 { e.clone() } else { -e.clone() });
                }
            }
        }
        MultiOp { arity: n, space: v.clone(), map: GradedMap::new_unchecked(self.map.source.clone(), v.clone(), self.parity(), out) }
    }

    /// Average over all input permutations with Koszul signs.
    pub fn symmetrize(&self) -> MultiOp<R> {
        let perms = permutations(self.arity);
        let mut acc = MultiOp::zero(&self.space, self.arity, self.parity(), self.map.proto());
        for p in &perms {
            let q = self.permute_inputs(p);
            acc.map.mat = &acc.map.mat + &q.map.mat;
        }
        let w = Rational::new(1.into(), (perms.len() as u64).into());
        acc.map.mat = acc.map.mat.scale(&w);
        acc
    }

    pub fn is_symmetric(&self) -> bool {
        permutations(self.arity).iter().all(|p| self.permute_inputs(p) == *self)
    }

    pub fn add(&self, o: &MultiOp<R>) -> Result<MultiOp<R>> {
        if self.arity != o.arity {
            return Err(EngineError::Structural("adding operations of different arity".into()));
        }
        Ok(MultiOp { arity: self.arity, space: self.space.clone(), map: self.map.add(&o.map)? })
    }

    pub fn scale(&self, q: &Rational) -> MultiOp<R> {
        MultiOp { arity: self.arity, space: self.space.clone(), map: self.map.scale(q) }
    }

    pub fn map_entries<S: Ring>(&self, f: impl Fn(&R) -> S) -> MultiOp<S> {
        MultiOp { arity: self.arity, space: self.space.clone(), map: self.map.map_entries(f) }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactlin::matrix::rat_mat;
    use crate::exactlin::ring::int;

    fn sp(p: &[u8]) -> GradedSpace {
        GradedSpace::from_parities(p)
    }

    #[test]
    fn odd_square_commutator_doubles() {
        let v = sp(&[0, 1]);
        let a = GradedMap::new(v.clone(), v.clone(), 1, rat_mat(&[&[0, 3], &[2, 0]])).unwrap();
        let c = supercommutator(&a, &a).unwrap();
        assert_eq!(c.mat, a.mat.matmul(&a.mat).scale(&int(2)));
    }

    #[test]
    fn d_iota_pair_gives_identity() {
        let v = sp(&[1, 0]);
        let q = GradedMap::new(v.clone(), v.clone(), 1, rat_mat(&[&[0, 0], &[1, 0]])).unwrap();
        let g = GradedMap::new(v.clone(), v.clone(), 1, rat_mat(&[&[0, 1], &[0, 0]])).unwrap();
        assert_eq!(supercommutator(&q, &g).unwrap().mat, Mat::identity(2, &int(0)));
    }

    #[test]
    fn parity_rule_enforced() {
        let v = sp(&[0, 1]);
        assert!(GradedMap::new(v.clone(), v.clone(), 0, rat_mat(&[&[0, 1], &[0, 0]])).is_err());
    }

    #[test]
    fn swapping_two_odd_inputs_flips_sign() {
        let v = sp(&[1]);
        let m = GradedMap::new_unchecked(v.tensor_power(2), v.clone(), 1, rat_mat(&[&[1]]));
        let op = MultiOp::new(&v, 2, m).unwrap();
        assert_eq!(op.permute_inputs(&[1, 0]).map.mat, rat_mat(&[&[-1]]));
        assert!(op.symmetrize().is_zero());
    }

    #[test]
    fn permutation_count() {
        assert_eq!(permutations(4).len(), 24);
        assert_eq!(permutations(0).len(), 1);
    }
}
