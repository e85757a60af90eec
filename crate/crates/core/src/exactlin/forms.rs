//! Operator-valued differential forms in odd symbols `dt_0, dt_1, …`.
//!
//! A term is stored as `dt_S · A` with the symbols in `S` (a bitmask) pulled
//! to the left in increasing order; `A` has series entries. The symbols are
//! odd and graded-commute with vectors and odd operators.

use std::collections::BTreeMap;

use crate::exactlin::graded::{GradedMap, GradedSpace};
use crate::exactlin::ring::{Rational, Scalar};
use crate::exactlin::series::Series;

#[derive(Clone, Debug, PartialEq)]
pub struct FormOp<C: Scalar> {
    pub source: GradedSpace,
    pub target: GradedSpace,
    pub terms: BTreeMap<u64, GradedMap<Series<C>>>,
}

fn popcount_parity(m: u64) -> u8 {
    (m.count_ones() % 2) as u8
}

/// Sign of `dt_S dt_T = ± dt_{S∪T}` for disjoint `S`, `T`.
pub fn merge_sign(s: u64, t: u64) -> i8 {
    let mut inv = 0u32;
    let mut tt = t;
    while tt != 0 {
        let b = tt.trailing_zeros();
        inv += (s >> (b + 1)).count_ones();
        tt &= tt - 1;
    }
    if inv % 2 == 0 {
        1
    } else {
        -1
    }
}

impl<C: Scalar> FormOp<C> {
    pub fn zero(source: &GradedSpace, target: &GradedSpace) -> Self {
        FormOp { source: source.clone(), target: target.clone(), terms: BTreeMap::new() }
    }

    pub fn from_map(m: GradedMap<Series<C>>) -> Self {
        Self::single(0, m)
    }

    /// `dt_S · m`.
    pub fn single(mask: u64, m: GradedMap<Series<C>>) -> Self {
        let mut f = Self::zero(&m.source, &m.target);
        f.push(mask, m);
        f
    }

    pub fn push(&mut self, mask: u64, m: GradedMap<Series<C>>) {
        if m.is_zero() {
            return;
        }
        let m = match self.terms.remove(&mask) {
            Some(old) => old.add(&m).expect("homogeneous form components"),
            None => m,
        };
        if !m.is_zero() {
            self.terms.insert(mask, m);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.values().all(|m| m.is_zero())
    }

    pub fn component(&self, mask: u64) -> Option<&GradedMap<Series<C>>> {
        self.terms.get(&mask)
    }

    pub fn add(&self, o: &FormOp<C>) -> FormOp<C> {
        let mut out = self.clone();
        for (k, m) in &o.terms {
            out.push(*k, m.clone());
        }
        out
    }

    pub fn neg(&self) -> FormOp<C> {
        self.map(|m| m.neg())
    }

    pub fn sub(&self, o: &FormOp<C>) -> FormOp<C> {
        self.add(&o.neg())
    }

    pub fn map(&self, f: impl Fn(&GradedMap<Series<C>>) -> GradedMap<Series<C>>) -> FormOp<C> {
        let mut out = Self::zero(&self.source, &self.target);
        for (k, m) in &self.terms {
            out.push(*k, f(m));
        }
        out
    }

    pub fn map_series(&self, f: impl Fn(&Series<C>) -> Series<C>) -> FormOp<C> {
        self.map(|m| m.map_entries(&f))
    }

    /// `self ∘ o`; `dt_T` is pulled past `A` with `(-1)^{|A||T|}`.
    pub fn compose(&self, o: &FormOp<C>) -> FormOp<C> {
        let mut out = Self::zero(&o.source, &self.target);
        for (s, a) in &self.terms {
            for (t, b) in &o.terms {
                if s & t != 0 {
                    continue;
                }
                let mut sg = merge_sign(*s, *t);
                if a.parity * popcount_parity(*t) == 1 {
                    sg = -sg;
                }
                let c = a.compose_unchecked(b);
                out.push(s | t, if sg > 0 { c } else { c.neg() });
            }
        }
        out
    }

    /// Koszul tensor product with the same rule for the symbols.
    pub fn tensor(&self, o: &FormOp<C>) -> FormOp<C> {
        let mut out = Self::zero(&self.source.tensor(&o.source), &self.target.tensor(&o.target));
        for (s, a) in &self.terms {
            for (t, b) in &o.terms {
                if s & t != 0 {
                    continue;
                }
                let mut sg = merge_sign(*s, *t);
                if a.parity * popcount_parity(*t) == 1 {
                    sg = -sg;
                }
                let c = a.tensor(b);
                out.push(s | t, if sg > 0 { c } else { c.neg() });
            }
        }
        out
    }

    /// `Σ_e dt_e ∂_e`, where `deriv(e, A)` returns `∂_{t_e} A` for symbol `e`.
    pub fn exterior_d(
        &self,
        symbols: &[usize],
        deriv: impl Fn(usize, &GradedMap<Series<C>>) -> GradedMap<Series<C>>,
    ) -> FormOp<C> {
        let mut out = Self::zero(&self.source, &self.target);
        for (s, a) in &self.terms {
            for &e in symbols {
                let bit = 1u64 << e;
                if s & bit != 0 {
                    continue;
                }
                let da = deriv(e, a);
                let sg = merge_sign(bit, *s);
                out.push(s | bit, if sg > 0 { da } else { da.neg() });
            }
        }
        out
    }

    /// `Q_t ∘ I - (-1)^{|I|} I ∘ Q_s` with `|I|` the total parity.
    pub fn q_hom(&self, q_target: &GradedMap<Series<C>>, q_source: &GradedMap<Series<C>>) -> FormOp<C> {
        let mut out = Self::zero(&self.source, &self.target);
        for (s, a) in &self.terms {
            let ps = popcount_parity(*s);
            let left = q_target.compose_unchecked(a);
            let right = a.compose_unchecked(q_source);
            let left = if ps == 1 { left.neg() } else { left };
            let right = if (ps + a.parity) % 2 == 1 { right } else { right.neg() };
            out.push(*s, left.add(&right).expect("same shape"));
        }
        out
    }

    /// Replaces the symbol `e` by `Σ_k c_k dt_{f_k}` (pullback along a linear map of lengths).
    pub fn substitute_symbol(&self, e: usize, images: &[(usize, i64)]) -> FormOp<C> {
        let bit = 1u64 << e;
        let mut out = Self::zero(&self.source, &self.target);
        for (s, a) in &self.terms {
            if s & bit == 0 {
                out.push(*s, a.clone());
                continue;
            }
            let rest = s & !bit;
            // dt_S = ± dt_e dt_rest, then dt_f dt_rest = ± dt_{rest ∪ f}
            let front = merge_sign(bit, rest);
            for &(f, c) in images {
                let fb = 1u64 << f;
                if rest & fb != 0 {
                    continue;
                }
                let sg = (front * merge_sign(fb, rest)) as i64;
                out.push(rest | fb, a.scale(&Rational::from_integer((c * sg).into())));
            }
        }
        out
    }

    pub fn render_masks(&self) -> Vec<u64> {
        self.terms.iter().filter(|(_, m)| !m.is_zero()).map(|(k, _)| *k).collect()
    }

    pub fn proto(&self) -> Option<&Series<C>> {
        self.terms.values().next().map(|m| m.proto())
    }
}
