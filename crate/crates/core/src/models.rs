//! Polyvector-field models of a univariate potential.
//!
//! For `W′` of degree `d` the space has basis `x^j` (`j < N`, even) and
//! `x^jθ` (`j < N - d`, odd), i.e. the truncation of `ℚ[x,θ]` by the ideal
//! `(x^N, x^{N-d}θ)`. `Q = W′∂_θ`, `G₋ = ∂_x∂_θ`, and `G` is division by `W′`
//! on the even part. Cohomology is `ℚ[x]/(W′)` with the remainder basis.

use crate::bcov::BcovData;
use crate::commutativity::HodgeData;
use crate::complexes::Complex;
use crate::error::{EngineError, Result};
use crate::exactlin::{int, GradedMap, GradedSpace, Mat, Rational};

use num_traits::Zero;

#[derive(Clone, Debug)]
pub struct PolyvectorModel {
    /// Coefficients of `W′`, lowest degree first.
    pub w_prime: Vec<Rational>,
    pub even_cutoff: usize,
    pub odd_cutoff: usize,
    pub space: GradedSpace,
    pub q: GradedMap<Rational>,
    pub g: GradedMap<Rational>,
    pub g_minus: GradedMap<Rational>,
    pub i_w: GradedMap<Rational>,
    pub pi_w: GradedMap<Rational>,
    pub w: GradedSpace,
}

/// `(quotient, remainder)` of `x^j` by `p`.
pub fn divide_monomial(j: usize, p: &[Rational]) -> (Vec<Rational>, Vec<Rational>) {
    let d = p.len() - 1;
    let mut r = vec![Rational::zero(); j.max(d) + 1];
    r[j] = int(1);
    let mut quo = vec![Rational::zero(); (j + 1).saturating_sub(d).max(1)];
    for k in (d..=j).rev() {
        let c = r[k].clone() / p[d].clone();
        if c.is_zero() {
            continue;
        }
        for (i, pc) in p.iter().enumerate() {
            r[k - d + i] -= c.clone() * pc.clone();
        }
        quo[k - d] = c;
    }
    r.truncate(d);
    (quo, r)
}

impl PolyvectorModel {
    pub fn new(w_prime: &[Rational], even_cutoff: usize) -> Result<Self> {
        let mut w_prime = w_prime.to_vec();
        while w_prime.last().is_some_and(|c| c.is_zero()) {
            w_prime.pop();
        }
        if w_prime.len() < 2 {
            return Err(EngineError::Structural("W' must have positive degree".into()));
        }
        let d = w_prime.len() - 1;
        if even_cutoff < d {
            return Err(EngineError::Structural(format!(
                "Q = W'·∂_θ does not close: it maps x^j θ outside the basis for cutoff {} below deg W' = {}",
                even_cutoff, d
            )));
        }
        let n_ev = even_cutoff;
        let n_od = even_cutoff - d;
        let mut labels: Vec<String> = (0..n_ev).map(mono_label).collect();
        labels.extend((0..n_od).map(|j| format!("{}.th", mono_label(j))));
        let mut parity = vec![0u8; n_ev];
        parity.extend(vec![1u8; n_od]);
        let space = GradedSpace::new(labels, parity);
        let dim = n_ev + n_od;
        let z = int(0);

        let mut q = Mat::zeros(dim, dim, &z);
        for j in 0..n_od {
            for (k, c) in w_prime.iter().enumerate() {
                if !c.is_zero() {
                    q.set(j + k, n_ev + j, c.clone());
                }
            }
        }
        let mut gm = Mat::zeros(dim, dim, &z);
        for j in 1..n_od {
            gm.set(j - 1, n_ev + j, int(j as i64));
        }
        let mut g = Mat::zeros(dim, dim, &z);
        let mut pi = Mat::zeros(d, dim, &z);
        for j in 0..n_ev {
            let (quo, rem) = divide_monomial(j, &w_prime);
            for (k, c) in quo.iter().enumerate() {
                if !c.is_zero() {
                    g.set(n_ev + k, j, c.clone());
                }
            }
            for (k, c) in rem.iter().enumerate() {
                pi.set(k, j, c.clone());
            }
        }
        let mut i = Mat::zeros(dim, d, &z);
        for k in 0..d {
            i.set(k, k, int(1));
        }
        let w = GradedSpace::new((0..d).map(mono_label).collect(), vec![0; d]);
        Ok(PolyvectorModel {
            w_prime,
            even_cutoff: n_ev,
            odd_cutoff: n_od,
            q: GradedMap::new(space.clone(), space.clone(), 1, q)?,
            g: GradedMap::new(space.clone(), space.clone(), 1, g)?,
            g_minus: GradedMap::new(space.clone(), space.clone(), 1, gm)?,
            i_w: GradedMap::new(w.clone(), space.clone(), 0, i)?,
            pi_w: GradedMap::new(space.clone(), w.clone(), 0, pi)?,
            space,
            w,
        })
    }

    /// `W = x^n`, so `W′ = n x^{n-1}`.
    pub fn monomial(n: usize, even_cutoff: usize) -> Result<Self> {
        let mut wp = vec![Rational::zero(); n];
        wp[n - 1] = int(n as i64);
        Self::new(&wp, even_cutoff)
    }

    pub fn degree(&self) -> usize {
        self.w_prime.len() - 1
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    /// Index of `x^j θ^odd`, if inside the cutoff.
    pub fn index(&self, j: usize, odd: bool) -> Option<usize> {
        match odd {
            false if j < self.even_cutoff => Some(j),
            true if j < self.odd_cutoff => Some(self.even_cutoff + j),
            _ => None,
        }
    }

    fn basis(&self, idx: usize) -> (usize, bool) {
        if idx < self.even_cutoff {
            (idx, false)
        } else {
            (idx - self.even_cutoff, true)
        }
    }

    pub fn hodge(&self) -> HodgeData<Rational> {
        HodgeData {
            complex: Complex { space: self.space.clone(), q: self.q.clone() },
            g: self.g.clone(),
            g_minus: self.g_minus.clone(),
            i_w: self.i_w.clone(),
            pi_w: self.pi_w.clone(),
            w: self.w.clone(),
            window: None,
        }
    }

    /// Basis vectors of x-degree below `deg`.
    pub fn window_below(&self, deg: usize) -> Vec<usize> {
        (0..self.dim()).filter(|&i| self.basis(i).0 < deg).collect()
    }

    /// Hodge data trusting only inputs of x-degree below `deg`.
    pub fn hodge_windowed(&self, deg: usize) -> HodgeData<Rational> {
        HodgeData { window: Some(self.window_below(deg)), ..self.hodge() }
    }

    /// The model as BCOV data, trusting inputs of x-degree below `window`.
    pub fn bcov(&self, window: Option<usize>) -> BcovData<Rational> {
        let hodge = match window {
            Some(deg) => self.hodge_windowed(deg),
            None => self.hodge(),
        };
        BcovData { hodge, product: self.product() }
    }

    /// Residue pairing `η(x^a, x^b) = Res x^{a+b} dx / W′` on the remainder
    /// basis of `W`, for monomial `W′ = c x^d`.
    pub fn residue_pairing(&self) -> Option<Mat<Rational>> {
        let d = self.degree();
        if self.w_prime[..d].iter().any(|c| !c.is_zero()) {
            return None;
        }
        let lc = self.w_prime[d].clone();
        let mut eta = Mat::zeros(d, d, &int(0));
        for a in 0..d {
            eta.set(a, d - 1 - a, int(1) / lc.clone());
        }
        Some(eta)
    }

    /// Multiplication by the polynomial `p(x)` (lowest degree first).
    pub fn multiplication(&self, p: &[Rational]) -> GradedMap<Rational> {
        let n = self.dim();
        let mut m = Mat::zeros(n, n, &int(0));
        for col in 0..n {
            let (j, odd) = self.basis(col);
            for (k, c) in p.iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                if let Some(row) = self.index(j + k, odd) {
                    m.add_at(row, col, c.clone());
                }
            }
        }
        GradedMap::new_unchecked(self.space.clone(), self.space.clone(), 0, m)
    }

    /// Multiplication by `x^k`.
    pub fn mult_monomial(&self, k: usize) -> GradedMap<Rational> {
        let mut p = vec![Rational::zero(); k + 1];
        p[k] = int(1);
        self.multiplication(&p)
    }

    /// The supercommutative product `V ⊗ V → V`; `θ² = 0` and no signs arise.
    pub fn product(&self) -> GradedMap<Rational> {
        let n = self.dim();
        let vv = self.space.tensor(&self.space);
        let mut m = Mat::zeros(n, n * n, &int(0));
        for a in 0..n {
            for b in 0..n {
                let (ja, oa) = self.basis(a);
                let (jb, ob) = self.basis(b);
                if oa && ob {
                    continue;
                }
                if let Some(row) = self.index(ja + jb, oa || ob) {
                    m.set(row, self.space.join_index(&[a, b]), int(1));
                }
            }
        }
        GradedMap::new_unchecked(vv, self.space.clone(), 0, m)
    }
}

fn mono_label(j: usize) -> String {
    match j {
        0 => "1".into(),
        1 => "x".into(),
        _ => format!("x^{}", j),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::commutativity::validate_strong_hodge;
    use crate::complexes::validate_sdr;
    use crate::exactlin::graded::supercommutator;
    use crate::exactlin::rat;

    #[test]
    fn division_by_derivative() {
        let wp = [int(0), int(0), int(3)];
        let (q, r) = divide_monomial(4, &wp);
        assert_eq!(q, vec![int(0), int(0), rat(1, 3)]);
        assert!(r.iter().all(|c| c.is_zero()));
        let (_, r) = divide_monomial(1, &wp);
        assert_eq!(r, vec![int(0), int(1)]);
    }

    #[test]
    fn cubic_model_is_a_contraction() {
        let m = PolyvectorModel::monomial(3, 6).unwrap();
        assert_eq!(m.w.dim(), 2);
        assert!(validate_sdr(&m.hodge().sdr()).unwrap().passed());
    }

    #[test]
    fn cubic_model_is_not_strong_hodge() {
        let m = PolyvectorModel::monomial(3, 6).unwrap();
        let rep = validate_strong_hodge(&m.hodge()).unwrap();
        let failing = rep.failing();
        assert!(failing.contains(&"pi G- = 0"));
        assert!(failing.contains(&"{G,G-} = 0"));
        assert!(!failing.contains(&"G- i = 0"));
        assert!(!failing.contains(&"{Q,G-} = 0"));
    }

    #[test]
    fn non_monomial_derivative() {
        // W' = 1 + x^2
        let m = PolyvectorModel::new(&[int(1), int(0), int(1)], 5).unwrap();
        assert!(validate_sdr(&m.hodge().sdr()).unwrap().passed());
    }

    #[test]
    fn multiplications_commute_with_q() {
        let m = PolyvectorModel::monomial(4, 8).unwrap();
        for k in 0..4 {
            assert!(supercommutator(&m.q, &m.mult_monomial(k)).unwrap().is_zero());
        }
    }

    #[test]
    fn product_matches_multiplication() {
        let m = PolyvectorModel::monomial(3, 5).unwrap();
        let prod = m.product();
        let x = m.index(1, false).unwrap();
        let mx = m.mult_monomial(1);
        for b in 0..m.dim() {
            for r in 0..m.dim() {
                let col = m.space.join_index(&[x, b]);
                assert_eq!(prod.mat.get(r, col), mx.mat.get(r, b));
            }
        }
    }
}
