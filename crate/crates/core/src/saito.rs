//! Good sections and flat structures for `W = xⁿ` in one variable.
//!
//! Forms are polynomials `f(x) dx` whose coefficients are series in the
//! deformation parameters `t_1..t_μ` and a Laurent window in `z`. The versal
//! family is `W_t = xⁿ + Σ t_k x^{k-1}`, and cohomology of `z d + dW_t` has
//! the reduced basis `x^a dx`, `a < μ = n - 1`.

use std::sync::Arc;

use num_traits::One;

use crate::commutativity::{check_commutativity, ConnectionOneForm};
use crate::error::{EngineError, Result};
use crate::exactlin::series::{lift_mat, overflowed, Mono};
use crate::exactlin::{int, GradedMap, GradedSpace, Mat, Rational, Ring, Series, SeriesCtx};
use crate::models::divide_monomial;
use crate::report::Report;

/// Coefficients of `x^j dx`, lowest degree first.
pub type Poly = Vec<Series>;

#[derive(Clone, Debug)]
pub struct SaitoData {
    pub n: usize,
    pub mu: usize,
    /// Results are exact through this t-order; internally one more is kept
    /// because connections differentiate once.
    pub order: u32,
    pub xdeg: usize,
    pub ctx: Arc<SeriesCtx>,
    /// `∂W_t`, lowest degree first.
    w_prime: Poly,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum At {
    Zero,
    Formal,
}

impl SaitoData {
    /// Window and x-degree bound sized for the frame expansion and for
    /// reducing monomials up to degree `max(10, …)`.
    pub fn new(n: usize, order: u32) -> Result<Self> {
        let mu = n.saturating_sub(1);
        let xdeg = ((mu - 1) * (order as usize + 2) + mu).max(12);
        let zwin = (order as usize + 1 + xdeg / mu.max(1) + 2) as i32;
        Self::with_bounds(n, order, xdeg, zwin)
    }

    pub fn with_bounds(n: usize, order: u32, xdeg: usize, zwin: i32) -> Result<Self> {
        if n < 3 {
            return Err(EngineError::Precondition(format!("n = {} but the construction needs n >= 3", n)));
        }
        let mu = n - 1;
        if zwin < order as i32 + 1 {
            return Err(EngineError::Precondition(format!(
                "z window {} is too small for t-order {}: each order consumes one power of 1/z",
                zwin, order
            )));
        }
        let names: Vec<String> = (1..=mu).map(|k| format!("t{}", k)).collect();
        let refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
        let ctx = SeriesCtx::with_z(&refs, order + 1, zwin);
        let mut w_prime = vec![Series::zero(&ctx); mu + 1];
        w_prime[mu] = Series::constant(&ctx, int(n as i64));
        // d/dx of t_k x^{k-1}
        for k in 2..=mu {
            w_prime[k - 2] = Series::var(&ctx, k - 1).scale(&int(k as i64 - 1));
        }
        Ok(SaitoData { n, mu, order, xdeg, ctx, w_prime })
    }

    pub fn zero(&self) -> Series {
        Series::zero(&self.ctx)
    }

    fn constant(&self, c: Rational) -> Series {
        Series::constant(&self.ctx, c)
    }

    /// `Φ_k = x^{k-1}`.
    pub fn phi(&self, k: usize) -> Poly {
        let mut p = vec![self.zero(); k];
        p[k - 1] = self.constant(int(1));
        p
    }

    pub fn poly(&self, coeffs: &[Rational]) -> Poly {
        coeffs.iter().map(|c| self.constant(c.clone())).collect()
    }

    /// Basis of `H` as an even graded space `1, x, …, x^{μ-1}`.
    pub fn space(&self) -> GradedSpace {
        let labels = (0..self.mu)
            .map(|a| match a {
                0 => "dx".to_string(),
                1 => "x dx".to_string(),
                _ => format!("x^{} dx", a),
            })
            .collect();
        GradedSpace::new(labels, vec![0; self.mu])
    }
}

pub fn poly_mul(a: &[Series], b: &[Series]) -> Poly {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![a[0].zero_like(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            if !y.is_zero() {
                out[i + j] = out[i + j].clone() + x * y;
            }
        }
    }
    out
}

/// `d^S g = (z g′ + ∂W_t g) dx` on a 0-form `g`.
pub fn saito_differential(data: &SaitoData, g: &[Series], at: At) -> Poly {
    let wp = w_prime_at(data, at);
    let mut out = poly_mul(&wp, g);
    for (j, c) in g.iter().enumerate().skip(1) {
        out[j - 1] = out[j - 1].clone() + c.mul_z(1).scale(&int(j as i64));
    }
    out
}

fn w_prime_at(data: &SaitoData, at: At) -> Poly {
    match at {
        At::Formal => data.w_prime.clone(),
        At::Zero => {
            let mut p = vec![data.zero(); data.mu + 1];
            p[data.mu] = data.constant(int(data.n as i64));
            p
        }
    }
}

/// Coefficients in the reduced basis `x^a dx`.
#[derive(Clone, Debug, PartialEq)]
pub struct CohClass {
    pub coeffs: Vec<Series>,
}

impl CohClass {
    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }
}

/// Reduces `f dx` modulo the image of `z d + dW_t`.
pub fn reduce_in_brieskorn(f: &[Series], data: &SaitoData, at: At) -> Result<CohClass> {
    reduce_impl(f, data, at, true)
}

/// Reduction modulo `∂W_t` alone, i.e. the class in `H_{t,0}`.
pub fn reduce_at_z0(f: &[Series], data: &SaitoData, at: At) -> Result<CohClass> {
    reduce_impl(f, data, at, false)
}

fn reduce_impl(f: &[Series], data: &SaitoData, at: At, with_z: bool) -> Result<CohClass> {
    let mu = data.mu;
    let mut f: Poly = f.to_vec();
    while f.last().is_some_and(|c| c.is_zero()) {
        f.pop();
    }
    if f.len() > data.xdeg + 1 {
        return Err(EngineError::Precondition(format!(
            "form of x-degree {} exceeds the bound {}",
            f.len() - 1,
            data.xdeg
        )));
    }
    let wp = w_prime_at(data, at);
    let inv_n = Rational::one() / int(data.n as i64);
    for m in (mu..f.len()).rev() {
        if f[m].is_zero() {
            continue;
        }
        // g = (c/n) x^{m-μ}
        let c = f[m].scale(&inv_n);
        let s = m - mu;
        for (j, w) in wp.iter().enumerate() {
            if !w.is_zero() {
                f[s + j] = f[s + j].clone() - &c * w;
            }
        }
        if with_z && s >= 1 {
            f[s - 1] = f[s - 1].clone() - c.mul_z(1).scale(&int(s as i64));
        }
        debug_assert!(f[m].is_zero());
    }
    let lost = f.iter().any(|c| c.overflow);
    f.resize(mu.max(f.len()), data.zero());
    f.truncate(mu);
    if lost {
        return Err(EngineError::TruncationOverflow(format!(
            "reduction left the z window [-{0}, {0}]",
            data.ctx.zwin.unwrap_or(0)
        )));
    }
    Ok(CohClass { coeffs: f })
}

/// Basis and multiplication table of `ℚ[x]/(n x^{n-1})`.
#[derive(Clone, Debug, PartialEq)]
pub struct MilnorRing {
    pub n: usize,
    pub mu: usize,
    /// `table[a][b]` is `x^a · x^b` in the basis.
    pub table: Vec<Vec<Vec<Rational>>>,
}

impl MilnorRing {
    /// The matrix of multiplication by `x^a`.
    pub fn left_mult(&self, a: usize) -> Mat<Rational> {
        let mut m = Mat::zeros(self.mu, self.mu, &int(0));
        for b in 0..self.mu {
            for (c, v) in self.table[a][b].iter().enumerate() {
                m.set(c, b, v.clone());
            }
        }
        m
    }
}

pub fn milnor_ring(n: usize) -> Result<MilnorRing> {
    if n < 3 {
        return Err(EngineError::Precondition(format!("n = {} but the construction needs n >= 3", n)));
    }
    let mu = n - 1;
    let mut wp = vec![int(0); mu + 1];
    wp[mu] = int(n as i64);
    let table = (0..mu)
        .map(|a| (0..mu).map(|b| divide_monomial(a + b, &wp).1).collect())
        .collect();
    Ok(MilnorRing { n, mu, table })
}

fn class_matrix(data: &SaitoData, cols: Vec<CohClass>) -> Mat<Series> {
    let mut m = Mat::zeros(data.mu, cols.len(), &data.zero());
    for (c, cl) in cols.into_iter().enumerate() {
        for (r, v) in cl.coeffs.into_iter().enumerate() {
            m.set(r, c, v);
        }
    }
    m
}

/// `C_k`: multiplication by `x^{k-1}` on `ℚ[x][[t]]/(∂W_t)`, `k = 1..μ`.
pub fn c_operators(data: &SaitoData) -> Result<Vec<Mat<Series>>> {
    (1..=data.mu)
        .map(|k| {
            let cols = (0..data.mu)
                .map(|a| reduce_at_z0(&poly_mul(&data.phi(k), &data.phi(a + 1)), data, At::Formal))
                .collect::<Result<Vec<_>>>()?;
            Ok(class_matrix(data, cols))
        })
        .collect()
}

/// Columns are the classes of `exp(-(1/z) Σ t_k Φ_k) x^a dx` in the reduced basis.
pub fn gm_frame(data: &SaitoData) -> Result<Mat<Series>> {
    // -(1/z) Σ t_k x^{k-1}
    let minus_p: Poly = (0..data.mu).map(|j| -Series::var(&data.ctx, j).mul_z(-1)).collect();
    let mut term = data.poly(&[int(1)]);
    let mut exp = term.clone();
    for j in 1..=data.ctx.order {
        term = poly_mul(&term, &minus_p);
        let inv = Rational::one() / int(j as i64);
        term = term.iter().map(|c| c.scale(&inv)).collect();
        exp = poly_add(&exp, &term);
    }
    let cols = (0..data.mu)
        .map(|a| reduce_in_brieskorn(&poly_mul(&exp, &data.phi(a + 1)), data, At::Formal))
        .collect::<Result<Vec<_>>>()?;
    Ok(class_matrix(data, cols))
}

fn poly_add(a: &[Series], b: &[Series]) -> Poly {
    let n = a.len().max(b.len());
    (0..n)
        .map(|i| match (a.get(i), b.get(i)) {
            (Some(x), Some(y)) => x.clone() + y.clone(),
            (Some(x), None) => x.clone(),
            (None, Some(y)) => y.clone(),
            (None, None) => unreachable!(),
        })
        .collect()
}

/// `S: H_{t,0} → H_{t,z}` as a matrix in the reduced bases.
#[derive(Clone, Debug, PartialEq)]
pub struct SectionS {
    pub s: Mat<Series>,
}

impl SectionS {
    /// `S(x^a dx) = x^a dx`.
    pub fn monomial(data: &SaitoData) -> Self {
        SectionS { s: Mat::identity(data.mu, &data.zero()) }
    }

    /// Checks `π∘S = id` and that no negative powers of z occur.
    pub fn validate(&self) -> Result<()> {
        let n = self.s.rows;
        for r in 0..n {
            for c in 0..self.s.cols {
                let e = self.s.get(r, c);
                if e.z_range().is_some_and(|(lo, _)| lo < 0) {
                    return Err(EngineError::Precondition("section has negative powers of z".into()));
                }
                let at0 = e.z_coeff(0);
                let want = if r == c { Series::constant(&e.ctx, int(1)) } else { Series::zero(&e.ctx) };
                if at0 != want {
                    return Err(EngineError::Precondition(format!("pi S != id at entry ({}, {})", r, c)));
                }
            }
        }
        Ok(())
    }
}

/// Inverse of `1 + N` with `N` nilpotent in the truncation.
fn unipotent_inverse(m: &Mat<Series>) -> Result<Mat<Series>> {
    let id = Mat::identity(m.rows, &m.proto);
    let n = &id - m;
    let mut term = id.clone();
    let mut acc = id;
    let cap = 4 * (m.proto.ctx.order as usize + m.proto.ctx.zwin.unwrap_or(0) as usize + 2);
    for _ in 0..cap {
        term = &term * &n;
        if overflowed(&term) {
            return Err(EngineError::TruncationOverflow("inverting a frame".into()));
        }
        if term.is_zero() {
            return Ok(acc);
        }
        acc = &acc + &term;
    }
    Err(EngineError::Structural("frame is not unipotent in the truncation".into()))
}

fn diff_mat(m: &Mat<Series>, k: usize) -> Mat<Series> {
    m.map(|s| s.diff(k))
}

fn mul_z_mat(m: &Mat<Series>, k: i32) -> Mat<Series> {
    m.map(|s| s.mul_z(k))
}

/// First-order transport of the class of a constant form `ω` in direction `t_k`.
#[derive(Clone, Debug, PartialEq)]
pub struct Transport {
    /// `[ω]` reduced at `t`.
    pub base: CohClass,
    /// `∂/∂ε_k` of the transported class under `S`.
    pub derivative: CohClass,
    /// The same for the Gauss–Manin transport `[e^{-εΦ/z} ω]`.
    pub gm_derivative: CohClass,
}

/// `T_ε(h) = [ω + z⁻¹(-ε Φ_k + S π(ε Φ_k)) ω]` at `t + ε`, to first order in `ε`.
pub fn saito_transport(s: &SectionS, data: &SaitoData, k: usize, omega: &[Rational]) -> Result<Transport> {
    if k == 0 || k > data.mu {
        return Err(EngineError::Precondition(format!("direction {} outside 1..{}", k, data.mu)));
    }
    s.validate()?;
    let w = data.poly(omega);
    let base = reduce_in_brieskorn(&w, data, At::Formal)?;
    let moved: Vec<Series> = base.coeffs.iter().map(|c| c.diff(k - 1)).collect();
    let phi_w = poly_mul(&data.phi(k), &w);
    let full = reduce_in_brieskorn(&phi_w, data, At::Formal)?;
    let at0 = reduce_at_z0(&phi_w, data, At::Formal)?;
    let lifted = s.s.apply(&at0.coeffs);
    let mut derivative = Vec::with_capacity(data.mu);
    let mut gm = Vec::with_capacity(data.mu);
    for a in 0..data.mu {
        let bracket = lifted[a].clone() - full.coeffs[a].clone();
        if bracket.z_range().is_some_and(|(lo, _)| lo <= 0) {
            return Err(EngineError::Structural(format!(
                "the bracket has a nonzero class at z = 0 in component {}",
                a
            )));
        }
        derivative.push(moved[a].clone() + bracket.mul_z(-1));
        gm.push(moved[a].clone() - full.coeffs[a].mul_z(-1));
    }
    Ok(Transport { base, derivative: CohClass { coeffs: derivative }, gm_derivative: CohClass { coeffs: gm } })
}

/// `Ã = Σ dt_k Ã_k`, `Ã_k = -z ∂_k F · F⁻¹` with `F = S⁻¹ M`: `z` times the
/// Gauss–Manin connection written in the frame of `S`, exact through `data.order`.
#[derive(Clone, Debug, PartialEq)]
pub struct GmConnection {
    pub components: Vec<Mat<Series>>,
}

impl GmConnection {
    pub fn to_one_form(&self, data: &SaitoData) -> ConnectionOneForm<Rational> {
        let w = data.space();
        ConnectionOneForm {
            components: self
                .components
                .iter()
                .map(|m| GradedMap::new_unchecked(w.clone(), w.clone(), 0, m.clone()))
                .collect(),
        }
    }

    /// All coefficients of `z^j`, `j ≠ 0`.
    pub fn z_dependent_part(&self) -> Vec<Mat<Series>> {
        self.components
            .iter()
            .map(|m| m.map(|s| {
                let mut s = s.clone();
                s.terms.retain(|mono, _| mono.z != 0);
                s
            }))
            .collect()
    }
}

pub fn connection_in_gm_frame(s: &SectionS, data: &SaitoData) -> Result<GmConnection> {
    s.validate()?;
    let m = gm_frame(data)?;
    let s_inv = unipotent_inverse(&s.s)?;
    let m_inv = unipotent_inverse(&m)?;
    let f = &s_inv * &m;
    let f_inv = &m_inv * &s.s;
    let components: Vec<Mat<Series>> = (0..data.mu)
        .map(|k| {
            let a = &diff_mat(&f, k) * &f_inv;
            mul_z_mat(&a, 1).map(|e| -e.truncate(data.order))
        })
        .collect();
    if components.iter().any(overflowed) {
        return Err(EngineError::TruncationOverflow("connection left the z window".into()));
    }
    Ok(GmConnection { components })
}

/// z-independence of `Ã`, then `dA = 0` and `A∧A = 0` on the full `Ã`.
pub fn check_good_section(s: &SectionS, data: &SaitoData) -> Result<Report> {
    let conn = connection_in_gm_frame(s, data)?;
    let mut rep = Report::new();
    let zdep = conn.z_dependent_part();
    if zdep.iter().all(|m| m.is_zero()) {
        rep.pass("A z-independent");
    } else {
        for (k, m) in zdep.iter().enumerate() {
            if !m.is_zero() {
                rep.residual(&format!("A z-independent[dt{{{}}}]", k), m);
            }
        }
    }
    rep.extend("", check_commutativity(&conn.to_one_form(data), data.order));
    Ok(rep)
}

#[derive(Clone, Debug, PartialEq)]
pub enum GoodSection {
    Found(SectionS),
    /// The z-independence system first becomes inconsistent at this t-order.
    Obstructed { order: u32 },
}

/// `B_k = z Γ_k = -z ∂_k M · M⁻¹`, the connection in the reduced basis.
fn reduced_connection(data: &SaitoData) -> Result<Vec<Mat<Series>>> {
    let m = gm_frame(data)?;
    let m_inv = unipotent_inverse(&m)?;
    Ok((0..data.mu).map(|k| mul_z_mat(&(&diff_mat(&m, k) * &m_inv), 1).map(|e| -e.clone())).collect())
}

/// Solves for `S = 1 + Σ_{j=1}^{bound} z^j S_j(t)` with `Ã` independent of `z`.
///
/// `Ã_k` is z-free iff `S B_k(z=0) - B_k S - z ∂_k S = 0`, which is linear in
/// the unknown coefficients. Unknowns are ordered by z-power, t-monomial,
/// row and column; free variables of the solved system are set to zero.
pub fn find_good_section(data: &SaitoData, bound: u32) -> Result<GoodSection> {
    let b = reduced_connection(data)?;
    let b0: Vec<Mat<Series>> = b.iter().map(|m| m.map(|s| s.z_coeff(0))).collect();
    let mu = data.mu;
    let monos = t_monomials(data.mu, data.ctx.order);
    let mut unknowns = Vec::new();
    for j in 1..=bound as i32 {
        for e in &monos {
            for r in 0..mu {
                for c in 0..mu {
                    unknowns.push((j, e.clone(), r, c));
                }
            }
        }
    }
    // Residual of S = 1 is B0 - B; each unknown contributes X B0 - B X - z ∂X.
    let constant: Vec<Mat<Series>> = b0.iter().zip(&b).map(|(x, y)| x - y).collect();
    let mut columns = Vec::with_capacity(unknowns.len());
    for (j, e, r, c) in &unknowns {
        let mut x = Mat::zeros(mu, mu, &data.zero());
        x.set(*r, *c, Series::monomial(&data.ctx, *j, e.clone(), int(1)));
        let col: Vec<Mat<Series>> = (0..mu)
            .map(|k| &(&(&x * &b0[k]) - &(&b[k] * &x)) - &mul_z_mat(&diff_mat(&x, k), 1))
            .collect();
        columns.push(col);
    }
    // Equations: (k, row, col, monomial) through t-order `order`.
    let mut keys = std::collections::BTreeSet::new();
    let mut collect = |ms: &[Mat<Series>]| {
        for (k, m) in ms.iter().enumerate() {
            for (r, c, s) in m.nonzero_entries() {
                for mono in s.terms.keys() {
                    if mono.degree() <= data.order {
                        keys.insert((mono.degree(), k, r, c, mono.clone()));
                    }
                }
            }
        }
    };
    collect(&constant);
    for col in &columns {
        collect(col);
    }
    let keys: Vec<_> = keys.into_iter().collect();
    let entry = |ms: &[Mat<Series>], key: &(u32, usize, usize, usize, Mono)| -> Rational {
        ms[key.1].get(key.2, key.3).coeff(key.4.z, &key.4.e)
    };
    let mut a = Mat::zeros(keys.len(), unknowns.len(), &int(0));
    let mut rhs = Mat::zeros(keys.len(), 1, &int(0));
    for (i, key) in keys.iter().enumerate() {
        rhs.set(i, 0, -entry(&constant, key));
        for (j, col) in columns.iter().enumerate() {
            let v = entry(col, key);
            if !v.is_zero() {
                a.set(i, j, v);
            }
        }
    }
    let Some(x) = a.solve(&rhs) else {
        let order = (0..=data.order)
            .find(|&p| {
                let rows: Vec<usize> = (0..keys.len()).filter(|&i| keys[i].0 <= p).collect();
                let cols: Vec<usize> = (0..unknowns.len()).collect();
                a.submatrix(&rows, &cols).solve(&rhs.submatrix(&rows, &[0])).is_none()
            })
            .unwrap_or(data.order);
        return Ok(GoodSection::Obstructed { order });
    };
    let mut s = Mat::identity(mu, &data.zero());
    for (idx, (j, e, r, c)) in unknowns.iter().enumerate() {
        let v = x.get(idx, 0);
        if !v.is_zero() {
            let cur = s.get(*r, *c).clone();
            s.set(*r, *c, cur + Series::monomial(&data.ctx, *j, e.clone(), v.clone()));
        }
    }
    Ok(GoodSection::Found(SectionS { s }))
}

fn t_monomials(nvars: usize, order: u32) -> Vec<Vec<u32>> {
    let mut out = vec![vec![]];
    for _ in 0..nvars {
        let mut next = Vec::new();
        for e in &out {
            let used: u32 = e.iter().sum();
            for p in 0..=order - used {
                let mut f = e.clone();
                f.push(p);
                next.push(f);
            }
        }
        out = next;
    }
    out.sort_by_key(|e| (e.iter().sum::<u32>(), std::cmp::Reverse(e.clone())));
    out
}

/// Embeds rational matrices into the series ring of `data`.
pub fn lift(data: &SaitoData, m: &Mat<Rational>) -> Mat<Series> {
    lift_mat(m, &data.ctx)
}
