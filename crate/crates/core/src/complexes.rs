//! Chain complexes, strong deformation retracts and the 1D evolution form
//! `exp(-tH)(1 - dt G)`.

use std::sync::Arc;

use crate::error::{EngineError, Result};
use crate::exactlin::graded::supercommutator;
use crate::exactlin::series::{coeff_map, lift_map};
use crate::exactlin::{Field, GradedMap, GradedSpace, Mat, Rational, Ring, Scalar, Series, SeriesCtx};
use crate::report::Report;

#[derive(Clone, Debug, PartialEq)]
pub struct Complex<R: Ring> {
    pub space: GradedSpace,
    pub q: GradedMap<R>,
}

impl<R: Ring> Complex<R> {
    pub fn new(space: GradedSpace, q: GradedMap<R>) -> Result<Self> {
        if q.source != space || q.target != space {
            return Err(EngineError::Structural("differential is not an endomorphism of the space".into()));
        }
        if q.parity != 1 {
            return Err(EngineError::Parity("differential must be odd".into()));
        }
        Ok(Complex { space, q })
    }

    /// The complex with zero differential.
    pub fn trivial(space: &GradedSpace, proto: &R) -> Self {
        Complex { space: space.clone(), q: GradedMap::zero(space, space, 1, proto) }
    }
}

/// Contraction data `(V, V_r, i, π, h)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Sdr<R: Ring> {
    pub v: Complex<R>,
    pub vr: Complex<R>,
    pub i: GradedMap<R>,
    pub pi: GradedMap<R>,
    pub h: GradedMap<R>,
}

impl<R: Ring> Sdr<R> {
    pub fn proto(&self) -> &R {
        self.v.q.proto()
    }

    /// `id - iπ`, the projector onto the contractible part.
    pub fn proj_c(&self) -> GradedMap<R> {
        let ip = self.i.compose_unchecked(&self.pi);
        GradedMap::identity(&self.v.space, self.proto()).sub(&ip).expect("same space")
    }

    pub fn map_entries<S: Ring>(&self, f: impl Fn(&R) -> S + Copy) -> Sdr<S> {
        Sdr {
            v: Complex { space: self.v.space.clone(), q: self.v.q.map_entries(f) },
            vr: Complex { space: self.vr.space.clone(), q: self.vr.q.map_entries(f) },
            i: self.i.map_entries(f),
            pi: self.pi.map_entries(f),
            h: self.h.map_entries(f),
        }
    }
}

fn check_shape<R: Ring>(name: &str, m: &GradedMap<R>, src: &GradedSpace, tgt: &GradedSpace, parity: u8) -> Result<()> {
    if m.source.parity != src.parity || m.target.parity != tgt.parity {
        return Err(EngineError::Structural(format!("{} has the wrong source or target", name)));
    }
    if m.parity != parity {
        return Err(EngineError::Parity(format!("{} must have parity {}", name, parity)));
    }
    if let Some((r, c)) = m.parity_violation() {
        return Err(EngineError::Parity(format!("{} entry ({},{}) breaks the parity rule", name, r, c)));
    }
    Ok(())
}

/// Checks every SDR identity and reports exact residuals.
pub fn validate_sdr<R: Ring>(d: &Sdr<R>) -> Result<Report> {
    let v = &d.v.space;
    let vr = &d.vr.space;
    check_shape("Q", &d.v.q, v, v, 1)?;
    check_shape("Q_r", &d.vr.q, vr, vr, 1)?;
    check_shape("i", &d.i, vr, v, 0)?;
    check_shape("pi", &d.pi, v, vr, 0)?;
    check_shape("h", &d.h, v, v, 1)?;
    let mut rep = Report::new();
    let q = &d.v.q.mat;
    let qr = &d.vr.q.mat;
    let (i, pi, h) = (&d.i.mat, &d.pi.mat, &d.h.mat);
    rep.residual("Q^2 = 0", &(q * q));
    rep.residual("Q_r^2 = 0", &(qr * qr));
    rep.equal("pi i = id", &(pi * i), &Mat::identity(vr.dim(), d.proto()));
    rep.residual("h h = 0", &(h * h));
    rep.residual("h i = 0", &(h * i));
    rep.residual("pi h = 0", &(pi * h));
    let qh = supercommutator(&d.v.q, &d.h)?;
    rep.equal("{Q,h} = id - i pi", &qh.mat, &d.proj_c().mat);
    rep.equal("Q i = i Q_r", &(q * i), &(i * qr));
    rep.equal("pi Q = Q_r pi", &(pi * q), &(qr * pi));
    Ok(rep)
}

/// Builds an SDR onto cohomology by splitting `V = H ⊕ im Q ⊕ C`.
pub fn canonical_sdr<F: Field>(c: &Complex<F>) -> Result<Sdr<F>> {
    let n = c.space.dim();
    let proto = c.q.proto().clone();
    let q = &c.q.mat;
    let kernel = q.nullspace();
    let rr = q.rref();
    // columns e_p (p a pivot of Q) span a complement of ker Q; b_p = Q e_p spans im Q
    let cvecs: Vec<usize> = rr.pivots.clone();
    let bvecs: Vec<Vec<F>> = cvecs.iter().map(|&p| q.column(p)).collect();
    let mut chosen: Vec<Vec<F>> = bvecs.clone();
    let mut hvecs: Vec<Vec<F>> = Vec::new();
    for j in 0..kernel.cols {
        let cand = kernel.column(j);
        let mut trial = chosen.clone();
        trial.push(cand.clone());
        if columns_rank(&trial, n, &proto) == trial.len() {
            chosen = trial;
            hvecs.push(cand);
        }
    }
    let hdim = hvecs.len();
    let mut basis = Mat::zeros(n, n, &proto);
    let mut col = 0;
    for vecs in [&hvecs, &bvecs] {
        for vcol in vecs.iter() {
            for (r, x) in vcol.iter().enumerate() {
                basis.set(r, col, x.clone());
            }
            col += 1;
        }
    }
    for &p in &cvecs {
        basis.set(p, col, proto.one_like());
        col += 1;
    }
    if col != n {
        return Err(EngineError::Structural("failed to split the complex".into()));
    }
    let inv = basis.inverse().ok_or_else(|| EngineError::Structural("splitting basis is singular".into()))?;
    let nb = bvecs.len();
    let mut hnew = Mat::zeros(n, n, &proto);
    for j in 0..nb {
        hnew.set(hdim + nb + j, hdim + j, proto.one_like());
    }
    let hm = basis.matmul(&hnew).matmul(&inv);
    let hpar: Vec<u8> = hvecs.iter().map(|v| vector_parity(v, &c.space)).collect();
    let labels = (0..hdim).map(|k| format!("h{}", k)).collect();
    let vr = GradedSpace::new(labels, hpar);
    let i = basis.submatrix(&(0..n).collect::<Vec<_>>(), &(0..hdim).collect::<Vec<_>>());
    let pi = inv.submatrix(&(0..hdim).collect::<Vec<_>>(), &(0..n).collect::<Vec<_>>());
    Ok(Sdr {
        v: c.clone(),
        vr: Complex::trivial(&vr, &proto),
        i: GradedMap::new(vr.clone(), c.space.clone(), 0, i)?,
        pi: GradedMap::new(c.space.clone(), vr.clone(), 0, pi)?,
        h: GradedMap::new(c.space.clone(), c.space.clone(), 1, hm)?,
    })
}

fn columns_rank<F: Field>(cols: &[Vec<F>], n: usize, proto: &F) -> usize {
    let mut m = Mat::zeros(n, cols.len(), proto);
    for (j, c) in cols.iter().enumerate() {
        for (r, x) in c.iter().enumerate() {
            m.set(r, j, x.clone());
        }
    }
    m.rank()
}

fn vector_parity<F: Field>(v: &[F], space: &GradedSpace) -> u8 {
    v.iter().zip(space.parity.iter()).find(|(x, _)| !x.is_zero()).map(|(_, p)| *p).unwrap_or(0)
}

/// Representation of `exp(-tH)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Representation {
    /// `id - (1-u)H` with `u = e^{-t}`; requires `H² = H`.
    Idempotent,
    /// Power series in `t` through the given order.
    Truncated(u32),
}

/// `I = body + dt·one_form`, entries are series in the length symbol
/// (variable `var` of the context).
#[derive(Clone, Debug)]
pub struct EvolutionForm<C: Scalar> {
    pub body: GradedMap<Series<C>>,
    pub one_form: GradedMap<Series<C>>,
    pub var: usize,
    pub mode: Representation,
}

/// Default context for a single edge.
pub fn edge_context(mode: Representation) -> Arc<SeriesCtx> {
    match mode {
        Representation::Idempotent => SeriesCtx::new(&["u"], 8),
        Representation::Truncated(n) => SeriesCtx::new(&["t"], n),
    }
}

pub fn evolution_form<C: Scalar>(h: &GradedMap<C>, g: &GradedMap<C>, mode: Representation) -> Result<EvolutionForm<C>> {
    evolution_form_in(h, g, mode, &edge_context(mode), 0)
}

/// Evolution form whose length symbol is variable `var` of `ctx`.
pub fn evolution_form_in<C: Scalar>(
    h: &GradedMap<C>,
    g: &GradedMap<C>,
    mode: Representation,
    ctx: &Arc<SeriesCtx>,
    var: usize,
) -> Result<EvolutionForm<C>> {
    if h.parity != 0 || g.parity != 1 {
        return Err(EngineError::Parity("evolution needs H even and G odd".into()));
    }
    if !h.is_endo() || h.source != g.source || !g.is_endo() {
        return Err(EngineError::Structural("H and G must be endomorphisms of one space".into()));
    }
    let hs = lift_map(h, ctx);
    let body = match mode {
        Representation::Idempotent => {
            if h.mat.matmul(&h.mat) != h.mat {
                return Err(EngineError::Precondition("idempotent representation needs H^2 = H".into()));
            }
            let one = Series::constant(ctx, C::one_s());
            let coef = one.clone() - Series::var(ctx, var);
            GradedMap::identity(&h.source, &one).sub(&hs.scale_by(&coef))?
        }
        Representation::Truncated(order) => crate::exactlin::exp::exp_truncated(&hs, var, order)?,
    };
    let gs = lift_map(g, ctx);
    let one_form = body.compose_unchecked(&gs).neg();
    Ok(EvolutionForm { body, one_form, var, mode })
}

/// `∂_t` in the representation's variable (`-u ∂_u` in idempotent mode).
pub fn d_dt<C: Scalar>(m: &GradedMap<Series<C>>, var: usize, mode: Representation) -> GradedMap<Series<C>> {
    match mode {
        Representation::Truncated(_) => m.map_entries(|s| s.diff(var)),
        Representation::Idempotent => {
            let ctx = m.proto().ctx.clone();
            let u = Series::<C>::var(&ctx, var);
            m.map_entries(|s| -(&u * &s.diff(var)))
        }
    }
}

/// Residual of `(d+Q)`-closeness: `∂_t body - {Q, one_form}`.
pub fn closeness_residual<C: Scalar>(q: &GradedMap<C>, f: &EvolutionForm<C>) -> Result<GradedMap<Series<C>>> {
    let ctx = f.body.proto().ctx.clone();
    let qs = lift_map(q, &ctx);
    let lhs = d_dt(&f.body, f.var, f.mode);
    let rhs = supercommutator(&qs, &f.one_form)?;
    let mut r = lhs.sub(&rhs)?;
    r.parity = 0;
    if let Representation::Truncated(n) = f.mode {
        // the derivative is only known through order n-1
        r = r.map_entries(|s| s.truncate(n.saturating_sub(1)));
    }
    Ok(r)
}

/// `body(t1)·body(t2) - body(t1+t2)` in a two-variable ring.
pub fn semigroup_residual<C: Scalar>(h: &GradedMap<C>, mode: Representation) -> Result<GradedMap<Series<C>>> {
    let order = match mode {
        Representation::Idempotent => 4,
        Representation::Truncated(n) => n,
    };
    let ctx = SeriesCtx::new(&["s1", "s2"], order);
    let zero_g = GradedMap::zero(&h.source, &h.source, 1, &C::zero_s());
    let b1 = evolution_form_in(h, &zero_g, mode, &ctx, 0)?.body;
    let b2 = evolution_form_in(h, &zero_g, mode, &ctx, 1)?.body;
    let lhs = b1.compose_unchecked(&b2);
    let hs = lift_map(h, &ctx);
    let one = Series::constant(&ctx, C::one_s());
    let rhs = match mode {
        Representation::Idempotent => {
            let u12 = &Series::var(&ctx, 0) * &Series::var(&ctx, 1);
            GradedMap::identity(&h.source, &one).sub(&hs.scale_by(&(one.clone() - u12)))?
        }
        Representation::Truncated(n) => {
            let s = Series::var(&ctx, 0) + Series::var(&ctx, 1);
            exp_of(&hs, &s, n)
        }
    };
    lhs.sub(&rhs)
}

/// `Σ_{k≤n} (-s A)^k / k!` for an arbitrary series `s` without constant term.
pub fn exp_of<C: Scalar>(a: &GradedMap<Series<C>>, s: &Series<C>, n: u32) -> GradedMap<Series<C>> {
    let step = a.scale_by(&-s.clone());
    let mut term = GradedMap::identity(&a.source, a.proto());
    let mut acc = term.clone();
    for k in 1..=n {
        term = step.compose_unchecked(&term).scale(&Rational::new(1.into(), (k as i64).into()));
        acc = acc.add(&term).expect("same shape");
    }
    acc
}

/// `∫_{ℝ₊}` of the one-form part of the idempotent evolution form built
/// from `H = id - iπ`, `G = h`. Every `u^k` integrates to `1/k`.
pub fn edge_integral<C: Scalar>(sdr: &Sdr<C>) -> Result<GradedMap<C>> {
    let f = evolution_form(&sdr.proj_c(), &sdr.h, Representation::Idempotent)?;
    integrate_u(&f.one_form, f.var)
}

/// Integrates a polynomial in `u = e^{-t}` over `t ∈ [0, ∞)`.
pub fn integrate_u<C: Scalar>(m: &GradedMap<Series<C>>, var: usize) -> Result<GradedMap<C>> {
    let mut out = Mat::zeros(m.mat.rows, m.mat.cols, &C::zero_s());
    for r in 0..m.mat.rows {
        for c in 0..m.mat.cols {
            let s = m.mat.get(r, c);
            let mut acc = C::zero_s();
            for (mono, coef) in &s.terms {
                let k = mono.e[var];
                if k == 0 {
                    return Err(EngineError::Precondition(format!("divergent integral: constant term in entry ({},{})", r, c)));
                }
                if mono.e.iter().enumerate().any(|(j, &p)| j != var && p > 0) || mono.z != 0 {
                    return Err(EngineError::Structural("integrand depends on other variables".into()));
                }
                acc = acc + coef.scale(&Rational::new(1.into(), (k as i64).into()));
            }
            out.set(r, c, acc);
        }
    }
    Ok(GradedMap::new_unchecked(m.source.clone(), m.target.clone(), m.parity, out))
}

/// `lim_{t→∞} exp(-t Proj_c)`: the projector `iπ` on `V`.
pub fn limit_at_infinity<C: Scalar>(sdr: &Sdr<C>) -> Result<GradedMap<C>> {
    let f = evolution_form(&sdr.proj_c(), &sdr.h, Representation::Idempotent)?;
    let at0 = f.body.map_entries(|s| s.subst_var(f.var, &C::zero_s()));
    let nv = at0.proto().ctx.nvars();
    Ok(coeff_map(&at0, 0, &vec![0; nv]))
}
