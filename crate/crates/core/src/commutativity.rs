//! Strong-Hodge bicomplexes, commutative families and the two constructions
//! of solutions of the Commutativity equation.
//!
//! Forms in the parameters carry odd symbols `dt_a` (see [`FormOp`]); a
//! family `U` is an even `End(V)`-valued series in `t_1..t_μ`, one series
//! variable per parameter.

use std::collections::BTreeSet;
use std::sync::Arc;

use crate::complexes::{validate_sdr, Complex, Sdr};
use crate::error::{EngineError, Result};
use crate::exactlin::forms::FormOp;
use crate::exactlin::graded::supercommutator;
use crate::exactlin::series::{coeff_map, lift_map, Mono};
use crate::exactlin::{GradedMap, GradedSpace, Ring, Scalar, Series, SeriesCtx};
use crate::report::Report;

#[derive(Clone, Debug, PartialEq)]
pub struct HodgeData<C: Scalar> {
    pub complex: Complex<C>,
    /// Odd homotopy with `{Q,G} = id - i_W π_W`.
    pub g: GradedMap<C>,
    pub g_minus: GradedMap<C>,
    pub i_w: GradedMap<C>,
    pub pi_w: GradedMap<C>,
    pub w: GradedSpace,
    /// Basis vectors on which family and Maurer-Cartan residuals are trusted
    /// (all when `None`); truncated models are exact only away from the cutoff.
    pub window: Option<Vec<usize>>,
}

impl<C: Scalar> HodgeData<C> {
    /// The contraction onto `W` with homotopy `G`.
    pub fn sdr(&self) -> Sdr<C> {
        Sdr {
            v: self.complex.clone(),
            vr: Complex::trivial(&self.w, self.complex.q.proto()),
            i: self.i_w.clone(),
            pi: self.pi_w.clone(),
            h: self.g.clone(),
        }
    }

    pub fn space(&self) -> &GradedSpace {
        &self.complex.space
    }

    /// Zeroes the columns outside the window.
    pub fn restrict<R: Ring>(&self, m: &GradedMap<R>) -> GradedMap<R> {
        let Some(cols) = &self.window else { return m.clone() };
        let mut out = GradedMap::zero(&m.source, &m.target, m.parity, m.proto());
        for &c in cols {
            for r in 0..m.mat.rows {
                out.mat.set(r, c, m.mat.get(r, c).clone());
            }
        }
        out
    }

    fn restrict_form(&self, f: &FormOp<C>) -> FormOp<C> {
        f.map(|m| self.restrict(m))
    }
}

/// Contraction identities for `(Q, G, i_W, π_W)` plus the `G₋` conditions.
pub fn validate_strong_hodge<C: Scalar>(d: &HodgeData<C>) -> Result<Report> {
    let gm = &d.g_minus;
    if gm.source != *d.space() || gm.target != *d.space() || gm.parity != 1 {
        return Err(EngineError::Structural("G_minus must be an odd endomorphism of the complex".into()));
    }
    if let Some((r, c)) = gm.parity_violation() {
        return Err(EngineError::Parity(format!("G_minus entry ({},{}) breaks the parity rule", r, c)));
    }
    let sdr_rep = validate_sdr(&d.sdr())?;
    let mut rep = Report::new();
    for c in sdr_rep.checks {
        // Q_r is zero by construction
        if c.name == "Q_r^2 = 0" || c.name == "pi i = id" {
            if c.name == "pi i = id" {
                rep.checks.push(c);
            }
            continue;
        }
        let mut c = c;
        c.name = c.name.replace('h', "G").replace("i Q_r", "0").replace("Q_r pi", "0");
        rep.checks.push(c);
    }
    rep.map_residual("G-^2 = 0", &gm.compose_unchecked(gm));
    rep.map_residual("{Q,G-} = 0", &supercommutator(&d.complex.q, gm)?);
    rep.map_residual("G- i = 0", &gm.compose_unchecked(&d.i_w));
    rep.map_residual("pi G- = 0", &d.pi_w.compose_unchecked(gm));
    rep.map_residual("{G,G-} = 0", &supercommutator(&d.g, gm)?);
    Ok(rep)
}

/// `(Q + zG₋)² = Q² + z{Q,G₋} + z²G₋²`, computed as one series in `z`.
pub fn saito_square<C: Scalar>(d: &HodgeData<C>) -> GradedMap<Series<C>> {
    let ctx = SeriesCtx::with_z(&[], 0, 2);
    let q = lift_map(&d.complex.q, &ctx);
    let gm = lift_map(&d.g_minus, &ctx).scale_by(&Series::z_pow(&ctx, 1));
    let qs = q.add(&gm).expect("same shape");
    qs.compose_unchecked(&qs)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FamilyMode {
    /// `[Q,U] = 0` and `[[G₋,U],U] = 0`.
    Simplified,
    /// `[Q,U] + [[G₋,U],U] = 0`.
    Full,
}

#[derive(Clone, Debug)]
pub struct CommFamily<C: Scalar> {
    pub u: GradedMap<Series<C>>,
    pub mode: FamilyMode,
}

impl<C: Scalar> CommFamily<C> {
    pub fn new(u: GradedMap<Series<C>>, mode: FamilyMode) -> Self {
        CommFamily { u, mode }
    }

    pub fn ctx(&self) -> &Arc<SeriesCtx> {
        &self.u.proto().ctx
    }

    pub fn params(&self) -> usize {
        self.ctx().nvars()
    }

    /// `Σ_a t_a M_a`.
    pub fn linear(ctx: &Arc<SeriesCtx>, ms: &[GradedMap<C>], mode: FamilyMode) -> Self {
        let first = &ms[0];
        let mut u = GradedMap::zero(&first.source, &first.target, 0, &Series::zero(ctx));
        for (a, m) in ms.iter().enumerate() {
            let t = Series::var(ctx, a);
            u = u.add(&lift_map(m, ctx).scale_by(&t)).expect("same shape");
        }
        CommFamily { u, mode }
    }

    /// Every monomial carried by some entry of `U`.
    pub fn monomials(&self) -> Vec<Mono> {
        let set: BTreeSet<Mono> = self.u.mat.data.iter().flat_map(|s| s.terms.keys().cloned()).collect();
        set.into_iter().collect()
    }
}

/// `Simplified` when both simplified equations hold through `order`
/// (inside the window), otherwise `Full`.
pub fn classify_mode<C: Scalar>(d: &HodgeData<C>, u: &GradedMap<Series<C>>, order: u32) -> Result<FamilyMode> {
    let ctx = u.proto().ctx.clone();
    let q = lift_map(&d.complex.q, &ctx);
    let gm = lift_map(&d.g_minus, &ctx);
    let qu = d.restrict(&trunc(&supercommutator(&q, u)?, order));
    let ggu = d.restrict(&trunc(&supercommutator(&supercommutator(&gm, u)?, u)?, order));
    Ok(if qu.is_zero() && ggu.is_zero() { FamilyMode::Simplified } else { FamilyMode::Full })
}

fn trunc<C: Scalar>(m: &GradedMap<Series<C>>, order: u32) -> GradedMap<Series<C>> {
    m.map_entries(|s| s.truncate(order))
}

fn trunc_form<C: Scalar>(f: &FormOp<C>, order: u32) -> FormOp<C> {
    f.map_series(|s| s.truncate(order))
}

/// `d^V U = Σ_a dt_a ∂_a U`.
pub fn d_params<C: Scalar>(u: &GradedMap<Series<C>>) -> FormOp<C> {
    let n = u.proto().ctx.nvars();
    FormOp::from_map(u.clone()).exterior_d(&(0..n).collect::<Vec<_>>(), |e, m| m.map_entries(|s| s.diff(e)))
}

fn check_family_shape<C: Scalar>(d: &HodgeData<C>, fam: &CommFamily<C>) -> Result<()> {
    if fam.u.source != *d.space() || fam.u.target != *d.space() {
        return Err(EngineError::Structural("U must be an endomorphism of the complex".into()));
    }
    if fam.u.parity != 0 {
        return Err(EngineError::Parity("U must be even".into()));
    }
    if let Some((r, c)) = fam.u.parity_violation() {
        return Err(EngineError::Parity(format!("U entry ({},{}) breaks the parity rule", r, c)));
    }
    if fam.params() > 63 {
        return Err(EngineError::Structural("at most 63 parameters".into()));
    }
    Ok(())
}

/// Mode equations, pairwise commutativity of the coefficients and
/// `{d^V U, [G₋,U]} = 0`, all through t-order `order`.
pub fn validate_comm_family<C: Scalar>(d: &HodgeData<C>, fam: &CommFamily<C>, order: u32) -> Result<Report> {
    check_family_shape(d, fam)?;
    let ctx = fam.ctx().clone();
    let u = &fam.u;
    let q = lift_map(&d.complex.q, &ctx);
    let gm = lift_map(&d.g_minus, &ctx);
    let mut rep = Report::new();
    let zero = vec![0; ctx.nvars()];
    rep.map_residual("U(0) = 0", &coeff_map(u, 0, &zero));

    let qu = supercommutator(&q, u)?;
    let gu = supercommutator(&gm, u)?;
    let ggu = supercommutator(&gu, u)?;
    match fam.mode {
        FamilyMode::Simplified => {
            rep.map_residual("[Q,U] = 0", &d.restrict(&trunc(&qu, order)));
            rep.map_residual("[[G-,U],U] = 0", &d.restrict(&trunc(&ggu, order)));
        }
        FamilyMode::Full => {
            rep.map_residual("[Q,U] + [[G-,U],U] = 0", &d.restrict(&trunc(&qu.add(&ggu)?, order)));
        }
    }

    let monos: Vec<Mono> = fam.monomials().into_iter().filter(|m| m.degree() <= order).collect();
    let coeffs: Vec<GradedMap<C>> = monos.iter().map(|m| coeff_map(u, m.z, &m.e)).collect();
    let mut commuting = true;
    for a in 0..coeffs.len() {
        for b in a + 1..coeffs.len() {
            let c = d.restrict(&supercommutator(&coeffs[a], &coeffs[b])?);
            if !c.is_zero() {
                commuting = false;
                rep.map_residual(&format!("[U{:?},U{:?}] = 0", monos[a].e, monos[b].e), &c);
            }
        }
    }
    if commuting {
        rep.pass("coefficients commute");
    }

    let du = d_params(u);
    let g_form = FormOp::from_map(gu);
    let aax = du.compose(&g_form).add(&g_form.compose(&du));
    rep.form_residual("{dU,[G-,U]} = 0", &d.restrict_form(&trunc_form(&aax, order)));
    Ok(rep)
}

/// `Σ_a dt_a A_a` with `A_a` even endomorphisms of `W`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConnectionOneForm<C: Scalar> {
    pub components: Vec<GradedMap<Series<C>>>,
}

impl<C: Scalar> ConnectionOneForm<C> {
    pub fn to_form(&self) -> FormOp<C> {
        let first = &self.components[0];
        let mut f = FormOp::zero(&first.source, &first.target);
        for (a, m) in self.components.iter().enumerate() {
            f.push(1u64 << a, m.clone());
        }
        f
    }

    pub fn truncate(&self, order: u32) -> Self {
        ConnectionOneForm { components: self.components.iter().map(|m| trunc(m, order)).collect() }
    }
}

fn need_order<C: Scalar>(fam: &CommFamily<C>, order: u32) -> Result<()> {
    if fam.ctx().order < order + 1 {
        return Err(EngineError::Precondition(format!(
            "the family is known through t-order {}; order {} needs one more",
            fam.ctx().order,
            order
        )));
    }
    Ok(())
}

/// The potential `Σ_k π_W U(-G G₋ U)^k i_W`.
pub fn potential<C: Scalar>(d: &HodgeData<C>, fam: &CommFamily<C>) -> GradedMap<Series<C>> {
    let ctx = fam.ctx().clone();
    let g = lift_map(&d.g, &ctx);
    let gm = lift_map(&d.g_minus, &ctx);
    let i = lift_map(&d.i_w, &ctx);
    let pi = lift_map(&d.pi_w, &ctx);
    let u = &fam.u;
    let step = g.compose_unchecked(&gm).compose_unchecked(u).neg();
    let mut term = i.clone();
    let mut acc = u.compose_unchecked(&i);
    for _ in 0..ctx.order {
        term = step.compose_unchecked(&term);
        if term.is_zero() {
            break;
        }
        acc = acc.add(&u.compose_unchecked(&term)).expect("same shape");
    }
    pi.compose_unchecked(&acc)
}

/// `A_a = ∂_a` of the potential, exact through t-order `order`.
pub fn build_a<C: Scalar>(d: &HodgeData<C>, fam: &CommFamily<C>, order: u32) -> Result<ConnectionOneForm<C>> {
    check_family_shape(d, fam)?;
    if fam.mode == FamilyMode::Full {
        return Err(EngineError::Precondition(
            "the product formula is for simplified families; use transferred_one_form".into(),
        ));
    }
    need_order(fam, order)?;
    let p = potential(d, fam);
    let components = (0..fam.params()).map(|a| trunc(&p.map_entries(|s| s.diff(a)), order)).collect();
    Ok(ConnectionOneForm { components })
}

/// Residuals of `A∧A = 0` (through `order`) and `dA = 0` (through `order - 1`).
pub fn check_commutativity<C: Scalar>(a: &ConnectionOneForm<C>, order: u32) -> Report {
    let f = a.to_form();
    let mut rep = Report::new();
    rep.form_residual("A^A = 0", &trunc_form(&f.compose(&f), order));
    let n = a.components.len();
    let da = f.exterior_d(&(0..n).collect::<Vec<_>>(), |e, m| m.map_entries(|s| s.diff(e)));
    if order > 0 {
        rep.form_residual("dA = 0", &trunc_form(&da, order - 1));
    } else {
        rep.pass("dA = 0");
    }
    rep
}

#[derive(Clone, Debug)]
pub struct TransferredForm<C: Scalar> {
    /// All form degrees of `π_W φ Σ(-Gφ)^k i_W`.
    pub full: FormOp<C>,
    pub one_form: ConnectionOneForm<C>,
    pub degree_zero_absent: bool,
}

/// Transfers `φ = d^V U + [G₋,U]` along `(i_W, π_W, G)` and keeps the
/// one-form part.
pub fn transferred_one_form<C: Scalar>(d: &HodgeData<C>, fam: &CommFamily<C>, order: u32) -> Result<TransferredForm<C>> {
    check_family_shape(d, fam)?;
    need_order(fam, order)?;
    let ctx = fam.ctx().clone();
    let q = lift_map(&d.complex.q, &ctx);
    let gm = lift_map(&d.g_minus, &ctx);
    let phi = d_params(&fam.u).add(&FormOp::from_map(supercommutator(&gm, &fam.u)?));
    let phi = trunc_form(&phi, order);
    let mc = phi.q_hom(&q, &q).add(&phi.compose(&phi));
    if !d.restrict_form(&trunc_form(&mc, order)).is_zero() {
        return Err(EngineError::Precondition("d^V U + [G-,U] is not a Maurer-Cartan element".into()));
    }
    let g = FormOp::from_map(lift_map(&d.g, &ctx));
    let i = FormOp::from_map(lift_map(&d.i_w, &ctx));
    let pi = FormOp::from_map(lift_map(&d.pi_w, &ctx));
    let step = g.compose(&phi).neg();
    let mut term = i.clone();
    let mut acc = phi.compose(&i);
    for _ in 0..order {
        term = trunc_form(&step.compose(&term), order);
        if term.is_zero() {
            break;
        }
        acc = acc.add(&phi.compose(&term));
    }
    let full = trunc_form(&pi.compose(&acc), order);
    let degree_zero_absent = full.component(0).is_none_or(|m| m.is_zero());
    let zero = GradedMap::zero(&d.w, &d.w, 0, &Series::zero(&ctx));
    let components =
        (0..fam.params()).map(|a| full.component(1u64 << a).cloned().unwrap_or_else(|| zero.clone())).collect();
    Ok(TransferredForm { full, one_form: ConnectionOneForm { components }, degree_zero_absent })
}
