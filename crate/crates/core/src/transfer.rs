//! Homotopy transfer over trees, the one-leaf series, and L∞ relation checks.
//!
//! Conventions (shifted L∞): every operation `l_n: V^{⊗n} → V` is odd and
//! graded-symmetric, and the relations read
//! `Σ_{p+q=n+1} C(n,q)·Sym(l_p ∘ (l_q ⊗ id^{n-q})) = 0` with `l_1 = Q + m_1`.
//! Transferred operations are `l'_n = Σ_{labeled trees} (-1)^{n_e} ⟨h, m, i, π⟩`,
//! i.e. `n!` times the shape sum weighted by `1/n_γ` and symmetrized.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::complexes::{Complex, Sdr};
use crate::error::{EngineError, Result};
use crate::exactlin::contract::{tensor_contract, Wiring};
use crate::exactlin::graded::{factorial, supercommutator};
use crate::exactlin::series::lift_map;
use crate::exactlin::{GradedMap, GradedSpace, Mat, MultiOp, Rational, Scalar, Series, SeriesCtx};
use crate::report::Report;
use crate::trees::{enumerate_trees, labelings, RootedTree, TreeWeight};

/// A differential plus ε-dependent operations `m_n` on one space.
#[derive(Clone, Debug)]
pub struct OperationSet<C: Scalar> {
    pub space: GradedSpace,
    pub ctx: Arc<SeriesCtx>,
    /// ε-independent part of `l_1`.
    pub differential: GradedMap<C>,
    pub ops: BTreeMap<usize, MultiOp<Series<C>>>,
    pub symmetric: bool,
}

impl<C: Scalar> OperationSet<C> {
    pub fn new(space: &GradedSpace, ctx: &Arc<SeriesCtx>, differential: GradedMap<C>) -> Self {
        OperationSet { space: space.clone(), ctx: ctx.clone(), differential, ops: BTreeMap::new(), symmetric: true }
    }

    pub fn with_op(mut self, op: MultiOp<Series<C>>) -> Self {
        self.ops.insert(op.arity, op);
        self
    }

    pub fn get(&self, n: usize) -> Option<&MultiOp<Series<C>>> {
        self.ops.get(&n).filter(|m| !m.is_zero())
    }

    /// Parity and ε-valuation checks.
    pub fn validate(&self) -> Result<()> {
        for (n, m) in &self.ops {
            if m.parity() != 1 {
                return Err(EngineError::Parity(format!("m{} must be odd", n)));
            }
            if let Some((r, c)) = m.map.parity_violation() {
                return Err(EngineError::Parity(format!("m{} entry ({},{}) breaks the parity rule", n, r, c)));
            }
            let zero = vec![0; self.ctx.nvars()];
            if m.map.mat.data.iter().any(|s| !s.coeff(0, &zero).is_zero()) {
                return Err(EngineError::Precondition(format!("m{} has an ε^0 term", n)));
            }
        }
        Ok(())
    }

    pub fn arities(&self) -> Vec<usize> {
        self.ops.iter().filter(|(_, m)| !m.is_zero()).map(|(n, _)| *n).collect()
    }

    /// `l_1 = Q + m_1` as a series map.
    pub fn l1(&self) -> GradedMap<Series<C>> {
        let q = lift_map(&self.differential, &self.ctx);
        match self.ops.get(&1) {
            Some(m) => q.add(&m.map).expect("same space"),
            None => q,
        }
    }
}

/// The SDR with its maps lifted to ε-series.
struct Lifted<C: Scalar> {
    i: GradedMap<Series<C>>,
    pi: GradedMap<Series<C>>,
    h: GradedMap<Series<C>>,
    vr: GradedSpace,
}

fn lift_sdr<C: Scalar>(sdr: &Sdr<C>, ctx: &Arc<SeriesCtx>) -> Lifted<C> {
    Lifted { i: lift_map(&sdr.i, ctx), pi: lift_map(&sdr.pi, ctx), h: lift_map(&sdr.h, ctx), vr: sdr.vr.space.clone() }
}

/// Builds operator list and wiring for `π ∘ tree ∘ i^{⊗n}` with `h` on
/// internal edges.
fn wiring_for<C: Scalar>(
    t: &RootedTree,
    ops: &OperationSet<C>,
    lifted: &Lifted<C>,
    list: &mut Vec<GradedMap<Series<C>>>,
    next_input: &mut usize,
) -> Result<Wiring> {
    match t {
        RootedTree::Leaf(_) => {
            list.push(lifted.i.clone());
            let w = Wiring::node(list.len() - 1, vec![Wiring::Input(*next_input)]);
            *next_input += 1;
            Ok(w)
        }
        RootedTree::Vertex(ch) => {
            let m = ops
                .ops
                .get(&ch.len())
                .ok_or_else(|| EngineError::Structural(format!("no operation of arity {}", ch.len())))?;
            list.push(m.map.clone());
            let idx = list.len() - 1;
            let mut kids = Vec::new();
            for c in ch {
                match c {
                    RootedTree::Leaf(_) => kids.push(wiring_for(c, ops, lifted, list, next_input)?),
                    RootedTree::Vertex(_) => {
                        list.push(lifted.h.clone());
                        let hidx = list.len() - 1;
                        let inner = wiring_for(c, ops, lifted, list, next_input)?;
                        kids.push(Wiring::node(hidx, vec![inner]));
                    }
                }
            }
            Ok(Wiring::node(idx, kids))
        }
    }
}

/// `(-1)^{n_e} ⟨h^{n_e}, ⊗m, i^{⊗n}, π⟩_γ` with inputs in depth-first order.
/// The symmetry factor is not included.
pub fn tree_amplitude<C: Scalar>(sdr: &Sdr<C>, ops: &OperationSet<C>, tree: &RootedTree) -> Result<MultiOp<Series<C>>> {
    let lifted = lift_sdr(sdr, &ops.ctx);
    amplitude_lifted(&lifted, ops, tree)
}

fn amplitude_lifted<C: Scalar>(lifted: &Lifted<C>, ops: &OperationSet<C>, tree: &RootedTree) -> Result<MultiOp<Series<C>>> {
    let mut list = vec![lifted.pi.clone()];
    let mut k = 0;
    let inner = wiring_for(tree, ops, lifted, &mut list, &mut k)?;
    let w = Wiring::node(0, vec![inner]);
    let mut m = tensor_contract(&list, &w, &lifted.vr)?;
    if tree.internal_edges() % 2 == 1 {
        m = m.neg();
    }
    m.source = lifted.vr.tensor_power(k);
    m.target = lifted.vr.clone();
    MultiOp::new(&lifted.vr, k, m)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SumMode {
    /// Unlabeled shapes weighted by `1/n_γ`, then symmetrized.
    Shapes,
    /// Every leaf labeling counted once, weighted by `1/n!`.
    Labeled,
}

/// One tree's weighted share of `l'_n`.
#[derive(Clone, Debug)]
pub struct Contribution<C: Scalar> {
    pub tree: String,
    pub n_gamma: u64,
    pub op: MultiOp<Series<C>>,
}

#[derive(Clone, Debug)]
pub struct Transferred<C: Scalar> {
    pub ops: OperationSet<C>,
    pub contributions: Vec<Contribution<C>>,
}

/// `l'_n` for `n ≤ max_arity`, through ε-order `eps_order`.
pub fn transferred_operations<C: Scalar>(
    sdr: &Sdr<C>,
    ops: &OperationSet<C>,
    max_arity: usize,
    eps_order: u32,
    mode: SumMode,
) -> Result<Transferred<C>> {
    ops.validate()?;
    let lifted = lift_sdr(sdr, &ops.ctx);
    let arities = ops.arities();
    let mut out = OperationSet::new(&sdr.vr.space, &ops.ctx, sdr.vr.q.clone());
    let mut contributions = Vec::new();
    let proto = Series::zero(&ops.ctx);
    for n in 1..=max_arity {
        let mut acc = MultiOp::zero(&sdr.vr.space, n, 1, &proto);
        if !arities.is_empty() {
            let shapes = enumerate_trees(n, &arities, Some(eps_order as usize))?;
            for shape in shapes {
                let w = TreeWeight::of(&shape);
                let amp = amplitude_lifted(&lifted, ops, &shape)?;
                let share = match mode {
                    SumMode::Shapes => amp
                        .symmetrize()
                        .scale(&Rational::new(factorial(n).into(), w.n_gamma.into())),
                    SumMode::Labeled => {
                        let mut s = MultiOp::zero(&sdr.vr.space, n, 1, &proto);
                        for lab in labelings(&shape) {
                            let perm: Vec<usize> = lab.leaf_labels().iter().map(|l| l - 1).collect();
                            s = s.add(&amp.permute_inputs(&perm))?;
                        }
                        s
                    }
                };
                acc = acc.add(&share)?;
                contributions.push(Contribution { tree: shape.to_string(), n_gamma: w.n_gamma, op: share });
            }
        }
        acc.map = acc.map.map_entries(|s| s.truncate(eps_order));
        out.ops.insert(n, acc);
    }
    Ok(Transferred { ops: out, contributions })
}

/// Per-arity residuals of the L∞ relations.
#[derive(Clone, Debug)]
pub struct RelationReport<C: Scalar> {
    pub residuals: BTreeMap<usize, MultiOp<Series<C>>>,
    /// Arities whose operation is not graded-symmetric.
    pub asymmetric: Vec<usize>,
    pub max_arity: usize,
    pub eps_order: u32,
}

impl<C: Scalar> RelationReport<C> {
    pub fn passed(&self) -> bool {
        self.asymmetric.is_empty() && self.residuals.values().all(|m| m.is_zero())
    }

    pub fn failing_arities(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.residuals.iter().filter(|(_, m)| !m.is_zero()).map(|(n, _)| *n).collect();
        v.extend(&self.asymmetric);
        v.sort_unstable();
        v.dedup();
        v
    }
}

/// `Σ_{p+q=n+1} C(n,q)·Sym(l_p ∘ (l_q ⊗ id^{n-q}))` for `n ≤ max_arity`.
pub fn check_linfty<C: Scalar>(ops: &OperationSet<C>, max_arity: usize) -> Result<RelationReport<C>> {
    if !ops.symmetric {
        return Err(EngineError::Precondition("relations are implemented for symmetric operations only".into()));
    }
    let v = &ops.space;
    let proto = Series::zero(&ops.ctx);
    let l = |k: usize| -> Option<GradedMap<Series<C>>> {
        if k == 1 {
            Some(ops.l1())
        } else {
            ops.get(k).map(|m| m.map.clone())
        }
    };
    let asymmetric = (2..=max_arity).filter(|&k| ops.get(k).is_some_and(|m| !m.is_symmetric())).collect();
    let mut residuals = BTreeMap::new();
    for n in 1..=max_arity {
        let mut acc = MultiOp::zero(v, n, 0, &proto);
        for q in 1..=n {
            let p = n + 1 - q;
            let (Some(lp), Some(lq)) = (l(p), l(q)) else { continue };
            let inner = if n == q { lq } else { lq.tensor(&GradedMap::identity(&v.tensor_power(n - q), &proto)) };
            let comp = lp.compose_unchecked(&inner);
            let term = MultiOp { arity: n, space: v.clone(), map: comp }.symmetrize();
            let binom = (factorial(n) / (factorial(q) * factorial(n - q))) as i64;
            acc = acc.add(&term.scale(&Rational::from_integer(binom.into())))?;
        }
        acc.map.parity = 0;
        residuals.insert(n, acc);
    }
    Ok(RelationReport { residuals, asymmetric, max_arity, eps_order: ops.ctx.order })
}

/// `{Q,φ} + φ²` truncated at `eps_order`.
pub fn check_mc<C: Scalar>(complex: &Complex<C>, phi: &GradedMap<Series<C>>, eps_order: u32) -> Result<GradedMap<Series<C>>> {
    if phi.parity != 1 {
        return Err(EngineError::Parity("Maurer-Cartan element must be odd".into()));
    }
    let ctx = phi.proto().ctx.clone();
    let q = lift_map(&complex.q, &ctx);
    let r = supercommutator(&q, phi)?.add(&phi.compose_unchecked(phi))?;
    Ok(r.map_entries(|s| s.truncate(eps_order)))
}

/// The one-leaf operation set `{m_1 = φ}` over the differential `Q`.
pub fn one_leaf_set<C: Scalar>(complex: &Complex<C>, phi: &GradedMap<Series<C>>) -> Result<OperationSet<C>> {
    let ctx = phi.proto().ctx.clone();
    let op = MultiOp::new(&complex.space, 1, phi.clone())?;
    Ok(OperationSet::new(&complex.space, &ctx, complex.q.clone()).with_op(op))
}

/// `A_1` via the tree sum and the residual `{Q_r, A_1} + A_1²`.
pub fn check_transferred_mc<C: Scalar>(
    sdr: &Sdr<C>,
    phi: &GradedMap<Series<C>>,
    eps_order: u32,
) -> Result<(GradedMap<Series<C>>, GradedMap<Series<C>>)> {
    let set = one_leaf_set(&sdr.v, phi)?;
    let t = transferred_operations(sdr, &set, 1, eps_order, SumMode::Shapes)?;
    let a1 = t.ops.ops[&1].map.clone();
    let ctx = phi.proto().ctx.clone();
    let qr = lift_map(&sdr.vr.q, &ctx);
    let r = supercommutator(&qr, &a1)?.add(&a1.compose_unchecked(&a1))?;
    Ok((a1, r.map_entries(|s| s.truncate(eps_order))))
}

/// `π φ Σ_k (-hφ)^k i`, the closed form of the chain sum.
pub fn one_leaf_series<C: Scalar>(sdr: &Sdr<C>, phi: &GradedMap<Series<C>>, eps_order: u32) -> GradedMap<Series<C>> {
    let ctx = phi.proto().ctx.clone();
    let h = lift_map(&sdr.h, &ctx);
    let i = lift_map(&sdr.i, &ctx);
    let pi = lift_map(&sdr.pi, &ctx);
    let step = h.compose_unchecked(phi).neg();
    let mut term = i.clone();
    let mut acc = phi.compose_unchecked(&i);
    for _ in 0..eps_order {
        term = step.compose_unchecked(&term);
        if term.is_zero() {
            break;
        }
        acc = acc.add(&phi.compose_unchecked(&term)).expect("same shape");
    }
    pi.compose_unchecked(&acc).map_entries(|s| s.truncate(eps_order))
}

/// The order-2 cancellation
/// `π{Q,φ₂}i + πφ₁{Q,h}φ₁i + πφ₁(1-{Q,h})φ₁i = 0`, term by term.
pub fn order_two_identity<C: Scalar>(sdr: &Sdr<C>, phi1: &GradedMap<C>, phi2: &GradedMap<C>) -> Result<Report> {
    let q = &sdr.v.q;
    let (i, pi) = (&sdr.i, &sdr.pi);
    let qh = supercommutator(q, &sdr.h)?;
    let one = GradedMap::identity(&sdr.v.space, sdr.proto());
    let t1 = pi.compose_unchecked(&supercommutator(q, phi2)?).compose_unchecked(i);
    let t2 = pi.compose_unchecked(phi1).compose_unchecked(&qh).compose_unchecked(phi1).compose_unchecked(i);
    let t3 = pi.compose_unchecked(phi1).compose_unchecked(&one.sub(&qh)?).compose_unchecked(phi1).compose_unchecked(i);
    let a1_1 = pi.compose_unchecked(phi1).compose_unchecked(i);
    let a1_2 = pi
        .compose_unchecked(phi2)
        .compose_unchecked(i)
        .sub(&pi.compose_unchecked(phi1).compose_unchecked(&sdr.h).compose_unchecked(phi1).compose_unchecked(i))?;
    let qr = &sdr.vr.q;
    let mut rep = Report::new();
    let sum = t1.add(&t2)?.add(&t3)?;
    rep.residual("sum of the three terms", &sum.mat);
    rep.equal("{Q_r, A1^(2)} = first + second", &supercommutator(qr, &a1_2)?.mat, &t1.add(&t2)?.mat);
    rep.equal("(A1^(1))^2 = third", &a1_1.compose_unchecked(&a1_1).mat, &t3.mat);
    let phi1sq = pi.compose_unchecked(phi1).compose_unchecked(phi1).compose_unchecked(i);
    rep.equal("second + third = pi phi1^2 i", &t2.add(&t3)?.mat, &phi1sq.mat);
    Ok(rep)
}

/// Coefficient of `ε^k` of a one-variable series map.
pub fn eps_coeff<C: Scalar>(m: &GradedMap<Series<C>>, k: u32) -> GradedMap<C> {
    crate::exactlin::series::coeff_map(m, 0, &[k])
}

/// Splits a scalar map into an ε-series map `Σ ε^k m_k`.
pub fn eps_series<C: Scalar>(parts: &[(u32, &GradedMap<C>)], ctx: &Arc<SeriesCtx>) -> GradedMap<Series<C>> {
    let (_, first) = parts[0];
    let mut mat = Mat::zeros(first.mat.rows, first.mat.cols, &Series::zero(ctx));
    for (k, m) in parts {
        for (r, c, v) in m.mat.nonzero_entries() {
            mat.add_at(r, c, Series::monomial(ctx, 0, vec![*k], v));
        }
    }
    GradedMap::new_unchecked(first.source.clone(), first.target.clone(), first.parity, mat)
}
