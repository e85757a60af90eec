//! One-dimensional topological quantum mechanics on trees and chains.
//!
//! Every edge carries the evolution form `exp(-tH - dt G)` built from
//! `H = id - iπ` and `G = h`; every internal vertex carries an operation.
//! Nodes (and the edges above them) are indexed in preorder, so edge 0 is
//! the output edge. Edge `e` owns the form symbol `dt_e` and the series
//! variable `offset + e` of the amplitude context.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::complexes::{evolution_form_in, d_dt, exp_of, Representation, Sdr};
use crate::error::{EngineError, Result};
use crate::exactlin::forms::FormOp;
use crate::exactlin::graded::tensor_differential;
use crate::exactlin::series::{lift_map, Mono};
use crate::exactlin::{GradedMap, GradedSpace, Rational, Scalar, Series, SeriesCtx};
use crate::report::Report;
use crate::transfer::OperationSet;
use crate::trees::RootedTree;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Decoration {
    Input,
    /// The operation of matching arity from the operation set.
    Op,
    /// A 2-valent identity vertex (a marked point on an edge).
    Identity,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecoratedGraph {
    pub tree: RootedTree,
    /// Length symbols, one per node in preorder.
    pub edges: Vec<String>,
    pub decorations: Vec<Decoration>,
}

fn preorder<'a>(t: &'a RootedTree, out: &mut Vec<&'a RootedTree>) {
    out.push(t);
    if let RootedTree::Vertex(ch) = t {
        for c in ch {
            preorder(c, out);
        }
    }
}

fn node_count(t: &RootedTree) -> usize {
    t.leaf_count() + t.vertex_count()
}

impl DecoratedGraph {
    pub fn new(tree: RootedTree, edges: Vec<String>) -> Result<Self> {
        let mut nodes = Vec::new();
        preorder(&tree, &mut nodes);
        let decorations = nodes
            .iter()
            .map(|n| if matches!(n, RootedTree::Leaf(_)) { Decoration::Input } else { Decoration::Op })
            .collect();
        Self::with_decorations(tree, edges, decorations)
    }

    pub fn with_decorations(tree: RootedTree, edges: Vec<String>, decorations: Vec<Decoration>) -> Result<Self> {
        let n = node_count(&tree);
        if edges.len() != n || decorations.len() != n {
            return Err(EngineError::Structural(format!("graph has {} edges but {} symbols were given", n, edges.len())));
        }
        let mut seen = std::collections::BTreeSet::new();
        for e in &edges {
            if !seen.insert(e) {
                return Err(EngineError::Structural(format!("length symbol '{}' repeated", e)));
            }
        }
        if n > 63 {
            return Err(EngineError::Structural("at most 63 edges".into()));
        }
        let mut nodes = Vec::new();
        preorder(&tree, &mut nodes);
        for (node, d) in nodes.iter().zip(&decorations) {
            let ok = match (node, d) {
                (RootedTree::Leaf(_), Decoration::Input) => true,
                (RootedTree::Vertex(_), Decoration::Op) => true,
                (RootedTree::Vertex(ch), Decoration::Identity) => ch.len() == 1,
                _ => false,
            };
            if !ok {
                return Err(EngineError::Structural("decoration does not match node".into()));
            }
        }
        Ok(DecoratedGraph { tree, edges, decorations })
    }

    /// Chain of `k` unary operation vertices; edge names are listed from
    /// the output end.
    pub fn chain(k: usize, edges: Vec<String>) -> Result<Self> {
        let mut t = RootedTree::Leaf(1);
        for _ in 0..k {
            t = RootedTree::Vertex(vec![t]);
        }
        Self::new(t, edges)
    }

    /// Nested-list form, e.g. `(m2 (id L1) L2)`; `id` marks identity vertices.
    pub fn parse(text: &str, edges: Vec<String>) -> Result<Self> {
        let mut decorations = Vec::new();
        let mut prev_open = false;
        for tok in text.replace('(', " ( ").replace(')', " ) ").split_whitespace() {
            if tok == "(" {
                prev_open = true;
                continue;
            }
            if prev_open {
                decorations.push(if tok == "id" { Decoration::Identity } else { Decoration::Op });
            } else if tok.starts_with('L') {
                decorations.push(Decoration::Input);
            }
            prev_open = false;
        }
        let normalized = text.replace("(id ", "(m1 ").replace("(id)", "(m1)");
        let tree = RootedTree::parse(&normalized)?;
        Self::with_decorations(tree, edges, decorations)
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Preorder indices of edges ending in an internal vertex, root edge excluded.
    pub fn internal_edges(&self) -> Vec<usize> {
        (1..self.edges.len()).filter(|&e| self.decorations[e] != Decoration::Input).collect()
    }

    /// Inserts an identity vertex on edge `e`; the upper half keeps the
    /// name with suffix `a`, the lower half gets suffix `b`.
    pub fn cut_edge(&self, e: usize) -> Result<DecoratedGraph> {
        if e >= self.edges.len() {
            return Err(EngineError::Structural(format!("no edge {}", e)));
        }
        fn go(t: &RootedTree, idx: &mut usize, e: usize) -> RootedTree {
            let me = *idx;
            *idx += 1;
            let inner = match t {
                RootedTree::Leaf(l) => RootedTree::Leaf(*l),
                RootedTree::Vertex(ch) => RootedTree::Vertex(ch.iter().map(|c| go(c, idx, e)).collect()),
            };
            if me == e {
                RootedTree::Vertex(vec![inner])
            } else {
                inner
            }
        }
        let tree = go(&self.tree, &mut 0, e);
        let mut edges = self.edges.clone();
        let name = edges[e].clone();
        edges[e] = format!("{}a", name);
        edges.insert(e + 1, format!("{}b", name));
        let mut deco = self.decorations.clone();
        deco.insert(e, Decoration::Identity);
        Self::with_decorations(tree, edges, deco)
    }
}

/// A form-valued operator together with the meaning of its symbols.
#[derive(Clone, Debug)]
pub struct GraphAmplitude<C: Scalar> {
    pub form: FormOp<C>,
    pub ctx: Arc<SeriesCtx>,
    pub symbols: Vec<String>,
    /// Series variable of edge 0.
    pub offset: usize,
    pub mode: Representation,
    pub arity: usize,
}

impl<C: Scalar> GraphAmplitude<C> {
    /// The part without `dt`'s.
    pub fn function_part(&self) -> GradedMap<Series<C>> {
        self.form
            .component(0)
            .cloned()
            .unwrap_or_else(|| GradedMap::zero(&self.form.source, &self.form.target, 0, &Series::zero(&self.ctx)))
    }

    /// Sets the length variable of `edge` to `u = value` (or `t = value`).
    pub fn at_edge(&self, edge: usize, value: &C) -> FormOp<C> {
        self.form.map_series(|s| s.subst_var(self.offset + edge, value))
    }

    /// `(d + Q)` applied to the amplitude, `d = Σ dt_e ∂_{t_e}`.
    pub fn closeness_residual(&self, q_out: &GradedMap<C>, q_in: &GradedMap<C>) -> FormOp<C> {
        let symbols: Vec<usize> = (0..self.symbols.len()).collect();
        let mode = self.mode;
        let off = self.offset;
        let d = self.form.exterior_d(&symbols, |e, a| d_dt(a, off + e, mode));
        let qo = lift_map(q_out, &self.ctx);
        let qi = lift_map(&tensor_differential(q_in, self.arity), &self.ctx);
        let r = d.add(&self.form.q_hom(&qo, &qi));
        match self.mode {
            // d lowers each length degree by one, so degree n-1 is the last exact one
            Representation::Truncated(n) => {
                let top = self.ctx.order.saturating_sub(1);
                r.map_series(|s| {
                    let mut t = s.truncate(top);
                    t.terms.retain(|m, _| m.e[off..].iter().all(|&p| p < n));
                    t
                })
            }
            Representation::Idempotent => r,
        }
    }
}

/// Context with the operation variables first, then one length per edge.
fn amplitude_ctx<C: Scalar>(ops: &OperationSet<C>, graph: &DecoratedGraph, mode: Representation) -> Arc<SeriesCtx> {
    let mut names: Vec<&str> = ops.ctx.names.iter().map(|s| s.as_str()).collect();
    names.extend(graph.edges.iter().map(|s| s.as_str()));
    let extra = match mode {
        Representation::Idempotent => graph.edge_count() as u32,
        Representation::Truncated(n) => n,
    };
    SeriesCtx::new(&names, ops.ctx.order + extra)
}

struct Env<C: Scalar> {
    edge_forms: Vec<FormOp<C>>,
    ops: BTreeMap<usize, FormOp<C>>,
    ident: FormOp<C>,
    i: Option<FormOp<C>>,
    pi: Option<FormOp<C>>,
    decorations: Vec<Decoration>,
    /// Treat the subtree at this node as an input.
    cut: Option<usize>,
    v_space: GradedSpace,
    in_space: GradedSpace,
    proto: Series<C>,
}

impl<C: Scalar> Env<C> {
    fn walk(&self, t: &RootedTree, idx: &mut usize, root: bool) -> Result<(FormOp<C>, usize)> {
        let e = *idx;
        *idx += 1;
        let external_leaf = |f: &FormOp<C>| -> FormOp<C> { self.i.clone().unwrap_or_else(|| f.clone()) };
        match t {
            RootedTree::Leaf(_) => {
                let f = external_leaf(&self.edge_forms[e]);
                match (&self.pi, root) {
                    (Some(pi), true) => Ok((pi.compose(&f), 1)),
                    _ => Ok((f, 1)),
                }
            }
            RootedTree::Vertex(ch) => {
                if !root && self.cut == Some(e) {
                    *idx += node_count(t) - 1;
                    return Ok((self.i.clone().expect("cuts are preamplitude-only"), 1));
                }
                let vertex = match self.decorations[e] {
                    Decoration::Identity => &self.ident,
                    _ => self
                        .ops
                        .get(&ch.len())
                        .ok_or_else(|| EngineError::Structural(format!("no operation of arity {}", ch.len())))?,
                };
                // feed the children one slot at a time: m ∘ (id^pos ⊗ child ⊗ id^rest)
                let mut body = vertex.clone();
                let mut n = 0;
                for (j, c) in ch.iter().enumerate() {
                    let (f, k) = self.walk(c, idx, false)?;
                    let mut ext = f;
                    if n > 0 {
                        ext = self.identity(&self.in_space, n).tensor(&ext);
                    }
                    let rest = ch.len() - j - 1;
                    if rest > 0 {
                        ext = ext.tensor(&self.identity(&self.v_space, rest));
                    }
                    body = body.compose(&ext);
                    n += k;
                }
                if root {
                    Ok((self.wrap_root(e, body), n))
                } else {
                    Ok((self.edge_forms[e].compose(&body), n))
                }
            }
        }
    }

    fn identity(&self, space: &GradedSpace, n: usize) -> FormOp<C> {
        FormOp::from_map(GradedMap::identity(&space.tensor_power(n), &self.proto))
    }

    fn wrap_root(&self, e: usize, f: FormOp<C>) -> FormOp<C> {
        match &self.pi {
            Some(pi) => pi.compose(&f),
            None => self.edge_forms[e].compose(&f),
        }
    }
}

fn build_env<C: Scalar>(
    graph: &DecoratedGraph,
    sdr: &Sdr<C>,
    ops: &OperationSet<C>,
    mode: Representation,
    reduced: bool,
) -> Result<(Env<C>, Arc<SeriesCtx>, usize)> {
    let ctx = amplitude_ctx(ops, graph, mode);
    let offset = ops.ctx.nvars();
    let h = sdr.proj_c();
    let mut edge_forms = Vec::new();
    for e in 0..graph.edge_count() {
        let f = evolution_form_in(&h, &sdr.h, mode, &ctx, offset + e)?;
        let mut fo = FormOp::from_map(f.body);
        fo.push(1u64 << e, f.one_form);
        edge_forms.push(fo);
    }
    let positions: Vec<usize> = (0..offset).collect();
    let mut emb = BTreeMap::new();
    for (k, m) in &ops.ops {
        let map = m.map.map_entries(|s| s.embed(&ctx, &positions));
        emb.insert(*k, FormOp::from_map(map));
    }
    let proto = Series::zero(&ctx);
    let (i, pi) = if reduced {
        (Some(FormOp::from_map(lift_map(&sdr.i, &ctx))), Some(FormOp::from_map(lift_map(&sdr.pi, &ctx))))
    } else {
        (None, None)
    };
    let env = Env {
        edge_forms,
        ops: emb,
        ident: FormOp::from_map(GradedMap::identity(&sdr.v.space, &proto)),
        i,
        pi,
        decorations: graph.decorations.clone(),
        cut: None,
        v_space: sdr.v.space.clone(),
        in_space: if reduced { sdr.vr.space.clone() } else { sdr.v.space.clone() },
        proto: proto.clone(),
    };
    Ok((env, ctx, offset))
}

/// The evolution-decorated contraction `I_γ` on `V`.
pub fn graph_amplitude<C: Scalar>(
    graph: &DecoratedGraph,
    sdr: &Sdr<C>,
    ops: &OperationSet<C>,
    mode: Representation,
) -> Result<GraphAmplitude<C>> {
    let (env, ctx, offset) = build_env(graph, sdr, ops, mode, false)?;
    let (form, arity) = env.walk(&graph.tree, &mut 0, true)?;
    Ok(GraphAmplitude { form, ctx, symbols: graph.edges.clone(), offset, mode, arity })
}

/// External edges sent to `+∞`: leaves become `i`, the root becomes `π`.
pub fn preamplitude<C: Scalar>(
    graph: &DecoratedGraph,
    sdr: &Sdr<C>,
    ops: &OperationSet<C>,
    mode: Representation,
) -> Result<GraphAmplitude<C>> {
    if mode != Representation::Idempotent {
        return Err(EngineError::Precondition("preamplitudes need the idempotent representation of exp(-tH)".into()));
    }
    let (env, ctx, offset) = build_env(graph, sdr, ops, mode, true)?;
    let (form, arity) = env.walk(&graph.tree, &mut 0, true)?;
    Ok(GraphAmplitude { form, ctx, symbols: graph.edges.clone(), offset, mode, arity })
}

/// `exp(-t₁H - dt₁G) O exp(-t₂H - dt₂G)` in symbols `t1` (output side), `t2`.
pub fn observable_correlator<C: Scalar>(
    o: &GradedMap<C>,
    h: &GradedMap<C>,
    g: &GradedMap<C>,
    mode: Representation,
) -> Result<GraphAmplitude<C>> {
    if !o.is_endo() || o.source != h.source {
        return Err(EngineError::Structural("observable must be an endomorphism of V".into()));
    }
    let order = match mode {
        Representation::Idempotent => 2,
        Representation::Truncated(n) => n,
    };
    let ctx = SeriesCtx::new(&["t1", "t2"], order);
    let mut sides = Vec::new();
    for e in 0..2 {
        let f = evolution_form_in(h, g, mode, &ctx, e)?;
        let mut fo = FormOp::from_map(f.body);
        fo.push(1u64 << e, f.one_form);
        sides.push(fo);
    }
    let form = sides[0].compose(&FormOp::from_map(lift_map(o, &ctx))).compose(&sides[1]);
    Ok(GraphAmplitude { form, ctx, symbols: vec!["t1".into(), "t2".into()], offset: 0, mode, arity: 1 })
}

/// First-order change of the propagator under `Q → Q + δQ`.
#[derive(Clone, Debug)]
pub struct DeformationResponse<C: Scalar> {
    /// Fiber integral of `I(t₁) δQ I(t₂)` over `t₁ + t₂ = t` (the `ds`
    /// components), as a form in `t`.
    pub pushforward: FormOp<C>,
    /// `∫₀ᵗ` of the components without `ds`, read as an ordinary integral.
    pub duhamel: FormOp<C>,
    pub ctx: Arc<SeriesCtx>,
}

/// `∫_{t₁+t₂=t} exp(-t₁H - dt₁G) δQ exp(-t₂H - dt₂G)` through `t`-order `order`.
pub fn deformation_response<C: Scalar>(
    delta_q: &GradedMap<C>,
    h: &GradedMap<C>,
    g: &GradedMap<C>,
    order: u32,
) -> Result<DeformationResponse<C>> {
    if h.parity != 0 || g.parity != 1 || !delta_q.is_endo() || delta_q.source != h.source {
        return Err(EngineError::Structural("need H even, G odd and δQ an endomorphism of the same space".into()));
    }
    // symbols: bit 0 = ds, bit 1 = dt; variables s, t
    let ctx2 = SeriesCtx::new(&["s", "t"], order);
    let s = Series::<C>::var(&ctx2, 0);
    let t = Series::<C>::var(&ctx2, 1);
    let hs = lift_map(h, &ctx2);
    let gs = lift_map(g, &ctx2);
    let b1 = exp_of(&hs, &s, order);
    let b2 = exp_of(&hs, &(t - s), order);
    let mut i1 = FormOp::from_map(b1.clone());
    i1.push(1, b1.compose_unchecked(&gs).neg());
    let b2g = b2.compose_unchecked(&gs);
    let mut i2 = FormOp::from_map(b2);
    i2.push(2, b2g.neg());
    i2.push(1, b2g);
    let integrand = i1.compose(&FormOp::from_map(lift_map(delta_q, &ctx2))).compose(&i2);
    let ctx = SeriesCtx::new(&["t"], order);
    let integrate = |m: &GradedMap<Series<C>>| m.map_entries(|x| fiber_integral(x, &ctx));
    let mut push = FormOp::zero(&delta_q.source, &delta_q.target);
    let mut duh = FormOp::zero(&delta_q.source, &delta_q.target);
    for (mask, m) in &integrand.terms {
        let target = if mask & 1 == 1 { &mut push } else { &mut duh };
        target.push(mask >> 1, integrate(m));
    }
    Ok(DeformationResponse { pushforward: push, duhamel: duh, ctx })
}

/// `∫₀ᵗ ds` of a series in `(s, t)`.
fn fiber_integral<C: Scalar>(x: &Series<C>, ctx: &Arc<SeriesCtx>) -> Series<C> {
    let mut out = Series::zero(ctx);
    for (m, c) in &x.terms {
        let (a, b) = (m.e[0], m.e[1]);
        let w = Rational::new(1.into(), ((a + 1) as i64).into());
        out.add_term(Mono { z: 0, e: vec![a + b + 1] }, c.scale(&w));
    }
    out
}

/// `(d+Q)`-closeness of `I_γ`; requires `Q`-closed decorations.
pub fn check_closeness<C: Scalar>(
    graph: &DecoratedGraph,
    sdr: &Sdr<C>,
    ops: &OperationSet<C>,
    mode: Representation,
) -> Result<Report> {
    let amp = graph_amplitude(graph, sdr, ops, mode)?;
    let mut rep = Report::new();
    rep.form_residual("(d+Q) I", &amp.closeness_residual(&sdr.v.q, &sdr.v.q));
    if mode == Representation::Idempotent {
        let pa = preamplitude(graph, sdr, ops, mode)?;
        rep.form_residual("(d+Q_r) PA", &pa.closeness_residual(&sdr.vr.q, &sdr.vr.q));
    }
    Ok(rep)
}

/// Cutting edge `e` at an interior point: `I_{cut}(t_a, t_b) = I(t_a + t_b)`.
pub fn check_gluing<C: Scalar>(
    graph: &DecoratedGraph,
    e: usize,
    sdr: &Sdr<C>,
    ops: &OperationSet<C>,
    mode: Representation,
) -> Result<Report> {
    let whole = graph_amplitude(graph, sdr, ops, mode)?;
    let cut_graph = graph.cut_edge(e)?;
    let cut = graph_amplitude(&cut_graph, sdr, ops, mode)?;
    let off = whole.offset;
    // original edge k > e becomes k + 1; e becomes the upper half
    let positions: Vec<usize> = (0..whole.ctx.nvars())
        .map(|v| if v < off || v - off <= e { v } else { v + 1 })
        .collect();
    let (a, b) = (off + e, off + e + 1);
    let ua = Series::<C>::var(&cut.ctx, a);
    let ub = Series::<C>::var(&cut.ctx, b);
    let image = match mode {
        Representation::Idempotent => &ua * &ub,
        Representation::Truncated(_) => ua + ub,
    };
    let mut moved = FormOp::zero(&whole.form.source, &whole.form.target);
    for (mask, m) in &whole.form.terms {
        let low = mask & ((1u64 << (e + 1)) - 1);
        let high = (mask >> (e + 1)) << (e + 2);
        moved.push(low | high, m.map_entries(|s| s.embed(&cut.ctx, &positions).subst_series(a, &image)));
    }
    let pulled = moved.substitute_symbol(e, &[(e, 1), (e + 1, 1)]);
    let mut diff = cut.form.sub(&pulled);
    if let Representation::Truncated(n) = mode {
        // both sides are exact up to total length degree n
        diff = diff.map_series(|s| {
            let mut t = s.clone();
            t.terms.retain(|m, _| m.e[off..].iter().sum::<u32>() <= n);
            t
        });
    }
    let mut rep = Report::new();
    rep.form_residual(&format!("cut {}", graph.edges[e]), &diff);
    Ok(rep)
}

/// At `u_e = 0` the preamplitude equals the upper preamplitude composed
/// with the lower one in the slot where the subtree sat.
pub fn check_factorization<C: Scalar>(
    graph: &DecoratedGraph,
    e: usize,
    sdr: &Sdr<C>,
    ops: &OperationSet<C>,
) -> Result<Report> {
    if !graph.internal_edges().contains(&e) {
        return Err(EngineError::Structural(format!("edge {} is not internal", e)));
    }
    let mode = Representation::Idempotent;
    let pa = preamplitude(graph, sdr, ops, mode)?;
    let zero = C::zero_s();
    let at0 = pa.at_edge(e, &zero);
    let (mut env, _, _) = build_env(graph, sdr, ops, mode, true)?;
    env.cut = Some(e);
    let (upper, _) = env.walk(&graph.tree, &mut 0, true)?;
    env.cut = None;
    let mut nodes = Vec::new();
    preorder(&graph.tree, &mut nodes);
    let sub = nodes[e];
    let mut idx = e;
    let (lower, k) = env.walk(sub, &mut idx, true)?;
    // slot of the subtree = number of leaves before it in preorder
    let slot = nodes[..e].iter().filter(|n| matches!(n, RootedTree::Leaf(_))).count();
    let total = graph.tree.leaf_count();
    let proto = Series::zero(&pa.ctx);
    let vr = &sdr.vr.space;
    let id = |n: usize| -> FormOp<C> { FormOp::from_map(GradedMap::identity(&vr.tensor_power(n), &proto)) };
    let mut inner = lower;
    if slot > 0 {
        inner = id(slot).tensor(&inner);
    }
    let after = total - slot - k;
    if after > 0 {
        inner = inner.tensor(&id(after));
    }
    let composite = upper.compose(&inner).map_series(|s| s.subst_var(pa.offset + e, &zero));
    let mut rep = Report::new();
    rep.form_residual(&format!("factorization at {}", graph.edges[e]), &at0.sub(&composite));
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complexes::{canonical_sdr, evolution_form, Complex};
    use crate::exactlin::matrix::rat_mat;
    use crate::exactlin::series::coeff_map;
    use crate::exactlin::{int, GradedSpace, Mat, MultiOp, Ring};

    /// `Qa = b`, `Qc = d`, `Da = c`, `Db = -d`, plus a cohomology class `e`.
    fn square() -> (Sdr<Rational>, GradedMap<Rational>) {
        let v = GradedSpace::new(["a", "b", "c", "d", "e"].iter().map(|s| s.to_string()).collect(), vec![0, 1, 1, 0, 0]);
        let mut q = Mat::zeros(5, 5, &int(0));
        q.set(1, 0, int(1));
        q.set(3, 2, int(1));
        let mut d = Mat::zeros(5, 5, &int(0));
        d.set(2, 0, int(1));
        d.set(3, 1, int(-1));
        let q = GradedMap::new(v.clone(), v.clone(), 1, q).unwrap();
        let d = GradedMap::new(v.clone(), v.clone(), 1, d).unwrap();
        (canonical_sdr(&Complex::new(v, q).unwrap()).unwrap(), d)
    }

    fn names(k: usize) -> Vec<String> {
        (1..=k).map(|i| format!("t{}", i)).collect()
    }

    fn phi_set(sdr: &Sdr<Rational>, d: &GradedMap<Rational>) -> OperationSet<Rational> {
        let ctx = SeriesCtx::new(&["eps"], 3);
        let eps = Series::var(&ctx, 0);
        let m = lift_map(d, &ctx).scale_by(&eps);
        OperationSet::new(&sdr.v.space, &ctx, sdr.v.q.clone()).with_op(MultiOp::new(&sdr.v.space, 1, m).unwrap())
    }

    /// An odd, not necessarily closed, binary operation.
    fn with_m2(sdr: &Sdr<Rational>) -> OperationSet<Rational> {
        let v = &sdr.v.space;
        let ctx = SeriesCtx::new(&["eps"], 2);
        let eps = Series::var(&ctx, 0);
        let src = v.tensor_power(2);
        let mut m = Mat::zeros(5, 25, &Series::zero(&ctx));
        for r in 0..5 {
            for c in 0..25 {
                if (src.parity[c] + 1) % 2 == v.parity[r] && (r + 2 * c) % 3 == 0 {
                    m.set(r, c, Ring::scale(&eps, &int((r + c) as i64 % 4 - 1)));
                }
            }
        }
        let op = MultiOp::new(v, 2, GradedMap::new_unchecked(src, v.clone(), 1, m)).unwrap();
        OperationSet::new(v, &ctx, sdr.v.q.clone()).with_op(op)
    }

    fn body_in(sdr: &Sdr<Rational>, ctx: &Arc<SeriesCtx>, var: usize) -> GradedMap<Series<Rational>> {
        evolution_form_in(&sdr.proj_c(), &sdr.h, Representation::Idempotent, ctx, var).unwrap().body
    }

    #[test]
    fn y_graph_matches_the_displayed_formula() {
        let (sdr, _) = square();
        let ops = with_m2(&sdr);
        let g = DecoratedGraph::parse("(m2 L1 L2)", vec!["t3".into(), "t1".into(), "t2".into()]).unwrap();
        let amp = graph_amplitude(&g, &sdr, &ops, Representation::Idempotent).unwrap();
        let ctx = amp.ctx.clone();
        let pos = [0];
        let m2 = ops.ops[&2].map.map_entries(|s| s.embed(&ctx, &pos));
        let (b3, b1, b2) = (body_in(&sdr, &ctx, 1), body_in(&sdr, &ctx, 2), body_in(&sdr, &ctx, 3));
        let expect = b3.compose_unchecked(&m2).compose_unchecked(&b1.tensor(&b2));
        assert_eq!(amp.function_part(), expect);
        // all lengths zero: u = 1 gives the bare operation
        let mut at1 = amp.function_part();
        for e in 0..3 {
            at1 = at1.map_entries(|s| s.subst_var(1 + e, &int(1)));
        }
        assert_eq!(at1, m2);
    }

    #[test]
    fn three_interval_chain() {
        let (sdr, d) = square();
        let ops = phi_set(&sdr, &d);
        let g = DecoratedGraph::chain(2, names(3).into_iter().rev().collect()).unwrap();
        let amp = graph_amplitude(&g, &sdr, &ops, Representation::Idempotent).unwrap();
        let ctx = amp.ctx.clone();
        let phi = ops.ops[&1].map.map_entries(|s| s.embed(&ctx, &[0]));
        let (b3, b2, b1) = (body_in(&sdr, &ctx, 1), body_in(&sdr, &ctx, 2), body_in(&sdr, &ctx, 3));
        let expect = b3.compose_unchecked(&phi).compose_unchecked(&b2).compose_unchecked(&phi).compose_unchecked(&b1);
        assert_eq!(amp.function_part(), expect);
    }

    #[test]
    fn preamplitudes_of_y_and_chain() {
        let (sdr, d) = square();
        let ops = with_m2(&sdr);
        let g = DecoratedGraph::parse("(m2 L1 L2)", names(3)).unwrap();
        let pa = preamplitude(&g, &sdr, &ops, Representation::Idempotent).unwrap();
        let ctx = pa.ctx.clone();
        let m2 = ops.ops[&2].map.map_entries(|s| s.embed(&ctx, &[0]));
        let i = lift_map(&sdr.i, &ctx);
        let expect = lift_map(&sdr.pi, &ctx).compose_unchecked(&m2).compose_unchecked(&i.tensor(&i));
        assert_eq!(pa.form, FormOp::from_map(expect));

        let ops = phi_set(&sdr, &d);
        let g = DecoratedGraph::chain(2, names(3)).unwrap();
        let pa = preamplitude(&g, &sdr, &ops, Representation::Idempotent).unwrap();
        let ctx = pa.ctx.clone();
        let phi = FormOp::from_map(ops.ops[&1].map.map_entries(|s| s.embed(&ctx, &[0])));
        let f = evolution_form_in(&sdr.proj_c(), &sdr.h, Representation::Idempotent, &ctx, 2).unwrap();
        let mut mid = FormOp::from_map(f.body);
        mid.push(1 << 1, f.one_form);
        let expect = FormOp::from_map(lift_map(&sdr.pi, &ctx))
            .compose(&phi)
            .compose(&mid)
            .compose(&phi)
            .compose(&FormOp::from_map(lift_map(&sdr.i, &ctx)));
        assert_eq!(pa.form, expect);
        assert!(preamplitude(&g, &sdr, &ops, Representation::Truncated(3)).is_err());
    }

    #[test]
    fn zero_operations_give_zero() {
        let (sdr, _) = square();
        let ctx = SeriesCtx::new(&["eps"], 2);
        let z = MultiOp::zero(&sdr.v.space, 2, 1, &Series::zero(&ctx));
        let ops = OperationSet::new(&sdr.v.space, &ctx, sdr.v.q.clone()).with_op(z);
        let g = DecoratedGraph::parse("(m2 L1 L2)", names(3)).unwrap();
        assert!(preamplitude(&g, &sdr, &ops, Representation::Idempotent).unwrap().form.is_zero());
    }

    #[test]
    fn chains_are_closed_and_glue() {
        let (sdr, d) = square();
        let ops = phi_set(&sdr, &d);
        for mode in [Representation::Idempotent, Representation::Truncated(3)] {
            for k in 0..=3 {
                let g = DecoratedGraph::chain(k, names(k + 1)).unwrap();
                assert!(check_closeness(&g, &sdr, &ops, mode).unwrap().passed(), "k={} {:?}", k, mode);
                for e in 0..=k {
                    let r = check_gluing(&g, e, &sdr, &ops, mode).unwrap();
                    assert!(r.passed(), "k={} e={} {:?} {:?}", k, e, mode, r.failing());
                }
            }
        }
    }

    #[test]
    fn gluing_detects_a_wrong_vertex() {
        let (sdr, d) = square();
        let ops = phi_set(&sdr, &d);
        let g = DecoratedGraph::chain(1, names(2)).unwrap();
        let whole = graph_amplitude(&g, &sdr, &ops, Representation::Idempotent).unwrap();
        let cut = g.cut_edge(0).unwrap();
        let mut wrong = cut.clone();
        wrong.decorations[0] = Decoration::Op;
        let a = graph_amplitude(&cut, &sdr, &ops, Representation::Idempotent).unwrap();
        let b = graph_amplitude(&wrong, &sdr, &ops, Representation::Idempotent).unwrap();
        assert_ne!(a.form, b.form);
        assert_eq!(whole.arity, 1);
    }

    #[test]
    fn factorization_through_i_pi() {
        let (sdr, d) = square();
        let ops = phi_set(&sdr, &d);
        let g = DecoratedGraph::chain(3, names(4)).unwrap();
        for e in g.internal_edges() {
            assert!(check_factorization(&g, e, &sdr, &ops).unwrap().passed());
        }
        assert!(check_factorization(&g, 0, &sdr, &ops).is_err());
    }

    #[test]
    fn tree_factorization() {
        let (sdr, _) = square();
        let ops = with_m2(&sdr);
        for text in ["(m2 (m2 L1 L2) L3)", "(m2 L1 (m2 L2 L3))"] {
            let g = DecoratedGraph::parse(text, names(5)).unwrap();
            for e in g.internal_edges() {
                let r = check_factorization(&g, e, &sdr, &ops).unwrap();
                assert!(r.passed(), "{} {} {:?}", text, e, r.failing());
            }
        }
    }

    #[test]
    fn observable_identity_is_invisible() {
        let (sdr, _) = square();
        let v = &sdr.v.space;
        let zero_g = GradedMap::zero(v, v, 1, &int(0));
        let zero_h = GradedMap::zero(v, v, 0, &int(0));
        let id = GradedMap::identity(v, &int(0));
        let c = observable_correlator(&id, &zero_h, &zero_g, Representation::Idempotent).unwrap();
        assert_eq!(c.form, FormOp::from_map(lift_map(&id, &c.ctx)));

        let c = observable_correlator(&id, &sdr.proj_c(), &sdr.h, Representation::Idempotent).unwrap();
        let one = evolution_form(&sdr.proj_c(), &sdr.h, Representation::Idempotent).unwrap();
        // pull back exp(-tH - dt G) along t = t1 + t2
        let u = Series::<Rational>::var(&c.ctx, 0) * Series::var(&c.ctx, 1);
        let pull = |m: &GradedMap<Series<Rational>>| m.map_entries(|s| s.embed(&c.ctx, &[0]).subst_series(0, &u));
        let mut expect = FormOp::from_map(pull(&one.body));
        expect.push(1, pull(&one.one_form));
        expect.push(2, pull(&one.one_form));
        assert_eq!(c.form, expect);
    }

    #[test]
    fn closed_observable_gives_closed_correlator() {
        let (sdr, d) = square();
        let c = observable_correlator(&d, &sdr.proj_c(), &sdr.h, Representation::Idempotent).unwrap();
        assert!(c.closeness_residual(&sdr.v.q, &sdr.v.q).is_zero());
        let c = observable_correlator(&sdr.h, &sdr.proj_c(), &sdr.h, Representation::Idempotent).unwrap();
        assert!(!c.closeness_residual(&sdr.v.q, &sdr.v.q).is_zero());
    }

    fn two_dim() -> (GradedMap<Rational>, GradedMap<Rational>, GradedMap<Rational>) {
        let v = GradedSpace::from_parities(&[0, 1]);
        let q = GradedMap::new(v.clone(), v.clone(), 1, rat_mat(&[&[0, 0], &[1, 0]])).unwrap();
        let g = GradedMap::new(v.clone(), v.clone(), 1, rat_mat(&[&[0, 1], &[0, 0]])).unwrap();
        let dq = GradedMap::new(v.clone(), v.clone(), 1, rat_mat(&[&[0, 0], &[3, 0]])).unwrap();
        (q, g, dq)
    }

    #[test]
    fn deformation_trivial_cases() {
        let (q, g, dq) = two_dim();
        let v = q.source.clone();
        let h = crate::exactlin::graded::supercommutator(&q, &g).unwrap();
        let zero = GradedMap::zero(&v, &v, 1, &int(0));
        let r = deformation_response(&zero, &h, &g, 4).unwrap();
        assert!(r.pushforward.is_zero() && r.duhamel.is_zero());

        let r = deformation_response(&dq, &GradedMap::zero(&v, &v, 0, &int(0)), &zero, 4).unwrap();
        assert!(r.pushforward.is_zero());
        let t = Series::var(&r.ctx, 0);
        assert_eq!(r.duhamel, FormOp::from_map(lift_map(&dq, &r.ctx).scale_by(&t)));
    }

    #[test]
    fn deformation_first_order_agreement() {
        let (q, g, dq) = two_dim();
        let h = crate::exactlin::graded::supercommutator(&q, &g).unwrap();
        let k = crate::exactlin::graded::supercommutator(&dq, &g).unwrap();
        let n = 4;
        let r = deformation_response(&dq, &h, &g, n).unwrap();
        // finite difference in a formal parameter λ
        let ctx = SeriesCtx::new(&["t", "lam"], n + 1);
        let lam = Series::var(&ctx, 1);
        let hl = lift_map(&h, &ctx).add(&lift_map(&k, &ctx).scale_by(&lam)).unwrap();
        let body = exp_of(&hl, &Series::var(&ctx, 0), n + 1);
        for deg in 0..=n {
            let lhs = coeff_map(&body, 0, &[deg, 1]);
            let rhs = coeff_map(r.pushforward.component(0).unwrap(), 0, &[deg]);
            assert_eq!(lhs, rhs, "t^{}", deg);
        }
    }
}
