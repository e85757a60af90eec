//! Tree-level BCOV: the tree sum with edge operator `-G G₋` as a formal
//! vector field on `W`, its second derivatives and the Oriented
//! Associativity residual.
//!
//! Coordinates `T^a` on `W` are ordinary commuting series variables, so `W`
//! must be purely even.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::commutativity::{classify_mode, CommFamily, HodgeData};
use crate::complexes::validate_sdr;
use crate::error::{EngineError, Result};
use crate::exactlin::graded::supercommutator;
use crate::exactlin::{GradedMap, Mat, MultiOp, Rational, Ring, Scalar, Series, SeriesCtx};
use crate::report::{Check, Report};
use crate::trees::{automorphism_order, enumerate_trees, RootedTree};

#[derive(Clone, Debug)]
pub struct BcovData<C: Scalar> {
    pub hodge: HodgeData<C>,
    /// Even product `B ⊗ B → B`.
    pub product: GradedMap<C>,
}

/// Sparse view of the product: `(out, left, right, coefficient)`.
fn product_entries<C: Scalar>(m: &GradedMap<C>, dim: usize) -> Vec<(usize, usize, usize, C)> {
    m.mat.nonzero_entries().into_iter().map(|(r, c, v)| (r, c / dim, c % dim, v)).collect()
}

impl<C: Scalar> BcovData<C> {
    pub fn dim(&self) -> usize {
        self.hodge.space().dim()
    }

    /// Left multiplication by the basis vector `a`.
    pub fn left_mult(&self, a: usize) -> Mat<C> {
        let n = self.dim();
        let mut out = Mat::zeros(n, n, &C::zero_s());
        for b in 0..n {
            for r in 0..n {
                let v = self.product.mat.get(r, a * n + b);
                if !v.is_zero() {
                    out.set(r, b, v.clone());
                }
            }
        }
        out
    }

    /// Left multiplication by a series-valued vector.
    pub fn mult_by(&self, z: &[Series<C>]) -> GradedMap<Series<C>> {
        let n = self.dim();
        let zero = z[0].zero_like();
        let mut out = Mat::zeros(n, n, &zero);
        for (r, a, b, c) in product_entries(&self.product, n) {
            if !z[a].is_zero() {
                out.add_at(r, b, z[a].scale_by_scalar(&c));
            }
        }
        let v = self.hodge.space();
        GradedMap::new_unchecked(v.clone(), v.clone(), 0, out)
    }
}

type SparseVec<C> = BTreeMap<usize, C>;

fn axpy<C: Scalar>(acc: &mut SparseVec<C>, c: &C, x: &SparseVec<C>) {
    for (k, v) in x {
        let e = acc.entry(*k).or_insert_with(C::zero_s);
        *e = e.clone() + c.clone() * v.clone();
        if e.is_zero() {
            acc.remove(k);
        }
    }
}

/// Sparse product table and operator columns for basis-level identities.
struct Sparse<C: Scalar> {
    n: usize,
    table: Vec<SparseVec<C>>,
}

impl<C: Scalar> Sparse<C> {
    fn new(m: &GradedMap<C>, n: usize) -> Self {
        let mut table = vec![SparseVec::new(); n * n];
        for (r, c, v) in m.mat.nonzero_entries() {
            table[c].insert(r, v);
        }
        Sparse { n, table }
    }

    fn mul(&self, x: &SparseVec<C>, y: &SparseVec<C>) -> SparseVec<C> {
        let mut out = SparseVec::new();
        for (a, ca) in x {
            for (b, cb) in y {
                axpy(&mut out, &(ca.clone() * cb.clone()), &self.table[a * self.n + b]);
            }
        }
        out
    }
}

fn basis_vec<C: Scalar>(a: usize) -> SparseVec<C> {
    BTreeMap::from([(a, C::one_s())])
}

fn apply_sparse<C: Scalar>(cols: &[SparseVec<C>], x: &SparseVec<C>) -> SparseVec<C> {
    let mut out = SparseVec::new();
    for (k, c) in x {
        axpy(&mut out, c, &cols[*k]);
    }
    out
}

fn columns<C: Scalar>(m: &Mat<C>) -> Vec<SparseVec<C>> {
    let mut cols = vec![SparseVec::new(); m.cols];
    for (r, c, v) in m.nonzero_entries() {
        cols[c].insert(r, v);
    }
    cols
}

fn sub_sparse<C: Scalar>(x: &SparseVec<C>, y: &SparseVec<C>) -> SparseVec<C> {
    let mut out = x.clone();
    axpy(&mut out, &(-C::one_s()), y);
    out
}

fn signed<C: Scalar>(x: SparseVec<C>, odd: bool) -> SparseVec<C> {
    if odd {
        x.into_iter().map(|(k, v)| (k, -v)).collect()
    } else {
        x
    }
}

fn push_residual<C: Scalar>(res: &mut Vec<(usize, usize, String)>, col: usize, x: &SparseVec<C>) {
    for (r, v) in x {
        res.push((*r, col, v.render()));
    }
}

/// Product identities, contraction identities, the `G₋` conditions and the
/// second-order test on basis triples. Triple-based checks run over the
/// window, if any; residual columns index `(a·n + b)·n + c`.
pub fn validate_bcov<C: Scalar>(d: &BcovData<C>) -> Result<Report> {
    let h = &d.hodge;
    let v = h.space();
    let n = v.dim();
    if d.product.source != v.tensor(v) || d.product.target != *v || d.product.parity != 0 {
        return Err(EngineError::Structural("product must be an even map B⊗B → B".into()));
    }
    if let Some((r, c)) = d.product.parity_violation() {
        return Err(EngineError::Parity(format!("product entry ({},{}) breaks the parity rule", r, c)));
    }
    let mut rep = Report::new();
    let m = MultiOp::new(v, 2, d.product.clone())?;
    rep.equal("m supercommutative", &m.map.mat, &m.permute_inputs(&[1, 0]).map.mat);

    let sp = Sparse::new(&d.product, n);
    let q = columns(&h.complex.q.mat);
    let gm = columns(&h.g_minus.mat);
    let trusted: Vec<usize> = h.window.clone().unwrap_or_else(|| (0..n).collect());
    let odd = |a: usize| v.parity[a] == 1;

    let mut assoc = Vec::new();
    let mut deriv = Vec::new();
    for &a in &trusted {
        let ea = basis_vec::<C>(a);
        for &b in &trusted {
            let eb = basis_vec::<C>(b);
            let ab = sp.mul(&ea, &eb);
            // Q(ab) = Q(a)b + (-1)^{|a|} aQ(b)
            let lhs = apply_sparse(&q, &ab);
            let rhs = sp.mul(&q[a], &eb);
            let mut rhs2 = rhs.clone();
            axpy(&mut rhs2, &C::one_s(), &signed(sp.mul(&ea, &q[b]), odd(a)));
            push_residual(&mut deriv, a * n + b, &sub_sparse(&lhs, &rhs2));
            for &c in &trusted {
                let ec = basis_vec::<C>(c);
                let r = sub_sparse(&sp.mul(&ab, &ec), &sp.mul(&ea, &sp.mul(&eb, &ec)));
                push_residual(&mut assoc, (a * n + b) * n + c, &r);
            }
        }
    }
    rep.checks.push(Check { name: "m associative".into(), residual: assoc, note: None });
    rep.checks.push(Check { name: "Q derivation".into(), residual: deriv, note: None });

    for c in validate_sdr(&h.sdr())?.checks {
        if c.name == "Q_r^2 = 0" {
            continue;
        }
        let mut c = c;
        c.name = c.name.replace('h', "G").replace("i Q_r", "0").replace("Q_r pi", "0");
        rep.checks.push(c);
    }
    let gmm = &h.g_minus;
    rep.map_residual("G-^2 = 0", &gmm.compose_unchecked(gmm));
    rep.map_residual("{Q,G-} = 0", &supercommutator(&h.complex.q, gmm)?);
    rep.map_residual("{G,G-} = 0", &supercommutator(&h.g, gmm)?);
    rep.map_residual("G- i = 0", &gmm.compose_unchecked(&h.i_w));

    // Φ_a(b) = G₋(ab) - G₋(a)b - (-1)^{|a|} aG₋(b) must be a derivation in b
    let phi = |a: usize, x: &SparseVec<C>| -> SparseVec<C> {
        let ea = basis_vec::<C>(a);
        let mut out = apply_sparse(&gm, &sp.mul(&ea, x));
        axpy(&mut out, &(-C::one_s()), &sp.mul(&gm[a], x));
        axpy(&mut out, &(-C::one_s()), &signed(sp.mul(&ea, &apply_sparse(&gm, x)), odd(a)));
        out
    };
    let mut second = Vec::new();
    for &a in &trusted {
        for &b in &trusted {
            let eb = basis_vec::<C>(b);
            let pb = phi(a, &eb);
            for &c in &trusted {
                let ec = basis_vec::<C>(c);
                let lhs = phi(a, &sp.mul(&eb, &ec));
                let mut rhs = sp.mul(&pb, &ec);
                let sign_odd = !odd(a) && odd(b);
                axpy(&mut rhs, &C::one_s(), &signed(sp.mul(&eb, &phi(a, &ec)), sign_odd));
                push_residual(&mut second, (a * n + b) * n + c, &sub_sparse(&lhs, &rhs));
            }
        }
    }
    rep.checks.push(Check { name: "G- second order".into(), residual: second, note: None });
    Ok(rep)
}

/// `v^a(T)`, components in the basis of `W`.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField<C: Scalar> {
    pub ctx: Arc<SeriesCtx>,
    pub components: Vec<Series<C>>,
}

fn apply<C: Scalar>(m: &Mat<C>, v: &[Series<C>]) -> Vec<Series<C>> {
    let zero = v[0].zero_like();
    let mut out = vec![zero; m.rows];
    for (r, c, x) in m.nonzero_entries() {
        if !v[c].is_zero() {
            out[r] = out[r].clone() + v[c].scale_by_scalar(&x);
        }
    }
    out
}

fn multiply<C: Scalar>(prod: &[(usize, usize, usize, C)], n: usize, a: &[Series<C>], b: &[Series<C>]) -> Vec<Series<C>> {
    let zero = a[0].zero_like();
    let mut out = vec![zero; n];
    for (r, i, j, c) in prod {
        if a[*i].is_zero() || b[*j].is_zero() {
            continue;
        }
        out[*r] = out[*r].clone() + (&a[*i] * &b[*j]).scale_by_scalar(c);
    }
    out
}

struct TreeEval<C: Scalar> {
    prod: Vec<(usize, usize, usize, C)>,
    edge: Mat<C>,
    leaf: Vec<Series<C>>,
    n: usize,
}

impl<C: Scalar> TreeEval<C> {
    fn new(d: &BcovData<C>, ctx: &Arc<SeriesCtx>) -> Result<TreeEval<C>> {
        let h = &d.hodge;
        if h.w.parity.iter().any(|&p| p == 1) {
            return Err(EngineError::Precondition("coordinates on W are even; W must be purely even".into()));
        }
        let n = d.dim();
        let edge = -(h.g.mat.matmul(&h.g_minus.mat));
        let t: Vec<Series<C>> = (0..h.w.dim()).map(|a| Series::var(ctx, a)).collect();
        let leaf = apply(&h.i_w.mat, &t);
        Ok(TreeEval { prod: product_entries(&d.product, n), edge, leaf, n })
    }

    /// Value of the subtree just below its outgoing edge operator.
    fn vertex(&self, t: &RootedTree) -> Vec<Series<C>> {
        match t {
            RootedTree::Leaf(_) => self.leaf.clone(),
            RootedTree::Vertex(ch) => {
                let vals: Vec<Vec<Series<C>>> = ch.iter().map(|c| self.edge_value(c)).collect();
                multiply(&self.prod, self.n, &vals[0], &vals[1])
            }
        }
    }

    fn edge_value(&self, t: &RootedTree) -> Vec<Series<C>> {
        match t {
            RootedTree::Leaf(_) => self.leaf.clone(),
            _ => apply(&self.edge, &self.vertex(t)),
        }
    }

    /// `Σ_γ (1/n_γ) (value at the root vertex)` over binary shapes with
    /// `2..=max` leaves; `with_edge` applies the edge operator at the root.
    fn sum(&self, max: u32, with_edge: bool) -> Result<Vec<Series<C>>> {
        let mut acc = vec![self.leaf[0].zero_like(); self.n];
        for k in 2..=max as usize {
            for shape in enumerate_trees(k, &[2], None)? {
                let w = Rational::new(1.into(), automorphism_order(&shape).into());
                let val = if with_edge { self.edge_value(&shape) } else { self.vertex(&shape) };
                for (a, v) in acc.iter_mut().zip(val) {
                    *a = a.clone() + Ring::scale(&v, &w);
                }
            }
        }
        Ok(acc)
    }
}

fn coordinate_ctx(mu: usize, order: u32) -> Arc<SeriesCtx> {
    let names: Vec<String> = (1..=mu).map(|a| format!("T{}", a)).collect();
    let refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
    SeriesCtx::new(&refs, order)
}

/// Sum over binary trees with `m` at the vertices, `-G G₋` on internal
/// edges, `i_W` at the leaves and `π_W` at the root, weighted by `1/n_γ`.
pub fn bcov_vector_field<C: Scalar>(d: &BcovData<C>, max_order: u32) -> Result<VectorField<C>> {
    let ctx = coordinate_ctx(d.hodge.w.dim(), max_order);
    let ev = TreeEval::new(d, &ctx)?;
    let root = ev.sum(max_order, false)?;
    Ok(VectorField { components: apply(&d.hodge.pi_w.mat, &root), ctx })
}

/// `f[a][b][c] = ∂²v^a/∂T^b∂T^c`.
#[derive(Clone, Debug, PartialEq)]
pub struct StructureConstants<C: Scalar> {
    pub f: Vec<Vec<Vec<Series<C>>>>,
}

impl<C: Scalar> StructureConstants<C> {
    pub fn dim(&self) -> usize {
        self.f.len()
    }

    /// The constant part as matrices `(f_b)^a_c`.
    pub fn at_zero(&self) -> Vec<Mat<C>> {
        let mu = self.dim();
        (0..mu)
            .map(|b| {
                let mut m = Mat::zeros(mu, mu, &C::zero_s());
                for a in 0..mu {
                    for c in 0..mu {
                        m.set(a, c, self.f[a][b][c].constant_term());
                    }
                }
                m
            })
            .collect()
    }
}

pub fn structure_constants<C: Scalar>(v: &VectorField<C>) -> StructureConstants<C> {
    let mu = v.components.len();
    let f = (0..mu)
        .map(|a| (0..mu).map(|b| (0..mu).map(|c| v.components[a].diff(b).diff(c)).collect()).collect())
        .collect();
    StructureConstants { f }
}

/// `Σ_a f^a_bc f^e_ad - Σ_a f^a_cd f^e_ba` through T-order `order`; row `e`,
/// column `(b·μ + c)·μ + d`.
pub fn oa_residual<C: Scalar>(f: &StructureConstants<C>, order: u32) -> Mat<Series<C>> {
    let mu = f.dim();
    let zero = f.f[0][0][0].zero_like();
    let mut out = Mat::zeros(mu, mu * mu * mu, &zero);
    for b in 0..mu {
        for c in 0..mu {
            for d in 0..mu {
                for e in 0..mu {
                    let mut s = zero.clone();
                    for a in 0..mu {
                        s = s + &f.f[a][b][c] * &f.f[e][a][d] - &f.f[a][c][d] * &f.f[e][b][a];
                    }
                    out.set(e, (b * mu + c) * mu + d, s.truncate(order));
                }
            }
        }
    }
    out
}

pub fn check_oa<C: Scalar>(f: &StructureConstants<C>, order: u32) -> Report {
    let mut rep = Report::new();
    rep.residual("oriented associativity", &oa_residual(f, order));
    rep
}

/// `∂_b(ηv)_c = ∂_c(ηv)_b` through `order`.
pub fn check_potentiality<C: Scalar>(v: &VectorField<C>, eta: &Mat<C>, order: u32) -> Report {
    let mu = v.components.len();
    let lowered = apply(eta, &v.components);
    let zero = v.components[0].zero_like();
    let mut out = Mat::zeros(mu, mu, &zero);
    for b in 0..mu {
        for c in 0..mu {
            out.set(b, c, (lowered[c].diff(b) - lowered[b].diff(c)).truncate(order));
        }
    }
    let mut rep = Report::new();
    rep.residual("potential exists", &out);
    rep
}

/// Multiplication by the edge value `Z(T) = i_W T + Σ_γ (1/n_γ)(-G G₋)(γ)`:
/// the line from a distinguished leaf to the root with subtrees grafted on.
/// The series context has order `order`; the mode is `Simplified` when the
/// simplified equations already hold, `Full` otherwise.
pub fn leaf_to_root_family<C: Scalar>(d: &BcovData<C>, order: u32) -> Result<CommFamily<C>> {
    let u = d.mult_by(&edge_value(d, order)?);
    let mode = classify_mode(&d.hodge, &u, order)?;
    Ok(CommFamily::new(u, mode))
}

/// `Z(T)` as a vector of series in the basis of `B`.
pub fn edge_value<C: Scalar>(d: &BcovData<C>, order: u32) -> Result<Vec<Series<C>>> {
    let ctx = coordinate_ctx(d.hodge.w.dim(), order);
    let ev = TreeEval::new(d, &ctx)?;
    let sub = ev.sum(order, true)?;
    Ok(ev.leaf.iter().zip(sub).map(|(a, b)| a.clone() + b).collect())
}

/// Grafting into the other slot of the product; equal to
/// [`leaf_to_root_family`] when `m` is supercommutative (`Z` is even).
pub fn right_grafted_family<C: Scalar>(d: &BcovData<C>, order: u32) -> Result<CommFamily<C>> {
    let z = edge_value(d, order)?;
    let n = d.dim();
    let ctx = z[0].ctx.clone();
    let mut out = Mat::zeros(n, n, &Series::zero(&ctx));
    for (r, a, b, c) in product_entries(&d.product, n) {
        if !z[b].is_zero() {
            out.add_at(r, a, z[b].scale_by_scalar(&c));
        }
    }
    let v = d.hodge.space();
    let u = GradedMap::new_unchecked(v.clone(), v.clone(), 0, out);
    let mode = classify_mode(&d.hodge, &u, order)?;
    Ok(CommFamily::new(u, mode))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::commutativity::FamilyMode;
    use crate::complexes::Complex;
    use crate::exactlin::{int, rat, GradedSpace};
    use crate::models::PolyvectorModel;

    /// `ℚ[x]/(x^k)` with zero differentials and `W = B`.
    fn truncated_polynomials(k: usize) -> BcovData<Rational> {
        let v = GradedSpace::from_parities(&vec![0; k]);
        let mut m = Mat::zeros(k, k * k, &int(0));
        for a in 0..k {
            for b in 0..k {
                if a + b < k {
                    m.set(a + b, a * k + b, int(1));
                }
            }
        }
        let zero = GradedMap::zero(&v, &v, 1, &int(0));
        let id = GradedMap::identity(&v, &int(0));
        BcovData {
            hodge: HodgeData {
                complex: Complex::trivial(&v, &int(0)),
                g: zero.clone(),
                g_minus: zero,
                i_w: id.clone(),
                pi_w: id,
                w: v.clone(),
                window: None,
            },
            product: GradedMap::new(v.tensor(&v), v, 0, m).unwrap(),
        }
    }

    /// Polyvector model with arbitrary odd `G` and `G₋`, so that the edge
    /// operator is nonzero on products.
    fn scrambled() -> BcovData<Rational> {
        let m = PolyvectorModel::monomial(3, 7).unwrap();
        let mut d = m.bcov(None);
        let n = d.dim();
        let (ne, no) = (m.even_cutoff, m.odd_cutoff);
        let mut gm = Mat::zeros(n, n, &int(0));
        let mut g = Mat::zeros(n, n, &int(0));
        for j in 0..ne {
            for k in 0..no {
                if (j + 2 * k) % 3 == 0 {
                    gm.set(ne + k, j, rat(1, (j + 1) as i64));
                }
                if (j + k) % 4 == 1 {
                    g.set(j, ne + k, int(1 + (k as i64)));
                }
            }
        }
        d.hodge.g_minus = GradedMap::new(m.space.clone(), m.space.clone(), 1, gm).unwrap();
        d.hodge.g = GradedMap::new(m.space.clone(), m.space.clone(), 1, g).unwrap();
        d
    }

    #[test]
    fn degenerate_data_passes() {
        let d = truncated_polynomials(3);
        let rep = validate_bcov(&d).unwrap();
        assert!(rep.passed(), "{:?}", rep.failing());
        let v = bcov_vector_field(&d, 4).unwrap();
        // v = ½ T·T in ℚ[x]/(x³)
        assert_eq!(v.components[0].coeff(0, &[2, 0, 0]), rat(1, 2));
        assert_eq!(v.components[1].coeff(0, &[1, 1, 0]), int(1));
        assert_eq!(v.components[2].coeff(0, &[0, 2, 0]), rat(1, 2));
        assert_eq!(v.components[2].coeff(0, &[1, 0, 1]), int(1));
        assert!(check_oa(&structure_constants(&v), 2).passed());
    }

    #[test]
    fn zero_product_gives_zero_field() {
        let mut d = truncated_polynomials(2);
        d.product = GradedMap::zero(&d.product.source, &d.product.target, 0, &int(0));
        let v = bcov_vector_field(&d, 4).unwrap();
        assert!(v.components.iter().all(|s| s.is_zero()));
    }

    #[test]
    fn quadratic_term_is_half_the_product() {
        let m = PolyvectorModel::monomial(4, 10).unwrap();
        let d = m.bcov(None);
        let v = bcov_vector_field(&d, 2).unwrap();
        // W = ℚ[x]/(x³): ½(T1 + T2 x + T3 x²)²
        assert_eq!(v.components[0].coeff(0, &[2, 0, 0]), rat(1, 2));
        assert_eq!(v.components[1].coeff(0, &[1, 1, 0]), int(1));
        assert_eq!(v.components[2].coeff(0, &[0, 2, 0]), rat(1, 2));
        assert_eq!(v.components[2].coeff(0, &[1, 0, 1]), int(1));
    }

    #[test]
    fn tree_sum_solves_the_fixed_point_equation() {
        // Z = i T + ½ P m(Z, Z) with P = -G G₋
        let d = scrambled();
        let order = 5;
        let z = edge_value(&d, order).unwrap();
        let ctx = z[0].ctx.clone();
        let ev = TreeEval::new(&d, &ctx).unwrap();
        let mut w = ev.leaf.clone();
        for _ in 0..order {
            let p = apply(&ev.edge, &multiply(&ev.prod, ev.n, &w, &w));
            w = ev.leaf.iter().zip(p).map(|(a, b)| a.clone() + Ring::scale(&b, &rat(1, 2))).collect();
        }
        assert!(z.iter().any(|s| s.max_degree().unwrap_or(0) >= 3));
        assert_eq!(z, w);
    }

    #[test]
    fn marked_leaf_sum_is_the_first_derivative() {
        let d = scrambled();
        let order = 5;
        let v = bcov_vector_field(&d, order).unwrap();
        let fam = leaf_to_root_family(&d, order).unwrap();
        let p = crate::commutativity::potential(&d.hodge, &fam);
        for a in 0..d.hodge.w.dim() {
            for c in 0..d.hodge.w.dim() {
                assert_eq!(p.mat.get(a, c).truncate(order - 1), v.components[a].diff(c).truncate(order - 1));
            }
        }
    }

    #[test]
    fn grafting_side_is_immaterial() {
        let d = scrambled();
        let l = leaf_to_root_family(&d, 4).unwrap();
        let r = right_grafted_family(&d, 4).unwrap();
        assert_eq!(l.u, r.u);
    }

    #[test]
    fn perturbed_constants_fail_oa() {
        let d = truncated_polynomials(3);
        let v = bcov_vector_field(&d, 3).unwrap();
        let mut f = structure_constants(&v);
        assert!(check_oa(&f, 1).passed());
        // x·x² = x breaks associativity
        f.f[1][1][2] = f.f[1][1][2].clone() + Series::constant(&v.ctx, int(1));
        assert!(!check_oa(&f, 1).passed());
    }

    #[test]
    fn cubic_model_fails_only_the_homotopy_condition() {
        let m = PolyvectorModel::monomial(3, 9).unwrap();
        let rep = validate_bcov(&m.bcov(Some(3))).unwrap();
        assert_eq!(rep.failing(), vec!["{G,G-} = 0"]);
        // the full cutoff breaks the second-order test at the boundary
        let rep = validate_bcov(&m.bcov(None)).unwrap();
        assert!(rep.failing().contains(&"G- second order"));
    }

    #[test]
    fn first_order_g_minus_passes_the_second_order_test() {
        let m = PolyvectorModel::monomial(3, 9).unwrap();
        let mut d = m.bcov(Some(3));
        // ∂_θ is a derivation
        let n = d.dim();
        let mut dth = Mat::zeros(n, n, &int(0));
        for j in 0..m.odd_cutoff {
            dth.set(j, m.even_cutoff + j, int(1));
        }
        d.hodge.g_minus = GradedMap::new(m.space.clone(), m.space.clone(), 1, dth).unwrap();
        let rep = validate_bcov(&d).unwrap();
        let failing = rep.failing();
        assert!(!failing.contains(&"G- second order"));
        assert!(failing.contains(&"{G,G-} = 0"));
    }

    #[test]
    fn milnor_model_pipeline() {
        let m = PolyvectorModel::monomial(3, 14).unwrap();
        let d = m.bcov(Some(4));
        let v = bcov_vector_field(&d, 5).unwrap();
        let f = structure_constants(&v);
        assert!(check_oa(&f, 3).passed());
        assert!(check_potentiality(&v, &m.residue_pairing().unwrap(), 4).passed());
        let fam = leaf_to_root_family(&d, 4).unwrap();
        assert_eq!(fam.mode, FamilyMode::Simplified);
        assert!(crate::commutativity::validate_comm_family(&d.hodge, &fam, 3).unwrap().passed());
    }
}
