#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tqft_algebra::complexes::{canonical_sdr, Complex, Sdr};
use tqft_algebra::exactlin::graded::supercommutator;
use tqft_algebra::exactlin::*;
use tqft_algebra::transfer::OperationSet;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn small(r: &mut ChaCha8Rng) -> Rational {
    int(r.gen_range(-2..=2))
}

/// Random even invertible matrix: unipotent lower and upper factors
/// within each parity block.
pub fn random_even_invertible(space: &GradedSpace, r: &mut ChaCha8Rng) -> Mat<Rational> {
    let n = space.dim();
    let mut lo = Mat::identity(n, &int(0));
    let mut up = Mat::identity(n, &int(0));
    for i in 0..n {
        for j in 0..n {
            if space.parity[i] != space.parity[j] {
                continue;
            }
            if i > j {
                lo.set(i, j, small(r));
            } else if i < j {
                up.set(i, j, small(r));
            }
        }
    }
    &lo * &up
}

pub fn conj(g: &Mat<Rational>, ginv: &Mat<Rational>, m: &GradedMap<Rational>) -> GradedMap<Rational> {
    GradedMap::new_unchecked(m.source.clone(), m.target.clone(), m.parity, &(g * &m.mat) * ginv)
}

pub fn random_parities(n: usize, r: &mut ChaCha8Rng) -> Vec<u8> {
    (0..n).map(|_| r.gen_range(0..2)).collect()
}

/// Random complex built from acyclic pairs `a -> b` and cohomology
/// singletons, then conjugated.
pub fn random_complex(dim: usize, r: &mut ChaCha8Rng) -> Complex<Rational> {
    let mut par = Vec::new();
    let mut pairs = Vec::new();
    while par.len() < dim {
        if par.len() + 2 <= dim && r.gen_bool(0.6) {
            let p: u8 = r.gen_range(0..2);
            pairs.push((par.len(), par.len() + 1));
            par.push(p);
            par.push(1 - p);
        } else {
            par.push(r.gen_range(0..2));
        }
    }
    let v = GradedSpace::from_parities(&par);
    let mut q = Mat::zeros(dim, dim, &int(0));
    for (a, b) in pairs {
        let c = loop {
            let c = small(r);
            if !num_traits::Zero::is_zero(&c) {
                break c;
            }
        };
        q.set(b, a, c);
    }
    let g = random_even_invertible(&v, r);
    let ginv = g.inverse().unwrap();
    let qm = GradedMap::new(v.clone(), v.clone(), 1, q).unwrap();
    Complex::new(v, conj(&g, &ginv, &qm)).unwrap()
}

pub fn random_sdr(dim: usize, r: &mut ChaCha8Rng) -> Sdr<Rational> {
    canonical_sdr(&random_complex(dim, r)).unwrap()
}

/// Random even or odd map respecting the parity rule.
pub fn random_map(space: &GradedSpace, parity: u8, r: &mut ChaCha8Rng) -> GradedMap<Rational> {
    let n = space.dim();
    let mut m = Mat::zeros(n, n, &int(0));
    for i in 0..n {
        for j in 0..n {
            if (space.parity[j] + parity) % 2 == space.parity[i] {
                m.set(i, j, small(r));
            }
        }
    }
    GradedMap::new(space.clone(), space.clone(), parity, m).unwrap()
}

/// Bicomplex `(V, Q, D)` with `D² = {Q,D} = 0`, built from zigzags
/// (`Dp = q = Qr`, `Dr = s`), squares (`Qa=b, Qc=d, Da=c, Db=-d`) and
/// singletons, conjugated by a random even matrix.
pub struct Bicomplex {
    pub complex: Complex<Rational>,
    pub d: GradedMap<Rational>,
}

pub fn random_bicomplex(max_dim: usize, r: &mut ChaCha8Rng) -> Bicomplex {
    let mut par: Vec<u8> = Vec::new();
    let mut qe: Vec<(usize, usize, i64)> = Vec::new();
    let mut de: Vec<(usize, usize, i64)> = Vec::new();
    let mut has_zigzag = false;
    loop {
        let room = max_dim - par.len();
        if room == 0 {
            break;
        }
        let choice = if !has_zigzag && room >= 4 { 0 } else { r.gen_range(0..3) };
        let b = par.len();
        match choice {
            0 if room >= 4 => {
                has_zigzag = true;
                let p: u8 = r.gen_range(0..2);
                par.extend([p, 1 - p, p, 1 - p]);
                de.push((b + 1, b, 1));
                qe.push((b + 1, b + 2, 1));
                de.push((b + 3, b + 2, 1));
            }
            1 if room >= 4 => {
                let p: u8 = r.gen_range(0..2);
                par.extend([p, 1 - p, 1 - p, p]);
                qe.push((b + 1, b, 1));
                qe.push((b + 3, b + 2, 1));
                de.push((b + 2, b, 1));
                de.push((b + 3, b + 1, -1));
            }
            _ => {
                if r.gen_bool(0.5) {
                    break;
                }
                par.push(r.gen_range(0..2));
            }
        }
    }
    let v = GradedSpace::from_parities(&par);
    let n = par.len();
    let mk = |edges: &[(usize, usize, i64)]| {
        let mut m = Mat::zeros(n, n, &int(0));
        for &(i, j, c) in edges {
            m.set(i, j, int(c));
        }
        GradedMap::new(v.clone(), v.clone(), 1, m).unwrap()
    };
    let (q, d) = (mk(&qe), mk(&de));
    let g = random_even_invertible(&v, r);
    let ginv = g.inverse().unwrap();
    Bicomplex { complex: Complex::new(v.clone(), conj(&g, &ginv, &q)).unwrap(), d: conj(&g, &ginv, &d) }
}

#[derive(Clone, Copy, Debug)]
pub enum Lie {
    /// basis `h, e, f`
    Sl2,
    /// basis `e, f`, `[e, f] = f`
    Affine,
}

impl Lie {
    fn dim(self) -> usize {
        match self {
            Lie::Sl2 => 3,
            Lie::Affine => 2,
        }
    }

    fn bracket(self, g1: usize, g2: usize) -> Option<(usize, i64)> {
        match self {
            Lie::Sl2 => match (g1, g2) {
                (0, 1) => Some((1, 2)),
                (1, 0) => Some((1, -2)),
                (0, 2) => Some((2, -2)),
                (2, 0) => Some((2, 2)),
                (1, 2) => Some((0, 1)),
                (2, 1) => Some((0, -1)),
                _ => None,
            },
            Lie::Affine => match (g1, g2) {
                (0, 1) => Some((1, 1)),
                (1, 0) => Some((1, -1)),
                _ => None,
            },
        }
    }
}

/// Shifted DGLA `g ⊗ A` with `g = sl2` and `A = Q[x]/(x²) ⊗ Λ[ξ]`,
/// `dξ = x`; conjugated by a random even matrix, with randomly shifted
/// representatives. `m_2` carries one power of ε.
pub fn random_dgla(r: &mut ChaCha8Rng, eps_order: u32) -> (OperationSet<Rational>, Sdr<Rational>) {
    random_dgla_with(Lie::Sl2, r, eps_order)
}

pub fn random_dgla_with(lie: Lie, r: &mut ChaCha8Rng, eps_order: u32) -> (OperationSet<Rational>, Sdr<Rational>) {
    let apar = [0u8, 0, 1, 1];
    let amono = [(0, 0), (1, 0), (0, 1), (1, 1)];
    let amul = |i: usize, j: usize| -> Option<(usize, i64)> {
        let (a1, b1) = amono[i];
        let (a2, b2) = amono[j];
        if a1 + a2 > 1 || b1 + b2 > 1 {
            return None;
        }
        amono.iter().position(|&p| p == (a1 + a2, b1 + b2)).map(|k| (k, 1))
    };
    let br = |g1: usize, g2: usize| lie.bracket(g1, g2);
    let ng = lie.dim();
    let n = ng * 4;
    let idx = |g: usize, a: usize| g * 4 + a;
    let par: Vec<u8> = (0..n).map(|k| (apar[k % 4] + 1) % 2).collect();
    let v = GradedSpace::from_parities(&par);
    let ctx = SeriesCtx::new(&["eps"], eps_order);
    let mut q = Mat::zeros(n, n, &int(0));
    for g in 0..ng {
        q.set(idx(g, 1), idx(g, 2), int(1));
    }
    let mut m2 = Mat::zeros(n, n * n, &int(0));
    for g1 in 0..ng {
        for a1 in 0..4 {
            for g2 in 0..ng {
                for a2 in 0..4 {
                    if let (Some((gr, s)), Some((ar, sa))) = (br(g1, g2), amul(a1, a2)) {
                        let sx = if apar[a1] == 1 { -1 } else { 1 };
                        m2.set(idx(gr, ar), idx(g1, a1) * n + idx(g2, a2), int(s * sa * sx));
                    }
                }
            }
        }
    }
    let g = random_even_invertible(&v, r);
    let ginv = g.inverse().unwrap();
    let q = &(&g * &q) * &ginv;
    let m2 = &(&g * &m2) * &ginv.kron(&ginv);
    let qm = GradedMap::new(v.clone(), v.clone(), 1, q).unwrap();
    let eps = Series::monomial(&ctx, 0, vec![1], int(1));
    let m2s = m2.map(|c| eps.scale(c));
    let op = MultiOp::new(&v, 2, GradedMap::new_unchecked(v.tensor_power(2), v.clone(), 1, m2s)).unwrap();
    let set = OperationSet::new(&v, &ctx, qm.clone()).with_op(op);
    let sdr = canonical_sdr(&Complex::new(v, qm).unwrap()).unwrap();
    (set, shift_representatives(&sdr, r))
}

/// Shifts the inclusion by an exact term: `i' = i + Q h X`, `h' = h - h X π`
/// for a random even `X: V_r -> V`. Keeps all side conditions when
/// `Q_r = 0`.
pub fn shift_representatives(sdr: &Sdr<Rational>, r: &mut ChaCha8Rng) -> Sdr<Rational> {
    let (n, m) = (sdr.v.space.dim(), sdr.vr.space.dim());
    let mut x = Mat::zeros(n, m, &int(0));
    for i in 0..n {
        for j in 0..m {
            if sdr.v.space.parity[i] == sdr.vr.space.parity[j] {
                x.set(i, j, small(r));
            }
        }
    }
    let a = &sdr.h.mat * &x;
    let mut out = sdr.clone();
    out.i.mat = &sdr.i.mat + &(&sdr.v.q.mat * &a);
    out.h.mat = &sdr.h.mat - &(&a * &sdr.pi.mat);
    out
}

/// `K(X) = hX + (-1)^{|X|} iπ X h`, a contraction of `(End V, [Q, ·])`
/// onto maps of the form `iπ X iπ`.
pub fn end_homotopy(sdr: &Sdr<Rational>, x: &GradedMap<Rational>) -> GradedMap<Rational> {
    let ip = sdr.i.compose_unchecked(&sdr.pi);
    let a = sdr.h.compose_unchecked(x);
    let b = ip.compose_unchecked(x).compose_unchecked(&sdr.h);
    if x.parity == 0 { a.add(&b).unwrap() } else { a.sub(&b).unwrap() }
}

/// MC element `φ = Σ ε^k φ_k` by lifting `φ_1 = D + [Q, Y]` order by order;
/// `None` when an obstruction `π X i ≠ 0` appears.
pub fn lift_mc(sdr: &Sdr<Rational>, d: &GradedMap<Rational>, y: &GradedMap<Rational>, order: u32) -> Option<Vec<GradedMap<Rational>>> {
    let q = &sdr.v.q;
    let phi1 = d.add(&supercommutator(q, y).unwrap()).unwrap();
    let mut phis = vec![phi1];
    for k in 2..=order as usize {
        let mut x = GradedMap::zero(&q.source, &q.target, 0, &int(0));
        for a in 1..k {
            x = x.add(&phis[a - 1].compose_unchecked(&phis[k - a - 1])).unwrap();
        }
        if !sdr.pi.compose_unchecked(&x).compose_unchecked(&sdr.i).is_zero() {
            return None;
        }
        phis.push(end_homotopy(sdr, &x).neg());
    }
    Some(phis)
}

pub struct McInstance {
    pub sdr: Sdr<Rational>,
    pub phis: Vec<GradedMap<Rational>>,
}

/// Rejection-samples bicomplexes until the lifting is unobstructed.
pub fn random_mc_instance(max_dim: usize, order: u32, r: &mut ChaCha8Rng) -> McInstance {
    loop {
        let b = random_bicomplex(max_dim, r);
        let sdr = canonical_sdr(&b.complex).unwrap();
        let y = random_map(&b.complex.space, 0, r);
        if let Some(phis) = lift_mc(&sdr, &b.d, &y, order) {
            return McInstance { sdr, phis };
        }
    }
}

/// Independent reduction of `x^m dx`: solves `z g′ + ∂W_t g + Σ c_k x^k = x^m`
/// for polynomial `g` and the class `c`, with coefficients polynomial in `z`
/// and in `t` through total degree `ord`. Returns `(k, z, t-exponents, value)`
/// for every nonzero coefficient of `c`.
pub fn brieskorn_oracle(n: usize, m: usize, ord: u32) -> Vec<(usize, i32, Vec<u32>, Rational)> {
    use std::collections::BTreeMap;
    let mu = n - 1;
    let zmax = m / mu + 2;
    let mut monos: Vec<Vec<u32>> = vec![vec![]];
    for _ in 0..mu {
        let mut next = Vec::new();
        for e in &monos {
            let used: u32 = e.iter().sum();
            for p in 0..=ord - used {
                let mut f = e.clone();
                f.push(p);
                next.push(f);
            }
        }
        monos = next;
    }
    let gdeg = m.saturating_sub(mu);
    // unknown index: g(i, l, e) then c(k, l, e)
    let mut unknowns = Vec::new();
    for i in 0..=gdeg {
        for l in 0..=zmax {
            for e in &monos {
                unknowns.push((false, i, l, e.clone()));
            }
        }
    }
    for k in 0..mu {
        for l in 0..=zmax + 1 {
            for e in &monos {
                unknowns.push((true, k, l, e.clone()));
            }
        }
    }
    let mut rows: BTreeMap<(usize, usize, Vec<u32>), usize> = BTreeMap::new();
    let mut entries: Vec<(usize, usize, Rational)> = Vec::new();
    let row_of = |rows: &mut BTreeMap<(usize, usize, Vec<u32>), usize>, key| {
        let next = rows.len();
        *rows.entry(key).or_insert(next)
    };
    for (col, (is_c, i, l, e)) in unknowns.iter().enumerate() {
        if *is_c {
            let r = row_of(&mut rows, (*i, *l, e.clone()));
            entries.push((r, col, int(1)));
            continue;
        }
        if *i >= 1 {
            let r = row_of(&mut rows, (i - 1, l + 1, e.clone()));
            entries.push((r, col, int(*i as i64)));
        }
        let r = row_of(&mut rows, (i + mu, *l, e.clone()));
        entries.push((r, col, int(n as i64)));
        // (k-1) t_k x^{k-2}, k = 2..μ
        for k in 2..=mu {
            if e.iter().sum::<u32>() < ord {
                let mut f = e.clone();
                f[k - 1] += 1;
                let r = row_of(&mut rows, (i + k - 2, *l, f));
                entries.push((r, col, int(k as i64 - 1)));
            }
        }
    }
    let target = row_of(&mut rows, (m, 0, vec![0; mu]));
    let mut a = Mat::zeros(rows.len(), unknowns.len(), &int(0));
    for (r, c, v) in entries {
        a.add_at(r, c, v);
    }
    let mut b = Mat::zeros(rows.len(), 1, &int(0));
    b.set(target, 0, int(1));
    let x = a.solve(&b).expect("oracle system is consistent");
    assert_eq!(a.rank(), unknowns.len(), "oracle solution is unique");
    unknowns
        .iter()
        .enumerate()
        .filter(|(j, u)| u.0 && !num_traits::Zero::is_zero(x.get(*j, 0)))
        .map(|(j, u)| (u.1, u.2 as i32, u.3.clone(), x.get(j, 0).clone()))
        .collect()
}
