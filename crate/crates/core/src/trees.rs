//! Rooted trees with leaf labels, symmetry factors and the text form
//! `(m2 (m1 L1) L2)`.
//!
//! An internal vertex is decorated by its arity (number of children). The
//! root is the top vertex; leaves are the inputs.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{EngineError, Result};
use crate::exactlin::graded::{factorial, permutations};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RootedTree {
    /// Input leaf with a label (1-based).
    Leaf(usize),
    Vertex(Vec<RootedTree>),
}

impl RootedTree {
    pub fn leaf_count(&self) -> usize {
        match self {
            RootedTree::Leaf(_) => 1,
            RootedTree::Vertex(ch) => ch.iter().map(|c| c.leaf_count()).sum(),
        }
    }

    pub fn vertex_count(&self) -> usize {
        match self {
            RootedTree::Leaf(_) => 0,
            RootedTree::Vertex(ch) => 1 + ch.iter().map(|c| c.vertex_count()).sum::<usize>(),
        }
    }

    /// Internal edges: vertex-to-vertex edges.
    pub fn internal_edges(&self) -> usize {
        self.vertex_count().saturating_sub(1)
    }

    /// Leaf labels in depth-first order.
    pub fn leaf_labels(&self) -> Vec<usize> {
        let mut out = Vec::new();
        self.collect_labels(&mut out);
        out
    }

    fn collect_labels(&self, out: &mut Vec<usize>) {
        match self {
            RootedTree::Leaf(l) => out.push(*l),
            RootedTree::Vertex(ch) => ch.iter().for_each(|c| c.collect_labels(out)),
        }
    }

    /// Arities of the internal vertices in depth-first order.
    pub fn arities(&self) -> Vec<usize> {
        let mut out = Vec::new();
        fn go(t: &RootedTree, out: &mut Vec<usize>) {
            if let RootedTree::Vertex(ch) = t {
                out.push(ch.len());
                ch.iter().for_each(|c| go(c, out));
            }
        }
        go(self, &mut out);
        out
    }

    /// Serialization ignoring leaf labels.
    pub fn shape_key(&self) -> String {
        match self {
            RootedTree::Leaf(_) => "L".into(),
            RootedTree::Vertex(ch) => {
                let inner: Vec<String> = ch.iter().map(|c| c.shape_key()).collect();
                format!("(m{} {})", ch.len(), inner.join(" "))
            }
        }
    }

    /// Children sorted by shape (then labels); leaves renumbered 1..n in
    /// depth-first order when `relabel` is set.
    pub fn canonical(&self, relabel: bool) -> RootedTree {
        let mut t = self.sorted();
        if relabel {
            let mut k = 0;
            t.relabel_dfs(&mut k);
        }
        t
    }

    fn sorted(&self) -> RootedTree {
        match self {
            RootedTree::Leaf(l) => RootedTree::Leaf(*l),
            RootedTree::Vertex(ch) => {
                let mut c: Vec<RootedTree> = ch.iter().map(|x| x.sorted()).collect();
                c.sort_by(|a, b| (shape_rank(a), a.shape_key(), a.leaf_labels()).cmp(&(shape_rank(b), b.shape_key(), b.leaf_labels())));
                RootedTree::Vertex(c)
            }
        }
    }

    fn relabel_dfs(&mut self, k: &mut usize) {
        match self {
            RootedTree::Leaf(l) => {
                *k += 1;
                *l = *k;
            }
            RootedTree::Vertex(ch) => ch.iter_mut().for_each(|c| c.relabel_dfs(k)),
        }
    }

    pub fn with_labels(&self, labels: &[usize]) -> RootedTree {
        let mut it = labels.iter();
        fn go(t: &RootedTree, it: &mut std::slice::Iter<usize>) -> RootedTree {
            match t {
                RootedTree::Leaf(_) => RootedTree::Leaf(*it.next().expect("enough labels")),
                RootedTree::Vertex(ch) => RootedTree::Vertex(ch.iter().map(|c| go(c, it)).collect()),
            }
        }
        go(self, &mut it)
    }

    pub fn parse(s: &str) -> Result<RootedTree> {
        let toks = tokenize(s);
        let mut pos = 0;
        let t = parse_tokens(&toks, &mut pos)?;
        if pos != toks.len() {
            return Err(EngineError::Structural(format!("trailing input in tree '{}'", s)));
        }
        Ok(t)
    }
}

fn shape_rank(t: &RootedTree) -> (usize, usize) {
    (t.vertex_count(), t.leaf_count())
}

impl fmt::Display for RootedTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RootedTree::Leaf(l) => write!(f, "L{}", l),
            RootedTree::Vertex(ch) => {
                write!(f, "(m{}", ch.len())?;
                for c in ch {
                    write!(f, " {}", c)?;
                }
                write!(f, ")")
            }
        }
    }
}

fn tokenize(s: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    for ch in s.chars() {
        match ch {
            '(' | ')' => {
                if !cur.is_empty() {
                    out.push(std::mem::take(&mut cur));
                }
                out.push(ch.to_string());
            }
            c if c.is_whitespace() => {
                if !cur.is_empty() {
                    out.push(std::mem::take(&mut cur));
                }
            }
            c => cur.push(c),
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

fn parse_tokens(t: &[String], pos: &mut usize) -> Result<RootedTree> {
    let bad = |m: &str| EngineError::Structural(format!("tree syntax: {}", m));
    let tok = t.get(*pos).ok_or_else(|| bad("unexpected end"))?;
    *pos += 1;
    if tok == "(" {
        let head = t.get(*pos).ok_or_else(|| bad("missing operation tag"))?;
        *pos += 1;
        let arity: usize = head.strip_prefix('m').and_then(|a| a.parse().ok()).ok_or_else(|| bad(&format!("bad tag '{}'", head)))?;
        let mut ch = Vec::new();
        while t.get(*pos).map(|s| s.as_str()) != Some(")") {
            ch.push(parse_tokens(t, pos)?);
        }
        *pos += 1;
        if ch.len() != arity {
            return Err(bad(&format!("m{} has {} children", arity, ch.len())));
        }
        Ok(RootedTree::Vertex(ch))
    } else if let Some(l) = tok.strip_prefix('L') {
        Ok(RootedTree::Leaf(l.parse().map_err(|_| bad(&format!("bad leaf '{}'", tok)))?))
    } else {
        Err(bad(&format!("unexpected token '{}'", tok)))
    }
}

/// Order of the automorphism group fixing the root, acting on unlabeled leaves.
pub fn automorphism_order(t: &RootedTree) -> u64 {
    match t {
        RootedTree::Leaf(_) => 1,
        RootedTree::Vertex(ch) => {
            let mut groups: BTreeMap<String, u64> = BTreeMap::new();
            let mut prod = 1u64;
            for c in ch {
                *groups.entry(c.canonical(true).shape_key()).or_insert(0) += 1;
                prod *= automorphism_order(c);
            }
            for m in groups.values() {
                prod *= factorial(*m as usize);
            }
            prod
        }
    }
}

/// A tree together with its symmetry data.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeWeight {
    pub tree: RootedTree,
    pub n_gamma: u64,
    /// `(-1)^{n_e}`
    pub sign: i8,
}

impl TreeWeight {
    pub fn of(tree: &RootedTree) -> TreeWeight {
        let sign = if tree.internal_edges() % 2 == 0 { 1 } else { -1 };
        TreeWeight { tree: tree.clone(), n_gamma: automorphism_order(tree), sign }
    }
}

/// All isomorphism classes of trees with `n_leaves` leaves, at least one
/// internal vertex, vertex arities from `arities`, and at most
/// `max_vertices` internal vertices. Leaves are labeled 1..n depth-first.
pub fn enumerate_trees(n_leaves: usize, arities: &[usize], max_vertices: Option<usize>) -> Result<Vec<RootedTree>> {
    if n_leaves == 0 {
        return Err(EngineError::Precondition("trees need at least one leaf".into()));
    }
    if arities.contains(&0) {
        return Err(EngineError::Precondition("arity 0 vertices are not supported".into()));
    }
    let maxv = match max_vertices {
        Some(m) => m,
        None if arities.contains(&1) => {
            return Err(EngineError::Precondition("arity 1 vertices need an explicit vertex bound".into()))
        }
        None => n_leaves.saturating_sub(1).max(1),
    };
    let ar: BTreeSet<usize> = arities.iter().copied().collect();
    let mut memo: BTreeMap<(usize, usize), Vec<RootedTree>> = BTreeMap::new();
    let mut out = Vec::new();
    for v in 1..=maxv {
        out.extend(shapes(n_leaves, v, &ar, &mut memo));
    }
    Ok(out.into_iter().map(|t| t.canonical(true)).collect())
}

fn shapes(n: usize, v: usize, ar: &BTreeSet<usize>, memo: &mut BTreeMap<(usize, usize), Vec<RootedTree>>) -> Vec<RootedTree> {
    if let Some(r) = memo.get(&(n, v)) {
        return r.clone();
    }
    let res = if v == 0 {
        if n == 1 {
            vec![RootedTree::Leaf(0)]
        } else {
            vec![]
        }
    } else {
        // candidate children: every (n', v') with n' ≤ n, v' ≤ v-1
        let mut cands = Vec::new();
        for vv in 0..v {
            for nn in 1..=n {
                cands.extend(shapes(nn, vv, ar, memo));
            }
        }
        let mut found = Vec::new();
        for &k in ar {
            let mut pick = Vec::new();
            choose(&cands, k, 0, n, v - 1, &mut pick, &mut found);
        }
        let mut keys = BTreeSet::new();
        let mut uniq = Vec::new();
        for t in found {
            let c = t.canonical(false);
            if keys.insert(c.shape_key()) {
                uniq.push(c);
            }
        }
        uniq.sort_by_key(|t| t.shape_key());
        uniq
    };
    memo.insert((n, v), res.clone());
    res
}

fn choose(
    cands: &[RootedTree],
    k: usize,
    start: usize,
    n_left: usize,
    v_left: usize,
    pick: &mut Vec<usize>,
    out: &mut Vec<RootedTree>,
) {
    if pick.len() == k {
        if n_left == 0 && v_left == 0 {
            out.push(RootedTree::Vertex(pick.iter().map(|&i| cands[i].clone()).collect()));
        }
        return;
    }
    for i in start..cands.len() {
        let c = &cands[i];
        let (cn, cv) = (c.leaf_count(), c.vertex_count());
        if cn <= n_left && cv <= v_left {
            pick.push(i);
            choose(cands, k, i, n_left - cn, v_left - cv, pick, out);
            pick.pop();
        }
    }
}

/// All distinct leaf-labelings of a shape.
pub fn labelings(shape: &RootedTree) -> Vec<RootedTree> {
    let n = shape.leaf_count();
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for p in permutations(n) {
        let labels: Vec<usize> = p.iter().map(|x| x + 1).collect();
        let t = shape.with_labels(&labels).canonical(false);
        if seen.insert(t.clone()) {
            out.push(t);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn y_tree_unique() {
        let t = enumerate_trees(2, &[2], None).unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!(t[0].to_string(), "(m2 L1 L2)");
    }

    #[test]
    fn three_leaf_binary() {
        let t = enumerate_trees(3, &[2], None).unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!(t[0].vertex_count(), 2);
        assert_eq!(labelings(&t[0]).len(), 3);
    }

    #[test]
    fn chains() {
        let t = enumerate_trees(1, &[1], Some(3)).unwrap();
        let s: Vec<String> = t.iter().map(|x| x.to_string()).collect();
        assert_eq!(s, vec!["(m1 L1)", "(m1 (m1 L1))", "(m1 (m1 (m1 L1)))"]);
        assert!(enumerate_trees(1, &[1], None).is_err());
        assert!(t.iter().all(|x| automorphism_order(x) == 1));
    }

    #[test]
    fn automorphisms() {
        let y = RootedTree::parse("(m2 L1 L2)").unwrap();
        assert_eq!(automorphism_order(&y), 2);
        let b = RootedTree::parse("(m2 (m2 L1 L2) (m2 L3 L4))").unwrap();
        assert_eq!(automorphism_order(&b), 8);
    }

    #[test]
    fn parse_roundtrip_and_errors() {
        let s = "(m2 (m1 L1) L2)";
        assert_eq!(RootedTree::parse(s).unwrap().to_string(), s);
        assert!(RootedTree::parse("(m3 L1 L2)").is_err());
        assert!(RootedTree::parse("(m2 L1 L2").is_err());
    }
}
