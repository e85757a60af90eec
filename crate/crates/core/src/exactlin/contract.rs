//! Tree-shaped contraction of multilinear maps.
//!
//! The traversal order is depth-first with children left to right. Inputs
//! are numbered in that order, and each operator picks up the Koszul sign
//! `(-1)^{|op|·(parity of the inputs to its left)}` through the graded
//! tensor product of its siblings.

use super::graded::{GradedMap, GradedSpace};
use super::ring::Ring;
use crate::error::{EngineError, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Wiring {
    /// An open input slot; the number is its position in the traversal order.
    Input(usize),
    /// Operator `op` (index into the operator list) fed by `children`.
    Node { op: usize, children: Vec<Wiring> },
}

impl Wiring {
    pub fn node(op: usize, children: Vec<Wiring>) -> Wiring {
        Wiring::Node { op, children }
    }

    pub fn input_count(&self) -> usize {
        match self {
            Wiring::Input(_) => 1,
            Wiring::Node { children, .. } => children.iter().map(|c| c.input_count()).sum(),
        }
    }

    fn collect(&self, inputs: &mut Vec<usize>, ops: &mut Vec<usize>) {
        match self {
            Wiring::Input(k) => inputs.push(*k),
            Wiring::Node { op, children } => {
                ops.push(*op);
                for c in children {
                    c.collect(inputs, ops);
                }
            }
        }
    }
}

/// Contracts `operators` along `wiring`. All inputs live in `input_space`.
/// The result maps `input_space^{⊗k}` to the root's target.
pub fn tensor_contract<R: Ring>(
    operators: &[GradedMap<R>],
    wiring: &Wiring,
    input_space: &GradedSpace,
) -> Result<GradedMap<R>> {
    let mut inputs = Vec::new();
    let mut ops = Vec::new();
    wiring.collect(&mut inputs, &mut ops);
    if inputs.iter().enumerate().any(|(i, &k)| i != k) {
        return Err(EngineError::Structural(format!(
            "input slots must appear once each in traversal order, found {:?}",
            inputs
        )));
    }
    let mut seen = vec![false; operators.len()];
    for &o in &ops {
        if o >= operators.len() {
            return Err(EngineError::Structural(format!("wiring references missing operator {}", o)));
        }
        if seen[o] {
            return Err(EngineError::Structural(format!("operator {} used twice", o)));
        }
        seen[o] = true;
    }
    if let Some(o) = seen.iter().position(|s| !s) {
        return Err(EngineError::Structural(format!("operator {} left dangling", o)));
    }
    let proto = operators.first().map(|o| o.proto().clone()).ok_or_else(|| {
        EngineError::Structural("no operators to contract".into())
    })?;
    eval(operators, wiring, input_space, &proto)
}

fn eval<R: Ring>(operators: &[GradedMap<R>], w: &Wiring, input_space: &GradedSpace, proto: &R) -> Result<GradedMap<R>> {
    match w {
        Wiring::Input(_) => Ok(GradedMap::identity(input_space, proto)),
        Wiring::Node { op, children } => {
            let f = &operators[*op];
            let mut acc: Option<GradedMap<R>> = None;
            for c in children {
                let m = eval(operators, c, input_space, proto)?;
                acc = Some(match acc {
                    None => m,
                    Some(a) => a.tensor(&m),
                });
            }
            let inner = acc.unwrap_or_else(|| GradedMap::identity(&GradedSpace::unit(), proto));
            if inner.target.parity != f.source.parity {
                return Err(EngineError::Structural(format!(
                    "operator {} expects a source of dim {} but receives dim {}",
                    op,
                    f.source.dim(),
                    inner.target.dim()
                )));
            }
            Ok(f.compose_unchecked(&inner))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactlin::graded::MultiOp;
    use crate::exactlin::matrix::rat_mat;
    use crate::exactlin::ring::{int, Rational};

    fn id(v: &GradedSpace) -> GradedMap<Rational> {
        GradedMap::identity(v, &int(0))
    }

    #[test]
    fn identity_chain() {
        let v = GradedSpace::from_parities(&[0, 1]);
        let w = Wiring::node(0, vec![Wiring::node(1, vec![Wiring::Input(0)])]);
        let r = tensor_contract(&[id(&v), id(&v)], &w, &v).unwrap();
        assert_eq!(r.mat, id(&v).mat);
    }

    #[test]
    fn dangling_and_reused_slots_rejected() {
        let v = GradedSpace::from_parities(&[0]);
        let w = Wiring::node(0, vec![Wiring::Input(0)]);
        assert!(tensor_contract(&[id(&v), id(&v)], &w, &v).is_err());
        let w2 = Wiring::node(0, vec![Wiring::Input(0), Wiring::Input(0)]);
        let m = GradedMap::new_unchecked(v.tensor_power(2), v.clone(), 0, rat_mat(&[&[1]]));
        assert!(tensor_contract(&[m], &w2, &v).is_err());
    }

    #[test]
    fn odd_operator_passes_odd_input() {
        // f ⊗ id applied after g: (id ⊗ f)(x⊗y) = (-1)^{|x|} x ⊗ f y
        let v = GradedSpace::from_parities(&[1, 0]);
        let f = GradedMap::new(v.clone(), v.clone(), 1, rat_mat(&[&[0, 1], &[1, 0]])).unwrap();
        let mul = GradedMap::identity(&v.tensor_power(2), &int(0));
        let w = Wiring::node(0, vec![Wiring::Input(0), Wiring::node(1, vec![Wiring::Input(1)])]);
        let r = tensor_contract(&[mul, f], &w, &v).unwrap();
        // column x0⊗x1 (x0 odd): goes to -x0⊗x0
        assert_eq!(r.mat.get(0, 1), &int(-1));
        // column x1⊗x0 (x1 even): goes to +x1⊗x1
        assert_eq!(r.mat.get(3, 2), &int(1));
        let _ = MultiOp::<Rational>::zero(&v, 1, 0, &int(0));
    }
}
