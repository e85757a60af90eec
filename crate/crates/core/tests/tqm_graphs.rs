mod common;

use tqft_algebra::complexes::Representation;
use tqft_algebra::tqm::*;

fn names(k: usize) -> Vec<String> {
    (1..=k).map(|i| format!("t{}", i)).collect()
}

#[test]
fn binary_trees_are_closed_and_glue() {
    let mut r = common::rng(11);
    let (ops, sdr) = common::random_dgla_with(common::Lie::Affine, &mut r, 2);
    for (text, k) in [("(m2 L1 L2)", 3), ("(m2 (m2 L1 L2) L3)", 5), ("(m2 L1 (m2 L2 L3))", 5)] {
        let g = DecoratedGraph::parse(text, names(k)).unwrap();
        let rep = check_closeness(&g, &sdr, &ops, Representation::Idempotent).unwrap();
        assert!(rep.passed(), "{} {:?}", text, rep.failing());
        for e in 0..k {
            assert!(check_gluing(&g, e, &sdr, &ops, Representation::Idempotent).unwrap().passed(), "{} cut {}", text, e);
        }
        for e in g.internal_edges() {
            assert!(check_factorization(&g, e, &sdr, &ops).unwrap().passed());
        }
    }
}

#[test]
fn identity_vertices_parse() {
    let g = DecoratedGraph::parse("(m2 (id L1) L2)", names(4)).unwrap();
    assert_eq!(g.decorations, vec![Decoration::Op, Decoration::Identity, Decoration::Input, Decoration::Input]);
    assert!(DecoratedGraph::parse("(m2 L1 L2)", vec!["a".into(), "a".into(), "b".into()]).is_err());
    assert!(DecoratedGraph::parse("(m2 L1 L2)", names(2)).is_err());
}
