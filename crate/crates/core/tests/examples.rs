mod common;

use common::*;
use locc_core::catalog::{build, build_spec};
use locc_core::{
    cascading_partition, partition_to_protocol, purification_check, r2_bound, rank_sum_bound,
    search_protocols, theorem5_check, theorem6_check, verify_sep, ComplexMatrix, FailureReason,
    FirstParty, Party, ProtocolClass, ProtocolNode, ProtocolTree, SearchSpec,
    SepOutcome, SeparablePovm, Tolerance,
};

fn tol() -> Tolerance {
    Tolerance::default()
}

#[test]
fn exstates_outcome_a2_b1_leaves_psi1() {
    let e = build("exstates-4x4", &[]).unwrap();
    let recs = e.tree().unwrap().simulate(&e.state_set, tol()).unwrap();
    let r = recs
        .iter()
        .find(|r| r.path == vec![(Party::A, 1), (Party::B, 0)])
        .unwrap();
    assert_eq!(r.survivors(&e.state_set, tol()), vec![0]);
    assert_eq!(r.declared, Some(0));
    assert_eq!(r.residual_ranks[0], 2);
    // P_A2 |Ψ1⟩ = |20⟩ + |31⟩ before Bob measures.
    let psi = apply_product(&ComplexMatrix::basis_projector(4, [2, 3]), &ComplexMatrix::identity(4), &amplitudes(&e.state_set.states()[0]));
    let nonzero: Vec<usize> = (0..16).filter(|&i| psi[i].norm() > 1e-12).collect();
    assert_eq!(nonzero, vec![2 * 4, 3 * 4 + 1]);
}

#[test]
fn exstates_rank_floor_three_fails_everywhere() {
    let e = build("exstates-4x4", &[]).unwrap();
    let t = e.tree().unwrap();
    let rep = t.verify_deterministic(&e.state_set, 3, tol()).unwrap();
    assert!(!rep.ok);
    assert_eq!(rep.failures.len(), 4);
    assert!(rep.failures.iter().all(|f| f.reason == FailureReason::RankTooLow));
    assert!(!t.verify_rank_preserving(&e.state_set, tol()).unwrap().ok);
}

#[test]
fn single_leaf_keeps_original_ranks() {
    let e = build("beat-schmidt-5x5", &[]).unwrap();
    let t = ProtocolTree::new(ProtocolNode::leaf(0));
    let recs = t.simulate(&e.state_set, tol()).unwrap();
    assert_eq!(recs.len(), 1);
    assert_eq!(recs[0].residual_ranks, e.state_set.schmidt_ranks(tol()));
}

#[test]
fn mixed_shift_set_outcomes() {
    let e = build("appd-5-2-mixed", &[]).unwrap();
    let recs = e.tree().unwrap().simulate(&e.state_set, tol()).unwrap();
    let at = |a, b| recs.iter().find(|r| r.path == vec![(Party::A, a), (Party::B, b)]).unwrap();
    let r = at(1, 0);
    assert_eq!(r.survivors(&e.state_set, tol()), vec![1]);
    assert_eq!(r.residual_ranks[1], 1);
    assert_eq!(at(0, 0).residual_ranks[0], 2);
}

#[test]
fn catalog_classes() {
    let cases = [
        ("exstates-4x4", ProtocolClass::P0),
        ("appc-threestates", ProtocolClass::P2),
        ("beat-schmidt-5x5", ProtocolClass::K2),
        ("block-diagonal", ProtocolClass::P0),
    ];
    for (name, class) in cases {
        let e = build(name, &[]).unwrap();
        assert_eq!(e.tree().unwrap().classify(tol()), class, "{name}");
    }
}

#[test]
fn yu_povm_floors() {
    let e = build("yu-3x3", &[]).unwrap();
    let povm = e.povm().unwrap();
    assert!(verify_sep(povm, &e.state_set, 2, tol()).unwrap().ok);
    assert!(!verify_sep(povm, &e.state_set, 3, tol()).unwrap().ok);
    let trivial = SeparablePovm::new(
        (3, 3),
        vec![SepOutcome {
            a: ComplexMatrix::identity(3),
            b: ComplexMatrix::identity(3),
            declares: 0,
        }],
    )
    .unwrap();
    let rep = verify_sep(&trivial, &e.state_set, 1, tol()).unwrap();
    assert!(rep.has(FailureReason::Ambiguous));
}

#[test]
fn yu_perturbed_povm_is_incomplete() {
    let e = build("yu-3x3", &[]).unwrap();
    let povm = e.povm().unwrap();
    assert!(povm.check_sep_complete(tol()).unwrap());
    // Scaling every element by 1 + 1e-3 moves the sum off the identity.
    let s = (1.0f64 + 1e-3).sqrt();
    let bent: Vec<SepOutcome> = povm
        .outcomes
        .iter()
        .map(|k| SepOutcome {
            a: k.a.scale(locc_core::C64::new(s, 0.0)),
            ..k.clone()
        })
        .collect();
    let bent = SeparablePovm::new((3, 3), bent).unwrap();
    assert!(!bent.check_sep_complete(tol()).unwrap());
}

#[test]
fn bound_examples() {
    let ex = build("exstates-4x4", &[]).unwrap();
    let b = rank_sum_bound(&ex.state_set, 2, false, tol()).unwrap();
    assert_eq!((b.quantity, b.bound, b.satisfied), (8.0, 8.0, true));
    let sum10 = build("sum10-3x3", &[]).unwrap();
    assert!(!rank_sum_bound(&sum10.state_set, 1, false, tol()).unwrap().satisfied);
    let ccsp = build("ccsp-4x6", &[]).unwrap();
    let r2 = r2_bound(&ccsp.state_set, tol());
    assert_eq!((r2.quantity, r2.bound, r2.satisfied), (20.0, 24.0, true));
}

#[test]
fn identified_outcome_bound_on_exstates() {
    let ex = build("exstates-4x4", &[]).unwrap();
    let a = ComplexMatrix::basis_projector(4, [2, 3]);
    let b = ComplexMatrix::basis_projector(4, [0, 1]);
    let rep = theorem5_check(&ex.state_set, &a, &b, 0, tol()).unwrap();
    assert_eq!((rep.quantity, rep.bound, rep.satisfied), (8.0, 8.0, true));
    // This outcome leaves the other state alive.
    assert!(theorem5_check(&ex.state_set, &a, &b, 1, tol()).is_err());
}

#[test]
fn first_mover_bound_on_one_way_set() {
    let e = build("one-way-full-rank", &[3, 4]).unwrap();
    let rep = theorem6_check(&e.state_set, None, 1, false, tol()).unwrap();
    assert!(rep.satisfied);
    assert!((rep.quantity - rep.bound).abs() < 1e-12);
}

#[test]
fn cascade_round_trip_on_ccsp() {
    let e = build("ccsp-4x6", &[]).unwrap();
    let p = cascading_partition(&e.state_set, FirstParty::Auto, tol());
    assert!(p.complete);
    assert_eq!(p.depth(), 3);
    let t = partition_to_protocol(&p, &e.state_set, tol()).unwrap();
    assert!(t.verify_rank_preserving(&e.state_set, tol()).unwrap().ok);
    assert_eq!(t.classify(tol()), ProtocolClass::P2);

    let ex = build("exstates-4x4", &[]).unwrap();
    let p = cascading_partition(&ex.state_set, FirstParty::Auto, tol());
    assert!(!p.complete);
    assert!(partition_to_protocol(&p, &ex.state_set, tol()).is_err());
}

#[test]
fn purification_of_identifying_outcome() {
    let ex = build("exstates-4x4", &[]).unwrap();
    let a = ComplexMatrix::basis_projector(4, [2, 3]);
    let b = ComplexMatrix::basis_projector(4, [0, 1]);
    let rep = purification_check(&ex.state_set, &a, &b, tol()).unwrap();
    assert_eq!(rep.survivors, vec![0]);
    assert!(rep.pure);
    assert_eq!(rep.residual_rank, 2);
}

#[test]
fn search_examples() {
    let ex = build("exstates-4x4", &[]).unwrap();
    let r = search_protocols(&ex.state_set, &SearchSpec::new(ProtocolClass::P0, 2, 2), tol()).unwrap();
    assert!(r.found);
    let t = r.protocol.unwrap();
    assert!(t.verify_deterministic(&ex.state_set, 2, tol()).unwrap().ok);
    assert_eq!(t.classify(tol()), ProtocolClass::P0);

    let yu = build("yu-3x3", &[]).unwrap();
    let r = search_protocols(&yu.state_set, &SearchSpec::new(ProtocolClass::P2, 2, 4), tol()).unwrap();
    assert!(!r.found && r.family_exhausted && r.protocol.is_none());
}

#[test]
fn catalog_spec_strings_and_rejections() {
    let e = build_spec("appd-shift(6,2)").unwrap();
    assert_eq!(e.state_set.len(), 2);
    assert!(build("appc-threestates", &[6]).is_err());
    assert!(build("no-such-entry", &[]).is_err());
}

#[test]
fn schmidt_povm_without_overlap_is_projective() {
    let e = build("schmidt-sum-A", &[3, 6, 3]).unwrap();
    let ProtocolNode::Measure { measurement, .. } = &e.tree().unwrap().root else {
        panic!("expected a measurement at the root");
    };
    assert!(measurement.check_projective(tol()));
    let overlapping = build("schmidt-sum-A", &[4, 6, 3]).unwrap();
    let ProtocolNode::Measure { measurement, .. } = &overlapping.tree().unwrap().root else {
        panic!("expected a measurement at the root");
    };
    assert!(measurement.check_complete(tol()));
    assert!(!measurement.check_projective(tol()));
}
