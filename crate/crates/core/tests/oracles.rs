//! Independent oracles for the histories machinery on the three-state
//! apparatus. The oracle writes down post-measurement amplitudes by hand
//! from the ready-subspace action, never touching the completed unitary.

use histories_core::apparatus::build_figure1;
use histories_core::histories::{
    conditional_probability, decoherence_matrix, is_consistent, probabilities, Event,
};
use histories_core::linalg::{Ket, C64};
use histories_core::sampling::random_states;
use histories_core::scenarios::{
    canonical_context_unitary, canonical_family, named_state, Context,
};

const P: usize = 3;
const M: usize = 2;
const D: usize = 4;

fn idx(p: usize, m: usize, d: usize) -> usize {
    (p * M + m) * D + d
}

/// Chain vector of `(t1_label, t2_label)` computed by hand: project the
/// particle state, map each component along its path, then keep the pointer
/// components the `t2` outcome selects.
fn oracle_chain(psi: &Ket, ctx: Context, t1: &str, t2: &str) -> Vec<C64> {
    let u = canonical_context_unitary(ctx);
    let mut projected = psi.amplitudes().to_vec();
    match t1 {
        "P1" => {
            projected[1] = C64::new(0.0, 0.0);
            projected[2] = C64::new(0.0, 0.0);
        }
        "P2" => projected[0] = C64::new(0.0, 0.0),
        _ => unreachable!(),
    }
    let mut out = vec![C64::new(0.0, 0.0); P * M * D];
    out[idx(0, 0, 1)] = projected[0];
    for j in 1..3 {
        for k in 1..3 {
            out[idx(j, 1, j + 1)] += u[(j, k)] * projected[k];
        }
    }
    for (i, a) in out.iter_mut().enumerate() {
        let (m, d) = ((i / D) % M, i % D);
        let keep = match t2 {
            "D1" => m == 0 && d == 1,
            "M1" => m == 1 && (d == 2 || d == 3),
            "R" => !(m == 0 && d == 1) && !(m == 1 && (d == 2 || d == 3)),
            _ => unreachable!(),
        };
        if !keep {
            *a = C64::new(0.0, 0.0);
        }
    }
    out
}

fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn test_states() -> Vec<Ket> {
    let mut v: Vec<Ket> = ["e1", "e2", "e3", "c2", "c3", "uniform"]
        .iter()
        .map(|n| named_state(n).unwrap())
        .collect();
    v.extend(random_states(3, 25, 2024));
    v
}

#[test]
fn decoherence_matrix_matches_hand_oracle() {
    for ctx in [Context::B, Context::C] {
        for psi in test_states() {
            let f = canonical_family(ctx, &psi).unwrap();
            let m = decoherence_matrix(&f);
            for (i, oi) in m.outcomes().iter().enumerate() {
                let ci = oracle_chain(&psi, ctx, &oi[0], &oi[1]);
                for (j, oj) in m.outcomes().iter().enumerate() {
                    let cj = oracle_chain(&psi, ctx, &oj[0], &oj[1]);
                    let want = inner(&ci, &cj);
                    assert!(
                        (m.entries()[(i, j)] - want).norm() < 1e-12,
                        "{ctx} {oi:?} {oj:?}"
                    );
                }
            }
        }
    }
}

#[test]
fn uniform_state_decoherence_diagonal() {
    // Frozen from the oracle: (1/3, 0, 0, 2/3) on (P1,D1),(P1,M1),(P2,D1),(P2,M1).
    let psi = named_state("uniform").unwrap();
    for ctx in [Context::B, Context::C] {
        let m = decoherence_matrix(&canonical_family(ctx, &psi).unwrap());
        let diag =
            |o: [&str; 2]| m.entries()[(m.index_of(&o).unwrap(), m.index_of(&o).unwrap())].re;
        assert!((diag(["P1", "D1"]) - 1.0 / 3.0).abs() < 1e-12);
        assert!(diag(["P1", "M1"]).abs() < 1e-12);
        assert!(diag(["P2", "D1"]).abs() < 1e-12);
        assert!((diag(["P2", "M1"]) - 2.0 / 3.0).abs() < 1e-12);
        assert!(m.max_offdiag() <= 1e-10);
    }
}

#[test]
fn crossed_chains_vanish() {
    let psi = named_state("uniform").unwrap();
    for ctx in [Context::B, Context::C] {
        let f = canonical_family(ctx, &psi).unwrap();
        assert!(f.chain_vector(&["P1", "M1"]).unwrap().norm() <= 1e-10);
        assert!(f.chain_vector(&["P2", "D1"]).unwrap().norm() <= 1e-10);
    }
}

#[test]
fn eigenstate_probabilities() {
    for ctx in [Context::B, Context::C] {
        let p = probabilities(&canonical_family(ctx, &Ket::basis(3, 0)).unwrap()).unwrap();
        assert!((p.get(&["P1", "D1"]).unwrap() - 1.0).abs() < 1e-12);
        assert!((p.sum() - 1.0).abs() < 1e-12);
        let p = probabilities(&canonical_family(ctx, &Ket::basis(3, 2)).unwrap()).unwrap();
        assert!((p.get(&["P2", "M1"]).unwrap() - 1.0).abs() < 1e-12);
        let p = probabilities(&canonical_family(ctx, &named_state("uniform").unwrap()).unwrap())
            .unwrap();
        assert!((p.get(&["P1", "D1"]).unwrap() - 1.0 / 3.0).abs() < 1e-12);
        assert!((p.get(&["P2", "M1"]).unwrap() - 2.0 / 3.0).abs() < 1e-12);
    }
}

#[test]
fn conditionals_of_the_canonical_family() {
    for ctx in [Context::B, Context::C] {
        for psi in random_states(3, 20, 77) {
            let f = canonical_family(ctx, &psi).unwrap();
            assert!(is_consistent(&f).consistent);
            let back1 =
                conditional_probability(&f, &Event::new("t2", "D1"), &Event::new("t1", "P1"));
            let back2 =
                conditional_probability(&f, &Event::new("t2", "M1"), &Event::new("t1", "P2"));
            let fwd = conditional_probability(&f, &Event::new("t1", "P1"), &Event::new("t2", "D1"));
            for v in [back1, back2, fwd] {
                assert!((v.unwrap() - 1.0).abs() <= 1e-10);
            }
        }
    }
}

#[test]
fn histories_agree_with_statevector_oracle() {
    for ctx in [Context::B, Context::C] {
        let model = build_figure1(ctx);
        for psi in test_states() {
            let f = canonical_family(ctx, &psi).unwrap();
            let p = probabilities(&f).unwrap();
            let dist = model.run_statevector(&psi).unwrap();
            let d1 = p.marginal(&Event::new("t2", "D1")).unwrap();
            let m1 = p.marginal(&Event::new("t2", "M1")).unwrap();
            assert!((d1 - dist.get("D1").unwrap()).abs() <= 1e-10);
            assert!((m1 - dist.get("D2").unwrap() - dist.get("D3").unwrap()).abs() <= 1e-10);
        }
    }
}
