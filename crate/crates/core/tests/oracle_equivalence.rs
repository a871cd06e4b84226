//! Stage algebras against the truncated Fock space, and both against stage
//! dimensions counted directly from path enumerations.

use std::collections::BTreeSet;

use regulim_core::corpus::{self, admissible_vertex_sets, algebra_corpus, CORPUS_SEED};
use regulim_core::fock_oracle::{
    embedding_multiplicities, gauge_grading_check, relative_core_dim, relative_stability, rep_axiom_check,
    rep_ideal_check, span_stability, toeplitz_core_span,
};
use regulim_core::graph_correspondence::{phi_multiplicity, stage, tower, Mode, RegulatingChoice};
use regulim_core::graph_paths::{classify, paths};
use regulim_core::{Graph, VertexId};

/// `Σ_v |{μ ∈ Eⁱ : s(μ) = v}|² + Σ_{k<i} Σ_{v∉V} |{μ ∈ Eᵏ : s(μ) = v}|²`
fn enumerated_dim(g: &Graph, v: &BTreeSet<VertexId>, i: usize) -> usize {
    let sq = |k: usize, keep: &dyn Fn(VertexId) -> bool| -> usize {
        let ps = paths(g, k, None).unwrap();
        g.vertices()
            .filter(|&w| keep(w))
            .map(|w| ps.iter().filter(|p| p.source(g) == w).count().pow(2))
            .sum()
    };
    sq(i, &|_| true) + (0..i).map(|k| sq(k, &|w| !v.contains(&w))).sum::<usize>()
}

#[test]
fn toeplitz_dims_match_span() {
    for (name, g) in algebra_corpus() {
        let t = tower(&g, &RegulatingChoice::new(&g, Mode::Toeplitz, None).unwrap(), 3).unwrap();
        for i in 0..=3 {
            let span = toeplitz_core_span(&g, i, i).unwrap().dim;
            assert_eq!(t.dims()[i], span, "{name}, stage {i}");
            assert_eq!(span, enumerated_dim(&g, &BTreeSet::new(), i), "{name}, stage {i}");
        }
    }
}

#[test]
fn toeplitz_fixtures() {
    let dims = |g: Graph| {
        (0..=3)
            .map(|i| toeplitz_core_span(&g, i, i).unwrap().dim)
            .collect::<Vec<_>>()
    };
    assert_eq!(dims(corpus::single_loop()), [1, 2, 3, 4]);
    assert_eq!(dims(corpus::two_loops()), [1, 5, 21, 85]);
    assert_eq!(dims(corpus::edge_uw()), [2, 3, 3, 3]);
}

#[test]
fn relative_dims_match_ideal_quotient() {
    for (k, (name, g)) in algebra_corpus().into_iter().enumerate() {
        let mut choices = vec![classify(&g).reg];
        choices.extend(admissible_vertex_sets(&g, CORPUS_SEED + k as u64, 2));
        for v in choices {
            for i in 0..=3 {
                let rel = relative_core_dim(&g, &v, i, i + 1).unwrap().relative_dim;
                assert_eq!(
                    stage(&g, &v, i).unwrap().algebra.dim(),
                    rel,
                    "{name}, V={v:?}, stage {i}"
                );
                assert_eq!(rel, enumerated_dim(&g, &v, i), "{name}, V={v:?}, stage {i}");
            }
        }
    }
}

#[test]
fn relative_fixtures() {
    let g = corpus::single_loop();
    for i in 0..=3 {
        assert_eq!(relative_core_dim(&g, &[0].into(), i, i + 1).unwrap().relative_dim, 1);
    }
    let g = corpus::edge_uw();
    for i in 1..=3 {
        assert_eq!(relative_core_dim(&g, &[1].into(), i, i + 1).unwrap().relative_dim, 2);
    }
}

#[test]
fn truncation_is_stable() {
    for (name, g) in algebra_corpus() {
        let reg = classify(&g).reg;
        for i in 0..=3 {
            span_stability(&g, i).unwrap_or_else(|e| panic!("{name}: {e}"));
            relative_stability(&g, &reg, i).unwrap_or_else(|e| panic!("{name}: {e}"));
        }
    }
}

#[test]
fn fock_axioms_on_corpus() {
    for (name, g) in algebra_corpus() {
        for n in 1..=4 {
            rep_axiom_check(&g, n).unwrap_or_else(|e| panic!("{name}, depth {n}: {e}"));
        }
        for i in 0..=3 {
            gauge_grading_check(&g, i, i + 1).unwrap_or_else(|e| panic!("{name}: {e}"));
        }
        rep_ideal_check(&g, 3).unwrap_or_else(|e| panic!("{name}: {e}"));
    }
}

#[test]
fn fock_embedding_reproduces_multiplicities() {
    for (name, g) in algebra_corpus() {
        for i in 0..=3 {
            let phi = phi_multiplicity(&g, i).unwrap();
            assert_eq!(
                embedding_multiplicities(&g, i).unwrap(),
                phi.multiplicities(),
                "{name}, level {i}"
            );
        }
    }
}
