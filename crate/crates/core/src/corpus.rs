//! Deterministic fixtures: the named graphs, seeded random graphs, seeded
//! ω-bundle graphs, and seeded random tame maps.
//!
//! Random graphs have at most 4 vertices and 6 edges. Draws whose Fock space
//! at depth 5 exceeds [`FOCK_CAP`] basis vectors are rejected so that the
//! brute-force oracle stays cheap; the seed fixes which graphs survive.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::discrete_top::{DefinableSet, DiscreteSpace, FamilyRule, FamilySpec, Point, TameMap};
use crate::graph::{Graph, VertexId};
use crate::graph_paths::{classify, paths};

pub const CORPUS_SEED: u64 = 0x5eed_2024;
pub const FOCK_CAP: usize = 120;

pub fn single_loop() -> Graph {
    Graph::from_parts(&["v"], &[("e", "v", "v")], &[])
}

pub fn two_loops() -> Graph {
    Graph::from_parts(&["v"], &[("e", "v", "v"), ("f", "v", "v")], &[])
}

/// `u → w`
pub fn edge_uw() -> Graph {
    Graph::from_parts(&["u", "w"], &[("e", "u", "w")], &[])
}

/// `u → v → w`
pub fn path_uvw() -> Graph {
    Graph::from_parts(&["u", "v", "w"], &[("e", "u", "v"), ("f", "v", "w")], &[])
}

/// One vertex, one bundle of loops.
pub fn omega_loop() -> Graph {
    Graph::from_parts(&["v"], &[], &[("b", "v", "v")])
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn fock_dim(g: &Graph, depth: usize) -> usize {
    (0..=depth)
        .map(|k| paths(g, k, None).map_or(usize::MAX, |p| p.len()))
        .sum()
}

fn draw_graph(r: &mut ChaCha8Rng, bundles: usize) -> Graph {
    let nv = r.random_range(1..=4);
    let ne = r.random_range(0..=6 - bundles);
    let mut g = Graph::new();
    for v in 0..nv {
        g.add_vertex(&format!("v{v}")).expect("fresh");
    }
    for e in 0..ne {
        let (s, t) = (r.random_range(0..nv), r.random_range(0..nv));
        g.add_edge(&format!("e{e}"), &format!("v{s}"), &format!("v{t}"))
            .expect("fresh");
    }
    for b in 0..bundles {
        let (s, t) = (r.random_range(0..nv), r.random_range(0..nv));
        g.add_bundle(&format!("b{b}"), &format!("v{s}"), &format!("v{t}"))
            .expect("fresh");
    }
    g
}

/// `count` random finite graphs, each with a Fock space of at most
/// [`FOCK_CAP`] vectors at depth 5.
pub fn random_graphs(seed: u64, count: usize) -> Vec<Graph> {
    let mut r = rng(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let g = draw_graph(&mut r, 0);
        if fock_dim(&g, 5) <= FOCK_CAP {
            out.push(g);
        }
    }
    out
}

/// `count` random graphs with one or two ω-bundles.
pub fn omega_graphs(seed: u64, count: usize) -> Vec<Graph> {
    let mut r = rng(seed);
    (0..count)
        .map(|_| {
            let b = r.random_range(1..=2);
            draw_graph(&mut r, b)
        })
        .collect()
}

/// The named finite graphs followed by ten seeded random graphs.
pub fn algebra_corpus() -> Vec<(String, Graph)> {
    let mut out = vec![
        ("single loop".to_string(), single_loop()),
        ("two loops".to_string(), two_loops()),
        ("edge u->w".to_string(), edge_uw()),
        ("path u->v->w".to_string(), path_uvw()),
    ];
    for (k, g) in random_graphs(CORPUS_SEED, 10).into_iter().enumerate() {
        out.push((format!("random #{k}"), g));
    }
    out
}

/// Graphs for path-space checks: the algebra corpus plus five ω-bundle graphs.
pub fn path_corpus() -> Vec<(String, Graph)> {
    let mut out = algebra_corpus();
    out.push(("omega loop".to_string(), omega_loop()));
    for (k, g) in omega_graphs(CORPUS_SEED ^ 0xb0b, 5).into_iter().enumerate() {
        out.push((format!("omega #{k}"), g));
    }
    out
}

/// `count` random subsets of the regular vertices.
pub fn admissible_vertex_sets(graph: &Graph, seed: u64, count: usize) -> Vec<BTreeSet<VertexId>> {
    let reg: Vec<VertexId> = classify(graph).reg.into_iter().collect();
    let mut r = rng(seed);
    (0..count)
        .map(|_| reg.iter().copied().filter(|_| r.random_bool(0.5)).collect())
        .collect()
}

fn draw_space(r: &mut ChaCha8Rng, prefix: &str, max_atoms: usize, max_fams: usize) -> DiscreteSpace {
    let na = r.random_range(0..=max_atoms);
    let nf = r.random_range(0..=max_fams);
    DiscreteSpace::new(
        (0..na).map(|k| format!("{prefix}{k}")),
        (0..nf).map(|k| format!("{}{k}", prefix.to_uppercase())),
    )
    .expect("fresh names")
}

fn draw_point(r: &mut ChaCha8Rng, space: &DiscreteSpace) -> Point {
    let atoms: Vec<&String> = space.atoms().iter().collect();
    let fams: Vec<&String> = space.families().iter().collect();
    let k = r.random_range(0..atoms.len() + fams.len());
    if k < atoms.len() {
        Point::atom(atoms[k].clone())
    } else {
        Point::member(fams[k - atoms.len()].clone(), r.random_range(0..6))
    }
}

/// A random tame map between random spaces, both with at most three atoms
/// and two families.
pub fn random_tame_map(r: &mut ChaCha8Rng) -> TameMap {
    random_map_between(r, "x", "y")
}

pub(crate) fn random_map_between(r: &mut ChaCha8Rng, xp: &str, yp: &str) -> TameMap {
    let x = draw_space(r, xp, 3, 2);
    let mut y = draw_space(r, yp, 3, 2);
    while !x.is_empty() && y.is_empty() {
        y = draw_space(r, yp, 3, 2);
    }
    random_map_from(r, x, y)
}

pub fn random_map_from(r: &mut ChaCha8Rng, x: DiscreteSpace, y: DiscreteSpace) -> TameMap {
    let atom_rule: BTreeMap<String, Point> = x.atoms().iter().map(|a| (a.clone(), draw_point(r, &y))).collect();
    let targets: Vec<&String> = y.families().iter().collect();
    let family_rule: BTreeMap<String, FamilyRule> = x
        .families()
        .iter()
        .map(|f| {
            let rule = if targets.is_empty() || r.random_bool(0.5) {
                FamilyRule::ConstTo(draw_point(r, &y))
            } else {
                FamilyRule::Reindex {
                    target: targets[r.random_range(0..targets.len())].clone(),
                    offset: r.random_range(0..4),
                }
            };
            (f.clone(), rule)
        })
        .collect();
    TameMap::new(x, y, atom_rule, family_rule).expect("total by construction")
}

/// A random definable subset of `space`.
pub fn random_definable_set(r: &mut ChaCha8Rng, space: &DiscreteSpace) -> DefinableSet {
    let mut s = DefinableSet::empty();
    for a in space.atoms() {
        if r.random_bool(0.5) {
            s.insert(&Point::atom(a.clone()));
        }
    }
    for f in space.families() {
        let idx: BTreeSet<u64> = (0..r.random_range(0..4)).map(|_| r.random_range(0..8)).collect();
        let spec = match r.random_range(0..3) {
            0 => continue,
            1 => FamilySpec::Fin(idx),
            _ => FamilySpec::Cofin(idx),
        };
        s = s.with_family(f.clone(), spec);
    }
    s
}

/// `count` seeded tame maps.
pub fn tame_maps(seed: u64, count: usize) -> Vec<TameMap> {
    let mut r = rng(seed);
    (0..count).map(|_| random_tame_map(&mut r)).collect()
}

/// `count` seeded maps between finite spaces with 1–4 and 1–3 atoms.
pub fn finite_maps(seed: u64, count: usize) -> Vec<TameMap> {
    let mut r = rng(seed);
    (0..count)
        .map(|_| {
            let nx = r.random_range(1..=4);
            let ny = r.random_range(1..=3);
            let x = DiscreteSpace::finite((0..nx).map(|k| format!("a{k}"))).expect("fresh");
            let y = DiscreteSpace::finite((0..ny).map(|k| format!("p{k}"))).expect("fresh");
            random_map_from(&mut r, x, y)
        })
        .collect()
}

/// Seeded generator for callers that need their own stream.
pub fn seeded(seed: u64) -> ChaCha8Rng {
    rng(seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corpus_is_deterministic() {
        let a: Vec<_> = random_graphs(7, 5);
        let b: Vec<_> = random_graphs(7, 5);
        assert_eq!(a, b);
        assert_eq!(tame_maps(3, 4), tame_maps(3, 4));
    }

    #[test]
    fn random_graphs_respect_limits() {
        for g in random_graphs(CORPUS_SEED, 10) {
            assert!(g.num_vertices() <= 4 && g.edges().len() <= 6);
            assert!(fock_dim(&g, 5) <= FOCK_CAP);
        }
        for g in omega_graphs(1, 5) {
            assert!(g.has_bundles());
            assert!(g.edges().len() + g.bundles().len() <= 6);
        }
    }
}
