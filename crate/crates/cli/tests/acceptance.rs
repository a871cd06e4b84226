//! Acceptance run: one line per criterion, exit status 1 if any fails.
//! The target has its own `main`, so its output is never captured.

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::Rng;
use regulim_cli::{graph_file, map_file};
use regulim_core::corpus::{
    self, admissible_vertex_sets, algebra_corpus, finite_maps, path_corpus, random_definable_set, random_map_from,
    random_tame_map, seeded, tame_maps, CORPUS_SEED,
};
use regulim_core::discrete_top::{compose, unified, Association, ComposedSet, Layer, SequenceSpec, Side};
use regulim_core::findim_cstar::commutative_duality_check;
use regulim_core::fock_oracle::{
    gauge_grading_check, relative_core_dim, rep_axiom_check, span_stability, toeplitz_core_span,
};
use regulim_core::graph_correspondence::{bratteli, iterate_check, tower, BratteliDiagram, StageTower};
use regulim_core::graph_paths::{classify, converges, member, paths_upto, InfinitePath, PathTemplate, Slot};
use regulim_core::{
    DefinableSet, DiscreteSpace, EdgeRef, Graph, Mode, Path, PathPoint, Point, RegulatingChoice, Regulation, VertexId,
};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn regulim(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_regulim"))
        .args(args)
        .output()
        .expect("binary runs")
}

/// `V = reg` and two seeded admissible sets, as used by criteria 2 and 3.
fn regulating_sets(g: &Graph, k: usize) -> Vec<BTreeSet<VertexId>> {
    let mut out = vec![classify(g).reg];
    out.extend(admissible_vertex_sets(g, CORPUS_SEED + k as u64, 2));
    out
}

fn toeplitz_tower(g: &Graph) -> StageTower {
    tower(g, &RegulatingChoice::new(g, Mode::Toeplitz, None).unwrap(), 3).unwrap()
}

fn c1_toeplitz() -> Outcome {
    let start = Instant::now();
    let mut checked = 0;
    for (name, g) in algebra_corpus() {
        let dims = toeplitz_tower(&g).dims();
        for (i, &d) in dims.iter().enumerate() {
            let span = toeplitz_core_span(&g, i, i).map_err(|e| format!("{name}: {e}"))?.dim;
            ensure!(d == span, "{name}, stage {i}: stage dim {d}, span dim {span}");
            checked += 1;
        }
    }
    for (g, want) in [
        (corpus::single_loop(), [1, 2, 3, 4]),
        (corpus::two_loops(), [1, 5, 21, 85]),
        (corpus::edge_uw(), [2, 3, 3, 3]),
    ] {
        let got: Vec<usize> = (0..=3).map(|i| toeplitz_core_span(&g, i, i).unwrap().dim).collect();
        ensure!(got == want, "fixture {want:?}, oracle {got:?}");
    }
    let took = start.elapsed();
    ensure!(took < Duration::from_secs(10), "took {took:?}");
    Ok(format!(
        "{checked} stage/oracle pairs, fixtures exact, {:.2}s",
        took.as_secs_f64()
    ))
}

fn c2_relative() -> Outcome {
    let mut checked = 0;
    for (k, (name, g)) in algebra_corpus().into_iter().enumerate() {
        for v in regulating_sets(&g, k) {
            let t = tower(&g, &RegulatingChoice::custom(&g, v.clone()).unwrap(), 3).unwrap();
            for (i, &d) in t.dims().iter().enumerate() {
                let rel = relative_core_dim(&g, &v, i, i + 1)
                    .map_err(|e| format!("{name}: {e}"))?
                    .relative_dim;
                ensure!(d == rel, "{name}, V={v:?}, stage {i}: {d} vs {rel}");
                checked += 1;
            }
        }
    }
    let rel = |g: &Graph, v: &str| -> Vec<usize> {
        let set = [g.vertex(v).unwrap()].into();
        (0..=3)
            .map(|i| relative_core_dim(g, &set, i, i + 1).unwrap().relative_dim)
            .collect()
    };
    let lp = rel(&corpus::single_loop(), "v");
    ensure!(lp == [1, 1, 1, 1], "single loop, V={{v}}: {lp:?}");
    let uw = rel(&corpus::edge_uw(), "w");
    ensure!(uw[1..] == [2, 2, 2], "u→w, V={{w}}: {uw:?}");
    Ok(format!("{checked} stage/oracle pairs, fixtures exact"))
}

fn c3_dimension_law() -> Outcome {
    let mut checked = 0;
    for (k, (name, g)) in algebra_corpus().into_iter().enumerate() {
        let mut towers = vec![toeplitz_tower(&g)];
        for v in regulating_sets(&g, k) {
            towers.push(tower(&g, &RegulatingChoice::custom(&g, v).unwrap(), 3).unwrap());
        }
        for t in towers {
            let sq = |i: usize| -> u64 { t.structure.level(i).values().map(|n| n * n).sum() };
            for i in 0..3 {
                let cut: u64 = t.choice.vertices.iter().map(|&v| t.structure.count(i, v).pow(2)).sum();
                let (a, b) = (t.dims()[i + 1] as u64 + cut, sq(i + 1) + t.dims()[i] as u64);
                ensure!(a == b, "{name}, V={:?}, stage {}: {a} ≠ {b}", t.choice.vertices, i + 1);
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} stage transitions"))
}

fn c4_iterate_and_compose() -> Outcome {
    let mut iterates = 0;
    for (k, (name, g)) in algebra_corpus().into_iter().enumerate() {
        let mut sets = vec![BTreeSet::new()];
        sets.extend(regulating_sets(&g, k));
        for v in sets {
            for i in 0..3 {
                iterate_check(&g, &v, i).map_err(|e| format!("{name}, V={v:?}: {e}"))?;
                iterates += 1;
            }
        }
    }
    // scripted queries over seeded composites, compared across both orders
    let mut queries = 0;
    let mut seed = CORPUS_SEED;
    while queries < 100 {
        seed += 1;
        let mut r = seeded(seed);
        let f = random_tame_map(&mut r);
        let w = DiscreteSpace::new(
            (0..r.random_range(1..3)).map(|k| format!("w{k}")),
            (0..r.random_range(0..3)).map(|k| format!("W{k}")),
        )
        .unwrap();
        let g = random_map_from(&mut r, f.target().clone(), w);
        let u = random_definable_set(&mut r, f.target()).intersection(&f.pr_set());
        let v = random_definable_set(&mut r, g.target()).intersection(&g.pr_set());
        let z1 = unified(&f, &u).map_err(|e| e.to_string())?;
        let left = compose(&z1, &g, &v, Association::Left).map_err(|e| e.to_string())?;
        let right = compose(&z1, &g, &v, Association::Right).map_err(|e| e.to_string())?;
        let pts = left.points();
        ensure!(pts == right.points(), "seed {seed}: point sets differ");
        for _ in 0..3 {
            let s = ComposedSet {
                x: random_definable_set(&mut r, f.source()),
                y: random_definable_set(&mut r, g.source()).intersection(&pts.y),
                w: random_definable_set(&mut r, g.target()).intersection(&pts.w),
            };
            let (a, b) = (
                left.is_open(&s).map_err(|e| e.to_string())?,
                right.is_open(&s).map_err(|e| e.to_string())?,
            );
            ensure!(a == b, "seed {seed}: openness of {s:?} differs");
            queries += 1;
        }
        for (layer, space) in [(Layer::X, f.source()), (Layer::Y, g.source()), (Layer::W, g.target())] {
            for fam in space.families() {
                let seq = SequenceSpec::walk(layer, fam.clone(), 1, 20);
                let targets: Vec<Point> = space
                    .atoms()
                    .iter()
                    .map(|a| Point::atom(a.clone()))
                    .chain(space.families().iter().map(|h| Point::member(h.clone(), 0)))
                    .collect();
                for (tl, t) in [Layer::X, Layer::Y, Layer::W]
                    .into_iter()
                    .flat_map(|l| targets.iter().map(move |t| (l, t)))
                {
                    if !left.contains(tl, t) || !left.contains(layer, &seq.tail_term(0).1) {
                        continue;
                    }
                    let a = left.converges(&seq, tl, t).map_err(|e| e.to_string())?;
                    let b = right.converges(&seq, tl, t).map_err(|e| e.to_string())?;
                    ensure!(a == b, "seed {seed}: {seq:?} → {t} differs");
                    queries += 1;
                }
            }
        }
    }
    Ok(format!(
        "{iterates} iterate checks, {queries} compose queries over {} composites",
        seed - CORPUS_SEED
    ))
}

fn c5_integer_power() -> Outcome {
    let g = corpus::omega_loop();
    let param = Slot::Param { bundle: 0, a: 1, b: 0 };
    for d in 0..6u64 {
        let bd = EdgeRef::Bundle(0, d);
        let seq = PathTemplate {
            base: 0,
            prefix: vec![Slot::Edge(bd)],
            period: vec![param],
        };
        let finite = PathPoint::Finite(Path::new(&g, vec![bd]).unwrap());
        ensure!(
            converges(&g, &seq, &finite, &Regulation::Unified).unwrap(),
            "b^j does not converge to (b[{d}])"
        );
        for k in 0..6 {
            let inf = PathPoint::Infinite(InfinitePath::new(&g, vec![bd], vec![EdgeRef::Bundle(0, k)]).unwrap());
            ensure!(
                !converges(&g, &seq, &inf, &Regulation::Unified).unwrap(),
                "b^j converges to the infinite path {}",
                inf.literal(&g)
            );
        }
        let seq_text = format!("prefix=b[{d}]; tail=walk:b:n");
        let o = regulim(&[
            "converge",
            &fixture("omega_loop.graph"),
            "--seq",
            &seq_text,
            "--target",
            &format!("b[{d}]"),
        ]);
        ensure!(
            o.status.code() == Some(0) && o.stdout == b"true\n",
            "cli disagrees at d={d}"
        );
    }
    Ok("finite limit (d) for d < 6; 36 infinite targets rejected; cli agrees".into())
}

fn c6_boundary_law() -> Outcome {
    let mut checked = 0;
    for (name, g) in path_corpus() {
        let sing = classify(&g).sing;
        for mu in paths_upto(&g, 4, Some(3)).map_err(|e| e.to_string())? {
            let m = member(&g, &PathPoint::Finite(mu.clone()), &Regulation::Perfect).unwrap();
            ensure!(m == sing.contains(&mu.source(&g)), "{name}: {}", mu.display(&g));
            checked += 1;
        }
    }
    Ok(format!("{checked} paths over {} graphs", path_corpus().len()))
}

fn c7_proper_sets() -> Outcome {
    let mut r = seeded(CORPUS_SEED ^ 7);
    let mut proper = 0;
    for (k, f) in tame_maps(CORPUS_SEED, 100).into_iter().enumerate() {
        let pr = f.pr_set();
        ensure!(f.is_f_proper(&pr), "map #{k}: pr_set is not f-proper");
        ensure!(
            f.per_set() == pr.intersection(&f.image()),
            "map #{k}: per_set ≠ pr_set ∩ image"
        );
        for _ in 0..20 {
            let u = random_definable_set(&mut r, f.target());
            if f.is_f_proper(&u) {
                ensure!(u.is_subset(&pr), "map #{k}: proper {u} escapes pr_set");
                proper += 1;
            }
        }
    }
    Ok(format!("100 maps, {proper} sampled proper sets inside pr_set"))
}

fn c8_duality() -> Outcome {
    for (k, f) in finite_maps(CORPUS_SEED, 20).into_iter().enumerate() {
        let rep = commutative_duality_check(&f).map_err(|e| format!("map #{k}: {e}"))?;
        let (nx, ny) = (f.source().atoms().len(), f.target().atoms().len());
        ensure!(rep.blocks == nx + ny, "map #{k}: {} blocks", rep.blocks);
        let pts = unified(&f, &DefinableSet::empty()).unwrap().points();
        let want: BTreeSet<(Side, Point)> = pts
            .x
            .finite_points()
            .unwrap()
            .into_iter()
            .map(|p| (Side::X, p))
            .chain(pts.y.finite_points().unwrap().into_iter().map(|p| (Side::Y, p)))
            .collect();
        let got: BTreeSet<(Side, Point)> = rep.spectrum.iter().map(|(_, s, p)| (*s, p.clone())).collect();
        ensure!(
            got == want && rep.spectrum.len() == want.len(),
            "map #{k}: spectrum is not the unified space"
        );
    }
    Ok("20 maps".into())
}

fn c9_representation() -> Outcome {
    for (name, g) in algebra_corpus() {
        rep_axiom_check(&g, 4).map_err(|e| format!("{name}: {e}"))?;
        for i in 0..=3 {
            gauge_grading_check(&g, i, i + 1).map_err(|e| format!("{name}, stage {i}: {e}"))?;
            span_stability(&g, i).map_err(|e| format!("{name}: {e}"))?;
        }
    }
    let o = regulim(&["verify", &fixture("uw.graph"), "--stages", "3"]);
    ensure!(o.status.code() == Some(0), "clean verify exited {:?}", o.status.code());
    let o = regulim(&["verify", &fixture("uw.graph"), "--stages", "3", "--inject-fault", "2"]);
    let err = String::from_utf8_lossy(&o.stderr);
    ensure!(
        o.status.code() == Some(1),
        "faulted verify exited {:?}",
        o.status.code()
    );
    ensure!(err.contains("stage 2"), "fault report does not name the stage: {err}");
    Ok("axioms, grading and N vs N+1 stability on 14 graphs; fault exits 1".into())
}

fn c10_determinism() -> Outcome {
    let runs: [&[&str]; 3] = [
        &["core", "two_loops.graph", "--stages", "3", "--emit", "dot"],
        &["core", "uw.graph", "--mode", "perfect", "--emit", "json"],
        &["verify", "uvw.graph", "--mode", "perfect"],
    ];
    for case in runs {
        let path = fixture(case[1]);
        let mut args = case.to_vec();
        args[1] = &path;
        let (a, b) = (regulim(&args), regulim(&args));
        ensure!(
            !a.stdout.is_empty() && a.stdout == b.stdout,
            "{case:?} differs between runs"
        );
    }
    for (name, g) in path_corpus() {
        ensure!(
            graph_file::parse(&graph_file::emit(&g)).ok() == Some(g.clone()),
            "{name}: graph round trip"
        );
    }
    for (k, f) in finite_maps(CORPUS_SEED, 20).into_iter().enumerate() {
        ensure!(
            map_file::parse(&map_file::emit(&f)).ok() == Some(f.clone()),
            "map #{k}: round trip"
        );
    }
    for (name, g) in algebra_corpus() {
        let d = bratteli(&g, &toeplitz_tower(&g));
        let text = serde_json::to_string(&d).unwrap();
        let back: BratteliDiagram = serde_json::from_str(&text).unwrap();
        ensure!(back == d, "{name}: diagram round trip");
    }
    Ok("3 commands byte-identical; graph, map and diagram round trips".into())
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("Toeplitz oracle equivalence", c1_toeplitz),
        ("relative oracle equivalence", c2_relative),
        ("extension dimension law", c3_dimension_law),
        ("iterates and compose orders", c4_iterate_and_compose),
        ("integer power sequence", c5_integer_power),
        ("boundary law", c6_boundary_law),
        ("proper and perfect sets", c7_proper_sets),
        ("commutative duality", c8_duality),
        ("representation, grading, stability", c9_representation),
        ("determinism and round trips", c10_determinism),
    ];
    let mut failed = 0;
    for (k, (name, f)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let res = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        let ms = start.elapsed().as_millis();
        match res {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail} [{ms} ms]", k + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {why} [{ms} ms]", k + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
