//! Unified spaces over seeded tame maps, checked pointwise against sampled
//! fibres. Generators only mention indices below 8 and offsets below 4.
//! Targets are probed up to index 44 and fibres from index 100 on, so a
//! fibre hit at 100+ means the whole family collapses onto the target.

use proptest::prelude::*;
use rand::Rng;
use regulim_core::corpus::{random_definable_set, random_map_from, random_tame_map, seeded};
use regulim_core::discrete_top::{
    compose, minimal_fw, minimal_perfection, unified, Association, ComposedSet, DiscreteSpace, Layer, SequenceSpec,
    Side, Tail, UnifiedSet,
};
use regulim_core::{DefinableSet, Point, TameMap};

const FAR: std::ops::Range<u64> = 40..44;
const GENERIC: std::ops::Range<u64> = 100..104;

fn near_points(space: &DiscreteSpace) -> Vec<Point> {
    let mut out: Vec<Point> = space.atoms().iter().map(|a| Point::atom(a.clone())).collect();
    for f in space.families() {
        out.extend((0..16).map(|n| Point::member(f.clone(), n)));
    }
    out
}

fn far_points(space: &DiscreteSpace) -> Vec<Point> {
    space
        .families()
        .iter()
        .flat_map(|f| FAR.map(move |n| Point::member(f.clone(), n)))
        .collect()
}

fn probe_points(space: &DiscreteSpace) -> Vec<Point> {
    let mut out = near_points(space);
    out.extend(far_points(space));
    out
}

fn generic_points(space: &DiscreteSpace) -> Vec<Point> {
    space
        .families()
        .iter()
        .flat_map(|f| GENERIC.map(move |n| Point::member(f.clone(), n)))
        .collect()
}

/// A fibre is infinite iff generic source points land on `y`.
fn fibre_infinite(f: &TameMap, y: &Point) -> bool {
    generic_points(f.source()).iter().any(|x| f.apply(x).unwrap() == *y)
}

fn in_image(f: &TameMap, y: &Point) -> bool {
    let mut xs: Vec<Point> = f.source().atoms().iter().map(|a| Point::atom(a.clone())).collect();
    for fam in f.source().families() {
        xs.extend((0..GENERIC.end).map(|n| Point::member(fam.clone(), n)));
    }
    xs.iter().any(|x| f.apply(x).unwrap() == *y)
}

/// `S ⊆ X ⊔ Y` is open iff no retained `y ∈ S` has generic fibre points outside `S`.
fn open_oracle(f: &TameMap, s: &UnifiedSet) -> bool {
    probe_points(f.target()).iter().filter(|y| s.y.contains(y)).all(|y| {
        !generic_points(f.source())
            .iter()
            .any(|x| f.apply(x).unwrap() == *y && !s.x.contains(x))
    })
}

fn map_strategy() -> impl Strategy<Value = (TameMap, u64)> {
    any::<u64>().prop_map(|seed| {
        let mut r = seeded(seed);
        (random_tame_map(&mut r), seed)
    })
}

fn random_subset(seed: u64, space: &DiscreteSpace) -> DefinableSet {
    random_definable_set(&mut seeded(seed), space)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn pr_and_per_match_sampled_fibres((f, _) in map_strategy()) {
        let pr = f.pr_set();
        let per = f.per_set();
        for y in probe_points(f.target()) {
            prop_assert_eq!(pr.contains(&y), !fibre_infinite(&f, &y), "pr at {}", y);
            prop_assert_eq!(per.contains(&y), !fibre_infinite(&f, &y) && in_image(&f, &y), "per at {}", y);
        }
        prop_assert_eq!(per, pr.intersection(&f.image()));
    }

    #[test]
    fn proper_sets_sit_inside_pr((f, seed) in map_strategy()) {
        let u = random_subset(seed ^ 1, f.target());
        let sampled_proper = probe_points(f.target()).iter().all(|y| !u.contains(y) || !fibre_infinite(&f, y));
        prop_assert_eq!(f.is_f_proper(&u), sampled_proper);
        if f.is_f_proper(&u) {
            prop_assert!(u.is_subset(&f.pr_set()));
        }
        if f.is_f_perfect(&u) {
            prop_assert!(u.is_subset(&f.per_set()));
        }
        // the maximal choices are themselves admissible
        prop_assert!(f.is_f_proper(&f.pr_set()));
        prop_assert!(f.is_f_perfect(&f.per_set()));
    }

    #[test]
    fn openness_matches_sampled_oracle((f, seed) in map_strategy()) {
        let z = unified(&f, &DefinableSet::empty()).unwrap();
        let s = UnifiedSet::new(random_subset(seed ^ 2, f.source()), random_subset(seed ^ 3, f.target()));
        prop_assert_eq!(z.is_open(&s).unwrap(), open_oracle(&f, &s));
    }

    #[test]
    fn excised_part_is_closed((f, seed) in map_strategy()) {
        let u = random_subset(seed ^ 4, f.target()).intersection(&f.pr_set());
        let z = unified(&f, &DefinableSet::empty()).unwrap();
        let pts = z.points();
        let complement = UnifiedSet::new(pts.x.clone(), pts.y.difference(&u));
        prop_assert!(z.is_open(&complement).unwrap());
        prop_assert!(z.is_closed(&UnifiedSet::new(DefinableSet::empty(), u)).unwrap());
    }

    #[test]
    fn closure_of_x_adds_infinite_fibres((f, _) in map_strategy()) {
        let z = minimal_fw(&f);
        let cl = z.closure_of_x();
        for y in probe_points(f.target()) {
            prop_assert_eq!(cl.y.contains(&y), fibre_infinite(&f, &y), "{}", y);
        }
        // strict: nothing retained on the Y side is isolated from X
        prop_assert_eq!(&cl.y, &z.y_side());
        prop_assert!(minimal_perfection(&f).y_side().is_subset(&unified(&f, &DefinableSet::empty()).unwrap().y_side()));
    }

    #[test]
    fn sequences_follow_fibres((f, seed) in map_strategy(), targets in 0usize..64) {
        let z = unified(&f, &DefinableSet::empty()).unwrap();
        for seq in sequences(&f, seed) {
            for (side, space) in [(Side::X, f.source()), (Side::Y, f.target())] {
                for t in near_points(space).into_iter().take(targets.max(1)) {
                    let got = z.converges(&seq, side, &t).unwrap();
                    prop_assert_eq!(got, convergence_oracle(&f, &seq, side, &t), "{:?} -> {}", seq, t);
                    if got && side == Side::X {
                        prop_assert_eq!(&seq.tail, &Tail::Const(Side::X, t.clone()));
                    }
                }
            }
        }
    }

    #[test]
    fn proper_maps_degenerate((f, seed) in map_strategy()) {
        prop_assume!(f.is_proper());
        let z = unified(&f, &DefinableSet::empty()).unwrap();
        for x in probe_points(f.source()) {
            prop_assert!(z.is_isolated(Side::X, &x).unwrap());
        }
        for y in probe_points(f.target()) {
            prop_assert!(z.is_isolated(Side::Y, &y).unwrap());
        }
        for seq in sequences(&f, seed) {
            for (side, space) in [(Side::X, f.source()), (Side::Y, f.target())] {
                for t in near_points(space) {
                    if z.converges(&seq, side, &t).unwrap() {
                        prop_assert!(!seq.is_eventually_injective());
                    }
                }
            }
        }
    }
}

/// Tail terms 50..60 all sit in `{t} ∪ f⁻¹(t)` and the tail eventually leaves
/// every finite subset of `X`.
fn convergence_oracle(f: &TameMap, seq: &SequenceSpec<Side>, side: Side, t: &Point) -> bool {
    let terms: Vec<(Side, Point)> = (50..60).map(|n| seq.tail_term(n)).collect();
    match side {
        Side::X => terms.iter().all(|(s, p)| *s == Side::X && p == t),
        Side::Y => {
            let near = terms.iter().all(|(s, p)| match s {
                Side::Y => p == t,
                Side::X => f.apply(p).unwrap() == *t,
            });
            let x_const = matches!(seq.tail, Tail::Const(Side::X, _));
            near && !x_const
        }
    }
}

fn sequences(f: &TameMap, seed: u64) -> Vec<SequenceSpec<Side>> {
    let mut r = seeded(seed ^ 5);
    let mut out = Vec::new();
    for (side, space) in [(Side::X, f.source()), (Side::Y, f.target())] {
        for p in near_points(space)
            .into_iter()
            .filter(|p| !matches!(p, Point::Member(_, n) if *n > 3))
        {
            out.push(SequenceSpec::constant(side, p));
        }
        for fam in space.families() {
            out.push(SequenceSpec::walk(
                side,
                fam.clone(),
                r.random_range(1..4),
                r.random_range(0..6),
            ));
        }
    }
    out
}

fn composed_fixture(seed: u64) -> (TameMap, DefinableSet, TameMap, DefinableSet) {
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
    (f, u, g, v)
}

fn composed_sequences(f: &TameMap, g: &TameMap, u: &DefinableSet, v: &DefinableSet) -> Vec<SequenceSpec<Layer>> {
    let mut out = Vec::new();
    for (layer, space, excised) in [
        (Layer::X, f.source(), DefinableSet::empty()),
        (Layer::Y, g.source(), u.clone()),
        (Layer::W, g.target(), v.clone()),
    ] {
        for p in near_points(space).into_iter().filter(|p| !excised.contains(p)).take(6) {
            out.push(SequenceSpec::constant(layer, p));
        }
        for fam in space.families() {
            // step 1 from past every mentioned index avoids any finite excision
            if matches!(excised.family(fam), regulim_core::discrete_top::FamilySpec::Fin(_)) {
                out.push(SequenceSpec::walk(layer, fam.clone(), 1, 20));
            }
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(60))]

    #[test]
    fn compose_orders_agree(seed in any::<u64>()) {
        let (f, u, g, v) = composed_fixture(seed);
        let z1 = unified(&f, &u).unwrap();
        let left = compose(&z1, &g, &v, Association::Left).unwrap();
        let right = compose(&z1, &g, &v, Association::Right).unwrap();
        prop_assert_eq!(left.points(), right.points());

        let pts = left.points();
        let mut r = seeded(seed ^ 6);
        for _ in 0..4 {
            let s = ComposedSet {
                x: random_definable_set(&mut r, f.source()),
                y: random_definable_set(&mut r, g.source()).intersection(&pts.y),
                w: random_definable_set(&mut r, g.target()).intersection(&pts.w),
            };
            prop_assert_eq!(left.is_open(&s).unwrap(), right.is_open(&s).unwrap(), "{:?}", s);
        }
        for seq in composed_sequences(&f, &g, &u, &v) {
            for (layer, space) in [(Layer::X, f.source()), (Layer::Y, g.source()), (Layer::W, g.target())] {
                for t in near_points(space).into_iter().filter(|t| left.contains(layer, t)).take(6) {
                    prop_assert_eq!(
                        left.converges(&seq, layer, &t).unwrap(),
                        right.converges(&seq, layer, &t).unwrap(),
                        "{:?} -> {}", seq, t
                    );
                }
            }
        }
    }
}

#[test]
fn empty_excisions_keep_every_point() {
    let mut r = seeded(11);
    for _ in 0..20 {
        let f = random_tame_map(&mut r);
        let w = DiscreteSpace::new(["w0"], ["W0"]).unwrap();
        let g = random_map_from(&mut r, f.target().clone(), w);
        let z1 = unified(&f, &DefinableSet::empty()).unwrap();
        for assoc in [Association::Left, Association::Right] {
            let c = compose(&z1, &g, &DefinableSet::empty(), assoc).unwrap();
            let pts = c.points();
            assert_eq!(pts.x, f.source().whole());
            assert_eq!(pts.y, f.target().whole());
            assert_eq!(pts.w, g.target().whole());
        }
    }
}

#[test]
fn omega_chain_with_constant_maps() {
    let x = DiscreteSpace::new(Vec::<String>::new(), ["F"]).unwrap();
    let y = DiscreteSpace::new(Vec::<String>::new(), ["G"]).unwrap();
    let w = DiscreteSpace::finite(["c"]).unwrap();
    let f = TameMap::new(
        x,
        y.clone(),
        Default::default(),
        [(
            "F".to_string(),
            regulim_core::discrete_top::FamilyRule::ConstTo(Point::member("G", 0)),
        )]
        .into(),
    )
    .unwrap();
    let g = TameMap::new(
        y,
        w,
        Default::default(),
        [(
            "G".to_string(),
            regulim_core::discrete_top::FamilyRule::ConstTo(Point::atom("c")),
        )]
        .into(),
    )
    .unwrap();
    let z1 = unified(&f, &DefinableSet::empty()).unwrap();
    let left = compose(&z1, &g, &DefinableSet::empty(), Association::Left).unwrap();
    let right = compose(&z1, &g, &DefinableSet::empty(), Association::Right).unwrap();

    let mut seqs = Vec::new();
    for a in 1..=3 {
        for b in [0, 2] {
            seqs.push(SequenceSpec::walk(Layer::X, "F", a, b));
            seqs.push(SequenceSpec::walk(Layer::Y, "G", a, b));
        }
    }
    for n in 0..4 {
        seqs.push(SequenceSpec::constant(Layer::Y, Point::member("G", n)));
        seqs.push(SequenceSpec::constant(Layer::X, Point::member("F", n)));
    }
    seqs.truncate(20);
    assert_eq!(seqs.len(), 20);
    let targets = [
        (Layer::X, Point::member("F", 0)),
        (Layer::Y, Point::member("G", 0)),
        (Layer::Y, Point::member("G", 1)),
        (Layer::W, Point::atom("c")),
    ];
    for seq in &seqs {
        for (layer, t) in &targets {
            assert_eq!(
                left.converges(seq, *layer, t).unwrap(),
                right.converges(seq, *layer, t).unwrap(),
                "{seq:?} -> {t}"
            );
        }
    }
    // a walk along G escapes to c, a walk along F collapses onto G[0]
    assert!(left.converges(&seqs[1], Layer::W, &Point::atom("c")).unwrap());
    assert!(left.converges(&seqs[0], Layer::Y, &Point::member("G", 0)).unwrap());
    assert!(!left.converges(&seqs[0], Layer::W, &Point::atom("c")).unwrap());
}

#[test]
fn proper_chain_is_discrete() {
    let x = DiscreteSpace::finite(["a", "b"]).unwrap();
    let y = DiscreteSpace::finite(["p"]).unwrap();
    let w = DiscreteSpace::finite(["q"]).unwrap();
    let f = TameMap::new(
        x,
        y.clone(),
        [("a".into(), Point::atom("p")), ("b".into(), Point::atom("p"))].into(),
        Default::default(),
    )
    .unwrap();
    let g = TameMap::new(y, w, [("p".into(), Point::atom("q"))].into(), Default::default()).unwrap();
    let z1 = unified(&f, &DefinableSet::empty()).unwrap();
    for assoc in [Association::Left, Association::Right] {
        let c = compose(&z1, &g, &DefinableSet::empty(), assoc).unwrap();
        for (layer, p) in [(Layer::X, "a"), (Layer::X, "b"), (Layer::Y, "p"), (Layer::W, "q")] {
            let mut s = ComposedSet::default();
            match layer {
                Layer::X => s.x.insert(&Point::atom(p)),
                Layer::Y => s.y.insert(&Point::atom(p)),
                Layer::W => s.w.insert(&Point::atom(p)),
            }
            assert!(c.is_open(&s).unwrap(), "{p} isolated");
        }
    }
}
