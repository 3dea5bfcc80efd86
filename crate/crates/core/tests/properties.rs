mod common;

use std::collections::{BTreeMap, BTreeSet};

use num_rational::BigRational;
use num_traits::Zero;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::*;
use fewloc::contraction::{contract_edge_with_step, link_condition};
use fewloc::rigidity::required_rank;
use fewloc::*;
use fewloc::Strategy as PlaceStrategy;

fn small_config(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, ..ProptestConfig::default() }
}

fn random_framework(n: usize, d: usize, p_edge: f64, coord: i64, seed: u64) -> Framework {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for a in 0..n as Vertex {
        for b in a + 1..n as Vertex {
            if rng.gen_bool(p_edge) {
                edges.push((a, b));
            }
        }
    }
    let g = Graph::new(0..n as Vertex, edges).unwrap();
    // Small coordinates, so coincidences and collinearities actually occur.
    let pts = (0..n as Vertex).map(|v| (v, (0..d).map(|_| rng.gen_range(-coord..=coord)).collect())).collect();
    framework(&g, d, &pts)
}

proptest! {
    #![proptest_config(small_config(64))]

    #[test]
    fn sphere_counts_and_links(n in 5usize..120, seed in any::<u64>()) {
        let c = random_sphere(n, seed).unwrap();
        let (v, e, f) = counts(&c);
        prop_assert_eq!(e, 3 * n - 6);
        prop_assert_eq!(2 * e, 3 * f);
        let r = c.surface_report();
        prop_assert!(r.is_closed_surface && r.orientable && r.connected);
        prop_assert_eq!(r.euler_characteristic, v as i64 - e as i64 + f as i64);
        prop_assert_eq!(r.euler_characteristic, 2);
        for &x in c.vertices() {
            let link = c.link_cycle(x).unwrap();
            prop_assert_eq!(link.len(), c.degree(x));
            for i in 0..link.len() {
                prop_assert!(c.has_triangle([x, link[i], link[(i + 1) % link.len()]]));
            }
        }
    }

    #[test]
    fn surfaces_match_their_genus(g in 0u32..3, orientable in any::<bool>(), extra in 0usize..20, seed in any::<u64>()) {
        prop_assume!(orientable || g > 0);
        let n = 40 + extra;
        let c = genus_surface(g, orientable, n, seed).unwrap();
        let r = c.surface_report();
        let (v, e, f) = counts(&c);
        prop_assert_eq!(v, n);
        prop_assert_eq!(2 * e, 3 * f);
        prop_assert_eq!(r.genus, g);
        let chi = if orientable { 2 - 2 * g as i64 } else { 2 - g as i64 };
        prop_assert_eq!(r.euler_characteristic, chi);
        // Orientable surfaces carry a full-support rational 2-cycle; non-orientable ones none.
        let m = c.minimal_cycle_check();
        prop_assert_eq!(m.is_cycle, orientable);
        prop_assert_eq!(m.is_minimal, orientable);
    }

    #[test]
    fn contraction_preserves_topology(g in 0u32..2, n in 30usize..60, seed in any::<u64>()) {
        let c = genus_surface(g, true, n, seed).unwrap();
        let Some((v, u)) = find_reducible_vertex(&c, 6) else { return Ok(()) };
        let (d, step) = contract_edge_with_step(&c, v, u).unwrap();
        let (a, b) = (c.surface_report(), d.surface_report());
        prop_assert!(b.is_closed_surface && b.connected);
        prop_assert_eq!((a.euler_characteristic, a.orientable), (b.euler_characteristic, b.orientable));
        let (cv, ce, cf) = counts(&c);
        prop_assert_eq!(counts(&d), (cv - 1, ce - 3, cf - 2));
        prop_assert_eq!(step.degree, step.link.len());
        prop_assert_eq!(vertex_split(&d, &step).unwrap(), c);
    }

    #[test]
    fn split_then_contract_is_identity(n in 5usize..80, seed in any::<u64>()) {
        let c = random_sphere(n, seed).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        let u = c.vertices()[rng.gen_range(0..n)];
        let link = c.link_cycle(u).unwrap();
        let k = link.len();
        let start = rng.gen_range(0..k);
        let m = rng.gen_range(2..=k);
        let mut arc = vec![u];
        arc.extend((0..m).map(|j| link[(start + j) % k]));
        let v = c.max_vertex() + 1;
        let step = ContractionStep { removed: v, target: u, degree: arc.len(), link: arc };
        let split = vertex_split(&c, &step).unwrap();
        prop_assert!(split.surface_report().is_closed_surface);
        prop_assert_eq!(contract_edge(&split, v, u).unwrap(), c);
    }

    #[test]
    fn link_condition_iff_no_missing_triangle(n in 5usize..60, seed in any::<u64>()) {
        let c = random_sphere(n, seed).unwrap();
        let missing = c.missing_triangles();
        for &[a, b] in c.edges() {
            let in_missing = missing.iter().any(|t| t.contains(&a) && t.contains(&b));
            prop_assert_eq!(link_condition(&c, a, b).is_ok(), !in_missing);
        }
    }

    #[test]
    fn schedules_replay(n in 5usize..150, seed in any::<u64>(), max_degree in 4usize..7) {
        let c = random_sphere(n, seed).unwrap();
        let s = reduction_schedule(&c, max_degree, None);
        prop_assert_eq!(s.replay().unwrap(), c);
        if max_degree >= 5 {
            prop_assert_eq!(s.base.num_vertices(), 4);
        }
    }

    #[test]
    fn ranks_and_kernels(rows in 1usize..9, cols in 1usize..9, r in 1usize..5, seed in any::<u64>()) {
        // Product of random factors, so rank deficiency is common.
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a: Vec<Vec<i64>> = (0..rows).map(|_| (0..r).map(|_| rng.gen_range(-5..=5)).collect()).collect();
        let b: Vec<Vec<i64>> = (0..r).map(|_| (0..cols).map(|_| rng.gen_range(-5..=5)).collect()).collect();
        let m: Vec<Vec<i64>> = a.iter().map(|x| (0..cols).map(|j| (0..r).map(|k| x[k] * b[k][j]).sum()).collect()).collect();
        let mat = RationalMatrix::from_i64_rows(&m);
        let q: Vec<Vec<BigRational>> = m.iter().map(|x| x.iter().map(|&y| BigRational::from_integer(y.into())).collect()).collect();
        let truth = oracle_rank(&q);
        let exact = rank(&mat, RankMode::Exact);
        let modular = rank(&mat, RankMode::Modular { seed });
        prop_assert_eq!(exact.rank_lower_bound, truth);
        prop_assert!(modular.rank_lower_bound <= truth);
        prop_assert!(modular.verify(&mat));
        let right = kernel_basis(&mat, Side::Right);
        prop_assert_eq!(right.len(), cols - truth);
        for v in &right {
            prop_assert!(mat.mul_vec(v).iter().all(Zero::is_zero));
        }
        let left = kernel_basis(&mat, Side::Left);
        prop_assert_eq!(left.len(), rows - truth);
        for v in &left {
            prop_assert!(mat.transpose().mul_vec(v).iter().all(Zero::is_zero));
        }
    }

    #[test]
    fn rigidity_matrix_identities(n in 3usize..9, d in 2usize..4, p in 0.3f64..1.0, coord in 1i64..4, seed in any::<u64>()) {
        prop_assume!(n > d);
        let f = random_framework(n, d, p, coord, seed);
        let ne = f.graph().edges().len();
        prop_assume!(ne > 0);
        let m = rigidity_matrix(&f);
        prop_assert_eq!((m.rows(), m.cols()), (d * n, ne));
        let truth = oracle_framework_rank(&f);
        let left = kernel_basis(&m, Side::Left);
        let right = kernel_basis(&m, Side::Right);
        prop_assert_eq!(left.len() + truth, d * n);
        prop_assert_eq!(right.len() + truth, ne);
        if f.affine_span_dim() == d {
            prop_assert!(truth <= required_rank(n, d));
        }
        let rep = is_infinitesimally_rigid(&f).unwrap();
        prop_assert_eq!(rep.rigid, rep.witness.is_none());
        if let Some(w) = &rep.witness {
            prop_assert!(w.verify(&f));
            for &[a, b] in f.graph().edges() {
                prop_assert!(pair_holds(&f, &w.velocities, a, b));
            }
            if let Some((a, b)) = w.violated_pair {
                prop_assert!(!pair_holds(&f, &w.velocities, a, b));
            } else {
                prop_assert!(rep.degenerate_span);
            }
        } else {
            prop_assert_eq!(truth, required_rank(n, d));
        }
        for s in stress_basis(&f) {
            prop_assert!(s.verify(&f));
        }
    }
}

#[test]
fn spheres_always_have_a_reducible_vertex() {
    for seed in 0..200 {
        let n = 5 + (seed as usize * 7) % 150;
        let c = random_sphere(n, seed).unwrap();
        let (v, u) = find_reducible_vertex(&c, 5).expect("a sphere with n >= 5 reduces");
        assert!(c.degree(v) <= 5);
        assert!(link_condition(&c, v, u).is_ok());
    }
}

#[test]
fn generic_sphere_skeleta_are_rigid() {
    for seed in 0..50u64 {
        let n = 5 + (seed as usize * 13) % 96;
        let c = random_sphere(n, seed).unwrap();
        let a = generate_locations(n, 3, seed + 1000);
        let pts: BTreeMap<Vertex, Vec<i64>> = c.vertices().iter().copied().zip(a.points).collect();
        let f = framework(&Graph::from_complex(&c), 3, &pts);
        let rep = is_infinitesimally_rigid(&f).unwrap();
        assert!(rep.rigid, "n = {n}, seed = {seed}");
        assert_eq!(rep.rank, 3 * n - 6);
        assert!(rep.certificate.verify(&rigidity_matrix(&f)));
        assert!(stress_basis(&f).is_empty());
    }
}

#[test]
fn sphere76_placement_invariants() {
    let a = generate_locations(76, 3, 99);
    for seed in 0..6u64 {
        let n = 80 + 20 * seed as usize;
        let c = random_sphere(n, seed).unwrap();
        let r = place(&c, &a, PlaceStrategy::Sphere76, seed).unwrap();
        // Degree at reinsertion, as recorded by the schedule.
        let steps = reduction_schedule(&c, 5, Some(76)).steps;
        let deg: BTreeMap<Vertex, usize> = steps.iter().map(|s| (s.removed, s.degree)).collect();
        assert_eq!(r.avoidance_sizes.len(), deg.len());
        for (&v, &size) in &r.avoidance_sizes {
            let d = deg[&v];
            assert!((3..=5).contains(&d));
            assert!(size <= 4 * d, "vertex {v} of degree {d} avoids {size}");
        }
        assert!(r.max_failures() < 56);
        assert!(check_condition_c(&c, &r.assignment, ConditionMode::C).ok);
        let again = certify_placement(&c, &a, &r.assignment, ConditionMode::C, seed + 1).unwrap();
        assert!(again.rigid && again.condition_ok);
        assert_eq!(again.rank, 3 * n - 6);
        assert!(r.assignment.values().all(|&i| i < a.len()));
    }
}

#[test]
fn perturbed_stacked_vertex_is_flexible() {
    let c = stacked_sphere(30, 3).unwrap();
    let a = generate_locations(4, 3, 5);
    let r = place(&c, &a, PlaceStrategy::Stacked, 0).unwrap();
    let v = *c.vertices().iter().rev().find(|&&v| c.degree(v) == 3).unwrap();
    let mut bad = r.assignment.clone();
    bad.insert(v, r.assignment[&c.neighbors(v)[0]]);
    let cert = certify_placement(&c, &a, &bad, ConditionMode::None, 0).unwrap();
    assert!(!cert.rigid);
    let w = cert.witness.unwrap();
    let pts = points_from(&bad, &a.points);
    assert!(w.verify(&framework(&Graph::from_complex(&c), 3, &pts)));
}

#[test]
fn laman_augmentation_stays_generically_rigid() {
    let k3 = Graph::new(0..3, [(0, 1), (1, 2), (0, 2)]).unwrap();
    let mut bases = vec![k3];
    bases.extend((0..10).map(|s| random_laman_graph(6 + s as usize % 5, s).unwrap()));
    for (i, g) in bases.iter().enumerate() {
        let inst = laman_counterexample(g, 2, i as u64).unwrap();
        let gp = &inst.augmented;
        assert_eq!(gp.edges().len(), 2 * gp.num_vertices() - 3);
        let a = generate_locations(gp.num_vertices(), 2, 77 + i as u64);
        let pts: BTreeMap<Vertex, Vec<i64>> = gp.vertices().iter().copied().zip(a.points).collect();
        let rep = is_infinitesimally_rigid(&framework(gp, 2, &pts)).unwrap();
        assert!(rep.rigid);
        assert_eq!(rep.rank, gp.edges().len());
        for (pair, &w) in &inst.apex_index {
            assert_eq!(&gp.neighbors(w), pair);
        }
    }
}

#[test]
fn collisions_give_witnesses_that_agree_with_rigidity() {
    let g = random_laman_graph(7, 21).unwrap();
    let inst = laman_counterexample(&g, 2, 0).unwrap();
    let gp = &inst.augmented;
    let a = generate_locations(6, 2, 8);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..100 {
        let assign: BTreeMap<Vertex, usize> = gp.vertices().iter().map(|&v| (v, rng.gen_range(0..a.len()))).collect();
        let f = framework(gp, 2, &points_from(&assign, &a.points));
        let w = collision_motion_witness(&f, &inst.apex_index).unwrap();
        assert!(w.verify(&f));
        assert_eq!(w.support().len(), 1);
        assert!(!is_infinitesimally_rigid(&f).unwrap().rigid);
    }
}

#[test]
fn minimal_cycle_collisions() {
    let inst = minimal_cycle_counterexample(&primitive("tetrahedron").unwrap(), 1).unwrap();
    let c = &inst.result;
    let r = c.minimal_cycle_check();
    assert!(r.is_cycle && r.is_minimal);
    assert!(r.generator.unwrap().iter().all(|x| !x.is_zero()));
    let g = Graph::from_complex(c);
    let a = generate_locations(6, 3, 4);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let triples: Vec<&Vec<Vertex>> = inst.apex_index.keys().collect();
    for _ in 0..100 {
        let t = triples[rng.gen_range(0..triples.len())];
        let spot = rng.gen_range(0..a.len());
        let assign: BTreeMap<Vertex, usize> =
            c.vertices().iter().map(|&v| (v, if t.contains(&v) { spot } else { rng.gen_range(0..a.len()) })).collect();
        let f = framework(&g, 3, &points_from(&assign, &a.points));
        let w = collision_motion_witness(&f, &inst.apex_index).unwrap();
        assert!(w.verify(&f));
        assert!(!is_infinitesimally_rigid(&f).unwrap().rigid);
    }
}

#[test]
fn condition_c_violation_is_local() {
    // Two vertices of one triangle on one location violate every mode but none.
    let c = primitive("octahedron").unwrap();
    let mut assign: BTreeMap<Vertex, usize> = c.vertices().iter().map(|&v| (v, v as usize)).collect();
    let [x, y, _] = c.triangles()[0];
    assign.insert(y, assign[&x]);
    for mode in [ConditionMode::C, ConditionMode::CPrime, ConditionMode::CDoublePrime] {
        assert!(!check_condition_c(&c, &assign, mode).ok);
    }
    assert!(check_condition_c(&c, &assign, ConditionMode::None).ok);
    let used: BTreeSet<usize> = assign.values().copied().collect();
    assert_eq!(used.len(), 5);
}

#[test]
fn condition_holds_at_every_stage_of_the_replay() {
    // Degree-5 splits compress the target's link; the condition must survive them.
    let a = generate_locations(76, 3, 99);
    for seed in 0..8u64 {
        let n = 90 + 15 * seed as usize;
        let c = random_sphere(n, seed).unwrap();
        let r = place(&c, &a, PlaceStrategy::Sphere76, seed).unwrap();
        let s = reduction_schedule(&c, 5, Some(76));
        let mut cur = s.base.clone();
        for st in s.steps.iter().rev() {
            cur = vertex_split(&cur, st).unwrap();
            let rep = check_condition_c(&cur, &r.assignment, ConditionMode::C);
            assert!(rep.ok, "seed {seed}, after inserting {}: {:?}", st.removed, rep.violating_disc);
        }
    }
}
