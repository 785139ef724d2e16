mod common;

use common::{line, random_graph};
use num_rational::BigRational;
use num_traits::{One, Zero};
use proptest::prelude::*;
use sandlab::algebra::{
    bijection_to_tree, burning_test, edge_list, enumerate_recurrent, group_add, group_identity, group_inverse,
    is_recurrent, stable_count, tree_to_sandpile,
};
use sandlab::graphcore::{box_graph, count_spanning_trees_brute, SinkedMultigraph};
use sandlab::rng::rng;
use sandlab::rotor::{enumerate_acyclic, group_action, is_acyclic};
use sandlab::sandpile::{add, max_stable, stabilize, stabilize_random_order, wave_decompose};
use sandlab::treewalk::{enumerate_spanning_trees, loop_erase, tree_event_probability, wilson_ust, Edge, TransferCurrent};
use std::collections::{HashMap, HashSet};

fn graph(seed: u64, n: usize) -> SinkedMultigraph {
    random_graph(n, 0.5, 2, &mut rng(seed))
}

fn simple_graph(seed: u64, n: usize) -> SinkedMultigraph {
    random_graph(n, 0.5, 1, &mut rng(seed))
}

fn config(g: &SinkedMultigraph, seed: u64, top: i64) -> Vec<i64> {
    use rand::Rng as _;
    let mut r = rng(seed ^ 0x5eed);
    (0..g.len()).map(|_| r.gen_range(0..=top)).collect()
}

fn random_recurrent(g: &SinkedMultigraph, seed: u64) -> Vec<i64> {
    let xi = config(g, seed, 3);
    let top: Vec<i64> = max_stable(g).iter().zip(&xi).map(|(a, b)| a + b).collect();
    stabilize(g, &top).unwrap().0
}

/// Ampleness: every nonempty F ⊆ V has some x with η(x) ≥ edges from x into F.
fn ample(g: &SinkedMultigraph, eta: &[i64]) -> bool {
    let n = g.len();
    (1u32..(1 << n)).all(|f| {
        (0..n).filter(|&x| f >> x & 1 == 1).any(|x| {
            let inside: u32 = g.neighbors(x).iter().filter(|&&(y, _)| y < n && f >> y & 1 == 1).map(|&(_, m)| m).sum();
            eta[x] >= inside as i64
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn matrix_tree(seed in any::<u64>(), n in 1usize..=8) {
        let g = graph(seed, n);
        prop_assert_eq!(g.det_exact().unwrap(), count_spanning_trees_brute(&g).into());
    }

    #[test]
    fn laplacian_rows_and_green(seed in any::<u64>(), n in 1usize..=7) {
        let g = graph(seed, n);
        let l = g.reduced_laplacian();
        for x in 0..n {
            prop_assert_eq!(l[x].iter().sum::<i64>(), g.sink_edges(x) as i64);
        }
        prop_assert!((0..n).any(|x| g.sink_edges(x) > 0));
        let green = g.green_exact().unwrap();
        for i in 0..n {
            for j in 0..n {
                let s: BigRational = (0..n).map(|k| BigRational::from_integer(l[i][k].into()) * &green[k][j]).sum();
                prop_assert_eq!(s, if i == j { BigRational::one() } else { BigRational::zero() });
            }
        }
        let col = g.green_column(0).unwrap();
        let mut out = vec![0.0; n];
        g.laplacian_apply(&col, &mut out);
        for (k, v) in out.iter().enumerate() {
            let want = if k == 0 { 1.0 } else { 0.0 };
            prop_assert!((v - want).abs() < 1e-10);
        }
    }

    #[test]
    fn abelian_and_mass_accounting(seed in any::<u64>(), n in 1usize..=25) {
        let g = graph(seed, n);
        let xi = config(&g, seed, 6);
        let (fin, odo) = stabilize(&g, &xi).unwrap();
        let mut r = rng(seed);
        for _ in 0..20 {
            prop_assert_eq!(stabilize_random_order(&g, &xi, &mut r), (fin.clone(), odo.clone()));
        }
        let lost: i64 = (0..n).map(|x| odo[x] as i64 * g.sink_edges(x) as i64).sum();
        prop_assert_eq!(xi.iter().sum::<i64>(), fin.iter().sum::<i64>() + lost);
        prop_assert!(fin.iter().enumerate().all(|(x, &c)| c >= 0 && c < g.deg(x) as i64));
    }

    #[test]
    fn addition_operators_commute(seed in any::<u64>(), n in 1usize..=9) {
        let g = graph(seed, n);
        let eta: Vec<i64> = config(&g, seed, 8).iter().enumerate().map(|(x, &c)| c % g.deg(x) as i64).collect();
        for x in 0..n {
            for y in 0..n {
                let a = add(&g, &add(&g, &eta, x).unwrap().0, y).unwrap().0;
                let b = add(&g, &add(&g, &eta, y).unwrap().0, x).unwrap().0;
                prop_assert_eq!(a, b);
            }
        }
    }

    #[test]
    fn waves_partition_the_avalanche(seed in any::<u64>(), n in 1usize..=16) {
        let g = graph(seed, n);
        let eta = random_recurrent(&g, seed);
        let x = (seed % n as u64) as usize;
        let (h1, rep) = add(&g, &eta, x).unwrap();
        let (h2, wrep) = wave_decompose(&g, &eta, x).unwrap();
        prop_assert_eq!(h1, h2);
        let mut sum = vec![0u64; n];
        for w in &wrep.waves {
            for &v in w {
                prop_assert!(rep.odometer[v] > 0);
                sum[v] += 1;
            }
        }
        prop_assert_eq!(sum, rep.odometer);
    }

    #[test]
    fn burning_matches_ampleness(seed in any::<u64>(), n in 1usize..=6) {
        let g = graph(seed, n);
        let eta: Vec<i64> = config(&g, seed, 8).iter().enumerate().map(|(x, &c)| c % g.deg(x) as i64).collect();
        let (ok, rec) = burning_test(&g, &eta).unwrap();
        prop_assert_eq!(ok, ample(&g, &eta));
        prop_assert_eq!(ok, rec.unburnt.is_empty());
        let mut seen = HashSet::new();
        for round in &rec.rounds {
            for &v in round {
                prop_assert!(seen.insert(v));
            }
        }
    }

    #[test]
    fn group_laws_on_random_triples(seed in any::<u64>()) {
        let g = box_graph(2, 1);
        let a = random_recurrent(&g, seed);
        let b = random_recurrent(&g, seed.wrapping_add(1));
        let c = random_recurrent(&g, seed.wrapping_add(2));
        let id = group_identity(&g).unwrap();
        let ab = group_add(&g, &a, &b).unwrap();
        prop_assert!(is_recurrent(&g, &ab));
        prop_assert_eq!(&ab, &group_add(&g, &b, &a).unwrap());
        prop_assert_eq!(group_add(&g, &ab, &c).unwrap(), group_add(&g, &a, &group_add(&g, &b, &c).unwrap()).unwrap());
        prop_assert_eq!(&group_add(&g, &a, &id).unwrap(), &a);
        prop_assert_eq!(group_add(&g, &a, &group_inverse(&g, &a).unwrap()).unwrap(), id);
    }

    #[test]
    fn bijection_round_trip(seed in any::<u64>(), n in 1usize..=12) {
        let g = graph(seed, n);
        let eta = random_recurrent(&g, seed);
        let t = bijection_to_tree(&g, &eta).unwrap();
        prop_assert_eq!(tree_to_sandpile(&g, &t), eta);
        for x in 0..n {
            // parents reach the sink, depth is tree distance
            let mut y = x;
            let mut steps = 0;
            while y != n {
                y = t.parent[y];
                steps += 1;
                prop_assert!(steps <= n);
            }
            prop_assert_eq!(steps as u32, t.burn_time[x]);
        }
    }

    #[test]
    fn rotor_action_preserves_acyclicity(seed in any::<u64>(), n in 1usize..=6) {
        let g = graph(seed, n);
        let acyc = enumerate_acyclic(&g).unwrap();
        let rho = &acyc[(seed % acyc.len() as u64) as usize];
        let eta = config(&g, seed, 7);
        let out = group_action(&g, &eta, rho).unwrap();
        prop_assert!(is_acyclic(&g, &out));
        let head: Vec<usize> = (0..n).map(|x| g.out_heads(x)[out[x]]).collect();
        prop_assert!(head.iter().enumerate().all(|(x, &h)| h != x));
    }

    #[test]
    fn loop_erasure_is_chronological(path in prop::collection::vec(0u8..6, 1..60)) {
        let erased = loop_erase(&path);
        let distinct: HashSet<_> = erased.iter().collect();
        prop_assert_eq!(distinct.len(), erased.len());
        prop_assert_eq!(erased.first(), path.first());
        prop_assert_eq!(erased.last(), path.last());
        // step-by-step reference: append, cut back to the earlier visit
        let mut reference: Vec<u8> = Vec::new();
        for (i, &v) in path.iter().enumerate() {
            if let Some(k) = reference.iter().position(|&u| u == v) {
                reference.truncate(k + 1);
            } else {
                reference.push(v);
            }
            prop_assert_eq!(&loop_erase(&path[..=i]), &reference);
        }
        prop_assert_eq!(erased, reference);
    }

    #[test]
    fn transfer_current_symmetry(seed in any::<u64>(), n in 2usize..=8) {
        let g = simple_graph(seed, n);
        let edges: Vec<Edge> = edge_list(&g).into_iter().map(|(a, b)| Edge::new(a, b)).collect();
        let mut tc = TransferCurrent::new(&g);
        for &e in &edges {
            let yee = tc.y(e, e).unwrap();
            prop_assert!((-1e-12..=1.0 + 1e-12).contains(&yee));
            let p = tree_event_probability(&g, &[e], &[]).unwrap();
            let q = tree_event_probability(&g, &[], &[e]).unwrap();
            prop_assert!((p + q - 1.0).abs() < 1e-10);
            for &f in &edges {
                // unit resistances: Y(e, f) = Y(f, e)
                prop_assert!((tc.y(e, f).unwrap() - tc.y(f, e).unwrap()).abs() < 1e-10);
            }
        }
    }
}

#[test]
fn permutation_property_exhaustive() {
    let mut r = rng(77);
    let mut graphs = vec![line(4, 0), line(3, 1), box_graph(2, 0)];
    while graphs.len() < 8 {
        let g = random_graph(2 + graphs.len() % 3, 0.5, 2, &mut r);
        if stable_count(&g).is_some_and(|c| c <= 4000) {
            graphs.push(g);
        }
    }
    for g in &graphs {
        let n = g.len();
        let mut eta = vec![0i64; n];
        loop {
            for x in 0..n {
                let ex = add(g, &eta, x).unwrap().0;
                for y in 0..x {
                    let ey = add(g, &eta, y).unwrap().0;
                    assert_eq!(add(g, &ex, y).unwrap().0, add(g, &ey, x).unwrap().0);
                }
            }
            let mut k = 0;
            while k < n {
                eta[k] += 1;
                if eta[k] < g.deg(k) as i64 {
                    break;
                }
                eta[k] = 0;
                k += 1;
            }
            if k == n {
                break;
            }
        }
    }
}

#[test]
fn bijection_injective_and_group_closed() {
    for g in [line(5, 0), line(4, 1), box_graph(2, 1)] {
        let rec = enumerate_recurrent(&g).unwrap();
        let trees: HashSet<_> = rec.iter().map(|e| bijection_to_tree(&g, e).unwrap().edge).collect();
        assert_eq!(trees.len(), rec.len());
        assert_eq!(g.det_exact().unwrap(), rec.len().into());
    }
    for n in 1..=6 {
        let g = line(n, 0);
        let rec = enumerate_recurrent(&g).unwrap();
        let id = group_identity(&g).unwrap();
        let order = rec.len();
        for a in &rec {
            assert_eq!(&group_add(&g, a, &id).unwrap(), a);
            for b in &rec {
                let ab = group_add(&g, a, b).unwrap();
                assert!(is_recurrent(&g, &ab));
                assert_eq!(ab, group_add(&g, b, a).unwrap());
            }
            // orbit of I under repeated ⊕a has size dividing |R|
            let mut x = id.clone();
            let mut k = 0;
            loop {
                x = group_add(&g, &x, a).unwrap();
                k += 1;
                if x == id {
                    break;
                }
            }
            assert_eq!(order % k, 0);
        }
    }
}

fn chi_square_critical(dof: f64) -> f64 {
    // Wilson-Hilferty at upper tail 10⁻³ (z = 3.0902)
    let c = 2.0 / (9.0 * dof);
    dof * (1.0 - c + 3.0902 * c.sqrt()).powi(3)
}

#[test]
fn wilson_is_uniform_on_small_graphs() {
    let mut r = rng(88);
    let mut tested = 0;
    let mut graphs = vec![line(3, 0), line(4, 0)];
    for _ in 0..200 {
        graphs.push(random_graph(1 + tested % 4, 0.5, 1, &mut r));
        tested += 1;
    }
    let mut used = 0;
    for g in graphs {
        let all = enumerate_spanning_trees(&g).unwrap();
        if all.len() < 2 || all.len() > 16 {
            continue;
        }
        let edges = edge_list(&g);
        let key = |set: &[usize]| {
            let mut v: Vec<(usize, usize)> = set.iter().map(|&i| edges[i]).collect();
            v.sort_unstable();
            v
        };
        let index: HashMap<Vec<(usize, usize)>, usize> = all.iter().enumerate().map(|(i, t)| (key(t), i)).collect();
        let samples = 400 * all.len();
        let mut counts = vec![0usize; all.len()];
        for _ in 0..samples {
            let t = wilson_ust(&g, &mut r);
            let mut v: Vec<(usize, usize)> = (0..g.len()).map(|x| (x.min(t.parent[x]), x.max(t.parent[x]))).collect();
            v.sort_unstable();
            counts[index[&v]] += 1;
        }
        let e = samples as f64 / all.len() as f64;
        let chi: f64 = counts.iter().map(|&c| (c as f64 - e).powi(2) / e).sum();
        assert!(chi < chi_square_critical((all.len() - 1) as f64), "chi² {chi} with {} trees", all.len());
        used += 1;
        if used == 12 {
            break;
        }
    }
    assert!(used >= 6);
}
