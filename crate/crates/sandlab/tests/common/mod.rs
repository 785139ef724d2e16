#![allow(dead_code)]

use rand::Rng as _;
use sandlab::graphcore::{wired_box, GridSpec, SinkedMultigraph};
use sandlab::rng::Rng;

/// Connected sinked multigraph on `n` non-sink vertices with multiplicities up to `max_mult`.
pub fn random_graph(n: usize, p: f64, max_mult: u32, rng: &mut Rng) -> SinkedMultigraph {
    loop {
        let mut edges = Vec::new();
        for a in 0..n {
            for b in a + 1..=n {
                if rng.gen::<f64>() < p {
                    edges.push((a, b, rng.gen_range(1..=max_mult)));
                }
            }
        }
        if let Ok(g) = SinkedMultigraph::from_edges(n, &edges) {
            return g;
        }
    }
}

pub fn line(n: i64, gamma: u32) -> SinkedMultigraph {
    wired_box(&GridSpec { dim: 1, lo: vec![1], hi: vec![n], gamma }).unwrap()
}

/// Small wired boxes in d = 1, 2 with and without dissipation, at most `max_v` vertices.
pub fn small_boxes(max_v: usize) -> Vec<SinkedMultigraph> {
    let mut out = Vec::new();
    for gamma in 0..=1 {
        for n in 1..=max_v as i64 {
            out.push(line(n, gamma));
        }
        for (a, b) in [(1, 1), (1, 2), (2, 2), (1, 3), (2, 3), (3, 3)] {
            if a * b <= max_v as i64 {
                out.push(wired_box(&GridSpec { dim: 2, lo: vec![1, 1], hi: vec![a, b], gamma }).unwrap());
            }
        }
    }
    out
}
