//! Burning test, burning bijection with spanning trees, the sandpile group,
//! and the mass generating function.

use crate::error::{invalid, too_big, Result, SandlabError};
use crate::graphcore::SinkedMultigraph;
use crate::sandpile::{is_stable, max_stable, stabilize, Config};
use serde::{Deserialize, Serialize};

/// Spanning tree oriented towards the sink. `edge[x]` indexes the out-edge
/// list of x; `parent[x]` is its head (the sink has id n).
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SpanningTree {
    pub parent: Vec<usize>,
    pub edge: Vec<usize>,
    pub burn_time: Vec<u32>,
}

impl SpanningTree {
    /// Builds from out-edge indices, computing depths. Fails on cycles.
    pub fn from_edges(g: &SinkedMultigraph, edge: Vec<usize>) -> Result<SpanningTree> {
        let n = g.len();
        if edge.len() != n {
            return invalid("tree needs one edge per vertex");
        }
        let mut parent = Vec::with_capacity(n);
        for (x, &e) in edge.iter().enumerate() {
            let heads = g.out_heads(x);
            if e >= heads.len() {
                return invalid(format!("edge index {e} out of range at {x}"));
            }
            parent.push(heads[e]);
        }
        let burn_time = depths(&parent, n)?;
        Ok(SpanningTree { parent, edge, burn_time })
    }

    /// Parallel-copy index of the tree edge at x among edges x→parent(x).
    pub fn copy_index(&self, g: &SinkedMultigraph, x: usize) -> usize {
        self.edge[x] - g.first_edge_to(x, self.parent[x]).unwrap()
    }

    /// Descendants of the vertex set q (q included).
    pub fn descendants(&self, q: &[usize]) -> Vec<usize> {
        let n = self.parent.len();
        let mut mark = vec![0u8; n]; // 0 unknown, 1 yes, 2 no
        for &v in q {
            mark[v] = 1;
        }
        let mut out = Vec::new();
        for x in 0..n {
            let mut path = Vec::new();
            let mut y = x;
            let verdict = loop {
                if y == n {
                    break 2;
                }
                if mark[y] != 0 {
                    break mark[y];
                }
                path.push(y);
                y = self.parent[y];
            };
            for v in path {
                mark[v] = verdict;
            }
            if mark[x] == 1 {
                out.push(x);
            }
        }
        out
    }
}

fn depths(parent: &[usize], n: usize) -> Result<Vec<u32>> {
    let mut depth = vec![0u32; n];
    let mut state = vec![0u8; n]; // 0 new, 1 on stack, 2 done
    for x in 0..n {
        if state[x] == 2 {
            continue;
        }
        let mut path = Vec::new();
        let mut y = x;
        while y != n && state[y] != 2 {
            if state[y] == 1 {
                return invalid("parent map contains a cycle");
            }
            state[y] = 1;
            path.push(y);
            y = parent[y];
        }
        let mut d = if y == n { 0 } else { depth[y] };
        for &v in path.iter().rev() {
            d += 1;
            depth[v] = d;
            state[v] = 2;
        }
    }
    Ok(depth)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BurnRecord {
    pub rounds: Vec<Vec<usize>>,
    pub unburnt: Vec<usize>,
}

/// Synchronous burning rounds B_t = {x ∈ U_{t-1} : η(x) ≥ deg_{U_{t-1}}(x)}.
pub fn burning_test(g: &SinkedMultigraph, eta: &[i64]) -> Result<(bool, BurnRecord)> {
    if eta.len() != g.len() {
        return invalid("configuration length mismatch");
    }
    if !is_stable(g, eta) || eta.iter().any(|&h| h < 0) {
        return Err(SandlabError::Precondition("burning test needs a stable configuration".into()));
    }
    let (rounds, burnt) = burn_rounds(g, eta, &vec![false; g.len()], &[]);
    let unburnt: Vec<usize> = (0..g.len()).filter(|&x| !burnt[x]).collect();
    Ok((unburnt.is_empty(), BurnRecord { rounds, unburnt }))
}

/// Runs burning rounds. `blocked` vertices never burn; `already` are burnt at the start.
fn burn_rounds(
    g: &SinkedMultigraph,
    eta: &[i64],
    blocked: &[bool],
    already: &[usize],
) -> (Vec<Vec<usize>>, Vec<bool>) {
    let n = g.len();
    let mut burnt = vec![false; n];
    // unburnt non-sink edges at each vertex
    let mut cnt: Vec<i64> = (0..n).map(|x| (g.deg(x) - g.sink_edges(x)) as i64).collect();
    let mark = |v: usize, cnt: &mut Vec<i64>, burnt: &mut Vec<bool>| {
        burnt[v] = true;
        let (ns, ms) = g.neighbor_slices(v);
        for (&y, &m) in ns.iter().zip(ms) {
            if y < n {
                cnt[y] -= m as i64;
            }
        }
    };
    for &v in already {
        mark(v, &mut cnt, &mut burnt);
    }
    let mut rounds = Vec::new();
    let mut cand: Vec<usize> = (0..n).collect();
    let mut seen = vec![0usize; n];
    let mut round_no = 0;
    loop {
        round_no += 1;
        let b: Vec<usize> =
            cand.iter().copied().filter(|&x| !burnt[x] && !blocked[x] && eta[x] >= cnt[x]).collect();
        if b.is_empty() {
            break;
        }
        cand.clear();
        for &v in &b {
            mark(v, &mut cnt, &mut burnt);
        }
        for &v in &b {
            let (ns, _) = g.neighbor_slices(v);
            for &y in ns {
                if y < n && !burnt[y] && seen[y] != round_no {
                    seen[y] = round_no;
                    cand.push(y);
                }
            }
        }
        cand.sort_unstable();
        rounds.push(b);
    }
    (rounds, burnt)
}

pub fn is_recurrent(g: &SinkedMultigraph, eta: &[i64]) -> bool {
    eta.len() == g.len()
        && is_stable(g, eta)
        && eta.iter().all(|&h| h >= 0)
        && burn_rounds(g, eta, &vec![false; g.len()], &[]).1.iter().all(|&b| b)
}

/// Number of stable configurations, or None on overflow.
pub fn stable_count(g: &SinkedMultigraph) -> Option<u64> {
    g.degrees().iter().try_fold(1u64, |acc, &d| acc.checked_mul(d as u64))
}

/// All recurrent configurations in lexicographic order (vertex 0 most significant).
pub fn enumerate_recurrent(g: &SinkedMultigraph) -> Result<Vec<Config>> {
    match stable_count(g) {
        Some(c) if c <= 10_000_000 => {}
        _ => return too_big("recurrent enumeration limited to 1e7 stable states"),
    }
    let n = g.len();
    let mut eta = vec![0i64; n];
    let mut out = Vec::new();
    loop {
        if is_recurrent(g, &eta) {
            out.push(eta.clone());
        }
        let mut k = n;
        loop {
            if k == 0 {
                return Ok(out);
            }
            k -= 1;
            eta[k] += 1;
            if eta[k] < g.deg(k) as i64 {
                break;
            }
            eta[k] = 0;
        }
    }
}

/// Burning bijection φ: recurrent configuration ↦ spanning tree.
pub fn bijection_to_tree(g: &SinkedMultigraph, eta: &[i64]) -> Result<SpanningTree> {
    let (ok, rec) = burning_test(g, eta)?;
    if !ok {
        return invalid("configuration is not recurrent");
    }
    let n = g.len();
    let mut time = vec![0u32; n + 1];
    for (t, b) in rec.rounds.iter().enumerate() {
        for &x in b {
            time[x] = t as u32 + 1;
        }
    }
    let mut edge = vec![0usize; n];
    for x in 0..n {
        edge[x] = choose_edge(g, x, eta[x], &time, time[x])?;
    }
    SpanningTree::from_edges(g, edge)
}

/// Picks f_i from F_x (edges to vertices burnt exactly at t-1) with i = η(x) − deg + m_x.
fn choose_edge(g: &SinkedMultigraph, x: usize, h: i64, time: &[u32], t: u32) -> Result<usize> {
    let heads = g.out_heads(x);
    let m = heads.iter().filter(|&&y| time[y] < t).count() as i64;
    let i = h - g.deg(x) as i64 + m;
    let f: Vec<usize> = (0..heads.len()).filter(|&k| time[heads[k]] + 1 == t).collect();
    if i < 0 || i as usize >= f.len() {
        return Err(SandlabError::Internal(format!("edge rule out of range at {x}")));
    }
    Ok(f[i as usize])
}

/// φ⁻¹: burn time = tree depth, height = deg − m_x + (position of the tree edge in F_x).
pub fn tree_to_sandpile(g: &SinkedMultigraph, tree: &SpanningTree) -> Config {
    (0..g.len()).map(|x| height_from_tree(g, tree, x)).collect()
}

/// Height at a single vertex x of the configuration `tree_to_sandpile` produces.
pub fn height_from_tree(g: &SinkedMultigraph, tree: &SpanningTree, x: usize) -> i64 {
    let n = g.len();
    let t = |y: usize| if y == n { 0 } else { tree.burn_time[y] };
    let tx = tree.burn_time[x];
    let mut m = 0i64;
    let mut i = 0i64;
    for (k, &y) in g.out_heads(x).iter().enumerate() {
        let ty = t(y);
        if ty < tx {
            m += 1;
            if ty + 1 == tx && k < tree.edge[x] {
                i += 1;
            }
        }
    }
    g.deg(x) as i64 - m + i
}

/// Two-phase burning: phase I burns without ever burning Q; phase II restarts
/// from everything burnt so far. Returns the tree and W, the phase II set.
pub fn anchored_bijection(g: &SinkedMultigraph, eta: &[i64], q: &[usize]) -> Result<(SpanningTree, Vec<usize>)> {
    if !is_recurrent(g, eta) {
        return invalid("configuration is not recurrent");
    }
    let n = g.len();
    let mut blocked = vec![false; n];
    for &v in q {
        if v >= n {
            return invalid(format!("vertex {v} out of range"));
        }
        blocked[v] = true;
    }
    let (r1, burnt1) = burn_rounds(g, eta, &blocked, &[]);
    let phase1: Vec<usize> = (0..n).filter(|&x| burnt1[x]).collect();
    let (r2, burnt2) = burn_rounds(g, eta, &vec![false; n], &phase1);
    if burnt2.iter().any(|&b| !b) {
        return Err(SandlabError::Internal("phase II did not burn everything".into()));
    }
    // times: phase I rounds 1..=T1, phase II rounds start at T1+1 with the whole
    // phase I set acting as the previous round
    let mut time = vec![0u32; n + 1];
    for (t, b) in r1.iter().enumerate() {
        for &x in b {
            time[x] = t as u32 + 1;
        }
    }
    let t1 = r1.len() as u32;
    let mut edge = vec![0usize; n];
    for x in 0..n {
        if burnt1[x] {
            edge[x] = choose_edge(g, x, eta[x], &time, time[x])?;
        }
    }
    // phase II: previous-round set for the first round is all of phase I plus s
    let mut prev_set = vec![false; n + 1];
    prev_set[n] = true;
    for &x in &phase1 {
        prev_set[x] = true;
    }
    let mut done = prev_set.clone();
    for b in &r2 {
        for &x in b {
            let heads = g.out_heads(x);
            let m = heads.iter().filter(|&&y| done[y]).count() as i64;
            let i = eta[x] - g.deg(x) as i64 + m;
            let f: Vec<usize> = (0..heads.len()).filter(|&k| prev_set[heads[k]]).collect();
            if i < 0 || i as usize >= f.len() {
                return Err(SandlabError::Internal(format!("anchored edge rule out of range at {x}")));
            }
            edge[x] = f[i as usize];
        }
        prev_set = vec![false; n + 1];
        for &x in b {
            prev_set[x] = true;
            done[x] = true;
        }
    }
    let _ = t1;
    let tree = SpanningTree::from_edges(g, edge)?;
    let w: Vec<usize> = (0..n).filter(|&x| !burnt1[x]).collect();
    Ok((tree, w))
}

/// ε = δ − δ° where δ(x) = deg(x).
fn epsilon(g: &SinkedMultigraph) -> Result<Config> {
    let delta: Config = g.degrees().iter().map(|&d| d as i64).collect();
    let (ds, _) = stabilize(g, &delta)?;
    Ok(delta.iter().zip(&ds).map(|(a, b)| a - b).collect())
}

/// Smallest k with k·ε − offset ≥ η^max componentwise.
fn scale_k(g: &SinkedMultigraph, eps: &[i64], offset: &[i64]) -> i64 {
    let mx = max_stable(g);
    (0..g.len()).map(|x| (mx[x] + offset[x] + eps[x] - 1) / eps[x]).max().unwrap_or(0).max(0)
}

pub fn group_identity(g: &SinkedMultigraph) -> Result<Config> {
    let eps = epsilon(g)?;
    let k = scale_k(g, &eps, &vec![0; g.len()]);
    let x: Config = eps.iter().map(|e| k * e).collect();
    Ok(stabilize(g, &x)?.0)
}

fn require_recurrent(g: &SinkedMultigraph, eta: &[i64]) -> Result<()> {
    if !is_recurrent(g, eta) {
        return invalid("operand is not recurrent");
    }
    Ok(())
}

pub fn group_add(g: &SinkedMultigraph, eta: &[i64], xi: &[i64]) -> Result<Config> {
    require_recurrent(g, eta)?;
    require_recurrent(g, xi)?;
    let s: Config = eta.iter().zip(xi).map(|(a, b)| a + b).collect();
    Ok(stabilize(g, &s)?.0)
}

pub fn group_inverse(g: &SinkedMultigraph, eta: &[i64]) -> Result<Config> {
    require_recurrent(g, eta)?;
    let eps = epsilon(g)?;
    let k = scale_k(g, &eps, eta);
    let x: Config = eps.iter().zip(eta).map(|(e, h)| k * e - h).collect();
    Ok(stabilize(g, &x)?.0)
}

/// Number of distinct group elements reached by repeatedly adding η to the identity.
pub fn element_order(g: &SinkedMultigraph, eta: &[i64]) -> Result<u64> {
    let id = group_identity(g)?;
    let mut cur = eta.to_vec();
    let mut k = 1;
    while cur != id {
        cur = group_add(g, &cur, eta)?;
        k += 1;
    }
    Ok(k)
}

/// Undirected edge list (a < b, sink = n) with parallel copies repeated.
pub fn edge_list(g: &SinkedMultigraph) -> Vec<(usize, usize)> {
    let mut e = Vec::new();
    for x in 0..g.len() {
        for (y, m) in g.neighbors(x) {
            if y > x {
                for _ in 0..m {
                    e.push((x, y));
                }
            }
        }
    }
    e
}

/// N(y) = Σ_m N_m y^m over recurrent masses; entry m of the result is N_m.
pub fn mass_generating_function(g: &SinkedMultigraph) -> Result<Vec<u64>> {
    let rec = enumerate_recurrent(g)?;
    let mut c = Vec::new();
    for eta in rec {
        let m: i64 = eta.iter().sum();
        if c.len() <= m as usize {
            c.resize(m as usize + 1, 0);
        }
        c[m as usize] += 1;
    }
    Ok(c)
}

/// H(v) = Σ over connected spanning edge subsets E′ of v^{|E′| − |V|}; entry k is the coefficient of v^k.
pub fn connected_subgraph_poly(g: &SinkedMultigraph) -> Result<Vec<i64>> {
    let edges = edge_list(g);
    let e = edges.len();
    if e > 20 {
        return too_big("connected subgraph enumeration limited to 20 edges");
    }
    let n = g.len();
    let mut c = vec![0i64; e + 1 - n];
    let mut uf = vec![0usize; n + 1];
    for mask in 0u32..(1u32 << e) {
        let k = mask.count_ones() as usize;
        if k < n {
            continue;
        }
        for (i, v) in uf.iter_mut().enumerate() {
            *v = i;
        }
        let mut comps = n + 1;
        for (i, &(a, b)) in edges.iter().enumerate() {
            if mask >> i & 1 == 1 {
                let (ra, rb) = (find(&mut uf, a), find(&mut uf, b));
                if ra != rb {
                    uf[ra] = rb;
                    comps -= 1;
                }
            }
        }
        if comps == 1 {
            c[k - n] += 1;
        }
    }
    Ok(c)
}

fn find(uf: &mut [usize], mut a: usize) -> usize {
    while uf[a] != a {
        uf[a] = uf[uf[a]];
        a = uf[a];
    }
    a
}

/// Acyclic orientations of G whose unique sink is s. Parallel edges must agree.
pub fn acyclic_orientation_count(g: &SinkedMultigraph) -> Result<u64> {
    let n = g.len();
    let mut simple = Vec::new();
    for x in 0..n {
        for (y, _) in g.neighbors(x) {
            if y > x {
                simple.push((x, y));
            }
        }
    }
    if simple.len() > 24 {
        return too_big("orientation enumeration limited to 24 simple edges");
    }
    let mut count = 0;
    for mask in 0u32..(1u32 << simple.len()) {
        let mut out: Vec<Vec<usize>> = vec![Vec::new(); n + 1];
        for (i, &(a, b)) in simple.iter().enumerate() {
            if mask >> i & 1 == 1 {
                out[a].push(b);
            } else {
                out[b].push(a);
            }
        }
        if !out[n].is_empty() || (0..n).any(|x| out[x].is_empty()) {
            continue;
        }
        if is_dag(&out) {
            count += 1;
        }
    }
    Ok(count)
}

fn is_dag(out: &[Vec<usize>]) -> bool {
    let n = out.len();
    let mut indeg = vec![0; n];
    for l in out {
        for &y in l {
            indeg[y] += 1;
        }
    }
    let mut st: Vec<usize> = (0..n).filter(|&x| indeg[x] == 0).collect();
    let mut seen = 0;
    while let Some(x) = st.pop() {
        seen += 1;
        for &y in &out[x] {
            indeg[y] -= 1;
            if indeg[y] == 0 {
                st.push(y);
            }
        }
    }
    seen == n
}

/// y^{|E| − deg(s)} H(y − 1) as integer coefficients.
pub fn merino_rhs(g: &SinkedMultigraph) -> Result<Vec<i64>> {
    let h = connected_subgraph_poly(g)?;
    // substitute v = y − 1
    let mut p = vec![0i64; h.len()];
    let mut binom_row = vec![1i64];
    for (k, &hk) in h.iter().enumerate() {
        if k > 0 {
            let mut next = vec![0i64; k + 1];
            for j in 0..k {
                next[j] -= binom_row[j];
                next[j + 1] += binom_row[j];
            }
            binom_row = next;
        }
        // (y − 1)^k coefficients in binom_row
        for (j, &b) in binom_row.iter().enumerate() {
            p[j] += hk * b;
        }
    }
    let shift = (g.edge_count() - g.deg_sink()) as usize;
    let mut out = vec![0i64; shift];
    out.extend(p);
    while out.last() == Some(&0) {
        out.pop();
    }
    Ok(out)
}

/// H(−1).
pub fn h_at_minus_one(h: &[i64]) -> i64 {
    h.iter().enumerate().map(|(k, &c)| if k % 2 == 0 { c } else { -c }).sum()
}
