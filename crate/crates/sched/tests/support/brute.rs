//! Exhaustive reference solver for tiny instances. Shares no code with the
//! crate: it enumerates every agent partition (agents are identical, so
//! partitions are restricted-growth strings) and every task order on each
//! agent, then computes earliest starts by longest path over the combined
//! precedence graph.

#![allow(dead_code)]

pub fn brute_makespan(
    durations: &[u64],
    edges: &[(usize, usize, u64)],
    agents: usize,
    setup: u64,
) -> u64 {
    let n = durations.len();
    if n == 0 {
        return 0;
    }
    let mut best = u64::MAX;
    let mut assign = vec![0usize; n];
    partitions(0, 0, agents, &mut assign, &mut |assign| {
        let groups: Vec<Vec<usize>> = (0..agents)
            .map(|k| (0..n).filter(|&i| assign[i] == k).collect())
            .filter(|g: &Vec<usize>| !g.is_empty())
            .collect();
        orders(&groups, 0, &mut Vec::new(), &mut |seqs| {
            if let Some(m) = evaluate(durations, edges, setup, seqs) {
                best = best.min(m);
            }
        });
    });
    best
}

fn partitions(
    i: usize,
    used: usize,
    agents: usize,
    assign: &mut Vec<usize>,
    f: &mut dyn FnMut(&[usize]),
) {
    if i == assign.len() {
        f(assign);
        return;
    }
    for k in 0..agents.min(used + 1) {
        assign[i] = k;
        partitions(i + 1, used.max(k + 1), agents, assign, f);
    }
}

fn orders(
    groups: &[Vec<usize>],
    g: usize,
    acc: &mut Vec<Vec<usize>>,
    f: &mut dyn FnMut(&[Vec<usize>]),
) {
    if g == groups.len() {
        f(acc);
        return;
    }
    let mut perm = groups[g].clone();
    permute(&mut perm, 0, &mut |p| {
        acc.push(p.to_vec());
        orders(groups, g + 1, acc, f);
        acc.pop();
    });
}

fn permute(v: &mut Vec<usize>, k: usize, f: &mut dyn FnMut(&[usize])) {
    if k == v.len() {
        f(v);
        return;
    }
    for i in k..v.len() {
        v.swap(k, i);
        permute(v, k + 1, f);
        v.swap(k, i);
    }
}

/// Earliest-start makespan for fixed agent sequences, or `None` when the
/// sequences contradict the dependencies.
fn evaluate(
    durations: &[u64],
    edges: &[(usize, usize, u64)],
    setup: u64,
    seqs: &[Vec<usize>],
) -> Option<u64> {
    let n = durations.len();
    // (from, to, minimum gap after `from` ends)
    let mut arcs: Vec<(usize, usize, u64)> = edges.to_vec();
    for seq in seqs {
        for w in seq.windows(2) {
            arcs.push((w[0], w[1], setup));
        }
    }
    let mut start = vec![0u64; n];
    // Bellman-Ford style relaxation; more than n rounds of change means a cycle.
    for _ in 0..=n {
        let mut changed = false;
        for &(u, v, d) in &arcs {
            let t = start[u] + durations[u] + d;
            if start[v] < t {
                start[v] = t;
                changed = true;
            }
        }
        if !changed {
            return Some((0..n).map(|i| start[i] + durations[i]).max().unwrap());
        }
    }
    None
}
