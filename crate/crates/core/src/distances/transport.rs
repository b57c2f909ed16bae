//! Small dense transportation problems, solved by successive shortest paths.

/// Optimal coupling of two distributions on `0..k` under a cost matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportPlan {
    /// Row-major `k x k` plan; row sums are `a`, column sums `b`.
    pub plan: Vec<f64>,
    pub cost: f64,
}

const NEGLIGIBLE: f64 = 1e-18;

struct Edge {
    to: usize,
    cap: f64,
    cost: f64,
}

/// Minimizes `sum_{ij} pi(i, j) cost[i k + j]` over couplings `pi` of `a` and
/// `b` (equal totals). Costs may be negative.
pub fn transport_min(a: &[f64], b: &[f64], cost: &[f64]) -> TransportPlan {
    let k = a.len();
    assert_eq!(b.len(), k, "marginals must have equal length");
    assert_eq!(cost.len(), k * k, "cost matrix must be k x k");
    let source = 2 * k;
    let sink = 2 * k + 1;
    let nodes = 2 * k + 2;
    let mut edges: Vec<Edge> = Vec::new();
    let mut adjacency: Vec<Vec<usize>> = vec![Vec::new(); nodes];
    let mut add = |edges: &mut Vec<Edge>, from: usize, to: usize, cap: f64, cost: f64| {
        adjacency[from].push(edges.len());
        edges.push(Edge { to, cap, cost });
        adjacency[to].push(edges.len());
        edges.push(Edge { to: from, cap: 0.0, cost: -cost });
    };
    for (i, &ai) in a.iter().enumerate() {
        add(&mut edges, source, i, ai, 0.0);
    }
    for (j, &bj) in b.iter().enumerate() {
        add(&mut edges, k + j, sink, bj, 0.0);
    }
    let first_arc = edges.len();
    for i in 0..k {
        for j in 0..k {
            add(&mut edges, i, k + j, f64::INFINITY, cost[i * k + j]);
        }
    }

    let mut dist = vec![0.0; nodes];
    let mut via = vec![usize::MAX; nodes];
    for _ in 0..4 * k * k + 8 {
        // Bellman-Ford over the residual graph; it has no negative cycles
        // because every augmentation follows a shortest path.
        dist.iter_mut().for_each(|d| *d = f64::INFINITY);
        via.iter_mut().for_each(|v| *v = usize::MAX);
        dist[source] = 0.0;
        for _ in 0..nodes {
            let mut changed = false;
            for u in 0..nodes {
                if dist[u] == f64::INFINITY {
                    continue;
                }
                for &e in &adjacency[u] {
                    let edge = &edges[e];
                    if edge.cap > NEGLIGIBLE && dist[u] + edge.cost < dist[edge.to] - 1e-15 {
                        dist[edge.to] = dist[u] + edge.cost;
                        via[edge.to] = e;
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        if dist[sink] == f64::INFINITY {
            break;
        }
        let mut amount = f64::INFINITY;
        let mut v = sink;
        while v != source {
            let e = via[v];
            amount = amount.min(edges[e].cap);
            v = edges[e ^ 1].to;
        }
        let mut v = sink;
        while v != source {
            let e = via[v];
            edges[e].cap -= amount;
            edges[e ^ 1].cap += amount;
            v = edges[e ^ 1].to;
        }
    }

    let mut plan = vec![0.0; k * k];
    for (idx, p) in plan.iter_mut().enumerate() {
        // flow on a forward arc is the capacity of its reverse twin
        *p = edges[first_arc + 2 * idx + 1].cap;
    }
    fill_leftover(a, b, &mut plan);
    let cost = plan.iter().zip(cost).map(|(p, c)| p * c).sum();
    TransportPlan { plan, cost }
}

/// Routes any supply left by rounding along the north-west corner rule.
fn fill_leftover(a: &[f64], b: &[f64], plan: &mut [f64]) {
    let k = a.len();
    let mut rows: Vec<f64> = (0..k).map(|i| (a[i] - plan[i * k..(i + 1) * k].iter().sum::<f64>()).max(0.0)).collect();
    let mut cols: Vec<f64> = (0..k)
        .map(|j| (b[j] - (0..k).map(|i| plan[i * k + j]).sum::<f64>()).max(0.0))
        .collect();
    let (mut i, mut j) = (0, 0);
    while i < k && j < k {
        let m = rows[i].min(cols[j]);
        plan[i * k + j] += m;
        rows[i] -= m;
        cols[j] -= m;
        if rows[i] <= cols[j] {
            i += 1;
        } else {
            j += 1;
        }
    }
}
