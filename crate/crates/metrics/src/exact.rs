//! Exact optimal transport on small supports.
//!
//! Solves the transportation linear program
//! `min Σ_ij c_ij f_ij  s.t.  Σ_j f_ij = a_i, Σ_i f_ij = b_j, f >= 0`
//! by successive shortest augmenting paths on the bipartite residual graph.
//! Intended for validating the production Wasserstein estimators on supports
//! of a few dozen points; complexity is roughly O((n m)^2).

const EPS: f64 = 1e-12;

/// Minimum transport cost between histograms `a` and `b` under `cost`,
/// where `cost[i][j]` is the unit cost of moving mass from `a[i]` to `b[j]`.
///
/// Histograms are normalized internally, so unnormalized counts are fine.
/// Costs must be non-negative.
pub fn min_cost_transport(cost: &[Vec<f64>], a: &[f64], b: &[f64]) -> f64 {
    let n = a.len();
    let m = b.len();
    assert_eq!(cost.len(), n, "cost rows must match a");
    assert!(cost.iter().all(|r| r.len() == m), "cost cols must match b");
    let sa: f64 = a.iter().sum();
    let sb: f64 = b.iter().sum();
    assert!(sa > 0.0 && sb > 0.0, "histograms must carry mass");

    let mut supply: Vec<f64> = a.iter().map(|v| v / sa).collect();
    let mut demand: Vec<f64> = b.iter().map(|v| v / sb).collect();
    let mut flow = vec![vec![0.0f64; m]; n];

    let max_augmentations = 4 * n * m + 16;
    for _round in 0..max_augmentations {
        if supply.iter().sum::<f64>() <= EPS {
            break;
        }
        // Bellman-Ford over suppliers (0..n) and consumers (n..n+m):
        // forward edges i -> n+j with cost c_ij, residual back edges
        // n+j -> i with cost -c_ij when f_ij > 0.
        let nm = n + m;
        let mut dist = vec![f64::INFINITY; nm];
        let mut prev: Vec<Option<usize>> = vec![None; nm];
        for (i, s) in supply.iter().enumerate() {
            if *s > EPS {
                dist[i] = 0.0;
            }
        }
        for _ in 0..nm {
            let mut changed = false;
            for i in 0..n {
                if !dist[i].is_finite() {
                    continue;
                }
                for j in 0..m {
                    let nd = dist[i] + cost[i][j];
                    if nd + EPS < dist[n + j] {
                        dist[n + j] = nd;
                        prev[n + j] = Some(i);
                        changed = true;
                    }
                }
            }
            for j in 0..m {
                if !dist[n + j].is_finite() {
                    continue;
                }
                for i in 0..n {
                    if flow[i][j] > EPS {
                        let nd = dist[n + j] - cost[i][j];
                        if nd + EPS < dist[i] {
                            dist[i] = nd;
                            prev[i] = Some(n + j);
                            changed = true;
                        }
                    }
                }
            }
            if !changed {
                break;
            }
        }

        // cheapest consumer that still needs mass
        let target = (0..m)
            .filter(|&j| demand[j] > EPS && dist[n + j].is_finite())
            .min_by(|&p, &q| dist[n + p].partial_cmp(&dist[n + q]).unwrap());
        let Some(tj) = target else {
            break; // numerically exhausted
        };

        // walk the path back to a supplier, collecting edges
        let mut path = Vec::new(); // (i, j, forward)
        let mut node = n + tj;
        let source = loop {
            match prev[node] {
                Some(p) if node >= n => {
                    path.push((p, node - n, true));
                    node = p;
                }
                Some(p) => {
                    path.push((node, p - n, false));
                    node = p;
                }
                None => break node,
            }
        };
        debug_assert!(source < n);

        let mut bottleneck = supply[source].min(demand[tj]);
        for (i, j, forward) in &path {
            if !forward {
                bottleneck = bottleneck.min(flow[*i][*j]);
            }
        }
        if bottleneck <= EPS {
            break;
        }
        for (i, j, forward) in &path {
            if *forward {
                flow[*i][*j] += bottleneck;
            } else {
                flow[*i][*j] -= bottleneck;
            }
        }
        supply[source] -= bottleneck;
        demand[tj] -= bottleneck;
    }

    flow.iter()
        .enumerate()
        .map(|(i, row)| row.iter().enumerate().map(|(j, f)| f * cost[i][j]).sum::<f64>())
        .sum()
}

/// Exact 1-D Wasserstein-1 through the LP: cost is `|x - y|`.
pub fn wasserstein_1d_lp(xs: &[f64], ys: &[f64]) -> f64 {
    let cost: Vec<Vec<f64>> =
        xs.iter().map(|x| ys.iter().map(|y| (x - y).abs()).collect()).collect();
    let a = vec![1.0; xs.len()];
    let b = vec![1.0; ys.len()];
    min_cost_transport(&cost, &a, &b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_histograms_cost_zero_under_tv_cost() {
        let cost = vec![vec![0.0, 1.0], vec![1.0, 0.0]];
        let got = min_cost_transport(&cost, &[0.3, 0.7], &[0.3, 0.7]);
        assert!(got.abs() < 1e-9);
    }

    #[test]
    fn tv_cost_matches_half_l1() {
        let cost = vec![
            vec![0.0, 1.0, 1.0],
            vec![1.0, 0.0, 1.0],
            vec![1.0, 1.0, 0.0],
        ];
        let a = [0.5, 0.5, 0.0];
        let b = [0.2, 0.3, 0.5];
        let tv = 0.5 * ((0.5f64 - 0.2f64).abs() + (0.5f64 - 0.3f64).abs() + 0.5);
        let got = min_cost_transport(&cost, &a, &b);
        assert!((got - tv).abs() < 1e-9, "{got} vs {tv}");
    }

    #[test]
    fn one_d_transport_matches_sorted_formula() {
        let xs = [0.1f64, 0.9, 0.4];
        let ys = [0.2f64, 0.3, 0.8];
        // equal sizes: mean absolute difference of sorted samples
        let mut a = xs;
        let mut b = ys;
        a.sort_by(|p, q| p.partial_cmp(q).unwrap());
        b.sort_by(|p, q| p.partial_cmp(q).unwrap());
        let expect: f64 =
            a.iter().zip(&b).map(|(x, y)| (x - y).abs()).sum::<f64>() / a.len() as f64;
        assert!((wasserstein_1d_lp(&xs, &ys) - expect).abs() < 1e-9);
    }

    #[test]
    fn unequal_sizes_1d() {
        // {0,1} vs {0.5}: must move 0.5 mass by 0.5 each -> 0.5
        assert!((wasserstein_1d_lp(&[0.0, 1.0], &[0.5]) - 0.5).abs() < 1e-9);
    }
}
