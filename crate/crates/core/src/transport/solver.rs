use crate::error::{Error, Result};
use crate::transport::discrete::{dot, Coupling, DiscreteMeasure};

/// Largest total atom count accepted by [`brute_force_cost`].
pub const MAX_ATOMS: usize = 64;
/// Side length up to which equal-weight problems are solved by enumeration.
pub const PERMUTATION_LIMIT: usize = 8;
/// Flows are integers in units of `1 / FLOW_SCALE`.
const FLOW_SCALE: f64 = (1u64 << 40) as f64;

/// Exact maximum of `Σ π_ij x_i·y_j` over all couplings, with an optimal coupling.
pub fn brute_force_cost(m1: &DiscreteMeasure, m2: &DiscreteMeasure) -> Result<(f64, Coupling)> {
    if m1.len() + m2.len() > MAX_ATOMS {
        return Err(Error::TooLarge(m1.len() + m2.len()));
    }
    if m1.dim() != m2.dim() {
        return Err(Error::InvalidMeasure(format!("dimensions differ: {} vs {}", m1.dim(), m2.dim())));
    }
    let cost: Vec<Vec<f64>> = m1.atoms().iter().map(|x| m2.atoms().iter().map(|y| dot(x, y)).collect()).collect();
    let equal = |m: &DiscreteMeasure| m.weights().iter().all(|&w| w == m.weights()[0]);
    let coupling = if m1.len() == m2.len() && m1.len() <= PERMUTATION_LIMIT && equal(m1) && equal(m2) {
        best_permutation(&cost)
    } else {
        transportation_simplex(&cost, m1.weights(), m2.weights())?
    };
    Ok((coupling.correlation(m1, m2), coupling))
}

/// Exhaustive search over permutations (Heap's algorithm).
pub(crate) fn best_permutation(cost: &[Vec<f64>]) -> Coupling {
    let n = cost.len();
    let score = |p: &[usize]| p.iter().enumerate().map(|(i, &j)| cost[i][j]).sum::<f64>();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut best = perm.clone();
    let mut best_score = score(&perm);
    let mut c = vec![0usize; n];
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            let s = score(&perm);
            if s > best_score {
                best_score = s;
                best.clone_from(&perm);
            }
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    let w = 1.0 / n as f64;
    let mut joint = vec![vec![0.0; n]; n];
    for (i, &j) in best.iter().enumerate() {
        joint[i][j] = w;
    }
    Coupling::new(joint)
}

/// Integer supplies summing exactly to `FLOW_SCALE`.
fn integer_masses(weights: &[f64]) -> Vec<i64> {
    let total = FLOW_SCALE as i64;
    let mut m: Vec<i64> = weights.iter().map(|w| (w * FLOW_SCALE).round() as i64).collect();
    let diff = total - m.iter().sum::<i64>();
    let k = (0..m.len()).max_by_key(|&i| m[i]).unwrap();
    m[k] += diff;
    m
}

/// Primal transportation simplex maximizing `Σ c_ij π_ij`.
///
/// Flows are exact integers, so pivots never lose mass; potentials are
/// floating point and only steer pivot selection.
pub(crate) fn transportation_simplex(cost: &[Vec<f64>], supply: &[f64], demand: &[f64]) -> Result<Coupling> {
    let (m, n) = (supply.len(), demand.len());
    let mut s = integer_masses(supply);
    let mut d = integer_masses(demand);
    let mut flow = vec![vec![0i64; n]; m];
    let mut basic = vec![vec![false; n]; m];

    // northwest corner keeps exactly m + n - 1 basic cells forming a spanning tree
    let (mut i, mut j) = (0, 0);
    loop {
        let x = s[i].min(d[j]);
        flow[i][j] = x;
        basic[i][j] = true;
        s[i] -= x;
        d[j] -= x;
        if i == m - 1 && j == n - 1 {
            break;
        }
        if (s[i] == 0 && i < m - 1) || j == n - 1 {
            i += 1;
        } else {
            j += 1;
        }
    }

    let scale = cost.iter().flatten().fold(1.0f64, |a, c| a.max(c.abs()));
    let eps = 1e-12 * scale;
    let max_iter = 50 * (m * n + 10) * (m + n);
    let mut u = vec![0.0; m];
    let mut v = vec![0.0; n];
    for _ in 0..max_iter {
        potentials(cost, &basic, &mut u, &mut v);
        // Bland: first improving cell in index order
        let entering = (0..m)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .find(|&(i, j)| !basic[i][j] && cost[i][j] - u[i] - v[j] > eps);
        let Some((ei, ej)) = entering else {
            let joint = flow.iter().map(|r| r.iter().map(|&f| f as f64 / FLOW_SCALE).collect()).collect();
            return Ok(Coupling::new(joint));
        };
        let path = tree_path(&basic, ei, ej);
        // path cells alternate starting with a donor (-)
        let (leave_k, theta) = path
            .iter()
            .enumerate()
            .filter(|(k, _)| k % 2 == 0)
            .map(|(k, &(a, b))| (k, flow[a][b]))
            .min_by(|x, y| x.1.cmp(&y.1).then_with(|| path[x.0].cmp(&path[y.0])))
            .expect("cycle has a donor cell");
        for (k, &(a, b)) in path.iter().enumerate() {
            if k % 2 == 0 {
                flow[a][b] -= theta;
            } else {
                flow[a][b] += theta;
            }
        }
        flow[ei][ej] += theta;
        basic[ei][ej] = true;
        let (la, lb) = path[leave_k];
        basic[la][lb] = false;
    }
    Err(Error::Numerical("transportation simplex did not converge".into()))
}

/// Dual potentials `u_i + v_j = c_ij` on the basic tree, rooted at row 0.
fn potentials(cost: &[Vec<f64>], basic: &[Vec<bool>], u: &mut [f64], v: &mut [f64]) {
    let (m, n) = (u.len(), v.len());
    let mut seen_r = vec![false; m];
    let mut seen_c = vec![false; n];
    u[0] = 0.0;
    seen_r[0] = true;
    // nodes 0..m are rows, m..m+n columns
    let mut stack = vec![0usize];
    while let Some(node) = stack.pop() {
        if node < m {
            let i = node;
            for j in 0..n {
                if basic[i][j] && !seen_c[j] {
                    v[j] = cost[i][j] - u[i];
                    seen_c[j] = true;
                    stack.push(m + j);
                }
            }
        } else {
            let j = node - m;
            for i in 0..m {
                if basic[i][j] && !seen_r[i] {
                    u[i] = cost[i][j] - v[j];
                    seen_r[i] = true;
                    stack.push(i);
                }
            }
        }
    }
}

/// Basic cells on the tree path from row `r` to column `c`, in order from `r`.
fn tree_path(basic: &[Vec<bool>], r: usize, c: usize) -> Vec<(usize, usize)> {
    let (m, n) = (basic.len(), basic[0].len());
    let mut parent = vec![usize::MAX; m + n];
    let root = r;
    parent[root] = root;
    let mut stack = vec![root];
    while let Some(node) = stack.pop() {
        if node == m + c {
            break;
        }
        let neighbors: Vec<usize> = if node < m {
            (0..n).filter(|&j| basic[node][j]).map(|j| m + j).collect()
        } else {
            (0..m).filter(|&i| basic[i][node - m]).collect()
        };
        for nb in neighbors {
            if parent[nb] == usize::MAX {
                parent[nb] = node;
                stack.push(nb);
            }
        }
    }
    let mut cells = Vec::new();
    let mut node = m + c;
    while node != root {
        let p = parent[node];
        let cell = if node < m { (node, p - m) } else { (p, node - m) };
        cells.push(cell);
        node = p;
    }
    cells.reverse();
    cells
}

/// Exact 1D cost through the monotone (comonotone) coupling.
pub fn monotone_cost(m1: &DiscreteMeasure, m2: &DiscreteMeasure) -> Result<f64> {
    if m1.dim() != 1 || m2.dim() != 1 {
        return Err(Error::InvalidMeasure("monotone coupling needs 1D measures".into()));
    }
    let sorted = |m: &DiscreteMeasure| {
        let mut p: Vec<(f64, i64)> = m.atoms().iter().map(|a| a[0]).zip(integer_masses(m.weights())).collect();
        p.sort_by(|a, b| a.0.total_cmp(&b.0));
        p
    };
    let (a, b) = (sorted(m1), sorted(m2));
    let (mut i, mut j) = (0, 0);
    let (mut ra, mut rb) = (a[0].1, b[0].1);
    let mut acc = 0.0;
    while i < a.len() && j < b.len() {
        let x = ra.min(rb);
        acc += x as f64 / FLOW_SCALE * a[i].0 * b[j].0;
        ra -= x;
        rb -= x;
        if ra == 0 {
            i += 1;
            ra = a.get(i).map_or(0, |p| p.1);
        }
        if rb == 0 {
            j += 1;
            rb = b.get(j).map_or(0, |p| p.1);
        }
    }
    Ok(acc)
}
