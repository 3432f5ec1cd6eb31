//! Reference implementations the integration suites compare against.
//! Everything here is written the slow, obvious way on purpose: plain BFS,
//! quadratic window counting, direct permutation enumeration. Keep it free
//! of the optimizations the production code is being checked for.

#![allow(dead_code)]

use mutperc::graphs::Graph;

/// Largest connected component among alive nodes by BFS flood fill.
/// Size ties break toward the component holding the lowest node index,
/// which falls out of scanning seeds in ascending order with a strict
/// size comparison. Returns ascending node ids; empty if nothing is alive.
pub fn flood_fill_giant(g: &Graph, alive: &[bool]) -> Vec<u32> {
    let n = g.node_count();
    assert_eq!(alive.len(), n);
    let mut seen = vec![false; n];
    let mut best: Vec<u32> = Vec::new();
    let mut queue = std::collections::VecDeque::new();
    for start in 0..n as u32 {
        if seen[start as usize] || !alive[start as usize] {
            continue;
        }
        let mut comp = vec![start];
        seen[start as usize] = true;
        queue.push_back(start);
        while let Some(u) = queue.pop_front() {
            for &v in g.neighbors(u) {
                if alive[v as usize] && !seen[v as usize] {
                    seen[v as usize] = true;
                    comp.push(v);
                    queue.push_back(v);
                }
            }
        }
        if comp.len() > best.len() {
            comp.sort_unstable();
            best = comp;
        }
    }
    best
}

/// Single-layer percolation: kill the victims, flood-fill the rest, report
/// the giant fraction relative to the full node count.
pub fn single_layer_giant_fraction(g: &Graph, victims: &[u32]) -> f64 {
    let n = g.node_count();
    let mut alive = vec![true; n];
    for &v in victims {
        alive[v as usize] = false;
    }
    flood_fill_giant(g, &alive).len() as f64 / n as f64
}

/// Direct O(N^2) approximate entropy with the same conventions as the
/// production routine: population standard deviation, tol = factor * std,
/// strict < on every coordinate (Chebyshev), self-matches counted,
/// phi(w) = mean_i ln(C_i / count), ApEn = phi(m) - phi(m+1).
/// A constant series is 0 by convention.
pub fn naive_apen(series: &[f64], m: usize, tolerance_factor: f64) -> f64 {
    let n = series.len();
    assert!(n >= m + 2, "series too short for naive apen");
    let mean = series.iter().sum::<f64>() / n as f64;
    let var = series.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
    let std = var.sqrt();
    if std == 0.0 {
        return 0.0;
    }
    let tol = tolerance_factor * std;
    let phi = |w: usize| -> f64 {
        let count = n - w + 1;
        let mut acc = 0.0;
        for i in 0..count {
            let mut matches = 0u32;
            for j in 0..count {
                let mut ok = true;
                for k in 0..w {
                    if !((series[i + k] - series[j + k]).abs() < tol) {
                        ok = false;
                        break;
                    }
                }
                if ok {
                    matches += 1;
                }
            }
            acc += (matches as f64 / count as f64).ln();
        }
        acc / count as f64
    };
    phi(m) - phi(m + 1)
}

/// All k-subsets of 0..n in lexicographic order.
pub fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.clone());
        // rightmost position that can still advance
        let mut i = k;
        while i > 0 && idx[i - 1] == i - 1 + n - k {
            i -= 1;
        }
        if i == 0 {
            return out;
        }
        idx[i - 1] += 1;
        for j in i..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Step to the next lexicographic permutation; false once wrapped.
pub fn next_permutation<T: Ord>(arr: &mut [T]) -> bool {
    if arr.len() < 2 {
        return false;
    }
    let mut i = arr.len() - 1;
    while i > 0 && arr[i - 1] >= arr[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = arr.len() - 1;
    while arr[j] <= arr[i - 1] {
        j -= 1;
    }
    arr.swap(i - 1, j);
    arr[i..].reverse();
    true
}
