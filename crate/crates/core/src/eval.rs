//! Partition and embedding quality measures: adjusted Rand index, a seeded
//! k-means, silhouette score, label-matching accuracy, and Spearman rank
//! correlation. Used for convergence checks and as test oracles.

use std::collections::HashMap;

use ndarray::ArrayView2;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Adjusted Rand index between two labelings of the same elements.
///
/// 1 means identical partitions, 0 is the chance level, negative values are
/// worse than chance.
pub fn adjusted_rand_index(a: &[usize], b: &[usize]) -> f64 {
    assert_eq!(a.len(), b.len(), "labelings must cover the same elements");
    let n = a.len();
    if n == 0 {
        return 1.0;
    }
    let mut contingency: HashMap<(usize, usize), u64> = HashMap::new();
    let mut row_counts: HashMap<usize, u64> = HashMap::new();
    let mut col_counts: HashMap<usize, u64> = HashMap::new();
    for (&x, &y) in a.iter().zip(b) {
        *contingency.entry((x, y)).or_insert(0) += 1;
        *row_counts.entry(x).or_insert(0) += 1;
        *col_counts.entry(y).or_insert(0) += 1;
    }
    fn comb2(c: u64) -> f64 {
        (c as f64) * (c as f64 - 1.0) / 2.0
    }
    let sum_ij: f64 = contingency.values().map(|&c| comb2(c)).sum();
    let sum_a: f64 = row_counts.values().map(|&c| comb2(c)).sum();
    let sum_b: f64 = col_counts.values().map(|&c| comb2(c)).sum();
    let total = comb2(n as u64);
    let expected = sum_a * sum_b / total;
    let max_index = 0.5 * (sum_a + sum_b);
    if (max_index - expected).abs() < f64::EPSILON {
        return 1.0;
    }
    (sum_ij - expected) / (max_index - expected)
}

/// Seeded Lloyd k-means with k-means++ initialization. Returns per-row
/// cluster assignments in `0..k`.
pub fn kmeans(points: &ArrayView2<'_, f64>, k: usize, seed: u64, max_iter: usize) -> Vec<usize> {
    let n = points.nrows();
    let d = points.ncols();
    assert!(k >= 1 && k <= n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // k-means++ seeding.
    let mut centers: Vec<Vec<f64>> = Vec::with_capacity(k);
    let first = rng.random_range(0..n);
    centers.push(points.row(first).to_vec());
    let mut d2: Vec<f64> = (0..n)
        .map(|i| sq_dist(points.row(i), &centers[0]))
        .collect();
    while centers.len() < k {
        let total: f64 = d2.iter().sum();
        let pick = if total <= 0.0 {
            rng.random_range(0..n)
        } else {
            let mut u = rng.random::<f64>() * total;
            let mut idx = n - 1;
            for (i, &w) in d2.iter().enumerate() {
                if u < w {
                    idx = i;
                    break;
                }
                u -= w;
            }
            idx
        };
        centers.push(points.row(pick).to_vec());
        for i in 0..n {
            let dist = sq_dist(points.row(i), centers.last().unwrap());
            if dist < d2[i] {
                d2[i] = dist;
            }
        }
    }

    let mut assign = vec![0usize; n];
    for _ in 0..max_iter {
        let mut changed = false;
        for i in 0..n {
            let mut best = 0usize;
            let mut best_d = f64::INFINITY;
            for (c, center) in centers.iter().enumerate() {
                let dist = sq_dist(points.row(i), center);
                if dist < best_d {
                    best_d = dist;
                    best = c;
                }
            }
            if assign[i] != best {
                assign[i] = best;
                changed = true;
            }
        }
        let mut sums = vec![vec![0.0f64; d]; k];
        let mut counts = vec![0usize; k];
        for i in 0..n {
            counts[assign[i]] += 1;
            for j in 0..d {
                sums[assign[i]][j] += points[[i, j]];
            }
        }
        for c in 0..k {
            if counts[c] > 0 {
                for j in 0..d {
                    centers[c][j] = sums[c][j] / counts[c] as f64;
                }
            }
        }
        if !changed {
            break;
        }
    }
    assign
}

fn sq_dist(a: ndarray::ArrayView1<'_, f64>, b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Mean silhouette score of a labeled point set, in [-1, 1].
pub fn silhouette(points: &ArrayView2<'_, f64>, labels: &[usize]) -> f64 {
    let n = points.nrows();
    assert_eq!(labels.len(), n);
    let k = labels.iter().max().map(|&m| m + 1).unwrap_or(0);
    let mut scores = Vec::with_capacity(n);
    for i in 0..n {
        let mut sums = vec![0.0f64; k];
        let mut counts = vec![0usize; k];
        for j in 0..n {
            if j == i {
                continue;
            }
            let d: f64 = (0..points.ncols())
                .map(|c| (points[[i, c]] - points[[j, c]]).powi(2))
                .sum::<f64>()
                .sqrt();
            sums[labels[j]] += d;
            counts[labels[j]] += 1;
        }
        let own = labels[i];
        if counts[own] == 0 {
            scores.push(0.0);
            continue;
        }
        let a = sums[own] / counts[own] as f64;
        let b = (0..k)
            .filter(|&c| c != own && counts[c] > 0)
            .map(|c| sums[c] / counts[c] as f64)
            .fold(f64::INFINITY, f64::min);
        if !b.is_finite() {
            scores.push(0.0);
        } else {
            scores.push((b - a) / a.max(b));
        }
    }
    scores.iter().sum::<f64>() / scores.len() as f64
}

/// Best-matching accuracy between predicted clusters and true groups, over
/// all assignments of cluster ids to group ids (k is expected small).
pub fn clustering_accuracy(pred: &[usize], truth: &[usize]) -> f64 {
    assert_eq!(pred.len(), truth.len());
    let n = pred.len();
    if n == 0 {
        return 1.0;
    }
    let kp = pred.iter().max().unwrap() + 1;
    let kt = truth.iter().max().unwrap() + 1;
    let k = kp.max(kt);
    // Contingency counts.
    let mut counts = vec![vec![0usize; k]; k];
    for (&p, &t) in pred.iter().zip(truth) {
        counts[p][t] += 1;
    }
    let mut perm: Vec<usize> = (0..k).collect();
    let mut best = 0usize;
    permute_for_max(&mut perm, 0, &counts, &mut best);
    best as f64 / n as f64
}

fn permute_for_max(perm: &mut Vec<usize>, i: usize, counts: &[Vec<usize>], best: &mut usize) {
    if i == perm.len() {
        let score: usize = perm.iter().enumerate().map(|(p, &t)| counts[p][t]).sum();
        if score > *best {
            *best = score;
        }
        return;
    }
    for j in i..perm.len() {
        perm.swap(i, j);
        permute_for_max(perm, i + 1, counts, best);
        perm.swap(i, j);
    }
}

/// Spearman rank correlation between two equal-length samples, with average
/// ranks for ties.
pub fn spearman(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let ra = ranks(a);
    let rb = ranks(b);
    pearson(&ra, &rb)
}

fn ranks(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| x[i].partial_cmp(&x[j]).unwrap_or(std::cmp::Ordering::Equal));
    let mut r = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && x[order[j + 1]] == x[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            r[idx] = avg;
        }
        i = j + 1;
    }
    r
}

fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut va = 0.0;
    let mut vb = 0.0;
    for (&x, &y) in a.iter().zip(b) {
        cov += (x - ma) * (y - mb);
        va += (x - ma) * (x - ma);
        vb += (y - mb) * (y - mb);
    }
    if va <= 0.0 || vb <= 0.0 {
        return 0.0;
    }
    cov / (va.sqrt() * vb.sqrt())
}
