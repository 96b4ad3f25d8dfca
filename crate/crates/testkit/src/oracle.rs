use std::collections::HashMap;

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, descending.
pub fn jacobi_eigenvalues(mut a: Vec<Vec<f64>>) -> Vec<f64> {
    let n = a.len();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    ev.sort_by(|x, y| y.total_cmp(x));
    ev
}

/// Sample covariance (n − 1 denominator) of row-major data.
pub fn covariance(rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = rows.len() as f64;
    let p = rows[0].len();
    let mean: Vec<f64> = (0..p).map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / n).collect();
    (0..p)
        .map(|i| {
            (0..p)
                .map(|j| rows.iter().map(|r| (r[i] - mean[i]) * (r[j] - mean[j])).sum::<f64>() / (n - 1.0))
                .collect()
        })
        .collect()
}

/// Modularity from the definition: sum over node pairs of
/// `(A_ij − k_i k_j / 2m) δ(c_i, c_j) / 2m`, with a self-loop of weight `w`
/// giving `A_ii = 2w`.
pub fn modularity(n: usize, edges: &[(usize, usize, f64)], membership: &[usize]) -> f64 {
    let mut a = vec![vec![0.0; n]; n];
    for &(i, j, w) in edges {
        if i == j {
            a[i][i] += 2.0 * w;
        } else {
            a[i][j] += w;
            a[j][i] += w;
        }
    }
    let k: Vec<f64> = a.iter().map(|row| row.iter().sum()).collect();
    let two_m: f64 = k.iter().sum();
    let mut q = 0.0;
    for i in 0..n {
        for j in 0..n {
            if membership[i] == membership[j] {
                q += a[i][j] - k[i] * k[j] / two_m;
            }
        }
    }
    q / two_m
}

/// Every set partition of `0..n` as restricted growth strings.
pub fn set_partitions(n: usize) -> Vec<Vec<usize>> {
    fn grow(prefix: &mut Vec<usize>, n: usize, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == n {
            out.push(prefix.clone());
            return;
        }
        let next = prefix.iter().max().map_or(0, |m| m + 1);
        for c in 0..=next {
            prefix.push(c);
            grow(prefix, n, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    grow(&mut Vec::new(), n, &mut out);
    out
}

/// Highest modularity over all partitions.
pub fn max_modularity(n: usize, edges: &[(usize, usize, f64)]) -> f64 {
    set_partitions(n)
        .iter()
        .map(|m| modularity(n, edges, m))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Adjusted Rand index by counting agreeing pairs directly.
pub fn adjusted_rand_index(a: &[usize], b: &[usize]) -> f64 {
    assert_eq!(a.len(), b.len(), "label vectors differ in length");
    let n = a.len();
    let (mut both, mut in_a, mut in_b) = (0u64, 0u64, 0u64);
    for i in 0..n {
        for j in i + 1..n {
            let sa = a[i] == a[j];
            let sb = b[i] == b[j];
            both += u64::from(sa && sb);
            in_a += u64::from(sa);
            in_b += u64::from(sb);
        }
    }
    let pairs = (n * (n - 1) / 2) as f64;
    let expected = in_a as f64 * in_b as f64 / pairs;
    let max = (in_a + in_b) as f64 / 2.0;
    if max == expected {
        return 1.0;
    }
    (both as f64 - expected) / (max - expected)
}

/// Number of distinct link pairs sharing a user, and the sum of
/// `C(deg, 2)` over users, from `(user, link)` pairs.
pub fn projection_counts(pairs: &[(usize, usize)]) -> (usize, u64) {
    let mut by_user: HashMap<usize, Vec<usize>> = HashMap::new();
    for &(u, l) in pairs {
        by_user.entry(u).or_default().push(l);
    }
    let mut distinct = std::collections::HashSet::new();
    let mut total = 0u64;
    for links in by_user.values_mut() {
        links.sort_unstable();
        links.dedup();
        let d = links.len() as u64;
        total += d * d.saturating_sub(1) / 2;
        for i in 0..links.len() {
            for j in i + 1..links.len() {
                distinct.insert((links[i], links[j]));
            }
        }
    }
    (distinct.len(), total)
}
