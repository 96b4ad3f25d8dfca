use rand::seq::index::sample;
use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::rng;

/// Day-by-video activity where every video is active only inside one epoch.
pub struct PlantedEpochs {
    /// Epoch of each day, 0-based and contiguous.
    pub labels: Vec<usize>,
    /// Active `(day, video)` cells, day-major.
    pub active: Vec<(usize, usize)>,
    pub n_videos: usize,
}

/// `days` split into `epochs` near-equal runs, `videos_per_epoch` videos per
/// run, each active on a day of its run with probability `p`.
pub fn planted_epochs(seed: u64, days: usize, epochs: usize, videos_per_epoch: usize, p: f64) -> PlantedEpochs {
    let mut r = rng(seed);
    let bound = |e: usize| e * days / epochs;
    let mut labels = vec![0; days];
    let mut active = Vec::new();
    for e in 0..epochs {
        for (d, label) in labels.iter_mut().enumerate().take(bound(e + 1)).skip(bound(e)) {
            *label = e;
            for v in 0..videos_per_epoch {
                if r.random_bool(p) {
                    active.push((d, e * videos_per_epoch + v));
                }
            }
        }
    }
    PlantedEpochs {
        labels,
        active,
        n_videos: epochs * videos_per_epoch,
    }
}

/// `n_each` draws from each `N(mean, sd²)`, concatenated in order.
pub fn gaussian_mixture_1d(seed: u64, n_each: usize, means: &[f64], sd: f64) -> Vec<f64> {
    let mut r = rng(seed);
    means
        .iter()
        .flat_map(|&m| {
            let d = Normal::new(m, sd).expect("valid normal");
            (0..n_each).map(|_| d.sample(&mut r)).collect::<Vec<_>>()
        })
        .collect()
}

/// Stochastic block model with equal blocks. Returns edges `a < b` and the
/// block of each node.
pub fn sbm(seed: u64, n: usize, blocks: usize, p_in: f64, p_out: f64) -> (Vec<(usize, usize)>, Vec<usize>) {
    let mut r = rng(seed);
    let labels: Vec<usize> = (0..n).map(|i| i * blocks / n).collect();
    let mut edges = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            let p = if labels[a] == labels[b] { p_in } else { p_out };
            if r.random_bool(p) {
                edges.push((a, b));
            }
        }
    }
    (edges, labels)
}

/// Five codes `[v, p, n, q, cx]` per video with their true values, the coder
/// assigned to each video and that coder's judgment.
pub struct CoderBiasSim {
    pub truth: Vec<[bool; 5]>,
    pub coder: Vec<u32>,
    pub observed: Vec<[bool; 5]>,
}

/// Correlated true codes, each video judged by one of `coders` coders
/// (ids from 1). Coder `biased` additionally marks `q` true with probability
/// `flip`; everyone else reports the truth.
pub fn coder_bias(seed: u64, n_videos: usize, coders: u32, biased: u32, flip: f64) -> CoderBiasSim {
    let mut r = rng(seed);
    let mut truth = Vec::with_capacity(n_videos);
    let mut coder = Vec::with_capacity(n_videos);
    let mut observed = Vec::with_capacity(n_videos);
    for _ in 0..n_videos {
        let v = r.random_bool(0.75);
        let p = v && r.random_bool(0.35);
        let n = v && r.random_bool(if p { 0.2 } else { 0.9 });
        let q = r.random_bool(if v { 0.03 } else { 0.9 });
        let cx = r.random_bool(match (v, p) {
            (true, true) => 0.8,
            (true, false) => 0.2,
            (false, _) => 0.05,
        });
        let t = [v, p, n, q, cx];
        let c = r.random_range(1..=coders);
        let mut o = t;
        if c == biased && r.random_bool(flip) {
            o[3] = true;
        }
        truth.push(t);
        coder.push(c);
        observed.push(o);
    }
    CoderBiasSim { truth, coder, observed }
}

/// Random user-link incidences: each user shares between 1 and
/// `max_per_user` distinct links. Pairs are `(user, link)`, unsorted.
pub fn random_bipartite(seed: u64, users: usize, links: usize, max_per_user: usize) -> Vec<(usize, usize)> {
    let mut r = rng(seed);
    let mut pairs = Vec::new();
    for u in 0..users {
        let d = r.random_range(1..=max_per_user.min(links));
        for l in sample(&mut r, links, d) {
            pairs.push((u, l));
        }
    }
    pairs
}

/// A sharing workload whose link-link projection is large: users draw most
/// links from one of `groups` link pools and the rest from anywhere.
pub fn projection_workload(seed: u64, users: usize, links: usize, groups: usize, per_user: (usize, usize)) -> Vec<(usize, usize)> {
    let mut r = rng(seed);
    let pool = links / groups;
    let mut pairs = Vec::new();
    for u in 0..users {
        let g = r.random_range(0..groups);
        let d = r.random_range(per_user.0..=per_user.1);
        let mut chosen: Vec<usize> = (0..d)
            .map(|_| {
                if r.random_bool(0.9) {
                    g * pool + r.random_range(0..pool)
                } else {
                    r.random_range(0..links)
                }
            })
            .collect();
        chosen.sort_unstable();
        chosen.dedup();
        pairs.extend(chosen.into_iter().map(|l| (u, l)));
    }
    pairs
}
