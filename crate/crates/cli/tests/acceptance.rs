//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use chrono::{TimeZone, Utc};
use crossflow::{run_pipeline, Outcome, RunConfig};
use crossflow_core::coding::{
    code_pca, coder_models, consensus_codes, corrected_scores, CodeRow, CodeSheet, Codes, Retention,
};
use crossflow_core::diffusion::{louvain, project_links, BipartiteGraph, Edge, Graph};
use crossflow_core::ingest::{parse_exports, select_cohort, CohortOptions, TweetRecord, UrlEntity, VideoStatus};
use crossflow_core::numerics::{fit_gmm, fit_mixture, pca, CovarianceModel, GmmOptions, PcaOptions};
use crossflow_core::temporal::{build_incidence, cluster_dates, DateClusterOptions};
use crossflow_testkit::gen::{coder_bias, gaussian_mixture_1d, planted_epochs, projection_workload, sbm};
use crossflow_testkit::oracle::{
    adjusted_rand_index, covariance, jacobi_eigenvalues, max_modularity, modularity, set_partitions,
};
use nalgebra::DMatrix;
use rand::Rng;
use serde_json::Value;

type Verdict = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn pca_oracle() -> Verdict {
    let mut worst: f64 = 0.0;
    for seed in 0..50 {
        let mut r = crossflow_testkit::rng(1000 + seed);
        let n = r.random_range(3..=200);
        let p = r.random_range(1..=20);
        let x = DMatrix::from_fn(n, p, |_, j| r.random_range(-1.0..1.0) * (1.0 + j as f64));
        let model = pca(&x, PcaOptions::CENTERED).map_err(|e| e.to_string())?;
        let recon = (model.reconstruct(&model.scores) - &x).amax();
        ensure(recon < 1e-8, || format!("seed {seed}: reconstruction error {recon:e}"))?;

        let rows: Vec<Vec<f64>> = x.row_iter().map(|r| r.iter().copied().collect()).collect();
        let oracle = jacobi_eigenvalues(covariance(&rows));
        for (i, o) in oracle.iter().enumerate() {
            let ev = model.explained_variance.get(i).copied().unwrap_or(0.0);
            let err = (ev - o).abs();
            ensure(err < 1e-8, || format!("seed {seed} pc {i}: {ev} vs oracle {o}"))?;
            worst = worst.max(err).max(recon);
        }
    }
    Ok(format!("50 matrices, max error {worst:.1e}"))
}

fn gmm() -> Verdict {
    let mut iterations = 0;
    for seed in 0..4 {
        let xs = gaussian_mixture_1d(seed, 80, &[0.0, 2.0, 5.0], 1.0);
        let data = DMatrix::from_fn(xs.len() / 2, 2, |i, j| xs[2 * i + j]);
        for model in CovarianceModel::ALL {
            let opts = GmmOptions {
                models: vec![model],
                restarts: 3,
                seed,
                ..GmmOptions::default()
            };
            for k in 1..=4 {
                let Some(fit) = fit_mixture(&data, k, model, &opts) else {
                    continue;
                };
                iterations += fit.trace.len();
                for w in fit.trace.windows(2) {
                    ensure(w[1] >= w[0] - 1e-9, || {
                        format!("{model} k={k} seed {seed}: log-likelihood {} -> {}", w[0], w[1])
                    })?;
                }
            }
        }
    }

    let mut hits = 0;
    for seed in 0..100 {
        let xs = gaussian_mixture_1d(seed, 100, &[0.0, 10.0], 0.5);
        let data = DMatrix::from_column_slice(xs.len(), 1, &xs);
        let opts = GmmOptions {
            k_range: vec![1, 2, 3],
            models: vec![CovarianceModel::VVV],
            seed,
            ..GmmOptions::default()
        };
        let sel = fit_gmm(&data, &opts).map_err(|e| e.to_string())?;
        hits += usize::from(sel.best.k == 2);
    }
    ensure(hits >= 95, || format!("k = 2 selected in {hits}/100 seeds"))?;
    Ok(format!("{iterations} monotone EM steps, k = 2 in {hits}/100 seeds"))
}

fn share_tweets(shares: &[(usize, usize)]) -> Vec<TweetRecord> {
    let start = Utc.with_ymd_and_hms(2022, 1, 1, 12, 0, 0).unwrap();
    shares
        .iter()
        .enumerate()
        .map(|(i, &(day, v))| {
            TweetRecord::new(
                format!("{}", 1_000_000 + i),
                format!("user{}", i % 97),
                start + chrono::Duration::days(day as i64) + chrono::Duration::seconds(i as i64 % 3600),
                false,
                "",
                vec![UrlEntity {
                    short: format!("https://t.co/{i}"),
                    expanded: format!("https://www.youtube.com/watch?v=vid{v:08}"),
                }],
            )
        })
        .collect()
}

fn epochs() -> Verdict {
    let planted = planted_epochs(3, 120, 8, 25, 0.4);
    let incidence = build_incidence(&share_tweets(&planted.active), false);
    let opts = DateClusterOptions {
        pcs: 60,
        k_range: (1..=25).collect(),
        ..DateClusterOptions::default()
    };
    let clustering = cluster_dates(&incidence, &opts).map_err(|e| e.to_string())?;
    let ari = adjusted_rand_index(&planted.labels, &clustering.labels);
    ensure(ari >= 0.9, || format!("ARI {ari:.4}"))?;
    Ok(format!("ARI {ari:.4}, k = {}", clustering.k))
}

fn sheet(coders: &[u32], codes: &[[bool; 5]]) -> CodeSheet {
    let t = Utc.with_ymd_and_hms(2022, 6, 1, 0, 0, 0).unwrap();
    CodeSheet::new(
        coders
            .iter()
            .zip(codes)
            .enumerate()
            .map(|(i, (&coder_id, &c))| CodeRow {
                video_id: format!("v{i:07}"),
                coder_id,
                codes: Codes::from_array(c),
                coded_at: t,
            })
            .collect(),
    )
    .unwrap()
}

fn consensus_identity() -> Verdict {
    let mut r = crossflow_testkit::rng(77);
    for i in 0..1000 {
        let n = r.random_range(2..150);
        let codes: Vec<[bool; 5]> = (0..n).map(|_| std::array::from_fn(|_| r.random_bool(0.4))).collect();
        let s = sheet(&vec![1; n], &codes);
        let model = code_pca(&s, Retention::All).map_err(|e| e.to_string())?;
        let fits = coder_models(&model.scores, &vec![1; n]).map_err(|e| e.to_string())?;
        let consensus = consensus_codes(&s, &model, &fits, 0.5).map_err(|e| e.to_string())?;
        for (v, c) in consensus.videos.iter().zip(&codes) {
            ensure(v.codes.to_array() == *c, || {
                format!("sheet {i}: {} changed", v.video_id)
            })?;
        }
    }
    Ok("1000 sheets reproduced exactly".into())
}

fn consensus_bias() -> Verdict {
    let sim = coder_bias(8, 5000, 3, 2, 0.3);
    let s = sheet(&sim.coder, &sim.observed);
    let model = code_pca(&s, Retention::Kaiser).map_err(|e| e.to_string())?;
    let fits = coder_models(&model.scores, &sim.coder).map_err(|e| e.to_string())?;
    let consensus = consensus_codes(&s, &model, &fits, 0.5).map_err(|e| e.to_string())?;
    let raw = sim
        .observed
        .iter()
        .zip(&sim.truth)
        .filter(|(o, t)| o[3] != t[3])
        .count();
    let corrected = consensus
        .videos
        .iter()
        .zip(&sim.truth)
        .filter(|(v, t)| v.codes.q != t[3])
        .count();
    let reduction = 1.0 - corrected as f64 / raw as f64;
    ensure(reduction >= 0.2, || {
        format!("q disagreement {raw} -> {corrected} ({:.1}%)", 100.0 * reduction)
    })?;
    Ok(format!(
        "q disagreement {raw} -> {corrected} ({:.1}% reduction)",
        100.0 * reduction
    ))
}

fn consensus_refit() -> Verdict {
    let sim = coder_bias(8, 5000, 3, 2, 0.3);
    let s = sheet(&sim.coder, &sim.observed);
    let model = code_pca(&s, Retention::Kaiser).map_err(|e| e.to_string())?;
    let fits = coder_models(&model.scores, &sim.coder).map_err(|e| e.to_string())?;
    let refit = coder_models(&corrected_scores(&fits), &sim.coder).map_err(|e| e.to_string())?;
    let worst = refit
        .iter()
        .flat_map(|f| f.conditional_means.iter())
        .fold(0.0f64, |m, c| m.max(c.abs()));
    ensure(worst < 1e-8, || format!("largest refit conditional mean {worst:e}"))?;
    Ok(format!("largest refit conditional mean {worst:.1e}"))
}

fn two_triangles() -> Verdict {
    let edges = [
        (0, 1, 1.0),
        (1, 2, 1.0),
        (0, 2, 1.0),
        (3, 4, 1.0),
        (4, 5, 1.0),
        (3, 5, 1.0),
    ];
    let best = max_modularity(6, &edges);
    ensure((best - 0.5).abs() < 1e-12, || format!("enumerated optimum {best}"))?;
    let argmax: Vec<Vec<usize>> = set_partitions(6)
        .into_iter()
        .filter(|m| (modularity(6, &edges, m) - best).abs() < 1e-12)
        .collect();
    let g = Graph::new(6, edges.iter().map(|&(a, b, w)| Edge { a, b, w }));
    let p = louvain(&g, 1.0, 0).map_err(|e| e.to_string())?;
    ensure(
        argmax.len() == 1 && adjusted_rand_index(&argmax[0], &p.membership) == 1.0,
        || {
            format!(
                "louvain partition {:?} is not the enumerated optimum {argmax:?}",
                p.membership
            )
        },
    )?;
    ensure((p.modularity - best).abs() < 1e-12, || {
        format!("louvain {} vs enumerated {best}", p.modularity)
    })?;
    Ok(format!("modularity {} equals enumerated optimum", p.modularity))
}

fn sbm_recovery() -> Verdict {
    let (edges, labels) = sbm(2, 200, 4, 0.3, 0.01);
    let g = Graph::new(200, edges.iter().map(|&(a, b)| Edge { a, b, w: 1.0 }));
    let p = louvain(&g, 1.0, 0).map_err(|e| e.to_string())?;
    let ari = adjusted_rand_index(&labels, &p.membership);
    ensure(ari >= 0.9, || format!("ARI {ari:.4}"))?;
    Ok(format!("ARI {ari:.4}, {} communities", p.n_communities))
}

fn projection_scale() -> Verdict {
    let mut pairs = projection_workload(1, 20_000, 40_000, 40, (3, 25));
    pairs.sort_unstable();
    pairs.dedup();
    let b = BipartiteGraph {
        users: (0..20_000).map(|u| format!("u{u}")).collect(),
        links: (0..40_000).map(|l| format!("l{l}")).collect(),
        link_video: (0..40_000).map(|l| format!("video{}", l % 5000)).collect(),
        edges: pairs,
    };
    let start = Instant::now();
    let g = project_links(&b);
    let p = louvain(&g, 1.0, 0).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    ensure(g.edges.len() >= 1_000_000, || {
        format!("only {} projection edges", g.edges.len())
    })?;
    Ok(format!(
        "{} projection edges, {} communities, projection + Louvain {:.1}s",
        g.edges.len(),
        p.n_communities,
        elapsed.as_secs_f64()
    ))
}

fn fixture_config(out: &Path) -> RunConfig {
    RunConfig {
        tweets: Some(fixture("tweets.jsonl")),
        videos: Some(fixture("videos.jsonl")),
        codesheet: Some(fixture("codesheet.csv")),
        out: Some(out.to_path_buf()),
        seed: Some(2022),
        ..RunConfig::default()
    }
}

fn check_metagraph(meta: &Value) -> Result<(), String> {
    let obj = meta.as_object().ok_or("meta-graph is not an object")?;
    let keys: BTreeSet<&str> = obj.keys().map(String::as_str).collect();
    ensure(keys == BTreeSet::from(["nodes", "edges"]), || {
        format!("top-level keys {keys:?}")
    })?;
    let nodes = meta["nodes"].as_array().ok_or("nodes is not an array")?;
    let edges = meta["edges"].as_array().ok_or("edges is not an array")?;
    ensure(!nodes.is_empty(), || "no nodes".into())?;
    let mut ids = HashSet::new();
    for n in nodes {
        let keys: BTreeSet<&str> = n
            .as_object()
            .ok_or("node is not an object")?
            .keys()
            .map(String::as_str)
            .collect();
        ensure(
            keys == BTreeSet::from(["id", "n_links", "avg_pc2", "top_videos"]),
            || format!("node keys {keys:?}"),
        )?;
        ids.insert(n["id"].as_u64().ok_or("node id is not an integer")?);
        n["n_links"].as_u64().ok_or("n_links is not an integer")?;
        ensure(n["avg_pc2"].is_null() || n["avg_pc2"].is_f64(), || {
            "avg_pc2 is not a number or null".into()
        })?;
        for t in n["top_videos"].as_array().ok_or("top_videos is not an array")? {
            t["video_id"].as_str().ok_or("top video id is not a string")?;
            t["link_count"]
                .as_u64()
                .ok_or("top video link_count is not an integer")?;
        }
    }
    for e in edges {
        let keys: BTreeSet<&str> = e
            .as_object()
            .ok_or("edge is not an object")?
            .keys()
            .map(String::as_str)
            .collect();
        ensure(keys == BTreeSet::from(["a", "b", "w"]), || {
            format!("edge keys {keys:?}")
        })?;
        let a = e["a"].as_u64().ok_or("edge a is not an integer")?;
        let b = e["b"].as_u64().ok_or("edge b is not an integer")?;
        ensure(ids.contains(&a) && ids.contains(&b), || {
            format!("edge {a}-{b} names an unknown node")
        })?;
        ensure(e["w"].as_f64().is_some_and(|w| w > 0.0), || {
            "edge weight is not positive".into()
        })?;
    }
    Ok(())
}

fn table_shapes() -> Verdict {
    let report_of = |dir: &Path| -> Result<PathBuf, String> {
        match run_pipeline(&fixture_config(dir), false).map_err(|e| e.to_string())? {
            Outcome::Complete { report, .. } => Ok(report),
            other => Err(format!("pipeline did not complete: {other:?}")),
        }
    };
    let a = tempfile::tempdir().map_err(|e| e.to_string())?;
    let b = tempfile::tempdir().map_err(|e| e.to_string())?;
    let (ra, rb) = (report_of(a.path())?, report_of(b.path())?);
    let read = |dir: &Path, f: &str| std::fs::read(dir.join(f)).map_err(|e| format!("{f}: {e}"));

    let sheet = std::fs::read_to_string(fixture("codesheet.csv")).map_err(|e| e.to_string())?;
    let coded: HashSet<&str> = sheet.lines().skip(1).filter_map(|l| l.split(',').next()).collect();
    let overall = String::from_utf8(read(&ra, "change_overall.csv")?).map_err(|e| e.to_string())?;
    let mut rows = 0;
    for line in overall.lines().skip(1) {
        let cells: Vec<&str> = line.split(',').collect();
        let sum: usize = cells[1..]
            .iter()
            .map(|c| c.parse::<usize>().unwrap_or(usize::MAX / 8))
            .sum();
        ensure(sum == coded.len(), || {
            format!("{} row sums to {sum}, {} videos coded", cells[0], coded.len())
        })?;
        rows += 1;
    }
    ensure(rows == 5, || format!("{rows} code rows in change_overall.csv"))?;

    let per_coder = String::from_utf8(read(&ra, "change_per_coder.csv")?).map_err(|e| e.to_string())?;
    let mut per_code = [0usize; 5];
    for line in per_coder.lines().skip(1) {
        for (j, c) in line.split(',').skip(2).enumerate() {
            per_code[j] += c.parse::<usize>().map_err(|e| e.to_string())?;
        }
    }
    ensure(per_code.iter().all(|&s| s == coded.len()), || {
        format!("per-coder columns sum to {per_code:?}")
    })?;

    let meta: Value = serde_json::from_slice(&read(&ra, "metagraph.json")?).map_err(|e| e.to_string())?;
    check_metagraph(&meta)?;

    let golden = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden");
    for (_, f) in crossflow::pipeline::REPORT_FILES {
        let x = read(&ra, f)?;
        ensure(x == read(&rb, f)?, || format!("{f} differs between reruns"))?;
        ensure(x == read(&golden, f)?, || format!("{f} differs from the golden file"))?;
    }
    Ok(format!(
        "{} coded videos, meta-graph schema valid, 7 golden files byte-stable",
        coded.len()
    ))
}

fn cohort_rule() -> Verdict {
    let data =
        parse_exports(&fixture("tweets.jsonl"), Some(&fixture("videos.jsonl")), None).map_err(|e| e.to_string())?;
    let cohort = select_cohort(&data.tweets, &data.videos, CohortOptions::default());
    let status: HashMap<&str, VideoStatus> = data.videos.iter().map(|v| (v.video_id.as_str(), v.status)).collect();
    let gone = |v: &String| status.get(v.as_str()) == Some(&VideoStatus::Unavailable);
    let suspects: HashSet<&str> = data
        .tweets
        .iter()
        .filter(|t| t.video_ids.iter().any(gone))
        .map(|t| t.user_id.as_str())
        .collect();
    let qualifies = |t: &TweetRecord| {
        suspects.contains(t.user_id.as_str()) && !t.video_ids.is_empty() && !t.video_ids.iter().any(gone)
    };
    ensure(!cohort.tweets.is_empty(), || "empty cohort".into())?;
    for t in &cohort.tweets {
        ensure(qualifies(t), || format!("tweet {} breaks the cohort rule", t.tweet_id))?;
    }
    let expected: BTreeSet<&str> = data
        .tweets
        .iter()
        .filter(|t| qualifies(t))
        .map(|t| t.tweet_id.as_str())
        .collect();
    let got: BTreeSet<&str> = cohort.tweets.iter().map(|t| t.tweet_id.as_str()).collect();
    ensure(got == expected, || {
        format!("{} selected, {} qualify", got.len(), expected.len())
    })?;
    Ok(format!(
        "{} of {} tweets checked, all satisfy the rule",
        got.len(),
        data.tweets.len()
    ))
}

struct Criterion {
    name: &'static str,
    budget: Option<Duration>,
    check: fn() -> Verdict,
}

fn main() {
    let secs = |s| Some(Duration::from_secs(s));
    let criteria = [
        Criterion {
            name: "pca oracle",
            budget: secs(5),
            check: pca_oracle,
        },
        Criterion {
            name: "gmm monotone EM and BIC selection",
            budget: secs(30),
            check: gmm,
        },
        Criterion {
            name: "epoch recovery",
            budget: secs(60),
            check: epochs,
        },
        Criterion {
            name: "consensus one-coder identity",
            budget: None,
            check: consensus_identity,
        },
        Criterion {
            name: "consensus coder-bias reduction",
            budget: None,
            check: consensus_bias,
        },
        Criterion {
            name: "consensus refit means vanish",
            budget: None,
            check: consensus_refit,
        },
        Criterion {
            name: "community two triangles",
            budget: None,
            check: two_triangles,
        },
        Criterion {
            name: "community planted blocks",
            budget: None,
            check: sbm_recovery,
        },
        Criterion {
            name: "community projection scale",
            budget: secs(120),
            check: projection_scale,
        },
        Criterion {
            name: "report table shapes",
            budget: None,
            check: table_shapes,
        },
        Criterion {
            name: "cohort filter",
            budget: None,
            check: cohort_rule,
        },
    ];
    let mut failed = 0;
    for c in &criteria {
        let start = Instant::now();
        let result = (c.check)();
        let elapsed = start.elapsed();
        let result = match (result, c.budget) {
            (Ok(_), Some(b)) if elapsed > b => {
                Err(format!("took {:.1}s, budget {}s", elapsed.as_secs_f64(), b.as_secs()))
            }
            (r, _) => r,
        };
        match result {
            Ok(detail) => println!("PASS  {:<36} {:>6.1}s  {detail}", c.name, elapsed.as_secs_f64()),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {:<36} {:>6.1}s  {detail}", c.name, elapsed.as_secs_f64());
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
