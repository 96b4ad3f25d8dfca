use chrono::{TimeZone, Utc};
use crossflow_core::coding::{
    change_tables, code_pca, coder_models, consensus_codes, CodeRow, CodeSheet, Codes, Retention,
};
use crossflow_core::numerics::fit_sum_contrast_lm;
use crossflow_testkit::gen::coder_bias;
use rand::Rng;
use rand_distr::{Distribution, Normal};

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

#[test]
fn planted_coder_effects_recovered_within_two_standard_errors() {
    let mut r = crossflow_testkit::rng(21);
    let noise = Normal::new(0.0, 1.0).unwrap();
    let effects = [0.5, -0.5];
    let n = 2000;
    let coders: Vec<u32> = (0..n).map(|i| 1 + (i % 2) as u32).collect();
    let y: Vec<f64> = coders
        .iter()
        .map(|&c| 1.0 + effects[c as usize - 1] + noise.sample(&mut r))
        .collect();
    let fit = fit_sum_contrast_lm(&y, &coders).unwrap();
    for (j, e) in effects.iter().enumerate() {
        let diff = (fit.conditional_means[j] - e).abs();
        assert!(diff < 2.0 * fit.effect_std_errors[j], "coder {}: {diff}", j + 1);
    }
}

#[test]
fn null_coder_effect_explains_nothing() {
    let mut r = crossflow_testkit::rng(4);
    let noise = Normal::new(0.0, 1.0).unwrap();
    let coders: Vec<u32> = (0..5000).map(|_| r.random_range(1..=3)).collect();
    let y: Vec<f64> = coders.iter().map(|_| noise.sample(&mut r)).collect();
    let fit = fit_sum_contrast_lm(&y, &coders).unwrap();
    assert!(fit.adjusted_r_squared < 0.01, "{}", fit.adjusted_r_squared);
}

#[test]
fn correction_reduces_planted_q_bias() {
    let sim = coder_bias(8, 5000, 3, 2, 0.3);
    let s = sheet(&sim.coder, &sim.observed);
    let model = code_pca(&s, Retention::Kaiser).unwrap();
    let fits = coder_models(&model.scores, &sim.coder).unwrap();
    let consensus = consensus_codes(&s, &model, &fits, 0.5).unwrap();
    let raw = sim.observed.iter().zip(&sim.truth).filter(|(o, t)| o[3] != t[3]).count();
    let corrected = consensus
        .videos
        .iter()
        .zip(&sim.truth)
        .filter(|(v, t)| v.codes.q != t[3])
        .count();
    let reduction = 1.0 - corrected as f64 / raw as f64;
    assert!(reduction >= 0.2, "raw {raw}, corrected {corrected}");

    let tables = change_tables(&s, &consensus).unwrap();
    assert!(tables.overall.iter().all(|c| c.total() == 5000));
}

#[test]
fn one_coder_with_every_component_reproduces_the_sheet() {
    let mut r = crossflow_testkit::rng(1);
    for _ in 0..50 {
        let n = r.random_range(2..200);
        let codes: Vec<[bool; 5]> = (0..n).map(|_| std::array::from_fn(|_| r.random_bool(0.4))).collect();
        let s = sheet(&vec![1; n], &codes);
        let model = code_pca(&s, Retention::All).unwrap();
        let fits = coder_models(&model.scores, &vec![1; n]).unwrap();
        let consensus = consensus_codes(&s, &model, &fits, 0.5).unwrap();
        for (v, c) in consensus.videos.iter().zip(&codes) {
            assert_eq!(v.codes.to_array(), *c);
        }
    }
}
