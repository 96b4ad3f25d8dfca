use std::collections::BTreeMap;

use chrono::{DateTime, Utc};
use nalgebra::DMatrix;

use super::sheet::{CodeSheet, Codes};
use crate::numerics::{fit_sum_contrast_lm, pca, LinearFit, PcaModel, PcaOptions};
use crate::{Error, Result};

/// How many code components to keep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Retention {
    /// Components with variance above 1.
    #[default]
    Kaiser,
    /// Every component.
    All,
    /// The first `n`.
    Fixed(usize),
}

/// Centered, scaled PCA over the sheet's 0/1 code matrix, truncated per
/// `retention`. Scores are aligned with the sheet rows.
pub fn code_pca(sheet: &CodeSheet, retention: Retention) -> Result<PcaModel> {
    if sheet.len() < 2 {
        return Err(Error::invalid("code PCA needs at least two coded rows"));
    }
    let full = pca(&sheet.matrix(), PcaOptions::STANDARDIZED)?;
    for w in &full.warnings {
        log::warn!("code PCA: {w}");
    }
    let keep = match retention {
        Retention::Kaiser => full.explained_variance.iter().filter(|&&v| v > 1.0).count().max(1),
        Retention::All => full.n_components(),
        Retention::Fixed(n) => n.clamp(1, full.n_components()),
    };
    Ok(full.truncated(keep))
}

/// One sum-contrast fit of each score column against coder.
pub fn coder_models(scores: &DMatrix<f64>, coder_ids: &[u32]) -> Result<Vec<LinearFit<u32>>> {
    if scores.nrows() != coder_ids.len() {
        return Err(Error::invalid("score rows and coder ids differ in length"));
    }
    scores
        .column_iter()
        .map(|col| fit_sum_contrast_lm(col.as_slice(), coder_ids))
        .collect()
}

/// Coder-independent scores: intercept plus residual on every fitted PC.
pub fn corrected_scores(fits: &[LinearFit<u32>]) -> DMatrix<f64> {
    let n = fits.first().map_or(0, |f| f.residuals.len());
    DMatrix::from_fn(n, fits.len(), |i, j| fits[j].intercept() + fits[j].residuals[i])
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConsensusVideo {
    pub video_id: String,
    pub codes: Codes,
    /// Mean corrected score per retained PC over the video's rows.
    pub corrected_scores: Vec<f64>,
    /// Mean uncorrected score per retained PC.
    pub raw_scores: Vec<f64>,
    /// Coders who judged the video, ascending.
    pub coders: Vec<u32>,
    /// Latest `coded_at` among the video's rows.
    pub coded_at: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConsensusCodes {
    /// One entry per video, sorted by video id.
    pub videos: Vec<ConsensusVideo>,
    pub retained_pcs: usize,
    pub threshold: f64,
}

impl ConsensusCodes {
    pub fn get(&self, video_id: &str) -> Option<&ConsensusVideo> {
        self.videos
            .binary_search_by(|v| v.video_id.as_str().cmp(video_id))
            .ok()
            .map(|i| &self.videos[i])
    }
}

/// Reconstruct codes from coder-corrected PC scores.
///
/// The corrected scores of a video's rows are averaged, rotated back through
/// the loadings, unscaled and uncentered, and a value at or above `threshold`
/// becomes true.
pub fn consensus_codes(
    sheet: &CodeSheet,
    model: &PcaModel,
    fits: &[LinearFit<u32>],
    threshold: f64,
) -> Result<ConsensusCodes> {
    let k = model.n_components();
    if fits.len() != k {
        return Err(Error::invalid(format!("{} coder fits for {k} components", fits.len())));
    }
    if model.scores.nrows() != sheet.len() || fits.iter().any(|f| f.residuals.len() != sheet.len()) {
        return Err(Error::invalid("scores and fits must align with the code sheet rows"));
    }
    let corrected = corrected_scores(fits);

    let mut groups: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, row) in sheet.rows().iter().enumerate() {
        groups.entry(row.video_id.as_str()).or_default().push(i);
    }
    let mean_rows = |m: &DMatrix<f64>, rows: &[usize]| -> Vec<f64> {
        (0..k)
            .map(|j| rows.iter().map(|&i| m[(i, j)]).sum::<f64>() / rows.len() as f64)
            .collect()
    };

    let mut videos = Vec::with_capacity(groups.len());
    for (video_id, rows) in groups {
        let corrected_scores = mean_rows(&corrected, &rows);
        let raw_scores = mean_rows(&model.scores, &rows);
        let x = model.reconstruct(&DMatrix::from_row_slice(1, k, &corrected_scores));
        let mut bits = [false; 5];
        for (j, b) in bits.iter_mut().enumerate() {
            *b = x[(0, j)] >= threshold;
        }
        let sheet_rows = sheet.rows();
        videos.push(ConsensusVideo {
            video_id: video_id.to_string(),
            codes: Codes::from_array(bits),
            corrected_scores,
            raw_scores,
            coders: rows.iter().map(|&i| sheet_rows[i].coder_id).collect(),
            coded_at: rows.iter().map(|&i| sheet_rows[i].coded_at).max().expect("non-empty group"),
        });
    }
    Ok(ConsensusCodes {
        videos,
        retained_pcs: k,
        threshold,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coding::CodeRow;
    use chrono::TimeZone;
    use proptest::prelude::*;

    fn sheet_from(rows: &[(u32, [bool; 5])]) -> CodeSheet {
        let t = Utc.with_ymd_and_hms(2022, 1, 1, 0, 0, 0).unwrap();
        CodeSheet::new(
            rows.iter()
                .enumerate()
                .map(|(i, &(coder_id, codes))| CodeRow {
                    video_id: format!("video{i:06}"),
                    coder_id,
                    codes: Codes::from_array(codes),
                    coded_at: t,
                })
                .collect(),
        )
        .unwrap()
    }

    fn pipeline(sheet: &CodeSheet, retention: Retention, threshold: f64) -> ConsensusCodes {
        let model = code_pca(sheet, retention).unwrap();
        let coders: Vec<u32> = sheet.rows().iter().map(|r| r.coder_id).collect();
        let fits = coder_models(&model.scores, &coders).unwrap();
        consensus_codes(sheet, &model, &fits, threshold).unwrap()
    }

    fn code_rows(coders: u32) -> impl Strategy<Value = Vec<(u32, [bool; 5])>> {
        prop::collection::vec((1..=coders, prop::array::uniform5(any::<bool>())), 2..60)
    }

    #[test]
    fn kaiser_keeps_components_above_one() {
        let rows: Vec<_> = (0..40u32)
            .map(|i| (1, [i % 2 == 0, i % 2 == 0, i % 3 == 0, i % 2 == 1, i % 5 == 0]))
            .collect();
        let sheet = sheet_from(&rows);
        let full = code_pca(&sheet, Retention::All).unwrap();
        let kept = code_pca(&sheet, Retention::Kaiser).unwrap();
        let expected = full.explained_variance.iter().filter(|&&v| v > 1.0).count();
        assert_eq!(kept.n_components(), expected);
    }

    #[test]
    fn multiply_coded_video_averages_its_judgments() {
        let mut rows: Vec<_> = (0..30u32)
            .map(|i| (1 + i % 3, [i % 2 == 0, i % 3 == 0, i % 5 == 0, i % 7 == 0, i % 4 == 1]))
            .collect();
        rows.push((2, [false, true, true, false, true]));
        let mut sheet_rows = sheet_from(&rows).rows().to_vec();
        // the last judgment is a second opinion on the first video
        sheet_rows[30].video_id = sheet_rows[0].video_id.clone();
        let sheet = CodeSheet::new(sheet_rows).unwrap();

        let model = code_pca(&sheet, Retention::Kaiser).unwrap();
        let coders: Vec<u32> = sheet.rows().iter().map(|r| r.coder_id).collect();
        let fits = coder_models(&model.scores, &coders).unwrap();
        let consensus = consensus_codes(&sheet, &model, &fits, 0.5).unwrap();
        assert_eq!(consensus.videos.len(), 30);

        let corrected = corrected_scores(&fits);
        let pair: Vec<usize> = sheet
            .rows()
            .iter()
            .enumerate()
            .filter(|(_, r)| r.video_id == "video000000")
            .map(|(i, _)| i)
            .collect();
        assert_eq!(pair.len(), 2);
        let video = consensus.get("video000000").unwrap();
        assert_eq!(video.coders.len(), 2);
        for (j, s) in video.corrected_scores.iter().enumerate() {
            let mean = (corrected[(pair[0], j)] + corrected[(pair[1], j)]) / 2.0;
            assert!((s - mean).abs() < 1e-12);
        }
    }

    proptest! {
        #[test]
        fn single_coder_full_rank_is_identity(rows in code_rows(1)) {
            let sheet = sheet_from(&rows);
            let consensus = pipeline(&sheet, Retention::All, 0.5);
            for (row, video) in sheet.rows().iter().zip(&consensus.videos) {
                prop_assert_eq!(row.codes, video.codes);
            }
        }

        #[test]
        fn raising_threshold_never_adds_ones(rows in code_rows(3), lo in 0.0f64..1.0, step in 0.0f64..0.5) {
            let sheet = sheet_from(&rows);
            let a = pipeline(&sheet, Retention::Kaiser, lo);
            let b = pipeline(&sheet, Retention::Kaiser, lo + step);
            for (va, vb) in a.videos.iter().zip(&b.videos) {
                for (x, y) in va.codes.to_array().iter().zip(vb.codes.to_array()) {
                    prop_assert!(*x || !y);
                }
            }
        }

        #[test]
        fn corrected_scores_carry_no_coder_effect(rows in code_rows(3)) {
            let sheet = sheet_from(&rows);
            let model = code_pca(&sheet, Retention::Kaiser).unwrap();
            let coders: Vec<u32> = sheet.rows().iter().map(|r| r.coder_id).collect();
            let fits = coder_models(&model.scores, &coders).unwrap();
            let refit = coder_models(&corrected_scores(&fits), &coders).unwrap();
            for f in &refit {
                for m in &f.conditional_means {
                    prop_assert!(m.abs() < 1e-8, "{m}");
                }
            }
        }
    }
}
