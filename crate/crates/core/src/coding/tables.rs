use std::collections::BTreeMap;
use std::path::Path;

use super::analysis::ConsensusCodes;
use super::sheet::{bit, timestamp, CodeSheet, CODE_NAMES};
use crate::error::finish_csv;
use crate::numerics::LinearFit;
use crate::{Error, Result};

/// Raw-versus-consensus transitions for one code.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CodeChange {
    pub ff: usize,
    pub ft: usize,
    pub tf: usize,
    pub tt: usize,
}

impl CodeChange {
    pub fn total(&self) -> usize {
        self.ff + self.ft + self.tf + self.tt
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CoderChange {
    pub ft: usize,
    pub tf: usize,
    pub same: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoderChanges {
    pub coder_id: u32,
    /// Aligned with [`CODE_NAMES`].
    pub codes: [CoderChange; 5],
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChangeTables {
    /// Aligned with [`CODE_NAMES`].
    pub overall: [CodeChange; 5],
    /// Ascending by coder.
    pub per_coder: Vec<CoderChanges>,
}

/// Compare every judgment in the sheet with its video's consensus codes.
pub fn change_tables(sheet: &CodeSheet, consensus: &ConsensusCodes) -> Result<ChangeTables> {
    let mut overall = [CodeChange::default(); 5];
    let mut per_coder: BTreeMap<u32, [CoderChange; 5]> = BTreeMap::new();
    for row in sheet.rows() {
        let corrected = consensus
            .get(&row.video_id)
            .ok_or_else(|| Error::invalid(format!("video {} has no consensus codes", row.video_id)))?
            .codes
            .to_array();
        let coder = per_coder.entry(row.coder_id).or_default();
        for (j, (&from, &to)) in row.codes.to_array().iter().zip(&corrected).enumerate() {
            let o = &mut overall[j];
            let c = &mut coder[j];
            match (from, to) {
                (false, false) => {
                    o.ff += 1;
                    c.same += 1;
                }
                (false, true) => {
                    o.ft += 1;
                    c.ft += 1;
                }
                (true, false) => {
                    o.tf += 1;
                    c.tf += 1;
                }
                (true, true) => {
                    o.tt += 1;
                    c.same += 1;
                }
            }
        }
    }
    Ok(ChangeTables {
        overall,
        per_coder: per_coder
            .into_iter()
            .map(|(coder_id, codes)| CoderChanges { coder_id, codes })
            .collect(),
    })
}

fn fmt(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.6}")
    } else {
        "NA".to_string()
    }
}

/// `pc,coder_<id>...,adj_r_squared`, one row per fitted PC.
pub fn write_conditional_means_csv(path: &Path, fits: &[LinearFit<u32>]) -> Result<()> {
    let coders: Vec<u32> = {
        let mut all: Vec<u32> = fits.iter().flat_map(|f| f.levels.iter().copied()).collect();
        all.sort_unstable();
        all.dedup();
        all
    };
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["pc".to_string()];
    header.extend(coders.iter().map(|c| format!("coder_{c}")));
    header.push("adj_r_squared".into());
    w.write_record(&header)?;
    for (i, f) in fits.iter().enumerate() {
        let mut rec = vec![format!("PC{}", i + 1)];
        for c in &coders {
            rec.push(match f.levels.iter().position(|l| l == c) {
                Some(j) => fmt(f.conditional_means[j]),
                None => "NA".into(),
            });
        }
        rec.push(fmt(f.adjusted_r_squared));
        w.write_record(&rec)?;
    }
    finish_csv(w, path)
}

/// `var,f->f,f->t,t->f,t->t`, one row per code.
pub fn write_change_overall_csv(path: &Path, tables: &ChangeTables) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["var", "f->f", "f->t", "t->f", "t->t"])?;
    for (name, c) in CODE_NAMES.iter().zip(&tables.overall) {
        w.write_record([
            name.to_string(),
            c.ff.to_string(),
            c.ft.to_string(),
            c.tf.to_string(),
            c.tt.to_string(),
        ])?;
    }
    finish_csv(w, path)
}

/// `coder,delta,v,p,n,q,cx` with deltas `f->t`, `t->f` and `=` per coder.
pub fn write_change_per_coder_csv(path: &Path, tables: &ChangeTables) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["coder", "delta"];
    header.extend(CODE_NAMES);
    w.write_record(&header)?;
    for pc in &tables.per_coder {
        for (delta, get) in [
            ("f->t", (|c: &CoderChange| c.ft) as fn(&CoderChange) -> usize),
            ("t->f", |c| c.tf),
            ("=", |c| c.same),
        ] {
            let mut rec = vec![pc.coder_id.to_string(), delta.to_string()];
            rec.extend(pc.codes.iter().map(|c| get(c).to_string()));
            w.write_record(&rec)?;
        }
    }
    finish_csv(w, path)
}

fn score(scores: &[f64], i: usize) -> String {
    scores.get(i).map_or_else(|| "NA".to_string(), |&x| fmt(x))
}

/// Consensus codes in code sheet layout plus corrected `pc1,pc2`. Videos
/// judged by several coders list them separated by `;`.
pub fn write_consensus_csv(path: &Path, consensus: &ConsensusCodes) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["video_id", "coder_id"];
    header.extend(CODE_NAMES);
    header.extend(["coded_at", "pc1", "pc2"]);
    w.write_record(&header)?;
    for v in &consensus.videos {
        let coders: Vec<String> = v.coders.iter().map(u32::to_string).collect();
        let mut rec = vec![v.video_id.clone(), coders.join(";")];
        rec.extend(v.codes.to_array().iter().map(|&b| bit(b).to_string()));
        rec.push(timestamp(&v.coded_at));
        rec.push(score(&v.corrected_scores, 0));
        rec.push(score(&v.corrected_scores, 1));
        w.write_record(&rec)?;
    }
    finish_csv(w, path)
}

/// `video_id,pc1,pc2,pc1_corrected,pc2_corrected` per video.
pub fn write_video_scores_csv(path: &Path, consensus: &ConsensusCodes) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["video_id", "pc1", "pc2", "pc1_corrected", "pc2_corrected"])?;
    for v in &consensus.videos {
        w.write_record([
            v.video_id.clone(),
            score(&v.raw_scores, 0),
            score(&v.raw_scores, 1),
            score(&v.corrected_scores, 0),
            score(&v.corrected_scores, 1),
        ])?;
    }
    finish_csv(w, path)
}
