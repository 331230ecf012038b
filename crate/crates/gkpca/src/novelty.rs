//! Novelty scoring by reconstruction error in feature space.
//!
//! The score of `z` is the squared distance between `φ̃(z)` and its projection
//! onto the span of the fitted principal axes:
//! `‖φ̃(z)‖² − Σ_l f_l(z)²` with `f_l(z) = λ_l^{-1/2} Σ_i H_{l,i} k̃(z, x_i)`.

use rayon::prelude::*;
use serde::Serialize;

use crate::{DataMatrix, Error, KpcaModel, Result};

pub const DEFAULT_QUANTILE: f64 = 0.2;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NoveltyReport {
    pub scores: Vec<f64>,
    pub threshold: f64,
    pub flags: Vec<bool>,
    pub quantile: f64,
}

impl NoveltyReport {
    pub fn flagged_count(&self) -> usize {
        self.flags.iter().filter(|&&f| f).count()
    }

    /// `index,score,flag` CSV with a header row.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,score,flag\n");
        for (i, (s, f)) in self.scores.iter().zip(&self.flags).enumerate() {
            out.push_str(&format!("{i},{s:e},{}\n", u8::from(*f)));
        }
        out
    }
}

/// Reconstruction error from a centered kernel vector, using the first
/// `components` fitted components.
pub(crate) fn score_centered(model: &KpcaModel, kc: &[f64], self_c: f64, components: usize) -> f64 {
    let mut captured = 0.0;
    for l in 0..components {
        if !model.is_active(l) {
            continue;
        }
        let dot: f64 = model.h.row(l).iter().zip(kc).map(|(a, b)| a * b).sum();
        let f = dot / model.lambdas[l].sqrt();
        captured += f * f;
    }
    (self_c - captured).max(0.0)
}

pub fn novelty_score(model: &KpcaModel, z: &[f64]) -> Result<f64> {
    novelty_score_components(model, z, model.d())
}

/// Novelty score restricted to the leading `components` axes (`0..=d`).
pub fn novelty_score_components(model: &KpcaModel, z: &[f64], components: usize) -> Result<f64> {
    if components > model.d() {
        return Err(Error::input(format!(
            "asked for {components} components, model has d={}",
            model.d()
        )));
    }
    if z.iter().any(|v| !v.is_finite()) {
        return Err(Error::input("point has non-finite values"));
    }
    let (kc, self_c) = model.centered_kernel_vector(z)?;
    Ok(score_centered(model, &kc, self_c, components))
}

/// Scores of the training points themselves, read off the stored `K̃`.
pub fn training_scores(model: &KpcaModel) -> Vec<f64> {
    let kc = &model.k_centered.values;
    (0..model.n())
        .into_par_iter()
        .map(|j| {
            let col: Vec<f64> = kc.column(j).iter().copied().collect();
            score_centered(model, &col, kc[(j, j)], model.d())
        })
        .collect()
}

pub fn novelty_report(model: &KpcaModel, z: &DataMatrix, quantile: f64) -> Result<NoveltyReport> {
    check_quantile(quantile)?;
    if z.rows() == 0 {
        return Err(Error::input("no points to score"));
    }
    let scores = (0..z.rows())
        .into_par_iter()
        .map(|i| novelty_score(model, z.row(i)))
        .collect::<Result<Vec<_>>>()?;
    Ok(threshold_scores(scores, quantile))
}

pub fn novelty_report_training(model: &KpcaModel, quantile: f64) -> Result<NoveltyReport> {
    check_quantile(quantile)?;
    Ok(threshold_scores(training_scores(model), quantile))
}

fn check_quantile(q: f64) -> Result<()> {
    if q > 0.0 && q < 1.0 {
        Ok(())
    } else {
        Err(Error::input(format!("quantile must lie in (0, 1), got {q}")))
    }
}

/// Flags the `⌈q·M⌉` highest scores. Equal scores are ranked by index, so a
/// tie at the threshold admits the lower-index points first.
pub fn threshold_scores(scores: Vec<f64>, quantile: f64) -> NoveltyReport {
    let m = scores.len();
    // shave off representation error so that e.g. 0.2·5 counts as exactly 1
    let count = ((quantile * m as f64) - 1e-9).ceil().clamp(1.0, m as f64) as usize;
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&i, &j| scores[j].total_cmp(&scores[i]).then(i.cmp(&j)));
    let mut flags = vec![false; m];
    for &i in &order[..count] {
        flags[i] = true;
    }
    NoveltyReport {
        threshold: scores[order[count - 1]],
        scores,
        flags,
        quantile,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_of_five_flagged_at_twenty_percent() {
        let r = threshold_scores(vec![0.1, 0.5, 0.3, 0.2, 0.4], 0.2);
        assert_eq!(r.flagged_count(), 1);
        assert!(r.flags[1]);
        assert_eq!(r.threshold, 0.5);
    }

    #[test]
    fn half_of_four() {
        let r = threshold_scores(vec![1.0, 4.0, 3.0, 2.0], 0.5);
        assert_eq!(r.flags, vec![false, true, true, false]);
    }

    #[test]
    fn thousand_points_two_hundred_flagged() {
        let scores: Vec<f64> = (0..1000).map(|i| ((i * 7919) % 1000) as f64).collect();
        assert_eq!(threshold_scores(scores, 0.2).flagged_count(), 200);
    }

    #[test]
    fn ties_admit_lower_index() {
        let r = threshold_scores(vec![1.0, 1.0, 1.0, 1.0], 0.5);
        assert_eq!(r.flags, vec![true, true, false, false]);
    }

    #[test]
    fn quantile_bounds() {
        assert!(check_quantile(0.0).is_err());
        assert!(check_quantile(1.0).is_err());
        assert!(check_quantile(1.5).is_err());
        assert!(check_quantile(f64::NAN).is_err());
        assert!(check_quantile(0.2).is_ok());
    }

    #[test]
    fn csv_layout() {
        let r = threshold_scores(vec![0.25, 2.0], 0.5);
        assert_eq!(r.to_csv(), "index,score,flag\n0,2.5e-1,0\n1,2e0,1\n");
    }
}
