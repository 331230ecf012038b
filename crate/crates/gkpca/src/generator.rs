//! Decoding latent points back to input space.
//!
//! A latent point `h★` is turned into a similarity to every training point,
//! `k̂(x_k, x★) = Σ_i K̃_{k,i} h_iᵀ h★`. Those similarities are min-max scaled
//! to `[0, 1]` over all `N` training points, the `S` most similar points are
//! kept, and the estimate `x̂` is their similarity-weighted mean.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::{Error, KpcaModel, LatentPoint, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityVector {
    pub raw: Vec<f64>,
    /// Min-max scaled `raw`; all zeros when `raw` is constant.
    pub scaled: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Neighbor {
    pub index: usize,
    pub similarity: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedSample {
    pub x_hat: Vec<f64>,
    /// The `S` training points used, by descending scaled similarity.
    pub neighbors: Vec<Neighbor>,
    pub h_star: LatentPoint,
}

/// How a traversal moves through latent space. Component indices are 0-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum PathMode {
    /// Holds `start` fixed except coordinate `component`, which sweeps
    /// linearly from `from` to `to`.
    AlongComponent {
        start: LatentPoint,
        component: usize,
        from: f64,
        to: f64,
    },
    /// Straight line `(1−t)·a + t·b`, `t` equally spaced in `[0, 1]`.
    Interpolate { a: LatentPoint, b: LatentPoint },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraversalPath {
    pub mode: PathMode,
    pub steps: usize,
}

impl TraversalPath {
    pub fn validate(&self, d: usize) -> Result<()> {
        if self.steps < 2 {
            return Err(Error::input(format!("steps must be >= 2, got {}", self.steps)));
        }
        match &self.mode {
            PathMode::AlongComponent {
                start,
                component,
                from,
                to,
            } => {
                if *component >= d {
                    return Err(Error::input(format!(
                        "component {component} out of range for d={d}"
                    )));
                }
                if start.dim() != d {
                    return Err(Error::input(format!(
                        "start point has {} coordinates, expected {d}",
                        start.dim()
                    )));
                }
                if !from.is_finite() || !to.is_finite() {
                    return Err(Error::input("sweep bounds must be finite"));
                }
            }
            PathMode::Interpolate { a, b } => {
                if a.dim() != d || b.dim() != d {
                    return Err(Error::input(format!(
                        "interpolation endpoints must have {d} coordinates"
                    )));
                }
            }
        }
        Ok(())
    }

    /// The latent points visited, in order.
    pub fn points(&self) -> Vec<LatentPoint> {
        let last = (self.steps - 1) as f64;
        (0..self.steps)
            .map(|k| {
                let t = k as f64 / last;
                match &self.mode {
                    PathMode::AlongComponent {
                        start,
                        component,
                        from,
                        to,
                    } => {
                        let mut p = start.clone();
                        p.coords[*component] = from + (to - from) * t;
                        p
                    }
                    PathMode::Interpolate { a, .. } if k == 0 => a.clone(),
                    PathMode::Interpolate { b, .. } if k == self.steps - 1 => b.clone(),
                    PathMode::Interpolate { a, b } => LatentPoint::new(
                        a.coords
                            .iter()
                            .zip(&b.coords)
                            .map(|(x, y)| (1.0 - t) * x + t * y)
                            .collect(),
                    ),
                }
            })
            .collect()
    }
}

/// A latent point given either directly or as the hidden unit of a training point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LatentRef {
    Index(usize),
    Point(LatentPoint),
}

impl LatentRef {
    pub fn resolve(&self, model: &KpcaModel) -> Result<LatentPoint> {
        match self {
            LatentRef::Index(i) => model.hidden_unit(*i),
            LatentRef::Point(p) => {
                model.check_latent(p)?;
                Ok(p.clone())
            }
        }
    }
}

/// User-facing path description. Components are numbered from 1, as on the
/// latent scatter axes. A sweep starts from the origin unless `start` is set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum PathSpec {
    AlongComponent {
        component: usize,
        from: f64,
        to: f64,
        #[serde(default)]
        start: Option<LatentRef>,
    },
    Interpolate { a: LatentRef, b: LatentRef },
}

impl PathSpec {
    pub fn resolve(&self, model: &KpcaModel, steps: usize) -> Result<TraversalPath> {
        let mode = match self {
            PathSpec::AlongComponent {
                component,
                from,
                to,
                start,
            } => {
                if *component == 0 || *component > model.d() {
                    return Err(Error::input(format!(
                        "component {component} outside 1..={}",
                        model.d()
                    )));
                }
                let start = match start {
                    Some(r) => r.resolve(model)?,
                    None => LatentPoint::zeros(model.d()),
                };
                PathMode::AlongComponent {
                    start,
                    component: component - 1,
                    from: *from,
                    to: *to,
                }
            }
            PathSpec::Interpolate { a, b } => PathMode::Interpolate {
                a: a.resolve(model)?,
                b: b.resolve(model)?,
            },
        };
        let path = TraversalPath { mode, steps };
        path.validate(model.d())?;
        Ok(path)
    }
}

pub fn similarity(model: &KpcaModel, h_star: &LatentPoint) -> Result<SimilarityVector> {
    model.check_latent(h_star)?;
    let n = model.n();
    // w_i = h_iᵀ h★
    let w: Vec<f64> = (0..n)
        .map(|i| {
            model
                .h
                .column(i)
                .iter()
                .zip(&h_star.coords)
                .map(|(a, b)| a * b)
                .sum()
        })
        .collect();
    let kc = &model.k_centered.values;
    let raw: Vec<f64> = (0..n)
        .map(|k| kc.column(k).iter().zip(&w).map(|(a, b)| a * b).sum())
        .collect();
    let scaled = min_max(&raw);
    Ok(SimilarityVector { raw, scaled })
}

fn min_max(raw: &[f64]) -> Vec<f64> {
    let lo = raw.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = raw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = hi - lo;
    if !(span > 0.0) || !span.is_finite() {
        return vec![0.0; raw.len()];
    }
    raw.iter().map(|v| (v - lo) / span).collect()
}

/// Indices of the `s` largest values, descending; ties go to the lower index.
pub(crate) fn top_s(scaled: &[f64], s: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scaled.len()).collect();
    order.sort_by(|&i, &j| scaled[j].total_cmp(&scaled[i]).then(i.cmp(&j)));
    order.truncate(s);
    order
}

/// Kernel-smoother pre-image of `h_star` from its `s` most similar training points.
pub fn preimage(model: &KpcaModel, h_star: &LatentPoint, s: usize) -> Result<GeneratedSample> {
    if s < 1 || s > model.n() {
        return Err(Error::input(format!(
            "neighbour count S={s} outside 1..={}",
            model.n()
        )));
    }
    let sim = similarity(model, h_star)?;
    let picked = top_s(&sim.scaled, s);
    let neighbors: Vec<Neighbor> = picked
        .iter()
        .map(|&i| Neighbor {
            index: i,
            similarity: sim.scaled[i],
        })
        .collect();

    let total: f64 = neighbors.iter().map(|nb| nb.similarity).sum();
    if !(total > 0.0) {
        return Err(Error::Degenerate(
            "all selected neighbours have zero scaled similarity".into(),
        ));
    }
    // seeded with the first term so a single neighbour is reproduced bit-for-bit
    let first = &neighbors[0];
    let mut acc: Vec<f64> = model
        .x
        .row(first.index)
        .iter()
        .map(|v| first.similarity * v)
        .collect();
    for nb in &neighbors[1..] {
        for (a, v) in acc.iter_mut().zip(model.x.row(nb.index)) {
            *a += nb.similarity * v;
        }
    }
    let x_hat = acc.into_iter().map(|a| a / total).collect();
    Ok(GeneratedSample {
        x_hat,
        neighbors,
        h_star: h_star.clone(),
    })
}

/// Decodes a sequence of latent points, in order. Failures carry the step index.
pub fn decode_points(
    model: &KpcaModel,
    points: &[LatentPoint],
    s: usize,
) -> Result<Vec<GeneratedSample>> {
    points
        .par_iter()
        .enumerate()
        .map(|(step, h)| {
            preimage(model, h, s).map_err(|e| Error::AtStep {
                step,
                source: Box::new(e),
            })
        })
        .collect()
}

pub fn traverse(model: &KpcaModel, path: &TraversalPath, s: usize) -> Result<Vec<GeneratedSample>> {
    path.validate(model.d())?;
    decode_points(model, &path.points(), s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{fit, DataMatrix, KernelSpec};

    fn toy() -> KpcaModel {
        let x = DataMatrix::from_rows(&[
            vec![0.0, 0.0],
            vec![3.0, 0.5],
            vec![-1.0, 4.0],
            vec![5.0, 5.0],
        ])
        .unwrap();
        fit(&x, KernelSpec::gaussian(1.0).unwrap(), 4).unwrap()
    }

    #[test]
    fn zero_latent_is_degenerate() {
        let m = toy();
        let h = LatentPoint::zeros(4);
        let sim = similarity(&m, &h).unwrap();
        assert!(sim.raw.iter().all(|&v| v == 0.0));
        assert!(sim.scaled.iter().all(|&v| v == 0.0));
        let err = preimage(&m, &h, 2).unwrap_err();
        assert!(matches!(err, Error::Degenerate(_)));
    }

    #[test]
    fn single_neighbour_reproduces_training_point() {
        let m = toy();
        for j in 0..4 {
            let s = preimage(&m, &m.hidden_unit(j).unwrap(), 1).unwrap();
            assert_eq!(s.neighbors[0].index, j);
            assert_eq!(s.x_hat, m.data().row(j));
        }
    }

    #[test]
    fn s_out_of_range() {
        let m = toy();
        let h = m.hidden_unit(0).unwrap();
        assert!(matches!(preimage(&m, &h, 0), Err(Error::Input(_))));
        assert!(matches!(preimage(&m, &h, 5), Err(Error::Input(_))));
    }

    #[test]
    fn wrong_latent_length() {
        let m = toy();
        assert!(similarity(&m, &LatentPoint::zeros(3)).is_err());
    }

    #[test]
    fn ties_prefer_lower_index() {
        assert_eq!(top_s(&[0.5, 1.0, 0.5, 1.0], 3), vec![1, 3, 0]);
    }

    #[test]
    fn sweep_with_equal_bounds_repeats_sample() {
        let m = toy();
        let path = TraversalPath {
            mode: PathMode::AlongComponent {
                start: m.hidden_unit(1).unwrap(),
                component: 0,
                from: 0.2,
                to: 0.2,
            },
            steps: 5,
        };
        let out = traverse(&m, &path, 2).unwrap();
        assert_eq!(out.len(), 5);
        assert!(out.windows(2).all(|w| w[0] == w[1]));
    }

    #[test]
    fn path_validation() {
        let m = toy();
        let bad_steps = TraversalPath {
            mode: PathMode::Interpolate {
                a: m.hidden_unit(0).unwrap(),
                b: m.hidden_unit(1).unwrap(),
            },
            steps: 1,
        };
        assert!(traverse(&m, &bad_steps, 1).is_err());
        let bad_component = TraversalPath {
            mode: PathMode::AlongComponent {
                start: LatentPoint::zeros(4),
                component: 4,
                from: 0.0,
                to: 1.0,
            },
            steps: 3,
        };
        assert!(traverse(&m, &bad_component, 1).is_err());
    }

    #[test]
    fn failing_step_is_named() {
        let m = toy();
        let path = TraversalPath {
            mode: PathMode::Interpolate {
                a: LatentPoint::zeros(4),
                b: m.hidden_unit(1).unwrap(),
            },
            steps: 3,
        };
        match traverse(&m, &path, 1).unwrap_err() {
            Error::AtStep { step, source } => {
                assert_eq!(step, 0);
                assert!(matches!(*source, Error::Degenerate(_)));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn path_spec_json_forms() {
        let m = toy();
        let spec: PathSpec =
            serde_json::from_str(r#"{"mode": "interpolate", "a": 1, "b": [0.1, 0.2, 0.3, 0.4]}"#).unwrap();
        let path = spec.resolve(&m, 3).unwrap();
        let pts = path.points();
        assert_eq!(pts[0], m.hidden_unit(1).unwrap());
        assert_eq!(pts[2].coords, vec![0.1, 0.2, 0.3, 0.4]);

        let spec: PathSpec =
            serde_json::from_str(r#"{"mode": "along_component", "component": 2, "from": -1, "to": 1}"#).unwrap();
        let pts = spec.resolve(&m, 5).unwrap().points();
        assert_eq!(pts[4].coords, vec![0.0, 1.0, 0.0, 0.0]);

        let bad: PathSpec =
            serde_json::from_str(r#"{"mode": "along_component", "component": 0, "from": 0, "to": 1}"#).unwrap();
        assert!(bad.resolve(&m, 5).is_err());
        assert!(spec.resolve(&m, 1).is_err());
        let short = PathSpec::Interpolate {
            a: LatentRef::Index(9),
            b: LatentRef::Index(0),
        };
        assert!(matches!(short.resolve(&m, 3), Err(Error::Index { .. })));
    }
}
