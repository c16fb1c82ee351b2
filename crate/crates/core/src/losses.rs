//! Reference implementations of the training objective.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::raster::{MapSet, RasterMap};

pub const PROB_CLAMP: f64 = 1e-7;
pub const WEIGHT_SUM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LossError {
    #[error("dimension mismatch: {0}x{1} vs {2}x{3}")]
    DimMismatch(usize, usize, usize, usize),
    #[error("loss weights must be non-negative and sum to 1, got ({0}, {1}, {2})")]
    InvalidWeights(f64, f64, f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Reduction {
    #[default]
    Sum,
    /// Divide by the pixel count.
    Mean,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossWeights {
    pub lambda1: f64,
    pub lambda2: f64,
    pub lambda3: f64,
}

impl Default for LossWeights {
    fn default() -> Self {
        Self {
            lambda1: 1.0 / 3.0,
            lambda2: 1.0 / 3.0,
            lambda3: 1.0 / 3.0,
        }
    }
}

impl LossWeights {
    pub fn new(lambda1: f64, lambda2: f64, lambda3: f64) -> Result<Self, LossError> {
        let w = Self {
            lambda1,
            lambda2,
            lambda3,
        };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<(), LossError> {
        let l = [self.lambda1, self.lambda2, self.lambda3];
        let ok = l.iter().all(|v| v.is_finite() && *v >= 0.0)
            && (l.iter().sum::<f64>() - 1.0).abs() <= WEIGHT_SUM_TOLERANCE;
        if ok {
            Ok(())
        } else {
            Err(LossError::InvalidWeights(l[0], l[1], l[2]))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossReport {
    pub region_loss: f64,
    pub character_loss: f64,
    pub orientation_loss: f64,
    pub fused: f64,
    pub beta_region: f64,
    pub beta_character: f64,
}

/// Neumaier compensated sum.
#[derive(Debug, Default, Clone, Copy)]
struct CompensatedSum {
    sum: f64,
    c: f64,
}

impl CompensatedSum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.c += (self.sum - t) + x;
        } else {
            self.c += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(self) -> f64 {
        self.sum + self.c
    }
}

fn check_dims(a: &RasterMap, b: &RasterMap) -> Result<(), LossError> {
    if a.width() != b.width() || a.height() != b.height() {
        return Err(LossError::DimMismatch(
            a.width(),
            a.height(),
            b.width(),
            b.height(),
        ));
    }
    Ok(())
}

fn reduce(total: f64, pixels: usize, reduction: Reduction) -> f64 {
    match reduction {
        Reduction::Sum => total,
        Reduction::Mean => total / pixels as f64,
    }
}

/// Fraction of background pixels in a binary ground-truth map.
pub fn background_fraction(gt: &RasterMap) -> f64 {
    background_fraction_of(gt.data().iter().map(|&v| v as f64))
}

fn background_fraction_of(gt: impl ExactSizeIterator<Item = f64>) -> f64 {
    let n = gt.len();
    let bg = gt.filter(|&v| v < 0.5).count();
    bg as f64 / n as f64
}

/// Class-balanced binary cross-entropy on raw values, summed, natural log.
/// Returns `(loss, beta)`.
pub fn balanced_cross_entropy_values(pred: &[f64], gt: &[f64]) -> (f64, f64) {
    assert_eq!(
        pred.len(),
        gt.len(),
        "prediction and ground truth lengths differ"
    );
    let beta = background_fraction_of(gt.iter().copied());
    let mut acc = CompensatedSum::default();
    for (&p, &r) in pred.iter().zip(gt) {
        let p = p.clamp(PROB_CLAMP, 1.0 - PROB_CLAMP);
        if r >= 0.5 {
            acc.add(-beta * p.ln());
        } else {
            acc.add(-(1.0 - beta) * (1.0 - p).ln());
        }
    }
    (acc.value(), beta)
}

/// Derivative of [`balanced_cross_entropy_values`] with respect to each
/// prediction. Clamped predictions get the derivative at the clamp bound.
pub fn balanced_cross_entropy_gradient(pred: &[f64], gt: &[f64]) -> Vec<f64> {
    assert_eq!(
        pred.len(),
        gt.len(),
        "prediction and ground truth lengths differ"
    );
    let beta = background_fraction_of(gt.iter().copied());
    pred.iter()
        .zip(gt)
        .map(|(&p, &r)| {
            let p = p.clamp(PROB_CLAMP, 1.0 - PROB_CLAMP);
            if r >= 0.5 {
                -beta / p
            } else {
                (1.0 - beta) / (1.0 - p)
            }
        })
        .collect()
}

fn widen(m: &RasterMap) -> Vec<f64> {
    m.data().iter().map(|&v| v as f64).collect()
}

/// Class-balanced binary cross-entropy of two maps. Returns `(loss, beta)`.
pub fn balanced_cross_entropy(
    pred: &RasterMap,
    gt: &RasterMap,
    reduction: Reduction,
) -> Result<(f64, f64), LossError> {
    check_dims(pred, gt)?;
    let (total, beta) = balanced_cross_entropy_values(&widen(pred), &widen(gt));
    Ok((reduce(total, pred.data().len(), reduction), beta))
}

pub fn region_loss(pred: &RasterMap, gt: &RasterMap) -> Result<(f64, f64), LossError> {
    balanced_cross_entropy(pred, gt, Reduction::Sum)
}

pub fn character_loss(pred: &RasterMap, gt: &RasterMap) -> Result<(f64, f64), LossError> {
    balanced_cross_entropy(pred, gt, Reduction::Sum)
}

/// Double-peak orientation loss over region foreground.
pub fn orientation_loss(
    pred: &RasterMap,
    gt: &RasterMap,
    region_gt: &RasterMap,
    reduction: Reduction,
) -> Result<f64, LossError> {
    check_dims(pred, gt)?;
    check_dims(pred, region_gt)?;
    let mut acc = CompensatedSum::default();
    for ((&p, &t), &r) in pred.data().iter().zip(gt.data()).zip(region_gt.data()) {
        if r >= 0.5 {
            acc.add(orientation_pixel_loss(p as f64, t as f64));
        }
    }
    Ok(reduce(acc.value(), pred.data().len(), reduction))
}

pub fn orientation_pixel_loss(pred: f64, gt: f64) -> f64 {
    (std::f64::consts::PI * (pred - gt).abs()).sin().max(0.0)
}

pub fn fused_loss(
    region: f64,
    character: f64,
    orientation: f64,
    weights: &LossWeights,
) -> Result<f64, LossError> {
    weights.validate()?;
    Ok(weights.lambda1 * region + weights.lambda2 * character + weights.lambda3 * orientation)
}

#[derive(Debug, Clone, Copy)]
pub struct MapTriple<'a> {
    pub region: &'a RasterMap,
    pub character: &'a RasterMap,
    pub orientation: &'a RasterMap,
}

impl<'a> From<&'a MapSet> for MapTriple<'a> {
    fn from(m: &'a MapSet) -> Self {
        Self {
            region: &m.region,
            character: &m.character,
            orientation: &m.orientation,
        }
    }
}

/// All three channel losses and their weighted sum.
pub fn loss_report(
    pred: MapTriple<'_>,
    gt: MapTriple<'_>,
    weights: &LossWeights,
    reduction: Reduction,
) -> Result<LossReport, LossError> {
    let (region_loss, beta_region) = balanced_cross_entropy(pred.region, gt.region, reduction)?;
    let (character_loss, beta_character) =
        balanced_cross_entropy(pred.character, gt.character, reduction)?;
    let orientation_loss =
        orientation_loss(pred.orientation, gt.orientation, gt.region, reduction)?;
    let fused = fused_loss(region_loss, character_loss, orientation_loss, weights)?;
    Ok(LossReport {
        region_loss,
        character_loss,
        orientation_loss,
        fused,
        beta_region,
        beta_character,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::Channel;
    use approx::assert_abs_diff_eq;

    fn map(ch: Channel, v: &[f32]) -> RasterMap {
        RasterMap::from_vec(v.len(), 1, ch, v.to_vec()).unwrap()
    }

    #[test]
    fn two_pixel_example() {
        let expect = -0.5 * 0.8f64.ln() - 0.5 * 0.6f64.ln();
        let (l, b) = region_loss(
            &map(Channel::Region, &[0.8, 0.4]),
            &map(Channel::Region, &[1.0, 0.0]),
        )
        .unwrap();
        assert_eq!(b, 0.5);
        // f32 storage of 0.8 and 0.4 limits agreement.
        assert_abs_diff_eq!(l, expect, epsilon = 1e-6);
        assert_abs_diff_eq!(l, 0.3670, epsilon = 1e-4);
        let (l2, _) = character_loss(
            &map(Channel::Character, &[0.4, 0.8]),
            &map(Channel::Character, &[0.0, 1.0]),
        )
        .unwrap();
        assert_abs_diff_eq!(l2, l, epsilon = 1e-12);
    }

    #[test]
    fn perfect_and_background_only() {
        let (l, _) = region_loss(
            &map(Channel::Region, &[1.0, 0.0]),
            &map(Channel::Region, &[1.0, 0.0]),
        )
        .unwrap();
        assert!(l <= 2.0 * -(1.0 - PROB_CLAMP).ln() + 1e-15);
        let (l, b) = region_loss(
            &map(Channel::Region, &[0.3, 0.9]),
            &map(Channel::Region, &[0.0, 0.0]),
        )
        .unwrap();
        assert_eq!(b, 1.0);
        assert_eq!(l, 0.0);
    }

    #[test]
    fn orientation_examples() {
        let fg = map(Channel::Region, &[1.0]);
        let o = |v: f32| map(Channel::Orientation, &[v]);
        assert_eq!(
            orientation_loss(&o(0.3), &o(0.3), &fg, Reduction::Sum).unwrap(),
            0.0
        );
        assert_abs_diff_eq!(
            orientation_loss(&o(0.75), &o(0.25), &fg, Reduction::Sum).unwrap(),
            1.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            orientation_loss(&o(1.0), &o(0.0), &fg, Reduction::Sum).unwrap(),
            0.0,
            epsilon = 1e-12
        );
        let bg = map(Channel::Region, &[0.0]);
        assert_eq!(
            orientation_loss(&o(0.75), &o(0.25), &bg, Reduction::Sum).unwrap(),
            0.0
        );
    }

    #[test]
    fn fused_examples() {
        let w = LossWeights::default();
        assert_eq!(fused_loss(0.0, 0.0, 0.0, &w).unwrap(), 0.0);
        assert_abs_diff_eq!(fused_loss(0.3, 0.6, 0.9, &w).unwrap(), 0.6, epsilon = 1e-12);
        let p = LossWeights::new(1.0, 0.0, 0.0).unwrap();
        assert_eq!(fused_loss(0.7, 123.0, 9.0, &p).unwrap(), 0.7);
        assert!(LossWeights::new(0.5, 0.5, 0.5).is_err());
        assert!(LossWeights::new(1.5, -0.5, 0.0).is_err());
    }

    #[test]
    fn dim_mismatch() {
        let a = RasterMap::zeros(2, 2, Channel::Region);
        let b = RasterMap::zeros(3, 2, Channel::Region);
        assert!(region_loss(&a, &b).is_err());
    }

    #[test]
    fn mean_reduction_divides_by_pixels() {
        let p = map(Channel::Region, &[0.8, 0.4]);
        let g = map(Channel::Region, &[1.0, 0.0]);
        let (s, _) = balanced_cross_entropy(&p, &g, Reduction::Sum).unwrap();
        let (m, _) = balanced_cross_entropy(&p, &g, Reduction::Mean).unwrap();
        assert_abs_diff_eq!(m, s / 2.0, epsilon = 1e-15);
    }

    #[test]
    fn gradient_at_reference_points() {
        let h = 1e-5;
        for &pv in &[0.2, 0.5, 0.8] {
            for &r in &[0.0, 1.0] {
                let gt = [r, 1.0, 0.0];
                let mut p = [pv, 0.5, 0.3];
                let analytic = balanced_cross_entropy_gradient(&p, &gt)[0];
                p[0] = pv + h;
                let up = balanced_cross_entropy_values(&p, &gt).0;
                p[0] = pv - h;
                let down = balanced_cross_entropy_values(&p, &gt).0;
                let fd = (up - down) / (2.0 * h);
                assert!(((analytic - fd) / analytic).abs() < 1e-4);
            }
        }
    }
}
