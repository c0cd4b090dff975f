//! Savitzky-Golay smoothing for raw range histories.
//!
//! A sliding least-squares polynomial fit. The online estimator uses the
//! causal variant (window trailing the newest sample, evaluated at the
//! newest point) because future samples do not exist yet; offline replay
//! uses the classical centered variant.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SgError {
    #[error("window must be odd and positive, got {0}")]
    EvenWindow(usize),
    #[error("polynomial order {order} must be smaller than window {window}")]
    OrderTooHigh { order: usize, window: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SgMode {
    /// Window trails the current sample; output evaluated at the newest
    /// point.
    Causal,
    /// Window centered on the output point (needs future samples).
    Centered,
}

/// Convolution weights for a least-squares polynomial fit over `window`
/// points evaluated at `eval_offset` (0 = last point of the window,
/// -(window-1)/2 = center).
fn fit_weights(window: usize, order: usize, eval_offset: i64) -> Vec<f64> {
    let offsets: Vec<f64> =
        (0..window).map(|i| i as i64 - (window as i64 - 1) - eval_offset).map(|t| t as f64).collect();
    // Vandermonde of the fit basis.
    let a = DMatrix::from_fn(window, order + 1, |r, c| offsets[r].powi(c as i32));
    let m = a.transpose() * &a;
    let e0 = DVector::from_fn(order + 1, |r, _| if r == 0 { 1.0 } else { 0.0 });
    let c = m.lu().solve(&e0).expect("normal equations are invertible for order < window");
    (a * c).iter().copied().collect()
}

/// Weights for the causal variant (evaluate the trailing fit at the newest
/// sample).
pub fn causal_weights(window: usize, order: usize) -> Result<Vec<f64>, SgError> {
    validate(window, order)?;
    Ok(fit_weights(window, order, 0))
}

/// Weights for the centered variant (evaluate at the window center).
pub fn centered_weights(window: usize, order: usize) -> Result<Vec<f64>, SgError> {
    validate(window, order)?;
    Ok(fit_weights(window, order, -((window as i64 - 1) / 2)))
}

fn validate(window: usize, order: usize) -> Result<(), SgError> {
    if window % 2 == 0 || window == 0 {
        return Err(SgError::EvenWindow(window));
    }
    if order >= window {
        return Err(SgError::OrderTooHigh { order, window });
    }
    Ok(())
}

/// Filters a whole series. Points whose window would leave the series pass
/// through unfiltered (short prefixes in causal mode, both edges in centered
/// mode).
pub fn sg_filter(series: &[f64], window: usize, order: usize, mode: SgMode) -> Result<Vec<f64>, SgError> {
    validate(window, order)?;
    let n = series.len();
    let mut out = series.to_vec();
    match mode {
        SgMode::Causal => {
            let weights = causal_weights(window, order)?;
            for t in (window - 1)..n {
                out[t] = dot(&weights, &series[t + 1 - window..=t]);
            }
        }
        SgMode::Centered => {
            let weights = centered_weights(window, order)?;
            let half = (window - 1) / 2;
            for t in half..n.saturating_sub(half) {
                out[t] = dot(&weights, &series[t - half..=t + half]);
            }
        }
    }
    Ok(out)
}

/// Streaming causal filter: applies the precomputed weights to the last
/// `window` samples, passing short histories through unfiltered.
#[derive(Debug, Clone)]
pub struct CausalSg {
    window: usize,
    weights: Vec<f64>,
}

impl CausalSg {
    pub fn new(window: usize, order: usize) -> Result<Self, SgError> {
        Ok(CausalSg { window, weights: causal_weights(window, order)? })
    }

    pub fn window(&self) -> usize {
        self.window
    }

    /// Smoothed value at the newest sample of `history`.
    pub fn latest(&self, history: &[f64]) -> f64 {
        if history.len() < self.window {
            *history.last().expect("history must be non-empty")
        } else {
            dot(&self.weights, &history[history.len() - self.window..])
        }
    }
}

fn dot(weights: &[f64], samples: &[f64]) -> f64 {
    weights.iter().zip(samples).map(|(w, s)| w * s).sum()
}
