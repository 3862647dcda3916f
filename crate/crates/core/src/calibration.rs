//! Binned calibration error for predicted class probabilities.

use serde::{Deserialize, Serialize};

use crate::constants::CALIBRATION_BIN_WIDTH;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationBin {
    pub event: String,
    pub bin: usize,
    pub n: usize,
    pub predicted: f64,
    pub observed: f64,
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventCalibration {
    pub event: String,
    pub n: usize,
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationReport {
    pub bin_width: f64,
    pub bins: Vec<CalibrationBin>,
    pub events: Vec<EventCalibration>,
    pub overall: f64,
}

pub fn n_bins() -> usize {
    (1.0 / CALIBRATION_BIN_WIDTH).round() as usize
}

/// Bin of a probability: `[0, .05), [.05, .1), …, [.95, 1]`.
pub fn bin_of(p: f64) -> usize {
    let b = n_bins();
    ((p * b as f64).floor().max(0.0) as usize).min(b - 1)
}

/// `predictions[i][y]` is the predicted probability of event `y` for row
/// `i`; `actual[i]` is the observed event index. Empty bins are omitted.
pub fn calibration(predictions: &[Vec<f64>], actual: &[usize], events: &[&str]) -> CalibrationReport {
    assert_eq!(predictions.len(), actual.len(), "rows must align");
    let nb = n_bins();
    let mut bins = Vec::new();
    let mut per_event = Vec::new();
    for (y, name) in events.iter().enumerate() {
        let mut n = vec![0usize; nb];
        let mut psum = vec![0.0f64; nb];
        let mut hits = vec![0usize; nb];
        for (row, &a) in predictions.iter().zip(actual) {
            let b = bin_of(row[y]);
            n[b] += 1;
            psum[b] += row[y];
            hits[b] += usize::from(a == y);
        }
        let mut ny = 0usize;
        let mut acc = 0.0;
        for b in 0..nb {
            if n[b] == 0 {
                continue;
            }
            let predicted = psum[b] / n[b] as f64;
            let observed = hits[b] as f64 / n[b] as f64;
            let error = (predicted - observed).abs();
            ny += n[b];
            acc += n[b] as f64 * error;
            bins.push(CalibrationBin {
                event: name.to_string(),
                bin: b,
                n: n[b],
                predicted,
                observed,
                error,
            });
        }
        per_event.push(EventCalibration {
            event: name.to_string(),
            n: ny,
            error: if ny > 0 { acc / ny as f64 } else { 0.0 },
        });
    }
    let overall = overall_from_bins(&bins);
    CalibrationReport {
        bin_width: CALIBRATION_BIN_WIDTH,
        bins,
        events: per_event,
        overall,
    }
}

/// Recomputes the overall error from stored bin rows.
pub fn overall_from_bins(bins: &[CalibrationBin]) -> f64 {
    let n: usize = bins.iter().map(|b| b.n).sum();
    if n == 0 {
        return 0.0;
    }
    bins.iter().map(|b| b.n as f64 * b.error).sum::<f64>() / n as f64
}
