use serde::{Deserialize, Serialize};

/// Weights of the trial score.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoreWeights {
    /// Share of the speed that depends on detection accuracy.
    pub detection_weight: f64,
    pub mc_correct_factor: f64,
    pub mc_wrong_factor: f64,
}

impl Default for ScoreWeights {
    fn default() -> Self {
        Self {
            detection_weight: 0.5,
            mc_correct_factor: 1.1,
            mc_wrong_factor: 0.9,
        }
    }
}

/// `1 − min(1, |presses − expected| / max(1, expected))`.
pub fn detection_accuracy(presses: u32, expected: u32) -> f64 {
    let miss = (presses as f64 - expected as f64).abs() / (expected.max(1) as f64);
    1.0 - miss.min(1.0)
}

/// Speed scaled by detection accuracy and the multiple-choice outcome,
/// rounded to an integer.
pub fn compute_score(wpm: f64, presses: u32, expected: u32, mc_correct: Option<bool>, weights: &ScoreWeights) -> i64 {
    let acc = detection_accuracy(presses, expected);
    let w = weights.detection_weight;
    let factor = match mc_correct {
        None => 1.0,
        Some(true) => weights.mc_correct_factor,
        Some(false) => weights.mc_wrong_factor,
    };
    libm::round(wpm * ((1.0 - w) + w * acc) * factor) as i64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn score_examples() {
        let w = ScoreWeights::default();
        assert_eq!(compute_score(200.0, 3, 3, None, &w), 200);
        assert_eq!(compute_score(200.0, 0, 3, None, &w), 100);
        assert_eq!(compute_score(200.0, 3, 3, Some(true), &w), 220);
        assert_eq!(compute_score(200.0, 3, 3, Some(false), &w), 180);
        assert_eq!(compute_score(0.0, 3, 3, Some(true), &w), 0);
    }

    #[test]
    fn accuracy_saturates() {
        assert_eq!(detection_accuracy(10, 2), 0.0);
        assert_eq!(detection_accuracy(0, 0), 1.0);
        assert_eq!(detection_accuracy(1, 0), 0.0);
        assert_eq!(detection_accuracy(2, 4), 0.5);
    }
}
