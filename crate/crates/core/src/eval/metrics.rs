use crate::codelength::Decision;
use crate::data::Direction;
use crate::{Error, Result};

fn check_weights(weights: &[f64]) -> Result<()> {
    if let Some(w) = weights.iter().find(|w| !(**w > 0.0 && w.is_finite())) {
        return Err(Error::argument(format!("weight {w} must be positive and finite")));
    }
    Ok(())
}

/// Weighted area under the ROC curve: the weighted probability that a
/// positive outscores a negative, ties counting one half.
///
/// Runs in `O(n log n)` by sweeping tie groups in ascending score order.
pub fn auroc(scores: &[f64], positives: &[bool], weights: &[f64]) -> Result<f64> {
    if scores.len() != positives.len() || scores.len() != weights.len() {
        return Err(Error::argument(format!(
            "auroc: {} scores, {} labels, {} weights",
            scores.len(),
            positives.len(),
            weights.len()
        )));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::argument("auroc: NaN score"));
    }
    check_weights(weights)?;

    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));

    let (mut total_pos, mut total_neg) = (0.0, 0.0);
    let mut neg_below = 0.0;
    let mut numerator = 0.0;
    let mut i = 0;
    while i < order.len() {
        let score = scores[order[i]];
        let (mut group_pos, mut group_neg) = (0.0, 0.0);
        while i < order.len() && scores[order[i]] == score {
            let k = order[i];
            if positives[k] {
                group_pos += weights[k];
            } else {
                group_neg += weights[k];
            }
            i += 1;
        }
        numerator += group_pos * (neg_below + 0.5 * group_neg);
        neg_below += group_neg;
        total_pos += group_pos;
        total_neg += group_neg;
    }
    if total_pos == 0.0 || total_neg == 0.0 {
        return Err(Error::argument("auroc needs at least one positive and one negative"));
    }
    Ok(numerator / (total_pos * total_neg))
}

/// Mean of the AUROC with `X -> Y` as the positive class (scored by
/// `final_delta`) and the AUROC with `Y -> X` as the positive class
/// (scored by `-final_delta`).
pub fn bi_auroc(final_deltas: &[f64], labels: &[Direction], weights: &[f64]) -> Result<f64> {
    let forward_pos: Vec<bool> = labels.iter().map(|l| *l == Direction::XCausesY).collect();
    let backward_pos: Vec<bool> = labels.iter().map(|l| *l == Direction::YCausesX).collect();
    let negated: Vec<f64> = final_deltas.iter().map(|d| -d).collect();
    let forward = auroc(final_deltas, &forward_pos, weights)?;
    let backward = auroc(&negated, &backward_pos, weights)?;
    Ok(0.5 * (forward + backward))
}

/// `Σ w_i [decision_i == label_i] / Σ w_i`; undecided never matches.
pub fn weighted_accuracy(decisions: &[Decision], labels: &[Direction], weights: &[f64]) -> Result<f64> {
    if decisions.len() != labels.len() || decisions.len() != weights.len() {
        return Err(Error::argument(format!(
            "weighted_accuracy: {} decisions, {} labels, {} weights",
            decisions.len(),
            labels.len(),
            weights.len()
        )));
    }
    if decisions.is_empty() {
        return Err(Error::argument("weighted_accuracy of an empty set"));
    }
    check_weights(weights)?;
    let total: f64 = weights.iter().sum();
    let correct: f64 = decisions
        .iter()
        .zip(labels)
        .zip(weights)
        .filter(|((d, l), _)| d.matches(**l))
        .map(|(_, w)| w)
        .sum();
    Ok(correct / total)
}

/// Unweighted accuracy.
pub fn accuracy(decisions: &[Decision], labels: &[Direction]) -> Result<f64> {
    weighted_accuracy(decisions, labels, &vec![1.0; decisions.len()])
}
