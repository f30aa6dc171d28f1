use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::data::{standardize, Direction, PairDataset};
use crate::numeric::RngStream;
use crate::Result;

use super::train::{conditional_variational_codelength, marginal_gaussian_codelength, train_conditional};
use super::TrainConfig;

/// Codelengths of one hypothesized direction, in nats.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DirectionReport {
    pub l_marginal_cause: f64,
    pub l_conditional_effect: f64,
    /// `l_marginal_cause + l_conditional_effect`.
    pub delta: f64,
}

impl DirectionReport {
    pub fn new(l_marginal_cause: f64, l_conditional_effect: f64) -> Self {
        Self {
            l_marginal_cause,
            l_conditional_effect,
            delta: l_marginal_cause + l_conditional_effect,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Decision {
    XCausesY,
    YCausesX,
    Undecided,
}

impl Decision {
    /// Sign rule on the final score: positive favours `X -> Y`.
    pub fn from_final_delta(final_delta: f64) -> Self {
        if final_delta > 0.0 {
            Decision::XCausesY
        } else if final_delta < 0.0 {
            Decision::YCausesX
        } else {
            Decision::Undecided
        }
    }

    pub fn mirrored(self) -> Self {
        match self {
            Decision::XCausesY => Decision::YCausesX,
            Decision::YCausesX => Decision::XCausesY,
            Decision::Undecided => Decision::Undecided,
        }
    }

    pub fn matches(self, label: Direction) -> bool {
        matches!(
            (self, label),
            (Decision::XCausesY, Direction::XCausesY) | (Decision::YCausesX, Direction::YCausesX)
        )
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Decision::XCausesY => "x_causes_y",
            Decision::YCausesX => "y_causes_x",
            Decision::Undecided => "undecided",
        }
    }
}

impl fmt::Display for Decision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Both directions of one pair plus the final score and decision.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairReport {
    /// `X -> Y`.
    pub forward: DirectionReport,
    /// `Y -> X`.
    pub backward: DirectionReport,
    /// `backward.delta - forward.delta`.
    pub final_delta: f64,
    pub decision: Decision,
    /// `|final_delta|`.
    pub confidence: f64,
}

impl PairReport {
    pub fn new(forward: DirectionReport, backward: DirectionReport) -> Self {
        let final_delta = backward.delta - forward.delta;
        Self {
            forward,
            backward,
            final_delta,
            decision: Decision::from_final_delta(final_delta),
            confidence: final_delta.abs(),
        }
    }
}

/// Stable permutation that sorts `v` ascending.
fn rank_order(v: &[f64]) -> Vec<u32> {
    let mut idx: Vec<u32> = (0..v.len() as u32).collect();
    idx.sort_by(|&a, &b| v[a as usize].total_cmp(&v[b as usize]));
    idx
}

/// Tag naming the role "this column is the cause, that one the effect".
///
/// The tag depends only on the sample orderings of the two columns, so it
/// is the same whichever position the cause occupies in the file (making
/// the swapped pair's computation the mirror image of the original) and
/// unchanged by increasing affine rescaling of either column.
fn role_tag(cause: &[f64], effect: &[f64]) -> String {
    let mut hasher = Sha256::new();
    for order in [rank_order(cause), rank_order(effect)] {
        hasher.update((order.len() as u64).to_le_bytes());
        for i in order {
            hasher.update(i.to_le_bytes());
        }
    }
    let digest = hasher.finalize();
    let mut head = [0u8; 8];
    head.copy_from_slice(&digest[..8]);
    format!("role:{:016x}", u64::from_be_bytes(head))
}

fn score_direction(
    cause: &[f64],
    effect: &[f64],
    cfg: &TrainConfig,
    pair_stream: &RngStream,
) -> Result<DirectionReport> {
    let stream = pair_stream.tag(role_tag(cause, effect));
    let model = train_conditional(cause, effect, cfg, &stream.tag("train"))?;
    let conditional =
        conditional_variational_codelength(&model, cause, effect, cfg.mc_eval_samples, &stream.tag("eval"))?;
    Ok(DirectionReport::new(marginal_gaussian_codelength(cause), conditional))
}

/// Scores both directions of `pair` after standardizing each column.
pub fn score_pair(pair: &PairDataset, cfg: &TrainConfig) -> Result<PairReport> {
    cfg.validate()?;
    pair.validate()?;
    let x = standardize(&pair.x).map_err(|e| e.for_column("x"))?.values;
    let y = standardize(&pair.y).map_err(|e| e.for_column("y"))?.values;
    let stream = RngStream::new(cfg.seed).tag(format!("pair:{}", pair.id));
    let forward = score_direction(&x, &y, cfg, &stream)?;
    let backward = score_direction(&y, &x, cfg, &stream)?;
    Ok(PairReport::new(forward, backward))
}
