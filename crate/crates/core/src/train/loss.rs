use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::Triplet;
use crate::linalg::{self, Matrix};

/// Multi-Similarity loss weights. Defaults follow the published
/// self-alignment pretraining setup.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MsLossConfig {
    pub alpha: f64,
    pub beta: f64,
    pub base: f64,
}

impl Default for MsLossConfig {
    fn default() -> Self {
        MsLossConfig { alpha: 2.0, beta: 50.0, base: 0.5 }
    }
}

/// Multi-Similarity loss over the pairs named by `mined`.
///
/// For anchor `i` with mined positives `P_i` and negatives `N_i`:
///
/// ```text
/// L_i = 1/α · ln(1 + Σ_p exp(−α(S_ip − ε))) + 1/β · ln(1 + Σ_n exp(β(S_in − ε)))
/// ```
///
/// The loss is the mean of `L_i` over anchors with at least one mined pair.
/// Returns the loss and `dL/dS`, where entry `(i, j)` is the derivative with
/// respect to `S[i][j]` taken as an independent variable.
pub fn ms_loss<L: PartialEq>(
    similarities: &Matrix,
    labels: &[L],
    mined: &[Triplet],
    config: &MsLossConfig,
) -> (f64, Matrix) {
    let b = similarities.rows();
    assert_eq!(similarities.cols(), b, "similarity matrix must be square");
    assert_eq!(labels.len(), b, "one label per row");

    let mut sets: BTreeMap<usize, (BTreeSet<usize>, BTreeSet<usize>)> = BTreeMap::new();
    for t in mined {
        debug_assert!(labels[t.anchor] == labels[t.positive] && labels[t.anchor] != labels[t.negative]);
        let e = sets.entry(t.anchor).or_default();
        if t.positive != t.anchor {
            e.0.insert(t.positive);
        }
        if t.negative != t.anchor {
            e.1.insert(t.negative);
        }
    }

    let mut grad = Matrix::zeros(b, b);
    let active = sets.values().filter(|(p, n)| !p.is_empty() || !n.is_empty()).count();
    if active == 0 {
        return (0.0, grad);
    }
    let scale = 1.0 / active as f64;
    let MsLossConfig { alpha, beta, base } = *config;

    let mut total = 0.0;
    let mut z: Vec<f64> = Vec::new();
    for (&i, (pos, neg)) in &sets {
        if !pos.is_empty() {
            z.clear();
            z.extend(pos.iter().map(|&p| -alpha * (similarities[(i, p)] - base)));
            let lse = linalg::log1p_sum_exp(&z);
            total += lse / alpha;
            for (&p, &zp) in pos.iter().zip(&z) {
                grad[(i, p)] -= scale * linalg::exp(zp - lse);
            }
        }
        if !neg.is_empty() {
            z.clear();
            z.extend(neg.iter().map(|&n| beta * (similarities[(i, n)] - base)));
            let lse = linalg::log1p_sum_exp(&z);
            total += lse / beta;
            for (&n, &zn) in neg.iter().zip(&z) {
                grad[(i, n)] += scale * linalg::exp(zn - lse);
            }
        }
    }
    (total * scale, grad)
}
