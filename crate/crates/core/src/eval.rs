//! Accuracy and 1-distance accuracy of linked mentions, overall and per
//! semantic group.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::ids::{Cui, SemanticGroup};
use crate::ontology::RelationRow;

/// Undirected, relation-type-agnostic concept adjacency without self-loops.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RelationGraph {
    adj: BTreeMap<Cui, BTreeSet<Cui>>,
}

impl RelationGraph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns false for self-loops and edges already present.
    pub fn add_edge(&mut self, a: &Cui, b: &Cui) -> bool {
        if a == b {
            return false;
        }
        let fresh = self.adj.entry(a.clone()).or_default().insert(b.clone());
        self.adj.entry(b.clone()).or_default().insert(a.clone());
        fresh
    }

    pub fn contains_edge(&self, a: &Cui, b: &Cui) -> bool {
        self.adj.get(a).is_some_and(|n| n.contains(b))
    }

    pub fn neighbors(&self, a: &Cui) -> impl Iterator<Item = &Cui> {
        self.adj.get(a).into_iter().flatten()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.values().map(BTreeSet::len).sum::<usize>() / 2
    }

    pub fn node_count(&self) -> usize {
        self.adj.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adj.is_empty()
    }
}

pub fn build_relation_graph(rows: &[RelationRow]) -> RelationGraph {
    let mut g = RelationGraph::new();
    for r in rows {
        g.add_edge(&r.cui1, &r.cui2);
    }
    g
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoldMention {
    pub mention: String,
    pub gold_cui: Cui,
    pub group: SemanticGroup,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRow {
    /// Group code, or `Total`.
    pub group: String,
    pub count: usize,
    pub correct: usize,
    pub one_dist_correct: usize,
    pub accuracy: f64,
    pub one_dist_accuracy: f64,
}

impl ScoreRow {
    fn new(group: String, count: usize, correct: usize, one_dist_correct: usize) -> Self {
        let rate = |k: usize| if count == 0 { 0.0 } else { k as f64 / count as f64 };
        ScoreRow { group, count, correct, one_dist_correct, accuracy: rate(correct), one_dist_accuracy: rate(one_dist_correct) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    /// Sorted by descending count, then group code.
    pub groups: Vec<ScoreRow>,
    pub total: ScoreRow,
    pub seed: Option<u64>,
    pub epochs: Option<usize>,
}

/// Scores `predictions[i]` against `gold[i]`. A missing prediction is wrong
/// under both metrics. With `per_group` false only the total is filled.
pub fn evaluate(
    predictions: &[Option<Cui>],
    gold: &[GoldMention],
    graph: &RelationGraph,
    per_group: bool,
) -> EvalReport {
    assert_eq!(predictions.len(), gold.len(), "one prediction slot per gold mention");
    let mut tally: BTreeMap<&'static str, (usize, usize, usize)> = BTreeMap::new();
    let (mut n, mut exact, mut near) = (0, 0, 0);
    for (p, g) in predictions.iter().zip(gold) {
        let hit = p.as_ref() == Some(&g.gold_cui);
        let one = hit || p.as_ref().is_some_and(|p| graph.contains_edge(p, &g.gold_cui));
        let t = tally.entry(g.group.code()).or_default();
        t.0 += 1;
        t.1 += hit as usize;
        t.2 += one as usize;
        n += 1;
        exact += hit as usize;
        near += one as usize;
    }
    let mut groups: Vec<ScoreRow> = if per_group {
        tally.into_iter().map(|(code, (c, e, o))| ScoreRow::new(code.into(), c, e, o)).collect()
    } else {
        Vec::new()
    };
    groups.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.group.cmp(&b.group)));
    EvalReport { groups, total: ScoreRow::new("Total".into(), n, exact, near), seed: None, epochs: None }
}

impl EvalReport {
    pub fn with_run(mut self, seed: u64, epochs: usize) -> Self {
        self.seed = Some(seed);
        self.epochs = Some(epochs);
        self
    }

    /// Aligned text table, percentages to one decimal.
    pub fn render_text(&self) -> String {
        let header = ["Group", "Count", "Accuracy", "1-dist acc."];
        let mut cells: Vec<[String; 4]> = Vec::with_capacity(self.groups.len() + 1);
        for r in self.groups.iter().chain(core::iter::once(&self.total)) {
            cells.push([
                r.group.clone(),
                format!("{}", r.count),
                format!("{:.1}", r.accuracy * 100.0),
                format!("{:.1}", r.one_dist_accuracy * 100.0),
            ]);
        }
        let mut width = header.map(str::len);
        for row in &cells {
            for (w, c) in width.iter_mut().zip(row) {
                *w = (*w).max(c.chars().count());
            }
        }
        let mut out = String::new();
        let line = |out: &mut String, row: [&str; 4]| {
            let _ = write!(out, "{:<w0$}", row[0], w0 = width[0]);
            for i in 1..4 {
                let _ = write!(out, "  {:>w$}", row[i], w = width[i]);
            }
            out.push('\n');
        };
        line(&mut out, header);
        for row in &cells {
            line(&mut out, [&row[0], &row[1], &row[2], &row[3]]);
        }
        out
    }
}
