use std::collections::{BTreeMap, BTreeSet, HashSet};

use serde::Serialize;

use super::{Example, Split};
use crate::logic_types::LogicType;

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct TypeStats {
    pub count: usize,
    /// Examples whose program parsed; node averages are over these.
    pub parsed: usize,
    pub avg_sentence_len: f64,
    pub avg_total_nodes: f64,
    pub avg_function_nodes: f64,
    pub avg_linearized_len: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct DatasetStats {
    pub n_examples: usize,
    pub n_tables: usize,
    /// Distinct whitespace tokens of the sentences, case preserved.
    pub vocab_size: usize,
    pub vocab_size_folded: usize,
    pub avg_sentence_len: f64,
    pub avg_total_nodes: f64,
    pub avg_function_nodes: f64,
    pub avg_linearized_len: f64,
    pub per_type: BTreeMap<LogicType, TypeStats>,
    /// Total node count to number of programs, every bin from
    /// min(5, smallest) to the largest.
    pub total_node_histogram: BTreeMap<usize, usize>,
    pub function_node_histogram: BTreeMap<usize, usize>,
}

#[derive(Default)]
struct Sums {
    count: usize,
    parsed: usize,
    sentence: usize,
    total: usize,
    function: usize,
    linearized: usize,
}

impl Sums {
    fn finish(&self) -> TypeStats {
        let avg = |x: usize, n: usize| if n == 0 { 0.0 } else { x as f64 / n as f64 };
        TypeStats {
            count: self.count,
            parsed: self.parsed,
            avg_sentence_len: avg(self.sentence, self.count),
            avg_total_nodes: avg(self.total, self.parsed),
            avg_function_nodes: avg(self.function, self.parsed),
            avg_linearized_len: avg(self.linearized, self.parsed),
        }
    }
}

fn dense(hist: BTreeMap<usize, usize>, floor: usize) -> BTreeMap<usize, usize> {
    let (Some(&lo), Some(&hi)) = (hist.keys().next(), hist.keys().next_back()) else {
        return hist;
    };
    (lo.min(floor)..=hi).map(|k| (k, hist.get(&k).copied().unwrap_or(0))).collect()
}

pub fn compute_stats(examples: &[Example]) -> DatasetStats {
    let mut all = Sums::default();
    let mut per_type: BTreeMap<LogicType, Sums> = BTreeMap::new();
    let mut vocab: HashSet<&str> = HashSet::new();
    let mut tables: HashSet<String> = HashSet::new();
    let mut total_hist = BTreeMap::new();
    let mut func_hist = BTreeMap::new();
    for e in examples {
        let words: Vec<&str> = e.sentence.split_whitespace().collect();
        vocab.extend(&words);
        tables.insert(e.table.content_hash());
        let stats = e.ast.as_ref().map(|a| a.node_stats());
        for s in [&mut all, per_type.entry(e.logic_type).or_default()] {
            s.count += 1;
            s.sentence += words.len();
            if let Some(n) = &stats {
                s.parsed += 1;
                s.total += n.total_nodes;
                s.function += n.function_nodes;
                s.linearized += n.linearized_length;
            }
        }
        if let Some(n) = stats {
            *total_hist.entry(n.total_nodes).or_insert(0) += 1;
            *func_hist.entry(n.function_nodes).or_insert(0) += 1;
        }
    }
    let folded: HashSet<String> = vocab.iter().map(|w| w.to_lowercase()).collect();
    let g = all.finish();
    DatasetStats {
        n_examples: g.count,
        n_tables: tables.len(),
        vocab_size: vocab.len(),
        vocab_size_folded: folded.len(),
        avg_sentence_len: g.avg_sentence_len,
        avg_total_nodes: g.avg_total_nodes,
        avg_function_nodes: g.avg_function_nodes,
        avg_linearized_len: g.avg_linearized_len,
        per_type: per_type.into_iter().map(|(t, s)| (t, s.finish())).collect(),
        total_node_histogram: dense(total_hist, 5),
        function_node_histogram: dense(func_hist, 1),
    }
}

impl DatasetStats {
    pub fn render(&self) -> String {
        let mut out = format!(
            "examples {}\ntables {}\nvocab {} (case-folded {})\navg sentence length {:.2}\n\
             avg nodes {:.2}\navg function nodes {:.2}\navg linearized length {:.2}\n\n",
            self.n_examples,
            self.n_tables,
            self.vocab_size,
            self.vocab_size_folded,
            self.avg_sentence_len,
            self.avg_total_nodes,
            self.avg_function_nodes,
            self.avg_linearized_len
        );
        out.push_str(&format!(
            "{:<12} {:>8} {:>10} {:>10} {:>10} {:>10}\n",
            "type", "count", "sent len", "nodes", "functions", "linear"
        ));
        for (t, s) in &self.per_type {
            out.push_str(&format!(
                "{:<12} {:>8} {:>10.2} {:>10.2} {:>10.2} {:>10.2}\n",
                t.to_string(),
                s.count,
                s.avg_sentence_len,
                s.avg_total_nodes,
                s.avg_function_nodes,
                s.avg_linearized_len
            ));
        }
        out
    }

    /// `nodes,programs` lines of the total-node histogram.
    pub fn histogram_csv(&self) -> String {
        let mut out = String::from("nodes,programs\n");
        for (k, v) in &self.total_node_histogram {
            out.push_str(&format!("{k},{v}\n"));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SplitOverlap {
    pub table_hash: String,
    pub splits: Vec<Split>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct SplitReport {
    pub sizes: BTreeMap<Split, usize>,
    pub unassigned: usize,
    pub overlaps: Vec<SplitOverlap>,
}

impl SplitReport {
    pub fn is_clean(&self) -> bool {
        self.overlaps.is_empty()
    }
}

/// Tables (by content hash) used in more than one split.
pub fn check_splits(examples: &[Example]) -> SplitReport {
    let mut report = SplitReport::default();
    let mut seen: BTreeMap<String, BTreeSet<Split>> = BTreeMap::new();
    for e in examples {
        match e.split {
            Some(s) => {
                *report.sizes.entry(s).or_insert(0) += 1;
                seen.entry(e.table.content_hash()).or_default().insert(s);
            }
            None => report.unassigned += 1,
        }
    }
    report.overlaps = seen
        .into_iter()
        .filter(|(_, s)| s.len() > 1)
        .map(|(table_hash, s)| SplitOverlap { table_hash, splits: s.into_iter().collect() })
        .collect();
    report
}
