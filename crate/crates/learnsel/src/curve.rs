//! Best-so-far curves from BO history files.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use learnsel_core::bayesopt::ObservationSet;

use crate::formats::HistoryMeta;

/// Tab-separated table: `iteration`, then `<features>.mean`, `.min` and
/// `.max` of the running best across the runs of each feature set. Groups
/// are ordered by label. Cells past the end of every run in a group are
/// left empty.
pub fn curve_table(histories: &[(HistoryMeta, ObservationSet)]) -> String {
    let mut groups: BTreeMap<&str, Vec<Vec<f64>>> = BTreeMap::new();
    for (meta, h) in histories {
        groups.entry(meta.features.as_str()).or_default().push(h.best_so_far(true));
    }
    let rows = groups.values().flatten().map(Vec::len).max().unwrap_or(0);
    let mut s = String::from("iteration");
    for label in groups.keys() {
        let _ = write!(s, "\t{label}.mean\t{label}.min\t{label}.max");
    }
    s.push('\n');
    for i in 0..rows {
        let _ = write!(s, "{}", i + 1);
        for runs in groups.values() {
            let vals: Vec<f64> = runs.iter().filter_map(|r| r.get(i).copied()).collect();
            if vals.is_empty() {
                s.push_str("\t\t\t");
                continue;
            }
            let mean = vals.iter().sum::<f64>() / vals.len() as f64;
            let min = vals.iter().copied().fold(f64::INFINITY, f64::min);
            let max = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let _ = write!(s, "\t{mean}\t{min}\t{max}");
        }
        s.push('\n');
    }
    s
}
