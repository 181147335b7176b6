use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::metric::{product_distance, ProductPoint};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub n: usize,
    pub point: ProductPoint,
    /// `rho(p_n, p_{n-1})`; absent for the starting point.
    pub step_distance: Option<f64>,
    pub a_priori: Option<f64>,
    pub a_posteriori: Option<f64>,
}

/// The iterates `(x_n, y_n)` of one run, indexed `0..=N`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct IterationTrace {
    entries: Vec<TraceEntry>,
}

fn cell(v: Option<f64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

fn axis_names(prefix: &str, dim: usize) -> Vec<String> {
    if dim == 1 {
        vec![prefix.to_string()]
    } else {
        (1..=dim).map(|i| format!("{prefix}_{i}")).collect()
    }
}

impl IterationTrace {
    pub(crate) fn push(&mut self, entry: TraceEntry) {
        debug_assert_eq!(entry.n, self.entries.len());
        self.entries.push(entry);
    }

    pub(crate) fn entries_mut(&mut self) -> &mut [TraceEntry] {
        &mut self.entries
    }

    pub fn entries(&self) -> &[TraceEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn last(&self) -> Option<&TraceEntry> {
        self.entries.last()
    }

    pub fn points(&self) -> impl Iterator<Item = &ProductPoint> {
        self.entries.iter().map(|e| &e.point)
    }

    /// CSV with columns `n, x..., y..., step_distance, a_priori, a_posteriori`.
    ///
    /// Numbers use the shortest representation that round-trips; cells that
    /// do not apply are left empty.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let (d1, d2) = self.entries.first().map(|e| e.point.dims()).unwrap_or((1, 1));
        let mut header = vec!["n".to_string()];
        header.extend(axis_names("x", d1));
        header.extend(axis_names("y", d2));
        header.extend(["step_distance", "a_priori", "a_posteriori"].map(String::from));
        out.push_str(&header.join(","));
        out.push('\n');
        for e in &self.entries {
            let mut row = vec![e.n.to_string()];
            row.extend(e.point.first.coords().iter().map(f64::to_string));
            row.extend(e.point.second.coords().iter().map(f64::to_string));
            row.push(cell(e.step_distance));
            row.push(cell(e.a_priori));
            row.push(cell(e.a_posteriori));
            let _ = writeln!(out, "{}", row.join(","));
        }
        out
    }

    /// Plot data: `n, distance_to_limit, a_priori, a_posteriori`.
    ///
    /// The distance column is filled only when a limit is known.
    pub fn plot_csv(&self, limit: Option<&ProductPoint>) -> String {
        let mut out = String::from("n,distance_to_limit,a_priori,a_posteriori\n");
        for e in &self.entries {
            let dist = limit.and_then(|l| product_distance(l, &e.point).ok());
            let _ = writeln!(out, "{},{},{},{}", e.n, cell(dist), cell(e.a_priori), cell(e.a_posteriori));
        }
        out
    }
}
