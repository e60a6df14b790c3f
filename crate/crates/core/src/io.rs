//! Dataset ingestion and report serialization.
//!
//! Two hypergraph input formats are supported:
//!
//! * the two-file simplex format used by public higher-order datasets: an
//!   `nverts` file with one vertex count per simplex and a `simplices` file
//!   with the concatenated vertex labels (positive integers, whitespace
//!   separated);
//! * a hyperedge list: one hyperedge per line, comma-separated labels and an
//!   optional `; weight` suffix. Blank lines and lines starting with `#` are
//!   skipped.
//!
//! Labels are remapped to dense ids in order of first appearance. Every
//! ingested hyperedge gets uniform contribution fractions.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::hash::Hash;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::digraph::{GraphError, WeightedDigraph};
use crate::hypergraph::{Hyperedge, Hypergraph, NodeId};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{nverts} expects {expected} vertices but {simplices} holds {found}")]
    CountMismatch {
        nverts: PathBuf,
        simplices: PathBuf,
        expected: usize,
        found: usize,
    },
    #[error("{path}: {source}")]
    Graph {
        path: PathBuf,
        #[source]
        source: GraphError,
    },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

fn read(path: &Path) -> Result<String, IoError> {
    fs::read_to_string(path).map_err(|source| IoError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write(path: &Path, contents: &str) -> Result<(), IoError> {
    fs::write(path, contents).map_err(|source| IoError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn parse_err(path: &Path, line: usize, message: impl Into<String>) -> IoError {
    IoError::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

/// Location of a dataset in the two-file simplex format.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimplexDatasetRef {
    pub nverts_path: PathBuf,
    pub simplices_path: PathBuf,
}

impl SimplexDatasetRef {
    pub fn new(nverts_path: impl Into<PathBuf>, simplices_path: impl Into<PathBuf>) -> Self {
        SimplexDatasetRef {
            nverts_path: nverts_path.into(),
            simplices_path: simplices_path.into(),
        }
    }

    /// `<dir>/<name>-nverts.txt` and `<dir>/<name>-simplices.txt`.
    pub fn in_dir(dir: impl AsRef<Path>, name: &str) -> Self {
        let dir = dir.as_ref();
        SimplexDatasetRef::new(
            dir.join(format!("{name}-nverts.txt")),
            dir.join(format!("{name}-simplices.txt")),
        )
    }
}

/// Counters for everything ingestion skipped or altered.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoadStats {
    pub hyperedges: usize,
    pub duplicate_members_removed: usize,
    pub skipped_lines: usize,
}

/// A loaded hypergraph with the original label of every node.
#[derive(Debug, Clone, PartialEq)]
pub struct Loaded<L> {
    pub hypergraph: Hypergraph,
    /// `labels[id]` is the input label of node `id`.
    pub labels: Vec<L>,
    pub stats: LoadStats,
}

struct Remapper<L> {
    ids: HashMap<L, NodeId>,
    labels: Vec<L>,
}

impl<L: Clone + Eq + Hash> Remapper<L> {
    fn new() -> Self {
        Remapper {
            ids: HashMap::new(),
            labels: Vec::new(),
        }
    }

    fn id(&mut self, label: L) -> NodeId {
        if let Some(&id) = self.ids.get(&label) {
            return id;
        }
        let id = self.labels.len();
        self.labels.push(label.clone());
        self.ids.insert(label, id);
        id
    }
}

/// Deduplicates `members` in place, keeping first occurrences.
fn dedup(members: &mut Vec<NodeId>) -> usize {
    let before = members.len();
    let mut seen = std::collections::HashSet::with_capacity(before);
    members.retain(|m| seen.insert(*m));
    before - members.len()
}

/// Whitespace-separated integer tokens with their 1-based line numbers.
fn integer_tokens(path: &Path, text: &str) -> Result<Vec<(u64, usize)>, IoError> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        for tok in line.split_whitespace() {
            let v: u64 = tok
                .parse()
                .map_err(|_| parse_err(path, lineno + 1, format!("not a nonnegative integer: {tok:?}")))?;
            out.push((v, lineno + 1));
        }
    }
    Ok(out)
}

pub fn load_simplex_dataset(r: &SimplexDatasetRef) -> Result<Loaded<u64>, IoError> {
    let nverts = integer_tokens(&r.nverts_path, &read(&r.nverts_path)?)?;
    let simplices = integer_tokens(&r.simplices_path, &read(&r.simplices_path)?)?;

    let expected: u64 = nverts.iter().map(|(v, _)| v).sum();
    if expected != simplices.len() as u64 {
        return Err(IoError::CountMismatch {
            nverts: r.nverts_path.clone(),
            simplices: r.simplices_path.clone(),
            expected: expected as usize,
            found: simplices.len(),
        });
    }

    let mut remap = Remapper::new();
    let mut stats = LoadStats::default();
    let mut edges = Vec::with_capacity(nverts.len());
    let mut cursor = 0;
    for &(count, line) in &nverts {
        if count == 0 {
            return Err(parse_err(&r.nverts_path, line, "empty simplex"));
        }
        let mut members = Vec::with_capacity(count as usize);
        for &(label, vline) in &simplices[cursor..cursor + count as usize] {
            if label == 0 {
                return Err(parse_err(&r.simplices_path, vline, "vertex labels must be positive"));
            }
            members.push(remap.id(label));
        }
        cursor += count as usize;
        stats.duplicate_members_removed += dedup(&mut members);
        edges.push(Hyperedge::uniform(members, 1.0));
    }
    stats.hyperedges = edges.len();
    Ok(Loaded {
        hypergraph: Hypergraph::new(remap.labels.len(), edges),
        labels: remap.labels,
        stats,
    })
}

pub fn parse_hyperedge_list(path: &Path, text: &str) -> Result<Loaded<String>, IoError> {
    let mut remap = Remapper::new();
    let mut stats = LoadStats::default();
    let mut edges = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            stats.skipped_lines += 1;
            continue;
        }
        let (list, weight) = match line.split_once(';') {
            Some((list, w)) => {
                let w = w.trim();
                let weight: f64 = w
                    .parse()
                    .map_err(|_| parse_err(path, lineno + 1, format!("bad weight {w:?}")))?;
                if !(weight > 0.0) || !weight.is_finite() {
                    return Err(parse_err(path, lineno + 1, format!("weight {w} is not positive")));
                }
                (list, weight)
            }
            None => (line, 1.0),
        };
        let mut members = Vec::new();
        for label in list.split(',') {
            let label = label.trim();
            if label.is_empty() {
                return Err(parse_err(path, lineno + 1, "empty node label"));
            }
            members.push(remap.id(label.to_string()));
        }
        stats.duplicate_members_removed += dedup(&mut members);
        edges.push(Hyperedge::uniform(members, weight));
    }
    stats.hyperedges = edges.len();
    Ok(Loaded {
        hypergraph: Hypergraph::new(remap.labels.len(), edges),
        labels: remap.labels,
        stats,
    })
}

pub fn load_hyperedge_list(path: impl AsRef<Path>) -> Result<Loaded<String>, IoError> {
    let path = path.as_ref();
    parse_hyperedge_list(path, &read(path)?)
}

/// Formats `v` with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// One opinion per line (blank lines and `#` comments skipped).
pub fn load_opinions(path: impl AsRef<Path>) -> Result<Vec<f64>, IoError> {
    let path = path.as_ref();
    let text = read(path)?;
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let v: f64 = line
            .parse()
            .map_err(|_| parse_err(path, lineno + 1, format!("bad opinion {line:?}")))?;
        if !v.is_finite() {
            return Err(parse_err(path, lineno + 1, "opinion is not finite"));
        }
        out.push(v);
    }
    Ok(out)
}

/// Arc list, one `source<TAB>target<TAB>weight` line per arc, preceded by a
/// `# nodes <n>` header.
pub fn format_arc_list(g: &WeightedDigraph) -> String {
    let mut s = format!("# nodes {}\n", g.node_count());
    for (i, j, w) in g.arcs() {
        let _ = writeln!(s, "{i}\t{j}\t{}", fmt_f64(w));
    }
    s
}

pub fn write_arc_list(g: &WeightedDigraph, path: impl AsRef<Path>) -> Result<(), IoError> {
    write(path.as_ref(), &format_arc_list(g))
}

pub fn parse_arc_list(path: &Path, text: &str) -> Result<WeightedDigraph, IoError> {
    let mut n: Option<usize> = None;
    let mut arcs = Vec::new();
    let mut max_node = 0usize;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            let mut it = rest.split_whitespace();
            if it.next() == Some("nodes") {
                let v = it.next().and_then(|t| t.parse().ok()).ok_or_else(|| {
                    parse_err(path, lineno + 1, "malformed `# nodes` header")
                })?;
                n = Some(v);
            }
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let bad = || parse_err(path, lineno + 1, format!("expected `source target weight`, got {line:?}"));
        if fields.len() != 3 {
            return Err(bad());
        }
        let s: usize = fields[0].parse().map_err(|_| bad())?;
        let t: usize = fields[1].parse().map_err(|_| bad())?;
        let w: f64 = fields[2].parse().map_err(|_| bad())?;
        max_node = max_node.max(s + 1).max(t + 1);
        arcs.push((s, t, w));
    }
    let n = n.unwrap_or(max_node);
    WeightedDigraph::from_arcs(n, arcs).map_err(|source| IoError::Graph {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_arc_list(path: impl AsRef<Path>) -> Result<WeightedDigraph, IoError> {
    let path = path.as_ref();
    parse_arc_list(path, &read(path)?)
}

/// Summary of one solve or sampling run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub n: usize,
    pub m: usize,
    pub overall_internal: f64,
    pub overall_expressed: f64,
    pub polarization: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub tau: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub seed: Option<u64>,
    pub elapsed_seconds: f64,
    /// Every flag and seed needed to reproduce the run.
    #[serde(default)]
    pub config: serde_json::Value,
    /// Internal opinions, written to CSV only.
    #[serde(skip)]
    pub x: Vec<f64>,
    /// Expressed (or estimated) opinions, written to CSV only.
    #[serde(skip)]
    pub z: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// `id,x,z` rows with 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("id,x,z\n");
        for (i, (x, z)) in self.x.iter().zip(&self.z).enumerate() {
            let _ = writeln!(s, "{i},{},{}", fmt_f64(*x), fmt_f64(*z));
        }
        s
    }

    pub fn render(&self, format: ReportFormat) -> String {
        match format {
            ReportFormat::Json => self.to_json(),
            ReportFormat::Csv => self.to_csv(),
        }
    }
}

pub fn write_report(report: &RunReport, path: impl AsRef<Path>, format: ReportFormat) -> Result<(), IoError> {
    write(path.as_ref(), &report.render(format))
}

pub fn read_report_json(path: impl AsRef<Path>) -> Result<RunReport, IoError> {
    let path = path.as_ref();
    serde_json::from_str(&read(path)?).map_err(|source| IoError::Json {
        path: path.to_path_buf(),
        source,
    })
}

/// Reads the `(x, z)` columns back from a CSV report.
pub fn read_report_csv(path: impl AsRef<Path>) -> Result<(Vec<f64>, Vec<f64>), IoError> {
    let path = path.as_ref();
    let text = read(path)?;
    let mut x = Vec::new();
    let mut z = Vec::new();
    for (lineno, line) in text.lines().enumerate().skip(1) {
        let fields: Vec<&str> = line.split(',').collect();
        let bad = || parse_err(path, lineno + 1, format!("malformed row {line:?}"));
        if fields.len() != 3 {
            return Err(bad());
        }
        x.push(fields[1].parse().map_err(|_| bad())?);
        z.push(fields[2].parse().map_err(|_| bad())?);
    }
    Ok((x, z))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn tmpfile(dir: &tempfile::TempDir, name: &str, contents: &str) -> PathBuf {
        let p = dir.path().join(name);
        fs::write(&p, contents).unwrap();
        p
    }

    #[test]
    fn simplex_format_remaps_labels() {
        let dir = tempfile::tempdir().unwrap();
        let r = SimplexDatasetRef::new(
            tmpfile(&dir, "nv", "2\n3\n"),
            tmpfile(&dir, "sx", "1\n2\n1\n2\n3\n"),
        );
        let loaded = load_simplex_dataset(&r).unwrap();
        assert_eq!(loaded.hypergraph.node_count(), 3);
        let members: Vec<&[usize]> = loaded.hypergraph.edges().iter().map(|e| e.members()).collect();
        assert_eq!(members, vec![&[0, 1][..], &[0, 1, 2][..]]);
        assert_eq!(loaded.labels, vec![1, 2, 3]);
        assert!(loaded.hypergraph.is_valid());
    }

    #[test]
    fn simplex_format_first_appearance_order_and_dedup() {
        let dir = tempfile::tempdir().unwrap();
        let r = SimplexDatasetRef::new(
            tmpfile(&dir, "nv", "1\n3\n2\n"),
            tmpfile(&dir, "sx", "40\n7 40 7\n9 7\n"),
        );
        let loaded = load_simplex_dataset(&r).unwrap();
        assert_eq!(loaded.labels, vec![40, 7, 9]);
        assert_eq!(loaded.stats.duplicate_members_removed, 1);
        assert_eq!(loaded.hypergraph.edges()[1].members(), &[1, 0]);
        assert_eq!(loaded.hypergraph.edges()[0].len(), 1);
        assert_eq!(load_simplex_dataset(&r).unwrap(), loaded);
    }

    #[test]
    fn simplex_format_errors() {
        let dir = tempfile::tempdir().unwrap();
        let short = SimplexDatasetRef::new(tmpfile(&dir, "a", "3\n"), tmpfile(&dir, "b", "1\n2\n"));
        assert!(matches!(
            load_simplex_dataset(&short),
            Err(IoError::CountMismatch { expected: 3, found: 2, .. })
        ));
        let junk = SimplexDatasetRef::new(tmpfile(&dir, "c", "2\n"), tmpfile(&dir, "d", "1\nx\n"));
        assert!(matches!(load_simplex_dataset(&junk), Err(IoError::Parse { line: 2, .. })));
        let empty = SimplexDatasetRef::new(tmpfile(&dir, "e", "1\n0\n"), tmpfile(&dir, "f", "5\n"));
        assert!(matches!(load_simplex_dataset(&empty), Err(IoError::Parse { line: 2, .. })));
        let zero = SimplexDatasetRef::new(tmpfile(&dir, "g", "2\n"), tmpfile(&dir, "h", "0\n1\n"));
        assert!(matches!(load_simplex_dataset(&zero), Err(IoError::Parse { line: 1, .. })));
        let missing = SimplexDatasetRef::new(dir.path().join("nope"), dir.path().join("nope2"));
        assert!(matches!(load_simplex_dataset(&missing), Err(IoError::Io { .. })));
    }

    #[test]
    fn hyperedge_lists() {
        let p = Path::new("mem");
        let l = parse_hyperedge_list(p, "a,b\na,b,c\n").unwrap();
        assert_eq!(l.hypergraph.node_count(), 3);
        assert_eq!(l.hypergraph.edge_count(), 2);

        let w = parse_hyperedge_list(p, "a,b;2.5").unwrap();
        assert_eq!(w.hypergraph.edges()[0].weight(), 2.5);

        let e = parse_hyperedge_list(p, "").unwrap();
        assert_eq!((e.hypergraph.node_count(), e.hypergraph.edge_count()), (0, 0));

        let c = parse_hyperedge_list(p, "# comment\n\nx, y ,x\n").unwrap();
        assert_eq!(c.stats.skipped_lines, 2);
        assert_eq!(c.stats.duplicate_members_removed, 1);
        assert_eq!(c.labels, vec!["x".to_string(), "y".to_string()]);

        assert!(matches!(
            parse_hyperedge_list(p, "a,b\na,,c\n"),
            Err(IoError::Parse { line: 2, .. })
        ));
        assert!(matches!(parse_hyperedge_list(p, "a,b;w"), Err(IoError::Parse { line: 1, .. })));
        assert!(matches!(parse_hyperedge_list(p, "a,b;-1"), Err(IoError::Parse { line: 1, .. })));
    }

    #[test]
    fn empty_report_is_valid_json() {
        let r = RunReport {
            n: 0,
            m: 0,
            overall_internal: 0.0,
            overall_expressed: 0.0,
            polarization: 0.0,
            tau: None,
            seed: None,
            elapsed_seconds: 0.0,
            config: serde_json::Value::Null,
            x: vec![],
            z: vec![],
        };
        let v: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(v["n"], 0);
        assert!(v.get("tau").is_none());
    }

    #[test]
    fn arc_list_round_trip() {
        let g = WeightedDigraph::from_arcs(5, [(0, 1, 0.1), (3, 0, 1.0 / 3.0), (1, 0, 2.0)]).unwrap();
        let text = format_arc_list(&g);
        assert_eq!(parse_arc_list(Path::new("mem"), &text).unwrap(), g);
        assert!(parse_arc_list(Path::new("mem"), "0 1\n").is_err());
        assert!(matches!(
            parse_arc_list(Path::new("mem"), "0 0 1.0\n"),
            Err(IoError::Graph { .. })
        ));
    }

    proptest! {
        #[test]
        fn csv_round_trip_is_bit_exact(
            x in proptest::collection::vec(any::<f64>().prop_filter("finite", |v| v.is_finite()), 0..30)
        ) {
            let dir = tempfile::tempdir().unwrap();
            let path = dir.path().join("r.csv");
            let z: Vec<f64> = x.iter().map(|v| v / 3.0).collect();
            let r = RunReport {
                n: x.len(), m: 0, overall_internal: 0.0, overall_expressed: 0.0,
                polarization: 0.0, tau: Some(10), seed: Some(1), elapsed_seconds: 0.1,
                config: serde_json::Value::Null, x: x.clone(), z: z.clone(),
            };
            write_report(&r, &path, ReportFormat::Csv).unwrap();
            let (rx, rz) = read_report_csv(&path).unwrap();
            prop_assert_eq!(
                rx.iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
                x.iter().map(|v| v.to_bits()).collect::<Vec<_>>()
            );
            prop_assert_eq!(
                rz.iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
                z.iter().map(|v| v.to_bits()).collect::<Vec<_>>()
            );
        }
    }
}
