//! Network and expression-matrix file formats.
//!
//! Edge-list format: a required header line `p=<n>` (so isolated vertices
//! survive round trips), then one `u v` pair per line, whitespace separated,
//! 0-based, each undirected pair listed once. Dense format: `p` rows of `p`
//! comma-separated 0/1 entries forming a symmetric zero-diagonal matrix.
//! Expression CSV: a header row naming the sample columns, then one row per
//! gene with a label and one finite value per sample.

use crate::coexpress::ExpressionMatrix;
use crate::error::{Error, Result};
use crate::graph::AdjacencyMatrix;

/// Parse the edge-list format.
pub fn read_edge_list(text: &str) -> Result<AdjacencyMatrix> {
    let mut lines = text.lines().enumerate();
    let (header_no, header) = lines
        .by_ref()
        .find(|(_, l)| !l.trim().is_empty())
        .ok_or_else(|| Error::parse(1, "empty file; expected a p=<n> header"))?;
    let header = header.trim();
    let p: usize = header
        .strip_prefix("p=")
        .ok_or_else(|| {
            Error::parse(
                header_no + 1,
                format!("expected header p=<n>, found {header:?}"),
            )
        })?
        .trim()
        .parse()
        .map_err(|_| Error::parse(header_no + 1, format!("bad vertex count in {header:?}")))?;
    if p < 2 {
        return Err(Error::parse(header_no + 1, format!("need p >= 2, got {p}")));
    }
    let mut edges: Vec<(usize, usize)> = Vec::new();
    for (no, line) in lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        let u: usize = parts
            .next()
            .unwrap()
            .parse()
            .map_err(|_| Error::parse(no + 1, format!("bad vertex in {line:?}")))?;
        let v: usize = parts
            .next()
            .ok_or_else(|| Error::parse(no + 1, format!("expected two vertices in {line:?}")))?
            .parse()
            .map_err(|_| Error::parse(no + 1, format!("bad vertex in {line:?}")))?;
        if parts.next().is_some() {
            return Err(Error::parse(no + 1, format!("trailing tokens in {line:?}")));
        }
        if u >= p || v >= p {
            return Err(Error::parse(
                no + 1,
                format!("vertex out of range in {line:?} (p = {p})"),
            ));
        }
        if u == v {
            return Err(Error::parse(no + 1, format!("self-loop in {line:?}")));
        }
        edges.push((u, v));
    }
    AdjacencyMatrix::from_edges(p, &edges)
        .map_err(|e| Error::parse(0, format!("invalid edge list: {e}")))
}

/// Serialize to the edge-list format.
pub fn write_edge_list(a: &AdjacencyMatrix) -> String {
    let mut out = format!("p={}\n", a.p());
    for (u, v) in a.edges() {
        out.push_str(&format!("{u} {v}\n"));
    }
    out
}

/// Parse the dense 0/1 CSV format.
pub fn read_dense_csv(text: &str) -> Result<AdjacencyMatrix> {
    let rows: Vec<(usize, Vec<u8>)> = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(no, l)| {
            let vals: Result<Vec<u8>> = l
                .split(',')
                .map(|tok| match tok.trim() {
                    "0" => Ok(0u8),
                    "1" => Ok(1u8),
                    other => Err(Error::parse(no + 1, format!("expected 0 or 1, found {other:?}"))),
                })
                .collect();
            Ok((no, vals?))
        })
        .collect::<Result<_>>()?;
    let p = rows.len();
    if p < 2 {
        return Err(Error::parse(1, format!("need at least 2 rows, got {p}")));
    }
    for (no, row) in &rows {
        if row.len() != p {
            return Err(Error::parse(
                no + 1,
                format!("row has {} columns, expected {p}", row.len()),
            ));
        }
    }
    let mut edges = Vec::new();
    for i in 0..p {
        if rows[i].1[i] != 0 {
            return Err(Error::parse(rows[i].0 + 1, "nonzero diagonal entry"));
        }
        for j in (i + 1)..p {
            if rows[i].1[j] != rows[j].1[i] {
                return Err(Error::parse(
                    rows[j].0 + 1,
                    format!("asymmetric entries at ({i}, {j})"),
                ));
            }
            if rows[i].1[j] == 1 {
                edges.push((i, j));
            }
        }
    }
    AdjacencyMatrix::from_edges(p, &edges)
        .map_err(|e| Error::parse(0, format!("invalid matrix: {e}")))
}

/// Serialize to the dense 0/1 CSV format.
pub fn write_dense_csv(a: &AdjacencyMatrix) -> String {
    let p = a.p();
    let mut out = String::with_capacity(p * (2 * p + 1));
    for i in 0..p {
        for j in 0..p {
            if j > 0 {
                out.push(',');
            }
            out.push(if a.is_edge(i, j) { '1' } else { '0' });
        }
        out.push('\n');
    }
    out
}

/// Read either network format, deciding by the `p=` header sniff.
pub fn read_network(text: &str) -> Result<AdjacencyMatrix> {
    match text.lines().find(|l| !l.trim().is_empty()) {
        Some(first) if first.trim_start().starts_with("p=") => read_edge_list(text),
        _ => read_dense_csv(text),
    }
}

/// Parse an expression CSV: header `label,s1,s2,...`, then one row per gene.
pub fn read_expression_csv(text: &str) -> Result<ExpressionMatrix> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::parse(1, "empty expression file"))?;
    let samples: Vec<String> = header.split(',').skip(1).map(|s| s.trim().to_string()).collect();
    if samples.is_empty() {
        return Err(Error::parse(1, "header names no sample columns"));
    }
    let mut genes = Vec::new();
    let mut values = Vec::new();
    for (no, line) in lines {
        let mut fields = line.split(',');
        let gene = fields
            .next()
            .expect("split yields at least one field")
            .trim();
        if gene.is_empty() {
            return Err(Error::parse(no + 1, "empty gene label"));
        }
        let mut row = 0usize;
        for tok in fields {
            let tok = tok.trim();
            if tok.is_empty() {
                return Err(Error::parse(
                    no + 1,
                    "missing value (empty cell); values are rejected, not imputed",
                ));
            }
            let v: f64 = tok
                .parse()
                .map_err(|_| Error::parse(no + 1, format!("bad number {tok:?}")))?;
            if !v.is_finite() {
                return Err(Error::parse(no + 1, format!("non-finite value {tok:?}")));
            }
            values.push(v);
            row += 1;
        }
        if row != samples.len() {
            return Err(Error::parse(
                no + 1,
                format!("row has {row} values, expected {}", samples.len()),
            ));
        }
        genes.push(gene.to_string());
    }
    ExpressionMatrix::new(genes, samples, values)
        .map_err(|e| Error::parse(0, format!("invalid expression matrix: {e}")))
}
