// SPDX-License-Identifier: Apache-2.0

//! Text formats: edge lists, node attributes, partitions, advertisement
//! vectors, ranking and sweep tables.
//!
//! All inputs are UTF-8, whitespace separated, with `#` starting a comment
//! that runs to the end of the line.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::analysis::SweepRow;
use crate::centrality::CentralityRanking;
use crate::error::{Error, Result};
use crate::graph::{AttrRecord, AttributedGraph, EdgeRecord, Sign};

fn data_lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, line)| {
        let line = line.split('#').next().unwrap_or("");
        let tokens: Vec<&str> = line.split_whitespace().collect();
        (!tokens.is_empty()).then_some((i + 1, tokens))
    })
}

fn parse_err(source: &str, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: source.to_string(),
        line,
        message: message.into(),
    }
}

fn parse_id(source: &str, line: usize, tok: &str) -> Result<u64> {
    tok.parse()
        .map_err(|_| parse_err(source, line, format!("invalid node id `{tok}`")))
}

fn parse_real(source: &str, line: usize, tok: &str) -> Result<f64> {
    match tok.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(parse_err(source, line, format!("invalid number `{tok}`"))),
    }
}

/// `u w [sign]` per line; the sign defaults to `+1`.
pub fn parse_edge_list(text: &str, source: &str) -> Result<Vec<EdgeRecord>> {
    data_lines(text)
        .map(|(line, toks)| {
            if !(2..=3).contains(&toks.len()) {
                return Err(parse_err(
                    source,
                    line,
                    format!("expected `u w [sign]`, found {} fields", toks.len()),
                ));
            }
            let u = parse_id(source, line, toks[0])?;
            let w = parse_id(source, line, toks[1])?;
            let sign = match toks.get(2) {
                None => Sign::Positive,
                Some(t) => t
                    .parse::<i64>()
                    .ok()
                    .and_then(Sign::from_int)
                    .ok_or_else(|| parse_err(source, line, format!("invalid sign `{t}`, expected 1 or -1")))?,
            };
            Ok(EdgeRecord::new(u, w, sign))
        })
        .collect()
}

/// `u v1 v2 ... vp` per line.
pub fn parse_attributes(text: &str, source: &str) -> Result<Vec<AttrRecord>> {
    let mut dim = None;
    data_lines(text)
        .map(|(line, toks)| {
            let node = parse_id(source, line, toks[0])?;
            let values = toks[1..]
                .iter()
                .map(|t| parse_real(source, line, t))
                .collect::<Result<Vec<f64>>>()?;
            match dim {
                None => dim = Some(values.len()),
                Some(d) if d != values.len() => {
                    return Err(parse_err(
                        source,
                        line,
                        format!("expected {d} attribute values, found {}", values.len()),
                    ))
                }
                _ => {}
            }
            Ok(AttrRecord { node, values })
        })
        .collect()
}

/// `u label` per line.
pub fn parse_partition(text: &str, source: &str) -> Result<BTreeMap<u64, String>> {
    let mut map = BTreeMap::new();
    for (line, toks) in data_lines(text) {
        if toks.len() != 2 {
            return Err(parse_err(source, line, "expected `u label`"));
        }
        let node = parse_id(source, line, toks[0])?;
        if map.insert(node, toks[1].to_string()).is_some() {
            return Err(parse_err(source, line, format!("node {node} labeled twice")));
        }
    }
    Ok(map)
}

/// A single line of whitespace-separated reals.
pub fn parse_ad_vector(text: &str, source: &str) -> Result<Vec<f64>> {
    let mut lines = data_lines(text);
    let Some((line, toks)) = lines.next() else {
        return Err(parse_err(source, 1, "empty advertisement vector"));
    };
    if let Some((extra, _)) = lines.next() {
        return Err(parse_err(source, extra, "advertisement vector must be a single line"));
    }
    toks.iter().map(|t| parse_real(source, line, t)).collect()
}

pub fn read_to_string(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| {
        Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
    })
}

pub fn read_edge_list(path: &Path) -> Result<Vec<EdgeRecord>> {
    parse_edge_list(&read_to_string(path)?, &path.display().to_string())
}

pub fn read_attributes(path: &Path) -> Result<Vec<AttrRecord>> {
    parse_attributes(&read_to_string(path)?, &path.display().to_string())
}

pub fn read_partition(path: &Path) -> Result<BTreeMap<u64, String>> {
    parse_partition(&read_to_string(path)?, &path.display().to_string())
}

pub fn read_ad_vector(path: &Path) -> Result<Vec<f64>> {
    parse_ad_vector(&read_to_string(path)?, &path.display().to_string())
}

pub fn read_graph(edges: &Path, attrs: Option<&Path>) -> Result<AttributedGraph> {
    let records = read_edge_list(edges)?;
    let attrs = attrs.map(read_attributes).transpose()?;
    AttributedGraph::load(&records, attrs.as_deref())
}

pub fn format_edge_list(g: &AttributedGraph) -> String {
    let mut out = String::new();
    for e in g.edge_records() {
        let _ = writeln!(out, "{} {} {}", e.u, e.w, e.sign.as_int());
    }
    out
}

pub fn format_attributes(g: &AttributedGraph) -> String {
    let mut out = String::new();
    for r in g.attr_records().unwrap_or_default() {
        out.push_str(&r.node.to_string());
        for v in &r.values {
            let _ = write!(out, " {}", v);
        }
        out.push('\n');
    }
    out
}

/// `x` with 12 significant digits, in the style of C's `%.12g`.
pub fn fmt_sig(x: f64) -> String {
    const DIGITS: i32 = 12;
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if (-5..DIGITS).contains(&exp) {
        let decimals = (DIGITS - 1 - exp).max(0) as usize;
        trim_zeros(format!("{:.*}", decimals, x))
    } else {
        let m = trim_zeros(mantissa.to_string());
        format!("{m}e{}{:02}", if exp < 0 { '-' } else { '+' }, exp.abs())
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

pub fn ranking_csv(r: &CentralityRanking) -> String {
    let mut out = String::from("rank,node_id,score\n");
    for (rank, id, score) in r.ranked() {
        let _ = writeln!(out, "{rank},{id},{}", fmt_sig(score));
    }
    out
}

#[derive(Serialize)]
struct RankingEntry {
    rank: usize,
    node_id: u64,
    score: f64,
}

/// JSON mirror of [`ranking_csv`]; scores are rounded the same way.
pub fn ranking_json(r: &CentralityRanking) -> Result<String> {
    let entries: Vec<RankingEntry> = r
        .ranked()
        .map(|(rank, node_id, score)| RankingEntry {
            rank,
            node_id,
            score: fmt_sig(score).parse().expect("formatted float"),
        })
        .collect();
    Ok(serde_json::to_string_pretty(&entries)? + "\n")
}

pub const SWEEP_HEADER: &str = "gamma,theta,jaccard_pos,jaccard_neg,jaccard_total";

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let cell = |v: Option<f64>| v.map(fmt_sig).unwrap_or_default();
    let mut out = format!("{SWEEP_HEADER}\n");
    for row in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            cell(row.gamma),
            cell(row.theta),
            cell(row.jaccard_pos),
            cell(row.jaccard_neg),
            cell(row.jaccard_total)
        );
    }
    out
}

pub fn sweep_json(rows: &[SweepRow]) -> Result<String> {
    Ok(serde_json::to_string_pretty(rows)? + "\n")
}

/// Everything needed to re-run a command and get the same bytes back.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub argv: Vec<String>,
    pub params: serde_json::Value,
}

impl RunManifest {
    pub fn new(command: &str, argv: Vec<String>, params: serde_json::Value) -> Self {
        RunManifest {
            command: command.into(),
            version: env!("CARGO_PKG_VERSION").into(),
            argv,
            params,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn edge_list_basics() {
        let text = "# header\n0 1\n1 2 -1  # trailing\n\n2 3 +1\n";
        let edges = parse_edge_list(text, "e.txt").unwrap();
        assert_eq!(
            edges,
            vec![
                EdgeRecord::new(0, 1, Sign::Positive),
                EdgeRecord::new(1, 2, Sign::Negative),
                EdgeRecord::new(2, 3, Sign::Positive),
            ]
        );
    }

    #[test]
    fn malformed_line_is_named() {
        let err = parse_edge_list("0 1\na b c d\n", "in.txt").unwrap_err();
        match &err {
            Error::Parse { path, line, .. } => assert_eq!((path.as_str(), *line), ("in.txt", 2)),
            other => panic!("unexpected {other:?}"),
        }
        assert!(err.to_string().starts_with("in.txt:2:"));
    }

    #[test]
    fn bad_sign_rejected() {
        let err = parse_edge_list("0 1 2\n", "g").unwrap_err();
        assert!(err.to_string().contains("invalid sign `2`"));
        assert!(parse_edge_list("0 x 1\n", "g").is_err());
    }

    #[test]
    fn attribute_file() {
        let recs = parse_attributes("3 0.5 1\n1 2 -1e-3\n", "a").unwrap();
        assert_eq!(recs[1].values, vec![2.0, -1e-3]);
        assert!(parse_attributes("3 0.5 1\n1 2\n", "a").is_err());
        assert!(parse_attributes("3 nan\n", "a").is_err());
    }

    #[test]
    fn partition_and_ad_vector() {
        let p = parse_partition("1 left\n2 right\n", "p").unwrap();
        assert_eq!(p[&2], "right");
        assert!(parse_partition("1 left\n1 right\n", "p").is_err());
        assert_eq!(parse_ad_vector("# z\n0.5 1 -2\n", "z").unwrap(), vec![0.5, 1.0, -2.0]);
        assert!(parse_ad_vector("1\n2\n", "z").is_err());
        assert!(parse_ad_vector("", "z").is_err());
    }

    #[test]
    fn significant_digits() {
        assert_eq!(fmt_sig(0.5), "0.5");
        assert_eq!(fmt_sig(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt_sig(4.0 / 13.0), "0.307692307692");
        assert_eq!(fmt_sig(-1.1843_f64), "-1.1843");
        assert_eq!(fmt_sig(123456.0), "123456");
        assert_eq!(fmt_sig(2.5e-7), "2.5e-07");
        assert_eq!(fmt_sig(1e15), "1e+15");
        assert_eq!(fmt_sig(0.0), "0");
    }

    #[test]
    fn ranking_table() {
        let r = CentralityRanking::from_scores(vec![4, 7, 9], vec![0.25, 0.5, 0.25]);
        assert_eq!(ranking_csv(&r), "rank,node_id,score\n1,7,0.5\n2,4,0.25\n3,9,0.25\n");
        let json: serde_json::Value = serde_json::from_str(&ranking_json(&r).unwrap()).unwrap();
        assert_eq!(json[0]["node_id"], 7);
    }

    #[test]
    fn sweep_table_has_fixed_header() {
        let row = SweepRow {
            gamma: Some(0.0),
            theta: Some(-1.18),
            jaccard_pos: Some(0.5),
            jaccard_neg: Some(0.0),
            jaccard_total: Some(1.0),
            empty_sets: false,
            error: None,
        };
        let failed = SweepRow { error: Some("bad".into()), theta: None, jaccard_pos: None, jaccard_neg: None, jaccard_total: None, ..row.clone() };
        assert_eq!(
            sweep_csv(&[row, failed]),
            "gamma,theta,jaccard_pos,jaccard_neg,jaccard_total\n0,-1.18,0.5,0,1\n0,,,,\n"
        );
    }

    proptest! {
        #[test]
        fn sig_digits_round_trip(x in -1e6f64..1e6) {
            let parsed: f64 = fmt_sig(x).parse().unwrap();
            prop_assert!((parsed - x).abs() <= 1e-11 * x.abs().max(1e-300));
        }

        #[test]
        fn edge_list_round_trip(raw in prop::collection::vec((0u64..40, 0u64..40, any::<bool>()), 1..40)) {
            let mut seen = BTreeMap::new();
            let records: Vec<_> = raw.into_iter().filter(|(u, w, _)| u != w).map(|(u, w, p)| {
                let s = *seen.entry((u.min(w), u.max(w))).or_insert(if p { Sign::Positive } else { Sign::Negative });
                EdgeRecord::new(u, w, s)
            }).collect();
            let g = AttributedGraph::load(&records, None).unwrap();
            let text = format_edge_list(&g);
            let back = AttributedGraph::load(&parse_edge_list(&text, "rt").unwrap(), None).unwrap();
            prop_assert_eq!(back, g);
        }
    }
}
