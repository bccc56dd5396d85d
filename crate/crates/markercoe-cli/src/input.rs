//! Parsing of command-line values: graphs, points and markers.

use std::path::Path;

use markercoe::graph::{higman_thompson, rose, subdivided_circle, theta};
use markercoe::marker::MarkerData;
use markercoe::words::EpPoint;
use markercoe::{Error, Graph, Result};

/// A graph JSON file, or one of `rose:N`, `theta`, `circle:N`, `ht:N,R`
/// (also written `rose(N)` and so on).
pub fn load_graph(spec: &str) -> Result<Graph> {
    if Path::new(spec).is_file() {
        let text = std::fs::read_to_string(spec)
            .map_err(|e| Error::InvalidGraph(format!("cannot read {spec}: {e}")))?;
        return Graph::from_json(&text);
    }
    let spec = spec.trim().replace('(', ":").replace(')', "");
    let (name, args) = spec.split_once(':').unwrap_or((spec.as_str(), ""));
    let nums = args
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| s.trim().parse::<usize>().map_err(|_| Error::InvalidGraph(format!("bad graph parameter '{s}'"))))
        .collect::<Result<Vec<_>>>()?;
    match (name, nums.as_slice()) {
        ("rose", [n]) => rose(*n),
        ("theta", []) => Ok(theta()),
        ("circle", [n]) => subdivided_circle(*n),
        ("ht" | "higman-thompson", [n, r]) => higman_thompson(*n, *r),
        _ => Err(Error::InvalidGraph(format!(
            "'{spec}' is neither a file nor one of rose:N, theta, circle:N, ht:N,R"
        ))),
    }
}

/// `w(p)` or `w(p)^inf`; `(p)` alone is the periodic point `p^∞`.
pub fn parse_point(g: &Graph, text: &str) -> Result<EpPoint> {
    let t = text.trim().trim_end_matches("^inf");
    let bad = || Error::InvalidWord(format!("'{text}' is not of the form w(p)"));
    let open = t.find('(').ok_or_else(bad)?;
    let cycle = t[open + 1..].strip_suffix(')').ok_or_else(bad)?;
    EpPoint::new(g, g.parse_word(&t[..open])?, g.parse_word(cycle)?)
}

/// Marker JSON given inline or as a file path.
pub fn load_marker(g: &Graph, spec: &str) -> Result<MarkerData> {
    if Path::new(spec).is_file() {
        let text = std::fs::read_to_string(spec)
            .map_err(|e| Error::InvalidParameter(format!("cannot read {spec}: {e}")))?;
        return MarkerData::from_json(g, &text);
    }
    MarkerData::from_json(g, spec)
}
