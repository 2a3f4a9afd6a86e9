//! Plain-text interchange formats: edge lists, trajectory dumps, observation
//! round dumps and the per-trial results CSV.
//!
//! All text formats are line oriented, whitespace separated, and ignore blank
//! lines and anything after `#` except the `# key value` headers noted below.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write;

use thiserror::Error;

use crate::cascade::CascadeTrajectory;
use crate::experiment::ResultRow;
use crate::graph::{build_graph, Graph, GraphError, VertexId};
use crate::observation::ObservationRound;

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("missing header `# {0}`")]
    MissingHeader(&'static str),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("invalid trajectory: {0}")]
    Trajectory(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

fn syntax(line: usize, message: impl Into<String>) -> ParseError {
    ParseError::Syntax { line, message: message.into() }
}

/// Yields `(1-based line number, fields)` for every non-empty line, and
/// collects `# key value` headers.
fn records(text: &str) -> (Vec<(usize, Vec<&str>)>, BTreeMap<&str, (usize, &str)>) {
    let mut rows = Vec::new();
    let mut headers = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let (body, comment) = match raw.split_once('#') {
            Some((b, c)) => (b, Some(c)),
            None => (raw, None),
        };
        if let Some(c) = comment {
            if body.trim().is_empty() {
                let mut it = c.split_whitespace();
                if let (Some(k), Some(v), None) = (it.next(), it.next(), it.next()) {
                    headers.entry(k).or_insert((i + 1, v));
                }
            }
        }
        let fields: Vec<&str> = body.split_whitespace().collect();
        if !fields.is_empty() {
            rows.push((i + 1, fields));
        }
    }
    (rows, headers)
}

fn field<T: std::str::FromStr>(line: usize, name: &str, s: &str) -> Result<T, ParseError> {
    s.parse().map_err(|_| syntax(line, format!("bad {name} `{s}`")))
}

fn expect_fields<'a>(line: usize, fields: &'a [&'a str], n: usize, shape: &str) -> Result<&'a [&'a str], ParseError> {
    if fields.len() != n {
        return Err(syntax(line, format!("expected `{shape}`, got {} fields", fields.len())));
    }
    Ok(fields)
}

/// Parses `u v rate` lines.
pub fn parse_edge_list(text: &str) -> Result<Vec<(VertexId, VertexId, f64)>, ParseError> {
    let (rows, _) = records(text);
    rows.iter()
        .map(|(line, f)| {
            let f = expect_fields(*line, f, 3, "u v rate")?;
            Ok((field(*line, "vertex", f[0])?, field(*line, "vertex", f[1])?, field(*line, "rate", f[2])?))
        })
        .collect()
}

pub fn read_edge_list(text: &str) -> Result<Graph, ParseError> {
    Ok(build_graph(&parse_edge_list(text)?)?)
}

pub fn write_edge_list<W: Write>(mut out: W, g: &Graph) -> std::io::Result<()> {
    for e in g.edges() {
        writeln!(out, "{} {} {}", e.u, e.v, e.rate)?;
    }
    Ok(())
}

fn format_time(t: f64) -> String {
    if t.is_infinite() {
        "inf".to_string()
    } else {
        format!("{t}")
    }
}

fn parse_time(line: usize, s: &str) -> Result<f64, ParseError> {
    let t: f64 = field(line, "time", s)?;
    if t.is_nan() {
        return Err(syntax(line, "time is NaN"));
    }
    Ok(t)
}

/// Trajectory dump: `# source S` and `# horizon H` headers, then one
/// `vertex infection_time` line per vertex (`inf` if never infected).
pub fn format_trajectory(traj: &CascadeTrajectory) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# source {}", traj.source());
    let _ = writeln!(s, "# horizon {}", format_time(traj.horizon()));
    for (v, &t) in traj.times().iter().enumerate() {
        let _ = writeln!(s, "{v} {}", format_time(t));
    }
    s
}

pub fn parse_trajectory(text: &str) -> Result<CascadeTrajectory, ParseError> {
    let (rows, headers) = records(text);
    let &(sline, source) = headers.get("source").ok_or(ParseError::MissingHeader("source"))?;
    let source: VertexId = field(sline, "source", source)?;
    let horizon = match headers.get("horizon") {
        Some(&(line, h)) => parse_time(line, h)?,
        None => f64::INFINITY,
    };
    let mut times: Vec<Option<f64>> = vec![None; rows.len()];
    for (line, f) in &rows {
        let f = expect_fields(*line, f, 2, "vertex infection_time")?;
        let v: VertexId = field(*line, "vertex", f[0])?;
        let slot = times.get_mut(v).ok_or_else(|| syntax(*line, format!("vertex {v} out of range")))?;
        if slot.replace(parse_time(*line, f[1])?).is_some() {
            return Err(syntax(*line, format!("vertex {v} listed twice")));
        }
    }
    // n lines with distinct ids below n cover every vertex.
    let times: Vec<f64> = times.into_iter().map(|t| t.expect("every vertex listed")).collect();
    if source >= times.len() {
        return Err(syntax(sline, format!("source {source} out of range")));
    }
    CascadeTrajectory::new(source, times, horizon).map_err(|e| ParseError::Trajectory(e.to_string()))
}

/// Round dump: `# vertices N` and `# rounds R` headers, then `t vertex signal`
/// lines for the nonzero signals. Rounds are `t = 0..R`.
pub fn format_rounds(rounds: &[ObservationRound]) -> String {
    let n = rounds.first().map_or(0, ObservationRound::vertex_count);
    let mut s = String::new();
    let _ = writeln!(s, "# vertices {n}");
    let _ = writeln!(s, "# rounds {}", rounds.len());
    for r in rounds {
        for (v, &y) in r.signals().iter().enumerate() {
            if y != 0 {
                let _ = writeln!(s, "{} {v} {y}", r.t());
            }
        }
    }
    s
}

/// Upper limit on `vertices * rounds` to keep hostile headers from
/// allocating unbounded memory.
pub const MAX_ROUND_CELLS: u64 = 1 << 26;

pub fn parse_rounds(text: &str) -> Result<Vec<ObservationRound>, ParseError> {
    let (rows, headers) = records(text);
    let &(nline, n) = headers.get("vertices").ok_or(ParseError::MissingHeader("vertices"))?;
    let &(rline, r) = headers.get("rounds").ok_or(ParseError::MissingHeader("rounds"))?;
    let n: usize = field(nline, "vertex count", n)?;
    let count: u64 = field(rline, "round count", r)?;
    if (n.max(1) as u64).saturating_mul(count) > MAX_ROUND_CELLS {
        return Err(syntax(rline, "round dump too large"));
    }
    let mut signals = vec![vec![0i8; n]; count as usize];
    for (line, f) in &rows {
        let f = expect_fields(*line, f, 3, "t vertex signal")?;
        let t: u64 = field(*line, "round", f[0])?;
        let v: VertexId = field(*line, "vertex", f[1])?;
        let y: i8 = field(*line, "signal", f[2])?;
        if !matches!(y, -1 | 1) {
            return Err(syntax(*line, format!("signal must be -1 or 1, got {y}")));
        }
        let row = signals.get_mut(t as usize).ok_or_else(|| syntax(*line, format!("round {t} out of range")))?;
        let slot = row.get_mut(v).ok_or_else(|| syntax(*line, format!("vertex {v} out of range")))?;
        if *slot != 0 {
            return Err(syntax(*line, format!("round {t} vertex {v} listed twice")));
        }
        *slot = y;
    }
    Ok(signals
        .into_iter()
        .enumerate()
        .map(|(t, s)| ObservationRound::new(t as u64, s).expect("signals validated"))
        .collect())
}

pub fn write_results_csv<W: Write>(out: W, rows: &[ResultRow]) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn parse_results_csv(text: &str) -> Result<Vec<ResultRow>, ParseError> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header = r.headers()?.clone();
    if header.iter().ne(ResultRow::COLUMNS) {
        return Err(syntax(1, format!("expected header `{}`", ResultRow::COLUMNS.join(","))));
    }
    Ok(r.deserialize().collect::<Result<_, _>>()?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cascade::simulate_fpp;
    use crate::graph::random_regular_graph;

    #[test]
    fn edge_list_roundtrip() {
        let g = random_regular_graph(20, 3, 4).unwrap().with_rates(|i, _| 1.0 + i as f64 / 7.0).unwrap();
        let mut buf = Vec::new();
        write_edge_list(&mut buf, &g).unwrap();
        let h = read_edge_list(std::str::from_utf8(&buf).unwrap()).unwrap();
        assert_eq!(g.edges(), h.edges());
    }

    #[test]
    fn edge_list_comments_and_errors() {
        let text = "# triangle\n0 1 1.0\n\n1 2 2 # heavy\n0 2 0.5\n";
        assert_eq!(parse_edge_list(text).unwrap(), vec![(0, 1, 1.0), (1, 2, 2.0), (0, 2, 0.5)]);
        let err = parse_edge_list("0 1 1\n0 1\n").unwrap_err();
        assert!(matches!(err, ParseError::Syntax { line: 2, .. }), "{err}");
        assert!(matches!(parse_edge_list("0 x 1").unwrap_err(), ParseError::Syntax { line: 1, .. }));
        assert!(matches!(read_edge_list("0 0 1").unwrap_err(), ParseError::Graph(GraphError::SelfLoop(0))));
    }

    #[test]
    fn trajectory_roundtrip() {
        let g = random_regular_graph(30, 3, 2).unwrap();
        let traj = simulate_fpp(&g, 7, 11).unwrap();
        let back = parse_trajectory(&format_trajectory(&traj)).unwrap();
        assert_eq!(traj, back);
    }

    #[test]
    fn trajectory_with_unreached() {
        let text = "# source 1\n# horizon 2.5\n1 0\n0 1.5\n2 inf\n";
        let t = parse_trajectory(text).unwrap();
        assert_eq!(t.times(), &[1.5, 0.0, f64::INFINITY]);
        assert_eq!(t.horizon(), 2.5);
        assert!(parse_trajectory("1 0\n0 1\n").is_err());
        assert!(parse_trajectory("# source 0\n0 0\n0 1\n").is_err());
        assert!(parse_trajectory("# source 0\n0 0\n2 1\n").is_err());
        assert!(parse_trajectory("# source 0\n0 1\n1 0\n").is_err());
    }

    #[test]
    fn rounds_roundtrip() {
        let rounds = vec![
            ObservationRound::new(0, vec![0, 1, -1]).unwrap(),
            ObservationRound::silent(1, 3),
            ObservationRound::new(2, vec![1, 0, 0]).unwrap(),
            ObservationRound::silent(3, 3),
        ];
        let text = format_rounds(&rounds);
        assert_eq!(text, "# vertices 3\n# rounds 4\n0 1 1\n0 2 -1\n2 0 1\n");
        assert_eq!(parse_rounds(&text).unwrap(), rounds);
    }

    #[test]
    fn round_errors() {
        assert!(matches!(parse_rounds("0 0 1").unwrap_err(), ParseError::MissingHeader("vertices")));
        let h = "# vertices 2\n# rounds 1\n";
        assert!(parse_rounds(&format!("{h}0 0 0\n")).is_err());
        assert!(parse_rounds(&format!("{h}1 0 1\n")).is_err());
        assert!(parse_rounds(&format!("{h}0 2 1\n")).is_err());
        assert!(parse_rounds(&format!("{h}0 1 1\n0 1 -1\n")).is_err());
        assert!(parse_rounds("# vertices 100000000\n# rounds 100000000\n").is_err());
        assert!(parse_rounds("# vertices 0\n# rounds 100000000000\n").is_err());
    }
}
