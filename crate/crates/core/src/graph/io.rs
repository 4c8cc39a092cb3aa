//! Plain-text edge lists: a header line `n m`, then `m` lines `u v`.
//! Lines starting with `#` are comments.

use std::io::{BufRead, Write};

use thiserror::Error;

use super::{Digraph, GraphError};

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("line {line}: {msg}")]
    Malformed { line: usize, msg: String },
    #[error("missing header line `n m`")]
    MissingHeader,
    #[error("header declares {declared} edges but {found} were listed")]
    EdgeCount { declared: usize, found: usize },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn parse_pair(line: &str, lineno: usize) -> Result<(usize, usize), ParseError> {
    let mut it = line.split_whitespace();
    let mut next = |what: &str| -> Result<usize, ParseError> {
        let tok = it.next().ok_or_else(|| ParseError::Malformed {
            line: lineno,
            msg: format!("expected {what}"),
        })?;
        tok.parse().map_err(|_| ParseError::Malformed {
            line: lineno,
            msg: format!("`{tok}` is not a non-negative integer"),
        })
    };
    let a = next("two integers")?;
    let b = next("two integers")?;
    if let Some(extra) = it.next() {
        return Err(ParseError::Malformed {
            line: lineno,
            msg: format!("unexpected trailing token `{extra}`"),
        });
    }
    Ok((a, b))
}

pub fn read_edge_list<R: BufRead>(reader: R) -> Result<Digraph, ParseError> {
    let mut header = None;
    let mut edges = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = i + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let pair = parse_pair(trimmed, lineno)?;
        match header {
            None => header = Some(pair),
            Some((n, _)) => {
                if pair.0 >= n || pair.1 >= n {
                    return Err(ParseError::Malformed {
                        line: lineno,
                        msg: format!("edge ({}, {}) has an endpoint outside [0, {n})", pair.0, pair.1),
                    });
                }
                edges.push(pair);
            }
        }
    }
    let (n, m) = header.ok_or(ParseError::MissingHeader)?;
    if edges.len() != m {
        return Err(ParseError::EdgeCount {
            declared: m,
            found: edges.len(),
        });
    }
    Ok(Digraph::new(n, edges)?)
}

pub fn write_edge_list<W: Write>(g: &Digraph, mut w: W) -> std::io::Result<()> {
    writeln!(w, "{} {}", g.vertex_count(), g.edge_count())?;
    for (u, v) in g.edges() {
        writeln!(w, "{u} {v}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let g = Digraph::new(4, [(0, 1), (2, 3), (3, 0)]).unwrap();
        let mut buf = Vec::new();
        write_edge_list(&g, &mut buf).unwrap();
        let back = read_edge_list(&buf[..]).unwrap();
        assert_eq!(g, back);
    }

    #[test]
    fn comments_are_skipped() {
        let text = "# a graph\n3 2\n0 1\n# middle\n1 2\n";
        let g = read_edge_list(text.as_bytes()).unwrap();
        assert_eq!(g.edge_count(), 2);
    }

    #[test]
    fn malformed_lines_report_line_numbers() {
        let err = read_edge_list("3 2\n0 1\n1 x\n".as_bytes()).unwrap_err();
        assert!(err.to_string().starts_with("line 3:"), "{err}");
        let err = read_edge_list("3 1\n0 5\n".as_bytes()).unwrap_err();
        assert!(err.to_string().starts_with("line 2:"), "{err}");
        let err = read_edge_list("3 1\n0 1 2\n".as_bytes()).unwrap_err();
        assert!(err.to_string().starts_with("line 2:"), "{err}");
        assert!(matches!(
            read_edge_list("3 2\n0 1\n".as_bytes()).unwrap_err(),
            ParseError::EdgeCount { declared: 2, found: 1 }
        ));
        assert!(matches!(read_edge_list("".as_bytes()).unwrap_err(), ParseError::MissingHeader));
    }
}
