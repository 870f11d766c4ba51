//! graph6 reading and writing (McKay's format, bit-exact).
//!
//! Layout: `N(n) R(x)` where `N` is the order in one, four or eight printable
//! bytes and `R` packs the upper triangle column by column
//! (`x(0,1), x(0,2), x(1,2), x(0,3), ...`) six bits per byte, offset by 63.

use thiserror::Error;

use crate::graph::{CubicGraph, Graph, GraphError};

pub const HEADER: &str = ">>graph6<<";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Graph6Error {
    #[error("empty graph6 line")]
    Empty,
    #[error("byte {byte:#04x} at offset {offset} is outside the graph6 range 63..=126")]
    BadByte { byte: u8, offset: usize },
    #[error("expected {expected} adjacency bytes for n={n}, found {found}")]
    BadLength { n: usize, expected: usize, found: usize },
    #[error("non-zero padding bits in final byte")]
    BadPadding,
    #[error(transparent)]
    Graph(#[from] GraphError),
}

fn decode_order(bytes: &[u8]) -> Result<(usize, usize), Graph6Error> {
    let take = |k: usize, from: usize| -> Result<usize, Graph6Error> {
        let mut n = 0usize;
        for i in 0..k {
            let b = *bytes.get(from + i).ok_or(Graph6Error::BadLength { n: 0, expected: k, found: i })?;
            n = (n << 6) | (b - 63) as usize;
        }
        Ok(n)
    };
    match bytes {
        [] => Err(Graph6Error::Empty),
        [126, 126, ..] => Ok((take(6, 2)?, 8)),
        [126, ..] => Ok((take(3, 1)?, 4)),
        [b, ..] => Ok(((b - 63) as usize, 1)),
    }
}

fn encode_order(n: usize, out: &mut Vec<u8>) {
    if n <= 62 {
        out.push(n as u8 + 63);
    } else if n <= 258_047 {
        out.push(126);
        for shift in [12, 6, 0] {
            out.push(((n >> shift) & 63) as u8 + 63);
        }
    } else {
        out.extend([126, 126]);
        for shift in [30, 24, 18, 12, 6, 0] {
            out.push(((n >> shift) & 63) as u8 + 63);
        }
    }
}

/// Parses one graph6 line (optional `>>graph6<<` header, trailing whitespace ignored).
pub fn parse_graph6(line: &str) -> Result<Graph, Graph6Error> {
    let line = line.trim_end();
    let line = line.strip_prefix(HEADER).unwrap_or(line);
    let bytes = line.as_bytes();
    if bytes.is_empty() {
        return Err(Graph6Error::Empty);
    }
    if let Some((offset, &byte)) = bytes.iter().enumerate().find(|(_, b)| !(63..=126).contains(*b)) {
        return Err(Graph6Error::BadByte { byte, offset });
    }
    let (n, head) = decode_order(bytes)?;
    let bits = n * n.saturating_sub(1) / 2;
    let expected = bits.div_ceil(6);
    let body = &bytes[head..];
    if body.len() != expected {
        return Err(Graph6Error::BadLength { n, expected, found: body.len() });
    }
    let bit = |k: usize| (body[k / 6] - 63) >> (5 - k % 6) & 1 == 1;
    if (bits..expected * 6).any(bit) {
        return Err(Graph6Error::BadPadding);
    }
    let mut g = Graph::empty(n);
    let mut k = 0;
    for j in 1..n {
        for i in 0..j {
            if bit(k) {
                g.add_edge(i, j)?;
            }
            k += 1;
        }
    }
    Ok(g)
}

/// Parses a graph6 line and requires the result to be cubic.
pub fn parse_cubic(line: &str) -> Result<CubicGraph, Graph6Error> {
    Ok(CubicGraph::new(parse_graph6(line)?)?)
}

/// Encodes without header or newline.
pub fn encode_graph6(g: &Graph) -> String {
    let n = g.order();
    let mut out = Vec::with_capacity(8 + n * n / 12);
    encode_order(n, &mut out);
    let mut acc = 0u8;
    let mut filled = 0;
    for j in 1..n {
        for i in 0..j {
            acc = (acc << 1) | g.has_edge(i, j) as u8;
            filled += 1;
            if filled == 6 {
                out.push(acc + 63);
                acc = 0;
                filled = 0;
            }
        }
    }
    if filled > 0 {
        out.push((acc << (6 - filled)) + 63);
    }
    String::from_utf8(out).expect("graph6 bytes are ASCII")
}

/// Parses every non-empty line of a graph6 stream; per-line failures are kept.
pub fn parse_stream(text: &str) -> Vec<Result<Graph, Graph6Error>> {
    text.lines().filter(|l| !l.trim().is_empty()).map(parse_graph6).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn decodes_k4_by_hand() {
        // 'C' = 67 -> n = 4; '~' = 126 -> bits 111111 -> all six edges
        let g = parse_graph6("C~").unwrap();
        assert_eq!(g.order(), 4);
        assert_eq!(g.size(), 6);
        assert!(parse_cubic("C~").is_ok());
    }

    #[test]
    fn missing_edge_fails_cubic_validation() {
        // '^' = 94 -> 011111: edge (0,1) absent
        let g = parse_graph6("C^").unwrap();
        assert_eq!(g.size(), 5);
        assert!(!g.has_edge(0, 1));
        assert!(matches!(parse_cubic("C^"), Err(Graph6Error::Graph(GraphError::NotCubic { .. }))));
    }

    #[test]
    fn known_encoding_matches_reference_tools() {
        // A 5-vertex graph with edges 0-2, 0-4, 1-3, 3-4 encodes to "DQc"
        let g = Graph::from_edges(5, &[(0, 2), (0, 4), (1, 3), (3, 4)]).unwrap();
        assert_eq!(encode_graph6(&g), "DQc");
    }

    #[test]
    fn header_and_errors() {
        assert_eq!(parse_graph6(">>graph6<<C~").unwrap().size(), 6);
        assert_eq!(parse_graph6(""), Err(Graph6Error::Empty));
        assert!(matches!(parse_graph6("C~~"), Err(Graph6Error::BadLength { .. })));
        assert!(matches!(parse_graph6("C ~"), Err(Graph6Error::BadByte { .. })));
        // n = 2 has one bit; '@' + 1 sets a padding bit
        assert_eq!(parse_graph6("AA"), Err(Graph6Error::BadPadding));
    }

    #[test]
    fn long_order_header() {
        let g = Graph::from_edges(100, &[(0, 99), (5, 6)]).unwrap();
        let s = encode_graph6(&g);
        assert!(s.starts_with('~'));
        assert_eq!(parse_graph6(&s).unwrap(), g);
    }

    #[test]
    fn fixture_lines_round_trip() {
        for line in crate::fixtures::CONNECTED_CUBIC.iter().flat_map(|(_, text)| text.lines()) {
            assert_eq!(encode_graph6(&parse_graph6(line).unwrap()), line);
        }
    }

    proptest! {
        #[test]
        fn encode_parse_identity(n in 0usize..80, raw in proptest::collection::vec((0usize..80, 0usize..80), 0..200)) {
            let mut g = Graph::empty(n);
            for (u, v) in raw {
                if n > 0 && u % n != v % n {
                    let _ = g.add_edge(u % n, v % n);
                }
            }
            let line = encode_graph6(&g);
            prop_assert_eq!(parse_graph6(&line).unwrap(), g);
            prop_assert_eq!(encode_graph6(&parse_graph6(&line).unwrap()), line);
        }
    }
}
