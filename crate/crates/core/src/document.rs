//! JSON game documents.
//!
//! ```json
//! {
//!   "players": [
//!     {"name": "man 1", "strategies": ["M", "A"]},
//!     {"name": "man 2", "strategies": ["M", "A"]}
//!   ],
//!   "payoffs": [
//!     {"profile": [0, 0], "values": [0, 0]},
//!     {"profile": [0, 1], "values": [1, -1]},
//!     {"profile": [1, 0], "values": [-1, 1]},
//!     {"profile": [1, 1], "values": [0, 0]}
//!   ]
//! }
//! ```
//!
//! Input entries may come in any order; an optional `"meta"` object is
//! accepted and ignored. Output is canonical: profiles in lexicographic
//! order and numbers in their shortest round-trip decimal form.

use std::fmt::Write as _;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::game::{GameSpec, PayoffEntry, PayoffTable};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDocument {
    players: Vec<RawPlayer>,
    payoffs: Vec<RawEntry>,
    #[serde(default)]
    #[allow(dead_code)]
    meta: Option<serde_json::Value>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPlayer {
    name: String,
    strategies: Vec<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEntry {
    profile: Vec<usize>,
    values: Vec<f64>,
}

/// Parses a document into an unchecked entry table.
pub fn parse_table(doc: &[u8]) -> Result<PayoffTable> {
    let text = std::str::from_utf8(doc).map_err(|e| {
        let (line, column) = position(&doc[..e.valid_up_to()]);
        Error::Parse {
            line,
            column,
            message: "invalid UTF-8".to_string(),
        }
    })?;
    let raw: RawDocument = serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        column: e.column(),
        message: strip_position(&e.to_string()),
    })?;
    Ok(PayoffTable {
        player_names: raw.players.iter().map(|p| p.name.clone()).collect(),
        strategy_labels: raw.players.into_iter().map(|p| p.strategies).collect(),
        entries: raw
            .payoffs
            .into_iter()
            .map(|e| PayoffEntry {
                profile: e.profile,
                values: e.values,
            })
            .collect(),
    })
}

pub fn parse_game(doc: &[u8]) -> Result<GameSpec> {
    parse_table(doc)?.into_game()
}

fn position(bytes: &[u8]) -> (usize, usize) {
    let line = bytes.iter().filter(|&&b| b == b'\n').count() + 1;
    let column = bytes.iter().rev().take_while(|&&b| b != b'\n').count() + 1;
    (line, column)
}

fn strip_position(message: &str) -> String {
    match message.rfind(" at line ") {
        Some(k) => message[..k].to_string(),
        None => message.to_string(),
    }
}

/// Shortest decimal that parses back to the same `f64`.
pub fn format_number(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || (1e-5..1e16).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

fn json_string(s: &str) -> String {
    serde_json::to_string(s).expect("strings always serialize")
}

fn number_list<T, F>(items: &[T], f: F) -> String
where
    F: Fn(&T) -> String,
{
    items.iter().map(f).collect::<Vec<_>>().join(", ")
}

/// Canonical serialization.
pub fn write_game(g: &GameSpec) -> String {
    let mut out = String::new();
    out.push_str("{\n  \"players\": [\n");
    let n = g.players();
    for (p, (name, labels)) in g.player_names().iter().zip(g.strategy_labels()).enumerate() {
        let labels = number_list(labels, |l| json_string(l));
        let sep = if p + 1 < n { "," } else { "" };
        let _ = writeln!(
            out,
            "    {{\"name\": {}, \"strategies\": [{labels}]}}{sep}",
            json_string(name)
        );
    }
    out.push_str("  ],\n  \"payoffs\": [\n");
    let m = g.profile_count();
    for (k, profile) in g.profiles().enumerate() {
        let values = g.payoff(&profile).expect("profile in range");
        let sep = if k + 1 < m { "," } else { "" };
        let _ = writeln!(
            out,
            "    {{\"profile\": [{}], \"values\": [{}]}}{sep}",
            number_list(&profile, |j| j.to_string()),
            number_list(values, |&v| format_number(v))
        );
    }
    out.push_str("  ]\n}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::Defect;
    use crate::generate::{builtin, Builtin};
    use crate::payoff::is_zero_sum;

    const BAR: &str = r#"{
  "players": [
    {"name": "man 1", "strategies": ["M", "A"]},
    {"name": "man 2", "strategies": ["M", "A"]}
  ],
  "payoffs": [
    {"profile": [0, 0], "values": [0, 0]},
    {"profile": [0, 1], "values": [1, -1]},
    {"profile": [1, 0], "values": [-1, 1]},
    {"profile": [1, 1], "values": [0, 0]}
  ]
}
"#;

    #[test]
    fn bar_document_parses_and_is_canonical() {
        let g = parse_game(BAR.as_bytes()).unwrap();
        assert_eq!(g, builtin(Builtin::Bar));
        assert_eq!(write_game(&g), BAR);
    }

    #[test]
    fn rps_round_trip() {
        let g = builtin(Builtin::Rps);
        let text = write_game(&g);
        let back = parse_game(text.as_bytes()).unwrap();
        assert_eq!(back, g);
        assert!(is_zero_sum(&back, 0.0));
        assert_eq!(back.profile_count(), 9);
    }

    #[test]
    fn order_independent_input() {
        let shuffled = BAR.replace(
            "{\"profile\": [0, 0], \"values\": [0, 0]},\n    {\"profile\": [0, 1], \"values\": [1, -1]}",
            "{\"profile\": [0, 1], \"values\": [1, -1]},\n    {\"profile\": [0, 0], \"values\": [0, 0]}",
        );
        assert_ne!(shuffled, BAR);
        assert_eq!(
            parse_game(shuffled.as_bytes()).unwrap(),
            builtin(Builtin::Bar)
        );
    }

    #[test]
    fn duplicate_profile_is_rejected() {
        let dup = BAR.replace("\"profile\": [1, 1]", "\"profile\": [0, 0]");
        let err = parse_game(dup.as_bytes()).unwrap_err();
        assert!(err.to_string().contains("duplicate profile"), "{err}");
        match err {
            Error::InvalidGame(d) => {
                assert!(d.contains(&Defect::DuplicateProfile {
                    profile: vec![0, 0]
                }));
                assert!(d.contains(&Defect::IncompleteTensor {
                    missing: vec![1, 1]
                }));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn value_count_and_range_errors() {
        let short = BAR.replace("\"values\": [1, -1]", "\"values\": [1]");
        assert!(matches!(
            parse_game(short.as_bytes()).unwrap_err(),
            Error::InvalidGame(ref d) if matches!(d[0], Defect::ValueCount { .. })
        ));
        let out = BAR.replace("\"profile\": [1, 1]", "\"profile\": [1, 2]");
        let err = parse_game(out.as_bytes()).unwrap_err();
        assert!(err.to_string().contains("index out of range"), "{err}");
    }

    #[test]
    fn syntax_errors_carry_positions() {
        let broken = BAR.replace("\"values\": [1, -1]", "\"values\": [1, -1");
        match parse_game(broken.as_bytes()).unwrap_err() {
            Error::Parse { line, column, .. } => {
                assert_eq!(line, 8);
                assert!(column > 0);
            }
            other => panic!("unexpected {other:?}"),
        }
        let bad_utf8 = b"{\n\"players\": \xff}";
        assert!(matches!(
            parse_game(bad_utf8),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn numbers_are_shortest_round_trip() {
        assert_eq!(format_number(-1.0), "-1");
        assert_eq!(format_number(0.5), "0.5");
        assert_eq!(format_number(0.1), "0.1");
        assert_eq!(format_number(1e300), "1e300");
        assert_eq!(format_number(-2.5e-7), "-2.5e-7");
        for x in [
            0.1 + 0.2,
            1e-320,
            -0.0,
            123456789.12345679,
            f64::MAX,
            f64::MIN_POSITIVE,
        ] {
            let s = format_number(x);
            let back: f64 = serde_json::from_str(&s).unwrap();
            assert_eq!(back.to_bits(), x.to_bits(), "{x} -> {s}");
        }
    }
}
