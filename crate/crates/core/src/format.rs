//! JSON model files.
//!
//! ```json
//! {"clocks":["x"],"locations":["a","b"],"initial":"a",
//!  "edges":[{"from":"a","to":"b","guard":{"x":[1,null]},"reset":["x"]}]}
//! ```
//!
//! `null` as an upper bound means infinity. `guard` may omit clocks (they
//! default to `[0,null]`) and `reset` may be omitted entirely.

use std::collections::BTreeMap;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{
    normalize_guard, ClockId, Edge, LocationId, NatInf, TimeInterval, TimedAutomaton,
    ValidatedModel, ValidationError, Violation,
};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelDocument {
    clocks: Vec<String>,
    locations: Vec<String>,
    initial: String,
    edges: Vec<EdgeDocument>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EdgeDocument {
    from: String,
    to: String,
    #[serde(default, skip_serializing_if = "IndexMap::is_empty")]
    guard: IndexMap<String, (u32, Option<u32>)>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    reset: Vec<String>,
}

/// Syntax-level failure, with the 1-based position reported by the JSON reader.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("parse error at line {line}, column {column}: {reason}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Invalid(#[from] ValidationError),
}

/// Parses and validates a model document.
pub fn load_model(bytes: &[u8]) -> Result<ValidatedModel, ModelError> {
    let doc: ModelDocument = serde_json::from_slice(bytes).map_err(|e| ParseError {
        line: e.line(),
        column: e.column(),
        reason: strip_position(e.to_string()),
    })?;
    Ok(resolve(doc)?.validate()?)
}

/// serde_json appends ` at line L column C`; the position has its own fields.
fn strip_position(mut message: String) -> String {
    if let Some(at) = message.rfind(" at line ") {
        message.truncate(at);
    }
    message
}

/// Serializes a model as a single-line JSON document (trailing newline
/// excluded). Trivial guard intervals and empty reset sets are omitted.
pub fn dump_model(model: &TimedAutomaton) -> String {
    let edges = model
        .edges
        .iter()
        .map(|e| EdgeDocument {
            from: model.location_name(e.from).to_owned(),
            to: model.location_name(e.to).to_owned(),
            guard: e
                .guard
                .intervals()
                .iter()
                .enumerate()
                .filter(|(_, i)| !i.is_trivial())
                .map(|(c, i)| (model.clocks[c].clone(), (i.lower, i.upper.finite())))
                .collect(),
            reset: e
                .reset
                .iter()
                .map(|&c| model.clock_name(c).to_owned())
                .collect(),
        })
        .collect();
    let doc = ModelDocument {
        clocks: model.clocks.clone(),
        locations: model.locations.clone(),
        initial: model.location_name(model.initial).to_owned(),
        edges,
    };
    serde_json::to_string(&doc).expect("model document serializes")
}

/// Maps names to indices. Unresolvable names are reported as violations
/// together with whatever `validate` finds afterwards.
fn resolve(doc: ModelDocument) -> Result<TimedAutomaton, ValidationError> {
    let mut violations = Vec::new();
    let location = |name: &str| doc.locations.iter().position(|l| l == name);
    let clock = |name: &str| doc.clocks.iter().position(|c| c == name);

    let initial = match location(&doc.initial) {
        Some(i) => LocationId(i),
        None => {
            violations.push(Violation::UnknownInitial {
                name: doc.initial.clone(),
            });
            LocationId(0)
        }
    };

    let mut edges = Vec::with_capacity(doc.edges.len());
    for (ordinal, e) in doc.edges.iter().enumerate() {
        let mut end = |name: &str| match location(name) {
            Some(i) => LocationId(i),
            None => {
                violations.push(Violation::DanglingLocation {
                    edge: ordinal,
                    location: name.to_owned(),
                });
                LocationId(0)
            }
        };
        let from = end(&e.from);
        let to = end(&e.to);

        let mut partial = BTreeMap::new();
        for (name, &(lower, upper)) in &e.guard {
            match clock(name) {
                Some(c) => {
                    let upper = upper.map_or(NatInf::Infinite, NatInf::Finite);
                    partial.insert(ClockId(c), TimeInterval { lower, upper });
                }
                None => violations.push(Violation::UnknownClock {
                    edge: ordinal,
                    clock: name.clone(),
                }),
            }
        }

        let mut reset = Vec::with_capacity(e.reset.len());
        for name in &e.reset {
            match clock(name) {
                Some(c) => reset.push(ClockId(c)),
                None => violations.push(Violation::UnknownClock {
                    edge: ordinal,
                    clock: name.clone(),
                }),
            }
        }
        reset.sort_unstable();
        reset.dedup();

        edges.push(Edge {
            from,
            to,
            guard: normalize_guard(&partial, doc.clocks.len()),
            reset,
            ordinal,
        });
    }

    if violations.is_empty() {
        Ok(TimedAutomaton {
            locations: doc.locations,
            clocks: doc.clocks,
            edges,
            initial,
        })
    } else {
        Err(ValidationError { violations })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modelgen::{gen_fig4, gen_lcm};

    const FIG4: &str = r#"{"clocks":["x","y"],"locations":["l0","l1","l2","l3"],"initial":"l0","edges":[{"from":"l0","to":"l1","guard":{"x":[2,null]}},{"from":"l1","to":"l1","reset":["x"]},{"from":"l1","to":"l2","guard":{"x":[2,null],"y":[2,null]},"reset":["x","y"]},{"from":"l2","to":"l1","guard":{"x":[1,null]}},{"from":"l2","to":"l3","guard":{"x":[0,1],"y":[2,null]}}]}"#;

    #[test]
    fn loads_reference_document() {
        let m = load_model(FIG4.as_bytes()).unwrap();
        assert_eq!(m.location_count(), 4);
        assert_eq!(m.max_constant(), 2);
        assert_eq!(m.automaton(), &gen_fig4());
    }

    #[test]
    fn dump_matches_reference_bytes() {
        assert_eq!(dump_model(&gen_fig4()), FIG4);
    }

    #[test]
    fn lcm_round_trips() {
        let m = gen_lcm(3, NatInf::Infinite);
        let back = load_model(dump_model(&m).as_bytes()).unwrap();
        assert_eq!(back.automaton(), &m);
    }

    #[test]
    fn negative_bound_is_a_parse_error() {
        let doc = FIG4.replace("[0,1]", "[0,-1]");
        match load_model(doc.as_bytes()) {
            Err(ModelError::Parse(e)) => assert_eq!(e.line, 1),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let doc = FIG4.replace(r#""initial":"l0""#, r#""initial":"l0","urgent":true"#);
        assert!(matches!(
            load_model(doc.as_bytes()),
            Err(ModelError::Parse(_))
        ));
        let doc = FIG4.replace(r#""reset":["x"]"#, r#""reset":["x"],"sync":"a""#);
        assert!(matches!(
            load_model(doc.as_bytes()),
            Err(ModelError::Parse(_))
        ));
    }

    #[test]
    fn unknown_names_are_violations() {
        let doc = FIG4.replace(r#""to":"l3""#, r#""to":"l9""#);
        let Err(ModelError::Invalid(err)) = load_model(doc.as_bytes()) else {
            panic!("expected validation error");
        };
        assert_eq!(
            err.violations,
            vec![Violation::DanglingLocation {
                edge: 4,
                location: "l9".into()
            }]
        );

        let doc = FIG4.replace(r#""reset":["x"]"#, r#""reset":["z"]"#);
        assert!(matches!(
            load_model(doc.as_bytes()),
            Err(ModelError::Invalid(_))
        ));
    }

    #[test]
    fn reversed_interval_reports_edge_and_clock() {
        let doc = FIG4.replace("[0,1]", "[3,2]");
        let Err(ModelError::Invalid(err)) = load_model(doc.as_bytes()) else {
            panic!("expected validation error");
        };
        assert!(matches!(
            &err.violations[..],
            [Violation::EmptyInterval { edge: 4, clock, .. }] if clock == "x"
        ));
    }

    #[test]
    fn multiline_parse_error_position() {
        let err = load_model(b"{\n  \"clocks\": [\"x\"],\n  \"locations\": 5\n}").unwrap_err();
        match err {
            ModelError::Parse(e) => assert_eq!(e.line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }
}
