//! Decoding and encoding of the textual model format.
//!
//! Models are stored as UTF-8 JSON documents with a fixed schema:
//!
//! ```text
//! {
//!   "agents":      ["a1", "a2"],
//!   "states":      ["q0", "q1", "q2"],
//!   "actions":     ["a", "b"],
//!   "available":   {"q0": {"a1": ["a", "b"], "a2": ["a", "b"]}, ...},
//!   "transitions": [{"from": "q0", "profile": {"a1": "a", "a2": "a"}, "to": "q2"}, ...],
//!   "affairs":     {"bad": ["q2"]}          // optional
//! }
//! ```
//!
//! This module only enforces the schema; referential integrity (unknown
//! names, totality of the transition table, and so on) is the job of
//! [`crate::cgs::validate_model`]. Parsing is total: any input, including
//! arbitrary bytes, yields either a document or a list of structured errors.

use std::collections::BTreeMap;

use serde_json::{Map, Value};
use thiserror::Error;

use crate::cgs::{Cgs, Coalition, NameKind, StateOfAffairs, StateSet, ValidatedModel};

/// A decoded but not yet validated model description.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ModelDocument {
    pub agents: Vec<String>,
    pub states: Vec<String>,
    pub actions: Vec<String>,
    /// state name -> agent name -> available action names
    pub available: BTreeMap<String, BTreeMap<String, Vec<String>>>,
    pub transitions: Vec<TransitionRecord>,
    /// affair label -> state names
    pub affairs: BTreeMap<String, Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransitionRecord {
    pub from: String,
    /// agent name -> action name
    pub profile: BTreeMap<String, String>,
    pub to: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("schema error at {path}: {message}")]
    Schema { path: String, message: String },
}

/// Errors from resolving command-line coalition / affairs expressions.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QueryError {
    #[error("unknown {kind} name \"{name}\"")]
    UnknownName { kind: NameKind, name: String },
    #[error("\"{name}\" is listed more than once")]
    DuplicateMember { name: String },
}

fn schema(errors: &mut Vec<ParseError>, path: &str, message: impl Into<String>) {
    errors.push(ParseError::Schema {
        path: path.to_string(),
        message: message.into(),
    });
}

fn type_name(v: &Value) -> &'static str {
    match v {
        Value::Null => "null",
        Value::Bool(_) => "boolean",
        Value::Number(_) => "number",
        Value::String(_) => "string",
        Value::Array(_) => "array",
        Value::Object(_) => "object",
    }
}

fn expect_string(v: &Value, path: &str, errors: &mut Vec<ParseError>) -> Option<String> {
    match v {
        Value::String(s) => Some(s.clone()),
        other => {
            schema(errors, path, format!("expected string, found {}", type_name(other)));
            None
        }
    }
}

fn expect_string_array(v: &Value, path: &str, errors: &mut Vec<ParseError>) -> Vec<String> {
    match v {
        Value::Array(items) => items
            .iter()
            .enumerate()
            .filter_map(|(i, item)| expect_string(item, &format!("{path}[{i}]"), errors))
            .collect(),
        other => {
            schema(errors, path, format!("expected array, found {}", type_name(other)));
            Vec::new()
        }
    }
}

fn expect_object<'v>(v: &'v Value, path: &str, errors: &mut Vec<ParseError>) -> Option<&'v Map<String, Value>> {
    match v {
        Value::Object(map) => Some(map),
        other => {
            schema(errors, path, format!("expected object, found {}", type_name(other)));
            None
        }
    }
}

/// Decode a model document from UTF-8 text.
pub fn parse_model(text: &str) -> Result<ModelDocument, Vec<ParseError>> {
    parse_model_bytes(text.as_bytes())
}

/// Decode a model document from raw bytes. Invalid UTF-8 and malformed JSON
/// are reported as syntax errors; schema violations carry the offending path.
pub fn parse_model_bytes(bytes: &[u8]) -> Result<ModelDocument, Vec<ParseError>> {
    let value: Value = match serde_json::from_slice(bytes) {
        Ok(v) => v,
        Err(e) => {
            return Err(vec![ParseError::Syntax {
                line: e.line(),
                column: e.column(),
                message: e.to_string(),
            }]);
        }
    };
    document_from_value(&value)
}

const REQUIRED_KEYS: [&str; 5] = ["agents", "states", "actions", "available", "transitions"];
const ALL_KEYS: [&str; 6] = ["agents", "states", "actions", "available", "transitions", "affairs"];

fn document_from_value(value: &Value) -> Result<ModelDocument, Vec<ParseError>> {
    let mut errors = Vec::new();
    let Some(root) = expect_object(value, "$", &mut errors) else {
        return Err(errors);
    };

    for key in REQUIRED_KEYS {
        if !root.contains_key(key) {
            schema(&mut errors, "$", format!("missing required key \"{key}\""));
        }
    }
    for key in root.keys() {
        if !ALL_KEYS.contains(&key.as_str()) {
            schema(&mut errors, "$", format!("unknown key \"{key}\""));
        }
    }

    let mut doc = ModelDocument::default();
    if let Some(v) = root.get("agents") {
        doc.agents = expect_string_array(v, "$.agents", &mut errors);
    }
    if let Some(v) = root.get("states") {
        doc.states = expect_string_array(v, "$.states", &mut errors);
    }
    if let Some(v) = root.get("actions") {
        doc.actions = expect_string_array(v, "$.actions", &mut errors);
    }

    if let Some(v) = root.get("available") {
        let path = "$.available";
        if let Some(by_state) = expect_object(v, path, &mut errors) {
            for (state, inner) in by_state {
                let path = format!("{path}.{state}");
                let Some(by_agent) = expect_object(inner, &path, &mut errors) else {
                    continue;
                };
                let mut agent_map = BTreeMap::new();
                for (agent, actions) in by_agent {
                    let path = format!("{path}.{agent}");
                    agent_map.insert(agent.clone(), expect_string_array(actions, &path, &mut errors));
                }
                doc.available.insert(state.clone(), agent_map);
            }
        }
    }

    if let Some(v) = root.get("transitions") {
        let path = "$.transitions";
        match v {
            Value::Array(items) => {
                for (i, item) in items.iter().enumerate() {
                    let path = format!("{path}[{i}]");
                    let Some(record) = expect_object(item, &path, &mut errors) else {
                        continue;
                    };
                    for key in record.keys() {
                        if !["from", "profile", "to"].contains(&key.as_str()) {
                            schema(&mut errors, &path, format!("unknown key \"{key}\""));
                        }
                    }
                    let from = match record.get("from") {
                        Some(v) => expect_string(v, &format!("{path}.from"), &mut errors),
                        None => {
                            schema(&mut errors, &path, "missing required key \"from\"");
                            None
                        }
                    };
                    let to = match record.get("to") {
                        Some(v) => expect_string(v, &format!("{path}.to"), &mut errors),
                        None => {
                            schema(&mut errors, &path, "missing required key \"to\"");
                            None
                        }
                    };
                    let profile = match record.get("profile") {
                        Some(v) => {
                            let path = format!("{path}.profile");
                            expect_object(v, &path, &mut errors).map(|map| {
                                let mut out = BTreeMap::new();
                                for (agent, action) in map {
                                    if let Some(action) =
                                        expect_string(action, &format!("{path}.{agent}"), &mut errors)
                                    {
                                        out.insert(agent.clone(), action);
                                    }
                                }
                                out
                            })
                        }
                        None => {
                            schema(&mut errors, &path, "missing required key \"profile\"");
                            None
                        }
                    };
                    if let (Some(from), Some(profile), Some(to)) = (from, profile, to) {
                        doc.transitions.push(TransitionRecord { from, profile, to });
                    }
                }
            }
            other => schema(&mut errors, path, format!("expected array, found {}", type_name(other))),
        }
    }

    if let Some(v) = root.get("affairs") {
        let path = "$.affairs";
        if let Some(by_label) = expect_object(v, path, &mut errors) {
            for (label, states) in by_label {
                let path = format!("{path}.{label}");
                doc.affairs
                    .insert(label.clone(), expect_string_array(states, &path, &mut errors));
            }
        }
    }

    if errors.is_empty() {
        Ok(doc)
    } else {
        Err(errors)
    }
}

/// Encode a validated model in canonical form: object keys sorted, the three
/// name lists in index order, transitions sorted by (source state index,
/// profile code). The output is byte-stable, and parsing it back yields the
/// same validated content.
pub fn serialize_model(model: &Cgs, affairs: &BTreeMap<String, StateOfAffairs>) -> String {
    let mut root = Map::new();

    let names =
        |it: &mut dyn Iterator<Item = String>| Value::Array(it.map(Value::String).collect());
    root.insert(
        "agents".to_string(),
        names(&mut model.agents().map(|a| model.agent_name(a).to_string())),
    );
    root.insert(
        "states".to_string(),
        names(&mut model.states().map(|q| model.state_name(q).to_string())),
    );
    root.insert(
        "actions".to_string(),
        names(&mut (0..model.num_actions()).map(|i| {
            model.action_name(crate::cgs::ActionId(i as u32)).to_string()
        })),
    );

    let mut available = Map::new();
    for q in model.states() {
        let mut by_agent = Map::new();
        for a in model.agents() {
            let actions: Vec<Value> = model
                .available(q, a)
                .iter()
                .map(|&x| Value::String(model.action_name(x).to_string()))
                .collect();
            by_agent.insert(model.agent_name(a).to_string(), Value::Array(actions));
        }
        available.insert(model.state_name(q).to_string(), Value::Object(by_agent));
    }
    root.insert("available".to_string(), Value::Object(available));

    let mut transitions = Vec::new();
    for q in model.states() {
        for code in 0..model.num_profiles(q) {
            let profile = model.decode_profile(q, code);
            let mut profile_map = Map::new();
            for a in model.agents() {
                profile_map.insert(
                    model.agent_name(a).to_string(),
                    Value::String(model.action_name(profile.action_for(a)).to_string()),
                );
            }
            let mut record = Map::new();
            record.insert("from".to_string(), Value::String(model.state_name(q).to_string()));
            record.insert("profile".to_string(), Value::Object(profile_map));
            record.insert(
                "to".to_string(),
                Value::String(model.state_name(model.successor_by_code(q, code)).to_string()),
            );
            transitions.push(Value::Object(record));
        }
    }
    root.insert("transitions".to_string(), Value::Array(transitions));

    if !affairs.is_empty() {
        let mut affair_map = Map::new();
        for (label, affair) in affairs {
            let states: Vec<Value> = affair
                .states()
                .iter()
                .map(|q| Value::String(model.state_name(q).to_string()))
                .collect();
            affair_map.insert(label.clone(), Value::Array(states));
        }
        root.insert("affairs".to_string(), Value::Object(affair_map));
    }

    let mut text = serde_json::to_string_pretty(&Value::Object(root))
        .expect("model serialization cannot fail");
    text.push('\n');
    text
}

/// Resolve a comma-separated list of agent names. The empty string denotes
/// the empty coalition.
pub fn parse_coalition(text: &str, model: &Cgs) -> Result<Coalition, QueryError> {
    let text = text.trim();
    let mut coalition = Coalition::EMPTY;
    if text.is_empty() {
        return Ok(coalition);
    }
    for raw in text.split(',') {
        let name = raw.trim();
        let agent = model
            .agent_by_name(name)
            .ok_or_else(|| QueryError::UnknownName {
                kind: NameKind::Agent,
                name: name.to_string(),
            })?;
        if coalition.contains(agent) {
            return Err(QueryError::DuplicateMember {
                name: name.to_string(),
            });
        }
        coalition.insert(agent);
    }
    Ok(coalition)
}

/// Resolve a state-of-affairs expression: either a comma-separated list of
/// state names (empty string = empty set) or `@label` referring to one of the
/// model document's named affairs.
pub fn parse_affairs(text: &str, model: &ValidatedModel) -> Result<StateOfAffairs, QueryError> {
    let text = text.trim();
    if let Some(label) = text.strip_prefix('@') {
        return model
            .affairs
            .get(label)
            .cloned()
            .ok_or_else(|| QueryError::UnknownName {
                kind: NameKind::Affair,
                name: label.to_string(),
            });
    }
    let mut set = StateSet::empty(model.cgs.num_states());
    if text.is_empty() {
        return Ok(StateOfAffairs::new(set));
    }
    for raw in text.split(',') {
        let name = raw.trim();
        let state = model
            .cgs
            .state_by_name(name)
            .ok_or_else(|| QueryError::UnknownName {
                kind: NameKind::State,
                name: name.to_string(),
            })?;
        if set.contains(state) {
            return Err(QueryError::DuplicateMember {
                name: name.to_string(),
            });
        }
        set.insert(state);
    }
    Ok(StateOfAffairs::new(set))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cgs::{validate_model, NameKind};
    use crate::oracle::{random_document, GeneratorParams};
    use proptest::prelude::*;

    const E1: &str = include_str!("../tests/fixtures/e1.json");

    fn e1() -> ValidatedModel {
        validate_model(&parse_model(E1).unwrap()).unwrap()
    }

    #[test]
    fn fixture_parses_and_round_trips_byte_for_byte() {
        let doc = parse_model(E1).unwrap();
        assert_eq!(doc.agents.len(), 2);
        assert_eq!(doc.states.len(), 3);
        assert_eq!(doc.transitions.len(), 12);
        let model = validate_model(&doc).unwrap();
        let out = serialize_model(&model.cgs, &model.affairs);
        assert_eq!(out, E1);
        assert_eq!(out, serialize_model(&model.cgs, &model.affairs));
    }

    #[test]
    fn empty_object_reports_missing_required_keys_at_root() {
        let errors = parse_model("{}").unwrap_err();
        for key in ["agents", "states", "actions", "available", "transitions"] {
            assert!(
                errors.iter().any(|e| matches!(
                    e,
                    ParseError::Schema { path, message } if path == "$" && message.contains(key)
                )),
                "no root schema error mentioning {key}: {errors:?}"
            );
        }
    }

    #[test]
    fn malformed_text_is_a_positioned_syntax_error() {
        let errors = parse_model("{\n  \"agents\": [,]\n}").unwrap_err();
        assert_eq!(errors.len(), 1);
        match &errors[0] {
            ParseError::Syntax { line, .. } => assert_eq!(*line, 2),
            other => panic!("expected a syntax error, got {other:?}"),
        }
        assert!(parse_model("").is_err());
    }

    #[test]
    fn schema_errors_carry_paths() {
        let text = r#"{
            "agents": ["a1", 3],
            "states": ["q0"],
            "actions": ["a"],
            "available": {"q0": {"a1": ["a"]}},
            "transitions": [{"from": "q0", "profile": {"a1": "a"}}],
            "surprise": true
        }"#;
        let errors = parse_model(text).unwrap_err();
        let paths: Vec<&str> = errors
            .iter()
            .map(|e| match e {
                ParseError::Schema { path, .. } => path.as_str(),
                ParseError::Syntax { .. } => panic!("unexpected syntax error"),
            })
            .collect();
        assert!(paths.contains(&"$.agents[1]"), "{paths:?}");
        assert!(paths.contains(&"$.transitions[0]"), "{paths:?}");
        assert!(paths.contains(&"$"), "{paths:?}");
    }

    #[test]
    fn referential_checks_are_deferred_to_validation() {
        let mut doc = parse_model(E1).unwrap();
        doc.transitions[0].to = "q9".to_string();
        let errors = validate_model(&doc).unwrap_err();
        assert!(errors.contains(&crate::cgs::ModelError::UnknownName {
            kind: NameKind::State,
            name: "q9".to_string(),
        }));
    }

    #[test]
    fn shuffled_transitions_share_one_canonical_form() {
        let mut doc = parse_model(E1).unwrap();
        doc.transitions.reverse();
        let model = validate_model(&doc).unwrap();
        assert_eq!(serialize_model(&model.cgs, &model.affairs), E1);
    }

    #[test]
    fn affairs_are_omitted_from_canonical_output_when_absent() {
        let mut doc = parse_model(E1).unwrap();
        doc.affairs.clear();
        let model = validate_model(&doc).unwrap();
        let out = serialize_model(&model.cgs, &model.affairs);
        assert!(!out.contains("affairs"));
        let back = parse_model(&out).unwrap();
        assert!(back.affairs.is_empty());
    }

    #[test]
    fn coalition_expressions_resolve_names() {
        let model = e1();
        let cgs = &model.cgs;
        let a1 = cgs.agent_by_name("a1").unwrap();
        let a2 = cgs.agent_by_name("a2").unwrap();
        assert_eq!(
            parse_coalition("a1,a2", cgs).unwrap(),
            Coalition::from_members([a1, a2])
        );
        assert_eq!(
            parse_coalition(" a2 , a1 ", cgs).unwrap(),
            cgs.grand_coalition()
        );
        assert_eq!(parse_coalition("", cgs).unwrap(), Coalition::EMPTY);
        assert_eq!(
            parse_coalition("a9", cgs).unwrap_err(),
            QueryError::UnknownName {
                kind: NameKind::Agent,
                name: "a9".to_string(),
            }
        );
        assert_eq!(
            parse_coalition("a1,a1", cgs).unwrap_err(),
            QueryError::DuplicateMember {
                name: "a1".to_string(),
            }
        );
    }

    #[test]
    fn affair_expressions_resolve_labels_and_state_lists() {
        let model = e1();
        let q1 = model.cgs.state_by_name("q1").unwrap();
        let q2 = model.cgs.state_by_name("q2").unwrap();
        let named = parse_affairs("@bad", &model).unwrap();
        assert!(named.contains(q2) && !named.contains(q1));
        let listed = parse_affairs("q1,q2", &model).unwrap();
        assert!(listed.contains(q1) && listed.contains(q2));
        assert!(parse_affairs("", &model).unwrap().states().is_empty());
        assert_eq!(
            parse_affairs("@good", &model).unwrap_err(),
            QueryError::UnknownName {
                kind: NameKind::Affair,
                name: "good".to_string(),
            }
        );
        assert_eq!(
            parse_affairs("q9", &model).unwrap_err(),
            QueryError::UnknownName {
                kind: NameKind::State,
                name: "q9".to_string(),
            }
        );
        assert_eq!(
            parse_affairs("q1,q1", &model).unwrap_err(),
            QueryError::DuplicateMember {
                name: "q1".to_string(),
            }
        );
    }

    proptest! {
        #[test]
        fn canonical_form_is_a_round_trip_fixpoint(seed in 0u64..2048) {
            let doc = random_document(&GeneratorParams::default(), seed);
            let model = validate_model(&doc).unwrap();
            let first = serialize_model(&model.cgs, &model.affairs);
            let reparsed = validate_model(&parse_model(&first).unwrap()).unwrap();
            let second = serialize_model(&reparsed.cgs, &reparsed.affairs);
            prop_assert_eq!(&first, &second);

            // same transition function, not just same bytes
            let (a, b) = (&model.cgs, &reparsed.cgs);
            prop_assert_eq!(a.num_states(), b.num_states());
            for q in a.states() {
                prop_assert_eq!(a.num_profiles(q), b.num_profiles(q));
                for code in 0..a.num_profiles(q) {
                    prop_assert_eq!(a.successor_by_code(q, code), b.successor_by_code(q, code));
                }
            }
        }

        #[test]
        fn arbitrary_bytes_never_crash_the_parser(bytes in proptest::collection::vec(any::<u8>(), 0..512)) {
            let _ = parse_model_bytes(&bytes);
        }

        #[test]
        fn arbitrary_json_shapes_never_crash_the_parser(text in "[\\{\\}\\[\\]\"a-z0-9:,. ]{0,256}") {
            let _ = parse_model(&text);
        }
    }
}
