use naifs_lab::catalog::EXAMPLES;
use serde_json::Value;

fn validator() -> jsonschema::Validator {
    let schema: Value = serde_json::from_str(include_str!("../schema/experiment.schema.json")).unwrap();
    jsonschema::validator_for(&schema).unwrap()
}

fn errors(v: &jsonschema::Validator, doc: &Value) -> Vec<String> {
    v.iter_errors(doc).map(|e| format!("{}: {e}", e.instance_path())).collect()
}

#[test]
fn bundled_examples_match_schema() {
    let v = validator();
    for (name, text) in EXAMPLES {
        let doc: Value = serde_json::from_str(text).unwrap();
        let errs = errors(&v, &doc);
        assert!(errs.is_empty(), "{name}: {errs:?}");
    }
}

#[test]
fn serialized_configs_match_schema() {
    let v = validator();
    for (name, text) in EXAMPLES {
        let cfg = naifs_lab::parse(text).unwrap();
        let doc = serde_json::to_value(&cfg).unwrap();
        let errs = errors(&v, &doc);
        assert!(errs.is_empty(), "{name}: {errs:?}");
    }
}

#[test]
fn schema_rejects_what_the_parser_rejects() {
    let v = validator();
    let base: Value = serde_json::from_str(EXAMPLES[0].1).unwrap();
    let mut extra = base.clone();
    extra["unexpected"] = Value::Bool(true);
    let mut bad_mode = base.clone();
    bad_mode["mode"] = Value::from("simulate");
    let mut bad_map = base;
    bad_map["schedule"]["cycle"][0][0] = serde_json::json!({"kind": "doubling", "a": 2});
    for doc in [extra, bad_mode, bad_map] {
        assert!(!v.is_valid(&doc));
        assert!(naifs_lab::parse(&doc.to_string()).is_err());
    }
}
