use std::fs;
use std::path::PathBuf;

use uplift_zero::amendments::{bundles_to_json, parse_bundles};
use uplift_zero::model::parse_instance;
use uplift_zero::scarf::scarf_instance;
use uplift_zero::{Expr, Schedule};

fn seeds(target: &str) -> Vec<(PathBuf, String)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fuzz/corpus")
        .join(target);
    let mut out: Vec<_> = fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| e.unwrap().path())
        .map(|p| {
            let text = fs::read_to_string(&p).unwrap();
            (p, text)
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds for {target}");
    out
}

#[test]
fn instance_seeds() {
    let mut accepted = 0;
    for (path, text) in seeds("parse_instance") {
        if let Ok(inst) = parse_instance(&text) {
            let again = parse_instance(&inst.to_json_string()).unwrap();
            assert_eq!(again.units.len(), inst.units.len(), "{}", path.display());
            accepted += 1;
        }
    }
    assert!(accepted > 0);
}

#[test]
fn expr_seeds() {
    let mut accepted = 0;
    for (path, text) in seeds("expr_json") {
        if let Ok(e) = Expr::from_json(&text) {
            assert_eq!(
                Expr::from_json(&e.to_json()).unwrap(),
                e,
                "{}",
                path.display()
            );
            accepted += 1;
        }
    }
    assert!(accepted > 0);
}

#[test]
fn bundle_seeds() {
    for (path, text) in seeds("bundle_file") {
        let b = parse_bundles(&text).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        assert_eq!(parse_bundles(&bundles_to_json(&b)).unwrap(), b);
    }
}

#[test]
fn schedule_seeds() {
    let inst = scarf_instance(10.0).unwrap();
    let mut accepted = 0;
    for (_, text) in seeds("schedule_parse") {
        if let Ok(s) = Schedule::parse(&text, &inst) {
            s.validate(&inst).unwrap();
            accepted += 1;
        }
    }
    assert!(accepted > 0);
}
