use std::process::Command;

fn regolith(store: &std::path::Path, args: &[&str]) -> String {
    let out = Command::new(env!("CARGO_BIN_EXE_regolith"))
        .arg("--store")
        .arg(store)
        .args(args)
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn campaign_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let store = dir.path();
    assert_eq!(
        regolith(
            store,
            &["new", "--site", "white_sands_transect", "--seed", "4", "--id", "ws"]
        )
        .trim(),
        "ws"
    );
    let plan = regolith(store, &["plan", "ws", "--flags"]);
    assert_eq!(plan.lines().count(), 20);
    regolith(store, &["suggest", "ws", "-k", "2"]);
    regolith(store, &["decide", "ws", "accept"]);
    regolith(store, &["suggest", "ws"]);
    regolith(store, &["decide", "ws", "reject", "--feedback", "objective=verify"]);
    let status = regolith(store, &["status", "ws", "--json"]);
    let v: serde_json::Value = serde_json::from_str(&status).unwrap();
    assert_eq!(v["measurements"].as_array().unwrap().len(), 21);

    let live = regolith(store, &["replay", "ws"]);
    let log = store.join("ws").join("events.jsonl");
    assert_eq!(regolith(store, &["replay", log.to_str().unwrap()]), live);

    regolith(store, &["export", "ws"]);
    let exports = store.join("ws").join("exports");
    assert!(exports.join("measurements.csv").exists());
    assert!(exports.join("decisions.csv").exists());
    let curves = exports.join("curves");
    assert_eq!(
        std::fs::read_dir(&curves)
            .unwrap()
            .filter(|e| e.as_ref().unwrap().path().extension().is_some_and(|x| x == "csv"))
            .count(),
        21
    );

    let analysis = regolith(store, &["analyze", curves.to_str().unwrap()]);
    assert_eq!(analysis.lines().count(), 22);
}
