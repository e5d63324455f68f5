//! Acceptance: determinism of the `simulate` command (criterion 11 of the
//! suite; criteria 1-10 live in the core crate's acceptance tests).

use std::process::Command;

fn qnd() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_qnd"));
    cmd.env_remove("SOURCE_DATE_EPOCH");
    cmd
}

#[test]
fn c11_simulate_reports_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("session.json");
    std::fs::write(
        &config,
        r#"{
  "protocol": { "num_groups": 25 },
  "channel": { "alpha_db_per_km": 0.2, "length_km": 10.0 },
  "seed": 20260809
}
"#,
    )
    .unwrap();

    let mut bytes = Vec::new();
    for run in 0..2 {
        let out = dir.path().join(format!("run{run}"));
        let output = qnd()
            .args(["simulate", "--config"])
            .arg(&config)
            .arg("--out")
            .arg(&out)
            .output()
            .unwrap();
        assert!(
            output.status.success(),
            "stderr: {}",
            String::from_utf8_lossy(&output.stderr)
        );
        bytes.push((
            std::fs::read(out.join("report.json")).unwrap(),
            std::fs::read(out.join("groups.csv")).unwrap(),
        ));
    }
    let identical_json = bytes[0].0 == bytes[1].0;
    let identical_csv = bytes[0].1 == bytes[1].1;
    println!(
        "ACCEPTANCE C11 [{}] simulate twice with one config: report.json byte-identical = {identical_json}, groups.csv byte-identical = {identical_csv}",
        if identical_json && identical_csv { "PASS" } else { "FAIL" }
    );
    assert!(identical_json && identical_csv);
}
