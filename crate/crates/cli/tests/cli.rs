//! End-to-end tests of the binary: pipeline, exit codes, error prefixes,
//! figure output.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_revmeta");

const MEDLINE_FIXTURE: &str = concat!(
    env!("CARGO_MANIFEST_DIR"),
    "/../core/tests/fixtures/miniscrew_search.txt"
);

fn run(project: &Path, args: &[&str]) -> Output {
    Command::new(BIN)
        .arg("--project")
        .arg(project)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn assert_ok(out: &Output) {
    assert!(
        out.status.success(),
        "expected success, got {:?}\nstderr: {}",
        out.status.code(),
        stderr(out)
    );
}

fn assert_fails(out: &Output, code: i32, error_code: &str) {
    assert_eq!(out.status.code(), Some(code), "stderr: {}", stderr(out));
    let err = stderr(out);
    assert!(
        err.contains(&format!("error[{error_code}]")),
        "stderr missing error[{error_code}]: {err}"
    );
}

fn worked_project(dir: &Path) -> PathBuf {
    let project = dir.join("review.json");
    assert_ok(&run(
        &project,
        &["new", "Maxilla vs. Mandible for Miniscrew Stability"],
    ));
    assert_ok(&run(&project, &["add-study", "Wu 2009", "--year", "2009"]));
    assert_ok(&run(
        &project,
        &["add-study", "Miyawaki 2003", "--year", "2003"],
    ));
    assert_ok(&run(
        &project,
        &[
            "outcome",
            "--comparison",
            "Miniscrew Stability",
            "--name",
            "Miniscrew Stability",
            "--group1",
            "Maxilla",
            "--group2",
            "Mandible",
            "--left",
            "Higher Success (Mandible)",
            "--right",
            "Higher Success (Maxilla)",
            "--method",
            "mh",
            "--model",
            "fixed",
            "--measure",
            "or",
        ],
    ));
    let out = run(
        &project,
        &["set-data", "Wu 2009", "243", "268", "118", "135"],
    );
    assert_ok(&out);
    assert!(
        stdout(&out).contains("Wu 2009: 243/268 vs 118/135"),
        "{}",
        stdout(&out)
    );
    assert_ok(&run(
        &project,
        &["set-data", "Miyawaki 2003", "53", "63", "51", "61"],
    ));
    project
}

#[test]
fn full_pipeline_analyze_and_figures() {
    let dir = tempfile::tempdir().unwrap();
    let project = worked_project(dir.path());

    let out = run(&project, &["analyze"]);
    assert_ok(&out);
    let text = stdout(&out);
    assert!(text.contains("OR = 1.27"), "{text}");
    assert!(
        text.contains("Chi\u{b2}=0.25, df=1, p=0.61, I\u{b2}=0%"),
        "{text}"
    );
    assert!(text.contains("Wu 2009"));
    assert!(text.contains("64.03%"));

    // Method/model/measure/ci overrides.
    let out = run(&project, &["analyze", "--method", "iv", "--ci", "0.9"]);
    assert_ok(&out);
    assert!(stdout(&out).contains("CI: 90%"), "{}", stdout(&out));

    let figs = dir.path().join("figs");
    for figure in ["forest", "funnel", "prisma", "rob"] {
        let args: Vec<&str> = match figure {
            "prisma" => vec![
                "prisma",
                "--identified-db",
                "120",
                "--after-dedup",
                "100",
                "--excluded-screening",
                "80",
                "--exclude",
                "Case report=3",
                "--quantitative",
                "11",
            ],
            "rob" => vec![
                "rob",
                "--scheme",
                "nos6",
                "--judge",
                "Wu 2009|non-response|high",
                "--judge",
                "Miyawaki 2003|non-response|unclear|Not reported",
            ],
            other => vec![other],
        };
        let mut full = vec!["--out-dir", figs.to_str().unwrap()];
        full.extend(args);
        let out = run(&project, &full);
        assert_ok(&out);
        let path = figs.join(format!(
            "maxilla-vs-mandible-for-miniscrew-stability__{figure}.svg"
        ));
        assert!(path.exists(), "missing {}", path.display());
        let svg = std::fs::read_to_string(&path).unwrap();
        assert!(svg.starts_with("<?xml"), "not an SVG document");
        assert!(svg.contains("</svg>"));
    }

    // Re-running a figure overwrites the same file with identical bytes.
    let forest = figs.join("maxilla-vs-mandible-for-miniscrew-stability__forest.svg");
    let first = std::fs::read(&forest).unwrap();
    assert_ok(&run(
        &project,
        &["--out-dir", figs.to_str().unwrap(), "forest"],
    ));
    let second = std::fs::read(&forest).unwrap();
    assert_eq!(
        first, second,
        "forest output must be byte-identical across runs"
    );

    // Report summarises the analysis.
    let out = run(&project, &["report"]);
    assert_ok(&out);
    let text = stdout(&out);
    assert!(text.contains("Maxilla vs. Mandible"));
    assert!(text.contains("Pooled OR = 1.27"));
}

#[test]
fn funnel_trim_fill_reports_imputations() {
    let dir = tempfile::tempdir().unwrap();
    let project = worked_project(dir.path());
    let out = run(
        &project,
        &[
            "--out-dir",
            dir.path().to_str().unwrap(),
            "funnel",
            "--trim-fill",
        ],
    );
    assert_ok(&out);
    assert!(
        stdout(&out).contains("trim-and-fill: imputed"),
        "{}",
        stdout(&out)
    );
}

#[test]
fn import_refs_is_idempotent() {
    let dir = tempfile::tempdir().unwrap();
    let project = dir.path().join("review.json");
    assert_ok(&run(&project, &["new", "Import test"]));

    let out = run(&project, &["import-refs", MEDLINE_FIXTURE]);
    assert_ok(&out);
    assert!(
        stdout(&out).contains("references found: 17; added 17"),
        "{}",
        stdout(&out)
    );

    let out = run(&project, &["import-refs", MEDLINE_FIXTURE]);
    assert_ok(&out);
    assert!(stdout(&out).contains("added 0"), "{}", stdout(&out));
    assert_eq!(stderr(&out).matches("already present").count(), 17);
}

#[test]
fn exit_codes_and_error_prefixes() {
    let dir = tempfile::tempdir().unwrap();
    let project = dir.path().join("review.json");

    // Usage error: unknown subcommand.
    let out = run(&project, &["bogus"]);
    assert_fails(&out, 1, "usage");

    // I/O error: project does not exist yet.
    let out = run(&project, &["report"]);
    assert_fails(&out, 3, "io");

    assert_ok(&run(&project, &["new", "Exit codes"]));

    // Conflict: project exists.
    let out = run(&project, &["new", "Exit codes"]);
    assert_fails(&out, 2, "conflict");

    // Validation: empty-ish study year out of range.
    let out = run(&project, &["add-study", "X 1700", "--year", "1700"]);
    assert_fails(&out, 2, "validation");

    assert_ok(&run(&project, &["add-study", "A 2000", "--year", "2000"]));

    // Conflict: duplicate study.
    let out = run(&project, &["add-study", "A 2000", "--year", "2000"]);
    assert_fails(&out, 2, "conflict");

    // Not found: data for an unknown study.
    assert_ok(&run(&project, &["outcome"]));
    let out = run(&project, &["set-data", "Nobody 1999", "1", "2", "1", "2"]);
    assert_fails(&out, 2, "not-found");

    // No data: analyze with an empty outcome.
    let out = run(&project, &["analyze"]);
    assert_fails(&out, 2, "no-data");

    // Validation: Peto requires OR + fixed.
    assert_ok(&run(&project, &["set-data", "A 2000", "1", "2", "1", "2"]));
    let out = run(
        &project,
        &["analyze", "--method", "peto", "--model", "random"],
    );
    assert_fails(&out, 2, "validation");

    // Consistency: impossible flow counts.
    let out = run(
        &project,
        &[
            "prisma",
            "--identified-db",
            "10",
            "--after-dedup",
            "20",
            "--excluded-screening",
            "5",
            "--quantitative",
            "1",
        ],
    );
    assert_fails(&out, 2, "consistency");

    // Parse error: corrupted project file.
    std::fs::write(&project, "{ not json").unwrap();
    let out = run(&project, &["report"]);
    assert_fails(&out, 3, "parse");

    // Version error: wrong schema version.
    std::fs::write(&project, "{\"schema_version\": 99, \"review\": {}}").unwrap();
    let out = run(&project, &["report"]);
    assert_fails(&out, 3, "version");
}

#[test]
fn help_lists_every_subcommand() {
    let out = Command::new(BIN).arg("--help").output().unwrap();
    assert!(out.status.success());
    let text = stdout(&out);
    for sub in [
        "new",
        "add-study",
        "import-refs",
        "outcome",
        "set-data",
        "analyze",
        "forest",
        "funnel",
        "prisma",
        "rob",
        "report",
    ] {
        assert!(text.contains(sub), "--help missing `{sub}`:\n{text}");
    }
}

#[test]
fn out_dir_env_var_is_honoured() {
    let dir = tempfile::tempdir().unwrap();
    let project = worked_project(dir.path());
    let via_env = dir.path().join("env-figs");
    let out = Command::new(BIN)
        .arg("--project")
        .arg(&project)
        .arg("forest")
        .env("REVMETA_OUT_DIR", &via_env)
        .output()
        .unwrap();
    assert_ok(&out);
    assert!(via_env
        .join("maxilla-vs-mandible-for-miniscrew-stability__forest.svg")
        .exists());
}

#[test]
fn unknown_fields_warn_but_work() {
    let dir = tempfile::tempdir().unwrap();
    let project = worked_project(dir.path());
    let mut value: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&project).unwrap()).unwrap();
    value["review"]["from_the_future"] = serde_json::json!(42);
    std::fs::write(&project, value.to_string()).unwrap();
    let out = run(&project, &["report"]);
    assert_ok(&out);
    assert!(stderr(&out).contains("unknown field"), "{}", stderr(&out));
}
