use std::process::{Command, Output};

use sepscope::qstate::DensityMatrix;
use sepscope_cli::output::{data_section, recorded_digest, sha256_hex, Format};
use sepscope_cli::verify::{run_suite, Level};
use sepscope_cli::{EXIT_OK, EXIT_USAGE, EXIT_VERIFY};

fn sepscope(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sepscope"))
        .args(args)
        .env_remove("SEPSCOPE_WORKERS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// Rows of one CSV table as string cells, header excluded.
fn table(doc: &str, name: &str) -> Vec<Vec<String>> {
    let marker = format!("# table: {name}\n");
    let body = &doc[doc.find(&marker).unwrap() + marker.len()..];
    let body = &body[..body.find("\n\n").map_or(body.len(), |i| i + 1)];
    csv::Reader::from_reader(body.as_bytes())
        .records()
        .map(|r| r.unwrap().iter().map(str::to_owned).collect())
        .collect()
}

#[test]
fn bounds_table_matches_exact_values() {
    let o = sepscope(&["bounds"]);
    assert_eq!(o.status.code(), Some(EXIT_OK));
    let doc = stdout(&o);
    let rows = table(&doc, "bounds");
    for tag in ["dom", "int", "conjecture", "previous"] {
        let r = rows.iter().find(|r| r[0] == tag).unwrap();
        let diff: f64 = r[4].parse().unwrap();
        assert!(diff < 1e-8, "{tag} {diff}");
        assert_eq!(r[10], "ok");
    }
    let prev = rows.iter().find(|r| r[0] == "previous").unwrap();
    assert_eq!(prev[1], "8/17");
    assert_eq!(recorded_digest(&doc, Format::Csv), data_section(&doc, Format::Csv).map(|d| sha256_hex(&d)));
}

#[test]
fn unknown_curve_is_a_usage_error_listing_valid_tags() {
    let o = sepscope(&["curves", "--tags", "dom,nonsense"]);
    assert_eq!(o.status.code(), Some(EXIT_USAGE));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("nonsense") && err.contains("conjecture") && err.contains("jacobian"), "{err}");
    assert_eq!(sepscope(&["estimate", "--engine", "mystery"]).status.code(), Some(EXIT_USAGE));
    assert_eq!(sepscope(&["histogram", "--bins", "1"]).status.code(), Some(EXIT_USAGE));
}

#[test]
fn curve_grid_has_expected_shape() {
    let o = sepscope(&["curves", "--tags", "dom,int,jacobian", "--xi-min", "-3", "--xi-max", "3", "--points", "601"]);
    assert!(o.status.success());
    let rows = table(&stdout(&o), "curves");
    assert_eq!(rows.len(), 601);
    let v: Vec<[f64; 4]> = rows.iter().map(|r| std::array::from_fn(|k| r[k].parse().unwrap())).collect();
    for (k, r) in v.iter().enumerate() {
        assert!(r[2] <= r[1], "int above dom at {}", r[0]);
        let m = v[600 - k];
        assert!((r[3] - m[3]).abs() <= 1e-12 * r[3].abs().max(1e-300) && (r[0] + m[0]).abs() < 1e-12, "{r:?} {m:?}");
    }
}

#[test]
fn estimates_are_reproducible_and_reported() {
    let args = ["estimate", "--n", "200000", "--engine", "prng", "--seed", "5", "--format", "json"];
    let (a, b) = (sepscope(&args), sepscope(&args));
    let (da, db) = (stdout(&a), stdout(&b));
    assert_eq!(data_section(&da, Format::Json), data_section(&db, Format::Json));
    let v: serde_json::Value = serde_json::from_str(&da).unwrap();
    assert_eq!(v["manifest"]["sequence"]["seed"], 5);
    assert_eq!(v["manifest"]["subcommand"], "estimate");
    let row = &v["data"]["estimate"]["rows"][0];
    let mean = row[2].as_f64().unwrap();
    assert!((mean - 0.4528).abs() < 0.01);
    assert_eq!(row[9], "binomial");
    let abs = sepscope(&["estimate", "--n", "200000", "--event", "abs-sep"]);
    let m: f64 = table(&stdout(&abs), "estimate")[0][2].parse().unwrap();
    assert!((m - 0.0348).abs() < 0.005);
}

#[test]
fn workers_come_from_environment_and_do_not_change_data() {
    let args = ["histogram", "--n", "300000", "--bins", "21"];
    let a = sepscope(&args);
    let b = Command::new(env!("CARGO_BIN_EXE_sepscope"))
        .args(args)
        .env("SEPSCOPE_WORKERS", "3")
        .output()
        .unwrap();
    assert!(stdout(&b).contains("# workers: 3\n"));
    assert!(stdout(&a).contains("# workers: null\n"));
    assert_eq!(data_section(&stdout(&a), Format::Csv), data_section(&stdout(&b), Format::Csv));
}

#[test]
fn residual_mode_reproduces_inline_comparison() {
    let dir = tempfile::tempdir().unwrap();
    for (ext, fmt) in [("csv", "csv"), ("json", "json")] {
        let path = dir.path().join(format!("h.{ext}"));
        let p = path.to_str().unwrap();
        let h = sepscope(&["histogram", "--n", "400000", "--bins", "31", "--compare", "conjecture,previous", "--format", fmt, "--out", p]);
        assert!(h.status.success());
        assert!(h.stdout.is_empty());
        let r = sepscope(&["curves", "--residual", p, "--tags", "conjecture,previous"]);
        assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
        let inline = sepscope(&["histogram", "--n", "400000", "--bins", "31", "--compare", "conjecture,previous"]);
        for t in ["comparison", "residuals"] {
            assert_eq!(table(&stdout(&r), t), table(&stdout(&inline), t), "{ext} {t}");
        }
    }
}

#[test]
fn minor_command_reports_closed_form() {
    let o = sepscope(&["minor", "--minor", "pair:2,3", "--grid", "-0.5,0.5", "--n", "200000"]);
    assert!(o.status.success());
    let rows = table(&stdout(&o), "minor");
    assert_eq!(rows[0][8].parse::<f64>().unwrap(), 1.0);
    assert_eq!(rows[0][10], "two-right");
    assert_eq!(sepscope(&["minor", "--minor", "pair:3,1"]).status.code(), Some(EXIT_USAGE));
}

#[test]
fn quick_verification_passes() {
    let o = sepscope(&["verify"]);
    assert_eq!(o.status.code(), Some(EXIT_OK), "{}", stdout(&o));
    assert!(table(&stdout(&o), "checks").iter().all(|r| r[1] == "true"));
}

fn no_swap(rho: &DensityMatrix) -> DensityMatrix {
    *rho
}

#[test]
fn verification_catches_missing_swap() {
    let checks = run_suite(Level::Quick, 2, no_swap);
    let failed: Vec<&str> = checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
    for name in ["pt-oracle", "implication-chain", "mc-bounds"] {
        assert!(failed.contains(&name), "{name} passed with a broken transpose: {failed:?}");
    }
    let _ = EXIT_VERIFY;
}
