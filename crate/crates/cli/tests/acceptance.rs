//! Acceptance criteria, one line each. Run with `cargo test --test acceptance`.

use std::f64::consts::PI;
use std::process::Command as Process;
use std::time::Instant;

use sepscope::estimator::estimate_sep_probability;
use sepscope::sampling::{Engine, SequenceSpec};
use sepscope_cli::commands::{run, Report};
use sepscope_cli::output::{data_section, recorded_digest, sha256_hex, Cell, Format};
use sepscope_cli::verify::{self, library_partial_transpose as pt, Check};
use sepscope_cli::Command;

const SEED: u64 = 1;

fn prng() -> SequenceSpec {
    SequenceSpec::state(Engine::PseudoRandom, SEED, false)
}

fn lds() -> SequenceSpec {
    SequenceSpec::state(Engine::LowDiscrepancy, SEED, true)
}

fn all(checks: Vec<Check>) -> (bool, String) {
    let ok = checks.iter().all(|c| c.passed);
    let detail = checks.iter().map(|c| format!("{} {}: {}", if c.passed { "ok" } else { "FAILED" }, c.name, c.detail)).collect::<Vec<_>>().join(" | ");
    (ok, detail)
}

fn float(c: &Cell) -> Option<f64> {
    match c {
        Cell::Float(v) => Some(*v),
        _ => None,
    }
}

fn criterion_1() -> (bool, String) {
    all(vec![verify::jacobian_normalization(1e-11)])
}

fn criterion_2() -> (bool, String) {
    let report: Report = match run(&Command::Bounds { tol: 1e-11 }) {
        Ok(r) => r,
        Err(e) => return (false, e.to_string()),
    };
    let t = &report.tables[0];
    let col = |name: &str| t.column(name).expect("bounds column");
    let row = |tag: &str| t.rows.iter().find(|r| r[0] == Cell::from(tag)).expect("bounds row");
    let mut ok = true;
    let mut notes = Vec::new();
    let pi2 = PI * PI;
    for (tag, exact, half, tol) in [
        ("dom", 1024.0 / (135.0 * pi2), Some(512.0 / (135.0 * pi2)), 1e-8),
        ("int", 22.0 / 35.0, Some(11.0 / 35.0), 1e-8),
        ("conjecture", 29.0 / 64.0, Some(29.0 / 128.0), 1e-8),
        ("previous", 8.0 / 17.0, None, 1e-8),
        ("product-int", 0.576219, None, 1e-5),
    ] {
        let r = row(tag);
        let q = float(&r[col("quadrature")]).unwrap_or(f64::NAN);
        let d = (q - exact).abs();
        ok &= d < tol;
        notes.push(format!("{tag} |diff| {d:.1e}"));
        if let Some(h) = half {
            let t2 = float(&r[col("twofold")]).unwrap_or(f64::NAN);
            ok &= (t2 - h).abs() < 1e-8;
            notes.push(format!("twofold {:.1e}", (t2 - h).abs()));
        }
    }
    (ok && report.status == sepscope_cli::commands::Status::Ok, notes.join(", "))
}

fn criterion_3() -> (bool, String) {
    all(vec![verify::complex_speculation(1e-7)])
}

fn criterion_4() -> (bool, String) {
    let mut ok = true;
    let mut notes = Vec::new();
    for spec in [prng(), lds()] {
        match estimate_sep_probability(&spec, 10_000_000) {
            Ok(r) => {
                ok &= r.mean > 0.4455 && r.mean < 0.4605;
                notes.push(format!("{} {:.6} +/- {:.6}", spec.engine(), r.mean, r.stderr));
            }
            Err(e) => {
                ok = false;
                notes.push(e.to_string());
            }
        }
    }
    (ok, format!("{} (window 0.4455..0.4605)", notes.join(", ")))
}

fn criterion_5() -> (bool, String) {
    all(vec![verify::abs_separability(&prng(), 10_000_000)])
}

fn criterion_6() -> (bool, String) {
    all(vec![verify::desf_intercept(&lds(), 100_000_000, verify::INTERCEPT_BINS, 4.0)])
}

fn criterion_7() -> (bool, String) {
    all(vec![verify::minor_suite(&prng(), 10_000_000, &[-1.0, -0.5, 0.0, 0.5, 1.0], 3.0)])
}

fn criterion_8() -> (bool, String) {
    let states = verify::hs_states(SEED, 1_000_000);
    all(vec![
        verify::pt_involution(&states, pt),
        verify::implication_chain(&states, pt),
        verify::xi_sufficiency(SEED, 10_000, pt),
        verify::curve_ordering(4001),
        verify::det_sign_matches_psd(&states, pt),
        verify::xi_histogram(&prng(), 10_000_000, 41, 3.0, 4.0),
    ])
}

fn criterion_9() -> (bool, String) {
    let bin = env!("CARGO_BIN_EXE_sepscope");
    let runs: [(&[&str], Format); 3] = [
        (&["estimate", "--n", "2000000", "--engine", "lds"], Format::Csv),
        (&["histogram", "--n", "2000000", "--engine", "prng", "--bins", "51"], Format::Csv),
        (&["minor", "--n", "1000000", "--minor", "delete:2", "--format", "json"], Format::Json),
    ];
    let mut notes = Vec::new();
    let mut ok = true;
    for (args, format) in runs {
        let mut sections = Vec::new();
        let mut digests_ok = true;
        for workers in ["1", "2", "8"] {
            let out = Process::new(bin).args(args).args(["--workers", workers]).output().expect("binary runs");
            let doc = String::from_utf8(out.stdout).expect("utf-8 output");
            let data = data_section(&doc, format).unwrap_or_default();
            digests_ok &= out.status.success() && recorded_digest(&doc, format) == Some(sha256_hex(&data));
            sections.push(data);
        }
        let same = sections.windows(2).all(|w| w[0] == w[1]) && !sections[0].is_empty();
        ok &= same && digests_ok;
        notes.push(format!(
            "{} {}{}",
            args[0],
            if same { "identical" } else { "DIFFERENT" },
            if digests_ok { "" } else { ", digest mismatch" }
        ));
    }
    (ok, format!("workers 1/2/8: {}", notes.join(", ")))
}

type Criterion = (&'static str, fn() -> (bool, String));

fn main() {
    let criteria: [Criterion; 9] = [
        ("jacobian normalization", criterion_1),
        ("exact bound table", criterion_2),
        ("beta = 2 speculation", criterion_3),
        ("separability probability", criterion_4),
        ("absolute separability", criterion_5),
        ("separability function intercept", criterion_6),
        ("minor-conditional curves", criterion_7),
        ("property suites", criterion_8),
        ("determinism across workers", criterion_9),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        let id = (k + 1).to_string();
        if !filter.is_empty() && !filter.contains(&id) {
            continue;
        }
        let t = Instant::now();
        let (ok, detail) = f();
        failed += usize::from(!ok);
        println!(
            "criterion {id} ({name}): {} [{:.1} s] {detail}",
            if ok { "PASS" } else { "FAIL" },
            t.elapsed().as_secs_f64()
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
