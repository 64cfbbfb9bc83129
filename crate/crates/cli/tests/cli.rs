use std::path::Path;
use std::process::{Command, Output};

use loopb::models::StructConsts;
use loopb::verify::SuiteReport;

fn loopb(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_loopb")).args(args).env_remove("LOOPB_SEED").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn parse_complex(s: &str) -> (f64, f64) {
    let body = s.trim().strip_suffix('i').unwrap();
    let k = body.rfind(['+', '-']).unwrap();
    (body[..k].parse().unwrap(), body[k..].parse().unwrap())
}

#[test]
fn g3_in_the_degenerate_limit() {
    let o = loopb(&["elliptic", "eval", "--fn", "g3", "--tau", "1000i"]);
    assert_eq!(o.status.code(), Some(0));
    let (re, im) = parse_complex(&stdout(&o));
    // 8 pi^6 / 27
    assert!((re - 284.856057).abs() < 1e-6, "{re}");
    assert!(im.abs() < 1e-9);
}

#[test]
fn wp_has_a_double_pole_at_the_origin() {
    let wp = loopb(&["elliptic", "eval", "--fn", "wp", "--z", "0.01", "--tau", "i"]);
    let (re, _) = parse_complex(&stdout(&wp));
    assert!((re - 1e4).abs() < 1.0, "{re}");
}

#[test]
fn exit_codes() {
    assert_eq!(loopb(&["bogus"]).status.code(), Some(2));
    assert_eq!(loopb(&["verify", "identities", "--bogus"]).status.code(), Some(2));
    assert_eq!(loopb(&["elliptic", "eval", "--fn", "wp", "--tau", "i"]).status.code(), Some(2));
    assert_eq!(loopb(&["elliptic", "eval", "--fn", "wp", "--z", "0", "--tau", "i"]).status.code(), Some(2));
    assert_eq!(loopb(&["elliptic", "eval", "--fn", "g2", "--tau", "-i"]).status.code(), Some(2));
    assert_eq!(loopb(&["descend", "--n", "2", "--denominator", "z9"]).status.code(), Some(2));
    assert_eq!(loopb(&["verify", "cp2"]).status.code(), Some(0));
    let bad = loopb(&["verify", "poisson", "--n", "3", "--trials", "1", "--corrupt"]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(stdout(&bad).contains("FAIL closed-form tables match extraction"));
}

#[test]
fn identities_at_full_size() {
    let o = loopb(&["verify", "identities", "--trials", "100"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

#[test]
fn seed_is_printed_and_read_from_the_environment() {
    let o = Command::new(env!("CARGO_BIN_EXE_loopb"))
        .args(["verify", "thm2", "--trials", "1"])
        .env("LOOPB_SEED", "77")
        .output()
        .unwrap();
    assert!(stdout(&o).starts_with("seed: 77\n"));
    let o = loopb(&["--seed", "5", "verify", "thm2", "--trials", "1"]);
    assert!(stdout(&o).starts_with("seed: 5\n"));
}

fn read(p: &Path) -> String {
    std::fs::read_to_string(p).unwrap()
}

#[test]
fn reports_repeat_for_a_fixed_seed() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    for p in [&a, &b] {
        let o = loopb(&["verify", "identities", "--trials", "4", "--seed", "11", "--json", p.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0));
    }
    let (ra, rb) = (SuiteReport::from_json(&read(&a)).unwrap(), SuiteReport::from_json(&read(&b)).unwrap());
    assert_eq!(ra.seed, 11);
    assert_eq!(ra.without_timing().to_json().unwrap(), rb.without_timing().to_json().unwrap());
    let leftovers = std::fs::read_dir(dir.path()).unwrap().count();
    assert_eq!(leftovers, 2);
}

#[test]
fn extracted_and_closed_form_tables_coincide() {
    let dir = tempfile::tempdir().unwrap();
    for n in ["2", "3"] {
        let (a, b) = (dir.path().join("extract.json"), dir.path().join("appendix.json"));
        for (src, p) in [("extract", &a), ("appendix", &b)] {
            let o = loopb(&["table", "--n", n, "--source", src, "--out", p.to_str().unwrap()]);
            assert_eq!(o.status.code(), Some(0));
        }
        let normalize = |s: String| s.replace("\"generator\": \"thm3_extract\"", "\"generator\": \"appendix\"");
        let (ta, tb) = (read(&a), read(&b));
        assert_ne!(ta, tb);
        assert_eq!(normalize(ta.clone()), tb);
        let doc: serde_json::Value = serde_json::from_str(&ta).unwrap();
        assert_eq!(doc["lambda"], format!("1/{n}"));
        assert_eq!(doc["coeff_ring"], "Q[g1,g2,g3,T]");
        let parsed = StructConsts::from_json(&ta).unwrap();
        assert_eq!(parsed.to_json().unwrap() + "\n", ta);
    }
}

#[test]
fn descent_of_two_fields_is_a_cubic_bracket() {
    let o = loopb(&["descend", "--n", "2", "--denominator", "z2"]);
    assert_eq!(o.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(doc["fields"], serde_json::json!(["p0"]));
    let coeffs = &doc["entries"][0]["coeffs"];
    assert_eq!(coeffs[1], "-1/2*g2*p0 + 1/2*g3 + 2*p0^3");
}
