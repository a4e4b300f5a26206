use std::path::Path;
use std::process::{Command, Output};

fn padiclf(args: &[&str], cache: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_padiclf"))
        .args(args)
        .env("PADICLF_CACHE_DIR", cache)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const SMALL: &[&str] = &["--p", "5", "--levels", "3", "--terms", "20", "--coeffs", "3"];

fn compute(curve: &str, extra: &[&str], cache: &Path) -> Output {
    let mut args = vec!["compute", "--curve", curve];
    args.extend_from_slice(SMALL);
    args.extend_from_slice(extra);
    args.push("--format");
    args.push("json-like-canonical");
    padiclf(&args, cache)
}

#[test]
fn output_is_byte_identical_across_runs_and_cache_states() {
    let cache = tempfile::tempdir().unwrap();
    let cold = compute("11a1", &["--check", "additivity"], cache.path());
    assert_eq!(cold.status.code(), Some(0), "{}", stderr(&cold));
    assert!(stderr(&cold).contains("cache: miss"));
    assert!(stderr(&cold).contains("cache: stored"));

    let warm = compute("11a1", &["--check", "additivity"], cache.path());
    assert_eq!(warm.status.code(), Some(0));
    assert!(stderr(&warm).contains("cache: hit"));
    assert_eq!(cold.stdout, warm.stdout);

    let other = tempfile::tempdir().unwrap();
    let fresh = compute("11a1", &["--check", "additivity"], other.path());
    assert_eq!(fresh.stdout, cold.stdout);
}

#[test]
fn corrupt_cache_entries_are_rebuilt() {
    let cache = tempfile::tempdir().unwrap();
    let first = compute("11a1", &[], cache.path());
    assert_eq!(first.status.code(), Some(0));
    for entry in std::fs::read_dir(cache.path()).unwrap() {
        std::fs::write(entry.unwrap().path(), "garbage\n").unwrap();
    }
    let second = compute("11a1", &[], cache.path());
    assert_eq!(first.stdout, second.stdout, "{}", stderr(&second));
}

#[test]
fn prime_dividing_the_level_is_a_config_error() {
    let cache = tempfile::tempdir().unwrap();
    let out = padiclf(&["compute", "--curve", "11a1", "--p", "11"], cache.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("p divides N"), "{}", stderr(&out));

    let out = padiclf(&["compute", "--curve", "14a1", "--p", "7"], cache.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn malformed_input_is_a_config_error() {
    let cache = tempfile::tempdir().unwrap();
    for args in [
        vec!["compute", "--curve", "nope", "--p", "5"],
        vec!["compute", "--curve", "0,-1,1,-10,-20", "--p", "5"],
        vec!["compute", "--curve", "11a1", "--p", "4"],
        vec!["compute", "--curve", "11a1", "--p", "5", "--center", "17@3"],
        vec!["compute", "--level", "11", "--ap", "2:-2", "--p", "5"],
    ] {
        let out = padiclf(&args, cache.path());
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", stderr(&out));
    }
}

#[test]
fn too_few_terms_reports_exhausted_precision() {
    let cache = tempfile::tempdir().unwrap();
    let out = padiclf(
        &["compute", "--curve", "11a1", "--p", "5", "--levels", "3", "--terms", "6", "--coeffs", "12"],
        cache.path(),
    );
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
    assert!(stderr(&out).contains("lseries:"));
}

#[test]
fn eleven_a1_regression() {
    let cache = tempfile::tempdir().unwrap();
    let out = compute("11a1", &["--check", "all"], cache.path());
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("\"lambda_at_0\": \"2\""));
    assert!(text.contains("\"fricke_sign\": -1"));
    assert!(text.contains("\"ap\": 1"));
    assert!(text.contains("\"order\": 0"));
    assert!(text.contains("\"normalization\": \"10/1\""));
    assert!(text.contains("\"alpha_congruent_to_one\": true"));
}

#[test]
fn thirty_seven_a1_regression() {
    let cache = tempfile::tempdir().unwrap();
    let out = compute("37a1", &["--center", "1", "--center", "2", "--check", "fe"], cache.path());
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("\"ap\": -2"));
    assert!(text.contains("\"total_mass\": \"0\""));
    assert!(text.contains("\"epsilon\": -1"));
    let orders: Vec<&str> = text.lines().filter(|l| l.contains("\"order\"")).collect();
    assert_eq!(orders.len(), 2);
    assert!(orders[0].contains('1'), "{orders:?}");
    assert!(orders[1].contains('0'), "{orders:?}");
}

#[test]
fn eigenvalue_input_matches_named_curve() {
    let cache = tempfile::tempdir().unwrap();
    let named = padiclf(&["symbols", "--curve", "11a1"], cache.path());
    let by_ev = padiclf(&["symbols", "--level", "11", "--ap", "2=-2"], cache.path());
    assert_eq!(named.status.code(), Some(0));
    assert_eq!(by_ev.status.code(), Some(0));
    let pick = |o: &Output| {
        stdout(o).lines().filter(|l| l.starts_with("lambda_at_0") || l.starts_with("fricke")).map(String::from).collect::<Vec<_>>()
    };
    assert_eq!(pick(&named), pick(&by_ev));
}

#[test]
fn digit_centers_match_integer_centers() {
    let cache = tempfile::tempdir().unwrap();
    // 12 in base 5 is 2,2.
    let a = compute("11a1", &["--center", "22@5"], cache.path());
    let b = compute("11a1", &["--center", "12"], cache.path());
    assert_eq!(a.status.code(), Some(0), "{}", stderr(&a));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn measure_only_at_p_three() {
    let cache = tempfile::tempdir().unwrap();
    let out = padiclf(
        &["compute", "--curve", "11a1", "--p", "3", "--levels", "3", "--check", "additivity", "--check", "modp"],
        cache.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stdout(&out).contains("skipped"));
}

#[test]
fn import_round_trip_through_the_cli() {
    use padiclf::measure::{export_table, MeasureTable};
    use padiclf::modsym::{build_space, eigensymbol};
    use padiclf::padics::RootChoice;
    use std::collections::BTreeMap;

    let space = build_space(11).unwrap();
    let sym = eigensymbol(&space, &BTreeMap::from([(2u64, -2i64)]), 1).unwrap();
    let table = MeasureTable::build(&sym, 5, 1, RootChoice::Unit, 3).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("m.txt");
    std::fs::write(&file, export_table(&table)).unwrap();

    let out = padiclf(&["import", file.to_str().unwrap(), "--levels", "3", "--terms", "20", "--coeffs", "3"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stdout(&out).contains("order: 0"));

    let text = std::fs::read_to_string(&file).unwrap();
    let broken: String = text.lines().take(5).map(|l| format!("{l}\n")).collect();
    std::fs::write(&file, broken).unwrap();
    let out = padiclf(&["import", file.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("measure:"));
}

#[test]
fn psi_subcommand_inverts_exactly() {
    let cache = tempfile::tempdir().unwrap();
    let out = padiclf(&["psi", "--k-indices", "1,2,3", "--center", "1"], cache.path());
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("residual_is_identity: true"));
    let out = padiclf(&["psi", "--k-indices", "3,2"], cache.path());
    assert_eq!(out.status.code(), Some(2));
}
