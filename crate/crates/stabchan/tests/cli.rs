//! Golden-file tests for the command-line interface: fixed inputs under
//! `tests/fixtures/`, pinned expectations on the JSON reports, byte-exact
//! comparison of written artifacts against the library, and the exit-code
//! contract on malformed inputs.

use std::path::Path;
use std::process::Command;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use stabchan::json;
use stabchan::qmat::DensityMatrix;
use stabchan::stabilizer::{iterate, FamilyChannel, StabilizerTarget};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_stabchan")
}

fn fixture(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
        .to_str()
        .unwrap()
        .to_string()
}

struct CliResult {
    code: i32,
    report: Value,
    stderr: String,
}

fn run(args: &[&str]) -> CliResult {
    run_with_env(args, &[])
}

fn run_with_env(args: &[&str], env: &[(&str, &str)]) -> CliResult {
    let mut cmd = Command::new(bin());
    cmd.args(args);
    for (k, v) in env {
        cmd.env(k, v);
    }
    let output = cmd.output().expect("binary runs");
    let report = serde_json::from_slice(&output.stdout).unwrap_or(Value::Null);
    CliResult {
        code: output.status.code().expect("exit code"),
        report,
        stderr: String::from_utf8_lossy(&output.stderr).into_owned(),
    }
}

fn tmpdir() -> tempfile::TempDir {
    tempfile::tempdir().expect("temp dir")
}

fn path_str(dir: &tempfile::TempDir, name: &str) -> String {
    dir.path().join(name).to_str().unwrap().to_string()
}

fn f(v: &Value) -> f64 {
    v.as_f64().expect("number")
}

#[test]
fn gibbs_golden() {
    let dir = tmpdir();
    let out = path_str(&dir, "state.json");
    let r = run(&[
        "gibbs",
        "--hamiltonian",
        &fixture("h01.json"),
        "--beta",
        "1.0986122886681098",
        "--out",
        &out,
    ]);
    assert_eq!(r.code, 0, "stderr: {}", r.stderr);
    assert_eq!(r.report["schema"], "stabchan/1");
    let data = &r.report["state"]["data"];
    assert!((f(&data[0][0]) - 0.75).abs() <= 1e-12);
    assert!((f(&data[3][0]) - 0.25).abs() <= 1e-12);

    // The written file re-parses as a valid state equal to the report.
    let written = std::fs::read_to_string(&out).unwrap();
    let state = json::parse_density(&written).unwrap();
    assert!((state.get(0, 0).re - f(&data[0][0])).abs() == 0.0);

    // β = 0 gives the maximally mixed state exactly.
    let r = run(&["gibbs", "--hamiltonian", &fixture("h01.json"), "--beta", "0"]);
    assert_eq!(r.code, 0);
    assert_eq!(f(&r.report["state"]["data"][0][0]), 0.5);
}

#[test]
fn gibbs_rejects_bad_inputs() {
    let r = run(&["gibbs", "--hamiltonian", &fixture("taus3.json"), "--beta", "1"]);
    assert_eq!(r.code, 2);
    assert!(r.report["error"].is_string());

    let r = run(&["gibbs", "--hamiltonian", &fixture("h01.json"), "--beta", "-1"]);
    assert_eq!(r.code, 2);

    let r = run(&["gibbs", "--hamiltonian", &fixture("h01.json"), "--beta", "inf"]);
    assert_eq!(r.code, 2);

    let r = run(&["gibbs", "--hamiltonian", "/nonexistent/h.json", "--beta", "1"]);
    assert_eq!(r.code, 2);
}

#[test]
fn min_channel_golden() {
    let dir = tmpdir();
    let out = path_str(&dir, "z.json");
    let r = run(&["min-channel", "--sigma", &fixture("sigma_a.json"), "--out", &out]);
    assert_eq!(r.code, 0);
    assert!((f(&r.report["trace"]) - 4.0 / 3.0).abs() <= 1e-15);
    assert!((f(&r.report["lambda_max"]) - 0.75).abs() <= 1e-15);
    assert_eq!(r.report["degenerate"], false);

    // Choi entries: diag(1, 0, 1/3, 0).
    let c = json::parse_channel(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert!((c.matrix().get(0, 0).re - 1.0).abs() <= 1e-15);
    assert!((c.matrix().get(2, 2).re - 1.0 / 3.0).abs() <= 1e-15);

    // Pure target: trace 1.
    let r = run(&["min-channel", "--sigma", &fixture("pure.json")]);
    assert_eq!(r.code, 0);
    assert!((f(&r.report["trace"]) - 1.0).abs() <= 1e-15);

    // Degenerate target: flagged, trace 2.
    let r = run(&["min-channel", "--sigma", &fixture("b_half.json")]);
    assert_eq!(r.code, 0);
    assert_eq!(r.report["degenerate"], true);
    assert!((f(&r.report["trace"]) - 2.0).abs() <= 1e-15);

    // A non-state input (trace 1.2) is rejected.
    let r = run(&["min-channel", "--sigma", &fixture("not_a_state.json")]);
    assert_eq!(r.code, 2);
}

#[test]
fn tp_channel_golden() {
    let r = run(&[
        "tp-channel",
        "--sigma",
        &fixture("sigma_a.json"),
        "--completion",
        &fixture("b_half.json"),
    ]);
    assert_eq!(r.code, 0);
    assert_eq!(r.report["tp"], true);
    assert_eq!(r.report["cp"], true);
    assert!((f(&r.report["overlap_q"]) - 2.0 / 3.0).abs() <= 1e-15);
    // Sector matrix diag(5/8, 1/8): minimum eigenvalue 1/8.
    assert!((f(&r.report["min_eigenvalue"]) - 0.125).abs() <= 1e-12);

    // The d = 3 CP-gap fixture.
    let r = run(&[
        "tp-channel",
        "--sigma",
        &fixture("sigma_532.json"),
        "--completion",
        &fixture("b_e1_d3.json"),
    ]);
    assert_eq!(r.code, 0);
    assert_eq!(r.report["tp"], true);
    assert_eq!(r.report["cp"], false);
    assert!((f(&r.report["min_eigenvalue"]) - (-0.2)).abs() <= 1e-9);
    assert!((f(&r.report["choi_min_eigenvalue"]) - (-0.4)).abs() <= 1e-9);

    // Overlap above λ_max violates the family's validity condition.
    let r = run(&[
        "tp-channel",
        "--sigma",
        &fixture("sigma_a.json"),
        "--completion",
        &fixture("b_peak.json"),
    ]);
    assert_eq!(r.code, 2);
    assert!(r.report["error"].as_str().unwrap().contains("0.9"));
}

#[test]
fn apply_golden() {
    let dir = tmpdir();
    let z = path_str(&dir, "z.json");
    run(&["min-channel", "--sigma", &fixture("sigma_a.json"), "--out", &z]);

    let r = run(&["apply", "--channel", &z, "--rho", &fixture("b_half.json")]);
    assert_eq!(r.code, 0);
    // Z_σ(I/2) = diag(1/2, 1/6): trace 2/3, not preserved.
    assert!((f(&r.report["trace_after"]) - 2.0 / 3.0).abs() <= 1e-12);
    let data = &r.report["state"]["data"];
    assert!((f(&data[0][0]) - 0.5).abs() <= 1e-12);
    assert!((f(&data[3][0]) - 1.0 / 6.0).abs() <= 1e-12);

    // Orthogonal input maps to zero.
    let r = run(&["apply", "--channel", &z, "--rho", &fixture("rho_e1.json")]);
    assert_eq!(r.code, 0);
    assert!(f(&r.report["trace_after"]).abs() <= 1e-12);

    // Dimension mismatch is invalid input.
    let r = run(&["apply", "--channel", &z, "--rho", &fixture("sigma_532.json")]);
    assert_eq!(r.code, 2);
}

#[test]
fn iterate_golden_and_csv_is_bit_exact() {
    let dir = tmpdir();
    let csv_path = path_str(&dir, "trace.csv");
    let json_path = path_str(&dir, "trace.json");
    let r = run(&[
        "iterate",
        "--sigma",
        &fixture("sigma_a.json"),
        "--completion",
        &fixture("b_half.json"),
        "--rho0",
        &fixture("rho_e1.json"),
        "--steps",
        "20",
        "--trace-out",
        &csv_path,
        "--json-out",
        &json_path,
    ]);
    assert_eq!(r.code, 0);
    assert_eq!(r.report["stagnant"], false);
    assert!(f(&r.report["final_dist"]) <= 1e-8);
    assert!((f(&r.report["q"]) - 2.0 / 3.0).abs() <= 1e-15);

    // Row n=2 carries distance 1/12.
    let csv = std::fs::read_to_string(&csv_path).unwrap();
    let lines: Vec<&str> = csv.trim_end().lines().collect();
    assert_eq!(lines[0], "n,p_n,weight_B,dist_to_sigma");
    assert_eq!(lines.len(), 22);
    let row2: Vec<&str> = lines[3].split(',').collect();
    assert_eq!(row2[0], "2");
    let dist2: f64 = row2[3].parse().unwrap();
    assert!((dist2 - 1.0 / 12.0).abs() <= 1e-12);

    // Byte-for-byte agreement with the library-level trace.
    let sigma = json::parse_density(&std::fs::read_to_string(fixture("sigma_a.json")).unwrap())
        .unwrap();
    let b = json::parse_density(&std::fs::read_to_string(fixture("b_half.json")).unwrap())
        .unwrap();
    let rho0 = json::parse_density(&std::fs::read_to_string(fixture("rho_e1.json")).unwrap())
        .unwrap();
    let fam = FamilyChannel::new(StabilizerTarget::new(sigma).unwrap(), b).unwrap();
    let trace = iterate(&fam, &rho0, 20, None).unwrap();
    assert_eq!(csv, trace.to_csv());

    // The JSON trace parses and matches the CSV row count.
    let parsed: json::TraceJson =
        serde_json::from_str(&std::fs::read_to_string(&json_path).unwrap()).unwrap();
    assert_eq!(parsed.steps.len(), 21);
    assert!(!parsed.stagnant);
}

#[test]
fn iterate_reports_fixed_point_and_stagnation() {
    let dir = tmpdir();
    let csv_path = path_str(&dir, "t.csv");

    // Starting at the target: the distance column is identically zero.
    let r = run(&[
        "iterate",
        "--sigma",
        &fixture("sigma_a.json"),
        "--completion",
        &fixture("b_half.json"),
        "--rho0",
        &fixture("sigma_a.json"),
        "--steps",
        "5",
        "--trace-out",
        &csv_path,
    ]);
    assert_eq!(r.code, 0);
    let csv = std::fs::read_to_string(&csv_path).unwrap();
    for line in csv.trim_end().lines().skip(1) {
        let dist: f64 = line.split(',').nth(3).unwrap().parse().unwrap();
        assert_eq!(dist, 0.0);
    }

    // q = 0: stagnant, but still exit 0 (informational).
    let r = run(&[
        "iterate",
        "--sigma",
        &fixture("sigma_a.json"),
        "--completion",
        &fixture("rho_e1.json"),
        "--rho0",
        &fixture("b_half.json"),
        "--steps",
        "60",
    ]);
    assert_eq!(r.code, 0);
    assert_eq!(r.report["stagnant"], true);
    assert_eq!(f(&r.report["q"]), 0.0);
}

#[test]
fn iterate_with_free_evolution() {
    let r = run(&[
        "iterate",
        "--sigma",
        &fixture("sigma_a.json"),
        "--completion",
        &fixture("b_half.json"),
        "--rho0",
        &fixture("rho_e1.json"),
        "--steps",
        "3",
        "--hy",
        &fixture("h01.json"),
        "--taus",
        &fixture("taus3.json"),
    ]);
    assert_eq!(r.code, 0, "stderr: {}", r.stderr);

    // Mismatched schedule length is invalid input.
    let r = run(&[
        "iterate",
        "--sigma",
        &fixture("sigma_a.json"),
        "--completion",
        &fixture("b_half.json"),
        "--rho0",
        &fixture("rho_e1.json"),
        "--steps",
        "5",
        "--hy",
        &fixture("h01.json"),
        "--taus",
        &fixture("taus3.json"),
    ]);
    assert_eq!(r.code, 2);
}

#[test]
fn verify_sdp_golden() {
    let r = run(&["verify-sdp", "--sigma", &fixture("sigma_a.json")]);
    assert_eq!(r.code, 0);
    assert!((f(&r.report["primal_trace"]) - 4.0 / 3.0).abs() <= 1e-12);
    assert!((f(&r.report["dual_value"]) - 4.0 / 3.0).abs() <= 1e-12);
    assert!(f(&r.report["gap"]) <= 1e-10);
    assert_eq!(r.report["certified"], true);
    assert!(r.report["oracle"].is_null());

    // Rank-deficient pure state: value 1.
    let r = run(&["verify-sdp", "--sigma", &fixture("pure.json")]);
    assert_eq!(r.code, 0);
    assert!((f(&r.report["primal_trace"]) - 1.0).abs() <= 1e-12);

    // Oracle cross-check at d = 3: 1/λ_max = 3.
    let r = run(&[
        "verify-sdp",
        "--sigma",
        &fixture("third.json"),
        "--oracle",
        "--budget",
        "3000",
    ]);
    assert_eq!(r.code, 0);
    let oracle = f(&r.report["oracle"]);
    assert!((oracle - 3.0).abs() <= 1e-3, "oracle {oracle}");
    assert_eq!(f(&r.report["seed"]), 42.0);

    // Determinism: identical seeds, identical oracle value.
    let again = run(&[
        "verify-sdp",
        "--sigma",
        &fixture("third.json"),
        "--oracle",
        "--budget",
        "3000",
    ]);
    assert_eq!(f(&again.report["oracle"]), oracle);
}

#[test]
fn verify_channel_golden() {
    let dir = tmpdir();
    let z = path_str(&dir, "z.json");
    let c = path_str(&dir, "c.json");
    run(&["min-channel", "--sigma", &fixture("sigma_a.json"), "--out", &z]);
    run(&[
        "tp-channel",
        "--sigma",
        &fixture("sigma_a.json"),
        "--completion",
        &fixture("b_half.json"),
        "--out",
        &c,
    ]);

    // The completion channel passes all checks and is recognized in-family.
    let r = run(&["verify-channel", "--channel", &c, "--sigma", &fixture("sigma_a.json")]);
    assert_eq!(r.code, 0);
    assert_eq!(r.report["pass"], true);
    assert_eq!(r.report["stabilizes"], true);
    assert_eq!(r.report["membership"]["in_family"], true);
    let b = &r.report["membership"]["completion"]["data"];
    assert!((f(&b[0][0]) - 0.5).abs() <= 1e-9);

    // The minimal channel fails trace preservation: exit 1, defect 1.
    let r = run(&["verify-channel", "--channel", &z]);
    assert_eq!(r.code, 1);
    assert_eq!(r.report["pass"], false);
    assert!((f(&r.report["tp"]["defect"]) - 1.0).abs() <= 1e-12);
    // It still stabilizes σ though.
    let r = run(&["verify-channel", "--channel", &z, "--sigma", &fixture("sigma_a.json")]);
    assert_eq!(r.code, 1);
    assert_eq!(r.report["stabilizes"], true);
    assert_eq!(r.report["membership"]["in_family"], false);
}

#[test]
fn stabchan_tol_env_override() {
    let dir = tmpdir();
    let c = path_str(&dir, "c.json");
    run(&[
        "tp-channel",
        "--sigma",
        &fixture("sigma_a.json"),
        "--completion",
        &fixture("b_half.json"),
        "--out",
        &c,
    ]);

    // Perturb one diagonal Choi entry by 1e-6: breaks TP at 1e-9 but not
    // at 1e-3.
    let mut channel: Value = serde_json::from_str(&std::fs::read_to_string(&c).unwrap()).unwrap();
    let entry = f(&channel["choi"]["data"][0][0]) + 1e-6;
    channel["choi"]["data"][0][0] = serde_json::json!(entry);
    let perturbed = path_str(&dir, "perturbed.json");
    std::fs::write(&perturbed, serde_json::to_string(&channel).unwrap()).unwrap();

    let strict = run(&["verify-channel", "--channel", &perturbed]);
    assert_eq!(strict.code, 1);
    let loose = run_with_env(&["verify-channel", "--channel", &perturbed], &[("STABCHAN_TOL", "1e-3")]);
    assert_eq!(loose.code, 0, "stderr: {}", loose.stderr);

    // A malformed override is invalid input.
    let bad = run_with_env(&["verify-channel", "--channel", &perturbed], &[("STABCHAN_TOL", "abc")]);
    assert_eq!(bad.code, 2);
}

#[test]
fn collision_golden() {
    let dir = tmpdir();
    let out = path_str(&dir, "collision.json");

    // SWAP against the thermal bath: replacement channel, in family.
    let r = run(&[
        "collision",
        "--spec",
        &fixture("swap_collision.json"),
        "--hy",
        &fixture("h01.json"),
        "--beta",
        "1.0986122886681098",
        "--out",
        &out,
    ]);
    assert_eq!(r.code, 0, "stderr: {}", r.stderr);
    assert_eq!(r.report["tp"], true);
    assert_eq!(r.report["fixed_point"]["unique"], true);
    assert_eq!(r.report["thermal"]["fixed_point_match"], true);
    assert_eq!(r.report["thermal"]["in_family"], true);
    let b = &r.report["thermal"]["completion"]["data"];
    assert!((f(&b[0][0]) - 0.75).abs() <= 1e-9);
    // The written Choi is kron(ρ_X, I).
    let choi = json::parse_channel(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert!((choi.matrix().get(0, 0).re - 0.75).abs() <= 1e-12);
    assert!((choi.matrix().get(1, 1).re - 0.75).abs() <= 1e-12);
    assert!((choi.matrix().get(2, 2).re - 0.25).abs() <= 1e-12);

    // Quarter partial swap: thermal fixed point, outside the family.
    let r = run(&[
        "collision",
        "--spec",
        &fixture("pswap_collision.json"),
        "--hy",
        &fixture("h01.json"),
        "--beta",
        "1.0986122886681098",
    ]);
    assert_eq!(r.code, 0);
    assert_eq!(r.report["thermal"]["fixed_point_match"], true);
    assert_eq!(r.report["thermal"]["in_family"], false);

    // Identity interaction: the fixed space is everything; still exit 0.
    let r = run(&["collision", "--spec", &fixture("identity_collision.json")]);
    assert_eq!(r.code, 0);
    assert_eq!(r.report["fixed_point"]["unique"], false);
    assert_eq!(f(&r.report["fixed_point"]["space_dim"]), 4.0);

    // A non-unitary interaction is invalid input.
    let r = run(&["collision", "--spec", &fixture("bad_collision.json")]);
    assert_eq!(r.code, 2);
    assert!(r.report["error"].as_str().unwrap().contains("unitary"));
}

#[test]
fn written_matrices_reparse_exactly() {
    let dir = tmpdir();
    let out = path_str(&dir, "g.json");
    run(&[
        "gibbs",
        "--hamiltonian",
        &fixture("h01.json"),
        "--beta",
        "0.7354",
        "--out",
        &out,
    ]);
    let text = std::fs::read_to_string(&out).unwrap();
    let once = json::parse_matrix(&text).unwrap();
    let twice = json::parse_matrix(&json::matrix_to_string(&once)).unwrap();
    assert_eq!(once.entries(), twice.entries());
}

#[test]
fn malformed_inputs_always_exit_2() {
    let dir = tmpdir();
    let junk_file = |name: &str, contents: &str| -> String {
        let p = dir.path().join(name);
        std::fs::write(&p, contents).unwrap();
        p.to_str().unwrap().to_string()
    };

    let mut cases: Vec<String> = vec![
        junk_file("a.json", "{not json"),
        junk_file("b.json", "[]"),
        junk_file("c.json", r#"{"rows": 2}"#),
        junk_file("d.json", r#"{"rows": 2, "cols": 2, "data": [[1.0, 0.0]]}"#),
        junk_file("e.json", ""),
        junk_file("f.json", r#"{"rows": 0, "cols": 0, "data": []}"#),
    ];
    // Deterministic junk strings.
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for i in 0..10 {
        let len = 1 + (rng.random::<u32>() % 40) as usize;
        let junk: String = (0..len)
            .map(|_| (32 + (rng.random::<u32>() % 90) as u8) as char)
            .collect();
        cases.push(junk_file(&format!("junk{i}.json"), &junk));
    }

    for path in &cases {
        for subcommand in [
            vec!["gibbs", "--hamiltonian", path, "--beta", "1"],
            vec!["min-channel", "--sigma", path],
            vec!["verify-sdp", "--sigma", path],
            vec!["collision", "--spec", path],
        ] {
            let r = run(&subcommand);
            assert_eq!(
                r.code, 2,
                "expected exit 2 for {subcommand:?} on {path}, got {}",
                r.code
            );
        }
    }
}

#[test]
fn density_fixture_helpers_agree_with_cli() {
    // Guard against fixture drift: the fixtures themselves satisfy the
    // invariants the CLI relies on.
    for name in ["sigma_a.json", "b_half.json", "rho_e1.json", "pure.json", "sigma_532.json"] {
        let text = std::fs::read_to_string(fixture(name)).unwrap();
        let state: DensityMatrix = json::parse_density(&text).unwrap();
        assert!((state.trace_real() - 1.0).abs() <= 1e-12, "{name}");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let random = DensityMatrix::random(3, &mut rng);
    let text = json::matrix_to_string(random.as_matrix());
    let back = json::parse_density(&text).unwrap();
    assert_eq!(back.entries(), random.entries());
}
