use std::path::Path;
use std::process::{Command, Output};

fn sofic(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sofic")).args(args).output().expect("run sofic")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn config_path(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name).to_string_lossy().into_owned()
}

#[test]
fn norm_tables() {
    let o = sofic(&["norm", "S5", "hamming"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let values: Vec<&str> = text.lines().skip(2).take(7).map(|l| l.split_whitespace().last().unwrap()).collect();
    let mut sorted = values.clone();
    sorted.sort_unstable();
    assert_eq!(sorted, vec!["0", "1", "1", "2/5", "3/5", "4/5", "4/5"]);
    assert!(text.contains("axioms: all pass"));

    let text = stdout(&sofic(&["norm", "S5", "graph", "--classes", "C2"]));
    let row = |label: &str| text.lines().find(|l| l.starts_with(&format!("{label} "))).unwrap().split_whitespace().last().unwrap().to_string();
    let dists: Vec<String> = ["C1", "C2", "C3", "C4", "C5", "C2,2", "C2,3"].iter().map(|l| row(l)).collect();
    assert_eq!(dists, vec!["0", "1", "2", "3", "4", "2", "3"]);

    let text = stdout(&sofic(&["norm", "S1", "hamming"]));
    assert_eq!(text.lines().nth(2).unwrap().split_whitespace().last(), Some("0"));
    assert!(text.lines().nth(3).unwrap().starts_with("property 1"));

    let text = stdout(&sofic(&["norm", "S4", "graph", "--classes", "C2", "--scale", "1/4"]));
    assert!(text.contains("1/4 * graph {C2}"));
    assert_eq!(sofic(&["norm", "S5", "taxicab"]).status.code(), Some(1));
    assert_eq!(sofic(&["norm", "Nope", "hamming"]).status.code(), Some(1));
}

#[test]
fn conjgraph_output() {
    let text = stdout(&sofic(&["conjgraph", "S5", "C2"]));
    assert!(text.lines().any(|l| l == "C1 -- C2"));
    let dot = stdout(&sofic(&["conjgraph", "S5", "C2", "--dot"]));
    assert_eq!(dot.lines().filter(|l| l.starts_with("  \"") && !l.contains("--")).count(), 7);
    assert_eq!(dot.matches(" -- ").count(), text.lines().count());
    let empty = sofic(&["conjgraph", "S5"]);
    assert_eq!((empty.status.code(), stdout(&empty)), (Some(0), String::new()));
    assert_eq!(sofic(&["conjgraph", "S5", "C7"]).status.code(), Some(1));
}

#[test]
fn almost_hom_commands() {
    let text = stdout(&sofic(&["ahom-check", "S3", "--corrupt", "(1 2)=(1 3)", "--eps", "3/2", "--alpha", "1/3"]));
    assert!(text.contains("defect: 1\n"));
    assert!(text.contains("): almost-homomorphism"));
    let text = stdout(&sofic(&["ahom-check", "S5", "--eps", "3/10", "--alpha", "7/10"]));
    assert!(text.contains("margin: 2/5") && text.contains("not an almost-homomorphism"));
    assert_eq!(sofic(&["ahom-check", "S3", "--eps", "1/2", "--alpha", "1/2", "--alpha", "1/3"]).status.code(), Some(1));

    let text = stdout(&sofic(&["amplify", "S3", "--target", "9/10"]));
    assert!(text.contains("t = 2: degree 81, defect 0, margin 80/81"));
    let capped = stdout(&sofic(&["amplify", "S3", "--target", "99999/100000", "--degree-cap", "100"]));
    assert!(capped.contains("degree cap"));
    assert_eq!(sofic(&["amplify", "Q8", "--target", "1/2"]).status.code(), Some(1));
}

#[test]
fn separate_and_stabilize() {
    let args = ["separate", "S3", "--images", "(1 2)", "(1 2 3)", "--radius", "2", "--eps", "1/10", "--delta", "1/2", "--via-ahom"];
    let o = sofic(&args);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("words checked: 17"));
    assert!(text.contains("re-verification: ok"));
    assert!(!text.contains("violation"));
    let bad = stdout(&sofic(&["separate", "S3", "--images", "(1 2)", "(1 2 3)", "--radius", "3", "--eps", "1/10", "--delta", "7/10"]));
    assert!(bad.contains("violation") && bad.contains("not separated"));

    let text = stdout(&sofic(&["stabilize", "S5", "(1 2)"]));
    assert!(text.contains("literal S: chain sizes 36 60, n* = 2"));
    assert!(text.contains("variant = normal closure: true"));
}

#[test]
fn closure_exit_codes_and_certificates() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("log.jsonl");
    let o = sofic(&["closure", &config_path("howie_nilpotent16.cfg"), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let log = std::fs::read_to_string(&out).unwrap();
    let last: serde_json::Value = serde_json::from_str(log.lines().last().unwrap()).unwrap();
    assert_eq!((last["witnesses"].as_u64(), last["groups_searched"].as_u64()), (Some(0), Some(36)));

    assert_eq!(sofic(&["closure", &config_path("self_membership.cfg")]).status.code(), Some(0));

    let cert = dir.path().join("cert.txt");
    let o = sofic(&["closure", &config_path("abelian_witness.cfg"), "--certificate", cert.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(sofic(&["verify-certificate", cert.to_str().unwrap()]).status.code(), Some(0));
    let forged = std::fs::read_to_string(&cert).unwrap().replace("w y", "w x");
    std::fs::write(&cert, forged).unwrap();
    assert_eq!(sofic(&["verify-certificate", cert.to_str().unwrap()]).status.code(), Some(3));
    std::fs::write(&cert, "garbage\n").unwrap();
    assert_eq!(sofic(&["verify-certificate", cert.to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn closure_config_diagnostics_and_seeds() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "rank 2\ng xy\nw x\ncatalog S3\nfrobnicate 1\n").unwrap();
    let o = sofic(&["closure", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("bad.cfg:5") && err.contains("frobnicate"), "{err}");

    let cfg = dir.path().join("sampled.cfg");
    std::fs::write(&cfg, "rank 2\ng x^-2y^-3\ng x^-2(xy)^5\nw xy^2\ncatalog Q8 D4\nmode sampled:300\n").unwrap();
    let o = sofic(&["closure", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8(o.stderr).unwrap().contains("seed"));
    let a = sofic(&["closure", cfg.to_str().unwrap(), "--seed", "9"]);
    let b = sofic(&["closure", cfg.to_str().unwrap(), "--seed", "9"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let c = sofic(&["closure", cfg.to_str().unwrap(), "--seed", "10"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn help_and_usage() {
    let o = sofic(&["--help"]);
    assert_eq!(o.status.code(), Some(0));
    let expected = [
        ("norm", "character norm"),
        ("conjgraph", "Gamma(G, C)"),
        ("amplify", "S_n x S_n < S_{n^2}"),
        ("ahom-check", "(Phi, eps, alpha)-homomorphism"),
        ("separate", "(r, eps, delta)-separation"),
        ("closure", "profinite closure"),
        ("stabilize", "S^n"),
        ("verify-certificate", "non-membership certificate"),
    ];
    for (cmd, phrase) in expected {
        let o = sofic(&[cmd, "--help"]);
        assert_eq!(o.status.code(), Some(0), "{cmd}");
        let text = stdout(&o).replace('\n', " ").split_whitespace().collect::<Vec<_>>().join(" ");
        assert!(text.contains(phrase), "{cmd}: {text}");
    }
    assert_eq!(sofic(&[]).status.code(), Some(1));
    assert_eq!(sofic(&["frob"]).status.code(), Some(1));
}
