use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_shiftlab"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn square_map(dir: &Path) -> String {
    let p = dir.join("square.map");
    std::fs::write(&p, "k = 3\nalpha = 1,0\np = [0, 0, 1]\n").unwrap();
    p.display().to_string()
}

#[test]
fn eval_prints_the_image() {
    let d = tempfile::tempdir().unwrap();
    let m = square_map(d.path());
    let o = run(&["eval", "--map", &m, "--point", "1,0,2,0,3,0"], d.path());
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "(2,3,10)");
    let o = run(&["eval", "--map", &m, "--point", "2,0,3,0,10,0", "--inverse"], d.path());
    assert_eq!(stdout(&o).trim(), "(1,2,3)");
}

#[test]
fn usage_errors_exit_one() {
    let d = tempfile::tempdir().unwrap();
    let missing = d.path().join("nope.map");
    let o = run(&["eval", "--map", missing.to_str().unwrap(), "--point", "1,0,2,0,3,0"], d.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("--help"));
    assert_eq!(run(&["eval", "--point", "1,0,2,0,3,0"], d.path()).status.code(), Some(1));
    assert_eq!(run(&["frobnicate"], d.path()).status.code(), Some(1));
    let m = square_map(d.path());
    assert_eq!(run(&["eval", "--map", &m, "--point", "1,2,3"], d.path()).status.code(), Some(1));
    assert_eq!(run(&["yoccoz", "--tau", "1,0", "--q", "0"], d.path()).status.code(), Some(1));
    assert_eq!(run(&["--help"], d.path()).status.code(), Some(0));
}

#[test]
fn yoccoz_holds_and_fails() {
    let d = tempfile::tempdir().unwrap();
    let o = run(&["yoccoz", "--tau", "1.0986,0", "--p", "0", "--q", "1", "--N", "1", "--d", "2"], d.path());
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert!(s.contains("lhs=0.9102") && s.contains("rhs=0.7213") && s.contains("holds=true"), "{s}");
    let o = run(&["yoccoz", "--tau", "10,0"], d.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn every_subcommand_has_a_selftest() {
    let d = tempfile::tempdir().unwrap();
    for c in [
        "eval",
        "orbit",
        "filtration",
        "thm13-verify",
        "green-slice",
        "saddles",
        "unstable",
        "order",
        "ktilde",
        "yoccoz",
        "translation",
        "strips",
    ] {
        let o = run(&[c, "--selftest"], d.path());
        assert_eq!(o.status.code(), Some(0), "{c}: {}", stdout(&o));
        assert!(stdout(&o).contains(&format!("selftest {c}: ok")));
    }
}

#[test]
fn config_file_supplies_arguments() {
    let d = tempfile::tempdir().unwrap();
    let cfg = d.path().join("run.cfg");
    std::fs::write(&cfg, "# yoccoz run\ncommand = yoccoz\ntau = 1.0986,0\nd = 2\n").unwrap();
    let o = run(&["--config", cfg.to_str().unwrap()], d.path());
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("holds=true"));
    // command-line flags override the file
    let o = run(&["--config", cfg.to_str().unwrap(), "yoccoz", "--tau", "10,0"], d.path());
    assert_eq!(o.status.code(), Some(2));
    std::fs::write(&cfg, "tau = 1.0986,0\ncolour = blue\n").unwrap();
    assert_eq!(run(&["--config", cfg.to_str().unwrap(), "yoccoz"], d.path()).status.code(), Some(1));
    std::fs::write(&cfg, "tau 1.0986,0\n").unwrap();
    assert_eq!(run(&["--config", cfg.to_str().unwrap(), "yoccoz"], d.path()).status.code(), Some(1));
}

#[test]
fn strips_certificates_and_csv() {
    let d = tempfile::tempdir().unwrap();
    let out = d.path().join("out");
    let o = run(&["strips", "--product", "V1,V1,V2", "--steps", "5", "--out", out.to_str().unwrap()], d.path());
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("first_bound=17"));
    let csv = std::fs::read_to_string(out.join("strips.csv")).unwrap();
    assert!(csv.starts_with("step,coordinate,lo,hi,region\n1,1,17,20,V1\n"));
    assert_eq!(csv.lines().count(), 1 + 5 * 3);
    let o = run(&["strips", "--product", "E0:1,E0:1,E0:1", "--out", out.to_str().unwrap()], d.path());
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("case=1"));
    // alternating signs are not covered and fail verification
    let o = run(&["strips", "--product", "V1,V-1,V1"], d.path());
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["strips", "--product", "X1,V1,V1"], d.path());
    assert_eq!(o.status.code(), Some(1));
    let o = run(&["strips", "--product", "V1,V1,V1", "--M", "10"], d.path());
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn translation_ops() {
    let d = tempfile::tempdir().unwrap();
    let o = run(&["translation", "--op", "s", "--point", "5/2,5/2,5/2"], d.path());
    assert_eq!(stdout(&o).trim(), "cell=[3, 3, 3] l_z=3 S=(-1/2, 5/2, 1/2)");
    let o = run(&["translation", "--op", "t", "--point", "-1/2,5/2,1/2"], d.path());
    assert!(stdout(&o).starts_with("preimage=(5/2, 5/2, 5/2)"));
    let o = run(&["translation", "--op", "y", "--point", "0.5,1.5,0.5", "--n", "1"], d.path());
    assert_eq!(stdout(&o).trim(), "bits=010");
    let o = run(&["translation", "--op", "power", "--eps", "0.5", "--n", "16", "--point", "0,0,0,0,0,0"], d.path());
    assert_eq!(stdout(&o).trim(), "excluded");
    let o = run(&["translation", "--op", "walls", "--k", "3", "--n", "2"], d.path());
    assert_eq!(o.status.code(), Some(0));
    let o = run(&["translation", "--op", "budget", "--point", "1/2,1/2,-1/2", "--n", "4"], d.path());
    assert_eq!(o.status.code(), Some(0));
    assert!(d.path().join("budget.csv").exists());
}

#[test]
fn flagship_pipeline_artifacts() {
    let d = tempfile::tempdir().unwrap();
    let o = run(&["saddles"], d.path());
    let s = stdout(&o);
    assert!(s.lines().nth(1).unwrap().starts_with("0,(2.4494897427831"), "{s}");
    let o = run(&["unstable", "--order", "30"], d.path());
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(d.path().join("unstable.txt")).unwrap();
    assert!(!text.is_empty());
    let o = run(&["order"], d.path());
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(std::fs::read_to_string(d.path().join("growth.csv")).unwrap().lines().count() > 10);
    let o = run(&["ktilde", "--resolution", "64"], d.path());
    assert_eq!(o.status.code(), Some(0));
    let pgm = std::fs::read(d.path().join("ktilde.pgm")).unwrap();
    assert!(pgm.starts_with(b"P5\n64 64\n255\n"));
    assert_eq!(pgm.len(), b"P5\n64 64\n255\n".len() + 64 * 64);
    let o = run(&["thm13-verify", "--samples", "20"], d.path());
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("violations=0"));
    assert!(std::fs::read_to_string(d.path().join("thm13.csv")).unwrap().starts_with("j,n,lhs,rhs,margin,pass"));
    let o = run(&["green-slice", "--resolution", "16", "--axis", "3"], d.path());
    assert_eq!(o.status.code(), Some(0));
    assert!(std::fs::read(d.path().join("green_slice.pgm")).unwrap().starts_with(b"P5\n16 16\n255\n"));
}

#[test]
fn outputs_are_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        assert_eq!(run(&["thm13-verify", "--samples", "10", "--seed", "7"], d.path()).status.code(), Some(0));
        assert_eq!(run(&["ktilde", "--resolution", "32"], d.path()).status.code(), Some(0));
    }
    for f in ["thm13.csv", "ktilde.pgm", "rotation.csv"] {
        assert_eq!(std::fs::read(a.path().join(f)).unwrap(), std::fs::read(b.path().join(f)).unwrap(), "{f}");
    }
}

#[test]
fn orbit_and_filtration() {
    let d = tempfile::tempdir().unwrap();
    let m = square_map(d.path());
    let o = run(&["orbit", "--map", &m, "--point", "1,0,2,0,3,0", "--steps", "2"], d.path());
    let s = stdout(&o);
    let lines: Vec<&str> = s.lines().collect();
    assert_eq!(lines[0], "n,re1,im1,re2,im2,re3,im3");
    assert_eq!(lines[2], "1,2,0,3,0,10,0");
    let o = run(&["filtration", "--point", "0,0,0,0,1000000,0"], d.path());
    let s = stdout(&o);
    assert!(s.contains("region: V_3") && s.contains("forward: Escaped"), "{s}");
}
