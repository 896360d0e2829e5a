use std::path::Path;
use std::process::{Command, Output};

use worbel::candidates::build_candidate_set;
use worbel::exact::brute_force_mwis;
use worbel::instance::{save_instance, ConstraintParams, LabelInfo, LabeledPoint};
use worbel::{build_conflict_graph, Point2, RpfaInstance};

fn worbel(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_worbel"))
        .args(args)
        .current_dir(dir)
        .env("RUST_LOG", "info")
        .output()
        .expect("run binary")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Value of `key=` in the stats line.
fn stat(line: &str, key: &str) -> String {
    line.split_whitespace()
        .find_map(|kv| kv.strip_prefix(&format!("{key}=")))
        .unwrap_or_else(|| panic!("{key} missing in {line}"))
        .to_string()
}

fn five_points() -> RpfaInstance {
    let pts = [
        (0.0, 0.0, 0),
        (4.0, 1.0, 0),
        (2.0, 5.0, 1),
        (6.0, 6.0, 1),
        (5.0, 3.0, 0),
    ];
    RpfaInstance::new(
        pts.iter()
            .map(|&(x, y, l)| LabeledPoint {
                position: Point2::new(x, y),
                label: l,
            })
            .collect(),
        vec![
            LabelInfo::new("oak").unwrap(),
            LabelInfo::new("pine").unwrap(),
        ],
        ConstraintParams::unconstrained(),
        None,
    )
    .unwrap()
}

#[test]
fn exact_and_greedy_on_five_points() {
    let dir = tempfile::tempdir().unwrap();
    let inst = five_points();
    save_instance(&inst, dir.path().join("five.csv")).unwrap();
    let g = build_conflict_graph(build_candidate_set(&inst).unwrap(), inst.n());
    let best = brute_force_mwis(&g);

    let e = worbel(
        &[
            "solve",
            "five.csv",
            "--solver",
            "exact",
            "--emit",
            "csv,svg,wcnf",
        ],
        dir.path(),
    );
    assert!(e.status.success(), "{}", stderr(&e));
    let line = stdout(&e);
    assert_eq!(stat(&line, "covered"), "5/5");
    assert_eq!(stat(&line, "rectangles"), best.cardinality.to_string());
    assert_eq!(stat(&line, "solver"), "exact");
    for f in ["five.solution.csv", "five.svg", "five.wcnf"] {
        assert!(dir.path().join(f).exists(), "{f} missing");
    }
    let svg = std::fs::read_to_string(dir.path().join("five.svg")).unwrap();
    assert!(svg.starts_with("<?xml") && svg.trim_end().ends_with("</svg>"));
    let wcnf = std::fs::read_to_string(dir.path().join("five.wcnf")).unwrap();
    assert!(wcnf.starts_with(&format!("p wcnf {} ", g.len())));

    let gr = worbel(&["solve", "five.csv", "--solver", "greedy"], dir.path());
    assert!(gr.status.success());
    let greedy_card: usize = stat(&stdout(&gr), "rectangles").parse().unwrap();
    assert!(greedy_card >= best.cardinality);
}

#[test]
fn auto_takes_greedy_path_above_threshold() {
    let dir = tempfile::tempdir().unwrap();
    save_instance(&five_points(), dir.path().join("five.csv")).unwrap();
    let o = worbel(
        &[
            "solve",
            "five.csv",
            "--auto-threshold",
            "3",
            "--emit",
            "csv",
        ],
        dir.path(),
    );
    assert!(o.status.success());
    assert_eq!(stat(&stdout(&o), "solver"), "greedy");
    assert!(stderr(&o).contains("auto threshold"));
}

#[test]
fn model_import_rejects_conflicts() {
    let dir = tempfile::tempdir().unwrap();
    save_instance(&five_points(), dir.path().join("five.csv")).unwrap();
    let inst = five_points();
    let g = build_conflict_graph(build_candidate_set(&inst).unwrap(), inst.n());
    let (a, b) = g.edges().next().unwrap();
    std::fs::write(
        dir.path().join("bad.model"),
        format!("v {} {}\n", a + 1, b + 1),
    )
    .unwrap();
    let o = worbel(&["solve", "five.csv", "--model", "bad.model"], dir.path());
    assert!(!o.status.success());
    assert!(stderr(&o).contains("error[solver]"), "{}", stderr(&o));

    std::fs::write(dir.path().join("empty.model"), "v 0\n").unwrap();
    let o = worbel(
        &[
            "solve",
            "five.csv",
            "--model",
            "empty.model",
            "--emit",
            "csv",
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stat(&stdout(&o), "rectangles"), "0");
}

#[test]
fn errors_carry_a_category() {
    let dir = tempfile::tempdir().unwrap();
    let o = worbel(&["solve", "missing.csv"], dir.path());
    assert!(!o.status.success());
    assert!(stderr(&o).starts_with("error[io]"), "{}", stderr(&o));

    std::fs::write(dir.path().join("bad.csv"), "1,2\n").unwrap();
    let o = worbel(&["solve", "bad.csv"], dir.path());
    assert!(!o.status.success());
    assert!(stderr(&o).contains("error[parse]"), "{}", stderr(&o));

    std::fs::write(
        dir.path().join("bad.dbcr"),
        "outer: 0,0 2,0 2,2 0,2\nelements: 0,1\nomega: 1\n",
    )
    .unwrap();
    let o = worbel(&["reduce", "bad.dbcr"], dir.path());
    assert!(!o.status.success());
    assert!(stderr(&o).contains("error[validation]"), "{}", stderr(&o));
}

#[test]
fn preset_applies_case_study_parameters() {
    let dir = tempfile::tempdir().unwrap();
    let o = worbel(
        &[
            "generate",
            "--distribution",
            "gaussian",
            "--n",
            "30",
            "--c",
            "3",
            "--seed",
            "4",
            "--preset",
            "paper-case-study",
            "--out",
            "g.csv",
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(dir.path().join("g.csv")).unwrap();
    assert!(text.contains("#param rho_l=0.75"));
    assert!(text.contains("#param f=16"));
    let o = worbel(
        &["solve", "g.csv", "--solver", "greedy", "--emit", "svg"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
}

#[test]
fn benchmark_appends_rows() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "benchmark",
        "--distribution",
        "uniform,gaussian",
        "--n-min",
        "10",
        "--n-max",
        "20",
        "--n-step",
        "10",
        "--c",
        "2",
        "--replicates",
        "1",
        "--seed",
        "3",
        "--budget-secs",
        "10",
        "--out",
        "b.csv",
    ];
    for _ in 0..2 {
        let o = worbel(&args, dir.path());
        assert!(o.status.success(), "{}", stderr(&o));
        assert!(stdout(&o).contains("rows=4"));
    }
    let text = std::fs::read_to_string(dir.path().join("b.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 9);
    assert!(lines[0].starts_with("schema_version,"));
    let header: Vec<&str> = lines[0].split(',').collect();
    let stable = |l: &str| -> Vec<String> {
        l.split(',')
            .zip(&header)
            .filter(|(_, h)| !h.ends_with("_secs"))
            .map(|(v, _)| v.to_string())
            .collect()
    };
    for i in 1..5 {
        assert_eq!(stable(lines[i]), stable(lines[i + 4]));
    }
}

#[test]
fn reduce_square_and_verify() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("sq.dbcr"),
        "outer: 0,0 2,0 2,2 0,2\nelements: 1,1\nomega: 1\n",
    )
    .unwrap();
    let o = worbel(
        &["reduce", "sq.dbcr", "--verify", "--out-dir", "out"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("k=89"), "{out}");
    assert!(
        out.contains("dbcr=yes") && out.contains("agree=true"),
        "{out}"
    );
    assert!(dir.path().join("out/sq.rpfa0.csv").exists());
    assert!(dir.path().join("out/sq.provenance.txt").exists());
}
