use std::fs;
use std::io::Write;
use std::path::Path;
use std::process::{Command, Output, Stdio};

fn fewloc(args: &[&str], stdin: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_fewloc"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(stdin.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn ok(args: &[&str], stdin: &str) -> String {
    let out = fewloc(args, stdin);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn field<'a>(block: &'a str, key: &str) -> &'a str {
    block.lines().find_map(|l| l.strip_prefix(&format!("{key}: "))).unwrap_or_else(|| panic!("no {key} in {block}"))
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn octahedron_pipeline() {
    let tri = ok(&["gen", "primitive", "octahedron"], "");
    let out = ok(&["place", "--strategy", "sphere76", "--c", "76", "--seed", "7"], &tri);
    assert_eq!(field(&out, "rigid"), "true");
    assert_eq!(field(&out, "rank"), "12/12");
    assert_eq!(field(&out, "condition"), "C ok");
}

#[test]
fn stacked_four_locations() {
    let tri = ok(&["gen", "stacked", "200", "--seed", "1"], "");
    let out = ok(&["place", "--strategy", "stacked", "--c", "4"], &tri);
    assert_eq!(field(&out, "rank"), "594/594");
    assert_eq!(field(&out, "locations_used"), "4 of 4");
}

#[test]
fn degenerate_check_reports_witness() {
    let dir = tempfile::tempdir().unwrap();
    // K4 with all points in the plane z = 0.
    let fw = "4 6\n0 1\n0 2\n0 3\n1 2\n1 3\n2 3\n0 0 0 0\n1 1 0 0\n2 0 1 0\n3 1/2 1/3 0\n";
    let wpath = dir.path().join("w.txt");
    let out = fewloc(&["check", "--witness-out", p(&wpath)], fw);
    assert!(out.status.success());
    let s = String::from_utf8(out.stdout).unwrap();
    assert_eq!(field(&s, "rigid"), "false");
    let w = fewloc::io::parse_witness(&fs::read_to_string(&wpath).unwrap()).unwrap();
    let (_, f) = fewloc::io::parse_framework(fw).unwrap();
    assert!(w.verify(&f));
}

#[test]
fn verify_closes_the_loop() {
    let dir = tempfile::tempdir().unwrap();
    let tri = dir.path().join("s.tri");
    let locs = dir.path().join("a.loc");
    let plc = dir.path().join("s.plc");
    fs::write(&tri, ok(&["gen", "random-sphere", "120", "--seed", "3"], "")).unwrap();
    ok(
        &["place", p(&tri), "--strategy", "sphere76", "--c", "76", "--seed", "2", "--locations-out", p(&locs), "-o", p(&plc)],
        "",
    );
    let out = ok(&["verify", p(&plc), "--triangulation", p(&tri), "--locations", p(&locs)], "");
    assert_eq!(field(&out, "rank"), "354/354");
    assert_eq!(field(&out, "condition"), "C ok");
    // Move vertex 0 onto a neighbour's location: refused.
    let text = fs::read_to_string(&plc).unwrap();
    let c = fewloc::io::parse_triangulation(&fs::read_to_string(&tri).unwrap()).unwrap();
    let mut a = fewloc::io::parse_placement(&text).unwrap();
    let nb = c.neighbors(0)[0];
    a.insert(0, a[&nb]);
    let bad: String = a.iter().map(|(v, i)| format!("{v} {i}\n")).collect();
    fs::write(&plc, bad).unwrap();
    let out = fewloc(&["verify", p(&plc), "--triangulation", p(&tri), "--locations", p(&locs)], "");
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn deterministic_outputs() {
    let run = || {
        let tri = ok(&["gen", "random-sphere", "90", "--seed", "11"], "");
        (tri.clone(), ok(&["place", "--strategy", "sphere76", "--c", "76", "--seed", "5"], &tri))
    };
    assert_eq!(run(), run());
    let g1 = ok(&["gen", "genus", "1", "--n", "40", "--seed", "2"], "");
    assert_eq!(g1, ok(&["gen", "genus", "1", "--n", "40", "--seed", "2"], ""));
}

#[test]
fn exit_codes() {
    let tri = ok(&["gen", "primitive", "octahedron"], "");
    let out = fewloc(&["place", "--strategy", "stacked", "--c", "3"], &tri);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert_eq!(err.lines().count(), 1);
    assert!(err.starts_with("refused:"));
    assert_eq!(fewloc(&["check"], "3 1\n0 1 x\n").status.code(), Some(1));
    assert_eq!(fewloc(&["gen", "primitive", "klein"], "").status.code(), Some(2));
    assert_eq!(fewloc(&["place", "--strategy", "nope", "--c", "4"], &tri).status.code(), Some(1));
}

#[test]
fn reduce_schedule_replays() {
    let tri = ok(&["gen", "random-sphere", "40", "--seed", "9"], "");
    let sched = ok(&["reduce", "--max-degree", "5"], &tri);
    let s = fewloc::io::parse_schedule(&sched).unwrap();
    assert_eq!(s.replay().unwrap(), fewloc::io::parse_triangulation(&tri).unwrap());
}

#[test]
fn laman_witness_from_placement() {
    let dir = tempfile::tempdir().unwrap();
    let apex = dir.path().join("apex");
    let g = dir.path().join("g");
    let locs = dir.path().join("locs");
    let plc = dir.path().join("plc");
    fs::write(&g, ok(&["gen", "laman-cx", "--n", "6", "--seed", "4", "--apex-out", p(&apex)], "")).unwrap();
    let graph = fewloc::io::parse_graph(&fs::read_to_string(&g).unwrap()).unwrap();
    fs::write(&locs, fewloc::io::write_locations(&fewloc::generate_locations(graph.num_vertices(), 2, 1))).unwrap();
    // Base vertices 0 and 1 share location 0; everything else is injective.
    let a: String = graph.vertices().iter().map(|&v| format!("{v} {}\n", if v == 1 { 0 } else { v })).collect();
    fs::write(&plc, a).unwrap();
    let w = ok(&["witness", p(&g), "--apex", p(&apex), "--placement", p(&plc), "--locations", p(&locs)], "");
    assert!(w.starts_with("violated: "));
    assert_ne!(w.lines().next().unwrap(), "violated: none");
}

#[test]
fn jobs_place_several_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let mut paths = Vec::new();
    for seed in 0..3 {
        let path = dir.path().join(format!("s{seed}.tri"));
        fs::write(&path, ok(&["gen", "random-sphere", "60", "--seed", &seed.to_string()], "")).unwrap();
        paths.push(path);
    }
    let mut args = vec!["place", "--strategy", "sphere76", "--c", "76", "--jobs", "2"];
    args.extend(paths.iter().map(|x| p(x)));
    let out = ok(&args, "");
    assert_eq!(out.lines().filter(|l| l.ends_with(": ok")).count(), 3);
    for path in &paths {
        let mut plc = path.clone().into_os_string();
        plc.push(".placement");
        assert_eq!(field(&fs::read_to_string(plc).unwrap(), "rank"), "174/174");
    }
}
