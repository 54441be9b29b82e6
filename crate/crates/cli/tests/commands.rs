use std::path::Path;
use std::process::{Command, Output};

use shapeprog_core::fixtures;
use shapeprog_core::shape::mesh::merged_obj;

const GOLDEN: &str = include_str!("../../core/fixtures/golden/chair_widen.txt");

fn shapeprog(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_shapeprog")).args(args).env_remove("SHAPEPROG_LLM_PROVIDER").output().unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = shapeprog(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn code(args: &[&str]) -> i32 {
    shapeprog(args).status.code().unwrap()
}

fn build(dir: &Path, fixture: &str) -> String {
    let graph = dir.join(format!("{fixture}.graph.json"));
    ok(&["build", "--fixture", fixture, "-o", graph.to_str().unwrap()]);
    graph.to_str().unwrap().to_string()
}

#[test]
fn edit_reproduces_the_golden_program() {
    let dir = tempfile::tempdir().unwrap();
    let graph = build(dir.path(), "chair");
    let prog = dir.path().join("prog.txt");
    ok(&["edit", &graph, "--request", "widen the chair", "--provider", "mock", "--votes", "5", "-o", prog.to_str().unwrap()]);
    assert_eq!(std::fs::read_to_string(&prog).unwrap(), GOLDEN);
    let out = shapeprog(&["edit", &graph, "--request", "widen the chair", "--explain"]);
    assert_eq!(String::from_utf8(out.stdout).unwrap(), GOLDEN);
    assert!(String::from_utf8(out.stderr).unwrap().contains("round 1"));
}

#[test]
fn eval_at_zero_reproduces_the_input_meshes() {
    let dir = tempfile::tempdir().unwrap();
    let graph = build(dir.path(), "chair");
    let prog = dir.path().join("golden.txt");
    std::fs::write(&prog, GOLDEN).unwrap();
    let out = dir.path().join("out");
    ok(&["eval", &graph, prog.to_str().unwrap(), "--set", "x=0", "-o", out.to_str().unwrap()]);
    let parts = fixtures::chair();
    let expected = merged_obj(parts.iter().map(|p| (p.id.as_str(), &p.mesh)));
    let produced = std::fs::read_to_string(out.join("shape.obj")).unwrap();
    // part order follows the graph, which may differ from the fixture list
    let mut a: Vec<&str> = produced.split("o ").collect();
    let mut b: Vec<&str> = expected.split("o ").collect();
    a.sort();
    b.sort();
    let a: Vec<String> = a.iter().map(|s| s.lines().filter(|l| !l.starts_with("f ")).collect::<Vec<_>>().join("\n")).collect();
    let b: Vec<String> = b.iter().map(|s| s.lines().filter(|l| !l.starts_with("f ")).collect::<Vec<_>>().join("\n")).collect();
    assert_eq!(a, b);
    let frame = std::fs::read(out.join("frame.spev")).unwrap();
    assert_eq!(&frame[..4], b"SPEV");
}

#[test]
fn sweep_writes_frames_over_the_range() {
    let dir = tempfile::tempdir().unwrap();
    let graph = build(dir.path(), "chair");
    let prog = dir.path().join("golden.txt");
    std::fs::write(&prog, GOLDEN).unwrap();
    let out = dir.path().join("frames");
    ok(&["sweep", &graph, prog.to_str().unwrap(), "--param", "x", "--frames", "5", "-o", out.to_str().unwrap()]);
    let index = std::fs::read_to_string(out.join("frames.csv")).unwrap();
    assert_eq!(index, "frame,value\n0,0\n1,0.25\n2,0.5\n3,0.75\n4,1\n");
    let first = std::fs::read_to_string(out.join("frame_000.obj")).unwrap();
    let last = std::fs::read_to_string(out.join("frame_004.obj")).unwrap();
    assert_ne!(first, last);
    assert_eq!(first.lines().count(), last.lines().count());
}

#[test]
fn compose_and_metrics() {
    let dir = tempfile::tempdir().unwrap();
    let graph = build(dir.path(), "chair");
    let a = dir.path().join("a.txt");
    let b = dir.path().join("b.txt");
    std::fs::write(&a, GOLDEN).unwrap();
    std::fs::write(&b, "param x [0, 1]\nop translate back x {dir=0,0,1}\n").unwrap();
    let ab = ok(&["compose", a.to_str().unwrap(), b.to_str().unwrap()]);
    assert!(ab.starts_with("param x [0, 1]\nparam x_2 [0, 1]\n"));
    assert!(ab.ends_with("op translate back x_2 {dir=0,0,1}\n"));
    let row = ok(&["metrics", &graph, a.to_str().unwrap(), a.to_str().unwrap(), "--name", "self"]);
    assert_eq!(row, "name,j_prog,d_geo,pct_rel\nself,1.0,0.0,100.0\n");
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let graph = build(dir.path(), "table");
    assert_eq!(code(&["edit", "/no/such/graph", "--request", "widen"]), 2);
    assert_eq!(code(&["edit", &graph, "--request", "widen the table", "--provider", "psychic"]), 2);
    assert_eq!(code(&["edit", &graph, "--request", "widen the table", "--votes", "3"]), 0);
    let conf = dir.path().join("strict.toml");
    std::fs::write(&conf, "[aep]\nallow_breaking = false\n").unwrap();
    assert_eq!(code(&["--config", conf.to_str().unwrap(), "edit", &graph, "--request", "widen the table", "--votes", "3"]), 3);
    assert_eq!(code(&["edit", &graph, "--request", "fold the table flat"]), 4);
    let remote = dir.path().join("remote.toml");
    std::fs::write(&remote, "[llm]\nprovider = \"remote\"\n[llm.remote]\nendpoint = \"http://127.0.0.1:9/v1/chat/completions\"\ntimeout_secs = 2\n").unwrap();
    assert_eq!(code(&["--config", remote.to_str().unwrap(), "edit", &graph, "--request", "widen the table", "--votes", "1"]), 4);
    let prog = dir.path().join("p.txt");
    std::fs::write(&prog, "param x [0, 1]\nop translate seat x {dir=1,0,0}\n").unwrap();
    let out = dir.path().join("o");
    assert_eq!(code(&["eval", &graph, prog.to_str().unwrap(), "-o", out.to_str().unwrap()]), 2);
    assert_eq!(code(&["eval", &graph, prog.to_str().unwrap(), "--set", "y=1", "-o", out.to_str().unwrap()]), 2);
    std::fs::write(&prog, "op squash top\n").unwrap();
    assert_eq!(code(&["compose", prog.to_str().unwrap(), prog.to_str().unwrap()]), 2);
}

#[test]
fn every_command_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let graph = build(dir.path(), "cabinet");
    let run = || ok(&["edit", &graph, "--request", "open the door", "--explain"]);
    assert_eq!(run(), run());
    let first = std::fs::read(&graph).unwrap();
    build(dir.path(), "cabinet");
    assert_eq!(std::fs::read(&graph).unwrap(), first);
}

#[test]
fn commands_can_use_a_running_server() {
    use std::io::{BufRead, BufReader};
    let mut child = Command::new(env!("CARGO_BIN_EXE_shapeprog"))
        .args(["serve", "--port", "0"])
        .stderr(std::process::Stdio::piped())
        .spawn()
        .unwrap();
    let mut line = String::new();
    BufReader::new(child.stderr.take().unwrap()).read_line(&mut line).unwrap();
    let url = line.trim().strip_prefix("listening on ").unwrap().to_string();
    let dir = tempfile::tempdir().unwrap();
    let graph = dir.path().join("chair.json");
    let built = shapeprog(&["--server", &url, "build", "--fixture", "chair", "-o", graph.to_str().unwrap()]);
    let edited = shapeprog(&["--server", &url, "edit", graph.to_str().unwrap(), "--request", "widen the chair"]);
    child.kill().unwrap();
    child.wait().unwrap();
    assert!(built.status.success());
    assert_eq!(String::from_utf8(edited.stdout).unwrap(), GOLDEN);
}
