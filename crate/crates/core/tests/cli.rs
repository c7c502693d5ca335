use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

struct Dir(PathBuf);

impl Dir {
    fn new(tag: &str) -> Self {
        let p = std::env::temp_dir().join(format!("twinmat-cli-{tag}-{}", std::process::id()));
        let _ = fs::remove_dir_all(&p);
        fs::create_dir_all(&p).unwrap();
        Dir(p)
    }

    fn file(&self, name: &str, text: &str) -> String {
        let p = self.0.join(name);
        fs::write(&p, text).unwrap();
        p.to_string_lossy().into_owned()
    }

    fn path(&self, name: &str) -> String {
        self.0.join(name).to_string_lossy().into_owned()
    }
}

impl Drop for Dir {
    fn drop(&mut self) {
        let _ = fs::remove_dir_all(&self.0);
    }
}

fn twinmat(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_twinmat")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

const QUERY_SAMPLE: &str = "5 5\n1 1 2 3\n1 2 5 5\n3 3 2 4\n4 5 1 3\n4 5 5 5\n";
const MERGE_SAMPLE: &str = "4 4\n2 2 1 3\n3 3 2 4\n4 4 1 4\n1 1 4 4\n";
const FLIP_SAMPLE: &str = "5 5\n3 5 1 2\n3 4 3 3\n1 2 4 4\n5 5 4 4\n4 5 5 5\n";

#[test]
fn run_sample_queries() {
    let d = Dir::new("query");
    let init = d.file("k.txt", QUERY_SAMPLE);
    let trace = d.file("t.txt", "Q 3 4\nQ 2 2\n");
    for engine in ["amortized", "worstcase"] {
        let o = twinmat(&["run", &init, &trace, "--engine", engine]);
        assert_eq!(o.status.code(), Some(0));
        assert_eq!(stdout(&o), "1\n0\n");
    }
}

#[test]
fn run_sample_flips() {
    let d = Dir::new("flip");
    let init = d.file("k.txt", FLIP_SAMPLE);
    let trace = d.file("t.txt", "U 1 2\nU 4 4\nU 5 2\nQ 1 2\nQ 4 4\nQ 5 2\n");
    for extra in [&["--threshold", "1"][..], &["--threshold", "never"], &["--engine", "worstcase", "--epoch", "1"]] {
        let mut args = vec!["run", &init, &trace];
        args.extend_from_slice(extra);
        let o = twinmat(&args);
        assert_eq!(o.status.code(), Some(0), "{extra:?}");
        assert_eq!(stdout(&o), "1\n1\n0\n");
    }
}

#[test]
fn run_edge_cases() {
    let d = Dir::new("run");
    let init = d.file("k.txt", QUERY_SAMPLE);
    let empty = d.file("e.txt", "");
    let o = twinmat(&["run", &init, &empty]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "");
    let bad = d.file("b.txt", "Q 1 1\nU 2 2\nQ 9 1\n");
    let o = twinmat(&["run", &init, &bad]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));
    let o = twinmat(&["run", &init, &empty, "--backend", "fast"]);
    assert_eq!(o.status.code(), Some(2));
    let o = twinmat(&["run", &init, &empty, "--threshold", "0"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn run_work_csv() {
    let d = Dir::new("csv");
    let init = d.file("k.txt", QUERY_SAMPLE);
    let trace = d.file("t.txt", "U 1 1\nQ 1 1\nU 2 2\n");
    let csv = d.path("w.csv");
    let o = twinmat(&["run", &init, &trace, "--engine", "worstcase", "--csv", &csv]);
    assert_eq!(o.status.code(), Some(0));
    let text = fs::read_to_string(csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "op,row,col,work_units");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("1,1,1,") && lines[2].starts_with("3,2,2,"));
}

#[test]
fn decompose_fig3_and_idempotence() {
    let d = Dir::new("dec");
    let input = d.file("k.txt", MERGE_SAMPLE);
    let out = d.path("r.txt");
    let o = twinmat(&["decompose", &input, "-o", &out]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("input slabs: 4") && stdout(&o).contains("canonical slabs: 5"));
    let first = fs::read_to_string(&out).unwrap();
    assert_eq!(first, "4 5\n1 1 4 4\n2 2 1 1\n2 4 2 3\n3 4 4 4\n4 4 1 1\n");
    let again = d.path("r2.txt");
    assert_eq!(twinmat(&["decompose", &out, "-o", &again]).status.code(), Some(0));
    assert_eq!(fs::read_to_string(&again).unwrap(), first);
    let o = twinmat(&["decompose", &input]);
    assert_eq!(stdout(&o), first);
}

#[test]
fn decompose_errors() {
    let d = Dir::new("decerr");
    let empty = d.file("e.txt", "7 0\n");
    let o = twinmat(&["decompose", &empty]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "7 0\n");
    let overlap = d.file("o.txt", "4 2\n1 2 1 2\n2 3 2 3\n");
    let o = twinmat(&["decompose", &overlap]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("(1,2,1,2) and (2,3,2,3) overlap"));
    let garbled = d.file("g.txt", "4 2\n1 2 1 2\n2 x 2 3\n");
    let o = twinmat(&["decompose", &garbled]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));
    let o = twinmat(&["decompose", &d.path("missing.txt")]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn verify_modes() {
    let d = Dir::new("verify");
    let k = d.path("k.txt");
    let t = d.path("t.txt");
    assert_eq!(twinmat(&["gen", "slabs", "--n", "30", "--k", "20", "--seed", "4", "-o", &k]).status.code(), Some(0));
    assert_eq!(twinmat(&["gen", "trace", "--n", "30", "--ops", "3000", "--seed", "5", "-o", &t]).status.code(), Some(0));
    for engine in ["amortized", "worstcase"] {
        let o = twinmat(&["verify", "oracle", &k, &t, "--engine", engine, "--threshold", "7", "--epoch", "5"]);
        assert_eq!(o.status.code(), Some(0));
        assert!(stdout(&o).starts_with("PASS"));
    }
    let o = twinmat(&["verify", "canonical", &k]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));

    let merge = d.file("merge.txt", MERGE_SAMPLE);
    let good = d.file("good.txt", "4 5\n1 1 4 4\n2 2 1 1\n2 4 2 3\n3 4 4 4\n4 4 1 1\n");
    assert_eq!(twinmat(&["verify", "canonical", &merge, "--claimed", &good]).status.code(), Some(0));
    let lost = d.file("lost.txt", "4 4\n1 1 4 4\n2 2 1 1\n2 4 2 3\n3 4 4 4\n");
    let o = twinmat(&["verify", "canonical", &merge, "--claimed", &lost]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("cell (4, 1)"), "{}", stdout(&o));
    let split = d.file("split.txt", "4 6\n1 1 4 4\n2 2 1 1\n2 4 2 2\n2 4 3 3\n3 4 4 4\n4 4 1 1\n");
    let o = twinmat(&["verify", "canonical", &merge, "--claimed", &split]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("not canonical"));

    let m = d.path("m.txt");
    let w = d.path("w.txt");
    let o = twinmat(&["gen", "width", "--n", "40", "--d", "2", "--seed", "3", "-o", &m, "--witness", &w]);
    assert_eq!(o.status.code(), Some(0));
    let o = twinmat(&["verify", "witness", &m, &w, "--d", "2"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("PASS width"));
    let strict = twinmat(&["verify", "witness", &m, &w, "--d", "0"]);
    let measured: u32 = stdout(&o).trim().rsplit(' ').next().unwrap().parse().unwrap();
    assert_eq!(strict.status.code(), Some(if measured > 0 { 1 } else { 0 }));
    let short = d.file("short.txt", "40 1\nR 1\n");
    assert_eq!(twinmat(&["verify", "witness", &m, &short]).status.code(), Some(1));
}

#[test]
fn gen_is_deterministic() {
    let a = twinmat(&["gen", "width", "--n", "25", "--d", "1", "--seed", "8"]);
    let b = twinmat(&["gen", "width", "--n", "25", "--d", "1", "--seed", "8"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let c = twinmat(&["gen", "width", "--n", "25", "--d", "1", "--seed", "9"]);
    assert_ne!(a.stdout, c.stdout);
    assert_eq!(twinmat(&["gen", "slabs", "--n", "0"]).status.code(), Some(2));
}

#[test]
fn bench_small_grid() {
    let o = twinmat(&["bench", "--log-n", "4", "--log-n", "6", "--ops", "500", "--reps", "5"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 1 + 3 * 2);
    assert!(lines[0].starts_with("n,engine,backend,ops"));
    assert!(lines[1].starts_with("16,amortized,baseline,500,"));
    assert_eq!(twinmat(&["bench", "--backend", "fast"]).status.code(), Some(2));
}
