use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn oce(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_oce")).args(args).current_dir(cwd).output().unwrap()
}

const SMALL: &str = "\
synthetic = gaussian
synthetic_n = 300
synthetic_ratio = 5
algorithms = uob, adac2
modes = batch, online
learners = nb
members = 5
grid_points = 3
folds = 3
seeds = 1, 2
output = out
";

#[test]
fn run_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("exp.cfg"), SMALL).unwrap();
    let a = oce(&["run", "exp.cfg"], dir.path());
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    let first = fs::read(dir.path().join("out/records.csv")).unwrap();
    let b = oce(&["run", "exp.cfg", "--output", "again"], dir.path());
    assert!(b.status.success());
    assert_eq!(first, fs::read(dir.path().join("again/records.csv")).unwrap());
    assert_eq!(a.stdout, b.stdout);

    let text = String::from_utf8(first).unwrap();
    // 2 algorithms x 2 modes x 2 seeds x 3 folds x 3 cost points
    assert_eq!(text.lines().count(), 1 + 72);
    for f in ["roc_uob_batch_nb.csv", "roc_adac2_online_nb.csv", "summary.csv", "consistency.csv"] {
        assert!(dir.path().join("out").join(f).exists(), "{f}");
    }
    let summary = String::from_utf8(a.stdout).unwrap();
    assert!(summary.contains("uob") && summary.contains("batch vs online"));
}

#[test]
fn report_reproduces_run_outputs() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("exp.cfg"), SMALL.replace("algorithms = uob, adac2", "algorithms = sbag")).unwrap();
    let run = oce(&["run", "exp.cfg", "--format", "both"], dir.path());
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let rep = oce(&["report", "out/records.jsonl", "--output", "rep"], dir.path());
    assert!(rep.status.success(), "{}", String::from_utf8_lossy(&rep.stderr));
    assert_eq!(run.stdout, rep.stdout);
    for f in ["summary.csv", "roc_sbag_online_nb.csv", "records.csv"] {
        assert_eq!(fs::read(dir.path().join("out").join(f)).unwrap(), fs::read(dir.path().join("rep").join(f)).unwrap(), "{f}");
    }
}

#[test]
fn gen_stream_writes_labeled_csv() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("s.spec"), "kind = sine1g\nlength = 1000\nratio = 9\nseed = 4\noutput = g.csv\n").unwrap();
    let out = oce(&["gen-stream", "s.spec"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(dir.path().join("g.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "x0,x1,label");
    assert_eq!(lines.len(), 1001);
    assert_eq!(lines[1..].iter().filter(|l| l.ends_with(",1")).count(), 100);

    let again = oce(&["gen-stream", "s.spec", "-o", "h.csv"], dir.path());
    assert!(again.status.success());
    assert_eq!(text, fs::read_to_string(dir.path().join("h.csv")).unwrap());

    let by_name = oce(&["gen-stream", "sine1", "--seed", "2", "-o", "d.csv"], dir.path());
    assert!(by_name.status.success());
    assert_eq!(fs::read_to_string(dir.path().join("d.csv")).unwrap().lines().count(), 4001);
}

#[test]
fn streamed_file_runs_prequentially() {
    let dir = tempfile::tempdir().unwrap();
    let gen = oce(&["gen-stream", "sine1", "--seed", "1", "-o", "s.csv"], dir.path());
    assert!(gen.status.success());
    fs::write(
        dir.path().join("exp.cfg"),
        "dataset = s.csv\nlabel_column = label\npositive_label = 1\nalgorithms = adac2\nmodes = ns-online\nlearners = lda\nc_neg = 0.1\noutput = out\n",
    )
    .unwrap();
    let run = oce(&["run", "exp.cfg"], dir.path());
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let text = fs::read_to_string(dir.path().join("out/records.csv")).unwrap();
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[5], "-1");
    assert!(row[12].parse::<f64>().unwrap() > 0.7);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    fs::write(p.join("bad.cfg"), "synthetic = gaussian\nalgorithms = nope\n").unwrap();
    assert_eq!(oce(&["run", "bad.cfg"], p).status.code(), Some(2));
    fs::write(p.join("unknown.cfg"), "synthetic = gaussian\nfrobnicate = 1\n").unwrap();
    assert_eq!(oce(&["run", "unknown.cfg"], p).status.code(), Some(2));

    fs::write(p.join("one_class.csv"), "1.0,2.0,a\n3.0,4.0,a\n").unwrap();
    fs::write(p.join("data.cfg"), "dataset = one_class.csv\npositive_label = b\nalgorithms = uob\n").unwrap();
    assert_eq!(oce(&["run", "data.cfg"], p).status.code(), Some(3));

    assert_eq!(oce(&["run", "missing.cfg"], p).status.code(), Some(1));
    assert_eq!(oce(&["gen-stream", "sine9"], p).status.code(), Some(2));
    assert_eq!(oce(&["no-such-command"], p).status.code(), Some(2));
}
