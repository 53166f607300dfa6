use std::path::Path;
use std::process::{Command, Output};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn ttrules(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ttrules"))
        .current_dir(dir)
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write_synthetic(dir: &Path) {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut csv = String::from("a,b,c,d,e,f,color,y\n");
    let colors = ["red", "green", "blue"];
    for _ in 0..400 {
        let bits: Vec<u8> = (0..6).map(|_| rng.gen_range(0..2)).collect();
        let color = colors[rng.gen_range(0..3)];
        let y = (bits[0] == 1 && bits[3] == 0) || color == "blue";
        let cells: Vec<String> = bits.iter().map(u8::to_string).collect();
        csv.push_str(&format!("{},{color},{}\n", cells.join(","), y as u8));
    }
    std::fs::write(dir.join("toy.csv"), csv).unwrap();
    let conf = "\
[data]
data = toy.csv
target = y
task = binary
kinds = color:categorical

[model]
n = 4
stride = 2
amplification = 4
k1 = 4
k2 = 1
filters = 3
head = binary_sparse

[train]
epochs = 8
batch_size = 32
lr = 0.01
seed = 1

[run]
output = out
";
    std::fs::write(dir.join("toy.conf"), conf).unwrap();
}

#[test]
fn estimate_prints_the_count() {
    let dir = tempfile::tempdir().unwrap();
    let o = ttrules(dir.path(), &["estimate", "n=5", "L=100", "s=5", "F=10"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "15200");
}

#[test]
fn usage_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(ttrules(dir.path(), &["frobnicate"]).status.code(), Some(2));
    assert_eq!(ttrules(dir.path(), &["estimate", "n=5", "L=100"]).status.code(), Some(2));
    assert_eq!(ttrules(dir.path(), &["estimate", "q=1"]).status.code(), Some(2));
    assert_eq!(ttrules(dir.path(), &["train", "bogus=1"]).status.code(), Some(2));
    assert_eq!(ttrules(dir.path(), &["train", "--config", "missing.conf"]).status.code(), Some(2));
}

#[test]
fn runtime_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let o = ttrules(dir.path(), &["rules-export", "--rules", "nothing.json"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error:"));
    // Well-formed but impossible: a window wider than the input.
    assert_eq!(ttrules(dir.path(), &["estimate", "n=8", "L=4", "s=1", "F=1"]).status.code(), Some(1));
}

#[test]
fn full_pipeline_on_synthetic_data() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write_synthetic(d);
    let run = |args: &[&str]| {
        let o = ttrules(d, args);
        assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        o
    };

    run(&["train", "--config", "toy.conf", "--fold", "0"]);
    assert!(d.join("out/fold0/model.json").exists());

    let ex = stdout(&run(&["extract", "--config", "toy.conf", "--fold", "0"]));
    assert!(ex.contains("fold 0: exactness: 100.00%"), "{ex}");

    run(&["optimize", "--config", "toy.conf", "--fold", "0"]);
    let opt = d.join("out/fold0/rules_opt.json");
    assert!(opt.exists());

    let ev = stdout(&run(&["eval", "--config", "toy.conf", "--fold", "0", "--rules", "opt"]));
    assert!(ev.contains("accuracy"), "{ev}");

    let text = stdout(&run(&["rules-export", "--rules", opt.to_str().unwrap()]));
    assert!(text.starts_with("TASK binary"), "{text}");
    std::fs::write(d.join("rules.txt"), &text).unwrap();
    run(&[
        "rules-import",
        "--text",
        "rules.txt",
        "--schema-from",
        opt.to_str().unwrap(),
        "--out",
        "back.json",
    ]);
    let again = stdout(&run(&["rules-export", "--rules", "back.json"]));
    assert_eq!(again, text);

    run(&["export-dot", "--rules", "back.json", "--out", "dots"]);
    assert!(d.join("dots/index.json").exists());

    run(&["predict", "--rules", "back.json", "--input", "toy.csv", "--output", "pred.jsonl"]);
    let lines = std::fs::read_to_string(d.join("pred.jsonl")).unwrap();
    assert_eq!(lines.lines().count(), 400);
    for l in lines.lines().take(5) {
        serde_json::from_str::<serde_json::Value>(l).unwrap();
    }
}

#[test]
fn eval_before_extract_is_a_runtime_error() {
    let dir = tempfile::tempdir().unwrap();
    write_synthetic(dir.path());
    let o = ttrules(dir.path(), &["eval", "--config", "toy.conf", "--fold", "1"]);
    assert_eq!(o.status.code(), Some(1));
}
