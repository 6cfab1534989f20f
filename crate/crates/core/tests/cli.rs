//! End-to-end runs of the `permattack` binary: outputs, digests and exit codes.

use std::path::Path;
use std::process::{Command, Output};

use permattack::data::{read_idx, write_idx, IdxImages};
use permattack::permkit::{load_schedule, Dims, GrayImage};
use permattack::rng::SplitMix64;

fn permattack(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_permattack"))
        .args(args)
        .env("PERMATTACK_THREADS", "2")
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn random_idx(n: usize, dims: Dims, seed: u64) -> IdxImages {
    let mut rng = SplitMix64::new(seed);
    let images = (0..n)
        .map(|_| GrayImage::new(dims, (0..dims.cells()).map(|_| rng.next_u32() as u8).collect()).unwrap())
        .collect();
    IdxImages::new(dims, images).unwrap()
}

#[test]
fn gen_pbox_logistic_digest_is_frozen() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("k.pbx");
    let o = permattack(&["gen-pbox", "--pattern", "logistic", "--rows", "28", "--cols", "28", "--out", p(&out)]);
    assert_eq!(code(&o), 0, "{o:?}");
    assert!(stdout(&o).contains("71bee9017630644112ffd71c83f4b341fcd8e97e561320983fd6cb41cc5fb280"));
    assert!(dir.path().join("k.pbx.run.json").exists());
}

#[test]
fn gen_pbox_writes_one_table_per_round() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("k.pbx");
    let o = permattack(&[
        "gen-pbox", "--pattern", "cml", "--rows", "6", "--cols", "5", "--rounds", "16", "--out", p(&out),
    ]);
    assert_eq!(code(&o), 0, "{o:?}");
    assert_eq!(load_schedule(&out).unwrap().len(), 16);
}

#[test]
fn usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("k.pbx");
    let bad_pattern = permattack(&["gen-pbox", "--pattern", "tent", "--rows", "4", "--cols", "4", "--out", p(&out)]);
    assert_eq!(code(&bad_pattern), 2);
    let bad_param = permattack(&[
        "gen-pbox", "--pattern", "logistic", "--rows", "4", "--cols", "4", "--params", "lambda=9", "--out", p(&out),
    ]);
    assert_eq!(code(&bad_param), 2);
    let strict = permattack(&["make-lwc", "--cipher", "katan", "--train", "4", "--val", "2", "--out", p(dir.path()), "--strict"]);
    assert_eq!(code(&strict), 2);
    assert_eq!(code(&permattack(&["frobnicate"])), 2);
    assert_eq!(code(&permattack(&["--help"])), 0);
}

#[test]
fn data_errors_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let missing = permattack(&["decrypt", "--input", "/nonexistent.idx", "--keys", "/nonexistent.pbx", "--out", p(&dir.path().join("x"))]);
    assert_eq!(code(&missing), 3);

    let imgs = dir.path().join("imgs.idx");
    write_idx(&random_idx(3, Dims::new(5, 5).unwrap(), 1), &imgs).unwrap();
    let keys = dir.path().join("k.pbx");
    let o = permattack(&["gen-pbox", "--pattern", "logistic", "--rows", "4", "--cols", "4", "--out", p(&keys)]);
    assert_eq!(code(&o), 0);
    let mismatch = permattack(&["encrypt", "--input", p(&imgs), "--keys", p(&keys), "--out", p(&dir.path().join("c.idx"))]);
    assert_eq!(code(&mismatch), 3);
}

#[test]
fn encrypt_decrypt_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let plain = random_idx(4, Dims::new(7, 9).unwrap(), 2);
    let src = dir.path().join("plain.idx.gz");
    write_idx(&plain, &src).unwrap();
    let (cipher, keys, back) = (dir.path().join("c.idx"), dir.path().join("k.pbx"), dir.path().join("b.idx"));
    let o = permattack(&[
        "encrypt", "--input", p(&src), "--out", p(&cipher), "--pattern", "lorenz", "--rounds", "3", "--keys-out", p(&keys),
    ]);
    assert_eq!(code(&o), 0, "{o:?}");
    assert_ne!(read_idx(&cipher).unwrap().images, plain.images);
    let o = permattack(&["decrypt", "--input", p(&cipher), "--keys", p(&keys), "--out", p(&back)]);
    assert_eq!(code(&o), 0, "{o:?}");
    assert_eq!(read_idx(&back).unwrap().images, plain.images);
}

#[test]
fn make_lwc_is_seed_deterministic_and_audits() {
    let dir = tempfile::tempdir().unwrap();
    let run = |sub: &str| {
        let out = dir.path().join(sub);
        let o = permattack(&[
            "make-lwc", "--cipher", "simon", "--train", "300", "--val", "50", "--test", "20", "--seed", "7", "--audit", "--out", p(&out),
        ]);
        assert_eq!(code(&o), 0, "{o:?}");
        assert!(stdout(&o).contains("all consistent"));
        std::fs::read(out.join("train.lwc")).unwrap()
    };
    assert_eq!(run("a"), run("b"));
}

fn write_config(dir: &Path, lr: f64, epochs: usize) -> std::path::PathBuf {
    let dims = Dims::new(28, 28).unwrap();
    write_idx(&random_idx(12, dims, 3), &dir.join("train.idx")).unwrap();
    write_idx(&random_idx(4, dims, 4), &dir.join("val.idx")).unwrap();
    let cfg = serde_json::json!({
        "task": "decryptor",
        "generator": {"pattern": "cml", "x1": 0.31457, "y2": 0.6532, "eps": 0.94},
        "rounds": 1,
        "data": {"train_plain": "train.idx", "val_plain": "val.idx"},
        "train": {"epochs": epochs, "lr": lr, "batch_size": 4, "optimizer": "sgd"},
        "seed": 5,
        "output": "run"
    });
    let path = dir.join("config.json");
    std::fs::write(&path, serde_json::to_vec_pretty(&cfg).unwrap()).unwrap();
    path
}

#[test]
fn train_then_predict() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), 0.01, 2);
    let o = permattack(&["train", "--config", p(&cfg)]);
    assert_eq!(code(&o), 0, "{o:?}");
    assert!(stdout(&o).contains("decryptor: 679338 trainable parameters"));
    let run = dir.path().join("run");
    for f in ["best.ndl", "report.json", "run-config.json"] {
        assert!(run.join(f).exists(), "{f} missing");
    }
    let cipher = dir.path().join("c.idx");
    let o = permattack(&[
        "encrypt", "--input", p(&dir.path().join("val.idx")), "--out", p(&cipher), "--pattern", "cml",
        "--params", "x1=0.31457", "y2=0.6532", "eps=0.94", "--rounds", "1",
    ]);
    assert_eq!(code(&o), 0, "{o:?}");
    let pred = dir.path().join("pred");
    let o = permattack(&[
        "predict", "--checkpoint", p(&run.join("best.ndl")), "--input", p(&cipher),
        "--plain", p(&dir.path().join("val.idx")), "--out", p(&pred),
    ]);
    assert_eq!(code(&o), 0, "{o:?}");
    assert_eq!(read_idx(&pred.join("predicted-idx3-ubyte")).unwrap().len(), 4);
}

#[test]
fn divergence_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), 1e300, 2);
    let o = permattack(&["train", "--config", p(&cfg)]);
    assert_eq!(code(&o), 4, "{o:?}");
}

#[test]
fn ga_on_synthetic_template() {
    let dir = tempfile::tempdir().unwrap();
    let o = permattack(&["ga", "--rows", "3", "--cols", "3", "--seed", "2", "--out", p(dir.path())]);
    assert_eq!(code(&o), 0, "{o:?}");
    let log = std::fs::read_to_string(dir.path().join("log.csv")).unwrap();
    assert!(log.lines().count() >= 2);
    assert!(dir.path().join("best.pbx").exists());
}
