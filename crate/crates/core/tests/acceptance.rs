//! Acceptance gate. Prints one PASS/FAIL line per criterion. With
//! `PERMATTACK_ACCEPTANCE_STRICT=1` it also exits non-zero when any
//! criterion fails; otherwise failures are only reported so that the rest of
//! the workspace tests still run.
//!
//! Needs the MNIST and Fashion-MNIST IDX files under `data/` at the workspace
//! root (see `scripts/fetch-data.sh`).

use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use permattack::attacks::{
    build_decryptor, build_katan_model, decryptor_subtotals, init_seed, instantiate, predict_images, train,
    transfer_train, AttackTask, ImagePairSource, OptimizerKind, TrainConfig, DECRYPTOR_CONV_PARAMS,
    DECRYPTOR_DENSE_PARAMS, DECRYPTOR_PARAMS, KATAN_PARAMS,
};
use permattack::data::{
    build_katan_corpus, build_pbox_corpus, build_simon_corpus, read_idx, read_idx_labels, IdxImages,
};
use permattack::eval::{
    classify_predictions, dissimilarity, noise_images, train_measurement_classifier, ClassifierConfig,
};
use permattack::gakey::{run_ga, GaConfig, SyntheticOracle};
use permattack::lwc::{
    katan32_decrypt, katan32_encrypt, parse_golden, simon32_decrypt, simon32_encrypt, Katan80Key, Simon64Key,
};
use permattack::ndl::{
    checkpoint_bytes, evaluate, gradient_check, softmax, Activation, GradCheckConfig, Init, LayerParams, LayerSpec,
    LossKind, Model, ModelSpec, OptimizerConfig, OptimizerState, OutputHead,
};
use permattack::parallel::with_workers;
use permattack::permkit::{
    apply_pbox, decrypt_rounds, encrypt_rounds, gcbpm_index_bits, generate_schedule, Dims, GrayImage, PBox, PatternKind, PatternSpec,
};
use permattack::rng::SplitMix64;
use permattack::Error;

type Check = Result<String, String>;

struct Gate {
    failures: usize,
    skipped: usize,
    filter: Vec<String>,
}

impl Gate {
    fn run(&mut self, name: &str, budget: Duration, f: impl FnOnce() -> Check) {
        if !self.filter.is_empty() && !self.filter.iter().any(|f| name.contains(f.as_str())) {
            self.skipped += 1;
            println!("SKIP {name}");
            return;
        }
        let t = Instant::now();
        let result = f();
        let elapsed = t.elapsed();
        let (ok, detail) = match result {
            Ok(d) if elapsed <= budget => (true, d),
            Ok(d) => (false, format!("{d}; over the {:.0} s budget", budget.as_secs_f64())),
            Err(d) => (false, d),
        };
        if !ok {
            self.failures += 1;
        }
        println!(
            "{} {name}: {detail} [{:.1} s]",
            if ok { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64()
        );
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn data_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

fn idx(set: &str, stem: &str) -> Result<IdxImages, String> {
    let p = data_dir().join(set).join(format!("{stem}.gz"));
    read_idx(&p).map_err(|e| format!("{e} (run scripts/fetch-data.sh)"))
}

fn labels(set: &str, stem: &str) -> Result<Vec<u8>, String> {
    let p = data_dir().join(set).join(format!("{stem}.gz"));
    read_idx_labels(&p).map_err(|e| format!("{e} (run scripts/fetch-data.sh)"))
}

fn e2s(e: permattack::Error) -> String {
    e.to_string()
}

// ---------------------------------------------------------------------------

fn architecture() -> Check {
    let dec = instantiate(build_decryptor()).map_err(e2s)?;
    let (conv, dense, deconv) = decryptor_subtotals(&dec);
    ensure(dec.param_count() == 679_338, || format!("decryptor has {} params", dec.param_count()))?;
    ensure(DECRYPTOR_PARAMS == 679_338, || "constant drifted".into())?;
    ensure((conv, dense, deconv) == (31_949, 615_440, 31_949), || {
        format!("subtotals {conv}/{dense}/{deconv}")
    })?;
    ensure(DECRYPTOR_CONV_PARAMS == 31_949 && DECRYPTOR_DENSE_PARAMS == 615_440, || "constants drifted".into())?;
    let katan = instantiate(build_katan_model()).map_err(e2s)?;
    ensure(katan.param_count() == 3_748 && KATAN_PARAMS == 3_748, || {
        format!("katan model has {} params", katan.param_count())
    })?;
    ensure(dec.output_shape() == [28, 28, 1], || format!("decryptor output {:?}", dec.output_shape()))?;
    Ok(format!("decryptor {} = {conv} + {dense} + {deconv}, katan {}", dec.param_count(), katan.param_count()))
}

fn ciphers() -> Check {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data");
    let read = |f: &str| std::fs::read_to_string(dir.join(f)).map_err(|e| format!("{f}: {e}"));
    let kv = parse_golden(&read("katan32_golden.txt")?).map_err(e2s)?;
    let sv = parse_golden(&read("simon32_golden.txt")?).map_err(e2s)?;
    for v in &kv {
        let k = Katan80Key::new(v.key).map_err(e2s)?;
        ensure(katan32_encrypt(v.plaintext, k) == v.ciphertext, || format!("katan golden {v:?}"))?;
    }
    for v in &sv {
        let k = Simon64Key::from_u64(v.key as u64);
        ensure(simon32_encrypt(v.plaintext, k) == v.ciphertext, || format!("simon golden {v:?}"))?;
    }
    let mut rng = SplitMix64::new(0x5eed);
    for _ in 0..1 << 16 {
        let p = rng.next_u32();
        let kk = Katan80Key::new(((rng.next_u64() as u128) << 16) | (rng.next_u64() as u128 & 0xffff)).map_err(e2s)?;
        ensure(katan32_decrypt(katan32_encrypt(p, kk), kk) == p, || format!("katan round trip {p:08x}"))?;
        let sk = Simon64Key::from_u64(rng.next_u64());
        ensure(simon32_decrypt(simon32_encrypt(p, sk), sk) == p, || format!("simon round trip {p:08x}"))?;
    }
    Ok(format!("{} KATAN32 + {} SIMON32/64 golden vectors, 65536 round trips each", kv.len(), sv.len()))
}

fn random_spec(kind: PatternKind, dims: Dims, rng: &mut SplitMix64) -> PatternSpec {
    let k = gcbpm_index_bits(dims.cells()) as u64;
    match kind {
        PatternKind::Logistic => PatternSpec::Logistic { r0: rng.uniform(0.05, 0.95), lambda: rng.uniform(3.9, 4.0) },
        PatternKind::Lorenz => PatternSpec::Lorenz {
            a0: rng.uniform(-10.0, 10.0),
            b0: rng.uniform(-10.0, 10.0),
            c0: rng.uniform(1.0, 30.0),
        },
        PatternKind::Gcbpm => PatternSpec::Gcbpm {
            beta1: rng.below(k - 1) as u32,
            beta2: rng.below(k - 1) as u32,
            delta1: rng.below(1 << k) as u32,
            delta2: rng.below(1 << k) as u32,
        },
        PatternKind::Cml => PatternSpec::Cml {
            x1: rng.uniform(0.05, 0.95),
            y2: rng.uniform(0.05, 0.95),
            eps: rng.uniform(0.05, 0.95),
        },
    }
}

fn random_image(dims: Dims, rng: &mut SplitMix64) -> GrayImage {
    GrayImage::new(dims, (0..dims.cells()).map(|_| rng.next_u32() as u8).collect()).unwrap()
}

fn pbox_soundness() -> Check {
    let mut rng = SplitMix64::new(2024);
    let mut tables = 0usize;
    let mut brute = 0usize;
    let mut rejected = [0usize; 2];
    for kind in PatternKind::ALL {
        let mut accepted = 0;
        let mut drawn = 0;
        while accepted < 200 {
            drawn += 1;
            ensure(drawn <= 2000, || format!("{kind:?}: only {accepted} usable specs in 2000 draws"))?;
            let small = accepted % 4 == 0;
            let dims = if small {
                Dims::new(1 + rng.below(4) as usize, 1 + rng.below(4) as usize).unwrap()
            } else {
                Dims::new(2 + rng.below(63) as usize, 2 + rng.below(63) as usize).unwrap()
            };
            let spec = random_spec(kind, dims, &mut rng);
            // periodic windows and identity round keys (common on tiny images)
            // are rejected specs, not bad tables
            match generate_schedule(&spec, dims, 16) {
                Err(Error::DegenerateOrbit(_)) => {
                    rejected[(dims.cells() > 16) as usize] += 1;
                    continue;
                }
                Err(e) => return Err(format!("{spec:?} {dims}: {e}")),
                Ok(_) => accepted += 1,
            }
            let images: Vec<GrayImage> = (0..2).map(|_| random_image(dims, &mut rng)).collect();
            for rounds in [1, 8, 16] {
                let (cipher, keys) =
                    encrypt_rounds(&images, &spec, rounds).map_err(|e| format!("{spec:?} {dims} r{rounds}: {e}"))?;
                tables += keys.len();
                for k in &keys {
                    // PBox::new is the bijectivity check
                    PBox::new(dims, k.table().to_vec()).map_err(|e| format!("{spec:?} {dims}: {e}"))?;
                }
                let back = decrypt_rounds(&cipher, &keys).map_err(e2s)?;
                ensure(back == images, || format!("{spec:?} {dims} r{rounds}: round trip differs"))?;
                if dims.cells() <= 16 {
                    // index-chasing composition against the pipeline on a
                    // labelled image
                    let n = dims.cells();
                    let mut pos: Vec<usize> = (0..n).collect();
                    for k in &keys {
                        for p in pos.iter_mut() {
                            *p = k.table()[*p] as usize;
                        }
                    }
                    let label = GrayImage::new(dims, (0..n as u8).collect()).unwrap();
                    let (enc, _) = encrypt_rounds(std::slice::from_ref(&label), &spec, rounds).map_err(e2s)?;
                    for (i, &p) in pos.iter().enumerate() {
                        ensure(enc[0].pixels()[p] as usize == i, || format!("{spec:?} {dims} r{rounds}: composition"))?;
                    }
                    brute += 1;
                }
            }
        }
    }
    Ok(format!(
        "{tables} tables bijective over 800 specs, all round trips exact, {brute} brute-force compositions; \
         degenerate specs redrawn: {} on <= 16 cells, {} larger",
        rejected[0], rejected[1]
    ))
}

fn numeric_core() -> Check {
    let kinds: Vec<(&str, ModelSpec, LossKind)> = vec![
        ("dense/sigmoid+mse", ModelSpec { input_shape: vec![5], layers: vec![LayerSpec::dense(4, Activation::Sigmoid), LayerSpec::dense(3, Activation::Linear)] }, LossKind::Mse),
        ("dense/relu+cce", ModelSpec { input_shape: vec![5], layers: vec![LayerSpec::dense(6, Activation::Relu), LayerSpec::dense(4, Activation::Linear)] }, LossKind::SparseCce),
        ("dense/softmax+mse", ModelSpec { input_shape: vec![4], layers: vec![LayerSpec::dense(3, Activation::Softmax)] }, LossKind::Mse),
        ("pconv chain+flatten+dense+reshape", ModelSpec {
            input_shape: vec![3, 3, 1],
            layers: vec![
                LayerSpec::pconv(3, Activation::Linear),
                LayerSpec::pconv(2, Activation::Linear),
                LayerSpec::Flatten,
                LayerSpec::dense(9, Activation::Linear),
                LayerSpec::Reshape { shape: vec![3, 3, 1] },
                LayerSpec::pconv(2, Activation::Sigmoid),
            ],
        }, LossKind::Mse),
        ("dropout+cce", ModelSpec { input_shape: vec![6], layers: vec![LayerSpec::dense(5, Activation::Sigmoid), LayerSpec::Dropout { keep: 0.7 }, LayerSpec::dense(3, Activation::Linear)] }, LossKind::SparseCce),
    ];
    let mut worst: f64 = 0.0;
    for (name, spec, loss) in kinds {
        let mut m = Model::new(spec).map_err(e2s)?;
        m.init(Init::XavierNormalized, 3);
        let r = gradient_check(&m, loss, GradCheckConfig { batch: 2, ..Default::default() }, 11).map_err(|e| format!("{name}: {e}"))?;
        ensure(r.passed && r.max_rel_error <= 1e-4, || format!("{name}: rel err {:.3e}", r.max_rel_error))?;
        worst = worst.max(r.max_rel_error);
    }
    // single optimizer steps against the textbook formulas
    let one = |w: f64| vec![LayerParams { w: vec![w], b: vec![0.0], fan_in: 1, fan_out: 1 }];
    let g = |v: f64| vec![LayerParams { w: vec![v], b: vec![0.0], fan_in: 1, fan_out: 1 }];
    let mut p = one(0.5);
    OptimizerState::new(OptimizerConfig::Sgd { lr: 0.1 }, 2).step_params(&mut p, &g(2.0)).map_err(e2s)?;
    ensure((p[0].w[0] - 0.3).abs() <= 1e-12, || format!("sgd step gave {}", p[0].w[0]))?;
    let (lr, b1, b2, eps) = (0.001, 0.9, 0.999, 1e-8);
    let mut st = OptimizerState::new(OptimizerConfig::adam(lr), 2);
    let mut p = one(0.5);
    let (mut w, mut m, mut v) = (0.5f64, 0.0f64, 0.0f64);
    for (t, grad) in [(1, 2.0), (2, -1.0), (3, 0.25)] {
        st.step_params(&mut p, &g(grad)).map_err(e2s)?;
        m = b1 * m + (1.0 - b1) * grad;
        v = b2 * v + (1.0 - b2) * grad * grad;
        let mh = m / (1.0 - f64::powi(b1, t));
        let vh = v / (1.0 - f64::powi(b2, t));
        w -= lr * mh / (vh.sqrt() + eps);
        ensure((p[0].w[0] - w).abs() <= 1e-12, || format!("adam step {t}: {} vs {w}", p[0].w[0]))?;
    }
    let mut rng = SplitMix64::new(4);
    for _ in 0..1000 {
        let z: Vec<f64> = (0..10).map(|_| rng.uniform(-30.0, 30.0)).collect();
        let s = softmax(&z);
        ensure((s.iter().sum::<f64>() - 1.0).abs() <= 1e-12, || "softmax does not sum to 1".into())?;
        let shifted: Vec<f64> = z.iter().map(|x| x + 123.0).collect();
        let s2 = softmax(&shifted);
        ensure(s.iter().zip(&s2).all(|(a, b)| (a - b).abs() <= 1e-12), || "softmax not shift invariant".into())?;
    }
    Ok(format!("worst gradient rel err {worst:.2e}; optimizer steps and softmax within 1e-12"))
}

// ---------------------------------------------------------------------------

const TRAIN_N: usize = 2000;
const VAL_N: usize = 500;
const SEED: u64 = 1;

fn trend_config(seed: u64) -> TrainConfig {
    TrainConfig {
        lr: 0.001,
        batch_size: 100,
        epochs: 100,
        seed,
        optimizer: OptimizerKind::Adam,
        init: Init::XavierUniform,
        checkpoint: None,
        lr_decay: None,
    }
}

struct Trained {
    model: Model,
    r2: f64,
    val_cipher: Vec<GrayImage>,
}

fn train_decryptor(train_plain: &IdxImages, val_plain: &IdxImages, spec: &PatternSpec, rounds: usize, seed: u64) -> Result<Trained, String> {
    let c = build_pbox_corpus(train_plain, val_plain, spec, rounds).map_err(e2s)?;
    let tr = ImagePairSource::new(&c.train_cipher.images, &c.train_plain.images).map_err(e2s)?;
    let va = ImagePairSource::new(&c.test_cipher.images, &c.test_plain.images).map_err(e2s)?;
    let out = train(AttackTask::Decryptor, &tr, Some(&va), &trend_config(seed)).map_err(e2s)?;
    let r2 = out.report.best_val.as_ref().map(|m| m.r2).ok_or("no validation metrics")?;
    Ok(Trained { model: out.model, r2, val_cipher: c.test_cipher.images })
}

struct Shared {
    mnist_train: IdxImages,
    mnist_val: IdxImages,
    cml: Option<Trained>,
    logistic: Option<Trained>,
}

fn attack_trend(s: &mut Shared) -> Check {
    let cml = train_decryptor(&s.mnist_train, &s.mnist_val, &PatternSpec::preset(PatternKind::Cml), 1, SEED)?;
    let logistic = train_decryptor(&s.mnist_train, &s.mnist_val, &PatternSpec::preset(PatternKind::Logistic), 16, SEED)?;
    let (a, b) = (cml.r2, logistic.r2);
    s.cml = Some(cml);
    s.logistic = Some(logistic);
    let detail = format!("R2 CML 1 round = {a:.4} (need >= 0.90), logistic 16 rounds = {b:.4} (need < {a:.4})");
    if a >= 0.90 && b < a {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn transfer(s: &Shared) -> Check {
    let fashion = idx("fashion", "t10k-images-idx3-ubyte")?.take(VAL_N);
    let spec = PatternSpec::preset(PatternKind::Cml);
    let key = generate_schedule(&spec, fashion.dims, 1).map_err(e2s)?;
    let cipher = fashion.images.iter().map(|im| apply_pbox(im, &key[0])).collect::<Result<Vec<_>, _>>().map_err(e2s)?;
    let val = ImagePairSource::new(&cipher, &fashion.images).map_err(e2s)?;
    let mut ratios = Vec::new();
    for seed in [1u64, 2, 3] {
        let trained = match (&s.cml, seed) {
            (Some(t), 1) => t.model.clone(),
            _ => train_decryptor(&s.mnist_train, &s.mnist_val, &spec, 1, seed)?.model,
        };
        let mut cfg = trend_config(seed);
        cfg.epochs = 0;
        let out = transfer_train(&trained, AttackTask::Decryptor, &val, Some(&val), &cfg).map_err(e2s)?;
        ensure(out.report.history.is_empty(), || "zero-epoch transfer trained".into())?;
        let transfer_mse = out.report.best_val.ok_or("no metrics")?.mse;
        let mut fresh = instantiate(build_decryptor()).map_err(e2s)?;
        fresh.init(Init::XavierUniform, init_seed(seed));
        let fresh_mse = evaluate(&fresh, &val, LossKind::Mse, OutputHead::Identity, 256).map_err(e2s)?.mse;
        ratios.push((seed, fresh_mse, transfer_mse, fresh_mse / transfer_mse));
    }
    let detail = ratios
        .iter()
        .map(|(s, f, t, r)| format!("seed {s}: {f:.4}/{t:.5} = {r:.1}x"))
        .collect::<Vec<_>>()
        .join(", ");
    if ratios.iter().all(|r| r.3 >= 5.0) {
        Ok(detail)
    } else {
        Err(format!("{detail} (need >= 5x)"))
    }
}

fn evaluation(s: &Shared) -> Check {
    let train_imgs = idx("mnist", "train-images-idx3-ubyte")?;
    let train_lbl = labels("mnist", "train-labels-idx1-ubyte")?;
    let test_imgs = idx("mnist", "t10k-images-idx3-ubyte")?;
    let test_lbl = labels("mnist", "t10k-labels-idx1-ubyte")?;
    let cfg = ClassifierConfig { seed: SEED, ..Default::default() };
    let (clf, rep) = train_measurement_classifier(&train_imgs.images, &train_lbl, &test_imgs.images, &test_lbl, &cfg).map_err(e2s)?;
    ensure(rep.test_accuracy >= 0.97, || format!("classifier test accuracy {:.4} < 0.97", rep.test_accuracy))?;
    let noise = noise_images(1000, test_imgs.dims, 99);
    let noise_acc = classify_predictions(&clf, &noise, &test_lbl[..1000]).map_err(e2s)?.overall;
    ensure((noise_acc - 0.10).abs() <= 0.05, || format!("noise accuracy {noise_acc:.3} outside 0.10 +- 0.05"))?;
    let mut rng = SplitMix64::new(7);
    for _ in 0..1000 {
        let dims = Dims::new(1 + rng.below(32) as usize, 1 + rng.below(32) as usize).unwrap();
        let a = random_image(dims, &mut rng);
        let mut b = a.clone();
        for px in b.pixels_mut().iter_mut() {
            if rng.bernoulli(0.5) {
                *px = rng.next_u32() as u8;
            }
        }
        let p = PBox::new(dims, rng.permutation(dims.cells())).unwrap();
        let before = dissimilarity(&a, &b).map_err(e2s)?;
        let after = dissimilarity(&apply_pbox(&a, &p).unwrap(), &apply_pbox(&b, &p).unwrap()).map_err(e2s)?;
        ensure(before == after, || format!("dissimilarity changed under a shared permutation on {dims}"))?;
    }
    let mut detail = format!(
        "classifier test accuracy {:.4} (train {:.4}), noise accuracy {noise_acc:.3}, 1000 pairs invariant",
        rep.test_accuracy, rep.train_accuracy
    );
    // classifier scores of the two decryptors trained for the trend check
    if let (Some(c), Some(l)) = (&s.cml, &s.logistic) {
        let val_lbl = &test_lbl[..VAL_N];
        let acc = |t: &Trained| -> Result<f64, String> {
            let pred = predict_images(&t.model, &t.val_cipher).map_err(e2s)?;
            Ok(classify_predictions(&clf, &pred, val_lbl).map_err(e2s)?.overall)
        };
        detail.push_str(&format!(
            "; on decrypted images: CML 1 round {:.4}, logistic 16 rounds {:.4}",
            acc(c)?,
            acc(l)?
        ));
    }
    Ok(detail)
}

fn ga_recovery() -> Check {
    let dims = Dims::new(3, 3).unwrap();
    let mut recovered = 0;
    let mut gens = Vec::new();
    for seed in 0..10u64 {
        let mut rng = SplitMix64::stream(1000, seed);
        // distinct intensities so that the key is identifiable
        let values: Vec<u8> = rng.permutation(256).into_iter().take(9).map(|v| v as u8).collect();
        let template = GrayImage::new(dims, values).unwrap();
        let key = PBox::new(dims, rng.permutation(9)).unwrap();
        let cipher = apply_pbox(&template, &key).unwrap();
        let cfg = GaConfig { seed, ..Default::default() };
        let out = run_ga(&cipher, &SyntheticOracle::perfect(template), &cfg).map_err(e2s)?;
        ensure(out.log.windows(2).all(|w| w[1].best_fitness >= w[0].best_fitness), || {
            format!("seed {seed}: best fitness decreased")
        })?;
        ensure(out.log.len() <= 201, || "ran past 200 generations".into())?;
        if out.best.to_pbox() == key.inverse() {
            recovered += 1;
        }
        gens.push(out.log.last().unwrap().generation);
    }
    let detail = format!("{recovered}/10 keys recovered, generations used {gens:?}");
    if recovered >= 9 {
        Ok(detail)
    } else {
        Err(format!("{detail} (need >= 9)"))
    }
}

fn reproducibility(s: &Shared) -> Check {
    let train_set = s.mnist_train.take(200);
    let val = s.mnist_val.take(50);
    let digests = |workers: usize| -> Result<Vec<String>, String> {
        with_workers(workers, || {
            let mut out = Vec::new();
            let pc = build_pbox_corpus(&train_set, &val, &PatternSpec::preset(PatternKind::Logistic), 8).map_err(e2s)?;
            out.push(pc.manifest.digest.clone());
            out.push(build_katan_corpus(3000, 500, 5).map_err(e2s)?.manifest.digest);
            out.push(build_simon_corpus(3000, 500, 100, 5).map_err(e2s)?.manifest.digest);
            let tr = ImagePairSource::new(&pc.train_cipher.images, &pc.train_plain.images).map_err(e2s)?;
            let va = ImagePairSource::new(&pc.test_cipher.images, &pc.test_plain.images).map_err(e2s)?;
            let mut cfg = trend_config(3);
            cfg.epochs = 3;
            let run = train(AttackTask::Decryptor, &tr, Some(&va), &cfg).map_err(e2s)?;
            use sha2::{Digest, Sha256};
            out.push(hex::encode(Sha256::digest(checkpoint_bytes(&run.model, Some(&run.optimizer)))));
            out.push(hex::encode(Sha256::digest(serde_json::to_vec(&run.report).map_err(|e| e.to_string())?)));
            Ok(out)
        })
    };
    let a = digests(1)?;
    let b = digests(1)?;
    let c = digests(8)?;
    ensure(a == b, || "two runs with one worker differ".into())?;
    ensure(a == c, || "1 and 8 workers differ".into())?;
    Ok("pbox/KATAN/SIMON corpora, checkpoint and report identical across 2 runs and 1 vs 8 workers".into())
}

fn main() {
    // optional name filters, e.g. `cargo test --test acceptance -- ga`
    let filter = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut gate = Gate { failures: 0, skipped: 0, filter };
    let secs = Duration::from_secs;
    gate.run("architecture fidelity", secs(1), architecture);
    gate.run("cipher correctness", secs(30), ciphers);
    gate.run("p-box soundness", secs(60), pbox_soundness);
    gate.run("numeric core", secs(30), numeric_core);
    let shared = (|| -> Result<Shared, String> {
        Ok(Shared {
            mnist_train: idx("mnist", "train-images-idx3-ubyte")?.take(TRAIN_N),
            mnist_val: idx("mnist", "t10k-images-idx3-ubyte")?.take(VAL_N),
            cml: None,
            logistic: None,
        })
    })();
    match shared {
        Ok(mut s) => {
            gate.run("scaled attack trend", secs(20 * 60), || attack_trend(&mut s));
            gate.run("transfer learning", secs(10 * 60), || transfer(&s));
            gate.run("evaluation pipeline", secs(10 * 60), || evaluation(&s));
            gate.run("ga recovery", secs(2 * 60), ga_recovery);
            gate.run("reproducibility", secs(10 * 60), || reproducibility(&s));
        }
        Err(e) => {
            for name in ["scaled attack trend", "transfer learning", "evaluation pipeline"] {
                gate.run(name, secs(1), || Err(e.clone()));
            }
            gate.run("ga recovery", secs(2 * 60), ga_recovery);
            gate.run("reproducibility", secs(1), || Err(e.clone()));
        }
    }
    println!("{} of {} criteria failed", gate.failures, 9 - gate.skipped);
    let strict = std::env::var("PERMATTACK_ACCEPTANCE_STRICT").is_ok_and(|v| v == "1");
    if strict && gate.failures > 0 {
        std::process::exit(1);
    }
}
