use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::json;

use super::config::RunConfig;
use super::load::{load_images, load_lwc, load_lwc_split, task_for};
use super::{CipherArg, Command, SeedArgs};
use crate::attacks::{
    instantiate, predict_bits, predict_images, train, transfer_train, triptych_grid, AttackTask, ImagePairSource,
    TrainOutcome,
};
use crate::data::{
    build_katan_corpus, build_simon_corpus, grid, parse_lwc_file, read_idx, read_idx_labels, read_maybe_gz, write_idx,
    write_pgm, CipherId, IdxImages, KatanRecord, LwcRecord, SimonRecord, KATAN_TRAIN, KATAN_VAL, SIMON_TEST,
    SIMON_TRAIN, SIMON_VAL,
};
use crate::eval::{
    classify_predictions, corpus_histogram, dissimilarity, noise_images, train_measurement_classifier,
    ClassifierConfig, EvalReport, EvalRow,
};
use crate::gakey::{run_ga, search_space_reduction, GaConfig, SyntheticOracle};
use crate::lwc::BitVector;
use crate::ndl::{evaluate, load_checkpoint, save_checkpoint, BatchSource, LossKind, Model};
use crate::permkit::{
    apply_pbox, decrypt_rounds, generate_schedule, load_schedule, save_schedule, Dims, GrayImage, PBox, PatternKind,
    PatternSpec,
};
use crate::rng::{mix, SplitMix64};
use crate::{Error, Result};

pub fn dispatch(cmd: Command) -> Result<()> {
    match cmd {
        Command::GenPbox { pattern, rows, cols, rounds, params, out } => gen_pbox(pattern, rows, cols, rounds, &params, &out),
        Command::Encrypt { input, out, keys, pattern, params, rounds, keys_out } => {
            encrypt(&input, &out, keys.as_deref(), pattern, &params, rounds, keys_out.as_deref())
        }
        Command::Decrypt { input, keys, out } => decrypt(&input, &keys, &out),
        Command::MakeLwc { cipher, train, val, test, out, audit, seed } => {
            make_lwc(cipher, train, val, test, &out, audit, &seed)
        }
        Command::Train { config, task, seed } => cmd_train(&config, task, &seed),
        Command::Transfer { config, from, seed } => cmd_transfer(&config, &from, &seed),
        Command::Predict { checkpoint, input, plain, out, limit, count, threshold } => {
            predict(&checkpoint, &input, plain.as_deref(), &out, limit, count, threshold)
        }
        Command::Eval { run, classifier_data, classifier, classifier_limit, classifier_epochs, noise, out, seed } => {
            eval(&run, classifier_data.as_deref(), classifier.as_deref(), classifier_limit, classifier_epochs, noise, &out, &seed)
        }
        Command::Ga { rows, cols, images, index, pattern, params, population, generations, mutation, elitism, min_run, out, seed } => {
            let ga = GaConfig {
                population,
                max_generations: generations,
                mutation_prob: mutation,
                elitism: elitism.unwrap_or(population / 2),
                seed: 0,
            };
            cmd_ga(rows, cols, images.as_deref(), index, pattern, &params, ga, min_run, &out, &seed)
        }
    }
}

/// `--seed`, else the config's seed, else an error under `--strict`, else
/// the clock.
fn resolve_seed(args: &SeedArgs, fallback: Option<u64>) -> Result<u64> {
    if let Some(s) = args.seed.or(fallback) {
        return Ok(s);
    }
    if args.strict {
        return Err(Error::Config("--strict requires --seed".into()));
    }
    let t = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_nanos() as u64).unwrap_or(0);
    log::warn!("no seed given, using time-derived seed {t}");
    Ok(t)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// `<file>.run.json` next to a single-file output.
fn sidecar(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".run.json");
    PathBuf::from(s)
}

fn sha256_file(path: &Path) -> Result<String> {
    use sha2::{Digest, Sha256};
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(hex::encode(Sha256::digest(bytes)))
}

fn gen_pbox(pattern: PatternKind, rows: usize, cols: usize, rounds: usize, params: &[(String, String)], out: &Path) -> Result<()> {
    let dims = Dims::new(rows, cols)?;
    let spec = PatternSpec::from_params(pattern, params)?;
    let keys = generate_schedule(&spec, dims, rounds)?;
    save_schedule(out, &keys)?;
    // reading back re-validates every table
    let back = load_schedule(out)?;
    let digest = sha256_file(out)?;
    write_json(&sidecar(out), &json!({ "command": "gen-pbox", "generator": spec, "dims": dims, "rounds": rounds, "sha256": digest }))?;
    println!("{}: {} bijective {dims} tables, sha256 {digest}", out.display(), back.len());
    Ok(())
}

fn compose(keys: &[PBox]) -> Result<PBox> {
    let first = keys.first().ok_or_else(|| Error::invalid("empty key schedule"))?;
    keys[1..].iter().try_fold(first.clone(), |acc, k| acc.then(k))
}

#[allow(clippy::too_many_arguments)]
fn encrypt(
    input: &Path,
    out: &Path,
    keys: Option<&Path>,
    pattern: Option<PatternKind>,
    params: &[(String, String)],
    rounds: Option<usize>,
    keys_out: Option<&Path>,
) -> Result<()> {
    let images = read_idx(input)?;
    let (schedule, spec) = match (keys, pattern) {
        (Some(k), _) => (load_schedule(k)?, None),
        (None, Some(p)) => {
            let spec = PatternSpec::from_params(p, params)?;
            let rounds = rounds.ok_or_else(|| Error::Config("--rounds is required with --pattern".into()))?;
            (generate_schedule(&spec, images.dims, rounds)?, Some(spec))
        }
        (None, None) => return Err(Error::Config("give --keys or --pattern".into())),
    };
    let p = compose(&schedule)?;
    let cipher = images.images.iter().map(|im| apply_pbox(im, &p)).collect::<Result<Vec<_>>>()?;
    write_idx(&IdxImages::new(images.dims, cipher)?, out)?;
    if let Some(k) = keys_out {
        save_schedule(k, &schedule)?;
    }
    let digest = sha256_file(out)?;
    write_json(
        &sidecar(out),
        &json!({ "command": "encrypt", "input": input, "keys": keys, "generator": spec, "rounds": schedule.len(), "sha256": digest }),
    )?;
    println!("{}: {} images, {} rounds, sha256 {digest}", out.display(), images.len(), schedule.len());
    Ok(())
}

fn decrypt(input: &Path, keys: &Path, out: &Path) -> Result<()> {
    let images = read_idx(input)?;
    let schedule = load_schedule(keys)?;
    let plain = decrypt_rounds(&images.images, &schedule)?;
    write_idx(&IdxImages::new(images.dims, plain)?, out)?;
    let digest = sha256_file(out)?;
    write_json(&sidecar(out), &json!({ "command": "decrypt", "input": input, "keys": keys, "sha256": digest }))?;
    println!("{}: {} images, sha256 {digest}", out.display(), images.len());
    Ok(())
}

fn audit_records<R: LwcRecord + PartialEq>(
    file: &[(BitVector, BitVector)],
    seed: u64,
    n: usize,
    consistent: impl Fn(&R) -> bool,
) -> Result<usize> {
    let n = n.min(file.len());
    for (i, (input, target)) in file.iter().take(n).enumerate() {
        let r = R::generate(seed, i as u64);
        if !consistent(&r) || &r.input() != input || &r.target() != target {
            return Err(Error::Parse {
                offset: i as u64,
                detail: format!("record {i} does not re-encrypt to the stored ciphertext"),
            });
        }
    }
    Ok(n)
}

#[allow(clippy::too_many_arguments)]
fn make_lwc(
    cipher: CipherArg,
    train: Option<usize>,
    val: Option<usize>,
    test: Option<usize>,
    out: &Path,
    audit: Option<usize>,
    seed: &SeedArgs,
) -> Result<()> {
    let seed = resolve_seed(seed, None)?;
    let manifest = match cipher {
        CipherArg::Katan => {
            if test.is_some() {
                return Err(Error::Config("KATAN corpora have no test split".into()));
            }
            let c = build_katan_corpus(train.unwrap_or(KATAN_TRAIN), val.unwrap_or(KATAN_VAL), seed)?;
            c.save(out)?;
            c.manifest
        }
        CipherArg::Simon => {
            let c = build_simon_corpus(
                train.unwrap_or(SIMON_TRAIN),
                val.unwrap_or(SIMON_VAL),
                test.unwrap_or(SIMON_TEST),
                seed,
            )?;
            c.save(out)?;
            c.manifest
        }
    };
    if let Some(n) = audit {
        let (id, pairs) = parse_lwc_file(&read_maybe_gz(&out.join("train.lwc"))?)?;
        let checked = match id {
            CipherId::Katan32 => audit_records::<KatanRecord>(&pairs, seed, n, KatanRecord::is_consistent)?,
            CipherId::Simon32 => audit_records::<SimonRecord>(&pairs, seed, n, SimonRecord::is_consistent)?,
        };
        println!("audit: {checked} records re-encrypted, all consistent");
    }
    write_json(
        &out.join("run-config.json"),
        &json!({ "command": "make-lwc", "cipher": manifest.cipher, "counts": manifest.counts, "seed": seed }),
    )?;
    println!("{}: {} corpus, digest {}", out.display(), manifest.cipher.as_deref().unwrap_or("?"), manifest.digest);
    Ok(())
}

fn save_outcome(cfg: &RunConfig, resolved: &RunConfig, outcome: &TrainOutcome) -> Result<()> {
    write_json(&cfg.output.join("report.json"), &outcome.report)?;
    write_json(&cfg.output.join("run-config.json"), resolved)?;
    if let Some(m) = &outcome.report.best_val {
        println!(
            "best epoch {}: val loss {:.6}, r2 {:.4}, mse {:.6}",
            outcome.report.best_epoch, m.loss, m.r2, m.mse
        );
    }
    Ok(())
}

fn run_training(cfg: &RunConfig, seed: u64, start: Option<&Model>) -> Result<()> {
    let mut tc = cfg.train_config(seed);
    tc.checkpoint = Some(cfg.output.join("best.ndl"));
    tc.validate(start.is_some())?;
    create_dir(&cfg.output)?;
    let resolved = cfg.resolved(seed);
    let go = |tr: &dyn BatchSource, va: &dyn BatchSource| match start {
        Some(m) => transfer_train(m, cfg.task, tr, Some(va), &tc),
        None => train(cfg.task, tr, Some(va), &tc),
    };
    let outcome = match cfg.task {
        AttackTask::Decryptor => {
            let d = load_images(cfg)?;
            let tr = ImagePairSource::new(&d.train_cipher, &d.train_plain)?;
            let va = ImagePairSource::new(&d.val_cipher, &d.val_plain)?;
            go(&tr, &va)?
        }
        AttackTask::Katan | AttackTask::Simon => {
            let (tr, va) = load_lwc(cfg)?;
            go(&tr, &va)?
        }
    };
    save_outcome(cfg, &resolved, &outcome)
}

fn cmd_train(config: &Path, task: Option<AttackTask>, seed: &SeedArgs) -> Result<()> {
    let cfg = RunConfig::load(config)?;
    if let Some(t) = task {
        if t != cfg.task {
            return Err(Error::Config(format!("--task {} but the config says {}", t.name(), cfg.task.name())));
        }
    }
    let seed = resolve_seed(seed, cfg.seed)?;
    // fails fast on any architecture drift
    let model = instantiate(cfg.task.spec())?;
    println!("{}: {} trainable parameters", cfg.task.name(), model.param_count());
    run_training(&cfg, seed, None)
}

fn cmd_transfer(config: &Path, from: &Path, seed: &SeedArgs) -> Result<()> {
    let cfg = RunConfig::load(config)?;
    let seed = resolve_seed(seed, cfg.seed)?;
    let (start, _) = load_checkpoint(from)?;
    run_training(&cfg, seed, Some(&start))
}

fn predict(
    checkpoint: &Path,
    input: &Path,
    plain: Option<&Path>,
    out: &Path,
    limit: Option<usize>,
    count: usize,
    threshold: f64,
) -> Result<()> {
    let (model, _) = load_checkpoint(checkpoint)?;
    create_dir(out)?;
    let bytes = read_maybe_gz(input)?;
    if bytes.starts_with(b"LWC1") {
        let (id, src) = load_lwc_split(input, limit)?;
        let task = task_for(id);
        if model.spec() != &task.spec() {
            return Err(Error::ArchitectureMismatch(format!("checkpoint is not a {} model", task.name())));
        }
        let idx: Vec<usize> = (0..src.len()).collect();
        let bits = predict_bits(&model, task.head(), &src.inputs(&idx)?, threshold)?;
        let mut text = String::new();
        let mut agree = 0usize;
        for (b, (_, t)) in bits.iter().zip(src.pairs()) {
            text.push_str(&hex::encode(b.pack()));
            text.push('\n');
            agree += b.bits().iter().zip(t.bits()).filter(|(x, y)| x == y).count();
        }
        let path = out.join("predictions.txt");
        std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
        let total = bits.len() * bits.first().map_or(0, |b| b.width());
        let accuracy = agree as f64 / total.max(1) as f64;
        write_json(&out.join("summary.json"), &json!({ "records": bits.len(), "bit_accuracy": accuracy, "threshold": threshold }))?;
        println!("{} records, bit accuracy {accuracy:.4}", bits.len());
    } else {
        let cipher = read_idx(input)?;
        let cipher = limit.map_or(cipher.clone(), |n| cipher.take(n));
        let predicted = predict_images(&model, &cipher.images)?;
        write_idx(&IdxImages::new(cipher.dims, predicted.clone())?, &out.join("predicted-idx3-ubyte"))?;
        let k = count.min(predicted.len());
        let mut summary = json!({ "images": predicted.len() });
        let sheet = match plain {
            Some(p) => {
                let plain = read_idx(p)?.take(cipher.len());
                let src = ImagePairSource::new(&cipher.images, &plain.images)?;
                let m = evaluate(&model, &src, LossKind::Mse, Default::default(), 256)?;
                let dd: f64 = predicted
                    .iter()
                    .zip(&plain.images)
                    .map(|(a, b)| dissimilarity(a, b).map(|r| r.rate))
                    .sum::<Result<f64>>()?
                    / predicted.len() as f64;
                summary = json!({ "images": predicted.len(), "mse": m.mse, "r2": m.r2, "mean_dissimilarity_rate": dd });
                println!("{} images, r2 {:.4}, mse {:.6}", predicted.len(), m.r2, m.mse);
                triptych_grid(&cipher.images[..k], &predicted[..k], &plain.images[..k])?
            }
            None => grid(&cipher.images[..k].iter().zip(&predicted[..k]).map(|(c, p)| vec![c.clone(), p.clone()]).collect::<Vec<_>>())?,
        };
        write_pgm(&out.join("triptych.pgm"), &sheet)?;
        write_json(&out.join("summary.json"), &summary)?;
    }
    write_json(
        &out.join("run-config.json"),
        &json!({ "command": "predict", "checkpoint": checkpoint, "input": input, "plain": plain, "limit": limit, "threshold": threshold }),
    )
}

fn find_idx(dir: &Path, stem: &str) -> Result<PathBuf> {
    let plain = dir.join(stem);
    let gz = dir.join(format!("{stem}.gz"));
    if plain.exists() {
        Ok(plain)
    } else if gz.exists() {
        Ok(gz)
    } else {
        Err(Error::io(plain, std::io::Error::new(std::io::ErrorKind::NotFound, "no such IDX file")))
    }
}

#[allow(clippy::too_many_arguments)]
fn eval(
    runs: &[PathBuf],
    classifier_data: Option<&Path>,
    classifier: Option<&Path>,
    limit: Option<usize>,
    epochs: usize,
    noise: usize,
    out: &Path,
    seed: &SeedArgs,
) -> Result<()> {
    let seed = resolve_seed(seed, None)?;
    create_dir(out)?;
    let mut report = EvalReport::default();
    let (clf, clf_acc) = match (classifier, classifier_data) {
        (Some(p), _) => (load_checkpoint(p)?.0, None),
        (None, Some(dir)) => {
            let take = |im: IdxImages| limit.map_or(im.clone(), |n| im.take(n));
            let tr = take(read_idx(&find_idx(dir, "train-images-idx3-ubyte")?)?);
            let mut trl = read_idx_labels(&find_idx(dir, "train-labels-idx1-ubyte")?)?;
            trl.truncate(tr.len());
            let te = read_idx(&find_idx(dir, "t10k-images-idx3-ubyte")?)?;
            let tel = read_idx_labels(&find_idx(dir, "t10k-labels-idx1-ubyte")?)?;
            let cfg = ClassifierConfig { epochs, seed: mix(seed, 1), ..Default::default() };
            let (m, r) = train_measurement_classifier(&tr.images, &trl, &te.images, &tel, &cfg)?;
            save_checkpoint(&m, None, &out.join("classifier.ndl"))?;
            println!("classifier: train accuracy {:.4}, test accuracy {:.4}", r.train_accuracy, r.test_accuracy);
            (m, Some(r.test_accuracy))
        }
        (None, None) => return Err(Error::Config("give --classifier or --classifier-data".into())),
    };
    report.classifier_test_accuracy = clf_acc;
    let clf_dims = Dims::new(clf.input_shape()[0], clf.input_shape()[1])?;
    let noise_imgs = noise_images(noise.max(1), clf_dims, mix(seed, 2));
    let noise_labels: Vec<u8> = (0..noise_imgs.len()).map(|i| SplitMix64::stream(mix(seed, 3), i as u64).below(10) as u8).collect();
    report.noise_accuracy = Some(classify_predictions(&clf, &noise_imgs, &noise_labels)?.overall);
    for dir in runs {
        let cfg = RunConfig::load(&dir.join("run-config.json"))?;
        let (model, _) = load_checkpoint(&dir.join("best.ndl"))?;
        let (metrics, acc) = match cfg.task {
            AttackTask::Decryptor => {
                let d = load_images(&cfg)?;
                let src = ImagePairSource::new(&d.val_cipher, &d.val_plain)?;
                let m = evaluate(&model, &src, LossKind::Mse, Default::default(), 256)?;
                let predicted = predict_images(&model, &d.val_cipher)?;
                let acc = match &d.val_labels {
                    Some(l) => {
                        let table = classify_predictions(&clf, &predicted, l)?;
                        if report.per_class_accuracy.is_none() {
                            report.per_class_accuracy = Some(table.per_class());
                        }
                        Some(table.overall)
                    }
                    None => None,
                };
                if report.histograms.is_empty() {
                    for (name, set) in [("plain", &d.val_plain), ("cipher", &d.val_cipher), ("predicted", &predicted)] {
                        report.histograms.push((name.into(), corpus_histogram(set.iter()).to_vec()));
                    }
                }
                (m, acc)
            }
            AttackTask::Katan | AttackTask::Simon => {
                let (_, va) = load_lwc(&cfg)?;
                (evaluate(&model, &va, LossKind::Mse, cfg.task.head(), 256)?, None)
            }
        };
        report.rows.push(EvalRow {
            pattern: cfg.pattern_name(),
            rounds: cfg.rounds.unwrap_or(0),
            loss: metrics.loss,
            r2: metrics.r2,
            mse: metrics.mse,
            classifier_accuracy: acc,
        });
    }
    report.save_json(&out.join("eval.json"))?;
    report.save_csv(&out.join("eval.csv"))?;
    write_json(
        &out.join("run-config.json"),
        &json!({ "command": "eval", "runs": runs, "classifier": classifier, "classifier_data": classifier_data,
                 "classifier_limit": limit, "classifier_epochs": epochs, "noise": noise, "seed": seed }),
    )?;
    print!("{}", String::from_utf8_lossy(&report.csv_bytes()?));
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_ga(
    rows: usize,
    cols: usize,
    images: Option<&Path>,
    index: usize,
    pattern: Option<PatternKind>,
    params: &[(String, String)],
    mut ga: GaConfig,
    min_run: usize,
    out: &Path,
    seed: &SeedArgs,
) -> Result<()> {
    let seed = resolve_seed(seed, None)?;
    ga.seed = mix(seed, 1);
    let template = match images {
        Some(p) => {
            let set = read_idx(p)?;
            set.images
                .get(index)
                .cloned()
                .ok_or_else(|| Error::invalid(format!("image index {index} out of range 0..{}", set.len())))?
        }
        None => {
            let dims = Dims::new(rows, cols)?;
            let mut rng = SplitMix64::stream(seed, 0);
            GrayImage::new(dims, (0..dims.cells()).map(|_| rng.next_u32() as u8).collect())?
        }
    };
    let dims = template.dims();
    let key = match pattern {
        Some(p) => generate_schedule(&PatternSpec::from_params(p, params)?, dims, 1)?.remove(0),
        None => PBox::new(dims, SplitMix64::stream(seed, 1).permutation(dims.cells()))?,
    };
    let cipher = apply_pbox(&template, &key)?;
    let oracle = SyntheticOracle::new(template.clone(), min_run)?;
    let outcome = run_ga(&cipher, &oracle, &ga)?;
    create_dir(out)?;
    outcome.save_log(&out.join("log.csv"))?;
    let best_key = outcome.best.to_pbox();
    save_schedule(&out.join("best.pbx"), std::slice::from_ref(&best_key))?;
    let recovered = apply_pbox(&cipher, &best_key)? == template;
    let space = search_space_reduction(dims, &[(1, outcome.best.fixed_count())])?;
    let last = outcome.log.last().expect("generation 0 is always logged");
    write_json(
        &out.join("summary.json"),
        &json!({ "converged": outcome.converged, "recovered": recovered, "generations": last.generation,
                 "best_fitness": last.best_fitness, "residual_search_space_log10": space.log10 }),
    )?;
    write_json(
        &out.join("run-config.json"),
        &json!({ "command": "ga", "dims": dims, "images": images, "index": index, "pattern": pattern.map(|p| p.name()),
                 "params": params, "ga": ga, "min_run": min_run, "seed": seed }),
    )?;
    println!(
        "generation {}: best fitness {:.4}, template recovered: {recovered}",
        last.generation, last.best_fitness
    );
    Ok(())
}
