use std::path::{Path, PathBuf};

use log::{info, warn};
use serde::Serialize;

use score_core::data::{
    class_list_path, generate_synthetic, load_attribute_matrix, load_checkpoint, load_class_list, load_codes,
    load_embeddings, load_features, load_taxonomy, save_attribute_matrix, save_checkpoint, save_codes,
    save_features, save_split, spec_sidecar_path, write_text, Checkpoint, FeatureSet, Rescaling, SyntheticConfig,
};
use score_core::diagnostics::{alignment_distance, regularizer_sweep, SweepAxis, SweepTask};
use score_core::model::{Mode, ModelConfig, ScoreModel};
use score_core::optim::{train, EpochRecord, TrainConfig};
use score_core::semantics::{CodeMatrix, SemanticEncoder, SemanticSource, SemanticSpec};
use score_core::zeroshot::{evaluate, RisRule};

use crate::args::{
    AxisArg, DiagnoseArgs, EncodeArgs, EvalArgs, OptimArgs, SweepArgs, SynthArgs, TrainArgs,
};
use crate::error::CliError;

/// Files a command read and wrote, and where its manifest goes.
#[derive(Debug, Default)]
pub struct Outcome {
    pub inputs: Vec<PathBuf>,
    pub outputs: Vec<PathBuf>,
    pub manifest: PathBuf,
    pub seed: Option<u64>,
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut name = path.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(suffix);
    path.with_file_name(name)
}

fn codes_inputs(path: &Path) -> [PathBuf; 2] {
    [path.to_path_buf(), spec_sidecar_path(path)]
}

fn features_inputs(path: &Path) -> Vec<PathBuf> {
    let side = class_list_path(path);
    let mut out = vec![path.to_path_buf()];
    if side.exists() {
        out.push(side);
    }
    out
}

fn write_codes(path: &Path, spec: &SemanticSpec<f64>, codes: &CodeMatrix<f64>, out: &mut Outcome) -> Result<(), CliError> {
    save_codes(path, spec, codes)?;
    out.outputs.extend(codes_inputs(path));
    Ok(())
}

#[derive(Serialize)]
struct EncodeMeta {
    semantics: usize,
    code_dim: usize,
    attribute_rescaling: Option<Rescaling>,
    embedding_fallbacks: Vec<(String, Vec<String>)>,
}

pub fn encode(args: &EncodeArgs) -> Result<Outcome, CliError> {
    if args.attributes.is_none() && args.taxonomy.is_none() && args.embeddings.is_empty() {
        return Err(CliError::usage(
            "at least one of --attributes, --taxonomy or --embeddings is required",
        ));
    }
    let mut out = Outcome {
        manifest: with_suffix(&args.out, ".manifest.json"),
        ..Outcome::default()
    };
    let classes = load_class_list(&args.classes)?;
    out.inputs.push(args.classes.clone());
    let zs_classes = match &args.zs_classes {
        Some(p) => {
            out.inputs.push(p.clone());
            Some(load_class_list(p)?)
        }
        None => None,
    };
    let mut all = classes.clone();
    all.extend(zs_classes.iter().flatten().cloned());

    let mut sources = Vec::new();
    let mut meta = EncodeMeta {
        semantics: 0,
        code_dim: 0,
        attribute_rescaling: None,
        embedding_fallbacks: Vec::new(),
    };
    if let Some(p) = &args.attributes {
        let m = load_attribute_matrix(p, !args.continuous)?;
        out.inputs.push(p.clone());
        meta.attribute_rescaling = Some(m.rescaling);
        sources.push(SemanticSource::Attributes {
            table: m.table,
            binary: !args.continuous,
        });
    }
    if let Some(p) = &args.taxonomy {
        sources.push(SemanticSource::Taxonomy(load_taxonomy(p)?));
        out.inputs.push(p.clone());
    }
    if !args.embeddings.is_empty() {
        let mut tables = Vec::new();
        for p in &args.embeddings {
            let name = p.file_stem().map_or("embedding".into(), |s| s.to_string_lossy().into_owned());
            let t = load_embeddings(p, &all, &name)?;
            meta.embedding_fallbacks.push((name, t.fallbacks.clone()));
            tables.push(t);
            out.inputs.push(p.clone());
        }
        sources.push(SemanticSource::Embeddings(tables));
    }

    let encoder = SemanticEncoder::new(sources, &classes)?;
    let spec = encoder.spec();
    meta.semantics = spec.len();
    meta.code_dim = spec.total_dim;
    write_codes(&args.out, spec, &encoder.encode(&classes)?, &mut out)?;
    if let (Some(zs), Some(path)) = (&zs_classes, &args.out_zs) {
        write_codes(path, spec, &encoder.encode(zs)?, &mut out)?;
    }
    let meta_path = with_suffix(&args.out, ".meta.json");
    write_text(&meta_path, &(serde_json::to_string_pretty(&meta).expect("meta serializes") + "\n"))?;
    out.outputs.push(meta_path);
    println!("semantics={} code_dim={} classes={}", spec.len(), spec.total_dim, classes.len());
    Ok(out)
}

fn train_config(optim: &OptimArgs, seed: u64) -> TrainConfig {
    TrainConfig {
        learning_rate: optim.lr,
        momentum: optim.momentum,
        weight_decay: optim.weight_decay,
        epochs: optim.epochs,
        batch_size: optim.batch,
        lr_decay: optim.lr_decay,
        seed,
        hidden: optim.hidden.clone(),
        omega_update: optim.omega_update.into(),
        track_train_mca: true,
    }
}

/// Feature file with labels in the order of `codes`; per-sample attribute
/// columns are kept only on request.
fn load_labeled(path: &Path, codes: &CodeMatrix<f64>, sample_attributes: bool) -> Result<FeatureSet, CliError> {
    let mut set = load_features(path, None)?.reindex(&codes.class_names)?;
    if sample_attributes {
        if set.attributes.is_none() {
            return Err(CliError::usage(format!(
                "--sample-attributes given but {} has no attribute columns",
                path.display()
            )));
        }
    } else {
        set.attributes = None;
    }
    Ok(set)
}

fn history_csv(history: &[EpochRecord]) -> String {
    let mut out = String::from("epoch,learning_rate,objective,classification,auxiliary,omega,train_mca\n");
    for r in history {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.epoch, r.learning_rate, r.objective, r.classification, r.auxiliary, r.omega, r.train_mca
        ));
    }
    out
}

pub fn train_cmd(args: &TrainArgs) -> Result<Outcome, CliError> {
    let model_config = ModelConfig {
        mode: args.mode.into(),
        lambda: args.lambda,
        beta: args.beta,
        codeword_path: args.optim.codeword_path.into(),
        omega_form: args.optim.omega.into(),
    };
    model_config.validate()?;
    let config = train_config(&args.optim, args.seed);
    config.validate()?;

    let (spec, codes) = load_codes(&args.codes)?;
    let set = load_labeled(&args.features, &codes, args.optim.sample_attributes)?;
    let data = set.dataset()?;
    let model = ScoreModel::new(spec.clone(), codes.clone(), model_config)?;
    info!("training {} on {} samples, {} classes", model_config.mode, data.len(), codes.num_classes());
    let outcome = train(&model, &data, &config)?;

    let mut out = Outcome {
        manifest: with_suffix(&args.out_checkpoint, ".manifest.json"),
        seed: Some(args.seed),
        ..Outcome::default()
    };
    out.inputs.extend(features_inputs(&args.features));
    out.inputs.extend(codes_inputs(&args.codes));
    save_checkpoint(
        &args.out_checkpoint,
        &Checkpoint {
            model_config,
            train_config: config.clone(),
            spec,
            codes,
            params: outcome.params,
            state: outcome.state,
            epochs_completed: config.epochs,
        },
    )?;
    let history = args
        .history
        .clone()
        .unwrap_or_else(|| with_suffix(&args.out_checkpoint, ".history.csv"));
    write_text(&history, &history_csv(&outcome.history))?;
    out.outputs.push(args.out_checkpoint.clone());
    out.outputs.push(history);
    if let Some(last) = outcome.history.last() {
        println!("epochs={} objective={} train_mca={}", config.epochs, last.objective, last.train_mca);
    }
    Ok(out)
}

pub fn eval_cmd(args: &EvalArgs) -> Result<Outcome, CliError> {
    let ckp = load_checkpoint(&args.checkpoint)?;
    let model = ckp.model()?;
    let is_ris = ckp.model_config.mode == Mode::Ris;
    let rules: Vec<(RisRule, &str)> = match (is_ris, args.ris_rule) {
        (false, Some(_)) => {
            return Err(CliError::usage(format!(
                "--ris-rule applies to RIS checkpoints only; this one was trained in {} mode",
                ckp.model_config.mode
            )))
        }
        (false, None) => vec![(RisRule::LogLikelihood, "")],
        (true, Some(r)) => vec![(r.into(), "")],
        (true, None) => vec![(RisRule::LogLikelihood, ".loglik"), (RisRule::Linear, ".linear")],
    };
    let (zs_spec, zs_codes) = load_codes(&args.codes_zs)?;
    ckp.spec.check_compatible(&zs_spec)?;
    let set = load_labeled(&args.features_zs, &zs_codes, false)?;
    let data = set.dataset()?;

    let mut out = Outcome {
        manifest: args.out_dir.join("manifest.json"),
        ..Outcome::default()
    };
    out.inputs.push(args.checkpoint.clone());
    out.inputs.extend(features_inputs(&args.features_zs));
    out.inputs.extend(codes_inputs(&args.codes_zs));
    for (rule, suffix) in rules {
        let report = evaluate(&model, &ckp.params, &data, &zs_codes, rule)?;
        let kv = args.out_dir.join(format!("report{suffix}.txt"));
        let confusion = args.out_dir.join(format!("confusion{suffix}.csv"));
        let mut text = report.to_kv();
        if is_ris {
            text.push_str(&format!("ris_rule={rule}\n"));
        }
        write_text(&kv, &text)?;
        write_text(&confusion, &report.confusion_csv())?;
        out.outputs.push(kv);
        out.outputs.push(confusion);
        if is_ris {
            println!("zs_mca[{rule}]={}", report.zs_mca);
        } else {
            println!("zs_mca={}", report.zs_mca);
        }
    }
    Ok(out)
}

pub fn diagnose(args: &DiagnoseArgs) -> Result<Outcome, CliError> {
    let (train_spec, train) = load_codes(&args.codes_train)?;
    let (zs_spec, zs) = load_codes(&args.codes_zs)?;
    train_spec.check_compatible(&zs_spec)?;
    let report = alignment_distance(&train, &zs)?;
    write_text(&args.out, &report.to_kv())?;
    println!("mean_distance={} train_rank={}", report.mean_distance, report.train_rank);
    let mut out = Outcome {
        manifest: with_suffix(&args.out, ".manifest.json"),
        outputs: vec![args.out.clone()],
        ..Outcome::default()
    };
    out.inputs.extend(codes_inputs(&args.codes_train));
    out.inputs.extend(codes_inputs(&args.codes_zs));
    Ok(out)
}

/// `requested` (or the machine's parallelism) capped by `SCORE_THREADS`.
pub fn thread_count(requested: Option<usize>) -> Result<usize, CliError> {
    let base = requested.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    if base == 0 {
        return Err(CliError::usage("--threads must be positive"));
    }
    match std::env::var("SCORE_THREADS") {
        Ok(v) => {
            let cap: usize = v
                .trim()
                .parse()
                .ok()
                .filter(|&n| n > 0)
                .ok_or_else(|| CliError::usage(format!("SCORE_THREADS must be a positive integer, got '{v}'")))?;
            Ok(base.min(cap))
        }
        Err(_) => Ok(base),
    }
}

pub fn sweep(args: &SweepArgs) -> Result<Outcome, CliError> {
    let (spec, train_codes) = load_codes(&args.codes)?;
    let (zs_spec, zs_codes) = load_codes(&args.codes_zs)?;
    spec.check_compatible(&zs_spec)?;
    let train_set = load_labeled(&args.features, &train_codes, args.optim.sample_attributes)?;
    let zs_set = load_labeled(&args.features_zs, &zs_codes, false)?;
    let (train_data, zs_data) = (train_set.dataset()?, zs_set.dataset()?);
    let training = train_config(&args.optim, 0);
    training.validate()?;
    let task = SweepTask {
        spec: &spec,
        train_codes: &train_codes,
        train: &train_data,
        zs_codes: &zs_codes,
        zs: &zs_data,
        model: ModelConfig {
            codeword_path: args.optim.codeword_path.into(),
            omega_form: args.optim.omega.into(),
            ..ModelConfig::default()
        },
        training,
        rule: RisRule::LogLikelihood,
    };
    let axis = match args.axis {
        AxisArg::Lambda => SweepAxis::Lambda,
        AxisArg::Beta => SweepAxis::Beta,
    };
    let threads = thread_count(args.threads)?;
    let result = regularizer_sweep(&task, axis, &args.grid, &args.seeds, threads)?;
    write_text(&args.out, &result.to_csv())?;

    let mut summary = String::from("axis,value,median_zs_mca,mean_zs_mca,std_zs_mca,median_delta_vs_rule\n");
    summary.push_str(&format!("rule,,{},,,0\n", result.baseline_rule_mca));
    for (i, v) in result.grid.iter().enumerate() {
        let (mean, std) = result.mean_std_at(i);
        let median = result.median_at(i);
        summary.push_str(&format!(
            "{axis},{v},{median},{mean},{std},{}\n",
            median - result.baseline_rule_mca
        ));
        println!("{axis}={v} median_zs_mca={median} mean={mean} std={std}");
    }
    let summary_path = with_suffix(&args.out, ".summary.csv");
    write_text(&summary_path, &summary)?;

    let mut out = Outcome {
        manifest: with_suffix(&args.out, ".manifest.json"),
        outputs: vec![args.out.clone(), summary_path],
        ..Outcome::default()
    };
    out.inputs.extend(features_inputs(&args.features));
    out.inputs.extend(codes_inputs(&args.codes));
    out.inputs.extend(features_inputs(&args.features_zs));
    out.inputs.extend(codes_inputs(&args.codes_zs));
    Ok(out)
}

pub fn synth(args: &SynthArgs) -> Result<Outcome, CliError> {
    let config = SyntheticConfig {
        q: args.q,
        c_train: args.c_train,
        c_zs: args.c_zs,
        d: args.d,
        n_per_class: args.n,
        noise_sigma: args.sigma,
        misalignment: args.misalignment,
        seed: args.seed,
    };
    let task = generate_synthetic(&config)?;
    let (spec, train_codes, zs_codes) = task.codes()?;
    let dir = &args.out_dir;
    let mut out = Outcome {
        manifest: dir.join("manifest.json"),
        seed: Some(args.seed),
        ..Outcome::default()
    };
    for (name, set) in [("train.csv", &task.train), ("zs.csv", &task.zs)] {
        let p = dir.join(name);
        save_features(&p, set)?;
        out.outputs.push(class_list_path(&p));
        out.outputs.push(p);
    }
    let attributes = dir.join("attributes.csv");
    save_attribute_matrix(&attributes, &task.attributes)?;
    let split = dir.join("split.txt");
    save_split(&split, &task.split)?;
    out.outputs.push(attributes);
    out.outputs.push(split);
    write_codes(&dir.join("codes_train.csv"), &spec, &train_codes, &mut out)?;
    write_codes(&dir.join("codes_zs.csv"), &spec, &zs_codes, &mut out)?;
    let report = alignment_distance(&train_codes, &zs_codes)?;
    let alignment = dir.join("alignment.txt");
    write_text(&alignment, &report.to_kv())?;
    out.outputs.push(alignment);
    if report.mean_distance < 0.5 && args.misalignment > 0.0 && report.train_rank == args.q {
        warn!("training codes span the code space; misalignment had no effect");
    }
    println!(
        "train_samples={} zs_samples={} mean_alignment_distance={}",
        task.train.len(),
        task.zs.len(),
        report.mean_distance
    );
    Ok(out)
}
