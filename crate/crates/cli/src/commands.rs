//! Subcommand implementations.

use std::path::{Path, PathBuf};
use std::time::Duration as StdDuration;

use chrono::{DateTime, Duration, FixedOffset, Timelike};

use emoflow_core::analytics::{self, ChatFormat, ChatMessage};
use emoflow_core::encoder::remote::{RemoteClassifier, RemoteConfig};
use emoflow_core::eval::{compare_models, CompareOptions};
use emoflow_core::fusion::EmotionClassifier;
use emoflow_core::lexicon::{intensity_factor, load_lexicon, LoadMode, SentimentLexicon};
use emoflow_core::text::{train, Criterion, LabeledCorpus, ModelKind, ModelSpec, TrainOptions, TrainedModel};

use crate::config::{resolve, ConfigFile, Resolved, Settings, DEFAULT_LABELS, ENV_ENDPOINT, ENV_LEXICON};
use crate::{
    AnalyzeArgs, ClassifyArgs, CliError, Command, EvaluateArgs, GlobalArgs, HyperArgs, LexiconArgs,
    RemoteArgs, TrainArgs,
};

pub fn build_settings(global: &GlobalArgs, command: &Command) -> Result<Settings, CliError> {
    let file = ConfigFile::load(global.config.as_deref())?;

    let (lexicon_flag, endpoint_flag, labels_flag) = match command {
        Command::Lexicon(a) => (a.lexicon.clone(), None, None),
        Command::Classify(a) => (a.lexicon.clone(), a.endpoint.clone(), a.labels.clone()),
        Command::Analyze(a) => (a.lexicon.clone(), a.endpoint.clone(), a.labels.clone()),
        Command::Train(_) | Command::Evaluate(_) => (None, None, None),
    };

    let env_lexicon = std::env::var(ENV_LEXICON).ok().map(PathBuf::from);
    let env_endpoint = std::env::var(ENV_ENDPOINT).ok();

    let lexicon = match (lexicon_flag, env_lexicon, file.lexicon.clone()) {
        (None, None, None) => None,
        (flag, env, cfg) => Some(resolve(flag, env, cfg, PathBuf::new())),
    };
    let endpoint = match (endpoint_flag, env_endpoint, file.endpoint.clone()) {
        (None, None, None) => None,
        (flag, env, cfg) => Some(resolve(flag, env, cfg, String::new())),
    };
    let labels = resolve(
        labels_flag.map(|s| parse_labels(&s)),
        None,
        file.labels.clone(),
        DEFAULT_LABELS.iter().map(|s| s.to_string()).collect(),
    );

    Ok(Settings {
        seed: resolve(global.seed, None, file.seed, 42),
        jobs: resolve(global.jobs, None, file.jobs, 0),
        lexicon,
        endpoint,
        labels,
        verbose: global.verbose,
        strict: !global.lenient,
    })
}

fn parse_labels(raw: &str) -> Vec<String> {
    raw.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::to_owned)
        .collect()
}

fn require_file(path: &Path, what: &str) -> Result<(), CliError> {
    if !path.exists() {
        return Err(CliError::usage(format!("{what} not found: {}", path.display())));
    }
    Ok(())
}

fn load_lexicon_at(path: &Path, settings: &Settings) -> Result<SentimentLexicon, CliError> {
    require_file(path, "lexicon file")?;
    let mode = if settings.strict { LoadMode::Strict } else { LoadMode::Lenient };
    let (lexicon, skipped) = load_lexicon(path, mode)?;
    for diag in &skipped {
        eprintln!("skipped: {diag}");
    }
    Ok(lexicon)
}

fn resolved_lexicon(settings: &Settings) -> Result<Option<SentimentLexicon>, CliError> {
    match &settings.lexicon {
        None => Ok(None),
        Some(Resolved { value, .. }) => Ok(Some(load_lexicon_at(value, settings)?)),
    }
}

// ---------------------------------------------------------------------------

pub fn cmd_lexicon(args: &LexiconArgs, settings: &Settings) -> Result<(), CliError> {
    let path = settings
        .lexicon
        .as_ref()
        .map(|r| r.value.clone())
        .ok_or_else(|| CliError::usage("no lexicon path: pass --lexicon, set EMOFLOW_LEXICON, or configure it"))?;
    let lexicon = load_lexicon_at(&path, settings)?;
    let stats = lexicon.stats();

    println!("lexicon: {}", lexicon.source());
    println!("entries: {}", lexicon.len());
    println!("{:<10} {:>6} {:>8} {:>8} {:>8}", "column", "count", "mean", "max", "min");
    for (name, s) in [("negative", stats.neg), ("neutral", stats.neut), ("positive", stats.pos)] {
        println!(
            "{:<10} {:>6} {:>8.3} {:>8.3} {:>8.3}",
            name, s.count, s.mean, s.max, s.min
        );
    }

    if let Some(query) = &args.query {
        let codepoint = parse_emoji_query(query)?;
        match lexicon.get(codepoint) {
            None => {
                return Err(CliError::runtime(format!(
                    "U+{:04X} is not in the lexicon",
                    codepoint as u32
                )))
            }
            Some(entry) => {
                println!(
                    "U+{:04X} {} ({}): neg={} neut={} pos={} phi={}",
                    codepoint as u32,
                    entry.codepoint,
                    entry.name,
                    entry.neg,
                    entry.neut,
                    entry.pos,
                    intensity_factor(entry)
                );
            }
        }
    }
    Ok(())
}

fn parse_emoji_query(raw: &str) -> Result<char, CliError> {
    let raw = raw.trim();
    if let Some(hex) = raw.strip_prefix("0x").or_else(|| raw.strip_prefix("0X")) {
        let value = u32::from_str_radix(hex, 16)
            .map_err(|_| CliError::usage(format!("bad codepoint `{raw}`")))?;
        return char::from_u32(value)
            .ok_or_else(|| CliError::usage(format!("U+{value:04X} is not a Unicode scalar value")));
    }
    raw.chars()
        .next()
        .ok_or_else(|| CliError::usage("empty emoji query"))
}

// ---------------------------------------------------------------------------

fn spec_from(kind: ModelKind, hyper: &HyperArgs) -> Result<ModelSpec, CliError> {
    let criterion: Criterion = hyper
        .criterion
        .parse()
        .map_err(|e: emoflow_core::Error| CliError::usage(e.to_string()))?;
    Ok(match kind {
        ModelKind::Svm => ModelSpec::Svm { c: hyper.c, epochs: hyper.epochs },
        ModelKind::GaussianNb => ModelSpec::GaussianNb,
        ModelKind::AdaBoost => ModelSpec::AdaBoost { n_rounds: hyper.n_rounds },
        ModelKind::DecisionTree => ModelSpec::DecisionTree {
            criterion,
            max_depth: hyper.max_depth,
            min_leaf: hyper.min_leaf,
        },
        ModelKind::Knn => ModelSpec::Knn { k: hyper.k, p: hyper.p },
        ModelKind::RandomForest => ModelSpec::RandomForest {
            n_trees: hyper.n_trees,
            max_depth: hyper.max_depth,
            min_leaf: hyper.min_leaf,
            bootstrap: !hyper.no_bootstrap,
        },
    })
}

pub fn cmd_train(args: &TrainArgs, settings: &Settings) -> Result<(), CliError> {
    require_file(&args.corpus, "corpus file")?;
    let corpus = LabeledCorpus::load_csv(&args.corpus)?;
    let spec = spec_from(args.model.into(), &args.hyper)?;
    let opts = TrainOptions { min_count: args.min_count, seed: settings.seed.value };

    let started = std::time::Instant::now();
    let model = train(&corpus, &spec, &opts)?;
    let elapsed = started.elapsed();
    model.save(&args.out)?;

    println!(
        "trained {} on {} documents ({} labels, vocabulary {}) in {:.2}s",
        model.kind,
        corpus.documents.len(),
        corpus.label_set.len(),
        model.vocabulary.len(),
        elapsed.as_secs_f64()
    );
    println!("model written to {}", args.out.display());
    Ok(())
}

// ---------------------------------------------------------------------------

fn build_classifier(
    model_path: Option<&Path>,
    settings: &Settings,
    remote: &RemoteArgs,
) -> Result<Box<dyn EmotionClassifier>, CliError> {
    if let Some(path) = model_path {
        require_file(path, "model artifact")?;
        let model = TrainedModel::load(path)?;
        return Ok(Box::new(model));
    }
    if let Some(endpoint) = &settings.endpoint {
        let labels = settings.labels.value.clone();
        if labels.len() < 2 {
            return Err(CliError::usage("remote label set needs at least 2 labels"));
        }
        let classifier = RemoteClassifier::new(
            endpoint.value.clone(),
            labels,
            RemoteConfig {
                timeout: StdDuration::from_secs(remote.timeout_secs),
                retries: remote.retries,
                backoff: StdDuration::from_millis(50),
            },
        )?;
        return Ok(Box::new(classifier));
    }
    Err(CliError::usage(
        "no classifier: pass --model or --endpoint (or set EMOFLOW_ENDPOINT)",
    ))
}

fn report_failures(failures: &[(usize, emoflow_core::Error)]) {
    for (index, error) in failures {
        eprintln!("message {index}: {error}");
    }
}

pub fn cmd_classify(args: &ClassifyArgs, settings: &Settings) -> Result<(), CliError> {
    let classifier = build_classifier(args.model.as_deref(), settings, &args.remote)?;
    let lexicon = resolved_lexicon(settings)?;

    let messages: Vec<ChatMessage> = match (&args.text, &args.input) {
        (Some(text), None) => vec![ChatMessage {
            sender: "cli".into(),
            timestamp: epoch(),
            text: text.clone(),
        }],
        (None, Some(path)) => {
            require_file(path, "input file")?;
            analytics::load_chat(path, ChatFormat::Auto)?
        }
        _ => return Err(CliError::usage("pass exactly one of --text or --input")),
    };

    let outcome = analytics::score_chat(&messages, classifier.as_ref(), lexicon.as_ref())?;
    report_failures(&outcome.failures);

    let mut lines = String::new();
    for record in &outcome.scored {
        lines.push_str(&serde_json::to_string(record).map_err(|e| CliError::runtime(e.to_string()))?);
        lines.push('\n');
    }
    match &args.out {
        Some(path) => std::fs::write(path, lines).map_err(|e| CliError::runtime(e.to_string()))?,
        None => print!("{lines}"),
    }
    if settings.verbose {
        eprintln!("scored {} message(s), {} failure(s)", outcome.scored.len(), outcome.failures.len());
    }
    Ok(())
}

fn epoch() -> DateTime<FixedOffset> {
    DateTime::parse_from_rfc3339("1970-01-01T00:00:00+00:00").expect("valid timestamp")
}

// ---------------------------------------------------------------------------

pub fn cmd_analyze(args: &AnalyzeArgs, settings: &Settings) -> Result<(), CliError> {
    require_file(&args.chat, "chat file")?;
    let classifier = build_classifier(args.model.as_deref(), settings, &args.remote)?;
    let lexicon = resolved_lexicon(settings)?.ok_or_else(|| {
        CliError::usage("analyze needs a lexicon: pass --lexicon, set EMOFLOW_LEXICON, or configure it")
    })?;

    let messages = analytics::load_chat(&args.chat, ChatFormat::Auto)?;
    if messages.is_empty() {
        return Err(CliError::runtime("no messages"));
    }

    let outcome = analytics::score_chat(&messages, classifier.as_ref(), Some(&lexicon))?;
    report_failures(&outcome.failures);

    let buckets = analytics::bucket_timeline(&outcome.scored, Duration::minutes(args.bucket_minutes))?;
    let report = analytics::build_report(&outcome.scored, &buckets)?;
    let written = analytics::export_report(&report, &outcome.scored, &args.out_dir)?;

    let dominant_count = report.totals.get(&report.headline_emotion).copied().unwrap_or(0);
    println!(
        "most prevalent dominant emotion: {} ({} of {} messages)",
        report.headline_emotion, dominant_count, report.total_messages
    );
    println!(
        "peak intensity bucket: {} (local {:02}:{:02})",
        report.peak_bucket_start.to_rfc3339(),
        report.peak_bucket_start.hour(),
        report.peak_bucket_start.minute()
    );
    for path in written {
        println!("wrote {}", path.display());
    }
    Ok(())
}

// ---------------------------------------------------------------------------

pub fn cmd_evaluate(args: &EvaluateArgs, settings: &Settings) -> Result<(), CliError> {
    require_file(&args.corpus, "corpus file")?;
    let corpus = LabeledCorpus::load_csv(&args.corpus)?;

    let kinds: Vec<ModelKind> = match &args.models {
        None => ModelKind::ALL.to_vec(),
        Some(raw) => raw
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| s.parse::<ModelKind>().map_err(|e| CliError::usage(e.to_string())))
            .collect::<Result<_, _>>()?,
    };
    let specs: Vec<ModelSpec> = kinds
        .iter()
        .map(|&k| spec_from(k, &args.hyper))
        .collect::<Result<_, _>>()?;

    let report = compare_models(
        &corpus,
        &specs,
        &CompareOptions {
            test_fraction: args.test_fraction,
            seed: settings.seed.value,
            min_count: args.min_count,
            dataset: args.corpus.display().to_string(),
        },
    )?;

    std::fs::create_dir_all(&args.out_dir).map_err(|e| CliError::runtime(e.to_string()))?;
    let csv_path = args.out_dir.join("comparison.csv");
    let txt_path = args.out_dir.join("comparison.txt");
    std::fs::write(&csv_path, report.to_csv_string()).map_err(|e| CliError::runtime(e.to_string()))?;
    std::fs::write(&txt_path, report.to_text_table()).map_err(|e| CliError::runtime(e.to_string()))?;

    print!("{}", report.to_text_table());
    println!("wrote {}", csv_path.display());
    println!("wrote {}", txt_path.display());
    Ok(())
}
