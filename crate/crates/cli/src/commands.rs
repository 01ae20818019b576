use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{Context, Result};
use log::info;
use serde::Serialize;

use fsd_core::corpus::{format_for_path, read_stream_with, write_jsonl, Tokenizer};
use fsd_core::detectors::io::{read_records, write_records};
use fsd_core::eval::{
    compare_reports, skip_evaluate, write_det_csv, write_summary_csv, SkipEvaluation,
};
use fsd_core::synthetic::{planted_corpus, zipf_stream, PlantedConfig, ZipfConfig};
use fsd_core::term_stats;
use fsd_core::tuner::{grid_search, write_grid_csv, GridSpec, Objective, TunerSettings};
use fsd_core::{
    run_detector, BiasParams, CostConstants, DetectorConfig, Document, Exec, GroundTruth,
    LshConfig, NormPolicy, StreamFormat, StreamOrdering, StreamSource,
};

use crate::manifest::{sidecar, Manifest};
use crate::{
    usage, BiasArg, CompareArgs, CostArgs, DetectArgs, DetectorArg, EvalArgs, NormsArg,
    ObjectiveArg, StreamArgs, SynthArgs, SynthKind, TraceArgs, TuneArgs,
};

#[derive(Debug, Serialize)]
struct StreamConfig {
    format: StreamFormat,
    ordering: StreamOrdering,
    stopwords: bool,
}

fn load_stream(args: &StreamArgs) -> Result<(Vec<Document>, StreamConfig)> {
    let format = match args.format {
        Some(f) => f.into(),
        None => match format_for_path(&args.input) {
            Some(f) => f,
            None => {
                return usage(format!(
                    "cannot infer the format of {}; pass --format",
                    args.input.display()
                ))
            }
        },
    };
    let source = StreamSource::new(format, &args.input).ordering(args.order.into());
    let tokenizer = if args.stopwords {
        Tokenizer::with_english_stopwords()
    } else {
        Tokenizer::new()
    };
    let docs = read_stream_with(&source, &tokenizer)
        .with_context(|| format!("reading stream {}", args.input.display()))?;
    info!(
        "loaded {} documents from {}",
        docs.len(),
        args.input.display()
    );
    Ok((
        docs,
        StreamConfig {
            format,
            ordering: source.ordering,
            stopwords: args.stopwords,
        },
    ))
}

fn load_truth(path: &Path) -> Result<GroundTruth> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    GroundTruth::read_jsonl(file).with_context(|| format!("reading truth {}", path.display()))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(file))
}

fn constants(c: &CostArgs) -> Result<CostConstants> {
    if !(c.c_miss > 0.0 && c.c_fa > 0.0 && c.p_target > 0.0 && c.p_target < 1.0) {
        return usage("cost constants must be positive and p_target must lie in (0, 1)");
    }
    Ok(CostConstants {
        c_miss: c.c_miss,
        c_fa: c.c_fa,
        p_target: c.p_target,
    })
}

fn detector_config(a: &DetectArgs) -> Result<DetectorConfig> {
    let norms: NormPolicy = a.norms.into();
    let config = match (a.detector, a.bias) {
        (DetectorArg::Exhaustive, BiasArg::None) => DetectorConfig::exhaustive(norms),
        (DetectorArg::Exhaustive, BiasArg::Optimized) => {
            if a.norms == NormsArg::Frozen {
                return usage("--bias optimized is defined over fresh norms; drop --norms frozen");
            }
            DetectorConfig::optimized(BiasParams {
                delta: a.delta,
                gamma: a.gamma,
                form: a.bias_form.into(),
            })
        }
        (DetectorArg::Recency, BiasArg::None) => {
            if a.norms == NormsArg::Frozen {
                return usage("the recency detector uses fresh norms only");
            }
            DetectorConfig::recency(a.window)
        }
        (DetectorArg::Lsh, BiasArg::None) => DetectorConfig::lsh(
            LshConfig {
                bits: a.lsh_bits,
                tables: a.lsh_tables,
                window: a.window,
                closeness_threshold: a.lsh_threshold,
                seed: a.seed,
            },
            norms,
        ),
        (d, BiasArg::Optimized) => {
            return usage(format!(
                "--bias optimized requires --detector exhaustive (got {d:?})"
            ))
        }
    };
    let config = config.with_tf(a.tf.into()).with_exec(a.exec.into());
    if let Err(e) = config.validate() {
        return usage(e.to_string());
    }
    Ok(config)
}

pub fn detect(a: DetectArgs) -> Result<()> {
    let config = detector_config(&a)?;
    let (docs, stream) = load_stream(&a.stream)?;
    let records = run_detector(&docs, &config)?;
    fs::create_dir_all(&a.out)?;
    let mut out = create(&a.out.join("novelty.csv"))?;
    write_records(&mut out, &records)?;
    out.flush()?;

    #[derive(Serialize)]
    struct Config {
        stream: StreamConfig,
        detector: DetectorConfig,
    }
    Manifest::new(
        "detect",
        Some(a.seed),
        Config {
            stream,
            detector: config,
        },
    )
    .input(&a.stream.input)?
    .output("novelty.csv")
    .write(&a.out.join("manifest.json"))?;
    info!(
        "wrote {} novelty scores to {}",
        records.len(),
        a.out.display()
    );
    Ok(())
}

pub fn eval(a: EvalArgs) -> Result<()> {
    let constants = constants(&a.cost)?;
    let records = read_records(
        File::open(&a.novelty).with_context(|| format!("opening {}", a.novelty.display()))?,
    )
    .with_context(|| format!("reading novelty CSV {}", a.novelty.display()))?;
    let truth = load_truth(&a.truth)?;
    let result = skip_evaluate(&records, &truth, a.skip_rounds, constants, a.exec.into())?;

    fs::create_dir_all(&a.out)?;
    let mut outputs = vec!["report.json".to_string(), "summary.csv".to_string()];
    let mut report = create(&a.out.join("report.json"))?;
    serde_json::to_writer_pretty(&mut report, &result)?;
    report.write_all(b"\n")?;
    report.flush()?;
    let mut summary = create(&a.out.join("summary.csv"))?;
    write_summary_csv(&mut summary, &result)?;
    summary.flush()?;
    for (r, rep) in result.rounds.iter().enumerate() {
        let name = format!("det_round{r}.csv");
        let mut det = create(&a.out.join(&name))?;
        write_det_csv(&mut det, rep)?;
        det.flush()?;
        outputs.push(name);
    }

    #[derive(Serialize)]
    struct Config {
        skip_rounds: usize,
        constants: CostConstants,
    }
    let mut manifest = Manifest::new(
        "eval",
        None,
        Config {
            skip_rounds: a.skip_rounds,
            constants,
        },
    )
    .input(&a.novelty)?
    .input(&a.truth)?;
    for o in outputs {
        manifest = manifest.output(o);
    }
    manifest.write(&a.out.join("manifest.json"))?;

    for (r, rep) in result.rounds.iter().enumerate() {
        println!(
            "round {r}: c_min {:.6} at threshold {}",
            rep.c_min, rep.argmin_threshold
        );
    }
    println!("mean c_min {:.6}", result.mean_c_min);
    Ok(())
}

pub fn trace_idf(a: TraceArgs) -> Result<()> {
    if a.every == 0 {
        return usage("--every must be ≥ 1");
    }
    let (docs, stream) = load_stream(&a.stream)?;
    let trace = term_stats::trace_idf(&docs, a.every)?;
    let mut out = create(&a.out)?;
    writeln!(out, "position,mean_idf")?;
    for p in &trace {
        writeln!(out, "{},{}", p.position, p.mean_idf)?;
    }
    out.flush()?;

    #[derive(Serialize)]
    struct Config {
        stream: StreamConfig,
        every: u64,
    }
    Manifest::new(
        "trace-idf",
        None,
        Config {
            stream,
            every: a.every,
        },
    )
    .input(&a.stream.input)?
    .output(file_name(&a.out))
    .write(&sidecar(&a.out))
}

fn file_name(p: &Path) -> String {
    p.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default()
}

pub fn tune(a: TuneArgs) -> Result<()> {
    let objective = match a.objective {
        ObjectiveArg::CMinRound0 => Objective::CMinRound0,
        ObjectiveArg::CMinSkipMean => Objective::CMinSkipMean,
    };
    let grid = match GridSpec::parse(&a.grid, objective) {
        Ok(g) => g,
        Err(e) => return usage(e.to_string()),
    };
    let settings = TunerSettings {
        skip_rounds: a.skip_rounds,
        constants: constants(&a.cost)?,
        tf: a.tf.into(),
        form: a.bias_form.into(),
        exec: a.exec.into(),
    };
    let (docs, stream) = load_stream(&a.stream)?;
    let truth = load_truth(&a.truth)?;
    let result = grid_search(&docs, &truth, &grid, &settings)?;
    let mut out = create(&a.out)?;
    write_grid_csv(&mut out, &result)?;
    out.flush()?;

    #[derive(Serialize)]
    struct Config {
        stream: StreamConfig,
        grid: GridSpec,
        settings: TunerSettings,
        best: BiasParams,
        objective_value: f64,
    }
    Manifest::new(
        "tune",
        None,
        Config {
            stream,
            grid,
            settings,
            best: result.best,
            objective_value: result.objective,
        },
    )
    .input(&a.stream.input)?
    .input(&a.truth)?
    .output(file_name(&a.out))
    .write(&sidecar(&a.out))?;
    println!(
        "best delta {} gamma {} objective {:.6}",
        result.best.delta, result.best.gamma, result.objective
    );
    Ok(())
}

fn load_report(path: &Path) -> Result<SkipEvaluation> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    serde_json::from_reader(std::io::BufReader::new(file))
        .with_context(|| format!("reading report {}", path.display()))
}

pub fn compare(a: CompareArgs) -> Result<()> {
    let ra = load_report(&a.a)?;
    let rb = load_report(&a.b)?;
    let pick = |r: &SkipEvaluation, path: &Path| -> Result<_> {
        match r.rounds.get(a.round) {
            Some(rep) => Ok(rep.clone()),
            None => usage(format!("{} has no round {}", path.display(), a.round)),
        }
    };
    let (x, y) = (pick(&ra, &a.a)?, pick(&rb, &a.b)?);
    let exec: Exec = a.exec.into();
    let p = compare_reports(&x, &y, a.permutations, a.seed, exec)?;
    println!("c_min a {:.6} b {:.6} p-value {p}", x.c_min, y.c_min);

    if let Some(out) = &a.out {
        #[derive(Serialize)]
        struct Comparison {
            round: usize,
            c_min_a: f64,
            c_min_b: f64,
            p_value: f64,
        }
        let mut w = create(out)?;
        serde_json::to_writer_pretty(
            &mut w,
            &Comparison {
                round: a.round,
                c_min_a: x.c_min,
                c_min_b: y.c_min,
                p_value: p,
            },
        )?;
        w.write_all(b"\n")?;
        w.flush()?;

        #[derive(Serialize)]
        struct Config {
            round: usize,
            permutations: usize,
        }
        Manifest::new(
            "compare",
            Some(a.seed),
            Config {
                round: a.round,
                permutations: a.permutations,
            },
        )
        .input(&a.a)?
        .input(&a.b)?
        .output(file_name(out))
        .write(&sidecar(out))?;
    }
    Ok(())
}

pub fn synth(a: SynthArgs) -> Result<()> {
    fs::create_dir_all(&a.out)?;
    let mut stream = create(&a.out.join("stream.jsonl"))?;
    let manifest = match a.kind {
        SynthKind::Zipf => {
            if a.topics.is_some() {
                return usage("--topics only applies to --kind planted");
            }
            let mut cfg = ZipfConfig {
                seed: a.seed,
                ..ZipfConfig::default()
            };
            if let Some(n) = a.docs {
                cfg.docs = n;
            }
            write_jsonl(&mut stream, &zipf_stream(&cfg)?)?;
            Manifest::new("synth", Some(a.seed), serde_json::to_value(cfg)?)
        }
        SynthKind::Planted => {
            let mut cfg = PlantedConfig {
                seed: a.seed,
                ..PlantedConfig::default()
            };
            if let Some(n) = a.docs {
                cfg.length = n;
            }
            if let Some(t) = a.topics {
                cfg.topics = t;
            }
            let corpus = planted_corpus(&cfg)?;
            write_jsonl(&mut stream, &corpus.docs)?;
            let mut truth = create(&a.out.join("truth.jsonl"))?;
            corpus.truth.write_jsonl(&mut truth)?;
            truth.flush()?;
            Manifest::new("synth", Some(a.seed), serde_json::to_value(cfg)?).output("truth.jsonl")
        }
    };
    stream.flush()?;
    manifest
        .output("stream.jsonl")
        .write(&a.out.join("manifest.json"))
}
