use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use simulst::agent::{Agent, AgentAction, DictionaryEngine, IdentityEngine, ScriptedEngine, TranslationEngine};
use simulst::cleaner::{
    clean, parse_corpus_jsonl, parse_corpus_tsv, write_corpus_jsonl, CorpusSample, ExternalScorer, LexicalScorer,
    QualityScorer,
};
use simulst::config::{validate_config, PipelineConfig};
use simulst::eval::{
    corpus_bleu, format_table, rows_to_jsonl, stream_laal, sweep, BleuTokenizer, Smoothing, SweepGrid, Unit,
};
use simulst::events::{parse_event_log, write_event_log, EventKind, PipelineEvent};
use simulst::fixtures::{make_fixture, EngineKind, Scenario};
use simulst::pipeline::run_pipeline_instrumented;
use simulst::prompt::{build_prompt, PerturbConfig};
use simulst::segmenter::segment_timeline;
use simulst::stabilizer::{parse_trace, simulate_trace};
use simulst::{replay_log, run_pipeline, AudioTimeline, LanguagePair};

#[derive(Parser)]
#[command(name = "simulst", version, about = "Deterministic simultaneous speech translation pipeline")]
struct Cli {
    /// Pipeline config (TOML). Command-line flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Write results here instead of stdout.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Cut a voice-probability timeline into speech segments.
    Segment {
        timeline: PathBuf,
        #[arg(long)]
        mud_ms: Option<u64>,
        #[arg(long)]
        vpt: Option<f64>,
        #[arg(long)]
        msd_ms: Option<u64>,
    },
    /// Replay a scripted hypothesis trace through the stable transcription policy.
    TranscribeSim {
        trace: PathBuf,
        #[arg(long)]
        cutoff_words: Option<usize>,
        #[arg(long)]
        agreement_window: Option<usize>,
    },
    /// Feed the StableCommit events of a log to the translation agent.
    TranslateSim {
        events: PathBuf,
        #[arg(long)]
        mcs: Option<usize>,
        /// identity, dict:<path> or scripted:<path>
        #[arg(long, default_value = "identity")]
        engine: String,
        #[arg(long)]
        lang_pair: Option<LanguagePair>,
    },
    /// Run the full pipeline on a scenario directory.
    Run {
        scenario: PathBuf,
        /// Replace the scenario's translation engine.
        #[arg(long, value_enum)]
        engine: Option<EngineArg>,
        /// Add wall-clock microseconds to every event.
        #[arg(long)]
        wall_clock: bool,
    },
    /// Stream latency of an event log.
    EvalLatency {
        log: PathBuf,
        #[command(flatten)]
        scoring: Scoring,
    },
    /// Corpus BLEU of an event log, or of a plain hypothesis file with --plain.
    EvalBleu {
        input: PathBuf,
        #[command(flatten)]
        scoring: Scoring,
        /// The input holds one hypothesis per line instead of an event log.
        #[arg(long)]
        plain: bool,
        #[arg(long, value_enum, default_value = "none")]
        smoothing: SmoothingArg,
    },
    /// Run a parameter grid on a scenario directory.
    Sweep {
        scenario: PathBuf,
        #[arg(long, value_delimiter = ',')]
        mud_ms: Vec<u64>,
        #[arg(long, value_delimiter = ',')]
        vpt: Vec<f64>,
        #[arg(long, value_delimiter = ',')]
        msd_ms: Vec<u64>,
        #[arg(long, value_delimiter = ',')]
        mcs: Vec<usize>,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Filter a parallel corpus.
    Clean {
        corpus: PathBuf,
        #[arg(long)]
        lang_pair: LanguagePair,
        #[arg(long, default_value_t = simulst::cleaner::DEFAULT_QE_THRESHOLD)]
        qe_threshold: f64,
        /// lexical or external:<command>
        #[arg(long, default_value = "lexical")]
        scorer: String,
        /// Corpus format; guessed from the extension when omitted.
        #[arg(long, value_enum)]
        format: Option<CorpusFormat>,
    },
    /// Build conversational training prompts from aligned parallel text.
    BuildPrompts {
        #[arg(long)]
        source: PathBuf,
        #[arg(long)]
        target: PathBuf,
        /// Pharaoh `i-j` alignments, one line per sentence pair.
        #[arg(long)]
        alignments: PathBuf,
        /// Context sentence per pair; empty lines mean no context.
        #[arg(long)]
        context: Option<PathBuf>,
        #[arg(long)]
        lang_pair: Option<LanguagePair>,
        #[arg(long)]
        merge_prob: Option<f64>,
        #[arg(long)]
        shift_prob: Option<f64>,
        #[arg(long)]
        max_shift: Option<usize>,
    },
    /// Write a built-in scenario bundle to a directory.
    MakeFixture { name: String, dir: PathBuf },
}

#[derive(Args)]
struct Scoring {
    /// One reference per sentence.
    #[arg(long)]
    references: Option<PathBuf>,
    #[arg(long)]
    unit: Option<Unit>,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

#[derive(Clone, Copy, ValueEnum)]
enum EngineArg {
    Identity,
    Dictionary,
}

#[derive(Clone, Copy, ValueEnum)]
enum SmoothingArg {
    None,
    Exp,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Format {
    Text,
    Jsonl,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum CorpusFormat {
    Tsv,
    Jsonl,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn load_config(cli: &Cli) -> Result<Option<PipelineConfig>> {
    let Some(path) = &cli.config else { return Ok(None) };
    let mut config = validate_config(&read(path)?).with_context(|| format!("in {}", path.display()))?;
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    Ok(Some(config))
}

fn base_config(cli: &Cli) -> Result<PipelineConfig> {
    let mut config = load_config(cli)?.unwrap_or_default();
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    Ok(config)
}

fn emit(output: &Option<PathBuf>, text: &str) -> Result<()> {
    match output {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
            Ok(())
        }
    }
}

fn load_scenario(cli: &Cli, dir: &Path) -> Result<Scenario> {
    let mut scenario = Scenario::load(dir)?;
    if let Some(config) = load_config(cli)? {
        scenario.config = config;
    }
    if let Some(seed) = cli.seed {
        scenario.config.seed = seed;
    }
    Ok(scenario)
}

fn translation_engine(spec: &str) -> Result<Box<dyn TranslationEngine>> {
    Ok(match spec.split_once(':') {
        None if spec == "identity" => Box::new(IdentityEngine),
        Some(("dict", path)) => {
            let map = DictionaryEngine::parse_tsv(&read(Path::new(path))?).with_context(|| path.to_string())?;
            Box::new(DictionaryEngine::new(map, false))
        }
        Some(("dict+lookahead", path)) => {
            let map = DictionaryEngine::parse_tsv(&read(Path::new(path))?).with_context(|| path.to_string())?;
            Box::new(DictionaryEngine::new(map, true))
        }
        Some(("scripted", path)) => {
            let outputs = ScriptedEngine::parse_jsonl(&read(Path::new(path))?)
                .map_err(anyhow::Error::msg)
                .with_context(|| path.to_string())?;
            Box::new(ScriptedEngine::new(outputs))
        }
        _ => bail!("unknown engine `{spec}` (expected identity, dict:<path> or scripted:<path>)"),
    })
}

fn references(path: &Option<PathBuf>) -> Result<Option<Vec<String>>> {
    path.as_ref().map(|p| Ok(read(p)?.lines().map(str::to_string).collect())).transpose()
}

fn default_unit(cli: &Cli, unit: Option<Unit>) -> Result<Unit> {
    Ok(match unit {
        Some(u) => u,
        None => base_config(cli)?.language_pair().default_unit(),
    })
}

fn translate_sim(events: &[PipelineEvent], config: simulst::agent::AgentConfig, engine: &mut dyn TranslationEngine) -> Vec<PipelineEvent> {
    let mut agent = Agent::new(config);
    let mut out = Vec::new();
    let push = |actions: Vec<AgentAction>, time_ms: u64, out: &mut Vec<PipelineEvent>| {
        out.extend(actions.iter().flat_map(|a| a.to_events(time_ms)));
    };
    let mut last = 0;
    for event in events {
        last = event.time_ms;
        if let EventKind::StableCommit(commit) = &event.kind {
            let actions = agent.ingest(&commit.words, engine);
            push(actions, event.time_ms, &mut out);
        }
    }
    let actions = agent.flush(engine);
    push(actions, last, &mut out);
    out
}

fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Segment { timeline, mud_ms, vpt, msd_ms } => {
            let mut config = base_config(cli)?.segmenter;
            config.max_unvoiced_duration_ms = mud_ms.unwrap_or(config.max_unvoiced_duration_ms);
            config.voice_prob_threshold = vpt.unwrap_or(config.voice_prob_threshold);
            config.max_segment_duration_ms = msd_ms.unwrap_or(config.max_segment_duration_ms);
            config.validate()?;
            let timeline = AudioTimeline::parse_jsonl(&read(timeline)?).with_context(|| timeline.display().to_string())?;
            let lines: String = segment_timeline(&timeline, config)
                .iter()
                .map(|s| serde_json::to_string(s).expect("segments serialize") + "\n")
                .collect();
            emit(&cli.output, &lines)
        }
        Command::TranscribeSim { trace, cutoff_words, agreement_window } => {
            let mut config = base_config(cli)?.stabilizer;
            config.cutoff_threshold_words = cutoff_words.unwrap_or(config.cutoff_threshold_words);
            config.agreement_window = agreement_window.unwrap_or(config.agreement_window);
            if config.agreement_window < 2 {
                bail!("--agreement-window must be at least 2");
            }
            let entries = parse_trace(&read(trace)?).with_context(|| trace.display().to_string())?;
            emit(&cli.output, &write_event_log(&simulate_trace(&entries, config)))
        }
        Command::TranslateSim { events, mcs, engine, lang_pair } => {
            let mut config = base_config(cli)?.agent;
            config.min_chunk_size_words = mcs.unwrap_or(config.min_chunk_size_words);
            config.language_pair = lang_pair.unwrap_or(config.language_pair);
            if config.min_chunk_size_words == 0 {
                bail!("--mcs must be at least 1");
            }
            let events = parse_event_log(&read(events)?).with_context(|| events.display().to_string())?;
            let mut engine = translation_engine(engine)?;
            emit(&cli.output, &write_event_log(&translate_sim(&events, config, engine.as_mut())))
        }
        Command::Run { scenario, engine, wall_clock } => {
            let scenario = load_scenario(cli, scenario)?;
            let mut engines = match engine {
                Some(EngineArg::Identity) => scenario.engines_with(EngineKind::Identity),
                Some(EngineArg::Dictionary) => scenario.engines_with(EngineKind::Dictionary),
                None => scenario.engines(),
            };
            let events = if *wall_clock {
                run_pipeline_instrumented(&scenario.timeline, &scenario.config, &mut engines)?
            } else {
                run_pipeline(&scenario.timeline, &scenario.config, &mut engines)?
            };
            emit(&cli.output, &write_event_log(&events))
        }
        Command::EvalLatency { log, scoring } => {
            let events = parse_event_log(&read(log)?).with_context(|| log.display().to_string())?;
            let mut emissions = replay_log(&events)?;
            if let Some(refs) = references(&scoring.references)? {
                emissions = emissions.with_references(&refs)?;
            }
            let unit = default_unit(cli, scoring.unit)?;
            let latency = stream_laal(&emissions, unit)?;
            let text = match scoring.format {
                Format::Jsonl => {
                    let mut out = String::new();
                    for (k, v) in latency.per_sentence.iter().enumerate() {
                        out += &serde_json::json!({"sentence": k, "laal_ms": v}).to_string();
                        out.push('\n');
                    }
                    out + &serde_json::json!({"stream_laal_ms": latency.mean_ms, "unit": unit}).to_string() + "\n"
                }
                Format::Text => {
                    let mut out = String::from("sentence  laal_ms\n");
                    for (k, v) in latency.per_sentence.iter().enumerate() {
                        let v = v.map_or("-".to_string(), |v| format!("{v:.2}"));
                        out += &format!("{k:>8} {v:>8}\n");
                    }
                    out + &format!("stream_laal_ms {:.2}\n", latency.mean_ms)
                }
            };
            emit(&cli.output, &text)
        }
        Command::EvalBleu { input, scoring, plain, smoothing } => {
            let Some(refs) = references(&scoring.references)? else {
                bail!("--references is required");
            };
            let hypotheses: Vec<String> = if *plain {
                read(input)?.lines().map(str::to_string).collect()
            } else {
                let events = parse_event_log(&read(input)?).with_context(|| input.display().to_string())?;
                replay_log(&events)?.hypotheses()
            };
            let tokenizer = match default_unit(cli, scoring.unit)? {
                Unit::Word => BleuTokenizer::Word13a,
                Unit::Char => BleuTokenizer::Char,
            };
            let smoothing = match smoothing {
                SmoothingArg::None => Smoothing::None,
                SmoothingArg::Exp => Smoothing::Exp,
            };
            let score = corpus_bleu(&hypotheses, &refs, tokenizer, smoothing)?;
            let text = match scoring.format {
                Format::Jsonl => serde_json::to_string(&score)? + "\n",
                Format::Text => format!(
                    "BLEU {:.2}  {}  BP {:.3}  sys_len {}  ref_len {}\n",
                    score.score,
                    score.precisions.iter().map(|p| format!("{p:.1}")).collect::<Vec<_>>().join("/"),
                    score.brevity_penalty,
                    score.sys_len,
                    score.ref_len
                ),
            };
            emit(&cli.output, &text)
        }
        Command::Sweep { scenario, mud_ms, vpt, msd_ms, mcs, jobs, format } => {
            let scenario = load_scenario(cli, scenario)?;
            let s = scenario.config.segmenter;
            let or = |v: &Vec<_>, d| if v.is_empty() { vec![d] } else { v.clone() };
            let grid = SweepGrid {
                mud_ms: or(mud_ms, s.max_unvoiced_duration_ms),
                vpt: if vpt.is_empty() { vec![s.voice_prob_threshold] } else { vpt.clone() },
                msd_ms: or(msd_ms, s.max_segment_duration_ms),
                mcs: if mcs.is_empty() { vec![scenario.config.agent.min_chunk_size_words] } else { mcs.clone() },
            };
            let rows = sweep(&scenario, &grid, (*jobs).max(1));
            let text = match format {
                Format::Text => format_table(&rows),
                Format::Jsonl => rows_to_jsonl(&rows),
            };
            emit(&cli.output, &text)?;
            let failed = rows.iter().filter(|r| r.error.is_some()).count();
            if failed > 0 {
                bail!("{failed} of {} sweep points failed", rows.len());
            }
            Ok(())
        }
        Command::Clean { corpus, lang_pair, qe_threshold, scorer, format } => {
            let format = format.unwrap_or(if corpus.extension().is_some_and(|e| e == "jsonl") {
                CorpusFormat::Jsonl
            } else {
                CorpusFormat::Tsv
            });
            let text = read(corpus)?;
            let samples: Vec<CorpusSample> = match format {
                CorpusFormat::Jsonl => parse_corpus_jsonl(&text)?
                    .into_iter()
                    .map(|s| CorpusSample { language_pair: *lang_pair, ..s })
                    .collect(),
                CorpusFormat::Tsv => parse_corpus_tsv(&text, *lang_pair)?,
            };
            let mut scorer: Box<dyn QualityScorer> = match scorer.split_once(':') {
                None if scorer == "lexical" => Box::new(LexicalScorer),
                Some(("external", cmd)) => {
                    Box::new(ExternalScorer::from_command_line(cmd).context("empty external scorer command")?)
                }
                _ => bail!("unknown scorer `{scorer}` (expected lexical or external:<command>)"),
            };
            let report = clean(&samples, scorer.as_mut(), *qe_threshold);
            let d = report.dropped;
            eprintln!(
                "kept {} of {}; dropped short {}, noisy {}, untranslated {}, low quality {}, scorer failed {}",
                report.kept.len(),
                samples.len(),
                d.short,
                d.noisy,
                d.untranslated,
                d.low_quality,
                d.scorer_failed
            );
            let out = match format {
                CorpusFormat::Jsonl => write_corpus_jsonl(&report.kept),
                CorpusFormat::Tsv => report
                    .kept
                    .iter()
                    .map(|s| format!("{}\t{}\t{}\n", s.source, s.target, s.context))
                    .collect(),
            };
            emit(&cli.output, &out)?;
            if d.scorer_failed > 0 {
                bail!("quality scorer failed on {} samples", d.scorer_failed);
            }
            Ok(())
        }
        Command::BuildPrompts { source, target, alignments, context, lang_pair, merge_prob, shift_prob, max_shift } => {
            let config = base_config(cli)?;
            let perturb = PerturbConfig {
                merge_prob: merge_prob.unwrap_or(config.prompt.merge_prob),
                shift_prob: shift_prob.unwrap_or(config.prompt.shift_prob),
                max_shift: max_shift.unwrap_or(config.prompt.max_shift),
            };
            for (name, p) in [("--merge-prob", perturb.merge_prob), ("--shift-prob", perturb.shift_prob)] {
                if !(0.0..=1.0).contains(&p) {
                    bail!("{name} must be in [0, 1], got {p}");
                }
            }
            let lp = lang_pair.unwrap_or(config.language_pair());
            let (src, tgt, ali) = (read(source)?, read(target)?, read(alignments)?);
            let ctx = context.as_ref().map(|c| read(c)).transpose()?;
            let (src, tgt, ali): (Vec<&str>, Vec<&str>, Vec<&str>) =
                (src.lines().collect(), tgt.lines().collect(), ali.lines().collect());
            let ctx: Vec<&str> = ctx.as_deref().map_or_else(|| vec![""; src.len()], |c| c.lines().collect());
            if tgt.len() != src.len() || ali.len() != src.len() || ctx.len() != src.len() {
                bail!(
                    "line counts differ: source {}, target {}, alignments {}, context {}",
                    src.len(),
                    tgt.len(),
                    ali.len(),
                    ctx.len()
                );
            }
            let mut out = String::new();
            for i in 0..src.len() {
                let seed = config.seed.wrapping_add(i as u64);
                let record = build_prompt(src[i], tgt[i], ali[i], ctx[i], lp, seed, perturb)
                    .with_context(|| format!("sentence pair {}", i + 1))?;
                out += &serde_json::to_string(&record)?;
                out.push('\n');
            }
            emit(&cli.output, &out)
        }
        Command::MakeFixture { name, dir } => {
            let seed = cli.seed.unwrap_or(0);
            let scenario = make_fixture(name, seed)?;
            scenario.write_to(dir)?;
            log::info!("wrote {name} to {}", dir.display());
            Ok(())
        }
    }
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .target(env_logger::Target::Stderr)
        .init();
    let cli = Cli::parse();
    if let Err(e) = run(&cli) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
