use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value as Json};

use semtrace::clients::{SubprocessModel, SubprocessSuggester};
use semtrace::config::{BuildConfig, ConfigError, GoalConfig, LimitsConfig};
use semtrace::interchange::{parse_input_arg, to_interchange};
use semtrace::pipeline::{
    build_dataset, decontaminate, episode_json, similarity_report, BenchmarkPair, BuggyRecordJson, DatasetRecord, Manifest,
};
use semtrace::problems::ProblemSpec;
use semtrace::{jsonl, with_big_stack};
use semtrace_core::formats::{
    abstract_constraints, backward_monologue, forward_monologue, to_concise, to_next, to_scratchpad, TraceFormat,
    TruncationRule,
};
use semtrace_core::harness::{run_episode, score_curve, Schedule};
use semtrace_core::inputs::{expand, parse_value_literal, InputTuple, MutationPolicy, SuggesterClient};
use semtrace_core::refinery::collect_buggy;
use semtrace_core::subjectlang::{check_eligibility, parse_source, EligibilityReport};
use semtrace_core::tracer::{repr, Limits, Outcome};
use semtrace_core::verify::{differential_test_with, verify_backward_with, verify_forward_with, Actual, DiffResult, Verdict};
use semtrace_core::{Problem, Program};

#[derive(Parser)]
#[command(name = "semtrace", version, about = "Trace, format and verify executions of small Python programs")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Direction {
    Forward,
    Backward,
}

#[derive(Subcommand)]
enum Cmd {
    /// Print the eligibility report; exit 0 iff eligible.
    Check { file: PathBuf },
    /// Run one input and print the trace as interchange JSON.
    Trace {
        file: PathBuf,
        #[arg(long)]
        entry: Option<String>,
        #[arg(long)]
        input: String,
        #[arg(long)]
        limits: Option<String>,
    },
    /// Grow an input corpus by mutation (and optionally a suggester).
    ExpandInputs {
        file: PathBuf,
        #[arg(long)]
        entry: Option<String>,
        #[arg(long)]
        seeds: PathBuf,
        #[arg(long)]
        goal: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        suggester: Option<String>,
    },
    /// Print one trace document.
    Emit {
        file: PathBuf,
        #[arg(long)]
        entry: Option<String>,
        #[arg(long)]
        input: String,
        #[arg(long)]
        format: String,
    },
    /// Check a predicted output (forward) or input (backward) by execution.
    Verify {
        direction: Direction,
        file: PathBuf,
        #[arg(long)]
        entry: Option<String>,
        #[arg(long)]
        input: Option<String>,
        #[arg(long)]
        output: Option<String>,
        #[arg(long)]
        prediction: String,
    },
    /// Compare a candidate with a reference on a corpus.
    Difftest {
        candidate: PathBuf,
        reference: PathBuf,
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        entry: Option<String>,
    },
    /// Build the execution-semantics dataset described by a config file.
    BuildPyx {
        #[arg(long)]
        config: PathBuf,
    },
    /// Harvest buggy solver outputs into debugging records.
    BuildPyxr {
        #[arg(long)]
        problems: PathBuf,
        #[arg(long)]
        solver: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run self-refinement episodes against a model client.
    Refine {
        #[arg(long)]
        problems: PathBuf,
        #[arg(long)]
        client: String,
        #[arg(long, default_value_t = 5)]
        rounds: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Drop records sharing an (input, output) pair with a benchmark and report text similarity.
    Dedup {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        benchmark: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0.75)]
        threshold: f64,
    },
    /// Check a build directory against its manifest and print statistics.
    Stats { dir: PathBuf },
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn load(path: &Path, entry: Option<&str>) -> Result<Program> {
    let id = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    Program::parse(id, read(path)?, entry).map_err(|e| anyhow!("{}: {e}", path.display()))
}

fn invalid(msg: impl std::fmt::Display) -> anyhow::Error {
    ConfigError::Invalid(msg.to_string()).into()
}

fn limits(text: Option<&str>) -> Result<Limits> {
    match text {
        None => Ok(Limits::default()),
        Some(t) => serde_json::from_str::<LimitsConfig>(t).map(|l| l.limits()).map_err(|e| invalid(format!("--limits: {e}"))),
    }
}

fn input(text: &str) -> Result<InputTuple> {
    parse_input_arg(text).map_err(|e| anyhow!("input {text}: {e}"))
}

fn report_json(r: &EligibilityReport) -> Json {
    let mut m = serde_json::Map::new();
    for (name, c) in r.criteria() {
        let d: Vec<Json> = c.diagnostics.iter().map(|d| json!({"line": d.line, "message": d.message})).collect();
        m.insert(name.into(), json!({"pass": c.pass, "diagnostics": d}));
    }
    m.insert("eligible".into(), json!(r.eligible()));
    Json::Object(m)
}

fn verdict_json(v: &Verdict) -> Json {
    match v {
        Verdict::Accept => json!({"verdict": "accept"}),
        Verdict::Reject { expected, actual } => {
            let actual = match actual {
                Actual::Value(s) => json!({"value": s}),
                Actual::Error(k) => json!({"error": k.name()}),
                Actual::Unparsable(m) => json!({"unparsable": m}),
            };
            json!({"verdict": "reject", "expected": expected, "actual": actual})
        }
    }
}

fn diff_json(r: &DiffResult) -> Json {
    match r {
        DiffResult::Agree => json!({"result": "agree"}),
        DiffResult::ValueMismatch { candidate, reference } => {
            json!({"result": "value-mismatch", "candidate": candidate, "reference": reference})
        }
        DiffResult::CandidateError(k) => json!({"result": "candidate-error", "error": k.name()}),
        DiffResult::ReferenceError(k) => json!({"result": "reference-error", "error": k.name()}),
    }
}

fn print(j: &Json) {
    println!("{}", serde_json::to_string_pretty(j).unwrap_or_default());
}

/// Reads argument tuples, one per line, as literal strings or JSON arrays.
fn read_inputs(path: &Path) -> Result<Vec<InputTuple>> {
    let mut out = Vec::new();
    for line in read(path)?.lines().filter(|l| !l.trim().is_empty()) {
        let text = match serde_json::from_str::<Json>(line) {
            Ok(Json::String(s)) => s,
            Ok(Json::Object(m)) => match m.get("input") {
                Some(Json::String(s)) => s.clone(),
                _ => bail!("{}: object lines need an \"input\" string", path.display()),
            },
            _ => line.to_string(),
        };
        out.push(input(&text)?);
    }
    Ok(out)
}

fn run(cmd: Cmd) -> Result<ExitCode> {
    match cmd {
        Cmd::Check { file } => {
            let tree = parse_source(&read(&file)?).map_err(|e| anyhow!("{}: {e}", file.display()));
            let tree = match tree {
                Ok(t) => t,
                Err(e) => {
                    print(&json!({"eligible": false, "error": e.to_string()}));
                    return Ok(ExitCode::from(1));
                }
            };
            let r = check_eligibility(&tree);
            print(&report_json(&r));
            Ok(if r.eligible() { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Cmd::Trace { file, entry, input: inp, limits: lim } => {
            let p = load(&file, entry.as_deref())?;
            let t = p.run(&input(&inp)?, limits(lim.as_deref())?);
            print(&serde_json::to_value(to_interchange(&p.id, &t))?);
            Ok(ExitCode::SUCCESS)
        }
        Cmd::ExpandInputs { file, entry, seeds, goal, seed, suggester } => {
            let p = load(&file, entry.as_deref())?;
            let goal = match goal {
                None => GoalConfig::default(),
                Some(g) => serde_json::from_str::<GoalConfig>(&g).map_err(|e| invalid(format!("--goal: {e}")))?,
            };
            let seeds = read_inputs(&seeds)?;
            let mut sug = suggester.map(SubprocessSuggester::new);
            let c = expand(
                &p,
                &seeds,
                &goal.goal(),
                &MutationPolicy::with_seed(seed),
                Limits::default(),
                sug.as_mut().map(|s| s as &mut dyn SuggesterClient),
            )?;
            let members: Vec<Json> = c
                .members
                .iter()
                .map(|m| json!({"input": m.input.canonical_text, "output": repr(&m.output), "source": m.source.name()}))
                .collect();
            let rejections: Vec<Json> = c.rejections.iter().map(|(i, k)| json!({"input": i, "error": k.name()})).collect();
            print(&json!({
                "program_id": c.program_id,
                "members": members,
                "coverage": {"line_rate": c.coverage.line_rate, "branch_rate": c.coverage.branch_rate},
                "attempts": c.attempts,
                "rejections": rejections,
                "shortfall": c.shortfall.map(|s| json!({
                    "missing_members": s.missing_members, "line_rate": s.line_rate, "branch_rate": s.branch_rate
                })),
            }));
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Emit { file, entry, input: inp, format } => {
            let fmt = TraceFormat::from_name(&format).ok_or_else(|| invalid(format!("unknown format {format}")))?;
            let p = load(&file, entry.as_deref())?;
            let i = input(&inp)?;
            let t = p.run(&i, Limits::default());
            let doc = match fmt {
                TraceFormat::Scratchpad => to_scratchpad(&p, &t),
                TraceFormat::Next => to_next(&p, &t, TruncationRule::default()),
                TraceFormat::Concise => to_concise(&p, &t),
                TraceFormat::ForwardMonologue => forward_monologue(&p, &t),
                TraceFormat::BackwardMonologue => {
                    let Outcome::Return(v) = &t.outcome else { bail!("the run fails, so there is no output to explain") };
                    abstract_constraints(&p, v, &i).and_then(|f| backward_monologue(&p, v, &f, &i))
                }
            }?;
            print!("{}", doc.text);
            if !doc.text.ends_with('\n') {
                println!();
            }
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Verify { direction, file, entry, input: inp, output, prediction } => {
            let p = load(&file, entry.as_deref())?;
            let v = match direction {
                Direction::Forward => {
                    let inp = inp.ok_or_else(|| invalid("verify forward needs --input"))?;
                    verify_forward_with(&p, &input(&inp)?, &prediction, Limits::default())
                }
                Direction::Backward => {
                    let out = output.ok_or_else(|| invalid("verify backward needs --output"))?;
                    let want = match serde_json::from_str::<Json>(&out) {
                        Ok(j @ (Json::Array(_) | Json::Object(_) | Json::Number(_) | Json::Bool(_) | Json::Null)) => {
                            semtrace::interchange::value_from_json(&j)
                        }
                        _ => parse_value_literal(&out).map_err(|e| anyhow!("--output: {e}"))?,
                    };
                    verify_backward_with(&p, &prediction, &want, Limits::default())
                }
            };
            print(&verdict_json(&v));
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Difftest { candidate, reference, corpus, entry } => {
            let r = load(&reference, entry.as_deref())?;
            let c = load(&candidate, Some(entry.as_deref().unwrap_or(&r.entry)))?;
            let corpus = read_inputs(&corpus)?;
            let rep = differential_test_with(&c, &r, &corpus, Limits::default());
            let results: Vec<Json> = rep
                .results
                .iter()
                .map(|(i, d)| {
                    let mut j = diff_json(d);
                    j["input"] = json!(i.canonical_text);
                    j
                })
                .collect();
            print(&json!({"overall": rep.overall.name(), "stdout_divergence": rep.stdout_divergence, "results": results}));
            Ok(ExitCode::SUCCESS)
        }
        Cmd::BuildPyx { config } => {
            let cfg = BuildConfig::load(&config)?;
            let out = build_dataset(&cfg)?;
            print(&serde_json::to_value(&out.manifest)?);
            Ok(ExitCode::SUCCESS)
        }
        Cmd::BuildPyxr { problems, solver, out } => {
            let problems = load_problems(&problems)?;
            let (records, skips) = collect_buggy(&problems, &mut SubprocessModel::new(solver));
            let rows: Vec<BuggyRecordJson> = records.iter().map(BuggyRecordJson::from).collect();
            jsonl::write(&out, &rows)?;
            let skips: Vec<Json> = skips.iter().map(|s| json!({"problem_id": s.problem_id, "reason": s.reason})).collect();
            print(&json!({"records": rows.len(), "skipped": skips}));
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Refine { problems, client, rounds, out } => {
            if rounds == 0 {
                return Err(invalid("--rounds must be at least 1"));
            }
            let problems = load_problems(&problems)?;
            let mut model = SubprocessModel::new(client);
            let results: Vec<_> =
                problems.iter().map(|p| run_episode(p, &mut model, rounds, &Schedule::default())).collect();
            let rows: Vec<Json> = results.iter().map(episode_json).collect();
            jsonl::write(&out, &rows)?;
            print(&json!({"episodes": results.len(), "pass_at_1": score_curve(&results, rounds)}));
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Dedup { dataset, benchmark, out, threshold } => {
            if !(0.0..=1.0).contains(&threshold) {
                return Err(invalid("--threshold must lie in [0, 1]"));
            }
            let records: Vec<DatasetRecord> = jsonl::read(&dataset)?;
            let bench: Vec<Json> = jsonl::read(&benchmark)?;
            let texts: Vec<String> = bench.iter().filter_map(|b| b["text"].as_str().map(String::from)).collect();
            let pairs: Vec<BenchmarkPair> = bench
                .iter()
                .filter_map(|b| Some(BenchmarkPair::canonical(b["input"].as_str()?, b["output"].as_str()?)))
                .collect();
            let (kept, removed) = decontaminate(&records, &pairs);
            let report = similarity_report(&kept, &texts, threshold);
            jsonl::write(&out, &kept)?;
            print(&json!({
                "kept": kept.len(),
                "removed": removed,
                "similarity": {
                    "measure": report.measure,
                    "threshold": report.threshold,
                    "histogram": report.histogram,
                    "flagged": report.flagged,
                },
            }));
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Stats { dir } => {
            let m: Manifest = serde_json::from_str(&read(&dir.join("manifest.json"))?)?;
            let mut lines = serde_json::Map::new();
            let mut ok = true;
            for (kind, file) in &m.files {
                let n = read(&dir.join(file))?.lines().count();
                ok &= m.counts.get(kind) == Some(&n);
                lines.insert(kind.clone(), json!(n));
            }
            eprint!("{}", m.input_rejections.render());
            print(&json!({
                "counts_match": ok,
                "counts": m.counts,
                "line_counts": lines,
                "coverage": m.coverage,
                "rejection_breakdown": m.rejection_breakdown,
                "input_rejections": m.input_rejections.rows,
            }));
            Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
    }
}

fn load_problems(path: &Path) -> Result<Vec<Problem>> {
    let specs: Vec<ProblemSpec> = jsonl::read(path)?;
    specs.iter().map(ProblemSpec::problem).collect()
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match with_big_stack(move || run(cli.cmd)) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<ConfigError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
