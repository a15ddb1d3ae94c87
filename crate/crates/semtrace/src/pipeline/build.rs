use std::collections::BTreeMap;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

use super::{error_stats, prefix_for, DatasetRecord, ErrorTable, Generator, Provenance, TOOL_VERSION};
use crate::clients::SubprocessSuggester;
use crate::config::{BuildConfig, RecordKind};
use crate::problems::{CandidateSpec, ProblemSpec};
use crate::{jsonl, BIG_STACK};
use semtrace_core::formats::{abstract_constraints, backward_monologue, forward_monologue, input_id, with_prefix};
use semtrace_core::inputs::{expand, parse_input_literal, InputTuple, MemberSource, SuggesterClient};
use semtrace_core::refinery::{assemble_debug_sample, attach_patch, buggy_record};
use semtrace_core::subjectlang::ParseError;
use semtrace_core::tracer::{repr, Outcome};
use semtrace_core::verify::{find_witness_input, verify_backward_with, verify_forward_with};
use semtrace_core::{Problem, Program, ProgramError};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProgramRejection {
    pub program_id: String,
    /// `parse`, `eligibility`, `seeds` or `expansion`.
    pub stage: String,
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub line: Option<u32>,
    pub message: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProgramCounts {
    pub total: usize,
    pub eligible: usize,
    pub rejected: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CoverageSummary {
    pub programs: usize,
    pub mean_line_rate: f64,
    pub mean_branch_rate: f64,
    pub mean_corpus_size: f64,
}

/// Candidate records dropped between generation and emission.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationCounts {
    pub forward_rejected: usize,
    pub backward_rejected: usize,
    pub witness_missing: usize,
    pub format_errors: usize,
    pub candidates_equivalent: usize,
    pub candidates_skipped: usize,
}

impl VerificationCounts {
    fn add(&mut self, o: &VerificationCounts) {
        self.forward_rejected += o.forward_rejected;
        self.backward_rejected += o.backward_rejected;
        self.witness_missing += o.witness_missing;
        self.format_errors += o.format_errors;
        self.candidates_equivalent += o.candidates_equivalent;
        self.candidates_skipped += o.candidates_skipped;
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShortfallRecord {
    pub program_id: String,
    pub missing_members: usize,
    pub line_rate: f64,
    pub branch_rate: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool_version: String,
    pub master_seed: u64,
    pub programs: ProgramCounts,
    pub counts: BTreeMap<String, usize>,
    pub files: BTreeMap<String, String>,
    pub coverage: CoverageSummary,
    pub rejections: Vec<ProgramRejection>,
    pub rejection_breakdown: BTreeMap<String, usize>,
    /// Mutated or suggested inputs that failed validation, by error type.
    pub input_rejections: ErrorTable,
    pub verification: VerificationCounts,
    pub shortfalls: Vec<ShortfallRecord>,
}

pub struct BuildOutput {
    pub manifest: Manifest,
    pub records: BTreeMap<RecordKind, Vec<DatasetRecord>>,
}

#[derive(Default)]
struct ProgramOutcome {
    records: Vec<DatasetRecord>,
    rejection: Option<ProgramRejection>,
    coverage: Option<(f64, f64, usize)>,
    input_rejections: Vec<String>,
    shortfall: Option<ShortfallRecord>,
    counts: VerificationCounts,
}

fn reject(spec: &ProblemSpec, stage: &str, kind: &str, line: Option<u32>, message: String) -> ProgramOutcome {
    log::info!("{}: rejected at {stage}: {message}", spec.id);
    ProgramOutcome {
        rejection: Some(ProgramRejection { program_id: spec.id.clone(), stage: stage.into(), kind: kind.into(), line, message }),
        ..Default::default()
    }
}

fn load_program(spec: &ProblemSpec) -> Result<Program, ProgramOutcome> {
    let p = Program::parse(spec.id.clone(), spec.source.clone(), spec.entry.as_deref()).map_err(|e| {
        let (kind, line) = match &e {
            ProgramError::Parse(ParseError::Syntax { line, .. }) => ("SyntaxError", Some(*line)),
            ProgramError::Parse(ParseError::Unsupported { line, .. }) => ("UnsupportedConstruct", Some(*line)),
            ProgramError::NoSuchEntry(_) => ("NoSuchEntry", None),
            _ => ("NoFunction", None),
        };
        reject(spec, "parse", kind, line, e.to_string())
    })?;
    let report = p.eligibility();
    if let Some((criterion, d)) = report.first_failure() {
        return Err(reject(spec, "eligibility", criterion, Some(d.line), d.message.clone()));
    }
    Ok(p)
}

fn stmt_prompt(program: &Program, call: &str, output: &str) -> String {
    format!("{}\nassert {call} == {output}", program.source.trim_end())
}

fn process(spec: &ProblemSpec, candidates: &[&CandidateSpec], cfg: &BuildConfig) -> ProgramOutcome {
    let program = match load_program(spec) {
        Ok(p) => p,
        Err(o) => return o,
    };
    let mut seeds = Vec::new();
    for s in &spec.corpus {
        match parse_input_literal(s) {
            Ok(t) => seeds.push(t),
            Err(e) => return reject(spec, "seeds", "LiteralParseError", None, format!("{s}: {e}")),
        }
    }
    let limits = cfg.limits.limits();
    let policy = cfg.policy();
    let mut suggester = cfg.suggester.as_ref().map(SubprocessSuggester::new);
    let corpus = match expand(
        &program,
        &seeds,
        &cfg.goal.goal(),
        &policy,
        limits,
        suggester.as_mut().map(|s| s as &mut dyn SuggesterClient),
    ) {
        Ok(c) => c,
        Err(e) => return reject(spec, "expansion", "NoValidSeed", None, e.to_string()),
    };
    let mut out = ProgramOutcome {
        coverage: Some((corpus.coverage.line_rate, corpus.coverage.branch_rate, corpus.len())),
        input_rejections: corpus.rejections.iter().map(|(_, k)| k.name().to_string()).collect(),
        shortfall: corpus.shortfall.as_ref().map(|s| ShortfallRecord {
            program_id: spec.id.clone(),
            missing_members: s.missing_members,
            line_rate: s.line_rate,
            branch_rate: s.branch_rate,
        }),
        ..Default::default()
    };
    let enabled = |k| cfg.kinds.contains(&k);
    let record = |kind: RecordKind, key: &str, text: String, io: Option<(&InputTuple, String, String)>, client: bool| {
        let (input_id, input, output) = match io {
            Some((i, id, o)) => (Some(id), Some(i.canonical_text.clone()), Some(o)),
            None => (None, None, None),
        };
        DatasetRecord {
            kind,
            id: format!("{}/{}/{key}", spec.id, kind.name()),
            program_id: spec.id.clone(),
            input_id,
            text,
            input,
            output,
            provenance: Provenance {
                generator: if client { Generator::Client } else { Generator::Deterministic },
                seed: cfg.master_seed,
                tool_version: TOOL_VERSION.to_string(),
            },
        }
    };

    if enabled(RecordKind::Nl2code) {
        let text = with_prefix(prefix_for(RecordKind::Nl2code), &spec.prompt, spec.source.trim_end());
        out.records.push(record(RecordKind::Nl2code, "0", text, None, false));
    }

    let inputs: Vec<InputTuple> = corpus.inputs().cloned().collect();
    let sampled = corpus.members.iter().take(cfg.samples_per_program).enumerate();
    for (k, m) in sampled {
        let client = m.source == MemberSource::Suggester;
        let trace = program.run(&m.input, limits);
        let Outcome::Return(value) = &trace.outcome else { continue };
        let out_lit = repr(value);
        if enabled(RecordKind::ForwardMonologue) {
            match forward_monologue(&program, &trace) {
                Ok(doc) => {
                    let call = format!("{}({})", program.entry, m.input.call_args());
                    let prompt = stmt_prompt(&program, &call, "??");
                    let text = with_prefix(prefix_for(RecordKind::ForwardMonologue), &prompt, &doc.text);
                    if verify_forward_with(&program, &m.input, &text, limits).is_accept() {
                        let io = Some((&m.input, input_id(&trace), out_lit.clone()));
                        out.records.push(record(RecordKind::ForwardMonologue, &k.to_string(), text, io, client));
                    } else {
                        out.counts.forward_rejected += 1;
                    }
                }
                Err(e) => {
                    log::warn!("{}: forward monologue: {e}", spec.id);
                    out.counts.format_errors += 1;
                }
            }
        }
        if enabled(RecordKind::BackwardMonologue) {
            let others: Vec<InputTuple> = inputs.iter().filter(|i| **i != m.input).cloned().collect();
            let Some(witness) = find_witness_input(&program, value, &others, &policy, cfg.witness_budget) else {
                out.counts.witness_missing += 1;
                continue;
            };
            let doc = abstract_constraints(&program, value, &witness)
                .and_then(|facts| backward_monologue(&program, value, &facts, &witness));
            match doc {
                Ok(doc) => {
                    let call = format!("{}(??)", program.entry);
                    let prompt = stmt_prompt(&program, &call, &out_lit);
                    let text = with_prefix(prefix_for(RecordKind::BackwardMonologue), &prompt, &doc.text);
                    if verify_backward_with(&program, &text, value, limits).is_accept() {
                        let wtrace = program.run(&witness, limits);
                        let io = Some((&witness, input_id(&wtrace), out_lit.clone()));
                        out.records.push(record(RecordKind::BackwardMonologue, &k.to_string(), text, io, client));
                    } else {
                        out.counts.backward_rejected += 1;
                    }
                }
                Err(e) => {
                    log::warn!("{}: backward monologue: {e}", spec.id);
                    out.counts.format_errors += 1;
                }
            }
        }
    }

    if enabled(RecordKind::DebugRefine) && !candidates.is_empty() {
        let problem = Problem { id: spec.id.clone(), prompt: spec.prompt.clone(), reference: program.clone(), corpus: inputs };
        for c in candidates {
            let mut rec = match buggy_record(&problem, &c.source) {
                Ok(Some(r)) => r,
                Ok(None) => {
                    out.counts.candidates_equivalent += 1;
                    continue;
                }
                Err(e) => {
                    log::warn!("{}: candidate {}: {e}", spec.id, c.id);
                    out.counts.candidates_skipped += 1;
                    continue;
                }
            };
            let rationale = describe_failure(&problem, &c.source, &rec.failing_input, &repr(&rec.expected_output));
            let check = attach_patch(&mut rec, &problem, Some(rationale), spec.source.trim_end().to_string());
            match (check.passed, assemble_debug_sample(&rec)) {
                (true, Some(text)) => {
                    let trace = program.run(&rec.failing_input, limits);
                    let io = Some((&rec.failing_input, input_id(&trace), repr(&rec.expected_output)));
                    out.records.push(record(RecordKind::DebugRefine, &c.id, text, io, false));
                }
                _ => out.counts.candidates_skipped += 1,
            }
        }
    }
    out
}

fn describe_failure(problem: &Problem, source: &str, input: &InputTuple, expected: &str) -> String {
    let call = format!("{}({})", problem.reference.entry, input.call_args());
    let got = match Program::parse("candidate", source, Some(&problem.reference.entry)) {
        Ok(p) => match p.run(input, Default::default()).outcome {
            Outcome::Return(v) => format!("returns {}", repr(&v)),
            Outcome::Failure { kind, line, .. } => format!("raises {kind} on line {line}"),
        },
        Err(e) => format!("fails to load ({e})"),
    };
    format!("The faulty trace shows that `{call}` {got}, while the expected result is {expected}.\n")
}

/// Runs every program through the pipeline; the merge follows program order.
pub fn build_records(cfg: &BuildConfig, specs: &[ProblemSpec], candidates: &[CandidateSpec]) -> BuildOutput {
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<ProgramOutcome>>> = Mutex::new((0..specs.len()).map(|_| None).collect());
    std::thread::scope(|s| {
        for _ in 0..cfg.workers.min(specs.len().max(1)) {
            std::thread::Builder::new()
                .stack_size(BIG_STACK)
                .spawn_scoped(s, || loop {
                    let i = next.fetch_add(1, Ordering::SeqCst);
                    let Some(spec) = specs.get(i) else { break };
                    let mine: Vec<&CandidateSpec> = candidates.iter().filter(|c| c.problem_id == spec.id).collect();
                    let started = std::time::Instant::now();
                    let o = process(spec, &mine, cfg);
                    log::debug!("{}: {:?}", spec.id, started.elapsed());
                    results.lock().expect("results lock")[i] = Some(o);
                })
                .expect("spawn worker");
        }
    });
    let outcomes: Vec<ProgramOutcome> = results.into_inner().expect("results lock").into_iter().flatten().collect();

    let mut records: BTreeMap<RecordKind, Vec<DatasetRecord>> = cfg.kinds.iter().map(|k| (*k, Vec::new())).collect();
    let mut rejections = Vec::new();
    let mut verification = VerificationCounts::default();
    let mut input_rejections = Vec::new();
    let mut shortfalls = Vec::new();
    let (mut n_cov, mut line_sum, mut branch_sum, mut size_sum) = (0usize, 0.0, 0.0, 0usize);
    for o in outcomes {
        for r in o.records {
            records.entry(r.kind).or_default().push(r);
        }
        rejections.extend(o.rejection);
        verification.add(&o.counts);
        input_rejections.extend(o.input_rejections);
        shortfalls.extend(o.shortfall);
        if let Some((l, b, n)) = o.coverage {
            n_cov += 1;
            line_sum += l;
            branch_sum += b;
            size_sum += n;
        }
    }
    let mean = |x: f64| if n_cov == 0 { 0.0 } else { x / n_cov as f64 };
    let mut rejection_breakdown = BTreeMap::new();
    for r in &rejections {
        *rejection_breakdown.entry(r.kind.clone()).or_default() += 1;
    }
    let manifest = Manifest {
        tool_version: TOOL_VERSION.to_string(),
        master_seed: cfg.master_seed,
        programs: ProgramCounts { total: specs.len(), eligible: specs.len() - rejections.len(), rejected: rejections.len() },
        counts: records.iter().map(|(k, v)| (k.name().to_string(), v.len())).collect(),
        files: records.keys().map(|k| (k.name().to_string(), format!("{}.jsonl", k.name()))).collect(),
        coverage: CoverageSummary {
            programs: n_cov,
            mean_line_rate: mean(line_sum),
            mean_branch_rate: mean(branch_sum),
            mean_corpus_size: mean(size_sum as f64),
        },
        rejections,
        rejection_breakdown,
        input_rejections: error_stats(input_rejections.iter().map(String::as_str)),
        verification,
        shortfalls,
    };
    BuildOutput { manifest, records }
}

/// Reads the configured inputs, builds, and writes one JSONL per kind plus `manifest.json`.
pub fn build_dataset(cfg: &BuildConfig) -> Result<BuildOutput> {
    let specs: Vec<ProblemSpec> = jsonl::read(&cfg.programs)?;
    let candidates: Vec<CandidateSpec> = match &cfg.candidates {
        Some(p) => jsonl::read(p)?,
        None => Vec::new(),
    };
    let out = build_records(cfg, &specs, &candidates);
    write_output(&cfg.out_dir, &out)?;
    Ok(out)
}

pub fn write_output(dir: &Path, out: &BuildOutput) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    for (kind, recs) in &out.records {
        jsonl::write(&dir.join(format!("{}.jsonl", kind.name())), recs)?;
    }
    let mut m = serde_json::to_string_pretty(&out.manifest)?;
    m.push('\n');
    std::fs::write(dir.join("manifest.json"), m)?;
    Ok(())
}
