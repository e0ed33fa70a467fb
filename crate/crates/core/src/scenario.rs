//! Scenario files: parse, validate, execute, and render results.
//!
//! A scenario file starts with the line `fiberloom/1`; the rest is TOML.
//!
//! ```text
//! fiberloom/1
//! [scenario]
//! name = "fusion1_seed_pair"
//! kind = "fusion"          # seed | fusion | circuit | pattern
//! trials = 10000
//! seed = 7
//!
//! [fusion]
//! gate = "fusion1_tb"      # any fusion gate of the catalog
//! inputs = "seed_pair"     # seed_pair | reference
//! layout = "split"         # split | merged (merged: fusion1_tb only)
//!
//! [loss]                   # optional, per component kind
//! switch = 0.3
//! phase_mod = 0.3
//!
//! [output]                 # optional file names inside the output directory
//! results = "results.txt"
//! summary = "summary.json"
//! amplitudes = "amplitudes.txt"
//! ```
//!
//! `[circuit]` takes `name`, optional `theta`, `sign` and `input`
//! (two `[re, im]` pairs for qubit 0). `[pattern]` takes an edge-list
//! `graph`, either `chain` + `thetas` or explicit `steps` + `outputs`, and a
//! `backend` (`graph` or `circuit`).

use std::collections::BTreeMap;
use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt::Write as _;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuits::{
    build_named, fuse_with_layout, fusion_circuit, graph_frame, make_seed_cluster, make_seed_cluster_on, reference_inputs, CircuitParams,
    DetectorLayout, Frame, FusionKind, FusionStatus, VertexPair,
};
use crate::elements::ElementKind;
use crate::fock::PhotonicState;
use crate::formats::{parse_edge_list_at, write_logical_amplitudes};
use crate::graphstate::GraphState;
use crate::logical::LogicalState;
use crate::mbqc::{exact_distribution, Backend, Correction, Initial, MeasurementPattern, Step};
use crate::resources::LossModel;
use crate::{Pol, FORMAT_HEADER};

/// Upper bound on `scenario.trials`.
pub const MAX_TRIALS: i64 = 1_000_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScenarioError {
    #[error("{}{field}: {message}", line.map(|l| format!("line {l}: ")).unwrap_or_default())]
    Invalid {
        line: Option<usize>,
        field: String,
        message: String,
    },
    #[error("{0}")]
    Runtime(String),
}

impl ScenarioError {
    /// Process exit code: 2 for validation errors, 1 for runtime errors.
    pub fn exit_code(&self) -> i32 {
        match self {
            ScenarioError::Invalid { .. } => 2,
            ScenarioError::Runtime(_) => 1,
        }
    }
}

fn invalid(field: &str, message: impl Into<String>) -> ScenarioError {
    ScenarioError::Invalid {
        line: None,
        field: field.into(),
        message: message.into(),
    }
}

fn runtime(e: impl std::fmt::Display) -> ScenarioError {
    ScenarioError::Runtime(e.to_string())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFile {
    scenario: RawScenario,
    fusion: Option<RawFusion>,
    circuit: Option<RawCircuit>,
    pattern: Option<RawPattern>,
    loss: Option<BTreeMap<String, f64>>,
    output: Option<RawOutput>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    name: String,
    kind: String,
    trials: i64,
    seed: u64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFusion {
    gate: String,
    inputs: Option<String>,
    layout: Option<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCircuit {
    name: String,
    theta: Option<f64>,
    sign: Option<i8>,
    input: Option<Vec<[f64; 2]>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPattern {
    graph: String,
    chain: Option<Vec<u32>>,
    thetas: Option<Vec<f64>>,
    steps: Option<Vec<RawStep>>,
    outputs: Option<Vec<RawCorrection>>,
    backend: Option<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawStep {
    vertex: u32,
    theta: f64,
    #[serde(default)]
    sign_deps: Vec<usize>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCorrection {
    vertex: u32,
    #[serde(default)]
    x_deps: Vec<usize>,
    #[serde(default)]
    z_deps: Vec<usize>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    results: Option<String>,
    summary: Option<String>,
    amplitudes: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FusionInputs {
    /// Two seed clusters on rails (0, 1) and (2, 3), fused at qubits 1 and 2.
    SeedPair,
    /// The reference inputs used to derive the byproduct tables.
    Reference,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Task {
    Seed,
    Fusion {
        kind: FusionKind,
        inputs: FusionInputs,
        layout: DetectorLayout,
    },
    Circuit {
        name: String,
        params: CircuitParams,
        input: [Complex64; 2],
    },
    Pattern {
        graph: GraphState,
        pattern: MeasurementPattern,
        backend: Backend,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct OutputNames {
    pub results: String,
    pub summary: String,
    pub amplitudes: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub trials: u64,
    pub seed: u64,
    pub loss: LossModel,
    pub task: Task,
    pub output: OutputNames,
}

fn line_of(text: &str, byte: usize) -> usize {
    text[..byte.min(text.len())].matches('\n').count() + 1
}

fn check_file_name(field: &str, name: String) -> Result<String, ScenarioError> {
    let ok = !name.is_empty() && name != "." && name != ".." && !name.contains(['/', '\\']) && !name.contains('\0');
    if ok {
        Ok(name)
    } else {
        Err(invalid(field, format!("`{name}` must be a plain file name")))
    }
}

/// Parses and validates a scenario file.
pub fn parse_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    let first = text.lines().next().unwrap_or("").trim();
    if first != FORMAT_HEADER {
        return Err(ScenarioError::Invalid {
            line: Some(1),
            field: "header".into(),
            message: format!("first line must be `{FORMAT_HEADER}`"),
        });
    }
    // comment out the header so TOML line numbers match the file
    let body = format!("#{text}");
    let raw: RawFile = toml::from_str(&body).map_err(|e| {
        let line = e.span().map(|s| line_of(&body, s.start));
        ScenarioError::Invalid {
            line,
            field: "toml".into(),
            message: e.message().to_string(),
        }
    })?;
    validate(raw)
}

fn parse_layout(field: &str, s: Option<&str>) -> Result<DetectorLayout, ScenarioError> {
    match s.unwrap_or("split") {
        "split" => Ok(DetectorLayout::Split),
        "merged" => Ok(DetectorLayout::Merged),
        other => Err(invalid(field, format!("unknown layout `{other}` (split, merged)"))),
    }
}

fn validate(raw: RawFile) -> Result<Scenario, ScenarioError> {
    let s = raw.scenario;
    if s.name.trim().is_empty() {
        return Err(invalid("scenario.name", "must not be empty"));
    }
    if s.trials < 1 || s.trials > MAX_TRIALS {
        return Err(invalid(
            "scenario.trials",
            format!("must lie in 1..={MAX_TRIALS}, got {}", s.trials),
        ));
    }
    let mut loss = LossModel::lossless();
    for (k, p) in raw.loss.unwrap_or_default() {
        let field = format!("loss.{k}");
        if ElementKind::from_name(&k).is_none() {
            let names: Vec<&str> = ElementKind::ALL.iter().map(|k| k.name()).collect();
            return Err(invalid(
                &field,
                format!("unknown component kind (expected one of {})", names.join(", ")),
            ));
        }
        if !(0.0..1.0).contains(&p) {
            return Err(invalid(&field, format!("probability must lie in [0, 1), got {p}")));
        }
        loss.per_kind.insert(k, p);
    }
    let section = |present: bool, name: &str| {
        if present {
            Ok(())
        } else {
            Err(invalid(name, format!("kind `{}` needs a [{name}] section", s.kind)))
        }
    };
    let task = match s.kind.as_str() {
        "seed" => Task::Seed,
        "fusion" => {
            section(raw.fusion.is_some(), "fusion")?;
            let f = raw.fusion.expect("checked");
            let kind =
                FusionKind::from_name(&f.gate).ok_or_else(|| invalid("fusion.gate", format!("`{}` is not a fusion gate", f.gate)))?;
            let inputs = match f.inputs.as_deref().unwrap_or("seed_pair") {
                "seed_pair" => FusionInputs::SeedPair,
                "reference" => FusionInputs::Reference,
                other => return Err(invalid("fusion.inputs", format!("unknown inputs `{other}` (seed_pair, reference)"))),
            };
            let layout = parse_layout("fusion.layout", f.layout.as_deref())?;
            if layout == DetectorLayout::Merged && kind != FusionKind::Type1TimeBin {
                return Err(invalid("fusion.layout", "the merged layout exists for fusion1_tb only"));
            }
            Task::Fusion { kind, inputs, layout }
        }
        "circuit" => {
            section(raw.circuit.is_some(), "circuit")?;
            let c = raw.circuit.expect("checked");
            if FusionKind::from_name(&c.name).is_some() {
                return Err(invalid("circuit.name", "fusion gates run with kind = \"fusion\""));
            }
            let sign = c.sign.unwrap_or(1);
            if sign != 1 && sign != -1 {
                return Err(invalid("circuit.sign", "must be 1 or -1"));
            }
            let params = CircuitParams {
                theta: c.theta.unwrap_or(0.0),
                sign,
                layout: DetectorLayout::Split,
            };
            if !params.theta.is_finite() {
                return Err(invalid("circuit.theta", "must be finite"));
            }
            build_named(&c.name, &params).map_err(|e| invalid("circuit.name", e.to_string()))?;
            let input = match c.input {
                None => [Complex64::new(FRAC_1_SQRT_2, 0.0), Complex64::new(FRAC_1_SQRT_2, 0.0)],
                Some(v) => {
                    let [a, b] = v[..] else {
                        return Err(invalid("circuit.input", "needs exactly two [re, im] pairs"));
                    };
                    let (a, b) = (Complex64::new(a[0], a[1]), Complex64::new(b[0], b[1]));
                    let n = (a.norm_sqr() + b.norm_sqr()).sqrt();
                    if !n.is_finite() || n < 1e-12 {
                        return Err(invalid("circuit.input", "must be a nonzero finite vector"));
                    }
                    [a / n, b / n]
                }
            };
            Task::Circuit {
                name: c.name,
                params,
                input,
            }
        }
        "pattern" => {
            section(raw.pattern.is_some(), "pattern")?;
            let p = raw.pattern.expect("checked");
            let graph = parse_edge_list_at(&p.graph, 0).map_err(|e| invalid("pattern.graph", e.to_string()))?;
            let pattern = match (p.chain, p.thetas, p.steps, p.outputs) {
                (Some(chain), Some(thetas), None, None) => {
                    MeasurementPattern::linear_chain(&chain, &thetas).map_err(|e| invalid("pattern.chain", e.to_string()))?
                }
                (None, None, Some(steps), Some(outputs)) => {
                    let pat = MeasurementPattern {
                        steps: steps
                            .into_iter()
                            .map(|s| Step {
                                vertex: s.vertex,
                                theta: s.theta,
                                sign_deps: s.sign_deps.into_iter().collect(),
                            })
                            .collect(),
                        outputs: outputs
                            .into_iter()
                            .map(|c| Correction {
                                vertex: c.vertex,
                                x_deps: c.x_deps.into_iter().collect(),
                                z_deps: c.z_deps.into_iter().collect(),
                            })
                            .collect(),
                    };
                    pat.validate().map_err(|e| invalid("pattern.steps", e.to_string()))?;
                    pat
                }
                _ => return Err(invalid("pattern", "give either `chain` and `thetas`, or `steps` and `outputs`")),
            };
            if pattern.steps.iter().any(|s| !s.theta.is_finite()) {
                return Err(invalid("pattern.thetas", "angles must be finite"));
            }
            if let Some(v) = pattern.vertices().into_iter().find(|v| !graph.vertices().contains(v)) {
                return Err(invalid("pattern", format!("vertex {v} is not in the graph")));
            }
            let backend = match p.backend.as_deref().unwrap_or("graph") {
                "graph" => Backend::Graph,
                "circuit" => Backend::Circuit,
                other => return Err(invalid("pattern.backend", format!("unknown backend `{other}` (graph, circuit)"))),
            };
            if graph.len() > crate::graphstate::MAX_STATEVECTOR_VERTICES {
                return Err(invalid("pattern.graph", "graphs are limited to 12 vertices"));
            }
            Task::Pattern { graph, pattern, backend }
        }
        other => {
            return Err(invalid(
                "scenario.kind",
                format!("unknown kind `{other}` (seed, fusion, circuit, pattern)"),
            ))
        }
    };
    if !loss.per_kind.is_empty() && !matches!(task, Task::Fusion { .. } | Task::Circuit { .. }) {
        return Err(invalid("loss", "loss applies to fusion and circuit scenarios"));
    }
    let out = raw.output.unwrap_or(RawOutput {
        results: None,
        summary: None,
        amplitudes: None,
    });
    let output = OutputNames {
        results: check_file_name("output.results", out.results.unwrap_or_else(|| "results.txt".into()))?,
        summary: check_file_name("output.summary", out.summary.unwrap_or_else(|| "summary.json".into()))?,
        amplitudes: check_file_name("output.amplitudes", out.amplitudes.unwrap_or_else(|| "amplitudes.txt".into()))?,
    };
    Ok(Scenario {
        name: s.name,
        trials: s.trials as u64,
        seed: s.seed,
        loss,
        task,
        output,
    })
}

/// One distinguishable result of a trial with its exact probability.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Outcome {
    pub label: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub status: Option<&'static str>,
    pub exact: f64,
    pub count: u64,
    pub empirical: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuccessStats {
    pub exact: f64,
    pub count: u64,
    pub empirical: f64,
    pub sigma: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Summary {
    pub format: &'static str,
    pub scenario: String,
    pub kind: &'static str,
    pub trials: u64,
    pub seed: u64,
    pub outcomes: Vec<Outcome>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub success: Option<SuccessStats>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub deterministic: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub amplitudes_file: Option<String>,
}

/// Rendered outputs of a run, keyed by file name.
#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioOutput {
    pub summary: Summary,
    pub files: Vec<(String, String)>,
}

struct Exact {
    outcomes: Vec<(String, Option<&'static str>, f64)>,
    amplitudes: Option<LogicalState>,
    deterministic: Option<bool>,
}

fn push(map: &mut Vec<(String, Option<&'static str>, f64)>, label: String, status: Option<&'static str>, p: f64) {
    match map.iter_mut().find(|(l, _, _)| *l == label) {
        Some(e) => e.2 += p,
        None => map.push((label, status, p)),
    }
}

fn join(readout: &[u32]) -> String {
    readout.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(",")
}

fn fusion_inputs(kind: FusionKind, inputs: FusionInputs) -> Result<(PhotonicState, Frame, u32, u32), ScenarioError> {
    match inputs {
        FusionInputs::SeedPair => {
            let carrier = if kind.is_polarization() { Pol::H } else { Pol::None };
            let (s1, f1) = make_seed_cluster_on(0, 1, carrier).map_err(runtime)?;
            let (s2, f2) = make_seed_cluster_on(2, 3, carrier).map_err(runtime)?;
            Ok((s1.tensor(&s2).map_err(runtime)?, f1.merged(&f2), 1, 2))
        }
        FusionInputs::Reference => {
            let (g1, VertexPair(v1, v2), g2) = reference_inputs(kind);
            let g = g1.union(&g2).map_err(runtime)?;
            let frame = graph_frame(&g, kind.is_polarization());
            let state = frame.encode(&g.to_statevector().map_err(runtime)?).map_err(runtime)?;
            Ok((state, frame, v1, v2))
        }
    }
}

fn exact(s: &Scenario) -> Result<Exact, ScenarioError> {
    let mut outcomes = Vec::new();
    let lossy = s.loss.by_kind();
    match &s.task {
        Task::Seed => {
            let (state, frame) = make_seed_cluster();
            let logical = frame.decode(&state).map_err(runtime)?;
            for (i, a) in logical.amplitudes().iter().enumerate() {
                push(&mut outcomes, logical.label(i), None, a.norm_sqr());
            }
            Ok(Exact {
                outcomes,
                amplitudes: Some(logical),
                deterministic: None,
            })
        }
        Task::Fusion { kind, inputs, layout } => {
            let (joint, frame, qa, qb) = fusion_inputs(*kind, *inputs)?;
            let status = |ok: bool| Some(if ok { "success" } else { "failure" });
            if lossy.is_empty() {
                let branches = fuse_with_layout(*kind, &joint, &frame, qa, qb, *layout).map_err(runtime)?;
                for b in &branches {
                    push(
                        &mut outcomes,
                        join(&b.readout),
                        status(b.status == FusionStatus::Success),
                        b.probability,
                    );
                }
                let first = branches.iter().find(|b| b.status == FusionStatus::Success);
                let amplitudes = match first {
                    Some(b) => Some(b.frame.decode(&b.post).map_err(runtime)?),
                    None => None,
                };
                Ok(Exact {
                    outcomes,
                    amplitudes,
                    deterministic: None,
                })
            } else {
                let c = fusion_circuit(*kind, &frame, qa, qb, *layout).map_err(runtime)?.with_loss(&lossy);
                for b in c.run(&joint).map_err(runtime)? {
                    push(&mut outcomes, join(&b.readout), status(kind.succeeded(&b.readout)), b.probability);
                }
                Ok(Exact {
                    outcomes,
                    amplitudes: None,
                    deterministic: None,
                })
            }
        }
        Task::Circuit { name, params, input } => {
            let mut c = build_named(name, params).map_err(runtime)?;
            let q = *c.input.ids().first().expect("catalog circuits act on qubit 0");
            let logical = LogicalState::new(vec![q], input.to_vec()).map_err(runtime)?;
            let state = c.input.encode(&logical).map_err(runtime)?;
            if !lossy.is_empty() {
                c = c.with_loss(&lossy);
            }
            let mut amplitudes = None;
            for b in c.run(&state).map_err(runtime)? {
                if !c.detectors.is_empty() {
                    push(&mut outcomes, join(&b.readout), None, b.probability);
                    continue;
                }
                match c.output.decode(&b.post) {
                    Ok(out) => {
                        for (i, a) in out.amplitudes().iter().enumerate() {
                            push(&mut outcomes, out.label(i), None, b.probability * a.norm_sqr());
                        }
                        if lossy.is_empty() {
                            amplitudes = Some(out);
                        }
                    }
                    Err(_) => push(&mut outcomes, "lost".into(), None, b.probability),
                }
            }
            Ok(Exact {
                outcomes,
                amplitudes,
                deterministic: None,
            })
        }
        Task::Pattern { graph, pattern, backend } => {
            let runs = exact_distribution(pattern, &Initial::Graph(graph.clone()), *backend).map_err(runtime)?;
            for r in &runs {
                let label: String = r.outcomes.iter().map(|b| char::from(b'0' + b)).collect();
                push(&mut outcomes, format!("m={label}"), None, r.probability);
            }
            let first = runs.first().map(|r| r.final_state.clone());
            let deterministic = match &first {
                Some(f) => runs
                    .iter()
                    .all(|r| r.final_state.fidelity(f).map(|x| x > 1.0 - 1e-10).unwrap_or(false)),
                None => false,
            };
            Ok(Exact {
                outcomes,
                amplitudes: first,
                deterministic: Some(deterministic),
            })
        }
    }
}

fn kind_name(t: &Task) -> &'static str {
    match t {
        Task::Seed => "seed",
        Task::Fusion { .. } => "fusion",
        Task::Circuit { .. } => "circuit",
        Task::Pattern { .. } => "pattern",
    }
}

/// Samples `trials` outcome indices; trial `i` uses stream `i` of a
/// generator seeded with `seed`.
pub fn sample_counts(probs: &[f64], trials: u64, seed: u64) -> Vec<u64> {
    let total: f64 = probs.iter().sum();
    let n = probs.len();
    (0..trials)
        .into_par_iter()
        .fold(
            || vec![0u64; n],
            |mut counts, i| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(i);
                let u = rng.gen::<f64>() * total;
                let mut acc = 0.0;
                let k = probs
                    .iter()
                    .position(|p| {
                        acc += p;
                        u < acc
                    })
                    .or_else(|| probs.iter().rposition(|&p| p > 0.0))
                    .unwrap_or(0);
                counts[k] += 1;
                counts
            },
        )
        .reduce(|| vec![0u64; n], |a, b| a.iter().zip(&b).map(|(x, y)| x + y).collect())
}

fn num(x: f64) -> String {
    format!("{x:.12}")
}

/// Executes a validated scenario and renders every output file.
pub fn run_scenario(s: &Scenario) -> Result<ScenarioOutput, ScenarioError> {
    let mut ex = exact(s)?;
    ex.outcomes.retain(|(_, _, p)| *p > 1e-15);
    ex.outcomes.sort_by(|a, b| a.0.cmp(&b.0));
    let probs: Vec<f64> = ex.outcomes.iter().map(|o| o.2).collect();
    let counts = sample_counts(&probs, s.trials, s.seed);
    let n = s.trials as f64;
    let outcomes: Vec<Outcome> = ex
        .outcomes
        .iter()
        .zip(&counts)
        .map(|((label, status, p), &c)| Outcome {
            label: label.clone(),
            status: *status,
            exact: *p,
            count: c,
            empirical: c as f64 / n,
        })
        .collect();
    let success = if matches!(s.task, Task::Fusion { .. }) {
        let exact: f64 = outcomes.iter().filter(|o| o.status == Some("success")).map(|o| o.exact).sum();
        let count: u64 = outcomes.iter().filter(|o| o.status == Some("success")).map(|o| o.count).sum();
        Some(SuccessStats {
            exact,
            count,
            empirical: count as f64 / n,
            sigma: (exact * (1.0 - exact) / n).sqrt(),
        })
    } else {
        None
    };
    let kind = kind_name(&s.task);
    let mut results = format!(
        "{FORMAT_HEADER} results\nscenario {}\nkind {kind}\ntrials {}\nseed {}\n",
        s.name, s.trials, s.seed
    );
    for (k, p) in &s.loss.per_kind {
        let _ = writeln!(results, "loss {k} {}", num(*p));
    }
    results.push_str("outcomes\n");
    for o in &outcomes {
        let st = o.status.map(|s| format!(" status={s}")).unwrap_or_default();
        let _ = writeln!(
            results,
            "  label={}{st} exact={} count={} empirical={}",
            o.label,
            num(o.exact),
            o.count,
            num(o.empirical)
        );
    }
    if let Some(sx) = &success {
        let _ = writeln!(
            results,
            "success exact={} count={} empirical={} sigma={}",
            num(sx.exact),
            sx.count,
            num(sx.empirical),
            num(sx.sigma)
        );
    }
    if let Some(d) = ex.deterministic {
        let _ = writeln!(results, "deterministic {d}");
    }
    let mut files = Vec::new();
    let amplitudes_file = ex.amplitudes.as_ref().filter(|a| a.num_qubits() <= 12).map(|a| {
        files.push((s.output.amplitudes.clone(), write_logical_amplitudes(a)));
        s.output.amplitudes.clone()
    });
    if let Some(f) = &amplitudes_file {
        let _ = writeln!(results, "amplitudes {f}");
    }
    let summary = Summary {
        format: FORMAT_HEADER,
        scenario: s.name.clone(),
        kind,
        trials: s.trials,
        seed: s.seed,
        outcomes,
        success,
        deterministic: ex.deterministic,
        amplitudes_file,
    };
    let json = serde_json::to_string_pretty(&summary).map_err(runtime)? + "\n";
    files.insert(0, (s.output.summary.clone(), json));
    files.insert(0, (s.output.results.clone(), results));
    Ok(ScenarioOutput { summary, files })
}
