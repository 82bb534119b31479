//! The six-controller cascade around the center of mass.
//!
//! Each leg gets three cooperating fuzzy controllers: one maps the COM
//! reference and current thigh angle to a knee angle, one maps the knee
//! angle to an ankle position, and one maps the ankle position back to a
//! thigh angle. The wiring is therefore cyclic; [`run_chain`] resolves
//! it with a warm-started Gauss-Seidel sweep. Two further controller
//! slots exist as named placeholders with no inputs or outputs and take
//! no part in training or chain evaluation.
//!
//! [`supervise_com`] closes the outer loop: it re-estimates the COM from
//! the resolved stance-leg signals so [`closed_loop_walk`] can report
//! how far the learned cascade drifts from the reference trajectory.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::biped::{
    com_trajectory, sample_at_phase, BipedParams, GaitSample, GaitSpec, LegPose, PlanarPoint,
};
use crate::error::{Error, Result};
use crate::fuzzy::TsFis;
use crate::train::{train_hybrid, Dataset, Sample, TrainConfig, TrainReport};

/// Default iteration budget for [`run_chain`].
pub const CHAIN_MAX_ITER: usize = 10;
/// Default convergence tolerance for [`run_chain`], in signal units
/// (radians and meters; all chain signals are O(1)).
pub const CHAIN_TOL: f64 = 1e-6;

/// Identifier of one controller slot in the hierarchy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ControllerId {
    Hflc1,
    Hflc2,
    Hflc3,
    Hflc4,
    Hflc5,
    Hflc6,
    Hflc7,
    Hflc8,
}

impl ControllerId {
    pub fn name(&self) -> &'static str {
        match self {
            ControllerId::Hflc1 => "HFLC1",
            ControllerId::Hflc2 => "HFLC2",
            ControllerId::Hflc3 => "HFLC3",
            ControllerId::Hflc4 => "HFLC4",
            ControllerId::Hflc5 => "HFLC5",
            ControllerId::Hflc6 => "HFLC6",
            ControllerId::Hflc7 => "HFLC7",
            ControllerId::Hflc8 => "HFLC8",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "HFLC1" => Ok(ControllerId::Hflc1),
            "HFLC2" => Ok(ControllerId::Hflc2),
            "HFLC3" => Ok(ControllerId::Hflc3),
            "HFLC4" => Ok(ControllerId::Hflc4),
            "HFLC5" => Ok(ControllerId::Hflc5),
            "HFLC6" => Ok(ControllerId::Hflc6),
            "HFLC7" => Ok(ControllerId::Hflc7),
            "HFLC8" => Ok(ControllerId::Hflc8),
            other => Err(Error::InvalidArgument(format!(
                "unknown controller '{other}' (expected HFLC1..HFLC8)"
            ))),
        }
    }
}

impl fmt::Display for ControllerId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Leg {
    Left,
    Right,
}

/// The I/O contract of one controller: which named gait signals it reads
/// and which it produces.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ControllerSpec {
    pub id: ControllerId,
    pub leg: Leg,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
}

impl ControllerSpec {
    fn new(id: ControllerId, leg: Leg, inputs: &[&str], outputs: &[&str]) -> Self {
        Self {
            id,
            leg,
            inputs: inputs.iter().map(|s| s.to_string()).collect(),
            outputs: outputs.iter().map(|s| s.to_string()).collect(),
        }
    }
}

/// The six active controller contracts, in id order. Per leg: COM plus
/// thigh angle give the knee angle; COM plus knee angle give the ankle
/// coordinates; COM plus ankle coordinates give the thigh angle back.
pub fn build_specs() -> Vec<ControllerSpec> {
    vec![
        ControllerSpec::new(
            ControllerId::Hflc1,
            Leg::Left,
            &["x0", "y0", "beta_left"],
            &["gamma_left"],
        ),
        ControllerSpec::new(
            ControllerId::Hflc2,
            Leg::Right,
            &["x0", "y0", "beta_right"],
            &["gamma_right"],
        ),
        ControllerSpec::new(
            ControllerId::Hflc3,
            Leg::Left,
            &["x0", "y0", "gamma_left"],
            &["xcl", "ycl"],
        ),
        ControllerSpec::new(
            ControllerId::Hflc4,
            Leg::Right,
            &["x0", "y0", "gamma_right"],
            &["xcr", "ycr"],
        ),
        ControllerSpec::new(
            ControllerId::Hflc5,
            Leg::Left,
            &["x0", "y0", "xcl", "ycl"],
            &["beta_left"],
        ),
        ControllerSpec::new(
            ControllerId::Hflc6,
            Leg::Right,
            &["x0", "y0", "xcr", "ycr"],
            &["beta_right"],
        ),
    ]
}

/// The two reserved controller slots. Their roles are undefined, so they
/// carry no signals and are skipped by training and [`run_chain`].
pub fn placeholder_specs() -> Vec<ControllerSpec> {
    vec![
        ControllerSpec::new(ControllerId::Hflc7, Leg::Left, &[], &[]),
        ControllerSpec::new(ControllerId::Hflc8, Leg::Right, &[], &[]),
    ]
}

fn signal_value(sample: &GaitSample, name: &str) -> Option<f64> {
    Some(match name {
        "x0" => sample.x0,
        "y0" => sample.y0,
        "beta_left" => sample.beta_left,
        "gamma_left" => sample.gamma_left,
        "xcl" => sample.xcl,
        "ycl" => sample.ycl,
        "beta_right" => sample.beta_right,
        "gamma_right" => sample.gamma_right,
        "xcr" => sample.xcr,
        "ycr" => sample.ycr,
        _ => return None,
    })
}

/// Select one controller's training view of the gait data: inputs are the
/// spec's input signals, the target is the chosen output signal. Values
/// are copied bit-exactly and sample order is preserved.
pub fn project_dataset(
    samples: &[GaitSample],
    spec: &ControllerSpec,
    output_index: usize,
) -> Result<Dataset> {
    let Some(output) = spec.outputs.get(output_index) else {
        return Err(Error::InvalidArgument(format!(
            "{} has {} outputs, index {output_index} is out of range",
            spec.id,
            spec.outputs.len()
        )));
    };
    let mut projected = Vec::with_capacity(samples.len());
    for s in samples {
        let x = spec
            .inputs
            .iter()
            .map(|name| {
                signal_value(s, name).ok_or_else(|| {
                    Error::Wiring(format!("{}: unknown input signal '{name}'", spec.id))
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        let y = signal_value(s, output).ok_or_else(|| {
            Error::Wiring(format!("{}: unknown output signal '{output}'", spec.id))
        })?;
        projected.push(Sample { x, y });
    }
    Dataset::new(format!("{}:{output}", spec.id), 0, projected)
}

/// One controller slot with its trained models, one per output signal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HflcNode {
    pub spec: ControllerSpec,
    pub models: Vec<TsFis>,
}

/// The six trained nodes plus the leg geometry used for COM supervision.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hierarchy {
    pub nodes: Vec<HflcNode>,
    pub params: BipedParams,
}

impl Hierarchy {
    /// Check structural soundness: all six nodes present, every input
    /// signal is either a COM coordinate or another node's output, and
    /// every model's shape matches its spec.
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        let specs = build_specs();
        if self.nodes.len() != specs.len() {
            return Err(Error::Wiring(format!(
                "hierarchy has {} nodes, expected {}",
                self.nodes.len(),
                specs.len()
            )));
        }
        let produced: Vec<&str> =
            self.nodes.iter().flat_map(|n| n.spec.outputs.iter().map(String::as_str)).collect();
        for (node, expected) in self.nodes.iter().zip(&specs) {
            if node.spec != *expected {
                return Err(Error::Wiring(format!(
                    "node {} does not match the fixed wiring contract",
                    node.spec.id
                )));
            }
            for input in &node.spec.inputs {
                if input != "x0" && input != "y0" && !produced.contains(&input.as_str()) {
                    return Err(Error::Wiring(format!(
                        "{} input '{input}' is neither a COM coordinate nor any node's output",
                        node.spec.id
                    )));
                }
            }
            if node.models.len() != node.spec.outputs.len() {
                return Err(Error::Wiring(format!(
                    "{} has {} models for {} outputs",
                    node.spec.id,
                    node.models.len(),
                    node.spec.outputs.len()
                )));
            }
            for (model, output) in node.models.iter().zip(&node.spec.outputs) {
                model.validate()?;
                if model.n_inputs() != node.spec.inputs.len() {
                    return Err(Error::Wiring(format!(
                        "{} model '{output}' expects {} inputs, spec has {}",
                        node.spec.id,
                        model.n_inputs(),
                        node.spec.inputs.len()
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn node(&self, id: ControllerId) -> Result<&HflcNode> {
        self.nodes
            .iter()
            .find(|n| n.spec.id == id)
            .ok_or_else(|| Error::Wiring(format!("hierarchy has no node {id}")))
    }

    pub fn model(&self, id: ControllerId, output_index: usize) -> Result<&TsFis> {
        let node = self.node(id)?;
        node.models.get(output_index).ok_or_else(|| {
            Error::InvalidArgument(format!(
                "{id} has {} outputs, index {output_index} is out of range",
                node.models.len()
            ))
        })
    }
}

/// Provenance and quality record for one trained model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelReport {
    pub controller: ControllerId,
    pub output_index: usize,
    pub output: String,
    pub seed: u64,
    pub report: TrainReport,
}

/// Seed for one (controller, output) training job: the base seed plus an
/// FNV-1a hash of the job identity, so jobs are independent of each other
/// and of scheduling order.
pub fn derive_seed(base: u64, id: ControllerId, output_index: usize) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    let mut eat = |byte: u8| {
        h ^= u64::from(byte);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    };
    for b in id.name().bytes() {
        eat(b);
    }
    eat(b':');
    for b in (output_index as u64).to_le_bytes() {
        eat(b);
    }
    base.wrapping_add(h)
}

/// Train all eight models (six nodes; the ankle nodes carry two models
/// each) independently on their projections of `samples`.
pub fn train_hierarchy(
    samples: &[GaitSample],
    params: BipedParams,
    config: &TrainConfig,
) -> Result<(Hierarchy, Vec<ModelReport>)> {
    if samples.is_empty() {
        return Err(Error::InvalidArgument(
            "cannot train a hierarchy on an empty sample set".into(),
        ));
    }
    params.validate()?;
    config.validate()?;

    let mut nodes = Vec::new();
    let mut reports = Vec::new();
    for spec in build_specs() {
        let mut models = Vec::with_capacity(spec.outputs.len());
        for (j, output) in spec.outputs.iter().enumerate() {
            let data = project_dataset(samples, &spec, j)?;
            let seed = derive_seed(config.seed, spec.id, j);
            let job_config = TrainConfig { seed, ..*config };
            let (mut fis, report) = train_hybrid(&data, &job_config)
                .map_err(|e| e.with_context(&format!("{} output '{output}'", spec.id)))?;
            for (input, name) in fis.inputs.iter_mut().zip(&spec.inputs) {
                input.name = name.clone();
            }
            fis.output_name = output.clone();
            models.push(fis);
            reports.push(ModelReport {
                controller: spec.id,
                output_index: j,
                output: output.clone(),
                seed,
                report,
            });
        }
        nodes.push(HflcNode { spec, models });
    }
    let hierarchy = Hierarchy { nodes, params };
    hierarchy.validate()?;
    Ok((hierarchy, reports))
}

/// Resolved signals of one leg.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LegSignals {
    pub beta: f64,
    pub gamma: f64,
    pub ankle: PlanarPoint,
}

/// Warm-start / result signals for both legs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainSignals {
    pub left: LegSignals,
    pub right: LegSignals,
}

/// Outcome of one fixed-point resolution of the cyclic wiring.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainResult {
    pub signals: ChainSignals,
    pub iterations: usize,
    pub converged: bool,
    /// Largest absolute signal change during the final sweep; when
    /// `converged` this is at most the tolerance.
    pub residual: f64,
}

/// Exact chain signals at one gait phase, from the geometric solver —
/// the natural warm start before any chain output exists.
pub fn analytic_chain_signals(
    params: &BipedParams,
    gait: &GaitSpec,
    t: f64,
) -> Result<ChainSignals> {
    let s = sample_at_phase(params, gait, t)?;
    Ok(ChainSignals {
        left: LegSignals {
            beta: s.beta_left,
            gamma: s.gamma_left,
            ankle: PlanarPoint::new(s.xcl, s.ycl),
        },
        right: LegSignals {
            beta: s.beta_right,
            gamma: s.gamma_right,
            ankle: PlanarPoint::new(s.xcr, s.ycr),
        },
    })
}

/// Resolve the cyclic wiring at one COM reference.
///
/// Per sweep and per leg, in wiring order: the knee angle from the thigh
/// angle, the ankle position from the knee angle, the thigh angle from
/// the ankle position — each stage consuming the freshest values. Stops
/// when no signal moved more than `tol`, or after `max_iter` sweeps with
/// `converged = false`.
pub fn run_chain(
    h: &Hierarchy,
    com_ref: PlanarPoint,
    warm_start: &ChainSignals,
    max_iter: usize,
    tol: f64,
) -> Result<ChainResult> {
    if max_iter == 0 {
        return Err(Error::InvalidArgument("max_iter must be >= 1".into()));
    }
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "tolerance must be positive and finite, got {tol}"
        )));
    }
    if !com_ref.x.is_finite() || !com_ref.y.is_finite() {
        return Err(Error::InvalidArgument("COM reference must be finite".into()));
    }

    let legs = [
        (ControllerId::Hflc1, ControllerId::Hflc3, ControllerId::Hflc5),
        (ControllerId::Hflc2, ControllerId::Hflc4, ControllerId::Hflc6),
    ];
    let mut state = *warm_start;
    let mut residual = f64::INFINITY;
    for iteration in 1..=max_iter {
        residual = 0.0;
        for (leg_idx, &(knee_id, ankle_id, thigh_id)) in legs.iter().enumerate() {
            let leg = if leg_idx == 0 { &mut state.left } else { &mut state.right };
            let check = |id: ControllerId, v: f64| {
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(Error::Divergence(format!(
                        "{id} produced a non-finite output at iteration {iteration}"
                    )))
                }
            };

            let gamma =
                check(knee_id, h.model(knee_id, 0)?.eval(&[com_ref.x, com_ref.y, leg.beta])?)?;
            residual = residual.max((gamma - leg.gamma).abs());
            leg.gamma = gamma;

            let ankle_in = [com_ref.x, com_ref.y, leg.gamma];
            let ax = check(ankle_id, h.model(ankle_id, 0)?.eval(&ankle_in)?)?;
            let ay = check(ankle_id, h.model(ankle_id, 1)?.eval(&ankle_in)?)?;
            residual = residual.max((ax - leg.ankle.x).abs());
            residual = residual.max((ay - leg.ankle.y).abs());
            leg.ankle = PlanarPoint::new(ax, ay);

            let beta = check(
                thigh_id,
                h.model(thigh_id, 0)?.eval(&[com_ref.x, com_ref.y, leg.ankle.x, leg.ankle.y])?,
            )?;
            residual = residual.max((beta - leg.beta).abs());
            leg.beta = beta;
        }
        if residual <= tol {
            return Ok(ChainResult {
                signals: state,
                iterations: iteration,
                converged: true,
                residual,
            });
        }
    }
    Ok(ChainResult { signals: state, iterations: max_iter, converged: false, residual })
}

/// Estimate the COM (= hip) from the stance leg by walking the leg
/// geometry upward from its ground-anchored ankle:
/// `hip = ankle - l_shank*(sin(beta+gamma), -cos(beta+gamma))
///             - l_thigh*(sin beta, -cos beta)`.
pub fn supervise_com(
    params: &BipedParams,
    stance_ankle: PlanarPoint,
    pose: LegPose,
) -> PlanarPoint {
    let shank_dir = pose.beta + pose.gamma;
    PlanarPoint::new(
        stance_ankle.x - params.l_shank * shank_dir.sin() - params.l_thigh * pose.beta.sin(),
        stance_ankle.y + params.l_shank * shank_dir.cos() + params.l_thigh * pose.beta.cos(),
    )
}

/// One row of a closed-loop walk log.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WalkLogEntry {
    pub t: f64,
    pub x0_ref: f64,
    pub y0_ref: f64,
    pub x0_est: f64,
    pub y0_est: f64,
    pub beta_left: f64,
    pub gamma_left: f64,
    pub xcl: f64,
    pub ycl: f64,
    pub beta_right: f64,
    pub gamma_right: f64,
    pub xcr: f64,
    pub ycr: f64,
    pub iters: usize,
    pub converged: bool,
    pub residual: f64,
}

impl WalkLogEntry {
    /// Distance between the estimated and reference COM for this phase.
    pub fn com_error(&self) -> f64 {
        (self.x0_est - self.x0_ref).hypot(self.y0_est - self.y0_ref)
    }
}

/// Drive the hierarchy along the reference gait.
///
/// Phases are `j / (n_steps - 1)` (a single step uses phase 0). The
/// first chain call is warm-started from the geometric solution of the
/// initial posture; each later phase starts from the previous resolved
/// signals. After every resolution the COM is re-estimated from the
/// stance (left) leg's resolved signals.
pub fn closed_loop_walk(
    h: &Hierarchy,
    gait: &GaitSpec,
    n_steps: usize,
) -> Result<Vec<WalkLogEntry>> {
    if n_steps == 0 {
        return Err(Error::InvalidArgument("n_steps must be >= 1".into()));
    }
    h.validate()?;
    gait.validate()?;

    let mut warm = analytic_chain_signals(&h.params, gait, 0.0)?;
    let mut log = Vec::with_capacity(n_steps);
    for j in 0..n_steps {
        let t = if n_steps == 1 { 0.0 } else { j as f64 / (n_steps - 1) as f64 };
        let com_ref = com_trajectory(gait, t);
        let chain = run_chain(h, com_ref, &warm, CHAIN_MAX_ITER, CHAIN_TOL)
            .map_err(|e| e.with_context(&format!("walk phase {j} (t = {t})")))?;
        let s = chain.signals;
        let com_est = supervise_com(
            &h.params,
            s.left.ankle,
            LegPose { beta: s.left.beta, gamma: s.left.gamma },
        );
        log.push(WalkLogEntry {
            t,
            x0_ref: com_ref.x,
            y0_ref: com_ref.y,
            x0_est: com_est.x,
            y0_est: com_est.y,
            beta_left: s.left.beta,
            gamma_left: s.left.gamma,
            xcl: s.left.ankle.x,
            ycl: s.left.ankle.y,
            beta_right: s.right.beta,
            gamma_right: s.right.gamma,
            xcr: s.right.ankle.x,
            ycr: s.right.ankle.y,
            iters: chain.iterations,
            converged: chain.converged,
            residual: chain.residual,
        });
        warm = s;
    }
    Ok(log)
}

/// Rule count of one node: the product of its per-input MF counts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeRuleCount {
    pub id: ControllerId,
    pub mf_counts: Vec<usize>,
    pub rules: usize,
    pub models: usize,
}

/// Hierarchical vs flat rule totals at one uniform MF count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlatComparison {
    pub mfs_per_input: usize,
    pub hierarchical_per_node: usize,
    pub hierarchical_per_model: usize,
    pub flat: usize,
}

/// Why the hierarchy exists: its rule counts next to the combinatorial
/// cost of one flat controller over all the left leg's signals.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleCountReport {
    pub nodes: Vec<NodeRuleCount>,
    /// Left-leg rules counting each node's rule base once.
    pub left_per_node_total: usize,
    /// Left-leg rules counting one rule base per trained model.
    pub left_per_model_total: usize,
    /// Input count of the flat baseline: the distinct signals the
    /// left-leg nodes consume, plus one slot per feedback signal (a
    /// signal consumed by an earlier node than its producer), since a
    /// single-pass flat controller needs the fed-back value as an extra
    /// input next to the value it produces.
    pub flat_signal_count: usize,
    /// Hierarchical vs flat totals at uniform MF counts of 2 and 3.
    pub uniform_comparisons: Vec<FlatComparison>,
}

/// Count the flat baseline's inputs from the left-leg wiring.
fn flat_signal_count(specs: &[ControllerSpec]) -> usize {
    let left: Vec<&ControllerSpec> = specs.iter().filter(|s| s.leg == Leg::Left).collect();
    let mut names: Vec<&str> =
        left.iter().flat_map(|s| s.inputs.iter().map(String::as_str)).collect();
    names.sort_unstable();
    names.dedup();
    let mut count = names.len();
    for name in names {
        let first_consumer = left.iter().position(|s| s.inputs.iter().any(|i| i == name));
        let producer = left.iter().position(|s| s.outputs.iter().any(|o| o == name));
        if let (Some(c), Some(p)) = (first_consumer, producer) {
            if c <= p {
                count += 1; // feedback wire: consumed before it is produced
            }
        }
    }
    count
}

/// Tabulate the hierarchy's per-node rule counts and the flat-baseline
/// comparison that motivates the decomposition.
pub fn rule_count_report(h: &Hierarchy) -> Result<RuleCountReport> {
    let mut nodes = Vec::with_capacity(h.nodes.len());
    let mut left_per_node_total = 0;
    let mut left_per_model_total = 0;
    for node in &h.nodes {
        let Some(first) = node.models.first() else {
            return Err(Error::Wiring(format!("{} has no trained models", node.spec.id)));
        };
        let mf_counts: Vec<usize> = first.inputs.iter().map(|s| s.mfs.len()).collect();
        let rules = first.n_rules();
        if node.models.iter().any(|m| m.n_rules() != rules) {
            return Err(Error::Wiring(format!("{} models disagree on rule count", node.spec.id)));
        }
        if node.spec.leg == Leg::Left {
            left_per_node_total += rules;
            left_per_model_total += rules * node.models.len();
        }
        nodes.push(NodeRuleCount { id: node.spec.id, mf_counts, rules, models: node.models.len() });
    }

    let specs = build_specs();
    let flat_signals = flat_signal_count(&specs);
    let left_specs: Vec<&ControllerSpec> = specs.iter().filter(|s| s.leg == Leg::Left).collect();
    let uniform_comparisons = [2usize, 3]
        .iter()
        .map(|&m| FlatComparison {
            mfs_per_input: m,
            hierarchical_per_node: left_specs.iter().map(|s| m.pow(s.inputs.len() as u32)).sum(),
            hierarchical_per_model: left_specs
                .iter()
                .map(|s| m.pow(s.inputs.len() as u32) * s.outputs.len())
                .sum(),
            flat: m.pow(flat_signals as u32),
        })
        .collect();

    Ok(RuleCountReport {
        nodes,
        left_per_node_total,
        left_per_model_total,
        flat_signal_count: flat_signals,
        uniform_comparisons,
    })
}
