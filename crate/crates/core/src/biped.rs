//! Planar two-link leg kinematics and gait dataset synthesis.
//!
//! Each leg is a thigh/shank pair hanging from the hip, which this model
//! identifies with the body's center of mass (COM). Angles follow one
//! convention throughout: `beta` is the thigh angle measured from
//! straight down (positive swings the knee forward, toward +x) and
//! `gamma` is the knee flexion added to the thigh direction (0 = a
//! straight leg, positive bends the shank forward). `y` points up.
//!
//! [`inverse_kinematics`] is the exact geometric solver the fuzzy
//! controllers are trained to imitate, and [`generate_dataset`] samples
//! it along a parametric walking gait.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point in the sagittal plane (x forward, y up), in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanarPoint {
    pub x: f64,
    pub y: f64,
}

impl PlanarPoint {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &PlanarPoint) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Segment lengths of one leg, in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BipedParams {
    pub l_thigh: f64,
    pub l_shank: f64,
}

impl Default for BipedParams {
    fn default() -> Self {
        Self { l_thigh: 0.5, l_shank: 0.5 }
    }
}

impl BipedParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.l_thigh > 0.0 && self.l_thigh.is_finite())
            || !(self.l_shank > 0.0 && self.l_shank.is_finite())
        {
            return Err(Error::InvalidArgument(format!(
                "segment lengths must be positive and finite, got l_thigh={}, l_shank={}",
                self.l_thigh, self.l_shank
            )));
        }
        Ok(())
    }

    /// Farthest hip-to-ankle distance the leg can reach (straight leg).
    pub fn max_reach(&self) -> f64 {
        self.l_thigh + self.l_shank
    }

    /// Closest hip-to-ankle distance (leg fully folded).
    pub fn min_reach(&self) -> f64 {
        (self.l_thigh - self.l_shank).abs()
    }
}

/// Joint angles of one leg, in radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LegPose {
    /// Thigh angle from straight down; positive = knee forward.
    pub beta: f64,
    /// Knee flexion relative to the thigh direction; 0 = straight leg.
    pub gamma: f64,
}

/// Knee and ankle positions for a leg hanging from `hip` at `pose`.
pub fn forward_kinematics(
    params: &BipedParams,
    hip: PlanarPoint,
    pose: LegPose,
) -> Result<(PlanarPoint, PlanarPoint)> {
    params.validate()?;
    if !hip.x.is_finite() || !hip.y.is_finite() || !pose.beta.is_finite() || !pose.gamma.is_finite()
    {
        return Err(Error::InvalidArgument(
            "forward kinematics needs finite hip coordinates and angles".into(),
        ));
    }
    let knee = PlanarPoint::new(
        hip.x + params.l_thigh * pose.beta.sin(),
        hip.y - params.l_thigh * pose.beta.cos(),
    );
    let shank_dir = pose.beta + pose.gamma;
    let ankle = PlanarPoint::new(
        knee.x + params.l_shank * shank_dir.sin(),
        knee.y - params.l_shank * shank_dir.cos(),
    );
    Ok((knee, ankle))
}

/// Tolerance for targets just beyond the exact workspace boundary; such
/// points snap to the boundary instead of failing.
const REACH_TOL: f64 = 1e-12;

/// Joint angles that place the ankle at `ankle` with the hip at `hip`.
///
/// Of the two mirror solutions the knee-forward one (`gamma >= 0`) is
/// returned, matching the flexion direction of a human knee walking in
/// +x. Targets outside the annulus `[min_reach, max_reach]` produce
/// [`Error::Unreachable`]; a target coincident with the hip (possible
/// only when the segments have equal length) folds the leg to
/// `beta = 0, gamma = pi`.
pub fn inverse_kinematics(
    params: &BipedParams,
    hip: PlanarPoint,
    ankle: PlanarPoint,
) -> Result<LegPose> {
    params.validate()?;
    if !hip.x.is_finite() || !hip.y.is_finite() || !ankle.x.is_finite() || !ankle.y.is_finite() {
        return Err(Error::InvalidArgument(
            "inverse kinematics needs finite hip and ankle coordinates".into(),
        ));
    }
    let dx = ankle.x - hip.x;
    let dy = ankle.y - hip.y;
    let d = dx.hypot(dy);
    let (min, max) = (params.min_reach(), params.max_reach());
    if d < min - REACH_TOL || d > max + REACH_TOL {
        return Err(Error::Unreachable { dist: d, min, max });
    }
    if d < 1e-12 {
        // ankle on the hip: direction is undefined, fold straight down
        return Ok(LegPose { beta: 0.0, gamma: std::f64::consts::PI });
    }

    // law of cosines at the knee; clamps guard boundary round-off
    let cos_interior = ((params.l_thigh * params.l_thigh + params.l_shank * params.l_shank
        - d * d)
        / (2.0 * params.l_thigh * params.l_shank))
        .clamp(-1.0, 1.0);
    let gamma = std::f64::consts::PI - cos_interior.acos();

    // law of cosines at the hip: the angle between the thigh and the
    // hip->ankle segment, in [0, pi], so no quadrant ambiguity. With the
    // knee-forward branch the thigh sits behind the ankle direction.
    let cos_hip = ((params.l_thigh * params.l_thigh + d * d - params.l_shank * params.l_shank)
        / (2.0 * params.l_thigh * d))
        .clamp(-1.0, 1.0);
    let beta = dx.atan2(-dy) - cos_hip.acos();
    Ok(LegPose { beta, gamma })
}

/// Parameters of the synthetic single-step gait that [`generate_dataset`]
/// samples. One step runs over normalized phase `t in [0, 1]` with the
/// left foot planted at the origin and the right foot swinging forward.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaitSpec {
    /// Forward distance the COM travels over the step, in meters.
    pub step_length: f64,
    /// Peak ground clearance of the swing foot, in meters.
    pub step_height: f64,
    /// Nominal COM height above the ground, in meters.
    pub com_height: f64,
    /// Amplitude of the vertical COM oscillation over the step.
    pub com_bob: f64,
    /// Number of phase samples to draw.
    pub n_samples: usize,
    /// Half-width of each phase stratum's jitter, as a fraction of the
    /// stratum; below 0.5 so sampled phases stay strictly increasing.
    pub phase_jitter: f64,
    pub seed: u64,
}

impl Default for GaitSpec {
    fn default() -> Self {
        Self {
            step_length: 0.3,
            step_height: 0.05,
            com_height: 0.9,
            com_bob: 0.02,
            n_samples: 30,
            phase_jitter: 0.1,
            seed: 42,
        }
    }
}

impl GaitSpec {
    pub fn validate(&self) -> Result<()> {
        let positive = [("step_length", self.step_length), ("com_height", self.com_height)];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        let non_negative = [("step_height", self.step_height), ("com_bob", self.com_bob)];
        for (name, v) in non_negative {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "{name} must be non-negative and finite, got {v}"
                )));
            }
        }
        if self.n_samples < 2 {
            return Err(Error::InvalidArgument(format!("n must be >= 2, got {}", self.n_samples)));
        }
        if !(0.0..0.5).contains(&self.phase_jitter) {
            return Err(Error::InvalidArgument(format!(
                "phase_jitter must lie in [0, 0.5), got {}",
                self.phase_jitter
            )));
        }
        Ok(())
    }
}

/// Desired COM position at phase `t`: constant forward speed with a
/// sinusoidal vertical bob that returns to `com_height` at both ends.
pub fn com_trajectory(spec: &GaitSpec, t: f64) -> PlanarPoint {
    PlanarPoint::new(
        spec.step_length * t,
        spec.com_height + spec.com_bob * (2.0 * std::f64::consts::PI * t).sin(),
    )
}

/// Swing-foot ankle position at phase `t`: a half-sine arc from half a
/// step behind the stance foot to half a step ahead of it.
pub fn swing_ankle_trajectory(spec: &GaitSpec, t: f64) -> PlanarPoint {
    PlanarPoint::new(
        -spec.step_length / 2.0 + spec.step_length * t,
        spec.step_height * (std::f64::consts::PI * t).sin(),
    )
}

/// One supervised gait sample. `(x0, y0)` is the COM (= hip), `(xcl, ycl)`
/// and `(xcr, ycr)` are the left and right ankle positions, and the angle
/// pairs are the exact inverse-kinematics solutions for each leg.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaitSample {
    pub t: f64,
    pub x0: f64,
    pub y0: f64,
    pub beta_left: f64,
    pub gamma_left: f64,
    pub xcl: f64,
    pub ycl: f64,
    pub beta_right: f64,
    pub gamma_right: f64,
    pub xcr: f64,
    pub ycr: f64,
}

/// Draw `n_samples` stratified phases and solve both legs at each.
///
/// Phase `i` is `(i + u_i * phase_jitter) / n_samples` with
/// `u_i ~ U[-1, 1]` from a ChaCha8 stream seeded by `spec.seed`, clamped
/// to `[0, 1]`. With `phase_jitter < 0.5` the strata cannot overlap, so
/// the phases are strictly increasing, cover the step evenly, and are
/// fully reproducible. The left ankle is pinned to the origin (stance
/// foot); the right follows the swing arc.
pub fn generate_dataset(params: &BipedParams, spec: &GaitSpec) -> Result<Vec<GaitSample>> {
    params.validate()?;
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let n = spec.n_samples;
    let mut samples = Vec::with_capacity(n);
    for i in 0..n {
        let u: f64 = rng.random_range(-1.0..=1.0);
        let t = (((i as f64) + u * spec.phase_jitter) / (n as f64)).clamp(0.0, 1.0);
        samples.push(sample_at_phase(params, spec, t)?);
    }
    Ok(samples)
}

/// Solve both legs at a single gait phase.
pub fn sample_at_phase(params: &BipedParams, spec: &GaitSpec, t: f64) -> Result<GaitSample> {
    let com = com_trajectory(spec, t);
    let left_ankle = PlanarPoint::new(0.0, 0.0);
    let right_ankle = swing_ankle_trajectory(spec, t);
    let solve = |ankle: PlanarPoint, leg: &str| {
        inverse_kinematics(params, com, ankle)
            .map_err(|e| Error::Generation { phase: t, detail: format!("{leg} leg: {e}") })
    };
    let left = solve(left_ankle, "left")?;
    let right = solve(right_ankle, "right")?;
    Ok(GaitSample {
        t,
        x0: com.x,
        y0: com.y,
        beta_left: left.beta,
        gamma_left: left.gamma,
        xcl: left_ankle.x,
        ycl: left_ankle.y,
        beta_right: right.beta,
        gamma_right: right.gamma,
        xcr: right_ankle.x,
        ycr: right_ankle.y,
    })
}
