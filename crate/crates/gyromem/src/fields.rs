//! Field scenarios and the slow quantities derived from them.
//!
//! A scenario prescribes the oscillating electric field in gyrophase form
//! E(t, tau, x) together with an optional bounded magnetic perturbation
//! B''(t, tau, x); the strong uniform field e1/eps is implicit and never
//! stored. Everything downstream consumes two reductions of E:
//!
//! * the gyroaverage Etilde(t, y), the field as seen from the co-rotating
//!   frame, and
//! * the drift displacement L(s, t, y), its time integral, which is the
//!   argument the memory kernels feed to the Bessel functions.
//!
//! Registered scenarios are spatially uniform, so the slow coordinate
//! y = (v1, x2, x3) rides along unused in their closed forms; it stays in
//! every signature because the general theory allows transverse dependence
//! and user-supplied fields may use it.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::math::{adaptive_gauss, periodic_average, rotate, Angle, Vec3};

/// Slow coordinates: parallel velocity and transverse position.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct YPoint {
    pub v1: f64,
    pub x2: f64,
    pub x3: f64,
}

impl YPoint {
    pub const ORIGIN: YPoint = YPoint { v1: 0.0, x2: 0.0, x3: 0.0 };

    pub const fn new(v1: f64, x2: f64, x3: f64) -> Self {
        YPoint { v1, x2, x3 }
    }

    /// Slow coordinates of a phase-space point.
    pub fn of(x: Vec3, v: Vec3) -> Self {
        YPoint { v1: v.c1, x2: x.c2, x3: x.c3 }
    }
}

/// Scalar time envelope of a separable field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Envelope {
    Constant { value: f64 },
    /// value(t) = offset + slope t
    Affine { offset: f64, slope: f64 },
    /// value(t) = amplitude cos(frequency t); sign changes are allowed and
    /// drive the vanishing-drift edge case downstream.
    Cosine { amplitude: f64, frequency: f64 },
}

impl Envelope {
    pub fn value(&self, t: f64) -> f64 {
        match *self {
            Envelope::Constant { value } => value,
            Envelope::Affine { offset, slope } => offset + slope * t,
            Envelope::Cosine { amplitude, frequency } => amplitude * (frequency * t).cos(),
        }
    }

    /// Primitive with primitive(0) = 0.
    pub fn primitive(&self, t: f64) -> f64 {
        match *self {
            Envelope::Constant { value } => value * t,
            Envelope::Affine { offset, slope } => (offset + 0.5 * slope * t) * t,
            Envelope::Cosine { amplitude, frequency } => {
                if frequency == 0.0 {
                    amplitude * t
                } else {
                    amplitude * (frequency * t).sin() / frequency
                }
            }
        }
    }

    /// Integral of the primitive, int_0^t primitive(s) ds. Shows up in the
    /// parallel displacement of the averaged characteristics.
    pub fn primitive_integral(&self, t: f64) -> f64 {
        match *self {
            Envelope::Constant { value } => 0.5 * value * t * t,
            Envelope::Affine { offset, slope } => (0.5 * offset + slope * t / 6.0) * t * t,
            Envelope::Cosine { amplitude, frequency } => {
                if frequency == 0.0 {
                    0.5 * amplitude * t * t
                } else {
                    amplitude * (1.0 - (frequency * t).cos()) / (frequency * frequency)
                }
            }
        }
    }

    /// Sup of |value| over [t0, t1].
    pub fn sup_on(&self, t0: f64, t1: f64) -> f64 {
        let (t0, t1) = if t0 <= t1 { (t0, t1) } else { (t1, t0) };
        let mut sup = self.value(t0).abs().max(self.value(t1).abs());
        if let Envelope::Cosine { amplitude, frequency } = *self {
            if frequency != 0.0 {
                // Interior extrema sit at multiples of pi/frequency.
                let step = std::f64::consts::PI / frequency.abs();
                let mut k = (t0 / step).ceil();
                while k * step <= t1 {
                    sup = sup.max(amplitude.abs());
                    k += 1.0;
                }
            }
        }
        sup
    }
}

/// Gyrophase profile g(tau) of a separable or time-independent field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GyroProfile {
    /// g(tau) = amplitude r(e2, phase - tau). Co-rotates with the gyration,
    /// so its co-rotating average is the fixed vector amplitude r(e2, phase).
    Rotating {
        amplitude: f64,
        #[serde(default)]
        phase: f64,
    },
    /// g(tau) = vector, independent of gyrophase. Its transverse co-rotating
    /// average vanishes, which makes it the natural off-resonance case.
    Uniform { vector: Vec3 },
}

impl GyroProfile {
    pub fn eval(&self, tau: Angle) -> Vec3 {
        match *self {
            GyroProfile::Rotating { amplitude, phase } => rotate(Vec3::E2, phase - tau) * amplitude,
            GyroProfile::Uniform { vector } => vector,
        }
    }

    /// (1/2pi) int r(g(tau), tau) dtau, exactly.
    pub fn corotating_average(&self) -> Vec3 {
        match *self {
            GyroProfile::Rotating { amplitude, phase } => rotate(Vec3::E2, phase) * amplitude,
            GyroProfile::Uniform { vector } => Vec3::new(vector.c1, 0.0, 0.0),
        }
    }

    pub fn sup(&self) -> f64 {
        match *self {
            GyroProfile::Rotating { amplitude, .. } => amplitude.abs(),
            GyroProfile::Uniform { vector } => vector.norm(),
        }
    }
}

/// Closure type for user-supplied fields: arguments are (t, tau, x).
pub type FieldFn = Arc<dyn Fn(f64, Angle, Vec3) -> Vec3 + Send + Sync>;

/// The oscillating-field scenarios the crate knows how to reduce.
#[derive(Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FieldSpec {
    /// E(t, tau, x) = amplitude r(e2, -tau): a circularly polarized wave
    /// locked to the gyration. Its co-rotating value is the constant
    /// amplitude e2, the textbook resonant drive.
    CircularResonant { amplitude: f64 },
    /// E(tau, x) = g(tau), no time dependence.
    TimeIndependent { profile: GyroProfile },
    /// E(t, tau, x) = envelope(t) g(tau).
    Separable { envelope: Envelope, profile: GyroProfile },
    /// Direct closures for E and B''. Not available from configuration files.
    #[serde(skip)]
    General { e: FieldFn, b: FieldFn },
}

impl fmt::Debug for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldSpec::CircularResonant { amplitude } => {
                f.debug_struct("CircularResonant").field("amplitude", amplitude).finish()
            }
            FieldSpec::TimeIndependent { profile } => {
                f.debug_struct("TimeIndependent").field("profile", profile).finish()
            }
            FieldSpec::Separable { envelope, profile } => f
                .debug_struct("Separable")
                .field("envelope", envelope)
                .field("profile", profile)
                .finish(),
            FieldSpec::General { .. } => f.write_str("General {...}"),
        }
    }
}

impl FieldSpec {
    /// Uniform field with no gyrophase or time structure, E = vector.
    /// Convenience for off-resonance studies and pusher oracles.
    pub fn uniform_e(vector: Vec3) -> FieldSpec {
        FieldSpec::TimeIndependent { profile: GyroProfile::Uniform { vector } }
    }

    /// Estimated sup of |E| over [t0, t1] (exact for registered scenarios).
    pub fn e_sup(&self, t0: f64, t1: f64) -> f64 {
        match self {
            FieldSpec::CircularResonant { amplitude } => amplitude.abs(),
            FieldSpec::TimeIndependent { profile } => profile.sup(),
            FieldSpec::Separable { envelope, profile } => envelope.sup_on(t0, t1) * profile.sup(),
            FieldSpec::General { e, .. } => {
                let mut sup: f64 = 0.0;
                for i in 0..64 {
                    let t = t0 + (t1 - t0) * i as f64 / 63.0;
                    let tau = std::f64::consts::TAU * (i as f64 * 0.6180339887498949).fract();
                    sup = sup.max(e(t, tau, Vec3::ZERO).norm());
                }
                sup
            }
        }
    }
}

/// Oscillating electric field at time `t`, gyrophase `tau`, position `x`.
/// The physical field of the scaled system is recovered at tau = t/eps.
pub fn eval_e(spec: &FieldSpec, t: f64, tau: Angle, x: Vec3) -> Vec3 {
    match spec {
        FieldSpec::CircularResonant { amplitude } => rotate(Vec3::E2, -tau) * *amplitude,
        FieldSpec::TimeIndependent { profile } => profile.eval(tau),
        FieldSpec::Separable { envelope, profile } => profile.eval(tau) * envelope.value(t),
        FieldSpec::General { e, .. } => e(t, tau, x),
    }
}

/// Bounded magnetic perturbation B''(t, tau, x). Zero for every registered
/// scenario; the strong field e1/eps is handled separately by consumers.
pub fn eval_b(spec: &FieldSpec, t: f64, tau: Angle, x: Vec3) -> Vec3 {
    match spec {
        FieldSpec::General { b, .. } => b(t, tau, x),
        _ => Vec3::ZERO,
    }
}

pub const GYROAVERAGE_NODES_DEFAULT: usize = 128;
pub const GYROAVERAGE_NODES_MIN: usize = 64;

/// Co-rotating average Etilde(t, y) = (1/2pi) int r(E(t, tau, .), tau) dtau.
/// Closed for the registered families (their co-rotating integrands are
/// constant or a single harmonic); quadrature only for user fields. This
/// sits in the innermost loops of the kernel constructions, so it must stay
/// cheap.
pub fn gyroaverage_e(spec: &FieldSpec, t: f64, y: YPoint) -> Vec3 {
    match spec {
        FieldSpec::CircularResonant { amplitude } => Vec3::E2 * *amplitude,
        FieldSpec::TimeIndependent { profile } => profile.corotating_average(),
        FieldSpec::Separable { envelope, profile } => {
            profile.corotating_average() * envelope.value(t)
        }
        FieldSpec::General { .. } => {
            gyroaverage_e_n(spec, t, y, GYROAVERAGE_NODES_DEFAULT)
                .expect("default node count is valid")
        }
    }
}

/// Full-period quadrature with an explicit node count (at least 64). The
/// cross-check path: it never consults the closed forms, so agreement with
/// `gyroaverage_e` is evidence, not tautology.
pub fn gyroaverage_e_n(
    spec: &FieldSpec,
    t: f64,
    y: YPoint,
    nodes: usize,
) -> crate::Result<Vec3> {
    if nodes < GYROAVERAGE_NODES_MIN {
        return Err(crate::Error::Usage(format!(
            "gyroaverage needs at least {GYROAVERAGE_NODES_MIN} nodes, got {nodes}"
        )));
    }
    let x = Vec3::new(0.0, y.x2, y.x3);
    Ok(periodic_average(nodes, |tau| rotate(eval_e(spec, t, tau, x), tau)))
}

/// Co-rotating average of B''.
pub fn gyroaverage_b(spec: &FieldSpec, t: f64, y: YPoint) -> Vec3 {
    match spec {
        FieldSpec::General { .. } => {
            let x = Vec3::new(0.0, y.x2, y.x3);
            periodic_average(GYROAVERAGE_NODES_DEFAULT, |tau| {
                rotate(eval_b(spec, t, tau, x), tau)
            })
        }
        _ => Vec3::ZERO,
    }
}

const DRIFT_TOL: f64 = 1e-10;

/// Drift displacement L(s, t, y) = int_s^t Etilde(sigma, y) dsigma.
/// Signed: swapping s and t negates the result, so the additivity
/// L(s, u) + L(u, t) = L(s, t) holds for any ordering.
pub fn drift_l(spec: &FieldSpec, s: f64, t: f64, y: YPoint) -> Vec3 {
    match spec {
        FieldSpec::CircularResonant { amplitude } => Vec3::E2 * (amplitude * (t - s)),
        FieldSpec::TimeIndependent { profile } => profile.corotating_average() * (t - s),
        FieldSpec::Separable { envelope, profile } => {
            profile.corotating_average() * (envelope.primitive(t) - envelope.primitive(s))
        }
        FieldSpec::General { .. } => {
            let comp = |pick: fn(Vec3) -> f64| {
                adaptive_gauss(&|sigma| pick(gyroaverage_e(spec, sigma, y)), s, t, DRIFT_TOL)
            };
            Vec3::new(comp(|v| v.c1), comp(|v| v.c2), comp(|v| v.c3))
        }
    }
}

/// Prefix drifts L(times[0], times[i], y) along an increasing time grid.
/// For user fields this reuses each segment integral once instead of
/// integrating from scratch per pair; closed forms are evaluated directly.
pub fn drift_prefix(spec: &FieldSpec, times: &[f64], y: YPoint) -> Vec<Vec3> {
    match spec {
        FieldSpec::General { .. } => {
            let mut out = Vec::with_capacity(times.len());
            let mut acc = Vec3::ZERO;
            for (i, &t) in times.iter().enumerate() {
                if i > 0 {
                    acc += drift_l(spec, times[i - 1], t, y);
                }
                out.push(acc);
            }
            out
        }
        _ => times
            .iter()
            .map(|&t| drift_l(spec, times.first().copied().unwrap_or(0.0), t, y))
            .collect(),
    }
}

fn default_amplitude() -> f64 {
    1.0
}

/// Closure type for user-supplied initial data f0(x, v).
pub type DensityFn = Arc<dyn Fn(Vec3, Vec3) -> f64 + Send + Sync>;
/// Closure type for its partial Fourier transform in (x1, v2, v3) at frozen
/// slow coordinates: arguments are the Cartesian wave vector and y.
pub type SpectrumFn = Arc<dyn Fn(Vec3, YPoint) -> Complex64 + Send + Sync>;

/// Initial phase-space density. The Gaussian product is the workhorse: it is
/// gyro-symmetric by construction and its partial Fourier transform is
/// closed-form, which makes exact solution routes available downstream.
#[derive(Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialData {
    GaussianProduct {
        center_x: Vec3,
        width_x: f64,
        width_vpar: f64,
        width_vperp: f64,
        #[serde(default = "default_amplitude")]
        amplitude: f64,
    },
    /// User-supplied density, optionally with its partial Fourier transform.
    /// Not available from configuration files.
    #[serde(skip)]
    Custom {
        f0: DensityFn,
        spectrum: Option<SpectrumFn>,
    },
}

impl fmt::Debug for InitialData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InitialData::GaussianProduct { center_x, width_x, width_vpar, width_vperp, amplitude } => f
                .debug_struct("GaussianProduct")
                .field("center_x", center_x)
                .field("width_x", width_x)
                .field("width_vpar", width_vpar)
                .field("width_vperp", width_vperp)
                .field("amplitude", amplitude)
                .finish(),
            InitialData::Custom { spectrum, .. } => f
                .debug_struct("Custom")
                .field("spectrum", &spectrum.is_some())
                .finish_non_exhaustive(),
        }
    }
}

impl InitialData {
    pub fn gaussian(center_x: Vec3, width_x: f64, width_vpar: f64, width_vperp: f64) -> Self {
        InitialData::GaussianProduct {
            center_x,
            width_x,
            width_vpar,
            width_vperp,
            amplitude: 1.0,
        }
    }

    pub fn eval(&self, x: Vec3, v: Vec3) -> f64 {
        match self {
            InitialData::GaussianProduct { center_x, width_x, width_vpar, width_vperp, amplitude } => {
                let dx = x - *center_x;
                let qx = dx.dot(dx) / (2.0 * width_x * width_x);
                let qpar = v.c1 * v.c1 / (2.0 * width_vpar * width_vpar);
                let vp = v.perp_norm();
                let qperp = vp * vp / (2.0 * width_vperp * width_vperp);
                amplitude * (-qx - qpar - qperp).exp()
            }
            InitialData::Custom { f0, .. } => f0(x, v),
        }
    }

    /// Validity check for the usual sanity constraints.
    pub fn validate(&self) -> crate::Result<()> {
        if let InitialData::GaussianProduct { width_x, width_vpar, width_vperp, amplitude, .. } = self {
            for (name, w) in [("width_x", width_x), ("width_vpar", width_vpar), ("width_vperp", width_vperp)] {
                if !(w.is_finite() && *w > 0.0) {
                    return Err(crate::Error::Config(format!("{name} must be positive, got {w}")));
                }
            }
            if !amplitude.is_finite() {
                return Err(crate::Error::Config("amplitude must be finite".into()));
            }
        }
        Ok(())
    }
}

/// What `validate_assumptions` measured.
#[derive(Debug, Clone, Serialize)]
pub struct AssumptionReport {
    /// Largest |E| seen over the sampled window.
    pub e_sup_estimate: f64,
    /// Largest |B''| seen over the sampled window.
    pub b_sup_estimate: f64,
    /// E and B'' did not react to moving x1 at fixed (t, tau, x2, x3).
    pub fields_uniform_in_x1: bool,
    /// f0 was invariant under transverse velocity rotations.
    pub f0_gyro_symmetric: bool,
    pub notes: Vec<String>,
}

impl AssumptionReport {
    pub fn all_hold(&self) -> bool {
        self.fields_uniform_in_x1 && self.f0_gyro_symmetric
    }
}

/// Samples the structural hypotheses the reduction rests on: the fields may
/// not depend on x1, and the initial data must be gyro-symmetric in v. Both
/// are spot checks at seeded random points over t in [0, horizon], not
/// proofs; registered scenarios satisfy the field half by construction.
pub fn validate_assumptions(
    spec: &FieldSpec,
    f0: &InitialData,
    horizon: f64,
    seed: u64,
) -> AssumptionReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x61737375);
    let mut e_sup: f64 = 0.0;
    let mut b_sup: f64 = 0.0;
    let mut uniform = true;
    let mut symmetric = true;
    let mut notes = Vec::new();
    for _ in 0..48 {
        let t = rng.gen_range(0.0..=horizon.max(1e-12));
        let tau = rng.gen_range(0.0..std::f64::consts::TAU);
        let xperp = Vec3::new(0.0, rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        let x1a = rng.gen_range(-2.0..2.0);
        let x1b = rng.gen_range(-2.0..2.0);
        let xa = Vec3::new(x1a, xperp.c2, xperp.c3);
        let xb = Vec3::new(x1b, xperp.c2, xperp.c3);
        let ea = eval_e(spec, t, tau, xa);
        let eb = eval_e(spec, t, tau, xb);
        let ba = eval_b(spec, t, tau, xa);
        let bb = eval_b(spec, t, tau, xb);
        e_sup = e_sup.max(ea.norm());
        b_sup = b_sup.max(ba.norm());
        if (ea - eb).norm() > 1e-12 * (1.0 + ea.norm()) || (ba - bb).norm() > 1e-12 * (1.0 + ba.norm()) {
            uniform = false;
        }
        let x = Vec3::new(x1a, xperp.c2, xperp.c3);
        let v = Vec3::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        let theta = rng.gen_range(0.0..std::f64::consts::TAU);
        let f = f0.eval(x, v);
        let fr = f0.eval(x, rotate(v, theta));
        if (f - fr).abs() > 1e-9 * (1.0 + f.abs()) {
            symmetric = false;
        }
    }
    if !uniform {
        notes.push("fields vary along x1; the reduction does not apply".to_string());
    }
    if !symmetric {
        notes.push("initial data is not gyro-symmetric; the limit problem changes".to_string());
    }
    AssumptionReport {
        e_sup_estimate: e_sup,
        b_sup_estimate: b_sup,
        fields_uniform_in_x1: uniform,
        f0_gyro_symmetric: symmetric,
        notes,
    }
}
