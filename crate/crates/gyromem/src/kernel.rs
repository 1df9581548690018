//! The memory kernel and its three construction routes.
//!
//! After averaging out the fast gyration, each Fourier mode of the reduced
//! density obeys an integro-differential equation in time whose kernel
//! Ktilde(s, t, y, k) is characterized by a first-kind Volterra equation:
//!
//!   int_s^t A(s, sigma) Ktilde(sigma, t) dsigma = dA/dt (s, t),
//!
//! where A(s, t) = J0(|kperp| |L(s, t, y)|) is the gyroaveraged phase
//! amplitude of the drift displacement L. Two scenario families admit closed
//! forms (time-independent co-rotating fields and separable envelopes); the
//! numeric route solves the Volterra equation by midpoint product
//! integration and works for any scenario. Cross-checking the three routes
//! against each other and against the residual of the defining equation is
//! the point of this module.
//!
//! Kernel quantities live on the transverse dynamics: only the components of
//! L and Etilde perpendicular to the strong-field axis enter. The parallel
//! wavenumber k1 appears nowhere in Ktilde (an invariant worth asserting,
//! see the tests); it only contributes the free-streaming phase
//! exp(-i k1 y1 (t - s)) restored by `kernel_k`.

use std::io::Write as IoWrite;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::fields::{drift_l, drift_prefix, gyroaverage_e, FieldSpec, YPoint};
use crate::math::{bessel_j0, j1_over_z, Angle, Vec3};
use crate::{Error, Result};

/// One Fourier mode of the fast phase-space coordinates z = (x1, v2, v3),
/// stored as parallel wavenumber plus polar transverse wavenumber.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KMode {
    pub k1: f64,
    /// |kperp| >= 0.
    pub kperp: f64,
    /// Direction of the transverse wave vector in the (2, 3) plane.
    #[serde(default)]
    pub kperp_dir: Angle,
}

impl KMode {
    pub fn new(k1: f64, kperp: f64, kperp_dir: Angle) -> Result<Self> {
        let m = KMode { k1, kperp, kperp_dir };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.kperp.is_finite() && self.kperp >= 0.0) || !self.k1.is_finite() {
            return Err(Error::Usage(format!(
                "wave mode needs finite k1 and kperp >= 0, got k1={}, kperp={}",
                self.k1, self.kperp
            )));
        }
        Ok(())
    }

    pub fn cartesian(&self) -> Vec3 {
        let (s, c) = self.kperp_dir.sin_cos();
        Vec3::new(self.k1, self.kperp * c, self.kperp * s)
    }

    pub fn from_cartesian(k: Vec3) -> Self {
        KMode {
            k1: k.c1,
            kperp: k.perp_norm(),
            kperp_dir: k.c3.atan2(k.c2),
        }
    }

    pub fn norm_sq(&self) -> f64 {
        self.k1 * self.k1 + self.kperp * self.kperp
    }
}

/// How a kernel grid was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum KernelRoute {
    #[serde(rename = "explicit_timeindep")]
    ExplicitTimeIndependent,
    #[serde(rename = "explicit_separable")]
    ExplicitSeparable,
    #[serde(rename = "volterra_numeric")]
    VolterraNumeric,
}

impl KernelRoute {
    pub fn as_str(&self) -> &'static str {
        match self {
            KernelRoute::ExplicitTimeIndependent => "explicit_timeindep",
            KernelRoute::ExplicitSeparable => "explicit_separable",
            KernelRoute::VolterraNumeric => "volterra_numeric",
        }
    }
}

/// Sampled row Ktilde(., t) of the tilde kernel on [0, t]. Values are real:
/// the complex kernel is the phase of `kernel_at` times these.
#[derive(Debug, Clone, Serialize)]
pub struct KernelGrid {
    pub t: f64,
    pub s_nodes: Vec<f64>,
    pub values: Vec<f64>,
    pub y: YPoint,
    pub mode: KMode,
    pub provenance: KernelRoute,
}

impl KernelGrid {
    /// Linear interpolation of Ktilde(s, t); None outside [0, t] or on an
    /// empty grid.
    pub fn value_at(&self, s: f64) -> Option<f64> {
        let n = self.s_nodes.len();
        if n == 0 || s < self.s_nodes[0] - 1e-12 || s > self.s_nodes[n - 1] + 1e-12 {
            return None;
        }
        if n == 1 {
            return Some(self.values[0]);
        }
        let i = match self.s_nodes.binary_search_by(|a| a.partial_cmp(&s).unwrap()) {
            Ok(i) => return Some(self.values[i]),
            Err(i) => i.clamp(1, n - 1),
        };
        let (s0, s1) = (self.s_nodes[i - 1], self.s_nodes[i]);
        let w = ((s - s0) / (s1 - s0)).clamp(0.0, 1.0);
        Some(self.values[i - 1] * (1.0 - w) + self.values[i] * w)
    }

    /// Full kernel K(s, t, y, ik) with the free-streaming phase restored.
    pub fn kernel_at(&self, s: f64) -> Option<Complex64> {
        let v = self.value_at(s)?;
        let phase = Complex64::from_polar(1.0, -self.mode.k1 * self.y.v1 * (self.t - s));
        Some(phase * v)
    }

    /// CSV rows, one per node.
    pub fn write_csv<W: IoWrite>(&self, w: &mut W) -> std::io::Result<()> {
        writeln!(w, "s,t,y1,y2,y3,k1,kperp,re(K),im(K),provenance")?;
        for (&s, &v) in self.s_nodes.iter().zip(&self.values) {
            let k = Complex64::from_polar(1.0, -self.mode.k1 * self.y.v1 * (self.t - s)) * v;
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{},{}",
                s,
                self.t,
                self.y.v1,
                self.y.x2,
                self.y.x3,
                self.mode.k1,
                self.mode.kperp,
                k.re,
                k.im,
                self.provenance.as_str()
            )?;
        }
        Ok(())
    }
}

/// Gyroaveraged phase amplitude A(s, t, y, k) = J0(|kperp| |Lperp(s, t, y)|).
/// Equals 1 on the diagonal s = t.
pub fn amplitude_a(spec: &FieldSpec, s: f64, t: f64, y: YPoint, mode: &KMode) -> f64 {
    bessel_j0(mode.kperp * drift_l(spec, s, t, y).perp_norm())
}

/// Partial derivative of A in its second argument, written through
/// J1(z)/z so the vanishing-drift case needs no branch:
/// dA/dt = -(Lperp . Etildeperp(t)) kperp^2 (J1/z)(kperp |Lperp|).
pub fn amplitude_a_dt(spec: &FieldSpec, s: f64, t: f64, y: YPoint, mode: &KMode) -> f64 {
    let l = drift_l(spec, s, t, y).perp();
    let e = gyroaverage_e(spec, t, y).perp();
    -(l.dot(e)) * mode.kperp * mode.kperp * j1_over_z(mode.kperp * l.norm())
}

fn etilde_perp_static(spec: &FieldSpec, y: YPoint) -> Result<Vec3> {
    match spec {
        FieldSpec::CircularResonant { .. } | FieldSpec::TimeIndependent { .. } => {
            Ok(gyroaverage_e(spec, 0.0, y).perp())
        }
        _ => Err(Error::Usage(
            "time-independent closed form needs a scenario with no time dependence".into(),
        )),
    }
}

/// Closed form for scenarios whose co-rotating field is constant in time:
/// Ktilde(s, t) = -C^2 (J1/z)(C (t - s)) with C = |kperp| |Etildeperp(y)|.
/// Symmetric in (s, t) and depends on them only through t - s.
pub fn ktilde_time_independent(
    spec: &FieldSpec,
    s: f64,
    t: f64,
    y: YPoint,
    mode: &KMode,
) -> Result<f64> {
    mode.validate()?;
    let c = mode.kperp * etilde_perp_static(spec, y)?.norm();
    Ok(-c * c * j1_over_z(c * (t - s)))
}

/// Closed form for separable scenarios E = envelope(t) g(tau):
/// Ktilde(s, t) = -envelope(t) envelope(s) (kperp |gperp|)^2
///                 (J1/z)(kperp |gperp| (Phi(t) - Phi(s))),
/// with Phi the envelope primitive and gperp the transverse co-rotating
/// average of the profile. The J1/z form keeps the value finite when the
/// envelope's primitive returns to itself (vanishing drift with s != t).
pub fn ktilde_separable(spec: &FieldSpec, s: f64, t: f64, y: YPoint, mode: &KMode) -> Result<f64> {
    mode.validate()?;
    let _ = y;
    let FieldSpec::Separable { envelope, profile } = spec else {
        return Err(Error::Usage("separable closed form needs a separable scenario".into()));
    };
    let g = profile.corotating_average().perp().norm();
    let c = mode.kperp * g;
    let dphi = envelope.primitive(t) - envelope.primitive(s);
    Ok(-envelope.value(t) * envelope.value(s) * c * c * j1_over_z(c * dphi))
}

/// Value of Ktilde on the diagonal, -kperp^2 |Etildeperp(t, y)|^2 / 2.
/// Every route must reproduce this; it anchors the kernel's scale.
pub fn ktilde_coincidence(spec: &FieldSpec, t: f64, y: YPoint, mode: &KMode) -> f64 {
    let e = gyroaverage_e(spec, t, y).perp().norm();
    -0.5 * mode.kperp * mode.kperp * e * e
}

pub const VOLTERRA_MIN_INTERVALS: usize = 8;

/// Reconstructs the row Ktilde(., t) numerically from the defining Volterra
/// equation, with no recourse to the closed forms.
///
/// Midpoint product integration: unknowns sit at interval midpoints,
/// collocation at the left nodes s_i gives a triangular system
///
///   sum_{j >= i} Delta A(s_i, sigma_{j+1/2}) u_j = dA/dt (s_i, t),
///
/// solved by back substitution from i = n-1 downward. Node values (returned
/// in the grid) are midpoint averages, with linear extrapolation at both
/// ends. Second order in Delta = t/n.
///
/// When the diagonal weight |A(s_i, sigma_{i+1/2})| drops below 1/2 the
/// oscillation of A outruns the grid and back substitution amplifies noise;
/// that returns `KernelResolution` with a doubled interval count.
pub fn ktilde_volterra_numeric(
    spec: &FieldSpec,
    t: f64,
    n: usize,
    y: YPoint,
    mode: &KMode,
) -> Result<KernelGrid> {
    mode.validate()?;
    if n < VOLTERRA_MIN_INTERVALS {
        return Err(Error::Usage(format!(
            "volterra reconstruction needs at least {VOLTERRA_MIN_INTERVALS} intervals, got {n}"
        )));
    }
    if t <= 0.0 {
        return Ok(KernelGrid {
            t,
            s_nodes: Vec::new(),
            values: Vec::new(),
            y,
            mode: *mode,
            provenance: KernelRoute::VolterraNumeric,
        });
    }
    let delta = t / n as f64;
    // Drift prefixes at nodes and midpoints in one increasing sweep, so the
    // general-scenario quadrature integrates each segment once.
    let mut times = Vec::with_capacity(2 * n + 1);
    for i in 0..n {
        times.push(i as f64 * delta);
        times.push((i as f64 + 0.5) * delta);
    }
    times.push(t);
    let prefix = drift_prefix(spec, &times, y);
    let p_node = |i: usize| prefix[2 * i];
    let p_mid = |j: usize| prefix[2 * j + 1];
    let p_end = prefix[2 * n];

    let e_t = gyroaverage_e(spec, t, y).perp();
    let kp = mode.kperp;
    let rhs = |i: usize| -> f64 {
        let l = (p_end - p_node(i)).perp();
        -(l.dot(e_t)) * kp * kp * j1_over_z(kp * l.norm())
    };
    let a = |i: usize, j: usize| -> f64 {
        bessel_j0(kp * (p_mid(j) - p_node(i)).perp_norm())
    };

    let mut u = vec![0.0f64; n];
    for i in (0..n).rev() {
        let diag = a(i, i);
        if diag.abs() < 0.5 {
            return Err(Error::KernelResolution { suggested: 2 * n });
        }
        let mut acc = rhs(i);
        for j in (i + 1)..n {
            acc -= delta * a(i, j) * u[j];
        }
        u[i] = acc / (delta * diag);
    }

    let mut s_nodes = Vec::with_capacity(n + 1);
    let mut values = Vec::with_capacity(n + 1);
    s_nodes.push(0.0);
    values.push(1.5 * u[0] - 0.5 * u[1]);
    for i in 1..n {
        s_nodes.push(i as f64 * delta);
        values.push(0.5 * (u[i - 1] + u[i]));
    }
    s_nodes.push(t);
    values.push(1.5 * u[n - 1] - 0.5 * u[n - 2]);

    Ok(KernelGrid {
        t,
        s_nodes,
        values,
        y,
        mode: *mode,
        provenance: KernelRoute::VolterraNumeric,
    })
}

/// Samples a kernel row on [0, t] with n intervals through the chosen route.
pub fn ktilde_grid(
    spec: &FieldSpec,
    t: f64,
    n: usize,
    y: YPoint,
    mode: &KMode,
    route: KernelRoute,
) -> Result<KernelGrid> {
    if route == KernelRoute::VolterraNumeric {
        return ktilde_volterra_numeric(spec, t, n, y, mode);
    }
    mode.validate()?;
    if n == 0 {
        return Err(Error::Usage("kernel grid needs at least one interval".into()));
    }
    if t <= 0.0 {
        return Ok(KernelGrid {
            t,
            s_nodes: Vec::new(),
            values: Vec::new(),
            y,
            mode: *mode,
            provenance: route,
        });
    }
    let eval: Box<dyn Fn(f64) -> Result<f64>> = match route {
        KernelRoute::ExplicitTimeIndependent => {
            Box::new(move |s| ktilde_time_independent(spec, s, t, y, mode))
        }
        KernelRoute::ExplicitSeparable => Box::new(move |s| ktilde_separable(spec, s, t, y, mode)),
        KernelRoute::VolterraNumeric => unreachable!(),
    };
    let mut s_nodes = Vec::with_capacity(n + 1);
    let mut values = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let s = t * i as f64 / n as f64;
        s_nodes.push(s);
        values.push(eval(s)?);
    }
    Ok(KernelGrid { t, s_nodes, values, y, mode: *mode, provenance: route })
}

/// Full kernel K(s, t, y, ik) = exp(-i k1 y1 (t - s)) Ktilde(s, t, y, kperp)
/// through the closed form matching the scenario.
pub fn kernel_k(spec: &FieldSpec, s: f64, t: f64, y: YPoint, mode: &KMode) -> Result<Complex64> {
    let ktilde = match spec {
        FieldSpec::CircularResonant { .. } | FieldSpec::TimeIndependent { .. } => {
            ktilde_time_independent(spec, s, t, y, mode)?
        }
        FieldSpec::Separable { .. } => ktilde_separable(spec, s, t, y, mode)?,
        FieldSpec::General { .. } => {
            return Err(Error::Usage(
                "no closed kernel for general scenarios; reconstruct numerically".into(),
            ))
        }
    };
    Ok(Complex64::from_polar(1.0, -mode.k1 * y.v1 * (t - s)) * ktilde)
}

/// Report of `volterra_residual`.
#[derive(Debug, Clone, Serialize)]
pub struct ResidualReport {
    /// max_i | int_{s_i}^t A(s_i, sigma) Ktilde(sigma, t) dsigma - dA/dt(s_i, t) |
    pub max_residual: f64,
    /// Markers per grid interval in the verification quadrature.
    pub refinement: usize,
    /// Grid pairs where the drift displacement vanished although s != t.
    /// The kernel value there comes from the J1/z continuation; the residual
    /// still measures it, but coincident displacements deserve a flag.
    pub vanishing_drift_pairs: usize,
}

/// Measures how well a sampled kernel row satisfies its defining Volterra
/// equation, with a trapezoid quadrature refined beyond the row's own grid
/// (at least 512 intervals across [0, t]). Works for any provenance, which
/// makes it the route-independent cross check.
pub fn volterra_residual(spec: &FieldSpec, grid: &KernelGrid) -> Result<ResidualReport> {
    let n = grid.s_nodes.len();
    if n < 3 {
        return Err(Error::Usage("residual check needs a grid with at least 3 nodes".into()));
    }
    let t = grid.t;
    let intervals = n - 1;
    let refinement = (512 + intervals - 1) / intervals;
    let m = intervals * refinement;
    let h = t / m as f64;
    let marker_times: Vec<f64> = (0..=m).map(|q| t * q as f64 / m as f64).collect();
    let prefix = drift_prefix(spec, &marker_times, grid.y);
    let kp = grid.mode.kperp;
    let e_t = gyroaverage_e(spec, t, grid.y).perp();

    // Ktilde at markers by interpolation of the row.
    let ktilde: Vec<f64> = marker_times
        .iter()
        .map(|&s| grid.value_at(s).expect("marker inside [0, t]"))
        .collect();

    // A displacement is "vanishing" when it is smaller than one marker step
    // of drift although many steps of time have passed, meaning the drift
    // integral cancelled rather than never moved.
    let rate = gyroaverage_e(spec, 0.5 * t, grid.y).norm().max(spec.e_sup(0.0, t));
    let l_tol = h * rate.max(1e-9);
    let mut vanishing = 0usize;
    let mut max_residual = 0.0f64;
    for i in 0..intervals {
        let q0 = i * refinement;
        let li = prefix[q0];
        // Weighted trapezoid of A(s_i, .) Ktilde(., t) over [s_i, t].
        let mut acc = 0.0;
        for q in q0..=m {
            let l = (prefix[q] - li).perp_norm();
            if l < l_tol && marker_times[q] - marker_times[q0] > 10.0 * h {
                vanishing += 1;
            }
            let w = if q == q0 || q == m { 0.5 } else { 1.0 };
            acc += w * bessel_j0(kp * l) * ktilde[q];
        }
        let integral = acc * h;
        let lperp = (prefix[m] - li).perp();
        let rhs = -(lperp.dot(e_t)) * kp * kp * j1_over_z(kp * lperp.norm());
        max_residual = max_residual.max((integral - rhs).abs());
    }
    Ok(ResidualReport { max_residual, refinement, vanishing_drift_pairs: vanishing })
}
