//! The two-scale limit of the scaled kinetic equation.
//!
//! As epsilon -> 0 the density develops the factored form
//! f(t, x, v) ~ F(t, t/eps, x, v) with a profile that is a gyration orbit
//! of a slow function:
//!
//!   F(t, tau, x, v) = G(t, x, r(v, tau)),
//!
//! where G transports the initial profile along the averaged field. With
//! gyro-symmetric initial data G(0, x, u) = f0(x, u) / 2pi, and the slow
//! characteristics move only x1 (by u1) and u (by the gyroaveraged force);
//! the perpendicular position is frozen at this order.
//!
//! `limit_g` evaluates G by the closed-form backward characteristics,
//! `limit_g_ode` re-derives it with a Runge-Kutta integrator as an
//! independent check, and `weak_star_f` returns the tau-averaged density
//! that finite-epsilon solutions converge to in the weak-star sense.

use crate::fields::{drift_l, gyroaverage_b, gyroaverage_e, FieldSpec, InitialData, YPoint};
use crate::math::{adaptive_gauss, periodic_average, rotate, Vec3};
use crate::{Error, Result};

const TAU_NODES_MIN: usize = 16;

/// Double drift integral int_0^t L_1(sigma, t) d sigma: the parallel
/// displacement accumulated by the averaged force. Closed per field family;
/// zero whenever the averaged field has no component along e1.
fn parallel_displacement(spec: &FieldSpec, t: f64, y: YPoint) -> f64 {
    match spec {
        // The resonant drive averages to a perpendicular vector.
        FieldSpec::CircularResonant { .. } => 0.0,
        FieldSpec::TimeIndependent { profile } => {
            0.5 * profile.corotating_average().c1 * t * t
        }
        FieldSpec::Separable { envelope, profile } => {
            profile.corotating_average().c1
                * (t * envelope.primitive(t) - envelope.primitive_integral(t))
        }
        FieldSpec::General { .. } => {
            adaptive_gauss(&|sigma| drift_l(spec, sigma, t, y).c1, 0.0, t, 1e-13)
        }
    }
}

/// Slow profile G(t, x, u) by closed-form backward characteristics:
///
///   u(0)  = u - L(0, t, y),
///   x1(0) = x1 - t u1 + int_0^t L_1(sigma, t) d sigma,
///
/// with the perpendicular position untouched.
pub fn limit_g(spec: &FieldSpec, data: &InitialData, t: f64, x: Vec3, u: Vec3) -> f64 {
    let y = YPoint::new(u.c1, x.c2, x.c3);
    let l = drift_l(spec, 0.0, t, y);
    let x_back = Vec3::new(x.c1 - t * u.c1 + parallel_displacement(spec, t, y), x.c2, x.c3);
    let u_back = u - l;
    data.eval(x_back, u_back) / std::f64::consts::TAU
}

/// G by explicit backward integration of the slow characteristics
///
///   dx1/ds = u1,   du/ds = E~(s, y) + u x B~(s, y),
///
/// with classical fourth-order Runge-Kutta on `steps` substeps. Exists to
/// cross-check `limit_g`; the closed form should be preferred.
pub fn limit_g_ode(
    spec: &FieldSpec,
    data: &InitialData,
    t: f64,
    x: Vec3,
    u: Vec3,
    steps: usize,
) -> Result<f64> {
    if steps == 0 {
        return Err(Error::Usage("characteristic integration needs at least one step".into()));
    }
    let y = YPoint::new(u.c1, x.c2, x.c3);
    let rate = |s: f64, state: (f64, Vec3)| -> (f64, Vec3) {
        let force = gyroaverage_e(spec, s, y) + state.1.cross(gyroaverage_b(spec, s, y));
        (state.1.c1, force)
    };
    // Integrate backward: s runs from t to 0.
    let h = -t / steps as f64;
    let mut s = t;
    let mut state = (x.c1, u);
    for _ in 0..steps {
        let k1 = rate(s, state);
        let k2 = rate(s + 0.5 * h, (state.0 + 0.5 * h * k1.0, state.1 + k1.1 * (0.5 * h)));
        let k3 = rate(s + 0.5 * h, (state.0 + 0.5 * h * k2.0, state.1 + k2.1 * (0.5 * h)));
        let k4 = rate(s + h, (state.0 + h * k3.0, state.1 + k3.1 * h));
        state.0 += h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
        state.1 += (k1.1 + k2.1 * 2.0 + k3.1 * 2.0 + k4.1) * (h / 6.0);
        s += h;
    }
    let x_back = Vec3::new(state.0, x.c2, x.c3);
    Ok(data.eval(x_back, state.1) / std::f64::consts::TAU)
}

/// Oscillatory profile F(t, tau, x, v) = G(t, x, r(v, tau)).
pub fn profile_f(spec: &FieldSpec, data: &InitialData, t: f64, tau: f64, x: Vec3, v: Vec3) -> f64 {
    limit_g(spec, data, t, x, rotate(v, tau))
}

/// Weak-star limit density: the profile averaged over one gyration,
/// f(t, x, v) = int_0^2pi F(t, tau, x, v) d tau, on `tau_nodes` equispaced
/// phases (spectrally accurate for the smooth profile).
pub fn weak_star_f(
    spec: &FieldSpec,
    data: &InitialData,
    t: f64,
    x: Vec3,
    v: Vec3,
    tau_nodes: usize,
) -> Result<f64> {
    if tau_nodes < TAU_NODES_MIN {
        return Err(Error::Usage(format!(
            "tau average needs at least {TAU_NODES_MIN} nodes, got {tau_nodes}"
        )));
    }
    let mean: f64 = periodic_average(tau_nodes, |tau| profile_f(spec, data, t, tau, x, v));
    Ok(std::f64::consts::TAU * mean)
}
