//! Direct simulation of the scaled kinetic system at finite epsilon.
//!
//! Particles follow
//!
//!   dX/dt = V,
//!   dV/dt = E(t, t/eps, X) + V x (e1/eps + B''(t, t/eps, X)),
//!
//! pushed by a Strang split: a half-step field kick, the exact free
//! gyration over the full step, and a second half-step kick with the fields
//! at the step's far end. The kicks treat V x B'' by the implicit midpoint
//! rule (a Boris-style closed-form solve, so |V| is conserved when E = 0),
//! and the position advances by the exact time integral of the rotating
//! velocity, not by a frozen midpoint value; at the gyration rate 1/eps the
//! difference matters.
//!
//! On the resonant scenario (circularly polarized drive locked to the
//! gyration, unit amplitude) this splitting reproduces the closed-form
//! trajectory to rounding, because the kick field commutes with the
//! rotation applied between the kicks. `resonance_reference` provides that
//! closed form; off resonance the scheme is plain second order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::fields::{eval_b, eval_e, FieldSpec, InitialData};
use crate::math::{gauss_hermite, rotate, Vec3};
use crate::{Error, Result};

/// One marker of the phase-space quadrature. `w` is the pure quadrature
/// weight of the marker's initial cell; `f0_value` is the density carried
/// along the trajectory (constant, by Liouville). Observables are
/// sums of w * f0_value * psi, so the two factors are never conflated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Particle {
    pub x: Vec3,
    pub v: Vec3,
    pub w: f64,
    pub f0_value: f64,
}

/// How to lay markers over the initial data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Sampling {
    /// Tensor Gauss-Hermite points per axis: [x1, x2, x3, v1, v2, v3].
    /// Deterministic; exact for polynomial moments against the Gaussian.
    GaussHermite { dims: [usize; 6] },
    /// Seeded Gaussian draws with importance weights.
    MonteCarlo { count: usize },
}

const MAX_PARTICLES: usize = 4_000_000;

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct EnsembleConfig {
    pub epsilon: f64,
    pub dt: f64,
    pub t_final: f64,
    pub sampling: Sampling,
    /// Include the strong-field gyration e1/eps. Disabling it (tests only)
    /// leaves the bounded fields acting alone.
    #[serde(default = "default_true")]
    pub strong_field: bool,
    /// Snapshot cadence in steps; the final state is always kept.
    #[serde(default = "default_save_every")]
    pub save_every: usize,
}

fn default_true() -> bool {
    true
}

fn default_save_every() -> usize {
    usize::MAX
}

impl EnsembleConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return Err(Error::Config(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::Config(format!("dt must be positive, got {}", self.dt)));
        }
        if self.strong_field && self.dt > self.epsilon / 8.0 + 1e-15 {
            return Err(Error::Config(format!(
                "dt = {} does not resolve the gyration; need dt <= epsilon/8 = {}",
                self.dt,
                self.epsilon / 8.0
            )));
        }
        if !(self.t_final.is_finite() && self.t_final >= 0.0) {
            return Err(Error::Config(format!("t_final must be nonnegative, got {}", self.t_final)));
        }
        let steps = (self.t_final / self.dt).round();
        if (steps * self.dt - self.t_final).abs() > 1e-9 * self.t_final.max(1.0) {
            return Err(Error::Config(format!(
                "t_final = {} is not a whole number of steps of dt = {}",
                self.t_final, self.dt
            )));
        }
        if self.save_every == 0 {
            return Err(Error::Config("save_every must be at least 1".into()));
        }
        match self.sampling {
            Sampling::GaussHermite { dims } => {
                if dims.iter().any(|&d| d == 0) {
                    return Err(Error::Config("every sampling dimension needs at least 1 point".into()));
                }
                let total: usize = dims.iter().product();
                if total > MAX_PARTICLES {
                    return Err(Error::Config(format!(
                        "sampling asks for {total} markers, cap is {MAX_PARTICLES}"
                    )));
                }
            }
            Sampling::MonteCarlo { count } => {
                if count == 0 || count > MAX_PARTICLES {
                    return Err(Error::Config(format!(
                        "marker count must be in 1..={MAX_PARTICLES}, got {count}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        (self.t_final / self.dt).round() as usize
    }
}

/// Field kick of length h at frozen (t, tau, x): implicit midpoint for
/// dV/dt = E + V x B''. Closed-form solve; conserves |V| when E = 0.
fn kick(spec: &FieldSpec, t: f64, tau: f64, x: Vec3, v: Vec3, h: f64) -> Vec3 {
    let e = eval_e(spec, t, tau, x);
    let bpp = eval_b(spec, t, tau, x);
    let c = v + e * (0.5 * h);
    if bpp == Vec3::ZERO {
        return v + e * h;
    }
    let b = bpp * (0.5 * h);
    let mid = (c + c.cross(b) + b * c.dot(b)) * (1.0 / (1.0 + b.dot(b)));
    mid * 2.0 - v
}

/// Exact displacement int_0^dt r(v, -s/eps) ds of a freely gyrating velocity.
fn gyration_displacement(v: Vec3, dt: f64, epsilon: f64) -> Vec3 {
    let theta = dt / epsilon;
    let (sin, cos) = theta.sin_cos();
    Vec3::new(
        dt * v.c1,
        epsilon * (v.c2 * sin + v.c3 * (1.0 - cos)),
        epsilon * (-v.c2 * (1.0 - cos) + v.c3 * sin),
    )
}

/// Advances one particle from t to t + dt.
pub fn push(spec: &FieldSpec, cfg: &EnsembleConfig, p: &mut Particle, t: f64) {
    let dt = cfg.dt;
    let h = 0.5 * dt;
    let eps = cfg.epsilon;
    let tau0 = if cfg.strong_field { t / eps } else { 0.0 };
    let t1 = t + dt;
    let tau1 = if cfg.strong_field { t1 / eps } else { 0.0 };

    let v1 = kick(spec, t, tau0, p.x, p.v, h);
    let (v2, dx) = if cfg.strong_field {
        (rotate(v1, -dt / eps), gyration_displacement(v1, dt, eps))
    } else {
        (v1, v1 * dt)
    };
    p.x += dx;
    p.v = kick(spec, t1, tau1, p.x, v2, h);
}

fn gaussian_params(data: &InitialData) -> Result<(Vec3, [f64; 6], f64)> {
    match data {
        InitialData::GaussianProduct { center_x, width_x, width_vpar, width_vperp, amplitude } => {
            data.validate()?;
            let widths = [*width_x, *width_x, *width_x, *width_vpar, *width_vperp, *width_vperp];
            Ok((*center_x, widths, *amplitude))
        }
        InitialData::Custom { .. } => Err(Error::Usage(
            "marker sampling needs the Gaussian family; custom densities have no sampler".into(),
        )),
    }
}

/// Lays markers over the initial data. Deterministic given the seed; the
/// Gauss-Hermite variant ignores the seed entirely.
pub fn sample_particles(data: &InitialData, sampling: &Sampling, seed: u64) -> Result<Vec<Particle>> {
    let (center, widths, amplitude) = gaussian_params(data)?;
    let center6 = [center.c1, center.c2, center.c3, 0.0, 0.0, 0.0];
    match *sampling {
        Sampling::GaussHermite { dims } => {
            let total: usize = dims.iter().product();
            if total > MAX_PARTICLES {
                return Err(Error::Config(format!("sampling asks for {total} markers")));
            }
            let rules: Vec<Vec<(f64, f64)>> = dims.iter().map(|&n| gauss_hermite(n)).collect();
            let mut out = Vec::with_capacity(total);
            let mut idx = [0usize; 6];
            loop {
                let mut coord = [0.0f64; 6];
                let mut w = 1.0f64;
                for d in 0..6 {
                    let (u, wu) = rules[d][idx[d]];
                    // x = c + sqrt(2) width u maps the Hermite weight onto the
                    // Gaussian; exp(u^2) strips the e^{-u^2} the rule includes,
                    // leaving a pure volume weight.
                    coord[d] = center6[d] + std::f64::consts::SQRT_2 * widths[d] * u;
                    w *= std::f64::consts::SQRT_2 * widths[d] * wu * (u * u).exp();
                }
                let x = Vec3::new(coord[0], coord[1], coord[2]);
                let v = Vec3::new(coord[3], coord[4], coord[5]);
                out.push(Particle { x, v, w, f0_value: data.eval(x, v) });
                // Odometer over the tensor grid, last axis fastest.
                let mut d = 6;
                loop {
                    if d == 0 {
                        return Ok(out);
                    }
                    d -= 1;
                    idx[d] += 1;
                    if idx[d] < dims[d] {
                        break;
                    }
                    idx[d] = 0;
                }
            }
        }
        Sampling::MonteCarlo { count } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6d61726b);
            let mut normal = || -> f64 {
                let u1: f64 = 1.0 - rng.gen::<f64>();
                let u2: f64 = rng.gen();
                (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
            };
            // Total integral of the product Gaussian over all six axes.
            let mass = amplitude
                * (2.0 * std::f64::consts::PI).powi(3)
                * widths.iter().product::<f64>();
            let mut out = Vec::with_capacity(count);
            for _ in 0..count {
                let mut coord = [0.0f64; 6];
                for d in 0..6 {
                    coord[d] = center6[d] + widths[d] * normal();
                }
                let x = Vec3::new(coord[0], coord[1], coord[2]);
                let v = Vec3::new(coord[3], coord[4], coord[5]);
                let f0 = data.eval(x, v);
                out.push(Particle { x, v, w: mass / (count as f64 * f0), f0_value: f0 });
            }
            Ok(out)
        }
    }
}

/// Particle states at one saved time.
#[derive(Debug, Clone)]
pub struct Snapshot {
    pub t: f64,
    pub particles: Vec<Particle>,
}

/// Evolves a sampled ensemble and returns the requested snapshots
/// (initial state first, final state last).
pub fn simulate_ensemble(
    spec: &FieldSpec,
    data: &InitialData,
    cfg: &EnsembleConfig,
    seed: u64,
) -> Result<Vec<Snapshot>> {
    cfg.validate()?;
    let mut particles = sample_particles(data, &cfg.sampling, seed)?;
    let steps = cfg.steps();
    let mut snapshots = Vec::new();
    snapshots.push(Snapshot { t: 0.0, particles: particles.clone() });
    for m in 0..steps {
        let t = m as f64 * cfg.dt;
        particles.par_chunks_mut(4096).for_each(|chunk| {
            for p in chunk {
                push(spec, cfg, p, t);
            }
        });
        let done = m + 1 == steps;
        if (m + 1) % cfg.save_every == 0 && !done {
            snapshots.push(Snapshot { t: (m + 1) as f64 * cfg.dt, particles: particles.clone() });
        }
        if done {
            snapshots.push(Snapshot { t: cfg.t_final, particles });
            break;
        }
    }
    if steps == 0 {
        // t_final = 0: the initial snapshot is also the final one.
        snapshots.push(snapshots[0].clone());
        if let Some(s) = snapshots.last_mut() {
            s.t = cfg.t_final;
        }
    }
    Ok(snapshots)
}

/// Integral of psi against the ensemble's density: sum of w f0 psi(x, v).
/// Chunked fixed-order summation, so the result does not depend on thread
/// scheduling.
pub fn observable<F>(particles: &[Particle], psi: F) -> f64
where
    F: Fn(Vec3, Vec3) -> f64 + Sync,
{
    let partials: Vec<f64> = particles
        .par_chunks(4096)
        .map(|chunk| chunk.iter().map(|p| p.w * p.f0_value * psi(p.x, p.v)).sum())
        .collect();
    partials.iter().sum()
}

/// Closed-form velocity of a particle under the unit-amplitude resonant
/// drive E(t) = r(e2, -t/eps) plus the strong field:
///
///   V(t) = r(v0, -t/eps) + t r(e2, -t/eps).
///
/// In the co-rotating frame the drive is the constant e2, so the energy
/// grows without bound: |V(t)|^2 = |v0|^2 + 2 t (v0.e2) + t^2 exactly.
pub fn resonance_reference(v0: Vec3, t: f64, epsilon: f64) -> Vec3 {
    rotate(v0 + Vec3::E2 * t, -t / epsilon)
}

/// Convenience: one particle pushed through the full horizon, sampled every
/// `save_every` steps (plus the final step).
pub fn single_trajectory(
    spec: &FieldSpec,
    cfg: &EnsembleConfig,
    x0: Vec3,
    v0: Vec3,
) -> Result<Vec<(f64, Vec3, Vec3)>> {
    cfg.validate()?;
    let mut p = Particle { x: x0, v: v0, w: 1.0, f0_value: 1.0 };
    let steps = cfg.steps();
    let mut out = vec![(0.0, p.x, p.v)];
    for m in 0..steps {
        push(spec, cfg, &mut p, m as f64 * cfg.dt);
        let done = m + 1 == steps;
        if (m + 1) % cfg.save_every == 0 || done {
            out.push(((m + 1) as f64 * cfg.dt, p.x, p.v));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{drift_l, YPoint};

    fn resonant() -> FieldSpec {
        FieldSpec::CircularResonant { amplitude: 1.0 }
    }

    fn cfg(epsilon: f64, dt: f64, t_final: f64) -> EnsembleConfig {
        EnsembleConfig {
            epsilon,
            dt,
            t_final,
            sampling: Sampling::MonteCarlo { count: 1 },
            strong_field: true,
            save_every: usize::MAX,
        }
    }

    #[test]
    fn pusher_reproduces_the_resonant_closed_form() {
        let eps = 1e-2;
        let c = cfg(eps, eps / 16.0, 2.0);
        let spec = resonant();
        let v0 = Vec3::new(0.4, -1.0, 0.3);
        let traj = single_trajectory(&spec, &c, Vec3::ZERO, v0).unwrap();
        let (t_end, _, v_end) = *traj.last().unwrap();
        let reference = resonance_reference(v0, t_end, eps);
        let err = (v_end - reference).norm();
        assert!(err < 1e-9, "velocity error {err} after {} steps", c.steps());
    }

    #[test]
    fn pusher_is_second_order_off_resonance() {
        // Constant E = a e2 with the strong field: the exact solution is the
        // E x B drift plus a shifted gyration,
        //   V(t) = r(v0 + a eps e3, -t/eps) - a eps e3.
        let eps = 0.05;
        let a = 1.3;
        let spec = FieldSpec::uniform_e(Vec3::E2 * a);
        let v0 = Vec3::new(0.2, 0.7, -0.4);
        let t_final = 1.0;
        let exact = rotate(v0 + Vec3::E3 * (a * eps), -t_final / eps) - Vec3::E3 * (a * eps);
        let err_at = |div: f64| -> f64 {
            let c = cfg(eps, eps / div, t_final);
            let traj = single_trajectory(&spec, &c, Vec3::ZERO, v0).unwrap();
            (traj.last().unwrap().2 - exact).norm()
        };
        let e8 = err_at(8.0);
        let e16 = err_at(16.0);
        let e32 = err_at(32.0);
        let r1 = e8 / e16;
        let r2 = e16 / e32;
        assert!((3.0..5.5).contains(&r1), "first halving ratio {r1} ({e8} -> {e16})");
        assert!((3.0..5.5).contains(&r2), "second halving ratio {r2} ({e16} -> {e32})");
    }

    #[test]
    fn gyro_frame_velocity_follows_the_drift_integral() {
        // The co-rotating velocity u(t) = r(V(t), t/eps) of a resonant
        // particle must track v0 + L(0, t), tying the pusher, the rotation
        // convention, and the drift primitive to one sign chain.
        let eps = 5e-3;
        let spec = resonant();
        let c = cfg(eps, eps / 16.0, 1.5);
        let v0 = Vec3::new(-0.3, 0.8, 0.5);
        let traj = single_trajectory(&spec, &c, Vec3::ZERO, v0).unwrap();
        let (t_end, _, v_end) = *traj.last().unwrap();
        let u = rotate(v_end, t_end / eps);
        let expected = v0 + drift_l(&spec, 0.0, t_end, YPoint::of(Vec3::ZERO, v0));
        assert!((u - expected).norm() < 1e-9);
    }

    #[test]
    fn reference_energy_identity() {
        let v0 = Vec3::new(0.3, -0.9, 0.6);
        for &t in &[0.0, 0.4, 1.7, 3.0] {
            let v = resonance_reference(v0, t, 1e-2);
            let expect = v0.dot(v0) + 2.0 * t * v0.c2 + t * t;
            assert!((v.dot(v) - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn free_streaming_without_fields() {
        let spec = FieldSpec::uniform_e(Vec3::ZERO);
        let mut c = cfg(1.0, 0.1, 1.0);
        c.strong_field = false;
        let x0 = Vec3::new(1.0, -2.0, 0.5);
        let v0 = Vec3::new(0.3, 0.7, -0.2);
        let traj = single_trajectory(&spec, &c, x0, v0).unwrap();
        let (_, x_end, v_end) = *traj.last().unwrap();
        assert!((x_end - (x0 + v0)).norm() < 1e-13);
        assert!((v_end - v0).norm() == 0.0);
    }

    #[test]
    fn kick_conserves_speed_in_a_pure_magnetic_field() {
        let b = Vec3::new(0.4, -0.2, 0.9);
        let spec = FieldSpec::General {
            e: std::sync::Arc::new(|_, _, _| Vec3::ZERO),
            b: std::sync::Arc::new(move |_, _, _| b),
        };
        let mut c = cfg(1.0, 0.02, 2.0);
        c.strong_field = false;
        let v0 = Vec3::new(1.0, 0.5, -0.3);
        let traj = single_trajectory(&spec, &c, Vec3::ZERO, v0).unwrap();
        for &(_, _, v) in &traj {
            assert!((v.norm() - v0.norm()).abs() < 1e-12);
        }
    }

    #[test]
    fn kick_rotation_rate_matches_the_field() {
        // B'' = b e1 alone spins the velocity by -b t about e1.
        let b = 0.7;
        let spec = FieldSpec::General {
            e: std::sync::Arc::new(|_, _, _| Vec3::ZERO),
            b: std::sync::Arc::new(move |_, _, _| Vec3::E1 * b),
        };
        let mut c = cfg(1.0, 1e-3, 1.0);
        c.strong_field = false;
        let v0 = Vec3::new(0.0, 1.0, 0.0);
        let traj = single_trajectory(&spec, &c, Vec3::ZERO, v0).unwrap();
        let v_end = traj.last().unwrap().2;
        let exact = rotate(v0, -b);
        assert!((v_end - exact).norm() < 1e-5);
    }

    #[test]
    fn gauss_hermite_markers_integrate_gaussian_moments_exactly() {
        let data = InitialData::GaussianProduct {
            center_x: Vec3::new(0.3, -0.2, 0.1),
            width_x: 1.2,
            width_vpar: 0.9,
            width_vperp: 0.5,
            amplitude: 0.7,
        };
        let parts = sample_particles(&data, &Sampling::GaussHermite { dims: [3, 3, 3, 3, 3, 3] }, 0)
            .unwrap();
        assert_eq!(parts.len(), 729);
        let mass_exact = 0.7
            * (2.0 * std::f64::consts::PI).powi(3)
            * 1.2f64.powi(3)
            * 0.9
            * 0.5f64.powi(2);
        let mass = observable(&parts, |_, _| 1.0);
        assert!((mass - mass_exact).abs() < 1e-12 * mass_exact);
        let second = observable(&parts, |_, v| v.c2 * v.c2) / mass;
        assert!((second - 0.25).abs() < 1e-12);
        let centered = observable(&parts, |x, _| x.c1) / mass;
        assert!((centered - 0.3).abs() < 1e-12);
    }

    #[test]
    fn monte_carlo_markers_are_seeded_and_consistent() {
        let data = InitialData::gaussian(Vec3::ZERO, 1.0, 1.0, 1.0);
        let a = sample_particles(&data, &Sampling::MonteCarlo { count: 4000 }, 11).unwrap();
        let b = sample_particles(&data, &Sampling::MonteCarlo { count: 4000 }, 11).unwrap();
        assert_eq!(a, b);
        let c = sample_particles(&data, &Sampling::MonteCarlo { count: 4000 }, 12).unwrap();
        assert!(a[0] != c[0]);
        // Mass is exact by construction of the weights; a smooth moment is
        // only statistically close.
        let mass_exact = (2.0 * std::f64::consts::PI).powi(3);
        let mass = observable(&a, |_, _| 1.0);
        assert!((mass - mass_exact).abs() < 1e-10 * mass_exact);
        let second = observable(&a, |_, v| v.c2 * v.c2) / mass;
        assert!((second - 1.0).abs() < 0.1, "second moment {second}");
    }

    #[test]
    fn config_validation_rejects_bad_setups() {
        let good = EnsembleConfig {
            epsilon: 0.1,
            dt: 0.0125,
            t_final: 1.0,
            sampling: Sampling::MonteCarlo { count: 10 },
            strong_field: true,
            save_every: usize::MAX,
        };
        assert!(good.validate().is_ok());
        let mut coarse = good;
        coarse.dt = 0.02; // above epsilon/8
        assert!(coarse.validate().is_err());
        let mut ragged = good;
        ragged.t_final = 1.003;
        assert!(ragged.validate().is_err());
        let mut zero_dim = good;
        zero_dim.sampling = Sampling::GaussHermite { dims: [2, 2, 0, 2, 2, 2] };
        assert!(zero_dim.validate().is_err());
        let data = InitialData::Custom {
            f0: std::sync::Arc::new(|_, _| 1.0),
            spectrum: None,
        };
        assert!(sample_particles(&data, &Sampling::MonteCarlo { count: 10 }, 0).is_err());
    }

    #[test]
    fn ensemble_snapshots_bracket_the_run() {
        let data = InitialData::gaussian(Vec3::ZERO, 1.0, 1.0, 1.0);
        let c = EnsembleConfig {
            epsilon: 0.1,
            dt: 0.0125,
            t_final: 0.1,
            sampling: Sampling::GaussHermite { dims: [2, 2, 2, 2, 2, 2] },
            strong_field: true,
            save_every: 4,
        };
        let snaps = simulate_ensemble(&resonant(), &data, &c, 0).unwrap();
        assert_eq!(snaps.first().unwrap().t, 0.0);
        assert_eq!(snaps.last().unwrap().t, 0.1);
        assert_eq!(snaps.len(), 3);
        // Mass is conserved identically: weights and carried densities never
        // change, only positions do.
        let m0 = observable(&snaps[0].particles, |_, _| 1.0);
        let m1 = observable(&snaps.last().unwrap().particles, |_, _| 1.0);
        assert_eq!(m0, m1);
    }
}
