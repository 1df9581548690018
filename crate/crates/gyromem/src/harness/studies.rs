//! Scenario runners behind the command-line interface.
//!
//! Each runner takes a JSON-described configuration, writes CSV tables and a
//! `summary.json` into the output directory, and returns the summary path.
//! Outputs are byte-reproducible for a fixed config and seed.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::effective::{
    exact_fourier_solution, mode_grid, solve_memory_equation, MemoryOptions,
};
use crate::fields::{FieldSpec, InitialData, YPoint};
use crate::harness::report::{create_file, fmt_f, write_row, write_summary};
use crate::harness::scaling::{scaling_groups, PhysicalScales, ScalingGroups};
use crate::kernel::{ktilde_grid, volterra_residual, KMode, KernelRoute, ResidualReport};
use crate::math::Vec3;
use crate::two_scale::{limit_g, limit_g_ode, profile_f, weak_star_f};
use crate::vlasov::{
    observable, resonance_reference, simulate_ensemble, single_trajectory, EnsembleConfig,
    Sampling,
};
use crate::{Error, Result};

fn vec3(a: [f64; 3]) -> Vec3 {
    Vec3::new(a[0], a[1], a[2])
}

/// Picks the closed kernel construction a field family admits.
fn closed_route(spec: &FieldSpec) -> Option<KernelRoute> {
    match spec {
        FieldSpec::CircularResonant { .. } | FieldSpec::TimeIndependent { .. } => {
            Some(KernelRoute::ExplicitTimeIndependent)
        }
        FieldSpec::Separable { .. } => Some(KernelRoute::ExplicitSeparable),
        FieldSpec::General { .. } => None,
    }
}

// ---------------------------------------------------------------------------
// kernel-validate

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelValidateConfig {
    pub field: FieldSpec,
    pub y: YPoint,
    pub mode: KMode,
    /// Kernel rows Ktilde(., t) to examine.
    pub rows: Vec<f64>,
    /// Interval counts for the numerical construction, coarse to fine.
    pub intervals: Vec<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct KernelRowSummary {
    pub t: f64,
    pub intervals: Vec<usize>,
    /// Max |numeric - closed| per interval count; absent without a closed form.
    pub max_error: Option<Vec<f64>>,
    /// Error ratios between consecutive interval counts.
    pub error_ratios: Option<Vec<f64>>,
    /// Defining-equation residual of the finest numeric row.
    pub residual: ResidualReport,
}

#[derive(Debug, Clone, Serialize)]
pub struct KernelValidateSummary {
    pub study: &'static str,
    pub closed_route: Option<&'static str>,
    pub rows: Vec<KernelRowSummary>,
}

pub fn run_kernel_validate(
    cfg: &KernelValidateConfig,
    out: &Path,
    _seed: u64,
) -> Result<PathBuf> {
    cfg.mode.validate()?;
    if cfg.rows.is_empty() || cfg.intervals.is_empty() {
        return Err(Error::Config("kernel validation needs rows and intervals".into()));
    }
    let closed = closed_route(&cfg.field);
    let mut rows = Vec::new();
    for (r, &t) in cfg.rows.iter().enumerate() {
        let mut errors = Vec::new();
        let mut finest = None;
        for &n in &cfg.intervals {
            let numeric =
                ktilde_grid(&cfg.field, t, n, cfg.y, &cfg.mode, KernelRoute::VolterraNumeric)?;
            let mut f = create_file(out, &format!("kernel_numeric_row{r}_n{n}.csv"))?;
            numeric.write_csv(&mut f)?;
            if let Some(route) = closed {
                let reference = ktilde_grid(&cfg.field, t, n, cfg.y, &cfg.mode, route)?;
                let mut f = create_file(out, &format!("kernel_closed_row{r}_n{n}.csv"))?;
                reference.write_csv(&mut f)?;
                let err = numeric
                    .values
                    .iter()
                    .zip(&reference.values)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0f64, f64::max);
                errors.push(err);
            }
            finest = Some(numeric);
        }
        let residual = volterra_residual(&cfg.field, finest.as_ref().unwrap())?;
        let ratios = if errors.len() > 1 {
            Some(errors.windows(2).map(|w| w[0] / w[1]).collect())
        } else {
            None
        };
        rows.push(KernelRowSummary {
            t,
            intervals: cfg.intervals.clone(),
            max_error: closed.map(|_| errors.clone()),
            error_ratios: if closed.is_some() { ratios } else { None },
            residual,
        });
    }
    write_summary(
        out,
        &KernelValidateSummary {
            study: "kernel-validate",
            closed_route: closed.map(|r| r.as_str()),
            rows,
        },
    )
}

// ---------------------------------------------------------------------------
// effective

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EffectiveConfig {
    pub field: FieldSpec,
    pub initial: InitialData,
    pub y: YPoint,
    /// Mode grid half-extents per axis; default 8 / width per axis.
    #[serde(default)]
    pub kmax: Option<[f64; 3]>,
    #[serde(default = "default_points_per_axis")]
    pub points_per_axis: usize,
    pub dt: f64,
    pub t_final: f64,
    pub route: KernelRoute,
    #[serde(default = "default_save_every")]
    pub save_every: usize,
    /// How many modes the trajectory table keeps (strided, full grid order).
    #[serde(default = "default_csv_modes")]
    pub csv_modes: usize,
}

fn default_points_per_axis() -> usize {
    16
}

fn default_save_every() -> usize {
    8
}

fn default_csv_modes() -> usize {
    64
}

#[derive(Debug, Clone, Serialize)]
pub struct EffectiveSummary {
    pub study: &'static str,
    pub route: &'static str,
    pub mode_count: usize,
    pub dt: f64,
    pub t_final: f64,
    /// Max over modes of max over time of |memory - closed| / |initial|,
    /// with the initial amplitude floored at 1e-12 of its grid maximum.
    pub max_rel_error: f64,
    pub worst_mode: [f64; 3],
    /// Max absolute deviation, unnormalized.
    pub max_abs_error: f64,
}

fn effective_kmax(cfg: &EffectiveConfig) -> Result<[f64; 3]> {
    if let Some(k) = cfg.kmax {
        if k.iter().any(|&v| !(v.is_finite() && v > 0.0)) {
            return Err(Error::Config(format!("kmax must be positive, got {k:?}")));
        }
        return Ok(k);
    }
    match &cfg.initial {
        InitialData::GaussianProduct { width_x, width_vperp, .. } => {
            Ok([8.0 / width_x, 8.0 / width_vperp, 8.0 / width_vperp])
        }
        InitialData::Custom { .. } => {
            Err(Error::Usage("custom initial data needs explicit mode grid bounds".into()))
        }
    }
}

pub fn run_effective(cfg: &EffectiveConfig, out: &Path, _seed: u64) -> Result<PathBuf> {
    cfg.initial.validate()?;
    if cfg.points_per_axis < 2 {
        return Err(Error::Config("mode grid needs at least 2 points per axis".into()));
    }
    let kmax = effective_kmax(cfg)?;
    let n = cfg.points_per_axis;
    let modes = mode_grid(kmax, [n, n, n], cfg.y);
    let opt = MemoryOptions {
        dt: cfg.dt,
        t_final: cfg.t_final,
        route: cfg.route,
        save_every: cfg.save_every,
    };
    let states = solve_memory_equation(&cfg.field, &cfg.initial, &modes, &opt)?;

    let initial_amp: Vec<f64> = states[0].values.iter().map(|v| v.norm()).collect();
    let amp_floor = 1e-12 * initial_amp.iter().copied().fold(0.0f64, f64::max);

    let mut max_rel = 0.0f64;
    let mut max_abs = 0.0f64;
    let mut worst = [0.0f64; 3];
    let mut exacts: Vec<Vec<num_complex::Complex64>> = Vec::with_capacity(states.len());
    for state in &states {
        let row = modes
            .iter()
            .map(|(mode, y)| exact_fourier_solution(&cfg.field, &cfg.initial, mode, *y, state.t))
            .collect::<Result<Vec<_>>>()?;
        for (i, (num, ex)) in state.values.iter().zip(&row).enumerate() {
            let abs = (num - ex).norm();
            let rel = abs / initial_amp[i].max(amp_floor);
            if rel > max_rel {
                max_rel = rel;
                let k = modes[i].0.cartesian();
                worst = [k.c1, k.c2, k.c3];
            }
            max_abs = max_abs.max(abs);
        }
        exacts.push(row);
    }

    let stride = (modes.len() + cfg.csv_modes.max(1) - 1) / cfg.csv_modes.max(1);
    let mut f = create_file(out, "trajectory.csv")?;
    write_row(
        &mut f,
        &["t", "k1", "k2", "k3", "re", "im", "re_closed", "im_closed"]
            .map(String::from)
            .to_vec(),
    )?;
    for (state, exact_row) in states.iter().zip(&exacts) {
        for i in (0..modes.len()).step_by(stride.max(1)) {
            let k = modes[i].0.cartesian();
            let num = state.values[i];
            let ex = exact_row[i];
            write_row(
                &mut f,
                &[
                    fmt_f(state.t),
                    fmt_f(k.c1),
                    fmt_f(k.c2),
                    fmt_f(k.c3),
                    fmt_f(num.re),
                    fmt_f(num.im),
                    fmt_f(ex.re),
                    fmt_f(ex.im),
                ],
            )?;
        }
    }
    drop(f);

    write_summary(
        out,
        &EffectiveSummary {
            study: "effective",
            route: cfg.route.as_str(),
            mode_count: modes.len(),
            dt: cfg.dt,
            t_final: cfg.t_final,
            max_rel_error: max_rel,
            worst_mode: worst,
            max_abs_error: max_abs,
        },
    )
}

// ---------------------------------------------------------------------------
// twoscale

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseAxis {
    X1,
    X2,
    X3,
    V1,
    V2,
    V3,
}

impl PhaseAxis {
    fn apply(self, x: Vec3, v: Vec3, delta: f64) -> (Vec3, Vec3) {
        let mut x = x;
        let mut v = v;
        match self {
            PhaseAxis::X1 => x.c1 += delta,
            PhaseAxis::X2 => x.c2 += delta,
            PhaseAxis::X3 => x.c3 += delta,
            PhaseAxis::V1 => v.c1 += delta,
            PhaseAxis::V2 => v.c2 += delta,
            PhaseAxis::V3 => v.c3 += delta,
        }
        (x, v)
    }

    fn label(self) -> &'static str {
        match self {
            PhaseAxis::X1 => "x1",
            PhaseAxis::X2 => "x2",
            PhaseAxis::X3 => "x3",
            PhaseAxis::V1 => "v1",
            PhaseAxis::V2 => "v2",
            PhaseAxis::V3 => "v3",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwoScaleConfig {
    pub field: FieldSpec,
    pub initial: InitialData,
    /// Slow time of the evaluation.
    pub t: f64,
    /// Gyrophase of the profile column.
    #[serde(default)]
    pub tau: f64,
    #[serde(default = "default_tau_nodes")]
    pub tau_nodes: usize,
    pub base_x: [f64; 3],
    pub base_v: [f64; 3],
    /// Phase-space axis the table scans.
    pub axis: PhaseAxis,
    pub half_width: f64,
    #[serde(default = "default_scan_count")]
    pub count: usize,
    /// Every this-many-th point also gets the Runge-Kutta cross-check.
    #[serde(default = "default_ode_every")]
    pub ode_check_every: usize,
    #[serde(default = "default_ode_steps")]
    pub ode_steps: usize,
}

fn default_tau_nodes() -> usize {
    64
}

fn default_scan_count() -> usize {
    41
}

fn default_ode_every() -> usize {
    8
}

fn default_ode_steps() -> usize {
    400
}

#[derive(Debug, Clone, Serialize)]
pub struct TwoScaleSummary {
    pub study: &'static str,
    pub t: f64,
    pub tau: f64,
    pub axis: &'static str,
    pub count: usize,
    pub checked_points: usize,
    /// Max |closed - Runge-Kutta| over the checked points.
    pub max_ode_diff: f64,
}

pub fn run_twoscale(cfg: &TwoScaleConfig, out: &Path, _seed: u64) -> Result<PathBuf> {
    cfg.initial.validate()?;
    if cfg.count < 2 {
        return Err(Error::Config("scan needs at least 2 points".into()));
    }
    if !(cfg.half_width.is_finite() && cfg.half_width > 0.0) {
        return Err(Error::Config(format!("half_width must be positive, got {}", cfg.half_width)));
    }
    if cfg.ode_check_every == 0 {
        return Err(Error::Config("ode_check_every must be at least 1".into()));
    }
    let base_x = vec3(cfg.base_x);
    let base_v = vec3(cfg.base_v);
    let mut f = create_file(out, "twoscale.csv")?;
    write_row(&mut f, &["coord", "weak_star", "profile"].map(String::from).to_vec())?;
    let mut max_diff = 0.0f64;
    let mut checked = 0usize;
    for i in 0..cfg.count {
        let delta = -cfg.half_width
            + 2.0 * cfg.half_width * i as f64 / (cfg.count - 1) as f64;
        let (x, v) = cfg.axis.apply(base_x, base_v, delta);
        let weak = weak_star_f(&cfg.field, &cfg.initial, cfg.t, x, v, cfg.tau_nodes)?;
        let prof = profile_f(&cfg.field, &cfg.initial, cfg.t, cfg.tau, x, v);
        write_row(&mut f, &[fmt_f(delta), fmt_f(weak), fmt_f(prof)])?;
        if i % cfg.ode_check_every == 0 {
            let u = crate::math::rotate(v, cfg.tau);
            let closed = limit_g(&cfg.field, &cfg.initial, cfg.t, x, u);
            let ode = limit_g_ode(&cfg.field, &cfg.initial, cfg.t, x, u, cfg.ode_steps)?;
            max_diff = max_diff.max((closed - ode).abs());
            checked += 1;
        }
    }
    drop(f);
    write_summary(
        out,
        &TwoScaleSummary {
            study: "twoscale",
            t: cfg.t,
            tau: cfg.tau,
            axis: cfg.axis.label(),
            count: cfg.count,
            checked_points: checked,
            max_ode_diff: max_diff,
        },
    )
}

// ---------------------------------------------------------------------------
// epsilon-sweep

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub field: FieldSpec,
    pub initial: InitialData,
    /// Scale parameters, strictly decreasing.
    pub epsilons: Vec<f64>,
    /// Step as a fraction of epsilon; at most 1/8.
    #[serde(default = "default_dt_fraction")]
    pub dt_over_epsilon: f64,
    pub t_final: f64,
    /// Gauss-Hermite points per axis: [x1, x2, x3, v1, v2, v3].
    pub gh_dims: [usize; 6],
    /// Width of the transverse bump the observable integrates against.
    pub observable_width: f64,
    /// Transverse center of the bump; defaults to the initial data's center.
    #[serde(default)]
    pub observable_center: Option<[f64; 2]>,
}

fn default_dt_fraction() -> f64 {
    1.0 / 16.0
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepSummary {
    pub study: &'static str,
    pub t_final: f64,
    pub dt_over_epsilon: f64,
    pub marker_count: usize,
    pub epsilons: Vec<f64>,
    pub gaps: Vec<f64>,
    /// gap[i] / gap[i+1]; above 1 means refinement helped.
    pub gap_ratios: Vec<f64>,
    pub monotone_decreasing: bool,
}

/// Transverse observable psi(x) = exp(-|xperp - c|^2 / (2 width^2)).
///
/// The limit dynamics freezes the transverse position, so the limit side of
/// the comparison is the t = 0 value of the same functional; no limit-model
/// quadrature enters and grid error cancels in the gap.
fn sweep_observable(cfg: &SweepConfig) -> Result<(f64, f64, f64)> {
    let center = match (cfg.observable_center, &cfg.initial) {
        (Some(c), _) => c,
        (None, InitialData::GaussianProduct { center_x, .. }) => [center_x.c2, center_x.c3],
        (None, InitialData::Custom { .. }) => {
            return Err(Error::Usage("custom initial data needs an explicit observable center".into()))
        }
    };
    if !(cfg.observable_width.is_finite() && cfg.observable_width > 0.0) {
        return Err(Error::Config(format!(
            "observable width must be positive, got {}",
            cfg.observable_width
        )));
    }
    Ok((center[0], center[1], cfg.observable_width))
}

pub fn run_epsilon_sweep(cfg: &SweepConfig, out: &Path, seed: u64) -> Result<PathBuf> {
    cfg.initial.validate()?;
    if cfg.epsilons.is_empty() {
        return Err(Error::Config("sweep needs at least one epsilon".into()));
    }
    if cfg.epsilons.windows(2).any(|w| w[1] >= w[0]) || cfg.epsilons.iter().any(|&e| e <= 0.0) {
        return Err(Error::Config("epsilons must be positive and strictly decreasing".into()));
    }
    if !(cfg.dt_over_epsilon > 0.0 && cfg.dt_over_epsilon <= 1.0 / 8.0) {
        return Err(Error::Config(format!(
            "dt_over_epsilon must lie in (0, 1/8], got {}",
            cfg.dt_over_epsilon
        )));
    }
    let (c2, c3, width) = sweep_observable(cfg)?;
    let psi = move |x: Vec3, _v: Vec3| -> f64 {
        let d2 = x.c2 - c2;
        let d3 = x.c3 - c3;
        (-(d2 * d2 + d3 * d3) / (2.0 * width * width)).exp()
    };

    let mut f = create_file(out, "sweep.csv")?;
    write_row(
        &mut f,
        &["epsilon", "dt", "observable_limit", "observable_final", "gap", "ratio_vs_prev"]
            .map(String::from)
            .to_vec(),
    )?;
    let mut gaps = Vec::new();
    let mut marker_count = 0usize;
    for (i, &eps) in cfg.epsilons.iter().enumerate() {
        let run_cfg = EnsembleConfig {
            epsilon: eps,
            dt: eps * cfg.dt_over_epsilon,
            t_final: cfg.t_final,
            sampling: Sampling::GaussHermite { dims: cfg.gh_dims },
            strong_field: true,
            save_every: usize::MAX,
        };
        let snaps = simulate_ensemble(&cfg.field, &cfg.initial, &run_cfg, seed)?;
        let limit = observable(&snaps.first().unwrap().particles, psi);
        let finite = observable(&snaps.last().unwrap().particles, psi);
        marker_count = snaps.last().unwrap().particles.len();
        let gap = (finite - limit).abs();
        let ratio = if i > 0 { fmt_f(gaps[i - 1] / gap) } else { String::new() };
        write_row(
            &mut f,
            &[fmt_f(eps), fmt_f(run_cfg.dt), fmt_f(limit), fmt_f(finite), fmt_f(gap), ratio],
        )?;
        gaps.push(gap);
    }
    drop(f);

    let ratios: Vec<f64> = gaps.windows(2).map(|w| w[0] / w[1]).collect();
    let monotone = gaps.windows(2).all(|w| w[1] < w[0]);
    write_summary(
        out,
        &SweepSummary {
            study: "epsilon-sweep",
            t_final: cfg.t_final,
            dt_over_epsilon: cfg.dt_over_epsilon,
            marker_count,
            epsilons: cfg.epsilons.clone(),
            gaps,
            gap_ratios: ratios,
            monotone_decreasing: monotone,
        },
    )
}

// ---------------------------------------------------------------------------
// resonance

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResonanceConfig {
    pub epsilon: f64,
    #[serde(default = "default_dt_fraction")]
    pub dt_over_epsilon: f64,
    pub t_final: f64,
    pub v0: [f64; 3],
    #[serde(default)]
    pub x0: Option<[f64; 3]>,
    /// Target number of CSV rows; the trajectory is thinned to roughly this.
    #[serde(default = "default_save_rows")]
    pub save_rows: usize,
}

fn default_save_rows() -> usize {
    400
}

#[derive(Debug, Clone, Serialize)]
pub struct ResonanceSummary {
    pub study: &'static str,
    pub epsilon: f64,
    pub dt: f64,
    pub t_final: f64,
    pub steps: usize,
    /// Max |V - reference| over the sampled trajectory.
    pub max_reference_error: f64,
    /// Max ||V|^2 - (|v0|^2 + 2 t v0.e2 + t^2)| over the samples.
    pub max_energy_deviation: f64,
}

/// Unit-amplitude resonant drive: the one scenario with a closed trajectory
/// at every epsilon, so the field is fixed rather than configurable.
pub fn run_resonance(cfg: &ResonanceConfig, out: &Path, _seed: u64) -> Result<PathBuf> {
    if !(cfg.epsilon.is_finite() && cfg.epsilon > 0.0) {
        return Err(Error::Config(format!("epsilon must be positive, got {}", cfg.epsilon)));
    }
    if !(cfg.dt_over_epsilon > 0.0 && cfg.dt_over_epsilon <= 1.0 / 8.0) {
        return Err(Error::Config(format!(
            "dt_over_epsilon must lie in (0, 1/8], got {}",
            cfg.dt_over_epsilon
        )));
    }
    if cfg.save_rows == 0 {
        return Err(Error::Config("save_rows must be at least 1".into()));
    }
    let spec = FieldSpec::CircularResonant { amplitude: 1.0 };
    let v0 = vec3(cfg.v0);
    let x0 = vec3(cfg.x0.unwrap_or([0.0; 3]));
    let dt = cfg.epsilon * cfg.dt_over_epsilon;
    let steps = (cfg.t_final / dt).round() as usize;
    let run_cfg = EnsembleConfig {
        epsilon: cfg.epsilon,
        dt,
        t_final: cfg.t_final,
        sampling: Sampling::MonteCarlo { count: 1 },
        strong_field: true,
        save_every: (steps / cfg.save_rows).max(1),
    };
    let traj = single_trajectory(&spec, &run_cfg, x0, v0)?;

    let mut f = create_file(out, "resonance.csv")?;
    write_row(
        &mut f,
        &["t", "v1", "v2", "v3", "speed_sq", "energy_expected", "reference_error"]
            .map(String::from)
            .to_vec(),
    )?;
    let mut max_err = 0.0f64;
    let mut max_energy = 0.0f64;
    for &(t, _, v) in &traj {
        let reference = resonance_reference(v0, t, cfg.epsilon);
        let err = (v - reference).norm();
        let speed_sq = v.dot(v);
        let expected = v0.dot(v0) + 2.0 * t * v0.c2 + t * t;
        max_err = max_err.max(err);
        max_energy = max_energy.max((speed_sq - expected).abs());
        write_row(
            &mut f,
            &[
                fmt_f(t),
                fmt_f(v.c1),
                fmt_f(v.c2),
                fmt_f(v.c3),
                fmt_f(speed_sq),
                fmt_f(expected),
                fmt_f(err),
            ],
        )?;
    }
    drop(f);

    write_summary(
        out,
        &ResonanceSummary {
            study: "resonance",
            epsilon: cfg.epsilon,
            dt,
            t_final: cfg.t_final,
            steps: run_cfg.steps(),
            max_reference_error: max_err,
            max_energy_deviation: max_energy,
        },
    )
}

// ---------------------------------------------------------------------------
// scaling

#[derive(Debug, Clone, Serialize)]
pub struct ScalingSummary {
    pub study: &'static str,
    pub scales: PhysicalScales,
    pub groups: ScalingGroups,
}

pub fn run_scaling(scales: &PhysicalScales, out: &Path, _seed: u64) -> Result<PathBuf> {
    let groups = scaling_groups(scales)?;
    write_summary(out, &ScalingSummary { study: "scaling", scales: *scales, groups })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{Envelope, GyroProfile};

    fn tdir() -> tempfile::TempDir {
        tempfile::tempdir().unwrap()
    }

    fn read(dir: &Path, name: &str) -> String {
        std::fs::read_to_string(dir.join(name)).unwrap()
    }

    #[test]
    fn kernel_validate_writes_grids_and_summary() {
        let cfg = KernelValidateConfig {
            field: FieldSpec::Separable {
                envelope: Envelope::Affine { offset: 1.0, slope: 0.5 },
                profile: GyroProfile::Rotating { amplitude: 1.0, phase: 0.0 },
            },
            y: YPoint::ORIGIN,
            mode: KMode::new(0.4, 1.0, 0.0).unwrap(),
            rows: vec![1.0],
            intervals: vec![32, 64],
        };
        let dir = tdir();
        run_kernel_validate(&cfg, dir.path(), 0).unwrap();
        let summary: serde_json::Value =
            serde_json::from_str(&read(dir.path(), "summary.json")).unwrap();
        assert_eq!(summary["closed_route"], "explicit_separable");
        let errs = summary["rows"][0]["max_error"].as_array().unwrap();
        assert!(errs[1].as_f64().unwrap() < errs[0].as_f64().unwrap());
        let ratio = summary["rows"][0]["error_ratios"][0].as_f64().unwrap();
        assert!(ratio > 2.0, "convergence ratio {ratio}");
        assert!(summary["rows"][0]["residual"]["max_residual"].as_f64().unwrap() < 1e-4);
        let csv = read(dir.path(), "kernel_numeric_row0_n64.csv");
        assert!(csv.starts_with("s,t,"));
        assert_eq!(csv.lines().count(), 66);
    }

    #[test]
    fn effective_study_matches_closed_solution_on_a_small_grid() {
        let cfg = EffectiveConfig {
            field: FieldSpec::CircularResonant { amplitude: 1.0 },
            initial: InitialData::gaussian(Vec3::ZERO, 1.5, 1.5, 1.5),
            y: YPoint::new(0.2, 0.1, -0.1),
            kmax: None,
            points_per_axis: 4,
            dt: 1.0 / 64.0,
            t_final: 0.5,
            route: KernelRoute::ExplicitTimeIndependent,
            save_every: 8,
            csv_modes: 16,
        };
        let dir = tdir();
        run_effective(&cfg, dir.path(), 0).unwrap();
        let summary: serde_json::Value =
            serde_json::from_str(&read(dir.path(), "summary.json")).unwrap();
        assert_eq!(summary["mode_count"], 64);
        assert!(summary["max_rel_error"].as_f64().unwrap() < 1e-3);
        let csv = read(dir.path(), "trajectory.csv");
        assert!(csv.starts_with("t,k1,k2,k3,re,im,re_closed,im_closed"));
    }

    #[test]
    fn twoscale_study_cross_checks_the_closed_form() {
        let cfg = TwoScaleConfig {
            field: FieldSpec::CircularResonant { amplitude: 0.8 },
            initial: InitialData::gaussian(Vec3::new(0.1, 0.0, 0.0), 1.0, 1.0, 0.7),
            t: 1.0,
            tau: 0.5,
            tau_nodes: 32,
            base_x: [0.0, 0.0, 0.0],
            base_v: [0.1, 0.3, -0.2],
            axis: PhaseAxis::V2,
            half_width: 1.5,
            count: 17,
            ode_check_every: 4,
            ode_steps: 200,
        };
        let dir = tdir();
        run_twoscale(&cfg, dir.path(), 0).unwrap();
        let summary: serde_json::Value =
            serde_json::from_str(&read(dir.path(), "summary.json")).unwrap();
        assert_eq!(summary["checked_points"], 5);
        assert!(summary["max_ode_diff"].as_f64().unwrap() < 1e-8);
        assert_eq!(read(dir.path(), "twoscale.csv").lines().count(), 18);
    }

    #[test]
    fn sweep_study_reports_shrinking_gaps() {
        let cfg = SweepConfig {
            field: FieldSpec::CircularResonant { amplitude: 1.0 },
            initial: InitialData::GaussianProduct {
                center_x: Vec3::ZERO,
                width_x: 1.0,
                width_vpar: 1.0,
                width_vperp: 0.2,
                amplitude: 1.0,
            },
            epsilons: vec![0.1, 0.05],
            dt_over_epsilon: 1.0 / 8.0,
            t_final: 0.25,
            gh_dims: [1, 4, 4, 1, 4, 4],
            observable_width: 1.0,
            observable_center: None,
        };
        let dir = tdir();
        run_epsilon_sweep(&cfg, dir.path(), 0).unwrap();
        let summary: serde_json::Value =
            serde_json::from_str(&read(dir.path(), "summary.json")).unwrap();
        let gaps = summary["gaps"].as_array().unwrap();
        assert_eq!(gaps.len(), 2);
        assert!(gaps[1].as_f64().unwrap() < gaps[0].as_f64().unwrap());
        assert_eq!(summary["marker_count"], 256);
    }

    #[test]
    fn resonance_study_tracks_the_reference() {
        let cfg = ResonanceConfig {
            epsilon: 0.05,
            dt_over_epsilon: 1.0 / 16.0,
            t_final: 1.0,
            v0: [0.0, -1.0, 0.0],
            x0: None,
            save_rows: 50,
        };
        let dir = tdir();
        run_resonance(&cfg, dir.path(), 0).unwrap();
        let summary: serde_json::Value =
            serde_json::from_str(&read(dir.path(), "summary.json")).unwrap();
        assert!(summary["max_reference_error"].as_f64().unwrap() < 1e-9);
        assert!(summary["max_energy_deviation"].as_f64().unwrap() < 1e-9);
    }

    #[test]
    fn scaling_study_writes_groups() {
        let scales = PhysicalScales {
            b_bar: 1.0,
            m: 1.0e-5,
            q: 1.0,
            t_bar: 1.0e-2,
            l_bar: 10.0,
            v_bar: 1.0e3,
            e_bar: 1.0,
        };
        let dir = tdir();
        run_scaling(&scales, dir.path(), 0).unwrap();
        let summary: serde_json::Value =
            serde_json::from_str(&read(dir.path(), "summary.json")).unwrap();
        assert_eq!(summary["groups"]["regime_consistent"], true);
    }

    #[test]
    fn study_outputs_are_byte_reproducible() {
        let cfg = KernelValidateConfig {
            field: FieldSpec::CircularResonant { amplitude: 1.0 },
            y: YPoint::ORIGIN,
            mode: KMode::new(0.0, 1.0, 0.0).unwrap(),
            rows: vec![0.5],
            intervals: vec![16, 32],
        };
        let d1 = tdir();
        let d2 = tdir();
        run_kernel_validate(&cfg, d1.path(), 7).unwrap();
        run_kernel_validate(&cfg, d2.path(), 7).unwrap();
        for name in ["summary.json", "kernel_numeric_row0_n32.csv", "kernel_closed_row0_n16.csv"] {
            assert_eq!(read(d1.path(), name), read(d2.path(), name), "{name}");
        }
    }
}
