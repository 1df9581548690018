//! Dimensional analysis: from laboratory scales to the dimensionless groups
//! that decide whether the strong-field ordering applies.
//!
//! With reference magnitudes for field strength, particle mass and charge,
//! time, length, velocity, and electric field, three groups control the
//! scaled equations:
//!
//!   ratio_time   = (q Bbar / m) tbar      gyrofrequency per observation time,
//!   ratio_force  = Ebar / (vbar Bbar)     electric versus magnetic force,
//!   ratio_length = vbar / ((q Bbar / m) Lbar)   gyroradius per system size.
//!
//! The regime this crate models takes one small parameter for all three:
//! ratio_time ~ 1/eps with ratio_force and ratio_length both ~ eps. The
//! report states each group and checks the single-parameter collapse within
//! a factor of two.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Laboratory reference magnitudes, all in one coherent unit system.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicalScales {
    /// Magnetic field strength.
    pub b_bar: f64,
    /// Particle mass.
    pub m: f64,
    /// Particle charge.
    pub q: f64,
    /// Observation time.
    pub t_bar: f64,
    /// System length.
    pub l_bar: f64,
    /// Thermal velocity.
    pub v_bar: f64,
    /// Electric field strength.
    pub e_bar: f64,
}

impl PhysicalScales {
    pub fn validate(&self) -> Result<()> {
        let named = [
            ("b_bar", self.b_bar),
            ("m", self.m),
            ("q", self.q),
            ("t_bar", self.t_bar),
            ("l_bar", self.l_bar),
            ("v_bar", self.v_bar),
            ("e_bar", self.e_bar),
        ];
        for (name, value) in named {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::Config(format!(
                    "scale {name} must be positive and finite, got {value}"
                )));
            }
        }
        Ok(())
    }

    /// Gyrofrequency q Bbar / m.
    pub fn gyrofrequency(&self) -> f64 {
        self.q * self.b_bar / self.m
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ScalingGroups {
    pub ratio_time: f64,
    pub ratio_force: f64,
    pub ratio_length: f64,
    /// 1 / ratio_time: the small parameter the time group suggests.
    pub epsilon_estimate: f64,
    /// True when the field dominates (ratio_time > 1) and both other groups
    /// match epsilon_estimate within a factor of two.
    pub regime_consistent: bool,
    pub notes: Vec<String>,
}

fn within_factor(x: f64, target: f64, factor: f64) -> bool {
    x >= target / factor && x <= target * factor
}

pub fn scaling_groups(scales: &PhysicalScales) -> Result<ScalingGroups> {
    scales.validate()?;
    let omega = scales.gyrofrequency();
    let ratio_time = omega * scales.t_bar;
    let ratio_force = scales.e_bar / (scales.v_bar * scales.b_bar);
    let ratio_length = scales.v_bar / (omega * scales.l_bar);
    let epsilon_estimate = 1.0 / ratio_time;

    let mut notes = Vec::new();
    let strong = ratio_time > 1.0;
    notes.push(if strong {
        format!("gyration beats the observation time: ratio_time = {ratio_time}")
    } else {
        format!("field too weak for the ordering: ratio_time = {ratio_time} <= 1")
    });
    let force_ok = within_factor(ratio_force, epsilon_estimate, 2.0);
    notes.push(format!(
        "force group {} epsilon estimate {epsilon_estimate} (ratio_force = {ratio_force})",
        if force_ok { "matches" } else { "misses" }
    ));
    let length_ok = within_factor(ratio_length, epsilon_estimate, 2.0);
    notes.push(format!(
        "length group {} epsilon estimate {epsilon_estimate} (ratio_length = {ratio_length})",
        if length_ok { "matches" } else { "misses" }
    ));

    Ok(ScalingGroups {
        ratio_time,
        ratio_force,
        ratio_length,
        epsilon_estimate,
        regime_consistent: strong && force_ok && length_ok,
        notes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn consistent_scales() -> PhysicalScales {
        // Gyrofrequency 1e5, so epsilon_estimate = 1e-3 over t_bar = 1e-2;
        // velocity and field chosen to land both other groups on 1e-3.
        PhysicalScales {
            b_bar: 1.0,
            m: 1.0e-5,
            q: 1.0,
            t_bar: 1.0e-2,
            l_bar: 10.0,
            v_bar: 1.0e3,
            e_bar: 1.0,
        }
    }

    #[test]
    fn groups_compute_the_three_ratios() {
        let g = scaling_groups(&consistent_scales()).unwrap();
        assert!((g.ratio_time - 1.0e3).abs() < 1e-9);
        assert!((g.ratio_force - 1.0e-3).abs() < 1e-12);
        assert!((g.ratio_length - 1.0e-3).abs() < 1e-12);
        assert!(g.regime_consistent);
    }

    #[test]
    fn inconsistent_length_scale_is_flagged() {
        let mut scales = consistent_scales();
        scales.l_bar = 0.1; // gyroradius now 1e-1 of the system, not 1e-3
        let g = scaling_groups(&scales).unwrap();
        assert!((g.ratio_length - 0.1).abs() < 1e-12);
        assert!(!g.regime_consistent);
    }

    #[test]
    fn nonpositive_scales_are_rejected() {
        let mut scales = consistent_scales();
        scales.m = 0.0;
        assert!(scaling_groups(&scales).is_err());
        scales.m = f64::NAN;
        assert!(scaling_groups(&scales).is_err());
    }
}
