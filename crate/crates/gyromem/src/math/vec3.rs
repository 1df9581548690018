use std::iter::Sum;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use super::Angle;

/// Point of velocity space (or any 3-vector). `c1` is the coordinate along the
/// strong-field axis e1; `c2`, `c3` span the perpendicular plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct Vec3 {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3 { c1: 0.0, c2: 0.0, c3: 0.0 };
    pub const E1: Vec3 = Vec3 { c1: 1.0, c2: 0.0, c3: 0.0 };
    pub const E2: Vec3 = Vec3 { c1: 0.0, c2: 1.0, c3: 0.0 };
    pub const E3: Vec3 = Vec3 { c1: 0.0, c2: 0.0, c3: 1.0 };

    pub const fn new(c1: f64, c2: f64, c3: f64) -> Self {
        Vec3 { c1, c2, c3 }
    }

    pub fn dot(self, o: Vec3) -> f64 {
        self.c1 * o.c1 + self.c2 * o.c2 + self.c3 * o.c3
    }

    pub fn cross(self, o: Vec3) -> Vec3 {
        Vec3 {
            c1: self.c2 * o.c3 - self.c3 * o.c2,
            c2: self.c3 * o.c1 - self.c1 * o.c3,
            c3: self.c1 * o.c2 - self.c2 * o.c1,
        }
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    /// Norm of the component perpendicular to e1.
    pub fn perp_norm(self) -> f64 {
        self.c2.hypot(self.c3)
    }

    /// Projection onto the perpendicular plane.
    pub fn perp(self) -> Vec3 {
        Vec3 { c1: 0.0, ..self }
    }
}

/// Rotation of angle `tau` about e1. The perpendicular plane turns
/// counterclockwise when viewed with e2 to the right and e3 upward:
/// rotate(e2, pi/2) = e3. The parallel component is untouched.
pub fn rotate(v: Vec3, tau: Angle) -> Vec3 {
    let (s, c) = tau.sin_cos();
    Vec3 {
        c1: v.c1,
        c2: v.c2 * c - v.c3 * s,
        c3: v.c2 * s + v.c3 * c,
    }
}

impl From<[f64; 3]> for Vec3 {
    fn from(a: [f64; 3]) -> Self {
        Vec3::new(a[0], a[1], a[2])
    }
}

impl From<Vec3> for [f64; 3] {
    fn from(v: Vec3) -> Self {
        [v.c1, v.c2, v.c3]
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.c1 + o.c1, self.c2 + o.c2, self.c3 + o.c3)
    }
}

impl AddAssign for Vec3 {
    fn add_assign(&mut self, o: Vec3) {
        *self = *self + o;
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.c1 - o.c1, self.c2 - o.c2, self.c3 - o.c3)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.c1, -self.c2, -self.c3)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.c1 * s, self.c2 * s, self.c3 * s)
    }
}

impl Mul<Vec3> for f64 {
    type Output = Vec3;
    fn mul(self, v: Vec3) -> Vec3 {
        v * self
    }
}

impl Sum for Vec3 {
    fn sum<I: Iterator<Item = Vec3>>(iter: I) -> Vec3 {
        iter.fold(Vec3::ZERO, Add::add)
    }
}

#[cfg(test)]
mod tests {
    use std::f64::consts::{FRAC_PI_2, PI, TAU};

    use proptest::prelude::*;

    use super::*;

    #[test]
    fn rotation_orientation() {
        let r = rotate(Vec3::E2, FRAC_PI_2);
        assert!((r - Vec3::E3).norm() < 1e-15);
        let r = rotate(Vec3::E3, FRAC_PI_2);
        assert!((r + Vec3::E2).norm() < 1e-15);
    }

    #[test]
    fn rotation_fixed_points() {
        let v = Vec3::new(0.7, -1.2, 2.5);
        assert_eq!(rotate(v, 0.0), v);
        let r = rotate(Vec3::E1, 1.234);
        assert!((r - Vec3::E1).norm() == 0.0);
    }

    #[test]
    fn half_turn_negates_perp() {
        let v = Vec3::new(0.3, 1.0, -2.0);
        let r = rotate(v, PI);
        assert!((r - Vec3::new(0.3, -1.0, 2.0)).norm() < 1e-15);
    }

    #[test]
    fn cross_with_e1_matches_quarter_turn_generator() {
        // v x e1 = (0, v3, -v2), the generator of clockwise rotation, so the
        // free gyration dV/dt = (V x e1)/eps spins with angle -t/eps.
        let v = Vec3::new(0.4, 1.5, -0.8);
        let g = v.cross(Vec3::E1);
        assert_eq!(g, Vec3::new(0.0, -0.8, -1.5));
        // Derivative of rotate(v, -t) at t=0 equals v x e1.
        let h = 1e-6;
        let fd = (rotate(v, -h) - rotate(v, h)) * (0.5 / h);
        assert!((fd - g).norm() < 1e-9);
    }

    proptest! {
        #[test]
        fn rotation_is_additive(
            a in -10.0f64..10.0, b in -10.0f64..10.0,
            x in -5.0f64..5.0, y in -5.0f64..5.0, z in -5.0f64..5.0,
        ) {
            let v = Vec3::new(x, y, z);
            let lhs = rotate(rotate(v, a), b);
            let rhs = rotate(v, a + b);
            prop_assert!((lhs - rhs).norm() <= 1e-12 * (1.0 + v.norm()));
        }

        #[test]
        fn rotation_preserves_dot(
            a in -10.0f64..10.0,
            x in -5.0f64..5.0, y in -5.0f64..5.0, z in -5.0f64..5.0,
            u in -5.0f64..5.0, v in -5.0f64..5.0, w in -5.0f64..5.0,
        ) {
            let p = Vec3::new(x, y, z);
            let q = Vec3::new(u, v, w);
            let d0 = p.dot(q);
            let d1 = rotate(p, a).dot(rotate(q, a));
            prop_assert!((d0 - d1).abs() <= 1e-12 * (1.0 + d0.abs()));
        }

        #[test]
        fn full_turn_is_identity(
            x in -5.0f64..5.0, y in -5.0f64..5.0, z in -5.0f64..5.0,
        ) {
            let v = Vec3::new(x, y, z);
            prop_assert!((rotate(v, TAU) - v).norm() <= 1e-14 * (1.0 + v.norm()));
        }

        #[test]
        fn transpose_identity(
            a in -10.0f64..10.0,
            x in -5.0f64..5.0, y in -5.0f64..5.0, z in -5.0f64..5.0,
            u in -5.0f64..5.0, v in -5.0f64..5.0, w in -5.0f64..5.0,
        ) {
            // a . rotate(b, -tau) = rotate(a, tau) . b
            let p = Vec3::new(x, y, z);
            let q = Vec3::new(u, v, w);
            let lhs = p.dot(rotate(q, -a));
            let rhs = rotate(p, a).dot(q);
            prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()));
        }

        #[test]
        fn cross_is_perpendicular(
            x in -5.0f64..5.0, y in -5.0f64..5.0, z in -5.0f64..5.0,
            u in -5.0f64..5.0, v in -5.0f64..5.0, w in -5.0f64..5.0,
        ) {
            let p = Vec3::new(x, y, z);
            let q = Vec3::new(u, v, w);
            let c = p.cross(q);
            prop_assert!(c.dot(p).abs() <= 1e-12 * (1.0 + p.norm() * q.norm() * p.norm()));
            prop_assert!(c.dot(q).abs() <= 1e-12 * (1.0 + p.norm() * q.norm() * q.norm()));
        }
    }
}
