//! Quadrature rules.
//!
//! Gyroaverages use the full-period trapezoid rule (spectrally accurate for
//! periodic analytic integrands). Velocity-space moments use Gauss rules
//! built from the orthonormal three-term recurrences; nodes come from
//! bisection on the interlacing intervals, weights are the reciprocals of the
//! Christoffel sums, so no linear algebra dependency is needed.

use std::iter::Sum;
use std::ops::Mul;
use std::sync::OnceLock;

use std::f64::consts::TAU;

/// Average of `g` over one period, sampled at `n` equispaced phases starting
/// at 0. Equals (1/2pi) int_0^{2pi} g for any integrand whose Fourier modes
/// above |n| are negligible.
pub fn periodic_average<T, F>(n: usize, mut g: F) -> T
where
    F: FnMut(f64) -> T,
    T: Sum + Mul<f64, Output = T>,
{
    assert!(n > 0, "periodic average needs at least one node");
    (0..n).map(|j| g(TAU * j as f64 / n as f64)).sum::<T>() * (1.0 / n as f64)
}

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1].
/// Weights sum to 2. Exact for polynomials of degree 2n-1.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    assert!(n >= 1 && n <= 128, "unsupported Gauss-Legendre size {n}");
    // Orthonormal recurrence x p_k = b_{k+1} p_{k+1} + b_k p_{k-1} with
    // b_k = k / sqrt(4k^2 - 1) and p_0 = 1/sqrt(2).
    let b: Vec<f64> = (1..=n)
        .map(|k| {
            let k = k as f64;
            k / (4.0 * k * k - 1.0).sqrt()
        })
        .collect();
    let eval = move |k: usize, x: f64| -> f64 {
        let mut pm = 0.0;
        let mut p = 1.0 / 2.0f64.sqrt();
        for j in 0..k {
            let next = (x * p - if j > 0 { b[j - 1] * pm } else { 0.0 }) / b[j];
            pm = p;
            p = next;
        }
        p
    };
    rule_from_recurrence(n, 1.0 + 1e-9, eval)
}

/// Nodes and weights of the n-point Gauss-Hermite rule for the weight
/// exp(-x^2) on the whole line. Weights sum to sqrt(pi).
pub fn gauss_hermite(n: usize) -> Vec<(f64, f64)> {
    assert!(n >= 1 && n <= 128, "unsupported Gauss-Hermite size {n}");
    // Orthonormal recurrence x h_k = sqrt((k+1)/2) h_{k+1} + sqrt(k/2) h_{k-1},
    // h_0 = pi^{-1/4}. All roots lie inside |x| < sqrt(2n+1) + 2.
    let eval = move |k: usize, x: f64| -> f64 {
        let mut hm = 0.0;
        let mut h = std::f64::consts::PI.powf(-0.25);
        for j in 0..k {
            let jf = j as f64;
            let next = (x * h - (jf / 2.0).sqrt() * hm) / ((jf + 1.0) / 2.0).sqrt();
            hm = h;
            h = next;
        }
        h
    };
    let bound = (2.0 * n as f64 + 1.0).sqrt() + 2.0;
    rule_from_recurrence(n, bound, eval)
}

/// Builds a Gauss rule from an orthonormal-polynomial evaluator. Roots of the
/// degree-k polynomial strictly interlace those of degree k+1, so climbing
/// degree by degree gives guaranteed brackets for bisection.
fn rule_from_recurrence<E>(n: usize, bound: f64, eval: E) -> Vec<(f64, f64)>
where
    E: Fn(usize, f64) -> f64,
{
    let mut roots: Vec<f64> = Vec::new();
    for k in 1..=n {
        let mut next = Vec::with_capacity(k);
        let mut lo = -bound;
        for i in 0..k {
            let hi = if i < roots.len() { roots[i] } else { bound };
            next.push(bisect(|x| eval(k, x), lo, hi));
            lo = hi;
        }
        roots = next;
    }
    roots
        .into_iter()
        .map(|x| {
            let s: f64 = (0..n).map(|k| eval(k, x).powi(2)).sum();
            (x, 1.0 / s)
        })
        .collect()
}

fn bisect<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64) -> f64 {
    let mut fa = f(a);
    debug_assert!(fa * f(b) < 0.0, "bisection bracket lost a sign change");
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if (fa > 0.0) == (fm > 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

fn scaled_panel(rule: &[(f64, f64)], a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    rule.iter().map(move |&(x, w)| (mid + half * x, half * w))
}

fn g10() -> &'static Vec<(f64, f64)> {
    static CACHE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    CACHE.get_or_init(|| gauss_legendre(10))
}

fn g20() -> &'static Vec<(f64, f64)> {
    static CACHE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    CACHE.get_or_init(|| gauss_legendre(20))
}

/// Fixed composite 20-point Gauss rule over `panels` equal panels. Generic in
/// the integrand value so vector quantities integrate in one pass.
pub fn composite_gauss<T, F>(a: f64, b: f64, panels: usize, mut f: F) -> T
where
    F: FnMut(f64) -> T,
    T: Sum + Mul<f64, Output = T>,
{
    assert!(panels > 0);
    let rule = g20();
    let h = (b - a) / panels as f64;
    (0..panels)
        .flat_map(|p| {
            let lo = a + h * p as f64;
            scaled_panel(rule, lo, lo + h)
        })
        .map(|(x, w)| f(x) * w)
        .sum()
}

/// Adaptive Gauss integration of a scalar integrand. Panels are accepted when
/// the 10-point and 20-point values agree within the local share of `tol`
/// (measured against the integral of |f|, so the tolerance is relative to the
/// overall mass rather than to cancellation-prone signed values).
pub fn adaptive_gauss<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let scale: f64 = scaled_panel(g20(), lo, hi)
        .map(|(x, w)| f(x).abs() * w)
        .sum::<f64>()
        .max(1.0);
    sign * refine(f, lo, hi, tol.max(1e-15) * scale, 0)
}

fn refine<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, depth: usize) -> f64 {
    let fine: f64 = scaled_panel(g20(), a, b).map(|(x, w)| f(x) * w).sum();
    let coarse: f64 = scaled_panel(g10(), a, b).map(|(x, w)| f(x) * w).sum();
    if (fine - coarse).abs() <= tol || depth >= 40 {
        fine
    } else {
        let m = 0.5 * (a + b);
        refine(f, a, m, 0.5 * tol, depth + 1) + refine(f, m, b, 0.5 * tol, depth + 1)
    }
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::super::{bessel_j0, rotate, Vec3};
    use super::*;

    #[test]
    fn legendre_weights_sum_to_two() {
        for n in 1..=24 {
            let s: f64 = gauss_legendre(n).iter().map(|&(_, w)| w).sum();
            assert!((s - 2.0).abs() < 1e-13, "n={n}: {s}");
        }
    }

    #[test]
    fn hermite_weights_sum_to_sqrt_pi() {
        for n in 1..=24 {
            let s: f64 = gauss_hermite(n).iter().map(|&(_, w)| w).sum();
            assert!((s - PI.sqrt()).abs() < 1e-12, "n={n}: {s}");
        }
    }

    #[test]
    fn legendre_polynomial_exactness() {
        // 20 points integrate degree 38 exactly: int_{-1}^{1} x^38 = 2/39.
        let rule = gauss_legendre(20);
        let s: f64 = rule.iter().map(|&(x, w)| w * x.powi(38)).sum();
        assert!((s - 2.0 / 39.0).abs() < 1e-14);
        let odd: f64 = rule.iter().map(|&(x, w)| w * x.powi(7)).sum();
        assert!(odd.abs() < 1e-15);
    }

    #[test]
    fn hermite_moments() {
        // int x^14 e^{-x^2} = sqrt(pi) 13!!/2^7, inside the exactness range
        // of the 8-point rule.
        let rule = gauss_hermite(8);
        let s: f64 = rule.iter().map(|&(x, w)| w * x.powi(14)).sum();
        let expected = PI.sqrt() * 135135.0 / 128.0;
        assert!((s - expected).abs() < 1e-9 * expected);
        let one: f64 = rule.iter().map(|&(x, w)| w * x).sum();
        assert!(one.abs() < 1e-13);
    }

    #[test]
    fn hermite_single_node() {
        let rule = gauss_hermite(1);
        assert!(rule[0].0.abs() < 1e-15);
        assert!((rule[0].1 - PI.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn periodic_average_kills_low_harmonics() {
        for m in 1..8 {
            let v: f64 = periodic_average(64, |t| (m as f64 * t).cos());
            assert!(v.abs() < 1e-15, "harmonic {m} survived: {v}");
        }
        let dc: f64 = periodic_average(64, |_| 3.5);
        assert!((dc - 3.5).abs() < 1e-15);
    }

    #[test]
    fn periodic_average_reproduces_bessel() {
        for &z in &[0.0, 0.5, 1.7, 4.0, 9.3] {
            let avg: f64 = periodic_average(128, |t| (z * t.sin()).cos());
            assert!((avg - bessel_j0(z)).abs() < 1e-13, "z={z}");
        }
    }

    #[test]
    fn gyroaverage_of_rotation_leaves_parallel_part() {
        let v = Vec3::new(0.8, 1.3, -0.4);
        let avg: Vec3 = periodic_average(64, |t| rotate(v, t));
        assert!((avg - Vec3::new(0.8, 0.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn composite_gauss_on_vector_integrand() {
        let v: Vec3 = composite_gauss(0.0, 1.0, 2, |t| Vec3::new(1.0, 2.0 * t, 3.0 * t * t));
        assert!((v - Vec3::new(1.0, 1.0, 1.0)).norm() < 1e-14);
    }

    #[test]
    fn adaptive_gauss_reference_values() {
        let pi = adaptive_gauss(&|x: f64| 4.0 / (1.0 + x * x), 0.0, 1.0, 1e-13);
        assert!((pi - PI).abs() < 1e-12);
        let osc = adaptive_gauss(&|x: f64| (50.0 * x).cos(), 0.0, 10.0, 1e-13);
        assert!((osc - (500.0f64).sin() / 50.0).abs() < 1e-11);
        let rev = adaptive_gauss(&|x: f64| x * x, 1.0, 0.0, 1e-13);
        assert!((rev + 1.0 / 3.0).abs() < 1e-13);
    }
}
