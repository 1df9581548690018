//! Evaluates the two-scale limit: the slow profile G, the oscillatory
//! profile F at a chosen gyrophase, and the weak-star density obtained by
//! averaging F over the phase. The closed backward characteristics are
//! cross-checked against a Runge-Kutta integration.

use gyromem::fields::{Envelope, FieldSpec, GyroProfile, InitialData};
use gyromem::math::{rotate, Vec3};
use gyromem::two_scale::{limit_g, limit_g_ode, profile_f, weak_star_f};

fn main() -> gyromem::Result<()> {
    let spec = FieldSpec::Separable {
        envelope: Envelope::Cosine { amplitude: 1.0, frequency: 1.5 },
        profile: GyroProfile::Rotating { amplitude: 0.8, phase: 0.2 },
    };
    let data = InitialData::gaussian(Vec3::ZERO, 1.0, 1.0, 0.7);
    let t = 1.2;
    let x = Vec3::new(0.1, 0.0, 0.0);

    println!("weak-star density along v2 at t = {t} (v1 = 0.2, v3 = 0):");
    for i in 0..9 {
        let v2 = -2.0 + 0.5 * i as f64;
        let v = Vec3::new(0.2, v2, 0.0);
        let f = weak_star_f(&spec, &data, t, x, v, 64)?;
        let f0 = data.eval(x, v);
        let bar: String = std::iter::repeat('#').take((f * 60.0) as usize).collect();
        println!("  v2 = {v2:5.2}  f = {f:8.5}  (initially {f0:8.5})  {bar}");
    }

    // The profile at a fixed gyrophase is not phase-symmetric; the average
    // above is. Show both at one point.
    let v = Vec3::new(0.2, 1.0, 0.0);
    println!("\nprofile F at (v2, v3) = (1, 0) versus gyrophase:");
    for k in 0..6 {
        let tau = k as f64 * std::f64::consts::TAU / 6.0;
        println!("  tau = {tau:5.2}  F = {:.6}", profile_f(&spec, &data, t, tau, x, v));
    }

    // Independent check of the closed characteristics.
    let u = rotate(v, 0.7);
    let closed = limit_g(&spec, &data, t, x, u);
    let ode = limit_g_ode(&spec, &data, t, x, u, 400)?;
    println!("\nclosed G {closed:.12}");
    println!("RK4    G {ode:.12}");
    println!("difference {:.2e}", (closed - ode).abs());
    Ok(())
}
