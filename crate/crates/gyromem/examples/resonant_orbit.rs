//! The resonant scenario: a circularly polarized drive locked to the
//! gyration pumps energy into the particle without bound. The splitting
//! integrator reproduces the closed orbit to rounding, and the co-rotating
//! frame shows why: there the drive is a constant vector and the velocity
//! walks a straight line.

use gyromem::fields::FieldSpec;
use gyromem::math::{rotate, Vec3};
use gyromem::vlasov::{resonance_reference, single_trajectory, EnsembleConfig, Sampling};

fn main() -> gyromem::Result<()> {
    let eps = 0.01;
    let spec = FieldSpec::CircularResonant { amplitude: 1.0 };
    let v0 = Vec3::new(0.0, -1.0, 0.0);
    let cfg = EnsembleConfig {
        epsilon: eps,
        dt: eps / 16.0,
        t_final: 2.0,
        sampling: Sampling::MonteCarlo { count: 1 },
        strong_field: true,
        save_every: 400,
    };
    let traj = single_trajectory(&spec, &cfg, Vec3::ZERO, v0)?;

    println!("resonant orbit at epsilon = {eps}, {} steps", cfg.steps());
    println!("\n   t     |V|^2    closed    pusher error   co-rotating velocity");
    for &(t, _, v) in &traj {
        let reference = resonance_reference(v0, t, eps);
        let err = (v - reference).norm();
        let expected = v0.dot(v0) + 2.0 * t * v0.c2 + t * t;
        // Undo the fast rotation: u moves in a straight line v0 + t e2.
        let u = rotate(v, t / eps);
        println!(
            "  {t:4.2}  {:7.4}  {expected:7.4}   {err:.3e}     ({:6.3}, {:6.3}, {:6.3})",
            v.dot(v),
            u.c1,
            u.c2,
            u.c3
        );
    }

    // With v0 = -e2 the energy dips before it grows: the drive first
    // decelerates the particle through zero, then accelerates it forever.
    let t_min = 1.0;
    let v_min = resonance_reference(v0, t_min, eps);
    println!("\nspeed minimum at t = {t_min}: |V| = {:.3e}", v_min.norm());
    Ok(())
}
