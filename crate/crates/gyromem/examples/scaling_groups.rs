//! Reduces laboratory reference scales to the three dimensionless groups
//! behind the strong-field model and checks whether they collapse onto a
//! single small parameter.

use gyromem::harness::{scaling_groups, PhysicalScales};

fn report(label: &str, scales: &PhysicalScales) -> gyromem::Result<()> {
    let g = scaling_groups(scales)?;
    println!("{label}:");
    println!("  gyrofrequency          {:.3e}", scales.gyrofrequency());
    println!("  ratio_time             {:.3e}", g.ratio_time);
    println!("  ratio_force            {:.3e}", g.ratio_force);
    println!("  ratio_length           {:.3e}", g.ratio_length);
    println!("  epsilon estimate       {:.3e}", g.epsilon_estimate);
    println!("  single-parameter fit   {}", if g.regime_consistent { "yes" } else { "no" });
    for note in &g.notes {
        println!("    {note}");
    }
    println!();
    Ok(())
}

fn main() -> gyromem::Result<()> {
    // A setup where all three groups agree on epsilon = 1e-3.
    let consistent = PhysicalScales {
        b_bar: 1.0,
        m: 1.0e-5,
        q: 1.0,
        t_bar: 1.0e-2,
        l_bar: 10.0,
        v_bar: 1.0e3,
        e_bar: 1.0,
    };
    report("consistent ordering", &consistent)?;

    // Same field and clock, but a system only one meter across: the
    // gyroradius group lands an order of magnitude off the other two,
    // so no single epsilon describes this regime.
    let mut short = consistent;
    short.l_bar = 1.0;
    report("length scale out of line", &short)?;
    Ok(())
}
