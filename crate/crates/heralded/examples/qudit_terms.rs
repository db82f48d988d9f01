//! Targets with more than two branches. Each branch gets its own source
//! tensor inside every device, and the fusion generalizes from a
//! two-party to a d-branch phase projection.
//!
//! Run with `cargo run --example qudit_terms`.

use heralded::planner::{plan, simulate, DeviceKind, PlanConfig, Scheme, TargetSpec, TargetTerm};
use heralded::C64;

fn unit_level(level: usize, dim: usize) -> Vec<C64> {
    let mut v = vec![C64::default(); dim];
    v[level] = C64::new(1.0, 0.0);
    v
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // A correlated qutrit pair with uneven weights and phases:
    // |00> + 0.8 e^(0.4i) |11> + 0.6 e^(-1.0i) |22> up to normalization.
    let coeffs = [
        C64::new(1.0, 0.0),
        C64::from_polar(0.8, 0.4),
        C64::from_polar(0.6, -1.0),
    ];
    let terms: Vec<TargetTerm> = coeffs
        .iter()
        .enumerate()
        .map(|(j, &c)| TargetTerm {
            coeff: c,
            factors: vec![unit_level(j, 3), unit_level(j, 3)],
        })
        .collect();
    let spec = TargetSpec { modes: 2, max_photons: 2, terms };

    let prep = plan(&spec, Scheme::DTermTwoMode, &PlanConfig::default())?;
    println!("scheme: {}", prep.scheme);
    for dev in &prep.devices {
        println!("\n{} delivers mode {:?}", dev.label, dev.output_spatials);
        if let DeviceKind::Qudit { inputs } = &dev.kind {
            // One reconstructed source tensor per target branch; running
            // the tap-and-erase pipeline on these reproduces the branch.
            for (j, tensor) in inputs.iter().enumerate() {
                println!("  branch {j}: source tensor over dims {:?}", tensor.dims());
                for (idx, amp) in tensor.indices().zip(tensor.as_slice()) {
                    if amp.norm_sqr() > 1e-20 {
                        println!("    {idx:?}   {:+.5} {:+.5}i", amp.re, amp.im);
                    }
                }
            }
        }
    }

    let outcome = simulate(&prep)?;
    println!("\nstage                     analytic       simulated");
    for stage in &outcome.report.stages {
        println!("{:<24}  {:.6e}   {:.6e}", stage.label, stage.analytic, stage.simulated);
    }
    println!("\nfidelity:            {:.12}", outcome.report.fidelity);
    println!("success probability: {:.3e}", outcome.report.total_probability);

    println!("\nprepared amplitudes against the requested ones:");
    let norm: f64 = coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    for (j, &c) in coeffs.iter().enumerate() {
        let occ = [j as u8, j as u8];
        let got = outcome.state.amplitude(&occ);
        let want = c / norm;
        println!(
            "  |{j}{j}>: got {:+.6} {:+.6}i, requested {:+.6} {:+.6}i",
            got.re, got.im, want.re, want.im,
        );
    }
    Ok(())
}
