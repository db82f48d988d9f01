//! Tapping a mode with a weak coupler and counting the photons that leak
//! out applies a heralded ladder operator to what stays behind.
//!
//! Run with `cargo run --example photon_subtraction`.

use heralded::elements::{subtract_photon, BeamSplitterParams};
use heralded::{make_state, Caps, FockState, ModeLabel, ModeRegistry, C64};

fn print_state(label: &str, state: &FockState) {
    println!("{label}");
    for (occ, amp) in state.iter() {
        println!("  |{}>   {:+.5} {:+.5}i", occ[0], amp.re, amp.im);
    }
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let registry = ModeRegistry::scalars(&[0])?;
    let mode = ModeLabel::scalar(0);

    // A lopsided three-component input, c_n = (0.8, 0.5, 0.33) up to norm.
    let coeffs = [0.8, 0.5, 0.33];
    let column: Vec<C64> = coeffs.iter().map(|&c| C64::new(c, 0.0)).collect();
    let input = make_state(&registry, Caps::new(4, 4), &[(C64::new(1.0, 0.0), vec![column])])?
        .normalized()?;
    print_state("input state:", &input);

    let params = BeamSplitterParams::from_transmittance(0.81)?;
    println!("\ntap coupler transmittance 0.81, heralding k photons in the tap:");
    let mut total = 0.0;
    for k in 0..=2u8 {
        let result = subtract_photon(&input, mode, k, params)?;
        total += result.probability;
        println!("\nk = {k}: probability {:.6} ({})", result.probability, result.outcome);
        if result.probability > 1e-12 {
            let kept = result.state.normalized()?;
            print_state("  kept state, renormalized:", &kept);
        }
    }
    // The herald outcomes partition the output, so the probabilities
    // close to one without any renormalization tricks.
    println!("\nsum over herald outcomes: {total:.12}");

    // Cross-check the single-subtraction branch against the ladder rule:
    // the |n> amplitude picks up sqrt(n+1) t^n r from c_{n+1}.
    let t = 0.81f64.sqrt();
    let r = 0.19f64.sqrt();
    let one = subtract_photon(&input, mode, 1, params)?;
    println!("\nk = 1 amplitudes against sqrt(n+1) t^n r c_(n+1):");
    for n in 0..=1u8 {
        let c_next = input.amplitude(&[n + 1]);
        let expected = c_next.re * f64::from(n + 1).sqrt() * t.powi(i32::from(n)) * r;
        let got = one.state.amplitude(&[n]).re;
        println!("  n = {n}: circuit {got:+.8}, ladder rule {expected:+.8}");
    }
    Ok(())
}
