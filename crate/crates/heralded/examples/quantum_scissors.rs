//! Heralded truncation: cut a single-mode state off at a chosen photon
//! number without distorting the amplitudes that survive.
//!
//! Run with `cargo run --example quantum_scissors`.

use heralded::conditional::{quantum_scissors, scissors_resource};
use heralded::{make_state, Caps, ModeLabel, ModeRegistry, C64};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // A long-tailed input, shaped like a coherent state with amplitude 1.2.
    let alpha: f64 = 1.2;
    let mut column = Vec::new();
    let mut fact = 1.0;
    for n in 0..=6u32 {
        if n > 0 {
            fact *= f64::from(n);
        }
        column.push(C64::new(alpha.powi(n as i32) / fact.sqrt(), 0.0));
    }
    let registry = ModeRegistry::scalars(&[0])?;
    let input = make_state(&registry, Caps::new(6, 6), &[(C64::new(1.0, 0.0), vec![column])])?
        .normalized()?;

    println!("input |n> weights:");
    for (occ, amp) in input.iter() {
        println!("  n = {}: {:.5}", occ[0], amp.norm_sqr());
    }

    println!("\ntruncating at n <= N:");
    println!("  N   P(herald)   P(ideal projector)   protocol scale");
    for n_keep in 1..=4u32 {
        let result = quantum_scissors(&input, ModeLabel::scalar(0), n_keep)?;
        let resource = scissors_resource(n_keep);
        // Weight the input already carries inside the kept subspace.
        let kept_weight: f64 = input
            .iter()
            .filter(|(occ, _)| u32::from(occ[0]) <= n_keep)
            .map(|(_, amp)| amp.norm_sqr())
            .sum();
        println!(
            "  {n_keep}   {:.6}    {kept_weight:.6}             {:.6}",
            result.probability, resource.success_probability,
        );

        // The kept amplitudes all shrink by one common factor, so after
        // renormalizing they match the projected input exactly.
        let out = result.state.normalized()?;
        let worst = out
            .iter()
            .map(|(occ, amp)| {
                let reference = input.amplitude(occ) / kept_weight.sqrt();
                (amp - reference).norm()
            })
            .fold(0.0f64, f64::max);
        println!("      worst amplitude error after renormalizing: {worst:.3e}");
    }

    println!("\nthe herald probability factorizes as (subspace weight) x (protocol scale),");
    println!("so the operation is exact on every input, not just weak ones.");
    Ok(())
}
