//! Checking that a polarized register carries exactly one photon without
//! looking at the polarization. The interferometric backend builds the
//! check from couplers, two ancilla photons, and four detectors; the
//! ideal backend applies the same projection directly.
//!
//! Run with `cargo run --example qnd_heralding`.

use heralded::conditional::{qnd_single_photon, QndBackend};
use heralded::{fidelity, make_state, Caps, ModeRegistry, C64};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let registry = ModeRegistry::polarized(&[0])?;
    let caps = Caps::new(4, 4);
    let one = C64::new(1.0, 0.0);

    // An arbitrary polarization qubit, alpha |V> + beta |H>.
    let (alpha, beta) = (C64::new(0.6, 0.0), C64::new(0.0, 0.8));
    let qubit = make_state(
        &registry,
        caps,
        &[
            (alpha, vec![vec![C64::default(), one], vec![one, C64::default()]]),
            (beta, vec![vec![one, C64::default()], vec![C64::default(), one]]),
        ],
    )?;

    for backend in [QndBackend::Ideal, QndBackend::Interferometric] {
        let result = qnd_single_photon(&qubit, 0, backend, 1.0)?;
        let fid = fidelity(&result.state, &qubit)?;
        println!("{backend:?} backend on a one-photon register:");
        println!("  herald probability: {:.6}", result.probability);
        println!("  fidelity with the input polarization: {fid:.12}");
    }

    // Vacuum never triggers the herald: the ancilla photons carry the
    // only light, and the detection pattern asks for a photon that the
    // register must supply.
    let vacuum = make_state(
        &registry,
        caps,
        &[(one, vec![vec![one, C64::default()], vec![one, C64::default()]])],
    )?;
    let silent = qnd_single_photon(&vacuum, 0, QndBackend::Interferometric, 1.0)?;
    println!("\ninterferometric backend on vacuum:");
    println!("  herald probability: {:.3e}", silent.probability.max(0.0));

    // The circuit is tuned for the one-photon subspace. Feed it one V and
    // one H photon together and it still sometimes fires, which is why
    // pipelines filter on total photon number before trusting it.
    let pair = make_state(
        &registry,
        caps,
        &[(one, vec![vec![C64::default(), one], vec![C64::default(), one]])],
    )?;
    let leak = qnd_single_photon(&pair, 0, QndBackend::Interferometric, 1.0)?;
    println!("\ninterferometric backend on a two-photon register |1V,1H>:");
    println!("  herald probability: {:.6}", leak.probability);
    Ok(())
}
