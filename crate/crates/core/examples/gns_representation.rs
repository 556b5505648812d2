// Gram matrices, the positive quotient and a finite GNS representation that
// reproduces the state on short words.

use qcmt::gns::{build_basis, gram, positivity_probe, represent};
use qcmt::{GaussianKernel, GaussianState, State};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let k = GaussianKernel::real(&[&[1.0, 0.5, 0.2], &[0.5, 1.0, 0.3], &[0.2, 0.3, 1.0]])?;
    let state = GaussianState::new(k.clone())?;

    for d in 1..=3 {
        let basis = build_basis(k.indices(), d);
        let g = gram(&basis, &state)?;
        println!(
            "degree {d}: {} words, smallest eigenvalue {:+.3e}, null dimension {}",
            basis.len(),
            g.min_eigenvalue(),
            g.null_dimension
        );
    }

    let basis = build_basis(k.indices(), 2);
    let rep = represent(&basis, &state)?;
    println!("representation on a {}-dimensional quotient", rep.dimension());
    let mut worst: f64 = 0.0;
    for w in build_basis(k.indices(), 2).words() {
        let d = (rep.vacuum_expectation(w)? - state.expect_word(w)?).norm();
        worst = worst.max(d);
    }
    println!("max |<Omega, pi(w) Omega> - rho(w)| over |w| <= 2: {worst:e}");
    assert!(worst < 1e-9);

    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let probe = positivity_probe(&state, k.indices(), 100, 3, &mut rng)?;
    println!("min rho(A^dagger A) over 100 random A: {probe:.4}");
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
