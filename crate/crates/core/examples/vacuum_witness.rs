// The vacuum projector V: it commutes with nothing that has a nonzero
// two-point function, and conditioning on an element gives states that are
// no longer symmetric.

use num_complex::Complex64;
use qcmt::vacuum::{commutation_witness, condition, extended_expect, extended_positivity_probe, ExtendedWord};
use qcmt::{AlgebraElement, GaussianKernel, GaussianState, State, Word};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let k = GaussianKernel::real(&[&[1.0, 0.5], &[0.5, 1.0]])?;
    let state = GaussianState::new(k.clone())?;
    let (i1, i2) = (k.find("1").unwrap(), k.find("2").unwrap());

    let (split, projected) = commutation_witness(&state, &i1, &i2)?;
    println!("rho(M1 V M2) = {split}, rho(V M1 M2) = {projected}");

    for text in ["V", "V*V", "M1*V*M1", "V*M1*M2*V"] {
        let w = ExtendedWord::parse(text, |s| k.find(s))?;
        println!("rho({text}) = {}", extended_expect(&state, &w)?);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let probe = extended_positivity_probe(&state, k.indices(), 200, 2, &mut rng)?;
    println!("extended positivity over 200 random elements: min {probe:.4}");

    // condition on X = 1 + M1
    let x = &AlgebraElement::one() + &AlgebraElement::generator(i1.clone());
    let cond = condition(state.clone(), &x)?;
    let m1 = Word::generator(i1);
    println!(
        "rho_X(M1) = {} (the Gaussian value is 0), normalization {}",
        cond.expect_word(&m1)?,
        cond.normalization()
    );
    assert!((cond.expect_word(&Word::identity())? - Complex64::new(1.0, 0.0)).norm() < 1e-14);
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
