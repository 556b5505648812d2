// Moments of a Gaussian state from its two-point kernel.
//
// Every moment is a sum over perfect matchings; the same number is read off
// the generating function as a cross-check.

use num_complex::Complex64;
use qcmt::gaussian::{
    commutator_factor, expect, generating_function, moment_from_generating_function, two_point, wick_expect,
};
use qcmt::{AlgebraElement, GaussianKernel, GaussianState, Word};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let k = GaussianKernel::real(&[&[1.0, 0.5], &[0.5, 1.0]])?;
    let (i1, i2) = (k.find("1").unwrap(), k.find("2").unwrap());

    println!("rho(M1 M2) = {}", two_point(&k, &i1, &i2)?);
    for text in ["M1", "M1*M2*M1*M2", "M1*M1*M1*M1", "M1*M2*M2*M1*M1*M2"] {
        let w = Word::parse(text, |s| k.find(s))?;
        let wick = wick_expect(&k, &w)?;
        let oracle = moment_from_generating_function(&k, &w)?;
        println!(
            "{text:<20} wick {:>8.4}  generating function {:>8.4}",
            wick.re, oracle.re
        );
        assert!((wick - oracle).norm() < 1e-12);
    }

    let z = generating_function(&k, &[i1.clone(), i2.clone()], &[1.0, 1.0])?;
    println!("Z(1, 1) = {:.6} (e^-1.5 = {:.6})", z.re, (-1.5f64).exp());

    let state = GaussianState::new(k.clone())?;
    let a = &AlgebraElement::from_word(Word::parse("M1*M2", |s| k.find(s))?).scale(Complex64::new(2.0, 0.0))
        + &AlgebraElement::one().scale(Complex64::new(3.0, 0.0));
    println!("rho(2 M1 M2 + 3) = {}", expect(&state, &a)?);

    // a kernel with an imaginary off-diagonal part: M1 and M2 no longer commute
    let q = GaussianKernel::trivial(&[
        vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.5)],
        vec![Complex64::new(0.0, -0.5), Complex64::new(1.0, 0.0)],
    ])?;
    let (j1, j2) = (q.find("1").unwrap(), q.find("2").unwrap());
    println!(
        "commutator factor, real kernel:    {}",
        commutator_factor(&k, &i1, &i2)?
    );
    println!(
        "commutator factor, complex kernel: {}",
        commutator_factor(&q, &j1, &j2)?
    );
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
