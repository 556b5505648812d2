// Multiplication and Poisson-derivation operators on phase space, their
// commutation relations, and the flows they generate.

use num_complex::Complex64;
use num_rational::Rational64;
use qcmt::koopman::{
    bracket_residuals, exact_quadratic_flow, flow_jacobian, flow_sample, gibbs_oscillator_kernel, jacobi_residual,
    poisson, random_polynomial, symplectic_defect, FlowSample, FlowSpec, KoopmanOperator, Polynomial,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let (q, p) = (Polynomial::<Rational64>::q(1, 0), Polynomial::<Rational64>::p(1, 0));
    println!("{{q, p}} = {}", poisson(&q, &p)?);

    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut checked = 0;
    for _ in 0..50 {
        let u = random_polynomial(&mut rng, 2, 3);
        let v = random_polynomial(&mut rng, 2, 3);
        let f = random_polynomial(&mut rng, 2, 3);
        assert!(bracket_residuals(&u, &v, &f)?.all_zero());
        assert!(jacobi_residual(&u, &v, &f)?.is_zero());
        checked += 1;
    }
    println!("[Y,Y]=0, [Z,Y]=Y_{{u,v}}, [Z,Z]=Z_{{u,v}} and Jacobi exact on {checked} random triples");

    // harmonic oscillator H = (p² + q²)/2 flowing for a quarter period
    let half = Complex64::new(0.5, 0.0);
    let h = Polynomial::<Complex64>::q(1, 0)
        .mul(&Polynomial::q(1, 0))?
        .add(&Polynomial::p(1, 0).mul(&Polynomial::p(1, 0))?)?
        .scale(half);
    let t = std::f64::consts::FRAC_PI_2;
    let spec = FlowSpec::new(KoopmanOperator::z(h.clone()), t);
    let x0 = vec![1.0, 0.0];
    let FlowSample::Points(images) = flow_sample(&spec, std::slice::from_ref(&x0), spec.default_steps())? else {
        unreachable!("Z-flows transport points")
    };
    let (a, b) = exact_quadratic_flow(&h, t)?;
    let exact = &a * nalgebra::DVector::from_vec(x0.clone()) + b;
    println!("integrated {:?}  exact {:?}", images[0], exact.as_slice());
    let (_, jac) = flow_jacobian(&spec, &x0, spec.default_steps())?;
    println!("symplectic defect {:e}", symplectic_defect(&jac));

    // Y-flows rescale instead of moving points
    let y = FlowSpec::new(KoopmanOperator::y(h), 0.1);
    if let FlowSample::Multipliers(m) = flow_sample(&y, &[x0], 1)? {
        println!("exp(0.1 Y_H) multiplies by {:.6} at (1, 0)", m[0]);
    }

    let gibbs = gibbs_oscillator_kernel(1.0, 2.0, 0.5)?;
    println!("Gibbs kernel (q, p):\n{}", gibbs.matrix());
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
