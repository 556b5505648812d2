// Words, products and adjoints in the free *-algebra.
//
// Run with `cargo run --example algebra_words`.

use num_complex::Complex64;
use qcmt::{AlgebraElement, Index};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    // 1 and 2 are self-conjugate; a and A are swapped by the involution
    let (one, two) = (Index::new(1), Index::new(2));
    let (a, a_star) = Index::pair("a", "A");
    assert_eq!(a.involve(), a_star);
    assert_eq!(a.involve().involve(), a);

    let m1 = AlgebraElement::generator(one.clone());
    let m2 = AlgebraElement::generator(two);
    let ma = AlgebraElement::generator(a);

    let x = &(&m1 + &m2) * &ma;
    println!("(M1 + M2) Ma         = {x}");

    let c = Complex64::new(2.0, 1.0);
    let y = (&m1 * &ma).scale(c);
    println!("((2+i) M1 Ma)^dagger = {}", y.adjoint());

    // adjoint reverses products
    let lhs = (&x * &y).adjoint();
    let rhs = &y.adjoint() * &x.adjoint();
    assert!(lhs.approx_eq(&rhs, 1e-14));
    assert_eq!(x.adjoint().adjoint(), x);
    assert_eq!(&AlgebraElement::one() * &m1, m1);
    println!("anti-homomorphism and involution hold");
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
