// Vacuum and thermal two-point kernels of a massive scalar field in 1+1
// dimensions. The vacuum kernel ignores boosts, the thermal one does not,
// and both give the same commutator.

use qcmt::kernels::{
    commutator_kernel, kernel_as_gaussian, poincare_act, thermal_kernel, vacuum_kernel, FieldKernelSpec,
    PoincareElement, Wavepacket,
};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let vacuum = FieldKernelSpec::vacuum(1.0, 1.0)?;
    let thermal = FieldKernelSpec::thermal(1.0, 1.0, 1.0)?;
    let f = Wavepacket::gaussian([0.0, 0.0], 1.0, [0.0, 0.0])?;
    let g = Wavepacket::gaussian([0.0, 1.0], 1.0, [0.0, 0.0])?;

    let v0 = vacuum_kernel(&vacuum, &f, &g)?;
    let t0 = thermal_kernel(&thermal, &f, &g)?;
    println!("{:>8} {:>14} {:>14}", "rapidity", "vacuum change", "thermal change");
    for chi in [0.0, 0.25, 0.5, 1.0] {
        let b = PoincareElement::boost(chi);
        let (bf, bg) = (poincare_act(&b, &f), poincare_act(&b, &g));
        let dv = (vacuum_kernel(&vacuum, &bf, &bg)? - v0).norm();
        let dt = (thermal_kernel(&thermal, &bf, &bg)? - t0).norm();
        println!("{chi:>8} {dv:>14.3e} {dt:>14.3e}");
    }

    // a moving packet against a spatially separated one
    let h = Wavepacket::gaussian([0.0, 0.0], 1.0, [1.2, 0.3])?;
    println!("{:>6} {:>14} {:>14}", "dx", "commutator", "thermal - vac");
    for dx in [0.0, 4.0, 8.0, 12.0, 16.0] {
        let moved = poincare_act(&PoincareElement::translation(0.0, dx), &h.conj());
        let cv = commutator_kernel(&vacuum, &h, &moved)?;
        let ct = commutator_kernel(&thermal, &h, &moved)?;
        println!("{dx:>6} {:>14.3e} {:>14.3e}", cv.norm(), (ct - cv).norm());
    }

    let k = kernel_as_gaussian(&vacuum, &[f, g, h])?;
    println!(
        "{} indices (packets and conjugates), smallest eigenvalue {:.3e}",
        k.len(),
        k.min_eigenvalue()
    );
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
