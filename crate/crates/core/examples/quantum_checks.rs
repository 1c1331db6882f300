//! Exact checks on tiny state vectors: phase kets, the left and right
//! actions, the maximally entangled identities and a small CSS codeword.

use sqnc::gf::FieldSpec;
use sqnc::linalg::Matrix;
use sqnc::qcheck::{apply_left, css_codeword, ket_phase, run_suite};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let f3 = FieldSpec::new(3, 1)?;
    let z = Matrix::from_rows(&f3, &[vec![1], vec![2]])?;
    let a = Matrix::from_rows(&f3, &[vec![1, 1], vec![0, 1]])?;
    let lhs = apply_left(&a, &ket_phase(&z)?)?;
    let rhs = ket_phase(&a.phase_transform()?.mul(&z)?)?;
    println!("L(A)|Z>_p vs |[A]_p Z>_p: max difference {:.2e}", lhs.distance(&rhs));

    let f2 = FieldSpec::new(2, 1)?;
    let (coset, tensor) = css_codeword(&Matrix::from_rows(&f2, &[vec![1]])?, 3, 1)?;
    let support: Vec<usize> = (0..coset.dim()).filter(|&i| coset.amplitudes()[i].norm() > 1e-12).collect();
    println!("CSS codeword of M = [1]: support {support:?}, forms agree to {:.2e}", coset.distance(&tensor));

    let report = run_suite()?;
    for c in &report.checks {
        println!("{:<40} {:>5} cases  max error {:.2e}", c.name, c.cases, c.max_error);
    }
    println!("all passed: {}", report.passed);
    Ok(())
}
