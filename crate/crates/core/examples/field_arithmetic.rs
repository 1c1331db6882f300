//! Arithmetic in GF(2^8) and GF(7^2), the trace map, and embedding a base
//! field into an extension.

use sqnc::gf::{Embedding, FieldSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let f = FieldSpec::new(2, 8)?;
    println!("{f}: modulus coefficients {:?}", f.modulus());
    let a = f.element(0x53)?;
    let b = a.inv()?;
    println!("{} * {} = {}", a.value(), b.value(), a.mul(&b)?.value());

    let g = FieldSpec::new(7, 2)?;
    let x = g.element(10)?;
    println!("in {g}: x = {:?} (coefficients), x^48 = {}", x.coefficients(), x.pow(48).value());
    for v in [0u64, 1, 10, 48] {
        println!("  tr({v}) = {} = {}", g.trace(v), g.trace_via_matrix(v));
    }

    let base = FieldSpec::new(7, 1)?;
    let e = Embedding::new(&base, &g)?;
    for v in 0..7 {
        let img = e.apply(v);
        // The embedding is additive and multiplicative.
        assert_eq!(e.apply(base.mul(v, 3)), g.mul(img, e.apply(3)));
        print!("{v}->{img} ");
    }
    println!();
    Ok(())
}
