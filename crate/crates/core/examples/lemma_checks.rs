//! Statistical lemma checks at reduced trial counts.

use sqnc::codec::CodeParams;
use sqnc::gf::FieldSpec;
use sqnc::harness::lemmas::{full_rank_check, lemma_check_r1, lemma_check_subspace, lemma_check_vandermonde};
use sqnc::network::FieldDesc;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let f2 = FieldSpec::new(2, 1)?;
    let s = lemma_check_subspace(4, 2, 2, &f2, 5000, 1)?;
    println!(
        "subspace (4,2,2,2): freq {:.4}, exact {:.4}, enumeration {:?}, first factor over q^n0 {:.4}",
        s.frequency, s.exact, s.exhaustive, s.first_factor_q_n0
    );

    let v = lemma_check_vandermonde(4, 2, &FieldSpec::new(2, 6)?, 20_000, 2)?;
    for c in &v.cases {
        println!("vandermonde {:<36} freq {:.5} exact {:.5} bound {:.5}", c.label, c.frequency, c.exact, v.bound);
    }

    let params = CodeParams::with_override(FieldDesc { p: 2, d: 1 }, 3, 1, 8, 12)?;
    let r = lemma_check_r1(&params, 20_000, 3, 100)?;
    for c in &r.cases {
        println!("R1 {:?} case {} {:<28} hits {}", c.form, c.case, c.label, c.hits);
    }

    let fr = full_rank_check(2, &FieldSpec::new(3, 1)?, 5000, 4)?;
    println!("2x2 over GF(3) full rank: {:.4} vs {:.4}", fr.frequency, fr.exact);
    Ok(())
}
