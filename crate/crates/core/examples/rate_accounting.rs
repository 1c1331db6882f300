//! Rate of the full protocol as the scale index grows.

use sqnc::harness::rate_accounting;
use sqnc::network::FieldDesc;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let q = FieldDesc { p: 2, d: 1 };
    println!("{:>6} {:>5} {:>8} {:>10} {:>6} {:>4} {:>9} {:>8} {:>10}", "ell", "alpha", "n'", "n1", "k", "beta", "n2", "rate", "|Rs|/n");
    for t in [14, 16, 18, 20, 24, 28] {
        let r = rate_accounting(q, 3, 1, 1 << t)?;
        println!(
            "{:>6} {:>5} {:>8} {:>10} {:>6} {:>4} {:>9} {:>8.4} {:>10.2e}",
            format!("2^{t}"),
            r.alpha,
            r.n_prime,
            r.n1,
            r.k,
            r.beta,
            r.n2,
            r.rate,
            r.rs_ratio
        );
    }
    Ok(())
}
