//! Transfer and injection matrices of the bundled three-node network and of
//! a seeded random network.

use sqnc::gf::FieldSpec;
use sqnc::network::{random_network, NetworkSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let net = NetworkSpec::fig1();
    net.check()?;
    let t = net.bit_side()?;
    println!("fig1 over {} with {} edges, attacked {:?}", net.field, net.edges.len(), net.attacked);
    println!("K =");
    for row in t.k.to_rows() {
        println!("  {row:?}");
    }
    println!("W column: {:?}", t.w.column(0));
    let (kp, wp) = net.phase_transfer()?;
    println!("phase side: K_p invertible = {}, W_p column {:?}", kp.is_invertible(), wp.column(0));

    let f2 = FieldSpec::new(2, 1)?;
    let r = random_network(7, 3, 4, &f2).with_attacked(vec![0]);
    let rt = r.bit_side()?;
    println!(
        "random seed 7: {} nodes, {} edges, rank K = {}, W = {:?}",
        r.node_count(),
        r.edges.len(),
        rt.k.rank(),
        rt.w.column(0)
    );
    Ok(())
}
