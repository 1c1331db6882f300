//! One bit-basis and one phase-basis round over GF(2^16): encode, send
//! through a random network with one attacked edge, decode.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sqnc::adversary::{AttackStrategy, Attacker};
use sqnc::codec::{
    decode_bit, decode_phase, encode_bit, encode_phase, BitPlaintext, ChannelModel, CodeParams, EncoderRandomness,
    PhasePlaintext, SharedRandomness,
};
use sqnc::network::{random_network, FieldDesc};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let q = FieldDesc { p: 2, d: 1 };
    let params = CodeParams::with_override(q, 3, 1, 16, 12)?;
    let field = params.extension_field()?;
    let net = random_network(7, 3, 4, &q.build()?).with_attacked(vec![0]);
    let mut rng = ChaCha8Rng::seed_from_u64(1);

    let shared = SharedRandomness::sample(&params, &field, &mut rng);
    let enc = EncoderRandomness::sample(&params, &field, &mut rng);

    let chan = ChannelModel::bit(&net, &field)?;
    let plain = BitPlaintext::random(&params, &field, &mut rng);
    let x = encode_bit(&plain, &shared.r2b, &enc.re, &shared.s, &params)?;
    let mut eve = Attacker::new(&AttackStrategy::UniformRandom, &field, chan.m_a(), 2)?;
    let z = eve.attack_block(&chan.observe(&x)?)?;
    let y = chan.transmit(&x, Some(&z))?;
    match decode_bit(&y, &shared.s, &shared.r2b, &params)? {
        Some(d) => println!("bit basis: message recovered = {}", d.message == plain.m),
        None => println!("bit basis: no valid row operation"),
    }

    let chan = ChannelModel::phase(&net, &field)?;
    let plain = PhasePlaintext::random(&params, &field, &mut rng);
    let c = encode_phase(&plain, &shared.r2p, &enc.re, &shared.s, &params)?;
    let mut eve = Attacker::new(&AttackStrategy::AdaptiveLinear { window: 2, f: None }, &field, chan.m_a(), 3)?;
    let z = eve.attack_block(&chan.observe(&c)?)?;
    let y = chan.transmit(&c, Some(&z))?;
    match decode_phase(&y, &shared.s, &shared.r2p, &params)? {
        Some(d) => println!("phase basis: message recovered = {}", d.message == plain.m),
        None => println!("phase basis: no valid row operation"),
    }
    println!("error envelope per trial: {:.3e}", params.error_envelope());
    Ok(())
}
