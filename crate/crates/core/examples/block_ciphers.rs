//! KATAN32 and SIMON32/64 on one block, plus the bit layout the attack
//! models see.
//!
//!     cargo run --example block_ciphers

use permattack::lwc::{
    katan32_decrypt, katan32_encrypt, simon32_decrypt, simon32_encrypt, BitVector, Katan80Key, Simon64Key,
};

fn main() -> permattack::Result<()> {
    let plain = 0x6565_6877;
    let katan = Katan80Key::new(0x0123_4567_89ab_cdef_0011)?;
    let c = katan32_encrypt(plain, katan);
    println!("KATAN32   {plain:08x} -> {c:08x} -> {:08x}", katan32_decrypt(c, katan));

    let simon = Simon64Key::from_u64(0x1918_1110_0908_0100);
    let c = simon32_encrypt(plain, simon);
    println!("SIMON32   {plain:08x} -> {c:08x} -> {:08x}", simon32_decrypt(c, simon));

    let bits = BitVector::from_u32(c);
    println!("bits msb first: {:?}", bits.bits());
    Ok(())
}
