//! SIMON32/64: 16-bit Feistel halves, 64-bit key, 32 rounds.

pub const SIMON_ROUNDS: usize = 32;

const Z0: u64 = 0b11111010001001010110000111001101111101000100101011000011100110;

/// Key words `[k3, k2, k1, k0]`, most significant first; `k0` is the first
/// round key.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Simon64Key(pub [u16; 4]);

impl Simon64Key {
    pub const BITS: usize = 64;

    pub fn from_u64(v: u64) -> Self {
        Simon64Key([(v >> 48) as u16, (v >> 32) as u16, (v >> 16) as u16, v as u16])
    }

    pub fn to_u64(self) -> u64 {
        self.0.iter().fold(0u64, |acc, &w| (acc << 16) | w as u64)
    }

    fn schedule(self) -> [u16; SIMON_ROUNDS] {
        let mut k = [0u16; SIMON_ROUNDS];
        for (i, w) in k.iter_mut().take(4).enumerate() {
            *w = self.0[3 - i];
        }
        for i in 4..SIMON_ROUNDS {
            let mut tmp = k[i - 1].rotate_right(3) ^ k[i - 3];
            tmp ^= tmp.rotate_right(1);
            // z0 is read left to right
            let z = ((Z0 >> (61 - (i - 4) % 62)) & 1) as u16;
            k[i] = !k[i - 4] ^ tmp ^ z ^ 3;
        }
        k
    }
}

#[inline]
fn f(x: u16) -> u16 {
    (x.rotate_left(1) & x.rotate_left(8)) ^ x.rotate_left(2)
}

pub fn simon32_encrypt(p: u32, key: Simon64Key) -> u32 {
    let (mut x, mut y) = ((p >> 16) as u16, p as u16);
    for rk in key.schedule() {
        (x, y) = (y ^ f(x) ^ rk, x);
    }
    ((x as u32) << 16) | y as u32
}

pub fn simon32_decrypt(c: u32, key: Simon64Key) -> u32 {
    let (mut x, mut y) = ((c >> 16) as u16, c as u16);
    for rk in key.schedule().into_iter().rev() {
        (x, y) = (y, x ^ f(y) ^ rk);
    }
    ((x as u32) << 16) | y as u32
}
