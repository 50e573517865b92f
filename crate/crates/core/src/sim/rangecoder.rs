//! Byte-oriented range coder with carry propagation (LZMA style) for
//! frequency tables whose total is a power of two.

pub const TOTAL_BITS: u32 = 15;
pub const TOTAL: u32 = 1 << TOTAL_BITS;
const TOP: u32 = 1 << 24;

pub struct Encoder {
    low: u64,
    range: u32,
    cache: u8,
    cache_size: u64,
    out: Vec<u8>,
}

impl Default for Encoder {
    fn default() -> Self {
        Self::new()
    }
}

impl Encoder {
    pub fn new() -> Self {
        Self { low: 0, range: u32::MAX, cache: 0, cache_size: 1, out: Vec::new() }
    }

    fn shift_low(&mut self) {
        if (self.low as u32) < 0xFF00_0000 || (self.low >> 32) != 0 {
            let carry = (self.low >> 32) as u8;
            let mut byte = self.cache;
            loop {
                self.out.push(byte.wrapping_add(carry));
                byte = 0xFF;
                self.cache_size -= 1;
                if self.cache_size == 0 {
                    break;
                }
            }
            self.cache = ((self.low >> 24) & 0xFF) as u8;
        }
        self.cache_size += 1;
        self.low = (self.low & 0x00FF_FFFF) << 8;
    }

    /// Codes a symbol occupying `[start, start + freq)` out of [`TOTAL`].
    #[inline]
    pub fn encode(&mut self, start: u32, freq: u32) {
        debug_assert!(freq > 0 && start + freq <= TOTAL);
        let r = self.range >> TOTAL_BITS;
        self.low += r as u64 * start as u64;
        self.range = r * freq;
        while self.range < TOP {
            self.range <<= 8;
            self.shift_low();
        }
    }

    pub fn finish(mut self) -> Vec<u8> {
        for _ in 0..5 {
            self.shift_low();
        }
        self.out
    }
}

pub struct Decoder<'a> {
    code: u32,
    range: u32,
    input: &'a [u8],
    pos: usize,
}

impl<'a> Decoder<'a> {
    pub fn new(input: &'a [u8]) -> Self {
        let mut d = Self { code: 0, range: u32::MAX, input, pos: 1 };
        for _ in 0..4 {
            d.code = (d.code << 8) | d.next_byte() as u32;
        }
        d
    }

    #[inline]
    fn next_byte(&mut self) -> u8 {
        let b = self.input.get(self.pos).copied().unwrap_or(0);
        self.pos += 1;
        b
    }

    /// Position of the next symbol within `[0, TOTAL)`; follow with [`Self::consume`].
    #[inline]
    pub fn target(&mut self) -> (u32, u32) {
        let r = self.range >> TOTAL_BITS;
        ((self.code / r).min(TOTAL - 1), r)
    }

    #[inline]
    pub fn consume(&mut self, r: u32, start: u32, freq: u32) {
        self.code -= r * start;
        self.range = r * freq;
        while self.range < TOP {
            self.code = (self.code << 8) | self.next_byte() as u32;
            self.range <<= 8;
        }
    }

    /// True if the decoder read past the end of its input by more than the
    /// coder's flush slack.
    pub fn overran(&self) -> bool {
        self.pos > self.input.len() + 4
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn round_trip_random_tables() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut enc = Encoder::new();
        let mut script = Vec::new();
        for _ in 0..20_000 {
            let k = rng.random_range(1..6);
            let mut cum = vec![0u32];
            for i in 0..k {
                let rest = TOTAL - cum[i] - (k - i - 1) as u32;
                let f = if i == k - 1 { rest } else { rng.random_range(1..=rest.min(TOTAL / 2)) };
                cum.push(cum[i] + f);
            }
            let s = rng.random_range(0..k);
            enc.encode(cum[s], cum[s + 1] - cum[s]);
            script.push((cum, s));
        }
        let bytes = enc.finish();
        let mut dec = Decoder::new(&bytes);
        for (cum, s) in script {
            let (t, r) = dec.target();
            let got = cum.windows(2).position(|w| t >= w[0] && t < w[1]).unwrap();
            assert_eq!(got, s);
            dec.consume(r, cum[got], cum[got + 1] - cum[got]);
        }
        assert!(!dec.overran());
    }

    #[test]
    fn certain_symbols_cost_nothing() {
        let mut enc = Encoder::new();
        for _ in 0..100_000 {
            enc.encode(0, TOTAL);
        }
        assert!(enc.finish().len() <= 5);
    }
}
