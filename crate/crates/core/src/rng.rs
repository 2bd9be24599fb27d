//! Portable seeded uniform source.
//!
//! Every sampling path in this crate draws from SplitMix64 so that reports
//! are bit-identical across runs, platforms, and reimplementations in other
//! languages. The generator is fully specified here:
//!
//! - state update: `state = state + 0x9E3779B97F4A7C15` (wrapping)
//! - output mix:   `z = state; z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9;`
//!   `z = (z ^ (z >> 27)) * 0x94D049BB133111EB; return z ^ (z >> 31)`
//! - unit interval: `(output >> 11) as f64 * 2^-53`, uniform on [0, 1)

#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Next uniform draw on [0, 1) with 53 bits of precision.
    pub fn next_unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}
