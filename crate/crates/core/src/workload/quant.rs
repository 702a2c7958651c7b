use serde::{Deserialize, Serialize};

use crate::error::{NemoError, Result};

/// Asymmetric affine quantizer over a calibrated range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quantizer {
    bits: u32,
    x_min: f64,
    x_max: f64,
    scale: f64,
    zero_point: f64,
}

impl Quantizer {
    pub fn new(bits: u32, x_min: f64, x_max: f64) -> Result<Self> {
        if !(2..=32).contains(&bits) {
            return Err(NemoError::contract(format!("bit width {bits} outside 2..=32")));
        }
        if !(x_min.is_finite() && x_max.is_finite() && x_min < x_max) {
            return Err(NemoError::contract(format!("invalid range [{x_min}, {x_max}]")));
        }
        let scale = (x_max - x_min) / Self::max_level_for(bits) as f64;
        Ok(Self { bits, x_min, x_max, scale, zero_point: -x_min / scale })
    }

    fn max_level_for(bits: u32) -> u64 {
        (1u64 << bits) - 1
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn range(&self) -> (f64, f64) {
        (self.x_min, self.x_max)
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Real-valued zero point, `-x_min / s`.
    pub fn zero_point(&self) -> f64 {
        self.zero_point
    }

    pub fn max_level(&self) -> u64 {
        Self::max_level_for(self.bits)
    }

    /// Integer level in `0..=2^b - 1` and its reconstruction `s * (level - z)`.
    pub fn quantize_dequantize(&self, x: f64) -> (u64, f64) {
        let clamped = x.clamp(self.x_min, self.x_max);
        let level = (clamped / self.scale + self.zero_point)
            .round()
            .clamp(0.0, self.max_level() as f64);
        (level as u64, self.scale * (level - self.zero_point))
    }

    pub fn fake_quantize(&self, x: f64) -> f64 {
        self.quantize_dequantize(x).1
    }
}
