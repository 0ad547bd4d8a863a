//! Binary masks with run-length-encoded serialization, and logit grids.
//!
//! Wire format: `{"w": W, "h": H, "rle": [r0, r1, ...]}` with run lengths in
//! row-major order, alternating background/foreground and starting with
//! background (a leading 0 means the mask opens with foreground). The run
//! lengths must sum to `W * H`.

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Per-frame, per-object boolean grid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMask {
    width: u32,
    height: u32,
    bits: Vec<bool>,
}

impl BinaryMask {
    pub fn empty(width: u32, height: u32) -> Self {
        Self {
            width,
            height,
            bits: vec![false; (width * height) as usize],
        }
    }

    pub fn from_bits(width: u32, height: u32, bits: Vec<bool>) -> Result<Self> {
        if bits.len() != (width * height) as usize {
            return Err(Error::Shape(format!(
                "bit vector length {} does not match {width}x{height}",
                bits.len()
            )));
        }
        Ok(Self {
            width,
            height,
            bits,
        })
    }

    /// Build from a predicate over (x, y).
    pub fn from_fn(width: u32, height: u32, mut f: impl FnMut(u32, u32) -> bool) -> Self {
        let mut bits = Vec::with_capacity((width * height) as usize);
        for y in 0..height {
            for x in 0..width {
                bits.push(f(x, y));
            }
        }
        Self {
            width,
            height,
            bits,
        }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> bool {
        self.bits[(y * self.width + x) as usize]
    }

    #[inline]
    pub fn set(&mut self, x: u32, y: u32, v: bool) {
        self.bits[(y * self.width + x) as usize] = v;
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }

    /// True when no pixel is set.
    pub fn is_blank(&self) -> bool {
        self.count_ones() == 0
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self.width == other.width && self.height == other.height
    }

    /// Row-major run lengths, alternating background/foreground and starting
    /// with background.
    pub fn to_rle(&self) -> Vec<u32> {
        let mut runs = Vec::new();
        let mut current = false;
        let mut count = 0u32;
        for &b in &self.bits {
            if b == current {
                count += 1;
            } else {
                runs.push(count);
                current = b;
                count = 1;
            }
        }
        runs.push(count);
        // An all-background mask still yields one (background) run; an empty
        // grid yields a single zero run.
        runs
    }

    pub fn from_rle(width: u32, height: u32, runs: &[u32]) -> Result<Self> {
        let total: u64 = runs.iter().map(|r| u64::from(*r)).sum();
        if total != u64::from(width) * u64::from(height) {
            return Err(Error::Data(format!(
                "rle runs sum to {total}, expected {}x{} = {}",
                width,
                height,
                u64::from(width) * u64::from(height)
            )));
        }
        let mut bits = Vec::with_capacity((width * height) as usize);
        let mut value = false;
        for &r in runs {
            bits.extend(std::iter::repeat(value).take(r as usize));
            value = !value;
        }
        Ok(Self {
            width,
            height,
            bits,
        })
    }
}

#[derive(Serialize, Deserialize)]
struct RleRepr {
    w: u32,
    h: u32,
    rle: Vec<u32>,
}

impl Serialize for BinaryMask {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        RleRepr {
            w: self.width,
            h: self.height,
            rle: self.to_rle(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for BinaryMask {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = RleRepr::deserialize(deserializer)?;
        BinaryMask::from_rle(repr.w, repr.h, &repr.rle).map_err(D::Error::custom)
    }
}

/// Pre-sigmoid scores for one (object, frame) mask, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct MaskLogits<F> {
    width: u32,
    height: u32,
    values: Vec<F>,
}

impl<F: Real> MaskLogits<F> {
    pub fn zeros(width: u32, height: u32) -> Self {
        Self {
            width,
            height,
            values: vec![F::zero(); (width * height) as usize],
        }
    }

    pub fn from_values(width: u32, height: u32, values: Vec<F>) -> Result<Self> {
        if values.len() != (width * height) as usize {
            return Err(Error::Shape(format!(
                "logit grid length {} does not match {width}x{height}",
                values.len()
            )));
        }
        Ok(Self {
            width,
            height,
            values,
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn values(&self) -> &[F] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [F] {
        &mut self.values
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> F {
        self.values[(y * self.width + x) as usize]
    }

    #[inline]
    pub fn set(&mut self, x: u32, y: u32, v: F) {
        self.values[(y * self.width + x) as usize] = v;
    }

    pub fn matches_mask(&self, mask: &BinaryMask) -> bool {
        self.width == mask.width() && self.height == mask.height()
    }

    /// Threshold sigmoid probabilities at 0.5 (i.e. logits at 0).
    pub fn threshold(&self) -> BinaryMask {
        BinaryMask::from_bits(
            self.width,
            self.height,
            self.values.iter().map(|v| *v > F::zero()).collect(),
        )
        .expect("shape preserved")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rle_basic() {
        let m = BinaryMask::from_fn(4, 2, |x, _| x >= 2);
        assert_eq!(m.to_rle(), vec![2, 2, 2, 2]);
        let back = BinaryMask::from_rle(4, 2, &m.to_rle()).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn rle_leading_foreground() {
        let m = BinaryMask::from_fn(3, 1, |x, _| x == 0);
        assert_eq!(m.to_rle(), vec![0, 1, 2]);
    }

    #[test]
    fn rle_sum_mismatch_rejected() {
        let err = BinaryMask::from_rle(4, 4, &[3, 3]).unwrap_err();
        assert!(err.to_string().contains("sum"), "{err}");
    }

    #[test]
    fn json_round_trip() {
        let m = BinaryMask::from_fn(5, 3, |x, y| (x + y) % 2 == 0);
        let json = serde_json::to_string(&m).unwrap();
        assert!(json.starts_with(r#"{"w":5,"h":3,"rle":["#), "{json}");
        let back: BinaryMask = serde_json::from_str(&json).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn corrupt_json_rejected() {
        let res: std::result::Result<BinaryMask, _> =
            serde_json::from_str(r#"{"w":4,"h":4,"rle":[3,3]}"#);
        assert!(res.is_err());
    }

    #[test]
    fn threshold_cuts_at_zero() {
        let g = MaskLogits::from_values(2, 1, vec![0.25_f64, -0.25]).unwrap();
        let m = g.threshold();
        assert!(m.get(0, 0));
        assert!(!m.get(1, 0));
    }

    proptest! {
        #[test]
        fn rle_round_trips(bits in proptest::collection::vec(any::<bool>(), 24)) {
            let m = BinaryMask::from_bits(6, 4, bits).unwrap();
            let back = BinaryMask::from_rle(6, 4, &m.to_rle()).unwrap();
            prop_assert_eq!(back, m);
        }

        #[test]
        fn rle_runs_sum_to_area(bits in proptest::collection::vec(any::<bool>(), 30)) {
            let m = BinaryMask::from_bits(5, 6, bits).unwrap();
            let total: u32 = m.to_rle().iter().sum();
            prop_assert_eq!(total, 30);
        }
    }
}
