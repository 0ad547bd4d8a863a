//! Relative temporal token codec.
//!
//! Absolute video times quantize onto a fixed grid of `n_bins` steps spanning
//! the whole clip: `index = round(t / duration * n_bins)`, rounding half away
//! from zero and clamping. Decoding is the left-edge inverse
//! `index * duration / n_bins`. Both clip endpoints are exactly
//! representable, so the token vocabulary has `n_bins + 1` entries
//! (indices `0..=n_bins`) and the round-trip error is at most
//! `duration / (2 * n_bins)`.
//!
//! Because encoding only sees the ratio `t / duration`, tokens are invariant
//! under rescaling time — the property that lets one vocabulary serve clips
//! of any length.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{real, Real};

/// Default number of quantization bins.
pub const DEFAULT_N_BINS: u32 = 100;

/// Quantization context: clip duration and bin count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimelineSpec<F> {
    duration_seconds: F,
    n_bins: u32,
}

impl<F: Real> TimelineSpec<F> {
    pub fn new(duration_seconds: F, n_bins: u32) -> Result<Self> {
        if !duration_seconds.is_finite() || duration_seconds <= F::zero() {
            return Err(Error::Domain(format!(
                "duration must be positive and finite, got {duration_seconds}"
            )));
        }
        if n_bins == 0 {
            return Err(Error::Domain("n_bins must be at least 1".into()));
        }
        Ok(Self {
            duration_seconds,
            n_bins,
        })
    }

    pub fn with_default_bins(duration_seconds: F) -> Result<Self> {
        Self::new(duration_seconds, DEFAULT_N_BINS)
    }

    pub fn duration_seconds(&self) -> F {
        self.duration_seconds
    }

    pub fn n_bins(&self) -> u32 {
        self.n_bins
    }

    /// Number of distinct token indices, `n_bins + 1`.
    pub fn vocab_size(&self) -> u32 {
        self.n_bins + 1
    }
}

/// Quantized relative time index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TemporalToken {
    pub index: u32,
}

impl TemporalToken {
    pub fn new(index: u32) -> Self {
        Self { index }
    }

    /// Rendered text form, e.g. `<Temp-42>`.
    pub fn text(&self) -> String {
        format!("<Temp-{}>", self.index)
    }
}

/// Closed time interval in seconds. Degenerate point intervals are allowed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeInterval<F> {
    start_seconds: F,
    end_seconds: F,
}

impl<F: Real> TimeInterval<F> {
    pub fn new(start_seconds: F, end_seconds: F) -> Result<Self> {
        if !start_seconds.is_finite() || !end_seconds.is_finite() {
            return Err(Error::Domain("interval endpoints must be finite".into()));
        }
        if start_seconds < F::zero() {
            return Err(Error::Domain(format!(
                "interval start must be non-negative, got {start_seconds}"
            )));
        }
        if start_seconds > end_seconds {
            return Err(Error::Domain(format!(
                "interval start {start_seconds} exceeds end {end_seconds}"
            )));
        }
        Ok(Self {
            start_seconds,
            end_seconds,
        })
    }

    pub fn start_seconds(&self) -> F {
        self.start_seconds
    }

    pub fn end_seconds(&self) -> F {
        self.end_seconds
    }

    pub fn length(&self) -> F {
        self.end_seconds - self.start_seconds
    }

    /// Checks the interval lies within `[0, duration]`.
    pub fn check_within(&self, spec: &TimelineSpec<F>) -> Result<()> {
        if self.end_seconds > spec.duration_seconds() {
            return Err(Error::Domain(format!(
                "interval end {} exceeds duration {}",
                self.end_seconds,
                spec.duration_seconds()
            )));
        }
        Ok(())
    }
}

/// Quantize an absolute time to a temporal token.
pub fn encode_time<F: Real>(t: F, spec: &TimelineSpec<F>) -> Result<TemporalToken> {
    if !t.is_finite() || t < F::zero() {
        return Err(Error::Domain(format!(
            "time {t} is negative or not finite"
        )));
    }
    if t > spec.duration_seconds() {
        return Err(Error::Domain(format!(
            "time {t} exceeds duration {}",
            spec.duration_seconds()
        )));
    }
    let bins = real::<F>(f64::from(spec.n_bins()));
    // round() is round-half-away-from-zero; t is non-negative here.
    let raw = (t / spec.duration_seconds() * bins).round();
    let clamped = raw.max(F::zero()).min(bins);
    let index = clamped
        .to_u32()
        .ok_or_else(|| Error::Domain(format!("token index {clamped} not representable")))?;
    Ok(TemporalToken::new(index))
}

/// Decode a temporal token back into seconds (left bin edge).
pub fn decode_time<F: Real>(tok: TemporalToken, spec: &TimelineSpec<F>) -> Result<F> {
    if tok.index > spec.n_bins() {
        return Err(Error::Domain(format!(
            "token index {} outside vocabulary 0..={}",
            tok.index,
            spec.n_bins()
        )));
    }
    let idx = real::<F>(f64::from(tok.index));
    let bins = real::<F>(f64::from(spec.n_bins()));
    Ok(idx * spec.duration_seconds() / bins)
}

/// Encode both endpoints of an interval.
pub fn encode_interval<F: Real>(
    iv: &TimeInterval<F>,
    spec: &TimelineSpec<F>,
) -> Result<(TemporalToken, TemporalToken)> {
    iv.check_within(spec)?;
    let a = encode_time(iv.start_seconds(), spec)?;
    let b = encode_time(iv.end_seconds(), spec)?;
    debug_assert!(a.index <= b.index);
    Ok((a, b))
}

/// Decode a token pair into an interval. An out-of-order pair is a
/// [`Error::MalformedInterval`], signalling a model emission error.
pub fn decode_interval<F: Real>(
    pair: (TemporalToken, TemporalToken),
    spec: &TimelineSpec<F>,
) -> Result<TimeInterval<F>> {
    let (a, b) = pair;
    if a.index > b.index {
        return Err(Error::MalformedInterval {
            start: a.index,
            end: b.index,
        });
    }
    let start = decode_time(a, spec)?;
    let end = decode_time(b, spec)?;
    TimeInterval::new(start, end)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;
    use proptest::prelude::*;

    fn spec(duration: f64, bins: u32) -> TimelineSpec<f64> {
        TimelineSpec::new(duration, bins).unwrap()
    }

    #[test]
    fn encode_midpoint() {
        let tok = encode_time(30.0, &spec(60.0, 100)).unwrap();
        assert_eq!(tok.index, 50);
    }

    #[test]
    fn encode_zero() {
        for d in [1.0, 60.0, 123.4] {
            assert_eq!(encode_time(0.0, &spec(d, 100)).unwrap().index, 0);
        }
    }

    #[test]
    fn encode_rounds_to_nearest_bin() {
        // Oracle: brute-force scan for the index whose decode is closest to t.
        let s = spec(100.0, 100);
        let t = 7.3;
        let tok = encode_time(t, &s).unwrap();
        assert_eq!(tok.index, 7);
        let mut best = (f64::INFINITY, 0u32);
        for k in 0..=s.n_bins() {
            let d = (decode_time(TemporalToken::new(k), &s).unwrap() - t).abs();
            if d < best.0 {
                best = (d, k);
            }
        }
        assert_eq!(tok.index, best.1);
    }

    #[test]
    fn encode_domain_errors() {
        let s = spec(60.0, 100);
        let err = encode_time(-1.0, &s).unwrap_err();
        assert!(err.to_string().contains("-1"), "{err}");
        let err = encode_time(60.5, &s).unwrap_err();
        assert!(err.to_string().contains("60.5"), "{err}");
    }

    #[test]
    fn decode_basics() {
        let s = spec(60.0, 100);
        assert_eq!(decode_time(TemporalToken::new(50), &s).unwrap(), 30.0);
        assert_eq!(decode_time(TemporalToken::new(0), &s).unwrap(), 0.0);
        assert_eq!(decode_time(TemporalToken::new(100), &s).unwrap(), 60.0);
        assert!(decode_time(TemporalToken::new(101), &s).is_err());
    }

    #[test]
    fn interval_quarter_points() {
        let s = spec(60.0, 100);
        let iv = TimeInterval::new(15.0, 45.0).unwrap();
        let (a, b) = encode_interval(&iv, &s).unwrap();
        assert_eq!((a.index, b.index), (25, 75));
    }

    #[test]
    fn interval_full_span() {
        let s = spec(60.0, 100);
        let iv = TimeInterval::new(0.0, 60.0).unwrap();
        let (a, b) = encode_interval(&iv, &s).unwrap();
        assert_eq!((a.index, b.index), (0, 100));
    }

    #[test]
    fn interval_collapses_to_same_bin() {
        let s = spec(100.0, 100);
        let iv = TimeInterval::new(10.1, 10.2).unwrap();
        let (a, b) = encode_interval(&iv, &s).unwrap();
        // Both endpoints round to the same index per the encode_time rule.
        assert_eq!(a, encode_time(10.1, &s).unwrap());
        assert_eq!(b, encode_time(10.2, &s).unwrap());
        assert_eq!((a.index, b.index), (10, 10));
    }

    #[test]
    fn decode_interval_cases() {
        let s = spec(60.0, 100);
        let iv = decode_interval((TemporalToken::new(25), TemporalToken::new(75)), &s).unwrap();
        assert_eq!((iv.start_seconds(), iv.end_seconds()), (15.0, 45.0));
        let point = decode_interval((TemporalToken::new(0), TemporalToken::new(0)), &s).unwrap();
        assert_eq!((point.start_seconds(), point.end_seconds()), (0.0, 0.0));
        let s2 = spec(100.0, 100);
        let iv = decode_interval((TemporalToken::new(10), TemporalToken::new(10)), &s2).unwrap();
        assert_eq!((iv.start_seconds(), iv.end_seconds()), (10.0, 10.0));
        let err =
            decode_interval((TemporalToken::new(5), TemporalToken::new(4)), &s).unwrap_err();
        assert!(matches!(
            err,
            crate::Error::MalformedInterval { start: 5, end: 4 }
        ));
    }

    #[test]
    fn endpoint_exactness() {
        for bins in [1u32, 7, 100, 150] {
            let s = spec(37.5, bins);
            for k in 0..=bins {
                let t = decode_time(TemporalToken::new(k), &s).unwrap();
                assert_eq!(encode_time(t, &s).unwrap().index, k);
            }
        }
    }

    #[test]
    fn round_trip_bound_seeded() {
        let mut rng = SplitMix64::new(0xC0DEC);
        for _ in 0..2000 {
            let duration = rng.next_range(0.1, 10_000.0);
            let t = rng.next_f64() * duration;
            let s = spec(duration, 100);
            let back = decode_time(encode_time(t, &s).unwrap(), &s).unwrap();
            assert!(
                (back - t).abs() <= duration / 200.0 + 1e-9,
                "t={t} duration={duration} back={back}"
            );
        }
    }

    #[test]
    fn timeline_validation() {
        assert!(TimelineSpec::new(0.0, 100).is_err());
        assert!(TimelineSpec::new(-3.0, 100).is_err());
        assert!(TimelineSpec::new(5.0, 0).is_err());
        assert!(TimelineSpec::new(f64::NAN, 100).is_err());
    }

    #[test]
    fn works_in_f32() {
        let s = TimelineSpec::<f32>::new(60.0, 100).unwrap();
        let tok = encode_time(30.0_f32, &s).unwrap();
        assert_eq!(tok.index, 50);
        assert_eq!(decode_time(tok, &s).unwrap(), 30.0_f32);
    }

    proptest! {
        #[test]
        fn monotone_in_time(duration in 0.5f64..1000.0, a in 0.0f64..1.0, b in 0.0f64..1.0) {
            let s = spec(duration, 100);
            let (t1, t2) = (a.min(b) * duration, a.max(b) * duration);
            let i1 = encode_time(t1, &s).unwrap().index;
            let i2 = encode_time(t2, &s).unwrap().index;
            prop_assert!(i1 <= i2);
        }

        #[test]
        fn round_trip_bound(duration in 0.5f64..1000.0, frac in 0.0f64..=1.0) {
            let s = spec(duration, 100);
            let t = frac * duration;
            let back = decode_time(encode_time(t, &s).unwrap(), &s).unwrap();
            prop_assert!((back - t).abs() <= duration / 200.0 + 1e-9);
        }

        #[test]
        fn scale_covariance_dyadic(duration in 0.5f64..100.0, frac in 0.0f64..=1.0, pow in -3i32..=6) {
            // Scaling by powers of two is exact in binary floating point, so
            // relative-time encoding must be bit-for-bit invariant under it.
            let c = 2.0f64.powi(pow);
            let t = frac * duration;
            let s1 = spec(duration, 100);
            let s2 = spec(duration * c, 100);
            let i1 = encode_time(t, &s1).unwrap().index;
            let i2 = encode_time(t * c, &s2).unwrap().index;
            prop_assert_eq!(i1, i2);
        }
    }
}
