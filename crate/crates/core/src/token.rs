//! Unified multi-task token stream.
//!
//! One ordered sequence carries plain text ids alongside the special tokens
//! that route fine-grained tasks: quantized time (`temp`), object
//! visual-prompt placeholders (`ref`), segmentation markers (`seg`), and the
//! video patch block (`vid`). A [`PositionMask`] locates the `seg` tokens so
//! their hidden states can be gathered for mask decoding; the gather is the
//! row-selection form of multiplying the hidden matrix elementwise with the
//! 0/1 mask and dropping zero rows.
//!
//! Sequences serialize as a JSON array of tagged objects,
//! `{"kind": "text|temp|ref|seg|vid", ...}`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::codec::TimelineSpec;
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::Real;

/// One element of the unified stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Token {
    /// Ordinary text token, an opaque id in `[0, text_vocab)`.
    Text { id: u32 },
    /// Quantized relative time index.
    Temp { index: u32 },
    /// Input-side placeholder for one referred object's visual tokens.
    Ref { slot: u32 },
    /// Output-side segmentation marker for one object.
    Seg { slot: u32 },
    /// One entry of the video patch block.
    #[serde(rename = "vid")]
    VideoPatch { ordinal: u32 },
}

impl Token {
    pub fn is_seg(&self) -> bool {
        matches!(self, Token::Seg { .. })
    }

    pub fn is_ref(&self) -> bool {
        matches!(self, Token::Ref { .. })
    }
}

/// Ordered token sequence with an optional timeline giving its temporal
/// tokens meaning.
#[derive(Debug, Clone, PartialEq)]
pub struct TokenSequence {
    tokens: Vec<Token>,
    timeline: Option<TimelineSpec<f64>>,
}

impl TokenSequence {
    /// Validates: `seg` slots strictly ascending, at most one contiguous
    /// `vid` block, and temporal indices within the attached timeline.
    pub fn new(tokens: Vec<Token>, timeline: Option<TimelineSpec<f64>>) -> Result<Self> {
        let mut last_seg: Option<u32> = None;
        let mut vid_block_ended = false;
        let mut in_vid_block = false;
        for tok in &tokens {
            match *tok {
                Token::Seg { slot } => {
                    if let Some(prev) = last_seg {
                        if slot <= prev {
                            return Err(Error::Construction(format!(
                                "seg slots must be strictly ascending, got {slot} after {prev}"
                            )));
                        }
                    }
                    last_seg = Some(slot);
                }
                Token::VideoPatch { .. } => {
                    if vid_block_ended {
                        return Err(Error::Construction(
                            "video patch tokens must form one contiguous block".into(),
                        ));
                    }
                    in_vid_block = true;
                }
                Token::Temp { index } => {
                    if let Some(tl) = &timeline {
                        if index > tl.n_bins() {
                            return Err(Error::Construction(format!(
                                "temporal index {index} outside vocabulary 0..={}",
                                tl.n_bins()
                            )));
                        }
                    }
                }
                _ => {}
            }
            if in_vid_block && !matches!(tok, Token::VideoPatch { .. }) {
                in_vid_block = false;
                vid_block_ended = true;
            }
        }
        Ok(Self { tokens, timeline })
    }

    pub fn tokens(&self) -> &[Token] {
        &self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn timeline(&self) -> Option<&TimelineSpec<f64>> {
        self.timeline.as_ref()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.tokens).expect("token serialization cannot fail")
    }

    pub fn from_json(json: &str) -> Result<Self> {
        let tokens: Vec<Token> = serde_json::from_str(json).map_err(|e| Error::Parse {
            line: e.line(),
            msg: e.to_string(),
        })?;
        Self::new(tokens, None)
    }
}

/// Boolean vector marking `seg` positions in a sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PositionMask {
    flags: Vec<bool>,
}

impl PositionMask {
    pub fn from_flags(flags: Vec<bool>) -> Self {
        Self { flags }
    }

    pub fn len(&self) -> usize {
        self.flags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.flags.is_empty()
    }

    pub fn flags(&self) -> &[bool] {
        &self.flags
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        self.flags[i]
    }

    pub fn popcount(&self) -> usize {
        self.flags.iter().filter(|b| **b).count()
    }

    /// Indices of set positions, ascending.
    pub fn positions(&self) -> Vec<usize> {
        self.flags
            .iter()
            .enumerate()
            .filter_map(|(i, b)| b.then_some(i))
            .collect()
    }
}

/// Assemble `[vid block] ++ text` with `ref`/`temp`/`seg` tokens inserted at
/// caller-chosen positions within the text. An insert position `p` places the
/// token before the `p`-th text token (`p = text_ids.len()` appends); inserts
/// sharing a position appear in ref, temp, seg order.
pub fn build_sequence(
    text_ids: &[u32],
    video_patch_count: usize,
    ref_inserts: &[(usize, u32)],
    seg_inserts: &[(usize, u32)],
    temp_inserts: &[(usize, u32)],
    timeline: Option<TimelineSpec<f64>>,
) -> Result<TokenSequence> {
    check_slots_ascending(ref_inserts, "ref")?;
    check_slots_ascending(seg_inserts, "seg")?;
    for &(pos, _) in ref_inserts.iter().chain(seg_inserts).chain(temp_inserts) {
        if pos > text_ids.len() {
            return Err(Error::Construction(format!(
                "insert position {pos} beyond text length {}",
                text_ids.len()
            )));
        }
    }

    let total = video_patch_count
        + text_ids.len()
        + ref_inserts.len()
        + seg_inserts.len()
        + temp_inserts.len();
    let mut tokens = Vec::with_capacity(total);
    for ordinal in 0..video_patch_count {
        tokens.push(Token::VideoPatch {
            ordinal: ordinal as u32,
        });
    }
    for pos in 0..=text_ids.len() {
        for &(p, slot) in ref_inserts {
            if p == pos {
                tokens.push(Token::Ref { slot });
            }
        }
        for &(p, index) in temp_inserts {
            if p == pos {
                tokens.push(Token::Temp { index });
            }
        }
        for &(p, slot) in seg_inserts {
            if p == pos {
                tokens.push(Token::Seg { slot });
            }
        }
        if pos < text_ids.len() {
            tokens.push(Token::Text { id: text_ids[pos] });
        }
    }
    debug_assert_eq!(tokens.len(), total);
    TokenSequence::new(tokens, timeline)
}

fn check_slots_ascending(inserts: &[(usize, u32)], kind: &str) -> Result<()> {
    for w in inserts.windows(2) {
        if w[1].1 <= w[0].1 {
            return Err(Error::Construction(format!(
                "{kind} slots must be strictly ascending and unique, got {} after {}",
                w[1].1, w[0].1
            )));
        }
    }
    Ok(())
}

/// Indicator of `seg` positions (the position mask).
pub fn seg_position_mask(seq: &TokenSequence) -> PositionMask {
    PositionMask::from_flags(seq.tokens().iter().map(Token::is_seg).collect())
}

/// Replace each `Ref { slot }` with the caller-provided token run for that
/// slot. Every `ref` slot in the sequence must have exactly one non-empty
/// replacement list, replacements may not contain `ref` or `seg` tokens, and
/// the relative order of all other tokens is preserved.
pub fn inject_ref_tokens(
    seq: &TokenSequence,
    object_tokens: &BTreeMap<u32, Vec<Token>>,
) -> Result<TokenSequence> {
    let mut used: BTreeMap<u32, bool> = object_tokens.keys().map(|k| (*k, false)).collect();
    for (slot, toks) in object_tokens {
        if toks.is_empty() {
            return Err(Error::Injection(format!(
                "replacement for slot {slot} is empty (need at least one token)"
            )));
        }
        if toks.iter().any(|t| t.is_ref() || t.is_seg()) {
            return Err(Error::Injection(format!(
                "replacement for slot {slot} may not contain ref or seg tokens"
            )));
        }
    }

    let mut out = Vec::with_capacity(seq.len());
    for tok in seq.tokens() {
        match *tok {
            Token::Ref { slot } => {
                let toks = object_tokens.get(&slot).ok_or_else(|| {
                    Error::Injection(format!("no replacement tokens for ref slot {slot}"))
                })?;
                used.insert(slot, true);
                out.extend_from_slice(toks);
            }
            other => out.push(other),
        }
    }
    if let Some((slot, _)) = used.iter().find(|(_, u)| !**u) {
        return Err(Error::Injection(format!(
            "replacement list for slot {slot} matches no ref token in the sequence"
        )));
    }
    TokenSequence::new(out, seq.timeline().copied())
}

/// Gather the rows of `h` at the mask's set positions, in sequence order.
/// Equivalent to zeroing unmasked rows and dropping them.
pub fn gather_seg_embeddings<F: Real>(h: &Matrix<F>, mask: &PositionMask) -> Result<Matrix<F>> {
    if mask.len() != h.rows() {
        return Err(Error::Shape(format!(
            "position mask length {} does not match {} hidden rows",
            mask.len(),
            h.rows()
        )));
    }
    let positions = mask.positions();
    let mut out = Matrix::zeros(positions.len(), h.cols());
    for (r, &p) in positions.iter().enumerate() {
        out.row_mut(r).copy_from_slice(h.row(p));
    }
    Ok(out)
}
