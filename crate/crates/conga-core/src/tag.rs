//! Inline gender-tag grammar and tagged-sentence parsing.
//!
//! The machine format is deliberately small. A line is a sequence of
//! whitespace-delimited chunks; a chunk that matches
//!
//! ```text
//! TAG    := "<" ("M" | "F" | "A") POSINT ">"
//! POSINT := nonzero digit followed by digits
//! ```
//!
//! is a tag and binds to the nearest preceding non-tag chunk; every other
//! chunk is a token. Tags are case-sensitive (`<f1>` is not a tag) and a
//! chunk that is bracketed like a tag but does not match the grammar is a
//! hard parse error rather than a token, so typos cannot silently vanish
//! from downstream counts.
//!
//! Tokenization is the corpus author's job: the parser never splits clitics
//! or detaches punctuation. `you're` stays one token; to tag it, write
//! `you <A1> 're`.

use std::collections::BTreeMap;
use std::fmt;
use std::num::NonZeroU32;
use std::str::FromStr;

use thiserror::Error;

/// Contextual gender class carried by a tag.
///
/// `Ambiguous` is representable everywhere; whether it is *legal* on a given
/// side is a guideline question answered by the validator, not the grammar.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GenderClass {
    Masculine,
    Feminine,
    Ambiguous,
}

impl GenderClass {
    /// The single-letter form used inside tags and reports.
    pub fn letter(self) -> char {
        match self {
            GenderClass::Masculine => 'M',
            GenderClass::Feminine => 'F',
            GenderClass::Ambiguous => 'A',
        }
    }

    pub fn from_letter(c: char) -> Option<Self> {
        match c {
            'M' => Some(GenderClass::Masculine),
            'F' => Some(GenderClass::Feminine),
            'A' => Some(GenderClass::Ambiguous),
            _ => None,
        }
    }

    /// Narrows to a realized (binary) gender; `None` for `Ambiguous`.
    pub fn as_realized(self) -> Option<RealizedGender> {
        match self {
            GenderClass::Masculine => Some(RealizedGender::Masculine),
            GenderClass::Feminine => Some(RealizedGender::Feminine),
            GenderClass::Ambiguous => None,
        }
    }
}

impl fmt::Display for GenderClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GenderClass::Masculine => "M",
            GenderClass::Feminine => "F",
            GenderClass::Ambiguous => "A",
        })
    }
}

/// A gender actually realised in morphology: masculine or feminine only.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RealizedGender {
    Masculine,
    Feminine,
}

impl RealizedGender {
    pub fn letter(self) -> char {
        match self {
            RealizedGender::Masculine => 'M',
            RealizedGender::Feminine => 'F',
        }
    }

    pub fn class(self) -> GenderClass {
        match self {
            RealizedGender::Masculine => GenderClass::Masculine,
            RealizedGender::Feminine => GenderClass::Feminine,
        }
    }

    /// Both values, masculine first — the fixed report order.
    pub const BOTH: [RealizedGender; 2] = [RealizedGender::Masculine, RealizedGender::Feminine];
}

impl fmt::Display for RealizedGender {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

/// One-based identifier linking every mention of one animate referent within
/// a sentence pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EntityIndex(NonZeroU32);

impl EntityIndex {
    pub fn new(raw: u32) -> Option<Self> {
        NonZeroU32::new(raw).map(EntityIndex)
    }

    pub fn get(self) -> u32 {
        self.0.get()
    }
}

impl fmt::Display for EntityIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// One inline annotation: a gender class plus the entity it belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GenderTag {
    pub gender: GenderClass,
    pub entity: EntityIndex,
}

impl GenderTag {
    pub fn new(gender: GenderClass, entity: EntityIndex) -> Self {
        GenderTag { gender, entity }
    }
}

impl fmt::Display for GenderTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{}{}>", self.gender.letter(), self.entity)
    }
}

/// Why a surface string cannot be a token.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TokenError {
    #[error("token surface must be non-empty")]
    Empty,
    #[error("token surface {0:?} contains whitespace")]
    Whitespace(String),
    #[error("token surface {0:?} is bracketed like a tag and would not survive a parse round-trip")]
    TagLike(String),
}

/// A token with at most one tag bound to it.
///
/// The surface is guaranteed non-empty, whitespace-free and not bracketed
/// like a tag (`<...>`), which is exactly what makes serialization followed
/// by parsing an identity.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TaggedToken {
    surface: String,
    pub tag: Option<GenderTag>,
}

impl TaggedToken {
    pub fn new(surface: impl Into<String>, tag: Option<GenderTag>) -> Result<Self, TokenError> {
        let surface = surface.into();
        if surface.is_empty() {
            return Err(TokenError::Empty);
        }
        if surface.chars().any(char::is_whitespace) {
            return Err(TokenError::Whitespace(surface));
        }
        if surface.starts_with('<') && surface.ends_with('>') {
            return Err(TokenError::TagLike(surface));
        }
        Ok(TaggedToken { surface, tag })
    }

    pub fn surface(&self) -> &str {
        &self.surface
    }
}

/// An ordered token sequence, the parse result of one annotated line.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct TaggedSentence {
    pub tokens: Vec<TaggedToken>,
}

impl TaggedSentence {
    pub fn new(tokens: Vec<TaggedToken>) -> Self {
        TaggedSentence { tokens }
    }

    pub fn parse(text: &str) -> Result<Self, ParseTagError> {
        parse_tagged(text)
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Iterator over `(token position, tag)` for the tagged tokens only.
    pub fn tags(&self) -> impl Iterator<Item = (usize, GenderTag)> + '_ {
        self.tokens
            .iter()
            .enumerate()
            .filter_map(|(pos, tok)| tok.tag.map(|t| (pos, t)))
    }

    pub fn tag_count(&self) -> usize {
        self.tags().count()
    }

    /// Groups tag mentions by entity: index -> ordered `(position, gender)`.
    ///
    /// Buckets preserve token order and untagged tokens never appear, so the
    /// bucket sizes always sum to [`TaggedSentence::tag_count`].
    pub fn entity_map(&self) -> BTreeMap<EntityIndex, Vec<(usize, GenderClass)>> {
        let mut map: BTreeMap<EntityIndex, Vec<(usize, GenderClass)>> = BTreeMap::new();
        for (pos, tag) in self.tags() {
            map.entry(tag.entity).or_default().push((pos, tag.gender));
        }
        map
    }
}

impl fmt::Display for TaggedSentence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for token in &self.tokens {
            if !first {
                f.write_str(" ")?;
            }
            first = false;
            f.write_str(&token.surface)?;
            if let Some(tag) = token.tag {
                write!(f, " {tag}")?;
            }
        }
        Ok(())
    }
}

impl FromStr for TaggedSentence {
    type Err = ParseTagError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_tagged(s)
    }
}

/// Parse failure, with the byte offset of the offending chunk.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseTagError {
    #[error("tag at byte {offset} has no preceding token to bind to")]
    TagAtSentenceStart { offset: usize },
    #[error("second tag at byte {offset} would bind to a token that is already tagged")]
    DoubleTag { offset: usize },
    #[error("malformed tag {chunk:?} at byte {offset}")]
    MalformedTag { offset: usize, chunk: String },
}

impl ParseTagError {
    pub fn offset(&self) -> usize {
        match self {
            ParseTagError::TagAtSentenceStart { offset }
            | ParseTagError::DoubleTag { offset }
            | ParseTagError::MalformedTag { offset, .. } => *offset,
        }
    }
}

/// Parses one annotated line into a [`TaggedSentence`].
///
/// Deterministic: identical input bytes give an identical structure, and the
/// number of tags in the output equals the number of grammar-matching chunks
/// in the input.
pub fn parse_tagged(text: &str) -> Result<TaggedSentence, ParseTagError> {
    let mut tokens: Vec<TaggedToken> = Vec::new();
    for (offset, chunk) in chunks_with_offsets(text) {
        if let Some(tag) = parse_tag_chunk(chunk) {
            match tokens.last_mut() {
                None => return Err(ParseTagError::TagAtSentenceStart { offset }),
                Some(token) if token.tag.is_some() => {
                    return Err(ParseTagError::DoubleTag { offset })
                }
                Some(token) => token.tag = Some(tag),
            }
        } else if chunk.starts_with('<') && chunk.ends_with('>') {
            return Err(ParseTagError::MalformedTag {
                offset,
                chunk: chunk.to_string(),
            });
        } else {
            // Chunk surfaces are non-empty, whitespace-free and not
            // bracket-shaped by construction here, so this cannot fail.
            let token = TaggedToken::new(chunk, None).expect("chunk is a valid token surface");
            tokens.push(token);
        }
    }
    Ok(TaggedSentence { tokens })
}

/// Serializes a sentence back into the single-space-joined line format.
///
/// `parse_tagged(&serialize_tagged(s)) == s` for every sentence that can be
/// constructed through [`TaggedToken::new`].
pub fn serialize_tagged(sentence: &TaggedSentence) -> String {
    sentence.to_string()
}

/// Splits on Unicode whitespace, yielding each chunk with its byte offset.
fn chunks_with_offsets(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.split_whitespace().map(move |chunk| {
        // split_whitespace yields subslices of `text`, so pointer arithmetic
        // recovers the byte offset without a second scan.
        let offset = chunk.as_ptr() as usize - text.as_ptr() as usize;
        (offset, chunk)
    })
}

/// Returns the tag if `chunk` matches the grammar exactly, else `None`.
fn parse_tag_chunk(chunk: &str) -> Option<GenderTag> {
    let body = chunk.strip_prefix('<')?.strip_suffix('>')?;
    let mut chars = body.chars();
    let gender = GenderClass::from_letter(chars.next()?)?;
    let digits = chars.as_str();
    let mut digit_chars = digits.chars();
    let first = digit_chars.next()?;
    if !('1'..='9').contains(&first) || !digit_chars.all(|c| c.is_ascii_digit()) {
        return None;
    }
    let raw: u32 = digits.parse().ok()?;
    Some(GenderTag::new(gender, EntityIndex::new(raw)?))
}
