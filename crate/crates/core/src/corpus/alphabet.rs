//! Unified character alphabet and transcript normalisation.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::manifest::DatasetManifest;
use super::CorpusError;

/// Character standing in for `[UNK]` inside normalised strings. Using a
/// real code point keeps normalised text a plain `String`, which makes
/// normalisation idempotent.
pub const UNK_CHAR: char = '\u{FFFD}';

/// Special tokens, always the first four alphabet entries.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Special {
    Bos = 0,
    Pad = 1,
    Unk = 2,
    Eos = 3,
}

impl Special {
    pub const ALL: [Special; 4] = [Special::Bos, Special::Pad, Special::Unk, Special::Eos];

    pub fn token(self) -> &'static str {
        match self {
            Special::Bos => "[BOS]",
            Special::Pad => "[PAD]",
            Special::Unk => "[UNK]",
            Special::Eos => "[EOS]",
        }
    }
}

/// Ordered symbol inventory: four specials followed by characters sorted by
/// code point.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Alphabet {
    symbols: Vec<char>,
}

impl Alphabet {
    /// Builds an alphabet from plain characters; specials are implicit.
    pub fn new(symbols: impl IntoIterator<Item = char>) -> Result<Self, CorpusError> {
        let symbols: Vec<char> = symbols.into_iter().collect();
        let mut seen = BTreeSet::new();
        for &c in &symbols {
            if c == UNK_CHAR {
                return Err(CorpusError::InvalidAlphabet(
                    "the unknown-symbol placeholder cannot be a regular symbol".into(),
                ));
            }
            if !seen.insert(c) {
                return Err(CorpusError::InvalidAlphabet(format!("duplicate symbol {c:?}")));
            }
        }
        Ok(Self { symbols })
    }

    /// Alphabet of printable ASCII (space through `~`).
    pub fn printable_ascii() -> Self {
        Self {
            symbols: (' '..='~').collect(),
        }
    }

    /// Total size including the four specials.
    pub fn len(&self) -> usize {
        Special::ALL.len() + self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Regular (non-special) symbols in order.
    pub fn symbols(&self) -> &[char] {
        &self.symbols
    }

    pub fn contains(&self, c: char) -> bool {
        self.symbols.contains(&c)
    }

    /// Index of a character in the full alphabet (specials first).
    pub fn index_of(&self, c: char) -> usize {
        if c == UNK_CHAR {
            return Special::Unk as usize;
        }
        match self.symbols.iter().position(|&s| s == c) {
            Some(i) => i + Special::ALL.len(),
            None => Special::Unk as usize,
        }
    }

    /// Display form of entry `i`.
    pub fn token(&self, i: usize) -> String {
        match i {
            0..=3 => Special::ALL[i].token().to_string(),
            _ => self.symbols[i - Special::ALL.len()].to_string(),
        }
    }

    /// Renders a normalised string with `[UNK]` spelled out.
    pub fn render(&self, normalized: &str) -> String {
        normalized.replace(UNK_CHAR, Special::Unk.token())
    }
}

impl fmt::Display for Alphabet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len() {
            if i > 0 {
                f.write_str(" ")?;
            }
            f.write_str(&self.token(i))?;
        }
        Ok(())
    }
}

/// ASCII fold for Latin-1 letters and common typographic punctuation.
/// Returns `None` when the character has no entry.
pub fn fold_char(c: char) -> Option<&'static str> {
    let s = match c {
        'À' | 'Á' | 'Â' | 'Ã' | 'Ä' | 'Å' => "A",
        'à' | 'á' | 'â' | 'ã' | 'ä' | 'å' => "a",
        'Æ' => "AE",
        'æ' => "ae",
        'Ç' => "C",
        'ç' => "c",
        'È' | 'É' | 'Ê' | 'Ë' => "E",
        'è' | 'é' | 'ê' | 'ë' => "e",
        'Ì' | 'Í' | 'Î' | 'Ï' => "I",
        'ì' | 'í' | 'î' | 'ï' => "i",
        'Ð' => "D",
        'ð' => "d",
        'Ñ' => "N",
        'ñ' => "n",
        'Ò' | 'Ó' | 'Ô' | 'Õ' | 'Ö' | 'Ø' => "O",
        'ò' | 'ó' | 'ô' | 'õ' | 'ö' | 'ø' => "o",
        'Œ' => "OE",
        'œ' => "oe",
        'Ù' | 'Ú' | 'Û' | 'Ü' => "U",
        'ù' | 'ú' | 'û' | 'ü' => "u",
        'Ý' | 'Ÿ' => "Y",
        'ý' | 'ÿ' => "y",
        'Þ' => "Th",
        'þ' => "th",
        'ß' => "ss",
        '\u{2018}' | '\u{2019}' | '\u{201A}' | '\u{2032}' | '´' | '`' => "'",
        '\u{201C}' | '\u{201D}' | '\u{201E}' | '«' | '»' | '\u{2033}' => "\"",
        '\u{2010}' | '\u{2011}' | '\u{2012}' | '\u{2013}' | '\u{2014}' | '\u{2212}' => "-",
        '\u{2026}' => "...",
        '\u{00A0}' | '\u{2002}' | '\u{2003}' | '\u{2009}' | '\t' => " ",
        '¡' => "!",
        '¿' => "?",
        '·' | '\u{2022}' => ".",
        '×' => "x",
        '÷' => "/",
        '¢' => "c",
        '£' => "L",
        '°' | 'º' => "o",
        'ª' => "a",
        '¹' => "1",
        '²' => "2",
        '³' => "3",
        _ => return None,
    };
    Some(s)
}

/// Maps `raw` onto `alphabet`: characters already in the alphabet are kept,
/// others are ASCII-folded and any folded character still missing becomes
/// [`UNK_CHAR`].
pub fn normalize_text(raw: &str, alphabet: &Alphabet) -> String {
    let mut out = String::with_capacity(raw.len());
    for c in raw.chars() {
        if c == UNK_CHAR || alphabet.contains(c) {
            out.push(c);
            continue;
        }
        match fold_char(c) {
            Some(folded) => {
                for f in folded.chars() {
                    out.push(if alphabet.contains(f) { f } else { UNK_CHAR });
                }
            }
            None => out.push(UNK_CHAR),
        }
    }
    out
}

/// ASCII fold without an alphabet: unfoldable characters pass through.
pub fn transliterate(raw: &str) -> String {
    let mut out = String::with_capacity(raw.len());
    for c in raw.chars() {
        match fold_char(c) {
            Some(f) => out.push_str(f),
            None => out.push(c),
        }
    }
    out
}

/// Union of transliterated transcript symbols across every corpus, sorted by
/// code point.
pub fn build_alphabet(corpora: &[DatasetManifest]) -> Result<Alphabet, CorpusError> {
    if corpora.is_empty() {
        return Err(CorpusError::NoCorpora);
    }
    let mut set = BTreeSet::new();
    for m in corpora {
        for text in m.all_texts() {
            set.extend(transliterate(text).chars().filter(|&c| c != UNK_CHAR));
        }
    }
    Alphabet::new(set)
}
