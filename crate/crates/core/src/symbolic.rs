//! Alphabets, words and cylinder indexing.
//!
//! A word `w = w_1 ... w_n` over an alphabet of size `k` is identified with the
//! cylinder `[w]` and encoded big-endian in base `k`: the leftmost symbol is
//! most significant, so lexicographic order on `A^n` coincides with numeric
//! order on codes.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::capacity;
use crate::error::{domain, Error, Result};

/// Ordered list of distinct symbol labels.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<String>", into = "Vec<String>")]
pub struct Alphabet {
    symbols: Vec<String>,
}

impl Alphabet {
    pub fn new<S: Into<String>>(symbols: impl IntoIterator<Item = S>) -> Result<Self> {
        let symbols: Vec<String> = symbols.into_iter().map(Into::into).collect();
        if symbols.len() < 2 {
            return domain(format!(
                "an alphabet needs at least two symbols, got {}",
                symbols.len()
            ));
        }
        for (i, s) in symbols.iter().enumerate() {
            if symbols[..i].contains(s) {
                return domain(format!("duplicate symbol label {s:?}"));
            }
        }
        Ok(Self { symbols })
    }

    /// Alphabet labelled `"0"`, `"1"`, ..., `"k-1"`.
    pub fn numeric(size: usize) -> Result<Self> {
        Self::new((0..size).map(|i| i.to_string()))
    }

    pub fn size(&self) -> usize {
        self.symbols.len()
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn label(&self, index: usize) -> &str {
        &self.symbols[index]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.symbols.iter().position(|s| s == label)
    }

    /// Parses a word written as a concatenation of single-character labels,
    /// or as labels separated by whitespace or commas.
    pub fn parse_word(&self, text: &str) -> Result<Word> {
        let tokens: Vec<&str> = if text.contains([' ', ',']) {
            text.split([' ', ',']).filter(|t| !t.is_empty()).collect()
        } else {
            text.char_indices()
                .map(|(i, c)| &text[i..i + c.len_utf8()])
                .collect()
        };
        let symbols = tokens
            .iter()
            .map(|t| {
                self.index_of(t)
                    .ok_or_else(|| Error::Domain(format!("symbol {t:?} not in alphabet")))
            })
            .collect::<Result<Vec<_>>>()?;
        Word::new(self.size(), symbols)
    }

    pub fn format_word(&self, word: &Word) -> String {
        let single = self.symbols.iter().all(|s| s.chars().count() == 1);
        let labels = word.symbols().iter().map(|&s| self.label(s));
        if single {
            labels.collect()
        } else {
            labels.collect::<Vec<_>>().join(" ")
        }
    }
}

impl TryFrom<Vec<String>> for Alphabet {
    type Error = Error;

    fn try_from(v: Vec<String>) -> Result<Self> {
        Alphabet::new(v)
    }
}

impl From<Alphabet> for Vec<String> {
    fn from(a: Alphabet) -> Self {
        a.symbols
    }
}

/// Finite word over an alphabet of size `radix`, stored as symbol indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word {
    radix: usize,
    symbols: Vec<usize>,
}

impl Word {
    pub fn new(radix: usize, symbols: Vec<usize>) -> Result<Self> {
        if radix < 2 {
            return domain("alphabet size must be at least 2");
        }
        if let Some(&bad) = symbols.iter().find(|&&s| s >= radix) {
            return domain(format!("symbol index {bad} out of range for alphabet of size {radix}"));
        }
        Ok(Self { radix, symbols })
    }

    pub fn empty(radix: usize) -> Self {
        Self {
            radix,
            symbols: Vec::new(),
        }
    }

    pub fn radix(&self) -> usize {
        self.radix
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> &[usize] {
        &self.symbols
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.symbols.iter().enumerate() {
            if self.radix > 10 && i > 0 {
                write!(f, ".")?;
            }
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

/// Integer address of a cylinder of a given length.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CylinderIndex {
    pub length: usize,
    pub code: u64,
}

/// Big-endian base-`radix` code of a symbol slice. Callers guarantee that
/// `radix^len` fits in `u64`.
pub fn code_of(radix: usize, symbols: &[usize]) -> u64 {
    symbols
        .iter()
        .fold(0u64, |acc, &s| acc * radix as u64 + s as u64)
}

/// Writes the `len` digits of `code` into `out` (big-endian).
pub fn digits_into(radix: usize, mut code: u64, out: &mut [usize]) {
    for slot in out.iter_mut().rev() {
        *slot = (code % radix as u64) as usize;
        code /= radix as u64;
    }
}

pub fn encode_word(word: &Word) -> Result<CylinderIndex> {
    if capacity::power(word.radix, word.len()) > u64::MAX as u128 + 1 {
        return Err(Error::Capacity {
            what: "cylinder code".into(),
            requested: capacity::power(word.radix, word.len()),
            limit: u64::MAX,
        });
    }
    Ok(CylinderIndex {
        length: word.len(),
        code: code_of(word.radix, &word.symbols),
    })
}

pub fn decode_word(index: CylinderIndex, alphabet: &Alphabet) -> Result<Word> {
    let radix = alphabet.size();
    let count = capacity::power(radix, index.length);
    if index.code as u128 >= count {
        return domain(format!(
            "code {} out of range for words of length {} over {} symbols",
            index.code, index.length, radix
        ));
    }
    let mut symbols = vec![0; index.length];
    digits_into(radix, index.code, &mut symbols);
    Ok(Word { radix, symbols })
}

/// Lexicographically ordered stream of all words of length `n`.
#[derive(Debug, Clone)]
pub struct Words {
    radix: usize,
    next: Option<Vec<usize>>,
    remaining: u64,
}

impl Iterator for Words {
    type Item = Word;

    fn next(&mut self) -> Option<Word> {
        let current = self.next.take()?;
        self.remaining -= 1;
        if self.remaining > 0 {
            let mut succ = current.clone();
            for slot in succ.iter_mut().rev() {
                *slot += 1;
                if *slot < self.radix {
                    break;
                }
                *slot = 0;
            }
            self.next = Some(succ);
        }
        Some(Word {
            radix: self.radix,
            symbols: current,
        })
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let r = self.remaining as usize;
        (r, Some(r))
    }
}

impl ExactSizeIterator for Words {}

/// Enumerates `A^n` in strictly increasing lexicographic order.
pub fn enumerate_words(alphabet: &Alphabet, n: usize) -> Result<Words> {
    let count = capacity::power(alphabet.size(), n);
    if count > u64::MAX as u128 {
        return Err(Error::Capacity {
            what: "word enumeration".into(),
            requested: count,
            limit: u64::MAX,
        });
    }
    Ok(Words {
        radix: alphabet.size(),
        next: Some(vec![0; n]),
        remaining: count as u64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn abc() -> Alphabet {
        Alphabet::new(["a", "b", "c"]).unwrap()
    }

    #[test]
    fn encode_examples() {
        let bin = Alphabet::numeric(2).unwrap();
        let w = bin.parse_word("01").unwrap();
        assert_eq!(encode_word(&w).unwrap(), CylinderIndex { length: 2, code: 1 });
        let e = Word::empty(2);
        assert_eq!(encode_word(&e).unwrap(), CylinderIndex { length: 0, code: 0 });
        let cb = abc().parse_word("cb").unwrap();
        assert_eq!(encode_word(&cb).unwrap().code, 7);
    }

    #[test]
    fn decode_examples() {
        let bin = Alphabet::numeric(2).unwrap();
        let w = decode_word(CylinderIndex { length: 2, code: 3 }, &bin).unwrap();
        assert_eq!(bin.format_word(&w), "11");
        let w = decode_word(CylinderIndex { length: 3, code: 0 }, &bin).unwrap();
        assert_eq!(bin.format_word(&w), "000");
        let w = decode_word(CylinderIndex { length: 2, code: 7 }, &abc()).unwrap();
        assert_eq!(abc().format_word(&w), "cb");
    }

    #[test]
    fn decode_rejects_out_of_range() {
        let bin = Alphabet::numeric(2).unwrap();
        assert!(matches!(
            decode_word(CylinderIndex { length: 2, code: 4 }, &bin),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn enumerate_examples() {
        let bin = Alphabet::numeric(2).unwrap();
        let words: Vec<String> = enumerate_words(&bin, 2)
            .unwrap()
            .map(|w| bin.format_word(&w))
            .collect();
        assert_eq!(words, ["00", "01", "10", "11"]);
        let empty: Vec<Word> = enumerate_words(&bin, 0).unwrap().collect();
        assert_eq!(empty, vec![Word::empty(2)]);
        let tri = Alphabet::numeric(3).unwrap();
        let words: Vec<Word> = enumerate_words(&tri, 3).unwrap().collect();
        assert_eq!(words.len(), 27);
        assert_eq!(tri.format_word(&words[0]), "000");
        assert_eq!(tri.format_word(&words[26]), "222");
    }

    #[test]
    fn enumerate_overflow_is_capacity_error() {
        let bin = Alphabet::numeric(2).unwrap();
        assert!(enumerate_words(&bin, 63).is_ok());
        assert!(matches!(enumerate_words(&bin, 64), Err(Error::Capacity { .. })));
    }

    #[test]
    fn round_trip_exhaustive_small() {
        for k in 2..=4 {
            let a = Alphabet::numeric(k).unwrap();
            let max_len = if k == 2 { 12 } else if k == 3 { 9 } else { 7 };
            for n in 0..=max_len {
                let mut prev: Option<Word> = None;
                let mut count = 0u64;
                for (i, w) in enumerate_words(&a, n).unwrap().enumerate() {
                    let idx = encode_word(&w).unwrap();
                    assert_eq!(idx.code, i as u64);
                    assert_eq!(decode_word(idx, &a).unwrap(), w);
                    if let Some(p) = &prev {
                        assert!(p < &w);
                    }
                    prev = Some(w);
                    count += 1;
                }
                assert_eq!(count as u128, capacity::power(k, n));
            }
        }
    }

    #[test]
    fn round_trip_exhaustive_to_length_12() {
        let mut buf = [0usize; 12];
        for k in 2..=4usize {
            for n in 0..=12 {
                let count = capacity::power(k, n) as u64;
                for code in 0..count {
                    digits_into(k, code, &mut buf[..n]);
                    assert_eq!(code_of(k, &buf[..n]), code);
                }
            }
        }
    }

    #[test]
    fn alphabet_validation() {
        assert!(Alphabet::new(["x"]).is_err());
        assert!(Alphabet::new(["x", "x"]).is_err());
        let a: Alphabet = serde_json::from_str(r#"["-1","1"]"#).unwrap();
        assert_eq!(a.size(), 2);
        assert!(serde_json::from_str::<Alphabet>(r#"["1","1"]"#).is_err());
        let w = a.parse_word("-1 1 1").unwrap();
        assert_eq!(w.symbols(), &[0, 1, 1]);
        assert_eq!(a.format_word(&w), "-1 1 1");
    }

    proptest::proptest! {
        #[test]
        fn round_trip_length_12_radix_4(k in 2usize..=4, syms in proptest::collection::vec(0usize..4, 0..=12)) {
            let syms: Vec<usize> = syms.into_iter().map(|s| s % k).collect();
            let a = Alphabet::numeric(k).unwrap();
            let w = Word::new(k, syms).unwrap();
            let idx = encode_word(&w).unwrap();
            proptest::prop_assert_eq!(decode_word(idx, &a).unwrap(), w);
        }
    }
}
