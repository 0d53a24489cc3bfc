//! Readability and lexical-diversity metrics.
//!
//! Words come from Unicode word segmentation and are lowercased. Syllables
//! are counted as vowel groups with a silent-e adjustment.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use unicode_segmentation::UnicodeSegmentation;

pub const MTLD_THRESHOLD: f64 = 0.72;
/// Below this many tokens MTLD reports the token count.
pub const MTLD_MIN_TOKENS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("text has no words")]
pub struct EmptyText;

pub fn tokens(text: &str) -> Vec<String> {
    text.unicode_words().map(|w| w.to_lowercase()).collect()
}

pub fn sentence_count(text: &str) -> usize {
    // the segmenter panics on empty input
    if text.trim().is_empty() {
        return 0;
    }
    text.unicode_sentences().filter(|s| s.unicode_words().next().is_some()).count()
}

pub fn syllables(word: &str) -> usize {
    let lower: Vec<char> = word.to_lowercase().chars().filter(|c| c.is_alphabetic()).collect();
    if lower.is_empty() {
        return 0;
    }
    let is_vowel = |c: char| matches!(c, 'a' | 'e' | 'i' | 'o' | 'u' | 'y');
    let mut groups = 0;
    let mut prev = false;
    for &c in &lower {
        let v = is_vowel(c);
        if v && !prev {
            groups += 1;
        }
        prev = v;
    }
    let n = lower.len();
    // silent final e, but keep the syllable in "-le" after a consonant (table, little)
    if groups > 1 && lower[n - 1] == 'e' && !is_vowel(lower[n - 2]) {
        let consonant_le = lower[n - 2] == 'l' && n >= 3 && !is_vowel(lower[n - 3]);
        if !consonant_le {
            groups -= 1;
        }
    }
    groups.max(1)
}

pub fn fkgl_from_counts(words: usize, sentences: usize, syllables: usize) -> Result<f64, EmptyText> {
    if words == 0 || sentences == 0 {
        return Err(EmptyText);
    }
    Ok(0.39 * (words as f64 / sentences as f64) + 11.8 * (syllables as f64 / words as f64) - 15.59)
}

pub fn fkgl(text: &str) -> Result<f64, EmptyText> {
    let words: Vec<&str> = text.unicode_words().collect();
    let syl = words.iter().map(|w| syllables(w)).sum();
    fkgl_from_counts(words.len(), sentence_count(text), syl)
}

pub fn ttr<S: AsRef<str>>(tokens: &[S]) -> Result<f64, EmptyText> {
    if tokens.is_empty() {
        return Err(EmptyText);
    }
    Ok(vocab(tokens) as f64 / tokens.len() as f64)
}

pub fn vocab<S: AsRef<str>>(tokens: &[S]) -> usize {
    tokens.iter().map(|t| t.as_ref()).collect::<BTreeSet<_>>().len()
}

/// Unique adjacent bigrams over all bigrams; a single token counts as 1.0.
pub fn ubr<S: AsRef<str>>(tokens: &[S]) -> Result<f64, EmptyText> {
    if tokens.is_empty() {
        return Err(EmptyText);
    }
    if tokens.len() == 1 {
        return Ok(1.0);
    }
    let pairs: Vec<(&str, &str)> = tokens.windows(2).map(|w| (w[0].as_ref(), w[1].as_ref())).collect();
    let unique: BTreeSet<_> = pairs.iter().collect();
    Ok(unique.len() as f64 / pairs.len() as f64)
}

fn mtld_pass<'a>(tokens: impl Iterator<Item = &'a str>, len: usize) -> f64 {
    let mut factors = 0.0;
    let mut types = BTreeSet::new();
    let mut count = 0usize;
    let mut ratio = 1.0;
    for t in tokens {
        types.insert(t);
        count += 1;
        ratio = types.len() as f64 / count as f64;
        if ratio <= MTLD_THRESHOLD {
            factors += 1.0;
            types.clear();
            count = 0;
            ratio = 1.0;
        }
    }
    if count > 0 {
        factors += (1.0 - ratio) / (1.0 - MTLD_THRESHOLD);
    }
    if factors == 0.0 {
        len as f64
    } else {
        len as f64 / factors
    }
}

/// Mean of the forward and backward MTLD passes.
pub fn mtld<S: AsRef<str>>(tokens: &[S]) -> Result<f64, EmptyText> {
    if tokens.is_empty() {
        return Err(EmptyText);
    }
    if tokens.len() < MTLD_MIN_TOKENS {
        return Ok(tokens.len() as f64);
    }
    let forward = mtld_pass(tokens.iter().map(|t| t.as_ref()), tokens.len());
    let backward = mtld_pass(tokens.iter().rev().map(|t| t.as_ref()), tokens.len());
    Ok((forward + backward) / 2.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub fkgl: f64,
    pub ttr: f64,
    pub mtld: f64,
    pub ubr: f64,
    pub vocab_size: usize,
    pub token_count: usize,
    pub sentence_count: usize,
    pub syllable_count: usize,
}

pub fn corpus_stats(text: &str) -> Result<CorpusStats, EmptyText> {
    let toks = tokens(text);
    let syllable_count = toks.iter().map(|w| syllables(w)).sum();
    let sentences = sentence_count(text);
    Ok(CorpusStats {
        fkgl: fkgl_from_counts(toks.len(), sentences, syllable_count)?,
        ttr: ttr(&toks)?,
        mtld: mtld(&toks)?,
        ubr: ubr(&toks)?,
        vocab_size: vocab(&toks),
        token_count: toks.len(),
        sentence_count: sentences,
        syllable_count,
    })
}
