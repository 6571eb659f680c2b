use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const TERMINATORS: [char; 3] = ['.', '!', '?'];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TextFeatures {
    pub token_count: usize,
    pub entity_count: usize,
    /// Always at least 1.
    pub sentence_count: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TextParams {
    /// Token count at which the length component saturates.
    pub l0: u64,
    /// Entities per sentence at which the entity component saturates.
    pub gamma: f64,
    pub beta_l: f64,
    pub beta_ner: f64,
}

impl TextParams {
    pub fn new(l0: u64, gamma: f64, beta_l: f64, beta_ner: f64) -> Result<Self> {
        let p = Self {
            l0,
            gamma,
            beta_l,
            beta_ner,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.l0 == 0 {
            return Err(Error::domain("text l0 must be at least 1"));
        }
        if !(self.gamma.is_finite() && self.gamma > 0.0) {
            return Err(Error::domain(format!(
                "text gamma must be positive, got {}",
                self.gamma
            )));
        }
        let betas = [self.beta_l, self.beta_ner];
        if betas.iter().any(|b| !b.is_finite() || *b < 0.0) {
            return Err(Error::domain("text weights must be non-negative"));
        }
        if (self.beta_l + self.beta_ner - 1.0).abs() > 1e-9 {
            return Err(Error::domain(format!(
                "text weights must sum to 1, got {} + {}",
                self.beta_l, self.beta_ner
            )));
        }
        Ok(())
    }
}

impl Default for TextParams {
    fn default() -> Self {
        Self {
            l0: 512,
            gamma: 3.0,
            beta_l: 0.5,
            beta_ner: 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TextComplexity {
    pub c_l: f64,
    pub c_ner: f64,
    pub total: f64,
}

/// Splits on runs of Unicode whitespace.
pub fn tokenize(text: &str) -> Vec<&str> {
    text.split_whitespace().collect()
}

/// Number of non-blank segments between runs of `.`, `!` or `?`, floored at 1.
pub fn split_sentences(text: &str) -> usize {
    text.split(TERMINATORS)
        .filter(|seg| !seg.trim().is_empty())
        .count()
        .max(1)
}

fn ends_sentence(token: &str) -> bool {
    token
        .trim_end_matches(['"', '\'', ')', ']', '}'])
        .ends_with(TERMINATORS)
}

/// Counts tokens that contain a decimal digit, or start with an uppercase
/// letter without being the first token of a sentence. A token opens a
/// sentence when it is first overall or follows a token ending in `.`, `!`
/// or `?`.
pub fn count_entities(tokens: &[&str]) -> usize {
    let mut sentence_start = true;
    let mut count = 0;
    for tok in tokens {
        let has_digit = tok.chars().any(|c| c.is_ascii_digit());
        let capitalized = tok
            .trim_start_matches(|c: char| !c.is_alphanumeric())
            .chars()
            .next()
            .is_some_and(char::is_uppercase);
        if has_digit || (capitalized && !sentence_start) {
            count += 1;
        }
        sentence_start = ends_sentence(tok);
    }
    count
}

pub fn text_features(text: &str) -> TextFeatures {
    let tokens = tokenize(text);
    TextFeatures {
        token_count: tokens.len(),
        entity_count: count_entities(&tokens),
        sentence_count: split_sentences(text),
    }
}

pub fn complexity_from_features(f: &TextFeatures, params: &TextParams) -> TextComplexity {
    let c_l = (f.token_count as f64 / params.l0 as f64).min(1.0);
    let per_sentence = f.entity_count as f64 / f.sentence_count.max(1) as f64;
    let c_ner = (per_sentence / params.gamma).min(1.0);
    TextComplexity {
        c_l,
        c_ner,
        total: (params.beta_l * c_l + params.beta_ner * c_ner).clamp(0.0, 1.0),
    }
}

pub fn text_complexity(text: &str, params: &TextParams) -> TextComplexity {
    complexity_from_features(&text_features(text), params)
}
