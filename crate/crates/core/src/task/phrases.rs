use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

const BUNDLED: &str = include_str!("../../data/phrases.txt");

/// Warm-up phrases shown to every participant before the test phrases.
pub const PRACTICE_PHRASES: [&str; 2] = ["the dog sat by the door", "a cup of warm tea helps"];

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PhraseError {
    #[error("line {line}: phrases may only contain lowercase letters and single spaces")]
    InvalidPhrase { line: usize },
    #[error("need {needed} phrases within the length bounds, corpus has {available}")]
    InsufficientCorpus { needed: usize, available: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhraseSet {
    pub phrases: Vec<String>,
    pub source: String,
}

impl PhraseSet {
    /// One phrase per line; blank lines are skipped.
    pub fn parse(text: &str, source: &str) -> Result<PhraseSet, PhraseError> {
        let mut phrases = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let valid =
                line.chars().all(|c| c.is_ascii_lowercase() || c == ' ') && !line.contains("  ");
            if !valid {
                return Err(PhraseError::InvalidPhrase { line: i + 1 });
            }
            phrases.push(line.to_string());
        }
        Ok(PhraseSet {
            phrases,
            source: source.to_string(),
        })
    }

    pub fn bundled() -> PhraseSet {
        PhraseSet::parse(BUNDLED, "bundled").expect("bundled corpus is valid")
    }
}

/// Draws `count` distinct phrases whose lengths lie in `bounds` (inclusive),
/// never returning a practice phrase. Deterministic in `seed`.
pub fn sample_phrases(
    set: &PhraseSet,
    count: usize,
    seed: u64,
    bounds: (usize, usize),
) -> Result<Vec<String>, PhraseError> {
    let mut pool: Vec<&String> = set
        .phrases
        .iter()
        .filter(|p| (bounds.0..=bounds.1).contains(&p.len()))
        .filter(|p| !PRACTICE_PHRASES.contains(&p.as_str()))
        .collect();
    pool.sort();
    pool.dedup();
    if pool.len() < count {
        return Err(PhraseError::InsufficientCorpus {
            needed: count,
            available: pool.len(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    pool.shuffle(&mut rng);
    Ok(pool.into_iter().take(count).cloned().collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_corpus_is_large_enough() {
        let set = PhraseSet::bundled();
        assert!(set.phrases.len() >= 500);
        let in_bounds = set
            .phrases
            .iter()
            .filter(|p| (25..=28).contains(&p.len()))
            .count();
        assert!(in_bounds >= 100);
    }

    #[test]
    fn sampling_is_bounded_and_deterministic() {
        let set = PhraseSet::bundled();
        let a = sample_phrases(&set, 5, 11, (25, 28)).unwrap();
        assert_eq!(a.len(), 5);
        assert!(a.iter().all(|p| (25..=28).contains(&p.len())));
        assert_eq!(a, sample_phrases(&set, 5, 11, (25, 28)).unwrap());
        assert_ne!(a, sample_phrases(&set, 5, 12, (25, 28)).unwrap());
    }

    #[test]
    fn practice_phrases_are_never_drawn() {
        let mut set = PhraseSet::bundled();
        set.phrases
            .extend(PRACTICE_PHRASES.iter().map(|p| p.to_string()));
        for seed in 0..50 {
            let all = sample_phrases(&set, 100, seed, (1, 100)).unwrap();
            assert!(all.iter().all(|p| !PRACTICE_PHRASES.contains(&p.as_str())));
        }
    }

    #[test]
    fn impossible_bounds() {
        let err = sample_phrases(&PhraseSet::bundled(), 5, 0, (200, 300)).unwrap_err();
        assert_eq!(
            err,
            PhraseError::InsufficientCorpus {
                needed: 5,
                available: 0
            }
        );
    }

    #[test]
    fn rejects_bad_lines() {
        assert_eq!(
            PhraseSet::parse("fine line\nNot Fine\n", "t"),
            Err(PhraseError::InvalidPhrase { line: 2 })
        );
    }
}
