use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::SessionError;

pub const MC_OPTION_COUNT: usize = 6;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct McQuestion {
    pub question: String,
    pub options: Vec<String>,
    pub correct_index: usize,
}

/// One stimulus text.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TextItem {
    pub id: String,
    pub body: String,
    pub category: String,
    pub expected_detections: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mc: Option<McQuestion>,
}

impl TextItem {
    pub fn validate(&self) -> Result<(), SessionError> {
        if super::word_count(&self.body) == 0 {
            return Err(SessionError::InvalidConfig(format!("text {:?} is empty", self.id)));
        }
        if let Some(mc) = &self.mc {
            if mc.options.len() != MC_OPTION_COUNT || mc.correct_index >= mc.options.len() {
                return Err(SessionError::InvalidConfig(format!(
                    "text {:?} needs {MC_OPTION_COUNT} options with one valid correct index",
                    self.id
                )));
            }
        }
        Ok(())
    }

    pub fn word_count(&self) -> usize {
        super::word_count(&self.body)
    }
}

const CATEGORIES: [&str; 6] = ["nature", "history", "science", "travel", "sports", "cooking"];
const ONSETS: [&str; 16] = [
    "b", "c", "d", "f", "g", "h", "l", "m", "n", "p", "r", "s", "t", "v", "w", "st",
];
const VOWELS: [&str; 7] = ["a", "e", "i", "o", "u", "ai", "ou"];
const CODAS: [&str; 8] = ["", "n", "r", "s", "t", "l", "m", "nd"];

fn pseudo_word(rng: &mut ChaCha8Rng) -> String {
    let syllables = rng.random_range(1..=3);
    let mut w = String::new();
    for _ in 0..syllables {
        w.push_str(ONSETS.choose(rng).unwrap());
        w.push_str(VOWELS.choose(rng).unwrap());
        w.push_str(CODAS.choose(rng).unwrap());
    }
    w
}

fn capitalize(w: &str) -> String {
    let mut c = w.chars();
    match c.next() {
        Some(f) => f.to_ascii_uppercase().to_string() + c.as_str(),
        None => String::new(),
    }
}

/// A deterministic corpus of pseudo-word texts with one multiple-choice
/// question each. Text `n / 2` has exactly 51 words; the others 120 to 220.
pub fn synthetic_texts(n: usize, seed: u64) -> Vec<TextItem> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let words = if i == n / 2 { 51 } else { rng.random_range(120..=220) };
            let mut tokens: Vec<String> = Vec::with_capacity(words);
            let mut sentence_start = true;
            for k in 0..words {
                let w = pseudo_word(&mut rng);
                let mut token = if sentence_start { capitalize(&w) } else { w };
                sentence_start = false;
                if k + 1 == words || rng.random_bool(0.08) {
                    token.push('.');
                    sentence_start = true;
                } else if rng.random_bool(0.05) {
                    token.push(',');
                }
                tokens.push(token);
            }
            let body = tokens.join(" ");
            let answer: String = tokens
                .choose(&mut rng)
                .unwrap()
                .trim_end_matches(['.', ','])
                .to_lowercase();
            let mut options = alloc::vec![answer.clone()];
            while options.len() < MC_OPTION_COUNT {
                let w = pseudo_word(&mut rng);
                if !options.contains(&w) && !body.to_lowercase().contains(&w) {
                    options.push(w);
                }
            }
            options.shuffle(&mut rng);
            let correct_index = options.iter().position(|o| *o == answer).unwrap();
            TextItem {
                id: format!("text-{i:03}"),
                body,
                category: String::from(CATEGORIES[i % CATEGORIES.len()]),
                expected_detections: rng.random_range(0..=4),
                mc: Some(McQuestion {
                    question: String::from("Which of these words appeared in the text?"),
                    options,
                    correct_index,
                }),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn synthetic_corpus_shape() {
        let texts = synthetic_texts(95, 3);
        assert_eq!(texts.len(), 95);
        assert_eq!(texts[47].word_count(), 51);
        for t in &texts {
            t.validate().unwrap();
            assert!(t.body.chars().all(|c| c.is_ascii_alphabetic() || " .,".contains(c)));
        }
        assert_eq!(texts, synthetic_texts(95, 3));
    }
}
