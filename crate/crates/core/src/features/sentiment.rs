//! Lexicon-based polarity with a two-token negation window.

use std::collections::HashMap;
use std::path::Path;

use crate::textprep::words;

const DEFAULT_LEXICON: &str = include_str!("../../data/sentiment_lexicon.tsv");

const NEGATIONS: &[&str] = &[
    "not", "no", "never", "none", "nothing", "nobody", "nor", "neither", "cannot", "without",
    "dont", "doesnt", "didnt", "isnt", "wasnt", "cant", "wont", "shouldnt", "wouldnt", "couldnt",
];

#[derive(Debug, Clone)]
pub struct Lexicon {
    terms: HashMap<String, f64>,
}

impl Lexicon {
    /// Parses `term<TAB>polarity` lines; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self, String> {
        let mut terms = HashMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (term, pol) = line
                .split_once('\t')
                .ok_or_else(|| format!("line {}: expected term<TAB>polarity", i + 1))?;
            let pol: f64 = pol
                .trim()
                .parse()
                .map_err(|e| format!("line {}: bad polarity: {e}", i + 1))?;
            if !(-1.0..=1.0).contains(&pol) {
                return Err(format!("line {}: polarity {pol} outside [-1,1]", i + 1));
            }
            terms.insert(term.trim().to_lowercase(), pol);
        }
        Ok(Lexicon { terms })
    }

    pub fn from_file(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        Self::parse(&text)
    }

    pub fn get(&self, term: &str) -> Option<f64> {
        self.terms.get(term).copied()
    }
}

impl Default for Lexicon {
    fn default() -> Self {
        Self::parse(DEFAULT_LEXICON).expect("bundled lexicon parses")
    }
}

fn is_negation(word: &str) -> bool {
    NEGATIONS.contains(&word) || word.ends_with("n't")
}

/// Mean polarity of lexicon hits; a negation within the two preceding
/// tokens flips a hit's sign. 0 when nothing matches.
pub fn sentiment_polarity(text: &str, lexicon: &Lexicon) -> f64 {
    let toks = words(text);
    let mut sum = 0.0;
    let mut hits = 0usize;
    for (i, w) in toks.iter().enumerate() {
        let Some(p) = lexicon.get(w) else { continue };
        let negated = toks[i.saturating_sub(2)..i].iter().any(|t| is_negation(t));
        sum += if negated { -p } else { p };
        hits += 1;
    }
    if hits == 0 {
        0.0
    } else {
        sum / hits as f64
    }
}
