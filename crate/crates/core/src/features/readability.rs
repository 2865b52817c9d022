//! Flesch Reading Ease, Flesch-Kincaid grade, Coleman-Liau and ARI.

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Readability {
    pub flesch: f64,
    pub kincaid: f64,
    pub coleman_liau: f64,
    pub ari: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TextStats {
    pub words: usize,
    pub sentences: usize,
    pub syllables: usize,
    pub letters: usize,
    /// Letters and digits, for ARI.
    pub characters: usize,
}

/// Vowel groups (`y` counts as a vowel), minus a silent final `e`; at least 1.
pub fn syllables(word: &str) -> usize {
    let w: Vec<char> = word.to_lowercase().chars().filter(|c| c.is_alphabetic()).collect();
    if w.is_empty() {
        return 1;
    }
    let vowel = |c: char| "aeiouy".contains(c);
    let mut count = 0;
    let mut prev = false;
    for &c in &w {
        let v = vowel(c);
        if v && !prev {
            count += 1;
        }
        prev = v;
    }
    let n = w.len();
    if count > 1 && w[n - 1] == 'e' && !(n >= 2 && w[n - 2] == 'l') && !vowel(w[n - 2]) {
        count -= 1;
    }
    count.max(1)
}

pub fn text_stats(text: &str) -> TextStats {
    let mut s = TextStats::default();
    for raw in text.split_whitespace() {
        if !raw.chars().any(char::is_alphanumeric) {
            continue;
        }
        s.words += 1;
        s.letters += raw.chars().filter(|c| c.is_alphabetic()).count();
        s.characters += raw.chars().filter(|c| c.is_alphanumeric()).count();
        s.syllables += syllables(raw);
    }
    s.sentences = text
        .split(['.', '!', '?'])
        .filter(|seg| seg.chars().any(char::is_alphanumeric))
        .count()
        .max(1);
    s
}

/// All four scores; zeros for text without words.
pub fn readability(text: &str) -> Readability {
    let s = text_stats(text);
    if s.words == 0 {
        return Readability::default();
    }
    let w = s.words as f64;
    let words_per_sentence = w / s.sentences as f64;
    let syllables_per_word = s.syllables as f64 / w;
    let letters_per_100 = s.letters as f64 / w * 100.0;
    let sentences_per_100 = s.sentences as f64 / w * 100.0;
    Readability {
        flesch: 206.835 - 1.015 * words_per_sentence - 84.6 * syllables_per_word,
        kincaid: 0.39 * words_per_sentence + 11.8 * syllables_per_word - 15.59,
        coleman_liau: 0.0588 * letters_per_100 - 0.296 * sentences_per_100 - 15.8,
        ari: 4.71 * (s.characters as f64 / w) + 0.5 * words_per_sentence - 21.43,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const FOX: &str = "The quick brown fox jumps over the lazy dog.";

    #[test]
    fn fox_counts() {
        let s = text_stats(FOX);
        assert_eq!((s.words, s.sentences, s.syllables, s.letters), (9, 1, 11, 35));
    }

    #[test]
    fn fox_scores() {
        let r = readability(FOX);
        // Hand evaluation with W=9, S=1, Y=11, L=35.
        assert!((r.flesch - 94.30).abs() < 0.5, "{}", r.flesch);
        assert!((r.coleman_liau - 3.78).abs() < 0.1, "{}", r.coleman_liau);
        let kincaid = 0.39 * 9.0 + 11.8 * 11.0 / 9.0 - 15.59;
        assert!((r.kincaid - kincaid).abs() < 1e-12);
        let ari = 4.71 * 35.0 / 9.0 + 0.5 * 9.0 - 21.43;
        assert!((r.ari - ari).abs() < 1e-12);
    }

    #[test]
    fn empty_text() {
        assert_eq!(readability(""), Readability::default());
        assert_eq!(readability(" ... "), Readability::default());
    }

    #[test]
    fn syllable_rules() {
        assert_eq!(syllables("the"), 1);
        assert_eq!(syllables("make"), 1);
        assert_eq!(syllables("table"), 2);
        assert_eq!(syllables("lazy"), 2);
        assert_eq!(syllables("queue"), 1);
        assert_eq!(syllables("rhythm"), 1);
        assert_eq!(syllables("42"), 1);
    }

    #[test]
    fn sentence_segmentation() {
        assert_eq!(text_stats("One. Two! Three? four").sentences, 4);
        assert_eq!(text_stats("no terminal punctuation").sentences, 1);
        assert_eq!(text_stats("Wait... what?!").sentences, 2);
    }
}
