//! Markdown-to-plain-text conversion and token normalization.
//!
//! Both sides of every token-overlap comparison go through [`normalize`], so
//! the stemmer and stop list only need to be internally consistent.

use std::collections::{BTreeSet, HashSet};
use std::path::Path;
use std::sync::OnceLock;

use regex::Regex;
use rust_stemmers::{Algorithm, Stemmer};

const DEFAULT_STOPWORDS: &str = include_str!("../data/stopwords.txt");

/// Tokens shorter than this many characters are dropped.
pub const MIN_TOKEN_CHARS: usize = 2;

/// Normalized, deduplicated terms of one document.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TokenSet {
    pub tokens: BTreeSet<String>,
    /// Number of tokens that survived filtering, before deduplication.
    pub token_count_raw: usize,
}

impl TokenSet {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Space-joined tokens in sorted order.
    pub fn join(&self) -> String {
        self.tokens.iter().map(String::as_str).collect::<Vec<_>>().join(" ")
    }
}

#[derive(Debug, Clone)]
pub struct StopWords(HashSet<String>);

impl StopWords {
    pub fn parse(text: &str) -> Self {
        StopWords(
            text.lines()
                .map(|l| l.trim().to_lowercase())
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .collect(),
        )
    }

    pub fn from_file(path: &Path) -> std::io::Result<Self> {
        Ok(Self::parse(&std::fs::read_to_string(path)?))
    }

    pub fn contains(&self, word: &str) -> bool {
        self.0.contains(word)
    }
}

impl Default for StopWords {
    fn default() -> Self {
        Self::parse(DEFAULT_STOPWORDS)
    }
}

struct Patterns {
    fenced: Regex,
    inline_code: Regex,
    image: Regex,
    html_img: Regex,
    link: Regex,
    url: Regex,
    html_tag: Regex,
    markers: Regex,
    whitespace: Regex,
}

fn patterns() -> &'static Patterns {
    static P: OnceLock<Patterns> = OnceLock::new();
    P.get_or_init(|| Patterns {
        // Only closed fences are code; an unmatched fence stays literal.
        fenced: Regex::new(r"(?s)(```|~~~).*?(```|~~~)").unwrap(),
        inline_code: Regex::new(r"`[^`\n]+`").unwrap(),
        image: Regex::new(r"!\[[^\]]*\]\([^)]*\)").unwrap(),
        html_img: Regex::new(r"(?i)<img\b[^>]*>").unwrap(),
        link: Regex::new(r"\[([^\]]*)\]\([^)]*\)").unwrap(),
        url: Regex::new(r"(?i)(?:https?|ftp)://[^\s<>()\[\]]*|\bwww\.[^\s<>()\[\]]+").unwrap(),
        html_tag: Regex::new(r"</?[A-Za-z][^>]*>").unwrap(),
        markers: Regex::new(r"(?m)[`*_#>~|]+|^\s*(?:[-+]|\d+\.)\s").unwrap(),
        whitespace: Regex::new(r"\s+").unwrap(),
    })
}

/// Counts of the markdown constructs removed by [`extract_plain_text`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct MarkupCounts {
    pub code_snippets: usize,
    pub urls: usize,
    pub images: usize,
}

/// Counts fenced blocks plus inline code spans, images (markdown and `<img>`),
/// and URLs outside code and images.
pub fn count_markup(markdown: &str) -> MarkupCounts {
    let p = patterns();
    let fenced = p.fenced.find_iter(markdown).count();
    let text = p.fenced.replace_all(markdown, " ");
    let inline = p.inline_code.find_iter(&text).count();
    let text = p.inline_code.replace_all(&text, " ");
    let images = p.image.find_iter(&text).count() + p.html_img.find_iter(&text).count();
    let text = p.image.replace_all(&text, " ");
    let text = p.html_img.replace_all(&text, " ");
    MarkupCounts {
        code_snippets: fenced + inline,
        urls: p.url.find_iter(&text).count(),
        images,
    }
}

/// Strips code, images, URLs and markdown markers, keeping link anchor text.
pub fn extract_plain_text(markdown: &str) -> String {
    if markdown.is_empty() {
        return String::new();
    }
    let p = patterns();
    let text = p.fenced.replace_all(markdown, " ");
    let text = p.inline_code.replace_all(&text, " ");
    let text = p.image.replace_all(&text, " ");
    let text = p.html_img.replace_all(&text, " ");
    let text = p.link.replace_all(&text, " $1 ");
    let text = p.url.replace_all(&text, " ");
    let text = p.html_tag.replace_all(&text, " ");
    let text = p.markers.replace_all(&text, " ");
    let text = text.replace(['[', ']'], " ");
    p.whitespace.replace_all(text.trim(), " ").into_owned()
}

/// Lowercases, splits on non-alphanumerics, drops stop words, stems, dedups.
///
/// Stemming is iterated to a fixpoint so that `normalize` applied to its own
/// joined output returns the same set.
pub fn normalize(text: &str, stop: &StopWords) -> TokenSet {
    let stemmer = Stemmer::create(Algorithm::English);
    let mut out = TokenSet::default();
    let lower = text.to_lowercase();
    for word in lower.split(|c: char| !c.is_alphanumeric()) {
        if word.chars().count() < MIN_TOKEN_CHARS || stop.contains(word) {
            continue;
        }
        let stem = stem_fixpoint(&stemmer, word);
        if stem.chars().count() < MIN_TOKEN_CHARS || stop.contains(&stem) {
            continue;
        }
        out.token_count_raw += 1;
        out.tokens.insert(stem);
    }
    out
}

fn stem_fixpoint(stemmer: &Stemmer, word: &str) -> String {
    let mut cur = word.to_string();
    for _ in 0..8 {
        let next = stemmer.stem(&cur).into_owned();
        if next == cur {
            break;
        }
        cur = next;
    }
    cur
}

/// Plain words of a text for lexicon lookup and readability: lowercased,
/// split on anything that is not alphanumeric or an apostrophe.
pub fn words(text: &str) -> Vec<String> {
    text.split(|c: char| !(c.is_alphanumeric() || c == '\''))
        .map(|w| w.trim_matches('\'').to_lowercase())
        .filter(|w| !w.is_empty())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn empty_input() {
        assert_eq!(extract_plain_text(""), "");
    }

    #[test]
    fn removes_code_urls_images() {
        assert_eq!(
            extract_plain_text("fix `foo()` see https://x.y and ![img](u.png)"),
            "fix see and"
        );
    }

    #[test]
    fn keeps_link_anchor_text() {
        assert_eq!(extract_plain_text("[docs](http://a.b) update"), "docs update");
    }

    #[test]
    fn fenced_blocks_and_headers() {
        let md = "# Title\n\nSome **bold** text\n```rust\nfn main() {}\n```\n> quoted";
        assert_eq!(extract_plain_text(md), "Title Some bold text quoted");
    }

    #[test]
    fn unmatched_fence_is_literal() {
        let out = extract_plain_text("before ``` after");
        assert_eq!(out, "before after");
        assert!(!out.contains('`'));
    }

    #[test]
    fn counts_markup() {
        let md = "Steps:\n```\na\n```\ntext\n```\nb\n```\nsee https://example.com/x";
        assert_eq!(
            count_markup(md),
            MarkupCounts { code_snippets: 2, urls: 1, images: 0 }
        );
        let md = "![a](http://img) and <img src=\"x\"> plus `x` and [l](https://l.io)";
        assert_eq!(
            count_markup(md),
            MarkupCounts { code_snippets: 1, urls: 1, images: 2 }
        );
        assert_eq!(count_markup(""), MarkupCounts::default());
    }

    #[test]
    fn stems_to_single_token() {
        let ts = normalize("Fixes the fixed fixing", &StopWords::default());
        assert_eq!(ts.tokens.iter().collect::<Vec<_>>(), vec!["fix"]);
        assert_eq!(ts.token_count_raw, 3);
    }

    #[test]
    fn all_stop_words() {
        let ts = normalize("the and of", &StopWords::default());
        assert!(ts.is_empty());
        assert_eq!(ts.token_count_raw, 0);
    }

    #[test]
    fn drops_short_tokens() {
        let ts = normalize("a b x1 go", &StopWords::default());
        assert_eq!(ts.tokens.iter().collect::<Vec<_>>(), vec!["go", "x1"]);
    }

    #[test]
    fn custom_stop_list() {
        let stop = StopWords::parse("# comment\nparser\n");
        let ts = normalize("parser crashes", &stop);
        assert_eq!(ts.tokens.iter().collect::<Vec<_>>(), vec!["crash"]);
    }

    proptest! {
        #[test]
        fn plain_text_has_no_urls_or_backticks(s in "[a-z `\\[\\]()!:/.#*_h-t-p-s]{0,80}") {
            let out = extract_plain_text(&s);
            prop_assert!(!out.contains("http://"));
            prop_assert!(!out.contains("https://"));
            prop_assert!(!out.contains('`'));
        }

        #[test]
        fn normalize_is_idempotent(s in "[A-Za-z ,.]{0,120}") {
            let stop = StopWords::default();
            let once = normalize(&s, &stop);
            let twice = normalize(&once.join(), &stop);
            prop_assert_eq!(&once.tokens, &twice.tokens);
            for t in &once.tokens {
                prop_assert!(!t.is_empty());
                prop_assert!(!t.contains(char::is_whitespace));
                prop_assert!(!stop.contains(t));
            }
        }

        #[test]
        fn whitespace_invariant(words in proptest::collection::vec("[a-z]{1,9}", 0..12), sep in "[ \t\n]{1,4}") {
            let stop = StopWords::default();
            let a = normalize(&words.join(" "), &stop);
            let b = normalize(&words.join(&sep), &stop);
            prop_assert_eq!(a, b);
        }
    }
}
