//! Issue content (text, markup, labels) and issue background (project,
//! reporter, owner) features.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use super::developer::count_kind;
use super::readability::readability;
use super::{sentiment_polarity, Cutoff, Featurizer, Lexicon};
use crate::corpus::{DevEvent, EventKind, IssueRecord};
use crate::textprep::{count_markup, extract_plain_text, words};

const DEFAULT_LABEL_CATEGORIES: &str = include_str!("../../data/label_categories.toml");

/// The 12 label categories with their feature-name suffixes.
pub const LABEL_CATEGORIES: [(&str, &str); 12] = [
    ("Bug", "bug"),
    ("Documentation", "documentation"),
    ("Test", "test"),
    ("Build", "build"),
    ("Enhancement", "enhancement"),
    ("Coding", "coding"),
    ("New Feature", "new_feature"),
    ("Newcomer-friendly", "newcomer_friendly"),
    ("Medium Difficulty", "medium_difficulty"),
    ("Difficult", "difficult"),
    ("Triaged", "triaged"),
    ("Untriaged", "untriaged"),
];

/// Case-insensitive substring patterns per category, in [`LABEL_CATEGORIES`] order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelCategoryMap {
    patterns: Vec<Vec<String>>,
}

impl LabelCategoryMap {
    /// Parses a TOML table of `"Category" = ["pattern", ...]`; all 12
    /// categories must be present and no others.
    pub fn parse(text: &str) -> Result<Self, String> {
        let table: BTreeMap<String, Vec<String>> = toml::from_str(text).map_err(|e| e.to_string())?;
        if let Some(unknown) = table.keys().find(|k| !LABEL_CATEGORIES.iter().any(|(c, _)| c == k)) {
            return Err(format!("unknown label category {unknown:?}"));
        }
        let patterns = LABEL_CATEGORIES
            .iter()
            .map(|(c, _)| {
                table
                    .get(*c)
                    .map(|ps| ps.iter().map(|p| p.to_lowercase()).collect())
                    .ok_or_else(|| format!("missing label category {c:?}"))
            })
            .collect::<Result<_, _>>()?;
        Ok(LabelCategoryMap { patterns })
    }

    pub fn from_file(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        Self::parse(&text).map_err(|e| format!("{}: {e}", path.display()))
    }

    /// Number of `labels` matching each category.
    pub fn counts<'a>(&self, labels: impl IntoIterator<Item = &'a String>) -> [usize; 12] {
        let mut out = [0; 12];
        for label in labels {
            let l = label.to_lowercase();
            for (slot, ps) in out.iter_mut().zip(&self.patterns) {
                if ps.iter().any(|p| l.contains(p.as_str())) {
                    *slot += 1;
                }
            }
        }
        out
    }
}

impl Default for LabelCategoryMap {
    fn default() -> Self {
        Self::parse(DEFAULT_LABEL_CATEGORIES).expect("bundled label categories parse")
    }
}

pub fn content_feature_names() -> Vec<String> {
    let mut names: Vec<String> = [
        "iss_sentiment",
        "flesch",
        "kincaid",
        "coleman_liau",
        "ari",
        "title_len",
        "body_len",
        "code_snippets",
        "urls",
        "images",
        "label_count",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    names.extend(LABEL_CATEGORIES.iter().map(|(_, s)| format!("label_{s}")));
    names
}

const PROFILE_SUFFIXES: [&str; 7] = ["commits", "prs", "reviews", "issues", "gfi_ratio", "max_stars", "has_commits"];

pub fn background_names() -> Vec<String> {
    let mut names: Vec<String> = [
        "proj_open_issues",
        "proj_open_issue_ratio",
        "proj_gfi_count",
        "proj_gfi_ratio",
        "proj_commits",
        "proj_prs",
        "proj_closed_issues",
        "proj_stars",
        "proj_commit_contributors",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    for who in ["reporter", "owner"] {
        names.extend(PROFILE_SUFFIXES.iter().map(|s| format!("{who}_{s}")));
    }
    names
}

pub fn issue_content_features(issue: &IssueRecord, labels: &LabelCategoryMap, lexicon: &Lexicon) -> Vec<f64> {
    let title = extract_plain_text(&issue.title);
    let body = extract_plain_text(&issue.body);
    let whole = extract_plain_text(&issue.document());
    let r = readability(&whole);
    let markup = count_markup(&issue.body);
    let mut out = vec![
        sentiment_polarity(&whole, lexicon),
        r.flesch,
        r.kincaid,
        r.coleman_liau,
        r.ari,
        words(&title).len() as f64,
        words(&body).len() as f64,
        markup.code_snippets as f64,
        markup.urls as f64,
        markup.images as f64,
        issue.labels.len() as f64,
    ];
    out.extend(labels.counts(&issue.labels).map(|n| n as f64));
    out
}

/// Seven history-derived values for a reporter or owner of `project_id`.
fn profile(f: &Featurizer<'_>, history: &[&DevEvent], project_id: &str) -> [f64; 7] {
    let reported: Vec<&DevEvent> = history
        .iter()
        .copied()
        .filter(|e| e.kind == EventKind::IssueReported && e.repo_id == project_id)
        .collect();
    let gfi = reported
        .iter()
        .filter(|e| f.artifact(e).is_some_and(|a| a.is_gfi_labeled))
        .count();
    let gfi_ratio = if reported.is_empty() { 0.0 } else { gfi as f64 / reported.len() as f64 };
    let contributed: BTreeSet<&str> = history
        .iter()
        .filter(|e| matches!(e.kind, EventKind::Commit | EventKind::Pr))
        .map(|e| e.repo_id.as_str())
        .collect();
    let max_stars = contributed
        .iter()
        .filter_map(|r| f.corpus.project(r))
        .map(|p| p.stats.stars)
        .max()
        .unwrap_or(0);
    let has_commits = history.iter().any(|e| e.kind == EventKind::Commit && e.repo_id == project_id);
    [
        count_kind(history, EventKind::Commit) as f64,
        count_kind(history, EventKind::Pr) as f64,
        count_kind(history, EventKind::PrReview) as f64,
        count_kind(history, EventKind::IssueReported) as f64,
        gfi_ratio,
        max_stars as f64,
        if has_commits { 1.0 } else { 0.0 },
    ]
}

pub fn issue_background_features(f: &Featurizer<'_>, issue: &IssueRecord, cutoff: Cutoff<'_>) -> Vec<f64> {
    let project = f.project_or_empty(&issue.repo_id);
    let s = &project.stats;
    let mut out = vec![
        s.open_issues as f64,
        s.open_issue_ratio,
        s.gfi_count as f64,
        s.gfi_ratio,
        s.commits as f64,
        s.prs as f64,
        s.closed_issues as f64,
        s.stars as f64,
        s.commit_contributors as f64,
    ];
    for dev in [&issue.author_id, &project.owner_id] {
        out.extend(profile(f, &f.history(dev, cutoff), &issue.repo_id));
    }
    out
}
