//! Content preference (history texts vs. candidate) and domain preference
//! (contributed projects vs. candidate project).

use std::collections::{BTreeMap, BTreeSet, HashSet};

use super::{Cutoff, Doc, FeatureError, Featurizer};
use crate::corpus::{EventKind, IssueRecord};
use crate::simtext::{cosine, jaccard};

/// History artifact kinds: name prefix, event kind, whether labels apply.
pub const CONTENT_KINDS: [(&str, EventKind, bool); 6] = [
    ("pr", EventKind::Pr, true),
    ("commit", EventKind::Commit, false),
    ("resolved", EventKind::IssueResolved, true),
    ("reported", EventKind::IssueReported, true),
    ("commented", EventKind::IssueCommented, true),
    ("reviewed", EventKind::PrReview, true),
];

pub fn content_names() -> Vec<String> {
    let mut names = Vec::new();
    for (p, _, labels) in CONTENT_KINDS {
        names.push(format!("{p}_cos"));
        names.push(format!("{p}_jac"));
        if labels {
            names.push(format!("{p}_lab"));
        }
        names.push(format!("{p}_cos_ave"));
        names.push(format!("{p}_jac_ave"));
        if labels {
            names.push(format!("{p}_lab_ave"));
        }
    }
    names.push("lang_commits".into());
    names
}

pub fn domain_names() -> Vec<String> {
    let mut names = Vec::new();
    for p in ["desc", "readme"] {
        for s in ["cos", "jac", "cos_ave", "jac_ave"] {
            names.push(format!("{p}_{s}"));
        }
    }
    names.push("topic_commits".into());
    names.push("topic_commit_ratio".into());
    names
}

pub(crate) struct HistDoc {
    doc: Doc,
    labels: BTreeSet<String>,
}

pub(crate) struct ProjectDocs {
    desc: Doc,
    readme: Doc,
    topics: BTreeSet<String>,
}

impl ProjectDocs {
    pub(crate) fn build(f: &Featurizer<'_>, repo: &str) -> Result<Self, FeatureError> {
        let p = f.project_or_empty(repo);
        let id = if p.id.is_empty() { repo.to_string() } else { p.id.clone() };
        let desc_id = format!("project:{id}:description");
        let readme_id = format!("project:{id}:readme");
        Ok(ProjectDocs {
            desc: f.doc(&desc_id, &p.description).map_err(FeatureError::tag("desc_cos"))?,
            readme: f.doc(&readme_id, &p.readme).map_err(FeatureError::tag("readme_cos"))?,
            topics: p.topics.clone(),
        })
    }
}

/// Newcomer's resolvable history documents and commit distribution.
pub(crate) struct NewcomerDocs {
    by_kind: Vec<Vec<HistDoc>>,
    /// Commits per repo, for language familiarity and topic overlap.
    commits_by_repo: BTreeMap<String, usize>,
    total_commits: usize,
    /// Known projects the newcomer committed to, with commit counts.
    contributed: Vec<(ProjectDocs, usize)>,
}

impl NewcomerDocs {
    pub(crate) fn build(f: &Featurizer<'_>, dev_id: &str, cutoff: Cutoff<'_>) -> Result<Self, FeatureError> {
        let history = f.history(dev_id, cutoff);
        let mut by_kind = Vec::with_capacity(CONTENT_KINDS.len());
        for (prefix, kind, _) in CONTENT_KINDS {
            let mut seen = HashSet::new();
            let mut docs = Vec::new();
            for e in history.iter().filter(|e| e.kind == kind) {
                let Some(a) = f.artifact(e) else { continue };
                if !seen.insert(a.id.as_str()) {
                    continue;
                }
                let doc = f.doc(&a.id, &a.document()).map_err(FeatureError::tag(format!("{prefix}_cos")))?;
                docs.push(HistDoc { doc, labels: a.labels.clone() });
            }
            by_kind.push(docs);
        }
        let mut commits_by_repo = BTreeMap::new();
        for e in history.iter().filter(|e| e.kind == EventKind::Commit) {
            *commits_by_repo.entry(e.repo_id.clone()).or_insert(0) += 1;
        }
        let total_commits = commits_by_repo.values().sum();
        let contributed = commits_by_repo
            .iter()
            .filter(|(r, _)| f.corpus.project(r).is_some())
            .map(|(r, c)| Ok((ProjectDocs::build(f, r)?, *c)))
            .collect::<Result<_, FeatureError>>()?;
        Ok(NewcomerDocs { by_kind, commits_by_repo, total_commits, contributed })
    }
}

fn ave(sum: f64, n: usize) -> f64 {
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

fn cos(a: &Doc, b: &Doc) -> f64 {
    cosine(&a.embedding, &b.embedding).expect("one store yields one dimension")
}

/// Cumulative and average cosine, Jaccard and label-overlap per history kind,
/// then language familiarity.
pub(crate) fn content_values(f: &Featurizer<'_>, side: &NewcomerDocs, issue: &IssueRecord, cand: &Doc) -> Vec<f64> {
    let mut out = Vec::with_capacity(35);
    for ((_, _, labels), docs) in CONTENT_KINDS.iter().zip(&side.by_kind) {
        let r = docs.len();
        let cos_sum: f64 = docs.iter().map(|h| cos(&h.doc, cand)).sum();
        let jac_sum: f64 = docs.iter().map(|h| jaccard(&h.doc.tokens, &cand.tokens)).sum();
        let lab_sum = docs
            .iter()
            .filter(|h| h.labels.iter().any(|l| issue.labels.contains(l)))
            .count() as f64;
        out.push(cos_sum);
        out.push(jac_sum);
        if *labels {
            out.push(lab_sum);
        }
        out.push(ave(cos_sum, r));
        out.push(ave(jac_sum, r));
        if *labels {
            out.push(ave(lab_sum, r));
        }
    }
    let language = &f.project_or_empty(&issue.repo_id).primary_language;
    let lang_commits: usize = if language.is_empty() {
        0
    } else {
        side.commits_by_repo
            .iter()
            .filter(|(repo, _)| f.corpus.project(repo).is_some_and(|p| p.primary_language == *language))
            .map(|(_, n)| n)
            .sum()
    };
    out.push(lang_commits as f64);
    out
}

pub(crate) fn domain_values(side: &NewcomerDocs, cand: &ProjectDocs) -> Vec<f64> {
    let n = side.contributed.len();
    let mut out = Vec::with_capacity(10);
    for field in [Field::Desc, Field::Readme] {
        let target = field.of(cand);
        let cos_sum: f64 = side.contributed.iter().map(|(p, _)| cos(field.of(p), target)).sum();
        let jac_sum: f64 = side
            .contributed
            .iter()
            .map(|(p, _)| jaccard(&field.of(p).tokens, &target.tokens))
            .sum();
        out.extend([cos_sum, jac_sum, ave(cos_sum, n), ave(jac_sum, n)]);
    }
    let topic_commits: usize = side
        .contributed
        .iter()
        .filter(|(p, _)| !p.topics.is_disjoint(&cand.topics))
        .map(|(_, c)| c)
        .sum();
    out.push(topic_commits as f64);
    out.push(ave(topic_commits as f64, side.total_commits));
    out
}

#[derive(Clone, Copy)]
enum Field {
    Desc,
    Readme,
}

impl Field {
    fn of(self, p: &ProjectDocs) -> &Doc {
        match self {
            Field::Desc => &p.desc,
            Field::Readme => &p.readme,
        }
    }
}
