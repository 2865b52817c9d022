//! Feature extraction for (candidate issue, newcomer) pairs.
//!
//! Seven groups, assembled in registry order: content preference, domain
//! preference, general OSS experience, activeness, sentiment, issue content
//! and issue background. Developer history is always restricted to events
//! strictly before the cutoff, minus the artifacts that resolved the FI.

use std::cell::RefCell;
use std::collections::{BTreeSet, HashMap};
use std::path::Path;
use std::rc::Rc;

use rayon::prelude::*;
use thiserror::Error;

use crate::corpus::{CandidateList, Corpus, DevEvent, IssueRecord, ProjectRecord, Timestamp};
use crate::simtext::{EmbeddingStore, EmbeddingVector, IdfTable, SimError};
use crate::textprep::{extract_plain_text, normalize, StopWords, TokenSet};

pub mod content;
pub mod developer;
pub mod issue;
pub mod readability;
mod registry;
pub mod sentiment;

pub use issue::{LabelCategoryMap, LABEL_CATEGORIES};
pub use registry::{FeatureEntry, FeatureGroup, FeatureRegistry, FeatureVector};
pub use sentiment::{sentiment_polarity, Lexicon};

#[derive(Debug, Error)]
#[error("feature {feature}: {source}")]
pub struct FeatureError {
    pub feature: String,
    #[source]
    pub source: SimError,
}

impl FeatureError {
    fn tag(feature: impl Into<String>) -> impl FnOnce(SimError) -> FeatureError {
        let feature = feature.into();
        move |source| FeatureError { feature, source }
    }
}

/// Stop words, sentiment lexicon and label-category patterns.
#[derive(Debug, Clone, Default)]
pub struct Resources {
    pub stop: StopWords,
    pub lexicon: Lexicon,
    pub labels: LabelCategoryMap,
}

impl Resources {
    /// Bundled defaults, with any of the three files overridden.
    pub fn load(
        stopwords: Option<&Path>,
        lexicon: Option<&Path>,
        label_categories: Option<&Path>,
    ) -> Result<Self, String> {
        let mut r = Resources::default();
        if let Some(p) = stopwords {
            r.stop = StopWords::from_file(p).map_err(|e| format!("{}: {e}", p.display()))?;
        }
        if let Some(p) = lexicon {
            r.lexicon = Lexicon::from_file(p)?;
        }
        if let Some(p) = label_categories {
            r.labels = LabelCategoryMap::from_file(p)?;
        }
        Ok(r)
    }
}

/// The instant features are computed at and the project whose FI defines it.
#[derive(Debug, Clone, Copy)]
pub struct Cutoff<'a> {
    pub at: Timestamp,
    pub project_id: &'a str,
}

impl<'a> Cutoff<'a> {
    pub fn of(list: &'a CandidateList) -> Self {
        Cutoff { at: list.cutoff, project_id: &list.project_id }
    }
}

/// Plain text of every document the features read, keyed by embedding id:
/// issue/PR/commit ids, plus `project:<id>:description` and `project:<id>:readme`.
pub fn document_texts(corpus: &Corpus) -> Vec<(String, String)> {
    let mut out: Vec<(String, String)> = corpus
        .issues
        .par_iter()
        .map(|r| (r.id.clone(), extract_plain_text(&r.document())))
        .collect();
    for p in &corpus.projects {
        out.push((p.description_doc_id(), extract_plain_text(&p.description)));
        out.push((p.readme_doc_id(), extract_plain_text(&p.readme)));
    }
    out
}

/// Hashed TF-IDF store with idf fitted over every corpus document.
pub fn build_hashed_store(corpus: &Corpus, stop: &StopWords) -> EmbeddingStore {
    let docs: Vec<TokenSet> = document_texts(corpus)
        .par_iter()
        .map(|(_, text)| normalize(text, stop))
        .collect();
    EmbeddingStore::hashed(IdfTable::fit(docs.iter()))
}

pub(crate) struct Doc {
    pub tokens: TokenSet,
    pub embedding: EmbeddingVector,
}

pub struct Featurizer<'a> {
    pub corpus: &'a Corpus,
    pub store: &'a EmbeddingStore,
    pub resources: &'a Resources,
    pub registry: FeatureRegistry,
    empty_project: ProjectRecord,
}

impl<'a> Featurizer<'a> {
    pub fn new(corpus: &'a Corpus, store: &'a EmbeddingStore, resources: &'a Resources) -> Self {
        Featurizer {
            corpus,
            store,
            resources,
            registry: FeatureRegistry::standard(),
            empty_project: ProjectRecord {
                id: String::new(),
                description: String::new(),
                readme: String::new(),
                topics: BTreeSet::new(),
                primary_language: String::new(),
                stats: Default::default(),
                owner_id: String::new(),
            },
        }
    }

    pub(crate) fn doc(&self, id: &str, markdown: &str) -> Result<Doc, SimError> {
        let tokens = normalize(&extract_plain_text(markdown), &self.resources.stop);
        let embedding = self.store.lookup(id, &tokens)?;
        Ok(Doc { tokens, embedding })
    }

    pub(crate) fn project_or_empty(&self, id: &str) -> &ProjectRecord {
        self.corpus.project(id).unwrap_or(&self.empty_project)
    }

    /// History of `dev_id` visible at the cutoff; unknown developers have none.
    pub fn history(&self, dev_id: &str, cutoff: Cutoff<'_>) -> Vec<&'a DevEvent> {
        let corpus: &'a Corpus = self.corpus;
        let Some(dev) = corpus.developer(dev_id) else { return Vec::new() };
        dev.events_before(cutoff.at)
            .iter()
            .filter(|e| !corpus.is_resolution_artifact(e, cutoff.project_id, cutoff.at))
            .collect()
    }

    /// Resolved artifact of an event, if it is in the corpus.
    pub(crate) fn artifact(&self, e: &DevEvent) -> Option<&'a IssueRecord> {
        self.corpus.issue(&e.artifact_id)
    }

    pub fn content_preference(&self, dev_id: &str, issue: &IssueRecord, cutoff: Cutoff<'_>) -> Result<Vec<f64>, FeatureError> {
        let side = content::NewcomerDocs::build(self, dev_id, cutoff)?;
        let cand = self.doc(&issue.id, &issue.document()).map_err(FeatureError::tag("pr_cos"))?;
        Ok(content::content_values(self, &side, issue, &cand))
    }

    pub fn domain_preference(&self, dev_id: &str, issue: &IssueRecord, cutoff: Cutoff<'_>) -> Result<Vec<f64>, FeatureError> {
        let side = content::NewcomerDocs::build(self, dev_id, cutoff)?;
        let proj = content::ProjectDocs::build(self, &issue.repo_id)?;
        Ok(content::domain_values(&side, &proj))
    }

    pub fn oss_experience(&self, dev_id: &str, cutoff: Cutoff<'_>) -> Vec<f64> {
        developer::oss_experience(&self.history(dev_id, cutoff), cutoff.project_id)
    }

    pub fn activeness(&self, dev_id: &str, cutoff: Cutoff<'_>) -> Vec<f64> {
        developer::activeness(&self.history(dev_id, cutoff), cutoff.at)
    }

    pub fn sentiment_features(&self, dev_id: &str, cutoff: Cutoff<'_>) -> Vec<f64> {
        developer::sentiment_features(self, &self.history(dev_id, cutoff))
    }

    pub fn issue_content_features(&self, issue: &IssueRecord) -> Vec<f64> {
        issue::issue_content_features(issue, &self.resources.labels, &self.resources.lexicon)
    }

    pub fn issue_background_features(&self, issue: &IssueRecord, cutoff: Cutoff<'_>) -> Vec<f64> {
        issue::issue_background_features(self, issue, cutoff)
    }

    /// Full vector for one pair; equal to the matching row of [`Self::featurize_list`].
    pub fn assemble(&self, dev_id: &str, issue: &IssueRecord, cutoff: Cutoff<'_>) -> Result<FeatureVector, FeatureError> {
        let side = NewcomerSide::build(self, dev_id, cutoff)?;
        self.assemble_with(&side, issue, cutoff)
    }

    fn assemble_with(&self, side: &NewcomerSide, issue: &IssueRecord, cutoff: Cutoff<'_>) -> Result<FeatureVector, FeatureError> {
        let cand = self.doc(&issue.id, &issue.document()).map_err(FeatureError::tag("pr_cos"))?;
        let proj = side.project_docs(self, &issue.repo_id)?;
        let mut values = Vec::with_capacity(self.registry.len());
        values.extend(content::content_values(self, &side.docs, issue, &cand));
        values.extend(content::domain_values(&side.docs, &proj));
        values.extend_from_slice(&side.experience);
        values.extend_from_slice(&side.activeness);
        values.extend_from_slice(&side.sentiment);
        values.extend(self.issue_content_features(issue));
        values.extend(self.issue_background_features(issue, cutoff));
        debug_assert_eq!(values.len(), self.registry.len());
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(FeatureError {
                feature: self.registry.entries()[i].name.clone(),
                source: SimError::NonFinite(issue.id.clone()),
            });
        }
        Ok(FeatureVector { values, registry_version: self.registry.version_arc() })
    }

    /// Vectors for every candidate of a list, in candidate order.
    pub fn featurize_list(&self, list: &CandidateList) -> Result<Vec<FeatureVector>, FeatureError> {
        let cutoff = Cutoff::of(list);
        let side = NewcomerSide::build(self, &list.resolver_id, cutoff)?;
        list.candidate_ids
            .iter()
            .map(|id| {
                let issue = self.corpus.issue(id).ok_or_else(|| FeatureError {
                    feature: "candidate".into(),
                    source: SimError::MissingId(id.clone()),
                })?;
                self.assemble_with(&side, issue, cutoff)
            })
            .collect()
    }

    /// Featurizes many lists in parallel; output order matches input order.
    pub fn featurize_lists(&self, lists: &[CandidateList]) -> Result<Vec<Vec<FeatureVector>>, FeatureError> {
        lists.par_iter().map(|l| self.featurize_list(l)).collect()
    }
}

/// Newcomer-side values shared by every candidate of a list.
struct NewcomerSide {
    docs: content::NewcomerDocs,
    experience: Vec<f64>,
    activeness: Vec<f64>,
    sentiment: Vec<f64>,
    projects: RefCell<HashMap<String, Rc<content::ProjectDocs>>>,
}

impl NewcomerSide {
    fn build(f: &Featurizer<'_>, dev_id: &str, cutoff: Cutoff<'_>) -> Result<Self, FeatureError> {
        let history = f.history(dev_id, cutoff);
        Ok(NewcomerSide {
            docs: content::NewcomerDocs::build(f, dev_id, cutoff)?,
            experience: developer::oss_experience(&history, cutoff.project_id),
            activeness: developer::activeness(&history, cutoff.at),
            sentiment: developer::sentiment_features(f, &history),
            projects: Default::default(),
        })
    }

    fn project_docs(&self, f: &Featurizer<'_>, repo: &str) -> Result<Rc<content::ProjectDocs>, FeatureError> {
        let mut cache = self.projects.borrow_mut();
        if let Some(p) = cache.get(repo) {
            return Ok(p.clone());
        }
        let p = Rc::new(content::ProjectDocs::build(f, repo)?);
        cache.insert(repo.to_string(), p.clone());
        Ok(p)
    }
}

/// Pairs each value with its registry name.
pub fn named_values<'r>(registry: &'r FeatureRegistry, v: &FeatureVector) -> Vec<(&'r str, f64)> {
    registry.entries().iter().zip(&v.values).map(|(e, x)| (e.name.as_str(), *x)).collect()
}
