//! Data model for issues, developers, projects and candidate lists.

use std::collections::{BTreeSet, HashMap};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

mod io;
mod lists;
pub mod synth;

pub use io::{load_corpus, write_corpus, CorpusPaths, LoadError, LoadReport, Rejection};
pub use lists::{build_candidate_lists, is_open_at, ListOptions, ListViolation};
pub use synth::{generate_synthetic_corpus, PlantedFeature, PlantedSignal, SynthConfig};

pub type Timestamp = DateTime<Utc>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IssueKind {
    Issue,
    PullRequest,
    Commit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IssueRecord {
    pub id: String,
    pub kind: IssueKind,
    pub repo_id: String,
    pub title: String,
    #[serde(default)]
    pub body: String,
    #[serde(default)]
    pub labels: BTreeSet<String>,
    pub author_id: String,
    pub created_at: Timestamp,
    #[serde(default)]
    pub closed_at: Option<Timestamp>,
    #[serde(default)]
    pub resolver_id: Option<String>,
    #[serde(default)]
    pub is_gfi_labeled: bool,
}

impl IssueRecord {
    /// Title and body as one markdown document. Commits carry only `title`.
    pub fn document(&self) -> String {
        if self.body.is_empty() {
            self.title.clone()
        } else {
            format!("{}\n\n{}", self.title, self.body)
        }
    }

    pub(crate) fn check(&self) -> Result<(), String> {
        if let Some(closed) = self.closed_at {
            if closed < self.created_at {
                return Err(format!("closed_at {closed} precedes created_at {}", self.created_at));
            }
        }
        if self.kind == IssueKind::Commit && !self.labels.is_empty() {
            return Err("commit carries labels".into());
        }
        if self.id.is_empty() {
            return Err("empty id".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Commit,
    Pr,
    PrReview,
    IssueReported,
    IssueResolved,
    IssueCommented,
}

impl EventKind {
    pub const ALL: [EventKind; 6] = [
        EventKind::Commit,
        EventKind::Pr,
        EventKind::PrReview,
        EventKind::IssueReported,
        EventKind::IssueResolved,
        EventKind::IssueCommented,
    ];
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DevEvent {
    pub timestamp: Timestamp,
    pub kind: EventKind,
    pub artifact_id: String,
    pub repo_id: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeveloperProfile {
    pub id: String,
    #[serde(default)]
    pub events: Vec<DevEvent>,
    #[serde(default)]
    pub repos_contributed: BTreeSet<String>,
}

impl DeveloperProfile {
    pub fn empty(id: &str) -> Self {
        DeveloperProfile { id: id.to_string(), events: Vec::new(), repos_contributed: BTreeSet::new() }
    }

    /// Events strictly before `cutoff`.
    pub fn events_before(&self, cutoff: Timestamp) -> &[DevEvent] {
        let end = self.events.partition_point(|e| e.timestamp < cutoff);
        &self.events[..end]
    }

    pub(crate) fn check(&self) -> Result<(), String> {
        if self.events.windows(2).any(|w| w[1].timestamp < w[0].timestamp) {
            return Err("events not sorted by timestamp".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ProjectStats {
    pub open_issues: u64,
    pub open_issue_ratio: f64,
    pub gfi_count: u64,
    pub gfi_ratio: f64,
    pub commits: u64,
    pub prs: u64,
    pub closed_issues: u64,
    pub stars: u64,
    pub commit_contributors: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectRecord {
    pub id: String,
    #[serde(default)]
    pub description: String,
    #[serde(default)]
    pub readme: String,
    #[serde(default)]
    pub topics: BTreeSet<String>,
    #[serde(default)]
    pub primary_language: String,
    pub stats: ProjectStats,
    pub owner_id: String,
}

impl ProjectRecord {
    pub(crate) fn check(&self) -> Result<(), String> {
        let s = &self.stats;
        for (name, r) in [("open_issue_ratio", s.open_issue_ratio), ("gfi_ratio", s.gfi_ratio)] {
            if !(0.0..=1.0).contains(&r) {
                return Err(format!("{name} {r} outside [0,1]"));
            }
        }
        if s.gfi_count > s.open_issues + s.closed_issues {
            return Err(format!(
                "gfi_count {} exceeds open_issues + closed_issues {}",
                s.gfi_count,
                s.open_issues + s.closed_issues
            ));
        }
        Ok(())
    }

    /// Embedding-store id of the project description.
    pub fn description_doc_id(&self) -> String {
        format!("project:{}:description", self.id)
    }

    pub fn readme_doc_id(&self) -> String {
        format!("project:{}:readme", self.id)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateList {
    pub fi_id: String,
    pub resolver_id: String,
    pub candidate_ids: Vec<String>,
    pub cutoff: Timestamp,
    pub project_id: String,
}

impl CandidateList {
    pub fn positive_index(&self) -> Option<usize> {
        self.candidate_ids.iter().position(|c| *c == self.fi_id)
    }
}

/// Immutable in-memory corpus with id indexes.
#[derive(Debug, Clone, Default)]
pub struct Corpus {
    pub issues: Vec<IssueRecord>,
    pub developers: Vec<DeveloperProfile>,
    pub projects: Vec<ProjectRecord>,
    pub lists: Vec<CandidateList>,
    issue_index: HashMap<String, usize>,
    developer_index: HashMap<String, usize>,
    project_index: HashMap<String, usize>,
    /// Issue ids per repo, sorted by (created_at, id).
    repo_issues: HashMap<String, Vec<usize>>,
}

impl PartialEq for Corpus {
    fn eq(&self, other: &Self) -> bool {
        self.issues == other.issues
            && self.developers == other.developers
            && self.projects == other.projects
            && self.lists == other.lists
    }
}

impl Corpus {
    /// Builds indexes. Callers guarantee id uniqueness; later duplicates win.
    pub fn new(
        issues: Vec<IssueRecord>,
        developers: Vec<DeveloperProfile>,
        projects: Vec<ProjectRecord>,
        lists: Vec<CandidateList>,
    ) -> Self {
        let issue_index = issues.iter().enumerate().map(|(i, r)| (r.id.clone(), i)).collect();
        let developer_index = developers.iter().enumerate().map(|(i, d)| (d.id.clone(), i)).collect();
        let project_index = projects.iter().enumerate().map(|(i, p)| (p.id.clone(), i)).collect();
        let mut repo_issues: HashMap<String, Vec<usize>> = HashMap::new();
        for (i, r) in issues.iter().enumerate() {
            if r.kind == IssueKind::Issue {
                repo_issues.entry(r.repo_id.clone()).or_default().push(i);
            }
        }
        for idx in repo_issues.values_mut() {
            idx.sort_by(|&a, &b| {
                (issues[a].created_at, &issues[a].id).cmp(&(issues[b].created_at, &issues[b].id))
            });
        }
        Corpus {
            issues,
            developers,
            projects,
            lists,
            issue_index,
            developer_index,
            project_index,
            repo_issues,
        }
    }

    pub fn issue(&self, id: &str) -> Option<&IssueRecord> {
        self.issue_index.get(id).map(|&i| &self.issues[i])
    }

    pub fn developer(&self, id: &str) -> Option<&DeveloperProfile> {
        self.developer_index.get(id).map(|&i| &self.developers[i])
    }

    pub fn project(&self, id: &str) -> Option<&ProjectRecord> {
        self.project_index.get(id).map(|&i| &self.projects[i])
    }

    /// Issues (kind `issue`) of one repo, ordered by creation time then id.
    pub fn repo_issues(&self, repo_id: &str) -> impl Iterator<Item = &IssueRecord> {
        self.repo_issues
            .get(repo_id)
            .into_iter()
            .flatten()
            .map(move |&i| &self.issues[i])
    }

    pub fn counts(&self) -> (usize, usize, usize, usize) {
        (self.issues.len(), self.developers.len(), self.projects.len(), self.lists.len())
    }

    /// Developer events whose artifact is not in the corpus.
    pub fn dangling_event_count(&self) -> usize {
        self.developers
            .iter()
            .flat_map(|d| &d.events)
            .filter(|e| self.issue(&e.artifact_id).is_none())
            .count()
    }

    /// Artifacts produced by resolving an FI: the resolver's PRs and commits in
    /// the FI's repo that were closed at the FI's cutoff.
    pub fn is_resolution_artifact(&self, event: &DevEvent, repo_id: &str, cutoff: Timestamp) -> bool {
        matches!(event.kind, EventKind::Pr | EventKind::Commit)
            && event.repo_id == repo_id
            && self
                .issue(&event.artifact_id)
                .is_some_and(|a| a.closed_at == Some(cutoff))
    }

    /// Re-verifies every invariant of a candidate list against this corpus.
    pub fn check_list(&self, list: &CandidateList, min_candidates: usize) -> Result<(), ListViolation> {
        lists::check_list(self, list, min_candidates)
    }
}
