//! Candidate-list construction: one list per first issue (FI) resolved by a
//! newcomer, holding every issue of the project open at the FI's close time.

use std::collections::HashSet;

use log::warn;
use thiserror::Error;

use super::{CandidateList, Corpus, IssueKind, IssueRecord, Timestamp};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ListViolation {
    #[error("fi_id {0} is not among candidate_ids")]
    PositiveMissing(String),
    #[error("fi_id {0} appears {1} times")]
    PositiveRepeated(String, usize),
    #[error("duplicate candidate {0}")]
    DuplicateCandidate(String),
    #[error("{0} candidates, fewer than {1}")]
    TooFew(usize, usize),
    #[error("candidate {0} not found in corpus")]
    UnknownCandidate(String),
    #[error("candidate {0} belongs to {1}, not {2}")]
    WrongProject(String, String, String),
    #[error("candidate {0} was not open at cutoff")]
    NotOpen(String),
}

#[derive(Debug, Clone, Copy)]
pub struct ListOptions {
    pub min_candidates: usize,
    /// A resolver with at most this many prior events in the project still
    /// counts as a newcomer.
    pub newcomer_max_prior_events: usize,
}

impl Default for ListOptions {
    fn default() -> Self {
        ListOptions { min_candidates: 10, newcomer_max_prior_events: 0 }
    }
}

/// Open on the half-open interval `[created_at, closed_at)`, created strictly
/// before `at`: an issue closed exactly at `at` is closed.
pub fn is_open_at(issue: &IssueRecord, at: Timestamp) -> bool {
    issue.created_at < at && issue.closed_at.is_none_or(|c| c > at)
}

pub(super) fn check_list(
    corpus: &Corpus,
    list: &CandidateList,
    min_candidates: usize,
) -> Result<(), ListViolation> {
    let hits = list.candidate_ids.iter().filter(|c| **c == list.fi_id).count();
    match hits {
        0 => return Err(ListViolation::PositiveMissing(list.fi_id.clone())),
        1 => {}
        n => return Err(ListViolation::PositiveRepeated(list.fi_id.clone(), n)),
    }
    let mut seen = HashSet::new();
    for id in &list.candidate_ids {
        if !seen.insert(id) {
            return Err(ListViolation::DuplicateCandidate(id.clone()));
        }
    }
    if list.candidate_ids.len() < min_candidates {
        return Err(ListViolation::TooFew(list.candidate_ids.len(), min_candidates));
    }
    for id in &list.candidate_ids {
        let issue = corpus
            .issue(id)
            .ok_or_else(|| ListViolation::UnknownCandidate(id.clone()))?;
        if issue.repo_id != list.project_id {
            return Err(ListViolation::WrongProject(
                id.clone(),
                issue.repo_id.clone(),
                list.project_id.clone(),
            ));
        }
        let open = if *id == list.fi_id {
            issue.created_at < list.cutoff
        } else {
            is_open_at(issue, list.cutoff)
        };
        if !open {
            return Err(ListViolation::NotOpen(id.clone()));
        }
    }
    Ok(())
}

fn prior_events_in_project(corpus: &Corpus, dev_id: &str, repo: &str, cutoff: Timestamp) -> usize {
    corpus.developer(dev_id).map_or(0, |d| {
        d.events_before(cutoff)
            .iter()
            .filter(|e| e.repo_id == repo && !corpus.is_resolution_artifact(e, repo, cutoff))
            .count()
    })
}

/// Emits one list per newcomer-resolved issue, sorted by cutoff then FI id.
/// Candidates are ordered by creation time then id.
pub fn build_candidate_lists(corpus: &Corpus, opts: ListOptions) -> Vec<CandidateList> {
    let mut lists = Vec::new();
    for fi in &corpus.issues {
        if fi.kind != IssueKind::Issue {
            continue;
        }
        let Some(resolver) = &fi.resolver_id else { continue };
        let Some(cutoff) = fi.closed_at else {
            warn!("issue {} has a resolver but no closed_at; skipped", fi.id);
            continue;
        };
        if prior_events_in_project(corpus, resolver, &fi.repo_id, cutoff) > opts.newcomer_max_prior_events {
            continue;
        }
        let candidate_ids: Vec<String> = corpus
            .repo_issues(&fi.repo_id)
            .filter(|c| c.id == fi.id || is_open_at(c, cutoff))
            .map(|c| c.id.clone())
            .collect();
        if candidate_ids.len() < opts.min_candidates.max(1) {
            continue;
        }
        lists.push(CandidateList {
            fi_id: fi.id.clone(),
            resolver_id: resolver.clone(),
            candidate_ids,
            cutoff,
            project_id: fi.repo_id.clone(),
        });
    }
    lists.sort_by(|a, b| (a.cutoff, &a.fi_id).cmp(&(b.cutoff, &b.fi_id)));
    lists
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{DevEvent, DeveloperProfile, EventKind};
    use chrono::{Duration, TimeZone, Utc};
    use std::collections::BTreeSet;

    fn t(h: i64) -> Timestamp {
        Utc.with_ymd_and_hms(2022, 1, 1, 0, 0, 0).unwrap() + Duration::hours(h)
    }

    fn issue(n: usize, created: i64, closed: Option<i64>, resolver: Option<&str>) -> IssueRecord {
        IssueRecord {
            id: format!("o/p#{n}"),
            kind: IssueKind::Issue,
            repo_id: "o/p".into(),
            title: format!("issue {n}"),
            body: String::new(),
            labels: BTreeSet::new(),
            author_id: "owner".into(),
            created_at: t(created),
            closed_at: closed.map(t),
            resolver_id: resolver.map(str::to_string),
            is_gfi_labeled: false,
        }
    }

    fn dev(id: &str, events: &[(i64, &str)]) -> DeveloperProfile {
        DeveloperProfile {
            id: id.into(),
            events: events
                .iter()
                .map(|(h, repo)| DevEvent {
                    timestamp: t(*h),
                    kind: EventKind::Commit,
                    artifact_id: format!("{repo}@{h}"),
                    repo_id: repo.to_string(),
                })
                .collect(),
            repos_contributed: BTreeSet::new(),
        }
    }

    /// Brute-force open-interval oracle, independent of `is_open_at`.
    fn oracle_candidates(issues: &[IssueRecord], fi: &IssueRecord) -> BTreeSet<String> {
        let cutoff = fi.closed_at.unwrap();
        issues
            .iter()
            .filter(|c| {
                let created_before = c.created_at < cutoff;
                let still_open = match c.closed_at {
                    None => true,
                    Some(cl) => cl > cutoff,
                };
                c.id == fi.id || (created_before && still_open)
            })
            .map(|c| c.id.clone())
            .collect()
    }

    fn thirteen_issue_fixture() -> Vec<IssueRecord> {
        let mut issues = vec![issue(0, 0, Some(100), Some("newbie"))];
        for n in 1..=12 {
            issues.push(issue(n, n as i64, if n % 3 == 0 { Some(150) } else { None }, None));
        }
        // Not open at 100: closed before, created after, closed exactly at cutoff.
        issues.push(issue(20, 1, Some(50), None));
        issues.push(issue(21, 120, None, None));
        issues.push(issue(22, 5, Some(100), None));
        issues
    }

    #[test]
    fn one_fi_thirteen_candidates() {
        let issues = thirteen_issue_fixture();
        let corpus = Corpus::new(issues.clone(), vec![], vec![], vec![]);
        let lists = build_candidate_lists(&corpus, ListOptions::default());
        assert_eq!(lists.len(), 1);
        let got: BTreeSet<String> = lists[0].candidate_ids.iter().cloned().collect();
        assert_eq!(got.len(), 13);
        assert_eq!(got, oracle_candidates(&issues, &issues[0]));
        assert_eq!(lists[0].candidate_ids[0], "o/p#0");
        corpus.check_list(&lists[0], 10).unwrap();
    }

    #[test]
    fn below_threshold_emits_nothing() {
        let mut issues = vec![issue(0, 0, Some(100), Some("newbie"))];
        for n in 1..=5 {
            issues.push(issue(n, n as i64, None, None));
        }
        let corpus = Corpus::new(issues, vec![], vec![], vec![]);
        assert!(build_candidate_lists(&corpus, ListOptions::default()).is_empty());
        let opts = ListOptions { min_candidates: 6, ..Default::default() };
        assert_eq!(build_candidate_lists(&corpus, opts).len(), 1);
    }

    #[test]
    fn two_fis_differ_by_open_interval() {
        let mut issues = vec![
            issue(0, 0, Some(100), Some("a")),
            issue(1, 0, Some(200), Some("b")),
        ];
        for n in 2..30 {
            let created = (n as i64 * 7) % 180;
            let closed = if n % 2 == 0 { Some(created + 60) } else { None };
            issues.push(issue(n, created, closed, None));
        }
        let corpus = Corpus::new(issues.clone(), vec![], vec![], vec![]);
        let opts = ListOptions { min_candidates: 1, ..Default::default() };
        let lists = build_candidate_lists(&corpus, opts);
        assert_eq!(lists.len(), 2);
        assert!(lists[0].cutoff < lists[1].cutoff);
        for (list, fi) in lists.iter().zip([&issues[0], &issues[1]]) {
            let got: BTreeSet<String> = list.candidate_ids.iter().cloned().collect();
            assert_eq!(got, oracle_candidates(&issues, fi));
            corpus.check_list(list, 1).unwrap();
        }
        assert_ne!(lists[0].candidate_ids, lists[1].candidate_ids);
    }

    #[test]
    fn prior_contributor_is_not_newcomer() {
        let issues = thirteen_issue_fixture();
        let devs = vec![dev("newbie", &[(10, "o/p")])];
        let corpus = Corpus::new(issues.clone(), devs.clone(), vec![], vec![]);
        assert!(build_candidate_lists(&corpus, ListOptions::default()).is_empty());
        let relaxed = ListOptions { newcomer_max_prior_events: 1, ..Default::default() };
        assert_eq!(build_candidate_lists(&corpus, relaxed).len(), 1);
        // Activity elsewhere, or at the cutoff itself, does not count.
        let devs = vec![dev("newbie", &[(10, "x/y"), (100, "o/p")])];
        let corpus = Corpus::new(issues, devs, vec![], vec![]);
        assert_eq!(build_candidate_lists(&corpus, ListOptions::default()).len(), 1);
    }

    #[test]
    fn resolving_pr_does_not_disqualify() {
        let mut issues = thirteen_issue_fixture();
        let mut pr = issue(99, 90, Some(100), None);
        pr.kind = IssueKind::PullRequest;
        issues.push(pr);
        let mut d = dev("newbie", &[]);
        d.events.push(DevEvent {
            timestamp: t(90),
            kind: EventKind::Pr,
            artifact_id: "o/p#99".into(),
            repo_id: "o/p".into(),
        });
        let corpus = Corpus::new(issues, vec![d], vec![], vec![]);
        assert_eq!(build_candidate_lists(&corpus, ListOptions::default()).len(), 1);
    }

    #[test]
    fn unclosed_resolved_issue_is_skipped() {
        let mut issues = thirteen_issue_fixture();
        issues[0].closed_at = None;
        let corpus = Corpus::new(issues, vec![], vec![], vec![]);
        assert!(build_candidate_lists(&corpus, ListOptions::default()).is_empty());
    }

    #[test]
    fn check_list_violations() {
        let issues = thirteen_issue_fixture();
        let corpus = Corpus::new(issues, vec![], vec![], vec![]);
        let good = build_candidate_lists(&corpus, ListOptions::default()).remove(0);
        let mut l = good.clone();
        l.candidate_ids.push("o/p#20".into());
        assert_eq!(corpus.check_list(&l, 10), Err(ListViolation::NotOpen("o/p#20".into())));
        let mut l = good.clone();
        l.candidate_ids.retain(|c| c != "o/p#0");
        assert!(matches!(corpus.check_list(&l, 10), Err(ListViolation::PositiveMissing(_))));
        assert!(matches!(corpus.check_list(&good, 20), Err(ListViolation::TooFew(13, 20))));
        let mut l = good;
        l.candidate_ids.push("nope".into());
        assert!(matches!(corpus.check_list(&l, 10), Err(ListViolation::UnknownCandidate(_))));
    }
}
