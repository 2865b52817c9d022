//! Newcomer-side counts: general OSS experience, activeness windows and
//! sentiment of past contributions.

use std::collections::BTreeSet;

use chrono::Duration;

use super::{sentiment_polarity, Featurizer};
use crate::corpus::{DevEvent, EventKind, Timestamp};
use crate::textprep::extract_plain_text;

pub const EXPERIENCE_NAMES: &[&str] =
    &["commits", "prs", "pr_reviews", "repos", "issues_reported", "issues_reported_in_project"];

pub const ACTIVENESS_NAMES: &[&str] = &[
    "commits_30d",
    "commits_60d",
    "commits_90d",
    "prs_30d",
    "prs_60d",
    "prs_90d",
    "issues_reported_30d",
    "issues_reported_60d",
    "issues_reported_90d",
];

pub const SENTIMENT_NAMES: &[&str] = &["pr_senti_mean", "pr_senti_median", "issue_senti_mean", "issue_senti_median"];

const WINDOWS_DAYS: [i64; 3] = [30, 60, 90];

pub(crate) fn count_kind(history: &[&DevEvent], kind: EventKind) -> usize {
    history.iter().filter(|e| e.kind == kind).count()
}

/// Commits, PRs, reviews, distinct repos with commits or PRs, reported
/// issues, and reported issues in `project_id`.
pub fn oss_experience(history: &[&DevEvent], project_id: &str) -> Vec<f64> {
    let repos: BTreeSet<&str> = history
        .iter()
        .filter(|e| matches!(e.kind, EventKind::Commit | EventKind::Pr))
        .map(|e| e.repo_id.as_str())
        .collect();
    let reported_here = history
        .iter()
        .filter(|e| e.kind == EventKind::IssueReported && e.repo_id == project_id)
        .count();
    [
        count_kind(history, EventKind::Commit),
        count_kind(history, EventKind::Pr),
        count_kind(history, EventKind::PrReview),
        repos.len(),
        count_kind(history, EventKind::IssueReported),
        reported_here,
    ]
    .map(|n| n as f64)
    .to_vec()
}

/// Commits, PRs and reported issues in `[at - w days, at)` for w = 30, 60, 90.
pub fn activeness(history: &[&DevEvent], at: Timestamp) -> Vec<f64> {
    let mut out = Vec::with_capacity(9);
    for kind in [EventKind::Commit, EventKind::Pr, EventKind::IssueReported] {
        for days in WINDOWS_DAYS {
            let from = at - Duration::days(days);
            let n = history
                .iter()
                .filter(|e| e.kind == kind && e.timestamp >= from && e.timestamp < at)
                .count();
            out.push(n as f64);
        }
    }
    out
}

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        0.0
    } else {
        xs.iter().sum::<f64>() / xs.len() as f64
    }
}

/// Median with the midpoint convention for even counts; 0 when empty.
pub fn median(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        (v[m - 1] + v[m]) / 2.0
    }
}

fn polarities(f: &Featurizer<'_>, history: &[&DevEvent], kind: EventKind) -> Vec<f64> {
    let mut seen = BTreeSet::new();
    history
        .iter()
        .filter(|e| e.kind == kind)
        .filter_map(|e| f.artifact(e))
        .filter(|a| seen.insert(a.id.as_str()))
        .map(|a| sentiment_polarity(&extract_plain_text(&a.document()), &f.resources.lexicon))
        .collect()
}

pub fn sentiment_features(f: &Featurizer<'_>, history: &[&DevEvent]) -> Vec<f64> {
    let prs = polarities(f, history, EventKind::Pr);
    let issues = polarities(f, history, EventKind::IssueReported);
    vec![mean(&prs), median(&prs), mean(&issues), median(&issues)]
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::TimeZone;
    use chrono::Utc;

    fn ev(kind: EventKind, repo: &str, t: Timestamp) -> DevEvent {
        DevEvent { timestamp: t, kind, artifact_id: format!("a-{}", t.timestamp()), repo_id: repo.into() }
    }

    fn at() -> Timestamp {
        Utc.with_ymd_and_hms(2022, 6, 1, 12, 0, 0).unwrap()
    }

    #[test]
    fn experience_fixture() {
        let t = |d: i64| at() - Duration::days(d);
        let evs = vec![
            ev(EventKind::Commit, "r1", t(1)),
            ev(EventKind::Commit, "r1", t(2)),
            ev(EventKind::Commit, "r2", t(3)),
            ev(EventKind::Commit, "r2", t(4)),
            ev(EventKind::Commit, "r3", t(5)),
            ev(EventKind::Pr, "r1", t(6)),
            ev(EventKind::Pr, "r3", t(7)),
            ev(EventKind::PrReview, "r4", t(8)),
            ev(EventKind::IssueReported, "target", t(9)),
            ev(EventKind::IssueReported, "r5", t(10)),
            ev(EventKind::IssueReported, "r5", t(11)),
            ev(EventKind::IssueReported, "r6", t(12)),
        ];
        let h: Vec<&DevEvent> = evs.iter().collect();
        assert_eq!(oss_experience(&h, "target"), vec![5.0, 2.0, 1.0, 3.0, 4.0, 1.0]);
        assert_eq!(oss_experience(&[], "target"), vec![0.0; 6]);
    }

    #[test]
    fn activeness_windows() {
        let e = ev(EventKind::Commit, "r", at() - Duration::days(45));
        let v = activeness(&[&e], at());
        assert_eq!(&v[0..3], &[0.0, 1.0, 1.0]);
        assert!(v[3..].iter().all(|x| *x == 0.0));

        let edge = ev(EventKind::Pr, "r", at() - Duration::days(30) + Duration::seconds(1));
        let v = activeness(&[&edge], at());
        assert_eq!(&v[3..6], &[1.0, 1.0, 1.0]);

        let exact = ev(EventKind::Pr, "r", at() - Duration::days(30));
        assert_eq!(activeness(&[&exact], at())[3], 1.0);
        let outside = ev(EventKind::Pr, "r", at() - Duration::days(30) - Duration::seconds(1));
        assert_eq!(activeness(&[&outside], at())[3], 0.0);
        assert_eq!(activeness(&[], at()), vec![0.0; 9]);
    }

    #[test]
    fn mean_and_median() {
        let xs = [0.2, 0.4, 0.9];
        assert!((mean(&xs) - 0.5).abs() < 1e-12);
        assert_eq!(median(&xs), 0.4);
        assert!((median(&[0.2, 0.4]) - 0.3).abs() < 1e-12);
        assert_eq!(median(&[]), 0.0);
        assert_eq!(mean(&[]), 0.0);
    }

    #[test]
    fn name_counts() {
        assert_eq!(EXPERIENCE_NAMES.len(), 6);
        assert_eq!(ACTIVENESS_NAMES.len(), 9);
        assert_eq!(SENTIMENT_NAMES.len(), 4);
    }
}
