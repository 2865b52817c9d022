//! Seeded synthetic corpora for tests and demos.
//!
//! Each list lives on its own day: history artifacts are created and closed
//! between 00:00 and 07:00, candidates are created between 08:00 and 20:00,
//! the FI closes at 20:00 and every negative closes within three hours after.
//! No issue is therefore open at any other list's cutoff, and
//! `build_candidate_lists` over the generated corpus reproduces its lists.
//!
//! With a planted signal, the positive of each list is the candidate that
//! maximizes the designated feature plus `noise · U[0,1)`.

use std::collections::{BTreeSet, HashSet};

use chrono::{Duration, TimeZone, Utc};
use log::warn;
use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{
    CandidateList, Corpus, DevEvent, DeveloperProfile, EventKind, IssueKind, IssueRecord,
    ProjectRecord, ProjectStats, Timestamp,
};
use crate::simtext::jaccard;
use crate::textprep::{extract_plain_text, normalize, StopWords, TokenSet};

const PREFIX_DAYS: i64 = 120;
const N_TOPICS: usize = 24;
const WORDS_PER_TOPIC: usize = 16;
const LANGUAGES: [&str; 8] = ["Python", "JavaScript", "Rust", "Go", "Java", "C++", "TypeScript", "Ruby"];
const TOPIC_NAMES: [&str; 12] = [
    "web", "cli", "machine-learning", "database", "graphics", "networking", "compiler",
    "testing", "devops", "security", "mobile", "game",
];
const LABEL_POOL: [&str; 12] = [
    "bug", "documentation", "enhancement", "feature request", "tests", "build",
    "difficulty: medium", "hard", "triaged", "needs triage", "refactor", "api",
];
const MOOD_WORDS: [&str; 10] = [
    "good", "great", "crash", "broken", "nice", "confusing", "slow", "helpful", "wrong", "clean",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlantedFeature {
    /// Cumulative Jaccard similarity between the newcomer's PRs and the candidate.
    PrJaccard,
    /// Commits made by the candidate's reporter before the cutoff.
    ReporterCommits,
}

impl PlantedFeature {
    /// Registry name of the feature carrying the signal.
    pub fn feature_name(self) -> &'static str {
        match self {
            PlantedFeature::PrJaccard => "pr_jac",
            PlantedFeature::ReporterCommits => "reporter_commits",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        match name {
            "pr_jac" | "pr_jaccard" => Some(PlantedFeature::PrJaccard),
            "reporter_commits" => Some(PlantedFeature::ReporterCommits),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlantedSignal {
    pub feature: PlantedFeature,
    pub noise: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub seed: u64,
    pub n_projects: usize,
    pub n_lists: usize,
    pub median_list_size: usize,
    pub planted: Option<PlantedSignal>,
    /// Probability that the positive carries a good-first-issue label.
    pub gfi_rate_positive: f64,
    /// Probability that a negative carries a good-first-issue label.
    pub gfi_rate_negative: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            seed: 1,
            n_projects: 10,
            n_lists: 100,
            median_list_size: 32,
            planted: None,
            gfi_rate_positive: 0.15,
            gfi_rate_negative: 0.15,
        }
    }
}

impl SynthConfig {
    fn clamped(&self) -> SynthConfig {
        let mut c = self.clone();
        if c.n_projects < 2 {
            warn!("n_projects {} clamped to 2", c.n_projects);
            c.n_projects = 2;
        }
        if c.n_lists < 1 {
            warn!("n_lists {} clamped to 1", c.n_lists);
            c.n_lists = 1;
        }
        if c.median_list_size < 10 {
            warn!("median_list_size {} clamped to 10", c.median_list_size);
            c.median_list_size = 10;
        }
        for rate in [&mut c.gfi_rate_positive, &mut c.gfi_rate_negative] {
            if !(0.0..=1.0).contains(rate) {
                warn!("gfi rate {rate} clamped to [0,1]");
                *rate = rate.clamp(0.0, 1.0);
            }
        }
        if let Some(p) = &mut c.planted {
            if !(0.0..=1.0).contains(&p.noise) {
                warn!("planted noise {} clamped to [0, 1]", p.noise);
                p.noise = if p.noise > 1.0 { 1.0 } else { 0.0 };
            }
        }
        c
    }
}

/// Pseudo-words that survive normalization unchanged, so every generated
/// word is its own token.
fn vocabulary(stop: &StopWords) -> Vec<String> {
    const C: &[u8] = b"bdfgklmnprtvz";
    const V: &[u8] = b"aeiou";
    let lexicon_like: HashSet<&str> = MOOD_WORDS.iter().copied().collect();
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    let total = C.len() * V.len() * C.len() * V.len() * C.len();
    // Stride through the combinations so neighbouring words differ early.
    let stride = 7919;
    for step in 0..total {
        let mut k = (step * stride) % total;
        let mut w = Vec::with_capacity(5);
        for alphabet in [C, V, C, V, C] {
            w.push(alphabet[k % alphabet.len()]);
            k /= alphabet.len();
        }
        let word = String::from_utf8(w).unwrap();
        let ts = normalize(&word, stop);
        if ts.len() == 1 && ts.tokens.contains(&word) && !lexicon_like.contains(word.as_str()) && seen.insert(word.clone()) {
            out.push(word);
            if out.len() == N_TOPICS * WORDS_PER_TOPIC {
                break;
            }
        }
    }
    out
}

struct Vet {
    id: String,
    events: Vec<DevEvent>,
}

struct Gen {
    rng: ChaCha8Rng,
    stop: StopWords,
    vocab: Vec<String>,
    base: Timestamp,
    issues: Vec<IssueRecord>,
    repo_counter: Vec<usize>,
    history_issue_pool: Vec<(usize, Timestamp)>,
    history_pr_pool: Vec<(usize, Timestamp)>,
}

impl Gen {
    fn day(&self, d: i64) -> Timestamp {
        self.base + Duration::days(d)
    }

    fn words(&mut self, topic: usize, n: usize, p_topic: f64) -> Vec<String> {
        (0..n)
            .map(|_| {
                if self.rng.gen_bool(p_topic) {
                    let k = self.rng.gen_range(0..WORDS_PER_TOPIC);
                    self.vocab[topic * WORDS_PER_TOPIC + k].clone()
                } else {
                    let k = self.rng.gen_range(0..self.vocab.len());
                    self.vocab[k].clone()
                }
            })
            .collect()
    }

    fn sentence_text(&mut self, mut words: Vec<String>) -> String {
        if self.rng.gen_bool(0.3) {
            let m = MOOD_WORDS[self.rng.gen_range(0..MOOD_WORDS.len())];
            let at = self.rng.gen_range(0..=words.len());
            words.insert(at, m.to_string());
        }
        let mut out = String::new();
        for (i, w) in words.iter().enumerate() {
            if i > 0 {
                out.push(if i % 8 == 0 { '.' } else { ' ' });
                if i % 8 == 0 {
                    out.push(' ');
                }
            }
            out.push_str(w);
        }
        out.push('.');
        out
    }

    fn body(&mut self, topic: usize) -> String {
        let n = self.rng.gen_range(15..36);
        let words = self.words(topic, n, 0.6);
        let mut body = self.sentence_text(words);
        if self.rng.gen_bool(0.3) {
            body.push_str("\n\n```\nlet x = run();\n```\n");
        }
        if self.rng.gen_bool(0.3) {
            body.push_str(" See https://example.org/trace for details.");
        }
        if self.rng.gen_bool(0.1) {
            body.push_str("\n![screenshot](https://example.org/s.png)");
        }
        body
    }

    fn labels(&mut self, max: usize) -> BTreeSet<String> {
        let n = self.rng.gen_range(0..=max);
        (0..n)
            .map(|_| LABEL_POOL[self.rng.gen_range(0..LABEL_POOL.len())].to_string())
            .collect()
    }

    fn next_id(&mut self, project: usize, repo: &str, sep: char) -> String {
        self.repo_counter[project] += 1;
        format!("{repo}{sep}{}", self.repo_counter[project])
    }

    fn push(&mut self, rec: IssueRecord) -> usize {
        self.issues.push(rec);
        self.issues.len() - 1
    }

    fn tokens_of(&self, idx: usize) -> TokenSet {
        normalize(&extract_plain_text(&self.issues[idx].document()), &self.stop)
    }
}

/// Generates a deterministic corpus; parameters below their minima are clamped.
pub fn generate_synthetic_corpus(cfg: &SynthConfig) -> Corpus {
    let cfg = cfg.clamped();
    let stop = StopWords::default();
    let vocab = vocabulary(&stop);
    let mut g = Gen {
        rng: ChaCha8Rng::seed_from_u64(cfg.seed),
        stop,
        vocab,
        base: Utc.with_ymd_and_hms(2018, 1, 1, 0, 0, 0).unwrap(),
        issues: Vec::new(),
        repo_counter: vec![0; cfg.n_projects],
        history_issue_pool: Vec::new(),
        history_pr_pool: Vec::new(),
    };

    let half_width = cfg.median_list_size / 4;
    let max_size = cfg.median_list_size + half_width;
    let n_vets = (4 * cfg.n_lists).clamp(2 * max_size + 8, 300.max(2 * max_size + 8));

    // Veterans: all of their activity precedes the first list, so their
    // counts are the same at every cutoff.
    let repo_ids: Vec<String> = (0..cfg.n_projects).map(|p| format!("org{p:03}/proj{p:03}")).collect();
    let mut vets: Vec<Vet> = Vec::with_capacity(n_vets);
    for k in 0..n_vets {
        let id = format!("vet{k:04}");
        let n_commits = (g.rng.gen_range(0.0f64..400f64.ln()).exp()) as usize;
        let homes: Vec<usize> = (0..g.rng.gen_range(1..=3)).map(|_| g.rng.gen_range(0..cfg.n_projects)).collect();
        let mut events = Vec::new();
        for i in 0..n_commits {
            let repo = &repo_ids[homes[i % homes.len()]];
            let d = g.rng.gen_range(0..PREFIX_DAYS);
            let t = g.day(d) + Duration::seconds(g.rng.gen_range(0..6 * 3600));
            events.push(DevEvent { timestamp: t, kind: EventKind::Commit, artifact_id: format!("{repo}@{id}-c{i}"), repo_id: repo.clone() });
        }
        for i in 0..g.rng.gen_range(0..=n_commits / 4 + 1) {
            let repo = &repo_ids[homes[i % homes.len()]];
            let d = g.rng.gen_range(0..PREFIX_DAYS);
            let t = g.day(d) + Duration::seconds(g.rng.gen_range(0..6 * 3600));
            let kind = if i % 3 == 2 { EventKind::PrReview } else { EventKind::Pr };
            events.push(DevEvent { timestamp: t, kind, artifact_id: format!("{repo}!{id}-p{i}"), repo_id: repo.clone() });
        }
        vets.push(Vet { id, events });
    }

    let mut projects = Vec::with_capacity(cfg.n_projects);
    let mut project_topic = Vec::with_capacity(cfg.n_projects);
    for repo in &repo_ids {
        let topic = g.rng.gen_range(0..N_TOPICS);
        project_topic.push(topic);
        let desc_words = g.words(topic, 8, 0.8);
        let description = g.sentence_text(desc_words);
        let readme_words = g.words(topic, 40, 0.5);
        let readme = format!("# {repo}\n\n{}", g.sentence_text(readme_words));
        let mut topics = BTreeSet::new();
        topics.insert(TOPIC_NAMES[topic % TOPIC_NAMES.len()].to_string());
        topics.insert(TOPIC_NAMES[g.rng.gen_range(0..TOPIC_NAMES.len())].to_string());
        let open = g.rng.gen_range(20..400u64);
        let closed = g.rng.gen_range(50..3000u64);
        let gfi = g.rng.gen_range(0..=open.min(60));
        let owner = vets[g.rng.gen_range(0..n_vets)].id.clone();
        projects.push(ProjectRecord {
            id: repo.clone(),
            description,
            readme,
            topics,
            primary_language: LANGUAGES[g.rng.gen_range(0..LANGUAGES.len())].to_string(),
            stats: ProjectStats {
                open_issues: open,
                open_issue_ratio: open as f64 / (open + closed) as f64,
                gfi_count: gfi,
                gfi_ratio: gfi as f64 / (open + closed) as f64,
                commits: g.rng.gen_range(100..20_000),
                prs: g.rng.gen_range(50..5_000),
                closed_issues: closed,
                stars: g.rng.gen_range(10..50_000),
                commit_contributors: g.rng.gen_range(5..500),
            },
            owner_id: owner,
        });
    }

    let mut newcomers = Vec::with_capacity(cfg.n_lists);
    let mut lists = Vec::with_capacity(cfg.n_lists);
    for j in 0..cfg.n_lists {
        let day = PREFIX_DAYS + j as i64;
        let cutoff = g.day(day) + Duration::hours(20);
        let project = g.rng.gen_range(0..cfg.n_projects);
        let repo = repo_ids[project].clone();
        let dev_id = format!("new{j:05}");
        let fav = g.rng.gen_range(0..N_TOPICS);
        let mut events = Vec::new();

        // Newcomer history in other projects, in morning slots of past days.
        let others: Vec<usize> = (0..g.rng.gen_range(1..=3))
            .map(|_| loop {
                let q = g.rng.gen_range(0..cfg.n_projects);
                if q != project {
                    break q;
                }
            })
            .collect();
        let slot = |g: &mut Gen| {
            let d = day - g.rng.gen_range(1..=100);
            g.day(d) + Duration::seconds(g.rng.gen_range(0..5 * 3600))
        };
        let mut pr_indices = Vec::new();
        for _ in 0..g.rng.gen_range(2..=8) {
            let q = others[g.rng.gen_range(0..others.len())];
            let t = slot(&mut g);
            let n = g.rng.gen_range(4..8);
            let title_words = g.words(fav, n, 0.7);
            let title = g.sentence_text(title_words);
            let body = g.body(fav);
            let id = g.next_id(q, &repo_ids[q], '!');
            let labels = g.labels(2);
            let idx = g.push(IssueRecord {
                id: id.clone(), kind: IssueKind::PullRequest, repo_id: repo_ids[q].clone(), title, body,
                labels, author_id: dev_id.clone(), created_at: t, closed_at: Some(t + Duration::minutes(30)),
                resolver_id: None, is_gfi_labeled: false,
            });
            pr_indices.push(idx);
            g.history_pr_pool.push((idx, t));
            events.push(DevEvent { timestamp: t, kind: EventKind::Pr, artifact_id: id, repo_id: repo_ids[q].clone() });
        }
        for _ in 0..g.rng.gen_range(3..=25) {
            let q = others[g.rng.gen_range(0..others.len())];
            let t = slot(&mut g);
            let n = g.rng.gen_range(3..9);
            let msg_words = g.words(fav, n, 0.6);
            let title = msg_words.join(" ");
            let id = g.next_id(q, &repo_ids[q], '@');
            g.push(IssueRecord {
                id: id.clone(), kind: IssueKind::Commit, repo_id: repo_ids[q].clone(), title, body: String::new(),
                labels: BTreeSet::new(), author_id: dev_id.clone(), created_at: t, closed_at: None,
                resolver_id: None, is_gfi_labeled: false,
            });
            events.push(DevEvent { timestamp: t, kind: EventKind::Commit, artifact_id: id, repo_id: repo_ids[q].clone() });
        }
        for resolved in [false, true] {
            let n = if resolved { g.rng.gen_range(0..=3) } else { g.rng.gen_range(0..=4) };
            for _ in 0..n {
                let q = others[g.rng.gen_range(0..others.len())];
                let t = slot(&mut g);
                let nt = g.rng.gen_range(4..8);
                let title_words = g.words(fav, nt, 0.5);
                let title = g.sentence_text(title_words);
                let body = g.body(fav);
                let id = g.next_id(q, &repo_ids[q], '#');
                let author = if resolved { vets[g.rng.gen_range(0..n_vets)].id.clone() } else { dev_id.clone() };
                let closed = t + Duration::hours(1);
                let labels = g.labels(2);
                let idx = g.push(IssueRecord {
                    id: id.clone(), kind: IssueKind::Issue, repo_id: repo_ids[q].clone(), title, body, labels,
                    author_id: author, created_at: t, closed_at: Some(closed),
                    resolver_id: resolved.then(|| dev_id.clone()), is_gfi_labeled: false,
                });
                g.history_issue_pool.push((idx, t));
                let (kind, ts) = if resolved { (EventKind::IssueResolved, closed) } else { (EventKind::IssueReported, t) };
                events.push(DevEvent { timestamp: ts, kind, artifact_id: id, repo_id: repo_ids[q].clone() });
            }
        }
        for (kind, n) in [(EventKind::IssueCommented, g.rng.gen_range(0..=4)), (EventKind::PrReview, g.rng.gen_range(0..=3))] {
            for _ in 0..n {
                let t = slot(&mut g);
                let pool = if kind == EventKind::PrReview { &g.history_pr_pool } else { &g.history_issue_pool };
                let eligible: Vec<usize> = pool
                    .iter()
                    .filter(|(i, c)| *c < t && g.issues[*i].repo_id != repo)
                    .map(|(i, _)| *i)
                    .collect();
                if let Some(&idx) = eligible.choose(&mut g.rng) {
                    let a = &g.issues[idx];
                    events.push(DevEvent { timestamp: t, kind, artifact_id: a.id.clone(), repo_id: a.repo_id.clone() });
                }
            }
        }

        // Candidates.
        let size = (cfg.median_list_size as i64
            + g.rng.gen_range(-(half_width as i64)..=half_width as i64))
            .max(10) as usize;
        let reporters = index::sample(&mut g.rng, n_vets, size).into_vec();
        let mut cand = Vec::with_capacity(size);
        for &r in &reporters {
            let topic = g.rng.gen_range(0..N_TOPICS);
            let created = g.day(day) + Duration::hours(8) + Duration::seconds(g.rng.gen_range(0..12 * 3600 - 60));
            let nt = g.rng.gen_range(4..8);
            let title_words = g.words(topic, nt, 0.6);
            let title = g.sentence_text(title_words);
            let body = g.body(topic);
            let id = g.next_id(project, &repo, '#');
            let labels = g.labels(2);
            let idx = g.push(IssueRecord {
                id, kind: IssueKind::Issue, repo_id: repo.clone(), title, body, labels,
                author_id: vets[r].id.clone(), created_at: created, closed_at: None,
                resolver_id: None, is_gfi_labeled: false,
            });
            cand.push(idx);
        }

        let positive_slot = match cfg.planted {
            None => g.rng.gen_range(0..size),
            Some(sig) => {
                let pr_tokens: Vec<TokenSet> = pr_indices.iter().map(|&i| g.tokens_of(i)).collect();
                let mut best = (f64::NEG_INFINITY, 0usize);
                for (slot_i, &ci) in cand.iter().enumerate() {
                    let value = match sig.feature {
                        PlantedFeature::PrJaccard => {
                            let ct = g.tokens_of(ci);
                            pr_tokens.iter().map(|p| jaccard(p, &ct)).sum::<f64>()
                        }
                        PlantedFeature::ReporterCommits => vets[reporters[slot_i]]
                            .events
                            .iter()
                            .filter(|e| e.kind == EventKind::Commit && e.timestamp < cutoff)
                            .count() as f64,
                    };
                    let score = value + sig.noise * g.rng.gen::<f64>();
                    if score > best.0 {
                        best = (score, slot_i);
                    }
                }
                best.1
            }
        };

        for (slot_i, &ci) in cand.iter().enumerate() {
            let is_pos = slot_i == positive_slot;
            let rate = if is_pos { cfg.gfi_rate_positive } else { cfg.gfi_rate_negative };
            let gfi = g.rng.gen_bool(rate);
            let close_after = Duration::seconds(g.rng.gen_range(3600..3 * 3600));
            let rec = &mut g.issues[ci];
            rec.is_gfi_labeled = gfi;
            if gfi {
                rec.labels.insert("good first issue".into());
            }
            if is_pos {
                rec.closed_at = Some(cutoff);
                rec.resolver_id = Some(dev_id.clone());
            } else {
                rec.closed_at = Some(cutoff + close_after);
            }
            let author = rec.author_id.clone();
            let (id, created) = (rec.id.clone(), rec.created_at);
            let vet = &mut vets[reporters[slot_i]];
            debug_assert_eq!(vet.id, author);
            vet.events.push(DevEvent { timestamp: created, kind: EventKind::IssueReported, artifact_id: id, repo_id: repo.clone() });
        }

        // The resolving PR mirrors the FI text and closes with it.
        let fi_idx = cand[positive_slot];
        let fi_id = g.issues[fi_idx].id.clone();
        let pr_id = g.next_id(project, &repo, '!');
        let pr_created = cutoff - Duration::hours(3);
        let fi_title = g.issues[fi_idx].title.clone();
        let fi_body = g.issues[fi_idx].body.clone();
        g.push(IssueRecord {
            id: pr_id.clone(), kind: IssueKind::PullRequest, repo_id: repo.clone(),
            title: format!("Fix {fi_title}"), body: fi_body, labels: BTreeSet::new(),
            author_id: dev_id.clone(), created_at: pr_created, closed_at: Some(cutoff),
            resolver_id: None, is_gfi_labeled: false,
        });
        events.push(DevEvent { timestamp: pr_created, kind: EventKind::Pr, artifact_id: pr_id, repo_id: repo.clone() });
        events.push(DevEvent { timestamp: cutoff, kind: EventKind::IssueResolved, artifact_id: fi_id.clone(), repo_id: repo.clone() });

        let mut candidate_ids: Vec<(Timestamp, String)> = cand
            .iter()
            .map(|&i| (g.issues[i].created_at, g.issues[i].id.clone()))
            .collect();
        candidate_ids.sort();
        lists.push(CandidateList {
            fi_id,
            resolver_id: dev_id.clone(),
            candidate_ids: candidate_ids.into_iter().map(|(_, id)| id).collect(),
            cutoff,
            project_id: repo.clone(),
        });
        newcomers.push(finish_profile(dev_id, events));
    }

    let mut developers: Vec<DeveloperProfile> = vets.into_iter().map(|v| finish_profile(v.id, v.events)).collect();
    developers.extend(newcomers);
    lists.sort_by(|a, b| (a.cutoff, &a.fi_id).cmp(&(b.cutoff, &b.fi_id)));
    Corpus::new(g.issues, developers, projects, lists)
}

fn finish_profile(id: String, mut events: Vec<DevEvent>) -> DeveloperProfile {
    events.sort_by(|a, b| (a.timestamp, &a.artifact_id).cmp(&(b.timestamp, &b.artifact_id)));
    let repos_contributed = events
        .iter()
        .filter(|e| matches!(e.kind, EventKind::Commit | EventKind::Pr))
        .map(|e| e.repo_id.clone())
        .collect();
    DeveloperProfile { id, events, repos_contributed }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{build_candidate_lists, ListOptions};

    fn small(seed: u64) -> SynthConfig {
        SynthConfig { seed, n_projects: 2, n_lists: 10, median_list_size: 32, ..Default::default() }
    }

    #[test]
    fn vocabulary_is_full_and_stable() {
        let stop = StopWords::default();
        let v = vocabulary(&stop);
        assert_eq!(v.len(), N_TOPICS * WORDS_PER_TOPIC);
        for w in &v {
            assert_eq!(normalize(w, &stop).join(), *w);
        }
    }

    #[test]
    fn deterministic_for_seed() {
        let a = generate_synthetic_corpus(&small(1));
        let b = generate_synthetic_corpus(&small(1));
        assert_eq!(a, b);
        let c = generate_synthetic_corpus(&small(2));
        assert_ne!(a, c);
    }

    #[test]
    fn lists_satisfy_invariants_and_rebuild() {
        let corpus = generate_synthetic_corpus(&SynthConfig { n_lists: 60, n_projects: 4, ..Default::default() });
        for l in &corpus.lists {
            corpus.check_list(l, 10).unwrap();
        }
        assert_eq!(build_candidate_lists(&corpus, ListOptions::default()), corpus.lists);
        for d in &corpus.developers {
            d.check().unwrap();
        }
        for i in &corpus.issues {
            i.check().unwrap();
        }
        for p in &corpus.projects {
            p.check().unwrap();
        }
    }

    #[test]
    fn median_list_size_near_parameter() {
        let corpus = generate_synthetic_corpus(&SynthConfig { n_lists: 200, ..Default::default() });
        let mut sizes: Vec<usize> = corpus.lists.iter().map(|l| l.candidate_ids.len()).collect();
        sizes.sort();
        let median = if sizes.len().is_multiple_of(2) {
            (sizes[sizes.len() / 2 - 1] + sizes[sizes.len() / 2]) as f64 / 2.0
        } else {
            sizes[sizes.len() / 2] as f64
        };
        assert!((28.0..=36.0).contains(&median), "median {median}");
    }

    #[test]
    fn clamps_degenerate_parameters() {
        let corpus = generate_synthetic_corpus(&SynthConfig {
            n_projects: 0,
            n_lists: 0,
            median_list_size: 1,
            ..Default::default()
        });
        assert_eq!(corpus.projects.len(), 2);
        assert_eq!(corpus.lists.len(), 1);
        assert!(corpus.lists[0].candidate_ids.len() >= 10);
    }
}
