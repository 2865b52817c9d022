//! JSONL dump loading and writing.

use std::collections::{BTreeSet, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use log::warn;
use serde::de::DeserializeOwned;
use serde::{Serialize, Serializer};
use thiserror::Error;

use super::{CandidateList, Corpus, DeveloperProfile, IssueRecord, ProjectRecord};

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("cannot open {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{file}:{line}: malformed record: {message}")]
    Parse { file: String, line: usize, message: String },
    #[error("{file}:{line}: duplicate id {id:?}")]
    Duplicate { file: String, line: usize, id: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Rejection {
    pub file: String,
    pub line: usize,
    pub id: String,
    pub reason: String,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct LoadReport {
    pub issues: usize,
    pub developers: usize,
    pub projects: usize,
    pub lists: usize,
    pub dangling_artifacts: usize,
    pub rejected: Vec<Rejection>,
    pub dropped_lists: Vec<Rejection>,
    #[serde(serialize_with = "sorted_pairs")]
    pub unknown_fields: BTreeSet<(String, String)>,
}

fn sorted_pairs<S: Serializer>(v: &BTreeSet<(String, String)>, s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|(f, k)| format!("{f}:{k}")))
}

#[derive(Debug, Clone)]
pub struct CorpusPaths {
    pub issues: PathBuf,
    pub developers: PathBuf,
    pub projects: PathBuf,
    pub lists: PathBuf,
}

impl CorpusPaths {
    /// The four standard file names inside `dir`.
    pub fn in_dir(dir: &Path) -> Self {
        CorpusPaths {
            issues: dir.join("issues.jsonl"),
            developers: dir.join("developers.jsonl"),
            projects: dir.join("projects.jsonl"),
            lists: dir.join("lists.jsonl"),
        }
    }
}

const ISSUE_FIELDS: &[&str] = &[
    "id", "kind", "repo_id", "title", "body", "labels", "author_id", "created_at", "closed_at",
    "resolver_id", "is_gfi_labeled",
];
const DEVELOPER_FIELDS: &[&str] = &["id", "events", "repos_contributed"];
const PROJECT_FIELDS: &[&str] = &[
    "id", "description", "readme", "topics", "primary_language", "stats", "owner_id",
];
const LIST_FIELDS: &[&str] = &["fi_id", "resolver_id", "candidate_ids", "cutoff", "project_id"];

struct Line<T> {
    line: usize,
    record: T,
}

fn read_jsonl<T: DeserializeOwned>(
    path: &Path,
    known: &[&str],
    report: &mut LoadReport,
) -> Result<Vec<Line<T>>, LoadError> {
    let file_name = path.display().to_string();
    let file = File::open(path).map_err(|source| LoadError::Io { path: file_name.clone(), source })?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|source| LoadError::Io { path: file_name.clone(), source })?;
        if line.trim().is_empty() {
            continue;
        }
        let value: serde_json::Value = serde_json::from_str(&line).map_err(|e| LoadError::Parse {
            file: file_name.clone(),
            line: line_no,
            message: e.to_string(),
        })?;
        if let Some(obj) = value.as_object() {
            for key in obj.keys() {
                if !known.contains(&key.as_str())
                    && report.unknown_fields.insert((file_name.clone(), key.clone()))
                {
                    warn!("{file_name}: ignoring unknown field {key:?}");
                }
            }
        }
        let record = serde_json::from_value(value).map_err(|e| LoadError::Parse {
            file: file_name.clone(),
            line: line_no,
            message: e.to_string(),
        })?;
        out.push(Line { line: line_no, record });
    }
    Ok(out)
}

fn dedup_check<T>(
    file: &Path,
    rows: &[Line<T>],
    id: impl Fn(&T) -> &str,
) -> Result<(), LoadError> {
    let mut seen = HashSet::new();
    for row in rows {
        let key = id(&row.record);
        if !seen.insert(key.to_string()) {
            return Err(LoadError::Duplicate {
                file: file.display().to_string(),
                line: row.line,
                id: key.to_string(),
            });
        }
    }
    Ok(())
}

fn keep_valid<T>(
    file: &Path,
    rows: Vec<Line<T>>,
    id: impl Fn(&T) -> String,
    check: impl Fn(&T) -> Result<(), String>,
    rejected: &mut Vec<Rejection>,
) -> Vec<T> {
    let mut out = Vec::with_capacity(rows.len());
    for row in rows {
        match check(&row.record) {
            Ok(()) => out.push(row.record),
            Err(reason) => {
                warn!("{}:{}: rejected: {reason}", file.display(), row.line);
                rejected.push(Rejection {
                    file: file.display().to_string(),
                    line: row.line,
                    id: id(&row.record),
                    reason,
                });
            }
        }
    }
    out
}

/// Loads the four JSONL dumps. Malformed lines and duplicate ids are hard
/// errors; records violating invariants are rejected and reported.
pub fn load_corpus(paths: &CorpusPaths) -> Result<(Corpus, LoadReport), LoadError> {
    let mut report = LoadReport::default();
    let issues: Vec<Line<IssueRecord>> = read_jsonl(&paths.issues, ISSUE_FIELDS, &mut report)?;
    let devs: Vec<Line<DeveloperProfile>> = read_jsonl(&paths.developers, DEVELOPER_FIELDS, &mut report)?;
    let projects: Vec<Line<ProjectRecord>> = read_jsonl(&paths.projects, PROJECT_FIELDS, &mut report)?;
    let lists: Vec<Line<CandidateList>> = read_jsonl(&paths.lists, LIST_FIELDS, &mut report)?;

    dedup_check(&paths.issues, &issues, |r| &r.id)?;
    dedup_check(&paths.developers, &devs, |d| &d.id)?;
    dedup_check(&paths.projects, &projects, |p| &p.id)?;
    dedup_check(&paths.lists, &lists, |l| &l.fi_id)?;

    let mut rejected = Vec::new();
    let issues = keep_valid(&paths.issues, issues, |r| r.id.clone(), IssueRecord::check, &mut rejected);
    let devs = keep_valid(&paths.developers, devs, |d| d.id.clone(), DeveloperProfile::check, &mut rejected);
    let projects = keep_valid(&paths.projects, projects, |p| p.id.clone(), ProjectRecord::check, &mut rejected);

    let mut corpus = Corpus::new(issues, devs, projects, Vec::new());
    let mut kept = Vec::with_capacity(lists.len());
    for row in lists {
        match corpus.check_list(&row.record, 1) {
            Ok(()) => kept.push(row.record),
            Err(v) => {
                warn!("{}:{}: dropped list {}: {v}", paths.lists.display(), row.line, row.record.fi_id);
                report.dropped_lists.push(Rejection {
                    file: paths.lists.display().to_string(),
                    line: row.line,
                    id: row.record.fi_id.clone(),
                    reason: v.to_string(),
                });
            }
        }
    }
    corpus.lists = kept;

    report.rejected = rejected;
    (report.issues, report.developers, report.projects, report.lists) = corpus.counts();
    report.dangling_artifacts = corpus.dangling_event_count();
    Ok((corpus, report))
}

fn write_jsonl<T: Serialize>(path: &Path, rows: &[T]) -> std::io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for row in rows {
        serde_json::to_writer(&mut w, row)?;
        w.write_all(b"\n")?;
    }
    w.flush()
}

/// Writes the corpus as four JSONL files in record order.
pub fn write_corpus(corpus: &Corpus, paths: &CorpusPaths) -> std::io::Result<()> {
    write_jsonl(&paths.issues, &corpus.issues)?;
    write_jsonl(&paths.developers, &corpus.developers)?;
    write_jsonl(&paths.projects, &corpus.projects)?;
    write_jsonl(&paths.lists, &corpus.lists)
}
