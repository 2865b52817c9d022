//! Longitudinal evaluation: chronological folds, sliding windows, R@k and
//! FirstHit, ablation variants and cross-project folds.

use std::fmt::Write as _;

use log::{info, warn};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::corpus::{CandidateList, Corpus, Timestamp};
use crate::features::{FeatureError, FeatureGroup, FeatureRegistry, Featurizer};
use crate::ltr::{
    baseline_gfirandom, baseline_random, order_by_score, train, LabeledList, LtrError, Objective, RankingModel,
    TrainConfig,
};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error(transparent)]
    Ltr(#[from] LtrError),
    #[error("{have} lists cannot fill {folds} folds")]
    TooFewLists { have: usize, folds: usize },
    #[error("list {0} has no positive among its candidates")]
    NoPositive(String),
    #[error("window {0} has an empty test set")]
    EmptyTest(usize),
    #[error("window {window}: training cutoff {train} is after test cutoff {test}")]
    Leakage { window: usize, train: Timestamp, test: Timestamp },
}

/// 1 if the positive is among the first `k` ids.
pub fn recall_at_k<S: AsRef<str>>(ranked: &[S], positive: &str, k: usize) -> u8 {
    u8::from(ranked.iter().take(k).any(|id| id.as_ref() == positive))
}

/// 1-based position of the positive; `None` when absent.
pub fn first_hit<S: AsRef<str>>(ranked: &[S], positive: &str) -> Option<usize> {
    ranked.iter().position(|id| id.as_ref() == positive).map(|i| i + 1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FoldOrder {
    #[default]
    Asc,
    Desc,
}

impl std::str::FromStr for FoldOrder {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "asc" => Ok(FoldOrder::Asc),
            "desc" => Ok(FoldOrder::Desc),
            _ => Err(format!("fold order must be asc or desc, got {s:?}")),
        }
    }
}

/// Indices of `cutoffs` split into `n_folds` chronological folds: the first
/// `n_folds - 1` hold `n / n_folds` lists each and the last takes the rest.
/// Ties on cutoff keep input order.
pub fn chronological_folds(cutoffs: &[Timestamp], n_folds: usize, order: FoldOrder) -> Result<Vec<Vec<usize>>, EvalError> {
    let n = cutoffs.len();
    if n_folds == 0 || n < n_folds {
        return Err(EvalError::TooFewLists { have: n, folds: n_folds });
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by_key(|&i| cutoffs[i]);
    if order == FoldOrder::Desc {
        idx.reverse();
    }
    let size = n / n_folds;
    let mut folds: Vec<Vec<usize>> = idx.chunks(size).take(n_folds - 1).map(<[usize]>::to_vec).collect();
    folds.push(idx[size * (n_folds - 1)..].to_vec());
    Ok(folds)
}

/// Train/validation/test fold indices (0-based) for one window `t` (1-based).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Window {
    pub t: usize,
    pub train: Vec<usize>,
    pub val: usize,
    pub test: usize,
}

/// For each T from 3 to the fold count: train on folds 1..T-2, validate
/// on T-1, test on T.
pub fn sliding_windows(n_folds: usize) -> Vec<Window> {
    (3..=n_folds)
        .map(|t| Window { t, train: (0..t - 2).collect(), val: t - 2, test: t - 1 })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Lambdamart,
    Pointwise,
    Random,
    Gfirandom,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Lambdamart => "lambdamart",
            Method::Pointwise => "pointwise",
            Method::Random => "random",
            Method::Gfirandom => "gfirandom",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "lambdamart" => Ok(Method::Lambdamart),
            "pointwise" => Ok(Method::Pointwise),
            "random" => Ok(Method::Random),
            "gfirandom" => Ok(Method::Gfirandom),
            _ => Err(format!("unknown method {s:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalConfig {
    pub n_folds: usize,
    pub fold_order: FoldOrder,
    pub method: Method,
    pub seed: u64,
    pub train: TrainConfig,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            n_folds: 20,
            fold_order: FoldOrder::Asc,
            method: Method::Lambdamart,
            seed: 1,
            train: TrainConfig::default(),
        }
    }
}

impl EvalConfig {
    /// First 16 hex digits of the SHA-256 of the config's JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        Sha256::digest(json.as_bytes()).iter().take(8).map(|b| format!("{b:02x}")).collect()
    }
}

/// Featurized lists ready for any number of experiments.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub fi_ids: Vec<String>,
    pub cutoffs: Vec<Timestamp>,
    pub projects: Vec<String>,
    pub lists: Vec<LabeledList>,
    /// Candidate ids per list, in the same tie order as the vectors.
    pub candidates: Vec<Vec<String>>,
    /// Candidate creation times, parallel to `candidates`.
    pub created: Vec<Vec<Timestamp>>,
    pub gfi: Vec<Vec<bool>>,
    pub registry: FeatureRegistry,
}

/// Featurizes every list once. Candidates are put in tie order (creation
/// time, then id), which is also the order ties are broken in at ranking.
pub fn prepare(corpus: &Corpus, lists: &[CandidateList], featurizer: &Featurizer<'_>) -> Result<Prepared, EvalError> {
    let ordered: Vec<CandidateList> = lists
        .iter()
        .map(|l| {
            let mut l = l.clone();
            l.candidate_ids.sort_by_cached_key(|id| {
                (corpus.issue(id).map(|r| r.created_at), id.clone())
            });
            l
        })
        .collect();
    let rows = featurizer.featurize_lists(&ordered)?;
    let mut p = Prepared {
        fi_ids: Vec::new(),
        cutoffs: Vec::new(),
        projects: Vec::new(),
        lists: Vec::new(),
        candidates: Vec::new(),
        created: Vec::new(),
        gfi: Vec::new(),
        registry: featurizer.registry.clone(),
    };
    for (l, features) in ordered.into_iter().zip(rows) {
        let positive = l.positive_index().ok_or_else(|| EvalError::NoPositive(l.fi_id.clone()))?;
        p.gfi.push(l.candidate_ids.iter().map(|id| corpus.issue(id).is_some_and(|r| r.is_gfi_labeled)).collect());
        p.created.push(
            l.candidate_ids.iter().map(|id| corpus.issue(id).map(|r| r.created_at).unwrap_or_default()).collect(),
        );
        p.fi_ids.push(l.fi_id);
        p.cutoffs.push(l.cutoff);
        p.projects.push(l.project_id);
        p.lists.push(LabeledList { features, positive });
        p.candidates.push(l.candidate_ids);
    }
    Ok(p)
}

impl Prepared {
    pub fn len(&self) -> usize {
        self.lists.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lists.is_empty()
    }

    /// The same lists with one feature group removed.
    pub fn without(&self, group: FeatureGroup) -> Prepared {
        let (registry, keep) = self.registry.without(group);
        let lists = self
            .lists
            .par_iter()
            .map(|l| LabeledList {
                features: l.features.iter().map(|x| x.select(&keep, &registry)).collect(),
                positive: l.positive,
            })
            .collect();
        Prepared { lists, registry, ..self.clone_meta() }
    }

    fn clone_meta(&self) -> Prepared {
        Prepared {
            fi_ids: self.fi_ids.clone(),
            cutoffs: self.cutoffs.clone(),
            projects: self.projects.clone(),
            lists: Vec::new(),
            candidates: self.candidates.clone(),
            created: self.created.clone(),
            gfi: self.gfi.clone(),
            registry: self.registry.clone(),
        }
    }
}

/// Metrics over the test lists of one window or fold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowMetrics {
    pub window: usize,
    pub n_test_lists: usize,
    pub r_at_1: f64,
    pub r_at_3: f64,
    pub r_at_5: f64,
    pub r_at_10: f64,
    /// Median first-hit rank.
    pub fh: f64,
}

/// Where one test list's positive landed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ListOutcome {
    pub list_id: String,
    pub positive_rank: usize,
    pub list_size: usize,
    pub model_id: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Protocol {
    SlidingWindow,
    CrossProject,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub protocol: Protocol,
    pub variant: String,
    pub config_hash: String,
    pub config: EvalConfig,
    pub windows: Vec<WindowMetrics>,
    /// Per-metric mean across windows.
    pub mean: WindowMetrics,
    /// Per-metric median across windows.
    pub median: WindowMetrics,
    pub outcomes: Vec<ListOutcome>,
}

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

fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        0.0
    } else {
        xs.iter().sum::<f64>() / xs.len() as f64
    }
}

/// Metrics recomputed from positive ranks alone.
pub fn metrics_from_ranks(window: usize, ranks: &[usize]) -> WindowMetrics {
    let r = |k: usize| mean(&ranks.iter().map(|&p| f64::from(u8::from(p <= k))).collect::<Vec<_>>());
    WindowMetrics {
        window,
        n_test_lists: ranks.len(),
        r_at_1: r(1),
        r_at_3: r(3),
        r_at_5: r(5),
        r_at_10: r(10),
        fh: median(&ranks.iter().map(|&p| p as f64).collect::<Vec<_>>()),
    }
}

fn aggregate(windows: &[WindowMetrics], f: fn(&[f64]) -> f64) -> WindowMetrics {
    let col = |g: fn(&WindowMetrics) -> f64| f(&windows.iter().map(g).collect::<Vec<_>>());
    WindowMetrics {
        window: 0,
        n_test_lists: windows.iter().map(|w| w.n_test_lists).sum(),
        r_at_1: col(|w| w.r_at_1),
        r_at_3: col(|w| w.r_at_3),
        r_at_5: col(|w| w.r_at_5),
        r_at_10: col(|w| w.r_at_10),
        fh: col(|w| w.fh),
    }
}

/// Mixes the run seed with a list's position into a per-list shuffle seed.
fn list_seed(seed: u64, list: usize) -> u64 {
    let mut z = seed ^ (list as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Checks that every training and validation cutoff precedes every test cutoff.
pub fn check_leakage(p: &Prepared, window: usize, fit: &[usize], test: &[usize]) -> Result<(), EvalError> {
    let latest = fit.iter().map(|&i| p.cutoffs[i]).max();
    let earliest = test.iter().map(|&i| p.cutoffs[i]).min();
    if let (Some(train), Some(test)) = (latest, earliest) {
        if train > test {
            return Err(EvalError::Leakage { window, train, test });
        }
    }
    Ok(())
}

/// Trains (for model methods) and ranks the test lists of one split.
fn run_split(
    p: &Prepared,
    cfg: &EvalConfig,
    model_id: &str,
    train_idx: &[usize],
    val_idx: &[usize],
    test_idx: &[usize],
) -> Result<Vec<ListOutcome>, EvalError> {
    let model = match cfg.method {
        Method::Lambdamart | Method::Pointwise => {
            let objective = if cfg.method == Method::Lambdamart { Objective::Lambdarank } else { Objective::PointwiseLogloss };
            let tc = TrainConfig { objective, ..cfg.train.clone() };
            let tr: Vec<&LabeledList> = train_idx.iter().map(|&i| &p.lists[i]).collect();
            let va: Vec<&LabeledList> = val_idx.iter().map(|&i| &p.lists[i]).collect();
            let m = train(&tr, &va, &tc)?;
            info!("{model_id}: {} trees from {} lists", m.trees.len(), tr.len());
            Some(m)
        }
        Method::Random | Method::Gfirandom => None,
    };
    Ok(test_idx
        .iter()
        .map(|&i| ListOutcome {
            list_id: p.fi_ids[i].clone(),
            positive_rank: positive_rank_of(p, i, model.as_ref(), cfg),
            list_size: p.lists[i].len(),
            model_id: model_id.to_string(),
        })
        .collect())
}

fn positive_rank_of(p: &Prepared, i: usize, model: Option<&RankingModel>, cfg: &EvalConfig) -> usize {
    let list = &p.lists[i];
    let n = list.len();
    let order: Vec<usize> = match (cfg.method, model) {
        (Method::Random, _) => baseline_random(&(0..n).collect::<Vec<_>>(), list_seed(cfg.seed, i)),
        (Method::Gfirandom, _) => {
            baseline_gfirandom(&(0..n).collect::<Vec<_>>(), |&j| p.gfi[i][j], list_seed(cfg.seed, i))
        }
        (_, Some(m)) => {
            let scores: Vec<f64> = list.features.iter().map(|x| m.score(&x.values)).collect();
            let keys: Vec<(Timestamp, &str)> =
                p.created[i].iter().zip(&p.candidates[i]).map(|(t, id)| (*t, id.as_str())).collect();
            order_by_score(&scores, &keys)
        }
        (_, None) => unreachable!("model methods always train"),
    };
    order.iter().position(|&j| j == list.positive).expect("order is a permutation") + 1
}

fn report(
    cfg: &EvalConfig,
    protocol: Protocol,
    variant: &str,
    per_window: Vec<(usize, Vec<ListOutcome>)>,
) -> EvalReport {
    let windows: Vec<WindowMetrics> = per_window
        .iter()
        .map(|(w, outs)| metrics_from_ranks(*w, &outs.iter().map(|o| o.positive_rank).collect::<Vec<_>>()))
        .collect();
    EvalReport {
        protocol,
        variant: variant.to_string(),
        config_hash: cfg.hash(),
        config: cfg.clone(),
        mean: aggregate(&windows, mean),
        median: aggregate(&windows, median),
        windows,
        outcomes: per_window.into_iter().flat_map(|(_, o)| o).collect(),
    }
}

/// Sliding-window evaluation over chronological folds.
pub fn run_experiment(p: &Prepared, cfg: &EvalConfig) -> Result<EvalReport, EvalError> {
    run_variant(p, cfg, "full")
}

fn run_variant(p: &Prepared, cfg: &EvalConfig, variant: &str) -> Result<EvalReport, EvalError> {
    let folds = chronological_folds(&p.cutoffs, cfg.n_folds, cfg.fold_order)?;
    let windows = sliding_windows(cfg.n_folds);
    if cfg.fold_order == FoldOrder::Desc {
        warn!("descending fold order trains on lists that close after the test lists");
    }
    let per_window = windows
        .par_iter()
        .map(|w| {
            let train_idx: Vec<usize> = w.train.iter().flat_map(|&f| folds[f].iter().copied()).collect();
            let val_idx = &folds[w.val];
            let test_idx = &folds[w.test];
            if test_idx.is_empty() {
                return Err(EvalError::EmptyTest(w.t));
            }
            if cfg.fold_order == FoldOrder::Asc {
                let fit: Vec<usize> = train_idx.iter().chain(val_idx).copied().collect();
                check_leakage(p, w.t, &fit, test_idx)?;
            }
            let model_id = format!("{}-{variant}-T{}", cfg.method.as_str(), w.t);
            Ok((w.t, run_split(p, cfg, &model_id, &train_idx, val_idx, test_idx)?))
        })
        .collect::<Result<Vec<_>, EvalError>>()?;
    Ok(report(cfg, Protocol::SlidingWindow, variant, per_window))
}

/// The sliding-window protocol with one feature group masked out.
pub fn ablation(p: &Prepared, cfg: &EvalConfig, drop: FeatureGroup) -> Result<EvalReport, EvalError> {
    run_variant(&p.without(drop), cfg, &format!("no{drop}"))
}

/// Project-level cross-validation: projects are shuffled with the run seed
/// and dealt round-robin into `n_folds` folds. Each fold's lists are tested
/// on a model trained on the other projects' lists, split 9:1 in time into
/// training and validation.
pub fn cross_project(p: &Prepared, cfg: &EvalConfig, n_folds: usize) -> Result<EvalReport, EvalError> {
    let mut projects: Vec<&str> = p.projects.iter().map(String::as_str).collect();
    projects.sort_unstable();
    projects.dedup();
    if n_folds == 0 || projects.len() < n_folds {
        return Err(EvalError::TooFewLists { have: projects.len(), folds: n_folds });
    }
    projects.shuffle(&mut ChaCha8Rng::seed_from_u64(cfg.seed));
    let fold_of = |proj: &str| projects.iter().position(|q| *q == proj).unwrap() % n_folds;
    let list_fold: Vec<usize> = p.projects.iter().map(|q| fold_of(q)).collect();

    let per_fold = (0..n_folds)
        .into_par_iter()
        .map(|k| {
            let test_idx: Vec<usize> = (0..p.len()).filter(|&i| list_fold[i] == k).collect();
            if test_idx.is_empty() {
                return Err(EvalError::EmptyTest(k + 1));
            }
            let mut rest: Vec<usize> = (0..p.len()).filter(|&i| list_fold[i] != k).collect();
            rest.sort_by_key(|&i| p.cutoffs[i]);
            let n_train = (rest.len() * 9).div_ceil(10);
            let (train_idx, val_idx) = rest.split_at(n_train);
            let model_id = format!("{}-cross-F{}", cfg.method.as_str(), k + 1);
            Ok((k + 1, run_split(p, cfg, &model_id, train_idx, val_idx, &test_idx)?))
        })
        .collect::<Result<Vec<_>, EvalError>>()?;
    Ok(report(cfg, Protocol::CrossProject, "full", per_fold))
}

fn header(r: &EvalReport) -> String {
    format!(
        "# config_hash={} seed={} method={} variant={} protocol={}\n",
        r.config_hash,
        r.config.seed,
        r.config.method.as_str(),
        r.variant,
        match r.protocol {
            Protocol::SlidingWindow => "sliding_window",
            Protocol::CrossProject => "cross_project",
        }
    )
}

impl EvalReport {
    /// One row per window, then `mean` and `median` rows.
    pub fn to_csv(&self) -> String {
        let mut out = header(self);
        out.push_str("window,n_test_lists,r_at_1,r_at_3,r_at_5,r_at_10,fh\n");
        let row = |out: &mut String, label: &str, m: &WindowMetrics| {
            let _ = writeln!(
                out,
                "{label},{},{:.6},{:.6},{:.6},{:.6},{:.6}",
                m.n_test_lists, m.r_at_1, m.r_at_3, m.r_at_5, m.r_at_10, m.fh
            );
        };
        for w in &self.windows {
            row(&mut out, &w.window.to_string(), w);
        }
        row(&mut out, "mean", &self.mean);
        row(&mut out, "median", &self.median);
        out
    }

    pub fn ranks_csv(&self) -> String {
        let mut out = header(self);
        out.push_str("list_id,positive_rank,list_size,model_id\n");
        for o in &self.outcomes {
            let _ = writeln!(out, "{},{},{},{}", o.list_id, o.positive_rank, o.list_size, o.model_id);
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
