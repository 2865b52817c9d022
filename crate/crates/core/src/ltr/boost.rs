use log::{debug, warn};

use super::model::{positive_rank, RankingModel, MODEL_FORMAT, MODEL_VERSION};
use super::tree::{fit_tree, Columns, TreeParams};
use super::{LabeledList, LtrError, Objective, TrainConfig};

const MAX_EXPONENT: f64 = 700.0;

/// LambdaRank pair gradient for the positive item and the pair hessian.
/// The negative item receives `-lambda` and the same hessian.
pub fn lambda_pair(score_pos: f64, score_neg: f64, delta_ndcg: f64, sigma: f64) -> (f64, f64) {
    if delta_ndcg == 0.0 {
        return (0.0, 0.0);
    }
    let z = (sigma * (score_pos - score_neg)).clamp(-MAX_EXPONENT, MAX_EXPONENT);
    let rho = 1.0 / (1.0 + z.exp());
    (-sigma * rho * delta_ndcg, sigma * sigma * rho * (1.0 - rho) * delta_ndcg)
}

/// NDCG change from swapping a lone positive between two 1-based ranks.
pub fn delta_ndcg_single_positive(rank_a: usize, rank_b: usize, _list_size: usize) -> f64 {
    let gain = |r: usize| 1.0 / (1.0 + r as f64).log2();
    (gain(rank_a) - gain(rank_b)).abs()
}

fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x.clamp(-MAX_EXPONENT, MAX_EXPONENT)).exp())
}

/// 1-based ranks of every item, ties resolved by position.
fn ranks(scores: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    let mut r = vec![0; scores.len()];
    for (k, &i) in order.iter().enumerate() {
        r[i] = k + 1;
    }
    r
}

/// Sum over lists and negatives of pairwise cross-entropy, each pair
/// weighted by the ΔNDCG of swapping it in the ideal ordering (positive
/// first, negatives in tie order). Fixed weights make this a convex function
/// of the scores, so it can track training progress.
pub fn pairwise_loss(model: &RankingModel, lists: &[&LabeledList], sigma: f64) -> f64 {
    let mut total = 0.0;
    for list in lists {
        let scores: Vec<f64> = list.features.iter().map(|x| model.score(&x.values)).collect();
        let p = list.positive;
        for n in (0..scores.len()).filter(|&n| n != p) {
            let ideal_rank = if n < p { n + 2 } else { n + 1 };
            let delta = delta_ndcg_single_positive(1, ideal_rank, scores.len());
            total += delta * softplus(-sigma * (scores[p] - scores[n]));
        }
    }
    total
}

pub fn train_lambdamart(train_lists: &[&LabeledList], val: &[&LabeledList], cfg: &TrainConfig) -> Result<RankingModel, LtrError> {
    train(train_lists, val, &TrainConfig { objective: Objective::Lambdarank, ..cfg.clone() })
}

pub fn train_pointwise_gbt(train_lists: &[&LabeledList], val: &[&LabeledList], cfg: &TrainConfig) -> Result<RankingModel, LtrError> {
    train(train_lists, val, &TrainConfig { objective: Objective::PointwiseLogloss, ..cfg.clone() })
}

/// Consistency checks; returns (feature count, registry version).
fn check_lists(lists: &[&LabeledList], expect: Option<(usize, &str)>) -> Result<Option<(usize, String)>, LtrError> {
    let mut shape: Option<(usize, String)> = expect.map(|(n, v)| (n, v.to_string()));
    for (i, list) in lists.iter().enumerate() {
        if list.positive >= list.len() {
            return Err(LtrError::Data(format!("list {i}: positive index {} out of range", list.positive)));
        }
        for x in &list.features {
            match &shape {
                None => shape = Some((x.len(), x.registry_version.to_string())),
                Some((n, v)) => {
                    if x.len() != *n || *x.registry_version != **v {
                        return Err(LtrError::Data(format!(
                            "list {i}: vector of length {} / registry {} differs from {n} / {v}",
                            x.len(),
                            x.registry_version
                        )));
                    }
                }
            }
        }
    }
    Ok(shape)
}

/// Gradient boosting under `cfg.objective`, early-stopped on the median
/// first-hit rank of `val` (mean first-hit breaks ties).
pub fn train(train_lists: &[&LabeledList], val: &[&LabeledList], cfg: &TrainConfig) -> Result<RankingModel, LtrError> {
    cfg.validate()?;
    let usable: Vec<&LabeledList> = train_lists
        .iter()
        .copied()
        .filter(|l| {
            if cfg.objective == Objective::Lambdarank && l.len() < 2 {
                warn!("skipping training list with no negatives");
                false
            } else {
                true
            }
        })
        .collect();
    if usable.is_empty() {
        return Err(LtrError::EmptyTraining);
    }
    let Some((n_features, registry_version)) = check_lists(&usable, None)? else {
        return Err(LtrError::EmptyTraining);
    };
    check_lists(val, Some((n_features, &registry_version)))?;

    let mut offsets = Vec::with_capacity(usable.len() + 1);
    offsets.push(0);
    for l in &usable {
        offsets.push(offsets.last().unwrap() + l.len());
    }
    let n_rows = *offsets.last().unwrap();
    let mut cols = vec![Vec::with_capacity(n_rows); n_features];
    for l in &usable {
        for x in &l.features {
            for (c, v) in cols.iter_mut().zip(&x.values) {
                c.push(*v);
            }
        }
    }
    let data = Columns::new(cols, n_rows);
    let params = TreeParams { max_leaves: cfg.max_leaves, min_samples_leaf: cfg.min_samples_leaf };

    let mut model = RankingModel {
        format: MODEL_FORMAT.to_string(),
        version: MODEL_VERSION,
        objective: cfg.objective,
        learning_rate: cfg.learning_rate,
        registry_version,
        n_features,
        hyperparameters: cfg.clone(),
        trees: Vec::new(),
    };
    let mut scores = vec![0.0; n_rows];
    let mut grad = vec![0.0; n_rows];
    let mut hess = vec![0.0; n_rows];
    let mut val_scores: Vec<Vec<f64>> = val.iter().map(|l| vec![0.0; l.len()]).collect();
    let mut best: Option<(f64, f64, usize)> = None;
    let mut since_best = 0;

    for t in 0..cfg.n_trees {
        grad.fill(0.0);
        hess.fill(0.0);
        for (li, l) in usable.iter().enumerate() {
            let (a, b) = (offsets[li], offsets[li + 1]);
            let s = &scores[a..b];
            let (g, h) = (&mut grad[a..b], &mut hess[a..b]);
            match cfg.objective {
                Objective::Lambdarank => lambda_gradients(s, l.positive, cfg.sigma, g, h),
                Objective::PointwiseLogloss => {
                    for i in 0..s.len() {
                        let p = sigmoid(s[i]);
                        let y = if i == l.positive { 1.0 } else { 0.0 };
                        g[i] = p - y;
                        h[i] = p * (1.0 - p);
                    }
                }
            }
        }
        let (tree, deltas) = fit_tree(&data, &grad, &hess, params);
        for (s, d) in scores.iter_mut().zip(&deltas) {
            *s += cfg.learning_rate * d;
        }
        for (vs, l) in val_scores.iter_mut().zip(val) {
            for (s, x) in vs.iter_mut().zip(&l.features) {
                *s += cfg.learning_rate * tree.eval(&x.values);
            }
        }
        model.trees.push(tree);

        if val.is_empty() {
            continue;
        }
        let mut fh: Vec<f64> = val_scores
            .iter()
            .zip(val)
            .map(|(s, l)| positive_rank(s, l.positive) as f64)
            .collect();
        let mean = fh.iter().sum::<f64>() / fh.len() as f64;
        fh.sort_by(f64::total_cmp);
        let m = fh.len() / 2;
        let median = if fh.len() % 2 == 1 { fh[m] } else { (fh[m - 1] + fh[m]) / 2.0 };
        debug!("tree {}: validation median FH {median}, mean FH {mean:.4}", t + 1);
        if best.is_none_or(|(bm, bmean, _)| (median, mean) < (bm, bmean)) {
            best = Some((median, mean, t + 1));
            since_best = 0;
        } else {
            since_best += 1;
            if cfg.early_stopping_rounds > 0 && since_best >= cfg.early_stopping_rounds {
                break;
            }
        }
    }
    if let Some((_, _, keep)) = best {
        model.trees.truncate(keep);
    }
    Ok(model)
}

fn lambda_gradients(scores: &[f64], pos: usize, sigma: f64, grad: &mut [f64], hess: &mut [f64]) {
    let r = ranks(scores);
    for n in 0..scores.len() {
        if n == pos {
            continue;
        }
        let delta = delta_ndcg_single_positive(r[pos], r[n], scores.len());
        let (lambda, h) = lambda_pair(scores[pos], scores[n], delta, sigma);
        grad[pos] += lambda;
        grad[n] -= lambda;
        hess[pos] += h;
        hess[n] += h;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lambda_hand_values() {
        let (l, h) = lambda_pair(0.0, 0.0, 0.5, 1.0);
        assert!((l + 0.25).abs() < 1e-15);
        assert!((h - 0.125).abs() < 1e-15);
        assert_eq!(lambda_pair(3.0, -1.0, 0.0, 2.0), (0.0, 0.0));
        let (l, _) = lambda_pair(1e6, -1e6, 1.0, 1.0);
        assert!(l <= 0.0 && l > -1e-200);
        let (l, h) = lambda_pair(-1e6, 1e6, 1.0, 1.0);
        assert!((l + 1.0).abs() < 1e-12 && h.is_finite());
    }

    #[test]
    fn delta_ndcg_values() {
        let d = delta_ndcg_single_positive(1, 2, 32);
        assert!((d - (1.0 - 1.0 / 3f64.log2())).abs() < 1e-12);
        assert!((d - 0.36907).abs() < 1e-5);
        assert_eq!(delta_ndcg_single_positive(4, 4, 32), 0.0);
        assert!(delta_ndcg_single_positive(1, 1_000_000_000, 1_000_000_000) > 0.95);
    }

    #[test]
    fn gradients_are_antisymmetric() {
        let scores = [0.3, -0.2, 0.9, 0.1];
        let mut g = [0.0; 4];
        let mut h = [0.0; 4];
        lambda_gradients(&scores, 1, 1.0, &mut g, &mut h);
        assert!(g.iter().sum::<f64>().abs() < 1e-15);
        assert!(g[1] < 0.0);
        assert!(h.iter().all(|v| *v >= 0.0));
    }

    #[test]
    fn ranks_break_ties_by_position() {
        assert_eq!(ranks(&[0.9, 0.1, 0.5]), vec![1, 3, 2]);
        assert_eq!(ranks(&[0.0, 0.0, 0.0]), vec![1, 2, 3]);
    }
}
