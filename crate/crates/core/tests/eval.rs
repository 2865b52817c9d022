use std::collections::BTreeSet;
use std::sync::OnceLock;

use issuerank::corpus::{generate_synthetic_corpus, PlantedFeature, PlantedSignal, SynthConfig};
use issuerank::eval::{
    ablation, check_leakage, chronological_folds, cross_project, first_hit, metrics_from_ranks, prepare, recall_at_k,
    run_experiment, sliding_windows, EvalConfig, EvalError, FoldOrder, Method, Prepared,
};
use issuerank::features::{build_hashed_store, FeatureGroup, Featurizer, Resources};
use issuerank::ltr::TrainConfig;
use proptest::prelude::*;

fn prepared_from(cfg: &SynthConfig) -> Prepared {
    let corpus = generate_synthetic_corpus(cfg);
    let res = Resources::default();
    let store = build_hashed_store(&corpus, &res.stop);
    let f = Featurizer::new(&corpus, &store, &res);
    prepare(&corpus, &corpus.lists, &f).unwrap()
}

fn small() -> &'static Prepared {
    static P: OnceLock<Prepared> = OnceLock::new();
    P.get_or_init(|| {
        prepared_from(&SynthConfig {
            seed: 5,
            n_projects: 12,
            n_lists: 200,
            planted: Some(PlantedSignal { feature: PlantedFeature::PrJaccard, noise: 0.05 }),
            ..SynthConfig::default()
        })
    })
}

fn fast(method: Method) -> EvalConfig {
    EvalConfig {
        method,
        train: TrainConfig { n_trees: 10, early_stopping_rounds: 5, min_samples_leaf: 5, ..TrainConfig::default() },
        ..EvalConfig::default()
    }
}

#[test]
fn report_metrics_match_raw_ranks() {
    let p = small();
    let r = run_experiment(p, &fast(Method::Lambdamart)).unwrap();
    assert_eq!(r.windows.len(), 18);
    for w in &r.windows {
        let model_id = format!("lambdamart-full-T{}", w.window);
        let ranks: Vec<usize> =
            r.outcomes.iter().filter(|o| o.model_id == model_id).map(|o| o.positive_rank).collect();
        assert_eq!(&metrics_from_ranks(w.window, &ranks), w);
        assert!(w.r_at_1 <= w.r_at_3 && w.r_at_3 <= w.r_at_5 && w.r_at_5 <= w.r_at_10);
        assert!(w.fh >= 1.0);
    }
    for o in &r.outcomes {
        assert!(o.positive_rank >= 1 && o.positive_rank <= o.list_size);
    }
}

#[test]
fn test_folds_cover_folds_three_to_twenty() {
    let p = small();
    let r = run_experiment(p, &fast(Method::Random)).unwrap();
    let folds = chronological_folds(&p.cutoffs, 20, FoldOrder::Asc).unwrap();
    let expected: BTreeSet<&str> = folds[2..].iter().flatten().map(|&i| p.fi_ids[i].as_str()).collect();
    let seen: BTreeSet<&str> = r.outcomes.iter().map(|o| o.list_id.as_str()).collect();
    assert_eq!(seen, expected);
    assert_eq!(r.outcomes.len(), expected.len());
}

#[test]
fn no_window_trains_on_the_future() {
    let p = small();
    let folds = chronological_folds(&p.cutoffs, 20, FoldOrder::Asc).unwrap();
    for w in sliding_windows(20) {
        let fit: Vec<usize> = w.train.iter().chain([&w.val]).flat_map(|&f| folds[f].iter().copied()).collect();
        check_leakage(p, w.t, &fit, &folds[w.test]).unwrap();
    }
    let desc = chronological_folds(&p.cutoffs, 20, FoldOrder::Desc).unwrap();
    let w = &sliding_windows(20)[0];
    let fit: Vec<usize> = desc[w.train[0]].iter().chain(&desc[w.val]).copied().collect();
    assert!(matches!(check_leakage(p, w.t, &fit, &desc[w.test]), Err(EvalError::Leakage { .. })));
    // The literal descending reading still runs, with a warning.
    assert!(run_experiment(p, &EvalConfig { fold_order: FoldOrder::Desc, ..fast(Method::Random) }).is_ok());
}

#[test]
fn reports_are_deterministic() {
    let p = small();
    for m in [Method::Lambdamart, Method::Gfirandom] {
        let a = run_experiment(p, &fast(m)).unwrap();
        let b = run_experiment(p, &fast(m)).unwrap();
        assert_eq!(a.to_csv(), b.to_csv());
        assert_eq!(a.ranks_csv(), b.ranks_csv());
        assert_eq!(a.to_json(), b.to_json());
    }
    let a = run_experiment(p, &fast(Method::Random)).unwrap();
    let b = run_experiment(p, &EvalConfig { seed: 2, ..fast(Method::Random) }).unwrap();
    assert_ne!(a.config_hash, b.config_hash);
    assert_ne!(a.ranks_csv(), b.ranks_csv());
}

#[test]
fn csv_layout() {
    let r = run_experiment(small(), &fast(Method::Random)).unwrap();
    let csv = r.to_csv();
    let lines: Vec<&str> = csv.lines().collect();
    assert!(lines[0].starts_with(&format!("# config_hash={} seed=1 method=random variant=full", r.config_hash)));
    assert_eq!(lines[1], "window,n_test_lists,r_at_1,r_at_3,r_at_5,r_at_10,fh");
    assert!(lines[2].starts_with("3,10,"));
    assert_eq!(lines.len(), 2 + 18 + 2);
    assert!(lines[20].starts_with("mean,"));
    assert!(lines[21].starts_with("median,"));
}

#[test]
fn random_first_hit_is_central() {
    let p = small();
    let r = run_experiment(p, &fast(Method::Random)).unwrap();
    let ranks: Vec<usize> = r.outcomes.iter().map(|o| o.positive_rank).collect();
    let pooled = metrics_from_ranks(0, &ranks);
    assert!(ranks.len() >= 180);
    assert!((12.0..=20.0).contains(&pooled.fh), "{}", pooled.fh);
}

#[test]
fn gfirandom_beats_random_when_labels_are_informative() {
    let p = prepared_from(&SynthConfig {
        seed: 9,
        n_projects: 10,
        n_lists: 600,
        gfi_rate_positive: 0.5,
        gfi_rate_negative: 0.1,
        ..SynthConfig::default()
    });
    let pooled = |m| {
        let r = run_experiment(&p, &fast(m)).unwrap();
        metrics_from_ranks(0, &r.outcomes.iter().map(|o| o.positive_rank).collect::<Vec<_>>()).fh
    };
    let (g, r) = (pooled(Method::Gfirandom), pooled(Method::Random));
    assert!(g < r, "GFIRandom {g} vs Random {r}");
}

#[test]
fn masked_vectors_shrink_by_group_size() {
    let p = small();
    let full = p.registry.len();
    for g in FeatureGroup::ALL {
        let m = p.without(g);
        let dropped = p.registry.entries().iter().filter(|e| e.group == g).count();
        assert_eq!(m.lists[0].features[0].len(), full - dropped);
        assert_eq!(m.registry.len(), full - dropped);
    }
}

#[test]
fn dropping_an_all_zero_group_changes_nothing() {
    let mut p = small().clone();
    let zero: Vec<usize> = p
        .registry
        .entries()
        .iter()
        .enumerate()
        .filter(|(_, e)| e.group == FeatureGroup::Senti)
        .map(|(i, _)| i)
        .collect();
    for l in &mut p.lists {
        for x in &mut l.features {
            for &i in &zero {
                x.values[i] = 0.0;
            }
        }
    }
    let cfg = fast(Method::Lambdamart);
    let full = run_experiment(&p, &cfg).unwrap();
    let ablated = ablation(&p, &cfg, FeatureGroup::Senti).unwrap();
    assert_eq!(ablated.variant, "noSenti");
    assert_eq!(full.windows, ablated.windows);
}

#[test]
fn cross_project_partitions_lists() {
    let p = small();
    let r = cross_project(p, &fast(Method::Lambdamart), 10).unwrap();
    assert_eq!(r.windows.len(), 10);
    let mut ids: Vec<&str> = r.outcomes.iter().map(|o| o.list_id.as_str()).collect();
    ids.sort_unstable();
    let mut all: Vec<&str> = p.fi_ids.iter().map(String::as_str).collect();
    all.sort_unstable();
    assert_eq!(ids, all);
    let projects: BTreeSet<&str> = p.projects.iter().map(String::as_str).collect();
    assert!(matches!(
        cross_project(p, &fast(Method::Random), projects.len() + 1),
        Err(EvalError::TooFewLists { .. })
    ));
}

#[test]
fn leave_one_project_out() {
    let p = small();
    let projects: BTreeSet<&str> = p.projects.iter().map(String::as_str).collect();
    let r = cross_project(p, &fast(Method::Random), projects.len()).unwrap();
    for k in 1..=projects.len() {
        let in_fold: BTreeSet<&str> = r
            .outcomes
            .iter()
            .filter(|o| o.model_id == format!("random-cross-F{k}"))
            .map(|o| p.projects[p.fi_ids.iter().position(|f| *f == o.list_id).unwrap()].as_str())
            .collect();
        assert_eq!(in_fold.len(), 1);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn metrics_agree_with_linear_scan(n in 1usize..64, pos in 0usize..64, seed in any::<u64>(), k in 1usize..70) {
        let pos = pos % n;
        let ids: Vec<String> = (0..n).map(|i| format!("x{i}")).collect();
        let ranked = issuerank::ltr::baseline_random(&ids, seed);
        let mut fh = 0;
        for (i, id) in ranked.iter().enumerate() {
            if *id == ids[pos] {
                fh = i + 1;
            }
        }
        prop_assert_eq!(first_hit(&ranked, &ids[pos]), Some(fh));
        prop_assert_eq!(recall_at_k(&ranked, &ids[pos], k), u8::from(fh <= k));
        prop_assert!(recall_at_k(&ranked, &ids[pos], k) <= recall_at_k(&ranked, &ids[pos], k + 1));
    }

    #[test]
    fn folds_partition_any_cutoffs(hours in prop::collection::vec(0i64..500, 20..200)) {
        let t0 = chrono::DateTime::<chrono::Utc>::UNIX_EPOCH;
        let cutoffs: Vec<_> = hours.iter().map(|h| t0 + chrono::Duration::hours(*h)).collect();
        let folds = chronological_folds(&cutoffs, 20, FoldOrder::Asc).unwrap();
        let mut all: Vec<usize> = folds.iter().flatten().copied().collect();
        all.sort_unstable();
        prop_assert_eq!(all, (0..cutoffs.len()).collect::<Vec<_>>());
        for w in folds.windows(2) {
            let max = w[0].iter().map(|&i| cutoffs[i]).max().unwrap();
            let min = w[1].iter().map(|&i| cutoffs[i]).min().unwrap();
            prop_assert!(max <= min);
        }
        prop_assert!(folds[..19].iter().all(|f| f.len() == cutoffs.len() / 20));
    }
}
