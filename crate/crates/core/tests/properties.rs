mod common;

use std::io::Write;

use fca_outlier::*;
use rand::Rng;

use common::{brute_closure, random_context, rng};

fn params(bins: usize, seed: u64) -> UnsupParams {
    UnsupParams {
        bins,
        alpha: 2,
        include_full: true,
        gamma: None,
        seed,
    }
}

#[test]
fn closure_matches_oracle_on_five_feature_agendas() {
    let mut r = rng(31);
    for _ in 0..60 {
        let objects = r.random_range(1..=12);
        let features = r.random_range(1..=10);
        let density = r.random_range(0.1..=0.9);
        let ctx = random_context(&mut r, objects, features, density);
        let pop = ObjectMask::from_indices(objects, (0..objects).filter(|_| r.random_bool(0.6)));
        // Every agenda inside a random window of at most five features.
        let lo = r.random_range(0..features);
        let window: Vec<usize> = (lo..features.min(lo + 5)).collect();
        for bits in 0u32..(1 << window.len()) {
            let agenda = FeatureMask::from_indices(
                features,
                window
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| bits >> i & 1 == 1)
                    .map(|(_, &x)| x),
            );
            let all = ctx.closure_sizes_all(&agenda, &pop).unwrap();
            for (a, &batch) in all.iter().enumerate() {
                let intent = ctx.query_intent(a).unwrap();
                let expected = brute_closure(&ctx, &intent, &agenda, &pop).len();
                assert_eq!(ctx.closure_size(&intent, &agenda, &pop).unwrap(), expected);
                assert_eq!(batch, expected);
            }
        }
    }
}

#[test]
fn degree_matrix_matches_brute_force_on_scaled_data() {
    let table = common::planted_outliers(3, 120, 6);
    let model = fit_unsup(&table, &params(7, 3)).unwrap();
    let queries = common::planted_outliers(99, 30, 5);
    let intents = model.scaler().intents(&queries).unwrap();
    let d = model.degree_matrix_for(&queries).unwrap();
    let ctx = model.context();
    for (q, intent) in intents.iter().enumerate() {
        for (t, mask) in model.masks().iter().enumerate() {
            let size = brute_closure(ctx, intent, mask, model.population()).len();
            assert_eq!(d.get(q, t), degree(size, model.gamma()));
        }
    }
}

#[test]
fn superset_agendas_never_lower_degrees() {
    let table = common::planted_outliers(8, 200, 10);
    let model = fit_unsup(&table, &params(10, 8)).unwrap();
    let d = model.training_degrees().unwrap();
    let space = model.space();
    for (i, small) in space.iter().enumerate() {
        for (j, big) in space.iter().enumerate() {
            if small
                .attributes()
                .iter()
                .all(|a| big.attributes().contains(a))
            {
                for r in 0..d.num_rows() {
                    assert!(d.get(r, j) >= d.get(r, i));
                }
            }
        }
    }
}

#[test]
fn unsupervised_scores_are_in_unit_interval() {
    let table = common::planted_outliers(2, 100, 5);
    let model = fit_unsup(&table, &params(8, 2)).unwrap();
    for s in model.score_table(&table).unwrap() {
        assert!(s > 0.0 && s <= 1.0);
    }
    // An empty intent is contained in every training intent.
    let nf = model.context().num_features();
    let d = model
        .degree_matrix(&[FeatureMask::none(nf)], vec!["q".into()])
        .unwrap();
    assert!(model.scores(&d).unwrap()[0] < 1.0);

    // Every bin set at once matches no training object under any agenda.
    let full = FeatureMask::all(nf);
    let d = model.degree_matrix(&[full], vec!["q".into()]).unwrap();
    assert_eq!(model.scores(&d).unwrap()[0], 1.0);
}

#[test]
fn duplicating_training_data_keeps_the_ranking() {
    let table = common::planted_outliers(5, 150, 8);
    let mut rows = table.rows().to_vec();
    rows.extend(table.rows().iter().cloned());
    let doubled = DataTable::from_rows(table.column_names().to_vec(), rows, None).unwrap();

    let gamma = 0.05;
    let scaler = Scaler::fit(&table, 12).unwrap();
    let space = small_agendas(4, 2, true).unwrap();
    let once = UnsupModel::new(scaler.clone(), &table, space.clone(), gamma, None).unwrap();
    let twice = UnsupModel::new(scaler, &doubled, space, gamma / 2.0, None).unwrap();

    let a = once.degree_matrix_for(&table).unwrap();
    let b = twice.degree_matrix_for(&table).unwrap();
    let ctx1 = once.context();
    let ctx2 = twice.context();
    let intents = once.scaler().intents(&table).unwrap();
    for (q, intent) in intents.iter().enumerate() {
        for (t, mask) in once.masks().iter().enumerate() {
            let n1 = brute_closure(ctx1, intent, mask, once.population()).len();
            let n2 = brute_closure(ctx2, intent, mask, twice.population()).len();
            assert_eq!(n2, 2 * n1);
            assert!((a.get(q, t) - b.get(q, t)).abs() < 1e-15);
        }
    }
    let order = |s: Vec<f64>| {
        let mut idx: Vec<usize> = (0..s.len()).collect();
        idx.sort_by(|&i, &j| s[j].total_cmp(&s[i]).then(i.cmp(&j)));
        idx
    };
    assert_eq!(
        order(once.scores(&a).unwrap()),
        order(twice.scores(&b).unwrap())
    );
}

#[test]
fn weighted_score_is_scale_invariant() {
    let mut r = rng(12);
    for _ in 0..500 {
        let n = r.random_range(1..=12);
        let row: Vec<f64> = (0..n).map(|_| r.random::<f64>()).collect();
        let w: Vec<f64> = (0..n).map(|_| r.random_range(-1.0..1.0)).collect();
        if w.iter().sum::<f64>().abs() < 1e-3 {
            continue;
        }
        let c = r.random_range(1e-3..1e3);
        let cw: Vec<f64> = w.iter().map(|x| c * x).collect();
        let a = weighted_score(&row, &w, 1e-8).unwrap();
        let b = weighted_score(&row, &cw, 1e-8).unwrap();
        assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0), "{a} vs {b}");
    }
}

#[test]
fn supervised_model_counts_only_inliers() {
    let table = common::pair_only_outliers(1, 120, 12);
    let config = TrainConfig {
        epochs: 40,
        orientation: LossOrientation::Swapped,
        ..TrainConfig::default()
    };
    let model = fit_sup(&table, &params(6, 1), &config).unwrap();
    let labels = table.labels().unwrap();
    let pop = model.unsup().population();
    for (i, &l) in labels.iter().enumerate() {
        assert_eq!(pop.get(i), !l);
    }
    assert_eq!(model.loss_trace().len(), 40);
    assert!(model.loss_trace().last().unwrap() < &model.loss_trace()[0]);

    // Contribution identity for weighted scores.
    let m: Model = model.into();
    let d = m.inner().degree_matrix_for(&table).unwrap();
    let scores = m.scores(&d).unwrap();
    for (i, s) in scores.iter().enumerate() {
        let e = explain_row(&m, &i.to_string(), d.row(i), usize::MAX, f64::NEG_INFINITY).unwrap();
        let sum: f64 = e.entries.iter().map(|x| x.contribution).sum();
        assert!((sum - s).abs() <= 1e-9);
        assert!((e.score - s).abs() <= 1e-9);
    }
}

#[test]
fn histogram_mass_and_counts() {
    let table = common::planted_outliers(6, 90, 4);
    let model: Model = fit_unsup(&table, &params(5, 6)).unwrap().into();
    let inner = model.inner();
    for (t, agenda) in model.space().iter().enumerate() {
        let hist = export_histogram(&model, agenda.name()).unwrap();
        let mass: usize = hist.iter().map(|b| b.count).sum();
        assert_eq!(mass, inner.population().count_ones());
        let mut expected = std::collections::BTreeMap::new();
        for a in inner.population().iter_ones() {
            let intent = inner.context().query_intent(a).unwrap();
            let size = brute_closure(
                inner.context(),
                &intent,
                &inner.masks()[t],
                inner.population(),
            )
            .len();
            *expected.entry(size).or_insert(0) += 1;
        }
        let got: std::collections::BTreeMap<usize, usize> =
            hist.iter().map(|b| (b.closure_size, b.count)).collect();
        assert_eq!(got, expected);
    }
}

#[test]
fn csv_to_saved_model_round_trip() {
    let table = common::planted_outliers(4, 80, 6);
    let mut file = tempfile::NamedTempFile::new().unwrap();
    writeln!(file, "id,{},label", table.column_names().join(",")).unwrap();
    for (i, row) in table.rows().iter().enumerate() {
        let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        writeln!(
            file,
            "r{i},{},{}",
            cells.join(","),
            table.labels().unwrap()[i] as u8
        )
        .unwrap();
    }
    file.flush().unwrap();

    let read = DataTable::read_csv(file.path(), Some("label"), Some("id")).unwrap();
    assert_eq!(read.rows(), table.rows());
    assert_eq!(read.labels(), table.labels());
    assert_eq!(read.record_ids()[3], "r3");

    let config = PipelineConfig::new(params(9, 4));
    let report = evaluate(&read, &config).unwrap();
    assert_eq!(report.scores.len(), report.split.test_indices.len());

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.model");
    report.model.save(&path).unwrap();
    let back = Model::load(&path).unwrap();
    let test = read.subset(&report.split.test_indices);
    let again = back.score_table(&test).unwrap();
    assert_eq!(
        again.iter().map(|x| x.to_bits()).collect::<Vec<_>>(),
        report
            .scores
            .iter()
            .map(|x| x.to_bits())
            .collect::<Vec<_>>()
    );
    assert_eq!(report.test_ids, test.record_ids());
}

#[test]
fn adaptive_training_keeps_a_valid_space() {
    let table = common::pair_only_outliers(2, 150, 15);
    let scaler = Scaler::fit(&table, 8).unwrap();
    let config = TrainConfig {
        epochs: 60,
        orientation: LossOrientation::Swapped,
        ..TrainConfig::default()
    };
    let (model, outcome) = fit_sup_adaptive(scaler, &table, 0.2, &config, &[2, 3], None).unwrap();
    assert!(!outcome.rounds.is_empty());
    match model {
        Some(m) => {
            assert_eq!(m.unsup().space().len(), outcome.space.len());
            assert_eq!(m.weights().len(), outcome.space.len());
        }
        None => assert!(outcome.diagnostic.is_some()),
    }
}
