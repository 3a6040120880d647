use std::collections::BTreeMap;

use proptest::prelude::*;

use instimpact::boost::{
    leaf_weight, split_gain, train, BoostParams, FeatureMatrix, Learner,
};
use instimpact::corpus::{
    Authorship, CleaningConfig, ConferenceEdition, Corpus, GdpTable, InstitutionRecord, PaperRecord,
};
use instimpact::rankeval::ndcg_at;
use instimpact::scalar::Summary;
use instimpact::scimetrics::{geo_distance, h_index_of, relevance_scores, EARTH_RADIUS_KM};

const INSTS: [&str; 5] = ["I1", "I2", "I3", "I4", "I5"];

fn authorship() -> impl Strategy<Value = (u8, Vec<usize>)> {
    (0u8..8, prop::collection::btree_set(0usize..INSTS.len(), 1..=2))
        .prop_map(|(a, s)| (a, s.into_iter().collect()))
}

fn paper_spec() -> impl Strategy<Value = (i32, u64, Vec<(u8, Vec<usize>)>)> {
    (2000i32..2003, 0u64..50, prop::collection::vec(authorship(), 1..=4))
}

fn build_corpus(specs: &[(i32, u64, Vec<(u8, Vec<usize>)>)]) -> Corpus {
    let papers = specs
        .iter()
        .enumerate()
        .map(|(i, (year, cites, authors))| PaperRecord {
            paper_id: format!("P{i:03}"),
            year: *year,
            conference_id: "C".into(),
            citation_count: *cites,
            authorships: authors
                .iter()
                .map(|(a, insts)| Authorship {
                    author_id: format!("A{a}"),
                    institution_ids: insts.iter().map(|&k| INSTS[k].to_string()).collect(),
                })
                .collect(),
        })
        .collect();
    let institutions = INSTS
        .iter()
        .enumerate()
        .map(|(k, id)| InstitutionRecord {
            institution_id: id.to_string(),
            latitude: 10.0 * k as f64,
            longitude: -20.0 * k as f64,
            country_code: "US".into(),
        })
        .collect();
    let editions = (2000..2003)
        .map(|y| ConferenceEdition {
            conference_id: "C".into(),
            year: y,
            latitude: 0.0,
            longitude: 0.0,
        })
        .collect();
    Corpus::from_parts(papers, institutions, editions, GdpTable::new(), &CleaningConfig::default())
        .unwrap()
        .0
}

fn dataset(max_rows: usize, max_cols: usize) -> impl Strategy<Value = (Vec<Vec<f64>>, Vec<f64>)> {
    (2..=max_rows, 1..=max_cols).prop_flat_map(|(n, d)| {
        (
            prop::collection::vec(prop::collection::vec(-10.0f64..10.0, d), n),
            prop::collection::vec(-5.0f64..5.0, n),
        )
    })
}

fn names(d: usize) -> Vec<String> {
    (0..d).map(|i| format!("f{i}")).collect()
}

fn mse(x: &FeatureMatrix<f64>, y: &[f64], predict: impl Fn(&[f64]) -> f64) -> f64 {
    (0..x.rows()).map(|i| (predict(x.row(i)) - y[i]).powi(2)).sum::<f64>() / x.rows() as f64
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn credit_sums_to_paper_count(specs in prop::collection::vec(paper_spec(), 1..30)) {
        let corpus = build_corpus(&specs);
        for year in 2000..2003 {
            let scores = relevance_scores(&corpus, "C", year).unwrap();
            let total: f64 = scores.values().sum();
            let papers = specs.iter().filter(|s| s.0 == year).count() as f64;
            prop_assert!((total - papers).abs() <= 1e-9, "{year}: {total} vs {papers}");
            prop_assert!(scores.values().all(|&v| v > 0.0));
        }
    }

    #[test]
    fn haversine_symmetric_and_bounded(
        a in (-90.0f64..=90.0, -180.0f64..=180.0),
        b in (-90.0f64..=90.0, -180.0f64..=180.0),
    ) {
        let ab = geo_distance(a.0, a.1, b.0, b.1);
        let ba = geo_distance(b.0, b.1, a.0, a.1);
        prop_assert_eq!(ab, ba);
        prop_assert!(ab >= 0.0 && ab <= std::f64::consts::PI * EARTH_RADIUS_KM + 1e-9);
        prop_assert_eq!(geo_distance(a.0, a.1, a.0, a.1), 0.0);
    }

    #[test]
    fn h_index_is_monotone(mut cites in prop::collection::vec(0u64..40, 0..30), extra in 0u64..40) {
        let h = h_index_of(cites.iter().copied());
        prop_assert!(h as usize <= cites.len());
        // h papers with at least h citations, and not h + 1 with h + 1
        prop_assert!(cites.iter().filter(|&&c| c >= h as u64).count() >= h as usize);
        prop_assert!(cites.iter().filter(|&&c| c > h as u64).count() < h as usize + 1);
        cites.push(extra);
        prop_assert!(h_index_of(cites.iter().copied()) >= h);
    }

    #[test]
    fn ndcg_depends_only_on_order(
        raw in prop::collection::vec((0.0f64..10.0, 0.0f64..5.0), 1..12),
        n in 1usize..15,
    ) {
        let pred: BTreeMap<String, f64> =
            raw.iter().enumerate().map(|(i, (s, _))| (format!("I{i:02}"), *s)).collect();
        let truth: BTreeMap<String, f64> =
            raw.iter().enumerate().map(|(i, (_, t))| (format!("I{i:02}"), *t)).collect();
        let base = ndcg_at(&pred, &truth, n).unwrap();
        // strictly increasing transform keeps the ranking
        let warped: BTreeMap<String, f64> =
            pred.iter().map(|(k, v)| (k.clone(), (v * 0.5).exp() - 3.0)).collect();
        let again = ndcg_at(&warped, &truth, n).unwrap();
        prop_assert_eq!(base, again);
        prop_assert!(base.value >= 0.0 && base.value <= 1.0 + 1e-12);
        // predicting the truth is optimal
        let ideal = ndcg_at(&truth, &truth, n).unwrap();
        prop_assert!(ideal.degenerate || (ideal.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn training_loss_never_increases((rows, y) in dataset(24, 4)) {
        let d = rows[0].len();
        let x = FeatureMatrix::from_rows(rows).unwrap();
        let mut last = f64::INFINITY;
        for rounds in [0usize, 1, 2, 5, 10, 20] {
            let p = BoostParams { rounds, gamma: 0.0, min_child_weight: 0.0, ..Default::default() };
            let m = train(&x, &y, names(d), &p).unwrap();
            let e = mse(&x, &y, |r| m.predict(r).unwrap());
            prop_assert!(e <= last + 1e-12, "{rounds} rounds: {e} > {last}");
            last = e;
        }
    }

    #[test]
    fn label_shift_shifts_predictions((rows, y) in dataset(20, 3), shift in -50.0f64..50.0) {
        let d = rows[0].len();
        let x = FeatureMatrix::from_rows(rows).unwrap();
        let p = BoostParams { rounds: 15, ..Default::default() };
        let a = train(&x, &y, names(d), &p).unwrap();
        let shifted: Vec<f64> = y.iter().map(|v| v + shift).collect();
        let b = train(&x, &shifted, names(d), &p).unwrap();
        for i in 0..x.rows() {
            let (pa, pb) = (a.predict(x.row(i)).unwrap(), b.predict(x.row(i)).unwrap());
            prop_assert!((pb - pa - shift).abs() < 1e-8, "{pa} + {shift} vs {pb}");
        }
    }

    #[test]
    fn row_order_does_not_matter((rows, y) in dataset(20, 3), rot in 0usize..20) {
        let d = rows[0].len();
        let n = rows.len();
        let perm: Vec<usize> = (0..n).map(|i| (i * 7 + rot) % n).collect();
        let mut seen = perm.clone();
        seen.sort_unstable();
        seen.dedup();
        prop_assume!(seen.len() == n);
        let x = FeatureMatrix::from_rows(rows.clone()).unwrap();
        let xp = FeatureMatrix::from_rows(perm.iter().map(|&i| rows[i].clone()).collect()).unwrap();
        let yp: Vec<f64> = perm.iter().map(|&i| y[i]).collect();
        let p = BoostParams { rounds: 10, ..Default::default() };
        let a = train(&x, &y, names(d), &p).unwrap();
        let b = train(&xp, &yp, names(d), &p).unwrap();
        for i in 0..n {
            let (pa, pb) = (a.predict(x.row(i)).unwrap(), b.predict(x.row(i)).unwrap());
            prop_assert!((pa - pb).abs() < 1e-6, "{pa} vs {pb}");
        }
    }

    #[test]
    fn leaf_weight_minimises_the_leaf_objective(
        g in -20.0f64..20.0, h in 0.1f64..20.0, lambda in 0.0f64..5.0, delta in 1e-3f64..1.0,
    ) {
        let w = leaf_weight(g, h, lambda).unwrap();
        let obj = |w: f64| g * w + 0.5 * (h + lambda) * w * w;
        prop_assert!(obj(w) <= obj(w + delta) && obj(w) <= obj(w - delta));
        prop_assert!((obj(w) + 0.5 * g * g / (h + lambda)).abs() < 1e-9);
    }

    #[test]
    fn split_gain_is_objective_reduction(
        gl in -20.0f64..20.0, hl in 0.1f64..20.0, gr in -20.0f64..20.0, hr in 0.1f64..20.0,
        lambda in 0.0f64..5.0, gamma in 0.0f64..2.0,
    ) {
        let best = |g: f64, h: f64| {
            let w = leaf_weight(g, h, lambda).unwrap();
            g * w + 0.5 * (h + lambda) * w * w
        };
        let reduction = best(gl + gr, hl + hr) - best(gl, hl) - best(gr, hr) - gamma;
        let gain = split_gain(gl, hl, gr, hr, lambda, gamma);
        prop_assert!((gain - reduction).abs() < 1e-9, "{gain} vs {reduction}");
        // with no L2 penalty, splitting never loses
        prop_assert!(split_gain(gl, hl, gr, hr, 0.0, 0.0) >= -1e-9);
    }

    #[test]
    fn summary_is_ordered(values in prop::collection::vec(-1e3f64..1e3, 1..20)) {
        let s = Summary::of(&values);
        prop_assert!(s.min <= s.median && s.median <= s.max);
        prop_assert!(s.min <= s.mean && s.mean <= s.max);
        prop_assert!(s.deviation >= 0.0);
    }
}

#[test]
fn f32_and_f64_models_agree() {
    let rows: Vec<Vec<f64>> = (0..40).map(|i| vec![(i % 7) as f64, (i * 3 % 11) as f64]).collect();
    let y: Vec<f64> = rows.iter().map(|r| r[0] * 2.0 - r[1] * 0.5).collect();
    let p = BoostParams { rounds: 30, learner: Learner::SecondOrder, ..Default::default() };
    let m64 = train(&FeatureMatrix::from_rows(rows.clone()).unwrap(), &y, names(2), &p).unwrap();
    let rows32: Vec<Vec<f32>> = rows.iter().map(|r| r.iter().map(|&v| v as f32).collect()).collect();
    let y32: Vec<f32> = y.iter().map(|&v| v as f32).collect();
    let m32 = train(&FeatureMatrix::from_rows(rows32.clone()).unwrap(), &y32, names(2), &p).unwrap();
    for (r64, r32) in rows.iter().zip(&rows32) {
        let a = m64.predict(r64).unwrap();
        let b = m32.predict(r32).unwrap() as f64;
        assert!((a - b).abs() < 1e-3, "{a} vs {b}");
    }
}
