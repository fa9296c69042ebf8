use std::collections::HashMap;

use approx::assert_relative_eq;
use cfrewrite::metrics::{bleu4, correlations, evaluate_records, hmean, kendall_tau_b, EvalRecord, MetricsError};
use cfrewrite::{tokenize, TokenSequence};
use proptest::prelude::*;

fn record(hyp: &str, refs: &[&str]) -> EvalRecord {
    EvalRecord::new("s", tokenize(hyp), refs.iter().map(|r| tokenize(r)).collect(), None).unwrap()
}

/// Straight-line corpus BLEU-4 over whitespace words.
fn bleu_oracle(pairs: &[(&str, Vec<&str>)]) -> f64 {
    let grams = |w: &[&str], n: usize| {
        let mut m: HashMap<Vec<String>, usize> = HashMap::new();
        for g in w.windows(n) {
            *m.entry(g.iter().map(|s| s.to_string()).collect()).or_default() += 1;
        }
        m
    };
    let (mut matched, mut total) = ([0usize; 4], [0usize; 4]);
    let (mut hyp_len, mut ref_len) = (0usize, 0usize);
    for (hyp, refs) in pairs {
        let h: Vec<&str> = hyp.split_whitespace().collect();
        let rs: Vec<Vec<&str>> = refs.iter().map(|r| r.split_whitespace().collect()).collect();
        hyp_len += h.len();
        ref_len += rs
            .iter()
            .map(Vec::len)
            .min_by_key(|&l| ((l as i64 - h.len() as i64).abs(), l))
            .unwrap();
        for n in 1..=4 {
            let hg = grams(&h, n);
            for (g, c) in &hg {
                let best = rs
                    .iter()
                    .map(|r| grams(r, n).get(g).copied().unwrap_or(0))
                    .max()
                    .unwrap();
                matched[n - 1] += (*c).min(best);
            }
            total[n - 1] += h.len().saturating_sub(n - 1);
        }
    }
    let mut log_p = 0.0;
    for n in 0..4 {
        let p = if matched[n] == 0 {
            1e-9 / total[n].max(1) as f64
        } else {
            matched[n] as f64 / total[n] as f64
        };
        log_p += p.ln() / 4.0;
    }
    let bp = if hyp_len >= ref_len {
        1.0
    } else {
        (1.0 - ref_len as f64 / hyp_len as f64).exp()
    };
    100.0 * bp * log_p.exp()
}

#[test]
fn perfect_match_is_exactly_100() {
    let r = record("she was happy about the game .", &["she was happy about the game ."]);
    assert_eq!(bleu4::<f64>(&[r]).unwrap(), 100.0);
}

#[test]
fn no_overlap_is_near_zero() {
    let r = record("alpha beta gamma delta", &["one two three four five"]);
    assert!(bleu4::<f64>(&[r]).unwrap() < 1e-6);
}

#[test]
fn short_hypothesis_hand_value() {
    // 3/3 unigrams, 2/2 bigrams, 1/1 trigram, no 4-gram; hypothesis 3 words against 4.
    let r = record("the cat sat", &["the cat sat down"]);
    let want = 100.0 * (1.0f64 - 4.0 / 3.0).exp() * 1e-9f64.powf(0.25);
    assert_relative_eq!(bleu4::<f64>(&[r]).unwrap(), want, epsilon = 1e-6);
}

#[test]
fn matches_oracle_on_multi_reference_corpus() {
    let pairs = vec![
        (
            "the cat the cat sat on the mat",
            vec!["the cat sat on the mat", "a cat was on the mat"],
        ),
        ("he went home early", vec!["he went home early .", "he stayed home"]),
        (
            "nobody ate the burnt cake at all",
            vec!["nobody ate it", "the cake was burnt and nobody ate it"],
        ),
    ];
    let records: Vec<EvalRecord> = pairs.iter().map(|(h, r)| record(h, r)).collect();
    assert_relative_eq!(bleu4::<f64>(&records).unwrap(), bleu_oracle(&pairs), epsilon = 1e-9);
}

#[test]
fn empty_input_and_missing_references_are_errors() {
    assert!(matches!(bleu4::<f64>(&[]), Err(MetricsError::Empty)));
    assert!(matches!(
        EvalRecord::new("x", tokenize("a"), vec![], None),
        Err(MetricsError::NoReferences(_))
    ));
    assert!(EvalRecord::new("x", tokenize("a"), vec![tokenize("a")], Some(100.5)).is_err());
}

#[test]
fn hmean_examples() {
    assert_relative_eq!(hmean(44.05f64, 32.28).unwrap(), 37.26, epsilon = 0.01);
    assert_eq!(hmean(0.0f64, 50.0).unwrap(), 0.0);
    assert_eq!(hmean(0.0f64, 0.0).unwrap(), 0.0);
    assert!(hmean(101.0f64, 3.0).is_err());
    assert_relative_eq!(hmean(44.05f32, 32.28).unwrap(), 37.26, epsilon = 0.01);
}

#[test]
fn report_with_and_without_scores() {
    let with = |score| EvalRecord::new("s", tokenize("a b c d"), vec![tokenize("a b c d")], score).unwrap();
    let report = evaluate_records(&[with(Some(32.28)), with(Some(32.28))]).unwrap();
    assert_eq!(report.bleu4, 100.0);
    assert_relative_eq!(report.ents.unwrap(), 32.28, epsilon = 1e-12);
    assert_relative_eq!(report.hmean.unwrap(), hmean(100.0, 32.28).unwrap(), epsilon = 1e-12);
    let report = evaluate_records(&[with(None)]).unwrap();
    assert_eq!(report.ents, None);
    assert_eq!(report.hmean, None);
    let json = serde_json::to_value(&report).unwrap();
    assert!(json["hmean"].is_null());
    assert_eq!(json["n"], 1);
}

#[test]
fn correlation_examples() {
    let a = [1.0f64, 2.0, 3.0, 4.0, 5.0];
    let lin: Vec<f64> = a.iter().map(|x| 2.0 * x + 3.0).collect();
    let c = correlations(&a, &lin).unwrap();
    assert_eq!((c.pearson_r, c.spearman_rho, c.kendall_tau), (1.0, 1.0, 1.0));
    let neg: Vec<f64> = a.iter().map(|x| -x).collect();
    let c = correlations(&a, &neg).unwrap();
    assert_eq!((c.pearson_r, c.spearman_rho, c.kendall_tau), (-1.0, -1.0, -1.0));

    // Pairs of [1,2,3,4] vs [1,3,2,4]: 5 concordant, 1 discordant.
    let c = correlations(&[1.0f64, 2.0, 3.0, 4.0], &[1.0, 3.0, 2.0, 4.0]).unwrap();
    assert_relative_eq!(c.kendall_tau, 4.0 / 6.0, epsilon = 1e-12);
    // Σd² = 2: 1 − 6·2 / (4·15)
    assert_relative_eq!(c.spearman_rho, 0.8, epsilon = 1e-12);
    assert_relative_eq!(c.pearson_r, 0.8, epsilon = 1e-12);

    assert!(matches!(
        correlations(&[1.0f64, 1.0, 1.0], &[1.0, 2.0, 3.0]),
        Err(MetricsError::Undefined(_))
    ));
    assert!(matches!(
        correlations(&[1.0f64, 2.0], &[1.0, 2.0]),
        Err(MetricsError::TooFewPoints(_))
    ));
}

proptest! {
    #[test]
    fn bleu_in_range_and_order_invariant(
        hyps in prop::collection::vec(prop::collection::vec(0u8..6, 1..10), 1..5),
        refs in prop::collection::vec(prop::collection::vec(prop::collection::vec(0u8..6, 1..10), 1..3), 5),
    ) {
        let text = |w: &[u8]| TokenSequence::from_tokens(w.iter().map(|i| format!("w{i}")));
        let records: Vec<EvalRecord> = hyps
            .iter()
            .zip(&refs)
            .map(|(h, r)| EvalRecord::new("s", text(h), r.iter().map(|x| text(x)).collect(), None).unwrap())
            .collect();
        let b = bleu4::<f64>(&records).unwrap();
        prop_assert!((0.0..=100.0).contains(&b));

        let mut shuffled: Vec<EvalRecord> = records.iter().rev().cloned().collect();
        for r in &mut shuffled {
            r.references.reverse();
        }
        prop_assert_eq!(bleu4::<f64>(&shuffled).unwrap(), b);
    }

    #[test]
    fn correlations_survive_positive_affine_maps(
        a in prop::collection::vec(-100.0f64..100.0, 4..20),
        noise in prop::collection::vec(-5.0f64..5.0, 20),
        scale in 0.5f64..4.0, shift in -10.0f64..10.0,
    ) {
        let b: Vec<f64> = a.iter().zip(&noise).map(|(x, n)| x + n).collect();
        let moved: Vec<f64> = b.iter().map(|x| scale * x + shift).collect();
        if let (Ok(c1), Ok(c2)) = (correlations(&a, &b), correlations(&a, &moved)) {
            prop_assert!((c1.pearson_r - c2.pearson_r).abs() < 1e-9);
            prop_assert_eq!(c1.spearman_rho, c2.spearman_rho);
            prop_assert_eq!(c1.kendall_tau, c2.kendall_tau);
        }
    }

    #[test]
    fn hmean_symmetric_and_bounded(a in 0.0f64..=100.0, b in 0.0f64..=100.0) {
        let h = hmean(a, b).unwrap();
        prop_assert_eq!(h, hmean(b, a).unwrap());
        prop_assert!(h <= 2.0 * a.min(b) + 1e-12);
    }
}

#[test]
fn kendall_handles_ties() {
    // a = [1,2,2,3], b = [1,2,3,4]: 5 concordant, one pair tied in a.
    let t = kendall_tau_b(&[1.0f64, 2.0, 2.0, 3.0], &[1.0, 2.0, 3.0, 4.0]).unwrap();
    assert_relative_eq!(t, 5.0 / 30.0f64.sqrt(), epsilon = 1e-12);
}
