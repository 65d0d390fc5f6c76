mod common;

use common::*;
use ktopic::coherence::{cv, umass_on, CooccurrenceStats, CvParams, Window};
use ktopic::corpus::TokenizerConfig;
use ktopic::synth::{themed_short_texts, ThemedParams};
use ktopic::topic_rep::{Topic, TopicSet, TopicTerm};
use ktopic::Error;
use proptest::prelude::*;

fn topic_set(lists: &[Vec<String>]) -> TopicSet {
    TopicSet {
        topics: lists
            .iter()
            .enumerate()
            .map(|(id, terms)| Topic {
                id,
                terms: terms
                    .iter()
                    .map(|t| TopicTerm {
                        term: t.clone(),
                        weight: 1.0,
                    })
                    .collect(),
            })
            .collect(),
        n_terms: lists.iter().map(|l| l.len()).max().unwrap_or(0),
    }
}

fn strings(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

fn fixture() -> (Vec<Vec<String>>, Vec<Vec<String>>) {
    let p = themed_short_texts(&ThemedParams {
        n_themes: 4,
        n_docs: 200,
        seed: 99,
        ..ThemedParams::default()
    });
    let docs = p.corpus.tokenized(&TokenizerConfig::default());
    let topics = vec![
        strings(&["t0w00", "t0w01", "t0w02", "bg00", "t0w00_t0w01", "t0w03"]),
        strings(&["t1w00", "bg01", "t1w04", "t1w00_bg00_t1w01", "neverseen"]),
        strings(&["t2w00", "t3w00", "bg00", "bg01", "t2w01"]),
        strings(&["t3w01", "t3w02", "t3w00", "t3w05", "t3w07", "t3w09", "bg03"]),
    ];
    (docs, topics)
}

#[test]
fn cv_matches_window_enumeration() {
    let (docs, topics) = fixture();
    let ts = topic_set(&topics);
    for w in [3, 5, 8, 110] {
        let got = cv(&ts, &docs, &CvParams { window: w, epsilon: 1e-12 }).unwrap();
        let want = brute_cv(&topics, &docs, w, 1e-12);
        for (g, e) in got.per_topic.iter().zip(&want) {
            assert!((g.score - e).abs() <= 1e-12, "w={w}: {} vs {e}", g.score);
        }
    }
}

#[test]
fn umass_matches_document_counting() {
    let (docs, topics) = fixture();
    let got = umass_on(&topic_set(&topics), &docs).unwrap();
    let want = brute_umass(&topics, &docs);
    for (g, e) in got.per_topic.iter().zip(&want) {
        assert!((g.score - e).abs() <= 1e-12);
    }
    assert_eq!(got.per_topic[1].dropped_terms, ["neverseen"]);
    let mean = want.iter().sum::<f64>() / want.len() as f64;
    assert!((got.aggregate - mean).abs() <= 1e-12);
}

#[test]
fn coherent_topics_beat_mixed_ones() {
    let (docs, _) = fixture();
    let coherent = topic_set(&[strings(&["t0w00", "t0w01", "t0w02", "t0w03", "t0w04"])]);
    let mixed = topic_set(&[strings(&["t0w00", "t1w01", "t2w02", "t3w03", "t1w04"])]);
    let p = CvParams::default();
    assert!(cv(&coherent, &docs, &p).unwrap().aggregate > cv(&mixed, &docs, &p).unwrap().aggregate);
    assert!(umass_on(&coherent, &docs).unwrap().aggregate > umass_on(&mixed, &docs).unwrap().aggregate);
}

#[test]
fn degenerate_topics_are_errors() {
    let (docs, _) = fixture();
    let absent = topic_set(&[strings(&["zzz", "yyy"])]);
    assert!(matches!(cv(&absent, &docs, &CvParams::default()), Err(Error::DegenerateTopic(0))));
    let one = topic_set(&[strings(&["t0w00", "zzz"])]);
    assert!(matches!(umass_on(&one, &docs), Err(Error::DegenerateTopic(0))));
}

#[test]
fn window_counts_include_short_and_empty_documents() {
    let docs = vec![strings(&["a", "b", "c", "d"]), vec![], strings(&["a"])];
    let s = CooccurrenceStats::build(&docs, &["a", "d"], Window::Sliding(2)).unwrap();
    assert_eq!(s.n_windows(), 3 + 1 + 1);
    assert_eq!(brute_windows(&docs, Some(2)).len(), 5);
    assert_eq!(s.count("a"), 2);
    assert_eq!(s.co_count("a", "d"), 0);
}

fn docs_strategy() -> impl Strategy<Value = Vec<Vec<String>>> {
    let word = prop::sample::select(vec!["aa", "bb", "cc", "dd", "ee", "ff"]);
    prop::collection::vec(prop::collection::vec(word.prop_map(String::from), 0..12), 1..25)
}

fn topic_strategy() -> impl Strategy<Value = Vec<String>> {
    let term = prop::sample::select(vec!["aa", "bb", "cc", "dd", "ee", "ff", "gg", "aa_bb", "cc_dd_ee"]);
    prop::collection::btree_set(term.prop_map(String::from), 2..6).prop_map(|s| s.into_iter().collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn cv_equals_brute_force(docs in docs_strategy(), topic in topic_strategy(), w in 1usize..8) {
        let ts = topic_set(std::slice::from_ref(&topic));
        let want = brute_cv(std::slice::from_ref(&topic), &docs, w, 1e-12)[0];
        match cv(&ts, &docs, &CvParams { window: w, epsilon: 1e-12 }) {
            Ok(r) => {
                prop_assert!((r.aggregate - want).abs() <= 1e-12);
                prop_assert!((-1.0 - 1e-12..=1.0 + 1e-12).contains(&r.aggregate));
            }
            Err(Error::DegenerateTopic(_)) => prop_assert!(want.is_nan() || want == 0.0),
            Err(e) => prop_assert!(false, "{e}"),
        }
    }

    #[test]
    fn umass_equals_brute_force(docs in docs_strategy(), topic in topic_strategy()) {
        let ts = topic_set(std::slice::from_ref(&topic));
        let want = brute_umass(std::slice::from_ref(&topic), &docs)[0];
        match umass_on(&ts, &docs) {
            Ok(r) => prop_assert!((r.aggregate - want).abs() <= 1e-12),
            Err(Error::DegenerateTopic(_)) => prop_assert!(want.is_nan()),
            Err(e) => prop_assert!(false, "{e}"),
        }
    }
}
