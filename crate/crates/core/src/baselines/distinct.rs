//! Distinct-n: the proportion of unique n-grams to all n-grams over the
//! corpus. A lexical-form diversity measure in (0, 1].
//!
//! N-grams are collected per record, which is equivalent to concatenating
//! record token streams with a unique separator: no n-gram ever spans two
//! records and the separator itself is never counted, so the score depends
//! only on the n-gram multiset, not on record order.

use std::collections::HashMap;
use std::time::Instant;

use crate::embed::{tokenize, Corpus};
use crate::error::{Error, Result};
use crate::report::DiversityReport;

pub fn distinct_n(corpus: &Corpus, n_gram: usize) -> Result<DiversityReport> {
    if n_gram < 1 {
        return Err(Error::Parameter("n-gram order must be >= 1".into()));
    }
    if let Some(rec) = corpus.records().iter().find(|r| r.text.is_none()) {
        return Err(Error::Input(format!(
            "record {:?} has no text; distinct-n requires text",
            rec.id
        )));
    }

    let t0 = Instant::now();
    let token_streams: Vec<Vec<String>> = corpus
        .records()
        .iter()
        .map(|r| tokenize(r.text.as_deref().unwrap()))
        .collect();
    let representation_ms = t0.elapsed().as_secs_f64() * 1e3;

    let t1 = Instant::now();
    let mut counts: HashMap<String, u64> = HashMap::new();
    let mut total: u64 = 0;
    let mut key = String::new();
    for tokens in &token_streams {
        for window in tokens.windows(n_gram) {
            key.clear();
            for (i, tok) in window.iter().enumerate() {
                if i > 0 {
                    key.push('\u{1f}');
                }
                key.push_str(tok);
            }
            *counts.entry(key.clone()).or_insert(0) += 1;
            total += 1;
        }
    }
    let similarity_ms = t1.elapsed().as_secs_f64() * 1e3;

    if total == 0 {
        return Err(Error::Input(format!(
            "corpus yields no {n_gram}-grams (every record has fewer than {n_gram} tokens)"
        )));
    }

    let t2 = Instant::now();
    let unique = counts.len() as f64;
    let score = unique / total as f64;
    let summarization_ms = t2.elapsed().as_secs_f64() * 1e3;

    Ok(DiversityReport::new("distinct-n", score)?
        .with_param("n", corpus.len())
        .with_param("ngram", n_gram)
        .with_param("total_ngrams", total)
        .with_param("unique_ngrams", counts.len())
        .with_timing("representation", representation_ms)
        .with_timing("similarity", similarity_ms)
        .with_timing("summarization", summarization_ms))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embed::CorpusRecord;

    fn corpus_of(texts: &[&str]) -> Corpus {
        let records = texts
            .iter()
            .enumerate()
            .map(|(i, t)| CorpusRecord {
                id: format!("r{i}"),
                text: Some((*t).to_string()),
                embedding: None,
                batch: None,
            })
            .collect();
        Corpus::new(records).unwrap()
    }

    #[test]
    fn hand_enumerated_bigrams() {
        // "the cat sat the cat": 4 bigrams, 3 unique -> 0.75
        let r = distinct_n(&corpus_of(&["the cat sat the cat"]), 2).unwrap();
        assert!((r.score - 0.75).abs() <= 1e-12);
        assert_eq!(r.params["total_ngrams"], 4);
        assert_eq!(r.params["unique_ngrams"], 3);
    }

    #[test]
    fn all_distinct_tokens_score_one() {
        for n in 1..=3 {
            let r = distinct_n(&corpus_of(&["alpha beta gamma delta"]), n).unwrap();
            assert_eq!(r.score, 1.0);
        }
    }

    #[test]
    fn repeated_record_halves_unigram_ratio() {
        let single = distinct_n(&corpus_of(&["red green blue"]), 1).unwrap();
        let doubled = distinct_n(&corpus_of(&["red green blue", "red green blue"]), 1).unwrap();
        assert!((doubled.score - single.score / 2.0).abs() <= 1e-12);
    }

    #[test]
    fn ngrams_never_span_records() {
        // Bigram (two, three) must not exist across the record boundary.
        let split = distinct_n(&corpus_of(&["one two", "three four"]), 2).unwrap();
        assert_eq!(split.params["total_ngrams"], 2);
        let joined = distinct_n(&corpus_of(&["one two three four"]), 2).unwrap();
        assert_eq!(joined.params["total_ngrams"], 3);
    }

    #[test]
    fn record_order_does_not_matter() {
        let a = distinct_n(&corpus_of(&["a b c", "d e"]), 2).unwrap();
        let b = distinct_n(&corpus_of(&["d e", "a b c"]), 2).unwrap();
        assert_eq!(a.score, b.score);
    }

    #[test]
    fn too_few_tokens_is_input_error() {
        let err = distinct_n(&corpus_of(&["one two", "three"]), 5).unwrap_err();
        assert!(matches!(err, Error::Input(_)));
    }

    #[test]
    fn missing_text_is_input_error() {
        let corpus = Corpus::new(vec![CorpusRecord {
            id: "a".into(),
            text: None,
            embedding: Some(vec![1.0]),
            batch: None,
        }])
        .unwrap();
        assert!(matches!(distinct_n(&corpus, 1), Err(Error::Input(_))));
    }

    #[test]
    fn zero_order_is_parameter_error() {
        assert!(matches!(
            distinct_n(&corpus_of(&["a b"]), 0),
            Err(Error::Parameter(_))
        ));
    }
}
