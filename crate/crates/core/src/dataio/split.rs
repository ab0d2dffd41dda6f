use rand::seq::SliceRandom;

use super::{DataIoError, EmbeddingSet};
use crate::rng::rng_from_seed;

/// Stratified, seeded train/test split.
///
/// Within each label the records are ordered by sample id, shuffled, and the first
/// `round(ratio · n)` go to train. The result depends on the seed and the record
/// contents only, not on input order; both halves keep input order.
pub fn split(set: &EmbeddingSet, ratio: f64, seed: u64) -> Result<(EmbeddingSet, EmbeddingSet), DataIoError> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(DataIoError::Invalid(format!("split ratio {ratio} must lie in (0, 1)")));
    }
    let mut rng = rng_from_seed(seed);
    let mut in_train = vec![false; set.records.len()];
    for label in [false, true] {
        let mut idx: Vec<usize> = (0..set.records.len())
            .filter(|&i| set.records[i].label == label)
            .collect();
        if idx.is_empty() {
            return Err(DataIoError::Invalid(format!(
                "no samples with label {label}; cannot stratify"
            )));
        }
        idx.sort_by(|&a, &b| set.records[a].sample_id.cmp(&set.records[b].sample_id));
        idx.shuffle(&mut rng);
        let take = (ratio * idx.len() as f64).round() as usize;
        for &i in &idx[..take] {
            in_train[i] = true;
        }
    }
    let pick = |want: bool| EmbeddingSet {
        model_tag: set.model_tag.clone(),
        feature_source: set.feature_source.clone(),
        dim: set.dim,
        records: set
            .records
            .iter()
            .zip(&in_train)
            .filter(|(_, &t)| t == want)
            .map(|(r, _)| r.clone())
            .collect(),
    };
    let (train, test) = (pick(true), pick(false));
    if train.records.is_empty() || test.records.is_empty() {
        return Err(DataIoError::Invalid(format!(
            "ratio {ratio} over {} samples leaves an empty half",
            set.records.len()
        )));
    }
    Ok((train, test))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataio::EmbeddingRecord;
    use std::collections::HashSet;

    fn set(labels: &[bool]) -> EmbeddingSet {
        EmbeddingSet {
            model_tag: "m".into(),
            feature_source: "f".into(),
            dim: 1,
            records: labels
                .iter()
                .enumerate()
                .map(|(i, &label)| EmbeddingRecord {
                    sample_id: format!("id{i:03}"),
                    label,
                    vector: vec![i as f32],
                })
                .collect(),
        }
    }

    fn count(s: &EmbeddingSet, label: bool) -> usize {
        s.records.iter().filter(|r| r.label == label).count()
    }

    #[test]
    fn balanced_hundred_at_point_eight() {
        let labels: Vec<bool> = (0..100).map(|i| i % 2 == 0).collect();
        let (train, test) = split(&set(&labels), 0.8, 1).unwrap();
        assert_eq!((count(&train, true), count(&train, false)), (40, 40));
        assert_eq!((count(&test, true), count(&test, false)), (10, 10));
    }

    #[test]
    fn deterministic_and_order_independent() {
        let labels: Vec<bool> = (0..37).map(|i| i % 3 == 0).collect();
        let s = set(&labels);
        let (a, _) = split(&s, 0.7, 9).unwrap();
        let (b, _) = split(&s, 0.7, 9).unwrap();
        assert_eq!(a, b);
        let mut rev = s.clone();
        rev.records.reverse();
        let (c, _) = split(&rev, 0.7, 9).unwrap();
        let ids = |s: &EmbeddingSet| s.records.iter().map(|r| r.sample_id.clone()).collect::<HashSet<_>>();
        assert_eq!(ids(&a), ids(&c));
    }

    #[test]
    fn disjoint_exhaustive_and_stratified() {
        let labels: Vec<bool> = (0..91).map(|i| i % 4 != 0).collect();
        let s = set(&labels);
        let (train, test) = split(&s, 0.75, 3).unwrap();
        let mut all: Vec<_> = train
            .records
            .iter()
            .chain(&test.records)
            .map(|r| &r.sample_id)
            .collect();
        all.sort();
        all.dedup();
        assert_eq!(all.len(), s.records.len());
        let q = count(&s, true) as f64 / s.records.len() as f64;
        for half in [&train, &test] {
            let n = half.records.len() as f64;
            assert!((count(half, true) as f64 - q * n).abs() <= 1.0);
        }
    }

    #[test]
    fn bad_inputs() {
        let s = set(&[true, false, true, false]);
        assert!(split(&s, 1.0, 0).is_err());
        assert!(split(&s, 0.0, 0).is_err());
        assert!(split(&set(&[true, true, true]), 0.5, 0).is_err());
    }
}
