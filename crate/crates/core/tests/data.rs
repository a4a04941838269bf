use masc_core::data::idx::{encode_images, encode_labels, parse_images, parse_labels, IdxImages};
use masc_core::data::{changed_fraction, corrupt_labels, split_holdout, LabeledDataset};
use masc_core::DenseMatrix;
use proptest::prelude::*;

fn labelled(n: usize, c: usize) -> LabeledDataset {
    let labels: Vec<usize> = (0..n).map(|i| i % c).collect();
    LabeledDataset::new(DenseMatrix::zeros(n, 1), labels, c).unwrap()
}

/// Changed-label count is Binomial(n, p(1 - 1/c)); it must fall within three
/// standard deviations of its mean.
#[test]
fn changed_fraction_is_binomial() {
    let n = 20_000;
    for (c, p, seed) in [(10, 0.2, 1), (10, 0.8, 2), (2, 1.0, 3), (3, 0.5, 4), (100, 0.6, 5)] {
        let data = corrupt_labels(&labelled(n, c), p, seed).unwrap();
        let rate = p * (1.0 - 1.0 / c as f64);
        let sd = (rate * (1.0 - rate) / n as f64).sqrt();
        let got = changed_fraction(&data);
        assert!((got - rate).abs() <= 3.0 * sd, "c={c} p={p}: {got} vs {rate} ± {}", 3.0 * sd);
    }
}

#[test]
fn mnist_sized_corruption_at_eighty_percent() {
    let data = corrupt_labels(&labelled(60_000, 10), 0.8, 2024).unwrap();
    assert!((changed_fraction(&data) - 0.72).abs() <= 0.01);
}

#[test]
fn redraws_cover_every_class_including_the_original() {
    let data = corrupt_labels(&labelled(5_000, 5), 1.0, 8).unwrap();
    let kept = data
        .true_labels()
        .iter()
        .zip(data.corrupted_labels())
        .filter(|(a, b)| a == b)
        .count() as f64
        / 5_000.0;
    assert!((kept - 0.2).abs() < 0.03, "{kept}");
    let mut seen = [0usize; 5];
    for &l in data.corrupted_labels() {
        seen[l] += 1;
    }
    assert!(seen.iter().all(|&s| s > 800));
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn corruption_preserves_true_labels(n in 1usize..300, c in 2usize..12, p in 0.0f64..=1.0, seed in any::<u64>()) {
        let data = labelled(n, c);
        let out = corrupt_labels(&data, p, seed).unwrap();
        prop_assert_eq!(out.true_labels(), data.true_labels());
        prop_assert!(out.corrupted_labels().iter().all(|&l| l < c));
        prop_assert_eq!(out.corruption_degree(), p);
        prop_assert_eq!(&out, &corrupt_labels(&data, p, seed).unwrap());
    }

    #[test]
    fn holdout_partitions_the_set(per_class in 2usize..20, c in 2usize..6, f in 0.1f64..0.9, seed in any::<u64>()) {
        let n = per_class * c;
        let inputs = DenseMatrix::from_vec(n, 1, (0..n).map(|i| i as f64).collect()).unwrap();
        let data = LabeledDataset::new(inputs, (0..n).map(|i| i % c).collect(), c).unwrap();
        let (train, test) = split_holdout(&data, f, seed).unwrap();
        let mut ids: Vec<usize> = train
            .inputs()
            .as_slice()
            .iter()
            .chain(test.inputs().as_slice())
            .map(|&v| v as usize)
            .collect();
        ids.sort_unstable();
        prop_assert_eq!(ids, (0..n).collect::<Vec<_>>());
        for class in 0..c {
            prop_assert!(train.class_counts()[class] >= 1 && test.class_counts()[class] >= 1);
        }
    }

    #[test]
    fn idx_round_trip(count in 0usize..5, rows in 1usize..5, cols in 1usize..5, seed in any::<u8>()) {
        let pixels: Vec<u8> = (0..count * rows * cols).map(|i| (i as u8).wrapping_mul(31).wrapping_add(seed)).collect();
        let images = IdxImages { count, rows, cols, pixels };
        let bytes = encode_images(&images);
        prop_assert_eq!(&parse_images(&bytes).unwrap(), &images);
        prop_assert_eq!(encode_images(&parse_images(&bytes).unwrap()), bytes);
        let labels: Vec<u8> = (0..count).map(|i| (i % 10) as u8).collect();
        let lbytes = encode_labels(&labels);
        prop_assert_eq!(encode_labels(&parse_labels(&lbytes).unwrap()), lbytes);
    }
}

#[test]
fn balanced_holdout_is_five_per_class_per_side() {
    let data = labelled(100, 10);
    let (train, test) = split_holdout(&data, 0.5, 17).unwrap();
    assert_eq!(train.class_counts(), vec![5; 10]);
    assert_eq!(test.class_counts(), vec![5; 10]);
    assert_eq!(split_holdout(&data, 0.5, 17).unwrap(), (train, test));
}
