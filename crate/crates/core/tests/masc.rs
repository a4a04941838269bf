use std::time::Instant;

use masc_core::data::{generate_synthetic, split_holdout, SyntheticSpec};
use masc_core::linalg::{angle_to_subspace, orthonormality_error, orthonormalize_columns};
use masc_core::masc::{classify, classify_batch, evaluate, MetricKind};
use masc_core::subspace::{component_counts, estimate_bank, BankParams, LabelSource, SubspaceBank};
use masc_core::DenseMatrix;
use proptest::prelude::*;

fn params(c: usize, t: f64) -> BankParams {
    BankParams {
        num_classes: c,
        variance_threshold: t,
        layer_index: 0,
        label_source: LabelSource::True,
    }
}

fn synthetic(c: usize, n: usize, d: usize, s: usize, sigma: f64, seed: u64) -> masc_core::data::LabeledDataset {
    generate_synthetic(&SyntheticSpec {
        num_classes: c,
        samples_per_class: n,
        ambient_dim: d,
        subspace_dim_per_class: s,
        noise_sigma: sigma,
        seed,
    })
    .unwrap()
}

#[test]
fn synthetic_subspaces_are_recovered() {
    let data = synthetic(5, 200, 20, 3, 0.01, 9);
    let (train, test) = split_holdout(&data, 0.3, 1).unwrap();
    let bank = estimate_bank(train.inputs(), train.true_labels(), &params(5, 0.99)).unwrap();
    let result = evaluate(test.inputs(), test.true_labels(), &bank, MetricKind::MascTest).unwrap();
    assert!(result.accuracy >= 0.99, "{}", result.accuracy);
    assert_eq!(result.num_degenerate, 0);
}

#[test]
fn noiseless_synthetic_lies_in_its_subspaces() {
    let data = synthetic(3, 30, 12, 2, 0.0, 4);
    let bank = estimate_bank(data.inputs(), data.true_labels(), &params(3, 0.99)).unwrap();
    for (row, &label) in data.inputs().row_iter().zip(data.true_labels()) {
        assert_eq!(bank.subspaces[label].num_components, 2);
        assert!(angle_to_subspace(row, &bank.subspaces[label].basis).unwrap().unwrap() <= 1e-10);
    }
}

#[test]
fn isotropic_class_needs_every_component() {
    let data = synthetic(1, 2000, 3, 3, 0.0, 12);
    let bank = estimate_bank(data.inputs(), data.true_labels(), &params(1, 0.99)).unwrap();
    assert_eq!(bank.subspaces[0].num_components, 3);
}

#[test]
fn rank_one_classes_count_one() {
    let data = synthetic(4, 10, 8, 1, 0.0, 2);
    let bank = estimate_bank(data.inputs(), data.true_labels(), &params(4, 0.99)).unwrap();
    let counts = component_counts(&bank);
    assert_eq!(counts.per_class, vec![1; 4]);
    assert_eq!((counts.min, counts.max, counts.mean), (1, 1, 1.0));
}

/// Classes 0 and 1 share a direction; a point on it has angle 0 to both and
/// goes to class 0, so the threshold-1 bank misses exactly that sample.
#[test]
fn full_rank_banks_only_miss_overlapping_points() {
    let x = DenseMatrix::from_rows(&[
        [1.0, 0.0, 0.0],
        [0.0, 1.0, 0.0],
        [1.0, 0.0, 0.0],
        [0.0, 0.0, 1.0],
        [0.0, 0.0, 2.0],
    ])
    .unwrap();
    let labels = [0, 0, 1, 1, 2];
    let bank = estimate_bank(&x, &labels, &params(3, 1.0)).unwrap();
    let r = evaluate(&x, &labels, &bank, MetricKind::MascCorruptedTrain).unwrap();
    // Row 2 (class 1, on e1) ties with class 0; row 4 (class 2, on e3) ties with class 1.
    assert_eq!(r.accuracy, 3.0 / 5.0);
    let preds = classify_batch(&x, &bank).unwrap();
    assert_eq!(preds.iter().map(|p| p.predicted_label).collect::<Vec<_>>(), vec![0, 0, 0, 1, 1]);
}

#[test]
fn large_batch_is_fast_enough() {
    let d = 512;
    let n = 10_000;
    let mut bases = Vec::new();
    for k in 0..10u64 {
        let data: Vec<f64> = (0..d * 64)
            .map(|i| (((i as u64 + 1) * (k + 3) * 2_654_435_761) % 1000) as f64 / 500.0 - 1.0)
            .collect();
        let mut b = DenseMatrix::from_vec(d, 64, data).unwrap();
        orthonormalize_columns(&mut b);
        bases.push(b);
    }
    let bank = SubspaceBank {
        layer_index: 1,
        label_source: LabelSource::True,
        variance_threshold: 0.99,
        width: d,
        subspaces: bases
            .into_iter()
            .enumerate()
            .map(|(i, basis)| masc_core::subspace::ClassSubspace {
                class_id: i,
                num_components: 64,
                basis,
                explained_variance_ratio: 0.99,
                num_training_samples: 100,
                zero_variance: false,
            })
            .collect(),
        provenance: Default::default(),
    };
    let x = DenseMatrix::from_vec(n, d, (0..n * d).map(|i| ((i * 7919) % 997) as f64).collect()).unwrap();
    let start = Instant::now();
    let preds = classify_batch(&x, &bank).unwrap();
    let elapsed = start.elapsed();
    assert_eq!(preds.len(), n);
    assert!(elapsed.as_secs_f64() < 10.0, "{elapsed:?}");
}

fn bank_and_points() -> impl Strategy<Value = (SubspaceBank, DenseMatrix)> {
    (2usize..6, 3usize..9, 1usize..3, any::<u64>(), 1usize..12).prop_map(|(c, d, s, seed, m)| {
        let data = synthetic(c, 6, d, s.min(d), 0.2, seed);
        let bank = estimate_bank(data.inputs(), data.true_labels(), &params(c, 0.9)).unwrap();
        let points = synthetic(c, m, d, s.min(d), 1.0, seed ^ 0xabc);
        (bank, points.inputs().clone())
    })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn batch_equals_single((bank, x) in bank_and_points()) {
        let batch = classify_batch(&x, &bank).unwrap();
        for (row, p) in x.row_iter().zip(&batch) {
            let single = classify(row, &bank).unwrap();
            prop_assert_eq!(&single, p);
            prop_assert!(p.angles.iter().all(|&a| (0.0..=std::f64::consts::FRAC_PI_2).contains(&a)));
            let min = p.angles.iter().copied().fold(f64::INFINITY, f64::min);
            prop_assert_eq!(p.predicted_label, p.angles.iter().position(|&a| a == min).unwrap());
        }
    }

    #[test]
    fn labels_are_scale_invariant((bank, x) in bank_and_points(), alpha in prop_oneof![-50.0f64..-0.01, 0.01f64..50.0]) {
        let mut scaled = x.clone();
        scaled.as_mut_slice().iter_mut().for_each(|v| *v *= alpha);
        let a: Vec<usize> = classify_batch(&x, &bank).unwrap().iter().map(|p| p.predicted_label).collect();
        let b: Vec<usize> = classify_batch(&scaled, &bank).unwrap().iter().map(|p| p.predicted_label).collect();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn permuting_classes_permutes_predictions((bank, x) in bank_and_points(), shift in 1usize..5) {
        let c = bank.num_classes();
        let perm: Vec<usize> = (0..c).map(|k| (k + shift) % c).collect();
        let mut permuted = bank.clone();
        for (k, s) in bank.subspaces.iter().enumerate() {
            let mut moved = s.clone();
            moved.class_id = perm[k];
            permuted.subspaces[perm[k]] = moved;
        }
        let a = classify_batch(&x, &bank).unwrap();
        let b = classify_batch(&x, &permuted).unwrap();
        for (pa, pb) in a.iter().zip(&b) {
            // Permuting changes which of several tied classes is the smallest
            // index, so compare the angle vectors, which must follow exactly.
            for k in 0..c {
                prop_assert_eq!(pa.angles[k], pb.angles[perm[k]]);
            }
            if pa.angles.iter().filter(|&&t| t == pa.min_angle()).count() == 1 {
                prop_assert_eq!(perm[pa.predicted_label], pb.predicted_label);
            }
        }
    }

    #[test]
    fn threshold_is_monotone_and_minimal(c in 1usize..4, d in 2usize..10, seed in any::<u64>(), t1 in 0.05f64..1.0, t2 in 0.05f64..1.0) {
        let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
        let data = synthetic(c, 15, d, d, 0.0, seed);
        let a = estimate_bank(data.inputs(), data.true_labels(), &params(c, lo)).unwrap();
        let b = estimate_bank(data.inputs(), data.true_labels(), &params(c, hi)).unwrap();
        for (sa, sb) in a.subspaces.iter().zip(&b.subspaces) {
            prop_assert!(sa.num_components <= sb.num_components);
            prop_assert!(sa.explained_variance_ratio >= lo);
            prop_assert!(orthonormality_error(&sa.basis) <= 1e-8);
            prop_assert!(sa.num_components <= sa.num_training_samples.min(d));
        }
        // Minimality: one component fewer falls short of the threshold.
        for (s, class) in a.subspaces.iter().zip(0..) {
            if s.num_components > 1 {
                let full = estimate_bank(data.inputs(), data.true_labels(), &params(c, 1.0)).unwrap();
                let rows: Vec<usize> = (0..data.len()).filter(|&i| data.true_labels()[i] == class).collect();
                let class_x = data.inputs().select_rows(&rows);
                let energy = |basis: &DenseMatrix| class_x.matmul(basis).unwrap().frobenius_norm().powi(2);
                let total = energy(&full.subspaces[class].basis);
                let shorter = energy(&s.basis.leading_columns(s.num_components - 1));
                prop_assert!(shorter / total < lo + 1e-12);
            }
        }
    }

    #[test]
    fn full_threshold_fits_training_points(c in 1usize..4, d in 4usize..12, n in 1usize..8, seed in any::<u64>()) {
        let data = synthetic(c, n, d, d, 0.0, seed);
        let bank = estimate_bank(data.inputs(), data.true_labels(), &params(c, 1.0)).unwrap();
        let preds = classify_batch(data.inputs(), &bank).unwrap();
        for (p, &label) in preds.iter().zip(data.true_labels()) {
            prop_assert!(p.angles[label] <= 1e-6, "{}", p.angles[label]);
        }
    }
}
