//! Acceptance run: prints one PASS/FAIL line per criterion and exits non-zero
//! if any fails.
//!
//! Criteria 6 to 10 train desk-profile networks on MNIST. The four IDX files
//! are read from `$MASC_MNIST_DIR`, or `data/mnist` under the workspace root.
//! Artifacts go to a temporary directory unless `$MASC_ACCEPTANCE_OUT` names
//! one to keep.

use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use masc::harness::data::MNIST_FILES;
use masc::harness::report::read_table;
use masc::harness::{DatasetSpec, ExperimentConfig, ExperimentKind, Harness, LayerReport, ModelOverrides, Profile};
use masc::masc_core::data::{
    changed_fraction, corrupt_labels, generate_synthetic, split_holdout, LabeledDataset, Normalization, SyntheticSpec,
};
use masc::masc_core::linalg::{
    angle_to_subspace, norm, orthonormality_error, orthonormalize_columns, project_onto, svd_thin,
};
use masc::masc_core::masc::{evaluate, MetricKind};
use masc::masc_core::model::{init_model, MlpConfig, MlpModel, Optimizer};
use masc::masc_core::subspace::{estimate_bank, BankParams, LabelSource};
use masc::masc_core::DenseMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn gaussian_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DenseMatrix {
    let data = (0..rows * cols).map(|_| rng.sample(StandardNormal)).collect();
    DenseMatrix::from_vec(rows, cols, data).unwrap()
}

fn gaussian_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

fn random_basis(rng: &mut ChaCha8Rng, d: usize, k: usize) -> DenseMatrix {
    let mut b = gaussian_matrix(rng, d, k);
    orthonormalize_columns(&mut b);
    b
}

// 1. Geometry suite.

fn geometry_suite() -> Verdict {
    const TRIALS: usize = 10_000;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = [0.0f64; 4];
    let mut failures = [0usize; 4];
    for _ in 0..TRIALS {
        let d = rng.random_range(1..=30);
        let k = rng.random_range(0..=d);
        let b = random_basis(&mut rng, d, k);
        let x = gaussian_vec(&mut rng, d);

        let p = project_onto(&x, &b).unwrap();
        let pp = project_onto(&p, &b).unwrap();
        let idem = p.iter().zip(&pp).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        worst[0] = worst[0].max(idem);
        failures[0] += usize::from(idem > 1e-10);

        let r: Vec<f64> = x.iter().zip(&p).map(|(a, b)| a - b).collect();
        let nx2 = norm(&x).powi(2);
        let pyth = (nx2 - norm(&p).powi(2) - norm(&r).powi(2)).abs() / nx2;
        worst[1] = worst[1].max(pyth);
        failures[1] += usize::from(pyth > 1e-8);

        let alpha = 10f64.powf(rng.random_range(-3.0..3.0));
        let alpha = if rng.random::<bool>() { alpha } else { -alpha };
        let scaled: Vec<f64> = x.iter().map(|v| alpha * v).collect();
        let a = angle_to_subspace(&x, &b).unwrap().unwrap();
        let s = angle_to_subspace(&scaled, &b).unwrap().unwrap();
        worst[2] = worst[2].max((a - s).abs());
        failures[2] += usize::from((a - s).abs() > 1e-10);

        let m = rng.random_range(1..=30);
        let n = rng.random_range(1..=30);
        let svd = svd_thin(&gaussian_matrix(&mut rng, m, n)).unwrap();
        let ortho = orthonormality_error(&svd.right_vectors).max(orthonormality_error(&b));
        worst[3] = worst[3].max(ortho);
        failures[3] += usize::from(ortho > 1e-8);
    }
    verdict(
        failures.iter().all(|&f| f == 0),
        format!(
            "{TRIALS} trials each; failures idempotence {} (worst {:.1e} vs 1e-10), Pythagoras {} (worst {:.1e} vs 1e-8 rel), \
             scale/sign {} (worst {:.1e} vs 1e-10), orthonormality {} (worst {:.1e} vs 1e-8)",
            failures[0], worst[0], failures[1], worst[1], failures[2], worst[2], failures[3], worst[3]
        ),
    )
}

// 2. PCA correctness.

/// Cyclic Jacobi eigenvalues of a symmetric matrix, descending.
fn jacobi_eigenvalues(a: &DenseMatrix) -> Vec<f64> {
    let n = a.rows();
    let mut a: Vec<Vec<f64>> = (0..n).map(|i| a.row(i).to_vec()).collect();
    for _ in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        let diag: f64 = (0..n).map(|i| a[i][i] * a[i][i]).sum();
        if off <= 1e-32 * diag.max(f64::MIN_POSITIVE) {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q] == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = if theta == 0.0 {
                    1.0
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for row in a.iter_mut() {
                    let (kp, kq) = (row[p], row[q]);
                    row[p] = c * kp - s * kq;
                    row[q] = s * kp + c * kq;
                }
                for k in 0..n {
                    let (pk, qk) = (a[p][k], a[q][k]);
                    a[p][k] = c * pk - s * qk;
                    a[q][k] = s * pk + c * qk;
                }
            }
        }
    }
    let mut values: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    values.sort_by(|x, y| y.total_cmp(x));
    values
}

fn projector(b: &DenseMatrix) -> DenseMatrix {
    b.matmul_transpose(b).unwrap()
}

fn max_abs_diff(a: &DenseMatrix, b: &DenseMatrix) -> f64 {
    a.as_slice().iter().zip(b.as_slice()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn pca_correctness() -> Verdict {
    const MATRICES: usize = 200;
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut sym_fail, mut sym_worst) = (0usize, 0.0f64);
    let (mut svd_fail, mut svd_worst) = (0usize, 0.0f64);
    for i in 0..MATRICES {
        let m = rng.random_range(1..=50);
        let n = rng.random_range(1..=50);
        let x = gaussian_matrix(&mut rng, m, n);

        // Singular values against the oracle, and reconstruction.
        let svd = svd_thin(&x).unwrap();
        let gram = x.transpose_matmul(&x).unwrap();
        let oracle: Vec<f64> = jacobi_eigenvalues(&gram).iter().map(|v| v.max(0.0).sqrt()).collect();
        let top = oracle[0].max(f64::MIN_POSITIVE);
        let sv_err = svd
            .singular_values
            .iter()
            .zip(&oracle)
            .map(|(a, b)| (a - b).abs() / top)
            .fold(0.0, f64::max);
        let rec = svd.reconstruct(&x).unwrap();
        let rec_err = max_abs_diff(&rec, &x) / x.max_abs().max(f64::MIN_POSITIVE);
        let err = sv_err.max(rec_err);
        svd_worst = svd_worst.max(err);
        svd_fail += usize::from(err > 1e-8);

        // Uncentred PCA of X against PCA of the explicit [X; -X].
        let neg: Vec<f64> = x.as_slice().iter().map(|v| -v).collect();
        let mut both = x.as_slice().to_vec();
        both.extend(neg);
        let both = DenseMatrix::from_vec(2 * m, n, both).unwrap();
        let threshold = if i % 2 == 0 { 0.99 } else { 1.0 };
        let params = BankParams {
            num_classes: 1,
            variance_threshold: threshold,
            layer_index: 0,
            label_source: LabelSource::True,
        };
        let a = estimate_bank(&x, &vec![0; m], &params).unwrap();
        let b = estimate_bank(&both, &vec![0; 2 * m], &params).unwrap();
        let (sa, sb) = (&a.subspaces[0], &b.subspaces[0]);
        let err = if sa.num_components != sb.num_components {
            f64::INFINITY
        } else {
            max_abs_diff(&projector(&sa.basis), &projector(&sb.basis))
                .max((sa.explained_variance_ratio - sb.explained_variance_ratio).abs())
        };
        sym_worst = sym_worst.max(err);
        sym_fail += usize::from(err > 1e-8);
    }
    verdict(
        sym_fail == 0 && svd_fail == 0,
        format!(
            "{MATRICES} matrices up to 50x50; symmetrisation failures {sym_fail} (worst B·Bᵀ diff {sym_worst:.1e} vs 1e-8), \
             SVD vs Jacobi failures {svd_fail} (worst {svd_worst:.1e} vs 1e-8)"
        ),
    )
}

// 3. Gradient check.

fn min_abs_preactivation(model: &MlpModel, x: &DenseMatrix) -> f64 {
    let mut a = x.clone();
    let mut smallest = f64::INFINITY;
    for layer in 0..model.num_hidden_layers() {
        let (w, b) = model.layer_parameters(layer);
        let mut z = a.matmul(&w).unwrap();
        for i in 0..z.rows() {
            for (v, bias) in z.row_mut(i).iter_mut().zip(&b) {
                *v += bias;
                smallest = smallest.min(v.abs());
                *v = v.max(0.0);
            }
        }
        a = z;
    }
    smallest
}

fn gradient_check() -> Verdict {
    const NETS: usize = 150;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut checked, mut skipped, mut failures) = (0usize, 0usize, 0usize);
    let mut worst = 0.0f64;
    while checked < NETS {
        let input = rng.random_range(1..=3);
        let depth = rng.random_range(1..=2);
        let widths: Vec<usize> = (0..depth).map(|_| rng.random_range(1..=4)).collect();
        let classes = rng.random_range(2..=3);
        let config = MlpConfig {
            input_dim: input,
            hidden_widths: widths,
            num_classes: classes,
            optimizer: Optimizer::sgd(0.1, 0.0),
            batch_size: 4,
            max_epochs: 1,
            target_train_accuracy: 1.0,
            init_seed: rng.random(),
        };
        let dims = config.layer_dims();
        if dims.windows(2).map(|w| (w[0] + 1) * w[1]).sum::<usize>() > 50 {
            continue;
        }
        let mut model = init_model(&config).unwrap();
        let rows = rng.random_range(1..=3);
        let x = DenseMatrix::from_vec(rows, input, (0..rows * input).map(|_| rng.random_range(-2.0..2.0)).collect())
            .unwrap();
        // Central differences straddling a ReLU kink measure the wrong thing.
        if min_abs_preactivation(&model, &x) <= 1e-3 {
            skipped += 1;
            continue;
        }
        let labels: Vec<usize> = (0..rows).map(|_| rng.random_range(0..classes)).collect();
        let (_, grad) = model.loss_and_gradient(&x, &labels).unwrap();
        let base = model.parameters().to_vec();
        let h = 1e-5;
        let mut ok = true;
        for j in 0..base.len() {
            let mut p = base.clone();
            p[j] = base[j] + h;
            model.set_parameters(&p).unwrap();
            let up = model.loss(&x, &labels).unwrap();
            p[j] = base[j] - h;
            model.set_parameters(&p).unwrap();
            let down = model.loss(&x, &labels).unwrap();
            let numeric = (up - down) / (2.0 * h);
            let rel = (grad[j] - numeric).abs() / grad[j].abs().max(numeric.abs()).max(1e-6);
            worst = worst.max(rel);
            ok &= rel <= 1e-4;
        }
        failures += usize::from(!ok);
        checked += 1;
    }
    verdict(
        failures == 0,
        format!(
            "{checked} nets (≤ 50 parameters, {skipped} draws near a ReLU kink redrawn); failures {failures}, worst relative error {worst:.1e} vs 1e-4"
        ),
    )
}

// 4. Corruption statistics.

fn corruption_statistics() -> Verdict {
    let n = 60_000;
    let c = 10;
    let labels: Vec<usize> = (0..n).map(|i| i % c).collect();
    let data = LabeledDataset::new(DenseMatrix::zeros(n, 1), labels, c).unwrap();
    let mut pass = true;
    let mut parts = Vec::new();
    for (i, p) in [0.2, 0.4, 0.6, 0.8, 1.0].into_iter().enumerate() {
        let corrupted = corrupt_labels(&data, p, 40 + i as u64).unwrap();
        let q = p * (1.0 - 1.0 / c as f64);
        let sigma = (q * (1.0 - q) / n as f64).sqrt();
        let f = changed_fraction(&corrupted);
        let ok = (f - q).abs() <= 3.0 * sigma && corrupted.true_labels() == data.true_labels();
        pass &= ok;
        parts.push(format!("p={p}: {f:.4} vs {q:.2}±{:.4}", 3.0 * sigma));
    }
    verdict(pass, parts.join(", "))
}

// 5. Synthetic oracle.

fn synthetic_oracle() -> Verdict {
    let all = generate_synthetic(&SyntheticSpec {
        num_classes: 5,
        samples_per_class: 200,
        ambient_dim: 20,
        subspace_dim_per_class: 3,
        noise_sigma: 0.01,
        seed: 5,
    })
    .unwrap();
    let (train, test) = split_holdout(&all, 0.25, 5).unwrap();
    let params = BankParams {
        num_classes: 5,
        variance_threshold: 0.99,
        layer_index: 0,
        label_source: LabelSource::True,
    };
    let bank = estimate_bank(train.inputs(), train.true_labels(), &params).unwrap();
    let r = evaluate(test.inputs(), test.true_labels(), &bank, MetricKind::MascTest).unwrap();
    let ks: Vec<usize> = bank.subspaces.iter().map(|s| s.num_components).collect();
    verdict(
        r.accuracy >= 0.99,
        format!("held-out accuracy {} on {} samples (≥ 0.99), k per class {ks:?}", r.accuracy, r.num_samples),
    )
}

// 6 to 10: desk-profile MNIST.

const ALL_DEGREES: [f64; 6] = [0.0, 0.2, 0.4, 0.6, 0.8, 1.0];
const TREND_DEGREES: [f64; 3] = [0.4, 0.6, 0.8];

fn mnist_dir() -> PathBuf {
    std::env::var_os("MASC_MNIST_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/mnist"))
}

fn desk_config(out: &Path, kind: ExperimentKind, degrees: &[f64]) -> ExperimentConfig {
    ExperimentConfig {
        experiment_kind: kind,
        profile: Profile::Desk,
        dataset: DatasetSpec::Mnist {
            dir: mnist_dir(),
            train_size: 10_000,
            test_size: 2_000,
        },
        normalization: Normalization::DivideBy255,
        corruption_degrees: degrees.to_vec(),
        variance_thresholds: vec![0.99],
        num_runs: 3,
        master_seed: 0,
        output_dir: out.to_path_buf(),
        model: ModelOverrides::default(),
        layers: None,
        reuse_checkpoints: true,
        write_predictions: false,
        workers: 1,
    }
}

fn run(config: ExperimentConfig) -> Result<Vec<LayerReport>, String> {
    Harness::new(config).and_then(|h| h.run()).map_err(|e| e.to_string())
}

fn mean_of(r: &LayerReport, source: LabelSource, kind: MetricKind) -> f64 {
    r.metric(source, kind).map_or(f64::NAN, |m| m.accuracy.mean)
}

fn at(reports: &[LayerReport], p: f64) -> Vec<&LayerReport> {
    reports.iter().filter(|r| r.p == p).collect()
}

fn trend_a(reports: &[LayerReport], elapsed: Duration) -> Verdict {
    let mut pass = elapsed <= Duration::from_secs(2 * 3600);
    let mut parts = Vec::new();
    for p in TREND_DEGREES {
        let layers = at(reports, p);
        let best = layers
            .iter()
            .max_by(|a, b| {
                mean_of(a, LabelSource::Corrupted, MetricKind::MascTest)
                    .total_cmp(&mean_of(b, LabelSource::Corrupted, MetricKind::MascTest))
            })
            .unwrap();
        let last = layers.iter().max_by_key(|r| r.layer_index).unwrap();
        let masc_test = mean_of(best, LabelSource::Corrupted, MetricKind::MascTest);
        let gap = masc_test - best.model_test_accuracy;
        let last_train = mean_of(last, LabelSource::Corrupted, MetricKind::MascCorruptedTrain);
        let ok = gap >= 0.15 && last_train >= 0.90;
        pass &= ok;
        parts.push(format!(
            "p={p} {}: best layer {} MASC test {masc_test:.4} vs model {:.4} (gap {:.1}pp, need ≥ 15), \
             last-layer MASC corrupted-train {last_train:.4} (need ≥ 0.90)",
            if ok { "ok" } else { "MISS" },
            best.layer_name,
            best.model_test_accuracy,
            100.0 * gap
        ));
    }
    verdict(pass, parts.join("; "))
}

fn trend_b(reports: &[LayerReport], elapsed: Duration) -> Verdict {
    let last = reports.iter().max_by_key(|r| r.layer_index).unwrap();
    let masc = mean_of(last, LabelSource::True, MetricKind::MascTest);
    let band = 3.0 * (0.1f64 * 0.9 / 2000.0).sqrt();
    let models: Vec<f64> = last.runs.iter().map(|r| r.model_test_accuracy).collect();
    let chance = models.iter().all(|a| (a - 0.1).abs() <= band);
    verdict(
        masc >= 0.5 && chance && elapsed <= Duration::from_secs(40 * 60),
        format!(
            "p=1.0 last hidden layer {}: true-label MASC test {masc:.4} (need ≥ 0.50); model test per run {models:?} (need 0.1 ± {band:.4})",
            last.layer_name
        ),
    )
}

fn control(truth: &[LayerReport], control: &[LayerReport], elapsed: Duration) -> Verdict {
    let mut pass = elapsed <= Duration::from_secs(30 * 60);
    let mut parts = Vec::new();
    for p in ALL_DEGREES {
        let trained = at(truth, p);
        let random = at(control, p);
        let wins: Vec<String> = trained
            .iter()
            .filter_map(|t| {
                let r = random.iter().find(|r| r.layer_index == t.layer_index)?;
                let (a, b) = (
                    mean_of(t, LabelSource::True, MetricKind::MascTest),
                    mean_of(r, LabelSource::True, MetricKind::MascTest),
                );
                (a > b).then(|| format!("{} {a:.3}>{b:.3}", t.layer_name))
            })
            .collect();
        pass &= !wins.is_empty();
        parts.push(format!("p={p}: [{}]", wins.join(", ")));
    }
    verdict(pass, format!("chance check passed; trained beats random init at {}", parts.join("; ")))
}

fn traces_consistent(dirs: &[&Path], reports: &[&[LayerReport]]) -> Verdict {
    let mut checked = 0usize;
    let mut bad = Vec::new();
    for (dir, rs) in dirs.iter().zip(reports) {
        let mut seen = std::collections::BTreeSet::new();
        for r in rs.iter().filter(|r| !r.control) {
            for info in &r.runs {
                if !seen.insert(info.checkpoint.clone()) {
                    continue;
                }
                let trace = dir.join(Path::new(&info.checkpoint).with_file_name("trace.csv"));
                let max = match read_table(&trace) {
                    Ok((_, rows)) => rows
                        .iter()
                        .map(|row| row[2].parse::<f64>().unwrap())
                        .fold(f64::NEG_INFINITY, f64::max),
                    Err(e) => {
                        bad.push(e.to_string());
                        continue;
                    }
                };
                checked += 1;
                if max != info.best_test_accuracy {
                    bad.push(format!("{}: best {} but max {max}", trace.display(), info.best_test_accuracy));
                }
            }
        }
    }
    verdict(
        bad.is_empty() && checked > 0,
        format!("{checked} training runs checked; mismatches: {}", if bad.is_empty() { "none".into() } else { bad.join("; ") }),
    )
}

fn fresh_dir(root: &Path, name: &str) -> PathBuf {
    let d = root.join(name);
    if d.exists() {
        std::fs::remove_dir_all(&d).expect("clear old acceptance output");
    }
    d
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let mut all_pass = true;
    let mut emit = |n: usize, title: &str, start: Instant, v: Verdict| {
        all_pass &= v.pass;
        println!(
            "criterion {n:>2} [{title}]: {} in {:.1}s: {}",
            if v.pass { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64(),
            v.detail
        );
    };

    let t = Instant::now();
    let v = geometry_suite();
    let v = verdict(v.pass && t.elapsed() < Duration::from_secs(60), v.detail);
    emit(1, "geometry suite", t, v);

    let t = Instant::now();
    let v = pca_correctness();
    let v = verdict(v.pass && t.elapsed() < Duration::from_secs(120), v.detail);
    emit(2, "PCA correctness", t, v);

    let t = Instant::now();
    let v = gradient_check();
    let v = verdict(v.pass && t.elapsed() < Duration::from_secs(60), v.detail);
    emit(3, "gradient check", t, v);

    let t = Instant::now();
    emit(4, "corruption statistics", t, corruption_statistics());

    let t = Instant::now();
    emit(5, "synthetic oracle", t, synthetic_oracle());

    let mnist = mnist_dir();
    let missing: Vec<_> = MNIST_FILES.iter().filter(|f| !mnist.join(f).is_file()).collect();
    if !missing.is_empty() {
        for (n, title) in [(6, "trend A"), (7, "trend B"), (8, "control"), (9, "determinism"), (10, "early stopping")] {
            emit(
                n,
                title,
                Instant::now(),
                verdict(false, format!("MNIST files {missing:?} not found under {}", mnist.display())),
            );
        }
        std::process::exit(1);
    }

    let tmp;
    let root = match std::env::var_os("MASC_ACCEPTANCE_OUT") {
        Some(d) => PathBuf::from(d),
        None => {
            tmp = tempfile::Builder::new().prefix("masc-acceptance").tempdir().unwrap();
            tmp.path().to_path_buf()
        }
    };
    let a = fresh_dir(&root, "a");
    let b = fresh_dir(&root, "b");
    let empty: Vec<LayerReport> = Vec::new();

    let t = Instant::now();
    let trend = run(desk_config(&a, ExperimentKind::CorruptedSubspaces, &TREND_DEGREES));
    match &trend {
        Ok(r) => emit(6, "trend A", t, trend_a(r, t.elapsed())),
        Err(e) => emit(6, "trend A", t, verdict(false, e.clone())),
    }

    let t = Instant::now();
    let full = run(desk_config(&a, ExperimentKind::TrueLabelSubspaces, &[1.0]));
    match &full {
        Ok(r) => emit(7, "trend B", t, trend_b(r, t.elapsed())),
        Err(e) => emit(7, "trend B", t, verdict(false, e.clone())),
    }

    let t = Instant::now();
    let truth = run(desk_config(&a, ExperimentKind::TrueLabelSubspaces, &ALL_DEGREES));
    let ctrl = run(desk_config(&a, ExperimentKind::RandomInitControl, &ALL_DEGREES));
    match (&truth, &ctrl) {
        (Ok(tr), Ok(c)) => emit(8, "control", t, control(tr, c, t.elapsed())),
        (Err(e), _) | (_, Err(e)) => emit(8, "control", t, verdict(false, e.clone())),
    }

    let t = Instant::now();
    let again = run(desk_config(&b, ExperimentKind::CorruptedSubspaces, &TREND_DEGREES));
    let v = match &again {
        Ok(_) => {
            let files = ["report.csv", "runs.csv"];
            let same: Vec<bool> = files
                .iter()
                .map(|f| {
                    let x = std::fs::read(a.join("corrupted_subspaces").join(f)).ok();
                    let y = std::fs::read(b.join("corrupted_subspaces").join(f)).ok();
                    x.is_some() && x == y
                })
                .collect();
            verdict(
                same.iter().all(|&s| s),
                format!("fresh re-run of criterion 6, byte-identical: report.csv {}, runs.csv {}", same[0], same[1]),
            )
        }
        Err(e) => verdict(false, e.clone()),
    };
    emit(9, "determinism", t, v);

    let t = Instant::now();
    let v = traces_consistent(
        &[&a, &a, &a, &b],
        &[
            trend.as_deref().unwrap_or(&empty),
            full.as_deref().unwrap_or(&empty),
            truth.as_deref().unwrap_or(&empty),
            again.as_deref().unwrap_or(&empty),
        ],
    );
    emit(10, "early stopping", t, v);

    if !all_pass {
        std::process::exit(1);
    }
}
