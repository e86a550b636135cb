mod common;

use common::*;
use palmfact_core::dictlearn::{
    coefficient_set, omp, omp_matrix, oracle_baseline_rmse, proposed_learn, synth_dictionary,
    synth_training_data, DictKind, LearnParams, SynthSpec, FIRST_SPLIT_NOTE,
};
use palmfact_core::hierarchy::build_experiment_schedule;
use palmfact_core::{DenseMatrix, FactorizationReport, PalmConfig};
use rand::seq::index;
use rand::Rng as _;

fn mat(m: &Mat) -> DenseMatrix {
    DenseMatrix::from_rows(m).unwrap()
}

fn col(m: &Mat, j: usize) -> Vec<f64> {
    m.iter().map(|r| r[j]).collect()
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

#[test]
fn fact_dictionaries_are_full_rank() {
    for seed in 0..100 {
        let dict = synth_dictionary(&SynthSpec {
            seed,
            ..SynthSpec::default()
        })
        .unwrap();
        assert_eq!(oracle_rank(&to_rows(&dict.dense), 1e-10), 32, "seed {seed}");
        let factors = dict.factors.unwrap();
        assert_eq!(factors.len(), 5);
        for f in &factors {
            assert!((64..=128).contains(&f.nnz()), "seed {seed}: {}", f.nnz());
        }
        let prod = naive_chain(&factors.iter().map(sparse_rows).collect::<Vec<_>>());
        assert!(
            max_abs_diff(&prod, &to_rows(&dict.dense))
                <= 1e-10 * prod.iter().flatten().fold(1.0f64, |m, v| m.max(v.abs()))
        );
    }
}

#[test]
fn rand_dictionary_looks_gaussian() {
    let mean_abs = (2.0 / std::f64::consts::PI).sqrt();
    let sd = ((1.0 - 2.0 / std::f64::consts::PI) / 1024.0).sqrt();
    for seed in 0..10 {
        let spec = SynthSpec {
            dict_kind: DictKind::Rand,
            seed,
            ..SynthSpec::default()
        };
        let dict = synth_dictionary(&spec).unwrap();
        assert!(dict.factors.is_none());
        let v = dict.dense.data();
        assert_eq!(v.len(), 1024);
        let m = v.iter().map(|x| x.abs()).sum::<f64>() / 1024.0;
        assert!((m - mean_abs).abs() <= 3.0 * sd, "seed {seed}: {m}");
        let mean = v.iter().sum::<f64>() / 1024.0;
        assert!(mean.abs() <= 3.0 / 32.0, "seed {seed}: {mean}");
    }
}

#[test]
fn training_data_columns() {
    let dict = synth_dictionary(&SynthSpec::default()).unwrap();
    let (x, gamma) = synth_training_data(&dict.dense, 500, 5, 3).unwrap();
    let g = sparse_rows(&gamma);
    let d = to_rows(&dict.dense);
    let xr = to_rows(&x);
    for j in 0..500 {
        let gj = col(&g, j);
        assert_eq!(gj.iter().filter(|v| **v != 0.0).count(), 5);
        let want = naive_matvec(&d, &gj);
        let got = col(&xr, j);
        let err = want
            .iter()
            .zip(&got)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(err <= 1e-12 * norm(&want).max(1.0));
    }
    assert!(synth_training_data(&dict.dense, 10, 33, 3).is_err());
}

#[test]
fn orthogonal_full_support_recovery() {
    let mut r = rng(60);
    let q = random_orthonormal(32, &mut r);
    let (x, gamma) = synth_training_data(&mat(&q), 50, 32, 4).unwrap();
    let recovered = naive_mul(&transpose(&q), &to_rows(&x));
    assert!(max_abs_diff(&recovered, &sparse_rows(&gamma)) < 1e-10);
}

#[test]
fn omp_examples() {
    let mut r = rng(61);
    let q = random_orthonormal(16, &mut r);
    let d = mat(&q);
    let zero = omp(&d, &[0.0; 16], 3).unwrap();
    assert!(zero.coefficients.iter().all(|c| c.1 == 0.0));
    assert_eq!(zero.residual_norm, 0.0);

    let x: Vec<f64> = (0..16).map(|i| 3.0 * q[i][7] - 2.0 * q[i][2]).collect();
    let code = omp(&d, &x, 2).unwrap();
    let mut support = code.support();
    support.sort();
    assert_eq!(support, vec![2, 7]);
    let dense = code.dense(16);
    assert!((dense[7] - 3.0).abs() < 1e-12 && (dense[2] + 2.0).abs() < 1e-12);
    assert!(omp(&d, &x, 0).is_err());
    assert!(omp(&d, &[1.0; 3], 1).is_err());
}

#[test]
fn orthonormal_sparse_signals_are_recovered() {
    let mut r = rng(62);
    for case in 0..100 {
        let q = random_orthonormal(32, &mut r);
        let k = 1 + case % 8;
        let mut truth = vec![0.0; 32];
        for j in index::sample(&mut r, 32, k) {
            truth[j] = gaussian(&mut r);
        }
        let x = naive_matvec(&q, &truth);
        let code = omp(&mat(&q), &x, k).unwrap();
        let got = code.dense(32);
        let err = got
            .iter()
            .zip(&truth)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(err <= 1e-10, "case {case}: {err}");
    }
}

#[test]
fn random_dictionary_support_recovery() {
    let mut good = 0;
    for seed in 0..100 {
        let mut r = rng(1000 + seed);
        let mut d = to_rows(&random_dense(32, 32, &mut r));
        for j in 0..32 {
            let n = norm(&col(&d, j));
            d.iter_mut().for_each(|row| row[j] /= n);
        }
        let support: Vec<usize> = index::sample(&mut r, 32, 3).into_vec();
        let mut truth = vec![0.0; 32];
        for (i, &j) in support.iter().enumerate() {
            let sign = if r.random::<bool>() { 1.0 } else { -1.0 };
            truth[j] = sign * [10.0, 5.0, 2.5][i];
        }
        let x = naive_matvec(&d, &truth);
        let code = omp(&mat(&d), &x, 3).unwrap();
        let mut got = code.support();
        got.sort();
        let mut want = support.clone();
        want.sort();
        if got == want {
            good += 1;
        }
    }
    assert!(good >= 95, "{good}/100");
}

#[test]
fn residuals_shrink_and_stay_orthogonal() {
    let mut r = rng(63);
    for _ in 0..20 {
        let d = random_dense(32, 32, &mut r);
        let dr = to_rows(&d);
        let x: Vec<f64> = (0..32).map(|_| gaussian(&mut r)).collect();
        let mut last = f64::INFINITY;
        for k in 1..=32 {
            let code = omp(&d, &x, k).unwrap();
            assert!(code.residual_norm <= last + 1e-12);
            last = code.residual_norm;
            let xhat = naive_matvec(&dr, &code.dense(32));
            let res: Vec<f64> = x.iter().zip(&xhat).map(|(a, b)| a - b).collect();
            for &j in &code.support() {
                let c = col(&dr, j);
                let dot: f64 = c.iter().zip(&res).map(|(a, b)| a * b).sum();
                assert!(dot.abs() <= 1e-10 * norm(&x), "k={k}");
            }
        }
        assert!(last <= 1e-8 * norm(&x).max(1.0));
    }
}

#[test]
fn coefficient_matrix_is_column_sparse() {
    let mut r = rng(64);
    let d = random_dense(32, 40, &mut r);
    let x = random_dense(32, 25, &mut r);
    let res = omp_matrix(&d, &x, 5).unwrap();
    assert!(coefficient_set(40, 25, 5)
        .unwrap()
        .is_feasible(&res.coefficients));
    assert_eq!(res.residual_norms.len(), 25);
}

fn small_learn(seed: u64) -> (DenseMatrix, FactorizationReport) {
    let spec = SynthSpec {
        n: 150,
        seed,
        ..SynthSpec::default()
    };
    let dict = synth_dictionary(&spec).unwrap();
    let (x, _) = synth_training_data(&dict.dense, spec.n, 5, seed).unwrap();
    let cfg = PalmConfig {
        max_iter: 40,
        ..PalmConfig::default()
    };
    let report = proposed_learn(&x, LearnParams::new(4, 3, 512), &cfg, seed).unwrap();
    (x, report)
}

#[test]
fn learned_report_invariants() {
    let (x, report) = small_learn(7);
    let factors = report.operator.factors();
    assert_eq!(factors.len(), 4);
    assert!(coefficient_set(32, 150, 5)
        .unwrap()
        .is_feasible(&factors[3]));
    let bound = build_experiment_schedule(32, 150, 4, 3, 512)
        .unwrap()
        .rc_bound(3);
    assert!(report.rc <= bound);
    assert_eq!(report.dictionary_factors, 3);
    assert!(report.notes.iter().any(|n| n == FIRST_SPLIT_NOTE));
    for g in &report.global_steps {
        assert!(g.trace.windows(2).all(|w| w[1] <= w[0] + 1e-9));
    }

    // RMSE recomputed from the serialized report
    let json = serde_json::to_string(&report).unwrap();
    let back: serde_json::Value = serde_json::from_str(&json).unwrap();
    let scale = back["operator"]["scale"].as_f64().unwrap();
    let parsed: FactorizationReport = serde_json::from_str(&json).unwrap();
    let chain: Vec<Mat> = parsed.operator.factors().iter().map(sparse_rows).collect();
    let prod = naive_chain(&chain);
    let scaled: Mat = prod
        .iter()
        .map(|r| r.iter().map(|v| v * scale).collect())
        .collect();
    let rmse = elementwise_dist(&to_rows(&x), &scaled) / ((32 * 150) as f64).sqrt();
    assert!((rmse - back["rmse"].as_f64().unwrap()).abs() <= 1e-10);
}

#[test]
fn learning_is_deterministic() {
    let (_, a) = small_learn(9);
    let (_, b) = small_learn(9);
    assert_eq!(a.operator, b.operator);
    assert_eq!(a.rmse.to_bits(), b.rmse.to_bits());
    assert_eq!(a.global_steps, b.global_steps);
}

#[test]
fn larger_residual_budget_never_raises_bound() {
    for q in 3..=6 {
        for p in 2..=4 {
            let bounds: Vec<f64> = [512, 614, 717, 819]
                .iter()
                .map(|&big_p| {
                    build_experiment_schedule(32, 500, q, p, big_p)
                        .unwrap()
                        .rc_bound(q - 1)
                })
                .collect();
            // the bound only counts dictionary factors, and a larger P only
            // loosens residual sets
            assert!(bounds.windows(2).all(|w| w[1] >= w[0]));
        }
    }
}

#[test]
fn baseline_is_small_for_exact_data() {
    let dict = synth_dictionary(&SynthSpec {
        dict_kind: DictKind::Rand,
        seed: 2,
        ..SynthSpec::default()
    })
    .unwrap();
    let (x, _) = synth_training_data(&dict.dense, 100, 1, 2).unwrap();
    assert!(oracle_baseline_rmse(&dict.dense, &x, 1).unwrap() < 1e-12);
}
