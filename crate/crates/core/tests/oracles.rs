mod common;

use std::collections::BTreeMap;

use common::*;
use ndarray::{s, Array2};
use pawn_meta::functions::{eval_batch, SOBOL_G_A};
use pawn_meta::meta::{
    build_meta_design, evaluate_design, inner_offset, inner_sample_for, meta_sensitivity, run_inner_pawn,
    run_inner_total_order, run_meta, DesignPoint, MetaResult,
};
use pawn_meta::overlap::coefficient_of_overlapping;
use pawn_meta::pawn::{pawn_indices, PawnConfig, Summary};
use pawn_meta::sampling::{build_estimator_design, sobol_sequence, transform};
use pawn_meta::variance::{clamp, first_order, total_order, EvaluatedDesign, TotalEstimator};
use pawn_meta::{FunctionSpec, Model, Setting};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const BASE: usize = 1 << 13;

// Frozen from the closed-form decomposition (a = 2, b = 1), recomputed
// independently in double precision.
const ISHIGAMI_FIRST: [f64; 3] = [0.3830238, 0.000913038, 0.0];
const ISHIGAMI_TOTAL: [f64; 3] = [0.9990870, 0.000913038, 0.6160631];
const ISHIGAMI_VARIANCE: f64 = 547.6224;
const SOBOL_G_FIRST: [f64; 8] = [
    0.716192, 0.179048, 0.0236758, 0.00716192, 7.16e-5, 7.16e-5, 7.16e-5, 7.16e-5,
];

#[test]
fn closed_forms_match_frozen_values() {
    let (first, total) = ishigami_truth();
    for i in 0..3 {
        assert!((first[i] - ISHIGAMI_FIRST[i]).abs() < 1e-6);
        assert!((total[i] - ISHIGAMI_TOTAL[i]).abs() < 1e-6);
    }
    for (t, f) in sobol_g_truth(&SOBOL_G_A).iter().zip(SOBOL_G_FIRST) {
        assert!((t - f).abs() < 1e-6, "{t} vs {f}");
    }
}

#[test]
fn ishigami_first_and_total() {
    let e = estimates(&FunctionSpec::Ishigami, BASE, 1, TotalEstimator::Jansen);
    for i in 0..3 {
        assert!((e.first[i] - ISHIGAMI_FIRST[i]).abs() <= 0.02, "S{} = {}", i + 1, e.first[i]);
        assert!((e.total[i] - ISHIGAMI_TOTAL[i]).abs() <= 0.02, "ST{} = {}", i + 1, e.total[i]);
    }
    assert!((e.variance / ISHIGAMI_VARIANCE - 1.0).abs() < 0.02);
}

#[test]
fn sobol_g_first_order() {
    let e = estimates(&FunctionSpec::SobolG, BASE, 1, TotalEstimator::Jansen);
    for (i, want) in SOBOL_G_FIRST.iter().enumerate() {
        assert!((e.first[i] - want).abs() <= 0.02, "S{} = {}", i + 1, e.first[i]);
    }
}

#[test]
fn liu_total_order_each_estimator() {
    let f = FunctionSpec::Liu;
    let design = build_estimator_design(BASE, 2, 1, 1)
        .unwrap()
        .transformed(&f.input_distributions())
        .unwrap();
    let ev = EvaluatedDesign::evaluate(&f, &design, false).unwrap();
    for est in [TotalEstimator::Jansen, TotalEstimator::HommaSaltelli, TotalEstimator::Sobol2007] {
        for i in 0..2 {
            let v = clamp(total_order(&ev, i, est).unwrap());
            assert!((v - 0.546).abs() <= 0.05, "{est} X{}: {v}", i + 1);
        }
    }
}

#[test]
fn additive_indices_sum_to_one() {
    let m = Unit(4, |x: &[f64]| x[0] + 2.0 * x[1] + 3.0 * x[2] + 0.5 * x[3]);
    let e = estimates(&m, BASE, 1, TotalEstimator::Jansen);
    assert!((e.first.iter().sum::<f64>() - 1.0).abs() <= 0.02);
    for i in 0..4 {
        assert!((e.total[i] - e.first[i]).abs() <= 0.02);
    }
    let c = [1.0, 4.0, 9.0, 0.25];
    let sum: f64 = c.iter().sum();
    for i in 0..4 {
        assert!((e.first[i] - c[i] / sum).abs() <= 0.02);
    }
}

#[test]
fn identity_input() {
    let m = Unit(2, |x: &[f64]| x[0]);
    let e = estimates(&m, 1 << 12, 1, TotalEstimator::Jansen);
    assert!((e.first[0] - 1.0).abs() < 0.02 && e.first[1].abs() < 0.02);
    let design = build_estimator_design(256, 2, 1, 1).unwrap().transformed(&m.input_distributions()).unwrap();
    let ev = EvaluatedDesign::evaluate(&m, &design, false).unwrap();
    for est in [TotalEstimator::Jansen, TotalEstimator::HommaSaltelli, TotalEstimator::Sobol2007] {
        assert!((total_order(&ev, 0, est).unwrap() - 1.0).abs() < 0.05);
        assert!(total_order(&ev, 1, est).unwrap().abs() < 0.05);
    }
}

#[test]
fn total_estimators_agree_on_ishigami() {
    let ev = evaluated(&FunctionSpec::Ishigami, BASE, 1);
    for i in 0..3 {
        let v: Vec<f64> = [TotalEstimator::Jansen, TotalEstimator::HommaSaltelli, TotalEstimator::Sobol2007]
            .iter()
            .map(|&e| total_order(&ev, i, e).unwrap())
            .collect();
        let spread = v.iter().cloned().fold(f64::MIN, f64::max) - v.iter().cloned().fold(f64::MAX, f64::min);
        assert!(spread <= 0.03, "X{}: {v:?}", i + 1);
    }
}

/// Plain Monte Carlo pick-freeze estimates on independent pseudo-random
/// points: the closed and total variances of every subset of a 3-input model.
fn monte_carlo_oracle(f: impl Fn(&[f64]) -> f64, n: usize) -> (BTreeMap<Vec<usize>, f64>, [f64; 3]) {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let subsets: Vec<Vec<usize>> = vec![vec![0], vec![1], vec![2], vec![0, 1], vec![0, 2], vec![1, 2]];
    let mut ya = Vec::with_capacity(n);
    let mut yc: Vec<Vec<f64>> = vec![Vec::with_capacity(n); subsets.len()];
    let mut yd: Vec<Vec<f64>> = vec![Vec::with_capacity(n); 3];
    for _ in 0..n {
        let a: [f64; 3] = rng.random();
        let b: [f64; 3] = rng.random();
        ya.push(f(&a));
        for (s, out) in subsets.iter().zip(yc.iter_mut()) {
            // Shares the subset with `a`, everything else from `b`.
            let mut c = b;
            for &i in s {
                c[i] = a[i];
            }
            out.push(f(&c));
        }
        for (i, out) in yd.iter_mut().enumerate() {
            let mut d = a;
            d[i] = b[i];
            out.push(f(&d));
        }
    }
    let nf = n as f64;
    let mean = ya.iter().sum::<f64>() / nf;
    let var = ya.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / nf;
    let closed = subsets
        .iter()
        .zip(&yc)
        .map(|(s, c)| {
            let mc = c.iter().sum::<f64>() / nf;
            let cov = ya.iter().zip(c).map(|(a, c)| (a - mean) * (c - mc)).sum::<f64>() / nf;
            (s.clone(), cov / var)
        })
        .collect();
    let mut total = [0.0; 3];
    for i in 0..3 {
        total[i] = ya.iter().zip(&yd[i]).map(|(a, d)| (a - d).powi(2)).sum::<f64>() / (2.0 * nf) / var;
    }
    (closed, total)
}

#[test]
fn quadratic_against_monte_carlo() {
    let f = |x: &[f64]| x[0] + x[1] * x[1] + 2.0 * x[0] * x[2] + 0.5 * x[1] * x[2];
    let (closed, total) = monte_carlo_oracle(f, 1_000_000);
    let e = estimates(&Unit(3, f), BASE, 2, TotalEstimator::Jansen);
    for i in 0..3 {
        assert!((e.first[i] - closed[&vec![i]]).abs() <= 0.02, "S{i}");
        assert!((e.total[i] - total[i]).abs() <= 0.02, "ST{i}");
    }
    for (&(i, j), v) in &e.second {
        let want = closed[&vec![i, j]] - closed[&vec![i]] - closed[&vec![j]];
        assert!((v - want).abs() <= 0.02, "S{i}{j}: {v} vs {want}");
    }
    // The interaction terms are not all zero, so the check has teeth.
    assert!(e.second[&(0, 2)] > 0.03);
}

#[test]
fn normal_overlap_closed_form() {
    for (k, delta) in [0.0, 0.5, 1.0, 2.0].into_iter().enumerate() {
        let a = normals(5000, 0.0, 10 + k as u64);
        let b = normals(5000, delta, 20 + k as u64);
        let want = 2.0 * phi(-delta / 2.0);
        let got = coefficient_of_overlapping(&a, &b).unwrap();
        assert!((got - want).abs() <= 0.03, "delta {delta}: {got} vs {want}");
    }
}

#[test]
fn overlap_shrinks_with_separation() {
    let a = normals(2000, 0.0, 1);
    let values: Vec<f64> = [0.0, 1.0, 2.0, 4.0]
        .iter()
        .map(|&d| coefficient_of_overlapping(&a, &normals(2000, d, 2)).unwrap())
        .collect();
    assert!(values.windows(2).all(|w| w[0] > w[1]), "{values:?}");
}

#[test]
fn pawn_budget_is_n() {
    let f = FunctionSpec::Ishigami;
    let counted = Counting::new(&f);
    let p = DesignPoint {
        sample_size: 1234,
        intervals: Some(12),
        eps: Some(9),
        theta: 1,
    };
    run_inner_pawn(&p, &counted, 3, 5).unwrap();
    assert_eq!(counted.calls(), 1234);
}

#[test]
fn total_order_budget() {
    for f in FunctionSpec::ALL {
        let counted = Counting::new(&f);
        let p = DesignPoint {
            sample_size: 1999,
            intervals: None,
            eps: None,
            theta: 2,
        };
        run_inner_total_order(&p, &counted, 3, 5).unwrap();
        let k = f.dimension();
        assert_eq!(counted.calls(), 1999 / (k + 1) * (k + 1));
        assert!(counted.calls() <= 1999);
    }
    assert_eq!(1999 / 21 * 21, 1995);
}

#[test]
fn meta_is_independent_of_thread_count() {
    let one = run_meta(Setting::MaxInTheta, &FunctionSpec::Ishigami, 32, 7, 1, 1).unwrap();
    let eight = run_meta(Setting::MaxInTheta, &FunctionSpec::Ishigami, 32, 7, 8, 1).unwrap();
    assert_eq!(one, eight);
    assert_eq!(one.row_count(), 32 * 6);
    let other_seed = run_meta(Setting::MaxInTheta, &FunctionSpec::Ishigami, 32, 8, 1, 1).unwrap();
    assert_ne!(one.values, other_seed.values);
}

#[test]
fn injected_null_factor_has_no_effect() {
    let f = FunctionSpec::Ishigami;
    let design = build_meta_design(Setting::MaxNotInTheta, 64, 1).unwrap();
    // The subsample seed is pinned, so eps cannot matter.
    let values = evaluate_design(&design, 2, |slot, p| {
        let pinned = DesignPoint { eps: Some(1), ..*p };
        run_inner_pawn(&pinned, &f, 11, slot)
    })
    .unwrap();
    let meta = MetaResult {
        function: f.to_string(),
        design,
        input_labels: f.input_labels(),
        values,
    };
    let sens = meta_sensitivity(&meta).unwrap();
    for e in &sens.per_input {
        assert_eq!(e.total[2], 0.0);
        assert!(e.first[2].abs() < 1e-12);
        assert!(e.total[0] > 0.05, "N still matters");
    }
}

#[test]
fn meta_first_order_below_total() {
    let meta = run_meta(Setting::MaxNotInTheta, &FunctionSpec::Ishigami, 512, 3, 4, 1).unwrap();
    let sens = meta_sensitivity(&meta).unwrap();
    for e in &sens.per_input {
        for p in 0..4 {
            assert!(e.first[p] <= e.total[p] + 0.05, "{e:?}");
        }
    }
}

#[test]
fn meta_values_in_range() {
    for setting in Setting::ALL {
        let meta = run_meta(setting, &FunctionSpec::Liu, 16, 1, 2, 0).unwrap();
        assert_eq!(meta.row_count(), 32);
        for i in 0..2 {
            assert!(meta.distribution(i).iter().all(|v| (0.0..=1.0).contains(v)));
        }
        if setting.is_pawn() {
            assert!(meta.values.iter().flatten().all(|v| (0.0..=1.0).contains(v)));
        }
    }
}

#[test]
fn pawn_orders_ishigami_inputs() {
    let f = FunctionSpec::Ishigami;
    let (x, y) = inner_sample_for(&f, 4000, inner_offset(1, 0, 4000)).unwrap();
    let idx = pawn_indices(x.view(), &y, &PawnConfig::new(10, Summary::Median, 1).unwrap()).unwrap();
    let v = idx.values;
    assert!(v[0] > v[2] && v[2] > v[1], "{v:?}");
}

#[test]
fn pawn_dummy_is_small() {
    let f = FunctionSpec::Ishigami;
    let unit = sobol_sequence(4, 2000, 1).unwrap();
    let mut specs = f.input_distributions();
    specs.push(pawn_meta::sampling::Distribution::ContinuousUniform { lo: 0.0, hi: 1.0 });
    let x = transform(&unit, &specs).unwrap();
    let y = eval_batch(&f, x.clone()).unwrap().outputs;
    let v = pawn_indices(x.view(), &y, &PawnConfig::new(10, Summary::Mean, 4).unwrap())
        .unwrap()
        .values;
    assert!(v[3] > 0.0 && v[3] < 0.2 && v[3] < v[0], "{v:?}");
}

#[test]
fn pawn_separates_liu_inputs() {
    let f = FunctionSpec::Liu;
    let p = DesignPoint {
        sample_size: 2000,
        intervals: Some(10),
        eps: Some(1),
        theta: 2,
    };
    let wins = (0..100u64)
        .filter(|&seed| {
            let v = run_inner_pawn(&DesignPoint { eps: Some(seed + 1), ..p }, &f, seed, 0).unwrap();
            v[0] > v[1]
        })
        .count();
    assert!(wins > 50, "{wins}");
}

#[test]
fn liu_total_order_spread() {
    let f = FunctionSpec::Liu;
    let p = DesignPoint {
        sample_size: 2000,
        intervals: None,
        eps: None,
        theta: 1,
    };
    let inside = (0..100u64)
        .filter(|&seed| {
            let v = run_inner_total_order(&p, &f, seed, 0).unwrap();
            v.iter().all(|x| (0.35..=0.75).contains(x))
        })
        .count();
    assert!(inside >= 95, "{inside}");
}

#[test]
fn constant_model_gives_zero_pawn() {
    let m = Unit(3, |_: &[f64]| 2.5);
    let p = DesignPoint {
        sample_size: 500,
        intervals: Some(10),
        eps: Some(3),
        theta: 3,
    };
    assert_eq!(run_inner_pawn(&p, &m, 1, 0).unwrap(), vec![0.0; 3]);
}

#[test]
fn sobol_g_median_ordering() {
    let meta = run_meta(Setting::MaxInTheta, &FunctionSpec::SobolG, 1024, 5, 4, 0).unwrap();
    let medians: Vec<f64> = (0..8)
        .map(|i| {
            let mut v = meta.distribution(i);
            v.sort_by(f64::total_cmp);
            v[v.len() / 2]
        })
        .collect();
    assert!(medians[1..].iter().all(|&m| m < medians[0]));
    let top_of_tail = medians[4..].iter().cloned().fold(f64::MIN, f64::max);
    assert!(medians[..3].iter().all(|&m| m > top_of_tail), "{medians:?}");
}

#[test]
fn first_order_needs_mirror() {
    let f = FunctionSpec::Ishigami;
    let design = build_estimator_design(64, 3, 1, 1).unwrap().transformed(&f.input_distributions()).unwrap();
    let ev = EvaluatedDesign::evaluate(&f, &design, false).unwrap();
    assert!(first_order(&ev, 0).is_err());
    assert!(total_order(&ev, 0, TotalEstimator::Jansen).is_ok());
}

#[test]
fn transformed_design_columns() {
    let unit = sobol_sequence(2, 16, 1).unwrap();
    let x: Array2<f64> = transform(&unit, &FunctionSpec::Liu.input_distributions()).unwrap();
    assert!(x.slice(s![.., 0]).iter().all(|v| *v > 0.0));
}
