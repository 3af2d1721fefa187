//! Seeded Monte Carlo checks against known population quantities.

use std::collections::BTreeSet;
use std::f64::consts::PI;

use ecr_screen::bootstrap::rank_covariates;
use ecr_screen::harness::variance_filter;
use ecr_screen::rank_corr::{kendall_tau_with, pearson, KendallAlgorithm};
use ecr_screen::rng::{seeded, substream};
use ecr_screen::simgen::additive_signal;
use ecr_screen::*;
use nalgebra::{DMatrix, DVector};
use ndarray::{Array1, Array2, Axis};
use rand::Rng;
use rand_distr::StandardNormal;

fn normal_sample(p: usize, rho: f64, n: usize, seed: u64) -> Array2<f64> {
    let spec = EllipticalSpec::normal(equicorrelation_matrix::<f64>(p, rho).unwrap());
    sample_elliptical(&spec, n, &mut seeded(seed)).unwrap()
}

#[test]
fn normal_identity_moments() {
    let x = normal_sample(2, 0.0, 100_000, 1);
    for m in x.mean_axis(Axis(0)).unwrap() {
        assert!(m.abs() < 0.02, "mean {m}");
    }
    let r = pearson(x.column(0), x.column(1)).unwrap();
    assert!(r.abs() < 0.02, "r = {r}");
}

#[test]
fn normal_equicorrelated_pearson() {
    let x = normal_sample(2, 0.5, 100_000, 2);
    let r = pearson(x.column(0), x.column(1)).unwrap();
    assert!((r - 0.5).abs() < 0.02, "r = {r}");
}

#[test]
fn cauchy_tau_is_stable_where_pearson_is_not() {
    let spec =
        EllipticalSpec::student_t(1.0, equicorrelation_matrix::<f64>(2, 0.0).unwrap()).unwrap();
    let mut taus = Vec::new();
    let mut rs = Vec::new();
    for seed in 0..5 {
        let x = sample_elliptical(&spec, 10_000, &mut seeded(100 + seed)).unwrap();
        let t = kendall_tau(&x.column(0).to_vec(), &x.column(1).to_vec()).unwrap();
        assert!(t.abs() < 0.03, "tau = {t}");
        taus.push(t);
        rs.push(pearson(x.column(0), x.column(1)).unwrap());
    }
    let spread = |v: &[f64]| {
        v.iter().cloned().fold(f64::MIN, f64::max) - v.iter().cloned().fold(f64::MAX, f64::min)
    };
    assert!(spread(&rs) > spread(&taus), "pearson {rs:?} tau {taus:?}");
}

#[test]
fn tau_arcsin_identity_at_large_n() {
    for (i, rho) in [0.0, 0.1, 0.5, 0.9].into_iter().enumerate() {
        let x = normal_sample(2, rho, 100_000, 10 + i as u64);
        let tau = kendall_tau_with(x.column(0), x.column(1), KendallAlgorithm::MergeSort).unwrap();
        let want = 2.0 / PI * rho.asin();
        assert!((tau - want).abs() < 0.01, "rho {rho}: tau {tau} vs {want}");
        let back = (PI / 2.0 * tau).sin();
        assert!((back - rho).abs() < 0.02, "rho {rho}: recovered {back}");
    }
}

#[test]
fn additive_design_correlation() {
    for (t, want, tol) in [(0.0, 0.0, 0.03), (1.0, 0.5, 0.02)] {
        let spec = SimModelSpec::additive(SimModel::M4, 4, 100_000, t);
        let s = simgen::generate_seeded::<f64>(&spec, 3).unwrap();
        for a in 0..4 {
            for b in a + 1..4 {
                let r = pearson(s.data.covariate(a), s.data.covariate(b)).unwrap();
                assert!((r - want).abs() < tol, "t = {t}: r({a},{b}) = {r}");
            }
        }
    }
}

#[test]
fn additive_noise_variance() {
    let spec = SimModelSpec::additive(SimModel::M4, 4, 100_000, 0.0);
    let s = simgen::generate_seeded::<f64>(&spec, 4).unwrap();
    let d = &s.data;
    let eps: Vec<f64> = (0..d.n())
        .map(|i| {
            let x = |j: usize| d.covariate(j)[i];
            d.response()[i] - additive_signal(x(0), x(1), x(2), x(3))
        })
        .collect();
    let mean = eps.iter().sum::<f64>() / eps.len() as f64;
    let var = eps.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (eps.len() - 1) as f64;
    assert!((var - 1.74).abs() < 0.05, "var = {var}");
}

#[test]
fn linear_model_least_squares_recovers_coefficients() {
    let spec = SimModelSpec::linear(
        SimModel::M1,
        5,
        100_000,
        0.0,
        Family::Normal,
        Family::Normal,
    );
    let s = simgen::generate_seeded::<f64>(&spec, 5).unwrap();
    let d = &s.data;
    let n = d.n();
    let design = DMatrix::from_fn(
        n,
        3,
        |i, j| if j == 0 { 1.0 } else { d.covariate(j - 1)[i] },
    );
    let y = DVector::from_iterator(n, d.response().iter().copied());
    let beta = (design.transpose() * &design)
        .cholesky()
        .unwrap()
        .solve(&(design.transpose() * y));
    for (got, want) in beta.iter().zip([0.9, 1.0, -0.5]) {
        assert!((got - want).abs() < 0.02, "{beta:?}");
    }
}

#[test]
fn single_index_log_response_gives_same_selection() {
    let spec = SimModelSpec::linear(SimModel::M3, 60, 50, 0.3, Family::Normal, Family::Normal);
    let cfg = ScreeningConfig::cch(2, 2).unwrap();
    for r in 0..10 {
        let s = simgen::generate_seeded::<f64>(&spec, 700 + r).unwrap();
        let logged = s.data.map_column(0, f64::ln).unwrap();
        let a = score_all(&s.data, &cfg).unwrap();
        let b = score_all(&logged, &cfg).unwrap();
        assert_eq!(top_m_select(&a, 12).members, top_m_select(&b, 12).members);
    }
}

fn argsort_desc(v: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[b].partial_cmp(&v[a]).unwrap().then(a.cmp(&b)));
    idx
}

#[test]
fn single_covariate_cch_orders_like_rrcs() {
    let cch = ScreeningConfig::cch(1, 1).unwrap();
    let rrcs = ScreeningConfig::rrcs();
    for r in 0..100 {
        let x = normal_sample(16, 0.2, 30, 900 + r);
        let mut rng = substream(901, r);
        let y: Array1<f64> = (0..30)
            .map(|i| x[[i, 3]] - 0.5 * x[[i, 7]] + rng.sample::<f64, _>(StandardNormal))
            .collect();
        let d = DataMatrix::from_parts(y, x).unwrap();
        let a = score_all(&d, &cch).unwrap();
        let b = score_all(&d, &rrcs).unwrap();
        let mapped: Vec<f64> = b
            .scores
            .iter()
            .map(|t| (PI / 2.0 * t).sin().abs())
            .collect();
        for (s, m) in a.scores.iter().zip(&mapped) {
            assert!((s - m).abs() < 1e-12);
        }
        assert_eq!(argsort_desc(&a.scores), argsort_desc(&b.scores));
    }
}

#[test]
fn easy_linear_signal_ranks_support_first() {
    let spec = SimModelSpec::linear(SimModel::M1, 20, 200, 0.0, Family::Normal, Family::Normal);
    let cfg = ScreeningConfig::cch(2, 2).unwrap();
    let gen = ModelGenerator::new(spec).unwrap();
    let mut hits = 0;
    for r in 0..100 {
        let s = gen.generate::<f64, _>(&mut substream(31, r)).unwrap();
        let sc = score_all(&s.data, &cfg).unwrap();
        let best_null = sc.scores[2..].iter().cloned().fold(f64::MIN, f64::max);
        hits += (sc.scores[0] > best_null && sc.scores[1] > best_null) as usize;
    }
    assert!(hits >= 95, "{hits}/100");
}

#[test]
fn iterative_screen_keeps_linear_support() {
    let spec = SimModelSpec::linear(SimModel::M2, 100, 50, 0.5, Family::Normal, Family::Normal);
    let cfg = ScreeningConfig::cch(2, 2).unwrap();
    let gen = ModelGenerator::new(spec).unwrap();
    let truth: BTreeSet<usize> = [0, 1, 2].into();
    let mut hits = 0;
    for r in 0..100 {
        let s = gen.generate::<f64, _>(&mut substream(32, r)).unwrap();
        let set = iterative_screen(&s.data, &cfg, 0.5, 10).unwrap();
        hits += containment(&set, &truth) as usize;
    }
    assert!(hits >= 90, "{hits}/100");
}

#[test]
fn perfect_dependence_survives_resampling() {
    for seed in 0..3 {
        let mut rng = seeded(40 + seed);
        let x = Array2::<f64>::from_shape_fn((40, 8), |_| rng.sample(StandardNormal));
        let d = DataMatrix::from_parts(x.column(0).to_owned(), x).unwrap();
        let boot = BootstrapConfig {
            replicates: 50,
            seed,
            ..Default::default()
        };
        let res =
            bootstrap_rank_intervals(&d, &ScreeningConfig::cch(2, 2).unwrap(), &boot).unwrap();
        assert_eq!(res.summaries[0].upper, 1);
        assert!(res.summaries[0].influential);
    }
}

#[test]
fn variance_filter_matches_sort_oracle() {
    let mut rng = seeded(50);
    for _ in 0..20 {
        let scales: Vec<f64> = (0..10).map(|_| rng.random_range(0.1..5.0)).collect();
        let x = Array2::<f64>::from_shape_fn((25, 10), |(_, j)| {
            scales[j] * rng.sample::<f64, _>(StandardNormal)
        });
        let d = DataMatrix::from_parts(Array1::zeros(25), x.clone()).unwrap();
        let keep = rng.random_range(1..=10);
        let var = |j: usize| {
            let c = x.column(j);
            let m = c.sum() / 25.0;
            c.iter().map(|v| (v - m).powi(2)).sum::<f64>() / 24.0
        };
        let mut order: Vec<usize> = (0..10).collect();
        order.sort_by(|&a, &b| var(b).partial_cmp(&var(a)).unwrap().then(a.cmp(&b)));
        let mut want: Vec<String> = order[..keep]
            .iter()
            .map(|j| format!("X{}", j + 1))
            .collect();
        want.sort_by_key(|l| l[1..].parse::<usize>().unwrap());
        assert_eq!(
            variance_filter(&d, keep).unwrap().covariate_labels(),
            want.as_slice()
        );
    }
}

#[test]
fn bootstrap_ranks_are_permutations() {
    let x = normal_sample(12, 0.1, 30, 60);
    let d = DataMatrix::from_parts(x.column(2).mapv(|v| v.exp()), x).unwrap();
    let res = bootstrap_rank_intervals(
        &d,
        &ScreeningConfig::rrcs(),
        &BootstrapConfig {
            replicates: 30,
            ..Default::default()
        },
    )
    .unwrap();
    for ranks in &res.replicate_ranks {
        let mut sorted = ranks.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, (1..=12).collect::<Vec<_>>());
    }
    let point = rank_covariates(&score_all(&d, &ScreeningConfig::rrcs()).unwrap());
    assert_eq!(point[2], 1);
}
