use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

use stanley_core::extrema::{find_extrema, find_peaks, local_maxima, prominence, PeakConfig};
use stanley_core::oracle;
use stanley_core::regression::{self, regressors, FitInput, Subset};
use stanley_core::sequence::{
    generate, generate_many, is_admissible_terms, GenerateOptions, SeedSet, StanleySequence,
    Strategy,
};
use stanley_core::series::{self, IndexedSeries, SmoothingConfig};
use stanley_core::{store, ExecMode};

fn quiet(strategy: Strategy) -> GenerateOptions {
    GenerateOptions::with_strategy(strategy).quiet()
}

/// Independent greedy construction: every candidate is checked against all
/// pairs of earlier terms.
fn pairwise_greedy(seed: &[u64], len: usize) -> Vec<u64> {
    let mut terms = seed.to_vec();
    while terms.len() < len {
        let mut c = terms.last().unwrap() + 1;
        while terms
            .iter()
            .enumerate()
            .any(|(j, &b)| terms[..j].iter().any(|&a| a + c == 2 * b))
        {
            c += 1;
        }
        terms.push(c);
    }
    terms
}

#[test]
fn corpus_is_ap_free_and_greedy() {
    let seeds: Vec<SeedSet> = (1..=20).map(|n| SeedSet::pair(n).unwrap()).collect();
    for seq in generate_many(
        ExecMode::Parallel,
        &seeds,
        2000,
        quiet(Strategy::BitsetScan),
    ) {
        let seq = seq.unwrap();
        assert!(
            oracle::verify_ap_free(seq.terms()).unwrap(),
            "{}",
            seq.seed()
        );
        assert!(
            oracle::verify_greedy_minimal(seq.terms(), 2).unwrap(),
            "{}",
            seq.seed()
        );
    }
}

#[test]
fn batch_modes_agree() {
    let seeds: Vec<SeedSet> = (1..=8).map(|n| SeedSet::pair(n).unwrap()).collect();
    let a = generate_many(ExecMode::Sequential, &seeds, 500, quiet(Strategy::HashScan));
    let b = generate_many(ExecMode::Parallel, &seeds, 500, quiet(Strategy::BitsetScan));
    for (x, y) in a.into_iter().zip(b) {
        assert_eq!(x.unwrap().terms(), y.unwrap().terms());
    }
}

#[test]
fn persisted_files_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let seed = SeedSet::pair(4).unwrap();
    let mut bytes = Vec::new();
    for (i, strategy) in Strategy::ALL.into_iter().enumerate() {
        let seq = generate(&seed, 3000, quiet(strategy)).unwrap();
        let seq = StanleySequence::from_terms_unchecked(seq.into_terms()).unwrap();
        let path = dir.path().join(format!("{i}.csv"));
        store::save_sequence(&seq, &path, Some(i as f64)).unwrap();
        bytes.push(std::fs::read(&path).unwrap());
    }
    assert_eq!(bytes[0], bytes[1]);
}

#[test]
fn load_verifies_configurable_prefix() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.csv");
    // AP at positions 40..: invisible to a 30-term prefix check
    let mut terms = generate(&SeedSet::pair(4).unwrap(), 40, quiet(Strategy::BitsetScan))
        .unwrap()
        .into_terms();
    let last = *terms.last().unwrap();
    terms.push(2 * last - terms[38]);
    let body: String = terms
        .iter()
        .enumerate()
        .map(|(i, t)| format!("{},{t}\n", i + 1))
        .collect();
    std::fs::write(&path, format!("k,a_k\n{body}")).unwrap();
    let loose = store::LoadOptions {
        verify_prefix: 30,
        ..Default::default()
    };
    assert!(store::load_sequence(&path, loose).is_ok());
    assert!(store::load_sequence(&path, store::LoadOptions::default()).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn strategies_match_pairwise_reference(n in 1u64..40, len in 2usize..120) {
        let expected = pairwise_greedy(&[0, n], len);
        let seed = SeedSet::pair(n).unwrap();
        for s in Strategy::ALL {
            let got = generate(&seed, len, quiet(s)).unwrap();
            prop_assert_eq!(got.terms(), &expected[..]);
        }
    }

    #[test]
    fn general_seeds(a in 0u64..10, d1 in 1u64..10, d2 in 1u64..10, len in 3usize..80) {
        let elements = vec![a, a + d1, a + d1 + d2];
        prop_assume!(d1 != d2);
        let seed = SeedSet::new(elements.clone()).unwrap();
        let expected = pairwise_greedy(&elements, len.max(3));
        let got = generate(&seed, len.max(3), quiet(Strategy::BitsetScan)).unwrap();
        prop_assert_eq!(got.terms(), &expected[..]);
        prop_assert!(oracle::verify_ap_free(got.terms()).unwrap());
    }

    #[test]
    fn monotone_extension(n in 1u64..30, l1 in 2usize..300, extra in 0usize..300) {
        let seed = SeedSet::pair(n).unwrap();
        let short = generate(&seed, l1, quiet(Strategy::BitsetScan)).unwrap();
        let long = generate(&seed, l1 + extra, quiet(Strategy::HashScan)).unwrap();
        prop_assert!(long.terms().starts_with(short.terms()));
    }

    #[test]
    fn admissibility_matches_pairwise(terms in proptest::collection::btree_set(0u64..200, 2..25),
                                      bump in 1u64..60) {
        let terms: Vec<u64> = terms.into_iter().collect();
        let c = terms.last().unwrap() + bump;
        let brute = !terms.iter().enumerate()
            .any(|(j, &b)| terms[..j].iter().any(|&a| a + c == 2 * b));
        prop_assert_eq!(is_admissible_terms(c, &terms).unwrap(), brute);
    }

    #[test]
    fn windowed_scale_invariance(c in 1u64..1000, w in 1usize..15) {
        let seq = generate(&SeedSet::pair(4).unwrap(), 400, quiet(Strategy::BitsetScan)).unwrap();
        let base = StanleySequence::from_terms_unchecked(seq.terms()[1..].to_vec()).unwrap();
        let scaled = StanleySequence::from_terms_unchecked(
            base.terms().iter().map(|t| t * c).collect()).unwrap();
        let (x, y) = (series::windowed_exponent(&base, w).unwrap(),
                      series::windowed_exponent(&scaled, w).unwrap());
        for (a, b) in x.values().iter().zip(y.values()) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn power_law_oracle(p in 1u32..=3, w in 1usize..30) {
        let seq = StanleySequence::from_terms_unchecked((1..=200u64).map(|k| k.pow(p)).collect())
            .unwrap();
        let alpha = series::windowed_exponent(&seq, w).unwrap();
        prop_assert!(alpha.values().iter().all(|v| (v - p as f64).abs() <= 1e-12));
    }

    #[test]
    fn moving_average_linear(xs in proptest::collection::vec(-5.0f64..5.0, 1..80),
                             ys in proptest::collection::vec(-5.0f64..5.0, 80),
                             alpha in -3.0f64..3.0, beta in -3.0f64..3.0,
                             half in 0usize..12) {
        let n = xs.len();
        let cfg = SmoothingConfig::new(2 * half + 1).unwrap();
        let sx = IndexedSeries::contiguous("x", 2, xs.clone()).unwrap();
        let sy = IndexedSeries::contiguous("y", 2, ys[..n].to_vec()).unwrap();
        let combo: Vec<f64> = xs.iter().zip(&ys).map(|(x, y)| alpha * x + beta * y).collect();
        let sc = IndexedSeries::contiguous("c", 2, combo).unwrap();
        let (mx, my, mc) = (series::moving_average(&sx, &cfg).unwrap(),
                            series::moving_average(&sy, &cfg).unwrap(),
                            series::moving_average(&sc, &cfg).unwrap());
        for i in 0..n {
            let want = alpha * mx.values()[i] + beta * my.values()[i];
            prop_assert!((mc.values()[i] - want).abs() <= 1e-12);
        }
        let id = series::moving_average(&sx, &SmoothingConfig::new(1).unwrap()).unwrap();
        prop_assert_eq!(id.values(), sx.values());
    }

    #[test]
    fn moving_average_matches_zero_padded_convolution(
        xs in proptest::collection::vec(-5.0f64..5.0, 1..60), half in 0usize..8) {
        let l = 2 * half + 1;
        let s = IndexedSeries::contiguous("x", 2, xs.clone()).unwrap();
        let got = series::moving_average(&s, &SmoothingConfig::new(l).unwrap()).unwrap();
        // full convolution then take the centred slice
        let full: Vec<f64> = (0..xs.len() + l - 1)
            .map(|i| (0..l).filter_map(|j| i.checked_sub(j).and_then(|t| xs.get(t)))
                 .map(|v| v / l as f64).sum())
            .collect();
        for (i, g) in got.values().iter().enumerate() {
            prop_assert!((g - full[i + half]).abs() <= 1e-12);
        }
    }

    #[test]
    fn extrema_duality_and_invariants(values in proptest::collection::vec(-1.0f64..1.0, 3..150),
                                      dist in 1usize..12, prom in 0.01f64..0.8) {
        let s = IndexedSeries::contiguous("s", 2, values.clone()).unwrap();
        let cfg = PeakConfig::new(dist, prom).unwrap();
        let direct = find_extrema(&s, &cfg, &cfg);
        let flipped = find_extrema(&s.negated(), &cfg, &cfg);
        prop_assert_eq!(direct.peaks(), flipped.troughs());
        prop_assert_eq!(direct.troughs(), flipped.peaks());

        let peaks = find_peaks(&s, &cfg);
        let maxima = local_maxima(&values);
        for p in &peaks {
            prop_assert!(maxima.contains(&p.position));
            prop_assert!(p.prominence >= prom);
            prop_assert_eq!(prominence(&s, p.position).unwrap(), p.prominence);
        }
        for w in peaks.windows(2) {
            prop_assert!(w[1].k - w[0].k >= dist as u64);
        }
        prop_assert_eq!(find_extrema(&s, &cfg, &cfg), direct);
    }
}

/// Least squares through nalgebra's SVD, independent of the QR solver.
fn svd_fit(points: &[(u64, f64)], fixed_a: Option<f64>) -> Vec<f64> {
    let cols = if fixed_a.is_some() { 2 } else { 3 };
    let skip = 3 - cols;
    let x = DMatrix::from_fn(points.len(), cols, |r, c| regressors(points[r].0)[c + skip]);
    let y = DVector::from_iterator(
        points.len(),
        points.iter().map(|&(_, r)| r - fixed_a.unwrap_or(0.0)),
    );
    let sol = x.svd(true, true).solve(&y, 1e-300).unwrap();
    sol.iter().copied().collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn qr_agrees_with_svd(noise in proptest::collection::vec(-0.01f64..0.01, 9),
                          a in 1.5f64..2.5, b in -2.0f64..0.0, c in -1.5f64..1.0) {
        let ks = [293u64, 480, 750, 1285, 2100, 3486, 5538, 9131, 14957];
        let pts: Vec<(u64, f64)> = ks.iter().zip(&noise).map(|(&k, e)| {
            let [_, x1, x2] = regressors(k);
            (k, a + b * x1 + c * x2 + e)
        }).collect();
        let input = FitInput::new("p", pts.clone()).unwrap();
        let free = regression::fit_growth_model(&input, None).unwrap();
        let svd = svd_fit(&pts, None);
        for (got, want) in [free.a, free.b, free.c].iter().zip(&svd) {
            prop_assert!((got - want).abs() <= 1e-8 * want.abs().max(1.0),
                         "qr {} svd {}", got, want);
        }
        let fixed = regression::fit_growth_model(&input, Some(2.0)).unwrap();
        let svd = svd_fit(&pts, Some(2.0));
        prop_assert!((fixed.b - svd[0]).abs() <= 1e-9 * svd[0].abs().max(1.0));
        prop_assert!((fixed.c - svd[1]).abs() <= 1e-9 * svd[1].abs().max(1.0));

        // fixed-A at the free optimum reproduces the free fit
        let pinned = regression::fit_growth_model(&input, Some(free.a)).unwrap();
        prop_assert!((pinned.b - free.b).abs() <= 1e-9);
        prop_assert!((pinned.c - free.c).abs() <= 1e-9);
        // constraining can only lose fit quality
        prop_assert!(fixed.r_squared <= free.r_squared + 1e-12);
    }

    #[test]
    fn affine_response(shift in -1.0f64..1.0,
                       noise in proptest::collection::vec(-0.01f64..0.01, 8)) {
        let ks = [365u64, 618, 1001, 1765, 3107, 4854, 8410, 14179];
        let pts: Vec<(u64, f64)> = ks.iter().zip(&noise).map(|(&k, e)| {
            let [_, x1, x2] = regressors(k);
            (k, 1.83 - 0.44 * x1 - 0.71 * x2 + e)
        }).collect();
        let shifted: Vec<(u64, f64)> = pts.iter().map(|&(k, r)| (k, r + shift)).collect();
        let f0 = regression::fit_growth_model(&FitInput::new("t", pts).unwrap(), None).unwrap();
        let f1 = regression::fit_growth_model(&FitInput::new("t", shifted).unwrap(), None).unwrap();
        prop_assert!((f1.a - f0.a - shift).abs() <= 1e-9);
        prop_assert!((f1.b - f0.b).abs() <= 1e-9);
        prop_assert!((f1.c - f0.c).abs() <= 1e-9);
    }
}

#[test]
fn exact_model_is_subset_invariant() {
    let ks = [300u64, 700, 1500, 3000, 7000, 15000];
    let pts = ks
        .iter()
        .map(|&k| {
            let [_, x1, x2] = regressors(k);
            (k, 1.95 - 0.66 * x1 - 0.9 * x2)
        })
        .collect();
    let fits = regression::robustness_sweep(&FitInput::new("x", pts).unwrap(), None).unwrap();
    assert_eq!(
        fits.iter().map(|f| f.subset).collect::<Vec<_>>(),
        [Subset::Full, Subset::DropLast, Subset::DropFirst]
    );
    for f in &fits[1..] {
        assert!((f.a - fits[0].a).abs() < 1e-9);
        assert!((f.b - fits[0].b).abs() < 1e-9);
        assert!((f.c - fits[0].c).abs() < 1e-9);
    }
}

#[test]
fn near_collinear_design_is_rejected() {
    // k values so close that the three columns are numerically dependent
    let pts = vec![
        (1_000_000_000, 1.9),
        (1_000_000_001, 1.9),
        (1_000_000_002, 1.9),
    ];
    let err = regression::fit_growth_model(&FitInput::new("x", pts).unwrap(), None).unwrap_err();
    assert!(err.to_string().contains("fix A"), "{err}");
}
