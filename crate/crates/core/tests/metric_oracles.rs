//! Saliency metrics against brute-force recounts.

use gfconv::field::{ScalarField, ValidMask};
use gfconv::metrics::{
    auc, cross_entropy, evaluate_all, f_measure, mae, max_precision, mean_pr, pr_curve, rmse,
    GroundTruth, DEFAULT_BETA_SQUARED, DEFAULT_LEVELS, FAST_LEVELS,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TOL: f64 = 1e-12;

struct Case {
    s: ScalarField,
    g: GroundTruth,
    mask: ValidMask,
}

fn random_case(seed: u64, h: usize, w: usize, masked: bool) -> Case {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let s = ScalarField::from_fn(h, w, |_, _| rng.random_range(0.0..=1.0));
        let flags: Vec<bool> = (0..h * w).map(|_| rng.random_bool(0.4)).collect();
        let valid: Vec<bool> = (0..h * w).map(|_| !masked || rng.random_bool(0.8)).collect();
        let pos = flags.iter().zip(&valid).filter(|(f, v)| **f && **v).count();
        let neg = flags.iter().zip(&valid).filter(|(f, v)| !**f && **v).count();
        if pos > 0 && neg > 0 {
            return Case {
                s,
                g: GroundTruth::from_flags(h, w, flags).unwrap(),
                mask: ValidMask::from_flags(h, w, valid).unwrap(),
            };
        }
    }
}

/// (threshold, P, R, !R) by scanning every pixel for every threshold.
fn brute_curve(c: &Case, levels: usize) -> Vec<(f64, f64, f64, f64)> {
    let mut out = Vec::new();
    for k in 0..levels {
        let t = k as f64 / (levels - 1) as f64;
        let (mut m, mut mg, mut g, mut mng, mut ng) = (0usize, 0usize, 0usize, 0usize, 0usize);
        for i in 0..c.s.len() {
            if !c.mask.flags()[i] {
                continue;
            }
            let sel = c.s.values()[i] >= t;
            let pos = c.g.flags()[i];
            m += sel as usize;
            mg += (sel && pos) as usize;
            g += pos as usize;
            mng += (sel && !pos) as usize;
            ng += (!pos) as usize;
        }
        let p = if m == 0 { 1.0 } else { mg as f64 / m as f64 };
        out.push((t, p, mg as f64 / g as f64, mng as f64 / ng as f64));
    }
    out
}

/// Trapezoid over (x, y) pairs, deduplicating x by largest y.
fn brute_area(pairs: &[(f64, f64)]) -> f64 {
    let mut xs: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    let ys: Vec<f64> = xs
        .iter()
        .map(|&x| {
            pairs
                .iter()
                .filter(|p| p.0 == x)
                .map(|p| p.1)
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect();
    if xs.len() == 1 {
        return ys[0];
    }
    let mut area = 0.0;
    for i in 1..xs.len() {
        area += 0.5 * (xs[i] - xs[i - 1]) * (ys[i] + ys[i - 1]);
    }
    area
}

fn brute_pixel_sums(c: &Case) -> (f64, f64, f64) {
    let (mut abs, mut sq, mut ce, mut n) = (0.0, 0.0, 0.0, 0.0);
    for i in 0..c.s.len() {
        if !c.mask.flags()[i] {
            continue;
        }
        let s = c.s.values()[i];
        let g = if c.g.flags()[i] { 1.0 } else { 0.0 };
        let sc = s.clamp(1e-7, 1.0 - 1e-7);
        abs += (s - g).abs();
        sq += (s - g) * (s - g);
        ce += g * sc.ln() + (1.0 - g) * (1.0 - sc).ln();
        n += 1.0;
    }
    (abs / n, (sq / n).sqrt(), -ce / n)
}

#[test]
fn curve_matches_recount() {
    for seed in 0..20 {
        let c = random_case(seed, 8, 8, seed % 2 == 1);
        for levels in [FAST_LEVELS, DEFAULT_LEVELS] {
            let curve = pr_curve(&c.s, &c.g, &c.mask, levels).unwrap();
            let brute = brute_curve(&c, levels);
            assert_eq!(curve.level_count(), levels);
            for (p, b) in curve.points().iter().zip(&brute) {
                assert_eq!(p.threshold, b.0);
                assert_eq!((p.precision, p.recall, p.false_positive_rate), (b.1, b.2, b.3));
            }
        }
    }
}

#[test]
fn scalars_match_oracles() {
    for seed in 100..130 {
        let c = random_case(seed, 8, 8, true);
        let curve = pr_curve(&c.s, &c.g, &c.mask, DEFAULT_LEVELS).unwrap();
        let brute = brute_curve(&c, DEFAULT_LEVELS);
        let b2 = DEFAULT_BETA_SQUARED;
        let fm = brute
            .iter()
            .filter(|p| b2 * p.1 + p.2 > 0.0)
            .map(|p| (1.0 + b2) * p.1 * p.2 / (b2 * p.1 + p.2))
            .fold(0.0, f64::max);
        let pmax = brute.iter().map(|p| p.1).fold(0.0, f64::max);
        let pr: Vec<(f64, f64)> = brute.iter().map(|p| (p.2, p.1)).collect();
        let roc: Vec<(f64, f64)> = brute.iter().map(|p| (p.3, p.2)).collect();
        let (m, r, ce) = brute_pixel_sums(&c);

        assert!((f_measure(&curve, b2).unwrap() - fm).abs() <= TOL);
        assert!((max_precision(&curve).unwrap() - pmax).abs() <= TOL);
        assert!((mean_pr(&curve).unwrap() - brute_area(&pr)).abs() <= TOL);
        assert!((auc(&curve).unwrap() - brute_area(&roc)).abs() <= TOL);
        assert!((mae(&c.s, &c.g, &c.mask).unwrap() - m).abs() <= TOL);
        assert!((rmse(&c.s, &c.g, &c.mask).unwrap() - r).abs() <= TOL);
        assert!((cross_entropy(&c.s, &c.g, &c.mask).unwrap() - ce).abs() <= TOL);
    }
}

#[test]
fn report_equals_individual_ops() {
    let c = random_case(7, 8, 8, true);
    let rep = evaluate_all(&c.s, &c.g, &c.mask, DEFAULT_LEVELS, 0.09).unwrap();
    let curve = pr_curve(&c.s, &c.g, &c.mask, DEFAULT_LEVELS).unwrap();
    assert_eq!(rep.f_measure, f_measure(&curve, 0.09).unwrap());
    assert_eq!(rep.max_precision, max_precision(&curve).unwrap());
    assert_eq!(rep.mean_pr, mean_pr(&curve).unwrap());
    assert_eq!(rep.auc, auc(&curve).unwrap());
    assert_eq!(rep.mae, mae(&c.s, &c.g, &c.mask).unwrap());
    assert_eq!(rep.rmse, rmse(&c.s, &c.g, &c.mask).unwrap());
    assert_eq!(rep.cross_entropy, cross_entropy(&c.s, &c.g, &c.mask).unwrap());
    assert_eq!(rep.beta_squared, 0.09);
}

#[test]
fn recall_and_fpr_do_not_increase_with_threshold() {
    for seed in 0..10 {
        let c = random_case(seed, 12, 9, false);
        let curve = pr_curve(&c.s, &c.g, &c.mask, DEFAULT_LEVELS).unwrap();
        for w in curve.points().windows(2) {
            assert!(w[1].recall <= w[0].recall);
            assert!(w[1].false_positive_rate <= w[0].false_positive_rate);
        }
    }
}

#[test]
fn quantizing_to_the_grid_keeps_the_curve() {
    let c = random_case(3, 10, 10, false);
    let top = (DEFAULT_LEVELS - 1) as f64;
    // Snap each value down to the highest grid threshold it reaches.
    let snapped = c.s.map(|v| {
        let mut k = (v * top).floor();
        if (k + 1.0) / top <= v {
            k += 1.0;
        }
        k / top
    });
    let a = pr_curve(&c.s, &c.g, &c.mask, DEFAULT_LEVELS).unwrap();
    let b = pr_curve(&snapped, &c.g, &c.mask, DEFAULT_LEVELS).unwrap();
    assert_eq!(a, b);
}

fn smooth_map(seed: u64, h: usize, w: usize) -> ScalarField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (fr, fc, pr, pc): (f64, f64, f64, f64) = (
        rng.random_range(0.05..0.3),
        rng.random_range(0.05..0.3),
        rng.random_range(0.0..std::f64::consts::TAU),
        rng.random_range(0.0..std::f64::consts::TAU),
    );
    ScalarField::from_fn(h, w, |r, c| {
        0.5 + 0.25 * (fr * r as f64 + pr).sin() + 0.25 * (fc * c as f64 + pc).cos()
    })
}

#[test]
fn fast_levels_track_full_levels() {
    for seed in 0..10 {
        let s = smooth_map(seed, 32, 32);
        let g = GroundTruth::binarize(&smooth_map(seed + 50, 32, 32), 0.5);
        let m = ValidMask::all(32, 32);
        let full = f_measure(&pr_curve(&s, &g, &m, DEFAULT_LEVELS).unwrap(), 0.3).unwrap();
        let fast = f_measure(&pr_curve(&s, &g, &m, FAST_LEVELS).unwrap(), 0.3).unwrap();
        assert!((fast - full).abs() <= 0.02, "seed {seed}: {fast} vs {full}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn permutation_invariance(seed in 0u64..10_000, rot in 1usize..63) {
        let c = random_case(seed, 8, 8, true);
        let perm = |v: &[f64]| -> Vec<f64> { (0..64).map(|i| v[(i + rot) % 64]).collect() };
        let permb = |v: &[bool]| -> Vec<bool> { (0..64).map(|i| v[(i + rot) % 64]).collect() };
        let s2 = ScalarField::new(8, 8, perm(c.s.values())).unwrap();
        let g2 = GroundTruth::from_flags(8, 8, permb(c.g.flags())).unwrap();
        let m2 = ValidMask::from_flags(8, 8, permb(c.mask.flags())).unwrap();
        let a = evaluate_all(&c.s, &c.g, &c.mask, 256, 0.3).unwrap();
        let b = evaluate_all(&s2, &g2, &m2, 256, 0.3).unwrap();
        prop_assert_eq!(a.f_measure, b.f_measure);
        prop_assert_eq!(a.max_precision, b.max_precision);
        prop_assert_eq!(a.mean_pr, b.mean_pr);
        prop_assert_eq!(a.auc, b.auc);
        prop_assert!((a.mae - b.mae).abs() <= TOL);
        prop_assert!((a.rmse - b.rmse).abs() <= TOL);
        prop_assert!((a.cross_entropy - b.cross_entropy).abs() <= TOL);
    }

    #[test]
    fn masked_out_pixels_are_ignored(seed in 0u64..10_000, junk in 0.0f64..=1.0) {
        let c = random_case(seed, 8, 8, true);
        let s2 = ScalarField::new(8, 8, c.s.values().iter().zip(c.mask.flags())
            .map(|(&v, &ok)| if ok { v } else { junk }).collect()).unwrap();
        let g2 = GroundTruth::from_flags(8, 8, c.g.flags().iter().zip(c.mask.flags())
            .map(|(&p, &ok)| if ok { p } else { !p }).collect()).unwrap();
        let a = evaluate_all(&c.s, &c.g, &c.mask, 256, 0.3).unwrap();
        let b = evaluate_all(&s2, &g2, &c.mask, 256, 0.3).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn mae_never_exceeds_rmse(seed in 0u64..10_000) {
        let c = random_case(seed, 8, 8, true);
        let r = evaluate_all(&c.s, &c.g, &c.mask, 51, 0.3).unwrap();
        prop_assert!(r.mae <= r.rmse + 1e-15);
        for v in [r.f_measure, r.max_precision, r.mean_pr, r.auc, r.mae, r.rmse] {
            prop_assert!((0.0..=1.0).contains(&v));
        }
        prop_assert!(r.cross_entropy >= 0.0);
    }
}
