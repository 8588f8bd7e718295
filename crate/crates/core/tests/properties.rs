use std::sync::Arc;

use proptest::prelude::*;
use vhj_core::braid::{encode, lemma_families, BraidEngine, BraidWord, GeneratorOrder, Letter};
use vhj_core::rates::{fit_power_law, SingularTime};
use vhj_core::solver::{solve_classical, SolverConfig, Stepping};
use vhj_core::spectral::{eigenpoly, positive_zeros};
use vhj_core::zeros::{track_intersections, TerminalEvent, TrackConfig};
use vhj_core::{Grid, GridFunction, ModelParams, WeightedSpace};

fn letters() -> impl Strategy<Value = BraidWord> {
    prop::collection::vec(prop_oneof![Just(Letter::X), Just(Letter::Y)], 0..7).prop_map(|letters| BraidWord { letters })
}

/// Three piecewise-linear strands realizing `w`: one segment per letter, the
/// crossing at its midpoint, `per` samples per segment (odd, so no node sits on a crossing).
fn strands(w: &BraidWord, per: usize) -> [GridFunction; 3] {
    let n = w.len().max(1);
    let nodes: Vec<f64> = (0..=n * per).map(|i| i as f64 / per as f64).collect();
    let grid = Arc::new(Grid::from_nodes(nodes.clone()).unwrap());
    // level of each strand at each segment boundary
    let mut levels = vec![[0.0, 1.0, 2.0]];
    for l in &w.letters {
        let mut next = *levels.last().unwrap();
        let (a, b) = match l {
            Letter::X => (0.0, 1.0),
            Letter::Y => (1.0, 2.0),
        };
        for v in next.iter_mut() {
            if *v == a {
                *v = b;
            } else if *v == b {
                *v = a;
            }
        }
        levels.push(next);
    }
    while levels.len() < n + 1 {
        let last = *levels.last().unwrap();
        levels.push(last);
    }
    let curve = |s: usize| {
        let vals = nodes
            .iter()
            .map(|&x| {
                let k = (x.floor() as usize).min(n - 1);
                let f = x - k as f64;
                levels[k][s] * (1.0 - f) + levels[k + 1][s] * f
            })
            .collect();
        GridFunction::new(Arc::clone(&grid), vals, 0.0).unwrap()
    };
    [curve(0), curve(1), curve(2)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn steady_state_scaling(p in 2.2f64..6.0, lam in 0.01f64..100.0, x in 1e-3f64..10.0) {
        let m = ModelParams::new(p).unwrap();
        let lhs = m.u(lam * x);
        let rhs = lam.powf(1.0 - m.beta) * m.u(x);
        prop_assert!((lhs - rhs).abs() <= 1e-13 * rhs.abs());
    }

    #[test]
    fn fit_is_scale_and_shift_covariant(
        e in -2.5f64..2.5, l in 0.01f64..100.0, lam in 1e-3f64..1e3, shift in -5.0f64..5.0,
    ) {
        let t_sing = 0.3;
        let series: Vec<(f64, f64)> = (0..60)
            .map(|i| {
                let g = 1e-2 * 10f64.powf(-3.0 * i as f64 / 59.0);
                (t_sing - g, l * g.powf(e))
            })
            .collect();
        let base = fit_power_law(&series, SingularTime::Known(t_sing)).unwrap();
        let scaled: Vec<(f64, f64)> = series.iter().map(|&(t, v)| (t, lam * v)).collect();
        let f = fit_power_law(&scaled, SingularTime::Known(t_sing)).unwrap();
        prop_assert!((f.coefficient / (lam * base.coefficient) - 1.0).abs() < 1e-9);
        prop_assert!((f.exponent - base.exponent).abs() < 1e-9);
        let moved: Vec<(f64, f64)> = series.iter().map(|&(t, v)| (t + shift, v)).collect();
        let g = fit_power_law(&moved, SingularTime::Known(t_sing + shift)).unwrap();
        prop_assert!((g.coefficient / base.coefficient - 1.0).abs() < 1e-6);
        prop_assert!((g.exponent - base.exponent).abs() < 1e-6);
    }

    #[test]
    fn equivalence_is_a_congruence(a in letters(), c in letters(), d in letters()) {
        let mut e = BraidEngine::new(20).unwrap();
        let class = e.artin_class(&a).unwrap();
        for b in class.members().iter().take(8) {
            prop_assert!(e.equiv(&a, b).unwrap());
            prop_assert!(e.equiv(b, &a).unwrap());
            prop_assert!(e.equiv(&c.concat(&a).concat(&d), &c.concat(b).concat(&d)).unwrap());
        }
    }

    #[test]
    fn reduction_is_monotone_and_transitive(a in letters(), c in letters()) {
        let mut e = BraidEngine::new(12).unwrap();
        let a = a.concat(&c);
        // every reduct lies in a shorter class of the same parity
        let cert_self = e.reduce_reachable(&a, &a).unwrap();
        prop_assert!(cert_self.reachable);
        let words: Vec<BraidWord> = (0..=a.len()).flat_map(|n| vhj_core::braid::all_words(n).into_iter().filter(move |w| w.len() == n)).collect();
        let reducts: Vec<BraidWord> = words
            .iter()
            .filter(|b| e.reduce_reachable(&a, b).map(|c| c.reachable).unwrap_or(false))
            .cloned()
            .collect();
        for b in &reducts {
            prop_assert!(a.len() >= b.len() && (a.len() - b.len()) % 2 == 0);
            let cert = e.reduce_reachable(&a, b).unwrap();
            prop_assert!(e.replay(&cert).unwrap());
        }
        // A ⇒ B and B ⇒ C imply A ⇒ C on a few triples
        for b in reducts.iter().take(4) {
            for cc in reducts.iter().filter(|w| w.len() < b.len()).take(4) {
                if e.reduce_reachable(b, cc).unwrap().reachable {
                    prop_assert!(e.reduce_reachable(&a, cc).unwrap().reachable);
                }
            }
        }
    }

    #[test]
    fn encode_recovers_word_and_ignores_refinement(w in letters(), per in 1usize..4) {
        let per = 2 * per + 1;
        let coarse = strands(&w, per);
        let fine = strands(&w, 3 * per);
        let a = encode([&coarse[0], &coarse[1], &coarse[2]], GeneratorOrder::BottomIsX, 1e-12, 1e-9).unwrap();
        let b = encode([&fine[0], &fine[1], &fine[2]], GeneratorOrder::BottomIsX, 1e-12, 1e-9).unwrap();
        prop_assert_eq!(&a.word, &w);
        prop_assert_eq!(&b.word, &w);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn discrete_comparison(amp in 0.05f64..0.8, bump in 0.0f64..0.3, k in 1usize..4) {
        let m = ModelParams::new(3.0).unwrap();
        let grid = Arc::new(Grid::uniform(1.0, 200).unwrap());
        let pi = std::f64::consts::PI;
        let lo = GridFunction::from_fn(Arc::clone(&grid), 0.0, |x| amp * (pi * x).sin().powi(2)).unwrap();
        let hi = GridFunction::from_fn(Arc::clone(&grid), 0.0, |x| {
            amp * (pi * x).sin().powi(2) + bump * (k as f64 * pi * x).sin().powi(2)
        })
        .unwrap();
        let mut cfg = SolverConfig::new(m, Stepping::Fixed { dt: 1e-4 }, 0.02);
        cfg.snapshots.every = Some(20);
        let a = solve_classical(&lo, &cfg).unwrap();
        let b = solve_classical(&hi, &cfg).unwrap();
        let sup0 = hi.sup_norm();
        for (s, t) in a.snapshots.iter().zip(&b.snapshots) {
            prop_assert!(s.values.iter().zip(&t.values).all(|(u, v)| u <= v));
            prop_assert!(t.sup_norm() <= sup0 * (1.0 + 1e-12));
        }
    }
}

#[test]
fn tilde_a2_from_coil_picture() {
    // a big coil v passing over the tight pair {U, ũ}, then ũ coiling twice around U
    let grid = Arc::new(Grid::uniform(2.0, 2001).unwrap());
    let pi = std::f64::consts::PI;
    let eps = 0.05;
    let u = GridFunction::from_fn(Arc::clone(&grid), 0.0, |_| 0.0).unwrap();
    let small = GridFunction::from_fn(Arc::clone(&grid), 0.0, |x| {
        if x < 1.0 {
            eps
        } else {
            eps * (2.0 * pi * (x - 1.0)).cos()
        }
    })
    .unwrap();
    let big = GridFunction::from_fn(Arc::clone(&grid), 0.0, |x| if x < 1.0 { -1.0 + 2.0 * (pi * x).sin() } else { -1.0 }).unwrap();
    let fam = lemma_families(2).unwrap();
    let mut e = BraidEngine::default();
    for g in [&grid, &Arc::new(Grid::uniform(2.0, 6001).unwrap())] {
        let r = |f: &GridFunction| f.resample(Arc::clone(g)).unwrap();
        let (a, b, c) = (r(&u), r(&small), r(&big));
        let w = encode([&a, &b, &c], GeneratorOrder::BottomIsX, 1e-12, 1e-9).unwrap();
        assert_eq!(w.word, fam.a_tilde, "{}", w.word);
        assert!(e.equiv(&w.word, &fam.a_tilde).unwrap());
    }
}

#[test]
fn eigenpolynomial_zeros_interlace() {
    for p in [3.0, 4.0] {
        let m = ModelParams::new(p).unwrap();
        let s = WeightedSpace::for_params(&m).unwrap();
        let zs: Vec<Vec<f64>> = (0..=9)
            .map(|j| positive_zeros(&eigenpoly(j, &s, &m).unwrap(), &s).unwrap())
            .collect();
        for j in 1..=8 {
            let (a, b) = (&zs[j], &zs[j + 1]);
            assert_eq!(b.len(), a.len() + 1);
            for i in 0..a.len() {
                assert!(b[i] < a[i] && a[i] < b[i + 1], "p={p} j={j}");
            }
        }
    }
}

#[test]
fn eigenpolynomial_sign_pattern() {
    let m = ModelParams::new(3.0).unwrap();
    let s = WeightedSpace::for_params(&m).unwrap();
    for j in 0..=12 {
        let phi = eigenpoly(j, &s, &m).unwrap();
        assert!(phi.phi0() > 0.0);
        assert!(vhj_core::spectral::has_alternating_signs(phi.raw_coeffs()), "j = {j}");
    }
}

#[test]
fn tracking_reversed_snapshots_gives_same_tracks() {
    let grid = Arc::new(Grid::uniform(3.0, 600).unwrap());
    let snaps: Vec<GridFunction> = (0..30)
        .map(|i| {
            let t = i as f64 * 0.005;
            GridFunction::from_fn(Arc::clone(&grid), t, |x| (3.0 * x - t).sin() + 0.2).unwrap()
        })
        .collect();
    let cfg = TrackConfig::default();
    let fwd = track_intersections(&snaps, |_| 0.0, &cfg).unwrap();
    let mut rev = snaps.clone();
    rev.reverse();
    for (i, s) in rev.iter_mut().enumerate() {
        s.t = i as f64;
    }
    let bwd = track_intersections(&rev, |_| 0.0, &cfg).unwrap();
    assert_eq!(fwd.tracks.len(), bwd.tracks.len());
    assert!(!fwd.is_ambiguous() && !bwd.is_ambiguous(), "{:?} {:?}", fwd.ambiguities, bwd.ambiguities);
    for (a, b) in fwd.tracks.iter().zip(&bwd.tracks) {
        assert!(matches!(a.event, TerminalEvent::ReachedFinalTime { .. }));
        assert!(matches!(b.event, TerminalEvent::ReachedFinalTime { .. }));
        let first = a.samples.first().unwrap().1;
        let last = b.samples.last().unwrap().1;
        assert!((first - last).abs() < 1e-12);
    }
}
