use aba_persuasion::exact::{
    certify_obedience, merge_equivalent_signals, recommendation_profile, solve_exact, ExactOptions, OBEDIENCE_TOL,
};
use aba_persuasion::fptas::scheme_from_posteriors;
use aba_persuasion::instance::marginals_and_conditionals;
use aba_persuasion::oracle::{cross_belief_utilities, deviation_check};
use aba_persuasion::random::{random_piecewise, random_prior, random_scheme};
use aba_persuasion::simplex::{binomial, for_each_composition, grid_count, l1, sample_uniform};
use aba_persuasion::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn dims() -> impl Strategy<Value = (usize, usize, usize)> {
    (2usize..=3, 1usize..=3, 1usize..=3)
}

fn smooth(i: u8) -> ScoreSpec {
    match i % 3 {
        0 => ScoreSpec::quadratic(),
        1 => ScoreSpec::spherical(),
        _ => ScoreSpec::log(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn prior_recomposes_from_conditionals(seed in any::<u64>(), (ne, na, nb) in dims()) {
        let p = random_prior(&mut rng(seed), ne, na, nb);
        let t = marginals_and_conditionals(&p);
        prop_assert!((t.a.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
        for a in 0..na {
            let s: f64 = t.b_given_a[a].iter().map(|x| x.unwrap()).sum();
            prop_assert!((s - 1.0).abs() <= 1e-9);
            for b in 0..nb {
                for e in 0..ne {
                    let back = t.a[a] * t.b_given_a[a][b].unwrap() * t.e_given_ab[e][a][b].unwrap();
                    prop_assert!((back - p.get(e, a, b)).abs() <= 1e-12);
                }
            }
        }
    }

    #[test]
    fn total_value_is_nonnegative(seed in any::<u64>(), (ne, na, nb) in dims(), g in any::<u8>()) {
        let mut r = rng(seed);
        let p = random_prior(&mut r, ne, na, nb);
        let score = if g % 2 == 0 { smooth(g / 2) } else { random_piecewise(&mut r, ne) };
        prop_assert!(total_value_v(&p, &score).unwrap() >= -1e-9);
    }

    #[test]
    fn constant_sum_and_jensen(seed in any::<u64>(), (ne, na, nb) in dims(), g in any::<u8>()) {
        let mut r = rng(seed);
        let p = random_prior(&mut r, ne, na, nb);
        let score = if g % 2 == 0 { smooth(g / 2) } else { random_piecewise(&mut r, ne) };
        let s = random_scheme(&mut r, &p, 4);
        let bob = bob_utility_of_scheme(&p, &score, &s).unwrap();
        let alice = alice_total_utility(&p, &score, &s).unwrap();
        let v = total_value_v(&p, &score).unwrap();
        prop_assert!((alice + bob - v).abs() <= 1e-9);
        prop_assert!(bob >= -1e-9);
    }

    #[test]
    fn signal_marginalization(seed in any::<u64>(), (ne, na, nb) in dims()) {
        let mut r = rng(seed);
        let p = random_prior(&mut r, ne, na, nb);
        let s = random_scheme(&mut r, &p, 3);
        for si in 0..s.n_signals() {
            let pe = posterior_e_given_s(&p, &s, si).unwrap();
            let pb = prob_b_given_s(&p, &s, si).unwrap();
            let mut mix = vec![0.0; ne];
            for b in 0..nb {
                let post = posterior_e_given_sb(&p, &s, si, b).unwrap();
                for e in 0..ne {
                    mix[e] += pb[b] * post.weights[e];
                }
            }
            prop_assert!(l1(&mix, &pe.weights) <= 1e-10);
        }
    }

    #[test]
    fn parameterizations_agree(seed in any::<u64>(), (ne, na, nb) in dims(), g in any::<u8>()) {
        let mut r = rng(seed);
        let p = random_prior(&mut r, ne, na, nb);
        let score = smooth(g);
        let w = sample_uniform(&mut r, na);
        let mu = p.alice_marginal();
        let lam = (0..na).map(|a| w[a] / mu[a]).fold(0.0f64, f64::max);
        // one signal with posterior w over A, scaled to fit under mu
        let row: Vec<f64> = w.iter().map(|x| x / lam).collect();
        let rest: Vec<f64> = mu.iter().zip(&row).map(|(m, x)| (m - x).max(0.0)).collect();
        let s = SignalingScheme::new(vec!["w".into(), "rest".into()], vec![row.clone(), rest]).unwrap();
        let one = SignalingScheme::new(vec!["w".into()], vec![row.clone()]).unwrap();
        let from_scheme = bob_utility_of_scheme(&p, &score, &one).unwrap() / s.signal_mass(0);
        let from_w = bob_utility_from_w_a(&p, &score, &w).unwrap();
        prop_assert!((from_scheme - from_w).abs() <= 1e-10);
        let mut v = vec![0.0; ne * nb];
        let m = s.signal_mass(0);
        for e in 0..ne {
            for a in 0..na {
                for b in 0..nb {
                    v[e * nb + b] += row[a] / mu[a] * p.get(e, a, b) / m;
                }
            }
        }
        let from_v = bob_utility_from_v_eb(&score, &v, ne, nb).unwrap();
        prop_assert!((from_v - from_w).abs() <= 1e-10);
    }

    #[test]
    fn full_reveal_maximizes_second_term(seed in any::<u64>(), (ne, na, nb) in dims()) {
        let mut r = rng(seed);
        let p = random_prior(&mut r, ne, na, nb);
        let score = ScoreSpec::quadratic();
        let labels: Vec<String> = (0..na).map(|a| a.to_string()).collect();
        let term = |s: &SignalingScheme| -> f64 {
            (0..s.n_signals())
                .filter(|&i| s.signal_mass(i) > 0.0)
                .map(|i| s.signal_mass(i) * score.eval_g(&posterior_e_given_s(&p, s, i).unwrap().weights))
                .sum()
        };
        let full = term(&SignalingScheme::full_reveal(&p, &labels));
        let other = term(&random_scheme(&mut r, &p, 4));
        prop_assert!(other <= full + 1e-12);
    }

    #[test]
    fn posteriors_rebuild_with_their_weights(seed in any::<u64>(), na in 2usize..=4) {
        let mut r = rng(seed);
        let p = random_prior(&mut r, 2, na, 2);
        let s = random_scheme(&mut r, &p, 4).pruned(1e-12);
        let posts: Vec<(f64, Vec<f64>)> = (0..s.n_signals())
            .map(|i| {
                let m = s.signal_mass(i);
                (m, s.pi[i].iter().map(|x| x / m).collect())
            })
            .collect();
        let back = scheme_from_posteriors(&p, &posts).unwrap();
        back.validate_against(&p).unwrap();
        for (i, (m, w)) in posts.iter().enumerate() {
            let got: Vec<f64> = back.pi[i].iter().map(|x| x / m).collect();
            prop_assert!(l1(&got, w) <= 1e-10);
        }
    }

    #[test]
    fn grid_is_lexicographic_and_counted(d in 1usize..=4, k in 0u32..=8) {
        let mut pts: Vec<Vec<u32>> = Vec::new();
        for_each_composition(d, k, |c| pts.push(c.to_vec()));
        prop_assert_eq!(pts.len() as u128, grid_count(d, k as u64));
        prop_assert_eq!(grid_count(d, k as u64), binomial(k as u64 + d as u64 - 1, d as u64 - 1));
        prop_assert!(pts.windows(2).all(|w| w[0] < w[1]));
        prop_assert!(pts.iter().all(|c| c.iter().sum::<u32>() == k));
    }

    #[test]
    fn properness(w in proptest::collection::vec(0.01f64..1.0, 3), w2 in proptest::collection::vec(0.01f64..1.0, 3)) {
        let norm = |v: Vec<f64>| { let s: f64 = v.iter().sum(); v.into_iter().map(|x| x / s).collect::<Vec<_>>() };
        let (w, w2) = (norm(w), norm(w2));
        for score in [ScoreSpec::quadratic(), ScoreSpec::log(), ScoreSpec::spherical()] {
            let gap = score.expected_score(&w, &w).unwrap() - score.expected_score(&w2, &w).unwrap();
            prop_assert!(gap >= -1e-12);
            if l1(&w, &w2) > 1e-3 {
                prop_assert!(gap > 0.0);
            }
        }
    }

    #[test]
    fn truthful_belief_reproduces_scheme_value(seed in any::<u64>(), (ne, na, nb) in dims()) {
        let mut r = rng(seed);
        let p = random_prior(&mut r, ne, na, nb);
        let score = ScoreSpec::quadratic();
        let s = random_scheme(&mut r, &p, 3);
        let c = cross_belief_utilities(&p, &score, &s, &s).unwrap();
        prop_assert!((c.bob_utility - bob_utility_of_scheme(&p, &score, &s).unwrap()).abs() <= 1e-10);
        prop_assert!((c.alice_utility + c.bob_utility - total_value_v(&p, &score).unwrap()).abs() <= 1e-9);
        prop_assert_eq!(c.off_path_mass, 0.0);
    }

    #[test]
    fn misled_bob_does_no_better(seed in any::<u64>(), (ne, na, nb) in dims(), m in 1usize..=3) {
        let mut r = rng(seed);
        let p = random_prior(&mut r, ne, na, nb);
        let score = ScoreSpec::quadratic();
        let believed = random_scheme(&mut r, &p, m);
        let mut actual = random_scheme(&mut r, &p, m);
        actual.labels = (0..actual.n_signals()).map(|s| s.to_string()).collect();
        let cross = cross_belief_utilities(&p, &score, &believed, &actual).unwrap();
        let truthful = bob_utility_of_scheme(&p, &score, &actual).unwrap();
        prop_assert!(cross.bob_utility <= truthful + 1e-9);
        prop_assert!((0.0..=1.0).contains(&cross.off_path_mass));
        let v = total_value_v(&p, &score).unwrap();
        prop_assert!((cross.alice_utility + cross.bob_utility - v).abs() <= 1e-9);
    }

    #[test]
    fn deviation_chain_on_ordered_pairs(seed in any::<u64>(), (ne, na, nb) in dims()) {
        let mut r = rng(seed);
        let p = random_prior(&mut r, ne, na, nb);
        let score = ScoreSpec::quadratic();
        let mut a = random_scheme(&mut r, &p, 3);
        let mut b = random_scheme(&mut r, &p, 3);
        if sender_objective(&p, &score, &b).unwrap() < sender_objective(&p, &score, &a).unwrap() {
            std::mem::swap(&mut a, &mut b);
        }
        let rep = deviation_check(&p, &score, &a, &b).unwrap();
        prop_assert!(rep.passed, "{:?}", rep);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn exact_optimum_is_certified_and_dominates(seed in any::<u64>(), (ne, na, nb) in (2usize..=3, 1usize..=3, 1usize..=2)) {
        let mut r = rng(seed);
        let p = random_prior(&mut r, ne, na, nb);
        let score = random_piecewise(&mut r, ne);
        let rep = solve_exact(&p, &score, &ExactOptions::default()).unwrap();
        rep.scheme.validate_against(&p).unwrap();
        prop_assert!(rep.diagnostics["duality_gap"] <= 1e-7);
        let labels: Vec<String> = (0..na).map(|a| a.to_string()).collect();
        let full = sender_objective(&p, &score, &SignalingScheme::full_reveal(&p, &labels)).unwrap();
        let none = sender_objective(&p, &score, &SignalingScheme::no_reveal(&p)).unwrap();
        prop_assert!(rep.sender_objective >= full.max(none) - 1e-7);
        let random = sender_objective(&p, &score, &random_scheme(&mut r, &p, 4)).unwrap();
        prop_assert!(rep.sender_objective >= random - 1e-7);
        let d = score.decision_problem().unwrap();
        let recs: Vec<_> = (0..rep.scheme.n_signals())
            .map(|s| recommendation_profile(&p, &d, &rep.scheme, s).unwrap())
            .collect();
        let cert = certify_obedience(&p, &d, &rep.scheme, &recs, OBEDIENCE_TOL);
        prop_assert!(cert.passed, "{:?}", cert);
    }

    #[test]
    fn merging_twins_keeps_objective(seed in any::<u64>()) {
        let mut r = rng(seed);
        let p = random_prior(&mut r, 2, 3, 2);
        let score = random_piecewise(&mut r, 2);
        let d = score.decision_problem().unwrap();
        let base = random_scheme(&mut r, &p, 3);
        // split every signal into two identical halves
        let mut labels = Vec::new();
        let mut pi = Vec::new();
        for (s, row) in base.pi.iter().enumerate() {
            for h in 0..2 {
                labels.push(format!("{s}.{h}"));
                pi.push(row.iter().map(|x| x / 2.0).collect());
            }
        }
        let twins = SignalingScheme::new(labels, pi).unwrap();
        let recs: Vec<_> = (0..twins.n_signals())
            .map(|s| recommendation_profile(&p, &d, &twins, s).unwrap())
            .collect();
        let (merged, mrecs) = merge_equivalent_signals(&twins, &recs);
        prop_assert!(merged.n_signals() <= base.n_signals());
        prop_assert_eq!(merged.n_signals(), mrecs.len());
        let before = sender_objective(&p, &score, &twins).unwrap();
        let after = sender_objective(&p, &score, &merged).unwrap();
        prop_assert!((before - after).abs() <= 1e-10);
    }
}
