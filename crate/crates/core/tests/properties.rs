use std::collections::BTreeSet;

use adelic_walk::affine::{gauge_enumerate, gauge_member, AffineMap};
use adelic_walk::arith::{
    factor_rational, height, height_plus, log_norm, reassemble, valuation, ExtendedPrime, Prime, Rational,
    Valuation,
};
use adelic_walk::measure::{ConvolutionTable, DriftProfile, StepDistribution, DEFAULT_CELL_BUDGET};
use adelic_walk::padic::{ball_key, expand, padic_log_distance, same_ball};
use adelic_walk::walk::Walker;
use proptest::prelude::*;

const BIG: i64 = 1_000_000_000_000;

fn nonzero(max: i64) -> impl Strategy<Value = i64> {
    (1..=max, any::<bool>()).prop_map(|(x, neg)| if neg { -x } else { x })
}

fn rational() -> impl Strategy<Value = Rational> {
    (nonzero(BIG), 1..=BIG).prop_map(|(n, d)| Rational::frac(n, d))
}

fn any_rational() -> impl Strategy<Value = Rational> {
    prop_oneof![1 => Just(Rational::zero()), 9 => rational()]
}

fn small_rational() -> impl Strategy<Value = Rational> {
    (nonzero(60), 1..=60i64).prop_map(|(n, d)| Rational::frac(n, d))
}

fn prime() -> impl Strategy<Value = Prime> {
    prop::sample::select(vec![2u64, 3, 5, 7, 11, 13]).prop_map(|p| Prime::new(p).unwrap())
}

fn affinity() -> impl Strategy<Value = AffineMap> {
    (small_rational(), prop_oneof![Just(Rational::zero()), small_rational()])
        .prop_map(|(a, b)| AffineMap::new(a, b).unwrap())
}

fn step_law() -> impl Strategy<Value = StepDistribution> {
    prop::collection::vec((affinity(), 1..=6i64), 1..=4).prop_map(|atoms| {
        let total: i64 = atoms.iter().map(|(_, w)| w).sum();
        StepDistribution::new(atoms.into_iter().map(|(g, w)| (g, Rational::frac(w, total)))).unwrap()
    })
}

fn places_of(q: &Rational) -> Vec<ExtendedPrime> {
    let mut v: Vec<ExtendedPrime> = factor_rational(q)
        .unwrap()
        .into_iter()
        .map(|(p, _)| ExtendedPrime::finite(p).unwrap())
        .collect();
    v.push(ExtendedPrime::Infinity);
    v
}

fn v(q: &Rational, p: Prime) -> i64 {
    valuation(q, p).finite().unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn product_formula(q in rational()) {
        prop_assert_eq!(reassemble(&factor_rational(&q).unwrap()), q.abs());
        let total: f64 = places_of(&q).into_iter().map(|p| log_norm(&q, p).unwrap().value).sum();
        prop_assert!(total.abs() < 1e-9, "{}", total);
    }

    #[test]
    fn height_sandwich_and_submultiplicativity(q1 in rational(), q2 in rational()) {
        let h1 = height(&q1).unwrap();
        let h2 = height(&q2).unwrap();
        let hp = height_plus(&q1);
        let slack = 1e-9 * (1.0 + h1 + h2);
        prop_assert!(h1 / 2.0 <= hp + slack && hp <= h1 + slack);
        prop_assert!(height(&(&q1 * &q2)).unwrap() <= h1 + h2 + slack);
        prop_assert!((height(&q1.recip().unwrap()).unwrap() - h1).abs() <= slack);
        prop_assert!(height_plus(&(&q1 + &q2)) <= std::f64::consts::LN_2 + height_plus(&q1) + height_plus(&q2) + slack);
    }

    #[test]
    fn valuation_rules(q1 in rational(), q2 in rational(), p in prime()) {
        prop_assert_eq!(v(&(&q1 * &q2), p), v(&q1, p) + v(&q2, p));
        let sum = &q1 + &q2;
        match valuation(&sum, p) {
            Valuation::Infinite => prop_assert_eq!(v(&q1, p), v(&q2, p)),
            Valuation::Finite(s) => {
                prop_assert!(s >= v(&q1, p).min(v(&q2, p)));
                if v(&q1, p) != v(&q2, p) {
                    prop_assert_eq!(s, v(&q1, p).min(v(&q2, p)));
                }
            }
        }
    }

    #[test]
    fn expansion_round_trip(q in any_rational(), p in prime(), n in 1usize..40) {
        let e = expand(&q, p, n).unwrap();
        prop_assert!(e.digits.iter().all(|&d| d < p.get()));
        let diff = &q - &e.resum();
        match valuation(&diff, p) {
            Valuation::Infinite => {}
            Valuation::Finite(d) => prop_assert!(d >= e.start_exponent + n as i64),
        }
    }

    #[test]
    fn ultrametric_inequality(x in rational(), y in rational(), z in rational(), p in prime()) {
        prop_assume!(x != y && y != z && x != z);
        let xz = padic_log_distance(&x, &z, p).unwrap();
        let xy = padic_log_distance(&x, &y, p).unwrap();
        let yz = padic_log_distance(&y, &z, p).unwrap();
        prop_assert!(xz <= xy.max(yz) + 1e-12);
    }

    #[test]
    fn ball_keys_identify_balls(q1 in small_rational(), k in small_rational(), p in prime(), r in -3i64..6) {
        // q2 shares a ball with q1 whenever k p^r has valuation ≥ r
        let q2 = &q1 + &(&k * &Rational::prime_power(p.get(), r + 2));
        let digits = 20;
        let e1 = expand(&q1, p, digits).unwrap();
        let e2 = expand(&q2, p, digits).unwrap();
        prop_assume!(e1.known_below().unwrap() >= r && e2.known_below().unwrap() >= r);
        let same = ball_key(&e1, r).unwrap() == ball_key(&e2, r).unwrap();
        prop_assert_eq!(same, same_ball(&q1, &q2, p, r));
    }

    #[test]
    fn quasi_subadditivity(g1 in affinity(), g2 in affinity()) {
        let lhs = g1.compose(&g2).adelic_length();
        let rhs = std::f64::consts::LN_2 + 2.0 * g1.adelic_length() + g2.adelic_length();
        prop_assert!(lhs <= rhs + 1e-9);
    }

    #[test]
    fn group_axioms(f in affinity(), g in affinity(), h in affinity(), z in small_rational()) {
        prop_assert_eq!(f.compose(&g).compose(&h), f.compose(&g.compose(&h)));
        prop_assert!(f.compose(&f.inverse()).is_identity());
        prop_assert!(f.inverse().compose(&f).is_identity());
        prop_assert_eq!(f.compose(&AffineMap::identity()), f.clone());
        prop_assert_eq!(f.compose(&g).act(&z), f.act(&g.act(&z)));
        // the embedding is a homomorphism
        prop_assert_eq!(f.compose(&g).embed(), f.embed().compose(&g.embed()));
    }

    #[test]
    fn drift_product_formula(mu in step_law()) {
        let d = DriftProfile::of(&mu).unwrap();
        let scale = 1.0 + d.rows().iter().map(|r| r.drift.abs()).sum::<f64>();
        prop_assert!(d.product_formula_residual().abs() <= 1e-12 * scale);
        let inf = d.infinite_drift();
        if inf.abs() > 1e-9 {
            prop_assert_eq!(d.drift_sign(ExtendedPrime::Infinity), if inf > 0.0 { 1 } else { -1 });
        }
    }

    #[test]
    fn reflection_is_an_involution(mu in step_law()) {
        let r = mu.reflect();
        prop_assert_eq!(r.reflect(), mu.clone());
        let d = DriftProfile::of(&mu).unwrap();
        let e = DriftProfile::of(&r).unwrap();
        for p in d.primes() {
            prop_assert_eq!(e.coefficient(p), -d.coefficient(p));
        }
        let both: BTreeSet<_> = d.contracting_set().intersection(&e.contracting_set()).copied().collect();
        prop_assert!(both.is_empty());
    }

    #[test]
    fn walk_prefix_identity(mu in step_law(), seed in any::<u64>(), n in 0usize..60) {
        let w = Walker::allow_degenerate(mu).unwrap();
        let t = w.sample_path(seed, n).unwrap();
        let mut a = Rational::one();
        let mut z = Rational::zero();
        for k in 1..=n {
            z = &z + &(&a * t.step(k).b());
            a = &a * t.step(k).a();
            prop_assert_eq!(t.a(k), &a);
            prop_assert_eq!(t.z(k), &z);
        }
        let again = w.sample_path(seed, n).unwrap();
        prop_assert_eq!(again.steps(), t.steps());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn entropy_is_subadditive(mu in step_law()) {
        let (tables, _) = ConvolutionTable::powers(&mu, 5, DEFAULT_CELL_BUDGET);
        let h: Vec<f64> = tables.iter().map(ConvolutionTable::entropy).collect();
        for m in 0..h.len() {
            for k in 0..h.len() - m {
                prop_assert!(h[m + k] <= h[m] + h[k] + 1e-9);
            }
        }
        prop_assert!(tables.last().unwrap().total_mass().is_one());
    }

    #[test]
    fn gauge_sets_nest(k1 in 0.0f64..1.5, dk in 0.0f64..0.8) {
        let small = gauge_enumerate(k1).unwrap();
        let large: BTreeSet<AffineMap> = gauge_enumerate(k1 + dk).unwrap().into_iter().collect();
        let id = AffineMap::identity().embed();
        for g in &small {
            prop_assert!(large.contains(g));
            prop_assert!(gauge_member(g, &id, k1));
        }
    }
}
