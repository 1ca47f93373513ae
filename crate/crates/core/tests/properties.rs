//! Property-based tests over seeded random inputs: commutative-ring
//! axioms in every ring kind, print/parse round-trips, Euclidean
//! division with remainder, homomorphism laws, exact refactorisation of
//! elementary products, and the vanishing winding number of elementary
//! products over the circle.

use std::collections::BTreeMap;

use proptest::prelude::*;

use cohomotopy::gen::{random_element, random_factors, seeded, GenCfg};
use cohomotopy::matrix::{assemble, sl2_factor_euclidean};
use cohomotopy::poly::{Poly, VarSet};
use cohomotopy::ring::{circle_ring, Element, RingCtx, RingHom};
use cohomotopy::winding::winding_number;

fn sample_rings() -> Vec<RingCtx> {
    let plane = RingCtx::poly(&["X", "Y"]).unwrap();
    let circle = circle_ring();
    let sum = RingCtx::direct_sum(vec![RingCtx::rationals(), circle.clone()]).unwrap();
    vec![plane, circle, sum]
}

fn three(seed: u64, ring: &RingCtx, cfg: &GenCfg) -> (Element, Element, Element) {
    let mut rng = seeded(seed);
    let a = random_element(&mut rng, ring, cfg).unwrap();
    let b = random_element(&mut rng, ring, cfg).unwrap();
    let c = random_element(&mut rng, ring, cfg).unwrap();
    (a, b, c)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn ring_axioms_hold_in_every_ring_kind(seed in any::<u64>()) {
        let cfg = GenCfg { terms: 3, degree: 3, coeff_bound: 5 };
        for ring in sample_rings() {
            let (a, b, c) = three(seed, &ring, &cfg);
            let zero = Element::zero(&ring);
            let one = Element::one(&ring);

            prop_assert_eq!(a.add(&b).unwrap(), b.add(&a).unwrap());
            prop_assert_eq!(a.mul(&b).unwrap(), b.mul(&a).unwrap());
            prop_assert_eq!(
                a.add(&b).unwrap().add(&c).unwrap(),
                a.add(&b.add(&c).unwrap()).unwrap()
            );
            prop_assert_eq!(
                a.mul(&b).unwrap().mul(&c).unwrap(),
                a.mul(&b.mul(&c).unwrap()).unwrap()
            );
            prop_assert_eq!(
                a.mul(&b.add(&c).unwrap()).unwrap(),
                a.mul(&b).unwrap().add(&a.mul(&c).unwrap()).unwrap()
            );
            prop_assert_eq!(a.add(&zero).unwrap(), a.clone());
            prop_assert_eq!(a.mul(&one).unwrap(), a.clone());
            prop_assert_eq!(a.add(&a.neg()).unwrap(), zero.clone());
            prop_assert_eq!(a.sub(&b).unwrap(), a.add(&b.neg()).unwrap());
            prop_assert_eq!(a.pow(3).unwrap(), a.mul(&a).unwrap().mul(&a).unwrap());
        }
    }

    #[test]
    fn printed_elements_parse_back_to_themselves(seed in any::<u64>()) {
        let cfg = GenCfg { terms: 4, degree: 4, coeff_bound: 9 };
        for ring in [RingCtx::poly(&["X", "Y", "Z"]).unwrap(), circle_ring()] {
            let mut rng = seeded(seed);
            for _ in 0..4 {
                let e = random_element(&mut rng, &ring, &cfg).unwrap();
                let text = e.to_string();
                let back = Element::parse(&ring, &text).unwrap();
                prop_assert_eq!(back, e, "failed on `{}`", text);
            }
        }
    }

    #[test]
    fn division_by_a_monic_reconstructs_the_dividend(
        seed in any::<u64>(),
        lead in 1u32..4,
    ) {
        let vars = VarSet::new(&["X", "Y"]).unwrap();
        let cfg = GenCfg { terms: 3, degree: 3, coeff_bound: 4 };
        let ring = RingCtx::poly(&["X", "Y"]).unwrap();
        let mut rng = seeded(seed);

        // A monic divisor in X: X^lead plus random noise reduced below
        // degree `lead`, so the leading coefficient is exactly 1.
        let noise = random_element(&mut rng, &ring, &cfg).unwrap();
        let noise_poly = Poly::parse(&noise.to_string(), &vars).unwrap();
        let x_pow = Poly::parse(&format!("X^{lead}"), &vars).unwrap();
        let (_, low_noise) = noise_poly.divmod(&x_pow, "X").unwrap();
        let divisor = &x_pow + &low_noise;

        let p_elem = random_element(&mut rng, &ring, &cfg).unwrap();
        let p = Poly::parse(&p_elem.to_string(), &vars).unwrap();

        let (q, r) = p.divmod(&divisor, "X").unwrap();
        prop_assert_eq!(&(&q * &divisor) + &r, p);
        prop_assert!(r.is_zero() || r.degree_in("X") < divisor.degree_in("X"));
    }

    #[test]
    fn homomorphisms_preserve_ring_structure(seed in any::<u64>()) {
        let plane = RingCtx::poly(&["X", "Y"]).unwrap();
        let circle = circle_ring();
        let line = RingCtx::poly(&["X"]).unwrap();
        let pair = RingCtx::direct_sum(vec![RingCtx::rationals(), RingCtx::rationals()]).unwrap();

        let quotient = RingHom::quotient_map(plane.clone(), circle.clone()).unwrap();
        let mut p0 = BTreeMap::new();
        p0.insert("X".to_string(), cohomotopy::Rat::from_integer(0.into()));
        let mut p1 = BTreeMap::new();
        p1.insert("X".to_string(), cohomotopy::Rat::from_integer(1.into()));
        let eval = RingHom::evaluation(line.clone(), pair, vec![p0, p1]).unwrap();

        let cfg = GenCfg { terms: 3, degree: 3, coeff_bound: 5 };
        for (hom, source) in [(quotient, plane), (eval, line)] {
            let mut rng = seeded(seed);
            let a = random_element(&mut rng, &source, &cfg).unwrap();
            let b = random_element(&mut rng, &source, &cfg).unwrap();
            prop_assert_eq!(
                hom.apply(&a.add(&b).unwrap()).unwrap(),
                hom.apply(&a).unwrap().add(&hom.apply(&b).unwrap()).unwrap()
            );
            prop_assert_eq!(
                hom.apply(&a.mul(&b).unwrap()).unwrap(),
                hom.apply(&a).unwrap().mul(&hom.apply(&b).unwrap()).unwrap()
            );
            prop_assert_eq!(
                hom.apply(&Element::one(&source)).unwrap(),
                Element::one(&hom.target)
            );
        }
    }

    #[test]
    fn elementary_products_refactor_exactly(
        seed in any::<u64>(),
        count in 1usize..6,
    ) {
        let ring = RingCtx::poly(&["Y"]).unwrap();
        let cfg = GenCfg { terms: 2, degree: 3, coeff_bound: 4 };
        let mut rng = seeded(seed);
        let factors = random_factors(&mut rng, &ring, 2, count, &cfg).unwrap();
        let m = assemble(&ring, 2, &factors).unwrap();
        let refactored = sl2_factor_euclidean(&m).unwrap();
        prop_assert_eq!(assemble(&ring, 2, &refactored).unwrap(), m);
    }
}

proptest! {
    // Winding sampling refines adaptively, so keep these cases small.
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn elementary_products_over_the_circle_have_winding_zero(
        seed in any::<u64>(),
        count in 1usize..4,
    ) {
        let circle = circle_ring();
        let cfg = GenCfg { terms: 2, degree: 2, coeff_bound: 2 };
        let mut rng = seeded(seed);
        let factors = random_factors(&mut rng, &circle, 2, count, &cfg).unwrap();
        let m = assemble(&circle, 2, &factors).unwrap();
        // Elementary products are connected to the identity through
        // one-parameter subgroups, so the first column never acquires a
        // turn around the origin.
        let report = winding_number(&m).unwrap();
        prop_assert_eq!(report.value, 0, "winding {} for {} factors", report.value, count);
    }
}
