//! End-to-end acceptance suite: one test per headline guarantee of the
//! library and binary, each printing a single `PASS`/`FAIL` line.
//!
//! Run with `cargo test --test acceptance -- --nocapture` to see the
//! per-criterion lines.  Every check here is exact symbolic arithmetic
//! except the winding numbers, whose certified residual bounds are
//! asserted alongside the integer values.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;

use cohomotopy::cocycle::{completion_to_split, milnor_patch, obstruction_group, split_complete, SplitWitness};
use cohomotopy::error::Result;
use cohomotopy::gen::{self, GenCfg};
use cohomotopy::homotopy::{
    all_ok, circle_class, ker_phi1_witness, ker_phi2_witness, ker_psi2_witness, path_from_factors,
    phi_roundtrip, psi_roundtrip, ChiCertificate, GammaElem, LoopWitness,
};
use cohomotopy::matrix::{assemble, shift_factors, sl2_factor_euclidean, ElemFactor, SqMatrix};
use cohomotopy::pipelines::rotation;
use cohomotopy::poly::rat_int;
use cohomotopy::ring::{builtin_square, circle_ring, power_map, Element, RingCtx, RingHom};
use cohomotopy::smith::smith_normal_form;
use cohomotopy::winding::winding_number;

/// Run one criterion body, print its pass/fail line, then propagate any
/// failure so the test itself fails too.
fn criterion(num: u32, name: &str, body: impl FnOnce() -> Result<()>) {
    let outcome = catch_unwind(AssertUnwindSafe(body));
    let ok = matches!(&outcome, Ok(Ok(())));
    println!("criterion {num} ({name}): {}", if ok { "PASS" } else { "FAIL" });
    match outcome {
        Ok(Ok(())) => {}
        Ok(Err(e)) => panic!("criterion {num} ({name}): {e}"),
        Err(payload) => std::panic::resume_unwind(payload),
    }
}

// ====================================================================
// 1: connecting certificates validate and multiply
// ====================================================================

#[test]
fn criterion_1_connecting_certificates_validate_and_multiply() {
    criterion(1, "certificates for loop pairs hold and are multiplicative", || {
        let cfg = GenCfg { terms: 2, degree: 2, coeff_bound: 3 };
        let bases = [RingCtx::rationals(), RingCtx::poly(&["Y"])?];
        for (which, base) in bases.iter().enumerate() {
            let mut rng = gen::seeded(101 + which as u64);
            // Twenty seeded loop pairs per base, consumed two at a time so
            // every round also exercises the product identity.
            for _ in 0..10 {
                let a1 = gen::random_loop(&mut rng, base, "T", 2, &cfg)?;
                let b1 = gen::random_loop(&mut rng, base, "T", 2, &cfg)?;
                let a2 = gen::random_loop(&mut rng, base, "T", 2, &cfg)?;
                let b2 = gen::random_loop(&mut rng, base, "T", 2, &cfg)?;

                let c1 = ChiCertificate::canonical(&a1, &b1, "X")?;
                let c2 = ChiCertificate::canonical(&a2, &b2, "X")?;
                assert!(all_ok(&c1.checklist()?), "first certificate fails a boundary identity");
                assert!(all_ok(&c2.checklist()?), "second certificate fails a boundary identity");

                // The matrix product of two certificates certifies the
                // pointwise product pair, exactly.
                let prod = c1.product(&c2)?;
                assert!(all_ok(&prod.checklist()?), "product certificate fails a boundary identity");
                assert_eq!(prod.matrix, c1.matrix.mul(&c2.matrix)?, "product matrix is not the matrix product");
                assert_eq!(prod.alpha.matrix, a1.matrix.mul(&a2.matrix)?, "first loop of the product pair");
                assert_eq!(prod.beta.matrix, b1.matrix.mul(&b2.matrix)?, "second loop of the product pair");
            }
        }
        Ok(())
    });
}

// ====================================================================
// 2: Mayer-Vietoris kernel witnesses
// ====================================================================

#[test]
fn criterion_2_mayer_vietoris_kernel_witnesses_hold() {
    criterion(2, "kernel witnesses for the four comparison maps hold exactly", || {
        let square = builtin_square("circle", None)?;
        let cfg = GenCfg { terms: 2, degree: 1, coeff_bound: 2 };

        // Kernel of the loop difference map: pick the null-homotopies and
        // the left loop first, then build the right loop they certify.
        let mut rng = gen::seeded(201);
        for _ in 0..5 {
            let gamma = gen::random_homotopy(&mut rng, &square.left, "T", "S", 2, &cfg)?;
            let gamma_prime = gen::random_homotopy(&mut rng, &square.left, "T", "S", 2, &cfg)?;
            let beta = gen::random_loop(&mut rng, &square.left, "T", 2, &cfg)?;

            let r2 = square.right.extend(&["T"])?;
            let rall = r2.extend(&["S"])?;
            let xe = Element::parse(&rall, "X")?;
            let one = Element::one(&rall);
            let gm = gamma.matrix.extend_to(&rall)?.subst_var("S", &one.sub(&xe)?)?.restrict_to(&r2)?;
            let gp = gamma_prime.matrix.extend_to(&rall)?.subst_var("S", &xe)?.restrict_to(&r2)?;
            let pin = Element::parse(&r2, "X*(1 - X)*T*(1 - T)")?;
            let mu = assemble(&r2, 2, &[ElemFactor::new(0, 1, pin)?])?;
            let bmat = gm.mul(&gp)?.mul(&mu)?.mul(&beta.matrix.extend_to(&r2)?)?;
            let b = LoopWitness::new(square.right.clone(), "T", bmat)?;

            let res = ker_psi2_witness(&square, &b, &beta, &gamma, &gamma_prime)?;
            assert!(all_ok(&res.checks), "loop-difference kernel witness fails a check");
        }

        // Kernel of the first class map: classify a pullback class with
        // explicitly factored endpoint paths.
        let mut rng = gen::seeded(202);
        for _ in 0..5 {
            let a = gen::random_interval_class(&mut rng, &square, 2, &cfg)?;
            let alpha = a.rep.fibre_right()?;
            let beta = a.rep.fibre_left()?;
            let theta = path_from_factors(&square.right, "T", &sl2_factor_euclidean(&alpha)?)?;
            let sigma = path_from_factors(&square.left, "T", &sl2_factor_euclidean(&beta)?)?;
            let res = ker_phi1_witness(&square, &a, &theta, &sigma)?;
            assert!(all_ok(&res.checks), "class-projection kernel witness fails a check");
            assert!(all_ok(&res.certificate.checklist()?), "connecting certificate fails a check");
        }

        // Kernel of the class difference map: deform the right class so
        // the pair glues into a single pullback class.
        let mut rng = gen::seeded(203);
        for round in 0..5u64 {
            let count = 1 + (round as usize % 3);
            let (alpha, _) = gen::random_product(&mut rng, &square.right, 2, count, &cfg)?;
            let b = GammaElem::new(alpha.clone())?;
            let sfactors = gen::random_factors(&mut rng, &square.left, 2, 2, &cfg)?;
            let sigma = path_from_factors(&square.left, "T", &sfactors)?;
            let alpha0 = alpha.subst_var_rat("X", &rat_int(0))?.restrict_to(&square.left)?;
            let alpha1 = alpha.subst_var_rat("X", &rat_int(1))?.restrict_to(&square.left)?;
            let beta = sigma.end()?.mul(&alpha0)?;
            let c = GammaElem::new(beta.clone())?;
            let target = beta.mul(&alpha1.inverse()?)?;
            let sigma_prime = path_from_factors(&square.left, "T", &sl2_factor_euclidean(&target)?)?;
            let res = ker_phi2_witness(&square, &b, &c, &sigma, &sigma_prime)?;
            assert!(all_ok(&res.checks), "class-difference kernel witness fails a check");
        }

        // Both round trips land on identity-witnessed elements.
        let mut rng = gen::seeded(204);
        for round in 0..5i64 {
            let sq_t = square.extend(&["T"])?;
            let r2 = square.right.extend(&["T"])?;
            let beta = gen::random_loop(&mut rng, &square.left, "T", 2, &cfg)?;
            let scale = 1 + (round % 3);
            let pin = Element::parse(&r2, &format!("{scale}*X*(1 - X)*T*(1 - T)"))?;
            let mu = assemble(&r2, 2, &[ElemFactor::new(0, 1, pin)?])?;
            let rho = mu.mul(&beta.matrix.extend_to(&r2)?)?;
            let paired = SqMatrix::fibre(sq_t.total(), &rho, &beta.matrix)?;
            let aloop = LoopWitness::new(square.total(), "T", paired)?;
            let (d, _witness, checks) = psi_roundtrip(&aloop)?;
            assert!(d.matrix.is_identity(), "loop round trip does not land on the identity");
            assert!(all_ok(&checks), "loop round trip witness fails a check");
        }
        let mut rng = gen::seeded(205);
        for _ in 0..5 {
            let a = gen::random_interval_class(&mut rng, &square, 2, &cfg)?;
            let (d, _path, checks) = phi_roundtrip(&a)?;
            assert!(d.rep.is_identity(), "class round trip does not land on the identity");
            assert!(all_ok(&checks), "class round trip witness fails a check");
        }
        Ok(())
    });
}

// ====================================================================
// 3: elementary factorization over one variable
// ====================================================================

#[test]
fn criterion_3_euclidean_factorization_reassembles_exactly() {
    criterion(3, "one-variable elementary products refactor and reassemble", || {
        let ring = RingCtx::poly(&["Y"])?;
        let cfg = GenCfg { terms: 2, degree: 4, coeff_bound: 3 };
        let mut rng = gen::seeded(301);
        for round in 0..50usize {
            let count = 1 + (round % 6);
            let (m, _) = gen::random_product(&mut rng, &ring, 2, count, &cfg)?;
            let factors = sl2_factor_euclidean(&m)?;
            assert_eq!(assemble(&ring, 2, &factors)?, m, "reassembled product differs from the input");
        }
        Ok(())
    });
}

// ====================================================================
// 4: patching, extraction, and splitting round trip
// ====================================================================

#[test]
fn criterion_4_patch_extract_and_split_round_trip() {
    criterion(4, "patched rows extract their block and split both ways", || {
        let square = builtin_square("swan", Some(2))?;
        let cfg = GenCfg { terms: 2, degree: 1, coeff_bound: 2 };
        let mut rng = gen::seeded(401);
        for round in 0..10usize {
            let count = 1 + (round % 4);
            let factors = gen::random_factors(&mut rng, &square.common, 2, count, &cfg)?;
            let lambda = assemble(&square.common, 2, &factors)?;
            let witness3 = shift_factors(&factors, 1);

            let patched = milnor_patch(&square, &lambda, &witness3)?;
            assert!(all_ok(&patched.checks), "patched row fails a check");
            assert_eq!(patched.cocycle.lambda()?, lambda, "extracted block differs from the input");

            // Tautological splitting: lift each factor through the right
            // leg, keep the left side at the identity.
            let mut lifted = Vec::with_capacity(factors.len());
            for fac in &factors {
                lifted.push(ElemFactor::new(fac.i, fac.j, square.f.preimage(&fac.r)?)?);
            }
            let gamma = assemble(&square.right, 2, &lifted)?;
            let delta = SqMatrix::identity(&square.left, 2);
            let split = SplitWitness::new(&square, gamma, delta)?;
            split.verify(&square, &lambda)?;

            let completed = split_complete(&square, &patched.completion, &split)?;
            assert!(all_ok(&completed.checks), "split completion fails a check");

            let (recovered, back_checks) =
                completion_to_split(&square, &patched.completion, &completed.matrix)?;
            assert!(all_ok(&back_checks), "recovered splitting fails a check");
            recovered.verify(&square, &lambda)?;
        }
        Ok(())
    });
}

// ====================================================================
// 5: winding numbers
// ====================================================================

#[test]
fn criterion_5_winding_numbers_match_degrees() {
    criterion(5, "winding numbers are exact on rotations, images, and powers", || {
        let circle = circle_ring();
        let tau = rotation()?;

        let id = SqMatrix::identity(&circle, 2);
        assert_eq!(winding_number(&id)?.value, 0, "identity should wind zero times");

        let base = winding_number(&tau)?;
        assert_eq!(base.value.abs(), 1, "rotation should wind exactly once");
        assert!(base.residual < 1e-6, "rotation winding residual too large");

        // Integer powers wind linearly, with small certified residuals.
        let mut pow = tau.clone();
        for k in 2..=5i64 {
            pow = pow.mul(&tau)?;
            let report = winding_number(&pow)?;
            assert_eq!(report.value, k * base.value, "power {k} winds the wrong number of times");
            assert!(report.residual < 1e-6, "power {k} residual too large");
        }

        // Images of plane matrices under the restriction map are
        // null-wound: they extend over the disc.
        let plane = RingCtx::poly(&["X", "Y"])?;
        let nu = RingHom::quotient_map(plane.clone(), circle.clone())?;
        let cfg = GenCfg { terms: 2, degree: 2, coeff_bound: 2 };
        let mut rng = gen::seeded(501);
        for _ in 0..20 {
            let (m, _) = gen::random_product(&mut rng, &plane, 2, 3, &cfg)?;
            let image = m.hom_apply(&nu)?;
            assert_eq!(winding_number(&image)?.value, 0, "restricted plane matrix should wind zero times");
        }

        // The degree-n self-map multiplies winding numbers by n.
        for n in 1..=4u32 {
            let mu_n = power_map(n)?;
            let image = tau.hom_apply(&mu_n)?;
            assert_eq!(
                winding_number(&image)?.value,
                i64::from(n) * base.value,
                "degree-{n} image winds the wrong number of times"
            );
        }
        Ok(())
    });
}

// ====================================================================
// 6: the demo binary's verdicts
// ====================================================================

/// Run the installed binary's quotient-sphere demo and return its stdout.
fn swan_demo_stdout(n: u32) -> String {
    let exe = env!("CARGO_BIN_EXE_cohomotopy");
    let out = Command::new(exe)
        .args(["swan-demo", "--n", &n.to_string()])
        .output()
        .expect("failed to spawn the demo binary");
    assert!(out.status.success(), "swan-demo --n {n} exited with {:?}", out.status.code());
    String::from_utf8_lossy(&out.stdout).into_owned()
}

/// Extract the reported winding value from a demo transcript.
fn reported_winding(stdout: &str) -> i64 {
    stdout
        .lines()
        .find_map(|line| line.trim().strip_prefix("winding: "))
        .and_then(|v| v.trim().parse().ok())
        .expect("demo output should report a winding value")
}

#[test]
fn criterion_6_demo_binary_reports_the_three_verdicts() {
    criterion(6, "the quotient-sphere demo separates the three cases", || {
        let out3 = swan_demo_stdout(3);
        assert!(out3.contains("verdict: non-free"), "n = 3 should be reported non-free");
        assert_eq!(reported_winding(&out3).abs(), 2, "n = 3 should report winding magnitude two");

        let out2 = swan_demo_stdout(2);
        assert!(out2.contains("verdict: inconclusive"), "n = 2 should be inconclusive");

        let out1 = swan_demo_stdout(1);
        assert!(out1.contains("verdict: inconclusive"), "n = 1 should be inconclusive");
        Ok(())
    });
}

// ====================================================================
// 7: obstruction groups over integer data
// ====================================================================

#[test]
fn criterion_7_smith_form_and_obstruction_groups() {
    criterion(7, "integer normal forms and obstruction groups come out right", || {
        assert_eq!(
            smith_normal_form(&[vec![1, 1], vec![1, -1]])?,
            vec![1, 2],
            "normal form of the standard 2 x 2 comparison matrix"
        );
        let klein = obstruction_group(&builtin_square("klein", None)?)?;
        assert_eq!(klein.name, "Z_2", "Klein square should obstruct in the two-element group");
        let torus = obstruction_group(&builtin_square("torus", None)?)?;
        assert_eq!(torus.name, "Z", "torus square should obstruct in the integers");
        Ok(())
    });
}

// ====================================================================
// 8: classifying pullback classes
// ====================================================================

#[test]
fn criterion_8_pullback_classes_classify_exactly() {
    criterion(8, "interval-square classes map to their certificates exactly", || {
        let square = builtin_square("circle", None)?;
        let cfg = GenCfg { terms: 2, degree: 2, coeff_bound: 2 };
        let mut rng = gen::seeded(801);
        for round in 0..10usize {
            let count = 1 + (round % 3);
            let input = gen::random_interval_class(&mut rng, &square, count, &cfg)?;
            let res = circle_class(&input)?;
            assert!(all_ok(&res.checks), "classification witness fails a check");
            assert!(all_ok(&res.certificate.checklist()?), "connecting certificate fails a check");

            // The certificate's class is reached from the input by the
            // recorded path, as an exact matrix identity.
            let moved = res.relating_path.end()?.mul(&input.rep)?;
            assert_eq!(moved, res.image.rep, "relating path does not carry the input to the image");
        }
        Ok(())
    });
}
