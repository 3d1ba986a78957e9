use geoproj::modular_forms::{j_eval, j_inverse, reduce_to_fundamental_domain, UpperHalfPoint};
use geoproj::numeric::{mobius_apply, pow2, PrecisionComplex, RationalMatrix2};
use proptest::prelude::*;

const PREC: u32 = 192;

fn word(gens: &[u8]) -> RationalMatrix2 {
    let mut g = RationalMatrix2::identity();
    for &k in gens {
        let m = match k % 3 {
            0 => RationalMatrix2::translation(1),
            1 => RationalMatrix2::translation(-1),
            _ => RationalMatrix2::inversion(),
        };
        g = m.mul(&g);
    }
    g
}

fn rel_err(a: &PrecisionComplex, b: &PrecisionComplex) -> f64 {
    (a.dist(b) / b.abs().max(&rug::Float::with_val(PREC, 1))).to_f64()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn invariant_under_modular_group(x in -0.5f64..0.5, y in 0.3f64..3.0, gens in prop::collection::vec(0u8..3, 0..=5)) {
        let z = UpperHalfPoint::from_f64(x, y, PREC).unwrap();
        let g = word(&gens);
        let gz = UpperHalfPoint::new(mobius_apply(&g, z.z()).unwrap()).unwrap();
        let (a, b) = (j_eval(&z), j_eval(&gz));
        prop_assert!(rel_err(&b, &a) <= 2f64.powi(-(PREC as i32) + 24), "{:e}", rel_err(&b, &a));
    }

    #[test]
    fn reflection_conjugates(x in -2.0f64..2.0, y in 0.2f64..3.0) {
        let z = UpperHalfPoint::from_f64(x, y, PREC).unwrap();
        let a = j_eval(&z.reflect());
        let b = j_eval(&z).conj();
        prop_assert!(rel_err(&a, &b) <= 2f64.powi(-(PREC as i32) + 24));
    }

    #[test]
    fn reduction_is_a_modular_image(x in -20.0f64..20.0, y in 0.001f64..2.0) {
        let z = UpperHalfPoint::from_f64(x, y, PREC).unwrap();
        let (w, g) = reduce_to_fundamental_domain(&z).unwrap();
        prop_assert_eq!(g.det(), 1);
        prop_assert!(g.is_integral());
        prop_assert!(w.z().re().to_f64().abs() <= 0.5 + 1e-40);
        prop_assert!(w.z().abs_f64() >= 1.0 - 1e-40);
        let image = mobius_apply(&g, z.z()).unwrap();
        prop_assert!(image.dist(w.z()) <= pow2(-(PREC as i32) + 8, PREC) * w.z().abs());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(30))]

    #[test]
    fn inverse_round_trip(x in -0.49f64..0.49, y in 0.0f64..1.5) {
        let y = (1.0 - x * x).sqrt() + 0.01 + y;
        let z = UpperHalfPoint::from_f64(x, y, PREC).unwrap();
        let back = j_inverse(&j_eval(&z)).unwrap();
        prop_assert!(back.z().dist(z.z()) <= pow2(-(PREC as i32) / 2 + 8, PREC), "{:?} vs {:?}", back, z);
    }
}
