use geoproj::modpoly::{cyclic_isogeny_matrices, psi, ModularCache};
use geoproj::modular_forms::{j_eval, UpperHalfPoint};
use geoproj::numeric::{poly_eval_complex, IntegerBivariatePoly, PrecisionComplex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rug::ops::Pow;
use rug::{Float, Integer};

fn cache() -> ModularCache {
    ModularCache::in_memory()
}

fn kronecker(p: u32) -> IntegerBivariatePoly {
    let x = IntegerBivariatePoly::variable(0);
    let y = IntegerBivariatePoly::variable(1);
    x.pow(p).sub(&y).mul(&x.sub(&y.pow(p)))
}

#[test]
fn kronecker_congruence() {
    let c = cache();
    for p in [2u32, 3, 5, 7] {
        let phi = c.modpoly(p).unwrap();
        assert_eq!(phi.poly.reduce_mod(p), kronecker(p).reduce_mod(p), "p = {p}");
    }
}

#[test]
fn symmetry_and_degrees() {
    let c = cache();
    for n in 2..=10 {
        let phi = c.modpoly(n).unwrap();
        assert!(phi.poly.is_symmetric(), "N = {n}");
        let d = cyclic_isogeny_matrices(n).len() as u32;
        assert_eq!(d, psi(n));
        assert_eq!(phi.poly.degree_in(0), d);
        assert_eq!(phi.poly.degree_in(1), d);
        // monic in each variable
        assert_eq!(phi.poly.coeff(&[d, 0]), Some(&Integer::from(1)));
    }
}

#[test]
fn isogeny_vanishing_at_random_points() {
    let c = cache();
    let prec = 192;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for n in 2..=10 {
        let phi = c.modpoly(n).unwrap();
        for _ in 0..20 {
            let x: f64 = rng.random_range(-0.5..0.5);
            let y: f64 = rng.random_range(0.9..1.5);
            let z = UpperHalfPoint::from_f64(x, y, prec).unwrap();
            let nz = UpperHalfPoint::new(z.z().scale_integer(&Integer::from(n))).unwrap();
            let (a, b) = (j_eval(&z), j_eval(&nz));
            let v = poly_eval_complex(&phi.poly, &a, &b);
            // relative to the size of the largest monomial
            let (aa, bb) = (a.abs(), b.abs());
            let mut scale = Float::with_val(64, 0);
            for (e, coeff) in phi.poly.terms() {
                let t = Float::with_val(64, coeff).abs()
                    * Float::with_val(64, (&aa).pow(e[0]))
                    * Float::with_val(64, (&bb).pow(e[1]));
                scale = scale.max(&t);
            }
            let rel = (v.abs() / scale).to_f64();
            assert!(rel < 2f64.powi(-(prec as i32) + 40), "N = {n}: {rel:e}");
        }
    }
}

#[test]
fn level_two_full_polynomial() {
    let c = cache();
    let phi = c.modpoly(2).unwrap();
    let want: Vec<([u32; 2], i64)> = vec![
        ([3, 0], 1),
        ([0, 3], 1),
        ([2, 2], -1),
        ([2, 1], 1488),
        ([1, 2], 1488),
        ([2, 0], -162000),
        ([0, 2], -162000),
        ([1, 1], 40773375),
        ([1, 0], 8748000000),
        ([0, 1], 8748000000),
        ([0, 0], -157464000000000),
    ];
    let want = IntegerBivariatePoly::from_terms(want.into_iter().map(|(e, c)| (e, Integer::from(c))));
    assert_eq!(phi.poly, want);
    let jp = |re: f64| PrecisionComplex::from_f64(re, 0.0, 192);
    let v = poly_eval_complex(&phi.poly, &jp(1728.0), &jp(287496.0));
    assert!(v.abs_f64() == 0.0);
}
