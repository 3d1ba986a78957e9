use geoproj::modpoly::ModularCache;
use geoproj::numeric::{GaussianBivariatePoly, GaussianQuadruplePoly, GaussianRational, PrecisionComplex};
use geoproj::restriction::{f2_map, point_of_v_off_s, surface_equations, weil_restrict, ComplexPlaneCurve, SpecialSurface};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rug::ops::Pow;
use rug::{Float, Rational};

fn random_rational(rng: &mut impl Rng) -> Rational {
    Rational::from((rng.random_range(-50i64..=50), rng.random_range(1i64..=12)))
}

fn random_curve(rng: &mut impl Rng) -> ComplexPlaneCurve {
    loop {
        let mut p = GaussianBivariatePoly::new();
        for _ in 0..rng.random_range(1..=6) {
            let e = [rng.random_range(0..=4), rng.random_range(0..=4)];
            p.add_term(e, GaussianRational { re: random_rational(rng), im: random_rational(rng) });
        }
        if let Ok(c) = ComplexPlaneCurve::new(p) {
            return c;
        }
    }
}

fn check_reconstruction(c: &ComplexPlaneCurve, pt: [Rational; 4]) -> bool {
    let w = weil_restrict(c);
    let (re, im) = w.eval_exact(&pt);
    let t1 = GaussianRational { re: pt[0].clone(), im: pt[1].clone() };
    let t2 = GaussianRational { re: pt[2].clone(), im: pt[3].clone() };
    let direct = c.poly().eval_exact(&[t1, t2]);
    direct.re == re && direct.im == im
}

#[test]
fn reconstruction_is_exact() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..20 {
        let c = random_curve(&mut rng);
        for _ in 0..1000 {
            let pt = std::array::from_fn(|_| random_rational(&mut rng));
            assert!(check_reconstruction(&c, pt));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn reconstruction_prop(seed in any::<u64>(), a in -99i64..99, b in -99i64..99, c in -99i64..99, d in 1i64..99) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let curve = random_curve(&mut rng);
        let pt = [Rational::from((a, d)), Rational::from((b, d)), Rational::from((c, d)), Rational::from((a + b, d + 1))];
        prop_assert!(check_reconstruction(&curve, pt));
    }
}

/// `Σ |c·m(pt)|`.
fn absolute_scale(q: &GaussianQuadruplePoly, pt: &[PrecisionComplex; 4]) -> Float {
    let prec = pt[0].prec();
    let mut scale = Float::new(prec);
    for (e, c) in q.terms() {
        let mut m = c.to_complex(prec).abs();
        for k in 0..4 {
            m *= pt[k].abs().pow(e[k]);
        }
        scale += m;
    }
    scale
}

fn relative_value(q: &GaussianQuadruplePoly, pt: &[PrecisionComplex; 4]) -> f64 {
    (q.eval_complex(pt).abs() / absolute_scale(q, pt)).to_f64()
}

#[test]
fn commuting_square_on_phi2_slices() {
    let cache = ModularCache::in_memory();
    let prec = 192;
    let phi2 = ComplexPlaneCurve::from_integer(&cache.modpoly(2).unwrap().poly).unwrap();
    let w = weil_restrict(&phi2);
    let (q1, q2) = surface_equations(&phi2);
    let bound = 2f64.powi(-(prec as i32) / 2);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut checked = 0;
    while checked < 20 {
        let w1 = PrecisionComplex::from_f64(rng.random_range(-3000.0..3000.0), rng.random_range(-3000.0..3000.0), prec);
        for w2 in phi2.fiber_roots(&w1) {
            let (x1, y1) = w1.clone().into_parts();
            let (x2, y2) = w2.into_parts();
            // the real point lies on the restriction
            let re = w.re_part.eval_real(&[x1.clone(), y1.clone(), x2.clone(), y2.clone()], prec);
            let im = w.im_part.eval_real(&[x1.clone(), y1.clone(), x2.clone(), y2.clone()], prec);
            let pt = f2_map(&x1, &y1, &x2, &y2);
            assert!(relative_value(&q1, &pt) <= bound);
            assert!(relative_value(&q2, &pt) <= bound);
            let scale = absolute_scale(&q1, &pt).to_f64();
            assert!(re.to_f64().abs() <= bound * scale && im.to_f64().abs() <= bound * scale);
            checked += 1;
        }
    }
}

#[test]
fn v_is_not_a_special_surface() {
    let cache = ModularCache::in_memory();
    let mut p = GaussianBivariatePoly::new();
    p.add_term([1, 0], GaussianRational::real(1));
    p.add_term([0, 1], GaussianRational::real(1));
    p.add_term([0, 0], GaussianRational::real(-1));
    let c = ComplexPlaneCurve::new(p).unwrap();
    let s = SpecialSurface::new(1, 1).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let pt = point_of_v_off_s(&c, &s, &mut rng, 10, 1e-6, 128, &cache).unwrap().expect("a point off S");
    let (q1, q2) = surface_equations(&c);
    assert!(q1.eval_complex(&pt).abs_f64() < 1e-30);
    assert!(q2.eval_complex(&pt).abs_f64() < 1e-30);
}
