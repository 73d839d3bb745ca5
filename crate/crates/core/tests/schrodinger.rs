use num_complex::Complex64;
use uniscale::profiles::Gaussian;
use uniscale::schrodinger::{duhamel, duhamel_residual, propagate, sharp_pair, ExponentPair};
use uniscale::trajectory::Trajectory;
use uniscale::{Exponent, Field, GridSpec};

#[test]
fn gaussian_peak_follows_closed_form() {
    let g = GridSpec::new(1, 4096, 64).unwrap();
    let gs = Gaussian::new(1.0, 1.5, 0.0);
    let u0 = gs.field(&g);
    for t in [0.5, 2.0, 8.0] {
        let peak = propagate(&u0, t).to_physical().lp_norm(Exponent::Infinity).unwrap();
        let want = gs.free_peak(1, t);
        assert!((peak - want).abs() < 1e-10, "t={t}: {peak} vs {want}");
    }
}

#[test]
fn group_law_and_unitarity() {
    let g = GridSpec::new(2, 64, 4).unwrap();
    let u0 = Gaussian::new(1.0, 2.0, 0.7).field(&g);
    let a = propagate(&propagate(&u0, 0.3), 0.45);
    let b = propagate(&u0, 0.75);
    assert!(a.rel_l2_distance(&b).unwrap() < 1e-14);
    assert!((b.l2_norm() - u0.l2_norm()).abs() < 1e-12 * u0.l2_norm());
    let back = propagate(&b, -0.75);
    assert!(back.rel_l2_distance(&u0).unwrap() < 1e-14);
}

#[test]
fn plane_wave_phase_sign() {
    let g = GridSpec::new(1, 64, 4).unwrap();
    let xi = 3.0 / 4.0;
    let f = Field::from_physical_fn(g, |x| Complex64::from_polar(1.0, xi * x[0]));
    let t = 0.8;
    let want = f.scale(Complex64::from_polar(1.0, -t * xi * xi));
    assert!(propagate(&f, t).rel_l2_distance(&want).unwrap() < 1e-13);
}

#[test]
fn duhamel_of_constant_in_time_forcing() {
    // 𝒜F(t) = ∫₀ᵗ S(t−τ)F dτ; for a plane wave F this is (1 − e^{−itξ²})/(iξ²)·F
    let g = GridSpec::new(1, 64, 4).unwrap();
    let xi = 1.25;
    let f = Field::from_physical_fn(g, |x| Complex64::from_polar(1.0, xi * x[0]));
    let tr = Trajectory::sample(0.0, 1.0 / 2048.0, 2048, |_| f.clone()).unwrap();
    let got = duhamel(&tr, 1.0).unwrap();
    let a = xi * xi;
    let c = (Complex64::new(1.0, 0.0) - Complex64::from_polar(1.0, -a)) / Complex64::new(0.0, a);
    let want = f.scale(c);
    assert!(got.rel_l2_distance(&want).unwrap() < 1e-6);
}

#[test]
fn duhamel_residual_shrinks_with_step() {
    let g = GridSpec::new(1, 128, 8).unwrap();
    let u0 = Gaussian::new(1.0, 2.0, 0.0).field(&g);
    let res = |n: usize| {
        let forcing = Trajectory::sample(0.0, 0.5 / n as f64, n, |t| {
            propagate(&u0, t).scale(Complex64::new(t, 0.0))
        })
        .unwrap();
        duhamel_residual(&u0, &forcing).unwrap()
    };
    let (a, b) = (res(32), res(64));
    assert!(b < a, "{a} {b}");
}

#[test]
fn admissible_pairs() {
    let d = 1;
    let sharp = sharp_pair(d, Exponent::Infinity).unwrap();
    assert_eq!(sharp, ExponentPair::new(Exponent::integer(4), Exponent::Infinity));
    assert!(sharp.is_admissible(d));
    assert!(ExponentPair::parse("8,8").unwrap().is_admissible(d));
    assert!(!ExponentPair::new(Exponent::integer(2), Exponent::Infinity).is_admissible(d));
    assert!(!ExponentPair::new(Exponent::integer(2), Exponent::Infinity).is_admissible(2));
}
