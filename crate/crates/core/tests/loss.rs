use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use filter_forge::{from_real, to_real, BuiltinFilter, BuiltinWeight, Objective};

fn random_point(rng: &mut ChaCha8Rng, m: usize) -> (Vec<Complex64>, Vec<Complex64>) {
    let beta = (0..m).map(|_| Complex64::new(rng.random_range(-0.3..0.3), rng.random_range(-0.3..0.3))).collect();
    let w = (0..m)
        .map(|_| {
            let im = rng.random_range(0.05..1.0) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            Complex64::new(rng.random_range(-1.5..1.5), im)
        })
        .collect();
    (beta, w)
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs())
}

#[test]
fn published_residuals() {
    let obj = Objective::new(BuiltinWeight::BoxSlise.weight(), 4).unwrap();
    let zolo = obj.filter_loss(&BuiltinFilter::Zolotarev16.filter()).unwrap();
    assert!(rel_close(zolo, 8.09e-4, 0.02), "{zolo}");
    let boxed = obj.filter_loss(&BuiltinFilter::BoxLbfgsb16.filter()).unwrap();
    assert!(rel_close(boxed, 4.72e-4, 0.02), "{boxed}");
}

// With beta = 0 the residual is the weight integrated over (0, 1):
// 0.95 * 1 + 0.05 * 0.01.
#[test]
fn zero_coefficients_leave_the_weighted_interval_length() {
    let obj = Objective::new(BuiltinWeight::GammaSlise.weight(), 2).unwrap();
    let beta = vec![Complex64::new(0.0, 0.0); 2];
    let w = vec![Complex64::new(-0.3, 0.4), Complex64::new(-1.1, 0.02)];
    let expected = 0.95 + 0.05 * 0.01;
    assert!(rel_close(obj.loss(&beta, &w).unwrap(), expected, 1e-14));
    assert!(rel_close(obj.loss_quadrature(&beta, &w).unwrap(), expected, 1e-12));
}

#[test]
fn closed_form_matches_quadrature() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for weight in BuiltinWeight::ALL {
        for _ in 0..20 {
            let m = rng.random_range(1..=4);
            let obj = Objective::new(weight.weight(), m).unwrap();
            let (beta, w) = random_point(&mut rng, m);
            let exact = obj.loss(&beta, &w).unwrap();
            let quad = obj.loss_quadrature(&beta, &w).unwrap();
            assert!(exact >= 0.0);
            assert!((exact - quad).abs() <= 1e-8 * (1.0 + exact), "{weight:?}: {exact} vs {quad}");
        }
    }
}

#[test]
fn real_gradient_matches_central_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let h = 1e-7;
    for weight in BuiltinWeight::ALL {
        for _ in 0..10 {
            let obj = Objective::new(weight.weight(), 3).unwrap();
            let (beta, w) = random_point(&mut rng, 3);
            let v = to_real(&beta, &w);
            let (_, g) = obj.loss_and_real_gradient(&v).unwrap();
            let scale = g.iter().fold(0.0f64, |a, x| a.max(x.abs()));
            for k in 0..v.len() {
                let (mut up, mut down) = (v.clone(), v.clone());
                up[k] += h;
                down[k] -= h;
                let fd = (obj.loss_real(&up).unwrap() - obj.loss_real(&down).unwrap()) / (2.0 * h);
                assert!((g[k] - fd).abs() <= 1e-6 * scale, "{weight:?} slot {k}: {} vs {fd}", g[k]);
            }
        }
    }
}

#[test]
fn residual_ignores_pair_order_and_representative() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let obj = Objective::new(BuiltinWeight::EnhancedGammaSlise.weight(), 3).unwrap();
    for _ in 0..20 {
        let (beta, w) = random_point(&mut rng, 3);
        let base = obj.loss(&beta, &w).unwrap();
        let rev_b: Vec<_> = beta.iter().rev().copied().collect();
        let rev_w: Vec<_> = w.iter().rev().copied().collect();
        assert!(rel_close(obj.loss(&rev_b, &rev_w).unwrap(), base, 1e-12));
        let (mut b2, mut w2) = (beta.clone(), w.clone());
        b2[1] = -b2[1].conj();
        w2[1] = -w2[1].conj();
        assert!(rel_close(obj.loss(&b2, &w2).unwrap(), base, 1e-12));
    }
}

#[test]
fn conjugate_point_mirrors_the_gradient() {
    let mut rng = ChaCha8Rng::seed_from_u64(24);
    let obj = Objective::new(BuiltinWeight::GammaSlise.weight(), 2).unwrap();
    let (beta, w) = random_point(&mut rng, 2);
    let conj = |v: &[Complex64]| v.iter().map(|z| z.conj()).collect::<Vec<_>>();
    let (_, g) = obj.loss_and_real_gradient(&to_real(&beta, &w)).unwrap();
    let (_, gc) = obj.loss_and_real_gradient(&to_real(&conj(&beta), &conj(&w))).unwrap();
    for block in 0..4 {
        let sign = if block % 2 == 0 { 1.0 } else { -1.0 };
        for i in 0..2 {
            let k = 2 * block + i;
            assert!((gc[k] - sign * g[k]).abs() <= 1e-12 * g[k].abs().max(1e-12), "slot {k}");
        }
    }
}

#[test]
fn published_box_filter_is_stationary_on_its_free_coordinates() {
    let obj = Objective::new(BuiltinWeight::BoxSlise.weight(), 4).unwrap();
    let filter = BuiltinFilter::BoxLbfgsb16.filter();
    let v = to_real(filter.coeffs(), filter.poles());
    let (_, g) = obj.loss_and_real_gradient(&v).unwrap();
    let mut worst = 0.0f64;
    for (k, gk) in g.iter().enumerate() {
        // the first pole sits on the bound Im w >= 0.0022
        let at_bound = k == 12 && v[k] <= 0.0022;
        let projected = if at_bound { gk.min(0.0) } else { *gk };
        worst = worst.max(projected.abs());
    }
    assert!(worst <= 1.5e-6, "{worst}");
}

#[test]
fn embedding_round_trip() {
    let f = BuiltinFilter::Zolotarev16.filter::<f64>();
    let v = to_real(f.coeffs(), f.poles());
    let (beta, w) = from_real(&v).unwrap();
    assert_eq!(beta, f.coeffs());
    assert_eq!(w, f.poles());
    assert!(from_real(&v[..7]).is_err());
}
