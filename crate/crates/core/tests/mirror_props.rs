use bandit_omd::linalg::{distance, norm};
use bandit_omd::{FeasibleSet, MirrorStructure};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Minimizes `f` over the grid `lo, lo + h, ..., hi`.
fn grid_argmin(lo: f64, hi: f64, h: f64, f: impl Fn(f64) -> f64) -> f64 {
    let steps = ((hi - lo) / h).round() as usize;
    let mut best = (f64::INFINITY, lo);
    for s in 0..=steps {
        let x = lo + s as f64 * h;
        let v = f(x);
        if v < best.0 {
            best = (v, x);
        }
    }
    best.1
}

/// Binary KL written out directly, the Bregman divergence of the
/// two-point entropy in the free coordinate.
fn kl1(p: f64, x: f64) -> f64 {
    let term = |a: f64, b: f64| if a > 0.0 { a * (a / b).ln() } else { 0.0 };
    term(p, x) + term(1.0 - p, 1.0 - x)
}

fn interior_simplex_point(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..=dim).map(|_| rng.random_range(0.05..1.0)).collect();
    let s: f64 = w.iter().sum();
    w[..dim].iter().map(|v| v / s).collect()
}

#[test]
fn euclidean_prox_matches_grid_minimizer() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let set = FeasibleSet::symmetric_box(1, 1.0).unwrap();
    for _ in 0..100 {
        let mu = rng.random_range(0.5..3.0);
        let m = MirrorStructure::euclidean(mu).unwrap();
        let x = rng.random_range(-1.0..1.0);
        let y = rng.random_range(-4.0..4.0);
        let got = m.prox_map(&set, &[x], &[y]).unwrap()[0];
        let want = grid_argmin(-1.0, 1.0, 1e-4, |c| y * (x - c) + 0.5 * mu * (c - x).powi(2));
        assert!((got - want).abs() <= 1e-4, "x={x} y={y} mu={mu}: {got} vs {want}");
    }
}

#[test]
fn entropy_prox_matches_grid_minimizer() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let set = FeasibleSet::transformed_simplex(1).unwrap();
    let m = MirrorStructure::negative_entropy();
    for _ in 0..100 {
        let x = rng.random_range(0.05..0.95);
        let y = rng.random_range(-3.0..3.0);
        let got = m.prox_map(&set, &[x], &[y]).unwrap()[0];
        let want = grid_argmin(0.0, 1.0, 1e-4, |c| y * (x - c) + kl1(c, x));
        assert!((got - want).abs() <= 1e-4, "x={x} y={y}: {got} vs {want}");
    }
}

#[test]
fn prox_equals_mirror_of_shifted_gradient() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let simplex = FeasibleSet::transformed_simplex(2).unwrap();
    let entropy = MirrorStructure::negative_entropy();
    let boxed = FeasibleSet::symmetric_box(3, 2.0).unwrap();
    let euclid = MirrorStructure::euclidean(1.5).unwrap();
    for _ in 0..100 {
        let x = interior_simplex_point(&mut rng, 2);
        let y: Vec<f64> = (0..2).map(|_| rng.random_range(-3.0..3.0)).collect();
        let prox = entropy.prox_map(&simplex, &x, &y).unwrap();
        let z: Vec<f64> = entropy.dgf_grad(&x).unwrap().iter().zip(&y).map(|(a, b)| a + b).collect();
        let mirror = entropy.mirror_map(&simplex, &z).unwrap();
        assert!(distance(&prox, &mirror) <= 1e-8);

        let x: Vec<f64> = (0..3).map(|_| rng.random_range(-1.9..1.9)).collect();
        let y: Vec<f64> = (0..3).map(|_| rng.random_range(-5.0..5.0)).collect();
        let prox = euclid.prox_map(&boxed, &x, &y).unwrap();
        let z: Vec<f64> = euclid.dgf_grad(&x).unwrap().iter().zip(&y).map(|(a, b)| a + b).collect();
        let mirror = euclid.mirror_map(&boxed, &z).unwrap();
        assert!(distance(&prox, &mirror) <= 1e-8);
    }
}

#[test]
fn prox_is_lipschitz_in_the_step() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let cases: [(MirrorStructure, FeasibleSet); 2] = [
        (MirrorStructure::negative_entropy(), FeasibleSet::transformed_simplex(3).unwrap()),
        (MirrorStructure::euclidean(2.0).unwrap(), FeasibleSet::symmetric_box(3, 1.0).unwrap()),
    ];
    for (m, set) in &cases {
        for _ in 0..1000 {
            let x = set.sample(&mut rng);
            let x = if m.in_domain(&x) { x } else { set.interior_ball().center };
            let y1: Vec<f64> = (0..3).map(|_| rng.random_range(-4.0..4.0)).collect();
            let y2: Vec<f64> = (0..3).map(|_| rng.random_range(-4.0..4.0)).collect();
            let a = m.prox_map(set, &x, &y1).unwrap();
            let b = m.prox_map(set, &x, &y2).unwrap();
            assert!(distance(&a, &b) <= distance(&y1, &y2) / m.modulus() + 1e-12);
        }
    }
}

#[test]
fn bregman_vanishes_along_converging_sequence() {
    let m = MirrorStructure::negative_entropy();
    let p = [0.2, 0.3, 0.1];
    let p0 = [0.6, 0.1, 0.25];
    let values: Vec<f64> = (1..=2000)
        .map(|k| {
            let xk: Vec<f64> = p.iter().zip(&p0).map(|(a, b)| a + (b - a) / k as f64).collect();
            m.bregman_divergence(&p, &xk).unwrap()
        })
        .collect();
    for w in values[10..].windows(2) {
        assert!(w[1] <= w[0]);
    }
    assert!(*values.last().unwrap() < 1e-6);
}

#[test]
fn prox_minimizes_its_objective() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    let cases: [(MirrorStructure, FeasibleSet); 2] = [
        (MirrorStructure::negative_entropy(), FeasibleSet::transformed_simplex(2).unwrap()),
        (MirrorStructure::euclidean(1.0).unwrap(), FeasibleSet::symmetric_box(2, 1.0).unwrap()),
    ];
    for (m, set) in &cases {
        let x = set.interior_ball().center;
        let y: Vec<f64> = (0..2).map(|_| rng.random_range(-2.0..2.0)).collect();
        let objective = |c: &[f64]| {
            let lin: f64 = y.iter().zip(&x).zip(c).map(|((yi, xi), ci)| yi * (xi - ci)).sum();
            lin + m.bregman_divergence(c, &x).unwrap()
        };
        let prox = m.prox_map(set, &x, &y).unwrap();
        let best = objective(&prox);
        for _ in 0..1000 {
            let c = set.sample(&mut rng);
            assert!(best <= objective(&c) + 1e-12);
        }
    }
}

#[test]
fn entropy_strong_convexity_in_free_coordinates() {
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    let m = MirrorStructure::negative_entropy();
    let mu = m.modulus();
    for dim in 1..=4 {
        for _ in 0..1000 {
            let x = interior_simplex_point(&mut rng, dim);
            let set = FeasibleSet::transformed_simplex(dim).unwrap();
            let p = set.sample(&mut rng);
            let lhs = m.dgf_value(&p).unwrap();
            let g = m.dgf_grad(&x).unwrap();
            let lin: f64 = g.iter().zip(&p).zip(&x).map(|((gi, pi), xi)| gi * (pi - xi)).sum();
            let rhs = m.dgf_value(&x).unwrap() + lin + 0.5 * mu * distance(&p, &x).powi(2);
            assert!(lhs >= rhs - 1e-12, "dim {dim}: {lhs} < {rhs}");
        }
    }
}

#[test]
fn product_modulus_is_smallest_block() {
    let m = MirrorStructure::product(vec![
        (MirrorStructure::euclidean(3.0).unwrap(), 2),
        (MirrorStructure::negative_entropy(), 2),
        (MirrorStructure::euclidean(5.0).unwrap(), 1),
    ])
    .unwrap();
    assert_eq!(m.modulus(), 2.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn bregman_is_nonnegative_and_zero_on_diagonal(
        a in 0.01f64..0.6, b in 0.01f64..0.35, c in 0.01f64..0.6, d in 0.01f64..0.35,
    ) {
        let m = MirrorStructure::negative_entropy();
        let p = [a, b];
        let x = [c, d];
        prop_assert!(m.bregman_divergence(&x, &x).unwrap().abs() < 1e-15);
        let dv = m.bregman_divergence(&p, &x).unwrap();
        prop_assert!(dv >= m.modulus() / 2.0 * distance(&p, &x).powi(2) - 1e-12);
    }

    #[test]
    fn prox_output_stays_feasible(
        x in proptest::collection::vec(0.02f64..0.3, 3),
        y in proptest::collection::vec(-60.0f64..60.0, 3),
    ) {
        let set = FeasibleSet::transformed_simplex(3).unwrap();
        let m = MirrorStructure::negative_entropy();
        let out = m.prox_map(&set, &x, &y).unwrap();
        prop_assert!(set.contains(&out));
        prop_assert!(m.in_domain(&out));
        prop_assert!(norm(&out).is_finite());
    }
}
