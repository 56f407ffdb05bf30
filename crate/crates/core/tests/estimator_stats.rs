use bandit_omd::bench::rps::{phi, rps_pushforward, PAYOFF_A};
use bandit_omd::bench::make_rps;
use bandit_omd::estimator::{
    mpg_estimate, perturb, sample_unit_sphere, shrunk_point, smoothed_gradient_oracle,
    PerturbationSpec,
};
use bandit_omd::linalg::{distance, norm};
use bandit_omd::{FeasibleSet, GameInstance, JointAction};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn linear_game(c: [f64; 4]) -> GameInstance {
    let sets = vec![
        FeasibleSet::symmetric_box(2, 1.0).unwrap(),
        FeasibleSet::symmetric_box(2, 1.0).unwrap(),
    ];
    GameInstance::new("linear", sets, move |i, x| {
        let b = 2 * i;
        c[b] * x[b] + c[b + 1] * x[b + 1] + 0.5 * (x[2 - b] + x[3 - b])
    })
    .unwrap()
}

fn rps_point() -> JointAction {
    make_rps().action(vec![0.55, 0.3, 0.15, 0.2]).unwrap()
}

/// Mean of `reps` estimates with `samples` terms each, and the per-coordinate
/// variance of a single estimate.
fn estimate_moments(
    game: &GameInstance,
    x: &JointAction,
    delta: f64,
    samples: usize,
    reps: usize,
    seed: u64,
) -> (Vec<f64>, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spec = PerturbationSpec::new(delta, samples);
    let n = game.total_dim();
    let mut sum = vec![0.0; n];
    let mut sum_sq = vec![0.0; n];
    for _ in 0..reps {
        let g = mpg_estimate(game, x, &spec, &mut rng).unwrap().estimate;
        for j in 0..n {
            sum[j] += g[j];
            sum_sq[j] += g[j] * g[j];
        }
    }
    let r = reps as f64;
    let mean: Vec<f64> = sum.iter().map(|s| s / r).collect();
    let var = (0..n).map(|j| (sum_sq[j] / r - mean[j] * mean[j]) * r / (r - 1.0)).collect();
    (mean, var)
}

fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / lx.len() as f64;
    let my = ly.iter().sum::<f64>() / ly.len() as f64;
    let num: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let den: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    num / den
}

#[test]
fn sphere_dim_one_is_a_fair_coin() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let plus = (0..10_000)
        .filter(|_| sample_unit_sphere(&mut rng, 1).unwrap()[0] > 0.0)
        .count();
    assert!((plus as f64 / 1e4 - 0.5).abs() <= 0.02);
}

#[test]
fn sphere_dim_three_has_zero_mean() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut mean = [0.0; 3];
    for _ in 0..100_000 {
        let u = sample_unit_sphere(&mut rng, 3).unwrap();
        assert!((norm(&u) - 1.0).abs() <= 1e-12);
        for j in 0..3 {
            mean[j] += u[j] / 1e5;
        }
    }
    assert!(mean.iter().all(|m| m.abs() < 0.01), "{mean:?}");
}

#[test]
fn linear_estimate_is_unbiased() {
    let c = [0.7, -1.2, 0.4, 2.0];
    let game = linear_game(c);
    let x = game.action(vec![0.1, -0.2, 0.3, 0.0]).unwrap();
    let reps = 10_000;
    let (mean, var) = estimate_moments(&game, &x, 0.05, 10, reps, 3);
    for j in 0..4 {
        let se = (var[j] / reps as f64).sqrt();
        assert!((mean[j] - c[j]).abs() <= 3.0 * se, "coord {j}: {} vs {}", mean[j], c[j]);
    }
}

#[test]
fn linear_oracle_converges_to_coefficients() {
    let c = [0.7, -1.2, 0.4, 2.0];
    let game = linear_game(c);
    let x = game.action(vec![0.1, -0.2, 0.3, 0.0]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for player in 0..2 {
        let est = smoothed_gradient_oracle(&game, player, &x, 0.05, 1_000_000, &mut rng).unwrap();
        for j in 0..2 {
            let want = c[2 * player + j];
            assert!((est.mean[j] - want).abs() <= 3.0 * est.std_error[j]);
        }
    }
}

#[test]
fn mpg_mean_matches_smoothed_oracle() {
    let game = make_rps();
    let x = rps_point();
    let delta = 0.1;
    let reps = 100_000;
    let (mean, var) = estimate_moments(&game, &x, delta, 5, reps, 5);
    let x_bar = shrunk_point(&game, &x, delta);
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let exact = game.pseudo_gradient(&x_bar).unwrap();
    let mut offset = 0;
    for player in 0..2 {
        let oracle = smoothed_gradient_oracle(&game, player, &x_bar, delta, 1_000_000, &mut rng).unwrap();
        for j in 0..2 {
            let se_mpg = (var[offset + j] / reps as f64).sqrt();
            let combined = (se_mpg.powi(2) + oracle.std_error[j].powi(2)).sqrt();
            assert!((mean[offset + j] - oracle.mean[j]).abs() <= 3.0 * combined);
            // Smoothing is exact on the bilinear payoff.
            assert!((oracle.mean[j] - exact[offset + j]).abs() <= 3.0 * oracle.std_error[j]);
        }
        offset += 2;
    }
}

#[test]
fn smoothed_bias_halves_with_radius() {
    let game = make_rps();
    let x = rps_point();
    let truth = game.pseudo_gradient(&x).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let bias = |delta: f64, rng: &mut ChaCha8Rng| {
        let x_bar = shrunk_point(&game, &x, delta);
        let mut err = 0.0;
        for player in 0..2 {
            let o = smoothed_gradient_oracle(&game, player, &x_bar, delta, 1_000_000, rng).unwrap();
            err += distance(&o.mean, &truth[2 * player..2 * player + 2]).powi(2);
        }
        err.sqrt()
    };
    let b: Vec<f64> = [0.1, 0.05, 0.025].iter().map(|d| bias(*d, &mut rng)).collect();
    for w in b.windows(2) {
        let ratio = w[1] / w[0];
        assert!((0.35..=0.65).contains(&ratio), "ratios from {b:?}");
    }
}

#[test]
fn smoothed_bias_vanishes_for_small_radius() {
    let game = make_rps();
    let x = rps_point();
    let truth = game.pseudo_gradient(&x).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let delta = 1e-3;
    let x_bar = shrunk_point(&game, &x, delta);
    for player in 0..2 {
        let o = smoothed_gradient_oracle(&game, player, &x_bar, delta, 1_000_000, &mut rng).unwrap();
        let bias = distance(&o.mean, &truth[2 * player..2 * player + 2]);
        assert!(bias < 10.0 * o.std_error_norm(), "bias {bias} se {}", o.std_error_norm());
    }
}

#[test]
fn mpg_bias_decays_linearly() {
    let game = make_rps();
    let x = rps_point();
    let truth = game.pseudo_gradient(&x).unwrap();
    let deltas = [0.2, 0.1, 0.05, 0.025];
    let biases: Vec<f64> = deltas
        .iter()
        .enumerate()
        .map(|(s, d)| {
            let (mean, _) = estimate_moments(&game, &x, *d, 10, 100_000, 20 + s as u64);
            distance(&mean, &truth)
        })
        .collect();
    let slope = loglog_slope(&deltas, &biases);
    assert!(slope >= 0.8, "slope {slope} from {biases:?}");
}

#[test]
fn mpg_variance_decays_with_samples() {
    let game = make_rps();
    let x = rps_point();
    let ts = [10.0, 20.0, 40.0, 80.0];
    let vars: Vec<f64> = ts
        .iter()
        .enumerate()
        .map(|(s, t)| {
            estimate_moments(&game, &x, 0.05, *t as usize, 10_000, 30 + s as u64)
                .1
                .iter()
                .sum::<f64>()
        })
        .collect();
    let slope = loglog_slope(&ts, &vars);
    assert!(slope <= -0.8, "slope {slope} from {vars:?}");
}

/// `|grad_y J^a|` over the joint transformed variable, maximized over the
/// vertices of the product of triangles (the gradient is affine).
fn rps_gradient_sup() -> [f64; 2] {
    let vertices = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
    let mut sup = [0.0f64; 2];
    for ya in &vertices {
        for yb in &vertices {
            let (xa, xb) = (phi(ya), phi(yb));
            // J^a = -xa' A xb, J^b = -J^a.
            let mut ga = [0.0; 3];
            let mut gb = [0.0; 3];
            for r in 0..3 {
                for c in 0..3 {
                    ga[r] -= PAYOFF_A[r][c] * xb[c];
                    gb[c] -= PAYOFF_A[r][c] * xa[r];
                }
            }
            let full = [rps_pushforward(&ga), rps_pushforward(&gb)];
            let n = (full[0][0].powi(2) + full[0][1].powi(2) + full[1][0].powi(2) + full[1][1].powi(2)).sqrt();
            sup[0] = sup[0].max(n);
            sup[1] = sup[1].max(n);
        }
    }
    sup
}

#[test]
fn single_sample_terms_are_bounded() {
    let game = make_rps();
    let sup = rps_gradient_sup();
    let players = 2.0f64;
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..2000 {
        let x = game.action(game.product_set().sample(&mut rng)).unwrap();
        let delta = rng.random_range(0.001..0.29);
        let bundle = mpg_estimate(&game, &x, &PerturbationSpec::new(delta, 1), &mut rng).unwrap();
        for i in 0..2 {
            let term = norm(&bundle.estimate[2 * i..2 * i + 2]);
            let bound = 2.0 * players.sqrt() * 2.0 * sup[i];
            assert!(term <= bound * (1.0 + 1e-9), "term {term} bound {bound}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn perturbed_points_remain_feasible(
        seed in any::<u64>(),
        frac in 0.0f64..=1.0,
        simplex in any::<bool>(),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let set = if simplex {
            FeasibleSet::transformed_simplex(3).unwrap()
        } else {
            FeasibleSet::new_box(vec![-1.0, 0.0, 2.0], vec![1.0, 0.5, 5.0]).unwrap()
        };
        let x = set.sample(&mut rng);
        let delta = frac * set.interior_ball().radius;
        let u = sample_unit_sphere(&mut rng, 3).unwrap();
        let out = perturb(&x, &set, delta, &u).unwrap();
        prop_assert!(set.contains(&out));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn every_played_action_is_feasible(seed in any::<u64>(), frac in 0.01f64..=1.0) {
        let game = make_rps();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = game.action(game.product_set().sample(&mut rng)).unwrap();
        let delta = frac * game.set(0).interior_ball().radius;
        let bundle = mpg_estimate(&game, &x, &PerturbationSpec::new(delta, 8), &mut rng).unwrap();
        prop_assert_eq!(bundle.actions.len(), 9);
        for a in &bundle.actions {
            prop_assert!(game.contains(a));
        }
    }
}
