use adaptifont_core::fontgen::FontCoordinates;
use adaptifont_core::optimizer::{
    fit_hyperparams, integrated_variance, matern52, propose, AcquisitionConfig, FeasibleRegion, FitOptions, GpState,
    KernelParams, LogLikelihood, Observation, TargetScaling, VarianceProbe,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// Matérn 5/2 written out in terms of `s = r/ℓ` with `powi`.
fn matern_by_hand(r: f64, l: f64, sf2: f64) -> f64 {
    let s = r / l;
    let root5 = 5f64.sqrt();
    sf2 * (1.0 + root5 * s + (5.0 / 3.0) * s.powi(2)) * (-root5 * s).exp()
}

/// Solves `a x = b` by Gauss–Jordan elimination with partial pivoting.
fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in 0..n {
            if row != col {
                let f = a[row][col] / a[col][col];
                for k in col..n {
                    a[row][k] -= f * a[col][k];
                }
                b[row] -= f * b[col];
            }
        }
    }
    (0..n).map(|i| b[i] / a[i][i]).collect()
}

fn dense_posterior(obs: &[Observation], p: &KernelParams, s: &TargetScaling, x: &[f64; 3]) -> (f64, f64) {
    let k = |a: &[f64; 3], b: &[f64; 3]| {
        let r = a.iter().zip(b).map(|(u, v)| (u - v) * (u - v)).sum::<f64>().sqrt();
        matern_by_hand(r, p.length_scale, p.signal_variance)
    };
    let gram: Vec<Vec<f64>> = obs
        .iter()
        .enumerate()
        .map(|(i, a)| {
            obs.iter()
                .enumerate()
                .map(|(j, b)| k(&a.c.0, &b.c.0) + if i == j { p.noise } else { 0.0 })
                .collect()
        })
        .collect();
    let y: Vec<f64> = obs.iter().map(|o| (o.wpm - s.mean) / s.sd).collect();
    let kstar: Vec<f64> = obs.iter().map(|o| k(x, &o.c.0)).collect();
    let alpha = dense_solve(gram.clone(), y);
    let v = dense_solve(gram, kstar.clone());
    let mean = kstar.iter().zip(&alpha).map(|(a, b)| a * b).sum::<f64>();
    let var = p.signal_variance - kstar.iter().zip(&v).map(|(a, b)| a * b).sum::<f64>();
    (s.mean + s.sd * mean, var.max(0.0) * s.sd * s.sd)
}

fn random_obs(rng: &mut ChaCha8Rng, n: usize) -> Vec<Observation> {
    let region = FeasibleRegion::default();
    (0..n)
        .map(|_| Observation {
            c: region.sample(rng).unwrap(),
            wpm: rng.random_range(50.0..350.0),
        })
        .collect()
}

#[test]
fn matern_matches_hand_written_form() {
    let p = KernelParams {
        length_scale: 1.0,
        signal_variance: 1.0,
        noise: 1e-3,
    };
    let x = [0.0, 0.0, 0.0];
    assert!((matern52(&x, &[1.0, 0.0, 0.0], &p) - matern_by_hand(1.0, 1.0, 1.0)).abs() < 1e-12);
    assert_eq!(matern52(&x, &x, &p), 1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..200 {
        let a: [f64; 3] = [0, 1, 2].map(|_| rng.random_range(0.0..13.0));
        let b: [f64; 3] = [0, 1, 2].map(|_| rng.random_range(0.0..13.0));
        let q = KernelParams {
            length_scale: rng.random_range(0.1..10.0),
            signal_variance: rng.random_range(0.1..5.0),
            noise: 1e-3,
        };
        let r = a.iter().zip(&b).map(|(u, v)| (u - v) * (u - v)).sum::<f64>().sqrt();
        assert!((matern52(&a, &b, &q) - matern_by_hand(r, q.length_scale, q.signal_variance)).abs() < 1e-12);
    }
}

#[test]
fn kernel_decays_with_distance() {
    let p = KernelParams::default();
    let vals: Vec<f64> = (0..200)
        .map(|i| matern52(&[0.0; 3], &[i as f64 * 0.1, 0.0, 0.0], &p))
        .collect();
    assert!(vals.windows(2).all(|w| w[1] < w[0]));
    assert!(*vals.last().unwrap() < 1e-6);
}

#[test]
fn posterior_matches_dense_solve_on_three_point_fixtures() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let obs = random_obs(&mut rng, 3);
        let params = KernelParams {
            length_scale: rng.random_range(0.5..5.0),
            signal_variance: rng.random_range(0.5..2.0),
            noise: 1e-3,
        };
        let gp = GpState::fitted_scaling(obs.clone(), params).unwrap();
        for _ in 0..10 {
            let x: [f64; 3] = [0, 1, 2].map(|_| rng.random_range(0.0..13.0));
            let post = gp.posterior(&FontCoordinates(x));
            let (mean, var) = dense_posterior(&obs, &params, gp.scaling(), &x);
            assert!(
                (post.mean - mean).abs() < 1e-9 * mean.abs().max(1.0),
                "{} vs {}",
                post.mean,
                mean
            );
            assert!(
                (post.variance - var).abs() < 1e-9 * var.abs().max(1.0),
                "{} vs {}",
                post.variance,
                var
            );
        }
    }
}

#[test]
fn gram_matrices_factorize() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for n in [10, 50, 200] {
        let obs = random_obs(&mut rng, n);
        for l in [0.1, 1.0, 10.0, 100.0] {
            let params = KernelParams {
                length_scale: l,
                ..KernelParams::default()
            };
            assert!(GpState::fitted_scaling(obs.clone(), params).is_ok(), "n={n} l={l}");
        }
    }
}

#[test]
fn recovers_length_scale_of_sampled_gp() {
    let true_l = 2.0;
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let n = 60;
    let xs: Vec<[f64; 3]> = (0..n).map(|_| [0, 1, 2].map(|_| rng.random_range(0.0..8.0))).collect();
    // lower Cholesky factor of the true covariance, computed here
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let r = xs[i]
                .iter()
                .zip(&xs[j])
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            let mut s = matern_by_hand(r, true_l, 1.0) + if i == j { 1e-6 } else { 0.0 };
            for k in 0..j {
                s -= l[i][k] * l[j][k];
            }
            l[i][j] = if i == j { s.sqrt() } else { s / l[j][j] };
        }
    }
    let z: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
    let obs: Vec<Observation> = (0..n)
        .map(|i| Observation {
            c: FontCoordinates(xs[i]),
            wpm: 200.0 + 30.0 * (0..=i).map(|k| l[i][k] * z[k]).sum::<f64>(),
        })
        .collect();
    let fit = fit_hyperparams(&obs, KernelParams::default(), &FitOptions::default()).unwrap();
    let ratio = fit.params.length_scale / true_l;
    assert!(
        (0.5..=2.0).contains(&ratio),
        "recovered ℓ = {}",
        fit.params.length_scale
    );
}

#[test]
fn fitted_gradient_vanishes_off_bounds() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..5 {
        let obs = random_obs(&mut rng, 25);
        let opts = FitOptions::default();
        let fit = fit_hyperparams(&obs, KernelParams::default(), &opts).unwrap();
        let lml = LogLikelihood::new(&obs, &fit.scaling, fit.params.noise);
        let theta = [fit.params.length_scale.ln(), fit.params.signal_variance.ln()];
        // central differences, not the analytic gradient
        let h = 1e-5;
        let bounds = [opts.bounds.length_scale, opts.bounds.signal_variance];
        for i in 0..2 {
            let (mut up, mut down) = (theta, theta);
            up[i] += h;
            down[i] -= h;
            let g = (lml.evaluate(up).unwrap().value - lml.evaluate(down).unwrap().value) / (2.0 * h);
            let v = theta[i].exp();
            let at_bound = (v / bounds[i].0 - 1.0).abs() < 1e-6 || (v / bounds[i].1 - 1.0).abs() < 1e-6;
            assert!(at_bound || g.abs() < 1e-3, "component {i}: gradient {g} at {v}");
        }
    }
}

#[test]
fn empty_state_integrates_prior_variance() {
    let s = 2.5;
    let gp = GpState::new(KernelParams {
        signal_variance: s,
        ..KernelParams::default()
    });
    let probe = VarianceProbe::default();
    let iv = integrated_variance(&gp, &FontCoordinates::new(4.0, 4.0, 4.0), &probe);
    let exact = s * 4.0 / 3.0 * std::f64::consts::PI * probe.radius.powi(3);
    assert!((iv.value - exact).abs() <= 3.0 * iv.std_error + 1e-12 * exact);
}

#[test]
fn integrated_variance_seeds_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let gp = GpState::fitted_scaling(random_obs(&mut rng, 15), KernelParams::default()).unwrap();
    let c = gp.observations()[3].c;
    let a = integrated_variance(
        &gp,
        &c,
        &VarianceProbe {
            seed: 1,
            ..VarianceProbe::default()
        },
    );
    let b = integrated_variance(
        &gp,
        &c,
        &VarianceProbe {
            seed: 2,
            ..VarianceProbe::default()
        },
    );
    let combined = (a.std_error.powi(2) + b.std_error.powi(2)).sqrt();
    assert!((a.value - b.value).abs() <= 3.0 * combined);
}

fn coords() -> impl Strategy<Value = [f64; 3]> {
    [0.0..13.0f64, 0.0..13.0f64, 0.0..13.0f64]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn variance_never_increases_when_conditioning(seed in any::<u64>(), n in 0usize..12, new in coords(), wpm in 0.0..400.0f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let params = KernelParams {
            length_scale: rng.random_range(0.3..6.0),
            signal_variance: rng.random_range(0.2..3.0),
            noise: 1e-3,
        };
        let gp = GpState::fitted_scaling(random_obs(&mut rng, n), params).unwrap();
        let next = gp.condition(Observation { c: FontCoordinates(new), wpm }).unwrap();
        for _ in 0..100 {
            let x = FontCoordinates([0, 1, 2].map(|_| rng.random_range(0.0..13.0)));
            prop_assert!(next.posterior(&x).variance <= gp.posterior(&x).variance + 1e-9);
        }
    }

    #[test]
    fn shifting_targets_shifts_mean_and_keeps_argmax(seed in any::<u64>(), shift in -40.0..400.0f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let obs = random_obs(&mut rng, 8);
        let params = KernelParams { length_scale: 2.0, signal_variance: 1.0, noise: 1e-3 };
        let scaling = TargetScaling { mean: 180.0, sd: 60.0 };
        let shifted: Vec<Observation> = obs.iter().map(|o| Observation { c: o.c, wpm: o.wpm + shift }).collect();
        let shifted_scaling = TargetScaling { mean: scaling.mean + shift, ..scaling };
        let a = GpState::with_observations(obs, params, scaling).unwrap();
        let b = GpState::with_observations(shifted, params, shifted_scaling).unwrap();
        for _ in 0..20 {
            let x = FontCoordinates([0, 1, 2].map(|_| rng.random_range(0.0..13.0)));
            prop_assert!((b.posterior(&x).mean - a.posterior(&x).mean - shift).abs() < 1e-9 * (1.0 + shift.abs()));
        }
        let config = AcquisitionConfig { n_candidates: 64, refine_steps: 10, n_init_random: 0, ..AcquisitionConfig::default() };
        let region = FeasibleRegion::default();
        let pa = propose(&a, &region, &config, 3).unwrap();
        let pb = propose(&b, &region, &config, 3).unwrap();
        prop_assert!(pa.c.distance(&pb.c) < 1e-6);
    }

    #[test]
    fn proposals_are_feasible(seed in any::<u64>(), n in 0usize..6, call in 0u64..30) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let gp = GpState::fitted_scaling(random_obs(&mut rng, n), KernelParams::default()).unwrap();
        let config = AcquisitionConfig { n_candidates: 32, seed, ..AcquisitionConfig::default() };
        let p = propose(&gp, &FeasibleRegion::default(), &config, call).unwrap();
        let c = p.c.0;
        prop_assert!(c.iter().all(|&v| (0.0..=13.0).contains(&v)));
        let s = c[0] + c[1] + c[2];
        prop_assert!((7.0..=20.0).contains(&s));
    }

    #[test]
    fn projection_lands_in_region(x in [-30.0..40.0f64, -30.0..40.0f64, -30.0..40.0f64]) {
        let region = FeasibleRegion::default();
        let p = region.project(&FontCoordinates(x));
        prop_assert!(region.contains(&p));
    }
}
