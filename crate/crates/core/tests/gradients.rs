mod common;

use comic::bnn::VariationalModel;
use comic::numeric::{Matrix, RngStream};
use proptest::prelude::*;

use common::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn analytic_gradients_match_central_differences(
        width in prop::sample::select(vec![1usize, 3, 5]),
        n in prop::sample::select(vec![2usize, 8]),
        seed in any::<u64>(),
        beta in 0.0f64..=1.0,
    ) {
        let mut rng = RngStream::new(seed).tag("model").rng();
        let model = random_model(&mut rng, width);
        let x = normals(&mut rng, n);
        let y = normals(&mut rng, n);
        let (map_err, elbo_err) = gradient_errors(&model, &x, &y, beta, &RngStream::new(seed).tag("noise"));
        prop_assert!(map_err <= GRAD_RTOL, "map relative error {map_err}");
        prop_assert!(elbo_err <= GRAD_RTOL, "elbo relative error {elbo_err}");
    }

    #[test]
    fn kl_matches_independent_closed_form(width in 1usize..10, seed in any::<u64>()) {
        let mut rng = RngStream::new(seed).tag("kl").rng();
        let model = random_model(&mut rng, width);
        let oracle = kl_oracle(&model.hidden) + kl_oracle(&model.output);
        prop_assert!((model.kl() - oracle).abs() <= 1e-12 * oracle.abs().max(1.0));
        prop_assert!(model.kl() >= 0.0);
    }

    #[test]
    fn local_reparam_moments_match_closed_form(seed in any::<u64>(), inputs in 1usize..4, outputs in 1usize..4) {
        let mut rng = RngStream::new(seed).tag("layer").rng();
        let layer = random_layer(&mut rng, inputs, outputs);
        let h = normals(&mut rng, inputs);
        let (mean, var) = layer.output_moments(&Matrix::from_rows(&[&h])).unwrap();
        let draws = 20_000;
        let batch = Matrix::from_fn(draws, inputs, |_, j| h[j]);
        let out = layer.forward_local_reparam(&batch, &RngStream::new(seed).tag("noise")).unwrap().output;
        for k in 0..outputs {
            let col = out.col(k);
            let m = col.iter().sum::<f64>() / draws as f64;
            let v = col.iter().map(|c| (c - m).powi(2)).sum::<f64>() / (draws - 1) as f64;
            prop_assert!((m - mean.get(0, k)).abs() <= 5.0 * (var.get(0, k) / draws as f64).sqrt());
            prop_assert!((v - var.get(0, k)).abs() <= 5.0 * var.get(0, k) * (2.0 / (draws - 1) as f64).sqrt());
        }
    }
}

#[test]
fn one_weight_fixture_gradients_are_exact() {
    let model = SquareWeightModel { mean: 0.7, logvar: -1.3 };
    let mut rng = RngStream::new(1).rng();
    let x = normals(&mut rng, 5);
    let y = normals(&mut rng, 5);
    let stream = RngStream::new(2);
    let with = |p: &[f64]| SquareWeightModel { mean: p[0], logvar: p[1] };
    let (_, g) = model.elbo_objective_flat(&x, &y, 0.4, &stream).unwrap();
    let fd = comic::numeric::finite_diff_grad(
        |p| with(p).elbo_objective_flat(&x, &y, 0.4, &stream).unwrap().0,
        &model.parameters(),
        FD_STEP,
    )
    .unwrap();
    assert!(max_rel_error(&g, &fd) <= GRAD_RTOL, "{g:?} vs {fd:?}");
}
