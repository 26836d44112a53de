mod common;

use common::gradcheck;

fn assert_within(checks: &[gradcheck::Check], tol: f64) {
    for (name, err) in checks {
        assert!(*err <= tol, "{name}: relative error {err:e} > {tol:e}");
    }
}

#[test]
fn each_kernel_matches_finite_differences() {
    for seed in 0..5 {
        assert_within(&gradcheck::all_layers(seed), 1e-5);
    }
}

#[test]
fn whole_network_matches_finite_differences() {
    for seed in [1, 2] {
        let checks = gradcheck::end_to_end(seed);
        // 6 conv/dense weight tensors + 2 per batch-norm layer.
        assert_eq!(checks.len(), 7 + 12);
        assert_within(&checks, 1e-4);
    }
}
