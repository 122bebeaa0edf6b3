//! Photon-block truncation behavior: successive P_1w differences shrink
//! monotonically once past the coupling support, and the auto-converge
//! policy stops at the first doubling below tolerance.

use floqpol::{
    fourier_components, initial_expansion, solve_fixed, solve_floquet, two_level_model,
    FieldConfig, TruncationConfig,
};

fn p1_at(n_max: usize, f: f64, w: f64) -> f64 {
    let model = two_level_model(1.0, 1.0, 0.0, 0.0).unwrap();
    let field = FieldConfig::new(f, w).unwrap();
    let sol = solve_fixed(&model, &field, &TruncationConfig::fixed(n_max).unwrap()).unwrap();
    let init = initial_expansion(&sol, 1).unwrap();
    fourier_components(&sol, &init, &model, 1)[1]
}

#[test]
fn p1_differences_shrink_monotonically() {
    // Strong enough field that N = 2 is visibly unconverged.
    let (f, w) = (0.2, 0.9);
    let ladder = [2_usize, 4, 8, 16, 32];
    let p1: Vec<f64> = ladder.iter().map(|&n| p1_at(n, f, w)).collect();
    let diffs: Vec<f64> = p1.windows(2).map(|p| (p[1] - p[0]).abs()).collect();

    assert!(
        diffs[0] > 1e-4,
        "expected visible truncation error at N=2, got {:.3e}",
        diffs[0]
    );
    // Monotone decrease until the differences sink into rounding noise.
    for pair in diffs.windows(2) {
        if pair[0] <= 1e-12 {
            break;
        }
        assert!(
            pair[1] < pair[0],
            "truncation differences not decreasing: {:.3e} -> {:.3e}",
            pair[0],
            pair[1]
        );
    }
    assert!(diffs.last().unwrap() < &1e-10);
}

#[test]
fn auto_converge_doubles_until_tolerance() {
    let model = two_level_model(1.0, 1.0, 0.0, 0.0).unwrap();
    let field = FieldConfig::new(0.2, 0.9).unwrap();
    let trunc = TruncationConfig::new(2, true, 1e-8).unwrap();
    let sol = solve_floquet(&model, &field, &trunc).unwrap();
    // 2 -> 4 -> 8 -> 16: the 8 -> 16 step is the first below 1e-8.
    assert_eq!(sol.n_max(), 16);

    let init = initial_expansion(&sol, 1).unwrap();
    let p1 = fourier_components(&sol, &init, &model, 1)[1];
    let reference = p1_at(32, 0.2, 0.9);
    assert!(
        (p1 - reference).abs() <= 1e-8,
        "converged P_1w off by {:.3e}",
        (p1 - reference).abs()
    );
}

#[test]
fn fixed_config_ignores_doubling() {
    let model = two_level_model(1.0, 1.0, 0.0, 0.0).unwrap();
    let field = FieldConfig::new(0.2, 0.9).unwrap();
    let sol = solve_floquet(&model, &field, &TruncationConfig::fixed(5).unwrap()).unwrap();
    assert_eq!(sol.n_max(), 5);
}
