use knn_cluster_tree::graph::GraphKind;
use knn_cluster_tree::synth::MixtureSpec;
use knn_cluster_tree::Pipeline;

#[test]
fn gaussian_sample_moments() {
    let d = 3;
    let points = MixtureSpec::standard_normal(d).sample(100_000, 11).unwrap();
    let n = points.len() as f64;
    for axis in 0..d {
        let mean = points.iter().map(|p| p[axis]).sum::<f64>() / n;
        let var = points.iter().map(|p| (p[axis] - mean).powi(2)).sum::<f64>() / n;
        assert!(mean.abs() < 0.02, "axis {axis} mean {mean}");
        assert!((var - 1.0).abs() < 0.02, "axis {axis} variance {var}");
    }
}

#[test]
fn five_mode_weights() {
    let spec = MixtureSpec::five_modes(7).unwrap();
    let (_, labels) = spec.sample_labeled(100_000, 5).unwrap();
    for c in 0..5 {
        let share = labels.iter().filter(|&&l| l == c).count() as f64 / labels.len() as f64;
        assert!((share - 0.2).abs() < 0.01, "component {c} share {share}");
    }
}

#[test]
fn two_mode_density_integrates_to_one() {
    let spec = MixtureSpec::two_modes();
    let step = 0.05;
    let mut total = 0.0;
    let mut x = -8.0;
    while x <= 9.0 {
        let mut y = -8.0;
        while y <= 12.0 {
            total += spec.density(&[x, y]) * step * step;
            y += step;
        }
        x += step;
    }
    assert!((total - 1.0).abs() < 0.01, "integral {total}");
}

#[test]
fn estimate_tracks_gaussian_density() {
    let spec = MixtureSpec::standard_normal(2);
    let peak = 1.0 / (2.0 * std::f64::consts::PI);
    for seed in 0..10 {
        let points = spec.sample(5000, seed).unwrap();
        let run = Pipeline::run(points, 31, GraphKind::Knn, 1.0).unwrap();
        let mean_error = run
            .points
            .iter()
            .zip(run.density.values())
            .map(|(p, &f)| (f - spec.density(p)).abs())
            .sum::<f64>()
            / run.points.len() as f64;
        assert!(mean_error < 0.25 * peak, "seed {seed}: mean error {mean_error}");
    }
}
