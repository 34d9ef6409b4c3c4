use gausscard::experiments::config::SweepConfig;
use gausscard::experiments::convergence::{measure_level, Operator};
use gausscard::experiments::targets::TargetFunction;
use gausscard::interpolator::{interpolate_grid_spectral, Padding, SampledField, SpectralOptions};
use gausscard::lagrange::{chi_table, GridSpec};
use gausscard::norms::PNorm;
use gausscard::MultiplierContext;

#[test]
fn delta_data_reproduce_the_lagrange_table() {
    for h in [1.0, 0.5, 0.25] {
        let n = (8.0 / h) as usize;
        let grid = GridSpec::new(h, 1, 32, 12.0).unwrap();
        let table = chi_table(&grid, 8).unwrap();
        let field = SampledField::delta(grid, n).unwrap();
        let ctx = MultiplierContext::new(h, 1).unwrap();
        let opts = SpectralOptions { fine_factor: 8, beta_radius: 3, padding: Padding::Auto };
        let out = interpolate_grid_spectral(&field, &ctx, &opts).unwrap();
        let values = out.grid_values();
        let mut worst = 0.0f64;
        for (i, v) in values.data.iter().enumerate() {
            let x = values.coordinate(i);
            worst = worst.max((v - table.chi_1d(x)).abs());
        }
        assert!(worst < 1e-8, "h = {h}: max deviation {worst:e}");
    }
}

#[test]
fn error_does_not_grow_with_the_fine_factor() {
    let targets = [TargetFunction::bspline(3, 1).unwrap(), TargetFunction::gaussian(0.05, 1).unwrap()];
    for target in &targets {
        for h in [0.25, 0.125] {
            let errors: Vec<f64> = [2usize, 4, 8, 16]
                .iter()
                .map(|&m| {
                    let cfg = SweepConfig { fine_factor: m, box_radius: 6.0, ..Default::default() };
                    measure_level(target, Operator::Interp, h, PNorm::Finite(2.0), 1, &cfg).unwrap().error
                })
                .collect();
            for w in errors.windows(2) {
                assert!(w[1] <= w[0] + 1e-10, "{} h = {h}: {errors:?}", target.id);
            }
        }
    }
}
