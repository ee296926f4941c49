use filter_forge::design::{design_weight, weight_objective, DesignConfig, ParametricWeight};
use filter_forge::optim::fit_filter;
use filter_forge::{gauss_legendre_filter, worst_case_rate, Gap, Objective};

fn gap() -> Gap<f64> {
    Gap::new(0.95).unwrap()
}

#[test]
fn objective_is_the_rate_of_the_standalone_fit() {
    let config = DesignConfig::default();
    let pw = ParametricWeight::<f64>::gamma_slise();
    let objective = Objective::new(pw.realize(), 4).unwrap();
    let fit = fit_filter(&objective, &gauss_legendre_filter(4).unwrap(), None, &config.inner).unwrap();
    let standalone = worst_case_rate(&fit.filter, gap()).unwrap();
    let h = weight_objective(&pw, gap(), 4, &config);
    assert!(h > 0.0);
    assert!((h - standalone).abs() <= 1e-10 * standalone, "{h} vs {standalone}");
}

#[test]
fn enhanced_parameters_beat_gamma_parameters() {
    let config = DesignConfig::default();
    let gamma = weight_objective(&ParametricWeight::gamma_slise(), gap(), 4, &config);
    let enhanced = weight_objective(&ParametricWeight::enhanced_gamma_slise(), gap(), 4, &config);
    assert!(enhanced < gamma, "{enhanced} vs {gamma}");
}

#[test]
fn objective_is_nearly_scale_invariant() {
    let config = DesignConfig::default();
    for pw in [ParametricWeight::<f64>::gamma_slise(), ParametricWeight::enhanced_gamma_slise()] {
        let base = weight_objective(&pw, gap(), 4, &config);
        let scaled = weight_objective(&pw.scaled(10.0).unwrap(), gap(), 4, &config);
        assert!((scaled / base - 1.0).abs() <= 0.01, "{base} vs {scaled}");
    }
}

#[test]
fn breakpoints_follow_the_widths() {
    let pw = ParametricWeight::new([1.0, 0.1, 2.0, 3.0, 0.0], 0.5, 2.5, 4.0).unwrap();
    assert_eq!(pw.realize().breakpoints(), &[0.5, 2.0, 2.5, 4.0]);
}

#[test]
fn short_design_run_is_feasible_and_reproducible() {
    let config = DesignConfig::default().with_budget(12);
    let start = ParametricWeight::<f64>::gamma_slise();
    let first = design_weight(&start, gap(), 2, &config).unwrap();
    let second = design_weight(&start, gap(), 2, &config).unwrap();
    assert_eq!((first.weight, first.objective), (second.weight, second.objective));
    assert_eq!(first.log, second.log);
    assert!(first.log.len() <= 12);
    let start_value = first.log[0].objective;
    assert_eq!(first.log[0].weight, start);
    assert_eq!(start_value, weight_objective(&start, gap(), 2, &config));
    assert!(first.objective <= start_value);
    let best = first.log.iter().map(|r| r.objective).fold(f64::INFINITY, f64::min);
    assert_eq!(first.objective, best);
    for row in &first.log {
        let [w1, w2, w3] = row.weight.widths();
        assert!(0.0 < w1 && w1 < 1.0 && 1.0 / w1 < w2 && w2 < w3);
        assert!(row.weight.heights()[..4].iter().all(|v| *v > 0.0));
        assert_eq!(row.weight.heights()[4], 0.0);
    }
}
