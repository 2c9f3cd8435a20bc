use fractune::fixtures;
use fractune::io::{parse_data_csv, parse_model_json, write_data_csv, ModelFile};
use fractune::lti::{FrequencyEval, RationalTf};
use fractune::modred::{reduce, ReducedModel, ReductionSettings, Template};
use fractune::sysid::{
    estimate, generate_stepback_data, EstimatorSpec, NoiseSpec, StepbackScenario,
};
use fractune::tuner::{
    achieved_spec, spec_residuals, tune_fopid, verify_isodamping, SimulationSettings,
};

#[test]
fn stepback_data_survives_csv() {
    let plant = fixtures::plant("30_100").unwrap().identified();
    let data = generate_stepback_data(&plant, &StepbackScenario::default(), &NoiseSpec::colored(3))
        .unwrap();
    let back = parse_data_csv(&write_data_csv(&data)).unwrap();
    assert_eq!(back.u(), data.u());
    assert_eq!(back.y(), data.y());
}

#[test]
fn identified_model_fits_noisy_stepback() {
    let plant = fixtures::plant("30_100").unwrap().identified();
    let data = generate_stepback_data(&plant, &StepbackScenario::default(), &NoiseSpec::colored(5))
        .unwrap();
    let m = estimate(&data, &EstimatorSpec::oe(3, 3, 1)).unwrap();
    let g = m.to_continuous().unwrap();
    let rel = (g.dc_gain().unwrap() - plant.dc_gain().unwrap()).abs() / plant.dc_gain().unwrap();
    assert!(rel < 0.2, "dc gain off by {rel}");
}

#[test]
fn first_order_source_reduces_to_itself() {
    let source = RationalTf::from_descending(&[2.0], &[4.0, 1.0]).unwrap();
    let settings = ReductionSettings {
        n_starts: 2,
        ..ReductionSettings::default()
    };
    let r = reduce(&source, Template::Nioptd1, &settings).unwrap();
    let ReducedModel::Nioptd1(p) = r.params else {
        panic!("wrong family")
    };
    assert!((p.alpha - 1.0).abs() < 1e-2, "alpha {}", p.alpha);
    assert!(
        (p.k - 2.0).abs() < 1e-2 && (p.t - 4.0).abs() < 5e-2,
        "{p:?}"
    );
    assert!(r.j_normalized < 1e-2);
}

#[test]
fn model_file_carries_a_fixture_plant() {
    let fx = fixtures::plant("50_80").unwrap();
    let g = fx.nioptd2().to_fractional_tf().unwrap();
    let text = serde_json::to_string_pretty(&ModelFile::from_fractional(&g)).unwrap();
    let back = parse_model_json(&text).unwrap().to_fractional().unwrap();
    for w in [0.01, 0.3, 1.0, 7.0] {
        assert_eq!(g.response_at(w), back.response_at(w));
    }
}

#[test]
fn tuned_loop_meets_its_spec_and_settles() {
    let plant = fixtures::plant("30_100")
        .unwrap()
        .nioptd2()
        .to_fractional_tf()
        .unwrap();
    let published = fixtures::controllers().fopid;
    let spec = achieved_spec(&plant, &published, 1.0, 100.0, 0.01).unwrap();
    let report = tune_fopid(&plant, &spec, &published).unwrap();
    assert!(report.converged, "{report:?}");
    let r = spec_residuals(&plant, &report.params, &spec).unwrap();
    assert!(r.iter().all(|v| v.abs() < 1e-5), "{r:?}");

    let sim = SimulationSettings {
        t_final: 120.0,
        ..SimulationSettings::default()
    };
    let iso = verify_isodamping(&plant, &report.params, &[1.0], &sim).unwrap();
    let m = &iso.per_scale[0];
    assert!(m.stable);
    assert!(m.steady_state_error_pct.unwrap() < 1.0, "{m:?}");
}
