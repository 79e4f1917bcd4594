//! Monte Carlo estimates against the closed-form predictions.

use multipixel::modes::ProbabilityMethod;
use multipixel::prelude::*;
use multipixel::run::{emit_plot_data, run, PlotQuantity, ResultTable, RunConfig, StateKind};

const K_SE: f64 = 3.0;

fn camera() -> (PixelGrid, PixelProbabilities, DiscreteMoments) {
    let grid = PixelGrid::new(5, 1.0).unwrap();
    let p = pixel_probabilities(&SpatialMode::gaussian(2.0).unwrap(), &grid, ProbabilityMethod::Intensity).unwrap();
    let dm = discrete_moments(&p, &grid).unwrap();
    (grid, p, dm)
}

fn summary(state: PhotonState, runs: usize, seed: u64) -> ExperimentSummary {
    let (grid, p, _) = camera();
    ExperimentSetup::new(grid, PhotonNumberDistribution::new(state), &p, &DetectorModel::ideal(), runs)
        .unwrap()
        .run(&Substream::new(seed))
        .summarize()
        .unwrap()
}

#[test]
fn coherent_width_variance_within_three_se() {
    let (_, _, dm) = camera();
    let st = PhotonState::coherent(100.0).unwrap();
    let mc = summary(st, 100_000, 1);
    let theory = discrete_width_prediction(&st.moments(), &dm, Normalization::Renormalized).unwrap();
    let est = mc.width_normalized_variance;
    assert!((est.value - theory.normalized_variance).abs() < K_SE * est.se, "{est:?} vs {theory:?}");
    assert!((mc.width_mean.value - theory.mean).abs() < K_SE * mc.width_mean.se);
}

#[test]
fn fock_position_variance_within_three_se() {
    let (_, _, dm) = camera();
    let mc = summary(PhotonState::fock(100), 100_000, 2);
    let est = mc.position_x_variance;
    assert!((est.value - dm.d_x / 100.0).abs() < K_SE * est.se, "{est:?}");
}

#[test]
fn squeezed_vacuum_width_noise_exceeds_thermal() {
    let (_, _, dm) = camera();
    let st = PhotonState::squeezed_with_mean(50.0).unwrap();
    let mc = summary(st, 100_000, 3);
    let theory = discrete_width_prediction(&st.moments(), &dm, Normalization::Renormalized).unwrap();
    let est = mc.width_normalized_variance;
    assert!((est.value - theory.normalized_variance).abs() < K_SE * est.se, "{est:?} vs {theory:?}");
    let thermal = summary(PhotonState::thermal(50.0).unwrap(), 100_000, 4).width_normalized_variance;
    assert!(est.value > thermal.value);
}

#[test]
fn displaced_beam_position_variance_depends_on_state() {
    let grid = PixelGrid::new(5, 1.0).unwrap();
    let mode = SpatialMode::gaussian_at(2.0, 1.0, -0.5).unwrap();
    let p = pixel_probabilities(&mode, &grid, ProbabilityMethod::Amplitude).unwrap();
    let dm = discrete_moments(&p, &grid).unwrap();
    for (k, st) in [PhotonState::fock(60), PhotonState::coherent(60.0).unwrap(), PhotonState::thermal(60.0).unwrap()]
        .into_iter()
        .enumerate()
    {
        let mc = ExperimentSetup::new(grid, PhotonNumberDistribution::new(st), &p, &DetectorModel::ideal(), 100_000)
            .unwrap()
            .run(&Substream::new(10 + k as u64))
            .summarize()
            .unwrap();
        let theory = discrete_position_prediction(&st.moments(), &dm, Normalization::Renormalized).unwrap();
        for (est, t) in [(mc.position_x_variance, theory.variance_x), (mc.position_y_variance, theory.variance_y)] {
            assert!((est.value - t).abs() < K_SE * est.se, "{st:?}: {est:?} vs {t}");
        }
        assert!((mc.position_x_mean.value - theory.mean_x).abs() < K_SE * mc.position_x_mean.se);
    }
}

fn sweep(state: StateKind, nbar: Vec<f64>, efficiency: Vec<f64>, seed: u64) -> ResultTable {
    let config = RunConfig {
        state,
        nbar,
        efficiency,
        runs: 100_000,
        repetitions: 0,
        seed: Some(seed),
        prob_method: ProbabilityMethod::Intensity,
        dark_rate: 10.0,
        exposure: 300e-9,
        ..RunConfig::default()
    };
    run(&config).unwrap().table
}

#[test]
fn efficiency_sweep_table_agrees_with_theory() {
    let table = sweep(StateKind::Fock, vec![25.0, 100.0, 400.0], vec![1.0, 0.9, 0.5], 5);
    assert_eq!(table.rows.len(), 9);
    for r in &table.rows {
        let pairs = [
            (r.width_mean_mc, r.width_mean_mc_se, r.width_mean_discrete),
            (r.width_nvar_mc, r.width_nvar_mc_se, r.width_nvar_discrete),
            (r.pos_x_var_mc, r.pos_x_var_mc_se, r.pos_x_var_discrete),
            (r.pos_y_var_mc, r.pos_y_var_mc_se, r.pos_y_var_discrete),
        ];
        for (mc, se, theory) in pairs {
            assert!((mc - theory).abs() < K_SE * se, "nbar {} eta {}: {mc} +- {se} vs {theory}", r.nbar, r.efficiency);
        }
    }
}

fn parse_plot(text: &str) -> Vec<(String, f64, f64, f64)> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    reader
        .records()
        .map(|r| {
            let r = r.unwrap();
            (r[0].to_string(), r[1].parse().unwrap(), r[2].parse().unwrap(), r[3].parse().unwrap())
        })
        .collect()
}

#[test]
fn width_noise_series_decrease_with_photon_number() {
    for (k, state) in [StateKind::Fock, StateKind::Coherent, StateKind::Thermal].into_iter().enumerate() {
        let table = sweep(state, vec![10.0, 100.0, 1000.0], vec![1.0], 20 + k as u64);
        let series = parse_plot(&emit_plot_data(&table, PlotQuantity::WidthNoise).unwrap());
        assert_eq!(series.len(), 3);
        assert!(series.iter().all(|s| s.0 == format!("{state} eta=1")));
        for w in series.windows(2) {
            assert!(w[1].2 < w[0].2, "{state}: {series:?}");
        }
    }
}

#[test]
fn coherent_mean_width_is_flat_in_photon_number() {
    let table = sweep(StateKind::Coherent, vec![10.0, 100.0, 1000.0], vec![1.0], 30);
    let series = parse_plot(&emit_plot_data(&table, PlotQuantity::Means).unwrap());
    let d = table.rows[0].width_mean_discrete;
    for (_, _, value, error) in &series {
        assert!((value - d).abs() < K_SE * error, "{value} +- {error} vs {d}");
    }
}
