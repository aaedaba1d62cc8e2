use cislunar_core::geometry::{euclidean_distance, line_of_sight, optimal_reflection_angle};
use cislunar_core::linkbudget::{snr, SNR_DB_FLOOR};
use cislunar_core::linkselect::{
    availability_matrix, run_timeseries_with, snapshot, step, visible_links, Execution, Scenario,
    SimError,
};
use cislunar_core::orbital::{llo_state_eci, moon_position, CentralBody, LunarEphemerisModel};
use cislunar_core::ris::{effective_area, AreaMode};

fn short(duration: f64) -> Scenario {
    let mut s = Scenario::reference();
    s.duration = duration;
    s
}

#[test]
fn month_run_has_expected_shape() {
    let s = Scenario::reference();
    assert_eq!(s.step_count(), 39_313);
    let records = run_timeseries_with(&s, Execution::Parallel).unwrap();
    assert_eq!(records.len(), 39_313);
    assert_eq!(records.last().unwrap().time, 27.3 * 86_400.0);
    for (k, r) in records.iter().enumerate() {
        assert_eq!(r.time, k as f64 * 60.0);
        assert!(r.visible_count >= 1 && r.visible_count <= 12);
        let link = r.link.expect("no outage in the reference scenario");
        assert!(link.sample.visible && link.sample.selected);
        assert!(link.snr.snr_db > SNR_DB_FLOOR);
    }
}

#[test]
fn selected_link_is_shortest_visible_pair() {
    let s = short(2.0 * 86_400.0);
    for k in (0..s.step_count()).step_by(37) {
        let t = s.time_at(k);
        let samples = availability_matrix(&s, t).unwrap();
        assert_eq!(samples.len(), 12);
        let shortest = samples
            .iter()
            .filter(|x| x.visible)
            .map(|x| x.distance)
            .fold(f64::INFINITY, f64::min);
        let rec = step(&s, t).unwrap();
        assert_eq!(rec.link.unwrap().sample.distance, shortest);
        let links = visible_links(&s, t).unwrap();
        assert_eq!(links[0].0.distance, shortest);
        assert_eq!(links.len(), rec.visible_count);
    }
}

#[test]
fn snapshot_geometry_is_consistent() {
    let s = Scenario::reference();
    let model = LunarEphemerisModel::default();
    let moon = CentralBody::moon();
    let t = 5.0 * 86_400.0 + 1234.0;
    let snap = snapshot(&s, t).unwrap();
    assert_eq!(snap.moon, moon_position(&model, t));
    for (el, llo) in s.llo_elements.iter().zip(&snap.llo) {
        let direct = llo_state_eci(el, &moon, &model, t).unwrap().position;
        assert_eq!(*llo, direct);
        assert!((euclidean_distance(llo, &snap.moon) - 1837.4).abs() < 1e-6);
    }
    for geo in &snap.geo {
        assert!((geo.norm() - 42_378.1).abs() < 1e-6);
    }
    for sample in availability_matrix(&s, t).unwrap() {
        let geo = &snap.geo[sample.geo_id];
        let llo = &snap.llo[sample.llo_id];
        assert_eq!(
            sample.visible,
            line_of_sight(geo, llo, &snap.moon, moon.radius())
        );
        assert_eq!(sample.distance, euclidean_distance(geo, llo));
    }
}

#[test]
fn selected_record_matches_component_chain() {
    let s = Scenario::reference();
    let t = 3_600.0;
    let rec = step(&s, t).unwrap();
    let link = rec.link.unwrap();
    let snap = snapshot(&s, t).unwrap();
    let geo = snap.geo[link.sample.geo_id];
    let llo = snap.llo[link.sample.llo_id];
    let phi = optimal_reflection_angle(&s.ground_station, &geo, &llo).unwrap();
    assert_eq!(link.geometry.phi_opt, phi);
    let a = effective_area(&s.ris.optimal_for(phi).unwrap(), phi);
    assert_eq!(link.a_eff, a);
    // Fixed total area: A_eff = k·A_max.
    assert!((a.value() - 10.0).abs() < 1e-12);
    let direct = snr(
        &s.budget,
        a,
        euclidean_distance(&s.ground_station, &geo),
        euclidean_distance(&geo, &llo),
    )
    .unwrap();
    assert_eq!(link.snr, direct);
}

#[test]
fn fixed_element_mode_grows_with_count() {
    let mut s = short(0.0);
    s.ris = s
        .ris
        .with_area_mode(AreaMode::FixedElement)
        .with_elements(1000);
    let big = step(&s, 0.0).unwrap().link.unwrap().snr.snr_db;
    s.ris = s.ris.with_elements(10);
    let small = step(&s, 0.0).unwrap().link.unwrap().snr.snr_db;
    assert!((big - small - 20.0).abs() < 1e-9);
}

#[test]
fn fewer_relays_mean_more_outages() {
    let base = short(3.0 * 86_400.0);
    let mut counts = Vec::new();
    for n in 1..=4 {
        let mut s = base.clone();
        s.llo_elements.truncate(n);
        let records = run_timeseries_with(&s, Execution::Parallel).unwrap();
        counts.push(records.iter().filter(|r| r.is_outage()).count());
    }
    assert!(counts[0] > 0);
    assert!(counts.windows(2).all(|w| w[1] <= w[0]), "{counts:?}");
    assert_eq!(counts[3], 0);
}

#[test]
fn time_outside_horizon_is_rejected() {
    let s = short(600.0);
    assert!(matches!(
        step(&s, 601.0),
        Err(SimError::OutsideHorizon { .. })
    ));
    assert!(step(&s, -1.0).is_err());
    let mut bad = s.clone();
    bad.sampling_interval = 0.0;
    assert!(run_timeseries_with(&bad, Execution::Sequential).is_err());
}
