//! Synthetic scenario generators shaped like the three case studies the
//! toolkit is built around: a Baltic loiter-plus-SAR scene, repeated
//! trawler crossings over a northern comm cable, and an Adriatic-style
//! 21-hour blackout over a cable with a radar scene mid-gap.
//!
//! Real AIS archives are licensed and cannot ship with the repo; these
//! generators produce deterministic, seed-controlled stand-ins with the
//! same shapes, plus ground truth for end-to-end verification.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::ais::{AisPoint, Mmsi, NavStatus, OwnershipRisk, ShipType, Timestamp, VesselInfo};
use crate::geo::{GeoPoint, LocalFrame, Polyline};
use crate::ou::sample_velocity_transition;
use crate::sar::SarDetection;
use crate::uci::{UciGeometry, UciKind};

/// Everything a scenario produces, plus ground truth for verification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioBundle {
    pub ais: Vec<AisPoint>,
    pub infos: Vec<VesselInfo>,
    pub ucis: Vec<UciGeometry>,
    pub detections: Vec<SarDetection>,
    pub truth: ScenarioTruth,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioTruth {
    pub vessel_of_interest: Mmsi,
    /// where the vessel of interest actually was at the acquisition time
    /// (hidden from the AIS record)
    pub true_pos_at_acq: Option<GeoPoint>,
    pub t_acq: Option<Timestamp>,
    pub gap: Option<(Timestamp, Timestamp)>,
}

fn pt(lat: f64, lon: f64) -> GeoPoint {
    GeoPoint::new(lat, lon).expect("scenario coordinates are valid")
}

const KN_PER_MPS: f64 = 1.0 / 0.514444;

fn velocity_to_sog_cog(v: [f64; 2]) -> (f64, f64) {
    let speed_mps = (v[0] * v[0] + v[1] * v[1]).sqrt();
    let cog = v[0].atan2(v[1]).to_degrees().rem_euclid(360.0);
    (speed_mps * KN_PER_MPS, cog)
}

fn report(mmsi: Mmsi, t: i64, pos: GeoPoint, v: [f64; 2], status: Option<NavStatus>) -> AisPoint {
    let (sog_kn, cog_deg) = velocity_to_sog_cog(v);
    AisPoint {
        mmsi,
        t: Timestamp(t),
        pos,
        sog_kn,
        cog_deg,
        heading_deg: Some(cog_deg),
        nav_status: status,
    }
}

/// Constant-velocity transit leg with fixed cadence.
fn transit(
    mmsi: Mmsi,
    t0: i64,
    start: GeoPoint,
    v_mps: [f64; 2],
    duration_s: i64,
    cadence_s: i64,
    status: Option<NavStatus>,
) -> Vec<AisPoint> {
    let mut out = Vec::new();
    let mut pos = start;
    let mut t = t0;
    while t <= t0 + duration_s {
        out.push(report(mmsi, t, pos, v_mps, status));
        let frame = LocalFrame::new(pos);
        pos = frame.from_local(v_mps[0] * cadence_s as f64, v_mps[1] * cadence_s as f64);
        t += cadence_s;
    }
    out
}

/// Mean-reverting drift whose consecutive-fix velocities are exact
/// discrete transitions of the process (so the fitted model sees the
/// true dynamics). Returns the reports and the final (position,
/// velocity) state.
#[allow(clippy::too_many_arguments)]
fn ou_drift(
    rng: &mut ChaCha8Rng,
    mmsi: Mmsi,
    t0: i64,
    start: GeoPoint,
    v_start: [f64; 2],
    mu: [f64; 2],
    gamma: [f64; 2],
    sigma: [f64; 2],
    steps: usize,
    cadence_s: i64,
    status: Option<NavStatus>,
    out: Option<&mut Vec<AisPoint>>,
) -> (GeoPoint, [f64; 2], i64) {
    let mut pos = start;
    let mut v = v_start;
    let mut t = t0;
    let mut sink = Vec::new();
    let emit = out.is_some();
    for _ in 0..steps {
        if emit {
            sink.push(report(mmsi, t, pos, v, status));
        }
        let frame = LocalFrame::new(pos);
        pos = frame.from_local(v[0] * cadence_s as f64, v[1] * cadence_s as f64);
        for ax in 0..2 {
            v[ax] = sample_velocity_transition(
                rng,
                mu[ax],
                gamma[ax],
                sigma[ax],
                v[ax],
                cadence_s as f64,
            );
        }
        t += cadence_s;
    }
    if let Some(out) = out {
        out.extend(sink);
    }
    (pos, v, t)
}

fn doppler_like_offset(rng: &mut ChaCha8Rng, pos: GeoPoint, scale_m: f64) -> GeoPoint {
    let frame = LocalFrame::new(pos);
    let e: f64 = rng.gen_range(-scale_m..scale_m);
    let n: f64 = rng.gen_range(-scale_m..scale_m);
    frame.from_local(e, n)
}

/// Baltic-like scene: two parallel pipelines, transiting traffic, one
/// vessel working a search pattern over the lines, one vessel with a
/// sub-six-hour AIS hole around the image time, and a radar scene that
/// pairs with the compliant traffic.
pub fn baltic_loiter(seed: u64) -> ScenarioBundle {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xBA17);
    let day0 = 1_663_632_000i64; // 2022-09-20T00:00:00Z
    let t_acq = day0 + 10 * 3600;

    let pipelines = vec![
        UciGeometry::new(
            "northline-1".into(),
            UciKind::Pipeline,
            Polyline::new(vec![pt(55.2, 14.8), pt(55.2, 16.2)]).unwrap(),
            2.0,
        )
        .unwrap(),
        UciGeometry::new(
            "northline-2".into(),
            UciKind::Pipeline,
            Polyline::new(vec![pt(55.225, 14.8), pt(55.225, 16.2)]).unwrap(),
            2.0,
        )
        .unwrap(),
    ];

    let mut ais = Vec::new();
    let mut infos = Vec::new();
    let mut detections = Vec::new();

    // transiting lanes, east- and west-bound
    let lanes = [
        (55.05, 6.0, 90.0),
        (55.35, 5.5, 90.0),
        (55.5, 7.0, 270.0),
        (54.9, 6.5, 270.0),
        (55.42, 5.0, 90.0),
    ];
    for (k, (lat, speed_mps, cog)) in lanes.iter().enumerate() {
        let mmsi = Mmsi::new(219_000_101 + k as u32).unwrap();
        let heading_e = if *cog < 180.0 { 1.0 } else { -1.0 };
        let v = [heading_e * speed_mps, 0.0];
        let lon0 = if heading_e > 0.0 {
            14.5 + rng.gen_range(0.0..0.3)
        } else {
            16.3 - rng.gen_range(0.0..0.3)
        };
        ais.extend(transit(
            mmsi,
            day0 + (k as i64) * 600,
            pt(*lat, lon0),
            v,
            14 * 3600,
            300,
            Some(NavStatus::UnderWayUsingEngine),
        ));
        infos.push(VesselInfo {
            mmsi,
            name: Some(format!("BALTIC TRADER {k}")),
            ship_type: Some(ShipType::Cargo),
            length_m: Some(rng.gen_range(120.0..220.0)),
            ownership_risk: OwnershipRisk::Low,
        });
    }

    // the vessel of interest: search pattern over the pipelines
    let voi = Mmsi::new(219_000_201).unwrap();
    {
        let mut t = day0 + 3600;
        let mut lat = 55.28; // ~9 km north of northline-1
        for _ in 0..4 {
            // powered approach toward the lines
            for _ in 0..8 {
                ais.push(report(voi, t, pt(lat, 15.4), [0.0, -4.0], None));
                lat -= 0.004;
                t += 300;
            }
            // drift back away
            for _ in 0..8 {
                ais.push(report(voi, t, pt(lat, 15.4), [0.2, 0.8], None));
                lat += 0.0009;
                t += 300;
            }
        }
        infos.push(VesselInfo {
            mmsi: voi,
            name: Some("GREY PELICAN".into()),
            ship_type: Some(ShipType::Other),
            length_m: Some(95.0),
            ownership_risk: OwnershipRisk::High,
        });
    }

    // a vessel with a sub-six-hour hole bracketing the image time
    let gappy = Mmsi::new(219_000_301).unwrap();
    {
        let before = transit(
            gappy,
            day0 + 2 * 3600,
            pt(55.12, 15.0),
            [3.0, 1.0],
            3 * 3600,
            300,
            Some(NavStatus::UnderWayUsingEngine),
        );
        let last = *before.last().unwrap();
        ais.extend(before);
        // five hours of silence, then resume
        let frame = LocalFrame::new(last.pos);
        let resume_pos = frame.from_local(3.0 * 5.0 * 3600.0, 1.0 * 5.0 * 3600.0);
        ais.extend(transit(
            gappy,
            last.t.0 + 5 * 3600,
            resume_pos,
            [3.0, 1.0],
            2 * 3600,
            300,
            Some(NavStatus::UnderWayUsingEngine),
        ));
        infos.push(VesselInfo {
            mmsi: gappy,
            name: Some("SILENT GULL".into()),
            ship_type: Some(ShipType::Cargo),
            length_m: Some(140.0),
            ownership_risk: OwnershipRisk::Medium,
        });
        // its mid-gap radar detection, offset from the dead-reckoned spot
        let mid = LocalFrame::new(last.pos).from_local(
            3.0 * (t_acq - last.t.0) as f64 + 900.0,
            1.0 * (t_acq - last.t.0) as f64 - 600.0,
        );
        detections.push(SarDetection {
            id: "bal-d90".into(),
            image_id: "scene-baltic".into(),
            t_acq: Timestamp(t_acq),
            pos: mid,
        });
    }

    // detections for the lanes that are inside the image at t_acq
    for (k, (lat, speed_mps, cog)) in lanes.iter().enumerate() {
        if k >= 4 {
            continue; // one lane vessel sails outside the image footprint
        }
        let mmsi = Mmsi::new(219_000_101 + k as u32).unwrap();
        let t0 = day0 + (k as i64) * 600;
        let heading_e = if *cog < 180.0 { 1.0 } else { -1.0 };
        let lon0 = ais
            .iter()
            .find(|p| p.mmsi == mmsi)
            .map(|p| p.pos.lon())
            .unwrap();
        let dt = (t_acq - t0) as f64;
        let frame = LocalFrame::new(pt(*lat, lon0));
        let pos = frame.from_local(heading_e * speed_mps * dt, 0.0);
        detections.push(SarDetection {
            id: format!("bal-d{k:02}"),
            image_id: "scene-baltic".into(),
            t_acq: Timestamp(t_acq),
            pos: doppler_like_offset(&mut rng, pos, 400.0),
        });
    }

    ScenarioBundle {
        ais,
        infos,
        ucis: pipelines,
        detections,
        truth: ScenarioTruth {
            vessel_of_interest: voi,
            true_pos_at_acq: None,
            t_acq: Some(Timestamp(t_acq)),
            gap: None,
        },
    }
}

/// Northern-isles cable scenario: a trawler criss-crossing the cable
/// route for days while fishing, and a cargo vessel loitering nearby
/// before leaving the area.
pub fn shetland_crossings(seed: u64) -> ScenarioBundle {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5E7A);
    let day0 = 1_665_014_400i64; // 2022-10-06T00:00:00Z

    let cable = UciGeometry::new(
        "isles-north".into(),
        UciKind::CommCable,
        Polyline::new(vec![pt(59.4, -1.3), pt(59.8, -1.2), pt(60.2, -1.1)]).unwrap(),
        1.0,
    )
    .unwrap();

    let mut ais = Vec::new();
    let mut infos = Vec::new();

    // trawler: slow northward progress, wide east-west tacks across the
    // cable line
    let trawler = Mmsi::new(232_000_401).unwrap();
    {
        let mut t = day0;
        let mut lat = 59.45;
        let mut east = true;
        for _ in 0..12 {
            let lon0 = if east { -1.45 } else { -1.0 };
            let dir = if east { 1.0 } else { -1.0 };
            // ~2 kn east-west tack, 4 h each, drifting north slowly
            for step in 0..48 {
                let frame_pos = pt(lat, lon0 + dir * step as f64 * 0.0045);
                ais.push(report(
                    trawler,
                    t,
                    frame_pos,
                    [dir * 1.1, 0.08],
                    Some(NavStatus::EngagedInFishing),
                ));
                lat += 0.00015;
                t += 300;
            }
            east = !east;
        }
        infos.push(VesselInfo {
            mmsi: trawler,
            name: Some("NORDIC HAUL".into()),
            ship_type: Some(ShipType::Fishing),
            length_m: Some(32.0),
            ownership_risk: OwnershipRisk::Low,
        });
    }

    // cargo vessel loitering on the cable for a day, then leaving
    let cargo = Mmsi::new(232_000_402).unwrap();
    {
        let mut out = Vec::new();
        let (pos, _v, t_end) = ou_drift(
            &mut rng,
            cargo,
            day0 + 6 * 3600,
            pt(59.82, -1.21),
            [0.03, 0.01],
            [0.02, 0.01],
            [2e-4, 2e-4],
            [1e-3, 1e-3],
            24 * 12, // 24 h at 5 min cadence
            300,
            Some(NavStatus::NotUnderCommand),
            Some(&mut out),
        );
        ais.extend(out);
        ais.extend(transit(
            cargo,
            t_end,
            pos,
            [-5.5, -1.0],
            6 * 3600,
            300,
            Some(NavStatus::UnderWayUsingEngine),
        ));
        infos.push(VesselInfo {
            mmsi: cargo,
            name: Some("WESTER HAVEN".into()),
            ship_type: Some(ShipType::Cargo),
            length_m: Some(160.0),
            ownership_risk: OwnershipRisk::Medium,
        });
    }

    ScenarioBundle {
        ais,
        infos,
        ucis: vec![cable],
        detections: Vec::new(),
        truth: ScenarioTruth {
            vessel_of_interest: trawler,
            true_pos_at_acq: None,
            t_acq: None,
            gap: None,
        },
    }
}

/// Drift dynamics of the Adriatic vessel of interest, shared between the
/// generator and tests. Calibrated so the pre-gap drift stays inside the
/// corridor while the fit window carries enough correlation times for a
/// stable reversion estimate.
pub const ADRIATIC_MU: [f64; 2] = [0.005, 0.003];
pub const ADRIATIC_GAMMA: [f64; 2] = [2e-4, 2e-4];
pub const ADRIATIC_SIGMA: [f64; 2] = [4e-4, 4e-4];
/// Length of the pre-blackout drift phase, hours.
pub const ADRIATIC_DRIFT_H: i64 = 36;

/// Adriatic-style scenario: a large vessel drifts over a cable for half
/// a day, goes dark for 21.5 hours, and a radar image is acquired three
/// hours into the blackout. The vessel's hidden mid-gap position is the
/// planted truth; two unknown stationary contacts sit near the cable,
/// and compliant background traffic fills the scene.
pub fn adriatic_gap(seed: u64) -> ScenarioBundle {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xADAC);
    let day0 = 1_671_494_400i64; // 2022-12-20T00:00:00Z

    let ucis = vec![
        UciGeometry::new(
            "strait-comm".into(),
            UciKind::CommCable,
            Polyline::new(vec![pt(40.05, 18.45), pt(40.15, 18.8), pt(40.25, 19.3)]).unwrap(),
            2.0,
        )
        .unwrap(),
        UciGeometry::new(
            "strait-gasline".into(),
            UciKind::Pipeline,
            Polyline::new(vec![pt(40.32, 18.4), pt(40.38, 18.9), pt(40.42, 19.3)]).unwrap(),
            2.0,
        )
        .unwrap(),
    ];

    let mut ais = Vec::new();
    let mut infos = Vec::new();
    let mut detections = Vec::new();

    // vessel of interest: a day and a half of mean-reverting drift on
    // the comm cable, reported every 5 minutes
    let voi = Mmsi::new(247_000_501).unwrap();
    let drift_start = day0 + 4 * 3600;
    let mut voi_points = Vec::new();
    let (gap_start_pos, v_at_gap, gap_start_t) = ou_drift(
        &mut rng,
        voi,
        drift_start,
        pt(40.152, 18.81),
        [ADRIATIC_MU[0], ADRIATIC_MU[1]],
        ADRIATIC_MU,
        ADRIATIC_GAMMA,
        ADRIATIC_SIGMA,
        (ADRIATIC_DRIFT_H * 12) as usize, // 5 min cadence
        300,
        Some(NavStatus::NotUnderCommand),
        Some(&mut voi_points),
    );
    // the last emitted report is one cadence before gap_start_t; the gap
    // opens at the final pre-gap fix
    voi_points.push(report(voi, gap_start_t, gap_start_pos, v_at_gap, None));

    // hidden continuation through the blackout, minute resolution
    let gap_s = (21.5 * 3600.0) as i64;
    let t_acq = gap_start_t + 3 * 3600;
    let mut hidden_pos = gap_start_pos;
    let mut hidden_v = v_at_gap;
    let mut t = gap_start_t;
    let mut true_pos_at_acq = None;
    while t < gap_start_t + gap_s {
        let frame = LocalFrame::new(hidden_pos);
        hidden_pos = frame.from_local(hidden_v[0] * 60.0, hidden_v[1] * 60.0);
        for ax in 0..2 {
            hidden_v[ax] = sample_velocity_transition(
                &mut rng,
                ADRIATIC_MU[ax],
                ADRIATIC_GAMMA[ax],
                ADRIATIC_SIGMA[ax],
                hidden_v[ax],
                60.0,
            );
        }
        t += 60;
        if t == t_acq {
            true_pos_at_acq = Some(hidden_pos);
        }
    }
    let gap_end_t = gap_start_t + gap_s;
    // reports resume from the hidden path's end
    let (resume_pos, resume_v) = (hidden_pos, hidden_v);
    voi_points.push(report(voi, gap_end_t, resume_pos, resume_v, None));
    ais.extend(voi_points);
    ais.extend(transit(
        voi,
        gap_end_t + 300,
        LocalFrame::new(resume_pos).from_local(resume_v[0] * 300.0, resume_v[1] * 300.0),
        [4.0, -2.0],
        2 * 3600,
        300,
        Some(NavStatus::UnderWayUsingEngine),
    ));
    infos.push(VesselInfo {
        mmsi: voi,
        name: Some("LONG SHADOW".into()),
        ship_type: Some(ShipType::Other),
        length_m: Some(140.0),
        ownership_risk: OwnershipRisk::High,
    });

    // compliant background traffic through the strait
    for k in 0..4u32 {
        let mmsi = Mmsi::new(247_000_601 + k).unwrap();
        let southbound = k % 2 == 0;
        let (lat0, v): (f64, [f64; 2]) = if southbound {
            (40.8 - k as f64 * 0.05, [1.0, -6.0])
        } else {
            (39.6 + k as f64 * 0.05, [-1.0, 6.0])
        };
        let lon0 = 18.6 + k as f64 * 0.12;
        ais.extend(transit(
            mmsi,
            day0 + k as i64 * 1800,
            pt(lat0, lon0),
            v,
            30 * 3600,
            300,
            Some(NavStatus::UnderWayUsingEngine),
        ));
        infos.push(VesselInfo {
            mmsi,
            name: Some(format!("STRAIT RUNNER {k}")),
            ship_type: Some(ShipType::Tanker),
            length_m: Some(180.0),
            ownership_risk: OwnershipRisk::Low,
        });
    }

    // the radar scene, three hours into the blackout
    let truth = true_pos_at_acq.expect("acquisition time lies on the minute lattice");
    detections.push(SarDetection {
        id: "adr-d00".into(),
        image_id: "scene-adriatic".into(),
        t_acq: Timestamp(t_acq),
        pos: doppler_like_offset(&mut rng, truth, 250.0),
    });
    // two stationary unknowns hugging the cable, no AIS at all
    detections.push(SarDetection {
        id: "adr-d01".into(),
        image_id: "scene-adriatic".into(),
        t_acq: Timestamp(t_acq),
        pos: pt(40.152, 18.86),
    });
    detections.push(SarDetection {
        id: "adr-d02".into(),
        image_id: "scene-adriatic".into(),
        t_acq: Timestamp(t_acq),
        pos: pt(40.148, 18.9),
    });
    // and the compliant traffic as seen by the radar
    for k in 0..4u32 {
        let t0 = day0 + k as i64 * 1800;
        let southbound = k % 2 == 0;
        let (lat0, v): (f64, [f64; 2]) = if southbound {
            (40.8 - k as f64 * 0.05, [1.0, -6.0])
        } else {
            (39.6 + k as f64 * 0.05, [-1.0, 6.0])
        };
        let lon0 = 18.6 + k as f64 * 0.12;
        let dt = (t_acq - t0) as f64;
        let frame = LocalFrame::new(pt(lat0, lon0));
        let pos = frame.from_local(v[0] * dt, v[1] * dt);
        detections.push(SarDetection {
            id: format!("adr-d1{k}"),
            image_id: "scene-adriatic".into(),
            t_acq: Timestamp(t_acq),
            pos: doppler_like_offset(&mut rng, pos, 350.0),
        });
    }

    ScenarioBundle {
        ais,
        infos,
        ucis,
        detections,
        truth: ScenarioTruth {
            vessel_of_interest: voi,
            true_pos_at_acq: Some(truth),
            t_acq: Some(Timestamp(t_acq)),
            gap: Some((Timestamp(gap_start_t), Timestamp(gap_end_t))),
        },
    }
}
