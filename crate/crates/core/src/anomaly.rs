//! Rule-based anomaly detectors over tracks, density context and
//! infrastructure geometry. Each detector is independent — enabling one
//! never changes another's output — and each event carries a severity in
//! [0, 1] plus structured evidence for the evidential layer, where the
//! calibrated judgment lives.
//!
//! Severity formulas are declared heuristics, exposed through
//! [`DetectorConfig`]:
//!
//! * AIS gap: `min(1, duration / 24 h)`, * 1.5 (capped) when a gap
//!   endpoint lies inside a protection corridor.
//! * Loiter: `(1 - normalcy) * min(1, dwell / t_min)` where the loiter
//!   spot scores below the stationary-normalcy gate.
//! * Search pattern: `min(1, cycles / 5)` over alternating powered
//!   approach / drift-away legs.
//! * Zone entry: fixed 0.5 scaled by a per-kind weight.
//! * Route deviation: mean (1 - normalcy) over spans of traffic-grid
//!   normalcy below the threshold.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::ais::{Mmsi, Timestamp, Track};
use crate::density::{normalcy_score, DensityGrid};
use crate::kinematics::{find_gaps, TimeWindow};
use crate::sar::{AnnotatedScene, FlagReason};
use crate::uci::{corridor_intervals, evaluate_candidate, FilterCriteria, UciGeometry, UciKind};

#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize,
)]
#[serde(rename_all = "snake_case")]
pub enum AnomalyKind {
    AisGap,
    LoiterNearUci,
    ZoneEntry,
    RouteDeviation,
    SearchPattern,
    UnassociatedSar,
}

impl AnomalyKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            AnomalyKind::AisGap => "ais_gap",
            AnomalyKind::LoiterNearUci => "loiter_near_uci",
            AnomalyKind::ZoneEntry => "zone_entry",
            AnomalyKind::RouteDeviation => "route_deviation",
            AnomalyKind::SearchPattern => "search_pattern",
            AnomalyKind::UnassociatedSar => "unassociated_sar",
        }
    }

    pub fn parse(s: &str) -> Option<AnomalyKind> {
        match s {
            "ais_gap" => Some(AnomalyKind::AisGap),
            "loiter_near_uci" => Some(AnomalyKind::LoiterNearUci),
            "zone_entry" => Some(AnomalyKind::ZoneEntry),
            "route_deviation" => Some(AnomalyKind::RouteDeviation),
            "search_pattern" => Some(AnomalyKind::SearchPattern),
            "unassociated_sar" => Some(AnomalyKind::UnassociatedSar),
            _ => None,
        }
    }
}

/// One per-vessel anomaly indicator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnomalyEvent {
    pub mmsi: Mmsi,
    pub kind: AnomalyKind,
    pub t_start: Timestamp,
    pub t_end: Timestamp,
    pub severity: f64,
    pub summary: String,
    pub fields: BTreeMap<String, serde_json::Value>,
}

impl AnomalyEvent {
    fn new(
        mmsi: Mmsi,
        kind: AnomalyKind,
        t_start: Timestamp,
        t_end: Timestamp,
        severity: f64,
        summary: String,
    ) -> AnomalyEvent {
        AnomalyEvent {
            mmsi,
            kind,
            t_start,
            t_end,
            severity: severity.clamp(0.0, 1.0),
            summary,
            fields: BTreeMap::new(),
        }
    }

    fn with(mut self, key: &str, value: serde_json::Value) -> AnomalyEvent {
        self.fields.insert(key.to_string(), value);
        self
    }
}

/// Detector thresholds and severity shaping.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectorConfig {
    /// gaps shorter than this are ignored, seconds
    pub min_gap_s: i64,
    /// gap severity saturates at this duration, seconds
    pub gap_saturation_s: i64,
    /// severity boost for gaps touching a corridor
    pub gap_corridor_boost: f64,
    /// loiter fires only below this stationary normalcy
    pub loiter_normalcy_max: f64,
    /// search pattern needs at least this many powered approaches
    pub search_min_cycles: usize,
    /// a search leg must change range to the route by at least this much
    pub search_min_leg_m: f64,
    /// traffic normalcy below this is off-lane
    pub route_dev_threshold: f64,
    /// zone-entry severity weight per corridor kind
    pub zone_weights: ZoneWeights,
    /// events below this severity are dropped by [`apply_report_floor`]
    pub report_floor: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZoneWeights {
    pub pipeline: f64,
    pub power_cable: f64,
    pub comm_cable: f64,
}

impl ZoneWeights {
    pub fn weight(&self, kind: UciKind) -> f64 {
        match kind {
            UciKind::Pipeline => self.pipeline,
            UciKind::PowerCable => self.power_cable,
            UciKind::CommCable => self.comm_cable,
        }
    }
}

impl Default for DetectorConfig {
    fn default() -> Self {
        DetectorConfig {
            min_gap_s: 6 * 3600,
            gap_saturation_s: 24 * 3600,
            gap_corridor_boost: 1.5,
            loiter_normalcy_max: 0.2,
            search_min_cycles: 3,
            search_min_leg_m: 200.0,
            route_dev_threshold: 0.05,
            zone_weights: ZoneWeights {
                pipeline: 1.0,
                power_cable: 1.0,
                comm_cable: 1.0,
            },
            report_floor: 0.1,
        }
    }
}

/// Emits one event per AIS gap of at least `cfg.min_gap_s`. Severity is
/// the saturating duration ratio, boosted when either endpoint lies
/// inside the corridor of `uci`.
pub fn detect_ais_gap(
    track: &Track,
    cfg: &DetectorConfig,
    uci: Option<&UciGeometry>,
) -> Vec<AnomalyEvent> {
    find_gaps(track, cfg.min_gap_s)
        .into_iter()
        .map(|gap| {
            let mut severity = (gap.duration_s as f64 / cfg.gap_saturation_s as f64).min(1.0);
            let mut near_uci = false;
            if let Some(u) = uci {
                near_uci = u.contains(gap.start_pos) || u.contains(gap.end_pos);
                if near_uci {
                    severity = (severity * cfg.gap_corridor_boost).min(1.0);
                }
            }
            AnomalyEvent::new(
                track.mmsi(),
                AnomalyKind::AisGap,
                gap.t_start,
                gap.t_end,
                severity,
                format!(
                    "AIS silent for {:.1} h{}",
                    gap.duration_s as f64 / 3600.0,
                    if near_uci { " with an endpoint inside the corridor" } else { "" }
                ),
            )
            .with("gap_s", gap.duration_s.into())
            .with("near_uci", near_uci.into())
        })
        .collect()
}

/// Fires when the candidate-selection gates pass AND the loiter centroid
/// sits in an area not known for stationary behavior.
pub fn detect_loiter(
    track: &Track,
    uci: &UciGeometry,
    crit: &FilterCriteria,
    stationary_grid: &DensityGrid,
    cfg: &DetectorConfig,
) -> Vec<AnomalyEvent> {
    let Some(report) = evaluate_candidate(track, uci, crit, None) else {
        return Vec::new();
    };
    let intervals = corridor_intervals(track, uci, crit.d_max_km);
    let Some(first) = intervals.first() else {
        return Vec::new();
    };
    let last = intervals.last().unwrap();

    // dwell-weighted centroid of the in-corridor reports
    let mut lat = 0.0;
    let mut lon = 0.0;
    let mut weight = 0.0;
    for w in track.points().windows(2) {
        if intervals.iter().any(|iv| iv.contains(w[0].t)) {
            let dt = w[1].t.seconds_since(w[0].t) as f64;
            lat += w[0].pos.lat() * dt;
            lon += w[0].pos.lon() * dt;
            weight += dt;
        }
    }
    if weight == 0.0 {
        return Vec::new();
    }
    let centroid = match crate::geo::GeoPoint::new(lat / weight, lon / weight) {
        Ok(p) => p,
        Err(_) => return Vec::new(),
    };
    // outside the grid there is no normalcy evidence; treat as unknown
    // ground (score 0)
    let normalcy = normalcy_score(stationary_grid, centroid).unwrap_or(0.0);
    if normalcy >= cfg.loiter_normalcy_max {
        return Vec::new();
    }
    let severity =
        (1.0 - normalcy) * (report.dwell_s / crit.t_min_s as f64).min(1.0);
    vec![AnomalyEvent::new(
        track.mmsi(),
        AnomalyKind::LoiterNearUci,
        first.start,
        last.end,
        severity,
        format!(
            "loitered {:.1} h within {} km of {} where stationary traffic is unusual",
            report.dwell_s / 3600.0,
            crit.d_max_km,
            uci.name
        ),
    )
    .with("dwell_s", report.dwell_s.into())
    .with("normalcy", normalcy.into())
    .with("mean_sog_kn", report.stats.mean_sog_kn.into())
    .with("uci", uci.name.clone().into())]
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum LegKind {
    PoweredApproach,
    DriftAway,
}

/// Detects the approach-under-power / drift-away alternation.
///
/// Consecutive reports are labeled by speed regime and range trend to
/// the route, merged into legs, and legs shorter than
/// `cfg.search_min_leg_m` of range change are discarded. The event fires
/// when at least `cfg.search_min_cycles` powered approaches participate
/// in a strict alternation with drift legs.
pub fn detect_search_pattern(
    track: &Track,
    uci: &UciGeometry,
    window: TimeWindow,
    drift_threshold_kn: f64,
    cfg: &DetectorConfig,
) -> Vec<AnomalyEvent> {
    let points: Vec<&crate::ais::AisPoint> = track
        .points()
        .iter()
        .filter(|p| window.contains(p.t))
        .collect();
    if points.len() < 3 {
        return Vec::new();
    }
    if points[points.len() - 1].t.seconds_since(points[0].t) < 2 * 3600 {
        return Vec::new(); // need at least two hours of data
    }

    let ranges: Vec<f64> = points.iter().map(|p| uci.distance_m(p.pos)).collect();

    // label each interval, then merge into legs
    let mut legs: Vec<(LegKind, usize, usize, f64)> = Vec::new(); // kind, i0, i1, range delta
    for i in 0..points.len() - 1 {
        let dr = ranges[i + 1] - ranges[i];
        let sog = points[i].sog_kn;
        let kind = if sog >= drift_threshold_kn && dr < 0.0 {
            Some(LegKind::PoweredApproach)
        } else if sog < drift_threshold_kn && dr > 0.0 {
            Some(LegKind::DriftAway)
        } else {
            None
        };
        match (kind, legs.last_mut()) {
            (Some(k), Some((lk, _, i1, delta))) if *lk == k && *i1 == i => {
                *i1 = i + 1;
                *delta += dr;
            }
            (Some(k), _) => legs.push((k, i, i + 1, dr)),
            (None, _) => {}
        }
    }
    legs.retain(|(_, _, _, delta)| delta.abs() >= cfg.search_min_leg_m);

    // longest strict alternation, counting powered approaches
    let mut best_cycles = 0usize;
    let mut best_span: Option<(usize, usize)> = None;
    let mut i = 0;
    while i < legs.len() {
        let mut cycles = 0usize;
        let mut j = i;
        let mut expect = legs[i].0;
        while j < legs.len() && legs[j].0 == expect {
            if legs[j].0 == LegKind::PoweredApproach {
                cycles += 1;
            }
            expect = match expect {
                LegKind::PoweredApproach => LegKind::DriftAway,
                LegKind::DriftAway => LegKind::PoweredApproach,
            };
            j += 1;
        }
        if cycles > best_cycles {
            best_cycles = cycles;
            best_span = Some((legs[i].1, legs[j - 1].2));
        }
        i += 1;
    }

    if best_cycles < cfg.search_min_cycles {
        return Vec::new();
    }
    let (i0, i1) = best_span.expect("cycles imply a span");
    let cycle_times: Vec<String> = legs
        .iter()
        .filter(|(k, a, b, _)| {
            *k == LegKind::PoweredApproach && *a >= i0 && *b <= i1
        })
        .map(|(_, a, _, _)| points[*a].t.to_string())
        .collect();
    vec![AnomalyEvent::new(
        track.mmsi(),
        AnomalyKind::SearchPattern,
        points[i0].t,
        points[i1].t,
        (best_cycles as f64 / 5.0).min(1.0),
        format!(
            "{} powered approaches toward {} alternating with drift-away legs",
            best_cycles, uci.name
        ),
    )
    .with("cycles", best_cycles.into())
    .with("uci", uci.name.clone().into())
    .with(
        "approach_times",
        serde_json::Value::Array(cycle_times.into_iter().map(Into::into).collect()),
    )]
}

/// One event per maximal contiguous stay inside each zone's corridor,
/// with entry/exit times pro-rated at the boundary.
pub fn detect_zone_entry(
    track: &Track,
    zones: &[UciGeometry],
    cfg: &DetectorConfig,
) -> Vec<AnomalyEvent> {
    let mut out = Vec::new();
    for zone in zones {
        for iv in corridor_intervals(track, zone, zone.corridor_km) {
            let severity = 0.5 * cfg.zone_weights.weight(zone.kind);
            out.push(
                AnomalyEvent::new(
                    track.mmsi(),
                    AnomalyKind::ZoneEntry,
                    iv.start,
                    iv.end,
                    severity,
                    format!("entered the {} corridor of {}", zone.kind.as_str(), zone.name),
                )
                .with("zone", zone.name.clone().into())
                .with("kind", zone.kind.as_str().into())
                .with("duration_s", iv.duration_s().into()),
            );
        }
    }
    out.sort_by_key(|e| (e.t_start, e.t_end));
    out
}

/// Flags spans of travel through cells the traffic grid considers
/// off-lane (normalcy below `cfg.route_dev_threshold`). A stand-in for
/// model-based deviation tests; severity is the mean abnormality of the
/// span.
pub fn detect_route_deviation(
    track: &Track,
    traffic_grid: &DensityGrid,
    cfg: &DetectorConfig,
) -> Vec<AnomalyEvent> {
    let mut out = Vec::new();
    let mut span: Option<(usize, f64, usize)> = None; // start idx, sum normalcy, count
    let points = track.points();
    let flush = |span: &mut Option<(usize, f64, usize)>, end_idx: usize, out: &mut Vec<AnomalyEvent>| {
        if let Some((i0, sum, n)) = span.take() {
            let mean_normalcy = sum / n as f64;
            out.push(
                AnomalyEvent::new(
                    points[i0].mmsi,
                    AnomalyKind::RouteDeviation,
                    points[i0].t,
                    points[end_idx].t,
                    1.0 - mean_normalcy,
                    "travelled outside known traffic lanes".to_string(),
                )
                .with("mean_normalcy", mean_normalcy.into())
                .with("reports", n.into()),
            );
        }
    };
    for (i, p) in points.iter().enumerate() {
        let normalcy = normalcy_score(traffic_grid, p.pos).unwrap_or(0.0);
        if normalcy < cfg.route_dev_threshold {
            match &mut span {
                Some((_, sum, n)) => {
                    *sum += normalcy;
                    *n += 1;
                }
                None => span = Some((i, normalcy, 1)),
            }
        } else if span.is_some() {
            flush(&mut span, i - 1, &mut out);
        }
    }
    if span.is_some() {
        flush(&mut span, points.len() - 1, &mut out);
    }
    out
}

/// Converts flagged scene records into anomaly indicators. Only
/// detections with a suspected vessel (a bracketing AIS gap) can be
/// attributed an MMSI; fully unknown detections stay in the scene report.
pub fn events_from_scene(scene: &AnnotatedScene) -> Vec<AnomalyEvent> {
    let mut out = Vec::new();
    for rec in scene.flagged() {
        if let Some(FlagReason::GapBracketing {
            mmsi,
            gap_s,
            nearest_endpoint_m,
        }) = &rec.flag
        {
            out.push(
                AnomalyEvent::new(
                    *mmsi,
                    AnomalyKind::UnassociatedSar,
                    rec.t_acq,
                    rec.t_acq,
                    0.75,
                    format!(
                        "radar contact {} unmatched while this vessel was silent",
                        rec.detection_id
                    ),
                )
                .with("detection_id", rec.detection_id.clone().into())
                .with("image_id", rec.image_id.clone().into())
                .with("gap_s", (*gap_s).into())
                .with("nearest_endpoint_m", (*nearest_endpoint_m).into()),
            );
        }
    }
    out
}

/// Drops events below the configured severity floor.
pub fn apply_report_floor(events: Vec<AnomalyEvent>, floor: f64) -> Vec<AnomalyEvent> {
    events.into_iter().filter(|e| e.severity >= floor).collect()
}

/// Serializes events as JSON-lines (one event per line).
pub fn write_events_jsonl<W: std::io::Write>(
    mut w: W,
    events: &[AnomalyEvent],
) -> std::io::Result<()> {
    for e in events {
        serde_json::to_writer(&mut w, e)?;
        writeln!(w)?;
    }
    Ok(())
}

/// Parses JSON-lines events, skipping blank lines.
pub fn read_events_jsonl<R: std::io::BufRead>(r: R) -> Result<Vec<AnomalyEvent>, String> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line.map_err(|e| format!("line {}: {e}", i + 1))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(
            serde_json::from_str(&line).map_err(|e| format!("line {}: {e}", i + 1))?,
        );
    }
    Ok(out)
}
