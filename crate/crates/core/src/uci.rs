//! Underwater-infrastructure geometry and candidate-of-interest
//! selection: which tracks spent long enough near a cable or pipeline,
//! moving slowly enough (or manoeuvring hard enough) to warrant a second
//! look.
//!
//! The kinematic gates combine as dwell AND (low-speed OR
//! high-manoeuvre-rate): either kinematic signature independently marks
//! loiter or search behavior. A non-kinematic gate drops vessels too
//! small to matter at the local water depth when a bathymetry grid is
//! supplied.

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ais::Track;
use crate::geo::{distance_to_polyline, GeoPoint, Polyline};
use crate::kinematics::{compute_stats, KinematicStats, TimeWindow};

#[derive(Debug, Error)]
pub enum UciError {
    #[error("cannot open {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("bad GeoJSON in {path}: {reason}")]
    BadGeoJson { path: String, reason: String },
    #[error("bad bathymetry grid: {0}")]
    BadBathymetry(String),
    #[error("invalid criteria: {0}")]
    BadCriteria(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UciKind {
    Pipeline,
    PowerCable,
    CommCable,
}

impl UciKind {
    pub fn parse(s: &str) -> Option<UciKind> {
        match s {
            "pipeline" => Some(UciKind::Pipeline),
            "power_cable" => Some(UciKind::PowerCable),
            "comm_cable" => Some(UciKind::CommCable),
            _ => None,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            UciKind::Pipeline => "pipeline",
            UciKind::PowerCable => "power_cable",
            UciKind::CommCable => "comm_cable",
        }
    }
}

/// A named cable or pipeline route with its protection corridor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UciGeometry {
    pub name: String,
    pub kind: UciKind,
    pub route: Polyline,
    pub corridor_km: f64,
}

impl UciGeometry {
    pub fn new(
        name: String,
        kind: UciKind,
        route: Polyline,
        corridor_km: f64,
    ) -> Result<UciGeometry, UciError> {
        if !(corridor_km > 0.0) {
            return Err(UciError::BadCriteria(format!(
                "corridor_km must be > 0, got {corridor_km}"
            )));
        }
        Ok(UciGeometry {
            name,
            kind,
            route,
            corridor_km,
        })
    }

    /// Distance in meters from `p` to the route.
    pub fn distance_m(&self, p: GeoPoint) -> f64 {
        distance_to_polyline(p, &self.route)
    }

    pub fn contains(&self, p: GeoPoint) -> bool {
        self.distance_m(p) <= self.corridor_km * 1000.0
    }
}

/// Selection thresholds for candidate-of-interest filtering.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterCriteria {
    /// Bounding distance around the route, km.
    pub d_max_km: f64,
    /// Minimum dwell inside that bound, seconds.
    pub t_min_s: i64,
    /// Maximum mean speed for the low-speed gate, knots.
    pub s_max_kn: f64,
    /// Optional manoeuvre-rate gate, events per minute.
    pub manoeuvre_rate_min: Option<f64>,
    /// Vessels shorter than this in deep water are dropped (needs
    /// `depth_gate_m` and a bathymetry grid).
    pub min_length_m: Option<f64>,
    /// Water depth beyond which the size exclusion applies, meters.
    pub depth_gate_m: Option<f64>,
    /// Course-change magnitude that counts as a manoeuvre, degrees.
    pub turn_threshold_deg: f64,
    /// Drift classification threshold, knots.
    pub drift_threshold_kn: f64,
}

impl FilterCriteria {
    pub fn validate(&self) -> Result<(), UciError> {
        if !(self.d_max_km > 0.0) {
            return Err(UciError::BadCriteria(format!(
                "d_max_km must be > 0, got {}",
                self.d_max_km
            )));
        }
        if self.t_min_s <= 0 {
            return Err(UciError::BadCriteria(format!(
                "t_min_s must be > 0, got {}",
                self.t_min_s
            )));
        }
        if self.s_max_kn < 0.0 {
            return Err(UciError::BadCriteria(format!(
                "s_max_kn must be >= 0, got {}",
                self.s_max_kn
            )));
        }
        Ok(())
    }
}

impl Default for FilterCriteria {
    fn default() -> Self {
        FilterCriteria {
            d_max_km: 5.0,
            t_min_s: 3600,
            s_max_kn: 3.0,
            manoeuvre_rate_min: None,
            min_length_m: None,
            depth_gate_m: None,
            turn_threshold_deg: 30.0,
            drift_threshold_kn: 3.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CriterionTag {
    Dwell,
    LowSpeed,
    HighManoeuvreRate,
}

/// One track that passed the selection gates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateReport {
    pub mmsi: crate::ais::Mmsi,
    pub dwell_s: f64,
    pub stats: KinematicStats,
    pub matched_criteria: BTreeSet<CriterionTag>,
    pub nearest_approach_m: f64,
}

/// Total time in seconds the track spends within `d_max_km` of the route.
///
/// Membership is decided at segment endpoints; a segment with one
/// endpoint inside is pro-rated linearly in the endpoint distances. A
/// segment whose interior dips inside while both endpoints stay outside
/// contributes nothing, so accuracy is bounded by the report cadence.
pub fn dwell_time(track: &Track, uci: &UciGeometry, d_max_km: f64) -> f64 {
    let bound_m = d_max_km * 1000.0;
    let points = track.points();
    let dist: Vec<f64> = points.iter().map(|p| uci.distance_m(p.pos)).collect();
    let mut dwell = 0.0f64;
    for i in 0..points.len().saturating_sub(1) {
        let dt = points[i + 1].t.seconds_since(points[i].t) as f64;
        let (d0, d1) = (dist[i], dist[i + 1]);
        let in0 = d0 <= bound_m;
        let in1 = d1 <= bound_m;
        match (in0, in1) {
            (true, true) => dwell += dt,
            (true, false) => dwell += dt * crossing_fraction(d0, d1, bound_m),
            (false, true) => dwell += dt * crossing_fraction(d1, d0, bound_m),
            (false, false) => {}
        }
    }
    dwell
}

/// Fraction of the segment on the inside, given the inside distance
/// `d_in` (<= bound) and outside distance `d_out` (> bound).
fn crossing_fraction(d_in: f64, d_out: f64, bound_m: f64) -> f64 {
    if d_out <= d_in {
        return 1.0;
    }
    ((bound_m - d_in) / (d_out - d_in)).clamp(0.0, 1.0)
}

/// The first and last timestamps at which the track is inside the
/// `d_max_km` bound (interpolating the boundary crossings), or `None` if
/// it never enters.
pub fn corridor_episode(track: &Track, uci: &UciGeometry, d_max_km: f64) -> Option<TimeWindow> {
    let intervals = corridor_intervals(track, uci, d_max_km);
    let first = intervals.first()?;
    let last = intervals.last()?;
    TimeWindow::new(first.start, last.end).ok().or(Some(*first))
}

/// Maximal contiguous in-bound intervals, with boundary crossings
/// pro-rated linearly between endpoint distances.
pub fn corridor_intervals(track: &Track, uci: &UciGeometry, d_max_km: f64) -> Vec<TimeWindow> {
    let bound_m = d_max_km * 1000.0;
    let points = track.points();
    let dist: Vec<f64> = points.iter().map(|p| uci.distance_m(p.pos)).collect();
    let mut intervals: Vec<(i64, i64)> = Vec::new();
    let mut open: Option<i64> = None;
    if dist[0] <= bound_m {
        open = Some(points[0].t.0);
    }
    for i in 0..points.len().saturating_sub(1) {
        let dt = points[i + 1].t.seconds_since(points[i].t) as f64;
        let (d0, d1) = (dist[i], dist[i + 1]);
        let in0 = d0 <= bound_m;
        let in1 = d1 <= bound_m;
        if in0 && !in1 {
            let f = crossing_fraction(d0, d1, bound_m);
            let t_exit = points[i].t.0 + (dt * f).round() as i64;
            if let Some(t_enter) = open.take() {
                intervals.push((t_enter, t_exit.max(t_enter)));
            }
        } else if !in0 && in1 {
            let f = crossing_fraction(d1, d0, bound_m);
            let t_enter = points[i + 1].t.0 - (dt * f).round() as i64;
            open = Some(t_enter);
        }
    }
    if let Some(t_enter) = open {
        intervals.push((t_enter, points[points.len() - 1].t.0));
    }
    intervals
        .into_iter()
        .map(|(a, b)| TimeWindow {
            start: crate::ais::Timestamp(a),
            end: crate::ais::Timestamp(b.max(a)),
        })
        .collect()
}

/// Applies the selection gates to one track; `None` when any gate fails.
pub fn evaluate_candidate(
    track: &Track,
    uci: &UciGeometry,
    crit: &FilterCriteria,
    bathymetry: Option<&DepthGrid>,
) -> Option<CandidateReport> {
    let dwell_s = dwell_time(track, uci, crit.d_max_km);
    if dwell_s < crit.t_min_s as f64 {
        return None;
    }
    let episode = corridor_episode(track, uci, crit.d_max_km)?;
    let stats = match compute_stats(
        track,
        episode,
        crit.drift_threshold_kn,
        crit.turn_threshold_deg,
    ) {
        Ok(s) => s,
        Err(_) => return None,
    };

    let low_speed = stats.mean_sog_kn <= crit.s_max_kn;
    let high_rate = crit
        .manoeuvre_rate_min
        .map(|min| stats.manoeuvre_rate_per_min >= min)
        .unwrap_or(false);
    if !(low_speed || high_rate) {
        return None;
    }

    let (nearest_approach_m, nearest_pos) = track
        .points()
        .iter()
        .map(|p| (uci.distance_m(p.pos), p.pos))
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .expect("track has points");

    // size/depth exclusion: small craft in deep water are no threat
    if let (Some(min_len), Some(depth_gate), Some(grid)) =
        (crit.min_length_m, crit.depth_gate_m, bathymetry)
    {
        if let Some(len) = track.info.length_m {
            if len < min_len {
                if let Some(depth) = grid.depth_at(nearest_pos) {
                    if depth > depth_gate {
                        return None;
                    }
                }
            }
        }
    }

    let mut matched = BTreeSet::new();
    matched.insert(CriterionTag::Dwell);
    if low_speed {
        matched.insert(CriterionTag::LowSpeed);
    }
    if high_rate {
        matched.insert(CriterionTag::HighManoeuvreRate);
    }

    Some(CandidateReport {
        mmsi: track.mmsi(),
        dwell_s,
        stats,
        matched_criteria: matched,
        nearest_approach_m,
    })
}

/// Candidate-of-interest selection over a fleet, ordered by descending
/// dwell (ties by mmsi). Tracks are judged independently.
pub fn select_candidates(
    tracks: &[Track],
    uci: &UciGeometry,
    crit: &FilterCriteria,
    bathymetry: Option<&DepthGrid>,
) -> Result<Vec<CandidateReport>, UciError> {
    crit.validate()?;
    let mut out: Vec<CandidateReport> = tracks
        .iter()
        .filter_map(|t| evaluate_candidate(t, uci, crit, bathymetry))
        .collect();
    out.sort_by(|a, b| b.dwell_s.total_cmp(&a.dwell_s).then(a.mmsi.cmp(&b.mmsi)));
    Ok(out)
}

/// Water depth on a regular lat/lon lattice, bilinear lookup.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthGrid {
    lats: Vec<f64>,
    lons: Vec<f64>,
    /// row-major [lat][lon], meters positive down
    depths: Vec<f64>,
}

impl DepthGrid {
    pub fn new(lats: Vec<f64>, lons: Vec<f64>, depths: Vec<f64>) -> Result<DepthGrid, UciError> {
        if lats.len() < 2 || lons.len() < 2 {
            return Err(UciError::BadBathymetry("need at least a 2x2 lattice".into()));
        }
        if depths.len() != lats.len() * lons.len() {
            return Err(UciError::BadBathymetry(format!(
                "{} depths for a {}x{} lattice",
                depths.len(),
                lats.len(),
                lons.len()
            )));
        }
        for w in lats.windows(2) {
            if w[1] <= w[0] {
                return Err(UciError::BadBathymetry("latitudes not ascending".into()));
            }
        }
        for w in lons.windows(2) {
            if w[1] <= w[0] {
                return Err(UciError::BadBathymetry("longitudes not ascending".into()));
            }
        }
        Ok(DepthGrid { lats, lons, depths })
    }

    /// Parses CSV rows `lat,lon,depth_m` covering a full regular lattice.
    pub fn from_csv(path: &Path) -> Result<DepthGrid, UciError> {
        let file = std::fs::File::open(path).map_err(|source| UciError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_reader(file)
    }

    pub fn from_reader<R: std::io::Read>(reader: R) -> Result<DepthGrid, UciError> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .comment(Some(b'#'))
            .from_reader(reader);
        let mut rows: Vec<(f64, f64, f64)> = Vec::new();
        for record in rdr.records() {
            let r = record.map_err(|e| UciError::BadBathymetry(e.to_string()))?;
            if r.len() != 3 {
                return Err(UciError::BadBathymetry(format!(
                    "expected 3 fields, got {}",
                    r.len()
                )));
            }
            let get = |i: usize| -> Result<f64, UciError> {
                r.get(i).unwrap().trim().parse().map_err(|_| {
                    UciError::BadBathymetry(format!("bad number `{}`", r.get(i).unwrap()))
                })
            };
            rows.push((get(0)?, get(1)?, get(2)?));
        }
        let mut lats: Vec<f64> = rows.iter().map(|r| r.0).collect();
        let mut lons: Vec<f64> = rows.iter().map(|r| r.1).collect();
        lats.sort_by(f64::total_cmp);
        lats.dedup();
        lons.sort_by(f64::total_cmp);
        lons.dedup();
        if rows.len() != lats.len() * lons.len() {
            return Err(UciError::BadBathymetry(format!(
                "{} rows do not cover a {}x{} lattice",
                rows.len(),
                lats.len(),
                lons.len()
            )));
        }
        let mut depths = vec![f64::NAN; lats.len() * lons.len()];
        for (lat, lon, d) in rows {
            let i = lats.partition_point(|v| *v < lat);
            let j = lons.partition_point(|v| *v < lon);
            depths[i * lons.len() + j] = d;
        }
        if depths.iter().any(|d| d.is_nan()) {
            return Err(UciError::BadBathymetry("lattice has holes".into()));
        }
        DepthGrid::new(lats, lons, depths)
    }

    /// Bilinear depth at `p`; `None` outside the lattice hull.
    pub fn depth_at(&self, p: GeoPoint) -> Option<f64> {
        let (lat, lon) = (p.lat(), p.lon());
        if lat < self.lats[0]
            || lat > *self.lats.last().unwrap()
            || lon < self.lons[0]
            || lon > *self.lons.last().unwrap()
        {
            return None;
        }
        let i = self.lats.partition_point(|v| *v <= lat).min(self.lats.len() - 1);
        let j = self.lons.partition_point(|v| *v <= lon).min(self.lons.len() - 1);
        let (i0, i1) = (i - 1, i);
        let (j0, j1) = (j - 1, j);
        let ty = (lat - self.lats[i0]) / (self.lats[i1] - self.lats[i0]);
        let tx = (lon - self.lons[j0]) / (self.lons[j1] - self.lons[j0]);
        let at = |r: usize, c: usize| self.depths[r * self.lons.len() + c];
        Some(
            at(i0, j0) * (1.0 - ty) * (1.0 - tx)
                + at(i0, j1) * (1.0 - ty) * tx
                + at(i1, j0) * ty * (1.0 - tx)
                + at(i1, j1) * ty * tx,
        )
    }
}

// --- GeoJSON loading -------------------------------------------------------

#[derive(Deserialize)]
struct GjFeatureCollection {
    #[serde(rename = "type")]
    kind: String,
    features: Vec<GjFeature>,
}

#[derive(Deserialize)]
struct GjFeature {
    geometry: GjGeometry,
    properties: GjProperties,
}

#[derive(Deserialize)]
struct GjGeometry {
    #[serde(rename = "type")]
    kind: String,
    coordinates: Vec<[f64; 2]>,
}

#[derive(Deserialize)]
struct GjProperties {
    name: String,
    kind: String,
    corridor_km: f64,
}

/// Loads UCI routes from a GeoJSON FeatureCollection of LineStrings with
/// properties `{name, kind, corridor_km}`. Coordinates are GeoJSON order:
/// [lon, lat].
pub fn load_uci_geojson(path: &Path) -> Result<Vec<UciGeometry>, UciError> {
    let text = std::fs::read_to_string(path).map_err(|source| UciError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_uci_geojson(&text, &path.display().to_string())
}

pub fn parse_uci_geojson(text: &str, path: &str) -> Result<Vec<UciGeometry>, UciError> {
    let fc: GjFeatureCollection = serde_json::from_str(text).map_err(|e| UciError::BadGeoJson {
        path: path.to_string(),
        reason: e.to_string(),
    })?;
    if fc.kind != "FeatureCollection" {
        return Err(UciError::BadGeoJson {
            path: path.to_string(),
            reason: format!("expected FeatureCollection, got {}", fc.kind),
        });
    }
    let mut out = Vec::with_capacity(fc.features.len());
    for f in fc.features {
        if f.geometry.kind != "LineString" {
            return Err(UciError::BadGeoJson {
                path: path.to_string(),
                reason: format!(
                    "feature `{}`: expected LineString, got {}",
                    f.properties.name, f.geometry.kind
                ),
            });
        }
        let kind = UciKind::parse(&f.properties.kind).ok_or_else(|| UciError::BadGeoJson {
            path: path.to_string(),
            reason: format!(
                "feature `{}`: unknown kind `{}`",
                f.properties.name, f.properties.kind
            ),
        })?;
        let mut vertices = Vec::with_capacity(f.geometry.coordinates.len());
        for [lon, lat] in f.geometry.coordinates {
            vertices.push(GeoPoint::new(lat, lon).map_err(|e| UciError::BadGeoJson {
                path: path.to_string(),
                reason: format!("feature `{}`: {e}", f.properties.name),
            })?);
        }
        let route = Polyline::new(vertices).map_err(|e| UciError::BadGeoJson {
            path: path.to_string(),
            reason: format!("feature `{}`: {e}", f.properties.name),
        })?;
        out.push(UciGeometry::new(
            f.properties.name,
            kind,
            route,
            f.properties.corridor_km,
        )?);
    }
    Ok(out)
}

/// Serializes routes back to the GeoJSON layout `load_uci_geojson` reads.
pub fn uci_to_geojson(ucis: &[UciGeometry]) -> String {
    let features: Vec<serde_json::Value> = ucis
        .iter()
        .map(|u| {
            serde_json::json!({
                "type": "Feature",
                "geometry": {
                    "type": "LineString",
                    "coordinates": u.route.vertices().iter()
                        .map(|v| [v.lon(), v.lat()])
                        .collect::<Vec<_>>(),
                },
                "properties": {
                    "name": u.name,
                    "kind": u.kind.as_str(),
                    "corridor_km": u.corridor_km,
                },
            })
        })
        .collect();
    serde_json::to_string_pretty(&serde_json::json!({
        "type": "FeatureCollection",
        "features": features,
    }))
    .expect("geojson always serializes")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ais::{AisPoint, Mmsi, Timestamp};
    use approx::assert_relative_eq;

    fn pt(lat: f64, lon: f64) -> GeoPoint {
        GeoPoint::new(lat, lon).unwrap()
    }

    fn ais(t: i64, lat: f64, lon: f64, sog: f64, cog: f64) -> AisPoint {
        AisPoint {
            mmsi: Mmsi::new(200_000_001).unwrap(),
            t: Timestamp(t),
            pos: pt(lat, lon),
            sog_kn: sog,
            cog_deg: cog,
            heading_deg: None,
            nav_status: None,
        }
    }

    fn cable() -> UciGeometry {
        UciGeometry::new(
            "test-cable".into(),
            UciKind::CommCable,
            Polyline::new(vec![pt(55.0, 14.0), pt(55.0, 16.0)]).unwrap(),
            2.0,
        )
        .unwrap()
    }

    #[test]
    fn dwell_zero_far_away() {
        let tr = Track::new(vec![
            ais(0, 57.0, 15.0, 10.0, 90.0),
            ais(3600, 57.0, 15.5, 10.0, 90.0),
        ])
        .unwrap();
        assert_eq!(dwell_time(&tr, &cable(), 5.0), 0.0);
    }

    #[test]
    fn dwell_full_hour_inside() {
        let tr = Track::new(vec![
            ais(0, 55.01, 15.0, 1.0, 90.0),
            ais(3600, 55.01, 15.02, 1.0, 90.0),
        ])
        .unwrap();
        assert_eq!(dwell_time(&tr, &cable(), 5.0), 3600.0);
    }

    #[test]
    fn dwell_matches_dense_sampling_oracle() {
        // north-south crossing over the east-west cable at 12 kn,
        // report every 20 s
        let mut points = Vec::new();
        let v_deg_per_s = 12.0 * 0.514444 / 111_194.93; // ~deg lat per second
        for i in 0..=720 {
            let t = i * 20;
            let lat = 54.8 + v_deg_per_s * t as f64;
            points.push(ais(t, lat, 15.0, 12.0, 0.0));
        }
        let tr = Track::new(points.clone()).unwrap();
        let uci = cable();
        let d_max = 5.0;
        let dwell = dwell_time(&tr, &uci, d_max);

        // oracle: 1 s sampling of the interpolated path
        let mut oracle = 0.0;
        for t in points[0].t.0..points.last().unwrap().t.0 {
            let pos = crate::kinematics::interpolate_position(&tr, Timestamp(t), 3600).unwrap();
            if uci.distance_m(pos) <= d_max * 1000.0 {
                oracle += 1.0;
            }
        }
        assert!(
            (dwell - oracle).abs() <= 30.0,
            "dwell {dwell} vs oracle {oracle}"
        );
    }

    #[test]
    fn loiterer_selected_with_tags() {
        let mut points = Vec::new();
        for i in 0..=48 {
            // 4 h at 1.5 kn just north of the cable
            points.push(ais(i * 300, 55.005, 15.0 + i as f64 * 1e-4, 1.5, 90.0));
        }
        let tr = Track::new(points).unwrap();
        let crit = FilterCriteria::default();
        let out = select_candidates(&[tr], &cable(), &crit, None).unwrap();
        assert_eq!(out.len(), 1);
        assert!(out[0].matched_criteria.contains(&CriterionTag::Dwell));
        assert!(out[0].matched_criteria.contains(&CriterionTag::LowSpeed));
        assert!(out[0].dwell_s >= 4.0 * 3600.0 - 1.0);
    }

    #[test]
    fn fast_transit_excluded_by_dwell() {
        // 14 kn straight crossing: inside the 5 km band for ~32 min < 1 h
        let mut points = Vec::new();
        let v_deg_per_s = 14.0 * 0.514444 / 111_194.93;
        for i in 0..=120 {
            let t = i * 60;
            points.push(ais(t, 54.9 + v_deg_per_s * t as f64, 15.0, 14.0, 0.0));
        }
        let tr = Track::new(points).unwrap();
        let out = select_candidates(&[tr], &cable(), &FilterCriteria::default(), None).unwrap();
        assert!(out.is_empty());
    }

    #[test]
    fn selection_matches_predicate_oracle() {
        // a mixed synthetic fleet; oracle applies the gates per track
        let uci = cable();
        let crit = FilterCriteria {
            manoeuvre_rate_min: Some(0.5),
            ..FilterCriteria::default()
        };
        let mut fleet = Vec::new();
        for k in 0..12u32 {
            let mmsi = Mmsi::new(300_000_000 + k).unwrap();
            let sog = [1.0, 2.5, 9.0, 14.0][k as usize % 4];
            let lat0 = if k % 3 == 0 { 55.01 } else { 56.5 };
            let mut points = Vec::new();
            for i in 0..=50i64 {
                let cog = if k % 5 == 0 && i % 2 == 0 { 0.0 } else { 80.0 };
                points.push(AisPoint {
                    mmsi,
                    t: Timestamp(i * 240),
                    pos: pt(lat0 + i as f64 * 2e-5, 15.0 + i as f64 * 1e-4),
                    sog_kn: sog,
                    cog_deg: cog,
                    heading_deg: None,
                    nav_status: None,
                });
            }
            fleet.push(Track::new(points).unwrap());
        }
        let got = select_candidates(&fleet, &uci, &crit, None).unwrap();
        let expected: Vec<Mmsi> = fleet
            .iter()
            .filter_map(|t| evaluate_candidate(t, &uci, &crit, None).map(|c| c.mmsi))
            .collect();
        let mut got_mmsi: Vec<Mmsi> = got.iter().map(|c| c.mmsi).collect();
        got_mmsi.sort();
        let mut expected = expected;
        expected.sort();
        assert_eq!(got_mmsi, expected);
        assert!(!got.is_empty(), "fleet should produce some candidates");
    }

    #[test]
    fn enlarging_dmax_never_decreases_dwell() {
        let mut points = Vec::new();
        for i in 0..=60i64 {
            points.push(ais(i * 120, 54.93 + i as f64 * 3e-3, 15.0, 8.0, 0.0));
        }
        let tr = Track::new(points).unwrap();
        let uci = cable();
        let mut last = 0.0;
        for d in [1.0, 2.0, 4.0, 8.0, 16.0] {
            let dwell = dwell_time(&tr, &uci, d);
            assert!(dwell >= last - 1e-9, "dwell shrank at d_max {d}");
            last = dwell;
        }
    }

    #[test]
    fn depth_gate_excludes_small_vessel_in_deep_water() {
        let points: Vec<AisPoint> = (0..=24)
            .map(|i| ais(i * 600, 55.005, 15.0 + i as f64 * 1e-5, 1.0, 90.0))
            .collect();
        let mut tr = Track::new(points).unwrap();
        tr.info.length_m = Some(12.0);

        let deep = DepthGrid::new(
            vec![54.0, 56.0],
            vec![14.0, 16.0],
            vec![800.0, 800.0, 800.0, 800.0],
        )
        .unwrap();
        let crit = FilterCriteria {
            min_length_m: Some(40.0),
            depth_gate_m: Some(200.0),
            ..FilterCriteria::default()
        };
        let out =
            select_candidates(std::slice::from_ref(&tr), &cable(), &crit, Some(&deep)).unwrap();
        assert!(out.is_empty());
        // shallow water keeps it
        let shallow = DepthGrid::new(
            vec![54.0, 56.0],
            vec![14.0, 16.0],
            vec![30.0, 30.0, 30.0, 30.0],
        )
        .unwrap();
        let out = select_candidates(&[tr], &cable(), &crit, Some(&shallow)).unwrap();
        assert_eq!(out.len(), 1);
    }

    #[test]
    fn bilinear_depth_lookup() {
        let grid = DepthGrid::new(
            vec![54.0, 55.0],
            vec![14.0, 15.0],
            vec![100.0, 200.0, 300.0, 400.0],
        )
        .unwrap();
        assert_relative_eq!(grid.depth_at(pt(54.0, 14.0)).unwrap(), 100.0);
        assert_relative_eq!(grid.depth_at(pt(55.0, 15.0)).unwrap(), 400.0);
        assert_relative_eq!(grid.depth_at(pt(54.5, 14.5)).unwrap(), 250.0);
        assert_eq!(grid.depth_at(pt(53.0, 14.5)), None);
    }

    #[test]
    fn depth_grid_csv_roundtrip() {
        let csv = "lat,lon,depth_m\n54.0,14.0,100\n54.0,15.0,200\n55.0,14.0,300\n55.0,15.0,400\n";
        let grid = DepthGrid::from_reader(csv.as_bytes()).unwrap();
        assert_relative_eq!(grid.depth_at(pt(54.5, 14.5)).unwrap(), 250.0);
    }

    #[test]
    fn geojson_roundtrip() {
        let ucis = vec![cable()];
        let text = uci_to_geojson(&ucis);
        let parsed = parse_uci_geojson(&text, "mem").unwrap();
        assert_eq!(parsed, ucis);
    }

    #[test]
    fn geojson_rejects_bad_kind() {
        let text = r#"{"type":"FeatureCollection","features":[{
            "type":"Feature",
            "geometry":{"type":"LineString","coordinates":[[14.0,55.0],[16.0,55.0]]},
            "properties":{"name":"x","kind":"gasline","corridor_km":2.0}}]}"#;
        assert!(parse_uci_geojson(text, "mem").is_err());
    }
}
