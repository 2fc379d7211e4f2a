//! Gated optimal assignment of SAR ship detections to AIS tracks at an
//! image acquisition time.
//!
//! The cost of pairing a detection with a track is the great-circle
//! distance between the detection and the track's interpolated position
//! at the acquisition time; pairs beyond the gate (or with no
//! interpolable position) are forbidden. The scene is solved to the
//! global minimum total cost with each track used at most once.
//! Detections left without a pairing are flagged for anomaly review.
//!
//! The along-track offset a moving ship shows in radar imagery is *not*
//! corrected in the cost — the gate absorbs it — but the residual offset
//! vector is reported for analyst inspection.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ais::{Mmsi, Timestamp, Track};
use crate::assign::{solve, CostMatrix};
use crate::geo::{geodesic_distance, GeoPoint, LocalFrame};
use crate::kinematics::{find_gaps, interpolate_position};
use crate::ou::OuModel;

#[derive(Debug, Error)]
pub enum SarError {
    #[error("duplicate detection id `{0}`")]
    DuplicateDetectionId(String),
    #[error("detections span multiple acquisition times ({0} and {1})")]
    MixedAcquisitionTimes(Timestamp, Timestamp),
    #[error("gate must be positive, got {0} km")]
    BadGate(f64),
    #[error("cannot open {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("bad detections file {path}: {reason}")]
    BadFile { path: String, reason: String },
}

/// One ship detection extracted upstream from a satellite radar image.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SarDetection {
    pub id: String,
    pub image_id: String,
    pub t_acq: Timestamp,
    pub pos: GeoPoint,
}

/// Pairing decision for one detection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Association {
    pub detection_id: String,
    pub mmsi: Option<Mmsi>,
    pub distance_m: Option<f64>,
    /// true when the paired position came from long-term prediction
    /// rather than interpolation
    pub used_prediction: bool,
}

/// Why an unassociated detection deserves review.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "reason")]
pub enum FlagReason {
    /// a nearby track is silent across the acquisition time
    GapBracketing {
        mmsi: Mmsi,
        gap_s: i64,
        nearest_endpoint_m: f64,
    },
    /// nothing nearby at all
    NoNearbyTrack,
}

/// Per-detection join of detection, pairing and offset, plus review
/// flags for the unassociated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneRecord {
    pub detection_id: String,
    pub image_id: String,
    pub t_acq: Timestamp,
    pub det_pos: GeoPoint,
    pub mmsi: Option<Mmsi>,
    pub track_pos: Option<GeoPoint>,
    pub distance_m: Option<f64>,
    /// east/north meters from the track position to the detection
    pub offset_en_m: Option<[f64; 2]>,
    pub used_prediction: bool,
    pub flag: Option<FlagReason>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotatedScene {
    pub records: Vec<SceneRecord>,
}

impl AnnotatedScene {
    pub fn flagged(&self) -> impl Iterator<Item = &SceneRecord> {
        self.records.iter().filter(|r| r.flag.is_some())
    }
}

fn validate_scene(detections: &[SarDetection], gate_km: f64) -> Result<(), SarError> {
    if !(gate_km > 0.0) {
        return Err(SarError::BadGate(gate_km));
    }
    let mut ids = BTreeSet::new();
    for d in detections {
        if !ids.insert(&d.id) {
            return Err(SarError::DuplicateDetectionId(d.id.clone()));
        }
    }
    if let Some(first) = detections.first() {
        for d in detections {
            if d.t_acq != first.t_acq {
                return Err(SarError::MixedAcquisitionTimes(first.t_acq, d.t_acq));
            }
        }
    }
    Ok(())
}

/// Pairing position for a track at the acquisition time.
#[derive(Debug, Clone, Copy)]
struct TrackHypothesis {
    pos: GeoPoint,
    gate_m: f64,
    used_prediction: bool,
}

fn solve_scene(
    detections: &[SarDetection],
    tracks: &[Track],
    hypotheses: &[Option<TrackHypothesis>],
) -> Vec<Association> {
    // canonical orders make equal-cost solutions deterministic and
    // permutation-invariant
    let mut det_order: Vec<usize> = (0..detections.len()).collect();
    det_order.sort_by(|&a, &b| detections[a].id.cmp(&detections[b].id));
    let mut trk_order: Vec<usize> = (0..tracks.len()).collect();
    trk_order.sort_by_key(|&k| tracks[k].mmsi());

    let mut data = Vec::with_capacity(det_order.len() * trk_order.len());
    for &d in &det_order {
        for &k in &trk_order {
            let cost = match &hypotheses[k] {
                Some(h) => {
                    let dist = geodesic_distance(detections[d].pos, h.pos);
                    if dist <= h.gate_m {
                        dist
                    } else {
                        f64::INFINITY
                    }
                }
                None => f64::INFINITY,
            };
            data.push(cost);
        }
    }
    let costs = CostMatrix::new(det_order.len(), trk_order.len(), data)
        .expect("scene cost matrix is well-formed");
    let solution = solve(&costs);

    let mut out: Vec<Association> = Vec::with_capacity(detections.len());
    for (row, &d) in det_order.iter().enumerate() {
        let assoc = match solution.row_to_col[row] {
            Some(col) => {
                let k = trk_order[col];
                let h = hypotheses[k].expect("assigned pairs have hypotheses");
                Association {
                    detection_id: detections[d].id.clone(),
                    mmsi: Some(tracks[k].mmsi()),
                    distance_m: Some(geodesic_distance(detections[d].pos, h.pos)),
                    used_prediction: h.used_prediction,
                }
            }
            None => Association {
                detection_id: detections[d].id.clone(),
                mmsi: None,
                distance_m: None,
                used_prediction: false,
            },
        };
        out.push(assoc);
    }
    out.sort_by(|a, b| a.detection_id.cmp(&b.detection_id));
    out
}

/// Associates a single-image scene against interpolated track positions.
///
/// All detections must share one acquisition time. Tracks without an
/// interpolable position inside `max_gap_s` are out of play; pairs
/// beyond `gate_km` are forbidden. The assignment minimizes total
/// distance globally with each track used at most once.
pub fn associate(
    detections: &[SarDetection],
    tracks: &[Track],
    gate_km: f64,
    max_gap_s: i64,
) -> Result<Vec<Association>, SarError> {
    validate_scene(detections, gate_km)?;
    let Some(first) = detections.first() else {
        return Ok(Vec::new());
    };
    let t_acq = first.t_acq;
    let hypotheses: Vec<Option<TrackHypothesis>> = tracks
        .iter()
        .map(|trk| {
            interpolate_position(trk, t_acq, max_gap_s).map(|pos| TrackHypothesis {
                pos,
                gate_m: gate_km * 1000.0,
                used_prediction: false,
            })
        })
        .collect();
    Ok(solve_scene(detections, tracks, &hypotheses))
}

/// Like [`associate`], but tracks that cannot be interpolated fall back
/// to a long-term prediction when a model is supplied, with the gate
/// inflated to the prediction's 3-sigma radius when that exceeds the
/// base gate.
pub fn associate_with_predictions(
    detections: &[SarDetection],
    tracks: &[Track],
    gate_km: f64,
    max_gap_s: i64,
    models: &BTreeMap<Mmsi, OuModel>,
) -> Result<Vec<Association>, SarError> {
    validate_scene(detections, gate_km)?;
    let Some(first) = detections.first() else {
        return Ok(Vec::new());
    };
    let t_acq = first.t_acq;
    let hypotheses: Vec<Option<TrackHypothesis>> = tracks
        .iter()
        .map(|trk| {
            if let Some(pos) = interpolate_position(trk, t_acq, max_gap_s) {
                return Some(TrackHypothesis {
                    pos,
                    gate_m: gate_km * 1000.0,
                    used_prediction: false,
                });
            }
            let model = models.get(&trk.mmsi())?;
            let pred = model.predict(t_acq).ok()?;
            Some(TrackHypothesis {
                pos: pred.mean_pos,
                gate_m: (gate_km * 1000.0).max(pred.radius_3sigma_m),
                used_prediction: true,
            })
        })
        .collect();
    Ok(solve_scene(detections, tracks, &hypotheses))
}

/// Joins associations back onto detections and tracks, computing offset
/// vectors and flagging every unassociated detection (with the bracketing
/// AIS gap when one sits within `bracket_search_km`).
pub fn association_report(
    assocs: &[Association],
    detections: &[SarDetection],
    tracks: &[Track],
    max_gap_s: i64,
    bracket_search_km: f64,
) -> AnnotatedScene {
    let det_by_id: BTreeMap<&str, &SarDetection> =
        detections.iter().map(|d| (d.id.as_str(), d)).collect();
    let track_by_mmsi: BTreeMap<Mmsi, &Track> =
        tracks.iter().map(|t| (t.mmsi(), t)).collect();

    let mut records = Vec::with_capacity(assocs.len());
    for a in assocs {
        let Some(det) = det_by_id.get(a.detection_id.as_str()) else {
            continue;
        };
        let mut rec = SceneRecord {
            detection_id: a.detection_id.clone(),
            image_id: det.image_id.clone(),
            t_acq: det.t_acq,
            det_pos: det.pos,
            mmsi: a.mmsi,
            track_pos: None,
            distance_m: a.distance_m,
            offset_en_m: None,
            used_prediction: a.used_prediction,
            flag: None,
        };
        match a.mmsi {
            Some(mmsi) => {
                if let Some(track) = track_by_mmsi.get(&mmsi) {
                    let pos = if a.used_prediction {
                        None // prediction-side position is reported by the predict pipeline
                    } else {
                        interpolate_position(track, det.t_acq, max_gap_s)
                    };
                    if let Some(pos) = pos {
                        let frame = LocalFrame::new(pos);
                        rec.track_pos = Some(pos);
                        rec.offset_en_m = Some(frame.to_local(det.pos));
                    }
                }
            }
            None => {
                rec.flag = Some(flag_for_unassociated(det, tracks, bracket_search_km));
            }
        }
        records.push(rec);
    }
    AnnotatedScene { records }
}

fn flag_for_unassociated(
    det: &SarDetection,
    tracks: &[Track],
    bracket_search_km: f64,
) -> FlagReason {
    let mut best: Option<(f64, Mmsi, i64)> = None;
    for track in tracks {
        for gap in find_gaps(track, 1) {
            if gap.t_start < det.t_acq && det.t_acq < gap.t_end {
                let d = geodesic_distance(det.pos, gap.start_pos)
                    .min(geodesic_distance(det.pos, gap.end_pos));
                if d <= bracket_search_km * 1000.0 {
                    let better = match &best {
                        Some((bd, bm, _)) => {
                            d < *bd || (d == *bd && track.mmsi() < *bm)
                        }
                        None => true,
                    };
                    if better {
                        best = Some((d, track.mmsi(), gap.duration_s));
                    }
                }
            }
        }
    }
    match best {
        Some((d, mmsi, gap_s)) => FlagReason::GapBracketing {
            mmsi,
            gap_s,
            nearest_endpoint_m: d,
        },
        None => FlagReason::NoNearbyTrack,
    }
}

pub const DETECTIONS_CSV_HEADER: &str = "id,image_id,timestamp,lat,lon";

/// Parses the detections CSV (`id,image_id,timestamp,lat,lon`).
pub fn parse_detections_csv(path: &Path) -> Result<Vec<SarDetection>, SarError> {
    let file = std::fs::File::open(path).map_err(|source| SarError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_detections_reader(file, &path.display().to_string())
}

pub fn parse_detections_reader<R: Read>(
    reader: R,
    path: &str,
) -> Result<Vec<SarDetection>, SarError> {
    let bad = |reason: String| SarError::BadFile {
        path: path.to_string(),
        reason,
    };
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .comment(Some(b'#'))
        .from_reader(reader);
    let header = rdr
        .headers()
        .map_err(|e| bad(e.to_string()))?
        .iter()
        .collect::<Vec<_>>()
        .join(",");
    if header != DETECTIONS_CSV_HEADER {
        return Err(bad(format!(
            "expected header `{DETECTIONS_CSV_HEADER}`, got `{header}`"
        )));
    }
    let mut out = Vec::new();
    for record in rdr.records() {
        let r = record.map_err(|e| bad(e.to_string()))?;
        let line = r.position().map(|p| p.line()).unwrap_or(0);
        if r.len() != 5 {
            return Err(bad(format!("line {line}: expected 5 fields, got {}", r.len())));
        }
        let field = |i: usize| r.get(i).unwrap_or("").trim();
        let t_acq = Timestamp::parse_iso8601(field(2))
            .ok_or_else(|| bad(format!("line {line}: bad timestamp `{}`", field(2))))?;
        let lat: f64 = field(3)
            .parse()
            .map_err(|_| bad(format!("line {line}: bad lat `{}`", field(3))))?;
        let lon: f64 = field(4)
            .parse()
            .map_err(|_| bad(format!("line {line}: bad lon `{}`", field(4))))?;
        let pos = GeoPoint::new(lat, lon).map_err(|e| bad(format!("line {line}: {e}")))?;
        out.push(SarDetection {
            id: field(0).to_string(),
            image_id: field(1).to_string(),
            t_acq,
            pos,
        });
    }
    Ok(out)
}

/// Writes the association CSV
/// (`detection_id,mmsi,distance_m,used_prediction,flag`).
pub fn write_associations_csv<W: std::io::Write>(
    mut w: W,
    scene: &AnnotatedScene,
) -> std::io::Result<()> {
    writeln!(w, "detection_id,mmsi,distance_m,used_prediction,flag")?;
    for r in &scene.records {
        let flag = match &r.flag {
            Some(FlagReason::GapBracketing { mmsi, .. }) => format!("gap_bracketing:{mmsi}"),
            Some(FlagReason::NoNearbyTrack) => "no_nearby_track".to_string(),
            None => String::new(),
        };
        writeln!(
            w,
            "{},{},{},{},{}",
            r.detection_id,
            r.mmsi.map(|m| m.to_string()).unwrap_or_default(),
            r.distance_m.map(crate::ais::fmt_f64).unwrap_or_default(),
            r.used_prediction,
            flag
        )?;
    }
    Ok(())
}
