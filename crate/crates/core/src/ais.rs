//! AIS ingestion: CSV parsing with per-row validation, deduplication and
//! assembly of per-MMSI time-ordered tracks.
//!
//! Input format is decoded archival AIS as CSV with the fixed header
//! `mmsi,timestamp,lat,lon,sog,cog,heading,nav_status` (timestamps
//! ISO-8601 UTC, empty string for absent heading/nav_status). Raw
//! NMEA/ITU-R M.1371 decoding is out of scope. Malformed rows are never
//! silently dropped: they come back as structured [`RecordError`]s with
//! line numbers.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Read;
use std::path::Path;

use chrono::{DateTime, TimeZone, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geo::GeoPoint;

/// AIS sog encoding ceiling (102.2 kn means "102.2 or higher" on the
/// wire; anything at or above it is rejected here).
pub const SOG_MAX_KN: f64 = 102.2;

pub const AIS_CSV_HEADER: &str = "mmsi,timestamp,lat,lon,sog,cog,heading,nav_status";
pub const VESSEL_INFO_CSV_HEADER: &str = "mmsi,name,ship_type,length_m,ownership_risk";

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("cannot open {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("unreadable header in {path}: expected `{expected}`, got `{got}`")]
    BadHeader {
        path: String,
        expected: String,
        got: String,
    },
    #[error("csv error in {path}: {source}")]
    Csv { path: String, source: csv::Error },
}

/// UTC timestamp with seconds resolution, stored as unix seconds.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
pub struct Timestamp(pub i64);

impl Timestamp {
    pub fn parse_iso8601(s: &str) -> Option<Timestamp> {
        DateTime::parse_from_rfc3339(s)
            .ok()
            .map(|dt| Timestamp(dt.timestamp()))
    }

    pub fn seconds_since(&self, earlier: Timestamp) -> i64 {
        self.0 - earlier.0
    }

    pub fn plus_seconds(&self, s: i64) -> Timestamp {
        Timestamp(self.0 + s)
    }
}

impl fmt::Display for Timestamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match Utc.timestamp_opt(self.0, 0).single() {
            Some(dt) => write!(f, "{}", dt.format("%Y-%m-%dT%H:%M:%SZ")),
            None => write!(f, "@{}", self.0),
        }
    }
}

/// Maritime Mobile Service Identity: up to nine decimal digits, nonzero.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
pub struct Mmsi(pub u32);

impl Mmsi {
    pub fn new(raw: u32) -> Option<Mmsi> {
        if raw == 0 || raw > 999_999_999 {
            None
        } else {
            Some(Mmsi(raw))
        }
    }
}

impl fmt::Display for Mmsi {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// AIS navigational status (ITU-R M.1371 code subset).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NavStatus {
    UnderWayUsingEngine,
    AtAnchor,
    NotUnderCommand,
    RestrictedManoeuvrability,
    ConstrainedByDraught,
    Moored,
    Aground,
    EngagedInFishing,
    UnderWaySailing,
    Other(u8),
}

impl NavStatus {
    pub fn from_code(code: u8) -> NavStatus {
        match code {
            0 => NavStatus::UnderWayUsingEngine,
            1 => NavStatus::AtAnchor,
            2 => NavStatus::NotUnderCommand,
            3 => NavStatus::RestrictedManoeuvrability,
            4 => NavStatus::ConstrainedByDraught,
            5 => NavStatus::Moored,
            6 => NavStatus::Aground,
            7 => NavStatus::EngagedInFishing,
            8 => NavStatus::UnderWaySailing,
            c => NavStatus::Other(c),
        }
    }

    pub fn code(&self) -> u8 {
        match self {
            NavStatus::UnderWayUsingEngine => 0,
            NavStatus::AtAnchor => 1,
            NavStatus::NotUnderCommand => 2,
            NavStatus::RestrictedManoeuvrability => 3,
            NavStatus::ConstrainedByDraught => 4,
            NavStatus::Moored => 5,
            NavStatus::Aground => 6,
            NavStatus::EngagedInFishing => 7,
            NavStatus::UnderWaySailing => 8,
            NavStatus::Other(c) => *c,
        }
    }

    /// True for statuses that claim the vessel is held in place.
    pub fn claims_stationary(&self) -> bool {
        matches!(
            self,
            NavStatus::AtAnchor | NavStatus::Moored | NavStatus::Aground
        )
    }
}

/// One AIS kinematic report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AisPoint {
    pub mmsi: Mmsi,
    pub t: Timestamp,
    pub pos: GeoPoint,
    pub sog_kn: f64,
    pub cog_deg: f64,
    pub heading_deg: Option<f64>,
    pub nav_status: Option<NavStatus>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShipType {
    Cargo,
    Tanker,
    Fishing,
    Passenger,
    Tug,
    Military,
    Pleasure,
    Research,
    Other,
}

impl ShipType {
    fn parse(s: &str) -> Option<ShipType> {
        match s.to_ascii_lowercase().as_str() {
            "cargo" => Some(ShipType::Cargo),
            "tanker" => Some(ShipType::Tanker),
            "fishing" => Some(ShipType::Fishing),
            "passenger" => Some(ShipType::Passenger),
            "tug" => Some(ShipType::Tug),
            "military" => Some(ShipType::Military),
            "pleasure" => Some(ShipType::Pleasure),
            "research" => Some(ShipType::Research),
            "other" => Some(ShipType::Other),
            _ => None,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            ShipType::Cargo => "cargo",
            ShipType::Tanker => "tanker",
            ShipType::Fishing => "fishing",
            ShipType::Passenger => "passenger",
            ShipType::Tug => "tug",
            ShipType::Military => "military",
            ShipType::Pleasure => "pleasure",
            ShipType::Research => "research",
            ShipType::Other => "other",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OwnershipRisk {
    Low,
    Medium,
    High,
    Unknown,
}

impl OwnershipRisk {
    pub fn parse(s: &str) -> Option<OwnershipRisk> {
        match s.to_ascii_lowercase().as_str() {
            "low" => Some(OwnershipRisk::Low),
            "medium" => Some(OwnershipRisk::Medium),
            "high" => Some(OwnershipRisk::High),
            "unknown" | "" => Some(OwnershipRisk::Unknown),
            _ => None,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            OwnershipRisk::Low => "low",
            OwnershipRisk::Medium => "medium",
            OwnershipRisk::High => "high",
            OwnershipRisk::Unknown => "unknown",
        }
    }
}

/// Non-kinematic vessel attributes joined onto tracks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VesselInfo {
    pub mmsi: Mmsi,
    pub name: Option<String>,
    pub ship_type: Option<ShipType>,
    pub length_m: Option<f64>,
    pub ownership_risk: OwnershipRisk,
}

impl VesselInfo {
    pub fn unknown(mmsi: Mmsi) -> VesselInfo {
        VesselInfo {
            mmsi,
            name: None,
            ship_type: None,
            length_m: None,
            ownership_risk: OwnershipRisk::Unknown,
        }
    }
}

/// A per-vessel trajectory: strictly increasing timestamps, one MMSI.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Track {
    mmsi: Mmsi,
    points: Vec<AisPoint>,
    pub info: VesselInfo,
}

impl Track {
    /// Builds a track from points that must already share one MMSI and be
    /// strictly time-ascending.
    pub fn new(points: Vec<AisPoint>) -> Result<Track, TrackError> {
        let first = points.first().ok_or(TrackError::Empty)?;
        let mmsi = first.mmsi;
        for w in points.windows(2) {
            if w[1].mmsi != mmsi {
                return Err(TrackError::MixedMmsi);
            }
            if w[1].t <= w[0].t {
                return Err(TrackError::NonIncreasingTime);
            }
        }
        Ok(Track {
            mmsi,
            points,
            info: VesselInfo::unknown(mmsi),
        })
    }

    pub fn mmsi(&self) -> Mmsi {
        self.mmsi
    }

    pub fn points(&self) -> &[AisPoint] {
        &self.points
    }

    pub fn start(&self) -> Timestamp {
        self.points[0].t
    }

    pub fn end(&self) -> Timestamp {
        self.points[self.points.len() - 1].t
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum TrackError {
    #[error("track needs at least one point")]
    Empty,
    #[error("points carry more than one mmsi")]
    MixedMmsi,
    #[error("timestamps not strictly increasing")]
    NonIncreasingTime,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecordErrorKind {
    Parse,
    Range,
    FieldCount,
    DuplicateConflict,
}

/// A rejected or suspicious input row, with enough context to audit it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordError {
    pub line: Option<u64>,
    pub kind: RecordErrorKind,
    pub field: Option<String>,
    pub message: String,
}

fn row_error(line: u64, kind: RecordErrorKind, field: &str, message: String) -> RecordError {
    RecordError {
        line: Some(line),
        kind,
        field: if field.is_empty() {
            None
        } else {
            Some(field.to_string())
        },
        message,
    }
}

/// Parses one AIS CSV file. Every well-formed row becomes an [`AisPoint`];
/// every malformed row becomes a [`RecordError`]. Rows are never dropped
/// silently: points + errors account for every data row.
pub fn parse_ais_csv(path: &Path) -> Result<(Vec<AisPoint>, Vec<RecordError>), IngestError> {
    let file = std::fs::File::open(path).map_err(|source| IngestError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_ais_reader(file, &path.display().to_string())
}

pub fn parse_ais_reader<R: Read>(
    reader: R,
    path: &str,
) -> Result<(Vec<AisPoint>, Vec<RecordError>), IngestError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .comment(Some(b'#'))
        .from_reader(reader);
    let header = rdr
        .headers()
        .map_err(|source| IngestError::Csv {
            path: path.to_string(),
            source,
        })?
        .iter()
        .collect::<Vec<_>>()
        .join(",");
    if header != AIS_CSV_HEADER {
        return Err(IngestError::BadHeader {
            path: path.to_string(),
            expected: AIS_CSV_HEADER.to_string(),
            got: header,
        });
    }

    let mut points = Vec::new();
    let mut errors = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|source| IngestError::Csv {
            path: path.to_string(),
            source,
        })?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        match parse_ais_record(&record, line) {
            Ok(p) => points.push(p),
            Err(e) => errors.push(e),
        }
    }
    Ok((points, errors))
}

fn parse_ais_record(record: &csv::StringRecord, line: u64) -> Result<AisPoint, RecordError> {
    if record.len() != 8 {
        return Err(row_error(
            line,
            RecordErrorKind::FieldCount,
            "",
            format!("expected 8 fields, got {}", record.len()),
        ));
    }
    let field = |i: usize| record.get(i).unwrap_or("").trim();

    let mmsi_raw: u32 = field(0).parse().map_err(|_| {
        row_error(
            line,
            RecordErrorKind::Parse,
            "mmsi",
            format!("`{}` is not an integer", field(0)),
        )
    })?;
    let mmsi = Mmsi::new(mmsi_raw).ok_or_else(|| {
        row_error(
            line,
            RecordErrorKind::Range,
            "mmsi",
            format!("{mmsi_raw} outside 1..=999999999"),
        )
    })?;

    let t = Timestamp::parse_iso8601(field(1)).ok_or_else(|| {
        row_error(
            line,
            RecordErrorKind::Parse,
            "timestamp",
            format!("`{}` is not ISO-8601 UTC", field(1)),
        )
    })?;

    let lat: f64 = parse_f64(field(2), line, "lat")?;
    let lon: f64 = parse_f64(field(3), line, "lon")?;
    if !lat.is_finite() || !(-90.0..=90.0).contains(&lat) {
        return Err(row_error(
            line,
            RecordErrorKind::Range,
            "lat",
            format!("{lat} outside [-90, 90]"),
        ));
    }
    if !lon.is_finite() {
        return Err(row_error(
            line,
            RecordErrorKind::Range,
            "lon",
            format!("{lon} not finite"),
        ));
    }
    let pos = GeoPoint::new(lat, lon).map_err(|e| {
        row_error(line, RecordErrorKind::Range, "lat", e.to_string())
    })?;

    let sog_kn: f64 = parse_f64(field(4), line, "sog")?;
    if !sog_kn.is_finite() || sog_kn < 0.0 || sog_kn >= SOG_MAX_KN {
        return Err(row_error(
            line,
            RecordErrorKind::Range,
            "sog",
            format!("{sog_kn} outside [0, {SOG_MAX_KN})"),
        ));
    }

    let cog_raw: f64 = parse_f64(field(5), line, "cog")?;
    if !cog_raw.is_finite() {
        return Err(row_error(
            line,
            RecordErrorKind::Range,
            "cog",
            format!("{cog_raw} not finite"),
        ));
    }
    let cog_deg = cog_raw.rem_euclid(360.0);

    let heading_deg = match field(6) {
        "" => None,
        s => {
            let h: f64 = parse_f64(s, line, "heading")?;
            if !h.is_finite() {
                return Err(row_error(
                    line,
                    RecordErrorKind::Range,
                    "heading",
                    format!("{h} not finite"),
                ));
            }
            Some(h.rem_euclid(360.0))
        }
    };

    let nav_status = match field(7) {
        "" => None,
        s => {
            let code: u8 = s.parse().map_err(|_| {
                row_error(
                    line,
                    RecordErrorKind::Parse,
                    "nav_status",
                    format!("`{s}` is not a status code"),
                )
            })?;
            Some(NavStatus::from_code(code))
        }
    };

    Ok(AisPoint {
        mmsi,
        t,
        pos,
        sog_kn,
        cog_deg,
        heading_deg,
        nav_status,
    })
}

fn parse_f64(s: &str, line: u64, field: &str) -> Result<f64, RecordError> {
    s.parse().map_err(|_| {
        row_error(
            line,
            RecordErrorKind::Parse,
            field,
            format!("`{s}` is not a number"),
        )
    })
}

/// Serializes points back to the canonical CSV layout (header included).
pub fn write_ais_csv<W: std::io::Write>(mut w: W, points: &[AisPoint]) -> std::io::Result<()> {
    writeln!(w, "{AIS_CSV_HEADER}")?;
    for p in points {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            p.mmsi,
            p.t,
            fmt_f64(p.pos.lat()),
            fmt_f64(p.pos.lon()),
            fmt_f64(p.sog_kn),
            fmt_f64(p.cog_deg),
            p.heading_deg.map(fmt_f64).unwrap_or_default(),
            p.nav_status.map(|s| s.code().to_string()).unwrap_or_default(),
        )?;
    }
    Ok(())
}

/// Shortest decimal representation that round-trips the exact f64.
pub fn fmt_f64(v: f64) -> String {
    let mut s = format!("{v}");
    if !s.contains('.') && !s.contains('e') && !s.contains("inf") && !s.contains("NaN") {
        s.push_str(".0");
    }
    s
}

/// Result of assembling tracks: the tracks themselves, how many input
/// points were collapsed as duplicates, and conflicting-duplicate reports.
#[derive(Debug, Clone)]
pub struct TrackSet {
    pub tracks: Vec<Track>,
    pub collapsed: usize,
    pub conflicts: Vec<RecordError>,
}

/// Groups points by MMSI into time-sorted tracks.
///
/// Points are first put in a canonical total order (mmsi, t, then the
/// remaining fields), which makes the result independent of input
/// permutation. Exact duplicates always collapse. Two points with the
/// same (mmsi, t) but different payloads keep the canonically-first one
/// and log a conflict. A point repeating the previous kept position
/// within `dedup_window_s` seconds collapses onto the earlier report.
pub fn build_tracks(points: &[AisPoint], dedup_window_s: i64) -> TrackSet {
    assert!(dedup_window_s >= 0, "dedup_window_s must be >= 0");
    let mut sorted: Vec<&AisPoint> = points.iter().collect();
    sorted.sort_by(|a, b| canonical_cmp(a, b));

    let mut by_mmsi: BTreeMap<Mmsi, Vec<AisPoint>> = BTreeMap::new();
    let mut collapsed = 0usize;
    let mut conflicts = Vec::new();

    for p in sorted {
        let run = by_mmsi.entry(p.mmsi).or_default();
        if let Some(last) = run.last() {
            if last == p {
                collapsed += 1;
                continue;
            }
            if last.t == p.t {
                collapsed += 1;
                conflicts.push(RecordError {
                    line: None,
                    kind: RecordErrorKind::DuplicateConflict,
                    field: None,
                    message: format!(
                        "mmsi {} has conflicting reports at {}; kept the canonically first",
                        p.mmsi, p.t
                    ),
                });
                continue;
            }
            if last.pos == p.pos && p.t.seconds_since(last.t) <= dedup_window_s {
                collapsed += 1;
                continue;
            }
        }
        run.push(*p);
    }

    let tracks = by_mmsi
        .into_values()
        .map(|pts| Track::new(pts).expect("grouped points form a valid track"))
        .collect();
    TrackSet {
        tracks,
        collapsed,
        conflicts,
    }
}

fn canonical_cmp(a: &AisPoint, b: &AisPoint) -> std::cmp::Ordering {
    (a.mmsi, a.t)
        .cmp(&(b.mmsi, b.t))
        .then_with(|| a.pos.lat().total_cmp(&b.pos.lat()))
        .then_with(|| a.pos.lon().total_cmp(&b.pos.lon()))
        .then_with(|| a.sog_kn.total_cmp(&b.sog_kn))
        .then_with(|| a.cog_deg.total_cmp(&b.cog_deg))
        .then_with(|| {
            a.heading_deg
                .unwrap_or(-1.0)
                .total_cmp(&b.heading_deg.unwrap_or(-1.0))
        })
        .then_with(|| {
            a.nav_status
                .map(|s| s.code() as i16)
                .unwrap_or(-1)
                .cmp(&b.nav_status.map(|s| s.code() as i16).unwrap_or(-1))
        })
}

/// Attaches vessel-info rows to matching tracks; tracks without a row
/// keep `VesselInfo::unknown`.
pub fn attach_info(tracks: &mut [Track], infos: &[VesselInfo]) {
    let by_mmsi: BTreeMap<Mmsi, &VesselInfo> = infos.iter().map(|i| (i.mmsi, i)).collect();
    for t in tracks {
        if let Some(info) = by_mmsi.get(&t.mmsi) {
            t.info = (*info).clone();
        }
    }
}

/// Parses the vessel-info CSV (`mmsi,name,ship_type,length_m,ownership_risk`).
pub fn parse_vessel_info_csv(
    path: &Path,
) -> Result<(Vec<VesselInfo>, Vec<RecordError>), IngestError> {
    let file = std::fs::File::open(path).map_err(|source| IngestError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_vessel_info_reader(file, &path.display().to_string())
}

pub fn parse_vessel_info_reader<R: Read>(
    reader: R,
    path: &str,
) -> Result<(Vec<VesselInfo>, Vec<RecordError>), IngestError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .comment(Some(b'#'))
        .from_reader(reader);
    let header = rdr
        .headers()
        .map_err(|source| IngestError::Csv {
            path: path.to_string(),
            source,
        })?
        .iter()
        .collect::<Vec<_>>()
        .join(",");
    if header != VESSEL_INFO_CSV_HEADER {
        return Err(IngestError::BadHeader {
            path: path.to_string(),
            expected: VESSEL_INFO_CSV_HEADER.to_string(),
            got: header,
        });
    }
    let mut infos = Vec::new();
    let mut errors = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|source| IngestError::Csv {
            path: path.to_string(),
            source,
        })?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        match parse_info_record(&record, line) {
            Ok(i) => infos.push(i),
            Err(e) => errors.push(e),
        }
    }
    Ok((infos, errors))
}

fn parse_info_record(record: &csv::StringRecord, line: u64) -> Result<VesselInfo, RecordError> {
    if record.len() != 5 {
        return Err(row_error(
            line,
            RecordErrorKind::FieldCount,
            "",
            format!("expected 5 fields, got {}", record.len()),
        ));
    }
    let field = |i: usize| record.get(i).unwrap_or("").trim();
    let mmsi_raw: u32 = field(0).parse().map_err(|_| {
        row_error(
            line,
            RecordErrorKind::Parse,
            "mmsi",
            format!("`{}` is not an integer", field(0)),
        )
    })?;
    let mmsi = Mmsi::new(mmsi_raw).ok_or_else(|| {
        row_error(
            line,
            RecordErrorKind::Range,
            "mmsi",
            format!("{mmsi_raw} outside 1..=999999999"),
        )
    })?;
    let name = match field(1) {
        "" => None,
        s => Some(s.to_string()),
    };
    let ship_type = match field(2) {
        "" => None,
        s => Some(ShipType::parse(s).ok_or_else(|| {
            row_error(
                line,
                RecordErrorKind::Parse,
                "ship_type",
                format!("unknown ship type `{s}`"),
            )
        })?),
    };
    let length_m = match field(3) {
        "" => None,
        s => {
            let v = parse_f64(s, line, "length_m")?;
            if !v.is_finite() || v <= 0.0 {
                return Err(row_error(
                    line,
                    RecordErrorKind::Range,
                    "length_m",
                    format!("{v} must be > 0"),
                ));
            }
            Some(v)
        }
    };
    let ownership_risk = OwnershipRisk::parse(field(4)).ok_or_else(|| {
        row_error(
            line,
            RecordErrorKind::Parse,
            "ownership_risk",
            format!("unknown ownership risk `{}`", field(4)),
        )
    })?;
    Ok(VesselInfo {
        mmsi,
        name,
        ship_type,
        length_m,
        ownership_risk,
    })
}
