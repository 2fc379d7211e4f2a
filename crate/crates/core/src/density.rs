//! Traffic and stationary-area density maps from historical AIS, plus
//! DBSCAN clustering of low-speed fixes into stationary areas.
//!
//! Density deposits dwell *time*, not message counts — AIS cadence varies
//! with speed, and message counting would overweight fast vessels.
//! Normalcy scores are empirical quantiles of the nonzero-cell
//! distribution, which keeps them scale-free across regions and time
//! windows.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ais::Track;
use crate::geo::{geodesic_distance, interpolate_great_circle, GeoPoint, GridSpec};
use crate::kinematics::TimeWindow;

#[derive(Debug, Error, PartialEq)]
pub enum DensityError {
    #[error("point ({0}, {1}) outside the grid bbox")]
    OutsideBbox(f64, f64),
    #[error("grid has no nonzero cells")]
    EmptyGrid,
}

/// Time-weighted presence per cell, in vessel-seconds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityGrid {
    pub spec: GridSpec,
    counts: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DensityMode {
    AllTraffic,
    Stationary,
}

impl DensityGrid {
    pub fn zeros(spec: GridSpec) -> DensityGrid {
        let n = spec.n_cells();
        DensityGrid {
            spec,
            counts: vec![0.0; n],
        }
    }

    pub fn counts(&self) -> &[f64] {
        &self.counts
    }

    pub fn at(&self, row: usize, col: usize) -> f64 {
        self.counts[self.spec.index(row, col)]
    }

    /// Total deposited weight in vessel-seconds.
    pub fn total(&self) -> f64 {
        self.counts.iter().sum()
    }

    /// Adds `seconds` of dwell to the cell containing `p`; silently
    /// ignores positions outside the bbox.
    pub fn add_dwell(&mut self, p: GeoPoint, seconds: f64) {
        if let Some((r, c)) = self.spec.cell_of(p) {
            let i = self.spec.index(r, c);
            self.counts[i] += seconds;
        }
    }

    /// Exports `cell_lat,cell_lon,weight_vessel_hours` rows for nonzero
    /// cells, row-major. The grid geometry goes in a sidecar header (see
    /// [`DensityGrid::sidecar`]).
    pub fn to_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "cell_lat,cell_lon,weight_vessel_hours")?;
        for r in 0..self.spec.rows {
            for c in 0..self.spec.cols {
                let v = self.at(r, c);
                if v > 0.0 {
                    let center = self.spec.cell_center(r, c);
                    writeln!(
                        w,
                        "{},{},{}",
                        crate::ais::fmt_f64(center.lat()),
                        crate::ais::fmt_f64(center.lon()),
                        crate::ais::fmt_f64(v / 3600.0)
                    )?;
                }
            }
        }
        Ok(())
    }

    /// Key-value sidecar describing the lattice.
    pub fn sidecar(&self) -> String {
        format!(
            "lat_min={}\nlat_max={}\nlon_min={}\nlon_max={}\ncell_deg={}\nrows={}\ncols={}\n",
            crate::ais::fmt_f64(self.spec.lat_min),
            crate::ais::fmt_f64(self.spec.lat_max),
            crate::ais::fmt_f64(self.spec.lon_min),
            crate::ais::fmt_f64(self.spec.lon_max),
            crate::ais::fmt_f64(self.spec.cell_deg),
            self.spec.rows,
            self.spec.cols
        )
    }
}

/// Accumulates dwell time per cell over `interval`.
///
/// Each consecutive-report segment clipped to the interval is subsampled
/// finely enough that a step covers at most a quarter cell, and each
/// substep deposits its exact duration into the cell holding its
/// midpoint, so total deposited weight equals total in-interval in-bbox
/// dwell. In [`DensityMode::Stationary`] only segments whose starting
/// report moves slower than `drift_threshold_kn` deposit.
pub fn build_density(
    tracks: &[Track],
    spec: GridSpec,
    interval: TimeWindow,
    mode: DensityMode,
    drift_threshold_kn: f64,
) -> DensityGrid {
    let mut grid = DensityGrid::zeros(spec);
    let cell_m = grid.spec.cell_deg * 111_194.93; // one degree of latitude
    for track in tracks {
        for w in track.points().windows(2) {
            let seg_start = w[0].t.max(interval.start);
            let seg_end = w[1].t.min(interval.end);
            if seg_end <= seg_start {
                continue;
            }
            if mode == DensityMode::Stationary && w[0].sog_kn >= drift_threshold_kn {
                continue;
            }
            let span = w[1].t.seconds_since(w[0].t) as f64;
            let dur = seg_end.seconds_since(seg_start) as f64;
            let dist = geodesic_distance(w[0].pos, w[1].pos) * dur / span;
            let steps = ((dist / (cell_m * 0.25)).ceil() as usize).max(1);
            let dt = dur / steps as f64;
            for k in 0..steps {
                let t_mid = seg_start.0 as f64 + (k as f64 + 0.5) * dt;
                let f = (t_mid - w[0].t.0 as f64) / span;
                let pos = interpolate_great_circle(w[0].pos, w[1].pos, f);
                grid.add_dwell(pos, dt);
            }
        }
    }
    grid
}

/// Empirical-quantile normalcy of position `p` against the grid.
///
/// Returns 0 for untraversed cells, otherwise the fraction of nonzero
/// cells with weight <= the cell's weight (so the densest cell scores
/// 1.0, and a uniform nonzero grid scores 1.0 everywhere).
pub fn normalcy_score(grid: &DensityGrid, p: GeoPoint) -> Result<f64, DensityError> {
    let (r, c) = grid
        .spec
        .cell_of(p)
        .ok_or(DensityError::OutsideBbox(p.lat(), p.lon()))?;
    let v = grid.at(r, c);
    if v == 0.0 {
        return Ok(0.0);
    }
    let mut nonzero = 0usize;
    let mut le = 0usize;
    for &x in grid.counts() {
        if x > 0.0 {
            nonzero += 1;
            if x <= v {
                le += 1;
            }
        }
    }
    if nonzero == 0 {
        return Err(DensityError::EmptyGrid);
    }
    Ok(le as f64 / nonzero as f64)
}

/// DBSCAN point label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DbscanLabel {
    Cluster(usize),
    Noise,
}

/// Plain DBSCAN under geodesic distance.
///
/// A core point has at least `min_pts` neighbors within `eps_m`
/// (counting itself). Clusters grow by density-reachability; border
/// points go to the first cluster that reaches them. The scan visits
/// points in input-index order and expands queues in ascending index
/// order, so the labeling is fully deterministic for a given input
/// ordering.
pub fn dbscan(points: &[GeoPoint], eps_m: f64, min_pts: usize) -> Vec<DbscanLabel> {
    assert!(eps_m > 0.0, "eps_m must be > 0");
    assert!(min_pts >= 1, "min_pts must be >= 1");
    let n = points.len();
    let mut labels = vec![DbscanLabel::Noise; n];
    let mut visited = vec![false; n];
    let neighbors = |i: usize| -> Vec<usize> {
        (0..n)
            .filter(|&j| geodesic_distance(points[i], points[j]) <= eps_m)
            .collect()
    };
    let mut cluster = 0usize;
    for i in 0..n {
        if visited[i] {
            continue;
        }
        visited[i] = true;
        let nb = neighbors(i);
        if nb.len() < min_pts {
            continue; // stays Noise unless a later cluster claims it
        }
        labels[i] = DbscanLabel::Cluster(cluster);
        let mut queue: std::collections::VecDeque<usize> = nb.into_iter().collect();
        while let Some(j) = queue.pop_front() {
            if labels[j] == DbscanLabel::Noise {
                labels[j] = DbscanLabel::Cluster(cluster);
            }
            if visited[j] {
                continue;
            }
            visited[j] = true;
            let nbj = neighbors(j);
            if nbj.len() >= min_pts {
                labels[j] = DbscanLabel::Cluster(cluster);
                queue.extend(nbj);
            }
        }
        cluster += 1;
    }
    labels
}

/// A low-speed AIS fix weighted by how long the vessel held it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LowSpeedFix {
    pub pos: GeoPoint,
    pub dwell_s: f64,
}

/// Pulls the below-threshold fixes out of tracks, weighting each report
/// by its hold time (to the next report, clipped to `interval`).
/// Deterministic order: tracks by mmsi, then report time.
pub fn extract_low_speed_fixes(
    tracks: &[Track],
    interval: TimeWindow,
    drift_threshold_kn: f64,
) -> Vec<LowSpeedFix> {
    let mut sorted: Vec<&Track> = tracks.iter().collect();
    sorted.sort_by_key(|t| t.mmsi());
    let mut out = Vec::new();
    for track in sorted {
        for w in track.points().windows(2) {
            if w[0].sog_kn >= drift_threshold_kn {
                continue;
            }
            let seg_start = w[0].t.max(interval.start);
            let seg_end = w[1].t.min(interval.end);
            if seg_end <= seg_start {
                continue;
            }
            out.push(LowSpeedFix {
                pos: w[0].pos,
                dwell_s: seg_end.seconds_since(seg_start) as f64,
            });
        }
    }
    out
}

/// A cluster of stationary behavior.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationaryArea {
    pub id: usize,
    pub member_points: Vec<usize>,
    pub centroid: GeoPoint,
    /// vessel-hours of dwell accumulated by the members
    pub dwell_weight: f64,
}

/// Clusters weighted low-speed fixes into stationary areas (DBSCAN over
/// positions, then per-cluster aggregation). Noise fixes are dropped.
pub fn cluster_stationary(
    fixes: &[LowSpeedFix],
    eps_m: f64,
    min_pts: usize,
) -> Vec<StationaryArea> {
    let positions: Vec<GeoPoint> = fixes.iter().map(|f| f.pos).collect();
    let labels = dbscan(&positions, eps_m, min_pts);
    let n_clusters = labels
        .iter()
        .filter_map(|l| match l {
            DbscanLabel::Cluster(c) => Some(c + 1),
            DbscanLabel::Noise => None,
        })
        .max()
        .unwrap_or(0);
    let mut areas = Vec::with_capacity(n_clusters);
    for c in 0..n_clusters {
        let members: Vec<usize> = labels
            .iter()
            .enumerate()
            .filter(|(_, l)| **l == DbscanLabel::Cluster(c))
            .map(|(i, _)| i)
            .collect();
        let weight_s: f64 = members.iter().map(|&i| fixes[i].dwell_s).sum();
        // dwell-weighted arithmetic centroid; fine at anchorage scales
        let (mut lat, mut lon) = (0.0, 0.0);
        for &i in &members {
            lat += fixes[i].pos.lat() * fixes[i].dwell_s;
            lon += fixes[i].pos.lon() * fixes[i].dwell_s;
        }
        let centroid = GeoPoint::new(lat / weight_s, lon / weight_s)
            .expect("centroid of valid points is valid");
        areas.push(StationaryArea {
            id: c,
            member_points: members,
            centroid,
            dwell_weight: weight_s / 3600.0,
        });
    }
    areas
}
