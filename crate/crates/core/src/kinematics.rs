//! Per-track kinematics: position interpolation inside bounded gaps, gap
//! detection, and time-weighted speed/turn statistics.
//!
//! Reported values are treated as step functions: a report's sog/cog hold
//! from its timestamp until the next report. Statistics are therefore
//! time-weighted, not sample-weighted — AIS cadence rises with speed and
//! sample-weighting would bias toward fast segments.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ais::{Mmsi, Timestamp, Track};
use crate::geo::{interpolate_great_circle, GeoPoint};

#[derive(Debug, Error, PartialEq)]
pub enum KinematicsError {
    #[error("no points inside the window {0} .. {1}")]
    NoPointsInWindow(Timestamp, Timestamp),
    #[error("window end must be after start")]
    EmptyWindow,
}

/// Closed time interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimeWindow {
    pub start: Timestamp,
    pub end: Timestamp,
}

impl TimeWindow {
    pub fn new(start: Timestamp, end: Timestamp) -> Result<TimeWindow, KinematicsError> {
        if end <= start {
            return Err(KinematicsError::EmptyWindow);
        }
        Ok(TimeWindow { start, end })
    }

    pub fn contains(&self, t: Timestamp) -> bool {
        self.start <= t && t <= self.end
    }

    pub fn duration_s(&self) -> i64 {
        self.end.seconds_since(self.start)
    }
}

/// A silence between two consecutive reports.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Gap {
    pub mmsi: Mmsi,
    pub t_start: Timestamp,
    pub t_end: Timestamp,
    pub duration_s: i64,
    pub start_pos: GeoPoint,
    pub end_pos: GeoPoint,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KinematicStats {
    pub mean_sog_kn: f64,
    pub manoeuvre_rate_per_min: f64,
    pub drift_fraction: f64,
}

/// Kinematic regime at one instant, derived from speed alone.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrajectoryClass {
    Anchored,
    Drifting,
    Underway,
}

/// Speed below 0.5 kn reads as anchored/moored, below the drift threshold
/// as drifting, anything faster as underway.
pub fn speed_class(sog_kn: f64, drift_threshold_kn: f64) -> TrajectoryClass {
    if sog_kn < 0.5 {
        TrajectoryClass::Anchored
    } else if sog_kn < drift_threshold_kn {
        TrajectoryClass::Drifting
    } else {
        TrajectoryClass::Underway
    }
}

/// Circular difference between two courses, always in [0, 180] degrees.
pub fn circular_course_diff_deg(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(360.0);
    d.min(360.0 - d)
}

/// Great-circle position of the track at time `t`.
///
/// Returns the exact report position when `t` hits a report, a
/// great-circle time interpolation when `t` falls between two reports no
/// more than `max_gap_s` apart, and `None` when `t` is outside the track
/// span or inside a longer gap (callers may fall back to long-term
/// prediction in that case).
pub fn interpolate_position(track: &Track, t: Timestamp, max_gap_s: i64) -> Option<GeoPoint> {
    assert!(max_gap_s > 0, "max_gap_s must be > 0");
    let points = track.points();
    if t < points[0].t || t > points[points.len() - 1].t {
        return None;
    }
    let idx = points.partition_point(|p| p.t < t);
    if idx < points.len() && points[idx].t == t {
        return Some(points[idx].pos);
    }
    // t lies strictly between points[idx-1] and points[idx]
    let before = &points[idx - 1];
    let after = &points[idx];
    let span = after.t.seconds_since(before.t);
    if span > max_gap_s {
        return None;
    }
    let f = t.seconds_since(before.t) as f64 / span as f64;
    Some(interpolate_great_circle(before.pos, after.pos, f))
}

/// All consecutive-report spacings strictly longer than `min_duration_s`,
/// time-ordered.
pub fn find_gaps(track: &Track, min_duration_s: i64) -> Vec<Gap> {
    assert!(min_duration_s > 0, "min_duration_s must be > 0");
    track
        .points()
        .windows(2)
        .filter(|w| w[1].t.seconds_since(w[0].t) > min_duration_s)
        .map(|w| Gap {
            mmsi: track.mmsi(),
            t_start: w[0].t,
            t_end: w[1].t,
            duration_s: w[1].t.seconds_since(w[0].t),
            start_pos: w[0].pos,
            end_pos: w[1].pos,
        })
        .collect()
}

/// Time-weighted speed/turn statistics over `window`.
///
/// `mean_sog_kn` and `drift_fraction` integrate the sog step function
/// over the overlap of `window` with the track span. A manoeuvre event is
/// a circular course change above `turn_threshold_deg` between two
/// consecutive reports inside the window.
pub fn compute_stats(
    track: &Track,
    window: TimeWindow,
    drift_threshold_kn: f64,
    turn_threshold_deg: f64,
) -> Result<KinematicStats, KinematicsError> {
    assert!(drift_threshold_kn > 0.0 && turn_threshold_deg > 0.0);
    let points = track.points();
    let in_window: Vec<&crate::ais::AisPoint> =
        points.iter().filter(|p| window.contains(p.t)).collect();

    let domain_start = window.start.max(track.start());
    let domain_end = window.end.min(track.end());

    if in_window.is_empty() && domain_end < domain_start {
        return Err(KinematicsError::NoPointsInWindow(window.start, window.end));
    }

    let mut weight = 0.0f64;
    let mut sog_sum = 0.0f64;
    let mut drift_sum = 0.0f64;
    for w in points.windows(2) {
        let seg_start = w[0].t.max(domain_start);
        let seg_end = w[1].t.min(domain_end);
        if seg_end <= seg_start {
            continue;
        }
        let dur = seg_end.seconds_since(seg_start) as f64;
        weight += dur;
        sog_sum += w[0].sog_kn * dur;
        if w[0].sog_kn < drift_threshold_kn {
            drift_sum += dur;
        }
    }

    let (mean_sog_kn, drift_fraction) = if weight > 0.0 {
        (sog_sum / weight, drift_sum / weight)
    } else {
        // zero-measure overlap: fall back to the samples themselves
        if in_window.is_empty() {
            return Err(KinematicsError::NoPointsInWindow(window.start, window.end));
        }
        let n = in_window.len() as f64;
        let mean = in_window.iter().map(|p| p.sog_kn).sum::<f64>() / n;
        let drift = in_window
            .iter()
            .filter(|p| p.sog_kn < drift_threshold_kn)
            .count() as f64
            / n;
        (mean, drift)
    };

    let mut events = 0usize;
    for w in points.windows(2) {
        if window.contains(w[0].t)
            && window.contains(w[1].t)
            && circular_course_diff_deg(w[0].cog_deg, w[1].cog_deg) > turn_threshold_deg
        {
            events += 1;
        }
    }
    let manoeuvre_rate_per_min = if weight > 0.0 {
        events as f64 / (weight / 60.0)
    } else {
        0.0
    };

    Ok(KinematicStats {
        mean_sog_kn,
        manoeuvre_rate_per_min,
        drift_fraction,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ais::AisPoint;
    use crate::geo::geodesic_distance;
    use approx::assert_relative_eq;

    fn point(t: i64, lat: f64, lon: f64, sog: f64, cog: f64) -> AisPoint {
        AisPoint {
            mmsi: Mmsi::new(100_000_001).unwrap(),
            t: Timestamp(t),
            pos: GeoPoint::new(lat, lon).unwrap(),
            sog_kn: sog,
            cog_deg: cog,
            heading_deg: None,
            nav_status: None,
        }
    }

    fn track(points: Vec<AisPoint>) -> Track {
        Track::new(points).unwrap()
    }

    #[test]
    fn interpolation_at_knot_point_is_exact() {
        let tr = track(vec![
            point(0, 55.0, 15.0, 5.0, 0.0),
            point(600, 55.1, 15.0, 5.0, 0.0),
        ]);
        let p = interpolate_position(&tr, Timestamp(600), 21_600).unwrap();
        assert_eq!(p, tr.points()[1].pos);
    }

    #[test]
    fn interpolation_midpoint_on_meridian() {
        let tr = track(vec![
            point(0, 55.0, 15.0, 5.0, 0.0),
            point(1200, 55.2, 15.0, 5.0, 0.0),
        ]);
        let p = interpolate_position(&tr, Timestamp(600), 21_600).unwrap();
        assert_relative_eq!(p.lat(), 55.1, epsilon = 1e-9);
        assert_relative_eq!(p.lon(), 15.0, epsilon = 1e-9);
    }

    #[test]
    fn interpolation_refuses_long_gap() {
        let tr = track(vec![
            point(0, 55.0, 15.0, 5.0, 0.0),
            point(7 * 3600, 55.2, 15.0, 5.0, 0.0),
        ]);
        assert_eq!(interpolate_position(&tr, Timestamp(3 * 3600), 6 * 3600), None);
        // exactly 6 h spacing is still allowed ("at most 6 hours")
        let tr2 = track(vec![
            point(0, 55.0, 15.0, 5.0, 0.0),
            point(6 * 3600, 55.2, 15.0, 5.0, 0.0),
        ]);
        assert!(interpolate_position(&tr2, Timestamp(3 * 3600), 6 * 3600).is_some());
    }

    #[test]
    fn interpolation_outside_span_unavailable() {
        let tr = track(vec![
            point(100, 55.0, 15.0, 5.0, 0.0),
            point(200, 55.01, 15.0, 5.0, 0.0),
        ]);
        assert_eq!(interpolate_position(&tr, Timestamp(99), 3600), None);
        assert_eq!(interpolate_position(&tr, Timestamp(201), 3600), None);
    }

    #[test]
    fn interpolation_exact_on_constant_speed_great_circle() {
        // synthesize reports along one great circle and check interior
        // interpolation lands back on it to within a meter
        let a = GeoPoint::new(54.0, 14.0).unwrap();
        let b = GeoPoint::new(56.0, 19.0).unwrap();
        let n = 10;
        let points: Vec<AisPoint> = (0..=n)
            .map(|i| {
                let f = i as f64 / n as f64;
                let pos = interpolate_great_circle(a, b, f);
                AisPoint {
                    pos,
                    ..point(i * 600, 0.0, 0.0, 8.0, 45.0)
                }
            })
            .collect();
        let tr = track(points);
        for i in 0..60 {
            let t = Timestamp(i * 100);
            let f = (i * 100) as f64 / (n * 600) as f64;
            let expect = interpolate_great_circle(a, b, f);
            let got = interpolate_position(&tr, t, 3600).unwrap();
            assert!(geodesic_distance(expect, got) <= 1.0);
        }
    }

    #[test]
    fn no_gaps_at_uniform_cadence() {
        let points: Vec<AisPoint> = (0..120)
            .map(|i| point(i * 60, 55.0 + i as f64 * 1e-3, 15.0, 5.0, 0.0))
            .collect();
        assert!(find_gaps(&track(points), 3600).is_empty());
    }

    #[test]
    fn single_long_hole_reported_once() {
        let mut points = vec![point(0, 55.0, 15.0, 5.0, 0.0)];
        points.push(point(77_400, 55.5, 15.5, 5.0, 0.0)); // 21.5 h later
        points.push(point(77_400 + 600, 55.5, 15.6, 5.0, 0.0));
        let gaps = find_gaps(&track(points), 6 * 3600);
        assert_eq!(gaps.len(), 1);
        assert_eq!(gaps[0].duration_s, 77_400);
    }

    #[test]
    fn gaps_match_pair_scan_oracle() {
        // irregular cadence; oracle scans all consecutive pairs
        let spacings = [30i64, 600, 7200, 45, 90, 10_000, 30, 21_601, 55];
        let mut t = 0i64;
        let mut points = vec![point(0, 55.0, 15.0, 5.0, 0.0)];
        for (i, s) in spacings.iter().enumerate() {
            t += s;
            points.push(point(t, 55.0 + i as f64 * 0.01, 15.0, 5.0, 0.0));
        }
        let tr = track(points.clone());
        let min_dur = 3600;
        let oracle: Vec<(i64, i64)> = points
            .windows(2)
            .filter(|w| w[1].t.0 - w[0].t.0 > min_dur)
            .map(|w| (w[0].t.0, w[1].t.0))
            .collect();
        let gaps = find_gaps(&tr, min_dur);
        assert_eq!(
            gaps.iter().map(|g| (g.t_start.0, g.t_end.0)).collect::<Vec<_>>(),
            oracle
        );
        // disjointness
        for w in gaps.windows(2) {
            assert!(w[0].t_end <= w[1].t_start);
        }
    }

    #[test]
    fn stats_constant_speed_steady_course() {
        let points: Vec<AisPoint> = (0..61)
            .map(|i| point(i * 60, 55.0 + i as f64 * 1e-3, 15.0, 10.0, 90.0))
            .collect();
        let tr = track(points);
        let stats = compute_stats(
            &tr,
            TimeWindow::new(Timestamp(0), Timestamp(3600)).unwrap(),
            3.0,
            30.0,
        )
        .unwrap();
        assert_relative_eq!(stats.mean_sog_kn, 10.0);
        assert_eq!(stats.manoeuvre_rate_per_min, 0.0);
        assert_eq!(stats.drift_fraction, 0.0);
    }

    #[test]
    fn alternating_course_one_event_per_minute() {
        let points: Vec<AisPoint> = (0..11)
            .map(|i| point(i * 60, 55.0, 15.0 + i as f64 * 1e-3, 8.0, if i % 2 == 0 { 0.0 } else { 90.0 }))
            .collect();
        let tr = track(points);
        let stats = compute_stats(
            &tr,
            TimeWindow::new(Timestamp(0), Timestamp(600)).unwrap(),
            3.0,
            30.0,
        )
        .unwrap();
        // 10 events over 10 minutes, counted by hand
        assert_relative_eq!(stats.manoeuvre_rate_per_min, 1.0);
    }

    #[test]
    fn all_slow_is_full_drift() {
        let points: Vec<AisPoint> = (0..10)
            .map(|i| point(i * 120, 55.0, 15.0, 2.0, 10.0))
            .collect();
        let tr = track(points);
        let stats = compute_stats(
            &tr,
            TimeWindow::new(Timestamp(0), Timestamp(1080)).unwrap(),
            3.0,
            30.0,
        )
        .unwrap();
        assert_eq!(stats.drift_fraction, 1.0);
    }

    #[test]
    fn stats_invariant_under_cog_wraparound() {
        let mk = |shift: f64| -> Track {
            let points: Vec<AisPoint> = (0..20)
                .map(|i| {
                    point(
                        i * 60,
                        55.0,
                        15.0 + i as f64 * 1e-3,
                        6.0,
                        ((i as f64 * 47.0) + shift).rem_euclid(360.0),
                    )
                })
                .collect();
            track(points)
        };
        let w = TimeWindow::new(Timestamp(0), Timestamp(1140)).unwrap();
        let s0 = compute_stats(&mk(0.0), w, 3.0, 30.0).unwrap();
        let s1 = compute_stats(&mk(360.0), w, 3.0, 30.0).unwrap();
        assert_eq!(s0, s1);
    }

    #[test]
    fn circular_diff_in_range() {
        assert_eq!(circular_course_diff_deg(350.0, 10.0), 20.0);
        assert_eq!(circular_course_diff_deg(0.0, 180.0), 180.0);
        assert_eq!(circular_course_diff_deg(90.0, 90.0), 0.0);
        for a in [0.0, 13.0, 181.0, 359.0] {
            for b in [0.0, 90.5, 270.0] {
                let d = circular_course_diff_deg(a, b);
                assert!((0.0..=180.0).contains(&d));
                assert_eq!(d, circular_course_diff_deg(b, a));
            }
        }
    }

    #[test]
    fn window_without_points_errors() {
        let tr = track(vec![
            point(0, 55.0, 15.0, 5.0, 0.0),
            point(60, 55.0, 15.1, 5.0, 0.0),
        ]);
        let w = TimeWindow::new(Timestamp(1000), Timestamp(2000)).unwrap();
        assert!(matches!(
            compute_stats(&tr, w, 3.0, 30.0),
            Err(KinematicsError::NoPointsInWindow(_, _))
        ));
    }
}
