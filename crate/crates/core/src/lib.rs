//! Batch maritime-surveillance analytics around underwater critical
//! infrastructure (UCI): submarine pipelines, power cables and
//! communication cables.
//!
//! The crate fuses three kinds of input:
//!
//! * **AIS tracks** — self-reported vessel positions, parsed from CSV and
//!   assembled into per-MMSI trajectories ([`ais`]).
//! * **SAR detections** — ship positions extracted upstream from satellite
//!   radar imagery, associated to AIS tracks by gated optimal assignment
//!   ([`sar`]).
//! * **UCI geometry** — cable and pipeline routes with protection
//!   corridors, loaded from GeoJSON ([`uci`]).
//!
//! On top of those it provides trajectory kinematics and gap detection
//! ([`kinematics`]), traffic/stationary density maps and DBSCAN clustering
//! ([`density`]), mean-reverting long-term position prediction for
//! bridging AIS blackouts ([`ou`]), rule-based anomaly indicators
//! ([`anomaly`]), Dempster-Shafer evidential fusion into per-vessel threat
//! assessments ([`evidential`]), and graph robustness / cascading-failure
//! analysis of cable networks ([`netrisk`]).
//!
//! Everything is deterministic given fixed inputs and seeds; all
//! computations are pure functions over immutable data and safe to run in
//! parallel over vessels or scenes.

pub mod ais;
pub mod anomaly;
pub mod assign;
pub mod density;
pub mod evidential;
pub mod geo;
pub mod kinematics;
pub mod netrisk;
pub mod ou;
pub mod sar;
pub mod scenario;
pub mod uci;
