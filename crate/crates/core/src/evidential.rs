//! Dempster-Shafer evidence algebra and a small valuation network that
//! fuses anomaly indicators, source reliability and contextual intel
//! into a per-vessel threat assessment.
//!
//! Frames stay small (at most 16 hypotheses), so focal sets are bitmasks
//! over the ordered frame and every powerset operation is exact. The
//! default frame is `{benign, suspicious, threat}`; frames are data and
//! callers can bring their own.
//!
//! Expert rules live outside code in a line-oriented text format:
//!
//! ```text
//! # trigger on an indicator kind, optionally gated by severity/context
//! RULE gap_near_cable WHEN ais_gap severity>=0.5 EMIT suspicious+threat:0.7 RELIABILITY 0.9
//! # trigger on context alone
//! RULE opaque_owner WHEN context ownership_risk=high EMIT suspicious:0.4,threat:0.1 RELIABILITY 0.8
//! ```
//!
//! `EMIT` masses are a template scaled by the triggering event's
//! severity, with the remainder on the full frame; the scaled mass is
//! then discounted by the rule's reliability and everything is combined
//! with Dempster's rule. The overall conflict is reported, never
//! silently swallowed.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ais::{Mmsi, NavStatus, Track, VesselInfo};
use crate::anomaly::{AnomalyEvent, AnomalyKind};
use crate::kinematics::{speed_class, TimeWindow, TrajectoryClass};

const MASS_SUM_TOL: f64 = 1e-9;
const TOTAL_CONFLICT_TOL: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum EvidentialError {
    #[error("frame needs 2..=16 distinct elements, got {0}")]
    BadFrame(usize),
    #[error("`{0}` is not an element of the frame")]
    UnknownElement(String),
    #[error("masses must be nonnegative and sum to 1 (off by {0})")]
    BadMass(f64),
    #[error("mass on the empty set is not allowed in normalized form")]
    EmptyFocalSet,
    #[error("operands live on different frames")]
    FrameMismatch,
    #[error("total conflict: the sources flatly contradict each other")]
    TotalConflict,
    #[error("rule set has no rules")]
    EmptyRuleSet,
    #[error("rule file line {line}: {reason}")]
    RuleParse { line: usize, reason: String },
}

/// Frame of discernment: a finite ordered set of mutually exclusive
/// hypotheses.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Frame {
    elements: Vec<String>,
}

impl Frame {
    pub fn new(elements: Vec<String>) -> Result<Frame, EvidentialError> {
        let unique: BTreeSet<&String> = elements.iter().collect();
        if elements.len() < 2 || elements.len() > 16 || unique.len() != elements.len() {
            return Err(EvidentialError::BadFrame(elements.len()));
        }
        Ok(Frame { elements })
    }

    /// The default threat frame.
    pub fn threat() -> Frame {
        Frame::new(vec!["benign".into(), "suspicious".into(), "threat".into()])
            .expect("static frame is valid")
    }

    /// Frame for AIS-status consistency checks.
    pub fn consistency() -> Frame {
        Frame::new(vec!["consistent".into(), "inconsistent".into()])
            .expect("static frame is valid")
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        false // by construction
    }

    pub fn elements(&self) -> &[String] {
        &self.elements
    }

    pub fn full_mask(&self) -> u32 {
        (1u32 << self.elements.len()) - 1
    }

    pub fn singleton(&self, name: &str) -> Result<u32, EvidentialError> {
        self.elements
            .iter()
            .position(|e| e == name)
            .map(|i| 1u32 << i)
            .ok_or_else(|| EvidentialError::UnknownElement(name.to_string()))
    }

    /// Bitmask for a set of element names.
    pub fn subset(&self, names: &[&str]) -> Result<u32, EvidentialError> {
        let mut mask = 0u32;
        for n in names {
            mask |= self.singleton(n)?;
        }
        Ok(mask)
    }

    /// Human-readable form of a subset mask.
    pub fn describe(&self, mask: u32) -> String {
        if mask == self.full_mask() {
            return "*".to_string();
        }
        let mut parts = Vec::new();
        for (i, e) in self.elements.iter().enumerate() {
            if mask & (1 << i) != 0 {
                parts.push(e.as_str());
            }
        }
        parts.join("+")
    }
}

/// Basic belief assignment over subsets of a frame, normalized (no mass
/// on the empty set, total mass 1).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MassFunction {
    frame: Frame,
    masses: BTreeMap<u32, f64>,
}

impl MassFunction {
    /// Total ignorance: all mass on the full frame.
    pub fn vacuous(frame: Frame) -> MassFunction {
        let mut masses = BTreeMap::new();
        masses.insert(frame.full_mask(), 1.0);
        MassFunction { frame, masses }
    }

    pub fn new(frame: Frame, focal: Vec<(u32, f64)>) -> Result<MassFunction, EvidentialError> {
        let full = frame.full_mask();
        let mut masses: BTreeMap<u32, f64> = BTreeMap::new();
        let mut sum = 0.0;
        for (mask, m) in focal {
            if mask == 0 {
                if m > 0.0 {
                    return Err(EvidentialError::EmptyFocalSet);
                }
                continue;
            }
            if mask > full {
                return Err(EvidentialError::UnknownElement(format!("mask {mask:#b}")));
            }
            if m < 0.0 || !m.is_finite() {
                return Err(EvidentialError::BadMass(m));
            }
            if m > 0.0 {
                *masses.entry(mask).or_insert(0.0) += m;
                sum += m;
            }
        }
        if (sum - 1.0).abs() > MASS_SUM_TOL {
            return Err(EvidentialError::BadMass(sum - 1.0));
        }
        Ok(MassFunction { frame, masses })
    }

    pub fn frame(&self) -> &Frame {
        &self.frame
    }

    pub fn focal(&self) -> impl Iterator<Item = (u32, f64)> + '_ {
        self.masses.iter().map(|(&k, &v)| (k, v))
    }

    pub fn mass(&self, subset: u32) -> f64 {
        self.masses.get(&subset).copied().unwrap_or(0.0)
    }

    /// Total mass committed exactly to subsets of `subset`.
    pub fn belief(&self, subset: u32) -> f64 {
        self.masses
            .iter()
            .filter(|(&k, _)| k & !subset == 0)
            .map(|(_, &v)| v)
            .sum()
    }

    /// Total mass not contradicting `subset`.
    pub fn plausibility(&self, subset: u32) -> f64 {
        self.masses
            .iter()
            .filter(|(&k, _)| k & subset != 0)
            .map(|(_, &v)| v)
            .sum()
    }

    pub fn is_vacuous(&self) -> bool {
        self.masses.len() == 1 && self.mass(self.frame.full_mask()) > 0.0
    }
}

impl fmt::Display for MassFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .masses
            .iter()
            .map(|(&k, v)| format!("{}:{:.4}", self.frame.describe(k), v))
            .collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

/// Classical reliability discounting: scale every focal mass by
/// `reliability` and move the residual onto the full frame.
pub fn discount(m: &MassFunction, reliability: f64) -> MassFunction {
    assert!(
        (0.0..=1.0).contains(&reliability),
        "reliability must be in [0, 1]"
    );
    let full = m.frame.full_mask();
    let mut masses: BTreeMap<u32, f64> = BTreeMap::new();
    for (mask, v) in m.focal() {
        let scaled = v * reliability;
        if scaled > 0.0 {
            *masses.entry(mask).or_insert(0.0) += scaled;
        }
    }
    *masses.entry(full).or_insert(0.0) += 1.0 - reliability;
    if masses[&full] == 0.0 {
        masses.remove(&full);
    }
    MassFunction {
        frame: m.frame.clone(),
        masses,
    }
}

/// Dempster's rule: conjunctive combination with normalization. Returns
/// the combined mass and the conflict that was normalized away.
pub fn combine_dempster(
    m1: &MassFunction,
    m2: &MassFunction,
) -> Result<(MassFunction, f64), EvidentialError> {
    if m1.frame != m2.frame {
        return Err(EvidentialError::FrameMismatch);
    }
    let mut raw: BTreeMap<u32, f64> = BTreeMap::new();
    let mut conflict = 0.0;
    for (a, va) in m1.focal() {
        for (b, vb) in m2.focal() {
            let inter = a & b;
            let p = va * vb;
            if inter == 0 {
                conflict += p;
            } else {
                *raw.entry(inter).or_insert(0.0) += p;
            }
        }
    }
    let surviving = 1.0 - conflict;
    if surviving <= TOTAL_CONFLICT_TOL {
        return Err(EvidentialError::TotalConflict);
    }
    let masses: BTreeMap<u32, f64> = raw
        .into_iter()
        .map(|(k, v)| (k, v / surviving))
        .collect();
    Ok((
        MassFunction {
            frame: m1.frame.clone(),
            masses,
        },
        conflict,
    ))
}

/// Folds many sources conjunctively (unnormalized), normalizing once at
/// the end. Mathematically identical to chaining Dempster's rule; the
/// returned conflict is the canonical overall-conflict mass.
pub fn combine_all(
    sources: &[MassFunction],
) -> Result<(MassFunction, f64), EvidentialError> {
    let Some(first) = sources.first() else {
        return Err(EvidentialError::EmptyRuleSet);
    };
    for m in sources {
        if m.frame != first.frame {
            return Err(EvidentialError::FrameMismatch);
        }
    }
    // accumulator includes the empty set (key 0) to carry conflict
    let mut acc: BTreeMap<u32, f64> = first.masses.clone();
    for m in &sources[1..] {
        let mut next: BTreeMap<u32, f64> = BTreeMap::new();
        for (&a, &va) in &acc {
            for (b, vb) in m.focal() {
                *next.entry(a & b).or_insert(0.0) += va * vb;
            }
        }
        acc = next;
    }
    let conflict = acc.remove(&0).unwrap_or(0.0);
    let surviving = 1.0 - conflict;
    if surviving <= TOTAL_CONFLICT_TOL {
        return Err(EvidentialError::TotalConflict);
    }
    let masses: BTreeMap<u32, f64> = acc
        .into_iter()
        .filter(|(_, v)| *v > 0.0)
        .map(|(k, v)| (k, v / surviving))
        .collect();
    Ok((
        MassFunction {
            frame: first.frame.clone(),
            masses,
        },
        conflict,
    ))
}

// --- rules ------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum RuleTrigger {
    Indicator(AnomalyKind),
    Context,
}

/// One expert rule: when the trigger fires (subject to severity and
/// context conditions) it emits the template mass scaled by severity,
/// discounted by the source reliability.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rule {
    pub name: String,
    pub trigger: RuleTrigger,
    pub min_severity: Option<f64>,
    /// context equality conditions (field, value)
    pub conditions: Vec<(String, String)>,
    /// focal subsets and template masses; remainder goes to the frame
    pub template: Vec<(u32, f64)>,
    pub reliability: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RuleSet {
    pub frame: Frame,
    pub rules: Vec<Rule>,
}

const CONTEXT_FIELDS: [&str; 3] = ["ownership_risk", "ship_type", "intel"];

/// Parses the line-oriented rule format described in the module docs.
/// `#` starts a comment; blank lines are ignored.
pub fn parse_rules(text: &str, frame: Frame) -> Result<RuleSet, EvidentialError> {
    let mut rules = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let stripped = raw.split('#').next().unwrap_or("").trim();
        if stripped.is_empty() {
            continue;
        }
        let err = |reason: String| EvidentialError::RuleParse { line, reason };
        let tokens: Vec<&str> = stripped.split_whitespace().collect();
        if tokens.first() != Some(&"RULE") {
            return Err(err("expected `RULE <name> WHEN ...`".into()));
        }
        let name = tokens
            .get(1)
            .ok_or_else(|| err("missing rule name".into()))?
            .to_string();
        if tokens.get(2) != Some(&"WHEN") {
            return Err(err("expected WHEN after the rule name".into()));
        }
        let trigger_tok = tokens
            .get(3)
            .ok_or_else(|| err("missing trigger".into()))?;
        let trigger = if *trigger_tok == "context" {
            RuleTrigger::Context
        } else {
            RuleTrigger::Indicator(AnomalyKind::parse(trigger_tok).ok_or_else(|| {
                err(format!("unknown indicator kind `{trigger_tok}`"))
            })?)
        };

        let emit_at = tokens
            .iter()
            .position(|t| *t == "EMIT")
            .ok_or_else(|| err("missing EMIT".into()))?;
        let rel_at = tokens
            .iter()
            .position(|t| *t == "RELIABILITY")
            .ok_or_else(|| err("missing RELIABILITY".into()))?;
        if rel_at < emit_at || emit_at < 4 {
            return Err(err("expected RULE name WHEN trigger [cond...] EMIT ... RELIABILITY r".into()));
        }

        let mut min_severity = None;
        let mut conditions = Vec::new();
        for tok in &tokens[4..emit_at] {
            if let Some(v) = tok.strip_prefix("severity>=") {
                min_severity = Some(v.parse().map_err(|_| {
                    err(format!("bad severity threshold `{v}`"))
                })?);
            } else if let Some((field, value)) = tok.split_once('=') {
                if !CONTEXT_FIELDS.contains(&field) {
                    return Err(err(format!("unknown context field `{field}`")));
                }
                conditions.push((field.to_string(), value.to_string()));
            } else {
                return Err(err(format!("cannot parse condition `{tok}`")));
            }
        }
        if trigger == RuleTrigger::Context && conditions.is_empty() {
            return Err(err("context rules need at least one field=value condition".into()));
        }

        let emit_spec = tokens[emit_at + 1..rel_at].join("");
        if emit_spec.is_empty() {
            return Err(err("EMIT needs subset:mass pairs".into()));
        }
        let mut template = Vec::new();
        let mut total = 0.0;
        for part in emit_spec.split(',') {
            let (subset_s, mass_s) = part
                .split_once(':')
                .ok_or_else(|| err(format!("bad EMIT entry `{part}`")))?;
            let mask = if subset_s == "*" {
                frame.full_mask()
            } else {
                let names: Vec<&str> = subset_s.split('+').collect();
                frame.subset(&names).map_err(|e| err(e.to_string()))?
            };
            let mass: f64 = mass_s
                .parse()
                .map_err(|_| err(format!("bad mass `{mass_s}`")))?;
            if !(0.0..=1.0).contains(&mass) {
                return Err(err(format!("mass {mass} outside [0, 1]")));
            }
            total += mass;
            template.push((mask, mass));
        }
        if total > 1.0 + MASS_SUM_TOL {
            return Err(err(format!("EMIT masses sum to {total} > 1")));
        }

        let reliability: f64 = tokens
            .get(rel_at + 1)
            .ok_or_else(|| err("missing reliability value".into()))?
            .parse()
            .map_err(|_| err("bad reliability value".into()))?;
        if !(0.0..=1.0).contains(&reliability) {
            return Err(err(format!("reliability {reliability} outside [0, 1]")));
        }

        rules.push(Rule {
            name,
            trigger,
            min_severity,
            conditions,
            template,
            reliability,
        });
    }
    if rules.is_empty() {
        return Err(EvidentialError::EmptyRuleSet);
    }
    Ok(RuleSet { frame, rules })
}

/// Contextual attributes available to rule conditions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VesselContext {
    pub info: VesselInfo,
    /// free-form intel flags, e.g. "rov_capable"
    pub intel: BTreeSet<String>,
}

impl VesselContext {
    pub fn plain(info: VesselInfo) -> VesselContext {
        VesselContext {
            info,
            intel: BTreeSet::new(),
        }
    }

    fn matches(&self, field: &str, value: &str) -> bool {
        match field {
            "ownership_risk" => self.info.ownership_risk.as_str() == value,
            "ship_type" => self
                .info
                .ship_type
                .map(|t| t.as_str() == value)
                .unwrap_or(false),
            "intel" => self.intel.contains(value),
            _ => false,
        }
    }
}

/// Fused verdict for one vessel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThreatAssessment {
    pub mmsi: Mmsi,
    pub mass: MassFunction,
    pub belief: BTreeMap<String, f64>,
    pub plausibility: BTreeMap<String, f64>,
    pub conflict_logged: f64,
    /// leave-one-out belief deltas on the decided hypothesis, per rule
    pub contributions: BTreeMap<String, f64>,
    pub fired_rules: Vec<String>,
}

fn singleton_maps(m: &MassFunction) -> (BTreeMap<String, f64>, BTreeMap<String, f64>) {
    let mut bel = BTreeMap::new();
    let mut pl = BTreeMap::new();
    for (i, name) in m.frame().elements().iter().enumerate() {
        let mask = 1u32 << i;
        bel.insert(name.clone(), m.belief(mask));
        pl.insert(name.clone(), m.plausibility(mask));
    }
    (bel, pl)
}

fn rule_fires(rule: &Rule, events: &[AnomalyEvent], context: &VesselContext) -> Option<f64> {
    if !rule
        .conditions
        .iter()
        .all(|(f, v)| context.matches(f, v))
    {
        return None;
    }
    match &rule.trigger {
        RuleTrigger::Context => Some(1.0),
        RuleTrigger::Indicator(kind) => {
            let threshold = rule.min_severity.unwrap_or(0.0);
            events
                .iter()
                .filter(|e| e.kind == *kind && e.severity >= threshold)
                .map(|e| e.severity)
                .fold(None, |acc: Option<f64>, s| {
                    Some(acc.map_or(s, |a| a.max(s)))
                })
        }
    }
}

fn emitted_mass(rule: &Rule, scale: f64, frame: &Frame) -> MassFunction {
    let mut focal: Vec<(u32, f64)> = rule
        .template
        .iter()
        .map(|(mask, m)| (*mask, m * scale))
        .collect();
    let committed: f64 = focal.iter().map(|(_, m)| *m).sum();
    focal.push((frame.full_mask(), (1.0 - committed).max(0.0)));
    let m = MassFunction::new(frame.clone(), focal).expect("template masses are valid");
    discount(&m, rule.reliability)
}

/// Evaluates the rule set against one vessel's indicators and context.
///
/// Rules fire in file order; an indicator rule is scaled by the highest
/// severity among its matching events. With no firing rules the
/// assessment is vacuous — reasoning still works with missing data. The
/// decision hypothesis is the singleton with the highest belief, and
/// each rule's contribution is how much belief in that hypothesis
/// evaporates when the rule is left out.
pub fn assess(
    mmsi: Mmsi,
    events: &[AnomalyEvent],
    context: &VesselContext,
    rules: &RuleSet,
) -> Result<ThreatAssessment, EvidentialError> {
    if rules.rules.is_empty() {
        return Err(EvidentialError::EmptyRuleSet);
    }
    let mut fired: Vec<(&Rule, MassFunction)> = Vec::new();
    for rule in &rules.rules {
        if let Some(scale) = rule_fires(rule, events, context) {
            fired.push((rule, emitted_mass(rule, scale, &rules.frame)));
        }
    }

    if fired.is_empty() {
        let mass = MassFunction::vacuous(rules.frame.clone());
        let (belief, plausibility) = singleton_maps(&mass);
        return Ok(ThreatAssessment {
            mmsi,
            mass,
            belief,
            plausibility,
            conflict_logged: 0.0,
            contributions: BTreeMap::new(),
            fired_rules: Vec::new(),
        });
    }

    let sources: Vec<MassFunction> = fired.iter().map(|(_, m)| m.clone()).collect();
    let (mass, conflict) = combine_all(&sources)?;
    let (belief, plausibility) = singleton_maps(&mass);

    // decision = highest-belief singleton, ties to frame order
    let decision_idx = (0..rules.frame.len())
        .max_by(|&a, &b| {
            mass.belief(1 << a)
                .partial_cmp(&mass.belief(1 << b))
                .unwrap_or(std::cmp::Ordering::Equal)
        })
        .unwrap_or(0);
    let decision_mask = 1u32 << decision_idx;

    let mut contributions = BTreeMap::new();
    if fired.len() > 1 {
        let full_belief = mass.belief(decision_mask);
        for skip in 0..fired.len() {
            let rest: Vec<MassFunction> = fired
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != skip)
                .map(|(_, (_, m))| m.clone())
                .collect();
            let without = match combine_all(&rest) {
                Ok((m, _)) => m.belief(decision_mask),
                Err(_) => 0.0,
            };
            contributions.insert(fired[skip].0.name.clone(), full_belief - without);
        }
    } else {
        contributions.insert(fired[0].0.name.clone(), mass.belief(decision_mask));
    }

    Ok(ThreatAssessment {
        mmsi,
        mass,
        belief,
        plausibility,
        conflict_logged: conflict,
        contributions,
        fired_rules: fired.iter().map(|(r, _)| r.name.clone()).collect(),
    })
}

/// Compares the reported navigational status against the kinematic
/// regime, interval by interval. Mass lands on `{inconsistent}` in
/// proportion to the dwell fraction where the claim and the kinematics
/// cannot both be true; with no status reports the output is vacuous.
pub fn check_status_consistency(
    track: &Track,
    window: TimeWindow,
    drift_threshold_kn: f64,
    cap: f64,
) -> MassFunction {
    let frame = Frame::consistency();
    let mut status_time = 0.0f64;
    let mut mismatch_time = 0.0f64;
    for w in track.points().windows(2) {
        let seg_start = w[0].t.max(window.start);
        let seg_end = w[1].t.min(window.end);
        if seg_end <= seg_start {
            continue;
        }
        let Some(status) = w[0].nav_status else {
            continue;
        };
        let dur = seg_end.seconds_since(seg_start) as f64;
        status_time += dur;
        let class = speed_class(w[0].sog_kn, drift_threshold_kn);
        let mismatch = match status {
            s if s.claims_stationary() => class == TrajectoryClass::Underway,
            NavStatus::UnderWayUsingEngine | NavStatus::UnderWaySailing => {
                class == TrajectoryClass::Anchored
            }
            _ => false,
        };
        if mismatch {
            mismatch_time += dur;
        }
    }
    if status_time == 0.0 {
        return MassFunction::vacuous(frame);
    }
    let fraction = mismatch_time / status_time;
    let inconsistent = frame.singleton("inconsistent").expect("static frame");
    let m_inc = (cap * fraction).clamp(0.0, 1.0);
    MassFunction::new(
        frame.clone(),
        vec![(inconsistent, m_inc), (frame.full_mask(), 1.0 - m_inc)],
    )
    .expect("constructed masses are valid")
}

/// Writes assessments as JSON-lines.
pub fn write_assessments_jsonl<W: std::io::Write>(
    mut w: W,
    assessments: &[ThreatAssessment],
) -> std::io::Result<()> {
    for a in assessments {
        serde_json::to_writer(&mut w, a)?;
        writeln!(w)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ais::{AisPoint, OwnershipRisk, Timestamp};
    use crate::geo::GeoPoint;
    use approx::assert_relative_eq;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn frame() -> Frame {
        Frame::threat()
    }

    fn mf(focal: Vec<(&[&str], f64)>) -> MassFunction {
        let f = frame();
        let focal = focal
            .into_iter()
            .map(|(names, m)| {
                let mask = if names == ["*"] {
                    f.full_mask()
                } else {
                    f.subset(names).unwrap()
                };
                (mask, m)
            })
            .collect();
        MassFunction::new(f, focal).unwrap()
    }

    #[test]
    fn discount_identity_and_vacuous() {
        let m = mf(vec![(&["threat"], 0.8), (&["*"], 0.2)]);
        assert_eq!(discount(&m, 1.0), m);
        let zero = discount(&m, 0.0);
        assert!(zero.is_vacuous());
    }

    #[test]
    fn discount_hand_example() {
        let m = mf(vec![(&["threat"], 0.8), (&["*"], 0.2)]);
        let d = discount(&m, 0.5);
        let f = frame();
        assert_relative_eq!(d.mass(f.singleton("threat").unwrap()), 0.4);
        assert_relative_eq!(d.mass(f.full_mask()), 0.6);
    }

    #[test]
    fn discount_composes_multiplicatively() {
        let m = mf(vec![
            (&["threat"], 0.5),
            (&["suspicious", "threat"], 0.3),
            (&["*"], 0.2),
        ]);
        let ab = discount(&discount(&m, 0.7), 0.6);
        let direct = discount(&m, 0.42);
        for (mask, v) in direct.focal() {
            assert_relative_eq!(ab.mass(mask), v, epsilon = 1e-12);
        }
    }

    #[test]
    fn combine_with_vacuous_is_identity() {
        let m = mf(vec![(&["threat"], 0.6), (&["*"], 0.4)]);
        let (out, conflict) = combine_dempster(&m, &MassFunction::vacuous(frame())).unwrap();
        assert_eq!(conflict, 0.0);
        for (mask, v) in m.focal() {
            assert_relative_eq!(out.mass(mask), v, epsilon = 1e-12);
        }
    }

    #[test]
    fn combine_worked_example() {
        // hand evaluation: products T.T=0.3, T.O=0.3, O.T=0.2, O.O=0.2
        let m1 = mf(vec![(&["threat"], 0.6), (&["*"], 0.4)]);
        let m2 = mf(vec![(&["threat"], 0.5), (&["*"], 0.5)]);
        let (out, conflict) = combine_dempster(&m1, &m2).unwrap();
        let f = frame();
        assert_eq!(conflict, 0.0);
        assert_relative_eq!(out.mass(f.singleton("threat").unwrap()), 0.8, epsilon = 1e-12);
        assert_relative_eq!(out.mass(f.full_mask()), 0.2, epsilon = 1e-12);
    }

    #[test]
    fn total_contradiction_is_an_error() {
        let m1 = mf(vec![(&["threat"], 1.0)]);
        let m2 = mf(vec![(&["benign"], 1.0)]);
        assert_eq!(
            combine_dempster(&m1, &m2).unwrap_err(),
            EvidentialError::TotalConflict
        );
    }

    fn random_mass(rng: &mut ChaCha8Rng, f: &Frame) -> MassFunction {
        let full = f.full_mask();
        let k = rng.gen_range(1..=4usize);
        let mut focal = Vec::new();
        let mut total = 0.0;
        for _ in 0..k {
            let mask = rng.gen_range(1..=full);
            let w: f64 = rng.gen_range(0.01..1.0);
            focal.push((mask, w));
            total += w;
        }
        // reserve some ignorance so random pairs rarely hit total conflict
        let ignorance: f64 = rng.gen_range(0.05..0.5);
        let scale = (1.0 - ignorance) / total;
        let mut out: Vec<(u32, f64)> = focal.into_iter().map(|(m, w)| (m, w * scale)).collect();
        out.push((full, ignorance));
        MassFunction::new(f.clone(), out).unwrap()
    }

    #[test]
    fn combination_commutative_and_associative() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let f = frame();
        for _ in 0..200 {
            let a = random_mass(&mut rng, &f);
            let b = random_mass(&mut rng, &f);
            let c = random_mass(&mut rng, &f);
            let (ab, kab) = combine_dempster(&a, &b).unwrap();
            let (ba, kba) = combine_dempster(&b, &a).unwrap();
            assert_relative_eq!(kab, kba, epsilon = 1e-12);
            for mask in 1..=f.full_mask() {
                assert_relative_eq!(ab.mass(mask), ba.mass(mask), epsilon = 1e-12);
            }
            let (ab_c, _) = combine_dempster(&ab, &c).unwrap();
            let (bc, _) = combine_dempster(&b, &c).unwrap();
            let (a_bc, _) = combine_dempster(&a, &bc).unwrap();
            for mask in 1..=f.full_mask() {
                assert_relative_eq!(ab_c.mass(mask), a_bc.mass(mask), epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn belief_never_exceeds_plausibility() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let f = frame();
        for _ in 0..200 {
            let m = random_mass(&mut rng, &f);
            for mask in 0..=f.full_mask() {
                assert!(m.belief(mask) <= m.plausibility(mask) + 1e-12);
            }
        }
    }

    #[test]
    fn masses_stay_normalized() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let f = frame();
        for _ in 0..100 {
            let a = random_mass(&mut rng, &f);
            let b = random_mass(&mut rng, &f);
            let (c, _) = combine_dempster(&a, &b).unwrap();
            let total: f64 = c.focal().map(|(_, v)| v).sum();
            assert_relative_eq!(total, 1.0, epsilon = 1e-9);
            let d = discount(&c, rng.gen_range(0.0..1.0));
            let total: f64 = d.focal().map(|(_, v)| v).sum();
            assert_relative_eq!(total, 1.0, epsilon = 1e-9);
        }
    }

    const RULES: &str = "
# default illustrative rule set
RULE gap WHEN ais_gap EMIT suspicious+threat:0.7 RELIABILITY 0.9
RULE loiter WHEN loiter_near_uci severity>=0.3 EMIT suspicious+threat:0.6,threat:0.2 RELIABILITY 0.85
RULE search WHEN search_pattern EMIT threat:0.5,suspicious:0.3 RELIABILITY 0.8
RULE owner WHEN context ownership_risk=high EMIT suspicious:0.4,threat:0.1 RELIABILITY 0.75
";

    fn ruleset() -> RuleSet {
        parse_rules(RULES, frame()).unwrap()
    }

    fn event(kind: AnomalyKind, severity: f64) -> AnomalyEvent {
        AnomalyEvent {
            mmsi: Mmsi(700_000_001),
            kind,
            t_start: Timestamp(0),
            t_end: Timestamp(600),
            severity,
            summary: String::new(),
            fields: BTreeMap::new(),
        }
    }

    fn plain_context() -> VesselContext {
        VesselContext::plain(VesselInfo::unknown(Mmsi(700_000_001)))
    }

    #[test]
    fn rules_parse_and_validate() {
        let rs = ruleset();
        assert_eq!(rs.rules.len(), 4);
        assert_eq!(rs.rules[0].trigger, RuleTrigger::Indicator(AnomalyKind::AisGap));
        assert_eq!(rs.rules[3].trigger, RuleTrigger::Context);
        assert!(parse_rules("", frame()).is_err());
        assert!(parse_rules("RULE x WHEN bogus EMIT threat:1 RELIABILITY 1", frame()).is_err());
        assert!(
            parse_rules("RULE x WHEN ais_gap EMIT kraken:0.5 RELIABILITY 1", frame()).is_err()
        );
        assert!(parse_rules(
            "RULE x WHEN ais_gap EMIT threat:0.9,suspicious:0.3 RELIABILITY 1",
            frame()
        )
        .is_err());
    }

    #[test]
    fn no_firing_rules_yields_vacuous() {
        let a = assess(Mmsi(700_000_001), &[], &plain_context(), &ruleset()).unwrap();
        assert!(a.mass.is_vacuous());
        assert_eq!(a.conflict_logged, 0.0);
        assert!(a.fired_rules.is_empty());
    }

    #[test]
    fn single_rule_is_discounted_template() {
        // ais_gap severity 1.0, template 0.7 on {suspicious, threat},
        // reliability 0.9: expect exactly discount(template, 0.9)
        let rs = parse_rules(
            "RULE gap WHEN ais_gap EMIT suspicious+threat:0.7 RELIABILITY 0.9",
            frame(),
        )
        .unwrap();
        let a = assess(
            Mmsi(700_000_001),
            &[event(AnomalyKind::AisGap, 1.0)],
            &plain_context(),
            &rs,
        )
        .unwrap();
        let f = frame();
        let st = f.subset(&["suspicious", "threat"]).unwrap();
        assert_relative_eq!(a.mass.mass(st), 0.7 * 0.9, epsilon = 1e-12);
        assert_relative_eq!(a.mass.mass(f.full_mask()), 1.0 - 0.7 * 0.9, epsilon = 1e-12);
        assert_eq!(a.conflict_logged, 0.0);
    }

    #[test]
    fn severity_scales_template() {
        let rs = parse_rules(
            "RULE gap WHEN ais_gap EMIT suspicious+threat:0.8 RELIABILITY 1.0",
            frame(),
        )
        .unwrap();
        let a = assess(
            Mmsi(700_000_001),
            &[event(AnomalyKind::AisGap, 0.5)],
            &plain_context(),
            &rs,
        )
        .unwrap();
        let f = frame();
        let st = f.subset(&["suspicious", "threat"]).unwrap();
        assert_relative_eq!(a.mass.mass(st), 0.4, epsilon = 1e-12);
    }

    #[test]
    fn severity_threshold_gates_rule() {
        let rs = parse_rules(
            "RULE loiter WHEN loiter_near_uci severity>=0.5 EMIT threat:0.5 RELIABILITY 1.0",
            frame(),
        )
        .unwrap();
        let a = assess(
            Mmsi(700_000_001),
            &[event(AnomalyKind::LoiterNearUci, 0.4)],
            &plain_context(),
            &rs,
        )
        .unwrap();
        assert!(a.mass.is_vacuous());
    }

    #[test]
    fn evidence_accrues_monotonically() {
        // the full bundle believes in `threat` strictly more than any
        // single indicator alone
        let rs = ruleset();
        let f = frame();
        let threat = f.singleton("threat").unwrap();
        let mut ctx = plain_context();
        ctx.info.ownership_risk = OwnershipRisk::High;
        let bundle = [
            event(AnomalyKind::LoiterNearUci, 0.9),
            event(AnomalyKind::SearchPattern, 0.6),
        ];
        let full = assess(Mmsi(700_000_001), &bundle, &ctx, &rs).unwrap();
        let threat_belief = full.mass.belief(threat);
        for single in [&bundle[..1], &bundle[1..]] {
            let solo = assess(Mmsi(700_000_001), single, &plain_context(), &rs).unwrap();
            assert!(
                threat_belief > solo.mass.belief(threat),
                "bundle {} <= solo {}",
                threat_belief,
                solo.mass.belief(threat)
            );
        }
        let ctx_only = assess(Mmsi(700_000_001), &[], &ctx, &rs).unwrap();
        assert!(threat_belief > ctx_only.mass.belief(threat));
        // every fired rule pulls its weight toward the decision
        assert_eq!(full.fired_rules.len(), 3);
        assert!(full.contributions.len() == 3);
    }

    #[test]
    fn assessment_invariants_hold() {
        let rs = ruleset();
        let mut ctx = plain_context();
        ctx.info.ownership_risk = OwnershipRisk::High;
        let a = assess(
            Mmsi(700_000_001),
            &[
                event(AnomalyKind::AisGap, 1.0),
                event(AnomalyKind::LoiterNearUci, 0.8),
            ],
            &ctx,
            &rs,
        )
        .unwrap();
        for name in a.mass.frame().elements() {
            assert!(a.belief[name] <= a.plausibility[name] + 1e-12);
        }
        let total: f64 = a.mass.focal().map(|(_, v)| v).sum();
        assert_relative_eq!(total, 1.0, epsilon = 1e-9);
    }

    fn status_track(sog_fast_fraction: f64) -> Track {
        // 10 intervals of 600 s each, `sog_fast_fraction` of them at 12 kn
        let n_fast = (10.0 * sog_fast_fraction).round() as i64;
        let points: Vec<AisPoint> = (0..=10)
            .map(|i| AisPoint {
                mmsi: Mmsi(700_000_002),
                t: Timestamp(i * 600),
                pos: GeoPoint::new(55.0 + i as f64 * 1e-3, 15.0).unwrap(),
                sog_kn: if i < n_fast { 12.0 } else { 0.1 },
                cog_deg: 0.0,
                heading_deg: None,
                nav_status: Some(NavStatus::AtAnchor),
            })
            .collect();
        Track::new(points).unwrap()
    }

    #[test]
    fn consistent_anchor_report_is_mostly_vacuous() {
        let track = status_track(0.0);
        let m = check_status_consistency(
            &track,
            TimeWindow::new(Timestamp(0), Timestamp(6000)).unwrap(),
            3.0,
            0.9,
        );
        let f = Frame::consistency();
        assert_eq!(m.mass(f.singleton("inconsistent").unwrap()), 0.0);
        assert_relative_eq!(m.mass(f.full_mask()), 1.0);
    }

    #[test]
    fn anchored_claim_while_steaming_is_inconsistent() {
        let track = status_track(0.9);
        let m = check_status_consistency(
            &track,
            TimeWindow::new(Timestamp(0), Timestamp(6000)).unwrap(),
            3.0,
            0.9,
        );
        let f = Frame::consistency();
        assert_relative_eq!(
            m.mass(f.singleton("inconsistent").unwrap()),
            0.9 * 0.9,
            epsilon = 1e-9
        );
    }

    #[test]
    fn absent_status_is_vacuous() {
        let points: Vec<AisPoint> = (0..=5)
            .map(|i| AisPoint {
                mmsi: Mmsi(700_000_003),
                t: Timestamp(i * 600),
                pos: GeoPoint::new(55.0, 15.0 + i as f64 * 1e-3).unwrap(),
                sog_kn: 8.0,
                cog_deg: 90.0,
                heading_deg: None,
                nav_status: None,
            })
            .collect();
        let track = Track::new(points).unwrap();
        let m = check_status_consistency(
            &track,
            TimeWindow::new(Timestamp(0), Timestamp(3000)).unwrap(),
            3.0,
            0.9,
        );
        assert!(m.is_vacuous());
    }
}
