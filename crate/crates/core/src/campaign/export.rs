use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::session::{Session, SessionStatus};
use super::CampaignError;
use crate::intrusion::io::write_curve;
use crate::sampler::{Feedback, Objective, Outcome};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExportKind {
    Curves,
    Measurements,
    Decisions,
}

impl ExportKind {
    pub const ALL: [ExportKind; 3] = [ExportKind::Curves, ExportKind::Measurements, ExportKind::Decisions];
}

impl FromStr for ExportKind {
    type Err = CampaignError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "curves" => Ok(ExportKind::Curves),
            "measurements" => Ok(ExportKind::Measurements),
            "decisions" => Ok(ExportKind::Decisions),
            other => Err(CampaignError::Validation(format!(
                "unknown export {other:?} (curves, measurements, decisions)"
            ))),
        }
    }
}

#[derive(Serialize)]
struct MeasurementRow<'a> {
    id: u64,
    location: f64,
    location_m: f64,
    strength_n_per_m: f64,
    gait: String,
    valid: bool,
    depth_at_10n_m: Option<f64>,
    depth_at_20n_m: Option<f64>,
    depth_at_30n_m: Option<f64>,
    terminal_force_n: Option<f64>,
    cost_s: f64,
    seed: u64,
    curve: &'a str,
}

#[derive(Serialize)]
struct DecisionRow {
    round: Option<u64>,
    suggested: Option<f64>,
    outcome: &'static str,
    alternative: Option<f64>,
    feedback: String,
    explore_reward: Option<f64>,
    verify_reward: Option<f64>,
    weight: Option<f64>,
    combined: Option<f64>,
}

fn curve_name(id: u64) -> String {
    format!("measurement_{id:04}.csv")
}

fn objective_word(o: Objective) -> &'static str {
    match o {
        Objective::Exploration => "explore",
        Objective::Verification => "verify",
    }
}

/// Write the requested exports into `dir`; returns the files written.
pub fn export(session: &Session, dir: &Path, what: &[ExportKind]) -> Result<Vec<PathBuf>, CampaignError> {
    fs::create_dir_all(dir)?;
    let state = session.state();
    let mut written = Vec::new();

    if what.contains(&ExportKind::Curves) {
        let curves = dir.join("curves");
        fs::create_dir_all(&curves)?;
        for m in &state.measurements {
            let reading = session.reading(m.id)?;
            let path = curves.join(curve_name(m.id));
            write_curve(&reading.estimate, &path)?;
            written.push(path);
        }
    }

    if what.contains(&ExportKind::Measurements) {
        let path = dir.join("measurements.csv");
        let mut w = csv::Writer::from_path(&path).map_err(csv_error)?;
        let length = state.spec.geometry.length_m;
        for m in &state.measurements {
            let s = m.summary.as_ref();
            let name = format!("curves/{}", curve_name(m.id));
            w.serialize(MeasurementRow {
                id: m.id,
                location: m.location,
                location_m: m.location * length,
                strength_n_per_m: m.strength,
                gait: m.gait.to_string(),
                valid: m.valid,
                depth_at_10n_m: s.and_then(|s| s.depth_at_10n),
                depth_at_20n_m: s.and_then(|s| s.depth_at_20n),
                depth_at_30n_m: s.and_then(|s| s.depth_at_30n),
                terminal_force_n: s.map(|s| s.terminal_force),
                cost_s: m.cost_s,
                seed: m.seed,
                curve: &name,
            })
            .map_err(csv_error)?;
        }
        w.flush()?;
        written.push(path);
    }

    if what.contains(&ExportKind::Decisions) {
        let path = dir.join("decisions.csv");
        let mut w = csv::Writer::from_path(&path).map_err(csv_error)?;
        for d in &state.autonomy.decisions {
            let s = &d.suggestion;
            let (outcome, alternative) = match d.outcome {
                Outcome::Accepted => ("accepted", None),
                Outcome::RejectedWithAlternative { location } => ("rejected_with_alternative", Some(location)),
                Outcome::RejectedNoAlternative => ("rejected", None),
            };
            let feedback = match d.feedback {
                Feedback::None => String::new(),
                Feedback::ObjectiveMismatch { stated } => format!("objective={}", objective_word(stated)),
                Feedback::LocationMismatch => "location".to_string(),
            };
            w.serialize(DecisionRow {
                round: Some(d.round),
                suggested: Some(s.location),
                outcome,
                alternative,
                feedback,
                explore_reward: Some(s.explore_reward),
                verify_reward: Some(s.verify_reward),
                weight: Some(s.weight),
                combined: Some(s.combined),
            })
            .map_err(csv_error)?;
        }
        if state.status == SessionStatus::Concluded {
            w.serialize(DecisionRow {
                round: None,
                suggested: None,
                outcome: "concluded",
                alternative: None,
                feedback: String::new(),
                explore_reward: None,
                verify_reward: None,
                weight: None,
                combined: None,
            })
            .map_err(csv_error)?;
        }
        w.flush()?;
        written.push(path);
    }
    Ok(written)
}

fn csv_error(e: csv::Error) -> CampaignError {
    CampaignError::Io(std::io::Error::other(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::campaign::{presets, Clock, SessionSpec};

    fn read_all(paths: &[PathBuf]) -> Vec<Vec<u8>> {
        paths.iter().map(|p| fs::read(p).unwrap()).collect()
    }

    #[test]
    fn cardinality_determinism_and_conclusion_row() {
        let site = presets::white_sands().unwrap();
        let mut s = Session::create(SessionSpec::new(&site, 9).unwrap().with_id("x"), Clock::Fixed(0)).unwrap();
        s.run_initial_plan(&[0.05, 0.5, 0.9], None).unwrap();
        let r = s.suggestions(2).unwrap();
        s.decide_rank(r.round, 1, Outcome::Accepted, Feedback::LocationMismatch)
            .unwrap();

        let dir = tempfile::tempdir().unwrap();
        let a = export(&s, dir.path(), &ExportKind::ALL).unwrap();
        assert_eq!(a.iter().filter(|p| p.starts_with(dir.path().join("curves"))).count(), 3);
        let summary = fs::read_to_string(dir.path().join("measurements.csv")).unwrap();
        assert_eq!(summary.lines().count(), 4);
        let first = read_all(&a);
        let b = export(&s, dir.path(), &ExportKind::ALL).unwrap();
        assert_eq!(a, b);
        assert_eq!(first, read_all(&b));

        let before = fs::read_to_string(dir.path().join("decisions.csv")).unwrap();
        s.conclude("enough data").unwrap();
        export(&s, dir.path(), &ExportKind::ALL).unwrap();
        let after = fs::read_to_string(dir.path().join("decisions.csv")).unwrap();
        assert!(after.starts_with(&before));
        assert_eq!(after.lines().count(), before.lines().count() + 1);
        assert!(after.lines().last().unwrap().contains("concluded"));
        assert_eq!(first[..4], read_all(&a)[..4]);
    }
}
