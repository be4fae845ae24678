//! Whole simulated studies: many participants, counterbalanced technique
//! order, run in parallel.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::agent::{simulate_participant, SimError, SimOutcome};
use super::{mix_seed, NoiseModel, UserModel};
use crate::mapping::{FittedMap, MappingMode};
use crate::session::SessionConfig;
use crate::task::{latin_square, SceneConfig, TaskKind, TrialRecord};
use crate::technique::{Technique, TechniqueConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyConfig {
    pub task: TaskKind,
    pub techniques: Vec<Technique>,
    pub participants: u32,
    pub seed: u64,
    #[serde(default)]
    pub user: UserModel,
    #[serde(default)]
    pub noise: NoiseModel,
    #[serde(default)]
    pub scene: SceneConfig,
    #[serde(default)]
    pub technique_config: TechniqueConfig,
    /// Applied to every non-gaze technique; technique defaults otherwise.
    #[serde(default)]
    pub mapping_mode: Option<MappingMode>,
    #[serde(default)]
    pub fit: FittedMap,
}

impl StudyConfig {
    pub fn new(task: TaskKind, techniques: &[Technique], participants: u32, seed: u64) -> Self {
        StudyConfig {
            task,
            techniques: techniques.to_vec(),
            participants,
            seed,
            user: UserModel::default(),
            noise: NoiseModel::default(),
            scene: SceneConfig::default(),
            technique_config: TechniqueConfig::default(),
            mapping_mode: None,
            fit: FittedMap::default(),
        }
    }

    /// Session settings of one participant and technique.
    pub fn session(&self, participant: u32, technique: Technique) -> SessionConfig {
        let pseed = participant_seed(self.seed, participant);
        let mut c = SessionConfig::new(
            self.task,
            technique,
            mix_seed(pseed, technique_salt(technique)),
        );
        c.participant = participant;
        c.fit = self.fit;
        c.technique_config = self.technique_config;
        c.scene = self.scene.clone();
        if !technique.is_gaze() {
            c.mapping_mode = self.mapping_mode;
        }
        c
    }
}

fn technique_salt(t: Technique) -> u64 {
    Technique::ALL
        .iter()
        .position(|x| *x == t)
        .expect("known technique") as u64
}

pub fn participant_seed(seed: u64, participant: u32) -> u64 {
    mix_seed(seed, participant as u64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParticipantRun {
    pub participant: u32,
    /// Techniques in the order this participant used them.
    pub order: Vec<Technique>,
    pub outcomes: Vec<SimOutcome>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyOutcome {
    pub runs: Vec<ParticipantRun>,
}

impl StudyOutcome {
    /// All records, by participant and then in presentation order.
    pub fn records(&self) -> Vec<TrialRecord> {
        self.runs
            .iter()
            .flat_map(|r| r.outcomes.iter().flat_map(|o| o.records.iter().cloned()))
            .collect()
    }

    pub fn abandoned(&self) -> usize {
        self.runs
            .iter()
            .flat_map(|r| &r.outcomes)
            .map(|o| o.abandoned)
            .sum()
    }
}

/// Runs every participant. Technique order follows the rows of a balanced
/// Latin square, cycling through them by participant index.
pub fn run_study(config: &StudyConfig) -> Result<StudyOutcome, SimError> {
    let square = latin_square(config.techniques.len());
    let runs = (0..config.participants)
        .into_par_iter()
        .map(|p| {
            let order: Vec<Technique> = if square.is_empty() {
                Vec::new()
            } else {
                square[p as usize % square.len()]
                    .iter()
                    .map(|&i| config.techniques[i])
                    .collect()
            };
            let pseed = participant_seed(config.seed, p);
            let outcomes = order
                .iter()
                .map(|&t| {
                    simulate_participant(
                        &config.session(p, t),
                        &config.user,
                        &config.noise,
                        mix_seed(pseed, 100 + technique_salt(t)),
                    )
                })
                .collect::<Result<Vec<_>, _>>()?;
            Ok(ParticipantRun {
                participant: p,
                order,
                outcomes,
            })
        })
        .collect::<Result<Vec<_>, SimError>>()?;
    Ok(StudyOutcome { runs })
}
