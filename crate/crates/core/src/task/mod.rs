//! Study tasks: trial sequencing, scoring and the trial record format.

mod latin;
mod phrases;
mod runner;

pub use latin::latin_square;
pub use phrases::{sample_phrases, PhraseError, PhraseSet, PRACTICE_PHRASES};
pub use runner::{TaskOutput, TaskRunner};

use std::fmt;
use std::io;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::scene::{
    build_binary_scene, build_keyboard_scene, build_menu_scene, Attachment, BinaryLayout,
    KeyboardLayout, MenuLayout, Scene, SceneError,
};
use crate::technique::Technique;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TaskKind {
    Binary,
    Menu15,
    Keyboard,
}

impl TaskKind {
    pub fn name(&self) -> &'static str {
        match self {
            TaskKind::Binary => "binary",
            TaskKind::Menu15 => "menu15",
            TaskKind::Keyboard => "keyboard",
        }
    }
}

impl fmt::Display for TaskKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TaskKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "binary" => Ok(TaskKind::Binary),
            "menu15" => Ok(TaskKind::Menu15),
            "keyboard" => Ok(TaskKind::Keyboard),
            _ => Err(format!("unknown task '{s}'")),
        }
    }
}

/// Scene parameters for all three tasks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SceneConfig {
    pub binary: BinaryLayout,
    pub menu: MenuLayout,
    pub keyboard: KeyboardLayout,
}

impl Default for SceneConfig {
    fn default() -> Self {
        SceneConfig {
            binary: BinaryLayout::default(),
            menu: MenuLayout::default(),
            keyboard: KeyboardLayout::qwerty(),
        }
    }
}

/// One task for one participant and technique.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskSpec {
    pub kind: TaskKind,
    pub technique: Technique,
    pub seed: u64,
    /// Binary: trials after the start selection.
    pub binary_trials: u32,
    pub menu_sessions: u32,
    /// Phrases to transcribe in the keyboard task.
    pub phrases: Vec<String>,
    pub scene: SceneConfig,
}

impl TaskSpec {
    pub const BINARY_TRIALS: u32 = 20;
    pub const MENU_SESSIONS: u32 = 3;
    pub const KEYBOARD_PHRASES: usize = 5;

    /// Default protocol sizes. Keyboard phrases are drawn from the bundled
    /// corpus with `seed`.
    pub fn new(kind: TaskKind, technique: Technique, seed: u64) -> TaskSpec {
        let phrases = if kind == TaskKind::Keyboard {
            sample_phrases(
                &PhraseSet::bundled(),
                Self::KEYBOARD_PHRASES,
                seed,
                (25, 28),
            )
            .expect("bundled corpus has enough phrases")
        } else {
            Vec::new()
        };
        TaskSpec {
            kind,
            technique,
            seed,
            binary_trials: Self::BINARY_TRIALS,
            menu_sessions: Self::MENU_SESSIONS,
            phrases,
            scene: SceneConfig::default(),
        }
    }

    /// Menu trials per session: every button except the center one.
    pub fn menu_trials(&self) -> u32 {
        self.scene.menu.button_count() - 1
    }

    /// Number of trial records a completed run produces.
    pub fn expected_records(&self) -> usize {
        match self.kind {
            TaskKind::Binary => self.binary_trials as usize,
            TaskKind::Menu15 => (self.menu_sessions * self.menu_trials()) as usize,
            TaskKind::Keyboard => self.phrases.len(),
        }
    }

    /// The task scene; the binary planes follow the head for front-view.
    pub fn build_scene(&self) -> Result<Scene, SceneError> {
        match self.kind {
            TaskKind::Binary => {
                let attachment = if self.technique == Technique::FrontView {
                    Attachment::ViewFixed
                } else {
                    Attachment::WorldFixed
                };
                build_binary_scene(&self.scene.binary, attachment)
            }
            TaskKind::Menu15 => build_menu_scene(&self.scene.menu),
            TaskKind::Keyboard => build_keyboard_scene(&self.scene.keyboard),
        }
    }
}

/// One trial outcome; also the CSV row format.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub session_id: u32,
    pub participant: u32,
    pub technique: Technique,
    pub task: TaskKind,
    pub trial: u32,
    /// Menu button label, plane side, or phrase index.
    pub target: String,
    pub start_ms: u64,
    pub commit_ms: u64,
    pub correct: bool,
    pub errors: u32,
    pub presented: Option<String>,
    pub transcribed: Option<String>,
}

impl TrialRecord {
    pub fn duration_ms(&self) -> u64 {
        self.commit_ms - self.start_ms
    }
}

pub const CSV_HEADER: &str =
    "session_id,participant,technique,task,trial,target,start_ms,commit_ms,correct,errors,presented,transcribed";

pub fn write_records<W: io::Write>(w: W, records: &[TrialRecord]) -> Result<(), csv::Error> {
    let mut wtr = csv::Writer::from_writer(w);
    if records.is_empty() {
        wtr.write_record(CSV_HEADER.split(','))?;
    }
    for r in records {
        wtr.serialize(r)?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn records_to_csv(records: &[TrialRecord]) -> String {
    let mut buf = Vec::new();
    write_records(&mut buf, records).expect("writing to memory");
    String::from_utf8(buf).expect("csv is utf-8")
}

pub fn read_records<R: io::Read>(r: R) -> Result<Vec<TrialRecord>, csv::Error> {
    csv::Reader::from_reader(r).deserialize().collect()
}
