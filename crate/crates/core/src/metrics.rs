//! Text entry and selection metrics.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::task::{TaskKind, TrialRecord};
use crate::technique::Technique;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("duration must be positive, got {0} s")]
    NonPositiveDuration(f64),
    #[error("no records")]
    Empty,
    #[error("records mix tasks {0} and {1}")]
    MixedTasks(TaskKind, TaskKind),
}

/// Words per minute with five-character words, timed from the first
/// character: `(len - 1) / seconds * 12`.
pub fn wpm(transcribed_len: usize, duration_s: f64) -> Result<f64, MetricsError> {
    if !(duration_s > 0.0) || !duration_s.is_finite() {
        return Err(MetricsError::NonPositiveDuration(duration_s));
    }
    Ok(transcribed_len.saturating_sub(1) as f64 / duration_s * 12.0)
}

fn distance_table(a: &[char], b: &[char]) -> Vec<Vec<usize>> {
    let mut d = vec![vec![0usize; b.len() + 1]; a.len() + 1];
    for (i, row) in d.iter_mut().enumerate() {
        row[0] = i;
    }
    for j in 0..=b.len() {
        d[0][j] = j;
    }
    for i in 1..=a.len() {
        for j in 1..=b.len() {
            let sub = d[i - 1][j - 1] + usize::from(a[i - 1] != b[j - 1]);
            d[i][j] = sub.min(d[i - 1][j] + 1).min(d[i][j - 1] + 1);
        }
    }
    d
}

/// Minimum string distance (unit-cost insert, delete, substitute).
pub fn msd(a: &str, b: &str) -> usize {
    let (a, b): (Vec<char>, Vec<char>) = (a.chars().collect(), b.chars().collect());
    distance_table(&a, &b)[a.len()][b.len()]
}

/// Number of optimal alignments and their mean length.
///
/// Every path through the distance table that only takes steps consistent
/// with the optimum is one optimal alignment; a diagonal step is one
/// aligned column, a vertical or horizontal step one column against a gap.
/// Counts and summed lengths are accumulated over the path DAG.
pub fn optimal_alignments(a: &str, b: &str) -> (f64, f64) {
    let (a, b): (Vec<char>, Vec<char>) = (a.chars().collect(), b.chars().collect());
    let d = distance_table(&a, &b);
    let (n, m) = (a.len(), b.len());
    let mut count = vec![vec![0f64; m + 1]; n + 1];
    let mut total = vec![vec![0f64; m + 1]; n + 1];
    count[0][0] = 1.0;
    for i in 0..=n {
        for j in 0..=m {
            if i == 0 && j == 0 {
                continue;
            }
            let (mut c, mut l) = (0.0, 0.0);
            let mut take = |pi: usize, pj: usize| {
                c += count[pi][pj];
                l += total[pi][pj] + count[pi][pj];
            };
            if i > 0 && j > 0 && d[i][j] == d[i - 1][j - 1] + usize::from(a[i - 1] != b[j - 1]) {
                take(i - 1, j - 1);
            }
            if i > 0 && d[i][j] == d[i - 1][j] + 1 {
                take(i - 1, j);
            }
            if j > 0 && d[i][j] == d[i][j - 1] + 1 {
                take(i, j - 1);
            }
            count[i][j] = c;
            total[i][j] = l;
        }
    }
    (count[n][m], total[n][m] / count[n][m])
}

/// MSD divided by the mean optimal alignment length, in percent.
pub fn msd_error_rate(presented: &str, transcribed: &str) -> f64 {
    if presented.is_empty() && transcribed.is_empty() {
        return 0.0;
    }
    let (_, mean_len) = optimal_alignments(presented, transcribed);
    msd(presented, transcribed) as f64 / mean_len * 100.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SelectionAggregate {
    /// Per-participant mean trial time, averaged over participants.
    pub mean_time_s: f64,
    pub accuracy_pct: f64,
    pub trials: usize,
    pub participants: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TextEntryAggregate {
    pub mean_wpm: f64,
    pub mean_error_rate_pct: f64,
    pub phrases: usize,
    pub participants: usize,
}

fn homogeneous(records: &[TrialRecord]) -> Result<TaskKind, MetricsError> {
    let first = records.first().ok_or(MetricsError::Empty)?.task;
    match records.iter().find(|r| r.task != first) {
        Some(r) => Err(MetricsError::MixedTasks(first, r.task)),
        None => Ok(first),
    }
}

fn two_level_mean(items: impl Iterator<Item = (u32, f64)>) -> (f64, usize) {
    let mut per: BTreeMap<u32, (f64, usize)> = BTreeMap::new();
    for (p, v) in items {
        let e = per.entry(p).or_default();
        e.0 += v;
        e.1 += 1;
    }
    let n = per.len();
    let sum: f64 = per.values().map(|(s, c)| s / *c as f64).sum();
    (sum / n as f64, n)
}

fn by_technique(records: &[TrialRecord]) -> BTreeMap<Technique, Vec<&TrialRecord>> {
    let mut m: BTreeMap<Technique, Vec<&TrialRecord>> = BTreeMap::new();
    for r in records {
        m.entry(r.technique).or_default().push(r);
    }
    m
}

pub fn selection_aggregates(
    records: &[TrialRecord],
) -> Result<BTreeMap<Technique, SelectionAggregate>, MetricsError> {
    homogeneous(records)?;
    Ok(by_technique(records)
        .into_iter()
        .map(|(t, rs)| {
            let (mean_time_s, participants) = two_level_mean(
                rs.iter()
                    .map(|r| (r.participant, r.duration_ms() as f64 / 1000.0)),
            );
            let correct = rs.iter().filter(|r| r.correct).count();
            (
                t,
                SelectionAggregate {
                    mean_time_s,
                    accuracy_pct: correct as f64 / rs.len() as f64 * 100.0,
                    trials: rs.len(),
                    participants,
                },
            )
        })
        .collect())
}

/// WPM and error rate of one keyboard record; `None` when the record has no
/// text or no measurable duration.
pub fn phrase_metrics(r: &TrialRecord) -> Option<(f64, f64)> {
    let presented = r.presented.as_deref()?;
    let transcribed = r.transcribed.as_deref()?;
    let rate = wpm(transcribed.chars().count(), r.duration_ms() as f64 / 1000.0).ok()?;
    Some((rate, msd_error_rate(presented, transcribed)))
}

pub fn text_entry_aggregates(
    records: &[TrialRecord],
) -> Result<BTreeMap<Technique, TextEntryAggregate>, MetricsError> {
    homogeneous(records)?;
    Ok(by_technique(records)
        .into_iter()
        .map(|(t, rs)| {
            let scored: Vec<(u32, f64, f64)> = rs
                .iter()
                .filter_map(|r| phrase_metrics(r).map(|(w, e)| (r.participant, w, e)))
                .collect();
            let (mean_wpm, participants) = two_level_mean(scored.iter().map(|&(p, w, _)| (p, w)));
            let (mean_error_rate_pct, _) = two_level_mean(scored.iter().map(|&(p, _, e)| (p, e)));
            (
                t,
                TextEntryAggregate {
                    mean_wpm,
                    mean_error_rate_pct,
                    phrases: scored.len(),
                    participants,
                },
            )
        })
        .collect())
}

/// Per-participant means of `value` for each technique, as a
/// participants x techniques matrix over participants that used every
/// technique. Rows follow participant id, columns `techniques`.
pub fn participant_matrix(
    records: &[TrialRecord],
    techniques: &[Technique],
    value: impl Fn(&TrialRecord) -> Option<f64>,
) -> Vec<Vec<f64>> {
    let mut cells: BTreeMap<u32, BTreeMap<Technique, (f64, usize)>> = BTreeMap::new();
    for r in records {
        if let Some(v) = value(r) {
            let e = cells
                .entry(r.participant)
                .or_default()
                .entry(r.technique)
                .or_default();
            e.0 += v;
            e.1 += 1;
        }
    }
    cells
        .values()
        .filter(|row| techniques.iter().all(|t| row.contains_key(t)))
        .map(|row| {
            techniques
                .iter()
                .map(|t| {
                    let (s, c) = row[t];
                    s / c as f64
                })
                .collect()
        })
        .collect()
}
