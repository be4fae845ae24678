//! JSON report for `stats`.

use anyhow::{anyhow, bail};
use fronttouch::metrics::{
    participant_matrix, phrase_metrics, selection_aggregates, text_entry_aggregates,
};
use fronttouch::stats::{
    friedman, holm_adjust, paired_t, rm_anova_1way, wilcoxon_signed_rank, StatsError, TestResult,
};
use fronttouch::task::{TaskKind, TrialRecord};
use fronttouch::technique::Technique;
use serde_json::{json, Value};

type Measure = fn(&TrialRecord) -> Option<f64>;

fn time_s(r: &TrialRecord) -> Option<f64> {
    Some(r.duration_ms() as f64 / 1000.0)
}

fn accuracy_pct(r: &TrialRecord) -> Option<f64> {
    Some(if r.correct { 100.0 } else { 0.0 })
}

fn wpm(r: &TrialRecord) -> Option<f64> {
    phrase_metrics(r).map(|m| m.0)
}

fn error_rate_pct(r: &TrialRecord) -> Option<f64> {
    phrase_metrics(r).map(|m| m.1)
}

fn test_json(r: &Result<TestResult, StatsError>) -> Value {
    match r {
        Ok(t) => json!(t),
        Err(e) => json!({ "error": e.to_string() }),
    }
}

/// Holm-adjusted p-values for the tests that produced one, in order.
fn adjusted(results: &[Result<TestResult, StatsError>]) -> Vec<Option<f64>> {
    let ps: Vec<f64> = results
        .iter()
        .filter_map(|r| r.as_ref().ok())
        .map(|t| t.p_value)
        .collect();
    let mut adj = holm_adjust(&ps).into_iter();
    results
        .iter()
        .map(|r| r.as_ref().ok().and(adj.next()))
        .collect()
}

fn measure(name: &str, records: &[TrialRecord], techniques: &[Technique], f: Measure) -> Value {
    let matrix = participant_matrix(records, techniques, f);
    let mut pairs = Vec::new();
    for i in 0..techniques.len() {
        for j in i + 1..techniques.len() {
            pairs.push((i, j));
        }
    }
    let column = |j: usize| -> Vec<f64> { matrix.iter().map(|row| row[j]).collect() };
    let t: Vec<_> = pairs
        .iter()
        .map(|&(i, j)| paired_t(&column(i), &column(j)))
        .collect();
    let w: Vec<_> = pairs
        .iter()
        .map(|&(i, j)| wilcoxon_signed_rank(&column(i), &column(j)))
        .collect();
    let (t_adj, w_adj) = (adjusted(&t), adjusted(&w));
    let pairwise: Vec<Value> = pairs
        .iter()
        .enumerate()
        .map(|(k, &(i, j))| {
            json!({
                "a": techniques[i],
                "b": techniques[j],
                "paired_t": test_json(&t[k]),
                "paired_t_p_holm": t_adj[k],
                "wilcoxon": test_json(&w[k]),
                "wilcoxon_p_holm": w_adj[k],
            })
        })
        .collect();
    let omnibus = techniques.len() >= 2;
    json!({
        "measure": name,
        "participants": matrix.len(),
        "rm_anova": omnibus.then(|| test_json(&rm_anova_1way(&matrix))),
        "friedman": omnibus.then(|| test_json(&friedman(&matrix))),
        "pairwise": pairwise,
    })
}

pub fn build(records: &[TrialRecord]) -> anyhow::Result<Value> {
    let Some(first) = records.first() else {
        bail!("no records");
    };
    let task = first.task;
    let mut techniques: Vec<Technique> = records.iter().map(|r| r.technique).collect();
    techniques.sort();
    techniques.dedup();
    let (aggregates, measures): (Value, Vec<(&str, Measure)>) = match task {
        TaskKind::Keyboard => (
            json!(text_entry_aggregates(records).map_err(|e| anyhow!(e))?),
            vec![("wpm", wpm), ("error_rate_pct", error_rate_pct)],
        ),
        _ => (
            json!(selection_aggregates(records).map_err(|e| anyhow!(e))?),
            vec![("time_s", time_s), ("accuracy_pct", accuracy_pct)],
        ),
    };
    Ok(json!({
        "task": task,
        "techniques": techniques,
        "records": records.len(),
        "aggregates": aggregates,
        "tests": measures
            .iter()
            .map(|(n, f)| measure(n, records, &techniques, *f))
            .collect::<Vec<_>>(),
    }))
}
