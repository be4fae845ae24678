use fronttouch::protocol::{ServerMessage, UiEventKind};
use fronttouch::scene::MenuLayout;
use fronttouch::sim::{
    run_study, simulate_participant, NoiseModel, StudyConfig, UserModel, TARGET_DISPERSION_PX,
};
use fronttouch::task::records_to_csv;
use fronttouch::{replay, SessionConfig, TaskKind, Technique, Trace};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn simulation_and_replay_are_deterministic() {
    let config = SessionConfig::new(TaskKind::Menu15, Technique::DragNTap, 7);
    let run =
        || simulate_participant(&config, &UserModel::default(), &NoiseModel::default(), 7).unwrap();
    let (a, b) = (run(), run());
    assert_eq!(records_to_csv(&a.records), records_to_csv(&b.records));
    assert_eq!(a.trace.to_jsonl(), b.trace.to_jsonl());
    let parsed = Trace::parse(&a.trace.to_jsonl()).unwrap();
    let replayed = replay(&parsed).unwrap();
    assert_eq!(
        records_to_csv(&replayed.records),
        records_to_csv(&a.records)
    );
    assert_eq!(a.records.len(), 42);
}

#[test]
fn studies_are_deterministic_under_parallelism() {
    let config = StudyConfig::new(
        TaskKind::Binary,
        &[Technique::FrontWorld, Technique::SideGaze],
        4,
        7,
    );
    let a = run_study(&config).unwrap();
    let b = run_study(&config).unwrap();
    assert_eq!(records_to_csv(&a.records()), records_to_csv(&b.records()));
    assert_eq!(a.records().len(), 4 * 2 * 20);
}

const TWO_FINGER_TRACE: &str = r#"{"type":"header","task":"menu15","technique":"two-fingers","seed":1,"mapping_mode":"absolute"}
{"type":"touch","action":"down","finger":0,"x":1300,"y":730,"t_ms":1000}
{"type":"touch","action":"move","finger":0,"x":1280,"y":720,"t_ms":1040}
{"type":"touch","action":"down","finger":1,"x":1700,"y":720,"t_ms":1200}
{"type":"touch","action":"up","finger":1,"x":1700,"y":720,"t_ms":1280}
{"type":"touch","action":"up","finger":0,"x":1280,"y":720,"t_ms":1400}
"#;

#[test]
fn hand_written_two_finger_trace_selects_once() {
    let out = replay(&Trace::parse(TWO_FINGER_TRACE).unwrap()).unwrap();
    let selects: Vec<_> = out
        .messages
        .iter()
        .filter_map(|m| match m {
            ServerMessage::UiEvent {
                kind: UiEventKind::Select,
                node_id,
                t_ms,
            } => Some((*node_id, *t_ms)),
            _ => None,
        })
        .collect();
    assert_eq!(selects.len(), 1, "{:?}", out.messages);
    assert_eq!(selects[0].1, 1280);
}

#[test]
fn noise_reproduces_mean_radial_error() {
    let noise = NoiseModel::default();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let n = 100_000;
    let mean = (0..n)
        .map(|_| {
            let (dx, dy) = noise.touch_offset(&mut rng);
            dx.hypot(dy)
        })
        .sum::<f64>()
        / n as f64;
    assert!((180.0..=188.0).contains(&mean), "{mean}");
    assert!((mean - TARGET_DISPERSION_PX).abs() < 4.0);
}

fn menu_accuracy(button_scale: f64, seed: u64) -> f64 {
    let mut config = StudyConfig::new(TaskKind::Menu15, &[Technique::FrontWorld], 4, seed);
    let d = MenuLayout::default();
    config.scene.menu = MenuLayout {
        button_width_deg: d.button_width_deg * button_scale,
        button_height_deg: d.button_height_deg * button_scale,
        gap_deg: d.gap_deg * button_scale,
        ..d
    };
    let records = run_study(&config).unwrap().records();
    records.iter().filter(|r| r.correct).count() as f64 / records.len() as f64
}

#[test]
fn smaller_buttons_are_not_easier() {
    let (mut full, mut half) = (0.0, 0.0);
    for seed in 0..3 {
        full += menu_accuracy(1.0, seed);
        half += menu_accuracy(0.5, seed);
    }
    assert!(half <= full, "half-size {half} vs full-size {full}");
    assert!(half < 3.0, "open-loop taps never missed a half-size button");
}

#[test]
fn noiseless_user_is_perfect_on_menu() {
    for t in [
        Technique::SideGaze,
        Technique::TwoFingers,
        Technique::DragNTap,
    ] {
        let config = SessionConfig::new(TaskKind::Menu15, t, 3);
        let out =
            simulate_participant(&config, &UserModel::default(), &NoiseModel::zero(), 3).unwrap();
        assert_eq!(out.records.len(), 42, "{t}");
        assert!(out.records.iter().all(|r| r.correct), "{t}");
        assert_eq!(out.abandoned, 0);
    }
}
