use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use fronttouch::picking::pick;
use fronttouch::scene::{
    build_grid_scene, build_keyboard_scene, build_menu_scene, GridLayout, KeyboardLayout,
    MenuLayout,
};
use fronttouch::{make_ray, Camera, CursorAngles, Ray, Scene};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rays(cam: &Camera, span: f64, n: usize) -> Vec<Ray> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    (0..n)
        .map(|_| {
            let c = CursorAngles::new(
                rng.random_range(-span..span),
                rng.random_range(-span..span) * 0.8,
            );
            make_ray(cam, c)
        })
        .collect()
}

fn picking(c: &mut Criterion) {
    let scenes: Vec<(&str, Scene, f64)> = vec![
        (
            "menu15",
            build_menu_scene(&MenuLayout::default()).unwrap(),
            45.0,
        ),
        (
            "keyboard",
            build_keyboard_scene(&KeyboardLayout::qwerty()).unwrap(),
            45.0,
        ),
        (
            "grid10k",
            build_grid_scene(&GridLayout::stress()).unwrap(),
            70.0,
        ),
    ];
    let mut group = c.benchmark_group("pick");
    for (name, mut scene, span) in scenes {
        let cam = Camera::new(0.0, 0.0);
        scene.update_world_transforms(cam);
        let batch = rays(&cam, span, 256);
        group.bench_with_input(BenchmarkId::from_parameter(name), &batch, |b, batch| {
            b.iter(|| batch.iter().filter(|r| pick(&scene, r).is_some()).count())
        });
    }
    group.finish();
}

criterion_group!(benches, picking);
criterion_main!(benches);
