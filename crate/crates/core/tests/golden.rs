mod common;

use common::{check_golden, demo_scene, golden_dir, golden_scenes, render_scene};

#[test]
fn golden_images_match() {
    let scene = demo_scene();
    let scenes = golden_scenes(&scene);
    let failures: Vec<String> = scenes
        .iter()
        .filter_map(|g| check_golden(&g.name, &render_scene(&scene, g)).err())
        .collect();
    assert!(failures.is_empty(), "{}", failures.join("\n"));
}

#[test]
fn every_golden_file_has_a_scene() {
    let scene = demo_scene();
    let names: Vec<String> = golden_scenes(&scene).into_iter().map(|g| g.name).collect();
    for entry in std::fs::read_dir(golden_dir()).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "png") {
            let stem = path.file_stem().unwrap().to_str().unwrap().to_string();
            assert!(names.contains(&stem), "stale golden {}", path.display());
        }
    }
}
