use std::time::Instant;

use binaural_doa::hrtf::{default_search_grid, sphere_hrtf, Direction, DEFAULT_HEAD_RADIUS};
use binaural_doa::roomsim::{
    band_limit, image_method_brir, load_external_brir, save_external_brir, schroeder_t60,
    ImageOptions, Provenance, RoomScenario,
};

fn scenario(t60: f64) -> RoomScenario {
    RoomScenario {
        id: 0,
        room: [8.0, 5.0, 3.0],
        t60,
        source_direction: Direction::new(60.0, 10.0),
        source_distance: 1.5,
        distance_factor: 1.0,
        array_position: [3.1, 2.2, 1.4],
        array_yaw: 15.0,
        speech: 0,
        snr: None,
        seed: 3,
    }
}

#[test]
fn schroeder_decay_matches_target_t60() {
    let set = sphere_hrtf(DEFAULT_HEAD_RADIUS, &default_search_grid(), 16000).unwrap();
    for t60 in [0.4, 0.8] {
        let start = Instant::now();
        let (brir, stats) =
            image_method_brir(&scenario(t60), &set, &ImageOptions::default()).unwrap();
        // Measured in the analysis band: the coherent image sum builds up
        // at very low frequencies, which the localizer never sees.
        let left = band_limit(&brir.left, 16000, 1000.0, 6000.0);
        let right = band_limit(&brir.right, 16000, 1000.0, 6000.0);
        let energy: Vec<f64> = left
            .iter()
            .zip(&right)
            .map(|(l, r)| (l * l + r * r).sqrt())
            .collect();
        let est = schroeder_t60(&energy, 16000).unwrap();
        eprintln!(
            "T60 {t60}: {} images, estimate {est:.3} s, {:.2} s",
            stats.images,
            start.elapsed().as_secs_f64()
        );
        assert!((est / t60 - 1.0).abs() <= 0.2, "{est} vs {t60}");
    }
}

#[test]
fn external_brir_round_trip() {
    let set = sphere_hrtf(DEFAULT_HEAD_RADIUS, &default_search_grid(), 16000).unwrap();
    let opts = ImageOptions {
        max_path: Some(20.0),
        ..Default::default()
    };
    let (brir, _) = image_method_brir(&scenario(0.4), &set, &opts).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("room.wav");
    save_external_brir(&path, &brir, 1.5).unwrap();
    let (loaded, sidecar) = load_external_brir(&path).unwrap();
    assert_eq!(loaded.provenance, Provenance::External);
    assert_eq!(loaded.direction, brir.direction);
    assert_eq!(sidecar.distance, 1.5);
    for (a, b) in loaded.left.iter().zip(&brir.left) {
        assert!((a - b).abs() <= 1e-6 * b.abs().max(1e-3));
    }

    std::fs::write(
        path.with_extension("json"),
        r#"{"direction": {"az": 0, "el": 0}, "distance": 1, "sample_rate": 44100}"#,
    )
    .unwrap();
    assert!(load_external_brir(&path).is_err());
    std::fs::remove_file(path.with_extension("json")).unwrap();
    assert!(load_external_brir(&path).is_err());
}
