use sstml_web::demo;

#[test]
fn encode_produces_binary_square_image() {
    let e = demo::encode(&[0.734, -1.2, 2.71, 0.001, 42.0, -0.5, 7.77, 0.25], 50).unwrap();
    assert_eq!(e.pixels.len(), 50 * 50);
    assert!(e.pixels.iter().all(|p| *p == 0 || *p == 255));
    assert!(e.pixels.contains(&255));
    assert_eq!((e.grid_rows, e.grid_cols), (3, 3));
}

#[test]
fn encode_rejects_impossible_layout() {
    assert!(demo::encode(&[0.0; 8], 6).is_err());
}

#[test]
fn mixture_rows_are_distributions() {
    for drift in ["sudden", "gradual", "incremental"] {
        let m = demo::mixture(200, 3, drift, false, 4).unwrap();
        assert_eq!(m.weights.len(), m.n_chunks * m.n_concepts);
        for row in m.weights.chunks(m.n_concepts) {
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert!(row.iter().all(|w| *w >= 0.0));
        }
    }
    assert!(demo::mixture(200, 3, "sideways", false, 4).is_err());
}

#[test]
fn race_curves_cover_every_tested_chunk() {
    let r = demo::race(30, 100, 0.2, 1, "sudden", 2, 1.5).unwrap();
    assert_eq!(r.chunk_index.len(), 29);
    assert_eq!(r.chunk_index[0], 1.0);
    for v in r.hoeffding.iter().chain(&r.cds) {
        assert!((0.0..=1.0).contains(v));
    }
}
