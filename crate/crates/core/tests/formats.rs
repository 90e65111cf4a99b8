use frontlab::env_media::gen_poisson_cloud;
use frontlab::env_media::RadiusLaw;
use frontlab::grid::{GridShape, ScalarGrid, FHL1_MAGIC};
use frontlab::Error;

#[test]
fn fhl1_round_trip_is_bit_exact() {
    let shape = GridShape::new(7, 11, 0.1).unwrap();
    let g = ScalarGrid::from_fn(shape, |p| (p[0] * 3.0).sin() - p[1].powi(3) + f64::EPSILON);
    let mut bytes = Vec::new();
    g.write_fhl1_to(&mut bytes).unwrap();
    assert_eq!(&bytes[..4], FHL1_MAGIC);
    assert_eq!(bytes.len(), 4 + 4 + 4 + 8 + 8 * 77);
    let back = ScalarGrid::read_fhl1_from(&mut bytes.as_slice()).unwrap();
    assert_eq!(back, g);
}

#[test]
fn environment_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let env = gen_poisson_cloud(
        0.2,
        RadiusLaw::Uniform { min: 0.3, max: 0.6 },
        16.0,
        0.125,
        8,
    )
    .unwrap();
    let (grid, meta) = (dir.path().join("env.fhl1"), dir.path().join("env.csv"));
    env.write(&grid, &meta).unwrap();
    let back = ScalarGrid::read_fhl1(&grid).unwrap();
    assert_eq!(back.values, env.a_field);
    assert_eq!(back.shape, env.shape);
    let text = std::fs::read_to_string(meta).unwrap();
    assert!(text.contains("poisson_cloud"));
}

#[test]
fn corrupt_fhl1_is_a_format_error() {
    let g = ScalarGrid::filled(GridShape::square(3, 1.0).unwrap(), 0.25);
    let mut bytes = Vec::new();
    g.write_fhl1_to(&mut bytes).unwrap();

    let mut magic = bytes.clone();
    magic[0] = b'X';
    assert!(matches!(
        ScalarGrid::read_fhl1_from(&mut magic.as_slice()),
        Err(Error::Format(_))
    ));

    let mut trailing = bytes.clone();
    trailing.push(0);
    assert!(matches!(
        ScalarGrid::read_fhl1_from(&mut trailing.as_slice()),
        Err(Error::Format(_))
    ));

    let truncated = &bytes[..bytes.len() - 3];
    assert!(ScalarGrid::read_fhl1_from(&mut &truncated[..]).is_err());

    let mut zero_h = bytes.clone();
    zero_h[12..20].copy_from_slice(&0.0f64.to_le_bytes());
    assert!(matches!(
        ScalarGrid::read_fhl1_from(&mut zero_h.as_slice()),
        Err(Error::Format(_))
    ));
}
