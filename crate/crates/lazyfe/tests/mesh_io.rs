use std::collections::BTreeMap;
use std::path::PathBuf;

use lazyfe::core::geometry::cartesian_model;
use lazyfe::mesh_io::{mesh_dim, read_model, write_model, MeshFile};
use proptest::prelude::*;

fn tmp(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("lazyfe-mesh-io-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn triangle_pair() -> MeshFile {
    MeshFile {
        dim: 2,
        nodes: vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]],
        cells: vec![vec![0, 1, 2], vec![1, 3, 2]],
        cell_type: Some("tri".into()),
        cell_types: None,
        labels: BTreeMap::from([("left".to_string(), vec![vec![0, 2]])]),
    }
}

#[test]
fn file_round_trip_preserves_model() {
    let model = cartesian_model([0.0; 3], [1.0, 2.0, 0.5], [2, 3, 1], true).unwrap();
    let path = tmp("cube.json");
    write_model(&model, &path).unwrap();
    assert_eq!(mesh_dim(&path).unwrap(), 3);
    let back = read_model::<3>(&path).unwrap();
    assert_eq!(back.num_cells(), model.num_cells());
    assert_eq!(back.nodes().as_slice(), model.nodes().as_slice());
    for tag in ["boundary", "xmin", "zmax"] {
        assert_eq!(back.tag_facets(tag).unwrap().len(), model.tag_facets(tag).unwrap().len(), "{tag}");
    }
}

#[test]
fn boundary_tag_is_added_when_missing() {
    let m = triangle_pair().to_model::<2>().unwrap();
    assert_eq!(m.tag_facets("boundary").unwrap().len(), 4);
    assert_eq!(m.tag_facets("left").unwrap().len(), 1);
    assert!(m.tag_facets("right").is_err());
}

#[test]
fn mixed_cell_types() {
    let f = MeshFile {
        dim: 2,
        nodes: vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0], vec![2.0, 0.5]],
        cells: vec![vec![0, 1, 2, 3], vec![1, 4, 3]],
        cell_type: None,
        cell_types: Some(vec!["quad".into(), "tri".into()]),
        labels: BTreeMap::new(),
    };
    let m = f.to_model::<2>().unwrap();
    assert_eq!(m.cell_types().values().len(), 2);
    assert_eq!(m.tag_facets("boundary").unwrap().len(), 5);
    let again = MeshFile::from_model(&m);
    assert_eq!(again.cell_types.as_deref(), Some(&["quad".to_string(), "tri".to_string()][..]));
}

#[test]
fn malformed_files_are_rejected() {
    let mut f = triangle_pair();
    assert_eq!(f.to_model::<3>().unwrap_err().kind(), "format");
    f.nodes[1] = vec![1.0];
    assert_eq!(f.to_model::<2>().unwrap_err().kind(), "format");
    let mut f = triangle_pair();
    f.cell_types = Some(vec!["tri".into(); 2]);
    assert_eq!(f.to_model::<2>().unwrap_err().kind(), "format");
    let mut f = triangle_pair();
    f.cell_type = Some("pentagon".into());
    assert_eq!(f.to_model::<2>().unwrap_err().kind(), "core");
    let mut f = triangle_pair();
    f.cells[1] = vec![1, 3, 9];
    assert!(f.to_model::<2>().is_err());

    let path = tmp("garbage.json");
    std::fs::write(&path, "{ nodes: ").unwrap();
    assert_eq!(MeshFile::read(&path).unwrap_err().kind(), "format");
    assert_eq!(MeshFile::read(&tmp("missing.json")).unwrap_err().kind(), "io");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn json_round_trip(nx in 1usize..4, ny in 1usize..4, simplex in any::<bool>(), scale in 0.1f64..10.0) {
        let model = cartesian_model([-1.0, 0.5], [scale, 1.0], [nx, ny], simplex).unwrap();
        let f = MeshFile::from_model(&model);
        let text = serde_json::to_string(&f).unwrap();
        let back: MeshFile = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(&back, &f);
        let m = back.to_model::<2>().unwrap();
        prop_assert_eq!(MeshFile::from_model(&m), f);
    }
}
