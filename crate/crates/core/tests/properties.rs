use approx::assert_relative_eq;
use hexlens_core::geom::{self, Vec3};
use hexlens_core::mesh::{load_mesh_str, write_mesh, write_vtk, MeshFormat};
use hexlens_core::quality::{
    cell_scaled_jacobian, cell_volumes, metric_fields, scaled_jacobian, tetrakis_volume,
    volume_weighted_harmonic, volume_weighted_mean, Metric, VertexAggregation,
};
use hexlens_core::render::composite::{composite_pixel, Fragment};
use hexlens_core::render::FragmentKind;
use hexlens_core::{build_lod, extract_sheets, synth, HexMesh};
use proptest::prelude::*;

fn rotation(axis: Vec3, angle: f64) -> [[f64; 3]; 3] {
    let [x, y, z] = geom::normalize(axis).unwrap_or([0.0, 0.0, 1.0]);
    let (s, c) = angle.sin_cos();
    let t = 1.0 - c;
    [
        [t * x * x + c, t * x * y - s * z, t * x * z + s * y],
        [t * x * y + s * z, t * y * y + c, t * y * z - s * x],
        [t * x * z - s * y, t * y * z + s * x, t * z * z + c],
    ]
}

fn apply(r: &[[f64; 3]; 3], p: Vec3, shift: Vec3) -> Vec3 {
    std::array::from_fn(|i| geom::dot(r[i], p) + shift[i])
}

fn small_mesh() -> impl Strategy<Value = HexMesh> {
    (1usize..4, 1usize..4, 1usize..4, 0.0f64..0.3, any::<u64>()).prop_map(|(a, b, c, j, seed)| {
        synth::jittered(synth::grid([a, b, c], [1.0; 3]).unwrap(), j, seed)
    })
}

fn unit_cube() -> [Vec3; 8] {
    [
        [0.0, 0.0, 0.0],
        [1.0, 0.0, 0.0],
        [1.0, 1.0, 0.0],
        [0.0, 1.0, 0.0],
        [0.0, 0.0, 1.0],
        [1.0, 0.0, 1.0],
        [1.0, 1.0, 1.0],
        [0.0, 1.0, 1.0],
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn quality_is_invariant_under_rigid_motion(
        mesh in small_mesh(),
        axis in prop::array::uniform3(-1.0f64..1.0),
        angle in -3.0f64..3.0,
        shift in prop::array::uniform3(-10.0f64..10.0),
    ) {
        let r = rotation(axis, angle);
        let moved = synth::deformed(&mesh, |p| apply(&r, p, shift));
        let (j0, j1) = (scaled_jacobian(&mesh), scaled_jacobian(&moved));
        let (v0, v1) = (cell_volumes(&mesh), cell_volumes(&moved));
        for c in 0..mesh.num_cells() {
            assert_relative_eq!(j0.values[c], j1.values[c], epsilon = 1e-10);
            assert_relative_eq!(v0.values[c], v1.values[c], epsilon = 1e-10, max_relative = 1e-10);
        }
    }

    #[test]
    fn scaled_jacobian_is_scale_invariant_and_bounded(mesh in small_mesh(), s in 0.01f64..100.0) {
        let scaled = synth::deformed(&mesh, |p| geom::scale(p, s));
        let (a, b) = (scaled_jacobian(&mesh), scaled_jacobian(&scaled));
        for c in 0..mesh.num_cells() {
            prop_assert!((-1.0..=1.0).contains(&a.values[c]));
            assert_relative_eq!(a.values[c], b.values[c], epsilon = 1e-10);
        }
    }

    #[test]
    fn affine_volume_is_additive(
        m in prop::array::uniform3(prop::array::uniform3(-1.0f64..1.0)),
        n in 1usize..4,
    ) {
        // An affine image of a unit cube split into n³ sub-cubes: the
        // sub-volumes add up to the whole.
        let map = |p: Vec3| -> Vec3 {
            std::array::from_fn(|i| p[i] + 0.3 * geom::dot(m[i], p))
        };
        let whole: [Vec3; 8] = unit_cube().map(map);
        let total = tetrakis_volume(&whole);
        let h = 1.0 / n as f64;
        let fine = synth::deformed(&synth::grid([n; 3], [h; 3]).unwrap(), map);
        let sum: f64 = cell_volumes(&fine).values.iter().sum();
        assert_relative_eq!(total, sum, epsilon = 1e-12, max_relative = 1e-10);
    }

    #[test]
    fn harmonic_never_exceeds_arithmetic(
        samples in prop::collection::vec((0.01f64..10.0, 0.01f64..1.0), 1..9),
    ) {
        let (h, _) = volume_weighted_harmonic(&samples);
        let (a, _) = volume_weighted_mean(&samples);
        prop_assert!(h <= a * (1.0 + 1e-12), "harmonic {h} > arithmetic {a}");
        let lo = samples.iter().map(|s| s.1).fold(f64::INFINITY, f64::min);
        prop_assert!(h >= lo * (1.0 - 1e-12));
    }

    #[test]
    fn incidence_is_symmetric(mesh in small_mesh()) {
        for c in 0..mesh.num_cells() {
            for &e in mesh.cell_edges(c) {
                prop_assert!(mesh.edge_cells(e).contains(&c));
            }
            for &f in mesh.cell_faces(c) {
                prop_assert!(mesh.face_cells(f).contains(&c));
            }
            for &v in &mesh.cells()[c] {
                prop_assert!(mesh.vertex_cells(v).contains(&c));
            }
        }
        for e in 0..mesh.num_edges() {
            for &c in mesh.edge_cells(e) {
                prop_assert!(mesh.cell_edges(c).contains(&e));
            }
            for &f in mesh.edge_faces(e) {
                prop_assert!(mesh.face_edges(f).contains(&e));
            }
        }
        for f in 0..mesh.num_faces() {
            for &e in mesh.face_edges(f) {
                prop_assert!(mesh.edge_faces(e).contains(&f));
            }
        }
    }

    #[test]
    fn loaders_round_trip(mesh in small_mesh()) {
        for (text, format) in [
            (write_mesh(&mesh), MeshFormat::Medit),
            (write_vtk(&mesh, &[]), MeshFormat::VtkLegacy),
        ] {
            let back = load_mesh_str(&text, format).unwrap();
            prop_assert_eq!(back.cells(), mesh.cells());
            prop_assert_eq!(back.vertices(), mesh.vertices());
            prop_assert_eq!(back.edges(), mesh.edges());
            prop_assert_eq!(back.faces(), mesh.faces());
        }
    }

    #[test]
    fn lod_is_deterministic_and_nested(mesh in small_mesh()) {
        let sheets = extract_sheets(&mesh);
        let a = build_lod(&mesh, &sheets);
        let b = build_lod(&mesh, &extract_sheets(&mesh));
        prop_assert_eq!(&a, &b);
        prop_assert_eq!(a.merges.len(), a.initial_components - 1);
        for k in 1..a.level_count {
            for e in 0..mesh.num_edges() {
                prop_assert!(!a.is_visible(e, k) || a.is_visible(e, k - 1));
            }
        }
        for e in 0..mesh.num_edges() {
            let v = mesh.edge_valence(e);
            if v.is_singular() && v.valence == 1 {
                prop_assert_eq!(a.e_level[e], a.level_count - 1);
            }
        }
    }

    #[test]
    fn importance_is_normalized(mesh in small_mesh(), weighted in any::<bool>()) {
        let agg = if weighted { VertexAggregation::VolumeWeighted } else { VertexAggregation::Max };
        let f = metric_fields(&mesh, &Metric::ScaledJacobian, agg).unwrap();
        let unit = |x: &f64| (0.0..=1.0).contains(x);
        prop_assert!(f.importance.per_cell.iter().all(unit));
        prop_assert!(f.importance.per_vertex.iter().all(unit));
        prop_assert!(f.importance.per_edge.iter().all(unit));
    }

    #[test]
    fn compositing_ignores_input_order(
        frags in prop::collection::vec((0u16..64, 0.0f32..=1.0, prop::array::uniform3(0.0f32..=1.0)), 0..40),
        seed in any::<u64>(),
    ) {
        let list: Vec<Fragment> = frags
            .iter()
            .enumerate()
            .map(|(k, &(d, alpha, color))| Fragment {
                depth: d as f32 / 64.0,
                seq: k as u32,
                color,
                alpha,
                kind: FragmentKind::ContextFace,
            })
            .collect();
        let mut shuffled = list.clone();
        let mut state = seed | 1;
        for i in (1..shuffled.len()).rev() {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            shuffled.swap(i, (state % (i as u64 + 1)) as usize);
        }
        let bg = [0.2, 0.4, 0.6];
        prop_assert_eq!(composite_pixel(&list, bg), composite_pixel(&shuffled, bg));
    }
}

#[test]
fn unit_cube_corner_jacobians() {
    let (j, flagged) = cell_scaled_jacobian(&unit_cube());
    assert_eq!(j, 1.0);
    assert!(!flagged);
    assert_relative_eq!(tetrakis_volume(&unit_cube()), 1.0, epsilon = 1e-15);
}
