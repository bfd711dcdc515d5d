use alloc::format;
use alloc::vec::Vec;

use super::DiscreteModel;
use crate::arrays::{CompressedArray, JaggedTable};
use crate::error::{Error, Result};
use crate::reffe::CellTopology;
use crate::tensors::Point;

const SIDE_TAGS: [[&str; 2]; 3] = [["xmin", "xmax"], ["ymin", "ymax"], ["zmin", "zmax"]];

/// Local vertices of the simplices splitting an n-cube with lexicographic
/// vertex order: all of them share the main diagonal `0 → 2^D − 1`.
fn kuhn_split(d: usize) -> Vec<Vec<usize>> {
    match d {
        1 => alloc::vec![alloc::vec![0, 1]],
        2 => alloc::vec![alloc::vec![0, 1, 3], alloc::vec![0, 3, 2]],
        _ => {
            let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
            perms
                .iter()
                .map(|p| {
                    let b0 = 1 << p[0];
                    let b1 = b0 | (1 << p[1]);
                    let mut t = alloc::vec![0, b0, b1, 7];
                    let c = |v: usize, k: usize| ((v >> k) & 1) as f64;
                    let m: [[f64; 3]; 3] = core::array::from_fn(|r| core::array::from_fn(|k| c(t[r + 1], k)));
                    let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
                        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
                        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
                    if det < 0.0 {
                        t.swap(2, 3);
                    }
                    t
                })
                .collect()
        }
    }
}

/// Structured mesh of the box `origin + [0, extents]` with `partitions`
/// cells per direction and lexicographic node numbering.
///
/// With `simplexify`, each n-cube is split into `D!` simplices sharing its
/// main diagonal. Boundary facets are tagged `boundary` and by side
/// (`xmin`, `xmax`, `ymin`, ...).
pub fn cartesian_model<const D: usize>(
    origin: [f64; D],
    extents: [f64; D],
    partitions: [usize; D],
    simplexify: bool,
) -> Result<DiscreteModel<D>> {
    if !(1..=3).contains(&D) {
        return Err(Error::Unsupported(format!("Cartesian meshes of dimension {D}")));
    }
    if partitions.iter().any(|&n| n == 0) {
        return Err(Error::InvalidArgument("zero partitions".into()));
    }
    if extents.iter().any(|&l| !(l > 0.0)) {
        return Err(Error::InvalidArgument("extents must be positive".into()));
    }
    let np: [usize; D] = core::array::from_fn(|k| partitions[k] + 1);
    let num_nodes: usize = np.iter().product();
    let num_cubes: usize = partitions.iter().product();
    let mut nodes = Vec::with_capacity(num_nodes);
    for n in 0..num_nodes {
        let mut r = n;
        let p = core::array::from_fn(|k| {
            let i = r % np[k];
            r /= np[k];
            origin[k] + extents[k] * i as f64 / partitions[k] as f64
        });
        nodes.push(Point::new(p));
    }
    let node_id = |idx: &[usize; D]| -> usize {
        let mut id = 0;
        for k in (0..D).rev() {
            id = id * np[k] + idx[k];
        }
        id
    };
    let cube_topo = match D {
        1 => CellTopology::Seg,
        2 => CellTopology::Quad,
        _ => CellTopology::Hex,
    };
    let split = if simplexify { kuhn_split(D) } else { alloc::vec![(0..1 << D).collect()] };
    let width = split[0].len();
    let mut conn = Vec::with_capacity(num_cubes * split.len() * width);
    let mut corners = [0usize; 8];
    for c in 0..num_cubes {
        let mut r = c;
        let base: [usize; D] = core::array::from_fn(|k| {
            let i = r % partitions[k];
            r /= partitions[k];
            i
        });
        for (v, corner) in corners.iter_mut().enumerate().take(1 << D) {
            let idx = core::array::from_fn(|k| base[k] + ((v >> k) & 1));
            *corner = node_id(&idx);
        }
        for s in &split {
            conn.extend(s.iter().map(|&v| corners[v]));
        }
    }
    let topo = match (simplexify, D) {
        (false, _) | (true, 1) => cube_topo,
        (true, 2) => CellTopology::Tri,
        _ => CellTopology::Tet,
    };
    let ncells = num_cubes * split.len();
    let cells = JaggedTable::uniform(conn, width)?;
    let types = CompressedArray::new(alloc::vec![topo], alloc::vec![0; ncells])?;
    let mut model = DiscreteModel::from_parts(nodes, cells, types, Vec::new())?;
    let boundary = model.boundary_facets();
    let mut sides: Vec<Vec<usize>> = alloc::vec![Vec::new(); 2 * D];
    for &f in &boundary {
        let verts = model.facet_vertices(f);
        for k in 0..D {
            for (s, target) in [origin[k], origin[k] + extents[k]].into_iter().enumerate() {
                let tol = 1e-12 * extents[k].max(1.0);
                if verts.iter().all(|&v| (model.nodes()[v][k] - target).abs() <= tol) {
                    sides[2 * k + s].push(f);
                }
            }
        }
    }
    model.add_label("boundary", boundary)?;
    for k in 0..D {
        for s in 0..2 {
            model.add_label(SIDE_TAGS[k][s], core::mem::take(&mut sides[2 * k + s]))?;
        }
    }
    Ok(model)
}
