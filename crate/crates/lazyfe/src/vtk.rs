//! Legacy ASCII VTK output.
//!
//! Every cell is written with its own copy of its points, so discontinuous
//! fields are shown as they are. With `refine = 2` each cell is split once
//! (edges halved) to display quadratic and higher-order fields.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::sync::Arc;

use lazyfe_core::arrays::CellArray;
use lazyfe_core::cell_data::{evaluate_cell, CellField, CellPoint};
use lazyfe_core::fields::{Value, ValueKind};
use lazyfe_core::geometry::Triangulation;
use lazyfe_core::reffe::CellTopology;
use lazyfe_core::tensors::Point;

use crate::Error;

const VTK_LINE: u8 = 3;
const VTK_TRIANGLE: u8 = 5;
const VTK_QUAD: u8 = 9;
const VTK_TETRA: u8 = 10;
const VTK_HEXAHEDRON: u8 = 12;

/// Reference points and VTK sub-cells of one cell type.
struct Lattice<const D: usize> {
    points: Vec<Point<D>>,
    cells: Vec<Vec<usize>>,
    vtk_type: u8,
}

fn point<const D: usize>(c: [f64; 3]) -> Point<D> {
    Point::new(std::array::from_fn(|k| c[k]))
}

fn lattice<const D: usize>(t: CellTopology, refine: usize) -> Result<Lattice<D>, Error> {
    let r = refine;
    let h = 1.0 / r as f64;
    let (points, cells, vtk_type) = match t {
        CellTopology::Seg => {
            let p = (0..=r).map(|i| point([i as f64 * h, 0.0, 0.0])).collect();
            (p, (0..r).map(|i| vec![i, i + 1]).collect(), VTK_LINE)
        }
        CellTopology::Quad => {
            let id = |i: usize, j: usize| i + (r + 1) * j;
            let p = (0..=r)
                .flat_map(|j| (0..=r).map(move |i| point([i as f64 * h, j as f64 * h, 0.0])))
                .collect();
            let c = (0..r)
                .flat_map(|j| (0..r).map(move |i| vec![id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)]))
                .collect();
            (p, c, VTK_QUAD)
        }
        CellTopology::Hex => {
            let id = |i: usize, j: usize, k: usize| i + (r + 1) * (j + (r + 1) * k);
            let mut p = Vec::new();
            for k in 0..=r {
                for j in 0..=r {
                    for i in 0..=r {
                        p.push(point([i as f64 * h, j as f64 * h, k as f64 * h]));
                    }
                }
            }
            let mut c = Vec::new();
            for k in 0..r {
                for j in 0..r {
                    for i in 0..r {
                        c.push(vec![
                            id(i, j, k),
                            id(i + 1, j, k),
                            id(i + 1, j + 1, k),
                            id(i, j + 1, k),
                            id(i, j, k + 1),
                            id(i + 1, j, k + 1),
                            id(i + 1, j + 1, k + 1),
                            id(i, j + 1, k + 1),
                        ]);
                    }
                }
            }
            (p, c, VTK_HEXAHEDRON)
        }
        CellTopology::Tri => {
            let mut ids = vec![vec![usize::MAX; r + 1]; r + 1];
            let mut p = Vec::new();
            for j in 0..=r {
                for i in 0..=r - j {
                    ids[i][j] = p.len();
                    p.push(point([i as f64 * h, j as f64 * h, 0.0]));
                }
            }
            let mut c = Vec::new();
            for j in 0..r {
                for i in 0..r - j {
                    c.push(vec![ids[i][j], ids[i + 1][j], ids[i][j + 1]]);
                    if i + j + 2 <= r {
                        c.push(vec![ids[i + 1][j], ids[i + 1][j + 1], ids[i][j + 1]]);
                    }
                }
            }
            (p, c, VTK_TRIANGLE)
        }
        CellTopology::Tet => {
            let v: Vec<Point<D>> = t.vertex_coords().iter().map(|&c| point(c)).collect();
            match r {
                1 => (v, vec![vec![0, 1, 2, 3]], VTK_TETRA),
                2 => {
                    // Vertices 0..4, then midpoints of 01 02 03 12 13 23.
                    let mut p = v.clone();
                    for (a, b) in [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)] {
                        p.push((v[a] + v[b]) * 0.5);
                    }
                    let (m01, m02, m03, m12, m13, m23) = (4, 5, 6, 7, 8, 9);
                    let c = vec![
                        vec![0, m01, m02, m03],
                        vec![m01, 1, m12, m13],
                        vec![m02, m12, 2, m23],
                        vec![m03, m13, m23, 3],
                        vec![m02, m13, m01, m03],
                        vec![m02, m13, m03, m23],
                        vec![m02, m13, m23, m12],
                        vec![m02, m13, m12, m01],
                    ];
                    (p, c, VTK_TETRA)
                }
                _ => return Err(Error::Config(format!("tetrahedra support refinement 1 or 2, got {r}"))),
            }
        }
    };
    Ok(Lattice { points, cells, vtk_type })
}

/// Writes `fields` sampled on the (optionally refined) cells of a bulk
/// triangulation.
pub fn write_vtk<const D: usize>(
    trian: &Arc<Triangulation<D>>,
    fields: &[(&str, &CellField<D>)],
    refine: usize,
    path: &Path,
) -> Result<(), Error> {
    if !(1..=2).contains(&refine) {
        return Err(Error::Config(format!("refinement level {refine} (1 or 2 supported)")));
    }
    if trian.is_boundary() {
        return Err(Error::Config("VTK output is only written for bulk triangulations".into()));
    }
    let model = trian.model();
    let lattices = model
        .cell_types()
        .values()
        .iter()
        .map(|&t| lattice::<D>(t, refine))
        .collect::<Result<Vec<_>, _>>()?;
    let sets = lattices.iter().map(|l| Some(l.points.clone())).collect();
    let x = CellPoint::new(trian, sets)?;
    let io = |e: std::io::Error| Error::Io(format!("{}: {e}", path.display()));
    let mut w = BufWriter::new(File::create(path).map_err(io)?);

    let ncells = trian.num_cells();
    let lat = |e: usize| &lattices[model.cell_type_index(e)];
    let npoints: usize = (0..ncells).map(|e| lat(e).points.len()).sum();
    let nsub: usize = (0..ncells).map(|e| lat(e).cells.len()).sum();
    let nconn: usize = (0..ncells).map(|e| lat(e).cells.iter().map(|c| c.len() + 1).sum::<usize>()).sum();

    writeln!(w, "# vtk DataFile Version 3.0\nlazyfe output\nASCII\nDATASET UNSTRUCTURED_GRID").map_err(io)?;
    writeln!(w, "POINTS {npoints} double").map_err(io)?;
    for e in 0..ncells {
        for p in model.map_points(e, &lat(e).points) {
            let c: [f64; 3] = std::array::from_fn(|k| if k < D { p[k] } else { 0.0 });
            writeln!(w, "{} {} {}", c[0], c[1], c[2]).map_err(io)?;
        }
    }
    writeln!(w, "CELLS {nsub} {nconn}").map_err(io)?;
    let mut offset = 0;
    for e in 0..ncells {
        for c in &lat(e).cells {
            write!(w, "{}", c.len()).map_err(io)?;
            for i in c {
                write!(w, " {}", offset + i).map_err(io)?;
            }
            writeln!(w).map_err(io)?;
        }
        offset += lat(e).points.len();
    }
    writeln!(w, "CELL_TYPES {nsub}").map_err(io)?;
    for e in 0..ncells {
        for _ in &lat(e).cells {
            writeln!(w, "{}", lat(e).vtk_type).map_err(io)?;
        }
    }
    if !fields.is_empty() {
        writeln!(w, "POINT_DATA {npoints}").map_err(io)?;
    }
    for (name, f) in fields {
        let vals = evaluate_cell(f, &x)?;
        let name = name.replace(char::is_whitespace, "_");
        match f.kind() {
            ValueKind::Scalar => writeln!(w, "SCALARS {name} double 1\nLOOKUP_TABLE default").map_err(io)?,
            ValueKind::Vector => writeln!(w, "VECTORS {name} double").map_err(io)?,
            ValueKind::Tensor => writeln!(w, "TENSORS {name} double").map_err(io)?,
        }
        let mut c = vals.array_cache();
        for e in 0..ncells {
            let pv = vals.getindex(&mut c, e);
            for q in 0..pv.npoints {
                match pv.get(q, 0, 0) {
                    Value::Scalar(s) => writeln!(w, "{s}"),
                    Value::Vector(v) => {
                        let c: [f64; 3] = std::array::from_fn(|k| if k < D { v[k] } else { 0.0 });
                        writeln!(w, "{} {} {}", c[0], c[1], c[2])
                    }
                    Value::Tensor(t) => {
                        for i in 0..3 {
                            let row: [f64; 3] = std::array::from_fn(|j| if i < D && j < D { t.0[i][j] } else { 0.0 });
                            writeln!(w, "{} {} {}", row[0], row[1], row[2]).map_err(io)?;
                        }
                        Ok(())
                    }
                }
                .map_err(io)?;
            }
        }
    }
    w.flush().map_err(io)
}
