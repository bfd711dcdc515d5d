//! JSON mesh files.
//!
//! ```json
//! {
//!   "dim": 2,
//!   "nodes": [[0, 0], [1, 0], [0, 1]],
//!   "cells": [[0, 1, 2]],
//!   "cell_type": "tri",
//!   "labels": { "left": [[0, 2]] }
//! }
//! ```
//!
//! `cell_types` (one name per cell) may replace `cell_type` for mixed
//! meshes. Labels list facets by their vertex ids. Vertex order within
//! cells follows the reference cells of `lazyfe-core` (lexicographic for
//! quads and hexes).

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::sync::Arc;

use lazyfe_core::arrays::{CompressedArray, JaggedTable};
use lazyfe_core::geometry::DiscreteModel;
use lazyfe_core::reffe::CellTopology;
use lazyfe_core::tensors::Point;
use serde::{Deserialize, Serialize};

use crate::Error;

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct MeshFile {
    pub dim: usize,
    pub nodes: Vec<Vec<f64>>,
    pub cells: Vec<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cell_type: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cell_types: Option<Vec<String>>,
    #[serde(default)]
    pub labels: BTreeMap<String, Vec<Vec<usize>>>,
}

impl MeshFile {
    pub fn read(path: &Path) -> Result<Self, Error> {
        let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| Error::Format(format!("{}: {e}", path.display())))
    }

    pub fn write(&self, path: &Path) -> Result<(), Error> {
        let text = serde_json::to_string(self).map_err(|e| Error::Format(e.to_string()))?;
        fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
    }

    /// Model of dimension `D`. A `boundary` tag holding every boundary facet
    /// is added when the file does not define one.
    pub fn to_model<const D: usize>(&self) -> Result<DiscreteModel<D>, Error> {
        if self.dim != D {
            return Err(Error::Format(format!("mesh of dimension {} read as {D}", self.dim)));
        }
        let nodes = self
            .nodes
            .iter()
            .enumerate()
            .map(|(i, x)| {
                if x.len() != D {
                    return Err(Error::Format(format!("node {i} has {} coordinates", x.len())));
                }
                Ok(Point::new(std::array::from_fn(|k| x[k])))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let names: Vec<&str> = match (&self.cell_type, &self.cell_types) {
            (Some(t), None) => vec![t.as_str(); self.cells.len()],
            (None, Some(ts)) => ts.iter().map(String::as_str).collect(),
            _ => return Err(Error::Format("exactly one of cell_type and cell_types is required".into())),
        };
        let mut kinds: Vec<CellTopology> = Vec::new();
        let mut ptrs = Vec::with_capacity(names.len());
        for n in names {
            let t = CellTopology::from_name(n)?;
            let i = kinds.iter().position(|k| *k == t).unwrap_or_else(|| {
                kinds.push(t);
                kinds.len() - 1
            });
            ptrs.push(i as u32);
        }
        let types = CompressedArray::new(kinds, ptrs)?;
        let labels = self.labels.iter().map(|(k, v)| (k.clone(), v.clone())).collect();
        let mut model = DiscreteModel::from_parts(nodes, JaggedTable::from_rows(&self.cells), types, labels)?;
        if !self.labels.contains_key("boundary") {
            let b = model.boundary_facets();
            model.add_label("boundary", b)?;
        }
        Ok(model)
    }

    pub fn from_model<const D: usize>(model: &DiscreteModel<D>) -> Self {
        let types = model.cell_types();
        let cell_types = (0..model.num_cells()).map(|e| model.cell_type(e).name().to_lowercase());
        let (cell_type, cell_types) = if types.values().len() == 1 {
            (Some(types.values()[0].name().to_lowercase()), None)
        } else {
            (None, Some(cell_types.collect()))
        };
        Self {
            dim: D,
            nodes: model.nodes().iter().map(|p| p.0.to_vec()).collect(),
            cells: model.cells().rows().map(<[usize]>::to_vec).collect(),
            cell_type,
            cell_types,
            labels: model
                .labels()
                .iter()
                .map(|(k, fs)| (k.clone(), fs.iter().map(|&f| model.facet_vertices(f)).collect()))
                .collect(),
        }
    }
}

/// Dimension declared by a mesh file.
pub fn mesh_dim(path: &Path) -> Result<usize, Error> {
    Ok(MeshFile::read(path)?.dim)
}

pub fn read_model<const D: usize>(path: &Path) -> Result<Arc<DiscreteModel<D>>, Error> {
    Ok(Arc::new(MeshFile::read(path)?.to_model()?))
}

pub fn write_model<const D: usize>(model: &DiscreteModel<D>, path: &Path) -> Result<(), Error> {
    MeshFile::from_model(model).write(path)
}
