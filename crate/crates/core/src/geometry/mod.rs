//! Discrete models, triangulations and cell geometry.

mod cartesian;
mod cell_geometry;
mod model;
mod triangulation;

pub use cartesian::cartesian_model;
pub use cell_geometry::{
    cell_coordinates, cell_geometry, cell_topologies, GeomValues, GeometricMap, GeometryTables, JacobianMap,
};
pub use model::DiscreteModel;
pub use triangulation::{common_triangulation, Triangulation, TriangulationKind};
