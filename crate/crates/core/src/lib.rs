//! Reproducible post-processing of planar two-dimensional CFD datasets.
//!
//! The crate is organised as a small pipeline:
//!
//! * [`vtk_io`] parses legacy `.vtk` and XML `.vtu` files into a [`RawDataset`].
//! * [`polymesh`] validates the cells as a planar polygonal mesh and derives
//!   adjacency, centroids, areas and boundary loops.
//! * [`case`] is the user-facing facade: open a file, get fields by name.
//! * [`extract`] holds the data-extraction routines (line profiles, Cartesian
//!   resampling, wall distances, boundary normals and tangents).
//! * [`plot`] composes boundary, field, vector, streamline and colorbar layers
//!   into a [`plot::Figure`] and renders it to SVG.
//! * [`cli`] drives all of the above from declarative JSON plot specs.
//!
//! ```no_run
//! use flowpost::{plot, Case};
//!
//! let case = Case::open("bfs.vtk")?;
//! let h = 0.0094318;
//! let u = case.get_field("UMean")?.component(0)?;
//!
//! let mut fig = plot::Figure::new();
//! let f = plot::plot_field(&mut fig, &case, &u, h, h, plot::ColorMap::viridis(), None)?;
//! let cbar = plot::add_colorbar(&mut fig, f, None)?;
//! fig.set_colorbar_label(cbar, "u/U0")?;
//! fig.set_xlabel("x/h");
//! fig.set_ylabel("y/h");
//! plot::render_svg(&fig, "u.svg")?;
//! # Ok::<(), flowpost::Error>(())
//! ```

pub mod case;
pub mod cli;
mod error;
pub mod extract;
mod field;
pub mod fixtures;
pub mod numfmt;
pub mod plot;
pub mod polymesh;
pub mod vtk_io;

pub use case::Case;
pub use error::{Error, Result};
pub use field::{Field, FieldKind};
pub use polymesh::{BoundaryLoop, MeshError, PolyMesh};
pub use vtk_io::{RawDataset, SourceKind, VtkError};

/// A point in the mesh plane.
pub type Point2 = [f64; 2];
