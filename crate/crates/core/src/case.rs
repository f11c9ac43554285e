//! The dataset facade: open a file, look up fields and boundaries by name.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use log::warn;

use crate::error::{Error, Result};
use crate::field::Field;
use crate::polymesh::{build_mesh, BoundaryLoop, Bounds, PolyMesh};
use crate::vtk_io::{read_dataset, RawDataset};

/// A mesh plus its cell fields. Immutable once opened.
#[derive(Debug, Clone)]
pub struct Case {
    mesh: PolyMesh,
    fields: BTreeMap<String, Field>,
    boundary_names: Vec<String>,
    bounds: Bounds,
}

/// Path of the optional boundary-name sidecar of a dataset, e.g.
/// `bfs.vtk.names.json` for `bfs.vtk`.
pub fn sidecar_path(dataset: &Path) -> PathBuf {
    let mut name = dataset.as_os_str().to_owned();
    name.push(".names.json");
    PathBuf::from(name)
}

impl Case {
    /// Opens a `.vtk` or `.vtu` file. Point fields without a same-named cell
    /// field are converted to cell data; a `<file>.names.json` sidecar, if
    /// present, renames boundaries.
    pub fn open(path: impl AsRef<Path>) -> Result<Case> {
        let path = path.as_ref();
        let raw = read_dataset(path)?;
        let mut case = Case::from_raw(raw)?;
        let sidecar = sidecar_path(path);
        match std::fs::read_to_string(&sidecar) {
            Ok(text) => case.apply_names(&sidecar, &text)?,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {}
            Err(e) => return Err(Error::io(sidecar, e)),
        }
        Ok(case)
    }

    /// Builds a case from already-parsed data, with default boundary names.
    pub fn from_raw(raw: RawDataset) -> Result<Case> {
        raw.validate()?;
        let mesh = build_mesh(&raw, None)?;
        let mut fields = raw.cell_fields;
        for (name, f) in &raw.point_fields {
            if fields.contains_key(name) {
                warn!("point field {name:?} ignored: a cell field with the same name exists");
                continue;
            }
            fields.insert(name.clone(), mesh.point_to_cell(f)?);
        }
        let boundary_names = mesh.boundary_loops().iter().map(|l| l.name.clone()).collect();
        let bounds = mesh.bounds();
        Ok(Case {
            mesh,
            fields,
            boundary_names,
            bounds,
        })
    }

    fn apply_names(&mut self, path: &Path, text: &str) -> Result<()> {
        let invalid = |reason: String| Error::SidecarInvalid {
            path: path.to_path_buf(),
            reason,
        };
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| invalid(format!("not valid JSON: {e}")))?;
        let map = value
            .as_object()
            .ok_or_else(|| invalid("expected a JSON object".into()))?;
        let mut names = self.boundary_names.clone();
        for (key, label) in map {
            let k = self
                .mesh
                .boundary_loops()
                .iter()
                .position(|l| &l.name == key)
                .ok_or_else(|| invalid(format!("{key:?} does not name a boundary loop")))?;
            let label = label
                .as_str()
                .ok_or_else(|| invalid(format!("label for {key:?} is not a string")))?;
            if label.is_empty() {
                return Err(invalid(format!("label for {key:?} is empty")));
            }
            names[k] = label.to_string();
        }
        let mut sorted = names.clone();
        sorted.sort();
        if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
            return Err(invalid(format!("boundary name {:?} is used twice", w[0])));
        }
        self.boundary_names = names;
        Ok(())
    }

    pub fn mesh(&self) -> &PolyMesh {
        &self.mesh
    }

    pub fn n_cells(&self) -> usize {
        self.mesh.n_cells()
    }

    pub fn bounds(&self) -> Bounds {
        self.bounds
    }

    /// Field names in sorted order.
    pub fn field_names(&self) -> Vec<String> {
        self.fields.keys().cloned().collect()
    }

    /// A copy of the named cell field.
    pub fn get_field(&self, name: &str) -> Result<Field> {
        self.field_ref(name).cloned()
    }

    pub(crate) fn field_ref(&self, name: &str) -> Result<&Field> {
        self.fields.get(name).ok_or_else(|| Error::UnknownField {
            name: name.to_string(),
            available: self.field_names(),
        })
    }

    /// Boundary names, one per loop, outer loop first.
    pub fn boundary_names(&self) -> &[String] {
        &self.boundary_names
    }

    /// The loop carrying the given boundary name.
    pub fn boundary(&self, name: &str) -> Result<&BoundaryLoop> {
        self.boundary_names
            .iter()
            .position(|n| n == name)
            .map(|k| &self.mesh.boundary_loops()[k])
            .ok_or_else(|| Error::UnknownBoundary {
                name: name.to_string(),
                available: self.boundary_names.clone(),
            })
    }

    /// The cell adjacent to each edge of a boundary, in traversal order.
    pub fn boundary_cell_ids(&self, boundary: &str) -> Result<Vec<usize>> {
        Ok(self.boundary(boundary)?.adjacent_cells.clone())
    }
}
