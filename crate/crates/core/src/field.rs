use crate::error::{Error, Result};

/// Shape of the per-entity tuple stored in a [`Field`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FieldKind {
    Scalar,
    Vector,
    /// Full 3x3 tensor stored row-major.
    Tensor,
}

impl FieldKind {
    pub fn components(self) -> usize {
        match self {
            FieldKind::Scalar => 1,
            FieldKind::Vector => 3,
            FieldKind::Tensor => 9,
        }
    }

    pub fn from_components(n: usize) -> Option<Self> {
        match n {
            1 => Some(FieldKind::Scalar),
            3 => Some(FieldKind::Vector),
            9 => Some(FieldKind::Tensor),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            FieldKind::Scalar => "scalar",
            FieldKind::Vector => "vector",
            FieldKind::Tensor => "tensor",
        }
    }
}

/// A table of finite tuples, one per point or per cell.
///
/// Values are stored flat; tuple `i` occupies `data[i * w..(i + 1) * w]` where
/// `w` is the component count of the kind.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    kind: FieldKind,
    data: Vec<f64>,
}

impl Field {
    /// Builds a field from flat data, checking the tuple width and finiteness.
    pub fn new(kind: FieldKind, data: Vec<f64>) -> Result<Self> {
        let width = kind.components();
        if !data.len().is_multiple_of(width) {
            return Err(Error::InvalidArgument(format!(
                "{} values do not form whole {}-component tuples",
                data.len(),
                width
            )));
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite value at flat index {i}")));
        }
        Ok(Field { kind, data })
    }

    pub fn scalar(values: Vec<f64>) -> Result<Self> {
        Field::new(FieldKind::Scalar, values)
    }

    pub fn vector(values: &[[f64; 3]]) -> Result<Self> {
        Field::new(FieldKind::Vector, values.iter().flatten().copied().collect())
    }

    pub(crate) fn from_parts_unchecked(kind: FieldKind, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len() % kind.components(), 0);
        Field { kind, data }
    }

    pub fn kind(&self) -> FieldKind {
        self.kind
    }

    pub fn components(&self) -> usize {
        self.kind.components()
    }

    /// Number of tuples.
    pub fn len(&self) -> usize {
        self.data.len() / self.components()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn tuple(&self, i: usize) -> &[f64] {
        let w = self.components();
        &self.data[i * w..(i + 1) * w]
    }

    pub fn tuples(&self) -> std::slice::ChunksExact<'_, f64> {
        self.data.chunks_exact(self.components())
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    /// Extracts the `k`-th component as a scalar field.
    pub fn component(&self, k: usize) -> Result<Field> {
        let w = self.components();
        if k >= w {
            return Err(Error::IndexOutOfRange {
                index: k,
                components: w,
            });
        }
        Ok(Field {
            kind: FieldKind::Scalar,
            data: self.tuples().map(|t| t[k]).collect(),
        })
    }

    /// Picks the tuples at `ids`, in order.
    pub fn select(&self, ids: &[usize]) -> Field {
        let mut data = Vec::with_capacity(ids.len() * self.components());
        for &i in ids {
            data.extend_from_slice(self.tuple(i));
        }
        Field { kind: self.kind, data }
    }

    /// Column labels for tabular export: `name` for scalars, `name_k` otherwise.
    pub fn column_names(&self, name: &str) -> Vec<String> {
        match self.kind {
            FieldKind::Scalar => vec![name.to_string()],
            _ => (0..self.components()).map(|k| format!("{name}_{k}")).collect(),
        }
    }
}
