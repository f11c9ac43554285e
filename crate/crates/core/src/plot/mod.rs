//! Figure composition and SVG output.
//!
//! A [`Figure`] is an ordered list of layers. Each `plot_*` function appends
//! one layer and returns a typed handle that can be used to customise it
//! later, for example to attach a colorbar to a field layer. Coordinates are
//! divided by the caller's `scale_x`/`scale_y` when the layer is created, so
//! every layer of a figure lives in the same display units (e.g. `x/h`).

mod colormap;
mod streamline;
mod svg;

use std::sync::atomic::{AtomicU64, Ordering};

use log::warn;

use crate::case::Case;
use crate::error::{Error, Result};
use crate::extract::{sample_field, Profile};
use crate::field::{Field, FieldKind};
use crate::polymesh::Bounds;
use crate::Point2;

pub use colormap::ColorMap;
pub use streamline::{trace_streamline, StreamlineOptions};
pub use svg::{render_svg, render_svg_string};

static NEXT_FIGURE: AtomicU64 = AtomicU64::new(1);

/// Reference to a layer of a particular figure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LayerHandle {
    figure: u64,
    index: usize,
}

impl LayerHandle {
    pub fn index(&self) -> usize {
        self.index
    }
}

/// Handle to a colored-cell layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FieldLayerHandle(pub LayerHandle);

/// Handle to a colorbar layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ColorbarHandle(pub LayerHandle);

/// Handle to an arrow layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct VectorSet(pub LayerHandle);

/// Handle to a streamline layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StreamlineSet(pub LayerHandle);

/// What a polyline layer depicts; used as the SVG class.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolylineKind {
    Boundary,
    Streamline,
    Profile,
}

impl PolylineKind {
    pub fn class(self) -> &'static str {
        match self {
            PolylineKind::Boundary => "boundaries",
            PolylineKind::Streamline => "streamlines",
            PolylineKind::Profile => "profile",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolygonLayer {
    pub polygons: Vec<Vec<Point2>>,
    pub values: Vec<f64>,
    pub colormap: ColorMap,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolylineLayer {
    pub kind: PolylineKind,
    pub lines: Vec<Vec<Point2>>,
    pub closed: bool,
    pub color: String,
    /// Stroke width in pixels.
    pub width: f64,
}

/// An arrow in display units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arrow {
    pub anchor: Point2,
    /// `atan2(vy, vx)` of the anchor's vector.
    pub angle: f64,
    pub length: f64,
}

impl Arrow {
    pub fn tip(&self) -> Point2 {
        [
            self.anchor[0] + self.length * self.angle.cos(),
            self.anchor[1] + self.length * self.angle.sin(),
        ]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArrowLayer {
    pub arrows: Vec<Arrow>,
    pub color: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TextItem {
    pub at: Point2,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TextLayer {
    pub items: Vec<TextItem>,
    /// Font size in pixels.
    pub size: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ColorbarLayer {
    pub colormap: ColorMap,
    pub label: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Layer {
    Polygons(PolygonLayer),
    Polylines(PolylineLayer),
    Arrows(ArrowLayer),
    Text(TextLayer),
    Colorbar(ColorbarLayer),
}

impl Layer {
    /// Bounding box of the layer's display-space geometry.
    fn bounds(&self) -> Option<Bounds> {
        let pts: Vec<Point2> = match self {
            Layer::Polygons(l) => l.polygons.iter().flatten().copied().collect(),
            Layer::Polylines(l) => l.lines.iter().flatten().copied().collect(),
            Layer::Arrows(l) => l.arrows.iter().flat_map(|a| [a.anchor, a.tip()]).collect(),
            Layer::Text(l) => l.items.iter().map(|t| t.at).collect(),
            Layer::Colorbar(_) => Vec::new(),
        };
        Bounds::of_points(&pts)
    }
}

/// An ordered stack of layers plus axis labels.
#[derive(Debug, Clone)]
pub struct Figure {
    id: u64,
    layers: Vec<Option<Layer>>,
    xlabel: Option<String>,
    ylabel: Option<String>,
    title: Option<String>,
    view: Option<Bounds>,
    width: f64,
}

impl Default for Figure {
    fn default() -> Self {
        Figure::new()
    }
}

impl Figure {
    pub fn new() -> Figure {
        Figure {
            id: NEXT_FIGURE.fetch_add(1, Ordering::Relaxed),
            layers: Vec::new(),
            xlabel: None,
            ylabel: None,
            title: None,
            view: None,
            width: 800.0,
        }
    }

    pub fn set_xlabel(&mut self, label: &str) {
        self.xlabel = Some(label.to_string());
    }

    pub fn set_ylabel(&mut self, label: &str) {
        self.ylabel = Some(label.to_string());
    }

    pub fn set_title(&mut self, title: &str) {
        self.title = Some(title.to_string());
    }

    pub fn xlabel(&self) -> Option<&str> {
        self.xlabel.as_deref()
    }

    pub fn ylabel(&self) -> Option<&str> {
        self.ylabel.as_deref()
    }

    /// Fixes the displayed rectangle (display units). `None` fits all layers.
    pub fn set_view(&mut self, view: Option<Bounds>) {
        self.view = view;
    }

    /// Sets the document width in pixels.
    pub fn set_width(&mut self, px: f64) -> Result<()> {
        if !(px.is_finite() && px >= 200.0) {
            return Err(Error::InvalidArgument(format!(
                "figure width {px} must be at least 200 px"
            )));
        }
        self.width = px;
        Ok(())
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    /// The displayed rectangle: the explicit view, or the union of the
    /// layer extents.
    pub fn view(&self) -> Option<Bounds> {
        self.view
            .or_else(|| self.layers().filter_map(Layer::bounds).reduce(|a, b| a.union(&b)))
    }

    /// Live layers in insertion order.
    pub fn layers(&self) -> impl Iterator<Item = &Layer> {
        self.layers.iter().flatten()
    }

    pub fn is_empty(&self) -> bool {
        self.layers().next().is_none()
    }

    fn push(&mut self, layer: Layer) -> LayerHandle {
        self.layers.push(Some(layer));
        LayerHandle {
            figure: self.id,
            index: self.layers.len() - 1,
        }
    }

    pub fn layer(&self, h: LayerHandle) -> Result<&Layer> {
        if h.figure != self.id {
            return Err(Error::StaleHandle);
        }
        self.layers
            .get(h.index)
            .and_then(Option::as_ref)
            .ok_or(Error::StaleHandle)
    }

    fn layer_mut(&mut self, h: LayerHandle) -> Result<&mut Layer> {
        if h.figure != self.id {
            return Err(Error::StaleHandle);
        }
        self.layers
            .get_mut(h.index)
            .and_then(Option::as_mut)
            .ok_or(Error::StaleHandle)
    }

    /// Removes a layer; its handles become stale.
    pub fn remove(&mut self, h: LayerHandle) -> Result<Layer> {
        self.layer(h)?;
        Ok(self.layers[h.index].take().expect("checked live"))
    }

    pub fn colorbar_label(&self, h: ColorbarHandle) -> Result<Option<&str>> {
        match self.layer(h.0)? {
            Layer::Colorbar(c) => Ok(c.label.as_deref()),
            _ => Err(Error::StaleHandle),
        }
    }

    pub fn set_colorbar_label(&mut self, h: ColorbarHandle, label: &str) -> Result<()> {
        match self.layer_mut(h.0)? {
            Layer::Colorbar(c) => {
                c.label = Some(label.to_string());
                Ok(())
            }
            _ => Err(Error::StaleHandle),
        }
    }

    /// The colormap and range of a field layer.
    pub fn field_colormap(&self, h: FieldLayerHandle) -> Result<&ColorMap> {
        match self.layer(h.0)? {
            Layer::Polygons(p) => Ok(&p.colormap),
            _ => Err(Error::StaleHandle),
        }
    }

    /// Replaces the colormap of a field layer, keeping its range.
    pub fn set_field_colormap(&mut self, h: FieldLayerHandle, map: ColorMap) -> Result<()> {
        match self.layer_mut(h.0)? {
            Layer::Polygons(p) => {
                let (lo, hi) = p.colormap.range();
                p.colormap = map.with_range(lo, hi);
                Ok(())
            }
            _ => Err(Error::StaleHandle),
        }
    }

    pub fn arrows(&self, h: VectorSet) -> Result<&[Arrow]> {
        match self.layer(h.0)? {
            Layer::Arrows(a) => Ok(&a.arrows),
            _ => Err(Error::StaleHandle),
        }
    }

    pub fn set_arrow_color(&mut self, h: VectorSet, color: &str) -> Result<()> {
        match self.layer_mut(h.0)? {
            Layer::Arrows(a) => {
                a.color = color.to_string();
                Ok(())
            }
            _ => Err(Error::StaleHandle),
        }
    }

    pub fn streamlines(&self, h: StreamlineSet) -> Result<&[Vec<Point2>]> {
        self.polylines(h.0)
    }

    /// The polylines of any polyline layer.
    pub fn polylines(&self, h: LayerHandle) -> Result<&[Vec<Point2>]> {
        match self.layer(h)? {
            Layer::Polylines(l) => Ok(&l.lines),
            _ => Err(Error::StaleHandle),
        }
    }

    pub fn set_line_style(&mut self, h: LayerHandle, color: &str, width_px: f64) -> Result<()> {
        match self.layer_mut(h)? {
            Layer::Polylines(l) => {
                l.color = color.to_string();
                l.width = width_px;
                Ok(())
            }
            _ => Err(Error::StaleHandle),
        }
    }
}

fn check_scales(sx: f64, sy: f64) -> Result<()> {
    if sx > 0.0 && sy > 0.0 && sx.is_finite() && sy.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "scale factors must be positive and finite, got ({sx}, {sy})"
        )))
    }
}

fn scaled(p: Point2, sx: f64, sy: f64) -> Point2 {
    [p[0] / sx, p[1] / sy]
}

/// Draws every boundary loop as a closed polyline.
pub fn plot_boundaries(fig: &mut Figure, case: &Case, scale_x: f64, scale_y: f64) -> Result<LayerHandle> {
    check_scales(scale_x, scale_y)?;
    let pts = case.mesh().points();
    let lines = case
        .mesh()
        .boundary_loops()
        .iter()
        .map(|l| l.edges.iter().map(|&(a, _)| scaled(pts[a], scale_x, scale_y)).collect())
        .collect();
    Ok(fig.push(Layer::Polylines(PolylineLayer {
        kind: PolylineKind::Boundary,
        lines,
        closed: true,
        color: "#000000".into(),
        width: 1.5,
    })))
}

/// Writes each boundary's name next to the midpoint of its middle edge.
pub fn annotate_boundaries(fig: &mut Figure, case: &Case, scale_x: f64, scale_y: f64) -> Result<LayerHandle> {
    check_scales(scale_x, scale_y)?;
    let pts = case.mesh().points();
    let items = case
        .mesh()
        .boundary_loops()
        .iter()
        .zip(case.boundary_names())
        .map(|(l, name)| {
            let (a, b) = l.edges[l.edges.len() / 2];
            let m = [0.5 * (pts[a][0] + pts[b][0]), 0.5 * (pts[a][1] + pts[b][1])];
            TextItem {
                at: scaled(m, scale_x, scale_y),
                text: name.clone(),
            }
        })
        .collect();
    Ok(fig.push(Layer::Text(TextLayer { items, size: 12.0 })))
}

/// Places a text label at a display-space position.
pub fn annotate(fig: &mut Figure, text: &str, at: Point2) -> LayerHandle {
    fig.push(Layer::Text(TextLayer {
        items: vec![TextItem {
            at,
            text: text.to_string(),
        }],
        size: 12.0,
    }))
}

/// Fills every cell with the color of its value. The range defaults to the
/// value extremes.
pub fn plot_field(
    fig: &mut Figure,
    case: &Case,
    values: &Field,
    scale_x: f64,
    scale_y: f64,
    colormap: ColorMap,
    range: Option<(f64, f64)>,
) -> Result<FieldLayerHandle> {
    check_scales(scale_x, scale_y)?;
    if values.kind() != FieldKind::Scalar {
        return Err(Error::InvalidArgument(format!(
            "plot_field needs a scalar field, got a {} field; extract a component first",
            values.kind().name()
        )));
    }
    if values.len() != case.n_cells() {
        return Err(Error::SizeMismatch {
            expected: case.n_cells(),
            found: values.len(),
        });
    }
    let v = values.as_slice();
    let (lo, hi) = match range {
        Some((a, b)) if a.is_finite() && b.is_finite() => (a, b),
        Some(r) => return Err(Error::InvalidArgument(format!("color range {r:?} is not finite"))),
        None if v.is_empty() => (0.0, 1.0),
        None => v
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x))),
    };
    let mesh = case.mesh();
    let polygons = (0..mesh.n_cells())
        .map(|c| {
            mesh.cell_polygon(c)
                .into_iter()
                .map(|p| scaled(p, scale_x, scale_y))
                .collect()
        })
        .collect();
    Ok(FieldLayerHandle(fig.push(Layer::Polygons(PolygonLayer {
        polygons,
        values: v.to_vec(),
        colormap: colormap.with_range(lo, hi),
    }))))
}

/// Arrow placement options.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct VectorOptions {
    /// Resample on an `nx` x `ny` grid instead of using cell centres.
    pub sample: Option<(usize, usize)>,
    /// Draw every arrow with the same length.
    pub normalize: bool,
    /// Display length per unit magnitude. Defaults to 0.9 of the arrow
    /// spacing divided by the largest magnitude.
    pub scale: Option<f64>,
}

/// Draws the in-plane part of a vector field as arrows.
pub fn plot_vectors(
    fig: &mut Figure,
    case: &Case,
    field: &Field,
    scale_x: f64,
    scale_y: f64,
    opts: VectorOptions,
) -> Result<VectorSet> {
    check_scales(scale_x, scale_y)?;
    if field.kind() != FieldKind::Vector {
        return Err(Error::InvalidArgument(format!(
            "plot_vectors needs a vector field, got a {} field",
            field.kind().name()
        )));
    }
    if field.len() != case.n_cells() {
        return Err(Error::SizeMismatch {
            expected: case.n_cells(),
            found: field.len(),
        });
    }
    let (anchors, vecs, spacing): (Vec<Point2>, Vec<[f64; 2]>, f64) = match opts.sample {
        None => {
            let mesh = case.mesh();
            let mean_area = mesh.cell_areas().iter().sum::<f64>() / mesh.n_cells().max(1) as f64;
            (
                mesh.cell_centres().to_vec(),
                field.tuples().map(|t| [t[0], t[1]]).collect(),
                (mean_area / (scale_x * scale_y)).sqrt(),
            )
        }
        Some((nx, ny)) => {
            let s = sample_field(case, nx, ny, "vectors", field)?;
            let mut anchors = Vec::new();
            let mut vecs = Vec::new();
            for j in 0..s.ny() {
                for i in 0..s.nx() {
                    if s.is_inside(i, j) {
                        let t = s.value(i, j);
                        anchors.push([s.grid_x[i], s.grid_y[j]]);
                        vecs.push([t[0], t[1]]);
                    }
                }
            }
            let dx = (s.grid_x[1] - s.grid_x[0]) / scale_x;
            let dy = (s.grid_y[1] - s.grid_y[0]) / scale_y;
            let spacing = match (dx > 0.0, dy > 0.0) {
                (true, true) => dx.min(dy),
                (true, false) => dx,
                (false, true) => dy,
                (false, false) => 0.0,
            };
            (anchors, vecs, spacing)
        }
    };
    let mags: Vec<f64> = vecs.iter().map(|v| v[0].hypot(v[1])).collect();
    let vmax = mags.iter().copied().fold(0.0, f64::max);
    let arrows = anchors
        .iter()
        .zip(&vecs)
        .zip(&mags)
        .map(|((&p, v), &m)| {
            let length = if opts.normalize {
                if m > 0.0 {
                    opts.scale.unwrap_or(0.9 * spacing)
                } else {
                    0.0
                }
            } else {
                match opts.scale {
                    Some(s) => s * m,
                    None if vmax > 0.0 => 0.9 * spacing * m / vmax,
                    None => 0.0,
                }
            };
            Arrow {
                anchor: scaled(p, scale_x, scale_y),
                angle: v[1].atan2(v[0]),
                length,
            }
        })
        .collect();
    Ok(VectorSet(fig.push(Layer::Arrows(ArrowLayer {
        arrows,
        color: "#000000".into(),
    }))))
}

/// Traces one streamline per seed through the cell-wise constant velocity
/// and draws them. Seeds outside the mesh are skipped with a warning.
pub fn plot_streamlines(
    fig: &mut Figure,
    case: &Case,
    field: &Field,
    seeds: &[Point2],
    scale_x: f64,
    scale_y: f64,
    opts: StreamlineOptions,
) -> Result<StreamlineSet> {
    check_scales(scale_x, scale_y)?;
    let mut lines = Vec::new();
    for &seed in seeds {
        match trace_streamline(case, field, seed, opts)? {
            Some(line) => lines.push(line.into_iter().map(|p| scaled(p, scale_x, scale_y)).collect()),
            None => warn!(
                "streamline seed ({}, {}) lies outside the mesh; skipped",
                seed[0], seed[1]
            ),
        }
    }
    Ok(StreamlineSet(fig.push(Layer::Polylines(PolylineLayer {
        kind: PolylineKind::Streamline,
        lines,
        closed: false,
        color: "#1f3b73".into(),
        width: 1.0,
    }))))
}

/// Adds a vertical colorbar showing a field layer's colormap and range.
pub fn add_colorbar(fig: &mut Figure, field: FieldLayerHandle, label: Option<&str>) -> Result<ColorbarHandle> {
    let colormap = fig.field_colormap(field)?.clone();
    Ok(ColorbarHandle(fig.push(Layer::Colorbar(ColorbarLayer {
        colormap,
        label: label.map(str::to_string),
    }))))
}

/// Draws a scalar profile inside the geometry: each sample is plotted at
/// `x = anchor_x + width_scale * value` (display units) and at the display
/// height of its location on the probe line.
pub fn overlay_profile(
    fig: &mut Figure,
    profile: &Profile,
    anchor_x: f64,
    width_scale: f64,
    scale_x: f64,
    scale_y: f64,
) -> Result<LayerHandle> {
    check_scales(scale_x, scale_y)?;
    if profile.is_empty() {
        return Err(Error::EmptyProfile);
    }
    if profile.values.kind() != FieldKind::Scalar {
        return Err(Error::InvalidArgument(
            "overlay_profile needs a scalar profile; use Profile::component".into(),
        ));
    }
    if !(anchor_x.is_finite() && width_scale.is_finite()) {
        return Err(Error::InvalidArgument(
            "profile anchor and width scale must be finite".into(),
        ));
    }
    let line = profile
        .positions
        .iter()
        .zip(profile.values.as_slice())
        .map(|(&s, &v)| [anchor_x + width_scale * v, profile.point_at(s)[1] / scale_y])
        .collect();
    Ok(fig.push(Layer::Polylines(PolylineLayer {
        kind: PolylineKind::Profile,
        lines: vec![line],
        closed: false,
        color: "#c0392b".into(),
        width: 1.5,
    })))
}
