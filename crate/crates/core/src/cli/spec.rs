//! Declarative JSON plot specifications.
//!
//! Parsing is strict: unknown keys and wrongly typed values are rejected with
//! the JSON pointer of the offending entry. A parsed spec is then checked
//! against the opened dataset before anything is rendered.

use std::path::{Path, PathBuf};

use serde_json::{Map, Value};

use crate::case::Case;
use crate::error::{Error, Result};
use crate::extract::profile_along_line;
use crate::field::{Field, FieldKind};
use crate::plot::{self, ColorMap, Figure, StreamlineOptions, VectorOptions};
use crate::polymesh::Bounds;
use crate::Point2;

#[derive(Debug, Clone, PartialEq)]
pub struct PlotSpec {
    pub dataset: Option<PathBuf>,
    pub output: PathBuf,
    pub scale_x: f64,
    pub scale_y: f64,
    pub width: Option<f64>,
    pub title: Option<String>,
    pub xlabel: Option<String>,
    pub ylabel: Option<String>,
    /// Displayed rectangle in display units: xmin, xmax, ymin, ymax.
    pub view: Option<[f64; 4]>,
    pub layers: Vec<LayerSpec>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LayerSpec {
    Boundaries {
        annotate: bool,
    },
    Field {
        field: String,
        component: Option<usize>,
        colormap: String,
        range: Option<(f64, f64)>,
        colorbar: Option<Option<String>>,
    },
    Vectors {
        field: String,
        sample: Option<(usize, usize)>,
        normalize: bool,
        scale: Option<f64>,
    },
    Streamlines {
        field: String,
        seeds: Vec<Point2>,
        step: Option<f64>,
        max_steps: Option<usize>,
    },
    Profiles {
        field: String,
        component: Option<usize>,
        /// Probe x positions in display units.
        stations: Vec<f64>,
        width_scale: f64,
    },
    Text {
        text: String,
        at: Point2,
    },
}

/// A JSON object whose keys are consumed as they are read, so leftovers can
/// be reported as unknown.
struct Obj<'a> {
    ptr: String,
    map: &'a Map<String, Value>,
    seen: Vec<&'static str>,
}

fn child(ptr: &str, key: &str) -> String {
    format!("{ptr}/{}", key.replace('~', "~0").replace('/', "~1"))
}

impl<'a> Obj<'a> {
    fn new(ptr: String, v: &'a Value) -> Result<Obj<'a>> {
        let map = v
            .as_object()
            .ok_or_else(|| Error::spec(ptr_or_root(&ptr), "expected an object"))?;
        Ok(Obj {
            ptr,
            map,
            seen: Vec::new(),
        })
    }

    fn get(&mut self, key: &'static str) -> Option<(String, &'a Value)> {
        self.seen.push(key);
        self.map.get(key).map(|v| (child(&self.ptr, key), v))
    }

    fn required(&mut self, key: &'static str) -> Result<(String, &'a Value)> {
        self.get(key)
            .ok_or_else(|| Error::spec(child(&self.ptr, key), "required key is missing"))
    }

    fn string(&mut self, key: &'static str) -> Result<Option<String>> {
        self.get(key).map(|(p, v)| as_string(&p, v)).transpose()
    }

    fn number(&mut self, key: &'static str) -> Result<Option<f64>> {
        self.get(key).map(|(p, v)| as_number(&p, v)).transpose()
    }

    fn count(&mut self, key: &'static str) -> Result<Option<usize>> {
        self.get(key).map(|(p, v)| as_count(&p, v)).transpose()
    }

    fn boolean(&mut self, key: &'static str) -> Result<bool> {
        match self.get(key) {
            None => Ok(false),
            Some((p, v)) => v.as_bool().ok_or_else(|| Error::spec(p, "expected true or false")),
        }
    }

    fn finish(self) -> Result<()> {
        let mut extra: Vec<&String> = self.map.keys().filter(|k| !self.seen.contains(&k.as_str())).collect();
        extra.sort();
        match extra.first() {
            Some(k) => Err(Error::spec(child(&self.ptr, k), "unknown key")),
            None => Ok(()),
        }
    }
}

fn ptr_or_root(p: &str) -> String {
    if p.is_empty() {
        "/".into()
    } else {
        p.to_string()
    }
}

fn as_string(p: &str, v: &Value) -> Result<String> {
    v.as_str()
        .map(str::to_string)
        .ok_or_else(|| Error::spec(p, "expected a string"))
}

fn as_number(p: &str, v: &Value) -> Result<f64> {
    v.as_f64()
        .filter(|x| x.is_finite())
        .ok_or_else(|| Error::spec(p, "expected a finite number"))
}

fn as_count(p: &str, v: &Value) -> Result<usize> {
    v.as_u64()
        .and_then(|x| usize::try_from(x).ok())
        .ok_or_else(|| Error::spec(p, "expected a non-negative integer"))
}

fn as_array<'a>(p: &str, v: &'a Value, len: Option<usize>) -> Result<&'a Vec<Value>> {
    let a = v.as_array().ok_or_else(|| Error::spec(p, "expected an array"))?;
    if let Some(n) = len {
        if a.len() != n {
            return Err(Error::spec(p, format!("expected an array of {n} elements")));
        }
    }
    Ok(a)
}

fn numbers<const N: usize>(p: &str, v: &Value) -> Result<[f64; N]> {
    let a = as_array(p, v, Some(N))?;
    let mut out = [0.0; N];
    for (i, x) in a.iter().enumerate() {
        out[i] = as_number(&format!("{p}/{i}"), x)?;
    }
    Ok(out)
}

fn positive(p: &str, x: f64) -> Result<f64> {
    if x > 0.0 {
        Ok(x)
    } else {
        Err(Error::spec(p, "must be positive"))
    }
}

impl PlotSpec {
    /// Parses a spec document without touching the file system.
    pub fn parse(text: &str) -> Result<PlotSpec> {
        let root: Value = serde_json::from_str(text).map_err(|e| Error::spec("/", format!("not valid JSON: {e}")))?;
        let mut o = Obj::new(String::new(), &root)?;
        let dataset = o.string("dataset")?.map(PathBuf::from);
        let output = PathBuf::from(as_string("/output", o.required("output")?.1)?);
        let scale_x = match o.get("scaleX") {
            Some((p, v)) => positive(&p, as_number(&p, v)?)?,
            None => 1.0,
        };
        let scale_y = match o.get("scaleY") {
            Some((p, v)) => positive(&p, as_number(&p, v)?)?,
            None => 1.0,
        };
        let width = match o.get("width") {
            Some((p, v)) => {
                let w = as_number(&p, v)?;
                if w < 200.0 {
                    return Err(Error::spec(p, "must be at least 200"));
                }
                Some(w)
            }
            None => None,
        };
        let title = o.string("title")?;
        let xlabel = o.string("xlabel")?;
        let ylabel = o.string("ylabel")?;
        let view = match o.get("view") {
            Some((p, v)) => {
                let r = numbers::<4>(&p, v)?;
                if !(r[0] < r[1] && r[2] < r[3]) {
                    return Err(Error::spec(p, "expected [xmin, xmax, ymin, ymax] with min < max"));
                }
                Some(r)
            }
            None => None,
        };
        let (lp, lv) = o.required("layers")?;
        let layers = as_array(&lp, lv, None)?
            .iter()
            .enumerate()
            .map(|(i, v)| parse_layer(format!("{lp}/{i}"), v))
            .collect::<Result<Vec<_>>>()?;
        if layers.is_empty() {
            return Err(Error::spec(lp, "at least one layer is required"));
        }
        o.finish()?;
        Ok(PlotSpec {
            dataset,
            output,
            scale_x,
            scale_y,
            width,
            title,
            xlabel,
            ylabel,
            view,
            layers,
        })
    }

    pub fn from_file(path: &Path) -> Result<PlotSpec> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        PlotSpec::parse(&text)
    }

    /// Checks every field reference and component index against `case`.
    pub fn validate(&self, case: &Case) -> Result<()> {
        for (i, layer) in self.layers.iter().enumerate() {
            let base = format!("/layers/{i}");
            match layer {
                LayerSpec::Boundaries { .. } | LayerSpec::Text { .. } => {}
                LayerSpec::Field { field, component, .. } | LayerSpec::Profiles { field, component, .. } => {
                    let f = lookup(case, &base, field)?;
                    check_component(&base, field, &f, *component)?;
                }
                LayerSpec::Vectors { field, .. } | LayerSpec::Streamlines { field, .. } => {
                    let f = lookup(case, &base, field)?;
                    if f.kind() != FieldKind::Vector {
                        return Err(Error::spec(
                            format!("{base}/field"),
                            format!("{field:?} is a {} field; a vector field is required", f.kind().name()),
                        ));
                    }
                }
            }
        }
        Ok(())
    }

    /// Builds the figure described by the spec.
    pub fn build_figure(&self, case: &Case) -> Result<Figure> {
        self.validate(case)?;
        let (sx, sy) = (self.scale_x, self.scale_y);
        let mut fig = Figure::new();
        if let Some(w) = self.width {
            fig.set_width(w)?;
        }
        if let Some(t) = &self.title {
            fig.set_title(t);
        }
        if let Some(l) = &self.xlabel {
            fig.set_xlabel(l);
        }
        if let Some(l) = &self.ylabel {
            fig.set_ylabel(l);
        }
        if let Some(v) = self.view {
            fig.set_view(Some(Bounds {
                xmin: v[0],
                xmax: v[1],
                ymin: v[2],
                ymax: v[3],
            }));
        }
        for layer in &self.layers {
            match layer {
                LayerSpec::Boundaries { annotate } => {
                    plot::plot_boundaries(&mut fig, case, sx, sy)?;
                    if *annotate {
                        plot::annotate_boundaries(&mut fig, case, sx, sy)?;
                    }
                }
                LayerSpec::Field {
                    field,
                    component,
                    colormap,
                    range,
                    colorbar,
                } => {
                    let f = scalar_of(case.get_field(field)?, *component)?;
                    let cmap = ColorMap::by_name(colormap).expect("validated at parse time");
                    let h = plot::plot_field(&mut fig, case, &f, sx, sy, cmap, *range)?;
                    if let Some(label) = colorbar {
                        plot::add_colorbar(&mut fig, h, label.as_deref())?;
                    }
                }
                LayerSpec::Vectors {
                    field,
                    sample,
                    normalize,
                    scale,
                } => {
                    let f = case.get_field(field)?;
                    let opts = VectorOptions {
                        sample: *sample,
                        normalize: *normalize,
                        scale: *scale,
                    };
                    plot::plot_vectors(&mut fig, case, &f, sx, sy, opts)?;
                }
                LayerSpec::Streamlines {
                    field,
                    seeds,
                    step,
                    max_steps,
                } => {
                    let f = case.get_field(field)?;
                    let seeds: Vec<Point2> = seeds.iter().map(|s| [s[0] * sx, s[1] * sy]).collect();
                    let opts = StreamlineOptions {
                        step: *step,
                        max_steps: *max_steps,
                    };
                    plot::plot_streamlines(&mut fig, case, &f, &seeds, sx, sy, opts)?;
                }
                LayerSpec::Profiles {
                    field,
                    component,
                    stations,
                    width_scale,
                } => {
                    let b = case.bounds();
                    for &x in stations {
                        let p1 = [x * sx, b.ymin];
                        let p2 = [x * sx, b.ymax];
                        let prof = profile_along_line(case, p1, p2, field)?;
                        let prof = match component {
                            Some(k) => prof.component(*k)?,
                            None => prof,
                        };
                        plot::overlay_profile(&mut fig, &prof, x, *width_scale, sx, sy)?;
                    }
                }
                LayerSpec::Text { text, at } => {
                    plot::annotate(&mut fig, text, *at);
                }
            }
        }
        Ok(fig)
    }
}

fn lookup(case: &Case, base: &str, name: &str) -> Result<Field> {
    case.get_field(name).map_err(|_| {
        Error::spec(
            format!("{base}/field"),
            format!("unknown field {name:?}; available: {}", case.field_names().join(", ")),
        )
    })
}

fn check_component(base: &str, name: &str, f: &Field, component: Option<usize>) -> Result<()> {
    match component {
        Some(k) if k >= f.components() => Err(Error::spec(
            format!("{base}/component"),
            format!("{name:?} has {} component(s)", f.components()),
        )),
        None if f.kind() != FieldKind::Scalar => Err(Error::spec(
            format!("{base}/component"),
            format!("{name:?} is a {} field; choose a component", f.kind().name()),
        )),
        _ => Ok(()),
    }
}

fn scalar_of(f: Field, component: Option<usize>) -> Result<Field> {
    match component {
        Some(k) => f.component(k),
        None => Ok(f),
    }
}

fn parse_layer(ptr: String, v: &Value) -> Result<LayerSpec> {
    let mut o = Obj::new(ptr.clone(), v)?;
    let (tp, tv) = o.required("type")?;
    let kind = as_string(&tp, tv)?;
    let field = |o: &mut Obj| -> Result<String> {
        let (p, v) = o.required("field")?;
        as_string(&p, v)
    };
    let layer =
        match kind.as_str() {
            "boundaries" => LayerSpec::Boundaries {
                annotate: o.boolean("annotate")?,
            },
            "field" => {
                let field = field(&mut o)?;
                let component = o.count("component")?;
                let colormap = match o.get("colormap") {
                    Some((p, v)) => {
                        let name = as_string(&p, v)?;
                        if ColorMap::by_name(&name).is_none() {
                            return Err(Error::spec(
                                p,
                                format!(
                                    "unknown colormap {name:?}; choose one of {}",
                                    ColorMap::NAMES.join(", ")
                                ),
                            ));
                        }
                        name
                    }
                    None => "viridis".into(),
                };
                let range = match o.get("range") {
                    Some((p, v)) => {
                        let r = numbers::<2>(&p, v)?;
                        Some((r[0], r[1]))
                    }
                    None => None,
                };
                let colorbar = match o.get("colorbar") {
                    None | Some((_, Value::Bool(false))) => None,
                    Some((_, Value::Bool(true))) => Some(None),
                    Some((p, v)) => {
                        let mut c = Obj::new(p, v)?;
                        let label = c.string("label")?;
                        c.finish()?;
                        Some(label)
                    }
                };
                LayerSpec::Field {
                    field,
                    component,
                    colormap,
                    range,
                    colorbar,
                }
            }
            "vectors" => {
                let field = field(&mut o)?;
                let sample = match o.get("sample") {
                    Some((p, v)) => {
                        let a = as_array(&p, v, Some(2))?;
                        let nx = as_count(&format!("{p}/0"), &a[0])?;
                        let ny = as_count(&format!("{p}/1"), &a[1])?;
                        if nx < 2 || ny < 2 {
                            return Err(Error::spec(p, "sample grid needs at least 2 points per direction"));
                        }
                        Some((nx, ny))
                    }
                    None => None,
                };
                let normalize = o.boolean("normalize")?;
                let scale = match o.get("scale") {
                    Some((p, v)) => Some(positive(&p, as_number(&p, v)?)?),
                    None => None,
                };
                LayerSpec::Vectors {
                    field,
                    sample,
                    normalize,
                    scale,
                }
            }
            "streamlines" => {
                let field = field(&mut o)?;
                let (sp, sv) = o.required("seeds")?;
                let seeds = as_array(&sp, sv, None)?
                    .iter()
                    .enumerate()
                    .map(|(i, s)| numbers::<2>(&format!("{sp}/{i}"), s))
                    .collect::<Result<Vec<_>>>()?;
                let step = match o.get("step") {
                    Some((p, v)) => Some(positive(&p, as_number(&p, v)?)?),
                    None => None,
                };
                let max_steps = o.count("max_steps")?;
                LayerSpec::Streamlines {
                    field,
                    seeds,
                    step,
                    max_steps,
                }
            }
            "profiles" => {
                let field = field(&mut o)?;
                let component = o.count("component")?;
                let (sp, sv) = o.required("stations")?;
                let stations = as_array(&sp, sv, None)?
                    .iter()
                    .enumerate()
                    .map(|(i, s)| as_number(&format!("{sp}/{i}"), s))
                    .collect::<Result<Vec<_>>>()?;
                let width_scale = o.number("width_scale")?.unwrap_or(1.0);
                LayerSpec::Profiles {
                    field,
                    component,
                    stations,
                    width_scale,
                }
            }
            "text" => {
                let (p, v) = o.required("text")?;
                let text = as_string(&p, v)?;
                let (p, v) = o.required("at")?;
                LayerSpec::Text {
                    text,
                    at: numbers::<2>(&p, v)?,
                }
            }
            other => return Err(Error::spec(
                tp,
                format!(
                    "unknown layer type {other:?}; expected boundaries, field, vectors, streamlines, profiles or text"
                ),
            )),
        };
    o.finish()?;
    Ok(layer)
}
