use std::fmt::Write as _;
use std::path::Path;

use super::colormap::hex;
use super::{ColorbarLayer, Figure, Layer, PolylineLayer};
use crate::error::{Error, Result};
use crate::numfmt::format_sig;
use crate::polymesh::Bounds;

const LEFT: f64 = 70.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 55.0;
const RIGHT: f64 = 30.0;
const COLORBAR_SLOT: f64 = 90.0;
const COLORBAR_WIDTH: f64 = 18.0;
const MIN_COLORBAR_HEIGHT: f64 = 150.0;

fn n(v: f64) -> String {
    format_sig(v, 9)
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Ticks at multiples of 1, 2 or 5 times a power of ten, at most `max` of
/// them, covering `[lo, hi]`.
pub(crate) fn nice_ticks(lo: f64, hi: f64, max: usize) -> Vec<f64> {
    if !lo.is_finite() || !hi.is_finite() || hi <= lo {
        return vec![lo];
    }
    let span = hi - lo;
    let e0 = (span / max as f64).log10().floor() as i32 - 1;
    for e in e0..e0 + 4 {
        for m in [1.0, 2.0, 5.0] {
            let step = m * 10f64.powi(e);
            let first = (lo / step - 1e-9).ceil() as i64;
            let last = (hi / step + 1e-9).floor() as i64;
            if last - first < max as i64 {
                return (first..=last).map(|i| i as f64 * step).collect();
            }
        }
    }
    vec![lo, hi]
}

/// Pixel placement of the plot area.
struct Frame {
    k: f64,
    tx: f64,
    ty: f64,
    left: f64,
    top: f64,
    plot_w: f64,
    plot_h: f64,
    view: Bounds,
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        self.tx + self.k * x
    }

    fn py(&self, y: f64) -> f64 {
        self.ty - self.k * y
    }
}

fn padded_view(v: Bounds) -> Bounds {
    let (mut w, mut h) = (v.width(), v.height());
    if w <= 0.0 && h <= 0.0 {
        w = 1.0;
        h = 1.0;
    } else if w <= 0.0 {
        w = h;
    } else if h <= 0.0 {
        h = w;
    }
    let (cx, cy) = (0.5 * (v.xmin + v.xmax), 0.5 * (v.ymin + v.ymax));
    if v.width() > 0.0 && v.height() > 0.0 {
        return v;
    }
    Bounds {
        xmin: cx - 0.5 * w,
        xmax: cx + 0.5 * w,
        ymin: cy - 0.5 * h,
        ymax: cy + 0.5 * h,
    }
}

/// Writes the figure as an SVG 1.1 document.
pub fn render_svg(fig: &Figure, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let doc = render_svg_string(fig)?;
    std::fs::write(path, doc).map_err(|e| Error::io(path, e))
}

/// Renders the figure to an SVG 1.1 document in memory.
///
/// Geometry layers are emitted in display units inside a group whose
/// `matrix(k 0 0 -k tx ty)` transform maps them to pixels with equal aspect
/// ratio; the mapping is also recorded in a comment. Output depends only on
/// the figure contents.
pub fn render_svg_string(fig: &Figure) -> Result<String> {
    if fig.is_empty() {
        return Err(Error::EmptyFigure);
    }
    let n_cbar = fig.layers().filter(|l| matches!(l, Layer::Colorbar(_))).count();
    let top = if fig.title.is_some() { TOP + 20.0 } else { TOP };
    let right = RIGHT + COLORBAR_SLOT * n_cbar as f64;
    let width = fig.width.max(LEFT + right + 100.0);
    let view = padded_view(fig.view().unwrap_or(Bounds {
        xmin: 0.0,
        xmax: 1.0,
        ymin: 0.0,
        ymax: 1.0,
    }));
    let avail = width - LEFT - right;
    let mut k = avail / view.width();
    if k * view.height() > 3.0 * avail {
        k = 3.0 * avail / view.height();
    }
    let (plot_w, plot_h) = (k * view.width(), k * view.height());
    let height = top + plot_h.max(if n_cbar > 0 { MIN_COLORBAR_HEIGHT } else { 0.0 }) + BOTTOM;
    let f = Frame {
        k,
        tx: LEFT - k * view.xmin,
        ty: top + k * view.ymax,
        left: LEFT,
        top,
        plot_w,
        plot_h,
        view,
    };

    let mut s = String::new();
    s.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\" standalone=\"no\"?>\n");
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\">",
        n(width),
        n(height),
        n(width),
        n(height)
    );
    let _ = writeln!(
        s,
        "<!-- data-to-pixel: px = {} + {} * x, py = {} - {} * y (x, y in display units) -->",
        n(f.tx),
        n(f.k),
        n(f.ty),
        n(f.k)
    );
    s.push_str("<defs>\n");
    let _ = writeln!(
        s,
        "<clipPath id=\"plot-area\"><rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\"/></clipPath>",
        n(f.left),
        n(f.top),
        n(f.plot_w),
        n(f.plot_h)
    );
    let mut cbar = 0;
    for l in fig.layers() {
        if let Layer::Colorbar(c) = l {
            let _ = writeln!(
                s,
                "<linearGradient id=\"colorbar{cbar}\" x1=\"0\" y1=\"1\" x2=\"0\" y2=\"0\">"
            );
            let m = c.colormap.control_colors().len() - 1;
            for (i, col) in c.colormap.control_colors().iter().enumerate() {
                let _ = writeln!(
                    s,
                    "<stop offset=\"{}\" stop-color=\"{}\"/>",
                    n(i as f64 / m as f64),
                    hex(*col)
                );
            }
            s.push_str("</linearGradient>\n");
            cbar += 1;
        }
    }
    s.push_str("</defs>\n");
    let _ = writeln!(
        s,
        "<rect x=\"0\" y=\"0\" width=\"{}\" height=\"{}\" fill=\"#ffffff\"/>",
        n(width),
        n(height)
    );
    axes(&mut s, fig, &f);

    let transform = format!("matrix({} 0 0 {} {} {})", n(f.k), n(-f.k), n(f.tx), n(f.ty));
    let mut cbar = 0;
    for layer in fig.layers() {
        match layer {
            Layer::Polygons(p) => {
                let _ = writeln!(
                    s,
                    "<g class=\"field\" clip-path=\"url(#plot-area)\"><g transform=\"{transform}\" stroke-width=\"{}\" stroke-linejoin=\"round\">",
                    n(0.5 / f.k)
                );
                for (poly, v) in p.polygons.iter().zip(&p.values) {
                    let color = p.colormap.hex(*v);
                    let pts: Vec<String> = poly.iter().map(|q| format!("{},{}", n(q[0]), n(q[1]))).collect();
                    let _ = writeln!(
                        s,
                        "<polygon points=\"{}\" fill=\"{color}\" stroke=\"{color}\"/>",
                        pts.join(" ")
                    );
                }
                s.push_str("</g></g>\n");
            }
            Layer::Polylines(l) => polylines(&mut s, l, &transform, &f),
            Layer::Arrows(a) => {
                let _ = writeln!(
                    s,
                    "<g class=\"vectors\" clip-path=\"url(#plot-area)\"><g transform=\"{transform}\" fill=\"none\" stroke=\"{}\" stroke-width=\"{}\">",
                    esc(&a.color),
                    n(1.0 / f.k)
                );
                for arrow in &a.arrows {
                    let tip = arrow.tip();
                    let head = 0.3 * arrow.length;
                    let wing = |da: f64| {
                        let t = arrow.angle + std::f64::consts::PI + da;
                        [tip[0] + head * t.cos(), tip[1] + head * t.sin()]
                    };
                    let (w1, w2) = (wing(0.4), wing(-0.4));
                    let _ = writeln!(
                        s,
                        "<path d=\"M {} {} L {} {} M {} {} L {} {} L {} {}\"/>",
                        n(arrow.anchor[0]),
                        n(arrow.anchor[1]),
                        n(tip[0]),
                        n(tip[1]),
                        n(w1[0]),
                        n(w1[1]),
                        n(tip[0]),
                        n(tip[1]),
                        n(w2[0]),
                        n(w2[1])
                    );
                }
                s.push_str("</g></g>\n");
            }
            Layer::Text(t) => {
                let _ = writeln!(
                    s,
                    "<g class=\"annotations\" font-family=\"sans-serif\" font-size=\"{}\" text-anchor=\"middle\">",
                    n(t.size)
                );
                for item in &t.items {
                    let _ = writeln!(
                        s,
                        "<text x=\"{}\" y=\"{}\">{}</text>",
                        n(f.px(item.at[0])),
                        n(f.py(item.at[1]) - 4.0),
                        esc(&item.text)
                    );
                }
                s.push_str("</g>\n");
            }
            Layer::Colorbar(c) => {
                colorbar(&mut s, c, cbar, &f);
                cbar += 1;
            }
        }
    }
    let _ = writeln!(
        s,
        "<rect class=\"frame\" x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#000000\" stroke-width=\"1\"/>",
        n(f.left),
        n(f.top),
        n(f.plot_w),
        n(f.plot_h)
    );
    s.push_str("</svg>\n");
    Ok(s)
}

fn polylines(s: &mut String, l: &PolylineLayer, transform: &str, f: &Frame) {
    let _ = writeln!(
        s,
        "<g class=\"{}\" clip-path=\"url(#plot-area)\"><g transform=\"{transform}\" fill=\"none\" stroke=\"{}\" stroke-width=\"{}\" stroke-linejoin=\"round\">",
        l.kind.class(),
        esc(&l.color),
        n(l.width / f.k)
    );
    for line in &l.lines {
        let mut d = String::new();
        for (i, p) in line.iter().enumerate() {
            let _ = write!(d, "{}{} {}", if i == 0 { "M " } else { " L " }, n(p[0]), n(p[1]));
        }
        if l.closed {
            d.push_str(" Z");
        }
        let _ = writeln!(s, "<path d=\"{d}\"/>");
    }
    s.push_str("</g></g>\n");
}

fn axes(s: &mut String, fig: &Figure, f: &Frame) {
    let bottom = f.top + f.plot_h;
    s.push_str(
        "<g class=\"axes\" font-family=\"sans-serif\" font-size=\"11\" stroke=\"#000000\" stroke-width=\"1\">\n",
    );
    for x in nice_ticks(f.view.xmin, f.view.xmax, 10) {
        let px = f.px(x);
        let _ = writeln!(
            s,
            "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\"/><text x=\"{}\" y=\"{}\" stroke=\"none\" text-anchor=\"middle\">{}</text>",
            n(px),
            n(bottom),
            n(px),
            n(bottom + 5.0),
            n(px),
            n(bottom + 17.0),
            format_sig(x, 6)
        );
    }
    for y in nice_ticks(f.view.ymin, f.view.ymax, 10) {
        let py = f.py(y);
        let _ = writeln!(
            s,
            "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\"/><text x=\"{}\" y=\"{}\" stroke=\"none\" text-anchor=\"end\">{}</text>",
            n(f.left - 5.0),
            n(py),
            n(f.left),
            n(py),
            n(f.left - 7.0),
            n(py + 4.0),
            format_sig(y, 6)
        );
    }
    if let Some(label) = &fig.xlabel {
        let _ = writeln!(
            s,
            "<text class=\"xlabel\" x=\"{}\" y=\"{}\" stroke=\"none\" font-size=\"13\" text-anchor=\"middle\">{}</text>",
            n(f.left + 0.5 * f.plot_w),
            n(bottom + 40.0),
            esc(label)
        );
    }
    if let Some(label) = &fig.ylabel {
        let (x, y) = (f.left - 50.0, f.top + 0.5 * f.plot_h);
        let _ = writeln!(
            s,
            "<text class=\"ylabel\" x=\"{}\" y=\"{}\" transform=\"rotate(-90 {} {})\" stroke=\"none\" font-size=\"13\" text-anchor=\"middle\">{}</text>",
            n(x),
            n(y),
            n(x),
            n(y),
            esc(label)
        );
    }
    if let Some(title) = &fig.title {
        let _ = writeln!(
            s,
            "<text class=\"title\" x=\"{}\" y=\"{}\" stroke=\"none\" font-size=\"14\" text-anchor=\"middle\">{}</text>",
            n(f.left + 0.5 * f.plot_w),
            n(f.top - 12.0),
            esc(title)
        );
    }
    s.push_str("</g>\n");
}

/// Tick values of a colorbar: both range ends plus interior round values
/// that do not crowd them.
pub(crate) fn colorbar_ticks(lo: f64, hi: f64) -> Vec<f64> {
    let gap = 0.08 * (hi - lo);
    let mut ticks = vec![lo];
    ticks.extend(
        nice_ticks(lo, hi, 6)
            .into_iter()
            .filter(|&t| t - lo > gap && hi - t > gap),
    );
    ticks.push(hi);
    ticks
}

fn colorbar(s: &mut String, c: &ColorbarLayer, index: usize, f: &Frame) {
    let x = f.left + f.plot_w + 20.0 + COLORBAR_SLOT * index as f64;
    let h = f.plot_h.max(MIN_COLORBAR_HEIGHT);
    let (lo, hi) = c.colormap.range();
    let _ = writeln!(
        s,
        "<g class=\"colorbar\" font-family=\"sans-serif\" font-size=\"11\">\n<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"url(#colorbar{index})\" stroke=\"#000000\" stroke-width=\"1\"/>",
        n(x),
        n(f.top),
        n(COLORBAR_WIDTH),
        n(h)
    );
    for t in colorbar_ticks(lo, hi) {
        let y = f.top + h * (1.0 - c.colormap.position(t));
        let _ = writeln!(
            s,
            "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#000000\" stroke-width=\"1\"/><text x=\"{}\" y=\"{}\">{}</text>",
            n(x + COLORBAR_WIDTH),
            n(y),
            n(x + COLORBAR_WIDTH + 4.0),
            n(y),
            n(x + COLORBAR_WIDTH + 6.0),
            n(y + 4.0),
            format_sig(t, 4)
        );
    }
    if let Some(label) = &c.label {
        let (lx, ly) = (x + COLORBAR_WIDTH + 58.0, f.top + 0.5 * h);
        let _ = writeln!(
            s,
            "<text class=\"colorbar-label\" x=\"{}\" y=\"{}\" transform=\"rotate(-90 {} {})\" font-size=\"13\" text-anchor=\"middle\">{}</text>",
            n(lx),
            n(ly),
            n(lx),
            n(ly),
            esc(label)
        );
    }
    s.push_str("</g>\n");
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::case::Case;
    use crate::fixtures;
    use crate::plot::{add_colorbar, plot_boundaries, plot_field, ColorMap};

    #[test]
    fn tick_policy() {
        assert_eq!(
            nice_ticks(0.0, 1.0, 10),
            vec![0.0, 0.2, 0.4, 0.6000000000000001, 0.8, 1.0]
        );
        assert!(nice_ticks(-5.0, 20.0, 10).len() <= 10);
        assert_eq!(nice_ticks(-5.0, 20.0, 10), vec![-5.0, 0.0, 5.0, 10.0, 15.0, 20.0]);
        let t = colorbar_ticks(0.0, 1.0);
        assert_eq!((t[0], *t.last().unwrap()), (0.0, 1.0));
    }

    #[test]
    fn unitsq4_field_document() {
        let case = Case::from_raw(fixtures::unitsq4()).unwrap();
        let mut fig = Figure::new();
        plot_boundaries(&mut fig, &case, 1.0, 1.0).unwrap();
        let p = case.get_field("p").unwrap();
        let h = plot_field(&mut fig, &case, &p, 1.0, 1.0, ColorMap::viridis(), Some((0.0, 1.0))).unwrap();
        let c = add_colorbar(&mut fig, h, None).unwrap();
        fig.set_colorbar_label(c, "u/U0").unwrap();
        let doc = render_svg_string(&fig).unwrap();
        assert_eq!(doc.matches("<polygon ").count(), 4);
        assert!(doc.contains(">u/U0</text>"));
        assert!(doc.contains(">0</text>") && doc.contains(">1</text>"));
        let b = doc.find("class=\"boundaries\"").unwrap();
        let fl = doc.find("class=\"field\"").unwrap();
        let cb = doc.find("class=\"colorbar\"").unwrap();
        assert!(b < fl && fl < cb);
        assert_eq!(doc, render_svg_string(&fig).unwrap());
    }

    #[test]
    fn empty_figure_is_an_error() {
        assert!(matches!(render_svg_string(&Figure::new()), Err(Error::EmptyFigure)));
    }
}
