mod common;

use common::*;
use flowpost::extract::profile_along_line;
use flowpost::fixtures;
use flowpost::plot::{self, ColorMap, Figure, Layer, StreamlineOptions, VectorOptions};
use flowpost::{Case, Error, Field, RawDataset};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn unitsq4() -> Case {
    Case::from_raw(fixtures::unitsq4()).unwrap()
}

/// The opening tag names of every element, in document order.
fn tags(svg: &str) -> Vec<&str> {
    svg.split('<')
        .skip(1)
        .filter(|s| !s.starts_with('/') && !s.starts_with('?') && !s.starts_with('!'))
        .map(|s| {
            s.split(|c: char| c.is_whitespace() || c == '>' || c == '/')
                .next()
                .unwrap()
        })
        .collect()
}

fn attr_values<'a>(svg: &'a str, attr: &str) -> Vec<&'a str> {
    let key = format!(" {attr}=\"");
    svg.split(key.as_str())
        .skip(1)
        .map(|s| &s[..s.find('"').unwrap()])
        .collect()
}

fn numbers(s: &str) -> Vec<f64> {
    s.split([' ', ',']).filter_map(|t| t.parse().ok()).collect()
}

/// The document without its axes group, whose tick choice depends on the
/// displayed extent.
fn without_axes(svg: &str) -> String {
    let start = svg.find("<g class=\"axes\"").unwrap();
    let end = start + svg[start..].find("\n</g>").unwrap();
    format!("{}{}", &svg[..start], &svg[end..])
}

/// Data-space coordinates of the field and line layers.
fn data_coordinates(svg: &str) -> Vec<f64> {
    let mut out = Vec::new();
    for v in attr_values(svg, "points") {
        out.extend(numbers(v));
    }
    for v in attr_values(svg, "d") {
        out.extend(numbers(v));
    }
    out
}

#[test]
fn boundaries_are_closed_outlines() {
    let mut fig = Figure::new();
    let h = plot::plot_boundaries(&mut fig, &unitsq4(), 1.0, 1.0).unwrap();
    let lines = fig.polylines(h).unwrap();
    assert_eq!(lines.len(), 1);
    assert_eq!(lines[0].len(), 8);

    let mut fig = Figure::new();
    let h = plot::plot_boundaries(&mut fig, &Case::from_raw(fixtures::lmesh()).unwrap(), 1.0, 1.0).unwrap();
    let line = &fig.polylines(h).unwrap()[0];
    assert_eq!(line.len(), 8);
    assert!(line.contains(&[1.0, 1.0]));

    let mut fig = Figure::new();
    let bfs = Case::from_raw(fixtures::bfs()).unwrap();
    let hh = fixtures::BFS_STEP_HEIGHT;
    let h = plot::plot_boundaries(&mut fig, &bfs, hh, hh).unwrap();
    let xs: Vec<f64> = fig.polylines(h).unwrap()[0].iter().map(|p| p[0]).collect();
    let lo = xs.iter().copied().fold(f64::MAX, f64::min);
    let hi = xs.iter().copied().fold(f64::MIN, f64::max);
    assert!((lo + 5.0).abs() < 1e-12 && (hi - 20.0).abs() < 1e-12, "{lo} {hi}");
    assert!(matches!(
        plot::plot_boundaries(&mut fig, &bfs, 0.0, 1.0),
        Err(Error::InvalidArgument(_))
    ));
}

#[test]
fn field_endpoints_and_constant_fields() {
    let case = unitsq4();
    let ids = Field::scalar(vec![0.0, 1.0, 2.0, 3.0]).unwrap();
    let mut fig = Figure::new();
    plot::plot_field(&mut fig, &case, &ids, 1.0, 1.0, ColorMap::viridis(), None).unwrap();
    let svg = plot::render_svg_string(&fig).unwrap();
    assert_eq!(svg.matches("<polygon ").count(), 4);
    let fills: Vec<&str> = attr_values(&svg, "fill")
        .into_iter()
        .filter(|f| f.starts_with('#') && *f != "#ffffff")
        .collect();
    let cmap = ColorMap::viridis();
    let stops = cmap.control_colors();
    assert_eq!(fills[0], plot::ColorMap::viridis().with_range(0.0, 1.0).hex(0.0));
    assert_eq!(fills[3], plot::ColorMap::viridis().with_range(0.0, 1.0).hex(1.0));
    assert_ne!(stops.first(), stops.last());

    let flat = Field::scalar(vec![4.2; 4]).unwrap();
    let mut fig = Figure::new();
    let h = plot::plot_field(&mut fig, &case, &flat, 1.0, 1.0, ColorMap::viridis(), None).unwrap();
    let (lo, hi) = fig.field_colormap(h).unwrap().range();
    assert_eq!((lo, hi), (3.7, 4.7));
    let svg = plot::render_svg_string(&fig).unwrap();
    let mid = ColorMap::viridis().with_range(0.0, 1.0).hex(0.5);
    assert_eq!(svg.matches(&format!("fill=\"{mid}\"")).count(), 4);

    let short = Field::scalar(vec![1.0; 3]).unwrap();
    assert!(matches!(
        plot::plot_field(&mut fig, &case, &short, 1.0, 1.0, ColorMap::viridis(), None),
        Err(Error::SizeMismatch { expected: 4, found: 3 })
    ));
}

#[test]
fn uniform_arrows() {
    let case = unitsq4();
    let u = Field::vector(&[[1.0, 0.0, 0.0]; 4]).unwrap();
    let mut fig = Figure::new();
    let plain = plot::plot_vectors(&mut fig, &case, &u, 1.0, 1.0, VectorOptions::default()).unwrap();
    let norm = plot::plot_vectors(
        &mut fig,
        &case,
        &u,
        1.0,
        1.0,
        VectorOptions {
            normalize: true,
            ..Default::default()
        },
    )
    .unwrap();
    let a = fig.arrows(plain).unwrap().to_vec();
    assert_eq!(a.len(), 4);
    assert!(a.iter().all(|x| x.angle == 0.0 && x.length == a[0].length));
    let anchors: Vec<_> = a.iter().map(|x| x.anchor).collect();
    assert_eq!(anchors, case.mesh().cell_centres());
    assert_eq!(fig.arrows(norm).unwrap(), a.as_slice());
}

#[test]
fn streamline_examples() {
    let case = unitsq4();
    let u = Field::vector(&[[1.0, 0.0, 0.0]; 4]).unwrap();
    let mut fig = Figure::new();
    let set = plot::plot_streamlines(
        &mut fig,
        &case,
        &u,
        &[[0.1, 0.5], [5.0, 5.0]],
        1.0,
        1.0,
        StreamlineOptions::default(),
    )
    .unwrap();
    let lines = fig.streamlines(set).unwrap();
    assert_eq!(lines.len(), 1, "outside seed is skipped");
    assert_eq!(lines[0][0], [0.1, 0.5]);
    assert!(lines[0].iter().all(|p| (p[1] - 0.5).abs() < 1e-9));
    assert!((lines[0].last().unwrap()[0] - 1.0).abs() < 1e-8);

    let zero = Field::vector(&[[0.0; 3]; 4]).unwrap();
    let set = plot::plot_streamlines(&mut fig, &case, &zero, &[[0.3, 0.3]], 1.0, 1.0, Default::default()).unwrap();
    assert_eq!(fig.streamlines(set).unwrap()[0].len(), 1);
}

#[test]
fn colorbar_labels_and_ticks() {
    let case = unitsq4();
    let f = Field::scalar(vec![0.1, 0.2, 0.3, 0.4]).unwrap();
    let mut fig = Figure::new();
    let h = plot::plot_field(&mut fig, &case, &f, 1.0, 1.0, ColorMap::viridis(), Some((0.0, 1.0))).unwrap();
    let c1 = plot::add_colorbar(&mut fig, h, None).unwrap();
    let c2 = plot::add_colorbar(&mut fig, h, None).unwrap();
    assert_ne!(c1, c2);
    fig.set_colorbar_label(c1, "u/U0").unwrap();
    assert_eq!(fig.colorbar_label(c1).unwrap(), Some("u/U0"));
    let svg = plot::render_svg_string(&fig).unwrap();
    assert_eq!(svg.matches("<g class=\"colorbar\"").count(), 2);
    assert!(svg.contains(">u/U0</text>"));
    let cbar = &svg[svg.find("<g class=\"colorbar\"").unwrap()..];
    assert!(cbar.contains(">0</text>") && cbar.contains(">1</text>"));
}

#[test]
fn stale_handles() {
    let case = unitsq4();
    let f = case.get_field("p").unwrap();
    let mut fig = Figure::new();
    let h = plot::plot_field(&mut fig, &case, &f, 1.0, 1.0, ColorMap::gray(), None).unwrap();
    assert!(matches!(fig.remove(h.0), Ok(Layer::Polygons(_))));
    assert!(matches!(plot::add_colorbar(&mut fig, h, None), Err(Error::StaleHandle)));
    let mut other = Figure::new();
    let b = plot::plot_boundaries(&mut other, &case, 1.0, 1.0).unwrap();
    assert!(fig.layer(b).is_err());
    assert!(matches!(plot::render_svg_string(&fig), Err(Error::EmptyFigure)));
}

#[test]
fn profile_overlays() {
    let case = unitsq4();
    let mut raw = fixtures::unitsq4();
    raw.cell_fields.insert("c".into(), Field::scalar(vec![0.3; 4]).unwrap());
    let case_c = Case::from_raw(raw).unwrap();
    let p = profile_along_line(&case_c, [0.5, 0.0], [0.5, 1.0], "c").unwrap();
    let mut fig = Figure::new();
    let h = plot::overlay_profile(&mut fig, &p, 0.5, 2.0, 1.0, 1.0).unwrap();
    assert!(fig.polylines(h).unwrap()[0].iter().all(|q| (q[0] - 1.1).abs() < 1e-15));
    let h = plot::overlay_profile(&mut fig, &p, 0.5, 0.0, 1.0, 1.0).unwrap();
    assert!(fig.polylines(h).unwrap()[0].iter().all(|q| q[0] == 0.5));

    let mut empty = profile_along_line(&case, [0.1, 0.1], [0.9, 0.9], "p").unwrap();
    empty.positions.clear();
    empty.cells.clear();
    empty.values = Field::scalar(vec![]).unwrap();
    assert!(matches!(
        plot::overlay_profile(&mut fig, &empty, 0.0, 1.0, 1.0, 1.0),
        Err(Error::EmptyProfile)
    ));
}

#[test]
fn render_is_deterministic_and_ordered() {
    let case = Case::from_raw(fixtures::bfs()).unwrap();
    let h = fixtures::BFS_STEP_HEIGHT;
    let build = || {
        let mut fig = Figure::new();
        plot::plot_boundaries(&mut fig, &case, h, h).unwrap();
        let u = case.get_field("UMean").unwrap();
        let f = plot::plot_field(
            &mut fig,
            &case,
            &u.component(0).unwrap(),
            h,
            h,
            ColorMap::coolwarm(),
            None,
        )
        .unwrap();
        plot::add_colorbar(&mut fig, f, Some("u/U0")).unwrap();
        plot::plot_streamlines(
            &mut fig,
            &case,
            &u,
            &[[-0.04, 0.02], [0.01, 0.005]],
            h,
            h,
            Default::default(),
        )
        .unwrap();
        plot::render_svg_string(&fig).unwrap()
    };
    let (a, b) = (build(), build());
    assert_eq!(a, b);
    let order: Vec<usize> = ["\"boundaries\"", "\"field\"", "\"colorbar\"", "\"streamlines\""]
        .iter()
        .map(|c| a.find(&format!("<g class={c}")).unwrap())
        .collect();
    assert!(order.windows(2).all(|w| w[0] < w[1]));
    assert!(a.starts_with("<?xml") && a.trim_end().ends_with("</svg>"));
    assert!(a.contains("<!-- data-to-pixel:"));

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("f.svg");
    let mut fig = Figure::new();
    plot::plot_boundaries(&mut fig, &case, h, h).unwrap();
    plot::render_svg(&fig, &path).unwrap();
    assert_eq!(
        std::fs::read_to_string(&path).unwrap(),
        plot::render_svg_string(&fig).unwrap()
    );
}

fn scene(case: &Case, s: f64) -> String {
    let mut fig = Figure::new();
    plot::plot_boundaries(&mut fig, case, s, s).unwrap();
    let f = case.get_field("s").unwrap();
    let h = plot::plot_field(&mut fig, case, &f, s, s, ColorMap::viridis(), None).unwrap();
    plot::add_colorbar(&mut fig, h, Some("s")).unwrap();
    let v = case.get_field("v").unwrap();
    plot::plot_vectors(&mut fig, case, &v, s, s, VectorOptions::default()).unwrap();
    plot::render_svg_string(&fig).unwrap()
}

fn convex(poly: &[P2]) -> bool {
    let n = poly.len();
    (0..n).all(|i| {
        let (a, b, c) = (poly[i], poly[(i + 1) % n], poly[(i + 2) % n]);
        (b[0] - a[0]) * (c[1] - b[1]) - (b[1] - a[1]) * (c[0] - b[0]) > 0.0
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn scale_equivariance(seed in any::<u64>(), s in prop_oneof![Just(fixtures::BFS_STEP_HEIGHT), Just(2.0), 0.01f64..100.0]) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let raw = perturbed_quads(&mut rng, 4, 3, 0.5, 0.3);
        let raw = with_random_fields(&mut rng, raw);
        let case = Case::from_raw(raw).unwrap();
        let (one, scaled) = (without_axes(&scene(&case, 1.0)), without_axes(&scene(&case, s)));
        prop_assert_eq!(tags(&one), tags(&scaled));
        prop_assert_eq!(attr_values(&one, "fill"), attr_values(&scaled, "fill"));
        prop_assert_eq!(attr_values(&one, "class"), attr_values(&scaled, "class"));
        let (a, b) = (data_coordinates(&one), data_coordinates(&scaled));
        prop_assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            // Emitted numbers carry 9 significant digits.
            prop_assert!((x / s - y).abs() <= 1e-8 * (x / s).abs().max(1e-300) + 1e-12, "{} / {} vs {}", x, s, y);
        }
    }

    #[test]
    fn arrow_angles_are_exact(seed in any::<u64>(), sample in proptest::option::of((2usize..15, 2usize..15))) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let raw = perturbed_quads(&mut rng, 5, 4, 0.5, 0.3);
        let raw = with_random_fields(&mut rng, raw);
        let case = Case::from_raw(raw).unwrap();
        let v = case.get_field("v").unwrap();
        let mut fig = Figure::new();
        let opts = VectorOptions { sample, ..Default::default() };
        let set = plot::plot_vectors(&mut fig, &case, &v, 0.5, 0.5, opts).unwrap();
        for a in fig.arrows(set).unwrap() {
            let c = case.mesh().locate_cell([a.anchor[0] * 0.5, a.anchor[1] * 0.5]).unwrap();
            let t = v.tuple(c);
            prop_assert_eq!(a.angle, t[1].atan2(t[0]));
        }
    }

    #[test]
    fn streamlines_are_tangent_inside_cells(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut raw: RawDataset = perturbed_quads(&mut rng, 6, 6, 0.5, 0.2);
        let vel: Vec<[f64; 3]> = (0..raw.cells.len())
            .map(|_| {
                let t: f64 = rng.gen_range(-0.6..0.6);
                [t.cos(), t.sin(), 0.0]
            })
            .collect();
        raw.cell_fields.insert("u".into(), Field::vector(&vel).unwrap());
        let polys: Vec<Vec<P2>> = raw.cells.iter().map(|c| c.iter().map(|&i| [raw.points[i][0], raw.points[i][1]]).collect()).collect();
        let case = Case::from_raw(raw).unwrap();
        let u = case.get_field("u").unwrap();
        let step = 0.01;
        let opts = StreamlineOptions { step: Some(step), max_steps: None };
        let line = plot::trace_streamline(&case, &u, [0.05, 1.5], opts).unwrap().unwrap();
        prop_assert!(line.len() > 10);
        let mut checked = 0;
        for w in line.windows(2) {
            let owner = polys.iter().position(|p| inside(p, w[0]) && inside(p, w[1]));
            let Some(c) = owner else { continue };
            let mut poly = polys[c].clone();
            if shoelace(&poly) < 0.0 {
                poly.reverse();
            }
            let margin = (0..poly.len())
                .map(|k| segment_distance(w[0], poly[k], poly[(k + 1) % poly.len()]))
                .fold(f64::MAX, f64::min);
            // Every RK4 stage lies within one step of the start point.
            if !convex(&poly) || margin <= step {
                continue;
            }
            let d = [w[1][0] - w[0][0], w[1][1] - w[0][1]];
            let v = u.tuple(c);
            let angle = (d[0] * v[1] - d[1] * v[0]).atan2(d[0] * v[0] + d[1] * v[1]).abs();
            prop_assert!(angle < 1e-9, "deviation {} rad in cell {}", angle, c);
            checked += 1;
        }
        prop_assert!(checked > 0);
    }

    #[test]
    fn colormap_positions_are_monotone(a in -1e3f64..1e3, b in -1e3f64..1e3, lo in -1e3f64..0.0, hi in 1.0f64..1e3) {
        prop_assume!(a < b);
        let cmap = ColorMap::viridis().with_range(lo, hi);
        let (pa, pb) = (cmap.position(a), cmap.position(b));
        prop_assert!(pa <= pb);
        if a >= lo && b <= hi {
            prop_assert!(pa < pb);
            prop_assert!(((a - lo) / (hi - lo) - pa).abs() < 1e-15);
        }
    }
}
