//! Release acceptance checks. Each criterion prints one PASS/FAIL line with
//! its wall time; the process exits non-zero if any criterion fails.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use common::*;
use flowpost::extract::{dist, normals, profile_along_line, sample_by_plane, tangents};
use flowpost::fixtures::{self, VtuEncoding};
use flowpost::plot::{self, trace_streamline, StreamlineOptions};
use flowpost::vtk_io::{read_legacy, read_xml_vtu, write_legacy_ascii_to};
use flowpost::{Case, Field, FieldKind, RawDataset};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, Duration, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if let false = $cond {
            return Err(format!($($msg)+));
        }
    };
}

const PARSER_TOLERANCE: f64 = 1e-6;
const ROUNDTRIP_TOLERANCE: f64 = 1e-9;
const GEOMETRY_TOLERANCE: f64 = 1e-9;
const UNIT_TOLERANCE: f64 = 1e-12;
const PROFILE_TOLERANCE: f64 = 1e-9;
const STRAIGHTNESS_TOLERANCE: f64 = 1e-9;
const WALL_TOLERANCE: f64 = 1e-8;
const DRIFT_LIMIT: f64 = 0.02;
const FUZZ_EXECUTIONS: usize = 100_000;

fn repo_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("1 parser conformance", Duration::from_secs(1), parser_conformance),
        ("2 geometry oracles", Duration::from_secs(30), geometry_oracles),
        ("3 interpolation", Duration::from_secs(30), interpolation),
        ("4 extraction", Duration::from_secs(30), extraction),
        ("5 streamlines", Duration::from_secs(5), streamlines),
        ("6 step-flow pipeline", Duration::from_secs(60), step_flow_pipeline),
        ("7 figure goldens", Duration::from_secs(60), figure_goldens),
        ("8 fuzz totality", Duration::from_secs(300), fuzz_totality),
    ];
    let mut failed = 0;
    for (name, limit, check) in criteria {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check))
            .unwrap_or_else(|_| Err("panicked".to_string()))
            .and_then(|detail| {
                let t = start.elapsed();
                if t > limit {
                    Err(format!("{detail}; took {t:.2?}, limit {limit:.0?}"))
                } else {
                    Ok(detail)
                }
            });
        let t = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {name} ({t:.3} s): {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {name} ({t:.3} s): {detail}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
    println!("all acceptance criteria passed");
}

fn encodings(ds: &RawDataset) -> Vec<(&'static str, RawDataset)> {
    let legacy_ascii = write_legacy_ascii_to(ds);
    vec![
        ("legacy ascii", read_legacy(legacy_ascii.as_bytes()).unwrap()),
        (
            "legacy binary",
            read_legacy(&fixtures::encode_legacy_binary(ds)).unwrap(),
        ),
        (
            "vtu ascii",
            read_xml_vtu(&fixtures::encode_vtu(ds, VtuEncoding::Ascii)).unwrap(),
        ),
        (
            "vtu binary",
            read_xml_vtu(&fixtures::encode_vtu(ds, VtuEncoding::Binary)).unwrap(),
        ),
        (
            "vtu appended raw",
            read_xml_vtu(&fixtures::encode_vtu(ds, VtuEncoding::AppendedRaw)).unwrap(),
        ),
        (
            "vtu appended base64",
            read_xml_vtu(&fixtures::encode_vtu(ds, VtuEncoding::AppendedBase64)).unwrap(),
        ),
    ]
}

fn parser_conformance() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut sets = vec![
        ("unitsq4", fixtures::unitsq4()),
        ("lmesh", fixtures::lmesh()),
        ("bfs", fixtures::bfs()),
    ];
    for _ in 0..5 {
        let ds = perturbed_quads(&mut rng, 6, 4, 0.37, 0.3);
        sets.push(("random", with_random_fields(&mut rng, ds)));
    }
    let mut compared = 0;
    for (name, ds) in &sets {
        let decoded = encodings(ds);
        let reference = &decoded[0].1;
        for (enc, other) in &decoded[1..] {
            datasets_close(reference, other, PARSER_TOLERANCE).map_err(|e| format!("{name}, {enc}: {e}"))?;
            compared += 1;
        }
        let again = read_legacy(write_legacy_ascii_to(reference).as_bytes()).map_err(|e| e.to_string())?;
        datasets_close(ds, &again, ROUNDTRIP_TOLERANCE).map_err(|e| format!("{name} round trip: {e}"))?;
    }
    Ok(format!("{} datasets, {compared} encoding comparisons", sets.len()))
}

fn geometry_oracles() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut edges_checked = 0;
    for m in 0..100 {
        let nx = rng.gen_range(1..=20);
        let ny = rng.gen_range(1..=(400 / nx).min(20));
        let d = rng.gen_range(0.01..10.0);
        let raw = perturbed_quads(&mut rng, nx, ny, d, 0.3);
        let pts: Vec<P2> = raw.points.iter().map(|p| [p[0], p[1]]).collect();
        let polys: Vec<Vec<P2>> = raw.cells.iter().map(|c| c.iter().map(|&i| pts[i]).collect()).collect();
        let expected_edges = brute_boundary_edges(&raw.cells);
        let case = Case::from_raw(raw.clone()).map_err(|e| format!("mesh {m}: {e}"))?;

        let mut seen = Vec::new();
        for (li, name) in case.boundary_names().iter().enumerate() {
            let lp = case.boundary(name).map_err(|e| e.to_string())?;
            let (t, n, dd) = (
                tangents(&case, name).unwrap(),
                normals(&case, name).unwrap(),
                dist(&case, name).unwrap(),
            );
            ensure!(
                t.len() == lp.edges.len() && n.len() == t.len() && dd.len() == t.len(),
                "mesh {m} loop {li}: length mismatch"
            );
            for (k, &(a, b)) in lp.edges.iter().enumerate() {
                let next = lp.edges[(k + 1) % lp.edges.len()];
                ensure!(b == next.0, "mesh {m} loop {li}: edge {k} does not chain");
                seen.push((a.min(b), a.max(b)));
                let owners: Vec<usize> = (0..raw.cells.len())
                    .filter(|&c| {
                        let cell = &raw.cells[c];
                        (0..cell.len()).any(|i| {
                            let (u, v) = (cell[i], cell[(i + 1) % cell.len()]);
                            (u, v) == (a, b) || (u, v) == (b, a)
                        })
                    })
                    .collect();
                ensure!(
                    owners == [lp.adjacent_cells[k]],
                    "mesh {m}: edge ({a},{b}) owners {owners:?} vs {}",
                    lp.adjacent_cells[k]
                );
                let c = fan_centroid(&polys[owners[0]]);
                let (pa, pb) = (pts[a], pts[b]);
                let e = [pb[0] - pa[0], pb[1] - pa[1]];
                let len = e[0].hypot(e[1]);
                let side = e[0] * (c[1] - pa[1]) - e[1] * (c[0] - pa[0]);
                let sign = if side > 0.0 { 1.0 } else { -1.0 };
                let t_ref = [sign * e[0] / len, sign * e[1] / len];
                let n_ref = [t_ref[1], -t_ref[0]];
                let d_ref = segment_distance(c, pa, pb);
                ensure!(
                    (t[k][0] - t_ref[0]).abs() <= GEOMETRY_TOLERANCE
                        && (t[k][1] - t_ref[1]).abs() <= GEOMETRY_TOLERANCE,
                    "mesh {m} edge {k}: tangent {:?} vs {t_ref:?}",
                    t[k]
                );
                ensure!(
                    (n[k][0] - n_ref[0]).abs() <= GEOMETRY_TOLERANCE
                        && (n[k][1] - n_ref[1]).abs() <= GEOMETRY_TOLERANCE,
                    "mesh {m} edge {k}: normal {:?} vs {n_ref:?}",
                    n[k]
                );
                ensure!(
                    rel_close(dd[k], d_ref, GEOMETRY_TOLERANCE) && dd[k] > 0.0,
                    "mesh {m} edge {k}: dist {} vs {d_ref}",
                    dd[k]
                );
                let unit_t = (t[k][0].hypot(t[k][1]) - 1.0).abs();
                let unit_n = (n[k][0].hypot(n[k][1]) - 1.0).abs();
                let perp = (t[k][0] * n[k][0] + t[k][1] * n[k][1]).abs();
                ensure!(
                    unit_t <= UNIT_TOLERANCE && unit_n <= UNIT_TOLERANCE && perp <= UNIT_TOLERANCE,
                    "mesh {m} edge {k}: unit/perpendicular check failed"
                );
                let mid = [0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])];
                let out = n[k][0] * (mid[0] - c[0]) + n[k][1] * (mid[1] - c[1]);
                ensure!(out > 0.0, "mesh {m} edge {k}: normal points inward");
                edges_checked += 1;
            }
        }
        seen.sort();
        ensure!(seen == expected_edges, "mesh {m}: boundary edge sets differ");
    }
    Ok(format!("100 meshes, {edges_checked} boundary edges"))
}

fn interpolation() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut meshes = vec![
        fixtures::unitsq4(),
        fixtures::lmesh(),
        fixtures::ring(),
        fixtures::disk(1.0, 4, 12),
    ];
    for _ in 0..20 {
        meshes.push(perturbed_quads(&mut rng, 5, 7, 0.3, 0.3));
    }
    let mut fields = 0;
    for base in meshes {
        for kind in [FieldKind::Scalar, FieldKind::Vector, FieldKind::Tensor] {
            let mut ds = RawDataset::new(base.points.clone(), base.cells.clone());
            let constant: Vec<f64> = (0..kind.components()).map(|_| rng.gen_range(-1e6..1e6)).collect();
            let data = constant
                .iter()
                .copied()
                .cycle()
                .take(ds.points.len() * constant.len())
                .collect();
            ds.point_fields.insert("c".into(), Field::new(kind, data).unwrap());
            let case = Case::from_raw(ds).map_err(|e| e.to_string())?;
            let cell = case.get_field("c").unwrap();
            ensure!(cell.len() == case.n_cells(), "wrong cell count");
            ensure!(
                cell.tuples().all(|t| t == constant.as_slice()),
                "constant {kind:?} field not reproduced exactly"
            );
            fields += 1;
        }
    }
    let mut ds = fixtures::unitsq4();
    let x: Vec<f64> = ds.points.iter().map(|p| p[0]).collect();
    ds.point_fields.insert("x".into(), Field::scalar(x).unwrap());
    let case = Case::from_raw(ds).map_err(|e| e.to_string())?;
    let got = case.get_field("x").unwrap();
    ensure!(
        got.as_slice() == [0.25, 0.75, 0.25, 0.75],
        "affine field gave {:?}",
        got.as_slice()
    );
    Ok(format!(
        "{fields} constant fields exact; f=x gives [0.25, 0.75, 0.25, 0.75]"
    ))
}

fn extraction() -> Outcome {
    let case = Case::from_raw(fixtures::unitsq4()).map_err(|e| e.to_string())?;
    let p = profile_along_line(&case, [0.25, -0.1], [0.25, 1.1], "p").map_err(|e| e.to_string())?;
    ensure!(p.positions.len() == 2, "expected 2 samples, got {}", p.positions.len());
    ensure!(
        (p.positions[0] - 0.35).abs() <= PROFILE_TOLERANCE && (p.positions[1] - 0.85).abs() <= PROFILE_TOLERANCE,
        "positions {:?}",
        p.positions
    );
    ensure!(p.values.as_slice() == [0.0, 2.0], "values {:?}", p.values.as_slice());

    let raw = fixtures::lmesh();
    let polys: Vec<Vec<P2>> = raw
        .cells
        .iter()
        .map(|c| c.iter().map(|&i| [raw.points[i][0], raw.points[i][1]]).collect())
        .collect();
    let values = raw.cell_fields["p"].clone();
    let case = Case::from_raw(raw).map_err(|e| e.to_string())?;
    let s = sample_by_plane(&case, 9, 9, "p").map_err(|e| e.to_string())?;
    let (mut notch, mut interior) = (0, 0);
    for j in 0..9 {
        for i in 0..9 {
            let q = [s.grid_x[i], s.grid_y[j]];
            let strictly = polys.iter().position(|poly| {
                inside(poly, q)
                    && poly
                        .iter()
                        .enumerate()
                        .all(|(k, &a)| segment_distance(q, a, poly[(k + 1) % poly.len()]) > 1e-9)
            });
            let outside = q[0] < 1.0 && q[1] > 1.0;
            if outside {
                ensure!(!s.is_inside(i, j), "notch point {q:?} not masked");
                notch += 1;
            } else if let Some(c) = strictly {
                ensure!(s.is_inside(i, j), "interior point {q:?} masked");
                ensure!(
                    s.value(i, j) == values.tuple(c),
                    "value at {q:?}: {:?} vs {:?}",
                    s.value(i, j),
                    values.tuple(c)
                );
                interior += 1;
            }
        }
    }
    ensure!(
        !s.is_inside(2, 6) && [s.grid_x[2], s.grid_y[6]] == [0.5, 1.5],
        "notch centre (0.5, 1.5) not masked"
    );
    Ok(format!(
        "profile positions {:?}; {notch} notch points masked, {interior} interior values exact",
        p.positions
    ))
}

fn streamlines() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let raw = perturbed_quads(&mut rng, 12, 9, 0.1, 0.25);
    let case = Case::from_raw(raw).map_err(|e| e.to_string())?;
    let dir = [0.8f64, 0.6];
    let u = Field::vector(&vec![[2.0 * dir[0], 2.0 * dir[1], 0.0]; case.n_cells()]).unwrap();
    let seed = [0.15, 0.2];
    let line = trace_streamline(&case, &u, seed, StreamlineOptions::default())
        .map_err(|e| e.to_string())?
        .ok_or("seed reported outside")?;
    let off_line = line
        .iter()
        .map(|p| ((p[0] - seed[0]) * dir[1] - (p[1] - seed[1]) * dir[0]).abs())
        .fold(0.0, f64::max);
    ensure!(
        off_line <= STRAIGHTNESS_TOLERANCE,
        "deviation {off_line:e} from the straight line"
    );
    let end = *line.last().unwrap();
    let wall = (1.2 - end[0]).min(0.9 - end[1]);
    ensure!(
        wall.abs() <= WALL_TOLERANCE,
        "ended {wall:e} from the boundary at {end:?}"
    );

    let case = Case::from_raw(fixtures::disk(1.0, 40, 160)).map_err(|e| e.to_string())?;
    let u = case.get_field("U").unwrap();
    let r0: f64 = 0.5;
    let step = 0.01;
    let steps = (2.0 * std::f64::consts::PI * r0 / step).ceil() as usize;
    let opts = StreamlineOptions {
        step: Some(step),
        max_steps: Some(steps),
    };
    let circle = trace_streamline(&case, &u, [r0, 0.0], opts)
        .map_err(|e| e.to_string())?
        .ok_or("disk seed reported outside")?;
    ensure!(
        circle.len() == steps + 1,
        "revolution stopped after {} steps",
        circle.len() - 1
    );
    let drift = circle
        .iter()
        .map(|p| (p[0].hypot(p[1]) - r0).abs() / r0)
        .fold(0.0, f64::max);
    ensure!(drift < DRIFT_LIMIT, "radius drift {:.3}%", drift * 100.0);
    Ok(format!(
        "straight within {off_line:.1e}, ends {:.1e} from wall; disk drift {:.3}% over {steps} steps",
        wall.abs(),
        drift * 100.0
    ))
}

/// Top-level layer groups of a rendered figure, as (class, body) pairs.
fn groups(svg: &str) -> Vec<(String, String)> {
    let mut out = Vec::new();
    let mut rest = svg;
    while let Some(i) = rest.find("\n<g class=\"") {
        let after = &rest[i + 11..];
        let class_end = after.find('"').unwrap();
        let class = after[..class_end].to_string();
        let end = after.find("\n</g>").unwrap_or(after.len());
        out.push((class, after[..end].to_string()));
        rest = &after[end..];
    }
    out
}

fn class_sequence(svg: &str) -> Vec<String> {
    groups(svg).into_iter().map(|(c, _)| c).collect()
}

fn listing_figure(dataset: &Path) -> flowpost::Result<String> {
    let case = Case::open(dataset)?;
    let h = fixtures::BFS_STEP_HEIGHT;
    let u = case.get_field("UMean")?.component(0)?;
    let mut fig = plot::Figure::new();
    let f = plot::plot_field(&mut fig, &case, &u, h, h, plot::ColorMap::viridis(), None)?;
    let cbar = plot::add_colorbar(&mut fig, f, None)?;
    fig.set_colorbar_label(cbar, "u/U0")?;
    fig.set_xlabel("x/h");
    fig.set_ylabel("y/h");
    plot::render_svg_string(&fig)
}

fn step_flow_pipeline() -> Outcome {
    let dataset = repo_root().join("data/bfs.vtk");
    let case = Case::open(&dataset).map_err(|e| e.to_string())?;
    let first = listing_figure(&dataset).map_err(|e| e.to_string())?;
    let second = listing_figure(&dataset).map_err(|e| e.to_string())?;
    ensure!(first == second, "two renders differ");

    let polygons = first.matches("<polygon ").count();
    ensure!(
        polygons == case.n_cells(),
        "{polygons} polygons for {} cells",
        case.n_cells()
    );
    ensure!(
        first.contains(">x/h</text>") && first.contains(">y/h</text>"),
        "axis labels missing"
    );
    let gs = groups(&first);
    let classes: Vec<&str> = gs.iter().map(|(c, _)| c.as_str()).collect();
    ensure!(classes == ["axes", "field", "colorbar"], "layer order {classes:?}");
    ensure!(gs[2].1.contains(">u/U0</text>"), "colorbar label missing");

    let h = fixtures::BFS_STEP_HEIGHT;
    let b = case.bounds();
    let xs: Vec<f64> = gs[1]
        .1
        .split("points=\"")
        .skip(1)
        .flat_map(|s| {
            let coords = &s[..s.find('"').unwrap()];
            coords
                .split(' ')
                .filter_map(|xy| xy.split(',').next()?.parse::<f64>().ok())
                .collect::<Vec<_>>()
        })
        .collect();
    let (lo, hi) = xs.iter().fold((f64::MAX, f64::MIN), |(l, u), &x| (l.min(x), u.max(x)));
    ensure!(
        (lo - b.xmin / h).abs() < 1e-6 && (hi - b.xmax / h).abs() < 1e-6,
        "polygon x range [{lo}, {hi}] is not in x/h units"
    );
    for tick in ["-5", "0", "5", "10", "15", "20"] {
        ensure!(gs[0].1.contains(&format!(">{tick}</text>")), "x/h tick {tick} missing");
    }

    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let out = dir.path().join("listing.svg");
    flowpost::cli::cmd_plot(&repo_root().join("specs/fig2_field.json"), Some(&out)).map_err(|e| e.to_string())?;
    let via_spec = std::fs::read_to_string(&out).map_err(|e| e.to_string())?;
    ensure!(via_spec == first, "spec render differs from the library pipeline");
    Ok(format!(
        "{polygons} polygons, x/h range [{lo}, {hi}], {} bytes, deterministic",
        first.len()
    ))
}

fn figure_goldens() -> Outcome {
    let golden_dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden");
    let update = std::env::var_os("UPDATE_GOLDEN").is_some();
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let case = Case::open(repo_root().join("data/bfs.vtk")).map_err(|e| e.to_string())?;
    let mut report = Vec::new();
    for name in ["fig1_boundaries", "fig2_field", "fig3_vectors", "fig4_profiles"] {
        let spec = repo_root().join(format!("specs/{name}.json"));
        let out = tmp.path().join(format!("{name}.svg"));
        flowpost::cli::cmd_plot(&spec, Some(&out)).map_err(|e| format!("{name}: {e}"))?;
        let svg = std::fs::read_to_string(&out).map_err(|e| e.to_string())?;
        let golden = golden_dir.join(format!("{name}.svg"));
        if update {
            std::fs::create_dir_all(&golden_dir).map_err(|e| e.to_string())?;
            std::fs::write(&golden, &svg).map_err(|e| e.to_string())?;
        }
        let expected = std::fs::read_to_string(&golden).map_err(|e| format!("{}: {e}", golden.display()))?;
        ensure!(svg == expected, "{name}: output differs from {}", golden.display());
        check_structure(name, &svg, &case)?;
        report.push(format!("{name} {}", svg.len()));
    }
    Ok(report.join(", "))
}

fn check_structure(name: &str, svg: &str, case: &Case) -> Result<(), String> {
    let gs = groups(svg);
    let classes = class_sequence(svg);
    let paths = |body: &str| body.matches("<path ").count();
    match name {
        "fig1_boundaries" => {
            ensure!(
                classes
                    == [
                        "axes",
                        "boundaries",
                        "annotations",
                        "annotations",
                        "annotations",
                        "annotations"
                    ],
                "{name}: layer order {classes:?}"
            );
            ensure!(
                paths(&gs[1].1) == case.boundary_names().len(),
                "{name}: {} outlines for {} boundaries",
                paths(&gs[1].1),
                case.boundary_names().len()
            );
            let labels: Vec<&str> = gs[2..]
                .iter()
                .flat_map(|(_, b)| b.split("<text ").skip(1))
                .map(|s| {
                    let s = &s[s.find('>').unwrap() + 1..];
                    &s[..s.find('<').unwrap()]
                })
                .collect();
            let mut expected: Vec<&str> = case.boundary_names().iter().map(|s| s.as_str()).collect();
            expected.extend(["inlet", "outlet", "step"]);
            ensure!(labels == expected, "{name}: annotations {labels:?}");
        }
        "fig2_field" => {
            ensure!(
                classes == ["axes", "field", "colorbar"],
                "{name}: layer order {classes:?}"
            );
            let n = gs[1].1.matches("<polygon ").count();
            ensure!(n == case.n_cells(), "{name}: {n} polygons");
            ensure!(
                svg.contains("<linearGradient") && gs[2].1.contains(">u/U0</text>"),
                "{name}: colorbar incomplete"
            );
        }
        "fig3_vectors" => {
            ensure!(
                classes == ["axes", "boundaries", "vectors"],
                "{name}: layer order {classes:?}"
            );
            let polys: Vec<Vec<P2>> = (0..case.n_cells()).map(|c| case.mesh().cell_polygon(c)).collect();
            let b = case.bounds();
            let (nx, ny) = (101, 13);
            let mut expected = 0;
            for j in 0..ny {
                for i in 0..nx {
                    let q = [
                        b.xmin + (b.xmax - b.xmin) * i as f64 / (nx - 1) as f64,
                        b.ymin + (b.ymax - b.ymin) * j as f64 / (ny - 1) as f64,
                    ];
                    let hit = polys.iter().any(|p| {
                        inside(p, q)
                            || (0..p.len())
                                .any(|k| segment_distance(q, p[k], p[(k + 1) % p.len()]) < 1e-9 * b.diagonal())
                    });
                    expected += hit as usize;
                }
            }
            let n = paths(&gs[2].1);
            ensure!(n == expected, "{name}: {n} arrows, oracle expects {expected}");
            ensure!(svg.contains("<clipPath id=\"plot-area\">"), "{name}: no clip path");
        }
        "fig4_profiles" => {
            let mut expected = vec!["axes".to_string(), "boundaries".to_string()];
            expected.extend(std::iter::repeat_n("profile".to_string(), 7));
            ensure!(classes == expected, "{name}: layer order {classes:?}");
            let starts: Vec<f64> = gs[2..]
                .iter()
                .map(|(_, b)| {
                    let s = &b[b.find("d=\"M ").unwrap() + 5..];
                    s.split(' ').next().unwrap().parse::<f64>().unwrap()
                })
                .collect();
            ensure!(
                starts.windows(2).all(|w| w[0] < w[1]),
                "{name}: profiles not in station order: {starts:?}"
            );
            ensure!(
                gs[2..].iter().all(|(_, b)| paths(b) == 1),
                "{name}: one path per profile"
            );
        }
        _ => unreachable!(),
    }
    Ok(())
}

fn seeds() -> Vec<(bool, Vec<u8>)> {
    let mut out = Vec::new();
    let polydata = "# vtk DataFile Version 2.0\nhand\nASCII\nDATASET POLYDATA\nPOINTS 4 float\n\
        0 0 0 1 0 0 1 1 0 0 1 0\nPOLYGONS 2 8\n3 0 1 2\n3 0 2 3\nCELL_DATA 2\nSCALARS p float 1\n\
        LOOKUP_TABLE default\n0.5 1.5\nVECTORS U double\n1 0 0 0 1 0\n";
    out.push((true, polydata.as_bytes().to_vec()));
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let small = perturbed_quads(&mut rng, 2, 2, 1.0, 0.2);
    let mut small = with_random_fields(&mut rng, small);
    small.cell_fields.remove("t");
    for ds in [fixtures::unitsq4(), fixtures::lmesh(), fixtures::disk(1.0, 2, 6), small] {
        out.push((true, write_legacy_ascii_to(&ds).into_bytes()));
        out.push((true, fixtures::encode_legacy_binary(&ds)));
        for enc in [
            VtuEncoding::Ascii,
            VtuEncoding::Binary,
            VtuEncoding::AppendedRaw,
            VtuEncoding::AppendedBase64,
        ] {
            out.push((false, fixtures::encode_vtu(&ds, enc)));
        }
    }
    out
}

const NASTY: [&[u8]; 14] = [
    b"-1",
    b"0",
    b"4294967296",
    b"18446744073709551616",
    b"1e308",
    b"nan",
    b"-inf",
    b"999999999",
    b"",
    b"\"",
    b"<",
    b">",
    b"\xff\xfe",
    b"9223372036854775807",
];

fn mutate(rng: &mut ChaCha8Rng, input: &mut Vec<u8>) {
    for _ in 0..rng.gen_range(1..=4) {
        let n = input.len();
        if n == 0 {
            input.push(rng.gen());
            continue;
        }
        let i = rng.gen_range(0..n);
        match rng.gen_range(0..8) {
            0 => input[i] ^= 1 << rng.gen_range(0..8),
            1 => input[i] = rng.gen(),
            2 => {
                let j = (i + rng.gen_range(1..64)).min(n);
                input.drain(i..j);
            }
            3 => {
                let bytes: Vec<u8> = (0..rng.gen_range(1..8)).map(|_| rng.gen()).collect();
                input.splice(i..i, bytes);
            }
            4 => input.truncate(i),
            5 => {
                let j = (i + rng.gen_range(1..128)).min(n);
                let chunk = input[i..j].to_vec();
                let at = rng.gen_range(0..=n);
                input.splice(at..at, chunk);
            }
            6 => {
                let start = input[..i]
                    .iter()
                    .rposition(|b| !b.is_ascii_digit())
                    .map_or(0, |k| k + 1);
                let end = input[i..].iter().position(|b| !b.is_ascii_digit()).map_or(n, |k| i + k);
                let token = NASTY[rng.gen_range(0..NASTY.len())];
                input.splice(start..end, token.iter().copied());
            }
            _ => {
                let lines: Vec<usize> = input
                    .iter()
                    .enumerate()
                    .filter(|(_, &b)| b == b'\n')
                    .map(|(k, _)| k)
                    .collect();
                if lines.len() >= 2 {
                    let a = lines[rng.gen_range(0..lines.len())];
                    let b = lines[rng.gen_range(0..lines.len())];
                    let (a, b) = (a.min(b), a.max(b));
                    input[a..b].reverse();
                }
            }
        }
    }
}

fn fuzz_totality() -> Outcome {
    let corpus = seeds();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let previous = std::panic::take_hook();
    std::panic::set_hook(Box::new(|_| {}));
    let (mut ok, mut errors, mut crashes, mut meshes) = (0usize, 0usize, Vec::new(), 0usize);
    for run in 0..FUZZ_EXECUTIONS {
        let (legacy, seed) = &corpus[rng.gen_range(0..corpus.len())];
        let mut input = seed.clone();
        mutate(&mut rng, &mut input);
        let result = catch_unwind(|| {
            let parsed = if *legacy {
                read_legacy(&input)
            } else {
                read_xml_vtu(&input)
            };
            match parsed {
                Ok(ds) => {
                    assert!(ds.validate().is_ok(), "parser returned an invalid dataset");
                    let meshed = Case::from_raw(ds).is_ok();
                    (true, meshed)
                }
                Err(_) => (false, false),
            }
        });
        match result {
            Ok((true, m)) => {
                ok += 1;
                meshes += m as usize;
            }
            Ok((false, _)) => errors += 1,
            Err(_) => crashes.push(run),
        }
    }
    std::panic::set_hook(previous);
    ensure!(
        crashes.is_empty(),
        "{} crashes, first at execution {}",
        crashes.len(),
        crashes[0]
    );
    Ok(format!(
        "{FUZZ_EXECUTIONS} executions: {ok} datasets ({meshes} meshed), {errors} typed errors, 0 crashes"
    ))
}
