use crate::case::Case;
use crate::error::{Error, Result};
use crate::field::{Field, FieldKind};
use crate::Point2;

/// Integration controls for [`trace_streamline`].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StreamlineOptions {
    /// Arc-length step in dataset units; defaults to 0.005 of the bounding
    /// box diagonal.
    pub step: Option<f64>,
    /// Defaults to 10000.
    pub max_steps: Option<usize>,
}

const MAX_HALVINGS: usize = 40;

/// Integrates a streamline forward from `seed` with classical RK4 over the
/// cell-wise constant in-plane velocity, normalised by the largest speed so
/// the step is a length. Returns `None` if the seed is outside the mesh.
///
/// A step whose stages leave the mesh is retried with half the step, so the
/// line ends within a tiny fraction of a step of the boundary. Tracing also
/// stops at stagnation (speed below 1e-12 of the maximum) or after
/// `max_steps` accepted steps.
pub fn trace_streamline(
    case: &Case,
    field: &Field,
    seed: Point2,
    opts: StreamlineOptions,
) -> Result<Option<Vec<Point2>>> {
    if field.kind() != FieldKind::Vector {
        return Err(Error::InvalidArgument(format!(
            "streamlines need a vector field, got a {} field",
            field.kind().name()
        )));
    }
    if field.len() != case.n_cells() {
        return Err(Error::SizeMismatch {
            expected: case.n_cells(),
            found: field.len(),
        });
    }
    let mesh = case.mesh();
    let step = opts.step.unwrap_or(0.005 * mesh.bounds().diagonal());
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "streamline step {step} must be positive"
        )));
    }
    let max_steps = opts.max_steps.unwrap_or(10_000);
    let vmax = field.tuples().map(|t| t[0].hypot(t[1])).fold(0.0, f64::max);

    let velocity = |p: Point2| -> Option<Point2> {
        let c = mesh.locate_cell(p)?;
        let t = field.tuple(c);
        Some([t[0] / vmax, t[1] / vmax])
    };
    if mesh.locate_cell(seed).is_none() {
        return Ok(None);
    }
    let mut line = vec![seed];
    if vmax == 0.0 {
        return Ok(Some(line));
    }
    let mut p = seed;
    'steps: for _ in 0..max_steps {
        let k1 = velocity(p).expect("current point is inside");
        if k1[0].hypot(k1[1]) < 1e-12 {
            break;
        }
        let mut h = step;
        for _ in 0..MAX_HALVINGS {
            if let Some(next) = rk4(&velocity, p, k1, h) {
                p = next;
                line.push(p);
                continue 'steps;
            }
            h *= 0.5;
        }
        break;
    }
    Ok(Some(line))
}

fn rk4(velocity: &impl Fn(Point2) -> Option<Point2>, p: Point2, k1: Point2, h: f64) -> Option<Point2> {
    let at = |k: Point2, f: f64| [p[0] + f * k[0], p[1] + f * k[1]];
    let k2 = velocity(at(k1, 0.5 * h))?;
    let k3 = velocity(at(k2, 0.5 * h))?;
    let k4 = velocity(at(k3, h))?;
    let next = [
        p[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        p[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
    ];
    velocity(next)?;
    Some(next)
}
