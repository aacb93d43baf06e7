//! Thin-plate spline energy of a correspondence.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::assignment::Assignment;
use crate::error::{Error, Result};
use crate::formation::ShapePointSet;
use crate::geometry::Vec2;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct TpsParams {
    /// Weight of the bending term. Zero keeps only the displacement term.
    pub lambda: f64,
}

/// Displacement energy plus `lambda` times the bending energy of the thin
/// plate spline carrying each slot `v[slot_of[i]]` onto `x[i]`.
pub fn tps_energy(
    x: &ShapePointSet,
    v: &ShapePointSet,
    correspondence: &Assignment,
    params: &TpsParams,
) -> Result<f64> {
    let n = x.len();
    if v.len() != n || correspondence.slot_of.len() != n {
        return Err(Error::SizeMismatch {
            expected: n,
            actual: if v.len() != n {
                v.len()
            } else {
                correspondence.slot_of.len()
            },
        });
    }
    if !(params.lambda >= 0.0 && params.lambda.is_finite()) {
        return Err(Error::NonFinite("tps lambda"));
    }
    if correspondence.slot_of.iter().any(|&j| j >= n) {
        return Err(Error::SizeMismatch {
            expected: n,
            actual: correspondence.slot_of.iter().copied().max().unwrap_or(0) + 1,
        });
    }
    let data: f64 = (0..n)
        .map(|i| x.points[i].distance_sq(v.points[correspondence.slot_of[i]]))
        .sum();
    if params.lambda == 0.0 {
        return Ok(data);
    }
    let controls: Vec<Vec2> = correspondence
        .slot_of
        .iter()
        .map(|&j| v.points[j])
        .collect();
    let bend = bending_energy(&controls, &x.points)?;
    Ok(data + params.lambda * bend)
}

/// Radial basis of the planar thin plate: r^2 log r.
pub fn tps_kernel(r: f64) -> f64 {
    if r == 0.0 {
        0.0
    } else {
        r * r * r.ln()
    }
}

/// Bending energy (integral of the squared second derivatives, summed over
/// both output coordinates) of the interpolating spline mapping `controls[i]`
/// to `values[i]`.
pub fn bending_energy(controls: &[Vec2], values: &[Vec2]) -> Result<f64> {
    let w = spline_coefficients(controls, values)?.map_or(Vec::new(), |(w, _)| w);
    if w.is_empty() {
        return Ok(0.0);
    }
    let mut e = 0.0;
    for (wi, ci) in w.iter().zip(controls) {
        for (wj, cj) in w.iter().zip(controls) {
            let k = tps_kernel(ci.distance(*cj));
            e += (wi[0] * wj[0] + wi[1] * wj[1]) * k;
        }
    }
    Ok(8.0 * std::f64::consts::PI * e)
}

/// Kernel weights `w[i] = (wx, wy)` and affine part `a = [[c, ax, ay]; 2]`
/// of the interpolant. `None` when fewer than three controls (an affine map
/// always fits, with no bending).
#[allow(clippy::type_complexity)]
pub fn spline_coefficients(
    controls: &[Vec2],
    values: &[Vec2],
) -> Result<Option<(Vec<[f64; 2]>, [[f64; 3]; 2])>> {
    let n = controls.len();
    if values.len() != n {
        return Err(Error::SizeMismatch {
            expected: n,
            actual: values.len(),
        });
    }
    if n < 3 {
        return Ok(None);
    }
    let spread = controls
        .iter()
        .flat_map(|a| controls.iter().map(move |b| a.distance(*b)))
        .fold(0.0, f64::max);
    let p0 = controls[0];
    let far = controls
        .iter()
        .copied()
        .max_by(|a, b| a.distance_sq(p0).total_cmp(&b.distance_sq(p0)))
        .unwrap_or(p0);
    let axis = far - p0;
    let scale = spread.max(1.0);
    if controls
        .iter()
        .all(|p| axis.cross(*p - p0).abs() <= 1e-9 * scale * scale)
    {
        return Err(Error::DegenerateControlPoints);
    }
    let m = n + 3;
    let mut l = DMatrix::<f64>::zeros(m, m);
    for i in 0..n {
        for j in 0..n {
            l[(i, j)] = tps_kernel(controls[i].distance(controls[j]));
        }
        let p = [1.0, controls[i].x, controls[i].y];
        for k in 0..3 {
            l[(i, n + k)] = p[k];
            l[(n + k, i)] = p[k];
        }
    }
    let lu = l.lu();
    let mut w = vec![[0.0; 2]; n];
    let mut a = [[0.0; 3]; 2];
    for dim in 0..2 {
        let mut rhs = DVector::<f64>::zeros(m);
        for i in 0..n {
            rhs[i] = if dim == 0 { values[i].x } else { values[i].y };
        }
        let sol = lu.solve(&rhs).ok_or(Error::DegenerateControlPoints)?;
        if sol.iter().any(|s| !s.is_finite()) {
            return Err(Error::DegenerateControlPoints);
        }
        for i in 0..n {
            w[i][dim] = sol[i];
        }
        for k in 0..3 {
            a[dim][k] = sol[n + k];
        }
    }
    Ok(Some((w, a)))
}
