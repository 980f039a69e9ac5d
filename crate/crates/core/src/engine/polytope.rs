use super::integrand::IntegrandSpec;
use crate::density::CoefficientDensity;
use crate::error::{Error, Result};
use crate::simplex::{maximize, LpOutcome};
use crate::symmetric::CoefficientMap;

/// `{t : lo_i ≤ (M t)_i ≤ hi_i}` with its coordinate bounding box.
#[derive(Debug, Clone)]
pub struct FeasiblePolytope {
    rows: Vec<Vec<f64>>,
    bounds: Vec<(f64, f64)>,
    bbox: Vec<(f64, f64)>,
    /// For each coordinate, feasible points attaining the lower and upper box faces.
    witnesses: Vec<(Vec<f64>, Vec<f64>)>,
    empty: bool,
    interior_radius: f64,
}

impl FeasiblePolytope {
    /// Polytope for per-slot intervals, which must be finite.
    pub fn from_intervals(map: &CoefficientMap, intervals: &[(f64, f64)]) -> Result<Self> {
        let d = map.cols();
        let m = map.m();
        if intervals.len() != map.rows() {
            return Err(Error::Dimension(format!(
                "{} intervals for {} coefficient slots",
                intervals.len(),
                map.rows()
            )));
        }
        if intervals.iter().any(|(lo, hi)| !lo.is_finite() || !hi.is_finite()) {
            return Err(Error::Geometry("polytope bounds must be finite".into()));
        }
        let rows: Vec<Vec<f64>> = (0..map.rows()).map(|i| map.row(i).to_vec()).collect();
        let mut poly = FeasiblePolytope {
            rows,
            bounds: intervals.to_vec(),
            bbox: vec![(0.0, 0.0); d],
            witnesses: Vec::new(),
            empty: false,
            interior_radius: 0.0,
        };
        if intervals.iter().any(|(lo, hi)| lo > hi) {
            poly.empty = true;
            return Ok(poly);
        }

        let tri = map.triangular_box(&intervals[m..]);
        let origin: Vec<f64> = tri.iter().map(|b| b.0).collect();
        let widths: Vec<f64> = tri.iter().map(|b| b.1 - b.0).collect();

        // Constraints in y = t − origin ≥ 0.
        let mut a = Vec::new();
        let mut b = Vec::new();
        let mut norms = Vec::new();
        for (row, &(lo, hi)) in poly.rows.iter().zip(intervals) {
            let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm == 0.0 {
                if lo > 0.0 || hi < 0.0 {
                    poly.empty = true;
                    return Ok(poly);
                }
                continue;
            }
            let shift: f64 = row.iter().zip(&origin).map(|(p, q)| p * q).sum();
            a.push(row.clone());
            b.push(hi - shift);
            norms.push(norm);
            a.push(row.iter().map(|v| -v).collect());
            b.push(shift - lo);
            norms.push(norm);
        }
        let n_general = a.len();
        for (j, &w) in widths.iter().enumerate() {
            let mut e = vec![0.0; d];
            e[j] = 1.0;
            a.push(e);
            b.push(w);
        }

        for j in 0..d {
            let mut c = vec![0.0; d];
            c[j] = 1.0;
            let hi = Self::solve(&c, &a, &b)?;
            c[j] = -1.0;
            let lo = Self::solve(&c, &a, &b)?;
            match (lo, hi) {
                (Some((lv, lp)), Some((hv, hp))) => {
                    poly.bbox[j] = (origin[j] - lv, origin[j] + hv);
                    let shift = |p: Vec<f64>| p.iter().zip(&origin).map(|(y, o)| y + o).collect();
                    poly.witnesses.push((shift(lp), shift(hp)));
                }
                _ => {
                    poly.empty = true;
                    return Ok(poly);
                }
            }
        }

        // Largest ball (in the row-normalised sense) inside the general constraints.
        let mut a2: Vec<Vec<f64>> = Vec::with_capacity(a.len() + 1);
        for (i, row) in a.iter().enumerate() {
            let mut r = row.clone();
            r.push(if i < n_general { norms[i] } else { 0.0 });
            a2.push(r);
        }
        let cap = widths.iter().fold(1.0f64, |acc, w| acc.max(*w));
        let mut r = vec![0.0; d + 1];
        r[d] = 1.0;
        a2.push(r.clone());
        let mut b2 = b.clone();
        b2.push(cap);
        let mut c = vec![0.0; d + 1];
        c[d] = 1.0;
        poly.interior_radius = Self::solve(&c, &a2, &b2)?.map(|(v, _)| v).unwrap_or(0.0);
        Ok(poly)
    }

    fn solve(c: &[f64], a: &[Vec<f64>], b: &[f64]) -> Result<Option<(f64, Vec<f64>)>> {
        match maximize(c, a, b) {
            LpOutcome::Optimal { value, point } => Ok(Some((value, point))),
            LpOutcome::Infeasible => Ok(None),
            LpOutcome::Unbounded => Err(Error::Geometry(
                "integration region is unbounded in some coordinate".into(),
            )),
        }
    }

    pub fn dim(&self) -> usize {
        self.bbox.len()
    }

    pub fn bounding_box(&self) -> &[(f64, f64)] {
        &self.bbox
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    pub fn witnesses(&self) -> &[(Vec<f64>, Vec<f64>)] {
        &self.witnesses
    }

    pub fn is_empty(&self) -> bool {
        self.empty
    }

    /// True when the polytope contains a ball of positive radius.
    pub fn has_interior(&self) -> bool {
        let scale = 1.0 + self.bbox.iter().fold(0.0f64, |a, b| a.max(b.1 - b.0));
        !self.empty && self.interior_radius > 1e-12 * scale
    }

    pub fn volume_of_box(&self) -> f64 {
        self.bbox.iter().map(|b| b.1 - b.0).product()
    }

    /// Membership with a relative slack of `tol` on each constraint.
    pub fn contains_with(&self, t: &[f64], tol: f64) -> bool {
        !self.empty
            && self.rows.iter().zip(&self.bounds).all(|(row, &(lo, hi))| {
                let v: f64 = row.iter().zip(t).map(|(a, b)| a * b).sum();
                let slack = tol * (1.0 + lo.abs().max(hi.abs()));
                v >= lo - slack && v <= hi + slack
            })
    }

    pub fn contains(&self, t: &[f64]) -> bool {
        self.contains_with(t, 0.0)
    }
}

/// Support polytope of an all-uniform model.
pub fn build_polytope(spec: &IntegrandSpec) -> Result<FeasiblePolytope> {
    let intervals = spec
        .model()
        .densities()
        .iter()
        .map(|d| match *d {
            CoefficientDensity::Uniform { a, b } => Ok((a, b)),
            _ => Err(Error::ModelMismatch(
                "support polytope needs uniform coefficient laws".into(),
            )),
        })
        .collect::<Result<Vec<_>>>()?;
    FeasiblePolytope::from_intervals(spec.map(), &intervals)
}

/// Polytope of the supports truncated to `[-R, R]` with `R = decay_radius(eps)`.
pub fn truncated_polytope(spec: &IntegrandSpec, eps: f64) -> Result<FeasiblePolytope> {
    let intervals = spec
        .model()
        .densities()
        .iter()
        .map(|d| d.truncated_support(eps))
        .collect::<Result<Vec<_>>>()?;
    FeasiblePolytope::from_intervals(spec.map(), &intervals)
}
