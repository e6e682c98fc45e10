//! Convex feasible sets with exact Euclidean projection.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vector::Vector;

/// Shape of a convex body.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Shape {
    Ball { center: Vector, radius: f64 },
    Box { lo: Vector, hi: Vector },
    /// Convex polygon in the plane, vertices counterclockwise.
    Polygon { vertices: Vec<[f64; 2]> },
    /// Probability simplex `{x >= 0, sum x = 1}` in `dim` coordinates.
    Simplex { dim: usize },
}

/// A convex feasible set together with a bound `R` on the norm of its members.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvexBody {
    shape: Shape,
    radius_bound: f64,
}

impl ConvexBody {
    pub fn ball(center: Vector, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::Argument(format!("ball radius must be > 0, got {radius}")));
        }
        let radius_bound = center.norm() + radius;
        Ok(ConvexBody {
            shape: Shape::Ball { center, radius },
            radius_bound,
        })
    }

    /// Ball of the given radius centred at the origin.
    pub fn centered_ball(dim: usize, radius: f64) -> Result<Self> {
        Self::ball(Vector::zeros(dim), radius)
    }

    pub fn cube(lo: Vector, hi: Vector) -> Result<Self> {
        lo.check_dim(hi.dim())?;
        if lo.as_slice().iter().zip(hi.as_slice()).any(|(l, h)| l > h) {
            return Err(Error::Argument("box requires lo <= hi coordinatewise".into()));
        }
        let corner: f64 = lo
            .as_slice()
            .iter()
            .zip(hi.as_slice())
            .map(|(l, h)| l.abs().max(h.abs()).powi(2))
            .sum();
        Ok(ConvexBody {
            shape: Shape::Box { lo, hi },
            radius_bound: corner.sqrt().max(f64::MIN_POSITIVE),
        })
    }

    /// Convex polygon from its vertex list. Clockwise input is reversed to
    /// counterclockwise order; non-convex or degenerate lists are rejected.
    pub fn polygon(mut vertices: Vec<[f64; 2]>) -> Result<Self> {
        if vertices.len() < 3 {
            return Err(Error::Argument("polygon needs at least 3 vertices".into()));
        }
        if vertices.iter().flatten().any(|c| !c.is_finite()) {
            return Err(Error::Argument("polygon vertex is not finite".into()));
        }
        let n = vertices.len();
        let turns: Vec<f64> = (0..n)
            .map(|i| {
                let a = vertices[i];
                let b = vertices[(i + 1) % n];
                let c = vertices[(i + 2) % n];
                cross([b[0] - a[0], b[1] - a[1]], [c[0] - b[0], c[1] - b[1]])
            })
            .collect();
        if turns.iter().all(|&z| z < 0.0) {
            vertices.reverse();
        } else if !turns.iter().all(|&z| z > 0.0) {
            return Err(Error::Argument(
                "polygon vertices do not form a strictly convex polygon".into(),
            ));
        }
        let radius_bound = vertices
            .iter()
            .map(|v| v[0].hypot(v[1]))
            .fold(0.0, f64::max)
            .max(f64::MIN_POSITIVE);
        Ok(ConvexBody {
            shape: Shape::Polygon { vertices },
            radius_bound,
        })
    }

    /// Regular `n`-gon with the first vertex straight above the centre.
    pub fn regular_polygon(center: [f64; 2], circumradius: f64, n: usize) -> Result<Self> {
        if n < 3 || !(circumradius > 0.0) {
            return Err(Error::Argument(
                "regular polygon needs n >= 3 and circumradius > 0".into(),
            ));
        }
        let vertices = (0..n)
            .map(|k| {
                let angle =
                    std::f64::consts::FRAC_PI_2 + 2.0 * std::f64::consts::PI * k as f64 / n as f64;
                [
                    center[0] + circumradius * angle.cos(),
                    center[1] + circumradius * angle.sin(),
                ]
            })
            .collect();
        Self::polygon(vertices)
    }

    /// The default pentagon: centred at (1, 1) with circumradius 1.
    pub fn pentagon() -> Self {
        Self::regular_polygon([1.0, 1.0], 1.0, 5).expect("valid pentagon")
    }

    pub fn simplex(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Argument("simplex dimension must be >= 1".into()));
        }
        Ok(ConvexBody {
            shape: Shape::Simplex { dim },
            radius_bound: 1.0,
        })
    }

    /// Replace the radius bound by a looser one. Bounds tighter than the
    /// body's own extent are rejected.
    pub fn with_radius_bound(mut self, r: f64) -> Result<Self> {
        if !(r >= self.radius_bound) {
            return Err(Error::Argument(format!(
                "radius bound {r} is smaller than the body extent {}",
                self.radius_bound
            )));
        }
        self.radius_bound = r;
        Ok(self)
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn radius_bound(&self) -> f64 {
        self.radius_bound
    }

    pub fn dim(&self) -> usize {
        match &self.shape {
            Shape::Ball { center, .. } => center.dim(),
            Shape::Box { lo, .. } => lo.dim(),
            Shape::Polygon { .. } => 2,
            Shape::Simplex { dim } => *dim,
        }
    }

    /// Euclidean projection onto the body. Members are returned unchanged.
    pub fn project(&self, x: &Vector) -> Result<Vector> {
        x.check_dim(self.dim())?;
        Ok(match &self.shape {
            Shape::Ball { center, radius } => {
                let offset = x - center;
                let dist = offset.norm();
                if dist <= *radius {
                    x.clone()
                } else {
                    center.add_scaled(radius / dist, &offset)
                }
            }
            Shape::Box { lo, hi } => Vector::from_raw(
                x.as_slice()
                    .iter()
                    .zip(lo.as_slice().iter().zip(hi.as_slice()))
                    .map(|(c, (l, h))| c.clamp(*l, *h))
                    .collect(),
            ),
            Shape::Polygon { vertices } => {
                let p = [x[0], x[1]];
                if polygon_contains(vertices, p, 0.0) {
                    x.clone()
                } else {
                    let q = polygon_boundary_nearest(vertices, p);
                    Vector::from_raw(q.to_vec())
                }
            }
            Shape::Simplex { .. } => project_simplex(x),
        })
    }

    /// Shape-specific membership test with absolute slack `tol`.
    pub fn contains(&self, x: &Vector, tol: f64) -> bool {
        if x.dim() != self.dim() {
            return false;
        }
        match &self.shape {
            Shape::Ball { center, radius } => x.distance(center) <= radius + tol,
            Shape::Box { lo, hi } => x
                .as_slice()
                .iter()
                .zip(lo.as_slice().iter().zip(hi.as_slice()))
                .all(|(c, (l, h))| *c >= l - tol && *c <= h + tol),
            Shape::Polygon { vertices } => polygon_contains(vertices, [x[0], x[1]], tol),
            Shape::Simplex { .. } => {
                x.as_slice().iter().all(|&c| c >= -tol)
                    && (x.as_slice().iter().sum::<f64>() - 1.0).abs() <= tol
            }
        }
    }

    /// Triangle fan `(v0, v_i, v_{i+1})` with areas, for polygon bodies.
    pub fn triangle_fan(&self) -> Option<Vec<([[f64; 2]; 3], f64)>> {
        let Shape::Polygon { vertices } = &self.shape else {
            return None;
        };
        let v0 = vertices[0];
        Some(
            vertices[1..]
                .windows(2)
                .map(|w| {
                    let tri = [v0, w[0], w[1]];
                    let area = 0.5
                        * cross(
                            [w[0][0] - v0[0], w[0][1] - v0[1]],
                            [w[1][0] - v0[0], w[1][1] - v0[1]],
                        );
                    (tri, area)
                })
                .collect(),
        )
    }

    /// Area centroid of a polygon body.
    pub fn polygon_centroid(&self) -> Option<[f64; 2]> {
        let fan = self.triangle_fan()?;
        let total: f64 = fan.iter().map(|(_, a)| a).sum();
        let mut c = [0.0, 0.0];
        for (tri, area) in &fan {
            for v in tri {
                c[0] += area * v[0] / 3.0;
                c[1] += area * v[1] / 3.0;
            }
        }
        Some([c[0] / total, c[1] / total])
    }
}

fn cross(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

fn polygon_contains(vertices: &[[f64; 2]], p: [f64; 2], tol: f64) -> bool {
    let n = vertices.len();
    (0..n).all(|i| {
        let a = vertices[i];
        let b = vertices[(i + 1) % n];
        let edge = [b[0] - a[0], b[1] - a[1]];
        let len = edge[0].hypot(edge[1]);
        // signed distance to the edge line, positive inside
        cross(edge, [p[0] - a[0], p[1] - a[1]]) / len >= -tol
    })
}

fn polygon_boundary_nearest(vertices: &[[f64; 2]], p: [f64; 2]) -> [f64; 2] {
    let n = vertices.len();
    let mut best = vertices[0];
    let mut best_d2 = f64::INFINITY;
    for i in 0..n {
        let a = vertices[i];
        let b = vertices[(i + 1) % n];
        let ab = [b[0] - a[0], b[1] - a[1]];
        let ap = [p[0] - a[0], p[1] - a[1]];
        let s = ((ap[0] * ab[0] + ap[1] * ab[1]) / (ab[0] * ab[0] + ab[1] * ab[1])).clamp(0.0, 1.0);
        let q = [a[0] + s * ab[0], a[1] + s * ab[1]];
        let d2 = (p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2);
        if d2 < best_d2 {
            best_d2 = d2;
            best = q;
        }
    }
    best
}

/// Sort-based projection onto the probability simplex.
fn project_simplex(x: &Vector) -> Vector {
    let mut sorted = x.as_slice().to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (i, &u) in sorted.iter().enumerate() {
        cumsum += u;
        let candidate = (cumsum - 1.0) / (i + 1) as f64;
        if u - candidate > 0.0 {
            theta = candidate;
        }
    }
    x.map(|c| (c - theta).max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vector;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn bodies() -> Vec<ConvexBody> {
        vec![
            ConvexBody::centered_ball(2, 1.0).unwrap(),
            ConvexBody::ball(vector![1, -1, 0.5], 2.0).unwrap(),
            ConvexBody::cube(vector![-1, -1], vector![1, 1]).unwrap(),
            ConvexBody::pentagon(),
            ConvexBody::simplex(3).unwrap(),
        ]
    }

    fn random_point(rng: &mut ChaCha8Rng, dim: usize) -> Vector {
        Vector::new((0..dim).map(|_| rng.random_range(-4.0..4.0)).collect()).unwrap()
    }

    #[test]
    fn ball_radial_scaling() {
        let b = ConvexBody::centered_ball(2, 1.0).unwrap();
        let p = b.project(&vector![3, 4]).unwrap();
        assert_abs_diff_eq!(p[0], 0.6, epsilon = 1e-15);
        assert_abs_diff_eq!(p[1], 0.8, epsilon = 1e-15);
    }

    #[test]
    fn box_interior_fixed() {
        let b = ConvexBody::cube(vector![-1, -1], vector![1, 1]).unwrap();
        assert_eq!(b.project(&vector![0.5, -0.3]).unwrap(), vector![0.5, -0.3]);
        assert_eq!(b.project(&vector![2, -3]).unwrap(), vector![1, -1]);
    }

    #[test]
    fn pentagon_outside_point_matches_dense_boundary_search() {
        let body = ConvexBody::regular_polygon([0.0, 0.0], 1.0, 5).unwrap();
        let Shape::Polygon { vertices } = body.shape().clone() else {
            unreachable!()
        };
        let v = vertices[1];
        let x = [2.0 * v[0] + 0.3, 2.0 * v[1] - 0.1];
        let got = body.project(&vector![x[0], x[1]]).unwrap();

        // brute-force oracle: dense sampling of every edge
        let mut best = (f64::INFINITY, [0.0, 0.0]);
        let n = vertices.len();
        let samples = 200_000;
        for i in 0..n {
            let a = vertices[i];
            let b = vertices[(i + 1) % n];
            for k in 0..=samples {
                let s = k as f64 / samples as f64;
                let q = [a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])];
                let d = (x[0] - q[0]).hypot(x[1] - q[1]);
                if d < best.0 {
                    best = (d, q);
                }
            }
        }
        assert!((got[0] - best.1[0]).abs() <= 1e-4);
        assert!((got[1] - best.1[1]).abs() <= 1e-4);
    }

    #[test]
    fn rejects_nonconvex_polygon_and_accepts_clockwise() {
        let dart = vec![[0.0, 0.0], [2.0, 0.0], [1.0, 0.5], [1.0, 2.0]];
        assert!(ConvexBody::polygon(dart).is_err());
        let cw = vec![[0.0, 0.0], [0.0, 1.0], [1.0, 1.0], [1.0, 0.0]];
        let sq = ConvexBody::polygon(cw).unwrap();
        assert!(sq.contains(&vector![0.5, 0.5], 0.0));
    }

    #[test]
    fn simplex_projection_known_value() {
        let s = ConvexBody::simplex(3).unwrap();
        let p = s.project(&vector![1, 1, -1]).unwrap();
        assert_abs_diff_eq!(p[0], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(p[1], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(p[2], 0.0, epsilon = 1e-15);
    }

    #[test]
    fn dimension_mismatch_is_argument_error() {
        let b = ConvexBody::centered_ball(2, 1.0).unwrap();
        assert!(matches!(
            b.project(&vector![1, 2, 3]),
            Err(Error::Dimension { .. })
        ));
    }

    #[test]
    fn radius_bound_covers_members() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for body in bodies() {
            for _ in 0..200 {
                let p = body.project(&random_point(&mut rng, body.dim())).unwrap();
                assert!(p.norm() <= body.radius_bound() + 1e-12);
            }
        }
    }

    #[test]
    fn projection_properties_on_random_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for body in bodies() {
            for _ in 0..1000 {
                let x = random_point(&mut rng, body.dim());
                let y = random_point(&mut rng, body.dim());
                let px = body.project(&x).unwrap();
                let py = body.project(&y).unwrap();
                assert!(body.contains(&px, 1e-9), "{body:?} {px:?}");
                assert!(body.project(&px).unwrap().max_abs_diff(&px) <= 1e-9);
                assert!(px.distance(&py) <= x.distance(&y) + 1e-12);
            }
        }
    }

    #[test]
    fn pentagon_centroid_is_center() {
        let c = ConvexBody::pentagon().polygon_centroid().unwrap();
        assert_abs_diff_eq!(c[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(c[1], 1.0, epsilon = 1e-12);
    }
}
