//! Radial losses `f(‖x − x_u‖)` anchored at a hidden context `x_u`.
//!
//! Each family is convex and nondecreasing in the radius. The quadratic
//! family carries an additive constant `b` and the exponential family has
//! value `a` at the anchor; both offsets leave gradients and minimisers
//! unchanged and cancel in regret.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vector::Vector;

/// Grid resolution used for numerically computed Lipschitz bounds.
const LIPSCHITZ_GRID: usize = 1000;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum LossFamily {
    /// `r`
    Norm,
    /// `a r² + b`
    Quadratic { a: f64, b: f64 },
    /// `r^m`
    Power { m: u32 },
    /// `a exp(r^m / σ₁²)`
    Exp { a: f64, sigma1: f64, m: u32 },
}

impl LossFamily {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::Argument(msg.to_string()));
        match *self {
            LossFamily::Norm => Ok(()),
            LossFamily::Quadratic { a, b } => {
                if !(a > 0.0 && a.is_finite()) {
                    bad("quadratic coefficient a must be > 0")
                } else if !(b >= 0.0 && b.is_finite()) {
                    bad("quadratic offset b must be >= 0")
                } else {
                    Ok(())
                }
            }
            LossFamily::Power { m } if m == 0 => bad("power exponent m must be >= 1"),
            LossFamily::Power { .. } => Ok(()),
            LossFamily::Exp { a, sigma1, m } => {
                if !(a > 0.0 && a.is_finite()) {
                    bad("exp scale a must be > 0")
                } else if !(sigma1 > 0.0 && sigma1.is_finite()) {
                    bad("exp width sigma1 must be > 0")
                } else if m == 0 {
                    bad("exp exponent m must be >= 1")
                } else {
                    Ok(())
                }
            }
        }
    }

    /// Radial profile `f(r)`, including any offset.
    pub fn profile(&self, r: f64) -> f64 {
        match *self {
            LossFamily::Norm => r,
            LossFamily::Quadratic { a, b } => a * r * r + b,
            LossFamily::Power { m } => r.powi(m as i32),
            LossFamily::Exp { a, sigma1, m } => a * (r.powi(m as i32) / (sigma1 * sigma1)).exp(),
        }
    }

    /// `f'(r)` for `r > 0`, and the right derivative at 0.
    pub fn radial_derivative(&self, r: f64) -> f64 {
        match *self {
            LossFamily::Norm => 1.0,
            LossFamily::Quadratic { a, .. } => 2.0 * a * r,
            LossFamily::Power { m } => m as f64 * r.powi(m as i32 - 1),
            LossFamily::Exp { a, sigma1, m } => {
                let s2 = sigma1 * sigma1;
                a * (r.powi(m as i32) / s2).exp() * m as f64 * r.powi(m as i32 - 1) / s2
            }
        }
    }

    /// Value at the anchor, `f(0)`.
    pub fn offset(&self) -> f64 {
        self.profile(0.0)
    }

    /// Whether the loss has a kink at its anchor.
    pub fn kinked_at_anchor(&self) -> bool {
        self.radial_derivative(0.0) > 0.0
    }

    /// Strong-convexity parameter; zero unless quadratic.
    pub fn strong_convexity(&self) -> f64 {
        match *self {
            LossFamily::Quadratic { a, .. } => 2.0 * a,
            _ => 0.0,
        }
    }

    /// Bound on the gradient norm within `radius` of the anchor.
    pub fn lipschitz_bound(&self, radius: f64) -> f64 {
        match *self {
            LossFamily::Norm => 1.0,
            LossFamily::Quadratic { a, .. } => 2.0 * a * radius,
            LossFamily::Power { m } => m as f64 * radius.powi(m as i32 - 1),
            LossFamily::Exp { .. } => (0..=LIPSCHITZ_GRID)
                .map(|i| self.radial_derivative(radius * i as f64 / LIPSCHITZ_GRID as f64))
                .fold(0.0, f64::max),
        }
    }
}

/// A subgradient, flagged when taken at a kink where 0 was substituted.
#[derive(Clone, Debug, PartialEq)]
pub struct Subgradient {
    pub vector: Vector,
    pub at_kink: bool,
}

/// One round's loss: a family member anchored at the hidden context.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LossSpec {
    pub anchor: Vector,
    pub family: LossFamily,
}

impl LossSpec {
    pub fn new(anchor: Vector, family: LossFamily) -> Result<Self> {
        family.validate()?;
        Ok(LossSpec { anchor, family })
    }

    pub fn dim(&self) -> usize {
        self.anchor.dim()
    }

    pub fn eval(&self, x: &Vector) -> Result<f64> {
        x.check_dim(self.dim())?;
        Ok(self.family.profile(x.distance(&self.anchor)))
    }

    pub fn gradient(&self, x: &Vector) -> Result<Subgradient> {
        x.check_dim(self.dim())?;
        let offset = x - &self.anchor;
        let r = offset.norm();
        if r == 0.0 {
            return Ok(Subgradient {
                vector: Vector::zeros(self.dim()),
                at_kink: self.family.kinked_at_anchor(),
            });
        }
        Ok(Subgradient {
            vector: offset.scale(self.family.radial_derivative(r) / r),
            at_kink: false,
        })
    }

    pub fn lipschitz_bound(&self, radius: f64) -> f64 {
        self.family.lipschitz_bound(radius)
    }

    pub fn strong_convexity(&self) -> f64 {
        self.family.strong_convexity()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vector;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const FAMILIES: [LossFamily; 4] = [
        LossFamily::Norm,
        LossFamily::Quadratic { a: 0.7, b: 0.3 },
        LossFamily::Power { m: 3 },
        LossFamily::Exp { a: 1.0, sigma1: 1.0, m: 2 },
    ];

    fn random_vec(rng: &mut ChaCha8Rng, dim: usize, half: f64) -> Vector {
        Vector::new((0..dim).map(|_| rng.random_range(-half..half)).collect()).unwrap()
    }

    fn central_difference(loss: &LossSpec, x: &Vector, h: f64) -> Vec<f64> {
        (0..x.dim())
            .map(|i| {
                let mut up = x.clone().into_inner();
                let mut down = up.clone();
                up[i] += h;
                down[i] -= h;
                let up = Vector::new(up).unwrap();
                let down = Vector::new(down).unwrap();
                (loss.eval(&up).unwrap() - loss.eval(&down).unwrap()) / (2.0 * h)
            })
            .collect()
    }

    #[test]
    fn eval_examples() {
        let q = LossSpec::new(vector![0], LossFamily::Quadratic { a: 1.0, b: 0.0 }).unwrap();
        assert_eq!(q.eval(&vector![2]).unwrap(), 4.0);
        let n = LossSpec::new(vector![1, 2], LossFamily::Norm).unwrap();
        assert_eq!(n.eval(&vector![1, 2]).unwrap(), 0.0);
        let e = LossSpec::new(vector![0], LossFamily::Exp { a: 1.0, sigma1: 1.0, m: 2 }).unwrap();
        // a * exp(r^m / sigma1^2) at r = 1
        assert_abs_diff_eq!(e.eval(&vector![1]).unwrap(), 1.0f64.exp(), epsilon = 1e-15);
        assert_abs_diff_eq!(e.eval(&vector![1]).unwrap(), 2.718_281_828_459_045, epsilon = 1e-12);
    }

    #[test]
    fn gradient_examples() {
        let q = LossSpec::new(vector![0, 0], LossFamily::Quadratic { a: 1.0, b: 0.0 }).unwrap();
        assert_eq!(q.gradient(&vector![1, 2]).unwrap().vector, vector![2, 4]);
        let n = LossSpec::new(vector![0, 0], LossFamily::Norm).unwrap();
        let g = n.gradient(&vector![3, 4]).unwrap().vector;
        assert_abs_diff_eq!(g[0], 0.6, epsilon = 1e-15);
        assert_abs_diff_eq!(g[1], 0.8, epsilon = 1e-15);

        let e = LossSpec::new(vector![0], LossFamily::Exp { a: 1.0, sigma1: 1.0, m: 2 }).unwrap();
        let x = vector![0.5];
        let fd = central_difference(&e, &x, 1e-6)[0];
        let g = e.gradient(&x).unwrap().vector[0];
        assert!(((g - fd) / fd).abs() <= 1e-5);
    }

    #[test]
    fn kink_returns_zero_with_flag() {
        let n = LossSpec::new(vector![1, 1], LossFamily::Norm).unwrap();
        let g = n.gradient(&vector![1, 1]).unwrap();
        assert_eq!(g.vector, vector![0, 0]);
        assert!(g.at_kink);
        let q = LossSpec::new(vector![1], LossFamily::Quadratic { a: 1.0, b: 0.0 }).unwrap();
        assert!(!q.gradient(&vector![1]).unwrap().at_kink);
    }

    #[test]
    fn dimension_mismatch() {
        let n = LossSpec::new(vector![1, 1], LossFamily::Norm).unwrap();
        assert!(n.eval(&vector![1]).is_err());
        assert!(n.gradient(&vector![1, 2, 3]).is_err());
    }

    #[test]
    fn invalid_parameters_rejected() {
        assert!(LossSpec::new(vector![0], LossFamily::Quadratic { a: 0.0, b: 0.0 }).is_err());
        assert!(LossSpec::new(vector![0], LossFamily::Quadratic { a: 1.0, b: -1.0 }).is_err());
        assert!(LossSpec::new(vector![0], LossFamily::Power { m: 0 }).is_err());
        assert!(LossSpec::new(vector![0], LossFamily::Exp { a: 1.0, sigma1: 0.0, m: 1 }).is_err());
    }

    #[test]
    fn lipschitz_examples() {
        assert_eq!(LossFamily::Norm.lipschitz_bound(7.0), 1.0);
        assert_eq!(LossFamily::Quadratic { a: 1.0, b: 0.0 }.lipschitz_bound(2.0), 4.0);
        let e = LossFamily::Exp { a: 1.0, sigma1: 1.0, m: 2 };
        assert_abs_diff_eq!(e.lipschitz_bound(1.0), 2.0 * 1.0f64.exp(), epsilon = 1e-12);

        // grid-maximisation oracle over gradient norms in the ball of radius 1
        let loss = LossSpec::new(vector![0, 0], e).unwrap();
        let mut best: f64 = 0.0;
        for i in -200..=200 {
            for j in -200..=200 {
                let p = vector![i as f64 / 200.0, j as f64 / 200.0];
                if p.norm() <= 1.0 {
                    best = best.max(loss.gradient(&p).unwrap().vector.norm());
                }
            }
        }
        assert_abs_diff_eq!(best, 5.436_563_656_918_09, epsilon = 1e-9);
        assert!(e.lipschitz_bound(1.0) >= best - 1e-12);
    }

    #[test]
    fn gradients_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for family in FAMILIES {
            let mut checked = 0;
            while checked < 200 {
                let anchor = random_vec(&mut rng, 3, 1.0);
                let x = random_vec(&mut rng, 3, 1.0);
                if x.distance(&anchor) < 1e-2 {
                    continue;
                }
                let loss = LossSpec::new(anchor, family).unwrap();
                let g = loss.gradient(&x).unwrap().vector;
                let fd = central_difference(&loss, &x, 1e-6);
                let fd = Vector::new(fd).unwrap();
                let rel = g.distance(&fd) / g.norm().max(1e-12);
                assert!(rel <= 1e-5, "{family:?}: rel err {rel}");
                checked += 1;
            }
        }
    }

    #[test]
    fn convexity_and_monotonicity_sampled() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        for family in FAMILIES {
            let loss = LossSpec::new(random_vec(&mut rng, 2, 1.0), family).unwrap();
            for _ in 0..500 {
                let x = random_vec(&mut rng, 2, 1.5);
                let y = random_vec(&mut rng, 2, 1.5);
                let l: f64 = rng.random();
                let mid = x.scale(l).add_scaled(1.0 - l, &y);
                let lhs = loss.eval(&mid).unwrap();
                let rhs = l * loss.eval(&x).unwrap() + (1.0 - l) * loss.eval(&y).unwrap();
                assert!(lhs <= rhs + 1e-9);
            }
            // radial monotonicity along random rays
            for _ in 0..50 {
                let dir = random_vec(&mut rng, 2, 1.0);
                let mut prev = f64::NEG_INFINITY;
                for k in 0..40 {
                    let p = loss.anchor.add_scaled(k as f64 * 0.05, &dir);
                    let v = loss.eval(&p).unwrap();
                    assert!(v >= prev);
                    prev = v;
                }
            }
            // f(anchor) equals the declared offset
            assert_eq!(loss.eval(&loss.anchor).unwrap(), family.offset());
        }
    }

    #[test]
    fn quadratic_strong_convexity() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let family = LossFamily::Quadratic { a: 0.4, b: 0.2 };
        let loss = LossSpec::new(random_vec(&mut rng, 3, 1.0), family).unwrap();
        let gamma = loss.strong_convexity();
        assert_eq!(gamma, 0.8);
        for _ in 0..500 {
            let x = random_vec(&mut rng, 3, 2.0);
            let y = random_vec(&mut rng, 3, 2.0);
            let g = loss.gradient(&y).unwrap().vector;
            let lower = loss.eval(&y).unwrap()
                + g.dot(&(&x - &y))
                + 0.5 * gamma * x.distance(&y).powi(2);
            assert!(loss.eval(&x).unwrap() >= lower - 1e-9);
        }
        assert_eq!(LossFamily::Norm.strong_convexity(), 0.0);
    }
}
