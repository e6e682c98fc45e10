//! Best fixed decision in hindsight, `x* = argmin_{x∈K} Σ f_t(x)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::ConvexBody;
use crate::losses::{LossFamily, LossSpec};
use crate::vector::Vector;

const TOLERANCE: f64 = 1e-8;
const MAX_ITERATIONS: usize = 100_000;
const RESTARTS: usize = 5;
const WEISZFELD_ITERATIONS: usize = 20_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverMethod {
    ClosedForm,
    WeightedMedian,
    Weiszfeld,
    ProjectedGradient,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Comparator {
    pub point: Vector,
    /// `D* = Σ f_t(x*)`
    pub loss: f64,
    pub method: SolverMethod,
    /// False when the iterative solver ran out of budget.
    pub converged: bool,
}

/// Total loss `Σ f_t(x)`.
pub fn total_loss(losses: &[LossSpec], x: &Vector) -> Result<f64> {
    losses.iter().map(|l| l.eval(x)).sum()
}

fn check_losses(losses: &[LossSpec], body: &ConvexBody) -> Result<()> {
    if losses.is_empty() {
        return Err(Error::Argument("offline optimum needs at least one loss".into()));
    }
    for l in losses {
        l.anchor.check_dim(body.dim())?;
    }
    Ok(())
}

/// Picks the cheapest exact route for the loss mix, falling back to
/// projected gradient descent.
pub fn offline_optimum(losses: &[LossSpec], body: &ConvexBody) -> Result<Comparator> {
    check_losses(losses, body)?;
    if losses.iter().all(|l| matches!(l.family, LossFamily::Quadratic { .. })) {
        return quadratic_closed_form(losses, body);
    }
    if losses.iter().all(|l| l.family == LossFamily::Norm) {
        if body.dim() == 1 {
            return weighted_median(losses, body);
        }
        let median = weiszfeld(losses)?;
        if body.contains(&median.point, 0.0) {
            return Ok(median);
        }
    }
    offline_optimum_iterative(losses, body)
}

/// Summed quadratics `Σ a_t‖x − u_t‖²` are one isotropic quadratic around
/// the `a`-weighted mean, so its projection is the constrained minimiser.
pub fn quadratic_closed_form(losses: &[LossSpec], body: &ConvexBody) -> Result<Comparator> {
    check_losses(losses, body)?;
    let mut weighted = Vector::zeros(body.dim());
    let mut total_a = 0.0;
    for l in losses {
        let LossFamily::Quadratic { a, .. } = l.family else {
            return Err(Error::Argument("closed form needs quadratic losses".into()));
        };
        weighted = weighted.add_scaled(a, &l.anchor);
        total_a += a;
    }
    let point = body.project(&weighted.scale(1.0 / total_a))?;
    Ok(Comparator {
        loss: total_loss(losses, &point)?,
        point,
        method: SolverMethod::ClosedForm,
        converged: true,
    })
}

/// One-dimensional sum of absolute deviations: any median, clamped.
fn weighted_median(losses: &[LossSpec], body: &ConvexBody) -> Result<Comparator> {
    let mut xs: Vec<f64> = losses.iter().map(|l| l.anchor[0]).collect();
    xs.sort_by(f64::total_cmp);
    let median = xs[(xs.len() - 1) / 2];
    let point = body.project(&Vector::new(vec![median])?)?;
    Ok(Comparator {
        loss: total_loss(losses, &point)?,
        point,
        method: SolverMethod::WeightedMedian,
        converged: true,
    })
}

/// Geometric median by Weiszfeld iteration with the Vardi–Zhang correction
/// for iterates landing on an anchor.
fn weiszfeld(losses: &[LossSpec]) -> Result<Comparator> {
    let dim = losses[0].dim();
    let n = losses.len() as f64;
    let mut x = losses
        .iter()
        .fold(Vector::zeros(dim), |acc, l| &acc + &l.anchor)
        .scale(1.0 / n);
    let scale = losses.iter().map(|l| l.anchor.distance(&x)).fold(0.0, f64::max).max(1.0);
    let mut converged = false;
    for _ in 0..WEISZFELD_ITERATIONS {
        let mut num = Vector::zeros(dim);
        let mut den = 0.0;
        let mut pull = Vector::zeros(dim);
        let mut coincident = 0.0;
        for l in losses {
            let d = l.anchor.distance(&x);
            if d <= 1e-14 * scale {
                coincident += 1.0;
                continue;
            }
            num = num.add_scaled(1.0 / d, &l.anchor);
            den += 1.0 / d;
            pull = pull.add_scaled(1.0 / d, &(&l.anchor - &x));
        }
        if den == 0.0 {
            converged = true;
            break;
        }
        let target = num.scale(1.0 / den);
        let r = pull.norm();
        let next = if coincident > 0.0 {
            if r <= coincident {
                converged = true;
                break;
            }
            let w = coincident / r;
            target.scale(1.0 - w).add_scaled(w, &x)
        } else {
            target
        };
        let moved = next.distance(&x);
        x = next;
        if moved <= 1e-12 * scale {
            converged = true;
            break;
        }
    }
    Ok(Comparator {
        loss: total_loss(losses, &x)?,
        point: x,
        method: SolverMethod::Weiszfeld,
        converged,
    })
}

/// Projected gradient descent on `Σ f_t` with initial step `1/(L T)` and
/// backtracking, from the projected anchor mean and four seeded random
/// starts. The lowest objective wins.
pub fn offline_optimum_iterative(losses: &[LossSpec], body: &ConvexBody) -> Result<Comparator> {
    check_losses(losses, body)?;
    let dim = body.dim();
    let radius = 2.0 * body.radius_bound()
        + losses.iter().map(|l| l.anchor.norm()).fold(0.0, f64::max);
    let lipschitz = losses
        .iter()
        .map(|l| l.lipschitz_bound(radius))
        .fold(0.0, f64::max)
        .max(1e-12);
    let base_step = 1.0 / (lipschitz * losses.len() as f64);

    let mean = losses
        .iter()
        .fold(Vector::zeros(dim), |acc, l| &acc + &l.anchor)
        .scale(1.0 / losses.len() as f64);
    let mut starts = vec![body.project(&mean)?];
    let mut rng = ChaCha8Rng::seed_from_u64(0x0ff1_1e);
    let r = body.radius_bound();
    for _ in 1..RESTARTS {
        let raw = Vector::new((0..dim).map(|_| rng.random_range(-r..=r)).collect())?;
        starts.push(body.project(&raw)?);
    }

    let mut best: Option<Comparator> = None;
    for start in starts {
        let candidate = descend(losses, body, start, base_step)?;
        if best.as_ref().is_none_or(|b| candidate.loss < b.loss) {
            best = Some(candidate);
        }
    }
    Ok(best.expect("at least one start"))
}

fn objective_gradient(losses: &[LossSpec], x: &Vector) -> Result<Vector> {
    let mut g = Vector::zeros(x.dim());
    for l in losses {
        g = &g + &l.gradient(x)?.vector;
    }
    Ok(g)
}

fn descend(losses: &[LossSpec], body: &ConvexBody, start: Vector, base_step: f64) -> Result<Comparator> {
    let mut x = start;
    let mut fx = total_loss(losses, &x)?;
    let mut step = base_step;
    let mut converged = false;
    for _ in 0..MAX_ITERATIONS {
        let g = objective_gradient(losses, &x)?;
        let mut accepted = None;
        while step > 1e-300 {
            let y = body.project(&x.add_scaled(-step, &g))?;
            let fy = total_loss(losses, &y)?;
            let dist2 = y.distance(&x).powi(2);
            if fy <= fx - dist2 / (2.0 * step) + 1e-15 * fx.abs() {
                accepted = Some((y, fy));
                break;
            }
            step *= 0.5;
        }
        let Some((y, fy)) = accepted else {
            converged = true;
            break;
        };
        let moved = y.distance(&x);
        x = y;
        fx = fy;
        if moved <= TOLERANCE {
            converged = true;
            break;
        }
        step *= 1.5;
    }
    Ok(Comparator {
        point: x,
        loss: fx,
        method: SolverMethod::ProjectedGradient,
        converged,
    })
}
