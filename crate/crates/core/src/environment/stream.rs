use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::ConvexBody;
use crate::vector::Vector;

/// One agent's context: the part seen on arrival and the delayed part.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContextPair {
    pub known: Vector,
    pub hidden: Vector,
}

impl ContextPair {
    pub fn new(known: Vector, hidden: Vector) -> Result<Self> {
        if known.dim() < hidden.dim() {
            return Err(Error::Argument(format!(
                "known context dimension {} is smaller than hidden dimension {}",
                known.dim(),
                hidden.dim()
            )));
        }
        Ok(ContextPair { known, hidden })
    }
}

/// How contexts are generated.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum StreamSpec {
    /// Coordinate pairs `(x_k_i, x_u_i)` are bivariate normal with the given
    /// mean, variance and correlation; surplus known coordinates are
    /// independent with the same marginal.
    CorrelatedGaussian {
        mean: f64,
        variance: f64,
        rho: f64,
        known_dim: usize,
        hidden_dim: usize,
    },
    /// Hidden context uniform over a polygon; known context independent
    /// normal with the given mean and variance.
    PolygonUniform {
        polygon: ConvexBody,
        known_mean: f64,
        known_variance: f64,
        known_dim: usize,
    },
    Explicit { rows: Vec<ContextPair> },
}

impl StreamSpec {
    pub fn known_dim(&self) -> usize {
        match self {
            StreamSpec::CorrelatedGaussian { known_dim, .. }
            | StreamSpec::PolygonUniform { known_dim, .. } => *known_dim,
            StreamSpec::Explicit { rows } => rows.first().map_or(0, |r| r.known.dim()),
        }
    }

    pub fn hidden_dim(&self) -> usize {
        match self {
            StreamSpec::CorrelatedGaussian { hidden_dim, .. } => *hidden_dim,
            StreamSpec::PolygonUniform { .. } => 2,
            StreamSpec::Explicit { rows } => rows.first().map_or(0, |r| r.hidden.dim()),
        }
    }

    /// Rounds available, `None` for generated streams.
    pub fn len(&self) -> Option<usize> {
        match self {
            StreamSpec::Explicit { rows } => Some(rows.len()),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (k, h) = (self.known_dim(), self.hidden_dim());
        if h == 0 || k < h {
            return Err(Error::Config(format!(
                "stream dimensions must satisfy known >= hidden >= 1 (known {k}, hidden {h})"
            )));
        }
        match self {
            StreamSpec::CorrelatedGaussian {
                mean, variance, rho, ..
            } => {
                if !mean.is_finite() || !(*variance > 0.0) || !(-1.0..=1.0).contains(rho) {
                    return Err(Error::Config(format!(
                        "gaussian stream needs finite mean, variance > 0, rho in [-1, 1] (got {mean}, {variance}, {rho})"
                    )));
                }
            }
            StreamSpec::PolygonUniform {
                polygon,
                known_mean,
                known_variance,
                ..
            } => {
                if polygon.triangle_fan().is_none() {
                    return Err(Error::Config("polygon stream needs a polygon body".into()));
                }
                if !known_mean.is_finite() || !(*known_variance > 0.0) {
                    return Err(Error::Config("polygon stream needs known variance > 0".into()));
                }
            }
            StreamSpec::Explicit { rows } => {
                if rows
                    .iter()
                    .any(|r| r.known.dim() != k || r.hidden.dim() != h)
                {
                    return Err(Error::Config("explicit stream rows have inconsistent dimensions".into()));
                }
            }
        }
        Ok(())
    }

    /// Parses CSV rows `x_k coords..., x_u coords...`. A non-numeric first row
    /// is taken as a header.
    pub fn parse_csv(text: &str, known_dim: usize, hidden_dim: usize) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let mut rows = Vec::new();
        for (i, record) in reader.records().enumerate() {
            let record = record?;
            let parsed: std::result::Result<Vec<f64>, _> =
                record.iter().map(str::parse::<f64>).collect();
            let values = match parsed {
                Ok(v) => v,
                Err(_) if i == 0 => continue,
                Err(e) => {
                    return Err(Error::Argument(format!("csv row {}: {e}", i + 1)));
                }
            };
            if values.len() != known_dim + hidden_dim {
                return Err(Error::Argument(format!(
                    "csv row {}: expected {} columns, found {}",
                    i + 1,
                    known_dim + hidden_dim,
                    values.len()
                )));
            }
            let known = Vector::new(values[..known_dim].to_vec())?;
            let hidden = Vector::new(values[known_dim..].to_vec())?;
            rows.push(ContextPair::new(known, hidden)?);
        }
        Ok(StreamSpec::Explicit { rows })
    }

    pub fn load_csv(path: &Path, known_dim: usize, hidden_dim: usize) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::parse_csv(&text, known_dim, hidden_dim)
    }
}

/// Bodies that generated contexts are projected into.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContextBodies {
    pub known: ConvexBody,
    pub hidden: ConvexBody,
}

/// A seeded, deterministic source of context pairs.
#[derive(Clone, Debug)]
pub struct ContextStream {
    spec: StreamSpec,
    bodies: Option<ContextBodies>,
    rng: ChaCha8Rng,
    cursor: usize,
    // area-weighted cumulative distribution over the polygon's triangle fan
    fan: Vec<([[f64; 2]; 3], f64)>,
}

impl ContextStream {
    /// Generated draws are projected into `bodies` when given.
    pub fn new(spec: StreamSpec, bodies: Option<ContextBodies>, seed: u64) -> Result<Self> {
        spec.validate()?;
        if let Some(b) = &bodies {
            if b.known.dim() != spec.known_dim() || b.hidden.dim() != spec.hidden_dim() {
                return Err(Error::Config("context bodies do not match stream dimensions".into()));
            }
        }
        let fan = match &spec {
            StreamSpec::PolygonUniform { polygon, .. } => {
                let tris = polygon.triangle_fan().expect("validated polygon");
                let total: f64 = tris.iter().map(|(_, a)| a).sum();
                let mut acc = 0.0;
                tris.into_iter()
                    .map(|(tri, area)| {
                        acc += area / total;
                        (tri, acc)
                    })
                    .collect()
            }
            _ => Vec::new(),
        };
        Ok(ContextStream {
            spec,
            bodies,
            rng: ChaCha8Rng::seed_from_u64(seed),
            cursor: 0,
            fan,
        })
    }

    pub fn spec(&self) -> &StreamSpec {
        &self.spec
    }

    /// The next context, or `None` once an explicit stream is exhausted.
    pub fn next_context(&mut self) -> Result<Option<ContextPair>> {
        let pair = match &self.spec {
            StreamSpec::Explicit { rows } => {
                let Some(row) = rows.get(self.cursor) else {
                    return Ok(None);
                };
                self.cursor += 1;
                return Ok(Some(row.clone()));
            }
            &StreamSpec::CorrelatedGaussian {
                mean,
                variance,
                rho,
                known_dim,
                hidden_dim,
            } => {
                let sd = variance.sqrt();
                let tail = (1.0 - rho * rho).max(0.0).sqrt();
                let mut known = Vec::with_capacity(known_dim);
                let mut hidden = Vec::with_capacity(hidden_dim);
                for i in 0..known_dim {
                    let z1: f64 = self.rng.sample(StandardNormal);
                    known.push(mean + sd * z1);
                    if i < hidden_dim {
                        let z2: f64 = self.rng.sample(StandardNormal);
                        hidden.push(mean + sd * (rho * z1 + tail * z2));
                    }
                }
                ContextPair::new(Vector::new(known)?, Vector::new(hidden)?)?
            }
            &StreamSpec::PolygonUniform {
                known_mean,
                known_variance,
                known_dim,
                ..
            } => {
                let hidden = self.sample_polygon();
                let sd = known_variance.sqrt();
                let known = (0..known_dim)
                    .map(|_| known_mean + sd * self.rng.sample::<f64, _>(StandardNormal))
                    .collect();
                ContextPair::new(Vector::new(known)?, Vector::new(hidden.to_vec())?)?
            }
        };
        self.cursor += 1;
        match &self.bodies {
            Some(b) => Ok(Some(ContextPair {
                known: b.known.project(&pair.known)?,
                hidden: b.hidden.project(&pair.hidden)?,
            })),
            None => Ok(Some(pair)),
        }
    }

    fn sample_polygon(&mut self) -> [f64; 2] {
        let u: f64 = self.rng.random();
        let idx = self
            .fan
            .iter()
            .position(|(_, cdf)| u < *cdf)
            .unwrap_or(self.fan.len() - 1);
        let [a, b, c] = self.fan[idx].0;
        let (mut r1, mut r2): (f64, f64) = (self.rng.random(), self.rng.random());
        if r1 + r2 > 1.0 {
            r1 = 1.0 - r1;
            r2 = 1.0 - r2;
        }
        [
            a[0] + r1 * (b[0] - a[0]) + r2 * (c[0] - a[0]),
            a[1] + r1 * (b[1] - a[1]) + r2 * (c[1] - a[1]),
        ]
    }
}
