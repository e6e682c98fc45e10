//! Delay schedules and the feedback buffer.
//!
//! Round `s` with delay `d_s >= 1` becomes usable at the end of round
//! `s + d_s - 1`, so `s` belongs to exactly one feedback set
//! `F_t = { s : s + d_s - 1 = t }`.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DelaySchedule {
    /// Every round waits `tau` extra rounds: `d_t = tau + 1`.
    Fixed { tau: usize },
    /// `d_t` drawn i.i.d. uniform on `[1, d_max]` from a seeded generator.
    Adversarial { d_max: usize, seed: u64 },
    /// Explicit `d_1, d_2, ...`.
    Explicit { delays: Vec<usize> },
}

impl DelaySchedule {
    /// Fixed extra delay, if the schedule has one.
    pub fn fixed_tau(&self) -> Option<usize> {
        match self {
            DelaySchedule::Fixed { tau } => Some(*tau),
            _ => None,
        }
    }

    /// The delays `d_1..d_T`.
    pub fn delays(&self, horizon: usize) -> Result<Vec<usize>> {
        match self {
            DelaySchedule::Fixed { tau } => Ok(vec![tau + 1; horizon]),
            DelaySchedule::Adversarial { d_max, seed } => {
                if *d_max < 1 {
                    return Err(Error::Argument("d_max must be >= 1".into()));
                }
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                Ok((0..horizon).map(|_| rng.random_range(1..=*d_max)).collect())
            }
            DelaySchedule::Explicit { delays } => {
                if delays.len() < horizon {
                    return Err(Error::Config(format!(
                        "explicit delay list has {} entries, horizon is {horizon}",
                        delays.len()
                    )));
                }
                if let Some(i) = delays.iter().position(|&d| d == 0) {
                    return Err(Error::Argument(format!("delay at round {} is 0", i + 1)));
                }
                Ok(delays[..horizon].to_vec())
            }
        }
    }

    /// Reads one delay per line; blank lines and `#` comments are skipped.
    pub fn parse_explicit(text: &str) -> Result<Self> {
        let mut delays = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let d: usize = line.parse().map_err(|_| {
                Error::Argument(format!("line {}: not a non-negative integer: {line:?}", lineno + 1))
            })?;
            if d == 0 {
                return Err(Error::Argument(format!("line {}: delay must be >= 1", lineno + 1)));
            }
            delays.push(d);
        }
        Ok(DelaySchedule::Explicit { delays })
    }

    pub fn load_explicit(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::parse_explicit(&text)
    }
}

/// Pending deliveries and the running delay sum.
#[derive(Clone, Debug, Default)]
pub struct FeedbackBuffer {
    pending: BTreeMap<usize, BTreeSet<usize>>,
    pushed: BTreeSet<usize>,
    delivered: BTreeSet<usize>,
    delay_sum: u64,
}

impl FeedbackBuffer {
    pub fn new() -> Self {
        Self::default()
    }

    /// Schedules source round `source` for delivery at round `source + delay - 1`.
    pub fn push(&mut self, source: usize, delay: usize) -> Result<()> {
        if source == 0 {
            return Err(Error::Argument("rounds are numbered from 1".into()));
        }
        if delay == 0 {
            return Err(Error::Argument(format!("delay of round {source} must be >= 1")));
        }
        if !self.pushed.insert(source) {
            return Err(Error::Logic(format!("round {source} pushed twice")));
        }
        self.pending
            .entry(source + delay - 1)
            .or_default()
            .insert(source);
        self.delay_sum += delay as u64;
        Ok(())
    }

    /// `F_t`, without consuming it.
    pub fn ready_at(&self, t: usize) -> Vec<usize> {
        self.pending
            .get(&t)
            .map(|s| s.iter().copied().collect())
            .unwrap_or_default()
    }

    /// Removes and returns `F_t`, in increasing source order.
    pub fn take(&mut self, t: usize) -> Vec<usize> {
        let ready: Vec<usize> = self
            .pending
            .remove(&t)
            .map(|s| s.into_iter().collect())
            .unwrap_or_default();
        self.delivered.extend(ready.iter().copied());
        ready
    }

    /// Delivers everything still pending, grouped by delivery round. Used to
    /// close the accounting after the horizon; learners never see these.
    pub fn drain_remaining(&mut self) -> Vec<(usize, Vec<usize>)> {
        let rest = std::mem::take(&mut self.pending);
        rest.into_iter()
            .map(|(t, set)| {
                self.delivered.extend(set.iter().copied());
                (t, set.into_iter().collect())
            })
            .collect()
    }

    pub fn was_delivered(&self, source: usize) -> bool {
        self.delivered.contains(&source)
    }

    /// `D = Σ d_t` over every push so far.
    pub fn delay_sum(&self) -> u64 {
        self.delay_sum
    }

    pub fn pending_count(&self) -> usize {
        self.pending.values().map(BTreeSet::len).sum()
    }
}
