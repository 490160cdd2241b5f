//! Counter-addressed random streams.
//!
//! A stream is ChaCha20 keyed by the master seed with the replication id as the
//! 64-bit stream selector. Every draw consumes exactly four 32-bit words, so draw
//! `t` of replication `r` always reads words `4t..4t+4` of stream `r` and its value
//! depends only on `(master_seed, r, t)`.

use rand_chacha::ChaCha20Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

const WORDS_PER_DRAW: u128 = 4;

/// Unit-variance, mean-zero innovation laws.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InnovationDist {
    Gaussian,
    /// `+1` or `-1` with equal probability.
    Rademacher,
    /// Uniform on `[-sqrt 3, sqrt 3]`.
    #[serde(alias = "uniform")]
    UniformUnitVar,
}

impl InnovationDist {
    pub const ALL: [InnovationDist; 3] = [
        InnovationDist::Gaussian,
        InnovationDist::Rademacher,
        InnovationDist::UniformUnitVar,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            InnovationDist::Gaussian => "gaussian",
            InnovationDist::Rademacher => "rademacher",
            InnovationDist::UniformUnitVar => "uniform-unit-var",
        }
    }
}

impl fmt::Display for InnovationDist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for InnovationDist {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(InnovationDist::UniformUnitVar),
            _ => Self::ALL
                .into_iter()
                .find(|d| d.name() == s)
                .ok_or_else(|| Error::InvalidConfig(format!("unknown innovation law '{s}'"))),
        }
    }
}

pub struct RngStream {
    master_seed: u64,
    replication_id: u64,
    counter: u64,
    core: ChaCha20Rng,
}

impl RngStream {
    pub fn new(master_seed: u64, replication_id: u64) -> Self {
        let mut core = ChaCha20Rng::seed_from_u64(master_seed);
        core.set_stream(replication_id);
        Self {
            master_seed,
            replication_id,
            counter: 0,
            core,
        }
    }

    /// Replication id for replication `rep` of ladder point `point`.
    pub fn replication_id(point: u32, rep: u32) -> u64 {
        (u64::from(point) << 32) | u64::from(rep)
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn id(&self) -> u64 {
        self.replication_id
    }

    /// Index of the next draw.
    pub fn counter(&self) -> u64 {
        self.counter
    }

    /// Repositions the stream so the next draw is draw `t`.
    pub fn seek(&mut self, t: u64) {
        self.core.set_word_pos(u128::from(t) * WORDS_PER_DRAW);
        self.counter = t;
    }

    fn words(&mut self) -> (u64, u64) {
        self.counter += 1;
        (self.core.next_u64(), self.core.next_u64())
    }

    /// Standard normal by the Box-Muller cosine branch.
    pub fn normal(&mut self) -> f64 {
        let (x, y) = self.words();
        let u1 = ((x >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64);
        let u2 = (y >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    pub fn draw(&mut self, dist: InnovationDist) -> f64 {
        match dist {
            InnovationDist::Gaussian => self.normal(),
            InnovationDist::Rademacher => {
                let (x, _) = self.words();
                if x >> 63 == 1 {
                    1.0
                } else {
                    -1.0
                }
            }
            InnovationDist::UniformUnitVar => {
                let (x, _) = self.words();
                let u = (x >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
                3f64.sqrt() * (2.0 * u - 1.0)
            }
        }
    }

    pub fn fill(&mut self, dist: InnovationDist, out: &mut [f64]) {
        for v in out {
            *v = self.draw(dist);
        }
    }
}
