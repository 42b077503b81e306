//! Continuous-state branching processes with and without immigration, and
//! the two-type process of prolific counts and mass.

mod cb;
mod cir;
mod twotype;

pub use cb::{simulate_cb, simulate_cbi, simulate_cbi_with, Immigration};
pub use cir::cir_step;
pub use twotype::{simulate_twotype, twotype_generator, twotype_semigroup, TwoTypeState};

use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BranchConfig {
    /// Time step; the diffusion part is exact, jumps are placed at step ends.
    pub dt: f64,
    /// Maximum number of recorded states.
    pub event_budget: usize,
}

impl Default for BranchConfig {
    fn default() -> Self {
        BranchConfig {
            dt: 1e-3,
            event_budget: 10_000_000,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BranchTerminal {
    Horizon,
    AbsorbedAtZero,
    /// The mass exploded (killing of the underlying Lévy process) or all
    /// prolific lines were killed.
    Killed,
}

/// A recorded trajectory. `n` is empty for one-type processes.
#[derive(Clone, Debug, PartialEq)]
pub struct BranchingPath {
    pub times: Vec<f64>,
    pub z: Vec<f64>,
    pub n: Vec<u64>,
    pub terminal: BranchTerminal,
}

impl BranchingPath {
    fn start(z: f64, n: Option<u64>) -> Self {
        BranchingPath {
            times: vec![0.0],
            z: vec![z],
            n: n.into_iter().collect(),
            terminal: BranchTerminal::Horizon,
        }
    }

    fn push(&mut self, t: f64, z: f64, n: Option<u64>, budget: usize) -> crate::Result<()> {
        if self.times.len() >= budget {
            return Err(crate::Error::BudgetExceeded(format!(
                "more than {budget} recorded states"
            )));
        }
        self.times.push(t);
        self.z.push(z);
        if let Some(n) = n {
            self.n.push(n);
        }
        Ok(())
    }

    /// Mass at the end of the run (0 after absorption).
    pub fn final_z(&self) -> f64 {
        *self.z.last().unwrap()
    }

    pub fn final_n(&self) -> Option<u64> {
        self.n.last().copied()
    }

    /// State at time `t` (right-continuous); absorbed paths stay at 0.
    pub fn z_at(&self, t: f64) -> f64 {
        let i = self.times.partition_point(|&s| s <= t);
        self.z[i.saturating_sub(1)]
    }
}
