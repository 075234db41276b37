//! In-process simulation of the synchronous collectives used during gradient
//! aggregation.
//!
//! A [`CollectiveBus`] stands in for the interconnect. Every call is a
//! synchronization point: it only completes once all `worker_count`
//! contributions are present. Reductions are accumulated in a fixed ring
//! order, so identical inputs always give bit-identical outputs no matter
//! which worker "arrived" first. The bus keeps a [`CommStats`] ledger of how
//! many scalar elements crossed it; converting that to bytes is left to the
//! caller.

use std::ops::{Add, AddAssign};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CollectiveError {
    #[error("bus expects {expected} worker contributions, got {got}")]
    Participation { expected: usize, got: usize },
    #[error("worker {worker} contributed {got} elements, expected {expected}")]
    Dimension {
        worker: usize,
        expected: usize,
        got: usize,
    },
    #[error("worker {worker} contributed a non-finite value at element {index}")]
    NonFinite { worker: usize, index: usize },
    #[error("invalid ring order: {0}")]
    RingOrder(String),
    #[error("a bus needs at least one worker")]
    NoWorkers,
}

/// Cumulative communication counters. All fields only ever grow.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct CommStats {
    pub allreduce_calls: u64,
    pub allgather_calls: u64,
    /// Scalar elements moved through all-reduce.
    pub payload_elements: u64,
    /// Scalar elements moved through all-gather.
    pub gather_elements: u64,
}

impl CommStats {
    /// Counter increase since `earlier`, an older snapshot of the same ledger.
    pub fn since(&self, earlier: &CommStats) -> CommStats {
        CommStats {
            allreduce_calls: self.allreduce_calls - earlier.allreduce_calls,
            allgather_calls: self.allgather_calls - earlier.allgather_calls,
            payload_elements: self.payload_elements - earlier.payload_elements,
            gather_elements: self.gather_elements - earlier.gather_elements,
        }
    }

    pub fn total_elements(&self) -> u64 {
        self.payload_elements + self.gather_elements
    }
}

impl Add for CommStats {
    type Output = CommStats;

    fn add(self, rhs: CommStats) -> CommStats {
        CommStats {
            allreduce_calls: self.allreduce_calls + rhs.allreduce_calls,
            allgather_calls: self.allgather_calls + rhs.allgather_calls,
            payload_elements: self.payload_elements + rhs.payload_elements,
            gather_elements: self.gather_elements + rhs.gather_elements,
        }
    }
}

impl AddAssign for CommStats {
    fn add_assign(&mut self, rhs: CommStats) {
        *self = *self + rhs;
    }
}

/// Simulated synchronous interconnect for a fixed group of workers.
#[derive(Debug, Clone)]
pub struct CollectiveBus {
    worker_count: usize,
    ledger: CommStats,
    reduction_order: Vec<usize>,
}

impl CollectiveBus {
    /// Bus with the identity ring `0 -> 1 -> ... -> N-1`.
    pub fn new(worker_count: usize) -> Result<Self, CollectiveError> {
        Self::with_ring_order((0..worker_count).collect())
    }

    /// Bus whose reductions visit workers in `order`, which must be a
    /// permutation of `0..order.len()`.
    pub fn with_ring_order(order: Vec<usize>) -> Result<Self, CollectiveError> {
        if order.is_empty() {
            return Err(CollectiveError::NoWorkers);
        }
        let mut seen = vec![false; order.len()];
        for &w in &order {
            if w >= order.len() || std::mem::replace(&mut seen[w], true) {
                return Err(CollectiveError::RingOrder(format!(
                    "{order:?} is not a permutation of 0..{}",
                    order.len()
                )));
            }
        }
        Ok(Self {
            worker_count: order.len(),
            ledger: CommStats::default(),
            reduction_order: order,
        })
    }

    pub fn worker_count(&self) -> usize {
        self.worker_count
    }

    pub fn ledger(&self) -> CommStats {
        self.ledger
    }

    pub fn reduction_order(&self) -> &[usize] {
        &self.reduction_order
    }

    /// Elementwise sum of one vector per worker, indexed by worker.
    ///
    /// The accumulator starts at the first worker of the ring and adds the
    /// rest in ring order, so the floating-point result depends only on the
    /// inputs and the ring.
    pub fn all_reduce_sum<V: AsRef<[f64]>>(
        &mut self,
        contributions: &[V],
    ) -> Result<Vec<f64>, CollectiveError> {
        self.check_participation(contributions.len())?;
        let dim = contributions[0].as_ref().len();
        for (worker, c) in contributions.iter().enumerate() {
            let c = c.as_ref();
            if c.len() != dim {
                return Err(CollectiveError::Dimension {
                    worker,
                    expected: dim,
                    got: c.len(),
                });
            }
            check_finite(worker, c)?;
        }

        let mut acc = contributions[self.reduction_order[0]].as_ref().to_vec();
        for &worker in &self.reduction_order[1..] {
            for (a, x) in acc.iter_mut().zip(contributions[worker].as_ref()) {
                *a += x;
            }
        }

        self.ledger.allreduce_calls += 1;
        self.ledger.payload_elements += dim as u64;
        Ok(acc)
    }

    /// Collects one scalar per worker and hands every worker the full vector,
    /// in worker-index order.
    pub fn all_gather(&mut self, contributions: &[f64]) -> Result<Vec<f64>, CollectiveError> {
        self.check_participation(contributions.len())?;
        for (worker, &x) in contributions.iter().enumerate() {
            if !x.is_finite() {
                return Err(CollectiveError::NonFinite { worker, index: 0 });
            }
        }
        self.ledger.allgather_calls += 1;
        self.ledger.gather_elements += contributions.len() as u64;
        Ok(contributions.to_vec())
    }

    fn check_participation(&self, got: usize) -> Result<(), CollectiveError> {
        if got != self.worker_count {
            return Err(CollectiveError::Participation {
                expected: self.worker_count,
                got,
            });
        }
        Ok(())
    }
}

fn check_finite(worker: usize, values: &[f64]) -> Result<(), CollectiveError> {
    match values.iter().position(|x| !x.is_finite()) {
        Some(index) => Err(CollectiveError::NonFinite { worker, index }),
        None => Ok(()),
    }
}
