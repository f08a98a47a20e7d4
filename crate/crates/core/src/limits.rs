use std::time::{Duration, Instant};

/// Node and wall-clock budgets for the exact searches. `None` means unbounded.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Limits {
    pub max_nodes: Option<u64>,
    pub max_seconds: Option<f64>,
}

impl Limits {
    pub fn nodes(max_nodes: u64) -> Self {
        Limits {
            max_nodes: Some(max_nodes),
            max_seconds: None,
        }
    }
}

/// Counts nodes and checks the clock every 1024 nodes. `Instant` is only
/// touched when a time budget is set, so unbounded searches stay usable on
/// targets without a clock.
pub(crate) struct Budget {
    limits: Limits,
    started: Option<Instant>,
    pub nodes: u64,
    exhausted: bool,
}

impl Budget {
    pub fn new(limits: Limits) -> Self {
        Budget {
            limits,
            started: limits.max_seconds.map(|_| Instant::now()),
            nodes: 0,
            exhausted: false,
        }
    }

    /// Registers one node; returns false once any budget is exhausted.
    pub fn tick(&mut self) -> bool {
        if self.exhausted {
            return false;
        }
        self.nodes += 1;
        if self.limits.max_nodes.is_some_and(|m| self.nodes > m) {
            self.exhausted = true;
        } else if self.nodes.is_multiple_of(1024) {
            if let (Some(start), Some(secs)) = (self.started, self.limits.max_seconds) {
                if start.elapsed() > Duration::from_secs_f64(secs) {
                    self.exhausted = true;
                }
            }
        }
        !self.exhausted
    }

    pub fn exhausted(&self) -> bool {
        self.exhausted
    }
}
