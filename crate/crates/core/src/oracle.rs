//! Budgeted, logged access to a [`BlockKernel`].

use std::collections::HashSet;
use std::io::Write;

use crate::error::{Error, Result};
use crate::instance::BlockKernel;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QueryRecord {
    pub s: usize,
    pub r: usize,
    pub value: u8,
    /// Whether this query consumed budget (first time the pair was seen).
    pub charged: bool,
}

/// The only way learners read kernel entries. Charges one unit per
/// distinct unordered pair; repeats and transposes are free.
#[derive(Debug)]
pub struct BudgetedOracle<'k> {
    kernel: &'k BlockKernel,
    budget: usize,
    queried: HashSet<(usize, usize)>,
    log: Vec<QueryRecord>,
}

impl<'k> BudgetedOracle<'k> {
    pub fn new(kernel: &'k BlockKernel, budget: usize) -> Self {
        Self {
            kernel,
            budget,
            queried: HashSet::new(),
            log: Vec::new(),
        }
    }

    /// Direct access for the unlimited-budget reference learner.
    pub(crate) fn kernel(&self) -> &'k BlockKernel {
        self.kernel
    }

    pub fn m(&self) -> usize {
        self.kernel.m()
    }

    pub fn budget(&self) -> usize {
        self.budget
    }

    pub fn used(&self) -> usize {
        self.queried.len()
    }

    pub fn remaining(&self) -> usize {
        self.budget - self.queried.len()
    }

    pub fn is_known(&self, s: usize, r: usize) -> bool {
        self.queried.contains(&ordered(s, r))
    }

    pub fn query(&mut self, s: usize, r: usize) -> Result<u8> {
        let value = self.kernel.entry(s, r)?;
        let key = ordered(s, r);
        let charged = if self.queried.contains(&key) {
            false
        } else {
            if self.queried.len() >= self.budget {
                return Err(Error::BudgetExhausted { budget: self.budget });
            }
            self.queried.insert(key);
            true
        };
        self.log.push(QueryRecord { s, r, value, charged });
        Ok(value)
    }

    pub fn log(&self) -> &[QueryRecord] {
        &self.log
    }

    /// Bit `i` is set iff no logged query had both endpoints in block `i`.
    pub fn missed_blocks(&self) -> Vec<bool> {
        let mut missed = vec![true; self.kernel.d()];
        for q in &self.log {
            let a = self.kernel.slot(q.s).block;
            if a == self.kernel.slot(q.r).block {
                missed[a] = false;
            }
        }
        missed
    }

    pub fn missed_count(&self) -> usize {
        self.missed_blocks().iter().filter(|&&b| b).count()
    }

    /// Writes the log as CSV with columns `t,s,r,value,charged`; `t`, `s`
    /// and `r` are 1-based.
    pub fn write_log_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["t", "s", "r", "value", "charged"])?;
        for (t, q) in self.log.iter().enumerate() {
            w.write_record([
                (t + 1).to_string(),
                (q.s + 1).to_string(),
                (q.r + 1).to_string(),
                q.value.to_string(),
                u8::from(q.charged).to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn ordered(s: usize, r: usize) -> (usize, usize) {
    if s <= r {
        (s, r)
    } else {
        (r, s)
    }
}
