//! Deterministic operation counting.
//!
//! The counter tallies oracle entries touched, BFS arc scans and priority-queue
//! operations. Budgets are expressed in the same unit so that halting is
//! independent of wall clock and thread schedule.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BudgetExceeded {
    pub spent: u64,
    pub budget: u64,
}

#[derive(Debug, Clone)]
pub struct WorkCounter {
    spent: u64,
    budget: u64,
}

impl Default for WorkCounter {
    fn default() -> Self {
        Self::unlimited()
    }
}

impl WorkCounter {
    pub fn unlimited() -> Self {
        WorkCounter { spent: 0, budget: u64::MAX }
    }

    pub fn with_budget(budget: u64) -> Self {
        WorkCounter { spent: 0, budget }
    }

    #[inline]
    pub fn charge(&mut self, ops: u64) -> Result<(), BudgetExceeded> {
        self.spent = self.spent.saturating_add(ops);
        if self.spent > self.budget {
            Err(BudgetExceeded { spent: self.spent, budget: self.budget })
        } else {
            Ok(())
        }
    }

    /// Adds work that must be recorded even if it overruns the budget.
    pub fn record(&mut self, ops: u64) {
        self.spent = self.spent.saturating_add(ops);
    }

    pub fn spent(&self) -> u64 {
        self.spent
    }

    pub fn budget(&self) -> u64 {
        self.budget
    }

    pub fn remaining(&self) -> u64 {
        self.budget.saturating_sub(self.spent)
    }

    pub fn is_exhausted(&self) -> bool {
        self.spent > self.budget
    }
}
