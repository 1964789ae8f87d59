use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::io::NodeNames;
use crate::update::{EdgeUpdate, UpdateKind};

/// Edge-update budget, optionally split between additions and deletions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budget {
    pub beta: usize,
    pub beta_add: Option<usize>,
    pub beta_del: Option<usize>,
}

/// `ceil(frac * size)`, ignoring floating noise just above an integer.
pub fn fraction_of(frac: f64, size: usize) -> usize {
    let x = frac * size as f64;
    (x - 1e-9).ceil().max(0.0) as usize
}

impl Budget {
    pub fn uniform(beta: usize) -> Self {
        Self {
            beta,
            beta_add: None,
            beta_del: None,
        }
    }

    pub fn split(beta_add: usize, beta_del: usize) -> Self {
        Self {
            beta: beta_add + beta_del,
            beta_add: Some(beta_add),
            beta_del: Some(beta_del),
        }
    }

    /// `ceil(frac * size)` updates.
    pub fn from_fraction(frac: f64, size: usize) -> Result<Self> {
        if !(frac >= 0.0 && frac.is_finite()) {
            return Err(Error::InvalidParameters(format!(
                "budget fraction {frac} must be a non-negative number"
            )));
        }
        Ok(Self::uniform(fraction_of(frac, size)))
    }

    /// Splits `beta` into `round(add_frac * beta)` additions and the rest as
    /// deletions. The two fractions must sum to one.
    pub fn with_split_fractions(self, add_frac: f64, del_frac: f64) -> Result<Self> {
        if add_frac < 0.0 || del_frac < 0.0 || ((add_frac + del_frac) - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParameters(format!(
                "split fractions {add_frac} + {del_frac} must be non-negative and sum to 1"
            )));
        }
        let add = (add_frac * self.beta as f64).round() as usize;
        Ok(Self::split(
            add.min(self.beta),
            self.beta - add.min(self.beta),
        ))
    }

    pub fn tracker(&self) -> BudgetTracker {
        BudgetTracker {
            total: self.beta,
            add: self.beta_add,
            del: self.beta_del,
        }
    }
}

/// Remaining budget while a deceptor runs.
#[derive(Debug, Clone, Copy)]
pub struct BudgetTracker {
    total: usize,
    add: Option<usize>,
    del: Option<usize>,
}

impl BudgetTracker {
    pub fn exhausted(&self) -> bool {
        self.total == 0 || (!self.can_add() && !self.can_delete())
    }

    pub fn can_add(&self) -> bool {
        self.total > 0 && self.add != Some(0)
    }

    pub fn can_delete(&self) -> bool {
        self.total > 0 && self.del != Some(0)
    }

    pub fn consume(&mut self, kind: UpdateKind) {
        self.total -= 1;
        let slot = if kind.is_addition() {
            &mut self.add
        } else {
            &mut self.del
        };
        if let Some(n) = slot {
            *n -= 1;
        }
    }
}

/// Ordered updates produced by a deceptor.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct UpdatePlan {
    pub updates: Vec<EdgeUpdate>,
    pub per_step_loss: Vec<f64>,
    pub terminated_early: bool,
}

impl UpdatePlan {
    pub fn push(&mut self, update: EdgeUpdate) {
        self.per_step_loss.push(update.loss);
        self.updates.push(update);
    }

    pub fn len(&self) -> usize {
        self.updates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.updates.is_empty()
    }

    pub fn additions(&self) -> usize {
        self.updates.iter().filter(|u| u.kind.is_addition()).count()
    }

    pub fn deletions(&self) -> usize {
        self.len() - self.additions()
    }

    pub fn total_loss(&self) -> f64 {
        self.per_step_loss.iter().sum()
    }

    /// Replays the plan on a copy of `g`.
    pub fn apply_to(&self, g: &Graph) -> Result<Graph> {
        let mut out = g.clone();
        for u in &self.updates {
            u.apply(&mut out)?;
        }
        Ok(out)
    }

    pub fn records(&self, names: &NodeNames) -> Vec<PlanRecord> {
        self.updates
            .iter()
            .enumerate()
            .map(|(i, u)| PlanRecord {
                step: i + 1,
                kind: u.kind,
                u: names.name(u.u).to_owned(),
                v: names.name(u.v).to_owned(),
                loss: u.loss,
            })
            .collect()
    }
}

/// One plan step with node names restored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanRecord {
    pub step: usize,
    pub kind: UpdateKind,
    pub u: String,
    pub v: String,
    pub loss: f64,
}
