use crate::cost::CostMatrix;
use crate::error::Result;

/// A cost that may change with the step index.
///
/// Implementations must be pure in `step`: asking twice for the same step
/// returns the same matrix.
pub trait CostProcess {
    fn n(&self) -> usize;

    fn cost_at(&self, step: usize) -> Result<CostMatrix>;

    /// Ground-truth assignment, if the process has one.
    fn reference(&self) -> Option<&[usize]> {
        None
    }
}

/// The same cost at every step.
#[derive(Debug, Clone)]
pub struct StaticCost {
    pub cost: CostMatrix,
    pub reference: Option<Vec<usize>>,
}

impl StaticCost {
    pub fn new(cost: CostMatrix) -> Self {
        Self {
            cost,
            reference: None,
        }
    }

    pub fn with_reference(cost: CostMatrix, reference: Vec<usize>) -> Self {
        Self {
            cost,
            reference: Some(reference),
        }
    }
}

impl CostProcess for StaticCost {
    fn n(&self) -> usize {
        self.cost.n()
    }

    fn cost_at(&self, _step: usize) -> Result<CostMatrix> {
        Ok(self.cost.clone())
    }

    fn reference(&self) -> Option<&[usize]> {
        self.reference.as_deref()
    }
}

/// Costs supplied as an explicit list; the last one repeats forever.
#[derive(Debug, Clone)]
pub struct ScriptedCost {
    pub costs: Vec<CostMatrix>,
    pub reference: Option<Vec<usize>>,
}

impl CostProcess for ScriptedCost {
    fn n(&self) -> usize {
        self.costs[0].n()
    }

    fn cost_at(&self, step: usize) -> Result<CostMatrix> {
        Ok(self.costs[step.min(self.costs.len() - 1)].clone())
    }

    fn reference(&self) -> Option<&[usize]> {
        self.reference.as_deref()
    }
}
