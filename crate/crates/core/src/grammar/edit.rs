//! Weighted edit distance between symbol sequences.

use super::GrammarError;

/// Per-operation weights. The default gives the classic Levenshtein
/// distance. Costs are validated at construction, so a value in hand is
/// always finite and non-negative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EditCosts {
    substitute: f64,
    insert: f64,
    delete: f64,
}

impl Default for EditCosts {
    fn default() -> Self {
        Self {
            substitute: 1.0,
            insert: 1.0,
            delete: 1.0,
        }
    }
}

impl EditCosts {
    pub fn new(substitute: f64, insert: f64, delete: f64) -> Result<Self, GrammarError> {
        for cost in [substitute, insert, delete] {
            if !(cost.is_finite() && cost >= 0.0) {
                return Err(GrammarError::BadCost(cost));
            }
        }
        Ok(Self {
            substitute,
            insert,
            delete,
        })
    }

    pub fn uniform(cost: f64) -> Result<Self, GrammarError> {
        Self::new(cost, cost, cost)
    }

    pub fn substitute(&self) -> f64 {
        self.substitute
    }

    pub fn insert(&self) -> f64 {
        self.insert
    }

    pub fn delete(&self) -> f64 {
        self.delete
    }
}

/// Minimum total cost of turning `a` into `b` with weighted substitutions,
/// insertions and deletions. Works over any element type with equality;
/// elements that are not equal to themselves (used for the unknown-prediction
/// marker) always incur the substitution cost.
pub fn edit_distance<T: PartialEq>(a: &[T], b: &[T], costs: &EditCosts) -> f64 {
    // one rolling row of the standard dynamic program, O(|a|·|b|) time
    let mut row: Vec<f64> = (0..=b.len()).map(|j| j as f64 * costs.insert).collect();
    for x in a {
        let mut diagonal = row[0];
        row[0] += costs.delete;
        for (j, y) in b.iter().enumerate() {
            let replaced = if x == y {
                diagonal
            } else {
                diagonal + costs.substitute
            };
            let inserted = row[j] + costs.insert;
            let deleted = row[j + 1] + costs.delete;
            let best = replaced.min(inserted).min(deleted);
            diagonal = row[j + 1];
            row[j + 1] = best;
        }
    }
    row[b.len()]
}
