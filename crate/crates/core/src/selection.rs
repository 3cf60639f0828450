use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::domination::{dominates, DominationWeights};
use crate::error::{Error, Result};
use crate::objective_model::{EffectivenessMatrix, ObjectiveVector};

/// A binary test selection with its objective values and, once evaluated,
/// its normalized execution time and mutation score.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    pub include: Vec<bool>,
    pub objectives: ObjectiveVector,
    pub tet: Option<f64>,
    pub ms: Option<f64>,
}

impl Selection {
    pub fn new(m: &EffectivenessMatrix, include: Vec<bool>) -> Result<Self> {
        let objectives = m.objectives(&include)?;
        Ok(Self {
            include,
            objectives,
            tet: None,
            ms: None,
        })
    }

    pub fn size(&self) -> usize {
        self.include.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.include.iter().any(|&b| b)
    }

    /// `0`/`1` characters, one per test case.
    pub fn bits(&self) -> String {
        bits_string(&self.include)
    }
}

pub fn bits_string(include: &[bool]) -> String {
    include.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

pub fn parse_bits(bits: &str) -> Option<Vec<bool>> {
    bits.chars()
        .map(|c| match c {
            '1' => Some(true),
            '0' => Some(false),
            _ => None,
        })
        .collect()
}

/// Members not binary-dominated by any other member. Identical selections
/// and identical objective vectors are kept once (first occurrence); the
/// input order is preserved.
pub fn pareto_front(selections: &[Selection], w: &DominationWeights) -> Result<Vec<Selection>> {
    if selections.is_empty() {
        return Err(Error::InvalidInput(
            "cannot take the front of no selections".into(),
        ));
    }
    if let Some(s) = selections
        .iter()
        .find(|s| s.objectives.as_slice().len() != w.n_goals())
    {
        return Err(Error::mismatch(
            "objective vector",
            w.n_goals(),
            s.objectives.as_slice().len(),
        ));
    }

    let mut seen_bits = HashSet::new();
    let mut seen_objectives = HashSet::new();
    let unique: Vec<&Selection> = selections
        .iter()
        .filter(|s| seen_bits.insert(s.include.clone()))
        .filter(|s| seen_objectives.insert(s.objectives.0.map(f64::to_bits)))
        .collect();

    Ok(unique
        .iter()
        .filter(|s| {
            !unique.iter().any(|o| {
                dominates(
                    o.objectives.as_slice(),
                    s.objectives.as_slice(),
                    w.weights(),
                )
            })
        })
        .map(|s| (*s).clone())
        .collect())
}
