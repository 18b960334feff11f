//! Finite-rank countable compact sets and their derived sets.
//!
//! A set is a finite union of nodes. `Atom` is a single point. `Seq`
//! is a convergent sequence of shrunken copies of a child set together
//! with its limit: the `n`-th copy (`n >= start`) is centred at
//! `limit + scale / (n + 1)` and scaled by
//! `r_n = |scale| / (4 (n + 1) (n + 2))`, with the child living in
//! `[-1, 1]`. Copies are disjoint and only accumulate at the limit.

use crate::decimal;
use crate::error::{Error, Result};
use crate::tol::RANK_CAP;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SetNode {
    Atom {
        #[serde(with = "decimal")]
        at: f64,
    },
    Seq {
        #[serde(with = "decimal")]
        limit: f64,
        #[serde(with = "decimal")]
        scale: f64,
        start: u64,
        child: Box<SetNode>,
    },
}

impl SetNode {
    pub fn atom(at: f64) -> Self {
        SetNode::Atom { at }
    }

    pub fn seq(limit: f64, scale: f64, start: u64, child: SetNode) -> Self {
        SetNode::Seq { limit, scale, start, child: Box::new(child) }
    }

    /// Smallest closed interval holding the set.
    pub fn hull(&self) -> (f64, f64) {
        match self {
            SetNode::Atom { at } => (*at, *at),
            SetNode::Seq { limit, scale, start, child } => {
                let (clo, chi) = child.hull();
                let n = *start as f64;
                let center = limit + scale / (n + 1.0);
                let r = scale.abs() / (4.0 * (n + 1.0) * (n + 2.0));
                let (a, b) = (center + r * clo, center + r * chi);
                (a.min(*limit), b.max(*limit))
            }
        }
    }

    fn validate(&self, nested: bool) -> Result<()> {
        match self {
            SetNode::Atom { at } => {
                if !at.is_finite() || (nested && at.abs() > 1.0) {
                    return Err(Error::MalformedDescriptor(format!("atom {at} out of range")));
                }
                Ok(())
            }
            SetNode::Seq { limit, scale, child, .. } => {
                if !limit.is_finite() || !scale.is_finite() || *scale == 0.0 {
                    return Err(Error::MalformedDescriptor("sequence needs finite limit and nonzero scale".into()));
                }
                if nested {
                    let (lo, hi) = self.hull();
                    if lo < -1.0 || hi > 1.0 {
                        return Err(Error::MalformedDescriptor("nested sequence leaves [-1, 1]".into()));
                    }
                }
                child.validate(true)
            }
        }
    }

    /// Remove isolated points. `None` when nothing is left.
    fn derive(&self) -> Option<SetNode> {
        match self {
            SetNode::Atom { .. } => None,
            SetNode::Seq { limit, scale, start, child } => match child.derive() {
                None => Some(SetNode::Atom { at: *limit }),
                Some(c) => Some(SetNode::Seq { limit: *limit, scale: *scale, start: *start, child: Box::new(c) }),
            },
        }
    }

    /// Cantor-Bendixson rank: derivations needed to empty the set.
    pub fn rank(&self) -> usize {
        match self {
            SetNode::Atom { .. } => 1,
            SetNode::Seq { child, .. } => child.rank() + 1,
        }
    }

    /// The points of the set, keeping sequence terms up to index
    /// `start + terms`.
    pub fn points(&self, terms: u64, out: &mut Vec<f64>) {
        match self {
            SetNode::Atom { at } => out.push(*at),
            SetNode::Seq { limit, scale, start, child } => {
                out.push(*limit);
                let mut inner = Vec::new();
                child.points(terms, &mut inner);
                for n in *start..*start + terms {
                    let nf = n as f64;
                    let c = limit + scale / (nf + 1.0);
                    let r = scale.abs() / (4.0 * (nf + 1.0) * (nf + 2.0));
                    out.extend(inner.iter().map(|p| c + r * p));
                }
            }
        }
    }
}

/// `Y_0 ⊇ Y_1 ⊇ ...`, each level the previous minus its isolated points.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DerivedSetSequence {
    pub levels: Vec<Vec<SetNode>>,
}

impl DerivedSetSequence {
    /// Top-level nodes must have pairwise disjoint hulls.
    pub fn new(base: Vec<SetNode>) -> Result<Self> {
        for n in &base {
            n.validate(false)?;
        }
        let mut hulls: Vec<(f64, f64)> = base.iter().map(SetNode::hull).collect();
        hulls.sort_by(|a, b| a.0.total_cmp(&b.0));
        if hulls.windows(2).any(|w| w[1].0 <= w[0].1) {
            return Err(Error::MalformedDescriptor("top-level nodes overlap".into()));
        }
        Ok(DerivedSetSequence { levels: vec![base] })
    }

    pub fn last(&self) -> &[SetNode] {
        self.levels.last().map(Vec::as_slice).unwrap_or(&[])
    }

    /// Number of derivations taken so far.
    pub fn steps(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn is_exhausted(&self) -> bool {
        self.last().is_empty()
    }
}

pub fn derived_set_step(s: &DerivedSetSequence) -> Result<DerivedSetSequence> {
    if s.steps() >= RANK_CAP {
        return Err(Error::RankCapExceeded { cap: RANK_CAP });
    }
    let next: Vec<SetNode> = s.last().iter().filter_map(SetNode::derive).collect();
    let mut out = s.clone();
    out.levels.push(next);
    Ok(out)
}

/// Derive until empty; the step count is the rank.
pub fn derive_to_empty(base: Vec<SetNode>) -> Result<DerivedSetSequence> {
    let mut s = DerivedSetSequence::new(base)?;
    while !s.is_exhausted() {
        s = derived_set_step(&s)?;
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finite_set_empties_in_one_step() {
        let s = derive_to_empty(vec![SetNode::atom(1.0), SetNode::atom(2.0), SetNode::atom(3.0)]).unwrap();
        assert_eq!(s.steps(), 1);
    }

    #[test]
    fn harmonic_sequence_keeps_its_limit() {
        let y = SetNode::seq(0.0, 1.0, 0, SetNode::atom(0.0));
        let s1 = derived_set_step(&DerivedSetSequence::new(vec![y]).unwrap()).unwrap();
        assert_eq!(s1.last(), &[SetNode::atom(0.0)]);
        let s2 = derived_set_step(&s1).unwrap();
        assert!(s2.is_exhausted());
    }

    #[test]
    fn nested_sequences_have_rank_three() {
        let y = SetNode::seq(0.0, 1.0, 0, SetNode::seq(0.0, 1.0, 1, SetNode::atom(0.0)));
        assert_eq!(derive_to_empty(vec![y.clone()]).unwrap().steps(), 3);
        assert_eq!(y.rank(), 3);
    }

    #[test]
    fn rank_cap() {
        let mut deep = SetNode::atom(0.0);
        for _ in 0..40 {
            deep = SetNode::seq(0.0, 0.5, 1, deep);
        }
        let r = derive_to_empty(vec![SetNode::seq(10.0, 1.0, 0, SetNode::atom(0.0)), deep]);
        assert!(matches!(r, Err(Error::RankCapExceeded { cap: 32 })));
    }

    #[test]
    fn overlapping_nodes_rejected() {
        let r = DerivedSetSequence::new(vec![SetNode::atom(0.5), SetNode::seq(0.0, 1.0, 0, SetNode::atom(0.0))]);
        assert!(r.is_err());
    }
}
