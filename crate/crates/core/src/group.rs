//! Finitely generated groups given by named generators, and words in them.

use crate::error::{Error, Result};
use crate::expr::HomeoExpr;
use crate::interval::IntervalQ;
use crate::tol::Tolerances;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::fmt;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Generator {
    pub name: String,
    pub map: HomeoExpr,
}

/// Declared subgroups, each a list of generator names.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Subgroups {
    #[serde(rename = "A", skip_serializing_if = "Option::is_none")]
    pub a: Option<Vec<String>>,
    #[serde(rename = "B", skip_serializing_if = "Option::is_none")]
    pub b: Option<Vec<String>>,
    #[serde(rename = "Gamma", skip_serializing_if = "Option::is_none")]
    pub gamma: Option<Vec<String>>,
    /// A normal series `H_1, H_2, ...`, smallest first.
    #[serde(rename = "H", skip_serializing_if = "Option::is_none")]
    pub series: Option<Vec<Vec<String>>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Budget {
    pub word_length: usize,
    pub levels: usize,
    pub iterates: usize,
    pub samples: usize,
    pub wall_clock_secs: f64,
}

impl Default for Budget {
    fn default() -> Self {
        Budget { word_length: 6, levels: 8, iterates: 10_000, samples: 1000, wall_clock_secs: 60.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupSpec {
    pub name: String,
    pub generators: Vec<Generator>,
    #[serde(default)]
    pub subgroups: Subgroups,
    pub window: IntervalQ,
    #[serde(default)]
    pub budgets: Budget,
    #[serde(default)]
    pub tolerances: Tolerances,
}

impl GroupSpec {
    pub fn new(name: &str, generators: Vec<(&str, HomeoExpr)>, window: IntervalQ) -> Self {
        GroupSpec {
            name: name.to_string(),
            generators: generators.into_iter().map(|(n, map)| Generator { name: n.to_string(), map }).collect(),
            subgroups: Subgroups::default(),
            window,
            budgets: Budget::default(),
            tolerances: Tolerances::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.generators.is_empty() {
            return Err(Error::Precondition("a group needs at least one generator".into()));
        }
        let mut seen = BTreeSet::new();
        for g in &self.generators {
            if !seen.insert(g.name.as_str()) {
                return Err(Error::Precondition(format!("duplicate generator name {:?}", g.name)));
            }
            g.map.validate().map_err(|e| Error::InvalidMap(format!("generator {}: {e}", g.name)))?;
        }
        if !self.window.is_bounded() {
            return Err(Error::Precondition(format!("window {} must be finite", self.window)));
        }
        let s = &self.subgroups;
        let lists = [&s.a, &s.b, &s.gamma].into_iter().flatten().chain(s.series.iter().flatten());
        for list in lists {
            for n in list {
                if !seen.contains(n.as_str()) {
                    return Err(Error::Precondition(format!("subgroup member {n:?} is not a generator")));
                }
            }
        }
        Ok(())
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.generators.iter().position(|g| g.name == name)
    }

    pub fn map(&self, i: usize) -> &HomeoExpr {
        &self.generators[i].map
    }

    /// Generator indices sorted by name, the order used by word searches.
    pub fn name_order(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.generators.len()).collect();
        idx.sort_by(|&a, &b| self.generators[a].name.cmp(&self.generators[b].name));
        idx
    }

    /// Indices of the named members; all generators if `names` is `None`.
    pub fn members(&self, names: Option<&Vec<String>>) -> Vec<usize> {
        match names {
            None => (0..self.generators.len()).collect(),
            Some(ns) => ns.iter().filter_map(|n| self.index_of(n)).collect(),
        }
    }

    pub fn word_expr(&self, w: &Word) -> HomeoExpr {
        w.expr(|i| self.map(i))
    }

    pub fn word_name(&self, w: &Word) -> String {
        w.display(|i| self.generators[i].name.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Letter {
    pub gen: usize,
    pub inv: bool,
}

/// A group word; `letters[0]` is applied last.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Word {
    pub letters: Vec<Letter>,
}

impl Word {
    pub fn single(gen: usize, inv: bool) -> Self {
        Word { letters: vec![Letter { gen, inv }] }
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn inverse(&self) -> Word {
        Word { letters: self.letters.iter().rev().map(|l| Letter { gen: l.gen, inv: !l.inv }).collect() }
    }

    pub fn expr<'a>(&self, map: impl Fn(usize) -> &'a HomeoExpr) -> HomeoExpr {
        let factors: Vec<HomeoExpr> =
            self.letters.iter().map(|l| if l.inv { map(l.gen).inverse() } else { map(l.gen).clone() }).collect();
        match factors.len() {
            0 => HomeoExpr::Identity,
            1 => factors.into_iter().next().unwrap_or(HomeoExpr::Identity),
            _ => HomeoExpr::Compose { maps: factors },
        }
    }

    pub fn display<'a>(&self, name: impl Fn(usize) -> &'a str) -> String {
        if self.letters.is_empty() {
            return "id".to_string();
        }
        self.letters
            .iter()
            .map(|l| if l.inv { format!("{}^-1", name(l.gen)) } else { name(l.gen).to_string() })
            .collect::<Vec<_>>()
            .join(" ")
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = self.display(|_| "g");
        f.write_str(&s)
    }
}

/// Reduced words in the given generators, by increasing length and then
/// lexicographically: generators in the order given, a letter before its
/// inverse.
pub fn reduced_words(order: &[usize], max_len: usize) -> Vec<Word> {
    let alphabet: Vec<Letter> =
        order.iter().flat_map(|&g| [Letter { gen: g, inv: false }, Letter { gen: g, inv: true }]).collect();
    let mut out = Vec::new();
    let mut frontier = vec![Word::default()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for w in &frontier {
            for &l in &alphabet {
                if let Some(last) = w.letters.last() {
                    if last.gen == l.gen && last.inv != l.inv {
                        continue;
                    }
                }
                let mut letters = w.letters.clone();
                letters.push(l);
                next.push(Word { letters });
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}
