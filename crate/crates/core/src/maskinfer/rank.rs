use std::collections::BTreeSet;

use serde::Serialize;

use super::model::MaskModel;
use crate::fpmodel::AttributeName;

/// Pre-order of tools by masked attribute sets: `a ≥ b` iff `a` masks every
/// attribute `b` masks. Every masking behavior weighs the same.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Preorder {
    /// (pet, number of masked attributes), sorted by count then name.
    pub masked_counts: Vec<(String, usize)>,
    /// Tools with equal masked sets, largest sets first.
    pub classes: Vec<Vec<String>>,
    /// Every `(a, b)` with `a ≥ b`, reflexive pairs included.
    pub dominance: Vec<(String, String)>,
    /// Covering edges `(upper, lower)` between classes, as class indices.
    pub covers: Vec<(usize, usize)>,
}

impl Preorder {
    pub fn dominates(&self, a: &str, b: &str) -> bool {
        self.dominance.iter().any(|(x, y)| x == a && y == b)
    }

    /// Whether the classes form a single chain.
    pub fn is_chain(&self) -> bool {
        let n = self.classes.len();
        n <= 1 || (self.covers.len() == n - 1 && (0..n - 1).all(|i| self.covers.contains(&(i, i + 1))))
    }
}

pub fn rank_preorder(models: &[MaskModel]) -> Preorder {
    let mut entries: Vec<(String, BTreeSet<AttributeName>)> = models
        .iter()
        .map(|m| (m.pet.clone(), m.masked_attributes().cloned().collect()))
        .collect();
    entries.sort_by(|a, b| b.1.len().cmp(&a.1.len()).then_with(|| a.0.cmp(&b.0)));

    let mut masked_counts: Vec<(String, usize)> = entries.iter().map(|(p, s)| (p.clone(), s.len())).collect();
    masked_counts.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));

    let mut dominance = Vec::new();
    for (a, sa) in &entries {
        for (b, sb) in &entries {
            if sa.is_superset(sb) {
                dominance.push((a.clone(), b.clone()));
            }
        }
    }

    let mut class_sets: Vec<&BTreeSet<AttributeName>> = Vec::new();
    let mut classes: Vec<Vec<String>> = Vec::new();
    for (pet, set) in &entries {
        match class_sets.iter().position(|s| *s == set) {
            Some(i) => classes[i].push(pet.clone()),
            None => {
                class_sets.push(set);
                classes.push(vec![pet.clone()]);
            }
        }
    }

    let strictly_above =
        |i: usize, j: usize| class_sets[i].is_superset(class_sets[j]) && class_sets[i] != class_sets[j];
    let mut covers = Vec::new();
    for i in 0..class_sets.len() {
        for j in 0..class_sets.len() {
            if strictly_above(i, j) && !(0..class_sets.len()).any(|m| strictly_above(i, m) && strictly_above(m, j)) {
                covers.push((i, j));
            }
        }
    }

    Preorder {
        masked_counts,
        classes,
        dominance,
        covers,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maskinfer::VerdictStatus;

    fn model(pet: &str, masked: &[&str], universe: &[&str]) -> MaskModel {
        universe.iter().fold(MaskModel::new(pet), |m, a| {
            let status = if masked.contains(a) {
                VerdictStatus::MaskedStandardize
            } else {
                VerdictStatus::Unmasked
            };
            m.with_status(*a, status)
        })
    }

    #[test]
    fn subset_dominates() {
        let u = ["a", "b"];
        let r = rank_preorder(&[model("big", &["a", "b"], &u), model("small", &["a"], &u)]);
        assert!(r.dominates("big", "small"));
        assert!(!r.dominates("small", "big"));
        assert!(r.dominates("small", "small"));
        assert!(r.is_chain());
    }

    #[test]
    fn antichain() {
        let u = ["a", "b"];
        let r = rank_preorder(&[model("x", &["a"], &u), model("y", &["b"], &u)]);
        assert!(!r.dominates("x", "y"));
        assert!(!r.dominates("y", "x"));
        assert!(r.covers.is_empty());
        assert!(!r.is_chain());
    }

    #[test]
    fn equal_sets_share_a_class() {
        let u = ["a", "b"];
        let r = rank_preorder(&[model("p", &["a"], &u), model("q", &["a"], &u), model("none", &[], &u)]);
        assert_eq!(
            r.classes,
            vec![vec!["p".to_owned(), "q".to_owned()], vec!["none".to_owned()]]
        );
        assert!(r.dominates("p", "q") && r.dominates("q", "p"));
    }
}
