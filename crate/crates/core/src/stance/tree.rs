//! CART classifier over phrase-count vectors.
//!
//! Splits are `count <= threshold` (left) vs `count > threshold` (right)
//! on one of the five features, chosen greedily by weighted Gini impurity.
//! Ties go to the lower feature index, then the lower threshold, so
//! training is reproducible bit for bit.

use std::fmt::Write as _;

use super::{PhraseCountVector, StanceLabel};
use crate::error::{Error, Result};

const HEADER: &str = "stance-tree 1";
const IMPURITY_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TreeParams {
    pub max_depth: usize,
    pub min_leaf: usize,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams {
            max_depth: 5,
            min_leaf: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Node {
    Split {
        feature: usize,
        threshold: u32,
        left: Box<Node>,
        right: Box<Node>,
    },
    Leaf {
        label: StanceLabel,
        /// Training samples per class, in `StanceLabel::ALL` order.
        histogram: [u32; 3],
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecisionTree {
    pub root: Node,
}

type Histogram = [u32; 3];

fn histogram(samples: &[&(PhraseCountVector, StanceLabel)]) -> Histogram {
    let mut h = [0; 3];
    for (_, label) in samples {
        h[label.index()] += 1;
    }
    h
}

fn gini(h: &Histogram) -> f64 {
    let n: u32 = h.iter().sum();
    if n == 0 {
        return 0.0;
    }
    let n = f64::from(n);
    1.0 - h.iter().map(|&c| (f64::from(c) / n).powi(2)).sum::<f64>()
}

/// Majority class; any tie for the top count is Neutral.
fn majority(h: &Histogram) -> StanceLabel {
    let top = *h.iter().max().unwrap_or(&0);
    let winners: Vec<_> = StanceLabel::ALL
        .iter()
        .filter(|l| h[l.index()] == top)
        .collect();
    match winners.as_slice() {
        [only] => **only,
        _ => StanceLabel::Neutral,
    }
}

/// Floors of midpoints between consecutive distinct values.
fn candidate_thresholds(values: &mut Vec<u32>) -> Vec<u32> {
    values.sort_unstable();
    values.dedup();
    values.windows(2).map(|w| (w[0] + w[1]) / 2).collect()
}

pub fn train_tree(
    samples: &[(PhraseCountVector, StanceLabel)],
    params: TreeParams,
) -> Result<DecisionTree> {
    if samples.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    if params.min_leaf == 0 {
        return Err(Error::InvalidArgument("min_leaf must be at least 1".into()));
    }
    let refs: Vec<_> = samples.iter().collect();
    Ok(DecisionTree {
        root: grow(&refs, 0, params),
    })
}

fn grow(samples: &[&(PhraseCountVector, StanceLabel)], depth: usize, params: TreeParams) -> Node {
    let h = histogram(samples);
    let leaf = || Node::Leaf {
        label: majority(&h),
        histogram: h,
    };
    let parent_impurity = gini(&h);
    if parent_impurity == 0.0 || depth >= params.max_depth || samples.len() < 2 * params.min_leaf {
        return leaf();
    }

    let n = samples.len() as f64;
    let mut best: Option<(f64, usize, u32)> = None;
    for feature in 0..PhraseCountVector::DIMENSIONS {
        let mut values: Vec<u32> = samples.iter().map(|(v, _)| v.get(feature)).collect();
        for threshold in candidate_thresholds(&mut values) {
            let mut left = [0; 3];
            let mut right = [0; 3];
            for (v, label) in samples {
                if v.get(feature) <= threshold {
                    left[label.index()] += 1;
                } else {
                    right[label.index()] += 1;
                }
            }
            let (nl, nr): (u32, u32) = (left.iter().sum(), right.iter().sum());
            if (nl as usize) < params.min_leaf || (nr as usize) < params.min_leaf {
                continue;
            }
            let impurity = (f64::from(nl) * gini(&left) + f64::from(nr) * gini(&right)) / n;
            if best.is_none_or(|(b, _, _)| impurity < b - IMPURITY_EPS) {
                best = Some((impurity, feature, threshold));
            }
        }
    }

    match best {
        Some((impurity, feature, threshold)) if impurity < parent_impurity - IMPURITY_EPS => {
            let (left, right): (Vec<_>, Vec<_>) = samples
                .iter()
                .partition(|(v, _)| v.get(feature) <= threshold);
            Node::Split {
                feature,
                threshold,
                left: Box::new(grow(&left, depth + 1, params)),
                right: Box::new(grow(&right, depth + 1, params)),
            }
        }
        _ => leaf(),
    }
}

impl DecisionTree {
    pub fn classify(&self, vector: &PhraseCountVector) -> StanceLabel {
        let mut node = &self.root;
        loop {
            match node {
                Node::Leaf { label, .. } => return *label,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    node = if vector.get(*feature) <= *threshold {
                        left
                    } else {
                        right
                    };
                }
            }
        }
    }

    /// Edges on the longest root-to-leaf path.
    pub fn depth(&self) -> usize {
        fn go(node: &Node) -> usize {
            match node {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + go(left).max(go(right)),
            }
        }
        go(&self.root)
    }

    /// Checks that every leaf can be reached by some count vector.
    pub fn validate(&self) -> Result<()> {
        fn go(node: &Node, bounds: &mut [(u32, u32); 5]) -> Result<()> {
            if bounds.iter().any(|(lo, hi)| lo > hi) {
                return Err(Error::Invariant("unreachable tree node".into()));
            }
            if let Node::Split {
                feature,
                threshold,
                left,
                right,
            } = node
            {
                if *feature >= PhraseCountVector::DIMENSIONS {
                    return Err(Error::Invariant(format!(
                        "feature index {feature} out of range"
                    )));
                }
                let saved = bounds[*feature];
                bounds[*feature].1 = saved.1.min(*threshold);
                go(left, bounds)?;
                let above = threshold
                    .checked_add(1)
                    .ok_or_else(|| Error::Invariant("unreachable tree node".into()))?;
                bounds[*feature] = (saved.0.max(above), saved.1);
                go(right, bounds)?;
                bounds[*feature] = saved;
            }
            Ok(())
        }
        go(&self.root, &mut [(0, u32::MAX); 5])
    }

    /// Nested text form, one node per line in preorder, children indented:
    ///
    /// ```text
    /// stance-tree 1
    /// split 0 0
    ///   leaf support 1 0 0
    ///   leaf oppose 0 1 0
    /// ```
    pub fn to_text(&self) -> String {
        fn go(node: &Node, depth: usize, out: &mut String) {
            let indent = "  ".repeat(depth);
            match node {
                Node::Leaf { label, histogram } => {
                    let _ = writeln!(
                        out,
                        "{indent}leaf {label} {} {} {}",
                        histogram[0], histogram[1], histogram[2]
                    );
                }
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    let _ = writeln!(out, "{indent}split {feature} {threshold}");
                    go(left, depth + 1, out);
                    go(right, depth + 1, out);
                }
            }
        }
        let mut out = format!("{HEADER}\n");
        go(&self.root, 0, &mut out);
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty());
        match lines.next() {
            Some((_, l)) if l.trim() == HEADER => {}
            _ => return Err(Error::parse(1, format!("expected `{HEADER}` header"))),
        }

        fn node<'a>(lines: &mut impl Iterator<Item = (usize, &'a str)>) -> Result<Node> {
            let (i, line) = lines
                .next()
                .ok_or_else(|| Error::parse(0, "unexpected end of tree"))?;
            let bad = |msg: &str| Error::parse(i + 1, msg.to_string());
            let fields: Vec<&str> = line.split_whitespace().collect();
            match fields.as_slice() {
                ["split", feature, threshold] => Ok(Node::Split {
                    feature: feature.parse().map_err(|_| bad("bad feature index"))?,
                    threshold: threshold.parse().map_err(|_| bad("bad threshold"))?,
                    left: Box::new(node(lines)?),
                    right: Box::new(node(lines)?),
                }),
                ["leaf", label, a, b, c] => {
                    let count = |s: &str| s.parse::<u32>().map_err(|_| bad("bad class count"));
                    Ok(Node::Leaf {
                        label: label.parse().map_err(|_| bad("bad label"))?,
                        histogram: [count(a)?, count(b)?, count(c)?],
                    })
                }
                _ => Err(bad("expected `split F T` or `leaf LABEL S O N`")),
            }
        }

        let root = node(&mut lines)?;
        if let Some((i, _)) = lines.next() {
            return Err(Error::parse(i + 1, "trailing content after tree"));
        }
        let tree = DecisionTree { root };
        tree.validate()?;
        Ok(tree)
    }
}
