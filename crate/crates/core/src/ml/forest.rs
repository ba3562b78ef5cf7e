//! CART trees with Gini impurity and a bootstrap-aggregated forest.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::argmax_counts;
use crate::error::{Error, Result};
use crate::rng::{derive_seed, Xoshiro256StarStar};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ForestParams {
    pub n_trees: usize,
    pub seed: u64,
    /// Features examined per split; `None` examines all of them.
    pub max_features: Option<usize>,
    pub bootstrap: bool,
}

impl Default for ForestParams {
    fn default() -> Self {
        Self { n_trees: 100, seed: 123, max_features: Some(2), bootstrap: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Node {
    Leaf { class: usize },
    /// Rows with `x[feature] <= threshold` go left.
    Split { feature: usize, threshold: f64, left: usize, right: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    /// Node 0 is the root.
    pub nodes: Vec<Node>,
}

/// Best split of one node: lowest weighted Gini, then lowest feature, then
/// lowest threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitChoice {
    pub feature: usize,
    pub threshold: f64,
    /// `Σ n_child·gini_child`, i.e. weighted impurity times node size.
    pub impurity: f64,
}

fn weighted_gini(counts: &[usize], n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let sq: usize = counts.iter().map(|c| c * c).sum();
    n as f64 - sq as f64 / n as f64
}

/// Exhaustive search over midpoints between consecutive distinct values of
/// each listed feature.
pub fn best_split<R: AsRef<[f64]>>(
    x: &[R],
    y: &[usize],
    rows: &[usize],
    features: &[usize],
    n_classes: usize,
) -> Option<SplitChoice> {
    let mut best: Option<SplitChoice> = None;
    let mut total = vec![0usize; n_classes];
    for &r in rows {
        total[y[r]] += 1;
    }
    let mut order = rows.to_vec();
    for &f in features {
        order.sort_by(|&a, &b| x[a].as_ref()[f].total_cmp(&x[b].as_ref()[f]).then(a.cmp(&b)));
        let mut left = vec![0usize; n_classes];
        for k in 0..order.len() - 1 {
            left[y[order[k]]] += 1;
            let (lo, hi) = (x[order[k]].as_ref()[f], x[order[k + 1]].as_ref()[f]);
            if lo == hi {
                continue;
            }
            let right: Vec<usize> = total.iter().zip(&left).map(|(t, l)| t - l).collect();
            let nl = k + 1;
            let impurity = weighted_gini(&left, nl) + weighted_gini(&right, order.len() - nl);
            let threshold = lo + (hi - lo) / 2.0;
            let cand = SplitChoice { feature: f, threshold, impurity };
            let better = match best {
                None => true,
                Some(b) => (impurity, f, threshold).partial_cmp(&(b.impurity, b.feature, b.threshold)) == Some(std::cmp::Ordering::Less),
            };
            if better {
                best = Some(cand);
            }
        }
    }
    best
}

impl Tree {
    /// Grows until nodes are pure or hold fewer than two rows. Each split
    /// examines `max_features` features drawn without replacement, continuing
    /// through the remaining features only when none of those can split.
    pub fn grow<R: AsRef<[f64]>>(
        x: &[R],
        y: &[usize],
        rows: Vec<usize>,
        n_classes: usize,
        max_features: usize,
        rng: &mut Xoshiro256StarStar,
    ) -> Self {
        let p = x[0].as_ref().len();
        let mut nodes = vec![Node::Leaf { class: 0 }];
        let mut stack = vec![(0usize, rows)];
        while let Some((id, rows)) = stack.pop() {
            let mut counts = vec![0usize; n_classes];
            for &r in &rows {
                counts[y[r]] += 1;
            }
            let majority = argmax_counts(&counts);
            let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
            if pure || rows.len() < 2 {
                nodes[id] = Node::Leaf { class: majority };
                continue;
            }
            let mut feats: Vec<usize> = (0..p).collect();
            rng.shuffle(&mut feats);
            let first = max_features.clamp(1, p);
            let mut window = feats[..first].to_vec();
            window.sort_unstable();
            let mut choice = best_split(x, y, &rows, &window, n_classes);
            for &f in &feats[first..] {
                if choice.is_some() {
                    break;
                }
                choice = best_split(x, y, &rows, &[f], n_classes);
            }
            let Some(c) = choice else {
                nodes[id] = Node::Leaf { class: majority };
                continue;
            };
            let (l, r): (Vec<usize>, Vec<usize>) = rows.iter().partition(|&&i| x[i].as_ref()[c.feature] <= c.threshold);
            let (left, right) = (nodes.len(), nodes.len() + 1);
            nodes.push(Node::Leaf { class: 0 });
            nodes.push(Node::Leaf { class: 0 });
            nodes[id] = Node::Split { feature: c.feature, threshold: c.threshold, left, right };
            stack.push((right, r));
            stack.push((left, l));
        }
        Self { nodes }
    }

    pub fn predict(&self, x: &[f64]) -> usize {
        let mut id = 0;
        loop {
            match self.nodes[id] {
                Node::Leaf { class } => return class,
                Node::Split { feature, threshold, left, right } => {
                    id = if x[feature] <= threshold { left } else { right };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], id: usize) -> usize {
            match nodes[id] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
            }
        }
        walk(&self.nodes, 0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomForest {
    pub params: ForestParams,
    pub n_classes: usize,
    pub trees: Vec<Tree>,
}

impl RandomForest {
    /// Tree `t` draws its bootstrap sample and feature subsets from a
    /// generator seeded with `splitmix64(seed ^ t)`, so the forest is
    /// identical however the trees are scheduled.
    pub fn fit<R: AsRef<[f64]> + Sync>(x: &[R], y: &[usize], n_classes: usize, params: ForestParams) -> Result<Self> {
        if x.len() < 10 || x.len() != y.len() {
            return Err(Error::param(format!("random forest needs at least 10 labeled rows, got {}", x.len())));
        }
        if params.n_trees == 0 {
            return Err(Error::param("n_trees must be positive"));
        }
        if let Some(&bad) = y.iter().find(|&&c| c >= n_classes) {
            return Err(Error::param(format!("label {bad} out of range for {n_classes} classes")));
        }
        let p = x[0].as_ref().len();
        let mtry = params.max_features.unwrap_or(p);
        let trees = (0..params.n_trees)
            .into_par_iter()
            .map(|t| {
                let mut rng = Xoshiro256StarStar::seed_from_u64(derive_seed(params.seed, t as u64));
                let rows: Vec<usize> = if params.bootstrap {
                    (0..x.len()).map(|_| rng.below(x.len())).collect()
                } else {
                    (0..x.len()).collect()
                };
                Tree::grow(x, y, rows, n_classes, mtry, &mut rng)
            })
            .collect();
        Ok(Self { params, n_classes, trees })
    }

    /// Majority vote, ties to the lowest class index.
    pub fn predict(&self, x: &[f64]) -> usize {
        let mut votes = vec![0usize; self.n_classes];
        for t in &self.trees {
            votes[t.predict(x)] += 1;
        }
        argmax_counts(&votes)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Gini impurity of every candidate threshold, computed directly from
    /// class proportions.
    fn brute_force(x: &[[f64; 2]], y: &[usize]) -> (usize, f64) {
        let gini = |idx: &[usize]| -> f64 {
            if idx.is_empty() {
                return 0.0;
            }
            let n = idx.len() as f64;
            let p1 = idx.iter().filter(|&&i| y[i] == 1).count() as f64 / n;
            1.0 - p1 * p1 - (1.0 - p1) * (1.0 - p1)
        };
        let mut best = (f64::INFINITY, 0, 0.0);
        for f in 0..2 {
            let mut vals: Vec<f64> = x.iter().map(|r| r[f]).collect();
            vals.sort_by(f64::total_cmp);
            vals.dedup();
            for w in vals.windows(2) {
                let t = (w[0] + w[1]) / 2.0;
                let l: Vec<usize> = (0..x.len()).filter(|&i| x[i][f] <= t).collect();
                let r: Vec<usize> = (0..x.len()).filter(|&i| x[i][f] > t).collect();
                let score = (l.len() as f64 * gini(&l) + r.len() as f64 * gini(&r)) / x.len() as f64;
                if score < best.0 - 1e-15 {
                    best = (score, f, t);
                }
            }
        }
        (best.1, best.2)
    }

    #[test]
    fn root_split_matches_brute_force_on_xor_like_table() {
        let x = [[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.2]];
        let y = [0, 1, 1, 0];
        let mut rng = Xoshiro256StarStar::seed_from_u64(9);
        let tree = Tree::grow(&x, &y, (0..4).collect(), 2, 2, &mut rng);
        let (f, t) = brute_force(&x, &y);
        match tree.nodes[0] {
            Node::Split { feature, threshold, .. } => assert_eq!((feature, threshold), (f, t)),
            ref n => panic!("root is {n:?}"),
        }
        assert!(x.iter().zip(y).all(|(r, c)| tree.predict(r) == c));
    }

    #[test]
    fn asymmetric_table_split_matches_brute_force() {
        let x = [[0.2, 3.0], [0.9, 1.0], [0.4, 2.0], [0.7, 0.5]];
        let y = [0, 1, 0, 1];
        let mut rng = Xoshiro256StarStar::seed_from_u64(1);
        let tree = Tree::grow(&x, &y, (0..4).collect(), 2, 2, &mut rng);
        let (f, t) = brute_force(&x, &y);
        assert!(matches!(tree.nodes[0], Node::Split { feature, threshold, .. } if feature == f && threshold == t));
    }

    #[test]
    fn zero_gain_split_still_grows_to_purity() {
        let x = [[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]];
        let y = [0, 1, 1, 0];
        let mut rng = Xoshiro256StarStar::seed_from_u64(3);
        let tree = Tree::grow(&x, &y, (0..4).collect(), 2, 1, &mut rng);
        assert!(x.iter().zip(y).all(|(r, c)| tree.predict(r) == c));
        assert_eq!(tree.depth(), 2);
    }

    #[test]
    fn forest_is_deterministic_and_fits_training_data() {
        let x: Vec<[f64; 3]> = (0..60).map(|i| [(i % 3) as f64 + 0.1 * (i as f64).sin(), (i as f64 * 0.7).cos(), i as f64 * 0.01]).collect();
        let y: Vec<usize> = (0..60).map(|i| i % 3).collect();
        let a = RandomForest::fit(&x, &y, 3, ForestParams { n_trees: 25, ..Default::default() }).unwrap();
        let b = RandomForest::fit(&x, &y, 3, ForestParams { n_trees: 25, ..Default::default() }).unwrap();
        assert_eq!(a, b);
        let acc = x.iter().zip(&y).filter(|(r, &c)| a.predict(*r) == c).count();
        assert!(acc >= 59);
    }

    #[test]
    fn vote_ties_go_to_lowest_class() {
        let forest = RandomForest {
            params: ForestParams::default(),
            n_classes: 3,
            trees: vec![Tree { nodes: vec![Node::Leaf { class: 2 }] }, Tree { nodes: vec![Node::Leaf { class: 1 }] }],
        };
        assert_eq!(forest.predict(&[0.0]), 1);
    }
}
