use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::data::Dataset;

/// Number of features tried at each split.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MaxFeatures {
    All,
    /// `ceil(sqrt(p))`
    Sqrt,
    /// `ceil(log2(p))`
    Log2,
}

impl MaxFeatures {
    pub fn count(self, p: usize) -> usize {
        let m = match self {
            MaxFeatures::All => p,
            MaxFeatures::Sqrt => (p as f64).sqrt().ceil() as usize,
            MaxFeatures::Log2 => (p as f64).log2().ceil() as usize,
        };
        m.clamp(1, p.max(1))
    }
}

impl std::str::FromStr for MaxFeatures {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "all" | "none" => Ok(MaxFeatures::All),
            "sqrt" => Ok(MaxFeatures::Sqrt),
            "log2" | "log" => Ok(MaxFeatures::Log2),
            _ => Err(format!("unknown max_features '{s}'")),
        }
    }
}

impl std::fmt::Display for MaxFeatures {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            MaxFeatures::All => "all",
            MaxFeatures::Sqrt => "sqrt",
            MaxFeatures::Log2 => "log2",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreeParams {
    pub max_depth: Option<usize>,
    pub max_features: MaxFeatures,
    pub min_samples_leaf: usize,
    pub min_samples_split: usize,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams {
            max_depth: None,
            max_features: MaxFeatures::All,
            min_samples_leaf: 1,
            min_samples_split: 2,
        }
    }
}

pub const LEAF: i64 = -1;

/// Regression tree stored as parallel node arrays. Internal nodes send
/// `x[feature] <= threshold` left.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub feature: Vec<i64>,
    pub threshold: Vec<f64>,
    pub left: Vec<i64>,
    pub right: Vec<i64>,
    pub value: Vec<f64>,
}

impl Tree {
    pub fn node_count(&self) -> usize {
        self.value.len()
    }

    pub fn is_leaf(&self, node: usize) -> bool {
        self.feature[node] == LEAF
    }

    pub fn depth(&self) -> usize {
        fn walk(t: &Tree, n: usize) -> usize {
            if t.is_leaf(n) {
                0
            } else {
                1 + walk(t, t.left[n] as usize).max(walk(t, t.right[n] as usize))
            }
        }
        walk(self, 0)
    }

    /// Leaf reached by `get(feature)`.
    pub fn leaf_for(&self, get: impl Fn(usize) -> f64) -> usize {
        let mut n = 0;
        while !self.is_leaf(n) {
            n = if get(self.feature[n] as usize) <= self.threshold[n] {
                self.left[n] as usize
            } else {
                self.right[n] as usize
            };
        }
        n
    }

    pub fn predict_row(&self, data: &Dataset, row: usize) -> f64 {
        self.value[self.leaf_for(|f| data.value(row, f))]
    }

    fn push(&mut self, value: f64) -> usize {
        self.feature.push(LEAF);
        self.threshold.push(0.0);
        self.left.push(LEAF);
        self.right.push(LEAF);
        self.value.push(value);
        self.value.len() - 1
    }
}

#[derive(Debug, Clone, Copy)]
struct Split {
    feature: usize,
    threshold: f64,
    /// `sum_l² / n_l + sum_r² / n_r`; larger is a lower child SSE.
    proxy: f64,
}

/// Best split of `rows` on one feature, or `None` if no admissible cut.
fn best_on_feature(
    data: &Dataset,
    rows: &[usize],
    feature: usize,
    min_leaf: usize,
    buf: &mut Vec<(f64, f64)>,
) -> Option<Split> {
    buf.clear();
    buf.extend(rows.iter().map(|&r| (data.value(r, feature), data.target[r])));
    buf.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
    let n = buf.len();
    let total: f64 = buf.iter().map(|p| p.1).sum();
    let mut left_sum = 0.0;
    let mut best: Option<Split> = None;
    for i in 0..n - 1 {
        left_sum += buf[i].1;
        let nl = i + 1;
        let nr = n - nl;
        if buf[i].0 == buf[i + 1].0 || nl < min_leaf || nr < min_leaf {
            continue;
        }
        let right_sum = total - left_sum;
        let proxy = left_sum * left_sum / nl as f64 + right_sum * right_sum / nr as f64;
        if best.is_none_or(|b| proxy > b.proxy) {
            let (a, b) = (buf[i].0, buf[i + 1].0);
            let mut threshold = a + (b - a) / 2.0;
            if threshold >= b {
                threshold = a;
            }
            best = Some(Split {
                feature,
                threshold,
                proxy,
            });
        }
    }
    best
}

fn is_constant(data: &Dataset, rows: &[usize], feature: usize) -> bool {
    let first = data.value(rows[0], feature);
    rows.iter().all(|&r| data.value(r, feature) == first)
}

/// Grows a tree on `rows` (duplicates allowed, as in a bootstrap sample).
///
/// Features are visited in a random order; constant features do not count
/// towards the `max_features` budget.
pub fn fit_tree<R: Rng>(data: &Dataset, rows: &[usize], params: &TreeParams, rng: &mut R) -> Tree {
    let p = data.n_features();
    let mtry = params.max_features.count(p);
    let min_leaf = params.min_samples_leaf.max(1);
    let min_split = params.min_samples_split.max(2);
    let mut tree = Tree {
        feature: Vec::new(),
        threshold: Vec::new(),
        left: Vec::new(),
        right: Vec::new(),
        value: Vec::new(),
    };
    let mut idx = rows.to_vec();
    let mut buf = Vec::with_capacity(idx.len());
    let mut order: Vec<usize> = (0..p).collect();
    let mean = |idx: &[usize]| idx.iter().map(|&r| data.target[r]).sum::<f64>() / idx.len() as f64;

    let root = tree.push(mean(&idx));
    // (node, start, end, depth)
    let mut stack = vec![(root, 0, idx.len(), 0usize)];
    while let Some((node, start, end, depth)) = stack.pop() {
        let here = &idx[start..end];
        let n = here.len();
        let first_y = data.target[here[0]];
        let pure = here.iter().all(|&r| data.target[r] == first_y);
        if pure || n < min_split || n < 2 * min_leaf || params.max_depth.is_some_and(|d| depth >= d) {
            continue;
        }
        order.shuffle(rng);
        let mut visited = 0;
        let mut best: Option<Split> = None;
        for &f in &order {
            if visited >= mtry {
                break;
            }
            if is_constant(data, here, f) {
                continue;
            }
            visited += 1;
            if let Some(s) = best_on_feature(data, here, f, min_leaf, &mut buf) {
                if best.is_none_or(|b| s.proxy > b.proxy) {
                    best = Some(s);
                }
            }
        }
        let Some(split) = best else { continue };
        // Partition idx[start..end] in place.
        let slice = &mut idx[start..end];
        let mut mid = 0;
        for i in 0..slice.len() {
            if data.value(slice[i], split.feature) <= split.threshold {
                slice.swap(i, mid);
                mid += 1;
            }
        }
        let left = tree.push(mean(&slice[..mid]));
        let right = tree.push(mean(&slice[mid..]));
        tree.feature[node] = split.feature as i64;
        tree.threshold[node] = split.threshold;
        tree.left[node] = left as i64;
        tree.right[node] = right as i64;
        stack.push((right, start + mid, end, depth + 1));
        stack.push((left, start, start + mid, depth + 1));
    }
    tree
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed;

    fn data(x: Vec<f64>, y: Vec<f64>) -> Dataset {
        Dataset::new(vec!["x".into()], vec![x], y, None).unwrap()
    }

    #[test]
    fn constant_target_is_one_leaf() {
        let d = data(vec![1.0, 2.0, 3.0], vec![4.0; 3]);
        let t = fit_tree(&d, &[0, 1, 2], &TreeParams::default(), &mut seed::rng(0));
        assert_eq!(t.node_count(), 1);
        assert_eq!(t.value[0], 4.0);
    }

    #[test]
    fn step_function_one_split() {
        let x = vec![-3.0, -2.0, -1.0, 1.0, 2.0, 3.0];
        let y = vec![0.0, 0.0, 0.0, 1.0, 1.0, 1.0];
        let d = data(x, y);
        let t = fit_tree(&d, &[0, 1, 2, 3, 4, 5], &TreeParams::default(), &mut seed::rng(0));
        assert_eq!(t.depth(), 1);
        assert_eq!(t.threshold[0], 0.0);
        assert_eq!(t.value[t.left[0] as usize], 0.0);
        assert_eq!(t.value[t.right[0] as usize], 1.0);
    }

    #[test]
    fn limits_are_respected() {
        let n = 64;
        let d = data((0..n).map(|i| i as f64).collect(), (0..n).map(|i| ((i * 7) % 11) as f64).collect());
        let rows: Vec<usize> = (0..n).collect();
        let p = TreeParams {
            max_depth: Some(3),
            ..Default::default()
        };
        assert!(fit_tree(&d, &rows, &p, &mut seed::rng(1)).depth() <= 3);
        let p = TreeParams {
            min_samples_leaf: 5,
            ..Default::default()
        };
        let t = fit_tree(&d, &rows, &p, &mut seed::rng(1));
        for leaf in (0..t.node_count()).filter(|&i| t.is_leaf(i)) {
            let count = rows.iter().filter(|&&r| t.leaf_for(|f| d.value(r, f)) == leaf).count();
            assert!(count >= 5);
        }
    }

    #[test]
    fn max_features_counts() {
        assert_eq!(MaxFeatures::Sqrt.count(14), 4);
        assert_eq!(MaxFeatures::Log2.count(14), 4);
        assert_eq!(MaxFeatures::Sqrt.count(16), 4);
        assert_eq!(MaxFeatures::Log2.count(1), 1);
        assert_eq!(MaxFeatures::All.count(6), 6);
        assert_eq!("log".parse::<MaxFeatures>().unwrap(), MaxFeatures::Log2);
    }

    #[test]
    fn midpoint_never_equals_upper_value() {
        let a = 1.0f64;
        let b = f64::from_bits(a.to_bits() + 1);
        let d = data(vec![a, b], vec![0.0, 1.0]);
        let t = fit_tree(&d, &[0, 1], &TreeParams::default(), &mut seed::rng(0));
        assert_eq!(t.predict_row(&d, 0), 0.0);
        assert_eq!(t.predict_row(&d, 1), 1.0);
    }
}
