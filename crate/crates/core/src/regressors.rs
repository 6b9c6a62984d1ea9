//! Least-squares and regression-tree predictors, and their bagged averages.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::error::{invalid, Error, Result};
use crate::rng::stream_rng;

/// Rows of `d` features with one target each.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionDataset {
    inputs: Vec<Vec<f64>>,
    targets: Vec<f64>,
    dim: usize,
}

impl RegressionDataset {
    pub fn new(inputs: Vec<Vec<f64>>, targets: Vec<f64>) -> Result<Self> {
        if inputs.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if inputs.len() != targets.len() {
            return Err(invalid(format!(
                "{} input rows but {} targets",
                inputs.len(),
                targets.len()
            )));
        }
        let dim = inputs[0].len();
        for (i, row) in inputs.iter().enumerate() {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: row.len(),
                });
            }
            if row.iter().any(|v| !v.is_finite()) || !targets[i].is_finite() {
                return Err(Error::NonFinite(i));
            }
        }
        Ok(Self {
            inputs,
            targets,
            dim,
        })
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn inputs(&self) -> &[Vec<f64>] {
        &self.inputs
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    /// Rows at `indices`, repeats allowed.
    pub fn select(&self, indices: &[usize]) -> Result<Self> {
        let inputs = indices.iter().map(|&i| self.inputs[i].clone()).collect();
        let targets = indices.iter().map(|&i| self.targets[i]).collect();
        Self::new(inputs, targets)
    }

    /// First `k` rows and the rest.
    pub fn split_at(&self, k: usize) -> Result<(Self, Self)> {
        if k == 0 || k >= self.len() {
            return Err(invalid(format!(
                "split point {k} must be inside 1..{}",
                self.len()
            )));
        }
        let (a, b) = self.inputs.split_at(k);
        let (ta, tb) = self.targets.split_at(k);
        Ok((
            Self::new(a.to_vec(), ta.to_vec())?,
            Self::new(b.to_vec(), tb.to_vec())?,
        ))
    }
}

pub trait Predictor {
    fn dim(&self) -> usize;

    /// Prediction for one feature vector; errors on a length mismatch.
    fn predict(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        Ok(self.predict_unchecked(x))
    }

    fn predict_unchecked(&self, x: &[f64]) -> f64;
}

/// Mean squared error of `model` on `test`.
pub fn mse_on<P: Predictor + ?Sized>(model: &P, test: &RegressionDataset) -> Result<f64> {
    if test.dim() != model.dim() {
        return Err(Error::DimensionMismatch {
            expected: model.dim(),
            got: test.dim(),
        });
    }
    let sum: f64 = test
        .inputs()
        .iter()
        .zip(test.targets())
        .map(|(x, &y)| {
            let e = model.predict_unchecked(x) - y;
            e * e
        })
        .sum();
    Ok(sum / test.len() as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    pub slopes: Vec<f64>,
    pub intercept: f64,
}

impl Predictor for LinearModel {
    fn dim(&self) -> usize {
        self.slopes.len()
    }

    fn predict_unchecked(&self, x: &[f64]) -> f64 {
        self.intercept + self.slopes.iter().zip(x).map(|(b, v)| b * v).sum::<f64>()
    }
}

/// Ordinary least squares with intercept.
///
/// Slopes are the minimum-norm least-squares solution on centered data
/// (SVD pseudo-inverse), so rank-deficient designs still get a fit; the
/// intercept then makes residuals sum to zero.
pub fn fit_ols(train: &RegressionDataset) -> LinearModel {
    let n = train.len();
    let d = train.dim();
    let mean_x: Vec<f64> = (0..d)
        .map(|j| train.inputs().iter().map(|r| r[j]).sum::<f64>() / n as f64)
        .collect();
    let mean_y = train.targets().iter().sum::<f64>() / n as f64;
    if d == 0 {
        return LinearModel {
            slopes: vec![],
            intercept: mean_y,
        };
    }

    let x = DMatrix::from_fn(n, d, |i, j| train.inputs()[i][j] - mean_x[j]);
    let y = DVector::from_iterator(n, train.targets().iter().map(|t| t - mean_y));
    let svd = x.svd(true, true);
    let max_sv = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let eps = max_sv * n.max(d) as f64 * f64::EPSILON;
    let slopes: Vec<f64> = if max_sv == 0.0 {
        vec![0.0; d]
    } else {
        svd.solve(&y, eps)
            .map(|b| b.iter().cloned().collect())
            .unwrap_or_else(|_| vec![0.0; d])
    };
    let intercept = mean_y - slopes.iter().zip(&mean_x).map(|(b, m)| b * m).sum::<f64>();
    LinearModel { slopes, intercept }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TreeParams {
    /// `None` grows until leaves are pure or cannot be split.
    pub max_depth: Option<usize>,
    pub min_leaf: usize,
}

impl Default for TreeParams {
    fn default() -> Self {
        Self {
            max_depth: None,
            min_leaf: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Leaf(f64),
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

/// Binary regression tree; leaves predict the mean target of their rows.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionTree {
    nodes: Vec<Node>,
    dim: usize,
}

impl RegressionTree {
    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], i: usize) -> usize {
            match nodes[i] {
                Node::Leaf(_) => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
            }
        }
        walk(&self.nodes, 0)
    }

    pub fn leaf_count(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, Node::Leaf(_)))
            .count()
    }

    /// Root split as `(feature, threshold)`, if the root is not a leaf.
    pub fn root_split(&self) -> Option<(usize, f64)> {
        match self.nodes[0] {
            Node::Split {
                feature, threshold, ..
            } => Some((feature, threshold)),
            Node::Leaf(_) => None,
        }
    }
}

impl Predictor for RegressionTree {
    fn dim(&self) -> usize {
        self.dim
    }

    fn predict_unchecked(&self, x: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Leaf(v) => return v,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    i = if x[feature] <= threshold { left } else { right };
                }
            }
        }
    }
}

struct SplitChoice {
    feature: usize,
    threshold: f64,
    gain: f64,
}

/// Best split of `rows` by reduction of the sum of squared deviations.
///
/// Candidates are midpoints between consecutive distinct sorted values of
/// each feature. Ties keep the earlier candidate, i.e. the lowest feature
/// index and then the lowest threshold.
fn best_split(train: &RegressionDataset, rows: &[usize], min_leaf: usize) -> Option<SplitChoice> {
    let n = rows.len();
    let total: f64 = rows.iter().map(|&i| train.targets[i]).sum();
    let parent_score = total * total / n as f64;
    let mut best: Option<SplitChoice> = None;
    let mut order = rows.to_vec();

    for feature in 0..train.dim {
        let key = |i: usize| train.inputs[i][feature];
        order.sort_by(|&a, &b| key(a).total_cmp(&key(b)).then(a.cmp(&b)));
        let mut left_sum = 0.0;
        for k in 0..n - 1 {
            left_sum += train.targets[order[k]];
            let (lo, hi) = (key(order[k]), key(order[k + 1]));
            let left_n = k + 1;
            let right_n = n - left_n;
            if lo == hi || left_n < min_leaf || right_n < min_leaf {
                continue;
            }
            let right_sum = total - left_sum;
            // SSE(parent) - SSE(children) = children score - parent score
            let gain = left_sum * left_sum / left_n as f64 + right_sum * right_sum / right_n as f64
                - parent_score;
            if best.as_ref().is_none_or(|b| gain > b.gain) {
                let mid = lo + (hi - lo) / 2.0;
                let threshold = if mid < hi { mid } else { lo };
                best = Some(SplitChoice {
                    feature,
                    threshold,
                    gain,
                });
            }
        }
    }
    best
}

/// Grows a CART regression tree.
pub fn fit_tree(train: &RegressionDataset, params: TreeParams) -> RegressionTree {
    let min_leaf = params.min_leaf.max(1);
    let mut nodes = Vec::new();
    let rows: Vec<usize> = (0..train.len()).collect();
    grow(train, rows, 0, params.max_depth, min_leaf, &mut nodes);
    RegressionTree {
        nodes,
        dim: train.dim,
    }
}

fn grow(
    train: &RegressionDataset,
    rows: Vec<usize>,
    depth: usize,
    max_depth: Option<usize>,
    min_leaf: usize,
    nodes: &mut Vec<Node>,
) -> usize {
    let id = nodes.len();
    let mean = rows.iter().map(|&i| train.targets[i]).sum::<f64>() / rows.len() as f64;
    nodes.push(Node::Leaf(mean));

    let first = train.targets[rows[0]];
    let pure = rows.iter().all(|&i| train.targets[i] == first);
    let depth_reached = max_depth.is_some_and(|d| depth >= d);
    if pure || depth_reached || rows.len() < 2 * min_leaf {
        return id;
    }
    let Some(split) = best_split(train, &rows, min_leaf) else {
        return id;
    };
    let (left_rows, right_rows): (Vec<usize>, Vec<usize>) = rows
        .iter()
        .partition(|&&i| train.inputs[i][split.feature] <= split.threshold);
    let left = grow(train, left_rows, depth + 1, max_depth, min_leaf, nodes);
    let right = grow(train, right_rows, depth + 1, max_depth, min_leaf, nodes);
    nodes[id] = Node::Split {
        feature: split.feature,
        threshold: split.threshold,
        left,
        right,
    };
    id
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaseLearner {
    Ols,
    Tree(TreeParams),
}

impl BaseLearner {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Ols => "ols",
            Self::Tree(_) => "tree",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Linear(LinearModel),
    Tree(RegressionTree),
}

impl Predictor for Model {
    fn dim(&self) -> usize {
        match self {
            Self::Linear(m) => m.dim(),
            Self::Tree(t) => t.dim(),
        }
    }

    fn predict_unchecked(&self, x: &[f64]) -> f64 {
        match self {
            Self::Linear(m) => m.predict_unchecked(x),
            Self::Tree(t) => t.predict_unchecked(x),
        }
    }
}

pub fn fit_base(train: &RegressionDataset, base: BaseLearner) -> Model {
    match base {
        BaseLearner::Ols => Model::Linear(fit_ols(train)),
        BaseLearner::Tree(params) => Model::Tree(fit_tree(train, params)),
    }
}

/// Average of `N` base models, each fit on a bag of `m` training rows.
#[derive(Debug, Clone, PartialEq)]
pub struct BaggedPredictor {
    models: Vec<Model>,
    dim: usize,
}

impl BaggedPredictor {
    pub fn models(&self) -> &[Model] {
        &self.models
    }
}

impl Predictor for BaggedPredictor {
    fn dim(&self) -> usize {
        self.dim
    }

    fn predict_unchecked(&self, x: &[f64]) -> f64 {
        let sum: f64 = self.models.iter().map(|m| m.predict_unchecked(x)).sum();
        sum / self.models.len() as f64
    }
}

/// Bag `i` uses `stream_rng(seed, i)`, as in [`crate::bagging`].
pub fn bagged_predictor(
    train: &RegressionDataset,
    m: usize,
    iterations: usize,
    seed: u64,
    base: BaseLearner,
) -> Result<BaggedPredictor> {
    if m == 0 || iterations == 0 {
        return Err(invalid("bag size and number of bags must be at least 1"));
    }
    let models = (0..iterations)
        .map(|i| {
            let mut rng = stream_rng(seed, i as u64);
            let idx: Vec<usize> = (0..m).map(|_| rng.random_range(0..train.len())).collect();
            Ok(fit_base(&train.select(&idx)?, base))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BaggedPredictor {
        models,
        dim: train.dim(),
    })
}
