//! Closed-form relaxation on hierarchical state spaces.
//!
//! For the unit-spaced chain (`d(i, j) = max(i, j) - 1`) the generator has
//! an explicit spectrum: `λ(1) = 0` and, for `1 < j <= N`,
//!
//! ```text
//! λ(j) = -((j - 1) e^{-μ(j-1)} + Σ_{i=j..N} e^{-μ(i-1)})
//! ```
//!
//! with eigenvectors supported on the first `j` states. The autocorrelation
//! of state `i` is then `Σ_j e^{λ(j) t} V_i(j)²`, and for the last state it
//! collapses to a single exponential relaxing to `1/N`.
//!
//! General trees use the leaf-to-root form `1/N + Σ_n β_n e^{-γ_n t}`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::fitting::UltradiffusionParams;
use crate::ultrametric::UltrametricSpace;

/// Explicit spectrum of the uniform-chain generator.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainSpectrum {
    n: usize,
    mu: f64,
    eigenvalues: Vec<f64>,
    eigenvectors: DMatrix<f64>,
}

impl ChainSpectrum {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// `λ(1..=N)` in index order; `λ(1) = 0`.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Column `j - 1` holds `V(j)`.
    pub fn eigenvectors(&self) -> &DMatrix<f64> {
        &self.eigenvectors
    }

    /// `V_i(j)²` with 1-based indices, evaluated without square roots.
    pub fn weight(&self, i: usize, j: usize) -> f64 {
        eigvec_sq(self.n, i, j)
    }

    pub fn to_tsv(&self) -> String {
        crate::tsv::render(
            &["j", "lambda"],
            self.eigenvalues
                .iter()
                .enumerate()
                .map(|(k, &l)| vec![(k + 1) as f64, l]),
        )
    }
}

fn eigvec_sq(n: usize, i: usize, j: usize) -> f64 {
    if j == 1 {
        1.0 / n as f64
    } else if i < j {
        1.0 / ((j - 1) * j) as f64
    } else if i == j {
        (j - 1) as f64 / j as f64
    } else {
        0.0
    }
}

fn validate_chain(n: usize, mu: f64) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("chain length must be at least 2, got {n}")));
    }
    if !(mu >= 0.0 && mu.is_finite()) {
        return Err(Error::InvalidArgument(format!("mu must be finite and nonnegative, got {mu}")));
    }
    Ok(())
}

/// Closed-form eigenvalues and orthonormal eigenvectors of the uniform chain.
pub fn chain_spectrum(n: usize, mu: f64) -> Result<ChainSpectrum> {
    validate_chain(n, mu)?;
    // tail[j] = Σ_{i=j..n} e^{-μ(i-1)}, accumulated from the small end.
    let mut tail = vec![0.0; n + 2];
    for i in (1..=n).rev() {
        tail[i] = tail[i + 1] + (-mu * (i - 1) as f64).exp();
    }
    let eigenvalues = (1..=n)
        .map(|j| {
            if j == 1 {
                0.0
            } else {
                -((j - 1) as f64 * (-mu * (j - 1) as f64).exp() + tail[j])
            }
        })
        .collect();
    let eigenvectors = DMatrix::from_fn(n, n, |r, c| {
        let (i, j) = (r + 1, c + 1);
        if j == 1 {
            1.0 / (n as f64).sqrt()
        } else if i < j {
            1.0 / (((j - 1) * j) as f64).sqrt()
        } else if i == j {
            -((j - 1) as f64 / j as f64).sqrt()
        } else {
            0.0
        }
    });
    Ok(ChainSpectrum {
        n,
        mu,
        eigenvalues,
        eigenvectors,
    })
}

/// Probability of being back in state `i` (1-based) after time `t`, starting
/// from it.
pub fn autocorrelation_chain(spec: &ChainSpectrum, i: usize, t: f64) -> Result<f64> {
    if i == 0 || i > spec.n {
        return Err(Error::InvalidArgument(format!(
            "state index {i} outside 1..={}",
            spec.n
        )));
    }
    if !(t >= 0.0) {
        return Err(Error::InvalidArgument(format!("time must be nonnegative, got {t}")));
    }
    // Columns j < i (other than j = 1) vanish on row i.
    let mut p = spec.weight(i, 1);
    for j in i.max(2)..=spec.n {
        p += (spec.eigenvalues[j - 1] * t).exp() * spec.weight(i, j);
    }
    Ok(p)
}

/// Decay rate `N e^{-μ(N-1)}` of the last state of the chain.
pub fn quiescent_decay_rate(n: usize, mu: f64) -> f64 {
    n as f64 * (-mu * (n - 1) as f64).exp()
}

/// `((N-1)/N) e^{-t N e^{-μ(N-1)}} + 1/N`: the autocorrelation of the last
/// state of the chain, read as the probability of no response by time `t`.
pub fn survival_probability(n: usize, mu: f64, t: f64) -> Result<f64> {
    validate_chain(n, mu)?;
    let nf = n as f64;
    Ok((nf - 1.0) / nf * (-t * quiescent_decay_rate(n, mu)).exp() + 1.0 / nf)
}

/// `M (1 - P_N(t))`, the expected number of responses by time `t`.
pub fn expected_rebroadcasts(params: &UltradiffusionParams, t: f64) -> Result<f64> {
    let nf = params.t_n as f64;
    let rate = quiescent_decay_rate(params.t_n, params.mu);
    validate_chain(params.t_n, params.mu)?;
    // Written with exp_m1 so that early times keep full precision.
    Ok(params.m as f64 * (nf - 1.0) / nf * -(-t * rate).exp_m1())
}

/// Rooted tree with node heights, used by the leaf-to-root autocorrelation.
#[derive(Debug, Clone, PartialEq)]
pub struct TreeModel {
    parent: Vec<Option<usize>>,
    height: Vec<f64>,
    children: Vec<Vec<usize>>,
    leaf_count: Vec<usize>,
    root: usize,
    leaves: Vec<usize>,
}

impl TreeModel {
    /// Builds a tree from parent links (`None` for the root) and heights.
    /// Heights must strictly increase from every node to its parent.
    pub fn new(parent: Vec<Option<usize>>, height: Vec<f64>) -> Result<Self> {
        let n = parent.len();
        if n == 0 {
            return Err(Error::InvalidArgument("tree has no nodes".into()));
        }
        if height.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: height.len(),
            });
        }
        let roots: Vec<usize> = (0..n).filter(|&v| parent[v].is_none()).collect();
        if roots.len() != 1 {
            return Err(Error::InvalidArgument(format!(
                "tree needs exactly one root, found {}",
                roots.len()
            )));
        }
        let root = roots[0];
        let mut children = vec![Vec::new(); n];
        for (v, p) in parent.iter().enumerate() {
            if let Some(p) = *p {
                if p >= n || p == v {
                    return Err(Error::InvalidArgument(format!("node {v} has invalid parent {p}")));
                }
                if !(height[p] > height[v]) {
                    return Err(Error::InvalidArgument(format!(
                        "heights must increase towards the root: node {v} ({}) vs parent {p} ({})",
                        height[v], height[p]
                    )));
                }
                children[p].push(v);
            }
        }
        // Strictly increasing heights along parent links rule out cycles,
        // so a postorder by height gives correct leaf counts.
        let mut by_height: Vec<usize> = (0..n).collect();
        by_height.sort_by(|&a, &b| height[a].total_cmp(&height[b]));
        let mut leaf_count = vec![0usize; n];
        for &v in &by_height {
            if children[v].is_empty() {
                leaf_count[v] = 1;
            }
            if let Some(p) = parent[v] {
                leaf_count[p] += leaf_count[v];
            }
        }
        let leaves = (0..n).filter(|&v| children[v].is_empty()).collect();
        Ok(Self {
            parent,
            height,
            children,
            leaf_count,
            root,
            leaves,
        })
    }

    /// Root with `n_leaves` leaves at height 0 and the root at `h`.
    pub fn star(n_leaves: usize, h: f64) -> Result<Self> {
        let mut parent = vec![Some(n_leaves); n_leaves];
        parent.push(None);
        let mut height = vec![0.0; n_leaves];
        height.push(h);
        Self::new(parent, height)
    }

    /// Complete `branching`-ary tree of the given depth. Leaves sit at
    /// height 0 and level `l` above them at `level_height * l`.
    pub fn balanced(branching: usize, depth: usize, level_height: f64) -> Result<Self> {
        if branching < 2 || depth == 0 {
            return Err(Error::InvalidArgument("balanced tree needs branching >= 2, depth >= 1".into()));
        }
        let mut parent = Vec::new();
        let mut height = Vec::new();
        // Level by level from the root; leaves come last.
        parent.push(None);
        height.push(level_height * depth as f64);
        let mut frontier = vec![0usize];
        for level in 1..=depth {
            let mut next = Vec::with_capacity(frontier.len() * branching);
            for &p in &frontier {
                for _ in 0..branching {
                    parent.push(Some(p));
                    height.push(level_height * (depth - level) as f64);
                    next.push(parent.len() - 1);
                }
            }
            frontier = next;
        }
        Self::new(parent, height)
    }

    /// The uniform chain as a tree: leaf `j` joins the first `j - 1` leaves
    /// at height `μ (j - 1)`. Leaves are nodes `0..n` in chain order.
    pub fn caterpillar(n: usize, mu: f64) -> Result<Self> {
        validate_chain(n, mu)?;
        if mu == 0.0 {
            return Err(Error::InvalidArgument("caterpillar needs mu > 0 to order its joins".into()));
        }
        // Node n + j - 2 is the join of leaf j (j = 2..=n).
        let join = |j: usize| n + j - 2;
        let mut parent = vec![None; 2 * n - 1];
        let mut height = vec![0.0; 2 * n - 1];
        parent[0] = Some(join(2));
        for j in 2..=n {
            parent[j - 1] = Some(join(j));
            height[join(j)] = mu * (j - 1) as f64;
            if j > 2 {
                parent[join(j - 1)] = Some(join(j));
            }
        }
        Self::new(parent, height)
    }

    pub fn node_count(&self) -> usize {
        self.parent.len()
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn leaves(&self) -> &[usize] {
        &self.leaves
    }

    pub fn leaf_total(&self) -> usize {
        self.leaf_count[self.root]
    }

    pub fn leaf_count(&self, node: usize) -> usize {
        self.leaf_count[node]
    }

    pub fn height(&self, node: usize) -> f64 {
        self.height[node]
    }

    pub fn children(&self, node: usize) -> &[usize] {
        &self.children[node]
    }

    pub fn is_leaf(&self, node: usize) -> bool {
        node < self.node_count() && self.children[node].is_empty()
    }

    /// Ancestors of `node`, nearest first, ending at the root.
    pub fn ancestors(&self, node: usize) -> Vec<usize> {
        let mut path = Vec::new();
        let mut cur = self.parent[node];
        while let Some(p) = cur {
            path.push(p);
            cur = self.parent[p];
        }
        path
    }

    fn lowest_common_ancestor(&self, a: usize, b: usize) -> usize {
        let mut up_a = vec![a];
        up_a.extend(self.ancestors(a));
        let mut cur = Some(b);
        while let Some(v) = cur {
            if up_a.contains(&v) {
                return v;
            }
            cur = self.parent[v];
        }
        self.root
    }

    /// Ultrametric space on the leaves (in [`Self::leaves`] order) with
    /// distance equal to the height of the lowest common ancestor. Building
    /// a generator from it with `mu = 1` gives rates `e^{-h}`.
    pub fn induced_space(&self) -> Result<UltrametricSpace> {
        let n = self.leaves.len();
        let dist = DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                0.0
            } else {
                self.height[self.lowest_common_ancestor(self.leaves[i], self.leaves[j])]
            }
        });
        let labels = self.leaves.iter().map(|&v| v as f64).collect();
        UltrametricSpace::from_distances(labels, self.height[self.root], dist)
    }
}

/// Constant, amplitudes and rates of `P_L(t) = α + Σ β_n e^{-γ_n t}`.
#[derive(Debug, Clone, PartialEq)]
pub struct RelaxationTerms {
    pub alpha: f64,
    pub betas: Vec<f64>,
    pub gammas: Vec<f64>,
}

impl RelaxationTerms {
    pub fn eval(&self, t: f64) -> f64 {
        self.alpha
            + self
                .betas
                .iter()
                .zip(&self.gammas)
                .map(|(b, g)| b * (-g * t).exp())
                .sum::<f64>()
    }
}

/// Leaf-to-root expansion for `leaf`. Level `n` is the `n`-th ancestor, and
/// level 0 is the leaf itself with one descendant.
pub fn tree_relaxation_terms(tree: &TreeModel, leaf: usize) -> Result<RelaxationTerms> {
    if !tree.is_leaf(leaf) {
        return Err(Error::InvalidArgument(format!("node {leaf} is not a leaf")));
    }
    let path = tree.ancestors(leaf);
    let counts: Vec<f64> = std::iter::once(1.0)
        .chain(path.iter().map(|&v| tree.leaf_count(v) as f64))
        .collect();
    let heights: Vec<f64> = path.iter().map(|&v| tree.height(v)).collect();
    let levels = path.len();

    // Rate of leaving level n's subtree through any higher ancestor,
    // accumulated from the root down.
    let mut outer = vec![0.0; levels + 1];
    for n in (1..levels).rev() {
        outer[n] = outer[n + 1] + (counts[n + 1] - counts[n]) * (-heights[n]).exp();
    }
    let mut betas = Vec::with_capacity(levels);
    let mut gammas = Vec::with_capacity(levels);
    for n in 1..=levels {
        betas.push(1.0 / counts[n - 1] - 1.0 / counts[n]);
        gammas.push(counts[n] * (-heights[n - 1]).exp() + outer[n]);
    }
    Ok(RelaxationTerms {
        alpha: 1.0 / tree.leaf_total() as f64,
        betas,
        gammas,
    })
}

/// Autocorrelation of `leaf` after time `t`.
pub fn tree_autocorrelation(tree: &TreeModel, leaf: usize, t: f64) -> Result<f64> {
    Ok(tree_relaxation_terms(tree, leaf)?.eval(t))
}
