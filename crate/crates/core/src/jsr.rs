//! Stability certification of switched closed-loop systems under a
//! weakly-hard automaton, via Gripenberg's branch-and-bound on the lifted
//! pair `{Π_0ᵀ ⊗ Φ_0, Π_1ᵀ ⊗ Φ_1}`.
//!
//! A word `w = w_1 … w_n` (oldest first) maps to the product
//! `P_w = B_{w_n} ⋯ B_{w_1}`, so products follow trace order.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::automata::Automaton;
use crate::constraints::Word;
use crate::error::{Error, Result};
use crate::linalg::{kronecker_csr, singular_max, spectral_radius, CsrMatrix, Matrix, SparseMatrix, KRON_DIM_BUDGET};

pub const MAX_PLANT_DIM: usize = 64;
pub const DEFAULT_DELTA: f64 = 1e-3;
pub const DEFAULT_MAX_ITERATIONS: usize = 100;
pub const DEFAULT_ENTRY_BUDGET: u128 = 1_000_000_000;

/// Closed-loop dynamics on a hit (`phi_hit`) and on a miss (`phi_miss`).
#[derive(Debug, Clone, PartialEq)]
pub struct ClosedLoopPair {
    pub name: String,
    pub phi_hit: Matrix,
    pub phi_miss: Matrix,
}

#[derive(Serialize, Deserialize)]
struct PairFile {
    name: String,
    dim: usize,
    phi_hit: Vec<Vec<f64>>,
    phi_miss: Vec<Vec<f64>>,
}

impl ClosedLoopPair {
    pub fn new(name: impl Into<String>, phi_hit: Matrix, phi_miss: Matrix) -> Result<Self> {
        let n = phi_hit.rows();
        if !phi_hit.is_square() || !phi_miss.is_square() {
            return Err(Error::DimensionMismatch("closed-loop matrices must be square".into()));
        }
        if phi_miss.rows() != n {
            return Err(Error::DimensionMismatch(format!(
                "phi_hit is {n}x{n} but phi_miss is {0}x{0}",
                phi_miss.rows()
            )));
        }
        if n == 0 || n > MAX_PLANT_DIM {
            return Err(Error::InvalidParameters(format!(
                "closed-loop dimension {n} outside 1..={MAX_PLANT_DIM}"
            )));
        }
        Ok(Self {
            name: name.into(),
            phi_hit,
            phi_miss,
        })
    }

    pub fn dim(&self) -> usize {
        self.phi_hit.rows()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: PairFile =
            serde_json::from_str(text).map_err(|e| Error::InvalidParameters(format!("pair file: {e}")))?;
        let pair = Self::new(file.name, Matrix::from_rows(&file.phi_hit)?, Matrix::from_rows(&file.phi_miss)?)?;
        if pair.dim() != file.dim {
            return Err(Error::DimensionMismatch(format!(
                "pair file declares dim {} but matrices are {}x{}",
                file.dim,
                pair.dim(),
                pair.dim()
            )));
        }
        Ok(pair)
    }

    pub fn to_json(&self) -> String {
        let file = PairFile {
            name: self.name.clone(),
            dim: self.dim(),
            phi_hit: self.phi_hit.to_rows(),
            phi_miss: self.phi_miss.to_rows(),
        };
        serde_json::to_string_pretty(&file).expect("pair serialises")
    }
}

/// How the plant state is handled after a miss in generated pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MissStrategy {
    /// The last control value is held.
    Hold,
    /// The control value is zeroed.
    Zero,
}

impl FromStr for MissStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "hold" => Ok(Self::Hold),
            "zero" | "kill" => Ok(Self::Zero),
            other => Err(Error::InvalidParameters(format!("unknown miss strategy {other:?}"))),
        }
    }
}

impl fmt::Display for MissStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Hold => "hold",
            Self::Zero => "zero",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneratorOptions {
    pub seed: u64,
    pub dim: usize,
    pub strategy: MissStrategy,
    /// Spectral radius of `phi_hit`.
    pub hit_radius: f64,
    /// Spectral radius of the open-loop block of `phi_miss`.
    pub open_loop_radius: f64,
}

impl Default for GeneratorOptions {
    fn default() -> Self {
        Self {
            seed: 1,
            dim: 2,
            strategy: MissStrategy::Hold,
            hit_radius: 0.6,
            open_loop_radius: 1.1,
        }
    }
}

/// Deterministic synthetic closed-loop pair.
///
/// `phi_hit` is a perturbed scaled rotation. `phi_miss` is
/// `[[O, b], [0, 1]]` for [`MissStrategy::Hold`] and `[[O, 0], [0, 0]]` for
/// [`MissStrategy::Zero`], with `O` a random open-loop block.
pub fn synthetic_pair(opts: &GeneratorOptions) -> Result<ClosedLoopPair> {
    let n = opts.dim;
    if n == 0 || n > MAX_PLANT_DIM {
        return Err(Error::InvalidParameters(format!("dimension {n} outside 1..={MAX_PLANT_DIM}")));
    }
    if !(opts.hit_radius > 0.0) || !(opts.open_loop_radius >= 0.0) {
        return Err(Error::InvalidParameters("radii must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let phi_hit = scaled_to_radius(near_orthogonal(&mut rng, n, 0.3), opts.hit_radius)?;

    let mut phi_miss = Matrix::zeros(n, n);
    if n == 1 {
        if opts.strategy == MissStrategy::Hold {
            phi_miss[(0, 0)] = 1.0;
        }
    } else {
        let open = scaled_to_radius(near_orthogonal(&mut rng, n - 1, 0.5), opts.open_loop_radius)?;
        for i in 0..n - 1 {
            for j in 0..n - 1 {
                phi_miss[(i, j)] = open[(i, j)];
            }
        }
        if opts.strategy == MissStrategy::Hold {
            for i in 0..n - 1 {
                phi_miss[(i, n - 1)] = rng.gen_range(-0.5..0.5);
            }
            phi_miss[(n - 1, n - 1)] = 1.0;
        }
    }
    ClosedLoopPair::new(format!("synthetic-{}-{}-{}", opts.strategy, n, opts.seed), phi_hit, phi_miss)
}

fn near_orthogonal(rng: &mut ChaCha8Rng, n: usize, noise: f64) -> Matrix {
    // Gram-Schmidt on a random matrix, then a random perturbation
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(n);
    while cols.len() < n {
        let mut v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        for c in &cols {
            let d: f64 = v.iter().zip(c).map(|(a, b)| a * b).sum();
            v.iter_mut().zip(c).for_each(|(a, b)| *a -= d * b);
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-6 {
            cols.push(v.into_iter().map(|x| x / norm).collect());
        }
    }
    let mut m = Matrix::zeros(n, n);
    for (j, c) in cols.iter().enumerate() {
        for i in 0..n {
            m[(i, j)] = c[i] + noise * rng.gen_range(-1.0..1.0);
        }
    }
    m
}

fn scaled_to_radius(m: Matrix, radius: f64) -> Result<Matrix> {
    let sr = spectral_radius(&m)?;
    if sr == 0.0 {
        return Ok(m);
    }
    Ok(m.scale(radius / sr))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Representation {
    Factored,
    Explicit,
}

impl FromStr for Representation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "factored" => Ok(Self::Factored),
            "explicit" => Ok(Self::Explicit),
            other => Err(Error::InvalidParameters(format!("unknown representation {other:?}"))),
        }
    }
}

impl fmt::Display for Representation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Factored => "factored",
            Self::Explicit => "explicit",
        })
    }
}

/// The automaton-lifted switched system.
#[derive(Debug, Clone)]
pub struct LiftedSystem {
    pi_miss: SparseMatrix,
    pi_hit: SparseMatrix,
    phi_miss: Matrix,
    phi_hit: Matrix,
    /// `succ[symbol][state]`, the transition maps behind the Π matrices.
    succ: [Vec<Option<u32>>; 2],
    representation: Representation,
    /// `[B_miss, B_hit]` in explicit mode.
    lifted: Option<[CsrMatrix; 2]>,
}

pub fn lift<L>(pair: &ClosedLoopPair, a: &Automaton<L>, representation: Representation) -> Result<LiftedSystem> {
    let (pi_miss, pi_hit, _) = a.adjacency();
    LiftedSystem::from_parts(pi_miss, pi_hit, pair.phi_miss.clone(), pair.phi_hit.clone(), representation)
}

impl LiftedSystem {
    /// Lifts arbitrary 0/1 transition matrices with at most one entry per row.
    pub fn from_parts(
        pi_miss: SparseMatrix,
        pi_hit: SparseMatrix,
        phi_miss: Matrix,
        phi_hit: Matrix,
        representation: Representation,
    ) -> Result<Self> {
        if pi_miss.dim() != pi_hit.dim() {
            return Err(Error::DimensionMismatch(format!(
                "Π matrices have dimensions {} and {}",
                pi_miss.dim(),
                pi_hit.dim()
            )));
        }
        let pair = ClosedLoopPair::new("lifted", phi_hit, phi_miss)?;
        let to_map = |pi: &SparseMatrix| -> Result<Vec<Option<u32>>> {
            (0..pi.dim())
                .map(|r| match pi.row(r) {
                    [] => Ok(None),
                    [c] => Ok(Some(*c as u32)),
                    _ => Err(Error::InvalidParameters(format!(
                        "transition matrix row {r} has more than one entry"
                    ))),
                })
                .collect()
        };
        let succ = [to_map(&pi_miss)?, to_map(&pi_hit)?];
        let lifted = match representation {
            Representation::Factored => None,
            Representation::Explicit => {
                let dim = pi_miss.dim() * pair.dim();
                if dim > KRON_DIM_BUDGET {
                    return Err(Error::SizeBudgetExceeded {
                        required: dim,
                        budget: KRON_DIM_BUDGET,
                    });
                }
                Some([
                    kronecker_csr(&pi_miss.transpose(), &pair.phi_miss)?,
                    kronecker_csr(&pi_hit.transpose(), &pair.phi_hit)?,
                ])
            }
        };
        Ok(Self {
            pi_miss,
            pi_hit,
            phi_miss: pair.phi_miss,
            phi_hit: pair.phi_hit,
            succ,
            representation,
            lifted,
        })
    }

    pub fn representation(&self) -> Representation {
        self.representation
    }

    pub fn states(&self) -> usize {
        self.pi_miss.dim()
    }

    pub fn plant_dim(&self) -> usize {
        self.phi_hit.rows()
    }

    /// Dimension of the lifted matrices.
    pub fn dim(&self) -> usize {
        self.states() * self.plant_dim()
    }

    pub fn pi_miss(&self) -> &SparseMatrix {
        &self.pi_miss
    }

    pub fn pi_hit(&self) -> &SparseMatrix {
        &self.pi_hit
    }

    pub fn phi_miss(&self) -> &Matrix {
        &self.phi_miss
    }

    pub fn phi_hit(&self) -> &Matrix {
        &self.phi_hit
    }

    /// Explicit lifted matrices `[B_miss, B_hit]`, if materialised.
    pub fn lifted(&self) -> Option<&[CsrMatrix; 2]> {
        self.lifted.as_ref()
    }

    /// Scalar entries held by the system itself.
    pub fn stored_entries(&self) -> u128 {
        let nx = self.plant_dim() as u128;
        match self.representation {
            Representation::Factored => (self.pi_miss.nnz() + self.pi_hit.nnz()) as u128 + 2 * nx * nx,
            Representation::Explicit => 2 * (self.dim() as u128).pow(2),
        }
    }

    fn phi(&self, hit: bool) -> &Matrix {
        if hit {
            &self.phi_hit
        } else {
            &self.phi_miss
        }
    }

    fn letter(&self, hit: bool) -> Result<Product> {
        let pairs = self.succ[hit as usize]
            .iter()
            .enumerate()
            .filter_map(|(s, d)| d.map(|d| (s as u32, d)))
            .collect();
        let path = PathMap { pairs };
        Ok(match &self.lifted {
            Some(b) => Product::Explicit {
                path,
                matrix: b[hit as usize].clone(),
            },
            None => Product::Factored {
                path,
                phi: self.phi(hit).clone(),
            },
        })
    }

    fn extend(&self, p: &Product, hit: bool) -> Result<Product> {
        match (p, &self.lifted) {
            (Product::Explicit { path, matrix }, Some(b)) => Ok(Product::Explicit {
                path: path.then(&self.succ[hit as usize]),
                matrix: b[hit as usize].matmul(matrix)?,
            }),
            (Product::Factored { path, phi }, None) => Ok(Product::Factored {
                path: path.then(&self.succ[hit as usize]),
                phi: self.phi(hit).matmul(phi)?,
            }),
            _ => unreachable!("product representation matches the system"),
        }
    }

    fn product(&self, word: &Word) -> Result<Option<Product>> {
        let bits = word.bits();
        let Some((&first, rest)) = bits.split_first() else {
            return Ok(None);
        };
        let mut p = self.letter(first)?;
        for &b in rest {
            p = self.extend(&p, b)?;
        }
        Ok(Some(p))
    }

    /// Spectral radius, 2-norm, and Π-support of `P_w` for a nonempty word.
    pub fn evaluate_word(&self, word: &Word) -> Result<WordEvaluation> {
        let p = self
            .product(word)?
            .ok_or_else(|| Error::InvalidParameters("cannot evaluate the empty word".into()))?;
        p.evaluate()
    }

    /// `P_w` as a dense matrix, for inspection and testing.
    pub fn word_matrix(&self, word: &Word) -> Result<Matrix> {
        let nx = self.plant_dim();
        match self.product(word)? {
            None => Ok(Matrix::identity(self.dim())),
            Some(Product::Explicit { matrix, .. }) => Ok(matrix.to_dense()),
            Some(Product::Factored { path, phi }) => {
                let mut out = Matrix::zeros(self.dim(), self.dim());
                for &(s, t) in &path.pairs {
                    let (s, t) = (s as usize, t as usize);
                    for i in 0..nx {
                        for j in 0..nx {
                            out[(t * nx + i, s * nx + j)] = phi[(i, j)];
                        }
                    }
                }
                Ok(out)
            }
        }
    }

    /// `Π_w` as a 0/1 matrix (row = source state).
    pub fn path_matrix(&self, word: &Word) -> SparseMatrix {
        let n = self.states();
        let mut map: Vec<Option<u32>> = (0..n as u32).map(Some).collect();
        for &b in word.bits() {
            for v in map.iter_mut() {
                *v = v.and_then(|s| self.succ[b as usize][s as usize]);
            }
        }
        let entries = map
            .iter()
            .enumerate()
            .filter_map(|(s, d)| d.map(|d| (s, d as usize)))
            .collect();
        SparseMatrix::from_entries(n, entries).expect("in-range entries")
    }
}

/// Partial map from source state to the state reached after a word, stored
/// as `(source, target)` pairs sorted by source.
#[derive(Debug, Clone)]
struct PathMap {
    pairs: Vec<(u32, u32)>,
}

impl PathMap {
    fn then(&self, succ: &[Option<u32>]) -> PathMap {
        PathMap {
            pairs: self
                .pairs
                .iter()
                .filter_map(|&(s, t)| succ[t as usize].map(|u| (s, u)))
                .collect(),
        }
    }

    fn nnz(&self) -> usize {
        self.pairs.len()
    }

    /// Whether the functional graph has a cycle, i.e. `ρ(Π_w) = 1`.
    fn has_cycle(&self) -> bool {
        let n = self.pairs.len();
        let lookup = |state: u32| self.pairs.binary_search_by_key(&state, |p| p.0).ok();
        // 0 unvisited, 1 on the current walk, 2 finished
        let mut color = vec![0u8; n];
        let mut walk = Vec::new();
        for start in 0..n {
            if color[start] != 0 {
                continue;
            }
            let mut at = Some(start);
            while let Some(i) = at {
                match color[i] {
                    1 => return true,
                    2 => break,
                    _ => {
                        color[i] = 1;
                        walk.push(i);
                        at = lookup(self.pairs[i].1);
                    }
                }
            }
            for i in walk.drain(..) {
                color[i] = 2;
            }
        }
        false
    }

    /// Largest preimage size, i.e. `‖Π_w‖₂²`.
    fn max_preimage(&self) -> usize {
        let mut targets: Vec<u32> = self.pairs.iter().map(|p| p.1).collect();
        targets.sort_unstable();
        targets
            .chunk_by(|a, b| a == b)
            .map(<[u32]>::len)
            .max()
            .unwrap_or(0)
    }
}

#[derive(Debug, Clone)]
enum Product {
    Factored { path: PathMap, phi: Matrix },
    Explicit { path: PathMap, matrix: CsrMatrix },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WordEvaluation {
    pub rho: f64,
    pub norm: f64,
    /// Nonzeros of `Π_w`.
    pub path_nnz: usize,
}

impl Product {
    fn evaluate(&self) -> Result<WordEvaluation> {
        match self {
            Product::Factored { path, phi } => {
                let path_nnz = path.nnz();
                if path_nnz == 0 {
                    return Ok(WordEvaluation {
                        rho: 0.0,
                        norm: 0.0,
                        path_nnz,
                    });
                }
                let rho = if path.has_cycle() { spectral_radius(phi)? } else { 0.0 };
                let norm = (path.max_preimage() as f64).sqrt() * singular_max(phi)?;
                Ok(WordEvaluation { rho, norm, path_nnz })
            }
            Product::Explicit { path, matrix } => Ok(WordEvaluation {
                rho: matrix.spectral_radius()?,
                norm: matrix.norm2()?,
                path_nnz: path.nnz(),
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    CertifiedStable,
    /// The lower bound reached one. Under an over-approximating automaton
    /// this does not prove the original system unstable.
    LowerBoundAtLeastOne,
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::CertifiedStable => "certified_stable",
            Self::LowerBoundAtLeastOne => "lower_bound_at_least_one",
            Self::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JsrOptions {
    pub delta: f64,
    pub max_iterations: usize,
    pub entry_budget: u128,
    /// Initial lower bound, typically `ρ(phi_hit)`.
    pub seed_lower: Option<f64>,
    pub stop_at_certified: bool,
    pub stop_at_lower_one: bool,
}

impl Default for JsrOptions {
    fn default() -> Self {
        Self {
            delta: DEFAULT_DELTA,
            max_iterations: DEFAULT_MAX_ITERATIONS,
            entry_budget: DEFAULT_ENTRY_BUDGET,
            seed_lower: None,
            stop_at_certified: true,
            stop_at_lower_one: true,
        }
    }
}

/// Bounds and accounting after one frontier depth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Snapshot {
    pub iteration: usize,
    pub lower: f64,
    pub upper: f64,
    /// Peak entries held by retained products so far, in the run's
    /// representation.
    pub stored_entries: u128,
    /// Same peak under factored accounting.
    pub factored_entries: u128,
    /// Same peak under dense explicit accounting.
    pub explicit_entries: u128,
    pub frontier: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JsrResult {
    pub lower: f64,
    pub upper: f64,
    pub iterations: usize,
    pub stored_entries: u128,
    pub factored_entries: u128,
    pub explicit_entries: u128,
    pub verdict: Verdict,
    pub delta: f64,
    pub representation: Representation,
    /// Word attaining the lower bound, when it is not the seed.
    pub lower_word: Option<String>,
    pub exhausted: bool,
    pub history: Vec<Snapshot>,
}

#[derive(Debug, Clone)]
struct Node {
    word: Vec<bool>,
    product: Product,
    /// `min_j ‖P_{w_1..w_j}‖^{1/j}`.
    mu: f64,
    rho_bound: f64,
    path_nnz: usize,
}

fn root_bound(value: f64, len: usize) -> f64 {
    if value <= 0.0 {
        0.0
    } else {
        value.powf(1.0 / len as f64)
    }
}

fn accounting(sys: &LiftedSystem, frontier: &[Node]) -> (u128, u128) {
    let nx2 = (sys.plant_dim() as u128).pow(2);
    let dim2 = (sys.dim() as u128).pow(2);
    let factored = frontier.iter().map(|n| n.path_nnz as u128 + nx2).sum();
    let explicit = dim2 * frontier.len() as u128;
    (factored, explicit)
}

/// Gripenberg's branch-and-bound for the joint spectral radius of the
/// lifted pair.
pub fn gripenberg(sys: &LiftedSystem, opts: &JsrOptions) -> Result<JsrResult> {
    if !(opts.delta > 0.0) || !opts.delta.is_finite() {
        return Err(Error::InvalidParameters(format!("delta must be positive, got {}", opts.delta)));
    }
    let delta = opts.delta;
    let mut lower = opts.seed_lower.unwrap_or(0.0).max(0.0);
    let mut lower_word: Option<Vec<bool>> = None;

    let make = |word: Vec<bool>, product: Product, parent_mu: f64| -> Result<Node> {
        let eval = product.evaluate()?;
        let len = word.len();
        Ok(Node {
            mu: parent_mu.min(root_bound(eval.norm, len)),
            rho_bound: root_bound(eval.rho, len),
            path_nnz: eval.path_nnz,
            word,
            product,
        })
    };

    let mut children: Vec<Node> = [false, true]
        .into_iter()
        .map(|hit| make(vec![hit], sys.letter(hit)?, f64::INFINITY))
        .collect::<Result<_>>()?;

    let mut upper = f64::INFINITY;
    let mut history = Vec::new();
    let mut peak = (0u128, 0u128);
    let mut iteration = 0usize;
    let mut frontier: Vec<Node>;
    let mut over_budget;
    loop {
        for node in &children {
            if node.rho_bound > lower {
                lower = node.rho_bound;
                lower_word = Some(node.word.clone());
            }
        }
        let threshold = lower + delta;
        frontier = children.into_iter().filter(|n| n.mu > threshold).collect();
        let frontier_max = frontier.iter().fold(f64::NEG_INFINITY, |m, n| m.max(n.mu));
        upper = upper.min(threshold.max(frontier_max));

        let (f, e) = accounting(sys, &frontier);
        peak = (peak.0.max(f), peak.1.max(e));
        let stored = match sys.representation {
            Representation::Factored => peak.0,
            Representation::Explicit => peak.1,
        };
        history.push(Snapshot {
            iteration,
            lower,
            upper,
            stored_entries: stored,
            factored_entries: peak.0,
            explicit_entries: peak.1,
            frontier: frontier.len(),
        });
        over_budget = stored > opts.entry_budget;

        if frontier.is_empty()
            || (opts.stop_at_certified && upper < 1.0)
            || (opts.stop_at_lower_one && lower >= 1.0)
            || over_budget
            || iteration >= opts.max_iterations
        {
            break;
        }

        iteration += 1;
        children = frontier
            .par_iter()
            .flat_map_iter(|node| {
                [false, true].into_iter().map(move |hit| {
                    let mut word = node.word.clone();
                    word.push(hit);
                    let product = sys.extend(&node.product, hit)?;
                    make(word, product, node.mu)
                })
            })
            .collect::<Result<Vec<Node>>>()?;
    }

    let verdict = if upper < 1.0 {
        Verdict::CertifiedStable
    } else if lower >= 1.0 {
        Verdict::LowerBoundAtLeastOne
    } else {
        Verdict::Inconclusive
    };
    let last = *history.last().expect("at least one snapshot");
    Ok(JsrResult {
        lower,
        upper,
        iterations: iteration,
        stored_entries: last.stored_entries,
        factored_entries: last.factored_entries,
        explicit_entries: last.explicit_entries,
        verdict,
        delta,
        representation: sys.representation,
        lower_word: lower_word.map(|w| Word::new(w).to_string()),
        exhausted: frontier.is_empty(),
        history,
    })
}

/// Lifts `pair` under `a` and runs [`gripenberg`] seeded with `ρ(phi_hit)`.
pub fn verify_stability<L>(
    pair: &ClosedLoopPair,
    a: &Automaton<L>,
    representation: Representation,
    opts: &JsrOptions,
) -> Result<JsrResult> {
    let sys = lift(pair, a, representation)?;
    let seed = spectral_radius(&pair.phi_hit)?;
    let opts = JsrOptions {
        seed_lower: Some(opts.seed_lower.map_or(seed, |s| s.max(seed))),
        ..*opts
    };
    gripenberg(&sys, &opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::{build_compressed, build_isomorphic, build_minimal};
    use proptest::prelude::*;

    fn pt(rows: &[Vec<f64>]) -> Matrix {
        Matrix::from_rows(rows).unwrap()
    }

    fn w(s: &str) -> Word {
        s.parse().unwrap()
    }

    fn one_state(miss_loop: bool, phi_miss: Matrix, phi_hit: Matrix, rep: Representation) -> LiftedSystem {
        let miss = SparseMatrix::from_entries(1, if miss_loop { vec![(0, 0)] } else { vec![] }).unwrap();
        let hit = SparseMatrix::from_entries(1, vec![(0, 0)]).unwrap();
        LiftedSystem::from_parts(miss, hit, phi_miss, phi_hit, rep).unwrap()
    }

    fn rotation(theta: f64, scale: f64) -> Matrix {
        pt(&[
            vec![scale * theta.cos(), -scale * theta.sin()],
            vec![scale * theta.sin(), scale * theta.cos()],
        ])
    }

    /// `max_{|w| ≤ len, w accepted} ρ(P_w)^{1/|w|}` by exhaustive enumeration.
    fn brute_force_lower(sys: &LiftedSystem, len: usize) -> f64 {
        let mut best: f64 = 0.0;
        for l in 1..=len {
            for v in 0..1u64 << l {
                let word = Word::from_index(v, l);
                let rho = spectral_radius(&sys.word_matrix(&word).unwrap()).unwrap();
                best = best.max(root_bound(rho, l));
            }
        }
        best
    }

    #[test]
    fn singleton_set_recovers_spectral_radius() {
        let a = Matrix::diag(&[0.5, 0.25]);
        for rep in [Representation::Factored, Representation::Explicit] {
            let sys = one_state(false, Matrix::zeros(2, 2), a.clone(), rep);
            let r = gripenberg(&sys, &JsrOptions::default()).unwrap();
            assert!((r.lower - 0.5).abs() <= 1e-3 + 1e-12 && (r.upper - 0.5).abs() <= 1e-3 + 1e-12, "{r:?}");
            assert_eq!(r.verdict, Verdict::CertifiedStable);
            assert!(r.exhausted);
        }
    }

    #[test]
    fn golden_ratio_pair_by_depth_two() {
        let a0 = pt(&[vec![1.0, 1.0], vec![0.0, 1.0]]);
        let a1 = pt(&[vec![1.0, 0.0], vec![1.0, 1.0]]);
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        for rep in [Representation::Factored, Representation::Explicit] {
            let sys = one_state(true, a0.clone(), a1.clone(), rep);
            let opts = JsrOptions {
                max_iterations: 1,
                stop_at_lower_one: false,
                ..Default::default()
            };
            let r = gripenberg(&sys, &opts).unwrap();
            assert_eq!(r.iterations, 1);
            assert!(r.lower >= phi - 1e-6, "{r:?}");
            assert!(r.upper >= r.lower);
            assert_eq!(r.verdict, Verdict::LowerBoundAtLeastOne);
        }
    }

    #[test]
    fn lift_bookkeeping() {
        let h = build_isomorphic(2, 5).unwrap();
        let pair = ClosedLoopPair::new("p", Matrix::identity(2), Matrix::identity(2)).unwrap();
        let sys = lift(&pair, &h, Representation::Factored).unwrap();
        let (miss, hit, _) = h.adjacency();
        assert_eq!(sys.stored_entries(), (miss.nnz() + hit.nnz() + 8) as u128);

        let a = build_minimal(2, 36).unwrap();
        let sys = lift(&pair, &a, Representation::Explicit).unwrap();
        assert_eq!(sys.dim(), 1260);
        assert_eq!(sys.lifted().unwrap()[0].rows(), 1260);

        let big = build_minimal(2, 300).unwrap();
        assert!(matches!(
            lift(&pair, &big, Representation::Explicit),
            Err(Error::SizeBudgetExceeded { .. })
        ));
        assert!(lift(&pair, &big, Representation::Factored).is_ok());
    }

    #[test]
    fn factored_and_explicit_words_agree() {
        let pair = synthetic_pair(&GeneratorOptions {
            seed: 4,
            dim: 3,
            ..Default::default()
        })
        .unwrap();
        let a = build_compressed(2, 8, 3).unwrap();
        let f = lift(&pair, &a, Representation::Factored).unwrap();
        let e = lift(&pair, &a, Representation::Explicit).unwrap();
        for s in ["1101", "1", "0", "00", "0110100", "10110111", "000"] {
            let (x, y) = (f.evaluate_word(&w(s)).unwrap(), e.evaluate_word(&w(s)).unwrap());
            assert!((x.rho - y.rho).abs() <= 1e-10, "{s}: {x:?} {y:?}");
            assert!((x.norm - y.norm).abs() <= 1e-10 * x.norm.max(1.0), "{s}: {x:?} {y:?}");
            let dense = f.word_matrix(&w(s)).unwrap();
            assert!(dense.max_abs_diff(&e.word_matrix(&w(s)).unwrap()) <= 1e-12);
            if x.rho == 0.0 {
                // nilpotent: dense eigenvalues are unreliable, check a power instead
                let mut power = dense.clone();
                for _ in 0..dense.rows() {
                    power = power.matmul(&dense).unwrap();
                }
                assert_eq!(power.max_abs(), 0.0, "{s}");
            } else {
                let rho = spectral_radius(&dense).unwrap();
                assert!((rho - x.rho).abs() <= 1e-8, "{s}: dense {rho} vs {}", x.rho);
            }
            assert!((singular_max(&dense).unwrap() - x.norm).abs() <= 1e-8 * x.norm.max(1.0));
        }
    }

    #[test]
    fn word_product_follows_trace_order() {
        // one state with both self-loops: P_w = Φ_{w_n} ⋯ Φ_{w_1}
        let a0 = pt(&[vec![1.0, 2.0], vec![0.0, 1.0]]);
        let a1 = pt(&[vec![0.0, 1.0], vec![1.0, 3.0]]);
        let sys = one_state(true, a0.clone(), a1.clone(), Representation::Factored);
        let got = sys.word_matrix(&w("01")).unwrap();
        assert_eq!(got, a1.matmul(&a0).unwrap());
    }

    #[test]
    fn rejected_words_have_zero_path_product() {
        let a = build_minimal(2, 5).unwrap();
        let pair = ClosedLoopPair::new("p", Matrix::identity(1), Matrix::identity(1)).unwrap();
        let sys = lift(&pair, &a, Representation::Factored).unwrap();
        for len in 1..=8 {
            for v in 0..1u64 << len {
                let word = Word::from_index(v, len);
                // direct product of the Π matrices along the word
                let mut prod = Matrix::identity(a.len());
                for &b in word.bits() {
                    let pi = if b { sys.pi_hit() } else { sys.pi_miss() };
                    prod = prod.matmul(&pi.to_dense()).unwrap();
                }
                let zero = prod.max_abs() == 0.0;
                let eval = sys.evaluate_word(&word).unwrap();
                assert_eq!(zero, eval.path_nnz == 0, "{word}");
                assert_eq!(prod, sys.path_matrix(&word).to_dense());
                // the row of the initial state is nonzero exactly for accepted words
                let from_init = (0..a.len()).any(|j| prod[(0, j)] != 0.0);
                assert_eq!(from_init, a.accepts(&word), "{word}");
            }
        }
    }

    #[test]
    fn stable_rotation_under_compression_certifies() {
        let pair = ClosedLoopPair::new("rot", rotation(0.3, 0.9), Matrix::identity(2)).unwrap();
        let t = build_compressed(2, 8, 4).unwrap();
        let r = verify_stability(&pair, &t, Representation::Factored, &JsrOptions::default()).unwrap();
        assert_eq!(r.verdict, Verdict::CertifiedStable, "{r:?}");
        let sys = lift(&pair, &t, Representation::Factored).unwrap();
        let brute = brute_force_lower(&sys, 12);
        assert!(brute < 1.0);
        assert!(r.lower <= brute + 1e-12 || r.lower <= 0.9 + 1e-12);
        assert!(brute <= r.upper + 1e-12);
    }

    #[test]
    fn seeded_lower_bound_and_stops() {
        let pair = synthetic_pair(&GeneratorOptions::default()).unwrap();
        let a = build_minimal(2, 8).unwrap();
        let seed = spectral_radius(&pair.phi_hit).unwrap();
        let r = verify_stability(&pair, &a, Representation::Factored, &JsrOptions::default()).unwrap();
        assert!((r.history[0].lower - seed).abs() <= 1e-12, "{:?}", r.history[0]);

        let hot = ClosedLoopPair::new("hot", pair.phi_hit.scale(1.01 / seed), pair.phi_miss.clone()).unwrap();
        let r = verify_stability(&hot, &a, Representation::Factored, &JsrOptions::default()).unwrap();
        assert_eq!(r.verdict, Verdict::LowerBoundAtLeastOne);
        assert_eq!(r.iterations, 0);
    }

    #[test]
    fn trim_with_unit_compression_matches_exact() {
        let pair = synthetic_pair(&GeneratorOptions::default()).unwrap();
        let a = build_isomorphic(2, 8).unwrap();
        let t = build_compressed(2, 8, 1).unwrap();
        let ra = verify_stability(&pair, &a, Representation::Factored, &JsrOptions::default()).unwrap();
        let rt = verify_stability(&pair, &t, Representation::Factored, &JsrOptions::default()).unwrap();
        assert_eq!(ra.verdict, rt.verdict);
        assert_eq!(ra.history, rt.history);
    }

    #[test]
    fn bounds_are_monotone_and_ordered() {
        let pair = synthetic_pair(&GeneratorOptions {
            seed: 2,
            dim: 3,
            ..Default::default()
        })
        .unwrap();
        let a = build_minimal(2, 8).unwrap();
        let opts = JsrOptions {
            max_iterations: 12,
            stop_at_certified: false,
            ..Default::default()
        };
        let r = verify_stability(&pair, &a, Representation::Factored, &opts).unwrap();
        for pair in r.history.windows(2) {
            assert!(pair[1].lower >= pair[0].lower);
            assert!(pair[1].upper <= pair[0].upper);
            assert!(pair[1].stored_entries >= pair[0].stored_entries);
            assert!(pair[1].factored_entries <= pair[1].explicit_entries);
        }
        for s in &r.history {
            assert!(s.lower <= s.upper + 1e-12);
        }
        assert_eq!(r.verdict == Verdict::CertifiedStable, r.upper < 1.0);
    }

    #[test]
    fn explicit_accounting_of_one_product() {
        // a single retained 4x4 product
        let a = pt(&[vec![2.0, 0.0], vec![0.0, 1.0]]);
        let miss = SparseMatrix::from_entries(2, vec![]).unwrap();
        let hit = SparseMatrix::from_entries(2, vec![(0, 0), (1, 0)]).unwrap();
        let sys = LiftedSystem::from_parts(miss, hit, Matrix::zeros(2, 2), a, Representation::Explicit).unwrap();
        let opts = JsrOptions {
            max_iterations: 0,
            ..Default::default()
        };
        let r = gripenberg(&sys, &opts).unwrap();
        assert_eq!(r.history[0].frontier, 1);
        assert_eq!(r.stored_entries, 16);
        assert_eq!(r.factored_entries, 2 + 4);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(ClosedLoopPair::new("x", Matrix::identity(2), Matrix::identity(3)).is_err());
        assert!(ClosedLoopPair::new("x", Matrix::zeros(2, 3), Matrix::zeros(2, 3)).is_err());
        assert!(ClosedLoopPair::new("x", Matrix::identity(65), Matrix::identity(65)).is_err());
        let two = SparseMatrix::from_entries(1, vec![(0, 0)]).unwrap();
        let wide = SparseMatrix::from_entries(2, vec![(0, 0), (0, 1)]).unwrap();
        assert!(LiftedSystem::from_parts(two.clone(), wide, Matrix::identity(1), Matrix::identity(1), Representation::Factored).is_err());
        let sys = one_state(false, Matrix::identity(1), Matrix::identity(1), Representation::Factored);
        let opts = JsrOptions {
            delta: 0.0,
            ..Default::default()
        };
        assert!(gripenberg(&sys, &opts).is_err());
    }

    #[test]
    fn pair_json_round_trip() {
        let pair = synthetic_pair(&GeneratorOptions {
            seed: 3,
            dim: 3,
            strategy: MissStrategy::Zero,
            ..Default::default()
        })
        .unwrap();
        let back = ClosedLoopPair::from_json(&pair.to_json()).unwrap();
        assert_eq!(back, pair);
        for seed in 1..=20 {
            for dim in 1..=4 {
                let pair = synthetic_pair(&GeneratorOptions { seed, dim, ..Default::default() }).unwrap();
                assert_eq!(ClosedLoopPair::from_json(&pair.to_json()).unwrap(), pair, "seed {seed} dim {dim}");
            }
        }
        assert!(ClosedLoopPair::from_json(r#"{"name":"a","dim":2,"phi_hit":[[1]],"phi_miss":[[1]]}"#).is_err());
        assert!(ClosedLoopPair::from_json("{").is_err());
    }

    #[test]
    fn generator_shapes() {
        for strategy in [MissStrategy::Hold, MissStrategy::Zero] {
            for dim in 1..=4 {
                let opts = GeneratorOptions {
                    seed: 7,
                    dim,
                    strategy,
                    ..Default::default()
                };
                let p = synthetic_pair(&opts).unwrap();
                assert_eq!(p, synthetic_pair(&opts).unwrap());
                assert!((spectral_radius(&p.phi_hit).unwrap() - 0.6).abs() < 1e-9);
                let last = p.phi_miss[(dim - 1, dim - 1)];
                assert_eq!(last, if strategy == MissStrategy::Hold { 1.0 } else { 0.0 });
                for j in 0..dim - 1 {
                    assert_eq!(p.phi_miss[(dim - 1, j)], 0.0);
                }
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn scaling_covariance(seed in 1u64..50, alpha in 0.2f64..3.0) {
            let pair = synthetic_pair(&GeneratorOptions { seed, dim: 2, ..Default::default() }).unwrap();
            let a = build_minimal(2, 5).unwrap();
            let scaled = ClosedLoopPair::new("s", pair.phi_hit.scale(alpha), pair.phi_miss.scale(alpha)).unwrap();
            let opts = JsrOptions { max_iterations: 6, stop_at_certified: false, stop_at_lower_one: false, ..Default::default() };
            let base = gripenberg(&lift(&pair, &a, Representation::Factored).unwrap(), &opts).unwrap();
            let scaled_opts = JsrOptions { delta: opts.delta * alpha, ..opts };
            let r = gripenberg(&lift(&scaled, &a, Representation::Factored).unwrap(), &scaled_opts).unwrap();
            prop_assert_eq!(base.history.len(), r.history.len());
            for (x, y) in base.history.iter().zip(&r.history) {
                prop_assert!((x.lower * alpha - y.lower).abs() <= 1e-9 * alpha.max(1.0));
                prop_assert!((x.upper * alpha - y.upper).abs() <= 1e-9 * alpha.max(1.0));
                prop_assert_eq!(x.frontier, y.frontier);
            }
        }

        #[test]
        fn lower_bound_matches_brute_force(seed in 1u64..30) {
            let pair = synthetic_pair(&GeneratorOptions { seed, dim: 2, ..Default::default() }).unwrap();
            let a = build_minimal(2, 5).unwrap();
            let sys = lift(&pair, &a, Representation::Factored).unwrap();
            let opts = JsrOptions { max_iterations: 7, stop_at_certified: false, stop_at_lower_one: false, delta: 1e-12, ..Default::default() };
            let r = gripenberg(&sys, &opts).unwrap();
            let brute = brute_force_lower(&sys, 8);
            // every word of length ≤ 8 either was scored or had a prefix pruned
            prop_assert!(r.lower <= brute + 1e-12);
            prop_assert!(brute <= r.upper + 1e-9);
        }
    }
}
