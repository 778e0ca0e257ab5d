//! Constraint automata for `AnyMiss(m, k)`.
//!
//! Three constructions share one representation:
//!
//! * the minimal acceptor `A_{m,k}`, whose states are length-`k` windows
//!   with a leading run of "don't care" stars ([`StarLabel`]);
//! * the isomorphic tuple automaton `H_{m,k}`, whose states record for each
//!   `i` how many hits are needed before at most `i - 1` misses remain in
//!   the window ([`TupleLabel`]);
//! * the compressed automaton `T_{m,k,c}`, which merges critical tuple
//!   states in groups of up to `c` and over-approximates the language.
//!
//! Every state is accepting, every state has a hit successor, and a miss
//! successor exists exactly on non-critical states. States are indexed with
//! the initial state at `0` followed by the remaining tuples in descending
//! lexicographic order, so `A_{m,k}` and `H_{m,k}` share adjacency matrices.

use std::collections::HashMap;
use std::fmt;
use std::hash::Hash;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use crate::constraints::{WeaklyHardConstraint, Word};
use crate::error::{Error, Result};
use crate::linalg::SparseMatrix;

/// Default ceiling on the number of states a builder may allocate.
pub const DEFAULT_STATE_BUDGET: u64 = 5_000_000;

/// Environment variable overriding [`DEFAULT_STATE_BUDGET`].
pub const STATE_BUDGET_ENV: &str = "WHTRIM_STATE_BUDGET";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StateBudget(pub u64);

impl Default for StateBudget {
    fn default() -> Self {
        StateBudget(DEFAULT_STATE_BUDGET)
    }
}

impl StateBudget {
    /// Reads [`STATE_BUDGET_ENV`], falling back to the default when unset.
    pub fn from_env() -> Result<Self> {
        match std::env::var(STATE_BUDGET_ENV) {
            Ok(raw) => raw.trim().parse::<u64>().map(StateBudget).map_err(|_| {
                Error::InvalidParameters(format!("{STATE_BUDGET_ENV} must be an integer, got {raw:?}"))
            }),
            Err(_) => Ok(Self::default()),
        }
    }

    fn check(&self, required: &BigUint) -> Result<usize> {
        match required.to_u64() {
            Some(n) if n <= self.0 => Ok(n as usize),
            _ => Err(Error::StateBudgetExceeded {
                required: required.to_string(),
                budget: self.0,
            }),
        }
    }
}

/// A state of `A_{m,k}`: `stars` leading don't-care symbols followed by an
/// explicit suffix of `k - stars` bits (oldest first).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct StarLabel {
    stars: u32,
    suffix: Vec<bool>,
}

impl StarLabel {
    pub fn new(stars: u32, suffix: Vec<bool>) -> Self {
        Self { stars, suffix }
    }

    pub fn stars(&self) -> u32 {
        self.stars
    }

    pub fn suffix(&self) -> &[bool] {
        &self.suffix
    }

    /// The full window with each star read as a miss.
    pub fn bits(&self) -> Vec<bool> {
        let mut bits = vec![false; self.stars as usize];
        bits.extend_from_slice(&self.suffix);
        bits
    }

    /// Whether this is a state of `A_{m,k}`.
    pub fn is_valid(&self, m: u32, k: u32) -> bool {
        self.stars <= m
            && self.stars as usize + self.suffix.len() == k as usize
            && self.suffix.first() == Some(&true)
            && self.suffix.iter().filter(|b| **b).count() == (k - m) as usize
    }
}

impl fmt::Display for StarLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for _ in 0..self.stars {
            f.write_str("*")?;
        }
        for &b in &self.suffix {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for StarLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut stars = 0;
        let mut suffix = Vec::new();
        for ch in s.chars() {
            match ch {
                '*' | '⋆' | 'X' if suffix.is_empty() => stars += 1,
                '0' => suffix.push(false),
                '1' => suffix.push(true),
                other => {
                    return Err(Error::InvalidParameters(format!(
                        "unexpected symbol {other:?} in star label {s:?}"
                    )))
                }
            }
        }
        Ok(Self { stars, suffix })
    }
}

/// A state of `H_{m,k}` or `T_{m,k,c}`: a non-increasing `m`-tuple with
/// entries in `[0, k - m]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TupleLabel(pub Vec<u32>);

impl TupleLabel {
    pub fn values(&self) -> &[u32] {
        &self.0
    }

    pub fn arity(&self) -> usize {
        self.0.len()
    }

    /// Critical states admit no miss.
    pub fn is_critical(&self) -> bool {
        self.0.last().is_some_and(|&u| u != 0)
    }

    /// Membership in the node set `U` of `H_{m,k}`.
    pub fn in_full_set(&self, m: u32, k: u32) -> bool {
        self.0.len() == m as usize
            && self.0.iter().all(|&u| u <= k - m)
            && self.0.windows(2).all(|w| w[0] >= w[1])
    }

    /// Membership in the node set `U_c` of `T_{m,k,c}`.
    pub fn in_compressed_set(&self, m: u32, k: u32, c: u32) -> bool {
        self.in_full_set(m, k) && (m == 1 || retained_by_compression(&self.0, c))
    }

    /// Componentwise `self >= other`, the simulation order.
    pub fn dominates(&self, other: &TupleLabel) -> bool {
        self.0.len() == other.0.len() && self.0.iter().zip(&other.0).all(|(a, b)| a >= b)
    }
}

impl fmt::Display for TupleLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, u) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{u}")?;
        }
        Ok(())
    }
}

impl FromStr for TupleLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let inner = s.trim().trim_start_matches(['<', '⟨']).trim_end_matches(['>', '⟩']);
        inner
            .split(',')
            .map(|p| {
                p.trim().parse::<u32>().map_err(|_| {
                    Error::InvalidParameters(format!("bad tuple component {p:?} in {s:?}"))
                })
            })
            .collect::<Result<Vec<_>>>()
            .map(TupleLabel)
    }
}

fn retained_by_compression(u: &[u32], c: u32) -> bool {
    (u[0] - u[1]).is_multiple_of(c) || u[u.len() - 1] == 0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AutomatonKind {
    Minimal,
    Isomorphic,
    Compressed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AutomatonParams {
    pub m: u32,
    pub k: u32,
    /// Compression factor; `None` for the exact automata.
    pub compression: Option<u32>,
    pub kind: AutomatonKind,
}

impl fmt::Display for AutomatonParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.compression {
            Some(c) => write!(f, "trim:{}:{}:{}", self.m, self.k, c),
            None => write!(f, "anymiss:{}:{}", self.m, self.k),
        }
    }
}

/// Deterministic automaton over `{0, 1}` with all states accepting.
#[derive(Debug, Clone)]
pub struct Automaton<L> {
    labels: Vec<L>,
    /// `next[s][symbol]`, symbol `0` = miss, `1` = hit.
    next: Vec<[Option<u32>; 2]>,
    params: AutomatonParams,
}

impl<L> Automaton<L> {
    pub fn params(&self) -> AutomatonParams {
        self.params
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn initial(&self) -> usize {
        0
    }

    pub fn labels(&self) -> &[L] {
        &self.labels
    }

    pub fn label(&self, state: usize) -> &L {
        &self.labels[state]
    }

    pub fn successor(&self, state: usize, hit: bool) -> Option<usize> {
        self.next[state][hit as usize].map(|s| s as usize)
    }

    /// Successor table indexed by state, then by symbol (`0` miss, `1` hit).
    pub fn successor_table(&self) -> &[[Option<u32>; 2]] {
        &self.next
    }

    pub fn is_critical(&self, state: usize) -> bool {
        self.next[state][0].is_none()
    }

    /// `(src, symbol, dst)` triples, ordered by source then symbol.
    pub fn transitions(&self) -> impl Iterator<Item = (usize, u8, usize)> + '_ {
        self.next.iter().enumerate().flat_map(|(src, succ)| {
            (0..2u8).filter_map(move |sym| succ[sym as usize].map(|dst| (src, sym, dst as usize)))
        })
    }

    pub fn transition_count(&self) -> usize {
        self.next.iter().map(|s| s.iter().flatten().count()).sum()
    }

    /// Final state after reading `word` from the initial state.
    pub fn run(&self, word: &Word) -> Option<usize> {
        word.bits()
            .iter()
            .try_fold(self.initial(), |state, &hit| self.successor(state, hit))
    }

    pub fn accepts(&self, word: &Word) -> bool {
        self.run(word).is_some()
    }

    /// States reachable from the initial state.
    pub fn reachable(&self) -> Vec<bool> {
        let mut seen = vec![false; self.len()];
        let mut stack = vec![self.initial()];
        seen[self.initial()] = true;
        while let Some(s) = stack.pop() {
            for t in self.next[s].iter().flatten() {
                let t = *t as usize;
                if !seen[t] {
                    seen[t] = true;
                    stack.push(t);
                }
            }
        }
        seen
    }

    /// Miss, hit, and combined 0/1 adjacency matrices (row = source).
    pub fn adjacency(&self) -> (SparseMatrix, SparseMatrix, SparseMatrix) {
        let n = self.len();
        let mut miss = Vec::new();
        let mut hit = Vec::new();
        let mut any = Vec::new();
        for (src, succ) in self.next.iter().enumerate() {
            if let Some(d) = succ[0] {
                miss.push((src, d as usize));
            }
            if let Some(d) = succ[1] {
                hit.push((src, d as usize));
            }
            let mut row: Vec<usize> = succ.iter().flatten().map(|d| *d as usize).collect();
            row.sort_unstable();
            row.dedup();
            any.extend(row.into_iter().map(|d| (src, d)));
        }
        (
            SparseMatrix::from_sorted_unchecked(n, miss),
            SparseMatrix::from_sorted_unchecked(n, hit),
            SparseMatrix::from_sorted_unchecked(n, any),
        )
    }
}

/// Index of the `i`-th last miss in `bits` (oldest first), counting
/// positions from the newest symbol at `1`. `None` stands for infinity:
/// fewer than `i` misses are present.
pub fn g_index(bits: &[bool], i: usize) -> Option<usize> {
    if i == 0 {
        return None;
    }
    let mut seen = 0;
    for (pos, &b) in bits.iter().rev().enumerate() {
        if !b {
            seen += 1;
            if seen == i {
                return Some(pos + 1);
            }
        }
    }
    None
}

/// Maps a state of `A_{m,k}` to its tuple label in `H_{m,k}`:
/// `u_i = k - m + i - g(v, i)` with stars read as misses.
pub fn node_map(v: &StarLabel, m: u32, k: u32) -> TupleLabel {
    let bits = v.bits();
    let tuple = (1..=m as usize)
        .map(|i| {
            let g = g_index(&bits, i).expect("a valid window has exactly m misses");
            (k as usize - m as usize + i - g) as u32
        })
        .collect();
    TupleLabel(tuple)
}

pub fn binomial(n: u64, r: u64) -> BigUint {
    if r > n {
        return BigUint::zero();
    }
    let r = r.min(n - r);
    let mut acc = BigUint::one();
    for i in 0..r {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

fn ceil_sum(upto: u64, c: u64) -> BigUint {
    // sum_{j=1}^{upto} ceil(j / c)
    (1..=upto).map(|j| BigUint::from(j.div_ceil(c))).sum()
}

/// Closed-form number of states of `T_{m,k,c}` (and of `A_{m,k}` at `c = 1`).
pub fn state_count(m: u32, k: u32, c: u32) -> Result<BigUint> {
    validate_params(m, k)?;
    if c == 0 {
        return Err(Error::InvalidParameters("compression factor must be >= 1".into()));
    }
    let (m, k, c) = (m as u64, k as u64, c as u64);
    let d = k - m;
    let noncritical = binomial(k - 1, m - 1);
    let critical = match m {
        1 => BigUint::from(d),
        2 => ceil_sum(d, c),
        _ => (0..d)
            .map(|i| binomial(m - 3 + i, i) * ceil_sum(d - i, c))
            .sum(),
    };
    Ok(noncritical + critical)
}

fn validate_params(m: u32, k: u32) -> Result<()> {
    if m == 0 || m >= k {
        return Err(Error::InvalidParameters(format!("automaton requires 1 <= m < k, got m={m}, k={k}")));
    }
    Ok(())
}

/// Non-increasing `m`-tuples over `[0, max]`: `⟨0,…,0⟩` first, then the rest
/// in descending lexicographic order.
fn enumerate_tuples(m: usize, max: u32, keep: impl Fn(&[u32]) -> bool) -> Vec<TupleLabel> {
    fn rec(prefix: &mut Vec<u32>, m: usize, bound: u32, out: &mut Vec<Vec<u32>>) {
        if prefix.len() == m {
            out.push(prefix.clone());
            return;
        }
        for v in (0..=bound).rev() {
            prefix.push(v);
            rec(prefix, m, v, out);
            prefix.pop();
        }
    }
    let mut all = Vec::new();
    rec(&mut Vec::with_capacity(m), m, max, &mut all);
    // descending order puts the all-zero tuple last
    let zero = all.pop().expect("at least the zero tuple");
    std::iter::once(zero)
        .chain(all)
        .filter(|t| keep(t))
        .map(TupleLabel)
        .collect()
}

fn tuple_automaton(
    params: AutomatonParams,
    labels: Vec<TupleLabel>,
    miss_target: impl Fn(&[u32]) -> Vec<u32>,
) -> Automaton<TupleLabel> {
    let index: HashMap<&[u32], u32> = labels
        .iter()
        .enumerate()
        .map(|(i, l)| (l.values(), i as u32))
        .collect();
    let lookup = |t: &[u32]| -> u32 {
        *index
            .get(t)
            .unwrap_or_else(|| panic!("transition target {t:?} outside the node set of {params}"))
    };
    let next = labels
        .iter()
        .map(|l| {
            let u = l.values();
            let hit: Vec<u32> = u.iter().map(|&x| x.saturating_sub(1)).collect();
            let miss = (u[u.len() - 1] == 0).then(|| lookup(&miss_target(u)));
            [miss, Some(lookup(&hit))]
        })
        .collect();
    Automaton { labels, next, params }
}

/// The minimal acceptor `A_{m,k}` with the default state budget.
pub fn build_minimal(m: u32, k: u32) -> Result<Automaton<StarLabel>> {
    build_minimal_with_budget(m, k, StateBudget::default())
}

pub fn build_minimal_with_budget(m: u32, k: u32, budget: StateBudget) -> Result<Automaton<StarLabel>> {
    validate_params(m, k)?;
    budget.check(&binomial(k as u64, m as u64))?;
    let (mu, ku) = (m as usize, k as usize);

    // Window ⋆^p v with v starting at a hit, k - m hits, m - p misses.
    let mut labels = Vec::new();
    for p in 0..=mu {
        let rest = ku - p - 1;
        let zeros = mu - p;
        for_each_placement(rest, zeros, |zero_mask| {
            let mut suffix = Vec::with_capacity(ku - p);
            suffix.push(true);
            suffix.extend(zero_mask.iter().map(|z| !z));
            labels.push(StarLabel::new(p as u32, suffix));
        });
    }

    // Order by tuple image so A and H share indices.
    let mut keyed: Vec<(TupleLabel, StarLabel)> =
        labels.into_iter().map(|v| (node_map(&v, m, k), v)).collect();
    keyed.sort_by(|a, b| {
        let za = a.0.values().iter().all(|&x| x == 0);
        let zb = b.0.values().iter().all(|&x| x == 0);
        zb.cmp(&za).then_with(|| b.0.cmp(&a.0))
    });
    let labels: Vec<StarLabel> = keyed.into_iter().map(|(_, v)| v).collect();

    let index: HashMap<&StarLabel, u32> = labels.iter().enumerate().map(|(i, l)| (l, i as u32)).collect();
    let next = labels
        .iter()
        .map(|v| {
            let succ = |hit: bool| {
                shift_window(v, hit, ku - mu).map(|t| {
                    *index
                        .get(&t)
                        .unwrap_or_else(|| panic!("shifted window {t} missing from A_{{{m},{k}}}"))
                })
            };
            [succ(false), succ(true)]
        })
        .collect();
    Ok(Automaton {
        labels,
        next,
        params: AutomatonParams {
            m,
            k,
            compression: None,
            kind: AutomatonKind::Minimal,
        },
    })
}

/// Calls `f` with every boolean mask of length `len` having `ones` set entries.
fn for_each_placement(len: usize, ones: usize, mut f: impl FnMut(&[bool])) {
    fn rec(mask: &mut Vec<bool>, len: usize, ones: usize, f: &mut dyn FnMut(&[bool])) {
        let remaining = len - mask.len();
        if remaining == 0 {
            f(mask);
            return;
        }
        let placed = mask.iter().filter(|b| **b).count();
        let left = ones - placed;
        if left < remaining {
            mask.push(false);
            rec(mask, len, ones, f);
            mask.pop();
        }
        if left > 0 {
            mask.push(true);
            rec(mask, len, ones, f);
            mask.pop();
        }
    }
    rec(&mut Vec::with_capacity(len), len, ones, &mut f);
}

/// Slides the window by one symbol and re-canonicalises the star prefix.
/// The explicit part becomes the shortest suffix holding all `hits` hits;
/// `None` if fewer remain, i.e. the miss is not admissible.
fn shift_window(v: &StarLabel, hit: bool, hits: usize) -> Option<StarLabel> {
    let mut t = v.bits();
    t.remove(0);
    t.push(hit);
    let mut count = 0;
    for start in (0..t.len()).rev() {
        if t[start] {
            count += 1;
            if count == hits {
                return Some(StarLabel::new(start as u32, t[start..].to_vec()));
            }
        }
    }
    None
}

/// The tuple automaton `H_{m,k}` with the default state budget.
pub fn build_isomorphic(m: u32, k: u32) -> Result<Automaton<TupleLabel>> {
    build_isomorphic_with_budget(m, k, StateBudget::default())
}

pub fn build_isomorphic_with_budget(m: u32, k: u32, budget: StateBudget) -> Result<Automaton<TupleLabel>> {
    validate_params(m, k)?;
    budget.check(&binomial(k as u64, m as u64))?;
    let d = k - m;
    let labels = enumerate_tuples(m as usize, d, |_| true);
    let params = AutomatonParams {
        m,
        k,
        compression: None,
        kind: AutomatonKind::Isomorphic,
    };
    Ok(tuple_automaton(params, labels, |u| {
        std::iter::once(d).chain(u[..u.len() - 1].iter().copied()).collect()
    }))
}

/// The compressed automaton `T_{m,k,c}` with the default state budget.
pub fn build_compressed(m: u32, k: u32, c: u32) -> Result<Automaton<TupleLabel>> {
    build_compressed_with_budget(m, k, c, StateBudget::default())
}

pub fn build_compressed_with_budget(m: u32, k: u32, c: u32, budget: StateBudget) -> Result<Automaton<TupleLabel>> {
    let required = state_count(m, k, c)?;
    budget.check(&required)?;
    let params = AutomatonParams {
        m,
        k,
        compression: Some(c),
        kind: AutomatonKind::Compressed,
    };
    if m == 1 {
        let mut h = build_isomorphic_with_budget(m, k, budget)?;
        h.params = params;
        return Ok(h);
    }
    let d = k - m;
    let labels = enumerate_tuples(m as usize, d, |u| retained_by_compression(u, c));
    Ok(tuple_automaton(params, labels, |u| {
        let head = if u[u.len() - 2] == 0 { d } else { d - (d - u[0]) % c };
        std::iter::once(head).chain(u[..u.len() - 1].iter().copied()).collect()
    }))
}

/// Whether `node_map` is a transition-preserving bijection from `a` onto `h`
/// that sends the initial state to the initial state.
pub fn check_isomorphism(a: &Automaton<StarLabel>, h: &Automaton<TupleLabel>) -> bool {
    let (pa, ph) = (a.params(), h.params());
    if (pa.m, pa.k) != (ph.m, ph.k) || a.len() != h.len() {
        return false;
    }
    let index: HashMap<&TupleLabel, usize> = h.labels().iter().enumerate().map(|(i, l)| (l, i)).collect();
    let mut image = Vec::with_capacity(a.len());
    let mut used = vec![false; h.len()];
    for v in a.labels() {
        match index.get(&node_map(v, pa.m, pa.k)) {
            Some(&j) if !used[j] => {
                used[j] = true;
                image.push(j);
            }
            _ => return false,
        }
    }
    if image[a.initial()] != h.initial() {
        return false;
    }
    (0..a.len()).all(|s| {
        [false, true]
            .iter()
            .all(|&hit| a.successor(s, hit).map(|t| image[t]) == h.successor(image[s], hit))
    })
}

/// Automaton selector in the `anymiss:m:k`, `anyhit:h:k`, `trim:m:k:c` syntax.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AutomatonSpec {
    Exact(WeaklyHardConstraint),
    Trim { m: u32, k: u32, c: u32 },
}

impl AutomatonSpec {
    pub fn trim(m: u32, k: u32, c: u32) -> Result<Self> {
        WeaklyHardConstraint::any_miss(m, k)?;
        if c == 0 || c > k - m {
            return Err(Error::InvalidParameters(format!(
                "compression factor c = {c} must lie in [1, k - m] = [1, {}]",
                k - m
            )));
        }
        Ok(Self::Trim { m, k, c })
    }

    /// `(m, k)` of the underlying AnyMiss constraint.
    pub fn misses_window(&self) -> (u32, u32) {
        match self {
            Self::Exact(c) => (c.misses(), c.k()),
            Self::Trim { m, k, .. } => (*m, *k),
        }
    }

    pub fn compression(&self) -> Option<u32> {
        match self {
            Self::Exact(_) => None,
            Self::Trim { c, .. } => Some(*c),
        }
    }

    pub fn state_count(&self) -> Result<BigUint> {
        let (m, k) = self.misses_window();
        state_count(m, k, self.compression().unwrap_or(1))
    }

    /// `H_{m,k}` for exact constraints, `T_{m,k,c}` for trims.
    pub fn build(&self, budget: StateBudget) -> Result<Automaton<TupleLabel>> {
        let (m, k) = self.misses_window();
        match self.compression() {
            None => build_isomorphic_with_budget(m, k, budget),
            Some(c) => build_compressed_with_budget(m, k, c, budget),
        }
    }
}

impl fmt::Display for AutomatonSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Exact(c) => c.fmt(f),
            Self::Trim { m, k, c } => write!(f, "trim:{m}:{k}:{c}"),
        }
    }
}

impl FromStr for AutomatonSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.trim().split(':').collect();
        let num = |i: usize| -> Result<u32> {
            parts[i]
                .parse()
                .map_err(|_| Error::InvalidParameters(format!("bad number {:?} in {s:?}", parts[i])))
        };
        match (parts[0].to_ascii_lowercase().as_str(), parts.len()) {
            ("anymiss", 3) => Ok(Self::Exact(WeaklyHardConstraint::any_miss(num(1)?, num(2)?)?)),
            ("anyhit", 3) => Ok(Self::Exact(WeaklyHardConstraint::any_hit(num(1)?, num(2)?)?)),
            ("trim", 4) => Self::trim(num(1)?, num(2)?, num(3)?),
            _ => Err(Error::InvalidParameters(format!(
                "expected anymiss:m:k, anyhit:h:k or trim:m:k:c, got {s:?}"
            ))),
        }
    }
}
