//! Word counting, growth constants, simulation and bounded inclusion.

use std::collections::{HashMap, VecDeque};

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::automata::{Automaton, TupleLabel};
use crate::constraints::Word;
use crate::error::{Error, Result};
use crate::linalg::{perron_pair, PerronPair};

/// Longest word length accepted by the bounded inclusion check.
pub const MAX_INCLUSION_LENGTH: usize = 20;

/// `|L^{=ℓ}| ≈ a · λ^ℓ`.
#[derive(Debug, Clone, Serialize)]
pub struct GrowthEstimate {
    pub a: f64,
    pub lambda: f64,
    pub source: String,
}

/// Number of accepted words of length `len`.
pub fn count_words<L>(a: &Automaton<L>, len: usize) -> BigUint {
    count_words_upto(a, len).pop().unwrap_or_default()
}

/// Accepted word counts for every length `0..=len`.
pub fn count_words_upto<L>(a: &Automaton<L>, len: usize) -> Vec<BigUint> {
    let table = a.successor_table();
    let mut counts = vec![BigUint::zero(); a.len()];
    let mut next = vec![BigUint::zero(); a.len()];
    let mut out = Vec::with_capacity(len + 1);
    if a.is_empty() {
        out.resize(len + 1, BigUint::zero());
        return out;
    }
    counts[a.initial()] = BigUint::from(1u8);
    out.push(BigUint::from(1u8));
    for _ in 0..len {
        next.iter_mut().for_each(|v| v.set_zero());
        for (src, succ) in table.iter().enumerate() {
            if counts[src].is_zero() {
                continue;
            }
            for dst in succ.iter().flatten() {
                next[*dst as usize] += &counts[src];
            }
        }
        std::mem::swap(&mut counts, &mut next);
        out.push(counts.iter().sum());
    }
    out
}

/// `‖(y_init / yᵀx) · x‖₁`.
pub fn prefactor(x: &[f64], y: &[f64], initial: usize) -> f64 {
    let yx: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let x1: f64 = x.iter().map(|v| v.abs()).sum();
    (y[initial] / yx * x1).abs()
}

pub fn growth<L>(a: &Automaton<L>) -> Result<GrowthEstimate> {
    let (_, _, pi) = a.adjacency();
    let PerronPair { lambda, x, y, .. } = perron_pair(&pi)?;
    Ok(GrowthEstimate {
        a: prefactor(&x, &y, a.initial()),
        lambda,
        source: a.params().to_string(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Obligation {
    /// A related pair whose labels fall outside the node sets.
    Labels,
    /// The initial states are not related.
    Initial,
    /// A transition of the simulated automaton is not matched.
    Transition,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SimulationWitness {
    pub obligation: Obligation,
    pub h_state: usize,
    pub t_state: usize,
    /// `0` miss, `1` hit.
    pub symbol: Option<u8>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SimulationReport {
    pub holds: bool,
    pub witness: Option<SimulationWitness>,
    /// Related pairs visited from the initial pair.
    pub relation_size: usize,
}

/// Checks that `t` simulates `h` under componentwise domination `u ≥ û`.
pub fn check_simulation(h: &Automaton<TupleLabel>, t: &Automaton<TupleLabel>) -> Result<SimulationReport> {
    let (ph, pt) = (h.params(), t.params());
    if (ph.m, ph.k) != (pt.m, pt.k) {
        return Err(Error::ParameterMismatch(format!(
            "simulated automaton has (m, k) = ({}, {}), simulating has ({}, {})",
            ph.m, ph.k, pt.m, pt.k
        )));
    }
    let (m, k) = (ph.m, ph.k);
    let c = pt.compression.unwrap_or(1);
    let related = |u: usize, v: usize| h.label(u).dominates(t.label(v));
    let fail = |obligation, h_state, t_state, symbol, size| SimulationReport {
        holds: false,
        witness: Some(SimulationWitness {
            obligation,
            h_state,
            t_state,
            symbol,
        }),
        relation_size: size,
    };

    let init = (h.initial(), t.initial());
    if !related(init.0, init.1) {
        return Ok(fail(Obligation::Initial, init.0, init.1, None, 0));
    }
    let mut seen: HashMap<(usize, usize), ()> = HashMap::new();
    let mut queue = VecDeque::from([init]);
    seen.insert(init, ());
    while let Some((u, v)) = queue.pop_front() {
        if !h.label(u).in_full_set(m, k) || !t.label(v).in_compressed_set(m, k, c) {
            return Ok(fail(Obligation::Labels, u, v, None, seen.len()));
        }
        for sym in 0..2u8 {
            let Some(u2) = h.successor(u, sym == 1) else {
                continue;
            };
            match t.successor(v, sym == 1) {
                Some(v2) if related(u2, v2) => {
                    if seen.insert((u2, v2), ()).is_none() {
                        queue.push_back((u2, v2));
                    }
                }
                _ => return Ok(fail(Obligation::Transition, u, v, Some(sym), seen.len())),
            }
        }
    }
    Ok(SimulationReport {
        holds: true,
        witness: None,
        relation_size: seen.len(),
    })
}

/// Shortest word of length at most `max_len` accepted by `a` and rejected
/// by `t`. Among the shortest, the least one when hits order before misses.
pub fn inclusion_counterexample<L1, L2>(a: &Automaton<L1>, t: &Automaton<L2>, max_len: usize) -> Result<Option<Word>> {
    if max_len > MAX_INCLUSION_LENGTH {
        return Err(Error::LimitExceeded {
            value: max_len,
            limit: MAX_INCLUSION_LENGTH,
        });
    }
    if a.is_empty() {
        return Ok(None);
    }
    if t.is_empty() {
        // only the empty word can be in a's language without a path
        return Ok(Some(Word::empty()));
    }
    // parent pointers: pair -> (previous pair, symbol)
    let mut parent: HashMap<(usize, usize), Option<((usize, usize), bool)>> = HashMap::new();
    let start = (a.initial(), t.initial());
    parent.insert(start, None);
    let mut frontier = vec![start];
    let rebuild = |parent: &HashMap<(usize, usize), Option<((usize, usize), bool)>>, mut at: (usize, usize), last: bool| {
        let mut bits = vec![last];
        while let Some(Some((prev, sym))) = parent.get(&at) {
            bits.push(*sym);
            at = *prev;
        }
        bits.reverse();
        Word::new(bits)
    };
    for _ in 0..max_len {
        let mut next = Vec::new();
        for &(sa, st) in &frontier {
            for hit in [true, false] {
                let Some(na) = a.successor(sa, hit) else {
                    continue;
                };
                match t.successor(st, hit) {
                    None => return Ok(Some(rebuild(&parent, (sa, st), hit))),
                    Some(nt) => {
                        if let std::collections::hash_map::Entry::Vacant(e) = parent.entry((na, nt)) {
                            e.insert(Some(((sa, st), hit)));
                            next.push((na, nt));
                        }
                    }
                }
            }
        }
        if next.is_empty() {
            break;
        }
        frontier = next;
    }
    Ok(None)
}

/// Whether every word of length at most `max_len` accepted by `a` is
/// accepted by `t`.
pub fn check_inclusion_bounded<L1, L2>(a: &Automaton<L1>, t: &Automaton<L2>, max_len: usize) -> Result<bool> {
    Ok(inclusion_counterexample(a, t, max_len)?.is_none())
}

/// Ratio of consecutive counts, computed without overflowing `f64`.
pub fn count_ratio(num: &BigUint, den: &BigUint) -> f64 {
    let shift = num.bits().max(den.bits()).saturating_sub(60);
    let n = (num >> shift).to_f64().unwrap_or(f64::NAN);
    let d = (den >> shift).to_f64().unwrap_or(f64::NAN);
    n / d
}

/// `ln(count)` for arbitrarily large counts.
pub fn count_ln(count: &BigUint) -> f64 {
    let shift = count.bits().saturating_sub(60);
    let top = (count >> shift).to_f64().unwrap_or(f64::NAN);
    top.ln() + shift as f64 * std::f64::consts::LN_2
}
