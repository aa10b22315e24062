//! Exact reference solvers for validating the path search and the sweep.
//!
//! These live in the shipped library (not test code) so the CLI's
//! `--oracle-check` can run them against user instances. Both are
//! budget-guarded: exhaustive path enumeration beyond a handful of elements
//! and subset DP beyond ~18 vertices are out of scope.

use thiserror::Error;

use crate::hp::{ContractedGraph, EmbeddedHp, HpError, PathResult, Step};
use crate::sweep::Tour;
use crate::tsplib::{Instance, VertexId};

/// Size limits for the exact solvers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleBudget {
    pub max_elements_bruteforce: usize,
    pub max_vertices_heldkarp: usize,
}

impl OracleBudget {
    /// `max_vertices_heldkarp` is capped at 20 (memory guard).
    pub fn new(max_elements_bruteforce: usize, max_vertices_heldkarp: usize) -> OracleBudget {
        assert!(max_elements_bruteforce > 0);
        assert!(max_vertices_heldkarp > 0 && max_vertices_heldkarp <= 20);
        OracleBudget { max_elements_bruteforce, max_vertices_heldkarp }
    }
}

impl Default for OracleBudget {
    fn default() -> Self {
        OracleBudget { max_elements_bruteforce: 9, max_vertices_heldkarp: 18 }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("problem size {size} exceeds the oracle budget {limit}")]
    BudgetExceeded { size: usize, limit: usize },
    #[error(transparent)]
    Hp(#[from] HpError),
}

struct BruteState<'g, 'a> {
    graph: &'g ContractedGraph<'a>,
    target: VertexId,
    stack: Vec<Step>,
    best_cost: u64,
    best: Option<(Vec<Step>, Vec<VertexId>)>,
}

impl BruteState<'_, '_> {
    fn visit(&mut self, used: usize, exit: VertexId, cost: u64) {
        let m = self.graph.element_count();
        if used == (1usize << m) - 1 {
            if exit != self.target || cost > self.best_cost {
                return;
            }
            let expanded = self.graph.expand_steps(&self.stack);
            if cost < self.best_cost
                || self.best.as_ref().is_none_or(|(_, seq)| expanded < *seq)
            {
                self.best_cost = cost;
                self.best = Some((self.stack.clone(), expanded));
            }
            return;
        }
        let inst = self.graph.instance();
        for f in 0..m {
            if used & (1 << f) != 0 {
                continue;
            }
            let orients: u8 = if self.graph.is_free(f) { 1 } else { 2 };
            for o in 0..orients {
                let (enter, next_exit) = self.graph.traversal_ports(f, o);
                let step_cost = inst.distance(exit, enter) + self.graph.elem_len(f);
                self.stack.push(self.graph.step_of(f, o));
                self.visit(used | (1 << f), next_exit, cost + step_cost);
                self.stack.pop();
            }
        }
    }
}

/// Exhaustive minimum Hamiltonian path from `a` to `b`: every element order
/// and super-edge orientation is enumerated. Same tie rule as
/// [`crate::hp::min_hp`] (lexicographically smallest expansion in the
/// orientation starting from the smaller endpoint).
pub fn brute_force_hp(
    graph: &ContractedGraph,
    a: VertexId,
    b: VertexId,
    budget: &OracleBudget,
) -> Result<PathResult, OracleError> {
    let m = graph.element_count();
    if m == 0 {
        return Err(HpError::EmptyGraph.into());
    }
    if m > budget.max_elements_bruteforce {
        return Err(OracleError::BudgetExceeded { size: m, limit: budget.max_elements_bruteforce });
    }
    if a == b {
        return Err(HpError::SameEndpoints.into());
    }
    let s = a.min(b);
    let t = a.max(b);
    let (e0, o0) = graph.locate(s).ok_or(HpError::EndpointMissing(s))?;
    graph.locate(t).ok_or(HpError::EndpointMissing(t))?;
    let mut state = BruteState {
        graph,
        target: t,
        stack: vec![graph.step_of(e0, o0)],
        best_cost: u64::MAX,
        best: None,
    };
    let (_, exit) = graph.traversal_ports(e0, o0);
    state.visit(1 << e0, exit, graph.elem_len(e0));
    let (steps, expanded) = state.best.ok_or(HpError::Infeasible)?;
    let length = graph.instance().path_length(&expanded);
    let mut path = PathResult {
        endpoints: (expanded[0], *expanded.last().unwrap()),
        steps,
        expanded,
        length,
    };
    if path.endpoints.0 != a {
        path.reverse_in_place();
    }
    Ok(path)
}

/// Exhaustive two-path reference: enumerates every 2-partition of the
/// elements (each part holding its endpoint pair) and brute-forces each part.
pub fn brute_force_two_hps(
    graph: &ContractedGraph,
    pairs: [(VertexId, VertexId); 2],
    budget: &OracleBudget,
) -> Result<(PathResult, PathResult), OracleError> {
    let m = graph.element_count();
    if m > budget.max_elements_bruteforce {
        return Err(OracleError::BudgetExceeded { size: m, limit: budget.max_elements_bruteforce });
    }
    let locate_elem = |v: VertexId| -> Result<usize, OracleError> {
        Ok(graph.locate(v).ok_or(HpError::EndpointMissing(v))?.0)
    };
    let a0 = locate_elem(pairs[0].0)?;
    let b0 = locate_elem(pairs[0].1)?;
    let a1 = locate_elem(pairs[1].0)?;
    let b1 = locate_elem(pairs[1].1)?;
    let mut best: Option<(u64, PathResult, PathResult)> = None;
    for mask in 0..(1usize << m) {
        if mask & (1 << a0) == 0 || mask & (1 << b0) == 0 {
            continue;
        }
        if mask & (1 << a1) != 0 || mask & (1 << b1) != 0 {
            continue;
        }
        let side = |bits: usize| -> ContractedGraph {
            let mut free = Vec::new();
            let mut supers: Vec<EmbeddedHp> = Vec::new();
            for e in 0..m {
                if bits & (1 << e) == 0 {
                    continue;
                }
                if graph.is_free(e) {
                    free.push(graph.free_vertices()[e]);
                } else {
                    supers.push(graph.super_edges()[e - graph.free_vertices().len()].clone());
                }
            }
            ContractedGraph::new(graph.instance(), free, supers)
        };
        let g0 = side(mask);
        let g1 = side(!mask & ((1 << m) - 1));
        let p0 = match brute_force_hp(&g0, pairs[0].0, pairs[0].1, budget) {
            Ok(p) => p,
            Err(OracleError::Hp(HpError::Infeasible)) => continue,
            Err(e) => return Err(e),
        };
        let p1 = match brute_force_hp(&g1, pairs[1].0, pairs[1].1, budget) {
            Ok(p) => p,
            Err(OracleError::Hp(HpError::Infeasible)) => continue,
            Err(e) => return Err(e),
        };
        let total = p0.length + p1.length;
        if best.as_ref().is_none_or(|(b, _, _)| total < *b) {
            best = Some((total, p0, p1));
        }
    }
    let (_, p0, p1) = best.ok_or(HpError::Infeasible)?;
    Ok((p0, p1))
}

/// Provably optimal tour by subset dynamic programming over vertex sets.
pub fn held_karp(inst: &Instance, budget: &OracleBudget) -> Result<Tour, OracleError> {
    let n = inst.dimension();
    if n > budget.max_vertices_heldkarp {
        return Err(OracleError::BudgetExceeded { size: n, limit: budget.max_vertices_heldkarp });
    }
    if n == 1 {
        return Ok(Tour::new(vec![1], 0));
    }
    if n == 2 {
        return Ok(Tour::new(vec![1, 2], inst.tour_length(&[1, 2]).unwrap()));
    }
    // anchor vertex 1; DP over subsets of the remaining n-1 vertices
    let r = n - 1;
    let rest: Vec<VertexId> = (2..=n as VertexId).collect();
    let full = (1usize << r) - 1;
    let mut dp = vec![u64::MAX; (full + 1) * r];
    let mut parent = vec![u32::MAX; (full + 1) * r];
    for j in 0..r {
        dp[(1 << j) * r + j] = inst.distance(1, rest[j]);
    }
    for mask in 1..=full {
        for j in 0..r {
            if mask & (1 << j) == 0 {
                continue;
            }
            let cur = dp[mask * r + j];
            if cur == u64::MAX {
                continue;
            }
            for l in 0..r {
                if mask & (1 << l) != 0 {
                    continue;
                }
                let nm = mask | (1 << l);
                let cand = cur + inst.distance(rest[j], rest[l]);
                if cand < dp[nm * r + l] {
                    dp[nm * r + l] = cand;
                    parent[nm * r + l] = j as u32;
                }
            }
        }
    }
    let mut best = u64::MAX;
    let mut last = 0usize;
    for j in 0..r {
        let cand = dp[full * r + j].saturating_add(inst.distance(rest[j], 1));
        if cand < best {
            best = cand;
            last = j;
        }
    }
    let mut seq = Vec::with_capacity(n);
    let mut mask = full;
    let mut j = last;
    while mask != 0 {
        seq.push(rest[j]);
        let p = parent[mask * r + j];
        mask &= !(1 << j);
        if p == u32::MAX {
            break;
        }
        j = p as usize;
    }
    seq.push(1);
    seq.reverse();
    debug_assert_eq!(inst.tour_length(&seq).unwrap(), best);
    Ok(Tour::new(seq, best))
}
