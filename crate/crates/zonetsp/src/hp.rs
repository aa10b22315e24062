//! Minimum Hamiltonian paths over contracted graphs.
//!
//! A [`ContractedGraph`] holds free vertices plus *super-edges*: previously
//! solved paths contracted to their endpoint pair, each of which must be
//! traversed exactly once (in either direction, interior order fixed). Both
//! kinds are treated uniformly as two-port elements, so a zone with embedded
//! paths from earlier zones solves with the same subset DP as a flat zone:
//! `O(2^m · m^2)` over the element count m, with the path split across k
//! fixed endpoint pairs handled in the same table.
//!
//! Ties are broken canonically: among minimum-length solutions, the one whose
//! expanded vertex sequence (paths ordered by smaller lead endpoint, each
//! oriented from its smaller endpoint) is lexicographically least. Results are
//! therefore identical no matter how callers schedule the searches.

use std::fmt;

use thiserror::Error;

use crate::tsplib::{Instance, VertexId};

/// Keeps per-solve DP tables small; zones beyond this are outside the
/// intended operating range and should be split.
pub const MAX_DP_ELEMENTS: usize = 16;

const INFEASIBLE: u64 = u64::MAX / 4;

/// A solved path contracted to its endpoints. The interior sequence is stored
/// fully expanded (nested embeddings are flattened on construction).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmbeddedHp {
    seq: Vec<VertexId>,
    length: u64,
}

impl EmbeddedHp {
    /// `seq` must have at least two vertices with distinct ends; `length`
    /// must be its path length under the instance metric.
    pub fn new(seq: Vec<VertexId>, length: u64) -> EmbeddedHp {
        debug_assert!(seq.len() >= 2);
        debug_assert_ne!(seq.first(), seq.last());
        EmbeddedHp { seq, length }
    }

    pub fn from_sequence(inst: &Instance, seq: Vec<VertexId>) -> EmbeddedHp {
        let length = inst.path_length(&seq);
        EmbeddedHp::new(seq, length)
    }

    pub fn endpoints(&self) -> (VertexId, VertexId) {
        (self.seq[0], *self.seq.last().unwrap())
    }

    pub fn sequence(&self) -> &[VertexId] {
        &self.seq
    }

    pub fn length(&self) -> u64 {
        self.length
    }
}

impl fmt::Display for EmbeddedHp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (a, b) = self.endpoints();
        write!(f, "[{a} {b}]")
    }
}

/// Free vertices plus mandatory super-edges over an instance metric.
#[derive(Debug, Clone)]
pub struct ContractedGraph<'a> {
    inst: &'a Instance,
    free: Vec<VertexId>,
    supers: Vec<EmbeddedHp>,
}

impl<'a> ContractedGraph<'a> {
    /// Free vertices are kept sorted; super-edge vertex sets must be disjoint
    /// from the free set and from each other.
    pub fn new(inst: &'a Instance, mut free: Vec<VertexId>, supers: Vec<EmbeddedHp>) -> Self {
        free.sort_unstable();
        #[cfg(debug_assertions)]
        {
            use std::collections::BTreeSet;
            let mut seen: BTreeSet<VertexId> = free.iter().copied().collect();
            assert_eq!(seen.len(), free.len(), "duplicate free vertex");
            for s in &supers {
                for &v in s.sequence() {
                    assert!(seen.insert(v), "super-edge vertex {v} not disjoint");
                }
            }
        }
        ContractedGraph { inst, free, supers }
    }

    pub fn instance(&self) -> &'a Instance {
        self.inst
    }

    pub fn free_vertices(&self) -> &[VertexId] {
        &self.free
    }

    pub fn super_edges(&self) -> &[EmbeddedHp] {
        &self.supers
    }

    pub fn element_count(&self) -> usize {
        self.free.len() + self.supers.len()
    }

    fn ports(&self, e: usize) -> (VertexId, VertexId) {
        if e < self.free.len() {
            (self.free[e], self.free[e])
        } else {
            self.supers[e - self.free.len()].endpoints()
        }
    }

    pub(crate) fn elem_len(&self, e: usize) -> u64 {
        if e < self.free.len() {
            0
        } else {
            self.supers[e - self.free.len()].length()
        }
    }

    pub(crate) fn is_free(&self, e: usize) -> bool {
        e < self.free.len()
    }

    /// (enter, exit) ports of element `e` under orientation `o`.
    pub(crate) fn traversal_ports(&self, e: usize, o: u8) -> (VertexId, VertexId) {
        let (p, q) = self.ports(e);
        if o == 0 {
            (p, q)
        } else {
            (q, p)
        }
    }

    pub(crate) fn step_of(&self, e: usize, o: u8) -> Step {
        if self.is_free(e) {
            Step::Free(self.ports(e).0)
        } else {
            let (enter, exit) = self.traversal_ports(e, o);
            Step::Super { index: e - self.free.len(), enter, exit }
        }
    }

    /// Element containing `v` as a port, with the orientation entering at `v`.
    pub(crate) fn locate(&self, v: VertexId) -> Option<(usize, u8)> {
        for e in 0..self.element_count() {
            let (p, q) = self.ports(e);
            if p == v {
                return Some((e, 0));
            }
            if q == v {
                return Some((e, 1));
            }
        }
        None
    }

    /// Replace every super-edge traversal with its interior sequence.
    pub(crate) fn expand_steps(&self, steps: &[Step]) -> Vec<VertexId> {
        let mut out = Vec::new();
        for step in steps {
            match *step {
                Step::Free(v) => out.push(v),
                Step::Super { index, enter, .. } => {
                    let seq = self.supers[index].sequence();
                    if seq[0] == enter {
                        out.extend_from_slice(seq);
                    } else {
                        out.extend(seq.iter().rev());
                    }
                }
            }
        }
        out
    }
}

/// One traversal step of a contracted path.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Step {
    Free(VertexId),
    /// Super-edge traversed entering at `enter`, leaving at `exit`.
    Super { index: usize, enter: VertexId, exit: VertexId },
}

/// A minimum path over a contracted graph: the contracted traversal, its full
/// expansion, and the exact integer length.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathResult {
    pub steps: Vec<Step>,
    pub expanded: Vec<VertexId>,
    pub endpoints: (VertexId, VertexId),
    pub length: u64,
}

impl PathResult {
    /// The expanded vertex sequence: every super-edge traversal replaced by
    /// its interior in traversal orientation.
    pub fn expand(&self) -> &[VertexId] {
        &self.expanded
    }

    pub(crate) fn reverse_in_place(&mut self) {
        self.steps.reverse();
        for step in &mut self.steps {
            if let Step::Super { enter, exit, .. } = step {
                std::mem::swap(enter, exit);
            }
        }
        self.expanded.reverse();
        self.endpoints = (self.endpoints.1, self.endpoints.0);
    }
}

/// A closed traversal of every element of a contracted graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CycleResult {
    pub steps: Vec<Step>,
    pub expanded: Vec<VertexId>,
    /// Includes the closing edge back to the first vertex.
    pub length: u64,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum HpError {
    #[error("path endpoints must differ")]
    SameEndpoints,
    #[error("endpoint {0} is not a free vertex or super-edge port")]
    EndpointMissing(VertexId),
    #[error("endpoint vertices are not pairwise distinct")]
    EndpointsNotDistinct,
    #[error("contracted graph is empty")]
    EmptyGraph,
    #[error("no arrangement satisfies the endpoint pairs")]
    Infeasible,
    #[error("{0} elements exceed the DP limit of {MAX_DP_ELEMENTS}")]
    TooLarge(usize),
}

/// Subset DP over (element set, open pair, current element + orientation),
/// storing the minimum completion cost of each state.
struct PathDp<'g, 'a> {
    graph: &'g ContractedGraph<'a>,
    /// Normalized pairs: each (min, max), sorted by first component.
    pairs: Vec<(VertexId, VertexId)>,
    m: usize,
    k: usize,
    full: usize,
    /// Elements that must already be covered while pair `i` is open: hosts of
    /// s_0..s_i and t_0..t_{i-1}. Masks missing them hold no reachable state.
    required: Vec<usize>,
    memo: Vec<u64>,
}

impl<'g, 'a> PathDp<'g, 'a> {
    fn idx(&self, mask: usize, i: usize, e: usize, o: u8) -> usize {
        (((mask * self.k) + i) * self.m + e) * 2 + o as usize
    }

    fn build(graph: &'g ContractedGraph<'a>, pairs: Vec<(VertexId, VertexId)>) -> Result<Self, HpError> {
        let m = graph.element_count();
        if m == 0 {
            return Err(HpError::EmptyGraph);
        }
        if m > MAX_DP_ELEMENTS {
            return Err(HpError::TooLarge(m));
        }
        let k = pairs.len();
        debug_assert!(k >= 1);
        for &(a, b) in &pairs {
            if graph.locate(a).is_none() {
                return Err(HpError::EndpointMissing(a));
            }
            if graph.locate(b).is_none() {
                return Err(HpError::EndpointMissing(b));
            }
        }
        let full = (1usize << m) - 1;
        let mut required = Vec::with_capacity(k);
        let mut acc = 0usize;
        for (i, &(s, _)) in pairs.iter().enumerate() {
            acc |= 1 << graph.locate(s).unwrap().0;
            if i > 0 {
                acc |= 1 << graph.locate(pairs[i - 1].1).unwrap().0;
            }
            required.push(acc);
        }
        let mut dp = PathDp {
            graph,
            pairs,
            m,
            k,
            full,
            required,
            memo: vec![INFEASIBLE; (full + 1) * k * m * 2],
        };
        dp.fill();
        Ok(dp)
    }

    fn fill(&mut self) {
        let inst = self.graph.instance();
        for mask in (1..=self.full).rev() {
            for e in 0..self.m {
                if mask & (1 << e) == 0 {
                    continue;
                }
                let orients: u8 = if self.graph.is_free(e) { 1 } else { 2 };
                for o in 0..orients {
                    for i in (0..self.k).rev() {
                        if mask & self.required[i] != self.required[i] {
                            continue;
                        }
                        let mut best = INFEASIBLE;
                        let exit = self.graph.traversal_ports(e, o).1;
                        if exit == self.pairs[i].1 {
                            if i + 1 == self.k {
                                if mask == self.full {
                                    best = 0;
                                }
                            } else if let Some((se, q)) = self.graph.locate(self.pairs[i + 1].0) {
                                if mask & (1 << se) == 0 {
                                    let nm = mask | (1 << se);
                                    let v = self.graph.elem_len(se)
                                        + self.memo[self.idx(nm, i + 1, se, q)];
                                    best = best.min(v);
                                }
                            }
                        }
                        for f in 0..self.m {
                            if mask & (1 << f) != 0 {
                                continue;
                            }
                            let fo: u8 = if self.graph.is_free(f) { 1 } else { 2 };
                            for p in 0..fo {
                                let enter = self.graph.traversal_ports(f, p).0;
                                let nm = mask | (1 << f);
                                let v = inst.distance(exit, enter)
                                    + self.graph.elem_len(f)
                                    + self.memo[self.idx(nm, i, f, p)];
                                best = best.min(v);
                            }
                        }
                        let slot = self.idx(mask, i, e, o);
                        self.memo[slot] = best.min(INFEASIBLE);
                    }
                }
            }
        }
    }

    fn start_state(&self) -> Option<(usize, u8)> {
        self.graph.locate(self.pairs[0].0)
    }

    fn total(&self) -> u64 {
        match self.start_state() {
            Some((e0, q0)) => {
                let v = self.graph.elem_len(e0) + self.memo[self.idx(1 << e0, 0, e0, q0)];
                v.min(INFEASIBLE)
            }
            None => INFEASIBLE,
        }
    }

    /// Canonical walk: whenever closing the current pair completes optimally,
    /// close (a finished path sorts before any extension of it); otherwise
    /// extend with the smallest optimal entry vertex. Element vertex sets are
    /// disjoint, so entry vertices identify moves uniquely and the walk is
    /// deterministic.
    fn reconstruct_canonical(&self) -> Vec<Vec<Step>> {
        let (e0, q0) = self.start_state().unwrap();
        let mut paths: Vec<Vec<Step>> = Vec::with_capacity(self.k);
        let mut cur = vec![self.graph.step_of(e0, q0)];
        let mut mask = 1usize << e0;
        let mut i = 0usize;
        let mut e = e0;
        let mut o = q0;
        loop {
            let remaining = self.memo[self.idx(mask, i, e, o)];
            debug_assert!(remaining < INFEASIBLE);
            let exit = self.graph.traversal_ports(e, o).1;
            if exit == self.pairs[i].1 {
                if i + 1 == self.k && mask == self.full {
                    paths.push(cur);
                    return paths;
                }
                if i + 1 < self.k {
                    let (se, q) = self.graph.locate(self.pairs[i + 1].0).unwrap();
                    if mask & (1 << se) == 0 {
                        let nm = mask | (1 << se);
                        if self.graph.elem_len(se) + self.memo[self.idx(nm, i + 1, se, q)]
                            == remaining
                        {
                            paths.push(std::mem::take(&mut cur));
                            cur = vec![self.graph.step_of(se, q)];
                            mask = nm;
                            i += 1;
                            e = se;
                            o = q;
                            continue;
                        }
                    }
                }
            }
            let mut chosen: Option<(VertexId, usize, u8)> = None;
            for f in 0..self.m {
                if mask & (1 << f) != 0 {
                    continue;
                }
                let fo: u8 = if self.graph.is_free(f) { 1 } else { 2 };
                for p in 0..fo {
                    let enter = self.graph.traversal_ports(f, p).0;
                    let nm = mask | (1 << f);
                    let v = self.graph.instance().distance(exit, enter)
                        + self.graph.elem_len(f)
                        + self.memo[self.idx(nm, i, f, p)];
                    if v == remaining && chosen.is_none_or(|(best, _, _)| enter < best) {
                        chosen = Some((enter, f, p));
                    }
                }
            }
            let (_, f, p) = chosen.expect("optimal continuation must exist");
            cur.push(self.graph.step_of(f, p));
            mask |= 1 << f;
            e = f;
            o = p;
        }
    }

    /// Every distinct optimal solution (keep-ties mode).
    fn reconstruct_all(&self) -> Vec<Vec<Vec<Step>>> {
        let (e0, q0) = self.start_state().unwrap();
        let mut out = Vec::new();
        let mut paths: Vec<Vec<Step>> = Vec::new();
        let mut cur = vec![self.graph.step_of(e0, q0)];
        self.dfs_all(1usize << e0, 0, e0, q0, &mut cur, &mut paths, &mut out);
        out
    }

    #[allow(clippy::too_many_arguments)]
    fn dfs_all(
        &self,
        mask: usize,
        i: usize,
        e: usize,
        o: u8,
        cur: &mut Vec<Step>,
        paths: &mut Vec<Vec<Step>>,
        out: &mut Vec<Vec<Vec<Step>>>,
    ) {
        let remaining = self.memo[self.idx(mask, i, e, o)];
        let exit = self.graph.traversal_ports(e, o).1;
        if exit == self.pairs[i].1 {
            if i + 1 == self.k && mask == self.full {
                let mut done = paths.clone();
                done.push(cur.clone());
                out.push(done);
                return;
            } else if i + 1 < self.k {
                if let Some((se, q)) = self.graph.locate(self.pairs[i + 1].0) {
                    if mask & (1 << se) == 0 {
                        let nm = mask | (1 << se);
                        if self.graph.elem_len(se) + self.memo[self.idx(nm, i + 1, se, q)]
                            == remaining
                        {
                            paths.push(cur.clone());
                            let mut next = vec![self.graph.step_of(se, q)];
                            self.dfs_all(nm, i + 1, se, q, &mut next, paths, out);
                            paths.pop();
                        }
                    }
                }
            }
        }
        for f in 0..self.m {
            if mask & (1 << f) != 0 {
                continue;
            }
            let fo: u8 = if self.graph.is_free(f) { 1 } else { 2 };
            for p in 0..fo {
                let enter = self.graph.traversal_ports(f, p).0;
                let nm = mask | (1 << f);
                let v = self.graph.instance().distance(exit, enter)
                    + self.graph.elem_len(f)
                    + self.memo[self.idx(nm, i, f, p)];
                if v == remaining {
                    cur.push(self.graph.step_of(f, p));
                    self.dfs_all(nm, i, f, p, cur, paths, out);
                    cur.pop();
                }
            }
        }
    }
}

fn path_from_steps(graph: &ContractedGraph, steps: Vec<Step>) -> PathResult {
    let expanded = graph.expand_steps(&steps);
    let length = graph.instance().path_length(&expanded);
    let endpoints = (expanded[0], *expanded.last().unwrap());
    PathResult { steps, expanded, endpoints, length }
}

fn normalize_pairs(pairs: &[(VertexId, VertexId)]) -> Result<Vec<(VertexId, VertexId)>, HpError> {
    let mut flat: Vec<VertexId> = pairs.iter().flat_map(|&(a, b)| [a, b]).collect();
    flat.sort_unstable();
    if flat.windows(2).any(|w| w[0] == w[1]) {
        return Err(if pairs.len() == 1 {
            HpError::SameEndpoints
        } else {
            HpError::EndpointsNotDistinct
        });
    }
    let mut norm: Vec<(VertexId, VertexId)> =
        pairs.iter().map(|&(a, b)| (a.min(b), a.max(b))).collect();
    norm.sort_unstable();
    Ok(norm)
}

/// Solve for `k` vertex-disjoint paths jointly covering the graph, one per
/// endpoint pair. Results align with the input pairs, each oriented from its
/// pair's first vertex.
pub fn min_paths(
    graph: &ContractedGraph,
    pairs: &[(VertexId, VertexId)],
) -> Result<Vec<PathResult>, HpError> {
    debug_assert!(!pairs.is_empty());
    let norm = normalize_pairs(pairs)?;
    let dp = PathDp::build(graph, norm)?;
    if dp.total() >= INFEASIBLE {
        return Err(HpError::Infeasible);
    }
    let solution = dp.reconstruct_canonical();
    let solved: Vec<PathResult> =
        solution.into_iter().map(|steps| path_from_steps(graph, steps)).collect();
    debug_assert_eq!(solved.iter().map(|p| p.length).sum::<u64>(), dp.total());
    align_to_input(solved, pairs)
}

/// Keep-ties variant: every distinct jointly-optimal solution, deduplicated,
/// in a deterministic order. Paths stay in normalized pair order (ascending
/// lead endpoint), each oriented from its smaller endpoint.
pub fn min_paths_all(
    graph: &ContractedGraph,
    pairs: &[(VertexId, VertexId)],
) -> Result<Vec<Vec<PathResult>>, HpError> {
    debug_assert!(!pairs.is_empty());
    let norm = normalize_pairs(pairs)?;
    let dp = PathDp::build(graph, norm)?;
    if dp.total() >= INFEASIBLE {
        return Err(HpError::Infeasible);
    }
    let mut solutions: Vec<Vec<PathResult>> = dp
        .reconstruct_all()
        .into_iter()
        .map(|sol| sol.into_iter().map(|steps| path_from_steps(graph, steps)).collect())
        .collect();
    let key = |sol: &Vec<PathResult>| -> Vec<Vec<VertexId>> {
        sol.iter().map(|p| p.expanded.clone()).collect()
    };
    solutions.sort_by_key(key);
    solutions.dedup_by(|a, b| key(a) == key(b));
    Ok(solutions)
}

fn align_to_input(
    solved: Vec<PathResult>,
    pairs: &[(VertexId, VertexId)],
) -> Result<Vec<PathResult>, HpError> {
    let mut out = Vec::with_capacity(pairs.len());
    for &(a, b) in pairs {
        let mut path = solved
            .iter()
            .find(|p| {
                let (x, y) = p.endpoints;
                (x == a && y == b) || (x == b && y == a)
            })
            .cloned()
            .expect("solved path for every pair");
        if path.endpoints.0 != a {
            path.reverse_in_place();
        }
        out.push(path);
    }
    Ok(out)
}

/// Minimum Hamiltonian path from `a` to `b` covering every element.
///
/// `min_hp(g, a, b)` is the reverse of `min_hp(g, b, a)`; the tie-break
/// canonicalizes in the orientation starting from the smaller endpoint.
pub fn min_hp(graph: &ContractedGraph, a: VertexId, b: VertexId) -> Result<PathResult, HpError> {
    if a == b {
        return Err(HpError::SameEndpoints);
    }
    Ok(min_paths(graph, &[(a, b)])?.pop().unwrap())
}

/// Minimum pair of vertex-disjoint paths jointly covering the graph, with the
/// given endpoint pairs; minimizes the sum of lengths over every 2-partition
/// of the elements and every internal order.
pub fn min_two_hps(
    graph: &ContractedGraph,
    pairs: [(VertexId, VertexId); 2],
) -> Result<(PathResult, PathResult), HpError> {
    let mut v = min_paths(graph, &pairs)?;
    let second = v.pop().unwrap();
    let first = v.pop().unwrap();
    Ok((first, second))
}

/// Minimum closed traversal of every element (the cycle-closure step and the
/// degenerate single-zone solve). A single free vertex yields a zero-length
/// cycle; a single super-edge closes with the edge between its ports.
pub fn min_cycle(graph: &ContractedGraph) -> Result<CycleResult, HpError> {
    let m = graph.element_count();
    if m == 0 {
        return Err(HpError::EmptyGraph);
    }
    if m > MAX_DP_ELEMENTS {
        return Err(HpError::TooLarge(m));
    }
    let inst = graph.instance();
    let full = (1usize << m) - 1;
    let enter0 = graph.traversal_ports(0, 0).0;
    // memo[mask][e][o]: completion cost back to element 0's entry port
    let idx = |mask: usize, e: usize, o: u8| -> usize { (mask * m + e) * 2 + o as usize };
    let mut memo = vec![INFEASIBLE; (full + 1) * m * 2];
    for mask in (1..=full).rev() {
        for e in 0..m {
            if mask & (1 << e) == 0 {
                continue;
            }
            let orients: u8 = if graph.is_free(e) { 1 } else { 2 };
            for o in 0..orients {
                let exit = graph.traversal_ports(e, o).1;
                let mut best = if mask == full { inst.distance(exit, enter0) } else { INFEASIBLE };
                for f in 1..m {
                    if mask & (1 << f) != 0 {
                        continue;
                    }
                    let fo: u8 = if graph.is_free(f) { 1 } else { 2 };
                    for p in 0..fo {
                        let enter = graph.traversal_ports(f, p).0;
                        let v = inst.distance(exit, enter)
                            + graph.elem_len(f)
                            + memo[idx(mask | (1 << f), f, p)];
                        best = best.min(v);
                    }
                }
                memo[idx(mask, e, o)] = best.min(INFEASIBLE);
            }
        }
    }
    let total = graph.elem_len(0) + memo[idx(1, 0, 0)];
    if total >= INFEASIBLE {
        return Err(HpError::Infeasible);
    }

    // greedy reconstruction, smallest entry vertex among optimal continuations
    let mut steps = Vec::with_capacity(m);
    steps.push(graph.step_of(0, 0));
    let mut mask = 1usize;
    let mut e = 0usize;
    let mut o = 0u8;
    while mask != full {
        let remaining = memo[idx(mask, e, o)];
        let exit = graph.traversal_ports(e, o).1;
        let mut chosen: Option<(VertexId, usize, u8)> = None;
        for f in 1..m {
            if mask & (1 << f) != 0 {
                continue;
            }
            let fo: u8 = if graph.is_free(f) { 1 } else { 2 };
            for p in 0..fo {
                let enter = graph.traversal_ports(f, p).0;
                let v = inst.distance(exit, enter) + graph.elem_len(f) + memo[idx(mask | (1 << f), f, p)];
                if v == remaining && chosen.is_none_or(|(best, _, _)| enter < best) {
                    chosen = Some((enter, f, p));
                }
            }
        }
        let (_, f, p) = chosen.expect("optimal continuation must exist");
        steps.push(graph.step_of(f, p));
        mask |= 1 << f;
        e = f;
        o = p;
    }
    let expanded = graph.expand_steps(&steps);
    debug_assert_eq!(
        inst.path_length(&expanded) + inst.distance(*expanded.last().unwrap(), expanded[0]),
        total
    );
    Ok(CycleResult { steps, expanded, length: total })
}
