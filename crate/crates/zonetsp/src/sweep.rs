//! The left-to-right sweep over zones.
//!
//! State after absorbing zones 1..k: one entry per boundary choice (chosen
//! vertex set plus endpoint matching) into zone k+1, holding the minimum
//! total-length family of disjoint paths that covers zones 1..k and the
//! chosen vertices, one path per matching pair. Each step contracts the
//! incoming entry's paths to super-edges, absorbs the next zone's free
//! vertices, and re-solves per outgoing choice. A decrease in crossing count
//! closes surplus open ends inside the new zone automatically: the path
//! search is free to chain several super-edges into one path, which is
//! exactly the terminating-loop case. The last two zones are absorbed by a
//! cycle closure instead of a step, and back-substitution of the embedded
//! paths yields the tour.
//!
//! Entry reduction per key is a minimum over a total order
//! (length, expanded sequences), so sweeping the (entry x choice) fan-out in
//! parallel produces bit-identical results to a serial run.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::hp::{min_cycle, min_paths, min_paths_all, ContractedGraph, EmbeddedHp, HpError, PathResult, Step};
use crate::par::map_indexed;
use crate::tsplib::{Instance, ParseError, VertexId};
use crate::zoning::{enumerate_boundary_choices, BoundaryChoice, ZoneError, ZonePlan, ZoneSpec};

/// A Hamiltonian cycle as a vertex sequence plus its exact length.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tour {
    pub seq: Vec<VertexId>,
    pub length: u64,
}

impl Tour {
    pub fn new(seq: Vec<VertexId>, length: u64) -> Tour {
        Tour { seq, length }
    }

    /// Rotate to start at vertex 1 and orient so the second vertex is smaller
    /// than the last. Tours equal up to rotation/reflection canonicalize to
    /// the same sequence.
    pub fn canonicalize(&mut self) {
        if self.seq.is_empty() {
            return;
        }
        if let Some(pos) = self.seq.iter().position(|&v| v == 1) {
            self.seq.rotate_left(pos);
        }
        if self.seq.len() >= 3 && self.seq[1] > *self.seq.last().unwrap() {
            self.seq[1..].reverse();
        }
    }

    pub fn canonicalized(mut self) -> Tour {
        self.canonicalize();
        self
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SweepOptions {
    /// Retain every co-minimal entry per boundary choice instead of the
    /// canonical one. Exact length ties can in principle hide alternatives
    /// the default single-survivor filter would drop.
    pub keep_ties: bool,
    /// Keep per-stage states for tracing and filter reports.
    pub record_states: bool,
}

/// One candidate per boundary choice: disjoint contracted paths covering all
/// absorbed zones plus the chosen boundary vertices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SweepEntry {
    /// Index into the owning stage's `choices`.
    pub choice_idx: usize,
    /// One path per matching pair, in normalized pair order (ascending lead
    /// endpoint), each oriented from its smaller endpoint.
    pub paths: Vec<PathResult>,
    pub total: u64,
    /// Entry index in the previous stage this candidate extends.
    pub parent: Option<usize>,
}

/// All candidates after absorbing one zone.
#[derive(Debug, Clone)]
pub struct StageState {
    /// 1-based zone whose own vertices this stage absorbed.
    pub zone: usize,
    /// Outgoing boundary choices, in enumeration order.
    pub choices: Vec<BoundaryChoice>,
    /// Entries ordered by `choice_idx` (several per choice in keep-ties mode).
    pub entries: Vec<SweepEntry>,
}

#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub tour: Tour,
    /// (absorbed zone, candidate count) per stage, in sweep order.
    pub stage_counts: Vec<(usize, usize)>,
    /// Populated when `record_states` is set; the closure stage is not a
    /// StageState (it produces the tour, not keyed entries).
    pub states: Vec<StageState>,
    /// Winning entry index in the final stage (None for single-zone plans).
    pub winner: Option<usize>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SweepError {
    #[error(transparent)]
    Plan(#[from] ZoneError),
    #[error("zone {zone}: no feasible arrangement for any outgoing boundary choice")]
    Infeasible { zone: usize },
    #[error("sweep reached zone {zone} with an empty incoming state")]
    EmptyState { zone: usize },
    #[error(transparent)]
    Search(#[from] HpError),
    #[error(transparent)]
    Metric(#[from] ParseError),
}

fn normalized_pairs(choice: &BoundaryChoice) -> Vec<(VertexId, VertexId)> {
    let mut pairs: Vec<(VertexId, VertexId)> =
        choice.matching.iter().map(|&(a, b)| (a.min(b), a.max(b))).collect();
    pairs.sort_unstable();
    pairs
}

fn paths_key(paths: &[PathResult]) -> Vec<&[VertexId]> {
    paths.iter().map(|p| p.expanded.as_slice()).collect()
}

/// Reduce candidates for one choice: keep the minimum by
/// (total, expanded sequences, parent), or all co-minimal distinct path sets
/// in keep-ties mode.
struct ChoiceReducer {
    keep_ties: bool,
    best: Vec<SweepEntry>,
}

impl ChoiceReducer {
    fn new(keep_ties: bool) -> ChoiceReducer {
        ChoiceReducer { keep_ties, best: Vec::new() }
    }

    fn offer(&mut self, entry: SweepEntry) {
        if self.best.is_empty() {
            self.best.push(entry);
            return;
        }
        let cur = self.best[0].total;
        if entry.total > cur {
            return;
        }
        if entry.total < cur {
            self.best.clear();
            self.best.push(entry);
            return;
        }
        if !self.keep_ties {
            let incumbent = &self.best[0];
            if (paths_key(&entry.paths), entry.parent)
                < (paths_key(&incumbent.paths), incumbent.parent)
            {
                self.best[0] = entry;
            }
            return;
        }
        self.best.push(entry);
    }

    fn finish(mut self) -> Vec<SweepEntry> {
        if self.keep_ties {
            self.best
                .sort_by(|a, b| (paths_key(&a.paths), a.parent).cmp(&(paths_key(&b.paths), b.parent)));
            self.best.dedup_by(|a, b| paths_key(&a.paths) == paths_key(&b.paths));
        }
        self.best
    }
}

#[cfg(debug_assertions)]
fn assert_entry_coverage(entry: &SweepEntry, expected: &BTreeSet<VertexId>) {
    let mut got = BTreeSet::new();
    for p in &entry.paths {
        for &v in &p.expanded {
            assert!(got.insert(v), "vertex {v} covered twice");
        }
    }
    assert_eq!(&got, expected, "entry coverage mismatch");
    let total: u64 = entry.paths.iter().map(|p| p.length).sum();
    assert_eq!(total, entry.total, "entry length bookkeeping");
}

/// Solve one stage: absorb `absorb`'s own vertices on top of `incoming`
/// (None for the first zone), fanning out over the zone's outgoing boundary
/// choices.
fn solve_stage(
    inst: &Instance,
    incoming: Option<&StageState>,
    absorb: &ZoneSpec,
    opts: &SweepOptions,
) -> Result<StageState, SweepError> {
    let choices = enumerate_boundary_choices(absorb);
    if choices.is_empty() {
        return Err(SweepError::Infeasible { zone: absorb.index });
    }
    // (covered set, super-edges, parent idx) per incoming entry
    let inputs: Vec<(Vec<VertexId>, Vec<EmbeddedHp>, Option<usize>)> = match incoming {
        None => vec![(absorb.own_vertices.clone(), Vec::new(), None)],
        Some(state) => {
            if state.entries.is_empty() {
                return Err(SweepError::EmptyState { zone: absorb.index });
            }
            state
                .entries
                .iter()
                .enumerate()
                .map(|(idx, entry)| {
                    let chosen: &[VertexId] = &state.choices[entry.choice_idx].chosen;
                    let free: Vec<VertexId> = absorb
                        .own_vertices
                        .iter()
                        .copied()
                        .filter(|v| !chosen.contains(v))
                        .collect();
                    let supers: Vec<EmbeddedHp> = entry
                        .paths
                        .iter()
                        .map(|p| EmbeddedHp::new(p.expanded.clone(), p.length))
                        .collect();
                    (free, supers, Some(idx))
                })
                .collect()
        }
    };

    let per_choice: Vec<Result<Vec<SweepEntry>, SweepError>> =
        map_indexed(&choices, |choice_idx, choice| {
            let pairs = normalized_pairs(choice);
            let mut reducer = ChoiceReducer::new(opts.keep_ties);
            for (free_base, supers, parent) in &inputs {
                let mut free = free_base.clone();
                free.extend_from_slice(&choice.chosen);
                let graph = ContractedGraph::new(inst, free, supers.clone());
                if opts.keep_ties {
                    match min_paths_all(&graph, &pairs) {
                        Ok(solutions) => {
                            for paths in solutions {
                                let total = paths.iter().map(|p| p.length).sum();
                                reducer.offer(SweepEntry { choice_idx, paths, total, parent: *parent });
                            }
                        }
                        Err(HpError::Infeasible) => continue,
                        Err(e) => return Err(e.into()),
                    }
                } else {
                    match min_paths(&graph, &pairs) {
                        Ok(paths) => {
                            let total = paths.iter().map(|p| p.length).sum();
                            reducer.offer(SweepEntry { choice_idx, paths, total, parent: *parent });
                        }
                        Err(HpError::Infeasible) => continue,
                        Err(e) => return Err(e.into()),
                    }
                }
            }
            Ok(reducer.finish())
        });

    let mut entries = Vec::new();
    for group in per_choice {
        entries.extend(group?);
    }
    if entries.is_empty() {
        return Err(SweepError::Infeasible { zone: absorb.index });
    }
    Ok(StageState { zone: absorb.index, choices, entries })
}

/// One sweep step per the stage contract: `state` covers zones 1..k, `absorb`
/// is zone k+1 whose own vertices are folded in and whose pool supplies the
/// outgoing choices. Stepping a fully-covered zone with an empty pool is the
/// identity.
pub fn sweep_step(
    inst: &Instance,
    state: &StageState,
    absorb: &ZoneSpec,
    opts: &SweepOptions,
) -> Result<StageState, SweepError> {
    if absorb.boundary_candidates.is_empty() {
        let chosen_covers_all = state.entries.iter().all(|e| {
            absorb
                .own_vertices
                .iter()
                .all(|v| state.choices[e.choice_idx].chosen.contains(v))
        });
        if chosen_covers_all {
            return Ok(state.clone());
        }
    }
    solve_stage(inst, Some(state), absorb, opts)
}

/// Expected coverage after absorbing zones `1..=upto` (1-based), excluding
/// boundary vertices.
#[cfg(debug_assertions)]
fn zone_prefix(plan: &ZonePlan, upto: usize) -> BTreeSet<VertexId> {
    plan.zones[..upto]
        .iter()
        .flat_map(|z| z.own_vertices.iter().copied())
        .collect()
}

/// Run the whole sweep: entries from zone 1, one step per zone up to m-2,
/// then close the cycle through whatever the last stage's choices left of
/// zone m-1 plus all of zone m, and back-substitute.
pub fn run_sweep(
    inst: &Instance,
    plan: &ZonePlan,
    opts: &SweepOptions,
) -> Result<SweepOutcome, SweepError> {
    plan.validate(inst)?;
    let m = plan.len();

    // zones absorbed by keyed stages; the rest belongs to the closure
    let mut stages_end = if m == 1 { 0 } else { (m - 2).max(1) };
    // A two-zone plan whose only boundary admits no choice (a single-vertex
    // trailing zone, say) degenerates to a plain cycle solve: the closure
    // absorbs the trailing vertex the same way the last zone is absorbed in
    // longer plans.
    if stages_end == 1 && m == 2 && enumerate_boundary_choices(&plan.zones[0]).is_empty() {
        stages_end = 0;
    }

    let mut states: Vec<StageState> = Vec::new();
    let mut stage_counts: Vec<(usize, usize)> = Vec::with_capacity(stages_end);
    let mut current: Option<StageState> = None;
    for s in 0..stages_end {
        let state = solve_stage(inst, current.as_ref(), &plan.zones[s], opts)?;
        #[cfg(debug_assertions)]
        {
            let prefix = zone_prefix(plan, s + 1);
            for entry in &state.entries {
                let mut expected = prefix.clone();
                expected.extend(state.choices[entry.choice_idx].chosen.iter().copied());
                assert_entry_coverage(entry, &expected);
            }
        }
        stage_counts.push((state.zone, state.entries.len()));
        // previous stages are only needed for tracing
        if let Some(done) = current.replace(state) {
            if opts.record_states {
                states.push(done);
            }
        }
    }

    // closure: remaining free vertices are zone stages_end+1 minus the chosen
    // set, plus every later zone
    let mut best: Option<(Tour, usize)> = None;
    if stages_end == 0 {
        let free: Vec<VertexId> =
            plan.zones.iter().flat_map(|z| z.own_vertices.iter().copied()).collect();
        let graph = ContractedGraph::new(inst, free, Vec::new());
        let cycle = min_cycle(&graph)?;
        let tour = Tour::new(cycle.expanded, cycle.length).canonicalized();
        best = Some((tour, usize::MAX));
    } else {
        let last = current.as_ref().unwrap();
        let tail_zone = &plan.zones[stages_end];
        let later: Vec<VertexId> = plan.zones[stages_end + 1..]
            .iter()
            .flat_map(|z| z.own_vertices.iter().copied())
            .collect();
        for (idx, entry) in last.entries.iter().enumerate() {
            let chosen: &[VertexId] = &last.choices[entry.choice_idx].chosen;
            let mut free: Vec<VertexId> = tail_zone
                .own_vertices
                .iter()
                .copied()
                .filter(|v| !chosen.contains(v))
                .collect();
            free.extend_from_slice(&later);
            let supers: Vec<EmbeddedHp> = entry
                .paths
                .iter()
                .map(|p| EmbeddedHp::new(p.expanded.clone(), p.length))
                .collect();
            let graph = ContractedGraph::new(inst, free, supers);
            let cycle = match min_cycle(&graph) {
                Ok(c) => c,
                Err(HpError::Infeasible) => continue,
                Err(e) => return Err(e.into()),
            };
            let tour = Tour::new(cycle.expanded, cycle.length).canonicalized();
            let better = match &best {
                None => true,
                Some((cur, _)) => (tour.length, &tour.seq) < (cur.length, &cur.seq),
            };
            if better {
                best = Some((tour, idx));
            }
        }
    }

    let (tour, winner_idx) = best.ok_or(SweepError::Infeasible { zone: m })?;
    let verified = inst.tour_length(&tour.seq)?;
    debug_assert_eq!(verified, tour.length, "closure length bookkeeping");
    let tour = Tour::new(tour.seq, verified);

    if opts.record_states {
        if let Some(done) = current {
            states.push(done);
        }
    }
    let winner = if stages_end == 0 { None } else { Some(winner_idx) };
    Ok(SweepOutcome { tour, stage_counts, states, winner })
}

/// Which previous-stage entries survive into each stage.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransitionReport {
    /// Zone absorbed by the referencing stage.
    pub zone: usize,
    /// Previous-stage entry indices referenced by at least one entry.
    pub referenced: Vec<usize>,
    /// Previous-stage entry indices never referenced (filtered out).
    pub filtered: Vec<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FilterReport {
    pub transitions: Vec<TransitionReport>,
}

/// Summarize embedded-path filtering across recorded stages: for each stage
/// k, which zone-(k-1) entries are carried forward inside at least one
/// zone-k entry and which were dropped.
pub fn filter_report(states: &[StageState]) -> FilterReport {
    let mut transitions = Vec::new();
    for w in states.windows(2) {
        let (prev, cur) = (&w[0], &w[1]);
        let mut referenced: BTreeSet<usize> = BTreeSet::new();
        for entry in &cur.entries {
            if let Some(p) = entry.parent {
                referenced.insert(p);
            }
        }
        let filtered: Vec<usize> =
            (0..prev.entries.len()).filter(|i| !referenced.contains(i)).collect();
        transitions.push(TransitionReport {
            zone: cur.zone,
            referenced: referenced.into_iter().collect(),
            filtered,
        });
    }
    FilterReport { transitions }
}

/// `[26 10]` for a single pair, `[16 47]+[23 11]` for several — the entry's
/// key in display form, pairs in pool order.
pub fn format_matching(choice: &BoundaryChoice) -> String {
    choice
        .matching
        .iter()
        .map(|(a, b)| format!("[{a} {b}]"))
        .collect::<Vec<_>>()
        .join("+")
}

fn render_steps(steps: &[Step]) -> String {
    steps
        .iter()
        .map(|s| match s {
            Step::Free(v) => v.to_string(),
            Step::Super { enter, exit, .. } => format!("[{enter} {exit}]"),
        })
        .collect::<Vec<_>>()
        .join(" ")
}

/// One candidate as a trace line: paths in the matching's pool order, each
/// oriented from its pool-earlier endpoint, super-edges bracketed by their
/// ports, paths separated by ` | `.
pub fn format_entry_line(choice: &BoundaryChoice, entry: &SweepEntry) -> String {
    let mut parts = Vec::with_capacity(entry.paths.len());
    for &(from, to) in &choice.matching {
        let path = entry
            .paths
            .iter()
            .find(|p| {
                let (a, b) = p.endpoints;
                (a == from && b == to) || (a == to && b == from)
            })
            .expect("entry has a path per matching pair");
        let mut path = path.clone();
        if path.endpoints.0 != from {
            path.reverse_in_place();
        }
        parts.push(render_steps(&path.steps));
    }
    parts.join(" | ")
}
