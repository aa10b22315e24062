//! Zone plans: ordered vertex strips with per-boundary candidate pools, plus
//! enumeration of boundary-vertex combinations and endpoint matchings.
//!
//! A plan partitions the instance into zones 1..m. Each zone except the last
//! carries an ordered pool of *potential boundary vertices*, drawn from the
//! next zone, and a set of permitted crossing counts `n` (always even: a
//! closed tour crosses any boundary an even number of times). Pool order is
//! significant: combinations enumerate in pool order, which fixes candidate
//! order in traces and reports.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::tsplib::{Instance, VertexId};

/// One zone: its own vertices plus the boundary pool into the next zone.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ZoneSpec {
    /// 1-based zone number.
    pub index: usize,
    /// Vertices owned by this zone.
    pub own_vertices: Vec<VertexId>,
    /// Candidate boundary vertices, in significance order; subset of the next
    /// zone's own vertices. Empty for the last zone.
    pub boundary_candidates: Vec<VertexId>,
    /// Permitted crossing-edge counts; even, each ≤ pool size. Requested
    /// values larger than the pool are clamped away.
    pub allowed_crossings: Vec<usize>,
}

/// An ordered list of zones covering the instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ZonePlan {
    pub zones: Vec<ZoneSpec>,
}

/// One way to cross a boundary: which pool vertices carry the crossing edges,
/// and how they pair up into open-path endpoints (one pair per path).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BoundaryChoice {
    /// Chosen vertices, in pool order.
    pub chosen: Vec<VertexId>,
    /// Endpoint pairs. Each pair lists the pool-earlier vertex first; pairs
    /// are ordered by their first vertex's pool position.
    pub matching: Vec<(VertexId, VertexId)>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ZoneError {
    #[error("line {line}: cannot parse zone config entry")]
    BadLine { line: usize },
    #[error("line {line}: unknown vertex id {id}")]
    UnknownVertex { line: usize, id: u64 },
    #[error("duplicate declaration for zone {zone}")]
    DuplicateZone { zone: usize },
    #[error("zone numbers must be contiguous from 1; missing zone {zone}")]
    MissingZone { zone: usize },
    #[error("config declares no zones")]
    Empty,
    #[error("zone {zone} has no vertices")]
    EmptyZone { zone: usize },
    #[error("vertex {id} appears in zones {first} and {second}")]
    Overlap { id: VertexId, first: usize, second: usize },
    #[error("vertex {id} not covered by any zone")]
    Uncovered { id: VertexId },
    #[error("zone {zone} boundary candidate {id} is not in zone {next}")]
    BoundaryNotInNextZone { zone: usize, id: VertexId, next: usize },
    #[error("zone {zone}: odd crossing count {n} not allowed")]
    OddCrossing { zone: usize, n: usize },
    #[error("boundary declared for zone {zone}, but it is the last zone")]
    BoundaryOnLastZone { zone: usize },
    #[error("auto-zone target size {target} out of range 1..={max}")]
    BadTargetSize { target: usize, max: usize },
}

impl ZoneSpec {
    /// Pool position of a chosen vertex. Panics if absent.
    pub fn pool_index(&self, v: VertexId) -> usize {
        self.boundary_candidates.iter().position(|&c| c == v).unwrap()
    }
}

impl ZonePlan {
    pub fn len(&self) -> usize {
        self.zones.len()
    }

    pub fn is_empty(&self) -> bool {
        self.zones.is_empty()
    }

    /// Checks the plan invariants against an instance: zones are nonempty,
    /// pairwise disjoint, cover 1..=N exactly; each pool is a subset of the
    /// next zone's vertices; the last zone has an empty pool.
    pub fn validate(&self, inst: &Instance) -> Result<(), ZoneError> {
        if self.zones.is_empty() {
            return Err(ZoneError::Empty);
        }
        let n = inst.dimension();
        let mut owner: Vec<Option<usize>> = vec![None; n];
        for zone in &self.zones {
            if zone.own_vertices.is_empty() {
                return Err(ZoneError::EmptyZone { zone: zone.index });
            }
            for &v in &zone.own_vertices {
                let slot = &mut owner[(v - 1) as usize];
                match slot {
                    Some(first) => {
                        return Err(ZoneError::Overlap { id: v, first: *first, second: zone.index })
                    }
                    None => *slot = Some(zone.index),
                }
            }
        }
        for (i, slot) in owner.iter().enumerate() {
            if slot.is_none() {
                return Err(ZoneError::Uncovered { id: (i + 1) as VertexId });
            }
        }
        for (k, zone) in self.zones.iter().enumerate() {
            let last = k + 1 == self.zones.len();
            if last {
                if !zone.boundary_candidates.is_empty() {
                    return Err(ZoneError::BoundaryOnLastZone { zone: zone.index });
                }
                continue;
            }
            let next: BTreeSet<VertexId> =
                self.zones[k + 1].own_vertices.iter().copied().collect();
            for &v in &zone.boundary_candidates {
                if !next.contains(&v) {
                    return Err(ZoneError::BoundaryNotInNextZone {
                        zone: zone.index,
                        id: v,
                        next: zone.index + 1,
                    });
                }
            }
            for &n in &zone.allowed_crossings {
                debug_assert!(n % 2 == 0 && n >= 2 && n <= zone.boundary_candidates.len());
            }
        }
        Ok(())
    }
}

fn parse_id_list(body: &str, line: usize, max: usize) -> Result<Vec<VertexId>, ZoneError> {
    let mut out = Vec::new();
    for tok in body.split(|c: char| c.is_whitespace() || c == ',') {
        if tok.is_empty() {
            continue;
        }
        let id: u64 = tok.parse().map_err(|_| ZoneError::BadLine { line })?;
        if id == 0 || id as usize > max {
            return Err(ZoneError::UnknownVertex { line, id });
        }
        out.push(id as VertexId);
    }
    Ok(out)
}

/// Normalize a requested crossing list against a pool of size `b`: reject odd
/// values, drop values outside `[2, b]`, sort and dedupe.
fn clamp_crossings(requested: &[usize], b: usize, zone: usize) -> Result<Vec<usize>, ZoneError> {
    let mut out = BTreeSet::new();
    for &n in requested {
        if n % 2 != 0 {
            return Err(ZoneError::OddCrossing { zone, n });
        }
        if n >= 2 && n <= b {
            out.insert(n);
        }
    }
    Ok(out.into_iter().collect())
}

/// Parse and validate a zone-config document.
///
/// Line-oriented format, `#` starts a comment:
/// ```text
/// zone 1: 4 35 45
/// boundary 1: 26 10 24
/// crossings 1: 2
/// ```
/// `crossings` defaults to `{2}`; values exceeding the pool are clamped away.
pub fn load_zone_plan(text: &str, inst: &Instance) -> Result<ZonePlan, ZoneError> {
    struct Raw {
        own: Option<Vec<VertexId>>,
        boundary: Option<Vec<VertexId>>,
        crossings: Option<Vec<usize>>,
    }
    let mut raws: Vec<Raw> = Vec::new();
    fn ensure(raws: &mut Vec<Raw>, k: usize) -> usize {
        while raws.len() < k {
            raws.push(Raw { own: None, boundary: None, crossings: None });
        }
        k - 1
    }
    let n = inst.dimension();
    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw_line.split('#').next() {
            Some(l) => l.trim(),
            None => "",
        };
        if line.is_empty() {
            continue;
        }
        let (head, body) = line.split_once(':').ok_or(ZoneError::BadLine { line: line_no })?;
        let mut head_parts = head.split_whitespace();
        let kind = head_parts.next().ok_or(ZoneError::BadLine { line: line_no })?;
        let k: usize = head_parts
            .next()
            .ok_or(ZoneError::BadLine { line: line_no })?
            .parse()
            .map_err(|_| ZoneError::BadLine { line: line_no })?;
        if k == 0 || head_parts.next().is_some() {
            return Err(ZoneError::BadLine { line: line_no });
        }
        let slot = ensure(&mut raws, k);
        match kind.to_ascii_lowercase().as_str() {
            "zone" => {
                let ids = parse_id_list(body, line_no, n)?;
                if raws[slot].own.replace(ids).is_some() {
                    return Err(ZoneError::DuplicateZone { zone: k });
                }
            }
            "boundary" => {
                let ids = parse_id_list(body, line_no, n)?;
                if raws[slot].boundary.replace(ids).is_some() {
                    return Err(ZoneError::DuplicateZone { zone: k });
                }
            }
            "crossings" => {
                let mut ns = Vec::new();
                for tok in body.split(|c: char| c.is_whitespace() || c == ',') {
                    if tok.is_empty() {
                        continue;
                    }
                    let v: usize = tok.parse().map_err(|_| ZoneError::BadLine { line: line_no })?;
                    ns.push(v);
                }
                if raws[slot].crossings.replace(ns).is_some() {
                    return Err(ZoneError::DuplicateZone { zone: k });
                }
            }
            _ => return Err(ZoneError::BadLine { line: line_no }),
        }
    }

    if raws.is_empty() {
        return Err(ZoneError::Empty);
    }
    let mut zones = Vec::with_capacity(raws.len());
    for (i, raw) in raws.iter().enumerate() {
        let own = raw.own.clone().ok_or(ZoneError::MissingZone { zone: i + 1 })?;
        let boundary = raw.boundary.clone().unwrap_or_default();
        let b = boundary.len();
        let requested = raw.crossings.clone().unwrap_or_else(|| vec![2]);
        let allowed = clamp_crossings(&requested, b, i + 1)?;
        zones.push(ZoneSpec {
            index: i + 1,
            own_vertices: own,
            boundary_candidates: boundary,
            allowed_crossings: allowed,
        });
    }
    let plan = ZonePlan { zones };
    plan.validate(inst)?;
    Ok(plan)
}

/// Build a plan by sweeping along x: vertices sorted by (x, y, id) are cut
/// into consecutive groups of `target_size` (the last group may be smaller).
/// Each pool is the whole next zone, in the same sweep order; crossing counts
/// are all even values up to the pool size, capped at `max_n`.
pub fn auto_zone(inst: &Instance, target_size: usize, max_n: usize) -> Result<ZonePlan, ZoneError> {
    let n = inst.dimension();
    if target_size == 0 || target_size > n {
        return Err(ZoneError::BadTargetSize { target: target_size, max: n });
    }
    let mut ids: Vec<VertexId> = inst.vertex_ids().collect();
    ids.sort_by(|&a, &b| {
        let (xa, ya) = inst.coord(a);
        let (xb, yb) = inst.coord(b);
        xa.partial_cmp(&xb)
            .unwrap()
            .then(ya.partial_cmp(&yb).unwrap())
            .then(a.cmp(&b))
    });
    let groups: Vec<Vec<VertexId>> = ids.chunks(target_size).map(|c| c.to_vec()).collect();
    let m = groups.len();
    let mut zones = Vec::with_capacity(m);
    for (i, own) in groups.iter().enumerate() {
        let boundary = if i + 1 < m { groups[i + 1].clone() } else { Vec::new() };
        let b = boundary.len();
        let cap = max_n.min(b);
        let allowed: Vec<usize> = (2..=cap).step_by(2).collect();
        zones.push(ZoneSpec {
            index: i + 1,
            own_vertices: own.clone(),
            boundary_candidates: boundary,
            allowed_crossings: allowed,
        });
    }
    let plan = ZonePlan { zones };
    debug_assert!(plan.validate(inst).is_ok());
    Ok(plan)
}

/// All perfect matchings of `vs` (even length) in canonical order: the first
/// element pairs with each later element in turn, recursing on the rest.
/// Yields (n-1)!! matchings.
fn matchings(vs: &[VertexId]) -> Vec<Vec<(VertexId, VertexId)>> {
    if vs.is_empty() {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    let first = vs[0];
    for i in 1..vs.len() {
        let partner = vs[i];
        let rest: Vec<VertexId> = vs
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != 0 && j != i)
            .map(|(_, &v)| v)
            .collect();
        for mut sub in matchings(&rest) {
            let mut m = vec![(first, partner)];
            m.append(&mut sub);
            out.push(m);
        }
    }
    out
}

fn combinations(b: usize, n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(n);
    fn rec(start: usize, b: usize, n: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        for i in start..b {
            cur.push(i);
            rec(i + 1, b, n, cur, out);
            cur.pop();
        }
    }
    rec(0, b, n, &mut cur, &mut out);
    out
}

/// Enumerate every boundary choice of a zone, deterministically: crossing
/// counts ascending, vertex subsets in pool-position combination order,
/// matchings in canonical first-vertex-pairs-each-later-candidate order.
/// Summed over all even n in `[2, b]`, the distinct vertex subsets number
/// `2^(b-1) - 1`; for n ≥ 4 each subset additionally fans out over its
/// (n-1)!! matchings.
pub fn enumerate_boundary_choices(spec: &ZoneSpec) -> Vec<BoundaryChoice> {
    let pool = &spec.boundary_candidates;
    let mut out = Vec::new();
    for &n in &spec.allowed_crossings {
        for combo in combinations(pool.len(), n) {
            let chosen: Vec<VertexId> = combo.iter().map(|&i| pool[i]).collect();
            for matching in matchings(&chosen) {
                out.push(BoundaryChoice { chosen: chosen.clone(), matching });
            }
        }
    }
    out
}
