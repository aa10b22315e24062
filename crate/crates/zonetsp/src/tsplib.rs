//! TSPLIB95 instance parsing and integer edge weights.
//!
//! Only the two metrics the shipped benchmark needs are supported: `ATT`
//! (pseudo-Euclidean) and `EUC_2D`. Both round with `nint` =
//! round-half-away-from-zero, matching the TSPLIB reference implementation,
//! so lengths agree bit-exactly with published optima.

use std::fmt;

use thiserror::Error;

/// 1-based vertex id, as used in TSPLIB files.
pub type VertexId = u32;

/// Edge weight function of an instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    /// Pseudo-Euclidean: `r = sqrt((dx^2+dy^2)/10)`, `t = nint(r)`,
    /// distance `t+1` if `t < r` else `t`.
    Att,
    /// `nint(sqrt(dx^2+dy^2))`.
    Euc2d,
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Metric::Att => "ATT",
            Metric::Euc2d => "EUC_2D",
        })
    }
}

/// A parsed TSPLIB instance. Immutable after construction; all operations are
/// pure, so shared references can be used freely across threads.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub name: String,
    pub metric: Metric,
    /// Coordinates indexed by `id - 1`.
    coords: Vec<(f64, f64)>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("missing DIMENSION keyword")]
    MissingDimension,
    #[error("line {line}: bad DIMENSION value")]
    BadDimension { line: usize },
    #[error("missing EDGE_WEIGHT_TYPE keyword")]
    MissingMetric,
    #[error("line {line}: unsupported EDGE_WEIGHT_TYPE {value:?} (only ATT and EUC_2D)")]
    UnsupportedMetric { line: usize, value: String },
    #[error("missing NODE_COORD_SECTION")]
    MissingCoords,
    #[error("line {line}: vertex id {id} out of range 1..={dimension}")]
    VertexOutOfRange { line: usize, id: i64, dimension: usize },
    #[error("line {line}: duplicate vertex id {id}")]
    DuplicateVertex { line: usize, id: VertexId },
    #[error("line {line}: non-numeric coordinate")]
    BadCoordinate { line: usize },
    #[error("line {line}: malformed coordinate row")]
    BadCoordRow { line: usize },
    #[error("dimension mismatch: DIMENSION {expected} but {got} coordinate rows")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("vertex id {id} out of range 1..={dimension}")]
    IdOutOfRange { id: VertexId, dimension: usize },
    #[error("tour is not a permutation of 1..={dimension}")]
    NotAPermutation { dimension: usize },
}

/// Round half away from zero, TSPLIB's `nint`.
fn nint(x: f64) -> i64 {
    if x >= 0.0 {
        (x + 0.5).floor() as i64
    } else {
        (x - 0.5).ceil() as i64
    }
}

impl Instance {
    pub fn new(name: String, metric: Metric, coords: Vec<(f64, f64)>) -> Instance {
        Instance { name, metric, coords }
    }

    /// Number of vertices.
    pub fn dimension(&self) -> usize {
        self.coords.len()
    }

    /// All vertex ids, `1..=N`.
    pub fn vertex_ids(&self) -> impl Iterator<Item = VertexId> + '_ {
        1..=self.coords.len() as VertexId
    }

    pub fn coord(&self, id: VertexId) -> (f64, f64) {
        self.coords[(id - 1) as usize]
    }

    fn check_id(&self, id: VertexId) -> Result<(), ParseError> {
        if id == 0 || id as usize > self.coords.len() {
            return Err(ParseError::IdOutOfRange { id, dimension: self.coords.len() });
        }
        Ok(())
    }

    /// Integer edge weight between two vertices. Symmetric, zero on the
    /// diagonal. Panics if an id is out of range; use [`Instance::distance_checked`]
    /// at trust boundaries.
    pub fn distance(&self, i: VertexId, j: VertexId) -> u64 {
        let (xi, yi) = self.coords[(i - 1) as usize];
        let (xj, yj) = self.coords[(j - 1) as usize];
        let dx = xi - xj;
        let dy = yi - yj;
        match self.metric {
            Metric::Att => {
                let r = ((dx * dx + dy * dy) / 10.0).sqrt();
                let t = nint(r);
                if (t as f64) < r {
                    (t + 1) as u64
                } else {
                    t as u64
                }
            }
            Metric::Euc2d => nint((dx * dx + dy * dy).sqrt()) as u64,
        }
    }

    pub fn distance_checked(&self, i: VertexId, j: VertexId) -> Result<u64, ParseError> {
        self.check_id(i)?;
        self.check_id(j)?;
        Ok(self.distance(i, j))
    }

    /// Length of the open path visiting `seq` in order (no closing edge).
    pub fn path_length(&self, seq: &[VertexId]) -> u64 {
        seq.windows(2).map(|w| self.distance(w[0], w[1])).sum()
    }

    /// Length of the closed tour `seq`, including the edge back to the start.
    /// The sequence must be a permutation of `1..=N`.
    pub fn tour_length(&self, seq: &[VertexId]) -> Result<u64, ParseError> {
        let n = self.coords.len();
        let mut seen = vec![false; n];
        if seq.len() != n {
            return Err(ParseError::NotAPermutation { dimension: n });
        }
        for &id in seq {
            self.check_id(id)?;
            if std::mem::replace(&mut seen[(id - 1) as usize], true) {
                return Err(ParseError::NotAPermutation { dimension: n });
            }
        }
        if n == 1 {
            return Ok(0);
        }
        let mut total = self.path_length(seq);
        total += self.distance(seq[n - 1], seq[0]);
        Ok(total)
    }

    /// Serialize back to TSPLIB text. Re-parsing yields identical distances.
    pub fn to_tsplib(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("NAME : {}\n", self.name));
        out.push_str("TYPE : TSP\n");
        out.push_str(&format!("DIMENSION : {}\n", self.coords.len()));
        out.push_str(&format!("EDGE_WEIGHT_TYPE : {}\n", self.metric));
        out.push_str("NODE_COORD_SECTION\n");
        for (i, (x, y)) in self.coords.iter().enumerate() {
            out.push_str(&format!("{} {} {}\n", i + 1, x, y));
        }
        out.push_str("EOF\n");
        out
    }
}

/// Parse a TSPLIB `.tsp` document with a `NODE_COORD_SECTION`.
///
/// Keyword lines accept both `KEY: value` and `KEY : value`, case-insensitive.
/// Coordinates are stored by vertex id, not file order.
pub fn parse_instance(text: &str) -> Result<Instance, ParseError> {
    let mut name = String::new();
    let mut dimension: Option<usize> = None;
    let mut metric: Option<Metric> = None;
    let mut coords: Vec<Option<(f64, f64)>> = Vec::new();
    let mut rows_seen = 0usize;
    let mut in_coords = false;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if !in_coords {
            let upper = line.to_ascii_uppercase();
            if upper.starts_with("NODE_COORD_SECTION") {
                in_coords = true;
                let dim = dimension.ok_or(ParseError::MissingDimension)?;
                metric.ok_or(ParseError::MissingMetric)?;
                coords = vec![None; dim];
                continue;
            }
            let (key, value) = match line.split_once(':') {
                Some((k, v)) => (k.trim().to_ascii_uppercase(), v.trim().to_string()),
                None => (upper.clone(), String::new()),
            };
            match key.as_str() {
                "NAME" => name = value,
                "DIMENSION" => {
                    let dim: usize = value
                        .parse()
                        .map_err(|_| ParseError::BadDimension { line: line_no })?;
                    if dim == 0 {
                        return Err(ParseError::BadDimension { line: line_no });
                    }
                    dimension = Some(dim);
                }
                "EDGE_WEIGHT_TYPE" => {
                    metric = Some(match value.to_ascii_uppercase().as_str() {
                        "ATT" => Metric::Att,
                        "EUC_2D" => Metric::Euc2d,
                        other => {
                            return Err(ParseError::UnsupportedMetric {
                                line: line_no,
                                value: other.to_string(),
                            })
                        }
                    });
                }
                // TYPE, COMMENT and anything else informational is skipped.
                _ => {}
            }
            continue;
        }
        if line.eq_ignore_ascii_case("EOF") {
            break;
        }
        let mut parts = line.split_whitespace();
        let id_tok = parts.next().ok_or(ParseError::BadCoordRow { line: line_no })?;
        let id: i64 = id_tok
            .parse()
            .map_err(|_| ParseError::BadCoordRow { line: line_no })?;
        let dim = coords.len();
        if id < 1 || id as usize > dim {
            return Err(ParseError::VertexOutOfRange { line: line_no, id, dimension: dim });
        }
        let x: f64 = parts
            .next()
            .ok_or(ParseError::BadCoordRow { line: line_no })?
            .parse()
            .map_err(|_| ParseError::BadCoordinate { line: line_no })?;
        let y: f64 = parts
            .next()
            .ok_or(ParseError::BadCoordRow { line: line_no })?
            .parse()
            .map_err(|_| ParseError::BadCoordinate { line: line_no })?;
        let slot = &mut coords[(id - 1) as usize];
        if slot.is_some() {
            return Err(ParseError::DuplicateVertex { line: line_no, id: id as VertexId });
        }
        *slot = Some((x, y));
        rows_seen += 1;
    }

    if !in_coords {
        // Distinguish the three missing-header cases for better diagnostics.
        dimension.ok_or(ParseError::MissingDimension)?;
        metric.ok_or(ParseError::MissingMetric)?;
        return Err(ParseError::MissingCoords);
    }
    let dim = coords.len();
    if rows_seen != dim {
        return Err(ParseError::DimensionMismatch { expected: dim, got: rows_seen });
    }
    let coords: Vec<(f64, f64)> = coords.into_iter().map(|c| c.unwrap()).collect();
    Ok(Instance::new(name, metric.unwrap(), coords))
}

/// Parse a tour file: one 1-based id per line, with an optional TSPLIB
/// `TOUR_SECTION` wrapper. `-1` and `EOF` terminate.
pub fn parse_tour(text: &str) -> Result<Vec<VertexId>, ParseError> {
    let mut ids = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if line.eq_ignore_ascii_case("EOF") {
            break;
        }
        let upper = line.to_ascii_uppercase();
        if upper.contains("SECTION") {
            continue;
        }
        if upper.starts_with("NAME")
            || upper.starts_with("TYPE")
            || upper.starts_with("COMMENT")
            || upper.starts_with("DIMENSION")
        {
            continue;
        }
        let mut done = false;
        for tok in line.split_whitespace() {
            let v: i64 = tok
                .parse()
                .map_err(|_| ParseError::BadCoordRow { line: idx + 1 })?;
            if v == -1 {
                done = true;
                break;
            }
            if v < 1 {
                return Err(ParseError::VertexOutOfRange { line: idx + 1, id: v, dimension: 0 });
            }
            ids.push(v as VertexId);
        }
        if done {
            break;
        }
    }
    Ok(ids)
}
