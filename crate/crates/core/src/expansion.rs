//! Subdivision calculus on the dual complex of the special fibre.
//!
//! Each triangle carries an ordered corner choice `(first, second)`: `first`
//! is blown up along the first base parameter, `second` along the last. With
//! roles `P = first`, `Q = second`, `R` the remaining vertex and barycentric
//! coordinates `(X, Y, Z)` towards `(P, Q, R)`, depth `n` adds the walls
//! `X = S_k` and `Y = 1 - S_k` for the partial sums `0 < S_1 < ... < S_n < 1`.
//! Writing `Y' = 1 - Y`, every vertex of the subdivided triangle is a grid
//! point `(X, Y') = (S_i, S_j)` with `0 <= i <= j <= n + 1`, and the regions
//! are the grid cells `[S_a, S_{a+1}] x [S_b, S_{b+1}]` clipped to `X <= Y'`.
//!
//! Along a side, the level-`k` node sits at distance `S_k` from the side's
//! *near* endpoint: `Q` on `PQ`, `R` on `PR`, `Q` on `QR`. Two triangles glue
//! along a shared edge exactly when they agree on its near endpoint.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::delta::{CellId, DeltaComplex};
use crate::exact::{rat, Rational};
use crate::surface::{Labeling3, SurfaceModel};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ExpansionError {
    #[error("triangle {triangle}: corner choice ({first}, {second}) is not two distinct vertices of it")]
    BadCorner { triangle: String, first: String, second: String },
    #[error("assignment covers {found} triangles, model has {expected}")]
    WrongTriangleCount { expected: usize, found: usize },
    #[error("labeling is not valid for model {0}")]
    InvalidLabeling(String),
    #[error("expected {expected} position parameters, got {found}")]
    WrongParamCount { expected: usize, found: usize },
    #[error("position parameters must increase strictly inside (0, 1)")]
    BadParams,
    #[error("assignment file: {0}")]
    File(String),
}

/// Ordered corner choice per triangle, indexed like
/// [`SurfaceModel::triangles`]. `pairs[t] = [first, second]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlowupAssignment {
    pub pairs: Vec<[usize; 2]>,
}

/// Vertex roles `[P, Q, R]` of one triangle under an assignment.
pub type Roles = [usize; 3];

impl BlowupAssignment {
    pub fn validate(&self, model: &SurfaceModel) -> Result<(), ExpansionError> {
        let tris = model.triangles();
        if self.pairs.len() != tris.len() {
            return Err(ExpansionError::WrongTriangleCount { expected: tris.len(), found: self.pairs.len() });
        }
        for (t, &[a, b]) in self.pairs.iter().enumerate() {
            if a == b || !tris[t].contains(&a) || !tris[t].contains(&b) {
                let name = |v: usize| model.component_names.get(v).cloned().unwrap_or_else(|| format!("#{v}"));
                return Err(ExpansionError::BadCorner { triangle: model.triangle_label(t), first: name(a), second: name(b) });
            }
        }
        Ok(())
    }

    pub fn roles(&self, model: &SurfaceModel, t: usize) -> Roles {
        let [p, q] = self.pairs[t];
        let r = *model.triangles()[t].iter().find(|&&v| v != p && v != q).expect("triangle has a third vertex");
        [p, q, r]
    }

    /// Near endpoint of the side `{a, b}` of triangle `t`.
    pub fn near_endpoint(&self, model: &SurfaceModel, t: usize, a: usize, b: usize) -> usize {
        let [p, q, _] = self.roles(model, t);
        if a == p {
            b
        } else if b == p {
            a
        } else {
            q
        }
    }

    /// Swaps first and second in triangle `t`.
    pub fn flipped(&self, t: usize) -> Self {
        let mut out = self.clone();
        out.pairs[t].swap(0, 1);
        out
    }
}

fn quartic_pairs(model: &SurfaceModel, spec: [(&str, &str, &str); 4]) -> BlowupAssignment {
    let idx = |n: &str| model.vertex_index(n).expect("quartic vertex");
    let mut pairs = vec![[0, 0]; 4];
    for (opposite, first, second) in spec {
        let t = (0..4).find(|&t| model.triangle_opposite(t) == Some(idx(opposite))).expect("triangle");
        pairs[t] = [idx(first), idx(second)];
    }
    BlowupAssignment { pairs }
}

/// The four local blow-ups around the corners of the tetrahedron, with each
/// corner normalized to `(blown up along t_1, blown up along t_2)`.
pub fn default_quartic_assignment(model: &SurfaceModel) -> BlowupAssignment {
    quartic_pairs(model, [("Y4", "Y1", "Y2"), ("Y3", "Y1", "Y2"), ("Y2", "Y1", "Y3"), ("Y1", "Y4", "Y2")])
}

/// The alternative corner choices that fail to glue.
pub fn nongluing_quartic_assignment(model: &SurfaceModel) -> BlowupAssignment {
    quartic_pairs(model, [("Y4", "Y1", "Y2"), ("Y3", "Y1", "Y2"), ("Y2", "Y4", "Y3"), ("Y1", "Y4", "Y3")])
}

/// Per triangle: first = the label-1 vertex, second = the label-2 vertex.
pub fn labeling_assignment(model: &SurfaceModel, labeling: &Labeling3) -> Result<BlowupAssignment, ExpansionError> {
    if labeling.assignment.len() != model.vertex_count() || !labeling.is_valid_for(model.triangles()) {
        return Err(ExpansionError::InvalidLabeling(model.name.clone()));
    }
    let pairs = model
        .triangles()
        .iter()
        .map(|t| {
            let with = |l: u8| *t.iter().find(|&&v| labeling.assignment[v] == l).expect("rainbow triangle");
            [with(1), with(2)]
        })
        .collect();
    Ok(BlowupAssignment { pairs })
}

#[derive(Deserialize)]
struct AssignmentFile {
    triangles: Vec<AssignmentEntry>,
}

#[derive(Deserialize)]
struct AssignmentEntry {
    #[serde(default)]
    opposite: Option<String>,
    #[serde(default)]
    vertices: Option<Vec<String>>,
    first: String,
    second: String,
}

/// Reads `{"triangles": [{"opposite": "Y4", "first": "Y1", "second": "Y2"}, ...]}`.
/// Triangles may be given by `"vertices": [..]` instead of `"opposite"`.
pub fn parse_assignment(model: &SurfaceModel, text: &str) -> Result<BlowupAssignment, ExpansionError> {
    let file: AssignmentFile = serde_json::from_str(text).map_err(|e| ExpansionError::File(e.to_string()))?;
    let idx = |n: &str| model.vertex_index(n).ok_or_else(|| ExpansionError::File(format!("unknown component {n}")));
    let mut pairs: Vec<Option<[usize; 2]>> = vec![None; model.triangles().len()];
    for entry in file.triangles {
        let t = match (&entry.opposite, &entry.vertices) {
            (Some(o), _) => {
                let o = idx(o)?;
                (0..pairs.len()).find(|&t| model.triangle_opposite(t) == Some(o))
            }
            (None, Some(vs)) => {
                let mut key = vs.iter().map(|v| idx(v)).collect::<Result<Vec<_>, _>>()?;
                key.sort_unstable();
                model.triangles().iter().position(|t| t.as_slice() == key.as_slice())
            }
            (None, None) => None,
        }
        .ok_or_else(|| ExpansionError::File("entry does not name a triangle of the model".into()))?;
        if pairs[t].replace([idx(&entry.first)?, idx(&entry.second)?]).is_some() {
            return Err(ExpansionError::File(format!("triangle {} given twice", model.triangle_label(t))));
        }
    }
    let found = pairs.iter().filter(|p| p.is_some()).count();
    let pairs: Option<Vec<[usize; 2]>> = pairs.into_iter().collect();
    let assignment = BlowupAssignment {
        pairs: pairs.ok_or(ExpansionError::WrongTriangleCount { expected: model.triangles().len(), found })?,
    };
    assignment.validate(model)?;
    Ok(assignment)
}

/// Default node positions `S_k = k / (n + 1)`.
pub fn default_params(n: usize) -> Vec<Rational> {
    (1..=n).map(|k| rat(k as i64, n as i64 + 1)).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SegmentColor {
    /// Measured by the first base parameter.
    Green,
    /// Measured by the last base parameter.
    Pink,
    /// Interior parameters, `t_2 .. t_n`, present from depth 2 on.
    Intermediate,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ColoredSegment {
    pub edge: String,
    /// Distances from the edge's first endpoint (in label order).
    pub from: String,
    pub to: String,
    pub length: String,
    /// 1-based index of the base parameter measuring this segment.
    pub parameter: usize,
    pub color: SegmentColor,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Carrier {
    /// P^1-bundle over a double curve.
    Edge { edge: usize, level: usize },
    /// P^1 x P^1 over a triple point.
    Box { triangle: usize, lower: usize, upper: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ExceptionalVertex {
    pub label: String,
    pub carrier: Carrier,
    /// Edge nodes: distance from the edge's first endpoint. Boxes: the
    /// barycentric coordinate towards the triangle's `P` role.
    pub position: String,
    #[serde(skip)]
    pub position_value: Rational,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum Direction {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl Direction {
    pub fn flip(self) -> Self {
        match self {
            Direction::Plus => Direction::Minus,
            Direction::Minus => Direction::Plus,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ArrowColor {
    Red,
    Green,
}

/// Torus arrow through an exceptional cell. Directions on edge nodes are
/// along the carrier edge, oriented from its first endpoint to its second;
/// on walls and boxes they are transverse to the wall (`Plus` = away from
/// the wall's near side).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Arrow {
    pub cell: String,
    pub factor: usize,
    pub color: ArrowColor,
    pub direction: Direction,
    pub source: String,
}

impl Arrow {
    /// Direction of the equivalent red arrow.
    pub fn red_direction(&self) -> Direction {
        match self.color {
            ArrowColor::Red => self.direction,
            ArrowColor::Green => self.direction.flip(),
        }
    }
}

/// How one triangle sees one of its sides.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SideView {
    pub triangle: String,
    pub near: String,
    /// `(distance from first endpoint, level)` for each node.
    pub nodes: Vec<(String, usize)>,
    /// `(length, parameter)` from the first endpoint onwards.
    pub segments: Vec<(String, usize)>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GluingFailure {
    pub edge: String,
    pub sides: [SideView; 2],
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GluingReport {
    pub glues: bool,
    pub failures: Vec<GluingFailure>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TorusConflict {
    pub cell: String,
    pub reason: String,
    pub arrows: Vec<Arrow>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TorusReport {
    pub compatible: bool,
    pub conflicts: Vec<TorusConflict>,
}

/// One base triangle's local subdivision.
#[derive(Clone, Debug, Serialize)]
pub struct TriangleRegions {
    pub triangle: String,
    pub roles: [String; 3],
    pub regions: usize,
}

#[derive(Clone, Debug)]
pub struct ExpandedComplex {
    pub base: SurfaceModel,
    pub assignment: BlowupAssignment,
    pub level: usize,
    pub params: Vec<Rational>,
    pub cells: DeltaComplex,
    pub exceptional_vertices: Vec<ExceptionalVertex>,
    pub colored_edges: Vec<ColoredSegment>,
    pub arrows: Vec<Arrow>,
    pub triangle_regions: Vec<TriangleRegions>,
}

/// Barycentric point `(X, Y, Z)` towards the roles `(P, Q, R)`.
type Bary = [Rational; 3];

fn partial_sum(params: &[Rational], i: usize) -> Rational {
    match i {
        0 => Rational::zero(),
        i if i == params.len() + 1 => Rational::one(),
        i => params[i - 1].clone(),
    }
}

fn grid_point(params: &[Rational], i: usize, j: usize) -> Bary {
    let x = partial_sum(params, i);
    let y_prime = partial_sum(params, j);
    let z = &y_prime - &x;
    [x, Rational::one() - y_prime, z]
}

/// Global placement of a grid point of triangle `t`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum GridSite {
    Component(usize),
    /// Side `{a, b}` (a < b) at distance `pos` from `a`.
    Side { edge: usize, pos: Rational, level: usize },
    Box { lower: usize, upper: usize },
}

fn grid_site(model: &SurfaceModel, roles: Roles, params: &[Rational], i: usize, j: usize) -> GridSite {
    let n = params.len();
    let [p, q, r] = roles;
    let last = n + 1;
    let side = |a: usize, b: usize, near: usize, level: usize| {
        let e = model.edge_index(a, b).expect("side of triangle is an edge");
        let first = model.edges()[e][0];
        let s = partial_sum(params, level);
        let pos = if near == first { s } else { Rational::one() - s };
        GridSite::Side { edge: e, pos, level }
    };
    match (i, j) {
        (0, 0) => GridSite::Component(q),
        (i, j) if i == last && j == last => GridSite::Component(p),
        (0, j) if j == last => GridSite::Component(r),
        (i, j) if i == j => side(p, q, q, i),
        (0, j) => side(q, r, q, j),
        (i, j) if j == last => side(p, r, r, i),
        (i, j) => GridSite::Box { lower: i, upper: j },
    }
}

pub fn validate_params(n: usize, params: &[Rational]) -> Result<(), ExpansionError> {
    if params.len() != n {
        return Err(ExpansionError::WrongParamCount { expected: n, found: params.len() });
    }
    let mut prev = Rational::zero();
    for p in params {
        if *p <= prev {
            return Err(ExpansionError::BadParams);
        }
        prev = p.clone();
    }
    if n > 0 && prev >= Rational::one() {
        return Err(ExpansionError::BadParams);
    }
    Ok(())
}

/// Subdivides every triangle to depth `n`. Passing `None` for `params` uses
/// [`default_params`].
pub fn subdivide(
    model: &SurfaceModel,
    assignment: &BlowupAssignment,
    n: usize,
    params: Option<&[Rational]>,
) -> Result<ExpandedComplex, ExpansionError> {
    assignment.validate(model)?;
    let params: Vec<Rational> = params.map_or_else(|| default_params(n), <[Rational]>::to_vec);
    validate_params(n, &params)?;

    let names = &model.component_names;
    let tris = model.triangles();
    let mut out = ExpandedComplex {
        base: model.clone(),
        assignment: assignment.clone(),
        level: n,
        params: params.clone(),
        cells: DeltaComplex::new(),
        exceptional_vertices: Vec::new(),
        colored_edges: Vec::new(),
        arrows: Vec::new(),
        triangle_regions: Vec::new(),
    };

    for t in 0..tris.len() {
        let roles = assignment.roles(model, t);
        out.triangle_regions.push(TriangleRegions {
            triangle: model.triangle_label(t),
            roles: roles.map(|v| names[v].clone()),
            regions: if n == 0 { 1 } else { (n + 1) * (n + 2) / 2 },
        });
    }
    if n == 0 {
        out.cells = model.sphere.clone();
        return Ok(out);
    }

    // Edge nodes: union over both sides, keyed by position.
    let mut edge_nodes: BTreeMap<usize, BTreeMap<Rational, BTreeSet<usize>>> = BTreeMap::new();
    for t in 0..tris.len() {
        let roles = assignment.roles(model, t);
        for i in 0..=n + 1 {
            for j in i..=n + 1 {
                if let GridSite::Side { edge, pos, level } = grid_site(model, roles, &params, i, j) {
                    edge_nodes.entry(edge).or_default().entry(pos).or_default().insert(level);
                }
            }
        }
    }

    let mut cells = DeltaComplex::new();
    let vertex_cells: Vec<CellId> = names.iter().map(|nm| cells.add_vertex(nm.clone())).collect();
    let mut node_cell: BTreeMap<(usize, Rational), CellId> = BTreeMap::new();
    for (&edge, nodes) in &edge_nodes {
        for (pos, levels) in nodes {
            let lvl = levels.iter().map(usize::to_string).collect::<Vec<_>>().join("/");
            let label = format!("D[{}:{}]", model.edge_label(edge), lvl);
            node_cell.insert((edge, pos.clone()), cells.add_vertex(label.clone()));
            for &level in levels {
                out.exceptional_vertices.push(ExceptionalVertex {
                    label: label.clone(),
                    carrier: Carrier::Edge { edge, level },
                    position: pos.to_string(),
                    position_value: pos.clone(),
                });
            }
        }
    }

    let mut edges: BTreeMap<(CellId, CellId), CellId> = BTreeMap::new();
    let mut edge_between = |cells: &mut DeltaComplex, a: CellId, b: CellId| -> CellId {
        let key = if a < b { (a, b) } else { (b, a) };
        *edges.entry(key).or_insert_with(|| {
            let label = format!("{}-{}", cells.cell(key.0).label, cells.cell(key.1).label);
            cells.add_simplex(label, &[key.1, key.0])
        })
    };

    for t in 0..tris.len() {
        let roles = assignment.roles(model, t);
        let tlabel = model.triangle_label(t);
        let mut site_cell: BTreeMap<(usize, usize), CellId> = BTreeMap::new();
        let mut site_of: BTreeMap<(usize, usize), GridSite> = BTreeMap::new();
        for i in 0..=n + 1 {
            for j in i..=n + 1 {
                let site = grid_site(model, roles, &params, i, j);
                let cell = match &site {
                    GridSite::Component(v) => vertex_cells[*v],
                    GridSite::Side { edge, pos, .. } => node_cell[&(*edge, pos.clone())],
                    GridSite::Box { lower, upper } => {
                        let label = format!("B[{tlabel}:{lower},{upper}]");
                        let bary = grid_point(&params, i, j);
                        out.exceptional_vertices.push(ExceptionalVertex {
                            label: label.clone(),
                            carrier: Carrier::Box { triangle: t, lower: *lower, upper: *upper },
                            position: format!("({}, {}, {})", bary[0], bary[1], bary[2]),
                            position_value: bary[0].clone(),
                        });
                        cells.add_vertex(label)
                    }
                };
                site_cell.insert((i, j), cell);
                site_of.insert((i, j), site);
            }
        }

        // Regions, boundary walked counter-clockwise in the (X, Y') grid.
        for a in 0..=n {
            for b in a..=n {
                let corners: Vec<(usize, usize)> = if a == b {
                    vec![(a, a), (a + 1, a + 1), (a, a + 1)]
                } else {
                    vec![(a, b), (a + 1, b), (a + 1, b + 1), (a, b + 1)]
                };
                let mut ring: Vec<CellId> = Vec::new();
                for k in 0..corners.len() {
                    let (u, v) = (corners[k], corners[(k + 1) % corners.len()]);
                    ring.push(site_cell[&u]);
                    // Nodes contributed by the neighbouring triangle only.
                    for extra in boundary_extras(model, &site_of[&u], &site_of[&v], &edge_nodes) {
                        ring.push(node_cell[&extra]);
                    }
                }
                let region_label = format!("R[{tlabel}:{a},{b}]");
                if ring.len() == 3 {
                    let e0 = edge_between(&mut cells, ring[1], ring[2]);
                    let e1 = edge_between(&mut cells, ring[0], ring[2]);
                    let e2 = edge_between(&mut cells, ring[0], ring[1]);
                    let (e0, e1, e2) = oriented_faces(&cells, [ring[0], ring[1], ring[2]], [e0, e1, e2]);
                    cells.add_simplex(region_label, &[e0, e1, e2]);
                } else {
                    let center = cells.add_vertex(format!("c{region_label}"));
                    for k in 0..ring.len() {
                        let (u, v) = (ring[k], ring[(k + 1) % ring.len()]);
                        let s0 = edge_between(&mut cells, u, v);
                        let s1 = edge_between(&mut cells, center, v);
                        let s2 = edge_between(&mut cells, center, u);
                        let (e0, e1, e2) = oriented_faces(&cells, [center, u, v], [s0, s1, s2]);
                        cells.add_simplex(format!("{region_label}/{k}"), &[e0, e1, e2]);
                    }
                }
            }
        }
    }
    out.cells = cells;
    out.colored_edges = colored_segments(model, assignment, &params);
    out.arrows = arrows(model, assignment, &params);
    Ok(out)
}

/// Edge nodes strictly between two sites lying on the same base edge, in
/// walking order.
fn boundary_extras(
    model: &SurfaceModel,
    u: &GridSite,
    v: &GridSite,
    edge_nodes: &BTreeMap<usize, BTreeMap<Rational, BTreeSet<usize>>>,
) -> Vec<(usize, Rational)> {
    let locate = |s: &GridSite| -> Vec<(usize, Rational)> {
        match s {
            GridSite::Side { edge, pos, .. } => vec![(*edge, pos.clone())],
            GridSite::Component(c) => model
                .edges()
                .iter()
                .enumerate()
                .filter_map(|(e, ends)| {
                    if ends[0] == *c {
                        Some((e, Rational::zero()))
                    } else if ends[1] == *c {
                        Some((e, Rational::one()))
                    } else {
                        None
                    }
                })
                .collect(),
            GridSite::Box { .. } => Vec::new(),
        }
    };
    for (eu, pu) in locate(u) {
        for (ev, pv) in locate(v) {
            if eu != ev || pu == pv {
                continue;
            }
            let Some(nodes) = edge_nodes.get(&eu) else { return Vec::new() };
            let (lo, hi) = if pu < pv { (&pu, &pv) } else { (&pv, &pu) };
            let mut between: Vec<(usize, Rational)> =
                nodes.keys().filter(|p| *p > lo && *p < hi).map(|p| (eu, p.clone())).collect();
            if pu > pv {
                between.reverse();
            }
            return between;
        }
    }
    Vec::new()
}

/// Faces of the triangle on ordered vertices `vs`, opposite each slot.
fn oriented_faces(cells: &DeltaComplex, vs: [CellId; 3], edges: [CellId; 3]) -> (CellId, CellId, CellId) {
    // Edge cells store their endpoints as (larger id, smaller id); the triangle
    // is added with vertex slots sorted by id so the standard signs close up.
    let mut sorted = vs;
    sorted.sort();
    let find = |a: CellId, b: CellId| {
        *edges
            .iter()
            .find(|&&e| {
                let f = &cells.cell(e).faces;
                (f[0].0 == a && f[1].0 == b) || (f[0].0 == b && f[1].0 == a)
            })
            .expect("edge of triangle")
    };
    (find(sorted[1], sorted[2]), find(sorted[0], sorted[2]), find(sorted[0], sorted[1]))
}

fn segment_color(parameter: usize, n: usize) -> SegmentColor {
    if parameter == 1 {
        SegmentColor::Green
    } else if parameter == n + 1 {
        SegmentColor::Pink
    } else {
        SegmentColor::Intermediate
    }
}

/// How triangle `t` subdivides its side `e`.
pub fn side_view(model: &SurfaceModel, assignment: &BlowupAssignment, params: &[Rational], t: usize, e: usize) -> SideView {
    let [a, b] = model.edges()[e];
    let near = assignment.near_endpoint(model, t, a, b);
    let n = params.len();
    // positions from near endpoint with parameter of the segment preceding each
    let mut nodes: Vec<(Rational, usize)> = (1..=n)
        .map(|k| {
            let s = partial_sum(params, k);
            (if near == a { s } else { Rational::one() - s }, k)
        })
        .collect();
    nodes.sort();
    let mut cuts: Vec<Rational> = vec![Rational::zero()];
    cuts.extend(nodes.iter().map(|(p, _)| p.clone()));
    cuts.push(Rational::one());
    let segments = cuts
        .windows(2)
        .enumerate()
        .map(|(i, w)| {
            // counted from the near endpoint
            let from_near = if near == a { i + 1 } else { n + 1 - i };
            ((&w[1] - &w[0]).to_string(), from_near)
        })
        .collect();
    SideView {
        triangle: model.triangle_label(t),
        near: model.component_names[near].clone(),
        nodes: nodes.into_iter().map(|(p, k)| (p.to_string(), k)).collect(),
        segments,
    }
}

fn colored_segments(model: &SurfaceModel, assignment: &BlowupAssignment, params: &[Rational]) -> Vec<ColoredSegment> {
    let n = params.len();
    let mut out = Vec::new();
    for e in 0..model.edges().len() {
        let Some(&t) = model.triangles_containing_edge(e).first() else { continue };
        let view = side_view(model, assignment, params, t, e);
        let mut from = Rational::zero();
        for (len, parameter) in view.segments {
            let length: Rational = len.parse().expect("rational");
            let to = &from + &length;
            out.push(ColoredSegment {
                edge: model.edge_label(e),
                from: from.to_string(),
                to: to.to_string(),
                length: length.to_string(),
                parameter,
                color: segment_color(parameter, n),
            });
            from = to;
        }
    }
    out
}

/// Arrows drawn by each triangle. At a level-`k` node on a side, the
/// segment towards the near endpoint is measured by `t_k` (green for
/// factor `k`) and the far one by `t_{k+1}` (red); both arrows point into
/// the node.
fn arrows(model: &SurfaceModel, assignment: &BlowupAssignment, params: &[Rational]) -> Vec<Arrow> {
    let n = params.len();
    let mut out = Vec::new();
    for t in 0..model.triangles().len() {
        let tl = model.triangle_label(t);
        let [p, q, r] = assignment.roles(model, t);
        for (a, b) in [(p, q), (p, r), (q, r)] {
            let e = model.edge_index(a, b).expect("edge");
            let [first, _] = model.edges()[e];
            let near = assignment.near_endpoint(model, t, a, b);
            // direction from near towards far, along first -> second
            let outward = if near == first { Direction::Plus } else { Direction::Minus };
            for k in 1..=n {
                let s = partial_sum(params, k);
                let pos = if near == first { s } else { Rational::one() - s };
                let cell = format!("D[{}@{}]", model.edge_label(e), pos);
                out.push(Arrow { cell: cell.clone(), factor: k, color: ArrowColor::Green, direction: outward, source: tl.clone() });
                out.push(Arrow { cell, factor: k, color: ArrowColor::Red, direction: outward.flip(), source: tl.clone() });
            }
        }
        // Walls carry the factor of their level; transverse direction is
        // away from P for X-walls and towards Q for Y-walls, both of which
        // are `Plus` in the wall's own frame.
        for k in 1..=n {
            for wall in [format!("W[{tl}:X{k}]"), format!("W[{tl}:Y{k}]")] {
                out.push(Arrow { cell: wall, factor: k, color: ArrowColor::Red, direction: Direction::Plus, source: tl.clone() });
            }
            for j in k + 1..=n {
                let cell = format!("B[{tl}:{k},{j}]");
                out.push(Arrow { cell: cell.clone(), factor: k, color: ArrowColor::Red, direction: Direction::Plus, source: tl.clone() });
                out.push(Arrow { cell, factor: j, color: ArrowColor::Red, direction: Direction::Plus, source: tl.clone() });
            }
        }
    }
    out.sort();
    out
}

/// Gluing across every base edge, visiting triangles in `order`.
pub fn check_gluing_in_order(e: &ExpandedComplex, order: &[usize]) -> GluingReport {
    let model = &e.base;
    let mut views: BTreeMap<usize, Vec<SideView>> = BTreeMap::new();
    for &t in order {
        let [a, b, c] = model.triangles()[t];
        for (u, v) in [(a, b), (a, c), (b, c)] {
            let edge = model.edge_index(u, v).expect("edge");
            views.entry(edge).or_default().push(side_view(model, &e.assignment, &e.params, t, edge));
        }
    }
    let mut failures = Vec::new();
    for (edge, mut sides) in views {
        sides.sort_by(|x, y| x.triangle.cmp(&y.triangle));
        if sides.len() == 2 && (sides[0].nodes != sides[1].nodes || sides[0].segments != sides[1].segments) {
            let pair: [SideView; 2] = [sides[0].clone(), sides[1].clone()];
            failures.push(GluingFailure { edge: model.edge_label(edge), sides: pair });
        }
    }
    GluingReport { glues: failures.is_empty(), failures }
}

pub fn check_gluing(e: &ExpandedComplex) -> GluingReport {
    let order: Vec<usize> = (0..e.base.triangles().len()).collect();
    check_gluing_in_order(e, &order)
}

/// Nodes from two triangles that land on the same point of a shared edge
/// are one component; they must agree on torus factor and on the red
/// direction of every arrow through them.
pub fn check_torus_compatibility(e: &ExpandedComplex) -> TorusReport {
    let mut by_cell: BTreeMap<&str, Vec<&Arrow>> = BTreeMap::new();
    for a in &e.arrows {
        by_cell.entry(a.cell.as_str()).or_default().push(a);
    }
    let mut conflicts = Vec::new();
    for (cell, arrows) in by_cell {
        let factors: BTreeSet<usize> = arrows.iter().map(|a| a.factor).collect();
        let is_box = cell.starts_with("B[");
        let reason = if !is_box && factors.len() > 1 {
            Some(format!("arrows of different torus factors {factors:?}"))
        } else {
            factors.iter().find_map(|&f| {
                let of: Vec<&&Arrow> = arrows.iter().filter(|a| a.factor == f).collect();
                let same_colour_opposed = [ArrowColor::Red, ArrowColor::Green].iter().any(|&c| {
                    let dirs: BTreeSet<Direction> = of.iter().filter(|a| a.color == c).map(|a| a.direction).collect();
                    dirs.len() > 1
                });
                let reds: BTreeSet<Direction> = of.iter().map(|a| a.red_direction()).collect();
                if same_colour_opposed {
                    Some(format!("same-colour arrows of factor {f} in opposite directions"))
                } else if reds.len() > 1 {
                    Some(format!("different-colour arrows of factor {f} in the same direction"))
                } else {
                    None
                }
            })
        };
        if let Some(reason) = reason {
            conflicts.push(TorusConflict { cell: cell.to_string(), reason, arrows: arrows.into_iter().cloned().collect() });
        }
    }
    TorusReport { compatible: conflicts.is_empty(), conflicts }
}

impl fmt::Display for Carrier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Carrier::Edge { edge, level } => write!(f, "edge#{edge}@{level}"),
            Carrier::Box { triangle, lower, upper } => write!(f, "box#{triangle}@{lower},{upper}"),
        }
    }
}
