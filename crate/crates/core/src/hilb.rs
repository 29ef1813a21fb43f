//! Dual complex of the special fibre of the degeneration of `Hilb^m`, for
//! `m = 1, 2`.
//!
//! A cell of dimension `k` is a stable configuration of `m` points in a
//! fibre of base codimension `c = k + 1`, that is in the expansion of depth
//! `n = k`. A point sits on one of the 2-dimensional components of that
//! fibre:
//!
//! * an original component `Y_v`,
//! * the `P^1`-bundle over a double curve at level `1..=n`, counted from the
//!   edge's near endpoint,
//! * the `P^1 x P^1` over a triple point cut out by the walls of levels
//!   `i < j`.
//!
//! A configuration is stable when every level `1..=n` is touched by some
//! point. The facet `h` of a cell (`1 <= h <= n + 1`) lets `t_h` become
//! nonzero: levels `h - 1` and `h` merge and the higher ones shift down.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::delta::{CellId, DeltaComplex, FVector};
use crate::expansion::{check_gluing, default_quartic_assignment, labeling_assignment, subdivide, BlowupAssignment};
use crate::surface::{find_3_labeling, SurfaceModel};

/// Deepest base codimension for two points.
pub const MAX_CODIM_M2: usize = 5;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum HilbError {
    #[error("only m = 1 and m = 2 are supported, got {0}")]
    UnsupportedM(usize),
    #[error("model {0} has no corner choice that glues")]
    NoAssignment(String),
    #[error("corner choices do not glue along {0:?}")]
    NotGlued(Vec<String>),
    #[error("dimension {dim}: closure found {closure} cells, case families {cases}, direct census {census}; keys only in one: {diff:?}")]
    Inconsistent { dim: usize, closure: usize, cases: usize, census: usize, diff: Vec<String> },
    #[error("complex failed validation: {0}")]
    Invalid(String),
}

/// A 2-dimensional component of a fibre of the expansion.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FibreVertex {
    Component(usize),
    Bundle { edge: usize, level: usize },
    Box { triangle: usize, lower: usize, upper: usize },
}

impl FibreVertex {
    fn levels(&self) -> Vec<usize> {
        match *self {
            FibreVertex::Component(_) => Vec::new(),
            FibreVertex::Bundle { level, .. } => vec![level],
            FibreVertex::Box { lower, upper, .. } => vec![lower, upper],
        }
    }

    pub fn label(&self, model: &SurfaceModel) -> String {
        match *self {
            FibreVertex::Component(v) => model.component_names[v].clone(),
            FibreVertex::Bundle { edge, level } => format!("D({};{level})", model.edge_label(edge)),
            FibreVertex::Box { triangle, lower, upper } => format!("B({};{lower},{upper})", model.triangle_label(triangle)),
        }
    }
}

/// The combinatorial subdivision data shared by all depths.
#[derive(Clone, Debug)]
pub struct Stratification {
    pub model: SurfaceModel,
    pub assignment: BlowupAssignment,
    /// `[near, far]` endpoint per edge.
    ends: Vec<[usize; 2]>,
    /// `[P, Q, R]` per triangle.
    roles: Vec<[usize; 3]>,
}

/// The corner choices used for a model: the fixed quartic choice, otherwise
/// the one read off a 3-labeling.
pub fn standard_assignment(model: &SurfaceModel) -> Result<BlowupAssignment, HilbError> {
    if model.name == "quartic" {
        return Ok(default_quartic_assignment(model));
    }
    let labeling = find_3_labeling(&model.sphere).ok_or_else(|| HilbError::NoAssignment(model.name.clone()))?;
    labeling_assignment(model, &labeling).map_err(|_| HilbError::NoAssignment(model.name.clone()))
}

impl Stratification {
    pub fn new(model: &SurfaceModel, assignment: &BlowupAssignment) -> Result<Self, HilbError> {
        let expanded = subdivide(model, assignment, 1, None).map_err(|e| HilbError::NoAssignment(e.to_string()))?;
        let report = check_gluing(&expanded);
        if !report.glues {
            return Err(HilbError::NotGlued(report.failures.into_iter().map(|f| f.edge).collect()));
        }
        let ends = (0..model.edges().len())
            .map(|e| {
                let [a, b] = model.edges()[e];
                let t = model.triangles_containing_edge(e)[0];
                let near = assignment.near_endpoint(model, t, a, b);
                [near, if near == a { b } else { a }]
            })
            .collect();
        let roles = (0..model.triangles().len()).map(|t| assignment.roles(model, t)).collect();
        Ok(Self { model: model.clone(), assignment: assignment.clone(), ends, roles })
    }

    pub fn standard(model: &SurfaceModel) -> Result<Self, HilbError> {
        Self::new(model, &standard_assignment(model)?)
    }

    /// Vertex of triangle `t`'s depth-`n` grid at `(X, Y') = (S_i, S_j)`.
    fn grid_vertex(&self, t: usize, n: usize, i: usize, j: usize) -> FibreVertex {
        let [p, q, r] = self.roles[t];
        let last = n + 1;
        let bundle = |a: usize, b: usize, level: usize| FibreVertex::Bundle { edge: self.model.edge_index(a, b).expect("side"), level };
        match (i, j) {
            (0, 0) => FibreVertex::Component(q),
            (i, j) if i == last && j == last => FibreVertex::Component(p),
            (0, j) if j == last => FibreVertex::Component(r),
            (i, j) if i == j => bundle(p, q, i),
            (0, j) => bundle(q, r, j),
            (i, j) if j == last => bundle(p, r, i),
            (i, j) => FibreVertex::Box { triangle: t, lower: i, upper: j },
        }
    }

    /// All components of the depth-`n` fibre.
    pub fn fibre_vertices(&self, n: usize) -> Vec<FibreVertex> {
        let mut out: Vec<FibreVertex> = (0..self.model.vertex_count()).map(FibreVertex::Component).collect();
        for edge in 0..self.model.edges().len() {
            out.extend((1..=n).map(|level| FibreVertex::Bundle { edge, level }));
        }
        for triangle in 0..self.model.triangles().len() {
            for lower in 1..=n {
                out.extend((lower + 1..=n).map(|upper| FibreVertex::Box { triangle, lower, upper }));
            }
        }
        out
    }

    /// Image of a depth-`n` component under facet `h`.
    pub fn face_vertex(&self, v: FibreVertex, n: usize, h: usize) -> FibreVertex {
        debug_assert!((1..=n + 1).contains(&h));
        let merge = |x: usize| if x < h { x } else { x - 1 };
        match v {
            FibreVertex::Component(_) => v,
            FibreVertex::Bundle { edge, level } => match merge(level) {
                0 => FibreVertex::Component(self.ends[edge][0]),
                l if l == n => FibreVertex::Component(self.ends[edge][1]),
                l => FibreVertex::Bundle { edge, level: l },
            },
            FibreVertex::Box { triangle, lower, upper } => self.grid_vertex(triangle, n - 1, merge(lower), merge(upper)),
        }
    }

    /// Applies a vertex permutation that maps the model and its corner
    /// choices to themselves.
    pub fn apply_symmetry(&self, perm: &[usize], v: FibreVertex) -> FibreVertex {
        match v {
            FibreVertex::Component(c) => FibreVertex::Component(perm[c]),
            FibreVertex::Bundle { edge, level } => {
                let [a, b] = self.model.edges()[edge];
                FibreVertex::Bundle { edge: self.model.edge_index(perm[a], perm[b]).expect("symmetry maps edges"), level }
            }
            FibreVertex::Box { triangle, lower, upper } => {
                let mut t = self.model.triangles()[triangle].map(|x| perm[x]);
                t.sort_unstable();
                let triangle = self.model.triangles().iter().position(|s| *s == t).expect("symmetry maps triangles");
                FibreVertex::Box { triangle, lower, upper }
            }
        }
    }

    /// Whether `perm` preserves the model and the corner choices.
    pub fn is_symmetry(&self, perm: &[usize]) -> bool {
        let tris = self.model.triangles();
        tris.iter().enumerate().all(|(t, tri)| {
            let mut image = tri.map(|x| perm[x]);
            image.sort_unstable();
            match tris.iter().position(|s| *s == image) {
                Some(u) => self.roles[u] == self.roles[t].map(|x| perm[x]),
                None => false,
            }
        })
    }
}

/// A stable configuration of points in a fibre of given base codimension.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ConfigType {
    pub codim: usize,
    /// Sorted, so exchanging points gives the same value.
    pub points: Vec<FibreVertex>,
}

impl ConfigType {
    pub fn new(codim: usize, mut points: Vec<FibreVertex>) -> Self {
        points.sort();
        Self { codim, points }
    }

    pub fn dim(&self) -> usize {
        self.codim - 1
    }

    pub fn depth(&self) -> usize {
        self.codim - 1
    }

    /// Every level `1..=depth` is touched by a point.
    pub fn is_stable(&self) -> bool {
        let touched: BTreeSet<usize> = self.points.iter().flat_map(FibreVertex::levels).collect();
        touched.len() == self.depth() && touched.iter().all(|&l| (1..=self.depth()).contains(&l))
    }

    pub fn canonical_key(&self, model: &SurfaceModel) -> String {
        let pts: Vec<String> = self.points.iter().map(|p| p.label(model)).collect();
        format!("c{}:{}", self.codim, pts.join("+"))
    }

    pub fn facet(&self, strat: &Stratification, h: usize) -> ConfigType {
        let n = self.depth();
        ConfigType::new(self.codim - 1, self.points.iter().map(|&p| strat.face_vertex(p, n, h)).collect())
    }

    pub fn facets(&self, strat: &Stratification) -> Vec<ConfigType> {
        (1..=self.depth() + 1).map(|h| self.facet(strat, h)).collect()
    }

    pub fn permuted(&self, strat: &Stratification, perm: &[usize]) -> ConfigType {
        ConfigType::new(self.codim, self.points.iter().map(|&p| strat.apply_symmetry(perm, p)).collect())
    }
}

fn multisets(items: &[FibreVertex], m: usize) -> Vec<Vec<FibreVertex>> {
    match m {
        1 => items.iter().map(|&a| vec![a]).collect(),
        _ => {
            let mut out = Vec::new();
            for i in 0..items.len() {
                for j in i..items.len() {
                    out.push(vec![items[i], items[j]]);
                }
            }
            out
        }
    }
}

/// Codimension-one configurations: points in component interiors.
pub fn initial_configs(strat: &Stratification, m: usize) -> Vec<ConfigType> {
    multisets(&strat.fibre_vertices(0), m).into_iter().map(|p| ConfigType::new(1, p)).collect()
}

/// All one-step specializations: stable configurations one codimension
/// deeper that have `cfg` as a facet.
pub fn specialize(strat: &Stratification, cfg: &ConfigType) -> Vec<ConfigType> {
    let n = cfg.codim;
    let candidates = strat.fibre_vertices(n);
    let mut out = BTreeSet::new();
    for h in 1..=n + 1 {
        let lifts: Vec<Vec<FibreVertex>> = cfg
            .points
            .iter()
            .map(|&p| candidates.iter().copied().filter(|&v| strat.face_vertex(v, n, h) == p).collect())
            .collect();
        let choices: Vec<Vec<FibreVertex>> = match lifts.as_slice() {
            [a] => a.iter().map(|&x| vec![x]).collect(),
            [a, b] => a.iter().flat_map(|&x| b.iter().map(move |&y| vec![x, y])).collect(),
            _ => Vec::new(),
        };
        for pts in choices {
            let c = ConfigType::new(n + 1, pts);
            if c.is_stable() && c.facet(strat, h) == *cfg {
                out.insert(c);
            }
        }
    }
    out.into_iter().collect()
}

/// Direct census: every stable configuration of codimension `codim`.
pub fn census(strat: &Stratification, codim: usize, m: usize) -> Vec<ConfigType> {
    let mut out: Vec<ConfigType> = multisets(&strat.fibre_vertices(codim - 1), m)
        .into_iter()
        .map(|p| ConfigType::new(codim, p))
        .filter(ConfigType::is_stable)
        .collect();
    out.sort();
    out
}

/// Closure of the codimension-one configurations under [`specialize`],
/// grouped by dimension.
pub fn closure(strat: &Stratification, m: usize) -> Vec<Vec<ConfigType>> {
    let mut levels = vec![initial_configs(strat, m)];
    loop {
        let next: BTreeSet<ConfigType> =
            levels.last().expect("nonempty").par_iter().flat_map_iter(|c| specialize(strat, c)).collect();
        if next.is_empty() {
            break;
        }
        levels.push(next.into_iter().collect());
    }
    for l in &mut levels {
        l.sort();
    }
    levels
}

/// Cell record with its ordered facets.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SimplexRecord {
    pub key: String,
    pub facets: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct PiComplex {
    pub m: usize,
    pub strat: Stratification,
    pub configs: Vec<Vec<ConfigType>>,
    pub complex: DeltaComplex,
}

impl PiComplex {
    pub fn f_vector(&self) -> FVector {
        FVector(self.configs.iter().map(Vec::len).collect())
    }

    pub fn records(&self) -> Vec<SimplexRecord> {
        let model = &self.strat.model;
        self.configs
            .iter()
            .flatten()
            .map(|c| SimplexRecord {
                key: c.canonical_key(model),
                facets: if c.codim == 1 { Vec::new() } else { c.facets(&self.strat).iter().map(|f| f.canonical_key(model)).collect() },
            })
            .collect()
    }
}

fn assemble(strat: &Stratification, configs: &[Vec<ConfigType>]) -> DeltaComplex {
    let mut complex = DeltaComplex::new();
    let mut ids: BTreeMap<&ConfigType, CellId> = BTreeMap::new();
    for level in configs {
        for c in level {
            let label = c.canonical_key(&strat.model);
            let id = if c.codim == 1 {
                complex.add_vertex(label)
            } else {
                let faces: Vec<CellId> = c.facets(strat).iter().map(|f| ids[f]).collect();
                complex.add_simplex(label, &faces)
            };
            ids.insert(c, id);
        }
    }
    complex
}

/// Builds the complex by specialization closure and cross-checks it against
/// the direct census and, for `m = 2`, the case families.
pub fn build_pi_with(strat: &Stratification, m: usize) -> Result<PiComplex, HilbError> {
    if m != 1 && m != 2 {
        return Err(HilbError::UnsupportedM(m));
    }
    let configs = closure(strat, m);
    let model = &strat.model;
    for (dim, level) in configs.iter().enumerate() {
        let direct = census(strat, dim + 1, m);
        let cases = if m == 2 { enumerate_cases_with(strat, dim).total() } else { direct.len() };
        if direct != *level || cases != level.len() {
            let a: BTreeSet<String> = level.iter().map(|c| c.canonical_key(model)).collect();
            let b: BTreeSet<String> = direct.iter().map(|c| c.canonical_key(model)).collect();
            let diff = a.symmetric_difference(&b).cloned().collect();
            return Err(HilbError::Inconsistent { dim, closure: level.len(), cases, census: direct.len(), diff });
        }
    }
    if !census(strat, configs.len() + 1, m).is_empty() {
        return Err(HilbError::Inconsistent { dim: configs.len(), closure: 0, cases: 0, census: census(strat, configs.len() + 1, m).len(), diff: Vec::new() });
    }
    let complex = assemble(strat, &configs);
    complex.validate().map_err(|v| HilbError::Invalid(v.to_string()))?;
    Ok(PiComplex { m, strat: strat.clone(), configs, complex })
}

pub fn build_pi(model: &SurfaceModel, m: usize) -> Result<PiComplex, HilbError> {
    build_pi_with(&Stratification::standard(model)?, m)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CaseBreakdown {
    pub dim: usize,
    pub cases: Vec<(String, usize)>,
}

impl CaseBreakdown {
    pub fn total(&self) -> usize {
        self.cases.iter().map(|(_, n)| n).sum()
    }

    pub fn counts(&self) -> Vec<usize> {
        self.cases.iter().map(|(_, n)| *n).collect()
    }
}

fn choose2(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

/// Case families of two-point limits, counted from the strata of the model.
pub fn enumerate_cases_with(strat: &Stratification, k: usize) -> CaseBreakdown {
    let model = &strat.model;
    let v = model.vertex_count();
    let e = model.edges().len();
    let f = model.triangles().len();
    let tris = model.triangles();
    let share_triangle = |x: usize, y: usize| {
        let (ex, ey) = (model.edges()[x], model.edges()[y]);
        tris.iter().any(|t| ex.iter().chain(ey.iter()).all(|p| t.contains(p)))
    };
    let mut edge_pairs_in_triangle = 0;
    let mut remote_edge_pairs = 0;
    for x in 0..e {
        for y in x + 1..e {
            if share_triangle(x, y) {
                edge_pairs_in_triangle += 1;
            } else {
                remote_edge_pairs += 1;
            }
        }
    }
    let mut edge_opposite = 0;
    let mut edge_remote_vertex = 0;
    for (x, ends) in model.edges().iter().enumerate() {
        for c in 0..v {
            if ends.contains(&c) {
                continue;
            }
            if model.triangles_containing_edge(x).iter().any(|&t| tris[t].contains(&c)) {
                edge_opposite += 1;
            } else {
                edge_remote_vertex += 1;
            }
        }
    }
    let s = |name: &str, n: usize| (name.to_string(), n);
    let cases = match k {
        0 => vec![s("pairs of component interiors", choose2(v) + v)],
        1 => {
            let mut c = vec![
                s("limits at a corner: two curves of a triple point, or a curve and the opposite component", edge_pairs_in_triangle + edge_opposite),
                s("both points on the same double curve", e),
                s("a double curve and a component containing it", 2 * e),
                s("two double curves with no common triple point", remote_edge_pairs),
            ];
            if edge_remote_vertex > 0 {
                c.push(s("a double curve and a component meeting it in no triple point", edge_remote_vertex));
            }
            c
        }
        2 => vec![
            s("both points on triple-point boxes", choose2(f) + f),
            s("a box and a component interior", f * v),
            s("a box and a bundle", f * 2 * e),
            s("bundles over different double curves at different speeds", e * (e - 1)),
            s("bundles over one double curve at different speeds", e),
        ],
        3 => vec![
            s("two boxes with complementary levels", choose2(3 * f) - 3 * choose2(f)),
            s("a box and a bundle at the remaining level", e * f * 3),
        ],
        4 => vec![
            s("two boxes in one triple point", 3 * f),
            s("two boxes in different triple points", choose2(f) * 3 * 2),
        ],
        _ => Vec::new(),
    };
    CaseBreakdown { dim: k, cases }
}

pub fn enumerate_cases(model: &SurfaceModel, k: usize) -> Result<CaseBreakdown, HilbError> {
    Ok(enumerate_cases_with(&Stratification::standard(model)?, k))
}

/// Vanishing index of the maximal limit of a family with `a1` simple
/// points, `a2` points on double curves and `a3` at triple points.
pub fn max_limit_index(_a1: usize, a2: usize, a3: usize) -> usize {
    2 * a2 + a3
}

pub const BAGCHI_DATTA_F_VECTOR: [usize; 5] = [10, 45, 110, 120, 48];
pub const CP2_EULER: i64 = 3;
pub const CP2_BETTI: [usize; 5] = [1, 0, 1, 0, 1];

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ReferenceReport {
    pub f_vector: Vec<usize>,
    pub euler: i64,
    pub reference: String,
    pub reference_f_vector: Option<Vec<usize>>,
    pub matches_f_vector: Option<bool>,
    pub reference_euler: i64,
    pub matches_euler: bool,
    pub betti: Option<Vec<usize>>,
    pub matches_betti: Option<bool>,
}

impl ReferenceReport {
    /// Euler characteristic and, when given, Betti numbers agree. The
    /// f-vector comparison is informational.
    pub fn consistent(&self) -> bool {
        self.matches_euler && self.matches_betti != Some(false)
    }
}

/// Compares a 4-dimensional f-vector with the 9-vertex triangulation of
/// `CP^2`, a 2-dimensional one with the 2-sphere.
pub fn compare_with_reference(fv: &FVector, betti: Option<&[usize]>) -> ReferenceReport {
    let euler = fv.euler_characteristic();
    let (reference, ref_fv, ref_euler, ref_betti): (&str, Option<Vec<usize>>, i64, Vec<usize>) = if fv.0.len() <= 3 {
        ("2-sphere", None, 2, vec![1, 0, 1])
    } else {
        ("CP2", Some(BAGCHI_DATTA_F_VECTOR.to_vec()), CP2_EULER, CP2_BETTI.to_vec())
    };
    ReferenceReport {
        f_vector: fv.0.clone(),
        euler,
        reference: reference.into(),
        matches_f_vector: ref_fv.as_ref().map(|r| *r == fv.0),
        reference_f_vector: ref_fv,
        reference_euler: ref_euler,
        matches_euler: euler == ref_euler,
        betti: betti.map(<[usize]>::to_vec),
        matches_betti: betti.map(|b| b == ref_betti.as_slice()),
    }
}

impl fmt::Display for ConfigType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "c{}:{:?}", self.codim, self.points)
    }
}
