//! Dual complexes of the special fibres of the two K3 degenerations, with
//! their singularity bookkeeping, and the search for a 3-labeling (one vertex
//! of each label on every triangle).

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use thiserror::Error;

use crate::delta::{CellId, DeltaComplex, FVector};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DegenerationMetadata {
    pub resolved_singularities: usize,
    /// Keyed by double curve label, e.g. `"Y1Y2"`.
    pub singularities_per_double_curve: BTreeMap<String, usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum SurfaceError {
    #[error("edge {0} does not have exactly two coface triangles")]
    NotClosed(String),
    #[error("euler characteristic is {0}, not 2")]
    NotSphere(i64),
    #[error("singularity counts sum to {sum}, metadata claims {claimed}")]
    MetadataMismatch { sum: usize, claimed: usize },
    #[error("invalid complex: {0}")]
    Invalid(#[from] crate::delta::Violation),
}

/// A triangulated surface whose vertices are the components `Y_i` of a
/// special fibre.
#[derive(Clone, Debug)]
pub struct SurfaceModel {
    pub name: String,
    pub sphere: DeltaComplex,
    pub component_names: Vec<String>,
    vertices: Vec<CellId>,
    edges: Vec<[usize; 2]>,
    triangles: Vec<[usize; 3]>,
    pub metadata: Option<DegenerationMetadata>,
}

impl SurfaceModel {
    /// Builds the complex spanned by `triangles` (vertex indices into
    /// `names`). Vertices of each triangle are stored sorted.
    pub fn from_triangles(name: &str, names: &[String], triangles: &[[usize; 3]]) -> Self {
        let mut sphere = DeltaComplex::new();
        let vertices: Vec<CellId> = names.iter().map(|n| sphere.add_vertex(n.clone())).collect();
        let mut tris: Vec<[usize; 3]> = triangles
            .iter()
            .map(|t| {
                let mut t = *t;
                t.sort_unstable();
                t
            })
            .collect();
        tris.sort_unstable();
        tris.dedup();
        let edge_set: BTreeSet<[usize; 2]> =
            tris.iter().flat_map(|t| [[t[0], t[1]], [t[0], t[2]], [t[1], t[2]]]).collect();
        let edges: Vec<[usize; 2]> = edge_set.into_iter().collect();
        let mut edge_cells = BTreeMap::new();
        for e in &edges {
            let label = format!("{}{}", names[e[0]], names[e[1]]);
            edge_cells.insert(*e, sphere.add_simplex(label, &[vertices[e[1]], vertices[e[0]]]));
        }
        for t in &tris {
            let label = format!("{}{}{}", names[t[0]], names[t[1]], names[t[2]]);
            let faces = [edge_cells[&[t[1], t[2]]], edge_cells[&[t[0], t[2]]], edge_cells[&[t[0], t[1]]]];
            sphere.add_simplex(label, &faces);
        }
        Self {
            name: name.to_string(),
            sphere,
            component_names: names.to_vec(),
            vertices,
            edges,
            triangles: tris,
            metadata: None,
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.component_names.len()
    }

    /// Edges as sorted vertex-index pairs.
    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    /// Triangles as sorted vertex-index triples.
    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn vertex_cell(&self, v: usize) -> CellId {
        self.vertices[v]
    }

    pub fn vertex_index(&self, name: &str) -> Option<usize> {
        self.component_names.iter().position(|n| n == name)
    }

    pub fn edge_index(&self, a: usize, b: usize) -> Option<usize> {
        let key = if a < b { [a, b] } else { [b, a] };
        self.edges.binary_search(&key).ok()
    }

    pub fn edge_label(&self, e: usize) -> String {
        let [a, b] = self.edges[e];
        format!("{}{}", self.component_names[a], self.component_names[b])
    }

    pub fn triangle_label(&self, t: usize) -> String {
        let [a, b, c] = self.triangles[t];
        let n = &self.component_names;
        format!("{}{}{}", n[a], n[b], n[c])
    }

    /// Name used by the paper-style "complement of Y_i" description; only
    /// meaningful when each triangle misses exactly one vertex.
    pub fn triangle_opposite(&self, t: usize) -> Option<usize> {
        if self.vertex_count() != 4 {
            return None;
        }
        (0..4).find(|v| !self.triangles[t].contains(v))
    }

    pub fn triangles_containing_edge(&self, e: usize) -> Vec<usize> {
        let [a, b] = self.edges[e];
        (0..self.triangles.len()).filter(|&t| self.triangles[t].contains(&a) && self.triangles[t].contains(&b)).collect()
    }

    pub fn f_vector(&self) -> FVector {
        self.sphere.f_vector()
    }

    /// Closed-surface and Euler characteristic checks plus metadata consistency.
    pub fn validate(&self) -> Result<(), SurfaceError> {
        self.sphere.validate()?;
        for e in 0..self.edges.len() {
            if self.triangles_containing_edge(e).len() != 2 {
                return Err(SurfaceError::NotClosed(self.edge_label(e)));
            }
        }
        let chi = self.sphere.euler_characteristic();
        if chi != 2 {
            return Err(SurfaceError::NotSphere(chi));
        }
        if let Some(meta) = &self.metadata {
            let sum: usize = meta.singularities_per_double_curve.values().sum();
            if sum != meta.resolved_singularities {
                return Err(SurfaceError::MetadataMismatch { sum, claimed: meta.resolved_singularities });
            }
        }
        Ok(())
    }

    /// Applies a permutation of component indices (`perm[old] = new`),
    /// keeping names attached to their new positions.
    pub fn relabeled(&self, perm: &[usize]) -> SurfaceModel {
        let mut names = vec![String::new(); perm.len()];
        for (old, &new) in perm.iter().enumerate() {
            names[new] = self.component_names[old].clone();
        }
        let tris: Vec<[usize; 3]> =
            self.triangles.iter().map(|t| [perm[t[0]], perm[t[1]], perm[t[2]]]).collect();
        let mut out = SurfaceModel::from_triangles(&self.name, &names, &tris);
        out.metadata = self.metadata.clone();
        out
    }
}

fn y_names(count: usize) -> Vec<String> {
    (1..=count).map(|i| format!("Y{i}")).collect()
}

/// The union of the four coordinate planes of P^3: dual complex is the
/// boundary of a tetrahedron.
pub fn quartic_model() -> SurfaceModel {
    let names = y_names(4);
    let triangles: Vec<[usize; 3]> =
        (0..4).map(|skip| {
            let v: Vec<usize> = (0..4).filter(|&i| i != skip).collect();
            [v[0], v[1], v[2]]
        }).collect();
    let mut model = SurfaceModel::from_triangles("quartic", &names, &triangles);
    let per_curve = (0..model.edges.len()).map(|e| (model.edge_label(e), 4)).collect();
    model.metadata = Some(DegenerationMetadata { resolved_singularities: 24, singularities_per_double_curve: per_curve });
    model
}

/// One coordinate divisor `{w_index = 0}` of P^1 x P^1 x P^1, with `axis`
/// naming the P^1 factor.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct CoordinateDivisor {
    axis: usize,
    index: usize,
}

impl CoordinateDivisor {
    fn meets(self, other: Self) -> bool {
        self.axis != other.axis
    }
}

/// The six coordinate divisors of P^1 x P^1 x P^1. The octahedral structure
/// is derived from which divisors intersect.
pub fn cube_model() -> SurfaceModel {
    let divisors: Vec<CoordinateDivisor> =
        (0..3).flat_map(|axis| (0..2).map(move |index| CoordinateDivisor { axis, index })).collect();
    let names = y_names(divisors.len());
    let mut triangles = Vec::new();
    for a in 0..divisors.len() {
        for b in a + 1..divisors.len() {
            for c in b + 1..divisors.len() {
                let (da, db, dc) = (divisors[a], divisors[b], divisors[c]);
                if da.meets(db) && da.meets(dc) && db.meets(dc) {
                    triangles.push([a, b, c]);
                }
            }
        }
    }
    let mut model = SurfaceModel::from_triangles("cube", &names, &triangles);
    let per_curve = (0..model.edges.len()).map(|e| (model.edge_label(e), 2)).collect();
    model.metadata = Some(DegenerationMetadata { resolved_singularities: 24, singularities_per_double_curve: per_curve });
    model
}

pub fn model_by_name(name: &str) -> Option<SurfaceModel> {
    match name {
        "quartic" => Some(quartic_model()),
        "cube" => Some(cube_model()),
        _ => None,
    }
}

/// Labels in {1,2,3} per vertex index.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Labeling3 {
    pub assignment: Vec<u8>,
}

impl Labeling3 {
    pub fn is_valid_for(&self, triangles: &[[usize; 3]]) -> bool {
        triangles.iter().all(|t| {
            let mut seen = [false; 3];
            for &v in t {
                match self.assignment.get(v) {
                    Some(&l @ 1..=3) => seen[usize::from(l - 1)] = true,
                    _ => return false,
                }
            }
            seen.iter().all(|&s| s)
        })
    }
}

/// Vertex-index triples of the 2-cells of an arbitrary complex.
pub fn triangles_of(complex: &DeltaComplex) -> (Vec<CellId>, Vec<[usize; 3]>) {
    let vertices = complex.cells_of_dim(0);
    let pos: BTreeMap<CellId, usize> = vertices.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let tris = complex
        .cells_of_dim(2)
        .into_iter()
        .filter_map(|t| {
            let vs: Vec<usize> = complex.vertices_of(t).iter().map(|v| pos[v]).collect();
            <[usize; 3]>::try_from(vs).ok()
        })
        .collect();
    (vertices, tris)
}

/// Lexicographically least 3-labeling of the vertices of `complex`, if any.
///
/// Depth-first in vertex order; a labeling is only extended with labels up
/// to one more than the largest already used, which loses nothing since the
/// least labeling uses labels in order of first appearance.
pub fn find_3_labeling(complex: &DeltaComplex) -> Option<Labeling3> {
    let (vertices, tris) = triangles_of(complex);
    let n = vertices.len();
    let mut incident: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, t) in tris.iter().enumerate() {
        for &v in t {
            incident[v].push(i);
        }
    }
    let mut labels = vec![0u8; n];
    fn consistent(t: &[usize; 3], labels: &[u8]) -> bool {
        let l: Vec<u8> = t.iter().map(|&v| labels[v]).filter(|&l| l != 0).collect();
        (0..l.len()).all(|i| (i + 1..l.len()).all(|j| l[i] != l[j]))
    }
    fn search(v: usize, max_used: u8, labels: &mut [u8], tris: &[[usize; 3]], incident: &[Vec<usize>]) -> bool {
        if v == labels.len() {
            return true;
        }
        for l in 1..=(max_used + 1).min(3) {
            labels[v] = l;
            if incident[v].iter().all(|&t| consistent(&tris[t], labels))
                && search(v + 1, max_used.max(l), labels, tris, incident)
            {
                return true;
            }
        }
        labels[v] = 0;
        false
    }
    search(0, 0, &mut labels, &tris, &incident).then_some(Labeling3 { assignment: labels })
}

/// Number of valid labelings among all `3^V` assignments.
pub fn count_3_labelings_exhaustive(complex: &DeltaComplex) -> (usize, usize) {
    let (vertices, tris) = triangles_of(complex);
    let n = vertices.len() as u32;
    let total = 3usize.pow(n);
    let valid = (0..total)
        .filter(|code| {
            let mut c = *code;
            let assignment = (0..n)
                .map(|_| {
                    let l = (c % 3) as u8 + 1;
                    c /= 3;
                    l
                })
                .collect();
            Labeling3 { assignment }.is_valid_for(&tris)
        })
        .count();
    (total, valid)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quartic_is_tetrahedron_with_24_singularities() {
        let m = quartic_model();
        m.validate().unwrap();
        assert_eq!(m.f_vector(), FVector(vec![4, 6, 4]));
        let meta = m.metadata.as_ref().unwrap();
        assert_eq!(meta.resolved_singularities, 24);
        assert_eq!(meta.singularities_per_double_curve.len(), 6);
        assert!(meta.singularities_per_double_curve.values().all(|&c| c == 4));
    }

    #[test]
    fn cube_is_octahedron_from_divisor_adjacency() {
        let m = cube_model();
        m.validate().unwrap();
        assert_eq!(m.f_vector(), FVector(vec![6, 12, 8]));
        // opposite pairs (same axis) never span an edge
        for pair in [[0, 1], [2, 3], [4, 5]] {
            assert!(m.edge_index(pair[0], pair[1]).is_none());
        }
        let meta = m.metadata.as_ref().unwrap();
        assert_eq!(meta.resolved_singularities, 24);
        assert!(meta.singularities_per_double_curve.values().all(|&c| c == 2));
        assert_eq!(meta.singularities_per_double_curve.len(), 12);
    }

    #[test]
    fn metadata_mismatch_is_reported() {
        let mut m = quartic_model();
        m.metadata.as_mut().unwrap().resolved_singularities = 23;
        assert!(matches!(m.validate(), Err(SurfaceError::MetadataMismatch { sum: 24, claimed: 23 })));
    }

    #[test]
    fn labeling_of_cube_pairs_opposite_vertices() {
        let m = cube_model();
        let l = find_3_labeling(&m.sphere).unwrap();
        assert_eq!(l.assignment, vec![1, 1, 2, 2, 3, 3]);
        assert!(l.is_valid_for(m.triangles()));
    }

    #[test]
    fn quartic_has_no_labeling() {
        let m = quartic_model();
        assert!(find_3_labeling(&m.sphere).is_none());
        assert_eq!(count_3_labelings_exhaustive(&m.sphere), (81, 0));
    }

    #[test]
    fn single_triangle_disk_is_labeled() {
        let names: Vec<String> = ["a", "b", "c"].iter().map(|s| s.to_string()).collect();
        let disk = SurfaceModel::from_triangles("disk", &names, &[[0, 1, 2]]);
        assert!(disk.validate().is_err());
        let l = find_3_labeling(&disk.sphere).unwrap();
        assert_eq!(l.assignment, vec![1, 2, 3]);
    }

    #[test]
    fn cube_has_six_labelings() {
        // 3! permutations of the three opposite pairs
        assert_eq!(count_3_labelings_exhaustive(&cube_model().sphere), (729, 6));
    }

    #[test]
    fn relabeled_cube_still_labels() {
        let m = cube_model().relabeled(&[3, 5, 0, 2, 1, 4]);
        m.validate().unwrap();
        let l = find_3_labeling(&m.sphere).unwrap();
        assert!(l.is_valid_for(m.triangles()));
    }
}
