//! Delta-complexes: graded cells whose faces are recorded explicitly as
//! ordered, signed lists of cell ids, so two simplices may share their whole
//! vertex set and still be distinct.
//!
//! A complex is populated once through [`DeltaComplex::add_vertex`] and
//! [`DeltaComplex::add_simplex`] and then only queried. Nothing is checked at
//! insertion time; [`DeltaComplex::validate`] reports the first violation.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;
use std::io;

use num_bigint::BigInt;
use num_traits::One;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exact::{rank_over_rationals, smith_normal_form, IntMatrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CellId(pub usize);

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cell {
    pub dim: usize,
    pub label: String,
    pub faces: Vec<(CellId, i8)>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DeltaComplex {
    cells: Vec<Cell>,
}

/// Cell counts per dimension.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FVector(pub Vec<usize>);

impl FVector {
    pub fn euler_characteristic(&self) -> i64 {
        self.0
            .iter()
            .enumerate()
            .map(|(d, &n)| if d % 2 == 0 { n as i64 } else { -(n as i64) })
            .sum()
    }

    pub fn total(&self) -> usize {
        self.0.iter().sum()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum Violation {
    #[error("cell {cell} ({label}): face {face} does not exist")]
    DanglingFace { cell: usize, label: String, face: usize },
    #[error("cell {cell} ({label}): wrong face count, expected {expected}, found {found}")]
    WrongFaceCount { cell: usize, label: String, expected: usize, found: usize },
    #[error("cell {cell} ({label}): face {face} has dimension {found}, expected {expected}")]
    WrongFaceDimension { cell: usize, label: String, face: usize, expected: usize, found: usize },
    #[error("cell {cell} ({label}): orientation sign {sign} is not +1 or -1")]
    BadSign { cell: usize, label: String, sign: i8 },
    #[error("cell {cell} ({label}): boundary of boundary is nonzero")]
    BoundaryNotClosed { cell: usize, label: String },
}

/// Rational Betti numbers plus the torsion coefficients of integral H1.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Homology {
    pub betti: Vec<usize>,
    pub h1_torsion: Vec<u64>,
}

#[derive(Debug, Error)]
pub enum ImportError {
    #[error("malformed json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unknown face id {0:?}")]
    UnknownFace(String),
    #[error("duplicate cell id {0:?}")]
    DuplicateId(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExportFormat {
    Json,
    Dot,
}

#[derive(Serialize, Deserialize)]
struct JsonFace {
    id: String,
    sign: i8,
}

#[derive(Serialize, Deserialize)]
struct JsonCell {
    id: String,
    dim: usize,
    label: String,
    faces: Vec<JsonFace>,
}

#[derive(Serialize, Deserialize)]
struct JsonComplex {
    dimension: usize,
    cells: Vec<JsonCell>,
}

impl DeltaComplex {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_vertex(&mut self, label: impl Into<String>) -> CellId {
        self.add_cell(Cell { dim: 0, label: label.into(), faces: Vec::new() })
    }

    /// Adds a simplex whose `i`-th face (the one opposite vertex slot `i`)
    /// is `faces[i]`, with the alternating sign `(-1)^i`.
    pub fn add_simplex(&mut self, label: impl Into<String>, faces: &[CellId]) -> CellId {
        let signed = faces.iter().enumerate().map(|(i, &f)| (f, if i % 2 == 0 { 1 } else { -1 }));
        self.add_cell(Cell { dim: faces.len().saturating_sub(1), label: label.into(), faces: signed.collect() })
    }

    /// Raw insertion; the dimension is taken from `cell` as given.
    pub fn add_cell(&mut self, cell: Cell) -> CellId {
        self.cells.push(cell);
        CellId(self.cells.len() - 1)
    }

    pub fn cell(&self, id: CellId) -> &Cell {
        &self.cells[id.0]
    }

    pub fn cells(&self) -> impl Iterator<Item = (CellId, &Cell)> {
        self.cells.iter().enumerate().map(|(i, c)| (CellId(i), c))
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn dimension(&self) -> usize {
        self.cells.iter().map(|c| c.dim).max().unwrap_or(0)
    }

    /// Ids of the cells of dimension `dim`, in insertion order.
    pub fn cells_of_dim(&self, dim: usize) -> Vec<CellId> {
        self.cells().filter(|(_, c)| c.dim == dim).map(|(id, _)| id).collect()
    }

    pub fn find_label(&self, label: &str) -> Option<CellId> {
        self.cells().find(|(_, c)| c.label == label).map(|(id, _)| id)
    }

    /// Vertex set of a cell (the 0-cells in its face closure).
    pub fn vertices_of(&self, id: CellId) -> BTreeSet<CellId> {
        let mut out = BTreeSet::new();
        let mut stack = vec![id];
        while let Some(top) = stack.pop() {
            let cell = &self.cells[top.0];
            if cell.dim == 0 {
                out.insert(top);
            } else {
                stack.extend(cell.faces.iter().map(|&(f, _)| f));
            }
        }
        out
    }

    /// Cells of dimension `dim + 1` having `id` among their faces.
    pub fn cofaces(&self, id: CellId) -> Vec<CellId> {
        self.cells()
            .filter(|(_, c)| c.faces.iter().any(|&(f, _)| f == id))
            .map(|(cid, _)| cid)
            .collect()
    }

    pub fn validate(&self) -> Result<(), Violation> {
        for (i, cell) in self.cells.iter().enumerate() {
            let expected = if cell.dim == 0 { 0 } else { cell.dim + 1 };
            if cell.faces.len() != expected {
                return Err(Violation::WrongFaceCount {
                    cell: i,
                    label: cell.label.clone(),
                    expected,
                    found: cell.faces.len(),
                });
            }
            for &(face, sign) in &cell.faces {
                let Some(target) = self.cells.get(face.0) else {
                    return Err(Violation::DanglingFace { cell: i, label: cell.label.clone(), face: face.0 });
                };
                if target.dim + 1 != cell.dim {
                    return Err(Violation::WrongFaceDimension {
                        cell: i,
                        label: cell.label.clone(),
                        face: face.0,
                        expected: cell.dim - 1,
                        found: target.dim,
                    });
                }
                if sign != 1 && sign != -1 {
                    return Err(Violation::BadSign { cell: i, label: cell.label.clone(), sign });
                }
            }
        }
        for (i, cell) in self.cells.iter().enumerate() {
            if cell.dim < 2 {
                continue;
            }
            let mut sum: HashMap<CellId, i64> = HashMap::new();
            for &(face, sign) in &cell.faces {
                for &(ff, s2) in &self.cells[face.0].faces {
                    *sum.entry(ff).or_default() += i64::from(sign) * i64::from(s2);
                }
            }
            if sum.values().any(|&v| v != 0) {
                return Err(Violation::BoundaryNotClosed { cell: i, label: cell.label.clone() });
            }
        }
        Ok(())
    }

    pub fn f_vector(&self) -> FVector {
        if self.cells.is_empty() {
            return FVector(Vec::new());
        }
        let mut counts = vec![0; self.dimension() + 1];
        for cell in &self.cells {
            counts[cell.dim] += 1;
        }
        FVector(counts)
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.f_vector().euler_characteristic()
    }

    /// Matrix of the boundary map from `dim`-chains to `(dim-1)`-chains;
    /// rows are `(dim-1)`-cells and columns `dim`-cells, both in insertion
    /// order.
    pub fn boundary_matrix(&self, dim: usize) -> IntMatrix {
        assert!(dim >= 1);
        let lower = self.cells_of_dim(dim - 1);
        let upper = self.cells_of_dim(dim);
        let row_of: HashMap<CellId, usize> = lower.iter().enumerate().map(|(i, &c)| (c, i)).collect();
        let mut m = IntMatrix::zeros(lower.len(), upper.len());
        for (col, &id) in upper.iter().enumerate() {
            for &(face, sign) in &self.cells[id.0].faces {
                m.add_to(row_of[&face], col, i64::from(sign));
            }
        }
        m
    }

    /// Rational Betti numbers via boundary ranks, plus H1 torsion from the
    /// Smith normal form of the second boundary map.
    pub fn homology(&self) -> Homology {
        let f = self.f_vector().0;
        let top = f.len();
        let ranks: Vec<usize> = (0..=top)
            .map(|d| if d == 0 || d >= top { 0 } else { rank_over_rationals(&self.boundary_matrix(d)) })
            .collect();
        let betti = (0..top).map(|d| f[d] - ranks[d] - ranks[d + 1]).collect();
        let h1_torsion = if top > 2 {
            smith_normal_form(&self.boundary_matrix(2))
                .into_iter()
                .filter(|d| !d.is_one())
                .map(|d: BigInt| u64::try_from(d).expect("torsion coefficient fits in u64"))
                .collect()
        } else {
            Vec::new()
        };
        Homology { betti, h1_torsion }
    }

    pub fn betti_numbers(&self) -> Vec<usize> {
        self.homology().betti
    }

    /// Cells sorted by (dimension, label, insertion order).
    pub fn canonical_order(&self) -> Vec<CellId> {
        let mut ids: Vec<CellId> = (0..self.cells.len()).map(CellId).collect();
        ids.sort_by(|a, b| {
            let (ca, cb) = (&self.cells[a.0], &self.cells[b.0]);
            (ca.dim, &ca.label, a.0).cmp(&(cb.dim, &cb.label, b.0))
        });
        ids
    }

    fn export_ids(&self) -> HashMap<CellId, String> {
        let mut per_dim = vec![0usize; self.dimension() + 1];
        let mut ids = HashMap::new();
        for id in self.canonical_order() {
            let dim = self.cells[id.0].dim;
            ids.insert(id, format!("{dim}.{}", per_dim[dim]));
            per_dim[dim] += 1;
        }
        ids
    }

    pub fn to_json(&self) -> String {
        let ids = self.export_ids();
        let cells = self
            .canonical_order()
            .into_iter()
            .map(|id| {
                let cell = &self.cells[id.0];
                JsonCell {
                    id: ids[&id].clone(),
                    dim: cell.dim,
                    label: cell.label.clone(),
                    faces: cell.faces.iter().map(|&(f, sign)| JsonFace { id: ids[&f].clone(), sign }).collect(),
                }
            })
            .collect();
        let doc = JsonComplex { dimension: self.dimension(), cells };
        serde_json::to_string_pretty(&doc).expect("complex serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, ImportError> {
        let doc: JsonComplex = serde_json::from_str(text)?;
        let mut index = HashMap::new();
        for (i, cell) in doc.cells.iter().enumerate() {
            if index.insert(cell.id.clone(), CellId(i)).is_some() {
                return Err(ImportError::DuplicateId(cell.id.clone()));
            }
        }
        let mut out = DeltaComplex::new();
        for cell in doc.cells {
            let faces = cell
                .faces
                .into_iter()
                .map(|f| index.get(&f.id).map(|&id| (id, f.sign)).ok_or(ImportError::UnknownFace(f.id)))
                .collect::<Result<Vec<_>, _>>()?;
            out.add_cell(Cell { dim: cell.dim, label: cell.label, faces });
        }
        Ok(out)
    }

    /// The 1-skeleton as an undirected DOT graph.
    pub fn to_dot(&self) -> String {
        let ids = self.export_ids();
        let mut out = String::from("graph complex {\n");
        for id in self.canonical_order() {
            let cell = &self.cells[id.0];
            match cell.dim {
                0 => {
                    let _ = writeln!(out, "  \"{}\" [label={:?}];", ids[&id], cell.label);
                }
                1 => {
                    let ends: Vec<&String> = cell.faces.iter().map(|(f, _)| &ids[f]).collect();
                    let _ = writeln!(out, "  \"{}\" -- \"{}\" [label={:?}];", ends[1], ends[0], cell.label);
                }
                _ => {}
            }
        }
        out.push_str("}\n");
        out
    }

    pub fn export(&self, format: ExportFormat, sink: &mut impl io::Write) -> io::Result<()> {
        let text = match format {
            ExportFormat::Json => self.to_json(),
            ExportFormat::Dot => self.to_dot(),
        };
        sink.write_all(text.as_bytes())
    }

    /// Incidence matrix of dimension `dim` against `dim - 1` with both sides
    /// in canonical order; used to compare complexes up to relabeling of ids.
    pub fn canonical_incidence(&self, dim: usize) -> Vec<Vec<i64>> {
        let order = self.canonical_order();
        let lower: Vec<CellId> = order.iter().copied().filter(|c| self.cells[c.0].dim + 1 == dim).collect();
        let upper: Vec<CellId> = order.iter().copied().filter(|c| self.cells[c.0].dim == dim).collect();
        let pos: HashMap<CellId, usize> = lower.iter().enumerate().map(|(i, &c)| (c, i)).collect();
        upper
            .iter()
            .map(|&u| {
                let mut row = vec![0; lower.len()];
                for &(f, s) in &self.cells[u.0].faces {
                    row[pos[&f]] += i64::from(s);
                }
                row
            })
            .collect()
    }
}

/// Boundary of the tetrahedron on vertices `labels`, faces from vertex-slot
/// deletion.
pub fn simplex_boundary(labels: &[&str]) -> DeltaComplex {
    let n = labels.len();
    let mut k = DeltaComplex::new();
    let mut by_set: HashMap<Vec<usize>, CellId> = HashMap::new();
    for (i, l) in labels.iter().enumerate() {
        by_set.insert(vec![i], k.add_vertex(*l));
    }
    for size in 2..n {
        for subset in subsets(n, size) {
            let faces: Vec<CellId> = (0..size)
                .map(|drop| {
                    let mut s = subset.clone();
                    s.remove(drop);
                    by_set[&s]
                })
                .collect();
            let label = subset.iter().map(|&i| labels[i]).collect::<Vec<_>>().join("");
            by_set.insert(subset, k.add_simplex(label, &faces));
        }
    }
    k
}

fn subsets(n: usize, size: usize) -> Vec<Vec<usize>> {
    if size == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for last in size - 1..n {
        for mut s in subsets(last, size - 1) {
            s.push(last);
            out.push(s);
        }
    }
    out.sort();
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tetrahedron() -> DeltaComplex {
        simplex_boundary(&["a", "b", "c", "d"])
    }

    #[test]
    fn tetrahedron_boundary_is_a_sphere() {
        let k = tetrahedron();
        k.validate().unwrap();
        assert_eq!(k.f_vector(), FVector(vec![4, 6, 4]));
        assert_eq!(k.euler_characteristic(), 2);
        assert_eq!(k.betti_numbers(), vec![1, 0, 1]);
    }

    #[test]
    fn point_has_one_component() {
        let mut k = DeltaComplex::new();
        k.add_vertex("p");
        assert_eq!(k.betti_numbers(), vec![1]);
    }

    #[test]
    fn triangle_with_two_faces_is_rejected() {
        let mut k = DeltaComplex::new();
        let a = k.add_vertex("a");
        let b = k.add_vertex("b");
        let e = k.add_simplex("ab", &[b, a]);
        k.add_cell(Cell { dim: 2, label: "bad".into(), faces: vec![(e, 1), (e, -1)] });
        assert!(matches!(k.validate(), Err(Violation::WrongFaceCount { found: 2, .. })));
    }

    #[test]
    fn dangling_and_dimension_errors() {
        let mut k = DeltaComplex::new();
        let a = k.add_vertex("a");
        k.add_cell(Cell { dim: 1, label: "e".into(), faces: vec![(a, 1), (CellId(9), -1)] });
        assert!(matches!(k.validate(), Err(Violation::DanglingFace { face: 9, .. })));

        let mut k = DeltaComplex::new();
        let a = k.add_vertex("a");
        k.add_cell(Cell { dim: 2, label: "t".into(), faces: vec![(a, 1), (a, -1), (a, 1)] });
        assert!(matches!(k.validate(), Err(Violation::WrongFaceDimension { .. })));
    }

    #[test]
    fn nonzero_double_boundary_is_named() {
        let mut k = DeltaComplex::new();
        let a = k.add_vertex("a");
        let b = k.add_vertex("b");
        let c = k.add_vertex("c");
        let ab = k.add_simplex("ab", &[b, a]);
        let bc = k.add_simplex("bc", &[c, b]);
        let ac = k.add_simplex("ac", &[c, a]);
        // correct order would be [bc, ac, ab]
        k.add_simplex("abc", &[bc, ab, ac]);
        let err = k.validate().unwrap_err();
        assert!(matches!(err, Violation::BoundaryNotClosed { ref label, .. } if label == "abc"));
    }

    #[test]
    fn circle_as_two_cell_delta_complex() {
        // two vertices and two edges sharing both endpoints
        let mut k = DeltaComplex::new();
        let a = k.add_vertex("a");
        let b = k.add_vertex("b");
        k.add_simplex("e1", &[b, a]);
        k.add_simplex("e2", &[b, a]);
        k.validate().unwrap();
        assert_eq!(k.betti_numbers(), vec![1, 1]);
    }

    #[test]
    fn exports() {
        let k = tetrahedron();
        let json: serde_json::Value = serde_json::from_str(&k.to_json()).unwrap();
        assert_eq!(json["dimension"], 2);
        assert_eq!(json["cells"].as_array().unwrap().len(), 14);
        let dot = k.to_dot();
        assert_eq!(dot.matches(" -- ").count(), 6);
        assert_eq!(dot.matches("[label=").count(), 10);

        let back = DeltaComplex::from_json(&k.to_json()).unwrap();
        back.validate().unwrap();
        assert_eq!(back.f_vector(), k.f_vector());
        for d in 1..=2 {
            assert_eq!(back.canonical_incidence(d), k.canonical_incidence(d));
        }
    }

    #[test]
    fn import_rejects_unknown_faces() {
        let text = r#"{"dimension":1,"cells":[{"id":"e","dim":1,"label":"e","faces":[{"id":"x","sign":1}]}]}"#;
        assert!(matches!(DeltaComplex::from_json(text), Err(ImportError::UnknownFace(_))));
    }

    #[test]
    fn rp2_has_two_torsion() {
        // Two-triangle delta-complex structure on the projective plane.
        let mut k = DeltaComplex::new();
        let v = k.add_vertex("v");
        let w = k.add_vertex("w");
        let a = k.add_simplex("a", &[w, v]);
        let b = k.add_simplex("b", &[w, v]);
        let c = k.add_simplex("c", &[v, v]);
        // faces listed opposite vertex slots 0,1,2
        k.add_simplex("U", &[a, b, c]);
        k.add_simplex("L", &[b, a, c]);
        k.validate().unwrap();
        let h = k.homology();
        assert_eq!(h.betti, vec![1, 0, 0]);
        assert_eq!(h.h1_torsion, vec![2]);
    }
}
