//! Consistency between the geometric subdivision and the combinatorial
//! stratification used for Hilbert squares.

use std::collections::BTreeSet;

use degex::expansion::{subdivide, Carrier};
use degex::hilb::{FibreVertex, Stratification};
use degex::surface::{cube_model, quartic_model};

fn components_agree(strat: &Stratification, n: usize) {
    let e = subdivide(&strat.model, &strat.assignment, n, None).unwrap();
    let geometric: BTreeSet<FibreVertex> = e
        .exceptional_vertices
        .iter()
        .map(|v| match v.carrier {
            Carrier::Edge { edge, level } => {
                // geometric levels count from the edge's near endpoint too
                FibreVertex::Bundle { edge, level }
            }
            Carrier::Box { triangle, lower, upper } => FibreVertex::Box { triangle, lower, upper },
        })
        .collect();
    let combinatorial: BTreeSet<FibreVertex> =
        strat.fibre_vertices(n).into_iter().filter(|v| !matches!(v, FibreVertex::Component(_))).collect();
    assert_eq!(geometric, combinatorial, "{} n={n}", strat.model.name);
}

#[test]
fn exceptional_components_match() {
    for model in [quartic_model(), cube_model()] {
        let s = Stratification::standard(&model).unwrap();
        for n in 0..=4 {
            components_agree(&s, n);
        }
    }
}

#[test]
fn each_region_vertex_has_a_face_image() {
    // Every depth-n component maps under every facet to a depth-(n-1) component.
    let s = Stratification::standard(&quartic_model()).unwrap();
    for n in 1..=4 {
        let lower: BTreeSet<FibreVertex> = s.fibre_vertices(n - 1).into_iter().collect();
        for v in s.fibre_vertices(n) {
            for h in 1..=n + 1 {
                assert!(lower.contains(&s.face_vertex(v, n, h)), "{v:?} h={h}");
            }
        }
    }
}

#[test]
fn face_maps_satisfy_simplicial_identities() {
    // d_i d_j = d_{j-1} d_i for i < j on single components.
    let s = Stratification::standard(&cube_model()).unwrap();
    for n in 2..=4 {
        for v in s.fibre_vertices(n) {
            for j in 2..=n + 1 {
                for i in 1..j {
                    let a = s.face_vertex(s.face_vertex(v, n, j), n - 1, i);
                    let b = s.face_vertex(s.face_vertex(v, n, i), n - 1, j - 1);
                    assert_eq!(a, b, "{v:?} i={i} j={j}");
                }
            }
        }
    }
}
