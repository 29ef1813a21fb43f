//! Certificates for a strictly convex piecewise linear function on the
//! depth-one subdivision of the tetrahedron slice.
//!
//! Each face is realized as `{0 <= q <= c <= 1}` with frame vertices
//! `[origin, c-end, q-end]` at `(0,0)`, `(1,0)`, `(1,1)`. The face's corner
//! roles `P, Q, R` (from the corner choice of the blow-up) split it at
//! `X = τ` and `Y = 1 - τ`, with `X, Y` the barycentric weights of `P, Q`:
//! a corner triangle at `P`, a corner triangle at `Q` and a parallelogram
//! at `R`.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exact::{int, parse_rational, FaceCoord, Rational};

/// `a_c c + a_q q + a_tau τ + b`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AffinePiece {
    pub a_c: Rational,
    pub a_q: Rational,
    pub a_tau: Rational,
    pub b: Rational,
}

impl AffinePiece {
    pub fn new(a_c: i64, a_q: i64, a_tau: i64, b: i64) -> Self {
        Self { a_c: int(a_c), a_q: int(a_q), a_tau: int(a_tau), b: int(b) }
    }

    pub fn eval(&self, p: &FaceCoord, tau: &Rational) -> Rational {
        &self.a_c * &p.c + &self.a_q * &p.q + &self.a_tau * tau + &self.b
    }

    /// `(a_c, a_q, constant)` at fixed τ.
    fn at(&self, tau: &Rational) -> (Rational, Rational, Rational) {
        (self.a_c.clone(), self.a_q.clone(), &self.a_tau * tau + &self.b)
    }

    pub fn plus(&self, other: &AffinePiece) -> AffinePiece {
        AffinePiece {
            a_c: &self.a_c + &other.a_c,
            a_q: &self.a_q + &other.a_q,
            a_tau: &self.a_tau + &other.a_tau,
            b: &self.b + &other.b,
        }
    }
}

impl fmt::Display for AffinePiece {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut terms = Vec::new();
        for (coef, var) in [(&self.a_c, "c"), (&self.a_q, "q"), (&self.a_tau, "τ")] {
            if !coef.is_zero() {
                terms.push(if coef.is_one() { var.to_string() } else if *coef == -Rational::one() { format!("-{var}") } else { format!("{coef}{var}") });
            }
        }
        if !self.b.is_zero() || terms.is_empty() {
            terms.push(self.b.to_string());
        }
        write!(f, "{}", terms.join(" + ").replace("+ -", "- "))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegionKind {
    /// Corner triangle at `P`: `X >= τ`.
    PCorner,
    /// Corner triangle at `Q`: `Y >= 1 - τ`.
    QCorner,
    /// Parallelogram at `R`.
    Middle,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FaceCertificate {
    /// Face name as listed, e.g. `["Y1", "Y2", "Y3"]`.
    pub face: [String; 3],
    /// Vertices at `(0,0)`, `(1,0)`, `(1,1)`.
    pub frame: [String; 3],
    /// `[P, Q, R]`.
    pub roles: [String; 3],
    pub pieces: Vec<AffinePiece>,
    /// Region and the index of its minimizing piece.
    pub expected_regions: Vec<(RegionKind, usize)>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CertError {
    #[error("{face}: {pieces} pieces for {regions} regions")]
    Malformed { face: String, pieces: usize, regions: usize },
    #[error("{face}: frame and roles name different vertices")]
    BadFrame { face: String },
    #[error("τ = {0} is outside (0, 1)")]
    TauOutOfRange(String),
    #[error("certificate file: {0}")]
    File(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConvexityFailure {
    DistinctPiecesViolated { pieces: [usize; 2] },
    RegionMismatch { region: RegionKind, point: String, minimizer: Vec<usize> },
    WallNotStrict { wall: [RegionKind; 2], point: String },
}

impl fmt::Display for ConvexityFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::DistinctPiecesViolated { pieces } => write!(f, "distinct pieces violated: pieces {} and {} coincide", pieces[0], pieces[1]),
            Self::RegionMismatch { region, point, minimizer } => {
                write!(f, "region {region:?} is not minimized by its piece at {point} (minimizers {minimizer:?})")
            }
            Self::WallNotStrict { wall, point } => write!(f, "wall {wall:?} fails at {point}"),
        }
    }
}

fn names(list: [&str; 3]) -> [String; 3] {
    list.map(str::to_string)
}

/// The four face functions on the tetrahedron, with the default corner
/// choices of the quartic expansion.
pub fn builtin_certificates() -> Vec<FaceCertificate> {
    let regions = vec![(RegionKind::Middle, 0), (RegionKind::QCorner, 1), (RegionKind::PCorner, 2)];
    let p = AffinePiece::new;
    vec![
        FaceCertificate {
            face: names(["Y1", "Y2", "Y3"]),
            frame: names(["Y3", "Y2", "Y1"]),
            roles: names(["Y1", "Y2", "Y3"]),
            pieces: vec![p(2, -1, 0, 0), p(-1, 2, -3, 3), p(2, -3, 2, 0)],
            expected_regions: regions.clone(),
        },
        FaceCertificate {
            face: names(["Y4", "Y3", "Y2"]),
            frame: names(["Y2", "Y3", "Y4"]),
            roles: names(["Y4", "Y2", "Y3"]),
            pieces: vec![p(-2, 1, 0, 2), p(1, 1, -3, 2), p(-2, 0, 1, 2)],
            expected_regions: regions.clone(),
        },
        FaceCertificate {
            face: names(["Y1", "Y3", "Y4"]),
            frame: names(["Y4", "Y3", "Y1"]),
            roles: names(["Y1", "Y3", "Y4"]),
            pieces: vec![p(0, 0, 1, 0), p(-1, 1, 0, 1), p(0, -1, 2, 0)],
            expected_regions: regions.clone(),
        },
        FaceCertificate {
            face: names(["Y1", "Y4", "Y2"]),
            frame: names(["Y4", "Y2", "Y1"]),
            roles: names(["Y1", "Y2", "Y4"]),
            pieces: vec![p(2, -2, 1, 0), p(-2, 2, -3, 4), p(2, -3, 2, 0)],
            expected_regions: regions,
        },
    ]
}

impl FaceCertificate {
    pub fn face_label(&self) -> String {
        format!("({})", self.face.join(","))
    }

    fn frame_slot(&self, name: &str) -> Option<usize> {
        self.frame.iter().position(|f| f == name)
    }

    /// Frame point with barycentric weights `w` on `[P, Q, R]`.
    fn point(&self, w: [Rational; 3]) -> FaceCoord {
        let mut frame_w = [Rational::zero(), Rational::zero(), Rational::zero()];
        for (role, weight) in w.into_iter().enumerate() {
            frame_w[self.frame_slot(&self.roles[role]).expect("validated frame")] += weight;
        }
        // p = w0 (0,0) + w1 (1,0) + w2 (1,1)
        FaceCoord::new(&frame_w[1] + &frame_w[2], frame_w[2].clone())
    }

    pub fn vertex(&self, name: &str) -> Option<FaceCoord> {
        let slot = self.frame_slot(name)?;
        Some(match slot {
            0 => FaceCoord::new(int(0), int(0)),
            1 => FaceCoord::new(int(1), int(0)),
            _ => FaceCoord::new(int(1), int(1)),
        })
    }

    /// Region polygons at τ.
    pub fn region_polygon(&self, kind: RegionKind, tau: &Rational) -> Vec<FaceCoord> {
        let (o, z) = (Rational::one(), Rational::zero());
        let s = tau.clone();
        let pq = [s.clone(), &o - &s, z.clone()];
        let pr = [s.clone(), z.clone(), &o - &s];
        let qr = [z.clone(), &o - &s, s.clone()];
        let corner = |i: usize| {
            let mut w = [z.clone(), z.clone(), z.clone()];
            w[i] = o.clone();
            w
        };
        let ws = match kind {
            RegionKind::PCorner => vec![corner(0), pq, pr],
            RegionKind::QCorner => vec![corner(1), qr, pq],
            RegionKind::Middle => vec![corner(2), pr, pq, qr],
        };
        ws.into_iter().map(|w| self.point(w)).collect()
    }

    fn validate(&self) -> Result<(), CertError> {
        let mut a = self.frame.clone();
        let mut b = self.roles.clone();
        let mut c = self.face.clone();
        a.sort();
        b.sort();
        c.sort();
        if a != b || a != c || a[0] == a[1] || a[1] == a[2] {
            return Err(CertError::BadFrame { face: self.face_label() });
        }
        Ok(())
    }

    pub fn value(&self, p: &FaceCoord, tau: &Rational) -> Rational {
        self.pieces.iter().map(|f| f.eval(p, tau)).min().expect("nonempty pieces")
    }

    /// Adds `g` to every piece.
    pub fn shifted_by(&self, g: &AffinePiece) -> FaceCertificate {
        let mut out = self.clone();
        out.pieces = out.pieces.iter().map(|p| p.plus(g)).collect();
        out
    }
}

fn barycenter(poly: &[FaceCoord]) -> FaceCoord {
    let n = int(poly.len() as i64);
    let c = poly.iter().fold(Rational::zero(), |a, p| a + &p.c) / &n;
    let q = poly.iter().fold(Rational::zero(), |a, p| a + &p.q) / &n;
    FaceCoord::new(c, q)
}

fn check_tau(tau: &Rational) -> Result<(), CertError> {
    if *tau <= Rational::zero() || *tau >= Rational::one() {
        return Err(CertError::TauOutOfRange(tau.to_string()));
    }
    Ok(())
}

/// `Ok(Ok(()))` on success, `Ok(Err(witness))` when strictness fails.
pub fn check_strict_convexity(cert: &FaceCertificate, tau: &Rational) -> Result<Result<(), ConvexityFailure>, CertError> {
    check_tau(tau)?;
    cert.validate()?;
    let k = cert.pieces.len();
    for i in 0..k {
        for j in i + 1..k {
            if cert.pieces[i].at(tau) == cert.pieces[j].at(tau) {
                return Ok(Err(ConvexityFailure::DistinctPiecesViolated { pieces: [i, j] }));
            }
        }
    }
    if k != cert.expected_regions.len() || k != 3 {
        return Err(CertError::Malformed { face: cert.face_label(), pieces: k, regions: cert.expected_regions.len() });
    }
    let minimizers = |p: &FaceCoord| -> (Rational, Vec<usize>) {
        let vals: Vec<Rational> = cert.pieces.iter().map(|f| f.eval(p, tau)).collect();
        let m = vals.iter().min().expect("pieces").clone();
        let idx = vals.iter().enumerate().filter(|(_, v)| **v == m).map(|(i, _)| i).collect();
        (m, idx)
    };
    for &(kind, piece) in &cert.expected_regions {
        let poly = cert.region_polygon(kind, tau);
        for v in &poly {
            let (_, idx) = minimizers(v);
            if !idx.contains(&piece) {
                return Ok(Err(ConvexityFailure::RegionMismatch { region: kind, point: v.to_string(), minimizer: idx }));
            }
        }
        let center = barycenter(&poly);
        let (_, idx) = minimizers(&center);
        if idx != vec![piece] {
            return Ok(Err(ConvexityFailure::RegionMismatch { region: kind, point: center.to_string(), minimizer: idx }));
        }
    }
    // Walls: shared edges of region polygons.
    let regions: Vec<(RegionKind, usize, Vec<FaceCoord>)> =
        cert.expected_regions.iter().map(|&(k, p)| (k, p, cert.region_polygon(k, tau))).collect();
    for a in 0..regions.len() {
        for b in a + 1..regions.len() {
            let shared: Vec<&FaceCoord> = regions[a].2.iter().filter(|v| regions[b].2.contains(v)).collect();
            if shared.len() < 2 {
                continue;
            }
            let (fa, fb) = (&cert.pieces[regions[a].1], &cert.pieces[regions[b].1]);
            for v in &shared {
                if fa.eval(v, tau) != fb.eval(v, tau) {
                    return Ok(Err(ConvexityFailure::WallNotStrict { wall: [regions[a].0, regions[b].0], point: v.to_string() }));
                }
            }
            // Across the wall each piece lies strictly above the other's region min.
            for (own, other, poly) in [(fa, fb, &regions[a].2), (fb, fa, &regions[b].2)] {
                let c = barycenter(poly);
                if own.eval(&c, tau) >= other.eval(&c, tau) {
                    return Ok(Err(ConvexityFailure::WallNotStrict { wall: [regions[a].0, regions[b].0], point: c.to_string() }));
                }
            }
        }
    }
    Ok(Ok(()))
}

/// `alpha s + beta` on `[0, 1]`.
#[derive(Clone, Debug, PartialEq, Eq)]
struct Line {
    alpha: Rational,
    beta: Rational,
}

impl Line {
    fn at(&self, s: &Rational) -> Rational {
        &self.alpha * s + &self.beta
    }
}

fn restrict(cert: &FaceCertificate, from: &str, to: &str, tau: &Rational) -> Vec<Line> {
    let (a, b) = (cert.vertex(from).expect("edge vertex"), cert.vertex(to).expect("edge vertex"));
    cert.pieces
        .iter()
        .map(|f| {
            let f0 = f.eval(&a, tau);
            let f1 = f.eval(&b, tau);
            Line { alpha: &f1 - &f0, beta: f0 }
        })
        .collect()
}

fn min_at(lines: &[Line], s: &Rational) -> Rational {
    lines.iter().map(|l| l.at(s)).min().expect("lines")
}

fn breakpoints(lines: &[Line]) -> Vec<Rational> {
    let mut out = vec![Rational::zero(), Rational::one()];
    for i in 0..lines.len() {
        for j in i + 1..lines.len() {
            let da = &lines[i].alpha - &lines[j].alpha;
            if da.is_zero() {
                continue;
            }
            let s = (&lines[j].beta - &lines[i].beta) / da;
            if s > Rational::zero() && s < Rational::one() {
                out.push(s);
            }
        }
    }
    out
}

/// Pieces minimal on some open interval of `[0, 1]`, rendered in `s`.
fn describe(lines: &[Line]) -> String {
    let mut pts = breakpoints(lines);
    pts.sort();
    pts.dedup();
    let samples: Vec<Rational> = pts.windows(2).map(|w| (&w[0] + &w[1]) / int(2)).collect();
    let mut active: Vec<&Line> = Vec::new();
    for s in &samples {
        let m = min_at(lines, s);
        for l in lines {
            if l.at(s) == m && !active.contains(&l) {
                active.push(l);
            }
        }
    }
    let render = |l: &Line| {
        let s_term = if l.alpha.is_zero() { String::new() } else if l.alpha.is_one() { "s".into() } else if l.alpha == -Rational::one() { "-s".into() } else { format!("{}s", l.alpha) };
        match (s_term.is_empty(), l.beta.is_zero()) {
            (true, _) => l.beta.to_string(),
            (false, true) => s_term,
            (false, false) => format!("{s_term} + {}", l.beta).replace("+ -", "- "),
        }
    };
    format!("min{{{}}}", active.into_iter().map(render).collect::<Vec<_>>().join(", "))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EdgeAgreement {
    pub edge: String,
    pub faces: [String; 2],
    pub equal: bool,
    /// Restrictions in the arclength `s` from the first edge vertex.
    pub restrictions: [String; 2],
    /// First `(s, left value, right value)` where they differ.
    pub witness: Option<[String; 3]>,
}

pub fn compare_on_edge(f: &FaceCertificate, g: &FaceCertificate, u: &str, v: &str, tau: &Rational) -> EdgeAgreement {
    let lf = restrict(f, u, v, tau);
    let lg = restrict(g, u, v, tau);
    let mut pts = breakpoints(&lf);
    pts.extend(breakpoints(&lg));
    pts.sort();
    pts.dedup();
    let witness = pts.iter().find_map(|s| {
        let (a, b) = (min_at(&lf, s), min_at(&lg, s));
        (a != b).then(|| [s.to_string(), a.to_string(), b.to_string()])
    });
    EdgeAgreement {
        edge: format!("{u}{v}"),
        faces: [f.face_label(), g.face_label()],
        equal: witness.is_none(),
        restrictions: [describe(&lf), describe(&lg)],
        witness,
    }
}

/// Every edge shared by two of the given faces.
pub fn check_edge_agreement(certs: &[FaceCertificate], tau: &Rational) -> Result<Vec<EdgeAgreement>, CertError> {
    check_tau(tau)?;
    for c in certs {
        c.validate()?;
    }
    let mut by_edge: BTreeMap<(String, String), Vec<usize>> = BTreeMap::new();
    for (i, c) in certs.iter().enumerate() {
        let mut vs = c.face.clone();
        vs.sort();
        for (a, b) in [(0, 1), (0, 2), (1, 2)] {
            by_edge.entry((vs[a].clone(), vs[b].clone())).or_default().push(i);
        }
    }
    Ok(by_edge
        .into_iter()
        .filter(|(_, fs)| fs.len() == 2)
        .map(|((u, v), fs)| compare_on_edge(&certs[fs[0]], &certs[fs[1]], &u, &v, tau))
        .collect())
}

#[derive(Serialize, Deserialize)]
struct PieceFile {
    c: String,
    q: String,
    tau: String,
    b: String,
}

#[derive(Serialize, Deserialize)]
struct FaceFile {
    face: [String; 3],
    frame: [String; 3],
    roles: [String; 3],
    pieces: Vec<PieceFile>,
    regions: Vec<(RegionKind, usize)>,
}

#[derive(Serialize, Deserialize)]
struct CertFile {
    faces: Vec<FaceFile>,
}

pub fn certificates_to_json(certs: &[FaceCertificate]) -> String {
    let file = CertFile {
        faces: certs
            .iter()
            .map(|c| FaceFile {
                face: c.face.clone(),
                frame: c.frame.clone(),
                roles: c.roles.clone(),
                pieces: c
                    .pieces
                    .iter()
                    .map(|p| PieceFile { c: p.a_c.to_string(), q: p.a_q.to_string(), tau: p.a_tau.to_string(), b: p.b.to_string() })
                    .collect(),
                regions: c.expected_regions.clone(),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&file).expect("serializable")
}

pub fn certificates_from_json(text: &str) -> Result<Vec<FaceCertificate>, CertError> {
    let file: CertFile = serde_json::from_str(text).map_err(|e| CertError::File(e.to_string()))?;
    let num = |s: &str| parse_rational(s).ok_or_else(|| CertError::File(format!("bad rational {s:?}")));
    file.faces
        .into_iter()
        .map(|f| {
            let pieces = f
                .pieces
                .iter()
                .map(|p| Ok(AffinePiece { a_c: num(&p.c)?, a_q: num(&p.q)?, a_tau: num(&p.tau)?, b: num(&p.b)? }))
                .collect::<Result<Vec<_>, CertError>>()?;
            let cert = FaceCertificate { face: f.face, frame: f.frame, roles: f.roles, pieces, expected_regions: f.regions };
            cert.validate()?;
            Ok(cert)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat;

    fn taus() -> Vec<Rational> {
        vec![rat(1, 4), rat(1, 3), rat(1, 2), rat(2, 3), rat(3, 4)]
    }

    #[test]
    fn builtin_shapes() {
        let certs = builtin_certificates();
        assert_eq!(certs.len(), 4);
        assert!(certs.iter().all(|c| c.pieces.len() == 3));
        assert_eq!(certs[2].pieces[0], AffinePiece::new(0, 0, 1, 0));
        assert_eq!(certs[0].pieces[0].a_c, int(2));
        assert_eq!(certs[0].pieces[1].to_string(), "-c + 2q - 3τ + 3");
    }

    #[test]
    fn builtin_certificates_are_strictly_convex() {
        for cert in builtin_certificates() {
            for tau in taus() {
                assert_eq!(check_strict_convexity(&cert, &tau).unwrap(), Ok(()), "{} at {tau}", cert.face_label());
            }
        }
    }

    #[test]
    fn duplicate_pieces_rejected() {
        let mut cert = builtin_certificates().remove(0);
        cert.pieces = vec![AffinePiece::new(1, 0, 0, 0), AffinePiece::new(1, 0, 0, 0)];
        let r = check_strict_convexity(&cert, &rat(1, 2)).unwrap();
        assert_eq!(r, Err(ConvexityFailure::DistinctPiecesViolated { pieces: [0, 1] }));
        assert!(r.unwrap_err().to_string().contains("distinct pieces violated"));
    }

    #[test]
    fn shifted_piece_breaks_regions() {
        let mut cert = builtin_certificates().remove(0);
        cert.pieces[2].b -= int(10);
        assert!(matches!(check_strict_convexity(&cert, &rat(1, 2)).unwrap(), Err(ConvexityFailure::RegionMismatch { .. })));
    }

    #[test]
    fn piece_count_must_match() {
        let mut cert = builtin_certificates().remove(1);
        cert.pieces.pop();
        assert!(matches!(check_strict_convexity(&cert, &rat(1, 2)), Err(CertError::Malformed { .. })));
    }

    #[test]
    fn tau_range_checked() {
        let cert = builtin_certificates().remove(0);
        assert!(check_strict_convexity(&cert, &int(1)).is_err());
        assert!(check_edge_agreement(&[cert], &int(0)).is_err());
    }

    #[test]
    fn global_affine_shift_preserves_success() {
        let g = AffinePiece::new(5, -7, 3, 2);
        for cert in builtin_certificates() {
            assert_eq!(check_strict_convexity(&cert.shifted_by(&g), &rat(2, 5)).unwrap(), Ok(()));
        }
    }

    #[test]
    fn y2y3_edge_agrees() {
        let certs = builtin_certificates();
        let r = compare_on_edge(&certs[0], &certs[1], "Y3", "Y2", &rat(1, 2));
        assert!(r.equal);
        assert_eq!(r.restrictions[0], "min{2s, -s + 3/2}");
        assert_eq!(r.restrictions[0], r.restrictions[1]);
    }

    #[test]
    fn face_agrees_with_itself() {
        for c in builtin_certificates() {
            assert!(compare_on_edge(&c, &c, &c.face[0], &c.face[1], &rat(1, 3)).equal);
        }
    }

    #[test]
    fn all_six_edges_reported() {
        for tau in [rat(1, 4), rat(1, 2), rat(3, 4)] {
            let r = check_edge_agreement(&builtin_certificates(), &tau).unwrap();
            assert_eq!(r.len(), 6);
            assert!(r.iter().find(|e| e.edge == "Y2Y3").unwrap().equal);
            for e in &r {
                assert_eq!(e.equal, e.restrictions[0] == e.restrictions[1], "{e:?}");
            }
        }
    }

    #[test]
    fn mismatched_edge_has_witness() {
        let certs = builtin_certificates();
        let mut other = certs[1].clone();
        other.pieces[0].b += int(1);
        let r = compare_on_edge(&certs[0], &other, "Y2", "Y3", &rat(1, 2));
        assert!(!r.equal);
        assert!(r.witness.is_some());
    }

    #[test]
    fn json_round_trip() {
        let certs = builtin_certificates();
        assert_eq!(certificates_from_json(&certificates_to_json(&certs)).unwrap(), certs);
        assert!(certificates_from_json("{}").is_err());
    }
}
