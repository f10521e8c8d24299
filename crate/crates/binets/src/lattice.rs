//! Combinatorics of the double lattice D = V ∪ F over finite windows of ℤ²
//! and ℤ³: incidence, crosses, dual edges and face indexing.
//!
//! Face indexing convention: `Face(i,j)` is the unit square [i,i+1]×[j,j+1].
//! The dual edge of the V-edge ((i,j),(i+1,j)) is (Face(i,j−1), Face(i,j)),
//! and of ((i,j),(i,j+1)) it is (Face(i−1,j), Face(i,j)).

use serde::{Deserialize, Serialize};
use std::fmt;

/// A cell of the double lattice D = V ∪ F of ℤ².
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum CellId {
    Vertex(i64, i64),
    Face(i64, i64),
}

impl CellId {
    pub fn is_vertex(&self) -> bool {
        matches!(self, CellId::Vertex(_, _))
    }

    pub fn is_face(&self) -> bool {
        matches!(self, CellId::Face(_, _))
    }

    pub fn coords(&self) -> (i64, i64) {
        match *self {
            CellId::Vertex(i, j) | CellId::Face(i, j) => (i, j),
        }
    }
}

impl fmt::Display for CellId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CellId::Vertex(i, j) => write!(f, "V({i},{j})"),
            CellId::Face(i, j) => write!(f, "F({i},{j})"),
        }
    }
}

/// Finite window of ℤ²: vertices (i,j) with i0 ≤ i ≤ i1, j0 ≤ j ≤ j1, and
/// faces on the unit squares whose four corners are all inside.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Window {
    pub i0: i64,
    pub i1: i64,
    pub j0: i64,
    pub j1: i64,
}

impl Window {
    pub fn new(i0: i64, i1: i64, j0: i64, j1: i64) -> Self {
        assert!(i1 > i0 && j1 > j0, "window needs at least 2×2 vertices");
        Window { i0, i1, j0, j1 }
    }

    /// Zero-based window with m×n vertices.
    pub fn sized(m: usize, n: usize) -> Self {
        Window::new(0, m as i64 - 1, 0, n as i64 - 1)
    }

    /// Vertex counts along the two axes.
    pub fn vertex_counts(&self) -> (usize, usize) {
        (
            (self.i1 - self.i0 + 1) as usize,
            (self.j1 - self.j0 + 1) as usize,
        )
    }

    pub fn contains_vertex(&self, i: i64, j: i64) -> bool {
        i >= self.i0 && i <= self.i1 && j >= self.j0 && j <= self.j1
    }

    pub fn contains_face(&self, i: i64, j: i64) -> bool {
        i >= self.i0 && i < self.i1 && j >= self.j0 && j < self.j1
    }

    pub fn contains(&self, cell: CellId) -> bool {
        match cell {
            CellId::Vertex(i, j) => self.contains_vertex(i, j),
            CellId::Face(i, j) => self.contains_face(i, j),
        }
    }

    /// Row-major vertex enumeration (i outer, j inner).
    pub fn vertices(&self) -> impl Iterator<Item = CellId> + '_ {
        (self.i0..=self.i1)
            .flat_map(move |i| (self.j0..=self.j1).map(move |j| CellId::Vertex(i, j)))
    }

    pub fn faces(&self) -> impl Iterator<Item = CellId> + '_ {
        (self.i0..self.i1).flat_map(move |i| (self.j0..self.j1).map(move |j| CellId::Face(i, j)))
    }

    pub fn cells(&self) -> impl Iterator<Item = CellId> + '_ {
        self.vertices().chain(self.faces())
    }

    /// V-edges as ordered vertex pairs (lexicographic pair order).
    pub fn v_edges(&self) -> Vec<(CellId, CellId)> {
        let mut out = Vec::new();
        for i in self.i0..=self.i1 {
            for j in self.j0..=self.j1 {
                if i < self.i1 {
                    out.push((CellId::Vertex(i, j), CellId::Vertex(i + 1, j)));
                }
                if j < self.j1 {
                    out.push((CellId::Vertex(i, j), CellId::Vertex(i, j + 1)));
                }
            }
        }
        out
    }

    /// F-edges as ordered face pairs.
    pub fn f_edges(&self) -> Vec<(CellId, CellId)> {
        let mut out = Vec::new();
        for i in self.i0..self.i1 {
            for j in self.j0..self.j1 {
                if i + 1 < self.i1 {
                    out.push((CellId::Face(i, j), CellId::Face(i + 1, j)));
                }
                if j + 1 < self.j1 {
                    out.push((CellId::Face(i, j), CellId::Face(i, j + 1)));
                }
            }
        }
        out
    }

    /// All incident (vertex, face) pairs with both cells inside the window.
    pub fn incident_pairs(&self) -> Vec<(CellId, CellId)> {
        let mut out = Vec::new();
        for f in self.faces() {
            for v in face_vertices(f) {
                out.push((v, f));
            }
        }
        out
    }

    /// Deterministic cross enumeration: one cross per interior V-edge, in
    /// edge order (horizontal edges of each row first, then vertical).
    pub fn crosses(&self) -> Vec<Cross> {
        let mut out = Vec::new();
        for (v, vp) in self.v_edges() {
            let (f, fp) = dual_faces_of_v_edge(v, vp);
            if self.contains(f) && self.contains(fp) {
                out.push(Cross { v, f, vp, fp });
            }
        }
        out
    }
}

/// A cross (v, f, v′, f′): adjacent vertices v,v′ and adjacent faces f,f′,
/// all four mutually incident.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Cross {
    pub v: CellId,
    pub f: CellId,
    pub vp: CellId,
    pub fp: CellId,
}

impl fmt::Display for Cross {
    fn fmt(&self, fm: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(fm, "cross({}, {}, {}, {})", self.v, self.f, self.vp, self.fp)
    }
}

/// True iff one cell is a face and the other one of its corner vertices.
pub fn incident(d: CellId, dp: CellId) -> bool {
    match (d, dp) {
        (CellId::Vertex(vi, vj), CellId::Face(fi, fj))
        | (CellId::Face(fi, fj), CellId::Vertex(vi, vj)) => {
            (vi == fi || vi == fi + 1) && (vj == fj || vj == fj + 1)
        }
        _ => false,
    }
}

/// The 4 corner vertices of a face, counterclockwise from the lower corner.
pub fn face_vertices(f: CellId) -> [CellId; 4] {
    match f {
        CellId::Face(i, j) => [
            CellId::Vertex(i, j),
            CellId::Vertex(i + 1, j),
            CellId::Vertex(i + 1, j + 1),
            CellId::Vertex(i, j + 1),
        ],
        CellId::Vertex(_, _) => panic!("face_vertices called on a vertex"),
    }
}

/// The 4 faces incident to a vertex in the infinite lattice, counterclockwise
/// from the lower-left.
pub fn vertex_faces(v: CellId) -> [CellId; 4] {
    match v {
        CellId::Vertex(i, j) => [
            CellId::Face(i - 1, j - 1),
            CellId::Face(i, j - 1),
            CellId::Face(i, j),
            CellId::Face(i - 1, j),
        ],
        CellId::Face(_, _) => panic!("vertex_faces called on a face"),
    }
}

/// Cells incident to `d` that lie inside `w`; the flag is true when the full
/// set of 4 is inside (false marks a boundary cell with a truncated list).
pub fn incident_cells_in(w: &Window, d: CellId) -> (Vec<CellId>, bool) {
    let all: Vec<CellId> = match d {
        CellId::Vertex(_, _) => vertex_faces(d).to_vec(),
        CellId::Face(_, _) => face_vertices(d).to_vec(),
    };
    let inside: Vec<CellId> = all.iter().cloned().filter(|c| w.contains(*c)).collect();
    let complete = inside.len() == all.len();
    (inside, complete)
}

/// The two faces of the infinite lattice containing a V-edge. Panics if the
/// cells are not adjacent vertices.
pub fn dual_faces_of_v_edge(a: CellId, b: CellId) -> (CellId, CellId) {
    let (CellId::Vertex(ai, aj), CellId::Vertex(bi, bj)) = (a, b) else {
        panic!("dual_faces_of_v_edge expects two vertices");
    };
    let (i, j) = (ai.min(bi), aj.min(bj));
    if (ai - bi).abs() == 1 && aj == bj {
        (CellId::Face(i, j - 1), CellId::Face(i, j))
    } else if (aj - bj).abs() == 1 && ai == bi {
        (CellId::Face(i - 1, j), CellId::Face(i, j))
    } else {
        panic!("vertices are not adjacent: {a}, {b}");
    }
}

/// The dual V-edge of an F-edge (inverse of [`dual_faces_of_v_edge`]).
pub fn dual_vertices_of_f_edge(a: CellId, b: CellId) -> (CellId, CellId) {
    let (CellId::Face(ai, aj), CellId::Face(bi, bj)) = (a, b) else {
        panic!("dual_vertices_of_f_edge expects two faces");
    };
    let (i, j) = (ai.max(bi), aj.max(bj));
    if (ai - bi).abs() == 1 && aj == bj {
        (CellId::Vertex(i, j), CellId::Vertex(i, j + 1))
    } else if (aj - bj).abs() == 1 && ai == bi {
        (CellId::Vertex(i, j), CellId::Vertex(i + 1, j))
    } else {
        panic!("faces are not adjacent: {a}, {b}");
    }
}

// ---------------------------------------------------------------------------
// ℤ³
// ---------------------------------------------------------------------------

/// Coordinate plane spanned by two lattice directions; a ℤ³ face at `r` with
/// plane `Pij` is the unit square {r, r+eᵢ, r+eᵢ+eⱼ, r+eⱼ}.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum FacePlane {
    P12,
    P13,
    P23,
}

impl FacePlane {
    pub const ALL: [FacePlane; 3] = [FacePlane::P12, FacePlane::P13, FacePlane::P23];

    /// The two spanned axis indices (0-based).
    pub fn axes(&self) -> (usize, usize) {
        match self {
            FacePlane::P12 => (0, 1),
            FacePlane::P13 => (0, 2),
            FacePlane::P23 => (1, 2),
        }
    }
}

/// A cell of the double lattice of ℤ³.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum CellId3 {
    Vertex([i64; 3]),
    Face(FacePlane, [i64; 3]),
}

impl fmt::Display for CellId3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CellId3::Vertex(r) => write!(f, "V({},{},{})", r[0], r[1], r[2]),
            CellId3::Face(p, r) => write!(f, "F{:?}({},{},{})", p, r[0], r[1], r[2]),
        }
    }
}

fn add(r: [i64; 3], a: usize, k: i64) -> [i64; 3] {
    let mut s = r;
    s[a] += k;
    s
}

/// The 4 corner vertices of a ℤ³ face.
pub fn face_vertices3(f: CellId3) -> [CellId3; 4] {
    let CellId3::Face(p, r) = f else {
        panic!("face_vertices3 called on a vertex");
    };
    let (a, b) = p.axes();
    [
        CellId3::Vertex(r),
        CellId3::Vertex(add(r, a, 1)),
        CellId3::Vertex(add(add(r, a, 1), b, 1)),
        CellId3::Vertex(add(r, b, 1)),
    ]
}

/// The 12 faces incident to a ℤ³ vertex: 4 per coordinate plane.
pub fn vertex_faces3(v: CellId3) -> Vec<CellId3> {
    let CellId3::Vertex(r) = v else {
        panic!("vertex_faces3 called on a face");
    };
    let mut out = Vec::with_capacity(12);
    for p in FacePlane::ALL {
        let (a, b) = p.axes();
        for da in [-1i64, 0] {
            for db in [-1i64, 0] {
                out.push(CellId3::Face(p, add(add(r, a, da), b, db)));
            }
        }
    }
    out
}

/// True iff one cell is a face and the other one of its 4 corner vertices.
pub fn incident3(d: CellId3, dp: CellId3) -> bool {
    let (f, v) = match (d, dp) {
        (f @ CellId3::Face(_, _), v @ CellId3::Vertex(_)) => (f, v),
        (v @ CellId3::Vertex(_), f @ CellId3::Face(_, _)) => (f, v),
        _ => return false,
    };
    face_vertices3(f).contains(&v)
}

/// The 4 faces of the infinite ℤ³ lattice containing a V-edge in direction
/// `axis` with lower endpoint `r`.
pub fn faces_of_edge3(r: [i64; 3], axis: usize) -> Vec<CellId3> {
    let mut out = Vec::with_capacity(4);
    for p in FacePlane::ALL {
        let (a, b) = p.axes();
        if a != axis && b != axis {
            continue;
        }
        let other = if a == axis { b } else { a };
        for d in [-1i64, 0] {
            out.push(CellId3::Face(p, add(r, other, d)));
        }
    }
    out
}

/// Finite window of ℤ³ with vertices 0..=m-1 × 0..=n-1 × 0..=p-1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Window3 {
    pub m: usize,
    pub n: usize,
    pub p: usize,
}

impl Window3 {
    pub fn new(m: usize, n: usize, p: usize) -> Self {
        assert!(m >= 2 && n >= 2 && p >= 2, "window needs 2 vertices per axis");
        Window3 { m, n, p }
    }

    pub fn contains_vertex(&self, r: [i64; 3]) -> bool {
        let lim = [self.m as i64, self.n as i64, self.p as i64];
        (0..3).all(|a| r[a] >= 0 && r[a] < lim[a])
    }

    pub fn contains(&self, c: CellId3) -> bool {
        match c {
            CellId3::Vertex(r) => self.contains_vertex(r),
            CellId3::Face(_, _) => face_vertices3(c).iter().all(|v| match v {
                CellId3::Vertex(r) => self.contains_vertex(*r),
                _ => unreachable!(),
            }),
        }
    }

    pub fn vertices(&self) -> Vec<CellId3> {
        let mut out = Vec::new();
        for i in 0..self.m as i64 {
            for j in 0..self.n as i64 {
                for k in 0..self.p as i64 {
                    out.push(CellId3::Vertex([i, j, k]));
                }
            }
        }
        out
    }

    pub fn faces(&self) -> Vec<CellId3> {
        let mut out = Vec::new();
        for p in FacePlane::ALL {
            for i in 0..self.m as i64 {
                for j in 0..self.n as i64 {
                    for k in 0..self.p as i64 {
                        let f = CellId3::Face(p, [i, j, k]);
                        if self.contains(f) {
                            out.push(f);
                        }
                    }
                }
            }
        }
        out
    }

    /// V-edges with lower endpoint and direction axis.
    pub fn v_edges(&self) -> Vec<([i64; 3], usize)> {
        let lim = [self.m as i64, self.n as i64, self.p as i64];
        let mut out = Vec::new();
        for i in 0..lim[0] {
            for j in 0..lim[1] {
                for k in 0..lim[2] {
                    for axis in 0..3 {
                        let r = [i, j, k];
                        if r[axis] + 1 < lim[axis] {
                            out.push((r, axis));
                        }
                    }
                }
            }
        }
        out
    }

    /// Crosses of the window: per V-edge, all unordered pairs of distinct
    /// in-window faces containing the edge. In ℤ³ an interior edge has 4
    /// such faces, giving the 6 crosses per edge.
    pub fn crosses(&self) -> Vec<Cross3> {
        let mut out = Vec::new();
        for (r, axis) in self.v_edges() {
            let faces: Vec<CellId3> = faces_of_edge3(r, axis)
                .into_iter()
                .filter(|f| self.contains(*f))
                .collect();
            let v = CellId3::Vertex(r);
            let vp = CellId3::Vertex(add(r, axis, 1));
            for a in 0..faces.len() {
                for b in (a + 1)..faces.len() {
                    out.push(Cross3 {
                        v,
                        f: faces[a],
                        vp,
                        fp: faces[b],
                    });
                }
            }
        }
        out
    }
}

/// A ℤ³ cross: edge endpoints plus two distinct faces containing the edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Cross3 {
    pub v: CellId3,
    pub f: CellId3,
    pub vp: CellId3,
    pub fp: CellId3,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn incident_corner_cases() {
        assert!(incident(CellId::Vertex(0, 0), CellId::Face(0, 0)));
        assert!(!incident(CellId::Vertex(2, 2), CellId::Face(0, 0)));
        assert!(!incident(CellId::Vertex(0, 0), CellId::Vertex(1, 0)));
        assert!(incident(CellId::Face(0, 0), CellId::Vertex(1, 1)));
    }

    #[test]
    fn face_vertex_lists() {
        assert_eq!(
            face_vertices(CellId::Face(0, 0)),
            [
                CellId::Vertex(0, 0),
                CellId::Vertex(1, 0),
                CellId::Vertex(1, 1),
                CellId::Vertex(0, 1)
            ]
        );
        let w = Window::sized(3, 3);
        let (faces, complete) = incident_cells_in(&w, CellId::Vertex(1, 1));
        assert!(complete);
        assert_eq!(faces.len(), 4);
        for f in [CellId::Face(0, 0), CellId::Face(1, 0), CellId::Face(0, 1), CellId::Face(1, 1)] {
            assert!(faces.contains(&f));
        }
        let (faces, complete) = incident_cells_in(&w, CellId::Vertex(0, 0));
        assert!(!complete);
        assert_eq!(faces, vec![CellId::Face(0, 0)]);
    }

    #[test]
    fn cross_counts_match_formula() {
        // An m×n-vertex window has (m−1)(n−1) faces and
        // (m−2)(n−1) + (m−1)(n−2) crosses.
        for (m, n) in [(2usize, 2usize), (3, 3), (4, 6), (5, 2)] {
            let w = Window::sized(m, n);
            assert_eq!(w.faces().count(), (m - 1) * (n - 1));
            let expected = (m - 2) * (n - 1) + (m - 1) * (n - 2);
            assert_eq!(w.crosses().len(), expected, "window {m}×{n}");
        }
    }

    #[test]
    fn crosses_brute_force_oracle_3x3() {
        // Oracle: enumerate all (v,f,v',f') with v,v' adjacent, f,f' adjacent
        // and all mutually incident, up to symmetry.
        let w = Window::sized(3, 3);
        let faces: Vec<CellId> = w.faces().collect();
        let mut oracle = std::collections::BTreeSet::new();
        for (v, vp) in w.v_edges() {
            for (ai, f) in faces.iter().enumerate() {
                for fp in faces.iter().skip(ai + 1) {
                    let adjacent_faces = {
                        let (fi, fj) = f.coords();
                        let (gi, gj) = fp.coords();
                        (fi - gi).abs() + (fj - gj).abs() == 1
                    };
                    if adjacent_faces
                        && incident(v, *f)
                        && incident(v, *fp)
                        && incident(vp, *f)
                        && incident(vp, *fp)
                    {
                        oracle.insert((v, *f, vp, *fp));
                    }
                }
            }
        }
        assert_eq!(oracle.len(), 4);
        let enumerated: std::collections::BTreeSet<_> = w
            .crosses()
            .into_iter()
            .map(|c| {
                let (lo, hi) = if c.f <= c.fp { (c.f, c.fp) } else { (c.fp, c.f) };
                (c.v, lo, c.vp, hi)
            })
            .collect();
        assert_eq!(enumerated, oracle);
    }

    #[test]
    fn two_by_two_window_has_no_crosses() {
        assert!(Window::sized(2, 2).crosses().is_empty());
    }

    #[test]
    fn dual_edge_involution() {
        let w = Window::sized(4, 4);
        for (v, vp) in w.v_edges() {
            let (f, fp) = dual_faces_of_v_edge(v, vp);
            let (a, b) = dual_vertices_of_f_edge(f, fp);
            assert_eq!((a, b), (v, vp));
        }
    }

    #[test]
    fn cross_consistency() {
        for c in Window::sized(5, 4).crosses() {
            assert!(incident(c.v, c.f));
            assert!(incident(c.v, c.fp));
            assert!(incident(c.vp, c.f));
            assert!(incident(c.vp, c.fp));
        }
    }

    #[test]
    fn z3_face_vertices_and_incidence() {
        let f = CellId3::Face(FacePlane::P12, [0, 0, 0]);
        let vs = face_vertices3(f);
        assert!(vs.contains(&CellId3::Vertex([0, 0, 0])));
        assert!(vs.contains(&CellId3::Vertex([1, 1, 0])));
        assert!(incident3(CellId3::Vertex([0, 0, 0]), f));
        assert!(!incident3(CellId3::Vertex([0, 0, 1]), f));
    }

    #[test]
    fn z3_vertex_has_twelve_faces() {
        let faces = vertex_faces3(CellId3::Vertex([1, 1, 1]));
        assert_eq!(faces.len(), 12);
        for p in FacePlane::ALL {
            assert_eq!(
                faces.iter().filter(|f| matches!(f, CellId3::Face(q, _) if *q == p)).count(),
                4
            );
        }
        for f in faces {
            assert!(incident3(CellId3::Vertex([1, 1, 1]), f));
        }
    }

    #[test]
    fn z3_six_crosses_per_interior_edge() {
        // A 2×2×2 block of cubes (3×3×3 vertices): an interior edge has all
        // 4 incident faces in-window, giving (4 choose 2) = 6 crosses; the
        // two cross types pair parallel and perpendicular faces.
        let w = Window3::new(3, 3, 3);
        let crosses = w.crosses();
        let mut interior_edges = 0;
        for (r, axis) in w.v_edges() {
            let n_faces = faces_of_edge3(r, axis)
                .into_iter()
                .filter(|f| w.contains(*f))
                .count();
            let v = CellId3::Vertex(r);
            let n_crosses = crosses.iter().filter(|c| c.v == v && {
                let CellId3::Vertex(rp) = c.vp else { unreachable!() };
                rp == add(r, axis, 1)
            }).count();
            assert_eq!(n_crosses, n_faces * (n_faces - 1) / 2);
            if n_faces == 4 {
                interior_edges += 1;
                assert_eq!(n_crosses, 6);
            }
        }
        assert!(interior_edges > 0);
        for c in &crosses {
            assert!(incident3(c.v, c.f));
            assert!(incident3(c.v, c.fp));
            assert!(incident3(c.vp, c.f));
            assert!(incident3(c.vp, c.fp));
        }
    }
}
