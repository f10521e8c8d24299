//! ℤ³ machinery: conjugate face-nets and their completion, polar-conjugate
//! cube completion in ℝP⁴, and end-to-end principal-binet extension through
//! the Möbius lift.
//!
//! The cube completion follows the constructive order of the consistency
//! proof: the three far face planes are spans of known vertex triples, the
//! far face points are meets of known vertex planes, and the eighth vertex
//! is the meet of the new face planes; the new polarity relations then hold
//! automatically (up to round-off), which is the content of the theorem and
//! is verified rather than enforced.

use nalgebra::{DMatrix, DVector, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;

use crate::lattice::{face_vertices3, vertex_faces3, CellId3, FacePlane, Window3};
use crate::lifts::{moebius_point_lift, project_moebius, solve_on_graph};
use crate::nets::{check_conjugate, check_orthogonal, Binet};
use crate::projective::{inner, meet_many, polar, HomVector, ProjSubspace, QuadricForm};
use crate::{Error, Result};

// ---------------------------------------------------------------------------
// Cube completion
// ---------------------------------------------------------------------------

/// Corner index of a unit cube: bit 0 ↔ +e₁, bit 1 ↔ +e₂, bit 2 ↔ +e₃.
pub type Corner = u8;

/// The four corners of a cube face (plane, level).
pub fn cube_face_corners(plane: FacePlane, level: u8) -> [Corner; 4] {
    let (a, b) = plane.axes();
    let other = 3 - a - b;
    let base = (level as u8) << other;
    [
        base,
        base | (1 << a),
        base | (1 << a) | (1 << b),
        base | (1 << b),
    ]
}

/// Polar-conjugate data on one cube of ℝP⁴: vertex points (7 of 8 on input),
/// face points (3 of 6 on input: the level-0 faces), and the vertex planes
/// □b(v) for the six mixed corners, carried along from the ambient lattice.
#[derive(Debug, Clone)]
pub struct CubeData {
    pub form: QuadricForm,
    pub vertices: BTreeMap<Corner, HomVector>,
    pub faces: BTreeMap<(FacePlane, u8), HomVector>,
    pub vertex_planes: BTreeMap<Corner, ProjSubspace>,
}

impl CubeData {
    /// Max |⟨·,·⟩| over the supplied incident vertex–face pairs, plus the
    /// containment defect of supplied planes in the vertex polars.
    pub fn polarity_residual(&self) -> Result<f64> {
        let mut worst = 0.0_f64;
        for (&(plane, level), xf) in &self.faces {
            for corner in cube_face_corners(plane, level) {
                if let Some(xv) = self.vertices.get(&corner) {
                    worst = worst.max(inner(self.form, xv, xf)?.abs());
                }
            }
        }
        for (corner, pl) in &self.vertex_planes {
            if let Some(xv) = self.vertices.get(corner) {
                let polar_space = crate::projective::polar_point(self.form, xv)?;
                for bp in pl.basis_points() {
                    worst = worst.max(polar_space.distance(&bp));
                }
            }
        }
        Ok(worst)
    }

    /// Relabels the cube under a permutation of the three axes: corner bits
    /// and face planes permute, the geometry is untouched.
    pub fn permuted(&self, perm: [usize; 3]) -> CubeData {
        let map_corner = |c: Corner| -> Corner {
            let mut out = 0u8;
            for (axis, &target) in perm.iter().enumerate() {
                if c & (1 << axis) != 0 {
                    out |= 1 << target;
                }
            }
            out
        };
        let map_plane = |p: FacePlane| -> FacePlane {
            let (a, b) = p.axes();
            let (na, nb) = (perm[a].min(perm[b]), perm[a].max(perm[b]));
            match (na, nb) {
                (0, 1) => FacePlane::P12,
                (0, 2) => FacePlane::P13,
                (1, 2) => FacePlane::P23,
                _ => unreachable!(),
            }
        };
        CubeData {
            form: self.form,
            vertices: self
                .vertices
                .iter()
                .map(|(c, x)| (map_corner(*c), x.clone()))
                .collect(),
            faces: self
                .faces
                .iter()
                .map(|(&(p, l), x)| ((map_plane(p), l), x.clone()))
                .collect(),
            vertex_planes: self
                .vertex_planes
                .iter()
                .map(|(c, s)| (map_corner(*c), s.clone()))
                .collect(),
        }
    }
}

/// A completed cube with the residual of the automatically-satisfied new
/// polarity relations.
#[derive(Debug, Clone)]
pub struct CompletedCube {
    pub data: CubeData,
    pub new_polarity_residual: f64,
}

/// The three known corners of a level-1 face (all its corners except 7).
fn known_face_corners(plane: FacePlane, level: u8) -> Vec<Corner> {
    cube_face_corners(plane, level)
        .into_iter()
        .filter(|&c| c != 7)
        .collect()
}

/// Completes the eighth vertex and the three far faces of a polar-conjugate
/// cube, together with their planes: per the construction, the far face
/// planes are spans of the three known corner points, the far face points
/// are meets of the three known corner planes, and v₁₂₃ follows from the new
/// faces. All new polarity relations are verified and reported.
pub fn complete_polar_cube(data: &CubeData) -> Result<CompletedCube> {
    let input_res = data.polarity_residual()?;
    if input_res > 1e-8 {
        return Err(Error::InvalidInput(format!(
            "cube data violates the supplied polarity relations (residual {input_res:.3e})"
        )));
    }
    let mut out = data.clone();
    let mut new_face_planes: BTreeMap<FacePlane, ProjSubspace> = BTreeMap::new();
    for plane in FacePlane::ALL {
        let corners = known_face_corners(plane, 1);
        let pts: Result<Vec<HomVector>> = corners
            .iter()
            .map(|c| {
                data.vertices
                    .get(c)
                    .cloned()
                    .ok_or_else(|| Error::MissingCell(format!("cube corner {c}")))
            })
            .collect();
        let span = ProjSubspace::from_points(&pts?)?;
        if span.dim() != 2 {
            return Err(Error::degenerate(
                format!("far {plane:?} face plane is not 2-dimensional"),
                0.0,
            ));
        }
        let planes: Result<Vec<ProjSubspace>> = corners
            .iter()
            .map(|c| {
                data.vertex_planes
                    .get(c)
                    .cloned()
                    .ok_or_else(|| Error::MissingCell(format!("vertex plane at corner {c}")))
            })
            .collect();
        let point = meet_many(&planes?)?;
        if point.dim() != 0 {
            return Err(Error::degenerate(
                format!(
                    "meet of vertex planes for the far {plane:?} face has dimension {}",
                    point.dim()
                ),
                0.0,
            ));
        }
        out.faces.insert((plane, 1), point.to_point()?);
        new_face_planes.insert(plane, span);
    }
    // The eighth vertex: meet of the new face planes; its plane: span of the
    // new face points.
    let planes: Vec<ProjSubspace> = FacePlane::ALL
        .iter()
        .map(|p| new_face_planes[p].clone())
        .collect();
    let v123_space = meet_many(&planes)?;
    if v123_space.dim() != 0 {
        return Err(Error::degenerate(
            format!("meet of far face planes has dimension {}", v123_space.dim()),
            0.0,
        ));
    }
    let v123 = v123_space.to_point()?;
    out.vertices.insert(7, v123.clone());
    let new_pts: Vec<HomVector> = FacePlane::ALL
        .iter()
        .map(|p| out.faces[&(*p, 1)].clone())
        .collect();
    let v123_plane = ProjSubspace::from_points(&new_pts)?;
    out.vertex_planes.insert(7, v123_plane);
    // Verify the new polarity relations (automatic by the theorem).
    let mut worst = 0.0_f64;
    for plane in FacePlane::ALL {
        let xf = &out.faces[&(plane, 1)];
        for corner in cube_face_corners(plane, 1) {
            let xv = &out.vertices[&corner];
            worst = worst.max(inner(data.form, xv, xf)?.abs());
        }
    }
    Ok(CompletedCube {
        data: out,
        new_polarity_residual: worst,
    })
}

// ---------------------------------------------------------------------------
// Conjugate nets on ℤ³ and face-net completion
// ---------------------------------------------------------------------------

/// A net on a finite grid of ℤ³ (the 12-face family, indexed by lower
/// corners).
pub type GridNet3 = BTreeMap<[i64; 3], Vector3<f64>>;

/// Max quad-planarity residual of a ℤ³ net over all three quad families.
pub fn check_conjugate_net3(g: &GridNet3) -> f64 {
    let mut worst = 0.0_f64;
    for (&r, p00) in g {
        for (a, b) in [(0usize, 1usize), (0, 2), (1, 2)] {
            let mut ra = r;
            ra[a] += 1;
            let mut rb = r;
            rb[b] += 1;
            let mut rab = ra;
            rab[b] += 1;
            let (Some(pa), Some(pb), Some(pab)) = (g.get(&ra), g.get(&rb), g.get(&rab)) else {
                continue;
            };
            let m = nalgebra::Matrix3::from_rows(&[
                (pa - p00).transpose(),
                (pab - p00).transpose(),
                (pb - p00).transpose(),
            ]);
            let sv = m.svd(false, false).singular_values;
            if sv[0] > 0.0 {
                worst = worst.max(sv[2] / sv[0]);
            }
        }
    }
    worst
}

/// A conjugate face-net on ℤ³: projective values on all three face
/// families.
#[derive(Debug, Clone)]
pub struct FaceNet3D {
    pub values: BTreeMap<CellId3, HomVector>,
    /// Cells whose focal-line meet was a whole line (coincident tangent
    /// planes); they carry no value.
    pub degenerate: Vec<CellId3>,
}

impl FaceNet3D {
    pub fn get(&self, c: CellId3) -> Option<&HomVector> {
        self.values.get(&c)
    }

    /// Max coplanarity residual of the incident face values around
    /// vertices: stacked unit vectors of the available incident values must
    /// have rank 3 (σ₄/σ₁ over all 4-subsets is bounded by the full-stack
    /// residual, so the full stack is evaluated).
    pub fn vertex_coplanarity_residual(&self) -> f64 {
        let mut verts: BTreeMap<[i64; 3], Vec<&HomVector>> = BTreeMap::new();
        for (c, x) in &self.values {
            for v in face_vertices3(*c) {
                let CellId3::Vertex(r) = v else { unreachable!() };
                verts.entry(r).or_default().push(x);
            }
        }
        let mut worst = 0.0_f64;
        for pts in verts.values() {
            if pts.len() < 4 {
                continue;
            }
            let mut m = DMatrix::zeros(pts.len(), 4);
            for (i, x) in pts.iter().enumerate() {
                m.set_row(i, &x.coords().transpose());
            }
            let sv = m.svd(false, false).singular_values;
            if sv[0] > 0.0 {
                worst = worst.max(sv[3] / sv[0]);
            }
        }
        worst
    }
}

fn hom3(p: &Vector3<f64>) -> HomVector {
    HomVector::new(&[p.x, p.y, p.z, 1.0]).expect("finite point")
}

/// Completes a conjugate net on the 12-face family to a conjugate face-net
/// on all of F₃: 12-faces copy the input; 13- and 23-faces are the meets of
/// the focal lines through the shared-face pairs. Computed projectively, so
/// parallel focal lines meet at infinity; coincident tangent planes are
/// flagged as degenerate. Skew focal lines beyond tolerance mean the input
/// was not conjugate.
pub fn facenet_completion(g: &GridNet3) -> Result<FaceNet3D> {
    let conj = check_conjugate_net3(g);
    if conj > 1e-8 {
        return Err(Error::degenerate("input net is not conjugate", conj));
    }
    let mut values: BTreeMap<CellId3, HomVector> = BTreeMap::new();
    let mut degenerate = Vec::new();
    for (&r, p) in g {
        values.insert(CellId3::Face(FacePlane::P12, r), hom3(p));
    }
    // 13-face at r: lines through the 12-faces shared by the vertex pairs
    // (r, r+e1) and (r+e3, r+e1+e3): L = g(r−e2) ∨ g(r),
    // L₃ = g(r−e2+e3) ∨ g(r+e3).
    // 23-face at r: analogous with e1 and e2 exchanged.
    for (&r, _) in g {
        for (plane, shift_axis) in [(FacePlane::P13, 1usize), (FacePlane::P23, 0usize)] {
            let mut rm = r;
            rm[shift_axis] -= 1;
            let mut r3 = r;
            r3[2] += 1;
            let mut rm3 = rm;
            rm3[2] += 1;
            let (Some(a), Some(b), Some(c), Some(d)) =
                (g.get(&rm), g.get(&r), g.get(&rm3), g.get(&r3))
            else {
                continue;
            };
            let la = ProjSubspace::from_points(&[hom3(a), hom3(b)])?;
            let lb = ProjSubspace::from_points(&[hom3(c), hom3(d)])?;
            let cell = CellId3::Face(plane, r);
            if la.dim() < 1 || lb.dim() < 1 {
                degenerate.push(cell);
                continue;
            }
            let meet = crate::projective::meet(&la, &lb)?;
            match meet.dim() {
                0 => {
                    values.insert(cell, meet.to_point()?);
                }
                -1 => {
                    return Err(Error::degenerate(
                        format!("focal lines at {cell} are skew: input not conjugate"),
                        crate::projective::join(&la, &lb)?.dim() as f64,
                    ));
                }
                _ => degenerate.push(cell),
            }
        }
    }
    Ok(FaceNet3D { values, degenerate })
}

/// Restriction of a face-net to one family, re-indexed over ℤ³ and
/// dehomogenized; infinite values are skipped.
pub fn restrict_facenet(fnet: &FaceNet3D, plane: FacePlane) -> GridNet3 {
    let mut out = GridNet3::new();
    for (c, x) in &fnet.values {
        let CellId3::Face(p, r) = c else { continue };
        if *p != plane {
            continue;
        }
        let v = x.coords();
        if v[3].abs() > 1e-9 {
            out.insert(*r, Vector3::new(v[0] / v[3], v[1] / v[3], v[2] / v[3]));
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Euclidean ℤ³ binets and their checks
// ---------------------------------------------------------------------------

/// A Euclidean binet on the double lattice of ℤ³.
#[derive(Debug, Clone)]
pub struct Binet3 {
    pub window: Window3,
    pub points: BTreeMap<CellId3, Vector3<f64>>,
}

impl Binet3 {
    pub fn point(&self, c: CellId3) -> Result<Vector3<f64>> {
        self.points
            .get(&c)
            .copied()
            .ok_or_else(|| Error::MissingCell(c.to_string()))
    }

    /// Max orthogonality residual over all crosses of the window (six per
    /// interior edge): |⟨Δv, Δf⟩| / (|Δv|·|Δf|).
    pub fn orthogonality_residual(&self) -> f64 {
        let mut worst = 0.0_f64;
        for cross in self.window.crosses() {
            let (Some(pv), Some(pvp), Some(pf), Some(pfp)) = (
                self.points.get(&cross.v),
                self.points.get(&cross.vp),
                self.points.get(&cross.f),
                self.points.get(&cross.fp),
            ) else {
                continue;
            };
            let dv = pvp - pv;
            let df = pfp - pf;
            let (nv, nf) = (dv.norm(), df.norm());
            if nv > 1e-300 && nf > 1e-300 {
                worst = worst.max(dv.dot(&df).abs() / (nv * nf));
            }
        }
        worst
    }

    /// Max conjugacy residual: V-quads per face (planarity of the four
    /// corner points) and the face-net condition per vertex (coplanarity of
    /// the incident face points).
    pub fn conjugacy_residual(&self) -> f64 {
        let mut worst = 0.0_f64;
        for f in self.window.faces() {
            let pts: Option<Vec<Vector3<f64>>> = face_vertices3(f)
                .iter()
                .map(|v| self.points.get(v).copied())
                .collect();
            let Some(p) = pts else { continue };
            let m = nalgebra::Matrix3::from_rows(&[
                (p[1] - p[0]).transpose(),
                (p[2] - p[0]).transpose(),
                (p[3] - p[0]).transpose(),
            ]);
            let sv = m.svd(false, false).singular_values;
            if sv[0] > 0.0 {
                worst = worst.max(sv[2] / sv[0]);
            }
        }
        for v in self.window.vertices() {
            let pts: Vec<Vector3<f64>> = vertex_faces3(v)
                .into_iter()
                .filter_map(|f| self.points.get(&f).copied())
                .collect();
            if pts.len() < 4 {
                continue;
            }
            let centroid = pts.iter().sum::<Vector3<f64>>() / pts.len() as f64;
            let mut m = DMatrix::zeros(pts.len(), 3);
            for (i, p) in pts.iter().enumerate() {
                m.set_row(i, &(p - centroid).transpose());
            }
            let sv = m.svd(false, false).singular_values;
            if sv[0] > 0.0 {
                worst = worst.max(sv[2] / sv[0]);
            }
        }
        worst
    }
}

// ---------------------------------------------------------------------------
// Lift-side ℤ³ state and the principal extension
// ---------------------------------------------------------------------------

/// Polar-conjugate lift data on (a subset of) the double lattice of ℤ³.
#[derive(Debug, Clone)]
pub struct PolarState {
    pub window: Window3,
    pub points: BTreeMap<CellId3, HomVector>,
    pub planes: BTreeMap<CellId3, ProjSubspace>,
}

impl PolarState {
    /// Max |⟨·,·⟩_Q| over present incident pairs.
    pub fn polarity_residual(&self) -> Result<f64> {
        let mut worst = 0.0_f64;
        for f in self.window.faces() {
            let Some(xf) = self.points.get(&f) else { continue };
            for v in face_vertices3(f) {
                if let Some(xv) = self.points.get(&v) {
                    worst = worst.max(inner(QuadricForm::Moebius, xv, xf)?.abs());
                }
            }
        }
        Ok(worst)
    }

    /// Lazily computed vertex plane: span of the present incident face
    /// values (at least 3 required, coplanar for valid data), stored on
    /// first computation. The extension sweep stays one cube away from the
    /// window boundary exactly so that this is always determined.
    fn ensure_vertex_plane(&mut self, v: CellId3) -> Result<ProjSubspace> {
        if let Some(p) = self.planes.get(&v) {
            return Ok(p.clone());
        }
        let pts: Vec<HomVector> = vertex_faces3(v)
            .into_iter()
            .filter_map(|f| self.points.get(&f).cloned())
            .collect();
        if pts.len() < 3 {
            return Err(Error::MissingCell(format!(
                "{v}: only {} incident faces known, plane undetermined",
                pts.len()
            )));
        }
        let span = ProjSubspace::from_points_with_tol(&pts, 1e-7)?;
        if span.dim() != 2 {
            return Err(Error::degenerate(
                format!("incident faces of {v} do not span a plane (dim {})", span.dim()),
                0.0,
            ));
        }
        self.planes.insert(v, span.clone());
        Ok(span)
    }

    /// Euclidean projection of the points inside `window`; values at
    /// infinity are reported as an error naming the cell.
    pub fn project_window(&self, window: Window3) -> Result<Binet3> {
        let mut points = BTreeMap::new();
        for (c, x) in &self.points {
            if !window.contains(*c) {
                continue;
            }
            let p = project_moebius(x).map_err(|_| Error::AtInfinity {
                detail: format!("{c} projects to infinity"),
            })?;
            points.insert(*c, p);
        }
        Ok(Binet3 { window, points })
    }

    /// The cube data of the unit cube at `base` with the far data hidden:
    /// seven vertices, three level-0 faces and the six mixed vertex planes.
    pub fn cube_data(&mut self, base: [i64; 3]) -> Result<CubeData> {
        let mut vertices = BTreeMap::new();
        for corner in 0u8..7 {
            let r = [
                base[0] + (corner & 1) as i64,
                base[1] + ((corner >> 1) & 1) as i64,
                base[2] + ((corner >> 2) & 1) as i64,
            ];
            vertices.insert(
                corner,
                self.points
                    .get(&CellId3::Vertex(r))
                    .cloned()
                    .ok_or_else(|| Error::MissingCell(format!("cube vertex {r:?}")))?,
            );
        }
        let mut faces = BTreeMap::new();
        for plane in FacePlane::ALL {
            let cell = CellId3::Face(plane, base);
            faces.insert(
                (plane, 0u8),
                self.points
                    .get(&cell)
                    .cloned()
                    .ok_or_else(|| Error::MissingCell(cell.to_string()))?,
            );
        }
        let mut vertex_planes = BTreeMap::new();
        for corner in [1u8, 2, 3, 4, 5, 6] {
            let r = [
                base[0] + (corner & 1) as i64,
                base[1] + ((corner >> 1) & 1) as i64,
                base[2] + ((corner >> 2) & 1) as i64,
            ];
            vertex_planes.insert(corner, self.ensure_vertex_plane(CellId3::Vertex(r))?);
        }
        Ok(CubeData {
            form: QuadricForm::Moebius,
            vertices,
            faces,
            vertex_planes,
        })
    }
}

/// Principal binets on the three coordinate-plane slices sharing their axes:
/// slice12 on (i,j,0), slice13 on (i,0,k), slice23 on (0,j,k). Each is a 2D
/// binet whose window coordinates are the two free lattice directions.
#[derive(Debug, Clone)]
pub struct InitialSlices {
    pub slice12: Binet,
    pub slice13: Binet,
    pub slice23: Binet,
}

impl InitialSlices {
    pub fn dims(&self) -> Result<(usize, usize, usize)> {
        let (m, n) = self.slice12.window().vertex_counts();
        let (m2, p) = self.slice13.window().vertex_counts();
        let (n2, p2) = self.slice23.window().vertex_counts();
        if m != m2 || n != n2 || p != p2 {
            return Err(Error::InvalidInput(
                "slice windows do not agree on the shared axes".into(),
            ));
        }
        Ok((m, n, p))
    }

    /// The 3D cells covered by the slices with their Euclidean values.
    /// Fails if shared axis values disagree.
    fn collect(&self) -> Result<BTreeMap<CellId3, Vector3<f64>>> {
        let (_m, _n, _p) = self.dims()?;
        let mut out: BTreeMap<CellId3, Vector3<f64>> = BTreeMap::new();
        let mut insert = |c: CellId3, p: Vector3<f64>| -> Result<()> {
            if let Some(old) = out.get(&c) {
                if (old - p).norm() > 1e-9 * (1.0 + p.norm()) {
                    return Err(Error::InvalidInput(format!(
                        "shared axis value at {c} differs between slices"
                    )));
                }
            } else {
                out.insert(c, p);
            }
            Ok(())
        };
        for (cell, p) in self.slice12.cells() {
            let (a, b) = cell.coords();
            match cell {
                crate::lattice::CellId::Vertex(_, _) => {
                    insert(CellId3::Vertex([a, b, 0]), *p)?
                }
                crate::lattice::CellId::Face(_, _) => {
                    insert(CellId3::Face(FacePlane::P12, [a, b, 0]), *p)?
                }
            }
        }
        for (cell, p) in self.slice13.cells() {
            let (a, c) = cell.coords();
            match cell {
                crate::lattice::CellId::Vertex(_, _) => {
                    insert(CellId3::Vertex([a, 0, c]), *p)?
                }
                crate::lattice::CellId::Face(_, _) => {
                    insert(CellId3::Face(FacePlane::P13, [a, 0, c]), *p)?
                }
            }
        }
        for (cell, p) in self.slice23.cells() {
            let (b, c) = cell.coords();
            match cell {
                crate::lattice::CellId::Vertex(_, _) => {
                    insert(CellId3::Vertex([0, b, c]), *p)?
                }
                crate::lattice::CellId::Face(_, _) => {
                    insert(CellId3::Face(FacePlane::P23, [0, b, c]), *p)?
                }
            }
        }
        Ok(out)
    }
}

/// Result of the ℤ³ extension: the Euclidean binet, the lift-side state and
/// the residual of the initial lift's polarity.
#[derive(Debug)]
pub struct Extension3 {
    pub binet: Binet3,
    pub state: PolarState,
    pub initial_polarity_residual: f64,
}

/// Extends three compatible principal slices to a principal binet: lifts
/// the initial data with a global additive potential, runs the polar cube
/// completion cube-by-cube and projects back. The outermost slice layer is
/// consumed as boundary data (it stands in for the infinite lattice's
/// neighbours), so slices with m×n, m×p, n×p vertices produce a binet on
/// the (m−1)×(n−1)×(p−1) window. The sweep nests the axes in the order
/// given by `sweep` (a permutation of [0,1,2]; the result is
/// sweep-independent for consistent data).
pub fn extend_principal_to_z3_swept(
    slices: &InitialSlices,
    rho0: f64,
    tol: f64,
    sweep: [usize; 3],
) -> Result<Extension3> {
    let (m, n, p) = slices.dims()?;
    for (name, slice) in [
        ("slice12", &slices.slice12),
        ("slice13", &slices.slice13),
        ("slice23", &slices.slice23),
    ] {
        let conj = check_conjugate(slice, tol);
        let orth = check_orthogonal(slice, tol)?;
        if !conj.pass() || !orth.pass() {
            return Err(Error::CheckFailed {
                check: "principal (required of initial slices)",
                worst: format!("{name}"),
                residual: conj.max_residual().max(orth.max_residual()),
                tol,
            });
        }
    }
    let euclidean = slices.collect()?;
    // Global additive potential over the union incidence graph.
    let mut edges: Vec<(CellId3, CellId3, f64)> = Vec::new();
    for (c, pf) in &euclidean {
        let CellId3::Face(_, _) = c else { continue };
        for v in face_vertices3(*c) {
            if let Some(pv) = euclidean.get(&v) {
                edges.push((v, *c, pv.dot(pf)));
            }
        }
    }
    let rho = solve_on_graph(&edges, rho0, |w, prev| Ok(w - prev))?;
    let window = Window3::new(m, n, p);
    let mut state = PolarState {
        window,
        points: BTreeMap::new(),
        planes: BTreeMap::new(),
    };
    for (c, pt) in &euclidean {
        let r = rho
            .get(c)
            .ok_or_else(|| Error::MissingCell(format!("{c} disconnected from the potential")))?;
        state.points.insert(*c, moebius_point_lift(pt, *r));
    }
    let initial_polarity_residual = state.polarity_residual()?;
    if initial_polarity_residual > tol {
        return Err(Error::CheckFailed {
            check: "shared-axes consistency (global lift polarity)",
            worst: "initial slice union".into(),
            residual: initial_polarity_residual,
            tol,
        });
    }
    // Cube sweep over the inner cubes only: any nesting order of the three
    // axes is a linear extension of the dependency order. Staying one cube
    // away from the outer slice boundary keeps every needed vertex plane
    // determined by at least three known faces.
    let lims = [m as i64 - 2, n as i64 - 2, p as i64 - 2];
    let mut order: Vec<[i64; 3]> = Vec::new();
    let (a0, a1, a2) = (sweep[0], sweep[1], sweep[2]);
    let mut idx = [0i64; 3];
    for x0 in 0..lims[a0] {
        for x1 in 0..lims[a1] {
            for x2 in 0..lims[a2] {
                idx[a0] = x0;
                idx[a1] = x1;
                idx[a2] = x2;
                order.push(idx);
            }
        }
    }
    for base in order {
        let data = state.cube_data(base)?;
        let completed = complete_polar_cube(&data)?;
        let v123 = [base[0] + 1, base[1] + 1, base[2] + 1];
        state
            .points
            .insert(CellId3::Vertex(v123), completed.data.vertices[&7].clone());
        state
            .planes
            .insert(CellId3::Vertex(v123), completed.data.vertex_planes[&7].clone());
        for plane in FacePlane::ALL {
            let (a, b) = plane.axes();
            let other = 3 - a - b;
            let mut r = base;
            r[other] += 1;
            let cell = CellId3::Face(plane, r);
            state
                .points
                .insert(cell, completed.data.faces[&(plane, 1)].clone());
            // Face plane: span of the face's four vertex points, of which
            // three were the construction span; stored for later meets.
            let corners = known_face_corners(plane, 1);
            let pts: Vec<HomVector> = corners
                .iter()
                .map(|c| completed.data.vertices[c].clone())
                .collect();
            state.planes.insert(cell, ProjSubspace::from_points(&pts)?);
        }
    }
    let output = Window3::new(m - 1, n - 1, p - 1);
    let binet = state.project_window(output)?;
    Ok(Extension3 {
        binet,
        state,
        initial_polarity_residual,
    })
}

/// [`extend_principal_to_z3_swept`] with the default lexicographic sweep.
pub fn extend_principal_to_z3(slices: &InitialSlices, rho0: f64, tol: f64) -> Result<Extension3> {
    extend_principal_to_z3_swept(slices, rho0, tol, [2, 1, 0])
}

// ---------------------------------------------------------------------------
// Slice generation (in the lift)
// ---------------------------------------------------------------------------

/// Affine representative with x₅ − x₄ = 1.
fn affine_rep(x: &HomVector) -> Result<DVector<f64>> {
    let c = x.coords();
    let w = c[4] - c[3];
    if w.abs() <= 1e-9 {
        return Err(Error::AtInfinity {
            detail: "no affine representative".into(),
        });
    }
    Ok(c / w)
}

/// A seeded random point of a subspace staying inside the affine chart.
fn random_point_in(
    sub: &ProjSubspace,
    rng: &mut ChaCha8Rng,
    spread: f64,
) -> Result<HomVector> {
    for _ in 0..200 {
        let mut v = DVector::zeros(sub.ambient_dim() + 1);
        for i in 0..sub.basis().nrows() {
            let c: f64 = rng.gen_range(-1.0..1.0) * spread;
            v += sub.basis().row(i).transpose() * c;
        }
        if v.norm() < 1e-9 {
            continue;
        }
        let x = HomVector::from_dvector(v)?;
        let c = x.coords();
        if (c[4] - c[3]).abs() > 0.05 {
            return Ok(x);
        }
    }
    Err(Error::degenerate(
        "could not draw a chart-compatible point in the subspace",
        0.0,
    ))
}


/// Meet of the conjugacy plane with the polar space of the known incident
/// faces. Interior targets are determined uniquely; boundary targets (fewer
/// faces) leave a line of valid choices, resolved by a seeded draw.
fn propagate_slice_vertex(
    pi: &ProjSubspace,
    pol: &ProjSubspace,
    rng: &mut ChaCha8Rng,
    what: &str,
) -> Result<HomVector> {
    let meet = crate::projective::meet(pi, pol)?;
    if std::env::var("BINETS_DEBUG").is_ok() {
        let ann_pi = pi.complement();
        let ann_pol = pol.complement();
        let mut m = DMatrix::zeros(ann_pi.basis().nrows() + ann_pol.basis().nrows(), 5);
        m.rows_mut(0, ann_pi.basis().nrows()).copy_from(ann_pi.basis());
        m.rows_mut(ann_pi.basis().nrows(), ann_pol.basis().nrows())
            .copy_from(ann_pol.basis());
        let sv = m.svd(false, false).singular_values;
        eprintln!(
            "{what}: pi dim {}, pol dim {}, meet dim {}, stack sv {:?}",
            pi.dim(),
            pol.dim(),
            meet.dim(),
            sv.as_slice()
        );
    }
    match meet.dim() {
        0 => {
            let x = meet.to_point()?;
            if std::env::var("BINETS_DEBUG").is_ok() {
                eprintln!("  {what}: dist pi {:.2e} pol {:.2e}", pi.distance(&x), pol.distance(&x));
            }
            Ok(x)
        }
        // Boundary and corner targets keep 1- or 2-dimensional freedom
        // (fewer incident faces constrain them); any chart-compatible point
        // of the meet is valid data.
        1 | 2 => {
            let x = random_point_in(&meet, rng, 1.0)?;
            if std::env::var("BINETS_DEBUG").is_ok() {
                eprintln!("  {what}: dist pi {:.2e} pol {:.2e}", pi.distance(&x), pol.distance(&x));
            }
            Ok(x)
        }
        d => Err(Error::degenerate(
            format!("{what}: meet has dimension {d}"),
            d as f64,
        )),
    }
}

/// Conjugate ℝP⁴ face net on a 2D grid, generated around the lift of a flat
/// grid: axis rows with noisy steps, interior points as affine combinations
/// of the three predecessors (keeping the quads exactly coplanar).
fn generate_lift_facenet(
    rng: &mut ChaCha8Rng,
    cols: usize,
    rows: usize,
    base: impl Fn(i64, i64) -> Vector3<f64>,
    noise: f64,
) -> Result<BTreeMap<(i64, i64), HomVector>> {
    let mut raw: BTreeMap<(i64, i64), DVector<f64>> = BTreeMap::new();
    let mut put = |k: (i64, i64), v: DVector<f64>| {
        raw.insert(k, v);
    };
    for a in 0..cols as i64 {
        for b in 0..rows as i64 {
            if a > 0 && b > 0 {
                continue;
            }
            let p = base(a, b);
            let p = Vector3::new(
                p.x + noise * rng.gen_range(-1.0..1.0),
                p.y + noise * rng.gen_range(-1.0..1.0),
                p.z + noise * rng.gen_range(-1.0..1.0),
            );
            let rho = rng.gen_range(-0.3..0.3);
            put((a, b), affine_rep(&moebius_point_lift(&p, rho))?);
        }
    }
    for a in 1..cols as i64 {
        for b in 1..rows as i64 {
            let p00 = raw[&(a - 1, b - 1)].clone();
            let p10 = raw[&(a, b - 1)].clone();
            let p01 = raw[&(a - 1, b)].clone();
            let alpha = 1.0 + noise * rng.gen_range(-1.0..1.0);
            let beta = 1.0 + noise * rng.gen_range(-1.0..1.0);
            let v = &p00 + (&p10 - &p00) * alpha + (&p01 - &p00) * beta;
            raw.insert((a, b), v);
        }
    }
    raw.into_iter()
        .map(|(k, v)| HomVector::from_dvector(v).map(|x| (k, x)))
        .collect()
}

/// Base for the generated initial slices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SliceBase {
    /// Random conjugate lift data around a flat grid.
    Random,
    /// Slice12 is the canonical lift of a revolution binet.
    Revolution,
}

/// Generates three mutually compatible principal slices by building a
/// polar-conjugate configuration in the Möbius model: slice12 first, then
/// the 13- and 23-face nets constrained by coplanarity around the shared
/// axes and polarity against the fixed axis points, then the remaining
/// vertex points on their polar lines.
pub fn generate_initial_slices(
    seed: u64,
    m: usize,
    n: usize,
    p: usize,
    base: SliceBase,
) -> Result<InitialSlices> {
    if m < 3 || n < 3 || p < 3 {
        return Err(Error::InvalidInput(
            "slice generation needs at least 3 vertices per axis".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = 0.12;

    // --- slice12 lift: face net + vertex points -------------------------
    let g12: BTreeMap<(i64, i64), HomVector> = match base {
        SliceBase::Random => generate_lift_facenet(
            &mut rng,
            m - 1,
            n - 1,
            |a, b| Vector3::new(a as f64 + 0.5, b as f64 + 0.5, 0.0),
            noise,
        )?,
        SliceBase::Revolution => {
            let profile = crate::construct::ProfileCurve::new(
                (0..n)
                    .map(|j| (1.0 + 0.12 * j as f64 + 0.02 * (j * j) as f64, 0.7 * j as f64))
                    .collect(),
                0.45,
                m,
            )?;
            let rev = crate::construct::revolution_binet(&profile)?;
            let (rho, _res) = crate::lifts::solve_additive_potential(&rev, 0.4)?;
            let mut out = BTreeMap::new();
            for f in rev.window().faces() {
                let (a, b) = f.coords();
                out.insert((a, b), moebius_point_lift(rev.get(f).unwrap(), rho[&f]));
            }
            out
        }
    };
    let mut v12: BTreeMap<(i64, i64), HomVector> = BTreeMap::new();
    match base {
        SliceBase::Revolution => {
            let profile = crate::construct::ProfileCurve::new(
                (0..n)
                    .map(|j| (1.0 + 0.12 * j as f64 + 0.02 * (j * j) as f64, 0.7 * j as f64))
                    .collect(),
                0.45,
                m,
            )?;
            let rev = crate::construct::revolution_binet(&profile)?;
            let (rho, _res) = crate::lifts::solve_additive_potential(&rev, 0.4)?;
            for v in rev.window().vertices() {
                let (a, b) = v.coords();
                v12.insert((a, b), moebius_point_lift(rev.get(v).unwrap(), rho[&v]));
            }
        }
        SliceBase::Random => {
            // Axis vertex points on the polar of their present faces, then
            // the interior by conjugacy-plane ∩ polar-line propagation.
            let faces_around = |i: i64, j: i64| -> Vec<HomVector> {
                [(i - 1, j - 1), (i, j - 1), (i - 1, j), (i, j)]
                    .iter()
                    .filter_map(|k| g12.get(k).cloned())
                    .collect()
            };
            for i in 0..m as i64 {
                let fs = faces_around(i, 0);
                let pol = polar(QuadricForm::Moebius, &ProjSubspace::from_points(&fs)?)?;
                v12.insert((i, 0), random_point_in(&pol, &mut rng, 1.0)?);
            }
            for j in 1..n as i64 {
                let fs = faces_around(0, j);
                let pol = polar(QuadricForm::Moebius, &ProjSubspace::from_points(&fs)?)?;
                v12.insert((0, j), random_point_in(&pol, &mut rng, 1.0)?);
            }
            for i in 1..m as i64 {
                for j in 1..n as i64 {
                    let pi = ProjSubspace::from_points(&[
                        v12[&(i - 1, j - 1)].clone(),
                        v12[&(i, j - 1)].clone(),
                        v12[&(i - 1, j)].clone(),
                    ])?;
                    let fs = faces_around(i, j);
                    let pol = polar(QuadricForm::Moebius, &ProjSubspace::from_points(&fs)?)?;
                    let x = propagate_slice_vertex(
                        &pi,
                        &pol,
                        &mut rng,
                        &format!("slice12 at ({i},{j})"),
                    )?;
                    v12.insert((i, j), x);
                }
            }
        }
    }

    // --- the two other face nets, constrained along the shared axes -----
    // g13 on (a, c): first row (c = 0) in the span of the neighbouring
    // 12-faces and the previous 13-face, and polar to the far axis vertex.
    let mut g13: BTreeMap<(i64, i64), HomVector> = BTreeMap::new();
    {
        let pol0 = meet_many(&[
            polar(QuadricForm::Moebius, &ProjSubspace::from_point(&v12[&(0, 0)]))?,
            polar(QuadricForm::Moebius, &ProjSubspace::from_point(&v12[&(1, 0)]))?,
        ])?;
        g13.insert((0, 0), random_point_in(&pol0, &mut rng, 1.0)?);
        for a in 1..(m as i64 - 1) {
            let span = ProjSubspace::from_points(&[
                g12[&(a - 1, 0)].clone(),
                g12[&(a, 0)].clone(),
                g13[&(a - 1, 0)].clone(),
            ])?;
            let pol = polar(
                QuadricForm::Moebius,
                &ProjSubspace::from_point(&v12[&(a + 1, 0)]),
            )?;
            let line = crate::projective::meet(&span, &pol)?;
            if line.dim() != 1 {
                return Err(Error::degenerate(
                    format!("13-face row constraint degenerate at a = {a}"),
                    line.dim() as f64,
                ));
            }
            g13.insert((a, 0), random_point_in(&line, &mut rng, 1.0)?);
        }
        // Free column a = 0 along the new direction, then conjugate
        // interior.
        for c in 1..(p as i64 - 1) {
            let prev = affine_rep(&g13[&(0, c - 1)])?;
            let mut step = DVector::zeros(5);
            step[2] = 1.0; // march in +e3
            for k in 0..3 {
                step[k] += noise * rng.gen_range(-1.0..1.0);
            }
            step[3] += 0.4 * rng.gen_range(-1.0..1.0);
            step[4] = step[3];
            g13.insert((0, c), HomVector::from_dvector(prev + step)?);
        }
        for a in 1..(m as i64 - 1) {
            for c in 1..(p as i64 - 1) {
                let p00 = affine_rep(&g13[&(a - 1, c - 1)])?;
                let p10 = affine_rep(&g13[&(a, c - 1)])?;
                let p01 = affine_rep(&g13[&(a - 1, c)])?;
                let alpha = 1.0 + noise * rng.gen_range(-1.0..1.0);
                let beta = 1.0 + noise * rng.gen_range(-1.0..1.0);
                let v = &p00 + (&p10 - &p00) * alpha + (&p01 - &p00) * beta;
                g13.insert((a, c), HomVector::from_dvector(v)?);
            }
        }
    }
    // z-axis vertex points: polar to the present 13-faces around them.
    let mut vz: BTreeMap<i64, HomVector> = BTreeMap::new();
    vz.insert(0, v12[&(0, 0)].clone());
    for k in 1..p as i64 {
        let fs: Vec<HomVector> = [(0i64, k - 1), (0, k)]
            .iter()
            .filter_map(|&(a, c)| g13.get(&(a, c)).cloned())
            .collect();
        let pol = polar(QuadricForm::Moebius, &ProjSubspace::from_points(&fs)?)?;
        vz.insert(k, random_point_in(&pol, &mut rng, 1.0)?);
    }
    // g23 on (b, c): row (c = 0) constrained around the y-axis, column
    // (b = 0) constrained around the z-axis.
    let mut g23: BTreeMap<(i64, i64), HomVector> = BTreeMap::new();
    {
        let pol0 = meet_many(&[
            polar(QuadricForm::Moebius, &ProjSubspace::from_point(&v12[&(0, 0)]))?,
            polar(QuadricForm::Moebius, &ProjSubspace::from_point(&v12[&(0, 1)]))?,
            polar(QuadricForm::Moebius, &ProjSubspace::from_point(&vz[&1]))?,
        ])?;
        g23.insert((0, 0), random_point_in(&pol0, &mut rng, 1.0)?);
        for b in 1..(n as i64 - 1) {
            let span = ProjSubspace::from_points(&[
                g12[&(0, b - 1)].clone(),
                g12[&(0, b)].clone(),
                g23[&(b - 1, 0)].clone(),
            ])?;
            let pol = polar(
                QuadricForm::Moebius,
                &ProjSubspace::from_point(&v12[&(0, b + 1)]),
            )?;
            let line = crate::projective::meet(&span, &pol)?;
            if line.dim() != 1 {
                return Err(Error::degenerate(
                    format!("23-face row constraint degenerate at b = {b}"),
                    line.dim() as f64,
                ));
            }
            g23.insert((b, 0), random_point_in(&line, &mut rng, 1.0)?);
        }
        for c in 1..(p as i64 - 1) {
            let span = ProjSubspace::from_points(&[
                g13[&(0, c - 1)].clone(),
                g13[&(0, c)].clone(),
                g23[&(0, c - 1)].clone(),
            ])?;
            let pol = polar(QuadricForm::Moebius, &ProjSubspace::from_point(&vz[&(c + 1)]))?;
            let line = crate::projective::meet(&span, &pol)?;
            if line.dim() != 1 {
                return Err(Error::degenerate(
                    format!("23-face column constraint degenerate at c = {c}"),
                    line.dim() as f64,
                ));
            }
            g23.insert((0, c), random_point_in(&line, &mut rng, 1.0)?);
        }
        for b in 1..(n as i64 - 1) {
            for c in 1..(p as i64 - 1) {
                let p00 = affine_rep(&g23[&(b - 1, c - 1)])?;
                let p10 = affine_rep(&g23[&(b, c - 1)])?;
                let p01 = affine_rep(&g23[&(b - 1, c)])?;
                let alpha = 1.0 + noise * rng.gen_range(-1.0..1.0);
                let beta = 1.0 + noise * rng.gen_range(-1.0..1.0);
                let v = &p00 + (&p10 - &p00) * alpha + (&p01 - &p00) * beta;
                g23.insert((b, c), HomVector::from_dvector(v)?);
            }
        }
    }

    // --- interiors of the 13- and 23-slices ------------------------------
    let mut v13: BTreeMap<(i64, i64), HomVector> = BTreeMap::new();
    for i in 0..m as i64 {
        v13.insert((i, 0), v12[&(i, 0)].clone());
    }
    for k in 1..p as i64 {
        v13.insert((0, k), vz[&k].clone());
    }
    for i in 1..m as i64 {
        for k in 1..p as i64 {
            let pi = ProjSubspace::from_points(&[
                v13[&(i - 1, k - 1)].clone(),
                v13[&(i, k - 1)].clone(),
                v13[&(i - 1, k)].clone(),
            ])?;
            let fs: Vec<HomVector> = [(i - 1, k - 1), (i, k - 1), (i - 1, k), (i, k)]
                .iter()
                .filter_map(|kk| g13.get(kk).cloned())
                .collect();
            let pol = polar(QuadricForm::Moebius, &ProjSubspace::from_points(&fs)?)?;
            let x = propagate_slice_vertex(&pi, &pol, &mut rng, &format!("slice13 at ({i},{k})"))?;
            v13.insert((i, k), x);
        }
    }
    let mut v23: BTreeMap<(i64, i64), HomVector> = BTreeMap::new();
    for j in 0..n as i64 {
        v23.insert((j, 0), v12[&(0, j)].clone());
    }
    for k in 1..p as i64 {
        v23.insert((0, k), vz[&k].clone());
    }
    for j in 1..n as i64 {
        for k in 1..p as i64 {
            let pi = ProjSubspace::from_points(&[
                v23[&(j - 1, k - 1)].clone(),
                v23[&(j, k - 1)].clone(),
                v23[&(j - 1, k)].clone(),
            ])?;
            let fs: Vec<HomVector> = [(j - 1, k - 1), (j, k - 1), (j - 1, k), (j, k)]
                .iter()
                .filter_map(|kk| g23.get(kk).cloned())
                .collect();
            let pol = polar(QuadricForm::Moebius, &ProjSubspace::from_points(&fs)?)?;
            let x = propagate_slice_vertex(&pi, &pol, &mut rng, &format!("slice23 at ({j},{k})"))?;
            v23.insert((j, k), x);
        }
    }

    if std::env::var("BINETS_DEBUG").is_ok() {
        let report = |name: &str,
                      cols: usize,
                      rows: usize,
                      verts: &BTreeMap<(i64, i64), HomVector>,
                      faces: &BTreeMap<(i64, i64), HomVector>| {
            let mut worst = 0.0_f64;
            let mut at = String::new();
            for (&(a, c), xf) in faces {
                for (da, dc) in [(0i64, 0i64), (1, 0), (1, 1), (0, 1)] {
                    if let Some(xv) = verts.get(&(a + da, c + dc)) {
                        let ip = inner(QuadricForm::Moebius, xv, xf).unwrap().abs();
                        if ip > worst {
                            worst = ip;
                            at = format!("v({},{}) f({a},{c})", a + da, c + dc);
                        }
                    }
                }
            }
            eprintln!("generation lift {name} ({cols}x{rows}): worst polarity {worst:.3e} at {at}");
        };
        report("slice12", m, n, &v12, &g12);
        report("slice13", m, p, &v13, &g13);
        report("slice23", n, p, &v23, &g23);
    }

    // --- project to Euclidean slices -------------------------------------
    let build = |cols: usize,
                 rows: usize,
                 verts: &BTreeMap<(i64, i64), HomVector>,
                 faces: &BTreeMap<(i64, i64), HomVector>|
     -> Result<Binet> {
        let w = crate::lattice::Window::sized(cols, rows);
        let mut b = Binet::new(w);
        for (&(a, c), x) in verts {
            b.set(crate::lattice::CellId::Vertex(a, c), project_moebius(x)?);
        }
        for (&(a, c), x) in faces {
            b.set(crate::lattice::CellId::Face(a, c), project_moebius(x)?);
        }
        Ok(b)
    };
    Ok(InitialSlices {
        slice12: build(m, n, &v12, &g12)?,
        slice13: build(m, p, &v13, &g13)?,
        slice23: build(n, p, &v23, &g23)?,
    })
}

/// Seeded conjugate net on the [0,n)³ grid of ℤ³: the three coordinate
/// planes are noisy 2D conjugate propagations sharing their axes, and each
/// interior point is the common point of the three planarity planes of its
/// backward quads (three generic planes in space meet in exactly one point,
/// so the interior is determined).
pub fn generate_conjugate_net3(seed: u64, n: usize, noise: f64) -> Result<GridNet3> {
    use crate::nets::{meet_planes, Plane};
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nn = n as i64;
    let mut g = GridNet3::new();
    let mut rv = |s: f64| {
        Vector3::new(
            rng.gen_range(-1.0..1.0) * s,
            rng.gen_range(-1.0..1.0) * s,
            rng.gen_range(-1.0..1.0) * s,
        )
    };
    g.insert([0, 0, 0], rv(0.3));
    let e = [
        Vector3::new(1.0, 0.0, 0.0),
        Vector3::new(0.0, 1.0, 0.0),
        Vector3::new(0.0, 0.0, 1.0),
    ];
    // Axes.
    for axis in 0..3 {
        for t in 1..nn {
            let mut prev = [0i64; 3];
            prev[axis] = t - 1;
            let mut cur = prev;
            cur[axis] = t;
            let p = g[&prev] + e[axis] + rv(noise);
            g.insert(cur, p);
        }
    }
    // Coordinate planes: conjugate 2D propagation.
    for (a, b) in [(0usize, 1usize), (0, 2), (1, 2)] {
        for ta in 1..nn {
            for tb in 1..nn {
                let mut r = [0i64; 3];
                r[a] = ta;
                r[b] = tb;
                let mut r00 = r;
                r00[a] -= 1;
                r00[b] -= 1;
                let mut r10 = r;
                r10[b] -= 1;
                let mut r01 = r;
                r01[a] -= 1;
                let (p00, p10, p01) = (g[&r00], g[&r10], g[&r01]);
                let alpha = 1.0 + noise * rng.gen_range(-1.0..1.0);
                let beta = 1.0 + noise * rng.gen_range(-1.0..1.0);
                g.insert(r, p00 + alpha * (p10 - p00) + beta * (p01 - p00));
            }
        }
    }
    // Interior: common point of the three backward planarity planes.
    for i in 1..nn {
        for j in 1..nn {
            for k in 1..nn {
                let r = [i, j, k];
                let mut planes = Vec::new();
                for (a, b) in [(0usize, 1usize), (0, 2), (1, 2)] {
                    let mut r00 = r;
                    r00[a] -= 1;
                    r00[b] -= 1;
                    let mut r10 = r;
                    r10[b] -= 1;
                    let mut r01 = r;
                    r01[a] -= 1;
                    let (p00, p10, p01) = (g[&r00], g[&r10], g[&r01]);
                    let normal = (p10 - p00).cross(&(p01 - p00));
                    planes.push(Plane::through_point(p00, normal)?);
                }
                g.insert(r, meet_planes(&planes, f64::INFINITY)?);
            }
        }
    }
    Ok(g)
}

/// Builds the two symmetric completions (g, ⌈h⌉) and (h, ⌈g⌉) of a pair of
/// conjugate ℤ³ nets and reports their principal-check statuses
/// (conjugate ∧ orthogonal at `tol`); by the symmetry theorem the statuses
/// agree. Swapping the roles re-keys the face family by −(1,1,0), matching
/// the lower-corner indexing of faces against vertices.
pub fn check_symmetric_completion(
    g: &GridNet3,
    h: &GridNet3,
    dims: (usize, usize, usize),
    tol: f64,
) -> Result<(bool, bool)> {
    let status = |verts: &GridNet3, faces: &GridNet3| -> Result<bool> {
        let completion = facenet_completion(faces)?;
        let window = Window3::new(dims.0, dims.1, dims.2);
        let mut points = BTreeMap::new();
        for (&r, p) in verts {
            points.insert(CellId3::Vertex(r), *p);
        }
        for (c, x) in &completion.values {
            let v = x.coords();
            if v[3].abs() > 1e-9 {
                points.insert(*c, Vector3::new(v[0] / v[3], v[1] / v[3], v[2] / v[3]));
            }
        }
        let b = Binet3 { window, points };
        Ok(b.conjugacy_residual() <= tol && b.orthogonality_residual() <= tol)
    };
    let g_shifted: GridNet3 = g
        .iter()
        .map(|(&r, &p)| ([r[0] - 1, r[1] - 1, r[2]], p))
        .collect();
    Ok((status(g, h)?, status(h, &g_shifted)?))
}
