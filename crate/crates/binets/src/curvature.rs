//! Derived geometry of principal binets: the normal bicongruence, focal
//! binets, per-cell circles and cones, and principal curvature spheres
//! computed both through the Möbius lift and through the Lie lift.

use nalgebra::Vector3;
use std::collections::BTreeMap;

use crate::lattice::{incident_cells_in, CellId};
use crate::lifts::{sphere_from_lift, LaguerreLift, LineBicongruence, MoebiusLift, SphereDecoding};
use crate::nets::{box_planes, BiStarNet, Binet, EuclideanLine};
use crate::projective::{polar, HomVector, ProjSubspace, QuadricForm};
use crate::{Error, Result};

pub use crate::nets::Plane;

/// The circle of a cell: section of the cell's sphere with the tangent
/// plane □b(d). Imaginary when r² < 0.
#[derive(Debug, Clone, Copy)]
pub struct CellCircle {
    pub center: Vector3<f64>,
    pub r_squared: f64,
    pub plane_normal: Vector3<f64>,
}

/// The oriented cone of a cell: apex b(d), axis along the normal line, and
/// half-angle cosine σ(d). Degenerate (plane or imaginary) when |σ| ≥ 1 is
/// violated in the wrong direction: |σ| = 1 is an oriented plane, |σ| > 1
/// has no real half-angle.
#[derive(Debug, Clone, Copy)]
pub struct CellCone {
    pub apex: Vector3<f64>,
    pub axis: Vector3<f64>,
    pub cos_half_angle: f64,
}

impl CellCone {
    pub fn is_plane(&self, tol: f64) -> bool {
        (self.cos_half_angle.abs() - 1.0).abs() <= tol
    }

    pub fn is_imaginary(&self) -> bool {
        self.cos_half_angle.abs() > 1.0
    }
}

/// A principal curvature sphere of a same-kind edge.
#[derive(Debug, Clone)]
pub struct CurvatureSphere {
    pub edge: (CellId, CellId),
    pub sphere: SphereDecoding,
    /// Polar point of the spanned 3-space H in ℝP⁴ (the sphere's lift).
    pub lift_point: HomVector,
}

/// Adjacent-line intersection data of a normal bicongruence edge.
#[derive(Debug, Clone)]
pub struct EdgeIntersection {
    pub edge: (CellId, CellId),
    /// Normalized scalar triple product of the two directions with the
    /// connecting vector; zero when the lines are coplanar.
    pub coplanarity: f64,
    /// Midpoint of the common perpendicular; `None` for parallel lines
    /// (intersection at infinity, the flat/umbilic-like case).
    pub point: Option<Vector3<f64>>,
    /// Length of the common perpendicular segment.
    pub gap: f64,
}

/// The normal bicongruence of a conjugate binet: lines through b(d)
/// perpendicular to □b(d), with the per-edge intersection report.
#[derive(Debug, Clone)]
pub struct NormalBicongruence {
    pub lines: BTreeMap<CellId, EuclideanLine>,
    pub edges: Vec<EdgeIntersection>,
}

impl NormalBicongruence {
    /// Worst coplanarity residual over finite (non-parallel) edges: small
    /// exactly when adjacent normal lines intersect, i.e. when the binet is
    /// principal.
    pub fn max_coplanarity(&self) -> f64 {
        self.edges
            .iter()
            .map(|e| e.coplanarity)
            .fold(0.0, f64::max)
    }

    pub fn line(&self, cell: CellId) -> Result<&EuclideanLine> {
        self.lines
            .get(&cell)
            .ok_or_else(|| Error::MissingCell(cell.to_string()))
    }

    pub fn edge(&self, a: CellId, b: CellId) -> Option<&EdgeIntersection> {
        self.edges
            .iter()
            .find(|e| e.edge == (a, b) || e.edge == (b, a))
    }
}

/// Builds the normal bicongruence of a conjugate binet (conjugacy gated at
/// `tol` through the □ operator). The adjacent-lines-intersect property is
/// reported, not enforced: it fails exactly when the binet is not principal.
pub fn normal_bicongruence(b: &Binet, tol: f64) -> Result<NormalBicongruence> {
    let bs = box_planes(b, tol)?;
    normal_bicongruence_from_planes(b, &bs)
}

/// As [`normal_bicongruence`] with the tangent planes already computed.
pub fn normal_bicongruence_from_planes(
    b: &Binet,
    bs: &BiStarNet,
) -> Result<NormalBicongruence> {
    let mut lines = BTreeMap::new();
    for (c, plane) in bs.cells() {
        let Some(p) = b.get(*c) else { continue };
        lines.insert(*c, EuclideanLine::new(*p, plane.normal())?);
    }
    let mut edges = Vec::new();
    let w = b.window();
    for (a, c) in w.v_edges().into_iter().chain(w.f_edges()) {
        let (Some(la), Some(lc)) = (lines.get(&a), lines.get(&c)) else {
            continue;
        };
        let coplanarity = la.coplanarity_residual(lc);
        if la.is_parallel_to(lc, 1e-12) {
            edges.push(EdgeIntersection {
                edge: (a, c),
                coplanarity,
                point: None,
                gap: la.distance_to_point(&lc.point()),
            });
        } else {
            let (point, gap) = la.intersect(lc)?;
            edges.push(EdgeIntersection {
                edge: (a, c),
                coplanarity,
                point: Some(point),
                gap,
            });
        }
    }
    Ok(NormalBicongruence { lines, edges })
}

/// Lattice direction of a focal binet.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FocalDirection {
    I,
    J,
}

/// Focal binet of a principal binet: per directed edge, the intersection of
/// the two normal lines. Parallel normals produce infinite focal points,
/// returned separately and excluded from the binet.
pub fn focal_binet(
    nbc: &NormalBicongruence,
    direction: FocalDirection,
    window: crate::lattice::Window,
) -> (Binet, Vec<(CellId, CellId)>) {
    let mut out = Binet::new(window);
    let mut infinite = Vec::new();
    for e in &nbc.edges {
        let (a, b) = e.edge;
        let (ai, aj) = a.coords();
        let (bi, bj) = b.coords();
        let is_dir = match direction {
            FocalDirection::I => (bi - ai).abs() == 1 && aj == bj,
            FocalDirection::J => (bj - aj).abs() == 1 && ai == bi,
        };
        if !is_dir {
            continue;
        }
        match e.point {
            Some(p) => {
                // Indexed by the lower cell of the edge.
                let cell = if a <= b { a } else { b };
                out.set(cell, p);
            }
            None => infinite.push((a, b)),
        }
    }
    (out, infinite)
}

/// The circle of a cell: □b(d) ∩ (decoded sphere of the lift at d). The
/// center is the foot of the sphere center on the plane;
/// r² = r²_sphere − dist² (negative for imaginary circles).
pub fn cell_circle(lift: &MoebiusLift, bs: &BiStarNet, d: CellId) -> Result<CellCircle> {
    let sphere = lift.sphere(d)?;
    let plane = bs.plane(d)?;
    let dist = plane.signed_distance(&sphere.center);
    let center = sphere.center - dist * plane.normal();
    Ok(CellCircle {
        center,
        r_squared: sphere.r_squared - dist * dist,
        plane_normal: plane.normal(),
    })
}

/// The cone of a cell: apex b(d), axis along the tangent-plane normal,
/// half-angle cosine σ(d) from the Laguerre lift.
pub fn cell_cone(b: &Binet, llift: &LaguerreLift, d: CellId) -> Result<CellCone> {
    let apex = b.point(d)?;
    let plane = llift.base().plane(d)?;
    let sigma = *llift
        .sigma()
        .get(&d)
        .ok_or_else(|| Error::MissingCell(d.to_string()))?;
    Ok(CellCone {
        apex,
        axis: plane.normal(),
        cos_half_angle: sigma,
    })
}

/// The lift plane □b_Q(d): span of the 4 incident lift points in ℝP⁴
/// (requires a conjugate lift; rank 3 enforced by the caller's tolerance).
fn lift_quad_plane(lift: &MoebiusLift, d: CellId) -> Result<ProjSubspace> {
    let (inc, complete) = incident_cells_in(&lift.base().window(), d);
    if !complete {
        return Err(Error::MissingCell(format!("incident cells of {d}")));
    }
    let pts: Result<Vec<HomVector>> = inc.iter().map(|c| lift.point(*c)).collect();
    ProjSubspace::from_points(&pts?)
}

/// Principal curvature sphere of a same-kind edge via the Möbius route:
/// H = □b_Q(d) ∨ □b_Q(d′) and the sphere is decoded from H^⊥.
pub fn curvature_sphere(lift: &MoebiusLift, a: CellId, b: CellId) -> Result<CurvatureSphere> {
    let pa = lift_quad_plane(lift, a)?;
    let pb = lift_quad_plane(lift, b)?;
    let h = crate::projective::join(&pa, &pb)?;
    if h.dim() != 3 {
        return Err(Error::degenerate(
            format!("flat or umbilic edge ({a}, {b}): H has dimension {}", h.dim()),
            0.0,
        ));
    }
    let x = polar(QuadricForm::Moebius, &h)?.to_point()?;
    let sphere = sphere_from_lift(&x)?;
    Ok(CurvatureSphere {
        edge: (a, b),
        sphere,
        lift_point: x,
    })
}

/// Principal curvature data of an edge via the Lie route: the intersection
/// point S of the two adjacent lines, its decoded (non-oriented) sphere, and
/// the signed radius of the oriented curvature sphere.
#[derive(Debug, Clone)]
pub struct LieCurvaturePoint {
    pub edge: (CellId, CellId),
    pub point: HomVector,
    pub sphere: SphereDecoding,
    pub oriented_radius: f64,
    /// Residual of the rank-3 intersection condition.
    pub intersection_residual: f64,
}

/// Intersection of adjacent Lie-lift lines decoded as a curvature sphere.
/// Fails when the lines are skew beyond tolerance (not a bicongruence).
pub fn lie_curvature_point(
    bl: &LineBicongruence,
    a: CellId,
    b: CellId,
    tol: f64,
) -> Result<LieCurvaturePoint> {
    let residual = bl.pair_intersection(a, b)?;
    if residual > tol {
        return Err(Error::degenerate(
            format!("lines at ({a}, {b}) are skew: not a bicongruence"),
            residual,
        ));
    }
    let (pa, qa) = bl.line(a)?;
    let (pb, qb) = bl.line(b)?;
    let sa = ProjSubspace::from_points(&[pa, qa])?;
    let sb = ProjSubspace::from_points(&[pb, qb])?;
    let meet = crate::projective::meet(&sa, &sb)?;
    if meet.dim() != 0 {
        return Err(Error::degenerate(
            format!("lines at ({a}, {b}) do not meet in a single point"),
            residual,
        ));
    }
    let s = meet.to_point()?;
    let c = s.coords();
    // Non-oriented sphere: drop x₆ (the projection to the Möbius subspace
    // along the base point e₆).
    let moebius_part = HomVector::new(&[c[0], c[1], c[2], c[3], c[4]])?;
    let sphere = sphere_from_lift(&moebius_part)?;
    let w = c[4] - c[3];
    Ok(LieCurvaturePoint {
        edge: (a, b),
        point: s.clone(),
        sphere,
        oriented_radius: c[5] / w,
        intersection_residual: residual,
    })
}

/// All same-kind edges of the window for which both cells have complete
/// incident sets (curvature spheres are defined away from the boundary).
pub fn curvature_edges(b: &Binet) -> Vec<(CellId, CellId)> {
    let w = b.window();
    w.v_edges()
        .into_iter()
        .chain(w.f_edges())
        .filter(|(a, c)| {
            incident_cells_in(&w, *a).1 && incident_cells_in(&w, *c).1
        })
        .collect()
}
