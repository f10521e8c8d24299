//! Binets and bi*nets with their defining predicates: conjugacy,
//! orthogonality, polarity, and the □ / □* operators.
//!
//! All maps are partial: cells without a value are skipped by the checks
//! (conditions are only asserted on quads and crosses whose cells all carry
//! values, matching the truncation of the infinite lattice to a window).

use nalgebra::{DMatrix, Matrix3, Vector3};
use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use crate::lattice::{
    face_vertices, incident_cells_in, vertex_faces, CellId, Cross, Window,
};
use crate::projective::{inner, HomVector, QuadricForm};
use crate::{Error, Result, RANK_TOL};

/// Oriented Euclidean plane {x : ⟨u,x⟩ + h = 0} with unit normal u.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Plane {
    normal: Vector3<f64>,
    offset: f64,
}

impl Plane {
    /// Builds a plane from any normal/offset pair, rescaling the normal to
    /// unit length.
    pub fn new(normal: Vector3<f64>, offset: f64) -> Result<Self> {
        let n = normal.norm();
        if !(n > 1e-300) || !n.is_finite() {
            return Err(Error::InvalidInput("plane normal must be nonzero".into()));
        }
        Ok(Plane {
            normal: normal / n,
            offset: offset / n,
        })
    }

    pub fn through_point(point: Vector3<f64>, normal: Vector3<f64>) -> Result<Self> {
        let n = normal.norm();
        if !(n > 1e-300) {
            return Err(Error::InvalidInput("plane normal must be nonzero".into()));
        }
        let u = normal / n;
        Ok(Plane {
            normal: u,
            offset: -u.dot(&point),
        })
    }

    pub fn normal(&self) -> Vector3<f64> {
        self.normal
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn signed_distance(&self, x: &Vector3<f64>) -> f64 {
        self.normal.dot(x) + self.offset
    }

    pub fn contains(&self, x: &Vector3<f64>, tol: f64) -> bool {
        self.signed_distance(x).abs() <= tol * (1.0 + x.norm())
    }

    /// Same plane with reversed orientation.
    pub fn flipped(&self) -> Plane {
        Plane {
            normal: -self.normal,
            offset: -self.offset,
        }
    }

    /// True when both describe the same unoriented plane.
    pub fn same_plane(&self, other: &Plane, tol: f64) -> bool {
        let direct = (self.normal - other.normal).norm() <= tol
            && (self.offset - other.offset).abs() <= tol;
        let flipped = (self.normal + other.normal).norm() <= tol
            && (self.offset + other.offset).abs() <= tol;
        direct || flipped
    }

    /// Reflection of a point in the plane.
    pub fn reflect_point(&self, x: &Vector3<f64>) -> Vector3<f64> {
        x - 2.0 * self.signed_distance(x) * self.normal
    }

    /// Mirror image of an oriented plane in this plane.
    pub fn reflect_plane(&self, p: &Plane) -> Plane {
        let n = p.normal - 2.0 * self.normal.dot(&p.normal) * self.normal;
        let x0 = -p.offset * p.normal;
        let x1 = self.reflect_point(&x0);
        Plane {
            normal: n,
            offset: -n.dot(&x1),
        }
    }
}

/// A Euclidean line given by a point and a unit direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EuclideanLine {
    point: Vector3<f64>,
    direction: Vector3<f64>,
}

impl EuclideanLine {
    pub fn new(point: Vector3<f64>, direction: Vector3<f64>) -> Result<Self> {
        let n = direction.norm();
        if !(n > 1e-300) || !n.is_finite() {
            return Err(Error::InvalidInput("line direction must be nonzero".into()));
        }
        Ok(EuclideanLine {
            point,
            direction: direction / n,
        })
    }

    pub fn point(&self) -> Vector3<f64> {
        self.point
    }

    pub fn direction(&self) -> Vector3<f64> {
        self.direction
    }

    pub fn at(&self, t: f64) -> Vector3<f64> {
        self.point + t * self.direction
    }

    pub fn distance_to_point(&self, x: &Vector3<f64>) -> f64 {
        (x - self.point).cross(&self.direction).norm()
    }

    /// Minimal distance between two lines (0 when they meet).
    pub fn distance_to_line(&self, other: &EuclideanLine) -> f64 {
        let n = self.direction.cross(&other.direction);
        let d = other.point - self.point;
        if n.norm() <= 1e-12 {
            // Parallel lines: point-to-line distance.
            return self.distance_to_point(&other.point);
        }
        d.dot(&n).abs() / n.norm()
    }

    /// Normalized coplanarity residual of two lines: the scalar triple
    /// product of the directions with the connecting vector, scaled by the
    /// connecting distance. Zero means the lines meet (or are parallel).
    pub fn coplanarity_residual(&self, other: &EuclideanLine) -> f64 {
        let n = self.direction.cross(&other.direction);
        let d = other.point - self.point;
        let dn = d.norm();
        if dn <= 1e-300 {
            return 0.0;
        }
        n.dot(&d).abs() / dn
    }

    pub fn is_parallel_to(&self, other: &EuclideanLine, tol: f64) -> bool {
        self.direction.cross(&other.direction).norm() <= tol
    }

    /// Closest-point intersection of two lines: the midpoint of the common
    /// perpendicular segment, with the remaining gap as residual. Errors for
    /// parallel lines.
    pub fn intersect(&self, other: &EuclideanLine) -> Result<(Vector3<f64>, f64)> {
        let (d1, d2) = (self.direction, other.direction);
        let r = other.point - self.point;
        let a = d1.dot(&d2);
        let denom = 1.0 - a * a;
        if denom <= 1e-14 {
            return Err(Error::degenerate("intersection of parallel lines", denom));
        }
        let t1 = (r.dot(&d1) - a * r.dot(&d2)) / denom;
        let t2 = (a * r.dot(&d1) - r.dot(&d2)) / denom;
        let p1 = self.at(t1);
        let p2 = other.at(t2);
        Ok(((p1 + p2) * 0.5, (p1 - p2).norm()))
    }
}

/// A binet: Euclidean points on (a subset of) the double lattice of a window.
#[derive(Debug, Clone)]
pub struct Binet {
    window: Window,
    points: BTreeMap<CellId, Vector3<f64>>,
}

impl Binet {
    pub fn new(window: Window) -> Self {
        Binet {
            window,
            points: BTreeMap::new(),
        }
    }

    pub fn window(&self) -> Window {
        self.window
    }

    pub fn set(&mut self, cell: CellId, p: Vector3<f64>) {
        self.points.insert(cell, p);
    }

    pub fn get(&self, cell: CellId) -> Option<&Vector3<f64>> {
        self.points.get(&cell)
    }

    pub fn point(&self, cell: CellId) -> Result<Vector3<f64>> {
        self.points
            .get(&cell)
            .copied()
            .ok_or_else(|| Error::MissingCell(cell.to_string()))
    }

    pub fn cells(&self) -> impl Iterator<Item = (&CellId, &Vector3<f64>)> {
        self.points.iter()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// True when every cell of the window has a value.
    pub fn is_complete(&self) -> bool {
        self.window.cells().all(|c| self.points.contains_key(&c))
    }

    pub fn has(&self, cell: CellId) -> bool {
        self.points.contains_key(&cell)
    }

    /// Largest point norm, for scale-relative residuals.
    pub fn scale(&self) -> f64 {
        self.points
            .values()
            .map(|p| p.norm())
            .fold(1.0_f64, f64::max)
    }

    /// Lift to homogeneous coordinates [x, y, z, 1] in ℝP³.
    pub fn to_projective(&self) -> ProjBinet {
        let mut pb = ProjBinet::new(self.window, 3);
        for (c, p) in &self.points {
            let hv = HomVector::new(&[p.x, p.y, p.z, 1.0]).expect("finite point");
            pb.set(*c, hv);
        }
        pb
    }
}

/// A binet with values in ℝPⁿ (homogeneous coordinates), used for lifts and
/// ambient-ℝP⁴/ℝP⁵ polar binets.
#[derive(Debug, Clone)]
pub struct ProjBinet {
    window: Window,
    ambient_dim: usize,
    points: BTreeMap<CellId, HomVector>,
}

impl ProjBinet {
    pub fn new(window: Window, ambient_dim: usize) -> Self {
        ProjBinet {
            window,
            ambient_dim,
            points: BTreeMap::new(),
        }
    }

    pub fn window(&self) -> Window {
        self.window
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn set(&mut self, cell: CellId, p: HomVector) {
        assert_eq!(p.ambient_dim(), self.ambient_dim);
        self.points.insert(cell, p);
    }

    pub fn get(&self, cell: CellId) -> Option<&HomVector> {
        self.points.get(&cell)
    }

    pub fn point(&self, cell: CellId) -> Result<HomVector> {
        self.points
            .get(&cell)
            .cloned()
            .ok_or_else(|| Error::MissingCell(cell.to_string()))
    }

    pub fn cells(&self) -> impl Iterator<Item = (&CellId, &HomVector)> {
        self.points.iter()
    }

    pub fn has(&self, cell: CellId) -> bool {
        self.points.contains_key(&cell)
    }
}

/// A bi*net: oriented planes on (a subset of) the double lattice.
#[derive(Debug, Clone)]
pub struct BiStarNet {
    window: Window,
    planes: BTreeMap<CellId, Plane>,
}

impl BiStarNet {
    pub fn new(window: Window) -> Self {
        BiStarNet {
            window,
            planes: BTreeMap::new(),
        }
    }

    pub fn window(&self) -> Window {
        self.window
    }

    pub fn set(&mut self, cell: CellId, p: Plane) {
        self.planes.insert(cell, p);
    }

    pub fn get(&self, cell: CellId) -> Option<&Plane> {
        self.planes.get(&cell)
    }

    pub fn plane(&self, cell: CellId) -> Result<Plane> {
        self.planes
            .get(&cell)
            .copied()
            .ok_or_else(|| Error::MissingCell(cell.to_string()))
    }

    pub fn cells(&self) -> impl Iterator<Item = (&CellId, &Plane)> {
        self.planes.iter()
    }

    pub fn has(&self, cell: CellId) -> bool {
        self.planes.contains_key(&cell)
    }

    /// Re-gauges plane orientations for sign consistency along a BFS spanning
    /// tree of the incidence graph, rooted at the smallest cell. The paper's
    /// planes are unoriented; σ-solving needs a coherent sign gauge.
    pub fn orient_coherently(&mut self) {
        let cells: Vec<CellId> = self.planes.keys().cloned().collect();
        let cellset: BTreeSet<CellId> = cells.iter().cloned().collect();
        let mut visited: BTreeSet<CellId> = BTreeSet::new();
        for root in &cells {
            if visited.contains(root) {
                continue;
            }
            // Root orientation: first significant component positive.
            let rp = self.planes[root];
            let n = rp.normal();
            let comps = [n.x, n.y, n.z, rp.offset()];
            if let Some(c) = comps.iter().find(|c| c.abs() > 1e-12) {
                if *c < 0.0 {
                    self.planes.insert(*root, rp.flipped());
                }
            }
            let mut queue = VecDeque::new();
            visited.insert(*root);
            queue.push_back(*root);
            while let Some(d) = queue.pop_front() {
                let ud = self.planes[&d].normal();
                let neighbors: Vec<CellId> = match d {
                    CellId::Vertex(_, _) => vertex_faces(d).to_vec(),
                    CellId::Face(_, _) => face_vertices(d).to_vec(),
                };
                for nb in neighbors {
                    if !cellset.contains(&nb) || visited.contains(&nb) {
                        continue;
                    }
                    let pn = self.planes[&nb];
                    if ud.dot(&pn.normal()) < 0.0 {
                        self.planes.insert(nb, pn.flipped());
                    }
                    visited.insert(nb);
                    queue.push_back(nb);
                }
            }
        }
    }
}

/// An item a check attaches a residual to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CheckItem {
    Cell(CellId),
    Pair(CellId, CellId),
    Cross(Cross),
}

impl fmt::Display for CheckItem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CheckItem::Cell(c) => write!(f, "{c}"),
            CheckItem::Pair(a, b) => write!(f, "pair({a}, {b})"),
            CheckItem::Cross(c) => write!(f, "{c}"),
        }
    }
}

/// Residual report of a predicate check over a net.
#[derive(Debug, Clone)]
pub struct CheckReport {
    pub check: &'static str,
    pub tol: f64,
    pub per_item: Vec<(CheckItem, f64)>,
    /// Items whose configuration was too degenerate to evaluate; they fail
    /// the check rather than silently passing.
    pub degenerate: Vec<CheckItem>,
}

impl CheckReport {
    fn new(check: &'static str, tol: f64) -> Self {
        CheckReport {
            check,
            tol,
            per_item: Vec::new(),
            degenerate: Vec::new(),
        }
    }

    pub fn max_residual(&self) -> f64 {
        self.per_item.iter().map(|(_, r)| *r).fold(0.0, f64::max)
    }

    pub fn mean_residual(&self) -> f64 {
        if self.per_item.is_empty() {
            0.0
        } else {
            self.per_item.iter().map(|(_, r)| *r).sum::<f64>() / self.per_item.len() as f64
        }
    }

    pub fn worst(&self) -> Option<&(CheckItem, f64)> {
        self.per_item
            .iter()
            .max_by(|a, b| a.1.partial_cmp(&b.1).expect("finite residuals"))
    }

    pub fn pass(&self) -> bool {
        self.degenerate.is_empty() && self.max_residual() <= self.tol
    }

    pub fn items_checked(&self) -> usize {
        self.per_item.len()
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: {} over {} items, max residual {:.3e} (tol {:.1e})",
            self.check,
            if self.pass() { "pass" } else { "FAIL" },
            self.items_checked(),
            self.max_residual(),
            self.tol
        )?;
        if let Some((item, r)) = self.worst() {
            write!(f, ", worst at {item} ({r:.3e})")?;
        }
        if !self.degenerate.is_empty() {
            write!(f, ", {} degenerate items", self.degenerate.len())?;
        }
        Ok(())
    }
}

/// Planarity residual of four points: smallest singular value of the 3×3
/// matrix of edge differences from the first point, scale-normalized.
/// Returns (residual, degenerate).
fn quad_planarity(points: [&Vector3<f64>; 4]) -> (f64, bool) {
    let m = Matrix3::from_rows(&[
        (points[1] - points[0]).transpose(),
        (points[2] - points[0]).transpose(),
        (points[3] - points[0]).transpose(),
    ]);
    let sv = m.svd(false, false).singular_values;
    let (s1, s2, s3) = (sv[0], sv[1], sv[2]);
    if !(s1 > 0.0) || s2 <= RANK_TOL * s1 {
        return (1.0, true);
    }
    (s3 / s1, false)
}

/// Conjugacy: per face, the 4 vertex points are coplanar; per interior
/// vertex, the 4 incident face points are coplanar.
pub fn check_conjugate(b: &Binet, tol: f64) -> CheckReport {
    let mut report = CheckReport::new("conjugate", tol);
    for f in b.window().faces() {
        let vs = face_vertices(f);
        let pts: Option<Vec<&Vector3<f64>>> = vs.iter().map(|v| b.get(*v)).collect();
        if let Some(p) = pts {
            let (res, degenerate) = quad_planarity([p[0], p[1], p[2], p[3]]);
            if degenerate {
                report.degenerate.push(CheckItem::Cell(f));
            } else {
                report.per_item.push((CheckItem::Cell(f), res));
            }
        }
    }
    for v in b.window().vertices() {
        let fs = vertex_faces(v);
        if !fs.iter().all(|f| b.window().contains(*f)) {
            continue;
        }
        let pts: Option<Vec<&Vector3<f64>>> = fs.iter().map(|f| b.get(*f)).collect();
        if let Some(p) = pts {
            let (res, degenerate) = quad_planarity([p[0], p[1], p[2], p[3]]);
            if degenerate {
                report.degenerate.push(CheckItem::Cell(v));
            } else {
                report.per_item.push((CheckItem::Cell(v), res));
            }
        }
    }
    report
}

/// Orthogonality: per cross, the V-edge direction is perpendicular to the
/// dual F-edge direction; residual |⟨Δv,Δf⟩| / (|Δv|·|Δf|).
pub fn check_orthogonal(b: &Binet, tol: f64) -> Result<CheckReport> {
    let mut report = CheckReport::new("orthogonal", tol);
    for cross in b.window().crosses() {
        let (Some(pv), Some(pvp), Some(pf), Some(pfp)) =
            (b.get(cross.v), b.get(cross.vp), b.get(cross.f), b.get(cross.fp))
        else {
            continue;
        };
        let dv = pvp - pv;
        let df = pfp - pf;
        let (nv, nf) = (dv.norm(), df.norm());
        if nv <= 1e-300 || nf <= 1e-300 {
            return Err(Error::regularity(
                cross.to_string(),
                "zero-length edge (incident points must be distinct)",
            ));
        }
        report
            .per_item
            .push((CheckItem::Cross(cross), dv.dot(&df).abs() / (nv * nf)));
    }
    Ok(report)
}

/// Conjugate and orthogonal reports together (the principal predicate).
pub fn check_principal(b: &Binet, tol: f64) -> Result<(CheckReport, CheckReport)> {
    Ok((check_conjugate(b, tol), check_orthogonal(b, tol)?))
}

/// Bi*net orthogonality: per cross, the intersection-line directions
/// u(v)×u(v′) and u(f)×u(f′) are perpendicular.
pub fn check_bistar_orthogonal(b: &BiStarNet, tol: f64) -> Result<CheckReport> {
    let mut report = CheckReport::new("bistar-orthogonal", tol);
    for cross in b.window().crosses() {
        let (Some(pv), Some(pvp), Some(pf), Some(pfp)) =
            (b.get(cross.v), b.get(cross.vp), b.get(cross.f), b.get(cross.fp))
        else {
            continue;
        };
        let dir_v = pv.normal().cross(&pvp.normal());
        let dir_f = pf.normal().cross(&pfp.normal());
        let (nv, nf) = (dir_v.norm(), dir_f.norm());
        if nv <= 1e-12 || nf <= 1e-12 {
            return Err(Error::regularity(
                cross.to_string(),
                "parallel adjacent planes (intersection line undefined)",
            ));
        }
        report
            .per_item
            .push((CheckItem::Cross(cross), dir_v.dot(&dir_f).abs() / (nv * nf)));
    }
    Ok(report)
}

/// Polarity of a projective binet with respect to `form`: per incident pair,
/// |⟨x_d, x_d′⟩| on unit-normalized vectors.
pub fn check_polar_binet(b: &ProjBinet, form: QuadricForm, tol: f64) -> Result<CheckReport> {
    if b.ambient_dim() != form.ambient_dim() {
        return Err(Error::DimensionMismatch {
            expected: form.len(),
            got: b.ambient_dim() + 1,
        });
    }
    let mut report = CheckReport::new("polar", tol);
    for (v, f) in b.window().incident_pairs() {
        let (Some(xv), Some(xf)) = (b.get(v), b.get(f)) else {
            continue;
        };
        report
            .per_item
            .push((CheckItem::Pair(v, f), inner(form, xv, xf)?.abs()));
    }
    Ok(report)
}

/// Conjugacy of a projective binet: quads of unit homogeneous vectors have
/// rank 3; residual σ₄/σ₁ of the stacked 4×(n+1) matrix.
pub fn check_conjugate_proj(b: &ProjBinet, tol: f64) -> CheckReport {
    let mut report = CheckReport::new("conjugate-proj", tol);
    let eval = |cells: [CellId; 4], item: CheckItem, report: &mut CheckReport| {
        let pts: Option<Vec<&HomVector>> = cells.iter().map(|c| b.get(*c)).collect();
        if let Some(p) = pts {
            let n = b.ambient_dim() + 1;
            let mut m = DMatrix::zeros(4, n);
            for (i, hv) in p.iter().enumerate() {
                m.set_row(i, &hv.coords().transpose());
            }
            let sv = m.svd(false, false).singular_values;
            let (s1, s3, s4) = (sv[0], sv[2], sv[3]);
            if !(s1 > 0.0) || s3 <= RANK_TOL * s1 {
                report.degenerate.push(item);
            } else {
                report.per_item.push((item, s4 / s1));
            }
        }
    };
    for f in b.window().faces() {
        eval(face_vertices(f), CheckItem::Cell(f), &mut report);
    }
    for v in b.window().vertices() {
        let fs = vertex_faces(v);
        if fs.iter().all(|f| b.window().contains(*f)) {
            eval(fs, CheckItem::Cell(v), &mut report);
        }
    }
    report
}

/// Total-least-squares plane through points: centroid plus smallest
/// right-singular direction. Returns (plane, flatness residual).
pub(crate) fn fit_plane(points: &[Vector3<f64>]) -> Result<(Plane, f64)> {
    let n = points.len();
    let centroid = points.iter().sum::<Vector3<f64>>() / n as f64;
    let mut m = DMatrix::zeros(n, 3);
    for (i, p) in points.iter().enumerate() {
        m.set_row(i, &(p - centroid).transpose());
    }
    let svd = m.svd(false, true);
    let vt = svd.v_t.expect("v_t");
    let sv = &svd.singular_values;
    let s1 = sv[0];
    if !(s1 > 0.0) || sv[1] <= RANK_TOL * s1 {
        return Err(Error::degenerate("plane fit: points nearly collinear", 1.0));
    }
    let normal = Vector3::new(vt[(2, 0)], vt[(2, 1)], vt[(2, 2)]);
    let plane = Plane::through_point(centroid, normal)?;
    Ok((plane, sv[2] / s1))
}

/// The □ operator: per cell, the plane through the 4 incident points. Fails
/// if the binet is not conjugate at `tol` (the gate prevents silently
/// "fixing" non-conjugate data). Planes are produced on every face and every
/// interior vertex, then oriented coherently.
pub fn box_planes(b: &Binet, tol: f64) -> Result<BiStarNet> {
    let conj = check_conjugate(b, tol);
    if !conj.pass() {
        let (worst, residual) = conj
            .worst()
            .map(|(i, r)| (i.to_string(), *r))
            .unwrap_or_else(|| ("degenerate quad".into(), 1.0));
        return Err(Error::CheckFailed {
            check: "conjugate (required by box_planes)",
            worst,
            residual,
            tol,
        });
    }
    let mut out = BiStarNet::new(b.window());
    for d in b.window().cells() {
        let (inc, complete) = incident_cells_in(&b.window(), d);
        if !complete {
            continue;
        }
        let pts: Option<Vec<Vector3<f64>>> = inc.iter().map(|c| b.get(*c).copied()).collect();
        let Some(pts) = pts else { continue };
        let (plane, _res) = fit_plane(&pts)?;
        out.set(d, plane);
    }
    out.orient_coherently();
    Ok(out)
}

/// The □* operator: per cell, the least-squares intersection point of the 4
/// incident planes, gated on concurrency within `tol`.
pub fn box_star_points(b: &BiStarNet, tol: f64) -> Result<Binet> {
    let mut out = Binet::new(b.window());
    for d in b.window().cells() {
        let (inc, complete) = incident_cells_in(&b.window(), d);
        if !complete {
            continue;
        }
        let planes: Option<Vec<Plane>> = inc.iter().map(|c| b.get(*c).copied()).collect();
        let Some(planes) = planes else { continue };
        let p = meet_planes(&planes, tol).map_err(|e| match e {
            Error::Degenerate { what, residual } => Error::Degenerate {
                what: format!("{what} at {d}"),
                residual,
            },
            other => other,
        })?;
        out.set(d, p);
    }
    Ok(out)
}

/// Least-squares common point of a set of planes; errors if the planes are
/// not concurrent within `tol` (relative to the point scale).
pub fn meet_planes(planes: &[Plane], tol: f64) -> Result<Vector3<f64>> {
    let n = planes.len();
    let mut a = DMatrix::zeros(n, 3);
    let mut rhs = DMatrix::zeros(n, 1);
    for (i, p) in planes.iter().enumerate() {
        a.set_row(i, &p.normal().transpose());
        rhs[(i, 0)] = -p.offset();
    }
    let ata = a.transpose() * &a;
    let atb = a.transpose() * rhs;
    let chol = ata
        .cholesky()
        .ok_or_else(|| Error::degenerate("plane meet: normals rank-deficient", 1.0))?;
    let x = chol.solve(&atb);
    let point = Vector3::new(x[(0, 0)], x[(1, 0)], x[(2, 0)]);
    let worst = planes
        .iter()
        .map(|p| p.signed_distance(&point).abs())
        .fold(0.0, f64::max);
    let scale = 1.0 + point.norm();
    if worst > tol * scale {
        return Err(Error::degenerate("planes not concurrent", worst / scale));
    }
    Ok(point)
}

/// Applies a projective transformation of ℝP³ to a Euclidean binet,
/// dehomogenizing the image points.
pub fn apply_proj3(t: &crate::projective::ProjTransform, b: &Binet) -> Result<Binet> {
    if t.ambient_dim() != 3 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            got: t.ambient_dim() + 1,
        });
    }
    let mut out = Binet::new(b.window());
    for (c, p) in b.cells() {
        let hv = HomVector::new(&[p.x, p.y, p.z, 1.0])?;
        let img = t.apply_point(&hv)?;
        let w = img.coords()[3];
        if w.abs() < 1e-12 {
            return Err(Error::AtInfinity {
                detail: format!("image of {c} has vanishing last coordinate"),
            });
        }
        out.set(
            *c,
            Vector3::new(img.coords()[0] / w, img.coords()[1] / w, img.coords()[2] / w),
        );
    }
    Ok(out)
}

#[cfg(test)]
pub(crate) mod test_util {
    use super::*;

    /// Planar grid binet: vertices at integer points, faces at centers.
    pub fn planar_grid(m: usize, n: usize) -> Binet {
        let w = Window::sized(m, n);
        let mut b = Binet::new(w);
        for v in w.vertices() {
            let (i, j) = v.coords();
            b.set(v, Vector3::new(i as f64, j as f64, 0.0));
        }
        for f in w.faces() {
            let (i, j) = f.coords();
            b.set(f, Vector3::new(i as f64 + 0.5, j as f64 + 0.5, 0.0));
        }
        b
    }

    /// Translational-surface binet z = f(i) + g(j): conjugate by
    /// construction (quads are parallelogram-like in height), generically
    /// neither planar nor orthogonal.
    pub fn translational(m: usize, n: usize, amp: f64) -> Binet {
        let w = Window::sized(m, n);
        let f = |x: f64| amp * (0.9 * x).sin();
        let g = |y: f64| amp * (0.6 * y + 1.0).cos();
        let mut b = Binet::new(w);
        for v in w.vertices() {
            let (i, j) = v.coords();
            let (x, y) = (i as f64, j as f64);
            b.set(v, Vector3::new(x, y, f(x) + g(y)));
        }
        for fc in w.faces() {
            let (i, j) = fc.coords();
            let (x, y) = (i as f64 + 0.5, j as f64 + 0.5);
            b.set(fc, Vector3::new(x, y, 0.3 * f(x) - 0.4 * g(y) + 0.7));
        }
        b
    }

    /// Unit-cylinder binet: vertices on the cylinder at integer heights,
    /// faces on the cylinder at mid-heights and half-angle offsets. A
    /// non-planar principal binet (with the ruling direction flat).
    pub fn cylinder(m: usize, n: usize, theta: f64) -> Binet {
        let w = Window::sized(m, n);
        let mut b = Binet::new(w);
        for v in w.vertices() {
            let (i, j) = v.coords();
            let a = i as f64 * theta;
            b.set(v, Vector3::new(a.cos(), a.sin(), j as f64));
        }
        for f in w.faces() {
            let (i, j) = f.coords();
            let a = (i as f64 + 0.5) * theta;
            b.set(f, Vector3::new(a.cos(), a.sin(), j as f64 + 0.5));
        }
        b
    }

    /// Surface-of-revolution binet with a curved profile: vertices at
    /// (r(j)·cos iθ, r(j)·sin iθ, z(j)), faces on the midpoint profile at
    /// half-angle offsets. Principal (conjugate + orthogonal) and doubly
    /// curved.
    pub fn revolution(m: usize, n: usize, theta: f64) -> Binet {
        let r = |j: f64| 1.0 + 0.15 * j + 0.05 * j * j;
        let z = |j: f64| 0.8 * j - 0.03 * j * j;
        let w = Window::sized(m, n);
        let mut b = Binet::new(w);
        for v in w.vertices() {
            let (i, j) = v.coords();
            let a = i as f64 * theta;
            let t = j as f64;
            b.set(v, Vector3::new(r(t) * a.cos(), r(t) * a.sin(), z(t)));
        }
        for f in w.faces() {
            let (i, j) = f.coords();
            let a = (i as f64 + 0.5) * theta;
            let t = j as f64 + 0.5;
            b.set(f, Vector3::new(r(t) * a.cos(), r(t) * a.sin(), z(t)));
        }
        b
    }
}

#[cfg(test)]
mod tests {
    use super::test_util::planar_grid;
    use super::*;
    use crate::projective::{random_form_isometry, ProjTransform};
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn planar_grid_is_conjugate_and_orthogonal() {
        let b = planar_grid(4, 4);
        let conj = check_conjugate(&b, 1e-12);
        assert!(conj.pass(), "{conj}");
        assert_abs_diff_eq!(conj.max_residual(), 0.0, epsilon = 1e-14);
        let orth = check_orthogonal(&b, 1e-12).unwrap();
        assert!(orth.pass(), "{orth}");
        assert_abs_diff_eq!(orth.max_residual(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn nonplanar_quad_residual_matches_volume_oracle() {
        // Quad (0,0,0),(1,0,0),(1,1,1),(0,1,0): clearly non-planar.
        let w = Window::sized(2, 2);
        let mut b = Binet::new(w);
        b.set(CellId::Vertex(0, 0), Vector3::new(0.0, 0.0, 0.0));
        b.set(CellId::Vertex(1, 0), Vector3::new(1.0, 0.0, 0.0));
        b.set(CellId::Vertex(1, 1), Vector3::new(1.0, 1.0, 1.0));
        b.set(CellId::Vertex(0, 1), Vector3::new(0.0, 1.0, 0.0));
        b.set(CellId::Face(0, 0), Vector3::new(0.5, 0.5, 0.0));
        let report = check_conjugate(&b, 1e-9);
        let res = report.max_residual();
        assert!(res > 0.1, "non-planar quad must be detected, got {res}");
        // Tetrahedron-volume oracle: |det| of the difference matrix is the
        // (scaled) tetrahedron volume, nonzero exactly when non-planar.
        let det: f64 = Matrix3::from_rows(&[
            Vector3::<f64>::new(1.0, 0.0, 0.0).transpose(),
            Vector3::<f64>::new(1.0, 1.0, 1.0).transpose(),
            Vector3::<f64>::new(0.0, 1.0, 0.0).transpose(),
        ])
        .determinant();
        assert!(det.abs() > 0.5);
        // Frozen expected value: singular values of the difference matrix
        // are sqrt(2+√3), 1, sqrt(2−√3), so residual = sqrt((2−√3)/(2+√3)).
        let expected = ((2.0 - 3.0_f64.sqrt()) / (2.0 + 3.0_f64.sqrt())).sqrt();
        assert_abs_diff_eq!(res, expected, epsilon = 1e-12);
    }

    #[test]
    fn conjugacy_invariant_under_projective_transform() {
        let b = planar_grid(4, 3);
        let mut m = DMatrix::identity(4, 4);
        // A genuinely projective map: last row perturbed.
        m[(3, 0)] = 0.02;
        m[(3, 1)] = -0.03;
        m[(0, 2)] = 0.5;
        m[(1, 3)] = 0.7;
        let t = ProjTransform::new(m).unwrap();
        let tb = apply_proj3(&t, &b).unwrap();
        assert_eq!(
            check_conjugate(&b, 1e-9).pass(),
            check_conjugate(&tb, 1e-9).pass()
        );
    }

    #[test]
    fn orthogonality_residual_frozen_example() {
        let w = Window::sized(2, 3);
        let mut b = Binet::new(w);
        // The single cross of a 2×3 window is ((0,1),(1,1); F(0,0), F(0,1)).
        b.set(CellId::Vertex(0, 0), Vector3::new(0.0, 0.0, -1.0));
        b.set(CellId::Vertex(1, 0), Vector3::new(2.0, 0.0, -1.0));
        b.set(CellId::Vertex(0, 1), Vector3::new(0.0, 0.0, 0.0));
        b.set(CellId::Vertex(1, 1), Vector3::new(2.0, 0.1, 0.0));
        b.set(CellId::Vertex(0, 2), Vector3::new(0.0, 0.0, 1.0));
        b.set(CellId::Vertex(1, 2), Vector3::new(2.0, 0.0, 1.0));
        b.set(CellId::Face(0, 0), Vector3::new(1.0, -1.0, 0.0));
        b.set(CellId::Face(0, 1), Vector3::new(1.0, 1.0, 1.0));
        let report = check_orthogonal(&b, 1e-9).unwrap();
        assert_eq!(report.items_checked(), 1);
        // Direct dot-product oracle: Δv=(2,0.1,0), Δf=(0,2,1).
        let oracle = 0.2 / ((4.01_f64).sqrt() * 5.0_f64.sqrt());
        assert_abs_diff_eq!(report.max_residual(), oracle, epsilon = 1e-15);
        assert_abs_diff_eq!(report.max_residual(), 0.0447, epsilon = 1e-4);
    }

    #[test]
    fn orthogonality_invariant_under_similarity() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut b = planar_grid(4, 4);
        let cells: Vec<CellId> = b.cells().map(|(c, _)| *c).collect();
        for c in cells {
            let p = *b.get(c).unwrap();
            b.set(
                c,
                p + Vector3::new(
                    rng.gen_range(-0.1..0.1),
                    rng.gen_range(-0.1..0.1),
                    rng.gen_range(-0.1..0.1),
                ),
            );
        }
        let angle: f64 = 0.7;
        let (s, c) = angle.sin_cos();
        let rot = Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0);
        let scale = 2.5;
        let shift = Vector3::new(3.0, -1.0, 2.0);
        let mut tb = Binet::new(b.window());
        for (cell, p) in b.cells() {
            tb.set(*cell, scale * (rot * p) + shift);
        }
        let ra = check_orthogonal(&b, 1e-9).unwrap();
        let rb = check_orthogonal(&tb, 1e-9).unwrap();
        for ((ia, a), (ib, bres)) in ra.per_item.iter().zip(rb.per_item.iter()) {
            assert_eq!(ia, ib);
            assert_abs_diff_eq!(a, bres, epsilon = 1e-12);
        }
    }

    #[test]
    fn zero_length_edge_is_regularity_error() {
        let mut b = planar_grid(3, 3);
        let p = *b.get(CellId::Vertex(1, 1)).unwrap();
        b.set(CellId::Vertex(1, 2), p);
        assert!(matches!(
            check_orthogonal(&b, 1e-9),
            Err(Error::Regularity { .. })
        ));
    }

    #[test]
    fn bistar_orthogonal_direct_example() {
        // Normals u(v)=(1,0,0), u(v')=(0,1,0), u(f)=(1,1,0)/√2, u(f')=(0,0,1):
        // dir_V=(0,0,1), dir_F=(1,−1,0)/√2, residual 0.
        let w = Window::sized(2, 3);
        let mut bs = BiStarNet::new(w);
        let set = |bs: &mut BiStarNet, c: CellId, n: Vector3<f64>| {
            bs.set(c, Plane::new(n, 0.3).unwrap());
        };
        set(&mut bs, CellId::Vertex(0, 1), Vector3::new(1.0, 0.0, 0.0));
        set(&mut bs, CellId::Vertex(1, 1), Vector3::new(0.0, 1.0, 0.0));
        set(&mut bs, CellId::Face(0, 0), Vector3::new(1.0, 1.0, 0.0));
        set(&mut bs, CellId::Face(0, 1), Vector3::new(0.0, 0.0, 1.0));
        let report = check_bistar_orthogonal(&bs, 1e-12).unwrap();
        assert_eq!(report.items_checked(), 1);
        assert_abs_diff_eq!(report.max_residual(), 0.0, epsilon = 1e-15);
        // Determinant identity oracle.
        let uv = Vector3::new(1.0, 0.0, 0.0);
        let uvp = Vector3::new(0.0, 1.0, 0.0);
        let uf = Vector3::new(1.0, 1.0, 0.0).normalize();
        let ufp = Vector3::new(0.0, 0.0, 1.0);
        let det = uv.dot(&uf) * uvp.dot(&ufp) - uvp.dot(&uf) * uv.dot(&ufp);
        assert_abs_diff_eq!(det, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn bistar_perturbation_detected() {
        let w = Window::sized(2, 3);
        let mut bs = BiStarNet::new(w);
        let set = |bs: &mut BiStarNet, c: CellId, n: Vector3<f64>| {
            bs.set(c, Plane::new(n, 0.0).unwrap());
        };
        set(&mut bs, CellId::Vertex(0, 1), Vector3::new(1.0, 0.0, 1e-2));
        set(&mut bs, CellId::Vertex(1, 1), Vector3::new(0.0, 1.0, 0.0));
        set(&mut bs, CellId::Face(0, 0), Vector3::new(1.0, 1.0, 0.0));
        set(&mut bs, CellId::Face(0, 1), Vector3::new(0.0, 0.0, 1.0));
        let report = check_bistar_orthogonal(&bs, 1e-9).unwrap();
        assert!(report.max_residual() > 1e-4);
    }

    #[test]
    fn box_planes_of_planar_grid() {
        let b = planar_grid(4, 4);
        let bs = box_planes(&b, 1e-9).unwrap();
        for (_, plane) in bs.cells() {
            // Every plane is z = 0.
            assert_abs_diff_eq!(plane.normal().x, 0.0, epsilon = 1e-12);
            assert_abs_diff_eq!(plane.normal().y, 0.0, epsilon = 1e-12);
            assert_abs_diff_eq!(plane.offset(), 0.0, epsilon = 1e-12);
        }
        assert!(bs.has(CellId::Face(0, 0)));
        assert!(bs.has(CellId::Vertex(1, 1)));
        assert!(!bs.has(CellId::Vertex(0, 0)));
    }

    #[test]
    fn box_planes_rejects_nonconjugate() {
        let mut b = planar_grid(4, 4);
        let p = *b.get(CellId::Vertex(1, 1)).unwrap();
        b.set(CellId::Vertex(1, 1), p + Vector3::new(0.0, 0.0, 0.4));
        assert!(matches!(box_planes(&b, 1e-9), Err(Error::CheckFailed { .. })));
    }

    #[test]
    fn box_star_of_four_concurrent_planes() {
        let planes = vec![
            Plane::new(Vector3::new(1.0, 0.0, 0.0), 0.0).unwrap(),
            Plane::new(Vector3::new(0.0, 1.0, 0.0), 0.0).unwrap(),
            Plane::new(Vector3::new(0.0, 0.0, 1.0), 0.0).unwrap(),
            Plane::new(Vector3::new(1.0, 1.0, 1.0), 0.0).unwrap(),
        ];
        let p = meet_planes(&planes, 1e-9).unwrap();
        assert_abs_diff_eq!(p.norm(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn box_star_rejects_nonconcurrent() {
        let planes = vec![
            Plane::new(Vector3::new(1.0, 0.0, 0.0), 0.0).unwrap(),
            Plane::new(Vector3::new(0.0, 1.0, 0.0), 0.0).unwrap(),
            Plane::new(Vector3::new(0.0, 0.0, 1.0), 0.0).unwrap(),
            Plane::new(Vector3::new(1.0, 1.0, 1.0), 0.5).unwrap(),
        ];
        assert!(meet_planes(&planes, 1e-9).is_err());
    }

    #[test]
    fn box_roundtrip_on_conjugate_data() {
        // □* ∘ □ = id on regular conjugate binets, on cells where both sides
        // are defined. A translational surface is conjugate and non-planar.
        let b = super::test_util::translational(6, 6, 0.8);
        let bs = box_planes(&b, 1e-8).unwrap();
        let back = box_star_points(&bs, 1e-6).unwrap();
        let mut compared = 0;
        for (c, p) in back.cells() {
            let orig = b.get(*c).unwrap();
            assert!((p - orig).norm() < 1e-9 * (1.0 + orig.norm()), "cell {c}");
            compared += 1;
        }
        assert!(compared > 4);
    }

    #[test]
    fn polar_check_detects_random_binet() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let w = Window::sized(3, 3);
        let mut pb = ProjBinet::new(w, 4);
        for c in w.cells() {
            let v: Vec<f64> = (0..5).map(|_| rng.gen_range(-1.0..1.0)).collect();
            pb.set(c, HomVector::new(&v).unwrap());
        }
        let report = check_polar_binet(&pb, QuadricForm::Moebius, 1e-9).unwrap();
        assert!(report.max_residual() > 0.01, "generic data is far from polar");
    }

    #[test]
    fn unit_sphere_polar_pair() {
        // Affine points n=(1,0,0), n'=(1,1,0) with ⟨n,n'⟩ = 1 are polar with
        // respect to the unit sphere in homogeneous coordinates.
        let a = HomVector::new(&[1.0, 0.0, 0.0, 1.0]).unwrap();
        let b = HomVector::new(&[1.0, 1.0, 0.0, 1.0]).unwrap();
        assert_abs_diff_eq!(
            inner(QuadricForm::UnitSphere, &a, &b).unwrap(),
            0.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn orthogonality_iff_bistar_orthogonality_via_box() {
        // For conjugate binets, check_orthogonal(b) and
        // check_bistar_orthogonal(□b) agree in pass status.
        let b_ok = super::test_util::revolution(6, 5, std::f64::consts::PI / 7.0);
        let bs_ok = box_planes(&b_ok, 1e-9).unwrap();
        assert!(check_orthogonal(&b_ok, 1e-9).unwrap().pass());
        assert!(check_bistar_orthogonal(&bs_ok, 1e-9).unwrap().pass());
        let b_bad = super::test_util::translational(6, 6, 0.8);
        let bs_bad = box_planes(&b_bad, 1e-8).unwrap();
        assert!(!check_orthogonal(&b_bad, 1e-9).unwrap().pass());
        assert!(!check_bistar_orthogonal(&bs_bad, 1e-9).unwrap().pass());
    }

    #[test]
    fn sphere_form_isometry_preserves_unit_sphere_polarity() {
        let iso = random_form_isometry(QuadricForm::UnitSphere, 3, 0.2).unwrap();
        let a = HomVector::new(&[1.0, 0.0, 0.0, 1.0]).unwrap();
        let b = HomVector::new(&[1.0, 1.0, 0.0, 1.0]).unwrap();
        let ia = iso.transform.apply_point(&a).unwrap();
        let ib = iso.transform.apply_point(&b).unwrap();
        assert_abs_diff_eq!(
            inner(QuadricForm::UnitSphere, &ia, &ib).unwrap(),
            0.0,
            epsilon = 1e-12
        );
    }
}
