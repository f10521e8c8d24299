//! Generators and propagators: principal binets from Cauchy data, orthogonal
//! binets with their per-vertex freedom, conjugate-net generators, circular
//! nets from surfaces of revolution, and the circular↔conical reflection
//! construction with its canonical lifts.
//!
//! Cauchy data lives on the coordinate axes of V (the rows i = 0 and j = 0,
//! which must pass through the window) plus a conjugate net on the face grid
//! including a one-cell margin, so that every propagated vertex carries both
//! of its orthogonality constraints. All four quadrants are propagated
//! outward from the axes.

use nalgebra::{Matrix2, Matrix3, Vector2, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::{BTreeMap, VecDeque};

use crate::lattice::{dual_faces_of_v_edge, face_vertices, CellId, Window};
use crate::lifts::{
    lie_lift_from_parts, CellScalar, LaguerreLift, LineBicongruence, MoebiusLift,
};
use crate::nets::{meet_planes, BiStarNet, Binet, EuclideanLine, Plane};
use crate::{Error, Result};

/// Map from face-grid coordinates to points (a net on F ≅ ℤ²).
pub type FaceNet = BTreeMap<(i64, i64), Vector3<f64>>;

/// Cauchy data for the quad-by-quad propagations: a conjugate net on the
/// face grid (with margin) and values of the binet on the two coordinate
/// axes of V.
#[derive(Debug, Clone)]
pub struct CauchyData {
    pub window: Window,
    pub f_net: FaceNet,
    pub v_axes: BTreeMap<(i64, i64), Vector3<f64>>,
}

impl CauchyData {
    /// The face rectangle with one-cell margin covering every constraint the
    /// propagation can need: [i0−1, i1] × [j0−1, j1].
    pub fn support_rect(window: Window) -> (i64, i64, i64, i64) {
        (window.i0 - 1, window.i1, window.j0 - 1, window.j1)
    }

    pub fn validate(&self) -> Result<()> {
        let w = self.window;
        if !(w.i0 <= 0 && 0 <= w.i1 && w.j0 <= 0 && 0 <= w.j1) {
            return Err(Error::InvalidInput(
                "window must contain the coordinate axes of V".into(),
            ));
        }
        for i in w.i0..=w.i1 {
            if !self.v_axes.contains_key(&(i, 0)) {
                return Err(Error::MissingCell(format!("axis vertex ({i},0)")));
            }
        }
        for j in w.j0..=w.j1 {
            if !self.v_axes.contains_key(&(0, j)) {
                return Err(Error::MissingCell(format!("axis vertex (0,{j})")));
            }
        }
        // Axis edges whose dual faces both lie inside the window carry a
        // cross; the axis data must satisfy it (the propagation cannot).
        for cross in w.crosses() {
            let (CellId::Vertex(ai, aj), CellId::Vertex(bi, bj)) = (cross.v, cross.vp) else {
                continue;
            };
            let on_axis = (ai == 0 && bi == 0) || (aj == 0 && bj == 0);
            if !on_axis {
                continue;
            }
            let (Some(pa), Some(pb)) = (self.v_axes.get(&(ai, aj)), self.v_axes.get(&(bi, bj)))
            else {
                continue;
            };
            let fa = self.face_point(cross.f)?;
            let fb = self.face_point(cross.fp)?;
            let dv = pb - pa;
            let df = fb - fa;
            let res = dv.dot(&df).abs() / (dv.norm() * df.norm());
            if res > 1e-8 {
                return Err(Error::InvalidInput(format!(
                    "axis data violates the cross of edge ({ai},{aj})–({bi},{bj}): residual {res:.3e}"
                )));
            }
        }
        // Conjugacy of the face net over its support (planarity of every
        // complete quad).
        for (&(a, b), p00) in &self.f_net {
            let (Some(p10), Some(p01), Some(p11)) = (
                self.f_net.get(&(a + 1, b)),
                self.f_net.get(&(a, b + 1)),
                self.f_net.get(&(a + 1, b + 1)),
            ) else {
                continue;
            };
            let m = Matrix3::from_rows(&[
                (p10 - p00).transpose(),
                (p11 - p00).transpose(),
                (p01 - p00).transpose(),
            ]);
            let sv = m.svd(false, false).singular_values;
            if sv[2] > 1e-8 * sv[0] {
                return Err(Error::degenerate(
                    format!("f_net quad at ({a},{b}) not planar"),
                    sv[2] / sv[0],
                ));
            }
        }
        Ok(())
    }

    fn face_point(&self, f: CellId) -> Result<Vector3<f64>> {
        let (i, j) = f.coords();
        self.f_net
            .get(&(i, j))
            .copied()
            .ok_or_else(|| Error::MissingCell(format!("face data ({i},{j})")))
    }
}

/// The four propagation quadrants of a window around the axes.
fn quadrants(w: Window) -> Vec<(i64, i64)> {
    let mut out = Vec::new();
    for si in [1i64, -1] {
        for sj in [1i64, -1] {
            let has_i = if si > 0 { w.i1 >= 1 } else { w.i0 <= -1 };
            let has_j = if sj > 0 { w.j1 >= 1 } else { w.j0 <= -1 };
            if has_i && has_j {
                out.push((si, sj));
            }
        }
    }
    out
}

/// Targets of one quadrant in sweep order. `col_major` swaps the nesting of
/// the two loops; the result of the propagation is order-independent either
/// way because each target depends only on its three quad predecessors.
fn quadrant_targets(w: Window, si: i64, sj: i64, col_major: bool) -> Vec<(i64, i64)> {
    let imax = if si > 0 { w.i1 } else { -w.i0 };
    let jmax = if sj > 0 { w.j1 } else { -w.j0 };
    let mut out = Vec::new();
    if col_major {
        for jj in 1..=jmax {
            for ii in 1..=imax {
                out.push((si * ii, sj * jj));
            }
        }
    } else {
        for ii in 1..=imax {
            for jj in 1..=jmax {
                out.push((si * ii, sj * jj));
            }
        }
    }
    out
}

/// The two orthogonality constraints of a propagation target `t` relative to
/// the already-known vertices `prev_i` (same row) and `prev_j` (same
/// column): per new V-edge, a plane through the known endpoint with normal
/// along the dual F-edge difference.
fn orthogonality_planes(
    data: &CauchyData,
    t: (i64, i64),
    prev_same_col: (i64, i64),
    prev_same_row: (i64, i64),
    known_col: &Vector3<f64>,
    known_row: &Vector3<f64>,
) -> Result<(Plane, Plane)> {
    // Edge along the column: (i, j−sj) — (i, j).
    let (fa, fb) = dual_faces_of_v_edge(
        CellId::Vertex(prev_same_col.0, prev_same_col.1),
        CellId::Vertex(t.0, t.1),
    );
    let d1 = data.face_point(fb)? - data.face_point(fa)?;
    // Edge along the row: (i−si, j) — (i, j).
    let (fc, fd) = dual_faces_of_v_edge(
        CellId::Vertex(prev_same_row.0, prev_same_row.1),
        CellId::Vertex(t.0, t.1),
    );
    let d2 = data.face_point(fd)? - data.face_point(fc)?;
    let p1 = Plane::through_point(*known_col, d1)?;
    let p2 = Plane::through_point(*known_row, d2)?;
    Ok((p1, p2))
}

fn seed_axes(data: &CauchyData) -> Binet {
    let mut out = Binet::new(data.window);
    for (&(i, j), p) in &data.v_axes {
        if data.window.contains_vertex(i, j) {
            out.set(CellId::Vertex(i, j), *p);
        }
    }
    for f in data.window.faces() {
        let (i, j) = f.coords();
        if let Some(p) = data.f_net.get(&(i, j)) {
            out.set(f, *p);
        }
    }
    out
}

/// Propagates a principal binet from Cauchy data: each new vertex is the
/// unique solution of the 3×3 system (conjugacy plane of its quad plus the
/// two orthogonality constraints). The output restricts to the given face
/// net and axes.
pub fn propagate_principal(data: &CauchyData) -> Result<Binet> {
    propagate_principal_ordered(data, false)
}

/// As [`propagate_principal`], with a column-major sweep when `col_major`
/// (used to verify sweep-order independence).
pub fn propagate_principal_ordered(data: &CauchyData, col_major: bool) -> Result<Binet> {
    data.validate()?;
    let mut out = seed_axes(data);
    for (si, sj) in quadrants(data.window) {
        for (i, j) in quadrant_targets(data.window, si, sj, col_major) {
            let pc = (i, j - sj);
            let pr = (i - si, j);
            let pd = (i - si, j - sj);
            let known_col = out.point(CellId::Vertex(pc.0, pc.1))?;
            let known_row = out.point(CellId::Vertex(pr.0, pr.1))?;
            let known_diag = out.point(CellId::Vertex(pd.0, pd.1))?;
            let (p1, p2) =
                orthogonality_planes(data, (i, j), pc, pr, &known_col, &known_row)?;
            // Conjugacy plane through the three known quad points.
            let n0 = (known_col - known_diag).cross(&(known_row - known_diag));
            if n0.norm() <= 1e-12 {
                return Err(Error::degenerate(
                    format!("quad predecessors of ({i},{j}) are collinear"),
                    n0.norm(),
                ));
            }
            let p0 = Plane::through_point(known_diag, n0)?;
            let m = Matrix3::from_rows(&[
                p0.normal().transpose(),
                p1.normal().transpose(),
                p2.normal().transpose(),
            ]);
            let rhs = Vector3::new(-p0.offset(), -p1.offset(), -p2.offset());
            let det: f64 = m.determinant();
            if det.abs() <= 1e-9 {
                return Err(Error::degenerate(
                    format!("singular propagation system at ({i},{j})"),
                    det.abs(),
                ));
            }
            let x = m.lu().solve(&rhs).ok_or(Error::Singular { residual: det })?;
            out.set(CellId::Vertex(i, j), x);
        }
    }
    Ok(out)
}

/// The solution line of the two orthogonality planes at a target, affinely
/// parametrized with origin at its closest point to the centroid of the
/// three known quad points.
fn orthogonal_solution_line(
    p1: &Plane,
    p2: &Plane,
    centroid: &Vector3<f64>,
) -> Result<EuclideanLine> {
    let d = p1.normal().cross(&p2.normal());
    if d.norm() <= 1e-9 {
        return Err(Error::degenerate(
            "parallel orthogonality planes (degenerate cross)",
            d.norm(),
        ));
    }
    // Deterministic direction sign: first significant component positive.
    let mut dir = d / d.norm();
    let comps = [dir.x, dir.y, dir.z];
    if let Some(c) = comps.iter().find(|c| c.abs() > 1e-12) {
        if *c < 0.0 {
            dir = -dir;
        }
    }
    // Least-norm point on the intersection: solve the 2×2 Gram system.
    let (n1, n2) = (p1.normal(), p2.normal());
    let gram = Matrix2::new(1.0, n1.dot(&n2), n1.dot(&n2), 1.0);
    let rhs = Vector2::new(-p1.offset(), -p2.offset());
    let lam = gram
        .lu()
        .solve(&rhs)
        .ok_or(Error::Singular { residual: 0.0 })?;
    let x0 = lam[0] * n1 + lam[1] * n2;
    let origin = x0 + (centroid - x0).dot(&dir) * dir;
    EuclideanLine::new(origin, dir)
}

/// Maps the bounded freedom knob in (0,1) onto the solution line.
fn freedom_to_offset(freedom: f64) -> f64 {
    (std::f64::consts::PI * (freedom - 0.5)).tan()
}

/// Propagates an orthogonal binet: at each new vertex the two orthogonality
/// planes leave a line of solutions and `freedom(v) ∈ (0,1)` picks the point
/// on it (0.5 is the canonical origin). The output is orthogonal but
/// generally not conjugate.
pub fn propagate_orthogonal(
    data: &CauchyData,
    freedom: &BTreeMap<(i64, i64), f64>,
) -> Result<Binet> {
    data.validate()?;
    let mut out = seed_axes(data);
    for (si, sj) in quadrants(data.window) {
        for (i, j) in quadrant_targets(data.window, si, sj, false) {
            let pc = (i, j - sj);
            let pr = (i - si, j);
            let pd = (i - si, j - sj);
            let known_col = out.point(CellId::Vertex(pc.0, pc.1))?;
            let known_row = out.point(CellId::Vertex(pr.0, pr.1))?;
            let known_diag = out.point(CellId::Vertex(pd.0, pd.1))?;
            let (p1, p2) =
                orthogonality_planes(data, (i, j), pc, pr, &known_col, &known_row)?;
            let centroid = (known_col + known_row + known_diag) / 3.0;
            let line = orthogonal_solution_line(&p1, &p2, &centroid)?;
            let fr = freedom.get(&(i, j)).copied().unwrap_or(0.5);
            if !(fr > 0.0 && fr < 1.0) {
                return Err(Error::InvalidInput(format!(
                    "freedom value at ({i},{j}) must lie in (0,1), got {fr}"
                )));
            }
            out.set(CellId::Vertex(i, j), line.at(freedom_to_offset(fr)));
        }
    }
    Ok(out)
}

/// Inverse of the freedom parametrization: the freedom map that makes
/// [`propagate_orthogonal`] reproduce `target` (assumed orthogonal for the
/// same Cauchy data). Used to cross-validate the two propagators.
pub fn orthogonal_freedom_of(
    data: &CauchyData,
    target: &Binet,
) -> Result<BTreeMap<(i64, i64), f64>> {
    data.validate()?;
    let mut freedom = BTreeMap::new();
    for (si, sj) in quadrants(data.window) {
        for (i, j) in quadrant_targets(data.window, si, sj, false) {
            let pc = (i, j - sj);
            let pr = (i - si, j);
            let pd = (i - si, j - sj);
            let known_col = target.point(CellId::Vertex(pc.0, pc.1))?;
            let known_row = target.point(CellId::Vertex(pr.0, pr.1))?;
            let known_diag = target.point(CellId::Vertex(pd.0, pd.1))?;
            let (p1, p2) =
                orthogonality_planes(data, (i, j), pc, pr, &known_col, &known_row)?;
            let centroid = (known_col + known_row + known_diag) / 3.0;
            let line = orthogonal_solution_line(&p1, &p2, &centroid)?;
            let x = target.point(CellId::Vertex(i, j))?;
            let t = (x - line.point()).dot(&line.direction());
            freedom.insert((i, j), 0.5 + t.atan() / std::f64::consts::PI);
        }
    }
    Ok(freedom)
}

/// Seeded conjugate net on the margin face rectangle of `window`: axes are
/// random affine rows from the seed, each interior point is drawn in the
/// plane of its three predecessors with 2-parameter noise. Conjugate exactly
/// by construction; noise 0 gives an affine image of the integer grid.
pub fn generate_conjugate_net(seed: u64, window: Window, noise: f64) -> FaceNet {
    let (a0, a1, b0, b1) = CauchyData::support_rect(window);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rv = |s: f64| {
        Vector3::new(
            rng.gen_range(-1.0..1.0) * s,
            rng.gen_range(-1.0..1.0) * s,
            rng.gen_range(-1.0..1.0) * s,
        )
    };
    let origin = Vector3::new(0.5, 0.5, 0.7) + rv(0.5);
    let step_a = Vector3::new(1.0, 0.0, 0.0) + rv(0.2);
    let step_b = Vector3::new(0.0, 1.0, 0.0) + rv(0.2);
    let mut net: FaceNet = BTreeMap::new();
    for a in a0..=a1 {
        for b in b0..=b1 {
            net.insert(
                (a, b),
                origin + (a - a0) as f64 * step_a + (b - b0) as f64 * step_b,
            );
        }
    }
    // Axis rows keep their affine positions plus noise along the row.
    let mut rng2 = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1));
    let mut wiggle = |p: &mut Vector3<f64>| {
        *p += Vector3::new(
            rng2.gen_range(-1.0..1.0) * noise,
            rng2.gen_range(-1.0..1.0) * noise,
            rng2.gen_range(-1.0..1.0) * noise,
        );
    };
    for a in a0..=a1 {
        wiggle(net.get_mut(&(a, b0)).unwrap());
    }
    for b in (b0 + 1)..=b1 {
        wiggle(net.get_mut(&(a0, b)).unwrap());
    }
    // Interior: point in the plane of its three predecessors with noisy
    // barycentric coefficients (keeps quads planar exactly).
    let mut rng3 = ChaCha8Rng::seed_from_u64(seed.wrapping_add(2));
    for a in (a0 + 1)..=a1 {
        for b in (b0 + 1)..=b1 {
            let p00 = net[&(a - 1, b - 1)];
            let p10 = net[&(a, b - 1)];
            let p01 = net[&(a - 1, b)];
            let alpha = 1.0 + noise * rng3.gen_range(-1.0..1.0);
            let beta = 1.0 + noise * rng3.gen_range(-1.0..1.0);
            net.insert((a, b), p00 + alpha * (p10 - p00) + beta * (p01 - p00));
        }
    }
    net
}

/// Cauchy data with a seeded conjugate face net and random axes. Axis steps
/// are drawn perpendicular to the dual face-edge differences, so the crosses
/// carried by axis edges (present whenever the window extends to both sides
/// of an axis) hold by construction.
pub fn generate_cauchy_data(seed: u64, window: Window, noise: f64) -> CauchyData {
    let f_net = generate_conjugate_net(seed, window, noise);
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(7));
    let mut rv = |base: Vector3<f64>| {
        base + Vector3::new(
            0.3 * rng.gen_range(-1.0..1.0),
            0.3 * rng.gen_range(-1.0..1.0),
            0.3 * rng.gen_range(-1.0..1.0),
        )
    };
    let mut v_axes: BTreeMap<(i64, i64), Vector3<f64>> = BTreeMap::new();
    v_axes.insert((0, 0), rv(Vector3::new(0.0, 0.0, -0.6)));
    // Row j = 0: the step over edge ((i,0),(i+1,0)) must be perpendicular to
    // g(F(i,0)) − g(F(i,−1)).
    let perp_step = |step: Vector3<f64>, df: Vector3<f64>| -> Vector3<f64> {
        let n = df.norm();
        if n <= 1e-12 {
            return step;
        }
        let u = df / n;
        let s = step - step.dot(&u) * u;
        if s.norm() > 0.2 {
            s
        } else {
            // Degenerate draw; fall back to a deterministic perpendicular.
            let mut t = u.cross(&Vector3::new(1.0, 0.0, 0.0));
            if t.norm() < 0.1 {
                t = u.cross(&Vector3::new(0.0, 1.0, 0.0));
            }
            t.normalize()
        }
    };
    for i in 0..window.i1 {
        let df = f_net[&(i, 0)] - f_net[&(i, -1)];
        let step = perp_step(rv(Vector3::new(1.0, 0.0, 0.0)), df);
        let prev = v_axes[&(i, 0)];
        v_axes.insert((i + 1, 0), prev + step);
    }
    for i in (window.i0..0).rev() {
        let df = f_net[&(i, 0)] - f_net[&(i, -1)];
        let step = perp_step(rv(Vector3::new(1.0, 0.0, 0.0)), df);
        let prev = v_axes[&(i + 1, 0)];
        v_axes.insert((i, 0), prev - step);
    }
    // Column i = 0: the step over edge ((0,j),(0,j+1)) must be perpendicular
    // to g(F(0,j)) − g(F(−1,j)).
    for j in 0..window.j1 {
        let df = f_net[&(0, j)] - f_net[&(-1, j)];
        let step = perp_step(rv(Vector3::new(0.0, 1.0, 0.0)), df);
        let prev = v_axes[&(0, j)];
        v_axes.insert((0, j + 1), prev + step);
    }
    for j in (window.j0..0).rev() {
        let df = f_net[&(0, j)] - f_net[&(-1, j)];
        let step = perp_step(rv(Vector3::new(0.0, 1.0, 0.0)), df);
        let prev = v_axes[&(0, j + 1)];
        v_axes.insert((0, j), prev - step);
    }
    CauchyData {
        window,
        f_net,
        v_axes,
    }
}

// ---------------------------------------------------------------------------
// Revolution generators
// ---------------------------------------------------------------------------

/// A profile curve for surfaces of revolution: samples (radius, height),
/// rotated in `count` steps of `angular_step`.
#[derive(Debug, Clone)]
pub struct ProfileCurve {
    pub samples: Vec<(f64, f64)>,
    pub angular_step: f64,
    pub count: usize,
}

impl ProfileCurve {
    pub fn new(samples: Vec<(f64, f64)>, angular_step: f64, count: usize) -> Result<Self> {
        if samples.len() < 2 || count < 2 {
            return Err(Error::InvalidInput(
                "profile needs at least 2 samples and 2 angular steps".into(),
            ));
        }
        for w in samples.windows(2) {
            if (w[0].0 - w[1].0).abs() + (w[0].1 - w[1].1).abs() < 1e-12 {
                return Err(Error::InvalidInput(
                    "consecutive profile samples must be distinct".into(),
                ));
            }
        }
        if samples.iter().any(|&(r, _)| r <= 0.0) {
            return Err(Error::InvalidInput("profile radii must be positive".into()));
        }
        Ok(ProfileCurve {
            samples,
            angular_step,
            count,
        })
    }

    fn point(&self, i: i64, j: usize) -> Vector3<f64> {
        let (r, z) = self.samples[j];
        let a = i as f64 * self.angular_step;
        Vector3::new(r * a.cos(), r * a.sin(), z)
    }
}

/// Circular net from a surface of revolution: b(i,j) = (rⱼ cos iθ,
/// rⱼ sin iθ, zⱼ) on the vertices only. Every quad is a planar isosceles
/// trapezoid, hence cyclic.
pub fn generate_revolution_circular(profile: &ProfileCurve) -> Result<Binet> {
    let w = Window::sized(profile.count, profile.samples.len());
    let mut b = Binet::new(w);
    for v in w.vertices() {
        let (i, j) = v.coords();
        b.set(v, profile.point(i, j as usize));
    }
    Ok(b)
}

/// Full revolution binet: vertices from the profile, faces from the
/// midpoint profile at half-angle offsets. Principal for any profile.
pub fn revolution_binet(profile: &ProfileCurve) -> Result<Binet> {
    let w = Window::sized(profile.count, profile.samples.len());
    let mut b = generate_revolution_circular(profile)?;
    for f in w.faces() {
        let (i, j) = f.coords();
        let (r0, z0) = profile.samples[j as usize];
        let (r1, z1) = profile.samples[j as usize + 1];
        let (r, z) = (0.5 * (r0 + r1), 0.5 * (z0 + z1));
        let a = (i as f64 + 0.5) * profile.angular_step;
        b.set(f, Vector3::new(r * a.cos(), r * a.sin(), z));
    }
    Ok(b)
}

/// Cauchy data whose unique principal completion is the analytic revolution
/// binet (face net with margin from the staggered profile, axes from the
/// vertex profile).
pub fn revolution_cauchy_data(profile: &ProfileCurve) -> Result<CauchyData> {
    let window = Window::sized(profile.count, profile.samples.len());
    let mut f_net = BTreeMap::new();
    let (a0, a1, b0, b1) = CauchyData::support_rect(window);
    for a in a0..=a1 {
        for bj in b0.max(0)..=b1.min(profile.samples.len() as i64 - 1) {
            // Midpoint profile extended one step past the seam by mirroring.
            let j = bj as usize;
            let (rj, zj) = profile.samples[j];
            let (rj1, zj1) = profile.samples[(j + 1).min(profile.samples.len() - 1)];
            let (r, z) = if j + 1 < profile.samples.len() {
                (0.5 * (rj + rj1), 0.5 * (zj + zj1))
            } else {
                (rj, zj)
            };
            let ang = (a as f64 + 0.5) * profile.angular_step;
            f_net.insert((a, bj), Vector3::new(r * ang.cos(), r * ang.sin(), z));
        }
    }
    let mut v_axes = BTreeMap::new();
    for i in window.i0..=window.i1 {
        v_axes.insert((i, 0), profile.point(i, 0));
    }
    for j in window.j0..=window.j1 {
        v_axes.insert((0, j), profile.point(0, j as usize));
    }
    Ok(CauchyData {
        window,
        f_net,
        v_axes,
    })
}

// ---------------------------------------------------------------------------
// Curvature-calibrated generators
// ---------------------------------------------------------------------------

/// Unit-cylinder binet: vertices at heights `zs` (one per row), faces on the
/// cylinder at mid-heights and half-angle offsets. With the canonical gauge
/// ρ(v₀₀) = (z₀²−1)/2 + cos(θ/2), the circular-direction principal
/// curvature spheres have radius exactly 1.
pub fn cylinder_binet(m: usize, theta: f64, zs: &[f64]) -> Result<Binet> {
    if zs.len() < 2 {
        return Err(Error::InvalidInput("need at least 2 rows".into()));
    }
    let w = Window::sized(m, zs.len());
    let mut b = Binet::new(w);
    for v in w.vertices() {
        let (i, j) = v.coords();
        let a = i as f64 * theta;
        b.set(v, Vector3::new(a.cos(), a.sin(), zs[j as usize]));
    }
    for f in w.faces() {
        let (i, j) = f.coords();
        let a = (i as f64 + 0.5) * theta;
        let z = 0.5 * (zs[j as usize] + zs[j as usize + 1]);
        b.set(f, Vector3::new(a.cos(), a.sin(), z));
    }
    Ok(b)
}

/// The canonical anchor potential for [`cylinder_binet`] (anchor cell is the
/// smallest vertex, at row 0).
pub fn cylinder_canonical_rho0(theta: f64, zs: &[f64]) -> f64 {
    0.5 * (zs[0] * zs[0] - 1.0) + (0.5 * theta).cos()
}

/// Unit-sphere binet whose discrete normals all pass through the origin:
/// vertex rows at polar angles t and staggered face rows at angles t_f,
/// generated by the two closed-form reflections
/// t_{j+1} = π − t_j − 2·atan2(cos t_f, cos(θ/2)·sin t_f) and
/// t_{f,j} = π − t_{f,j−1} − 2·atan2(cos t_j, cos(θ/2)·sin t_j).
/// Returns the binet plus the vertex/face polar-angle rows.
pub fn sphere_binet(
    m: usize,
    rows: usize,
    theta: f64,
    t0: f64,
    tf0: f64,
) -> Result<(Binet, Vec<f64>, Vec<f64>)> {
    if rows < 2 {
        return Err(Error::InvalidInput("need at least 2 rows".into()));
    }
    let c = (0.5 * theta).cos();
    let mut t = vec![t0];
    let mut tf = vec![tf0];
    for j in 0..rows - 1 {
        // Face condition at face row j determines the next vertex row.
        let phi = f64::atan2(tf[j].cos(), c * tf[j].sin());
        let tn = std::f64::consts::PI - t[j] - 2.0 * phi;
        t.push(tn);
        if j + 1 < rows - 1 {
            // Vertex condition at vertex row j+1 determines the next face row.
            let psi = f64::atan2(tn.cos(), c * tn.sin());
            tf.push(std::f64::consts::PI - tf[j] - 2.0 * psi);
        }
    }
    for &x in t.iter().chain(tf.iter()) {
        if !(x > 0.05 && x < std::f64::consts::PI - 0.05) {
            return Err(Error::degenerate(
                "sphere profile leaves the polar range; pick smaller steps",
                x,
            ));
        }
    }
    let w = Window::sized(m, rows);
    let mut b = Binet::new(w);
    for v in w.vertices() {
        let (i, j) = v.coords();
        let a = i as f64 * theta;
        let tj = t[j as usize];
        b.set(
            v,
            Vector3::new(tj.sin() * a.cos(), tj.sin() * a.sin(), tj.cos()),
        );
    }
    for f in w.faces() {
        let (i, j) = f.coords();
        let a = (i as f64 + 0.5) * theta;
        let tj = tf[j as usize];
        b.set(
            f,
            Vector3::new(tj.sin() * a.cos(), tj.sin() * a.sin(), tj.cos()),
        );
    }
    Ok((b, t, tf))
}

/// Canonical anchor potential for [`sphere_binet`]: point spheres on V
/// (ρ(v) = |v|²/2 = 1/2); the complementary-family curvature spheres then
/// coincide with the unit sphere.
pub fn sphere_canonical_rho0() -> f64 {
    0.5
}

// ---------------------------------------------------------------------------
// Circumcircles and the reflection construction
// ---------------------------------------------------------------------------

/// Circumcircle of four concyclic points: center, radius and axis direction
/// (unit normal of the quad's plane).
pub fn circumcircle(
    quad: &[Vector3<f64>; 4],
    tol: f64,
) -> Result<(Vector3<f64>, f64, Vector3<f64>)> {
    let (plane, flatness) = crate::nets::fit_plane(&quad[..])
        .map_err(|_| Error::degenerate("circumcircle of collinear points", 1.0))?;
    let scale = quad
        .iter()
        .map(|p| (p - quad[0]).norm())
        .fold(0.0, f64::max);
    if flatness * scale > tol * (1.0 + scale) {
        return Err(Error::degenerate("points are not coplanar", flatness));
    }
    // Circumcenter of the first three points, constrained to the plane.
    let n = plane.normal();
    let m = Matrix3::from_rows(&[
        (2.0 * (quad[1] - quad[0])).transpose(),
        (2.0 * (quad[2] - quad[0])).transpose(),
        n.transpose(),
    ]);
    let rhs = Vector3::new(
        quad[1].norm_squared() - quad[0].norm_squared(),
        quad[2].norm_squared() - quad[0].norm_squared(),
        n.dot(&quad[0]),
    );
    let det: f64 = m.determinant();
    if det.abs() <= 1e-12 * (1.0 + scale * scale) {
        return Err(Error::degenerate("circumcircle of collinear points", det.abs()));
    }
    let center = m.lu().solve(&rhs).ok_or(Error::Singular { residual: det })?;
    let r = (quad[0] - center).norm();
    let worst = quad
        .iter()
        .map(|p| ((p - center).norm() - r).abs())
        .fold(0.0, f64::max);
    if worst > tol * (1.0 + r) {
        return Err(Error::degenerate("points are not concyclic", worst / (1.0 + r)));
    }
    Ok((center, r, n))
}

/// Max circumcircle defect over the quads of a V-net (distance of the 4th
/// point from the circumcircle of the other three).
pub fn circularity_residual(g: &Binet) -> Result<f64> {
    let mut worst = 0.0_f64;
    for f in g.window().faces() {
        let vs = face_vertices(f);
        let pts: Option<Vec<Vector3<f64>>> = vs.iter().map(|v| g.get(*v).copied()).collect();
        let Some(p) = pts else { continue };
        let quad = [p[0], p[1], p[2], p[3]];
        match circumcircle(&quad, f64::INFINITY) {
            Ok((center, r, _)) => {
                let defect = quad
                    .iter()
                    .map(|q| ((q - center).norm() - r).abs())
                    .fold(0.0, f64::max);
                worst = worst.max(defect / (1.0 + r));
            }
            Err(_) => return Err(Error::degenerate(format!("degenerate quad at {f}"), 1.0)),
        }
    }
    Ok(worst)
}

/// Affine reflection across a plane, composable as (R, t): x ↦ Rx + t.
#[derive(Debug, Clone, Copy)]
struct Reflection {
    r: Matrix3<f64>,
    t: Vector3<f64>,
}

impl Reflection {
    fn across(p: &Plane) -> Self {
        let n = p.normal();
        Reflection {
            r: Matrix3::identity() - 2.0 * n * n.transpose(),
            t: -2.0 * p.offset() * n,
        }
    }

    fn then(&self, next: &Reflection) -> Reflection {
        Reflection {
            r: next.r * self.r,
            t: next.r * self.t + next.t,
        }
    }

    fn identity_defect(&self) -> f64 {
        (self.r - Matrix3::identity()).norm() + self.t.norm()
    }
}

/// Result of the circular↔conical reflection construction: oriented planes
/// per vertex and the worst four-reflection closure defect over faces.
#[derive(Debug, Clone)]
pub struct ReflectedStarNet {
    pub planes: BiStarNet,
    pub closure_residual: f64,
}

/// Mirror plane of a V-edge of a circular net: the perpendicular bisector
/// plane of the segment (both adjacent circle axes lie in it).
fn edge_mirror(ga: &Vector3<f64>, gb: &Vector3<f64>) -> Result<Plane> {
    Plane::through_point((ga + gb) * 0.5, gb - ga)
}

/// Conical *net from a circular net by reflections: the initial plane at the
/// smallest vertex is propagated edge-wise across the perpendicular bisector
/// planes. Closure of the four reflections around every face is reported and
/// gated at `tol`.
pub fn reflection_conical_from_circular(
    g: &Binet,
    h0: Plane,
    tol: f64,
) -> Result<ReflectedStarNet> {
    let w = g.window();
    let root = CellId::Vertex(w.i0, w.j0);
    let g_root = g.point(root)?;
    if h0.signed_distance(&g_root).abs() > 1e-9 * (1.0 + g_root.norm()) {
        return Err(Error::InvalidInput(
            "initial plane must contain the initial vertex point".into(),
        ));
    }
    let planes = propagate_planes_by_reflection(g, root, h0)?;
    let closure_residual = reflection_closure_residual(g)?;
    if closure_residual > tol {
        return Err(Error::degenerate(
            "four-reflection closure failed: input is not circular",
            closure_residual,
        ));
    }
    Ok(ReflectedStarNet {
        planes,
        closure_residual,
    })
}

fn propagate_planes_by_reflection(g: &Binet, root: CellId, h0: Plane) -> Result<BiStarNet> {
    let w = g.window();
    let mut out = BiStarNet::new(w);
    out.set(root, h0);
    let mut queue = VecDeque::new();
    queue.push_back(root);
    while let Some(v) = queue.pop_front() {
        let (i, j) = v.coords();
        let pv = g.point(v)?;
        let hv = *out.get(v).unwrap();
        for (di, dj) in [(1i64, 0i64), (-1, 0), (0, 1), (0, -1)] {
            let nb = CellId::Vertex(i + di, j + dj);
            if !w.contains(nb) || out.has(nb) || g.get(nb).is_none() {
                continue;
            }
            let pn = g.point(nb)?;
            let mirror = edge_mirror(&pv, &pn)?;
            out.set(nb, mirror.reflect_plane(&hv));
            queue.push_back(nb);
        }
    }
    Ok(out)
}

/// Worst composition defect of the four edge reflections around the faces of
/// a circular net (identity for exactly circular data).
pub fn reflection_closure_residual(g: &Binet) -> Result<f64> {
    let mut worst = 0.0_f64;
    for f in g.window().faces() {
        let vs = face_vertices(f);
        let pts: Option<Vec<Vector3<f64>>> = vs.iter().map(|v| g.get(*v).copied()).collect();
        let Some(p) = pts else { continue };
        let mut total: Option<Reflection> = None;
        for k in 0..4 {
            let refl = Reflection::across(&edge_mirror(&p[k], &p[(k + 1) % 4])?);
            total = Some(match total {
                None => refl,
                Some(t) => t.then(&refl),
            });
        }
        worst = worst.max(total.unwrap().identity_defect());
    }
    Ok(worst)
}

/// Circular net from an oriented conical *net by reflections: mirrors are
/// recovered from consecutive oriented planes (normal u(v) − u(v′) through
/// their intersection line), and the initial point is propagated edge-wise.
/// The mirror set coincides with that of the forward construction, so a
/// round trip reproduces the original circular net.
pub fn reflection_circular_from_conical(
    h: &BiStarNet,
    g0: Vector3<f64>,
    tol: f64,
) -> Result<Binet> {
    let w = h.window();
    let root = CellId::Vertex(w.i0, w.j0);
    if h.get(root).is_none() {
        return Err(Error::MissingCell(root.to_string()));
    }
    let mut out = Binet::new(w);
    out.set(root, g0);
    let mut queue = VecDeque::new();
    queue.push_back(root);
    let mut worst_closure = 0.0_f64;
    while let Some(v) = queue.pop_front() {
        let (i, j) = v.coords();
        let pv = out.point(v)?;
        let hv = h.plane(v)?;
        for (di, dj) in [(1i64, 0i64), (-1, 0), (0, 1), (0, -1)] {
            let nb = CellId::Vertex(i + di, j + dj);
            if !w.contains(nb) || h.get(nb).is_none() {
                continue;
            }
            let hn = h.plane(nb)?;
            let mirror_normal = hv.normal() - hn.normal();
            if mirror_normal.norm() <= 1e-12 {
                return Err(Error::degenerate(
                    format!("parallel oriented planes at edge {v}–{nb}"),
                    mirror_normal.norm(),
                ));
            }
            let mirror = Plane::new(mirror_normal, hv.offset() - hn.offset())?;
            let image = mirror.reflect_point(&pv);
            if let Some(existing) = out.get(nb) {
                worst_closure = worst_closure.max((existing - image).norm());
            } else {
                out.set(nb, image);
                queue.push_back(nb);
            }
        }
    }
    if worst_closure > tol {
        return Err(Error::degenerate(
            "reflection closure failed: input is not conical",
            worst_closure,
        ));
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Circular-conical binets and their canonical lifts
// ---------------------------------------------------------------------------

/// A circular-conical binet with the data of its canonical lifts: the binet
/// (circular net on V, cone apexes on F), the conical *net on V, the full
/// tangent bi*net, and the canonical Möbius/Laguerre/Lie lifts.
#[derive(Debug, Clone)]
pub struct CircularConical {
    pub binet: Binet,
    pub conical: BiStarNet,
    pub tangent_planes: BiStarNet,
    pub moebius: MoebiusLift,
    pub laguerre: LaguerreLift,
    pub lie: LineBicongruence,
}

/// Builds the circular-conical binet of a circular net and a reflected
/// conical *net: F-points are the common points of the four planes around
/// each face (on the circle axis), the tangent bi*net carries the conical
/// planes on V and the circle planes on F, and the canonical lifts place the
/// V-lift on the respective quadrics (point spheres and oriented planes).
pub fn circular_conical_binet(g: &Binet, h: &BiStarNet, tol: f64) -> Result<CircularConical> {
    let w = g.window();
    let mut binet = Binet::new(w);
    let mut tangent = BiStarNet::new(w);
    let mut rho: CellScalar = BTreeMap::new();
    let mut sigma: CellScalar = BTreeMap::new();
    for v in w.vertices() {
        let (Some(p), Some(plane)) = (g.get(v), h.get(v)) else {
            continue;
        };
        binet.set(v, *p);
        tangent.set(v, *plane);
        rho.insert(v, 0.5 * p.norm_squared());
        sigma.insert(v, 1.0);
    }
    for f in w.faces() {
        let vs = face_vertices(f);
        let planes: Option<Vec<Plane>> = vs.iter().map(|v| h.get(*v).copied()).collect();
        let pts: Option<Vec<Vector3<f64>>> = vs.iter().map(|v| g.get(*v).copied()).collect();
        let (Some(planes), Some(pts)) = (planes, pts) else {
            continue;
        };
        let apex = meet_planes(&planes, tol.max(1e-7))?;
        binet.set(f, apex);
        // Sphere through the circle, centered at the apex.
        let r_sq = pts.iter().map(|p| (p - apex).norm_squared()).sum::<f64>() / 4.0;
        rho.insert(f, 0.5 * (apex.norm_squared() - r_sq));
        // Circle plane, oriented toward the vertex-plane normals.
        let quad = [pts[0], pts[1], pts[2], pts[3]];
        let (center, _r, mut axis) = circumcircle(&quad, tol.max(1e-7))?;
        let u0 = h.get(vs[0]).unwrap().normal();
        if axis.dot(&u0) < 0.0 {
            axis = -axis;
        }
        tangent.set(f, Plane::through_point(center, axis)?);
        let s = vs
            .iter()
            .map(|v| h.get(*v).unwrap().normal().dot(&axis))
            .sum::<f64>()
            / 4.0;
        sigma.insert(f, s);
    }
    let moebius = MoebiusLift::from_potential(&binet, &rho)?;
    let laguerre = LaguerreLift::from_oriented(&tangent, &sigma)?;
    let lie = lie_lift_from_parts(&moebius, &laguerre)?;
    Ok(CircularConical {
        binet,
        conical: h.clone(),
        tangent_planes: tangent,
        moebius,
        laguerre,
        lie,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lifts::{moebius_lift, sphere_from_lift};
    use crate::nets::{check_conjugate, check_orthogonal};
    use crate::projective::{inner, QuadricForm};
    use approx::assert_abs_diff_eq;

    fn planar_cauchy(m: usize, n: usize) -> CauchyData {
        let window = Window::sized(m, n);
        let (a0, a1, b0, b1) = CauchyData::support_rect(window);
        let mut f_net = BTreeMap::new();
        for a in a0..=a1 {
            for b in b0..=b1 {
                f_net.insert((a, b), Vector3::new(a as f64 + 0.5, b as f64 + 0.5, 0.0));
            }
        }
        let mut v_axes = BTreeMap::new();
        for i in 0..m as i64 {
            v_axes.insert((i, 0), Vector3::new(i as f64, 0.0, 0.0));
        }
        for j in 0..n as i64 {
            v_axes.insert((0, j), Vector3::new(0.0, j as f64, 0.0));
        }
        CauchyData {
            window,
            f_net,
            v_axes,
        }
    }

    #[test]
    fn principal_propagation_reproduces_planar_grid() {
        let b = propagate_principal(&planar_cauchy(5, 4)).unwrap();
        for v in b.window().vertices() {
            let (i, j) = v.coords();
            let p = b.point(v).unwrap();
            assert!((p - Vector3::new(i as f64, j as f64, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn principal_propagation_reproduces_revolution() {
        let profile = ProfileCurve::new(
            vec![(1.0, 0.0), (1.3, 0.8), (1.45, 1.7), (1.4, 2.5), (1.2, 3.1)],
            0.5,
            6,
        )
        .unwrap();
        let analytic = revolution_binet(&profile).unwrap();
        let data = revolution_cauchy_data(&profile).unwrap();
        let b = propagate_principal(&data).unwrap();
        for (c, p) in analytic.cells() {
            let q = b.point(*c).unwrap();
            assert!((p - q).norm() < 1e-10, "cell {c}: {p:?} vs {q:?}");
        }
    }

    #[test]
    fn principal_propagation_passes_checks() {
        for seed in [1u64, 7, 23] {
            let data = generate_cauchy_data(seed, Window::sized(8, 8), 0.1);
            let b = propagate_principal(&data).unwrap();
            let conj = check_conjugate(&b, 1e-9);
            assert!(conj.pass(), "seed {seed}: {conj}");
            let orth = check_orthogonal(&b, 1e-9).unwrap();
            assert!(orth.pass(), "seed {seed}: {orth}");
        }
    }

    #[test]
    fn principal_propagation_four_quadrants() {
        let window = Window::new(-3, 3, -2, 4);
        let data = generate_cauchy_data(11, window, 0.08);
        let b = propagate_principal(&data).unwrap();
        assert!(b.is_complete());
        assert!(check_conjugate(&b, 1e-9).pass());
        assert!(check_orthogonal(&b, 1e-9).unwrap().pass());
    }

    #[test]
    fn sweep_order_independence() {
        let data = generate_cauchy_data(3, Window::sized(7, 6), 0.12);
        let row = propagate_principal_ordered(&data, false).unwrap();
        let col = propagate_principal_ordered(&data, true).unwrap();
        for (c, p) in row.cells() {
            let q = col.point(*c).unwrap();
            assert!((p - q).norm() < 1e-10);
        }
    }

    #[test]
    fn orthogonal_propagation_midpoint_on_planar_grid() {
        let data = planar_cauchy(5, 5);
        let freedom = BTreeMap::new(); // defaults to 0.5 everywhere
        let b = propagate_orthogonal(&data, &freedom).unwrap();
        let orth = check_orthogonal(&b, 1e-12).unwrap();
        assert!(orth.pass(), "{orth}");
        assert_abs_diff_eq!(orth.max_residual(), 0.0, epsilon = 1e-13);
    }

    #[test]
    fn orthogonal_propagation_random_freedom() {
        use rand::{Rng, SeedableRng};
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let data = generate_cauchy_data(5, Window::sized(7, 7), 0.1);
        let mut freedom = BTreeMap::new();
        for i in 1..7i64 {
            for j in 1..7i64 {
                freedom.insert((i, j), rng.gen_range(0.15..0.85));
            }
        }
        let b = propagate_orthogonal(&data, &freedom).unwrap();
        assert!(check_orthogonal(&b, 1e-9).unwrap().pass());
        let conj = check_conjugate(&b, 1e-9);
        assert!(
            conj.max_residual() > 1e-3,
            "random freedom should break conjugacy, got {}",
            conj.max_residual()
        );
    }

    #[test]
    fn freedom_dof_audit() {
        // Identical freedom maps give identical binets; distinct maps give
        // distinct binets; principal propagation has no choice at all.
        use rand::{Rng, SeedableRng};
        let data = generate_cauchy_data(9, Window::sized(5, 5), 0.1);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut fr1 = BTreeMap::new();
        for i in 1..5i64 {
            for j in 1..5i64 {
                fr1.insert((i, j), rng.gen_range(0.2..0.8));
            }
        }
        let mut fr2 = fr1.clone();
        fr2.insert((2, 2), fr1[&(2, 2)] + 0.05);
        let b1 = propagate_orthogonal(&data, &fr1).unwrap();
        let b1b = propagate_orthogonal(&data, &fr1).unwrap();
        let b2 = propagate_orthogonal(&data, &fr2).unwrap();
        let mut same = 0.0_f64;
        let mut diff = 0.0_f64;
        for (c, p) in b1.cells() {
            same = same.max((p - b1b.point(*c).unwrap()).norm());
            diff = diff.max((p - b2.point(*c).unwrap()).norm());
        }
        assert_abs_diff_eq!(same, 0.0);
        assert!(diff > 1e-4);
        let p1 = propagate_principal(&data).unwrap();
        let p2 = propagate_principal(&data).unwrap();
        for (c, p) in p1.cells() {
            assert_eq!(*p, p2.point(*c).unwrap());
        }
    }

    #[test]
    fn orthogonal_propagation_crosses_principal() {
        // Freedom derived from the principal output reproduces it.
        let data = generate_cauchy_data(13, Window::sized(6, 6), 0.1);
        let principal = propagate_principal(&data).unwrap();
        let freedom = orthogonal_freedom_of(&data, &principal).unwrap();
        let b = propagate_orthogonal(&data, &freedom).unwrap();
        for (c, p) in principal.cells() {
            let q = b.point(*c).unwrap();
            assert!((p - q).norm() < 1e-9, "cell {c}");
        }
    }

    #[test]
    fn conjugate_net_generator_properties() {
        let w = Window::sized(8, 8);
        // Determinism.
        let n1 = generate_conjugate_net(7, w, 0.1);
        let n2 = generate_conjugate_net(7, w, 0.1);
        assert_eq!(n1.len(), n2.len());
        for (k, v) in &n1 {
            assert_eq!(v, &n2[k]);
        }
        // Conjugacy is exact by construction.
        for (&(a, b), p00) in &n1 {
            let (Some(p10), Some(p01), Some(p11)) = (
                n1.get(&(a + 1, b)),
                n1.get(&(a, b + 1)),
                n1.get(&(a + 1, b + 1)),
            ) else {
                continue;
            };
            let m = Matrix3::from_rows(&[
                (p10 - p00).transpose(),
                (p11 - p00).transpose(),
                (p01 - p00).transpose(),
            ]);
            let sv = m.svd(false, false).singular_values;
            assert!(sv[2] / sv[0] < 1e-12);
        }
        // Noise 0: affine image of the grid (all quads are parallelograms).
        let flat = generate_conjugate_net(5, w, 0.0);
        for (&(a, b), p00) in &flat {
            let (Some(p10), Some(p01), Some(p11)) = (
                flat.get(&(a + 1, b)),
                flat.get(&(a, b + 1)),
                flat.get(&(a + 1, b + 1)),
            ) else {
                continue;
            };
            assert!((p11 - p10 - p01 + p00).norm() < 1e-12);
        }
    }

    #[test]
    fn revolution_circular_families() {
        // Cylinder, sphere and cone profiles all give circular nets.
        let theta = std::f64::consts::PI / 8.0;
        let cyl = ProfileCurve::new(
            (0..5).map(|j| (1.0, j as f64 * 0.6)).collect(),
            theta,
            7,
        )
        .unwrap();
        let sph = ProfileCurve::new(
            (0..5)
                .map(|j| {
                    let t = 0.5 + 0.45 * j as f64;
                    (t.sin(), t.cos())
                })
                .collect(),
            theta,
            7,
        )
        .unwrap();
        let cone = ProfileCurve::new(
            (1..6).map(|j| (0.4 * j as f64, 0.4 * j as f64)).collect(),
            theta,
            7,
        )
        .unwrap();
        for (name, profile) in [("cylinder", &cyl), ("sphere", &sph), ("cone", &cone)] {
            let g = generate_revolution_circular(profile).unwrap();
            let res = circularity_residual(&g).unwrap();
            assert!(res < 1e-12, "{name}: circularity residual {res}");
            if name == "sphere" {
                for (_, p) in g.cells() {
                    assert_abs_diff_eq!(p.norm(), 1.0, epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn revolution_binet_is_principal() {
        let profile = ProfileCurve::new(
            vec![(1.0, 0.0), (1.4, 0.7), (1.5, 1.6), (1.3, 2.2)],
            0.6,
            6,
        )
        .unwrap();
        let b = revolution_binet(&profile).unwrap();
        assert!(check_conjugate(&b, 1e-9).pass());
        assert!(check_orthogonal(&b, 1e-9).unwrap().pass());
    }

    #[test]
    fn circumcircle_examples() {
        // Unit square: center at the centroid, radius √2/2, axis (0,0,1).
        let quad = [
            Vector3::new(0.0, 0.0, 0.0),
            Vector3::new(1.0, 0.0, 0.0),
            Vector3::new(1.0, 1.0, 0.0),
            Vector3::new(0.0, 1.0, 0.0),
        ];
        let (c, r, axis) = circumcircle(&quad, 1e-12).unwrap();
        assert!((c - Vector3::new(0.5, 0.5, 0.0)).norm() < 1e-12);
        assert_abs_diff_eq!(r, 0.5_f64.sqrt(), epsilon = 1e-12);
        assert!(axis.cross(&Vector3::new(0.0, 0.0, 1.0)).norm() < 1e-12);
        // Perturbed square: non-concyclic error.
        let mut bad = quad;
        bad[2] += Vector3::new(1e-3, 0.0, 0.0);
        assert!(circumcircle(&bad, 1e-9).is_err());
        // Collinear points rejected.
        let line = [
            Vector3::new(0.0, 0.0, 0.0),
            Vector3::new(1.0, 0.0, 0.0),
            Vector3::new(2.0, 0.0, 0.0),
            Vector3::new(3.0, 0.0, 0.0),
        ];
        assert!(circumcircle(&line, 1e-9).is_err());
    }

    #[test]
    fn circumcircle_of_revolution_trapezoids() {
        let profile = ProfileCurve::new(
            (0..4)
                .map(|j| {
                    let t = 0.6 + 0.4 * j as f64;
                    (t.sin(), t.cos())
                })
                .collect(),
            0.5,
            5,
        )
        .unwrap();
        let g = generate_revolution_circular(&profile).unwrap();
        for f in g.window().faces() {
            let vs = face_vertices(f);
            let quad = [
                g.point(vs[0]).unwrap(),
                g.point(vs[1]).unwrap(),
                g.point(vs[2]).unwrap(),
                g.point(vs[3]).unwrap(),
            ];
            let (center, r, axis) = circumcircle(&quad, 1e-10).unwrap();
            // Equidistance oracle.
            for q in &quad {
                assert_abs_diff_eq!((q - center).norm(), r, epsilon = 1e-10);
            }
            // Sphere profile: the axis passes through the sphere center.
            let line = EuclideanLine::new(center, axis).unwrap();
            assert!(line.distance_to_point(&Vector3::zeros()) < 1e-9);
        }
    }

    #[test]
    fn reflection_construction_planar_grid() {
        // Planar circular net with a tilted initial plane through the
        // origin: closure is exact and the face apexes sit on the vertical
        // circle axes.
        let mut g = Binet::new(Window::sized(4, 4));
        for v in g.window().vertices() {
            let (i, j) = v.coords();
            g.set(v, Vector3::new(i as f64, j as f64, 0.0));
        }
        let h0 = Plane::through_point(Vector3::zeros(), Vector3::new(0.3, -0.2, 1.0)).unwrap();
        let refl = reflection_conical_from_circular(&g, h0, 1e-12).unwrap();
        assert!(refl.closure_residual < 1e-12);
        let cc = circular_conical_binet(&g, &refl.planes, 1e-9).unwrap();
        for f in g.window().faces() {
            let (i, j) = f.coords();
            let apex = cc.binet.point(f).unwrap();
            // Circle axis of a planar-grid face is the vertical line through
            // its center.
            assert!(
                (apex.xy() - Vector2::new(i as f64 + 0.5, j as f64 + 0.5)).norm() < 1e-10,
                "apex {apex:?}"
            );
        }
    }

    #[test]
    fn reflection_base_plane_degenerate_case() {
        // h0 equal to the plane of the net: reflections fix it; every plane
        // of h is the base plane (degenerate conical net, flagged downstream
        // by the parallel-plane regularity check).
        let mut g = Binet::new(Window::sized(3, 3));
        for v in g.window().vertices() {
            let (i, j) = v.coords();
            g.set(v, Vector3::new(i as f64, j as f64, 0.0));
        }
        let base = Plane::new(Vector3::new(0.0, 0.0, 1.0), 0.0).unwrap();
        let refl = reflection_conical_from_circular(&g, base, 1e-12).unwrap();
        for (_, p) in refl.planes.cells() {
            assert!(p.same_plane(&base, 1e-12));
        }
        assert!(matches!(
            reflection_circular_from_conical(&refl.planes, Vector3::zeros(), 1e-9),
            Err(Error::Degenerate { .. })
        ));
    }

    #[test]
    fn reflection_round_trip() {
        let profile = ProfileCurve::new(
            vec![(1.0, 0.0), (1.3, 0.8), (1.5, 1.7), (1.4, 2.6)],
            0.55,
            6,
        )
        .unwrap();
        let g = generate_revolution_circular(&profile).unwrap();
        let v0 = CellId::Vertex(0, 0);
        let p0 = g.point(v0).unwrap();
        let h0 = Plane::through_point(p0, Vector3::new(0.4, 0.1, 1.0)).unwrap();
        let refl = reflection_conical_from_circular(&g, h0, 1e-10).unwrap();
        let g2 = reflection_circular_from_conical(&refl.planes, p0, 1e-9).unwrap();
        for (c, p) in g.cells() {
            let q = g2.point(*c).unwrap();
            assert!((p - q).norm() < 1e-10, "cell {c}");
        }
    }

    #[test]
    fn cylinder_reflection_gives_tangent_planes() {
        // Cylinder circular net with the tangent initial plane: the
        // reflected planes are the cylinder's tangent planes.
        let theta = std::f64::consts::PI / 8.0;
        let profile = ProfileCurve::new(
            (0..4).map(|j| (1.0, 0.7 * j as f64)).collect(),
            theta,
            6,
        )
        .unwrap();
        let g = generate_revolution_circular(&profile).unwrap();
        let p0 = g.point(CellId::Vertex(0, 0)).unwrap();
        // Tangent plane at angle 0: normal (1,0,0) through (1,0,z).
        let h0 = Plane::through_point(p0, Vector3::new(1.0, 0.0, 0.0)).unwrap();
        let refl = reflection_conical_from_circular(&g, h0, 1e-10).unwrap();
        for (c, plane) in refl.planes.cells() {
            let (i, _) = c.coords();
            let a = i as f64 * theta;
            let expected =
                Plane::through_point(g.point(*c).unwrap(), Vector3::new(a.cos(), a.sin(), 0.0))
                    .unwrap();
            assert!(plane.same_plane(&expected, 1e-10), "cell {c}");
        }
    }

    #[test]
    fn circular_conical_is_principal_with_isotropic_v_lift() {
        let profile = ProfileCurve::new(
            vec![(1.0, 0.0), (1.25, 0.7), (1.4, 1.5), (1.35, 2.3)],
            0.5,
            6,
        )
        .unwrap();
        let g = generate_revolution_circular(&profile).unwrap();
        let p0 = g.point(CellId::Vertex(0, 0)).unwrap();
        let h0 = Plane::through_point(p0, Vector3::new(0.5, 0.15, 1.0)).unwrap();
        let refl = reflection_conical_from_circular(&g, h0, 1e-10).unwrap();
        let cc = circular_conical_binet(&g, &refl.planes, 1e-8).unwrap();
        // Principal.
        assert!(check_conjugate(&cc.binet, 1e-9).pass());
        assert!(check_orthogonal(&cc.binet, 1e-9).unwrap().pass());
        // Canonical Möbius lift: V-points on the quadric, all incident pairs
        // polar.
        assert!(cc.moebius.polar_report(1e-9).unwrap().pass());
        for v in cc.binet.window().vertices() {
            let x = cc.moebius.point(v).unwrap();
            assert!(
                inner(QuadricForm::Moebius, &x, &x).unwrap().abs() < 1e-9,
                "V-lift not on the quadric at {v}"
            );
        }
        // Canonical Laguerre lift: V-points on the Blaschke cylinder.
        assert!(cc.laguerre.polar_report(1e-9).unwrap().pass());
        for v in cc.binet.window().vertices() {
            let x = cc.laguerre.point(v).unwrap();
            assert!(
                inner(QuadricForm::Blaschke, &x, &x).unwrap().abs() < 1e-9,
                "V-lift not on the cylinder at {v}"
            );
        }
        // Canonical Lie lift: V-lines isotropic (Gram matrix of the two
        // spanning vectors vanishes).
        for v in cc.binet.window().vertices() {
            let (p, q) = cc.lie.line(v).unwrap();
            for a in [&p, &q] {
                for b in [&p, &q] {
                    assert!(
                        inner(QuadricForm::Lie, a, b).unwrap().abs() < 1e-9,
                        "V-line not isotropic at {v}"
                    );
                }
            }
        }
        // Lie lift is a polar bicongruence with intersecting neighbors.
        assert!(cc.lie.polar_residual().unwrap() < 1e-9);
        assert!(cc.lie.intersection_residual().unwrap() < 1e-9);
        // Vertex circles have radius zero; face circles match the
        // circumcircles of the vertex quads.
        for v in cc.binet.window().vertices() {
            let s = cc.moebius.sphere(v).unwrap();
            assert!(s.r_squared.abs() < 1e-10);
        }
    }

    #[test]
    fn dropped_incidence_breaks_canonical_vertex_polarity() {
        // Reflecting an initial plane that misses g(v0): still a principal
        // binet, but the canonical per-vertex Möbius/Laguerre pairs are no
        // longer polar, so the canonical Lie lift's V-lines are not
        // isotropic.
        let profile = ProfileCurve::new(
            vec![(1.0, 0.0), (1.25, 0.7), (1.4, 1.5)],
            0.5,
            5,
        )
        .unwrap();
        let g = generate_revolution_circular(&profile).unwrap();
        let p0 = g.point(CellId::Vertex(0, 0)).unwrap();
        let h0 = Plane::new(Vector3::new(0.5, 0.15, 1.0), -p0.x * 0.5 - 0.9).unwrap();
        assert!(h0.signed_distance(&p0).abs() > 0.1);
        let planes = propagate_planes_by_reflection(&g, CellId::Vertex(0, 0), h0).unwrap();
        let cc = circular_conical_binet(&g, &planes, 1e-8).unwrap();
        assert!(check_conjugate(&cc.binet, 1e-9).pass());
        assert!(check_orthogonal(&cc.binet, 1e-9).unwrap().pass());
        let mut worst = 0.0_f64;
        for v in cc.binet.window().vertices() {
            let xq = cc.moebius.point(v).unwrap();
            let xb = cc.laguerre.point(v).unwrap();
            let xl = crate::lifts::embed_moebius_to_lie(&xq).unwrap();
            let yl = crate::lifts::embed_laguerre_to_lie(&xb).unwrap();
            worst = worst.max(inner(QuadricForm::Lie, &xl, &yl).unwrap().abs());
        }
        assert!(worst > 1e-3, "per-vertex polarity should fail, got {worst}");
    }

    #[test]
    fn lift_existence_matches_orthogonality() {
        // propagate_orthogonal outputs lift; perturbed ones do not.
        use rand::{Rng, SeedableRng};
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for seed in 0..10u64 {
            let data = generate_cauchy_data(seed, Window::sized(5, 5), 0.1);
            let mut freedom = BTreeMap::new();
            for i in 1..5i64 {
                for j in 1..5i64 {
                    freedom.insert((i, j), rng.gen_range(0.2..0.8));
                }
            }
            let b = propagate_orthogonal(&data, &freedom).unwrap();
            assert!(moebius_lift(&b, 0.0, 1e-9).is_ok(), "seed {seed}");
            let mut bad = b.clone();
            let p = *bad.get(CellId::Vertex(2, 2)).unwrap();
            bad.set(CellId::Vertex(2, 2), p + Vector3::new(1e-3, 2e-3, -1e-3));
            assert!(moebius_lift(&bad, 0.0, 1e-9).is_err(), "seed {seed}");
        }
    }

    #[test]
    fn propagated_output_restricts_to_data() {
        let data = generate_cauchy_data(21, Window::sized(6, 5), 0.1);
        let b = propagate_principal(&data).unwrap();
        for f in b.window().faces() {
            let (i, j) = f.coords();
            assert_eq!(b.point(f).unwrap(), data.f_net[&(i, j)]);
        }
        for i in 0..6i64 {
            assert_eq!(
                b.point(CellId::Vertex(i, 0)).unwrap(),
                data.v_axes[&(i, 0)]
            );
        }
    }

    #[test]
    fn sphere_binet_generator_is_principal_with_radial_normals() {
        let (b, _t, _tf) = sphere_binet(8, 4, 0.35, 0.7, 0.78).unwrap();
        assert!(check_conjugate(&b, 1e-9).pass());
        assert!(check_orthogonal(&b, 1e-9).unwrap().pass());
        for (_, p) in b.cells() {
            assert_abs_diff_eq!(p.norm(), 1.0, epsilon = 1e-12);
        }
        // Normals through the origin: □-plane normals at each cell are
        // parallel to the position vector.
        let bs = crate::nets::box_planes(&b, 1e-9).unwrap();
        for (c, plane) in bs.cells() {
            let p = b.point(*c).unwrap();
            assert!(
                plane.normal().cross(&p).norm() < 1e-10,
                "normal not radial at {c}"
            );
        }
    }

    #[test]
    fn cylinder_binet_is_principal() {
        let zs: Vec<f64> = (0..5).map(|j| 0.55 * j as f64).collect();
        let b = cylinder_binet(8, std::f64::consts::PI / 9.0, &zs).unwrap();
        assert!(check_conjugate(&b, 1e-9).pass());
        assert!(check_orthogonal(&b, 1e-9).unwrap().pass());
    }

    #[test]
    fn moebius_lift_decodes_spheres_on_circular_conical() {
        // The decoded face spheres of the canonical lift contain the four
        // circle points.
        let profile = ProfileCurve::new(vec![(1.0, 0.0), (1.3, 0.75), (1.42, 1.6)], 0.5, 5)
            .unwrap();
        let g = generate_revolution_circular(&profile).unwrap();
        let p0 = g.point(CellId::Vertex(0, 0)).unwrap();
        let h0 = Plane::through_point(p0, Vector3::new(0.45, 0.1, 1.0)).unwrap();
        let refl = reflection_conical_from_circular(&g, h0, 1e-10).unwrap();
        let cc = circular_conical_binet(&g, &refl.planes, 1e-8).unwrap();
        for f in cc.binet.window().faces() {
            let s = sphere_from_lift(&cc.moebius.point(f).unwrap()).unwrap();
            for v in face_vertices(f) {
                let p = cc.binet.point(v).unwrap();
                assert!(((p - s.center).norm_squared() - s.r_squared).abs() < 1e-9);
            }
        }
    }
}
