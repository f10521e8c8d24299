//! Lifts into the projective models of sphere geometries and their inverses:
//! the Möbius lift via the additive potential ρ, the normal binet and the
//! Laguerre lift via the multiplicative potential σ, the Lie lift as a line
//! bicongruence, plus all projections and sphere/plane decoders.
//!
//! Coordinate conventions (ℝP⁴, Möbius form diag(1,1,1,1,−1)):
//! e∞ = (e5+e4)/2 and e0 = (e5−e4)/2, so ⟨e0,e∞⟩ = −1/2 and a sphere with
//! center c and squared radius r² lifts to x = c + e0 + (|c|²−r²)e∞, i.e.
//! coordinates (c₁,c₂,c₃, ρ−1/2, ρ+1/2) with 2ρ = |c|²−r². The Blaschke
//! model stores an oriented plane {⟨u,x⟩+h=0} as [u, σ, h] with form
//! diag(1,1,1,−1,0). The Lie model (ℝP⁵, diag(1,1,1,1,−1,−1)) receives the
//! Möbius lift by appending x₆ = 0 and the Laguerre lift via
//! [u,σ,h] ↦ u − 2h·e∞ + σ·e₆ = (u₁,u₂,u₃,−h,−h,σ).

use nalgebra::Vector3;
use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::lattice::{incident, CellId, Window};
use crate::nets::{
    box_planes, check_conjugate, check_orthogonal, check_polar_binet, BiStarNet, Binet,
    CheckReport, EuclideanLine, Plane, ProjBinet,
};
use crate::projective::{HomVector, QuadricForm};
use crate::{Error, Result};

/// Scalar function on lattice cells.
pub type CellScalar = BTreeMap<CellId, f64>;

// ---------------------------------------------------------------------------
// Potential solving
// ---------------------------------------------------------------------------

/// Propagates a scalar over a breadth-first spanning tree of a generic
/// incidence graph: `value(d') = combine(edge_weight, value(d))`. Each
/// connected component is rooted at its smallest node with `anchor`.
pub(crate) fn solve_on_graph<K: Ord + Copy>(
    edges: &[(K, K, f64)],
    anchor: f64,
    combine: impl Fn(f64, f64) -> Result<f64>,
) -> Result<BTreeMap<K, f64>> {
    let mut adj: BTreeMap<K, Vec<(K, f64)>> = BTreeMap::new();
    for (a, b, w) in edges {
        adj.entry(*a).or_default().push((*b, *w));
        adj.entry(*b).or_default().push((*a, *w));
    }
    let mut out: BTreeMap<K, f64> = BTreeMap::new();
    let keys: Vec<K> = adj.keys().cloned().collect();
    for root in keys {
        if out.contains_key(&root) {
            continue;
        }
        out.insert(root, anchor);
        let mut queue = VecDeque::new();
        queue.push_back(root);
        while let Some(d) = queue.pop_front() {
            let vd = out[&d];
            for (n, w) in adj[&d].clone() {
                if out.contains_key(&n) {
                    continue;
                }
                out.insert(n, combine(w, vd)?);
                queue.push_back(n);
            }
        }
    }
    Ok(out)
}

/// Incident pairs of the window restricted to cells present in `present`.
fn present_incident_pairs(window: Window, present: &BTreeSet<CellId>) -> Vec<(CellId, CellId)> {
    window
        .incident_pairs()
        .into_iter()
        .filter(|(v, f)| present.contains(v) && present.contains(f))
        .collect()
}

/// Solves ⟨b(d),b(d′)⟩ = ρ(d) + ρ(d′) over a BFS spanning tree anchored at
/// the smallest cell with value `rho0`. The returned cycle residual is the
/// maximum over crosses of |⟨Δv,Δf⟩| / (|Δv|·|Δf|) — the alternating cycle
/// sum of the inner products equals ⟨b(v)−b(v′), b(f)−b(f′)⟩, so ρ exists
/// consistently exactly when the binet is orthogonal.
pub fn solve_additive_potential(b: &Binet, rho0: f64) -> Result<(CellScalar, f64)> {
    let present: BTreeSet<CellId> = b.cells().map(|(c, _)| *c).collect();
    let edges: Vec<(CellId, CellId, f64)> = present_incident_pairs(b.window(), &present)
        .into_iter()
        .map(|(v, f)| {
            let w = b.get(v).unwrap().dot(b.get(f).unwrap());
            (v, f, w)
        })
        .collect();
    let rho = solve_on_graph(&edges, rho0, |w, prev| Ok(w - prev))?;
    let residual = check_orthogonal(b, f64::INFINITY)?.max_residual();
    Ok((rho, residual))
}

/// Solves ⟨u(d),u(d′)⟩ = σ(d)·σ(d′) over a BFS spanning tree from the unit
/// normals of a bi*net, anchored with `sigma0 ≠ 0`. The cycle residual is
/// measured in log space: max over crosses of
/// |log( ⟨u(v),u(f)⟩⟨u(v′),u(f′)⟩ / (⟨u(v′),u(f)⟩⟨u(v),u(f′)⟩) )|,
/// infinite when the ratio is nonpositive.
pub fn solve_multiplicative_potential(bs: &BiStarNet, sigma0: f64) -> Result<(CellScalar, f64)> {
    if sigma0 == 0.0 {
        return Err(Error::InvalidInput("sigma0 must be nonzero".into()));
    }
    let present: BTreeSet<CellId> = bs.cells().map(|(c, _)| *c).collect();
    let mut edges: Vec<(CellId, CellId, f64)> = Vec::new();
    for (v, f) in present_incident_pairs(bs.window(), &present) {
        let w = bs.get(v).unwrap().normal().dot(&bs.get(f).unwrap().normal());
        if w.abs() < 1e-12 {
            return Err(Error::regularity(
                format!("pair({v}, {f})"),
                "incident planes are orthogonal; σ-propagation undefined",
            ));
        }
        edges.push((v, f, w));
    }
    let sigma = solve_on_graph(&edges, sigma0, |w, prev| Ok(w / prev))?;
    let mut residual = 0.0_f64;
    for cross in bs.window().crosses() {
        let (Some(pv), Some(pvp), Some(pf), Some(pfp)) = (
            bs.get(cross.v),
            bs.get(cross.vp),
            bs.get(cross.f),
            bs.get(cross.fp),
        ) else {
            continue;
        };
        let a = pv.normal().dot(&pf.normal());
        let b = pvp.normal().dot(&pfp.normal());
        let c = pvp.normal().dot(&pf.normal());
        let d = pv.normal().dot(&pfp.normal());
        let ratio = (a * b) / (c * d);
        if !(ratio > 0.0) {
            residual = f64::INFINITY;
        } else {
            residual = residual.max(ratio.ln().abs());
        }
    }
    Ok((sigma, residual))
}

// ---------------------------------------------------------------------------
// Möbius model
// ---------------------------------------------------------------------------

/// Lift of the point `c` with potential value ρ: (c, ρ−1/2, ρ+1/2).
pub fn moebius_point_lift(c: &Vector3<f64>, rho: f64) -> HomVector {
    HomVector::new(&[c.x, c.y, c.z, rho - 0.5, rho + 0.5]).expect("finite lift")
}

/// Lift of the sphere with center `c` and squared radius `r²` (possibly
/// negative for imaginary spheres).
pub fn sphere_to_lift(center: &Vector3<f64>, r_squared: f64) -> HomVector {
    moebius_point_lift(center, 0.5 * (center.norm_squared() - r_squared))
}

/// Stereographic projection π_E([x]) = (x₁,x₂,x₃)/(x₅−x₄).
pub fn project_moebius(x: &HomVector) -> Result<Vector3<f64>> {
    if x.len() != 5 {
        return Err(Error::DimensionMismatch {
            expected: 5,
            got: x.len(),
        });
    }
    let c = x.coords();
    let w = c[4] - c[3];
    if w.abs() <= 1e-12 {
        return Err(Error::AtInfinity {
            detail: "x₅ − x₄ = 0 (point on the polar hyperplane of the base point)".into(),
        });
    }
    Ok(Vector3::new(c[0] / w, c[1] / w, c[2] / w))
}

/// The potential value carried by a lift point: ρ = (x₄+x₅)/(2(x₅−x₄)).
pub fn rho_from_lift(x: &HomVector) -> Result<f64> {
    let c = x.coords();
    let w = c[4] - c[3];
    if w.abs() <= 1e-12 {
        return Err(Error::AtInfinity {
            detail: "lift point has no affine representative".into(),
        });
    }
    Ok((c[3] + c[4]) / (2.0 * w))
}

/// A Euclidean sphere decoded from a Möbius-model point: real when r² > 0,
/// a point sphere when r² = 0, imaginary (real center, imaginary radius)
/// when r² < 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphereDecoding {
    pub center: Vector3<f64>,
    pub r_squared: f64,
}

impl SphereDecoding {
    pub fn is_imaginary(&self) -> bool {
        self.r_squared < 0.0
    }

    /// |r²|^(1/2); for an imaginary sphere this is the radius of the real
    /// representative.
    pub fn abs_radius(&self) -> f64 {
        self.r_squared.abs().sqrt()
    }

    /// Orthogonality defect against another sphere: | |c−c′|² − r² − r′² |.
    pub fn orthogonality_defect(&self, other: &SphereDecoding) -> f64 {
        ((self.center - other.center).norm_squared() - self.r_squared - other.r_squared).abs()
    }
}

/// Decodes the sphere of a Möbius-model point: center π_E(x) and
/// r² = ⟨x,x⟩_Q / (4⟨x,e∞⟩²_Q), with ⟨x,e∞⟩ = (x₄−x₅)/2.
pub fn sphere_from_lift(x: &HomVector) -> Result<SphereDecoding> {
    let center = project_moebius(x)?;
    let c = x.coords();
    let w = c[4] - c[3];
    let q = c[0] * c[0] + c[1] * c[1] + c[2] * c[2] + c[3] * c[3] - c[4] * c[4];
    Ok(SphereDecoding {
        center,
        r_squared: q / (w * w),
    })
}

/// The radical plane of two spheres:
/// {x : 2⟨c₂−c₁, x⟩ = (|c₂|²−r₂²) − (|c₁|²−r₁²)}, orthogonal to the center
/// line.
pub fn radical_plane(s1: &SphereDecoding, s2: &SphereDecoding) -> Result<Plane> {
    let d = s2.center - s1.center;
    if d.norm() <= 1e-12 * (1.0 + s1.center.norm()) {
        return Err(Error::degenerate(
            "radical plane of concentric spheres",
            d.norm(),
        ));
    }
    let rhs =
        (s2.center.norm_squared() - s2.r_squared) - (s1.center.norm_squared() - s1.r_squared);
    // 2⟨d,x⟩ − rhs = 0  ⇒  normal 2d, offset −rhs.
    Plane::new(2.0 * d, -rhs)
}

/// A Möbius lift: the base binet, the additive potential, the lift points in
/// ℝP⁴ and the orthogonality (cycle) residual of the base.
#[derive(Debug, Clone)]
pub struct MoebiusLift {
    base: Binet,
    rho: CellScalar,
    points: ProjBinet,
    cycle_residual: f64,
}

impl MoebiusLift {
    pub fn base(&self) -> &Binet {
        &self.base
    }

    pub fn rho(&self) -> &CellScalar {
        &self.rho
    }

    pub fn points(&self) -> &ProjBinet {
        &self.points
    }

    pub fn point(&self, cell: CellId) -> Result<HomVector> {
        self.points.point(cell)
    }

    pub fn cycle_residual(&self) -> f64 {
        self.cycle_residual
    }

    /// Polarity residual report under the Möbius form.
    pub fn polar_report(&self, tol: f64) -> Result<CheckReport> {
        check_polar_binet(&self.points, QuadricForm::Moebius, tol)
    }

    /// Decoded sphere of a cell of the orthogonal sphere representation.
    pub fn sphere(&self, cell: CellId) -> Result<SphereDecoding> {
        sphere_from_lift(&self.points.point(cell)?)
    }

    /// The same lift in a shifted gauge: ρ(v) → ρ(v)+ε on vertices and
    /// ρ(f) → ρ(f)−ε on faces. The projection is unchanged.
    pub fn gauge_shifted(&self, epsilon: f64) -> MoebiusLift {
        let mut rho = self.rho.clone();
        for (c, r) in rho.iter_mut() {
            *r += if c.is_vertex() { epsilon } else { -epsilon };
        }
        let mut points = ProjBinet::new(self.base.window(), 4);
        for (c, r) in &rho {
            points.set(*c, moebius_point_lift(self.base.get(*c).unwrap(), *r));
        }
        MoebiusLift {
            base: self.base.clone(),
            rho,
            points,
            cycle_residual: self.cycle_residual,
        }
    }
}

impl MoebiusLift {
    /// Builds a lift from an explicitly given potential (for canonical
    /// gauges where ρ is known in closed form). The potential is not
    /// re-solved; the cycle residual is still that of the base binet.
    pub fn from_potential(base: &Binet, rho: &CellScalar) -> Result<MoebiusLift> {
        let mut points = ProjBinet::new(base.window(), 4);
        for (c, p) in base.cells() {
            let r = rho
                .get(c)
                .ok_or_else(|| Error::MissingCell(c.to_string()))?;
            points.set(*c, moebius_point_lift(p, *r));
        }
        let cycle_residual = check_orthogonal(base, f64::INFINITY)?.max_residual();
        Ok(MoebiusLift {
            base: base.clone(),
            rho: rho.clone(),
            points,
            cycle_residual,
        })
    }
}

impl LaguerreLift {
    /// Builds a lift from an explicitly given potential, keeping the plane
    /// orientations of `base` as they are (no re-gauging of normals).
    pub fn from_oriented(base: &BiStarNet, sigma: &CellScalar) -> Result<LaguerreLift> {
        let mut points = ProjBinet::new(base.window(), 4);
        for (c, p) in base.cells() {
            let s = sigma
                .get(c)
                .ok_or_else(|| Error::MissingCell(c.to_string()))?;
            points.set(*c, laguerre_plane_lift(&p.normal(), *s, p.offset()));
        }
        Ok(LaguerreLift {
            base: base.clone(),
            sigma: sigma.clone(),
            points,
            cycle_residual: 0.0,
        })
    }
}

/// Joins an explicitly constructed Möbius lift and Laguerre lift into a line
/// bicongruence (on the cells where both are defined).
pub fn lie_lift_from_parts(m: &MoebiusLift, l: &LaguerreLift) -> Result<LineBicongruence> {
    let mut out = LineBicongruence::new(m.base().window());
    for (c, xq) in m.points().cells() {
        let Some(xb) = l.points().get(*c) else {
            continue;
        };
        out.set(*c, embed_moebius_to_lie(xq)?, embed_laguerre_to_lie(xb)?);
    }
    Ok(out)
}

/// Builds the Möbius lift of a binet. Exists exactly when the binet is
/// orthogonal: fails carrying the worst cross if the cycle residual of the
/// additive potential exceeds `tol`.
pub fn moebius_lift(b: &Binet, rho0: f64, tol: f64) -> Result<MoebiusLift> {
    let (rho, cycle_residual) = solve_additive_potential(b, rho0)?;
    if cycle_residual > tol {
        let report = check_orthogonal(b, tol)?;
        let worst = report
            .worst()
            .map(|(i, _)| i.to_string())
            .unwrap_or_else(|| "unknown".into());
        return Err(Error::CheckFailed {
            check: "orthogonal (required by moebius_lift)",
            worst,
            residual: cycle_residual,
            tol,
        });
    }
    let mut points = ProjBinet::new(b.window(), 4);
    for (c, p) in b.cells() {
        points.set(*c, moebius_point_lift(p, rho[c]));
    }
    Ok(MoebiusLift {
        base: b.clone(),
        rho,
        points,
        cycle_residual,
    })
}

// ---------------------------------------------------------------------------
// Laguerre model and normal binets
// ---------------------------------------------------------------------------

/// Unit normals and offsets of a bi*net in the coherent sign gauge.
pub fn unit_normals(bs: &BiStarNet) -> BTreeMap<CellId, (Vector3<f64>, f64)> {
    let mut oriented = bs.clone();
    oriented.orient_coherently();
    oriented
        .cells()
        .map(|(c, p)| (*c, (p.normal(), p.offset())))
        .collect()
}

/// A normal binet: the scaled normals n(d) = u(d)/σ(d) of an orthogonal
/// bi*net, polar with respect to the unit sphere (⟨n(d),n(d′)⟩ = 1 on
/// incident pairs) and conjugate as a binet.
#[derive(Debug, Clone)]
pub struct NormalBinet {
    window: Window,
    points: BTreeMap<CellId, Vector3<f64>>,
}

impl NormalBinet {
    pub fn window(&self) -> Window {
        self.window
    }

    pub fn points(&self) -> &BTreeMap<CellId, Vector3<f64>> {
        &self.points
    }

    pub fn get(&self, cell: CellId) -> Option<&Vector3<f64>> {
        self.points.get(&cell)
    }

    /// As a plain binet (for the conjugacy check).
    pub fn to_binet(&self) -> Binet {
        let mut b = Binet::new(self.window);
        for (c, p) in &self.points {
            b.set(*c, *p);
        }
        b
    }

    /// Max |⟨n(d),n(d′)⟩ − 1| over incident pairs.
    pub fn polarity_residual(&self) -> f64 {
        let mut worst = 0.0_f64;
        for (v, f) in self.window.incident_pairs() {
            if let (Some(nv), Some(nf)) = (self.points.get(&v), self.points.get(&f)) {
                worst = worst.max((nv.dot(nf) - 1.0).abs());
            }
        }
        worst
    }
}

/// Builds the normal binet of an orthogonal bi*net: n(d) = u(d)/σ(d) with σ
/// solved multiplicatively. Fails when the multiplicative cycle residual
/// exceeds `tol` (the bi*net is not orthogonal).
pub fn normal_binet(bs: &BiStarNet, sigma0: f64, tol: f64) -> Result<NormalBinet> {
    let (sigma, residual) = solve_multiplicative_potential(bs, sigma0)?;
    if !(residual <= tol) {
        return Err(Error::CheckFailed {
            check: "orthogonal bi*net (required by normal_binet)",
            worst: "multiplicative cycle".into(),
            residual,
            tol,
        });
    }
    let normals = unit_normals(bs);
    let mut points = BTreeMap::new();
    for (c, (u, _h)) in &normals {
        points.insert(*c, u / sigma[c]);
    }
    Ok(NormalBinet {
        window: bs.window(),
        points,
    })
}

/// Laguerre lift point of the oriented plane (u, h) with potential σ:
/// [u, σ, h] in Blaschke coordinates.
pub fn laguerre_plane_lift(u: &Vector3<f64>, sigma: f64, h: f64) -> HomVector {
    HomVector::new(&[u.x, u.y, u.z, sigma, h]).expect("finite lift")
}

/// A Laguerre lift: the base bi*net, the multiplicative potential σ, the
/// lift points in the Blaschke model and the cycle residual.
#[derive(Debug, Clone)]
pub struct LaguerreLift {
    base: BiStarNet,
    sigma: CellScalar,
    points: ProjBinet,
    cycle_residual: f64,
}

impl LaguerreLift {
    pub fn base(&self) -> &BiStarNet {
        &self.base
    }

    pub fn sigma(&self) -> &CellScalar {
        &self.sigma
    }

    pub fn points(&self) -> &ProjBinet {
        &self.points
    }

    pub fn point(&self, cell: CellId) -> Result<HomVector> {
        self.points.point(cell)
    }

    pub fn cycle_residual(&self) -> f64 {
        self.cycle_residual
    }

    /// Polarity residual report under the Blaschke form: per incident pair
    /// |⟨u,u′⟩ − σσ′| on unit-normalized lift vectors.
    pub fn polar_report(&self, tol: f64) -> Result<CheckReport> {
        check_polar_binet(&self.points, QuadricForm::Blaschke, tol)
    }

    /// Recovers the base plane of a cell from the lift by the projection
    /// [u, σ, h] ↦ [u, 0, h].
    pub fn project_plane(&self, cell: CellId) -> Result<Plane> {
        let x = self.points.point(cell)?;
        let c = x.coords();
        Plane::new(Vector3::new(c[0], c[1], c[2]), c[4])
    }

    /// The same lift in a scaled gauge: σ(v) → ασ(v), σ(f) → σ(f)/α.
    pub fn gauge_scaled(&self, alpha: f64) -> Result<LaguerreLift> {
        if alpha == 0.0 {
            return Err(Error::InvalidInput("gauge scale must be nonzero".into()));
        }
        let mut sigma = self.sigma.clone();
        for (c, s) in sigma.iter_mut() {
            *s *= if c.is_vertex() { alpha } else { 1.0 / alpha };
        }
        let normals = unit_normals(&self.base);
        let mut points = ProjBinet::new(self.base.window(), 4);
        for (c, s) in &sigma {
            let (u, h) = normals[c];
            points.set(*c, laguerre_plane_lift(&u, *s, h));
        }
        Ok(LaguerreLift {
            base: self.base.clone(),
            sigma,
            points,
            cycle_residual: self.cycle_residual,
        })
    }
}

/// Builds the Laguerre lift of a bi*net. Exists exactly when the bi*net is
/// orthogonal; preconditions as for [`normal_binet`].
pub fn laguerre_lift(bs: &BiStarNet, sigma0: f64, tol: f64) -> Result<LaguerreLift> {
    let (sigma, cycle_residual) = solve_multiplicative_potential(bs, sigma0)?;
    if !(cycle_residual <= tol) {
        return Err(Error::CheckFailed {
            check: "orthogonal bi*net (required by laguerre_lift)",
            worst: "multiplicative cycle".into(),
            residual: cycle_residual,
            tol,
        });
    }
    let normals = unit_normals(bs);
    let mut points = ProjBinet::new(bs.window(), 4);
    for (c, (u, h)) in &normals {
        points.set(*c, laguerre_plane_lift(u, sigma[c], *h));
    }
    Ok(LaguerreLift {
        base: bs.clone(),
        sigma,
        points,
        cycle_residual,
    })
}

// ---------------------------------------------------------------------------
// Lie model
// ---------------------------------------------------------------------------

/// Embeds a Möbius-model point into the Lie model: append x₆ = 0
/// (the Möbius quadric is the section of the Lie quadric with {x₆ = 0}).
pub fn embed_moebius_to_lie(x: &HomVector) -> Result<HomVector> {
    if x.len() != 5 {
        return Err(Error::DimensionMismatch {
            expected: 5,
            got: x.len(),
        });
    }
    let c = x.coords();
    HomVector::new(&[c[0], c[1], c[2], c[3], c[4], 0.0])
}

/// Embeds a Blaschke-model point [u, σ, h] into the Lie model as
/// u − 2h·e∞ + σ·e₆ = (u₁, u₂, u₃, −h, −h, σ). The embedding is
/// form-compatible (the Blaschke form is the Lie form restricted to
/// {x₄ = x₅}), sends the Blaschke apex [0,0,0,0,1] to the Lie base point
/// (0,0,0,1,1,0) and [0,0,0,1,0] to e₆.
pub fn embed_laguerre_to_lie(y: &HomVector) -> Result<HomVector> {
    if y.len() != 5 {
        return Err(Error::DimensionMismatch {
            expected: 5,
            got: y.len(),
        });
    }
    let c = y.coords();
    HomVector::new(&[c[0], c[1], c[2], -c[4], -c[4], c[3]])
}

/// Result of projecting a Lie-model point to Euclidean space: a finite point
/// or a direction at infinity.
enum LieProjected {
    Point(Vector3<f64>),
    Direction(Vector3<f64>),
}

/// π_E([x]) = [x₁, x₂, x₃, 0, x₅−x₄, 0] in the Lie model.
fn project_lie_point(x: &HomVector) -> Result<LieProjected> {
    let c = x.coords();
    let w = c[4] - c[3];
    let v = Vector3::new(c[0], c[1], c[2]);
    if w.abs() <= 1e-12 {
        if v.norm() <= 1e-12 {
            return Err(Error::AtInfinity {
                detail: "Lie point projects to nothing (lies on B ∨ M)".into(),
            });
        }
        Ok(LieProjected::Direction(v))
    } else {
        Ok(LieProjected::Point(v / w))
    }
}

/// Projects a Lie-model line (given by two spanning points) to the Euclidean
/// line through the projected points.
pub fn project_lie_to_normal_line(p: &HomVector, q: &HomVector) -> Result<EuclideanLine> {
    match (project_lie_point(p)?, project_lie_point(q)?) {
        (LieProjected::Point(a), LieProjected::Point(b)) => {
            let d = b - a;
            if d.norm() <= 1e-12 {
                return Err(Error::degenerate(
                    "projected line collapses to a point",
                    d.norm(),
                ));
            }
            EuclideanLine::new(a, d)
        }
        (LieProjected::Point(a), LieProjected::Direction(d))
        | (LieProjected::Direction(d), LieProjected::Point(a)) => EuclideanLine::new(a, d),
        (LieProjected::Direction(_), LieProjected::Direction(_)) => Err(Error::AtInfinity {
            detail: "both spanning points project to infinity".into(),
        }),
    }
}

/// A line bicongruence in ℝP⁵: per cell an ordered spanning pair of points
/// (Möbius-model section first, Laguerre-model section second).
#[derive(Debug, Clone)]
pub struct LineBicongruence {
    window: Window,
    lines: BTreeMap<CellId, (HomVector, HomVector)>,
}

impl LineBicongruence {
    pub fn new(window: Window) -> Self {
        LineBicongruence {
            window,
            lines: BTreeMap::new(),
        }
    }

    pub fn window(&self) -> Window {
        self.window
    }

    pub fn set(&mut self, cell: CellId, p: HomVector, q: HomVector) {
        assert_eq!(p.len(), 6);
        assert_eq!(q.len(), 6);
        self.lines.insert(cell, (p, q));
    }

    pub fn get(&self, cell: CellId) -> Option<&(HomVector, HomVector)> {
        self.lines.get(&cell)
    }

    pub fn line(&self, cell: CellId) -> Result<(HomVector, HomVector)> {
        self.lines
            .get(&cell)
            .cloned()
            .ok_or_else(|| Error::MissingCell(cell.to_string()))
    }

    pub fn cells(&self) -> impl Iterator<Item = (&CellId, &(HomVector, HomVector))> {
        self.lines.iter()
    }

    /// Max |⟨·,·⟩_L| over the four spanning-point pairs of two lines.
    pub fn pair_polarity(&self, a: CellId, b: CellId) -> Result<f64> {
        let (pa, qa) = self.line(a)?;
        let (pb, qb) = self.line(b)?;
        let mut worst = 0.0_f64;
        for x in [&pa, &qa] {
            for y in [&pb, &qb] {
                worst = worst.max(crate::projective::inner(QuadricForm::Lie, x, y)?.abs());
            }
        }
        Ok(worst)
    }

    /// Polarity residual over all incident pairs: all four cross inner
    /// products per pair must vanish.
    pub fn polar_residual(&self) -> Result<f64> {
        let mut worst = 0.0_f64;
        let cells: Vec<CellId> = self.lines.keys().cloned().collect();
        for (i, a) in cells.iter().enumerate() {
            for b in cells.iter().skip(i + 1) {
                if incident(*a, *b) {
                    worst = worst.max(self.pair_polarity(*a, *b)?);
                }
            }
        }
        Ok(worst)
    }

    /// Intersection residual of two lines: 4th singular value over the 1st
    /// of the stacked spanning vectors (rank 3 means the lines meet).
    pub fn pair_intersection(&self, a: CellId, b: CellId) -> Result<f64> {
        let (pa, qa) = self.line(a)?;
        let (pb, qb) = self.line(b)?;
        let mut m = nalgebra::DMatrix::zeros(4, 6);
        for (i, x) in [&pa, &qa, &pb, &qb].iter().enumerate() {
            m.set_row(i, &x.coords().transpose());
        }
        let sv = m.svd(false, false).singular_values;
        Ok(sv[3] / sv[0])
    }

    /// Worst intersection residual over adjacent same-kind cells.
    pub fn intersection_residual(&self) -> Result<f64> {
        let mut worst = 0.0_f64;
        for (a, b) in self
            .window
            .v_edges()
            .into_iter()
            .chain(self.window.f_edges())
        {
            if self.lines.contains_key(&a) && self.lines.contains_key(&b) {
                worst = worst.max(self.pair_intersection(a, b)?);
            }
        }
        Ok(worst)
    }

    /// The section of a cell's line with the Möbius subspace {x₆ = 0},
    /// returned in ℝP⁴ Möbius coordinates.
    pub fn section_moebius(&self, cell: CellId) -> Result<HomVector> {
        let (p, q) = self.line(cell)?;
        let (pc, qc) = (p.coords(), q.coords());
        let v = pc * qc[5] - qc * pc[5];
        HomVector::new(&[v[0], v[1], v[2], v[3], v[4]]).map_err(|_| Error::AtInfinity {
            detail: format!("line at {cell} lies inside {{x₆ = 0}}"),
        })
    }

    /// The section of a cell's line with the Laguerre subspace {x₄ = x₅},
    /// returned in Blaschke coordinates [u, σ, h].
    pub fn section_laguerre(&self, cell: CellId) -> Result<HomVector> {
        let (p, q) = self.line(cell)?;
        let (pc, qc) = (p.coords(), q.coords());
        let (wp, wq) = (pc[3] - pc[4], qc[3] - qc[4]);
        let v = pc * wq - qc * wp;
        // v has v₄ = v₅; Blaschke coordinates are [u, σ, h] = [v₁v₂v₃, v₆, −v₄].
        HomVector::new(&[v[0], v[1], v[2], v[5], -v[3]]).map_err(|_| Error::AtInfinity {
            detail: format!("line at {cell} lies inside {{x₄ = x₅}}"),
        })
    }

    /// Normal line N(d) = π_E of the cell's Lie line.
    pub fn normal_line(&self, cell: CellId) -> Result<EuclideanLine> {
        let (p, q) = self.line(cell)?;
        project_lie_to_normal_line(&p, &q)
    }
}

/// Builds the Lie lift of a principal binet: per cell the line spanned by
/// the embedded Möbius and Laguerre lift points. Fails identifying which of
/// the two principal conditions (conjugate, orthogonal) does not hold.
pub fn lie_lift(b: &Binet, rho0: f64, sigma0: f64, tol: f64) -> Result<LineBicongruence> {
    let conj = check_conjugate(b, tol);
    if !conj.pass() {
        let (worst, residual) = conj
            .worst()
            .map(|(i, r)| (i.to_string(), *r))
            .unwrap_or_else(|| ("degenerate quad".into(), 1.0));
        return Err(Error::CheckFailed {
            check: "conjugate (required by lie_lift)",
            worst,
            residual,
            tol,
        });
    }
    let mlift = moebius_lift(b, rho0, tol)?;
    let bs = box_planes(b, tol)?;
    let llift = laguerre_lift(&bs, sigma0, tol)?;
    let mut out = LineBicongruence::new(b.window());
    for (c, xq) in mlift.points().cells() {
        let Some(xb) = llift.points().get(*c) else {
            continue;
        };
        out.set(*c, embed_moebius_to_lie(xq)?, embed_laguerre_to_lie(xb)?);
    }
    Ok(out)
}
