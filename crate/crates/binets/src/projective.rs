//! Homogeneous-coordinate linear algebra: points and subspaces of ℝPⁿ up to
//! scale, join/meet, polarity with respect to a diagonal quadric form, and
//! form-preserving transformations.
//!
//! Representation choices: a [`HomVector`] is stored scaled to unit Euclidean
//! norm with its first significant coordinate positive, so projective
//! equality and residuals are scale-free. A [`ProjSubspace`] is stored as an
//! orthonormalized row basis; meets are computed via null spaces of stacked
//! annihilators, which covers all the dimensions needed here (0–4 in ℝP⁵)
//! without Plücker bookkeeping.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{Error, Result, RANK_TOL};

/// A point of ℝPⁿ as a homogeneous coordinate vector of length n+1,
/// normalized to unit Euclidean norm with first significant coordinate
/// positive.
#[derive(Debug, Clone, PartialEq)]
pub struct HomVector {
    coords: DVector<f64>,
}

impl HomVector {
    /// Builds a projective point from raw homogeneous coordinates.
    pub fn new(coords: &[f64]) -> Result<Self> {
        Self::from_dvector(DVector::from_column_slice(coords))
    }

    pub fn from_dvector(v: DVector<f64>) -> Result<Self> {
        let norm = v.norm();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::ZeroVector);
        }
        let mut v = v / norm;
        // Sign convention: first coordinate with significant magnitude is positive.
        if let Some(i) = (0..v.len()).find(|&i| v[i].abs() > 1e-12) {
            if v[i] < 0.0 {
                v.neg_mut();
            }
        }
        Ok(HomVector { coords: v })
    }

    /// Number of homogeneous coordinates (n+1 for ℝPⁿ).
    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Projective dimension n of the ambient space ℝPⁿ.
    pub fn ambient_dim(&self) -> usize {
        self.coords.len() - 1
    }

    pub fn coords(&self) -> &DVector<f64> {
        &self.coords
    }

    pub fn as_slice(&self) -> &[f64] {
        self.coords.as_slice()
    }

    /// True when the two points agree projectively: |⟨a,b⟩| = 1 on unit
    /// representatives, up to `tol`.
    pub fn approx_eq(&self, other: &HomVector, tol: f64) -> bool {
        self.len() == other.len() && 1.0 - self.coords.dot(&other.coords).abs() <= tol
    }
}

/// Diagonal symmetric bilinear form defining a quadric and its polarity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum QuadricForm {
    /// Absolute conic of Euclidean geometry in ℝP³: diag(1,1,1,0).
    Euclid3,
    /// Unit sphere in ℝP³: diag(1,1,1,-1).
    UnitSphere,
    /// Möbius quadric in ℝP⁴, signature (++++-): diag(1,1,1,1,-1).
    Moebius,
    /// Blaschke cylinder in ℝP⁴, signature (+++-0): diag(1,1,1,-1,0).
    Blaschke,
    /// Lie quadric in ℝP⁵, signature (++++--): diag(1,1,1,1,-1,-1).
    Lie,
}

impl QuadricForm {
    /// Diagonal entries of the form.
    pub fn diagonal(&self) -> &'static [f64] {
        match self {
            QuadricForm::Euclid3 => &[1.0, 1.0, 1.0, 0.0],
            QuadricForm::UnitSphere => &[1.0, 1.0, 1.0, -1.0],
            QuadricForm::Moebius => &[1.0, 1.0, 1.0, 1.0, -1.0],
            QuadricForm::Blaschke => &[1.0, 1.0, 1.0, -1.0, 0.0],
            QuadricForm::Lie => &[1.0, 1.0, 1.0, 1.0, -1.0, -1.0],
        }
    }

    /// Number of homogeneous coordinates the form acts on.
    pub fn len(&self) -> usize {
        self.diagonal().len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Projective dimension of the ambient space.
    pub fn ambient_dim(&self) -> usize {
        self.len() - 1
    }

    pub fn is_degenerate(&self) -> bool {
        self.diagonal().iter().any(|&d| d == 0.0)
    }
}

/// Bilinear form value Σ diagᵢ·xᵢ·yᵢ.
pub fn inner(form: QuadricForm, x: &HomVector, y: &HomVector) -> Result<f64> {
    if x.len() != form.len() || y.len() != form.len() {
        return Err(Error::DimensionMismatch {
            expected: form.len(),
            got: if x.len() != form.len() { x.len() } else { y.len() },
        });
    }
    Ok(inner_raw(form, x.as_slice(), y.as_slice()))
}

/// Same as [`inner`] but on raw slices, without dimension checks on `x`/`y`
/// beyond what zip provides. For internal hot paths.
pub(crate) fn inner_raw(form: QuadricForm, x: &[f64], y: &[f64]) -> f64 {
    form.diagonal()
        .iter()
        .zip(x.iter().zip(y.iter()))
        .map(|(d, (a, b))| d * a * b)
        .sum()
}

/// A k-dimensional projective subspace of ℝPⁿ, stored as an orthonormalized
/// (k+1)×(n+1) row basis with deterministic row signs. Zero rows encode the
/// empty subspace (dimension −1).
#[derive(Debug, Clone)]
pub struct ProjSubspace {
    basis: DMatrix<f64>,
    ambient: usize,
}

/// SVD of `m` padded with zero rows to at least square shape. The padding
/// guarantees a full n×n right-singular basis: for wide rank-deficient
/// inputs the thin SVD's trailing right vectors are not reliable null
/// directions.
fn padded_svd(m: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let n = m.ncols();
    let work = if m.nrows() >= n {
        m.clone()
    } else {
        let mut p = DMatrix::zeros(n, n);
        p.rows_mut(0, m.nrows()).copy_from(m);
        p
    };
    let svd = work.svd(false, true);
    (svd.singular_values, svd.v_t.expect("svd v_t"))
}

/// Orthonormal row basis of the row space of `m`, rank-truncated at
/// `tol`·σ₁, rows sign-fixed.
fn row_space(m: &DMatrix<f64>, tol: f64) -> DMatrix<f64> {
    if m.nrows() == 0 {
        return DMatrix::zeros(0, m.ncols());
    }
    let (sv, vt) = padded_svd(m);
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    let rank = sv.iter().filter(|&&s| s > tol * smax && s > 0.0).count();
    let mut rows = vt.rows(0, rank).into_owned();
    fix_row_signs(&mut rows);
    rows
}

/// Orthonormal basis of the null space of `m` (right null space), rows
/// sign-fixed.
fn null_space(m: &DMatrix<f64>, tol: f64) -> DMatrix<f64> {
    let n = m.ncols();
    if m.nrows() == 0 {
        let mut id = DMatrix::identity(n, n);
        fix_row_signs(&mut id);
        return id;
    }
    let (sv, vt) = padded_svd(m);
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    let rank = sv.iter().filter(|&&s| s > tol * smax && s > 0.0).count();
    let mut rows = vt.rows(rank, n - rank).into_owned();
    fix_row_signs(&mut rows);
    rows
}

fn fix_row_signs(m: &mut DMatrix<f64>) {
    for i in 0..m.nrows() {
        let row = m.row(i);
        if let Some(j) = (0..row.len()).find(|&j| row[j].abs() > 1e-12) {
            if m[(i, j)] < 0.0 {
                let neg = -m.row(i);
                m.set_row(i, &neg);
            }
        }
    }
}

impl ProjSubspace {
    /// Subspace spanned by the given points.
    pub fn from_points(points: &[HomVector]) -> Result<Self> {
        Self::from_points_with_tol(points, RANK_TOL)
    }

    pub fn from_points_with_tol(points: &[HomVector], tol: f64) -> Result<Self> {
        let first = points.first().ok_or_else(|| {
            Error::InvalidInput("subspace needs at least one spanning point".into())
        })?;
        let n = first.len();
        for p in points {
            if p.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: p.len(),
                });
            }
        }
        let mut m = DMatrix::zeros(points.len(), n);
        for (i, p) in points.iter().enumerate() {
            m.set_row(i, &p.coords().transpose());
        }
        Ok(ProjSubspace {
            basis: row_space(&m, tol),
            ambient: n - 1,
        })
    }

    /// Subspace from raw stacked row vectors (spanning set).
    pub fn from_rows(rows: &DMatrix<f64>) -> Self {
        Self::from_rows_with_tol(rows, RANK_TOL)
    }

    pub fn from_rows_with_tol(rows: &DMatrix<f64>, tol: f64) -> Self {
        ProjSubspace {
            basis: row_space(rows, tol),
            ambient: rows.ncols() - 1,
        }
    }

    /// The empty subspace (dimension −1).
    pub fn empty(ambient_dim: usize) -> Self {
        ProjSubspace {
            basis: DMatrix::zeros(0, ambient_dim + 1),
            ambient: ambient_dim,
        }
    }

    /// Whole space ℝPⁿ.
    pub fn full(ambient_dim: usize) -> Self {
        ProjSubspace {
            basis: DMatrix::identity(ambient_dim + 1, ambient_dim + 1),
            ambient: ambient_dim,
        }
    }

    pub fn from_point(p: &HomVector) -> Self {
        let mut m = DMatrix::zeros(1, p.len());
        m.set_row(0, &p.coords().transpose());
        ProjSubspace {
            basis: m,
            ambient: p.len() - 1,
        }
    }

    /// Projective dimension k; the empty subspace has dimension −1.
    pub fn dim(&self) -> isize {
        self.basis.nrows() as isize - 1
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    /// Basis rows as projective points (undefined for the empty subspace).
    pub fn basis_points(&self) -> Vec<HomVector> {
        (0..self.basis.nrows())
            .map(|i| HomVector::from_dvector(self.basis.row(i).transpose()).expect("unit row"))
            .collect()
    }

    /// The single point of a 0-dimensional subspace.
    pub fn to_point(&self) -> Result<HomVector> {
        if self.dim() != 0 {
            return Err(Error::InvalidInput(format!(
                "subspace has dimension {}, not a point",
                self.dim()
            )));
        }
        HomVector::from_dvector(self.basis.row(0).transpose())
    }

    /// Distance of a point from the subspace: norm of the component of the
    /// unit representative orthogonal to the basis.
    pub fn distance(&self, p: &HomVector) -> f64 {
        let mut v = p.coords().clone();
        for i in 0..self.basis.nrows() {
            let b = self.basis.row(i).transpose();
            let d = v.dot(&b);
            v -= b * d;
        }
        v.norm()
    }

    pub fn contains(&self, p: &HomVector, tol: f64) -> bool {
        self.distance(p) <= tol
    }

    /// Subspace equality after canonicalization: equal dimension and mutual
    /// containment of bases.
    pub fn approx_eq(&self, other: &ProjSubspace, tol: f64) -> bool {
        if self.dim() != other.dim() || self.ambient != other.ambient {
            return false;
        }
        self.basis_points().iter().all(|p| other.contains(p, tol))
    }

    /// Orthogonal complement (Euclidean annihilator) of the subspace.
    pub fn complement(&self) -> ProjSubspace {
        ProjSubspace {
            basis: null_space(&self.basis, RANK_TOL),
            ambient: self.ambient,
        }
    }
}

/// Smallest subspace containing both arguments.
pub fn join(a: &ProjSubspace, b: &ProjSubspace) -> Result<ProjSubspace> {
    join_with_tol(a, b, RANK_TOL)
}

pub fn join_with_tol(a: &ProjSubspace, b: &ProjSubspace, tol: f64) -> Result<ProjSubspace> {
    if a.ambient != b.ambient {
        return Err(Error::DimensionMismatch {
            expected: a.ambient,
            got: b.ambient,
        });
    }
    let mut m = DMatrix::zeros(a.basis.nrows() + b.basis.nrows(), a.ambient + 1);
    m.rows_mut(0, a.basis.nrows()).copy_from(&a.basis);
    m.rows_mut(a.basis.nrows(), b.basis.nrows()).copy_from(&b.basis);
    Ok(ProjSubspace {
        basis: row_space(&m, tol),
        ambient: a.ambient,
    })
}

/// Join of several points (convenience for spans of point triples).
pub fn span_of(points: &[HomVector]) -> Result<ProjSubspace> {
    ProjSubspace::from_points(points)
}

/// Largest subspace contained in both arguments, computed as the null space
/// of the stacked annihilators. The empty meet has dimension −1 and is a
/// valid result.
pub fn meet(a: &ProjSubspace, b: &ProjSubspace) -> Result<ProjSubspace> {
    meet_with_tol(a, b, RANK_TOL)
}

pub fn meet_with_tol(a: &ProjSubspace, b: &ProjSubspace, tol: f64) -> Result<ProjSubspace> {
    if a.ambient != b.ambient {
        return Err(Error::DimensionMismatch {
            expected: a.ambient,
            got: b.ambient,
        });
    }
    let ann_a = null_space(&a.basis, tol);
    let ann_b = null_space(&b.basis, tol);
    let mut m = DMatrix::zeros(ann_a.nrows() + ann_b.nrows(), a.ambient + 1);
    m.rows_mut(0, ann_a.nrows()).copy_from(&ann_a);
    m.rows_mut(ann_a.nrows(), ann_b.nrows()).copy_from(&ann_b);
    Ok(ProjSubspace {
        basis: null_space(&m, tol),
        ambient: a.ambient,
    })
}

/// Meet of several subspaces (stacked annihilators of all arguments).
pub fn meet_many(spaces: &[ProjSubspace]) -> Result<ProjSubspace> {
    let first = spaces
        .first()
        .ok_or_else(|| Error::InvalidInput("meet of empty list".into()))?;
    let ambient = first.ambient;
    let mut rows: Vec<DMatrix<f64>> = Vec::new();
    for s in spaces {
        if s.ambient != ambient {
            return Err(Error::DimensionMismatch {
                expected: ambient,
                got: s.ambient,
            });
        }
        rows.push(null_space(&s.basis, RANK_TOL));
    }
    let total: usize = rows.iter().map(|r| r.nrows()).sum();
    let mut m = DMatrix::zeros(total, ambient + 1);
    let mut at = 0;
    for r in &rows {
        m.rows_mut(at, r.nrows()).copy_from(r);
        at += r.nrows();
    }
    Ok(ProjSubspace {
        basis: null_space(&m, RANK_TOL),
        ambient,
    })
}

/// Polar subspace with respect to `form`: the annihilator under G. For
/// nondegenerate forms dim(s) + dim(polar) = n − 1 and polar∘polar = id; for
/// the degenerate Blaschke form double polarity enlarges by the kernel.
pub fn polar(form: QuadricForm, s: &ProjSubspace) -> Result<ProjSubspace> {
    if s.ambient != form.ambient_dim() {
        return Err(Error::DimensionMismatch {
            expected: form.len(),
            got: s.ambient + 1,
        });
    }
    // Rows of B·G annihilate exactly the vectors polar to all of s.
    let mut bg = s.basis.clone();
    let diag = form.diagonal();
    for j in 0..bg.ncols() {
        let mut col = bg.column_mut(j);
        col *= diag[j];
    }
    Ok(ProjSubspace {
        basis: null_space(&bg, RANK_TOL),
        ambient: s.ambient,
    })
}

/// Polar of a single point (its polar hyperplane for nondegenerate forms).
pub fn polar_point(form: QuadricForm, p: &HomVector) -> Result<ProjSubspace> {
    polar(form, &ProjSubspace::from_point(p))
}

/// Invertible projective transformation of ℝPⁿ.
#[derive(Debug, Clone)]
pub struct ProjTransform {
    matrix: DMatrix<f64>,
}

impl ProjTransform {
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::InvalidInput("transform matrix must be square".into()));
        }
        let svd = matrix.clone().svd(false, false);
        let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
        let smin = svd.singular_values.iter().cloned().fold(f64::INFINITY, f64::min);
        if !(smin > RANK_TOL * smax) {
            return Err(Error::Singular {
                residual: smin / smax,
            });
        }
        Ok(ProjTransform { matrix })
    }

    pub fn identity(ambient_dim: usize) -> Self {
        ProjTransform {
            matrix: DMatrix::identity(ambient_dim + 1, ambient_dim + 1),
        }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn ambient_dim(&self) -> usize {
        self.matrix.nrows() - 1
    }

    pub fn apply_point(&self, p: &HomVector) -> Result<HomVector> {
        if p.len() != self.matrix.ncols() {
            return Err(Error::DimensionMismatch {
                expected: self.matrix.ncols(),
                got: p.len(),
            });
        }
        HomVector::from_dvector(&self.matrix * p.coords())
    }

    /// Image subspace: transform each basis row and re-orthonormalize.
    /// Preserves incidence; for form-preserving transforms preserves polarity.
    pub fn apply_subspace(&self, s: &ProjSubspace) -> Result<ProjSubspace> {
        if s.ambient + 1 != self.matrix.ncols() {
            return Err(Error::DimensionMismatch {
                expected: self.matrix.ncols(),
                got: s.ambient + 1,
            });
        }
        let image = &s.basis * self.matrix.transpose();
        Ok(ProjSubspace {
            basis: row_space(&image, RANK_TOL),
            ambient: s.ambient,
        })
    }

    pub fn compose(&self, other: &ProjTransform) -> Result<ProjTransform> {
        ProjTransform::new(&self.matrix * &other.matrix)
    }

    /// Max-abs entry of TᵀGT − G after scaling T to unit top-left-normalised
    /// Frobenius norm; zero for exact isometries of the form.
    pub fn form_residual(&self, form: QuadricForm) -> f64 {
        let g = DMatrix::from_diagonal(&DVector::from_column_slice(form.diagonal()));
        let m = self.matrix.transpose() * &g * &self.matrix;
        // λ-ambiguity: match scale against G on the strongest diagonal entry.
        let mut lambda = 0.0;
        let mut best = 0.0;
        for i in 0..g.nrows() {
            if g[(i, i)].abs() > best {
                best = g[(i, i)].abs();
                lambda = m[(i, i)] / g[(i, i)];
            }
        }
        let diff = m - g * lambda;
        diff.iter().cloned().fold(0.0_f64, |a, b| a.max(b.abs())) / lambda.abs().max(1.0)
    }
}

/// A form isometry produced by [`random_form_isometry`], with diagnostics on
/// how often the Cayley pole forced a magnitude halving.
#[derive(Debug, Clone)]
pub struct FormIsometry {
    pub transform: ProjTransform,
    /// Number of times the magnitude was halved to avoid a singular I − A.
    pub magnitude_halvings: u32,
}

/// Deterministic seeded isometry of a nondegenerate form: draws A with
/// AᵀG + GA = 0 entrywise from the seed, scaled by `magnitude`, and returns
/// the Cayley transform (I − A)⁻¹(I + A). A singular Cayley pole retries with
/// halved magnitude and records the halving.
pub fn random_form_isometry(form: QuadricForm, seed: u64, magnitude: f64) -> Result<FormIsometry> {
    if form.is_degenerate() {
        return Err(Error::InvalidInput(
            "form isometries require a nondegenerate form".into(),
        ));
    }
    let n = form.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Antisymmetric B; then A = G⁻¹B = GB (diagonal ±1) satisfies AᵀG + GA = 0.
    let mut b = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let v: f64 = rng.gen_range(-1.0..1.0);
            b[(i, j)] = v;
            b[(j, i)] = -v;
        }
    }
    let g = DVector::from_column_slice(form.diagonal());
    let mut halvings = 0u32;
    let mut mag = magnitude;
    loop {
        let mut a = b.clone() * mag;
        for i in 0..n {
            let gi = g[i];
            let mut row = a.row_mut(i);
            row *= gi;
        }
        let i_minus_a = DMatrix::identity(n, n) - &a;
        let i_plus_a = DMatrix::identity(n, n) + &a;
        if let Some(inv) = i_minus_a.try_inverse() {
            let t = inv * i_plus_a;
            if let Ok(transform) = ProjTransform::new(t) {
                return Ok(FormIsometry {
                    transform,
                    magnitude_halvings: halvings,
                });
            }
        }
        halvings += 1;
        mag *= 0.5;
        if halvings > 64 {
            return Err(Error::Singular { residual: 0.0 });
        }
    }
}
