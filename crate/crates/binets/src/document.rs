//! Self-describing JSON documents for binets, bi*nets and lifts, plus the
//! cube-data exchange format.
//!
//! One array-per-role schema covers all the maps on the double lattice:
//! vertex and face point arrays are row-major over the window (i outer, j
//! inner), with optional ρ, σ and plane arrays alongside. Writing is
//! deterministic: floats are serialized with 17 significant digits, so
//! write ∘ read ∘ write is byte-identical.

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use crate::lattice::{CellId, FacePlane, Window};
use crate::lifts::{CellScalar, LaguerreLift, MoebiusLift};
use crate::nets::{BiStarNet, Binet, Plane};
use crate::projective::{HomVector, ProjSubspace, QuadricForm};
use crate::{consistency, Error, Result};

pub const SCHEMA_VERSION: &str = "binets/1";

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
pub struct Metadata {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generator: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
}

/// Optional scalar pair on the double lattice (row-major arrays).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScalarArrays {
    pub vertex: Vec<f64>,
    pub face: Vec<f64>,
}

/// Optional plane pair on the double lattice: rows [ux, uy, uz, h].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlaneArrays {
    pub vertex: Vec<[f64; 4]>,
    pub face: Vec<[f64; 4]>,
}

/// A binet document: points on the double lattice of a window with optional
/// potentials and tangent planes.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BinetDocument {
    pub schema_version: String,
    pub window: Window,
    pub vertex_points: Vec<[f64; 3]>,
    pub face_points: Vec<[f64; 3]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho: Option<ScalarArrays>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma: Option<ScalarArrays>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub planes: Option<PlaneArrays>,
    #[serde(default)]
    pub metadata: Metadata,
}

fn vertex_cells(w: Window) -> Vec<CellId> {
    w.vertices().collect()
}

fn face_cells(w: Window) -> Vec<CellId> {
    w.faces().collect()
}

impl BinetDocument {
    pub fn from_binet(b: &Binet) -> Result<Self> {
        let w = b.window();
        let mut vertex_points = Vec::new();
        for c in vertex_cells(w) {
            let p = b.point(c)?;
            vertex_points.push([p.x, p.y, p.z]);
        }
        let mut face_points = Vec::new();
        for c in face_cells(w) {
            let p = b.point(c)?;
            face_points.push([p.x, p.y, p.z]);
        }
        Ok(BinetDocument {
            schema_version: SCHEMA_VERSION.to_string(),
            window: w,
            vertex_points,
            face_points,
            rho: None,
            sigma: None,
            planes: None,
            metadata: Metadata::default(),
        })
    }

    pub fn to_binet(&self) -> Result<Binet> {
        self.validate()?;
        let mut b = Binet::new(self.window);
        for (c, p) in vertex_cells(self.window).into_iter().zip(&self.vertex_points) {
            b.set(c, Vector3::new(p[0], p[1], p[2]));
        }
        for (c, p) in face_cells(self.window).into_iter().zip(&self.face_points) {
            b.set(c, Vector3::new(p[0], p[1], p[2]));
        }
        Ok(b)
    }

    pub fn with_rho(mut self, rho: &CellScalar) -> Result<Self> {
        let mut vertex = Vec::new();
        for c in vertex_cells(self.window) {
            vertex.push(*rho.get(&c).ok_or_else(|| Error::MissingCell(c.to_string()))?);
        }
        let mut face = Vec::new();
        for c in face_cells(self.window) {
            face.push(*rho.get(&c).ok_or_else(|| Error::MissingCell(c.to_string()))?);
        }
        self.rho = Some(ScalarArrays { vertex, face });
        Ok(self)
    }

    pub fn with_sigma_planes(mut self, lift: &LaguerreLift) -> Result<Self> {
        let mut svx = Vec::new();
        let mut sfc = Vec::new();
        let mut pvx = Vec::new();
        let mut pfc = Vec::new();
        for c in vertex_cells(self.window) {
            let s = lift
                .sigma()
                .get(&c)
                .ok_or_else(|| Error::MissingCell(c.to_string()))?;
            let p = lift.base().plane(c)?;
            svx.push(*s);
            let n = p.normal();
            pvx.push([n.x, n.y, n.z, p.offset()]);
        }
        for c in face_cells(self.window) {
            let s = lift
                .sigma()
                .get(&c)
                .ok_or_else(|| Error::MissingCell(c.to_string()))?;
            let p = lift.base().plane(c)?;
            sfc.push(*s);
            let n = p.normal();
            pfc.push([n.x, n.y, n.z, p.offset()]);
        }
        self.sigma = Some(ScalarArrays {
            vertex: svx,
            face: sfc,
        });
        self.planes = Some(PlaneArrays {
            vertex: pvx,
            face: pfc,
        });
        Ok(self)
    }

    /// The stored ρ as a cell map (when present).
    pub fn rho_map(&self) -> Option<CellScalar> {
        let rho = self.rho.as_ref()?;
        let mut out = CellScalar::new();
        for (c, v) in vertex_cells(self.window).into_iter().zip(&rho.vertex) {
            out.insert(c, *v);
        }
        for (c, v) in face_cells(self.window).into_iter().zip(&rho.face) {
            out.insert(c, *v);
        }
        Some(out)
    }

    /// The stored planes as a bi*net (when present).
    pub fn planes_net(&self) -> Result<Option<BiStarNet>> {
        let Some(planes) = self.planes.as_ref() else {
            return Ok(None);
        };
        let mut bs = BiStarNet::new(self.window);
        for (c, row) in vertex_cells(self.window).into_iter().zip(&planes.vertex) {
            bs.set(
                c,
                Plane::new(Vector3::new(row[0], row[1], row[2]), row[3])?,
            );
        }
        for (c, row) in face_cells(self.window).into_iter().zip(&planes.face) {
            bs.set(
                c,
                Plane::new(Vector3::new(row[0], row[1], row[2]), row[3])?,
            );
        }
        Ok(Some(bs))
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Schema {
                path: "schema_version".into(),
                detail: format!(
                    "unsupported version {:?}, expected {:?}",
                    self.schema_version, SCHEMA_VERSION
                ),
            });
        }
        let (m, n) = self.window.vertex_counts();
        let nv = m * n;
        let nf = (m - 1) * (n - 1);
        if self.vertex_points.len() != nv {
            return Err(Error::Schema {
                path: "vertex_points".into(),
                detail: format!("expected {nv} rows, got {}", self.vertex_points.len()),
            });
        }
        if self.face_points.len() != nf {
            return Err(Error::Schema {
                path: "face_points".into(),
                detail: format!("expected {nf} rows, got {}", self.face_points.len()),
            });
        }
        let check_finite = |path: &str, values: &mut dyn Iterator<Item = f64>| -> Result<()> {
            for (i, v) in values.enumerate() {
                if !v.is_finite() {
                    return Err(Error::Schema {
                        path: format!("{path}[{i}]"),
                        detail: "non-finite number".into(),
                    });
                }
            }
            Ok(())
        };
        check_finite(
            "vertex_points",
            &mut self.vertex_points.iter().flatten().cloned(),
        )?;
        check_finite(
            "face_points",
            &mut self.face_points.iter().flatten().cloned(),
        )?;
        if let Some(r) = &self.rho {
            if r.vertex.len() != nv || r.face.len() != nf {
                return Err(Error::Schema {
                    path: "rho".into(),
                    detail: "array lengths do not match the window".into(),
                });
            }
            check_finite("rho.vertex", &mut r.vertex.iter().cloned())?;
            check_finite("rho.face", &mut r.face.iter().cloned())?;
        }
        if let Some(sg) = &self.sigma {
            if sg.vertex.len() != nv || sg.face.len() != nf {
                return Err(Error::Schema {
                    path: "sigma".into(),
                    detail: "array lengths do not match the window".into(),
                });
            }
        }
        if let Some(pl) = &self.planes {
            if pl.vertex.len() != nv || pl.face.len() != nf {
                return Err(Error::Schema {
                    path: "planes".into(),
                    detail: "array lengths do not match the window".into(),
                });
            }
            check_finite("planes.vertex", &mut pl.vertex.iter().flatten().cloned())?;
            check_finite("planes.face", &mut pl.face.iter().flatten().cloned())?;
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Deterministic JSON output (17 significant digits)
// ---------------------------------------------------------------------------

struct SigDigitFormatter;

impl serde_json::ser::Formatter for SigDigitFormatter {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()>
    where
        W: ?Sized + Write,
    {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W>(&mut self, writer: &mut W, value: f32) -> std::io::Result<()>
    where
        W: ?Sized + Write,
    {
        write!(writer, "{value:.7e}")
    }
}

/// Serializes any document type to deterministic JSON bytes.
pub fn to_json_bytes<T: Serialize>(doc: &T) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, SigDigitFormatter);
    doc.serialize(&mut ser)?;
    out.push(b'\n');
    Ok(out)
}

pub fn write_document(doc: &BinetDocument, path: &Path) -> Result<()> {
    doc.validate()?;
    std::fs::write(path, to_json_bytes(doc)?)?;
    Ok(())
}

pub fn read_document(path: &Path) -> Result<BinetDocument> {
    let bytes = std::fs::read(path)?;
    let doc: BinetDocument = serde_json::from_slice(&bytes)?;
    doc.validate()?;
    Ok(doc)
}

// ---------------------------------------------------------------------------
// Cube documents
// ---------------------------------------------------------------------------

/// Exchange format for one polar-conjugate cube: homogeneous 5-vectors for
/// the seven known vertices and three known faces, plus basis rows for the
/// six mixed vertex planes.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CubeDocument {
    pub schema_version: String,
    pub form: QuadricForm,
    /// Corner index (bit 0 ↔ +e₁, bit 1 ↔ +e₂, bit 2 ↔ +e₃) → coordinates.
    pub vertices: BTreeMap<u8, [f64; 5]>,
    /// Face plane name ("12", "13", "23") and level → coordinates.
    pub faces: BTreeMap<String, [f64; 5]>,
    /// Corner index → plane basis rows.
    pub vertex_planes: BTreeMap<u8, Vec<[f64; 5]>>,
}

fn face_key(plane: FacePlane, level: u8) -> String {
    let name = match plane {
        FacePlane::P12 => "12",
        FacePlane::P13 => "13",
        FacePlane::P23 => "23",
    };
    format!("{name}/{level}")
}

fn parse_face_key(key: &str) -> Result<(FacePlane, u8)> {
    let (name, level) = key.split_once('/').ok_or_else(|| Error::Schema {
        path: format!("faces.{key}"),
        detail: "expected \"<plane>/<level>\"".into(),
    })?;
    let plane = match name {
        "12" => FacePlane::P12,
        "13" => FacePlane::P13,
        "23" => FacePlane::P23,
        other => {
            return Err(Error::Schema {
                path: format!("faces.{key}"),
                detail: format!("unknown plane {other:?}"),
            })
        }
    };
    let level: u8 = level.parse().map_err(|_| Error::Schema {
        path: format!("faces.{key}"),
        detail: "level must be 0 or 1".into(),
    })?;
    Ok((plane, level))
}

impl CubeDocument {
    pub fn from_cube_data(data: &consistency::CubeData) -> Self {
        let mut vertices = BTreeMap::new();
        for (c, x) in &data.vertices {
            let v = x.coords();
            vertices.insert(*c, [v[0], v[1], v[2], v[3], v[4]]);
        }
        let mut faces = BTreeMap::new();
        for (&(plane, level), x) in &data.faces {
            let v = x.coords();
            faces.insert(face_key(plane, level), [v[0], v[1], v[2], v[3], v[4]]);
        }
        let mut vertex_planes = BTreeMap::new();
        for (c, s) in &data.vertex_planes {
            let rows: Vec<[f64; 5]> = s
                .basis_points()
                .iter()
                .map(|p| {
                    let v = p.coords();
                    [v[0], v[1], v[2], v[3], v[4]]
                })
                .collect();
            vertex_planes.insert(*c, rows);
        }
        CubeDocument {
            schema_version: SCHEMA_VERSION.to_string(),
            form: data.form,
            vertices,
            faces,
            vertex_planes,
        }
    }

    pub fn to_cube_data(&self) -> Result<consistency::CubeData> {
        let mut vertices = BTreeMap::new();
        for (c, v) in &self.vertices {
            vertices.insert(*c, HomVector::new(v)?);
        }
        let mut faces = BTreeMap::new();
        for (key, v) in &self.faces {
            faces.insert(parse_face_key(key)?, HomVector::new(v)?);
        }
        let mut vertex_planes = BTreeMap::new();
        for (c, rows) in &self.vertex_planes {
            let pts: Result<Vec<HomVector>> = rows.iter().map(|r| HomVector::new(r)).collect();
            vertex_planes.insert(*c, ProjSubspace::from_points(&pts?)?);
        }
        Ok(consistency::CubeData {
            form: self.form,
            vertices,
            faces,
            vertex_planes,
        })
    }
}

pub fn write_cube_document(doc: &CubeDocument, path: &Path) -> Result<()> {
    std::fs::write(path, to_json_bytes(doc)?)?;
    Ok(())
}

pub fn read_cube_document(path: &Path) -> Result<CubeDocument> {
    let bytes = std::fs::read(path)?;
    Ok(serde_json::from_slice(&bytes)?)
}

/// Convenience: document with ρ from a Möbius lift.
pub fn document_with_moebius(lift: &MoebiusLift) -> Result<BinetDocument> {
    BinetDocument::from_binet(lift.base())?.with_rho(lift.rho())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construct::{revolution_binet, ProfileCurve};
    use crate::lifts::moebius_lift;
    use crate::nets::check_orthogonal;

    #[test]
    fn minimal_round_trip_is_byte_identical() {
        let w = Window::sized(2, 2);
        let mut b = Binet::new(w);
        for (k, c) in w.cells().enumerate() {
            b.set(
                c,
                Vector3::new(k as f64 + 0.125, -(k as f64) / 3.0, 2.0_f64.sqrt() * k as f64),
            );
        }
        let doc = BinetDocument::from_binet(&b).unwrap();
        let tmp = std::env::temp_dir().join("binets_doc_roundtrip.json");
        write_document(&doc, &tmp).unwrap();
        let bytes1 = std::fs::read(&tmp).unwrap();
        let doc2 = read_document(&tmp).unwrap();
        write_document(&doc2, &tmp).unwrap();
        let bytes2 = std::fs::read(&tmp).unwrap();
        assert_eq!(bytes1, bytes2);
        std::fs::remove_file(&tmp).ok();
    }

    #[test]
    fn revolution_document_preserves_checks() {
        let profile =
            ProfileCurve::new(vec![(1.0, 0.0), (1.3, 0.8), (1.4, 1.6)], 0.6, 5).unwrap();
        let b = revolution_binet(&profile).unwrap();
        let lift = moebius_lift(&b, 0.2, 1e-9).unwrap();
        let doc = document_with_moebius(&lift).unwrap();
        let tmp = std::env::temp_dir().join("binets_doc_rev.json");
        write_document(&doc, &tmp).unwrap();
        let doc2 = read_document(&tmp).unwrap();
        let b2 = doc2.to_binet().unwrap();
        // 17 significant digits reproduce f64 exactly: identical residuals.
        let r1 = check_orthogonal(&b, 1e-9).unwrap();
        let r2 = check_orthogonal(&b2, 1e-9).unwrap();
        assert_eq!(r1.max_residual().to_bits(), r2.max_residual().to_bits());
        let rho2 = doc2.rho_map().unwrap();
        for (c, v) in lift.rho() {
            assert_eq!(v.to_bits(), rho2[c].to_bits());
        }
        std::fs::remove_file(&tmp).ok();
    }

    #[test]
    fn schema_violations_are_field_level() {
        let w = Window::sized(2, 2);
        let mut b = Binet::new(w);
        for c in w.cells() {
            b.set(c, Vector3::zeros());
        }
        let mut doc = BinetDocument::from_binet(&b).unwrap();
        doc.vertex_points.pop();
        match doc.validate() {
            Err(Error::Schema { path, .. }) => assert_eq!(path, "vertex_points"),
            other => panic!("expected schema error, got {other:?}"),
        }
        // Non-finite numbers rejected with the field path.
        let mut doc = BinetDocument::from_binet(&b).unwrap();
        doc.face_points[0][1] = f64::INFINITY;
        match doc.validate() {
            Err(Error::Schema { path, .. }) => assert!(path.starts_with("face_points")),
            other => panic!("expected schema error, got {other:?}"),
        }
        // NaN cannot even be parsed from JSON.
        assert!(serde_json::from_str::<BinetDocument>("{\"vertex_points\": [NaN]}").is_err());
    }

    #[test]
    fn cube_document_round_trip() {
        use crate::consistency::{
            extend_principal_to_z3, generate_initial_slices, SliceBase,
        };
        let s = generate_initial_slices(29, 4, 4, 4, SliceBase::Random).unwrap();
        let ext = extend_principal_to_z3(&s, 0.0, 1e-8).unwrap();
        let mut state = ext.state;
        let data = state.cube_data([0, 0, 0]).unwrap();
        let doc = CubeDocument::from_cube_data(&data);
        let tmp = std::env::temp_dir().join("binets_cube_roundtrip.json");
        write_cube_document(&doc, &tmp).unwrap();
        let doc2 = read_cube_document(&tmp).unwrap();
        let data2 = doc2.to_cube_data().unwrap();
        let completed = crate::consistency::complete_polar_cube(&data2).unwrap();
        assert!(completed.new_polarity_residual < 1e-8);
        std::fs::remove_file(&tmp).ok();
    }
}
