//! OBJ export: the two interleaved quad meshes of a binet, with optional
//! line elements for the cross edges.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::lattice::{dual_faces_of_v_edge, face_vertices, vertex_faces, CellId};
use crate::nets::Binet;
use crate::Result;

#[derive(Debug, Clone, Copy)]
pub struct ObjOptions {
    /// Emit `l` records for the V-net edges.
    pub show_edges: bool,
    /// Emit `l` records for the dual (F-net) edges.
    pub show_dual_edges: bool,
    /// Group the two nets as separate objects (`o`) rather than groups (`g`).
    pub split_nets: bool,
}

impl Default for ObjOptions {
    fn default() -> Self {
        ObjOptions {
            show_edges: false,
            show_dual_edges: false,
            split_nets: true,
        }
    }
}

/// Renders a binet as OBJ text: V-net quads as faces in the first object,
/// F-net quads (around interior vertices) in the second. Deterministic
/// vertex ordering; identical input yields identical bytes.
pub fn export_obj(b: &Binet, options: ObjOptions) -> Result<String> {
    let w = b.window();
    let mut out = String::new();
    let mut index: BTreeMap<CellId, usize> = BTreeMap::new();
    let mut verts: Vec<(CellId, [f64; 3])> = Vec::new();
    for c in w.cells() {
        if let Some(p) = b.get(c) {
            index.insert(c, verts.len() + 1);
            verts.push((c, [p.x, p.y, p.z]));
        }
    }
    for (_, p) in &verts {
        writeln!(out, "v {:.16e} {:.16e} {:.16e}", p[0], p[1], p[2]).unwrap();
    }
    let header = if options.split_nets { "o" } else { "g" };

    writeln!(out, "{header} net_vertices").unwrap();
    for f in w.faces() {
        let corners = face_vertices(f);
        let ids: Option<Vec<usize>> = corners.iter().map(|c| index.get(c).copied()).collect();
        if let Some(ids) = ids {
            writeln!(out, "f {} {} {} {}", ids[0], ids[1], ids[2], ids[3]).unwrap();
        }
    }
    if options.show_edges {
        for (a, c) in w.v_edges() {
            if let (Some(i), Some(j)) = (index.get(&a), index.get(&c)) {
                writeln!(out, "l {i} {j}").unwrap();
            }
        }
    }

    writeln!(out, "{header} net_faces").unwrap();
    for v in w.vertices() {
        let faces = vertex_faces(v);
        if !faces.iter().all(|f| w.contains(*f)) {
            continue;
        }
        let ids: Option<Vec<usize>> = faces.iter().map(|c| index.get(c).copied()).collect();
        if let Some(ids) = ids {
            writeln!(out, "f {} {} {} {}", ids[0], ids[1], ids[2], ids[3]).unwrap();
        }
    }
    if options.show_dual_edges {
        for (a, c) in w.v_edges() {
            let (fa, fb) = dual_faces_of_v_edge(a, c);
            if let (Some(i), Some(j)) = (index.get(&fa), index.get(&fb)) {
                writeln!(out, "l {i} {j}").unwrap();
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nets::test_util::{planar_grid, revolution};

    fn count_lines_with(s: &str, prefix: &str) -> usize {
        s.lines().filter(|l| l.starts_with(prefix)).count()
    }

    #[test]
    fn planar_grid_counts() {
        // 3×3 vertices: (m−1)(n−1) = 4 V-quads, (m−2)(n−2) = 1 F-quad.
        let obj = export_obj(&planar_grid(3, 3), ObjOptions::default()).unwrap();
        assert_eq!(count_lines_with(&obj, "v "), 9 + 4);
        assert_eq!(count_lines_with(&obj, "f "), 4 + 1);
        assert_eq!(count_lines_with(&obj, "o "), 2);
    }

    #[test]
    fn revolution_interleaved_meshes() {
        let b = revolution(6, 5, 0.5);
        let (m, n) = (6usize, 5usize);
        let obj = export_obj(
            &b,
            ObjOptions {
                show_edges: true,
                show_dual_edges: true,
                split_nets: true,
            },
        )
        .unwrap();
        assert_eq!(
            count_lines_with(&obj, "f "),
            (m - 1) * (n - 1) + (m - 2) * (n - 2)
        );
        assert!(count_lines_with(&obj, "l ") > 0);
    }

    #[test]
    fn export_is_deterministic() {
        let b = revolution(5, 4, 0.6);
        let a = export_obj(&b, ObjOptions::default()).unwrap();
        let c = export_obj(&b, ObjOptions::default()).unwrap();
        assert_eq!(a, c);
    }
}
