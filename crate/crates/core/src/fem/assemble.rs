use alloc::vec::Vec;

use super::SparseSymmetricMatrix;
use crate::error::{Error, Result};
use crate::mesh::Mesh;

/// Dense 3×3 element matrix.
pub type Local = [[f64; 3]; 3];

/// Element stiffness and consistent mass of a P1 triangle.
pub fn element_matrices(p: [crate::Point; 3]) -> Result<(Local, Local)> {
    let [a, b, c] = p;
    let area = 0.5 * (b - a).cross(c - a);
    if !(area > 0.0) {
        return Err(Error::DegenerateTriangle(usize::MAX));
    }
    // gradients of the barycentric basis, scaled by 2A
    let bx = [b.y - c.y, c.y - a.y, a.y - b.y];
    let cy = [c.x - b.x, a.x - c.x, b.x - a.x];
    let mut k = [[0.0; 3]; 3];
    let mut m = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            k[i][j] = (bx[i] * bx[j] + cy[i] * cy[j]) / (4.0 * area);
            m[i][j] = area / 12.0 * if i == j { 2.0 } else { 1.0 };
        }
    }
    Ok((k, m))
}

/// Global P1 stiffness `K` and consistent mass `M` over all mesh vertices.
pub fn assemble(mesh: &Mesh) -> Result<(SparseSymmetricMatrix, SparseSymmetricMatrix)> {
    let n = mesh.n_vertices();
    let mut kt = Vec::with_capacity(6 * mesh.n_triangles());
    let mut mt = Vec::with_capacity(6 * mesh.n_triangles());
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let (ke, me) = element_matrices(mesh.corners(t)).map_err(|_| Error::DegenerateTriangle(t))?;
        for a in 0..3 {
            for b in 0..=a {
                let (i, j) = (tri[a], tri[b]);
                kt.push((i, j, ke[a][b]));
                mt.push((i, j, me[a][b]));
            }
        }
    }
    Ok((SparseSymmetricMatrix::from_triplets(n, kt), SparseSymmetricMatrix::from_triplets(n, mt)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Point, PolygonDomain};
    use crate::mesh::{triangulate, MeshParams};

    #[test]
    fn unit_right_triangle() {
        let (k, m) = element_matrices([Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(0.0, 1.0)]).unwrap();
        let k_ref = [[1.0, -0.5, -0.5], [-0.5, 0.5, 0.0], [-0.5, 0.0, 0.5]];
        let m_ref = [[2.0, 1.0, 1.0], [1.0, 2.0, 1.0], [1.0, 1.0, 2.0]];
        for i in 0..3 {
            for j in 0..3 {
                assert!((k[i][j] - k_ref[i][j]).abs() < 1e-15);
                assert!((m[i][j] - m_ref[i][j] / 24.0).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn degenerate_triangle_rejected() {
        let r = element_matrices([Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(2.0, 0.0)]);
        assert!(r.is_err());
    }

    #[test]
    fn kernel_and_partition_of_unity() {
        let dom = PolygonDomain::rectangle(Point::new(0.0, 0.0), Point::new(2.0, 1.0)).unwrap();
        let mesh = triangulate(&dom, &MeshParams::uniform(0.2)).unwrap();
        let (k, m) = assemble(&mesh).unwrap();
        let scale = k.norm_inf();
        assert!(k.row_sums().iter().all(|s| s.abs() <= 1e-12 * scale));
        assert!((m.sum_all() - 2.0).abs() < 1e-12);
        // ∫|∇x|² = area
        let x: Vec<f64> = mesh.vertices.iter().map(|p| p.x).collect();
        assert!((k.bilinear(&x, &x) - 2.0).abs() < 1e-12);
    }
}
