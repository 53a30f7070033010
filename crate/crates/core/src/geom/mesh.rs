use std::collections::{BTreeMap, HashMap};

use nalgebra::Vector3;

use super::curve::EPS_GEOM;
use crate::error::{Error, Result};

/// Orthonormal tangent frame of a triangle: `e1` along the first edge, `e2 = n × e1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TriangleFrame {
    pub e1: Vector3<f64>,
    pub e2: Vector3<f64>,
    pub normal: Vector3<f64>,
}

/// Closed, consistently oriented triangle mesh in R³ with outward normals.
#[derive(Clone, Debug, PartialEq)]
pub struct SurfaceMesh {
    vertices: Vec<Vector3<f64>>,
    triangles: Vec<[usize; 3]>,
    frames: Vec<TriangleFrame>,
    diameter: f64,
}

impl SurfaceMesh {
    pub fn new(vertices: Vec<Vector3<f64>>, triangles: Vec<[usize; 3]>) -> Result<Self> {
        if triangles.len() < 4 {
            return Err(Error::InvalidGeometry(format!(
                "closed mesh needs at least 4 triangles, got {}",
                triangles.len()
            )));
        }
        let nv = vertices.len();
        if let Some(t) = triangles.iter().find(|t| t.iter().any(|&i| i >= nv)) {
            return Err(Error::InvalidGeometry(format!(
                "triangle {t:?} references a vertex out of range ({nv} vertices)"
            )));
        }
        if vertices.iter().any(|v| v.iter().any(|c| !c.is_finite())) {
            return Err(Error::InvalidGeometry(
                "non-finite vertex coordinate".into(),
            ));
        }
        let diameter = bbox_diagonal(&vertices);
        let min_area = EPS_GEOM * diameter * diameter;

        let mut frames = Vec::with_capacity(triangles.len());
        for (ti, t) in triangles.iter().enumerate() {
            let [a, b, c] = t.map(|i| vertices[i]);
            let cross = (b - a).cross(&(c - a));
            let area = 0.5 * cross.norm();
            if area <= min_area {
                return Err(Error::InvalidGeometry(format!(
                    "degenerate triangle {ti} (area {area:e})"
                )));
            }
            let normal = cross / cross.norm();
            let e1 = (b - a).normalize();
            frames.push(TriangleFrame {
                e1,
                e2: normal.cross(&e1),
                normal,
            });
        }

        check_closed_oriented(&triangles)?;

        let mesh = Self {
            vertices,
            triangles,
            frames,
            diameter,
        };
        let vol = mesh.enclosed_volume();
        if vol <= 0.0 {
            return Err(Error::InvalidGeometry(format!(
                "normals point inward (enclosed volume {vol:e})"
            )));
        }
        Ok(mesh)
    }

    /// Icosahedron refined `subdivisions` times with vertices projected to the sphere.
    pub fn icosphere(subdivisions: u32, radius: f64) -> Result<Self> {
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        let mut verts: Vec<Vector3<f64>> = [
            [-1.0, phi, 0.0],
            [1.0, phi, 0.0],
            [-1.0, -phi, 0.0],
            [1.0, -phi, 0.0],
            [0.0, -1.0, phi],
            [0.0, 1.0, phi],
            [0.0, -1.0, -phi],
            [0.0, 1.0, -phi],
            [phi, 0.0, -1.0],
            [phi, 0.0, 1.0],
            [-phi, 0.0, -1.0],
            [-phi, 0.0, 1.0],
        ]
        .iter()
        .map(|p| Vector3::new(p[0], p[1], p[2]).normalize())
        .collect();
        let mut tris: Vec<[usize; 3]> = vec![
            [0, 11, 5],
            [0, 5, 1],
            [0, 1, 7],
            [0, 7, 10],
            [0, 10, 11],
            [1, 5, 9],
            [5, 11, 4],
            [11, 10, 2],
            [10, 7, 6],
            [7, 1, 8],
            [3, 9, 4],
            [3, 4, 2],
            [3, 2, 6],
            [3, 6, 8],
            [3, 8, 9],
            [4, 9, 5],
            [2, 4, 11],
            [6, 2, 10],
            [8, 6, 7],
            [9, 8, 1],
        ];
        for _ in 0..subdivisions {
            let mut mid: BTreeMap<(usize, usize), usize> = BTreeMap::new();
            let mut midpoint = |a: usize, b: usize, verts: &mut Vec<Vector3<f64>>| {
                let key = (a.min(b), a.max(b));
                *mid.entry(key).or_insert_with(|| {
                    verts.push(((verts[a] + verts[b]) * 0.5).normalize());
                    verts.len() - 1
                })
            };
            let mut next = Vec::with_capacity(tris.len() * 4);
            for &[a, b, c] in &tris {
                let ab = midpoint(a, b, &mut verts);
                let bc = midpoint(b, c, &mut verts);
                let ca = midpoint(c, a, &mut verts);
                next.extend([[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
            }
            tris = next;
        }
        Self::new(verts.into_iter().map(|v| v * radius).collect(), tris)
    }

    /// Tetrahedron spanned by the origin and the three unit points.
    pub fn corner_tetrahedron() -> Result<Self> {
        Self::new(
            vec![
                Vector3::new(0.0, 0.0, 0.0),
                Vector3::new(1.0, 0.0, 0.0),
                Vector3::new(0.0, 1.0, 0.0),
                Vector3::new(0.0, 0.0, 1.0),
            ],
            vec![[0, 2, 1], [0, 1, 3], [1, 2, 3], [0, 3, 2]],
        )
    }

    /// Axis-aligned box `[0,sx]×[0,sy]×[0,sz]` split into 12 triangles.
    ///
    /// Triangle 0 lies on the top face with its first edge along +x.
    pub fn axis_box(sx: f64, sy: f64, sz: f64) -> Result<Self> {
        let v = |x: f64, y: f64, z: f64| Vector3::new(x * sx, y * sy, z * sz);
        let verts = vec![
            v(0.0, 0.0, 0.0),
            v(1.0, 0.0, 0.0),
            v(1.0, 1.0, 0.0),
            v(0.0, 1.0, 0.0),
            v(0.0, 0.0, 1.0),
            v(1.0, 0.0, 1.0),
            v(1.0, 1.0, 1.0),
            v(0.0, 1.0, 1.0),
        ];
        let tris = vec![
            [4, 5, 6],
            [4, 6, 7],
            [0, 2, 1],
            [0, 3, 2],
            [0, 1, 5],
            [0, 5, 4],
            [1, 2, 6],
            [1, 6, 5],
            [2, 3, 7],
            [2, 7, 6],
            [3, 0, 4],
            [3, 4, 7],
        ];
        Self::new(verts, tris)
    }

    pub fn vertices(&self) -> &[Vector3<f64>] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn frames(&self) -> &[TriangleFrame] {
        &self.frames
    }

    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    pub fn triangle_corners(&self, t: usize) -> [Vector3<f64>; 3] {
        self.triangles[t].map(|i| self.vertices[i])
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangle_corners(t);
        0.5 * (b - a).cross(&(c - a)).norm()
    }

    pub fn triangle_areas(&self) -> Vec<f64> {
        (0..self.triangles.len())
            .map(|t| self.triangle_area(t))
            .collect()
    }

    /// Total surface area, accumulated in triangle index order.
    pub fn area(&self) -> f64 {
        let mut acc = 0.0;
        for t in 0..self.triangles.len() {
            acc += self.triangle_area(t);
        }
        acc
    }

    pub fn enclosed_volume(&self) -> f64 {
        self.triangles
            .iter()
            .map(|t| {
                let [a, b, c] = t.map(|i| self.vertices[i]);
                a.dot(&b.cross(&c)) / 6.0
            })
            .sum()
    }

    pub fn same_connectivity(&self, other: &SurfaceMesh) -> bool {
        self.vertices.len() == other.vertices.len() && self.triangles == other.triangles
    }

    /// New mesh with the same connectivity and every vertex transformed by `f`.
    pub fn map_vertices(&self, f: impl Fn(Vector3<f64>) -> Vector3<f64>) -> Result<Self> {
        Self::new(
            self.vertices.iter().map(|&v| f(v)).collect(),
            self.triangles.clone(),
        )
    }
}

fn check_closed_oriented(triangles: &[[usize; 3]]) -> Result<()> {
    let mut directed: HashMap<(usize, usize), usize> = HashMap::new();
    for t in triangles {
        for k in 0..3 {
            *directed.entry((t[k], t[(k + 1) % 3])).or_default() += 1;
        }
    }
    for (&(a, b), &count) in &directed {
        let back = directed.get(&(b, a)).copied().unwrap_or(0);
        if count + back != 2 {
            return Err(Error::InvalidGeometry(format!(
                "edge ({a},{b}) is shared by {} triangles",
                count + back
            )));
        }
        if count != 1 {
            return Err(Error::InvalidGeometry(format!(
                "inconsistent orientation across edge ({a},{b})"
            )));
        }
    }
    Ok(())
}

fn bbox_diagonal(v: &[Vector3<f64>]) -> f64 {
    let mut lo = v[0];
    let mut hi = v[0];
    for p in v {
        lo = lo.inf(p);
        hi = hi.sup(p);
    }
    (hi - lo).norm()
}
