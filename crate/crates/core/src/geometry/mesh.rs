use std::collections::HashMap;
use std::fmt::Write as _;
use std::io::{BufRead, Write};

use crate::error::{H2Error, Result};

pub type Point3 = [f64; 3];

/// Triangulated surface with per-triangle areas and centroids.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangleMesh {
    vertices: Vec<Point3>,
    triangles: Vec<[usize; 3]>,
    areas: Vec<f64>,
    midpoints: Vec<Point3>,
}

fn sub(a: &Point3, b: &Point3) -> Point3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn cross(a: &Point3, b: &Point3) -> Point3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub(crate) fn norm(a: &Point3) -> f64 {
    (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt()
}

impl TriangleMesh {
    /// Builds a mesh, validating indices and rejecting degenerate triangles.
    pub fn new(vertices: Vec<Point3>, triangles: Vec<[usize; 3]>) -> Result<Self> {
        let mut areas = Vec::with_capacity(triangles.len());
        let mut midpoints = Vec::with_capacity(triangles.len());
        for (i, tri) in triangles.iter().enumerate() {
            if tri.iter().any(|&v| v >= vertices.len()) {
                return Err(H2Error::InvalidArgument(format!(
                    "triangle {i} references a vertex outside 0..{}",
                    vertices.len()
                )));
            }
            let [a, b, c] = tri.map(|v| vertices[v]);
            let area = 0.5 * norm(&cross(&sub(&b, &a), &sub(&c, &a)));
            if !(area > 0.0) {
                return Err(H2Error::InvalidArgument(format!("triangle {i} has zero area")));
            }
            areas.push(area);
            midpoints.push([
                (a[0] + b[0] + c[0]) / 3.0,
                (a[1] + b[1] + c[1]) / 3.0,
                (a[2] + b[2] + c[2]) / 3.0,
            ]);
        }
        Ok(Self { vertices, triangles, areas, midpoints })
    }

    pub fn vertices(&self) -> &[Point3] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn areas(&self) -> &[f64] {
        &self.areas
    }

    pub fn midpoints(&self) -> &[Point3] {
        &self.midpoints
    }

    pub fn len(&self) -> usize {
        self.triangles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }

    /// Writes the mesh as text: the vertex count, one `x y z` line per
    /// vertex, then one `a b c` line per triangle.
    pub fn write_text<W: Write>(&self, mut out: W) -> Result<()> {
        let mut buf = String::new();
        writeln!(buf, "{}", self.vertices.len()).unwrap();
        for v in &self.vertices {
            writeln!(buf, "{:e} {:e} {:e}", v[0], v[1], v[2]).unwrap();
        }
        for t in &self.triangles {
            writeln!(buf, "{} {} {}", t[0], t[1], t[2]).unwrap();
        }
        out.write_all(buf.as_bytes())?;
        Ok(())
    }

    /// Reads the format produced by [`TriangleMesh::write_text`].
    pub fn read_text<R: BufRead>(input: R) -> Result<Self> {
        let mut lines = input
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l))
            .filter(|(_, l)| l.as_ref().map(|s| !s.trim().is_empty()).unwrap_or(true));
        let (line, first) = lines.next().ok_or(H2Error::Parse { line: 1, msg: "missing vertex count".into() })?;
        let count: usize = first?
            .trim()
            .parse()
            .map_err(|e| H2Error::Parse { line, msg: format!("vertex count: {e}") })?;
        let mut vertices = Vec::with_capacity(count);
        for _ in 0..count {
            let (line, text) = lines.next().ok_or(H2Error::Parse { line: 0, msg: "truncated vertex list".into() })?;
            let text = text?;
            let coords = parse_fields::<f64>(&text, line)?;
            vertices.push([coords[0], coords[1], coords[2]]);
        }
        let mut triangles = Vec::new();
        for (line, text) in lines {
            let idx = parse_fields::<usize>(&text?, line)?;
            triangles.push([idx[0], idx[1], idx[2]]);
        }
        Self::new(vertices, triangles)
    }
}

fn parse_fields<T: std::str::FromStr>(text: &str, line: usize) -> Result<[T; 3]>
where
    T::Err: std::fmt::Display,
{
    let fields: Vec<&str> = text.split_whitespace().collect();
    if fields.len() != 3 {
        return Err(H2Error::Parse { line, msg: format!("expected 3 fields, found {}", fields.len()) });
    }
    let mut parsed = Vec::with_capacity(3);
    for f in fields {
        parsed.push(f.parse::<T>().map_err(|e| H2Error::Parse { line, msg: format!("{f:?}: {e}") })?);
    }
    let mut it = parsed.into_iter();
    Ok([it.next().unwrap(), it.next().unwrap(), it.next().unwrap()])
}

fn project(p: Point3) -> Point3 {
    let n = norm(&p);
    [p[0] / n, p[1] / n, p[2] / n]
}

/// Refines every triangle into four, projecting new vertices onto the unit
/// sphere. Shared edges reuse their midpoint vertex.
fn refine(vertices: &mut Vec<Point3>, triangles: &[[usize; 3]]) -> Vec<[usize; 3]> {
    let mut edge_mid: HashMap<(usize, usize), usize> = HashMap::new();
    let mut mid = |a: usize, b: usize, vertices: &mut Vec<Point3>| {
        let key = (a.min(b), a.max(b));
        *edge_mid.entry(key).or_insert_with(|| {
            let (pa, pb) = (vertices[a], vertices[b]);
            vertices.push(project([(pa[0] + pb[0]) / 2.0, (pa[1] + pb[1]) / 2.0, (pa[2] + pb[2]) / 2.0]));
            vertices.len() - 1
        })
    };
    let mut out = Vec::with_capacity(4 * triangles.len());
    for &[a, b, c] in triangles {
        let ab = mid(a, b, vertices);
        let bc = mid(b, c, vertices);
        let ca = mid(c, a, vertices);
        out.push([a, ab, ca]);
        out.push([ab, b, bc]);
        out.push([ca, bc, c]);
        out.push([ab, bc, ca]);
    }
    out
}

fn octahedron() -> (Vec<Point3>, Vec<[usize; 3]>) {
    let vertices = vec![
        [1.0, 0.0, 0.0],
        [-1.0, 0.0, 0.0],
        [0.0, 1.0, 0.0],
        [0.0, -1.0, 0.0],
        [0.0, 0.0, 1.0],
        [0.0, 0.0, -1.0],
    ];
    // Upper four faces first so that a prefix of the refined faces covers
    // the upper hemisphere.
    let triangles = vec![
        [0, 2, 4],
        [2, 1, 4],
        [1, 3, 4],
        [3, 0, 4],
        [2, 0, 5],
        [1, 2, 5],
        [3, 1, 5],
        [0, 3, 5],
    ];
    (vertices, triangles)
}

fn refined(level: usize, faces: usize) -> TriangleMesh {
    let (mut vertices, mut triangles) = octahedron();
    triangles.truncate(faces);
    for _ in 0..level {
        triangles = refine(&mut vertices, &triangles);
    }
    // Drop vertices that no triangle references (hemisphere case).
    let mut used = vec![usize::MAX; vertices.len()];
    let mut compact = Vec::new();
    for tri in &mut triangles {
        for v in tri.iter_mut() {
            if used[*v] == usize::MAX {
                used[*v] = compact.len();
                compact.push(vertices[*v]);
            }
            *v = used[*v];
        }
    }
    TriangleMesh::new(compact, triangles).expect("refined octahedron is a valid mesh")
}

/// Unit sphere triangulation with `8 * 4^level` triangles, obtained by
/// repeated four-way refinement of an octahedron.
pub fn build_sphere_mesh(level: usize) -> TriangleMesh {
    refined(level, 8)
}

/// Upper unit hemisphere with `4 * 4^level` triangles.
pub fn build_hemisphere_mesh(level: usize) -> TriangleMesh {
    refined(level, 4)
}
