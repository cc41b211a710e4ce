//! Structured simplicial meshes of the unit square and unit cube.
//!
//! The square is split along the `(i,j) -> (i+1,j+1)` diagonal of every grid
//! square; the cube uses the Kuhn (Freudenthal) subdivision of every grid cube
//! into six tetrahedra sharing the main diagonal. Both families are nested
//! under `n -> 2n`.
//!
//! Edges and faces are stored with ascending vertex indices, which fixes a
//! canonical, mesh-order independent orientation for every sub-simplex. Cells
//! keep a vertex order with positive signed volume.

use std::collections::HashMap;

use crate::error::{Error, Result};

/// Local vertex pairs of the edges of a triangle.
pub const LOCAL_EDGES_2D: [[usize; 2]; 3] = [[0, 1], [0, 2], [1, 2]];
/// Local vertex pairs of the edges of a tetrahedron.
pub const LOCAL_EDGES_3D: [[usize; 2]; 6] = [[0, 1], [0, 2], [0, 3], [1, 2], [1, 3], [2, 3]];

#[derive(Debug, Clone)]
pub struct SimplicialMesh {
    dim: usize,
    n: usize,
    vertices: Vec<[f64; 3]>,
    grid: Vec<[usize; 3]>,
    cells: Vec<[usize; 4]>,
    edges: Vec<[usize; 2]>,
    faces: Vec<[usize; 3]>,
    volumes: Vec<f64>,
    cell_edges: Vec<[usize; 6]>,
    cell_edge_signs: Vec<[i8; 6]>,
    /// Codimension-one entities (edges in 2D, faces in 3D) of every cell,
    /// listed opposite local vertex 0, 1, ..., with outward orientation signs.
    cell_facets: Vec<[usize; 4]>,
    cell_facet_signs: Vec<[i8; 4]>,
    face_edges: Vec<[usize; 3]>,
    face_edge_signs: Vec<[i8; 3]>,
    facet_cell_count: Vec<u8>,
    boundary_vertex: Vec<bool>,
    boundary_edge: Vec<bool>,
    boundary_face: Vec<bool>,
}

/// Boundary flags of every entity class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundaryFlags {
    pub vertices: Vec<bool>,
    pub edges: Vec<bool>,
    pub faces: Vec<bool>,
}

impl BoundaryFlags {
    pub fn count_vertices(&self) -> usize {
        self.vertices.iter().filter(|b| **b).count()
    }
    pub fn count_edges(&self) -> usize {
        self.edges.iter().filter(|b| **b).count()
    }
    pub fn count_faces(&self) -> usize {
        self.faces.iter().filter(|b| **b).count()
    }
}

/// Builds the structured mesh of `[0,1]^dim` with `n` cells per edge.
pub fn build_unit_box_mesh(n: usize, dim: usize) -> Result<SimplicialMesh> {
    if n == 0 {
        return Err(Error::InvalidResolution(n));
    }
    match dim {
        2 => Ok(SimplicialMesh::square(n)),
        3 => Ok(SimplicialMesh::cube(n)),
        d => Err(Error::UnsupportedDimension(d)),
    }
}

/// Boundary flag tables of a mesh. An entity is on the boundary iff all of
/// its vertices lie on one common face of the box.
pub fn classify_boundary(mesh: &SimplicialMesh) -> BoundaryFlags {
    BoundaryFlags {
        vertices: mesh.boundary_vertex.clone(),
        edges: mesh.boundary_edge.clone(),
        faces: mesh.boundary_face.clone(),
    }
}

fn permutation_sign(p: [usize; 3]) -> i32 {
    let mut s = 1;
    for i in 0..3 {
        for j in i + 1..3 {
            if p[i] > p[j] {
                s = -s;
            }
        }
    }
    s
}

const KUHN_PERMUTATIONS: [[usize; 3]; 6] = [
    [0, 1, 2],
    [0, 2, 1],
    [1, 0, 2],
    [1, 2, 0],
    [2, 0, 1],
    [2, 1, 0],
];

impl SimplicialMesh {
    fn square(n: usize) -> Self {
        let np = n + 1;
        let mut vertices = Vec::with_capacity(np * np);
        let mut grid = Vec::with_capacity(np * np);
        for j in 0..np {
            for i in 0..np {
                vertices.push([i as f64 / n as f64, j as f64 / n as f64, 0.0]);
                grid.push([i, j, 0]);
            }
        }
        let vid = |i: usize, j: usize| i + np * j;
        let mut cells = Vec::with_capacity(2 * n * n);
        for j in 0..n {
            for i in 0..n {
                let v00 = vid(i, j);
                let v10 = vid(i + 1, j);
                let v11 = vid(i + 1, j + 1);
                let v01 = vid(i, j + 1);
                cells.push([v00, v10, v11, usize::MAX]);
                cells.push([v00, v11, v01, usize::MAX]);
            }
        }
        Self::from_parts(2, n, vertices, grid, cells)
    }

    fn cube(n: usize) -> Self {
        let np = n + 1;
        let mut vertices = Vec::with_capacity(np * np * np);
        let mut grid = Vec::with_capacity(np * np * np);
        for k in 0..np {
            for j in 0..np {
                for i in 0..np {
                    vertices.push([
                        i as f64 / n as f64,
                        j as f64 / n as f64,
                        k as f64 / n as f64,
                    ]);
                    grid.push([i, j, k]);
                }
            }
        }
        let vid = |g: [usize; 3]| g[0] + np * (g[1] + np * g[2]);
        let mut cells = Vec::with_capacity(6 * n * n * n);
        for k in 0..n {
            for j in 0..n {
                for i in 0..n {
                    for perm in KUHN_PERMUTATIONS {
                        let mut g = [i, j, k];
                        let mut tet = [vid(g), 0, 0, 0];
                        for (s, axis) in perm.iter().enumerate() {
                            g[*axis] += 1;
                            tet[s + 1] = vid(g);
                        }
                        if permutation_sign(perm) < 0 {
                            tet.swap(2, 3);
                        }
                        cells.push(tet);
                    }
                }
            }
        }
        Self::from_parts(3, n, vertices, grid, cells)
    }

    fn from_parts(
        dim: usize,
        n: usize,
        vertices: Vec<[f64; 3]>,
        grid: Vec<[usize; 3]>,
        cells: Vec<[usize; 4]>,
    ) -> Self {
        let nc = cells.len();
        let local_edges: &[[usize; 2]] = if dim == 2 {
            &LOCAL_EDGES_2D
        } else {
            &LOCAL_EDGES_3D
        };

        let mut edge_index: HashMap<[usize; 2], usize> = HashMap::new();
        let mut edges = Vec::new();
        let mut cell_edges = vec![[usize::MAX; 6]; nc];
        let mut cell_edge_signs = vec![[0i8; 6]; nc];
        for (c, cell) in cells.iter().enumerate() {
            for (le, [a, b]) in local_edges.iter().enumerate() {
                let (ga, gb) = (cell[*a], cell[*b]);
                let key = if ga < gb { [ga, gb] } else { [gb, ga] };
                let id = *edge_index.entry(key).or_insert_with(|| {
                    edges.push(key);
                    edges.len() - 1
                });
                cell_edges[c][le] = id;
                cell_edge_signs[c][le] = if ga < gb { 1 } else { -1 };
            }
        }

        let mut faces = Vec::new();
        let mut face_edges = Vec::new();
        let mut face_edge_signs = Vec::new();
        if dim == 3 {
            let mut face_index: HashMap<[usize; 3], usize> = HashMap::new();
            for cell in &cells {
                for skip in 0..4 {
                    let mut f = [0usize; 3];
                    let mut m = 0;
                    for (lv, v) in cell.iter().enumerate() {
                        if lv != skip {
                            f[m] = *v;
                            m += 1;
                        }
                    }
                    f.sort_unstable();
                    face_index.entry(f).or_insert_with(|| {
                        faces.push(f);
                        faces.len() - 1
                    });
                }
            }
            for f in &faces {
                let e = |a: usize, b: usize| edge_index[&[a, b]];
                // boundary of [a,b,c] = [a,b] + [b,c] - [a,c]
                face_edges.push([e(f[0], f[1]), e(f[1], f[2]), e(f[0], f[2])]);
                face_edge_signs.push([1, 1, -1]);
            }
        }

        let mut mesh = SimplicialMesh {
            dim,
            n,
            vertices,
            grid,
            cells,
            edges,
            faces,
            volumes: Vec::new(),
            cell_edges,
            cell_edge_signs,
            cell_facets: vec![[usize::MAX; 4]; nc],
            cell_facet_signs: vec![[0; 4]; nc],
            face_edges,
            face_edge_signs,
            facet_cell_count: Vec::new(),
            boundary_vertex: Vec::new(),
            boundary_edge: Vec::new(),
            boundary_face: Vec::new(),
        };
        mesh.volumes = (0..nc).map(|c| mesh.signed_volume(c)).collect();
        mesh.build_facets(&edge_index);
        mesh.build_boundary();
        mesh
    }

    fn build_facets(&mut self, edge_index: &HashMap<[usize; 2], usize>) {
        let face_index: HashMap<[usize; 3], usize> = self
            .faces
            .iter()
            .enumerate()
            .map(|(i, f)| (*f, i))
            .collect();
        let nf = self.n_facets();
        let mut count = vec![0u8; nf];
        for c in 0..self.cells.len() {
            let cell = self.cell(c).to_vec();
            for skip in 0..=self.dim {
                let mut verts: Vec<usize> = (0..=self.dim)
                    .filter(|lv| *lv != skip)
                    .map(|lv| cell[lv])
                    .collect();
                verts.sort_unstable();
                let id = if self.dim == 2 {
                    edge_index[&[verts[0], verts[1]]]
                } else {
                    face_index[&[verts[0], verts[1], verts[2]]]
                };
                let normal = self.canonical_facet_normal(&verts);
                let x0 = self.vertices[verts[0]];
                let xo = self.vertices[cell[skip]];
                let outward: f64 = (0..3).map(|k| normal[k] * (x0[k] - xo[k])).sum();
                self.cell_facets[c][skip] = id;
                self.cell_facet_signs[c][skip] = if outward > 0.0 { 1 } else { -1 };
                count[id] += 1;
            }
        }
        self.facet_cell_count = count;
    }

    /// Unnormalised normal of a facet given by ascending vertex indices. In 2D
    /// the edge tangent `t = x_b - x_a` is rotated clockwise, `n = (t_y, -t_x)`;
    /// in 3D `n = (x_b - x_a) x (x_c - x_a)`.
    pub fn canonical_facet_normal(&self, verts: &[usize]) -> [f64; 3] {
        let xa = self.vertices[verts[0]];
        let xb = self.vertices[verts[1]];
        let t = sub(xb, xa);
        if self.dim == 2 {
            [t[1], -t[0], 0.0]
        } else {
            let xc = self.vertices[verts[2]];
            cross(t, sub(xc, xa))
        }
    }

    fn build_boundary(&mut self) {
        let n = self.n;
        let dim = self.dim;
        let on_plane = |g: &[usize; 3], axis: usize, value: usize| g[axis] == value;
        let all_on_common_plane = |verts: &[usize], grid: &[[usize; 3]]| {
            (0..dim).any(|axis| {
                [0, n]
                    .iter()
                    .any(|val| verts.iter().all(|v| on_plane(&grid[*v], axis, *val)))
            })
        };
        self.boundary_vertex = (0..self.vertices.len())
            .map(|v| all_on_common_plane(&[v], &self.grid))
            .collect();
        self.boundary_edge = self
            .edges
            .iter()
            .map(|e| all_on_common_plane(e, &self.grid))
            .collect();
        self.boundary_face = self
            .faces
            .iter()
            .map(|f| all_on_common_plane(f, &self.grid))
            .collect();
    }

    fn signed_volume(&self, c: usize) -> f64 {
        let cell = self.cell(c);
        let x0 = self.vertices[cell[0]];
        let a = sub(self.vertices[cell[1]], x0);
        let b = sub(self.vertices[cell[2]], x0);
        if self.dim == 2 {
            0.5 * (a[0] * b[1] - a[1] * b[0])
        } else {
            let cc = sub(self.vertices[cell[3]], x0);
            dot(a, cross(b, cc)) / 6.0
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
    /// Cells per box edge.
    pub fn resolution(&self) -> usize {
        self.n
    }
    pub fn h(&self) -> f64 {
        1.0 / self.n as f64
    }
    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }
    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }
    pub fn n_faces(&self) -> usize {
        self.faces.len()
    }
    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }
    /// Number of codimension-one entities (edges in 2D, faces in 3D).
    pub fn n_facets(&self) -> usize {
        if self.dim == 2 {
            self.edges.len()
        } else {
            self.faces.len()
        }
    }
    pub fn vertex(&self, v: usize) -> [f64; 3] {
        self.vertices[v]
    }
    pub fn vertices(&self) -> &[[f64; 3]] {
        &self.vertices
    }
    /// Integer grid coordinates `(i, j, k)` of a vertex; `x = i / n`.
    pub fn grid_index(&self, v: usize) -> [usize; 3] {
        self.grid[v]
    }
    pub fn cell(&self, c: usize) -> &[usize] {
        &self.cells[c][..=self.dim]
    }
    pub fn edge(&self, e: usize) -> [usize; 2] {
        self.edges[e]
    }
    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }
    pub fn face(&self, f: usize) -> [usize; 3] {
        self.faces[f]
    }
    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }
    /// Vertex indices (ascending) of a facet.
    pub fn facet_vertices(&self, f: usize) -> Vec<usize> {
        if self.dim == 2 {
            self.edges[f].to_vec()
        } else {
            self.faces[f].to_vec()
        }
    }
    pub fn volume(&self, c: usize) -> f64 {
        self.volumes[c]
    }
    pub fn volumes(&self) -> &[f64] {
        &self.volumes
    }
    pub fn local_edges(&self) -> &'static [[usize; 2]] {
        if self.dim == 2 {
            &LOCAL_EDGES_2D
        } else {
            &LOCAL_EDGES_3D
        }
    }
    /// Global edges of a cell in local-edge order.
    pub fn cell_edges(&self, c: usize) -> &[usize] {
        &self.cell_edges[c][..self.local_edges().len()]
    }
    /// `+1` when the local edge direction (lower to higher local index)
    /// agrees with the canonical global direction.
    pub fn cell_edge_signs(&self, c: usize) -> &[i8] {
        &self.cell_edge_signs[c][..self.local_edges().len()]
    }
    /// Facets of a cell; entry `k` is opposite local vertex `k`.
    pub fn cell_facets(&self, c: usize) -> &[usize] {
        &self.cell_facets[c][..=self.dim]
    }
    /// `+1` when the canonical facet normal points out of the cell.
    pub fn cell_facet_signs(&self, c: usize) -> &[i8] {
        &self.cell_facet_signs[c][..=self.dim]
    }
    pub fn face_edges(&self, f: usize) -> [usize; 3] {
        self.face_edges[f]
    }
    pub fn face_edge_signs(&self, f: usize) -> [i8; 3] {
        self.face_edge_signs[f]
    }
    /// Number of cells sharing a facet (1 on the boundary, 2 inside).
    pub fn facet_cell_count(&self, f: usize) -> usize {
        self.facet_cell_count[f] as usize
    }
    pub fn is_boundary_vertex(&self, v: usize) -> bool {
        self.boundary_vertex[v]
    }
    pub fn is_boundary_edge(&self, e: usize) -> bool {
        self.boundary_edge[e]
    }
    pub fn is_boundary_face(&self, f: usize) -> bool {
        self.boundary_face[f]
    }
    pub fn is_boundary_facet(&self, f: usize) -> bool {
        if self.dim == 2 {
            self.boundary_edge[f]
        } else {
            self.boundary_face[f]
        }
    }

    /// `V - E + F (- T)`; equals 1 for the meshed box.
    pub fn euler_characteristic(&self) -> i64 {
        let v = self.n_vertices() as i64;
        let e = self.n_edges() as i64;
        if self.dim == 2 {
            v - e + self.n_cells() as i64
        } else {
            v - e + self.n_faces() as i64 - self.n_cells() as i64
        }
    }

    pub fn centroid(&self, c: usize) -> [f64; 3] {
        let cell = self.cell(c);
        let mut x = [0.0; 3];
        for v in cell {
            for k in 0..3 {
                x[k] += self.vertices[*v][k];
            }
        }
        x.map(|xi| xi / cell.len() as f64)
    }

    /// Physical point of barycentric coordinates `lambda` in cell `c`.
    pub fn point(&self, c: usize, lambda: &[f64]) -> [f64; 3] {
        let mut x = [0.0; 3];
        for (v, l) in self.cell(c).iter().zip(lambda) {
            for k in 0..3 {
                x[k] += l * self.vertices[*v][k];
            }
        }
        x
    }

    /// Gradients of the barycentric coordinates of cell `c` (constant per cell).
    pub fn barycentric_gradients(&self, c: usize) -> [[f64; 3]; 4] {
        let cell = self.cell(c);
        let x0 = self.vertices[cell[0]];
        let mut g = [[0.0; 3]; 4];
        if self.dim == 2 {
            let a = sub(self.vertices[cell[1]], x0);
            let b = sub(self.vertices[cell[2]], x0);
            let det = a[0] * b[1] - a[1] * b[0];
            // rows of the inverse Jacobian
            g[1] = [b[1] / det, -b[0] / det, 0.0];
            g[2] = [-a[1] / det, a[0] / det, 0.0];
            g[0] = [-g[1][0] - g[2][0], -g[1][1] - g[2][1], 0.0];
        } else {
            let a = sub(self.vertices[cell[1]], x0);
            let b = sub(self.vertices[cell[2]], x0);
            let cc = sub(self.vertices[cell[3]], x0);
            let det = dot(a, cross(b, cc));
            g[1] = cross(b, cc).map(|v| v / det);
            g[2] = cross(cc, a).map(|v| v / det);
            g[3] = cross(a, b).map(|v| v / det);
            for k in 0..3 {
                g[0][k] = -g[1][k] - g[2][k] - g[3][k];
            }
        }
        g
    }

    /// Barycentric coordinates of `x` with respect to cell `c`.
    pub fn barycentric(&self, c: usize, x: [f64; 3]) -> [f64; 4] {
        let g = self.barycentric_gradients(c);
        let cell = self.cell(c);
        let x0 = self.vertices[cell[0]];
        let d = sub(x, x0);
        let mut lam = [0.0; 4];
        let mut s = 0.0;
        for i in 1..=self.dim {
            lam[i] = dot(g[i], d);
            s += lam[i];
        }
        lam[0] = 1.0 - s;
        lam
    }

    /// Locates the cell containing `x` through the structured grid index map.
    /// Returns the cell and barycentric coordinates; points on shared
    /// sub-simplices resolve to the candidate with the largest minimum
    /// barycentric coordinate.
    pub fn locate(&self, x: [f64; 3]) -> (usize, [f64; 4]) {
        let n = self.n;
        let idx = |v: f64| ((v * n as f64).floor().max(0.0) as usize).min(n - 1);
        let per_block = if self.dim == 2 { 2 } else { 6 };
        let block = if self.dim == 2 {
            idx(x[0]) + n * idx(x[1])
        } else {
            idx(x[0]) + n * (idx(x[1]) + n * idx(x[2]))
        };
        let mut best = (usize::MAX, [0.0; 4], f64::NEG_INFINITY);
        for c in block * per_block..(block + 1) * per_block {
            let lam = self.barycentric(c, x);
            let m = lam[..=self.dim]
                .iter()
                .cloned()
                .fold(f64::INFINITY, f64::min);
            if m > best.2 {
                best = (c, lam, m);
            }
        }
        (best.0, best.1)
    }
}

pub(crate) fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub(crate) fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}
