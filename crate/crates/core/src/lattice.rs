//! L×L square torus with qudits on oriented edges.
//!
//! Vertex `(x, y)` has id `y * L + x`. Horizontal edge `(x, y)` joins
//! `(x, y)` and `(x + 1, y)` and has id `y * L + x`; vertical edge `(x, y)`
//! joins `(x, y)` and `(x, y + 1)` and has id `L² + y * L + x`. With the
//! default orientation every edge points along +x or +y. At `L = 2` the
//! graph is a multigraph: each neighbouring vertex pair is joined by two
//! parallel edges.

use crate::error::{Error, Result};

pub type VertexId = usize;
pub type EdgeId = usize;
pub type PlaquetteId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    Horizontal,
    Vertical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edge {
    pub tail: VertexId,
    pub head: VertexId,
    pub axis: Axis,
}

/// One edge of a plaquette or star together with its sign.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SignedEdge {
    pub edge: EdgeId,
    pub sign: i32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lattice {
    l: usize,
    edges: Vec<Edge>,
    plaquettes: Vec<[SignedEdge; 4]>,
    stars: Vec<[SignedEdge; 4]>,
}

impl Lattice {
    /// Build the torus with every edge oriented along +x or +y.
    pub fn new(l: usize) -> Result<Self> {
        Self::with_flips(l, &vec![false; 2 * l * l])
    }

    /// Build the torus, reversing the orientation of every edge whose flag
    /// is set. Signs of plaquettes and stars follow the orientation.
    pub fn with_flips(l: usize, flips: &[bool]) -> Result<Self> {
        if l < 2 {
            return Err(Error::InvalidSize(l));
        }
        let v = l * l;
        if flips.len() != 2 * v {
            return Err(Error::Domain(format!(
                "orientation flags: expected {} entries, got {}",
                2 * v,
                flips.len()
            )));
        }
        let vid = |x: usize, y: usize| (y % l) * l + (x % l);

        let mut edges = Vec::with_capacity(2 * v);
        for y in 0..l {
            for x in 0..l {
                edges.push((vid(x, y), vid(x + 1, y), Axis::Horizontal));
            }
        }
        for y in 0..l {
            for x in 0..l {
                edges.push((vid(x, y), vid(x, y + 1), Axis::Vertical));
            }
        }
        let edges: Vec<Edge> = edges
            .into_iter()
            .zip(flips)
            .map(|((a, b, axis), &flip)| {
                let (tail, head) = if flip { (b, a) } else { (a, b) };
                Edge { tail, head, axis }
            })
            .collect();

        let h = |x: usize, y: usize| vid(x, y);
        let vert = |x: usize, y: usize| v + vid(x, y);

        // Walk each plaquette from its bottom-left corner: bottom edge +x,
        // right edge +y, top edge -x, left edge -y. An edge gets +1 when its
        // tail is the corner the walk leaves from.
        let mut plaquettes = Vec::with_capacity(v);
        for y in 0..l {
            for x in 0..l {
                let walk = [
                    (h(x, y), vid(x, y)),
                    (vert(x + 1, y), vid(x + 1, y)),
                    (h(x, y + 1), vid(x + 1, y + 1)),
                    (vert(x, y), vid(x, y + 1)),
                ];
                plaquettes.push(walk.map(|(e, from)| SignedEdge {
                    edge: e,
                    sign: if edges[e].tail == from { 1 } else { -1 },
                }));
            }
        }

        // Star order: east, north, west, south. +1 for outgoing edges.
        let mut stars = Vec::with_capacity(v);
        for y in 0..l {
            for x in 0..l {
                let here = vid(x, y);
                let around = [h(x, y), vert(x, y), h(x + l - 1, y), vert(x, y + l - 1)];
                stars.push(around.map(|e| SignedEdge {
                    edge: e,
                    sign: if edges[e].tail == here { 1 } else { -1 },
                }));
            }
        }

        Ok(Self {
            l,
            edges,
            plaquettes,
            stars,
        })
    }

    pub fn size(&self) -> usize {
        self.l
    }

    pub fn num_vertices(&self) -> usize {
        self.l * self.l
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn num_plaquettes(&self) -> usize {
        self.plaquettes.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, e: EdgeId) -> Result<Edge> {
        self.edges.get(e).copied().ok_or(Error::Index {
            kind: "edge",
            index: e,
            len: self.edges.len(),
        })
    }

    /// The four edges of plaquette `p` with their circulation signs.
    pub fn plaquette_signs(&self, p: PlaquetteId) -> Result<&[SignedEdge; 4]> {
        self.plaquettes.get(p).ok_or(Error::Index {
            kind: "plaquette",
            index: p,
            len: self.plaquettes.len(),
        })
    }

    /// The four edges meeting at vertex `v`: +1 outgoing, -1 incoming.
    pub fn vertex_signs(&self, v: VertexId) -> Result<&[SignedEdge; 4]> {
        self.stars.get(v).ok_or(Error::Index {
            kind: "vertex",
            index: v,
            len: self.stars.len(),
        })
    }

    pub fn plaquettes(&self) -> &[[SignedEdge; 4]] {
        &self.plaquettes
    }

    pub fn stars(&self) -> &[[SignedEdge; 4]] {
        &self.stars
    }

    pub fn coords(&self, v: VertexId) -> (usize, usize) {
        (v % self.l, v / self.l)
    }

    pub fn vertex_at(&self, x: usize, y: usize) -> VertexId {
        (y % self.l) * self.l + (x % self.l)
    }

    /// Edge leaving `(x, y)` in the given axis direction, independent of
    /// the edge's orientation.
    pub fn edge_from(&self, v: VertexId, axis: Axis) -> EdgeId {
        match axis {
            Axis::Horizontal => v,
            Axis::Vertical => self.num_vertices() + v,
        }
    }

    /// Torus distance between two vertices along each axis.
    pub fn separation(&self, a: VertexId, b: VertexId) -> (usize, usize) {
        let (xa, ya) = self.coords(a);
        let (xb, yb) = self.coords(b);
        let dx = (xb + self.l - xa) % self.l;
        let dy = (yb + self.l - ya) % self.l;
        (dx.min(self.l - dx), dy.min(self.l - dy))
    }

    /// Shortest staircase path from `k` to `l`: all x steps first, then y.
    pub fn axis_path(&self, k: VertexId, l: VertexId) -> Result<OrientedPath> {
        self.check_vertex(k)?;
        self.check_vertex(l)?;
        if k == l {
            return Err(Error::DegeneratePath(k));
        }
        let (xk, yk) = self.coords(k);
        let (xl, yl) = self.coords(l);
        let n = self.l as i64;
        let shortest = |from: usize, to: usize| -> i64 {
            let fwd = (to as i64 - from as i64).rem_euclid(n);
            if fwd <= n / 2 {
                fwd
            } else {
                fwd - n
            }
        };
        let mut moves = Vec::new();
        push_moves(&mut moves, Axis::Horizontal, shortest(xk, xl));
        push_moves(&mut moves, Axis::Vertical, shortest(yk, yl));
        self.path_from_moves(k, &moves)
    }

    /// A path from `k` to `l` that winds the other way around the torus in
    /// x (or all the way around, if `k` and `l` share a column), so that it
    /// differs from [`Lattice::axis_path`] by a non-contractible cycle.
    pub fn winding_path(&self, k: VertexId, l: VertexId) -> Result<OrientedPath> {
        self.check_vertex(k)?;
        self.check_vertex(l)?;
        if k == l {
            return Err(Error::DegeneratePath(k));
        }
        let short = self.axis_path(k, l)?;
        let n = self.l as i64;
        let dx: i64 = short
            .moves()
            .iter()
            .filter(|m| m.axis == Axis::Horizontal)
            .map(|m| m.step as i64)
            .sum();
        let dy: i64 = short
            .moves()
            .iter()
            .filter(|m| m.axis == Axis::Vertical)
            .map(|m| m.step as i64)
            .sum();
        let long_dx = if dx > 0 {
            dx - n
        } else if dx < 0 {
            dx + n
        } else {
            n
        };
        let mut moves = Vec::new();
        push_moves(&mut moves, Axis::Horizontal, long_dx);
        push_moves(&mut moves, Axis::Vertical, dy);
        self.path_from_moves(k, &moves)
    }

    /// Build a path from a start vertex and a sequence of unit moves.
    pub fn path_from_moves(&self, start: VertexId, moves: &[Move]) -> Result<OrientedPath> {
        self.check_vertex(start)?;
        let n = self.l;
        let mut at = start;
        let mut steps = Vec::with_capacity(moves.len());
        for m in moves {
            let (x, y) = self.coords(at);
            let (next, e) = match (m.axis, m.step) {
                (Axis::Horizontal, 1) => (self.vertex_at(x + 1, y), self.edge_from(at, Axis::Horizontal)),
                (Axis::Horizontal, -1) => {
                    let w = self.vertex_at(x + n - 1, y);
                    (w, self.edge_from(w, Axis::Horizontal))
                }
                (Axis::Vertical, 1) => (self.vertex_at(x, y + 1), self.edge_from(at, Axis::Vertical)),
                (Axis::Vertical, -1) => {
                    let s = self.vertex_at(x, y + n - 1);
                    (s, self.edge_from(s, Axis::Vertical))
                }
                _ => return Err(Error::Domain(format!("move step must be ±1, got {}", m.step))),
            };
            let edge = self.edges[e];
            let tau = if edge.tail == at && edge.head == next {
                1
            } else {
                -1
            };
            steps.push(PathStep { edge: e, tau });
            at = next;
        }
        Ok(OrientedPath {
            start,
            end: at,
            steps,
            moves: moves.to_vec(),
        })
    }

    /// Signed vertex boundary of a chain given as per-edge integer
    /// coefficients: each edge contributes `+c` at its tail, `-c` at its head.
    pub fn chain_boundary(&self, chain: &[i64]) -> Vec<i64> {
        let mut b = vec![0i64; self.num_vertices()];
        for (e, &c) in chain.iter().enumerate() {
            b[self.edges[e].tail] += c;
            b[self.edges[e].head] -= c;
        }
        b
    }

    fn check_vertex(&self, v: VertexId) -> Result<()> {
        if v < self.num_vertices() {
            Ok(())
        } else {
            Err(Error::Index {
                kind: "vertex",
                index: v,
                len: self.num_vertices(),
            })
        }
    }
}

fn push_moves(moves: &mut Vec<Move>, axis: Axis, signed_count: i64) {
    let step = signed_count.signum() as i32;
    for _ in 0..signed_count.unsigned_abs() {
        moves.push(Move { axis, step });
    }
}

/// A unit move on the torus along an axis, `step` is +1 or -1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Move {
    pub axis: Axis,
    pub step: i32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PathStep {
    pub edge: EdgeId,
    /// +1 when the path runs tail → head.
    pub tau: i32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrientedPath {
    start: VertexId,
    end: VertexId,
    steps: Vec<PathStep>,
    moves: Vec<Move>,
}

impl OrientedPath {
    pub fn start(&self) -> VertexId {
        self.start
    }

    pub fn end(&self) -> VertexId {
        self.end
    }

    pub fn steps(&self) -> &[PathStep] {
        &self.steps
    }

    pub fn moves(&self) -> &[Move] {
        &self.moves
    }

    pub fn is_closed(&self) -> bool {
        self.start == self.end
    }

    /// Per-edge signed coefficients of this path as a 1-chain.
    pub fn chain(&self, num_edges: usize) -> Vec<i64> {
        let mut c = vec![0i64; num_edges];
        for s in &self.steps {
            c[s.edge] += s.tau as i64;
        }
        c
    }

    /// Compact textual form such as `+x+x-y`, used in reports.
    pub fn describe(&self) -> String {
        self.moves
            .iter()
            .map(|m| {
                let s = if m.step > 0 { '+' } else { '-' };
                let a = match m.axis {
                    Axis::Horizontal => 'x',
                    Axis::Vertical => 'y',
                };
                format!("{s}{a}")
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check_invariants(lat: &Lattice) {
        let n = lat.num_edges();
        let mut in_plaq = vec![0; n];
        let mut in_star = vec![0; n];
        for p in lat.plaquettes() {
            let mut ids: Vec<_> = p.iter().map(|s| s.edge).collect();
            ids.sort();
            ids.dedup();
            assert_eq!(ids.len(), 4);
            for s in p {
                in_plaq[s.edge] += 1;
            }
        }
        for st in lat.stars() {
            let mut ids: Vec<_> = st.iter().map(|s| s.edge).collect();
            ids.sort();
            ids.dedup();
            assert_eq!(ids.len(), 4);
            for s in st {
                in_star[s.edge] += 1;
            }
        }
        assert!(in_plaq.iter().all(|&c| c == 2));
        assert!(in_star.iter().all(|&c| c == 2));
        for e in lat.edges() {
            assert_ne!(e.tail, e.head);
        }
    }

    #[test]
    fn sizes() {
        let l2 = Lattice::new(2).unwrap();
        assert_eq!((l2.num_vertices(), l2.num_edges(), l2.num_plaquettes()), (4, 8, 4));
        let l3 = Lattice::new(3).unwrap();
        assert_eq!((l3.num_vertices(), l3.num_edges(), l3.num_plaquettes()), (9, 18, 9));
        assert_eq!(Lattice::new(1).unwrap_err(), Error::InvalidSize(1));
        assert_eq!(Lattice::new(0).unwrap_err(), Error::InvalidSize(0));
    }

    #[test]
    fn invariants_exhaustive_small_sizes() {
        for l in 2..=8 {
            check_invariants(&Lattice::new(l).unwrap());
        }
    }

    #[test]
    fn default_plaquette_signs() {
        let lat = Lattice::new(3).unwrap();
        for p in 0..lat.num_plaquettes() {
            let s: Vec<i32> = lat.plaquette_signs(p).unwrap().iter().map(|s| s.sign).collect();
            assert_eq!(s, vec![1, 1, -1, -1]);
        }
        assert!(matches!(lat.plaquette_signs(9), Err(Error::Index { .. })));
    }

    #[test]
    fn default_vertex_signs() {
        let lat = Lattice::new(4).unwrap();
        for v in 0..lat.num_vertices() {
            let s: Vec<i32> = lat.vertex_signs(v).unwrap().iter().map(|s| s.sign).collect();
            assert_eq!(s, vec![1, 1, -1, -1]);
        }
        for (e, edge) in lat.edges().iter().enumerate() {
            let from_tail = lat.vertex_signs(edge.tail).unwrap().iter().find(|s| s.edge == e).unwrap();
            let from_head = lat.vertex_signs(edge.head).unwrap().iter().find(|s| s.edge == e).unwrap();
            assert_eq!((from_tail.sign, from_head.sign), (1, -1));
        }
        assert!(lat.vertex_signs(16).is_err());
    }

    #[test]
    fn plaquette_and_star_chains_close_on_torus() {
        for l in 2..=5 {
            let lat = Lattice::new(l).unwrap();
            let mut total = vec![0i64; lat.num_edges()];
            let mut plus = vec![0; lat.num_edges()];
            for p in lat.plaquettes() {
                for s in p {
                    total[s.edge] += s.sign as i64;
                    if s.sign > 0 {
                        plus[s.edge] += 1;
                    }
                }
            }
            assert!(total.iter().all(|&c| c == 0));
            assert!(plus.iter().all(|&c| c == 1));
            let mut total = vec![0i64; lat.num_edges()];
            for st in lat.stars() {
                for s in st {
                    total[s.edge] += s.sign as i64;
                }
            }
            assert!(total.iter().all(|&c| c == 0));
        }
    }

    #[test]
    fn gradients_satisfy_plaquette_constraints() {
        let lat = Lattice::new(4).unwrap();
        let m: Vec<i64> = (0..16).map(|i| (i * 7 + 3) % 11).collect();
        for p in lat.plaquettes() {
            let sum: i64 = p
                .iter()
                .map(|s| {
                    let e = lat.edges()[s.edge];
                    s.sign as i64 * (m[e.head] - m[e.tail])
                })
                .sum();
            assert_eq!(sum, 0);
        }
    }

    #[test]
    fn axis_path_examples() {
        let lat = Lattice::new(4).unwrap();
        let p = lat.axis_path(0, 1).unwrap();
        assert_eq!(p.steps().len(), 1);
        assert_eq!(p.steps()[0].tau, 1);
        let back = lat.axis_path(1, 0).unwrap();
        assert_eq!(back.steps()[0].tau, -1);
        let two = lat.axis_path(0, 2).unwrap();
        assert_eq!(two.steps().len(), 2);
        assert!(two.moves().iter().all(|m| m.axis == Axis::Horizontal));
        assert_eq!(lat.axis_path(3, 3).unwrap_err(), Error::DegeneratePath(3));
    }

    #[test]
    fn winding_path_differs_by_a_cycle() {
        let lat = Lattice::new(2).unwrap();
        let a = lat.axis_path(0, 1).unwrap();
        let b = lat.winding_path(0, 1).unwrap();
        assert_eq!(b.end(), 1);
        assert_ne!(a.steps()[0].edge, b.steps()[0].edge);
        let c = lat.winding_path(0, 2).unwrap();
        assert_eq!(c.end(), 2);
        assert_eq!(c.steps().len(), 3);
    }
}
