//! Combinatorics of ideal (truncated) triangulations.
//!
//! A triangulation is a finite set of tetrahedra whose faces are glued in
//! pairs. Local conventions used everywhere in this crate:
//!
//! * vertices of a tetrahedron are `0..4`;
//! * face `f` is the face opposite vertex `f`;
//! * local edge `e` in `0..6` joins the vertex pair [`EDGE_VERTICES`]`[e]`,
//!   i.e. `01, 02, 03, 12, 13, 23`. Opposite edges are `(0,5)`, `(1,4)`, `(2,3)`.
//!
//! A face pairing `(t, f) -> (t', f', σ)` sends vertex `a != f` of tetrahedron
//! `t` to vertex `σ(a)` of tetrahedron `t'`, hence edge `{a, b}` of face `f`
//! to edge `{σa, σb}` of face `f'`.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Vertex pair of each local edge.
pub const EDGE_VERTICES: [[usize; 2]; 6] = [[0, 1], [0, 2], [0, 3], [1, 2], [1, 3], [2, 3]];

/// Local edge opposite to each local edge.
pub const OPPOSITE_EDGE: [usize; 6] = [5, 4, 3, 2, 1, 0];

/// Local edge index joining two distinct vertices.
pub fn edge_between(a: usize, b: usize) -> usize {
    debug_assert!(a != b && a < 4 && b < 4);
    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
    match (lo, hi) {
        (0, 1) => 0,
        (0, 2) => 1,
        (0, 3) => 2,
        (1, 2) => 3,
        (1, 3) => 4,
        _ => 5,
    }
}

/// A permutation of the four vertices, stored as its image list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Perm(pub [usize; 4]);

impl Perm {
    pub const IDENTITY: Perm = Perm([0, 1, 2, 3]);

    pub fn apply(&self, v: usize) -> usize {
        self.0[v]
    }

    pub fn is_valid(&self) -> bool {
        let mut seen = [false; 4];
        for &v in &self.0 {
            if v >= 4 || seen[v] {
                return false;
            }
            seen[v] = true;
        }
        true
    }

    pub fn inverse(&self) -> Perm {
        let mut inv = [0; 4];
        for (i, &v) in self.0.iter().enumerate() {
            inv[v] = i;
        }
        Perm(inv)
    }

    /// `self ∘ other`: first `other`, then `self`.
    pub fn compose(&self, other: &Perm) -> Perm {
        Perm([
            self.0[other.0[0]],
            self.0[other.0[1]],
            self.0[other.0[2]],
            self.0[other.0[3]],
        ])
    }

    pub fn is_even(&self) -> bool {
        let mut inversions = 0;
        for i in 0..4 {
            for j in i + 1..4 {
                if self.0[i] > self.0[j] {
                    inversions += 1;
                }
            }
        }
        inversions % 2 == 0
    }

    /// All 24 permutations in lexicographic order.
    pub fn all() -> Vec<Perm> {
        let mut out = Vec::with_capacity(24);
        for a in 0..4 {
            for b in 0..4 {
                for c in 0..4 {
                    for d in 0..4 {
                        let p = Perm([a, b, c, d]);
                        if p.is_valid() {
                            out.push(p);
                        }
                    }
                }
            }
        }
        out
    }
}

/// Gluing of one face onto another.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FacePairing {
    pub tet: usize,
    pub face: usize,
    pub target_tet: usize,
    pub target_face: usize,
    pub perm: Perm,
}

/// On-disk layout: `{"tet_count": N, "pairings": [[t, f, t2, f2, [s0,s1,s2,s3]], ...]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GluingFile {
    pub tet_count: usize,
    pub pairings: Vec<(usize, usize, usize, usize, [usize; 4])>,
}

/// Face pairings of `tet_count` tetrahedra, one entry per `(tet, face)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GluingSpec {
    tet_count: usize,
    /// Indexed by `4 * tet + face`.
    pairings: Vec<FacePairing>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TriangulationError {
    #[error("triangulation has no tetrahedra")]
    Empty,
    #[error("pairing entry {index} refers to tetrahedron/face out of range")]
    OutOfRange { index: usize },
    #[error("face ({tet}, {face}) is paired more than once")]
    DuplicatePairing { tet: usize, face: usize },
    #[error("face ({tet}, {face}) is unpaired")]
    UnpairedFace { tet: usize, face: usize },
    #[error("pairing of face ({tet}, {face}) is not a permutation of 0..4 sending face {face} to its target face")]
    BadPermutation { tet: usize, face: usize },
    #[error("face ({tet}, {face}) is glued to itself")]
    SelfGluedFace { tet: usize, face: usize },
    #[error("pairing is not involutive at face ({tet}, {face})")]
    NotInvolutive { tet: usize, face: usize },
    #[error("gluing is non-orientable")]
    NonOrientable,
    #[error("edge class containing corner ({tet}, {edge}) is identified with itself in reverse")]
    ReversedEdge { tet: usize, edge: usize },
    #[error("boundary Euler characteristic >= 0: link of vertex class {vertex_class} has chi = {chi}")]
    NonNegativeBoundaryEuler { vertex_class: usize, chi: i64 },
}

impl TriangulationError {
    /// True when the gluing is a valid manifold but violates the
    /// negative-Euler-characteristic boundary hypothesis.
    pub fn is_boundary_hypothesis(&self) -> bool {
        matches!(self, TriangulationError::NonNegativeBoundaryEuler { .. })
    }
}

impl GluingSpec {
    /// Validates ranges, completeness, permutations and involutivity.
    pub fn new(tet_count: usize, pairings: Vec<FacePairing>) -> Result<Self, TriangulationError> {
        if tet_count == 0 {
            return Err(TriangulationError::Empty);
        }
        let mut slots: Vec<Option<FacePairing>> = vec![None; 4 * tet_count];
        for (index, p) in pairings.iter().enumerate() {
            if p.tet >= tet_count || p.target_tet >= tet_count || p.face >= 4 || p.target_face >= 4 {
                return Err(TriangulationError::OutOfRange { index });
            }
            let slot = &mut slots[4 * p.tet + p.face];
            if slot.is_some() {
                return Err(TriangulationError::DuplicatePairing { tet: p.tet, face: p.face });
            }
            *slot = Some(*p);
        }
        let mut ordered = Vec::with_capacity(4 * tet_count);
        for (i, slot) in slots.into_iter().enumerate() {
            match slot {
                Some(p) => ordered.push(p),
                None => {
                    return Err(TriangulationError::UnpairedFace { tet: i / 4, face: i % 4 })
                }
            }
        }
        for p in &ordered {
            if !p.perm.is_valid() || p.perm.apply(p.face) != p.target_face {
                return Err(TriangulationError::BadPermutation { tet: p.tet, face: p.face });
            }
            if p.tet == p.target_tet && p.face == p.target_face {
                return Err(TriangulationError::SelfGluedFace { tet: p.tet, face: p.face });
            }
            let back = &ordered[4 * p.target_tet + p.target_face];
            if back.target_tet != p.tet || back.target_face != p.face || back.perm != p.perm.inverse() {
                return Err(TriangulationError::NotInvolutive { tet: p.tet, face: p.face });
            }
        }
        Ok(GluingSpec { tet_count, pairings: ordered })
    }

    pub fn from_file(file: &GluingFile) -> Result<Self, TriangulationError> {
        let mut pairings = Vec::with_capacity(file.pairings.len());
        for (index, &(t, f, t2, f2, s)) in file.pairings.iter().enumerate() {
            if s.iter().any(|&v| v >= 4) {
                return Err(TriangulationError::OutOfRange { index });
            }
            pairings.push(FacePairing { tet: t, face: f, target_tet: t2, target_face: f2, perm: Perm(s) });
        }
        GluingSpec::new(file.tet_count, pairings)
    }

    pub fn to_file(&self) -> GluingFile {
        GluingFile {
            tet_count: self.tet_count,
            pairings: self
                .pairings
                .iter()
                .map(|p| (p.tet, p.face, p.target_tet, p.target_face, p.perm.0))
                .collect(),
        }
    }

    pub fn tet_count(&self) -> usize {
        self.tet_count
    }

    pub fn pairings(&self) -> &[FacePairing] {
        &self.pairings
    }

    pub fn pairing(&self, tet: usize, face: usize) -> &FacePairing {
        &self.pairings[4 * tet + face]
    }
}

/// One identified edge of the triangulation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeClass {
    pub id: usize,
    /// `(tet, local edge)` pairs, sorted.
    pub corners: Vec<(usize, usize)>,
}

impl EdgeClass {
    pub fn valence(&self) -> usize {
        self.corners.len()
    }
}

/// One identified (truncated) vertex together with its link surface.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VertexClass {
    pub id: usize,
    /// `(tet, local vertex)` pairs, sorted. Each is one truncation triangle.
    pub corners: Vec<(usize, usize)>,
    /// Number of link vertices, i.e. edge-class ends arriving at this vertex.
    pub link_vertices: usize,
}

impl VertexClass {
    pub fn link_euler_characteristic(&self) -> i64 {
        let faces = self.corners.len() as i64;
        let edges = 3 * faces / 2;
        self.link_vertices as i64 - edges + faces
    }
}

/// A glued, orientable triangulation with derived edge and vertex classes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Triangulation {
    spec: GluingSpec,
    edge_classes: Vec<EdgeClass>,
    vertex_classes: Vec<VertexClass>,
    /// `edge_of[t][e]` is the edge class of local edge `e` of tetrahedron `t`.
    edge_of: Vec<[usize; 6]>,
    vertex_of: Vec<[usize; 4]>,
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    fn find(&mut self, mut i: usize) -> usize {
        while self.parent[i] != i {
            self.parent[i] = self.parent[self.parent[i]];
            i = self.parent[i];
        }
        i
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}

/// Groups `0..n` by union-find root, classes ordered by smallest member.
fn classes_of(uf: &mut UnionFind, n: usize) -> (Vec<Vec<usize>>, Vec<usize>) {
    let mut root_to_class = vec![usize::MAX; n];
    let mut classes: Vec<Vec<usize>> = Vec::new();
    let mut class_of = vec![0; n];
    for i in 0..n {
        let r = uf.find(i);
        if root_to_class[r] == usize::MAX {
            root_to_class[r] = classes.len();
            classes.push(Vec::new());
        }
        class_of[i] = root_to_class[r];
        classes[root_to_class[r]].push(i);
    }
    (classes, class_of)
}

fn directed_index(tet: usize, from: usize, to: usize) -> usize {
    16 * tet + 4 * from + to
}

impl Triangulation {
    /// Builds the triangulation and enforces that every boundary component
    /// has negative Euler characteristic.
    pub fn build(spec: GluingSpec) -> Result<Self, TriangulationError> {
        let tri = Self::analyze(spec)?;
        for vc in &tri.vertex_classes {
            let chi = vc.link_euler_characteristic();
            if chi >= 0 {
                return Err(TriangulationError::NonNegativeBoundaryEuler { vertex_class: vc.id, chi });
            }
        }
        Ok(tri)
    }

    /// Builds the combinatorial structure without the boundary hypothesis.
    pub fn analyze(spec: GluingSpec) -> Result<Self, TriangulationError> {
        let n = spec.tet_count();
        check_orientable(&spec)?;

        let mut vertex_uf = UnionFind::new(4 * n);
        // Directed edges (tet, from, to) with from != to; diagonal slots stay singletons.
        let mut directed_uf = UnionFind::new(16 * n);
        for p in spec.pairings() {
            let others: Vec<usize> = (0..4).filter(|&v| v != p.face).collect();
            for &a in &others {
                vertex_uf.union(4 * p.tet + a, 4 * p.target_tet + p.perm.apply(a));
                for &b in &others {
                    if a != b {
                        directed_uf.union(
                            directed_index(p.tet, a, b),
                            directed_index(p.target_tet, p.perm.apply(a), p.perm.apply(b)),
                        );
                    }
                }
            }
        }

        for t in 0..n {
            for (e, &[a, b]) in EDGE_VERTICES.iter().enumerate() {
                if directed_uf.find(directed_index(t, a, b)) == directed_uf.find(directed_index(t, b, a)) {
                    return Err(TriangulationError::ReversedEdge { tet: t, edge: e });
                }
            }
        }

        // Undirected edge classes: union the two orientations' orbits.
        let mut edge_uf = UnionFind::new(6 * n);
        let mut first_corner_of_root = vec![usize::MAX; 16 * n];
        for t in 0..n {
            for (e, &[a, b]) in EDGE_VERTICES.iter().enumerate() {
                for (from, to) in [(a, b), (b, a)] {
                    let root = directed_uf.find(directed_index(t, from, to));
                    let corner = 6 * t + e;
                    if first_corner_of_root[root] == usize::MAX {
                        first_corner_of_root[root] = corner;
                    } else {
                        edge_uf.union(first_corner_of_root[root], corner);
                    }
                }
            }
        }
        let (edge_groups, edge_class_of) = classes_of(&mut edge_uf, 6 * n);
        let edge_classes = edge_groups
            .into_iter()
            .enumerate()
            .map(|(id, members)| EdgeClass {
                id,
                corners: members.into_iter().map(|c| (c / 6, c % 6)).collect(),
            })
            .collect();
        let edge_of = (0..n)
            .map(|t| std::array::from_fn(|e| edge_class_of[6 * t + e]))
            .collect();

        let (vertex_groups, vertex_class_of) = classes_of(&mut vertex_uf, 4 * n);
        let mut link_vertex_roots: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); vertex_groups.len()];
        for t in 0..n {
            for from in 0..4 {
                for to in 0..4 {
                    if from != to {
                        let root = directed_uf.find(directed_index(t, from, to));
                        link_vertex_roots[vertex_class_of[4 * t + from]].insert(root);
                    }
                }
            }
        }
        let vertex_classes = vertex_groups
            .into_iter()
            .enumerate()
            .map(|(id, members)| VertexClass {
                id,
                corners: members.into_iter().map(|c| (c / 4, c % 4)).collect(),
                link_vertices: link_vertex_roots[id].len(),
            })
            .collect();
        let vertex_of = (0..n)
            .map(|t| std::array::from_fn(|v| vertex_class_of[4 * t + v]))
            .collect();

        Ok(Triangulation { spec, edge_classes, vertex_classes, edge_of, vertex_of })
    }

    pub fn spec(&self) -> &GluingSpec {
        &self.spec
    }

    pub fn tet_count(&self) -> usize {
        self.spec.tet_count()
    }

    pub fn edge_classes(&self) -> &[EdgeClass] {
        &self.edge_classes
    }

    pub fn edge_count(&self) -> usize {
        self.edge_classes.len()
    }

    pub fn vertex_classes(&self) -> &[VertexClass] {
        &self.vertex_classes
    }

    /// Edge class of local edge `edge` in tetrahedron `tet`.
    pub fn edge_class_of(&self, tet: usize, edge: usize) -> usize {
        self.edge_of[tet][edge]
    }

    pub fn edge_map(&self, tet: usize) -> &[usize; 6] {
        &self.edge_of[tet]
    }

    pub fn vertex_class_of(&self, tet: usize, vertex: usize) -> usize {
        self.vertex_of[tet][vertex]
    }

    /// Euler characteristic of each boundary component, by vertex class.
    pub fn boundary_euler_characteristics(&self) -> Vec<i64> {
        self.vertex_classes.iter().map(VertexClass::link_euler_characteristic).collect()
    }

    /// Lengths of each tetrahedron's six edges read off an edge-class vector.
    pub fn tet_lengths(&self, tet: usize, class_lengths: &[f64]) -> [f64; 6] {
        let map = &self.edge_of[tet];
        std::array::from_fn(|e| class_lengths[map[e]])
    }
}

fn check_orientable(spec: &GluingSpec) -> Result<(), TriangulationError> {
    let n = spec.tet_count();
    let mut orientation: Vec<Option<bool>> = vec![None; n];
    for start in 0..n {
        if orientation[start].is_some() {
            continue;
        }
        orientation[start] = Some(true);
        let mut stack = vec![start];
        while let Some(t) = stack.pop() {
            let o = orientation[t].expect("visited");
            for f in 0..4 {
                let p = spec.pairing(t, f);
                // Induced orientations agree across the face iff the gluing
                // permutation is odd, since tetrahedra glue with opposite
                // boundary orientations.
                let expected = if p.perm.is_even() { !o } else { o };
                match orientation[p.target_tet] {
                    None => {
                        orientation[p.target_tet] = Some(expected);
                        stack.push(p.target_tet);
                    }
                    Some(existing) if existing != expected => {
                        return Err(TriangulationError::NonOrientable)
                    }
                    Some(_) => {}
                }
            }
        }
    }
    Ok(())
}

impl fmt::Display for Triangulation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} tetrahedra, {} edge classes (valences {:?}), {} vertex classes (chi {:?})",
            self.tet_count(),
            self.edge_count(),
            self.edge_classes.iter().map(EdgeClass::valence).collect::<Vec<_>>(),
            self.vertex_classes.len(),
            self.boundary_euler_characteristics()
        )
    }
}

/// Exhaustively enumerates closed orientable gluings of `tet_count`
/// tetrahedra (1 or 2) and keeps those whose triangulation satisfies
/// `predicate`.
///
/// Every tetrahedron is given the same orientation, so each face pairing is
/// an odd permutation; results are one representative per isomorphism class
/// (relabeling of tetrahedra and of their vertices), ordered by canonical
/// encoding.
pub fn search_gluings<P>(tet_count: usize, predicate: P) -> Vec<GluingSpec>
where
    P: Fn(&Triangulation) -> bool,
{
    if !(1..=2).contains(&tet_count) {
        return Vec::new();
    }
    let faces = 4 * tet_count;
    let odd_perms: Vec<Perm> = Perm::all().into_iter().filter(|p| !p.is_even()).collect();
    let relabelings = relabelings(tet_count);

    let mut found: BTreeSet<Vec<FacePairing>> = BTreeSet::new();
    let mut matching = vec![usize::MAX; faces];
    let mut matchings = Vec::new();
    enumerate_matchings(&mut matching, &mut matchings);

    for m in &matchings {
        let pairs: Vec<(usize, usize)> = (0..faces).filter(|&a| m[a] > a).map(|a| (a, m[a])).collect();
        let choices: Vec<Vec<Perm>> = pairs
            .iter()
            .map(|&(a, b)| odd_perms.iter().copied().filter(|p| p.apply(a % 4) == b % 4).collect())
            .collect();
        let mut idx = vec![0usize; pairs.len()];
        loop {
            let mut pairings = Vec::with_capacity(faces);
            for (k, &(a, b)) in pairs.iter().enumerate() {
                let perm = choices[k][idx[k]];
                pairings.push(FacePairing { tet: a / 4, face: a % 4, target_tet: b / 4, target_face: b % 4, perm });
                pairings.push(FacePairing {
                    tet: b / 4,
                    face: b % 4,
                    target_tet: a / 4,
                    target_face: a % 4,
                    perm: perm.inverse(),
                });
            }
            if let Ok(spec) = GluingSpec::new(tet_count, pairings) {
                if let Ok(tri) = Triangulation::analyze(spec) {
                    if predicate(&tri) {
                        found.insert(canonical_form(tri.spec(), &relabelings));
                    }
                }
            }
            // Odometer over the per-pair permutation choices.
            let mut k = 0;
            while k < idx.len() {
                idx[k] += 1;
                if idx[k] < choices[k].len() {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
            if k == idx.len() {
                break;
            }
        }
    }
    found
        .into_iter()
        .map(|pairings| GluingSpec::new(tet_count, pairings).expect("canonical forms are valid"))
        .collect()
}

fn enumerate_matchings(matching: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    let Some(first) = matching.iter().position(|&m| m == usize::MAX) else {
        out.push(matching.clone());
        return;
    };
    for partner in first + 1..matching.len() {
        if matching[partner] == usize::MAX {
            matching[first] = partner;
            matching[partner] = first;
            enumerate_matchings(matching, out);
            matching[first] = usize::MAX;
            matching[partner] = usize::MAX;
        }
    }
}

/// Orientation-compatible relabelings: a permutation of tetrahedra plus one
/// vertex permutation per tetrahedron, all of the same parity.
fn relabelings(tet_count: usize) -> Vec<(Vec<usize>, Vec<Perm>)> {
    let perms = Perm::all();
    let tet_orders: Vec<Vec<usize>> = if tet_count == 1 { vec![vec![0]] } else { vec![vec![0, 1], vec![1, 0]] };
    let mut out = Vec::new();
    for order in &tet_orders {
        for parity in [true, false] {
            let same: Vec<Perm> = perms.iter().copied().filter(|p| p.is_even() == parity).collect();
            let mut combos: Vec<Vec<Perm>> = vec![Vec::new()];
            for _ in 0..tet_count {
                combos = combos
                    .into_iter()
                    .flat_map(|c| {
                        same.iter().map(move |p| {
                            let mut c = c.clone();
                            c.push(*p);
                            c
                        })
                    })
                    .collect();
            }
            for c in combos {
                out.push((order.clone(), c));
            }
        }
    }
    out
}

fn canonical_form(spec: &GluingSpec, relabelings: &[(Vec<usize>, Vec<Perm>)]) -> Vec<FacePairing> {
    let mut best: Vec<FacePairing> = Vec::new();
    let mut image: Vec<FacePairing> = Vec::with_capacity(spec.pairings().len());
    for (order, rho) in relabelings {
        image.clear();
        image.extend(spec.pairings().iter().map(|p| {
            let (r_src, r_dst) = (&rho[p.tet], &rho[p.target_tet]);
            FacePairing {
                tet: order[p.tet],
                face: r_src.apply(p.face),
                target_tet: order[p.target_tet],
                target_face: r_dst.apply(p.target_face),
                perm: r_dst.compose(&p.perm).compose(&r_src.inverse()),
            }
        }));
        image.sort_unstable();
        if best.is_empty() || image < best {
            std::mem::swap(&mut best, &mut image);
        }
    }
    best
}

/// Predicate selecting triangulations with exactly one edge class and
/// hyperbolic (negative Euler characteristic) boundary.
pub fn one_edge_hyperbolic(tri: &Triangulation) -> bool {
    tri.edge_count() == 1 && tri.boundary_euler_characteristics().iter().all(|&chi| chi < 0)
}

/// The first two-tetrahedron gluing with one edge class of valence 12 and
/// hyperbolic boundary.
pub fn census_one_edge() -> Triangulation {
    let spec = search_gluings(2, one_edge_hyperbolic)
        .into_iter()
        .next()
        .expect("two-tetrahedron one-edge gluings exist");
    Triangulation::build(spec).expect("search output satisfies the boundary hypothesis")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pairing(tet: usize, face: usize, target_tet: usize, target_face: usize, perm: [usize; 4]) -> FacePairing {
        FacePairing { tet, face, target_tet, target_face, perm: Perm(perm) }
    }

    #[test]
    fn perm_basics() {
        let p = Perm([1, 2, 0, 3]);
        assert!(p.is_even());
        assert_eq!(p.compose(&p.inverse()), Perm::IDENTITY);
        assert!(!Perm([1, 0, 2, 3]).is_even());
        assert_eq!(Perm::all().len(), 24);
    }

    #[test]
    fn edge_indexing_round_trips() {
        for (e, &[a, b]) in EDGE_VERTICES.iter().enumerate() {
            assert_eq!(edge_between(a, b), e);
            assert_eq!(edge_between(b, a), e);
            let [c, d] = EDGE_VERTICES[OPPOSITE_EDGE[e]];
            assert!(![a, b].contains(&c) && ![a, b].contains(&d));
        }
    }

    #[test]
    fn rejects_non_involutive() {
        // Face 0 of tet 0 says it goes to face 1, but face 1 points back with the wrong map.
        let pairings = vec![
            pairing(0, 0, 0, 1, [1, 0, 2, 3]),
            pairing(0, 1, 0, 0, [1, 0, 3, 2]),
            pairing(0, 2, 0, 3, [0, 1, 3, 2]),
            pairing(0, 3, 0, 2, [0, 1, 3, 2]),
        ];
        let err = GluingSpec::new(1, pairings).unwrap_err();
        assert!(matches!(err, TriangulationError::NotInvolutive { .. }));
    }

    #[test]
    fn rejects_unpaired_and_bad_perm() {
        let pairings = vec![pairing(0, 0, 0, 1, [1, 0, 2, 3]), pairing(0, 1, 0, 0, [1, 0, 2, 3])];
        assert!(matches!(GluingSpec::new(1, pairings).unwrap_err(), TriangulationError::UnpairedFace { .. }));
        let pairings = vec![
            pairing(0, 0, 0, 1, [2, 0, 1, 3]),
            pairing(0, 1, 0, 0, [1, 2, 0, 3]),
            pairing(0, 2, 0, 3, [0, 1, 3, 2]),
            pairing(0, 3, 0, 2, [0, 1, 3, 2]),
        ];
        assert!(matches!(GluingSpec::new(1, pairings).unwrap_err(), TriangulationError::BadPermutation { .. }));
        assert_eq!(GluingSpec::new(0, vec![]).unwrap_err(), TriangulationError::Empty);
    }

    #[test]
    fn rejects_non_orientable() {
        // Even permutations glue with the wrong orientation.
        let pairings = vec![
            pairing(0, 0, 0, 1, [1, 0, 3, 2]),
            pairing(0, 1, 0, 0, [1, 0, 3, 2]),
            pairing(0, 2, 0, 3, [1, 0, 3, 2]),
            pairing(0, 3, 0, 2, [1, 0, 3, 2]),
        ];
        let spec = GluingSpec::new(1, pairings).unwrap();
        assert_eq!(Triangulation::analyze(spec).unwrap_err(), TriangulationError::NonOrientable);
    }

    #[test]
    fn one_tetrahedron_never_has_hyperbolic_boundary() {
        let all = search_gluings(1, |_| true);
        assert!(!all.is_empty());
        for spec in all {
            let tri = Triangulation::analyze(spec.clone()).unwrap();
            let total: i64 = tri.boundary_euler_characteristics().iter().sum();
            // 4 truncation triangles, 6 sides, 2 ends per edge class.
            assert_eq!(total, 2 * tri.edge_count() as i64 - 2);
            let err = Triangulation::build(spec).unwrap_err();
            assert!(err.is_boundary_hypothesis(), "{err}");
        }
        assert!(search_gluings(1, one_edge_hyperbolic).is_empty());
    }

    #[test]
    fn census_instance_has_one_valence_twelve_edge() {
        let tri = census_one_edge();
        assert_eq!(tri.edge_count(), 1);
        assert_eq!(tri.edge_classes()[0].valence(), 12);
        assert_eq!(tri.vertex_classes().len(), 1);
        // One genus-2 boundary surface: 2 link vertices, 12 sides, 8 triangles.
        assert_eq!(tri.boundary_euler_characteristics(), vec![-2]);
    }

    #[test]
    fn search_is_deterministic() {
        let a = search_gluings(2, |_| true);
        let b = search_gluings(2, |_| true);
        assert!(!a.is_empty());
        assert_eq!(a, b);
    }

    #[test]
    fn rebuild_is_idempotent() {
        for spec in search_gluings(2, |_| true).into_iter().take(40) {
            let tri = Triangulation::analyze(spec.clone()).unwrap();
            let again = Triangulation::analyze(GluingSpec::from_file(&tri.spec().to_file()).unwrap()).unwrap();
            assert_eq!(tri, again);
            let total: usize = tri.edge_classes().iter().map(EdgeClass::valence).sum();
            assert_eq!(total, 6 * tri.tet_count());
        }
    }
}
