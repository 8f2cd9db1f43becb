//! Lattice geometry: adjacency, pair-distance classes and per-site field
//! assignment.
//!
//! The supported preset is the 7-site triangular cell: a central spin
//! (site 4) surrounded by six border spins forming a hexagonal ring.
//! Site labels are 1-based. The border ring order is fixed to
//! [1, 2, 5, 7, 6, 3]; it is the unique labelling for which (1,2) and
//! (1,4) are nearest-neighbor pairs, (1,5) is a two-ring-step pair and
//! (1,7) the antipodal pair.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Pair-distance class on the lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PairClass {
    /// Nearest neighbors (an edge).
    Nn,
    /// Next-to-nearest neighbors (two ring steps).
    Nnn,
    /// Next-to-next-to-nearest neighbors (antipodal border pair).
    Nnnn,
}

impl PairClass {
    pub fn label(self) -> &'static str {
        match self {
            PairClass::Nn => "nn",
            PairClass::Nnn => "nnn",
            PairClass::Nnnn => "nnnn",
        }
    }
}

/// Immutable lattice description: site count, edge set, optional center
/// and the pair-class map over all unordered site pairs.
#[derive(Debug, Clone)]
pub struct LatticeSpec {
    n_sites: usize,
    edges: Vec<(usize, usize)>,
    ring_order: Vec<usize>,
    center: Option<usize>,
    pair_class: BTreeMap<(usize, usize), PairClass>,
}

impl LatticeSpec {
    /// The 7-site triangular preset: hexagonal border ring plus spokes to
    /// the central site 4.
    pub fn triangular7() -> Self {
        let ring = [1usize, 2, 5, 7, 6, 3];
        let center = 4usize;
        let mut edges: Vec<(usize, usize)> = Vec::with_capacity(12);
        for k in 0..6 {
            edges.push(norm_pair(ring[k], ring[(k + 1) % 6]));
            edges.push(norm_pair(center, ring[k]));
        }
        edges.sort_unstable();

        let mut pair_class = BTreeMap::new();
        for &e in &edges {
            pair_class.insert(e, PairClass::Nn);
        }
        for k in 0..6 {
            pair_class.insert(norm_pair(ring[k], ring[(k + 2) % 6]), PairClass::Nnn);
        }
        for k in 0..3 {
            pair_class.insert(norm_pair(ring[k], ring[k + 3]), PairClass::Nnnn);
        }
        debug_assert_eq!(pair_class.len(), 21);

        Self {
            n_sites: 7,
            edges,
            ring_order: ring.to_vec(),
            center: Some(center),
            pair_class,
        }
    }

    /// Custom lattice from an explicit edge list. Pair classes are derived
    /// from graph distance (1 → nn, 2 → nnn, otherwise nnnn); only the
    /// triangular preset carries the geometric classification.
    pub fn from_edges(
        n_sites: usize,
        edges: &[(usize, usize)],
        center: Option<usize>,
    ) -> Result<Self> {
        if n_sites == 0 {
            return Err(Error::InvalidLattice("lattice needs at least one site".into()));
        }
        let mut norm: Vec<(usize, usize)> = Vec::with_capacity(edges.len());
        for &(a, b) in edges {
            if a == b {
                return Err(Error::InvalidLattice(format!("self loop at site {a}")));
            }
            for s in [a, b] {
                if s < 1 || s > n_sites {
                    return Err(Error::SiteOutOfRange { site: s, n_sites });
                }
            }
            norm.push(norm_pair(a, b));
        }
        norm.sort_unstable();
        norm.dedup();
        if let Some(c) = center {
            if c < 1 || c > n_sites {
                return Err(Error::SiteOutOfRange { site: c, n_sites });
            }
        }

        // breadth-first distances for pair classification
        let mut adj = vec![Vec::new(); n_sites + 1];
        for &(a, b) in &norm {
            adj[a].push(b);
            adj[b].push(a);
        }
        let mut pair_class = BTreeMap::new();
        for i in 1..=n_sites {
            let mut dist = vec![usize::MAX; n_sites + 1];
            dist[i] = 0;
            let mut queue = std::collections::VecDeque::from([i]);
            while let Some(u) = queue.pop_front() {
                for &v in &adj[u] {
                    if dist[v] == usize::MAX {
                        dist[v] = dist[u] + 1;
                        queue.push_back(v);
                    }
                }
            }
            for j in (i + 1)..=n_sites {
                let class = match dist[j] {
                    1 => PairClass::Nn,
                    2 => PairClass::Nnn,
                    _ => PairClass::Nnnn,
                };
                pair_class.insert((i, j), class);
            }
        }

        Ok(Self {
            n_sites,
            edges: norm,
            ring_order: Vec::new(),
            center,
            pair_class,
        })
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn ring_order(&self) -> &[usize] {
        &self.ring_order
    }

    pub fn center(&self) -> Option<usize> {
        self.center
    }

    pub fn is_edge(&self, i: usize, j: usize) -> bool {
        i != j && self.edges.binary_search(&norm_pair(i, j)).is_ok()
    }

    /// Sorted neighbor list of `site`.
    pub fn neighbors(&self, site: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .edges
            .iter()
            .filter_map(|&(a, b)| {
                if a == site {
                    Some(b)
                } else if b == site {
                    Some(a)
                } else {
                    None
                }
            })
            .collect();
        out.sort_unstable();
        out
    }

    pub fn degree(&self, site: usize) -> usize {
        self.neighbors(site).len()
    }

    /// Pair class of an unordered pair; symmetric in (i, j).
    pub fn pair_class(&self, i: usize, j: usize) -> Option<PairClass> {
        if i == j {
            return None;
        }
        self.pair_class.get(&norm_pair(i, j)).copied()
    }

    /// All unordered pairs (i, j) with i < j.
    pub fn all_pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n = self.n_sites;
        (1..=n).flat_map(move |i| ((i + 1)..=n).map(move |j| (i, j)))
    }
}

/// Per-site z-field strengths, indexed by site (1-based accessor).
#[derive(Debug, Clone, PartialEq)]
pub struct FieldAssignment {
    h: Vec<f64>,
}

impl FieldAssignment {
    pub fn strength(&self, site: usize) -> f64 {
        self.h[site - 1]
    }

    pub fn values(&self) -> &[f64] {
        &self.h
    }

    pub fn n_sites(&self) -> usize {
        self.h.len()
    }
}

/// Assigns B₁ to every border site and B₂ to the center.
pub fn assign_fields(lattice: &LatticeSpec, b1: f64, b2: f64) -> Result<FieldAssignment> {
    for v in [b1, b2] {
        if v < 0.0 || !v.is_finite() {
            return Err(Error::NegativeField { value: v });
        }
    }
    let mut h = vec![b1; lattice.n_sites()];
    if let Some(c) = lattice.center() {
        h[c - 1] = b2;
    }
    Ok(FieldAssignment { h })
}

/// Shorthand for [`LatticeSpec::triangular7`].
pub fn build_triangular7() -> LatticeSpec {
    LatticeSpec::triangular7()
}

fn norm_pair(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn center_has_degree_six_and_borders_three() {
        let lat = build_triangular7();
        assert_eq!(lat.neighbors(4), vec![1, 2, 3, 5, 6, 7]);
        for b in [1, 2, 3, 5, 6, 7] {
            assert_eq!(lat.degree(b), 3, "border site {b}");
            assert!(lat.neighbors(b).contains(&4));
        }
    }

    #[test]
    fn edge_count_and_degree_sum() {
        let lat = build_triangular7();
        assert_eq!(lat.edges().len(), 12);
        let degree_sum: usize = (1..=7).map(|s| lat.degree(s)).sum();
        assert_eq!(degree_sum, 24);
    }

    #[test]
    fn pair_classes_match_naming() {
        let lat = build_triangular7();
        assert_eq!(lat.pair_class(1, 2), Some(PairClass::Nn));
        assert_eq!(lat.pair_class(1, 4), Some(PairClass::Nn));
        assert_eq!(lat.pair_class(1, 5), Some(PairClass::Nnn));
        assert_eq!(lat.pair_class(1, 7), Some(PairClass::Nnnn));
        assert_eq!(lat.pair_class(7, 1), Some(PairClass::Nnnn));
    }

    #[test]
    fn pair_class_total_and_symmetric() {
        let lat = build_triangular7();
        let mut counts = [0usize; 3];
        for (i, j) in lat.all_pairs() {
            let c = lat.pair_class(i, j).expect("classified");
            assert_eq!(lat.pair_class(j, i), Some(c));
            counts[match c {
                PairClass::Nn => 0,
                PairClass::Nnn => 1,
                PairClass::Nnnn => 2,
            }] += 1;
        }
        assert_eq!(counts, [12, 6, 3]);
    }

    #[test]
    fn specific_neighbor_sets() {
        let lat = build_triangular7();
        assert_eq!(lat.neighbors(1), vec![2, 3, 4]);
        assert_eq!(lat.neighbors(5), vec![2, 4, 7]);
    }

    #[test]
    fn ring_rotation_is_an_automorphism() {
        // rotating border labels one step along the ring maps edges to edges
        let lat = build_triangular7();
        let ring = lat.ring_order().to_vec();
        let mut perm = std::collections::HashMap::new();
        perm.insert(4usize, 4usize);
        for k in 0..6 {
            perm.insert(ring[k], ring[(k + 1) % 6]);
        }
        for &(a, b) in lat.edges() {
            assert!(lat.is_edge(perm[&a], perm[&b]), "({a},{b}) image not an edge");
        }
        // a reflection through site 1 works too
        let mut refl = std::collections::HashMap::new();
        refl.insert(4usize, 4usize);
        for k in 0..6 {
            refl.insert(ring[k], ring[(6 - k) % 6]);
        }
        for &(a, b) in lat.edges() {
            assert!(lat.is_edge(refl[&a], refl[&b]));
        }
    }

    #[test]
    fn border_orbit_is_transitive() {
        // repeated rotation reaches every border label from site 1
        let lat = build_triangular7();
        let ring = lat.ring_order();
        let mut reached = std::collections::BTreeSet::new();
        let mut s = 1usize;
        for _ in 0..6 {
            reached.insert(s);
            let k = ring.iter().position(|&r| r == s).unwrap();
            s = ring[(k + 1) % 6];
        }
        assert_eq!(reached.into_iter().collect::<Vec<_>>(), vec![1, 2, 3, 5, 6, 7]);
    }

    #[test]
    fn field_assignment_center_vs_border() {
        let lat = build_triangular7();
        let f = assign_fields(&lat, 1.0, 0.1).unwrap();
        assert_eq!(f.strength(4), 0.1);
        for b in [1, 2, 3, 5, 6, 7] {
            assert_eq!(f.strength(b), 1.0);
        }

        let hom = assign_fields(&lat, 1.0, 1.0).unwrap();
        assert_eq!(hom.values(), &[1.0; 7]);

        let inward = assign_fields(&lat, 0.1, 1.0).unwrap();
        assert_eq!(inward.strength(4), 1.0);
        assert_eq!(inward.strength(1), 0.1);
    }

    #[test]
    fn negative_field_rejected() {
        let lat = build_triangular7();
        assert!(matches!(
            assign_fields(&lat, -1.0, 1.0),
            Err(Error::NegativeField { .. })
        ));
        assert!(matches!(
            assign_fields(&lat, 1.0, -0.5),
            Err(Error::NegativeField { .. })
        ));
    }

    #[test]
    fn custom_lattice_classification() {
        // a 3-site chain: 1-2-3
        let lat = LatticeSpec::from_edges(3, &[(1, 2), (2, 3)], None).unwrap();
        assert_eq!(lat.pair_class(1, 2), Some(PairClass::Nn));
        assert_eq!(lat.pair_class(1, 3), Some(PairClass::Nnn));
        assert!(LatticeSpec::from_edges(3, &[(1, 1)], None).is_err());
        assert!(LatticeSpec::from_edges(3, &[(1, 4)], None).is_err());
    }
}
