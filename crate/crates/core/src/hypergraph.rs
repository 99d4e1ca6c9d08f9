//! Collections of particle subsets viewed as hypergraphs on `[n]`.
//!
//! For symmetric states a collection determines the state (detects its
//! entanglement) exactly when the hypergraph is connected and some hyperedge
//! is at least as large as the SDL (EDL). Lengths are passed in as plain
//! integers so the combinatorics stay independent of any state.

use crate::error::{Error, Result};
use crate::qcore::Subset;

/// Deduplicated list of nonempty hyperedges over `n <= 63` particles.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubsetCollection {
    n: usize,
    edges: Vec<Subset>,
}

impl SubsetCollection {
    pub fn new(n: usize, edges: Vec<Subset>) -> Result<Self> {
        if n > 63 {
            return Err(Error::TooLarge(n));
        }
        let mut out: Vec<Subset> = Vec::with_capacity(edges.len());
        for e in edges {
            if e.n() != n {
                return Err(Error::DimMismatch(format!(
                    "hyperedge over {} particles in a collection over {n}",
                    e.n()
                )));
            }
            if e.is_empty() {
                return Err(Error::EmptySubset);
            }
            if !out.contains(&e) {
                out.push(e);
            }
        }
        Ok(SubsetCollection { n, edges: out })
    }

    /// From 1-based index lists such as `[[1, 2], [2, 3]]`.
    pub fn from_index_lists(n: usize, lists: &[Vec<usize>]) -> Result<Self> {
        let edges = lists
            .iter()
            .map(|l| Subset::from_indices(n, l))
            .collect::<Result<Vec<_>>>()?;
        SubsetCollection::new(n, edges)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[Subset] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn max_edge_size(&self) -> usize {
        self.edges.iter().map(Subset::len).max().unwrap_or(0)
    }

    pub fn to_index_lists(&self) -> Vec<Vec<usize>> {
        self.edges.iter().map(Subset::indices).collect()
    }
}

/// All `k`-subsets of `[n]` in ascending mask order.
pub fn all_k_subsets(n: usize, k: usize) -> Result<SubsetCollection> {
    if k == 0 || k > n {
        return Err(Error::BadK { n, k });
    }
    if n > 63 {
        return Err(Error::TooLarge(n));
    }
    let mut edges = Vec::new();
    // Gosper's hack walks k-bit masks in increasing order.
    let mut mask: u64 = (1u64 << k) - 1;
    let limit: u128 = 1u128 << n;
    while (mask as u128) < limit {
        edges.push(Subset::new(n, mask)?);
        let c = mask & mask.wrapping_neg();
        let r = mask.wrapping_add(c);
        if r == 0 {
            break;
        }
        mask = (((r ^ mask) >> 2) / c) | r;
    }
    Ok(SubsetCollection { n, edges })
}

struct DisjointSet {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl DisjointSet {
    fn new(n: usize) -> Self {
        DisjointSet {
            parent: (0..n).collect(),
            rank: vec![0; n],
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb,
            std::cmp::Ordering::Greater => self.parent[rb] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
    }
}

/// True iff the hypergraph `([n], edges)` has a single component.
pub fn is_connected(c: &SubsetCollection) -> bool {
    let n = c.n();
    if n == 0 {
        return false;
    }
    let mut dsu = DisjointSet::new(n);
    for e in c.edges() {
        let idx = e.indices();
        for w in idx.windows(2) {
            dsu.union(w[0] - 1, w[1] - 1);
        }
    }
    let root = dsu.find(0);
    (1..n).all(|v| dsu.find(v) == root)
}

/// Whether `c` determines (detects) a symmetric state whose SDL (EDL) is `length`.
pub fn collection_decides(c: &SubsetCollection, length: usize) -> bool {
    is_connected(c) && c.max_edge_size() >= length
}

/// Smallest number of k-body marginals forming a connected collection,
/// with an explicit overlapping-chain witness.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MinimalCollection {
    pub count: usize,
    pub witness: SubsetCollection,
}

pub fn min_marginal_count(n: usize, k: usize) -> Result<MinimalCollection> {
    if k < 2 || k > n {
        return Err(Error::BadK { n, k });
    }
    let count = (n - 1).div_ceil(k - 1);
    let mut edges = Vec::with_capacity(count);
    for b in 0..count {
        // consecutive blocks share one vertex; the last is right-aligned
        let start = (1 + b * (k - 1)).min(n + 1 - k);
        let idx: Vec<usize> = (start..start + k).collect();
        edges.push(Subset::from_indices(n, &idx)?);
    }
    Ok(MinimalCollection {
        count,
        witness: SubsetCollection::new(n, edges)?,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransitivityQuery {
    pub collection: SubsetCollection,
    pub target: Subset,
}

impl TransitivityQuery {
    pub fn new(collection: SubsetCollection, target: Subset) -> Result<Self> {
        if target.is_empty() {
            return Err(Error::EmptySubset);
        }
        if target.n() != collection.n() {
            return Err(Error::DimMismatch("target and collection differ in n".into()));
        }
        Ok(TransitivityQuery { collection, target })
    }
}

/// Marginals on a connected collection with an edge of size `>= edl` force
/// every compatible state's marginal on any target of size `>= edl` to be
/// entangled.
pub fn transitivity_certificate(q: &TransitivityQuery, edl: usize) -> bool {
    is_connected(&q.collection) && q.collection.max_edge_size() >= edl && q.target.len() >= edl
}
