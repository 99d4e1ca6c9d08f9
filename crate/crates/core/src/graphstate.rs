//! Graph states, local complementation, and the degree bounds on their
//! determination length.

use std::collections::{HashSet, VecDeque};

use crate::error::{Error, Result};
use crate::hypergraph::all_k_subsets;
use crate::qcore::{self, c, check_dense_size, CMat, CVec, PureVector};

/// Default number of orbit members explored by `lc_orbit_min_max_degree`.
pub const DEFAULT_ORBIT_BUDGET: usize = 100_000;

/// Simple undirected graph on vertices `1..=n`; bit `j - 1` of `adj[i - 1]`
/// marks the edge `{i, j}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SimpleGraph {
    n: usize,
    adj: Vec<u64>,
}

impl SimpleGraph {
    pub fn new(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if n > 63 {
            return Err(Error::TooLarge(n));
        }
        let mut adj = vec![0u64; n];
        for &(a, b) in edges {
            for v in [a, b] {
                if v == 0 || v > n {
                    return Err(Error::BadVertex(v));
                }
            }
            if a == b {
                return Err(Error::BadVertex(a));
            }
            adj[a - 1] |= 1 << (b - 1);
            adj[b - 1] |= 1 << (a - 1);
        }
        Ok(SimpleGraph { n, adj })
    }

    pub fn empty(n: usize) -> Self {
        SimpleGraph { n, adj: vec![0; n] }
    }

    pub fn path(n: usize) -> Self {
        let e: Vec<_> = (1..n).map(|i| (i, i + 1)).collect();
        SimpleGraph::new(n, &e).expect("valid path")
    }

    pub fn cycle(n: usize) -> Self {
        let mut e: Vec<_> = (1..n).map(|i| (i, i + 1)).collect();
        if n >= 3 {
            e.push((n, 1));
        }
        SimpleGraph::new(n, &e).expect("valid cycle")
    }

    pub fn complete(n: usize) -> Self {
        let e: Vec<_> = (1..=n).flat_map(|i| (i + 1..=n).map(move |j| (i, j))).collect();
        SimpleGraph::new(n, &e).expect("valid complete graph")
    }

    /// Star with center 1 and `n - 1` leaves.
    pub fn star(n: usize) -> Self {
        let e: Vec<_> = (2..=n).map(|j| (1, j)).collect();
        SimpleGraph::new(n, &e).expect("valid star")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        a >= 1 && a <= self.n && b >= 1 && b <= self.n && self.adj[a - 1] >> (b - 1) & 1 == 1
    }

    /// Edges `(a, b)` with `a < b`, sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        (1..=self.n)
            .flat_map(|a| (a + 1..=self.n).filter(move |&b| self.has_edge(a, b)).map(move |b| (a, b)))
            .collect()
    }

    pub fn neighbors(&self, v: usize) -> Vec<usize> {
        (1..=self.n).filter(|&u| self.has_edge(v, u)).collect()
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v - 1].count_ones() as usize
    }

    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(|a| a.count_ones() as usize).max().unwrap_or(0)
    }

    pub fn is_connected(&self) -> bool {
        if self.n == 0 {
            return true;
        }
        let mut seen = 1u64;
        let mut queue = VecDeque::from([0usize]);
        while let Some(v) = queue.pop_front() {
            let fresh = self.adj[v] & !seen;
            seen |= fresh;
            for u in 0..self.n {
                if fresh >> u & 1 == 1 {
                    queue.push_back(u);
                }
            }
        }
        seen.count_ones() as usize == self.n
    }

    /// Vertex sets of the connected components, each ascending.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut seen = 0u64;
        let mut out = Vec::new();
        for s in 0..self.n {
            if seen >> s & 1 == 1 {
                continue;
            }
            let mut comp = 1u64 << s;
            loop {
                let grown = (0..self.n).filter(|&v| comp >> v & 1 == 1).fold(comp, |acc, v| acc | self.adj[v]);
                if grown == comp {
                    break;
                }
                comp = grown;
            }
            seen |= comp;
            out.push((1..=self.n).filter(|&v| comp >> (v - 1) & 1 == 1).collect());
        }
        out
    }
}

/// `|G>`: controlled-Z on every edge applied to `|+>^n`.
pub fn graph_state(g: &SimpleGraph) -> Result<PureVector> {
    let n = g.n;
    check_dense_size(n)?;
    let dim = 1usize << n;
    let amp = 1.0 / (dim as f64).sqrt();
    let edges = g.edges();
    let amps = CVec::from_iterator(
        dim,
        (0..dim).map(|x| {
            let bit = |v: usize| (x >> (n - v)) & 1;
            let parity = edges.iter().filter(|&&(a, b)| bit(a) & bit(b) == 1).count();
            c(if parity % 2 == 0 { amp } else { -amp }, 0.0)
        }),
    );
    let psi = PureVector::new(n, amps)?;
    debug_assert!(stabilizer_deviation(g, &psi)? < 1e-10);
    Ok(psi)
}

/// Stabilizer generator `X_i prod_{j in N(i)} Z_j`.
pub fn stabilizer(g: &SimpleGraph, i: usize) -> Result<CMat> {
    if i == 0 || i > g.n {
        return Err(Error::BadVertex(i));
    }
    let label: String = (1..=g.n)
        .map(|j| {
            if j == i {
                'X'
            } else if g.has_edge(i, j) {
                'Z'
            } else {
                'I'
            }
        })
        .collect();
    qcore::pauli_string(g.n, &label)
}

/// Largest `|M_i psi - psi|` entry over all stabilizer generators.
pub fn stabilizer_deviation(g: &SimpleGraph, psi: &PureVector) -> Result<f64> {
    if psi.n() != g.n {
        return Err(Error::DimMismatch(format!("graph on {} vertices, state on {} qubits", g.n, psi.n())));
    }
    let v = psi.amplitudes();
    let mut worst: f64 = 0.0;
    for i in 1..=g.n {
        let mv = stabilizer(g, i)? * v;
        worst = worst.max((mv - v).camax());
    }
    Ok(worst)
}

/// Toggles every edge inside the neighborhood of `v`.
pub fn local_complement(g: &SimpleGraph, v: usize) -> Result<SimpleGraph> {
    if v == 0 || v > g.n {
        return Err(Error::BadVertex(v));
    }
    let nb = g.adj[v - 1];
    let mut adj = g.adj.clone();
    for u in 0..g.n {
        if nb >> u & 1 == 1 {
            adj[u] ^= nb & !(1 << u);
        }
    }
    Ok(SimpleGraph { n: g.n, adj })
}

#[derive(Clone, Debug, PartialEq)]
pub struct OrbitSearch {
    pub min_max_degree: usize,
    /// A graph in the orbit attaining the minimum.
    pub best: SimpleGraph,
    pub visited: usize,
    /// True when the whole orbit was enumerated within the budget.
    pub exhausted: bool,
}

/// Breadth-first search over the local-complementation orbit of `g`,
/// deduplicating labeled graphs, for at most `budget` members.
pub fn lc_orbit_search(g: &SimpleGraph, budget: usize) -> Result<OrbitSearch> {
    check_dense_size(g.n)?;
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    let mut seen: HashSet<Vec<u64>> = HashSet::from([g.adj.clone()]);
    let mut queue = VecDeque::from([g.clone()]);
    let mut best = g.clone();
    let mut visited = 0;
    while let Some(h) = queue.pop_front() {
        visited += 1;
        if h.max_degree() < best.max_degree() {
            best = h.clone();
        }
        if visited >= budget {
            return Ok(OrbitSearch { min_max_degree: best.max_degree(), best, visited, exhausted: false });
        }
        for v in 1..=h.n {
            let next = local_complement(&h, v)?;
            if seen.insert(next.adj.clone()) {
                queue.push_back(next);
            }
        }
    }
    Ok(OrbitSearch { min_max_degree: best.max_degree(), best, visited, exhausted: true })
}

pub fn lc_orbit_min_max_degree(g: &SimpleGraph, budget: usize) -> Result<usize> {
    Ok(lc_orbit_search(g, budget)?.min_max_degree)
}

#[derive(Clone, Debug, PartialEq)]
pub struct GraphBounds {
    pub lo: usize,
    pub hi: usize,
    /// True when `hi` comes from an exhausted orbit.
    pub exact_orbit: bool,
    pub best: SimpleGraph,
}

/// `3 <= L(|G>), l(|G>) <= 1 + min over the LC orbit of the maximum degree`.
pub fn graph_bounds(g: &SimpleGraph) -> Result<GraphBounds> {
    graph_bounds_with_budget(g, DEFAULT_ORBIT_BUDGET)
}

pub fn graph_bounds_with_budget(g: &SimpleGraph, budget: usize) -> Result<GraphBounds> {
    if g.n < 3 {
        return Err(Error::BadK { n: g.n, k: 3 });
    }
    let o = lc_orbit_search(g, budget)?;
    Ok(GraphBounds { lo: 3, hi: 1 + o.min_max_degree, exact_orbit: o.exhausted, best: o.best })
}

/// Largest `k` such that every k-body marginal of `psi` is maximally mixed
/// within 1e-9; 0 when even single particles are not.
pub fn uniformity_level(psi: &PureVector) -> Result<usize> {
    let n = psi.n();
    if n > 8 {
        return Err(Error::TooLarge(n));
    }
    let rho = psi.density();
    let mut level = 0;
    for k in 1..=n {
        let unit = CMat::identity(1 << k, 1 << k) * c(1.0 / (1u64 << k) as f64, 0.0);
        let all = all_k_subsets(n, k)?;
        let ok = all.edges().iter().try_fold(true, |acc, s| {
            Ok::<_, Error>(acc && qcore::max_abs_diff(qcore::partial_trace(&rho, s)?.matrix(), &unit) <= 1e-9)
        })?;
        if !ok {
            break;
        }
        level = k;
    }
    Ok(level)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn diamond() -> SimpleGraph {
        SimpleGraph::new(4, &[(1, 2), (2, 3), (3, 4), (4, 1), (2, 4)]).unwrap()
    }

    fn k33() -> SimpleGraph {
        let e: Vec<_> = (1..=3).flat_map(|a| (4..=6).map(move |b| (a, b))).collect();
        SimpleGraph::new(6, &e).unwrap()
    }

    fn prism() -> SimpleGraph {
        SimpleGraph::new(6, &[(1, 2), (2, 3), (3, 1), (4, 5), (5, 6), (6, 4), (1, 4), (2, 5), (3, 6)]).unwrap()
    }

    #[test]
    fn small_graph_states() {
        let psi = graph_state(&SimpleGraph::empty(3)).unwrap();
        assert!(psi.amplitudes().iter().all(|a| (a.re - 1.0 / 8f64.sqrt()).abs() < 1e-15));
        let e = graph_state(&SimpleGraph::new(2, &[(1, 2)]).unwrap()).unwrap();
        let a: Vec<f64> = e.amplitudes().iter().map(|z| z.re).collect();
        assert_eq!(a, vec![0.5, 0.5, 0.5, -0.5]);
        let p3 = SimpleGraph::path(3);
        assert!(stabilizer_deviation(&p3, &graph_state(&p3).unwrap()).unwrap() < 1e-10);
        assert_eq!(graph_state(&SimpleGraph::empty(11)), Err(Error::TooLarge(11)));
    }

    #[test]
    fn local_complement_examples() {
        assert_eq!(local_complement(&diamond(), 1).unwrap(), SimpleGraph::cycle(4));
        assert_eq!(local_complement(&SimpleGraph::star(4), 1).unwrap(), SimpleGraph::complete(4));
        assert_eq!(local_complement(&diamond(), 5), Err(Error::BadVertex(5)));
    }

    #[test]
    fn orbit_minima() {
        for n in 3..8 {
            assert_eq!(lc_orbit_min_max_degree(&SimpleGraph::cycle(n), DEFAULT_ORBIT_BUDGET).unwrap(), 2);
        }
        let o = lc_orbit_search(&diamond(), DEFAULT_ORBIT_BUDGET).unwrap();
        assert_eq!(o.min_max_degree, 2);
        assert!(o.exhausted);
        // K4 is LC-equivalent only to the four stars
        let o = lc_orbit_search(&SimpleGraph::complete(4), DEFAULT_ORBIT_BUDGET).unwrap();
        assert_eq!((o.visited, o.min_max_degree), (5, 3));
        assert_eq!(graph_bounds(&SimpleGraph::star(5)).unwrap().hi, 5);
        assert_eq!(
            lc_orbit_min_max_degree(&SimpleGraph::new(4, &[(1, 2)]).unwrap(), 10),
            Err(Error::Disconnected)
        );
    }

    #[test]
    fn bounds_for_paths_and_cycles() {
        for n in 4..8 {
            for g in [SimpleGraph::path(n), SimpleGraph::cycle(n)] {
                let b = graph_bounds(&g).unwrap();
                assert_eq!((b.lo, b.hi), (3, 3), "{g:?}");
            }
        }
        let b = graph_bounds(&diamond()).unwrap();
        assert_eq!((b.lo, b.hi), (3, 3));
        assert!(graph_bounds(&SimpleGraph::path(2)).is_err());
    }

    #[test]
    fn uniformity_examples() {
        assert_eq!(uniformity_level(&PureVector::ghz(4).unwrap()).unwrap(), 1);
        assert_eq!(uniformity_level(&PureVector::basis(3, 0).unwrap()).unwrap(), 0);
        let levels: Vec<usize> = [k33(), prism()].iter().map(|g| uniformity_level(&graph_state(g).unwrap()).unwrap()).collect();
        assert!(levels.contains(&3), "{levels:?}");
        for g in [k33(), prism()] {
            if uniformity_level(&graph_state(&g).unwrap()).unwrap() == 3 {
                assert_eq!(graph_bounds(&g).unwrap().hi, 4);
            }
        }
    }

    fn schmidt_rank(psi: &PureVector, left: &[usize]) -> usize {
        let n = psi.n();
        let right: Vec<usize> = (1..=n).filter(|v| !left.contains(v)).collect();
        let pick = |x: usize, part: &[usize]| part.iter().fold(0usize, |acc, &p| (acc << 1) | ((x >> (n - p)) & 1));
        let mut m = CMat::zeros(1 << left.len(), 1 << right.len());
        for (x, a) in psi.amplitudes().iter().enumerate() {
            m[(pick(x, left), pick(x, &right))] = *a;
        }
        m.singular_values().iter().filter(|s| **s > 1e-10).count()
    }

    fn arb_graph(max_n: usize) -> impl Strategy<Value = SimpleGraph> {
        (3..=max_n).prop_flat_map(|n| {
            proptest::collection::vec(any::<bool>(), n * (n - 1) / 2).prop_map(move |bits| {
                let pairs: Vec<_> = (1..=n).flat_map(|i| (i + 1..=n).map(move |j| (i, j))).collect();
                let e: Vec<_> = pairs.into_iter().zip(bits).filter(|(_, b)| *b).map(|(p, _)| p).collect();
                SimpleGraph::new(n, &e).unwrap()
            })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn stabilizers_fix_graph_states(g in arb_graph(7)) {
            prop_assert!(stabilizer_deviation(&g, &graph_state(&g).unwrap()).unwrap() < 1e-10);
        }

        #[test]
        fn local_complement_is_an_involution(g in arb_graph(8), v in 1usize..9) {
            let v = 1 + (v - 1) % g.n();
            prop_assert_eq!(local_complement(&local_complement(&g, v).unwrap(), v).unwrap(), g);
        }

        #[test]
        fn local_complement_preserves_uniformity(g in arb_graph(6), v in 1usize..7) {
            let v = 1 + (v - 1) % g.n();
            let h = local_complement(&g, v).unwrap();
            prop_assert_eq!(
                uniformity_level(&graph_state(&g).unwrap()).unwrap(),
                uniformity_level(&graph_state(&h).unwrap()).unwrap()
            );
        }

        #[test]
        fn orbit_members_share_bounds(g in arb_graph(6), walk in proptest::collection::vec(1usize..7, 0..20)) {
            prop_assume!(g.is_connected());
            let mut h = g.clone();
            for v in walk {
                h = local_complement(&h, 1 + (v - 1) % g.n()).unwrap();
            }
            prop_assert_eq!(graph_bounds(&g).unwrap().hi, graph_bounds(&h).unwrap().hi);
        }

        #[test]
        fn larger_budget_never_raises_bound(g in arb_graph(7), small in 1usize..20) {
            prop_assume!(g.is_connected());
            let a = graph_bounds_with_budget(&g, small).unwrap().hi;
            let b = graph_bounds_with_budget(&g, small * 10).unwrap().hi;
            prop_assert!(b <= a);
        }

        #[test]
        fn disconnected_graphs_give_product_states(g in arb_graph(5)) {
            let comps = g.components();
            prop_assume!(comps.len() > 1);
            let psi = graph_state(&g).unwrap();
            prop_assert_eq!(schmidt_rank(&psi, &comps[0]), 1);
            prop_assert_eq!(graph_bounds(&g), Err(Error::Disconnected));
        }
    }
}
