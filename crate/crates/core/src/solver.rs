//! Deterministic solver for perfect matchings of prescribed red parity.
//!
//! Strategy: fix a perfect matching `m0`. If its red parity already matches
//! the target, done. Otherwise orient matching edges left-to-right and
//! non-matching edges right-to-left, restrict to *relevant* edges (those
//! lying in some perfect matching), and BFS-label each connected component
//! so that every tree edge is consistent (red wants equal labels, blue
//! unequal). A violating non-tree edge closes an alternating circuit with an
//! odd number of violating edges; decomposing the circuit into simple cycles
//! yields one with an odd violation count, which has odd red count and so
//! flips the matching parity when rotated. If no non-tree edge violates, the
//! assembled labeling is consistent with every relevant edge and certifies
//! that no target-parity perfect matching exists.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use thiserror::Error;

use crate::graph::{Color, ColoredBipartiteGraph, Edge};
use crate::labeling::{edge_violates, Labeling, ParityTarget};
use crate::matching::{find_perfect_matching, hall_violator, HallViolator, Matching};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SolverError {
    #[error("base matching is not a perfect matching of the graph")]
    NotPerfect,
    #[error("bad edge is not a violating non-tree edge of its component")]
    NotAViolatingNonTreeEdge,
    #[error("internal invariant failed: {0}")]
    Internal(String),
}

/// Why no perfect matching exists at all.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NoMatchingWitness {
    SideMismatch { n_left: usize, n_right: usize },
    Hall(HallViolator),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ParityResult {
    /// A perfect matching whose red count has the requested parity.
    MatchingFound(Matching),
    /// A parity-valid labeling consistent with every relevant edge.
    Certificate(Labeling),
    NoPerfectMatching(NoMatchingWitness),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SolveStats {
    pub components: usize,
    pub relevant_edges: usize,
    pub rotations: usize,
}

/// One connected component of the relevant-edge subgraph.
/// Nodes are `u` for left vertices and `n_left + v` for right vertices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Component {
    pub nodes: Vec<usize>,
    pub edges: Vec<Edge>,
}

#[derive(Clone, Debug)]
pub struct RelevanceStructure {
    n_left: usize,
    base: Matching,
    pub relevant: Vec<Edge>,
    pub components: Vec<Component>,
    /// Indices of single-edge components (edges lying in every perfect
    /// matching).
    pub forced: Vec<usize>,
}

impl RelevanceStructure {
    pub fn base(&self) -> &Matching {
        &self.base
    }

    fn arc_of(&self, e: &Edge) -> (usize, usize) {
        let (u, v) = (e.u, self.n_left + e.v);
        if self.base.contains(e) {
            (u, v)
        } else {
            (v, u)
        }
    }

    /// Out-arc adjacency of one component, sorted for determinism.
    fn component_arcs(&self, comp: &Component) -> BTreeMap<usize, Vec<(usize, Edge)>> {
        let mut adj: BTreeMap<usize, Vec<(usize, Edge)>> = BTreeMap::new();
        for node in &comp.nodes {
            adj.insert(*node, Vec::new());
        }
        for e in &comp.edges {
            let (from, to) = self.arc_of(e);
            adj.get_mut(&from)
                .expect("arc endpoints in component")
                .push((to, *e));
        }
        for outs in adj.values_mut() {
            outs.sort_unstable_by_key(|(to, e)| (*to, *e));
        }
        adj
    }
}

fn tarjan_scc(n: usize, adj: &[Vec<usize>]) -> Vec<usize> {
    struct State<'a> {
        adj: &'a [Vec<usize>],
        index: usize,
        stack: Vec<usize>,
        on_stack: Vec<bool>,
        idx: Vec<Option<usize>>,
        low: Vec<usize>,
        comp_of: Vec<usize>,
        ncomp: usize,
    }

    fn connect(v: usize, st: &mut State) {
        st.idx[v] = Some(st.index);
        st.low[v] = st.index;
        st.index += 1;
        st.stack.push(v);
        st.on_stack[v] = true;
        for i in 0..st.adj[v].len() {
            let w = st.adj[v][i];
            if st.idx[w].is_none() {
                connect(w, st);
                st.low[v] = st.low[v].min(st.low[w]);
            } else if st.on_stack[w] {
                st.low[v] = st.low[v].min(st.idx[w].unwrap());
            }
        }
        if st.low[v] == st.idx[v].unwrap() {
            loop {
                let w = st.stack.pop().expect("stack underflow");
                st.on_stack[w] = false;
                st.comp_of[w] = st.ncomp;
                if w == v {
                    break;
                }
            }
            st.ncomp += 1;
        }
    }

    let mut st = State {
        adj,
        index: 0,
        stack: Vec::new(),
        on_stack: vec![false; n],
        idx: vec![None; n],
        low: vec![0; n],
        comp_of: vec![usize::MAX; n],
        ncomp: 0,
    };
    for v in 0..n {
        if st.idx[v].is_none() {
            connect(v, &mut st);
        }
    }
    st.comp_of
}

/// Computes the relevant edges of `g` with respect to any perfect matching
/// `m0`: an edge is relevant iff it belongs to `m0` or its endpoints lie in
/// one strongly connected component under the matching orientation. The
/// resulting edge set and components do not depend on which perfect
/// matching is supplied.
pub fn relevant_edges(
    g: &ColoredBipartiteGraph,
    m0: &Matching,
) -> Result<RelevanceStructure, SolverError> {
    if !m0.is_perfect_on(g) {
        return Err(SolverError::NotPerfect);
    }
    let n = g.n_left();
    let nodes = 2 * n;
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); nodes];
    for e in g.edges() {
        if m0.contains(e) {
            adj[e.u].push(n + e.v);
        } else {
            adj[n + e.v].push(e.u);
        }
    }
    let scc = tarjan_scc(nodes, &adj);

    let relevant: Vec<Edge> = g
        .edges()
        .iter()
        .filter(|e| m0.contains(e) || scc[e.u] == scc[n + e.v])
        .copied()
        .collect();

    // Connected components of the relevant-edge subgraph.
    let mut dsu: Vec<usize> = (0..nodes).collect();
    fn find(dsu: &mut Vec<usize>, x: usize) -> usize {
        if dsu[x] != x {
            let r = find(dsu, dsu[x]);
            dsu[x] = r;
        }
        dsu[x]
    }
    for e in &relevant {
        let (a, b) = (e.u, n + e.v);
        let (ra, rb) = (find(&mut dsu, a), find(&mut dsu, b));
        if ra != rb {
            dsu[ra.max(rb)] = ra.min(rb);
        }
    }
    let mut grouped: BTreeMap<usize, Component> = BTreeMap::new();
    for e in &relevant {
        let root = find(&mut dsu, e.u);
        grouped
            .entry(root)
            .or_insert_with(|| Component {
                nodes: Vec::new(),
                edges: Vec::new(),
            })
            .edges
            .push(*e);
    }
    let mut components: Vec<Component> = Vec::new();
    for (_, mut comp) in grouped {
        let mut node_set = BTreeSet::new();
        for e in &comp.edges {
            node_set.insert(e.u);
            node_set.insert(n + e.v);
        }
        comp.nodes = node_set.into_iter().collect();
        comp.edges.sort_unstable();
        components.push(comp);
    }
    let forced: Vec<usize> = components
        .iter()
        .enumerate()
        .filter(|(_, c)| c.edges.len() == 1)
        .map(|(i, _)| i)
        .collect();

    // Multi-edge components must be strongly connected.
    for comp in &components {
        if comp.edges.len() > 1 {
            let id = scc[comp.nodes[0]];
            if comp.nodes.iter().any(|&x| scc[x] != id) {
                return Err(SolverError::Internal(
                    "multi-edge component is not strongly connected".into(),
                ));
            }
        }
    }

    Ok(RelevanceStructure {
        n_left: n,
        base: m0.clone(),
        relevant,
        components,
        forced,
    })
}

/// BFS tree of one component with labels making every tree edge consistent.
#[derive(Clone, Debug)]
pub struct TreeLabels {
    pub root: usize,
    pub parent: BTreeMap<usize, (usize, Edge)>,
    pub depth: BTreeMap<usize, usize>,
    pub labels: BTreeMap<usize, bool>,
    pub tree_edges: BTreeSet<Edge>,
}

impl TreeLabels {
    fn violates(&self, s: &RelevanceStructure, e: &Edge) -> bool {
        let lu = self.labels[&e.u];
        let lv = self.labels[&(s.n_left + e.v)];
        match e.color {
            Color::Red => lu != lv,
            Color::Blue => lu == lv,
        }
    }

    fn is_ancestor(&self, anc: usize, mut node: usize) -> bool {
        loop {
            if node == anc {
                return true;
            }
            match self.parent.get(&node) {
                Some(&(p, _)) => node = p,
                None => return false,
            }
        }
    }

    fn lca(&self, mut a: usize, mut b: usize) -> usize {
        while self.depth[&a] > self.depth[&b] {
            a = self.parent[&a].0;
        }
        while self.depth[&b] > self.depth[&a] {
            b = self.parent[&b].0;
        }
        while a != b {
            a = self.parent[&a].0;
            b = self.parent[&b].0;
        }
        a
    }

    /// Tree edges on the path from ancestor `anc` down to `node`.
    fn path_down(&self, anc: usize, node: usize) -> Vec<Edge> {
        let mut rev = Vec::new();
        let mut cur = node;
        while cur != anc {
            let (p, e) = self.parent[&cur];
            rev.push(e);
            cur = p;
        }
        rev.reverse();
        rev
    }
}

/// Builds the BFS tree of a component rooted at its lowest-index left
/// vertex, assigning labels so every tree edge is consistent (root gets 1).
pub fn bfs_tree_labels(
    s: &RelevanceStructure,
    comp: &Component,
) -> Result<TreeLabels, SolverError> {
    let root = *comp
        .nodes
        .iter()
        .find(|&&x| x < s.n_left)
        .ok_or_else(|| SolverError::Internal("component without left vertex".into()))?;
    let adj = s.component_arcs(comp);
    let mut tree = TreeLabels {
        root,
        parent: BTreeMap::new(),
        depth: BTreeMap::new(),
        labels: BTreeMap::new(),
        tree_edges: BTreeSet::new(),
    };
    tree.depth.insert(root, 0);
    tree.labels.insert(root, true);
    let mut queue = VecDeque::from([root]);
    while let Some(x) = queue.pop_front() {
        let lx = tree.labels[&x];
        for &(to, e) in &adj[&x] {
            if tree.labels.contains_key(&to) {
                continue;
            }
            let label = match e.color {
                Color::Red => lx,
                Color::Blue => !lx,
            };
            tree.labels.insert(to, label);
            tree.depth.insert(to, tree.depth[&x] + 1);
            tree.parent.insert(to, (x, e));
            tree.tree_edges.insert(e);
            queue.push_back(to);
        }
    }
    if tree.labels.len() != comp.nodes.len() {
        return Err(SolverError::Internal(
            "BFS did not reach the whole component".into(),
        ));
    }
    Ok(tree)
}

/// Shortest directed path between two nodes of a component, as arcs.
fn bfs_arc_path(
    adj: &BTreeMap<usize, Vec<(usize, Edge)>>,
    src: usize,
    dst: usize,
) -> Option<Vec<Edge>> {
    if src == dst {
        return Some(Vec::new());
    }
    let mut parent: BTreeMap<usize, (usize, Edge)> = BTreeMap::new();
    let mut queue = VecDeque::from([src]);
    while let Some(x) = queue.pop_front() {
        for &(to, e) in &adj[&x] {
            if to == src || parent.contains_key(&to) {
                continue;
            }
            parent.insert(to, (x, e));
            if to == dst {
                let mut rev = Vec::new();
                let mut cur = dst;
                while cur != src {
                    let (p, pe) = parent[&cur];
                    rev.push(pe);
                    cur = p;
                }
                rev.reverse();
                return Some(rev);
            }
            queue.push_back(to);
        }
    }
    None
}

/// Splits a closed arc walk into vertex-simple directed cycles.
fn simple_cycles(s: &RelevanceStructure, start: usize, walk: &[Edge]) -> Vec<Vec<Edge>> {
    let mut cycles = Vec::new();
    let mut node_stack = vec![start];
    let mut pos: BTreeMap<usize, usize> = BTreeMap::from([(start, 0)]);
    let mut arc_stack: Vec<Edge> = Vec::new();
    for e in walk {
        let (from, to) = s.arc_of(e);
        debug_assert_eq!(from, *node_stack.last().unwrap(), "walk is connected");
        arc_stack.push(*e);
        if let Some(&p) = pos.get(&to) {
            let cycle = arc_stack.split_off(p);
            for dropped in node_stack.split_off(p + 1) {
                pos.remove(&dropped);
            }
            cycles.push(cycle);
        } else {
            node_stack.push(to);
            pos.insert(to, node_stack.len() - 1);
        }
    }
    debug_assert!(arc_stack.is_empty(), "walk must be closed");
    cycles
}

/// From a violating non-tree edge, extracts an alternating cycle with an odd
/// number of violating edges (equivalently, odd red count). Rotating the
/// base matching along it flips the red-count parity.
pub fn extract_parity_flipping_cycle(
    s: &RelevanceStructure,
    comp: &Component,
    tree: &TreeLabels,
    bad_edge: &Edge,
) -> Result<Vec<Edge>, SolverError> {
    if tree.tree_edges.contains(bad_edge)
        || !comp.edges.contains(bad_edge)
        || !tree.violates(s, bad_edge)
    {
        return Err(SolverError::NotAViolatingNonTreeEdge);
    }
    let (from, to) = s.arc_of(bad_edge);

    // Back edge: the head is an ancestor of the tail; the tree path plus the
    // bad edge already forms the cycle, with exactly one violation.
    if tree.is_ancestor(to, from) {
        let mut cycle = tree.path_down(to, from);
        cycle.push(*bad_edge);
        return pick_checked(s, tree, to, &cycle, 1);
    }

    // Forward or cross edge: close a circuit through the lowest common
    // ancestor using some directed path from the head back up.
    let adj = s.component_arcs(comp);
    let lca = tree.lca(from, to);
    let path = bfs_arc_path(&adj, to, lca).ok_or_else(|| {
        SolverError::Internal("no directed path to lca in strongly connected component".into())
    })?;
    let path_violations = path.iter().filter(|e| tree.violates(s, e)).count();

    let mut walk = path;
    if path_violations % 2 == 1 {
        walk.extend(tree.path_down(lca, to));
    } else {
        walk.extend(tree.path_down(lca, from));
        walk.push(*bad_edge);
    }
    let total: usize = walk.iter().filter(|e| tree.violates(s, e)).count();
    pick_checked(s, tree, to, &walk, total)
}

fn pick_checked(
    s: &RelevanceStructure,
    tree: &TreeLabels,
    start: usize,
    walk: &[Edge],
    total_violations: usize,
) -> Result<Vec<Edge>, SolverError> {
    debug_assert_eq!(total_violations % 2, 1);
    for cycle in simple_cycles(s, start, walk) {
        let violations = cycle.iter().filter(|e| tree.violates(s, e)).count();
        if violations % 2 == 1 {
            let reds = cycle.iter().filter(|e| e.color == Color::Red).count();
            if reds % 2 != 1 {
                return Err(SolverError::Internal(
                    "odd-violation cycle with even red count".into(),
                ));
            }
            return Ok(cycle);
        }
    }
    Err(SolverError::Internal(
        "no odd-violation cycle in circuit decomposition".into(),
    ))
}

/// Full solve with statistics.
pub fn solve_parity_with_stats(
    g: &ColoredBipartiteGraph,
    target: ParityTarget,
) -> Result<(ParityResult, SolveStats), SolverError> {
    let mut stats = SolveStats::default();
    if g.n_left() != g.n_right() {
        return Ok((
            ParityResult::NoPerfectMatching(NoMatchingWitness::SideMismatch {
                n_left: g.n_left(),
                n_right: g.n_right(),
            }),
            stats,
        ));
    }
    let m0 = match find_perfect_matching(g) {
        Some(m) => m,
        None => {
            let w = hall_violator(g)
                .ok_or_else(|| SolverError::Internal("missing Hall violator".into()))?;
            return Ok((
                ParityResult::NoPerfectMatching(NoMatchingWitness::Hall(w)),
                stats,
            ));
        }
    };
    if target.matches(m0.red_count()) {
        return Ok((ParityResult::MatchingFound(m0), stats));
    }

    let s = relevant_edges(g, &m0)?;
    stats.components = s.components.len();
    stats.relevant_edges = s.relevant.len();

    let mut labels: BTreeMap<usize, bool> = BTreeMap::new();
    let n = g.n_left();
    for comp in &s.components {
        if comp.edges.len() == 1 {
            // Forced edge: any consistent choice works; default left to 1.
            let e = comp.edges[0];
            labels.insert(e.u, true);
            labels.insert(n + e.v, e.color == Color::Red);
            continue;
        }
        let tree = bfs_tree_labels(&s, comp)?;
        let bad = comp
            .edges
            .iter()
            .find(|e| !tree.tree_edges.contains(e) && tree.violates(&s, e));
        if let Some(bad_edge) = bad {
            debug_assert!(
                !s.base.contains(bad_edge),
                "non-tree edges are non-matching"
            );
            let cycle = extract_parity_flipping_cycle(&s, comp, &tree, bad_edge)?;
            let rotated = s
                .base
                .toggled(&cycle)
                .map_err(|e| SolverError::Internal(format!("rotation broke matching: {e}")))?;
            stats.rotations = 1;
            if !rotated.is_perfect_on(g) || !target.matches(rotated.red_count()) {
                return Err(SolverError::Internal(
                    "rotated matching lost perfection or parity".into(),
                ));
            }
            return Ok((ParityResult::MatchingFound(rotated), stats));
        }
        labels.extend(tree.labels.iter());
    }

    // Every relevant edge is consistent with the assembled labeling.
    let left: Vec<bool> = (0..n)
        .map(|u| labels.get(&u).copied().unwrap_or(false))
        .collect();
    let right: Vec<bool> = (0..n)
        .map(|v| labels.get(&(n + v)).copied().unwrap_or(false))
        .collect();
    let certificate = Labeling::new(left, right, target);
    for e in &s.relevant {
        if edge_violates(e, &certificate) {
            return Err(SolverError::Internal(
                "certificate violates a relevant edge".into(),
            ));
        }
    }
    // Parity validity is forced by the identity applied to the base
    // matching; assert rather than assume.
    if !certificate.is_parity_valid() {
        return Err(SolverError::Internal("certificate has wrong parity".into()));
    }
    Ok((ParityResult::Certificate(certificate), stats))
}

pub fn solve_parity(
    g: &ColoredBipartiteGraph,
    target: ParityTarget,
) -> Result<ParityResult, SolverError> {
    solve_parity_with_stats(g, target).map(|(r, _)| r)
}

/// Number of edges of a two-colored cycle violating a vertex labeling;
/// edge `i` joins vertices `i` and `i+1 (mod len)`.
pub fn cycle_violation_count(colors: &[Color], labels: &[bool]) -> usize {
    let len = colors.len();
    (0..len)
        .filter(|&i| {
            let equal = labels[i] == labels[(i + 1) % len];
            match colors[i] {
                Color::Blue => equal,
                Color::Red => !equal,
            }
        })
        .count()
}

/// Verifies a solver outcome against the graph it was produced from.
pub fn check_result(
    g: &ColoredBipartiteGraph,
    target: ParityTarget,
    result: &ParityResult,
) -> Result<(), String> {
    match result {
        ParityResult::MatchingFound(m) => {
            if !m.is_perfect_on(g) {
                return Err("matching is not perfect".into());
            }
            if !target.matches(m.red_count()) {
                return Err("matching has wrong red parity".into());
            }
            Ok(())
        }
        ParityResult::Certificate(l) => {
            if !l.matches_graph(g) {
                return Err("certificate has wrong size".into());
            }
            if l.target() != target || !l.is_parity_valid() {
                return Err("certificate is not parity-valid for the target".into());
            }
            let m0 = find_perfect_matching(g).ok_or("certificate for graph without PM")?;
            let s = relevant_edges(g, &m0).map_err(|e| e.to_string())?;
            for e in &s.relevant {
                if edge_violates(e, l) {
                    return Err(format!(
                        "relevant edge ({},{},{:?}) violates",
                        e.u, e.v, e.color
                    ));
                }
            }
            Ok(())
        }
        ParityResult::NoPerfectMatching(w) => match w {
            NoMatchingWitness::SideMismatch { n_left, n_right } => {
                if n_left == n_right {
                    return Err("side-mismatch witness on square graph".into());
                }
                Ok(())
            }
            NoMatchingWitness::Hall(h) => {
                if !h.check(g) {
                    return Err("Hall violator fails to check".into());
                }
                Ok(())
            }
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::enumerate::{brute_force_parity_decision, enumerate_perfect_matchings, EnumCaps};

    fn fig1_style() -> ColoredBipartiteGraph {
        ColoredBipartiteGraph::new(
            2,
            2,
            vec![
                Edge::new(0, 1, Color::Red),
                Edge::new(1, 0, Color::Red),
                Edge::new(0, 0, Color::Blue),
                Edge::new(1, 1, Color::Blue),
            ],
        )
        .unwrap()
    }

    #[test]
    fn complete_double_n1_odd() {
        let g = ColoredBipartiteGraph::complete_double(1).unwrap();
        match solve_parity(&g, ParityTarget::Odd).unwrap() {
            ParityResult::MatchingFound(m) => {
                assert_eq!(m.edges(), &[Edge::new(0, 0, Color::Red)]);
            }
            other => panic!("expected matching, got {other:?}"),
        }
    }

    #[test]
    fn complete_double_n2_odd() {
        let g = ColoredBipartiteGraph::complete_double(2).unwrap();
        match solve_parity(&g, ParityTarget::Odd).unwrap() {
            ParityResult::MatchingFound(m) => {
                assert!(m.is_perfect_on(&g));
                assert!(m.red_count() == 1 || m.red_count() == 3);
            }
            other => panic!("expected matching, got {other:?}"),
        }
    }

    #[test]
    fn fig1_certificate() {
        let g = fig1_style();
        let result = solve_parity(&g, ParityTarget::Odd).unwrap();
        match &result {
            ParityResult::Certificate(l) => {
                assert!(l.is_parity_valid());
            }
            other => panic!("expected certificate, got {other:?}"),
        }
        check_result(&g, ParityTarget::Odd, &result).unwrap();
        // The same graph does have an even-red matching.
        match solve_parity(&g, ParityTarget::Even).unwrap() {
            ParityResult::MatchingFound(m) => assert_eq!(m.red_count() % 2, 0),
            other => panic!("expected matching, got {other:?}"),
        }
    }

    #[test]
    fn no_perfect_matching_witnesses() {
        let g = ColoredBipartiteGraph::new(2, 2, vec![Edge::new(0, 0, Color::Red)]).unwrap();
        match solve_parity(&g, ParityTarget::Odd).unwrap() {
            ParityResult::NoPerfectMatching(NoMatchingWitness::Hall(h)) => assert!(h.check(&g)),
            other => panic!("expected Hall witness, got {other:?}"),
        }
        let g = ColoredBipartiteGraph::new(
            2,
            1,
            vec![Edge::new(0, 0, Color::Red), Edge::new(1, 0, Color::Blue)],
        )
        .unwrap();
        assert!(matches!(
            solve_parity(&g, ParityTarget::Odd).unwrap(),
            ParityResult::NoPerfectMatching(NoMatchingWitness::SideMismatch { .. })
        ));
    }

    #[test]
    fn relevance_on_complete_double_n2() {
        let g = ColoredBipartiteGraph::complete_double(2).unwrap();
        let m0 = find_perfect_matching(&g).unwrap();
        let s = relevant_edges(&g, &m0).unwrap();
        assert_eq!(s.relevant.len(), 8);
        assert_eq!(s.components.len(), 1);
        assert!(s.forced.is_empty());
    }

    #[test]
    fn relevance_is_matching_independent() {
        let caps = EnumCaps::default();
        let g = fig1_style();
        let pms = enumerate_perfect_matchings(&g, &caps).unwrap();
        assert_eq!(pms.len(), 2);
        let structures: Vec<_> = pms.iter().map(|m| relevant_edges(&g, m).unwrap()).collect();
        for s in &structures {
            assert_eq!(s.relevant.len(), 4);
            assert_eq!(s.components.len(), 1);
        }
        assert_eq!(structures[0].relevant, structures[1].relevant);
    }

    #[test]
    fn unique_matching_gives_forced_components() {
        let g = ColoredBipartiteGraph::new(
            2,
            2,
            vec![Edge::new(0, 0, Color::Red), Edge::new(1, 1, Color::Blue)],
        )
        .unwrap();
        let m0 = find_perfect_matching(&g).unwrap();
        let s = relevant_edges(&g, &m0).unwrap();
        assert_eq!(s.relevant.len(), 2);
        assert_eq!(s.forced.len(), 2);
    }

    #[test]
    fn relevance_agrees_with_brute_force_membership() {
        // An edge is relevant iff it lies in some perfect matching.
        let caps = EnumCaps::default();
        let mut rng = crate::seeding::rng_from(5);
        for _ in 0..200 {
            let n = 1 + (rand::Rng::random_range(&mut rng, 0..5usize));
            let g = crate::corpus::random_square_graph(n, 0.5, 0.5, &mut rng);
            let Some(m0) = find_perfect_matching(&g) else {
                continue;
            };
            let s = relevant_edges(&g, &m0).unwrap();
            let pms = enumerate_perfect_matchings(&g, &caps).unwrap();
            for e in g.edges() {
                let in_some = pms.iter().any(|m| m.contains(e));
                let relevant = s.relevant.contains(e);
                assert_eq!(in_some, relevant, "edge {e:?} in {}", g.to_text());
            }
        }
    }

    #[test]
    fn solver_matches_oracle_small() {
        let caps = EnumCaps::default();
        let mut rng = crate::seeding::rng_from(99);
        for trial in 0..500 {
            let n = 1 + (rand::Rng::random_range(&mut rng, 0..4usize));
            let g = crate::corpus::random_square_graph(n, 0.45, 0.45, &mut rng);
            for target in [ParityTarget::Odd, ParityTarget::Even] {
                let expected = brute_force_parity_decision(&g, target, &caps).unwrap();
                let result = solve_parity(&g, target).unwrap();
                check_result(&g, target, &result).unwrap();
                let got = matches!(result, ParityResult::MatchingFound(_));
                assert_eq!(got, expected, "trial {trial}: {}", g.to_text());
            }
        }
    }

    #[test]
    fn parallel_pair_always_rotatable() {
        // A single doubled pair plus forced straight edges: the solver must
        // find whichever parity is requested.
        let g = ColoredBipartiteGraph::new(
            3,
            3,
            vec![
                Edge::new(0, 0, Color::Red),
                Edge::new(0, 0, Color::Blue),
                Edge::new(1, 1, Color::Red),
                Edge::new(2, 2, Color::Blue),
            ],
        )
        .unwrap();
        for target in [ParityTarget::Odd, ParityTarget::Even] {
            match solve_parity(&g, target).unwrap() {
                ParityResult::MatchingFound(m) => assert!(target.matches(m.red_count())),
                other => panic!("expected matching for {target:?}, got {other:?}"),
            }
        }
    }

    #[test]
    fn determinism() {
        let g = ColoredBipartiteGraph::complete_double(4).unwrap();
        let a = solve_parity(&g, ParityTarget::Odd).unwrap();
        let b = solve_parity(&g, ParityTarget::Odd).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn extract_cycle_on_parallel_pair() {
        // Base matching takes the red edge; the blue parallel edge is the
        // only non-tree edge, violates any consistent tree labeling, and
        // closes the 2-cycle with one violation and one red edge.
        let g = ColoredBipartiteGraph::complete_double(1).unwrap();
        let m0 = Matching::new(vec![Edge::new(0, 0, Color::Red)]).unwrap();
        let s = relevant_edges(&g, &m0).unwrap();
        assert_eq!(s.components.len(), 1);
        let comp = &s.components[0];
        let tree = bfs_tree_labels(&s, comp).unwrap();
        let blue = Edge::new(0, 0, Color::Blue);
        let cycle = extract_parity_flipping_cycle(&s, comp, &tree, &blue).unwrap();
        assert_eq!(cycle.len(), 2);
        assert_eq!(cycle.iter().filter(|e| e.color == Color::Red).count(), 1);
        let rotated = m0.toggled(&cycle).unwrap();
        assert!(rotated.is_perfect_on(&g));
        assert_eq!(rotated.red_count(), 0);

        // Tree edges and consistent edges are rejected as bad edges.
        let red = Edge::new(0, 0, Color::Red);
        assert_eq!(
            extract_parity_flipping_cycle(&s, comp, &tree, &red),
            Err(SolverError::NotAViolatingNonTreeEdge)
        );
    }

    #[test]
    fn extract_cycle_through_longer_component() {
        // A 6-cycle component: straight blue matching, red cross edges
        // closing one alternating cycle through all six vertices.
        let g = ColoredBipartiteGraph::new(
            3,
            3,
            vec![
                Edge::new(0, 0, Color::Blue),
                Edge::new(1, 1, Color::Blue),
                Edge::new(2, 2, Color::Blue),
                Edge::new(1, 0, Color::Red),
                Edge::new(2, 1, Color::Red),
                Edge::new(0, 2, Color::Red),
            ],
        )
        .unwrap();
        let m0 = Matching::new(vec![
            Edge::new(0, 0, Color::Blue),
            Edge::new(1, 1, Color::Blue),
            Edge::new(2, 2, Color::Blue),
        ])
        .unwrap();
        let s = relevant_edges(&g, &m0).unwrap();
        assert_eq!(s.relevant.len(), 6);
        assert_eq!(s.components.len(), 1);
        let tree = bfs_tree_labels(&s, &s.components[0]).unwrap();
        let bad = s.components[0]
            .edges
            .iter()
            .find(|e| !tree.tree_edges.contains(e) && tree.violates(&s, e))
            .expect("a violating non-tree edge exists: the 6-cycle has odd red count");
        let cycle = extract_parity_flipping_cycle(&s, &s.components[0], &tree, bad).unwrap();
        assert_eq!(cycle.len() % 2, 0);
        assert_eq!(
            cycle.iter().filter(|e| e.color == Color::Red).count() % 2,
            1
        );
        let rotated = m0.toggled(&cycle).unwrap();
        assert!(rotated.is_perfect_on(&g));
        assert!(ParityTarget::Odd.matches(rotated.red_count()));
    }

    #[test]
    fn cycle_violation_parity_small() {
        // Length-4 alternating cycle: red, blue, red, blue has 2 reds.
        let colors = [Color::Red, Color::Blue, Color::Red, Color::Blue];
        for bits in 0..16u32 {
            let labels: Vec<bool> = (0..4).map(|i| bits >> i & 1 == 1).collect();
            let v = cycle_violation_count(&colors, &labels);
            assert_eq!(v % 2, 0, "even-red cycle must have even violations");
        }
    }
}
