//! Corona products and the labeled graph `S_N^G` of the symmetric group.
//!
//! `G ∘ H` keeps one copy of `G` and attaches a fresh copy of `H` to every
//! vertex `i` of `G`, joining `i` to all vertices of its copy. Nesting is
//! left-associated: `((G_0 ∘ G_1) ∘ G_2) ∘ ...`.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::perm::{Permutation, PiSet, Word};

pub const MAX_SYM_GROUP_N: usize = 9;

/// Where a vertex came from: factor `G_factor`, attached to vertex `copy` of
/// the previous stage, at 1-based `position` within the factor.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vertex {
    pub label: Option<Word>,
    pub factor: usize,
    pub copy: usize,
    pub position: usize,
    /// Vertex of the previous stage this one hangs from; `None` in `G_0`.
    pub parent: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabeledGraph {
    vertices: Vec<Vertex>,
    edges: BTreeSet<(usize, usize)>,
    /// `(n_j, m_j)` of every factor used so far.
    factor_sizes: Vec<(usize, usize)>,
    /// Degree sequence of every factor, by position.
    factor_degrees: Vec<Vec<usize>>,
}

fn ordered(u: usize, v: usize) -> (usize, usize) {
    if u < v {
        (u, v)
    } else {
        (v, u)
    }
}

impl LabeledGraph {
    /// Simple graph on `n` vertices; loops, parallel edges and out-of-range
    /// endpoints are rejected.
    pub fn from_edges(n: usize, edge_list: &[(usize, usize)]) -> Result<Self> {
        let mut edges = BTreeSet::new();
        for &(u, v) in edge_list {
            if u >= n || v >= n {
                return Err(Error::InvalidGraph(format!("edge ({u}, {v}) outside {n} vertices")));
            }
            if u == v {
                return Err(Error::InvalidGraph(format!("loop at {u}")));
            }
            if !edges.insert(ordered(u, v)) {
                return Err(Error::InvalidGraph(format!("parallel edge ({u}, {v})")));
            }
        }
        let vertices =
            (0..n).map(|s| Vertex { label: None, factor: 0, copy: 0, position: s + 1, parent: None }).collect();
        let mut g = LabeledGraph { vertices, edges, factor_sizes: Vec::new(), factor_degrees: Vec::new() };
        g.factor_sizes.push((n, g.edges.len()));
        g.factor_degrees.push(g.degrees());
        Ok(g)
    }

    pub fn path(n: usize) -> Self {
        let edges: Vec<_> = (1..n).map(|s| (s - 1, s)).collect();
        LabeledGraph::from_edges(n, &edges).expect("path is simple")
    }

    pub fn complete(n: usize) -> Self {
        let edges: Vec<_> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
        LabeledGraph::from_edges(n, &edges).expect("complete graph is simple")
    }

    /// Attaches labels by position. Only valid on a graph with one factor.
    pub fn with_labels(mut self, labels: Vec<Word>) -> Result<Self> {
        if labels.len() != self.vertices.len() {
            return Err(Error::SizeMismatch { expected: self.vertices.len(), found: labels.len() });
        }
        for (v, label) in self.vertices.iter_mut().zip(labels) {
            v.label = Some(label);
        }
        Ok(self)
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn vertex(&self, id: usize) -> &Vertex {
        &self.vertices[id]
    }

    pub fn edges(&self) -> &BTreeSet<(usize, usize)> {
        &self.edges
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.edges.contains(&ordered(u, v))
    }

    pub fn factor_sizes(&self) -> &[(usize, usize)] {
        &self.factor_sizes
    }

    /// Number of corona products applied.
    pub fn depth(&self) -> usize {
        self.factor_sizes.len() - 1
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.vertices.len()];
        for &(u, v) in &self.edges {
            d[u] += 1;
            d[v] += 1;
        }
        d
    }

    pub fn neighbors(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.vertices.len()];
        for &(u, v) in &self.edges {
            adj[u].push(v);
            adj[v].push(u);
        }
        adj
    }

    pub fn is_labeled(&self) -> bool {
        self.vertices.iter().all(|v| v.label.is_some())
    }

    pub fn find_label(&self, word: &Word) -> Option<usize> {
        self.vertices.iter().position(|v| v.label.as_ref() == Some(word))
    }

    pub fn find_perm(&self, perm: &Permutation) -> Option<usize> {
        self.vertices.iter().position(|v| v.label.as_ref().is_some_and(|w| &w.evaluate() == perm))
    }

    pub fn label_string(&self, id: usize) -> Option<String> {
        self.vertices[id].label.as_ref().map(Word::to_string)
    }

    /// Vertex and edge counts of each nesting stage, read from provenance.
    pub fn stage_counts(&self) -> Vec<(usize, usize)> {
        (0..self.factor_sizes.len())
            .map(|k| {
                let v = self.vertices.iter().filter(|x| x.factor <= k).count();
                let e = self
                    .edges
                    .iter()
                    .filter(|&&(a, b)| self.vertices[a].factor <= k && self.vertices[b].factor <= k)
                    .count();
                (v, e)
            })
            .collect()
    }

    /// Checks `|V_k| = |V_{k-1}|(1 + n_k)` and
    /// `|E_k| = |E_{k-1}| + |V_{k-1}|(n_k + m_k)` at every stage.
    pub fn recurrence_check(&self) -> Result<()> {
        let stages = self.stage_counts();
        if stages[0] != self.factor_sizes[0] {
            return Err(Error::InvalidGraph(format!("stage 0 has counts {:?}", stages[0])));
        }
        for k in 1..stages.len() {
            let (v_prev, e_prev) = stages[k - 1];
            let (n_k, m_k) = self.factor_sizes[k];
            let expected = (v_prev * (1 + n_k), e_prev + v_prev * (n_k + m_k));
            if stages[k] != expected {
                return Err(Error::InvalidGraph(format!(
                    "stage {k} has counts {:?}, recurrence gives {expected:?}",
                    stages[k]
                )));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> serde_json::Value {
        #[derive(Serialize)]
        struct VertexJson {
            id: usize,
            label: Option<String>,
            factor: usize,
            copy: usize,
            position: usize,
            neighbors: Vec<usize>,
        }
        let adj = self.neighbors();
        let vertices: Vec<VertexJson> = self
            .vertices
            .iter()
            .enumerate()
            .map(|(id, v)| {
                let mut neighbors = adj[id].clone();
                neighbors.sort_unstable();
                VertexJson {
                    id,
                    label: self.label_string(id),
                    factor: v.factor,
                    copy: v.copy,
                    position: v.position,
                    neighbors,
                }
            })
            .collect();
        serde_json::json!({
            "n_vertices": self.n_vertices(),
            "n_edges": self.n_edges(),
            "vertices": vertices,
        })
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::from("graph G {\n");
        for id in 0..self.vertices.len() {
            match self.label_string(id) {
                Some(l) => writeln!(out, "  {id} [label=\"{l}\"];").unwrap(),
                None => writeln!(out, "  {id};").unwrap(),
            }
        }
        for &(u, v) in &self.edges {
            writeln!(out, "  {u} -- {v};").unwrap();
        }
        out.push_str("}\n");
        out
    }
}

/// `G ∘ H`. Labels of attached vertices are `π·τ` when both factors are
/// labeled.
pub fn corona(g: &LabeledGraph, h: &LabeledGraph) -> Result<LabeledGraph> {
    if g.is_empty() {
        return Err(Error::InvalidGraph("corona needs a nonempty left factor".into()));
    }
    let factor = g.factor_sizes.len();
    let n_g = g.n_vertices();
    let n_h = h.n_vertices();
    let mut vertices = g.vertices.clone();
    let mut edges = g.edges.clone();
    vertices.reserve(n_g * n_h);
    for i in 0..n_g {
        let base = vertices.len();
        for (s, hv) in h.vertices.iter().enumerate() {
            let label = match (&g.vertices[i].label, &hv.label) {
                (Some(pi), Some(tau)) => Some(pi.concat(tau)?),
                _ => None,
            };
            vertices.push(Vertex { label, factor, copy: i, position: s + 1, parent: Some(i) });
            edges.insert((i, base + s));
        }
        for &(a, b) in &h.edges {
            edges.insert((base + a, base + b));
        }
    }
    let mut factor_sizes = g.factor_sizes.clone();
    factor_sizes.push((n_h, h.n_edges()));
    let mut factor_degrees = g.factor_degrees.clone();
    factor_degrees.push(h.degrees());
    Ok(LabeledGraph { vertices, edges, factor_sizes, factor_degrees })
}

#[derive(Clone, Debug)]
pub struct CoronaSpec {
    pub factors: Vec<LabeledGraph>,
}

pub fn nested_corona(spec: &CoronaSpec) -> Result<LabeledGraph> {
    if spec.factors.len() < 2 {
        return Err(Error::InvalidGraph(format!("nested corona needs at least 2 factors, got {}", spec.factors.len())));
    }
    if let Some(j) = spec.factors.iter().position(LabeledGraph::is_empty) {
        return Err(Error::InvalidGraph(format!("factor {j} is empty")));
    }
    let mut g = spec.factors[0].clone();
    for h in &spec.factors[1..] {
        g = corona(&g, h)?;
    }
    Ok(g)
}

/// `n_0 (1 + n_1) ... (1 + n_last)`.
pub fn vertex_count_formula(sizes: &[(usize, usize)]) -> usize {
    match sizes.split_first() {
        None => 0,
        Some((&(n0, _), rest)) => rest.iter().fold(n0, |acc, &(n, _)| acc * (1 + n)),
    }
}

/// `m_0 + Σ_j |V_j| (n_{j+1} + m_{j+1})`, with `|V_j|` the vertex count after
/// `j` products.
pub fn edge_count_formula(sizes: &[(usize, usize)]) -> usize {
    let Some((&(n0, m0), rest)) = sizes.split_first() else {
        return 0;
    };
    let mut vertices = n0;
    let mut edges = m0;
    for &(n, m) in rest {
        edges += vertices * (n + m);
        vertices *= 1 + n;
    }
    edges
}

/// The factors of `S_N^G`: the labeled edge `{I, s_0}` followed by the paths
/// `s_k, s_k s_{k-1}, ..., s_k ... s_0` for `k = 1, ..., N-2`.
pub fn sym_group_factors(n_symbols: usize) -> Result<Vec<LabeledGraph>> {
    if n_symbols < 2 {
        return Err(Error::Domain(format!("S_N^G needs N >= 2, got {n_symbols}")));
    }
    if n_symbols > MAX_SYM_GROUP_N {
        return Err(Error::Resource(format!("N = {n_symbols} exceeds the graph cap {MAX_SYM_GROUP_N}")));
    }
    let mut factors = vec![LabeledGraph::path(2).with_labels(PiSet::full(0).words(n_symbols)?)?];
    for k in 1..n_symbols - 1 {
        factors.push(LabeledGraph::path(k + 1).with_labels(PiSet::barred(k).words(n_symbols)?)?);
    }
    Ok(factors)
}

pub fn build_sym_group_graph(n_symbols: usize) -> Result<LabeledGraph> {
    let mut factors = sym_group_factors(n_symbols)?;
    if factors.len() == 1 {
        return Ok(factors.pop().expect("one factor"));
    }
    nested_corona(&CoronaSpec { factors })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DegreeMismatch {
    pub vertex: usize,
    pub label: Option<String>,
    pub expected: usize,
    pub actual: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DegreeReport {
    pub checked: usize,
    pub mismatches: Vec<DegreeMismatch>,
}

impl DegreeReport {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// Degree predicted from provenance alone: a vertex of factor `j` at position
/// `s` has `d_s^{(j)}` neighbors in its copy, one neighbor it hangs from when
/// `j ≥ 1`, and `n_l` neighbors for every later factor `l`.
pub fn expected_degree(graph: &LabeledGraph, id: usize) -> usize {
    let v = &graph.vertices[id];
    let later: usize = graph.factor_sizes[v.factor + 1..].iter().map(|&(n, _)| n).sum();
    let own = graph.factor_degrees[v.factor][v.position - 1];
    usize::from(v.factor > 0) + own + later
}

pub fn degree_check(graph: &LabeledGraph) -> Result<DegreeReport> {
    if !graph.is_labeled() {
        return Err(Error::InvalidGraph("degree check needs a labeled graph".into()));
    }
    let degrees = graph.degrees();
    let mismatches = (0..graph.n_vertices())
        .filter_map(|id| {
            let expected = expected_degree(graph, id);
            (expected != degrees[id]).then(|| DegreeMismatch {
                vertex: id,
                label: graph.label_string(id),
                expected,
                actual: degrees[id],
            })
        })
        .collect();
    Ok(DegreeReport { checked: graph.n_vertices(), mismatches })
}

/// Factor choices from the root edge down to `id`, as `(slot, index)` pins in
/// the convention of [`crate::sampling`]. Empty for the root `I`.
pub fn pin_path(graph: &LabeledGraph, id: usize) -> Vec<(usize, usize)> {
    let mut pins = Vec::new();
    let mut cur = Some(id);
    while let Some(c) = cur {
        let v = &graph.vertices[c];
        pins.push((v.factor, v.position - 1));
        cur = v.parent;
    }
    pins.reverse();
    if pins == [(0, 0)] {
        pins.clear();
    }
    pins
}

pub fn locate_word(word: &Word, graph: &LabeledGraph) -> Result<Vec<(usize, usize)>> {
    let id = graph.find_label(word).ok_or_else(|| Error::LabelNotFound(word.to_string()))?;
    Ok(pin_path(graph, id))
}

pub fn locate_perm(perm: &Permutation, graph: &LabeledGraph) -> Result<Vec<(usize, usize)>> {
    let id = graph.find_perm(perm).ok_or_else(|| Error::LabelNotFound(perm.to_string()))?;
    Ok(pin_path(graph, id))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TwoHalvesReport {
    pub component_sizes: Vec<usize>,
    pub edges_per_half: (usize, usize),
    pub edge_preserving: bool,
}

impl TwoHalvesReport {
    pub fn passed(&self) -> bool {
        self.component_sizes.len() == 2
            && self.component_sizes[0] == self.component_sizes[1]
            && self.edges_per_half.0 == self.edges_per_half.1
            && self.edge_preserving
    }
}

/// Deletes the root edge between vertices 0 and 1, and checks that the two
/// remaining components correspond under "same choices, other root".
pub fn two_halves_check(graph: &LabeledGraph) -> Result<TwoHalvesReport> {
    if graph.n_vertices() < 2 || !graph.has_edge(0, 1) || graph.factor_sizes[0].0 != 2 {
        return Err(Error::InvalidGraph("graph has no root edge (0, 1)".into()));
    }
    let adj = graph.neighbors();
    let mut component = vec![usize::MAX; graph.n_vertices()];
    let mut sizes = Vec::new();
    for start in 0..graph.n_vertices() {
        if component[start] != usize::MAX {
            continue;
        }
        let c = sizes.len();
        let mut size = 0;
        let mut queue = VecDeque::from([start]);
        component[start] = c;
        while let Some(u) = queue.pop_front() {
            size += 1;
            for &w in &adj[u] {
                if ordered(u, w) == (0, 1) || component[w] != usize::MAX {
                    continue;
                }
                component[w] = c;
                queue.push_back(w);
            }
        }
        sizes.push(size);
    }

    let key = |id: usize| {
        let mut path = pin_path(graph, id);
        if path.is_empty() {
            path.push((0, 0));
        }
        path
    };
    let by_key: HashMap<Vec<(usize, usize)>, usize> = (0..graph.n_vertices()).map(|id| (key(id), id)).collect();
    let mirror = |id: usize| {
        let mut k = key(id);
        k[0].1 = 1 - k[0].1;
        by_key.get(&k).copied()
    };

    let mut half_edges = (0, 0);
    let mut preserving = true;
    for &(u, v) in graph.edges() {
        if (u, v) == (0, 1) {
            continue;
        }
        if component[u] == component[0] {
            half_edges.0 += 1;
            match (mirror(u), mirror(v)) {
                (Some(a), Some(b)) if graph.has_edge(a, b) && component[a] == component[1] => {}
                _ => preserving = false,
            }
        } else {
            half_edges.1 += 1;
        }
    }
    Ok(TwoHalvesReport { component_sizes: sizes, edges_per_half: half_edges, edge_preserving: preserving })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(g: &LabeledGraph) -> Vec<String> {
        (0..g.n_vertices()).map(|id| g.label_string(id).unwrap()).collect()
    }

    #[test]
    fn corona_examples() {
        let g = corona(&LabeledGraph::path(2), &LabeledGraph::complete(3)).unwrap();
        assert_eq!((g.n_vertices(), g.n_edges()), (8, 13));

        let g = corona(&LabeledGraph::path(1), &LabeledGraph::path(1)).unwrap();
        assert_eq!((g.n_vertices(), g.n_edges()), (2, 1));
        assert!(g.has_edge(0, 1));

        let empty = LabeledGraph::path(0);
        assert!(matches!(corona(&empty, &LabeledGraph::path(2)), Err(Error::InvalidGraph(_))));
        assert!(LabeledGraph::from_edges(2, &[(0, 0)]).is_err());
        assert!(LabeledGraph::from_edges(2, &[(0, 1), (1, 0)]).is_err());
        assert!(LabeledGraph::from_edges(2, &[(0, 2)]).is_err());
    }

    #[test]
    fn nested_examples() {
        let spec = CoronaSpec { factors: vec![LabeledGraph::path(2), LabeledGraph::path(2)] };
        assert_eq!(nested_corona(&spec).unwrap().n_vertices(), 6);

        let factors = vec![LabeledGraph::path(2), LabeledGraph::path(2), LabeledGraph::path(3)];
        let g = nested_corona(&CoronaSpec { factors }).unwrap();
        assert_eq!(g.n_vertices(), 24);
        assert_eq!(vertex_count_formula(g.factor_sizes()), 24);
        assert_eq!(g.n_edges(), edge_count_formula(g.factor_sizes()));
        assert_eq!(g.n_edges(), 37);
        g.recurrence_check().unwrap();

        let spec = CoronaSpec { factors: vec![LabeledGraph::path(2)] };
        assert!(matches!(nested_corona(&spec), Err(Error::InvalidGraph(_))));
    }

    #[test]
    fn small_sym_group_graphs() {
        let g = build_sym_group_graph(2).unwrap();
        assert_eq!(labels(&g), vec!["I", "s0"]);
        assert_eq!(g.n_edges(), 1);

        let g = build_sym_group_graph(3).unwrap();
        assert_eq!(labels(&g), vec!["I", "s0", "s1", "s1 s0", "s0 s1", "s0 s1 s0"]);
        assert!(g.has_edge(0, 2) && g.has_edge(0, 3) && g.has_edge(2, 3));

        let g = build_sym_group_graph(4).unwrap();
        assert_eq!(g.n_vertices(), 24);
        assert!(g.find_label(&Word::parse_tokens(4, "s0 s1 s2 s1 s0").unwrap()).is_some());
        assert!(matches!(build_sym_group_graph(1), Err(Error::Domain(_))));
    }

    #[test]
    fn degree_examples() {
        let g = build_sym_group_graph(4).unwrap();
        let deg = g.degrees();
        let id = |t: &str| g.find_label(&Word::parse_tokens(4, t).unwrap()).unwrap();
        assert_eq!(deg[id("s1")], 5);
        assert_eq!(deg[id("I")], 6);
        assert!(degree_check(&g).unwrap().passed());

        let g3 = build_sym_group_graph(3).unwrap();
        assert_eq!(g3.degrees()[g3.find_label(&Word::parse_tokens(3, "s1 s0").unwrap()).unwrap()], 2);

        assert!(degree_check(&LabeledGraph::path(3)).is_err());
    }

    #[test]
    fn locate_examples() {
        let g = build_sym_group_graph(4).unwrap();
        let w = |t: &str| Word::parse_tokens(4, t).unwrap();
        assert_eq!(locate_word(&w("s0 s2 s1"), &g).unwrap(), vec![(0, 1), (2, 1)]);
        assert_eq!(locate_word(&w("I"), &g).unwrap(), vec![]);
        assert_eq!(locate_word(&w("s1 s0 s2"), &g).unwrap(), vec![(0, 0), (1, 1), (2, 0)]);
        assert_eq!(locate_word(&w("s0"), &g).unwrap(), vec![(0, 1)]);
        assert!(matches!(locate_word(&w("s2 s0"), &g), Err(Error::LabelNotFound(_))));
        let perm = w("s0 s2 s1").evaluate();
        assert_eq!(locate_perm(&perm, &g).unwrap(), vec![(0, 1), (2, 1)]);
    }

    #[test]
    fn two_halves() {
        for n in 2..=5 {
            let report = two_halves_check(&build_sym_group_graph(n).unwrap()).unwrap();
            assert!(report.passed(), "{n}: {report:?}");
        }
    }

    #[test]
    fn exports() {
        let g = build_sym_group_graph(2).unwrap();
        assert_eq!(g.to_dot(), "graph G {\n  0 [label=\"I\"];\n  1 [label=\"s0\"];\n  0 -- 1;\n}\n");
        let v = build_sym_group_graph(3).unwrap().to_json();
        assert_eq!(v["n_vertices"], 6);
        assert_eq!(v["n_edges"], 7);
        assert_eq!(v["vertices"][3]["label"], "s1 s0");
        assert_eq!(v["vertices"][0]["neighbors"], serde_json::json!([1, 2, 3]));
    }
}
