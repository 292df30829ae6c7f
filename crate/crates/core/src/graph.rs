//! Synthesis flow graphs: coreference merging, edge lifting, cycle checks,
//! topological order and DOT rendering.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap, HashMap};
use std::fmt::Write as _;

use crate::diag::{Diagnostic, DiagnosticKind};
use crate::docmodel::{CoarseGroup, EdgeLabel, Entity, Relation, VertexLabel};
use crate::error::{Error, Result};

/// Partition of entities into coreference clusters.
#[derive(Debug, Clone, Default)]
pub struct ClusterMap {
    /// Members of each cluster, in document order. Clusters are ordered by
    /// their first member.
    pub clusters: Vec<Vec<String>>,
    cluster_of: HashMap<String, usize>,
}

impl ClusterMap {
    pub fn cluster_of(&self, entity_id: &str) -> Option<usize> {
        self.cluster_of.get(entity_id).copied()
    }

    pub fn len(&self) -> usize {
        self.clusters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clusters.is_empty()
    }
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            self.0[x] = self.0[self.0[x]];
            x = self.0[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Connected components of the undirected Coreference graph. Relations that
/// reference unknown entities are ignored.
pub fn merge_coreference(entities: &[Entity], relations: &[Relation]) -> (ClusterMap, Vec<Diagnostic>) {
    let mut order: Vec<&Entity> = entities.iter().collect();
    order.sort_by(|a, b| a.head().cmp(&b.head()).then(a.id.cmp(&b.id)));
    let index: HashMap<&str, usize> = order.iter().enumerate().map(|(i, e)| (e.id.as_str(), i)).collect();
    let mut uf = UnionFind((0..order.len()).collect());
    for r in relations.iter().filter(|r| r.label == EdgeLabel::Coreference) {
        if let (Some(&a), Some(&b)) = (index.get(r.from.as_str()), index.get(r.to.as_str())) {
            uf.union(a, b);
        }
    }
    // roots are the smallest index in their component, so iterating in
    // document order yields clusters ordered by their first member
    let mut root_to_cluster = HashMap::new();
    let mut map = ClusterMap::default();
    for i in 0..order.len() {
        let root = uf.find(i);
        let c = *root_to_cluster.entry(root).or_insert_with(|| {
            map.clusters.push(Vec::new());
            map.clusters.len() - 1
        });
        map.clusters[c].push(order[i].id.clone());
        map.cluster_of.insert(order[i].id.clone(), c);
    }
    let mut diags = Vec::new();
    for members in &map.clusters {
        let groups: Vec<CoarseGroup> = members.iter().map(|m| order[index[m.as_str()]].coarse()).collect();
        if groups.windows(2).any(|w| w[0] != w[1]) {
            diags.push(Diagnostic::new(
                DiagnosticKind::CrossGroupCoreference,
                format!("coreference cluster {{{}}} mixes coarse groups", members.join(", ")),
            ));
        }
    }
    (map, diags)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GraphNode {
    /// Id of the representative entity.
    pub id: String,
    pub label: VertexLabel,
    pub members: Vec<String>,
    pub representative: Entity,
}

impl GraphNode {
    pub fn text(&self) -> &str {
        &self.representative.text
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct GraphEdge {
    pub from: String,
    pub to: String,
    pub label: EdgeLabel,
    pub rule: Option<String>,
}

/// Flow graph over coreference clusters. Nodes are ordered by the first
/// fragment of their representative.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SynthesisGraph {
    pub nodes: Vec<GraphNode>,
    pub edges: Vec<GraphEdge>,
}

impl SynthesisGraph {
    pub fn node(&self, id: &str) -> Option<&GraphNode> {
        self.nodes.iter().find(|n| n.id == id)
    }

    pub fn next_edges(&self) -> impl Iterator<Item = &GraphEdge> {
        self.edges.iter().filter(|e| e.label == EdgeLabel::Next)
    }

    fn node_positions(&self) -> HashMap<&str, usize> {
        self.nodes.iter().enumerate().map(|(i, n)| (n.id.as_str(), i)).collect()
    }

    /// Representatives and lifted edges as a flat entity/relation layer.
    pub fn as_annotations(&self) -> (Vec<Entity>, Vec<Relation>, BTreeMap<String, String>) {
        let entities = self.nodes.iter().map(|n| n.representative.clone()).collect();
        let mut rules = BTreeMap::new();
        let relations = self
            .edges
            .iter()
            .enumerate()
            .map(|(i, e)| {
                let id = format!("R{}", i + 1);
                if let Some(r) = &e.rule {
                    rules.insert(id.clone(), r.clone());
                }
                Relation::new(id, e.label, e.from.clone(), e.to.clone())
            })
            .collect();
        (entities, relations, rules)
    }
}

/// Builds the flow graph. Coreference relations merge their endpoints;
/// Condition and Next relations are lifted onto clusters, duplicates
/// collapse onto the first occurrence, and self-loops created by merging are
/// dropped. `rules` maps relation ids to an attribution carried onto the
/// lifted edge.
pub fn build_graph(
    entities: &[Entity],
    relations: &[Relation],
    rules: &BTreeMap<String, String>,
) -> Result<(SynthesisGraph, Vec<Diagnostic>)> {
    let (clusters, mut diags) = merge_coreference(entities, relations);
    let by_id: HashMap<&str, &Entity> = entities.iter().map(|e| (e.id.as_str(), e)).collect();

    let mut nodes = Vec::with_capacity(clusters.len());
    for members in &clusters.clusters {
        let rep = by_id[members[0].as_str()];
        if members.iter().any(|m| by_id[m.as_str()].label != rep.label) {
            diags.push(Diagnostic::new(
                DiagnosticKind::MixedLabelCluster,
                format!("cluster of {} has mixed labels; keeping {}", rep.id, rep.label),
            ));
        }
        nodes.push(GraphNode {
            id: rep.id.clone(),
            label: rep.label,
            members: members.clone(),
            representative: rep.clone(),
        });
    }

    let mut seen = HashMap::new();
    let mut edges = Vec::new();
    for r in relations.iter().filter(|r| r.label != EdgeLabel::Coreference) {
        let (Some(a), Some(b)) = (clusters.cluster_of(&r.from), clusters.cluster_of(&r.to)) else {
            return Err(Error::DanglingReference {
                relation: r.id.clone(),
                target: if clusters.cluster_of(&r.from).is_none() { r.from.clone() } else { r.to.clone() },
            });
        };
        if a == b {
            diags.push(Diagnostic::new(
                DiagnosticKind::SelfLoopDropped,
                format!("{} {} -> {} collapses onto one cluster", r.label, r.from, r.to),
            ));
            continue;
        }
        if seen.insert((a, b, r.label), ()).is_some() {
            continue;
        }
        edges.push((a, b, GraphEdge {
            from: nodes[a].id.clone(),
            to: nodes[b].id.clone(),
            label: r.label,
            rule: rules.get(&r.id).cloned(),
        }));
    }
    edges.sort_by(|x, y| (x.0, x.1, x.2.label).cmp(&(y.0, y.1, y.2.label)));
    let graph = SynthesisGraph {
        nodes,
        edges: edges.into_iter().map(|(_, _, e)| e).collect(),
    };
    if let Some(cycle) = find_next_cycle(&graph) {
        return Err(Error::CycleDetected(cycle));
    }
    Ok((graph, diags))
}

fn next_adjacency(g: &SynthesisGraph) -> Vec<Vec<usize>> {
    let pos = g.node_positions();
    let mut adj = vec![Vec::new(); g.nodes.len()];
    for e in g.next_edges() {
        adj[pos[e.from.as_str()]].push(pos[e.to.as_str()]);
    }
    adj
}

/// Node ids of one cycle in the Next subgraph (first node repeated at the
/// end), if any.
pub fn find_next_cycle(g: &SynthesisGraph) -> Option<Vec<String>> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        New,
        Active,
        Done,
    }
    let adj = next_adjacency(g);
    let mut mark = vec![Mark::New; adj.len()];
    let mut parent = vec![usize::MAX; adj.len()];
    for root in 0..adj.len() {
        if mark[root] != Mark::New {
            continue;
        }
        // iterative DFS: (node, next child index)
        let mut stack = vec![(root, 0usize)];
        mark[root] = Mark::Active;
        while let Some(&mut (v, ref mut i)) = stack.last_mut() {
            if let Some(&w) = adj[v].get(*i) {
                *i += 1;
                match mark[w] {
                    Mark::New => {
                        mark[w] = Mark::Active;
                        parent[w] = v;
                        stack.push((w, 0));
                    }
                    Mark::Active => {
                        let mut cycle = vec![w];
                        let mut x = v;
                        while x != w {
                            cycle.push(x);
                            x = parent[x];
                        }
                        cycle.push(w);
                        cycle.reverse();
                        return Some(cycle.into_iter().map(|k| g.nodes[k].id.clone()).collect());
                    }
                    Mark::Done => {}
                }
            } else {
                mark[v] = Mark::Done;
                stack.pop();
            }
        }
    }
    None
}

/// Topological order of all nodes with respect to Next edges, breaking ties
/// by document position.
pub fn topo_order(g: &SynthesisGraph) -> Result<Vec<String>> {
    let adj = next_adjacency(g);
    let mut indeg = vec![0usize; adj.len()];
    for targets in &adj {
        for &t in targets {
            indeg[t] += 1;
        }
    }
    let mut ready: BinaryHeap<Reverse<usize>> =
        (0..adj.len()).filter(|&i| indeg[i] == 0).map(Reverse).collect();
    let mut order = Vec::with_capacity(adj.len());
    while let Some(Reverse(v)) = ready.pop() {
        order.push(v);
        for &t in &adj[v] {
            indeg[t] -= 1;
            if indeg[t] == 0 {
                ready.push(Reverse(t));
            }
        }
    }
    if order.len() < adj.len() {
        return Err(Error::CycleDetected(find_next_cycle(g).unwrap_or_default()));
    }
    Ok(order.into_iter().map(|i| g.nodes[i].id.clone()).collect())
}

/// True if every node appears exactly once and no Next edge points
/// backwards.
pub fn is_topological(g: &SynthesisGraph, order: &[String]) -> bool {
    let rank: HashMap<&str, usize> = order.iter().enumerate().map(|(i, id)| (id.as_str(), i)).collect();
    rank.len() == g.nodes.len()
        && order.len() == g.nodes.len()
        && g.nodes.iter().all(|n| rank.contains_key(n.id.as_str()))
        && g.next_edges().all(|e| rank[e.from.as_str()] < rank[e.to.as_str()])
}

fn dot_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out
}

fn group_style(g: CoarseGroup) -> (&'static str, &'static str) {
    match g {
        CoarseGroup::Material => ("ellipse", "#f4a6a6"),
        CoarseGroup::Operation => ("box", "#a6d9a6"),
        CoarseGroup::Property => ("note", "#f7e59a"),
    }
}

/// Graphviz rendering: shape and colour by coarse group, solid arrows for
/// Next and dashed arrows for Condition.
pub fn to_dot(name: &str, g: &SynthesisGraph) -> String {
    let mut out = String::new();
    writeln!(out, "digraph \"{}\" {{", dot_escape(name)).unwrap();
    out.push_str("  rankdir=LR;\n  node [fontname=\"Helvetica\", style=filled];\n");
    for n in &g.nodes {
        let (shape, color) = group_style(n.label.coarse());
        let label = format!("{}\n{}", n.text(), n.label);
        writeln!(
            out,
            "  \"{}\" [label=\"{}\", shape={}, fillcolor=\"{}\"];",
            dot_escape(&n.id),
            dot_escape(&label),
            shape,
            color
        )
        .unwrap();
    }
    for e in &g.edges {
        let style = match e.label {
            EdgeLabel::Condition => "dashed",
            _ => "solid",
        };
        writeln!(
            out,
            "  \"{}\" -> \"{}\" [label=\"{}\", style={}];",
            dot_escape(&e.from),
            dot_escape(&e.to),
            e.label,
            style
        )
        .unwrap();
    }
    out.push_str("}\n");
    out
}
