//! The large duplication property and the decision procedure built on it.
//!
//! A trim WTGh has the property iff some constrained representative state
//! is fed by a cycle of the dependency graph. The whole check is linear in
//! the size of the grammar.

use std::collections::{BTreeMap, BTreeSet};

use petgraph::algo::{astar, dijkstra, tarjan_scc};
use petgraph::graph::{DiGraph, NodeIndex};
use petgraph::visit::{Dfs, Reversed};
use petgraph::Direction;

use crate::error::{Error, Result};
use crate::grammar::{Wtg, SINK};
use crate::homomorphism::TreeHomomorphism;
use crate::substitution::{instantiate, witness_table};
use crate::terms::{Name, Position, Tree};
use crate::transform::{decompose, hom_image, linearize, trim, Decomposition, DEFAULT_CAP};

/// Edges `q' → q` for every production targeting `q` whose left-hand side
/// contains `q'`. The sink is not a node.
#[derive(Clone, Debug)]
pub struct DependencyGraph {
    graph: DiGraph<Name, ()>,
    index: BTreeMap<Name, NodeIndex>,
    edges: BTreeSet<(Name, Name)>,
    via: BTreeMap<(Name, Name), (usize, Position)>,
}

impl DependencyGraph {
    pub fn new(g: &Wtg) -> DependencyGraph {
        let mut graph = DiGraph::new();
        let mut index = BTreeMap::new();
        for q in g.states().iter().filter(|q| &***q != SINK) {
            index.insert(q.clone(), graph.add_node(q.clone()));
        }
        let mut edges = BTreeSet::new();
        let mut via: BTreeMap<(Name, Name), (usize, Position)> = BTreeMap::new();
        for (i, p) in g.productions().iter().enumerate() {
            let q = p.target();
            if &**q == SINK {
                continue;
            }
            for v in p.state_positions() {
                let q2 = p.state_at(&v).expect("state position");
                if &**q2 == SINK {
                    continue;
                }
                let key = (q2.clone(), q.clone());
                let free = p.constraints().class_of(&v).is_none();
                // prefer a realization without copies, then the first one
                let replace = match via.get(&key) {
                    None => true,
                    Some((j, w)) => free && g.production(*j).constraints().class_of(w).is_some(),
                };
                if replace {
                    via.insert(key.clone(), (i, v.clone()));
                }
                edges.insert(key);
            }
        }
        for (a, b) in &edges {
            graph.add_edge(index[a], index[b], ());
        }
        DependencyGraph {
            graph,
            index,
            edges,
            via,
        }
    }

    pub fn nodes(&self) -> impl Iterator<Item = &Name> + '_ {
        self.index.keys()
    }

    pub fn edges(&self) -> &BTreeSet<(Name, Name)> {
        &self.edges
    }

    /// A production and state position realizing the edge `from → to`.
    pub fn via(&self, from: &str, to: &str) -> Option<&(usize, Position)> {
        self.via.get(&(Name::from(from), Name::from(to)))
    }

    /// States lying on some cycle.
    pub fn cyclic_states(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        for scc in tarjan_scc(&self.graph) {
            let cyclic = scc.len() > 1 || self.graph.contains_edge(scc[0], scc[0]);
            if cyclic {
                out.extend(scc.into_iter().map(|n| self.graph[n].clone()));
            }
        }
        out
    }

    /// States reachable from `sources`, the sources included.
    pub fn reachable_from<'a>(
        &self,
        sources: impl IntoIterator<Item = &'a Name>,
    ) -> BTreeSet<Name> {
        let mut dfs = Dfs::empty(&self.graph);
        dfs.stack
            .extend(sources.into_iter().filter_map(|q| self.index.get(q)));
        let mut out = BTreeSet::new();
        while let Some(n) = dfs.next(&self.graph) {
            out.insert(self.graph[n].clone());
        }
        out
    }

    /// States from which arbitrarily tall trees derive: everything
    /// reachable from a cycle.
    pub fn tall_states(&self) -> BTreeSet<Name> {
        self.reachable_from(self.cyclic_states().iter())
    }

    /// A shortest path `from → … → to`, both ends included.
    pub fn shortest_path(&self, from: &str, to: &str) -> Option<Vec<Name>> {
        let (&s, &t) = (self.index.get(from)?, self.index.get(to)?);
        let (_, path) = astar(&self.graph, s, |n| n == t, |_| 1usize, |_| 0)?;
        Some(path.into_iter().map(|n| self.graph[n].clone()).collect())
    }

    /// A shortest cycle through `q`, as `q → … → q`.
    pub fn shortest_cycle(&self, q: &str) -> Option<Vec<Name>> {
        let &s = self.index.get(q)?;
        let dist = dijkstra(&self.graph, s, None, |_| 1usize);
        let back = self
            .graph
            .neighbors_directed(s, Direction::Incoming)
            .filter_map(|p| dist.get(&p).map(|d| (*d, self.graph[p].clone(), p)))
            .min()?;
        let mut cycle = if back.2 == s {
            vec![Name::from(q)]
        } else {
            self.shortest_path(q, &back.1)?
        };
        cycle.push(Name::from(q));
        Some(cycle)
    }

    /// Distance from every state that reaches `q` to `q`.
    fn distances_to(&self, q: &str) -> BTreeMap<Name, usize> {
        let Some(&t) = self.index.get(q) else {
            return BTreeMap::new();
        };
        dijkstra(Reversed(&self.graph), t, None, |_| 1usize)
            .into_iter()
            .map(|(n, d)| (self.graph[n].clone(), d))
            .collect()
    }
}

/// Evidence for the large duplication property.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LdpWitness {
    /// Index into the grammar's productions.
    pub production: usize,
    /// `(u, v)` with `ℓ(u)` a real state and `ℓ(v)` the sink.
    pub pair: (Position, Position),
    pub cycle_state: Name,
    /// `q' → … → q'`.
    pub cycle: Vec<Name>,
    /// `q' → … → ℓ(u)`.
    pub path: Vec<Name>,
}

impl LdpWitness {
    /// The state `ℓ(u)` fed by the cycle.
    pub fn state(&self) -> &Name {
        self.path.last().expect("paths are nonempty")
    }

    /// A tree deriving to [`state`](Self::state) that is taller than
    /// `he(G)`: a minimal tree for the cycle state, wrapped around the cycle
    /// until tall enough, then carried along the path.
    pub fn tall_tree(&self, g: &Wtg) -> Option<Tree> {
        let graph = DependencyGraph::new(g);
        let trees = witness_table(g);
        let step = |t: Tree, from: &Name, to: &Name| -> Option<Tree> {
            let (i, pos) = graph.via(from, to)?;
            let fixed = BTreeMap::from([(pos.clone(), t)]);
            instantiate(g.production(*i), &trees, &fixed).map(|(_, t)| t)
        };
        let mut t = trees.get(&self.cycle_state)?.1.clone();
        while t.height() <= g.height() {
            for e in self.cycle.windows(2) {
                t = step(t, &e[0], &e[1])?;
            }
        }
        for e in self.path.windows(2) {
            t = step(t, &e[0], &e[1])?;
        }
        Some(t)
    }
}

/// Full result of the property check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LdpReport {
    pub witness: Option<LdpWitness>,
    /// Every `(production, (u, v))` qualifying for the property.
    pub qualifying: Vec<(usize, (Position, Position))>,
    /// Pairs whose target is fed by a cycle while `ℓ(u)` is not; checking
    /// reachability of the target instead of `ℓ(u)` would misjudge these.
    pub discrepancies: Vec<(usize, (Position, Position))>,
}

/// `(u, v)` pairs of production `i` with `ℓ(u)` a real state and `ℓ(v) = ⊥`.
fn sink_pairs(g: &Wtg, i: usize) -> Vec<(Position, Position, Name)> {
    let p = g.production(i);
    p.constraints()
        .pairs()
        .into_iter()
        .filter_map(|(u, v)| {
            let lu = p.state_at(&u)?;
            let lv = p.state_at(&v)?;
            (&**lu != SINK && &**lv == SINK).then(|| (u, v, lu.clone()))
        })
        .collect()
}

/// Checks the property on a trim WTGh.
pub fn ldp_report(g: &Wtg) -> LdpReport {
    let graph = DependencyGraph::new(g);
    let tall = graph.tall_states();
    let mut qualifying = Vec::new();
    let mut discrepancies = Vec::new();
    for i in 0..g.productions().len() {
        for (u, v, state) in sink_pairs(g, i) {
            if tall.contains(&state) {
                qualifying.push((i, (u, v)));
            } else if tall.contains(g.production(i).target()) {
                discrepancies.push((i, (u, v)));
            }
        }
    }
    let witness = qualifying
        .first()
        .map(|(i, pair)| witness_for(g, &graph, *i, pair.clone()));
    LdpReport {
        witness,
        qualifying,
        discrepancies,
    }
}

fn witness_for(
    g: &Wtg,
    graph: &DependencyGraph,
    production: usize,
    pair: (Position, Position),
) -> LdpWitness {
    let state = g
        .production(production)
        .state_at(&pair.0)
        .expect("qualifying pair")
        .clone();
    // the nearest cyclic state, then the shortest cycle through it
    let dist = graph.distances_to(&state);
    let cycle_state = graph
        .cyclic_states()
        .into_iter()
        .filter_map(|c| dist.get(&c).map(|d| (*d, c)))
        .min()
        .expect("qualifying state is reachable from a cycle")
        .1;
    let path = graph
        .shortest_path(&cycle_state, &state)
        .expect("reachable");
    let cycle = graph.shortest_cycle(&cycle_state).expect("cyclic state");
    LdpWitness {
        production,
        pair,
        cycle_state: path[0].clone(),
        cycle,
        path,
    }
}

/// A witness for the large duplication property, if the (trim WTGh)
/// grammar has it. Deterministic: lowest production index, then the
/// `⪯`-least pair, then the nearest cycle.
pub fn has_ldp(g: &Wtg) -> Option<LdpWitness> {
    ldp_report(g).witness
}

/// What [`decide_hom`] computes beyond the verdict itself.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DecideOptions {
    /// Linearize the image in the regular case (exponential).
    pub emit_grammar: bool,
    /// Decompose the image in the nonregular case.
    pub emit_witness: bool,
    /// Blowup guard for linearization.
    pub cap: usize,
}

impl Default for DecideOptions {
    fn default() -> Self {
        DecideOptions {
            emit_grammar: false,
            emit_witness: false,
            cap: DEFAULT_CAP,
        }
    }
}

#[derive(Clone, Debug)]
pub enum Verdict {
    /// The image is regular; `grammar` is an equivalent WTG when requested.
    Regular { grammar: Option<Wtg> },
    Nonregular {
        witness: LdpWitness,
        decomposition: Option<Box<Decomposition>>,
    },
}

impl Verdict {
    pub fn is_regular(&self) -> bool {
        matches!(self, Verdict::Regular { .. })
    }

    /// `REGULAR` or `NONREGULAR`.
    pub fn token(&self) -> &'static str {
        if self.is_regular() {
            "REGULAR"
        } else {
            "NONREGULAR"
        }
    }
}

/// The image grammar together with the verdict about it.
#[derive(Clone, Debug)]
pub struct Decision {
    pub image: Wtg,
    pub verdict: Verdict,
}

/// Decides whether the image of the weighted tree language of `a` under
/// `h` is regular.
pub fn decide_hom(a: &Wtg, h: &TreeHomomorphism, options: DecideOptions) -> Result<Decision> {
    let image = hom_image(&trim(a), h)?;
    let verdict = decide_grammar(&image, options)?;
    Ok(Decision { image, verdict })
}

/// The verdict for a trim WTGh.
pub fn decide_grammar(g: &Wtg, options: DecideOptions) -> Result<Verdict> {
    let shape = g.shape();
    if !shape.is_wtgh {
        return Err(Error::Shape(shape.diagnostics.join("; ")));
    }
    match has_ldp(g) {
        None => {
            let grammar = if options.emit_grammar {
                Some(linearize(g, options.cap)?)
            } else {
                None
            };
            Ok(Verdict::Regular { grammar })
        }
        Some(witness) => {
            let decomposition = if options.emit_witness {
                Some(Box::new(decompose(g)?))
            } else {
                None
            };
            Ok(Verdict::Nonregular {
                witness,
                decomposition,
            })
        }
    }
}

/// `(q', q)` edges as strings, for tests and diagnostics.
pub fn edge_list(graph: &DependencyGraph) -> Vec<(String, String)> {
    graph
        .edges()
        .iter()
        .map(|(a, b)| (a.to_string(), b.to_string()))
        .collect()
}
