use std::collections::{BTreeMap, HashMap};
use std::rc::Rc;

use super::{Derivation, Step, Weight, Wtg};
use crate::terms::{Label, Name, Position, Tree};

/// Bottom-up evaluation of a grammar on ground trees.
///
/// Weights are computed per `(node, state)` with explicit constraint checks
/// at every production application; equal subtrees are detected through
/// hash-consed node ids.
pub struct Evaluator<'g> {
    g: &'g Wtg,
    states: Vec<Name>,
    state_index: HashMap<Name, usize>,
    by_symbol: HashMap<Name, Vec<usize>>,
}

struct Indexed<'t> {
    /// One representative per distinct subtree, children before parents.
    nodes: Vec<&'t Tree>,
    children: Vec<Vec<usize>>,
    root: usize,
}

impl<'t> Indexed<'t> {
    fn new(t: &'t Tree) -> Indexed<'t> {
        let mut ix = Indexed {
            nodes: Vec::new(),
            children: Vec::new(),
            root: 0,
        };
        let mut seen = HashMap::new();
        let mut interner = HashMap::new();
        ix.root = ix.push(t, &mut seen, &mut interner);
        ix
    }

    /// Interns `t`; subtrees sharing their children allocation are visited
    /// once.
    fn push(
        &mut self,
        t: &'t Tree,
        seen: &mut HashMap<(*const Tree, &'t Label), usize>,
        interner: &mut HashMap<(&'t Label, Vec<usize>), usize>,
    ) -> usize {
        let key = (t.children().as_ptr(), t.label());
        if let Some(&id) = seen.get(&key) {
            return id;
        }
        let kids: Vec<usize> = t
            .children()
            .iter()
            .map(|c| self.push(c, seen, interner))
            .collect();
        let id = match interner.get(&(t.label(), kids.clone())) {
            Some(&id) => id,
            None => {
                let id = self.nodes.len();
                interner.insert((t.label(), kids.clone()), id);
                self.nodes.push(t);
                self.children.push(kids);
                id
            }
        };
        seen.insert(key, id);
        id
    }

    fn at(&self, node: usize, rel: &Position) -> Option<usize> {
        let mut n = node;
        for &i in rel.indices() {
            n = *self.children[n].get(i - 1)?;
        }
        Some(n)
    }
}

impl<'g> Evaluator<'g> {
    pub fn new(g: &'g Wtg) -> Evaluator<'g> {
        let states: Vec<Name> = g.states().iter().cloned().collect();
        let state_index = states
            .iter()
            .enumerate()
            .map(|(i, q)| (q.clone(), i))
            .collect();
        let mut by_symbol: HashMap<Name, Vec<usize>> = HashMap::new();
        for (i, p) in g.productions().iter().enumerate() {
            if let Label::Symbol(s) = p.lhs().label() {
                by_symbol.entry(s.clone()).or_default().push(i);
            }
        }
        Evaluator {
            g,
            states,
            state_index,
            by_symbol,
        }
    }

    /// Matches production `p` at `node`; returns the `(node, state index)`
    /// pairs for the state leaves in `⪯` order, or `None`.
    fn match_at(&self, ix: &Indexed<'_>, p: usize, node: usize) -> Option<Vec<(usize, usize)>> {
        let prod = self.g.production(p);
        let mut out = Vec::new();
        if !self.match_tree(ix, prod.lhs(), node, &mut out) {
            return None;
        }
        for class in prod.constraints().classes() {
            let first = ix.at(node, &class[0])?;
            for w in &class[1..] {
                if ix.at(node, w)? != first {
                    return None;
                }
            }
        }
        Some(out)
    }

    fn match_tree(
        &self,
        ix: &Indexed<'_>,
        lhs: &Tree,
        node: usize,
        out: &mut Vec<(usize, usize)>,
    ) -> bool {
        match lhs.label() {
            Label::State(q) => {
                out.push((node, self.state_index[q]));
                true
            }
            label => {
                let t = ix.nodes[node];
                if label != t.label() || lhs.arity() != t.arity() {
                    return false;
                }
                // children left to right keeps the leaves in ⪯ order
                lhs.children()
                    .iter()
                    .zip(&ix.children[node])
                    .all(|(l, &c)| self.match_tree(ix, l, c, out))
            }
        }
    }

    fn table(&self, ix: &Indexed<'_>) -> Vec<Vec<Weight>> {
        let n = self.states.len();
        let mut table: Vec<Vec<Weight>> = Vec::with_capacity(ix.nodes.len());
        for node in 0..ix.nodes.len() {
            let mut row = vec![Weight::zero(); n];
            if let Label::Symbol(s) = ix.nodes[node].label() {
                for &p in self.by_symbol.get(s).map(Vec::as_slice).unwrap_or(&[]) {
                    let Some(leaves) = self.match_at(ix, p, node) else {
                        continue;
                    };
                    let mut w = self.g.production(p).weight().clone();
                    for (c, q) in leaves {
                        if w.is_zero() {
                            break;
                        }
                        w *= &table[c][q];
                    }
                    if !w.is_zero() {
                        let q = self.state_index[self.g.production(p).target()];
                        row[q] += w;
                    }
                }
            }
            table.push(row);
        }
        table
    }

    /// `wt^q(t)` for every state with a nonzero value.
    pub fn state_weights(&self, t: &Tree) -> BTreeMap<Name, Weight> {
        let ix = Indexed::new(t);
        let table = self.table(&ix);
        table[ix.root]
            .iter()
            .enumerate()
            .filter(|(_, w)| !w.is_zero())
            .map(|(i, w)| (self.states[i].clone(), w.clone()))
            .collect()
    }

    pub fn state_weight(&self, t: &Tree, q: &str) -> Weight {
        self.state_weights(t).remove(q).unwrap_or_else(Weight::zero)
    }

    /// `Σ_q F(q) · wt^q(t)`.
    pub fn semantics(&self, t: &Tree) -> Weight {
        self.state_weights(t)
            .into_iter()
            .map(|(q, w)| w * &self.g.final_weight(&q))
            .sum()
    }

    /// One complete left-most derivation of `t` to `q`, preferring
    /// lower-indexed productions.
    pub fn find_derivation(&self, t: &Tree, q: &str) -> Option<Derivation> {
        let ix = Indexed::new(t);
        let table = self.table(&ix);
        let qi = *self.state_index.get(q)?;
        let mut steps = Vec::new();
        self.rebuild(&ix, &table, ix.root, qi, &Position::root(), &mut steps)?;
        Some(Derivation::new(steps))
    }

    fn rebuild(
        &self,
        ix: &Indexed<'_>,
        table: &[Vec<Weight>],
        node: usize,
        q: usize,
        at: &Position,
        steps: &mut Vec<Step>,
    ) -> Option<()> {
        if table[node][q].is_zero() {
            return None;
        }
        let Label::Symbol(s) = ix.nodes[node].label() else {
            return None;
        };
        for &p in self.by_symbol.get(s)? {
            if self.state_index[self.g.production(p).target()] != q {
                continue;
            }
            let Some(leaves) = self.match_at(ix, p, node) else {
                continue;
            };
            if leaves.iter().any(|&(c, cq)| table[c][cq].is_zero()) {
                continue;
            }
            let vs = self.g.production(p).state_positions();
            for ((c, cq), v) in leaves.into_iter().zip(&vs) {
                self.rebuild(ix, table, c, cq, &at.concat(v), steps)?;
            }
            steps.push(Step::new(p, at.clone()));
            return Some(());
        }
        None
    }

    /// All complete left-most derivations of `t` to `q`. Exponential in the
    /// worst case.
    pub fn derivations(&self, t: &Tree, q: &str) -> Vec<Derivation> {
        let ix = Indexed::new(t);
        let Some(&qi) = self.state_index.get(q) else {
            return Vec::new();
        };
        let mut memo = HashMap::new();
        self.enumerate(&ix, ix.root, qi, &mut memo)
            .iter()
            .map(|steps| Derivation::new(steps.clone()))
            .collect()
    }

    fn enumerate(
        &self,
        ix: &Indexed<'_>,
        node: usize,
        q: usize,
        memo: &mut HashMap<(usize, usize), Rc<Vec<Vec<Step>>>>,
    ) -> Rc<Vec<Vec<Step>>> {
        if let Some(hit) = memo.get(&(node, q)) {
            return hit.clone();
        }
        let mut out: Vec<Vec<Step>> = Vec::new();
        if let Label::Symbol(s) = ix.nodes[node].label() {
            for &p in self.by_symbol.get(s).map(Vec::as_slice).unwrap_or(&[]) {
                if self.state_index[self.g.production(p).target()] != q {
                    continue;
                }
                let Some(leaves) = self.match_at(ix, p, node) else {
                    continue;
                };
                let vs = self.g.production(p).state_positions();
                let mut partial: Vec<Vec<Step>> = vec![Vec::new()];
                for ((c, cq), v) in leaves.into_iter().zip(&vs) {
                    let subs = self.enumerate(ix, c, cq, memo);
                    partial = partial
                        .iter()
                        .flat_map(|pre| {
                            subs.iter().map(move |sub| {
                                let mut steps = pre.clone();
                                steps
                                    .extend(sub.iter().map(|st| {
                                        Step::new(st.production, v.concat(&st.position))
                                    }));
                                steps
                            })
                        })
                        .collect();
                    if partial.is_empty() {
                        break;
                    }
                }
                // positions are relative to `node`; memo entries are shared
                for mut steps in partial {
                    steps.push(Step::new(p, Position::root()));
                    out.push(steps);
                }
            }
        }
        let out = Rc::new(out);
        memo.insert((node, q), out.clone());
        out
    }
}

pub fn semantics(g: &Wtg, t: &Tree) -> Weight {
    Evaluator::new(g).semantics(t)
}

pub fn state_weight(g: &Wtg, t: &Tree, q: &str) -> Weight {
    Evaluator::new(g).state_weight(t, q)
}

pub fn state_weights(g: &Wtg, t: &Tree) -> BTreeMap<Name, Weight> {
    Evaluator::new(g).state_weights(t)
}

pub fn derivations(g: &Wtg, t: &Tree, q: &str) -> Vec<Derivation> {
    Evaluator::new(g).derivations(t, q)
}

pub fn find_derivation(g: &Wtg, t: &Tree, q: &str) -> Option<Derivation> {
    Evaluator::new(g).find_derivation(t, q)
}
