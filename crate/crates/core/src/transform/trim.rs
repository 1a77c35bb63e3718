use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use crate::grammar::{Wtg, SINK};
use crate::terms::Name;

/// States `q` with some ground tree deriving to `q`, by the usual
/// worklist fixpoint: linear in the size of the grammar.
pub fn producible_states(g: &Wtg) -> BTreeSet<Name> {
    let prods = g.productions();
    // distinct lhs states per production still waiting to become producible
    let mut missing: Vec<usize> = Vec::with_capacity(prods.len());
    let mut waiting: HashMap<&Name, Vec<usize>> = HashMap::new();
    let mut queue: VecDeque<&Name> = VecDeque::new();
    let mut done: BTreeSet<Name> = BTreeSet::new();
    for (i, p) in prods.iter().enumerate() {
        let states: BTreeSet<&Name> = p.lhs().states().into_iter().collect();
        missing.push(states.len());
        for q in states {
            waiting.entry(q).or_default().push(i);
        }
        if missing[i] == 0 && done.insert(p.target().clone()) {
            queue.push_back(p.target());
        }
    }
    while let Some(q) = queue.pop_front() {
        for &i in waiting.get(q).map(Vec::as_slice).unwrap_or(&[]) {
            missing[i] -= 1;
            if missing[i] == 0 && done.insert(prods[i].target().clone()) {
                queue.push_back(prods[i].target());
            }
        }
    }
    done
}

/// Removes every production that occurs in no accepting derivation.
///
/// A production is kept when all states of its left-hand side are
/// producible and its target is producible and reaches a final state
/// through left-hand sides of kept productions. The sink state and its
/// productions are kept whenever the sink is present.
pub fn trim(g: &Wtg) -> Wtg {
    let producible = producible_states(g);
    let candidates: Vec<usize> = (0..g.productions().len())
        .filter(|&i| {
            let p = g.production(i);
            producible.contains(p.target())
                && p.lhs().states().into_iter().all(|q| producible.contains(q))
        })
        .collect();
    // co-reachability: q' is useful if it occurs in a candidate for a useful target
    let mut feeds: HashMap<&Name, Vec<&Name>> = HashMap::new();
    for &i in &candidates {
        let p = g.production(i);
        for q in p.lhs().states() {
            feeds.entry(p.target()).or_default().push(q);
        }
    }
    let mut useful: BTreeSet<Name> = BTreeSet::new();
    let mut queue: VecDeque<&Name> = VecDeque::new();
    for q in g.finals().keys() {
        if producible.contains(q) && useful.insert(q.clone()) {
            queue.push_back(q);
        }
    }
    while let Some(q) = queue.pop_front() {
        for &q2 in feeds.get(q).map(Vec::as_slice).unwrap_or(&[]) {
            if useful.insert(q2.clone()) {
                queue.push_back(q2);
            }
        }
    }
    let sink = g.has_sink();
    let keep = |q: &Name| useful.contains(q) || (sink && &**q == SINK);
    let productions = candidates
        .iter()
        .map(|&i| g.production(i))
        .filter(|p| keep(p.target()))
        .cloned()
        .collect();
    let mut states: BTreeSet<Name> = useful.iter().cloned().collect();
    if sink {
        states.insert(SINK.into());
    }
    let finals: BTreeMap<Name, _> = g
        .finals()
        .iter()
        .filter(|(q, _)| states.contains(*q))
        .map(|(q, w)| (q.clone(), w.clone()))
        .collect();
    g.with_parts(states, finals, productions)
        .expect("a subset of a valid grammar is valid")
}
