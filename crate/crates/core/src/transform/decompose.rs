use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap};

use super::{fresh_state, trim};
use crate::decide::ldp_report;
use crate::error::{Error, Result};
use crate::grammar::{
    derivations, find_derivation, Constraints, Derivation, Production, Step, Weight, Wtg, SINK,
};
use crate::substitution::{instantiate, witness_table};
use crate::terms::{Name, Position, Tree};

/// `sem G = sem G1 + sem G2`, where `G1` accepts only through the joined
/// production `joined` and `G2` simulates every other accepting derivation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decomposition {
    pub g1: Wtg,
    pub g2: Wtg,
    /// The new state `f`, the only final state of `g1`.
    pub fresh_state: Name,
    /// `p_f`, the only production of `g1` targeting `f`.
    pub joined: Production,
    /// `(w_i u, w_i v)` in `joined`'s constraints, with a real state at
    /// the first position and the sink at the second.
    pub witness_pair: (Position, Position),
    /// The tree `t'` whose derivation was joined.
    pub tree: Tree,
    /// `w_i`, where the qualifying production is applied in `tree`.
    pub position: Position,
    /// The final state the joined derivation ends in.
    pub final_state: Name,
}

fn check(g: &Wtg) -> Result<()> {
    let shape = g.shape();
    if !shape.is_wtgh {
        return Err(Error::Shape(shape.diagnostics.join("; ")));
    }
    Ok(())
}

/// First qualifying pair for every production that has one.
fn qualifying(g: &Wtg) -> BTreeMap<usize, (Position, Position)> {
    let mut out = BTreeMap::new();
    for (i, pair) in ldp_report(g).qualifying {
        out.entry(i).or_insert(pair);
    }
    out
}

/// Decomposes a trim WTGh with the large duplication property.
///
/// The qualifying production is placed as close to the root as possible:
/// `|w_i|` is minimal over all qualifying productions and accepting
/// derivations. Ties go to the production listed first; the rest of `t'`
/// consists of minimum-size trees.
pub fn decompose(g: &Wtg) -> Result<Decomposition> {
    check(g)?;
    let g = &trim(g);
    let qual = qualifying(g);
    if qual.is_empty() {
        return Err(Error::NoLdp);
    }
    // depth of each state below a final state, with the step that reached it
    let mut dist: BTreeMap<Name, (usize, Option<(usize, Position)>)> = BTreeMap::new();
    let mut heap = BinaryHeap::new();
    for q in g.finals().keys() {
        dist.insert(q.clone(), (0, None));
        heap.push(Reverse((0usize, q.clone())));
    }
    while let Some(Reverse((d, q))) = heap.pop() {
        if dist[&q].0 < d {
            continue;
        }
        for (i, p) in g.productions().iter().enumerate() {
            if p.target() != &q {
                continue;
            }
            for v in p.state_positions() {
                let s = p.state_at(&v).expect("state position");
                if &**s == SINK {
                    continue;
                }
                let nd = d + v.len();
                if dist.get(s).is_none_or(|(old, _)| nd < *old) {
                    dist.insert(s.clone(), (nd, Some((i, v.clone()))));
                    heap.push(Reverse((nd, s.clone())));
                }
            }
        }
    }
    let (&chosen, _) = qual
        .iter()
        .filter(|(i, _)| dist.contains_key(g.production(**i).target()))
        .min_by_key(|(i, _)| (dist[g.production(**i).target()].0, **i))
        .ok_or_else(|| Error::Internal("no qualifying production is reachable".into()))?;

    // chain of (production, child position) from the qualifying production up
    let mut chain: Vec<(usize, Option<Position>)> = vec![(chosen, None)];
    let mut q = g.production(chosen).target().clone();
    while let Some((i, v)) = dist[&q].1.clone() {
        chain.push((i, Some(v)));
        q = g.production(i).target().clone();
    }
    let witnesses = witness_table(g);
    let mut current: Option<(Tree, Derivation)> = None;
    let w = chain
        .iter()
        .rev()
        .filter_map(|(_, v)| v.as_ref())
        .fold(Position::root(), |acc, v| acc.concat(v));
    for (i, child) in &chain {
        let p = g.production(*i);
        let mut fixed = BTreeMap::new();
        if let (Some(v), Some((t, _))) = (child, &current) {
            fixed.insert(v.clone(), t.clone());
        }
        let (_, tree) = instantiate(p, &witnesses, &fixed)
            .ok_or_else(|| Error::Internal(format!("cannot instantiate `{p}`")))?;
        let d = derive_with(
            g,
            *i,
            &tree,
            child.as_ref().zip(current.as_ref().map(|(_, d)| d)),
        )?;
        current = Some((tree, d));
    }
    let (tree, d) = current.expect("nonempty chain");
    build(g, &qual, &tree, &d, &q, &w)
}

/// A derivation of `tree` (an instance of production `i`'s left-hand side)
/// using `i` at the root and, if given, `fixed` below the child position.
fn derive_with(
    g: &Wtg,
    i: usize,
    tree: &Tree,
    fixed: Option<(&Position, &Derivation)>,
) -> Result<Derivation> {
    let p = g.production(i);
    let mut steps = Vec::new();
    for v in p.state_positions() {
        let state = p.state_at(&v).expect("state position");
        let sub = tree.subtree_at(&v)?;
        let d = match fixed {
            Some((fv, fd)) if *fv == v => fd.clone(),
            _ if &**state == SINK => Derivation::all_sink(g, sub)?,
            _ => find_derivation(g, sub, state).ok_or_else(|| {
                Error::Internal(format!("witness `{sub}` does not derive to `{state}`"))
            })?,
        };
        steps.extend(d.prefixed(&v).steps().iter().cloned());
    }
    steps.push(Step::new(i, Position::root()));
    Ok(Derivation::new(steps).into_leftmost())
}

/// Decomposes along an explicitly chosen accepting derivation of `tree`
/// that applies a qualifying production at `w`.
pub fn decompose_at(g: &Wtg, tree: &Tree, w: &Position) -> Result<Decomposition> {
    check(g)?;
    let qual = qualifying(g);
    if qual.is_empty() {
        return Err(Error::NoLdp);
    }
    let mut last_err = None;
    for q_f in g.finals().keys() {
        for d in derivations(g, tree, q_f) {
            let Some(k) = d.index_of(w) else { continue };
            if !qual.contains_key(&d.steps()[k].production) {
                continue;
            }
            match build(g, &qual, tree, &d, q_f, w) {
                Ok(r) => return Ok(r),
                Err(e) => last_err = Some(e),
            }
        }
    }
    Err(last_err.unwrap_or_else(|| {
        Error::Validation(format!(
            "no accepting derivation of `{tree}` applies a qualifying production at {w}"
        ))
    }))
}

fn build(
    g: &Wtg,
    qual: &BTreeMap<usize, (Position, Position)>,
    tree: &Tree,
    d: &Derivation,
    q_f: &Name,
    w: &Position,
) -> Result<Decomposition> {
    // (w_{i_j}, p_{i_j}) for j = 1..k, from w_i up to the root
    let mut chain: Vec<(Position, usize)> = Vec::new();
    let prefixes: Vec<Position> = w.prefixes().collect();
    for pre in prefixes.iter().rev() {
        if let Some(k) = d.index_of(pre) {
            chain.push((pre.clone(), d.steps()[k].production));
        }
    }
    if chain.last().is_none_or(|(pos, _)| !pos.is_root()) {
        return Err(Error::InvalidDerivation(
            "derivation has no root step".into(),
        ));
    }
    for pair in chain.windows(2) {
        let (below, _) = &pair[0];
        let (above, p_above) = &pair[1];
        let rel = above.strip_prefix_of(below).expect("prefix chain");
        if g.production(*p_above)
            .constraints()
            .class_of(&rel)
            .is_some()
        {
            return Err(Error::Validation(format!(
                "stacked position {below} is constrained; pick a shallower position"
            )));
        }
    }
    // stacked[j] = ℓ_{i_k}[ℓ_{i_{k-1}}]…[ℓ_{i_{j+1}}], with constraints and weight
    let mut stacked: Vec<(Tree, Constraints, Weight)> =
        vec![(Tree::state(q_f), Constraints::none(), Weight::one())];
    for (pos, pi) in chain.iter().rev() {
        let p = g.production(*pi);
        let (t, e, wt) = stacked.last().expect("nonempty");
        let next = (
            t.replace_at(pos, p.lhs().clone())?,
            e.union(&p.constraints().prefixed(pos)),
            wt.clone() * p.weight(),
        );
        stacked.push(next);
    }
    stacked.reverse();
    let f = fresh_state(g, "f");
    let (lhs_f, e_f, wt_f) = stacked[0].clone();
    let joined = Production::new(lhs_f, &f, e_f, wt_f)?;
    let (u, v) = &qual[&chain[0].1];
    let witness_pair = (w.concat(u), w.concat(v));

    let mut states: BTreeSet<Name> = g.states().clone();
    states.insert(f.clone());
    let final_weight = g.final_weight(q_f);

    let mut p1: Vec<Production> = g.productions().to_vec();
    p1.push(joined.clone());
    let f1: BTreeMap<Name, Weight> = [(f.clone(), final_weight.clone())].into();
    let g1 = trim(&g.with_parts(states.clone(), f1, p1)?);

    let mut p2: Vec<Production> = g.productions().to_vec();
    for (j, (pos, pi)) in chain.iter().enumerate() {
        let q_j = g.production(*pi).target();
        let (above, e_above, w_above) = &stacked[j + 1];
        for (i2, p) in g.productions().iter().enumerate() {
            if i2 == *pi || p.target() != q_j {
                continue;
            }
            p2.push(Production::new(
                above.replace_at(pos, p.lhs().clone())?,
                &f,
                e_above.union(&p.constraints().prefixed(pos)),
                p.weight().clone() * w_above,
            )?);
        }
    }
    let mut f2: BTreeMap<Name, Weight> = g.finals().clone();
    f2.remove(q_f);
    f2.insert(f.clone(), final_weight);
    let g2 = trim(&g.with_parts(states, f2, p2)?);

    Ok(Decomposition {
        g1,
        g2,
        fresh_state: f,
        joined,
        witness_pair,
        tree: tree.clone(),
        position: w.clone(),
        final_state: q_f.clone(),
    })
}
