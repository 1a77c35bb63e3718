//! Constraint-respecting substitution of derivations and the pumping
//! construction built on it.
//!
//! Substituting `t'` at `w_j` also rewrites every subtree that an equality
//! constraint ties to the branch containing `w_j`, so the result is again
//! a derivation of the same grammar.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::grammar::{find_derivation, DerivNode, Derivation, Wtg, SINK};
use crate::terms::{Label, Name, Position, Tree};

/// `d⟦d'⟧_{w_j}` together with the tree it derives.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubstitutionResult {
    pub derivation: Derivation,
    pub tree: Tree,
}

fn check_wtgh(g: &Wtg) -> Result<()> {
    let shape = g.shape();
    if !shape.is_wtgh {
        return Err(Error::Shape(shape.diagnostics.join("; ")));
    }
    Ok(())
}

/// Substitutes the complete derivation `inserted` into `host` at the
/// position of step `j`.
pub fn substitute(
    g: &Wtg,
    host: &Derivation,
    j: usize,
    inserted: &Derivation,
) -> Result<SubstitutionResult> {
    check_wtgh(g)?;
    let step = host.steps().get(j).ok_or(Error::StepOutOfRange {
        index: j,
        len: host.len(),
    })?;
    if !host.is_leftmost() {
        return Err(Error::InvalidDerivation(
            "host derivation is not left-most".into(),
        ));
    }
    let host_node = host.to_node(g)?;
    let q = g.production(host_node.production).target();
    let q_j = g.production(step.production).target();
    if (&**q == SINK) != (&**q_j == SINK) {
        return Err(Error::SinkParity(format!(
            "step {j} targets `{q_j}` but the derivation ends in `{q}`"
        )));
    }
    let new_node = inserted.to_node(g)?;
    let q_new = g.production(new_node.production).target();
    if q_new != q_j {
        return Err(Error::StateMismatch {
            expected: q_j.to_string(),
            found: q_new.to_string(),
        });
    }
    substitute_node(g, host_node, &step.position, &new_node)
}

fn substitute_node(
    g: &Wtg,
    host: DerivNode,
    w: &Position,
    inserted: &DerivNode,
) -> Result<SubstitutionResult> {
    let t = host.tree(g);
    let t_new = inserted.tree(g);
    let (node, tree) = subst(g, host, &t, w, inserted, &t_new)?;
    Ok(SubstitutionResult {
        derivation: Derivation::from_node(&node, g),
        tree,
    })
}

/// [`substitute`] addressed by position instead of step index.
pub fn substitute_at(
    g: &Wtg,
    host: &Derivation,
    w: &Position,
    inserted: &Derivation,
) -> Result<SubstitutionResult> {
    let j = host
        .index_of(w)
        .ok_or_else(|| Error::PositionOutOfRange(w.to_string()))?;
    substitute(g, host, j, inserted)
}

/// The recursion itself; `w` is relative to the current subtree `t`.
fn subst(
    g: &Wtg,
    node: DerivNode,
    t: &Tree,
    w: &Position,
    inserted: &DerivNode,
    t_new: &Tree,
) -> Result<(DerivNode, Tree)> {
    if w.is_root() {
        return Ok((inserted.clone(), t_new.clone()));
    }
    let p = g.production(node.production);
    let vs = p.state_positions();
    let s = vs
        .iter()
        .position(|v| v.is_prefix_of(w))
        .ok_or_else(|| Error::Internal(format!("no state position above {w}")))?;
    let w_hat = vs[s].strip_prefix_of(w).expect("prefix checked above");
    let mut children = node.children;
    let (d_s, t_s) = subst(
        g,
        std::mem::replace(
            &mut children[s],
            DerivNode {
                production: 0,
                children: Vec::new(),
            },
        ),
        t.subtree_at(&vs[s])?,
        &w_hat,
        inserted,
        t_new,
    )?;
    let mut tree = t.replace_at(&vs[s], t_s.clone())?;
    // sink copies repeat the rewritten representative, nested mirrors included
    let related: Vec<usize> = (0..vs.len())
        .filter(|&i| i != s && p.constraints().related(&vs[i], &vs[s]))
        .collect();
    if !related.is_empty() {
        let copy = DerivNode::all_sink(g, &t_s)?;
        for i in related {
            children[i] = copy.clone();
            tree = tree.replace_at(&vs[i], t_s.clone())?;
        }
    }
    children[s] = d_s;
    Ok((
        DerivNode {
            production: node.production,
            children,
        },
        tree,
    ))
}

/// Two step indices `(i, j)` with `w_j` a proper prefix of `w_i` and the same
/// non-sink target. Among all such pairs the deepest `w_i` wins, then the
/// `⪯`-least one, then the smallest `j`.
pub fn repeated_pair(g: &Wtg, d: &Derivation) -> Option<(usize, usize)> {
    let steps = d.steps();
    let target = |k: usize| g.production(steps[k].production).target();
    let mut order: Vec<usize> = (0..steps.len()).collect();
    if !d.is_leftmost() {
        order.sort_by(|&a, &b| steps[a].position.cmp(&steps[b].position));
    }
    // top-down, keeping the chain of ancestors on a stack
    let mut ancestors: Vec<usize> = Vec::new();
    let mut best: Option<(usize, usize)> = None;
    for &i in order.iter().rev() {
        let wi = &steps[i].position;
        while let Some(&top) = ancestors.last() {
            let wt = &steps[top].position;
            if wt.len() < wi.len() && wt.is_prefix_of(wi) {
                break;
            }
            ancestors.pop();
        }
        if &**target(i) != SINK {
            let nearest = ancestors
                .iter()
                .rev()
                .copied()
                .filter(|&j| target(j) == target(i))
                .min();
            if let Some(j) = nearest {
                let better = best.is_none_or(|(bi, _)| {
                    let bw = &steps[bi].position;
                    wi.len() > bw.len() || (wi.len() == bw.len() && wi < bw)
                });
                if better {
                    best = Some((i, j));
                }
            }
        }
        ancestors.push(i);
    }
    best
}

/// [`repeated_pair`] on a derivation tree, as positions `(w_i, w_j)`.
fn repeated_pair_node(g: &Wtg, root: &DerivNode) -> Option<(Position, Position)> {
    struct Search<'a> {
        g: &'a Wtg,
        path: Vec<usize>,
        /// target and path length of every ancestor application
        ancestors: Vec<(&'a Name, usize)>,
        best: Option<(Vec<usize>, usize)>,
    }
    impl<'a> Search<'a> {
        fn visit(&mut self, node: &'a DerivNode) {
            let p = self.g.production(node.production);
            let q = p.target();
            self.ancestors.push((q, self.path.len()));
            for (c, v) in node.children.iter().zip(p.state_positions()) {
                let depth = self.path.len();
                self.path.extend_from_slice(v.indices());
                self.visit(c);
                self.path.truncate(depth);
            }
            self.ancestors.pop();
            if &**q == SINK {
                return;
            }
            let Some(&(_, j_len)) = self.ancestors.iter().rev().find(|(a, _)| *a == q) else {
                return;
            };
            // post-order visits equally deep positions in ⪯ order
            if self
                .best
                .as_ref()
                .is_none_or(|(b, _)| self.path.len() > b.len())
            {
                self.best = Some((self.path.clone(), j_len));
            }
        }
    }
    let mut search = Search {
        g,
        path: Vec::new(),
        ancestors: Vec::new(),
        best: None,
    };
    search.visit(root);
    let (wi, j_len) = search.best?;
    let wj = Position::new(wi[..j_len].to_vec()).expect("positions are 1-based");
    Some((Position::new(wi).expect("positions are 1-based"), wj))
}

/// Substitutes the subtree at `w_j` at `w_i` for the pair of
/// [`repeated_pair`]; `t` is the tree `host` derives.
fn pump_node(g: &Wtg, host: DerivNode, t: &Tree) -> Result<(DerivNode, Tree)> {
    let (wi, wj) = repeated_pair_node(g, &host).ok_or_else(|| {
        Error::NoTallDerivation("no two steps on one path share a non-sink state".into())
    })?;
    let inserted = host
        .at(g, &wj)
        .ok_or_else(|| Error::Internal(format!("no sub-derivation at {wj}")))?
        .clone();
    let t_new = t.subtree_at(&wj)?.clone();
    subst(g, host, t, &wi, &inserted, &t_new)
}

/// One pumping step: substitutes `t|_{w_j}` at `w_i` for the pair chosen
/// by [`repeated_pair`].
pub fn pump_step(g: &Wtg, d: &Derivation) -> Result<SubstitutionResult> {
    check_wtgh(g)?;
    let host = d.to_node(g)?;
    let t = host.tree(g);
    let (node, tree) = pump_node(g, host, &t)?;
    Ok(SubstitutionResult {
        derivation: Derivation::from_node(&node, g),
        tree,
    })
}

/// Infinite sequence of pairwise distinct trees derivable to one state.
/// The first item is the starting tree.
pub struct Pump<'g> {
    g: &'g Wtg,
    current: Option<(DerivNode, Tree)>,
    error: Option<Error>,
    started: bool,
}

impl Iterator for Pump<'_> {
    type Item = Result<Tree>;

    fn next(&mut self) -> Option<Result<Tree>> {
        if !self.started {
            self.started = true;
            if let Some((_, t)) = &self.current {
                return Some(Ok(t.clone()));
            }
        }
        if let Some(e) = self.error.take() {
            return Some(Err(e));
        }
        let (node, tree) = self.current.take()?;
        match pump_node(self.g, node, &tree) {
            Ok((node, tree)) => {
                self.current = Some((node, tree.clone()));
                Some(Ok(tree))
            }
            Err(e) => Some(Err(e)),
        }
    }
}

/// Pumps `t` at state `q`. Requires `q ≠ ⊥`, `he(t) > he(G)` and a
/// derivation of `t` to `q`.
pub fn pump<'g>(g: &'g Wtg, q: &str, t: &Tree) -> Result<Pump<'g>> {
    check_wtgh(g)?;
    if q == SINK {
        return Err(Error::NoTallDerivation(
            "cannot pump at the sink state".into(),
        ));
    }
    if !g.has_state(q) {
        return Err(Error::UnknownState(q.to_string()));
    }
    if t.height() <= g.height() {
        return Err(Error::NoTallDerivation(format!(
            "height {} does not exceed he(G) = {}",
            t.height(),
            g.height()
        )));
    }
    let d = find_derivation(g, t, q)
        .ok_or_else(|| Error::NoTallDerivation(format!("`{t}` has no derivation to `{q}`")))?;
    Ok(pump_from(g, d, t.clone()))
}

/// Pumps from a given derivation without the height precondition; stops
/// with an error item if no repeated state is found.
pub fn pump_from(g: &Wtg, derivation: Derivation, tree: Tree) -> Pump<'_> {
    let (current, error) = match check_wtgh(g).and_then(|()| derivation.to_node(g)) {
        Ok(node) => (Some((node, tree)), None),
        Err(e) => (None, Some(e)),
    };
    Pump {
        g,
        current,
        error,
        started: false,
    }
}

/// Minimum-size ground trees for every producible state.
///
/// Constrained sink positions receive a copy of their class representative,
/// so under the sink discipline each tree derives to its state.
pub fn witness_trees(g: &Wtg) -> BTreeMap<Name, Tree> {
    witness_table(g)
        .into_iter()
        .map(|(q, (_, t))| (q, t))
        .collect()
}

/// [`witness_trees`] with the size of each tree.
pub(crate) fn witness_table(g: &Wtg) -> BTreeMap<Name, (usize, Tree)> {
    let mut best: BTreeMap<Name, (usize, Tree)> = BTreeMap::new();
    loop {
        let mut changed = false;
        for p in g.productions() {
            let Some((size, tree)) = instantiate(p, &best, &BTreeMap::new()) else {
                continue;
            };
            let better = best.get(p.target()).is_none_or(|(s, _)| size < *s);
            if better {
                best.insert(p.target().clone(), (size, tree));
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    best
}

/// Fills the state leaves of `p`'s left-hand side: positions in `fixed`
/// get the given tree, others the state's entry in `trees`, and non-least
/// members of a constraint class a copy of the least one.
pub(crate) fn instantiate(
    p: &crate::grammar::Production,
    trees: &BTreeMap<Name, (usize, Tree)>,
    fixed: &BTreeMap<Position, Tree>,
) -> Option<(usize, Tree)> {
    let mut lhs = p.lhs().clone();
    let mut size = p.size();
    let mut chosen: BTreeMap<Position, (usize, Tree)> = BTreeMap::new();
    for v in p.state_positions() {
        let (s, t) = match p.constraints().class_of(&v) {
            Some(class) if class[0] != v => chosen.get(&class[0])?.clone(),
            _ => match fixed.get(&v) {
                Some(t) => (t.size(), t.clone()),
                None => {
                    let Label::State(q) = p.lhs().label_at(&v)? else {
                        return None;
                    };
                    trees.get(q)?.clone()
                }
            },
        };
        size = size.saturating_add(s).saturating_sub(1);
        lhs = lhs.replace_at(&v, t.clone()).ok()?;
        chosen.insert(v, (s, t));
    }
    Some((size, lhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formats::parse_term;
    use crate::grammar::tests::example1;
    use crate::grammar::{derivations, Evaluator};

    fn tree(s: &str) -> Tree {
        parse_term(s).unwrap()
    }

    fn example2(g: &Wtg) -> (Derivation, Derivation) {
        let d = derivations(g, &tree("d(g(a), g(g(a)), g(a))"), "q_f").remove(0);
        let d_new = derivations(g, &tree("g(a)"), "q").remove(0);
        (d, d_new)
    }

    #[test]
    fn example2_substitution_golden() {
        let g = example1();
        let (d, d_new) = example2(&g);
        let r = substitute_at(&g, &d, &"1.1".parse().unwrap(), &d_new).unwrap();
        assert_eq!(r.tree, tree("d(g(g(a)), g(g(g(a))), g(a))"));
        assert_eq!(
            r.derivation.display(&g),
            "(a -> q, 1.1.1) (g(q) -> q, 1.1) (g(q) -> q, 1) (a -> _bot, 2.1.1.1) \
             (g(_bot) -> _bot, 2.1.1) (g(_bot) -> _bot, 2.1) (a -> q, 3.1) (g(q) -> q, 3) \
             (d(q, g(_bot), q) [1 = 2.1] -> q_f, e)"
        );
        assert_eq!(r.derivation.replay(&g, &r.tree).unwrap().as_ref(), "q_f");
    }

    #[test]
    fn pair_search_agrees_on_positions() {
        let g = example1();
        let (d, _) = example2(&g);
        let (i, j) = repeated_pair(&g, &d).unwrap();
        let node = d.to_node(&g).unwrap();
        assert_eq!(
            repeated_pair_node(&g, &node).unwrap(),
            (d.steps()[i].position.clone(), d.steps()[j].position.clone())
        );
    }

    #[test]
    fn nested_classes_mirror_into_outer_copies() {
        let g = crate::formats::parse_wtg(
            "wtg { alphabet { a/0 s/1 h/2 } states { q _bot } final { q: 1 }
               prod a -> q @ 1  prod s(q) -> q @ 1  prod h(q, _bot) [1 = 2] -> q @ 1
               prod a -> _bot @ 1  prod s(_bot) -> _bot @ 1  prod h(_bot, _bot) -> _bot @ 1 }",
        )
        .unwrap();
        let t = tree("h(h(s(a), s(a)), h(s(a), s(a)))");
        let d = derivations(&g, &t, "q").remove(0);
        let inserted = derivations(&g, &tree("s(a)"), "q").remove(0);
        let r = substitute_at(&g, &d, &"1.1.1".parse().unwrap(), &inserted).unwrap();
        assert_eq!(r.tree, tree("h(h(s(s(a)), s(s(a))), h(s(s(a)), s(s(a))))"));
        assert_eq!(r.derivation.replay(&g, &r.tree).unwrap().as_ref(), "q");
    }

    #[test]
    fn root_substitution_returns_the_inserted_derivation() {
        let g = example1();
        let (d, _) = example2(&g);
        let r = substitute(&g, &d, d.len() - 1, &d).unwrap();
        assert_eq!(r.derivation, d);
    }

    #[test]
    fn substitution_errors() {
        let g = example1();
        let (d, d_new) = example2(&g);
        assert!(matches!(
            substitute(&g, &d, 99, &d_new),
            Err(Error::StepOutOfRange { index: 99, len: 7 })
        ));
        // step 2 targets the sink while the host ends in q_f
        assert!(matches!(
            substitute(&g, &d, 2, &d_new),
            Err(Error::SinkParity(_))
        ));
        let sink = Derivation::all_sink(&g, &tree("g(a)")).unwrap();
        assert!(matches!(
            substitute(&g, &d, 0, &sink),
            Err(Error::StateMismatch { .. })
        ));
    }

    #[test]
    fn example4_pump_step() {
        let g = example1();
        let (d, _) = example2(&g);
        let (i, j) = repeated_pair(&g, &d).unwrap();
        assert_eq!(d.steps()[i].position.to_string(), "1.1");
        assert_eq!(d.steps()[j].position.to_string(), "1");
        let r = pump_step(&g, &d).unwrap();
        assert_eq!(r.tree, tree("d(g(g(a)), g(g(g(a))), g(a))"));
    }

    #[test]
    fn pump_needs_a_tall_tree() {
        let g = example1();
        let t = tree("g(a)");
        assert!(matches!(pump(&g, "q", &t), Err(Error::NoTallDerivation(_))));
        assert!(pump(&g, SINK, &t).is_err());
    }

    #[test]
    fn pumped_trees_grow_and_stay_accepted() {
        let g = example1();
        let mut t = tree("a");
        for _ in 0..=g.height() {
            t = Tree::node("g", vec![t]);
        }
        let ev = Evaluator::new(&g);
        let trees: Vec<Tree> = pump(&g, "q", &t)
            .unwrap()
            .take(6)
            .map(Result::unwrap)
            .collect();
        for w in trees.windows(2) {
            assert!(w[1].size() > w[0].size());
        }
        for t in &trees {
            assert!(!ev.state_weight(t, "q").is_zero());
        }
    }

    #[test]
    fn witness_trees_are_minimal_and_derivable() {
        let g = example1();
        let w = witness_trees(&g);
        assert_eq!(w["q"], tree("a"));
        assert_eq!(w[SINK], tree("a"));
        assert_eq!(w["q_f"], tree("d(a, g(a), a)"));
        let ev = Evaluator::new(&g);
        for (q, t) in &w {
            assert!(!ev.state_weight(t, q).is_zero());
        }
    }
}
