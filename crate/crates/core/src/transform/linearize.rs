use std::collections::{BTreeMap, HashMap};
use std::rc::Rc;

use super::trim;
use crate::error::{Error, Result};
use crate::grammar::{Constraints, HeightConvention, Production, Weight, Wtg, SINK};
use crate::terms::{Name, Position, Tree};

/// Default bound on generated trees and emitted productions.
pub const DEFAULT_CAP: usize = 100_000;

type TreeSet = Rc<Vec<(Tree, Weight)>>;

/// Enumerates `{(t, wt^q(t)) | he(t) ≤ h, wt^q(t) ≠ 0}` by expanding
/// productions top-down. Relies on the sink discipline: sink positions are
/// copies of their class representative and contribute weight 1.
struct Generator<'g> {
    g: &'g Wtg,
    by_target: HashMap<&'g Name, Vec<usize>>,
    memo: HashMap<(Name, usize), TreeSet>,
    cap: usize,
    generated: usize,
}

impl<'g> Generator<'g> {
    fn new(g: &'g Wtg, cap: usize) -> Generator<'g> {
        let mut by_target: HashMap<&Name, Vec<usize>> = HashMap::new();
        for (i, p) in g.productions().iter().enumerate() {
            by_target.entry(p.target()).or_default().push(i);
        }
        Generator {
            g,
            by_target,
            memo: HashMap::new(),
            cap,
            generated: 0,
        }
    }

    fn trees(&mut self, q: &Name, h: usize) -> Result<TreeSet> {
        if let Some(hit) = self.memo.get(&(q.clone(), h)) {
            return Ok(hit.clone());
        }
        if &**q == SINK {
            return Err(Error::Internal("sink trees are never enumerated".into()));
        }
        let mut acc: Vec<(Tree, Weight)> = Vec::new();
        let mut index: HashMap<Tree, usize> = HashMap::new();
        let prods = self.by_target.get(q).cloned().unwrap_or_default();
        for i in prods {
            let p = self.g.production(i);
            if p.height() > h {
                continue;
            }
            // one choice per representative position, ⪯-ordered
            let mut reps: Vec<(Position, TreeSet)> = Vec::new();
            let mut feasible = true;
            for v in p.state_positions() {
                if p.constraints().class_of(&v).is_some_and(|c| c[0] != v) {
                    continue;
                }
                let state = p.state_at(&v).expect("state position").clone();
                if &*state == SINK {
                    return Err(Error::Shape(format!(
                        "`{p}`: unconstrained sink position {v}"
                    )));
                }
                let set = self.trees(&state, h - v.len())?;
                if set.is_empty() {
                    feasible = false;
                    break;
                }
                reps.push((v, set));
            }
            if !feasible {
                continue;
            }
            let mut combos = vec![(p.lhs().clone(), p.weight().clone())];
            for (v, set) in &reps {
                let class = p.constraints().class_of(v).map(<[Position]>::to_vec);
                let mut next = Vec::with_capacity(combos.len() * set.len());
                for (lhs, w) in &combos {
                    for (t, tw) in set.iter() {
                        let mut l = lhs.replace_at(v, t.clone())?;
                        for other in class.iter().flatten().skip(1) {
                            l = l.replace_at(other, t.clone())?;
                        }
                        next.push((l, w.clone() * tw));
                    }
                }
                self.bump(next.len())?;
                combos = next;
            }
            for (t, w) in combos {
                match index.get(&t) {
                    Some(&k) => acc[k].1 += w,
                    None => {
                        index.insert(t.clone(), acc.len());
                        acc.push((t, w));
                    }
                }
            }
        }
        self.bump(acc.len())?;
        let set = Rc::new(acc);
        self.memo.insert((q.clone(), h), set.clone());
        Ok(set)
    }

    fn bump(&mut self, n: usize) -> Result<()> {
        self.generated = self.generated.saturating_add(n);
        if self.generated > self.cap {
            return Err(Error::Blowup {
                cap: self.cap,
                what: "generated trees",
            });
        }
        Ok(())
    }
}

/// `lin(G)`: every constraint class of a production is instantiated with
/// each derivable tree of height at most `he(G)` for the class
/// representative's state, and the representative's weight is folded into
/// the production weight. The result has no constraints and no sink state.
///
/// Agrees with `G` exactly when `G` lacks the large duplication property.
/// More than `cap` generated trees or emitted productions is an error.
pub fn linearize(g: &Wtg, cap: usize) -> Result<Wtg> {
    linearize_with(g, cap, HeightConvention::default())
}

pub(crate) fn linearize_with(g: &Wtg, cap: usize, convention: HeightConvention) -> Result<Wtg> {
    let shape = g.shape();
    if !shape.is_wtgh {
        return Err(Error::Shape(shape.diagnostics.join("; ")));
    }
    let height = g.metrics(convention).grammar_height;
    let mut gen = Generator::new(g, cap);
    let mut out: Vec<Production> = Vec::new();
    for p in g.productions() {
        if &**p.target() == SINK {
            continue;
        }
        if p.constraints().is_empty() {
            out.push(p.clone());
            continue;
        }
        let mut combos = vec![(p.lhs().clone(), p.weight().clone())];
        for class in p.constraints().classes() {
            if !class[1..]
                .iter()
                .any(|w| p.state_at(w).is_some_and(|q| &**q == SINK))
            {
                return Err(Error::Shape(format!(
                    "`{p}`: a class without a sink position"
                )));
            }
            let rep = p
                .state_at(&class[0])
                .ok_or_else(|| Error::Shape(format!("`{p}`: class representative is not a state")))?
                .clone();
            let set = gen.trees(&rep, height)?;
            let mut next = Vec::with_capacity(combos.len() * set.len());
            for (lhs, w) in &combos {
                for (t, tw) in set.iter() {
                    let mut l = lhs.clone();
                    for v in class {
                        l = l.replace_at(v, t.clone())?;
                    }
                    next.push((l, w.clone() * tw));
                }
            }
            combos = next;
            if out.len() + combos.len() > cap {
                return Err(Error::Blowup {
                    cap,
                    what: "emitted productions",
                });
            }
        }
        for (lhs, w) in combos {
            out.push(Production::new(lhs, p.target(), Constraints::none(), w)?);
        }
    }
    if out.len() > cap {
        return Err(Error::Blowup {
            cap,
            what: "emitted productions",
        });
    }
    let states: Vec<String> = g
        .states()
        .iter()
        .filter(|q| &***q != SINK)
        .map(|q| q.to_string())
        .collect();
    let finals: BTreeMap<String, Weight> = g
        .finals()
        .iter()
        .map(|(q, w)| (q.to_string(), w.clone()))
        .collect();
    let lin = Wtg::new(g.alphabet().clone(), states, finals, out)?;
    debug_assert!(lin.productions().iter().all(|p| !p
        .lhs()
        .states()
        .iter()
        .any(|q| &***q == SINK)));
    Ok(trim(&lin).canonical())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formats::{parse_term, parse_wtg};
    use crate::grammar::{semantics, tests::example1};
    use crate::terms::Label;

    pub(crate) const G_SMALL: &str = "wtg {
      alphabet { a/0 s/2 }
      states { q0 q_f _bot }
      final { q_f: 1 }
      prod a -> q0 @ 2
      prod s(q0, _bot) [1 = 2] -> q_f @ 3
      prod a -> _bot @ 1
      prod s(_bot, _bot) -> _bot @ 1
    }";

    #[test]
    fn g_small_linearizes_to_one_production() {
        let g = parse_wtg(G_SMALL).unwrap();
        let lin = linearize(&g, DEFAULT_CAP).unwrap();
        assert!(lin.shape().wtg);
        let prods: Vec<String> = lin.productions().iter().map(|p| p.to_string()).collect();
        // q0 only fed the constrained production, so trimming drops it
        assert_eq!(prods, ["s(a, a) -> q_f @ 6"]);
        assert_eq!(
            semantics(&lin, &parse_term("s(a, a)").unwrap()),
            Weight::from(6)
        );
    }

    #[test]
    fn unconstrained_productions_are_copied() {
        let g = parse_wtg(&G_SMALL.replace("q_f: 1", "q_f: 1, q0: 5")).unwrap();
        let lin = linearize(&g, DEFAULT_CAP).unwrap();
        assert!(lin
            .productions()
            .iter()
            .any(|p| p.to_string() == "a -> q0 @ 2"));
        assert_eq!(semantics(&lin, &parse_term("a").unwrap()), Weight::from(10));
        assert!(!lin.has_sink());
    }

    #[test]
    fn blowup_is_reported() {
        // the tall-tree family of the example grammar needs far more than 3 trees
        let g = example1();
        let err = linearize(&g, 3).unwrap_err();
        assert!(matches!(err, Error::Blowup { cap: 3, .. }));
    }

    #[test]
    fn unconstrained_productions_count_toward_the_cap() {
        let g = parse_wtg(
            "wtg { alphabet { a/0 g/1 } states { q _bot } final { q: 1 }
               prod a -> q @ 1  prod g(q) -> q @ 2
               prod a -> _bot @ 1  prod g(_bot) -> _bot @ 1 }",
        )
        .unwrap();
        assert!(matches!(
            linearize(&g, 1),
            Err(Error::Blowup { cap: 1, .. })
        ));
        assert_eq!(linearize(&g, 2).unwrap().productions().len(), 2);
    }

    #[test]
    fn generated_trees_carry_their_state_weight() {
        let g = example1();
        let mut gen = Generator::new(&g, DEFAULT_CAP);
        let set = gen.trees(&Name::from("q"), 2).unwrap();
        let got: Vec<(String, String)> = set
            .iter()
            .map(|(t, w)| (t.to_string(), w.to_string()))
            .collect();
        assert_eq!(
            got,
            [
                ("a".into(), "1".into()),
                ("g(a)".into(), "2".into()),
                ("g(g(a))".into(), "4".into())
            ]
        );
        assert!(set
            .iter()
            .all(|(t, _)| matches!(t.label(), Label::Symbol(_))));
    }
}
