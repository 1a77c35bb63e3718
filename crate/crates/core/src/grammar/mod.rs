//! Weighted tree grammars with equality constraints over the natural numbers.
//!
//! One [`Wtg`] type covers plain grammars, automata and the sink-restricted
//! grammars produced by the image construction; [`Wtg::shape`] tells which
//! of these a given value is.

mod derivation;
mod eval;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use crate::error::{Error, Result};
use crate::terms::{is_identifier, Label, Name, Position, RankedAlphabet, Tree};
pub use crate::weight::Weight;

pub(crate) use derivation::DerivNode;
pub use derivation::{Derivation, Step};
pub use eval::{derivations, find_derivation, semantics, state_weight, state_weights, Evaluator};

/// Reserved name of the sink state.
pub const SINK: &str = "_bot";

/// True if `(v, w)` holds on `t`: both positions exist and carry equal subtrees.
pub fn constraint_satisfied(t: &Tree, pair: &(Position, Position)) -> bool {
    match (t.get(&pair.0), t.get(&pair.1)) {
        (Some(a), Some(b)) => a == b,
        _ => false,
    }
}

/// Equality constraints of a production, kept as nontrivial equivalence
/// classes. Each class is sorted by `⪯` and classes are sorted by their
/// least element.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Constraints {
    classes: Vec<Vec<Position>>,
}

impl Constraints {
    pub fn none() -> Constraints {
        Constraints::default()
    }

    /// Normalizes arbitrary (possibly overlapping) groups into classes.
    pub fn from_classes(groups: Vec<Vec<Position>>) -> Constraints {
        let mut index: BTreeMap<Position, usize> = BTreeMap::new();
        let mut parent: Vec<usize> = Vec::new();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for group in &groups {
            let mut first = None;
            for w in group {
                let id = *index.entry(w.clone()).or_insert_with(|| {
                    parent.push(parent.len());
                    parent.len() - 1
                });
                match first {
                    None => first = Some(id),
                    Some(f) => {
                        let (a, b) = (find(&mut parent, f), find(&mut parent, id));
                        parent[b] = a;
                    }
                }
            }
        }
        let mut buckets: BTreeMap<usize, Vec<Position>> = BTreeMap::new();
        for (w, id) in &index {
            let root = find(&mut parent, *id);
            buckets.entry(root).or_default().push(w.clone());
        }
        let mut classes: Vec<Vec<Position>> = buckets
            .into_values()
            .filter(|c| c.len() > 1)
            .map(|mut c| {
                c.sort();
                c
            })
            .collect();
        classes.sort();
        Constraints { classes }
    }

    pub fn from_pairs<I: IntoIterator<Item = (Position, Position)>>(pairs: I) -> Constraints {
        Constraints::from_classes(pairs.into_iter().map(|(a, b)| vec![a, b]).collect())
    }

    pub fn classes(&self) -> &[Vec<Position>] {
        &self.classes
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn positions(&self) -> impl Iterator<Item = &Position> + '_ {
        self.classes.iter().flatten()
    }

    pub fn class_of(&self, w: &Position) -> Option<&[Position]> {
        self.classes
            .iter()
            .find(|c| c.contains(w))
            .map(Vec::as_slice)
    }

    /// `(v, w) ∈ E` for the reflexive closure.
    pub fn related(&self, v: &Position, w: &Position) -> bool {
        v == w || self.class_of(v).is_some_and(|c| c.contains(w))
    }

    /// Pairs `(least, other)` for every class, in order.
    pub fn pairs(&self) -> Vec<(Position, Position)> {
        self.classes
            .iter()
            .flat_map(|c| c[1..].iter().map(move |w| (c[0].clone(), w.clone())))
            .collect()
    }

    /// `wE`.
    pub fn prefixed(&self, w: &Position) -> Constraints {
        Constraints::from_classes(
            self.classes
                .iter()
                .map(|c| c.iter().map(|v| w.concat(v)).collect())
                .collect(),
        )
    }

    pub fn union(&self, other: &Constraints) -> Constraints {
        let mut groups = self.classes.clone();
        groups.extend(other.classes.iter().cloned());
        Constraints::from_classes(groups)
    }

    pub fn satisfied_by(&self, t: &Tree) -> bool {
        self.classes.iter().all(|c| {
            let Some(first) = t.get(&c[0]) else {
                return false;
            };
            c[1..].iter().all(|w| t.get(w) == Some(first))
        })
    }
}

impl fmt::Display for Constraints {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .classes
            .iter()
            .map(|c| {
                c.iter()
                    .map(|w| w.to_string())
                    .collect::<Vec<_>>()
                    .join(" = ")
            })
            .collect();
        f.write_str(&parts.join(", "))
    }
}

/// `ℓ —E→_w q`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Production {
    lhs: Tree,
    target: Name,
    constraints: Constraints,
    weight: Weight,
}

impl Production {
    pub fn new(lhs: Tree, target: &str, constraints: Constraints, weight: Weight) -> Result<Self> {
        if !matches!(lhs.label(), Label::Symbol(_)) {
            return Err(Error::Validation(format!(
                "left-hand side `{lhs}` must start with a symbol"
            )));
        }
        if let Some(w) = constraints.positions().find(|w| lhs.get(w).is_none()) {
            return Err(Error::Validation(format!(
                "constraint position {w} is not a position of `{lhs}`"
            )));
        }
        Ok(Production {
            lhs,
            target: target.into(),
            constraints,
            weight,
        })
    }

    pub fn lhs(&self) -> &Tree {
        &self.lhs
    }

    pub fn target(&self) -> &Name {
        &self.target
    }

    pub fn constraints(&self) -> &Constraints {
        &self.constraints
    }

    pub fn weight(&self) -> &Weight {
        &self.weight
    }

    pub fn height(&self) -> usize {
        self.lhs.height()
    }

    pub fn size(&self) -> usize {
        self.lhs.size()
    }

    /// State-labelled positions of the left-hand side (sink included), `⪯`-sorted.
    pub fn state_positions(&self) -> Vec<Position> {
        self.lhs.positions_where(|l| matches!(l, Label::State(_)))
    }

    pub fn state_at(&self, w: &Position) -> Option<&Name> {
        self.lhs.label_at(w).and_then(Label::state)
    }

    /// Key used for merging duplicates and canonical ordering.
    fn key(&self) -> (String, Name, String) {
        (
            self.lhs.to_string(),
            self.target.clone(),
            self.constraints.to_string(),
        )
    }
}

impl fmt::Display for Production {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.lhs)?;
        if !self.constraints.is_empty() {
            write!(f, " [{}]", self.constraints)?;
        }
        write!(f, " -> {} @ {}", self.target, self.weight)
    }
}

/// How many states `he(G) = |Q| · he(P)` counts.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum HeightConvention {
    /// Every state, the sink included.
    #[default]
    AllStates,
    ExcludeSink,
}

/// Height and size measures of a grammar.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Metrics {
    pub productions_height: usize,
    pub grammar_height: usize,
    pub productions_size: usize,
    pub grammar_size: usize,
}

/// Which grammar classes a [`Wtg`] belongs to.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Shape {
    /// No production carries constraints.
    pub wtg: bool,
    /// Every left-hand side has exactly one symbol, at the root.
    pub wtac: bool,
    pub wta: bool,
    pub is_wtgh: bool,
    /// Why `is_wtgh` fails, one entry per problem.
    pub diagnostics: Vec<String>,
}

/// A weighted tree grammar with equality constraints.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Wtg {
    alphabet: RankedAlphabet,
    states: BTreeSet<Name>,
    finals: BTreeMap<Name, Weight>,
    productions: Vec<Production>,
}

impl Wtg {
    /// Builds a grammar, dropping zero weights and merging duplicate
    /// productions (same left-hand side, constraints and target) by
    /// summing their weights. Production order is first occurrence.
    pub fn new<S: AsRef<str>>(
        alphabet: RankedAlphabet,
        states: impl IntoIterator<Item = S>,
        finals: impl IntoIterator<Item = (S, Weight)>,
        productions: Vec<Production>,
    ) -> Result<Wtg> {
        let mut state_set = BTreeSet::new();
        for q in states {
            let q = q.as_ref();
            if !is_identifier(q) {
                return Err(Error::Validation(format!("invalid state name `{q}`")));
            }
            if alphabet.contains(q) {
                return Err(Error::Validation(format!(
                    "state `{q}` clashes with a symbol of the same name"
                )));
            }
            state_set.insert(Name::from(q));
        }
        let mut final_map = BTreeMap::new();
        for (q, w) in finals {
            let q = q.as_ref();
            let q = state_set
                .get(q)
                .cloned()
                .ok_or_else(|| Error::UnknownState(q.to_string()))?;
            if !w.is_zero() {
                final_map.insert(q, w);
            }
        }
        let mut merged: Vec<Production> = Vec::with_capacity(productions.len());
        let mut seen: HashMap<(String, Name, String), usize> = HashMap::new();
        for p in productions {
            alphabet.check_with(&p.lhs, &mut |l| match l {
                Label::State(q) if state_set.contains(q) => Ok(()),
                Label::State(q) => Err(Error::UnknownState(q.to_string())),
                other => Err(Error::Validation(format!(
                    "unexpected `{other}` in a left-hand side"
                ))),
            })?;
            if !state_set.contains(&p.target) {
                return Err(Error::UnknownState(p.target.to_string()));
            }
            if p.weight.is_zero() {
                log::warn!("dropping zero-weight production `{p}`");
                continue;
            }
            match seen.get(&p.key()) {
                Some(&i) => {
                    let w = merged[i].weight.clone() + &p.weight;
                    merged[i].weight = w;
                }
                None => {
                    seen.insert(p.key(), merged.len());
                    merged.push(p);
                }
            }
        }
        Ok(Wtg {
            alphabet,
            states: state_set,
            finals: final_map,
            productions: merged,
        })
    }

    pub fn alphabet(&self) -> &RankedAlphabet {
        &self.alphabet
    }

    pub fn states(&self) -> &BTreeSet<Name> {
        &self.states
    }

    pub fn has_state(&self, q: &str) -> bool {
        self.states.contains(q)
    }

    /// Nonzero final weights.
    pub fn finals(&self) -> &BTreeMap<Name, Weight> {
        &self.finals
    }

    pub fn final_weight(&self, q: &str) -> Weight {
        self.finals.get(q).cloned().unwrap_or_else(Weight::zero)
    }

    pub fn productions(&self) -> &[Production] {
        &self.productions
    }

    pub fn production(&self, i: usize) -> &Production {
        &self.productions[i]
    }

    pub fn has_sink(&self) -> bool {
        self.states.contains(SINK)
    }

    /// Index of `γ(⊥, …, ⊥) → ⊥` for the given symbol.
    pub fn sink_production(&self, symbol: &str) -> Option<usize> {
        self.productions
            .iter()
            .position(|p| is_sink_production(p, symbol))
    }

    /// The same grammar with productions in canonical order.
    pub fn canonical(&self) -> Wtg {
        let mut productions = self.productions.clone();
        productions.sort_by_cached_key(Production::key);
        Wtg {
            productions,
            ..self.clone()
        }
    }

    pub fn metrics(&self, convention: HeightConvention) -> Metrics {
        let productions_height = self
            .productions
            .iter()
            .map(Production::height)
            .max()
            .unwrap_or(0);
        let productions_size = self.productions.iter().map(Production::size).sum();
        let state_count = match convention {
            HeightConvention::AllStates => self.states.len(),
            HeightConvention::ExcludeSink => self.states.len() - usize::from(self.has_sink()),
        };
        Metrics {
            productions_height,
            grammar_height: state_count * productions_height,
            productions_size,
            grammar_size: state_count + productions_size,
        }
    }

    /// `he(G)` under the default convention.
    pub fn height(&self) -> usize {
        self.metrics(HeightConvention::default()).grammar_height
    }

    pub fn shape(&self) -> Shape {
        let wtg = self.productions.iter().all(|p| p.constraints.is_empty());
        let wtac = self.productions.iter().all(|p| {
            p.lhs
                .children()
                .iter()
                .all(|c| matches!(c.label(), Label::State(_)))
        });
        let diagnostics = self.sink_diagnostics();
        Shape {
            wtg,
            wtac,
            wta: wtg && wtac,
            is_wtgh: diagnostics.is_empty(),
            diagnostics,
        }
    }

    fn sink_diagnostics(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !self.has_sink() {
            out.push(format!("no sink state `{SINK}`"));
            return out;
        }
        if self.finals.contains_key(SINK) {
            out.push("the sink state is final".into());
        }
        for (symbol, _) in self.alphabet.iter() {
            if self.sink_production(symbol).is_none() {
                out.push(format!("missing sink production for `{symbol}`"));
            }
        }
        for p in &self.productions {
            if &*p.target == SINK {
                let sym = p
                    .lhs
                    .label()
                    .symbol()
                    .map(|s| s.to_string())
                    .unwrap_or_default();
                if !is_sink_production(p, &sym) {
                    out.push(format!(
                        "`{p}` targets the sink but is not a sink production"
                    ));
                }
                continue;
            }
            for class in p.constraints.classes() {
                let labels: Vec<Option<&Name>> = class.iter().map(|w| p.state_at(w)).collect();
                if labels.iter().any(Option::is_none) {
                    out.push(format!("`{p}` constrains a position that is not a state"));
                    continue;
                }
                if labels[0].is_some_and(|q| &**q == SINK) {
                    out.push(format!("`{p}`: least position of a class is the sink"));
                }
                if labels[1..].iter().any(|q| q.is_some_and(|q| &**q != SINK)) {
                    out.push(format!(
                        "`{p}`: non-least position of a class is not the sink"
                    ));
                }
            }
            for w in p.state_positions() {
                if p.state_at(&w).is_some_and(|q| &**q == SINK)
                    && p.constraints.class_of(&w).is_none()
                {
                    out.push(format!("`{p}`: unconstrained sink at {w}"));
                }
            }
        }
        out
    }

    /// Replaces the production list (re-running normalization).
    pub(crate) fn with_parts(
        &self,
        states: BTreeSet<Name>,
        finals: BTreeMap<Name, Weight>,
        productions: Vec<Production>,
    ) -> Result<Wtg> {
        Wtg::new(
            self.alphabet.clone(),
            states.iter().map(|s| s.to_string()),
            finals.into_iter().map(|(q, w)| (q.to_string(), w)),
            productions,
        )
    }
}

fn is_sink_production(p: &Production, symbol: &str) -> bool {
    &*p.target == SINK
        && p.constraints.is_empty()
        && p.weight.is_one()
        && p.lhs.label().symbol().is_some_and(|s| &**s == symbol)
        && p.lhs
            .children()
            .iter()
            .all(|c| c.label().state().is_some_and(|q| &**q == SINK))
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::formats::{parse_term, parse_wtg};

    pub(crate) const EXAMPLE1: &str = "wtg {
      alphabet { a/0 g/1 d/3 }
      states { q q_f _bot }
      final { q_f: 1 }
      prod a -> q @ 1
      prod g(q) -> q @ 2
      prod d(q, g(_bot), q) [1 = 2.1] -> q_f @ 1
      prod a -> _bot @ 1
      prod g(_bot) -> _bot @ 1
      prod d(_bot, _bot, _bot) -> _bot @ 1
    }";

    pub(crate) fn example1() -> Wtg {
        parse_wtg(EXAMPLE1).unwrap()
    }

    #[test]
    fn example1_is_wtgh() {
        let g = example1();
        let shape = g.shape();
        assert!(shape.is_wtgh, "{:?}", shape.diagnostics);
        assert!(!shape.wtg);
        assert!(!shape.wtac);
    }

    #[test]
    fn removing_the_constraint_gives_a_wtg() {
        let g = parse_wtg(&EXAMPLE1.replace("[1 = 2.1]", "")).unwrap();
        assert!(g.shape().wtg);
        // an unconstrained sink below a real production breaks the sink discipline
        assert!(!g.shape().is_wtgh);
    }

    #[test]
    fn missing_sink_production_is_reported() {
        let g = parse_wtg(&EXAMPLE1.replace("prod d(_bot, _bot, _bot) -> _bot @ 1", "")).unwrap();
        let shape = g.shape();
        assert!(!shape.is_wtgh);
        assert!(shape.diagnostics.iter().any(|d| d.contains("`d`")));
    }

    #[test]
    fn wta_shape() {
        let g = parse_wtg(
            "wtg { alphabet { a/0 g/1 s/2 } states { q } final { q: 1 }
               prod a -> q @ 1  prod g(q) -> q @ 2  prod s(q, q) -> q @ 1 }",
        )
        .unwrap();
        let s = g.shape();
        assert!(s.wta && s.wtac && s.wtg && !s.is_wtgh);
    }

    #[test]
    fn constraint_satisfaction() {
        let t = parse_term("d(g(a), g(g(a)), g(a))").unwrap();
        let pair = |a: &str, b: &str| (a.parse().unwrap(), b.parse().unwrap());
        assert!(constraint_satisfied(&t, &pair("1", "2.1")));
        let t2 = parse_term("d(a, g(g(a)), a)").unwrap();
        assert!(!constraint_satisfied(&t2, &pair("1", "2.1")));
        assert!(!constraint_satisfied(&Tree::leaf("a"), &pair("1", "2")));
    }

    #[test]
    fn metrics_follow_both_conventions() {
        let g = example1();
        let all = g.metrics(HeightConvention::AllStates);
        let excl = g.metrics(HeightConvention::ExcludeSink);
        assert_eq!(all.productions_height, 2);
        assert_eq!(excl.grammar_height, 4);
        assert_eq!(all.grammar_height, 6);
        assert_eq!(all.productions_size, 1 + 2 + 5 + 1 + 2 + 4);
        assert_eq!(all.grammar_size, 3 + all.productions_size);

        let tiny = parse_wtg("wtg { alphabet { a/0 } states { q _bot } prod a -> q @ 1 }").unwrap();
        let m = tiny.metrics(HeightConvention::AllStates);
        assert_eq!((m.productions_height, m.grammar_height), (0, 0));
    }

    #[test]
    fn normalization_merges_and_drops() {
        let g = parse_wtg(
            "wtg { alphabet { a/0 } states { q } final { q: 1 }
               prod a -> q @ 2  prod a -> q @ 3  prod a -> q @ 0 }",
        )
        .unwrap();
        assert_eq!(g.productions().len(), 1);
        assert_eq!(g.production(0).weight(), &Weight::from(5));
    }

    #[test]
    fn constraint_classes_are_normalized() {
        let p = |s: &str| s.parse::<Position>().unwrap();
        let c = Constraints::from_pairs([(p("3"), p("1")), (p("2"), p("3")), (p("4"), p("4"))]);
        assert_eq!(c.classes(), &[vec![p("1"), p("2"), p("3")]]);
        assert!(c.related(&p("2"), &p("1")));
        assert!(c.related(&p("4"), &p("4")));
        assert!(!c.related(&p("4"), &p("1")));
        assert_eq!(c.to_string(), "1 = 2 = 3");
        assert_eq!(c.prefixed(&p("1.1")).to_string(), "1.1.1 = 1.1.2 = 1.1.3");
    }
}
