//! Ranked alphabets, finite ordered trees, positions and contexts.
//!
//! A single [`Tree`] type covers every kind of term the crate manipulates:
//! ground trees over an alphabet, left-hand sides of productions (which may
//! carry state leaves), homomorphism patterns (variable leaves) and contexts
//! (hole leaves). The [`Label`] of a node says which kind it is.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Interned-by-refcount name used for symbols and states.
pub type Name = Arc<str>;

/// Returns true if `s` is a legal symbol or state identifier.
pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// A finite set of symbols, each with a rank.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct RankedAlphabet {
    symbols: BTreeMap<Name, usize>,
}

impl RankedAlphabet {
    pub fn new<I, S>(symbols: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, usize)>,
        S: AsRef<str>,
    {
        let mut map = BTreeMap::new();
        for (name, rank) in symbols {
            let name = name.as_ref();
            if !is_identifier(name) {
                return Err(Error::Validation(format!("invalid symbol name `{name}`")));
            }
            if map.insert(Name::from(name), rank).is_some() {
                return Err(Error::Validation(format!("duplicate symbol `{name}`")));
            }
        }
        if !map.values().any(|&r| r == 0) {
            return Err(Error::Validation(
                "alphabet needs at least one symbol of rank 0".into(),
            ));
        }
        Ok(RankedAlphabet { symbols: map })
    }

    pub fn rank(&self, symbol: &str) -> Option<usize> {
        self.symbols.get(symbol).copied()
    }

    pub fn contains(&self, symbol: &str) -> bool {
        self.symbols.contains_key(symbol)
    }

    /// Symbols with their ranks in name order.
    pub fn iter(&self) -> impl Iterator<Item = (&Name, usize)> + '_ {
        self.symbols.iter().map(|(n, &r)| (n, r))
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn max_rank(&self) -> usize {
        self.symbols.values().copied().max().unwrap_or(0)
    }

    /// Checks that `t` is a ground tree over this alphabet.
    pub fn check_tree(&self, t: &Tree) -> Result<()> {
        self.check_with(t, &mut |l| match l {
            Label::Symbol(_) => Ok(()),
            other => Err(Error::Validation(format!(
                "unexpected `{other}` in a ground tree"
            ))),
        })
    }

    /// Checks symbol ranks in `t`, delegating non-symbol leaves to `leaf`.
    pub(crate) fn check_with(
        &self,
        t: &Tree,
        leaf: &mut dyn FnMut(&Label) -> Result<()>,
    ) -> Result<()> {
        match t.label() {
            Label::Symbol(s) => {
                let rank = self
                    .rank(s)
                    .ok_or_else(|| Error::UnknownSymbol(s.to_string()))?;
                if rank != t.arity() {
                    return Err(Error::RankMismatch {
                        symbol: s.to_string(),
                        expected: rank,
                        found: t.arity(),
                    });
                }
                t.children()
                    .iter()
                    .try_for_each(|c| self.check_with(c, leaf))
            }
            other => {
                if t.arity() != 0 {
                    return Err(Error::Validation(format!("`{other}` must be a leaf")));
                }
                leaf(other)
            }
        }
    }
}

/// Node label. Only `Symbol` nodes may have children.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Symbol(Name),
    State(Name),
    /// Homomorphism variable `x_i`, 1-based.
    Var(usize),
    Hole,
}

impl Label {
    pub fn symbol(&self) -> Option<&Name> {
        match self {
            Label::Symbol(s) => Some(s),
            _ => None,
        }
    }

    pub fn state(&self) -> Option<&Name> {
        match self {
            Label::State(q) => Some(q),
            _ => None,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Symbol(s) | Label::State(s) => f.write_str(s),
            Label::Var(i) => write!(f, "x{i}"),
            Label::Hole => f.write_str("@box"),
        }
    }
}

/// An immutable ordered tree. Cloning is O(1).
#[derive(Clone, Debug, Eq)]
pub struct Tree {
    label: Label,
    children: Arc<[Tree]>,
}

impl PartialEq for Tree {
    fn eq(&self, other: &Self) -> bool {
        self.label == other.label
            && (Arc::ptr_eq(&self.children, &other.children) || self.children == other.children)
    }
}

impl std::hash::Hash for Tree {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.label.hash(state);
        self.children.hash(state);
    }
}

impl Tree {
    pub fn new(label: Label, children: Vec<Tree>) -> Tree {
        Tree {
            label,
            children: children.into(),
        }
    }

    pub fn leaf(symbol: &str) -> Tree {
        Tree::new(Label::Symbol(symbol.into()), Vec::new())
    }

    pub fn node(symbol: &str, children: Vec<Tree>) -> Tree {
        Tree::new(Label::Symbol(symbol.into()), children)
    }

    pub fn state(q: &str) -> Tree {
        Tree::new(Label::State(q.into()), Vec::new())
    }

    pub fn var(i: usize) -> Tree {
        Tree::new(Label::Var(i), Vec::new())
    }

    pub fn hole() -> Tree {
        Tree::new(Label::Hole, Vec::new())
    }

    pub fn label(&self) -> &Label {
        &self.label
    }

    pub fn children(&self) -> &[Tree] {
        &self.children
    }

    pub fn arity(&self) -> usize {
        self.children.len()
    }

    /// True if every label is a symbol.
    pub fn is_ground(&self) -> bool {
        matches!(self.label, Label::Symbol(_)) && self.children.iter().all(Tree::is_ground)
    }

    pub fn size(&self) -> usize {
        1 + self.children.iter().map(Tree::size).sum::<usize>()
    }

    pub fn height(&self) -> usize {
        self.children
            .iter()
            .map(|c| c.height() + 1)
            .max()
            .unwrap_or(0)
    }

    /// All positions in ascending `⪯` order (post-order; the root comes last).
    pub fn positions(&self) -> Vec<Position> {
        let mut out = Vec::with_capacity(self.size());
        let mut path = Vec::new();
        fn walk(t: &Tree, path: &mut Vec<usize>, out: &mut Vec<Position>) {
            for (i, c) in t.children.iter().enumerate() {
                path.push(i + 1);
                walk(c, path, out);
                path.pop();
            }
            out.push(Position(path.clone()));
        }
        walk(self, &mut path, &mut out);
        out
    }

    /// Positions whose label satisfies `pred`, in ascending `⪯` order.
    pub fn positions_where(&self, mut pred: impl FnMut(&Label) -> bool) -> Vec<Position> {
        self.positions()
            .into_iter()
            .filter(|p| pred(self.get(p).expect("own position").label()))
            .collect()
    }

    pub fn get(&self, w: &Position) -> Option<&Tree> {
        let mut t = self;
        for &i in w.indices() {
            t = t.children.get(i.checked_sub(1)?)?;
        }
        Some(t)
    }

    pub fn subtree_at(&self, w: &Position) -> Result<&Tree> {
        self.get(w)
            .ok_or_else(|| Error::PositionOutOfRange(w.to_string()))
    }

    pub fn label_at(&self, w: &Position) -> Option<&Label> {
        self.get(w).map(Tree::label)
    }

    /// `t[s]_w`.
    pub fn replace_at(&self, w: &Position, s: Tree) -> Result<Tree> {
        self.get(w)
            .ok_or_else(|| Error::PositionOutOfRange(w.to_string()))?;
        Ok(self.replace_unchecked(w.indices(), s))
    }

    fn replace_unchecked(&self, path: &[usize], s: Tree) -> Tree {
        match path.split_first() {
            None => s,
            Some((&i, rest)) => {
                let mut children: Vec<Tree> = self.children.to_vec();
                children[i - 1] = children[i - 1].replace_unchecked(rest, s);
                Tree::new(self.label.clone(), children)
            }
        }
    }

    /// Rebuilds the tree, replacing every leaf for which `f` returns `Some`.
    pub fn map_leaves(&self, f: &mut dyn FnMut(&Label) -> Option<Tree>) -> Tree {
        if self.children.is_empty() {
            return f(&self.label).unwrap_or_else(|| self.clone());
        }
        let children = self.children.iter().map(|c| c.map_leaves(f)).collect();
        Tree::new(self.label.clone(), children)
    }

    /// Pre-order iterator over `(position, subtree)` pairs.
    pub fn walk(&self) -> Vec<(Position, &Tree)> {
        let mut out = Vec::new();
        let mut stack = vec![(Position::root(), self)];
        while let Some((p, t)) = stack.pop() {
            for (i, c) in t.children.iter().enumerate().rev() {
                stack.push((p.child(i + 1), c));
            }
            out.push((p, t));
        }
        out
    }

    /// State names occurring in the tree, left to right.
    pub fn states(&self) -> Vec<&Name> {
        let mut out = Vec::new();
        fn go<'a>(t: &'a Tree, out: &mut Vec<&'a Name>) {
            if let Label::State(q) = &t.label {
                out.push(q);
            }
            t.children.iter().for_each(|c| go(c, out));
        }
        go(self, &mut out);
        out
    }
}

impl fmt::Display for Tree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.label)?;
        if !self.children.is_empty() {
            f.write_str("(")?;
            for (i, c) in self.children.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{c}")?;
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}

/// A path from the root: a sequence of 1-based child indices.
///
/// `Ord` is the lexicographic order in which a proper prefix is *larger*
/// than its extensions, so the root is the greatest position.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Position(Vec<usize>);

/// How two positions relate under the prefix order.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PositionRelation {
    Equal,
    /// The first position is a proper prefix of the second.
    PrefixOf,
    /// The first position properly extends the second.
    Extends,
    Parallel,
}

impl Position {
    pub fn root() -> Position {
        Position(Vec::new())
    }

    pub fn new(indices: Vec<usize>) -> Result<Position> {
        if indices.contains(&0) {
            return Err(Error::Validation("position indices are 1-based".into()));
        }
        Ok(Position(indices))
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }

    pub fn child(&self, i: usize) -> Position {
        let mut v = self.0.clone();
        v.push(i);
        Position(v)
    }

    pub fn concat(&self, other: &Position) -> Position {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Position(v)
    }

    /// `self ≤ other` in the prefix order (reflexive).
    pub fn is_prefix_of(&self, other: &Position) -> bool {
        other.0.starts_with(&self.0)
    }

    /// `self⁻¹ other`, if `self` is a prefix of `other`.
    pub fn strip_prefix_of(&self, other: &Position) -> Option<Position> {
        other
            .0
            .strip_prefix(self.0.as_slice())
            .map(|r| Position(r.to_vec()))
    }

    pub fn relation(&self, other: &Position) -> PositionRelation {
        if self == other {
            PositionRelation::Equal
        } else if self.is_prefix_of(other) {
            PositionRelation::PrefixOf
        } else if other.is_prefix_of(self) {
            PositionRelation::Extends
        } else {
            PositionRelation::Parallel
        }
    }

    /// All prefixes from the root down to `self`, inclusive.
    pub fn prefixes(&self) -> impl Iterator<Item = Position> + '_ {
        (0..=self.0.len()).map(move |k| Position(self.0[..k].to_vec()))
    }
}

impl Ord for Position {
    fn cmp(&self, other: &Self) -> Ordering {
        for (a, b) in self.0.iter().zip(other.0.iter()) {
            match a.cmp(b) {
                Ordering::Equal => continue,
                o => return o,
            }
        }
        // one is a prefix of the other; the shorter one is larger
        other.0.len().cmp(&self.0.len())
    }
}

impl PartialOrd for Position {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("e");
        }
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(".")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

impl FromStr for Position {
    type Err = Error;

    fn from_str(s: &str) -> Result<Position> {
        let s = s.trim();
        if s == "e" {
            return Ok(Position::root());
        }
        let indices = s
            .split('.')
            .map(|part| {
                part.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::Validation(format!("invalid position `{s}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        Position::new(indices)
    }
}

/// A tree with at least one hole, filled in ascending `⪯` order of holes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Context {
    tree: Tree,
    holes: Vec<Position>,
}

impl Context {
    pub fn new(tree: Tree) -> Result<Context> {
        let holes = tree.positions_where(|l| *l == Label::Hole);
        if holes.is_empty() {
            return Err(Error::Validation(
                "a context needs at least one hole".into(),
            ));
        }
        Ok(Context { tree, holes })
    }

    pub fn tree(&self) -> &Tree {
        &self.tree
    }

    pub fn holes(&self) -> &[Position] {
        &self.holes
    }

    pub fn fill(&self, trees: &[Tree]) -> Result<Tree> {
        if trees.len() != self.holes.len() {
            return Err(Error::ArityMismatch {
                expected: self.holes.len(),
                found: trees.len(),
            });
        }
        let mut out = self.tree.clone();
        for (w, t) in self.holes.iter().zip(trees) {
            out = out.replace_at(w, t.clone())?;
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Position {
        s.parse().unwrap()
    }

    fn g(t: Tree) -> Tree {
        Tree::node("g", vec![t])
    }

    fn example_tree() -> Tree {
        let a = Tree::leaf("a");
        Tree::node("d", vec![g(a.clone()), g(g(a.clone())), g(a)])
    }

    #[test]
    fn positions_are_post_order() {
        assert_eq!(Tree::leaf("a").positions(), vec![Position::root()]);
        let got: Vec<String> = example_tree()
            .positions()
            .iter()
            .map(|w| w.to_string())
            .collect();
        assert_eq!(got, ["1.1", "1", "2.1.1", "2.1", "2", "3.1", "3", "e"]);
        let sorted = {
            let mut v = example_tree().positions();
            v.sort();
            v
        };
        assert_eq!(sorted, example_tree().positions());
    }

    #[test]
    fn subtree_and_replace() {
        let t = example_tree();
        assert_eq!(t.subtree_at(&p("2")).unwrap().to_string(), "g(g(a))");
        assert_eq!(t.subtree_at(&Position::root()).unwrap(), &t);
        assert!(g(Tree::leaf("a")).subtree_at(&p("1.1")).is_err());

        let r = t.replace_at(&p("1.1"), g(Tree::leaf("a"))).unwrap();
        assert_eq!(r.to_string(), "d(g(g(a)), g(g(a)), g(a))");
        assert_eq!(
            t.replace_at(&Position::root(), Tree::leaf("a")).unwrap(),
            Tree::leaf("a")
        );
        assert!(t.replace_at(&p("4"), Tree::leaf("a")).is_err());
    }

    #[test]
    fn position_order() {
        assert_eq!(p("1").relation(&p("1.1")), PositionRelation::PrefixOf);
        assert!(p("1") > p("1.1"));
        assert_eq!(p("1.1").relation(&p("2.1")), PositionRelation::Parallel);
        assert!(p("1.1") < p("2.1"));
        assert_eq!(
            Position::root().relation(&p("3")),
            PositionRelation::PrefixOf
        );
        assert!(Position::root() > p("3"));
        assert_eq!(p("2.1").relation(&p("2")), PositionRelation::Extends);
        assert_eq!(p("e"), Position::root());
        assert_eq!(p("12.3").to_string(), "12.3");
        assert!("0.1".parse::<Position>().is_err());
    }

    #[test]
    fn height_and_size() {
        assert_eq!((Tree::leaf("a").height(), Tree::leaf("a").size()), (0, 1));
        assert_eq!((example_tree().height(), example_tree().size()), (3, 8));
        let ga = g(Tree::leaf("a"));
        assert_eq!((ga.height(), ga.size()), (1, 2));
    }

    #[test]
    fn context_fill_uses_lexicographic_hole_order() {
        let a = Tree::leaf("a");
        let c = Context::new(Tree::node("s", vec![Tree::hole(), Tree::hole()])).unwrap();
        assert_eq!(
            c.fill(&[a.clone(), g(a.clone())]).unwrap().to_string(),
            "s(a, g(a))"
        );
        let id = Context::new(Tree::hole()).unwrap();
        assert_eq!(id.fill(&[example_tree()]).unwrap(), example_tree());
        let c = Context::new(Tree::node("s", vec![g(Tree::hole()), Tree::hole()])).unwrap();
        assert_eq!(c.holes(), &[p("1.1"), p("2")]);
        assert_eq!(
            c.fill(&[a.clone(), a.clone()]).unwrap().to_string(),
            "s(g(a), a)"
        );
        assert!(matches!(c.fill(&[a]), Err(Error::ArityMismatch { .. })));
        assert!(Context::new(Tree::leaf("a")).is_err());
    }

    #[test]
    fn alphabet_validation() {
        assert!(RankedAlphabet::new([("g", 1)]).is_err());
        assert!(RankedAlphabet::new([("a", 0), ("a", 1)]).is_err());
        assert!(RankedAlphabet::new([("1a", 0)]).is_err());
        let sigma = RankedAlphabet::new([("a", 0), ("g", 1)]).unwrap();
        assert!(sigma.check_tree(&g(Tree::leaf("a"))).is_ok());
        assert!(matches!(
            sigma.check_tree(&Tree::node("g", vec![Tree::leaf("a"), Tree::leaf("a")])),
            Err(Error::RankMismatch { .. })
        ));
    }
}
