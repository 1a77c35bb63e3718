//! Brute-force reference implementations used to check the real ones.
//!
//! Nothing here shares evaluation code with [`crate::grammar`]: semantics
//! is recomputed by enumerating derivations explicitly, images by blind
//! enumeration of preimages, and the duplication property by a height
//! fixpoint instead of graph search. Everything is exponential.

use std::collections::{BTreeMap, HashMap};

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::grammar::{Constraints, Derivation, Production, Step, Weight, Wtg, SINK};
use crate::homomorphism::TreeHomomorphism;
use crate::terms::{Label, Name, Position, RankedAlphabet, Tree};
use crate::transform::trim;

/// Bounds for [`enum_trees`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EnumerationBudget {
    pub max_size: usize,
    pub max_height: Option<usize>,
    pub max_count: Option<usize>,
}

impl EnumerationBudget {
    pub fn size(max_size: usize) -> EnumerationBudget {
        EnumerationBudget {
            max_size,
            max_height: None,
            max_count: None,
        }
    }
}

/// Compositions of `n` into `k` positive parts, lexicographically.
fn compositions(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return if n == 0 { vec![Vec::new()] } else { Vec::new() };
    }
    let mut out = Vec::new();
    for first in 1..=n.saturating_sub(k - 1) {
        for mut rest in compositions(n - first, k - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// All trees over `sigma` within the budget, ordered by size, then by root
/// symbol name, then by the sizes and order of the children.
pub fn enum_trees(sigma: &RankedAlphabet, b: &EnumerationBudget) -> Result<Vec<Tree>> {
    if sigma.is_empty() || !sigma.iter().any(|(_, r)| r == 0) {
        return Err(Error::Validation("alphabet has no symbol of rank 0".into()));
    }
    let limit = b.max_count.unwrap_or(usize::MAX);
    let mut by_size: Vec<Vec<Tree>> = vec![Vec::new()];
    let mut total = 0;
    for n in 1..=b.max_size {
        let mut level = Vec::new();
        for (sym, rank) in sigma.iter() {
            for comp in compositions(n - 1, rank) {
                let mut partial: Vec<Vec<Tree>> = vec![Vec::new()];
                for &c in &comp {
                    partial = partial
                        .iter()
                        .flat_map(|pre| {
                            by_size[c].iter().map(move |t| {
                                let mut v = pre.clone();
                                v.push(t.clone());
                                v
                            })
                        })
                        .collect();
                }
                for children in partial {
                    let t = Tree::node(sym, children);
                    if b.max_height.is_none_or(|h| t.height() <= h) {
                        level.push(t);
                    }
                }
            }
        }
        total += level.len();
        by_size.push(level);
        if total >= limit {
            break;
        }
    }
    let mut out: Vec<Tree> = by_size.into_iter().flatten().collect();
    out.truncate(limit);
    Ok(out)
}

/// Matches `lhs` against `t`, collecting `(position, state)` for state leaves.
fn match_lhs(lhs: &Tree, t: &Tree, at: Position, out: &mut Vec<(Position, Name)>) -> bool {
    match lhs.label() {
        Label::State(q) => {
            out.push((at, q.clone()));
            true
        }
        label => {
            label == t.label()
                && lhs.arity() == t.arity()
                && lhs
                    .children()
                    .iter()
                    .zip(t.children())
                    .enumerate()
                    .all(|(i, (l, c))| match_lhs(l, c, at.child(i + 1), out))
        }
    }
}

fn constraints_hold(c: &Constraints, t: &Tree) -> bool {
    c.classes().iter().all(|class| {
        let first = t.get(&class[0]);
        first.is_some() && class.iter().all(|w| t.get(w) == first)
    })
}

/// Every complete derivation of `t` to `q`, as explicit step lists in
/// left-most order.
pub fn enumerate_derivations(g: &Wtg, t: &Tree, q: &str) -> Vec<Derivation> {
    fn go(g: &Wtg, t: &Tree, q: &str) -> Vec<Vec<Step>> {
        let mut out = Vec::new();
        for (i, p) in g.productions().iter().enumerate() {
            if &**p.target() != q {
                continue;
            }
            let mut leaves = Vec::new();
            if !match_lhs(p.lhs(), t, Position::root(), &mut leaves) {
                continue;
            }
            if !constraints_hold(p.constraints(), t) {
                continue;
            }
            let mut partial: Vec<Vec<Step>> = vec![Vec::new()];
            for (v, state) in &leaves {
                let sub = t.get(v).expect("matched position");
                let subs = go(g, sub, state);
                partial = partial
                    .iter()
                    .flat_map(|pre| {
                        subs.iter().map(move |d| {
                            let mut steps = pre.clone();
                            steps.extend(
                                d.iter()
                                    .map(|s| Step::new(s.production, v.concat(&s.position))),
                            );
                            steps
                        })
                    })
                    .collect();
            }
            for mut steps in partial {
                steps.push(Step::new(i, Position::root()));
                out.push(steps);
            }
        }
        out
    }
    go(g, t, q)
        .into_iter()
        .map(|steps| Derivation::new(steps).into_leftmost())
        .collect()
}

/// `Σ_q F(q) · Σ_{d ∈ D^q(t)} wt(d)` by explicit enumeration.
pub fn derivation_semantics(g: &Wtg, t: &Tree) -> Weight {
    let mut total = Weight::zero();
    for (q, f) in g.finals() {
        for d in enumerate_derivations(g, t, q) {
            let w: Weight = d
                .steps()
                .iter()
                .map(|s| g.production(s.production).weight())
                .product();
            total += w * f;
        }
    }
    total
}

fn check_noncollapsing(h: &TreeHomomorphism) -> Result<()> {
    match h.rules().find(|(_, r)| matches!(r.label(), Label::Var(_))) {
        Some((s, _)) => Err(Error::Validation(format!(
            "rule for `{s}` is a bare variable, preimages are unbounded"
        ))),
        None => Ok(()),
    }
}

/// `Σ_{t ∈ h⁻¹(u)} A(t)`, with preimages found by blind enumeration. No
/// rule may be a bare variable, so every preimage has size at most `|u|`.
pub fn brute_image(a: &Wtg, h: &TreeHomomorphism, u: &Tree) -> Result<Weight> {
    check_noncollapsing(h)?;
    let mut total = Weight::zero();
    for t in enum_trees(h.source(), &EnumerationBudget::size(u.size()))? {
        if &h.apply(&t)? == u {
            total += derivation_semantics(a, &t);
        }
    }
    Ok(total)
}

/// [`brute_image`] for every `u` of size at most `max_size` at once.
/// Trees with weight zero are omitted.
pub fn brute_image_table(
    a: &Wtg,
    h: &TreeHomomorphism,
    max_size: usize,
) -> Result<HashMap<Tree, Weight>> {
    check_noncollapsing(h)?;
    let mut out: HashMap<Tree, Weight> = HashMap::new();
    for t in enum_trees(h.source(), &EnumerationBudget::size(max_size))? {
        let u = h.apply(&t)?;
        if u.size() > max_size {
            continue;
        }
        let w = derivation_semantics(a, &t);
        if !w.is_zero() {
            *out.entry(u).or_default() += w;
        }
    }
    Ok(out)
}

/// Maximum height of a tree deriving to a state.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Height {
    Finite(usize),
    /// Taller than `he(G)`, hence arbitrarily tall.
    Unbounded,
}

/// Iterates `H(q) = max_p max(he(ℓ), max_v |v| + H(rep(v)))` from below,
/// where `rep(v)` is the state at the least position of `v`'s class (sink
/// copies repeat their representative's tree). Values are capped at
/// `he(G) + 1`, which marks a state as unbounded. States with no tree are
/// absent.
pub fn state_height_fixpoint(g: &Wtg) -> BTreeMap<Name, Height> {
    let cap = g.height() + 1;
    let mut h: BTreeMap<Name, usize> = BTreeMap::new();
    loop {
        let mut changed = false;
        for p in g.productions() {
            let mut val = Some(p.height());
            for v in p.state_positions() {
                let rep = match p.constraints().class_of(&v) {
                    Some(class) => &class[0],
                    None => &v,
                };
                let state = p.state_at(rep).or_else(|| p.state_at(&v));
                match state.and_then(|q| h.get(q)) {
                    Some(x) => val = val.map(|m| m.max(v.len() + x)),
                    None => val = None,
                }
            }
            let Some(val) = val.map(|x| x.min(cap)) else {
                continue;
            };
            match h.get_mut(p.target()) {
                Some(x) if *x >= val => {}
                Some(x) => {
                    *x = val;
                    changed = true;
                }
                None => {
                    h.insert(p.target().clone(), val);
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    h.into_iter()
        .map(|(q, x)| {
            (
                q,
                if x >= cap {
                    Height::Unbounded
                } else {
                    Height::Finite(x)
                },
            )
        })
        .collect()
}

/// The duplication property judged by [`state_height_fixpoint`]: some
/// constraint `(u, v)` with `ℓ(u) ≠ ⊥ = ℓ(v)` has arbitrarily tall trees
/// at `ℓ(u)`.
pub fn ldp_by_heights(g: &Wtg) -> bool {
    let heights = state_height_fixpoint(g);
    g.productions().iter().any(|p| {
        p.constraints().pairs().iter().any(|(u, v)| {
            let (Some(lu), Some(lv)) = (p.state_at(u), p.state_at(v)) else {
                return false;
            };
            &**lu != SINK && &**lv == SINK && heights.get(lu) == Some(&Height::Unbounded)
        })
    })
}

/// Outcome of a semantics comparison.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Comparison {
    Equal {
        checked: usize,
    },
    Mismatch {
        tree: Tree,
        left: Weight,
        right: Weight,
    },
}

impl Comparison {
    pub fn is_equal(&self) -> bool {
        matches!(self, Comparison::Equal { .. })
    }
}

/// Compares two weight functions on every tree within the budget.
pub fn compare_with(
    sigma: &RankedAlphabet,
    b: &EnumerationBudget,
    mut left: impl FnMut(&Tree) -> Weight,
    mut right: impl FnMut(&Tree) -> Weight,
) -> Result<Comparison> {
    let trees = enum_trees(sigma, b)?;
    for t in &trees {
        let (l, r) = (left(t), right(t));
        if l != r {
            return Ok(Comparison::Mismatch {
                tree: t.clone(),
                left: l,
                right: r,
            });
        }
    }
    Ok(Comparison::Equal {
        checked: trees.len(),
    })
}

/// Compares the semantics of two grammars over the same alphabet.
pub fn compare_semantics(g1: &Wtg, g2: &Wtg, b: &EnumerationBudget) -> Result<Comparison> {
    if g1.alphabet() != g2.alphabet() {
        return Err(Error::Validation(
            "the grammars have different alphabets".into(),
        ));
    }
    compare_with(
        g1.alphabet(),
        b,
        |t| derivation_semantics(g1, t),
        |t| derivation_semantics(g2, t),
    )
}

/// Shape of randomly generated grammars.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RandomParams {
    /// Alphabet size including the constant `a`.
    pub symbols: usize,
    pub max_rank: usize,
    /// Non-sink states.
    pub states: usize,
    /// Non-sink productions before trimming.
    pub productions: usize,
    /// Chance that a production gets a constraint class.
    pub constraint_prob: f64,
    /// Chance that a child of the root is a symbol instead of a state.
    pub nesting_prob: f64,
    pub max_weight: u64,
}

impl Default for RandomParams {
    fn default() -> Self {
        RandomParams {
            symbols: 4,
            max_rank: 2,
            states: 5,
            productions: 8,
            constraint_prob: 0.5,
            nesting_prob: 0.2,
            max_weight: 3,
        }
    }
}

const SYMBOLS: [&str; 6] = ["g", "s", "h", "k", "m", "n"];

fn random_alphabet(rng: &mut impl Rng, p: &RandomParams) -> RankedAlphabet {
    let extra = rng.gen_range(1..=p.symbols.clamp(2, SYMBOLS.len() + 1) - 1);
    let mut symbols = vec![("a".to_string(), 0)];
    for name in SYMBOLS.iter().take(extra) {
        symbols.push((name.to_string(), rng.gen_range(1..=p.max_rank.max(1))));
    }
    RankedAlphabet::new(symbols).expect("generated alphabet is valid")
}

fn pick_symbol(rng: &mut impl Rng, sigma: &RankedAlphabet, positive: bool) -> (Name, usize) {
    let choices: Vec<(Name, usize)> = sigma
        .iter()
        .filter(|(_, r)| !positive || *r > 0)
        .map(|(s, r)| (s.clone(), r))
        .collect();
    choices
        .choose(rng)
        .cloned()
        .expect("alphabet has such a symbol")
}

fn sink_productions(sigma: &RankedAlphabet) -> Vec<Production> {
    sigma
        .iter()
        .map(|(s, r)| {
            Production::new(
                Tree::node(s, vec![Tree::state(SINK); r]),
                SINK,
                Constraints::none(),
                Weight::one(),
            )
            .expect("sink production")
        })
        .collect()
}

/// A random trim WTGh. It may be small, since trimming removes whatever
/// the random productions do not connect.
pub fn random_wtgh(rng: &mut impl Rng, p: &RandomParams) -> Wtg {
    let sigma = random_alphabet(rng, p);
    let states: Vec<String> = (0..p.states.max(1)).map(|i| format!("q{i}")).collect();
    let random_state = |rng: &mut dyn rand::RngCore| states[rng.gen_range(0..states.len())].clone();
    let mut prods = vec![Production::new(
        Tree::leaf("a"),
        &states[0],
        Constraints::none(),
        Weight::from(rng.gen_range(1..=p.max_weight)),
    )
    .expect("leaf production")];
    for _ in 1..p.productions.max(1) {
        let positive = rng.gen_bool(0.85);
        let (root, rank) = pick_symbol(rng, &sigma, positive);
        let children: Vec<Tree> = (0..rank)
            .map(|_| {
                if rng.gen_bool(p.nesting_prob) {
                    let (s, r) = pick_symbol(rng, &sigma, false);
                    Tree::node(
                        &s,
                        (0..r).map(|_| Tree::state(&random_state(rng))).collect(),
                    )
                } else {
                    Tree::state(&random_state(rng))
                }
            })
            .collect();
        let mut lhs = Tree::node(&root, children);
        let mut constraints = Constraints::none();
        let leaves = lhs.positions_where(|l| matches!(l, Label::State(_)));
        if leaves.len() >= 2 && rng.gen_bool(p.constraint_prob) {
            let k = if leaves.len() > 2 && rng.gen_bool(0.3) {
                3
            } else {
                2
            };
            let mut picked: Vec<Position> = leaves.choose_multiple(rng, k).cloned().collect();
            picked.sort();
            for w in &picked[1..] {
                lhs = lhs.replace_at(w, Tree::state(SINK)).expect("leaf position");
            }
            constraints = Constraints::from_classes(vec![picked]);
        }
        let target = random_state(rng);
        prods.push(
            Production::new(
                lhs,
                &target,
                constraints,
                Weight::from(rng.gen_range(1..=p.max_weight)),
            )
            .expect("generated production"),
        );
    }
    prods.extend(sink_productions(&sigma));
    let mut finals: Vec<(String, Weight)> = Vec::new();
    for q in &states {
        if rng.gen_bool(0.4) {
            finals.push((q.clone(), Weight::from(rng.gen_range(1..=2))));
        }
    }
    if finals.is_empty() {
        finals.push((random_state(rng), Weight::one()));
    }
    let mut all_states = states.clone();
    all_states.push(SINK.into());
    let g = Wtg::new(sigma, all_states, finals, prods).expect("generated grammar is valid");
    trim(&g)
}

/// A random WTA (not necessarily trim) without a sink state.
pub fn random_wta(rng: &mut impl Rng, p: &RandomParams) -> Wtg {
    let sigma = random_alphabet(rng, p);
    let states: Vec<String> = (0..p.states.max(1)).map(|i| format!("q{i}")).collect();
    let mut prods = vec![Production::new(
        Tree::leaf("a"),
        &states[0],
        Constraints::none(),
        Weight::from(rng.gen_range(1..=p.max_weight)),
    )
    .expect("leaf production")];
    for _ in 1..p.productions.max(1) {
        let (root, rank) = pick_symbol(rng, &sigma, false);
        let children = (0..rank)
            .map(|_| Tree::state(&states[rng.gen_range(0..states.len())]))
            .collect();
        let target = &states[rng.gen_range(0..states.len())];
        prods.push(
            Production::new(
                Tree::node(&root, children),
                target,
                Constraints::none(),
                Weight::from(rng.gen_range(1..=p.max_weight)),
            )
            .expect("generated production"),
        );
    }
    let mut finals: Vec<(String, Weight)> = Vec::new();
    for (i, q) in states.iter().enumerate() {
        if i == 0 || rng.gen_bool(0.4) {
            finals.push((q.clone(), Weight::from(rng.gen_range(1..=2))));
        }
    }
    Wtg::new(sigma, states.clone(), finals, prods).expect("generated automaton is valid")
}

/// Adds `count` states that trimming must remove: each is either never
/// producible or producible but useless for every final state. Returns
/// the new grammar and the added names.
pub fn with_dead_states(rng: &mut impl Rng, g: &Wtg, count: usize) -> (Wtg, Vec<Name>) {
    let sigma = g.alphabet();
    let live: Vec<Name> = g
        .states()
        .iter()
        .filter(|q| &***q != SINK)
        .cloned()
        .collect();
    let mut prods = g.productions().to_vec();
    let mut names = Vec::new();
    for k in 0..count {
        let dead = format!("dead{k}");
        let (sym, rank) = pick_symbol(rng, sigma, true);
        if k % 2 == 0 {
            // unproductive: every production for it needs itself
            let children = (0..rank).map(|_| Tree::state(&dead)).collect();
            prods.push(
                Production::new(
                    Tree::node(&sym, children),
                    &dead,
                    Constraints::none(),
                    Weight::from(5),
                )
                .expect("dead production"),
            );
            if let Some(q) = live.choose(rng) {
                let mut kids: Vec<Tree> = (0..rank).map(|_| Tree::state(q)).collect();
                kids[0] = Tree::state(&dead);
                prods.push(
                    Production::new(
                        Tree::node(&sym, kids),
                        q,
                        Constraints::none(),
                        Weight::from(7),
                    )
                    .expect("dead production"),
                );
            }
        } else {
            // producible but never reaching a final state
            prods.push(
                Production::new(Tree::leaf("a"), &dead, Constraints::none(), Weight::from(2))
                    .expect("dead production"),
            );
            if let Some(q) = live.choose(rng) {
                let kids = (0..rank).map(|_| Tree::state(q)).collect();
                prods.push(
                    Production::new(
                        Tree::node(&sym, kids),
                        &dead,
                        Constraints::none(),
                        Weight::from(3),
                    )
                    .expect("dead production"),
                );
            }
        }
        names.push(Name::from(dead.as_str()));
    }
    let mut states: Vec<String> = g.states().iter().map(|q| q.to_string()).collect();
    states.extend(names.iter().map(|q| q.to_string()));
    let finals: Vec<(String, Weight)> = g
        .finals()
        .iter()
        .map(|(q, w)| (q.to_string(), w.clone()))
        .collect();
    let out = Wtg::new(sigma.clone(), states, finals, prods).expect("valid extension");
    (out, names)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formats::{parse_hom, parse_term, parse_wtg};
    use crate::grammar::tests::example1;
    use crate::grammar::{derivations, semantics};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn alphabet(spec: &[(&str, usize)]) -> RankedAlphabet {
        RankedAlphabet::new(spec.iter().copied()).unwrap()
    }

    fn strings(ts: &[Tree]) -> Vec<String> {
        ts.iter().map(|t| t.to_string()).collect()
    }

    #[test]
    fn small_enumerations() {
        let b = EnumerationBudget::size(3);
        assert_eq!(
            strings(&enum_trees(&alphabet(&[("a", 0), ("g", 1)]), &b).unwrap()),
            ["a", "g(a)", "g(g(a))"]
        );
        assert_eq!(
            strings(&enum_trees(&alphabet(&[("a", 0), ("s", 2)]), &b).unwrap()),
            ["a", "s(a, a)"]
        );
    }

    /// Number of trees of each exact size, by the recurrence over root ranks.
    fn counts(ranks: &[usize], max: usize) -> Vec<u128> {
        let mut c = vec![0u128; max + 1];
        for n in 1..=max {
            let mut total = 0;
            for &r in ranks {
                // ways to split n-1 nodes over r ordered children
                let mut ways = vec![0u128; n];
                ways[0] = 1;
                for _ in 0..r {
                    let mut next = vec![0u128; n];
                    for (used, &w) in ways.iter().enumerate() {
                        if w == 0 {
                            continue;
                        }
                        for (k, nk) in next.iter_mut().enumerate().skip(used + 1) {
                            *nk += w * c[k - used];
                        }
                    }
                    ways = next;
                }
                total += ways[n - 1];
            }
            c[n] = total;
        }
        c
    }

    #[test]
    fn enumeration_matches_the_count_recurrence() {
        let sigma = alphabet(&[("a", 0), ("g", 1), ("s", 2)]);
        let trees = enum_trees(&sigma, &EnumerationBudget::size(7)).unwrap();
        let c = counts(&[0, 1, 2], 7);
        for (n, &expected) in c.iter().enumerate().skip(1) {
            let got = trees.iter().filter(|t| t.size() == n).count() as u128;
            assert_eq!(got, expected, "size {n}");
        }
        let mut dedup = strings(&trees);
        dedup.sort();
        dedup.dedup();
        assert_eq!(dedup.len(), trees.len());
    }

    #[test]
    fn budgets_are_respected() {
        let sigma = alphabet(&[("a", 0), ("g", 1), ("s", 2)]);
        let b = EnumerationBudget {
            max_size: 6,
            max_height: Some(2),
            max_count: Some(10),
        };
        let trees = enum_trees(&sigma, &b).unwrap();
        assert_eq!(trees.len(), 10);
        assert!(trees.iter().all(|t| t.height() <= 2));
    }

    #[test]
    fn oracle_derivations_match_the_evaluator() {
        let g = example1();
        for t in enum_trees(g.alphabet(), &EnumerationBudget::size(7)).unwrap() {
            assert_eq!(derivation_semantics(&g, &t), semantics(&g, &t), "{t}");
            for q in g.states() {
                let mut a = enumerate_derivations(&g, &t, q);
                let mut b = derivations(&g, &t, q);
                a.sort_by_key(|d| format!("{d:?}"));
                b.sort_by_key(|d| format!("{d:?}"));
                assert_eq!(a, b);
            }
        }
    }

    #[test]
    fn brute_image_examples() {
        let a = parse_wtg(
            "wtg { alphabet { a/0 g/1 s/2 } states { q } final { q: 1 }
               prod a -> q @ 1  prod g(q) -> q @ 2  prod s(q, q) -> q @ 1 }",
        )
        .unwrap();
        let h = parse_hom(
            "hom { source { a/0 g/1 s/2 } target { a/0 g/1 d/3 }
               rule s -> d(x2, g(x2), x1)  rule g -> g(x1)  rule a -> a }",
        )
        .unwrap();
        let w = |s: &str| brute_image(&a, &h, &parse_term(s).unwrap()).unwrap();
        assert_eq!(w("d(g(a), g(g(a)), g(a))"), Weight::from(4));
        assert_eq!(w("a"), Weight::one());
        assert!(w("d(a, g(g(a)), a)").is_zero());
        let table = brute_image_table(&a, &h, 8).unwrap();
        assert_eq!(
            table[&parse_term("d(g(a), g(g(a)), g(a))").unwrap()],
            Weight::from(4)
        );
    }

    #[test]
    fn height_fixpoint_examples() {
        let g = example1();
        let h = state_height_fixpoint(&g);
        assert_eq!(h["q"], Height::Unbounded);
        assert!(ldp_by_heights(&g));
        let small = parse_wtg(
            "wtg { alphabet { a/0 s/2 } states { q0 q_f _bot } final { q_f: 1 }
               prod a -> q0 @ 2  prod s(q0, _bot) [1 = 2] -> q_f @ 3
               prod a -> _bot @ 1  prod s(_bot, _bot) -> _bot @ 1 }",
        )
        .unwrap();
        let h = state_height_fixpoint(&small);
        assert_eq!(h["q0"], Height::Finite(0));
        assert_eq!(h["q_f"], Height::Finite(1));
        assert!(!ldp_by_heights(&small));
    }

    #[test]
    fn random_grammars_are_trim_wtgh() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let g = random_wtgh(&mut rng, &RandomParams::default());
            assert!(g.shape().is_wtgh, "{:?}", g.shape().diagnostics);
            assert_eq!(trim(&g), g);
            let a = random_wta(&mut rng, &RandomParams::default());
            assert!(a.shape().wta);
        }
    }

    #[test]
    fn comparison_reports_the_first_mismatch() {
        let g = example1();
        let other =
            parse_wtg(&crate::grammar::tests::EXAMPLE1.replace("g(q) -> q @ 2", "g(q) -> q @ 3"))
                .unwrap();
        let b = EnumerationBudget::size(7);
        assert!(compare_semantics(&g, &g, &b).unwrap().is_equal());
        match compare_semantics(&g, &other, &b).unwrap() {
            Comparison::Mismatch { tree, left, right } => {
                assert_eq!(tree.to_string(), "d(a, g(a), g(a))");
                assert_eq!((left, right), (Weight::from(2), Weight::from(3)));
            }
            c => panic!("{c:?}"),
        }
    }
}
