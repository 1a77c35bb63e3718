use std::collections::BTreeMap;

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use treehom::decide::has_ldp;
use treehom::formats::{parse_term, parse_wtg, render_tree, render_wtg};
use treehom::grammar::{semantics, Evaluator};
use treehom::oracle::{
    brute_image_table, compare_semantics, compare_with, derivation_semantics, enum_trees,
    random_wta, random_wtgh, EnumerationBudget, RandomParams,
};
use treehom::transform::{hom_image, trim};
use treehom::{Position, RankedAlphabet, Tree, TreeHomomorphism, Weight};

fn tree() -> impl Strategy<Value = Tree> {
    let leaf = Just(Tree::leaf("a"));
    leaf.prop_recursive(5, 40, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|t| Tree::node("g", vec![t])),
            (inner.clone(), inner).prop_map(|(l, r)| Tree::node("s", vec![l, r])),
        ]
    })
}

fn position_in(t: &Tree) -> impl Strategy<Value = Position> {
    let all = t.positions();
    (0..all.len()).prop_map(move |i| all[i].clone())
}

/// A nondeleting, nonerasing homomorphism from `source` into `source`
/// extended with `u/1`, `b/2` and `d/3`. Some rules copy a variable.
fn random_hom(rng: &mut impl Rng, source: &RankedAlphabet) -> TreeHomomorphism {
    let mut extra: Vec<(String, usize)> = source.iter().map(|(s, r)| (s.to_string(), r)).collect();
    extra.extend([("u".into(), 1), ("b".into(), 2), ("d".into(), 3)]);
    let target = RankedAlphabet::new(extra.clone()).unwrap();
    let of_rank = |r: usize| -> Vec<&str> {
        extra
            .iter()
            .filter(|(_, k)| *k == r)
            .map(|(s, _)| s.as_str())
            .collect()
    };
    let mut rules = BTreeMap::new();
    for (sym, k) in source.iter() {
        let mut items: Vec<Tree> = (1..=k).map(Tree::var).collect();
        if k > 0 && rng.gen_bool(0.4) {
            let copy = items[rng.gen_range(0..k)].clone();
            items.push(copy);
        }
        if items.is_empty() || rng.gen_bool(0.2) {
            items.push(Tree::leaf("a"));
        }
        items.shuffle(rng);
        while items.len() > 1 {
            let r = rng.gen_range(2..=items.len().min(3));
            let f = *of_rank(r).choose(rng).unwrap();
            let at = rng.gen_range(0..=items.len() - r);
            let args: Vec<Tree> = items.drain(at..at + r).collect();
            items.insert(at, Tree::node(f, args));
        }
        let mut rhs = items.pop().unwrap();
        if rhs.arity() == 0 && k > 0 || rng.gen_bool(0.2) {
            rhs = Tree::node(of_rank(1).choose(rng).unwrap(), vec![rhs]);
        }
        rules.insert(sym.clone(), rhs);
    }
    TreeHomomorphism::new(source.clone(), target, rules).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn replace_then_read_back((t, w) in tree().prop_flat_map(|t| {
        let w = position_in(&t);
        (Just(t), w)
    }), s in tree()) {
        let r = t.replace_at(&w, s.clone()).unwrap();
        prop_assert_eq!(r.subtree_at(&w).unwrap(), &s);
        prop_assert_eq!(r.size(), t.size() - t.subtree_at(&w).unwrap().size() + s.size());
        for v in t.positions() {
            if !w.is_prefix_of(&v) && !v.is_prefix_of(&w) {
                prop_assert_eq!(r.subtree_at(&v).unwrap(), t.subtree_at(&v).unwrap());
            }
        }
    }

    #[test]
    fn positions_are_in_postorder(t in tree()) {
        let ps = t.positions();
        prop_assert_eq!(ps.len(), t.size());
        prop_assert!(ps.last().unwrap().is_root());
        for (i, p) in ps.iter().enumerate() {
            for a in p.prefixes().filter(|a| a != p) {
                prop_assert!(ps.iter().position(|x| *x == a).unwrap() > i);
            }
        }
        let mut sorted = ps.clone();
        sorted.sort();
        prop_assert_eq!(sorted, ps);
    }

    #[test]
    fn tree_text_round_trips(t in tree()) {
        prop_assert_eq!(parse_term(&render_tree(&t)).unwrap(), t);
    }

    #[test]
    fn grammar_text_round_trips(seed in any::<u64>()) {
        let g = random_wtgh(&mut ChaCha8Rng::seed_from_u64(seed), &RandomParams::default());
        let back = parse_wtg(&render_wtg(&g)).unwrap();
        prop_assert_eq!(back.canonical(), g.canonical());
    }

    #[test]
    fn evaluator_matches_derivation_sums(seed in any::<u64>()) {
        let g = random_wtgh(&mut ChaCha8Rng::seed_from_u64(seed), &RandomParams::default());
        let eval = Evaluator::new(&g);
        for t in enum_trees(g.alphabet(), &EnumerationBudget::size(6)).unwrap() {
            prop_assert_eq!(eval.semantics(&t), derivation_semantics(&g, &t), "tree {}", t);
        }
    }

    #[test]
    fn trim_keeps_semantics(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_wta(&mut rng, &RandomParams::default());
        let t = trim(&g);
        let cmp = compare_semantics(&g, &t, &EnumerationBudget::size(6)).unwrap();
        prop_assert!(cmp.is_equal(), "{:?}", cmp);
        prop_assert_eq!(trim(&t).canonical(), t.canonical());
    }

    #[test]
    fn image_matches_brute_force(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let params = RandomParams { states: 3, productions: 6, ..RandomParams::default() };
        let a = random_wta(&mut rng, &params);
        let h = random_hom(&mut rng, a.alphabet());
        let image = hom_image(&a, &h).unwrap();
        prop_assert!(image.shape().is_wtgh, "{}", render_wtg(&image));
        let table = brute_image_table(&a, &h, 6).unwrap();
        let cmp = compare_with(
            h.target(),
            &EnumerationBudget::size(6),
            |u| semantics(&image, u),
            |u| table.get(u).cloned().unwrap_or_else(Weight::zero),
        )
        .unwrap();
        prop_assert!(cmp.is_equal(), "{:?}", cmp);
    }

    #[test]
    fn linear_homs_give_regular_images(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_wta(&mut rng, &RandomParams::default());
        let h = TreeHomomorphism::identity(a.alphabet());
        prop_assert!(has_ldp(&hom_image(&a, &h).unwrap()).is_none());
    }
}
