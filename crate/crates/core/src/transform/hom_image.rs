use std::collections::BTreeMap;

use super::trim;
use crate::error::{Error, Result};
use crate::grammar::{Constraints, Production, Weight, Wtg, SINK};
use crate::homomorphism::TreeHomomorphism;
use crate::terms::{Label, Name, Position, Tree};

/// The trimmed WTGh generating the image of `a` under `h`.
///
/// For a transition `σ(q1, …, qk) → q` the left-hand side is `h(σ)` with the
/// `⪯`-least occurrence of each `x_i` replaced by `q_i`, every other
/// occurrence by the sink state, and one constraint class per repeated
/// variable. Colliding productions are merged by summing their weights.
pub fn hom_image(a: &Wtg, h: &TreeHomomorphism) -> Result<Wtg> {
    let shape = a.shape();
    if !shape.wta {
        return Err(Error::Shape("the input grammar is not a WTA".into()));
    }
    if a.alphabet() != h.source() {
        return Err(Error::Validation(
            "the automaton's alphabet differs from the homomorphism's source".into(),
        ));
    }
    if a.has_sink() {
        return Err(Error::Validation(format!(
            "the automaton uses the reserved state name `{SINK}`"
        )));
    }
    let mut productions = Vec::with_capacity(a.productions().len() + h.target().len());
    for p in a.productions() {
        let Label::Symbol(sigma) = p.lhs().label() else {
            return Err(Error::Internal(
                "WTA left-hand side without a symbol".into(),
            ));
        };
        let pattern = h
            .rule(sigma)
            .ok_or_else(|| Error::UnknownSymbol(sigma.to_string()))?;
        let mut occurrences: BTreeMap<usize, Vec<Position>> = BTreeMap::new();
        for w in pattern.positions() {
            if let Some(Label::Var(i)) = pattern.label_at(&w) {
                occurrences.entry(*i).or_default().push(w);
            }
        }
        let mut lhs = pattern.clone();
        let mut classes = Vec::new();
        for (i, ws) in occurrences {
            let q = p.lhs().children()[i - 1]
                .label()
                .state()
                .ok_or_else(|| Error::Internal("WTA child is not a state".into()))?;
            // `positions` is ⪯-sorted, so ws[0] is the least occurrence
            for (k, w) in ws.iter().enumerate() {
                let state = if k == 0 { &**q } else { SINK };
                lhs = lhs.replace_at(w, Tree::state(state))?;
            }
            if ws.len() > 1 {
                classes.push(ws);
            }
        }
        productions.push(Production::new(
            lhs,
            p.target(),
            Constraints::from_classes(classes),
            p.weight().clone(),
        )?);
    }
    for (gamma, rank) in h.target().iter() {
        productions.push(Production::new(
            Tree::node(gamma, vec![Tree::state(SINK); rank]),
            SINK,
            Constraints::none(),
            Weight::one(),
        )?);
    }
    let mut states: Vec<Name> = a.states().iter().cloned().collect();
    states.push(SINK.into());
    let image = Wtg::new(
        h.target().clone(),
        states.iter().map(|q| q.to_string()),
        a.finals().iter().map(|(q, w)| (q.to_string(), w.clone())),
        productions,
    )?;
    debug_assert!(image.shape().is_wtgh, "{:?}", image.shape().diagnostics);
    Ok(trim(&image))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formats::{parse_hom, parse_term, parse_wtg, render_wtg};
    use crate::grammar::{semantics, tests::example1};

    pub(crate) const EXAMPLE_HOM: &str = "hom {
      source { a/0 g/1 s/2 }
      target { a/0 g/1 d/3 }
      rule s -> d(x2, g(x2), x1)
      rule g -> g(x1)
      rule a -> a
    }";

    #[test]
    fn single_sigma_automaton_gives_example1() {
        let a = parse_wtg(
            "wtg { alphabet { a/0 g/1 s/2 } states { q q_f } final { q_f: 1 }
               prod a -> q @ 1  prod g(q) -> q @ 2  prod s(q, q) -> q_f @ 1 }",
        )
        .unwrap();
        let image = hom_image(&a, &parse_hom(EXAMPLE_HOM).unwrap()).unwrap();
        assert_eq!(render_wtg(&image), render_wtg(&example1()));
    }

    #[test]
    fn image_of_the_counting_automaton() {
        let a = parse_wtg(
            "wtg { alphabet { a/0 g/1 s/2 } states { q } final { q: 1 }
               prod a -> q @ 1  prod g(q) -> q @ 2  prod s(q, q) -> q @ 1 }",
        )
        .unwrap();
        let image = hom_image(&a, &parse_hom(EXAMPLE_HOM).unwrap()).unwrap();
        assert!(image.shape().is_wtgh);
        assert!(image
            .productions()
            .iter()
            .any(|p| p.to_string() == "d(q, g(_bot), q) [1 = 2.1] -> q @ 1"));
        let u = parse_term("d(g(a), g(g(a)), g(a))").unwrap();
        assert_eq!(semantics(&image, &u), Weight::from(4));
    }

    #[test]
    fn identity_image_has_no_constraints() {
        let a = parse_wtg(
            "wtg { alphabet { a/0 g/1 s/2 } states { q p } final { q: 3 }
               prod a -> q @ 1  prod g(q) -> p @ 2  prod s(p, q) -> q @ 5 }",
        )
        .unwrap();
        let image = hom_image(&a, &TreeHomomorphism::identity(a.alphabet())).unwrap();
        assert!(image
            .productions()
            .iter()
            .all(|p| p.constraints().is_empty()));
        let t = parse_term("s(g(a), a)").unwrap();
        assert_eq!(semantics(&image, &t), semantics(&a, &t));
        assert_eq!(semantics(&image, &t), Weight::from(30));
    }

    #[test]
    fn rejects_non_automata() {
        let h = parse_hom(EXAMPLE_HOM).unwrap();
        let g = parse_wtg(
            "wtg { alphabet { a/0 g/1 s/2 } states { q } final { q: 1 }
               prod g(g(q)) -> q @ 1  prod a -> q @ 1 }",
        )
        .unwrap();
        assert!(matches!(hom_image(&g, &h), Err(Error::Shape(_))));
    }
}
