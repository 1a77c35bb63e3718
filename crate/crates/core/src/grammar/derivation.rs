use std::fmt::Write;

use super::{Production, Weight, Wtg, SINK};
use crate::error::{Error, Result};
use crate::terms::{Label, Name, Position, Tree};

/// One rewrite step: production index (into the owning grammar) and position.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Step {
    pub production: usize,
    pub position: Position,
}

impl Step {
    pub fn new(production: usize, position: Position) -> Step {
        Step {
            production,
            position,
        }
    }
}

/// A complete derivation as a tree: a production and one sub-derivation
/// per state leaf of its left-hand side, in `⪯` order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct DerivNode {
    pub production: usize,
    pub children: Vec<DerivNode>,
}

impl DerivNode {
    pub(crate) fn tree(&self, g: &Wtg) -> Tree {
        let p = g.production(self.production);
        let mut t = p.lhs().clone();
        for (c, v) in self.children.iter().zip(p.state_positions()) {
            t = t.replace_at(&v, c.tree(g)).expect("state position");
        }
        t
    }

    /// The sub-derivation applied at `w`, relative to this one.
    pub(crate) fn at(&self, g: &Wtg, w: &Position) -> Option<&DerivNode> {
        if w.is_root() {
            return Some(self);
        }
        let vs = g.production(self.production).state_positions();
        let (i, v) = vs.iter().enumerate().find(|(_, v)| v.is_prefix_of(w))?;
        self.children[i].at(g, &v.strip_prefix_of(w)?)
    }

    /// The all-sink derivation of `t`.
    pub(crate) fn all_sink(g: &Wtg, t: &Tree) -> Result<DerivNode> {
        let sym = t
            .label()
            .symbol()
            .ok_or_else(|| Error::Validation(format!("`{t}` is not ground")))?;
        let production = g
            .sink_production(sym)
            .ok_or_else(|| Error::Shape(format!("no `{SINK}` production for `{sym}`")))?;
        Ok(DerivNode {
            production,
            children: t
                .children()
                .iter()
                .map(|c| DerivNode::all_sink(g, c))
                .collect::<Result<_>>()?,
        })
    }
}

/// A sequence of rewrite steps of some grammar.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Derivation {
    steps: Vec<Step>,
}

impl Derivation {
    pub fn new(steps: Vec<Step>) -> Derivation {
        Derivation { steps }
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Positions strictly increase in `⪯`.
    pub fn is_leftmost(&self) -> bool {
        self.steps.windows(2).all(|w| w[0].position < w[1].position)
    }

    /// The same steps in left-most order.
    pub fn into_leftmost(mut self) -> Derivation {
        self.steps.sort_by(|a, b| a.position.cmp(&b.position));
        self
    }

    /// Product of the step weights.
    pub fn weight(&self, g: &Wtg) -> Weight {
        self.steps
            .iter()
            .map(|s| g.production(s.production).weight())
            .product()
    }

    /// Target of the last step, i.e. the state a complete derivation reaches.
    pub fn target<'g>(&self, g: &'g Wtg) -> Option<&'g Name> {
        self.steps
            .last()
            .map(|s| g.production(s.production).target())
    }

    /// `wd`.
    pub fn prefixed(&self, w: &Position) -> Derivation {
        Derivation::new(
            self.steps
                .iter()
                .map(|s| Step::new(s.production, w.concat(&s.position)))
                .collect(),
        )
    }

    /// The derivation for `t|_{w_i}` incorporated in this one.
    pub fn incorporated(&self, i: usize) -> Result<Derivation> {
        let w = &self
            .steps
            .get(i)
            .ok_or(Error::StepOutOfRange {
                index: i,
                len: self.steps.len(),
            })?
            .position;
        Ok(Derivation::new(
            self.steps
                .iter()
                .filter_map(|s| {
                    w.strip_prefix_of(&s.position)
                        .map(|rel| Step::new(s.production, rel))
                })
                .collect(),
        ))
    }

    /// Index of the step applied at `w`.
    pub fn index_of(&self, w: &Position) -> Option<usize> {
        self.steps.iter().position(|s| &s.position == w)
    }

    /// Rewrites `t` step by step, checking every match and constraint,
    /// and returns the state the derivation ends in.
    pub fn replay(&self, g: &Wtg, t: &Tree) -> Result<Name> {
        let mut form = t.clone();
        for (k, step) in self.steps.iter().enumerate() {
            let p: &Production = g.productions().get(step.production).ok_or_else(|| {
                Error::InvalidDerivation(format!("step {k}: no production {}", step.production))
            })?;
            let here = form.get(&step.position).ok_or_else(|| {
                Error::InvalidDerivation(format!("step {k}: position {} missing", step.position))
            })?;
            if here != p.lhs() {
                return Err(Error::InvalidDerivation(format!(
                    "step {k}: `{}` does not match `{here}` at {}",
                    p.lhs(),
                    step.position
                )));
            }
            let original = t.subtree_at(&step.position)?;
            if !p.constraints().satisfied_by(original) {
                return Err(Error::InvalidDerivation(format!(
                    "step {k}: constraints [{}] fail on `{original}`",
                    p.constraints()
                )));
            }
            form = form.replace_at(&step.position, Tree::state(p.target()))?;
        }
        match form.label() {
            Label::State(q) => Ok(q.clone()),
            _ => Err(Error::InvalidDerivation(format!(
                "derivation is not complete, ends in `{form}`"
            ))),
        }
    }

    pub fn display(&self, g: &Wtg) -> String {
        let mut out = String::new();
        for (i, s) in self.steps.iter().enumerate() {
            if i > 0 {
                out.push(' ');
            }
            let p = g.production(s.production);
            let _ = write!(out, "({}", p.lhs());
            if !p.constraints().is_empty() {
                let _ = write!(out, " [{}]", p.constraints());
            }
            let _ = write!(out, " -> {}, {})", p.target(), s.position);
        }
        out
    }

    /// The tree a complete derivation derives, read off the left-hand sides.
    pub fn derived_tree(&self, g: &Wtg) -> Result<Tree> {
        Ok(self.to_node(g)?.tree(g))
    }

    /// The derivation as a tree of production applications. Linear in the
    /// number of steps, since a left-most derivation lists them in post-order.
    pub(crate) fn to_node(&self, g: &Wtg) -> Result<DerivNode> {
        let sorted;
        let steps = if self.is_leftmost() {
            &self.steps
        } else {
            sorted = self.clone().into_leftmost();
            &sorted.steps
        };
        let mut stack: Vec<(&Position, DerivNode)> = Vec::new();
        for (k, step) in steps.iter().enumerate() {
            let p = g.productions().get(step.production).ok_or_else(|| {
                Error::InvalidDerivation(format!("step {k}: no production {}", step.production))
            })?;
            let vs = p.state_positions();
            let below = stack.len().checked_sub(vs.len()).ok_or_else(|| {
                Error::InvalidDerivation(format!("step {k}: missing steps below {}", step.position))
            })?;
            let kids = stack.split_off(below);
            for ((pos, _), v) in kids.iter().zip(&vs) {
                if **pos != step.position.concat(v) {
                    return Err(Error::InvalidDerivation(format!(
                        "step {k}: expected a step at {}, found one at {pos}",
                        step.position.concat(v)
                    )));
                }
            }
            stack.push((
                &step.position,
                DerivNode {
                    production: step.production,
                    children: kids.into_iter().map(|(_, n)| n).collect(),
                },
            ));
        }
        match stack.pop() {
            Some((pos, node)) if stack.is_empty() && pos.is_root() => Ok(node),
            Some(_) => Err(Error::InvalidDerivation(
                "steps do not form one complete derivation".into(),
            )),
            None => Err(Error::InvalidDerivation("empty derivation".into())),
        }
    }

    /// Flattens a derivation tree back into left-most steps.
    pub(crate) fn from_node(node: &DerivNode, g: &Wtg) -> Derivation {
        fn go(node: &DerivNode, g: &Wtg, at: &Position, out: &mut Vec<Step>) {
            let vs = g.production(node.production).state_positions();
            for (c, v) in node.children.iter().zip(&vs) {
                go(c, g, &at.concat(v), out);
            }
            out.push(Step::new(node.production, at.clone()));
        }
        let mut steps = Vec::new();
        go(node, g, &Position::root(), &mut steps);
        Derivation::new(steps)
    }

    /// The all-sink derivation for `t`.
    pub fn all_sink(g: &Wtg, t: &Tree) -> Result<Derivation> {
        let mut steps = Vec::with_capacity(t.size());
        for w in t.positions() {
            let sym = t
                .label_at(&w)
                .and_then(Label::symbol)
                .ok_or_else(|| Error::Validation(format!("`{t}` is not ground")))?;
            let p = g
                .sink_production(sym)
                .ok_or_else(|| Error::Shape(format!("no `{SINK}` production for `{sym}`")))?;
            steps.push(Step::new(p, w));
        }
        Ok(Derivation::new(steps))
    }
}
