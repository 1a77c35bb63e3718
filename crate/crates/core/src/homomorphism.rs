//! Tree homomorphisms given by one pattern per input symbol.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use crate::error::{Error, Result};
use crate::terms::{Label, Name, RankedAlphabet, Tree};

/// One reason a homomorphism is rejected.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum HomViolation {
    MissingRule(Name),
    UnknownSourceSymbol(Name),
    /// The rule is a bare variable.
    Erasing(Name),
    /// Some variables of `x1..x_k` do not occur in the rule.
    Deleting {
        symbol: Name,
        missing: Vec<usize>,
    },
    /// A variable beyond the rank of the symbol.
    UnboundVariable {
        symbol: Name,
        var: usize,
    },
    BadPattern {
        symbol: Name,
        message: String,
    },
}

impl fmt::Display for HomViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HomViolation::MissingRule(s) => write!(f, "{s}: no rule"),
            HomViolation::UnknownSourceSymbol(s) => write!(f, "{s}: not in the source alphabet"),
            HomViolation::Erasing(s) => write!(f, "{s}: erasing (rule is a bare variable)"),
            HomViolation::Deleting { symbol, missing } => {
                let vars: Vec<String> = missing.iter().map(|i| format!("x{i}")).collect();
                write!(f, "{symbol}: deleting ({} missing)", vars.join(", "))
            }
            HomViolation::UnboundVariable { symbol, var } => {
                write!(f, "{symbol}: variable x{var} exceeds the rank")
            }
            HomViolation::BadPattern { symbol, message } => write!(f, "{symbol}: {message}"),
        }
    }
}

/// Result of [`TreeHomomorphism::validate`].
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct HomReport {
    pub violations: Vec<HomViolation>,
}

impl HomReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for HomReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_valid() {
            return f.write_str("valid");
        }
        let parts: Vec<String> = self.violations.iter().map(|v| v.to_string()).collect();
        f.write_str(&parts.join("; "))
    }
}

/// A nondeleting, nonerasing tree homomorphism `T_Σ → T_Γ`.
///
/// Invalid rule sets are rejected by [`TreeHomomorphism::new`]; every value
/// of this type satisfies both properties.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeHomomorphism {
    source: RankedAlphabet,
    target: RankedAlphabet,
    rules: BTreeMap<Name, Tree>,
}

impl TreeHomomorphism {
    pub fn new(
        source: RankedAlphabet,
        target: RankedAlphabet,
        rules: BTreeMap<Name, Tree>,
    ) -> Result<Self> {
        let report = Self::validate(&source, &target, &rules);
        if !report.is_valid() {
            return Err(Error::InvalidHomomorphism(report.to_string()));
        }
        Ok(TreeHomomorphism {
            source,
            target,
            rules,
        })
    }

    /// The homomorphism mapping every `σ` to `σ(x1, …, xk)`.
    pub fn identity(alphabet: &RankedAlphabet) -> TreeHomomorphism {
        let rules = alphabet
            .iter()
            .map(|(s, k)| (s.clone(), Tree::node(s, (1..=k).map(Tree::var).collect())))
            .collect();
        TreeHomomorphism {
            source: alphabet.clone(),
            target: alphabet.clone(),
            rules,
        }
    }

    /// Checks totality, variable ranges, nonerasure and nondeletion.
    pub fn validate(
        source: &RankedAlphabet,
        target: &RankedAlphabet,
        rules: &BTreeMap<Name, Tree>,
    ) -> HomReport {
        let mut violations = Vec::new();
        for (symbol, rank) in source.iter() {
            let Some(pattern) = rules.get(symbol) else {
                violations.push(HomViolation::MissingRule(symbol.clone()));
                continue;
            };
            if let Label::Var(_) = pattern.label() {
                violations.push(HomViolation::Erasing(symbol.clone()));
                continue;
            }
            let mut seen = BTreeSet::new();
            let mut unbound = BTreeSet::new();
            let check = target.check_with(pattern, &mut |l| match l {
                Label::Var(i) if (1..=rank).contains(i) => {
                    seen.insert(*i);
                    Ok(())
                }
                Label::Var(i) => {
                    unbound.insert(*i);
                    Ok(())
                }
                other => Err(Error::Validation(format!(
                    "unexpected `{other}` in a pattern"
                ))),
            });
            if let Err(e) = check {
                violations.push(HomViolation::BadPattern {
                    symbol: symbol.clone(),
                    message: e.to_string(),
                });
                continue;
            }
            for var in unbound {
                violations.push(HomViolation::UnboundVariable {
                    symbol: symbol.clone(),
                    var,
                });
            }
            let missing: Vec<usize> = (1..=rank).filter(|i| !seen.contains(i)).collect();
            if !missing.is_empty() {
                violations.push(HomViolation::Deleting {
                    symbol: symbol.clone(),
                    missing,
                });
            }
        }
        for symbol in rules.keys() {
            if !source.contains(symbol) {
                violations.push(HomViolation::UnknownSourceSymbol(symbol.clone()));
            }
        }
        HomReport { violations }
    }

    pub fn source(&self) -> &RankedAlphabet {
        &self.source
    }

    pub fn target(&self) -> &RankedAlphabet {
        &self.target
    }

    pub fn rule(&self, symbol: &str) -> Option<&Tree> {
        self.rules.get(symbol)
    }

    pub fn rules(&self) -> impl Iterator<Item = (&Name, &Tree)> + '_ {
        self.rules.iter()
    }

    /// `Σ_σ |pos(h(σ))|`.
    pub fn size(&self) -> usize {
        self.rules.values().map(Tree::size).sum()
    }

    pub fn apply(&self, t: &Tree) -> Result<Tree> {
        let Label::Symbol(s) = t.label() else {
            return Err(Error::Validation(format!("`{}` is not a ground tree", t)));
        };
        let pattern = self
            .rules
            .get(s)
            .ok_or_else(|| Error::UnknownSymbol(s.to_string()))?;
        if pattern_arity(self.source.rank(s)) != t.arity() {
            return Err(Error::RankMismatch {
                symbol: s.to_string(),
                expected: self.source.rank(s).unwrap_or(0),
                found: t.arity(),
            });
        }
        let images = t
            .children()
            .iter()
            .map(|c| self.apply(c))
            .collect::<Result<Vec<_>>>()?;
        Ok(pattern.map_leaves(&mut |l| match l {
            Label::Var(i) => Some(images[i - 1].clone()),
            _ => None,
        }))
    }

    /// `h⁻¹(u)` by top-down matching of rule patterns, sorted by rendering.
    pub fn preimages(&self, u: &Tree) -> Vec<Tree> {
        let mut memo = HashMap::new();
        let mut out = self.preimages_memo(u, &mut memo);
        out.sort_by_cached_key(|t| t.to_string());
        out.dedup();
        out
    }

    fn preimages_memo(&self, u: &Tree, memo: &mut HashMap<Tree, Vec<Tree>>) -> Vec<Tree> {
        if let Some(hit) = memo.get(u) {
            return hit.clone();
        }
        let mut out = Vec::new();
        for (symbol, pattern) in &self.rules {
            let rank = self.source.rank(symbol).unwrap_or(0);
            let mut bindings: Vec<Option<&Tree>> = vec![None; rank];
            if !match_pattern(pattern, u, &mut bindings) {
                continue;
            }
            // nondeleting: every variable is bound
            let mut combos: Vec<Vec<Tree>> = vec![Vec::new()];
            for bound in bindings {
                let sub = self.preimages_memo(bound.expect("nondeleting"), memo);
                combos = combos
                    .into_iter()
                    .flat_map(|prefix| {
                        sub.iter().map(move |t| {
                            let mut v = prefix.clone();
                            v.push(t.clone());
                            v
                        })
                    })
                    .collect();
                if combos.is_empty() {
                    break;
                }
            }
            out.extend(combos.into_iter().map(|cs| Tree::node(symbol, cs)));
        }
        memo.insert(u.clone(), out.clone());
        out
    }
}

fn pattern_arity(rank: Option<usize>) -> usize {
    rank.unwrap_or(0)
}

fn match_pattern<'u>(pattern: &Tree, u: &'u Tree, bindings: &mut [Option<&'u Tree>]) -> bool {
    match pattern.label() {
        Label::Var(i) => match bindings[i - 1] {
            Some(prev) => prev == u,
            None => {
                bindings[i - 1] = Some(u);
                true
            }
        },
        label => {
            label == u.label()
                && pattern.arity() == u.arity()
                && pattern
                    .children()
                    .iter()
                    .zip(u.children())
                    .all(|(p, c)| match_pattern(p, c, bindings))
        }
    }
}
