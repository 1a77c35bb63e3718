//! Text formats for grammars, homomorphisms and trees, plus DOT export.
//!
//! All formats share one lexer. `#` starts a comment running to the end of
//! the line. Rendering is canonical, so `render(parse(render(x)))` is
//! byte-identical to `render(x)`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write;

use crate::decide::{DependencyGraph, LdpWitness, Verdict};
use crate::error::{Error, Result, SourceSpan};
use crate::grammar::{Constraints, Production, Weight, Wtg};
use crate::homomorphism::TreeHomomorphism;
use crate::terms::{Label, Name, Position, RankedAlphabet, Tree};

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Number(String),
    LBrace,
    RBrace,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Colon,
    Slash,
    Dot,
    Eq,
    Arrow,
    At,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Number(n) => format!("number {n}"),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBracket => "`[`".into(),
            Tok::RBracket => "`]`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Colon => "`:`".into(),
            Tok::Slash => "`/`".into(),
            Tok::Dot => "`.`".into(),
            Tok::Eq => "`=`".into(),
            Tok::Arrow => "`->`".into(),
            Tok::At => "`@`".into(),
        }
    }
}

fn syntax(span: SourceSpan, message: impl Into<String>) -> Error {
    Error::Syntax {
        span,
        message: message.into(),
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, SourceSpan)>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        if c == b'#' {
            while i < bytes.len() && bytes[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        let tok = if c.is_ascii_alphabetic() || c == b'_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            Tok::Ident(text[start..i].to_string())
        } else if c.is_ascii_digit() {
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            Tok::Number(text[start..i].to_string())
        } else {
            i += 1;
            match c {
                b'{' => Tok::LBrace,
                b'}' => Tok::RBrace,
                b'(' => Tok::LParen,
                b')' => Tok::RParen,
                b'[' => Tok::LBracket,
                b']' => Tok::RBracket,
                b',' => Tok::Comma,
                b':' => Tok::Colon,
                b'/' => Tok::Slash,
                b'.' => Tok::Dot,
                b'=' => Tok::Eq,
                b'@' => Tok::At,
                b'-' if bytes.get(i) == Some(&b'>') => {
                    i += 1;
                    Tok::Arrow
                }
                _ => {
                    let ch = text[start..].chars().next().unwrap_or('?');
                    let end = start + ch.len_utf8();
                    return Err(syntax(
                        SourceSpan::new(start, end),
                        format!("unexpected character `{ch}`"),
                    ));
                }
            }
        };
        out.push((tok, SourceSpan::new(start, i)));
    }
    Ok(out)
}

/// A parsed tree before names are resolved against alphabets and states.
struct RawTree {
    name: String,
    span: SourceSpan,
    hole: bool,
    children: Vec<RawTree>,
}

impl RawTree {
    fn resolve(&self, f: &mut dyn FnMut(&str, usize) -> Option<Label>) -> Result<Tree> {
        let label = if self.hole {
            Label::Hole
        } else {
            f(&self.name, self.children.len())
                .ok_or_else(|| Error::UnknownSymbol(self.name.clone()).at(self.span))?
        };
        if !matches!(label, Label::Symbol(_)) && !self.children.is_empty() {
            return Err(Error::Validation(format!("`{}` must be a leaf", self.name)).at(self.span));
        }
        let children = self
            .children
            .iter()
            .map(|c| c.resolve(f))
            .collect::<Result<Vec<_>>>()?;
        Ok(Tree::new(label, children))
    }

    /// First node, pre-order, whose symbol has the wrong rank in `alphabet`.
    fn check_ranks(&self, alphabet: &RankedAlphabet) -> Result<()> {
        if let Some(rank) = alphabet.rank(&self.name) {
            if !self.hole && rank != self.children.len() {
                return Err(Error::RankMismatch {
                    symbol: self.name.clone(),
                    expected: rank,
                    found: self.children.len(),
                }
                .at(self.span));
            }
        }
        self.children
            .iter()
            .try_for_each(|c| c.check_ranks(alphabet))
    }
}

struct Parser<'a> {
    toks: Vec<(Tok, SourceSpan)>,
    pos: usize,
    len: usize,
    _text: &'a str,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str) -> Result<Parser<'a>> {
        Ok(Parser {
            toks: lex(text)?,
            pos: 0,
            len: text.len(),
            _text: text,
        })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn span(&self) -> SourceSpan {
        self.toks
            .get(self.pos)
            .map(|(_, s)| *s)
            .unwrap_or(SourceSpan::new(self.len, self.len))
    }

    fn prev_end(&self) -> usize {
        self.pos
            .checked_sub(1)
            .and_then(|i| self.toks.get(i))
            .map(|(_, s)| s.end)
            .unwrap_or(0)
    }

    fn next(&mut self) -> Option<(Tok, SourceSpan)> {
        let t = self.toks.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn unexpected(&self, wanted: &str) -> Error {
        match self.peek() {
            Some(t) => syntax(
                self.span(),
                format!("expected {wanted}, found {}", t.describe()),
            ),
            None => syntax(
                self.span(),
                format!("expected {wanted}, found end of input"),
            ),
        }
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == Some(tok) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: Tok) -> Result<SourceSpan> {
        if self.peek() == Some(&tok) {
            Ok(self.next().expect("peeked").1)
        } else {
            Err(self.unexpected(&tok.describe()))
        }
    }

    fn ident(&mut self, wanted: &str) -> Result<(String, SourceSpan)> {
        match self.peek() {
            Some(Tok::Ident(_)) => match self.next() {
                Some((Tok::Ident(s), span)) => Ok((s, span)),
                _ => unreachable!(),
            },
            _ => Err(self.unexpected(wanted)),
        }
    }

    fn keyword(&mut self, kw: &str) -> Result<()> {
        match self.peek() {
            Some(Tok::Ident(s)) if s == kw => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(self.unexpected(&format!("`{kw}`"))),
        }
    }

    fn number(&mut self, wanted: &str) -> Result<(String, SourceSpan)> {
        match self.peek() {
            Some(Tok::Number(_)) => match self.next() {
                Some((Tok::Number(s), span)) => Ok((s, span)),
                _ => unreachable!(),
            },
            _ => Err(self.unexpected(wanted)),
        }
    }

    fn end(&self) -> Result<()> {
        match self.peek() {
            None => Ok(()),
            Some(_) => Err(self.unexpected("end of input")),
        }
    }

    fn term(&mut self) -> Result<RawTree> {
        let start = self.span().start;
        if self.eat(&Tok::At) {
            let (name, span) = self.ident("`box`")?;
            if name != "box" {
                return Err(syntax(span, "expected `@box`"));
            }
            return Ok(RawTree {
                name: "@box".into(),
                span: SourceSpan::new(start, span.end),
                hole: true,
                children: Vec::new(),
            });
        }
        let (name, _) = self.ident("a symbol")?;
        let mut children = Vec::new();
        if self.eat(&Tok::LParen) {
            loop {
                children.push(self.term()?);
                if self.eat(&Tok::Comma) {
                    continue;
                }
                self.expect(Tok::RParen)?;
                break;
            }
        }
        Ok(RawTree {
            name,
            span: SourceSpan::new(start, self.prev_end()),
            hole: false,
            children,
        })
    }

    fn position(&mut self) -> Result<Position> {
        if let Some(Tok::Ident(s)) = self.peek() {
            if s == "e" {
                self.pos += 1;
                return Ok(Position::root());
            }
        }
        let mut indices = Vec::new();
        loop {
            let (n, span) = self.number("a position")?;
            let i = n
                .parse::<usize>()
                .ok()
                .filter(|&i| i > 0)
                .ok_or_else(|| syntax(span, "position indices are positive"))?;
            indices.push(i);
            if !self.eat(&Tok::Dot) {
                break;
            }
        }
        Position::new(indices)
    }

    fn weight(&mut self) -> Result<Weight> {
        let (n, span) = self.number("a weight")?;
        n.parse().map_err(|e: Error| e.at(span))
    }

    /// `{ a/0 g/1 ... }`, commas optional.
    fn alphabet(&mut self) -> Result<RankedAlphabet> {
        let open = self.expect(Tok::LBrace)?;
        let mut symbols = Vec::new();
        while !self.eat(&Tok::RBrace) {
            let (name, _) = self.ident("a symbol")?;
            self.expect(Tok::Slash)?;
            let (rank, span) = self.number("a rank")?;
            let rank = rank
                .parse::<usize>()
                .map_err(|_| syntax(span, "rank out of range"))?;
            symbols.push((name, rank));
            self.eat(&Tok::Comma);
        }
        RankedAlphabet::new(symbols).map_err(|e| e.at(SourceSpan::new(open.start, self.prev_end())))
    }
}

/// Parses a term without an alphabet. `x<digits>` leaves become variables and
/// `@box` a hole; everything else is a symbol.
pub fn parse_term(text: &str) -> Result<Tree> {
    let mut p = Parser::new(text)?;
    let raw = p.term()?;
    p.end()?;
    raw.resolve(&mut |name, arity| Some(var_or_symbol(name, arity)))
}

fn var_index(name: &str) -> Option<usize> {
    let digits = name.strip_prefix('x')?;
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    digits.parse().ok().filter(|&i| i > 0)
}

fn var_or_symbol(name: &str, arity: usize) -> Label {
    match var_index(name) {
        Some(i) if arity == 0 => Label::Var(i),
        _ => Label::Symbol(name.into()),
    }
}

/// Parses a ground tree over `alphabet`, checking ranks.
pub fn parse_tree(text: &str, alphabet: &RankedAlphabet) -> Result<Tree> {
    let mut p = Parser::new(text)?;
    let raw = p.term()?;
    p.end()?;
    raw.check_ranks(alphabet)?;
    let t =
        raw.resolve(&mut |name, _| alphabet.contains(name).then(|| Label::Symbol(name.into())))?;
    Ok(t)
}

pub fn render_tree(t: &Tree) -> String {
    t.to_string()
}

/// Parses the `wtg { ... }` format. Names listed under `states` are states,
/// everything else in a left-hand side must be a symbol.
pub fn parse_wtg(text: &str) -> Result<Wtg> {
    let mut p = Parser::new(text)?;
    p.keyword("wtg")?;
    p.expect(Tok::LBrace)?;
    let mut alphabet: Option<RankedAlphabet> = None;
    let mut states: Option<(Vec<String>, SourceSpan)> = None;
    let mut finals: Vec<(String, Weight, SourceSpan)> = Vec::new();
    let mut prods: Vec<(RawTree, Constraints, String, Weight, SourceSpan)> = Vec::new();
    while !p.eat(&Tok::RBrace) {
        let (kw, kw_span) = p.ident("`alphabet`, `states`, `final`, `prod` or `}`")?;
        match kw.as_str() {
            "alphabet" if alphabet.is_none() => alphabet = Some(p.alphabet()?),
            "states" if states.is_none() => {
                p.expect(Tok::LBrace)?;
                let mut names = Vec::new();
                while !p.eat(&Tok::RBrace) {
                    names.push(p.ident("a state")?.0);
                    p.eat(&Tok::Comma);
                }
                states = Some((names, SourceSpan::new(kw_span.start, p.prev_end())));
            }
            "final" => {
                p.expect(Tok::LBrace)?;
                while !p.eat(&Tok::RBrace) {
                    let (q, span) = p.ident("a state")?;
                    p.expect(Tok::Colon)?;
                    let w = p.weight()?;
                    finals.push((q, w, span));
                    p.eat(&Tok::Comma);
                }
            }
            "prod" => {
                let start = kw_span.start;
                let lhs = p.term()?;
                let mut groups = Vec::new();
                if p.eat(&Tok::LBracket) {
                    while !p.eat(&Tok::RBracket) {
                        let mut class = vec![p.position()?];
                        while p.eat(&Tok::Eq) {
                            class.push(p.position()?);
                        }
                        groups.push(class);
                        p.eat(&Tok::Comma);
                    }
                }
                p.expect(Tok::Arrow)?;
                let (target, _) = p.ident("a target state")?;
                p.expect(Tok::At)?;
                let w = p.weight()?;
                let span = SourceSpan::new(start, p.prev_end());
                prods.push((lhs, Constraints::from_classes(groups), target, w, span));
            }
            "alphabet" | "states" => {
                return Err(syntax(kw_span, format!("duplicate `{kw}` section")))
            }
            other => {
                return Err(syntax(kw_span, format!("unknown section `{other}`")));
            }
        }
    }
    p.end()?;
    let whole = SourceSpan::new(0, text.len());
    let alphabet = alphabet.ok_or_else(|| syntax(whole, "missing `alphabet` section"))?;
    let (state_names, states_span) =
        states.ok_or_else(|| syntax(whole, "missing `states` section"))?;
    let state_set: BTreeSet<&str> = state_names.iter().map(String::as_str).collect();
    for (q, _, span) in &finals {
        if !state_set.contains(q.as_str()) {
            return Err(Error::UnknownState(q.clone()).at(*span));
        }
    }
    let mut productions = Vec::with_capacity(prods.len());
    for (raw, constraints, target, w, span) in prods {
        raw.check_ranks(&alphabet)?;
        let lhs = raw.resolve(&mut |name, _| {
            if state_set.contains(name) {
                Some(Label::State(name.into()))
            } else if alphabet.contains(name) {
                Some(Label::Symbol(name.into()))
            } else {
                None
            }
        })?;
        if !state_set.contains(target.as_str()) {
            return Err(Error::UnknownState(target).at(span));
        }
        productions.push(Production::new(lhs, &target, constraints, w).map_err(|e| e.at(span))?);
    }
    Wtg::new(
        alphabet,
        state_names,
        finals.into_iter().map(|(q, w, _)| (q, w)),
        productions,
    )
    .map_err(|e| e.at(states_span))
}

fn render_alphabet(a: &RankedAlphabet) -> String {
    let parts: Vec<String> = a.iter().map(|(s, r)| format!("{s}/{r}")).collect();
    format!("{{ {} }}", parts.join(" "))
}

/// Canonical text: sorted alphabet, states, final weights and productions.
pub fn render_wtg(g: &Wtg) -> String {
    let mut out = String::from("wtg {\n");
    let _ = writeln!(out, "  alphabet {}", render_alphabet(g.alphabet()));
    let states: Vec<&str> = g.states().iter().map(|s| &**s).collect();
    let _ = writeln!(out, "  states {{ {} }}", states.join(" "));
    let finals: Vec<String> = g
        .finals()
        .iter()
        .map(|(q, w)| format!("{q}: {w}"))
        .collect();
    if finals.is_empty() {
        out.push_str("  final { }\n");
    } else {
        let _ = writeln!(out, "  final {{ {} }}", finals.join(", "));
    }
    for p in g.canonical().productions() {
        let _ = writeln!(out, "  prod {p}");
    }
    out.push_str("}\n");
    out
}

/// Parses the `hom { ... }` format.
pub fn parse_hom(text: &str) -> Result<TreeHomomorphism> {
    let mut p = Parser::new(text)?;
    p.keyword("hom")?;
    p.expect(Tok::LBrace)?;
    let mut source = None;
    let mut target = None;
    let mut rules: Vec<(String, SourceSpan, RawTree)> = Vec::new();
    while !p.eat(&Tok::RBrace) {
        let (kw, kw_span) = p.ident("`source`, `target`, `rule` or `}`")?;
        match kw.as_str() {
            "source" if source.is_none() => source = Some(p.alphabet()?),
            "target" if target.is_none() => target = Some(p.alphabet()?),
            "rule" => {
                let (sym, span) = p.ident("a source symbol")?;
                p.expect(Tok::Arrow)?;
                rules.push((sym, span, p.term()?));
            }
            "source" | "target" => {
                return Err(syntax(kw_span, format!("duplicate `{kw}` section")))
            }
            other => return Err(syntax(kw_span, format!("unknown section `{other}`"))),
        }
    }
    p.end()?;
    let whole = SourceSpan::new(0, text.len());
    let source = source.ok_or_else(|| syntax(whole, "missing `source` section"))?;
    let target = target.ok_or_else(|| syntax(whole, "missing `target` section"))?;
    let mut map = BTreeMap::new();
    for (sym, span, raw) in rules {
        if !source.contains(&sym) {
            return Err(Error::UnknownSymbol(sym).at(span));
        }
        raw.check_ranks(&target)?;
        let pattern = raw.resolve(&mut |name, arity| {
            if target.contains(name) {
                Some(Label::Symbol(name.into()))
            } else {
                var_index(name).filter(|_| arity == 0).map(Label::Var)
            }
        })?;
        if map.insert(Name::from(sym.as_str()), pattern).is_some() {
            return Err(syntax(span, format!("duplicate rule for `{sym}`")));
        }
    }
    TreeHomomorphism::new(source, target, map).map_err(|e| e.at(whole))
}

pub fn render_hom(h: &TreeHomomorphism) -> String {
    let mut out = String::from("hom {\n");
    let _ = writeln!(out, "  source {}", render_alphabet(h.source()));
    let _ = writeln!(out, "  target {}", render_alphabet(h.target()));
    for (s, rule) in h.rules() {
        let _ = writeln!(out, "  rule {s} -> {rule}");
    }
    out.push_str("}\n");
    out
}

fn dot_id(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// DOT digraph with one node per state and one edge per dependency.
pub fn export_dot(g: &DependencyGraph) -> String {
    let mut out = String::from("digraph g {\n");
    for q in g.nodes() {
        let _ = writeln!(out, "  {};", dot_id(q));
    }
    for (a, b) in g.edges() {
        let _ = writeln!(out, "  {} -> {};", dot_id(a), dot_id(b));
    }
    out.push_str("}\n");
    out
}

/// Human-readable witness description, one field per line.
pub fn render_witness(g: &Wtg, w: &LdpWitness) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "production: {}", g.production(w.production));
    let _ = writeln!(out, "pair: {} {}", w.pair.0, w.pair.1);
    let _ = writeln!(out, "cycle_state: {}", w.cycle_state);
    let _ = writeln!(out, "cycle: {}", join_names(&w.cycle));
    let _ = writeln!(out, "path: {}", join_names(&w.path));
    out
}

fn join_names(names: &[Name]) -> String {
    names.iter().map(|n| &**n).collect::<Vec<_>>().join(" -> ")
}

/// The verdict as JSON. `image` is the grammar the witness refers to.
pub fn verdict_json(image: &Wtg, v: &Verdict) -> serde_json::Value {
    use serde_json::json;
    match v {
        Verdict::Regular { grammar } => json!({
            "verdict": "REGULAR",
            "grammar": grammar.as_ref().map(render_wtg),
        }),
        Verdict::Nonregular {
            witness,
            decomposition,
        } => json!({
            "verdict": "NONREGULAR",
            "witness": {
                "production": image.production(witness.production).to_string(),
                "production_index": witness.production,
                "pair": [witness.pair.0.to_string(), witness.pair.1.to_string()],
                "cycle_state": &*witness.cycle_state,
                "cycle": witness.cycle.iter().map(|q| q.to_string()).collect::<Vec<_>>(),
                "path": witness.path.iter().map(|q| q.to_string()).collect::<Vec<_>>(),
            },
            "decomposition": decomposition.as_ref().map(|d| json!({
                "fresh_state": &*d.fresh_state,
                "joined": d.joined.to_string(),
                "witness_pair": [d.witness_pair.0.to_string(), d.witness_pair.1.to_string()],
                "tree": d.tree.to_string(),
                "position": d.position.to_string(),
                "g1": render_wtg(&d.g1),
                "g2": render_wtg(&d.g2),
            })),
        }),
    }
}
