//! Productive definitions over infinite data, presented as observation
//! rewrite rules and evaluated under a fuel budget.
//!
//! A system declares destructors (observations such as `hd`, `tl`),
//! operations (codata constructors such as `cons`, `smerge`), exactly one
//! rule `d(op(x, ...)) = rhs` per destructor/operation pair, and an equation
//! for the recursive function `f`, already compiled to rules
//! `f(pattern) = rhs`. Patterns are either a single variable (matches any
//! argument, left unevaluated) or a user generator `g(x, ...)`.
//!
//! Two generators are built in for stream signatures (one value destructor,
//! one codata destructor): `arith(start, step)` and `cycle([v, ...])`.
//! Their parameters are integer literals.
//!
//! Values are arbitrary-precision integers.

use std::fmt::{self, Write as _};
use std::sync::Arc;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

pub const DEFAULT_FUEL: u64 = 10_000;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CodataError {
    #[error("syntax error in `{source_text}` at offset {offset}: {message}")]
    Syntax {
        source_text: String,
        offset: usize,
        message: String,
    },
    #[error("document error: {0}")]
    Document(String),
    #[error("validation error: {0}")]
    Validation(String),
    #[error("stuck term: {0}")]
    StuckTerm(String),
    #[error("system is not a stream signature (needs exactly one value and one codata destructor)")]
    NotStream,
    #[error("bad observation path: {0}")]
    BadPath(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sort {
    Value,
    Codata,
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sort::Value => "value",
            Sort::Codata => "codata",
        })
    }
}

/// Closed or open terms. Variables index the binding list of their rule.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Int(BigInt),
    Var(usize),
    Op(usize, Vec<Arc<Term>>),
    Des(usize, Arc<Term>),
    Call(Arc<Term>),
    Gen(usize, Vec<Arc<Term>>),
    Arith(BigInt, BigInt),
    Cycle(Arc<[BigInt]>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Symbol {
    name: String,
    sorts: Vec<Sort>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Rule {
    vars: Vec<String>,
    rhs: Arc<Term>,
    text: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Equation {
    None,
    /// `f(x) = rhs`
    CatchAll(Rule),
    /// `f(g(...)) = rhs`, one slot per user generator
    ByGenerator(Vec<Option<Rule>>),
}

/// A validated observation rewrite system.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodataSystem {
    destructors: Vec<(String, Sort)>,
    operations: Vec<Symbol>,
    generators: Vec<Symbol>,
    function: Option<String>,
    /// `rules[d][op]`
    rules: Vec<Vec<Rule>>,
    equation: Equation,
    doc: CodataDoc,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DestructorDoc {
    pub name: String,
    pub sort: Sort,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymbolDoc {
    pub name: String,
    pub arity: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sorts: Option<Vec<Sort>>,
}

/// On-disk codata document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodataDoc {
    pub destructors: Vec<DestructorDoc>,
    pub operations: Vec<SymbolDoc>,
    pub rules: Vec<String>,
    #[serde(default)]
    pub equation: Vec<String>,
    #[serde(default)]
    pub generators: Vec<SymbolDoc>,
}

// ---------------------------------------------------------------------------
// surface syntax

#[derive(Debug, Clone, PartialEq, Eq)]
enum Raw {
    Int(BigInt),
    Ident(String, usize),
    App(String, Vec<Raw>, usize),
    List(Vec<BigInt>, usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(BigInt),
    Punct(char),
}

struct Parser<'a> {
    text: &'a str,
    toks: Vec<(usize, Tok)>,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str) -> Result<Self, CodataError> {
        let mut toks = Vec::new();
        let bytes = text.as_bytes();
        let mut i = 0;
        while i < bytes.len() {
            let c = bytes[i] as char;
            if c.is_ascii_whitespace() {
                i += 1;
            } else if c.is_ascii_alphabetic() || c == '_' {
                let start = i;
                while i < bytes.len() && {
                    let d = bytes[i] as char;
                    d.is_ascii_alphanumeric() || d == '_' || d == '\''
                } {
                    i += 1;
                }
                toks.push((start, Tok::Ident(text[start..i].to_owned())));
            } else if c.is_ascii_digit() || (c == '-' && bytes.get(i + 1).is_some_and(u8::is_ascii_digit)) {
                let start = i;
                i += 1;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let n: BigInt = text[start..i].parse().expect("digits parse");
                toks.push((start, Tok::Int(n)));
            } else if "()[],=".contains(c) {
                toks.push((i, Tok::Punct(c)));
                i += 1;
            } else {
                return Err(syntax(text, i, format!("unexpected character `{c}`")));
            }
        }
        Ok(Self { text, toks, pos: 0 })
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.text.len(), |(o, _)| *o)
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(_, t)| t.clone());
        self.pos += 1;
        t
    }

    fn expect(&mut self, c: char) -> Result<(), CodataError> {
        let at = self.offset();
        match self.bump() {
            Some(Tok::Punct(p)) if p == c => Ok(()),
            _ => Err(syntax(self.text, at, format!("expected `{c}`"))),
        }
    }

    fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    fn term(&mut self) -> Result<Raw, CodataError> {
        let at = self.offset();
        match self.bump() {
            Some(Tok::Int(n)) => Ok(Raw::Int(n)),
            Some(Tok::Punct('[')) => {
                let mut items = Vec::new();
                if self.peek() != Some(&Tok::Punct(']')) {
                    loop {
                        let at = self.offset();
                        match self.bump() {
                            Some(Tok::Int(n)) => items.push(n),
                            _ => return Err(syntax(self.text, at, "list literals hold integers only")),
                        }
                        if self.peek() == Some(&Tok::Punct(',')) {
                            self.pos += 1;
                        } else {
                            break;
                        }
                    }
                }
                self.expect(']')?;
                Ok(Raw::List(items, at))
            }
            Some(Tok::Ident(name)) => {
                if self.peek() != Some(&Tok::Punct('(')) {
                    return Ok(Raw::Ident(name, at));
                }
                self.pos += 1;
                let mut args = Vec::new();
                if self.peek() != Some(&Tok::Punct(')')) {
                    loop {
                        args.push(self.term()?);
                        if self.peek() == Some(&Tok::Punct(',')) {
                            self.pos += 1;
                        } else {
                            break;
                        }
                    }
                }
                self.expect(')')?;
                Ok(Raw::App(name, args, at))
            }
            _ => Err(syntax(self.text, at, "expected a term")),
        }
    }
}

fn syntax(text: &str, offset: usize, message: impl Into<String>) -> CodataError {
    CodataError::Syntax {
        source_text: text.to_owned(),
        offset,
        message: message.into(),
    }
}

fn parse_rule_text(text: &str) -> Result<(Raw, Raw), CodataError> {
    let mut p = Parser::new(text)?;
    let lhs = p.term()?;
    p.expect('=')?;
    let rhs = p.term()?;
    if !p.at_end() {
        return Err(syntax(text, p.offset(), "trailing input after rule"));
    }
    Ok((lhs, rhs))
}

fn parse_closed_text(text: &str) -> Result<Raw, CodataError> {
    let mut p = Parser::new(text)?;
    let t = p.term()?;
    if !p.at_end() {
        return Err(syntax(text, p.offset(), "trailing input after term"));
    }
    Ok(t)
}

const BUILTINS: [&str; 2] = ["arith", "cycle"];

#[derive(Debug, Clone, Copy)]
enum Sym {
    Destructor(usize),
    Operation(usize),
    Generator(usize),
    Function,
    Arith,
    Cycle,
}

/// Pattern variables in binding order.
type Bindings = Vec<(String, Sort)>;

struct Scope<'a> {
    vars: &'a [(String, Sort)],
}

impl CodataSystem {
    pub fn parse(document: &str) -> Result<Self, CodataError> {
        let doc: CodataDoc = serde_json::from_str(document).map_err(|e| {
            CodataError::Document(format!("line {}, column {}: {e}", e.line(), e.column()))
        })?;
        Self::from_doc(doc)
    }

    pub fn from_doc(doc: CodataDoc) -> Result<Self, CodataError> {
        let invalid = |m: String| Err(CodataError::Validation(m));
        let destructors: Vec<(String, Sort)> =
            doc.destructors.iter().map(|d| (d.name.clone(), d.sort)).collect();
        if destructors.is_empty() {
            return invalid("at least one destructor is required".into());
        }
        let symbol = |s: &SymbolDoc, default: Sort| -> Result<Symbol, CodataError> {
            let sorts = s.sorts.clone().unwrap_or_else(|| vec![default; s.arity]);
            if sorts.len() != s.arity {
                return Err(CodataError::Validation(format!(
                    "`{}` declares arity {} but {} sorts",
                    s.name,
                    s.arity,
                    sorts.len()
                )));
            }
            Ok(Symbol {
                name: s.name.clone(),
                sorts,
            })
        };
        let operations = doc
            .operations
            .iter()
            .map(|s| symbol(s, Sort::Codata))
            .collect::<Result<Vec<_>, _>>()?;
        let generators = doc
            .generators
            .iter()
            .map(|s| symbol(s, Sort::Value))
            .collect::<Result<Vec<_>, _>>()?;

        let mut function = None;
        for text in &doc.equation {
            let (lhs, _) = parse_rule_text(text)?;
            match lhs {
                Raw::App(name, args, _) if args.len() == 1 => match &function {
                    None => function = Some(name),
                    Some(f) if *f == name => {}
                    Some(f) => {
                        return invalid(format!("equation rules define both `{f}` and `{name}`"))
                    }
                },
                _ => return invalid(format!("equation rule `{text}` must have the form f(pattern) = rhs")),
            }
        }

        let mut names: Vec<&str> = destructors.iter().map(|(n, _)| n.as_str()).collect();
        names.extend(operations.iter().map(|s| s.name.as_str()));
        names.extend(generators.iter().map(|s| s.name.as_str()));
        names.extend(function.as_deref());
        names.extend(BUILTINS);
        for (i, n) in names.iter().enumerate() {
            if n.is_empty() {
                return invalid("empty symbol name".into());
            }
            if names[..i].contains(n) {
                return invalid(format!("symbol `{n}` declared twice or shadows a built-in"));
            }
        }

        let mut sys = CodataSystem {
            destructors,
            operations,
            generators,
            function,
            rules: Vec::new(),
            equation: Equation::None,
            doc: doc.clone(),
        };

        let mut slots: Vec<Vec<Option<Rule>>> = vec![vec![None; sys.operations.len()]; sys.destructors.len()];
        for text in &doc.rules {
            let (lhs, rhs) = parse_rule_text(text)?;
            let (d, op, vars) = sys.destructor_pattern(&lhs, text)?;
            let (rhs, sort) = sys.resolve(&rhs, &Scope { vars: &vars }, text)?;
            if sort != sys.destructors[d].1 {
                return invalid(format!(
                    "ill-sorted rule `{text}`: rhs is {sort}, `{}` yields {}",
                    sys.destructors[d].0, sys.destructors[d].1
                ));
            }
            let slot = &mut slots[d][op];
            if slot.is_some() {
                return invalid(format!(
                    "duplicate rule for {}({}(...))",
                    sys.destructors[d].0, sys.operations[op].name
                ));
            }
            *slot = Some(Rule {
                vars: vars.into_iter().map(|(n, _)| n).collect(),
                rhs,
                text: text.clone(),
            });
        }
        let mut rules = Vec::with_capacity(slots.len());
        for (d, row) in slots.into_iter().enumerate() {
            let mut out = Vec::with_capacity(row.len());
            for (op, r) in row.into_iter().enumerate() {
                match r {
                    Some(r) => out.push(r),
                    None => {
                        return invalid(format!(
                            "missing rule for {}({}(...))",
                            sys.destructors[d].0, sys.operations[op].name
                        ))
                    }
                }
            }
            rules.push(out);
        }
        sys.rules = rules;

        let mut catch_all = None;
        let mut by_gen: Vec<Option<Rule>> = vec![None; sys.generators.len()];
        for text in &doc.equation {
            let (lhs, rhs) = parse_rule_text(text)?;
            let (pattern, vars) = sys.equation_pattern(&lhs, text)?;
            let (rhs, sort) = sys.resolve(&rhs, &Scope { vars: &vars }, text)?;
            if sort != Sort::Codata {
                return invalid(format!("ill-sorted equation rule `{text}`: rhs must be codata"));
            }
            let rule = Rule {
                vars: vars.into_iter().map(|(n, _)| n).collect(),
                rhs,
                text: text.clone(),
            };
            match pattern {
                None if catch_all.is_some() => return invalid("more than one catch-all equation rule".into()),
                None => catch_all = Some(rule),
                Some(g) if by_gen[g].is_some() => {
                    return invalid(format!("duplicate equation rule for generator `{}`", sys.generators[g].name))
                }
                Some(g) => by_gen[g] = Some(rule),
            }
        }
        sys.equation = match catch_all {
            Some(rule) if by_gen.iter().all(Option::is_none) => Equation::CatchAll(rule),
            Some(_) => return invalid("catch-all equation rule overlaps generator rules".into()),
            None if doc.equation.is_empty() => Equation::None,
            None => {
                if let Some(g) = by_gen.iter().position(Option::is_none) {
                    return invalid(format!("no equation rule for generator `{}`", sys.generators[g].name));
                }
                Equation::ByGenerator(by_gen)
            }
        };
        Ok(sys)
    }

    pub fn to_doc(&self) -> &CodataDoc {
        &self.doc
    }

    /// The same signature and rules with a different equation.
    pub fn with_equation(&self, equation: Vec<String>, generators: Vec<SymbolDoc>) -> Result<Self, CodataError> {
        let mut doc = self.doc.clone();
        doc.equation = equation;
        doc.generators = generators;
        Self::from_doc(doc)
    }

    pub fn function_name(&self) -> Option<&str> {
        self.function.as_deref()
    }

    pub fn destructor_names(&self) -> Vec<&str> {
        self.destructors.iter().map(|(n, _)| n.as_str()).collect()
    }

    fn lookup(&self, name: &str) -> Option<Sym> {
        if let Some(i) = self.destructors.iter().position(|(n, _)| n == name) {
            return Some(Sym::Destructor(i));
        }
        if let Some(i) = self.operations.iter().position(|s| s.name == name) {
            return Some(Sym::Operation(i));
        }
        if let Some(i) = self.generators.iter().position(|s| s.name == name) {
            return Some(Sym::Generator(i));
        }
        if self.function.as_deref() == Some(name) {
            return Some(Sym::Function);
        }
        match name {
            "arith" => Some(Sym::Arith),
            "cycle" => Some(Sym::Cycle),
            _ => None,
        }
    }

    fn fresh_vars(&self, raw: &[Raw], sorts: &[Sort], text: &str) -> Result<Bindings, CodataError> {
        let mut vars = Bindings::new();
        for (r, &s) in raw.iter().zip(sorts) {
            match r {
                Raw::Ident(v, _) if self.lookup(v).is_none() && !vars.iter().any(|(w, _)| w == v) => {
                    vars.push((v.clone(), s))
                }
                _ => {
                    return Err(CodataError::Validation(format!(
                        "pattern in `{text}` must bind distinct fresh variables"
                    )))
                }
            }
        }
        Ok(vars)
    }

    /// `d(op(x, ...))`
    fn destructor_pattern(&self, lhs: &Raw, text: &str) -> Result<(usize, usize, Bindings), CodataError> {
        let bad = || CodataError::Validation(format!("rule `{text}` must have the form d(op(x, ...)) = rhs"));
        let Raw::App(dname, dargs, _) = lhs else { return Err(bad()) };
        let Some(Sym::Destructor(d)) = self.lookup(dname) else { return Err(bad()) };
        let [inner] = dargs.as_slice() else { return Err(bad()) };
        let (opname, args): (&str, &[Raw]) = match inner {
            Raw::App(n, a, _) => (n, a),
            Raw::Ident(n, _) => (n, &[]),
            _ => return Err(bad()),
        };
        let Some(Sym::Operation(op)) = self.lookup(opname) else { return Err(bad()) };
        let sorts = &self.operations[op].sorts;
        if args.len() != sorts.len() {
            return Err(CodataError::Validation(format!(
                "`{opname}` expects {} arguments in `{text}`",
                sorts.len()
            )));
        }
        Ok((d, op, self.fresh_vars(args, sorts, text)?))
    }

    /// `f(x)` gives `None`; `f(g(x, ...))` gives the generator.
    fn equation_pattern(&self, lhs: &Raw, text: &str) -> Result<(Option<usize>, Bindings), CodataError> {
        let bad = || CodataError::Validation(format!("equation rule `{text}` must have the form f(x) or f(g(x, ...))"));
        let Raw::App(_, fargs, _) = lhs else { return Err(bad()) };
        let [inner] = fargs.as_slice() else { return Err(bad()) };
        match inner {
            Raw::Ident(v, _) if self.lookup(v).is_none() => Ok((None, vec![(v.clone(), Sort::Codata)])),
            Raw::Ident(n, _) | Raw::App(n, _, _) => {
                let Some(Sym::Generator(g)) = self.lookup(n) else { return Err(bad()) };
                let args: &[Raw] = match inner {
                    Raw::App(_, a, _) => a,
                    _ => &[],
                };
                let sorts = &self.generators[g].sorts;
                if args.len() != sorts.len() {
                    return Err(CodataError::Validation(format!(
                        "generator `{n}` expects {} arguments in `{text}`",
                        sorts.len()
                    )));
                }
                Ok((Some(g), self.fresh_vars(args, sorts, text)?))
            }
            _ => Err(bad()),
        }
    }

    fn resolve(&self, raw: &Raw, scope: &Scope<'_>, text: &str) -> Result<(Arc<Term>, Sort), CodataError> {
        let invalid = |m: String| CodataError::Validation(format!("{m} in `{text}`"));
        let expect = |t: (Arc<Term>, Sort), want: Sort, what: &str| -> Result<Arc<Term>, CodataError> {
            if t.1 == want {
                Ok(t.0)
            } else {
                Err(invalid(format!("ill-sorted argument of `{what}`: expected {want}, found {}", t.1)))
            }
        };
        match raw {
            Raw::Int(n) => Ok((Arc::new(Term::Int(n.clone())), Sort::Value)),
            Raw::List(_, _) => Err(invalid("list literal outside cycle(...)".into())),
            Raw::Ident(name, _) => {
                if let Some(i) = scope.vars.iter().position(|(v, _)| v == name) {
                    return Ok((Arc::new(Term::Var(i)), scope.vars[i].1));
                }
                match self.lookup(name) {
                    Some(Sym::Operation(op)) if self.operations[op].sorts.is_empty() => {
                        Ok((Arc::new(Term::Op(op, Vec::new())), Sort::Codata))
                    }
                    Some(Sym::Generator(g)) if self.generators[g].sorts.is_empty() => {
                        Ok((Arc::new(Term::Gen(g, Vec::new())), Sort::Codata))
                    }
                    _ => Err(invalid(format!("unknown variable or symbol `{name}`"))),
                }
            }
            Raw::App(name, args, _) => {
                let sym = self.lookup(name).ok_or_else(|| invalid(format!("unknown symbol `{name}`")))?;
                let arity_err = |n: usize| invalid(format!("`{name}` expects {n} arguments"));
                match sym {
                    Sym::Destructor(d) => {
                        let [arg] = args.as_slice() else { return Err(arity_err(1)) };
                        let arg = expect(self.resolve(arg, scope, text)?, Sort::Codata, name)?;
                        Ok((Arc::new(Term::Des(d, arg)), self.destructors[d].1))
                    }
                    Sym::Function => {
                        let [arg] = args.as_slice() else { return Err(arity_err(1)) };
                        let arg = expect(self.resolve(arg, scope, text)?, Sort::Codata, name)?;
                        Ok((Arc::new(Term::Call(arg)), Sort::Codata))
                    }
                    Sym::Operation(i) | Sym::Generator(i) => {
                        let sorts = match sym {
                            Sym::Operation(_) => &self.operations[i].sorts,
                            _ => &self.generators[i].sorts,
                        };
                        if args.len() != sorts.len() {
                            return Err(arity_err(sorts.len()));
                        }
                        let resolved = args
                            .iter()
                            .zip(sorts)
                            .map(|(a, &s)| expect(self.resolve(a, scope, text)?, s, name))
                            .collect::<Result<Vec<_>, _>>()?;
                        let t = match sym {
                            Sym::Operation(_) => Term::Op(i, resolved),
                            _ => Term::Gen(i, resolved),
                        };
                        Ok((Arc::new(t), Sort::Codata))
                    }
                    Sym::Arith => match args.as_slice() {
                        [Raw::Int(a), Raw::Int(s)] => Ok((Arc::new(Term::Arith(a.clone(), s.clone())), Sort::Codata)),
                        _ => Err(invalid("arith takes two integer literals".into())),
                    },
                    Sym::Cycle => match args.as_slice() {
                        [Raw::List(items, _)] if !items.is_empty() => {
                            Ok((Arc::new(Term::Cycle(items.clone().into())), Sort::Codata))
                        }
                        _ => Err(invalid("cycle takes one nonempty list literal".into())),
                    },
                }
            }
        }
    }

    /// Parses a closed term such as `f(arith(0,1))`.
    pub fn parse_term(&self, text: &str) -> Result<Arc<Term>, CodataError> {
        let raw = parse_closed_text(text)?;
        Ok(self.resolve(&raw, &Scope { vars: &[] }, text)?.0)
    }

    pub fn render(&self, t: &Term) -> String {
        let mut s = String::new();
        self.render_into(t, &[], &mut s, usize::MAX);
        s
    }

    fn render_into(&self, t: &Term, vars: &[String], out: &mut String, budget: usize) {
        if out.len() > budget {
            return;
        }
        let list = |out: &mut String, this: &Self, name: &str, args: &[Arc<Term>]| {
            out.push_str(name);
            out.push('(');
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                this.render_into(a, vars, out, budget);
            }
            out.push(')');
        };
        match t {
            Term::Int(n) => {
                let _ = write!(out, "{n}");
            }
            Term::Var(i) => out.push_str(vars.get(*i).map_or("?", String::as_str)),
            Term::Op(op, args) => list(out, self, &self.operations[*op].name, args),
            Term::Gen(g, args) => list(out, self, &self.generators[*g].name, args),
            Term::Des(d, a) => list(out, self, &self.destructors[*d].0, std::slice::from_ref(a)),
            Term::Call(a) => list(out, self, self.function.as_deref().unwrap_or("f"), std::slice::from_ref(a)),
            Term::Arith(a, s) => {
                let _ = write!(out, "arith({a},{s})");
            }
            Term::Cycle(items) => {
                let parts: Vec<String> = items.iter().map(ToString::to_string).collect();
                let _ = write!(out, "cycle([{}])", parts.join(","));
            }
        }
    }

    fn render_short(&self, t: &Term) -> String {
        const LIMIT: usize = 120;
        let mut s = String::new();
        self.render_into(t, &[], &mut s, LIMIT);
        if s.len() > LIMIT {
            let mut cut = LIMIT;
            while !s.is_char_boundary(cut) {
                cut -= 1;
            }
            s.truncate(cut);
            s.push_str("...");
        }
        s
    }

    /// `(value destructor, codata destructor)` for stream signatures.
    pub fn stream_signature(&self) -> Option<(usize, usize)> {
        let values: Vec<usize> = (0..self.destructors.len()).filter(|&d| self.destructors[d].1 == Sort::Value).collect();
        let codata: Vec<usize> = (0..self.destructors.len()).filter(|&d| self.destructors[d].1 == Sort::Codata).collect();
        match (values.as_slice(), codata.as_slice()) {
            ([v], [c]) => Some((*v, *c)),
            _ => None,
        }
    }
}

// ---------------------------------------------------------------------------
// evaluation

/// Result of one observation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Observation {
    Value(BigInt),
    /// Head-normal codata, rendered.
    Codata(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    Done(Observation),
    FuelExhausted { demand: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnfoldResult {
    pub outcome: Outcome,
    pub steps_used: u64,
}

enum Stop {
    Fuel(String),
    Stuck(String),
}

enum Frame {
    Des(usize),
    Call,
}

fn substitute(t: &Arc<Term>, binding: &[Arc<Term>]) -> Arc<Term> {
    match &**t {
        Term::Var(i) => binding[*i].clone(),
        Term::Int(_) | Term::Arith(..) | Term::Cycle(_) => t.clone(),
        Term::Op(o, args) => Arc::new(Term::Op(*o, args.iter().map(|a| substitute(a, binding)).collect())),
        Term::Gen(g, args) => Arc::new(Term::Gen(*g, args.iter().map(|a| substitute(a, binding)).collect())),
        Term::Des(d, a) => Arc::new(Term::Des(*d, substitute(a, binding))),
        Term::Call(a) => Arc::new(Term::Call(substitute(a, binding))),
    }
}

struct Machine<'a> {
    sys: &'a CodataSystem,
    fuel: u64,
    used: u64,
}

impl Machine<'_> {
    fn tick(&mut self, redex: impl FnOnce() -> String) -> Result<(), Stop> {
        if self.used >= self.fuel {
            return Err(Stop::Fuel(redex()));
        }
        self.used += 1;
        Ok(())
    }

    /// Weak head normal form by leftmost-outermost rule application.
    fn whnf(&mut self, t: Arc<Term>) -> Result<Arc<Term>, Stop> {
        let sys = self.sys;
        let mut stack: Vec<Frame> = Vec::new();
        let mut cur = t;
        loop {
            match &*cur {
                Term::Des(d, arg) => {
                    stack.push(Frame::Des(*d));
                    cur = arg.clone();
                    continue;
                }
                Term::Call(arg) => match &sys.equation {
                    Equation::CatchAll(rule) => {
                        self.tick(|| sys.render_short(&cur))?;
                        cur = substitute(&rule.rhs, std::slice::from_ref(arg));
                        continue;
                    }
                    Equation::ByGenerator(_) => {
                        stack.push(Frame::Call);
                        cur = arg.clone();
                        continue;
                    }
                    Equation::None => {
                        return Err(Stop::Stuck(format!("no equation for `{}`", sys.render_short(&cur))))
                    }
                },
                Term::Var(_) => return Err(Stop::Stuck("open term".into())),
                _ => {}
            }
            // `cur` is head-normal here
            let Some(frame) = stack.pop() else { return Ok(cur) };
            match frame {
                Frame::Des(d) => {
                    let next = self.destruct(d, &cur)?;
                    self.tick(|| format!("{}({})", sys.destructors[d].0, sys.render_short(&cur)))?;
                    cur = next;
                }
                Frame::Call => {
                    let Term::Gen(g, args) = &*cur else {
                        return Err(Stop::Stuck(format!(
                            "no equation rule matches argument `{}`",
                            sys.render_short(&cur)
                        )));
                    };
                    let Equation::ByGenerator(rules) = &sys.equation else { unreachable!() };
                    let rule = rules[*g].as_ref().expect("validated complete");
                    self.tick(|| format!("f({})", sys.render_short(&cur)))?;
                    cur = substitute(&rule.rhs, args);
                }
            }
        }
    }

    fn destruct(&self, d: usize, head: &Arc<Term>) -> Result<Arc<Term>, Stop> {
        let sys = self.sys;
        match &**head {
            Term::Op(op, args) => Ok(substitute(&sys.rules[d][*op].rhs, args)),
            Term::Arith(..) | Term::Cycle(..) if sys.stream_signature().is_none() => {
                Err(Stop::Stuck("built-in generators need a stream signature".into()))
            }
            Term::Arith(a, s) => {
                if sys.destructors[d].1 == Sort::Value {
                    Ok(Arc::new(Term::Int(a.clone())))
                } else {
                    Ok(Arc::new(Term::Arith(a + s, s.clone())))
                }
            }
            Term::Cycle(items) => {
                if sys.destructors[d].1 == Sort::Value {
                    Ok(Arc::new(Term::Int(items[0].clone())))
                } else {
                    let mut rotated: Vec<BigInt> = items[1..].to_vec();
                    rotated.push(items[0].clone());
                    Ok(Arc::new(Term::Cycle(rotated.into())))
                }
            }
            _ => Err(Stop::Stuck(format!(
                "no rule for `{}({})`",
                sys.destructors[d].0,
                sys.render_short(head)
            ))),
        }
    }
}

/// Follows `path` from `t`, head-normalizing after each destructor.
pub fn unfold(sys: &CodataSystem, t: &Arc<Term>, path: &[&str], fuel: u64) -> Result<UnfoldResult, CodataError> {
    let mut ds = Vec::with_capacity(path.len());
    for (i, name) in path.iter().enumerate() {
        let d = sys
            .destructors
            .iter()
            .position(|(n, _)| n == name)
            .ok_or_else(|| CodataError::BadPath(format!("unknown destructor `{name}`")))?;
        if sys.destructors[d].1 == Sort::Value && i + 1 != path.len() {
            return Err(CodataError::BadPath(format!("`{name}` yields a value and must come last")));
        }
        ds.push(d);
    }
    let mut m = Machine { sys, fuel, used: 0 };
    let run = |m: &mut Machine<'_>| -> Result<Arc<Term>, Stop> {
        let mut cur = m.whnf(t.clone())?;
        for &d in &ds {
            cur = m.whnf(Arc::new(Term::Des(d, cur)))?;
        }
        Ok(cur)
    };
    match run(&mut m) {
        Ok(v) => {
            let obs = match &*v {
                Term::Int(n) => Observation::Value(n.clone()),
                other => Observation::Codata(sys.render_short(other)),
            };
            Ok(UnfoldResult {
                outcome: Outcome::Done(obs),
                steps_used: m.used,
            })
        }
        Err(Stop::Fuel(redex)) => Ok(UnfoldResult {
            outcome: Outcome::FuelExhausted {
                demand: format!("path {} still demands `{redex}`", path.join(".")),
            },
            steps_used: m.used,
        }),
        Err(Stop::Stuck(why)) => Err(CodataError::StuckTerm(why)),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Prefix {
    pub values: Vec<BigInt>,
    /// Index and demand of the first observation that ran out of fuel.
    pub exhausted_at: Option<(usize, String)>,
    pub max_steps: u64,
}

/// `[tl^i then hd | i < n]`, stopping at the first exhausted observation.
pub fn prefix(sys: &CodataSystem, t: &Arc<Term>, n: usize, fuel: u64) -> Result<Prefix, CodataError> {
    let (hd, tl) = sys.stream_signature().ok_or(CodataError::NotStream)?;
    let hd = sys.destructors[hd].0.as_str();
    let tl = sys.destructors[tl].0.as_str();
    let mut out = Prefix {
        values: Vec::with_capacity(n),
        exhausted_at: None,
        max_steps: 0,
    };
    for i in 0..n {
        let mut path = vec![tl; i];
        path.push(hd);
        let r = unfold(sys, t, &path, fuel)?;
        out.max_steps = out.max_steps.max(r.steps_used);
        match r.outcome {
            Outcome::Done(Observation::Value(v)) => out.values.push(v),
            Outcome::Done(Observation::Codata(c)) => {
                return Err(CodataError::StuckTerm(format!("value destructor produced codata `{c}`")))
            }
            Outcome::FuelExhausted { demand } => {
                out.exhausted_at = Some((i, demand));
                break;
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ProductivityCertificate {
    pub ok: bool,
    pub depth: usize,
    pub max_steps_per_observation: u64,
    /// First failing observation index with the reason.
    pub failure: Option<(usize, String)>,
}

/// Depth-`depth` approximation of productivity: every observation
/// `tl^i hd` with `i < depth` must finish within `fuel`.
pub fn productivity_probe(sys: &CodataSystem, t: &Arc<Term>, depth: usize, fuel: u64) -> ProductivityCertificate {
    let failed = |i: usize, why: String, max: u64| ProductivityCertificate {
        ok: false,
        depth,
        max_steps_per_observation: max,
        failure: Some((i, why)),
    };
    match prefix(sys, t, depth, fuel) {
        Ok(p) => match p.exhausted_at {
            None => ProductivityCertificate {
                ok: true,
                depth,
                max_steps_per_observation: p.max_steps,
                failure: None,
            },
            Some((i, demand)) => failed(i, format!("fuel {fuel} exhausted: {demand}"), p.max_steps),
        },
        Err(e) => failed(0, e.to_string(), 0),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Guardedness {
    pub guarded: bool,
    pub offending_rule: Option<String>,
}

/// Syntactic guardedness: destructors in right-hand sides are applied only
/// to variables (possibly through further destructors) or generators, never
/// to operation- or `f`-rooted terms, and no equation right-hand side is
/// itself an `f` call.
pub fn check_guardedness(sys: &CodataSystem) -> Guardedness {
    fn destructor_arg_ok(t: &Term) -> bool {
        match t {
            Term::Var(_) | Term::Gen(..) | Term::Arith(..) | Term::Cycle(_) => true,
            Term::Des(_, a) => destructor_arg_ok(a),
            Term::Op(..) | Term::Call(_) | Term::Int(_) => false,
        }
    }
    fn rhs_ok(t: &Term) -> bool {
        match t {
            Term::Des(_, a) => destructor_arg_ok(a),
            Term::Op(_, args) | Term::Gen(_, args) => args.iter().all(|a| rhs_ok(a)),
            Term::Call(a) => rhs_ok(a),
            Term::Int(_) | Term::Var(_) | Term::Arith(..) | Term::Cycle(_) => true,
        }
    }
    let destructor_rules = sys.rules.iter().flatten();
    let equation_rules: Vec<&Rule> = match &sys.equation {
        Equation::None => Vec::new(),
        Equation::CatchAll(r) => vec![r],
        Equation::ByGenerator(rs) => rs.iter().flatten().collect(),
    };
    for r in destructor_rules {
        if !rhs_ok(&r.rhs) {
            return Guardedness {
                guarded: false,
                offending_rule: Some(r.text.clone()),
            };
        }
    }
    for r in equation_rules {
        if !rhs_ok(&r.rhs) || matches!(&*r.rhs, Term::Call(_)) {
            return Guardedness {
                guarded: false,
                offending_rule: Some(r.text.clone()),
            };
        }
    }
    Guardedness {
        guarded: true,
        offending_rule: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const STREAM: &str = r#"{
      "destructors": [{"name": "hd", "sort": "value"}, {"name": "tl", "sort": "codata"}],
      "operations": [{"name": "cons", "arity": 2, "sorts": ["value", "codata"]}],
      "rules": ["hd(cons(x, s)) = x", "tl(cons(x, s)) = s"],
      "equation": ["f(s) = cons(hd(s), f(tl(s)))"]
    }"#;

    fn ints(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn copy_function_on_cycle() {
        let sys = CodataSystem::parse(STREAM).unwrap();
        let t = sys.parse_term("f(cycle([7]))").unwrap();
        let p = prefix(&sys, &t, 5, DEFAULT_FUEL).unwrap();
        assert_eq!(p.values, ints(&[7, 7, 7, 7, 7]));
        let t = sys.parse_term("f(cycle([1,2,3]))").unwrap();
        assert_eq!(prefix(&sys, &t, 5, DEFAULT_FUEL).unwrap().values, ints(&[1, 2, 3, 1, 2]));
        assert!(check_guardedness(&sys).guarded);
    }

    #[test]
    fn rejects_duplicate_and_missing_rules() {
        let dup = STREAM.replace(r#""tl(cons(x, s)) = s""#, r#""tl(cons(x, s)) = s", "tl(cons(y, t)) = t""#);
        assert!(matches!(CodataSystem::parse(&dup), Err(CodataError::Validation(m)) if m.contains("duplicate")));
        let missing = STREAM.replace(r#", "tl(cons(x, s)) = s""#, "");
        assert!(matches!(CodataSystem::parse(&missing), Err(CodataError::Validation(m)) if m.contains("missing")));
    }

    #[test]
    fn rejects_ill_sorted_rules() {
        let bad = STREAM.replace(r#""hd(cons(x, s)) = x""#, r#""hd(cons(x, s)) = s""#);
        assert!(matches!(CodataSystem::parse(&bad), Err(CodataError::Validation(m)) if m.contains("ill-sorted")));
        let bad = STREAM.replace("f(s) = cons(hd(s), f(tl(s)))", "f(s) = cons(s, f(tl(s)))");
        assert!(matches!(CodataSystem::parse(&bad), Err(CodataError::Validation(m)) if m.contains("ill-sorted")));
    }

    #[test]
    fn syntax_errors() {
        let bad = STREAM.replace("hd(cons(x, s)) = x", "hd(cons(x, s) = x");
        assert!(matches!(CodataSystem::parse(&bad), Err(CodataError::Syntax { .. })));
        assert!(matches!(CodataSystem::parse("{"), Err(CodataError::Document(_))));
        let sys = CodataSystem::parse(STREAM).unwrap();
        assert!(sys.parse_term("f(arith(0,1)) extra").is_err());
        assert!(matches!(sys.parse_term("g(1)"), Err(CodataError::Validation(_))));
    }

    #[test]
    fn paths() {
        let sys = CodataSystem::parse(STREAM).unwrap();
        let t = sys.parse_term("arith(5,-2)").unwrap();
        let r = unfold(&sys, &t, &["tl", "tl", "hd"], 10).unwrap();
        assert_eq!(r.outcome, Outcome::Done(Observation::Value(BigInt::from(1))));
        assert_eq!(r.steps_used, 3);
        let r = unfold(&sys, &t, &["tl"], 10).unwrap();
        assert_eq!(r.outcome, Outcome::Done(Observation::Codata("arith(3,-2)".into())));
        assert!(matches!(unfold(&sys, &t, &["hd", "tl"], 10), Err(CodataError::BadPath(_))));
        assert!(matches!(unfold(&sys, &t, &["nope"], 10), Err(CodataError::BadPath(_))));
    }

    #[test]
    fn fuel_is_monotone() {
        let sys = CodataSystem::parse(STREAM).unwrap();
        let t = sys.parse_term("f(f(arith(0,3)))").unwrap();
        let path = ["tl", "tl", "tl", "hd"];
        let full = unfold(&sys, &t, &path, DEFAULT_FUEL).unwrap();
        let need = full.steps_used;
        let short = unfold(&sys, &t, &path, need - 1).unwrap();
        assert!(matches!(short.outcome, Outcome::FuelExhausted { .. }));
        assert_eq!(short.steps_used, need - 1);
        for fuel in need..need + 5 {
            assert_eq!(unfold(&sys, &t, &path, fuel).unwrap(), full);
        }
    }

    #[test]
    fn stuck_on_user_generator_without_rules() {
        let doc = r#"{
          "destructors": [{"name": "hd", "sort": "value"}, {"name": "tl", "sort": "codata"}],
          "operations": [],
          "rules": [],
          "generators": [{"name": "g", "arity": 0}]
        }"#;
        let sys = CodataSystem::parse(doc).unwrap();
        let t = sys.parse_term("g").unwrap();
        assert!(matches!(unfold(&sys, &t, &["hd"], 10), Err(CodataError::StuckTerm(_))));
    }

    #[test]
    fn catch_all_and_generator_rules_do_not_mix() {
        let doc = STREAM.replace(
            r#""equation": ["f(s) = cons(hd(s), f(tl(s)))"]"#,
            r#""equation": ["f(s) = cons(hd(s), f(tl(s)))", "f(g) = cons(1, f(g))"], "generators": [{"name": "g", "arity": 0}]"#,
        );
        assert!(matches!(CodataSystem::parse(&doc), Err(CodataError::Validation(m)) if m.contains("overlaps")));
    }
}
