use std::collections::BTreeMap;

use super::{Formula, Sort, Term};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(i64),
    LParen,
    RParen,
    Dot,
    Colon,
    Plus,
    Star,
    Minus,
    Eq,
    Ge,
    Cong(u32),
    And,
    Or,
    Not,
}

fn syntax(pos: usize, msg: impl Into<String>) -> Error {
    Error::Syntax { pos, msg: msg.into() }
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>> {
    let mut out = Vec::new();
    let mut it = text.char_indices().peekable();
    while let Some(&(pos, c)) = it.peek() {
        if c.is_whitespace() {
            it.next();
            continue;
        }
        let read_digits = |it: &mut std::iter::Peekable<std::str::CharIndices>| {
            let mut s = String::new();
            while let Some(&(_, d)) = it.peek() {
                if d.is_ascii_digit() {
                    s.push(d);
                    it.next();
                } else {
                    break;
                }
            }
            s
        };
        let tok = match c {
            '(' => {
                it.next();
                Tok::LParen
            }
            ')' => {
                it.next();
                Tok::RParen
            }
            '.' => {
                it.next();
                Tok::Dot
            }
            ':' => {
                it.next();
                Tok::Colon
            }
            '+' => {
                it.next();
                Tok::Plus
            }
            '*' => {
                it.next();
                Tok::Star
            }
            '-' => {
                it.next();
                Tok::Minus
            }
            '~' | '¬' => {
                it.next();
                Tok::Not
            }
            '∧' => {
                it.next();
                Tok::And
            }
            '∨' => {
                it.next();
                Tok::Or
            }
            '/' => {
                it.next();
                match it.next() {
                    Some((_, '\\')) => Tok::And,
                    _ => return Err(syntax(pos, "expected `/\\`")),
                }
            }
            '\\' => {
                it.next();
                match it.next() {
                    Some((_, '/')) => Tok::Or,
                    _ => return Err(syntax(pos, "expected `\\/`")),
                }
            }
            '>' => {
                it.next();
                match it.next() {
                    Some((_, '=')) => Tok::Ge,
                    _ => return Err(syntax(pos, "expected `>=`")),
                }
            }
            '≥' => {
                it.next();
                Tok::Ge
            }
            '=' => {
                it.next();
                if matches!(it.peek(), Some((_, '_'))) {
                    it.next();
                    let n = read_digits(&mut it);
                    if n.is_empty() || !matches!(it.next(), Some((_, '='))) {
                        return Err(syntax(pos, "expected `=_n=`"));
                    }
                    Tok::Cong(n.parse().map_err(|_| syntax(pos, "bad modulus"))?)
                } else {
                    Tok::Eq
                }
            }
            '≡' => {
                it.next();
                if !matches!(it.next(), Some((_, '_'))) {
                    return Err(syntax(pos, "expected `≡_n`"));
                }
                let n = read_digits(&mut it);
                if n.is_empty() {
                    return Err(syntax(pos, "expected a modulus after `≡_`"));
                }
                Tok::Cong(n.parse().map_err(|_| syntax(pos, "bad modulus"))?)
            }
            c if c.is_ascii_digit() => {
                let n = read_digits(&mut it);
                Tok::Int(n.parse().map_err(|_| syntax(pos, "integer literal too large"))?)
            }
            c if c.is_alphabetic() || c == '_' => {
                let mut s = String::new();
                while let Some(&(_, d)) = it.peek() {
                    if d.is_alphanumeric() || d == '_' || d == '\'' {
                        s.push(d);
                        it.next();
                    } else {
                        break;
                    }
                }
                Tok::Ident(s)
            }
            c => return Err(syntax(pos, format!("unexpected character `{c}`"))),
        };
        out.push((pos, tok));
    }
    Ok(out)
}

const KEYWORDS: &[&str] = &["EX", "ALL", "ord", "ac", "INF", "TRUE", "FALSE", "VF", "RF", "Z"];

/// Untyped equality; sorts are filled in by the checker.
const PENDING: Sort = Sort::Z;

struct Parser {
    toks: Vec<(usize, Tok)>,
    i: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.i).map(|t| &t.1)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.i).map_or(self.end, |t| t.0)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.i).map(|t| t.1.clone());
        self.i += 1;
        t
    }

    fn expect(&mut self, t: Tok, what: &str) -> Result<()> {
        let pos = self.pos();
        match self.next() {
            Some(x) if x == t => Ok(()),
            _ => Err(syntax(pos, format!("expected {what}"))),
        }
    }

    fn formula(&mut self) -> Result<Formula> {
        let mut lhs = self.conj()?;
        while self.peek() == Some(&Tok::Or) {
            self.next();
            let rhs = self.conj()?;
            lhs = Formula::Or(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn conj(&mut self) -> Result<Formula> {
        let mut lhs = self.unary()?;
        while self.peek() == Some(&Tok::And) {
            self.next();
            let rhs = self.unary()?;
            lhs = Formula::And(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Formula> {
        match self.peek() {
            Some(Tok::Not) => {
                self.next();
                Ok(Formula::Not(Box::new(self.unary()?)))
            }
            Some(Tok::Ident(k)) if k == "EX" || k == "ALL" => {
                let exists = k == "EX";
                self.next();
                let pos = self.pos();
                let v = match self.next() {
                    Some(Tok::Ident(v)) if !KEYWORDS.contains(&v.as_str()) => v,
                    _ => return Err(syntax(pos, "expected a variable name")),
                };
                self.expect(Tok::Colon, "`:`")?;
                let pos = self.pos();
                let sort = match self.next() {
                    Some(Tok::Ident(s)) if s == "VF" => Sort::VF,
                    Some(Tok::Ident(s)) if s == "RF" => Sort::RF,
                    Some(Tok::Ident(s)) if s == "Z" => Sort::Z,
                    _ => return Err(syntax(pos, "expected a sort VF, RF or Z")),
                };
                self.expect(Tok::Dot, "`.`")?;
                let body = Box::new(self.formula()?);
                Ok(if exists { Formula::Exists(v, sort, body) } else { Formula::Forall(v, sort, body) })
            }
            Some(Tok::Ident(k)) if k == "TRUE" => {
                self.next();
                Ok(Formula::Bool(true))
            }
            Some(Tok::Ident(k)) if k == "FALSE" => {
                self.next();
                Ok(Formula::Bool(false))
            }
            Some(Tok::LParen) => {
                // a parenthesized formula, or an atom starting with a parenthesized term
                let save = self.i;
                self.next();
                if let Ok(f) = self.formula() {
                    if self.peek() == Some(&Tok::RParen) {
                        self.next();
                        let continues_term = matches!(
                            self.peek(),
                            Some(Tok::Eq | Tok::Ge | Tok::Cong(_) | Tok::Plus | Tok::Star)
                        );
                        if !continues_term {
                            return Ok(f);
                        }
                    }
                }
                self.i = save;
                self.atom()
            }
            _ => self.atom(),
        }
    }

    fn atom(&mut self) -> Result<Formula> {
        let lhs = self.term()?;
        let pos = self.pos();
        let op = self.next();
        let rhs = self.term()?;
        match op {
            Some(Tok::Eq) => Ok(Formula::Eq(PENDING, lhs, rhs)),
            Some(Tok::Ge) => Ok(Formula::Ge(lhs, rhs)),
            Some(Tok::Cong(n)) => {
                if n == 0 {
                    return Err(syntax(pos, "congruence modulus must be positive"));
                }
                Ok(Formula::Cong(n, lhs, rhs))
            }
            _ => Err(syntax(pos, "expected `=`, `>=` or a congruence")),
        }
    }

    fn term(&mut self) -> Result<Term> {
        let mut lhs = self.product()?;
        while self.peek() == Some(&Tok::Plus) {
            self.next();
            let rhs = self.product()?;
            lhs = Term::Add(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn product(&mut self) -> Result<Term> {
        let mut lhs = self.factor()?;
        while self.peek() == Some(&Tok::Star) {
            self.next();
            let rhs = self.factor()?;
            lhs = Term::Mul(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn factor(&mut self) -> Result<Term> {
        let pos = self.pos();
        match self.next() {
            Some(Tok::Int(n)) => Ok(Term::Int(n)),
            Some(Tok::Minus) => match self.next() {
                Some(Tok::Int(n)) => Ok(Term::Int(-n)),
                _ => Err(syntax(pos, "`-` must precede an integer literal")),
            },
            Some(Tok::LParen) => {
                let t = self.term()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(t)
            }
            Some(Tok::Ident(k)) if k == "INF" => Ok(Term::Inf),
            Some(Tok::Ident(k)) if k == "ord" || k == "ac" => {
                self.expect(Tok::LParen, "`(`")?;
                let t = Box::new(self.term()?);
                self.expect(Tok::RParen, "`)`")?;
                Ok(if k == "ord" { Term::Ord(t) } else { Term::Ac(t) })
            }
            Some(Tok::Ident(v)) if !KEYWORDS.contains(&v.as_str()) => Ok(Term::Var(v)),
            _ => Err(syntax(pos, "expected a term")),
        }
    }
}

/// Parses and sort-checks a formula, inferring sorts of free variables.
pub fn parse(text: &str) -> Result<Formula> {
    parse_with(text, &BTreeMap::new())
}

/// As [`parse`], with sorts of some free variables given.
pub fn parse_with(text: &str, free: &BTreeMap<String, Sort>) -> Result<Formula> {
    let toks = lex(text)?;
    let mut p = Parser { toks, i: 0, end: text.len() };
    let f = p.formula()?;
    if p.i < p.toks.len() {
        return Err(syntax(p.pos(), "unexpected trailing input"));
    }
    let sorts = infer_free(&f, free)?;
    annotate(f, &sorts, &mut Vec::new())
}

struct Checker {
    free: BTreeMap<String, Sort>,
    changed: bool,
}

fn sort_err(msg: impl Into<String>) -> Error {
    Error::Sort(msg.into())
}

impl Checker {
    fn var_sort(&mut self, v: &str, bound: &[(String, Sort)], expected: Option<Sort>) -> Result<Option<Sort>> {
        let known = bound.iter().rev().find(|(b, _)| b == v).map(|x| x.1).or_else(|| self.free.get(v).copied());
        match (known, expected) {
            (Some(s), Some(e)) if s != e => Err(sort_err(format!("`{v}` has sort {s}, expected {e}"))),
            (Some(s), _) => Ok(Some(s)),
            (None, Some(e)) => {
                self.free.insert(v.to_string(), e);
                self.changed = true;
                Ok(Some(e))
            }
            (None, None) => Ok(None),
        }
    }

    fn term(&mut self, t: &Term, bound: &[(String, Sort)], expected: Option<Sort>) -> Result<Option<Sort>> {
        match t {
            Term::Var(v) => self.var_sort(v, bound, expected),
            Term::Int(_) => Ok(expected),
            Term::Inf => match expected {
                Some(s) if s != Sort::Z => Err(sort_err(format!("INF has sort Z, expected {s}"))),
                _ => Ok(Some(Sort::Z)),
            },
            Term::Add(a, b) | Term::Mul(a, b) => {
                let sa = self.term(a, bound, expected)?;
                let sb = self.term(b, bound, expected.or(sa))?;
                let s = match (sa, sb) {
                    (None, Some(s)) => self.term(a, bound, Some(s))?,
                    (s, _) => s,
                };
                if matches!(t, Term::Mul(..)) && s == Some(Sort::Z) {
                    return Err(sort_err("multiplication is not available in the Z sort"));
                }
                Ok(s)
            }
            Term::Ord(a) => {
                self.term(a, bound, Some(Sort::VF))?;
                match expected {
                    Some(s) if s != Sort::Z => Err(sort_err(format!("ord(..) has sort Z, expected {s}"))),
                    _ => Ok(Some(Sort::Z)),
                }
            }
            Term::Ac(a) => {
                self.term(a, bound, Some(Sort::VF))?;
                match expected {
                    Some(s) if s != Sort::RF => Err(sort_err(format!("ac(..) has sort RF, expected {s}"))),
                    _ => Ok(Some(Sort::RF)),
                }
            }
        }
    }

    fn formula(&mut self, f: &Formula, bound: &mut Vec<(String, Sort)>) -> Result<()> {
        match f {
            Formula::Bool(_) => Ok(()),
            Formula::Eq(_, a, b) => {
                let sa = self.term(a, bound, None)?;
                let sb = self.term(b, bound, sa)?;
                if sa.is_none() {
                    if let Some(s) = sb {
                        self.term(a, bound, Some(s))?;
                    }
                }
                Ok(())
            }
            Formula::Ge(a, b) | Formula::Cong(_, a, b) => {
                self.term(a, bound, Some(Sort::Z))?;
                self.term(b, bound, Some(Sort::Z))?;
                Ok(())
            }
            Formula::Not(a) => self.formula(a, bound),
            Formula::And(a, b) | Formula::Or(a, b) => {
                self.formula(a, bound)?;
                self.formula(b, bound)
            }
            Formula::Exists(v, s, body) | Formula::Forall(v, s, body) => {
                bound.push((v.clone(), *s));
                let r = self.formula(body, bound);
                bound.pop();
                r
            }
        }
    }
}

fn unresolved_vars(t: &Term, bound: &[(String, Sort)], free: &BTreeMap<String, Sort>, out: &mut Vec<String>) {
    match t {
        Term::Var(v) => {
            if !bound.iter().any(|(b, _)| b == v) && !free.contains_key(v) {
                out.push(v.clone());
            }
        }
        Term::Int(_) | Term::Inf => {}
        Term::Add(a, b) | Term::Mul(a, b) => {
            unresolved_vars(a, bound, free, out);
            unresolved_vars(b, bound, free, out);
        }
        Term::Ord(a) | Term::Ac(a) => unresolved_vars(a, bound, free, out),
    }
}

fn collect_unresolved(f: &Formula, bound: &mut Vec<(String, Sort)>, free: &BTreeMap<String, Sort>, out: &mut Vec<String>) {
    match f {
        Formula::Bool(_) => {}
        Formula::Eq(_, a, b) | Formula::Ge(a, b) | Formula::Cong(_, a, b) => {
            unresolved_vars(a, bound, free, out);
            unresolved_vars(b, bound, free, out);
        }
        Formula::Not(a) => collect_unresolved(a, bound, free, out),
        Formula::And(a, b) | Formula::Or(a, b) => {
            collect_unresolved(a, bound, free, out);
            collect_unresolved(b, bound, free, out);
        }
        Formula::Exists(v, s, body) | Formula::Forall(v, s, body) => {
            bound.push((v.clone(), *s));
            collect_unresolved(body, bound, free, out);
            bound.pop();
        }
    }
}

/// Sorts of the free variables, by propagation to a fixed point.
pub(crate) fn infer_free(f: &Formula, hints: &BTreeMap<String, Sort>) -> Result<BTreeMap<String, Sort>> {
    let mut c = Checker { free: hints.clone(), changed: true };
    while c.changed {
        c.changed = false;
        c.formula(f, &mut Vec::new())?;
    }
    // variables no atom constrains (as in `x = x`) are valued-field variables
    let mut missing = Vec::new();
    collect_unresolved(f, &mut Vec::new(), &c.free, &mut missing);
    if !missing.is_empty() {
        for v in missing {
            c.free.insert(v, Sort::VF);
        }
        c.changed = true;
        while c.changed {
            c.changed = false;
            c.formula(f, &mut Vec::new())?;
        }
    }
    let mut used = Vec::new();
    collect_unresolved(f, &mut Vec::new(), &BTreeMap::new(), &mut used);
    Ok(c.free.into_iter().filter(|(k, _)| used.contains(k)).collect())
}

fn term_sort(t: &Term, bound: &[(String, Sort)], free: &BTreeMap<String, Sort>) -> Option<Sort> {
    match t {
        Term::Var(v) => bound.iter().rev().find(|(b, _)| b == v).map(|x| x.1).or_else(|| free.get(v).copied()),
        Term::Int(_) => None,
        Term::Inf | Term::Ord(_) => Some(Sort::Z),
        Term::Ac(_) => Some(Sort::RF),
        Term::Add(a, b) | Term::Mul(a, b) => term_sort(a, bound, free).or_else(|| term_sort(b, bound, free)),
    }
}

fn annotate(f: Formula, free: &BTreeMap<String, Sort>, bound: &mut Vec<(String, Sort)>) -> Result<Formula> {
    Ok(match f {
        Formula::Eq(_, a, b) => {
            // literal-only equations default to Z
            let s = term_sort(&a, bound, free).or_else(|| term_sort(&b, bound, free)).unwrap_or(Sort::Z);
            Formula::Eq(s, a, b)
        }
        Formula::Not(a) => Formula::Not(Box::new(annotate(*a, free, bound)?)),
        Formula::And(a, b) => Formula::And(Box::new(annotate(*a, free, bound)?), Box::new(annotate(*b, free, bound)?)),
        Formula::Or(a, b) => Formula::Or(Box::new(annotate(*a, free, bound)?), Box::new(annotate(*b, free, bound)?)),
        Formula::Exists(v, s, body) => {
            bound.push((v.clone(), s));
            let body = annotate(*body, free, bound)?;
            bound.pop();
            Formula::Exists(v, s, Box::new(body))
        }
        Formula::Forall(v, s, body) => {
            bound.push((v.clone(), s));
            let body = annotate(*body, free, bound)?;
            bound.pop();
            Formula::Forall(v, s, Box::new(body))
        }
        other => other,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_examples() {
        let f = parse("EX x:VF. ord(x) >= 2 /\\ ac(x) = 1").unwrap();
        let Formula::Exists(v, Sort::VF, body) = &f else { panic!("{f:?}") };
        assert_eq!(v, "x");
        assert!(matches!(**body, Formula::And(_, ref b) if matches!(**b, Formula::Eq(Sort::RF, _, _))));
        let g = parse("ALL n:Z. n ≡_2 0 \\/ n ≡_2 1").unwrap();
        assert!(matches!(g, Formula::Forall(_, Sort::Z, _)));
        assert_eq!(parse("ALL n:Z. n =_2= 0 \\/ n =_2= 1").unwrap(), g);
        let h = parse("ord(x) = INF").unwrap();
        assert_eq!(h.free_variables().get("x"), Some(&Sort::VF));
    }

    #[test]
    fn infers_free_sorts_through_equations() {
        let f = parse("y = ac(x) /\\ z + 1 = y").unwrap();
        let fv = f.free_variables();
        assert_eq!(fv["x"], Sort::VF);
        assert_eq!(fv["y"], Sort::RF);
        assert_eq!(fv["z"], Sort::RF);
    }

    #[test]
    fn errors_have_positions() {
        match parse("EX x:VF. ord(x) >= ") {
            Err(Error::Syntax { pos, .. }) => assert_eq!(pos, 19),
            e => panic!("{e:?}"),
        }
        assert!(matches!(parse("ord(x) >= ac(x)"), Err(Error::Sort(_))));
        assert!(matches!(parse("ord(x) * ord(x) >= 0"), Err(Error::Sort(_))));
        assert_eq!(parse("x = y").unwrap().free_variables()["y"], Sort::VF);
        assert!(matches!(parse("x = y /\\ ord(y) = 0 /\\ x = 1 /\\ x >= 0"), Err(Error::Sort(_))));
        assert!(matches!(parse("EX x:RF. ord(x) = 0"), Err(Error::Sort(_))));
        assert!(matches!(parse("x = 1 $"), Err(Error::Syntax { pos: 6, .. })));
    }

    #[test]
    fn parenthesized_terms_and_formulas() {
        let a = parse("(x + 1) * x = 0").unwrap();
        assert!(matches!(a, Formula::Eq(Sort::VF, Term::Mul(..), _) | Formula::Eq(_, Term::Mul(..), _)));
        let b = parse("(ord(x) >= 0 \\/ ord(x) = 1) /\\ ~(ac(x) = 0)").unwrap();
        assert!(matches!(b, Formula::And(..)));
    }
}
