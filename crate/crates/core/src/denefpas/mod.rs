//! Three-sorted Denef-Pas formulas: valued-field (`VF`), residue-field (`RF`)
//! and value-group (`Z`) sorts with `ord` and `ac`.
//!
//! Formulas are parsed from a small concrete syntax, sort-checked, printed
//! back, and evaluated over finite boxes with three-valued logic.

mod eval;
mod lattice;
mod parser;

pub use eval::{evaluate, evaluate3, DefinableSet, EvalContext, Evaluation, Truth, Value, VfBox, ZVal};
pub use lattice::{entry_var, lattice_formula, matrix_assignment};
pub use parser::{parse, parse_with};

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sort {
    VF,
    RF,
    Z,
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sort::VF => "VF",
            Sort::RF => "RF",
            Sort::Z => "Z",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Term {
    Var(String),
    /// Integer literal; its sort comes from context.
    Int(i64),
    Inf,
    Add(Box<Term>, Box<Term>),
    Mul(Box<Term>, Box<Term>),
    Ord(Box<Term>),
    Ac(Box<Term>),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Formula {
    Bool(bool),
    /// Equality of two terms of the given sort.
    Eq(Sort, Term, Term),
    Ge(Term, Term),
    Cong(u32, Term, Term),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Exists(String, Sort, Box<Formula>),
    Forall(String, Sort, Box<Formula>),
}

impl Formula {
    pub fn has_quantifiers(&self) -> bool {
        match self {
            Formula::Exists(..) | Formula::Forall(..) => true,
            Formula::Not(a) => a.has_quantifiers(),
            Formula::And(a, b) | Formula::Or(a, b) => a.has_quantifiers() || b.has_quantifiers(),
            _ => false,
        }
    }

    /// Free variables with their inferred sorts.
    pub fn free_variables(&self) -> BTreeMap<String, Sort> {
        parser::infer_free(self, &BTreeMap::new()).expect("formula was sort-checked")
    }
}

fn term_prec(t: &Term) -> u8 {
    match t {
        Term::Add(..) => 1,
        Term::Mul(..) => 2,
        _ => 3,
    }
}

fn write_term(f: &mut fmt::Formatter<'_>, t: &Term, ctx: u8) -> fmt::Result {
    let paren = term_prec(t) < ctx;
    if paren {
        f.write_str("(")?;
    }
    match t {
        Term::Var(v) => f.write_str(v)?,
        Term::Int(n) => write!(f, "{n}")?,
        Term::Inf => f.write_str("INF")?,
        Term::Add(a, b) => {
            write_term(f, a, 1)?;
            f.write_str(" + ")?;
            write_term(f, b, 2)?;
        }
        Term::Mul(a, b) => {
            write_term(f, a, 2)?;
            f.write_str(" * ")?;
            write_term(f, b, 3)?;
        }
        Term::Ord(a) => {
            f.write_str("ord(")?;
            write_term(f, a, 0)?;
            f.write_str(")")?;
        }
        Term::Ac(a) => {
            f.write_str("ac(")?;
            write_term(f, a, 0)?;
            f.write_str(")")?;
        }
    }
    if paren {
        f.write_str(")")?;
    }
    Ok(())
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_term(f, self, 0)
    }
}

fn formula_prec(phi: &Formula) -> u8 {
    match phi {
        Formula::Or(..) => 1,
        Formula::And(..) => 2,
        Formula::Exists(..) | Formula::Forall(..) => 0,
        _ => 3,
    }
}

fn write_formula(f: &mut fmt::Formatter<'_>, phi: &Formula, ctx: u8) -> fmt::Result {
    let prec = formula_prec(phi);
    // quantifiers extend as far right as possible, so any operand position needs parentheses
    let paren = prec < ctx;
    if paren {
        f.write_str("(")?;
    }
    match phi {
        Formula::Bool(true) => f.write_str("TRUE")?,
        Formula::Bool(false) => f.write_str("FALSE")?,
        Formula::Eq(_, a, b) => write!(f, "{a} = {b}")?,
        Formula::Ge(a, b) => write!(f, "{a} >= {b}")?,
        Formula::Cong(n, a, b) => write!(f, "{a} ≡_{n} {b}")?,
        Formula::Not(a) => {
            f.write_str("~")?;
            write_formula(f, a, 3)?;
        }
        Formula::And(a, b) => {
            write_formula(f, a, 2)?;
            f.write_str(" /\\ ")?;
            write_formula(f, b, 3)?;
        }
        Formula::Or(a, b) => {
            write_formula(f, a, 1)?;
            f.write_str(" \\/ ")?;
            write_formula(f, b, 2)?;
        }
        Formula::Exists(v, s, body) => {
            write!(f, "EX {v}:{s}. ")?;
            write_formula(f, body, 0)?;
        }
        Formula::Forall(v, s, body) => {
            write!(f, "ALL {v}:{s}. ")?;
            write_formula(f, body, 0)?;
        }
    }
    if paren {
        f.write_str(")")?;
    }
    Ok(())
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_formula(f, self, 0)
    }
}
