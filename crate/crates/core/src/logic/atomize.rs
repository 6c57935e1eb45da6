use std::collections::HashMap;
use std::fmt;

use super::Formula;

pub type AtomId = usize;

/// Propositional skeleton of a formula.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Prop {
    Atom(AtomId),
    True,
    False,
    Not(Box<Prop>),
    And(Vec<Prop>),
    Or(Vec<Prop>),
    Implies(Box<Prop>, Box<Prop>),
    Iff(Box<Prop>, Box<Prop>),
}

impl Prop {
    pub fn eval(&self, assignment: &[bool]) -> bool {
        match self {
            Prop::Atom(a) => assignment[*a],
            Prop::True => true,
            Prop::False => false,
            Prop::Not(p) => !p.eval(assignment),
            Prop::And(ps) => ps.iter().all(|p| p.eval(assignment)),
            Prop::Or(ps) => ps.iter().any(|p| p.eval(assignment)),
            Prop::Implies(a, b) => !a.eval(assignment) || b.eval(assignment),
            Prop::Iff(a, b) => a.eval(assignment) == b.eval(assignment),
        }
    }

    pub fn max_atom(&self) -> Option<AtomId> {
        match self {
            Prop::Atom(a) => Some(*a),
            Prop::True | Prop::False => None,
            Prop::Not(p) => p.max_atom(),
            Prop::And(ps) | Prop::Or(ps) => ps.iter().filter_map(Prop::max_atom).max(),
            Prop::Implies(a, b) | Prop::Iff(a, b) => a.max_atom().max(b.max_atom()),
        }
    }
}

impl fmt::Display for Prop {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |f: &mut fmt::Formatter<'_>, ps: &[Prop], sep: &str| -> fmt::Result {
            f.write_str("(")?;
            for (i, p) in ps.iter().enumerate() {
                if i > 0 {
                    f.write_str(sep)?;
                }
                write!(f, "{p}")?;
            }
            f.write_str(")")
        };
        match self {
            Prop::Atom(a) => write!(f, "a{}", a + 1),
            Prop::True => f.write_str("true"),
            Prop::False => f.write_str("false"),
            Prop::Not(p) => write!(f, "!{p}"),
            Prop::And(ps) => join(f, ps, " && "),
            Prop::Or(ps) => join(f, ps, " || "),
            Prop::Implies(a, b) => write!(f, "({a} -> {b})"),
            Prop::Iff(a, b) => write!(f, "({a} <-> {b})"),
        }
    }
}

/// Maps atom ids back to the subformulas they abstract.
#[derive(Clone, Debug, Default)]
pub struct AtomTable {
    atoms: Vec<Formula>,
    index: HashMap<Formula, AtomId>,
}

impl AtomTable {
    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn get(&self, id: AtomId) -> Option<&Formula> {
        self.atoms.get(id)
    }

    pub fn iter(&self) -> impl Iterator<Item = (AtomId, &Formula)> {
        self.atoms.iter().enumerate()
    }

    fn intern(&mut self, phi: &Formula) -> AtomId {
        if let Some(id) = self.index.get(phi) {
            return *id;
        }
        let id = self.atoms.len();
        self.atoms.push(phi.clone());
        self.index.insert(phi.clone(), id);
        id
    }

    fn skeleton(&mut self, phi: &Formula) -> Prop {
        match phi {
            Formula::True => Prop::True,
            Formula::False => Prop::False,
            Formula::Not(a) => Prop::Not(Box::new(self.skeleton(a))),
            Formula::And(xs) => Prop::And(xs.iter().map(|x| self.skeleton(x)).collect()),
            Formula::Or(xs) => Prop::Or(xs.iter().map(|x| self.skeleton(x)).collect()),
            Formula::Implies(a, b) => Prop::Implies(Box::new(self.skeleton(a)), Box::new(self.skeleton(b))),
            Formula::Iff(a, b) => Prop::Iff(Box::new(self.skeleton(a)), Box::new(self.skeleton(b))),
            other => Prop::Atom(self.intern(other)),
        }
    }
}

/// Abstracts normalized formulas to propositional skeletons over a shared
/// atom table. Structurally identical non-connective subformulas share
/// one atom.
pub fn atomize(phis: &[Formula]) -> (Vec<Prop>, AtomTable) {
    let mut table = AtomTable::default();
    let skeletons = phis.iter().map(|phi| table.skeleton(phi)).collect();
    (skeletons, table)
}
