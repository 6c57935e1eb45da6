//! Small DPLL core: unit propagation plus chronological branching over a
//! Tseitin encoding of a propositional skeleton.

use crate::logic::Prop;

/// Literal over variable `v`: `2v` is positive, `2v + 1` negative.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Lit(u32);

impl Lit {
    pub fn pos(v: usize) -> Lit {
        Lit((v as u32) << 1)
    }

    pub fn neg(v: usize) -> Lit {
        Lit(((v as u32) << 1) | 1)
    }

    pub fn var(self) -> usize {
        (self.0 >> 1) as usize
    }

    pub fn is_neg(self) -> bool {
        self.0 & 1 == 1
    }

    pub fn negate(self) -> Lit {
        Lit(self.0 ^ 1)
    }
}

#[derive(Clone, Debug, Default)]
pub struct Cnf {
    pub num_vars: usize,
    pub clauses: Vec<Vec<Lit>>,
}

impl Cnf {
    pub fn new(num_vars: usize) -> Self {
        Cnf { num_vars, clauses: Vec::new() }
    }

    pub fn fresh(&mut self) -> usize {
        self.num_vars += 1;
        self.num_vars - 1
    }

    pub fn add(&mut self, clause: Vec<Lit>) {
        self.clauses.push(clause);
    }

    /// Tseitin-encodes `p` and returns a literal equivalent to it. Atom `i`
    /// maps to variable `i`, so callers reserve the atom range up front.
    pub fn encode(&mut self, p: &Prop) -> Lit {
        match p {
            Prop::Atom(a) => Lit::pos(*a),
            Prop::True | Prop::False => {
                let v = self.fresh();
                self.add(vec![Lit::pos(v)]);
                if matches!(p, Prop::True) {
                    Lit::pos(v)
                } else {
                    Lit::neg(v)
                }
            }
            Prop::Not(q) => self.encode(q).negate(),
            Prop::And(qs) => {
                let lits: Vec<Lit> = qs.iter().map(|q| self.encode(q)).collect();
                let t = Lit::pos(self.fresh());
                // t -> each; all -> t
                for &l in &lits {
                    self.add(vec![t.negate(), l]);
                }
                let mut back: Vec<Lit> = lits.iter().map(|l| l.negate()).collect();
                back.push(t);
                self.add(back);
                t
            }
            Prop::Or(qs) => {
                let lits: Vec<Lit> = qs.iter().map(|q| self.encode(q)).collect();
                let t = Lit::pos(self.fresh());
                for &l in &lits {
                    self.add(vec![l.negate(), t]);
                }
                let mut fwd = lits.clone();
                fwd.push(t.negate());
                self.add(fwd);
                t
            }
            Prop::Implies(a, b) => {
                let na = Prop::Not(a.clone());
                self.encode(&Prop::Or(vec![na, (**b).clone()]))
            }
            Prop::Iff(a, b) => {
                let (la, lb) = (self.encode(a), self.encode(b));
                let t = Lit::pos(self.fresh());
                self.add(vec![t.negate(), la.negate(), lb]);
                self.add(vec![t.negate(), la, lb.negate()]);
                self.add(vec![t, la, lb]);
                self.add(vec![t, la.negate(), lb.negate()]);
                t
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SatResult {
    Sat(Vec<bool>),
    Unsat,
    /// The decision budget ran out.
    Budget,
}

struct Search<'a> {
    cnf: &'a Cnf,
    assign: Vec<Option<bool>>,
    trail: Vec<usize>,
    decisions_left: usize,
}

impl Search<'_> {
    fn value(&self, l: Lit) -> Option<bool> {
        self.assign[l.var()].map(|v| v != l.is_neg())
    }

    fn set(&mut self, l: Lit) {
        self.assign[l.var()] = Some(!l.is_neg());
        self.trail.push(l.var());
    }

    fn undo_to(&mut self, mark: usize) {
        while self.trail.len() > mark {
            let v = self.trail.pop().unwrap();
            self.assign[v] = None;
        }
    }

    /// Returns false on conflict.
    fn propagate(&mut self) -> bool {
        loop {
            let mut changed = false;
            for clause in &self.cnf.clauses {
                let mut unassigned = None;
                let mut count = 0;
                let mut satisfied = false;
                for &l in clause {
                    match self.value(l) {
                        Some(true) => {
                            satisfied = true;
                            break;
                        }
                        Some(false) => {}
                        None => {
                            count += 1;
                            unassigned = Some(l);
                        }
                    }
                }
                if satisfied {
                    continue;
                }
                match count {
                    0 => return false,
                    1 => {
                        self.set(unassigned.unwrap());
                        changed = true;
                    }
                    _ => {}
                }
            }
            if !changed {
                return true;
            }
        }
    }

    fn solve(&mut self) -> Option<bool> {
        if !self.propagate() {
            return Some(false);
        }
        let Some(v) = self.assign.iter().position(Option::is_none) else {
            return Some(true);
        };
        for phase in [true, false] {
            if self.decisions_left == 0 {
                return None;
            }
            self.decisions_left -= 1;
            let mark = self.trail.len();
            self.set(if phase { Lit::pos(v) } else { Lit::neg(v) });
            match self.solve() {
                Some(true) => return Some(true),
                Some(false) => self.undo_to(mark),
                None => return None,
            }
        }
        Some(false)
    }
}

pub fn solve(cnf: &Cnf, max_decisions: usize) -> SatResult {
    let mut s = Search { cnf, assign: vec![None; cnf.num_vars], trail: Vec::new(), decisions_left: max_decisions };
    match s.solve() {
        Some(true) => SatResult::Sat(s.assign.iter().map(|v| v.unwrap_or(false)).collect()),
        Some(false) => SatResult::Unsat,
        None => SatResult::Budget,
    }
}
