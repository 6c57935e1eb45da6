use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};

use super::{Formula, Sort, Term};

/// Canonical form used for structural comparison of claims.
///
/// Bound variables are renamed by binding depth, double negations are
/// dropped, `forall` is pushed through `&&` and `exists` through `||`,
/// and `&&`/`||` are flattened with operands ordered by structural hash.
pub fn normalize(phi: &Formula) -> Formula {
    let mut scope = Vec::new();
    simplify(rename(phi, &mut scope))
}

fn canonical_name(depth: usize) -> String {
    format!("_v{depth}")
}

fn rename(phi: &Formula, scope: &mut Vec<(String, String)>) -> Formula {
    let rt = |t: &Term, scope: &Vec<(String, String)>| rename_term(t, scope);
    match phi {
        Formula::Pred(n, args) => Formula::Pred(n.clone(), args.iter().map(|a| rt(a, scope)).collect()),
        Formula::Equals(a, b) => Formula::Equals(rt(a, scope), rt(b, scope)),
        Formula::Compare(op, a, b) => Formula::Compare(*op, rt(a, scope), rt(b, scope)),
        Formula::MemberOf(t, set) => Formula::MemberOf(rt(t, scope), set.clone()),
        Formula::Informal(_) | Formula::True | Formula::False => phi.clone(),
        Formula::Not(a) => Formula::not(rename(a, scope)),
        Formula::And(xs) => Formula::And(xs.iter().map(|x| rename(x, scope)).collect()),
        Formula::Or(xs) => Formula::Or(xs.iter().map(|x| rename(x, scope)).collect()),
        Formula::Implies(a, b) => Formula::implies(rename(a, scope), rename(b, scope)),
        Formula::Iff(a, b) => Formula::iff(rename(a, scope), rename(b, scope)),
        Formula::Forall(v, s, body) | Formula::Exists(v, s, body) => {
            let fresh = canonical_name(scope.len());
            scope.push((v.clone(), fresh.clone()));
            let body = Box::new(rename(body, scope));
            scope.pop();
            match phi {
                Formula::Forall(..) => Formula::Forall(fresh, s.clone(), body),
                _ => Formula::Exists(fresh, s.clone(), body),
            }
        }
    }
}

fn rename_term(t: &Term, scope: &Vec<(String, String)>) -> Term {
    match t {
        Term::Var(name, sort) => {
            let renamed = scope.iter().rev().find(|(old, _)| old == name).map(|(_, new)| new.clone());
            Term::Var(renamed.unwrap_or_else(|| name.clone()), sort.clone())
        }
        Term::Apply(n, args) => Term::Apply(n.clone(), args.iter().map(|a| rename_term(a, scope)).collect()),
        Term::Arith(op, a, b) => Term::Arith(*op, Box::new(rename_term(a, scope)), Box::new(rename_term(b, scope))),
        Term::Num(_) | Term::Str(_) => t.clone(),
    }
}

fn structural_hash(phi: &Formula) -> u64 {
    let mut h = DefaultHasher::new();
    phi.hash(&mut h);
    h.finish()
}

/// Flattens nested operands of the same connective and sorts them.
fn assemble(conj: bool, items: Vec<Formula>) -> Formula {
    let mut flat = Vec::with_capacity(items.len());
    for item in items {
        match item {
            Formula::And(xs) if conj => flat.extend(xs),
            Formula::Or(xs) if !conj => flat.extend(xs),
            other => flat.push(other),
        }
    }
    flat.sort_by_cached_key(|f| (structural_hash(f), f.clone()));
    match flat.len() {
        0 if conj => Formula::True,
        0 => Formula::False,
        1 => flat.pop().unwrap(),
        _ if conj => Formula::And(flat),
        _ => Formula::Or(flat),
    }
}

fn quantify(universal: bool, var: &str, sort: &Sort, body: Formula) -> Formula {
    match body {
        Formula::And(parts) if universal => {
            assemble(true, parts.into_iter().map(|p| quantify(true, var, sort, p)).collect())
        }
        Formula::Or(parts) if !universal => {
            assemble(false, parts.into_iter().map(|p| quantify(false, var, sort, p)).collect())
        }
        body if universal => Formula::forall(var, sort.clone(), body),
        body => Formula::exists(var, sort.clone(), body),
    }
}

fn simplify(phi: Formula) -> Formula {
    match phi {
        Formula::Not(inner) => match simplify(*inner) {
            Formula::Not(x) => *x,
            other => Formula::not(other),
        },
        Formula::And(xs) => assemble(true, xs.into_iter().map(simplify).collect()),
        Formula::Or(xs) => assemble(false, xs.into_iter().map(simplify).collect()),
        Formula::Implies(a, b) => Formula::implies(simplify(*a), simplify(*b)),
        Formula::Iff(a, b) => Formula::iff(simplify(*a), simplify(*b)),
        Formula::Forall(v, s, body) => quantify(true, &v, &s, simplify(*body)),
        Formula::Exists(v, s, body) => quantify(false, &v, &s, simplify(*body)),
        atom => atom,
    }
}
