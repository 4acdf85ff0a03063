//! Satisfiability of a conjunction of literals.
//!
//! Numeric literals become difference constraints decided by negative-cycle
//! detection; enum literals are decided by congruence closure plus a finite
//! colouring of the classes; array reads are kept functionally consistent by
//! lazily splitting on index equality for clashing read pairs.

use std::collections::{BTreeMap, HashMap};

use crate::logic::{Formula, LogicError, Rel, Signature, Sort, Term};

use super::Model;

type Node = usize;
const ZERO: Node = 0;

/// `x_hi - x_lo <= w`
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Edge {
    hi: Node,
    lo: Node,
    w: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ReadVal {
    Num(Node),
    Enum(Node),
}

#[derive(Debug, Clone)]
struct ReadInfo {
    array: String,
    idx: (Node, i64),
    val: ReadVal,
}

/// Literals compiled into constraint form.
#[derive(Debug, Default)]
pub(crate) struct Compiled {
    num_terms: Vec<Term>,
    num_is_index: Vec<bool>,
    num_ids: HashMap<Term, Node>,
    edges: Vec<Edge>,
    num_ne: Vec<((Node, i64), (Node, i64))>,
    en_terms: Vec<Term>,
    en_sort: Vec<String>,
    en_const: Vec<Option<u32>>,
    en_ids: HashMap<Term, Node>,
    en_eq: Vec<(Node, Node)>,
    en_ne: Vec<(Node, Node)>,
    reads: Vec<ReadInfo>,
    simple_order: bool,
}

impl Compiled {
    fn new() -> Self {
        let mut c = Compiled {
            simple_order: true,
            ..Default::default()
        };
        c.num_terms.push(Term::Int(0));
        c.num_is_index.push(false);
        c
    }

    fn num_node(&mut self, t: &Term) -> Result<(Node, i64), LogicError> {
        match t {
            Term::Int(n) => {
                self.simple_order = false;
                Ok((ZERO, *n))
            }
            Term::Offset(b, k) => {
                self.simple_order = false;
                let (n, j) = self.num_node(b)?;
                Ok((n, j + k))
            }
            Term::Var(v) if v.sort.is_numeric() => Ok((self.intern_num(t, v.sort == Sort::Index), 0)),
            Term::Read(a, i) if matches!(**a, Term::Var(_)) => {
                let key = Term::read((**a).clone(), (**i).clone());
                if let Some(&n) = self.num_ids.get(&key) {
                    return Ok((n, 0));
                }
                let idx = self.num_node(i)?;
                let n = self.intern_num(&key, false);
                self.add_read(a, idx, ReadVal::Num(n));
                Ok((n, 0))
            }
            _ => Err(LogicError::UnsupportedTerm(t.to_string())),
        }
    }

    fn intern_num(&mut self, t: &Term, is_index: bool) -> Node {
        if let Some(&n) = self.num_ids.get(t) {
            return n;
        }
        let n = self.num_terms.len();
        self.num_terms.push(t.clone());
        self.num_is_index.push(is_index);
        self.num_ids.insert(t.clone(), n);
        if is_index {
            // indexes are naturals
            self.edges.push(Edge { hi: ZERO, lo: n, w: 0 });
        }
        n
    }

    fn add_read(&mut self, a: &Term, idx: (Node, i64), val: ReadVal) {
        let Term::Var(av) = a else { unreachable!() };
        // subscripts range over the naturals
        self.edges.push(Edge {
            hi: ZERO,
            lo: idx.0,
            w: idx.1,
        });
        self.reads.push(ReadInfo {
            array: av.name.clone(),
            idx,
            val,
        });
    }

    fn en_node(&mut self, t: &Term) -> Result<Node, LogicError> {
        let key = match t {
            Term::Read(a, i) if matches!(**a, Term::Var(_)) => Term::read((**a).clone(), (**i).clone()),
            Term::Var(_) | Term::EnumConst { .. } => t.clone(),
            _ => return Err(LogicError::UnsupportedTerm(t.to_string())),
        };
        if let Some(&n) = self.en_ids.get(&key) {
            return Ok(n);
        }
        let Sort::Enum(sort) = t.sort() else {
            return Err(LogicError::UnsupportedTerm(t.to_string()));
        };
        let n = self.en_terms.len();
        self.en_terms.push(key.clone());
        self.en_sort.push(sort);
        self.en_const.push(match t {
            Term::EnumConst { value, .. } => Some(*value),
            _ => None,
        });
        self.en_ids.insert(key, n);
        if let Term::Read(a, i) = t {
            let idx = self.num_node(i)?;
            self.add_read(a, idx, ReadVal::Enum(n));
        }
        Ok(n)
    }

    fn add_literal(&mut self, lit: &Formula) -> Result<(), LogicError> {
        let Formula::Atom(rel, l, r) = lit else {
            return Err(LogicError::UnsupportedTerm(lit.to_string()));
        };
        if let Sort::Enum(_) = l.sort() {
            let (a, b) = (self.en_node(l)?, self.en_node(r)?);
            match rel {
                Rel::Eq => self.en_eq.push((a, b)),
                Rel::Ne => self.en_ne.push((a, b)),
                _ => return Err(LogicError::UnsupportedTerm(lit.to_string())),
            }
            return Ok(());
        }
        let (x, kx) = self.num_node(l)?;
        let (y, ky) = self.num_node(r)?;
        // x + kx  rel  y + ky
        match rel {
            Rel::Le => self.edges.push(Edge { hi: x, lo: y, w: ky - kx }),
            Rel::Lt => self.edges.push(Edge { hi: x, lo: y, w: ky - kx - 1 }),
            Rel::Eq => {
                self.edges.push(Edge { hi: x, lo: y, w: ky - kx });
                self.edges.push(Edge { hi: y, lo: x, w: kx - ky });
            }
            Rel::Ne => self.num_ne.push(((x, kx), (y, ky))),
        }
        Ok(())
    }
}

pub(crate) fn compile(lits: &[Formula]) -> Result<Compiled, LogicError> {
    let mut c = Compiled::new();
    for l in lits {
        c.add_literal(l)?;
    }
    Ok(c)
}

/// Decisions layered on top of a compiled literal set during search.
#[derive(Debug, Clone, Default)]
struct Extra {
    edges: Vec<Edge>,
    en_eq: Vec<(Node, Node)>,
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind((0..n).collect())
    }
    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut c = x;
        while self.0[c] != r {
            let next = self.0[c];
            self.0[c] = r;
            c = next;
        }
        r
    }
    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Bellman-Ford from a virtual source; `None` on a negative cycle.
fn difference_model(n: usize, base: &[Edge], extra: &[Edge]) -> Option<Vec<i64>> {
    let mut dist = vec![0i64; n];
    for round in 0..=n {
        let mut changed = false;
        for e in base.iter().chain(extra) {
            let cand = dist[e.lo] + e.w;
            if cand < dist[e.hi] {
                dist[e.hi] = cand;
                changed = true;
            }
        }
        if !changed {
            let z = dist[ZERO];
            return Some(dist.into_iter().map(|d| d - z).collect());
        }
        if round == n {
            return None;
        }
    }
    None
}

fn colour(c: &Compiled, sig: &Signature, extra: &[(Node, Node)]) -> Option<Vec<u32>> {
    let n = c.en_terms.len();
    let mut uf = UnionFind::new(n);
    for &(a, b) in c.en_eq.iter().chain(extra) {
        uf.union(a, b);
    }
    let mut fixed: BTreeMap<usize, u32> = BTreeMap::new();
    for x in 0..n {
        if let Some(v) = c.en_const[x] {
            let r = uf.find(x);
            if let Some(&old) = fixed.get(&r) {
                if old != v {
                    return None;
                }
            }
            fixed.insert(r, v);
        }
    }
    let mut ne: Vec<(usize, usize)> = Vec::new();
    for &(a, b) in &c.en_ne {
        let (ra, rb) = (uf.find(a), uf.find(b));
        if ra == rb {
            return None;
        }
        ne.push((ra, rb));
    }
    let roots: Vec<usize> = (0..n).filter(|&x| uf.find(x) == x).collect();
    let free: Vec<usize> = roots.iter().copied().filter(|r| !fixed.contains_key(r)).collect();
    let mut value: BTreeMap<usize, u32> = fixed.clone();
    for &(a, b) in &ne {
        if let (Some(x), Some(y)) = (fixed.get(&a), fixed.get(&b)) {
            if x == y {
                return None;
            }
        }
    }
    fn assign(
        k: usize,
        free: &[usize],
        sizes: &[u32],
        ne: &[(usize, usize)],
        value: &mut BTreeMap<usize, u32>,
    ) -> bool {
        let Some(&r) = free.get(k) else { return true };
        for v in 0..sizes[k] {
            let clash = ne.iter().any(|&(a, b)| {
                (a == r && value.get(&b) == Some(&v)) || (b == r && value.get(&a) == Some(&v))
            });
            if clash {
                continue;
            }
            value.insert(r, v);
            if assign(k + 1, free, sizes, ne, value) {
                return true;
            }
            value.remove(&r);
        }
        false
    }
    let sizes: Vec<u32> = free.iter().map(|&r| sig.enum_consts(&c.en_sort[r]).len() as u32).collect();
    if !assign(0, &free, &sizes, &ne, &mut value) {
        return None;
    }
    Some((0..n).map(|x| value[&uf.find(x)]).collect())
}

enum Step {
    Sat(Vec<i64>, Vec<u32>),
    Branch(Vec<Extra>),
    Unsat,
}

fn step(c: &Compiled, sig: &Signature, extra: &Extra) -> Step {
    let Some(num) = difference_model(c.num_terms.len(), &c.edges, &extra.edges) else {
        return Step::Unsat;
    };
    let val = |(n, k): (Node, i64)| num[n] + k;
    for &(a, b) in &c.num_ne {
        if val(a) == val(b) {
            // a < b  or  b < a
            let lt = |x: (Node, i64), y: (Node, i64)| Edge { hi: x.0, lo: y.0, w: y.1 - x.1 - 1 };
            let mut e1 = extra.clone();
            e1.edges.push(lt(a, b));
            let mut e2 = extra.clone();
            e2.edges.push(lt(b, a));
            return Step::Branch(vec![e1, e2]);
        }
    }
    let Some(en) = colour(c, sig, &extra.en_eq) else {
        return Step::Unsat;
    };
    for (x, r1) in c.reads.iter().enumerate() {
        for r2 in &c.reads[x + 1..] {
            if r1.array != r2.array || val(r1.idx) != val(r2.idx) {
                continue;
            }
            let same = match (r1.val, r2.val) {
                (ReadVal::Num(a), ReadVal::Num(b)) => num[a] == num[b],
                (ReadVal::Enum(a), ReadVal::Enum(b)) => en[a] == en[b],
                _ => true,
            };
            if same {
                continue;
            }
            let (i1, i2) = (r1.idx, r2.idx);
            let mut eq = extra.clone();
            eq.edges.push(Edge { hi: i1.0, lo: i2.0, w: i2.1 - i1.1 });
            eq.edges.push(Edge { hi: i2.0, lo: i1.0, w: i1.1 - i2.1 });
            match (r1.val, r2.val) {
                (ReadVal::Num(a), ReadVal::Num(b)) => {
                    eq.edges.push(Edge { hi: a, lo: b, w: 0 });
                    eq.edges.push(Edge { hi: b, lo: a, w: 0 });
                }
                (ReadVal::Enum(a), ReadVal::Enum(b)) => eq.en_eq.push((a, b)),
                _ => {}
            }
            let mut lt = extra.clone();
            lt.edges.push(Edge { hi: i1.0, lo: i2.0, w: i2.1 - i1.1 - 1 });
            let mut gt = extra.clone();
            gt.edges.push(Edge { hi: i2.0, lo: i1.0, w: i1.1 - i2.1 - 1 });
            return Step::Branch(vec![eq, lt, gt]);
        }
    }
    Step::Sat(num, en)
}

/// Decides a conjunction of literals, returning a model when satisfiable.
pub(crate) fn solve(c: &Compiled, sig: &Signature) -> Option<Model> {
    let mut stack = vec![Extra::default()];
    while let Some(extra) = stack.pop() {
        match step(c, sig, &extra) {
            Step::Unsat => {}
            Step::Branch(mut bs) => {
                bs.reverse();
                stack.extend(bs);
            }
            Step::Sat(num, en) => return Some(build_model(c, num, en)),
        }
    }
    None
}

fn build_model(c: &Compiled, mut num: Vec<i64>, en: Vec<u32>) -> Model {
    if c.simple_order {
        // only the order of indexes matters: close the gaps
        let mut vals: Vec<i64> = (1..num.len()).filter(|&n| c.num_is_index[n]).map(|n| num[n]).collect();
        for r in &c.reads {
            vals.push(num[r.idx.0] + r.idx.1);
        }
        vals.sort_unstable();
        vals.dedup();
        let rank = |v: i64| vals.binary_search(&v).unwrap() as i64;
        let remapped: Vec<i64> = (0..num.len())
            .map(|n| {
                if n != ZERO && c.num_is_index[n] {
                    rank(num[n])
                } else {
                    num[n]
                }
            })
            .collect();
        // read subscripts in this mode are plain index nodes
        num = remapped;
    }
    let mut m = Model::default();
    let mut max_index = -1i64;
    for n in 1..num.len() {
        if let Term::Var(v) = &c.num_terms[n] {
            if v.sort == Sort::Index {
                max_index = max_index.max(num[n]);
                m.index_vals.insert(v.name.clone(), num[n]);
            } else {
                m.int_vals.insert(v.name.clone(), num[n]);
            }
        }
    }
    for r in &c.reads {
        max_index = max_index.max(num[r.idx.0] + r.idx.1);
    }
    m.domain_size = (max_index + 1).max(1) as usize;
    for (x, t) in c.en_terms.iter().enumerate() {
        if let Term::Var(v) = t {
            m.enum_vals.insert(v.name.clone(), en[x]);
        }
    }
    for r in &c.reads {
        let idx = (num[r.idx.0] + r.idx.1) as usize;
        let v = match r.val {
            ReadVal::Num(n) => num[n],
            ReadVal::Enum(n) => en[n] as i64,
        };
        let table = m.array_vals.entry(r.array.clone()).or_default();
        if table.len() <= idx {
            table.resize(idx + 1, i64::MIN);
        }
        table[idx] = v;
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::Var;

    fn sig() -> Signature {
        let mut sig = Signature::default();
        sig.enums.insert("loc".into(), vec!["I".into(), "R".into(), "W".into(), "C".into()]);
        sig
    }

    #[test]
    fn negative_cycle_is_unsat() {
        let (i, j, k) = (Var::index("i"), Var::index("j"), Var::index("k"));
        let lits = vec![
            Formula::lt(Term::var(&i), Term::var(&j)),
            Formula::lt(Term::var(&j), Term::var(&k)),
            Formula::lt(Term::var(&k), Term::var(&i)),
        ];
        assert!(solve(&compile(&lits).unwrap(), &sig()).is_none());
    }

    #[test]
    fn enum_exhaustion_is_unsat() {
        let sig = sig();
        let x = Var::new("x", Sort::Enum("loc".into()));
        let lits: Vec<_> = ["I", "R", "W", "C"]
            .iter()
            .map(|c| Formula::ne(Term::var(&x), sig.enum_const("loc", c).unwrap()))
            .collect();
        assert!(solve(&compile(&lits).unwrap(), &sig).is_none());
    }

    #[test]
    fn ackermann_conflict_forces_distinct_indexes() {
        let sig = sig();
        let a = Var::new("a", Sort::Array(Box::new(Sort::Enum("loc".into()))));
        let (i, j) = (Var::index("i"), Var::index("j"));
        let rd = |v: &Var| Term::read(Term::var(&a), Term::var(v));
        let lits = vec![
            Formula::eq(rd(&i), sig.enum_const("loc", "C").unwrap()),
            Formula::eq(rd(&j), sig.enum_const("loc", "I").unwrap()),
        ];
        let m = solve(&compile(&lits).unwrap(), &sig).unwrap();
        assert_ne!(m.index_vals["i"], m.index_vals["j"]);
        let mut more = lits.clone();
        more.push(Formula::eq(Term::var(&i), Term::var(&j)));
        assert!(solve(&compile(&more).unwrap(), &sig).is_none());
    }
}
