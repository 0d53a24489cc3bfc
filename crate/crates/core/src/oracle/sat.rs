//! Tseitin encoding of ground formulas plus a small DPLL search.

use alloc::vec::Vec;

use super::ground::Ground;
use super::{Budget, OracleError};

type Lit = i64;

fn var_of(l: Lit) -> usize {
    (l.unsigned_abs() - 1) as usize
}

fn pos(var: usize) -> Lit {
    var as Lit + 1
}

pub(crate) struct Cnf {
    pub clauses: Vec<Vec<Lit>>,
    pub vars: usize,
    /// Variables below this index are ground atoms; the rest are auxiliary.
    pub atoms: usize,
    trivially_false: bool,
}

impl Cnf {
    pub fn new(atoms: usize) -> Self {
        Cnf { clauses: Vec::new(), vars: atoms, atoms, trivially_false: false }
    }

    pub fn assert(&mut self, g: &Ground) {
        match g {
            Ground::Const(true) => {}
            Ground::Const(false) => self.trivially_false = true,
            Ground::And(parts) => parts.iter().for_each(|p| self.assert(p)),
            Ground::Or(parts) => {
                let clause = parts.iter().map(|p| self.lit(p)).collect();
                self.clauses.push(clause);
            }
            other => {
                let l = self.lit(other);
                self.clauses.push(alloc::vec![l]);
            }
        }
    }

    fn fresh(&mut self) -> Lit {
        self.vars += 1;
        pos(self.vars - 1)
    }

    fn lit(&mut self, g: &Ground) -> Lit {
        match g {
            Ground::Atom(i) => pos(*i),
            Ground::Not(inner) => -self.lit(inner),
            Ground::Const(b) => {
                // constants are folded during grounding except at the root
                let v = self.fresh();
                self.clauses.push(alloc::vec![if *b { v } else { -v }]);
                v
            }
            Ground::And(parts) => {
                let ls: Vec<Lit> = parts.iter().map(|p| self.lit(p)).collect();
                let v = self.fresh();
                let mut back = alloc::vec![v];
                for &l in &ls {
                    self.clauses.push(alloc::vec![-v, l]);
                    back.push(-l);
                }
                self.clauses.push(back);
                v
            }
            Ground::Or(parts) => {
                let ls: Vec<Lit> = parts.iter().map(|p| self.lit(p)).collect();
                let v = self.fresh();
                let mut fwd = alloc::vec![-v];
                for &l in &ls {
                    self.clauses.push(alloc::vec![v, -l]);
                    fwd.push(l);
                }
                self.clauses.push(fwd);
                v
            }
            Ground::Iff(a, b) => {
                let (a, b) = (self.lit(a), self.lit(b));
                let v = self.fresh();
                self.clauses.push(alloc::vec![-v, -a, b]);
                self.clauses.push(alloc::vec![-v, a, -b]);
                self.clauses.push(alloc::vec![v, a, b]);
                self.clauses.push(alloc::vec![v, -a, -b]);
                v
            }
        }
    }

    /// Returns a satisfying assignment of the atom variables, if any.
    pub fn solve(&self, budget: &mut Budget) -> Result<Option<Vec<bool>>, OracleError> {
        if self.trivially_false || self.clauses.iter().any(|c| c.is_empty()) {
            return Ok(None);
        }
        let Some(mut s) = Solver::new(self) else {
            return Ok(None);
        };
        // (trail length before the decision, variable, second branch taken)
        let mut decisions: Vec<(usize, usize, bool)> = Vec::new();
        let mut next_var = 0;
        loop {
            if s.propagate() {
                while next_var < s.assign.len() && s.assign[next_var].is_some() {
                    next_var += 1;
                }
                if next_var == s.assign.len() {
                    let atoms = s.assign[..self.atoms].iter().map(|v| v.unwrap_or(false)).collect();
                    return Ok(Some(atoms));
                }
                budget.tick()?;
                decisions.push((s.trail.len(), next_var, false));
                s.enqueue(-pos(next_var));
                continue;
            }
            loop {
                let Some((len, var, second)) = decisions.pop() else {
                    return Ok(None);
                };
                s.undo(len);
                next_var = next_var.min(var);
                if !second {
                    budget.tick()?;
                    decisions.push((len, var, true));
                    s.enqueue(pos(var));
                    break;
                }
            }
        }
    }
}

fn slot(l: Lit) -> usize {
    2 * var_of(l) + usize::from(l < 0)
}

fn value(assign: &[Option<bool>], l: Lit) -> Option<bool> {
    assign[var_of(l)].map(|b| if l > 0 { b } else { !b })
}

/// DPLL state with two watched literals per clause.
struct Solver {
    clauses: Vec<Vec<Lit>>,
    watches: Vec<Vec<usize>>,
    assign: Vec<Option<bool>>,
    trail: Vec<Lit>,
    head: usize,
}

impl Solver {
    /// None when the unit clauses already conflict.
    fn new(cnf: &Cnf) -> Option<Self> {
        let mut s = Solver {
            clauses: Vec::new(),
            watches: alloc::vec![Vec::new(); 2 * cnf.vars],
            assign: alloc::vec![None; cnf.vars],
            trail: Vec::new(),
            head: 0,
        };
        for clause in &cnf.clauses {
            let mut c = clause.clone();
            c.sort_unstable();
            c.dedup();
            if c.windows(2).any(|w| w[0] == -w[1]) || c.iter().any(|l| c.contains(&-l)) {
                continue;
            }
            if c.len() == 1 {
                if !s.enqueue(c[0]) {
                    return None;
                }
                continue;
            }
            let ci = s.clauses.len();
            s.watches[slot(c[0])].push(ci);
            s.watches[slot(c[1])].push(ci);
            s.clauses.push(c);
        }
        Some(s)
    }

    fn enqueue(&mut self, l: Lit) -> bool {
        match value(&self.assign, l) {
            Some(b) => b,
            None => {
                self.assign[var_of(l)] = Some(l > 0);
                self.trail.push(l);
                true
            }
        }
    }

    fn undo(&mut self, len: usize) {
        while self.trail.len() > len {
            let l = self.trail.pop().unwrap();
            self.assign[var_of(l)] = None;
        }
        self.head = self.head.min(len);
    }

    /// Unit propagation to a fixed point. False on conflict.
    fn propagate(&mut self) -> bool {
        while self.head < self.trail.len() {
            let falsified = -self.trail[self.head];
            self.head += 1;
            let watching = core::mem::take(&mut self.watches[slot(falsified)]);
            let mut keep = Vec::with_capacity(watching.len());
            let mut conflict = false;
            for (k, &ci) in watching.iter().enumerate() {
                if conflict {
                    keep.extend_from_slice(&watching[k..]);
                    break;
                }
                let c = &mut self.clauses[ci];
                if c[0] == falsified {
                    c.swap(0, 1);
                }
                if value(&self.assign, c[0]) == Some(true) {
                    keep.push(ci);
                    continue;
                }
                let replacement = (2..c.len()).find(|&j| value(&self.assign, c[j]) != Some(false));
                if let Some(j) = replacement {
                    c.swap(1, j);
                    let w = slot(c[1]);
                    self.watches[w].push(ci);
                    continue;
                }
                keep.push(ci);
                let unit = c[0];
                if !self.enqueue(unit) {
                    conflict = true;
                }
            }
            self.watches[slot(falsified)] = keep;
            if conflict {
                return false;
            }
        }
        true
    }
}
