//! Solver-facing representation of a mixed-integer linear program.
//!
//! Builders across the crate append variables and rows to a shared
//! [`MixedIntegerProgram`]; the program is then handed to one of the
//! backends in [`crate::milp`]. Rows are stored sparsely, one coefficient
//! list per row.

use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RowId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::Le => "<=",
            Relation::Eq => "=",
            Relation::Ge => ">=",
        })
    }
}

#[derive(Debug, Clone)]
pub struct Variable {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
    pub integer: bool,
    pub cost: f64,
}

#[derive(Debug, Clone)]
pub struct Row {
    pub name: String,
    pub coeffs: Vec<(VarId, f64)>,
    pub relation: Relation,
    pub rhs: f64,
}

impl Row {
    pub fn activity(&self, x: &[f64]) -> f64 {
        self.coeffs.iter().map(|&(v, a)| a * x[v.0]).sum()
    }

    /// Signed violation: positive means the row is violated by that amount.
    pub fn violation(&self, x: &[f64]) -> f64 {
        let act = self.activity(x);
        match self.relation {
            Relation::Le => act - self.rhs,
            Relation::Ge => self.rhs - act,
            Relation::Eq => (act - self.rhs).abs(),
        }
    }
}

/// Linear expression `Σ a·x + constant`.
#[derive(Debug, Clone, Default)]
pub struct LinExpr {
    pub terms: Vec<(VarId, f64)>,
    pub constant: f64,
}

impl LinExpr {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn constant(c: f64) -> Self {
        LinExpr {
            terms: Vec::new(),
            constant: c,
        }
    }

    pub fn term(v: VarId, a: f64) -> Self {
        LinExpr {
            terms: vec![(v, a)],
            constant: 0.0,
        }
    }

    pub fn add(&mut self, v: VarId, a: f64) -> &mut Self {
        if a != 0.0 {
            self.terms.push((v, a));
        }
        self
    }

    pub fn add_constant(&mut self, c: f64) -> &mut Self {
        self.constant += c;
        self
    }

    pub fn add_expr(&mut self, other: &LinExpr, scale: f64) -> &mut Self {
        for &(v, a) in &other.terms {
            self.add(v, a * scale);
        }
        self.constant += other.constant * scale;
        self
    }

    pub fn with(mut self, v: VarId, a: f64) -> Self {
        self.add(v, a);
        self
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.constant + self.terms.iter().map(|&(v, a)| a * x[v.0]).sum::<f64>()
    }

    /// Merge duplicate variables and drop zero coefficients. Ordering follows
    /// first appearance so that programs stay byte-identical run to run.
    pub fn compact(&self) -> Vec<(VarId, f64)> {
        let mut out: Vec<(VarId, f64)> = Vec::with_capacity(self.terms.len());
        for &(v, a) in &self.terms {
            if let Some(slot) = out.iter_mut().find(|(w, _)| *w == v) {
                slot.1 += a;
            } else {
                out.push((v, a));
            }
        }
        out.retain(|&(_, a)| a != 0.0);
        out
    }
}

#[derive(Debug, Clone)]
pub struct MixedIntegerProgram {
    pub sense: Sense,
    pub vars: Vec<Variable>,
    pub rows: Vec<Row>,
    pub objective_offset: f64,
    /// Diagonal convex quadratic objective terms `½·q·x²` (HiGHS backend only).
    pub quadratic: Vec<(VarId, f64)>,
}

impl MixedIntegerProgram {
    pub fn new(sense: Sense) -> Self {
        MixedIntegerProgram {
            sense,
            vars: Vec::new(),
            rows: Vec::new(),
            objective_offset: 0.0,
            quadratic: Vec::new(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn num_integer(&self) -> usize {
        self.vars.iter().filter(|v| v.integer).count()
    }

    pub fn is_lp(&self) -> bool {
        self.vars.iter().all(|v| !v.integer)
    }

    pub fn add_var(&mut self, name: impl Into<String>, lower: f64, upper: f64) -> VarId {
        self.vars.push(Variable {
            name: name.into(),
            lower,
            upper,
            integer: false,
            cost: 0.0,
        });
        VarId(self.vars.len() - 1)
    }

    pub fn add_binary(&mut self, name: impl Into<String>) -> VarId {
        self.add_integer(name, 0.0, 1.0)
    }

    pub fn add_integer(&mut self, name: impl Into<String>, lower: f64, upper: f64) -> VarId {
        let v = self.add_var(name, lower, upper);
        self.vars[v.0].integer = true;
        v
    }

    pub fn set_cost(&mut self, v: VarId, cost: f64) {
        self.vars[v.0].cost = cost;
    }

    pub fn add_cost(&mut self, v: VarId, cost: f64) {
        self.vars[v.0].cost += cost;
    }

    pub fn add_objective(&mut self, expr: &LinExpr, scale: f64) {
        for &(v, a) in &expr.terms {
            self.add_cost(v, a * scale);
        }
        self.objective_offset += expr.constant * scale;
    }

    pub fn set_bounds(&mut self, v: VarId, lower: f64, upper: f64) {
        self.vars[v.0].lower = lower;
        self.vars[v.0].upper = upper;
    }

    pub fn fix(&mut self, v: VarId, value: f64) {
        self.set_bounds(v, value, value);
    }

    pub fn set_integer(&mut self, v: VarId, integer: bool) {
        self.vars[v.0].integer = integer;
    }

    pub fn add_row(
        &mut self,
        name: impl Into<String>,
        coeffs: Vec<(VarId, f64)>,
        relation: Relation,
        rhs: f64,
    ) -> RowId {
        self.rows.push(Row {
            name: name.into(),
            coeffs,
            relation,
            rhs,
        });
        RowId(self.rows.len() - 1)
    }

    /// Adds `lhs (rel) rhs`, moving the constants of both sides to the right.
    pub fn add_constraint(
        &mut self,
        name: impl Into<String>,
        lhs: &LinExpr,
        relation: Relation,
        rhs: &LinExpr,
    ) -> RowId {
        let mut e = lhs.clone();
        e.add_expr(rhs, -1.0);
        let rhs_value = -e.constant;
        self.add_row(name, e.compact(), relation, rhs_value)
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        let lin: f64 = self.vars.iter().zip(x).map(|(v, xi)| v.cost * xi).sum();
        let quad: f64 = self
            .quadratic
            .iter()
            .map(|&(v, q)| 0.5 * q * x[v.0] * x[v.0])
            .sum();
        self.objective_offset + lin + quad
    }

    /// Largest bound or row violation of `x`, plus integrality violation for
    /// integer columns.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for (v, &xi) in self.vars.iter().zip(x) {
            worst = worst.max(v.lower - xi).max(xi - v.upper);
            if v.integer {
                worst = worst.max((xi - xi.round()).abs());
            }
        }
        for r in &self.rows {
            worst = worst.max(r.violation(x));
        }
        worst
    }

    pub fn validate(&self) -> Result<()> {
        for (j, v) in self.vars.iter().enumerate() {
            if v.lower.is_nan() || v.upper.is_nan() || !v.cost.is_finite() {
                return Err(Error::MalformedProgram(format!(
                    "variable {j} ({}) has non-finite data",
                    v.name
                )));
            }
            if v.lower > v.upper + 1e-12 {
                return Err(Error::MalformedProgram(format!(
                    "variable {} has lower {} > upper {}",
                    v.name, v.lower, v.upper
                )));
            }
            if v.integer && (!v.lower.is_finite() || !v.upper.is_finite()) {
                return Err(Error::MalformedProgram(format!(
                    "integer variable {} must have finite bounds",
                    v.name
                )));
            }
        }
        for r in &self.rows {
            if !r.rhs.is_finite() {
                return Err(Error::MalformedProgram(format!("row {} rhs not finite", r.name)));
            }
            for &(v, a) in &r.coeffs {
                if v.0 >= self.vars.len() {
                    return Err(Error::MalformedProgram(format!(
                        "row {} references missing column {}",
                        r.name, v.0
                    )));
                }
                if !a.is_finite() {
                    return Err(Error::MalformedProgram(format!(
                        "row {} has non-finite coefficient",
                        r.name
                    )));
                }
            }
        }
        for &(v, q) in &self.quadratic {
            if v.0 >= self.vars.len() || !(q >= 0.0) {
                return Err(Error::MalformedProgram(
                    "quadratic term must reference a column with q ≥ 0".into(),
                ));
            }
        }
        Ok(())
    }
}
