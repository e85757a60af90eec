//! Validation reports: named identities with their exact residuals.

use crate::exactlin::forms::FormOp;
use crate::exactlin::{GradedMap, Mat, Ring, Scalar};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Check {
    pub name: String,
    /// Nonzero residual entries `(row, col, value)`.
    pub residual: Vec<(usize, usize, String)>,
    pub note: Option<String>,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.residual.is_empty() && self.note.is_none()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Report {
    pub checks: Vec<Check>,
}

impl Report {
    pub fn new() -> Self {
        Report::default()
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed())
    }

    pub fn residual<R: Ring>(&mut self, name: &str, m: &Mat<R>) {
        let residual = m.nonzero_entries().into_iter().map(|(r, c, v)| (r, c, v.render())).collect();
        self.checks.push(Check { name: name.to_string(), residual, note: None });
    }

    pub fn map_residual<R: Ring>(&mut self, name: &str, m: &GradedMap<R>) {
        self.residual(name, &m.mat);
    }

    /// One check per nonzero form component, named `name[dt…]`; a single
    /// passing check when the form vanishes.
    pub fn form_residual<C: Scalar>(&mut self, name: &str, f: &FormOp<C>) {
        let mut any = false;
        for (mask, m) in &f.terms {
            if m.is_zero() {
                continue;
            }
            any = true;
            let bits: Vec<String> = (0..64).filter(|b| mask >> b & 1 == 1).map(|b| b.to_string()).collect();
            self.residual(&format!("{}[dt{{{}}}]", name, bits.join(",")), &m.mat);
        }
        if !any {
            self.pass(name);
        }
    }

    /// `lhs - rhs` as a residual.
    pub fn equal<R: Ring>(&mut self, name: &str, lhs: &Mat<R>, rhs: &Mat<R>) {
        if lhs.rows != rhs.rows || lhs.cols != rhs.cols {
            self.fail(name, &format!("shape {}x{} vs {}x{}", lhs.rows, lhs.cols, rhs.rows, rhs.cols));
            return;
        }
        self.residual(name, &(lhs - rhs));
    }

    pub fn fail(&mut self, name: &str, why: &str) {
        self.checks.push(Check { name: name.to_string(), residual: Vec::new(), note: Some(why.to_string()) });
    }

    pub fn pass(&mut self, name: &str) {
        self.checks.push(Check { name: name.to_string(), residual: Vec::new(), note: None });
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failing(&self) -> Vec<&str> {
        self.checks.iter().filter(|c| !c.passed()).map(|c| c.name.as_str()).collect()
    }

    pub fn extend(&mut self, prefix: &str, other: Report) {
        for mut c in other.checks {
            c.name = format!("{}{}", prefix, c.name);
            self.checks.push(c);
        }
    }
}
