//! Cut-master problems: minimize `ν` subject to `ν ≥ c_k + g_kᵀz`, antichain
//! (path-clique) rows, an optional attribute budget, and `z ∈ {0,1}`.

mod antichain;
mod bnb;
mod simplex;

use std::fmt::Write as _;

pub use antichain::{children_of, max_weight_antichain};
pub use bnb::{bnb_solve, BnBConfig, BnbResult, BnbStatus};
pub use simplex::{lp_solve, LpSolution, LpStatus};

use crate::error::{Error, Result};

/// One affine lower bound `ν ≥ intercept + gradientᵀ z`.
#[derive(Debug, Clone, PartialEq)]
pub struct MasterCut {
    pub intercept: f64,
    pub gradient: Vec<f64>,
}

impl MasterCut {
    pub fn eval(&self, z: &[f64]) -> f64 {
        self.intercept + self.gradient.iter().zip(z).map(|(g, x)| g * x).sum::<f64>()
    }

    pub fn eval_binary(&self, z: &[bool]) -> f64 {
        self.intercept
            + self
                .gradient
                .iter()
                .zip(z)
                .filter(|(_, &on)| on)
                .map(|(g, _)| g)
                .sum::<f64>()
    }
}

#[derive(Debug, Clone)]
pub struct MasterProblem {
    parent: Vec<Option<usize>>,
    attrs: Vec<u32>,
    budget: Option<u64>,
    cuts: Vec<MasterCut>,
    nu_floor: Option<f64>,
}

impl MasterProblem {
    /// `parent[i]` is the nearest ancestor of variable `i` inside the problem;
    /// parents must precede children.
    pub fn new(parent: Vec<Option<usize>>) -> Result<Self> {
        for (i, p) in parent.iter().enumerate() {
            if let Some(p) = *p {
                if p >= i {
                    return Err(Error::InvalidArgument(format!(
                        "variable {i} has parent {p}; parents must come first"
                    )));
                }
            }
        }
        let n = parent.len();
        Ok(Self {
            parent,
            attrs: vec![1; n],
            budget: None,
            cuts: Vec::new(),
            nu_floor: None,
        })
    }

    pub fn with_budget(mut self, attrs: Vec<u32>, budget: u64) -> Result<Self> {
        if attrs.len() != self.num_vars() {
            return Err(Error::Dimension {
                expected: self.num_vars(),
                found: attrs.len(),
            });
        }
        self.attrs = attrs;
        self.budget = Some(budget);
        Ok(self)
    }

    /// Extra valid lower bound on `ν`.
    pub fn with_floor(mut self, floor: f64) -> Self {
        self.nu_floor = Some(floor);
        self
    }

    pub fn add_cut(&mut self, intercept: f64, gradient: Vec<f64>) -> Result<()> {
        if gradient.len() != self.num_vars() {
            return Err(Error::Dimension {
                expected: self.num_vars(),
                found: gradient.len(),
            });
        }
        if !intercept.is_finite() || gradient.iter().any(|g| !g.is_finite()) {
            return Err(Error::InvalidArgument("non-finite cut".into()));
        }
        self.cuts.push(MasterCut {
            intercept,
            gradient,
        });
        Ok(())
    }

    pub fn num_vars(&self) -> usize {
        self.parent.len()
    }

    pub fn num_cuts(&self) -> usize {
        self.cuts.len()
    }

    pub fn cuts(&self) -> &[MasterCut] {
        &self.cuts
    }

    pub fn parent(&self) -> &[Option<usize>] {
        &self.parent
    }

    pub fn attrs(&self) -> &[u32] {
        &self.attrs
    }

    pub fn budget(&self) -> Option<u64> {
        self.budget
    }

    pub fn floor(&self) -> Option<f64> {
        self.nu_floor
    }

    /// Cut model value `max_k (c_k + g_kᵀ z)` at a binary point, respecting the floor.
    pub fn model_value(&self, z: &[bool]) -> f64 {
        let v = self
            .cuts
            .iter()
            .map(|c| c.eval_binary(z))
            .fold(f64::NEG_INFINITY, f64::max);
        match self.nu_floor {
            Some(f) => v.max(f),
            None => v,
        }
    }

    /// Lower bound on `ν` over the unit box implied by the cuts and the floor.
    pub fn implied_floor(&self) -> f64 {
        let implied = self
            .cuts
            .iter()
            .map(|c| c.intercept + c.gradient.iter().map(|g| g.min(0.0)).sum::<f64>())
            .fold(f64::NEG_INFINITY, f64::max);
        match self.nu_floor {
            Some(f) => implied.max(f),
            None => implied,
        }
    }

    /// Root-to-leaf chains of the forest; at most one member of each may be 1.
    pub fn cliques(&self) -> Vec<Vec<usize>> {
        let children = children_of(&self.parent);
        let mut out = Vec::new();
        for i in 0..self.num_vars() {
            if !children[i].is_empty() || self.parent[i].is_none() {
                continue;
            }
            let mut chain = vec![i];
            let mut cur = self.parent[i];
            while let Some(p) = cur {
                chain.push(p);
                cur = self.parent[p];
            }
            chain.reverse();
            out.push(chain);
        }
        out
    }

    pub fn attribute_sum(&self, z: &[bool]) -> u64 {
        z.iter()
            .zip(&self.attrs)
            .filter(|(&on, _)| on)
            .map(|(_, &a)| u64::from(a))
            .sum()
    }

    /// Antichain and budget feasibility of a binary point.
    pub fn is_feasible(&self, z: &[bool]) -> bool {
        if z.len() != self.num_vars() {
            return false;
        }
        for i in 0..z.len() {
            if !z[i] {
                continue;
            }
            let mut cur = self.parent[i];
            while let Some(p) = cur {
                if z[p] {
                    return false;
                }
                cur = self.parent[p];
            }
        }
        self.budget.map_or(true, |k| self.attribute_sum(z) <= k)
    }

    /// CPLEX-LP-style text for cross-checking with external solvers.
    pub fn lp_format(&self) -> String {
        let mut s = String::from("Minimize\n obj: nu\nSubject To\n");
        for (k, c) in self.cuts.iter().enumerate() {
            let _ = write!(s, " cut{k}: nu");
            for (i, g) in c.gradient.iter().enumerate() {
                if *g != 0.0 {
                    let _ = write!(s, " {} {} z{i}", if *g > 0.0 { "-" } else { "+" }, g.abs());
                }
            }
            let _ = writeln!(s, " >= {}", c.intercept);
        }
        for (k, clique) in self.cliques().iter().enumerate() {
            let terms: Vec<String> = clique.iter().map(|i| format!("z{i}")).collect();
            let _ = writeln!(s, " path{k}: {} <= 1", terms.join(" + "));
        }
        if let Some(k) = self.budget {
            let terms: Vec<String> = self
                .attrs
                .iter()
                .enumerate()
                .filter(|(_, &a)| a > 0)
                .map(|(i, a)| format!("{a} z{i}"))
                .collect();
            if !terms.is_empty() {
                let _ = writeln!(s, " budget: {} <= {k}", terms.join(" + "));
            }
        }
        s.push_str("Bounds\n nu free\n");
        if let Some(f) = self.nu_floor {
            let _ = writeln!(s, " nu >= {f}");
        }
        s.push_str("Binary\n");
        for i in 0..self.num_vars() {
            let _ = writeln!(s, " z{i}");
        }
        s.push_str("End\n");
        s
    }
}
