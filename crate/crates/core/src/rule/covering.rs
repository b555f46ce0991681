use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoveringKind {
    #[default]
    Contingency,
    /// Only `p` and `P` carry information; `n = N = 0`.
    Survival,
}

/// The `(p, n, P, N)` tuple every quality measure and test is evaluated on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Covering {
    pub p: usize,
    pub n: usize,
    #[serde(rename = "P")]
    pub total_pos: usize,
    #[serde(rename = "N")]
    pub total_neg: usize,
    #[serde(default)]
    pub kind: CoveringKind,
}

impl Covering {
    pub fn new(p: usize, n: usize, total_pos: usize, total_neg: usize) -> Self {
        debug_assert!(p <= total_pos && n <= total_neg);
        Covering {
            p,
            n,
            total_pos,
            total_neg,
            kind: CoveringKind::Contingency,
        }
    }

    pub fn survival(covered: usize, total: usize) -> Self {
        Covering {
            p: covered,
            n: 0,
            total_pos: total,
            total_neg: 0,
            kind: CoveringKind::Survival,
        }
    }

    pub fn covered(&self) -> usize {
        self.p + self.n
    }

    pub fn total(&self) -> usize {
        self.total_pos + self.total_neg
    }

    pub fn is_survival(&self) -> bool {
        self.kind == CoveringKind::Survival
    }
}
