//! Bounded partitions `m >= l_1 >= ... >= l_n >= 0` and their elementary moves.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A partition stored densely as `n` weakly decreasing parts.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Partition(Vec<u32>);

impl Partition {
    /// Checks weak decrease; the bound `m` is checked by [`Lattice::rank`].
    pub fn new(parts: Vec<u32>) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::Domain("partition must have at least one part".into()));
        }
        if parts.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::Domain(format!("parts {parts:?} are not weakly decreasing")));
        }
        Ok(Partition(parts))
    }

    pub fn zero(n: usize) -> Self {
        Partition(vec![0; n])
    }

    pub fn parts(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn weight(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&x| x == 0)
    }

    /// `self + eps * e_j` without any admissibility check; `None` if a part would go negative.
    pub fn shifted(&self, step: Step) -> Option<Partition> {
        let mut parts = self.0.clone();
        let x = &mut parts[step.part];
        *x = if step.raise { x.checked_add(1)? } else { x.checked_sub(1)? };
        Some(Partition(parts))
    }

    /// The column `(1^k)` with `n` parts.
    pub fn column(n: usize, k: usize) -> Self {
        Partition((0..n).map(|j| u32::from(j < k)).collect())
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, ")")
    }
}

impl std::ops::Index<usize> for Partition {
    type Output = u32;
    fn index(&self, j: usize) -> &u32 {
        &self.0[j]
    }
}

/// An elementary move `lambda -> lambda +/- e_j`; `part` is the 0-based index `j - 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Step {
    pub part: usize,
    pub raise: bool,
}

impl Step {
    pub fn up(part: usize) -> Self {
        Step { part, raise: true }
    }

    pub fn down(part: usize) -> Self {
        Step { part, raise: false }
    }

    pub fn eps(self) -> f64 {
        if self.raise {
            1.0
        } else {
            -1.0
        }
    }

    pub fn reversed(self) -> Self {
        Step { part: self.part, raise: !self.raise }
    }
}

/// `Lambda^(n,m)` in graded lexicographic order: by `|lambda|` ascending,
/// then lexicographically descending. Rank 0 is the zero partition.
#[derive(Clone, Debug)]
pub struct Lattice {
    n: usize,
    m: u32,
    points: Vec<Partition>,
    ranks: HashMap<Partition, usize>,
}

impl Lattice {
    pub fn new(n: usize, m: u32) -> Result<Self> {
        if n == 0 || m == 0 {
            return Err(Error::Domain(format!("need n >= 1 and m >= 1, got n = {n}, m = {m}")));
        }
        let mut points = Vec::new();
        let mut current = vec![0u32; n];
        enumerate_into(&mut points, &mut current, 0, m);
        points.sort_by(|a, b| a.weight().cmp(&b.weight()).then_with(|| b.cmp(a)));
        let ranks = points.iter().cloned().enumerate().map(|(i, p)| (p, i)).collect();
        Ok(Lattice { n, m, points, ranks })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Partition] {
        &self.points
    }

    pub fn rank(&self, lam: &Partition) -> Option<usize> {
        self.ranks.get(lam).copied()
    }

    pub fn unrank(&self, rank: usize) -> Option<&Partition> {
        self.points.get(rank)
    }

    pub fn contains(&self, lam: &Partition) -> bool {
        self.ranks.contains_key(lam)
    }

    /// Whether `lam + eps e_j` stays inside the lattice.
    pub fn admissible(&self, lam: &Partition, step: Step) -> bool {
        let j = step.part;
        let x = lam[j];
        if step.raise {
            x < self.m && (j == 0 || lam[j - 1] > x)
        } else {
            x > 0 && (j + 1 == self.n || x > lam[j + 1])
        }
    }

    /// All admissible moves out of `lam`, raises before lowers, by increasing `j`.
    pub fn moves(&self, lam: &Partition) -> Vec<Step> {
        let raises = (0..self.n).map(Step::up);
        let lowers = (0..self.n).map(Step::down);
        raises.chain(lowers).filter(|&s| self.admissible(lam, s)).collect()
    }

    /// All `2n` moves, admissible or not.
    pub fn all_steps(&self) -> impl Iterator<Item = Step> + '_ {
        (0..self.n).flat_map(|j| [Step::up(j), Step::down(j)])
    }
}

fn enumerate_into(out: &mut Vec<Partition>, current: &mut Vec<u32>, j: usize, bound: u32) {
    if j == current.len() {
        out.push(Partition(current.clone()));
        return;
    }
    for x in 0..=bound {
        current[j] = x;
        enumerate_into(out, current, j + 1, x);
    }
}

/// `C(n + m, n)`.
pub fn lattice_size(n: usize, m: u32) -> usize {
    let m = m as usize;
    let k = n.min(m);
    (0..k).fold(1usize, |acc, i| acc * (n + m - i) / (i + 1))
}
