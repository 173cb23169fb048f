//! Exact rank, affine solution dimension and rowspace comparison.
//!
//! Rows are scaled to primitive integer vectors and reduced by fraction-free
//! elimination: a row is cross-multiplied against the pivot sharing its
//! leading column and then divided by the gcd of its entries. No
//! floating-point arithmetic is involved anywhere in this module.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};

use crate::constraints::ConstraintSystem;
use crate::rational::Rational;
use crate::scenario::{ProbVector, Scenario};
use crate::{Error, Result};

type IntRow = Vec<(usize, BigInt)>;

/// Sparse exact-rational matrix with a fixed column count.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RationalMatrix {
    cols: usize,
    rows: Vec<Vec<(usize, Rational)>>,
}

impl RationalMatrix {
    pub fn new(cols: usize) -> Self {
        RationalMatrix { cols, rows: Vec::new() }
    }

    /// Adds a row given as `(column, value)` terms. Duplicate columns are
    /// summed and zeros dropped.
    pub fn push_row<I>(&mut self, terms: I) -> Result<()>
    where
        I: IntoIterator<Item = (usize, Rational)>,
    {
        let mut acc: BTreeMap<usize, Rational> = BTreeMap::new();
        for (c, v) in terms {
            if c >= self.cols {
                return Err(Error::ColumnMismatch { left: c + 1, right: self.cols });
            }
            *acc.entry(c).or_insert_with(Rational::zero) += v;
        }
        self.rows.push(acc.into_iter().filter(|(_, v)| !v.is_zero()).collect());
        Ok(())
    }

    pub fn from_dense(rows: &[Vec<Rational>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        let mut mat = RationalMatrix::new(cols);
        for r in rows {
            mat.push_row(r.iter().cloned().enumerate()).expect("rectangular input");
        }
        mat
    }

    /// Stacks the coefficient rows of `systems`. With `augmented`, the
    /// right-hand side becomes one extra column.
    pub fn from_systems(systems: &[&ConstraintSystem], cols: usize, augmented: bool) -> Result<Self> {
        let mut mat = RationalMatrix::new(if augmented { cols + 1 } else { cols });
        for sys in systems {
            if sys.scenario.coordinate_count() != cols {
                return Err(Error::ColumnMismatch { left: sys.scenario.coordinate_count(), right: cols });
            }
            for row in &sys.rows {
                let rhs = augmented.then(|| (cols, row.rhs.clone()));
                mat.push_row(row.terms.iter().cloned().chain(rhs))?;
            }
        }
        Ok(mat)
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Vec<(usize, Rational)>] {
        &self.rows
    }

    /// `self` on top of `other`.
    pub fn stack(&self, other: &RationalMatrix) -> Result<RationalMatrix> {
        if self.cols != other.cols {
            return Err(Error::ColumnMismatch { left: self.cols, right: other.cols });
        }
        let mut rows = self.rows.clone();
        rows.extend(other.rows.iter().cloned());
        Ok(RationalMatrix { cols: self.cols, rows })
    }
}

/// Incremental row echelon form over the integers, keyed by leading column.
#[derive(Debug, Default)]
pub struct RowEchelon {
    pivots: BTreeMap<usize, IntRow>,
}

impl RowEchelon {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    /// Reduces `row` against the current pivots; returns `true` if it was
    /// independent and has been added.
    pub fn insert(&mut self, row: &[(usize, Rational)]) -> bool {
        let mut cur = primitive(integerize(row));
        while let Some((lead, _)) = cur.first() {
            let Some(pivot) = self.pivots.get(lead) else {
                let lead = *lead;
                self.pivots.insert(lead, cur);
                return true;
            };
            cur = primitive(eliminate(&cur, pivot));
        }
        false
    }

    /// Whether `row` lies in the span of the inserted rows, without adding it.
    pub fn contains(&self, row: &[(usize, Rational)]) -> bool {
        let mut cur = primitive(integerize(row));
        while let Some((lead, _)) = cur.first() {
            match self.pivots.get(lead) {
                Some(pivot) => cur = primitive(eliminate(&cur, pivot)),
                None => return false,
            }
        }
        true
    }
}

/// Scales a rational row by the lcm of its denominators.
fn integerize(row: &[(usize, Rational)]) -> IntRow {
    let lcm = row.iter().fold(BigInt::from(1), |acc, (_, v)| acc.lcm(v.denom()));
    row.iter()
        .filter(|(_, v)| !v.is_zero())
        .map(|(c, v)| (*c, v.numer() * (&lcm / v.denom())))
        .collect()
}

/// Divides out the content and makes the leading entry positive.
fn primitive(mut row: IntRow) -> IntRow {
    let Some((_, first)) = row.first() else { return row };
    let mut g = row.iter().fold(BigInt::zero(), |acc, (_, v)| acc.gcd(v));
    if first.is_negative() {
        g = -g;
    }
    if g != BigInt::from(1) {
        for (_, v) in row.iter_mut() {
            *v = &*v / &g;
        }
    }
    row
}

/// `pivot_lead * row - row_lead * pivot`; both share the same leading column,
/// which cancels.
fn eliminate(row: &IntRow, pivot: &IntRow) -> IntRow {
    let a = &pivot[0].1;
    let b = &row[0].1;
    let mut out = Vec::with_capacity(row.len() + pivot.len());
    let (mut i, mut j) = (1, 1);
    while i < row.len() || j < pivot.len() {
        let (col, val) = match (row.get(i), pivot.get(j)) {
            (Some((cr, vr)), Some((cp, vp))) if cr == cp => {
                i += 1;
                j += 1;
                (*cr, a * vr - b * vp)
            }
            (Some((cr, vr)), Some((cp, _))) if cr < cp => {
                i += 1;
                (*cr, a * vr)
            }
            (Some((cr, vr)), None) => {
                i += 1;
                (*cr, a * vr)
            }
            (_, Some((cp, vp))) => {
                j += 1;
                (*cp, -(b * vp))
            }
            (None, None) => unreachable!(),
        };
        if !val.is_zero() {
            out.push((col, val));
        }
    }
    out
}

/// Exact rank. Rows are fed shortest first to limit fill-in.
pub fn rank(mat: &RationalMatrix) -> usize {
    let mut order: Vec<&Vec<(usize, Rational)>> = mat.rows.iter().collect();
    order.sort_by_key(|r| r.len());
    let mut ech = RowEchelon::new();
    for r in order {
        ech.insert(r);
    }
    ech.rank()
}

/// Dimension of the solution set of the stacked equality systems:
/// `coordinate_count - rank`. The uniform distribution is checked to
/// satisfy every row, which makes the result the dimension of the polytope
/// cut out together with positivity.
pub fn affine_solution_dim(systems: &[&ConstraintSystem], scenario: Scenario) -> Result<usize> {
    let cols = scenario.coordinate_count();
    let coeff = RationalMatrix::from_systems(systems, cols, false)?;
    let augmented = RationalMatrix::from_systems(systems, cols, true)?;
    let (r, ra) = (rank(&coeff), rank(&augmented));
    if r != ra {
        return Err(Error::Inconsistent { rank: r, augmented_rank: ra });
    }
    let uniform = ProbVector::uniform(scenario);
    for sys in systems {
        if let Some(i) = sys.first_violation(&uniform) {
            return Err(Error::NoInteriorPoint(sys.rows[i].label.clone()));
        }
    }
    Ok(cols - r)
}

/// True iff both matrices span the same rowspace.
pub fn rowspace_equal(a: &RationalMatrix, b: &RationalMatrix) -> Result<bool> {
    let both = a.stack(b)?;
    let (ra, rb) = (rank(a), rank(b));
    Ok(ra == rb && rank(&both) == ra)
}
