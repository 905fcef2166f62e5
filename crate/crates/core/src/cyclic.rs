//! Cycled LTI representation and shift-structured block algebra.
//!
//! An `s`-shift block matrix over period `N` has exactly one block per
//! block-column, block `k` sitting at block position `((k + s) mod N, k)`.
//! `Ǎ` and `B̌` are 1-shift, `Č` and `Ď` are 0-shift (block diagonal). The
//! structure is carried as a tag; dense matrices are only built on demand.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg;
use crate::system::{monodromy, LptvSystem, PhaseSequence};

#[derive(Debug, Clone, PartialEq)]
pub struct ShiftBlockCirculant {
    shift: usize,
    block_rows: usize,
    block_cols: usize,
    blocks: Vec<DMatrix<f64>>,
}

impl ShiftBlockCirculant {
    pub fn new(shift: usize, blocks: Vec<DMatrix<f64>>) -> Result<Self> {
        let seq = PhaseSequence::new(blocks)?;
        let period = seq.period();
        Ok(Self {
            shift: shift % period,
            block_rows: seq.rows(),
            block_cols: seq.cols(),
            blocks: seq.into_entries(),
        })
    }

    pub fn from_sequence(shift: usize, seq: &PhaseSequence) -> Self {
        Self {
            shift: shift % seq.period(),
            block_rows: seq.rows(),
            block_cols: seq.cols(),
            blocks: seq.entries().to_vec(),
        }
    }

    /// Block-diagonal (0-shift) structure.
    pub fn block_diagonal(blocks: Vec<DMatrix<f64>>) -> Result<Self> {
        Self::new(0, blocks)
    }

    pub fn period(&self) -> usize {
        self.blocks.len()
    }

    pub fn shift(&self) -> usize {
        self.shift
    }

    pub fn block_rows(&self) -> usize {
        self.block_rows
    }

    pub fn block_cols(&self) -> usize {
        self.block_cols
    }

    pub fn blocks(&self) -> &[DMatrix<f64>] {
        &self.blocks
    }

    /// Block in block-column `k`.
    pub fn block(&self, k: usize) -> &DMatrix<f64> {
        &self.blocks[k % self.period()]
    }

    /// Block-row index of the block stored in block-column `k`.
    pub fn row_of(&self, k: usize) -> usize {
        (k + self.shift) % self.period()
    }

    pub fn to_sequence(&self) -> PhaseSequence {
        PhaseSequence::new(self.blocks.clone()).expect("blocks are validated on construction")
    }

    pub fn dense_shape(&self) -> (usize, usize) {
        (
            self.period() * self.block_rows,
            self.period() * self.block_cols,
        )
    }

    pub fn dense(&self) -> DMatrix<f64> {
        let (rows, cols) = self.dense_shape();
        let mut out = DMatrix::zeros(rows, cols);
        for (k, blk) in self.blocks.iter().enumerate() {
            let r = self.row_of(k) * self.block_rows;
            let c = k * self.block_cols;
            out.view_mut((r, c), (self.block_rows, self.block_cols))
                .copy_from(blk);
        }
        out
    }

    /// Transpose: an `s`-shift becomes an `(N - s)`-shift.
    pub fn transpose(&self) -> Self {
        let n = self.period();
        let shift = (n - self.shift) % n;
        let blocks = (0..n)
            .map(|k| self.blocks[(k + n - self.shift) % n].transpose())
            .collect();
        Self {
            shift,
            block_rows: self.block_cols,
            block_cols: self.block_rows,
            blocks,
        }
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            blocks: self.blocks.iter().map(|b| b * factor).collect(),
            ..self.clone()
        }
    }

    /// Product `self · rhs`, staying in block form.
    pub fn mul(&self, rhs: &Self) -> Result<Self> {
        structured_product(self, rhs)
    }
}

/// The cycled LTI quadruple of an LPTV plant.
#[derive(Debug, Clone, PartialEq)]
pub struct CycledSystem {
    pub base: LptvSystem,
    pub a: ShiftBlockCirculant,
    pub b: ShiftBlockCirculant,
    pub c: ShiftBlockCirculant,
    pub d: ShiftBlockCirculant,
}

impl CycledSystem {
    /// Dense `(Ǎ, B̌, Č, Ď)`. Only the oracle and verification paths need this.
    pub fn dense(&self) -> (DMatrix<f64>, DMatrix<f64>, DMatrix<f64>, DMatrix<f64>) {
        (
            self.a.dense(),
            self.b.dense(),
            self.c.dense(),
            self.d.dense(),
        )
    }
}

pub fn build_cycled(sys: &LptvSystem) -> CycledSystem {
    CycledSystem {
        base: sys.clone(),
        a: ShiftBlockCirculant::from_sequence(1, sys.a()),
        b: ShiftBlockCirculant::from_sequence(1, sys.b()),
        c: ShiftBlockCirculant::from_sequence(0, sys.c()),
        d: ShiftBlockCirculant::from_sequence(0, sys.d()),
    }
}

/// A signal sample embedded in the cycled space: `e_{k mod N} ⊗ v`.
#[derive(Debug, Clone, PartialEq)]
pub struct CycledSignalFrame {
    pub time: usize,
    pub phase: usize,
    pub period: usize,
    pub value: DVector<f64>,
}

impl CycledSignalFrame {
    pub fn block_len(&self) -> usize {
        self.value.len() / self.period
    }

    /// Block `i` of the stacked value.
    pub fn block(&self, i: usize) -> DVector<f64> {
        let q = self.block_len();
        self.value.rows(i * q, q).into_owned()
    }
}

pub fn cycle_signal(u: &DVector<f64>, k: usize, period: usize) -> CycledSignalFrame {
    let phase = k % period;
    let q = u.len();
    let mut value = DVector::zeros(period * q);
    value.rows_mut(phase * q, q).copy_from(u);
    CycledSignalFrame {
        time: k,
        phase,
        period,
        value,
    }
}

/// Cycled shift matrix `Š_q^r`: identity blocks of size `q` with shift `r mod N`.
pub fn shift_matrix(period: usize, block: usize, power: usize) -> ShiftBlockCirculant {
    assert!(
        period >= 1 && block >= 1,
        "shift matrix needs N >= 1 and q >= 1"
    );
    ShiftBlockCirculant {
        shift: power % period,
        block_rows: block,
        block_cols: block,
        blocks: vec![DMatrix::identity(block, block); period],
    }
}

/// Reads the `s`-shift blocks out of a dense matrix, checking that every
/// other entry is below `tol · (1 + max|dense|)`.
pub fn extract_blocks(
    dense: &DMatrix<f64>,
    period: usize,
    shift: usize,
    block_rows: usize,
    block_cols: usize,
    tol: f64,
) -> Result<PhaseSequence> {
    if dense.shape() != (period * block_rows, period * block_cols) {
        return Err(Error::Dimension(format!(
            "dense matrix is {}x{}, expected {}x{}",
            dense.nrows(),
            dense.ncols(),
            period * block_rows,
            period * block_cols
        )));
    }
    let bound = tol * (1.0 + linalg::max_abs(dense));
    let shift = shift % period;
    for col in 0..dense.ncols() {
        let k = col / block_cols;
        let home = (k + shift) % period;
        for row in 0..dense.nrows() {
            if row / block_rows == home {
                continue;
            }
            let magnitude = dense[(row, col)].abs();
            // negated comparison so NaN is reported too
            #[allow(clippy::neg_cmp_op_on_partial_ord)]
            let outside = !(magnitude <= bound);
            if outside {
                return Err(Error::StructureViolation {
                    row,
                    col,
                    magnitude,
                    bound,
                });
            }
        }
    }
    PhaseSequence::from_fn(period, |k| {
        let r = ((k + shift) % period) * block_rows;
        dense
            .view((r, k * block_cols), (block_rows, block_cols))
            .into_owned()
    })
}

/// Product of two shift structures: shifts add, and block `k` of the result
/// is `lhs.blocks[(k + rhs.shift) mod N] · rhs.blocks[k]`.
pub fn structured_product(
    lhs: &ShiftBlockCirculant,
    rhs: &ShiftBlockCirculant,
) -> Result<ShiftBlockCirculant> {
    if lhs.period() != rhs.period() {
        return Err(Error::Dimension(format!(
            "period mismatch in structured product: {} vs {}",
            lhs.period(),
            rhs.period()
        )));
    }
    if lhs.block_cols != rhs.block_rows {
        return Err(Error::Dimension(format!(
            "block mismatch in structured product: {}x{} times {}x{}",
            lhs.block_rows, lhs.block_cols, rhs.block_rows, rhs.block_cols
        )));
    }
    let n = lhs.period();
    let blocks = (0..n)
        .map(|k| &lhs.blocks[(k + rhs.shift) % n] * &rhs.blocks[k])
        .collect();
    Ok(ShiftBlockCirculant {
        shift: (lhs.shift + rhs.shift) % n,
        block_rows: lhs.block_rows,
        block_cols: rhs.block_cols,
        blocks,
    })
}

/// Integer power of a square shift structure; `power = 0` gives the identity.
pub fn structured_power(base: &ShiftBlockCirculant, power: usize) -> Result<ShiftBlockCirculant> {
    if base.block_rows != base.block_cols {
        return Err(Error::Dimension(
            "power of a non-square block structure".into(),
        ));
    }
    let mut acc = shift_matrix(base.period(), base.block_rows, 0);
    for _ in 0..power {
        acc = structured_product(base, &acc)?;
    }
    Ok(acc)
}

/// `ρ(Ǎ)` for the 1-shift embedding of `seq`, computed as `ρ(Φ)^{1/N}`.
pub fn spectral_radius_cycled(seq: &PhaseSequence) -> Result<f64> {
    let phi = monodromy(seq)?;
    Ok(linalg::spectral_radius(&phi).powf(1.0 / seq.period() as f64))
}
