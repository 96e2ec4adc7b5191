//! Exact matrix-form joint distributions of CBSM outcomes.
//!
//! A block-level outcome sequence is scored by chaining 4x4 transfer matrices
//! (one per PNPD pair and sign sector) onto (1,0,0,0); the four components
//! track the parities of the psi-letter counts on the bra and ket sides of the
//! block Bell decomposition. Logical-level outcomes chain 2x2 matrices over
//! blocks the same way. Products underflow for large n*m, so every transfer
//! application renormalizes the vector and accumulates the scale in log space.
//!
//! Transfer-matrix entries live in the unnormalized Bell basis (norm fixed by
//! [`TransferSet::s_plus`]/[`s_minus`]); the block normalization constant
//! [`block_norm_constant`] converts chained products into probabilities. The
//! constant is 1 at m = 1 and must not be dropped for larger blocks.

use crate::error::{Error, Result};
use crate::povm::PovmTable;
use crate::types::{
    encoding_constants, BellState, CodeParams, Letter, OutcomeMatrix, OutcomePair,
    Sign,
};

/// 4x4 transfer matrices for the nine outcome pairs, both sign sectors,
/// precomputed once per POVM table and reused across trials.
#[derive(Debug, Clone)]
pub struct TransferSet {
    /// Row-major 4x4 matrices, indexed by `pair_index`.
    pub m_plus: [[f64; 16]; 9],
    pub m_minus: [[f64; 16]; 9],
    /// Squared norms of the unnormalized physical Bell states, 2(1 +- e^{-4a^2}).
    pub s_plus: f64,
    pub s_minus: f64,
}

fn fill(m11: f64, m12: f64, m22: f64) -> [f64; 16] {
    [
        m11, m12, m12, m22, //
        m12, m11, m22, m12, //
        m12, m22, m11, m12, //
        m22, m12, m12, m11,
    ]
}

impl TransferSet {
    pub fn new(table: &PovmTable) -> TransferSet {
        let a2 = table.alpha * table.alpha;
        let s_plus = 2.0 * (1.0 + (-4.0 * a2).exp());
        let s_minus = 2.0 * (1.0 - (-4.0 * a2).exp());
        let mut m_plus = [[0.0; 16]; 9];
        let mut m_minus = [[0.0; 16]; 9];
        for idx in 0..9 {
            let e = table.elements_by_index(idx);
            m_plus[idx] = fill(s_plus * e.m11_plus, s_plus * e.m12_plus, s_plus * e.m22_plus);
            m_minus[idx] =
                fill(s_minus * e.m11_minus, s_minus * e.m12_minus, s_minus * e.m22_minus);
        }
        TransferSet { m_plus, m_minus, s_plus, s_minus }
    }

    pub fn matrix(&self, sign: Sign, pair: OutcomePair) -> &[f64; 16] {
        let idx = crate::types::pair_index(pair.0, pair.1);
        match sign {
            Sign::Plus => &self.m_plus[idx],
            Sign::Minus => &self.m_minus[idx],
        }
    }
}

#[inline]
pub(crate) fn mat_vec(m: &[f64; 16], v: &[f64; 4]) -> [f64; 4] {
    [
        m[0] * v[0] + m[1] * v[1] + m[2] * v[2] + m[3] * v[3],
        m[4] * v[0] + m[5] * v[1] + m[6] * v[2] + m[7] * v[3],
        m[8] * v[0] + m[9] * v[1] + m[10] * v[2] + m[11] * v[3],
        m[12] * v[0] + m[13] * v[1] + m[14] * v[2] + m[15] * v[3],
    ]
}

/// Squared amplitude normalization of the block Bell decomposition into
/// physical-Bell products: 4 (N^(m))^2 = [2^(m-2) ((1+q)^m + (1-q)^m)]^-1
/// with q = e^{-2 alpha^2}. Equal to 1 at m = 1.
pub fn block_norm_constant(alpha: f64, m: usize) -> f64 {
    let q0 = (-2.0 * alpha * alpha).exp();
    let p = (1.0 + q0).powi(m as i32);
    let q = (1.0 - q0).powi(m as i32);
    1.0 / (2.0_f64.powi(m as i32 - 2) * (p + q))
}

/// Running within-block vector for one sign sector, stored as
/// `v * exp(log_scale)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockVector {
    pub sign: Sign,
    pub v: [f64; 4],
    pub log_scale: f64,
}

impl BlockVector {
    pub fn identity(sign: Sign) -> BlockVector {
        BlockVector { sign, v: [1.0, 0.0, 0.0, 0.0], log_scale: 0.0 }
    }

    /// Applies the transfer matrix for one outcome pair and renormalizes.
    pub fn apply(&mut self, transfers: &TransferSet, pair: OutcomePair) {
        self.v = mat_vec(transfers.matrix(self.sign, pair), &self.v);
        self.renormalize();
    }

    fn renormalize(&mut self) {
        let mx = self.v.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
        if mx > 0.0 {
            for c in &mut self.v {
                *c /= mx;
            }
            self.log_scale += mx.ln();
        }
    }

    /// Component in linear scale (may underflow for long chains).
    pub fn component(&self, i: usize) -> f64 {
        self.v[i] * self.log_scale.exp()
    }
}

/// Accumulated logical-level vector for one letter, scaled like `BlockVector`.
#[derive(Debug, Clone, PartialEq)]
pub struct LogicalVector {
    pub letter: Letter,
    pub w: [f64; 2],
    pub log_scale: f64,
}

impl LogicalVector {
    pub fn identity(letter: Letter) -> LogicalVector {
        LogicalVector { letter, w: [1.0, 0.0], log_scale: 0.0 }
    }

    /// Folds one block's transfer entries into the chain.
    pub fn apply(&mut self, entries: &TransferEntries) {
        let w0 = entries.l_plus * self.w[0] + entries.l_minus * self.w[1];
        let w1 = entries.l_minus * self.w[0] + entries.l_plus * self.w[1];
        self.w = [w0, w1];
        self.log_scale += entries.log_scale;
        let mx = self.w[0].abs().max(self.w[1].abs());
        if mx > 0.0 {
            self.w[0] /= mx;
            self.w[1] /= mx;
            self.log_scale += mx.ln();
        }
    }
}

/// Chains the transfer matrices of `outcomes` (in order) onto (1,0,0,0).
pub fn block_vector(
    transfers: &TransferSet,
    outcomes: &[OutcomePair],
    sign: Sign,
) -> BlockVector {
    let mut bv = BlockVector::identity(sign);
    for &pair in outcomes {
        bv.apply(transfers, pair);
    }
    bv
}

fn letter_component(letter: Letter) -> usize {
    match letter {
        Letter::Phi => 0,
        Letter::Psi => 3,
    }
}

/// Pr(outcome sequence | block Bell state b1) for a full m-length block.
pub fn block_joint_probability(
    params: &CodeParams,
    transfers: &TransferSet,
    outcomes: &[OutcomePair],
    b1: BellState,
) -> Result<f64> {
    if outcomes.len() != params.m {
        return Err(Error::Domain(format!(
            "expected {} outcome pairs, got {}",
            params.m,
            outcomes.len()
        )));
    }
    let bv = block_vector(transfers, outcomes, b1.sign);
    let consts = encoding_constants(params);
    let c2 = match b1.sign {
        Sign::Plus => consts.c_plus * consts.c_plus,
        Sign::Minus => consts.c_minus * consts.c_minus,
    };
    let bn = block_norm_constant(params.alpha, params.m);
    let comp = bv.v[letter_component(b1.letter)];
    Ok(bn * bn / (2.0 * c2) * comp * bv.log_scale.exp())
}

/// The two entries of the 2x2 logical transfer matrix for one block row:
/// `L_+- = [1 +- u^2] * <block Bell expectation>`, at a shared log scale.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferEntries {
    pub l_plus: f64,
    pub l_minus: f64,
    pub log_scale: f64,
}

impl TransferEntries {
    pub fn l_plus_linear(&self) -> f64 {
        self.l_plus * self.log_scale.exp()
    }

    pub fn l_minus_linear(&self) -> f64 {
        self.l_minus * self.log_scale.exp()
    }
}

/// Computes (L_+, L_-) for one block outcome row and letter.
pub fn logical_transfer_entries(
    params: &CodeParams,
    transfers: &TransferSet,
    outcomes: &[OutcomePair],
    letter: Letter,
) -> Result<TransferEntries> {
    if outcomes.len() != params.m {
        return Err(Error::Domain(format!(
            "expected {} outcome pairs, got {}",
            params.m,
            outcomes.len()
        )));
    }
    let idx = letter_component(letter);
    let vp = block_vector(transfers, outcomes, Sign::Plus);
    let vm = block_vector(transfers, outcomes, Sign::Minus);
    let bn = block_norm_constant(params.alpha, params.m);
    // L_+- = C_+-^2 * Pr(row | block Bell) = bn^2/2 * v_idx; the C^2 factors
    // cancel against the block normalization of the probability.
    let base = vp.log_scale.max(vm.log_scale);
    let lp = 0.5 * bn * bn * vp.v[idx] * (vp.log_scale - base).exp();
    let lm = 0.5 * bn * bn * vm.v[idx] * (vm.log_scale - base).exp();
    Ok(TransferEntries { l_plus: lp, l_minus: lm, log_scale: base })
}

/// Pr(outcome matrix | logical Bell state b2), as (mantissa, log scale).
pub fn logical_joint_scaled(
    params: &CodeParams,
    transfers: &TransferSet,
    matrix: &OutcomeMatrix,
    b2: BellState,
) -> Result<(f64, f64)> {
    if matrix.n() != params.n || matrix.m() != params.m {
        return Err(Error::Domain(format!(
            "outcome matrix is {}x{}, parameters say {}x{}",
            matrix.n(),
            matrix.m(),
            params.n,
            params.m
        )));
    }
    let mut w = LogicalVector::identity(b2.letter);
    for block in 0..params.n {
        let entries = logical_transfer_entries(params, transfers, matrix.row(block), b2.letter)?;
        w.apply(&entries);
    }
    let consts = encoding_constants(params);
    let nt2 = match b2.sign {
        Sign::Plus => consts.ntilde_plus * consts.ntilde_plus,
        Sign::Minus => consts.ntilde_minus * consts.ntilde_minus,
    };
    let comp = match b2.sign {
        Sign::Plus => w.w[0],
        Sign::Minus => w.w[1],
    };
    Ok((nt2 * comp, w.log_scale))
}

/// Pr(outcome matrix | logical Bell state b2) in linear scale.
pub fn logical_joint_probability(
    params: &CodeParams,
    transfers: &TransferSet,
    matrix: &OutcomeMatrix,
    b2: BellState,
) -> Result<f64> {
    let (mant, log) = logical_joint_scaled(params, transfers, matrix, b2)?;
    Ok(mant * log.exp())
}
