//! Sequential sampling of CBSM outcome matrices, one PLS at a time, from the
//! exact conditional distributions.
//!
//! The conditional weight of a candidate pair factorizes into a within-block
//! part (the tentatively extended transfer vectors for both sign sectors,
//! closed over the unmeasured trailing PLSs) and a cross-block part (the
//! accumulated 2-vector `w` combined with the closed form for untouched
//! trailing blocks). Only ratios enter, so all vectors are kept renormalized;
//! a full n*m trial costs O(n*m) small matrix-vector products.
//!
//! The within-block closure at q = m is NOT the limit of the q < m branch:
//! a completed block selects one parity component while an open block sums
//! trailing overlaps. Both branches are implemented separately.

use rand::Rng;

use crate::dist::{mat_vec, TransferSet};
use crate::error::{Error, Result};
use crate::povm::PovmTable;
use crate::types::{
    encoding_constants, BellState, CodeParams, Letter, OutcomeMatrix, OutcomePair, PnpdOutcome,
    Sign,
};

/// Everything about (params, loss) the sampler needs, precomputed once and
/// shared read-only across trials.
#[derive(Debug, Clone)]
pub struct SamplerConsts {
    pub params: CodeParams,
    pub transfers: TransferSet,
    /// Per sign and candidate pair: m11 + m22 of the transfer matrix.
    p1: [[f64; 9]; 2],
    /// Per sign and candidate pair: 2 * m12.
    p2: [[f64; 9]; 2],
    /// s^t for t in 0..=m, per sign.
    spow: [Vec<f64>; 2],
    /// R^+-_t = (1 + ov)^t +- (1 - ov)^t with ov the phi+/psi+ overlap.
    r_plus: Vec<f64>,
    r_minus: Vec<f64>,
    /// D^+-_k = 2^k +- (2u^2)^k.
    d_plus: Vec<f64>,
    d_minus: Vec<f64>,
}

impl SamplerConsts {
    pub fn new(params: &CodeParams, table: &PovmTable) -> SamplerConsts {
        let transfers = TransferSet::new(table);
        let consts = encoding_constants(params);
        let mut p1 = [[0.0; 9]; 2];
        let mut p2 = [[0.0; 9]; 2];
        for c in 0..9 {
            let mp = &transfers.m_plus[c];
            let mm = &transfers.m_minus[c];
            p1[0][c] = mp[0] + mp[3];
            p2[0][c] = 2.0 * mp[1];
            p1[1][c] = mm[0] + mm[3];
            p2[1][c] = 2.0 * mm[1];
        }
        let m = params.m;
        let n = params.n;
        let mut spow = [vec![1.0; m + 1], vec![1.0; m + 1]];
        for t in 1..=m {
            spow[0][t] = spow[0][t - 1] * transfers.s_plus;
            spow[1][t] = spow[1][t - 1] * transfers.s_minus;
        }
        let ov = consts.overlap_phi_psi_plus;
        let mut r_plus = vec![0.0; m + 1];
        let mut r_minus = vec![0.0; m + 1];
        let mut up = 1.0;
        let mut um = 1.0;
        for t in 0..=m {
            r_plus[t] = up + um;
            r_minus[t] = up - um;
            up *= 1.0 + ov;
            um *= 1.0 - ov;
        }
        let u2 = consts.u * consts.u;
        let mut d_plus = vec![0.0; n + 1];
        let mut d_minus = vec![0.0; n + 1];
        let mut two_k = 1.0;
        let mut u2_k = 1.0;
        for k in 0..=n {
            d_plus[k] = two_k + u2_k;
            d_minus[k] = two_k - u2_k;
            two_k *= 2.0;
            u2_k *= 2.0 * u2;
        }
        SamplerConsts { params: *params, transfers, p1, p2, spow, r_plus, r_minus, d_plus, d_minus }
    }
}

/// Per-trial sampler state: the two within-block transfer vectors, the
/// cross-block vector, and the current position (block p, PLS q, 0-based).
#[derive(Debug, Clone)]
pub struct SamplerState<'a> {
    consts: &'a SamplerConsts,
    pub initial_bell: BellState,
    pub p: usize,
    pub q: usize,
    v_plus: [f64; 4],
    v_minus: [f64; 4],
    w: [f64; 2],
}

impl<'a> SamplerState<'a> {
    pub fn new(consts: &'a SamplerConsts, initial_bell: BellState) -> SamplerState<'a> {
        SamplerState {
            consts,
            initial_bell,
            p: 0,
            q: 0,
            v_plus: [1.0, 0.0, 0.0, 0.0],
            v_minus: [1.0, 0.0, 0.0, 0.0],
            w: [1.0, 0.0],
        }
    }

    pub fn finished(&self) -> bool {
        self.p >= self.consts.params.n
    }

    fn letter_component(&self) -> usize {
        match self.initial_bell.letter {
            Letter::Phi => 0,
            Letter::Psi => 3,
        }
    }

    /// Unnormalized candidate weights for the next PLS, shared scale.
    fn raw_weights(&self) -> [f64; 9] {
        let c = self.consts;
        let n = c.params.n;
        let m = c.params.m;
        debug_assert!(!self.finished());

        // Cross-block factors: untouched trailing blocks contribute D-sums.
        let plus_init = self.initial_bell.sign == Sign::Plus;
        let (g_plus, g_minus) = if self.p + 1 < n {
            let k = n - 1 - self.p;
            let (dp, dm) = (c.d_plus[k], c.d_minus[k]);
            if plus_init {
                (dp * self.w[0] + dm * self.w[1], dm * self.w[0] + dp * self.w[1])
            } else {
                (dm * self.w[0] + dp * self.w[1], dp * self.w[0] + dm * self.w[1])
            }
        } else if plus_init {
            (self.w[0], self.w[1])
        } else {
            (self.w[1], self.w[0])
        };

        let mut weights = [0.0; 9];
        let t = m - self.q - 1;
        if t > 0 {
            // Open block: close the trailing identity factors with R-sums.
            let a_plus = g_plus * c.spow[0][t] * c.r_plus[t];
            let b_plus = g_plus * c.spow[0][t] * c.r_minus[t];
            let a_minus = 2.0 * g_minus * c.spow[1][t];
            let s1p = self.v_plus[0] + self.v_plus[3];
            let s2p = self.v_plus[1] + self.v_plus[2];
            let s1m = self.v_minus[0] + self.v_minus[3];
            let s2m = self.v_minus[1] + self.v_minus[2];
            for cand in 0..9 {
                let n14p = c.p1[0][cand] * s1p + c.p2[0][cand] * s2p;
                let n23p = c.p2[0][cand] * s1p + c.p1[0][cand] * s2p;
                let n14m = c.p1[1][cand] * s1m + c.p2[1][cand] * s2m;
                weights[cand] = a_plus * n14p + b_plus * n23p + a_minus * n14m;
            }
        } else {
            // Block-completing PLS: select the initial letter's component.
            let idx = self.letter_component();
            for cand in 0..9 {
                let mp = &c.transfers.m_plus[cand];
                let mm = &c.transfers.m_minus[cand];
                let row = 4 * idx;
                let xp = mp[row] * self.v_plus[0]
                    + mp[row + 1] * self.v_plus[1]
                    + mp[row + 2] * self.v_plus[2]
                    + mp[row + 3] * self.v_plus[3];
                let xm = mm[row] * self.v_minus[0]
                    + mm[row + 1] * self.v_minus[1]
                    + mm[row + 2] * self.v_minus[2]
                    + mm[row + 3] * self.v_minus[3];
                weights[cand] = g_plus * xp + g_minus * xm;
            }
        }
        weights
    }

    /// Normalized conditional distribution of the next PLS outcome pair,
    /// indexed by `3x + y`.
    pub fn conditional_distribution(&self) -> Result<[f64; 9]> {
        let mut w = self.raw_weights();
        let mx = w.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
        let mut total = 0.0;
        for x in &mut w {
            // Rounding can leave tiny negative residue on structurally-zero
            // weights; anything larger signals a numerical fault.
            if *x < 0.0 {
                if *x < -1e-9 * mx {
                    return Err(Error::Numerical(format!(
                        "negative conditional weight {x} at block {}, PLS {}",
                        self.p, self.q
                    )));
                }
                *x = 0.0;
            }
            total += *x;
        }
        if !(total > 0.0) || !total.is_finite() {
            return Err(Error::Numerical(format!(
                "degenerate conditional weights (total {total}) at block {}, PLS {}",
                self.p, self.q
            )));
        }
        for x in &mut w {
            *x /= total;
        }
        Ok(w)
    }

    /// Advances the state past one sampled outcome pair.
    pub fn advance(&mut self, pair: OutcomePair) {
        debug_assert!(!self.finished());
        let c = self.consts;
        self.v_plus = mat_vec(c.transfers.matrix(Sign::Plus, pair), &self.v_plus);
        self.v_minus = mat_vec(c.transfers.matrix(Sign::Minus, pair), &self.v_minus);
        let mx = self
            .v_plus
            .iter()
            .chain(self.v_minus.iter())
            .fold(0.0f64, |a, &b| a.max(b.abs()));
        if mx > 0.0 {
            for x in self.v_plus.iter_mut().chain(self.v_minus.iter_mut()) {
                *x /= mx;
            }
        }
        self.q += 1;
        if self.q == c.params.m {
            let idx = self.letter_component();
            let lp = self.v_plus[idx];
            let lm = self.v_minus[idx];
            self.w = [lp * self.w[0] + lm * self.w[1], lm * self.w[0] + lp * self.w[1]];
            let wmax = self.w[0].abs().max(self.w[1].abs());
            if wmax > 0.0 {
                self.w[0] /= wmax;
                self.w[1] /= wmax;
            }
            self.v_plus = [1.0, 0.0, 0.0, 0.0];
            self.v_minus = [1.0, 0.0, 0.0, 0.0];
            self.q = 0;
            self.p += 1;
        }
    }

    /// Draws the next outcome pair by inverse CDF over the conditional
    /// weights and advances. Returns the sampled pair and its conditional
    /// probability.
    pub fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<(OutcomePair, f64)> {
        let mut weights = self.raw_weights();
        let mx = weights.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
        let mut total = 0.0;
        for w in &mut weights {
            if *w < 0.0 {
                if *w < -1e-9 * mx {
                    return Err(Error::Numerical(format!(
                        "negative conditional weight {w} at block {}, PLS {}",
                        self.p, self.q
                    )));
                }
                *w = 0.0;
            }
            total += *w;
        }
        if !(total > 0.0) || !total.is_finite() {
            return Err(Error::Numerical(format!(
                "degenerate conditional weights (total {total}) at block {}, PLS {}",
                self.p, self.q
            )));
        }
        let target = rng.random::<f64>() * total;
        let mut acc = 0.0;
        let mut chosen = 8;
        for (i, &w) in weights.iter().enumerate() {
            acc += w;
            if target < acc {
                chosen = i;
                break;
            }
        }
        let pair = (
            PnpdOutcome::from_code((chosen / 3) as u8).unwrap(),
            PnpdOutcome::from_code((chosen % 3) as u8).unwrap(),
        );
        let cond = weights[chosen] / total;
        self.advance(pair);
        Ok((pair, cond))
    }
}

/// Samples a full n x m outcome matrix for the given initial logical Bell
/// state. Deterministic for a fixed RNG stream.
pub fn sample_outcome_matrix<R: Rng + ?Sized>(
    consts: &SamplerConsts,
    b2: BellState,
    rng: &mut R,
) -> Result<OutcomeMatrix> {
    let n = consts.params.n;
    let m = consts.params.m;
    let mut entries = Vec::with_capacity(n * m);
    let mut state = SamplerState::new(consts, b2);
    while !state.finished() {
        let (pair, _) = state.step(rng)?;
        entries.push(pair);
    }
    OutcomeMatrix::new(n, m, entries)
}
