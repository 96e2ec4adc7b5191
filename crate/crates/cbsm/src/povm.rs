//! Closed-form POVM matrix elements of the lossy physical-level BSM.
//!
//! A physical BSM mixes the two modes on a 50:50 beam splitter and reads two
//! photon-number parity detectors. With photon survival rates (eta1, eta2)
//! applied before the measurement, the nine POVM elements M_{x,y} have
//! closed-form matrix elements in the Bell basis, built from the factors
//!
//! ```text
//! c+- = exp(-(eta1+eta2) a^2) / (1 +- exp(-4 a^2))
//! eta+- = (sqrt(eta1) +- sqrt(eta2))^2 / 2
//! f_0 = 1,  f_1 = sinh(eta a^2),  f_2 = cosh(eta a^2) - 1
//! ```
//!
//! The cross element <phi+-|M_{x,y}|psi+-> carries an additional
//! sign(eta1 - eta2)^(x+y) factor relative to the diagonal structure: the
//! detector-mode amplitudes coupling phi-type and psi-type components are
//! proportional to sqrt(eta1) - sqrt(eta2), and the odd-parity hyperbolic
//! factors are odd in that amplitude. The truncated-Fock oracle pins this
//! down for both orientations (see `oracle`).

use crate::error::{Error, Result};
use crate::types::{all_outcome_pairs, pair_index, BellState, Letter, LossParams, PnpdOutcome};

/// Matrix elements of one POVM element between same-sign Bell states.
/// Cross elements between different signs vanish identically.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PovmElements {
    /// <phi+|M|phi+>
    pub m11_plus: f64,
    /// <phi-|M|phi->
    pub m11_minus: f64,
    /// <psi+|M|psi+>
    pub m22_plus: f64,
    /// <psi-|M|psi->
    pub m22_minus: f64,
    /// <phi+|M|psi+>
    pub m12_plus: f64,
    /// <phi-|M|psi->
    pub m12_minus: f64,
}

impl PovmElements {
    /// Diagonal element for a Bell state.
    pub fn diagonal(&self, b: BellState) -> f64 {
        use crate::types::Sign::*;
        match (b.letter, b.sign) {
            (Letter::Phi, Plus) => self.m11_plus,
            (Letter::Phi, Minus) => self.m11_minus,
            (Letter::Psi, Plus) => self.m22_plus,
            (Letter::Psi, Minus) => self.m22_minus,
        }
    }
}

/// Precomputed POVM matrix elements for all nine outcome pairs at fixed
/// (alpha, eta1, eta2). Immutable after construction.
#[derive(Debug, Clone)]
pub struct PovmTable {
    pub alpha: f64,
    pub loss: LossParams,
    elements: [PovmElements; 9],
}

/// Hyperbolic detector factor f_i(z) with z = eta * alpha^2.
///
/// f_2 is evaluated as 2 sinh^2(z/2) to stay accurate for small z.
pub(crate) fn f_factor(i: PnpdOutcome, z: f64) -> f64 {
    match i {
        PnpdOutcome::Zero => 1.0,
        PnpdOutcome::Odd => z.sinh(),
        PnpdOutcome::Even => {
            let s = (0.5 * z).sinh();
            2.0 * s * s
        }
    }
}

/// Cross-term attenuation of the loss channel acting on a |beta><gamma| dyad.
/// For the +-alpha dyads of a coherent-state qubit this is exp(-2(1-eta)a^2).
pub fn loss_cross_factor(eta: f64, beta: f64, gamma: f64) -> f64 {
    let d = beta - gamma;
    (-(1.0 - eta) * d * d / 2.0).exp()
}

/// Builds the POVM element table.
///
/// Fails fast with a range error once any hyperbolic argument exceeds 700
/// (exp overflow territory, far beyond the physical regime alpha <~ 2).
pub fn build_povm_table(alpha: f64, loss: LossParams) -> Result<PovmTable> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::Domain(format!("alpha must be positive and finite, got {alpha}")));
    }
    let a2 = alpha * alpha;
    let eta_p = (loss.eta1.sqrt() + loss.eta2.sqrt()).powi(2) / 2.0;
    let eta_m = (loss.eta1.sqrt() - loss.eta2.sqrt()).powi(2) / 2.0;
    if eta_p * a2 > 700.0 {
        return Err(Error::Range(format!(
            "alpha^2 * eta = {} exceeds the supported range (overflow)",
            eta_p * a2
        )));
    }

    let g = (eta_p * eta_m).sqrt();
    // 1 -+ K with K = exp(-w), kept stable for small w.
    let w = 2.0 * (2.0 - loss.eta1 - loss.eta2) * a2;
    let one_plus_k = 1.0 + (-w).exp();
    let one_minus_k = -(-w).exp_m1();
    let c_plus = (-(loss.eta1 + loss.eta2) * a2).exp() / (1.0 + (-4.0 * a2).exp());
    let c_minus = (-(loss.eta1 + loss.eta2) * a2).exp() / (-(-4.0 * a2).exp_m1());

    // Bracket factors of the cross element: A = exp(-2(1-eta1)a^2),
    // B = exp(-2(1-eta2)a^2). A + B is benign; A - B cancels and is
    // evaluated through expm1.
    let la = -2.0 * (1.0 - loss.eta1) * a2;
    let lb = -2.0 * (1.0 - loss.eta2) * a2;
    let a_plus_b = la.exp() + lb.exp();
    let b_minus_a = la.exp() * (lb - la).exp_m1();
    let sigma = if loss.eta1 >= loss.eta2 { 1.0 } else { -1.0 };

    let mut elements = [PovmElements {
        m11_plus: 0.0,
        m11_minus: 0.0,
        m22_plus: 0.0,
        m22_minus: 0.0,
        m12_plus: 0.0,
        m12_minus: 0.0,
    }; 9];

    for (x, y) in all_outcome_pairs() {
        let parity_even = (x.code() + y.code()) % 2 == 0;
        let (diag_plus, diag_minus) = if parity_even {
            (c_plus * one_plus_k, c_minus * one_minus_k)
        } else {
            (c_plus * one_minus_k, c_minus * one_plus_k)
        };
        let fp = f_factor(x, eta_p * a2);
        let fm = f_factor(y, eta_m * a2);
        let fxg = f_factor(x, g * a2);
        let fyg = f_factor(y, g * a2);
        // sigma^(x+y) [ +- (-1)^(x+y) A + B ]
        let (cross_plus, cross_minus) = if parity_even {
            (c_plus * a_plus_b, c_minus * b_minus_a)
        } else {
            (sigma * c_plus * b_minus_a, sigma * c_minus * a_plus_b)
        };
        elements[pair_index(x, y)] = PovmElements {
            m11_plus: diag_plus * fp * fm,
            m11_minus: diag_minus * fp * fm,
            m22_plus: diag_plus * f_factor(x, eta_m * a2) * f_factor(y, eta_p * a2),
            m22_minus: diag_minus * f_factor(x, eta_m * a2) * f_factor(y, eta_p * a2),
            m12_plus: cross_plus * fxg * fyg,
            m12_minus: cross_minus * fxg * fyg,
        };
    }

    Ok(PovmTable { alpha, loss, elements })
}

impl PovmTable {
    pub fn elements(&self, x: PnpdOutcome, y: PnpdOutcome) -> &PovmElements {
        &self.elements[pair_index(x, y)]
    }

    pub fn elements_by_index(&self, idx: usize) -> &PovmElements {
        &self.elements[idx]
    }
}

/// Pr(x, y | B) for a single lossy physical-level BSM.
pub fn physical_outcome_probability(
    table: &PovmTable,
    x: PnpdOutcome,
    y: PnpdOutcome,
    b: BellState,
) -> f64 {
    table.elements(x, y).diagonal(b)
}
