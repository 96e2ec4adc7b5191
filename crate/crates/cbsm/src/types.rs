//! Domain types shared by every layer: Bell states, detector outcomes,
//! code and loss parameters, and the encoding constants derived from them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Letter of a Bell state: the `phi`/`psi` symbol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Letter {
    Phi,
    Psi,
}

impl Letter {
    pub fn flipped(self) -> Self {
        match self {
            Letter::Phi => Letter::Psi,
            Letter::Psi => Letter::Phi,
        }
    }
}

/// Sign of a Bell state: the +/- superscript.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn flipped(self) -> Self {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

/// One of the four Bell states, at any encoding level.
///
/// The same algebraic type serves the physical, block, and logical levels;
/// letter and sign decompose it bijectively.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BellState {
    pub letter: Letter,
    pub sign: Sign,
}

impl BellState {
    pub const PHI_PLUS: BellState = BellState { letter: Letter::Phi, sign: Sign::Plus };
    pub const PHI_MINUS: BellState = BellState { letter: Letter::Phi, sign: Sign::Minus };
    pub const PSI_PLUS: BellState = BellState { letter: Letter::Psi, sign: Sign::Plus };
    pub const PSI_MINUS: BellState = BellState { letter: Letter::Psi, sign: Sign::Minus };

    pub const ALL: [BellState; 4] =
        [Self::PHI_PLUS, Self::PHI_MINUS, Self::PSI_PLUS, Self::PSI_MINUS];

    pub fn index(self) -> usize {
        let l = match self.letter {
            Letter::Phi => 0,
            Letter::Psi => 2,
        };
        let s = match self.sign {
            Sign::Plus => 0,
            Sign::Minus => 1,
        };
        l + s
    }

    pub fn from_index(i: usize) -> BellState {
        Self::ALL[i]
    }
}

impl std::fmt::Display for BellState {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let l = match self.letter {
            Letter::Phi => "phi",
            Letter::Psi => "psi",
        };
        let s = match self.sign {
            Sign::Plus => "+",
            Sign::Minus => "-",
        };
        write!(f, "{l}{s}")
    }
}

/// Result of one photon-number parity detector: zero, odd, or even count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[repr(u8)]
pub enum PnpdOutcome {
    Zero = 0,
    Odd = 1,
    Even = 2,
}

impl PnpdOutcome {
    pub const ALL: [PnpdOutcome; 3] = [PnpdOutcome::Zero, PnpdOutcome::Odd, PnpdOutcome::Even];

    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn from_code(c: u8) -> Result<PnpdOutcome> {
        match c {
            0 => Ok(PnpdOutcome::Zero),
            1 => Ok(PnpdOutcome::Odd),
            2 => Ok(PnpdOutcome::Even),
            _ => Err(Error::Domain(format!("PNPD outcome code {c} not in 0..=2"))),
        }
    }
}

/// Pair of PNPD results for one physical-level BSM.
pub type OutcomePair = (PnpdOutcome, PnpdOutcome);

/// Enumerates all nine outcome pairs in row-major (x, y) order.
pub fn all_outcome_pairs() -> [OutcomePair; 9] {
    let mut out = [(PnpdOutcome::Zero, PnpdOutcome::Zero); 9];
    for (i, &x) in PnpdOutcome::ALL.iter().enumerate() {
        for (j, &y) in PnpdOutcome::ALL.iter().enumerate() {
            out[3 * i + j] = (x, y);
        }
    }
    out
}

/// Index of an outcome pair in the canonical `3x + y` order.
pub fn pair_index(x: PnpdOutcome, y: PnpdOutcome) -> usize {
    3 * x.code() as usize + y.code() as usize
}

/// Full record of a CBSM trial: the n x m grid of PNPD outcome pairs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutcomeMatrix {
    n: usize,
    m: usize,
    entries: Vec<OutcomePair>,
}

impl OutcomeMatrix {
    pub fn new(n: usize, m: usize, entries: Vec<OutcomePair>) -> Result<OutcomeMatrix> {
        if entries.len() != n * m {
            return Err(Error::Domain(format!(
                "outcome matrix needs {} entries for n={n}, m={m}, got {}",
                n * m,
                entries.len()
            )));
        }
        Ok(OutcomeMatrix { n, m, entries })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn get(&self, block: usize, pls: usize) -> OutcomePair {
        self.entries[block * self.m + pls]
    }

    pub fn row(&self, block: usize) -> &[OutcomePair] {
        &self.entries[block * self.m..(block + 1) * self.m]
    }

    pub fn entries(&self) -> &[OutcomePair] {
        &self.entries
    }
}

/// Parameters of the (n, m, alpha) modified parity code plus the letter
/// solidity parameter j used by the hardware-efficient scheme.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CodeParams {
    pub n: usize,
    pub m: usize,
    pub alpha: f64,
    pub j: usize,
}

impl CodeParams {
    pub fn new(n: usize, m: usize, alpha: f64, j: usize) -> Result<CodeParams> {
        if n == 0 || n % 2 == 0 {
            return Err(Error::Domain(format!("n must be a positive odd integer, got {n}")));
        }
        if m == 0 || m % 2 == 0 {
            return Err(Error::Domain(format!("m must be a positive odd integer, got {m}")));
        }
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::Domain(format!("alpha must be positive and finite, got {alpha}")));
        }
        if j == 0 || j > n {
            return Err(Error::Domain(format!("j must satisfy 1 <= j <= n, got j={j}, n={n}")));
        }
        Ok(CodeParams { n, m, alpha, j })
    }
}

/// Photon survival rates of the two systems entering a physical BSM.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossParams {
    pub eta1: f64,
    pub eta2: f64,
}

impl LossParams {
    pub fn new(eta1: f64, eta2: f64) -> Result<LossParams> {
        for (name, eta) in [("eta1", eta1), ("eta2", eta2)] {
            if !(eta > 0.0 && eta <= 1.0) {
                return Err(Error::Domain(format!("{name} must lie in (0, 1], got {eta}")));
            }
        }
        Ok(LossParams { eta1, eta2 })
    }

    pub const LOSSLESS: LossParams = LossParams { eta1: 1.0, eta2: 1.0 };

    pub fn symmetric(eta: f64) -> Result<LossParams> {
        LossParams::new(eta, eta)
    }
}

/// Constants of the modified parity encoding, pure functions of (n, m, alpha).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EncodingConstants {
    /// Overlap u(alpha, m) between the two block basis states.
    pub u: f64,
    /// Normalization constant of the +-sign logical Bell decomposition.
    pub ntilde_plus: f64,
    /// Same for the --sign decomposition.
    pub ntilde_minus: f64,
    /// Overlap of the normalized physical-level Bell states phi+ and psi+.
    pub overlap_phi_psi_plus: f64,
    /// C+ = sqrt(1 + u^2).
    pub c_plus: f64,
    /// C- = sqrt(1 - u^2).
    pub c_minus: f64,
}

/// Evaluates the encoding constants for a parameter set.
///
/// `u` is the block basis overlap, strictly inside (0, 1), decreasing in
/// alpha and increasing in m.
pub fn encoding_constants(params: &CodeParams) -> EncodingConstants {
    let q0 = (-2.0 * params.alpha * params.alpha).exp();
    let u = u_overlap(params.alpha, params.m);
    let u2n = u.powi(2 * params.n as i32);
    let half_pow = 0.5_f64.powi(params.n as i32 - 1);
    EncodingConstants {
        u,
        ntilde_plus: (half_pow / (1.0 + u2n)).sqrt(),
        ntilde_minus: (half_pow / (1.0 - u2n)).sqrt(),
        overlap_phi_psi_plus: 2.0 * q0 / (1.0 + q0 * q0),
        c_plus: (1.0 + u * u).sqrt(),
        c_minus: (1.0 - u * u).sqrt(),
    }
}

/// The block basis overlap u(alpha, m).
pub fn u_overlap(alpha: f64, m: usize) -> f64 {
    let q0 = (-2.0 * alpha * alpha).exp();
    let p = (1.0 + q0).powi(m as i32);
    let q = (1.0 - q0).powi(m as i32);
    (p - q) / (p + q)
}
