//! Interpretation of single physical-level BSM outcomes.
//!
//! The PNPD pair (x, y) determines the measured Bell state by a compact rule:
//! the parity of x + y fixes the sign, the order of x and y fixes the letter,
//! and x = y leaves the letter undetermined (failure). This reproduces the
//! maximum-posterior assignment of the POVM diagonal elements.

use serde::{Deserialize, Serialize};

use crate::povm::PovmTable;
use crate::types::{all_outcome_pairs, BellState, Letter, PnpdOutcome, Sign};

/// Outcome of interpreting one physical-level BSM.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhysicalResult {
    pub sign: Sign,
    /// `None` when the letter is undeterminable: a failed full BSM (x = y)
    /// or a sign-only partial measurement.
    pub letter: Option<Letter>,
}

impl PhysicalResult {
    pub fn is_failure(&self) -> bool {
        self.letter.is_none()
    }
}

fn sign_of(x: PnpdOutcome, y: PnpdOutcome) -> Sign {
    if (x.code() + y.code()) % 2 == 0 {
        Sign::Plus
    } else {
        Sign::Minus
    }
}

/// Full BSM interpretation: sign from the parity of x + y, letter from the
/// order of x and y, failure on the diagonal.
pub fn interpret_full(x: PnpdOutcome, y: PnpdOutcome) -> PhysicalResult {
    let letter = match x.code().cmp(&y.code()) {
        std::cmp::Ordering::Greater => Some(Letter::Phi),
        std::cmp::Ordering::Less => Some(Letter::Psi),
        std::cmp::Ordering::Equal => None,
    };
    PhysicalResult { sign: sign_of(x, y), letter }
}

/// Sign-only partial BSM: one PNPD reads the parity of x + y.
pub fn interpret_sign_only(x: PnpdOutcome, y: PnpdOutcome) -> PhysicalResult {
    PhysicalResult { sign: sign_of(x, y), letter: None }
}

/// Exact single-BSM rates under the uniform Bell-state prior.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhysicalRates {
    pub p_i: f64,
    pub p_x: f64,
    pub p_y: f64,
    pub p_z: f64,
    pub p_fail: f64,
}

/// Sums the POVM diagonals into success/error/failure categories, averaging
/// over the four Bell states with equal prior.
pub fn exact_physical_rates(table: &PovmTable) -> PhysicalRates {
    let mut r = PhysicalRates { p_i: 0.0, p_x: 0.0, p_y: 0.0, p_z: 0.0, p_fail: 0.0 };
    for b in BellState::ALL {
        for (x, y) in all_outcome_pairs() {
            let p = 0.25 * table.elements(x, y).diagonal(b);
            let interp = interpret_full(x, y);
            match interp.letter {
                None => r.p_fail += p,
                Some(letter) => {
                    let letter_ok = letter == b.letter;
                    let sign_ok = interp.sign == b.sign;
                    match (letter_ok, sign_ok) {
                        (true, true) => r.p_i += p,
                        (false, true) => r.p_x += p,
                        (true, false) => r.p_z += p,
                        (false, false) => r.p_y += p,
                    }
                }
            }
        }
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::povm::{build_povm_table, physical_outcome_probability};
    use crate::types::{LossParams, PnpdOutcome::*};

    #[test]
    fn table_one_examples() {
        assert_eq!(
            interpret_full(Zero, Even),
            PhysicalResult { sign: Sign::Plus, letter: Some(Letter::Psi) }
        );
        assert_eq!(
            interpret_full(Odd, Zero),
            PhysicalResult { sign: Sign::Minus, letter: Some(Letter::Phi) }
        );
        assert_eq!(interpret_full(Even, Even), PhysicalResult { sign: Sign::Plus, letter: None });
    }

    #[test]
    fn sign_only_examples() {
        assert_eq!(
            interpret_sign_only(Zero, Odd),
            PhysicalResult { sign: Sign::Minus, letter: None }
        );
        assert_eq!(
            interpret_sign_only(Even, Zero),
            PhysicalResult { sign: Sign::Plus, letter: None }
        );
    }

    #[test]
    fn sign_agrees_between_interpretations() {
        for (x, y) in all_outcome_pairs() {
            assert_eq!(interpret_full(x, y).sign, interpret_sign_only(x, y).sign);
        }
    }

    #[test]
    fn map_consistency_with_povm() {
        // The compact rule must agree with the argmax of the POVM diagonals.
        for alpha in [0.5, 1.0, 1.6, 2.0] {
            for eta in [0.8, 0.95, 0.99, 1.0] {
                for loss in [
                    LossParams::new(eta, eta).unwrap(),
                    LossParams::new(eta, eta * (-1.0f64 / 22.0).exp()).unwrap(),
                ] {
                    let t = build_povm_table(alpha, loss).unwrap();
                    for (x, y) in all_outcome_pairs() {
                        let probs: Vec<f64> = BellState::ALL
                            .iter()
                            .map(|&b| physical_outcome_probability(&t, x, y, b))
                            .collect();
                        let max = probs.iter().cloned().fold(f64::MIN, f64::max);
                        let interp = interpret_full(x, y);
                        match interp.letter {
                            Some(letter) => {
                                let b = BellState { letter, sign: interp.sign };
                                let p = probs[b.index()];
                                assert!(
                                    p >= max * (1.0 - 1e-12),
                                    "rule picks {b} with {p}, max {max} at ({x:?},{y:?})"
                                );
                            }
                            None => {
                                // Both phi+ and psi+ attain the maximum.
                                let p1 = probs[BellState::PHI_PLUS.index()];
                                let p2 = probs[BellState::PSI_PLUS.index()];
                                assert!((p1 - p2).abs() <= 1e-12 * p1.max(p2).max(1e-300));
                                assert!(p1 >= max * (1.0 - 1e-12));
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn fig2_point_has_tiny_x_y_errors() {
        let loss = LossParams::new(0.99, 0.99 * (-1.0f64 / 22.0).exp()).unwrap();
        let t = build_povm_table(1.0, loss).unwrap();
        let r = exact_physical_rates(&t);
        assert!(r.p_x <= 1e-4 && r.p_y <= 1e-4);
        let total = r.p_i + r.p_x + r.p_y + r.p_z + r.p_fail;
        assert!((total - 1.0).abs() < 1e-12);
    }
}
