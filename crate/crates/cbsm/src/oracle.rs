//! Independent brute-force validators for the closed-form machinery.
//!
//! Three routes, each independent of the implementation it checks:
//!
//! * POVM elements from first principles: expand Bell states into coherent
//!   components, apply the loss cross-factors and the 50:50 beam splitter on
//!   amplitudes, and evaluate the parity projectors by truncated Fock sums.
//! * Block distributions by literal permutation sums over the products of
//!   per-PLS matrix elements (the recurrence-free definition).
//! * Logical distributions by enumerating block sign assignments over the
//!   permutation-sum block probabilities.
//!
//! Desk scale only: permutation sums are capped at m <= 4 and exhaustive
//! matrices at n*m <= 6.

use crate::dist::block_norm_constant;
use crate::error::{Error, Result};
use crate::povm::{loss_cross_factor, PovmTable};
use crate::types::{
    encoding_constants, BellState, CodeParams, Letter, LossParams, OutcomeMatrix, OutcomePair,
    PnpdOutcome, Sign,
};

/// Fock-space truncation for the projector sums.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FockTruncation {
    pub n_max: usize,
}

impl FockTruncation {
    /// Safe default for amplitudes up to sqrt(2) * alpha (the largest
    /// amplitude leaving the beam splitter).
    pub fn default_for_alpha(alpha: f64) -> FockTruncation {
        let b2 = 2.0 * alpha * alpha;
        FockTruncation { n_max: (b2 + 12.0 * b2.sqrt() + 20.0).ceil() as usize }
    }

    fn check(&self, beta: f64, beta_prime: f64) -> Result<()> {
        let b = beta.abs().max(beta_prime.abs());
        let needed = (b * b + 12.0 * b + 20.0).ceil() as usize;
        if self.n_max < needed {
            return Err(Error::Truncation(format!(
                "n_max = {} insufficient for amplitude {b:.3} (need >= {needed})",
                self.n_max
            )));
        }
        Ok(())
    }
}

/// <beta| Pi_x |beta'> by truncated Fock sums, for real amplitudes.
pub fn fock_projector_overlap(
    beta: f64,
    beta_prime: f64,
    x: PnpdOutcome,
    trunc: &FockTruncation,
) -> Result<f64> {
    trunc.check(beta, beta_prime)?;
    let prefactor = (-(beta * beta + beta_prime * beta_prime) / 2.0).exp();
    let z = beta * beta_prime;
    let mut term = 1.0; // z^n / n! at n = 0
    let mut sums = [0.0f64; 3]; // zero / odd / even>=2 classes
    sums[0] = 1.0;
    for n in 1..=trunc.n_max {
        term *= z / n as f64;
        if n % 2 == 1 {
            sums[1] += term;
        } else {
            sums[2] += term;
        }
    }
    Ok(prefactor * sums[x.code() as usize])
}

fn bell_components(b: BellState, alpha: f64) -> [(f64, f64, f64); 2] {
    let a2 = alpha * alpha;
    let norm = match b.sign {
        Sign::Plus => (2.0 * (1.0 + (-4.0 * a2).exp())).sqrt().recip(),
        Sign::Minus => (2.0 * (1.0 - (-4.0 * a2).exp())).sqrt().recip(),
    };
    let rel = match b.sign {
        Sign::Plus => norm,
        Sign::Minus => -norm,
    };
    match b.letter {
        Letter::Phi => [(norm, alpha, alpha), (rel, -alpha, -alpha)],
        Letter::Psi => [(norm, alpha, -alpha), (rel, -alpha, alpha)],
    }
}

/// <b| M_{x,y} |b'> assembled from first principles.
pub fn oracle_povm_element(
    alpha: f64,
    loss: LossParams,
    x: PnpdOutcome,
    y: PnpdOutcome,
    b: BellState,
    b_prime: BellState,
    trunc: &FockTruncation,
) -> Result<f64> {
    let sqrt2 = std::f64::consts::SQRT_2;
    let (r1, r2) = (loss.eta1.sqrt(), loss.eta2.sqrt());
    let mut total = 0.0;
    for (cb, a1, a2) in bell_components(b, alpha) {
        for (ck, b1, b2) in bell_components(b_prime, alpha) {
            let k1 = loss_cross_factor(loss.eta1, a1, b1);
            let k2 = loss_cross_factor(loss.eta2, a2, b2);
            // loss-reduced amplitudes through the beam splitter
            let (ba1, ba2) = (r1 * a1, r2 * a2);
            let (kb1, kb2) = (r1 * b1, r2 * b2);
            let u1 = (ba1 + ba2) / sqrt2;
            let u2 = (ba1 - ba2) / sqrt2;
            let v1 = (kb1 + kb2) / sqrt2;
            let v2 = (kb1 - kb2) / sqrt2;
            total += cb
                * ck
                * k1
                * k2
                * fock_projector_overlap(u1, v1, x, trunc)?
                * fock_projector_overlap(u2, v2, y, trunc)?;
        }
    }
    Ok(total)
}

/// Literal permutation sums over per-PLS elements, classified by the
/// parities of the psi counts on the bra and ket sides:
/// `[even/even, even/odd, odd/even, odd/odd]`.
///
/// This is the recurrence-free definition the transfer-matrix chain must
/// reproduce component by component.
pub fn block_class_sums(
    table: &PovmTable,
    outcomes: &[OutcomePair],
    sign: Sign,
) -> Result<[f64; 4]> {
    let m = outcomes.len();
    // 4^m subset pairs; m = 5 (1024 pairs) is still needed by the n*m <= 6
    // logical enumeration.
    if m > 5 {
        return Err(Error::Domain(format!("permutation enumeration capped at m <= 5, got {m}")));
    }
    let a2 = table.alpha * table.alpha;
    let s = match sign {
        Sign::Plus => 2.0 * (1.0 + (-4.0 * a2).exp()),
        Sign::Minus => 2.0 * (1.0 - (-4.0 * a2).exp()),
    };
    // unnormalized-basis elements per PLS: [phi-phi, phi-psi, psi-psi]
    let elems: Vec<[f64; 3]> = outcomes
        .iter()
        .map(|&(x, y)| {
            let e = table.elements(x, y);
            match sign {
                Sign::Plus => [s * e.m11_plus, s * e.m12_plus, s * e.m22_plus],
                Sign::Minus => [s * e.m11_minus, s * e.m12_minus, s * e.m22_minus],
            }
        })
        .collect();
    let mut cls = [0.0f64; 4];
    for bra_mask in 0u32..(1 << m) {
        for ket_mask in 0u32..(1 << m) {
            let mut prod = 1.0;
            for (k, e) in elems.iter().enumerate() {
                let bra_psi = bra_mask >> k & 1 == 1;
                let ket_psi = ket_mask >> k & 1 == 1;
                prod *= match (bra_psi, ket_psi) {
                    (false, false) => e[0],
                    (true, true) => e[2],
                    _ => e[1],
                };
            }
            let i = (bra_mask.count_ones() % 2 * 2 + ket_mask.count_ones() % 2) as usize;
            cls[i] += prod;
        }
    }
    Ok(cls)
}

/// Pr(outcome sequence | block Bell state) from the permutation sums.
pub fn oracle_block_probability(
    params: &CodeParams,
    table: &PovmTable,
    outcomes: &[OutcomePair],
    b1: BellState,
) -> Result<f64> {
    let cls = block_class_sums(table, outcomes, b1.sign)?;
    let consts = encoding_constants(params);
    let c2 = match b1.sign {
        Sign::Plus => consts.c_plus * consts.c_plus,
        Sign::Minus => consts.c_minus * consts.c_minus,
    };
    let bn = block_norm_constant(params.alpha, params.m);
    let comp = match b1.letter {
        Letter::Phi => cls[0],
        Letter::Psi => cls[3],
    };
    Ok(bn * bn / (2.0 * c2) * comp)
}

/// Decodes a base-9 sequence index into outcome pairs (least significant
/// digit first).
pub fn sequence_from_index(mut index: usize, len: usize) -> Vec<OutcomePair> {
    let mut out = Vec::with_capacity(len);
    for _ in 0..len {
        let d = index % 9;
        out.push((
            PnpdOutcome::from_code((d / 3) as u8).unwrap(),
            PnpdOutcome::from_code((d % 3) as u8).unwrap(),
        ));
        index /= 9;
    }
    out
}

/// Exhaustive block distribution per Bell state (indexed by
/// `BellState::index()`), sequence order given by `sequence_from_index`.
pub fn enumerate_block_distribution(
    params: &CodeParams,
    table: &PovmTable,
) -> Result<[Vec<f64>; 4]> {
    let m = params.m;
    if m > 4 {
        return Err(Error::Domain(format!("block enumeration capped at m <= 4, got {m}")));
    }
    let count = 9usize.pow(m as u32);
    let mut out = [vec![0.0; count], vec![0.0; count], vec![0.0; count], vec![0.0; count]];
    for i in 0..count {
        let seq = sequence_from_index(i, m);
        for b in BellState::ALL {
            out[b.index()][i] = oracle_block_probability(params, table, &seq, b)?;
        }
    }
    Ok(out)
}

/// Exhaustive logical distribution by literal block sign-assignment sums
/// over permutation-sum block probabilities. Matrices indexed base-9 with
/// blocks as consecutive digit groups, least significant first.
pub fn enumerate_logical_distribution(
    params: &CodeParams,
    table: &PovmTable,
) -> Result<[Vec<f64>; 4]> {
    let (n, m) = (params.n, params.m);
    if n * m > 6 {
        return Err(Error::Domain(format!(
            "exhaustive logical enumeration capped at n*m <= 6, got {}",
            n * m
        )));
    }
    let consts = encoding_constants(params);
    let c2 = [consts.c_plus * consts.c_plus, consts.c_minus * consts.c_minus];
    let nt2 = [
        consts.ntilde_plus * consts.ntilde_plus,
        consts.ntilde_minus * consts.ntilde_minus,
    ];

    // Per-row block probabilities for both letters and both signs.
    let rows = 9usize.pow(m as u32);
    let mut row_prob = vec![[0.0f64; 4]; rows];
    for (i, probs) in row_prob.iter_mut().enumerate() {
        let seq = sequence_from_index(i, m);
        for b in BellState::ALL {
            probs[b.index()] = oracle_block_probability(params, table, &seq, b)?;
        }
    }

    let count = 9usize.pow((n * m) as u32);
    let mut out = [vec![0.0; count], vec![0.0; count], vec![0.0; count], vec![0.0; count]];
    let row_base = rows;
    for idx in 0..count {
        let mut row_idx = [0usize; 6];
        let mut k = idx;
        for r in row_idx.iter_mut().take(n) {
            *r = k % row_base;
            k /= row_base;
        }
        for b2 in BellState::ALL {
            let want_parity: usize = match b2.sign {
                Sign::Plus => 0,
                Sign::Minus => 1,
            };
            let letter_offset = match b2.letter {
                Letter::Phi => 0,
                Letter::Psi => 2,
            };
            let mut total = 0.0;
            for assign in 0u32..(1 << n) {
                if assign.count_ones() as usize % 2 != want_parity {
                    continue;
                }
                let mut prod = 1.0;
                for (block, &ri) in row_idx.iter().take(n).enumerate() {
                    let s = (assign >> block & 1) as usize; // 0 = plus, 1 = minus
                    prod *= c2[s] * row_prob[ri][letter_offset + s];
                }
                total += prod;
            }
            out[b2.index()][idx] = nt2[want_parity] * total;
        }
    }
    Ok(out)
}

/// Builds the outcome matrix for a base-9 matrix index (see
/// `enumerate_logical_distribution` for the digit convention).
pub fn matrix_from_index(index: usize, n: usize, m: usize) -> OutcomeMatrix {
    let rows = 9usize.pow(m as u32);
    let mut entries = Vec::with_capacity(n * m);
    let mut k = index;
    for _ in 0..n {
        entries.extend(sequence_from_index(k % rows, m));
        k /= rows;
    }
    OutcomeMatrix::new(n, m, entries).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::{block_vector, TransferSet};
    use crate::povm::build_povm_table;
    use crate::types::{all_outcome_pairs, PnpdOutcome::*};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn vacuum_overlap_exact() {
        let t = FockTruncation::default_for_alpha(1.5);
        for (b, bp) in [(0.7, 0.7), (1.2, -0.4), (2.0, 1.1)] {
            let got = fock_projector_overlap(b, bp, Zero, &t).unwrap();
            let expect = (-(b * b + bp * bp) / 2.0f64).exp();
            assert!((got - expect).abs() < 1e-15);
        }
    }

    #[test]
    fn parity_projectors_complete() {
        let t = FockTruncation::default_for_alpha(2.0);
        for b in [0.3, 1.0, 2.0, 2.8] {
            let total: f64 = PnpdOutcome::ALL
                .iter()
                .map(|&x| fock_projector_overlap(b, b, x, &t).unwrap())
                .sum();
            assert!((total - 1.0).abs() < 1e-12, "beta {b}: {total}");
        }
    }

    #[test]
    fn odd_projector_matches_sinh() {
        let t = FockTruncation::default_for_alpha(1.0);
        let b = std::f64::consts::SQRT_2;
        let got = fock_projector_overlap(b, -b, Odd, &t).unwrap();
        let expect = (-(2.0 * b * b) / 2.0f64).exp() * (-b * b).sinh();
        assert!((got - expect).abs() < 1e-10 * expect.abs());
    }

    #[test]
    fn truncation_guard_fires() {
        let t = FockTruncation { n_max: 5 };
        let err = fock_projector_overlap(2.0 * std::f64::consts::SQRT_2, 0.0, Zero, &t);
        assert!(matches!(err, Err(Error::Truncation(_))));
    }

    #[test]
    fn cross_sign_elements_vanish() {
        let t = FockTruncation::default_for_alpha(1.0);
        let loss = LossParams::new(0.93, 0.88).unwrap();
        for (x, y) in all_outcome_pairs() {
            for (b, bp) in [
                (BellState::PHI_PLUS, BellState::PSI_MINUS),
                (BellState::PHI_MINUS, BellState::PSI_PLUS),
                (BellState::PHI_PLUS, BellState::PHI_MINUS),
                (BellState::PSI_PLUS, BellState::PSI_MINUS),
            ] {
                let v = oracle_povm_element(1.0, loss, x, y, b, bp, &t).unwrap();
                assert!(v.abs() < 1e-12, "({x:?},{y:?}) {b}->{bp}: {v}");
            }
        }
    }

    #[test]
    fn lossless_double_click_vanishes() {
        let t = FockTruncation::default_for_alpha(1.0);
        let v = oracle_povm_element(
            1.0,
            LossParams::LOSSLESS,
            Odd,
            Odd,
            BellState::PHI_PLUS,
            BellState::PHI_PLUS,
            &t,
        )
        .unwrap();
        assert!(v.abs() < 1e-12);
    }

    fn closed_element(table: &PovmTable, x: PnpdOutcome, y: PnpdOutcome, which: usize) -> f64 {
        let e = table.elements(x, y);
        [e.m11_plus, e.m11_minus, e.m22_plus, e.m22_minus, e.m12_plus, e.m12_minus][which]
    }

    #[test]
    fn closed_form_matches_oracle_at_fig2_point() {
        let alpha = 1.0;
        let loss = LossParams::new(0.99, 0.99 * (-1.0f64 / 22.0).exp()).unwrap();
        let table = build_povm_table(alpha, loss).unwrap();
        let t = FockTruncation::default_for_alpha(alpha);
        let pairs = [
            (BellState::PHI_PLUS, BellState::PHI_PLUS),
            (BellState::PHI_MINUS, BellState::PHI_MINUS),
            (BellState::PSI_PLUS, BellState::PSI_PLUS),
            (BellState::PSI_MINUS, BellState::PSI_MINUS),
            (BellState::PHI_PLUS, BellState::PSI_PLUS),
            (BellState::PHI_MINUS, BellState::PSI_MINUS),
        ];
        for (x, y) in all_outcome_pairs() {
            for (which, (b, bp)) in pairs.iter().enumerate() {
                let reference = oracle_povm_element(alpha, loss, x, y, *b, *bp, &t).unwrap();
                let closed = closed_element(&table, x, y, which);
                let tol = 1e-8 * reference.abs().max(closed.abs()) + 1e-12;
                assert!(
                    (closed - reference).abs() <= tol,
                    "({x:?},{y:?}) elem {which}: closed {closed} vs oracle {reference}"
                );
            }
        }
    }

    #[test]
    fn class_sums_match_transfer_chain() {
        let alpha = 1.0;
        let loss = LossParams::new(0.95, 0.88).unwrap();
        let table = build_povm_table(alpha, loss).unwrap();
        let ts = TransferSet::new(&table);
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for m in [1usize, 2, 3, 4] {
            for _ in 0..50 {
                let seq: Vec<OutcomePair> = (0..m)
                    .map(|_| {
                        (
                            PnpdOutcome::from_code(rng.random_range(0..3)).unwrap(),
                            PnpdOutcome::from_code(rng.random_range(0..3)).unwrap(),
                        )
                    })
                    .collect();
                for sign in [Sign::Plus, Sign::Minus] {
                    let cls = block_class_sums(&table, &seq, sign).unwrap();
                    let bv = block_vector(&ts, &seq, sign);
                    let scale = bv.log_scale.exp();
                    for i in 0..4 {
                        let chained = bv.v[i] * scale;
                        let tol = 1e-10 * cls[i].abs().max(chained.abs()) + 1e-300;
                        assert!(
                            (chained - cls[i]).abs() <= tol,
                            "m={m} {sign:?} component {i}: {chained} vs {}",
                            cls[i]
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn block_enumeration_m1_reduces_to_povm() {
        let params = CodeParams::new(1, 1, 1.2, 1).unwrap();
        let loss = LossParams::new(0.9, 0.98).unwrap();
        let table = build_povm_table(1.2, loss).unwrap();
        let dist = enumerate_block_distribution(&params, &table).unwrap();
        for b in BellState::ALL {
            for (i, (x, y)) in all_outcome_pairs().iter().enumerate() {
                // sequence index i encodes pair (x, y) at digit 0: 3x + y
                let idx = 3 * x.code() as usize + y.code() as usize;
                let expect = table.elements(*x, *y).diagonal(b);
                assert!((dist[b.index()][idx] - expect).abs() < 1e-14, "{i}");
            }
        }
    }

    #[test]
    fn block_enumeration_mass_one() {
        let params = CodeParams::new(1, 3, 1.2, 1).unwrap();
        let loss = LossParams::new(0.95, 0.95).unwrap();
        let table = build_povm_table(1.2, loss).unwrap();
        let dist = enumerate_block_distribution(&params, &table).unwrap();
        for b in BellState::ALL {
            let total: f64 = dist[b.index()].iter().sum();
            assert!((total - 1.0).abs() < 1e-10, "{b}: {total}");
        }
    }

    #[test]
    fn logical_enumeration_mass_one_and_guard() {
        let loss = LossParams::new(0.95, 0.99).unwrap();
        let table = build_povm_table(1.0, loss).unwrap();
        for (n, m) in [(1usize, 1usize), (3, 1), (1, 3)] {
            let params = CodeParams::new(n, m, 1.0, 1).unwrap();
            let dist = enumerate_logical_distribution(&params, &table).unwrap();
            for b in BellState::ALL {
                let total: f64 = dist[b.index()].iter().sum();
                assert!((total - 1.0).abs() < 1e-10, "(n={n},m={m}) {b}: {total}");
            }
        }
        let params = CodeParams::new(3, 3, 1.0, 1).unwrap();
        assert!(enumerate_logical_distribution(&params, &table).is_err());
    }
}
