//! The `oracle-check` command: runs the brute-force validators against the
//! closed-form implementation and reports violations.

use anyhow::Result;
use cbsm::dist::{block_vector, logical_joint_scaled, TransferSet};
use cbsm::oracle::{
    block_class_sums, enumerate_logical_distribution, matrix_from_index, oracle_povm_element,
    FockTruncation,
};
use cbsm::povm::build_povm_table;
use cbsm::sampler::{SamplerConsts, SamplerState};
use cbsm::types::{all_outcome_pairs, BellState, CodeParams, LossParams, OutcomeMatrix, Sign};
use serde::Serialize;

#[derive(Debug, Serialize)]
pub struct Violation {
    pub check: String,
    pub tuple: String,
    pub got: f64,
    pub want: f64,
}

#[derive(Debug, Serialize)]
pub struct OracleReport {
    pub level: String,
    pub checks_run: usize,
    pub violations: Vec<Violation>,
}

fn povm_grid(level: &str) -> (Vec<f64>, Vec<f64>) {
    match level {
        "full" => (vec![0.5, 1.0, 1.6, 2.0], vec![0.8, 0.95, 0.99, 1.0]),
        _ => (vec![1.0, 1.6], vec![0.95, 0.99]),
    }
}

pub fn run(level: &str, seed: u64) -> Result<OracleReport> {
    let mut report =
        OracleReport { level: level.to_string(), checks_run: 0, violations: Vec::new() };
    let push = |report: &mut OracleReport, check: &str, tuple: String, got: f64, want: f64, tol: f64| {
        report.checks_run += 1;
        if (got - want).abs() > tol {
            report.violations.push(Violation { check: check.to_string(), tuple, got, want });
        }
    };

    // POVM closed forms vs truncated-Fock oracle, symmetric and both
    // asymmetric orientations.
    let (alphas, etas) = povm_grid(level);
    let names = ["m11+", "m11-", "m22+", "m22-", "m12+", "m12-"];
    for &alpha in &alphas {
        let trunc = FockTruncation::default_for_alpha(alpha);
        for &eta in &etas {
            let geometries = [
                LossParams::new(eta, eta)?,
                LossParams::new(eta, eta * (-1.0f64 / 22.0).exp())?,
                LossParams::new(eta * (-1.0f64 / 22.0).exp(), eta)?,
            ];
            for loss in geometries {
                let table = build_povm_table(alpha, loss)?;
                for (x, y) in all_outcome_pairs() {
                    let e = table.elements(x, y);
                    let closed =
                        [e.m11_plus, e.m11_minus, e.m22_plus, e.m22_minus, e.m12_plus, e.m12_minus];
                    let states = [
                        (BellState::PHI_PLUS, BellState::PHI_PLUS),
                        (BellState::PHI_MINUS, BellState::PHI_MINUS),
                        (BellState::PSI_PLUS, BellState::PSI_PLUS),
                        (BellState::PSI_MINUS, BellState::PSI_MINUS),
                        (BellState::PHI_PLUS, BellState::PSI_PLUS),
                        (BellState::PHI_MINUS, BellState::PSI_MINUS),
                    ];
                    for (k, (b, bp)) in states.iter().enumerate() {
                        let want = oracle_povm_element(alpha, loss, x, y, *b, *bp, &trunc)?;
                        let tol = 1e-8 * want.abs().max(closed[k].abs()) + 1e-12;
                        push(
                            &mut report,
                            "povm-element",
                            format!(
                                "alpha={alpha}, eta1={:.4}, eta2={:.4}, x={}, y={}, {}",
                                loss.eta1,
                                loss.eta2,
                                x.code(),
                                y.code(),
                                names[k]
                            ),
                            closed[k],
                            want,
                            tol,
                        );
                    }
                }
            }
        }
    }

    // Permutation sums vs transfer-matrix chains.
    let loss = LossParams::new(0.92, 0.98)?;
    let table = build_povm_table(1.1, loss)?;
    let ts = TransferSet::new(&table);
    let m_values: &[usize] = if level == "full" { &[1, 2, 3, 4] } else { &[1, 3] };
    let mut lcg = seed | 1;
    let mut next = || {
        lcg = lcg.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (lcg >> 33) as usize
    };
    for &m in m_values {
        let reps = if level == "full" { 50 } else { 15 };
        for _ in 0..reps {
            let seq: Vec<_> = (0..m)
                .map(|_| {
                    let d = next() % 9;
                    (
                        cbsm::PnpdOutcome::from_code((d / 3) as u8).unwrap(),
                        cbsm::PnpdOutcome::from_code((d % 3) as u8).unwrap(),
                    )
                })
                .collect();
            for sign in [Sign::Plus, Sign::Minus] {
                let cls = block_class_sums(&table, &seq, sign)?;
                let bv = block_vector(&ts, &seq, sign);
                let scale = bv.log_scale.exp();
                for i in 0..4 {
                    let got = bv.v[i] * scale;
                    let tol = 1e-10 * cls[i].abs().max(got.abs()) + 1e-290;
                    push(
                        &mut report,
                        "block-permutation-sum",
                        format!("m={m}, sign={sign:?}, component={i}, seq={seq:?}"),
                        got,
                        cls[i],
                        tol,
                    );
                }
            }
        }
    }

    // Exhaustive logical distributions: normalization and agreement with
    // the transfer-matrix joint.
    let shapes: &[(usize, usize)] =
        if level == "full" { &[(1, 1), (3, 1), (1, 3), (5, 1)] } else { &[(1, 1), (3, 1), (1, 3)] };
    for &(n, m) in shapes {
        let params = CodeParams::new(n, m, 1.0, 1)?;
        let table = build_povm_table(1.0, LossParams::new(0.95, 0.99)?)?;
        let ts = TransferSet::new(&table);
        let dist = enumerate_logical_distribution(&params, &table)?;
        for b in BellState::ALL {
            let total: f64 = dist[b.index()].iter().sum();
            push(
                &mut report,
                "logical-normalization",
                format!("n={n}, m={m}, state={b}"),
                total,
                1.0,
                1e-10,
            );
        }
        let count = dist[0].len();
        let stride = (count / 64).max(1);
        for idx in (0..count).step_by(stride) {
            let matrix = matrix_from_index(idx, n, m);
            for b in BellState::ALL {
                let got =
                    cbsm::dist::logical_joint_probability(&params, &ts, &matrix, b)?;
                let want = dist[b.index()][idx];
                let tol = 1e-10 * want.abs().max(got.abs()) + 1e-290;
                push(
                    &mut report,
                    "logical-enumeration",
                    format!("n={n}, m={m}, state={b}, matrix={idx}"),
                    got,
                    want,
                    tol,
                );
            }
        }
    }

    // Sampler chain rule against the exact joint.
    let chain_shapes: &[(usize, usize)] =
        if level == "full" { &[(3, 3), (1, 5), (5, 1)] } else { &[(3, 3)] };
    for &(n, m) in chain_shapes {
        let params = CodeParams::new(n, m, 1.0, 1)?;
        let table = build_povm_table(1.0, LossParams::new(0.95, 0.99)?)?;
        let consts = SamplerConsts::new(&params, &table);
        let ts = TransferSet::new(&table);
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let reps = if level == "full" { 100 } else { 25 };
        for rep in 0..reps {
            let b = BellState::from_index(rep % 4);
            let mut state = SamplerState::new(&consts, b);
            let mut entries = Vec::new();
            let mut log_prod = 0.0;
            while !state.finished() {
                let (pair, cond) = state.step(&mut rng)?;
                entries.push(pair);
                log_prod += cond.ln();
            }
            let matrix = OutcomeMatrix::new(n, m, entries)?;
            let (mant, log) = logical_joint_scaled(&params, &ts, &matrix, b)?;
            push(
                &mut report,
                "sampler-chain-rule",
                format!("n={n}, m={m}, state={b}, rep={rep}"),
                log_prod,
                mant.ln() + log,
                1e-9,
            );
        }
    }

    Ok(report)
}
