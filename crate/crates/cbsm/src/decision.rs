//! Decision logic for both CBSM schemes and the per-trial cost accounting.
//!
//! Unoptimized scheme: every PLS gets a full BSM; block signs by majority
//! vote, block letters by the parity of the psi-letter count, logical sign by
//! the parity of the minus-sign count, logical letter by majority over the
//! non-failed blocks.
//!
//! Hardware-efficient scheme: blocks are measured one by one until j
//! non-failed letters are collected, then the remaining blocks are read
//! sign-only; within a block, full BSMs stop early once a failure makes the
//! letter unrecoverable. Each full BSM costs 1, each sign-only BSM 1/2.

use serde::Serialize;

use crate::physbsm::{interpret_full, interpret_sign_only, PhysicalResult};
use crate::types::{BellState, CodeParams, Letter, OutcomeMatrix, OutcomePair, Sign};

/// Letter outcome of one block-level measurement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BlockOutcome {
    /// Full measurement with all letters recovered.
    Letter(Letter),
    /// Full measurement aborted by a physical failure.
    Failed,
    /// Sign-only partial measurement; the letter was never attempted.
    SignOnly,
}

/// Result of measuring one block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BlockDecision {
    pub sign: Sign,
    pub outcome: BlockOutcome,
    /// 1-based index of the PLS that clinched the sign majority.
    pub d: usize,
    /// 1-based index of the first failed physical BSM, when one occurred.
    pub f: Option<usize>,
    pub n_full: u32,
    pub n_signonly: u32,
}

/// Mode of a block-level measurement in the hardware-efficient scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockMode {
    Full,
    SignOnly,
}

/// Final outcome of a logical-level CBSM: a Bell state, or a failure whose
/// sign is still determined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CbsmOutcome {
    Decided(BellState),
    Failed(Sign),
}

/// Result of a logical-level CBSM with its cost tally.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LogicalDecision {
    pub outcome: CbsmOutcome,
    pub n_full: u32,
    pub n_signonly: u32,
    pub blocks: Vec<BlockDecision>,
}

impl LogicalDecision {
    /// Cost per Definition of the cost function: N_full + N_signonly / 2.
    pub fn cost(&self) -> f64 {
        self.n_full as f64 + 0.5 * self.n_signonly as f64
    }

    /// Cost in exact half units.
    pub fn cost_half_units(&self) -> u64 {
        2 * self.n_full as u64 + self.n_signonly as u64
    }
}

/// Classification of a trial against the initial Bell state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Category {
    Success,
    XError,
    YError,
    ZError,
    Failure,
}

struct SignRace {
    need: u32,
    plus: u32,
    minus: u32,
    d: Option<usize>,
}

impl SignRace {
    fn new(m: usize) -> SignRace {
        SignRace { need: ((m + 1) / 2) as u32, plus: 0, minus: 0, d: None }
    }

    fn vote(&mut self, index: usize, sign: Sign) {
        match sign {
            Sign::Plus => self.plus += 1,
            Sign::Minus => self.minus += 1,
        }
        if self.d.is_none() && (self.plus >= self.need || self.minus >= self.need) {
            self.d = Some(index);
        }
    }

    fn majority(&self) -> Sign {
        if self.plus >= self.need {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }
}

/// Block decision of the unoptimized scheme: all m PLSs fully measured.
pub fn unoptimized_block(results: &[PhysicalResult]) -> BlockDecision {
    let m = results.len();
    let mut race = SignRace::new(m);
    let mut psi_count = 0u32;
    let mut first_failure = None;
    for (k, r) in results.iter().enumerate() {
        race.vote(k + 1, r.sign);
        match r.letter {
            Some(Letter::Psi) => psi_count += 1,
            Some(Letter::Phi) => {}
            None => {
                if first_failure.is_none() {
                    first_failure = Some(k + 1);
                }
            }
        }
    }
    let outcome = if first_failure.is_some() {
        BlockOutcome::Failed
    } else if psi_count % 2 == 0 {
        BlockOutcome::Letter(Letter::Phi)
    } else {
        BlockOutcome::Letter(Letter::Psi)
    };
    BlockDecision {
        sign: race.majority(),
        outcome,
        d: race.d.expect("odd m always clinches a sign majority"),
        f: first_failure,
        n_full: m as u32,
        n_signonly: 0,
    }
}

fn vote_letters(letters: &[Letter]) -> Option<Letter> {
    let psi = letters.iter().filter(|&&l| l == Letter::Psi).count();
    let phi = letters.len() - psi;
    match phi.cmp(&psi) {
        std::cmp::Ordering::Greater => Some(Letter::Phi),
        std::cmp::Ordering::Less => Some(Letter::Psi),
        std::cmp::Ordering::Equal => None,
    }
}

fn logical_sign(blocks: &[BlockDecision]) -> Sign {
    let minus = blocks.iter().filter(|b| b.sign == Sign::Minus).count();
    if minus % 2 == 0 {
        Sign::Plus
    } else {
        Sign::Minus
    }
}

/// Logical decision of the unoptimized scheme over n block decisions.
pub fn unoptimized_logical(blocks: &[BlockDecision]) -> LogicalDecision {
    let sign = logical_sign(blocks);
    let letters: Vec<Letter> = blocks
        .iter()
        .filter_map(|b| match b.outcome {
            BlockOutcome::Letter(l) => Some(l),
            _ => None,
        })
        .collect();
    let outcome = match vote_letters(&letters) {
        Some(letter) if !letters.is_empty() => CbsmOutcome::Decided(BellState { letter, sign }),
        _ => CbsmOutcome::Failed(sign),
    };
    LogicalDecision {
        outcome,
        n_full: blocks.iter().map(|b| b.n_full).sum(),
        n_signonly: blocks.iter().map(|b| b.n_signonly).sum(),
        blocks: blocks.to_vec(),
    }
}

/// Runs the unoptimized scheme on a full outcome matrix.
pub fn unoptimized_decide(matrix: &OutcomeMatrix) -> LogicalDecision {
    let blocks: Vec<BlockDecision> = (0..matrix.n())
        .map(|i| {
            let results: Vec<PhysicalResult> =
                matrix.row(i).iter().map(|&(x, y)| interpret_full(x, y)).collect();
            unoptimized_block(&results)
        })
        .collect();
    unoptimized_logical(&blocks)
}

/// Block measurement of the hardware-efficient scheme.
///
/// Full mode walks the row left to right with full BSMs. A failure at index f
/// stops the walk (letter unrecoverable); if the sign majority is still open
/// the walk continues with sign-only BSMs until it is clinched. Sign-only
/// mode reads sign-only BSMs up to the clinch index d.
pub fn hardware_efficient_block(row: &[OutcomePair], mode: BlockMode) -> BlockDecision {
    let m = row.len();
    let mut race = SignRace::new(m);

    if mode == BlockMode::SignOnly {
        let mut used = 0u32;
        for (k, &(x, y)) in row.iter().enumerate() {
            used += 1;
            race.vote(k + 1, interpret_sign_only(x, y).sign);
            if race.d.is_some() {
                break;
            }
        }
        return BlockDecision {
            sign: race.majority(),
            outcome: BlockOutcome::SignOnly,
            d: race.d.expect("odd m always clinches a sign majority"),
            f: None,
            n_full: 0,
            n_signonly: used,
        };
    }

    let mut psi_count = 0u32;
    for (k, &(x, y)) in row.iter().enumerate() {
        let r = interpret_full(x, y);
        race.vote(k + 1, r.sign);
        match r.letter {
            Some(Letter::Psi) => psi_count += 1,
            Some(Letter::Phi) => {}
            None => {
                // First failure: the block letter is lost.
                let f = k + 1;
                let n_full = (k + 1) as u32;
                let mut n_signonly = 0u32;
                if race.d.is_none() {
                    // Case 3: keep reading signs until the majority clinches.
                    for (k2, &(x2, y2)) in row.iter().enumerate().skip(k + 1) {
                        n_signonly += 1;
                        race.vote(k2 + 1, interpret_sign_only(x2, y2).sign);
                        if race.d.is_some() {
                            break;
                        }
                    }
                }
                return BlockDecision {
                    sign: race.majority(),
                    outcome: BlockOutcome::Failed,
                    d: race.d.expect("odd m always clinches a sign majority"),
                    f: Some(f),
                    n_full,
                    n_signonly,
                };
            }
        }
    }
    // Case 1: no failures, all m full BSMs performed.
    BlockDecision {
        sign: race.majority(),
        outcome: if psi_count % 2 == 0 {
            BlockOutcome::Letter(Letter::Phi)
        } else {
            BlockOutcome::Letter(Letter::Psi)
        },
        d: race.d.expect("odd m always clinches a sign majority"),
        f: None,
        n_full: m as u32,
        n_signonly: 0,
    }
}

/// Logical CBSM of the hardware-efficient scheme: full block measurements
/// until j non-failed letters are collected, sign-only afterwards.
pub fn hardware_efficient_logical(
    matrix: &OutcomeMatrix,
    params: &CodeParams,
) -> LogicalDecision {
    let mut blocks = Vec::with_capacity(matrix.n());
    let mut letters = Vec::with_capacity(params.j);
    for i in 0..matrix.n() {
        let mode =
            if letters.len() < params.j { BlockMode::Full } else { BlockMode::SignOnly };
        let b = hardware_efficient_block(matrix.row(i), mode);
        if let BlockOutcome::Letter(l) = b.outcome {
            letters.push(l);
        }
        blocks.push(b);
    }
    let sign = logical_sign(&blocks);
    let outcome = match vote_letters(&letters) {
        Some(letter) if !letters.is_empty() => CbsmOutcome::Decided(BellState { letter, sign }),
        _ => CbsmOutcome::Failed(sign),
    };
    LogicalDecision {
        outcome,
        n_full: blocks.iter().map(|b| b.n_full).sum(),
        n_signonly: blocks.iter().map(|b| b.n_signonly).sum(),
        blocks,
    }
}

/// Allocation-free variant of [`hardware_efficient_logical`] for the Monte
/// Carlo hot path: entries hold n*m pairs row-major, n is implied.
/// Returns (outcome, full BSM count, sign-only BSM count).
pub fn decide_hardware_efficient(
    entries: &[OutcomePair],
    m: usize,
    j: usize,
) -> (CbsmOutcome, u32, u32) {
    let n = entries.len() / m;
    let mut minus_blocks = 0u32;
    let mut phi = 0u32;
    let mut psi = 0u32;
    let mut n_full = 0u32;
    let mut n_signonly = 0u32;
    for i in 0..n {
        let row = &entries[i * m..(i + 1) * m];
        let mode = if (phi + psi) < j as u32 { BlockMode::Full } else { BlockMode::SignOnly };
        let b = hardware_efficient_block(row, mode);
        match b.outcome {
            BlockOutcome::Letter(Letter::Phi) => phi += 1,
            BlockOutcome::Letter(Letter::Psi) => psi += 1,
            _ => {}
        }
        if b.sign == Sign::Minus {
            minus_blocks += 1;
        }
        n_full += b.n_full;
        n_signonly += b.n_signonly;
    }
    let sign = if minus_blocks % 2 == 0 { Sign::Plus } else { Sign::Minus };
    let outcome = match phi.cmp(&psi) {
        std::cmp::Ordering::Greater => {
            CbsmOutcome::Decided(BellState { letter: Letter::Phi, sign })
        }
        std::cmp::Ordering::Less => CbsmOutcome::Decided(BellState { letter: Letter::Psi, sign }),
        std::cmp::Ordering::Equal => CbsmOutcome::Failed(sign),
    };
    (outcome, n_full, n_signonly)
}

/// Compares a raw outcome to the initial Bell state.
pub fn classify_outcome(initial: BellState, outcome: CbsmOutcome) -> Category {
    match outcome {
        CbsmOutcome::Failed(_) => Category::Failure,
        CbsmOutcome::Decided(found) => {
            let letter_ok = found.letter == initial.letter;
            let sign_ok = found.sign == initial.sign;
            match (letter_ok, sign_ok) {
                (true, true) => Category::Success,
                (false, true) => Category::XError,
                (true, false) => Category::ZError,
                (false, false) => Category::YError,
            }
        }
    }
}

/// Compares a decision to the initial Bell state.
pub fn classify(initial: BellState, decision: &LogicalDecision) -> Category {
    classify_outcome(initial, decision.outcome)
}
