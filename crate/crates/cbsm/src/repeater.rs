//! Repeater-chain performance metrics and parameter sweeps.
//!
//! A chain of total length L with station interval L0 applies one CBSM per
//! station. The secret-key figure of merit is the expected key length per
//! station time slot, Rt0 = max[P_s (1 - 2h(Q)), 0], with P_s the no-failure
//! probability over the chain and Q the average QBER accumulated over L/L0
//! stations (used as a real exponent, no rounding). The effective total cost
//! is Q_tot = (C_exp / Rt0) (L / L0), infinite when Rt0 = 0.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::montecarlo::{estimate, run_trials, EstimateSet};
use crate::types::{CodeParams, LossParams};

/// Geometry and hardware parameters of the repeater chain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RepeaterParams {
    /// Total transmission distance in km.
    pub l_total: f64,
    /// Station interval in km.
    pub l0: f64,
    /// Internal photon survival rate of each station.
    pub eta0: f64,
    /// Fiber attenuation length in km.
    pub l_att: f64,
}

pub const DEFAULT_ATTENUATION_KM: f64 = 22.0;

impl RepeaterParams {
    pub fn new(l_total: f64, l0: f64, eta0: f64, l_att: f64) -> Result<RepeaterParams> {
        if !(l_total > 0.0 && l0 > 0.0 && l_att > 0.0) {
            return Err(Error::Domain(format!(
                "lengths must be positive: L={l_total}, L0={l0}, Latt={l_att}"
            )));
        }
        if l0 > l_total {
            return Err(Error::Domain(format!("L0 = {l0} exceeds L = {l_total}")));
        }
        if !(eta0 > 0.0 && eta0 <= 1.0) {
            return Err(Error::Domain(format!("eta0 must lie in (0, 1], got {eta0}")));
        }
        Ok(RepeaterParams { l_total, l0, eta0, l_att })
    }
}

/// Survival rates seen by the CBSM inside one station: the incoming qubit
/// traveled L0 of fiber on top of the internal loss, the local Bell half
/// only suffers the internal loss.
pub fn station_loss(rp: &RepeaterParams) -> LossParams {
    LossParams {
        eta1: rp.eta0 * (-rp.l0 / rp.l_att).exp(),
        eta2: rp.eta0,
    }
}

/// Binary entropy with the continuous extensions h(0) = h(1) = 0.
pub fn binary_entropy(q: f64) -> f64 {
    if q <= 0.0 || q >= 1.0 {
        0.0
    } else {
        -q * q.log2() - (1.0 - q) * (1.0 - q).log2()
    }
}

/// Chain-level performance record. `q_tot` is `None` when Rt0 = 0 (the
/// effective total cost diverges).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PerfMetrics {
    pub p_s: f64,
    pub q_x: f64,
    pub q_z: f64,
    pub q: f64,
    pub rt0: f64,
    pub rt0_ci95: f64,
    pub q_tot: Option<f64>,
    pub q_tot_ci95: Option<f64>,
}

struct RateVec {
    p_i: f64,
    p_x: f64,
    p_y: f64,
    p_z: f64,
    p_fail: f64,
}

fn rt0_of(r: &RateVec, hops: f64) -> (f64, f64, f64, f64) {
    let p_s = (1.0 - r.p_fail).max(0.0).powf(hops);
    let denom = r.p_i + r.p_x + r.p_z + r.p_y;
    let (q_x, q_z) = if denom > 0.0 {
        let rx = (r.p_i - r.p_x + r.p_z - r.p_y) / denom;
        let rz = (r.p_i + r.p_x - r.p_z - r.p_y) / denom;
        (
            0.5 * (1.0 - rx.max(0.0).powf(hops)),
            0.5 * (1.0 - rz.max(0.0).powf(hops)),
        )
    } else {
        (0.5, 0.5)
    };
    let q = 0.5 * (q_x + q_z);
    let rt0 = (p_s * (1.0 - 2.0 * binary_entropy(q))).max(0.0);
    (p_s, q_x, q_z, rt0)
}

/// Evaluates the chain metrics from single-station estimates.
///
/// Confidence intervals come from the delta method on the multinomial
/// category covariance plus the independent cost variance.
pub fn performance(est: &EstimateSet, rp: &RepeaterParams) -> PerfMetrics {
    let hops = rp.l_total / rp.l0;
    let rates = RateVec {
        p_i: est.p_i.value,
        p_x: est.p_x.value,
        p_y: est.p_y.value,
        p_z: est.p_z.value,
        p_fail: est.p_fail.value,
    };
    let (p_s, q_x, q_z, rt0) = rt0_of(&rates, hops);
    let q = 0.5 * (q_x + q_z);
    let c_exp = est.c_exp.value;
    let q_tot = if rt0 > 0.0 { Some(c_exp / rt0 * hops) } else { None };

    // Delta method: numeric gradient of rt0 over the five category
    // probabilities, multinomial covariance, plus the cost term for q_tot.
    let n = est.n_trials.max(1) as f64;
    let p = [rates.p_i, rates.p_x, rates.p_y, rates.p_z, rates.p_fail];
    let f = |v: &[f64; 5]| {
        rt0_of(&RateVec { p_i: v[0], p_x: v[1], p_y: v[2], p_z: v[3], p_fail: v[4] }, hops).3
    };
    let mut grad = [0.0f64; 5];
    for a in 0..5 {
        let h = 1e-7 + 1e-5 * p[a];
        let mut up = p;
        let mut dn = p;
        up[a] += h;
        dn[a] = (dn[a] - h).max(0.0);
        let span = up[a] - dn[a];
        if span > 0.0 {
            grad[a] = (f(&up) - f(&dn)) / span;
        }
    }
    let mut var_rt0 = 0.0;
    for a in 0..5 {
        for b in 0..5 {
            let cov = if a == b { p[a] * (1.0 - p[a]) / n } else { -p[a] * p[b] / n };
            var_rt0 += grad[a] * cov * grad[b];
        }
    }
    var_rt0 = var_rt0.max(0.0);
    let rt0_ci95 = 1.96 * var_rt0.sqrt();

    let q_tot_ci95 = q_tot.map(|qt| {
        // Q_tot = c_exp * hops / rt0: combine relative variances.
        let var_c = (est.c_exp.ci95 / 1.96).powi(2);
        let rel2 = var_c / (c_exp * c_exp) + var_rt0 / (rt0 * rt0);
        1.96 * qt * rel2.sqrt()
    });

    PerfMetrics { p_s, q_x, q_z, q, rt0, rt0_ci95, q_tot, q_tot_ci95 }
}

/// Cartesian parameter grid for the sweep. Combinations with j > n are
/// skipped (j indexes blocks).
#[derive(Debug, Clone, Serialize)]
pub struct SweepGrid {
    pub n: Vec<usize>,
    pub m: Vec<usize>,
    pub alpha: Vec<f64>,
    pub j: Vec<usize>,
    pub l0: Vec<f64>,
}

/// One evaluated grid point.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub n: usize,
    pub m: usize,
    pub alpha: f64,
    pub j: usize,
    pub l0: f64,
    pub eta1: f64,
    pub eta2: f64,
    pub seed: u64,
    pub estimates: Option<EstimateSet>,
    pub metrics: Option<PerfMetrics>,
    pub error: Option<String>,
    /// Whether this row's Q_tot interval overlaps the optimum's.
    pub qtot_ci_overlaps_optimum: bool,
}

/// Sweep output: all rows plus the indices of the optima.
#[derive(Debug, Clone, Serialize)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    pub argmin_qtot: Option<usize>,
    pub argmax_rt0: Option<usize>,
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E3779B97F4A7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

/// Derives the per-point seed from the master seed and the grid index.
pub fn point_seed(master: u64, index: usize) -> u64 {
    splitmix64(master ^ splitmix64(index as u64 + 1))
}

/// Evaluates every grid point by Monte Carlo and locates the optima.
/// Per-point failures are recorded in the row and the sweep continues.
pub fn sweep(
    grid: &SweepGrid,
    l_total: f64,
    eta0: f64,
    l_att: f64,
    trials: u64,
    master_seed: u64,
) -> Result<SweepResult> {
    if grid.n.is_empty()
        || grid.m.is_empty()
        || grid.alpha.is_empty()
        || grid.j.is_empty()
        || grid.l0.is_empty()
    {
        return Err(Error::Domain("sweep grid must be non-empty in every dimension".into()));
    }
    let mut rows = Vec::new();
    let mut index = 0usize;
    for &n in &grid.n {
        for &m in &grid.m {
            for &alpha in &grid.alpha {
                for &j in &grid.j {
                    if j > n {
                        continue;
                    }
                    for &l0 in &grid.l0 {
                        let seed = point_seed(master_seed, index);
                        let row = evaluate_point(
                            n, m, alpha, j, l0, l_total, eta0, l_att, trials, seed,
                        );
                        rows.push(row);
                        index += 1;
                    }
                }
            }
        }
    }
    if rows.is_empty() {
        return Err(Error::Domain("sweep grid produced no valid (j <= n) points".into()));
    }

    let argmin_qtot = rows
        .iter()
        .enumerate()
        .filter_map(|(i, r)| r.metrics.and_then(|m| m.q_tot).map(|q| (i, q)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(i, _)| i);
    let argmax_rt0 = rows
        .iter()
        .enumerate()
        .filter_map(|(i, r)| r.metrics.map(|m| (i, m.rt0)))
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(i, _)| i);

    if let Some(best) = argmin_qtot {
        let (bq, bci) = {
            let m = rows[best].metrics.unwrap();
            (m.q_tot.unwrap(), m.q_tot_ci95.unwrap_or(0.0))
        };
        for row in &mut rows {
            if let Some(m) = row.metrics {
                if let (Some(q), ci) = (m.q_tot, m.q_tot_ci95.unwrap_or(0.0)) {
                    row.qtot_ci_overlaps_optimum = (q - ci) <= (bq + bci);
                }
            }
        }
    }

    Ok(SweepResult { rows, argmin_qtot, argmax_rt0 })
}

#[allow(clippy::too_many_arguments)]
fn evaluate_point(
    n: usize,
    m: usize,
    alpha: f64,
    j: usize,
    l0: f64,
    l_total: f64,
    eta0: f64,
    l_att: f64,
    trials: u64,
    seed: u64,
) -> SweepRow {
    let mut row = SweepRow {
        n,
        m,
        alpha,
        j,
        l0,
        eta1: f64::NAN,
        eta2: f64::NAN,
        seed,
        estimates: None,
        metrics: None,
        error: None,
        qtot_ci_overlaps_optimum: false,
    };
    let result = (|| -> Result<(EstimateSet, PerfMetrics, LossParams)> {
        let params = CodeParams::new(n, m, alpha, j)?;
        let rp = RepeaterParams::new(l_total, l0, eta0, l_att)?;
        let loss = station_loss(&rp);
        let tally = run_trials(&params, loss, trials, seed)?;
        let est = estimate(&tally);
        Ok((est, performance(&est, &rp), loss))
    })();
    match result {
        Ok((est, metrics, loss)) => {
            row.eta1 = loss.eta1;
            row.eta2 = loss.eta2;
            row.estimates = Some(est);
            row.metrics = Some(metrics);
        }
        Err(e) => row.error = Some(e.to_string()),
    }
    row
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::montecarlo::Estimate;

    fn est(p_i: f64, p_x: f64, p_y: f64, p_z: f64, p_fail: f64, c: f64) -> EstimateSet {
        let e = |v| Estimate { value: v, ci95: 1e-4 };
        EstimateSet {
            p_i: e(p_i),
            p_x: e(p_x),
            p_y: e(p_y),
            p_z: e(p_z),
            p_fail: e(p_fail),
            c_exp: e(c),
            n_trials: 1_000_000,
            undersampled: false,
        }
    }

    #[test]
    fn station_loss_examples() {
        let f = |l0: f64, eta0: f64| {
            station_loss(&RepeaterParams { l_total: 1000.0, l0, eta0, l_att: 22.0 })
        };
        let a = f(1e-12, 0.9);
        assert!((a.eta1 - 0.9).abs() < 1e-9 && a.eta2 == 0.9);
        let b = f(22.0, 1.0);
        assert!((b.eta1 - (-1.0f64).exp()).abs() < 1e-15);
        let c = f(0.7, 0.99);
        assert!((c.eta1 - 0.99 * (-0.7f64 / 22.0).exp()).abs() < 1e-15);
    }

    #[test]
    fn perfect_station_gives_unit_key_rate() {
        let rp = RepeaterParams::new(1000.0, 1.0, 1.0, 22.0).unwrap();
        let m = performance(&est(1.0, 0.0, 0.0, 0.0, 0.0, 1.0), &rp);
        assert_eq!(m.p_s, 1.0);
        assert_eq!(m.q, 0.0);
        assert_eq!(m.rt0, 1.0);
        assert_eq!(m.q_tot, Some(1000.0));
    }

    #[test]
    fn qber_half_kills_key_rate() {
        // p_z = p_i makes both base ratios 0, so Q -> 1/2 and Rt0 clamps at 0.
        let rp = RepeaterParams::new(100.0, 1.0, 1.0, 22.0).unwrap();
        let m = performance(&est(0.5, 0.0, 0.0, 0.5, 0.0, 1.0), &rp);
        assert_eq!(m.rt0, 0.0);
        assert_eq!(m.q_tot, None);
    }

    #[test]
    fn depends_only_on_hop_count() {
        let e = est(0.975, 1e-5, 1e-5, 0.003, 0.02, 10.0);
        let a = performance(&e, &RepeaterParams::new(100.0, 2.0, 0.99, 22.0).unwrap());
        let b = performance(&e, &RepeaterParams::new(200.0, 4.0, 0.99, 22.0).unwrap());
        assert!(a.rt0 > 0.0);
        assert!((a.rt0 - b.rt0).abs() < 1e-14);
        // Q_tot carries the explicit L/L0 factor, equal here as well.
        assert!((a.q_tot.unwrap() - b.q_tot.unwrap()).abs() < 1e-9);
    }

    #[test]
    fn rt0_monotone_in_failure_and_errors() {
        let rp = RepeaterParams::new(20.0, 1.0, 0.99, 22.0).unwrap();
        let base = performance(&est(0.978, 1e-5, 1e-5, 0.001, 0.02, 5.0), &rp);
        assert!(base.rt0 > 0.0);
        let worse_fail = performance(&est(0.978, 1e-5, 1e-5, 0.001, 0.04, 5.0), &rp);
        let worse_z = performance(&est(0.976, 1e-5, 1e-5, 0.003, 0.02, 5.0), &rp);
        assert!(worse_fail.rt0 < base.rt0);
        assert!(worse_z.rt0 < base.rt0);
    }

    #[test]
    fn qx_equals_qz_when_px_equals_pz() {
        let rp = RepeaterParams::new(300.0, 1.5, 0.99, 22.0).unwrap();
        let m = performance(&est(0.93, 0.02, 1e-6, 0.02, 0.03, 4.0), &rp);
        assert!((m.q_x - m.q_z).abs() < 1e-12);
    }

    #[test]
    fn single_point_sweep_is_optimal() {
        let grid = SweepGrid {
            n: vec![1],
            m: vec![5],
            alpha: vec![1.6],
            j: vec![1],
            l0: vec![1.0],
        };
        let result = sweep(&grid, 5.0, 0.99, 22.0, 20_000, 7).unwrap();
        assert_eq!(result.rows.len(), 1);
        assert_eq!(result.argmin_qtot, Some(0));
        assert_eq!(result.argmax_rt0, Some(0));
        assert!(result.rows[0].qtot_ci_overlaps_optimum);
    }

    #[test]
    fn empty_grid_rejected() {
        let grid =
            SweepGrid { n: vec![], m: vec![1], alpha: vec![1.0], j: vec![1], l0: vec![1.0] };
        assert!(sweep(&grid, 100.0, 0.99, 22.0, 100, 1).is_err());
    }

    #[test]
    fn oversized_j_combinations_are_skipped() {
        let grid = SweepGrid {
            n: vec![1, 3],
            m: vec![1],
            alpha: vec![1.6],
            j: vec![1, 3],
            l0: vec![1.0],
        };
        let result = sweep(&grid, 50.0, 0.99, 22.0, 5_000, 7).unwrap();
        // (1,1): j=1 only; (3,1): j=1 and j=3.
        assert_eq!(result.rows.len(), 3);
    }

    #[test]
    fn sweep_is_deterministic() {
        let grid = SweepGrid {
            n: vec![1],
            m: vec![1, 3],
            alpha: vec![1.3],
            j: vec![1],
            l0: vec![0.7],
        };
        let a = sweep(&grid, 100.0, 0.99, 22.0, 10_000, 42).unwrap();
        let b = sweep(&grid, 100.0, 0.99, 22.0, 10_000, 42).unwrap();
        for (x, y) in a.rows.iter().zip(&b.rows) {
            assert_eq!(x.estimates.map(|e| e.p_i.value), y.estimates.map(|e| e.p_i.value));
            assert_eq!(x.seed, y.seed);
        }
    }
}
