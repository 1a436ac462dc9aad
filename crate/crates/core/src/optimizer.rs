//! Exhaustive searches for transmit mode sets and diversity branch sets.
//!
//! Transmit-set search: the objective of a set is Σ_i h_i(S_i), where S_i is the
//! mean interference channel i collects from the rest of the set and
//! h_i(s) = mean over realizations of C∞(|α_ii|²/s). Each h_i is tabulated on a
//! log-spaced grid in s, every subset is scored from the tables, and the
//! candidates that could be optimal given the table error are rescored exactly.

use std::cmp::Ordering;

use rayon::prelude::*;

use crate::diversity::{asymptotic_sinr_from, branch_fadings, branch_interference, eff};
use crate::ensemble::{mean_crosstalk, ChannelEnsemble, CrosstalkMatrix};
use crate::error::{Error, Result};
use crate::modes::ModeState;
use crate::rates::{asymptotic_rate_or_zero, average_asymptotic_aar, AsymptoticAar};
use crate::stats::stable_mean;

/// Points per interpolation table.
const TABLE_POINTS: usize = 2048;
/// Exact rescoring always covers at least this many of the best approximate candidates.
const MIN_SHORTLIST: usize = 32;

/// Result of a transmit-set search.
#[derive(Debug, Clone, PartialEq)]
pub struct TransmitChoice {
    pub n: usize,
    /// Sorted ascending.
    pub set: Vec<ModeState>,
    pub objective: AsymptoticAar,
}

/// Lexicographic comparison of sorted sets.
fn lex(a: &[ModeState], b: &[ModeState]) -> Ordering {
    a.iter().map(|s| s.ell()).cmp(b.iter().map(|s| s.ell()))
}

/// Precomputed per-channel gains and mean crosstalk.
struct Objective {
    /// ensemble indices sorted by ell
    order: Vec<usize>,
    states: Vec<ModeState>,
    x: CrosstalkMatrix,
    /// |α_ii|² per realization, indexed by ensemble index
    gains: Vec<Vec<f64>>,
}

impl Objective {
    fn new(ensemble: &ChannelEnsemble) -> Self {
        let states = ensemble.states().to_vec();
        let mut order: Vec<usize> = (0..states.len()).collect();
        order.sort_by_key(|&a| states[a].ell());
        let gains = (0..states.len())
            .map(|i| ensemble.realizations().iter().map(|m| m.at(i, i).norm_sqr()).collect())
            .collect();
        Self {
            order,
            states,
            x: mean_crosstalk(ensemble),
            gains,
        }
    }

    /// h_i(s), exactly.
    fn h(&self, i: usize, s: f64) -> f64 {
        let r: Vec<f64> = self.gains[i].iter().map(|&g| asymptotic_rate_or_zero(g / s)).collect();
        stable_mean(&r).expect("ensembles are nonempty")
    }

    /// Interference level of every member of `set` (ensemble indices).
    fn interference(&self, set: &[usize]) -> Vec<f64> {
        set.iter()
            .map(|&i| set.iter().filter(|&&k| k != i).map(|&k| self.x.at(k, i)).sum())
            .collect()
    }

    fn exact(&self, set: &[usize]) -> Option<f64> {
        let s = self.interference(set);
        if s.iter().any(|&v| !(v > 0.0)) {
            return None;
        }
        Some(set.iter().zip(&s).map(|(&i, &v)| self.h(i, v)).sum())
    }

    fn sorted_states(&self, set: &[usize]) -> Vec<ModeState> {
        let mut v: Vec<ModeState> = set.iter().map(|&i| self.states[i]).collect();
        v.sort();
        v
    }
}

/// h_i tabulated over ln s with linear interpolation and a measured error bound.
struct Table {
    lo: f64,
    step: f64,
    values: Vec<f64>,
    error: f64,
}

impl Table {
    fn new(obj: &Objective, i: usize, s_min: f64, s_max: f64) -> Self {
        let lo = s_min.ln();
        let hi = s_max.ln().max(lo + 1e-9);
        let step = (hi - lo) / (TABLE_POINTS - 1) as f64;
        let values: Vec<f64> = (0..TABLE_POINTS)
            .map(|k| obj.h(i, (lo + step * k as f64).exp()))
            .collect();
        // midpoint error, probed on a subset of intervals
        let mut error = 0.0_f64;
        for k in (0..TABLE_POINTS - 1).step_by(7) {
            let mid = obj.h(i, (lo + step * (k as f64 + 0.5)).exp());
            error = error.max((mid - 0.5 * (values[k] + values[k + 1])).abs());
        }
        Self {
            lo,
            step,
            values,
            error: 4.0 * error + 1e-12,
        }
    }

    fn eval(&self, s: f64) -> f64 {
        let t = ((s.ln() - self.lo) / self.step).clamp(0.0, (TABLE_POINTS - 1) as f64);
        let k = (t as usize).min(TABLE_POINTS - 2);
        let f = t - k as f64;
        self.values[k] * (1.0 - f) + self.values[k + 1] * f
    }
}

fn combinations(n: usize, k: usize, first: usize) -> Vec<Vec<usize>> {
    // all k-subsets of 0..n whose smallest element is `first`
    let mut out = Vec::new();
    let mut cur = vec![first];
    fn rec(n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        let start = cur.last().map_or(0, |&l| l + 1);
        for v in start..n {
            if n - v < k - cur.len() {
                break;
            }
            cur.push(v);
            rec(n, k, cur, out);
            cur.pop();
        }
    }
    rec(n, k, &mut cur, &mut out);
    out
}

/// Transmit set of size `n` maximizing the average asymptotic AAR.
///
/// For `n = 1` no channel is interference-limited; the single mode with the
/// largest mean log-gain E[ln|α_ii|²] is returned.
pub fn optimal_transmit_set(ensemble: &ChannelEnsemble, n: usize) -> Result<TransmitChoice> {
    let total = ensemble.states().len();
    if n == 0 || n > total {
        return Err(Error::domain(format!("set size must be in 1..={total}, got {n}")));
    }
    let obj = Objective::new(ensemble);
    if n == 1 {
        let mut best: Option<(f64, usize)> = None;
        for &i in &obj.order {
            let logs: Vec<f64> = obj.gains[i].iter().map(|g| g.max(1e-300).ln()).collect();
            let v = stable_mean(&logs)?;
            if best.is_none_or(|(b, _)| v > b) {
                best = Some((v, i));
            }
        }
        let i = best.expect("nonempty").1;
        return Ok(TransmitChoice {
            n,
            set: vec![obj.states[i]],
            objective: AsymptoticAar::NotInterferenceLimited,
        });
    }
    if n == total {
        let all: Vec<usize> = obj.order.clone();
        return Ok(TransmitChoice {
            n,
            set: obj.sorted_states(&all),
            objective: obj.exact(&all).map_or(AsymptoticAar::NotInterferenceLimited, AsymptoticAar::Finite),
        });
    }

    // table ranges: smallest positive single entry to the largest column sum
    let tables: Vec<Table> = (0..total)
        .into_par_iter()
        .map(|i| {
            let col: Vec<f64> = (0..total).filter(|&k| k != i).map(|k| obj.x.at(k, i)).collect();
            let s_min = col.iter().copied().filter(|&v| v > 0.0).fold(f64::INFINITY, f64::min);
            let s_max: f64 = col.iter().sum();
            if s_min.is_finite() {
                Table::new(&obj, i, s_min, s_max)
            } else {
                Table {
                    lo: 0.0,
                    step: 1.0,
                    values: vec![0.0; TABLE_POINTS],
                    error: 0.0,
                }
            }
        })
        .collect();

    // approximate score of every subset; positions index into `obj.order`
    let scored: Vec<(f64, f64, Vec<usize>)> = (0..total)
        .into_par_iter()
        .flat_map_iter(|first| {
            let obj = &obj;
            let tables = &tables;
            combinations(total, n, first).into_iter().filter_map(move |pos| {
                let set: Vec<usize> = pos.iter().map(|&p| obj.order[p]).collect();
                let s = obj.interference(&set);
                if s.iter().any(|&v| !(v > 0.0)) {
                    return None;
                }
                let approx = set.iter().zip(&s).map(|(&i, &v)| tables[i].eval(v)).sum::<f64>();
                let err = set.iter().map(|&i| tables[i].error).sum::<f64>();
                Some((approx, err, set))
            })
        })
        .collect();
    if scored.is_empty() {
        return Ok(TransmitChoice {
            n,
            set: obj.sorted_states(&obj.order[..n]),
            objective: AsymptoticAar::NotInterferenceLimited,
        });
    }

    let best_lower = scored
        .iter()
        .map(|(a, e, _)| a - e)
        .fold(f64::NEG_INFINITY, f64::max);
    let mut ranked: Vec<&(f64, f64, Vec<usize>)> = scored.iter().collect();
    ranked.sort_by(|a, b| b.0.total_cmp(&a.0));
    let shortlist: Vec<&Vec<usize>> = ranked
        .iter()
        .enumerate()
        .filter(|(rank, (a, e, _))| *rank < MIN_SHORTLIST || a + e >= best_lower)
        .map(|(_, (_, _, s))| s)
        .collect();

    let mut best: Option<(f64, Vec<ModeState>)> = None;
    for set in shortlist {
        let v = obj.exact(set).expect("filtered to interference-limited sets");
        let sorted = obj.sorted_states(set);
        let better = match &best {
            None => true,
            Some((b, bs)) => v > *b || (v == *b && lex(&sorted, bs) == Ordering::Less),
        };
        if better {
            best = Some((v, sorted));
        }
    }
    let (v, set) = best.expect("shortlist is nonempty");
    Ok(TransmitChoice {
        n,
        set,
        objective: AsymptoticAar::Finite(v),
    })
}

/// Optimal set for every size in `n_range`, in range order.
pub fn transmit_set_curve(ensemble: &ChannelEnsemble, n_range: &[usize]) -> Result<Vec<TransmitChoice>> {
    n_range.iter().map(|&n| optimal_transmit_set(ensemble, n)).collect()
}

/// Entry of a size curve with the largest objective; the first wins ties. Sizes
/// that are not interference-limited (N = 1) only win when nothing else is available.
pub fn best_of_curve(curve: &[TransmitChoice]) -> Option<&TransmitChoice> {
    let mut best: Option<&TransmitChoice> = None;
    for c in curve {
        if let Some(v) = c.objective.value() {
            if best.and_then(|b| b.objective.value()).is_none_or(|bv| v > bv) {
                best = Some(c);
            }
        }
    }
    best.or(curve.first())
}

/// Best set size over `n_range`.
pub fn optimal_mode_count(ensemble: &ChannelEnsemble, n_range: &[usize]) -> Result<TransmitChoice> {
    if n_range.is_empty() {
        return Err(Error::domain("empty range of set sizes"));
    }
    let curve = transmit_set_curve(ensemble, n_range)?;
    Ok(best_of_curve(&curve).expect("range is nonempty").clone())
}

/// Objective of an explicit transmit set.
pub fn transmit_set_objective(ensemble: &ChannelEnsemble, set: &[ModeState]) -> Result<AsymptoticAar> {
    average_asymptotic_aar(ensemble, set)
}

/// Options of [`best_diversity_set`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiversitySearchOptions {
    pub max_size: usize,
    /// EFF improvement (dB) below which adding a branch is not worth it.
    pub saturation_delta: f64,
    /// Candidate branches within this distance of the channel state.
    pub window: u32,
    /// Search every ensemble state instead of the window.
    pub unrestricted: bool,
}

impl Default for DiversitySearchOptions {
    fn default() -> Self {
        Self {
            max_size: 7,
            saturation_delta: 0.3,
            window: 5,
            unrestricted: false,
        }
    }
}

/// One row of the search record: the best set of size at most `size`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiversityStep {
    pub size: usize,
    pub set: Vec<ModeState>,
    pub eff_db: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiversitySearch {
    pub record: Vec<DiversityStep>,
    pub best: Vec<ModeState>,
    pub best_eff_db: f64,
}

/// EFF (dB) of the high-power MRC SINR of channel `i` over `branch_set`.
pub fn diversity_eff(
    ensemble: &ChannelEnsemble,
    i: ModeState,
    branch_set: &[ModeState],
    tx_set: &[ModeState],
) -> Result<f64> {
    let samples = crate::diversity::asymptotic_sinr_samples(ensemble, i, branch_set, tx_set)?;
    eff(&samples)
}

/// Smallest branch set whose EFF has saturated. Every candidate contains `i`.
pub fn best_diversity_set(
    ensemble: &ChannelEnsemble,
    i: ModeState,
    tx_set: &[ModeState],
    options: DiversitySearchOptions,
) -> Result<DiversitySearch> {
    if !tx_set.contains(&i) {
        return Err(Error::domain(format!("channel {i} is not in the transmit set")));
    }
    if options.max_size == 0 {
        return Err(Error::domain("max_size must be >= 1"));
    }
    let mut pool: Vec<ModeState> = ensemble
        .states()
        .iter()
        .copied()
        .filter(|&s| s != i && (options.unrestricted || s.ell().abs_diff(i.ell()) <= options.window))
        .collect();
    pool.sort();
    let x = mean_crosstalk(ensemble);
    let all: Vec<ModeState> = std::iter::once(i).chain(pool.iter().copied()).collect();
    let s_all = branch_interference(i, &all, tx_set, &x)?;
    let g_all = branch_fadings(ensemble, i, &all)?;

    let eval = |members: &[usize]| -> Result<f64> {
        let s: Vec<f64> = members.iter().map(|&m| s_all[m]).collect();
        let z = g_all
            .iter()
            .map(|g| {
                let gm: Vec<f64> = members.iter().map(|&m| g[m]).collect();
                asymptotic_sinr_from(&gm, &s)
            })
            .collect::<Result<Vec<f64>>>()?;
        eff(&z)
    };
    let to_set = |members: &[usize]| -> Vec<ModeState> {
        let mut v: Vec<ModeState> = members.iter().map(|&m| all[m]).collect();
        v.sort();
        v
    };

    let mut record: Vec<DiversityStep> = Vec::new();
    let max_size = options.max_size.min(all.len());
    for size in 1..=max_size {
        // subsets of the pool (positions 1..) of size − 1, plus position 0
        let mut best: Option<(f64, Vec<ModeState>)> = None;
        let extra = if size == 1 {
            vec![vec![]]
        } else {
            (0..pool.len())
                .flat_map(|f| combinations(pool.len(), size - 1, f))
                .collect()
        };
        let scored: Vec<(f64, Vec<ModeState>)> = extra
            .par_iter()
            .map(|e| {
                let members: Vec<usize> = std::iter::once(0).chain(e.iter().map(|&p| p + 1)).collect();
                Ok((eval(&members)?, to_set(&members)))
            })
            .collect::<Result<_>>()?;
        for (v, set) in scored {
            let better = match &best {
                None => true,
                Some((b, bs)) => v < *b || (v == *b && lex(&set, bs) == Ordering::Less),
            };
            if better {
                best = Some((v, set));
            }
        }
        let (v, set) = best.expect("at least one candidate");
        let step = match record.last() {
            Some(prev) if prev.eff_db <= v => DiversityStep {
                size,
                set: prev.set.clone(),
                eff_db: prev.eff_db,
            },
            _ => DiversityStep { size, set, eff_db: v },
        };
        record.push(step);
    }

    let mut chosen = record.len() - 1;
    for m in 1..record.len() {
        if record[m - 1].eff_db - record[m].eff_db < options.saturation_delta {
            chosen = m - 1;
            break;
        }
    }
    Ok(DiversitySearch {
        best: record[chosen].set.clone(),
        best_eff_db: record[chosen].eff_db,
        record,
    })
}

fn log_outage_at(curve: &[(f64, f64)], pt_dbm: f64) -> Result<f64> {
    let k = curve
        .windows(2)
        .position(|w| w[0].0 <= pt_dbm && pt_dbm <= w[1].0)
        .ok_or_else(|| Error::domain(format!("{pt_dbm} dBm lies outside the outage curve")))?;
    let (a, b) = (curve[k], curve[k + 1]);
    if !(a.1 > 0.0 && b.1 > 0.0) {
        return Err(Error::domain(format!(
            "zero outage near {pt_dbm} dBm; the slope is undefined"
        )));
    }
    let f = if b.0 > a.0 { (pt_dbm - a.0) / (b.0 - a.0) } else { 0.0 };
    Ok(a.1.log10() * (1.0 - f) + b.1.log10() * f)
}

/// Ratio of the local slopes of log10 P_out versus P_t (dB), from centered
/// differences over ±1 dB. Curves are `(P_t dBm, P_out)` sorted by power.
pub fn normalized_outage_slope(curve_with: &[(f64, f64)], curve_without: &[(f64, f64)], pt_dbm: f64) -> Result<f64> {
    let slope = |c: &[(f64, f64)]| -> Result<f64> {
        Ok((log_outage_at(c, pt_dbm + 1.0)? - log_outage_at(c, pt_dbm - 1.0)?) / 2.0)
    };
    let without = slope(curve_without)?;
    if without == 0.0 {
        return Err(Error::domain("reference outage curve is flat"));
    }
    Ok(slope(curve_with)? / without)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn combination_counts() {
        let total: usize = (0..7).map(|f| combinations(7, 3, f).len()).sum();
        assert_eq!(total, 35);
        assert_eq!(combinations(5, 1, 2), vec![vec![2]]);
    }

    #[test]
    fn slope_examples() {
        let without: Vec<(f64, f64)> = (0..11).map(|k| (-15.0 + k as f64, 10f64.powf(-0.2 * k as f64))).collect();
        assert!((normalized_outage_slope(&without, &without, -10.0).unwrap() - 1.0).abs() < 1e-12);
        let with: Vec<(f64, f64)> = without.iter().map(|&(p, q)| (p, q * q)).collect();
        assert!((normalized_outage_slope(&with, &without, -10.0).unwrap() - 2.0).abs() < 1e-12);
        let zero: Vec<(f64, f64)> = without.iter().map(|&(p, _)| (p, 0.0)).collect();
        assert!(normalized_outage_slope(&zero, &without, -10.0).is_err());
        assert!(normalized_outage_slope(&with, &without, -14.5).is_err());
    }
}
