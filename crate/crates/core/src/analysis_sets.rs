//! Nested analysis sets and the balance diagnostics that show when an
//! analysis set breaks randomization.

use std::fmt;

use crate::dgp::ScenarioConfig;
use crate::error::{Error, Result};
use crate::estimand::{EstimandSpec, Population};
use crate::estimators::{estimate, AnalysisTarget, EstimatorOptions};
use crate::montecarlo::{replicate, GapSummary};
use crate::oracle::oracle_estimand;
use crate::potential_outcomes::{ObservedRecord, SetFlags};
use crate::scalar::{mean, sample_variance, widen, Real};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AnalysisSet {
    /// Intention-to-treat set: everyone enrolled.
    Itts,
    /// Safety set: enrolled and dosed at least once.
    Ss,
    /// Full analysis set: dosed with post-randomization data.
    Fas,
    /// Per-protocol set: full analysis set without protocol deviation.
    Pps,
}

impl AnalysisSet {
    pub const ALL: [AnalysisSet; 4] = [AnalysisSet::Itts, AnalysisSet::Ss, AnalysisSet::Fas, AnalysisSet::Pps];

    pub fn as_str(self) -> &'static str {
        match self {
            AnalysisSet::Itts => "itts",
            AnalysisSet::Ss => "ss",
            AnalysisSet::Fas => "fas",
            AnalysisSet::Pps => "pps",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            AnalysisSet::Itts => "ITTS",
            AnalysisSet::Ss => "SS",
            AnalysisSet::Fas => "FAS",
            AnalysisSet::Pps => "PPS",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|a| a.as_str().eq_ignore_ascii_case(s))
    }

    pub fn contains(self, f: &SetFlags) -> bool {
        let itts = f.enrolled;
        let ss = itts && f.any_dose;
        let fas = ss && f.post_randomization_data;
        match self {
            AnalysisSet::Itts => itts,
            AnalysisSet::Ss => ss,
            AnalysisSet::Fas => fas,
            AnalysisSet::Pps => fas && !f.protocol_deviation,
        }
    }
}

impl fmt::Display for AnalysisSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Set membership of one record.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SetMembership {
    pub itts: bool,
    pub ss: bool,
    pub fas: bool,
    pub pps: bool,
}

impl SetMembership {
    pub fn of(f: &SetFlags) -> Self {
        SetMembership {
            itts: AnalysisSet::Itts.contains(f),
            ss: AnalysisSet::Ss.contains(f),
            fas: AnalysisSet::Fas.contains(f),
            pps: AnalysisSet::Pps.contains(f),
        }
    }

    pub fn is_nested(&self) -> bool {
        (!self.pps || self.fas) && (!self.fas || self.ss) && (!self.ss || self.itts)
    }

    pub fn get(&self, set: AnalysisSet) -> bool {
        match set {
            AnalysisSet::Itts => self.itts,
            AnalysisSet::Ss => self.ss,
            AnalysisSet::Fas => self.fas,
            AnalysisSet::Pps => self.pps,
        }
    }
}

pub fn build_sets<T>(records: &[ObservedRecord<T>]) -> Vec<SetMembership> {
    records.iter().map(|r| SetMembership::of(&r.set_flags)).collect()
}

pub const DEFAULT_SMD_THRESHOLD: f64 = 0.1;

#[derive(Clone, Debug, PartialEq)]
pub struct BalanceRow {
    pub confounder: usize,
    pub mean_control: f64,
    pub mean_experimental: f64,
    /// Standardized mean difference, experimental minus control over the
    /// pooled standard deviation.
    pub smd: f64,
    /// Pooled variance was zero; `smd` is reported as 0.
    pub degenerate: bool,
    pub flagged: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BalanceReport {
    pub set: AnalysisSet,
    pub n_control: usize,
    pub n_experimental: usize,
    pub threshold: f64,
    pub rows: Vec<BalanceRow>,
}

impl BalanceReport {
    pub fn max_abs_smd(&self) -> f64 {
        self.rows.iter().map(|r| r.smd.abs()).fold(0.0, f64::max)
    }

    pub fn any_flagged(&self) -> bool {
        self.rows.iter().any(|r| r.flagged)
    }
}

/// Per-confounder standardized mean differences between arms within `set`.
pub fn randomization_balance_check<T: Real>(
    records: &[ObservedRecord<T>],
    set: AnalysisSet,
    threshold: f64,
) -> Result<BalanceReport> {
    let in_set: Vec<&ObservedRecord<T>> = records.iter().filter(|r| set.contains(&r.set_flags)).collect();
    let arm = |x: bool| -> Vec<&ObservedRecord<T>> { in_set.iter().copied().filter(|r| r.x_obs == x).collect() };
    let (control, experimental) = (arm(false), arm(true));
    if control.is_empty() || experimental.is_empty() {
        return Err(Error::Diagnostic(format!(
            "{set} has no participants in the {} arm",
            if control.is_empty() { "control" } else { "experimental" }
        )));
    }
    let k = in_set[0].c.len();
    let rows = (0..k)
        .map(|j| {
            let col = |a: &[&ObservedRecord<T>]| -> Vec<f64> { a.iter().map(|r| widen(r.c[j])).collect() };
            let (c0, c1) = (col(&control), col(&experimental));
            let (m0, m1) = (mean(&c0).unwrap(), mean(&c1).unwrap());
            let pooled = (sample_variance(&c0) + sample_variance(&c1)) / 2.0;
            let degenerate = pooled <= 0.0;
            let smd = if degenerate { 0.0 } else { (m1 - m0) / pooled.sqrt() };
            BalanceRow {
                confounder: j,
                mean_control: m0,
                mean_experimental: m1,
                smd,
                degenerate,
                flagged: smd.abs() > threshold,
            }
        })
        .collect();
    Ok(BalanceReport { set, n_control: control.len(), n_experimental: experimental.len(), threshold, rows })
}

/// The analysis sets compared in selection-bias reports.
pub const COMPARED_SETS: [AnalysisSet; 3] = [AnalysisSet::Itts, AnalysisSet::Fas, AnalysisSet::Pps];

/// One analysis set's estimates against the full-population oracle.
#[derive(Clone, Debug, PartialEq)]
pub struct SetComparison {
    pub set: AnalysisSet,
    pub summary: GapSummary,
    /// Mean over replications of the largest absolute SMD in the set.
    pub mean_max_abs_smd: f64,
    /// Share of replications with some flagged confounder.
    pub flagged_share: f64,
}

/// Estimates the spec's estimand on ITTS, FAS and PPS in each replication of
/// `cfg` and reports each set's gap to the oracle over the full population.
pub fn selection_bias_demo(
    cfg: &ScenarioConfig,
    spec: &EstimandSpec,
    reps: usize,
    opts: &EstimatorOptions,
) -> Result<Vec<SetComparison>> {
    let mut full_spec = spec.clone();
    if let Population::AnalysisSet(_) = spec.population {
        full_spec.population = Population::All;
    }
    let per_rep = replicate::<f64, _, _>(cfg, reps, |rep, pop, records| {
        let oracle = oracle_estimand(pop, &full_spec).map(|v| v.value).ok();
        COMPARED_SETS.map(|set| {
            let mut target = AnalysisTarget::from_spec(&full_spec);
            target.set = Some(set);
            let o = EstimatorOptions { seed: crate::dgp::split_seed(opts.seed, rep), ..*opts };
            let point = estimate(records, &target, &o).ok().map(|e| e.point);
            let balance = randomization_balance_check(records, set, DEFAULT_SMD_THRESHOLD).ok();
            (point.zip(oracle), balance)
        })
    })?;
    Ok(COMPARED_SETS
        .iter()
        .enumerate()
        .map(|(i, &set)| {
            let pairs: Vec<Option<(f64, f64)>> = per_rep.iter().map(|r| r[i].0).collect();
            let balances: Vec<&BalanceReport> = per_rep.iter().filter_map(|r| r[i].1.as_ref()).collect();
            let nb = balances.len().max(1) as f64;
            SetComparison {
                set,
                summary: GapSummary::from_pairs(&pairs),
                mean_max_abs_smd: balances.iter().map(|b| b.max_abs_smd()).sum::<f64>() / nb,
                flagged_share: balances.iter().filter(|b| b.any_flagged()).count() as f64 / nb,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential_outcomes::{derive_observed, fixtures::plain};

    fn flags(enrolled: bool, any_dose: bool, data: bool, deviation: bool) -> SetFlags {
        SetFlags { enrolled, any_dose, post_randomization_data: data, protocol_deviation: deviation }
    }

    #[test]
    fn membership_hand_table() {
        // enrolled, dosed, data, deviation -> itts ss fas pps
        let table = [
            (flags(true, true, true, false), [true, true, true, true]),
            (flags(true, true, true, true), [true, true, true, false]),
            (flags(true, true, false, false), [true, true, false, false]),
            (flags(true, true, false, true), [true, true, false, false]),
            (flags(true, false, true, false), [true, false, false, false]),
            (flags(true, false, false, true), [true, false, false, false]),
            (flags(false, true, true, false), [false, false, false, false]),
            (flags(false, false, false, true), [false, false, false, false]),
        ];
        for (f, expected) in table {
            let m = SetMembership::of(&f);
            assert_eq!([m.itts, m.ss, m.fas, m.pps], expected, "{f:?}");
            assert!(m.is_nested());
        }
    }

    #[test]
    fn favourable_flags_give_identical_sets() {
        let pop: Vec<_> = (0..6).map(|i| plain(i, i % 2 == 0, [1.0, 2.0], [3.0, 4.0])).collect();
        let recs: Vec<_> = pop.iter().map(derive_observed).collect();
        for m in build_sets(&recs) {
            assert!(m.itts && m.ss && m.fas && m.pps);
        }
    }

    #[test]
    fn degenerate_balance() {
        let pop = [plain(0, false, [1.0, 1.0], [1.0, 1.0]), plain(1, true, [1.0, 1.0], [1.0, 1.0])];
        let recs: Vec<_> = pop.iter().map(derive_observed).collect();
        let report = randomization_balance_check(&recs, AnalysisSet::Itts, 0.1).unwrap();
        assert!(report.rows.iter().all(|r| r.degenerate && r.smd == 0.0 && !r.flagged));
        let one_arm = &recs[..1];
        assert!(matches!(randomization_balance_check(one_arm, AnalysisSet::Itts, 0.1), Err(Error::Diagnostic(_))));
    }

    #[test]
    fn smd_by_hand() {
        let mut pop: Vec<_> = (0..4).map(|i| plain(i, i >= 2, [0.0; 2], [0.0; 2])).collect();
        // control c1 = 0, 2 ; experimental c1 = 1, 5 -> variances 2 and 8, pooled 5
        for (p, v) in pop.iter_mut().zip([0.0, 2.0, 1.0, 5.0]) {
            p.c = vec![v];
        }
        let recs: Vec<_> = pop.iter().map(derive_observed).collect();
        let report = randomization_balance_check(&recs, AnalysisSet::Itts, 0.1).unwrap();
        assert!((report.rows[0].smd - 2.0 / 5.0f64.sqrt()).abs() < 1e-15);
        assert!(report.any_flagged());
    }
}
