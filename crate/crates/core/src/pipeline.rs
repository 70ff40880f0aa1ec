//! End-to-end analysis of one curve or one isogeny class.

use num_bigint::BigUint;
use serde::Serialize;

use crate::ap::ApTable;
use crate::bsd::{analytic_sha, torsion_order, ShaReport};
use crate::curve::WeierstrassCurve;
use crate::error::{Error, Result};
use crate::family::IsogenyClass;
use crate::localdata::{global_data, GlobalArithData};
use crate::lseries::{approximate_l1_with_table, real_period, sum_plan, LTruncation, PeriodData, DEFAULT_MAX_TERMS};

/// Rough single-core cost of one series term (point count plus three
/// weighted additions), for dry-run estimates.
pub const SECONDS_PER_TERM: f64 = 2.5e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AnalyzeOptions {
    pub k: u32,
    pub max_terms: u64,
}

impl Default for AnalyzeOptions {
    fn default() -> Self {
        AnalyzeOptions { k: 10, max_terms: DEFAULT_MAX_TERMS }
    }
}

#[derive(Clone, Debug)]
pub struct Analysis {
    pub data: GlobalArithData,
    pub period: PeriodData,
    pub torsion: u32,
    pub l: LTruncation,
    pub report: ShaReport,
}

/// Global data, period, L-value, torsion and the Sha quotient of `c`.
pub fn analyze(c: &WeierstrassCurve, opts: AnalyzeOptions) -> Result<Analysis> {
    let data = global_data(c)?;
    let l = approximate_l1_with_table(&data, opts.k, opts.max_terms, None)?;
    assemble(data, l)
}

fn assemble(data: GlobalArithData, l: LTruncation) -> Result<Analysis> {
    let period = real_period(&data.minimal, l.work_digits + 10)?;
    let torsion = torsion_order(&data.minimal)?;
    let report = analytic_sha(&data, &period, &l, torsion);
    Ok(Analysis { data, period, torsion, l, report })
}

/// Analyzes every member of a class. The L-series is shared, so it is summed
/// once on the first member.
pub fn analyze_class(class: &IsogenyClass, opts: AnalyzeOptions, table: Option<&ApTable>) -> Result<Vec<Analysis>> {
    let first = &class.members[0].data;
    let l = approximate_l1_with_table(first, opts.k, opts.max_terms, table)?;
    class.members.iter().map(|m| assemble(m.data.clone(), l.clone())).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DryRun {
    pub conductor: BigUint,
    pub k: u32,
    /// terms of the truncated sum at s = 1
    pub m: u64,
    /// coefficients generated, including the root-number check
    pub coefficients: u64,
    pub estimated_seconds: f64,
    pub max_terms: u64,
}

impl DryRun {
    pub fn within_budget(&self) -> bool {
        self.m <= self.max_terms
    }

    pub fn into_result(self) -> Result<DryRun> {
        if self.within_budget() {
            Ok(self)
        } else {
            Err(Error::BudgetExceeded { m: self.m, max_terms: self.max_terms })
        }
    }
}

/// Series length and cost estimate without summing anything.
pub fn dry_run(conductor: &BigUint, opts: AnalyzeOptions) -> DryRun {
    let plan = sum_plan(conductor, opts.k);
    DryRun {
        conductor: conductor.clone(),
        k: opts.k,
        m: plan.m,
        coefficients: plan.m_a,
        estimated_seconds: plan.m_a as f64 * SECONDS_PER_TERM,
        max_terms: opts.max_terms,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bsd::ShaStatus;
    use crate::family::isogeny_class;

    #[test]
    fn analyze_thirty_two_a() {
        let a = analyze(&WeierstrassCurve::from_ints([0, 0, 0, -1, 0]), AnalyzeOptions::default()).unwrap();
        assert_eq!(a.torsion, 4);
        assert_eq!(a.report.status, ShaStatus::Ok);
        assert_eq!(a.report.sha_int, 1u32.into());
        assert!((a.period.c_infty_f64() - 5.24411510858424).abs() < 1e-12);
    }

    #[test]
    fn singular_input_is_an_error() {
        let err = analyze(&WeierstrassCurve::from_ints([0, 0, 0, 0, 0]), AnalyzeOptions::default()).unwrap_err();
        assert_eq!(err.kind(), "singular-curve");
    }

    #[test]
    fn class_members_share_the_l_value() {
        let class = isogeny_class(0, -1).unwrap();
        let res = analyze_class(&class, AnalyzeOptions { k: 6, ..Default::default() }, None).unwrap();
        assert_eq!(res.len(), 4);
        assert!(res.iter().all(|a| a.l.value == res[0].l.value));
    }

    #[test]
    fn dry_run_refuses_record_curves() {
        let n: BigUint = "37011629587668844576720608".parse().unwrap();
        let d = dry_run(&n, AnalyzeOptions { k: 3, ..Default::default() });
        assert!(d.m > 10_000_000_000);
        assert!(!d.within_budget());
        assert_eq!(d.into_result().unwrap_err().kind(), "budget-exceeded");
        let d = dry_run(&11u32.into(), AnalyzeOptions::default());
        assert_eq!(d.m, 13);
        assert!(d.within_budget());
    }
}
