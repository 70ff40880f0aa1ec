//! Analytic order of the Tate-Shafarevich group for rank-zero elliptic
//! curves over the rationals.
//!
//! The pipeline runs: integral model -> global minimal model -> Tate's
//! algorithm at every bad prime (conductor, Tamagawa numbers) -> real period
//! -> truncated L-series at s = 1 -> torsion -> the Sha quotient.

pub mod ap;
pub mod bsd;
pub mod curve;
pub mod error;
pub mod family;
pub mod fp;
pub mod intarith;
pub mod localdata;
pub mod lseries;
pub mod numeric;
pub mod pipeline;
pub mod points;

pub use ap::{an_vec, ap, AnSieve, ApTable, CoefficientBlock};
pub use bsd::{analytic_sha, goldfeld_szpiro, isogeny_class_report, torsion_order, ClassSummary, ShaReport, ShaStatus};
pub use curve::{minimal_model, CurveInvariants, Transform, WeierstrassCurve};
pub use error::{Error, Result};
pub use family::{family_curve, isogeny_class, scan_grid, FamilyId, IsogenyClass};
pub use fp::count_points_mod_p;
pub use localdata::{global_data, tate_local, GlobalArithData, Kodaira, LocalData, Reduction};
pub use lseries::{approximate_l1, real_period, terms_needed, LTruncation, PeriodData};
pub use pipeline::{analyze, analyze_class, dry_run, Analysis, AnalyzeOptions, DryRun};
pub use points::AffinePointQ;
