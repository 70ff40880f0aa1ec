//! Scan rows and their CSV / JSON renderings.

use serde::{Deserialize, Serialize};
use shaforge_core::bsd::goldfeld_szpiro_decimal;
use shaforge_core::{Analysis, FamilyId, ShaStatus};

pub const CSV_HEADER: &str = "n,p,i,conductor,torsion,c_fin,sha,sha_sqrt,gs,status";

/// Decimal places of the Goldfeld-Szpiro column, truncated.
pub const GS_DECIMALS: u32 = 10;

pub const STATUS_CONDUCTOR_ONLY: &str = "conductor-only";

/// One row per class member. Integers are kept as decimal strings and reals
/// are rounded to 10 significant digits, so a record survives a JSON round
/// trip unchanged.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanRecord {
    pub family_id: FamilyId,
    pub conductor: Option<String>,
    pub torsion_i: Option<u32>,
    pub c_fin_i: Option<String>,
    pub c_infty_i: Option<String>,
    pub s_m: Option<String>,
    pub sha_int_i: Option<String>,
    pub sha_sqrt_i: Option<String>,
    pub gs_i: Option<String>,
    pub status: String,
}

impl ScanRecord {
    pub fn bare(id: FamilyId, status: &str) -> Self {
        ScanRecord {
            family_id: id,
            conductor: None,
            torsion_i: None,
            c_fin_i: None,
            c_infty_i: None,
            s_m: None,
            sha_int_i: None,
            sha_sqrt_i: None,
            gs_i: None,
            status: status.to_string(),
        }
    }

    pub fn from_analysis(id: FamilyId, a: &Analysis) -> Self {
        let r = &a.report;
        let ok = r.status == ShaStatus::Ok;
        ScanRecord {
            family_id: id,
            conductor: Some(a.data.conductor.to_string()),
            torsion_i: Some(a.torsion),
            c_fin_i: Some(a.data.c_fin.to_string()),
            c_infty_i: Some(sig10(a.period.c_infty_f64())),
            s_m: Some(sig10(a.l.s_m_f64())),
            sha_int_i: ok.then(|| r.sha_int.to_string()),
            sha_sqrt_i: ok.then(|| r.sha_sqrt.to_string()),
            gs_i: ok.then(|| goldfeld_szpiro_decimal(&r.sha_int, &a.data.conductor, GS_DECIMALS)),
            status: r.status.to_string(),
        }
    }

    pub fn csv_row(&self) -> String {
        let o = |v: &Option<String>| v.clone().unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            self.family_id.n,
            self.family_id.p,
            self.family_id.i,
            o(&self.conductor),
            self.torsion_i.map(|t| t.to_string()).unwrap_or_default(),
            o(&self.c_fin_i),
            o(&self.sha_int_i),
            o(&self.sha_sqrt_i),
            o(&self.gs_i),
            self.status
        )
    }

    pub fn json_row(&self) -> String {
        serde_json::to_string(self).expect("record serializes")
    }
}

/// `x` rounded to 10 significant digits, plain decimal when reasonable.
pub fn sig10(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.9e}");
    let (mant, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("exponent");
    if !(-5..=12).contains(&exp) {
        return sci;
    }
    let neg = mant.starts_with('-');
    let digits: String = mant.chars().filter(char::is_ascii_digit).collect();
    let body = if exp >= 0 {
        let split = exp as usize + 1;
        if split >= digits.len() {
            format!("{digits}{}", "0".repeat(split - digits.len()))
        } else {
            format!("{}.{}", &digits[..split], &digits[split..])
        }
    } else {
        format!("0.{}{digits}", "0".repeat((-exp - 1) as usize))
    };
    if neg {
        format!("-{body}")
    } else {
        body
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digits() {
        assert_eq!(sig10(5.244_115_108_584_24), "5.244115109");
        assert_eq!(sig10(0.253_841_860_855_910_7), "0.2538418609");
        assert_eq!(sig10(-0.000123456789012), "-0.0001234567890");
        assert_eq!(sig10(1234567.891234), "1234567.891");
        assert_eq!(sig10(1e20), "1.000000000e20");
        assert_eq!(sig10(0.0), "0");
        assert_eq!(sig10(9999999999.7), "10000000000");
    }

    #[test]
    fn csv_row_leaves_missing_fields_empty() {
        let id = FamilyId::new(3, 1, -7).unwrap();
        let mut r = ScanRecord::bare(id, "budget-exceeded");
        r.conductor = Some("123".into());
        assert_eq!(r.csv_row(), "1,-7,3,123,,,,,,budget-exceeded");
        let back: ScanRecord = serde_json::from_str(&r.json_row()).unwrap();
        assert_eq!(back, r);
        assert_eq!(CSV_HEADER.split(',').count(), r.csv_row().split(',').count());
    }
}
