//! `analyze`, `ap` and `localdata`.

use std::fmt::Write as _;
use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use serde::Serialize;
use shaforge_core::ap::ApTable;
use shaforge_core::bsd::goldfeld_szpiro_decimal;
use shaforge_core::{
    analyze, dry_run, family_curve, global_data, Analysis, AnalyzeOptions, DryRun, FamilyId, GlobalArithData,
    ShaStatus, WeierstrassCurve,
};

use crate::error::{CliError, CliResult};
use crate::record::{sig10, GS_DECIMALS};

/// A curve given on the command line, literally or as a family member.
#[derive(Clone, Debug)]
pub struct CurveInput {
    pub curve: WeierstrassCurve,
    pub family: Option<FamilyId>,
}

impl CurveInput {
    pub fn parse(curve: Option<&str>, family: Option<&str>) -> CliResult<Self> {
        match (curve, family) {
            (Some(c), None) => Ok(CurveInput { curve: c.parse()?, family: None }),
            (None, Some(f)) => {
                let id: FamilyId = f.parse()?;
                Ok(CurveInput { curve: family_curve(id)?, family: Some(id) })
            }
            _ => Err(CliError::Usage("give exactly one of --curve or --family".into())),
        }
    }

    fn label(&self) -> String {
        match self.family {
            Some(id) => format!("{id} {}", self.curve),
            None => self.curve.to_string(),
        }
    }
}

#[derive(Serialize)]
struct LocalJson {
    p: String,
    kodaira: String,
    f_p: u32,
    c_p: u32,
    reduction: &'static str,
}

#[derive(Serialize)]
struct GlobalJson {
    input: String,
    minimal: String,
    conductor: String,
    disc_min: String,
    c_fin: String,
    locals: Vec<LocalJson>,
}

fn global_json(input: &CurveInput, g: &GlobalArithData) -> GlobalJson {
    GlobalJson {
        input: input.label(),
        minimal: g.minimal.to_string(),
        conductor: g.conductor.to_string(),
        disc_min: g.disc_min.to_string(),
        c_fin: g.c_fin.to_string(),
        locals: g
            .locals
            .iter()
            .map(|l| LocalJson {
                p: l.p.to_string(),
                kodaira: l.kodaira.to_string(),
                f_p: l.f_p,
                c_p: l.c_p,
                reduction: l.reduction.as_str(),
            })
            .collect(),
    }
}

fn global_text(input: &CurveInput, g: &GlobalArithData) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "curve         {}", input.label());
    let _ = writeln!(s, "minimal       {}", g.minimal);
    let _ = writeln!(s, "disc_min      {}", g.disc_min);
    let _ = writeln!(s, "conductor     {}", g.conductor);
    let _ = writeln!(s, "c_fin         {}", g.c_fin);
    for l in &g.locals {
        let _ = writeln!(
            s,
            "  p = {:<10} {:<6} f_p = {}  c_p = {}  {}",
            l.p,
            l.kodaira.to_string(),
            l.f_p,
            l.c_p,
            l.reduction.as_str()
        );
    }
    s
}

pub fn cmd_localdata(input: &CurveInput, json: bool) -> CliResult<String> {
    let g = global_data(&input.curve)?;
    Ok(if json { to_json(&global_json(input, &g)) } else { global_text(input, &g) })
}

#[derive(Serialize)]
struct ApJson {
    p: u64,
    a_p: i64,
}

pub fn cmd_ap(input: &CurveInput, limit: u64, json: bool, cache: Option<&Path>) -> CliResult<String> {
    let g = global_data(&input.curve)?;
    let table = ApTable::compute(&g, limit);
    if let Some(path) = cache {
        let f = File::create(path).map_err(CliError::io(path))?;
        table.write_cache(&g, BufWriter::new(f)).map_err(CliError::io(path))?;
    }
    let pairs = table.primes().iter().zip(table.values());
    Ok(if json {
        let rows: Vec<ApJson> = pairs.map(|(&p, &a)| ApJson { p, a_p: a as i64 }).collect();
        to_json(&rows)
    } else {
        pairs.map(|(p, a)| format!("{p} {a}\n")).collect()
    })
}

#[derive(Serialize)]
struct AnalyzeJson {
    #[serde(flatten)]
    global: GlobalJson,
    torsion: u32,
    omega: String,
    c_infty: String,
    connected: bool,
    root_number: i32,
    k: u32,
    m: u64,
    s_m: String,
    l_value: String,
    sha_real: String,
    sha_int: Option<String>,
    sha_sqrt: Option<String>,
    residual: f64,
    square_tol: f64,
    gs: Option<String>,
    status: ShaStatus,
}

fn analysis_json(input: &CurveInput, a: &Analysis) -> AnalyzeJson {
    let r = &a.report;
    let ok = r.status == ShaStatus::Ok;
    AnalyzeJson {
        global: global_json(input, &a.data),
        torsion: a.torsion,
        omega: sig10(a.period.omega_f64()),
        c_infty: sig10(a.period.c_infty_f64()),
        connected: a.period.connected,
        root_number: a.l.root_number,
        k: a.l.k,
        m: a.l.m,
        s_m: sig10(a.l.s_m_f64()),
        l_value: sig10(a.l.value_f64()),
        sha_real: sig10(r.sha_real),
        sha_int: ok.then(|| r.sha_int.to_string()),
        sha_sqrt: ok.then(|| r.sha_sqrt.to_string()),
        residual: r.residual,
        square_tol: r.square_tol,
        gs: ok.then(|| goldfeld_szpiro_decimal(&r.sha_int, &a.data.conductor, GS_DECIMALS)),
        status: r.status,
    }
}

fn analysis_text(input: &CurveInput, a: &Analysis) -> String {
    let r = &a.report;
    let mut s = global_text(input, &a.data);
    let _ = writeln!(s, "torsion       {}", a.torsion);
    let _ = writeln!(s, "omega         {}", sig10(a.period.omega_f64()));
    let _ = writeln!(
        s,
        "c_infty       {} ({})",
        sig10(a.period.c_infty_f64()),
        if a.period.connected { "connected" } else { "two components" }
    );
    let _ = writeln!(s, "root number   {:+}", a.l.root_number);
    let _ = writeln!(s, "L(E,1)        {}  (k = {}, m = {})", sig10(a.l.value_f64()), a.l.k, a.l.m);
    let _ =
        writeln!(s, "sha (real)    {}  residual {:.3e}, tolerance {:.3e}", sig10(r.sha_real), r.residual, r.square_tol);
    if r.status == ShaStatus::Ok {
        let _ = writeln!(s, "sha           {} = {}^2", r.sha_int, r.sha_sqrt);
        let _ = writeln!(s, "GS            {}", goldfeld_szpiro_decimal(&r.sha_int, &a.data.conductor, GS_DECIMALS));
    }
    let _ = writeln!(s, "status        {}", r.status);
    s
}

fn dry_run_text(input: &CurveInput, d: &DryRun) -> String {
    format!(
        "curve         {}\nconductor     {}\nk             {}\nterms m       {}\ncoefficients  {}\nestimate      {:.3e} s on one core\nbudget        {} ({})\n",
        input.label(),
        d.conductor,
        d.k,
        d.m,
        d.coefficients,
        d.estimated_seconds,
        d.max_terms,
        if d.within_budget() { "within budget" } else { "refused" }
    )
}

/// The rendered report, plus the error that sets the exit status when the
/// pipeline could not produce an `ok` Sha.
pub struct AnalyzeOutput {
    pub text: String,
    pub error: Option<CliError>,
}

pub fn cmd_analyze(input: &CurveInput, opts: AnalyzeOptions, json: bool, dry: bool) -> CliResult<AnalyzeOutput> {
    if dry {
        let g = global_data(&input.curve)?;
        let d = dry_run(&g.conductor, opts);
        let text = if json { to_json(&d) } else { dry_run_text(input, &d) };
        let error = d.into_result().err().map(CliError::from);
        return Ok(AnalyzeOutput { text, error });
    }
    let a = analyze(&input.curve, opts)?;
    let text = if json { to_json(&analysis_json(input, &a)) } else { analysis_text(input, &a) };
    let error = a.report.clone().into_result().err().map(CliError::from);
    Ok(AnalyzeOutput { text, error })
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn input_parsing() {
        let i = CurveInput::parse(Some("[0,-1,1,-10,-20]"), None).unwrap();
        assert_eq!(i.curve, WeierstrassCurve::from_ints([0, -1, 1, -10, -20]));
        let i = CurveInput::parse(None, Some("1,0,-1")).unwrap();
        assert_eq!(i.curve, WeierstrassCurve::from_ints([0, -14, 0, 13, 0]));
        assert_eq!(CurveInput::parse(None, None).unwrap_err().kind(), "usage");
        assert_eq!(CurveInput::parse(None, Some("1,0,12")).unwrap_err().kind(), "degenerate-parameters");
        assert_eq!(CurveInput::parse(Some("[1,2]"), None).unwrap_err().kind(), "parse");
    }

    #[test]
    fn analyze_eleven_a() {
        let i = CurveInput::parse(Some("[0,-1,1,-10,-20]"), None).unwrap();
        let out = cmd_analyze(&i, AnalyzeOptions { k: 10, ..Default::default() }, false, false).unwrap();
        assert!(out.error.is_none());
        assert!(out.text.contains("sha           1 = 1^2"), "{}", out.text);
        assert!(out.text.contains("torsion       5"));
        let out = cmd_analyze(&i, AnalyzeOptions::default(), true, false).unwrap();
        let v: serde_json::Value = serde_json::from_str(&out.text).unwrap();
        assert_eq!(v["sha_int"], "1");
        assert_eq!(v["conductor"], "11");
        assert_eq!(v["status"], "ok");
    }

    #[test]
    fn localdata_and_ap_dumps() {
        let i = CurveInput::parse(Some("[0,0,0,-1,0]"), None).unwrap();
        let text = cmd_localdata(&i, false).unwrap();
        assert!(text.contains("conductor     32"));
        assert!(text.contains("III"));
        let ap = cmd_ap(&i, 13, false, None).unwrap();
        assert_eq!(ap, "2 0\n3 0\n5 -2\n7 0\n11 0\n13 6\n");
    }
}
