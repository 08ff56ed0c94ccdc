//! End-to-end criterion check: input formats, fixtures, the ordered step
//! list, verdicts and report rendering.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::cox::Monomial;
use crate::divisor::{CartierData, ToricVariety, VeryAmple, WeilDivisor};
use crate::fan::{self, Fan};
use crate::jacobian::{
    multiplication_surjective, quasi_smooth_certificate, sample_section, QuasiSmoothOptions, QuasiSmoothness,
    RankMode, Section, DEFAULT_PRIME, DEFAULT_WINDOW,
};
use crate::oda::check_hodge_pair;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PipelineError {
    #[error("input error: {0}")]
    Input(String),
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

impl PipelineError {
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Input(_) => 3,
            PipelineError::Internal(_) => 4,
        }
    }
}

fn input(e: impl fmt::Display) -> PipelineError {
    PipelineError::Input(e.to_string())
}

fn internal(e: impl fmt::Display) -> PipelineError {
    PipelineError::Internal(e.to_string())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Oda,
    Jacobian,
    Both,
}

impl FromStr for Mode {
    type Err = PipelineError;
    fn from_str(s: &str) -> Result<Mode, PipelineError> {
        match s {
            "oda" => Ok(Mode::Oda),
            "jacobian" => Ok(Mode::Jacobian),
            "both" => Ok(Mode::Both),
            _ => Err(input(format!("unknown mode {s:?}; expected oda, jacobian or both"))),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Oda => "oda",
            Mode::Jacobian => "jacobian",
            Mode::Both => "both",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StepStatus {
    Pass,
    Fail,
    Skipped,
    NotCertified,
}

impl fmt::Display for StepStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StepStatus::Pass => "pass",
            StepStatus::Fail => "fail",
            StepStatus::Skipped => "skipped",
            StepStatus::NotCertified => "not-certified",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Step {
    pub name: String,
    pub status: StepStatus,
    pub detail: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Value>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    CriterionSatisfied,
    CriterionNotEstablished,
    PreconditionFailed,
}

impl Verdict {
    pub fn exit_code(&self) -> i32 {
        match self {
            Verdict::CriterionSatisfied => 0,
            Verdict::CriterionNotEstablished => 1,
            Verdict::PreconditionFailed => 2,
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// A divisor given by its coefficients on the rays or by class coordinates.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DivisorSpec {
    Coeffs(Vec<i64>),
    Class(Vec<i64>),
}

impl DivisorSpec {
    pub fn resolve(&self, var: &ToricVariety) -> Result<WeilDivisor, PipelineError> {
        match self {
            DivisorSpec::Coeffs(c) => {
                if c.len() != var.ray_count() {
                    return Err(input(format!(
                        "divisor has {} coefficients but the fan has {} rays",
                        c.len(),
                        var.ray_count()
                    )));
                }
                Ok(WeilDivisor::new(c.clone()))
            }
            DivisorSpec::Class(c) => {
                let class = var.class_from(c).map_err(input)?;
                var.representative(&class).map_err(input)
            }
        }
    }
}

/// Parses `1,0,-2`.
pub fn parse_int_list(s: &str) -> Result<Vec<i64>, PipelineError> {
    s.split(',')
        .map(|t| t.trim().parse::<i64>().map_err(|_| input(format!("not an integer list: {s:?}"))))
        .collect()
}

pub fn parse_fan(text: &str) -> Result<Fan, PipelineError> {
    serde_json::from_str(text).map_err(|e| input(format!("fan file: {e}")))
}

pub fn parse_divisor(text: &str) -> Result<DivisorSpec, PipelineError> {
    serde_json::from_str(text).map_err(|e| input(format!("divisor file: {e}")))
}

pub fn fan_json(fan: &Fan) -> String {
    serde_json::to_string_pretty(fan).expect("fan serializes")
}

/// SHA-256 of the compact JSON form.
pub fn fan_hash(fan: &Fan) -> String {
    let bytes = serde_json::to_vec(fan).expect("fan serializes");
    Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Section file: class coordinates and `(monomial, numerator, denominator)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SectionFile {
    pub class: Vec<i64>,
    pub terms: Vec<(String, i64, i64)>,
}

impl SectionFile {
    pub fn parse(text: &str) -> Result<SectionFile, PipelineError> {
        serde_json::from_str(text).map_err(|e| input(format!("section file: {e}")))
    }

    pub fn to_section(&self, var: &ToricVariety) -> Result<Section, PipelineError> {
        let class = var.class_from(&self.class).map_err(input)?;
        let mut terms = Vec::with_capacity(self.terms.len());
        for (m, n, d) in &self.terms {
            if *d == 0 {
                return Err(input(format!("zero denominator on {m}")));
            }
            let mono = Monomial::parse(m, var.ray_count()).map_err(input)?;
            terms.push((mono, BigRational::new(BigInt::from(*n), BigInt::from(*d))));
        }
        Section::new(var, class, terms).map_err(input)
    }

    /// Only for sections whose coefficients fit in `i64`.
    pub fn from_section(f: &Section) -> Option<SectionFile> {
        let terms = f
            .terms()
            .iter()
            .map(|(m, c)| Some((m.to_string(), i64::try_from(c.numer()).ok()?, i64::try_from(c.denom()).ok()?)))
            .collect::<Option<Vec<_>>>()?;
        Some(SectionFile {
            class: f.class().coords(),
            terms,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckOptions {
    pub p: Option<u32>,
    pub mode: Mode,
    pub seed: u64,
    pub rank: RankMode,
    pub very_ample_bound: usize,
    pub window: usize,
    pub timing: bool,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions {
            p: None,
            mode: Mode::Oda,
            seed: 0,
            rank: RankMode::default(),
            very_ample_bound: 10_000,
            window: DEFAULT_WINDOW,
            timing: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InputEcho {
    pub fan_hash: String,
    pub dim: usize,
    pub rays: usize,
    pub divisor: DivisorSpec,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub representative: Option<Vec<i64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub class: Option<String>,
    pub p: Option<u32>,
    pub mode: Mode,
    pub seed: u64,
    pub rank: RankMode,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub input: InputEcho,
    pub steps: Vec<Step>,
    pub verdict: Verdict,
    /// `(step, witness)` for every failing step.
    pub witnesses: Vec<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing_ms: Option<u64>,
}

impl CheckReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn step(&self, name: &str) -> Option<&Step> {
        self.steps.iter().find(|s| s.name == name)
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "verdict: {}", self.verdict)?;
        for s in &self.steps {
            writeln!(f, "  [{}] {}: {}", s.status, s.name, s.detail)?;
        }
        for w in &self.witnesses {
            writeln!(f, "  witness {w}")?;
        }
        if let Some(ms) = self.timing_ms {
            writeln!(f, "  time: {ms} ms")?;
        }
        Ok(())
    }
}

struct Run {
    planned: Vec<&'static str>,
    steps: Vec<Step>,
}

impl Run {
    fn new(mode: Mode) -> Run {
        let mut planned = vec!["fan", "dimension", "cartier", "ample", "very-ample", "nef-second"];
        if mode != Mode::Jacobian {
            planned.push("oda-pair");
        }
        if mode != Mode::Oda {
            planned.extend(["section", "quasi-smooth", "multiplication-map"]);
        }
        Run {
            planned,
            steps: Vec::new(),
        }
    }

    fn push(&mut self, name: &'static str, status: StepStatus, detail: impl Into<String>, witness: Option<Value>) {
        debug_assert_eq!(self.planned.get(self.steps.len()), Some(&name));
        self.steps.push(Step {
            name: name.to_string(),
            status,
            detail: detail.into(),
            witness,
        });
    }

    fn skip_rest(&mut self) {
        for name in self.planned[self.steps.len()..].to_vec() {
            self.push(name, StepStatus::Skipped, "not run", None);
        }
    }
}

/// Runs the ordered hypothesis checks for `L` on the fan.
pub fn run_criterion(fan: &Fan, divisor: &DivisorSpec, opts: &CheckOptions) -> Result<CheckReport, PipelineError> {
    let start = Instant::now();
    let mut run = Run::new(opts.mode);
    let mut echo = InputEcho {
        fan_hash: fan_hash(fan),
        dim: fan.dim(),
        rays: fan.ray_count(),
        divisor: divisor.clone(),
        representative: None,
        class: None,
        p: opts.p,
        mode: opts.mode,
        seed: opts.seed,
        rank: opts.rank,
    };
    let verdict = check_steps(fan, divisor, opts, &mut run, &mut echo)?;
    if verdict == Verdict::PreconditionFailed {
        run.skip_rest();
    }
    let witnesses = run
        .steps
        .iter()
        .filter(|s| s.status == StepStatus::Fail)
        .map(|s| json!({ "step": s.name, "witness": s.witness.clone().unwrap_or(Value::Null) }))
        .collect();
    Ok(CheckReport {
        input: echo,
        steps: run.steps,
        verdict,
        witnesses,
        timing_ms: opts.timing.then(|| start.elapsed().as_millis() as u64),
    })
}

fn check_steps(
    fan: &Fan,
    divisor: &DivisorSpec,
    opts: &CheckOptions,
    run: &mut Run,
    echo: &mut InputEcho,
) -> Result<Verdict, PipelineError> {
    use StepStatus::*;
    let report = fan.validate();
    if !report.is_valid() {
        run.push("fan", Fail, "fan is not simplicial, complete and primitive", Some(json!(report.violations)));
        return Ok(Verdict::PreconditionFailed);
    }
    let var = ToricVariety::new(fan.clone()).map_err(internal)?;
    let l = divisor.resolve(&var)?;
    let class = var.class_of(&l).map_err(internal)?;
    echo.representative = Some(l.coeffs.clone());
    echo.class = Some(class.to_string());
    run.push(
        "fan",
        Pass,
        format!("simplicial complete fan, {} rays, Cl = {}", fan.ray_count(), var.class_group()),
        None,
    );

    let d = var.dim();
    let odd = d % 2 == 1;
    let p = match opts.p {
        Some(p) if !odd || 2 * p as usize + 1 != d => {
            return Err(input(format!("p = {p} does not satisfy d = 2p+1 for d = {d}")));
        }
        Some(p) => p,
        None if odd => ((d - 1) / 2) as u32,
        None => {
            run.push("dimension", Fail, format!("d = {d} is even"), Some(json!({ "dim": d })));
            return Ok(Verdict::PreconditionFailed);
        }
    };
    echo.p = Some(p);
    run.push("dimension", Pass, format!("d = {d} = 2p+1 with p = {p}"), None);

    match var.cartier_data(&l).map_err(internal)? {
        CartierData::Cartier { .. } => run.push("cartier", Pass, format!("L = {l:?} is Cartier", l = l.coeffs), None),
        CartierData::QCartierOnly { denominator, .. } => {
            run.push(
                "cartier",
                Fail,
                format!("L is only Q-Cartier; {denominator}L is Cartier"),
                Some(json!({ "denominator": denominator })),
            );
            return Ok(Verdict::PreconditionFailed);
        }
    }
    if !var.is_ample(&l).map_err(internal)? {
        let nef = var.is_nef(&l).map_err(internal)?;
        run.push(
            "ample",
            Fail,
            format!("class {class} is not ample"),
            Some(json!({ "class": class.coords(), "nef": nef })),
        );
        return Ok(Verdict::PreconditionFailed);
    }
    run.push("ample", Pass, format!("class {class} is ample"), None);
    match var.is_very_ample(&l, opts.very_ample_bound).map_err(internal)? {
        VeryAmple::Yes => run.push("very-ample", Pass, "very ample", None),
        VeryAmple::VerifiedUpToBound(b) => run.push(
            "very-ample",
            NotCertified,
            format!("generators verified up to bound {b} only"),
            None,
        ),
        VeryAmple::No { cone, missing } => {
            run.push(
                "very-ample",
                Fail,
                format!("not very ample: cone {cone} misses {missing:?}"),
                Some(json!({ "cone": cone, "missing": missing })),
            );
            return Ok(Verdict::PreconditionFailed);
        }
    }

    let second = &l.scale(i64::from(p)) - &var.anticanonical_divisor();
    let second_class = var.class_of(&second).map_err(internal)?;
    if !var.is_nef(&second).map_err(internal)? {
        run.push(
            "nef-second",
            Fail,
            format!("p*beta - beta0 = {second_class} is not nef"),
            Some(json!({ "class": second_class.coords(), "coeffs": second.coeffs })),
        );
        return Ok(Verdict::PreconditionFailed);
    }
    run.push("nef-second", Pass, format!("p*beta - beta0 = {second_class} is nef"), None);

    let mut oda_pass = None;
    if opts.mode != Mode::Jacobian {
        let r = check_hodge_pair(&var, &l, p).map_err(internal)?;
        if !r.verify_witnesses(&var).map_err(internal)? {
            return Err(internal("decomposition witness failed verification"));
        }
        if r.surjective {
            run.push(
                "oda-pair",
                Pass,
                format!("all {} lattice points of the target polytope decompose", r.target_points),
                None,
            );
        } else {
            run.push(
                "oda-pair",
                Fail,
                format!("{} of {} target points do not decompose", r.undecomposable.len(), r.target_points),
                Some(json!({ "undecomposable": r.undecomposable })),
            );
        }
        oda_pass = Some(r.surjective);
    }

    let mut jac_pass = None;
    if opts.mode != Mode::Oda {
        let f = sample_section(&var, &class, opts.seed).map_err(internal)?;
        run.push("section", Pass, format!("seed {} gives {} terms", opts.seed, f.len()), None);
        let prime = match opts.rank {
            RankMode::Modular { prime } | RankMode::Certified { prime } => prime,
            RankMode::Exact => DEFAULT_PRIME,
        };
        let qs = quasi_smooth_certificate(
            &var,
            &f,
            QuasiSmoothOptions {
                window: opts.window,
                prime,
            },
        )
        .map_err(internal)?;
        let qs_ok = match &qs {
            QuasiSmoothness::Certified { powers } => {
                let ks: Vec<u32> = powers.iter().map(|c| c.k).collect();
                run.push("quasi-smooth", Pass, format!("cone monomial powers in J(f) with k = {ks:?}"), None);
                true
            }
            QuasiSmoothness::NotCertified { reason, .. } => {
                run.push("quasi-smooth", NotCertified, reason.clone(), None);
                false
            }
        };
        let s = multiplication_surjective(&var, &f, p, opts.rank).map_err(internal)?;
        if s.surjective {
            run.push(
                "multiplication-map",
                Pass,
                format!("onto R_{} (dim S = {})", s.target, s.dim_target),
                None,
            );
        } else {
            run.push(
                "multiplication-map",
                Fail,
                format!("defect {} in R_{} (dim S = {})", s.defect, s.target, s.dim_target),
                Some(json!({ "defect": s.defect, "dim_target": s.dim_target, "rank": s.rank })),
            );
        }
        jac_pass = Some(s.surjective && qs_ok);
        if oda_pass == Some(true) && !s.surjective {
            return Err(internal("S-level multiplication is onto but the R-level map is not"));
        }
    }

    let established = match opts.mode {
        Mode::Oda | Mode::Both => oda_pass == Some(true),
        Mode::Jacobian => jac_pass == Some(true),
    };
    Ok(if established {
        Verdict::CriterionSatisfied
    } else {
        Verdict::CriterionNotEstablished
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fixture {
    pub name: &'static str,
    pub fan: Fan,
    pub divisor: DivisorSpec,
}

pub const FIXTURE_NAMES: &[&str] = &[
    "projective_space_3",
    "projective_space_5",
    "wps_112222",
    "hirzebruch_0",
    "hirzebruch_1",
    "hirzebruch_2",
    "p1xp1",
    "p1xp2",
    "p1xp1xp1",
    "non_oda_simplex",
];

pub fn fixture(name: &str) -> Result<Fixture, PipelineError> {
    let p1 = || fan::projective_space(1).map_err(internal);
    let (fan, divisor) = match name {
        "projective_space_3" => (fan::projective_space(3).map_err(internal)?, DivisorSpec::Coeffs(vec![4, 0, 0, 0])),
        "projective_space_5" => (fan::projective_space(5).map_err(internal)?, DivisorSpec::Coeffs(vec![3, 0, 0, 0, 0, 0])),
        "wps_112222" => (fan::weighted_projective(&[1, 1, 2, 2, 2, 2]).map_err(internal)?, DivisorSpec::Class(vec![6])),
        "hirzebruch_0" | "hirzebruch_1" | "hirzebruch_2" => {
            let a = name.as_bytes()[name.len() - 1] - b'0';
            (fan::hirzebruch(u32::from(a)).map_err(internal)?, DivisorSpec::Coeffs(vec![0, 0, 1, 1]))
        }
        "p1xp1" => (fan::product(&p1()?, &p1()?).map_err(internal)?, DivisorSpec::Coeffs(vec![1, 0, 1, 0])),
        "p1xp2" => (
            fan::product(&p1()?, &fan::projective_space(2).map_err(internal)?).map_err(internal)?,
            DivisorSpec::Coeffs(vec![2, 0, 3, 0, 0]),
        ),
        "p1xp1xp1" => (
            fan::product(&fan::product(&p1()?, &p1()?).map_err(internal)?, &p1()?).map_err(internal)?,
            DivisorSpec::Coeffs(vec![2, 0, 2, 0, 2, 0]),
        ),
        "non_oda_simplex" => (fan::non_oda_tetrahedron(), DivisorSpec::Coeffs(vec![2, 0, 0, 0])),
        _ => {
            return Err(input(format!(
                "unknown fixture {name:?}; known: {}",
                FIXTURE_NAMES.join(", ")
            )))
        }
    };
    let name = FIXTURE_NAMES.iter().find(|n| **n == name).expect("matched above");
    Ok(Fixture { name, fan, divisor })
}

impl Fixture {
    pub fn fan_file(&self) -> String {
        fan_json(&self.fan)
    }

    pub fn divisor_file(&self) -> String {
        serde_json::to_string_pretty(&self.divisor).expect("divisor serializes")
    }
}
