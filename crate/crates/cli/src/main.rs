use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use toric_hodge::cox::monomials_of_class;
use toric_hodge::divisor::{CartierData, ToricVariety, VeryAmple, WeilDivisor};
use toric_hodge::fan::Fan;
use toric_hodge::jacobian::sparse::PrimeField;
use toric_hodge::jacobian::{
    dim_r, multiplication_surjective, primitive_hodge_dims, sample_section, RankMode, Section, DEFAULT_PRIME,
    DEFAULT_WINDOW,
};
use toric_hodge::oda::{check_pair_divisors, search, OdaPairReport};
use toric_hodge::pipeline::{
    self, fixture, parse_int_list, run_criterion, CheckOptions, DivisorSpec, Mode, PipelineError, SectionFile,
    FIXTURE_NAMES,
};

#[derive(Parser)]
#[command(name = "toric-hodge", version, about = "Hodge criterion checks for hypersurfaces in toric varieties")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Emit JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Check that the fan is simplicial, complete and has primitive rays.
    Validate(FanArgs),
    /// Class group, ray classes and the anticanonical class.
    Classgroup(FanArgs),
    /// Is the divisor nef?
    Nef(DivisorArgs),
    /// Is the divisor ample (and Cartier, very ample)?
    Ample(AmpleArgs),
    /// Lattice points of the divisor polytope.
    PolytopePoints(DivisorArgs),
    /// Surjectivity of S_alpha x S_beta -> S_{alpha+beta}.
    OdaPair(OdaPairArgs),
    /// All (ample, nef) pairs with coefficients in [0, bound].
    OdaSearch(OdaSearchArgs),
    /// Dimensions of Jacobian-ring pieces of a section.
    JacobianDims(JacobianArgs),
    /// Full hypothesis check with a verdict.
    HodgeCriterion(CriterionArgs),
    /// List fixtures, or write one as fan and divisor files.
    Fixtures(FixtureArgs),
}

#[derive(Args)]
struct FanArgs {
    /// Fan file: {"dim": d, "rays": [[..]], "max_cones": [[..]]}.
    #[arg(long, conflicts_with = "fixture", required_unless_present = "fixture")]
    fan: Option<PathBuf>,
    /// Built-in fixture name.
    #[arg(long)]
    fixture: Option<String>,
}

#[derive(Args)]
struct DivisorSel {
    /// Coefficients on the rays.
    #[arg(long, allow_hyphen_values = true, conflicts_with_all = ["class", "divisor"])]
    coeffs: Option<String>,
    /// Class-group coordinates.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "divisor")]
    class: Option<String>,
    /// Divisor file: {"coeffs": [..]} or {"class": [..]}.
    #[arg(long)]
    divisor: Option<PathBuf>,
}

#[derive(Args)]
struct DivisorArgs {
    #[command(flatten)]
    fan: FanArgs,
    #[command(flatten)]
    divisor: DivisorSel,
}

#[derive(Args)]
struct AmpleArgs {
    #[command(flatten)]
    inner: DivisorArgs,
    /// Bound on semigroup generators for the very-ample check.
    #[arg(long, default_value_t = 10_000)]
    bound: usize,
}

#[derive(Args)]
struct OdaPairArgs {
    #[command(flatten)]
    fan: FanArgs,
    /// alpha as ray coefficients (defaults to the fixture or --divisor divisor).
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<String>,
    #[arg(long, allow_hyphen_values = true, conflicts_with = "alpha")]
    alpha_class: Option<String>,
    /// beta as ray coefficients (defaults to alpha).
    #[arg(long, allow_hyphen_values = true)]
    beta: Option<String>,
    #[arg(long, allow_hyphen_values = true, conflicts_with = "beta")]
    beta_class: Option<String>,
    #[arg(long)]
    divisor: Option<PathBuf>,
}

#[derive(Args)]
struct OdaSearchArgs {
    #[command(flatten)]
    fan: FanArgs,
    /// Coefficient bound.
    #[arg(long, default_value_t = 2)]
    bound: i64,
    /// Maximum number of pairs.
    #[arg(long, default_value_t = 1000)]
    limit: usize,
}

#[derive(Args)]
struct RankArgs {
    /// Exact rational elimination throughout.
    #[arg(long, conflicts_with = "prime")]
    exact: bool,
    /// Modular prime for rank computations.
    #[arg(long)]
    prime: Option<u64>,
}

impl RankArgs {
    fn mode(&self) -> Result<RankMode, PipelineError> {
        if self.exact {
            return Ok(RankMode::Exact);
        }
        let prime = self.prime.unwrap_or(DEFAULT_PRIME);
        if PrimeField::new(prime).is_none() {
            return Err(PipelineError::Input(format!("{prime} is not an odd prime below 2^63")));
        }
        Ok(RankMode::Certified { prime })
    }

    fn prime(&self) -> u64 {
        self.prime.unwrap_or(DEFAULT_PRIME)
    }
}

#[derive(Args)]
struct JacobianArgs {
    #[command(flatten)]
    inner: DivisorArgs,
    /// Section file; otherwise a seeded random section of the divisor class.
    #[arg(long, conflicts_with = "fermat")]
    section: Option<PathBuf>,
    /// Use the Fermat section (sum of pure powers).
    #[arg(long)]
    fermat: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Extra class to evaluate, repeatable.
    #[arg(long, allow_hyphen_values = true)]
    gamma: Vec<String>,
    #[command(flatten)]
    rank: RankArgs,
}

#[derive(Args)]
struct CriterionArgs {
    #[command(flatten)]
    inner: DivisorArgs,
    #[arg(long)]
    p: Option<u32>,
    /// oda, jacobian or both.
    #[arg(long, default_value = "oda")]
    mode: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    rank: RankArgs,
    /// Bound for the very-ample check.
    #[arg(long, default_value_t = 10_000)]
    bound: usize,
    /// Search window for quasi-smoothness.
    #[arg(long, default_value_t = DEFAULT_WINDOW)]
    window: usize,
    /// Include wall-clock time in the report.
    #[arg(long)]
    timing: bool,
}

#[derive(Args)]
struct FixtureArgs {
    /// Fixture to write; lists all fixtures when omitted.
    name: Option<String>,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

struct Outcome {
    text: String,
    json: Value,
    code: u8,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 3 } else { 0 });
        }
    };
    match dispatch(&cli.command) {
        Ok(out) => {
            let body = if cli.json {
                serde_json::to_string_pretty(&out.json).expect("json") + "\n"
            } else {
                out.text
            };
            let _ = std::io::stdout().write_all(body.as_bytes());
            ExitCode::from(out.code)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn input(e: impl std::fmt::Display) -> PipelineError {
    PipelineError::Input(e.to_string())
}

fn read(path: &Path) -> Result<String, PipelineError> {
    fs::read_to_string(path).map_err(|e| input(format!("{}: {e}", path.display())))
}

impl FanArgs {
    fn load(&self) -> Result<(Fan, Option<DivisorSpec>), PipelineError> {
        match (&self.fan, &self.fixture) {
            (Some(path), _) => Ok((pipeline::parse_fan(&read(path)?)?, None)),
            (None, Some(name)) => {
                let f = fixture(name)?;
                Ok((f.fan, Some(f.divisor)))
            }
            (None, None) => Err(input("one of --fan or --fixture is required")),
        }
    }
}

impl DivisorSel {
    fn spec(&self, default: Option<DivisorSpec>) -> Result<DivisorSpec, PipelineError> {
        if let Some(c) = &self.coeffs {
            return Ok(DivisorSpec::Coeffs(parse_int_list(c)?));
        }
        if let Some(c) = &self.class {
            return Ok(DivisorSpec::Class(parse_int_list(c)?));
        }
        if let Some(p) = &self.divisor {
            return pipeline::parse_divisor(&read(p)?);
        }
        default.ok_or_else(|| input("a divisor is required: --coeffs, --class or --divisor"))
    }
}

impl DivisorArgs {
    fn load(&self) -> Result<(ToricVariety, WeilDivisor), PipelineError> {
        let (var, default) = checked_variety(&self.fan)?;
        let d = self.divisor.spec(default)?.resolve(&var)?;
        Ok((var, d))
    }
}

fn dispatch(cmd: &Command) -> Result<Outcome, PipelineError> {
    match cmd {
        Command::Validate(a) => validate(a),
        Command::Classgroup(a) => classgroup(a),
        Command::Nef(a) => nef(a),
        Command::Ample(a) => ample(a),
        Command::PolytopePoints(a) => polytope_points(a),
        Command::OdaPair(a) => oda_pair(a),
        Command::OdaSearch(a) => oda_search(a),
        Command::JacobianDims(a) => jacobian_dims(a),
        Command::HodgeCriterion(a) => hodge_criterion(a),
        Command::Fixtures(a) => fixtures(a),
    }
}

fn validate(a: &FanArgs) -> Result<Outcome, PipelineError> {
    let (fan, _) = a.load()?;
    let r = fan.validate();
    let mut text = format!(
        "simplicial: {}\ncomplete: {}\nprimitive rays: {}\n",
        r.is_simplicial, r.is_complete, r.rays_primitive
    );
    for v in &r.violations {
        text.push_str(&format!("violation: {v}\n"));
    }
    Ok(Outcome {
        text,
        json: json!({
            "valid": r.is_valid(),
            "simplicial": r.is_simplicial,
            "complete": r.is_complete,
            "rays_primitive": r.rays_primitive,
            "violations": r.violations,
        }),
        code: if r.is_valid() { 0 } else { 1 },
    })
}

fn checked_variety(a: &FanArgs) -> Result<(ToricVariety, Option<DivisorSpec>), PipelineError> {
    let (fan, spec) = a.load()?;
    let r = fan.validate();
    if !r.is_valid() {
        return Err(input(format!("invalid fan: {}", r.violations.join("; "))));
    }
    let var = ToricVariety::new(fan).map_err(input)?;
    Ok((var, spec))
}

fn classgroup(a: &FanArgs) -> Result<Outcome, PipelineError> {
    let (var, _) = checked_variety(a)?;
    let group = var.class_group();
    let rays: Vec<Vec<i64>> = (0..var.ray_count()).map(|i| var.ray_class(i).coords()).collect();
    let anti = var.anticanonical_class();
    let mut text = format!("Cl = {group}\n");
    for (i, c) in rays.iter().enumerate() {
        text.push_str(&format!("[D{i}] = {c:?}\n"));
    }
    text.push_str(&format!("anticanonical = {:?}\n", anti.coords()));
    Ok(Outcome {
        text,
        json: json!({
            "group": group.to_string(),
            "free_rank": group.free_rank,
            "torsion": group.torsion.iter().map(|t| t.to_string()).collect::<Vec<_>>(),
            "ray_classes": rays,
            "anticanonical": anti.coords(),
        }),
        code: 0,
    })
}

fn nef(a: &DivisorArgs) -> Result<Outcome, PipelineError> {
    let (var, d) = a.load()?;
    let nef = var.is_nef(&d).map_err(input)?;
    let class = var.class_of(&d).map_err(input)?;
    Ok(Outcome {
        text: format!("class {class}: nef = {nef}\n"),
        json: json!({ "coeffs": d.coeffs, "class": class.coords(), "nef": nef }),
        code: if nef { 0 } else { 1 },
    })
}

fn ample(a: &AmpleArgs) -> Result<Outcome, PipelineError> {
    let (var, d) = a.inner.load()?;
    let class = var.class_of(&d).map_err(input)?;
    let cartier = match var.cartier_data(&d).map_err(input)? {
        CartierData::Cartier { .. } => json!(true),
        CartierData::QCartierOnly { denominator, .. } => json!({ "q_cartier_denominator": denominator }),
    };
    let ample = var.is_ample(&d).map_err(input)?;
    let very = if ample {
        match var.is_very_ample(&d, a.bound).map_err(input)? {
            VeryAmple::Yes => json!("yes"),
            VeryAmple::No { cone, missing } => json!({ "no": { "cone": cone, "missing": missing } }),
            VeryAmple::VerifiedUpToBound(b) => json!({ "verified_up_to_bound": b }),
        }
    } else {
        json!("no")
    };
    Ok(Outcome {
        text: format!("class {class}: cartier = {cartier}, ample = {ample}, very ample = {very}\n"),
        json: json!({
            "coeffs": d.coeffs,
            "class": class.coords(),
            "cartier": cartier,
            "ample": ample,
            "very_ample": very,
        }),
        code: if ample { 0 } else { 1 },
    })
}

fn polytope_points(a: &DivisorArgs) -> Result<Outcome, PipelineError> {
    let (var, d) = a.load()?;
    let poly = var.polytope(&d).map_err(input)?;
    let pts = poly.lattice_points().map_err(input)?;
    let mut text = format!("{} lattice points\n", pts.len());
    for p in pts {
        text.push_str(&format!("{p:?}\n"));
    }
    Ok(Outcome {
        text,
        json: json!({ "coeffs": d.coeffs, "count": pts.len(), "points": pts }),
        code: 0,
    })
}

fn pair_json(r: &OdaPairReport) -> Value {
    json!({
        "alpha": r.alpha_divisor.coeffs,
        "beta": r.beta_divisor.coeffs,
        "alpha_class": r.alpha.coords(),
        "beta_class": r.beta.coords(),
        "target_points": r.target_points,
        "surjective": r.surjective,
        "undecomposable": r.undecomposable,
    })
}

fn oda_pair(a: &OdaPairArgs) -> Result<Outcome, PipelineError> {
    let (var, default) = checked_variety(&a.fan)?;
    let default = match &a.divisor {
        Some(p) => Some(pipeline::parse_divisor(&read(p)?)?),
        None => default,
    };
    let pick = |coeffs: &Option<String>, class: &Option<String>| -> Result<Option<WeilDivisor>, PipelineError> {
        let spec = match (coeffs, class) {
            (Some(c), _) => DivisorSpec::Coeffs(parse_int_list(c)?),
            (None, Some(c)) => DivisorSpec::Class(parse_int_list(c)?),
            (None, None) => return Ok(None),
        };
        spec.resolve(&var).map(Some)
    };
    let alpha = match pick(&a.alpha, &a.alpha_class)? {
        Some(d) => d,
        None => default
            .ok_or_else(|| input("alpha is required: --alpha, --alpha-class or --divisor"))?
            .resolve(&var)?,
    };
    let beta = pick(&a.beta, &a.beta_class)?.unwrap_or_else(|| alpha.clone());
    let r = check_pair_divisors(&var, &alpha, &beta).map_err(input)?;
    let mut text = format!(
        "alpha = {:?}, beta = {:?}: {} target points, surjective = {}\n",
        alpha.coeffs, beta.coeffs, r.target_points, r.surjective
    );
    for p in &r.undecomposable {
        text.push_str(&format!("undecomposable {p:?}\n"));
    }
    let mut json = pair_json(&r);
    json["decomposition_witness"] = json!(r.decomposition_witness);
    Ok(Outcome {
        text,
        json,
        code: if r.surjective { 0 } else { 1 },
    })
}

fn oda_search(a: &OdaSearchArgs) -> Result<Outcome, PipelineError> {
    let (var, _) = checked_variety(&a.fan)?;
    let rs = search(&var, a.bound, a.limit).map_err(input)?;
    let failures = rs.iter().filter(|r| !r.surjective).count();
    let mut text = format!("{} pairs, {} not surjective\n", rs.len(), failures);
    for r in rs.iter().filter(|r| !r.surjective) {
        text.push_str(&format!(
            "alpha = {:?}, beta = {:?}: undecomposable {:?}\n",
            r.alpha_divisor.coeffs, r.beta_divisor.coeffs, r.undecomposable
        ));
    }
    Ok(Outcome {
        text,
        json: json!({ "pairs": rs.iter().map(pair_json).collect::<Vec<_>>(), "failures": failures }),
        code: if failures == 0 { 0 } else { 1 },
    })
}

fn jacobian_dims(a: &JacobianArgs) -> Result<Outcome, PipelineError> {
    let (var, default) = checked_variety(&a.inner.fan)?;
    let mode = a.rank.mode()?;
    let f = if let Some(p) = &a.section {
        SectionFile::parse(&read(p)?)?.to_section(&var)?
    } else {
        let d = a.inner.divisor.spec(default)?.resolve(&var)?;
        let class = var.class_of(&d).map_err(input)?;
        if a.fermat {
            Section::fermat(&var, &class).map_err(input)?
        } else {
            sample_section(&var, &class, a.seed).map_err(input)?
        }
    };
    let mut text = format!("section of class {} with {} terms\n", f.class(), f.len());
    let mut dims = Vec::new();
    for g in &a.gamma {
        let gamma = var.class_from(&parse_int_list(g)?).map_err(input)?;
        let s = monomials_of_class(&var, &gamma).map_err(input)?.len();
        let r = dim_r(&var, &f, &gamma, mode).map_err(input)?;
        text.push_str(&format!("gamma {gamma}: dim S = {s}, dim R = {r}\n"));
        dims.push(json!({ "gamma": gamma.coords(), "dim_s": s, "dim_r": r }));
    }
    let hodge = primitive_hodge_dims(&var, &f, a.rank.prime()).map_err(input)?;
    for h in &hodge {
        text.push_str(&format!("q = {}: dim R_{} = {}\n", h.q, h.class, h.dim));
    }
    let mut json = json!({
        "class": f.class().coords(),
        "terms": f.len(),
        "dims": dims,
        "hodge": hodge,
    });
    let d = var.dim();
    if d % 2 == 1 && var.is_ample(&var.representative(f.class()).map_err(input)?).map_err(input)? {
        let s = multiplication_surjective(&var, &f, ((d - 1) / 2) as u32, mode).map_err(input)?;
        text.push_str(&format!(
            "multiplication into R_{}: surjective = {}, defect = {}\n",
            s.target, s.surjective, s.defect
        ));
        json["multiplication"] = json!(s);
    }
    Ok(Outcome { text, json, code: 0 })
}

fn hodge_criterion(a: &CriterionArgs) -> Result<Outcome, PipelineError> {
    let (fan, default) = a.inner.fan.load()?;
    let spec = a.inner.divisor.spec(default)?;
    let opts = CheckOptions {
        p: a.p,
        mode: a.mode.parse::<Mode>()?,
        seed: a.seed,
        rank: a.rank.mode()?,
        very_ample_bound: a.bound,
        window: a.window,
        timing: a.timing,
    };
    let report = run_criterion(&fan, &spec, &opts)?;
    Ok(Outcome {
        text: report.to_string(),
        json: serde_json::to_value(&report).expect("report serializes"),
        code: report.verdict.exit_code() as u8,
    })
}

fn fixtures(a: &FixtureArgs) -> Result<Outcome, PipelineError> {
    let Some(name) = &a.name else {
        return Ok(Outcome {
            text: FIXTURE_NAMES.iter().map(|n| format!("{n}\n")).collect(),
            json: json!(FIXTURE_NAMES),
            code: 0,
        });
    };
    let f = fixture(name)?;
    fs::create_dir_all(&a.out).map_err(|e| input(format!("{}: {e}", a.out.display())))?;
    let fan_path = a.out.join(format!("{name}.fan.json"));
    let div_path = a.out.join(format!("{name}.divisor.json"));
    for (path, body) in [(&fan_path, f.fan_file()), (&div_path, f.divisor_file())] {
        fs::write(path, body + "\n").map_err(|e| input(format!("{}: {e}", path.display())))?;
    }
    Ok(Outcome {
        text: format!("wrote {}\nwrote {}\n", fan_path.display(), div_path.display()),
        json: json!({ "fan": fan_path, "divisor": div_path }),
        code: 0,
    })
}
