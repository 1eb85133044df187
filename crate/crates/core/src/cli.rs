//! The `iwa` command line. [`run`] does all the work so that tests can drive
//! it without spawning a process.

use crate::dieudonne;
use crate::dirichlet::DirichletCharacter;
use crate::distribution::{growth_order, rho_profile, Distribution};
use crate::error::IwaError;
use crate::eulersys::{
    build_synthetic_system, rankin_factorization_check, validate_system, EulerPrime, GroupRingElement, TameLevel,
};
use crate::iwasawa::{IwasawaElement, Precision};
use crate::json::{self, DistributionJson, SeriesJson, SignedQuadrupleDoc, UnboundedQuadrupleDoc, SCHEMA};
use crate::lfunctions::{euler_factor_e, euler_factor_eprime, exceptional_zero_report, kl_series};
use crate::logs::{bridging_check, log_identity_check, pollack_log_with_cert, shifted_log_check, Kind, LogKind};
use crate::quad::Form;
use crate::signed::{factor_signed, synthesize, Convention, SignedLogs, SignedQuadruple};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DIVISIBILITY: i32 = 2;

/// Largest X-precision accepted on the command line.
pub const MAX_X_PREC: usize = 4096;

#[derive(Parser, Debug)]
#[command(name = "iwa", version, about = "p-adic signed factorisation toolkit")]
struct Cli {
    /// Output format; each command has its own default.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Table,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Pollack logarithm log^?_{p,r}, twisted by the shift.
    Pollack(PollackArgs),
    /// Signed factorisation of an unbounded quadruple.
    Factor(FactorArgs),
    /// Filtered φ-module checks for D_cris of a form and its square.
    Dieudonne(FormArgs),
    /// Euler factors E_p, E′_p and their exceptional zeros.
    Euler(EulerArgs),
    /// One branch of a Kubota–Leopoldt p-adic L-function.
    Kl(KlArgs),
    /// Euler-system relations in group rings.
    #[command(subcommand)]
    Eulersys(EulersysCmd),
    /// Growth order and ρ-norm profile of a logarithm or a series.
    Growth(GrowthArgs),
    /// Check one of the logarithm identities.
    Identity(IdentityArgs),
}

#[derive(Args, Debug)]
struct PrecArgs {
    #[arg(long, default_value_t = 20)]
    pprec: u32,
    #[arg(long, default_value_t = 32)]
    xprec: usize,
}

#[derive(Args, Debug)]
struct PollackArgs {
    #[arg(long)]
    p: u64,
    #[arg(long, default_value = "full")]
    kind: String,
    #[arg(long)]
    r: u32,
    #[arg(long, default_value_t = 0)]
    shift: u32,
    #[command(flatten)]
    prec: PrecArgs,
}

#[derive(Args, Debug)]
struct FactorArgs {
    #[arg(long)]
    k: u32,
    /// Unbounded quadruple document.
    #[arg(long, conflicts_with = "random")]
    input: Option<String>,
    /// Build the input from a random bounded quadruple with this seed.
    #[arg(long, required_unless_present = "input")]
    random: Option<u64>,
    /// With --random: only make the input divisible by log^±_{k+1}.
    #[arg(long, requires = "random")]
    weak_input: bool,
    #[arg(long)]
    p: Option<u64>,
    #[arg(long, allow_hyphen_values = true)]
    eps: Option<i64>,
    #[arg(long, default_value = "theoremA")]
    convention: String,
    /// Divide by log^±_{k+1} instead of log^±_{2k+2}.
    #[arg(long)]
    weak: bool,
    #[command(flatten)]
    prec: PrecArgs,
}

#[derive(Args, Debug)]
struct FormArgs {
    #[arg(long)]
    p: u64,
    #[arg(long)]
    k: u32,
    #[arg(long, allow_hyphen_values = true, default_value_t = 1)]
    eps: i64,
    #[arg(long, default_value_t = 20)]
    rel: u32,
}

#[derive(Args, Debug)]
struct EulerArgs {
    #[command(flatten)]
    form: FormArgs,
    /// χ(p) as `t<r>` (the Teichmüller lift ω(r)) or as ±1.
    #[arg(long, allow_hyphen_values = true)]
    chi_p: String,
    #[arg(long, allow_hyphen_values = true, conflicts_with = "report")]
    j: Option<i64>,
    /// Exceptional-zero report over `lo:hi`.
    #[arg(long)]
    report: Option<String>,
}

#[derive(Args, Debug)]
struct KlArgs {
    #[arg(long)]
    p: u64,
    /// Factors joined by `*`: `w<i>` for ω^i, `kr<d>` for the Kronecker symbol (d/·), `1`.
    #[arg(long, allow_hyphen_values = true)]
    eta: String,
    #[arg(long, allow_hyphen_values = true)]
    branch: i64,
    #[command(flatten)]
    prec: PrecArgs,
}

#[derive(Subcommand, Debug)]
enum EulersysCmd {
    /// Rankin–Selberg factorisation of the Euler polynomial at ℓ.
    Check(CheckArgs),
    /// Build a synthetic system top-down and validate every relation.
    Synth(SynthArgs),
}

#[derive(Args, Debug)]
struct CheckArgs {
    #[arg(long)]
    ell: u64,
    #[arg(long, allow_hyphen_values = true)]
    a: i64,
    #[arg(long, allow_hyphen_values = true, default_value_t = 1)]
    eps: i64,
    /// (ω^jχ)(ℓ).
    #[arg(long, allow_hyphen_values = true, default_value_t = 1)]
    chi: i64,
    #[arg(long)]
    k: u32,
    #[arg(long, allow_hyphen_values = true)]
    j: i64,
}

#[derive(Args, Debug)]
struct SynthArgs {
    #[arg(long, value_delimiter = ',')]
    primes: Vec<u64>,
    #[arg(long)]
    p: u64,
    #[arg(long)]
    seed_file: String,
    /// Add p^SHIFT to a coefficient after construction: `LEVEL:INDEX:SHIFT`,
    /// LEVEL a `/`-separated prime list.
    #[arg(long)]
    perturb: Option<String>,
}

#[derive(Args, Debug)]
struct GrowthArgs {
    /// Series document; otherwise the logarithm given by --p/--kind/--r.
    #[arg(long)]
    input: Option<String>,
    #[arg(long)]
    p: Option<u64>,
    #[arg(long, default_value = "full")]
    kind: String,
    #[arg(long)]
    r: Option<u32>,
    #[arg(long, default_value_t = 4)]
    depth: u32,
    #[arg(long, default_value_t = 12)]
    pprec: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Check {
    LogProduct,
    ShiftedLog,
    Bridging,
}

#[derive(Args, Debug)]
struct IdentityArgs {
    #[arg(long, default_value_t = 5)]
    p: u64,
    #[arg(long, value_enum)]
    check: Check,
    #[arg(long, default_value_t = 1)]
    r: u32,
    #[arg(long, default_value = "plus")]
    kind: String,
    #[arg(long, default_value_t = 0)]
    k: u32,
    #[arg(long, default_value_t = 30)]
    pprec: u32,
    #[arg(long, default_value_t = 64)]
    xprec: usize,
}

/// Input of `iwa eulersys synth`: the Euler data at each prime and either an
/// explicit top class or a seed for a random one.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeedDoc {
    pub schema: String,
    pub k: u32,
    pub j: i64,
    pub p_prec: u32,
    pub primes: Vec<EulerPrime>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coeffs: Option<Vec<u128>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rng_seed: Option<u64>,
}

/// What a command printed and how it ended.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

enum Failure {
    Usage(String),
    Divisibility(Value),
}

impl From<IwaError> for Failure {
    fn from(e: IwaError) -> Self {
        match e {
            IwaError::Divisibility(f) => Failure::Divisibility(json!({ "schema": SCHEMA, "divisibility_failure": f })),
            e => Failure::Usage(e.to_string()),
        }
    }
}

type Cmdres = std::result::Result<(Value, Format), Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

/// Run `iwa` with the given argv (including the program name).
pub fn run<I, T>(argv: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                Outcome { code: EXIT_USAGE, stdout: String::new(), stderr: text }
            } else {
                Outcome { code: EXIT_OK, stdout: text, stderr: String::new() }
            };
        }
    };
    let pool = match thread_pool() {
        Ok(p) => p,
        Err(msg) => return Outcome { code: EXIT_USAGE, stdout: String::new(), stderr: msg + "\n" },
    };
    let res = pool.install(|| dispatch(&cli.cmd));
    match res {
        Ok((v, default)) => Outcome { code: EXIT_OK, stdout: render(&v, cli.format.unwrap_or(default)), stderr: String::new() },
        Err(Failure::Divisibility(v)) => Outcome {
            code: EXIT_DIVISIBILITY,
            stdout: render(&v, cli.format.unwrap_or(Format::Json)),
            stderr: "divisibility failure\n".into(),
        },
        Err(Failure::Usage(msg)) => Outcome { code: EXIT_USAGE, stdout: String::new(), stderr: format!("error: {msg}\n") },
    }
}

fn thread_pool() -> std::result::Result<rayon::ThreadPool, String> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Ok(s) = std::env::var("IWA_THREADS") {
        let n: usize = s.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| format!("error: IWA_THREADS={s:?} is not a positive integer"))?;
        b = b.num_threads(n);
    }
    b.build().map_err(|e| format!("error: {e}"))
}

fn render(v: &Value, f: Format) -> String {
    match f {
        Format::Json => serde_json::to_string_pretty(v).expect("values serialise") + "\n",
        Format::Table => {
            let mut out = String::new();
            flatten("", v, &mut out);
            out
        }
    }
}

fn flatten(prefix: &str, v: &Value, out: &mut String) {
    let join = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                if k != "schema" {
                    flatten(&join(k), x, out);
                }
            }
        }
        Value::Array(a) => {
            for (i, x) in a.iter().enumerate() {
                flatten(&format!("{prefix}[{i}]"), x, out);
            }
        }
        Value::String(s) => out.push_str(&format!("{prefix}: {s}\n")),
        Value::Null => out.push_str(&format!("{prefix}: none\n")),
        x => out.push_str(&format!("{prefix}: {x}\n")),
    }
}

fn to_value<T: Serialize>(x: &T) -> std::result::Result<Value, Failure> {
    serde_json::to_value(x).map_err(|e| usage(e.to_string()))
}

fn read_file(path: &str) -> std::result::Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| usage(format!("cannot read {path}: {e}")))
}

fn precision(p: u64, pprec: u32, xprec: usize) -> std::result::Result<Precision, Failure> {
    if xprec > MAX_X_PREC {
        return Err(usage(format!("X-precision {xprec} exceeds the cap {MAX_X_PREC}")));
    }
    Ok(Precision::new(p, pprec, xprec)?)
}

fn parse_kind(s: &str) -> std::result::Result<Kind, Failure> {
    Ok(s.parse::<Kind>()?)
}

fn dispatch(cmd: &Cmd) -> Cmdres {
    match cmd {
        Cmd::Pollack(a) => pollack(a),
        Cmd::Factor(a) => factor(a),
        Cmd::Dieudonne(a) => {
            let form = Form::new(a.p, a.k, a.eps)?;
            Ok((json!({ "schema": SCHEMA, "dieudonne": to_value(&dieudonne::report(form, a.rel)?)? }), Format::Table))
        }
        Cmd::Euler(a) => euler(a),
        Cmd::Kl(a) => kl(a),
        Cmd::Eulersys(EulersysCmd::Check(a)) => check(a),
        Cmd::Eulersys(EulersysCmd::Synth(a)) => synth(a),
        Cmd::Growth(a) => growth(a),
        Cmd::Identity(a) => identity(a),
    }
}

fn pollack(a: &PollackArgs) -> Cmdres {
    let spec = LogKind::new(parse_kind(&a.kind)?, a.r, a.shift)?;
    let prec = precision(a.p, a.prec.pprec, a.prec.xprec)?;
    let (d, cert) = pollack_log_with_cert(spec, prec)?;
    let mut v = to_value(&DistributionJson::from_distribution(&d))?;
    v["schema"] = SCHEMA.into();
    v["truncation"] = to_value(&cert)?;
    Ok((v, Format::Json))
}

fn factor(a: &FactorArgs) -> Cmdres {
    let conv: Convention = a.convention.parse()?;
    let (quad, form) = match (&a.input, a.random) {
        (Some(path), _) => {
            let doc: UnboundedQuadrupleDoc = json::parse(&read_file(path)?)?;
            let form = doc.form()?;
            if form.k != a.k {
                return Err(usage(format!("input is for k = {}, not {}", form.k, a.k)));
            }
            (doc.quadruple()?, form)
        }
        (None, Some(seed)) => {
            let p = a.p.ok_or_else(|| usage("--random needs --p"))?;
            let form = Form::new(p, a.k, a.eps.unwrap_or(1))?;
            let prec = precision(p, a.prec.pprec, a.prec.xprec)?;
            let logs = if a.weak_input { SignedLogs::weak(a.k, prec)? } else { SignedLogs::strong(a.k, prec)? };
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let bounded = SignedQuadruple::random_integral(prec, Some(form), &mut rng);
            (synthesize(&bounded, &logs, form, conv)?, form)
        }
        (None, None) => return Err(usage("give --input or --random")),
    };
    let prec = quad.l_aa.prec();
    let logs = if a.weak { SignedLogs::weak(a.k, prec)? } else { SignedLogs::strong(a.k, prec)? };
    let out = factor_signed(&quad, &logs, form, conv)?;
    Ok((to_value(&SignedQuadrupleDoc::new(&out.quad, a.k, conv, Some(out.attained)))?, Format::Json))
}

/// χ(p) ∈ μ_{p−1} as the residue whose Teichmüller lift it is.
fn parse_chi_p(s: &str, p: u64) -> std::result::Result<u64, Failure> {
    if let Some(r) = s.strip_prefix('t') {
        return r.parse::<u64>().map(|r| r % p).map_err(|_| usage(format!("bad --chi-p {s:?}")));
    }
    match s {
        "1" => Ok(1),
        "-1" => Ok(p - 1),
        _ => Err(usage(format!("--chi-p must be t<r> or ±1, got {s:?}"))),
    }
}

fn euler(a: &EulerArgs) -> Cmdres {
    let f = &a.form;
    let form = Form::new(f.p, f.k, f.eps)?;
    let chi = parse_chi_p(&a.chi_p, f.p)?;
    if let Some(range) = &a.report {
        let (lo, hi) = range
            .split_once(':')
            .and_then(|(l, h)| Some((l.parse::<i64>().ok()?, h.parse::<i64>().ok()?)))
            .ok_or_else(|| usage(format!("--report expects lo:hi, got {range:?}")))?;
        let rep = exceptional_zero_report(&form, chi, lo, hi)?;
        return Ok((json!({ "schema": SCHEMA, "exceptional_zeros": to_value(&rep)? }), Format::Table));
    }
    let j = a.j.ok_or_else(|| usage("give --j or --report"))?;
    let rep = if j <= f.k as i64 + 1 { euler_factor_e(&form, chi, j, f.rel)? } else { euler_factor_eprime(&form, chi, j, f.rel)? };
    let mut v = to_value(&rep)?;
    v["value"] = to_value(&json::ScalarJson::from_scalar(&rep.product))?;
    Ok((json!({ "schema": SCHEMA, "euler_factor": v }), Format::Table))
}

/// `w2`, `kr-4`, `kr5*w1`, `1`.
fn parse_eta(s: &str, p: u64) -> std::result::Result<DirichletCharacter, Failure> {
    let mut eta = DirichletCharacter::trivial(p);
    for tok in s.split('*') {
        let f = if tok == "1" {
            DirichletCharacter::trivial(p)
        } else if let Some(i) = tok.strip_prefix('w') {
            DirichletCharacter::teichmuller(p, i.parse().map_err(|_| usage(format!("bad factor {tok:?}")))?)?
        } else if let Some(d) = tok.strip_prefix("kr") {
            DirichletCharacter::kronecker(p, d.parse().map_err(|_| usage(format!("bad factor {tok:?}")))?)?
        } else {
            return Err(usage(format!("unknown character factor {tok:?}")));
        };
        eta = eta.mul(&f)?;
    }
    Ok(eta)
}

fn kl(a: &KlArgs) -> Cmdres {
    let prec = precision(a.p, a.prec.pprec, a.prec.xprec)?;
    let eta = parse_eta(&a.eta, a.p)?;
    let s = kl_series(&eta, a.branch, prec)?;
    Ok((
        json!({
            "schema": SCHEMA,
            "branch": s.branch,
            "c": s.c,
            "level": s.level,
            "regularised": s.regularised,
            "checks": to_value(&s.checks)?,
            "series": to_value(&SeriesJson::from_element(&s.series))?,
        }),
        Format::Json,
    ))
}

fn check(a: &CheckArgs) -> Cmdres {
    if a.ell < 2 || !crate::padic::is_prime(a.ell) {
        return Err(usage(format!("ℓ = {} is not prime", a.ell)));
    }
    let c = rankin_factorization_check(a.ell, a.a, a.eps, a.chi, a.k, a.j)?;
    Ok((
        json!({
            "schema": SCHEMA,
            "ell": a.ell,
            "holds": c.holds,
            "sym2_euler": c.p.to_string(),
            "rankin_euler": c.q.to_string(),
            "difference": c.difference.to_string(),
        }),
        Format::Table,
    ))
}

fn synth(a: &SynthArgs) -> Cmdres {
    let doc: SeedDoc = json::parse(&read_file(&a.seed_file)?)?;
    let level = TameLevel::new(a.p, &a.primes)?;
    let seed = match (&doc.coeffs, doc.rng_seed) {
        (Some(c), None) => {
            if c.len() != level.size() {
                return Err(usage(format!("seed has {} coefficients, level needs {}", c.len(), level.size())));
            }
            let zero = GroupRingElement::zero(&level, doc.p_prec);
            let m = zero.modulus();
            GroupRingElement { coeffs: c.iter().map(|x| x % m).collect(), ..zero }
        }
        (None, Some(s)) => GroupRingElement::random(&level, doc.p_prec, &mut rand_chacha::ChaCha8Rng::seed_from_u64(s)),
        _ => return Err(usage("seed file needs exactly one of coeffs and rng_seed")),
    };
    let mut sys = build_synthetic_system(&seed, &doc.primes, doc.k, doc.j)?;
    if let Some(spec) = &a.perturb {
        let parts: Vec<&str> = spec.split(':').collect();
        let [lv, idx, sh] = parts[..] else { return Err(usage(format!("bad --perturb {spec:?}"))) };
        let r: Vec<u64> = lv.split('/').map(|x| x.parse()).collect::<std::result::Result<_, _>>().map_err(|_| usage("bad level"))?;
        let idx: usize = idx.parse().map_err(|_| usage("bad index"))?;
        let sh: u32 = sh.parse().map_err(|_| usage("bad shift"))?;
        sys.perturb(&r, idx, sh)?;
    }
    let report = validate_system(&sys)?;
    Ok((json!({ "schema": SCHEMA, "system": to_value(&sys)?, "validation": to_value(&report)? }), Format::Json))
}

fn growth(a: &GrowthArgs) -> Cmdres {
    let (body, label): (IwasawaElement, String) = match (&a.input, a.p, a.r) {
        (Some(path), None, None) => {
            let text = read_file(path)?;
            let v: Value = serde_json::from_str(&text).map_err(|e| usage(format!("malformed JSON: {e}")))?;
            if v.get("schema").and_then(|s| s.as_str()) != Some(SCHEMA) {
                return Err(usage("missing or unsupported schema"));
            }
            let mut v = v;
            v.as_object_mut().expect("object").remove("schema");
            let s: SeriesJson = serde_json::from_value(v).map_err(|e| usage(format!("malformed document: {e}")))?;
            (s.to_element()?, path.clone())
        }
        (None, Some(p), Some(r)) => {
            let spec = LogKind::new(parse_kind(&a.kind)?, r, 0)?;
            let n = (p as usize).pow(a.depth) + 1;
            let d: Distribution = crate::logs::pollack_log(spec, precision(p, a.pprec, n)?)?;
            (d.body, format!("log^{}_{{{p},{r}}}", spec.kind.symbol()))
        }
        _ => return Err(usage("give --input, or --p and --r")),
    };
    let order = growth_order(&body, a.depth)?;
    let profile: Vec<String> = rho_profile(&body, a.depth)?.iter().map(|r| r.to_string()).collect();
    Ok((
        json!({
            "schema": SCHEMA,
            "of": label,
            "depth": a.depth,
            "order": format!("{order:.4}"),
            "neg_log_rho": profile,
        }),
        Format::Table,
    ))
}

fn identity(a: &IdentityArgs) -> Cmdres {
    let prec = precision(a.p, a.pprec, a.xprec)?;
    let (name, deviation, holds, pp, xp) = match a.check {
        Check::LogProduct => {
            if a.r == 0 {
                return Err(usage("r must be at least 1"));
            }
            let r = log_identity_check(a.p, a.r, prec)?;
            (format!("p^(2r) prod_j (u^-j(1+X)-1) log^+_r log^-_r = log_r, r = {}", a.r), r.deviation_text(), r.deviation.is_none(), r.checked_p_prec, r.checked_x_prec)
        }
        Check::ShiftedLog => {
            let r = shifted_log_check(parse_kind(&a.kind)?, a.r, prec)?;
            (r.identity.clone(), r.deviation_text(), r.holds(), r.checked_p_prec, r.checked_x_prec)
        }
        Check::Bridging => {
            let r = bridging_check(a.k, prec)?;
            (r.identity.clone(), r.deviation_text(), r.holds(), r.checked_p_prec, r.checked_x_prec)
        }
    };
    Ok((
        json!({
            "schema": SCHEMA,
            "identity": name,
            "p": a.p,
            "holds": holds,
            "deviation": deviation,
            "checked_p_prec": pp,
            "checked_x_prec": xp,
        }),
        Format::Table,
    ))
}
