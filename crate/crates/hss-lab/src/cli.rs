//! Command-line front end: experiments described by a JSON config file,
//! with a machine-readable JSON report on stdout, a one-line summary on
//! stderr, and exit codes 0 (positive verdict), 1 (negative verdict: not
//! hiding, or an attack with real advantage), 2 (usage or config errors).
//!
//! Given the same config and seed, output is byte-for-byte reproducible.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::ctxhide::{self, AdvantageReport, Distinguisher, HidingVerdict};
use crate::equiv::EquivalenceTransform;
use crate::error::{Error, Result};
use crate::field::{Field, FieldElement};
use crate::hss::{self, SchemeParams};
use crate::linalg::Matrix;
use crate::poly::{Domain, MultivariatePolynomial};

/// One experiment instance as stored on disk. Flags can override `trials`,
/// `seed`, `budget`, and `mode`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub p: u64,
    pub n: usize,
    pub m: usize,
    pub t: usize,
    pub d: u64,
    /// Function text, e.g. "x1*x2" or "3*x1^2 + 1".
    pub f: String,
    #[serde(default)]
    pub domain: DomainSpec,
    #[serde(default)]
    pub mode: Option<String>,
    #[serde(default)]
    pub trials: Option<u64>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub budget: Option<u64>,
    #[serde(default)]
    pub transform: Option<TransformSpec>,
    /// Second transform for `equiv compose` (applied after `transform`).
    #[serde(default)]
    pub second_transform: Option<TransformSpec>,
}

/// Domain in configs: "full", "punctured", or an explicit list of points.
#[derive(Debug, Clone, Deserialize, Serialize, PartialEq, Eq)]
#[serde(untagged)]
pub enum DomainSpec {
    Named(String),
    Points(Vec<Vec<u64>>),
}

impl Default for DomainSpec {
    fn default() -> Self {
        DomainSpec::Named("full".into())
    }
}

impl DomainSpec {
    fn to_domain(&self, field: Field) -> Result<Domain> {
        match self {
            DomainSpec::Named(name) => match name.as_str() {
                "full" => Ok(Domain::Full),
                "punctured" => Ok(Domain::Punctured),
                other => Err(Error::Parse(format!(
                    "unknown domain {other:?}, expected \"full\", \"punctured\", or a point list"
                ))),
            },
            DomainSpec::Points(points) => Domain::explicit(
                points
                    .iter()
                    .map(|xs| xs.iter().map(|&v| field.element(v)).collect())
                    .collect(),
            ),
        }
    }

    fn from_domain(domain: &Domain) -> Self {
        match domain {
            Domain::Full => DomainSpec::Named("full".into()),
            Domain::Punctured => DomainSpec::Named("punctured".into()),
            Domain::Explicit(points) => DomainSpec::Points(
                points
                    .iter()
                    .map(|xs| xs.iter().map(|v| v.value()).collect())
                    .collect(),
            ),
        }
    }
}

/// Instance map in configs; all residues reduce mod p, L is row-major.
#[derive(Debug, Clone, Deserialize, Serialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct TransformSpec {
    pub alpha: u64,
    pub beta: u64,
    pub gamma: u64,
    #[serde(rename = "L")]
    pub l: Vec<Vec<u64>>,
    pub c: Vec<u64>,
    pub e: Vec<u64>,
}

impl TransformSpec {
    fn to_transform(&self, field: Field) -> Result<EquivalenceTransform> {
        EquivalenceTransform::new(
            field.element(self.alpha),
            field.element(self.beta),
            field.element(self.gamma),
            Matrix::from_residues(field, &self.l)?,
            self.c.iter().map(|&v| field.element(v)).collect(),
            self.e.iter().map(|&v| field.element(v)).collect(),
        )
    }

    fn from_transform(s: &EquivalenceTransform) -> Self {
        TransformSpec {
            alpha: s.alpha().value(),
            beta: s.beta().value(),
            gamma: s.gamma().value(),
            l: s.matrix().residues(),
            c: s.input_shift().iter().map(|v| v.value()).collect(),
            e: s.output_shift().iter().map(|v| v.value()).collect(),
        }
    }
}

/// What a command produced: the stdout report, the stderr summary, and the
/// process exit code.
#[derive(Debug, Clone)]
pub struct CmdOutcome {
    pub report: Value,
    pub summary: String,
    pub exit_code: i32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Mode {
    Exact,
    MonteCarlo,
}

impl Mode {
    fn as_str(self) -> &'static str {
        match self {
            Mode::Exact => "exact",
            Mode::MonteCarlo => "monte-carlo",
        }
    }
}

fn parse_mode(text: Option<&str>) -> Result<Mode> {
    match text {
        None | Some("exact") => Ok(Mode::Exact),
        Some("mc") | Some("monte-carlo") => Ok(Mode::MonteCarlo),
        Some(other) => Err(Error::Parse(format!(
            "unknown mode {other:?}, expected \"exact\" or \"mc\""
        ))),
    }
}

const DEFAULT_BUDGET: u64 = 10_000_000;
const DEFAULT_TRIALS: u64 = 200_000;

struct Instance {
    params: SchemeParams,
    field: Field,
    f: MultivariatePolynomial,
    domain: Domain,
    mode: Mode,
    budget: u64,
}

/// Builds and validates the pieces every command needs.
fn instance(config: &ExperimentConfig) -> Result<Instance> {
    let params = SchemeParams::new(config.p, config.n, config.m, config.t, config.d)?;
    let field = params.field();
    let f = MultivariatePolynomial::parse(field, config.n, &config.f)?;
    if f.degree() > config.d {
        return Err(Error::DegreeViolation {
            degree: f.degree(),
            bound: config.d,
        });
    }
    let domain = config.domain.to_domain(field)?;
    let mode = parse_mode(config.mode.as_deref())?;
    let budget = config.budget.unwrap_or(DEFAULT_BUDGET);
    Ok(Instance {
        params,
        field,
        f,
        domain,
        mode,
        budget,
    })
}

fn residues(xs: &[FieldElement]) -> Vec<u64> {
    xs.iter().map(|v| v.value()).collect()
}

fn rational_string(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

fn log2_p(p: u64) -> f64 {
    (p as f64).log2()
}

/// Shares x, evaluates f at every server, decodes, and compares against
/// f(x) computed directly. The seed defaults to 0 and is recorded.
pub fn cmd_pipeline(config: &ExperimentConfig, x: &[u64]) -> Result<CmdOutcome> {
    let inst = instance(config)?;
    let params = &inst.params;
    if x.len() != params.arity() {
        return Err(Error::ArityMismatch {
            expected: params.arity(),
            got: x.len(),
        });
    }
    let x: Vec<FieldElement> = x.iter().map(|&v| inst.field.element(v)).collect();
    if !inst.domain.contains(&x) {
        return Err(Error::ParamViolation(format!(
            "the input {:?} lies outside the configured domain",
            residues(&x)
        )));
    }
    let seed = config.seed.unwrap_or(0);
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let shares = hss::share(params, &x, &mut rng)?;
    let ys = (1..=params.server_count())
        .map(|j| hss::eval(params, j, &inst.f, shares.share(j)?))
        .collect::<Result<Vec<_>>>()?;
    let decoded = hss::decode(params, &ys)?;
    let expected = inst.f.evaluate(&x)?;
    let pass = decoded == expected;
    let mut notes: Vec<String> = Vec::new();
    if !params.points_distinct_nonzero() {
        notes.push("evaluation points wrap modulo p; privacy degrades".into());
    }
    let report = json!({
        "command": "pipeline",
        "p": config.p,
        "n": config.n,
        "m": config.m,
        "t": config.t,
        "d": config.d,
        "f": inst.f.to_string(),
        "x": residues(&x),
        "seed": seed,
        "randomness": shares.randomness().iter().map(|r| residues(r)).collect::<Vec<_>>(),
        "shares": shares.shares().iter().map(|s| residues(s)).collect::<Vec<_>>(),
        "outputs": residues(&ys),
        "decoded": decoded.value(),
        "expected": expected.value(),
        "verdict": if pass { "pass" } else { "fail" },
        "notes": notes,
        "log2_p": log2_p(config.p),
    });
    let summary = if pass {
        format!(
            "pipeline at p={}: decoded {} matches f(x); pass",
            config.p,
            decoded.value()
        )
    } else {
        format!(
            "pipeline at p={}: decoded {} but f(x) = {}; fail",
            config.p,
            decoded.value(),
            expected.value()
        )
    };
    Ok(CmdOutcome {
        report,
        summary,
        exit_code: if pass { 0 } else { 1 },
    })
}

fn attack_distinguisher(inst: &Instance) -> Result<(Distinguisher, u64)> {
    if !inst.f.is_multilinear_monomial() || inst.f.degree() < 2 {
        return Err(Error::ParamViolation(format!(
            "the attack targets the product x1*...*xn with n >= 2, not {}",
            inst.f
        )));
    }
    let d = inst.f.degree();
    let dist = ctxhide::multilinear_distinguisher(&inst.params, d)?;
    Ok((dist, d))
}

/// Runs the product-monomial distinguisher and compares the measured
/// advantage with its closed form (p-1)^(d-1) / (2 p^(d-1)).
pub fn cmd_attack(config: &ExperimentConfig) -> Result<CmdOutcome> {
    let inst = instance(config)?;
    let (dist, d) = attack_distinguisher(&inst)?;
    let closed = ctxhide::multilinear_attack_advantage(config.p, d);
    let closed_str = rational_string(&closed);
    let (advantage_json, trials, half_width, seed, negative, detail) = match inst.mode {
        Mode::Exact => {
            let adv = ctxhide::exact_advantage(&inst.params, &inst.f, &dist, inst.budget)?;
            let matches = adv == closed;
            let s = rational_string(&adv);
            let detail = format!(
                "exact advantage {s} {} the closed form {closed_str}",
                if matches { "matches" } else { "DIFFERS FROM" }
            );
            (
                json!(s),
                Value::Null,
                Value::Null,
                Value::Null,
                adv > BigRational::from_integer(0.into()),
                detail,
            )
        }
        Mode::MonteCarlo => {
            let seed = config.seed.ok_or_else(|| {
                Error::ParamViolation("monte-carlo mode needs an explicit --seed".into())
            })?;
            let trials = config.trials.unwrap_or(DEFAULT_TRIALS);
            let report = ctxhide::estimate_advantage(&inst.params, &inst.f, &dist, trials, seed)?;
            let AdvantageReport::MonteCarlo {
                estimate,
                trials,
                half_width,
                seed,
            } = report
            else {
                unreachable!("estimate_advantage reports monte-carlo")
            };
            let significant = estimate > half_width;
            let detail = format!(
                "estimated advantage {estimate:.4} (+/- {half_width:.4}, 99%) over {trials} trials, closed form {closed_str}"
            );
            (
                json!(estimate),
                json!(trials),
                json!(half_width),
                json!(seed),
                significant,
                detail,
            )
        }
    };
    let verdict = if negative {
        "distinguisher-succeeds"
    } else {
        "no-significant-advantage"
    };
    let report = json!({
        "command": "attack",
        "mode": inst.mode.as_str(),
        "p": config.p,
        "n": config.n,
        "m": config.m,
        "t": config.t,
        "d": d,
        "f": inst.f.to_string(),
        "x0": residues(dist.x0()),
        "x1": residues(dist.x1()),
        "advantage": advantage_json,
        "closed_form": closed_str,
        "trials": trials,
        "half_width": half_width,
        "seed": seed,
        "verdict": verdict,
        "witness": Value::Null,
        "log2_p": log2_p(config.p),
    });
    let summary = format!(
        "attack on {} at p={}: {detail}; {verdict}",
        inst.f, config.p
    );
    Ok(CmdOutcome {
        report,
        summary,
        exit_code: if negative { 1 } else { 0 },
    })
}

/// Exhaustively checks output-share distribution equality over every
/// preimage class of f on the configured domain.
pub fn cmd_verify(config: &ExperimentConfig) -> Result<CmdOutcome> {
    let inst = instance(config)?;
    let verdict = ctxhide::verify_perfect_hiding(&inst.params, &inst.f, &inst.domain, inst.budget)?;
    let classes = ctxhide::preimage_classes(&inst.f, &inst.domain, inst.budget)?;
    let class_count = classes.len();
    let largest = classes.values().map(|c| c.len()).max().unwrap_or(0);
    let (verdict_str, witness, negative, detail) = match &verdict {
        HidingVerdict::PerfectlyHiding => (
            "perfectly-hiding",
            Value::Null,
            false,
            format!("perfectly hiding across {class_count} preimage classes"),
        ),
        HidingVerdict::NotHiding(v) => (
            "not-hiding",
            json!({
                "x0": v.x0,
                "x1": v.x1,
                "share_vector": v.share_vector,
                "count0": v.count0,
                "count1": v.count1,
            }),
            true,
            format!(
                "not hiding; {:?} vs {:?} differ at share vector {:?} ({} vs {})",
                v.x0, v.x1, v.share_vector, v.count0, v.count1
            ),
        ),
    };
    let report = json!({
        "command": "verify",
        "mode": "exact",
        "p": config.p,
        "n": config.n,
        "m": config.m,
        "t": config.t,
        "d": config.d,
        "f": inst.f.to_string(),
        "domain": DomainSpec::from_domain(&inst.domain),
        "budget": inst.budget,
        "class_count": class_count,
        "largest_class": largest,
        "verdict": verdict_str,
        "witness": witness,
        "log2_p": log2_p(config.p),
    });
    let summary = format!("verify {} at p={}: {detail}", inst.f, config.p);
    Ok(CmdOutcome {
        report,
        summary,
        exit_code: if negative { 1 } else { 0 },
    })
}

/// Subcommands of `hss equiv`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EquivActionKind {
    Apply,
    Invert,
    Compose,
    Transfer,
}

fn require_transform(config: &ExperimentConfig, field: Field) -> Result<EquivalenceTransform> {
    config
        .transform
        .as_ref()
        .ok_or_else(|| {
            Error::ParamViolation("this action needs a \"transform\" in the config".into())
        })?
        .to_transform(field)
}

fn random_transform(field: Field, n: usize, rng: &mut impl Rng) -> Result<EquivalenceTransform> {
    let p = field.modulus();
    let l = loop {
        let candidate = Matrix::from_rows(
            (0..n)
                .map(|_| (0..n).map(|_| field.random_element(rng)).collect())
                .collect(),
        )?;
        if candidate.is_invertible() {
            break candidate;
        }
    };
    EquivalenceTransform::new(
        field.element(rng.random_range(1..p)),
        field.random_element(rng),
        field.random_element(rng),
        l,
        (0..n).map(|_| field.random_element(rng)).collect(),
        (0..n).map(|_| field.random_element(rng)).collect(),
    )
}

/// Applies, inverts, composes, or transfers across an instance map.
pub fn cmd_equiv(config: &ExperimentConfig, action: EquivActionKind) -> Result<CmdOutcome> {
    let inst = instance(config)?;
    match action {
        EquivActionKind::Apply => {
            let s = require_transform(config, inst.field)?;
            let (g, f_domain) = s.apply_to_polynomial(&inst.f, &inst.domain, inst.budget)?;
            let report = json!({
                "command": "equiv-apply",
                "p": config.p,
                "n": config.n,
                "f": inst.f.to_string(),
                "g": g.to_string(),
                "transform": TransformSpec::from_transform(&s),
                "domain_g": DomainSpec::from_domain(&inst.domain),
                "domain_f": DomainSpec::from_domain(&f_domain),
                "log2_p": log2_p(config.p),
            });
            let summary = format!("equiv apply at p={}: g = {g}", config.p);
            Ok(CmdOutcome {
                report,
                summary,
                exit_code: 0,
            })
        }
        EquivActionKind::Invert => {
            let s = require_transform(config, inst.field)?;
            let inverse = s.invert();
            let report = json!({
                "command": "equiv-invert",
                "p": config.p,
                "n": config.n,
                "transform": TransformSpec::from_transform(&s),
                "inverse": TransformSpec::from_transform(&inverse),
                "log2_p": log2_p(config.p),
            });
            let summary = format!("equiv invert at p={}: inverse computed", config.p);
            Ok(CmdOutcome {
                report,
                summary,
                exit_code: 0,
            })
        }
        EquivActionKind::Compose => {
            let first = require_transform(config, inst.field)?;
            let second = config
                .second_transform
                .as_ref()
                .ok_or_else(|| {
                    Error::ParamViolation(
                        "compose needs \"transform\" and \"second_transform\" in the config".into(),
                    )
                })?
                .to_transform(inst.field)?;
            let composed = second.compose(&first)?;
            let report = json!({
                "command": "equiv-compose",
                "p": config.p,
                "n": config.n,
                "first": TransformSpec::from_transform(&first),
                "second": TransformSpec::from_transform(&second),
                "composed": TransformSpec::from_transform(&composed),
                "log2_p": log2_p(config.p),
            });
            let summary = format!(
                "equiv compose at p={}: composed transform computed",
                config.p
            );
            Ok(CmdOutcome {
                report,
                summary,
                exit_code: 0,
            })
        }
        EquivActionKind::Transfer => cmd_equiv_transfer(config, &inst),
    }
}

/// Carries the product attack across a transform (from the config, or a
/// seeded random one) and measures the advantage on both sides.
fn cmd_equiv_transfer(config: &ExperimentConfig, inst: &Instance) -> Result<CmdOutcome> {
    let (dist_f, _) = attack_distinguisher(inst)?;
    let seed = config.seed.unwrap_or(0);
    let (s, transform_source) = match &config.transform {
        Some(spec) => (spec.to_transform(inst.field)?, "config"),
        None => {
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            (
                random_transform(inst.field, config.n, &mut rng)?,
                "seeded-random",
            )
        }
    };
    let (g, _) = s.apply_to_polynomial(&inst.f, &inst.domain, inst.budget)?;
    let dist_g = s.invert().transfer_distinguisher(&g, &dist_f)?;
    let (adv_f_json, adv_g_json, preserved, negative, trials, half_width, detail) = match inst.mode
    {
        Mode::Exact => {
            let adv_f = ctxhide::exact_advantage(&inst.params, &inst.f, &dist_f, inst.budget)?;
            let adv_g = ctxhide::exact_advantage(&inst.params, &g, &dist_g, inst.budget)?;
            let preserved = adv_f == adv_g;
            let detail = format!(
                "advantage {} against f, {} against g",
                rational_string(&adv_f),
                rational_string(&adv_g)
            );
            (
                json!(rational_string(&adv_f)),
                json!(rational_string(&adv_g)),
                preserved,
                adv_g > BigRational::from_integer(0.into()),
                Value::Null,
                Value::Null,
                detail,
            )
        }
        Mode::MonteCarlo => {
            if config.seed.is_none() {
                return Err(Error::ParamViolation(
                    "monte-carlo mode needs an explicit --seed".into(),
                ));
            }
            let trials = config.trials.unwrap_or(DEFAULT_TRIALS);
            let rep_f = ctxhide::estimate_advantage(&inst.params, &inst.f, &dist_f, trials, seed)?;
            let rep_g = ctxhide::estimate_advantage(&inst.params, &g, &dist_g, trials, seed)?;
            let (
                AdvantageReport::MonteCarlo {
                    estimate: est_f,
                    half_width: hw,
                    ..
                },
                AdvantageReport::MonteCarlo {
                    estimate: est_g, ..
                },
            ) = (&rep_f, &rep_g)
            else {
                unreachable!("estimate_advantage reports monte-carlo")
            };
            let preserved = (est_f - est_g).abs() <= 2.0 * hw;
            let detail = format!(
                "estimated advantage {est_f:.4} against f, {est_g:.4} against g (+/- {hw:.4} each)"
            );
            (
                json!(est_f),
                json!(est_g),
                preserved,
                *est_g > *hw,
                json!(trials),
                json!(hw),
                detail,
            )
        }
    };
    let report = json!({
        "command": "equiv-transfer",
        "mode": inst.mode.as_str(),
        "p": config.p,
        "n": config.n,
        "m": config.m,
        "t": config.t,
        "f": inst.f.to_string(),
        "g": g.to_string(),
        "transform": TransformSpec::from_transform(&s),
        "transform_source": transform_source,
        "x0": residues(dist_g.x0()),
        "x1": residues(dist_g.x1()),
        "advantage_f": adv_f_json,
        "advantage_g": adv_g_json,
        "advantage_preserved": preserved,
        "trials": trials,
        "half_width": half_width,
        "seed": seed,
        "verdict": if negative { "distinguisher-succeeds" } else { "no-significant-advantage" },
        "log2_p": log2_p(config.p),
    });
    let summary = format!(
        "equiv transfer at p={}: {detail}; advantage {}",
        config.p,
        if preserved {
            "preserved"
        } else {
            "NOT PRESERVED"
        }
    );
    Ok(CmdOutcome {
        report,
        summary,
        exit_code: if negative { 1 } else { 0 },
    })
}

#[derive(Parser)]
#[command(
    name = "hss",
    about = "Secret-sharing experiments: share/evaluate/decode pipelines, \
             distinguisher attacks, hiding verification, instance maps"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Share an input, evaluate at every server, decode, and check.
    Pipeline(CommonArgs),
    /// Run the product-monomial distinguisher and measure its advantage.
    Attack(CommonArgs),
    /// Exhaustively verify output-share hiding over a domain.
    Verify(CommonArgs),
    /// Work with instance maps.
    Equiv {
        #[command(subcommand)]
        action: EquivCommand,
    },
}

#[derive(Subcommand)]
enum EquivCommand {
    /// Apply the config's transform to the function and domain.
    Apply(CommonArgs),
    /// Invert the config's transform.
    Invert(CommonArgs),
    /// Compose the config's two transforms.
    Compose(CommonArgs),
    /// Carry the product attack across a transform and compare advantages.
    Transfer(CommonArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Path to the JSON experiment config.
    #[arg(long)]
    config: PathBuf,
    /// Input point as comma-separated residues (pipeline only).
    #[arg(long)]
    x: Option<String>,
    /// Monte-Carlo trial count override.
    #[arg(long)]
    trials: Option<u64>,
    /// RNG seed override (mandatory in Monte-Carlo mode).
    #[arg(long)]
    seed: Option<u64>,
    /// Enumeration budget override.
    #[arg(long)]
    budget: Option<u64>,
    /// "exact" or "mc" override.
    #[arg(long)]
    mode: Option<String>,
}

fn load_config(args: &CommonArgs) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(&args.config)
        .map_err(|err| Error::Parse(format!("cannot read {}: {err}", args.config.display())))?;
    let mut config: ExperimentConfig = serde_json::from_str(&text)
        .map_err(|err| Error::Parse(format!("bad config {}: {err}", args.config.display())))?;
    if args.trials.is_some() {
        config.trials = args.trials;
    }
    if args.seed.is_some() {
        config.seed = args.seed;
    }
    if args.budget.is_some() {
        config.budget = args.budget;
    }
    if let Some(mode) = &args.mode {
        config.mode = Some(mode.clone());
    }
    Ok(config)
}

fn parse_x(args: &CommonArgs) -> Result<Vec<u64>> {
    let text = args
        .x
        .as_deref()
        .ok_or_else(|| Error::Parse("pipeline needs --x with comma-separated residues".into()))?;
    text.split(',')
        .map(|part| {
            part.trim()
                .parse::<u64>()
                .map_err(|_| Error::Parse(format!("bad residue {:?} in --x", part.trim())))
        })
        .collect()
}

fn dispatch(command: &Command) -> Result<CmdOutcome> {
    match command {
        Command::Pipeline(args) => {
            let config = load_config(args)?;
            let x = parse_x(args)?;
            cmd_pipeline(&config, &x)
        }
        Command::Attack(args) => cmd_attack(&load_config(args)?),
        Command::Verify(args) => cmd_verify(&load_config(args)?),
        Command::Equiv { action } => {
            let (args, kind) = match action {
                EquivCommand::Apply(args) => (args, EquivActionKind::Apply),
                EquivCommand::Invert(args) => (args, EquivActionKind::Invert),
                EquivCommand::Compose(args) => (args, EquivActionKind::Compose),
                EquivCommand::Transfer(args) => (args, EquivActionKind::Transfer),
            };
            cmd_equiv(&load_config(args)?, kind)
        }
    }
}

/// Entry point for the `hss` binary. Prints the JSON report to stdout and
/// the summary to stderr, and returns the exit code.
pub fn run() -> i32 {
    let cli = Cli::parse();
    match dispatch(&cli.command) {
        Ok(outcome) => {
            println!(
                "{}",
                serde_json::to_string_pretty(&outcome.report).expect("report serializes")
            );
            eprintln!("{}", outcome.summary);
            outcome.exit_code
        }
        Err(err) => {
            let mut error_obj = json!({ "error": err.to_string() });
            if let Error::BudgetExceeded { required, budget } = &err {
                error_obj["suggestion"] = json!(format!(
                    "the enumeration needs {required} steps but the budget is {budget}; \
                     shrink p, n, t, or the domain, or raise --budget"
                ));
            }
            println!(
                "{}",
                serde_json::to_string_pretty(&error_obj).expect("error serializes")
            );
            eprintln!("error: {err}");
            2
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base_config(p: u64, n: usize, m: usize, t: usize, d: u64, f: &str) -> ExperimentConfig {
        ExperimentConfig {
            p,
            n,
            m,
            t,
            d,
            f: f.into(),
            domain: DomainSpec::default(),
            mode: None,
            trials: None,
            seed: None,
            budget: None,
            transform: None,
            second_transform: None,
        }
    }

    #[test]
    fn pipeline_passes_on_constants() {
        let config = base_config(7, 1, 2, 1, 1, "1");
        let outcome = cmd_pipeline(&config, &[3]).unwrap();
        assert_eq!(outcome.exit_code, 0);
        assert_eq!(outcome.report["verdict"], "pass");
        assert_eq!(outcome.report["decoded"], 1);
    }

    #[test]
    fn pipeline_reproduces_the_share_example() {
        // With randomness r1 = 2 the shares of x = 3 must be (5, 0) and
        // decode back to 3. Find a seed that draws r1 = 2.
        let mut config = base_config(7, 1, 2, 1, 1, "x1");
        let field = Field::new(7).unwrap();
        let seed = (0..200u64)
            .find(|&s| {
                let mut rng = ChaCha12Rng::seed_from_u64(s);
                field.random_element(&mut rng).value() == 2
            })
            .expect("some small seed draws 2");
        config.seed = Some(seed);
        let outcome = cmd_pipeline(&config, &[3]).unwrap();
        assert_eq!(outcome.exit_code, 0);
        assert_eq!(outcome.report["shares"], json!([[5], [0]]));
        assert_eq!(outcome.report["decoded"], 3);
        assert_eq!(outcome.report["seed"], json!(seed));
    }

    #[test]
    fn pipeline_rejects_degree_violations() {
        let config = base_config(7, 1, 2, 1, 1, "x1^2");
        assert!(matches!(
            cmd_pipeline(&config, &[3]),
            Err(Error::DegreeViolation {
                degree: 2,
                bound: 1
            })
        ));
    }

    #[test]
    fn pipeline_rejects_points_outside_the_domain() {
        let mut config = base_config(7, 1, 2, 1, 1, "x1");
        config.domain = DomainSpec::Named("punctured".into());
        assert!(matches!(
            cmd_pipeline(&config, &[0]),
            Err(Error::ParamViolation(_))
        ));
    }

    #[test]
    fn attack_reports_exact_rationals() {
        let config = base_config(5, 2, 3, 1, 2, "x1*x2");
        let outcome = cmd_attack(&config).unwrap();
        assert_eq!(outcome.exit_code, 1);
        assert_eq!(outcome.report["advantage"], "2/5");
        assert_eq!(outcome.report["closed_form"], "2/5");
        assert_eq!(outcome.report["verdict"], "distinguisher-succeeds");

        let config = base_config(3, 2, 3, 1, 2, "x1*x2");
        let outcome = cmd_attack(&config).unwrap();
        assert_eq!(outcome.report["advantage"], "1/3");
    }

    #[test]
    fn attack_monte_carlo_needs_a_seed_and_converges() {
        let mut config = base_config(5, 2, 3, 1, 2, "x1*x2");
        config.mode = Some("mc".into());
        assert!(matches!(cmd_attack(&config), Err(Error::ParamViolation(_))));
        config.seed = Some(3);
        config.trials = Some(200_000);
        let outcome = cmd_attack(&config).unwrap();
        assert_eq!(outcome.exit_code, 1);
        let estimate = outcome.report["advantage"].as_f64().unwrap();
        assert!((estimate - 0.4).abs() <= 0.01, "estimate {estimate}");
    }

    #[test]
    fn attack_rejects_other_functions() {
        let config = base_config(5, 1, 3, 1, 2, "x1^2");
        assert!(matches!(cmd_attack(&config), Err(Error::ParamViolation(_))));
    }

    #[test]
    fn verify_square_is_hiding_and_product_is_not() {
        let config = base_config(5, 1, 3, 1, 2, "x1^2");
        let outcome = cmd_verify(&config).unwrap();
        assert_eq!(outcome.exit_code, 0);
        assert_eq!(outcome.report["verdict"], "perfectly-hiding");

        let config = base_config(3, 2, 3, 1, 2, "x1*x2");
        let outcome = cmd_verify(&config).unwrap();
        assert_eq!(outcome.exit_code, 1);
        assert_eq!(outcome.report["verdict"], "not-hiding");
        assert_eq!(outcome.report["witness"]["x0"], json!([0, 0]));
        assert_eq!(outcome.report["witness"]["x1"], json!([0, 1]));

        let mut config = base_config(3, 2, 3, 1, 2, "x1*x2");
        config.domain = DomainSpec::Named("punctured".into());
        let outcome = cmd_verify(&config).unwrap();
        assert_eq!(outcome.exit_code, 0);
        assert_eq!(outcome.report["verdict"], "perfectly-hiding");
    }

    #[test]
    fn verify_respects_the_budget() {
        let mut config = base_config(5, 2, 3, 1, 2, "x1*x2");
        config.budget = Some(10);
        assert!(matches!(
            cmd_verify(&config),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn equiv_apply_invert_compose() {
        let spec = TransformSpec {
            alpha: 2,
            beta: 1,
            gamma: 3,
            l: vec![vec![1]],
            c: vec![0],
            e: vec![0],
        };
        let mut config = base_config(5, 1, 3, 1, 2, "x1^2");
        config.transform = Some(spec.clone());
        let outcome = cmd_equiv(&config, EquivActionKind::Apply).unwrap();
        assert_eq!(outcome.exit_code, 0);
        assert_eq!(outcome.report["g"], "2*x1^2");

        let outcome = cmd_equiv(&config, EquivActionKind::Invert).unwrap();
        let inv: TransformSpec = serde_json::from_value(outcome.report["inverse"].clone()).unwrap();
        assert_eq!(
            inv,
            TransformSpec {
                alpha: 3,
                beta: 2,
                gamma: 4,
                l: vec![vec![1]],
                c: vec![0],
                e: vec![0],
            }
        );

        config.transform = Some(TransformSpec {
            alpha: 2,
            beta: 0,
            gamma: 0,
            l: vec![vec![1]],
            c: vec![0],
            e: vec![0],
        });
        config.second_transform = Some(TransformSpec {
            alpha: 3,
            beta: 0,
            gamma: 1,
            l: vec![vec![1]],
            c: vec![0],
            e: vec![0],
        });
        let outcome = cmd_equiv(&config, EquivActionKind::Compose).unwrap();
        let composed: TransformSpec =
            serde_json::from_value(outcome.report["composed"].clone()).unwrap();
        assert_eq!(
            composed,
            TransformSpec {
                alpha: 1,
                beta: 0,
                gamma: 1,
                l: vec![vec![1]],
                c: vec![0],
                e: vec![0],
            }
        );
    }

    #[test]
    fn equiv_transfer_preserves_exact_advantage() {
        let mut config = base_config(3, 2, 3, 1, 2, "x1*x2");
        config.seed = Some(5);
        let outcome = cmd_equiv(&config, EquivActionKind::Transfer).unwrap();
        assert_eq!(outcome.exit_code, 1);
        assert_eq!(outcome.report["advantage_f"], "1/3");
        assert_eq!(outcome.report["advantage_g"], "1/3");
        assert_eq!(outcome.report["advantage_preserved"], true);
        assert_eq!(outcome.report["transform_source"], "seeded-random");
    }

    #[test]
    fn equiv_actions_require_their_transforms() {
        let config = base_config(5, 1, 3, 1, 2, "x1^2");
        assert!(matches!(
            cmd_equiv(&config, EquivActionKind::Apply),
            Err(Error::ParamViolation(_))
        ));
        assert!(matches!(
            cmd_equiv(&config, EquivActionKind::Compose),
            Err(Error::ParamViolation(_))
        ));
    }

    #[test]
    fn config_parsing_accepts_the_documented_shape() {
        let text = r#"{
            "p": 5, "n": 2, "m": 3, "t": 1, "d": 2,
            "f": "x1*x2",
            "domain": "punctured",
            "mode": "exact",
            "budget": 100000,
            "transform": {
                "alpha": 2, "beta": 0, "gamma": 1,
                "L": [[0, 1], [1, 0]],
                "c": [1, 2], "e": [0, 4]
            }
        }"#;
        let config: ExperimentConfig = serde_json::from_str(text).unwrap();
        assert_eq!(config.domain, DomainSpec::Named("punctured".into()));
        assert_eq!(
            config.transform.as_ref().unwrap().l,
            vec![vec![0, 1], vec![1, 0]]
        );
        let explicit = r#"{
            "p": 5, "n": 2, "m": 3, "t": 1, "d": 2,
            "f": "x1*x2",
            "domain": [[1, 1], [2, 3]]
        }"#;
        let config: ExperimentConfig = serde_json::from_str(explicit).unwrap();
        assert_eq!(
            config.domain,
            DomainSpec::Points(vec![vec![1, 1], vec![2, 3]])
        );
        // Unknown keys are config errors, not silent noise.
        assert!(serde_json::from_str::<ExperimentConfig>(
            r#"{"p": 5, "n": 1, "m": 3, "t": 1, "d": 2, "f": "x1", "typo": 1}"#
        )
        .is_err());
    }

    #[test]
    fn reports_are_deterministic() {
        let mut config = base_config(5, 2, 3, 1, 2, "x1*x2");
        config.mode = Some("mc".into());
        config.seed = Some(11);
        config.trials = Some(5_000);
        let a = cmd_attack(&config).unwrap();
        let b = cmd_attack(&config).unwrap();
        assert_eq!(
            serde_json::to_string_pretty(&a.report).unwrap(),
            serde_json::to_string_pretty(&b.report).unwrap()
        );
    }
}
