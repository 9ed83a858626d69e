//! Command-line front end. Every invocation writes one JSON document to
//! stdout and a short summary (or diagnostics) to stderr.
//!
//! Exit codes: 0 on success — including negative verdicts such as
//! "incompatible" — 2 for malformed input, 3 for numerical failures.

mod output;
mod workspace;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map, Value};

use crate::channels::{compose, is_post_processing_of, validate_channel};
use crate::compatibility::{
    bell_check, broadcasting_feasible, certify_incompatibility, channels_compatible,
    compatibility_robustness, measurements_compatible, steering_check, CompatibilityVerdict,
    Compatibilizer,
};
use crate::effects::effect_algebra;
use crate::error::{Error, Result};
use crate::norms::{base_norm_decomposition, discrimination_probability, dual_norm_oracle};
use crate::qubit::{qubit_discrimination, BlochState};
use crate::state_space::StateSpace;
use crate::tensor::{is_separable, max_tensor_vertices, min_tensor, BipartiteContext, Separability, TensorRule};

pub use output::{canonical, render, round_sig};
pub use workspace::{
    builtin_space, load_model, parse_model, save_model, space_from_json, space_to_json, ModelFile, SpaceJson,
    Workspace, FORMAT,
};

pub const DEFAULT_TOL: f64 = 1e-9;

#[derive(Debug, Parser)]
#[command(name = "gptkit", version, about = "Finite-dimensional general probabilistic theories")]
struct Cli {
    /// Numerical tolerance.
    #[arg(long, global = true, env = "GPTKIT_TOL")]
    tol: Option<f64>,
    /// Tensor rule for composite state sets.
    #[arg(long, global = true, value_enum, default_value_t = RuleArg::Max)]
    tensor: RuleArg,
    /// Seed for randomized subcommands.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Model files to load (repeatable).
    #[arg(long = "model", global = true)]
    models: Vec<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum RuleArg {
    Min,
    Max,
}

impl RuleArg {
    fn rule(self) -> TensorRule {
        match self {
            RuleArg::Min => TensorRule::Min,
            RuleArg::Max => TensorRule::Max,
        }
    }
}

#[derive(Debug, Args)]
struct SpaceArg {
    /// State space: `builtin:square`, `builtin:S_3`, `builtin:polygon_5`, a model name, or a JSON file.
    #[arg(long)]
    space: String,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Describe a state space and its effect algebra.
    Info(SpaceArg),
    /// Base norm of a functional, or a randomized check against the dual-norm formula.
    Basenorm {
        #[command(flatten)]
        space: SpaceArg,
        #[arg(long, conflicts_with = "random")]
        psi: Option<String>,
        #[arg(long)]
        random: Option<usize>,
    },
    /// Optimal discrimination of two states.
    Discriminate {
        #[command(flatten)]
        space: SpaceArg,
        #[arg(long)]
        x0: String,
        #[arg(long)]
        x1: String,
        #[arg(long)]
        lambda: f64,
    },
    /// Minimal and maximal tensor products, membership and separability.
    #[command(subcommand)]
    Tensor(TensorCmd),
    /// Channel validation, composition and post-processing.
    #[command(subcommand)]
    Channel(ChannelCmd),
    /// Compatibility, broadcasting, certification, steering and Bell tests.
    #[command(subcommand)]
    Compat(CompatCmd),
    /// Closed-form qubit formulas.
    #[command(subcommand)]
    Qubit(QubitCmd),
}

#[derive(Debug, Args)]
struct PairArgs {
    #[arg(long)]
    a: String,
    #[arg(long)]
    b: String,
}

#[derive(Debug, Subcommand)]
enum TensorCmd {
    /// Vertices of the composite state set.
    Vertices(PairArgs),
    /// Membership of a bipartite vector.
    Contains {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long)]
        state: String,
    },
    /// Separability test with a witness for entangled states.
    Separable {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long)]
        state: String,
    },
}

#[derive(Debug, Subcommand)]
enum ChannelCmd {
    /// Check that a matrix is a channel.
    Validate {
        #[command(flatten)]
        space: SpaceArg,
        /// Codomain (defaults to the domain).
        #[arg(long)]
        codomain: Option<String>,
        #[arg(long)]
        matrix: String,
    },
    /// `outer ∘ inner`.
    Compose {
        #[command(flatten)]
        space: SpaceArg,
        #[arg(long)]
        outer: String,
        #[arg(long)]
        inner: String,
    },
    /// Is `psi` a post-processing of `phi`?
    Postproc {
        #[command(flatten)]
        space: SpaceArg,
        #[arg(long)]
        psi: String,
        #[arg(long)]
        phi: String,
    },
}

#[derive(Debug, Args)]
struct ChannelPair {
    #[command(flatten)]
    space: SpaceArg,
    #[arg(long)]
    phi1: String,
    #[arg(long)]
    phi2: String,
}

#[derive(Debug, Subcommand)]
enum CompatCmd {
    /// Joint measurability of two measurements.
    Measurements {
        #[command(flatten)]
        space: SpaceArg,
        #[arg(long)]
        m1: String,
        #[arg(long)]
        m2: String,
    },
    /// Existence of a joint channel.
    Channels(ChannelPair),
    /// Largest visibility at which both noisy measurements are compatible.
    Robustness {
        #[command(flatten)]
        space: SpaceArg,
        #[arg(long)]
        m1: String,
        #[arg(long)]
        m2: String,
    },
    /// Broadcasting channel for a set of states.
    Broadcast {
        #[command(flatten)]
        space: SpaceArg,
        /// States to be broadcast (default: every vertex).
        #[arg(long, value_delimiter = ';')]
        fixed: Vec<String>,
    },
    /// Whether a family of test states certifies incompatibility.
    Certify {
        #[command(flatten)]
        pair: ChannelPair,
        /// Test states (default: every vertex).
        #[arg(long, value_delimiter = ';')]
        states: Vec<String>,
    },
    /// Whether the pair steers a bipartite state.
    Steer {
        #[command(flatten)]
        pair: ChannelPair,
        /// Space of the second leg (defaults to the first).
        #[arg(long)]
        d: Option<String>,
        #[arg(long)]
        state: String,
    },
    /// Bell non-locality of a bipartite state for two channel pairs.
    Bell {
        #[command(flatten)]
        pair: ChannelPair,
        #[arg(long)]
        d: Option<String>,
        #[arg(long)]
        psi1: String,
        #[arg(long)]
        psi2: String,
        #[arg(long)]
        state: String,
    },
}

#[derive(Debug, Subcommand)]
enum QubitCmd {
    /// Helstrom success probability for two Bloch vectors.
    Discriminate {
        #[arg(long, required_unless_present = "input")]
        w0: Option<String>,
        #[arg(long, required_unless_present = "input")]
        w1: Option<String>,
        #[arg(long, required_unless_present = "input")]
        lambda: Option<f64>,
        /// JSON file `{"w0": [..], "w1": [..], "lambda": x}`.
        #[arg(long, conflicts_with_all = ["w0", "w1", "lambda"])]
        input: Option<PathBuf>,
    },
}

struct Ctx {
    ws: Workspace,
    tol: f64,
    rule: TensorRule,
    seed: u64,
}

struct Outcome {
    command: &'static str,
    body: Map<String, Value>,
    summary: String,
}

fn outcome(command: &'static str, body: Value, summary: String) -> Outcome {
    let Value::Object(body) = body else { unreachable!("bodies are objects") };
    Outcome { command, body, summary }
}

/// Exit code for an error: 3 for numerical trouble, 2 otherwise.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::NumericalFailure(_) | Error::Unbounded => 3,
        _ => 2,
    }
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::Schema { .. } => "schema",
        Error::DimensionMismatch { .. } | Error::DimensionTooLarge { .. } => "dimension",
        Error::NumericalFailure(_) | Error::Unbounded => "numerical",
        _ => "input",
    }
}

/// Runs the tool with process stdout/stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(args, &mut stdout.lock(), &mut stderr.lock())
}

/// Runs the tool writing the JSON document to `out` and diagnostics to `err`.
pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = if code == 0 {
                write!(out, "{}", e.render())
            } else {
                write!(err, "{}", e.render())
            };
            return code;
        }
    };
    let (doc, code) = match execute(&cli) {
        Ok(o) => {
            let _ = writeln!(err, "{}", o.summary);
            let mut body = o.body;
            body.insert("format".into(), json!(FORMAT));
            body.insert("command".into(), json!(o.command));
            (Value::Object(body), 0)
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            let doc = json!({
                "format": FORMAT,
                "error": {"kind": error_kind(&e), "message": e.to_string()},
            });
            (doc, exit_code(&e))
        }
    };
    let _ = writeln!(out, "{}", render(doc));
    code
}

fn execute(cli: &Cli) -> Result<Outcome> {
    let tol = cli.tol.unwrap_or(DEFAULT_TOL);
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::schema("--tol", format!("tolerance must be positive, got {tol}")));
    }
    let mut ws = Workspace::new();
    for path in &cli.models {
        let file = parse_model(
            &std::fs::read_to_string(path).map_err(|e| Error::schema(path.display().to_string(), e.to_string()))?,
            &path.display().to_string(),
        )?;
        ws.add_model(&file)?;
    }
    let ctx = Ctx { ws, tol, rule: cli.tensor.rule(), seed: cli.seed };
    match &cli.command {
        Command::Info(s) => info(&ctx, &s.space),
        Command::Basenorm { space, psi, random } => basenorm(&ctx, &space.space, psi.as_deref(), *random),
        Command::Discriminate { space, x0, x1, lambda } => discriminate(&ctx, &space.space, x0, x1, *lambda),
        Command::Tensor(t) => tensor(&ctx, t),
        Command::Channel(c) => channel(&ctx, c),
        Command::Compat(c) => compat(&ctx, c),
        Command::Qubit(QubitCmd::Discriminate { w0, w1, lambda, input }) => {
            qubit(w0.as_deref(), w1.as_deref(), *lambda, input.as_deref())
        }
    }
}

use output::{mat_json, num, vec_json, vecs_json};

fn info(ctx: &Ctx, r: &str) -> Result<Outcome> {
    let k = ctx.ws.space(r)?;
    let alg = effect_algebra(&k)?;
    let body = json!({
        "space": {
            "name": k.name(),
            "lifted_dim": k.lifted_dim(),
            "vertices": vecs_json(k.vertices()),
            "labels": k.labels(),
        },
        "num_vertices": k.num_vertices(),
        "affine_dim": k.affine_dim(),
        "is_simplex": k.is_simplex(),
        "center": vec_json(&k.center()),
        "effect_algebra": {
            "unit": vec_json(&alg.unit),
            "positive_generators": vecs_json(&alg.positive_generators),
            "effect_vertices": vecs_json(&alg.effect_vertices),
        },
    });
    let summary = format!(
        "{}: {} vertices, lifted dimension {}, {} effect vertices",
        k.name(),
        k.num_vertices(),
        k.lifted_dim(),
        alg.effect_vertices.len()
    );
    Ok(outcome("info", body, summary))
}

fn functional(ctx: &Ctx, k: &StateSpace, r: &str) -> Result<crate::geometry::Vector> {
    ctx.ws.effect(k, r).or_else(|_| ctx.ws.state(k, r))
}

fn basenorm(ctx: &Ctx, r: &str, psi: Option<&str>, random: Option<usize>) -> Result<Outcome> {
    let k = ctx.ws.space(r)?;
    if let Some(n) = random {
        let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
        let mut results = Vec::with_capacity(n);
        let mut worst: f64 = 0.0;
        for _ in 0..n {
            let psi = crate::geometry::Vector::from_fn(k.lifted_dim(), |_, _| rng.gen_range(-1.0..1.0));
            let b = base_norm_decomposition(&k, &psi)?.value;
            let d = dual_norm_oracle(&k, &psi)?;
            worst = worst.max((b - d).abs());
            results.push(json!({"psi": vec_json(&psi), "base_norm": num(b), "dual_norm_oracle": num(d)}));
        }
        let summary = format!("{n} random functionals on {}: max |base − dual| = {worst:.3e}", k.name());
        let body = json!({
            "space": k.name(),
            "samples": n,
            "seed": ctx.seed,
            "max_discrepancy": num(worst),
            "results": results,
        });
        return Ok(outcome("basenorm", body, summary));
    }
    let psi = psi.ok_or_else(|| Error::schema("--psi", "either --psi or --random is required"))?;
    let psi = functional(ctx, &k, psi)?;
    let dec = base_norm_decomposition(&k, &psi)?;
    let oracle = dual_norm_oracle(&k, &psi)?;
    let body = json!({
        "space": k.name(),
        "psi": vec_json(&psi),
        "base_norm": num(dec.value),
        "dual_norm_oracle": num(oracle),
        "positive": vec_json(&dec.positive),
        "negative": vec_json(&dec.negative),
    });
    Ok(outcome("basenorm", body, format!("base norm {:.12}", dec.value)))
}

fn discriminate(ctx: &Ctx, r: &str, x0: &str, x1: &str, lambda: f64) -> Result<Outcome> {
    let k = ctx.ws.space(r)?;
    let a = ctx.ws.state(&k, x0)?;
    let b = ctx.ws.state(&k, x1)?;
    let res = discrimination_probability(&k, &a, &b, lambda, ctx.tol)?;
    let body = json!({
        "p_succ": num(res.p_succ),
        "optimal_effect": vec_json(&res.optimal_effect),
        "base_norm": num(res.base_norm_value),
    });
    Ok(outcome("discriminate", body, format!("p_succ = {:.12}", res.p_succ)))
}

fn tensor(ctx: &Ctx, t: &TensorCmd) -> Result<Outcome> {
    let pair = match t {
        TensorCmd::Vertices(p) => p,
        TensorCmd::Contains { pair, .. } | TensorCmd::Separable { pair, .. } => pair,
    };
    let a = ctx.ws.space(&pair.a)?;
    let b = ctx.ws.space(&pair.b)?;
    match t {
        TensorCmd::Vertices(_) => {
            let space = match ctx.rule {
                TensorRule::Max => max_tensor_vertices(&a, &b)?,
                _ => min_tensor(&a, &b)?,
            };
            let mut entangled = Vec::new();
            for (i, v) in space.vertices().iter().enumerate() {
                if !is_separable(&a, &b, v, ctx.tol)?.is_separable() {
                    entangled.push(i);
                }
            }
            let summary = format!(
                "{} ⊗{} {}: {} vertices, {} entangled",
                a.name(),
                ctx.rule.name(),
                b.name(),
                space.num_vertices(),
                entangled.len()
            );
            let body = json!({
                "rule": ctx.rule.name(),
                "dims": [a.lifted_dim(), b.lifted_dim()],
                "order": "row-major A-major",
                "count": space.num_vertices(),
                "vertices": vecs_json(space.vertices()),
                "entangled": entangled,
            });
            Ok(outcome("tensor vertices", body, summary))
        }
        TensorCmd::Contains { state, .. } => {
            let phi = ctx.ws.bipartite(&a, &b, state)?;
            let ctx2 = BipartiteContext { a, b, rule: ctx.rule.clone() };
            let inside = ctx2.contains(&phi, ctx.tol)?;
            let body = json!({"rule": ctx.rule.name(), "contains": inside});
            Ok(outcome("tensor contains", body, format!("contains: {inside}")))
        }
        TensorCmd::Separable { state, .. } => {
            let phi = ctx.ws.bipartite(&a, &b, state)?;
            let body = match is_separable(&a, &b, &phi, ctx.tol)? {
                Separability::Separable { weights } => json!({
                    "separable": true,
                    "weights": vec_json(&weights),
                    "witness": null,
                }),
                Separability::Entangled { witness } => json!({
                    "separable": false,
                    "weights": null,
                    "witness": {"functional": vec_json(&witness.functional), "value": num(witness.value)},
                }),
            };
            let sep = body["separable"].as_bool().unwrap_or(false);
            Ok(outcome("tensor separable", body, format!("separable: {sep}")))
        }
    }
}

fn channel(ctx: &Ctx, c: &ChannelCmd) -> Result<Outcome> {
    match c {
        ChannelCmd::Validate { space, codomain, matrix } => {
            let a = ctx.ws.space(&space.space)?;
            let b = match codomain {
                Some(r) => ctx.ws.space(r)?,
                None => a.clone(),
            };
            let m = match ctx.ws.matrix(matrix) {
                Some(m) => m?,
                None => ctx.ws.channel(&a, matrix, ctx.tol)?.matrix,
            };
            let body = match validate_channel(&m, &a, &b, ctx.tol) {
                Ok(ch) => json!({"valid": true, "matrix": mat_json(&ch.matrix), "reason": null, "witness": null}),
                Err(e @ (Error::NotUnital(_) | Error::NotPositive { .. })) => {
                    let witness = match &e {
                        Error::NotPositive { witness: Some(w), .. } => vec_json(w),
                        _ => Value::Null,
                    };
                    json!({"valid": false, "matrix": null, "reason": e.to_string(), "witness": witness})
                }
                Err(e) => return Err(e),
            };
            let valid = body["valid"].as_bool().unwrap_or(false);
            Ok(outcome("channel validate", body, format!("valid: {valid}")))
        }
        ChannelCmd::Compose { space, outer, inner } => {
            let a = ctx.ws.space(&space.space)?;
            let inner = ctx.ws.channel(&a, inner, ctx.tol)?;
            let outer = ctx.ws.channel(&inner.codomain, outer, ctx.tol)?;
            let c = compose(&outer, &inner)?;
            let body = json!({
                "domain": c.domain.name(),
                "codomain": c.codomain.name(),
                "matrix": mat_json(&c.matrix),
            });
            Ok(outcome("channel compose", body, format!("{} → {}", c.domain.name(), c.codomain.name())))
        }
        ChannelCmd::Postproc { space, psi, phi } => {
            let a = ctx.ws.space(&space.space)?;
            let psi = ctx.ws.channel(&a, psi, ctx.tol)?;
            let phi = ctx.ws.channel(&a, phi, ctx.tol)?;
            let lambda = is_post_processing_of(&psi, &phi, ctx.tol)?;
            let found = lambda.is_some();
            let body = json!({
                "post_processing": found,
                "lambda": lambda.map_or(Value::Null, |l| mat_json(&l.matrix)),
            });
            Ok(outcome("channel postproc", body, format!("post-processing: {found}")))
        }
    }
}

fn verdict_json(v: &CompatibilityVerdict) -> Value {
    let joint = match &v.joint {
        None => Value::Null,
        Some(Compatibilizer::EffectGrid(g)) => json!({
            "kind": "effect_grid",
            "h": g.h.iter().map(|row| vecs_json(row)).collect::<Vec<_>>(),
        }),
        Some(Compatibilizer::Channel(j)) => json!({
            "kind": "channel",
            "dims": [j.dims.0, j.dims.1],
            "rule": j.rule.name(),
            "matrix": mat_json(&j.matrix),
        }),
    };
    json!({
        "compatible": v.compatible,
        "joint": joint,
        "certificate": v.certificate.as_ref().map_or(Value::Null, |w| vec_json(&w.functional)),
        "t_star": null,
    })
}

fn states_or_vertices(ctx: &Ctx, k: &StateSpace, refs: &[String]) -> Result<Vec<crate::geometry::Vector>> {
    if refs.is_empty() {
        Ok(k.vertices().to_vec())
    } else {
        refs.iter().map(|r| ctx.ws.state(k, r)).collect()
    }
}

fn compat(ctx: &Ctx, c: &CompatCmd) -> Result<Outcome> {
    let tol = ctx.tol;
    match c {
        CompatCmd::Measurements { space, m1, m2 } => {
            let k = ctx.ws.space(&space.space)?;
            let v = measurements_compatible(&ctx.ws.measurement(&k, m1, tol)?, &ctx.ws.measurement(&k, m2, tol)?, tol)?;
            let s = format!("compatible: {}", v.compatible);
            Ok(outcome("compat measurements", verdict_json(&v), s))
        }
        CompatCmd::Channels(p) => {
            let k = ctx.ws.space(&p.space.space)?;
            let v = channels_compatible(&ctx.ws.channel(&k, &p.phi1, tol)?, &ctx.ws.channel(&k, &p.phi2, tol)?, &ctx.rule, tol)?;
            let s = format!("compatible ({}): {}", ctx.rule.name(), v.compatible);
            Ok(outcome("compat channels", verdict_json(&v), s))
        }
        CompatCmd::Robustness { space, m1, m2 } => {
            let k = ctx.ws.space(&space.space)?;
            let t = compatibility_robustness(&ctx.ws.measurement(&k, m1, tol)?, &ctx.ws.measurement(&k, m2, tol)?, tol)?;
            // reported to the resolution the bisection can certify
            let t = (t * 1e6).round() / 1e6;
            Ok(outcome("compat robustness", json!({"t_star": num(t)}), format!("t* = {t}")))
        }
        CompatCmd::Broadcast { space, fixed } => {
            let k = ctx.ws.space(&space.space)?;
            let fixed = states_or_vertices(ctx, &k, fixed)?;
            let v = broadcasting_feasible(&k, &fixed, &ctx.rule, tol)?;
            let s = format!("broadcasting feasible: {}", v.compatible);
            Ok(outcome("compat broadcast", verdict_json(&v), s))
        }
        CompatCmd::Certify { pair, states } => {
            let k = ctx.ws.space(&pair.space.space)?;
            let states = states_or_vertices(ctx, &k, states)?;
            let phi1 = ctx.ws.channel(&k, &pair.phi1, tol)?;
            let phi2 = ctx.ws.channel(&k, &pair.phi2, tol)?;
            let certified = certify_incompatibility(&phi1, &phi2, &states, &ctx.rule, tol)?;
            let body = json!({"certified": certified, "num_states": states.len()});
            Ok(outcome("compat certify", body, format!("certified incompatible: {certified}")))
        }
        CompatCmd::Steer { pair, d, state } => {
            let k = ctx.ws.space(&pair.space.space)?;
            let d = match d {
                Some(r) => ctx.ws.space(r)?,
                None => k.clone(),
            };
            let x = ctx.ws.bipartite(&k, &d, state)?;
            let phi1 = ctx.ws.channel(&k, &pair.phi1, tol)?;
            let phi2 = ctx.ws.channel(&k, &pair.phi2, tol)?;
            let steers = steering_check(&phi1, &phi2, &x, &d, &ctx.rule, tol)?;
            Ok(outcome("compat steer", json!({"steers": steers}), format!("steers: {steers}")))
        }
        CompatCmd::Bell { pair, d, psi1, psi2, state } => {
            let k = ctx.ws.space(&pair.space.space)?;
            let d = match d {
                Some(r) => ctx.ws.space(r)?,
                None => k.clone(),
            };
            let x = ctx.ws.bipartite(&k, &d, state)?;
            let phi1 = ctx.ws.channel(&k, &pair.phi1, tol)?;
            let phi2 = ctx.ws.channel(&k, &pair.phi2, tol)?;
            let psi1 = ctx.ws.channel(&d, psi1, tol)?;
            let psi2 = ctx.ws.channel(&d, psi2, tol)?;
            let nonlocal = bell_check((&phi1, &phi2), (&psi1, &psi2), &x, &ctx.rule, tol)?;
            Ok(outcome("compat bell", json!({"nonlocal": nonlocal}), format!("Bell non-local: {nonlocal}")))
        }
    }
}

fn bloch(s: &Value, path: &str) -> Result<BlochState> {
    let w: [f64; 3] = serde_json::from_value(s.clone()).map_err(|e| Error::schema(path, e.to_string()))?;
    BlochState::new(w)
}

fn qubit(w0: Option<&str>, w1: Option<&str>, lambda: Option<f64>, input: Option<&std::path::Path>) -> Result<Outcome> {
    let (w0, w1, lambda) = match input {
        Some(p) => {
            let origin = p.display().to_string();
            let text = std::fs::read_to_string(p).map_err(|e| Error::schema(&origin, e.to_string()))?;
            let v: Value = serde_json::from_str(&text).map_err(|e| Error::schema(&origin, e.to_string()))?;
            let lambda = v["lambda"].as_f64().ok_or_else(|| Error::schema("lambda", "number required"))?;
            (bloch(&v["w0"], "w0")?, bloch(&v["w1"], "w1")?, lambda)
        }
        None => {
            let parse = |s: Option<&str>, path: &str| -> Result<BlochState> {
                let v: Value = serde_json::from_str(s.unwrap_or_default()).map_err(|e| Error::schema(path, e.to_string()))?;
                bloch(&v, path)
            };
            (parse(w0, "--w0")?, parse(w1, "--w1")?, lambda.unwrap_or(f64::NAN))
        }
    };
    let p = qubit_discrimination(&w0, &w1, lambda)?;
    let body = json!({
        "w0": w0.w.iter().map(|&x| num(x)).collect::<Vec<_>>(),
        "w1": w1.w.iter().map(|&x| num(x)).collect::<Vec<_>>(),
        "lambda": num(lambda),
        "p_succ": num(p),
    });
    Ok(outcome("qubit discriminate", body, format!("p_succ = {p:.12}")))
}
