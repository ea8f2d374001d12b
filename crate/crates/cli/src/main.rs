use std::process::ExitCode;

use anyhow::{bail, Result};
use clap::{Args, Parser, Subcommand};
use ggp_cli::commands;
use ggp_cli::input::{load, parse_diag, SliceInput, SpaceInput, XpmInput};
use ggp_cli::suites::criterion_families;
use ggp_cli::{Output, RunConfig};
use ggp_core::rational::parse_q;
use ggp_core::{LocalField, QuadSpace};

#[derive(Parser)]
#[command(name = "ggp", version, about = "Exact computations for GGP slices, regular germs and Kostant sections")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Global {
    /// Base field: R or Q<p>.
    #[arg(long, global = true, env = "GGP_FIELD", default_value = "Q3")]
    field: String,
    #[arg(long, global = true, env = "GGP_SEED", default_value_t = 7)]
    seed: u64,
    /// Emit JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Sample count; 0 keeps each suite's minimum.
    #[arg(long, global = true, env = "GGP_SAMPLES", default_value_t = 0)]
    samples: usize,
    /// Height bound for random rationals.
    #[arg(long, global = true, env = "GGP_HEIGHT", default_value_t = 3)]
    height: i64,
    /// Report wall-clock times (makes output run-dependent).
    #[arg(long, global = true)]
    timings: bool,
}

#[derive(Args)]
struct SpaceArgs {
    /// Diagonal Gram matrix, e.g. "1,-2,3/4".
    #[arg(long)]
    diag: Option<String>,
    /// JSON Gram matrix, e.g. "[[0,1],[1,0]]".
    #[arg(long)]
    gram: Option<String>,
    /// JSON file or inline object {"field", "gram" | "diag"}.
    #[arg(long)]
    config: Option<String>,
}

#[derive(Args)]
struct XpmArgs {
    /// X^+- configuration as a JSON file or inline object.
    #[arg(long)]
    config: Option<String>,
    /// Index into the built-in list of configurations.
    #[arg(long)]
    family: Option<usize>,
}

#[derive(Args)]
struct SliceArgs {
    /// JSON file or inline object {field, w_gram | w_diag, nu0, r, xw, w, mu, xv}.
    #[arg(long)]
    config: Option<String>,
    /// dim W for a seeded instance.
    #[arg(long, default_value_t = 2)]
    m: usize,
    #[arg(long, default_value_t = 1)]
    r: usize,
}

#[derive(Subcommand)]
enum Cmd {
    /// Invariants and quasi-split test of a quadratic space.
    Classify(SpaceArgs),
    /// Regular nilpotent orbits of so(V).
    Orbits(SpaceArgs),
    #[command(subcommand)]
    Slice(SliceCmd),
    #[command(subcommand)]
    Germ(GermCmd),
    #[command(subcommand)]
    Kostant(KostantCmd),
    /// Run a verification suite, "all", or "list".
    Verify { suite: String },
}

#[derive(Subcommand)]
enum SliceCmd {
    /// Write X in Sigma as Ad(n) Y with Y in Lambda.
    Factorize(SliceArgs),
    /// Compare P_{X_V} with its closed form on Lambda.
    IdentityCheck(SliceArgs),
    /// Sigma' membership.
    SigmaMembership(SliceArgs),
    /// Rational intersection test for the X^+- family.
    SignTest {
        #[command(flatten)]
        xpm: XpmArgs,
        #[arg(long, allow_hyphen_values = true)]
        nu0: String,
        #[arg(long, default_value_t = 1)]
        r: usize,
    },
}

#[derive(Subcommand)]
enum GermCmd {
    /// Gamma_O(X^zeta) for one orbit.
    Eval {
        #[command(flatten)]
        xpm: XpmArgs,
        /// Orbit label nu.
        #[arg(long, allow_hyphen_values = true)]
        orbit: String,
        #[arg(long, allow_hyphen_values = true)]
        zeta: Option<i8>,
    },
    /// Germ values of X^+ and X^- on every regular nilpotent orbit.
    Table {
        #[command(flatten)]
        xpm: XpmArgs,
    },
}

#[derive(Subcommand)]
enum KostantCmd {
    /// Normalize a seeded element of b + X_+ into the section.
    Normalize {
        #[arg(long, default_value_t = 4)]
        d: usize,
    },
    /// Regularity and normalization over many samples.
    Check {
        #[arg(long, default_value_t = 4)]
        d: usize,
    },
}

fn space(a: &SpaceArgs, k: LocalField) -> Result<QuadSpace> {
    match (&a.diag, &a.gram, &a.config) {
        (Some(d), None, None) => Ok(QuadSpace::from_diag(k, &parse_diag(d)?)?),
        (None, Some(g), None) => {
            let i: SpaceInput = load(&format!("{{\"gram\": {g}}}"))?;
            i.space(k)
        }
        (None, None, Some(c)) => load::<SpaceInput>(c)?.space(k),
        _ => bail!("give exactly one of --diag, --gram, --config"),
    }
}

fn xpm(a: &XpmArgs, k: LocalField) -> Result<ggp_core::XpmConfig> {
    match (&a.config, a.family) {
        (Some(c), None) => load::<XpmInput>(c)?.config(k),
        (None, Some(i)) => {
            let fams = criterion_families();
            let n = fams.len();
            fams.get(i).cloned().ok_or_else(|| anyhow::anyhow!("family index {i} out of range (0..{n})"))
        }
        (None, None) => Ok(criterion_families()[0].clone()),
        _ => bail!("give at most one of --config, --family"),
    }
}

fn slice_input(a: &SliceArgs) -> Result<Option<SliceInput>> {
    a.config.as_deref().map(load).transpose()
}

fn run(cli: Cli) -> Result<Output> {
    let g = &cli.global;
    let cfg = RunConfig {
        field: g.field.parse()?,
        seed: g.seed,
        samples: g.samples,
        height: g.height,
        json: g.json,
        timings: g.timings,
    };
    let k = cfg.field;
    match &cli.cmd {
        Cmd::Classify(a) => Ok(commands::classify(&space(a, k)?)),
        Cmd::Orbits(a) => Ok(commands::orbits(&space(a, k)?)),
        Cmd::Slice(s) => match s {
            SliceCmd::Factorize(a) => commands::slice_factorize_cmd(&cfg, slice_input(a)?.as_ref(), a.m, a.r),
            SliceCmd::IdentityCheck(a) => commands::slice_identity_cmd(&cfg, slice_input(a)?.as_ref(), a.m, a.r),
            SliceCmd::SigmaMembership(a) => commands::slice_membership_cmd(&cfg, slice_input(a)?.as_ref(), a.m, a.r),
            SliceCmd::SignTest { xpm: x, nu0, r } => commands::slice_sign_test_cmd(&xpm(x, k)?, &parse_q(nu0)?, *r),
        },
        Cmd::Germ(gc) => match gc {
            GermCmd::Eval { xpm: x, orbit, zeta } => commands::germ_eval_cmd(&xpm(x, k)?, &parse_q(orbit)?, *zeta),
            GermCmd::Table { xpm: x } => commands::germ_table_cmd(&xpm(x, k)?),
        },
        Cmd::Kostant(kc) => match kc {
            KostantCmd::Normalize { d } => commands::kostant_normalize_cmd(&cfg, *d),
            KostantCmd::Check { d } => commands::kostant_check_cmd(&cfg, *d, if cfg.samples == 0 { 200 } else { cfg.samples }),
        },
        Cmd::Verify { suite } if suite == "list" => Ok(commands::list_suites()),
        Cmd::Verify { suite } => commands::verify(&cfg, suite),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let json = cli.global.json;
    match run(cli) {
        Ok(out) => {
            print!("{}", out.render(json));
            if out.ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            if json {
                let o = Output::new(serde_json::json!({"error": e.to_string()}), String::new());
                print!("{}", o.render(true));
            } else {
                eprintln!("error: {e:#}");
            }
            ExitCode::from(2)
        }
    }
}
