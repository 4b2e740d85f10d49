//! Batch front end for the hypersurface engine.
//!
//! Subcommands: `list` the family catalog, `verify` the biconservative
//! condition on a sampling grid, `profile` a family's curve as CSV, `slice`
//! an `s = const` surface or a normal-form surface, and `mesh` a point cloud.
//!
//! Exit codes: `0` success, `1` a verification ran but its residual or sign
//! consistency failed, `2` configuration or domain errors.
//!
//! All reports are deterministic: fixed field order, fixed float rendering,
//! grid reductions sequential in index order. `BICONS4_THREADS` caps the
//! worker pool without changing any output byte.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write as _};
use std::path::PathBuf;
use std::process::{self, ExitCode};

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use bicons4::biconservative::{grid_verify, residual_report, GridSpec};
use bicons4::catalog::families::{
    build_family, profile_closed_form, profile_from_ode, registry, Branch, FamilyConfig,
    FamilyId, FamilyParams, Signature, SkeletonKind,
};
use bicons4::catalog::profile::ProfileSolution;
use bicons4::config::Tolerances;
use bicons4::jsonfmt::{self, JsonObj};
use bicons4::surface::{build_lemma_surface, slice_check, slice_of, LemmaCase, SurfaceParams};
use bicons4::GeomError;

#[derive(Parser)]
#[command(
    name = "bicons4",
    version,
    about = "Biconservative hypersurfaces in Minkowski 4-space: build, verify, export"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// List the family catalog, or one entry.
    List {
        /// Family id to show (all when omitted).
        family: Option<String>,
        /// Output format: text | json.
        #[arg(long, default_value = "text")]
        format: String,
    },
    /// Verify the biconservative condition on a sampling grid.
    Verify(RunArgs),
    /// Export a profile curve as CSV (header `s,f,fp,fpp`).
    Profile(RunArgs),
    /// Report the shape operators of an `s = const` slice or a normal-form
    /// surface.
    Slice(RunArgs),
    /// Export a mesh point cloud as CSV.
    Mesh(RunArgs),
}

#[derive(Args, Clone, Default)]
struct RunArgs {
    /// Family id (see `list`).
    #[arg(long)]
    family: Option<String>,
    /// Requested signature: riemannian | lorentzian.
    #[arg(long)]
    signature: Option<String>,
    /// x1 slope branch: steep | shallow.
    #[arg(long)]
    branch: Option<String>,
    /// Cylinder orbit skeleton: rotational | parabolic.
    #[arg(long)]
    skeleton: Option<String>,
    /// Closed-form profile constant.
    #[arg(long, allow_negative_numbers = true)]
    c1: Option<f64>,
    /// Null-cone plane offset.
    #[arg(long, allow_negative_numbers = true)]
    a: Option<f64>,
    /// Normal-form surface hyperbolic radius.
    #[arg(long = "A", allow_negative_numbers = true)]
    big_a: Option<f64>,
    /// Normal-form surface circular radius.
    #[arg(long = "B", allow_negative_numbers = true)]
    big_b: Option<f64>,
    /// Normal-form surface curvature radius.
    #[arg(long, allow_negative_numbers = true)]
    r: Option<f64>,
    /// ODE initial condition `s0,f0,fp0`.
    #[arg(long, allow_hyphen_values = true)]
    init: Option<String>,
    /// ODE step size (default 1e-3).
    #[arg(long, allow_negative_numbers = true)]
    step: Option<f64>,
    /// Profile interval `lo:hi`.
    #[arg(long, allow_hyphen_values = true)]
    s: Option<String>,
    /// Chart box `lo:hi` for t.
    #[arg(long, allow_hyphen_values = true)]
    t: Option<String>,
    /// Chart box `lo:hi` for u.
    #[arg(long, allow_hyphen_values = true)]
    u: Option<String>,
    /// Grid sizes `NsxNtxNu` (default 8x8x8).
    #[arg(long)]
    grid: Option<String>,
    /// Slice position s0.
    #[arg(long, allow_negative_numbers = true)]
    at_s: Option<f64>,
    /// Normal-form surface case: i .. xi.
    #[arg(long)]
    lemma: Option<String>,
    /// Load the profile from a CSV table instead of solving.
    #[arg(long)]
    profile_file: Option<PathBuf>,
    /// Output format where the subcommand supports both: text | json.
    #[arg(long)]
    format: Option<String>,
    /// Write the report to this file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON file with the same keys as the long flags; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Residual acceptance threshold (default 1e-6).
    #[arg(long, allow_negative_numbers = true)]
    tau_bic: Option<f64>,
    /// Relative threshold for calling curvatures distinct (default 1e-6).
    #[arg(long, allow_negative_numbers = true)]
    tau_dist: Option<f64>,
    /// Margin kept from profile domain boundaries (default 1e-4).
    #[arg(long, allow_negative_numbers = true)]
    delta_guard: Option<f64>,
}

/// The `--config` file mirror of [`RunArgs`]; every key optional.
#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    family: Option<String>,
    signature: Option<String>,
    branch: Option<String>,
    skeleton: Option<String>,
    c1: Option<f64>,
    a: Option<f64>,
    #[serde(rename = "A")]
    big_a: Option<f64>,
    #[serde(rename = "B")]
    big_b: Option<f64>,
    r: Option<f64>,
    init: Option<String>,
    step: Option<f64>,
    s: Option<String>,
    t: Option<String>,
    u: Option<String>,
    grid: Option<String>,
    at_s: Option<f64>,
    lemma: Option<String>,
    profile_file: Option<String>,
    format: Option<String>,
    out: Option<String>,
    tau_bic: Option<f64>,
    tau_dist: Option<f64>,
    delta_guard: Option<f64>,
}

impl RunArgs {
    /// Fills unset flags from the `--config` file, if one was given.
    fn resolved(mut self) -> Result<RunArgs, GeomError> {
        let Some(path) = self.config.take() else {
            return Ok(self);
        };
        let text = fs::read_to_string(&path).map_err(|e| {
            GeomError::InvalidConfig(format!("cannot read config {}: {e}", path.display()))
        })?;
        let file: FileConfig = serde_json::from_str(&text).map_err(|e| {
            GeomError::InvalidConfig(format!("config {}: {e}", path.display()))
        })?;
        self.family = self.family.or(file.family);
        self.signature = self.signature.or(file.signature);
        self.branch = self.branch.or(file.branch);
        self.skeleton = self.skeleton.or(file.skeleton);
        self.c1 = self.c1.or(file.c1);
        self.a = self.a.or(file.a);
        self.big_a = self.big_a.or(file.big_a);
        self.big_b = self.big_b.or(file.big_b);
        self.r = self.r.or(file.r);
        self.init = self.init.or(file.init);
        self.step = self.step.or(file.step);
        self.s = self.s.or(file.s);
        self.t = self.t.or(file.t);
        self.u = self.u.or(file.u);
        self.grid = self.grid.or(file.grid);
        self.at_s = self.at_s.or(file.at_s);
        self.lemma = self.lemma.or(file.lemma);
        self.profile_file = self.profile_file.or(file.profile_file.map(PathBuf::from));
        self.format = self.format.or(file.format);
        self.out = self.out.or(file.out.map(PathBuf::from));
        self.tau_bic = self.tau_bic.or(file.tau_bic);
        self.tau_dist = self.tau_dist.or(file.tau_dist);
        self.delta_guard = self.delta_guard.or(file.delta_guard);
        Ok(self)
    }

    fn tolerances(&self) -> Result<Tolerances, GeomError> {
        fn positive(name: &str, v: f64) -> Result<f64, GeomError> {
            if v > 0.0 {
                Ok(v)
            } else {
                Err(GeomError::InvalidConfig(format!(
                    "{name} must be positive, got {v}"
                )))
            }
        }
        let mut tol = Tolerances::standard();
        if let Some(v) = self.tau_bic {
            tol.bic = positive("tau-bic", v)?;
        }
        if let Some(v) = self.tau_dist {
            tol.dist = positive("tau-dist", v)?;
        }
        if let Some(v) = self.delta_guard {
            tol.guard_delta = positive("delta-guard", v)?;
        }
        Ok(tol)
    }

    fn family_config(&self) -> Result<FamilyConfig, GeomError> {
        let fam = self.family.as_deref().ok_or_else(|| {
            GeomError::InvalidConfig("missing required parameter: family".into())
        })?;
        let id = FamilyId::parse(fam).ok_or_else(|| {
            GeomError::InvalidConfig(format!("unknown family {fam:?}; see `bicons4 list`"))
        })?;
        let signature = match self.signature.as_deref() {
            Some(text) => Signature::parse(text)?,
            None => id.fixed_signature().ok_or_else(|| {
                GeomError::InvalidConfig(format!(
                    "missing required parameter: signature (family {} admits both)",
                    id.as_str()
                ))
            })?,
        };
        let branch = match self.branch.as_deref() {
            Some(text) => Some(Branch::parse(text)?),
            None => None,
        };
        let skeleton = match self.skeleton.as_deref() {
            Some(text) => Some(SkeletonKind::parse(text)?),
            None => None,
        };
        Ok(FamilyConfig::new(
            id,
            signature,
            FamilyParams { c1: self.c1, a: self.a, branch, skeleton },
        ))
    }

    /// The profile curve: an explicit CSV table, an ODE run from `--init`,
    /// or the closed form, in that priority order.
    fn resolve_profile(
        &self,
        cfg: &FamilyConfig,
        tol: &Tolerances,
    ) -> Result<ProfileSolution, GeomError> {
        if let Some(path) = &self.profile_file {
            let text = fs::read_to_string(path).map_err(|e| {
                GeomError::InvalidConfig(format!("cannot read {}: {e}", path.display()))
            })?;
            return ProfileSolution::from_csv(&text);
        }
        let interval = parse_range_opt(self.s.as_deref(), "s")?;
        if let Some(text) = &self.init {
            let init = parse_init(text)?;
            let step = self.step.unwrap_or(1e-3);
            if !(step > 0.0) {
                return Err(GeomError::InvalidConfig(format!(
                    "step must be positive, got {step}"
                )));
            }
            return profile_from_ode(cfg, init, step, interval, tol);
        }
        if cfg.has_closed_form() {
            profile_closed_form(cfg, interval, tol)
        } else {
            Err(GeomError::InvalidConfig(format!(
                "{}: this configuration has no closed-form profile; \
                 pass --init s0,f0,fp0 (or --profile-file table.csv)",
                cfg.id.as_str()
            )))
        }
    }

    /// Builds the hypersurface patch with `--t`/`--u` box overrides applied.
    fn build_patch(&self, tol: &Tolerances) -> Result<bicons4::ImmersionPatch, GeomError> {
        let cfg = self.family_config()?;
        let profile = self.resolve_profile(&cfg, tol)?;
        let mut patch = build_family(&cfg, profile)?;
        if let Some(range) = parse_range_opt(self.t.as_deref(), "t")? {
            patch.domain[1] = range;
        }
        if let Some(range) = parse_range_opt(self.u.as_deref(), "u")? {
            patch.domain[2] = range;
        }
        Ok(patch)
    }

    fn grid_sizes(&self) -> Result<[usize; 3], GeomError> {
        parse_grid(self.grid.as_deref().unwrap_or("8x8x8"))
    }

    /// Writes `text` to `--out` or stdout.
    fn emit(&self, text: &str) -> Result<(), GeomError> {
        match &self.out {
            Some(path) => fs::write(path, text).map_err(|e| {
                GeomError::InvalidConfig(format!("cannot write {}: {e}", path.display()))
            }),
            None => {
                write_stdout(text);
                Ok(())
            }
        }
    }
}

/// Writes to stdout, exiting quietly if the reader went away (for example
/// when the output is piped into `head`), instead of panicking on EPIPE.
fn write_stdout(text: &str) {
    let mut out = io::stdout().lock();
    if let Err(e) = out.write_all(text.as_bytes()).and_then(|()| out.flush()) {
        if e.kind() == io::ErrorKind::BrokenPipe {
            process::exit(0);
        }
        eprintln!("error: cannot write to stdout: {e}");
        process::exit(1);
    }
}

fn parse_range(text: &str, name: &str) -> Result<(f64, f64), GeomError> {
    let bad = || {
        GeomError::InvalidConfig(format!(
            "invalid {name} range {text:?}; expected lo:hi with lo < hi"
        ))
    };
    let (lo, hi) = text.split_once(':').ok_or_else(bad)?;
    let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
    let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(bad());
    }
    Ok((lo, hi))
}

fn parse_range_opt(text: Option<&str>, name: &str) -> Result<Option<(f64, f64)>, GeomError> {
    text.map(|t| parse_range(t, name)).transpose()
}

fn parse_init(text: &str) -> Result<(f64, f64, f64), GeomError> {
    let bad = || {
        GeomError::InvalidConfig(format!(
            "invalid init {text:?}; expected three floats s0,f0,fp0"
        ))
    };
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 3 {
        return Err(bad());
    }
    let mut vals = [0.0f64; 3];
    for (slot, part) in vals.iter_mut().zip(&parts) {
        *slot = part.trim().parse().map_err(|_| bad())?;
        if !slot.is_finite() {
            return Err(bad());
        }
    }
    Ok((vals[0], vals[1], vals[2]))
}

fn parse_grid(text: &str) -> Result<[usize; 3], GeomError> {
    let bad = || {
        GeomError::InvalidConfig(format!(
            "invalid grid {text:?}; expected NsxNtxNu with every count >= 2"
        ))
    };
    let parts: Vec<&str> = text.split('x').collect();
    if parts.len() != 3 {
        return Err(bad());
    }
    let mut n = [0usize; 3];
    for (slot, part) in n.iter_mut().zip(&parts) {
        *slot = part.trim().parse().map_err(|_| bad())?;
        if *slot < 2 {
            return Err(bad());
        }
    }
    Ok(n)
}

fn cmd_list(family: Option<&str>, format: &str) -> Result<ExitCode, GeomError> {
    let rows: Vec<_> = match family {
        None => registry().iter().collect(),
        Some(name) => {
            let row = registry().iter().find(|fi| fi.id == name).ok_or_else(|| {
                GeomError::InvalidConfig(format!("unknown family {name:?}"))
            })?;
            vec![row]
        }
    };
    match format {
        "text" => {
            let mut buf = String::new();
            for fi in rows {
                let _ = writeln!(buf, "{}", fi.id);
                let _ = writeln!(buf, "    {}", fi.description);
                let _ = writeln!(buf, "    signatures: {}", fi.signatures);
                if !fi.required.is_empty() {
                    let _ = writeln!(buf, "    required: {}", fi.required);
                }
                if !fi.optional.is_empty() {
                    let _ = writeln!(buf, "    optional: {}", fi.optional);
                }
            }
            write_stdout(&buf);
        }
        "json" => {
            let objects: Vec<String> = rows
                .iter()
                .map(|fi| {
                    let mut obj = JsonObj::new();
                    obj.str("id", fi.id)
                        .str("description", fi.description)
                        .str("signatures", fi.signatures)
                        .str("required", fi.required)
                        .str("optional", fi.optional);
                    obj.finish()
                })
                .collect();
            write_stdout(&format!("{}\n", jsonfmt::array(&objects)));
        }
        other => {
            return Err(GeomError::InvalidConfig(format!(
                "unknown format {other:?}; expected text or json"
            )));
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(args: RunArgs) -> Result<ExitCode, GeomError> {
    let args = args.resolved()?;
    let tol = args.tolerances()?;
    let patch = args.build_patch(&tol)?;
    let spec = GridSpec::from_domain(patch.domain, args.grid_sizes()?);
    let summary = grid_verify(&patch, &spec, &tol)?;
    args.emit(&format!("{}\n", summary.to_json()))?;
    if summary.passes(tol.bic) {
        Ok(ExitCode::SUCCESS)
    } else {
        Ok(ExitCode::from(1))
    }
}

fn cmd_profile(args: RunArgs) -> Result<ExitCode, GeomError> {
    let args = args.resolved()?;
    let tol = args.tolerances()?;
    let cfg = args.family_config()?;
    let profile = args.resolve_profile(&cfg, &tol)?;
    args.emit(&profile.to_csv())?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_slice(args: RunArgs) -> Result<ExitCode, GeomError> {
    let args = args.resolved()?;
    let tol = args.tolerances()?;
    let report = if let Some(text) = &args.lemma {
        let case = LemmaCase::parse(text).ok_or_else(|| {
            GeomError::InvalidConfig(format!("unknown surface case {text:?}; expected i .. xi"))
        })?;
        let params = SurfaceParams { a: args.big_a, b: args.big_b, r: args.r };
        let patch = build_lemma_surface(case, &params)?;
        slice_check(&patch, &tol)?
    } else {
        let patch = args.build_patch(&tol)?;
        let s0 = args.at_s.ok_or_else(|| {
            GeomError::InvalidConfig(
                "missing required parameter: at-s (slice position) or lemma (surface case)"
                    .into(),
            )
        })?;
        let (lo, hi) = patch.domain[0];
        if !(lo <= s0 && s0 <= hi) {
            return Err(GeomError::OutOfDomain { what: "at-s", value: s0, lo, hi });
        }
        let surface = slice_of(patch, s0);
        slice_check(&surface, &tol)?
    };
    args.emit(&format!("{}\n", report.to_json()))?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_mesh(args: RunArgs) -> Result<ExitCode, GeomError> {
    use rayon::prelude::*;

    let args = args.resolved()?;
    let tol = args.tolerances()?;
    let patch = args.build_patch(&tol)?;
    let spec = GridSpec::from_domain(patch.domain, args.grid_sizes()?);
    spec.validate()?;
    let rows: Vec<Result<String, GeomError>> = (0..spec.points())
        .into_par_iter()
        .map(|idx| {
            let (s, t, u) = spec.center(idx);
            let p = patch.point(s, t, u, &tol)?;
            let rep = residual_report(&p, &tol);
            let c = &p.curvature;
            let cols = [
                s,
                t,
                u,
                p.position[0],
                p.position[1],
                p.position[2],
                p.position[3],
                c.k1,
                c.k2,
                c.k3,
                c.h,
                rep.residual_norm,
            ];
            let text: Vec<String> = cols.iter().map(|&x| jsonfmt::fmt_f64(x)).collect();
            Ok(text.join(","))
        })
        .collect();

    let mut out = String::from("s,t,u,x0,x1,x2,x3,k1,k2,k3,H,residual\n");
    for row in rows {
        out.push_str(&row?);
        out.push('\n');
    }
    args.emit(&out)?;
    Ok(ExitCode::SUCCESS)
}

fn run(cli: Cli) -> Result<ExitCode, GeomError> {
    match cli.cmd {
        Cmd::List { family, format } => cmd_list(family.as_deref(), &format),
        Cmd::Verify(args) => cmd_verify(args),
        Cmd::Profile(args) => cmd_profile(args),
        Cmd::Slice(args) => cmd_slice(args),
        Cmd::Mesh(args) => cmd_mesh(args),
    }
}

fn main() -> ExitCode {
    if let Ok(text) = std::env::var("BICONS4_THREADS") {
        match text.parse::<usize>() {
            Ok(n) if n >= 1 => {
                // A second initialization (e.g. in tests) is harmless.
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            _ => {
                eprintln!("error: BICONS4_THREADS must be a positive integer, got {text:?}");
                return ExitCode::from(2);
            }
        }
    }
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(2)
        }
    }
}
