//! `locc-lab`: command-line access to the catalog, verifier, bounds,
//! partitioning and search.
//!
//! [`run`] does all the work and returns the exit code and output instead of
//! printing, so it can be driven from tests.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use locc_core::catalog::{self, CatalogEntry};
use locc_core::{
    cascading_partition, domino_preserves_orthogonality, is_proportional_unitary, nmax,
    partition_to_protocol, purification_check, r2_bound, rank_sum_bound, search_protocols,
    theorem4_check, verify_sep, BoundReport, ComplexMatrix, Error, FirstParty, Party,
    ProtocolClass, ProtocolTree, SearchSpec, SeparablePovm, StateSet, Tolerance,
    VerificationReport, VerifyOptions,
};
use serde::{Deserialize, Serialize};
use serde_json::json;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_NEGATIVE: i32 = 2;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CommandResult {
    pub exit_code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl CommandResult {
    fn ok(stdout: String) -> Self {
        Self::with_code(EXIT_OK, stdout)
    }

    fn with_code(exit_code: i32, stdout: String) -> Self {
        CommandResult {
            exit_code,
            stdout,
            stderr: String::new(),
        }
    }

    fn verdict(passed: bool, stdout: String) -> Self {
        Self::with_code(if passed { EXIT_OK } else { EXIT_NEGATIVE }, stdout)
    }

    fn invalid(msg: impl Into<String>) -> Self {
        let mut stderr = msg.into();
        if !stderr.ends_with('\n') {
            stderr.push('\n');
        }
        CommandResult {
            exit_code: EXIT_INVALID,
            stdout: String::new(),
            stderr,
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "locc-lab", version, about = "Distinguish orthogonal bipartite states by LOCC while keeping entanglement")]
struct Cli {
    /// Machine-readable output for every subcommand.
    #[arg(long, global = true)]
    json: bool,
    #[arg(long, global = true, env = "LOCC_LAB_TOL_REL", value_name = "X")]
    tol_rel: Option<f64>,
    #[arg(long, global = true, env = "LOCC_LAB_TOL_ABS", value_name = "X")]
    tol_abs: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Built-in state sets and protocols.
    #[command(subcommand)]
    Catalog(CatalogCmd),
    /// Check that a protocol or separable POVM identifies every state.
    Verify(VerifyArgs),
    /// Rank-sum, rank-square-sum and N_max reports.
    Bounds(BoundsArgs),
    /// Cascading partition of the reduced density operators.
    Partition(PartitionArgs),
    /// Exhaustive search over basis-aligned projective protocols.
    Search(SearchArgs),
    /// ASCII grid of which basis cells each state occupies.
    Render(StatesArg),
    /// Necessary conditions for rank-preserving discrimination.
    CheckNecessary(StatesArg),
    /// Whether a product operator leaves a single pure survivor.
    PurifyCheck(PurifyArgs),
    /// Whether a local operator keeps the nine domino states orthogonal.
    DominoCheck(DominoArgs),
}

#[derive(Subcommand, Debug)]
enum CatalogCmd {
    List,
    Show(EntryArgs),
    Verify(EntryArgs),
}

#[derive(Args, Debug)]
struct EntryArgs {
    /// Entry name, optionally with parameters as in `appd-shift(6,2)`.
    name: String,
    /// Comma-separated parameters.
    #[arg(long, value_delimiter = ',')]
    params: Vec<usize>,
}

#[derive(Args, Debug)]
struct StatesArg {
    /// State set JSON file or catalog name.
    #[arg(long)]
    states: String,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long)]
    states: String,
    /// Protocol JSON file. Defaults to the catalog entry's own protocol.
    #[arg(long, conflicts_with = "povm")]
    protocol: Option<String>,
    /// Separable POVM JSON file.
    #[arg(long)]
    povm: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    rmin: usize,
    /// Require every outcome to keep the full Schmidt rank of its state.
    #[arg(long)]
    rank_preserving: bool,
    #[arg(long)]
    require_projective: bool,
}

#[derive(Args, Debug)]
struct BoundsArgs {
    #[arg(long)]
    states: String,
    #[arg(long)]
    r: usize,
    /// Let Bob measure first in the rank-sum bound.
    #[arg(long)]
    swap_roles: bool,
}

#[derive(Args, Debug)]
struct PartitionArgs {
    #[arg(long)]
    states: String,
    /// A, B or auto.
    #[arg(long, default_value = "auto")]
    first: String,
    /// Where to write the synthesized protocol.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SearchArgs {
    #[arg(long)]
    states: String,
    #[arg(long)]
    class: String,
    #[arg(long)]
    rmin: usize,
    #[arg(long, default_value_t = 4)]
    max_rounds: usize,
    /// JSON file `{"a": matrix, "b": matrix}` whose columns are the basis
    /// vectors; either key may be omitted.
    #[arg(long)]
    basis: Option<PathBuf>,
    #[arg(long)]
    no_prune: bool,
}

#[derive(Args, Debug)]
struct PurifyArgs {
    #[arg(long)]
    states: String,
    /// Matrix JSON (file or inline) for Alice's operator.
    #[arg(long)]
    a: String,
    #[arg(long)]
    b: String,
}

#[derive(Args, Debug)]
struct DominoArgs {
    /// 3×3 matrix JSON, file or inline.
    #[arg(long)]
    a: String,
    #[arg(long, default_value = "A")]
    party: String,
}

#[derive(Deserialize, Default)]
struct BasisFile {
    a: Option<ComplexMatrix>,
    b: Option<ComplexMatrix>,
}

struct Ctx {
    json: bool,
    tol: Tolerance,
}

/// Parses `argv` (program name first) and executes the command.
pub fn run<I, S>(argv: I) -> CommandResult
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => CommandResult::ok(text),
                _ => CommandResult::invalid(text),
            };
        }
    };
    let d = Tolerance::default();
    let tol = match Tolerance::new(cli.tol_rel.unwrap_or(d.rel), cli.tol_abs.unwrap_or(d.abs)) {
        Ok(t) => t,
        Err(e) => return CommandResult::invalid(e.to_string()),
    };
    let ctx = Ctx { json: cli.json, tol };
    match dispatch(cli.command, &ctx) {
        Ok(r) => r,
        Err(e) => CommandResult::invalid(format!("error: {e}")),
    }
}

fn dispatch(cmd: Command, ctx: &Ctx) -> Result<CommandResult, Error> {
    match cmd {
        Command::Catalog(c) => catalog_cmd(c, ctx),
        Command::Verify(a) => verify_cmd(a, ctx),
        Command::Bounds(a) => bounds_cmd(a, ctx),
        Command::Partition(a) => partition_cmd(a, ctx),
        Command::Search(a) => search_cmd(a, ctx),
        Command::Render(a) => render_cmd(a, ctx),
        Command::CheckNecessary(a) => necessary_cmd(a, ctx),
        Command::PurifyCheck(a) => purify_cmd(a, ctx),
        Command::DominoCheck(a) => domino_cmd(a, ctx),
    }
}

fn pretty<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable output");
    s.push('\n');
    s
}

fn read(path: &Path) -> Result<String, Error> {
    std::fs::read_to_string(path).map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))
}

fn entry_for(name: &str, params: &[usize]) -> Result<CatalogEntry, Error> {
    if params.is_empty() {
        catalog::build_spec(name)
    } else {
        catalog::build(name, params)
    }
}

/// A `--states` value is a catalog name (with optional parameters) or a
/// path to a StateSet file.
fn load_states(spec: &str, tol: Tolerance) -> Result<(StateSet, Option<CatalogEntry>), Error> {
    if catalog::is_catalog_name(spec) {
        let e = catalog::build_spec(spec)?;
        return Ok((e.state_set.clone(), Some(e)));
    }
    let path = Path::new(spec);
    if !path.exists() {
        return Err(Error::InvalidInput(format!("{spec} is neither a file nor a catalog entry")));
    }
    Ok((StateSet::from_json(&read(path)?, tol)?, None))
}

fn load_matrix(arg: &str) -> Result<ComplexMatrix, Error> {
    let text = if arg.trim_start().starts_with('{') {
        arg.to_string()
    } else {
        read(Path::new(arg))?
    };
    Ok(serde_json::from_str(&text)?)
}

fn catalog_cmd(cmd: CatalogCmd, ctx: &Ctx) -> Result<CommandResult, Error> {
    match cmd {
        CatalogCmd::List => {
            let list = catalog::entries();
            if ctx.json {
                let v: Vec<_> = list
                    .iter()
                    .map(|i| json!({"name": i.name, "params": i.params, "defaults": i.defaults, "summary": i.summary}))
                    .collect();
                return Ok(CommandResult::ok(pretty(&v)));
            }
            let width = list.iter().map(|i| i.name.len()).max().unwrap_or(0);
            let mut out = String::new();
            for i in list {
                let params = if i.params.is_empty() {
                    String::new()
                } else {
                    let parts: Vec<_> = i.params.iter().zip(i.defaults).map(|(p, d)| format!("{p}={d}")).collect();
                    format!(" ({})", parts.join(", "))
                };
                let _ = writeln!(out, "{:width$}  {}{}", i.name, i.summary, params);
            }
            Ok(CommandResult::ok(out))
        }
        CatalogCmd::Show(a) => {
            let e = entry_for(&a.name, &a.params)?;
            let grid = e.state_set.render_grid(ctx.tol);
            if ctx.json {
                return Ok(CommandResult::ok(pretty(&json!({
                    "name": e.name,
                    "params": e.params,
                    "state_set": e.state_set,
                    "expected": e.expected,
                    "grid": grid,
                }))));
            }
            Ok(CommandResult::ok(format!("{}\n{}", e.state_set.to_json(), grid)))
        }
        CatalogCmd::Verify(a) => {
            let e = entry_for(&a.name, &a.params)?;
            let report = catalog::verify_expected(&e, ctx.tol)?;
            if ctx.json {
                return Ok(CommandResult::verdict(report.ok, pretty(&report)));
            }
            let mut out = String::new();
            for c in &report.checks {
                let _ = writeln!(out, "{} {}: {}", if c.passed { "ok  " } else { "FAIL" }, c.name, c.detail);
            }
            let _ = writeln!(out, "{}: {}", report.name, if report.ok { "verified" } else { "failed" });
            Ok(CommandResult::verdict(report.ok, out))
        }
    }
}

fn verify_cmd(a: VerifyArgs, ctx: &Ctx) -> Result<CommandResult, Error> {
    let (set, entry) = load_states(&a.states, ctx.tol)?;
    if a.rmin == 0 {
        return Err(Error::InvalidInput("--rmin must be positive".into()));
    }
    let opts = VerifyOptions {
        require_projective: a.require_projective,
    };
    let floors = if a.rank_preserving {
        set.schmidt_ranks(ctx.tol)
    } else {
        vec![a.rmin; set.len()]
    };
    let report: VerificationReport = if let Some(p) = &a.povm {
        let povm: SeparablePovm = serde_json::from_str(&read(p)?)?;
        if a.rank_preserving {
            return Err(Error::InvalidInput("--rank-preserving applies to LOCC protocols only".into()));
        }
        verify_sep(&povm, &set, a.rmin, ctx.tol)?
    } else if let Some(p) = &a.protocol {
        let tree = if catalog::is_catalog_name(p) {
            catalog::build_spec(p)?
                .tree()
                .cloned()
                .ok_or_else(|| Error::InvalidInput(format!("{p} has no LOCC protocol")))?
        } else {
            ProtocolTree::from_json(&read(Path::new(p))?)?
        };
        tree.verify_with(&set, &floors, opts, ctx.tol)?
    } else {
        let e = entry.ok_or_else(|| Error::InvalidInput("give --protocol or --povm".into()))?;
        if let Some(t) = e.tree() {
            t.verify_with(&set, &floors, opts, ctx.tol)?
        } else if let Some(povm) = e.povm() {
            verify_sep(povm, &set, a.rmin, ctx.tol)?
        } else {
            return Err(Error::InvalidInput(format!("{} has no protocol to verify", e.name)));
        }
    };
    Ok(CommandResult::verdict(report.ok, pretty(&report)))
}

fn bound_line(out: &mut String, b: &BoundReport) {
    let rel = if b.satisfied { "<=" } else { ">" };
    let bound = if b.bound.fract() == 0.0 {
        format!("{}", b.bound)
    } else {
        format!("{:.4}", b.bound)
    };
    let _ = writeln!(
        out,
        "{}: {} {} {} ({})",
        b.formula_id,
        b.quantity,
        rel,
        bound,
        if b.satisfied { "satisfied" } else { "violated" }
    );
}

fn bounds_cmd(a: BoundsArgs, ctx: &Ctx) -> Result<CommandResult, Error> {
    let (set, _) = load_states(&a.states, ctx.tol)?;
    let (da, db) = set.dims();
    let reports = vec![
        rank_sum_bound(&set, a.r, a.swap_roles, ctx.tol)?,
        r2_bound(&set, ctx.tol),
        BoundReport::new(set.len() as f64, nmax(da, db, a.r)? as f64, "nmax"),
    ];
    let all = reports.iter().all(|b| b.satisfied);
    if ctx.json {
        return Ok(CommandResult::verdict(all, pretty(&reports)));
    }
    let mut out = String::new();
    for b in &reports {
        bound_line(&mut out, b);
    }
    Ok(CommandResult::verdict(all, out))
}

fn partition_cmd(a: PartitionArgs, ctx: &Ctx) -> Result<CommandResult, Error> {
    let (set, _) = load_states(&a.states, ctx.tol)?;
    let first: FirstParty = a.first.parse()?;
    let p = cascading_partition(&set, first, ctx.tol);
    let protocol = if p.complete {
        Some(partition_to_protocol(&p, &set, ctx.tol)?)
    } else {
        None
    };
    if let (Some(t), Some(path)) = (&protocol, &a.out) {
        std::fs::write(path, t.to_json())
            .map_err(|e| Error::InvalidInput(format!("cannot write {}: {e}", path.display())))?;
    }
    // Without --out the protocol goes to stdout next to the partition.
    let inline = if a.out.is_none() { protocol.as_ref() } else { None };
    let out = pretty(&json!({ "partition": p, "protocol": inline }));
    Ok(CommandResult::verdict(p.complete, out))
}

fn search_cmd(a: SearchArgs, ctx: &Ctx) -> Result<CommandResult, Error> {
    let (set, _) = load_states(&a.states, ctx.tol)?;
    let class: ProtocolClass = a.class.parse()?;
    let mut spec = SearchSpec::new(class, a.rmin, a.max_rounds);
    spec.prune = !a.no_prune;
    if let Some(path) = &a.basis {
        let b: BasisFile = serde_json::from_str(&read(path)?)?;
        spec.basis_a = b.a;
        spec.basis_b = b.b;
    }
    let r = search_protocols(&set, &spec, ctx.tol)?;
    Ok(CommandResult::verdict(r.found, pretty(&r)))
}

fn render_cmd(a: StatesArg, ctx: &Ctx) -> Result<CommandResult, Error> {
    let (set, _) = load_states(&a.states, ctx.tol)?;
    let grid = set.render_grid(ctx.tol);
    if ctx.json {
        let (da, db) = set.dims();
        let cells: Vec<Vec<Vec<String>>> = (0..da)
            .map(|m| {
                (0..db)
                    .map(|n| {
                        set.states()
                            .iter()
                            .filter(|s| s.coeff()[(n, m)].norm() > ctx.tol.abs)
                            .map(|s| s.label.clone())
                            .collect()
                    })
                    .collect()
            })
            .collect();
        return Ok(CommandResult::ok(pretty(&json!({"dims": [da, db], "cells": cells, "grid": grid}))));
    }
    Ok(CommandResult::ok(grid))
}

fn necessary_cmd(a: StatesArg, ctx: &Ctx) -> Result<CommandResult, Error> {
    let (set, _) = load_states(&a.states, ctx.tol)?;
    let orthogonal = theorem4_check(&set, ctx.tol);
    let r2 = r2_bound(&set, ctx.tol);
    let ok = orthogonal && r2.satisfied;
    if ctx.json {
        return Ok(CommandResult::verdict(
            ok,
            pretty(&json!({"hat_rho_orthogonal": orthogonal, "rank_square_sum": r2, "ok": ok})),
        ));
    }
    let mut out = format!("hat-rho orthogonal: {orthogonal}\n");
    bound_line(&mut out, &r2);
    Ok(CommandResult::verdict(ok, out))
}

fn purify_cmd(a: PurifyArgs, ctx: &Ctx) -> Result<CommandResult, Error> {
    let (set, _) = load_states(&a.states, ctx.tol)?;
    let ga = load_matrix(&a.a)?;
    let gb = load_matrix(&a.b)?;
    let rep = purification_check(&set, &ga, &gb, ctx.tol)?;
    Ok(CommandResult::verdict(rep.pure, pretty(&rep)))
}

fn domino_cmd(a: DominoArgs, ctx: &Ctx) -> Result<CommandResult, Error> {
    let m = load_matrix(&a.a)?;
    let party: Party = a.party.parse()?;
    let keeps = domino_preserves_orthogonality(&m, party, ctx.tol)?;
    let unitary = is_proportional_unitary(&m, ctx.tol);
    let out = pretty(&json!({"preserves_orthogonality": keeps, "proportional_to_unitary": unitary}));
    Ok(CommandResult::verdict(keeps, out))
}
