//! Command-line front end. Exit codes: 0 success or PASS, 1 FAIL, 2 bad input.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use crate::catalog::{self, CatalogEntry};
use crate::dsl;
use crate::factorizations::Factorization;
use crate::groups::{h1_pipeline, pi1_report, presentation, Budget, Pi1Status};
use crate::invariants::{
    rational_obstruction, ruled_exclusion, scy_criterion, signature_hyperelliptic,
    signature_meyer, InvariantReport,
};
use crate::symplectic::verify;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "lefschetz", version, about = "Dehn twist factorizations and Lefschetz pencil invariants")]
struct Cli {
    /// Emit JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Debug, Args)]
struct Input {
    /// Factorization file, or a catalog id such as `W1`, `catalog:W`, `Wm(2,3)`.
    input: String,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Symplectic product check (necessary condition for a relation).
    Verify {
        input: Option<String>,
        /// Verify every standard catalog entry.
        #[arg(long)]
        all: bool,
    },
    /// Euler characteristic, signature, c1², χ_h, H1 and predicates.
    Invariants(Input),
    /// Signature by every applicable route.
    Signature(Input),
    /// First homology from the vanishing cycles.
    H1(Input),
    /// Fundamental group certificate.
    Pi1 {
        input: String,
        /// Search budget `max_len,max_nodes`; overrides the environment.
        #[arg(long)]
        budget: Option<Budget>,
        /// Print the rewriting traces of a successful proof.
        #[arg(long)]
        trace: bool,
    },
    /// Replay a catalog recipe and print the bred factorization.
    Breed { id: String },
    /// List, export and check the built-in catalog.
    #[command(subcommand)]
    Catalog(CatalogCmd),
    /// Lattice-arithmetic obstructions for the blown-down surface.
    #[command(subcommand)]
    Oracle(OracleCmd),
}

#[derive(Debug, Subcommand)]
enum CatalogCmd {
    /// Standard entry ids with descriptions.
    List,
    /// Write every standard entry as a factorization file into `dir`.
    Export { dir: PathBuf },
    /// Compare stored expectations and recipe replays with recomputation.
    Check { id: Option<String> },
}

#[derive(Debug, Subcommand)]
enum OracleCmd {
    /// Fiber-class search in the rational elliptic surface.
    RationalObstruction {
        g: usize,
        m: usize,
        #[arg(long, default_value_t = 50)]
        bound: i64,
    },
    /// Whether a genus-g fiber with the given square fits a ruled surface over T².
    Ruled { g: usize, self_int: i64 },
}

struct Loaded {
    f: Factorization,
    entry: Option<CatalogEntry>,
}

fn load(input: &str) -> Result<Loaded, String> {
    let path = Path::new(input);
    if !input.starts_with("catalog:") && path.exists() {
        let src = fs::read_to_string(path).map_err(|e| format!("{input}: {e}"))?;
        let f = dsl::parse(&src).map_err(|d| format!("{input}:\n{d}"))?;
        return Ok(Loaded { f, entry: None });
    }
    let e = catalog::entry(input).map_err(|e| format!("{input}: {e}"))?;
    Ok(Loaded { f: e.factorization.clone(), entry: Some(e) })
}

/// Runs one command line; `args` includes the program name.
pub fn run<I, S>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(err, "{text}");
            } else {
                let _ = write!(out, "{text}");
            }
            return code;
        }
    };
    match dispatch(&cli, out) {
        Ok(code) => code,
        Err(msg) if msg == BROKEN_PIPE => EXIT_OK,
        Err(msg) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_INPUT
        }
    }
}

// a closed stdout (`lefschetz … | head`) ends the command quietly
const BROKEN_PIPE: &str = "broken pipe";

fn io_err(e: std::io::Error) -> String {
    if e.kind() == std::io::ErrorKind::BrokenPipe {
        BROKEN_PIPE.into()
    } else {
        e.to_string()
    }
}

fn emit(out: &mut dyn Write, text: impl std::fmt::Display) -> Result<(), String> {
    writeln!(out, "{text}").map_err(io_err)
}

fn pass_code(pass: bool) -> i32 {
    if pass {
        EXIT_OK
    } else {
        EXIT_FAIL
    }
}

fn dispatch(cli: &Cli, out: &mut dyn Write) -> Result<i32, String> {
    let json = cli.json;
    match &cli.cmd {
        Cmd::Verify { input, all } => match (input, all) {
            (Some(input), false) => {
                let l = load(input)?;
                let v = verify(&l.f);
                if json {
                    emit(out, json!({ "input": input, "pass": v.pass, "witness": v.witness, "note": v.note }))?;
                } else {
                    emit(out, &v)?;
                }
                Ok(pass_code(v.pass))
            }
            (None, true) => verify_all(json, out),
            _ => Err("give either an input or --all".into()),
        },
        Cmd::Invariants(i) => {
            let l = load(&i.input)?;
            let r = InvariantReport::compute(&l.f).map_err(|e| e.to_string())?;
            if json {
                emit(out, r.to_json())?;
            } else {
                emit(out, &r)?;
                let s = scy_criterion(&r);
                emit(out, format!("SCY criterion: {} ({})", if s.pass { "PASS" } else { "FAIL" }, s.reason))?;
            }
            Ok(pass_code(r.predicates.sp_verify == "PASS"))
        }
        Cmd::Signature(i) => signature(&load(&i.input)?, json, out),
        Cmd::H1(i) => {
            let l = load(&i.input)?;
            let h = h1_pipeline(&l.f).map_err(|e| e.to_string())?;
            if json {
                emit(out, json!({ "rank": h.rank, "torsion": h.torsion, "group": h.to_string() }))?;
            } else {
                emit(out, &h)?;
            }
            Ok(EXIT_OK)
        }
        Cmd::Pi1 { input, budget, trace } => {
            let l = load(input)?;
            let budget = match budget {
                Some(b) => *b,
                None => Budget::from_env().map_err(|e| e.to_string())?,
            };
            let r = pi1_report(&l.f, budget).map_err(|e| e.to_string())?;
            if json {
                emit(
                    out,
                    json!({
                        "status": format!("{:?}", r.status),
                        "group": r.group.to_string(),
                        "relators_used": r.relators_used,
                        "open_pairs": r.proof.open,
                        "report": r.to_string(),
                    }),
                )?;
            } else {
                emit(out, &r)?;
                if *trace {
                    let g = presentation(&l.f, true).map_err(|e| e.to_string())?;
                    emit(out, &g)?;
                    for t in &r.proof.traces {
                        emit(out, t.to_lines(&g))?;
                    }
                }
            }
            Ok(pass_code(r.status == Pi1Status::Certified))
        }
        Cmd::Breed { id } => {
            let e = catalog::entry(id).map_err(|e| e.to_string())?;
            let recipe = e.recipe.clone().ok_or_else(|| format!("{id} is base data, not bred"))?;
            let b = catalog::breed(&recipe).map_err(|e| e.to_string())?;
            if json {
                emit(
                    out,
                    json!({
                        "id": e.id,
                        "recipe": recipe,
                        "factorization": dsl::serialize(&b.factorization),
                        "summands": b.summands.iter().map(|(l, f)| (l.clone(), f.to_string())).collect::<Vec<_>>(),
                        "ledger": b.ledger,
                    }),
                )?;
            } else {
                emit(out, format!("# {}\n# recipe\n{}", e.description, comment(&recipe.to_string())))?;
                write!(out, "{}", dsl::serialize(&b.factorization)).map_err(io_err)?;
            }
            Ok(EXIT_OK)
        }
        Cmd::Catalog(c) => catalog_cmd(c, json, out),
        Cmd::Oracle(o) => match o {
            OracleCmd::RationalObstruction { g, m, bound } => {
                let r = rational_obstruction(*g, *m, *bound);
                if json {
                    emit(out, json!({ "g": g, "m": m, "bound": bound, "result": r }))?;
                } else {
                    emit(out, &r)?;
                }
                Ok(EXIT_OK)
            }
            OracleCmd::Ruled { g, self_int } => {
                let r = ruled_exclusion(*g, *self_int);
                if json {
                    emit(out, json!({ "g": g, "self_int": self_int, "result": r, "both_excluded": r.both_excluded() }))?;
                } else {
                    emit(out, format!("product {:?}\ntwisted {:?}", r.product, r.twisted))?;
                }
                Ok(EXIT_OK)
            }
        },
    }
}

fn comment(text: &str) -> String {
    text.lines().map(|l| format!("# {l}")).collect::<Vec<_>>().join("\n")
}

fn verify_all(json: bool, out: &mut dyn Write) -> Result<i32, String> {
    let ids = catalog::standard_ids();
    let results: Vec<(String, Result<bool, String>)> = std::thread::scope(|s| {
        let handles: Vec<_> = ids
            .iter()
            .map(|id| {
                s.spawn(move || {
                    catalog::entry(id).map(|e| verify(&e.factorization).pass).map_err(|e| e.to_string())
                })
            })
            .collect();
        ids.iter()
            .cloned()
            .zip(handles.into_iter().map(|h| h.join().unwrap_or_else(|_| Err("panicked".into()))))
            .collect()
    });
    let mut ok = true;
    let mut rows = Vec::new();
    for (id, r) in &results {
        let status = match r {
            Ok(true) => "PASS".to_string(),
            Ok(false) => {
                ok = false;
                "FAIL".to_string()
            }
            Err(e) => {
                ok = false;
                format!("ERROR {e}")
            }
        };
        if json {
            rows.push(json!({ "id": id, "status": status }));
        } else {
            emit(out, format!("{status:5} {id}"))?;
        }
    }
    if json {
        emit(out, serde_json::Value::Array(rows))?;
    }
    Ok(pass_code(ok))
}

fn signature(l: &Loaded, json: bool, out: &mut dyn Write) -> Result<i32, String> {
    let meyer = signature_meyer(&l.f).map_err(|e| e.to_string())?;
    let hyper = signature_hyperelliptic(&l.f).ok();
    let decomp = match &l.entry {
        Some(e) => Some(e.decomposition().map_err(|e| e.to_string())?),
        None => None,
    };
    let agree = hyper.is_none_or(|h| h == meyer) && decomp.as_ref().is_none_or(|d| d.total == meyer);
    if json {
        emit(out, json!({ "meyer": meyer, "hyperelliptic": hyper, "decomposition": decomp, "agree": agree }))?;
    } else {
        emit(out, format!("meyer          {meyer}"))?;
        if let Some(h) = hyper {
            emit(out, format!("hyperelliptic  {h}"))?;
        }
        if let Some(d) = &decomp {
            let parts: Vec<String> = d.summands.iter().map(|(l, s)| format!("{l}: {s}")).collect();
            emit(out, format!("decomposition  {}  [{}; {} canceled pairs]", d.total, parts.join(", "), d.ledger.len()))?;
        }
    }
    Ok(pass_code(agree))
}

fn catalog_cmd(c: &CatalogCmd, json: bool, out: &mut dyn Write) -> Result<i32, String> {
    match c {
        CatalogCmd::List => {
            let entries = catalog::standard_entries().map_err(|e| e.to_string())?;
            if json {
                let v: Vec<_> = entries
                    .iter()
                    .map(|e| json!({ "id": e.id, "description": e.description, "length": e.factorization.len() }))
                    .collect();
                emit(out, serde_json::Value::Array(v))?;
            } else {
                for e in entries {
                    emit(out, format!("{:8} {}", e.id, e.description))?;
                }
            }
            Ok(EXIT_OK)
        }
        CatalogCmd::Export { dir } => {
            fs::create_dir_all(dir).map_err(|e| format!("{}: {e}", dir.display()))?;
            for e in catalog::standard_entries().map_err(|e| e.to_string())? {
                let path = dir.join(format!("{}.lf", e.id));
                fs::write(&path, fixture_text(&e)).map_err(|e| format!("{}: {e}", path.display()))?;
                emit(out, path.display())?;
            }
            Ok(EXIT_OK)
        }
        CatalogCmd::Check { id } => {
            let entries = match id {
                Some(id) => vec![catalog::entry(id).map_err(|e| e.to_string())?],
                None => catalog::standard_entries().map_err(|e| e.to_string())?,
            };
            let mut ok = true;
            let mut rows = Vec::new();
            for e in &entries {
                let replay = e.replay_matches().map_err(|e| e.to_string())?;
                ok &= replay;
                let checks = catalog::check_expected(e);
                ok &= checks.iter().all(|c| c.ok);
                if json {
                    rows.push(json!({ "id": e.id, "replay": replay, "checks": checks }));
                } else {
                    emit(out, format!("{} replay {}", e.id, if replay { "ok" } else { "MISMATCH" }))?;
                    for c in checks {
                        emit(
                            out,
                            format!(
                                "  {:4} {:20} expected {} observed {} ({})",
                                if c.ok { "ok" } else { "FAIL" },
                                c.key,
                                c.expected,
                                c.observed,
                                c.tag
                            ),
                        )?;
                    }
                }
            }
            if json {
                emit(out, serde_json::Value::Array(rows))?;
            }
            Ok(pass_code(ok))
        }
    }
}

/// Factorization file with the description, recipe and expectations as comments.
pub fn fixture_text(e: &CatalogEntry) -> String {
    let mut s = format!("# {}: {}\n", e.id, e.description);
    if let Some(r) = &e.recipe {
        s.push_str("# recipe\n");
        s.push_str(&comment(&r.to_string()));
        s.push('\n');
    }
    for x in &e.expected {
        s.push_str(&format!("# expect {} = {} ({})\n", x.key, x.value, x.tag));
    }
    s.push_str(&dsl::serialize(&e.factorization));
    s
}
