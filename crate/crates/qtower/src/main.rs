//! Command-line front end: check and evaluate DSL programs, compare them at
//! a chosen level, dilate contractions and channels, and run the seeded
//! property suites.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use qtower::biaffine::corner;
use qtower::channels::{choi, stinespring, KrausChannel};
use qtower::dsl::{
    coerce_value, equal_at_level, evaluate, parse, typecheck, Level, TypedExpr, Value,
};
use qtower::linalg::ComplexMatrix;
use qtower::rig::ObjExpr;
use qtower::suite::run_all;
use qtower::tower::{Level as TowerLevel, TowerMor};

#[derive(Parser)]
#[command(
    name = "qtower",
    version,
    about = "Typed morphism programs across the unitary, contraction, channel, and splitting levels"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Parse and typecheck a program, reporting its boundary and level.
    Check { file: PathBuf },
    /// Evaluate a program at a level, optionally exporting the value.
    Eval {
        /// Level to evaluate at: U, C, Q, or S.
        #[arg(long)]
        level: Level,
        file: PathBuf,
        /// Output path; the name must end in matrix.json, kraus.json, or
        /// choi.json, which selects the export format.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare two programs at a level. Exits 0 equal, 1 unequal, 2 error.
    Equal {
        /// Level to compare at: U, C, Q, or S.
        #[arg(long)]
        level: Level,
        file1: PathBuf,
        file2: PathBuf,
    },
    /// Print a dilation as JSON: `halmos` of a contraction matrix, or
    /// `stinespring` of a Kraus channel.
    Dilate {
        #[arg(long, value_enum)]
        kind: DilateKind,
        file: PathBuf,
    },
    /// Run the property suites and print one pass/fail line per law.
    Suite {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Run only suites whose name contains this substring.
        #[arg(long)]
        filter: Option<String>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum DilateKind {
    Halmos,
    Stinespring,
}

fn main() -> ExitCode {
    match Cli::parse().cmd {
        Cmd::Check { file } => fallible(|| {
            let t = load_program(&file)?;
            println!("{} -> {} (minimum level {})", t.dom, t.cod, t.min_level);
            Ok(())
        }),
        Cmd::Eval { level, file, out } => fallible(|| {
            let t = load_program(&file)?;
            let value = evaluate(&t, level).map_err(|e| e.to_string())?;
            println!("{}", describe(&value));
            if let Some(path) = out {
                export(&value, &path)?;
                println!("wrote {}", path.display());
            }
            Ok(())
        }),
        Cmd::Equal { level, file1, file2 } => {
            let verdict = (|| -> Result<bool, String> {
                let a = load_program(&file1)?;
                let b = load_program(&file2)?;
                equal_at_level(&a, &b, level).map_err(|e| e.to_string())
            })();
            match verdict {
                Ok(true) => {
                    println!("equal at level {level}");
                    ExitCode::SUCCESS
                }
                Ok(false) => {
                    println!("not equal at level {level}");
                    ExitCode::from(1)
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(2)
                }
            }
        }
        Cmd::Dilate { kind, file } => fallible(|| dilate(kind, &file)),
        Cmd::Suite { seed, filter } => {
            let reports = run_all(seed, filter.as_deref());
            if reports.is_empty() {
                eprintln!("error: no suite name matches the filter");
                return ExitCode::from(2);
            }
            let mut all_passed = true;
            for r in &reports {
                let status = if r.passed { "PASS" } else { "FAIL" };
                println!("{status} {}: {} ({} ms)", r.name, r.detail, r.millis);
                all_passed &= r.passed;
            }
            if all_passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
    }
}

fn fallible(run: impl FnOnce() -> Result<(), String>) -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn load_program(path: &Path) -> Result<TypedExpr, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let ast = parse(&text).map_err(|e| e.to_string())?;
    typecheck(&ast).map_err(|e| e.to_string())
}

fn describe(value: &Value) -> String {
    match value {
        Value::Unitary(m) => format!("level U value: {}x{} matrix", m.rows(), m.cols()),
        Value::Biaffine(b) => format!(
            "level C value: {} -> {} with ancillas {} and {}",
            b.dom, b.cod, b.in_anc, b.out_anc
        ),
        Value::Channel(k) => format!(
            "level Q value: channel {} -> {} with {} Kraus operators",
            k.in_dim,
            k.out_dim,
            k.kraus.len()
        ),
        Value::Split(m) => {
            let blocks = |p: &Option<qtower::split::Partition>| match p {
                Some(p) => format!("{:?}", p.blocks),
                None => "unknown".into(),
            };
            format!(
                "level S value: {} -> {} with source blocks {} and target blocks {}",
                m.src.ambient,
                m.dst.ambient,
                blocks(&m.src.partition),
                blocks(&m.dst.partition)
            )
        }
    }
}

/// The channel a value presents, for the kraus and choi exports.
fn as_channel(value: &Value) -> Result<KrausChannel, String> {
    match value {
        Value::Split(m) => Ok(m.f.clone()),
        other => match coerce_value(other, Level::Q).map_err(|e| e.to_string())? {
            Value::Channel(k) => Ok(k),
            _ => unreachable!("coercion to Q yields a channel"),
        },
    }
}

fn export(value: &Value, path: &Path) -> Result<(), String> {
    let name = path
        .file_name()
        .and_then(|s| s.to_str())
        .ok_or_else(|| format!("unusable output path {}", path.display()))?;
    let payload = if name.ends_with("matrix.json") {
        match value {
            Value::Unitary(m) => m.to_json_string(),
            // The corner is the presentation-independent invariant; the
            // full representative is available through `dilate`.
            Value::Biaffine(b) => corner(b).mat.to_json_string(),
            _ => {
                return Err(
                    "matrix.json exports level U or C values; use kraus.json or choi.json".into(),
                )
            }
        }
    } else if name.ends_with("kraus.json") {
        as_channel(value)?.to_json_string()
    } else if name.ends_with("choi.json") {
        choi(&as_channel(value)?).mat.to_json_string()
    } else {
        return Err(format!(
            "output name `{name}` must end in matrix.json, kraus.json, or choi.json"
        ));
    };
    std::fs::write(path, payload).map_err(|e| format!("cannot write {}: {e}", path.display()))
}

fn dilate(kind: DilateKind, file: &Path) -> Result<(), String> {
    let text = std::fs::read_to_string(file)
        .map_err(|e| format!("cannot read {}: {e}", file.display()))?;
    match kind {
        DilateKind::Halmos => {
            let mat = ComplexMatrix::from_json_str(&text).map_err(|e| e.to_string())?;
            let t = TowerMor {
                dom: ObjExpr::nat(mat.cols()),
                cod: ObjExpr::nat(mat.rows()),
                mat,
                level: TowerLevel::Contraction,
            };
            let d = qtower::biaffine::halmos_dilate(&t).map_err(|e| e.to_string())?;
            println!("{}", d.mat.to_json_string());
        }
        DilateKind::Stinespring => {
            let k = KrausChannel::from_json_str(&text).map_err(|e| e.to_string())?;
            let rep = stinespring(&k).map_err(|e| e.to_string())?;
            let t: serde_json::Value = serde_json::from_str(&rep.t.mat.to_json_string())
                .expect("matrix serialization is valid JSON");
            let out = serde_json::json!({ "t": t, "ancilla": rep.anc_dim() });
            println!("{}", serde_json::to_string(&out).expect("plain JSON object"));
        }
    }
    Ok(())
}
