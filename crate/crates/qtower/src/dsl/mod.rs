//! A combinator language over the tower. One expression can be read at four
//! semantic levels: `U` (unitary matrices), `C` (biaffine presentations),
//! `Q` (channels), and `S` (split-idempotent morphisms). Typechecking infers
//! the minimum level each construct needs; evaluation at any level at or
//! above it is defined, with lower-level values coerced upward through the
//! same inclusions the evaluators use.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::biaffine::BiaffineError;
use crate::channels::ChannelError;
use crate::dilation::DilationError;
use crate::linalg::{ComplexMatrix, LinalgError};
use crate::rig::{ObjExpr, RigError, Structural};
use crate::split::{Partition, SplitError};

pub mod check;
pub mod eval;
pub mod parse;

pub use check::typecheck;
pub use eval::{coerce_value, equal_at_level, evaluate, Value};
pub use parse::parse;

/// Semantic levels, totally ordered by inclusion of the categories they
/// name: unitaries sit inside contractions, which present channels, which
/// sit inside the split-idempotent world.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Level {
    U,
    C,
    Q,
    S,
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Level::U => "U",
            Level::C => "C",
            Level::Q => "Q",
            Level::S => "S",
        })
    }
}

impl FromStr for Level {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "U" => Ok(Level::U),
            "C" => Ok(Level::C),
            "Q" => Ok(Level::Q),
            "S" => Ok(Level::S),
            other => Err(format!("unknown level `{other}`; expected U, C, Q, or S")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DslError {
    #[error("syntax error at line {line}, column {col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("type mismatch: {0}")]
    TypeMismatch(String),
    #[error("level error: {0}")]
    LevelError(String),
    #[error("expression needs level {need} but was evaluated at {at}")]
    LevelTooLow { need: Level, at: Level },
    #[error("object mismatch: {0}")]
    ObjectMismatch(String),
    #[error(transparent)]
    Rig(#[from] RigError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Biaffine(#[from] BiaffineError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Dilation(#[from] DilationError),
    #[error(transparent)]
    Split(#[from] SplitError),
}

/// Morphism expressions. `Seq` is diagrammatic (left first), and the three
/// binary nodes parse left-associatively with `*` tighter than `+` tighter
/// than `;`.
#[derive(Debug, Clone, PartialEq)]
pub enum MorExpr {
    NamedGate(String),
    MatrixLit(ComplexMatrix),
    Structural(Structural, Vec<ObjExpr>),
    Discard(ObjExpr),
    Measure(Partition),
    Zero(ObjExpr, ObjExpr),
    Seq(Box<MorExpr>, Box<MorExpr>),
    Plus(Box<MorExpr>, Box<MorExpr>),
    Times(Box<MorExpr>, Box<MorExpr>),
    Dagger(Box<MorExpr>),
}

impl MorExpr {
    fn prec(&self) -> u8 {
        match self {
            MorExpr::Seq(..) => 0,
            MorExpr::Plus(..) => 1,
            MorExpr::Times(..) => 2,
            _ => 3,
        }
    }

    /// Precedence-aware printing; parenthesizes exactly enough that
    /// re-parsing reproduces the tree.
    fn write_prec(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        let p = self.prec();
        if p < min {
            write!(f, "(")?;
        }
        match self {
            MorExpr::Seq(l, r) => {
                l.write_prec(f, 0)?;
                write!(f, ";")?;
                r.write_prec(f, 1)?;
            }
            MorExpr::Plus(l, r) => {
                l.write_prec(f, 1)?;
                write!(f, "+")?;
                r.write_prec(f, 2)?;
            }
            MorExpr::Times(l, r) => {
                l.write_prec(f, 2)?;
                write!(f, "*")?;
                r.write_prec(f, 3)?;
            }
            MorExpr::Dagger(e) => {
                write!(f, "dagger(")?;
                e.write_prec(f, 0)?;
                write!(f, ")")?;
            }
            MorExpr::NamedGate(n) => write!(f, "{n}")?,
            MorExpr::MatrixLit(m) => write!(f, "U[{}]", m.to_json_string())?,
            MorExpr::Structural(s, args) => {
                write!(f, "{}{}(", s.name.base_str(), if s.inverse { "Inv" } else { "" })?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")?;
            }
            MorExpr::Discard(a) => write!(f, "discard({a})")?,
            MorExpr::Measure(p) => {
                write!(f, "measure([")?;
                for (i, b) in p.blocks.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{b}")?;
                }
                write!(f, "])")?;
            }
            MorExpr::Zero(a, b) => write!(f, "zero({a},{b})")?,
        }
        if p < min {
            write!(f, ")")?;
        }
        Ok(())
    }
}

impl fmt::Display for MorExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_prec(f, 0)
    }
}

/// An expression with its inferred boundary objects and minimum level.
#[derive(Debug, Clone, PartialEq)]
pub struct TypedExpr {
    pub expr: MorExpr,
    pub dom: ObjExpr,
    pub cod: ObjExpr,
    pub min_level: Level,
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use proptest::prelude::*;

    #[test]
    fn level_order_and_parsing() {
        assert!(Level::U < Level::C && Level::C < Level::Q && Level::Q < Level::S);
        assert_eq!("Q".parse::<Level>().unwrap(), Level::Q);
        assert!("X".parse::<Level>().is_err());
        assert_eq!(Level::S.to_string(), "S");
    }

    #[test]
    fn printing_parenthesizes_right_nesting_only() {
        let h = || Box::new(MorExpr::NamedGate("H".into()));
        let left = MorExpr::Seq(Box::new(MorExpr::Seq(h(), h())), h());
        assert_eq!(left.to_string(), "H;H;H");
        let right = MorExpr::Seq(h(), Box::new(MorExpr::Seq(h(), h())));
        assert_eq!(right.to_string(), "H;(H;H)");
        let mixed = MorExpr::Seq(h(), Box::new(MorExpr::Plus(h(), Box::new(MorExpr::Times(h(), h())))));
        assert_eq!(mixed.to_string(), "H;H+H*H");
        let grouped = MorExpr::Times(Box::new(MorExpr::Plus(h(), h())), h());
        assert_eq!(grouped.to_string(), "(H+H)*H");
    }

    fn arb_obj() -> impl Strategy<Value = ObjExpr> {
        let leaf = prop_oneof![
            Just(ObjExpr::UnitI),
            Just(ObjExpr::ZeroO),
            (1usize..5).prop_map(ObjExpr::nat),
        ];
        leaf.prop_recursive(3, 12, 2, |inner| {
            prop_oneof![
                (inner.clone(), inner.clone()).prop_map(|(a, b)| ObjExpr::oplus(a, b)),
                (inner.clone(), inner).prop_map(|(a, b)| ObjExpr::otimes(a, b)),
            ]
        })
    }

    fn arb_matrix() -> impl Strategy<Value = ComplexMatrix> {
        (1usize..3, 1usize..3).prop_flat_map(|(r, c)| {
            proptest::collection::vec((-4i32..5, -4i32..5), r * c).prop_map(move |cells| {
                let data = cells
                    .into_iter()
                    .map(|(re, im)| Complex64::new(re as f64 / 2.0, im as f64 / 2.0))
                    .collect();
                ComplexMatrix::new(r, c, data).unwrap()
            })
        })
    }

    fn arb_structural() -> impl Strategy<Value = MorExpr> {
        (0usize..12, any::<bool>()).prop_flat_map(|(i, inverse)| {
            let name = crate::rig::StructuralName::ALL[i];
            proptest::collection::vec(arb_obj(), name.arity()).prop_map(move |args| {
                MorExpr::Structural(Structural { name, inverse }, args)
            })
        })
    }

    fn arb_mor() -> impl Strategy<Value = MorExpr> {
        let gate = prop_oneof![
            Just("H"), Just("X"), Just("Y"), Just("Z"), Just("S"), Just("T"), Just("CX")
        ]
        .prop_map(|g| MorExpr::NamedGate(g.to_string()));
        let leaf = prop_oneof![
            gate,
            arb_matrix().prop_map(MorExpr::MatrixLit),
            arb_structural(),
            arb_obj().prop_map(MorExpr::Discard),
            proptest::collection::vec(1usize..4, 1..4)
                .prop_map(|blocks| MorExpr::Measure(Partition { blocks })),
            (arb_obj(), arb_obj()).prop_map(|(a, b)| MorExpr::Zero(a, b)),
        ];
        leaf.prop_recursive(4, 24, 2, |inner| {
            prop_oneof![
                (inner.clone(), inner.clone())
                    .prop_map(|(a, b)| MorExpr::Seq(Box::new(a), Box::new(b))),
                (inner.clone(), inner.clone())
                    .prop_map(|(a, b)| MorExpr::Plus(Box::new(a), Box::new(b))),
                (inner.clone(), inner.clone())
                    .prop_map(|(a, b)| MorExpr::Times(Box::new(a), Box::new(b))),
                inner.prop_map(|a| MorExpr::Dagger(Box::new(a))),
            ]
        })
    }

    proptest! {
        #[test]
        fn print_parse_round_trips(e in arb_mor()) {
            let text = e.to_string();
            let back = parse(&text).unwrap();
            prop_assert_eq!(back, e);
        }
    }
}
