//! Level-inferring typechecker. Boundary objects are computed
//! compositionally and compared as object expressions, exactly as the
//! skeletal tower distinguishes `1+1` from `2`; the inferred level is the
//! join of the constructs' minimum levels.

use num_complex::Complex64;

use crate::linalg::{classify_operator, ComplexMatrix, OperatorClass};
use crate::rig::ObjExpr;

use super::{DslError, Level, MorExpr, TypedExpr};

/// Standard gate matrices; all unitary.
pub fn gate_matrix(name: &str) -> Option<ComplexMatrix> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let r = |rows: &[&[f64]]| ComplexMatrix::from_real_rows(rows);
    match name {
        "H" => Some(r(&[&[s, s], &[s, -s]])),
        "X" => Some(r(&[&[0.0, 1.0], &[1.0, 0.0]])),
        "Y" => Some(
            ComplexMatrix::new(
                2,
                2,
                vec![
                    Complex64::new(0.0, 0.0),
                    Complex64::new(0.0, -1.0),
                    Complex64::new(0.0, 1.0),
                    Complex64::new(0.0, 0.0),
                ],
            )
            .expect("gate shape"),
        ),
        "Z" => Some(r(&[&[1.0, 0.0], &[0.0, -1.0]])),
        "S" => Some(
            ComplexMatrix::new(
                2,
                2,
                vec![
                    Complex64::new(1.0, 0.0),
                    Complex64::new(0.0, 0.0),
                    Complex64::new(0.0, 0.0),
                    Complex64::new(0.0, 1.0),
                ],
            )
            .expect("gate shape"),
        ),
        "T" => Some(
            ComplexMatrix::new(
                2,
                2,
                vec![
                    Complex64::new(1.0, 0.0),
                    Complex64::new(0.0, 0.0),
                    Complex64::new(0.0, 0.0),
                    Complex64::new(s, s),
                ],
            )
            .expect("gate shape"),
        ),
        "CX" => Some(r(&[
            &[1.0, 0.0, 0.0, 0.0],
            &[0.0, 1.0, 0.0, 0.0],
            &[0.0, 0.0, 0.0, 1.0],
            &[0.0, 0.0, 1.0, 0.0],
        ])),
        _ => None,
    }
}

pub(crate) fn gate_boundary(name: &str) -> Option<(ObjExpr, ObjExpr)> {
    let q = ObjExpr::Dim(2);
    match name {
        "H" | "X" | "Y" | "Z" | "S" | "T" => Some((q.clone(), q)),
        "CX" => {
            let qq = ObjExpr::otimes(ObjExpr::Dim(2), ObjExpr::Dim(2));
            Some((qq.clone(), qq))
        }
        _ => None,
    }
}

fn infer(e: &MorExpr) -> Result<(ObjExpr, ObjExpr, Level), DslError> {
    match e {
        MorExpr::NamedGate(name) => {
            let (dom, cod) = gate_boundary(name)
                .ok_or_else(|| DslError::TypeMismatch(format!("unknown gate `{name}`")))?;
            Ok((dom, cod, Level::U))
        }
        MorExpr::MatrixLit(m) => {
            let dom = ObjExpr::nat(m.cols());
            let cod = ObjExpr::nat(m.rows());
            match classify_operator(m) {
                OperatorClass::Unitary => Ok((dom, cod, Level::U)),
                OperatorClass::NonContraction => Err(DslError::TypeMismatch(
                    "matrix literal is not a contraction".into(),
                )),
                _ => Ok((dom, cod, Level::C)),
            }
        }
        MorExpr::Structural(s, args) => {
            let (dom, cod) = s.signature(args)?;
            Ok((dom, cod, Level::U))
        }
        MorExpr::Discard(a) => Ok((a.clone(), ObjExpr::UnitI, Level::Q)),
        MorExpr::Measure(p) => {
            if p.blocks.is_empty() || p.blocks.contains(&0) {
                return Err(DslError::TypeMismatch("invalid measurement partition".into()));
            }
            let obj = ObjExpr::nat(p.total());
            Ok((obj.clone(), obj, Level::S))
        }
        MorExpr::Zero(a, b) => Ok((a.clone(), b.clone(), Level::C)),
        MorExpr::Seq(l, r) => {
            let (ld, lc, ll) = infer(l)?;
            let (rd, rc, rl) = infer(r)?;
            if lc != rd {
                return Err(DslError::TypeMismatch(format!(
                    "sequential boundary mismatch: `{lc}` vs `{rd}`"
                )));
            }
            Ok((ld, rc, ll.max(rl)))
        }
        MorExpr::Plus(l, r) => {
            let (ld, lc, ll) = infer(l)?;
            let (rd, rc, rl) = infer(r)?;
            Ok((ObjExpr::oplus(ld, rd), ObjExpr::oplus(lc, rc), ll.max(rl)))
        }
        MorExpr::Times(l, r) => {
            let (ld, lc, ll) = infer(l)?;
            let (rd, rc, rl) = infer(r)?;
            Ok((ObjExpr::otimes(ld, rd), ObjExpr::otimes(lc, rc), ll.max(rl)))
        }
        MorExpr::Dagger(inner) => {
            let (d, c, l) = infer(inner)?;
            if l > Level::C {
                return Err(DslError::LevelError(format!(
                    "dagger is only available up to level C; the body needs level {l}"
                )));
            }
            Ok((c, d, l))
        }
    }
}

/// Assign boundary objects and the minimum evaluation level.
pub fn typecheck(e: &MorExpr) -> Result<TypedExpr, DslError> {
    let (dom, cod, min_level) = infer(e)?;
    Ok(TypedExpr { expr: e.clone(), dom, cod, min_level })
}
