//! Evaluators for the four semantic levels, upward coercions between their
//! value types, and level-indexed equality. Each level's equality delegates
//! to that level's oracle: exact matrix distance, biaffine corner
//! equivalence, and Choi comparison of channels.

use num_complex::Complex64;

use crate::biaffine::{
    compose_biaffine, corner, dagger_biaffine, equiv_biaffine, halmos_dilate, lift_unitary,
    monoidal_biaffine, zero_mor, BiaffineMor, MonoidalOp,
};
use crate::channels::{channel_equal, oplus_channels, otimes_channels, KrausChannel};
use crate::linalg::{classify_operator, direct_sum, kron, ComplexMatrix, OperatorClass};
use crate::rig::ObjExpr;
use crate::split::{measurement_idempotent, Partition, SplitMor, SplitObject};
use crate::tol;
use crate::tower::{Level as TowerLevel, TowerMor};

use super::check::{gate_boundary, gate_matrix};
use super::{DslError, Level, MorExpr, TypedExpr};

/// The result of evaluating an expression at a level.
#[derive(Debug, Clone)]
pub enum Value {
    Unitary(ComplexMatrix),
    Biaffine(BiaffineMor),
    Channel(KrausChannel),
    Split(SplitMor),
}

impl Value {
    pub fn level(&self) -> Level {
        match self {
            Value::Unitary(_) => Level::U,
            Value::Biaffine(_) => Level::C,
            Value::Channel(_) => Level::Q,
            Value::Split(_) => Level::S,
        }
    }
}

fn not_at(construct: &str, level: Level) -> DslError {
    DslError::LevelError(format!("{construct} is not available at level {level}"))
}

fn eval_u(e: &MorExpr) -> Result<ComplexMatrix, DslError> {
    match e {
        MorExpr::NamedGate(n) => {
            gate_matrix(n).ok_or_else(|| DslError::TypeMismatch(format!("unknown gate `{n}`")))
        }
        MorExpr::MatrixLit(m) => Ok(m.clone()),
        MorExpr::Structural(s, args) => Ok(s.matrix(args)?),
        MorExpr::Seq(l, r) => {
            let a = eval_u(l)?;
            let b = eval_u(r)?;
            Ok(b.mul(&a))
        }
        MorExpr::Plus(l, r) => Ok(direct_sum(&eval_u(l)?, &eval_u(r)?)),
        MorExpr::Times(l, r) => Ok(kron(&eval_u(l)?, &eval_u(r)?)),
        MorExpr::Dagger(i) => Ok(eval_u(i)?.adjoint()),
        MorExpr::Discard(_) => Err(not_at("discard", Level::U)),
        MorExpr::Measure(_) => Err(not_at("measure", Level::U)),
        MorExpr::Zero(..) => Err(not_at("zero", Level::U)),
    }
}

/// Embed a contraction into the biaffine world: unitaries lift with empty
/// ancillas, strict contractions through their block dilation.
fn contraction_biaffine(
    dom: ObjExpr,
    cod: ObjExpr,
    mat: ComplexMatrix,
) -> Result<BiaffineMor, DslError> {
    let unitary = classify_operator(&mat) == OperatorClass::Unitary;
    let level = if unitary { TowerLevel::Unitary } else { TowerLevel::Contraction };
    let t = TowerMor { dom, cod, mat, level };
    if unitary {
        Ok(lift_unitary(&t)?)
    } else {
        Ok(halmos_dilate(&t)?)
    }
}

fn leaf_boundary(e: &MorExpr) -> Result<Option<(ObjExpr, ObjExpr)>, DslError> {
    Ok(match e {
        MorExpr::NamedGate(n) => gate_boundary(n),
        MorExpr::MatrixLit(m) => Some((ObjExpr::nat(m.cols()), ObjExpr::nat(m.rows()))),
        MorExpr::Structural(s, args) => Some(s.signature(args)?),
        _ => None,
    })
}

fn eval_c(e: &MorExpr) -> Result<BiaffineMor, DslError> {
    match e {
        MorExpr::NamedGate(_) | MorExpr::MatrixLit(_) | MorExpr::Structural(..) => {
            let (dom, cod) = leaf_boundary(e)?.expect("leaf has a boundary");
            contraction_biaffine(dom, cod, eval_u(e)?)
        }
        MorExpr::Zero(a, b) => Ok(zero_mor(a, b)),
        MorExpr::Seq(l, r) => Ok(compose_biaffine(&eval_c(l)?, &eval_c(r)?)?),
        MorExpr::Plus(l, r) => Ok(monoidal_biaffine(MonoidalOp::Oplus, &eval_c(l)?, &eval_c(r)?)?),
        MorExpr::Times(l, r) => {
            Ok(monoidal_biaffine(MonoidalOp::Otimes, &eval_c(l)?, &eval_c(r)?)?)
        }
        MorExpr::Dagger(i) => Ok(dagger_biaffine(&eval_c(i)?)),
        MorExpr::Discard(_) => Err(not_at("discard", Level::C)),
        MorExpr::Measure(_) => Err(not_at("measure", Level::C)),
    }
}

fn single_kraus(mat: ComplexMatrix) -> Result<KrausChannel, DslError> {
    Ok(KrausChannel::new(mat.cols(), mat.rows(), vec![mat])?)
}

fn eval_q(e: &MorExpr) -> Result<KrausChannel, DslError> {
    match e {
        MorExpr::NamedGate(_) | MorExpr::MatrixLit(_) | MorExpr::Structural(..) => {
            single_kraus(eval_u(e)?)
        }
        MorExpr::Zero(a, b) => single_kraus(ComplexMatrix::zeros(b.dim(), a.dim())),
        MorExpr::Discard(a) => {
            let n = a.dim();
            if n == 0 {
                return single_kraus(ComplexMatrix::zeros(1, 0));
            }
            let mut kraus = Vec::with_capacity(n);
            for i in 0..n {
                let mut row = ComplexMatrix::zeros(1, n);
                row.set(0, i, Complex64::new(1.0, 0.0));
                kraus.push(row);
            }
            Ok(KrausChannel::new(n, 1, kraus)?)
        }
        MorExpr::Measure(p) => Ok(measurement_idempotent(p)?.idem),
        MorExpr::Seq(l, r) => Ok(eval_q(l)?.then(&eval_q(r)?)?),
        MorExpr::Plus(l, r) => Ok(oplus_channels(&eval_q(l)?, &eval_q(r)?)),
        MorExpr::Times(l, r) => Ok(otimes_channels(&eval_q(l)?, &eval_q(r)?)),
        // Dagger bodies live at level C or below; push the dagger through
        // there and read off the contraction it presents.
        MorExpr::Dagger(_) => single_kraus(corner(&eval_c(e)?).mat),
    }
}

fn trivial_split_object(n: usize) -> SplitObject {
    SplitObject {
        ambient: ObjExpr::nat(n),
        idem: KrausChannel::identity(n),
        partition: if n > 0 { Some(Partition { blocks: vec![n] }) } else { None },
    }
}

fn wrap_trivial(k: KrausChannel) -> SplitMor {
    SplitMor {
        src: trivial_split_object(k.in_dim),
        dst: trivial_split_object(k.out_dim),
        f: k,
    }
}

fn oplus_objects(a: &SplitObject, b: &SplitObject) -> SplitObject {
    SplitObject {
        ambient: ObjExpr::oplus(a.ambient.clone(), b.ambient.clone()),
        idem: oplus_channels(&a.idem, &b.idem),
        partition: match (&a.partition, &b.partition) {
            (Some(p), Some(q)) => {
                Some(Partition { blocks: p.blocks.iter().chain(&q.blocks).copied().collect() })
            }
            _ => None,
        },
    }
}

/// Consecutive-block structure of a tensor of partitions, when it exists:
/// either the left side is fully fine-grained or the right side is a single
/// block; otherwise the grid blocks are not consecutive and no partition is
/// recorded.
fn tensor_partition(p: Option<&Partition>, q: Option<&Partition>) -> Option<Partition> {
    let (p, q) = (p?, q?);
    if p.blocks.iter().all(|&b| b == 1) {
        let blocks = std::iter::repeat(q.blocks.clone())
            .take(p.total())
            .flatten()
            .collect();
        Some(Partition { blocks })
    } else if q.blocks.len() == 1 {
        Some(Partition { blocks: p.blocks.iter().map(|b| b * q.total()).collect() })
    } else {
        None
    }
}

fn otimes_objects(a: &SplitObject, b: &SplitObject) -> SplitObject {
    SplitObject {
        ambient: ObjExpr::otimes(a.ambient.clone(), b.ambient.clone()),
        idem: otimes_channels(&a.idem, &b.idem),
        partition: tensor_partition(a.partition.as_ref(), b.partition.as_ref()),
    }
}

fn eval_s(e: &MorExpr) -> Result<SplitMor, DslError> {
    match e {
        MorExpr::Measure(p) => Ok(measurement_idempotent(p)?.identity()),
        MorExpr::Seq(l, r) => {
            let a = eval_s(l)?;
            let b = eval_s(r)?;
            // Endpoint absorption survives: the outer idempotents absorb
            // their own legs, so the seam needs no extra coercion.
            let f = a.f.then(&b.f)?;
            Ok(SplitMor { src: a.src, dst: b.dst, f })
        }
        MorExpr::Plus(l, r) => {
            let a = eval_s(l)?;
            let b = eval_s(r)?;
            Ok(SplitMor {
                src: oplus_objects(&a.src, &b.src),
                dst: oplus_objects(&a.dst, &b.dst),
                f: oplus_channels(&a.f, &b.f),
            })
        }
        MorExpr::Times(l, r) => {
            let a = eval_s(l)?;
            let b = eval_s(r)?;
            Ok(SplitMor {
                src: otimes_objects(&a.src, &b.src),
                dst: otimes_objects(&a.dst, &b.dst),
                f: otimes_channels(&a.f, &b.f),
            })
        }
        other => Ok(wrap_trivial(eval_q(other)?)),
    }
}

/// Evaluate at a level at or above the expression's minimum.
pub fn evaluate(e: &TypedExpr, at: Level) -> Result<Value, DslError> {
    if at < e.min_level {
        return Err(DslError::LevelTooLow { need: e.min_level, at });
    }
    Ok(match at {
        Level::U => Value::Unitary(eval_u(&e.expr)?),
        Level::C => Value::Biaffine(eval_c(&e.expr)?),
        Level::Q => Value::Channel(eval_q(&e.expr)?),
        Level::S => Value::Split(eval_s(&e.expr)?),
    })
}

/// Push a value upward through the inclusions; downward coercion is not
/// defined.
pub fn coerce_value(v: &Value, to: Level) -> Result<Value, DslError> {
    let from = v.level();
    if to < from {
        return Err(DslError::LevelError(format!(
            "cannot coerce a level-{from} value down to {to}"
        )));
    }
    if to == from {
        return Ok(v.clone());
    }
    let up = match v {
        Value::Unitary(m) => Value::Biaffine(contraction_biaffine(
            ObjExpr::nat(m.cols()),
            ObjExpr::nat(m.rows()),
            m.clone(),
        )?),
        Value::Biaffine(b) => Value::Channel(single_kraus(corner(b).mat)?),
        Value::Channel(k) => Value::Split(wrap_trivial(k.clone())),
        Value::Split(_) => unreachable!("S is the top level"),
    };
    coerce_value(&up, to)
}

/// Equality at a level, via that level's oracle. Boundary objects must
/// match as expressions.
pub fn equal_at_level(a: &TypedExpr, b: &TypedExpr, at: Level) -> Result<bool, DslError> {
    if a.dom != b.dom || a.cod != b.cod {
        return Err(DslError::ObjectMismatch(format!(
            "cannot compare {} -> {} with {} -> {}",
            a.dom, a.cod, b.dom, b.cod
        )));
    }
    let need = a.min_level.max(b.min_level);
    if at < need {
        return Err(DslError::LevelTooLow { need, at });
    }
    match (evaluate(a, at)?, evaluate(b, at)?) {
        (Value::Unitary(x), Value::Unitary(y)) => Ok(x.sup_distance(&y) <= tol::STRUCT),
        (Value::Biaffine(x), Value::Biaffine(y)) => Ok(equiv_biaffine(&x, &y)?),
        (Value::Channel(x), Value::Channel(y)) => Ok(channel_equal(&x, &y)?),
        (Value::Split(x), Value::Split(y)) => Ok(channel_equal(&x.f, &y.f)?),
        _ => unreachable!("evaluate returns the value of the requested level"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::{parse, typecheck};

    fn typed(text: &str) -> TypedExpr {
        typecheck(&parse(text).unwrap()).unwrap()
    }

    fn eq_at(a: &str, b: &str, at: Level) -> bool {
        equal_at_level(&typed(a), &typed(b), at).unwrap()
    }

    const ID2: &str = r#"U[{"rows":2,"cols":2,"data":[[[1.0,0.0],[0.0,0.0]],[[0.0,0.0],[1.0,0.0]]]}]"#;
    const PHASE2: &str = r#"U[{"rows":2,"cols":2,"data":[[[0.0,1.0],[0.0,0.0]],[[0.0,0.0],[0.0,1.0]]]}]"#;

    #[test]
    fn unitary_evaluation() {
        let hh = typed("H;H");
        match evaluate(&hh, Level::U).unwrap() {
            Value::Unitary(m) => assert!(m.is_identity(1e-12)),
            other => panic!("wrong value kind {other:?}"),
        }
        assert!(eq_at("X;X", ID2, Level::U));
        assert!(!eq_at("H", "X", Level::U));
    }

    #[test]
    fn gate_tensor_matches_cx_boundary() {
        let t = typed("CX;(H*H)");
        match evaluate(&t, Level::U).unwrap() {
            Value::Unitary(m) => assert_eq!((m.rows(), m.cols()), (4, 4)),
            other => panic!("wrong value kind {other:?}"),
        }
    }

    #[test]
    fn structural_sequencing_cancels() {
        assert!(eq_at("swapP(2,3);swapP(3,2)", "swapP(2,3);swapP(3,2)", Level::U));
        let t = typed("swapP(2,3);swapPInv(2,3)");
        match evaluate(&t, Level::U).unwrap() {
            Value::Unitary(m) => assert!(m.is_identity(1e-12)),
            other => panic!("wrong value kind {other:?}"),
        }
    }

    #[test]
    fn zero_routes_agree_at_c() {
        // Two routes to the zero morphism: direct, and through the zero
        // object. They disagree syntactically and agree up to equivalence.
        let direct = typed("zero(2,2)");
        let via_o = typed("zero(2,O);zero(O,2)");
        assert!(equal_at_level(&direct, &via_o, Level::C).unwrap());
        assert!(equal_at_level(&direct, &via_o, Level::Q).unwrap());
    }

    #[test]
    fn phases_die_at_the_channel_level() {
        // i*I differs from I as a matrix and a biaffine corner, but they
        // present the same channel: the witness that upward equality can
        // appear strictly.
        assert!(!eq_at(PHASE2, ID2, Level::U));
        assert!(!eq_at(PHASE2, ID2, Level::C));
        assert!(eq_at(PHASE2, ID2, Level::Q));
        assert!(eq_at(PHASE2, ID2, Level::S));
    }

    #[test]
    fn monotonicity_on_equal_pairs() {
        for (a, b) in [("X;X", ID2), ("H;H", ID2)] {
            assert!(eq_at(a, b, Level::U));
            assert!(eq_at(a, b, Level::C));
            assert!(eq_at(a, b, Level::Q));
            assert!(eq_at(a, b, Level::S));
        }
        // Distinct unitaries are equal at no level.
        for lvl in [Level::U, Level::C, Level::Q, Level::S] {
            assert!(!eq_at("H", "X", lvl));
        }
    }

    #[test]
    fn discard_absorbs_unitaries() {
        assert!(eq_at("H;discard(2)", "discard(2)", Level::Q));
        assert!(eq_at("X;discard(2)", "discard(2)", Level::Q));
        // But not strict contractions: trace leaks.
        let half = r#"U[{"rows":2,"cols":2,"data":[[[0.5,0.0],[0.0,0.0]],[[0.0,0.0],[0.5,0.0]]]}]"#;
        let lhs = typecheck(&parse(&format!("{half};discard(2)")).unwrap()).unwrap();
        let rhs = typed("discard(2)");
        assert!(!equal_at_level(&lhs, &rhs, Level::Q).unwrap());
    }

    #[test]
    fn measurement_is_idempotent_at_s() {
        assert!(eq_at("measure([1,1]);measure([1,1])", "measure([1,1])", Level::S));
        match evaluate(&typed("measure([1,1])"), Level::S).unwrap() {
            Value::Split(m) => {
                let deph = measurement_idempotent(&Partition::new(vec![1, 1]).unwrap()).unwrap();
                assert!(channel_equal(&m.f, &deph.idem).unwrap());
                assert!(m.src.partition.is_some());
            }
            other => panic!("wrong value kind {other:?}"),
        }
    }

    #[test]
    fn dagger_inside_higher_level_programs() {
        assert!(eq_at("H;dagger(H);discard(2)", "discard(2)", Level::Q));
        assert!(eq_at("dagger(H;X)", "X;H", Level::U));
    }

    #[test]
    fn level_too_low_errors() {
        let d = typed("discard(2)");
        assert!(matches!(
            evaluate(&d, Level::U),
            Err(DslError::LevelTooLow { need: Level::Q, at: Level::U })
        ));
        assert!(matches!(
            evaluate(&d, Level::C),
            Err(DslError::LevelTooLow { .. })
        ));
        let m = typed("measure([2])");
        assert!(matches!(evaluate(&m, Level::Q), Err(DslError::LevelTooLow { .. })));
        assert!(matches!(
            equal_at_level(&d, &d, Level::C),
            Err(DslError::LevelTooLow { .. })
        ));
    }

    #[test]
    fn object_mismatch_is_an_error() {
        let a = typed("H");
        let b = typed("CX");
        assert!(matches!(
            equal_at_level(&a, &b, Level::U),
            Err(DslError::ObjectMismatch(_))
        ));
        // Equal dimensions, distinct objects.
        let c = typed("swapP(1,1)");
        assert!(matches!(
            equal_at_level(&a, &c, Level::U),
            Err(DslError::ObjectMismatch(_))
        ));
    }

    #[test]
    fn plus_does_not_commute_with_coercion() {
        // The channel-level sum acts blockwise and kills cross-block
        // coherence, so lifting u (+) v as one unitary is a finer map than
        // summing the lifted channels. Sequencing and tensoring commute;
        // the sum deliberately does not.
        let t = typed("H+X");
        let direct = evaluate(&t, Level::Q).unwrap();
        let coerced = coerce_value(&evaluate(&t, Level::U).unwrap(), Level::Q).unwrap();
        match (direct, coerced) {
            (Value::Channel(x), Value::Channel(y)) => {
                assert!(!channel_equal(&x, &y).unwrap())
            }
            other => panic!("wrong value kinds {other:?}"),
        }
    }

    #[test]
    fn coercion_commutes_with_evaluation() {
        for text in ["H", "swapT(2,3)", "X*Z", "H;X"] {
            let t = typed(text);
            let low = evaluate(&t, Level::U).unwrap();
            for lvl in [Level::C, Level::Q, Level::S] {
                let direct = evaluate(&t, lvl).unwrap();
                let coerced = coerce_value(&low, lvl).unwrap();
                let same = match (&direct, &coerced) {
                    (Value::Biaffine(x), Value::Biaffine(y)) => {
                        corner(x).mat.sup_distance(&corner(y).mat) <= tol::COMPOSED
                    }
                    (Value::Channel(x), Value::Channel(y)) => channel_equal(x, y).unwrap(),
                    (Value::Split(x), Value::Split(y)) => channel_equal(&x.f, &y.f).unwrap(),
                    _ => false,
                };
                assert!(same, "{text} at {lvl}");
            }
        }
        // Downward is refused.
        let v = evaluate(&typed("discard(2)"), Level::Q).unwrap();
        assert!(coerce_value(&v, Level::U).is_err());
    }

    #[test]
    fn plus_at_q_measures_then_acts() {
        // X+X at Q acts blockwise on 1+1 of qubits and kills cross blocks.
        let t = typed("X+X");
        let k = match evaluate(&t, Level::Q).unwrap() {
            Value::Channel(k) => k,
            other => panic!("wrong value kind {other:?}"),
        };
        let mut rho = ComplexMatrix::zeros(4, 4);
        rho.set(0, 0, Complex64::new(0.5, 0.0));
        rho.set(0, 2, Complex64::new(0.5, 0.0));
        rho.set(2, 0, Complex64::new(0.5, 0.0));
        rho.set(2, 2, Complex64::new(0.5, 0.0));
        let out = k.apply_matrix(&rho);
        // Block states are conjugated by X; coherence between blocks dies.
        assert_eq!(out.at(1, 1), Complex64::new(0.5, 0.0));
        assert_eq!(out.at(3, 3), Complex64::new(0.5, 0.0));
        assert_eq!(out.at(1, 3), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn split_tensor_tracks_partitions_when_consecutive() {
        let t = typed("measure([1,1])*measure([2])");
        match evaluate(&t, Level::S).unwrap() {
            Value::Split(m) => {
                assert_eq!(m.src.partition.as_ref().unwrap().blocks, vec![2, 2]);
            }
            other => panic!("wrong value kind {other:?}"),
        }
        let u = typed("measure([2])*measure([1,1])");
        match evaluate(&u, Level::S).unwrap() {
            Value::Split(m) => assert!(m.src.partition.is_none()),
            other => panic!("wrong value kind {other:?}"),
        }
    }

    #[test]
    fn measure_then_discard_composes_at_s() {
        let t = typed("measure([1,1]);discard(2)");
        match evaluate(&t, Level::S).unwrap() {
            Value::Split(m) => {
                let d = typed("discard(2)");
                let dk = match evaluate(&d, Level::S).unwrap() {
                    Value::Split(x) => x,
                    _ => unreachable!(),
                };
                // Measuring before discarding changes nothing.
                assert!(channel_equal(&m.f, &dk.f).unwrap());
            }
            other => panic!("wrong value kind {other:?}"),
        }
    }

    #[test]
    fn evaluation_is_deterministic() {
        let t = typed("measure([1,2]);U[{\"rows\":3,\"cols\":3,\"data\":[[[0.5,0.0],[0.0,0.0],[0.0,0.0]],[[0.0,0.0],[0.5,0.0],[0.0,0.0]],[[0.0,0.0],[0.0,0.0],[0.5,0.0]]]}];measure([1,2])");
        let a = match evaluate(&t, Level::S).unwrap() {
            Value::Split(m) => m,
            _ => unreachable!(),
        };
        let b = match evaluate(&t, Level::S).unwrap() {
            Value::Split(m) => m,
            _ => unreachable!(),
        };
        assert_eq!(a.f, b.f);
    }
}
