//! Morphisms of the operator tower: a matrix between object expressions
//! tagged with the least reversible class it is claimed at. Unitaries sit at
//! the bottom; isometries and coisometries are incomparable above them; all
//! of them are contractions. Composition joins levels in this lattice.

use thiserror::Error;

use crate::linalg::{classify_operator, complete_isometry, ComplexMatrix, OperatorClass};
use crate::rig::ObjExpr;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TowerError {
    #[error("matrix shape {mr}x{mc} does not match cod {cod} / dom {dom}")]
    ShapeMismatch { mr: usize, mc: usize, dom: usize, cod: usize },
    #[error("matrix classifies as {actual:?}, which cannot be claimed at level {claimed:?}")]
    LevelViolation { claimed: Level, actual: OperatorClass },
    #[error("split point {split} exceeds domain dimension {dim}")]
    SplitOutOfRange { split: usize, dim: usize },
    #[error("morphism is not an isometry")]
    NotIsometry,
    #[error("boundary objects differ: {0} vs {1}")]
    BoundaryMismatch(String, String),
}

/// Levels of the tower, ordered by reversibility loss. `Isometry` and
/// `Coisometry` are incomparable; their join is `Contraction`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Level {
    Unitary,
    Isometry,
    Coisometry,
    Contraction,
}

impl Level {
    pub fn join(self, other: Level) -> Level {
        use Level::*;
        match (self, other) {
            (Unitary, x) | (x, Unitary) => x,
            (Contraction, _) | (_, Contraction) => Contraction,
            (Isometry, Isometry) => Isometry,
            (Coisometry, Coisometry) => Coisometry,
            (Isometry, Coisometry) | (Coisometry, Isometry) => Contraction,
        }
    }

    /// Whether a matrix of the given class may be claimed at this level.
    pub fn admits(self, class: OperatorClass) -> bool {
        match class {
            OperatorClass::Unitary => true,
            OperatorClass::Isometry => matches!(self, Level::Isometry | Level::Contraction),
            OperatorClass::Coisometry => matches!(self, Level::Coisometry | Level::Contraction),
            OperatorClass::StrictContraction => self == Level::Contraction,
            OperatorClass::NonContraction => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TowerMor {
    pub dom: ObjExpr,
    pub cod: ObjExpr,
    pub mat: ComplexMatrix,
    pub level: Level,
}

impl TowerMor {
    /// Build and validate in one step.
    pub fn new(
        dom: ObjExpr,
        cod: ObjExpr,
        mat: ComplexMatrix,
        level: Level,
    ) -> Result<Self, TowerError> {
        let m = TowerMor { dom, cod, mat, level };
        validate_morphism(&m)?;
        Ok(m)
    }

    pub fn identity(obj: ObjExpr) -> Self {
        let n = obj.dim();
        TowerMor { dom: obj.clone(), cod: obj, mat: ComplexMatrix::identity(n), level: Level::Unitary }
    }

    /// Adjoint; exchanges the isometry and coisometry levels.
    pub fn dagger(&self) -> Self {
        let level = match self.level {
            Level::Unitary => Level::Unitary,
            Level::Isometry => Level::Coisometry,
            Level::Coisometry => Level::Isometry,
            Level::Contraction => Level::Contraction,
        };
        TowerMor { dom: self.cod.clone(), cod: self.dom.clone(), mat: self.mat.adjoint(), level }
    }
}

/// Shape and level consistency: the matrix must have `dim(cod)` rows and
/// `dim(dom)` columns, and its classification must be admissible at the
/// claimed level (claims may be looser than the matrix, never tighter).
pub fn validate_morphism(m: &TowerMor) -> Result<(), TowerError> {
    if m.mat.rows() != m.cod.dim() || m.mat.cols() != m.dom.dim() {
        return Err(TowerError::ShapeMismatch {
            mr: m.mat.rows(),
            mc: m.mat.cols(),
            dom: m.dom.dim(),
            cod: m.cod.dim(),
        });
    }
    let actual = classify_operator(&m.mat);
    if !m.level.admits(actual) {
        return Err(TowerError::LevelViolation { claimed: m.level, actual });
    }
    Ok(())
}

/// Diagrammatic composition `f` then `g`, at the join of the two levels.
pub fn compose(f: &TowerMor, g: &TowerMor) -> Result<TowerMor, TowerError> {
    if f.cod != g.dom {
        return Err(TowerError::BoundaryMismatch(f.cod.to_string(), g.dom.to_string()));
    }
    Ok(TowerMor {
        dom: f.dom.clone(),
        cod: g.cod.clone(),
        mat: g.mat.mul(&f.mat),
        level: f.level.join(g.level),
    })
}

/// Restrict a unitary `A (+) E -> B` to its first `split` input columns,
/// yielding an isometry. The restricted domain is the left summand of the
/// unitary's domain when its dimension matches `split`, otherwise a plain
/// space of that dimension.
pub fn unitary_corner_to_isometry(u: &TowerMor, split: usize) -> Result<TowerMor, TowerError> {
    validate_morphism(u)?;
    if classify_operator(&u.mat) != OperatorClass::Unitary {
        return Err(TowerError::LevelViolation {
            claimed: Level::Unitary,
            actual: classify_operator(&u.mat),
        });
    }
    if split > u.mat.cols() {
        return Err(TowerError::SplitOutOfRange { split, dim: u.mat.cols() });
    }
    let mat = u.mat.block(0, 0, u.mat.rows(), split);
    let dom = match &u.dom {
        ObjExpr::Oplus(l, _) if l.dim() == split => (**l).clone(),
        d if d.dim() == split => d.clone(),
        _ => ObjExpr::nat(split),
    };
    Ok(TowerMor { dom, cod: u.cod.clone(), mat, level: Level::Isometry })
}

/// Complete an isometry `A -> B` to a unitary `A (+) E -> B` whose first
/// block of columns is the original matrix; E is the orthogonal complement
/// with dimension `dim B - dim A`.
pub fn isometry_to_unitary(v: &TowerMor) -> Result<TowerMor, TowerError> {
    let class = classify_operator(&v.mat);
    if !matches!(class, OperatorClass::Isometry | OperatorClass::Unitary) {
        return Err(TowerError::NotIsometry);
    }
    let mat = complete_isometry(&v.mat).map_err(|_| TowerError::NotIsometry)?;
    let extra = v.mat.rows() - v.mat.cols();
    let dom = if extra == 0 {
        v.dom.clone()
    } else {
        ObjExpr::oplus(v.dom.clone(), ObjExpr::nat(extra))
    };
    Ok(TowerMor { dom, cod: v.cod.clone(), mat, level: Level::Unitary })
}
