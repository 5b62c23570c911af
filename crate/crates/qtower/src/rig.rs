//! Object expressions over the two monoidal structures and the canonical
//! structural isomorphisms between them, realized as permutation matrices on
//! a skeletal model.
//!
//! Objects are formal expressions built from the tensor unit `I` (dimension
//! 1), the zero object `O` (dimension 0), finite dimensions `Dim(n)`, direct
//! sums and tensor products. Two objects are equal exactly when their
//! expression trees are equal; objects of equal dimension but different
//! shape are related by the structural isomorphisms instead.
//!
//! Index layout follows the crate conventions: `A (+) B` lays out A's
//! indices first, then B's shifted by dim(A); `A (x) B` is row-major with A
//! as the major factor. Under this layout both associators, both unitors for
//! each structure, and the right distributor are identity matrices; the
//! swaps and the left distributor are genuine permutations.

use num_complex::Complex64;
use thiserror::Error;

use crate::linalg::ComplexMatrix;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RigError {
    #[error("{name} takes {expected} object arguments, got {got}")]
    ArityMismatch { name: &'static str, expected: usize, got: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ObjExpr {
    /// Tensor unit, dimension 1.
    UnitI,
    /// Zero object, dimension 0.
    ZeroO,
    /// A plain finite-dimensional space, n >= 1.
    Dim(usize),
    Oplus(Box<ObjExpr>, Box<ObjExpr>),
    Otimes(Box<ObjExpr>, Box<ObjExpr>),
}

impl ObjExpr {
    /// Dimension literal: 0 becomes the zero object, n >= 1 a plain space.
    pub fn nat(n: usize) -> Self {
        if n == 0 {
            ObjExpr::ZeroO
        } else {
            ObjExpr::Dim(n)
        }
    }

    pub fn oplus(a: ObjExpr, b: ObjExpr) -> Self {
        ObjExpr::Oplus(Box::new(a), Box::new(b))
    }

    pub fn otimes(a: ObjExpr, b: ObjExpr) -> Self {
        ObjExpr::Otimes(Box::new(a), Box::new(b))
    }

    pub fn dim(&self) -> usize {
        match self {
            ObjExpr::UnitI => 1,
            ObjExpr::ZeroO => 0,
            ObjExpr::Dim(n) => *n,
            ObjExpr::Oplus(a, b) => a.dim() + b.dim(),
            ObjExpr::Otimes(a, b) => a.dim() * b.dim(),
        }
    }
}

impl std::fmt::Display for ObjExpr {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        // (*) binds tighter than (+); parenthesize sums inside products and
        // right-nested occurrences of the same operator (both are
        // left-associative in the grammar).
        match self {
            ObjExpr::UnitI => write!(f, "I"),
            ObjExpr::ZeroO => write!(f, "O"),
            ObjExpr::Dim(n) => write!(f, "{n}"),
            ObjExpr::Oplus(a, b) => {
                write!(f, "{a}+")?;
                if matches!(**b, ObjExpr::Oplus(_, _)) {
                    write!(f, "({b})")
                } else {
                    write!(f, "{b}")
                }
            }
            ObjExpr::Otimes(a, b) => {
                if matches!(**a, ObjExpr::Oplus(_, _)) {
                    write!(f, "({a})*")?;
                } else {
                    write!(f, "{a}*")?;
                }
                if matches!(**b, ObjExpr::Oplus(_, _) | ObjExpr::Otimes(_, _)) {
                    write!(f, "({b})")
                } else {
                    write!(f, "{b}")
                }
            }
        }
    }
}

/// The twelve structural isomorphism families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StructuralName {
    AssocPlus,
    UnitRPlus,
    UnitLPlus,
    SwapPlus,
    AssocTimes,
    UnitRTimes,
    UnitLTimes,
    SwapTimes,
    DistL,
    DistR,
    AnnL,
    AnnR,
}

impl StructuralName {
    pub const ALL: [StructuralName; 12] = [
        StructuralName::AssocPlus,
        StructuralName::UnitRPlus,
        StructuralName::UnitLPlus,
        StructuralName::SwapPlus,
        StructuralName::AssocTimes,
        StructuralName::UnitRTimes,
        StructuralName::UnitLTimes,
        StructuralName::SwapTimes,
        StructuralName::DistL,
        StructuralName::DistR,
        StructuralName::AnnL,
        StructuralName::AnnR,
    ];

    pub fn arity(self) -> usize {
        use StructuralName::*;
        match self {
            AssocPlus | AssocTimes | DistL | DistR => 3,
            SwapPlus | SwapTimes => 2,
            UnitRPlus | UnitLPlus | UnitRTimes | UnitLTimes | AnnL | AnnR => 1,
        }
    }

    pub fn base_str(self) -> &'static str {
        use StructuralName::*;
        match self {
            AssocPlus => "assocP",
            UnitRPlus => "unitRP",
            UnitLPlus => "unitLP",
            SwapPlus => "swapP",
            AssocTimes => "assocT",
            UnitRTimes => "unitRT",
            UnitLTimes => "unitLT",
            SwapTimes => "swapT",
            DistL => "distL",
            DistR => "distR",
            AnnL => "annL",
            AnnR => "annR",
        }
    }
}

/// A named structural isomorphism with a direction flag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Structural {
    pub name: StructuralName,
    pub inverse: bool,
}

impl Structural {
    pub fn forward(name: StructuralName) -> Self {
        Structural { name, inverse: false }
    }

    pub fn inverse(name: StructuralName) -> Self {
        Structural { name, inverse: true }
    }

    /// Domain and codomain of the instance at the given arguments; the
    /// inverse flag swaps them.
    pub fn signature(&self, args: &[ObjExpr]) -> Result<(ObjExpr, ObjExpr), RigError> {
        let expected = self.name.arity();
        if args.len() != expected {
            return Err(RigError::ArityMismatch {
                name: self.name.base_str(),
                expected,
                got: args.len(),
            });
        }
        use ObjExpr::{UnitI, ZeroO};
        use StructuralName::*;
        let a = || args[0].clone();
        let b = || args.get(1).cloned().unwrap_or(ZeroO);
        let cc = || args.get(2).cloned().unwrap_or(ZeroO);
        let (dom, cod) = match self.name {
            AssocPlus => (
                ObjExpr::oplus(ObjExpr::oplus(a(), b()), cc()),
                ObjExpr::oplus(a(), ObjExpr::oplus(b(), cc())),
            ),
            UnitRPlus => (ObjExpr::oplus(a(), ZeroO), a()),
            UnitLPlus => (ObjExpr::oplus(ZeroO, a()), a()),
            SwapPlus => (ObjExpr::oplus(a(), b()), ObjExpr::oplus(b(), a())),
            AssocTimes => (
                ObjExpr::otimes(ObjExpr::otimes(a(), b()), cc()),
                ObjExpr::otimes(a(), ObjExpr::otimes(b(), cc())),
            ),
            UnitRTimes => (ObjExpr::otimes(a(), UnitI), a()),
            UnitLTimes => (ObjExpr::otimes(UnitI, a()), a()),
            SwapTimes => (ObjExpr::otimes(a(), b()), ObjExpr::otimes(b(), a())),
            DistL => (
                ObjExpr::otimes(a(), ObjExpr::oplus(b(), cc())),
                ObjExpr::oplus(ObjExpr::otimes(a(), b()), ObjExpr::otimes(a(), cc())),
            ),
            DistR => (
                ObjExpr::otimes(ObjExpr::oplus(a(), b()), cc()),
                ObjExpr::oplus(ObjExpr::otimes(a(), cc()), ObjExpr::otimes(b(), cc())),
            ),
            AnnL => (ObjExpr::otimes(ZeroO, a()), ZeroO),
            AnnR => (ObjExpr::otimes(a(), ZeroO), ZeroO),
        };
        if self.inverse {
            Ok((cod, dom))
        } else {
            Ok((dom, cod))
        }
    }

    /// The permutation matrix realizing this instance. Inverses transpose.
    pub fn matrix(&self, args: &[ObjExpr]) -> Result<ComplexMatrix, RigError> {
        let fwd = Structural { name: self.name, inverse: false };
        let (dom, cod) = fwd.signature(args)?;
        let n = dom.dim();
        debug_assert_eq!(n, cod.dim(), "structural isos preserve dimension");
        let one = Complex64::new(1.0, 0.0);
        let mut m = ComplexMatrix::zeros(n, n);
        use StructuralName::*;
        match self.name {
            // Identity permutations under the fixed layout.
            AssocPlus | UnitRPlus | UnitLPlus | AssocTimes | UnitRTimes | UnitLTimes | DistR => {
                m = ComplexMatrix::identity(n);
            }
            SwapPlus => {
                let da = args[0].dim();
                let db = args[1].dim();
                for i in 0..da {
                    m.set(db + i, i, one);
                }
                for j in 0..db {
                    m.set(j, da + j, one);
                }
            }
            SwapTimes => {
                let da = args[0].dim();
                let db = args[1].dim();
                for i in 0..da {
                    for j in 0..db {
                        m.set(j * da + i, i * db + j, one);
                    }
                }
            }
            DistL => {
                let da = args[0].dim();
                let db = args[1].dim();
                let dc = args[2].dim();
                for i in 0..da {
                    for x in 0..(db + dc) {
                        let src = i * (db + dc) + x;
                        let tgt = if x < db { i * db + x } else { da * db + i * dc + (x - db) };
                        m.set(tgt, src, one);
                    }
                }
            }
            // Both annihilator instances are maps between zero-dimensional
            // spaces: the 0x0 matrix, already built.
            AnnL | AnnR => {}
        }
        if self.inverse {
            // Real permutation matrices: inverse is the transpose.
            Ok(m.transpose())
        } else {
            Ok(m)
        }
    }
}

/// Convenience free function mirroring the two methods above.
pub fn structural_iso(s: Structural, args: &[ObjExpr]) -> Result<ComplexMatrix, RigError> {
    s.matrix(args)
}
