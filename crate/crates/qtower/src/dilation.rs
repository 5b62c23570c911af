//! Multiplicative affine completion over contractions: morphisms are
//! dilation pairs `[f, G] : A -> B` with `f : A -> B (x) G` a contraction
//! and `G` a discarded ancilla, composed by stacking ancillas. Two pairs
//! are identified exactly when they induce the same channel; that channel
//! is the complete invariant, and `mediating_isometry` provides the
//! constructive witness when it matches.

use thiserror::Error;

use crate::channels::{
    channel_equal, channel_from_stinespring, stinespring, ChannelError, KrausChannel,
    StinespringRep,
};
use crate::linalg::{classify_operator, kron, tensor_permutation, ComplexMatrix, Factor};
use crate::rig::ObjExpr;
use crate::tower::{Level, TowerMor};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DilationError {
    #[error("object mismatch: {0}")]
    ObjectMismatch(String),
    #[error("matrix is {r}x{c} but boundary objects demand {er}x{ec}")]
    ShapeMismatch { r: usize, c: usize, er: usize, ec: usize },
    #[error("dilation pair must carry a contraction")]
    NotContraction,
    #[error("ancilla must have positive dimension")]
    EmptyAncilla,
    #[error(transparent)]
    Channel(#[from] ChannelError),
}

/// `[f, G] : A -> B` with `f : A -> B (x) G`; the ancilla `G` is implicitly
/// discarded. Equality of morphisms is [`equiv_dilation`].
#[derive(Debug, Clone, PartialEq)]
pub struct DilationMor {
    pub dom: ObjExpr,
    pub cod: ObjExpr,
    pub anc: ObjExpr,
    pub f: TowerMor,
}

impl DilationMor {
    pub fn new(
        dom: ObjExpr,
        cod: ObjExpr,
        anc: ObjExpr,
        mat: ComplexMatrix,
    ) -> Result<Self, DilationError> {
        if anc.dim() == 0 {
            return Err(DilationError::EmptyAncilla);
        }
        let (er, ec) = (cod.dim() * anc.dim(), dom.dim());
        if mat.rows() != er || mat.cols() != ec {
            return Err(DilationError::ShapeMismatch { r: mat.rows(), c: mat.cols(), er, ec });
        }
        if !classify_operator(&mat).is_contraction() {
            return Err(DilationError::NotContraction);
        }
        let f = TowerMor {
            dom: dom.clone(),
            cod: ObjExpr::otimes(cod.clone(), anc.clone()),
            mat,
            level: Level::Contraction,
        };
        Ok(DilationMor { dom, cod, anc, f })
    }

    pub fn identity(a: ObjExpr) -> Self {
        let n = a.dim();
        DilationMor::new(a.clone(), a, ObjExpr::UnitI, ComplexMatrix::identity(n))
            .expect("identity is a contraction")
    }
}

/// Embed a contraction with trivial ancilla: `[t, I]`. Unitaries,
/// isometries and coisometries all pass through here.
pub fn lift_contraction(t: &TowerMor) -> Result<DilationMor, DilationError> {
    if !classify_operator(&t.mat).is_contraction() {
        return Err(DilationError::NotContraction);
    }
    DilationMor::new(t.dom.clone(), t.cod.clone(), ObjExpr::UnitI, t.mat.clone())
}

/// `[g, G'] . [f, G] = [(g (x) 1_G) . f, G' (x) G]`; the associator
/// rebracketing is the identity matrix in this skeleton.
pub fn compose_dilation(f: &DilationMor, g: &DilationMor) -> Result<DilationMor, DilationError> {
    if f.cod.dim() != g.dom.dim() {
        return Err(DilationError::ObjectMismatch(format!(
            "cannot compose: codomain {} vs domain {}",
            f.cod, g.dom
        )));
    }
    let gdim = f.anc.dim();
    let mat = kron(&g.f.mat, &ComplexMatrix::identity(gdim)).mul(&f.f.mat);
    DilationMor::new(
        f.dom.clone(),
        g.cod.clone(),
        ObjExpr::otimes(g.anc.clone(), f.anc.clone()),
        mat,
    )
}

/// The discarding map `[1_A, A] : A -> I`; its channel is the trace.
pub fn discard(a: ObjExpr) -> DilationMor {
    let n = a.dim();
    DilationMor::new(a.clone(), ObjExpr::UnitI, a, ComplexMatrix::identity(n))
        .expect("identity is a contraction")
}

/// Projections out of a product: `[1_{A(x)B}, B] : A(x)B -> A` traces out
/// the second factor, and `[swap, A] : A(x)B -> B` the first.
pub fn projection(which: Factor, a: ObjExpr, b: ObjExpr) -> DilationMor {
    let dom = ObjExpr::otimes(a.clone(), b.clone());
    let n = dom.dim();
    match which {
        Factor::First => DilationMor::new(dom, a, b, ComplexMatrix::identity(n))
            .expect("identity is a contraction"),
        Factor::Second => {
            let swap = tensor_permutation(&[a.dim(), b.dim()], &[1, 0]);
            DilationMor::new(dom, b, a, swap).expect("permutation is a contraction")
        }
    }
}

/// Tensor of dilation pairs: interleave the two codomain/ancilla factors
/// back into (codomains, ancillas) order and take `[perm . (f (x) g),
/// G (x) G']`.
pub fn otimes_dilation(f: &DilationMor, g: &DilationMor) -> DilationMor {
    let perm = tensor_permutation(
        &[f.cod.dim(), f.anc.dim(), g.cod.dim(), g.anc.dim()],
        &[0, 2, 1, 3],
    );
    let mat = perm.mul(&kron(&f.f.mat, &g.f.mat));
    DilationMor::new(
        ObjExpr::otimes(f.dom.clone(), g.dom.clone()),
        ObjExpr::otimes(f.cod.clone(), g.cod.clone()),
        ObjExpr::otimes(f.anc.clone(), g.anc.clone()),
        mat,
    )
    .expect("tensor of contractions is a contraction")
}

/// The induced channel `rho -> tr_G(f rho f*)`, extracted through the
/// Stinespring reading of the pair.
pub fn to_channel(f: &DilationMor) -> Result<KrausChannel, DilationError> {
    let rep = StinespringRep { t: f.f.clone(), anc: f.anc.clone() };
    Ok(channel_from_stinespring(&rep)?)
}

/// Quotient equality: same boundary dimensions and equal induced channels.
pub fn equiv_dilation(f: &DilationMor, g: &DilationMor) -> Result<bool, DilationError> {
    if f.dom.dim() != g.dom.dim() || f.cod.dim() != g.cod.dim() {
        return Err(DilationError::ObjectMismatch(format!(
            "cannot compare {} -> {} with {} -> {}",
            f.dom, f.cod, g.dom, g.cod
        )));
    }
    Ok(channel_equal(&to_channel(f)?, &to_channel(g)?)?)
}

/// Every dilation pair factors as a lifted contraction followed by a first
/// projection: returns `(f', E)` with
/// `f ~ lift_contraction(f') ; projection(First, cod, E)`.
pub fn factorize(f: &DilationMor) -> (TowerMor, ObjExpr) {
    (f.f.clone(), f.anc.clone())
}

/// A channel's Stinespring dilation as a dilation pair; `to_channel` of the
/// result recovers the channel.
pub fn stinespring_as_dilation(k: &KrausChannel) -> Result<DilationMor, DilationError> {
    let rep = stinespring(k)?;
    DilationMor::new(
        ObjExpr::nat(k.in_dim),
        ObjExpr::nat(k.out_dim),
        rep.anc,
        rep.t.mat,
    )
}
