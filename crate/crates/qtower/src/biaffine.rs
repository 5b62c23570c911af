//! Contractions presented as unitaries with hidden direct-sum ancillas.
//!
//! A morphism `A -> B` here is a unitary `A (+) H -> B (+) G` together with
//! the ancilla objects `H` and `G`. Two presentations are identified exactly
//! when their upper-left corner blocks (the `B x A` sub-matrix) agree; the
//! corner is always a contraction, and every contraction arises as a corner
//! via the Halmos dilation, so this category is the category of contractions
//! in disguise.

use thiserror::Error;

use crate::linalg::{
    classify_operator, direct_sum, kron, psd_sqrt, ComplexMatrix, LinalgError,
};
use crate::rig::{ObjExpr, Structural, StructuralName};
use crate::tol;
use crate::tower::{Level, TowerMor};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BiaffineError {
    #[error("matrix is not a contraction, cannot dilate")]
    NotContraction,
    #[error("objects do not match: {0}")]
    ObjectMismatch(String),
    #[error("representative is not unitary (deviation {0:.3e})")]
    NotUnitary(f64),
    #[error("representative shape is inconsistent with the declared objects")]
    ShapeMismatch,
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Rig(#[from] crate::rig::RigError),
}

/// `[H, mat, G] : dom -> cod` with `mat` unitary on `dom (+) H -> cod (+) G`.
#[derive(Debug, Clone, PartialEq)]
pub struct BiaffineMor {
    pub dom: ObjExpr,
    pub cod: ObjExpr,
    pub in_anc: ObjExpr,
    pub out_anc: ObjExpr,
    pub mat: ComplexMatrix,
}

impl BiaffineMor {
    /// Validating constructor. Representatives are accepted when unitary to
    /// [`tol::COMPOSED`]; computed dilations carry a little square-root
    /// roundoff, so the structural tolerance would be too strict here.
    pub fn new(
        dom: ObjExpr,
        cod: ObjExpr,
        in_anc: ObjExpr,
        out_anc: ObjExpr,
        mat: ComplexMatrix,
    ) -> Result<Self, BiaffineError> {
        if mat.cols() != dom.dim() + in_anc.dim() || mat.rows() != cod.dim() + out_anc.dim() {
            return Err(BiaffineError::ShapeMismatch);
        }
        if !mat.is_square() {
            return Err(BiaffineError::ShapeMismatch);
        }
        let dev = mat
            .adjoint()
            .mul(&mat)
            .sup_distance(&ComplexMatrix::identity(mat.cols()));
        if dev > tol::COMPOSED {
            return Err(BiaffineError::NotUnitary(dev));
        }
        Ok(BiaffineMor { dom, cod, in_anc, out_anc, mat })
    }
}

/// A unitary with no hidden ancillas: `[O, u, O]`.
pub fn lift_unitary(u: &TowerMor) -> Result<BiaffineMor, BiaffineError> {
    BiaffineMor::new(
        u.dom.clone(),
        u.cod.clone(),
        ObjExpr::ZeroO,
        ObjExpr::ZeroO,
        u.mat.clone(),
    )
}

/// The zero morphism `a -> b`: ancillas `H = b`, `G = a` and the direct-sum
/// swap as representative, so the corner block is entirely zero.
pub fn zero_mor(a: &ObjExpr, b: &ObjExpr) -> BiaffineMor {
    let mat = Structural::forward(StructuralName::SwapPlus)
        .matrix(&[a.clone(), b.clone()])
        .expect("swap arity");
    BiaffineMor {
        dom: a.clone(),
        cod: b.clone(),
        in_anc: b.clone(),
        out_anc: a.clone(),
        mat,
    }
}

/// The corner block `cod x dom`, claimed at the contraction level. This is
/// the complete invariant of a morphism: everything else is presentation.
pub fn corner(f: &BiaffineMor) -> TowerMor {
    TowerMor {
        dom: f.dom.clone(),
        cod: f.cod.clone(),
        mat: f.mat.block(0, 0, f.cod.dim(), f.dom.dim()),
        level: Level::Contraction,
    }
}

/// Diagrammatic composition. With `f : A -> B` carrying `[H, G]` and
/// `g : B -> C` carrying `[H', G']`, the composite representative is
///
/// ```text
/// A+(H+H') -> (A+H)+H' -> (B+G)+H' -> (B+H')+G -> (C+G')+G -> C+(G'+G)
///    assoc~      f+id      interchange     g+id       assoc
/// ```
///
/// where the interchange re-brackets and swaps `G` past `H'`. All five
/// factors are built from structural isomorphisms and block sums.
pub fn compose_biaffine(f: &BiaffineMor, g: &BiaffineMor) -> Result<BiaffineMor, BiaffineError> {
    if f.cod != g.dom {
        return Err(BiaffineError::ObjectMismatch(format!(
            "cannot compose: cod {} vs dom {}",
            f.cod, g.dom
        )));
    }
    let (a, b) = (&f.dom, &f.cod);
    let (h, gg) = (&f.in_anc, &f.out_anc);
    let (hp, gp) = (&g.in_anc, &g.out_anc);
    let c = &g.cod;

    let assoc_in = Structural::inverse(StructuralName::AssocPlus)
        .matrix(&[a.clone(), h.clone(), hp.clone()])?;
    let f_step = direct_sum(&f.mat, &ComplexMatrix::identity(hp.dim()));
    let interchange = {
        let to_nested = Structural::forward(StructuralName::AssocPlus)
            .matrix(&[b.clone(), gg.clone(), hp.clone()])?;
        let swap = direct_sum(
            &ComplexMatrix::identity(b.dim()),
            &Structural::forward(StructuralName::SwapPlus).matrix(&[gg.clone(), hp.clone()])?,
        );
        let from_nested = Structural::inverse(StructuralName::AssocPlus)
            .matrix(&[b.clone(), hp.clone(), gg.clone()])?;
        from_nested.mul(&swap).mul(&to_nested)
    };
    let g_step = direct_sum(&g.mat, &ComplexMatrix::identity(gg.dim()));
    let assoc_out = Structural::forward(StructuralName::AssocPlus)
        .matrix(&[c.clone(), gp.clone(), gg.clone()])?;

    let mat = assoc_out.mul(&g_step).mul(&interchange).mul(&f_step).mul(&assoc_in);
    Ok(BiaffineMor {
        dom: a.clone(),
        cod: c.clone(),
        in_anc: ObjExpr::oplus(h.clone(), hp.clone()),
        out_anc: ObjExpr::oplus(gp.clone(), gg.clone()),
        mat,
    })
}

/// `[H, u, G]* = [G, u*, H]`.
pub fn dagger_biaffine(f: &BiaffineMor) -> BiaffineMor {
    BiaffineMor {
        dom: f.cod.clone(),
        cod: f.dom.clone(),
        in_anc: f.out_anc.clone(),
        out_anc: f.in_anc.clone(),
        mat: f.mat.adjoint(),
    }
}

/// Halmos dilation of a contraction `T : A -> B`: the unitary
///
/// ```text
///   [ T            sqrt(1 - T T*) ]
///   [ sqrt(1-T*T)      -T*        ]  :  A (+) B  ->  B (+) A
/// ```
///
/// whose corner recovers `T` exactly.
pub fn halmos_dilate(t: &TowerMor) -> Result<BiaffineMor, BiaffineError> {
    if !classify_operator(&t.mat).is_contraction() {
        return Err(BiaffineError::NotContraction);
    }
    let a = t.mat.cols();
    let b = t.mat.rows();
    let defect_in = psd_sqrt(&ComplexMatrix::identity(a).sub(&t.mat.adjoint().mul(&t.mat)))?;
    let defect_out = psd_sqrt(&ComplexMatrix::identity(b).sub(&t.mat.mul(&t.mat.adjoint())))?;
    let top = t.mat.hstack(&defect_out);
    let bottom = defect_in.hstack(&t.mat.adjoint().scale_re(-1.0));
    let mat = top.vstack(&bottom);
    BiaffineMor::new(
        t.dom.clone(),
        t.cod.clone(),
        t.cod.clone(),
        t.dom.clone(),
        mat,
    )
}

/// The one-sided isometric dilation `(T; sqrt(1 - T*T)) : A -> B (+) A`,
/// recoverable from the Halmos unitary as its first block column.
pub fn isometric_dilate(t: &TowerMor) -> Result<TowerMor, BiaffineError> {
    if !classify_operator(&t.mat).is_contraction() {
        return Err(BiaffineError::NotContraction);
    }
    let a = t.mat.cols();
    let defect = psd_sqrt(&ComplexMatrix::identity(a).sub(&t.mat.adjoint().mul(&t.mat)))?;
    Ok(TowerMor {
        dom: t.dom.clone(),
        cod: ObjExpr::oplus(t.cod.clone(), t.dom.clone()),
        mat: t.mat.vstack(&defect),
        level: Level::Isometry,
    })
}

/// Presentation-independent equality: corners within [`tol::COMPOSED`].
pub fn equiv_biaffine(f: &BiaffineMor, g: &BiaffineMor) -> Result<bool, BiaffineError> {
    if f.dom != g.dom || f.cod != g.cod {
        return Err(BiaffineError::ObjectMismatch(format!(
            "{} -> {} vs {} -> {}",
            f.dom, f.cod, g.dom, g.cod
        )));
    }
    Ok(corner(f).mat.sup_distance(&corner(g).mat) <= tol::COMPOSED)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MonoidalOp {
    Oplus,
    Otimes,
}

/// Monoidal products of presentations. For `(+)` the representative is the
/// middle-four interchange conjugate of `f.mat (+) g.mat`; for `(x)` the
/// tensor `f.mat (x) g.mat` is conjugated by distributor composites so the
/// main blocks land first and all cross terms are absorbed into the
/// ancillas. Either way `corner(result) = corner(f) op corner(g)`.
pub fn monoidal_biaffine(
    op: MonoidalOp,
    f: &BiaffineMor,
    g: &BiaffineMor,
) -> Result<BiaffineMor, BiaffineError> {
    match op {
        MonoidalOp::Oplus => {
            let interleave_in = {
                let swap = Structural::forward(StructuralName::SwapPlus)
                    .matrix(&[g.dom.clone(), f.in_anc.clone()])?;
                direct_sum(
                    &ComplexMatrix::identity(f.dom.dim()),
                    &direct_sum(&swap, &ComplexMatrix::identity(g.in_anc.dim())),
                )
            };
            let interleave_out = {
                let swap = Structural::forward(StructuralName::SwapPlus)
                    .matrix(&[f.out_anc.clone(), g.cod.clone()])?;
                direct_sum(
                    &ComplexMatrix::identity(f.cod.dim()),
                    &direct_sum(&swap, &ComplexMatrix::identity(g.out_anc.dim())),
                )
            };
            let mat = interleave_out
                .mul(&direct_sum(&f.mat, &g.mat))
                .mul(&interleave_in);
            Ok(BiaffineMor {
                dom: ObjExpr::oplus(f.dom.clone(), g.dom.clone()),
                cod: ObjExpr::oplus(f.cod.clone(), g.cod.clone()),
                in_anc: ObjExpr::oplus(f.in_anc.clone(), g.in_anc.clone()),
                out_anc: ObjExpr::oplus(f.out_anc.clone(), g.out_anc.clone()),
                mat,
            })
        }
        MonoidalOp::Otimes => {
            let split = |x: &ObjExpr, xa: &ObjExpr, y: &ObjExpr, ya: &ObjExpr| -> Result<ComplexMatrix, BiaffineError> {
                // (X+Xa) (x) (Y+Ya)  ->  X(x)Y + X(x)Ya + Xa(x)Y + Xa(x)Ya
                let dist_r = Structural::forward(StructuralName::DistR).matrix(&[
                    x.clone(),
                    xa.clone(),
                    ObjExpr::oplus(y.clone(), ya.clone()),
                ])?;
                let dist_l_main = Structural::forward(StructuralName::DistL)
                    .matrix(&[x.clone(), y.clone(), ya.clone()])?;
                let dist_l_anc = Structural::forward(StructuralName::DistL)
                    .matrix(&[xa.clone(), y.clone(), ya.clone()])?;
                Ok(direct_sum(&dist_l_main, &dist_l_anc).mul(&dist_r))
            };
            let phi_in = split(&f.dom, &f.in_anc, &g.dom, &g.in_anc)?;
            let phi_out = split(&f.cod, &f.out_anc, &g.cod, &g.out_anc)?;
            let mat = phi_out.mul(&kron(&f.mat, &g.mat)).mul(&phi_in.adjoint());
            let in_anc = ObjExpr::oplus(
                ObjExpr::otimes(f.dom.clone(), g.in_anc.clone()),
                ObjExpr::oplus(
                    ObjExpr::otimes(f.in_anc.clone(), g.dom.clone()),
                    ObjExpr::otimes(f.in_anc.clone(), g.in_anc.clone()),
                ),
            );
            let out_anc = ObjExpr::oplus(
                ObjExpr::otimes(f.cod.clone(), g.out_anc.clone()),
                ObjExpr::oplus(
                    ObjExpr::otimes(f.out_anc.clone(), g.cod.clone()),
                    ObjExpr::otimes(f.out_anc.clone(), g.out_anc.clone()),
                ),
            );
            Ok(BiaffineMor {
                dom: ObjExpr::otimes(f.dom.clone(), g.dom.clone()),
                cod: ObjExpr::otimes(f.cod.clone(), g.cod.clone()),
                in_anc,
                out_anc,
                mat,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn d(n: usize) -> ObjExpr {
        ObjExpr::nat(n)
    }

    fn gate_x() -> TowerMor {
        TowerMor::new(
            d(2),
            d(2),
            ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]),
            Level::Unitary,
        )
        .unwrap()
    }

    fn random_contraction(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> TowerMor {
        let mut m = ComplexMatrix::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                m.set(i, j, Complex64::new(re, im));
            }
        }
        let gram = m.adjoint().mul(&m);
        let (eigs, _) = crate::linalg::hermitian_eig(&gram).unwrap();
        let top = eigs.last().copied().unwrap_or(0.0).sqrt().max(1e-3);
        let scale = 1.0 / (top * (1.0 + rng.gen_range(0.05..1.0)));
        TowerMor::new(d(cols), d(rows), m.scale_re(scale), Level::Contraction).unwrap()
    }

    #[test]
    fn halmos_of_scalar_half() {
        let t = TowerMor::new(
            d(1),
            d(1),
            ComplexMatrix::from_real_rows(&[&[0.5]]),
            Level::Contraction,
        )
        .unwrap();
        let b = halmos_dilate(&t).unwrap();
        let r = (3.0_f64).sqrt() / 2.0;
        let expect = ComplexMatrix::from_real_rows(&[&[0.5, r], &[r, -0.5]]);
        assert!(b.mat.sup_distance(&expect) <= 1e-12);
        assert_eq!(b.in_anc, d(1));
        assert_eq!(b.out_anc, d(1));
    }

    #[test]
    fn halmos_of_unitary_has_zero_defects() {
        let b = halmos_dilate(&gate_x()).unwrap();
        assert!(b.mat.block(0, 2, 2, 2).sup_norm() <= 1e-7);
        assert!(b.mat.block(2, 0, 2, 2).sup_norm() <= 1e-7);
        let bottom_right = b.mat.block(2, 2, 2, 2);
        assert!(bottom_right.sup_distance(&gate_x().mat.adjoint().scale_re(-1.0)) <= 1e-7);
    }

    #[test]
    fn halmos_rejects_expansions() {
        let t = TowerMor {
            dom: d(1),
            cod: d(1),
            mat: ComplexMatrix::from_real_rows(&[&[2.0]]),
            level: Level::Contraction,
        };
        assert_eq!(halmos_dilate(&t).unwrap_err(), BiaffineError::NotContraction);
    }

    #[test]
    fn corner_recovers_dilated_contraction_exactly() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let t = random_contraction(3, 2, &mut rng);
            let b = halmos_dilate(&t).unwrap();
            assert_eq!(corner(&b).mat, t.mat);
            assert!(b
                .mat
                .adjoint()
                .mul(&b.mat)
                .is_identity(tol::COMPOSED));
        }
    }

    #[test]
    fn composition_multiplies_corners() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let t1 = random_contraction(3, 2, &mut rng);
            let t2 = random_contraction(2, 3, &mut rng);
            let b1 = halmos_dilate(&t1).unwrap();
            let b2 = halmos_dilate(&t2).unwrap();
            let comp = compose_biaffine(&b1, &b2).unwrap();
            assert_eq!(comp.in_anc, ObjExpr::oplus(b1.in_anc.clone(), b2.in_anc.clone()));
            assert_eq!(comp.out_anc, ObjExpr::oplus(b2.out_anc.clone(), b1.out_anc.clone()));
            let expect = t2.mat.mul(&t1.mat);
            assert!(corner(&comp).mat.sup_distance(&expect) <= 1e-10);
            assert!(comp.mat.adjoint().mul(&comp.mat).is_identity(tol::COMPOSED));
        }
    }

    #[test]
    fn lift_compose_matches_unitary_product() {
        let x = lift_unitary(&gate_x()).unwrap();
        let xx = compose_biaffine(&x, &x).unwrap();
        let id = lift_unitary(&TowerMor::identity(d(2))).unwrap();
        assert!(equiv_biaffine(&xx, &id).unwrap());
    }

    #[test]
    fn scalar_halmos_composition_corner() {
        let t = TowerMor::new(
            d(1),
            d(1),
            ComplexMatrix::from_real_rows(&[&[0.5]]),
            Level::Contraction,
        )
        .unwrap();
        let b = halmos_dilate(&t).unwrap();
        let comp = compose_biaffine(&b, &b).unwrap();
        assert!((corner(&comp).mat.at(0, 0).re - 0.25).abs() <= 1e-12);
    }

    #[test]
    fn zero_mor_has_zero_corner_and_absorbs() {
        let z = zero_mor(&d(2), &d(3));
        assert!(corner(&z).mat.sup_norm() == 0.0);
        assert!(z.mat.adjoint().mul(&z.mat).is_identity(0.0));
        let x = lift_unitary(&gate_x()).unwrap();
        let xz = compose_biaffine(&x, &zero_mor(&d(2), &d(3))).unwrap();
        assert!(equiv_biaffine(&xz, &zero_mor(&d(2), &d(3))).unwrap());
    }

    #[test]
    fn dagger_is_componentwise_involutive_and_antihomomorphic() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10 {
            let t1 = random_contraction(2, 2, &mut rng);
            let t2 = random_contraction(2, 2, &mut rng);
            let f = halmos_dilate(&t1).unwrap();
            let g = halmos_dilate(&t2).unwrap();
            assert_eq!(dagger_biaffine(&dagger_biaffine(&f)), f);
            let lhs = dagger_biaffine(&compose_biaffine(&f, &g).unwrap());
            let rhs = compose_biaffine(&dagger_biaffine(&g), &dagger_biaffine(&f)).unwrap();
            assert!(equiv_biaffine(&lhs, &rhs).unwrap());
        }
    }

    #[test]
    fn corner_of_dagger_is_adjoint_of_corner() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let t = random_contraction(3, 2, &mut rng);
        let f = halmos_dilate(&t).unwrap();
        assert!(corner(&dagger_biaffine(&f))
            .mat
            .sup_distance(&corner(&f).mat.adjoint())
            <= 1e-12);
    }

    #[test]
    fn equiv_requires_matching_objects() {
        let f = zero_mor(&d(2), &d(2));
        let g = zero_mor(&ObjExpr::oplus(d(1), d(1)), &d(2));
        assert!(matches!(
            equiv_biaffine(&f, &g),
            Err(BiaffineError::ObjectMismatch(_))
        ));
    }

    #[test]
    fn all_morphisms_into_zero_object_are_equivalent() {
        let z1 = zero_mor(&d(2), &ObjExpr::ZeroO);
        let x = lift_unitary(&gate_x()).unwrap();
        let z2 = compose_biaffine(&x, &zero_mor(&d(2), &ObjExpr::ZeroO)).unwrap();
        let z3 = dagger_biaffine(&zero_mor(&ObjExpr::ZeroO, &d(2)));
        assert!(equiv_biaffine(&z1, &z2).unwrap());
        assert!(equiv_biaffine(&z1, &z3).unwrap());
        assert!(equiv_biaffine(&z2, &z3).unwrap());
    }

    #[test]
    fn monoidal_oplus_corner_is_direct_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let t1 = random_contraction(2, 3, &mut rng);
        let t2 = random_contraction(2, 2, &mut rng);
        let f = halmos_dilate(&t1).unwrap();
        let g = halmos_dilate(&t2).unwrap();
        let s = monoidal_biaffine(MonoidalOp::Oplus, &f, &g).unwrap();
        assert_eq!(s.dom, ObjExpr::oplus(d(3), d(2)));
        let expect = direct_sum(&t1.mat, &t2.mat);
        assert!(corner(&s).mat.sup_distance(&expect) <= 1e-10);
        assert!(s.mat.adjoint().mul(&s.mat).is_identity(tol::COMPOSED));
    }

    #[test]
    fn monoidal_otimes_corner_is_kron() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let t1 = random_contraction(2, 3, &mut rng);
        let t2 = random_contraction(3, 2, &mut rng);
        let f = halmos_dilate(&t1).unwrap();
        let g = halmos_dilate(&t2).unwrap();
        let s = monoidal_biaffine(MonoidalOp::Otimes, &f, &g).unwrap();
        assert_eq!(s.dom, ObjExpr::otimes(d(3), d(2)));
        assert_eq!(s.in_anc.dim() + s.dom.dim(), s.mat.cols());
        let expect = kron(&t1.mat, &t2.mat);
        assert!(corner(&s).mat.sup_distance(&expect) <= 1e-10);
        assert!(s.mat.adjoint().mul(&s.mat).is_identity(tol::COMPOSED));
    }

    #[test]
    fn monoidal_on_lifted_unitaries_matches_lifted_products() {
        let x = lift_unitary(&gate_x()).unwrap();
        let sum = monoidal_biaffine(MonoidalOp::Oplus, &x, &x).unwrap();
        let direct = lift_unitary(
            &TowerMor::new(
                ObjExpr::oplus(d(2), d(2)),
                ObjExpr::oplus(d(2), d(2)),
                direct_sum(&gate_x().mat, &gate_x().mat),
                Level::Unitary,
            )
            .unwrap(),
        )
        .unwrap();
        assert!(equiv_biaffine(&sum, &direct).unwrap());
        let prod = monoidal_biaffine(MonoidalOp::Otimes, &x, &x).unwrap();
        assert!(corner(&prod)
            .mat
            .sup_distance(&kron(&gate_x().mat, &gate_x().mat))
            <= 1e-12);
    }

    #[test]
    fn isometric_dilation_stacks_defect() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        let t = random_contraction(2, 2, &mut rng);
        let v = isometric_dilate(&t).unwrap();
        assert_eq!(v.cod, ObjExpr::oplus(d(2), d(2)));
        assert!(v.mat.block(0, 0, 2, 2).sup_distance(&t.mat) <= 1e-15);
        assert!(v.mat.adjoint().mul(&v.mat).is_identity(tol::COMPOSED));
        // Matches the first block column of the Halmos unitary.
        let b = halmos_dilate(&t).unwrap();
        assert!(b.mat.block(0, 0, 4, 2).sup_distance(&v.mat) <= 1e-12);
    }
}
