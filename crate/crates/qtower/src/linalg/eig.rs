//! Hermitian eigendecomposition by cyclic Jacobi rotations, generalized to
//! complex entries, and the positive-semidefinite square root built on it.
//!
//! Each sweep visits every off-diagonal pivot (p, q) in row order. The pivot
//! is annihilated by conjugating with a phase-absorbing plane rotation
//! `J = D(phi) R(theta)`: the diagonal phase `D` makes the 2x2 pivot block
//! real symmetric, and `R` is the classical Jacobi rotation chosen by the
//! smaller-angle rule. Convergence is quadratic; at the dimensions this
//! crate targets (< 100) a handful of sweeps suffice.

use num_complex::Complex64;

use super::{ComplexMatrix, LinalgError};
use crate::tol;

/// Sum of squared magnitudes strictly above the diagonal.
fn offdiag_sq(a: &ComplexMatrix) -> f64 {
    let n = a.rows();
    let mut s = 0.0;
    for p in 0..n {
        for q in (p + 1)..n {
            s += a.at(p, q).norm_sqr();
        }
    }
    s
}

/// Eigendecomposition of a Hermitian matrix.
///
/// Returns eigenvalues in ascending order and a unitary whose columns are
/// the matching eigenvectors, so `h = V diag(eigs) V*`. The input must be
/// Hermitian within [`tol::STRUCT`]; the computation runs on the averaged
/// matrix `(h + h*)/2` so roundoff asymmetry cannot leak into the result.
pub fn hermitian_eig(h: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix), LinalgError> {
    if !h.is_square() {
        return Err(LinalgError::NotHermitian(f64::INFINITY));
    }
    let asym = h.sup_distance(&h.adjoint());
    if asym > tol::STRUCT {
        return Err(LinalgError::NotHermitian(asym));
    }
    let n = h.rows();
    if n == 0 {
        return Ok((Vec::new(), ComplexMatrix::zeros(0, 0)));
    }

    let mut a = h.add(&h.adjoint()).scale_re(0.5);
    let mut v = ComplexMatrix::identity(n);

    let mut converged = false;
    for _ in 0..tol::EIG_MAX_SWEEPS {
        if offdiag_sq(&a).sqrt() <= tol::EIG_OFFDIAG {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
    }
    if !converged && offdiag_sq(&a).sqrt() > tol::EIG_OFFDIAG {
        return Err(LinalgError::NoConvergence(tol::EIG_MAX_SWEEPS));
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a.at(i, i).re.partial_cmp(&a.at(j, j).re).unwrap());
    let eigs: Vec<f64> = order.iter().map(|&i| a.at(i, i).re).collect();
    let mut vecs = ComplexMatrix::zeros(n, n);
    for (tgt, &src) in order.iter().enumerate() {
        for i in 0..n {
            vecs.set(i, tgt, v.at(i, src));
        }
    }
    Ok((eigs, vecs))
}

/// One Jacobi rotation annihilating the (p, q) entry: `a <- J* a J`,
/// `v <- v J`, where J is the identity outside the (p, q) plane and
///
/// ```text
///   J[p,p] = c          J[p,q] = s
///   J[q,p] = -s e^{-i phi}   J[q,q] = c e^{-i phi}
/// ```
///
/// with `e^{i phi} = a[p,q] / |a[p,q]|`.
fn rotate(a: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let apq = a.at(p, q);
    let r = apq.norm();
    if r == 0.0 {
        return;
    }
    let phase = apq / r;
    let app = a.at(p, p).re;
    let aqq = a.at(q, q).re;
    let tau = (aqq - app) / (2.0 * r);
    // Smaller-angle root of t^2 + 2 tau t - 1 = 0.
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;

    let n = a.rows();
    let cc = Complex64::new(c, 0.0);
    let ss = Complex64::new(s, 0.0);
    let ph = phase; // e^{i phi}
    let phb = phase.conj(); // e^{-i phi}

    // Column update a <- a J.
    for k in 0..n {
        let akp = a.at(k, p);
        let akq = a.at(k, q);
        a.set(k, p, akp * cc - akq * ss * phb);
        a.set(k, q, akp * ss + akq * cc * phb);
    }
    // Row update a <- J* a.
    for k in 0..n {
        let apk = a.at(p, k);
        let aqk = a.at(q, k);
        a.set(p, k, apk * cc - aqk * ss * ph);
        a.set(q, k, apk * ss + aqk * cc * ph);
    }
    // Clean the pivot pair and keep the diagonal exactly real.
    a.set(p, q, Complex64::new(0.0, 0.0));
    a.set(q, p, Complex64::new(0.0, 0.0));
    a.set(p, p, Complex64::new(a.at(p, p).re, 0.0));
    a.set(q, q, Complex64::new(a.at(q, q).re, 0.0));

    for k in 0..v.rows() {
        let vkp = v.at(k, p);
        let vkq = v.at(k, q);
        v.set(k, p, vkp * cc - vkq * ss * phb);
        v.set(k, q, vkp * ss + vkq * cc * phb);
    }
}

/// Positive square root of a positive-semidefinite Hermitian matrix.
///
/// Eigenvalues in `[-STRUCT, 0)` are clamped to zero; anything more negative
/// is a genuine positivity failure and reported as [`LinalgError::NotPsd`].
/// The result is Hermitian and PSD with `s.mul(&s)` within
/// [`tol::COMPOSED`] of the input.
pub fn psd_sqrt(h: &ComplexMatrix) -> Result<ComplexMatrix, LinalgError> {
    let (eigs, v) = hermitian_eig(h)?;
    if let Some(&min) = eigs.first() {
        if min < tol::PSD_CLAMP {
            return Err(LinalgError::NotPsd(min));
        }
    }
    let n = h.rows();
    let mut mid = ComplexMatrix::zeros(n, n);
    for (i, &e) in eigs.iter().enumerate() {
        let clamped = if e < 0.0 { 0.0 } else { e };
        mid.set(i, i, Complex64::new(clamped.sqrt(), 0.0));
    }
    let s = v.mul(&mid).mul(&v.adjoint());
    // Symmetrize away the last ulps of roundoff.
    Ok(s.add(&s.adjoint()).scale_re(0.5))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{classify_operator, kron, OperatorClass};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_hermitian(n: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                m.set(i, j, c(re, im));
            }
        }
        m.add(&m.adjoint()).scale_re(0.5)
    }

    fn reconstruct(eigs: &[f64], v: &ComplexMatrix) -> ComplexMatrix {
        let n = eigs.len();
        let mut d = ComplexMatrix::zeros(n, n);
        for (i, &e) in eigs.iter().enumerate() {
            d.set(i, i, c(e, 0.0));
        }
        v.mul(&d).mul(&v.adjoint())
    }

    #[test]
    fn eig_of_two_by_two_symmetric() {
        // [[2,1],[1,2]]: characteristic polynomial (2-x)^2 - 1, roots 1 and 3.
        let h = ComplexMatrix::from_real_rows(&[&[2.0, 1.0], &[1.0, 2.0]]);
        let (eigs, v) = hermitian_eig(&h).unwrap();
        assert!((eigs[0] - 1.0).abs() <= 1e-12);
        assert!((eigs[1] - 3.0).abs() <= 1e-12);
        assert!(reconstruct(&eigs, &v).sup_distance(&h) <= 1e-9);
        assert!(v.adjoint().mul(&v).is_identity(1e-12));
    }

    #[test]
    fn eig_of_complex_hermitian() {
        // Pauli Y: eigenvalues -1, 1.
        let y = ComplexMatrix::new(2, 2, vec![c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)])
            .unwrap();
        let (eigs, v) = hermitian_eig(&y).unwrap();
        assert!((eigs[0] + 1.0).abs() <= 1e-12);
        assert!((eigs[1] - 1.0).abs() <= 1e-12);
        assert!(reconstruct(&eigs, &v).sup_distance(&y) <= 1e-9);
    }

    #[test]
    fn eig_rejects_non_hermitian() {
        let m = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]);
        assert!(matches!(hermitian_eig(&m), Err(LinalgError::NotHermitian(_))));
    }

    #[test]
    fn eig_handles_degenerate_spectrum() {

        let h = kron(
            &ComplexMatrix::identity(2),
            &ComplexMatrix::from_real_rows(&[&[2.0, 1.0], &[1.0, 2.0]]),
        );
        let (eigs, v) = hermitian_eig(&h).unwrap();
        assert!((eigs[0] - 1.0).abs() <= 1e-12 && (eigs[1] - 1.0).abs() <= 1e-12);
        assert!((eigs[2] - 3.0).abs() <= 1e-12 && (eigs[3] - 3.0).abs() <= 1e-12);
        assert!(reconstruct(&eigs, &v).sup_distance(&h) <= 1e-9);
        assert!(v.adjoint().mul(&v).is_identity(1e-10));
    }

    #[test]
    fn eig_random_matrices_reconstruct() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in [1usize, 2, 3, 5, 8, 13] {
            for _ in 0..20 {
                let h = random_hermitian(n, &mut rng);
                let (eigs, v) = hermitian_eig(&h).unwrap();
                assert!(eigs.windows(2).all(|w| w[0] <= w[1]), "ascending order");
                assert!(reconstruct(&eigs, &v).sup_distance(&h) <= 1e-9);
                assert!(v.adjoint().mul(&v).is_identity(1e-10));
            }
        }
    }

    #[test]
    fn eig_empty_matrix() {
        let (eigs, v) = hermitian_eig(&ComplexMatrix::zeros(0, 0)).unwrap();
        assert!(eigs.is_empty());
        assert_eq!((v.rows(), v.cols()), (0, 0));
    }

    #[test]
    fn psd_sqrt_of_diagonal() {
        let h = ComplexMatrix::from_real_rows(&[&[4.0, 0.0], &[0.0, 9.0]]);
        let s = psd_sqrt(&h).unwrap();
        let expect = ComplexMatrix::from_real_rows(&[&[2.0, 0.0], &[0.0, 3.0]]);
        assert!(s.sup_distance(&expect) <= 1e-12);
    }

    #[test]
    fn psd_sqrt_squares_back() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in [1usize, 2, 4, 6] {
            for _ in 0..10 {
                let g = random_hermitian(n, &mut rng);
                let h = g.mul(&g); // PSD by construction
                let s = psd_sqrt(&h).unwrap();
                assert!(s.mul(&s).sup_distance(&h) <= tol::COMPOSED);
                assert!(s.is_hermitian(1e-12));
                let (eigs, _) = hermitian_eig(&s).unwrap();
                assert!(eigs.iter().all(|&e| e >= -1e-12));
            }
        }
    }

    #[test]
    fn psd_sqrt_clamps_tiny_negatives() {
        let h = ComplexMatrix::from_real_rows(&[&[-0.5e-9, 0.0], &[0.0, 1.0]]);
        let s = psd_sqrt(&h).unwrap();
        assert_eq!(s.at(0, 0), c(0.0, 0.0));
        assert!((s.at(1, 1).re - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn psd_sqrt_rejects_negative() {
        let h = ComplexMatrix::from_real_rows(&[&[-1.0, 0.0], &[0.0, 1.0]]);
        assert!(matches!(psd_sqrt(&h), Err(LinalgError::NotPsd(_))));
    }

    #[test]
    fn defect_operators_make_unitary_blocks() {
        // For any contraction T the matrix [[T, s(1-TT*)], [s(1-T*T), -T*]]
        // is unitary; exercised properly in the biaffine module, but the
        // sqrt identities T f(T*T) = f(TT*) T are checked here.
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..10 {
            let mut t = ComplexMatrix::zeros(3, 2);
            for i in 0..3 {
                for j in 0..2 {
                    let re: f64 = rng.sample(StandardNormal);
                    let im: f64 = rng.sample(StandardNormal);
                    t.set(i, j, c(re * 0.3, im * 0.3));
                }
            }
            if classify_operator(&t) == OperatorClass::NonContraction {
                continue;
            }
            let dt = psd_sqrt(
                &ComplexMatrix::identity(2).sub(&t.adjoint().mul(&t)),
            )
            .unwrap();
            let dts = psd_sqrt(
                &ComplexMatrix::identity(3).sub(&t.mul(&t.adjoint())),
            )
            .unwrap();
            assert!(t.mul(&dt).sup_distance(&dts.mul(&t)) <= tol::COMPOSED);
        }
    }
}
