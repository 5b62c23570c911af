//! Completely positive trace-nonincreasing maps in Kraus form, their Choi
//! matrices, Stinespring dilations, and the two witness constructions that
//! make dilation non-uniqueness concrete: the mixing unitary relating two
//! Kraus presentations of one channel, and the mediating isometry relating
//! two Stinespring dilations of one channel.
//!
//! Choi convention: `C = sum_{ij} E_ij (x) Phi(E_ij)`, unnormalized, input
//! factor first, so a trace-preserving channel has `tr C = in_dim`. Channel
//! equality everywhere means sup-norm distance of Choi matrices within
//! [`tol::COMPOSED`].

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::linalg::{
    classify_operator, complete_isometry, hermitian_eig, kron, partial_trace, ComplexMatrix,
    Factor, LinalgError,
};
use crate::rig::ObjExpr;
use crate::tol;
use crate::tower::{Level, TowerMor};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChannelError {
    #[error("a channel needs at least one Kraus operator")]
    EmptyKraus,
    #[error("Kraus operator {index} has shape {r}x{c}, expected {out}x{inp}")]
    KrausShape { index: usize, r: usize, c: usize, out: usize, inp: usize },
    #[error("channel dimensions differ: {0}x{1} vs {2}x{3}")]
    DimensionMismatch(usize, usize, usize, usize),
    #[error("channel is not trace-nonincreasing")]
    InvalidChannel,
    #[error("matrix is not a valid density operator: {0}")]
    NotDensity(String),
    #[error("matrix is not a contraction")]
    NotContraction,
    #[error("the two arguments do not present the same channel")]
    ChannelsDiffer,
    #[error("first dilation ancilla ({0}) exceeds second ({1}); swap the arguments")]
    AncillaOrder(usize, usize),
    #[error("malformed channel JSON: {0}")]
    Json(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

#[derive(serde::Serialize, serde::Deserialize)]
struct RawChannel {
    #[serde(rename = "in")]
    in_dim: usize,
    #[serde(rename = "out")]
    out_dim: usize,
    kraus: Vec<ComplexMatrix>,
}

/// A CP map `B(C^in) -> B(C^out)` given by Kraus operators. Construction
/// checks shapes only; the trace-nonincreasing bound is a separate,
/// queryable predicate ([`validate_channel`]) so that malformed inputs can
/// be examined rather than merely rejected.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausChannel {
    pub in_dim: usize,
    pub out_dim: usize,
    pub kraus: Vec<ComplexMatrix>,
}

impl KrausChannel {
    pub fn new(
        in_dim: usize,
        out_dim: usize,
        kraus: Vec<ComplexMatrix>,
    ) -> Result<Self, ChannelError> {
        if kraus.is_empty() {
            return Err(ChannelError::EmptyKraus);
        }
        for (index, m) in kraus.iter().enumerate() {
            if m.rows() != out_dim || m.cols() != in_dim {
                return Err(ChannelError::KrausShape {
                    index,
                    r: m.rows(),
                    c: m.cols(),
                    out: out_dim,
                    inp: in_dim,
                });
            }
        }
        Ok(KrausChannel { in_dim, out_dim, kraus })
    }

    pub fn identity(n: usize) -> Self {
        KrausChannel { in_dim: n, out_dim: n, kraus: vec![ComplexMatrix::identity(n)] }
    }

    /// `sum_i M_i* M_i`, the trace form of the channel.
    pub fn gram(&self) -> ComplexMatrix {
        let mut s = ComplexMatrix::zeros(self.in_dim, self.in_dim);
        for m in &self.kraus {
            s = s.add(&m.adjoint().mul(m));
        }
        s
    }

    /// Apply to an arbitrary matrix: `sum_i M_i X M_i*`.
    pub fn apply_matrix(&self, x: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(x.rows(), self.in_dim, "apply_matrix input dim");
        assert_eq!(x.cols(), self.in_dim, "apply_matrix input dim");
        let mut out = ComplexMatrix::zeros(self.out_dim, self.out_dim);
        for m in &self.kraus {
            out = out.add(&m.mul(x).mul(&m.adjoint()));
        }
        out
    }

    /// Parse the channel wire format `{"in": n, "out": m, "kraus": [...]}`,
    /// re-running all shape checks.
    pub fn from_json_str(s: &str) -> Result<Self, ChannelError> {
        let raw: RawChannel =
            serde_json::from_str(s).map_err(|e| ChannelError::Json(e.to_string()))?;
        KrausChannel::new(raw.in_dim, raw.out_dim, raw.kraus)
    }

    pub fn to_json_string(&self) -> String {
        let raw = RawChannel {
            in_dim: self.in_dim,
            out_dim: self.out_dim,
            kraus: self.kraus.clone(),
        };
        serde_json::to_string(&raw).expect("channel serializes")
    }

    /// a-then-b composition when `self : A -> B` and `after : B -> C`.
    pub fn then(&self, after: &KrausChannel) -> Result<KrausChannel, ChannelError> {
        if self.out_dim != after.in_dim {
            return Err(ChannelError::DimensionMismatch(
                self.in_dim,
                self.out_dim,
                after.in_dim,
                after.out_dim,
            ));
        }
        let mut kraus = Vec::with_capacity(self.kraus.len() * after.kraus.len());
        for n in &after.kraus {
            for m in &self.kraus {
                kraus.push(n.mul(m));
            }
        }
        KrausChannel::new(self.in_dim, after.out_dim, kraus)
    }
}

/// Trace-nonincreasing: largest eigenvalue of `sum M* M` at most
/// `1 + STRUCT`.
pub fn validate_channel(k: &KrausChannel) -> bool {
    let gram = k.gram();
    if gram.rows() == 0 {
        return true;
    }
    let (eigs, _) = hermitian_eig(&gram).expect("gram matrix is Hermitian");
    eigs.last().copied().unwrap_or(0.0) <= 1.0 + tol::STRUCT
}

/// Trace-preserving: `sum M* M = I` within [`tol::STRUCT`].
pub fn is_trace_preserving(k: &KrausChannel) -> bool {
    k.gram().is_identity(tol::STRUCT)
}

/// Block-diagonal direct sum of channels: measures which summand the state
/// occupies, then acts blockwise. Cross blocks are annihilated; this is the
/// remnant of the additive structure that survives at the channel level.
pub fn oplus_channels(a: &KrausChannel, b: &KrausChannel) -> KrausChannel {
    let mut kraus = Vec::with_capacity(a.kraus.len() + b.kraus.len());
    for m in &a.kraus {
        kraus.push(crate::linalg::direct_sum(m, &ComplexMatrix::zeros(b.out_dim, b.in_dim)));
    }
    for n in &b.kraus {
        kraus.push(crate::linalg::direct_sum(&ComplexMatrix::zeros(a.out_dim, a.in_dim), n));
    }
    KrausChannel {
        in_dim: a.in_dim + b.in_dim,
        out_dim: a.out_dim + b.out_dim,
        kraus,
    }
}

/// Tensor product of channels: all pairwise Kronecker products of the Kraus
/// operators.
pub fn otimes_channels(a: &KrausChannel, b: &KrausChannel) -> KrausChannel {
    let mut kraus = Vec::with_capacity(a.kraus.len() * b.kraus.len());
    for m in &a.kraus {
        for n in &b.kraus {
            kraus.push(kron(m, n));
        }
    }
    KrausChannel {
        in_dim: a.in_dim * b.in_dim,
        out_dim: a.out_dim * b.out_dim,
        kraus,
    }
}

/// A subnormalized state: Hermitian, positive semidefinite, trace at most 1,
/// all within the structural tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    mat: ComplexMatrix,
}

impl DensityMatrix {
    pub fn new(mat: ComplexMatrix) -> Result<Self, ChannelError> {
        if !mat.is_square() {
            return Err(ChannelError::NotDensity("not square".into()));
        }
        if !mat.is_hermitian(tol::STRUCT) {
            return Err(ChannelError::NotDensity("not Hermitian".into()));
        }
        if mat.rows() > 0 {
            let (eigs, _) = hermitian_eig(&mat)?;
            if eigs[0] < -tol::STRUCT {
                return Err(ChannelError::NotDensity(format!(
                    "negative eigenvalue {:.3e}",
                    eigs[0]
                )));
            }
            let tr = mat.trace().re;
            if tr > 1.0 + tol::STRUCT {
                return Err(ChannelError::NotDensity(format!("trace {tr} exceeds 1")));
            }
        }
        Ok(DensityMatrix { mat })
    }

    pub fn dim(&self) -> usize {
        self.mat.rows()
    }

    pub fn mat(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn pure(dim: usize, index: usize) -> Self {
        let mut m = ComplexMatrix::zeros(dim, dim);
        m.set(index, index, Complex64::new(1.0, 0.0));
        DensityMatrix { mat: m }
    }
}

/// Apply a (validated) channel to a state. The output never gains trace
/// beyond [`tol::TRACE`].
pub fn apply_channel(k: &KrausChannel, rho: &DensityMatrix) -> Result<DensityMatrix, ChannelError> {
    if !validate_channel(k) {
        return Err(ChannelError::InvalidChannel);
    }
    if rho.dim() != k.in_dim {
        return Err(ChannelError::DimensionMismatch(k.in_dim, k.out_dim, rho.dim(), rho.dim()));
    }
    let out = k.apply_matrix(rho.mat());
    debug_assert!(out.trace().re <= rho.mat().trace().re + tol::TRACE);
    DensityMatrix::new(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChoiMatrix {
    pub in_dim: usize,
    pub out_dim: usize,
    pub mat: ComplexMatrix,
}

/// `C = sum_{ij} E_ij (x) Phi(E_ij)`; entrywise,
/// `C[(i,a),(j,b)] = sum_m M_m[a,i] conj(M_m[b,j])`.
pub fn choi(k: &KrausChannel) -> ChoiMatrix {
    let n = k.in_dim * k.out_dim;
    let mut c = ComplexMatrix::zeros(n, n);
    for m in &k.kraus {
        for i in 0..k.in_dim {
            for a in 0..k.out_dim {
                let mai = m.at(a, i);
                if mai.norm_sqr() == 0.0 {
                    continue;
                }
                for j in 0..k.in_dim {
                    for b in 0..k.out_dim {
                        let x = i * k.out_dim + a;
                        let y = j * k.out_dim + b;
                        let v = c.at(x, y) + mai * m.at(b, j).conj();
                        c.set(x, y, v);
                    }
                }
            }
        }
    }
    ChoiMatrix { in_dim: k.in_dim, out_dim: k.out_dim, mat: c }
}

/// Canonical Kraus operators of a Choi matrix by eigendecomposition,
/// dropping eigenvalues below [`tol::EIG_DROP`]. The all-zero Choi matrix
/// yields the single zero Kraus operator.
pub fn kraus_from_choi(c: &ChoiMatrix) -> Result<KrausChannel, ChannelError> {
    let (eigs, v) = hermitian_eig(&c.mat)?;
    if let Some(&min) = eigs.first() {
        if min < -tol::STRUCT {
            return Err(ChannelError::Linalg(LinalgError::NotPsd(min)));
        }
    }
    let mut kraus = Vec::new();
    for (m, &lam) in eigs.iter().enumerate() {
        if lam < tol::EIG_DROP {
            continue;
        }
        let s = lam.sqrt();
        let mut op = ComplexMatrix::zeros(c.out_dim, c.in_dim);
        for i in 0..c.in_dim {
            for a in 0..c.out_dim {
                op.set(a, i, v.at(i * c.out_dim + a, m) * s);
            }
        }
        kraus.push(op);
    }
    if kraus.is_empty() {
        kraus.push(ComplexMatrix::zeros(c.out_dim, c.in_dim));
    }
    KrausChannel::new(c.in_dim, c.out_dim, kraus)
}

/// Sup-norm distance of Choi matrices; the channel metric used everywhere.
pub fn choi_distance(a: &KrausChannel, b: &KrausChannel) -> Result<f64, ChannelError> {
    if a.in_dim != b.in_dim || a.out_dim != b.out_dim {
        return Err(ChannelError::DimensionMismatch(a.in_dim, a.out_dim, b.in_dim, b.out_dim));
    }
    Ok(choi(a).mat.sup_distance(&choi(b).mat))
}

pub fn channel_equal(a: &KrausChannel, b: &KrausChannel) -> Result<bool, ChannelError> {
    Ok(choi_distance(a, b)? <= tol::COMPOSED)
}

/// A contraction `A -> B (x) G` presenting a channel by `rho` conjugation
/// and an ancilla trace-out.
#[derive(Debug, Clone, PartialEq)]
pub struct StinespringRep {
    pub t: TowerMor,
    pub anc: ObjExpr,
}

impl StinespringRep {
    pub fn anc_dim(&self) -> usize {
        self.anc.dim()
    }

    pub fn out_dim(&self) -> usize {
        if self.anc.dim() == 0 {
            0
        } else {
            self.t.mat.rows() / self.anc.dim()
        }
    }

    /// The channel presented: `rho -> tr_G(T rho T*)`.
    pub fn apply_matrix(&self, x: &ComplexMatrix) -> Result<ComplexMatrix, ChannelError> {
        let big = self.t.mat.mul(x).mul(&self.t.mat.adjoint());
        Ok(partial_trace(&big, self.out_dim(), self.anc_dim(), Factor::Second)?)
    }
}

/// Stinespring dilation of a Kraus presentation: the contraction
/// `T : A -> B (x) C^k` with `T[(b,i), a] = M_i[b, a]`, so that
/// `tr_G(T rho T*) = sum_i M_i rho M_i*` and `E_i = (1 (x) <i|) T`
/// recovers the list.
pub fn stinespring(k: &KrausChannel) -> Result<StinespringRep, ChannelError> {
    if !validate_channel(k) {
        return Err(ChannelError::InvalidChannel);
    }
    let g = k.kraus.len();
    let mut t = ComplexMatrix::zeros(k.out_dim * g, k.in_dim);
    for (i, m) in k.kraus.iter().enumerate() {
        for b in 0..k.out_dim {
            for a in 0..k.in_dim {
                t.set(b * g + i, a, m.at(b, a));
            }
        }
    }
    let anc = ObjExpr::nat(g);
    let mor = TowerMor {
        dom: ObjExpr::nat(k.in_dim),
        cod: ObjExpr::otimes(ObjExpr::nat(k.out_dim), anc.clone()),
        mat: t,
        level: Level::Contraction,
    };
    Ok(StinespringRep { t: mor, anc })
}

/// Read a Kraus list back off a Stinespring contraction:
/// `E_i = (1_B (x) <i|) T`.
pub fn channel_from_stinespring(rep: &StinespringRep) -> Result<KrausChannel, ChannelError> {
    if !classify_operator(&rep.t.mat).is_contraction() {
        return Err(ChannelError::NotContraction);
    }
    let g = rep.anc_dim();
    if g == 0 {
        return Err(ChannelError::EmptyKraus);
    }
    if rep.t.mat.rows() % g != 0 {
        return Err(ChannelError::DimensionMismatch(
            rep.t.mat.cols(),
            rep.t.mat.rows(),
            g,
            g,
        ));
    }
    let out = rep.t.mat.rows() / g;
    let inp = rep.t.mat.cols();
    let mut kraus = Vec::with_capacity(g);
    for i in 0..g {
        let mut e = ComplexMatrix::zeros(out, inp);
        for b in 0..out {
            for a in 0..inp {
                e.set(b, a, rep.t.mat.at(b * g + i, a));
            }
        }
        kraus.push(e);
    }
    KrausChannel::new(inp, out, kraus)
}

/// Row-vectorized Kraus list: row m holds `M_m[a,i]` at position
/// `i*out + a`, matching the Choi index convention.
fn kraus_row_matrix(k: &KrausChannel, rows: usize) -> ComplexMatrix {
    let n = k.in_dim * k.out_dim;
    let mut km = ComplexMatrix::zeros(rows, n);
    for (m, op) in k.kraus.iter().enumerate() {
        for i in 0..k.in_dim {
            for a in 0..k.out_dim {
                km.set(m, i * k.out_dim + a, op.at(a, i));
            }
        }
    }
    km
}

/// Two Gram-Schmidt passes over the columns; columns must be independent.
fn orthonormalize_columns(m: &ComplexMatrix) -> ComplexMatrix {
    let mut cols: Vec<Vec<Complex64>> = (0..m.cols()).map(|j| m.column(j)).collect();
    for j in 0..cols.len() {
        for _ in 0..2 {
            for i in 0..j {
                let overlap: Complex64 = cols[i]
                    .iter()
                    .zip(&cols[j])
                    .map(|(a, b)| a.conj() * b)
                    .sum();
                let prev = cols[i].clone();
                for (x, p) in cols[j].iter_mut().zip(&prev) {
                    *x -= overlap * p;
                }
            }
        }
        let norm = cols[j].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        assert!(norm > 0.0, "dependent columns in orthonormalize");
        for x in cols[j].iter_mut() {
            *x /= Complex64::new(norm, 0.0);
        }
    }
    let mut out = ComplexMatrix::zeros(m.rows(), m.cols());
    for (j, col) in cols.iter().enumerate() {
        for (i, &x) in col.iter().enumerate() {
            out.set(i, j, x);
        }
    }
    out
}

/// The unitary relating two Kraus presentations of one channel:
/// `E_i = sum_j U[i,j] F_j` after zero-padding the shorter list. The
/// construction is deterministic and returns the identity on equal lists;
/// its contract is the defining identity, which callers should verify.
///
/// Method: both row matrices share the column Gram matrix (it is the
/// conjugated Choi matrix), so pairing their left singular frames through a
/// common eigenbasis of that Gram matrix yields the change of basis; the
/// frames are completed to unitaries by deterministic Gram-Schmidt.
pub fn kraus_mixing_unitary(
    e: &KrausChannel,
    f: &KrausChannel,
) -> Result<ComplexMatrix, ChannelError> {
    if !channel_equal(e, f)? {
        return Err(ChannelError::ChannelsDiffer);
    }
    let k = e.kraus.len().max(f.kraus.len());
    let ke = kraus_row_matrix(e, k);
    let kf = kraus_row_matrix(f, k);

    let gram = {
        let g = ke.adjoint().mul(&ke).add(&kf.adjoint().mul(&kf)).scale_re(0.5);
        g.add(&g.adjoint()).scale_re(0.5)
    };
    let (eigs, w) = hermitian_eig(&gram)?;

    let mut p_cols: Vec<usize> = Vec::new();
    for (m, &lam) in eigs.iter().enumerate() {
        if lam >= tol::EIG_DROP {
            p_cols.push(m);
        }
    }
    let r = p_cols.len();
    let mut p = ComplexMatrix::zeros(k, r);
    let mut q = ComplexMatrix::zeros(k, r);
    for (col, &m) in p_cols.iter().enumerate() {
        let s = 1.0 / eigs[m].sqrt();
        for row in 0..k {
            let mut pe = Complex64::new(0.0, 0.0);
            let mut qe = Complex64::new(0.0, 0.0);
            for x in 0..gram.rows() {
                pe += ke.at(row, x) * w.at(x, m);
                qe += kf.at(row, x) * w.at(x, m);
            }
            p.set(row, col, pe * s);
            q.set(row, col, qe * s);
        }
    }
    let (p_hat, q_hat) = if r == 0 {
        (ComplexMatrix::identity(k), ComplexMatrix::identity(k))
    } else {
        let p_on = orthonormalize_columns(&p);
        let q_on = orthonormalize_columns(&q);
        (
            complete_isometry(&p_on)?,
            complete_isometry(&q_on)?,
        )
    };
    Ok(p_hat.mul(&q_hat.adjoint()))
}

/// The isometry `W : G -> G'` with `(1 (x) W) T_E = T_F` for two Stinespring
/// dilations of one channel with `dim G <= dim G'`. Built as `U* V` where
/// `U` is the mixing unitary of the zero-padded Kraus lists and `V` the
/// coordinate injection; same contract discipline as
/// [`kraus_mixing_unitary`].
pub fn mediating_isometry(
    se: &StinespringRep,
    sf: &StinespringRep,
) -> Result<ComplexMatrix, ChannelError> {
    let g = se.anc_dim();
    let gp = sf.anc_dim();
    if g > gp {
        return Err(ChannelError::AncillaOrder(g, gp));
    }
    let ce = channel_from_stinespring(se)?;
    let cf = channel_from_stinespring(sf)?;
    if !channel_equal(&ce, &cf)? {
        return Err(ChannelError::ChannelsDiffer);
    }
    let u = kraus_mixing_unitary(&ce, &cf)?;
    // W = U* restricted to the first g columns.
    Ok(u.adjoint().block(0, 0, gp, g))
}

/// Seeded random CPTN channel with the given Kraus rank: complex Gaussian
/// operators rescaled by `1/sqrt(s (1 + u))` where `s` is the largest
/// eigenvalue of the trace form and `u` is uniform on `[0, 1)`. The result
/// is strictly trace-nonincreasing; same seed, same channel, on every
/// platform.
pub fn random_cptn(in_dim: usize, out_dim: usize, kraus_rank: usize, seed: u64) -> KrausChannel {
    assert!(in_dim >= 1 && out_dim >= 1 && kraus_rank >= 1, "random_cptn dims");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut kraus = Vec::with_capacity(kraus_rank);
    for _ in 0..kraus_rank {
        let mut m = ComplexMatrix::zeros(out_dim, in_dim);
        for i in 0..out_dim {
            for j in 0..in_dim {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                m.set(i, j, Complex64::new(re, im));
            }
        }
        kraus.push(m);
    }
    let raw = KrausChannel { in_dim, out_dim, kraus };
    let (eigs, _) = hermitian_eig(&raw.gram()).expect("gram is Hermitian");
    let s = eigs.last().copied().unwrap_or(0.0).max(f64::MIN_POSITIVE);
    let u: f64 = rng.gen();
    let scale = 1.0 / (s * (1.0 + u)).sqrt();
    KrausChannel {
        in_dim,
        out_dim,
        kraus: raw.kraus.iter().map(|m| m.scale_re(scale)).collect(),
    }
}
