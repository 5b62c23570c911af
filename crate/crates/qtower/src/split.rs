//! Splitting of causal idempotents over channels, restricted to measurement
//! idempotents: objects are pairs (ambient space, block-measurement channel),
//! morphisms are channels absorbed by the endpoint idempotents, and the
//! splitting itself realizes `m . p = id` and `p . m = e` with both legs
//! represented as ambient-space channels plus partition metadata.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channels::{
    channel_equal, choi_distance, is_trace_preserving, ChannelError, KrausChannel,
};
use crate::linalg::ComplexMatrix;
use crate::rig::ObjExpr;
use num_complex::Complex64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SplitError {
    #[error("bad partition: {0}")]
    BadPartition(String),
    #[error("object was not built from a partition; no constructive split is available")]
    NoKnownPartition,
    #[error("channel is not absorbed by the endpoint idempotents")]
    AbsorptionFails,
    #[error("channel is not a causal idempotent: {0}")]
    NotCausalIdempotent(String),
    #[error("object mismatch: {0}")]
    ObjectMismatch(String),
    #[error("malformed partition JSON: {0}")]
    Json(String),
    #[error(transparent)]
    Channel(#[from] ChannelError),
}

/// Consecutive-index block sizes summing to the ambient dimension.
/// Orthogonal decompositions in other bases are reached by conjugating
/// with a permutation or unitary upstream.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    pub blocks: Vec<usize>,
}

impl Partition {
    pub fn new(blocks: Vec<usize>) -> Result<Self, SplitError> {
        if blocks.is_empty() {
            return Err(SplitError::BadPartition("no blocks".into()));
        }
        if blocks.iter().any(|&b| b == 0) {
            return Err(SplitError::BadPartition("zero-sized block".into()));
        }
        Ok(Partition { blocks })
    }

    pub fn total(&self) -> usize {
        self.blocks.iter().sum()
    }

    pub fn from_json_str(s: &str) -> Result<Self, SplitError> {
        let raw: Partition = serde_json::from_str(s).map_err(|e| SplitError::Json(e.to_string()))?;
        Partition::new(raw.blocks)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string(self).expect("partition serializes")
    }

    /// Orthogonal projectors onto the consecutive index blocks.
    pub fn projectors(&self) -> Vec<ComplexMatrix> {
        let n = self.total();
        let mut out = Vec::with_capacity(self.blocks.len());
        let mut offset = 0;
        for &b in &self.blocks {
            let mut p = ComplexMatrix::zeros(n, n);
            for i in offset..offset + b {
                p.set(i, i, Complex64::new(1.0, 0.0));
            }
            out.push(p);
            offset += b;
        }
        out
    }
}

/// A pair (ambient object, causal idempotent on it). When built from a
/// partition the block structure is retained, which is what makes the
/// splitting constructive.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitObject {
    pub ambient: ObjExpr,
    pub idem: KrausChannel,
    pub partition: Option<Partition>,
}

impl SplitObject {
    /// Validates the two object laws: idempotence and causality
    /// (trace preservation).
    pub fn new(ambient: ObjExpr, idem: KrausChannel) -> Result<Self, SplitError> {
        if idem.in_dim != ambient.dim() || idem.out_dim != ambient.dim() {
            return Err(SplitError::ObjectMismatch(format!(
                "idempotent is {}x{} but ambient has dimension {}",
                idem.out_dim,
                idem.in_dim,
                ambient.dim()
            )));
        }
        if let Err(reason) = causal_idempotent_violation(&idem) {
            return Err(SplitError::NotCausalIdempotent(reason));
        }
        Ok(SplitObject { ambient, idem, partition: None })
    }

    /// Dimension of the ambient space.
    pub fn dim(&self) -> usize {
        self.ambient.dim()
    }

    /// The identity morphism of (A, e) is e itself.
    pub fn identity(&self) -> SplitMor {
        SplitMor { src: self.clone(), dst: self.clone(), f: self.idem.clone() }
    }
}

/// A channel absorbed by the endpoint idempotents: `e' . f . e = f`.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitMor {
    pub src: SplitObject,
    pub dst: SplitObject,
    pub f: KrausChannel,
}

fn causal_idempotent_violation(e: &KrausChannel) -> Result<(), String> {
    if e.in_dim != e.out_dim {
        return Err("not an endomorphism".into());
    }
    if !is_trace_preserving(e) {
        return Err("not trace-preserving".into());
    }
    let ee = e.then(e).expect("square channel composes with itself");
    match channel_equal(&ee, e) {
        Ok(true) => Ok(()),
        _ => Err("e . e differs from e".into()),
    }
}

/// Causal idempotent: trace-preserving endo-channel with `e . e = e`.
pub fn is_causal_idempotent(e: &KrausChannel) -> bool {
    causal_idempotent_violation(e).is_ok()
}

/// The block-measurement idempotent of a partition: Kraus operators are
/// the block projectors, so the channel zeroes every off-block entry and
/// keeps the diagonal blocks.
pub fn measurement_idempotent(p: &Partition) -> Result<SplitObject, SplitError> {
    let n = p.total();
    let idem = KrausChannel::new(n, n, p.projectors())?;
    debug_assert!(is_causal_idempotent(&idem));
    Ok(SplitObject { ambient: ObjExpr::nat(n), idem, partition: Some(p.clone()) })
}

/// The constructive splitting `m . p = id`, `p . m = e` of a
/// partition-built idempotent. Both legs are ambient-space channels; the
/// direct-sum-of-blocks target is bookkept by the partition, and its
/// identity morphism is `e`, so both composites equal `e` as channels.
pub fn split_idempotent(s: &SplitObject) -> Result<(KrausChannel, KrausChannel), SplitError> {
    if s.partition.is_none() {
        return Err(SplitError::NoKnownPartition);
    }
    Ok((s.idem.clone(), s.idem.clone()))
}

/// Check the absorption law and wrap the channel as a morphism.
pub fn validate_split_mor(
    f: &KrausChannel,
    src: &SplitObject,
    dst: &SplitObject,
) -> Result<SplitMor, SplitError> {
    if f.in_dim != src.dim() || f.out_dim != dst.dim() {
        return Err(SplitError::ObjectMismatch(format!(
            "channel is {}x{} but endpoints have dimensions {} and {}",
            f.out_dim,
            f.in_dim,
            src.dim(),
            dst.dim()
        )));
    }
    let absorbed = src.idem.then(f)?.then(&dst.idem)?;
    if !channel_equal(&absorbed, f)? {
        return Err(SplitError::AbsorptionFails);
    }
    Ok(SplitMor { src: src.clone(), dst: dst.clone(), f: f.clone() })
}

/// Canonical coercion `g -> e' . g . e`; a retraction onto valid morphisms,
/// and the identity on channels that already satisfy absorption.
pub fn coerce(
    g: &KrausChannel,
    src: &SplitObject,
    dst: &SplitObject,
) -> Result<SplitMor, SplitError> {
    if g.in_dim != src.dim() || g.out_dim != dst.dim() {
        return Err(SplitError::ObjectMismatch(format!(
            "channel is {}x{} but endpoints have dimensions {} and {}",
            g.out_dim,
            g.in_dim,
            src.dim(),
            dst.dim()
        )));
    }
    let f = src.idem.then(g)?.then(&dst.idem)?;
    validate_split_mor(&f, src, dst)
}

/// Composition is composition of the underlying channels; absorption is
/// preserved by idempotence and re-checked.
pub fn compose_split(f: &SplitMor, g: &SplitMor) -> Result<SplitMor, SplitError> {
    if f.dst.dim() != g.src.dim() || !channel_equal(&f.dst.idem, &g.src.idem)? {
        return Err(SplitError::ObjectMismatch(
            "middle objects of a split composition differ".into(),
        ));
    }
    let comp = f.f.then(&g.f)?;
    validate_split_mor(&comp, &f.src, &g.dst)
}

/// Sup-norm Choi distance of the composite `m . p` or `p . m` from its
/// Eq-style target; used by tests at the tight structural tolerance.
pub fn splitting_defects(s: &SplitObject) -> Result<(f64, f64), SplitError> {
    let (m, p) = split_idempotent(s)?;
    let m_after_p = p.then(&m)?; // blocks -> blocks, must be the block identity e
    let p_after_m = m.then(&p)?; // ambient -> ambient, must be e
    Ok((
        choi_distance(&m_after_p, &s.idem)?,
        choi_distance(&p_after_m, &s.idem)?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{choi, random_cptn};
    use crate::dilation::{to_channel, DilationMor};
    use crate::linalg::direct_sum;
    use crate::rig::{structural_iso, Structural, StructuralName};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn dephasing() -> KrausChannel {
        measurement_idempotent(&Partition::new(vec![1, 1]).unwrap())
            .unwrap()
            .idem
    }

    #[test]
    fn partition_json_round_trips() {
        let p = Partition::from_json_str(r#"{"blocks": [1, 2]}"#).unwrap();
        assert_eq!(p.blocks, vec![1, 2]);
        assert_eq!(p.total(), 3);
        let back = Partition::from_json_str(&p.to_json_string()).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn partition_validation() {
        assert!(matches!(Partition::new(vec![]), Err(SplitError::BadPartition(_))));
        assert!(matches!(Partition::new(vec![2, 0]), Err(SplitError::BadPartition(_))));
        assert!(Partition::from_json_str(r#"{"blocks": []}"#).is_err());
        assert!(Partition::from_json_str("[1,2]").is_err());
    }

    #[test]
    fn single_block_is_identity_channel() {
        let s = measurement_idempotent(&Partition::new(vec![2]).unwrap()).unwrap();
        assert!(channel_equal(&s.idem, &KrausChannel::identity(2)).unwrap());
    }

    #[test]
    fn singleton_blocks_give_dephasing() {
        let s = measurement_idempotent(&Partition::new(vec![1, 1]).unwrap()).unwrap();
        let p0 = ComplexMatrix::from_real_rows(&[&[1.0, 0.0], &[0.0, 0.0]]);
        let p1 = ComplexMatrix::from_real_rows(&[&[0.0, 0.0], &[0.0, 1.0]]);
        let deph = KrausChannel::new(2, 2, vec![p0, p1]).unwrap();
        assert!(channel_equal(&s.idem, &deph).unwrap());
    }

    #[test]
    fn uneven_partition_zeroes_off_blocks() {
        let s = measurement_idempotent(&Partition::new(vec![1, 2]).unwrap()).unwrap();
        let ones = ComplexMatrix::new(3, 3, vec![c(1.0, 0.0); 9]).unwrap();
        let out = s.idem.apply_matrix(&ones);
        for (i, j) in [(0, 1), (0, 2), (1, 0), (2, 0)] {
            assert_eq!(out.at(i, j), c(0.0, 0.0), "off-block ({i},{j})");
        }
        for (i, j) in [(0, 0), (1, 1), (1, 2), (2, 1), (2, 2)] {
            assert_eq!(out.at(i, j), c(1.0, 0.0), "in-block ({i},{j})");
        }
    }

    #[test]
    fn splitting_identities_hold_tightly() {
        for blocks in [vec![1, 1], vec![2, 3], vec![1, 2, 3], vec![4]] {
            let s = measurement_idempotent(&Partition::new(blocks.clone()).unwrap()).unwrap();
            let (d1, d2) = splitting_defects(&s).unwrap();
            assert!(d1 <= 1e-10, "m.p defect for {blocks:?}: {d1}");
            assert!(d2 <= 1e-10, "p.m defect for {blocks:?}: {d2}");
        }
    }

    #[test]
    fn split_requires_partition_metadata() {
        let s = SplitObject::new(ObjExpr::nat(2), dephasing()).unwrap();
        assert!(matches!(split_idempotent(&s), Err(SplitError::NoKnownPartition)));
    }

    #[test]
    fn causal_idempotent_examples() {
        assert!(is_causal_idempotent(&dephasing()));
        assert!(is_causal_idempotent(&KrausChannel::identity(3)));

        // 50% depolarizing: trace-preserving but composes to 75% depolarizing.
        let s5 = (5.0f64 / 8.0).sqrt();
        let s1 = (1.0f64 / 8.0).sqrt();
        let i = ComplexMatrix::identity(2).scale_re(s5);
        let x = ComplexMatrix::from_real_rows(&[&[0.0, s1], &[s1, 0.0]]);
        let y = ComplexMatrix::new(2, 2, vec![c(0.0, 0.0), c(0.0, -s1), c(0.0, s1), c(0.0, 0.0)])
            .unwrap();
        let z = ComplexMatrix::from_real_rows(&[&[s1, 0.0], &[0.0, -s1]]);
        let depol = KrausChannel::new(2, 2, vec![i, x, y, z]).unwrap();
        assert!(is_trace_preserving(&depol));
        assert!(!is_causal_idempotent(&depol));

        // A single block projector is idempotent but leaks trace.
        let p0 = ComplexMatrix::from_real_rows(&[&[1.0, 0.0], &[0.0, 0.0]]);
        let proj = KrausChannel::new(2, 2, vec![p0]).unwrap();
        assert!(!is_causal_idempotent(&proj));
        assert!(SplitObject::new(ObjExpr::nat(2), proj).is_err());
    }

    #[test]
    fn absorption_accepts_the_identity_of_an_object() {
        let s = measurement_idempotent(&Partition::new(vec![1, 1]).unwrap()).unwrap();
        let m = validate_split_mor(&s.idem, &s, &s).unwrap();
        assert!(channel_equal(&m.f, &s.idem).unwrap());
    }

    #[test]
    fn absorption_rejects_identity_between_distinct_partitions() {
        let fine = measurement_idempotent(&Partition::new(vec![1, 1]).unwrap()).unwrap();
        let coarse = measurement_idempotent(&Partition::new(vec![2]).unwrap()).unwrap();
        // The raw identity channel is never absorbed by a nontrivial
        // idempotent; the identity morphism of a measured object is its
        // idempotent, not the ambient identity.
        for (src, dst) in [(&coarse, &fine), (&fine, &coarse), (&fine, &fine)] {
            assert!(matches!(
                validate_split_mor(&KrausChannel::identity(2), src, dst),
                Err(SplitError::AbsorptionFails)
            ));
        }
        // Measuring is a morphism from the unmeasured object to the
        // measured one: both endpoint idempotents absorb into it.
        assert!(validate_split_mor(&fine.idem, &coarse, &fine).is_ok());
    }

    #[test]
    fn coercion_is_a_retraction() {
        let src = measurement_idempotent(&Partition::new(vec![1, 1]).unwrap()).unwrap();
        let dst = measurement_idempotent(&Partition::new(vec![1, 2]).unwrap()).unwrap();
        let g = random_cptn(2, 3, 2, 17);
        let once = coerce(&g, &src, &dst).unwrap();
        let twice = coerce(&once.f, &src, &dst).unwrap();
        assert!(channel_equal(&once.f, &twice.f).unwrap());
        // Valid morphisms are fixed points.
        assert!(validate_split_mor(&once.f, &src, &dst).is_ok());
    }

    #[test]
    fn composition_identity_laws() {
        let s = measurement_idempotent(&Partition::new(vec![1, 2]).unwrap()).unwrap();
        let g = random_cptn(3, 3, 2, 23);
        let f = coerce(&g, &s, &s).unwrap();
        let left = compose_split(&s.identity(), &f).unwrap();
        let right = compose_split(&f, &s.identity()).unwrap();
        assert!(channel_equal(&left.f, &f.f).unwrap());
        assert!(channel_equal(&right.f, &f.f).unwrap());
    }

    #[test]
    fn splitting_legs_compose_to_the_idempotent() {
        let s = measurement_idempotent(&Partition::new(vec![2, 2]).unwrap()).unwrap();
        let (m, p) = split_idempotent(&s).unwrap();
        let m_mor = validate_split_mor(&m, &s, &s).unwrap();
        let p_mor = validate_split_mor(&p, &s, &s).unwrap();
        let mp = compose_split(&p_mor, &m_mor).unwrap(); // p then m: block identity
        let pm = compose_split(&m_mor, &p_mor).unwrap(); // m then p: e in ambient space
        assert!(channel_equal(&mp.f, &s.idem).unwrap());
        assert!(channel_equal(&pm.f, &s.idem).unwrap());
    }

    #[test]
    fn composition_rejects_mismatched_middles() {
        let fine = measurement_idempotent(&Partition::new(vec![1, 1]).unwrap()).unwrap();
        let coarse = measurement_idempotent(&Partition::new(vec![2]).unwrap()).unwrap();
        let f = fine.identity();
        let g = coarse.identity();
        assert!(matches!(compose_split(&f, &g), Err(SplitError::ObjectMismatch(_))));
    }

    #[test]
    fn cotupling_candidate_is_the_measurement_not_the_identity() {
        // The candidate copairing dilation: tag each summand with a flag
        // state, then distribute. Its channel is the block measurement.
        for (da, db) in [(1usize, 1usize), (2, 2), (1, 2)] {
            let tag0 = ComplexMatrix::from_real_rows(&[&[1.0], &[0.0]]);
            let tag1 = ComplexMatrix::from_real_rows(&[&[0.0], &[1.0]]);
            let i1 = crate::linalg::kron(&tag0, &ComplexMatrix::identity(da));
            let i2 = crate::linalg::kron(&tag1, &ComplexMatrix::identity(db));
            let tagged = direct_sum(&i1, &i2); // A+B -> 2(x)A + 2(x)B
            let undist = structural_iso(
                Structural { name: StructuralName::DistL, inverse: true },
                &[ObjExpr::nat(2), ObjExpr::nat(da), ObjExpr::nat(db)],
            )
            .unwrap();
            let flag_last = structural_iso(
                Structural::forward(StructuralName::SwapTimes),
                &[ObjExpr::nat(2), ObjExpr::nat(da + db)],
            )
            .unwrap();
            let v = flag_last.mul(&undist).mul(&tagged);
            let cand = DilationMor::new(
                ObjExpr::nat(da + db),
                ObjExpr::nat(da + db),
                ObjExpr::nat(2),
                v,
            )
            .unwrap();
            let k = to_channel(&cand).unwrap();
            let measured = measurement_idempotent(&Partition::new(vec![da, db]).unwrap()).unwrap();
            assert!(channel_equal(&k, &measured.idem).unwrap(), "blocks {da}+{db}");
            let id = KrausChannel::identity(da + db);
            if da + db > 1 {
                assert!(!channel_equal(&k, &id).unwrap(), "blocks {da}+{db}");
                let dist = choi(&k).mat.sup_distance(&choi(&id).mat);
                assert!(dist > 0.1, "blocks {da}+{db}: distance {dist}");
            }
        }
    }
}
