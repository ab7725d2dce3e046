//! Cache-aware linear precoders.
//!
//! * MRT: `w_k = h_k / ||h_k||`.
//! * ZF: `w_k ∝ Q_k (Q_k^H Q_k)^{-1} e_1`, where `Q_k = [h_k, h_l for l in Lambda_k]`.
//!   The precoder only has to null the users that cannot cancel user `k`'s
//!   stream from their cache, so every cached request frees a spatial dimension.
//! * RZF: `w_k ∝ (F_k^H F_k + alpha I)^{-1} g_k`, with `F_k` stacking the
//!   conjugate-transposed fading vectors of `k` and `Lambda_k`.
//!
//! Every returned precoder has unit norm and is rotated so that `h_k^H w_k` is
//! real and nonnegative.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use serde::{Deserialize, Serialize};

use crate::channel::ChannelRealization;
use crate::error::{Error, Result};
use crate::scenario::DerivedSets;
use crate::C64;

/// Reciprocal condition estimate below which ZF is declared infeasible.
pub const ZF_RCOND_MIN: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum PrecoderKind {
    Mrt,
    Zf,
    /// Regularizer `alpha`, shared by all users.
    Rzf { alpha: f64 },
}

impl PrecoderKind {
    pub fn name(&self) -> &'static str {
        match self {
            PrecoderKind::Mrt => "mrt",
            PrecoderKind::Zf => "zf",
            PrecoderKind::Rzf { .. } => "rzf",
        }
    }
}

/// Rotates `w` so that `h^H w` is real and nonnegative.
fn align_phase(mut w: DVector<C64>, h: &DVector<C64>) -> DVector<C64> {
    let s = h.dotc(&w);
    if s.norm() > 0.0 {
        w *= s.conj() / s.norm();
    }
    w
}

fn normalize(v: DVector<C64>) -> Result<DVector<C64>> {
    let n = v.norm();
    if !(n > 0.0) || !n.is_finite() {
        return Err(Error::DegenerateChannel);
    }
    Ok(v.unscale(n))
}

pub fn mrt(h: &DVector<C64>) -> Result<DVector<C64>> {
    let w = normalize(h.clone())?;
    Ok(align_phase(w, h))
}

/// `Q_k`: `M x (D_k + 1)`, first column `h_k`, then `h_l` for `l` in `Lambda_k`.
pub fn effective_channel_matrix(k: usize, channel: &DMatrix<C64>, protected: &[usize]) -> DMatrix<C64> {
    let idx: Vec<usize> = std::iter::once(k).chain(protected.iter().copied()).collect();
    channel.select_columns(&idx)
}

/// `F_k`: `(D_k + 1) x M`, first row `g_k^H`, then `g_l^H` for `l` in `Lambda_k`,
/// so that `F_k^H F_k = sum g g^H`.
pub fn effective_fading_matrix(k: usize, fading: &DMatrix<C64>, protected: &[usize]) -> DMatrix<C64> {
    effective_channel_matrix(k, fading, protected).adjoint()
}

fn cholesky_rcond(chol: &Cholesky<C64, Dyn>) -> f64 {
    let diag = chol.l_dirty().diagonal();
    let (lo, hi) = diag
        .iter()
        .map(|z| z.re)
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), d| (lo.min(d), hi.max(d)));
    if hi > 0.0 {
        (lo / hi).powi(2)
    } else {
        0.0
    }
}

/// Unnormalized ZF direction `Q (Q^H Q)^{-1} e_1`, via a Hermitian solve of
/// `(Q^H Q) x = e_1`.
pub fn zf_direction(user: usize, q: &DMatrix<C64>) -> Result<DVector<C64>> {
    let (m, cols) = q.shape();
    if cols > m {
        return Err(Error::ZfInfeasible {
            user,
            reason: format!("{} constraints exceed {} antennas", cols, m),
        });
    }
    let gram = q.adjoint() * q;
    let chol = Cholesky::new(gram).ok_or_else(|| Error::ZfInfeasible {
        user,
        reason: "Gram matrix is not positive definite".into(),
    })?;
    let rcond = cholesky_rcond(&chol);
    if rcond < ZF_RCOND_MIN {
        return Err(Error::ZfInfeasible {
            user,
            reason: format!("effective channel matrix is rank deficient (rcond {rcond:.3e})"),
        });
    }
    let mut e1 = DVector::zeros(cols);
    e1[0] = C64::new(1.0, 0.0);
    Ok(q * chol.solve(&e1))
}

pub fn zf(k: usize, channel: &DMatrix<C64>, protected: &[usize]) -> Result<DVector<C64>> {
    let q = effective_channel_matrix(k, channel, protected);
    let w = normalize(zf_direction(k, &q)?)?;
    Ok(align_phase(w, &channel.column(k).into_owned()))
}

/// RZF precoder of user `k` from fading vectors. Solves whichever of the
/// `M x M` primal or `(D+1) x (D+1)` dual systems is smaller.
/// `alpha = 0` is accepted and reduces to ZF when the dual system is used.
pub fn rzf(k: usize, fading: &DMatrix<C64>, protected: &[usize], alpha: f64) -> Result<DVector<C64>> {
    if !(alpha >= 0.0) || !alpha.is_finite() {
        return Err(Error::InvalidRegularizer(alpha));
    }
    let cols = effective_channel_matrix(k, fading, protected);
    let (m, n) = cols.shape();
    let g_k = fading.column(k).into_owned();
    let singular = || Error::ZfInfeasible { user: k, reason: "regularized system is singular".into() };
    let v = if m < n {
        let mut a = &cols * cols.adjoint();
        for i in 0..m {
            a[(i, i)] += alpha;
        }
        Cholesky::new(a).ok_or_else(singular)?.solve(&g_k)
    } else {
        let mut a = cols.adjoint() * &cols;
        for i in 0..n {
            a[(i, i)] += alpha;
        }
        let mut e1 = DVector::zeros(n);
        e1[0] = C64::new(1.0, 0.0);
        &cols * Cholesky::new(a).ok_or_else(singular)?.solve(&e1)
    };
    let w = normalize(v)?;
    Ok(align_phase(w, &g_k))
}

/// Precoders for a set of users; `None` for users not computed.
#[derive(Debug, Clone, PartialEq)]
pub struct Precoders {
    pub vectors: Vec<Option<DVector<C64>>>,
}

impl Precoders {
    pub fn get(&self, k: usize) -> Option<&DVector<C64>> {
        self.vectors.get(k).and_then(Option::as_ref)
    }
}

/// Computes the precoder of every active user.
pub fn compute_precoders(
    kind: PrecoderKind,
    realization: &ChannelRealization,
    sets: &DerivedSets,
) -> Result<Precoders> {
    let mut vectors = vec![None; sets.users()];
    for &k in &sets.active {
        vectors[k] = Some(precoder_for(kind, k, realization, &sets.protected[k])?);
    }
    Ok(Precoders { vectors })
}

pub fn precoder_for(
    kind: PrecoderKind,
    k: usize,
    realization: &ChannelRealization,
    protected: &[usize],
) -> Result<DVector<C64>> {
    match kind {
        PrecoderKind::Mrt => mrt(&realization.channel.column(k).into_owned()),
        PrecoderKind::Zf => zf(k, &realization.channel, protected),
        PrecoderKind::Rzf { alpha } => rzf(k, &realization.fading, protected, alpha),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn mrt_identity_direction() {
        let h = DVector::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        assert_eq!(mrt(&h).unwrap(), h);
    }

    #[test]
    fn mrt_arithmetic() {
        let h = DVector::from_vec(vec![c(3.0, 0.0), c(0.0, 4.0)]);
        let w = mrt(&h).unwrap();
        assert!((w[0] - c(0.6, 0.0)).norm() < 1e-15);
        assert!((w[1] - c(0.0, 0.8)).norm() < 1e-15);
        assert!((h.dotc(&w) - c(5.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn mrt_zero_channel() {
        assert_eq!(mrt(&DVector::zeros(3)), Err(Error::DegenerateChannel));
    }

    #[test]
    fn zf_single_column_is_mrt() {
        let h = DMatrix::from_column_slice(2, 1, &[c(3.0, 0.0), c(0.0, 4.0)]);
        let w = zf(0, &h, &[]).unwrap();
        let m = mrt(&h.column(0).into_owned()).unwrap();
        assert!((w - m).norm() < 1e-15);
    }

    #[test]
    fn zf_orthogonal_channels_reduce_to_mrt() {
        let h = DMatrix::from_column_slice(
            3,
            3,
            &[c(1.0, 1.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(2.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, -1.0)],
        );
        let w = zf(0, &h, &[1, 2]).unwrap();
        let m = mrt(&h.column(0).into_owned()).unwrap();
        assert!((w - m).norm() < 1e-15);
    }

    #[test]
    fn zf_too_many_constraints() {
        let h = DMatrix::from_element(2, 3, c(1.0, 0.0));
        assert!(matches!(zf(0, &h, &[1, 2]), Err(Error::ZfInfeasible { user: 0, .. })));
    }

    #[test]
    fn zf_rank_deficient() {
        let h = DMatrix::from_column_slice(3, 2, &[c(1.0, 0.0), c(2.0, 0.0), c(0.0, 1.0), c(2.0, 0.0), c(4.0, 0.0), c(0.0, 2.0)]);
        assert!(matches!(zf(0, &h, &[1]), Err(Error::ZfInfeasible { .. })));
    }

    #[test]
    fn rzf_negative_alpha() {
        let g = DMatrix::from_element(2, 1, c(1.0, 0.0));
        assert_eq!(rzf(0, &g, &[], -1.0), Err(Error::InvalidRegularizer(-1.0)));
    }

    #[test]
    fn fading_matrix_rows() {
        let g = DMatrix::from_column_slice(2, 2, &[c(1.0, 2.0), c(3.0, 4.0), c(5.0, 6.0), c(7.0, 8.0)]);
        let f = effective_fading_matrix(1, &g, &[0]);
        assert_eq!(f.shape(), (2, 2));
        assert_eq!(f[(0, 0)], c(5.0, -6.0));
        assert_eq!(f[(1, 1)], c(3.0, -4.0));
    }
}
