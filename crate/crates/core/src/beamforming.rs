//! Noise-plus-distortion matrices and the SNR-optimal beamformer.
//!
//! For a unit beamformer `w` the received SNR is the generalized Rayleigh
//! quotient `|hᴴw|² / wᴴDw` with
//!
//! ```text
//! D = (1 + κ_UE)·κ_BS·diag(h hᴴ) + κ_UE·h hᴴ + (σ²/p)·I
//! ```
//!
//! which is maximized by `w ∝ D⁻¹h` and attains `hᴴD⁻¹h`. Dropping the
//! rank-one `κ_UE·h hᴴ` term leaves a diagonal matrix `D̃`, and the rank-one
//! resolvent identity gives `hᴴD⁻¹h = q̃ / (1 + κ_UE·q̃)` with `q̃ = hᴴD̃⁻¹h`.
//! That scalar route is the fast path used by the capacity code.

use nalgebra::{DVector, RowDVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector};
use crate::model::SystemConfig;

/// Tolerance on `‖w‖ − 1` accepted by [`snr`].
pub const UNIT_NORM_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LinkDirection {
    Downlink,
    Uplink,
}

/// `D` (or `U` on the uplink) together with its diagonal reduced form.
#[derive(Debug, Clone, PartialEq)]
pub struct NoisePlusDistortion {
    /// Full matrix including the rank-one `κ_UE·h hᴴ` term.
    pub full: CMatrix,
    /// Diagonal of the reduced matrix (rank-one term removed).
    pub reduced: DVector<f64>,
    pub kappa_ue: f64,
}

impl NoisePlusDistortion {
    /// Builds both forms directly from the impairment coefficients and the
    /// noise-to-power ratio `σ²/p`.
    pub fn new(h_eff: &CVector, kappa_bs: f64, kappa_ue: f64, noise_to_power: f64) -> Result<Self> {
        if !noise_to_power.is_finite() || noise_to_power <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "noise-to-power ratio must be finite and > 0, got {noise_to_power}"
            )));
        }
        for (key, k) in [("kappa_bs", kappa_bs), ("kappa_ue", kappa_ue)] {
            if !k.is_finite() || k < 0.0 {
                return Err(Error::config(
                    key,
                    format!("must be finite and >= 0, got {k}"),
                ));
            }
        }
        let per_antenna = (1.0 + kappa_ue) * kappa_bs;
        let reduced = h_eff.map(|h| per_antenna * h.norm_sqr() + noise_to_power);
        let mut full = (h_eff * h_eff.adjoint()).scale(kappa_ue);
        for (i, d) in reduced.iter().enumerate() {
            full[(i, i)] += Complex64::new(*d, 0.0);
        }
        // hhᴴ has an exactly real diagonal; keep it that way after scaling.
        for i in 0..full.nrows() {
            full[(i, i)].im = 0.0;
        }
        Ok(Self {
            full,
            reduced,
            kappa_ue,
        })
    }

    pub fn dim(&self) -> usize {
        self.reduced.len()
    }

    pub fn reduced_matrix(&self) -> CMatrix {
        CMatrix::from_diagonal(&self.reduced.map(|d| Complex64::new(d, 0.0)))
    }
}

/// Noise-plus-distortion matrices for `dir`: the downlink uses `p_BS` and
/// `σ²_UE`, the uplink `p_UE` and the receiver variance selected by
/// `config.uplink_noise_source`.
pub fn build_noise_matrices(
    h_eff: &CVector,
    config: &SystemConfig,
    dir: LinkDirection,
) -> Result<NoisePlusDistortion> {
    check_dim(h_eff, config.antennas)?;
    let (power, noise) = config.power_and_noise(dir);
    if !power.is_finite() || power <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "transmit power must be > 0, got {power}"
        )));
    }
    if !noise.is_finite() || noise <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "noise variance must be > 0, got {noise}"
        )));
    }
    NoisePlusDistortion::new(h_eff, config.kappa_bs, config.kappa_ue, noise / power)
}

fn check_dim(h: &CVector, m: usize) -> Result<()> {
    if h.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            actual: h.len(),
        });
    }
    Ok(())
}

/// `D⁻¹h / ‖D⁻¹h‖`: the transmit beamformer on the downlink or the receive
/// combiner on the uplink, depending on which matrix is passed.
pub fn optimal_beamformer(h_eff: &CVector, mat: &NoisePlusDistortion) -> Result<CVector> {
    check_dim(h_eff, mat.dim())?;
    if h_eff.iter().all(|z| *z == Complex64::new(0.0, 0.0)) {
        return Err(Error::ZeroChannel);
    }
    let x = linalg::hpd_solve(&mat.full, h_eff)?;
    let norm = x.norm();
    if !norm.is_finite() || norm == 0.0 {
        return Err(Error::Singular);
    }
    Ok(x.unscale(norm))
}

/// `|hᴴw|² / wᴴDw` for a unit-norm `w`.
pub fn snr(w: &CVector, h_eff: &CVector, mat: &NoisePlusDistortion) -> Result<f64> {
    check_dim(h_eff, mat.dim())?;
    check_dim(w, mat.dim())?;
    let norm = w.norm();
    if (norm - 1.0).abs() > UNIT_NORM_TOL {
        return Err(Error::NonUnitVector(norm));
    }
    let signal = h_eff.dotc(w).norm_sqr();
    let denom = w.dotc(&(&mat.full * w)).re;
    Ok(signal / denom)
}

/// `hᴴA⁻¹h` with `A` either the full matrix (Cholesky solve) or the reduced
/// diagonal matrix (per-antenna sum `Σ |h_i|² / D̃_ii`).
pub fn quadratic_form(
    h_eff: &CVector,
    mat: &NoisePlusDistortion,
    use_reduced: bool,
) -> Result<f64> {
    check_dim(h_eff, mat.dim())?;
    if use_reduced {
        reduced_quadratic_form(h_eff, &mat.reduced)
    } else {
        linalg::hpd_quadratic_form(&mat.full, h_eff)
    }
}

fn reduced_quadratic_form(h_eff: &CVector, diag: &DVector<f64>) -> Result<f64> {
    let mut acc = 0.0;
    for (h, d) in h_eff.iter().zip(diag.iter()) {
        if *d <= 0.0 {
            return Err(Error::Singular);
        }
        acc += h.norm_sqr() / d;
    }
    Ok(acc)
}

/// `qᴴ(B + τ q qᴴ)⁻¹`, computed as `qᴴB⁻¹ / (1 + τ qᴴB⁻¹q)`.
pub fn rank_one_resolvent(
    b: &CMatrix,
    tau: Complex64,
    q: &CVector,
) -> Result<RowDVector<Complex64>> {
    if !b.is_square() {
        return Err(Error::InvalidArgument("B must be square".into()));
    }
    check_dim(q, b.nrows())?;
    // qᴴB⁻¹ = (B⁻ᴴ q)ᴴ
    let lu = b.adjoint().lu();
    let y = lu.solve(q).ok_or(Error::Singular)?;
    if y.iter().any(|z| !z.is_finite()) {
        return Err(Error::Singular);
    }
    let row = y.adjoint();
    let quad = (&row * q)[(0, 0)];
    let denom = Complex64::new(1.0, 0.0) + tau * quad;
    let scale = 1.0 + (tau * quad).norm();
    if denom.norm() <= 1e-14 * scale {
        return Err(Error::SingularUpdate);
    }
    Ok(row / denom)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::standard_complex_gaussian;
    use crate::rng::rng_from_seed;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn ideal_hardware_is_scaled_identity() {
        let h = CVector::from_vec(vec![c(1.0, 2.0), c(-0.5, 0.1), c(0.0, 3.0)]);
        let mat = NoisePlusDistortion::new(&h, 0.0, 0.0, 0.25).unwrap();
        assert_eq!(mat.full, CMatrix::identity(3, 3).scale(0.25));
        assert_eq!(mat.reduced_matrix(), mat.full);
    }

    #[test]
    fn scalar_hand_example() {
        let h = CVector::from_element(1, c(1.0, 0.0));
        let mat = NoisePlusDistortion::new(&h, 0.0025, 0.0025, 1.0).unwrap();
        assert!((mat.reduced[0] - 1.002_506_25).abs() < 1e-15);
        assert!((mat.full[(0, 0)].re - 1.005_006_25).abs() < 1e-15);
        let q = quadratic_form(&h, &mat, true).unwrap();
        assert!((q - 0.997_500_0).abs() < 5e-7, "{q}");
    }

    #[test]
    fn zero_channel_matrices_and_forms() {
        let h = CVector::zeros(2);
        let mat = NoisePlusDistortion::new(&h, 0.1, 0.2, 0.5).unwrap();
        assert_eq!(mat.full, CMatrix::identity(2, 2).scale(0.5));
        assert_eq!(quadratic_form(&h, &mat, true).unwrap(), 0.0);
        assert_eq!(quadratic_form(&h, &mat, false).unwrap(), 0.0);
        assert_eq!(optimal_beamformer(&h, &mat), Err(Error::ZeroChannel));
    }

    #[test]
    fn build_uses_direction_power_and_noise() {
        let h = CVector::from_vec(vec![c(1.0, 0.0), c(0.0, 1.0)]);
        let cfg = SystemConfig::new(2, 0)
            .with_powers(4.0, 2.0)
            .with_noise(3.0, 1.0);
        let down = build_noise_matrices(&h, &cfg, LinkDirection::Downlink).unwrap();
        assert_eq!(down.full[(0, 0)].re, 0.25);
        let up = build_noise_matrices(&h, &cfg, LinkDirection::Uplink).unwrap();
        assert_eq!(up.full[(0, 0)].re, 1.5);
        let mut printed = cfg.clone();
        printed.uplink_noise_source = crate::model::UplinkNoiseSource::UeAsPrinted;
        let up = build_noise_matrices(&h, &printed, LinkDirection::Uplink).unwrap();
        assert_eq!(up.full[(0, 0)].re, 0.5);

        let mut bad = cfg.clone();
        bad.p_bs = 0.0;
        assert!(build_noise_matrices(&h, &bad, LinkDirection::Downlink).is_err());
        let mut bad = cfg;
        bad.sigma2_bs = 0.0;
        assert!(build_noise_matrices(&h, &bad, LinkDirection::Uplink).is_err());
    }

    #[test]
    fn ideal_hardware_beamformer_is_mrt() {
        let h = CVector::from_vec(vec![c(1.0, 2.0), c(-0.5, 0.1), c(0.0, 3.0)]);
        let mat = NoisePlusDistortion::new(&h, 0.0, 0.0, 1.0).unwrap();
        let w = optimal_beamformer(&h, &mat).unwrap();
        assert!((w - h.unscale(h.norm())).norm() < 1e-14);
    }

    #[test]
    fn scalar_beamformer_has_unit_modulus() {
        let h = CVector::from_element(1, c(-0.3, 0.9));
        let mat = NoisePlusDistortion::new(&h, 0.1, 0.1, 1.0).unwrap();
        let w = optimal_beamformer(&h, &mat).unwrap();
        assert!((w[0].norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn beamformer_beats_random_search() {
        // Oracle: best of 1e5 random unit vectors for M = 2, then polished by
        // a shrinking random-perturbation hill climb (no closed form used).
        let h = CVector::from_vec(vec![c(1.0, 0.0), c(1.0, 0.0)]);
        let mat = NoisePlusDistortion::new(&h, 0.1, 0.05, 1.0).unwrap();
        let w = optimal_beamformer(&h, &mat).unwrap();
        let best = snr(&w, &h, &mat).unwrap();
        let mut rng = rng_from_seed(17);
        let mut arg = CVector::zeros(2);
        let mut search = 0.0f64;
        for _ in 0..100_000 {
            let v = standard_complex_gaussian(&mut rng, 2);
            let v = v.unscale(v.norm());
            let s = snr(&v, &h, &mat).unwrap();
            if s > search {
                search = s;
                arg = v;
            }
        }
        assert!(best >= search - 1e-9);
        let mut step = 1e-2;
        while step > 1e-8 {
            for _ in 0..200 {
                let v = &arg + standard_complex_gaussian(&mut rng, 2).scale(step);
                let v = v.unscale(v.norm());
                let s = snr(&v, &h, &mat).unwrap();
                if s > search {
                    search = s;
                    arg = v;
                }
            }
            step *= 0.5;
        }
        assert!(best >= search - 1e-9);
        assert!(rel(search, best) < 1e-6, "{search} vs {best}");
    }

    #[test]
    fn snr_examples() {
        let h = CVector::from_vec(vec![c(1.0, 0.0), c(0.0, 1.0)]);
        let mat = NoisePlusDistortion::new(&h, 0.0, 0.0, 1.0).unwrap();
        let w = h.unscale(h.norm());
        assert!((snr(&w, &h, &mat).unwrap() - 2.0).abs() < 1e-14);
        let orth = CVector::from_vec(vec![c(0.0, 1.0), c(1.0, 0.0)]).unscale(2f64.sqrt());
        assert!(snr(&orth, &h, &mat).unwrap().abs() < 1e-15);
        assert!(matches!(snr(&h, &h, &mat), Err(Error::NonUnitVector(_))));
    }

    #[test]
    fn rank_one_resolvent_examples() {
        let one = CMatrix::from_element(1, 1, c(1.0, 0.0));
        let q = CVector::from_element(1, c(1.0, 0.0));
        let r = rank_one_resolvent(&one, c(1.0, 0.0), &q).unwrap();
        assert!((r[0] - c(0.5, 0.0)).norm() < 1e-15);

        let b =
            CMatrix::from_row_slice(2, 2, &[c(2.0, 0.0), c(0.0, 1.0), c(0.0, -1.0), c(3.0, 0.0)]);
        let q = CVector::from_vec(vec![c(1.0, -1.0), c(0.5, 2.0)]);
        let r = rank_one_resolvent(&b, c(0.0, 0.0), &q).unwrap();
        let direct = q.adjoint() * b.clone().try_inverse().unwrap();
        assert!((r - direct).norm() < 1e-14);

        // 1 + τ·1 = 0
        assert_eq!(
            rank_one_resolvent(&one, c(-1.0, 0.0), &CVector::from_element(1, c(1.0, 0.0))),
            Err(Error::SingularUpdate)
        );
        assert_eq!(
            rank_one_resolvent(&CMatrix::zeros(2, 2), c(1.0, 0.0), &CVector::zeros(2)),
            Err(Error::Singular)
        );
    }

    fn channel(m: usize) -> impl Strategy<Value = CVector> {
        prop::collection::vec((-3.0f64..3.0, -3.0f64..3.0), m)
            .prop_filter("nonzero", |v| {
                v.iter().any(|(a, b)| a.abs() + b.abs() > 1e-3)
            })
            .prop_map(|v| CVector::from_iterator(v.len(), v.into_iter().map(|(a, b)| c(a, b))))
    }

    proptest! {
        #[test]
        fn full_minus_reduced_is_rank_one(h in channel(4), kbs in 0.0f64..0.2, kue in 0.0f64..0.2, r in 0.01f64..10.0) {
            let mat = NoisePlusDistortion::new(&h, kbs, kue, r).unwrap();
            let diff = &mat.full - mat.reduced_matrix();
            let want = (&h * h.adjoint()).scale(kue);
            prop_assert!((diff - &want).norm() <= 1e-12 * mat.full.norm());
        }

        #[test]
        fn reduced_fast_path_matches_solve(h in channel(5), kbs in 0.0f64..0.2, kue in 0.0f64..0.2, r in 0.01f64..10.0) {
            let mat = NoisePlusDistortion::new(&h, kbs, kue, r).unwrap();
            let fast = quadratic_form(&h, &mat, true).unwrap();
            let slow = linalg::hpd_quadratic_form(&mat.reduced_matrix(), &h).unwrap();
            prop_assert!(rel(fast, slow) < 1e-12);
        }

        #[test]
        fn full_and_reduced_forms_are_linked(h in channel(4), kbs in 0.0f64..0.2, kue in 0.0f64..0.2, r in 1e-4f64..10.0) {
            let mat = NoisePlusDistortion::new(&h, kbs, kue, r).unwrap();
            let qr = quadratic_form(&h, &mat, true).unwrap();
            let qf = quadratic_form(&h, &mat, false).unwrap();
            prop_assert!(rel(qf, qr / (1.0 + kue * qr)) < 1e-10);
        }

        #[test]
        fn beamformer_snr_equals_quadratic_form(h in channel(3), kbs in 0.0f64..0.2, kue in 0.0f64..0.2, r in 0.01f64..10.0) {
            let mat = NoisePlusDistortion::new(&h, kbs, kue, r).unwrap();
            let w = optimal_beamformer(&h, &mat).unwrap();
            let s = snr(&w, &h, &mat).unwrap();
            let q = quadratic_form(&h, &mat, false).unwrap();
            prop_assert!(rel(s, q) < 1e-10);
        }

        #[test]
        fn beamformer_invariant_under_joint_scaling(h in channel(3), kbs in 0.0f64..0.2, kue in 0.0f64..0.2, r in 0.01f64..10.0, s in 0.1f64..10.0) {
            let a = optimal_beamformer(&h, &NoisePlusDistortion::new(&h, kbs, kue, r).unwrap()).unwrap();
            let hs = h.scale(s);
            let b = optimal_beamformer(&hs, &NoisePlusDistortion::new(&hs, kbs, kue, r * s * s).unwrap()).unwrap();
            prop_assert!((a - b).norm() < 1e-9);
        }

        #[test]
        fn beamformer_dominates_random_directions(h in channel(4), kbs in 0.0f64..0.2, kue in 0.0f64..0.2, seed in any::<u64>()) {
            let mat = NoisePlusDistortion::new(&h, kbs, kue, 0.5).unwrap();
            let best = snr(&optimal_beamformer(&h, &mat).unwrap(), &h, &mat).unwrap();
            let mut rng = rng_from_seed(seed);
            for _ in 0..1000 {
                let v = standard_complex_gaussian(&mut rng, 4);
                let v = v.unscale(v.norm());
                prop_assert!(best >= snr(&v, &h, &mat).unwrap() - 1e-9);
            }
        }
    }
}
