//! Local filtering `F = diag(√(1−k), √k)` applied after the noise.

use num_complex::Complex64;

use crate::algebra::{Matrix2, QubitDensity};
use crate::error::{invalid, QslError, Result};
use crate::models::DephasingChannel;
use crate::qsl::Trajectory;

/// Normalizations at or below this value are treated as a vanishing filter output.
pub const MIN_SUCCESS_PROBABILITY: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterOp {
    k: f64,
}

impl FilterOp {
    pub fn new(k: f64) -> Result<Self> {
        if !(k.is_finite() && k > 0.0 && k < 1.0) {
            return Err(invalid("k", format!("filter parameter must lie in (0, 1), got {k}")));
        }
        Ok(Self { k })
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn matrix(&self) -> Matrix2 {
        Matrix2::from_real((1.0 - self.k).sqrt(), 0.0, 0.0, self.k.sqrt())
    }

    /// F M F† for an arbitrary matrix (F is real diagonal).
    pub fn conjugate(&self, m: &Matrix2) -> Matrix2 {
        let f = self.matrix();
        f * *m * f.adjoint()
    }
}

/// tr(FρF†) = (1−k)·d0 + k·d1.
pub fn success_probability(rho: &QubitDensity, f: &FilterOp) -> f64 {
    (1.0 - f.k) * rho.d0() + f.k * rho.d1()
}

/// FρF† / tr(FρF†).
pub fn apply_filter(rho: &QubitDensity, f: &FilterOp) -> Result<QubitDensity> {
    let norm = success_probability(rho, f);
    if norm <= MIN_SUCCESS_PROBABILITY {
        return Err(QslError::DegenerateFilter(norm));
    }
    let k = f.k;
    let d0 = (1.0 - k) * rho.d0() / norm;
    let c = rho.coherence() * ((k * (1.0 - k)).sqrt() / norm);
    // d1 = k·d1/norm = 1 − d0 exactly; taking the complement pins the trace.
    QubitDensity::new(d0, 1.0 - d0, c)
}

/// The family `t ↦ apply_filter(evolve(|+⟩⟨+|, t), F)`.
///
/// For these channels it has populations `(1−k, k)` and coherence
/// `√(k(1−k))·q(t)`.
#[derive(Debug, Clone)]
pub struct FilteredTrajectory {
    channel: DephasingChannel,
    filter: FilterOp,
    initial: QubitDensity,
}

pub fn filtered_trajectory(channel: DephasingChannel, f: FilterOp) -> FilteredTrajectory {
    FilteredTrajectory::new(channel, f)
}

impl FilteredTrajectory {
    pub fn new(channel: DephasingChannel, filter: FilterOp) -> Self {
        Self {
            channel,
            filter,
            initial: QubitDensity::plus(),
        }
    }

    pub fn channel(&self) -> &DephasingChannel {
        &self.channel
    }

    pub fn filter(&self) -> FilterOp {
        self.filter
    }

    /// The unnormalized `FρF†` (trace ½ for the |+⟩ input).
    pub fn unnormalized(&self, t: f64) -> Result<Matrix2> {
        let evolved = self.channel.evolve(&self.initial, t)?;
        Ok(self.filter.conjugate(&evolved.to_matrix()))
    }
}

impl Trajectory for FilteredTrajectory {
    fn state(&self, t: f64) -> Result<QubitDensity> {
        apply_filter(&self.channel.evolve(&self.initial, t)?, &self.filter)
    }

    /// Quotient rule on `FρF†/tr(FρF†)`.
    fn derivative(&self, t: f64) -> Result<Matrix2> {
        let evolved = self.channel.evolve(&self.initial, t)?;
        let norm = success_probability(&evolved, &self.filter);
        if norm <= MIN_SUCCESS_PROBABILITY {
            return Err(QslError::DegenerateFilter(norm));
        }
        let rate = self.filter.conjugate(&self.channel.evolve_rate(&self.initial, t)?);
        let norm_rate = rate.trace().re;
        let state = apply_filter(&evolved, &self.filter)?.to_matrix();
        Ok((rate - state.scale(norm_rate)).scale(1.0 / norm))
    }

    fn kink_indicator(&self, t: f64) -> Result<Option<f64>> {
        self.channel.coherence_rate(t).map(Some)
    }
}

/// Closed-form filtered state for a coherence factor `q`.
pub fn filtered_closed_form(k: f64, q: f64) -> Result<QubitDensity> {
    QubitDensity::new(1.0 - k, k, Complex64::new((k * (1.0 - k)).sqrt() * q, 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{CoherenceModel, RtnSpec};
    use proptest::prelude::*;

    fn density(p: f64, r: f64, phi: f64) -> QubitDensity {
        let max = (p * (1.0 - p)).sqrt();
        QubitDensity::new(p, 1.0 - p, Complex64::from_polar(r * max, phi)).unwrap()
    }

    #[test]
    fn half_filter_is_identity() {
        let f = FilterOp::new(0.5).unwrap();
        let rho = density(0.3, 0.7, 1.1);
        let out = apply_filter(&rho, &f).unwrap();
        assert!(out.to_matrix().max_abs_diff(&rho.to_matrix()) < 1e-15);
    }

    #[test]
    fn filtered_plus_state_matches_closed_form() {
        // Pre-filter state d0 = d1 = 1/2, c = p/2; the unnormalized output is
        // ((1−k)/2, k/2, √(k(1−k))·p/2) with trace 1/2.
        for &k in &[0.1, 0.37, 0.9] {
            let p = 0.42;
            let f = FilterOp::new(k).unwrap();
            let pre = QubitDensity::new(0.5, 0.5, Complex64::new(p / 2.0, 0.0)).unwrap();
            assert!((success_probability(&pre, &f) - 0.5).abs() < 1e-15);
            let raw = f.conjugate(&pre.to_matrix());
            assert!((raw.a11.re - (1.0 - k) / 2.0).abs() < 1e-15);
            assert!((raw.a22.re - k / 2.0).abs() < 1e-15);
            assert!((raw.a12.re - (k * (1.0 - k)).sqrt() * p / 2.0).abs() < 1e-15);
            let out = apply_filter(&pre, &f).unwrap();
            let want = filtered_closed_form(k, p).unwrap();
            assert!(out.to_matrix().max_abs_diff(&want.to_matrix()) < 1e-15);
        }
    }

    #[test]
    fn mixed_state_filter() {
        let f = FilterOp::new(0.25).unwrap();
        let out = apply_filter(&QubitDensity::maximally_mixed(), &f).unwrap();
        assert!((out.d0() - 0.75).abs() < 1e-15 && (out.d1() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn success_probability_examples() {
        let f = FilterOp::new(0.3).unwrap();
        assert!((success_probability(&QubitDensity::maximally_mixed(), &f) - 0.5).abs() < 1e-15);
        let pole = QubitDensity::new(1.0, 0.0, Complex64::new(0.0, 0.0)).unwrap();
        assert!((success_probability(&pole, &f) - 0.7).abs() < 1e-15);
    }

    #[test]
    fn degenerate_filter_reported() {
        let pole = QubitDensity::new(1.0, 0.0, Complex64::new(0.0, 0.0)).unwrap();
        let f = FilterOp::new(1.0 - 1e-16).unwrap();
        assert!(matches!(apply_filter(&pole, &f), Err(QslError::DegenerateFilter(_))));
        assert!(FilterOp::new(0.0).is_err());
        assert!(FilterOp::new(1.0).is_err());
    }

    #[derive(Debug)]
    struct Fixed(f64);

    impl CoherenceModel for Fixed {
        fn coherence(&self, _t: f64) -> Result<f64> {
            Ok(self.0)
        }
        fn coherence_rate(&self, _t: f64) -> Result<f64> {
            Ok(0.0)
        }
        fn is_non_markovian(&self) -> bool {
            false
        }
    }

    #[test]
    fn trajectory_examples() {
        let rtn = DephasingChannel::rtn(RtnSpec::new(2.0, 1.0).unwrap());
        let half = FilteredTrajectory::new(rtn.clone(), FilterOp::new(0.5).unwrap());
        for i in 0..10 {
            let t = 0.37 * i as f64;
            let unfiltered = rtn.evolve(&QubitDensity::plus(), t).unwrap();
            let filtered = half.state(t).unwrap();
            assert!(filtered.to_matrix().max_abs_diff(&unfiltered.to_matrix()) < 1e-15);
        }

        let k = 0.2;
        let traj = FilteredTrajectory::new(rtn.clone(), FilterOp::new(k).unwrap());
        let at0 = traj.state(0.0).unwrap();
        let want = filtered_closed_form(k, 1.0).unwrap();
        assert!(at0.to_matrix().max_abs_diff(&want.to_matrix()) < 1e-15);
        assert!((crate::algebra::purity(&at0) - 1.0).abs() < 1e-15);

        let dead = FilteredTrajectory::new(DephasingChannel::new(Fixed(0.0)), FilterOp::new(k).unwrap());
        let out = dead.state(5.0).unwrap();
        assert!((out.d0() - 0.8).abs() < 1e-15 && out.coherence().norm() == 0.0);
    }

    #[test]
    fn trajectory_derivative_matches_finite_difference() {
        let rtn = DephasingChannel::rtn(RtnSpec::new(2.0, 1.0).unwrap());
        let traj = FilteredTrajectory::new(rtn, FilterOp::new(0.3).unwrap());
        for i in 1..15 {
            let t = 0.29 * i as f64;
            let h = 1e-6;
            let fd = (traj.state(t + h).unwrap().to_matrix() - traj.state(t - h).unwrap().to_matrix()).scale(0.5 / h);
            let d = traj.derivative(t).unwrap();
            assert!(d.max_abs_diff(&fd) < 1e-8, "t = {t}");
        }
    }

    #[test]
    fn trajectory_matches_closed_form_on_grid() {
        let spec = RtnSpec::new(0.2, 1.0).unwrap();
        let ch = DephasingChannel::rtn(spec);
        for &k in &[0.1, 0.5, 0.7] {
            let traj = FilteredTrajectory::new(ch.clone(), FilterOp::new(k).unwrap());
            for i in 0..50 {
                let t = 0.2 * i as f64;
                let want = filtered_closed_form(k, ch.coherence(t).unwrap()).unwrap();
                assert!(traj.state(t).unwrap().to_matrix().max_abs_diff(&want.to_matrix()) < 1e-12);
            }
        }
    }

    proptest! {
        #[test]
        fn filter_output_is_valid_and_commutes(
            p in 0.01..0.99f64, r in 0.0..=1.0f64, phi in 0.0..std::f64::consts::TAU,
            k1 in 0.01..0.99f64, k2 in 0.01..0.99f64,
        ) {
            let rho = density(p, r, phi);
            let f1 = FilterOp::new(k1).unwrap();
            let f2 = FilterOp::new(k2).unwrap();
            let a = apply_filter(&apply_filter(&rho, &f1).unwrap(), &f2).unwrap();
            let b = apply_filter(&apply_filter(&rho, &f2).unwrap(), &f1).unwrap();
            prop_assert!(a.to_matrix().max_abs_diff(&b.to_matrix()) < 1e-12);
            prop_assert!(a.d0() * a.d1() - a.coherence().norm_sqr() >= -1e-12);
        }

        #[test]
        fn complementary_filters_swap_populations(k in 0.01..0.99f64, q in -1.0..=1.0f64) {
            let pre = QubitDensity::new(0.5, 0.5, Complex64::new(q / 2.0, 0.0)).unwrap();
            let a = apply_filter(&pre, &FilterOp::new(k).unwrap()).unwrap();
            let b = apply_filter(&pre, &FilterOp::new(1.0 - k).unwrap()).unwrap();
            prop_assert!((a.d0() - b.d1()).abs() < 1e-12);
            prop_assert!((a.coherence().norm() - b.coherence().norm()).abs() < 1e-12);
        }
    }
}
