//! Brute-force validators that share no numerics with the engine: dense
//! left-Riemann sums over finite differences, Monte-Carlo telegraph noise,
//! the analytic Ohmic integral and explicit Kraus sums.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::algebra::{Matrix2, QubitDensity};
use crate::error::{invalid, QslError, Result};
use crate::filtering::{FilterOp, FilteredTrajectory};
use crate::models::{gamma_ohmic, ChannelSpec, CoherenceModel, DephasingChannel, OhmicSpec, RtnSpec};
use crate::qsl::{qsl_closed_form, qsl_general, QslResult, QuadConfig, Trajectory, Variant};

/// Minimum grid size accepted by the Riemann oracle.
pub const RIEMANN_MIN_POINTS: usize = 1000;

/// Minimum number of telegraph trajectories per Monte-Carlo estimate.
pub const MC_MIN_TRAJECTORIES: usize = 10_000;

const MC_BATCH: usize = 4096;

/// Samples `traj` at `n + 1` equispaced times covering `[tau, tau + tau_d]`.
pub fn sample_trajectory<T: Trajectory + ?Sized>(
    traj: &T,
    tau: f64,
    tau_d: f64,
    n: usize,
) -> Result<Vec<QubitDensity>> {
    (0..=n).map(|j| traj.state(tau + tau_d * j as f64 / n as f64)).collect()
}

/// Samples the trace-½ filtered matrices `FρF†` on the same grid.
pub fn sample_unnormalized(traj: &FilteredTrajectory, tau: f64, tau_d: f64, n: usize) -> Result<Vec<Matrix2>> {
    (0..=n)
        .map(|j| traj.unnormalized(tau + tau_d * j as f64 / n as f64))
        .collect()
}

/// Eigenvalues of a Hermitian 2×2 matrix, descending, from its trace and
/// determinant.
fn hermitian_spectrum(m: &Matrix2) -> (f64, f64) {
    let tr = m.trace().re;
    let det = m.det().re;
    let disc = (0.25 * tr * tr - det).max(0.0).sqrt();
    (0.5 * tr + disc, 0.5 * tr - disc)
}

/// Singular values of a 2×2 matrix as square roots of the eigenvalues of M†M.
fn gram_singular_values(m: &Matrix2) -> (f64, f64) {
    let (a, b) = hermitian_spectrum(&(m.adjoint() * *m));
    (a.max(0.0).sqrt(), b.max(0.0).sqrt())
}

/// Left-Riemann evaluation of the unified bound from `N + 1` samples of a
/// (possibly unnormalized) Hermitian trajectory on `[tau, tau + tau_d]`.
pub fn riemann_qsl_matrices(samples: &[Matrix2], tau: f64, tau_d: f64) -> Result<QslResult> {
    let n = samples.len().saturating_sub(1);
    if n < RIEMANN_MIN_POINTS {
        return Err(invalid(
            "N",
            format!("need at least {RIEMANN_MIN_POINTS} grid intervals, got {n}"),
        ));
    }
    let first = samples[0];
    let last = samples[n];
    let purity_tau = (first * first).trace().re;
    let numerator = (first * (last - first)).trace().re;
    let (l1, l2) = hermitian_spectrum(&first);

    let h = tau_d / n as f64;
    let mut ml = 0.0;
    let mut mt = 0.0;
    for w in samples.windows(2) {
        let d = (w[1] - w[0]).scale(1.0 / h);
        let (s1, s2) = gram_singular_values(&d);
        ml += (s1 * l1 + s2 * l2) * h;
        mt += (s1 * s1 + s2 * s2).sqrt() * h;
    }
    QslResult::from_parts(tau, tau_d, numerator, purity_tau, ml / tau_d, mt / tau_d)
}

/// [`riemann_qsl_matrices`] over sampled densities.
pub fn riemann_qsl(samples: &[QubitDensity], tau: f64, tau_d: f64) -> Result<QslResult> {
    let matrices: Vec<Matrix2> = samples.iter().map(QubitDensity::to_matrix).collect();
    riemann_qsl_matrices(&matrices, tau, tau_d)
}

/// Monte-Carlo estimate of the telegraph-noise coherence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n_trajectories: usize,
    pub seed: u64,
}

impl McEstimate {
    /// Fails with [`QslError::Unresolved`] when the standard error exceeds
    /// `tolerance`.
    pub fn require_resolved(&self, tolerance: f64) -> Result<&Self> {
        if self.std_error > tolerance {
            return Err(QslError::Unresolved {
                std_error: self.std_error,
                tolerance,
                n: self.n_trajectories,
            });
        }
        Ok(self)
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    n: usize,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    fn merge(self, other: Moments) -> Moments {
        if self.n == 0 {
            return other;
        }
        let n = self.n + other.n;
        let d = other.mean - self.mean;
        Moments {
            n,
            mean: self.mean + d * other.n as f64 / n as f64,
            m2: self.m2 + other.m2 + d * d * (self.n as f64 * other.n as f64) / n as f64,
        }
    }
}

/// Accumulated phase `∫₀ᵗ ζ dt′` of one telegraph path with switching rate
/// `1/(2Δ)` and a random initial sign.
fn telegraph_phase(rng: &mut ChaCha8Rng, t: f64, mean_hold: f64) -> f64 {
    let mut sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
    let mut elapsed = 0.0;
    let mut phase = 0.0;
    loop {
        // 1 − U lies in (0, 1], keeping the logarithm finite.
        let hold = -mean_hold * (1.0 - rng.random::<f64>()).ln();
        if elapsed + hold >= t {
            return phase + sign * (t - elapsed);
        }
        phase += sign * hold;
        elapsed += hold;
        sign = -sign;
    }
}

/// Estimates `E[cos(2α∫₀ᵗ ζ dt′)]` from `n` telegraph paths.
///
/// Paths are grouped in fixed batches; batch `b` draws from the ChaCha8
/// stream `b` of `seed`, and batch moments are merged in index order, so the
/// estimate does not depend on the worker count.
pub fn rtn_monte_carlo(spec: &RtnSpec, t: f64, n: usize, seed: u64) -> Result<McEstimate> {
    if n < MC_MIN_TRAJECTORIES {
        return Err(invalid(
            "n",
            format!("need at least {MC_MIN_TRAJECTORIES} trajectories, got {n}"),
        ));
    }
    if !(t.is_finite() && t >= 0.0) {
        return Err(invalid("t", format!("must be finite and nonnegative, got {t}")));
    }
    let mean_hold = 2.0 * spec.delta();
    let two_alpha = 2.0 * spec.alpha();
    let batches = n.div_ceil(MC_BATCH);
    let parts: Vec<Moments> = (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b as u64);
            let count = MC_BATCH.min(n - b * MC_BATCH);
            let mut m = Moments::default();
            for _ in 0..count {
                m.push((two_alpha * telegraph_phase(&mut rng, t, mean_hold)).cos());
            }
            m
        })
        .collect();
    let total = parts.into_iter().fold(Moments::default(), Moments::merge);
    let variance = total.m2 / (total.n - 1) as f64;
    Ok(McEstimate {
        mean: total.mean,
        std_error: (variance / total.n as f64).sqrt(),
        n_trajectories: total.n,
        seed,
    })
}

/// `Γ(t)` for the Ohmic (`s = 1`) bath: `2 ln(1 + ω_c² t²)`.
pub fn gamma_analytic_s1(omega_c: f64, t: f64) -> f64 {
    2.0 * (omega_c * omega_c * t * t).ln_1p()
}

/// Largest entrywise gap between the Kraus-sum evolution and the state with
/// its coherence multiplied by the decoherence factor.
pub fn kraus_vs_factor(channel: &DephasingChannel, rho0: &QubitDensity, ts: &[f64]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for &t in ts {
        let (e0, e1) = channel.kraus_pair(t)?;
        let m = rho0.to_matrix();
        let kraus = e0 * m * e0.adjoint() + e1 * m * e1.adjoint();
        let q = channel.coherence(t)?;
        let direct = Matrix2::new(m.a11, m.a12 * q, m.a21 * q, m.a22);
        worst = worst.max(kraus.max_abs_diff(&direct));
    }
    Ok(worst)
}

/// How thoroughly [`run_validation`] exercises the oracles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Quick,
    Full,
}

/// Deliberate defects used to prove the suite detects them.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fault {
    /// Negates the telegraph coherence rate.
    RtnRateSign,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ValidationOptions {
    pub level: Level,
    pub seed: u64,
    pub fault: Option<Fault>,
}

/// One oracle comparison.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub expected: f64,
    pub got: f64,
    /// Deviation measure compared against `tolerance`.
    pub deviation: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    fn new(name: impl Into<String>, expected: f64, got: f64, deviation: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            expected,
            got,
            deviation,
            tolerance,
            pass: deviation <= tolerance,
        }
    }

    fn errored(name: impl Into<String>, err: &QslError) -> Self {
        let mut c = Self::new(
            format!("{} ({err})", name.into()),
            f64::NAN,
            f64::NAN,
            f64::INFINITY,
            0.0,
        );
        c.pass = false;
        c
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub level: Level,
    pub seed: u64,
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }
}

#[derive(Debug)]
struct NegatedRate(RtnSpec);

impl CoherenceModel for NegatedRate {
    fn coherence(&self, t: f64) -> Result<f64> {
        self.0.coherence(t)
    }
    fn coherence_rate(&self, t: f64) -> Result<f64> {
        Ok(-self.0.coherence_rate(t)?)
    }
    fn is_non_markovian(&self) -> bool {
        self.0.is_non_markovian()
    }
}

fn rtn_channel(spec: RtnSpec, fault: Option<Fault>) -> DephasingChannel {
    match fault {
        Some(Fault::RtnRateSign) => DephasingChannel::new(NegatedRate(spec)),
        None => DephasingChannel::rtn(spec),
    }
}

fn relative(got: f64, want: f64) -> f64 {
    let d = (got - want).abs();
    if d == 0.0 {
        0.0
    } else {
        d / want.abs()
    }
}

fn push_result(checks: &mut Vec<Check>, name: String, r: Result<Check>) {
    match r {
        Ok(c) => checks.push(c),
        Err(e) => checks.push(Check::errored(name, &e)),
    }
}

fn rate_check(name: &str, channel: &DephasingChannel, ts: &[f64], tolerance: f64) -> Result<Check> {
    let mut worst = (0.0, 0.0, 0.0);
    for &t in ts {
        let h = 1e-5 * t.max(1.0);
        let fd = (channel.coherence(t + h)? - channel.coherence(t - h)?) / (2.0 * h);
        let rate = channel.coherence_rate(t)?;
        let dev = (rate - fd).abs();
        if dev >= worst.2 {
            worst = (fd, rate, dev);
        }
    }
    Ok(Check::new(name, worst.0, worst.1, worst.2, tolerance))
}

/// Runs every oracle comparison and collects a pass/fail report.
pub fn run_validation(opts: &ValidationOptions) -> ValidationReport {
    let full = opts.level == Level::Full;
    let mut checks = Vec::new();

    // Ohmic quadrature against the analytic s = 1 integral.
    let n_gamma = if full { 200 } else { 40 };
    for &omega_c in &[0.5, 1.0, 2.0] {
        let name = format!("gamma_ohmic[s=1, omega_c={omega_c}]");
        let r = (|| {
            let spec = OhmicSpec::new(1.0, omega_c)?;
            let mut worst = (0.0, 0.0, 0.0);
            for i in 1..=n_gamma {
                let t = 20.0 * i as f64 / n_gamma as f64;
                let want = gamma_analytic_s1(omega_c, t);
                let got = gamma_ohmic(&spec, t)?;
                let dev = relative(got, want);
                if dev >= worst.2 {
                    worst = (want, got, dev);
                }
            }
            Ok(Check::new(name.clone(), worst.0, worst.1, worst.2, 1e-8))
        })();
        push_result(&mut checks, name, r);
    }

    // Analytic rates against central differences of the factors.
    let ts: Vec<f64> = (1..=40).map(|i| 0.25 * i as f64).collect();
    for (alpha, delta) in [(0.2, 1.0), (2.0, 1.0), (0.25, 1.0), (0.7, 0.5)] {
        let name = format!("coherence_rtn_dot[alpha={alpha}, delta={delta}]");
        let r =
            RtnSpec::new(alpha, delta).and_then(|spec| rate_check(&name, &rtn_channel(spec, opts.fault), &ts, 1e-6));
        push_result(&mut checks, name, r);
    }
    for s in [0.5, 1.0, 3.5] {
        let name = format!("gamma_dot_ohmic[s={s}]");
        let r = OhmicSpec::new(s, 1.0)
            .and_then(|spec| rate_check(&name, &DephasingChannel::phase_damping(spec), &ts, 1e-6));
        push_result(&mut checks, name, r);
    }

    // Kraus sums against coherence scaling.
    let grid: Vec<f64> = (0..=100).map(|i| 0.1 * i as f64).collect();
    for (label, spec) in [
        (
            "phase-damping s=1",
            ChannelSpec::PhaseDamping(OhmicSpec::new(1.0, 1.0).expect("valid")),
        ),
        (
            "rtn alpha*delta=2",
            ChannelSpec::Rtn(RtnSpec::new(2.0, 1.0).expect("valid")),
        ),
    ] {
        let name = format!("kraus_vs_factor[{label}]");
        let r = kraus_vs_factor(&spec.direct_channel(), &QubitDensity::plus(), &grid)
            .map(|dev| Check::new(name.clone(), 0.0, dev, dev, 1e-12));
        push_result(&mut checks, name, r);
    }

    // Engine against the dense Riemann oracle and the closed form.
    let (n_riemann, riemann_tol) = if full { (100_000, 1e-4) } else { (10_000, 1e-3) };
    let cfg = QuadConfig::default();
    let points: &[(ChannelSpec, f64, f64)] = &[
        (
            ChannelSpec::PhaseDamping(OhmicSpec::new(0.5, 1.0).expect("valid")),
            0.3,
            2.0,
        ),
        (
            ChannelSpec::PhaseDamping(OhmicSpec::new(1.0, 1.0).expect("valid")),
            0.5,
            1.0,
        ),
        (
            ChannelSpec::PhaseDamping(OhmicSpec::new(3.5, 1.0).expect("valid")),
            0.7,
            1.5,
        ),
        (ChannelSpec::Rtn(RtnSpec::new(0.2, 1.0).expect("valid")), 0.1, 3.0),
        (ChannelSpec::Rtn(RtnSpec::new(2.0, 1.0).expect("valid")), 0.9, 2.25),
    ];
    for (spec, k, tau) in points {
        let name = format!("riemann_qsl[{}, k={k}, tau={tau}]", spec.label());
        let tau_d = 1.0;
        let r = (|| {
            let channel = match spec {
                ChannelSpec::Rtn(r) => rtn_channel(*r, opts.fault),
                other => other.build_channel(tau + tau_d)?,
            };
            let traj = FilteredTrajectory::new(channel.clone(), FilterOp::new(*k)?);
            let engine = qsl_general(&traj, *tau, tau_d, &cfg)?;
            let samples = sample_trajectory(&traj, *tau, tau_d, n_riemann)?;
            let oracle = riemann_qsl(&samples, *tau, tau_d)?;
            let closed = qsl_closed_form(&channel, *k, *tau, tau_d, Variant::Ml, &cfg)?;
            Ok((
                Check::new(
                    name.clone(),
                    oracle.tau_qsl,
                    engine.tau_qsl,
                    relative(engine.tau_qsl, oracle.tau_qsl),
                    riemann_tol,
                ),
                Check::new(
                    format!("qsl_closed_form[{}, k={k}, tau={tau}]", spec.label()),
                    engine.tau_qsl,
                    closed,
                    relative(closed, engine.tau_qsl),
                    1e-8,
                ),
            ))
        })();
        match r {
            Ok((a, b)) => {
                checks.push(a);
                checks.push(b);
            }
            Err(e) => checks.push(Check::errored(name, &e)),
        }
    }

    // Telegraph coherence against simulated noise.
    let n_mc = if full { 100_000 } else { MC_MIN_TRAJECTORIES };
    let mc_points: &[(f64, f64)] = if full {
        &[
            (0.1, 0.5),
            (0.1, 3.0),
            (0.2, 1.0),
            (0.2, 6.0),
            (0.25, 2.0),
            (0.6, 1.0),
            (1.0, 2.5),
            (2.0, 0.3),
            (2.0, 1.0),
            (2.0, 4.0),
        ]
    } else {
        &[(0.2, 1.0), (0.6, 1.0), (2.0, 1.0)]
    };
    for (i, &(alpha_delta, t)) in mc_points.iter().enumerate() {
        let name = format!("rtn_monte_carlo[alpha*delta={alpha_delta}, t={t}]");
        let r = (|| {
            let spec = RtnSpec::new(alpha_delta, 1.0)?;
            let want = spec.coherence(t)?;
            let est = rtn_monte_carlo(&spec, t, n_mc, opts.seed.wrapping_add(i as u64))?;
            Ok(Check::new(
                name.clone(),
                want,
                est.mean,
                (est.mean - want).abs(),
                3.0 * est.std_error,
            ))
        })();
        push_result(&mut checks, name, r);
    }

    ValidationReport {
        level: opts.level,
        seed: opts.seed,
        checks,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::hermitian_eigenvalues;
    use crate::qsl::FnTrajectory;
    use num_complex::Complex64;

    fn real_coherence(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn constant_trajectory_is_zero() {
        let rho = QubitDensity::new(0.6, 0.4, Complex64::new(0.1, -0.2)).unwrap();
        let r = riemann_qsl(&vec![rho; 1001], 0.0, 1.0).unwrap();
        assert_eq!(r.tau_qsl, 0.0);
        assert!(riemann_qsl(&vec![rho; 1000], 0.0, 1.0).is_err());
    }

    #[test]
    fn spectrum_helpers_agree_with_algebra() {
        let rho = QubitDensity::new(0.3, 0.7, Complex64::new(0.2, 0.1)).unwrap();
        let (a, b) = hermitian_spectrum(&rho.to_matrix());
        let (x, y) = hermitian_eigenvalues(&rho);
        assert!((a - x).abs() < 1e-14 && (b - y).abs() < 1e-14);
        let m = Matrix2::from_real(1.0, 2.0, 0.0, 1.0);
        let (s1, s2) = gram_singular_values(&m);
        assert!((s1 - (1.0 + 2f64.sqrt())).abs() < 1e-12);
        assert!((s2 - (2f64.sqrt() - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn markovian_point_converges_at_first_order() {
        let spec = OhmicSpec::new(1.0, 1.0).unwrap();
        let traj = FilteredTrajectory::new(DephasingChannel::phase_damping(spec), FilterOp::new(0.5).unwrap());
        let coarse = riemann_qsl(&sample_trajectory(&traj, 1.0, 1.0, 2000).unwrap(), 1.0, 1.0).unwrap();
        let fine = riemann_qsl(&sample_trajectory(&traj, 1.0, 1.0, 4000).unwrap(), 1.0, 1.0).unwrap();
        // p_τ = e^{−Γ(1)} = 1/4 at s = 1; the normalized state gives τ_ML = 2·½·p_τ·τ_D.
        assert!((fine.tau_ml - 0.25).abs() < 1e-9);
        assert!((fine.tau_mt - 0.25 / 2f64.sqrt()).abs() < 1e-9);
        assert!((coarse.tau_qsl - fine.tau_qsl).abs() <= 1e-9);
    }

    #[test]
    fn riemann_error_shrinks_with_grid() {
        // c(t) = 0.4 − 0.1(t − t₀)² turns inside [0.2, 1.2] between grid nodes.
        let t0 = 0.7 + 1.234_567e-4;
        let c = move |t: f64| 0.4 - 0.1 * (t - t0) * (t - t0);
        let traj = FnTrajectory {
            state: move |t: f64| QubitDensity::new(0.5, 0.5, real_coherence(c(t))),
            derivative: move |t: f64| {
                let d = -0.2 * (t - t0);
                Ok(Matrix2::from_real(0.0, d, d, 0.0))
            },
        };
        let (tau, tau_d) = (0.2, 1.0);
        let variation = 2.0 * c(t0) - c(tau) - c(tau + tau_d);
        let exact_mt = 2.0 * c(tau) * (c(tau + tau_d) - c(tau)).abs() / (2f64.sqrt() * variation);
        let mut last = f64::INFINITY;
        for n in [1000, 2000, 4000, 8000] {
            let r = riemann_qsl(&sample_trajectory(&traj, tau, tau_d, n).unwrap(), tau, tau_d).unwrap();
            let err = (r.tau_mt - exact_mt).abs();
            assert!(err * n as f64 <= 1e-3, "N = {n}: {err}");
            assert!(err <= last * 1.000_001 || err < 1e-12);
            last = err;
        }
    }

    #[test]
    fn paper_variant_is_mt_bound_of_trace_half_matrices() {
        let cfg = QuadConfig::default();
        for (spec, k, tau) in [
            (ChannelSpec::PhaseDamping(OhmicSpec::new(1.0, 1.0).unwrap()), 0.5, 1.0),
            (ChannelSpec::PhaseDamping(OhmicSpec::new(0.5, 1.0).unwrap()), 0.3, 0.5),
            (ChannelSpec::Rtn(RtnSpec::new(0.2, 1.0).unwrap()), 0.8, 2.0),
        ] {
            let ch = spec.build_channel(tau + 1.0).unwrap();
            let traj = FilteredTrajectory::new(ch.clone(), FilterOp::new(k).unwrap());
            let raw = sample_unnormalized(&traj, tau, 1.0, 20_000).unwrap();
            let oracle = riemann_qsl_matrices(&raw, tau, 1.0).unwrap();
            let paper = qsl_closed_form(&ch, k, tau, 1.0, Variant::Paper, &cfg).unwrap();
            assert!(relative(oracle.tau_mt, paper) < 1e-6, "{} vs {}", oracle.tau_mt, paper);
            let engine = qsl_general(&traj, tau, 1.0, &cfg).unwrap();
            assert!((engine.tau_qsl / paper - 2.0 * 2f64.sqrt()).abs() < 1e-9);
        }
        let half = QslResult::from_parts(0.0, 1.0, 0.0, 0.5, 0.0, 0.0).unwrap();
        assert_eq!(half.tau_qsl, 0.0);
    }

    #[test]
    fn monte_carlo_is_reproducible_and_calibrated() {
        let spec = RtnSpec::new(2.0, 1.0).unwrap();
        let a = rtn_monte_carlo(&spec, 1.0, 20_000, 7).unwrap();
        let b = rtn_monte_carlo(&spec, 1.0, 20_000, 7).unwrap();
        assert_eq!(a, b);
        let want = spec.coherence(1.0).unwrap();
        assert!((a.mean - want).abs() <= 3.0 * a.std_error);

        let other = rtn_monte_carlo(&spec, 1.0, 20_000, 8).unwrap();
        let combined = (a.std_error.powi(2) + other.std_error.powi(2)).sqrt();
        assert!((a.mean - other.mean).abs() <= 3.0 * combined);

        let zero = rtn_monte_carlo(&spec, 0.0, 10_000, 1).unwrap();
        assert_eq!(zero.mean, 1.0);
        assert!(zero.std_error < 1e-15);
        assert!(rtn_monte_carlo(&spec, 1.0, 9_999, 1).is_err());
        assert!(matches!(a.require_resolved(1e-6), Err(QslError::Unresolved { .. })));
        assert!(a.require_resolved(1.0).is_ok());
    }

    #[test]
    fn monte_carlo_small_time_expansion() {
        let spec = RtnSpec::new(0.5, 1.0).unwrap();
        let t = 0.05;
        let est = rtn_monte_carlo(&spec, t, 40_000, 3).unwrap();
        let taylor = 1.0 - 2.0 * 0.25 * t * t;
        assert!((est.mean - taylor).abs() < 3.0 * est.std_error + 1e-4);
    }

    #[test]
    fn analytic_gamma_examples() {
        assert_eq!(gamma_analytic_s1(1.0, 0.0), 0.0);
        assert!((gamma_analytic_s1(1.0, 1.0) - 2.0 * 2f64.ln()).abs() < 1e-15);
        assert!((gamma_analytic_s1(2.0, 1.0) - 2.0 * 5f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn kraus_vs_factor_examples() {
        let grid: Vec<f64> = (0..50).map(|i| 0.2 * i as f64).collect();
        let diag = QubitDensity::new(0.3, 0.7, Complex64::new(0.0, 0.0)).unwrap();
        let pd = DephasingChannel::phase_damping(OhmicSpec::new(1.0, 1.0).unwrap());
        assert!(kraus_vs_factor(&pd, &diag, &grid).unwrap() < 1e-15);
        assert!(kraus_vs_factor(&pd, &QubitDensity::plus(), &grid).unwrap() < 1e-12);
        let rtn = DephasingChannel::rtn(RtnSpec::new(2.0, 1.0).unwrap());
        assert!(kraus_vs_factor(&rtn, &QubitDensity::plus(), &grid).unwrap() < 1e-12);
    }

    #[test]
    fn quick_validation_passes_and_fault_is_named() {
        let ok = run_validation(&ValidationOptions {
            level: Level::Quick,
            seed: 11,
            fault: None,
        });
        let failures: Vec<_> = ok.failures().collect();
        assert!(failures.is_empty(), "unexpected failures: {failures:?}");
        let bad = run_validation(&ValidationOptions {
            level: Level::Quick,
            seed: 11,
            fault: Some(Fault::RtnRateSign),
        });
        assert!(!bad.passed());
        assert!(bad.failures().all(|c| c.name.starts_with("coherence_rtn_dot")));
    }
}
