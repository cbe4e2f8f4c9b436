//! Unital qubit dephasing channels.
//!
//! Both models act on a qubit by scaling the off-diagonal element of the
//! density matrix by a real coherence factor `q(t)`:
//!
//! * phase damping in a zero-temperature Ohmic-like bath, `q(t) = e^{−Γ(t)}`
//!   with `Γ(t) = 4∫₀^∞ J(ω)(1 − cos ωt)/ω² dω` and
//!   `J(ω) = ω_c^{1−s} ω^s e^{−ω/ω_c}`;
//! * dephasing by random telegraph noise (RTN) with amplitude `α` and
//!   switching time `Δ`, `q(t) = Λ_t`.
//!
//! The Kraus pair of either channel is `E₁ = √((1+q)/2)·σ₀`,
//! `E₂ = √((1−q)/2)·σ₃`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::algebra::{Matrix2, QubitDensity};
use crate::error::{invalid, QslError, Result};
use crate::quadrature::{integrate_panels, AdaptiveOptions};

/// Tolerance on `|q| ≤ 1` before a coherence factor is treated as a model fault.
pub const COHERENCE_TOL: f64 = 1e-12;

/// Ohmicity window in which phase damping shows memory effects.
pub const OHMIC_NON_MARKOVIAN: (f64, f64) = (2.5, 5.5);

/// `αΔ` threshold above which telegraph dephasing is non-Markovian.
pub const RTN_NON_MARKOVIAN_ALPHA_DELTA: f64 = 0.5;

fn check_time(t: f64) -> Result<()> {
    if t.is_finite() && t >= 0.0 {
        Ok(())
    } else {
        Err(invalid("t", format!("time must be finite and nonnegative, got {t}")))
    }
}

/// A real coherence factor `q(t)` with its time derivative.
pub trait CoherenceModel: Send + Sync + fmt::Debug {
    fn coherence(&self, t: f64) -> Result<f64>;

    fn coherence_rate(&self, t: f64) -> Result<f64>;

    fn coherence_and_rate(&self, t: f64) -> Result<(f64, f64)> {
        Ok((self.coherence(t)?, self.coherence_rate(t)?))
    }

    fn is_non_markovian(&self) -> bool;
}

// ---------------------------------------------------------------------------
// Ohmic phase damping

/// Ohmic-like spectral density parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OhmicSpec {
    s: f64,
    omega_c: f64,
}

impl OhmicSpec {
    pub fn new(s: f64, omega_c: f64) -> Result<Self> {
        if !(s.is_finite() && s > 0.0) {
            return Err(invalid("s", format!("Ohmicity must be positive, got {s}")));
        }
        if !(omega_c.is_finite() && omega_c > 0.0) {
            return Err(invalid(
                "omega_c",
                format!("cutoff frequency must be positive, got {omega_c}"),
            ));
        }
        Ok(Self { s, omega_c })
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn omega_c(&self) -> f64 {
        self.omega_c
    }

    /// J(ω) = ω_c^{1−s} ω^s e^{−ω/ω_c}
    pub fn spectral_density(&self, omega: f64) -> f64 {
        if omega <= 0.0 {
            return 0.0;
        }
        self.omega_c.powf(1.0 - self.s) * omega.powf(self.s) * (-omega / self.omega_c).exp()
    }
}

/// `[Γ, dΓ/dt, d²Γ/dt²]` at `t`. All three integrals share their quadrature
/// nodes.
///
/// In the scaled frequency `u = ω/ω_c` and time `T = ω_c t`,
/// `Γ = 4∫ u^{s−2} e^{−u}(1 − cos uT) du`,
/// `dΓ/dt = 4ω_c ∫ u^{s−1} e^{−u} sin(uT) du` and
/// `d²Γ/dt² = 4ω_c² ∫ u^s e^{−u} cos(uT) du`. The interval `[0, u₀]` with
/// `u₀|−1 + iT| = ½` is integrated term by term from the power series of
/// `e^{u(−1+iT)}`, which removes the `u → 0` endpoint behaviour; the rest of
/// `[u₀, W]` goes to adaptive Gauss–Kronrod on panels of width at most
/// `π/(8T)`, with `W` chosen so the dropped tail is below 1e-13.
pub fn gamma_derivatives(spec: &OhmicSpec, t: f64) -> Result<[f64; 3]> {
    check_time(t)?;
    let s = spec.s;
    let wc = spec.omega_c;
    if t == 0.0 {
        // ∫ u^s e^{−u} du = Γ_E(s + 1)
        return Ok([0.0, 0.0, 4.0 * wc * wc * gamma_fn(s + 1.0)]);
    }
    let big_t = wc * t;
    let z = Complex64::new(-1.0, big_t);
    let u0 = 0.5 / z.norm();

    // e^{−u}(1 − cos uT) = Σ cₙ uⁿ, e^{−u} sin uT = Σ dₙ uⁿ,
    // e^{−u} cos uT = Σ eₙ uⁿ.
    let mut series = [0.0; 3];
    let mut zn = Complex64::new(1.0, 0.0);
    let mut neg_one_n = 1.0;
    let mut fact = 1.0;
    // u₀^{s−1+n} at step n
    let mut u0_pow = u0.powf(s - 1.0);
    series[2] = u0_pow * u0 * u0 / (s + 1.0);
    for n in 1..60 {
        zn *= z;
        neg_one_n = -neg_one_n;
        fact *= n as f64;
        u0_pow *= u0;
        let nf = n as f64;
        let terms = [
            (neg_one_n - zn.re) / fact * u0_pow / (s - 1.0 + nf),
            zn.im / fact * u0_pow * u0 / (s + nf),
            zn.re / fact * u0_pow * u0 * u0 / (s + 1.0 + nf),
        ];
        let mut converged = n > 4;
        for (acc, term) in series.iter_mut().zip(terms) {
            *acc += term;
            converged &= term.abs() <= 1e-18 * acc.abs();
        }
        if converged {
            break;
        }
    }

    let upper = tail_cutoff(s);
    let width = (PI / (8.0 * big_t)).min(0.5);
    let integrand = |u: f64| {
        let base = ((s - 2.0) * u.ln() - u).exp();
        // 1 − cos x = 2 sin²(x/2), sin x = 2 sin(x/2) cos(x/2)
        let (sh, ch) = (0.5 * u * big_t).sin_cos();
        let one_minus_cos = 2.0 * sh * sh;
        [
            base * one_minus_cos,
            2.0 * base * u * sh * ch,
            base * u * u * (1.0 - one_minus_cos),
        ]
    };
    let integral = integrate_panels(integrand, u0, upper, width, AdaptiveOptions::default())
        .map_err(|reason| QslError::Quadrature { t, reason })?;

    let gamma = 4.0 * (series[0] + integral.value[0]);
    let rate = 4.0 * wc * (series[1] + integral.value[1]);
    let accel = 4.0 * wc * wc * (series[2] + integral.value[2]);
    if !(gamma.is_finite() && rate.is_finite() && accel.is_finite()) {
        return Err(QslError::Quadrature {
            t,
            reason: "non-finite result".into(),
        });
    }
    Ok([gamma.max(0.0), rate, accel])
}

/// Γ(t) and dΓ/dt.
pub fn gamma_and_rate(spec: &OhmicSpec, t: f64) -> Result<(f64, f64)> {
    gamma_derivatives(spec, t).map(|[g, r, _]| (g, r))
}

/// Euler Γ function for positive arguments (Lanczos, g = 7, n = 9).
fn gamma_fn(x: f64) -> f64 {
    const G: f64 = 7.0;
    #[allow(clippy::excessive_precision)]
    const C: [f64; 9] = [
        0.999_999_999_999_809_93,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_13,
        -176.615_029_162_140_59,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_571_6e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        return PI / ((PI * x).sin() * gamma_fn(1.0 - x));
    }
    let x = x - 1.0;
    let mut a = C[0];
    let t = x + G + 0.5;
    for (i, c) in C.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    (2.0 * PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * a
}

/// Upper integration limit W (in units of ω_c) such that
/// `8∫_W^∞ u^{s−1} e^{−u} du < 1e-13`.
fn tail_cutoff(s: f64) -> f64 {
    let a = s - 1.0;
    let mut w: f64 = 30.0_f64.max(4.0 * a);
    // For W ≥ 2a the tail is bounded by 2 W^a e^{−W}.
    while 16.0 * (a * w.ln() - w).exp() > 1e-13 {
        w += 5.0;
    }
    w
}

/// Γ(t) by quadrature.
pub fn gamma_ohmic(spec: &OhmicSpec, t: f64) -> Result<f64> {
    gamma_and_rate(spec, t).map(|(g, _)| g)
}

/// dΓ/dt by quadrature of the differentiated integrand.
pub fn gamma_dot_ohmic(spec: &OhmicSpec, t: f64) -> Result<f64> {
    gamma_and_rate(spec, t).map(|(_, r)| r)
}

/// Decoherence factor `p_t = e^{−Γ(t)}`.
pub fn coherence_pd(spec: &OhmicSpec, t: f64) -> Result<f64> {
    Ok((-gamma_ohmic(spec, t)?).exp())
}

impl CoherenceModel for OhmicSpec {
    fn coherence(&self, t: f64) -> Result<f64> {
        coherence_pd(self, t)
    }

    fn coherence_rate(&self, t: f64) -> Result<f64> {
        self.coherence_and_rate(t).map(|(_, r)| r)
    }

    fn coherence_and_rate(&self, t: f64) -> Result<(f64, f64)> {
        let (g, rate) = gamma_and_rate(self, t)?;
        let p = (-g).exp();
        Ok((p, -rate * p))
    }

    fn is_non_markovian(&self) -> bool {
        (OHMIC_NON_MARKOVIAN.0..=OHMIC_NON_MARKOVIAN.1).contains(&self.s)
    }
}

// ---------------------------------------------------------------------------
// Random telegraph noise

/// Telegraph-noise parameters: amplitude `alpha` and switching time `delta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RtnSpec {
    alpha: f64,
    delta: f64,
}

impl RtnSpec {
    pub fn new(alpha: f64, delta: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(invalid("alpha", format!("coupling must be positive, got {alpha}")));
        }
        if !(delta.is_finite() && delta > 0.0) {
            return Err(invalid(
                "delta",
                format!("correlation time must be positive, got {delta}"),
            ));
        }
        Ok(Self { alpha, delta })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn alpha_delta(&self) -> f64 {
        self.alpha * self.delta
    }
}

/// Which closed form of Λ_t applies, decided by `4αΔ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RtnBranch {
    /// `4αΔ > 1`, μ = √((4αΔ)² − 1)
    Oscillatory { mu: f64 },
    /// `4αΔ = 1`
    Degenerate,
    /// `4αΔ < 1`, ν = √(1 − (4αΔ)²)
    Damped { nu: f64 },
}

/// Relative width of the band around `4αΔ = 1` treated as degenerate.
const DEGENERATE_BAND: f64 = 1e-12;

pub fn mu_rtn(spec: &RtnSpec) -> RtnBranch {
    let g = 4.0 * spec.alpha * spec.delta;
    if (g - 1.0).abs() <= DEGENERATE_BAND {
        RtnBranch::Degenerate
    } else if g > 1.0 {
        RtnBranch::Oscillatory {
            mu: ((g - 1.0) * (g + 1.0)).sqrt(),
        }
    } else {
        RtnBranch::Damped {
            nu: ((1.0 - g) * (1.0 + g)).sqrt(),
        }
    }
}

/// `e^{−x} sinh(νx)/ν` without overflow or cancellation.
fn damped_sinh_over_nu(x: f64, nu: f64) -> f64 {
    (-(1.0 - nu) * x).exp() * (-(-2.0 * nu * x).exp_m1()) / (2.0 * nu)
}

/// `e^{−x} cosh(νx)`
fn damped_cosh(x: f64, nu: f64) -> f64 {
    0.5 * ((-(1.0 - nu) * x).exp() + (-(1.0 + nu) * x).exp())
}

/// Λ_t, continued analytically (cosh/sinh) below `4αΔ = 1`.
pub fn coherence_rtn(spec: &RtnSpec, t: f64) -> Result<f64> {
    check_time(t)?;
    let x = t / (2.0 * spec.delta);
    Ok(match mu_rtn(spec) {
        RtnBranch::Oscillatory { mu } => {
            let (sin, cos) = (mu * x).sin_cos();
            (-x).exp() * (cos + sin / mu)
        }
        RtnBranch::Degenerate => (-x).exp() * (1.0 + x),
        RtnBranch::Damped { nu } => damped_cosh(x, nu) + damped_sinh_over_nu(x, nu),
    })
}

/// dΛ_t/dt from the branch formula.
pub fn coherence_rtn_dot(spec: &RtnSpec, t: f64) -> Result<f64> {
    check_time(t)?;
    let x = t / (2.0 * spec.delta);
    let scale = 1.0 / (2.0 * spec.delta);
    Ok(match mu_rtn(spec) {
        RtnBranch::Oscillatory { mu } => -scale * (-x).exp() * (mu * x).sin() * (mu + 1.0 / mu),
        RtnBranch::Degenerate => -scale * x * (-x).exp(),
        RtnBranch::Damped { nu } => -scale * (1.0 - nu * nu) * damped_sinh_over_nu(x, nu),
    })
}

impl CoherenceModel for RtnSpec {
    fn coherence(&self, t: f64) -> Result<f64> {
        coherence_rtn(self, t)
    }

    fn coherence_rate(&self, t: f64) -> Result<f64> {
        coherence_rtn_dot(self, t)
    }

    fn is_non_markovian(&self) -> bool {
        self.alpha_delta() >= RTN_NON_MARKOVIAN_ALPHA_DELTA
    }
}

// ---------------------------------------------------------------------------
// Tabulated evaluator

/// Ohmic phase damping evaluated from a table of `(Γ, Γ̇, Γ̈)` on a uniform
/// grid, interpolated by quintic Hermite polynomials.
///
/// Used wherever a sweep or a dense Riemann sum needs many evaluations.
/// Interpolating the exponent keeps the relative error of `q = e^{−Γ}` small
/// even where `q` itself is tiny. The interpolation error is `O(h⁶)` in Γ and
/// `O(h⁵)` in Γ̇.
#[derive(Clone)]
pub struct TabulatedCoherence {
    step: f64,
    t_max: f64,
    nodes: Vec<[f64; 3]>,
    non_markovian: bool,
}

impl fmt::Debug for TabulatedCoherence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TabulatedCoherence")
            .field("step", &self.step)
            .field("t_max", &self.t_max)
            .field("nodes", &self.nodes.len())
            .finish()
    }
}

impl TabulatedCoherence {
    /// Samples Γ on `[0, t_max]` with spacing no larger than `step`.
    pub fn build(spec: &OhmicSpec, t_max: f64, step: f64) -> Result<Self> {
        if !(t_max.is_finite() && t_max > 0.0) {
            return Err(invalid("t_max", format!("must be positive, got {t_max}")));
        }
        if !(step.is_finite() && step > 0.0) {
            return Err(invalid("step", format!("must be positive, got {step}")));
        }
        let intervals = (t_max / step).ceil() as usize;
        let h = t_max / intervals as f64;
        let nodes = (0..=intervals)
            .into_par_iter()
            .map(|i| gamma_derivatives(spec, if i == intervals { t_max } else { h * i as f64 }))
            .collect::<Result<_>>()?;
        Ok(Self {
            step: h,
            t_max,
            nodes,
            non_markovian: spec.is_non_markovian(),
        })
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    fn locate(&self, t: f64) -> Result<(usize, f64)> {
        check_time(t)?;
        if t > self.t_max * (1.0 + 1e-12) {
            return Err(QslError::OutOfTable { t, t_max: self.t_max });
        }
        let last = self.nodes.len() - 2;
        let i = ((t / self.step).floor() as usize).min(last);
        let s = ((t - self.step * i as f64) / self.step).clamp(0.0, 1.0);
        Ok((i, s))
    }

    /// Interpolated `(Γ, Γ̇)`.
    pub fn gamma_and_rate(&self, t: f64) -> Result<(f64, f64)> {
        let (i, s) = self.locate(t)?;
        let h = self.step;
        let [y0, d0, a0] = self.nodes[i];
        let [y1, d1, a1] = self.nodes[i + 1];
        let (m0, m1) = (d0 * h, d1 * h);
        let (c0, c1) = (a0 * h * h, a1 * h * h);
        let s2 = s * s;
        let s3 = s2 * s;
        let s4 = s3 * s;
        let s5 = s4 * s;
        let g = (1.0 - 10.0 * s3 + 15.0 * s4 - 6.0 * s5) * y0
            + (s - 6.0 * s3 + 8.0 * s4 - 3.0 * s5) * m0
            + 0.5 * (s2 - 3.0 * s3 + 3.0 * s4 - s5) * c0
            + (10.0 * s3 - 15.0 * s4 + 6.0 * s5) * y1
            + (-4.0 * s3 + 7.0 * s4 - 3.0 * s5) * m1
            + 0.5 * (s3 - 2.0 * s4 + s5) * c1;
        let dg = ((-30.0 * s2 + 60.0 * s3 - 30.0 * s4) * (y0 - y1)
            + (1.0 - 18.0 * s2 + 32.0 * s3 - 15.0 * s4) * m0
            + 0.5 * (2.0 * s - 9.0 * s2 + 12.0 * s3 - 5.0 * s4) * c0
            + (-12.0 * s2 + 28.0 * s3 - 15.0 * s4) * m1
            + 0.5 * (3.0 * s2 - 8.0 * s3 + 5.0 * s4) * c1)
            / h;
        Ok((g.max(0.0), dg))
    }
}

impl CoherenceModel for TabulatedCoherence {
    fn coherence(&self, t: f64) -> Result<f64> {
        self.coherence_and_rate(t).map(|(q, _)| q)
    }

    fn coherence_rate(&self, t: f64) -> Result<f64> {
        self.coherence_and_rate(t).map(|(_, r)| r)
    }

    fn coherence_and_rate(&self, t: f64) -> Result<(f64, f64)> {
        let (g, dg) = self.gamma_and_rate(t)?;
        let q = (-g).exp();
        Ok((q, -dg * q))
    }

    fn is_non_markovian(&self) -> bool {
        self.non_markovian
    }
}

// ---------------------------------------------------------------------------
// Channel

/// A unital dephasing channel driven by a coherence factor.
#[derive(Debug, Clone)]
pub struct DephasingChannel {
    model: Arc<dyn CoherenceModel>,
}

impl DephasingChannel {
    pub fn new(model: impl CoherenceModel + 'static) -> Self {
        Self { model: Arc::new(model) }
    }

    pub fn from_arc(model: Arc<dyn CoherenceModel>) -> Self {
        Self { model }
    }

    pub fn phase_damping(spec: OhmicSpec) -> Self {
        Self::new(spec)
    }

    pub fn rtn(spec: RtnSpec) -> Self {
        Self::new(spec)
    }

    pub fn model(&self) -> &dyn CoherenceModel {
        self.model.as_ref()
    }

    pub fn coherence(&self, t: f64) -> Result<f64> {
        self.model.coherence(t)
    }

    pub fn coherence_rate(&self, t: f64) -> Result<f64> {
        self.model.coherence_rate(t)
    }

    pub fn coherence_and_rate(&self, t: f64) -> Result<(f64, f64)> {
        self.model.coherence_and_rate(t)
    }

    pub fn is_non_markovian(&self) -> bool {
        self.model.is_non_markovian()
    }

    pub fn kraus_pair(&self, t: f64) -> Result<(Matrix2, Matrix2)> {
        kraus_pair_for(self.coherence(t)?, t)
    }

    /// The channel output: populations carried over exactly, coherence scaled
    /// by `q(t)`. Equal to [`DephasingChannel::evolve_kraus`] up to round-off,
    /// without the population round-off that the Kraus sum introduces.
    pub fn evolve(&self, rho0: &QubitDensity, t: f64) -> Result<QubitDensity> {
        let q = self.coherence(t)?;
        if !q.is_finite() || q.abs() > 1.0 + COHERENCE_TOL {
            return Err(QslError::CoherenceOutOfRange { t, value: q });
        }
        rho0.with_coherence(rho0.coherence() * q.clamp(-1.0, 1.0))
    }

    /// Σₖ Eₖ ρ₀ Eₖ†
    pub fn evolve_kraus(&self, rho0: &QubitDensity, t: f64) -> Result<QubitDensity> {
        let (e1, e2) = self.kraus_pair(t)?;
        let m = rho0.to_matrix();
        let out = e1 * m * e1.adjoint() + e2 * m * e2.adjoint();
        QubitDensity::from_matrix(&out)
    }

    /// d/dt of `evolve(rho0, t)`: only the coherence moves, at rate `c₀·q̇`.
    pub fn evolve_rate(&self, rho0: &QubitDensity, t: f64) -> Result<Matrix2> {
        let rate = self.coherence_rate(t)?;
        let c = rho0.coherence() * rate;
        Ok(Matrix2::new(
            Complex64::new(0.0, 0.0),
            c,
            c.conj(),
            Complex64::new(0.0, 0.0),
        ))
    }
}

/// Kraus pair `(√((1+q)/2)·σ₀, √((1−q)/2)·σ₃)` for a coherence factor `q`.
pub fn kraus_pair_for(q: f64, t: f64) -> Result<(Matrix2, Matrix2)> {
    if !q.is_finite() || q.abs() > 1.0 + COHERENCE_TOL {
        return Err(QslError::CoherenceOutOfRange { t, value: q });
    }
    let q = q.clamp(-1.0, 1.0);
    let a = (0.5 * (1.0 + q)).sqrt();
    let b = (0.5 * (1.0 - q)).sqrt();
    Ok((Matrix2::identity().scale(a), Matrix2::sigma_z().scale(b)))
}

/// Serializable description of one of the two dephasing models.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "model", rename_all = "kebab-case")]
pub enum ChannelSpec {
    PhaseDamping(OhmicSpec),
    Rtn(RtnSpec),
}

/// Table spacing for quadrature-backed channels, in units of `1/ω_c`.
pub const PD_TABLE_STEP: f64 = 0.005;

impl ChannelSpec {
    /// Channel suitable for dense evaluation on `[0, t_max]`: phase damping is
    /// tabulated, telegraph noise is evaluated in closed form.
    pub fn build_channel(&self, t_max: f64) -> Result<DephasingChannel> {
        match self {
            ChannelSpec::PhaseDamping(spec) => {
                let table = TabulatedCoherence::build(spec, t_max, PD_TABLE_STEP / spec.omega_c)?;
                Ok(DephasingChannel::new(table))
            }
            ChannelSpec::Rtn(spec) => Ok(DephasingChannel::rtn(*spec)),
        }
    }

    /// Channel evaluated directly (quadrature per call for phase damping).
    pub fn direct_channel(&self) -> DephasingChannel {
        match self {
            ChannelSpec::PhaseDamping(spec) => DephasingChannel::phase_damping(*spec),
            ChannelSpec::Rtn(spec) => DephasingChannel::rtn(*spec),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            ChannelSpec::PhaseDamping(_) => "phase-damping",
            ChannelSpec::Rtn(_) => "rtn",
        }
    }
}
