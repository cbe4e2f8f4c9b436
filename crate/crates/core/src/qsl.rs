//! Relative-purity quantum speed limit.
//!
//! For a trajectory `ρ_t` observed on the window `[τ, τ + τ_D]`,
//!
//! ```text
//! f        = tr(ρ_τ ρ_{τ+τ_D}) / tr(ρ_τ²)
//! τ_ML     = |f − 1| tr(ρ_τ²) / ⟨Σᵢ σᵢ ρᵢ⟩
//! τ_MT     = |f − 1| tr(ρ_τ²) / ⟨√(Σᵢ σᵢ²)⟩
//! τ_QSL    = max(τ_ML, τ_MT)
//! ```
//!
//! where `σᵢ` are the singular values of `ρ̇_t`, `ρᵢ` those of `ρ_τ` (both
//! sorted descending) and `⟨·⟩ = (1/τ_D)∫_τ^{τ+τ_D} · dt`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::algebra::{hermitian_eigenvalues, purity, singular_values, Matrix2, QubitDensity};
use crate::error::{invalid, QslError, Result};
use crate::filtering::{FilterOp, FilteredTrajectory};
use crate::models::{ChannelSpec, DephasingChannel, OhmicSpec, RtnSpec};
use crate::quadrature::{bisect, simpson};

/// A differentiable family of qubit states.
pub trait Trajectory: Sync {
    fn state(&self, t: f64) -> Result<QubitDensity>;

    /// `dρ/dt`, the generator value `L_t(ρ_t)`.
    fn derivative(&self, t: f64) -> Result<Matrix2>;

    /// A signed scalar whose zero crossings mark kinks of the time-average
    /// integrands (points where a singular value of `ρ̇` touches zero).
    fn kink_indicator(&self, _t: f64) -> Result<Option<f64>> {
        Ok(None)
    }
}

/// Adapter for closure-defined trajectories.
pub struct FnTrajectory<S, D> {
    pub state: S,
    pub derivative: D,
}

impl<S, D> Trajectory for FnTrajectory<S, D>
where
    S: Fn(f64) -> Result<QubitDensity> + Sync,
    D: Fn(f64) -> Result<Matrix2> + Sync,
{
    fn state(&self, t: f64) -> Result<QubitDensity> {
        (self.state)(t)
    }

    fn derivative(&self, t: f64) -> Result<Matrix2> {
        (self.derivative)(t)
    }
}

/// Discretization of the window averages.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadConfig {
    /// Grid points per driving window (at least [`QuadConfig::MIN_POINTS`]).
    pub points_per_window: usize,
    /// Kink-location tolerance relative to `τ_D`.
    pub tolerance: f64,
}

impl QuadConfig {
    pub const MIN_POINTS: usize = 64;

    pub fn new(points_per_window: usize, tolerance: f64) -> Result<Self> {
        let cfg = Self {
            points_per_window,
            tolerance,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.points_per_window < Self::MIN_POINTS {
            return Err(invalid(
                "points",
                format!(
                    "need at least {} points per driving window, got {}",
                    Self::MIN_POINTS,
                    self.points_per_window
                ),
            ));
        }
        if !(self.tolerance.is_finite() && self.tolerance > 0.0 && self.tolerance < 1e-3) {
            return Err(invalid(
                "tolerance",
                format!("must lie in (0, 1e-3), got {}", self.tolerance),
            ));
        }
        Ok(())
    }

    fn panels(&self) -> usize {
        (self.points_per_window - 1).next_multiple_of(2)
    }
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self {
            points_per_window: 513,
            tolerance: 1e-13,
        }
    }
}

/// All quantities of the unified bound for one `(τ, τ_D)` window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QslResult {
    pub tau: f64,
    pub tau_d: f64,
    /// Relative purity `f(τ + τ_D)`.
    pub f: f64,
    pub purity_tau: f64,
    /// ⟨Σ σᵢ ρᵢ⟩
    pub ml_denom: f64,
    /// ⟨√(Σ σᵢ²)⟩
    pub mt_denom: f64,
    pub tau_ml: f64,
    pub tau_mt: f64,
    pub tau_qsl: f64,
}

impl QslResult {
    /// Assembles a result from the distance numerator `|f − 1|·tr(ρ_τ²)`
    /// and the two window averages.
    pub fn from_parts(
        tau: f64,
        tau_d: f64,
        signed_numerator: f64,
        purity_tau: f64,
        ml_denom: f64,
        mt_denom: f64,
    ) -> Result<Self> {
        let numerator = signed_numerator.abs();
        let ratio = |denom: f64, name: &'static str| -> Result<f64> {
            if numerator == 0.0 {
                Ok(0.0)
            } else if denom > 0.0 {
                Ok(numerator / denom)
            } else {
                Err(invalid(
                    name,
                    format!("vanishing time average with nonzero distance {numerator:e}"),
                ))
            }
        };
        let tau_ml = ratio(ml_denom, "ml_denom")?;
        let tau_mt = ratio(mt_denom, "mt_denom")?;
        Ok(Self {
            tau,
            tau_d,
            f: 1.0 + signed_numerator / purity_tau,
            purity_tau,
            ml_denom,
            mt_denom,
            tau_ml,
            tau_mt,
            tau_qsl: tau_ml.max(tau_mt),
        })
    }
}

/// `tr(ρ(σ − ρ)) = (f − 1)·tr(ρ²)`, computed from the entry differences so a
/// small change is not lost against `tr(ρ²)`.
pub fn distance_numerator(rho_tau: &QubitDensity, rho_later: &QubitDensity) -> f64 {
    let dd0 = rho_later.d0() - rho_tau.d0();
    let dd1 = rho_later.d1() - rho_tau.d1();
    let dc: Complex64 = rho_later.coherence() - rho_tau.coherence();
    rho_tau.d0() * dd0 + rho_tau.d1() * dd1 + 2.0 * (rho_tau.coherence() * dc.conj()).re
}

fn check_window(tau: f64, tau_d: f64) -> Result<()> {
    if !(tau.is_finite() && tau >= 0.0) {
        return Err(invalid("tau", format!("must be finite and nonnegative, got {tau}")));
    }
    if !(tau_d.is_finite() && tau_d > 0.0) {
        return Err(invalid("tau_d", format!("must be positive, got {tau_d}")));
    }
    Ok(())
}

/// Splits `[a, b]` at the sign changes of `indicator` seen on a uniform grid
/// of `panels` panels, each refined by bisection to `tol`.
pub fn window_breakpoints<F>(indicator: F, a: f64, b: f64, panels: usize, tol: f64) -> Result<Vec<f64>>
where
    F: Fn(f64) -> Result<Option<f64>>,
{
    let mut points = vec![a];
    let h = (b - a) / panels as f64;
    let Some(mut prev) = indicator(a)? else {
        points.push(b);
        return Ok(points);
    };
    let mut prev_t = a;
    for i in 1..=panels {
        let t = if i == panels { b } else { a + h * i as f64 };
        let cur = indicator(t)?.unwrap_or(0.0);
        if prev != 0.0 && cur != 0.0 && (prev > 0.0) != (cur > 0.0) {
            let root = bisect(|x| indicator(x).map(|v| v.unwrap_or(0.0)), prev_t, t, prev, tol)?;
            points.push(root);
        } else if cur == 0.0 && i < panels {
            points.push(t);
        }
        if cur != 0.0 {
            prev = cur;
            prev_t = t;
        }
    }
    points.push(b);
    points.dedup_by(|x, y| (*x - *y).abs() <= tol);
    Ok(points)
}

/// Unified QSL bound for an arbitrary qubit trajectory.
///
/// Window averages use composite Simpson on a uniform grid of
/// `cfg.points_per_window` points; when the trajectory exposes a kink
/// indicator, its zero crossings are located by bisection and used as
/// panel boundaries.
pub fn qsl_general<T: Trajectory + ?Sized>(traj: &T, tau: f64, tau_d: f64, cfg: &QuadConfig) -> Result<QslResult> {
    check_window(tau, tau_d)?;
    cfg.validate()?;
    let end = tau + tau_d;
    let rho_tau = traj.state(tau)?;
    let rho_end = traj.state(end)?;
    let purity_tau = purity(&rho_tau);
    let numerator = distance_numerator(&rho_tau, &rho_end);
    let (l1, l2) = hermitian_eigenvalues(&rho_tau);

    let panels = cfg.panels();
    let h = tau_d / panels as f64;
    let breaks = window_breakpoints(|t| traj.kink_indicator(t), tau, end, panels, cfg.tolerance * tau_d)?;

    let mut ml = 0.0;
    let mut mt = 0.0;
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        let n = ((b - a) / h).ceil() as usize;
        ml += simpson(
            |t| {
                let (s1, s2) = singular_values(&traj.derivative(t)?);
                Ok::<_, QslError>(s1 * l1 + s2 * l2)
            },
            a,
            b,
            n,
        )?;
        mt += simpson(
            |t| Ok::<_, QslError>(traj.derivative(t)?.frobenius_sq().sqrt()),
            a,
            b,
            n,
        )?;
    }

    QslResult::from_parts(tau, tau_d, numerator, purity_tau, ml / tau_d, mt / tau_d)
}

/// Which prefactor the closed-form filtered bound uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// `√(k(1−k)/2)`, the published closed form.
    Paper,
    /// `2√(k(1−k))`, the maximum of the unified bound for the normalized
    /// filtered state.
    Ml,
}

impl Variant {
    pub fn prefactor(&self, k: f64) -> f64 {
        match self {
            Variant::Paper => (0.5 * k * (1.0 - k)).sqrt(),
            Variant::Ml => 2.0 * (k * (1.0 - k)).sqrt(),
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Variant::Paper => "paper",
            Variant::Ml => "ml",
        }
    }
}

impl std::str::FromStr for Variant {
    type Err = QslError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper" => Ok(Variant::Paper),
            "ml" => Ok(Variant::Ml),
            other => Err(invalid("variant", format!("expected `paper` or `ml`, got `{other}`"))),
        }
    }
}

/// Total variation `∫|q̇| dt` of the coherence factor over `[a, b]`, summed
/// as `Σ|q(b_j) − q(a_j)|` over the monotone pieces between zeros of `q̇`.
pub fn coherence_variation(channel: &DephasingChannel, a: f64, b: f64, cfg: &QuadConfig) -> Result<f64> {
    let breaks = window_breakpoints(
        |t| channel.coherence_rate(t).map(Some),
        a,
        b,
        cfg.panels(),
        cfg.tolerance * (b - a),
    )?;
    let mut values = Vec::with_capacity(breaks.len());
    for &t in &breaks {
        values.push(channel.coherence(t)?);
    }
    Ok(values.windows(2).map(|w| (w[1] - w[0]).abs()).sum())
}

/// Closed-form QSL time of the filtered `|+⟩` trajectory for any dephasing
/// channel: `prefactor(k)·|q_τ|·|q_{τ+τ_D} − q_τ| / ((1/τ_D)∫|q̇| dt)`.
pub fn qsl_closed_form(
    channel: &DephasingChannel,
    k: f64,
    tau: f64,
    tau_d: f64,
    variant: Variant,
    cfg: &QuadConfig,
) -> Result<f64> {
    FilterOp::new(k)?;
    check_window(tau, tau_d)?;
    cfg.validate()?;
    let q_tau = channel.coherence(tau)?;
    let q_end = channel.coherence(tau + tau_d)?;
    let change = (q_end - q_tau).abs();
    if change == 0.0 {
        return Ok(0.0);
    }
    let variation = coherence_variation(channel, tau, tau + tau_d, cfg)?;
    if variation <= 0.0 {
        return Ok(0.0);
    }
    Ok(variant.prefactor(k) * q_tau.abs() * change * tau_d / variation)
}

/// Closed form for Ohmic phase damping, with Γ evaluated by quadrature.
pub fn qsl_closed_form_pd(
    spec: &OhmicSpec,
    k: f64,
    tau: f64,
    tau_d: f64,
    variant: Variant,
    cfg: &QuadConfig,
) -> Result<f64> {
    qsl_closed_form(&DephasingChannel::phase_damping(*spec), k, tau, tau_d, variant, cfg)
}

/// Closed form for telegraph-noise dephasing.
pub fn qsl_closed_form_rtn(
    spec: &RtnSpec,
    k: f64,
    tau: f64,
    tau_d: f64,
    variant: Variant,
    cfg: &QuadConfig,
) -> Result<f64> {
    qsl_closed_form(&DephasingChannel::rtn(*spec), k, tau, tau_d, variant, cfg)
}

/// A parameter sweep over filter strengths and window starts.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSpec {
    pub channel: ChannelSpec,
    pub ks: Vec<f64>,
    pub taus: Vec<f64>,
    pub tau_d: f64,
    pub cfg: QuadConfig,
}

/// One `(k, τ)` row: the engine result plus both closed forms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub k: f64,
    pub result: QslResult,
    pub tau_qsl_paper: f64,
    pub tau_qsl_ml_closed: f64,
    /// |τ_QSL(engine) − τ_QSL(ml closed form)| / τ_QSL(ml closed form)
    pub closed_form_dev: f64,
}

impl SweepRow {
    pub fn tau(&self) -> f64 {
        self.result.tau
    }

    pub fn selected(&self, variant: Variant) -> f64 {
        match variant {
            Variant::Paper => self.tau_qsl_paper,
            Variant::Ml => self.result.tau_qsl,
        }
    }
}

fn relative_deviation(got: f64, want: f64) -> f64 {
    let diff = (got - want).abs();
    if diff == 0.0 {
        0.0
    } else {
        diff / want.abs().max(f64::MIN_POSITIVE)
    }
}

/// Evaluates one filtered-trajectory row on an already built channel.
pub fn sweep_row(channel: &DephasingChannel, k: f64, tau: f64, tau_d: f64, cfg: &QuadConfig) -> Result<SweepRow> {
    let traj = FilteredTrajectory::new(channel.clone(), FilterOp::new(k)?);
    let result = qsl_general(&traj, tau, tau_d, cfg)?;
    let tau_qsl_paper = qsl_closed_form(channel, k, tau, tau_d, Variant::Paper, cfg)?;
    let tau_qsl_ml_closed = qsl_closed_form(channel, k, tau, tau_d, Variant::Ml, cfg)?;
    Ok(SweepRow {
        k,
        result,
        tau_qsl_paper,
        tau_qsl_ml_closed,
        closed_form_dev: relative_deviation(result.tau_qsl, tau_qsl_ml_closed),
    })
}

/// Runs every `(k, τ)` row; rows come back sorted by `(k, τ)` regardless of
/// evaluation order.
pub fn sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    if spec.ks.is_empty() {
        return Err(invalid("k", "at least one filter parameter is required"));
    }
    if spec.taus.is_empty() {
        return Err(invalid("tau", "at least one window start is required"));
    }
    for &k in &spec.ks {
        FilterOp::new(k)?;
    }
    for &tau in &spec.taus {
        check_window(tau, spec.tau_d)?;
    }
    spec.cfg.validate()?;

    let mut ks = spec.ks.clone();
    ks.sort_by(f64::total_cmp);
    let mut taus = spec.taus.clone();
    taus.sort_by(f64::total_cmp);
    let t_max = taus[taus.len() - 1] + spec.tau_d;
    let channel = spec.channel.build_channel(t_max)?;

    let coords: Vec<(f64, f64)> = ks.iter().flat_map(|&k| taus.iter().map(move |&tau| (k, tau))).collect();
    coords
        .par_iter()
        .map(|&(k, tau)| {
            sweep_row(&channel, k, tau, spec.tau_d, &spec.cfg).map_err(|e| QslError::SweepRow {
                k,
                tau,
                source: Box::new(e),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::CoherenceModel;

    #[derive(Debug)]
    struct Linear {
        slope: f64,
    }

    impl CoherenceModel for Linear {
        fn coherence(&self, t: f64) -> Result<f64> {
            Ok(1.0 - self.slope * t)
        }
        fn coherence_rate(&self, _t: f64) -> Result<f64> {
            Ok(-self.slope)
        }
        fn is_non_markovian(&self) -> bool {
            false
        }
    }

    #[test]
    fn constant_trajectory_has_zero_qsl() {
        let rho = QubitDensity::new(0.3, 0.7, Complex64::new(0.1, 0.2)).unwrap();
        let traj = FnTrajectory {
            state: move |_t| Ok(rho),
            derivative: |_t| Ok(Matrix2::zero()),
        };
        let r = qsl_general(&traj, 2.0, 1.0, &QuadConfig::default()).unwrap();
        assert_eq!(r.f, 1.0);
        assert_eq!(r.tau_qsl, 0.0);
    }

    #[test]
    fn linear_coherence_gives_exact_bounds() {
        // q(t) = 1 − 0.1 t, k = 0.3: c_t = √(k(1−k))·q(t) is monotone, so
        // τ_ML = 2|c_τ|·τ_D and τ_MT = τ_ML/√2.
        let ch = DephasingChannel::new(Linear { slope: 0.1 });
        let k = 0.3;
        let traj = FilteredTrajectory::new(ch.clone(), FilterOp::new(k).unwrap());
        let r = qsl_general(&traj, 1.0, 2.0, &QuadConfig::default()).unwrap();
        let c_tau = (k * (1.0f64 - k)).sqrt() * 0.9;
        assert!((r.tau_ml - 2.0 * c_tau * 2.0).abs() < 1e-13, "{r:?} {c_tau}");
        assert!((r.tau_mt * 2f64.sqrt() - r.tau_ml).abs() < 1e-13);
        assert_eq!(r.tau_qsl, r.tau_ml);
        let closed = qsl_closed_form(&ch, k, 1.0, 2.0, Variant::Ml, &QuadConfig::default()).unwrap();
        assert!((closed - r.tau_qsl).abs() < 1e-13);
    }

    #[test]
    fn breakpoints_follow_sign_changes() {
        let pts = window_breakpoints(|t: f64| Ok(Some(t.cos())), 0.0, 10.0, 64, 1e-14).unwrap();
        let pi = std::f64::consts::PI;
        let want = [0.0, pi / 2.0, 1.5 * pi, 2.5 * pi, 10.0];
        assert_eq!(pts.len(), want.len());
        for (p, w) in pts.iter().zip(want) {
            assert!((p - w).abs() < 1e-12);
        }
        let none = window_breakpoints(|_t| Ok(None), 1.0, 2.0, 64, 1e-14).unwrap();
        assert_eq!(none, vec![1.0, 2.0]);
    }

    #[test]
    fn closed_form_limits() {
        let ch = DephasingChannel::rtn(RtnSpec::new(0.2, 1.0).unwrap());
        let cfg = QuadConfig::default();
        let near_pole = qsl_closed_form(&ch, 1e-12, 0.5, 1.0, Variant::Paper, &cfg).unwrap();
        assert!(near_pole < 1e-6);
        assert!(qsl_closed_form(&ch, 0.0, 0.5, 1.0, Variant::Paper, &cfg).is_err());
        let flat = DephasingChannel::new(Linear { slope: 0.0 });
        assert_eq!(qsl_closed_form(&flat, 0.4, 0.5, 1.0, Variant::Ml, &cfg).unwrap(), 0.0);
    }

    #[test]
    fn invalid_config_rejected() {
        assert!(QuadConfig::new(32, 1e-13).is_err());
        assert!(QuadConfig::new(64, 0.0).is_err());
        let ch = DephasingChannel::rtn(RtnSpec::new(0.2, 1.0).unwrap());
        let traj = FilteredTrajectory::new(ch, FilterOp::new(0.4).unwrap());
        assert!(qsl_general(&traj, -1.0, 1.0, &QuadConfig::default()).is_err());
        assert!(qsl_general(&traj, 1.0, 0.0, &QuadConfig::default()).is_err());
    }

    #[test]
    fn variant_parsing() {
        assert_eq!("paper".parse::<Variant>().unwrap(), Variant::Paper);
        assert_eq!("ml".parse::<Variant>().unwrap(), Variant::Ml);
        assert!("mt".parse::<Variant>().is_err());
    }

    #[test]
    fn sweep_rows_sorted_and_errors_carry_coordinates() {
        let spec = SweepSpec {
            channel: ChannelSpec::Rtn(RtnSpec::new(2.0, 1.0).unwrap()),
            ks: vec![0.7, 0.3],
            taus: vec![1.0, 0.0, 0.5],
            tau_d: 1.0,
            cfg: QuadConfig::new(129, 1e-13).unwrap(),
        };
        let rows = sweep(&spec).unwrap();
        let coords: Vec<(f64, f64)> = rows.iter().map(|r| (r.k, r.tau())).collect();
        assert_eq!(
            coords,
            vec![(0.3, 0.0), (0.3, 0.5), (0.3, 1.0), (0.7, 0.0), (0.7, 0.5), (0.7, 1.0)]
        );
        let bad = SweepSpec { ks: vec![], ..spec };
        assert!(sweep(&bad).is_err());
    }
}
