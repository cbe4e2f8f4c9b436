//! Quadrature helpers: adaptive Gauss–Kronrod (7/15) over a panel partition,
//! composite Simpson on uniform grids, and bracketing root refinement.

#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

// Gauss weights for the odd-indexed Kronrod nodes (1, 3, 5) and the centre.
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Result of a single Gauss–Kronrod panel for a vector-valued integrand.
#[derive(Debug, Clone, Copy)]
struct Panel<const N: usize> {
    a: f64,
    b: f64,
    kronrod: [f64; N],
    /// |K15 − G7|
    error: [f64; N],
    /// ∫|f|
    abs: [f64; N],
}

fn gk15<const N: usize, F>(f: &F, a: f64, b: f64) -> Panel<N>
where
    F: Fn(f64) -> [f64; N],
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = [0.0; N];
    let mut gauss = [0.0; N];
    let mut abs = [0.0; N];
    for i in 0..N {
        kronrod[i] = WGK[7] * fc[i];
        gauss[i] = WG[3] * fc[i];
        abs[i] = WGK[7] * fc[i].abs();
    }
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        for i in 0..N {
            kronrod[i] += WGK[j] * (f1[i] + f2[i]);
            abs[i] += WGK[j] * (f1[i].abs() + f2[i].abs());
            if j % 2 == 1 {
                gauss[i] += WG[j / 2] * (f1[i] + f2[i]);
            }
        }
    }
    let mut error = [0.0; N];
    for i in 0..N {
        kronrod[i] *= half;
        abs[i] *= half;
        error[i] = (kronrod[i] - gauss[i] * half).abs();
    }
    Panel {
        a,
        b,
        kronrod,
        error,
        abs,
    }
}

/// Settings for [`integrate_panels`].
#[derive(Debug, Clone, Copy)]
pub struct AdaptiveOptions {
    /// Relative tolerance against ∫|f|.
    pub rel_tol: f64,
    /// Absolute floor on the total error.
    pub abs_tol: f64,
    /// Maximum bisection depth per initial panel.
    pub max_depth: u32,
}

impl Default for AdaptiveOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-12,
            abs_tol: 1e-15,
            max_depth: 48,
        }
    }
}

/// Outcome of a converged adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct Integral<const N: usize> {
    pub value: [f64; N],
    pub error: [f64; N],
    pub evaluations: usize,
}

/// Integrates a vector-valued `f` over `[a, b]`, split into uniform initial
/// panels no wider than `max_width`, bisecting any panel whose Gauss/Kronrod
/// discrepancy exceeds its share of the tolerance.
///
/// The per-panel tolerance is `rel_tol · max(∫_panel|f|, (width/(b−a))·∫|f|)`
/// plus the proportional share of `abs_tol`. The integrand must be smooth on
/// each panel; endpoint singularities are expected to be removed by the
/// caller. Returns `Err(reason)` when a panel exhausts `max_depth`.
pub fn integrate_panels<const N: usize, F>(
    f: F,
    a: f64,
    b: f64,
    max_width: f64,
    opts: AdaptiveOptions,
) -> Result<Integral<N>, String>
where
    F: Fn(f64) -> [f64; N],
{
    if b <= a {
        return Ok(Integral {
            value: [0.0; N],
            error: [0.0; N],
            evaluations: 0,
        });
    }
    let total_width = b - a;
    let n0 = (total_width / max_width).ceil().max(1.0) as usize;
    let h = total_width / n0 as f64;
    let initial: Vec<Panel<N>> = (0..n0)
        .map(|i| {
            let lo = a + h * i as f64;
            let hi = if i + 1 == n0 { b } else { a + h * (i + 1) as f64 };
            gk15(&f, lo, hi)
        })
        .collect();
    let mut evaluations = 15 * n0;

    let mut scale = [0.0; N];
    for p in &initial {
        for (acc, v) in scale.iter_mut().zip(&p.abs) {
            *acc += v;
        }
    }

    let accepts = |p: &Panel<N>| {
        let share = (p.b - p.a) / total_width;
        (0..N).all(|i| {
            let tol = opts.rel_tol * p.abs[i].max(share * scale[i]) + opts.abs_tol * share;
            p.error[i] <= tol
        })
    };

    let mut value = [0.0; N];
    let mut error = [0.0; N];
    let mut stack: Vec<(Panel<N>, u32)> = Vec::new();
    for p in initial.into_iter().rev() {
        stack.push((p, 0));
    }
    while let Some((p, depth)) = stack.pop() {
        if accepts(&p) {
            for i in 0..N {
                value[i] += p.kronrod[i];
                error[i] += p.error[i];
            }
            continue;
        }
        if depth >= opts.max_depth {
            return Err(format!(
                "panel [{:e}, {:e}] still unresolved after {} bisections",
                p.a, p.b, depth
            ));
        }
        let mid = 0.5 * (p.a + p.b);
        let right = gk15(&f, mid, p.b);
        let left = gk15(&f, p.a, mid);
        evaluations += 30;
        stack.push((right, depth + 1));
        stack.push((left, depth + 1));
    }
    Ok(Integral {
        value,
        error,
        evaluations,
    })
}

/// Composite Simpson rule for samples on a uniform grid with spacing `h`.
/// An odd number of samples (even number of panels) is required; with an
/// even sample count the final panel is closed with the trapezoid rule.
pub fn simpson_samples(values: &[f64], h: f64) -> f64 {
    match values.len() {
        0 | 1 => 0.0,
        2 => 0.5 * h * (values[0] + values[1]),
        n if n % 2 == 1 => {
            let mut odd = 0.0;
            let mut even = 0.0;
            for (i, v) in values.iter().enumerate().take(n - 1).skip(1) {
                if i % 2 == 1 {
                    odd += v;
                } else {
                    even += v;
                }
            }
            h / 3.0 * (values[0] + values[n - 1] + 4.0 * odd + 2.0 * even)
        }
        n => simpson_samples(&values[..n - 1], h) + 0.5 * h * (values[n - 2] + values[n - 1]),
    }
}

/// Composite Simpson for `f` on `[a, b]` with `panels` (rounded up to even) panels.
pub fn simpson<E, F>(f: F, a: f64, b: f64, panels: usize) -> Result<f64, E>
where
    F: Fn(f64) -> Result<f64, E>,
{
    let n = panels.max(2).next_multiple_of(2);
    let h = (b - a) / n as f64;
    let mut values = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let t = if i == n { b } else { a + h * i as f64 };
        values.push(f(t)?);
    }
    Ok(simpson_samples(&values, h))
}

/// Refines a sign change of `f` inside `[lo, hi]` by bisection until the
/// bracket is narrower than `tol`. `f_lo` is `f(lo)`.
pub fn bisect<E, F>(f: F, mut lo: f64, mut hi: f64, mut f_lo: f64, tol: f64) -> Result<f64, E>
where
    F: Fn(f64) -> Result<f64, E>,
{
    for _ in 0..200 {
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let fm = f(mid)?;
        if fm == 0.0 {
            return Ok(mid);
        }
        if (fm > 0.0) == (f_lo > 0.0) {
            lo = mid;
            f_lo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
