//! Real-argument special functions for the radial oracle: Gamma, Bessel
//! J_ν and I_ν of real order ν ≥ -1/2, and the n-dimensional radial wave
//! r^{(2-n)/2} F_ν(kr).
//!
//! J_ν uses the ascending power series while it is numerically benign and
//! Miller's backward recurrence, normalized by Neumann's expansion of
//! (x/2)^ν, beyond that. I_ν has an all-positive series and is summed
//! directly. Internally both return values together with a logarithmic
//! scale so that high orders at small arguments do not underflow.

use thiserror::Error;

use crate::dd::Dd;

/// Upper end of the argument window for [`bessel_j`].
pub const J_ARG_MAX: f64 = 200.0;
/// Upper end of the argument window for [`bessel_i`].
pub const I_ARG_MAX: f64 = 60.0;

const MIN_ORDER: f64 = -0.5;
// Terms are dropped once they fall below this fraction of the double-double sum.
const SERIES_RATIO_CUTOFF: f64 = 1e-34;
const MAX_SERIES_TERMS: usize = 1000;
// Below this argument the double-double alternating series keeps an absolute
// error near 1e-25, enough to resolve the sign of a cubic-order zero.
pub(crate) const SERIES_ARG_LIMIT: f64 = 20.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpecFunError {
    #[error("gamma is only evaluated for positive arguments (got {0})")]
    NonPositiveArgument(f64),
    #[error("argument {x} outside the validity window [0, {max}]")]
    ArgumentOutOfRange { x: f64, max: f64 },
    #[error("order {0} below -1/2 is not supported")]
    OrderOutOfRange(f64),
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEFFS: [f64; 9] = [
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

fn lanczos_sum(z: f64) -> f64 {
    let mut a = LANCZOS_COEFFS[0];
    for (i, c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        a += c / (z + i as f64);
    }
    a
}

/// ln Γ(x) for x > 0.
pub fn ln_gamma(x: f64) -> Result<f64, SpecFunError> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(SpecFunError::NonPositiveArgument(x));
    }
    if x < 0.5 {
        return Ok(ln_gamma(x + 1.0)? - x.ln());
    }
    let z = x - 1.0;
    let t = z + LANCZOS_G + 0.5;
    Ok(0.5 * (2.0 * std::f64::consts::PI).ln() + (z + 0.5) * t.ln() - t + lanczos_sum(z).ln())
}

/// Γ(x) for x > 0 via the Lanczos approximation (g = 7, nine terms).
pub fn gamma_real(x: f64) -> Result<f64, SpecFunError> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(SpecFunError::NonPositiveArgument(x));
    }
    if x < 0.5 {
        return Ok(gamma_real(x + 1.0)? / x);
    }
    if x > 140.0 {
        return Ok(ln_gamma(x)?.exp());
    }
    let z = x - 1.0;
    let t = z + LANCZOS_G + 0.5;
    Ok((2.0 * std::f64::consts::PI).sqrt() * t.powf(z + 0.5) * (-t).exp() * lanczos_sum(z))
}

/// Neumaier-compensated running sum.
#[derive(Default)]
struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

/// F_ν(x) and F_{ν+1}(x) as `value · exp(ln_scale)`, `next · exp(ln_scale)`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct ScaledPair {
    pub value: Dd,
    pub next: Dd,
    pub ln_scale: f64,
}

impl ScaledPair {
    fn unscaled(&self) -> (f64, f64) {
        let s = self.ln_scale.exp();
        (self.value.to_f64() * s, self.next.to_f64() * s)
    }
}

fn check_order(nu: f64) -> Result<(), SpecFunError> {
    if !nu.is_finite() || nu < MIN_ORDER - 1e-12 {
        return Err(SpecFunError::OrderOutOfRange(nu));
    }
    Ok(())
}

fn check_arg(x: f64, max: f64) -> Result<(), SpecFunError> {
    if !(x >= 0.0 && x <= max) {
        return Err(SpecFunError::ArgumentOutOfRange { x, max });
    }
    Ok(())
}

/// Σ_m s^m (x²/4)^m / (m! (a)_m) with s = -1 (J) or +1 (I), a = ν + 1,
/// summed in double-double so values near zeros of J keep full relative
/// accuracy.
fn hypergeometric_0f1(a: f64, q: Dd, alternating: bool) -> Dd {
    let step = if alternating { -q } else { q };
    let mut acc = Dd::ONE;
    let mut term = Dd::ONE;
    for m in 1..MAX_SERIES_TERMS {
        let mf = m as f64;
        term = term * step / Dd::product(mf, a + mf - 1.0);
        acc = acc + term;
        // past the peak term and below the cutoff
        if mf * mf > q.hi() && term.hi().abs() <= SERIES_RATIO_CUTOFF * acc.hi().abs() {
            break;
        }
    }
    acc
}

fn series_pair(nu: f64, x: f64, alternating: bool) -> Result<ScaledPair, SpecFunError> {
    let q = Dd::product(x, x) * 0.25;
    let ln_scale = nu * (0.5 * x).ln() - ln_gamma(nu + 1.0)?;
    let value = hypergeometric_0f1(nu + 1.0, q, alternating);
    let next =
        Dd::from(x) * hypergeometric_0f1(nu + 2.0, q, alternating) / Dd::from(2.0 * (nu + 1.0));
    Ok(ScaledPair {
        value,
        next,
        ln_scale,
    })
}

fn miller_pair(nu: f64, x: f64) -> Result<ScaledPair, SpecFunError> {
    let top_order = nu.max(x) + 20.0 + 20.0 * x.cbrt();
    let mut steps = (top_order - nu).ceil() as usize;
    steps += steps % 2;

    // f[k] ∝ J_{ν+k}(x)
    let mut f = vec![0.0; steps + 2];
    f[steps] = 1e-30;
    for k in (1..=steps).rev() {
        let next = 2.0 * (nu + k as f64) / x * f[k] - f[k + 1];
        f[k - 1] = next;
        if next.abs() > 1e250 {
            for v in &mut f[k - 1..] {
                *v *= 1e-250;
            }
        }
    }

    let fmax = f.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let ln_fmax = fmax.ln();
    // (x/2)^ν / Γ(ν+1) = J_ν + Σ_{k≥1} (ν+2k) r_k J_{ν+2k},  r_k = Γ(ν+k) / (k! Γ(ν+1))
    let mut norm = CompensatedSum::default();
    norm.add(f[0] / fmax);
    let mut ln_r = 0.0f64;
    for k in 1..=steps / 2 {
        let fk = f[2 * k];
        if fk != 0.0 {
            let ln_term = (nu + 2.0 * k as f64).ln() + ln_r + fk.abs().ln() - ln_fmax;
            norm.add(fk.signum() * ln_term.exp());
        }
        ln_r += ((nu + k as f64) / (k as f64 + 1.0)).ln();
    }
    let ln_scale = nu * (0.5 * x).ln() - ln_gamma(nu + 1.0)?;
    let s = norm.value();
    Ok(ScaledPair {
        value: Dd::from(f[0] / fmax / s),
        next: Dd::from(f[1] / fmax / s),
        ln_scale,
    })
}

/// J_ν(x), J_{ν+1}(x) in scaled form, for x > 0.
pub(crate) fn bessel_j_scaled(nu: f64, x: f64) -> Result<ScaledPair, SpecFunError> {
    check_order(nu)?;
    check_arg(x, J_ARG_MAX)?;
    if x < SERIES_ARG_LIMIT || 0.25 * x * x < nu + 1.0 {
        series_pair(nu, x, true)
    } else {
        miller_pair(nu, x)
    }
}

/// I_ν(x), I_{ν+1}(x) in scaled form, for x > 0.
pub(crate) fn bessel_i_scaled(nu: f64, x: f64) -> Result<ScaledPair, SpecFunError> {
    check_order(nu)?;
    check_arg(x, I_ARG_MAX)?;
    series_pair(nu, x, false)
}

fn at_origin(nu: f64) -> f64 {
    if nu == 0.0 {
        1.0
    } else if nu > 0.0 {
        0.0
    } else {
        f64::INFINITY
    }
}

/// Bessel function of the first kind J_ν(x), ν ≥ -1/2, 0 ≤ x ≤ 200.
pub fn bessel_j(nu: f64, x: f64) -> Result<f64, SpecFunError> {
    check_order(nu)?;
    check_arg(x, J_ARG_MAX)?;
    if x == 0.0 {
        return Ok(at_origin(nu));
    }
    Ok(bessel_j_scaled(nu, x)?.unscaled().0)
}

/// Modified Bessel function I_ν(x), ν ≥ -1/2, 0 ≤ x ≤ 60.
pub fn bessel_i(nu: f64, x: f64) -> Result<f64, SpecFunError> {
    check_order(nu)?;
    check_arg(x, I_ARG_MAX)?;
    if x == 0.0 {
        return Ok(at_origin(nu));
    }
    Ok(bessel_i_scaled(nu, x)?.unscaled().0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    /// J_ν: the interior or exterior wave oscillates.
    Oscillatory,
    /// I_ν: the interior wave grows monotonically.
    Evanescent,
}

/// Regular radial solution of order ℓ in dimension n.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RadialWave {
    pub dim: usize,
    pub ell: usize,
    pub branch: Branch,
}

impl RadialWave {
    /// Bessel order ν = (n-2)/2 + ℓ.
    pub fn order(&self) -> f64 {
        (self.dim as f64 - 2.0) / 2.0 + self.ell as f64
    }

    fn power(&self) -> f64 {
        (2.0 - self.dim as f64) / 2.0
    }

    fn scaled_pair(&self, x: f64) -> Result<ScaledPair, SpecFunError> {
        match self.branch {
            Branch::Oscillatory => bessel_j_scaled(self.order(), x),
            Branch::Evanescent => bessel_i_scaled(self.order(), x),
        }
    }

    fn sign(&self) -> f64 {
        match self.branch {
            Branch::Oscillatory => -1.0,
            Branch::Evanescent => 1.0,
        }
    }

    /// (y(r), y'(r)) multiplied by the positive factor r^{1-p} e^{-s}, where
    /// p = (2-n)/2 and e^{s} is the Bessel scale. Zero sets and directions of
    /// the (value, derivative) column are unchanged.
    pub(crate) fn scaled_column_dd(&self, k: f64, r: f64) -> Result<(Dd, Dd), SpecFunError> {
        let x = k * r;
        let pair = self.scaled_pair(x)?;
        // F'_ν(x) = (ν/x) F_ν ∓ F_{ν+1}; p + ν = ℓ
        let value = pair.value * r;
        let deriv = pair.value * self.ell as f64 + pair.next * (self.sign() * x);
        Ok((value, deriv))
    }

    #[cfg(test)]
    pub(crate) fn scaled_column(&self, k: f64, r: f64) -> Result<(f64, f64), SpecFunError> {
        let (v, d) = self.scaled_column_dd(k, r)?;
        Ok((v.to_f64(), d.to_f64()))
    }
}

/// y(r) = r^{(2-n)/2} F_ν(kr) and y'(r), F = J or I according to the branch.
pub fn radial_wave(w: &RadialWave, k: f64, r: f64) -> Result<(f64, f64), SpecFunError> {
    let x = k * r;
    let nu = w.order();
    let (f, f_next) = w.scaled_pair(x)?.unscaled();
    let df = nu / x * f + w.sign() * f_next;
    let p = w.power();
    let rp = r.powf(p);
    Ok((rp * f, p * rp / r * f + rp * k * df))
}
