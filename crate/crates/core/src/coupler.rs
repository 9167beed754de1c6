//! Circuit model of the SQUID-based tunable coupler.
//!
//! Inductances are in pH, angular frequencies in rad/ns and impedances in Ω,
//! so `ω L` in Ω is `ω · L · 1e-3`. Outputs are in the `e^{-iωt}` rotating
//! frame used by the field equations.

use crate::error::{Error, Result};
use crate::pulse::{PulseShape, UniformSeries};
use crate::scalar::{cr, cx, Cx, Real};

/// Magnetic flux quantum, Wb.
pub const FLUX_QUANTUM: f64 = 2.067_833_848_461_929e-15;

const OHM_PER_RAD_NS_PH: f64 = 1e-3;

#[derive(Clone, Debug, PartialEq)]
pub struct CouplerParams<T> {
    /// Resonator wave impedance, Ω.
    pub r_res: T,
    /// Line wave impedance, Ω.
    pub r_tl: T,
    /// Resonator angular frequency, rad/ns.
    pub omega0: T,
    pub l1g: T,
    pub l2g: T,
    pub mg: T,
    /// Effective inductance of the resonator section below the tap, pH.
    pub le: T,
    /// SQUID critical currents, µA.
    pub ic1: Option<T>,
    pub ic2: Option<T>,
}

impl<T: Real> CouplerParams<T> {
    /// 80 Ω resonator, 50 Ω line, 6 GHz, 480/480/140 pH transformer, 180 pH tap.
    pub fn reference() -> Self {
        Self {
            r_res: T::lit(80.0),
            r_tl: T::lit(50.0),
            omega0: T::lit(2.0 * std::f64::consts::PI * 6.0),
            l1g: T::lit(480.0),
            l2g: T::lit(480.0),
            mg: T::lit(140.0),
            le: T::lit(180.0),
            ic1: None,
            ic2: None,
        }
    }

    /// Round-trip time `π/ω₀` of a quarter-wave resonator, ns.
    pub fn tau_rt(&self) -> T {
        T::PI() / self.omega0
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("r_res", self.r_res),
            ("r_tl", self.r_tl),
            ("omega0", self.omega0),
            ("l1g", self.l1g),
            ("l2g", self.l2g),
            ("mg", self.mg),
            ("le", self.le),
        ] {
            if !(v > T::zero() && v.is_finite()) {
                return Err(Error::param(name, "must be positive"));
            }
        }
        for (name, v) in [("ic1", self.ic1), ("ic2", self.ic2)] {
            if let Some(v) = v {
                if !(v > T::zero()) {
                    return Err(Error::param(name, "must be positive"));
                }
            }
        }
        if self.omega0 * self.le * T::lit(OHM_PER_RAD_NS_PH) >= self.r_res {
            return Err(Error::param(
                "le",
                "tap must sit close to the shorted end (omega*Le < R)",
            ));
        }
        Ok(())
    }

    #[inline]
    fn wl(&self, l: T) -> T {
        self.omega0 * l * T::lit(OHM_PER_RAD_NS_PH)
    }
}

/// Scattering data of the coupler at one mutual inductance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CouplerPoint<T> {
    /// Mutual inductance, pH.
    pub m: T,
    pub t: Cx<T>,
    pub r_in: Cx<T>,
    pub r_out: Cx<T>,
    pub b: Cx<T>,
    /// Frequency pull relative to `M = 0`, rad/ns.
    pub delta_omega: T,
}

/// Raw amplitudes in the `e^{+iωt}` frame, plus `t/M`.
struct Raw<T> {
    b: Cx<T>,
    r_in: Cx<T>,
    t: Cx<T>,
    t_per_m: Cx<T>,
}

fn raw<T: Real>(p: &CouplerParams<T>, m: T) -> Result<Raw<T>> {
    let one = cr(T::one());
    let i = cx(T::zero(), T::one());
    let l1 = p.l1g + p.mg + m;
    let l2 = p.l2g + p.mg + m;
    if !(l1 > T::zero() && l2 > T::zero()) {
        return Err(Error::param("m", "L1 and L2 must stay positive"));
    }
    let z2 = one + i * (p.wl(l2) / p.r_tl);
    let wmm = p.wl(m) * m;
    let inner = one - i * (wmm / (p.r_tl * l1)) / z2;
    let b = i * (p.wl(l1) / p.r_res) / (cr(l1 / p.le) + one / inner);
    let den = one + b;
    if den.norm() == T::zero() {
        return Err(Error::Singular("1 + b = 0"));
    }
    let r_in = -(one - b) / den;
    let two_w = T::lit(2.0) * p.omega0 * T::lit(OHM_PER_RAD_NS_PH);
    let t_per_m = i * two_w / den * (cr(T::one() / p.r_res) + i * b / p.wl(p.le)) / z2 * (p.r_res / p.r_tl).sqrt();
    Ok(Raw {
        b,
        r_in,
        t: t_per_m * m,
        t_per_m,
    })
}

/// Scattering amplitudes and frequency pull at mutual inductance `m` (pH).
pub fn amplitudes<T: Real>(params: &CouplerParams<T>, m: T) -> Result<CouplerPoint<T>> {
    if !m.is_finite() {
        return Err(Error::NonFinite("m"));
    }
    let r = raw(params, m)?;
    let r0 = raw(params, T::zero())?;
    let (b, r_in, t, u) = (r.b.conj(), r.r_in.conj(), r.t.conj(), r.t_per_m.conj());
    let r_out = -r_in.conj() * u / u.conj();
    let delta_omega = -(params.omega0 / T::PI()) * (r.r_in / r0.r_in).conj().arg();
    Ok(CouplerPoint {
        m,
        t,
        r_in,
        r_out,
        b,
        delta_omega,
    })
}

/// Frequency pull `-(ω₀/π) arg[r_in(M)/r_in(0)]`, rad/ns.
pub fn detuning<T: Real>(params: &CouplerParams<T>, m: T) -> Result<T> {
    amplitudes(params, m).map(|p| p.delta_omega)
}

/// Weak-coupling approximations of `(b, r_in, t)`.
pub fn small_b_approximation<T: Real>(params: &CouplerParams<T>, m: T) -> (Cx<T>, Cx<T>, Cx<T>) {
    let i = cx(T::zero(), T::one());
    let one = cr(T::one());
    let l1 = params.l1g + params.mg + m;
    let l2 = params.l2g + params.mg + m;
    let b = i * (params.wl(params.le) / params.r_res / (T::one() + params.le / l1));
    let phase = T::lit(2.0) * params.wl(params.le) * l1 / (params.r_res * (l1 + params.le));
    let r_in = -(-i * phase).exp();
    let t = i * (T::lit(2.0) * params.wl(params.le) * m / ((params.r_res * params.r_tl).sqrt() * (l1 + params.le)))
        / (one + i * (params.wl(l2) / params.r_tl));
    (b.conj(), r_in.conj(), t.conj())
}

/// Effective inductance of a resonator section of length `d`, pH.
pub fn effective_inductance<T: Real>(r_res: T, omega: T, d_over_lambda: T) -> Result<T> {
    if !(d_over_lambda >= T::zero() && d_over_lambda < T::lit(0.25)) {
        return Err(Error::Domain {
            what: "d/lambda",
            value: d_over_lambda.as_f64(),
            domain: "[0, 0.25)",
        });
    }
    if !(r_res > T::zero() && omega > T::zero()) {
        return Err(Error::param("r_res/omega", "must be positive"));
    }
    Ok(r_res / omega * (T::lit(2.0) * T::PI() * d_over_lambda).tan() / T::lit(OHM_PER_RAD_NS_PH))
}

/// Josephson inductance of a dc SQUID, pH. Currents in µA, flux in units of Φ₀.
pub fn flux_to_lj<T: Real>(ic1: T, ic2: T, phi_ext: T) -> Result<T> {
    if !(ic1 > T::zero() && ic2 > T::zero()) {
        return Err(Error::param("ic", "critical currents must be positive"));
    }
    let two = T::lit(2.0);
    let s = ic1 * ic1 + ic2 * ic2 + two * ic1 * ic2 * (two * T::PI() * phi_ext).cos();
    if !(s > T::zero()) {
        return Err(Error::Singular("SQUID critical current vanishes"));
    }
    // Φ₀/(2π · 1 µA) in pH
    let unit = T::lit(FLUX_QUANTUM / (2.0 * std::f64::consts::PI) / 1e-6 * 1e12);
    Ok(unit / s.sqrt())
}

/// Closed-form small-coupling detuning estimates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinearDetuning<T> {
    /// `Δω/|t|` at vanishing coupling, rad/ns.
    pub slope: T,
    /// `dΔω/dM` at `M = 0`, rad/ns per pH.
    pub per_m: T,
    l0: T,
    le: T,
    coef: T,
}

impl<T: Real> LinearDetuning<T> {
    /// Linear-in-M estimate, rad/ns.
    pub fn linear_in_m(&self, m: T) -> T {
        self.per_m * m
    }

    /// Estimate with `M` kept in the denominator, rad/ns.
    pub fn improved(&self, m: T) -> T {
        self.coef * m / ((self.l0 + self.le) * (self.l0 + self.le + m))
    }

    /// Linear-in-|t| estimate, rad/ns.
    pub fn from_abs_t(&self, t_abs: T) -> T {
        self.slope * t_abs
    }
}

pub fn detuning_linear<T: Real>(params: &CouplerParams<T>) -> Result<LinearDetuning<T>> {
    params.validate()?;
    let one = T::one();
    let pi = T::PI();
    let w = params.omega0;
    let l1 = params.l1g + params.mg;
    let l2 = params.l2g + params.mg;
    let b0 = params.wl(params.le) / params.r_res / (one + params.le / l1);
    let nb = one + b0 * b0;
    let slope = -(w / pi) * (one + (params.wl(l2) / params.r_tl).powi(2)).sqrt() / nb.sqrt()
        * (params.r_tl / params.r_res).sqrt()
        * params.le
        / (l1 + params.le);
    let coef = -T::lit(2.0) * w * params.wl(params.le) * params.le / (nb * pi * params.r_res);
    let per_m = coef / ((l1 + params.le) * (l1 + params.le));
    Ok(LinearDetuning {
        slope,
        per_m,
        l0: l1,
        le: params.le,
        coef,
    })
}

/// Root finder for `|t(M)| = x` on the positive-M branch.
#[derive(Clone, Debug)]
pub struct MInverter<T> {
    params: CouplerParams<T>,
    max_doublings: usize,
}

impl<T: Real> MInverter<T> {
    pub fn new(params: CouplerParams<T>) -> Result<Self> {
        params.validate()?;
        Ok(Self {
            params,
            max_doublings: 40,
        })
    }

    fn abs_t(&self, m: T) -> Result<T> {
        raw(&self.params, m).map(|r| r.t.norm())
    }

    /// Mutual inductance in pH with `|t(M)| = target`.
    pub fn invert(&self, target: T) -> Result<T> {
        if !(target >= T::zero() && target.is_finite()) {
            return Err(Error::param("target", "|t| must be finite and non-negative"));
        }
        if target == T::zero() {
            return Ok(T::zero());
        }
        let mut lo = T::zero();
        let mut f_lo = T::zero();
        let mut hi = self.params.mg;
        let mut f_hi = self.abs_t(hi)?;
        let mut n = 0;
        while f_hi < target {
            if f_hi <= f_lo || n >= self.max_doublings {
                return Err(Error::CouplerRange {
                    target: target.as_f64(),
                    max: f_lo.max(f_hi).as_f64(),
                });
            }
            lo = hi;
            f_lo = f_hi;
            hi = hi + hi;
            f_hi = self.abs_t(hi)?;
            n += 1;
        }
        let probes = 16;
        let mut prev = f_lo;
        for k in 1..=probes {
            let m = lo + (hi - lo) * T::from_usize(k).unwrap() / T::from_usize(probes).unwrap();
            let v = self.abs_t(m)?;
            if v < prev {
                return Err(Error::NonMonotone { m_hi: hi.as_f64() });
            }
            prev = v;
        }

        let (mut a, mut b) = (lo, hi);
        let (mut fa, mut fb) = (f_lo - target, f_hi - target);
        let tol_f = T::lit(1e-14).max(T::epsilon() * T::lit(16.0));
        let tol_m = hi * T::epsilon() * T::lit(4.0);
        let mut x = b;
        for _ in 0..200 {
            let secant = b - fb * (b - a) / (fb - fa);
            let mid = (a + b) / T::lit(2.0);
            x = if secant > a && secant < b && (secant - a).min(b - secant) > (b - a) * T::lit(1e-3) {
                secant
            } else {
                mid
            };
            let fx = self.abs_t(x)? - target;
            if fx.abs() <= tol_f {
                return Ok(x);
            }
            if fx < T::zero() {
                a = x;
                fa = fx;
            } else {
                b = x;
                fb = fx;
            }
            if b - a <= tol_m {
                break;
            }
        }
        Ok(x)
    }

    pub fn params(&self) -> &CouplerParams<T> {
        &self.params
    }
}

/// Mutual inductance giving `|t| = t_abs_target`, pH.
pub fn invert_m<T: Real>(params: &CouplerParams<T>, t_abs_target: T) -> Result<T> {
    MInverter::new(params.clone())?.invert(t_abs_target)
}

/// Pulse and detuning produced by driving one coupler along `pulse_abs`.
#[derive(Clone, Debug, PartialEq)]
pub struct CouplerSchedule<T> {
    /// Complex transmission amplitude.
    pub pulse: PulseShape<T>,
    /// Applied detuning `(1 - c) Δω`, rad/ns.
    pub detuning: UniformSeries<T, T>,
    /// Mutual inductance at each grid node, pH.
    pub m: Vec<T>,
}

/// Converts a desired `|t(t)|` into the coupler's complex amplitude and
/// the detuning left after compensating a fraction `c`.
pub fn schedule<T: Real>(
    params: &CouplerParams<T>,
    pulse: &PulseShape<T>,
    grid_intervals: usize,
    compensation: T,
) -> Result<CouplerSchedule<T>> {
    if !(compensation >= T::zero() && compensation <= T::one()) {
        return Err(Error::param("compensation", "must lie in [0, 1]"));
    }
    let inv = MInverter::new(params.clone())?;
    let grid = pulse.sample(grid_intervals)?;
    let n = grid.len();
    let mut m = Vec::with_capacity(n);
    let mut t = Vec::with_capacity(n);
    let mut dw = Vec::with_capacity(n);
    for v in grid.values() {
        let mk = inv.invert(v.norm())?;
        let pt = amplitudes(params, mk)?;
        m.push(mk);
        t.push(pt.t);
        dw.push((T::one() - compensation) * pt.delta_omega);
    }
    let bps = grid.breakpoints().to_vec();
    Ok(CouplerSchedule {
        pulse: PulseShape::Sampled(UniformSeries::new(grid.dt(), t, bps.clone())?),
        detuning: UniformSeries::new(grid.dt(), dw, bps)?,
        m,
    })
}
