//! Ideal coupler pulse shapes and their deformations.

mod deform;
mod noise;
mod shape;
mod waveform;

pub use deform::{apply_deformations, gaussian_filter, DeformationSpec, NoiseKind, NoiseSpec};
pub use noise::{estimate_noise_variance, generate_noise_trace, NoiseTrace};
pub use shape::{AnalyticPulse, Branch, PulseShape, UniformSeries, DEFAULT_GRID_INTERVALS};
pub use waveform::{couplings_from_waveform, WaveformCouplings};

use crate::error::{Error, Result};
use crate::scalar::{Cx, Real};

/// Largest coupler amplitude accepted by the single-mode model.
pub const MAX_AMPLITUDE: f64 = 0.2;

/// Parameter set that fully determines the ideal pulse pair.
#[derive(Clone, Debug, PartialEq)]
pub struct ProtocolParams<T> {
    pub t_max_e: Cx<T>,
    pub t_max_r: Cx<T>,
    /// Buildup time of the emitter, ns.
    pub tau_e: T,
    /// Leakage time of the receiver, ns.
    pub tau_r: T,
    pub tau_rt_e: T,
    pub tau_rt_r: T,
    pub t_m_e: T,
    pub t_m_r: T,
    pub t_f: T,
    pub eta_design: T,
}

fn check_amplitude<T: Real>(name: &'static str, t: Cx<T>) -> Result<()> {
    let a = t.norm();
    if !a.is_finite() || a <= T::zero() || a > T::lit(MAX_AMPLITUDE) {
        return Err(Error::param(
            name,
            format!("|t| = {} must lie in (0, {MAX_AMPLITUDE}]", a.as_f64()),
        ));
    }
    Ok(())
}

fn check_positive<T: Real>(name: &'static str, x: T) -> Result<()> {
    if !x.is_finite() || x <= T::zero() {
        return Err(Error::param(name, format!("{} must be positive", x.as_f64())));
    }
    Ok(())
}

/// Designs the optimal symmetric-condition protocol for the given maxima.
///
/// Both resonators share the round-trip time `tau_rt` (ns).
pub fn design_protocol<T: Real>(t_max_e: Cx<T>, t_max_r: Cx<T>, tau_rt: T, eta_design: T) -> Result<ProtocolParams<T>> {
    ProtocolParams::design(t_max_e, t_max_r, tau_rt, tau_rt, eta_design)
}

impl<T: Real> ProtocolParams<T> {
    /// Same as [`design_protocol`] with separate round-trip times.
    pub fn design(t_max_e: Cx<T>, t_max_r: Cx<T>, tau_rt_e: T, tau_rt_r: T, eta_design: T) -> Result<Self> {
        check_amplitude("t_max_e", t_max_e)?;
        check_amplitude("t_max_r", t_max_r)?;
        check_positive("tau_rt_e", tau_rt_e)?;
        check_positive("tau_rt_r", tau_rt_r)?;
        if !(eta_design > T::zero() && eta_design < T::one()) {
            return Err(Error::param(
                "eta_design",
                format!("{} must lie in (0, 1)", eta_design.as_f64()),
            ));
        }
        let tau_e = tau_rt_e / t_max_e.norm_sqr();
        let tau_r = tau_rt_r / t_max_r.norm_sqr();
        let t_f = -(tau_e + tau_r) * (T::one() - eta_design).ln();
        let t_m = t_f * tau_r / (tau_e + tau_r);
        Ok(Self {
            t_max_e,
            t_max_r,
            tau_e,
            tau_r,
            tau_rt_e,
            tau_rt_r,
            t_m_e: t_m,
            t_m_r: t_m,
            t_f,
            eta_design,
        })
    }

    /// Checks the structural invariants of a hand-built parameter set.
    pub fn validate(&self) -> Result<()> {
        check_amplitude("t_max_e", self.t_max_e)?;
        check_amplitude("t_max_r", self.t_max_r)?;
        for (name, x) in [
            ("tau_e", self.tau_e),
            ("tau_r", self.tau_r),
            ("tau_rt_e", self.tau_rt_e),
            ("tau_rt_r", self.tau_rt_r),
            ("t_f", self.t_f),
        ] {
            check_positive(name, x)?;
        }
        let tol = T::lit(1e-9);
        if ((self.tau_e * self.t_max_e.norm_sqr() - self.tau_rt_e) / self.tau_rt_e).abs() > tol {
            return Err(Error::param("tau_e", "must equal tau_rt_e / |t_max_e|^2"));
        }
        if ((self.tau_r * self.t_max_r.norm_sqr() - self.tau_rt_r) / self.tau_rt_r).abs() > tol {
            return Err(Error::param("tau_r", "must equal tau_rt_r / |t_max_r|^2"));
        }
        for (name, tm) in [("t_m_e", self.t_m_e), ("t_m_r", self.t_m_r)] {
            if !(tm > T::zero() && tm < self.t_f) {
                return Err(Error::param(name, "mid-time must lie strictly inside (0, t_f)"));
            }
        }
        if !(self.eta_design > T::zero() && self.eta_design < T::one()) {
            return Err(Error::param("eta_design", "must lie in (0, 1)"));
        }
        Ok(())
    }

    /// Quality factor π/|t|² of each resonator.
    pub fn quality_factors(&self) -> (T, T) {
        (T::PI() / self.t_max_e.norm_sqr(), T::PI() / self.t_max_r.norm_sqr())
    }

    /// Closed-form emitter pulse.
    pub fn emitter(&self) -> PulseShape<T> {
        PulseShape::Analytic(AnalyticPulse::emitter(self))
    }

    /// Closed-form receiver pulse.
    pub fn receiver(&self) -> PulseShape<T> {
        PulseShape::Analytic(AnalyticPulse::receiver(self))
    }
}

/// Evaluates both ideal pulses at time `t` (ns).
pub fn eval_ideal<T: Real>(params: &ProtocolParams<T>, t: T) -> Result<(Cx<T>, Cx<T>)> {
    if !(t >= T::zero() && t <= params.t_f) {
        return Err(Error::Domain {
            what: "t",
            value: t.as_f64(),
            domain: "[0, t_f]",
        });
    }
    Ok((
        AnalyticPulse::emitter(params).eval(t),
        AnalyticPulse::receiver(params).eval(t),
    ))
}

/// Required ON/OFF ratios of the two couplers.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OnOffRatios<T> {
    /// `sqrt[(1 + tau_r/tau_e)/(1 - eta)]`.
    pub ratio_e: T,
    /// `sqrt[(1 + tau_e/tau_r)/(1 - eta)]`.
    pub ratio_r: T,
    /// `|t_max_e| / |t_e(0)|` from the closed form.
    pub exact_e: T,
    /// `|t_max_r| / |t_r(t_f)|` from the closed form.
    pub exact_r: T,
}

pub fn on_off_ratios<T: Real>(params: &ProtocolParams<T>) -> OnOffRatios<T> {
    let one = T::one();
    let loss = one - params.eta_design;
    let e = AnalyticPulse::emitter(params);
    let r = AnalyticPulse::receiver(params);
    OnOffRatios {
        ratio_e: ((one + params.tau_r / params.tau_e) / loss).sqrt(),
        ratio_r: ((one + params.tau_e / params.tau_r) / loss).sqrt(),
        exact_e: params.t_max_e.norm() / e.eval(T::zero()).norm(),
        exact_r: params.t_max_r.norm() / r.eval(params.t_f).norm(),
    }
}

/// Figures of merit when only the receiver coupler is tunable.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SingleCouplerBounds<T> {
    pub t_f: T,
    pub on_off_ratio: T,
    pub kappa_r_opt: T,
    /// `3 + ln[1/(1-eta)]`.
    pub log_factor: T,
}

pub fn single_coupler_bounds<T: Real>(kappa_max: T, eta: T) -> Result<SingleCouplerBounds<T>> {
    check_positive("kappa_max", kappa_max)?;
    if !(eta > T::zero() && eta < T::one()) {
        return Err(Error::param("eta", "must lie in (0, 1)"));
    }
    let loss = T::one() - eta;
    let ln = T::lit(3.0) + (T::one() / loss).ln();
    Ok(SingleCouplerBounds {
        t_f: ln / (kappa_max * loss),
        on_off_ratio: ln.sqrt() / loss,
        kappa_r_opt: loss * kappa_max / (T::one() + T::one() / ln),
        log_factor: ln,
    })
}
