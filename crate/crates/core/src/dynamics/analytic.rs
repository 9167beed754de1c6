use crate::error::{Error, Result};
use crate::scalar::Real;

/// Closed-form inefficiency estimates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AnalyticInefficiency<T> {
    /// `[τ_r e^{-t_m/τ_r} + τ_e e^{-(t_f-t_m)/τ_e}] / (τ_e + τ_r)`
    pub two_term: T,
    /// `exp[-t_f/(τ_e + τ_r)]`
    pub optimized: T,
}

pub fn analytic_inefficiency<T: Real>(tau_e: T, tau_r: T, t_m: T, t_f: T) -> Result<AnalyticInefficiency<T>> {
    for (name, v) in [("tau_e", tau_e), ("tau_r", tau_r), ("t_m", t_m), ("t_f", t_f)] {
        if !(v > T::zero()) {
            return Err(Error::param(name, "must be positive"));
        }
    }
    let s = tau_e + tau_r;
    Ok(AnalyticInefficiency {
        two_term: (tau_r * (-t_m / tau_r).exp() + tau_e * (-(t_f - t_m) / tau_e).exp()) / s,
        optimized: (-t_f / s).exp(),
    })
}

/// Efficiency with line loss and intrinsic relaxation; `None` means no relaxation.
pub fn dissipation_scaling<T: Real>(eta_design: T, eta_tl: T, t1_e: Option<T>, t1_r: Option<T>, t_f: T) -> T {
    let two = T::lit(2.0);
    let f = |t1: Option<T>| t1.map_or(T::one(), |t1| (-t_f / (two * t1)).exp());
    eta_design * eta_tl * f(t1_e) * f(t1_r)
}

/// Coefficient of `(Δω τ)²` in the added inefficiency from constant detuning.
pub fn detuning_coefficient<T: Real>(eta_design: T) -> Result<T> {
    if !(eta_design > T::zero() && eta_design < T::one()) {
        return Err(Error::param("eta_design", "must lie in (0, 1)"));
    }
    let two = T::lit(2.0);
    let loss = T::one() - eta_design;
    let l = loss.ln();
    Ok(two - loss * (two - two * l + l * l))
}
