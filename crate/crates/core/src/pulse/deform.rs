use crate::error::{Error, Result};
use crate::rng::derive_seed;
use crate::scalar::{Cx, Real};

use super::noise::generate_noise_trace;
use super::shape::{AnalyticPulse, Branch, PulseShape, UniformSeries, DEFAULT_GRID_INTERVALS};
use super::ProtocolParams;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum NoiseKind {
    #[default]
    None,
    /// `t (1 + a ξ)`
    Multiplicative,
    /// `t + a t_max ξ`
    Additive,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NoiseSpec<T> {
    pub kind: NoiseKind,
    pub amplitude: T,
    /// Node spacing of the random signal, ns.
    pub dt_grid: T,
    pub seed: u64,
}

impl<T: Real> Default for NoiseSpec<T> {
    fn default() -> Self {
        Self {
            kind: NoiseKind::None,
            amplitude: T::zero(),
            dt_grid: T::one(),
            seed: 0,
        }
    }
}

/// Everything that can make the applied pulses differ from the design.
///
/// `None` overrides keep the design value.
#[derive(Clone, Debug, PartialEq)]
pub struct DeformationSpec<T> {
    pub t_max_e: Option<Cx<T>>,
    pub t_max_r: Option<Cx<T>>,
    pub tau_e: Option<T>,
    pub tau_r: Option<T>,
    pub t_m_e: Option<T>,
    pub t_m_r: Option<T>,
    pub alpha_e: T,
    pub alpha_r: T,
    /// Gaussian filter width, ns.
    pub sigma: T,
    pub noise: NoiseSpec<T>,
    pub grid_intervals: usize,
}

impl<T: Real> Default for DeformationSpec<T> {
    fn default() -> Self {
        Self {
            t_max_e: None,
            t_max_r: None,
            tau_e: None,
            tau_r: None,
            t_m_e: None,
            t_m_r: None,
            alpha_e: T::zero(),
            alpha_r: T::zero(),
            sigma: T::zero(),
            noise: NoiseSpec::default(),
            grid_intervals: DEFAULT_GRID_INTERVALS,
        }
    }
}

impl<T: Real> DeformationSpec<T> {
    pub fn validate(&self, t_f: T) -> Result<()> {
        if !(self.sigma >= T::zero()) {
            return Err(Error::param("sigma", "must be non-negative"));
        }
        if self.sigma > t_f / T::lit(2.0) {
            return Err(Error::Domain {
                what: "sigma",
                value: self.sigma.as_f64(),
                domain: "[0, t_f/2]",
            });
        }
        if !(self.noise.amplitude >= T::zero()) {
            return Err(Error::param("noise.amplitude", "must be non-negative"));
        }
        if !(self.noise.dt_grid > T::zero()) {
            return Err(Error::param("noise.dt_grid", "must be positive"));
        }
        if self.grid_intervals < 16 {
            return Err(Error::param("grid_intervals", "need at least 16 intervals"));
        }
        for (name, v) in [("tau_e", self.tau_e), ("tau_r", self.tau_r)] {
            if let Some(v) = v {
                if !(v > T::zero()) {
                    return Err(Error::param(name, "must be positive"));
                }
            }
        }
        for (name, v) in [("t_m_e", self.t_m_e), ("t_m_r", self.t_m_r)] {
            if let Some(v) = v {
                if !(v > T::zero() && v < t_f) {
                    return Err(Error::param(name, "mid-time must lie inside (0, t_f)"));
                }
            }
        }
        for (name, v) in [("t_max_e", self.t_max_e), ("t_max_r", self.t_max_r)] {
            if let Some(v) = v {
                let a = v.norm();
                if !(a > T::zero() && a <= T::one()) {
                    return Err(Error::param(name, "modulus must lie in (0, 1]"));
                }
            }
        }
        for (name, v) in [("alpha_e", self.alpha_e), ("alpha_r", self.alpha_r)] {
            if !v.is_finite() {
                return Err(Error::NonFinite(name));
            }
        }
        Ok(())
    }

    fn actual(&self, p: &ProtocolParams<T>, branch: Branch) -> AnalyticPulse<T> {
        let tau_e = self.tau_e.unwrap_or(p.tau_e);
        let tau_r = self.tau_r.unwrap_or(p.tau_r);
        match branch {
            Branch::Emitter => AnalyticPulse {
                branch,
                t_max: self.t_max_e.unwrap_or(p.t_max_e),
                tau_e,
                tau_r,
                t_m: self.t_m_e.unwrap_or(p.t_m_e),
                t_f: p.t_f,
                warp: self.alpha_e,
            },
            Branch::Receiver => AnalyticPulse {
                branch,
                t_max: self.t_max_r.unwrap_or(p.t_max_r),
                tau_e,
                tau_r,
                t_m: self.t_m_r.unwrap_or(p.t_m_r),
                t_f: p.t_f,
                warp: self.alpha_r,
            },
        }
    }
}

/// Builds the applied pulse pair on a uniform grid.
///
/// Order: actual parameters, warp, noise, Gaussian filter.
pub fn apply_deformations<T: Real>(
    params: &ProtocolParams<T>,
    spec: &DeformationSpec<T>,
) -> Result<(PulseShape<T>, PulseShape<T>)> {
    spec.validate(params.t_f)?;
    let mut out = Vec::with_capacity(2);
    for (stream, branch) in [(0u64, Branch::Emitter), (1u64, Branch::Receiver)] {
        let pulse = spec.actual(params, branch);
        let mut series = PulseShape::Analytic(pulse.clone()).sample(spec.grid_intervals)?;

        if spec.noise.kind != NoiseKind::None && spec.noise.amplitude > T::zero() {
            let trace = generate_noise_trace(spec.noise.dt_grid, params.t_f, derive_seed(spec.noise.seed, &[stream]))?;
            let a = spec.noise.amplitude;
            let dt = series.dt();
            for (k, v) in series.values_mut().iter_mut().enumerate() {
                let xi = trace.eval(dt * T::from_usize(k).unwrap());
                *v = match spec.noise.kind {
                    NoiseKind::Multiplicative => *v * (T::one() + a * xi),
                    NoiseKind::Additive => *v + pulse.t_max * (a * xi),
                    NoiseKind::None => *v,
                };
            }
        }

        if spec.sigma > T::zero() {
            series = gaussian_filter(&series, spec.sigma)?;
        }
        out.push(PulseShape::Sampled(series));
    }
    let r = out.pop().unwrap();
    let e = out.pop().unwrap();
    Ok((e, r))
}

/// Normalized Gaussian convolution with constant continuation past both ends.
///
/// The window is ±6σ and the quadrature is the trapezoid rule on the series
/// grid. Breakpoints are dropped since the result is smooth.
pub fn gaussian_filter<T: Real>(series: &UniformSeries<T, Cx<T>>, sigma: T) -> Result<UniformSeries<T, Cx<T>>> {
    if !(sigma > T::zero()) {
        return Err(Error::param("sigma", "must be positive"));
    }
    let h = series.dt();
    let half = (T::lit(6.0) * sigma / h).ceil().to_usize().unwrap_or(0).max(1);
    let inv = T::one() / (T::lit(2.0) * sigma * sigma);
    let mut weights: Vec<T> = (0..=half)
        .map(|k| {
            let x = h * T::from_usize(k).unwrap();
            (-(x * x) * inv).exp()
        })
        .collect();
    weights[half] *= T::lit(0.5);
    let norm = weights[0] + T::lit(2.0) * weights[1..].iter().copied().sum::<T>();
    for w in &mut weights {
        *w /= norm;
    }

    let src = series.values();
    let n = src.len() as isize;
    let at = |j: isize| src[j.clamp(0, n - 1) as usize];
    let values = (0..n)
        .map(|i| {
            let mut acc = at(i) * weights[0];
            for (k, &w) in weights.iter().enumerate().skip(1) {
                let k = k as isize;
                acc += (at(i - k) + at(i + k)) * w;
            }
            acc
        })
        .collect();
    UniformSeries::new(h, values, Vec::new())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pulse::design_protocol;
    use num_complex::Complex;

    fn params() -> ProtocolParams<f64> {
        design_protocol(Complex::new(0.05, 0.0), Complex::new(0.05, 0.0), 1.0 / 12.0, 0.999).unwrap()
    }

    #[test]
    fn identity_matches_closed_form() {
        let p = params();
        let (e, r) = apply_deformations(&p, &DeformationSpec::default()).unwrap();
        let (ie, ir) = (p.emitter(), p.receiver());
        for k in 0..=2000 {
            let t = p.t_f * k as f64 / 2000.0;
            assert!((e.eval(t) - ie.eval(t)).norm() < 1e-9);
            assert!((r.eval(t) - ir.eval(t)).norm() < 1e-9);
        }
    }

    #[test]
    fn warp_fixed_points() {
        let p = params();
        let spec = DeformationSpec {
            alpha_e: 0.3,
            alpha_r: -0.2,
            ..Default::default()
        };
        let (e, r) = apply_deformations(&p, &spec).unwrap();
        assert_eq!(e.eval(p.t_m_e), p.t_max_e);
        assert_eq!(r.eval(p.t_m_r), p.t_max_r);
        let mut a = AnalyticPulse::emitter(&p);
        a.warp = 0.7;
        assert_eq!(a.eval(p.t_f), p.t_max_e);
        // zero value stays zero
        a.t_max = Complex::new(0.05, 0.0);
        let z = Complex::new(0.0, 0.0);
        assert_eq!(z * (Complex::new(1.0, 0.0) + (z - a.t_max) / a.t_max * 0.7), z);
    }

    #[test]
    fn filter_preserves_constants() {
        let c = Complex::new(0.03, -0.01);
        let s = UniformSeries::new(0.1, vec![c; 500], vec![]).unwrap();
        for sigma in [0.05, 1.0, 7.3, 20.0] {
            let f = gaussian_filter(&s, sigma).unwrap();
            for v in f.values() {
                assert!((*v - c).norm() < 1e-8 * c.norm());
            }
        }
    }

    #[test]
    fn filter_too_wide_rejected() {
        let p = params();
        let spec = DeformationSpec {
            sigma: p.t_f * 0.6,
            ..Default::default()
        };
        assert!(apply_deformations(&p, &spec).is_err());
    }

    #[test]
    fn noise_deterministic() {
        let p = params();
        let spec = DeformationSpec {
            noise: NoiseSpec {
                kind: NoiseKind::Multiplicative,
                amplitude: 0.05,
                dt_grid: 1.0,
                seed: 9,
            },
            ..Default::default()
        };
        let a = apply_deformations(&p, &spec).unwrap();
        let b = apply_deformations(&p, &spec).unwrap();
        assert_eq!(a, b);
        assert_ne!(
            a.0.eval(10.0) / p.emitter().eval(10.0),
            a.1.eval(10.0) / p.receiver().eval(10.0)
        );
    }
}
