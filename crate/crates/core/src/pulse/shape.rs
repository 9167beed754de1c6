use std::ops::{Add, Mul};

use crate::error::{Error, Result};
use crate::scalar::{cr, Cx, Real};

use super::ProtocolParams;

/// Which coupler a closed-form pulse belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Branch {
    Emitter,
    Receiver,
}

/// Closed-form pulse, optionally warped.
#[derive(Clone, Debug, PartialEq)]
pub struct AnalyticPulse<T> {
    pub branch: Branch,
    pub t_max: Cx<T>,
    pub tau_e: T,
    pub tau_r: T,
    /// Time at which the pulse switches to its constant part.
    pub t_m: T,
    pub t_f: T,
    /// Warp coefficient, zero for the undeformed shape.
    pub warp: T,
}

impl<T: Real> AnalyticPulse<T> {
    pub fn emitter(p: &ProtocolParams<T>) -> Self {
        Self {
            branch: Branch::Emitter,
            t_max: p.t_max_e,
            tau_e: p.tau_e,
            tau_r: p.tau_r,
            t_m: p.t_m_e,
            t_f: p.t_f,
            warp: T::zero(),
        }
    }

    pub fn receiver(p: &ProtocolParams<T>) -> Self {
        Self {
            branch: Branch::Receiver,
            t_max: p.t_max_r,
            tau_e: p.tau_e,
            tau_r: p.tau_r,
            t_m: p.t_m_r,
            t_f: p.t_f,
            warp: T::zero(),
        }
    }

    fn base(&self, t: T) -> Cx<T> {
        let one = T::one();
        match self.branch {
            Branch::Emitter => {
                if t >= self.t_m {
                    return self.t_max;
                }
                let q = self.tau_e / self.tau_r;
                let d = ((one + q) * ((self.t_m - t) / self.tau_r).exp() - one).sqrt();
                self.t_max * (q.sqrt() / d)
            }
            Branch::Receiver => {
                if t <= self.t_m {
                    return self.t_max;
                }
                if t > self.t_f {
                    return Cx::new(T::zero(), T::zero());
                }
                let q = self.tau_r / self.tau_e;
                let d = ((one + q) * ((t - self.t_m) / self.tau_e).exp() - one).sqrt();
                self.t_max * (q.sqrt() / d)
            }
        }
    }

    #[inline]
    pub fn eval(&self, t: T) -> Cx<T> {
        let v = self.base(t);
        if self.warp == T::zero() {
            v
        } else {
            v * (cr(T::one()) + (v - self.t_max) / self.t_max * self.warp)
        }
    }
}

/// Values on the uniform grid `t_k = k dt`, `k = 0..n`, with local cubic
/// interpolation that never reaches across a breakpoint.
#[derive(Clone, Debug, PartialEq)]
pub struct UniformSeries<T, V> {
    dt: T,
    values: Vec<V>,
    breakpoints: Vec<T>,
}

impl<T, V> UniformSeries<T, V>
where
    T: Real,
    V: Copy + Add<Output = V> + Mul<T, Output = V>,
{
    pub fn new(dt: T, values: Vec<V>, mut breakpoints: Vec<T>) -> Result<Self> {
        if !(dt > T::zero() && dt.is_finite()) {
            return Err(Error::param("dt", "grid spacing must be positive"));
        }
        if values.is_empty() {
            return Err(Error::param("values", "series needs at least one sample"));
        }
        let end = dt * T::from_usize(values.len() - 1).unwrap();
        breakpoints.retain(|&b| b > T::zero() && b < end);
        breakpoints.sort_by(|a, b| a.partial_cmp(b).unwrap());
        breakpoints.dedup();
        Ok(Self {
            dt,
            values,
            breakpoints,
        })
    }

    /// Samples `f` on `n` intervals of `[0, duration]`.
    pub fn from_fn(duration: T, n: usize, breakpoints: Vec<T>, f: impl Fn(T) -> V) -> Result<Self> {
        if n == 0 {
            return Err(Error::param("n", "need at least one interval"));
        }
        let dt = duration / T::from_usize(n).unwrap();
        let values = (0..=n)
            .map(|k| {
                let t = if k == n {
                    duration
                } else {
                    dt * T::from_usize(k).unwrap()
                };
                f(t)
            })
            .collect();
        Self::new(dt, values, breakpoints)
    }

    #[inline]
    pub fn dt(&self) -> T {
        self.dt
    }

    #[inline]
    pub fn values(&self) -> &[V] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [V] {
        &mut self.values
    }

    #[inline]
    pub fn breakpoints(&self) -> &[T] {
        &self.breakpoints
    }

    pub fn clear_breakpoints(&mut self) {
        self.breakpoints.clear();
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn duration(&self) -> T {
        self.dt * T::from_usize(self.values.len() - 1).unwrap()
    }

    pub fn time(&self, k: usize) -> T {
        self.dt * T::from_usize(k).unwrap()
    }

    pub fn map<W, F>(&self, f: F) -> UniformSeries<T, W>
    where
        F: Fn(T, V) -> W,
    {
        UniformSeries {
            dt: self.dt,
            values: self
                .values
                .iter()
                .enumerate()
                .map(|(k, &v)| f(self.time(k), v))
                .collect(),
            breakpoints: self.breakpoints.clone(),
        }
    }

    /// Interpolated value; `t` is clamped to the grid.
    pub fn eval(&self, t: T) -> V {
        let n = self.values.len();
        if n == 1 {
            return self.values[0];
        }
        let end = self.duration();
        let t = t.max(T::zero()).min(end);
        let last = n - 1;
        let s = t / self.dt;
        let i = s.floor().to_usize().unwrap_or(0).min(last - 1);

        let mut lo_t = T::zero();
        let mut hi_t = end;
        for &b in &self.breakpoints {
            if b <= t {
                lo_t = b;
            } else {
                hi_t = b;
                break;
            }
        }
        let eps = T::lit(1e-9);
        let i_lo = ((lo_t / self.dt - eps).ceil().max(T::zero()))
            .to_usize()
            .unwrap_or(0)
            .min(last);
        let i_hi = ((hi_t / self.dt + eps).floor()).to_usize().unwrap_or(last).min(last);

        if i_hi < i_lo + 1 {
            // piece narrower than one grid step
            let u = s - T::from_usize(i).unwrap();
            return self.values[i] * (T::one() - u) + self.values[i + 1] * u;
        }
        let count = (i_hi - i_lo + 1).min(4);
        let start = if count < 4 {
            i_lo
        } else {
            (i.saturating_sub(1)).clamp(i_lo, i_hi - 3)
        };
        lagrange(&self.values[start..start + count], start, s)
    }
}

fn lagrange<T: Real, V>(nodes: &[V], start: usize, s: T) -> V
where
    V: Copy + Add<Output = V> + Mul<T, Output = V>,
{
    let x0 = T::from_usize(start).unwrap();
    let k = nodes.len();
    let mut acc: Option<V> = None;
    for (j, &node) in nodes.iter().enumerate() {
        let xj = x0 + T::from_usize(j).unwrap();
        let mut w = T::one();
        for m in 0..k {
            if m != j {
                let xm = x0 + T::from_usize(m).unwrap();
                w *= (s - xm) / (xj - xm);
            }
        }
        let term = node * w;
        acc = Some(match acc {
            None => term,
            Some(a) => a + term,
        });
    }
    acc.expect("at least one node")
}

/// A coupler amplitude as a function of time on `[0, t_f]`.
#[derive(Clone, Debug, PartialEq)]
pub enum PulseShape<T> {
    Analytic(AnalyticPulse<T>),
    Sampled(UniformSeries<T, Cx<T>>),
}

/// Default number of grid intervals used when sampling a shape.
pub const DEFAULT_GRID_INTERVALS: usize = 1 << 14;

impl<T: Real> PulseShape<T> {
    /// Pulse that is identically zero on `[0, t_f]`.
    pub fn zero(t_f: T) -> Self {
        let z = Cx::new(T::zero(), T::zero());
        PulseShape::Sampled(UniformSeries::new(t_f, vec![z, z], Vec::new()).expect("positive duration"))
    }

    /// Constant pulse on `[0, t_f]`.
    pub fn constant(t_f: T, value: Cx<T>) -> Self {
        PulseShape::Sampled(UniformSeries::new(t_f, vec![value, value], Vec::new()).expect("positive duration"))
    }

    #[inline]
    pub fn eval(&self, t: T) -> Cx<T> {
        match self {
            PulseShape::Analytic(a) => a.eval(t),
            PulseShape::Sampled(s) => s.eval(t),
        }
    }

    pub fn duration(&self) -> T {
        match self {
            PulseShape::Analytic(a) => a.t_f,
            PulseShape::Sampled(s) => s.duration(),
        }
    }

    /// Interior times at which the shape has a kink.
    pub fn breakpoints(&self) -> Vec<T> {
        match self {
            PulseShape::Analytic(a) => {
                if a.t_m > T::zero() && a.t_m < a.t_f {
                    vec![a.t_m]
                } else {
                    Vec::new()
                }
            }
            PulseShape::Sampled(s) => s.breakpoints().to_vec(),
        }
    }

    /// Samples onto `n` uniform intervals, keeping breakpoints.
    pub fn sample(&self, n: usize) -> Result<UniformSeries<T, Cx<T>>> {
        UniformSeries::from_fn(self.duration(), n, self.breakpoints(), |t| self.eval(t))
    }

    /// Largest modulus, exact for sampled shapes and dense-grid for closed forms.
    pub fn max_abs(&self) -> T {
        match self {
            PulseShape::Analytic(a) => {
                let n = 4096;
                let mut m = a.eval(a.t_m.max(T::zero()).min(a.t_f)).norm();
                for k in 0..=n {
                    let t = a.t_f * T::from_usize(k).unwrap() / T::from_usize(n).unwrap();
                    m = m.max(a.eval(t).norm());
                }
                m
            }
            PulseShape::Sampled(s) => s.values().iter().fold(T::zero(), |m, v| m.max(v.norm())),
        }
    }

    pub fn is_finite(&self) -> bool {
        match self {
            PulseShape::Analytic(a) => {
                a.t_max.re.is_finite()
                    && a.t_max.im.is_finite()
                    && a.tau_e.is_finite()
                    && a.tau_r.is_finite()
                    && a.t_m.is_finite()
                    && a.t_f.is_finite()
                    && a.warp.is_finite()
            }
            PulseShape::Sampled(s) => s.values().iter().all(|v| v.re.is_finite() && v.im.is_finite()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pulse::design_protocol;
    use num_complex::Complex;

    #[test]
    fn cubic_reproduced_exactly() {
        let f = |t: f64| 1.0 - 2.0 * t + 0.5 * t * t - 0.1 * t * t * t;
        let s = UniformSeries::from_fn(4.0, 40, vec![], f).unwrap();
        for k in 0..=400 {
            let t = 0.01 * k as f64;
            assert!((s.eval(t) - f(t)).abs() < 1e-12);
        }
    }

    #[test]
    fn stencil_respects_breakpoints() {
        let f = |t: f64| if t < 1.234 { t } else { 1.234 + 3.0 * (t - 1.234) };
        let s = UniformSeries::from_fn(3.0, 30, vec![1.234], f).unwrap();
        for k in 0..=300 {
            let t = 0.01 * k as f64;
            assert!((s.eval(t) - f(t)).abs() < 1e-12, "t = {t}");
        }
    }

    #[test]
    fn sampled_matches_closed_form() {
        let p = design_protocol(Complex::new(0.05, 0.0), Complex::new(0.0, 0.05), 1.0 / 12.0, 0.999).unwrap();
        let e = p.emitter();
        let s = PulseShape::Sampled(e.sample(1 << 14).unwrap());
        for k in 0..=10_000 {
            let t = p.t_f * k as f64 / 10_000.0;
            assert!((s.eval(t) - e.eval(t)).norm() < 1e-9, "t = {t}");
        }
    }

    #[test]
    fn monotone_shapes() {
        let p = design_protocol(Complex::new(0.05, 0.0), Complex::new(0.05, 0.0), 1.0 / 12.0, 0.999).unwrap();
        let (e, r) = (p.emitter(), p.receiver());
        let mut prev_e = 0.0;
        let mut prev_r = f64::INFINITY;
        for k in 0..=10_000 {
            let t = p.t_f * k as f64 / 10_000.0;
            let (ae, ar) = (e.eval(t).norm(), r.eval(t).norm());
            assert!(ae >= prev_e && ar <= prev_r);
            prev_e = ae;
            prev_r = ar;
        }
    }
}
