//! Classical field evolution of the emitter/receiver pair.

mod analytic;

pub use analytic::{analytic_inefficiency, detuning_coefficient, dissipation_scaling, AnalyticInefficiency};

use crate::error::{Error, Result};
use crate::pulse::{ProtocolParams, PulseShape, UniformSeries};
use crate::scalar::{cr, cx, Cx, Real};

/// Resonator frequency offset from the line frame, rad/ns.
#[derive(Clone, Debug, PartialEq)]
pub enum Detuning<T> {
    Constant(T),
    Sampled(UniformSeries<T, T>),
}

impl<T: Real> Default for Detuning<T> {
    fn default() -> Self {
        Detuning::Constant(T::zero())
    }
}

impl<T: Real> Detuning<T> {
    #[inline]
    pub fn eval(&self, t: T) -> T {
        match self {
            Detuning::Constant(d) => *d,
            Detuning::Sampled(s) => s.eval(t),
        }
    }

    fn breakpoints(&self) -> Vec<T> {
        match self {
            Detuning::Constant(_) => Vec::new(),
            Detuning::Sampled(s) => s.breakpoints().to_vec(),
        }
    }

    fn is_finite(&self) -> bool {
        match self {
            Detuning::Constant(d) => d.is_finite(),
            Detuning::Sampled(s) => s.values().iter().all(|v| v.is_finite()),
        }
    }
}

/// Extra resonator decay that does not feed the line.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub enum ExtraDecay<T> {
    #[default]
    None,
    /// Adds `f · κ(t)`.
    ProportionalToLeakage(T),
    /// Adds a constant rate, 1/ns.
    Constant(T),
}

impl<T: Real> ExtraDecay<T> {
    #[inline]
    fn rate(&self, kappa: T) -> T {
        match *self {
            ExtraDecay::None => T::zero(),
            ExtraDecay::ProportionalToLeakage(f) => f * kappa,
            ExtraDecay::Constant(g) => g,
        }
    }
}

/// One complete transfer experiment.
#[derive(Clone, Debug, PartialEq)]
pub struct SimConfig<T> {
    pub emitter: PulseShape<T>,
    pub receiver: PulseShape<T>,
    pub tau_rt_e: T,
    pub tau_rt_r: T,
    pub detuning_e: Detuning<T>,
    pub detuning_r: Detuning<T>,
    /// Energy relaxation times, ns; `None` means no intrinsic loss.
    pub t1_e: Option<T>,
    pub t1_r: Option<T>,
    /// Energy transmission of the line.
    pub eta_tl: T,
    pub extra_decay_e: ExtraDecay<T>,
    pub extra_decay_r: ExtraDecay<T>,
    pub g0: Cx<T>,
    pub b0: Cx<T>,
    /// Integration step, ns; defaults to `min(τ_e, τ_r)/1000`.
    pub dt: Option<T>,
}

impl<T: Real> SimConfig<T> {
    /// Ideal lossless configuration for the given design.
    pub fn ideal(params: &ProtocolParams<T>) -> Self {
        Self::with_pulses(params, params.emitter(), params.receiver())
    }

    /// Lossless configuration with the given applied pulses.
    pub fn with_pulses(params: &ProtocolParams<T>, emitter: PulseShape<T>, receiver: PulseShape<T>) -> Self {
        Self {
            emitter,
            receiver,
            tau_rt_e: params.tau_rt_e,
            tau_rt_r: params.tau_rt_r,
            detuning_e: Detuning::default(),
            detuning_r: Detuning::default(),
            t1_e: None,
            t1_r: None,
            eta_tl: T::one(),
            extra_decay_e: ExtraDecay::None,
            extra_decay_r: ExtraDecay::None,
            g0: cr(T::one()),
            b0: cr(T::zero()),
            dt: None,
        }
    }

    pub fn duration(&self) -> T {
        self.emitter.duration()
    }

    /// Shortest buildup/leakage time reached by either pulse.
    pub fn tau_min(&self) -> T {
        let te = self.emitter.max_abs();
        let tr = self.receiver.max_abs();
        let mut tau = T::infinity();
        if te > T::zero() {
            tau = tau.min(self.tau_rt_e / (te * te));
        }
        if tr > T::zero() {
            tau = tau.min(self.tau_rt_r / (tr * tr));
        }
        tau
    }

    /// Step actually requested, after defaults.
    pub fn step(&self) -> T {
        self.dt.unwrap_or_else(|| {
            let tau = self.tau_min();
            if tau.is_finite() {
                tau / T::lit(1000.0)
            } else {
                self.duration() / T::lit(1000.0)
            }
        })
    }

    pub fn validate(&self) -> Result<()> {
        let t_f = self.duration();
        if !(t_f > T::zero() && t_f.is_finite()) {
            return Err(Error::param("t_f", "pulse duration must be positive"));
        }
        if ((self.receiver.duration() - t_f) / t_f).abs() > T::lit(1e-12) {
            return Err(Error::param("receiver", "pulse durations differ"));
        }
        if !self.emitter.is_finite() {
            return Err(Error::NonFinite("emitter pulse"));
        }
        if !self.receiver.is_finite() {
            return Err(Error::NonFinite("receiver pulse"));
        }
        if !self.detuning_e.is_finite() || !self.detuning_r.is_finite() {
            return Err(Error::NonFinite("detuning"));
        }
        for (name, v) in [("tau_rt_e", self.tau_rt_e), ("tau_rt_r", self.tau_rt_r)] {
            if !(v > T::zero() && v.is_finite()) {
                return Err(Error::param(name, "must be positive"));
            }
        }
        if !(self.eta_tl > T::zero() && self.eta_tl <= T::one()) {
            return Err(Error::param("eta_tl", "must lie in (0, 1]"));
        }
        for (name, v) in [("t1_e", self.t1_e), ("t1_r", self.t1_r)] {
            if let Some(v) = v {
                if !(v > T::zero()) {
                    return Err(Error::param(name, "must be positive"));
                }
            }
        }
        if !(self.g0.norm_sqr() > T::zero()) || !self.g0.re.is_finite() || !self.g0.im.is_finite() {
            return Err(Error::param("g0", "initial emitter field must be non-zero and finite"));
        }
        if !self.b0.re.is_finite() || !self.b0.im.is_finite() {
            return Err(Error::NonFinite("b0"));
        }
        let dt = self.step();
        if !(dt > T::zero() && dt.is_finite()) {
            return Err(Error::param("dt", "must be positive"));
        }
        let limit = self.tau_min() / T::lit(100.0);
        if dt > limit {
            return Err(Error::StepTooLarge {
                dt: dt.as_f64(),
                limit: limit.as_f64(),
            });
        }
        Ok(())
    }

    /// Sorted interior breakpoints of pulses and detunings.
    pub(crate) fn breakpoints(&self) -> Vec<T> {
        let t_f = self.duration();
        let mut b: Vec<T> = self
            .emitter
            .breakpoints()
            .into_iter()
            .chain(self.receiver.breakpoints())
            .chain(self.detuning_e.breakpoints())
            .chain(self.detuning_r.breakpoints())
            .filter(|&x| x > T::zero() && x < t_f)
            .collect();
        b.sort_by(|x, y| x.partial_cmp(y).unwrap());
        b.dedup();
        b
    }

    #[inline]
    fn decay(&self, t1: Option<T>) -> T {
        t1.map_or(T::zero(), |t| T::one() / t)
    }
}

/// Sampled fields on the integration grid.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FieldTrajectory<T> {
    pub t: Vec<T>,
    pub g: Vec<Cx<T>>,
    pub b: Vec<Cx<T>>,
    pub a: Vec<Cx<T>>,
    pub f: Vec<Cx<T>>,
}

impl<T: Real> FieldTrajectory<T> {
    fn push(&mut self, t: T, s: &Sample<T>) {
        self.t.push(t);
        self.g.push(s.g);
        self.b.push(s.b);
        self.a.push(s.a);
        self.f.push(s.f);
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }
}

/// Where the initial energy ended up.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct EnergyLedger<T> {
    pub residual_emitter: T,
    pub received: T,
    pub reflected: T,
    pub dissipated: T,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TransferOutcome<T> {
    pub eta: T,
    /// `arg[B(t_f)/G(0)]`, rad.
    pub phi_f: T,
    pub ledger: EnergyLedger<T>,
    pub warnings: Vec<String>,
}

impl<T: Real> TransferOutcome<T> {
    pub(crate) fn build(g0: Cx<T>, g_end: Cx<T>, b_end: Cx<T>, reflected: T, warnings: Vec<String>) -> Self {
        let e0 = g0.norm_sqr();
        let residual = g_end.norm_sqr();
        let received = b_end.norm_sqr();
        Self {
            eta: received / e0,
            phi_f: (b_end / g0).arg(),
            ledger: EnergyLedger {
                residual_emitter: residual,
                received,
                reflected,
                dissipated: e0 - residual - received - reflected,
            },
            warnings,
        }
    }
}

struct Sample<T> {
    g: Cx<T>,
    b: Cx<T>,
    a: Cx<T>,
    f: Cx<T>,
}

struct Rhs<'a, T> {
    cfg: &'a SimConfig<T>,
    sqrt_tl: T,
    inv_sqrt_rt_e: T,
    inv_sqrt_rt_r: T,
    gamma_e: T,
    gamma_r: T,
}

impl<'a, T: Real> Rhs<'a, T> {
    fn new(cfg: &'a SimConfig<T>) -> Self {
        Self {
            cfg,
            sqrt_tl: cfg.eta_tl.sqrt(),
            inv_sqrt_rt_e: T::one() / cfg.tau_rt_e.sqrt(),
            inv_sqrt_rt_r: T::one() / cfg.tau_rt_r.sqrt(),
            gamma_e: cfg.decay(cfg.t1_e),
            gamma_r: cfg.decay(cfg.t1_r),
        }
    }

    /// Derivatives and the line fields at time `t`.
    #[inline]
    fn eval(&self, t: T, g: Cx<T>, b: Cx<T>) -> (Cx<T>, Cx<T>, Cx<T>, Cx<T>) {
        let half = T::lit(0.5);
        let te = self.cfg.emitter.eval(t);
        let tr = self.cfg.receiver.eval(t);
        let ke = te.norm_sqr() / self.cfg.tau_rt_e;
        let kr = tr.norm_sqr() / self.cfg.tau_rt_r;
        let a = te * g * (self.sqrt_tl * self.inv_sqrt_rt_e);
        let de = self.cfg.detuning_e.eval(t);
        let dr = self.cfg.detuning_r.eval(t);
        let le = ke + self.gamma_e + self.cfg.extra_decay_e.rate(ke);
        let lr = kr + self.gamma_r + self.cfg.extra_decay_r.rate(kr);
        let dg = g * cx(-half * le, -de);
        let db = b * cx(-half * lr, -dr) + tr * a * self.inv_sqrt_rt_r;
        let f = a - tr.conj() * b * self.inv_sqrt_rt_r;
        (dg, db, a, f)
    }
}

/// Splits `[0, t_f]` at breakpoints into segments of even step counts.
pub(crate) fn segments<T: Real>(t_f: T, breaks: &[T], dt: T) -> Vec<(T, T, usize)> {
    let mut edges = vec![T::zero()];
    edges.extend_from_slice(breaks);
    edges.push(t_f);
    edges
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| {
            let len = w[1] - w[0];
            let mut n = (len / dt).ceil().to_usize().unwrap_or(2).max(2);
            if n % 2 == 1 {
                n += 1;
            }
            (w[0], w[1], n)
        })
        .collect()
}

fn integrate<T: Real>(cfg: &SimConfig<T>, record: bool) -> Result<(FieldTrajectory<T>, TransferOutcome<T>)> {
    cfg.validate()?;
    let rhs = Rhs::new(cfg);
    let t_f = cfg.duration();
    let dt = cfg.step();
    let segs = segments(t_f, &cfg.breakpoints(), dt);

    let mut traj = FieldTrajectory::default();
    let (mut g, mut b) = (cfg.g0, cfg.b0);
    let (_, _, a0, f0) = rhs.eval(T::zero(), g, b);
    if record {
        traj.push(T::zero(), &Sample { g, b, a: a0, f: f0 });
    }
    let mut reflected = T::zero();
    let two = T::lit(2.0);
    let four = T::lit(4.0);
    let six = T::lit(6.0);
    let half = T::lit(0.5);
    let mut f_prev = f0.norm_sqr();

    for (t0, t1, n) in segs {
        let h = (t1 - t0) / T::from_usize(n).unwrap();
        let mut simpson = f_prev;
        for k in 0..n {
            let t = t0 + h * T::from_usize(k).unwrap();
            let (k1g, k1b, _, _) = rhs.eval(t, g, b);
            let (k2g, k2b, _, _) = rhs.eval(t + half * h, g + k1g * (half * h), b + k1b * (half * h));
            let (k3g, k3b, _, _) = rhs.eval(t + half * h, g + k2g * (half * h), b + k2b * (half * h));
            let tn = if k + 1 == n { t1 } else { t + h };
            let (k4g, k4b, _, _) = rhs.eval(tn, g + k3g * h, b + k3b * h);
            g += (k1g + k2g * two + k3g * two + k4g) * (h / six);
            b += (k1b + k2b * two + k3b * two + k4b) * (h / six);
            let (_, _, a, f) = rhs.eval(tn, g, b);
            let fs = f.norm_sqr();
            simpson += if k + 1 == n {
                fs
            } else if k % 2 == 0 {
                four * fs
            } else {
                two * fs
            };
            f_prev = fs;
            if record {
                traj.push(tn, &Sample { g, b, a, f });
            }
        }
        reflected += simpson * h / T::lit(3.0);
    }
    if !(g.re.is_finite() && g.im.is_finite() && b.re.is_finite() && b.im.is_finite()) {
        return Err(Error::NonFinite("field state"));
    }
    Ok((traj, TransferOutcome::build(cfg.g0, g, b, reflected, Vec::new())))
}

/// Integrates the field equations and records the trajectory.
pub fn simulate<T: Real>(config: &SimConfig<T>) -> Result<(FieldTrajectory<T>, TransferOutcome<T>)> {
    integrate(config, true)
}

/// Same as [`simulate`] without storing the trajectory.
pub fn simulate_outcome<T: Real>(config: &SimConfig<T>) -> Result<TransferOutcome<T>> {
    integrate(config, false).map(|(_, o)| o)
}
