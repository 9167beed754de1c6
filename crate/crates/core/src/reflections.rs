//! Transfer through a finite line without a circulator.
//!
//! The back-reflected field returns to the emitter after the round-trip
//! delay `t_d` with phase `φ`. Amplitudes follow the real-positive
//! convention: only `|t_e|`, `|t_r|` enter, `r_in → +1`, `r_out → -1`.

use crate::dynamics::{FieldTrajectory, SimConfig, TransferOutcome};
use crate::error::{Error, Result};
use crate::scalar::{cr, cx, Cx, Real};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DelayConfig<T> {
    /// Round-trip delay, ns.
    pub td: T,
    /// Round-trip phase, rad.
    pub phi: T,
}

impl<T: Real> DelayConfig<T> {
    pub fn new(td: T, phi: T) -> Result<Self> {
        if !(td >= T::zero() && td.is_finite()) {
            return Err(Error::Delay(format!(
                "t_d = {} must be finite and non-negative",
                td.as_f64()
            )));
        }
        if !(phi >= T::zero() && phi < T::TAU()) {
            return Err(Error::Delay(format!("phi = {} must lie in [0, 2π)", phi.as_f64())));
        }
        Ok(Self { td, phi })
    }

    /// Steps per delay for a requested maximum step.
    pub fn steps_for(&self, dt_max: T) -> Result<usize> {
        if !(self.td > T::zero()) {
            return Err(Error::Delay("t_d = 0 leaves no history to read".into()));
        }
        Ok((self.td / dt_max).ceil().to_usize().unwrap_or(1).max(1))
    }
}

/// Line field `F` on the integration grid, with separate left and right
/// limits at the jump nodes `k = n N`.
#[derive(Clone, Debug, PartialEq)]
pub struct HistoryBuffer<T> {
    steps_per_delay: usize,
    /// `(F⁻, F⁺)` at each node.
    nodes: Vec<(Cx<T>, Cx<T>)>,
}

impl<T: Real> HistoryBuffer<T> {
    /// Fails unless `td / dt` is an integer.
    pub fn new(td: T, dt: T) -> Result<Self> {
        if !(td > T::zero() && dt > T::zero()) {
            return Err(Error::Delay("t_d and dt must be positive".into()));
        }
        let r = td / dt;
        let n = r.round();
        if n < T::one() || (r - n).abs() > T::lit(1e-9) * n.max(T::one()) {
            return Err(Error::Delay(format!("t_d/dt = {} is not an integer", r.as_f64())));
        }
        Ok(Self {
            steps_per_delay: n.to_usize().unwrap(),
            nodes: Vec::new(),
        })
    }

    pub fn steps_per_delay(&self) -> usize {
        self.steps_per_delay
    }

    pub fn push(&mut self, left: Cx<T>, right: Cx<T>) {
        self.nodes.push((left, right));
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `F` at fraction `u ∈ [0, 1]` of grid interval `j`; zero before the start.
    pub fn sample(&self, j: isize, u: T) -> Cx<T> {
        if j < 0 || self.nodes.is_empty() {
            return cr(T::zero());
        }
        let j = j as usize;
        let n = self.steps_per_delay;
        let newest = self.nodes.len() - 1;
        let lo = (j / n) * n;
        let hi = (lo + n).min(newest);
        if hi <= lo {
            return self.nodes[lo.min(newest)].1;
        }
        let value = |k: usize| {
            if k == lo {
                self.nodes[k].1
            } else if k == lo + n {
                self.nodes[k].0
            } else {
                self.nodes[k].1
            }
        };
        let count = (hi - lo + 1).min(4);
        let start = if count < 4 {
            lo
        } else {
            j.saturating_sub(1).clamp(lo, hi - 3)
        };
        let s = T::from_usize(j).unwrap() + u;
        let mut acc = cr(T::zero());
        for a in 0..count {
            let xa = T::from_usize(start + a).unwrap();
            let mut w = T::one();
            for b in 0..count {
                if b != a {
                    let xb = T::from_usize(start + b).unwrap();
                    w *= (s - xb) / (xa - xb);
                }
            }
            acc += value(start + a) * w;
        }
        acc
    }
}

/// Bound on the inefficiency when the reflected energy returns coherently.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WorstCase<T> {
    /// `(√l_G + √l_F)²`
    pub bound: T,
    /// `2 (l_G + l_F)`
    pub majorant: T,
}

pub fn worst_case_bound<T: Real>(loss_g: T, loss_f: T) -> Result<WorstCase<T>> {
    if !(loss_g >= T::zero() && loss_f >= T::zero()) {
        return Err(Error::param("loss", "losses must be non-negative"));
    }
    let s = loss_g.sqrt() + loss_f.sqrt();
    Ok(WorstCase {
        bound: s * s,
        majorant: T::lit(2.0) * (loss_g + loss_f),
    })
}

struct Model<'a, T> {
    cfg: &'a SimConfig<T>,
    inv_rt_e: T,
    inv_rt_r: T,
    gamma_e: T,
    gamma_r: T,
    rot: Cx<T>,
}

impl<'a, T: Real> Model<'a, T> {
    /// Derivatives, `A` and `F` given the returning field `w = F(t - t_d)`.
    #[inline]
    fn eval(&self, t: T, g: Cx<T>, b: Cx<T>, w: Cx<T>) -> (Cx<T>, Cx<T>, Cx<T>, Cx<T>) {
        let half = T::lit(0.5);
        let se = self.cfg.emitter.eval(t).norm() * self.inv_rt_e.sqrt();
        let sr = self.cfg.receiver.eval(t).norm() * self.inv_rt_r.sqrt();
        let v = self.rot * w;
        let a = g * se - v;
        let f = b * sr - a;
        let de = self.cfg.detuning_e.eval(t);
        let dr = self.cfg.detuning_r.eval(t);
        let dg = g * cx(-half * (se * se + self.gamma_e), -de) + v * se;
        let db = b * cx(-half * (sr * sr + self.gamma_r), -dr) + a * sr;
        (dg, db, a, f)
    }
}

/// Integrates the delay equations; the delay sets the step so that
/// `t_d` is an integer number of steps not larger than the requested step.
pub fn simulate_with_delay<T: Real>(
    config: &SimConfig<T>,
    delay: &DelayConfig<T>,
) -> Result<(FieldTrajectory<T>, TransferOutcome<T>)> {
    config.validate()?;
    if config.eta_tl != T::one() {
        return Err(Error::Delay(
            "line loss is not modeled together with reflections".into(),
        ));
    }
    if !matches!(config.extra_decay_e, crate::dynamics::ExtraDecay::None)
        || !matches!(config.extra_decay_r, crate::dynamics::ExtraDecay::None)
    {
        return Err(Error::Delay(
            "extra decay is not modeled together with reflections".into(),
        ));
    }
    let delay = DelayConfig::new(delay.td, delay.phi)?;
    let n_delay = delay.steps_for(config.step())?;
    let h = delay.td / T::from_usize(n_delay).unwrap();
    let mut hist = HistoryBuffer::new(delay.td, h)?;

    let t_f = config.duration();
    let mut warnings = Vec::new();
    let tau = config.tau_min();
    if delay.td / tau < T::lit(0.1) {
        warnings.push(format!(
            "t_d/tau = {:.3} is below 0.1; the direct simulation is unreliable there",
            (delay.td / tau).as_f64()
        ));
    }

    let model = Model {
        cfg: config,
        inv_rt_e: T::one() / config.tau_rt_e,
        inv_rt_r: T::one() / config.tau_rt_r,
        gamma_e: config.t1_e.map_or(T::zero(), |t| T::one() / t),
        gamma_r: config.t1_r.map_or(T::zero(), |t| T::one() / t),
        rot: Cx::from_polar(T::one(), delay.phi),
    };
    let breaks = config.breakpoints();

    let n_full = (t_f / h).floor().to_usize().unwrap_or(0);
    let rem = t_f - h * T::from_usize(n_full).unwrap();
    let last_partial = rem > h * T::lit(1e-9);
    let total = n_full + usize::from(last_partial);

    let mut traj = FieldTrajectory::default();
    let (mut g, mut b) = (config.g0, config.b0);
    let nd = n_delay as isize;
    {
        let (_, _, a, f) = model.eval(T::zero(), g, b, cr(T::zero()));
        // the line is empty before t = 0
        hist.push(cr(T::zero()), f);
        record(&mut traj, T::zero(), g, b, a, f);
    }

    let two = T::lit(2.0);
    let six = T::lit(6.0);
    let half = T::lit(0.5);
    for k in 0..total {
        let t_k = h * T::from_usize(k).unwrap();
        let t_next = if k + 1 == total {
            t_f
        } else {
            h * T::from_usize(k + 1).unwrap()
        };
        let j = k as isize - nd;
        let back = |t: T| hist.sample(j, (t - t_k) / h);

        let mut edges = vec![t_k];
        edges.extend(breaks.iter().copied().filter(|&x| x > t_k && x < t_next));
        edges.push(t_next);
        for w in edges.windows(2) {
            let (s0, s1) = (w[0], w[1]);
            let hs = s1 - s0;
            let sm = s0 + half * hs;
            let (w0, wm, w1) = (back(s0), back(sm), back(s1));
            let (k1g, k1b, _, _) = model.eval(s0, g, b, w0);
            let (k2g, k2b, _, _) = model.eval(sm, g + k1g * (half * hs), b + k1b * (half * hs), wm);
            let (k3g, k3b, _, _) = model.eval(sm, g + k2g * (half * hs), b + k2b * (half * hs), wm);
            let (k4g, k4b, _, _) = model.eval(s1, g + k3g * hs, b + k3b * hs, w1);
            g += (k1g + k2g * two + k3g * two + k4g) * (hs / six);
            b += (k1b + k2b * two + k3b * two + k4b) * (hs / six);
        }
        let node = k + 1;
        let (_, _, _, f_left) = model.eval(t_next, g, b, hist.sample(j, (t_next - t_k) / h));
        let (_, _, a, f_right) = model.eval(t_next, g, b, hist.sample(node as isize - nd, T::zero()));
        if node == total && last_partial {
            record(&mut traj, t_next, g, b, a, f_left);
        } else {
            hist.push(f_left, f_right);
            record(&mut traj, t_next, g, b, a, f_right);
        }
        if !(g.re.is_finite() && b.re.is_finite() && g.im.is_finite() && b.im.is_finite()) {
            return Err(Error::NonFinite("field state"));
        }
    }

    let reflected = line_energy(&hist, &traj, h, t_f, delay.td, last_partial);
    Ok((traj, TransferOutcome::build(config.g0, g, b, reflected, warnings)))
}

fn record<T: Real>(traj: &mut FieldTrajectory<T>, t: T, g: Cx<T>, b: Cx<T>, a: Cx<T>, f: Cx<T>) {
    traj.t.push(t);
    traj.g.push(g);
    traj.b.push(b);
    traj.a.push(a);
    traj.f.push(f);
}

/// `∫|F|²` over the last delay window, trapezoid on the grid.
fn line_energy<T: Real>(
    hist: &HistoryBuffer<T>,
    traj: &FieldTrajectory<T>,
    h: T,
    t_f: T,
    td: T,
    last_partial: bool,
) -> T {
    let start = (t_f - td).max(T::zero());
    let half = T::lit(0.5);
    let mut acc = T::zero();
    let n_nodes = hist.nodes.len();
    for k in 0..n_nodes.saturating_sub(1) {
        let a = h * T::from_usize(k).unwrap();
        let bnd = a + h;
        if bnd <= start {
            continue;
        }
        let fa = hist.nodes[k].1.norm_sqr();
        let fb = hist.nodes[k + 1].0.norm_sqr();
        if a >= start {
            acc += half * h * (fa + fb);
        } else {
            let u = (start - a) / h;
            let fs = fa + (fb - fa) * u;
            acc += half * (bnd - start) * (fs + fb);
        }
    }
    if last_partial {
        let a = h * T::from_usize(n_nodes - 1).unwrap();
        let fa = hist.nodes[n_nodes - 1].1.norm_sqr();
        let fb = traj.f.last().map_or(T::zero(), |f| f.norm_sqr());
        let lo = a.max(start);
        let fs = fa + (fb - fa) * ((lo - a) / (t_f - a));
        acc += half * (t_f - lo) * (fs + fb);
    }
    acc
}
