use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::rng::derive_seed;
use crate::scalar::Real;

/// Smooth random signal through i.i.d. standard-normal nodes.
///
/// Nodes sit at `k * dt` and cover `[0, t_f]`; the interpolant is a natural
/// cubic spline.
#[derive(Clone, Debug, PartialEq)]
pub struct NoiseTrace<T> {
    dt: T,
    t_f: T,
    nodes: Vec<T>,
    second: Vec<T>,
    continuous_variance: T,
}

// 4-point Gauss-Legendre on [0, 1]
const GL_X: [f64; 4] = [
    0.069_431_844_202_973_71,
    0.330_009_478_207_571_87,
    0.669_990_521_792_428_1,
    0.930_568_155_797_026_3,
];
const GL_W: [f64; 4] = [
    0.173_927_422_568_726_93,
    0.326_072_577_431_273_07,
    0.326_072_577_431_273_07,
    0.173_927_422_568_726_93,
];

pub fn generate_noise_trace<T: Real>(dt_grid: T, t_f: T, seed: u64) -> Result<NoiseTrace<T>> {
    if !(dt_grid > T::zero() && dt_grid.is_finite()) {
        return Err(Error::param("dt_grid", "must be positive"));
    }
    if !(t_f > T::zero() && t_f.is_finite()) {
        return Err(Error::param("t_f", "must be positive"));
    }
    let m = (t_f / dt_grid).ceil().to_usize().unwrap_or(1).max(1) + 1;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nodes: Vec<T> = (0..m)
        .map(|_| {
            let x: f64 = StandardNormal.sample(&mut rng);
            T::lit(x)
        })
        .collect();
    Ok(NoiseTrace::from_nodes(dt_grid, t_f, nodes))
}

impl<T: Real> NoiseTrace<T> {
    /// Builds the spline through given node values.
    pub fn from_nodes(dt: T, t_f: T, nodes: Vec<T>) -> Self {
        let second = natural_spline(dt, &nodes);
        let mut trace = Self {
            dt,
            t_f,
            nodes,
            second,
            continuous_variance: T::zero(),
        };
        trace.continuous_variance = trace.mean_square();
        trace
    }

    pub fn dt(&self) -> T {
        self.dt
    }

    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    /// Time average of ξ² over `[0, t_f]`.
    pub fn continuous_variance(&self) -> T {
        self.continuous_variance
    }

    pub fn eval(&self, t: T) -> T {
        let last = self.nodes.len() - 1;
        let s = t / self.dt;
        let i = s.floor().max(T::zero()).to_usize().unwrap_or(0).min(last - 1);
        self.segment(i, s - T::from_usize(i).unwrap())
    }

    fn segment(&self, i: usize, u: T) -> T {
        let one = T::one();
        let v = one - u;
        let h2 = self.dt * self.dt / T::lit(6.0);
        v * self.nodes[i]
            + u * self.nodes[i + 1]
            + h2 * ((v * v * v - v) * self.second[i] + (u * u * u - u) * self.second[i + 1])
    }

    fn mean_square(&self) -> T {
        let n_full = (self.t_f / self.dt)
            .floor()
            .to_usize()
            .unwrap_or(0)
            .min(self.nodes.len() - 1);
        let mut acc = T::zero();
        let interval = |i: usize, frac: T| {
            let mut s = T::zero();
            for (x, w) in GL_X.iter().zip(GL_W) {
                let y = self.segment(i, T::lit(*x) * frac);
                s += T::lit(w) * y * y;
            }
            s * frac
        };
        for i in 0..n_full {
            acc += interval(i, T::one());
        }
        let rem = self.t_f / self.dt - T::from_usize(n_full).unwrap();
        if rem > T::lit(1e-12) && n_full < self.nodes.len() - 1 {
            acc += interval(n_full, rem);
        }
        acc * self.dt / self.t_f
    }
}

fn natural_spline<T: Real>(h: T, y: &[T]) -> Vec<T> {
    let m = y.len();
    let mut out = vec![T::zero(); m];
    if m < 3 {
        return out;
    }
    // interior system M[i-1] + 4 M[i] + M[i+1] = 6 (y[i+1] - 2 y[i] + y[i-1]) / h^2
    let n = m - 2;
    let six = T::lit(6.0) / (h * h);
    let four = T::lit(4.0);
    let mut c = vec![T::zero(); n];
    let mut d = vec![T::zero(); n];
    for k in 0..n {
        let i = k + 1;
        let rhs = six * (y[i + 1] - (y[i] + y[i]) + y[i - 1]);
        if k == 0 {
            c[k] = T::one() / four;
            d[k] = rhs / four;
        } else {
            let den = four - c[k - 1];
            c[k] = T::one() / den;
            d[k] = (rhs - d[k - 1]) / den;
        }
    }
    out[n] = d[n - 1];
    for k in (0..n - 1).rev() {
        out[k + 1] = d[k] - c[k] * out[k + 2];
    }
    out
}

/// Monte-Carlo estimate of the continuous-time variance ξ̄², returned with
/// its standard error.
pub fn estimate_noise_variance<T: Real>(dt_grid: T, t_f: T, realizations: usize, seed: u64) -> Result<(T, T)> {
    if realizations < 2 {
        return Err(Error::param("realizations", "need at least two"));
    }
    let mut vals = Vec::with_capacity(realizations);
    for r in 0..realizations {
        let tr = generate_noise_trace(dt_grid, t_f, derive_seed(seed, &[r as u64]))?;
        vals.push(tr.continuous_variance());
    }
    let n = T::from_usize(realizations).unwrap();
    let mean = vals.iter().copied().sum::<T>() / n;
    let var = vals.iter().map(|&v| (v - mean) * (v - mean)).sum::<T>() / (n - T::one());
    Ok((mean, (var / n).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spline_passes_through_nodes() {
        let tr = generate_noise_trace(1.0f64, 50.0, 3).unwrap();
        for (k, &y) in tr.nodes().iter().enumerate() {
            assert!((tr.eval(k as f64) - y).abs() < 1e-12);
        }
    }

    #[test]
    fn spline_is_c2() {
        let tr = generate_noise_trace(0.5f64, 20.0, 11).unwrap();
        let h = 1e-4;
        for k in 1..30 {
            let t = 0.5 * k as f64;
            let d2l = (tr.eval(t - 2.0 * h) - 2.0 * tr.eval(t - h) + tr.eval(t)) / (h * h);
            let d2r = (tr.eval(t) - 2.0 * tr.eval(t + h) + tr.eval(t + 2.0 * h)) / (h * h);
            assert!((d2l - d2r).abs() < 1e-2 * (1.0 + d2l.abs()), "{d2l} {d2r}");
        }
    }

    #[test]
    fn deterministic() {
        let a = generate_noise_trace(1.0f64, 100.0, 42).unwrap();
        let b = generate_noise_trace(1.0f64, 100.0, 42).unwrap();
        assert_eq!(a, b);
        let c = generate_noise_trace(1.0f64, 100.0, 43).unwrap();
        assert_ne!(a.nodes(), c.nodes());
    }

    #[test]
    fn mean_square_of_constant() {
        let tr = NoiseTrace::from_nodes(1.0f64, 7.5, vec![2.0; 9]);
        assert!((tr.continuous_variance() - 4.0).abs() < 1e-12);
    }
}
