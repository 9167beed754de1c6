use crate::error::{Error, Result};
use crate::scalar::Real;

/// Leakage-rate schedules that produce a prescribed propagating field.
#[derive(Clone, Debug, PartialEq)]
pub struct WaveformCouplings<T> {
    /// Emitter rate per sample, 1/ns.
    pub kappa_e: Vec<T>,
    /// Receiver rate per sample, 1/ns.
    pub kappa_r: Vec<T>,
    /// Energy left in the emitter, as a fraction of `|G0|²`.
    pub loss_e: T,
    /// Energy reflected at the start by the receiver, as a fraction of `|G0|²`.
    pub loss_r: T,
}

/// Cumulative integral with fourth-order local cubic quadrature.
pub(crate) fn cumulative_integral<T: Real>(f: &[T], h: T) -> Vec<T> {
    let n = f.len();
    let mut out = vec![T::zero(); n];
    if n < 2 {
        return out;
    }
    if n < 4 {
        for k in 1..n {
            out[k] = out[k - 1] + h * (f[k - 1] + f[k]) / T::lit(2.0);
        }
        return out;
    }
    let c24 = h / T::lit(24.0);
    for k in 0..n - 1 {
        let piece = if k == 0 {
            c24 * (T::lit(9.0) * f[0] + T::lit(19.0) * f[1] - T::lit(5.0) * f[2] + f[3])
        } else if k == n - 2 {
            c24 * (T::lit(9.0) * f[n - 1] + T::lit(19.0) * f[n - 2] - T::lit(5.0) * f[n - 3] + f[n - 4])
        } else {
            c24 * (T::lit(13.0) * (f[k] + f[k + 1]) - f[k - 1] - f[k + 2])
        };
        out[k + 1] = out[k] + piece;
    }
    out
}

/// Converts a non-negative field amplitude `A(t)` sampled with step `dt`
/// into coupling schedules.
///
/// `g0_sq` is the initial emitter energy `|G(0)|²`.
pub fn couplings_from_waveform<T: Real>(
    a: &[T],
    dt: T,
    g0_sq: T,
    kappa_e_max: T,
    kappa_r_max: T,
) -> Result<WaveformCouplings<T>> {
    if a.len() < 2 {
        return Err(Error::param("a", "need at least two samples"));
    }
    for (name, v) in [
        ("dt", dt),
        ("g0_sq", g0_sq),
        ("kappa_e_max", kappa_e_max),
        ("kappa_r_max", kappa_r_max),
    ] {
        if !(v > T::zero() && v.is_finite()) {
            return Err(Error::param(name, "must be positive"));
        }
    }
    if let Some(i) = a.iter().position(|x| !(x.is_finite() && *x >= T::zero())) {
        return Err(Error::WaveformBound {
            which: "non-negativity",
            index: i,
        });
    }
    let sq: Vec<T> = a.iter().map(|x| *x * *x).collect();
    let cum = cumulative_integral(&sq, dt);
    let slack = T::lit(1e-9);
    let a0 = sq[0];
    let mut kappa_e = Vec::with_capacity(a.len());
    let mut kappa_r = Vec::with_capacity(a.len());
    for (k, (&s, &i)) in sq.iter().zip(&cum).enumerate() {
        let left = g0_sq - i;
        if s > kappa_e_max * left + slack * kappa_e_max * g0_sq {
            return Err(Error::WaveformBound {
                which: "emitter",
                index: k,
            });
        }
        let acc = a0 + kappa_r_max * i;
        if s > acc * (T::one() + slack) + slack * kappa_r_max * g0_sq {
            return Err(Error::WaveformBound {
                which: "receiver",
                index: k,
            });
        }
        kappa_e.push(if s == T::zero() {
            T::zero()
        } else {
            (s / left).min(kappa_e_max)
        });
        let den = a0 / kappa_r_max + i;
        kappa_r.push(if s == T::zero() {
            T::zero()
        } else {
            (s / den).min(kappa_r_max)
        });
    }
    Ok(WaveformCouplings {
        kappa_e,
        kappa_r,
        loss_e: T::one() - cum[a.len() - 1] / g0_sq,
        loss_r: a0 / (kappa_r_max * g0_sq),
    })
}
