//! Quantum channel induced by a classical transfer with efficiency η.

use nalgebra::DMatrix;
use num_complex::Complex;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::{cr, Cx, Real};

/// Default number of Fock levels kept (cutoff N = 32).
pub const DEFAULT_CUTOFF: usize = 32;

/// Largest trace mass the j-sum may drop.
pub const TAIL_TOLERANCE: f64 = 1e-12;

/// Truncated pure state `Σ α_n |n⟩`.
#[derive(Clone, Debug, PartialEq)]
pub struct FockVector<T> {
    amps: Vec<Cx<T>>,
}

impl<T: Real> FockVector<T> {
    /// Checks that the amplitudes are normalized to 1e-10.
    pub fn new(amps: Vec<Cx<T>>) -> Result<Self> {
        if amps.is_empty() {
            return Err(Error::param("amps", "need at least one level"));
        }
        let n: T = amps.iter().map(|a| a.norm_sqr()).sum();
        let tol = T::lit(1e-10).max(T::epsilon() * T::lit(64.0));
        if !((n - T::one()).abs() <= tol) {
            return Err(Error::NotNormalized(n.as_f64()));
        }
        Ok(Self { amps })
    }

    /// Rescales to unit norm.
    pub fn normalized(mut amps: Vec<Cx<T>>) -> Result<Self> {
        let n: T = amps.iter().map(|a| a.norm_sqr()).sum();
        if !(n > T::zero() && n.is_finite()) {
            return Err(Error::NotNormalized(n.as_f64()));
        }
        let s = n.sqrt();
        for a in &mut amps {
            *a /= s;
        }
        Ok(Self { amps })
    }

    /// Number state `|n⟩` in a space of `cutoff + 1` levels.
    pub fn fock(n: usize, cutoff: usize) -> Result<Self> {
        if n > cutoff {
            return Err(Error::Dimension {
                expected: cutoff + 1,
                got: n + 1,
            });
        }
        let mut amps = vec![cr(T::zero()); cutoff + 1];
        amps[n] = cr(T::one());
        Ok(Self { amps })
    }

    /// Coherent state truncated at `cutoff` and renormalized.
    pub fn coherent(alpha: Cx<T>, cutoff: usize) -> Result<Self> {
        let mut amps = Vec::with_capacity(cutoff + 1);
        let mut c = cr(T::one());
        amps.push(c);
        for n in 1..=cutoff {
            c = c * alpha / T::from_usize(n).unwrap().sqrt();
            amps.push(c);
        }
        Self::normalized(amps)
    }

    /// Qubit state `α|0⟩ + β|1⟩`.
    pub fn qubit(alpha: Cx<T>, beta: Cx<T>) -> Result<Self> {
        Self::new(vec![alpha, beta])
    }

    pub fn amplitudes(&self) -> &[Cx<T>] {
        &self.amps
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    /// `|ψ⟩⟨ψ|`.
    pub fn projector(&self) -> DensityMatrix<T> {
        let d = self.dim();
        let mut m = DensityMatrix::zeros(d);
        for i in 0..d {
            for j in 0..d {
                m.data[i * d + j] = self.amps[i] * self.amps[j].conj();
            }
        }
        m
    }
}

/// Square complex matrix stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix<T> {
    dim: usize,
    data: Vec<Cx<T>>,
}

impl<T: Real> DensityMatrix<T> {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![cr(T::zero()); dim * dim],
        }
    }

    pub fn from_rows(dim: usize, data: Vec<Cx<T>>) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(Error::Dimension {
                expected: dim * dim,
                got: data.len(),
            });
        }
        Ok(Self { dim, data })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Cx<T> {
        self.data[i * self.dim + j]
    }

    pub fn rows(&self) -> &[Cx<T>] {
        &self.data
    }

    pub fn trace(&self) -> Cx<T> {
        (0..self.dim).fold(cr(T::zero()), |acc, i| acc + self.get(i, i))
    }

    /// Largest `|ρ_ij - ρ_ji*|`.
    pub fn hermiticity_error(&self) -> T {
        let mut e = T::zero();
        for i in 0..self.dim {
            for j in 0..self.dim {
                e = e.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        e
    }

    /// Eigenvalues of the Hermitian part, ascending, computed in `f64`.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let d = self.dim;
        let m = DMatrix::from_fn(d, d, |i, j| {
            let a = self.get(i, j);
            let b = self.get(j, i).conj();
            Complex::new((a.re + b.re).as_f64() / 2.0, (a.im + b.im).as_f64() / 2.0)
        });
        let mut ev: Vec<f64> = m.symmetric_eigen().eigenvalues.iter().copied().collect();
        ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
        ev
    }

    /// Row-major `[re, im]` pairs.
    pub fn to_json(&self) -> serde_json::Value {
        #[derive(Serialize)]
        struct Out {
            dim: usize,
            rows: Vec<Vec<[f64; 2]>>,
        }
        let rows = (0..self.dim)
            .map(|i| {
                (0..self.dim)
                    .map(|j| [self.get(i, j).re.as_f64(), self.get(i, j).im.as_f64()])
                    .collect()
            })
            .collect();
        serde_json::to_value(Out { dim: self.dim, rows }).expect("plain data serializes")
    }
}

/// Pure-loss channel with amplitude `√η` and phase `φ_f`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Channel<T> {
    pub eta: T,
    pub phi_f: T,
}

impl<T: Real> Channel<T> {
    pub fn new(eta: T, phi_f: T) -> Result<Self> {
        if !(eta >= T::zero() && eta <= T::one()) {
            return Err(Error::param("eta", "must lie in [0, 1]"));
        }
        if !phi_f.is_finite() {
            return Err(Error::NonFinite("phi_f"));
        }
        Ok(Self { eta, phi_f })
    }
}

fn ln_factorials(n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    let mut acc = 0.0;
    out.push(0.0);
    for k in 1..=n {
        acc += (k as f64).ln();
        out.push(acc);
    }
    out
}

struct Weights {
    /// Log-factorial table for the binomial weights of the loss channel.
    lnf: Vec<f64>,
    eta: f64,
}

impl Weights {
    #[inline]
    fn amplitude(&self, n: usize, m: usize, j: usize) -> f64 {
        // sqrt(C(n+j,j) C(m+j,j)) η^{(n+m)/2} (1-η)^j
        let lc = 0.5 * (self.lnf[n + j] - self.lnf[n] - self.lnf[j] + self.lnf[m + j] - self.lnf[m] - self.lnf[j]);
        lc.exp() * self.eta.sqrt().powi((n + m) as i32) * (1.0 - self.eta).powi(j as i32)
    }
}

/// Smallest j-cutoff whose dropped trace mass stays below [`TAIL_TOLERANCE`].
fn required_cutoff(diag: &[f64], w: &Weights) -> usize {
    let d = diag.len();
    // mass[j] = Σ_n p_{n+j} C(n+j, j) η^n (1-η)^j
    let mass: Vec<f64> = (0..d)
        .map(|j| (0..d - j).map(|n| diag[n + j] * w.amplitude(n, n, j)).sum())
        .collect();
    let mut tail = 0.0;
    for j in (0..d).rev() {
        tail += mass[j];
        if tail > TAIL_TOLERANCE {
            return j;
        }
    }
    0
}

fn channel_core<T: Real>(
    dim: usize,
    rho: impl Fn(usize, usize) -> Cx<T>,
    ch: &Channel<T>,
    j_cutoff: Option<usize>,
) -> Result<DensityMatrix<T>> {
    let w = Weights {
        lnf: ln_factorials(2 * dim),
        eta: ch.eta.as_f64(),
    };
    let full = dim.saturating_sub(1);
    let jc = match j_cutoff {
        None => full,
        Some(j) => {
            let diag: Vec<f64> = (0..dim).map(|n| rho(n, n).re.as_f64()).collect();
            let need = required_cutoff(&diag, &w);
            if j < need {
                return Err(Error::Cutoff { required: need });
            }
            j.min(full)
        }
    };
    let mut out = DensityMatrix::zeros(dim);
    for n in 0..dim {
        for m in 0..dim {
            let jmax = jc.min(dim - 1 - n.max(m));
            let mut acc = cr(T::zero());
            for j in 0..=jmax {
                acc += rho(n + j, m + j) * T::lit(w.amplitude(n, m, j));
            }
            let phase = Cx::from_polar(
                T::one(),
                ch.phi_f * (T::from_usize(n).unwrap() - T::from_usize(m).unwrap()),
            );
            out.data[n * dim + m] = acc * phase;
        }
    }
    Ok(out)
}

/// Output state of the receiving resonator for a pure input.
///
/// `j_cutoff = None` keeps every term allowed by the input truncation.
pub fn apply_channel<T: Real>(
    psi_in: &FockVector<T>,
    channel: &Channel<T>,
    j_cutoff: Option<usize>,
) -> Result<DensityMatrix<T>> {
    let a = psi_in.amplitudes();
    channel_core(a.len(), |i, j| a[i] * a[j].conj(), channel, j_cutoff)
}

/// Same as [`apply_channel`] for a mixed input state.
pub fn apply_channel_mixed<T: Real>(
    rho_in: &DensityMatrix<T>,
    channel: &Channel<T>,
    j_cutoff: Option<usize>,
) -> Result<DensityMatrix<T>> {
    let tr = rho_in.trace();
    if !((tr.re - T::one()).abs() <= T::lit(1e-9) && tr.im.abs() <= T::lit(1e-9)) {
        return Err(Error::NotNormalized(tr.re.as_f64()));
    }
    channel_core(rho_in.dim(), |i, j| rho_in.get(i, j), channel, j_cutoff)
}

/// Overlap `⟨ψ|ρ|ψ⟩`.
pub fn state_fidelity<T: Real>(psi_in: &FockVector<T>, rho_fin: &DensityMatrix<T>) -> Result<T> {
    let a = psi_in.amplitudes();
    if a.len() != rho_fin.dim() {
        return Err(Error::Dimension {
            expected: a.len(),
            got: rho_fin.dim(),
        });
    }
    let mut acc = cr(T::zero());
    for n in 0..a.len() {
        for m in 0..a.len() {
            acc += a[n].conj() * rho_fin.get(n, m) * a[m];
        }
    }
    Ok(acc.re)
}

/// Closed-form output for a qubit input `α|0⟩ + β|1⟩`, rows in `|0⟩, |1⟩` order.
pub fn qubit_channel<T: Real>(alpha: Cx<T>, beta: Cx<T>, channel: &Channel<T>) -> Result<[[Cx<T>; 2]; 2]> {
    let n = alpha.norm_sqr() + beta.norm_sqr();
    if !((n - T::one()).abs() <= T::lit(1e-10).max(T::epsilon() * T::lit(64.0))) {
        return Err(Error::NotNormalized(n.as_f64()));
    }
    let eta = channel.eta;
    let off = alpha * beta.conj() * Cx::from_polar(eta.sqrt(), -channel.phi_f);
    Ok([
        [cr(alpha.norm_sqr() + beta.norm_sqr() * (T::one() - eta)), off],
        [off.conj(), cr(eta * beta.norm_sqr())],
    ])
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ProcessFidelity<T> {
    /// `(1 + √η)²/4`, final phase corrected.
    pub corrected: T,
    /// `(1 + η + 2√η cos φ_f)/4`.
    pub uncorrected: T,
    /// Bloch-sphere average of the state fidelity, `(3 + η + 2√η)/6`.
    pub average_state: T,
}

pub fn process_fidelity<T: Real>(channel: &Channel<T>) -> ProcessFidelity<T> {
    let s = channel.eta.sqrt();
    let one = T::one();
    let two = T::lit(2.0);
    ProcessFidelity {
        corrected: (one + s) * (one + s) / T::lit(4.0),
        uncorrected: (one + channel.eta + two * s * channel.phi_f.cos()) / T::lit(4.0),
        average_state: (T::lit(3.0) + channel.eta + two * s) / T::lit(6.0),
    }
}

/// Fidelity loss coefficient for `n` photons in the environment mode.
pub fn environment_coefficient<T: Real>(eta: T, n: usize) -> T {
    let one = T::one();
    let two = T::lit(2.0);
    let s = eta.sqrt();
    let nn = T::from_usize(n).unwrap();
    let first = (T::lit(3.0) + eta + two * s) * (one - eta.powi(n as i32));
    let second = if n == 0 {
        T::zero()
    } else {
        nn * (one - eta) * eta.powi(n as i32 - 1) * (two * eta + two * s - (one - eta) * (two * nn + one))
    };
    (first + second) / T::lit(6.0)
}

#[derive(Clone, Debug, PartialEq)]
pub struct EnvFidelity<T> {
    pub average: T,
    /// Coefficient per photon number, index-aligned with the populations.
    pub coefficients: Vec<T>,
}

/// Average state fidelity when the environment mode holds `populations[n]`
/// photons with probability `|β_n|²`.
pub fn env_fidelity<T: Real>(eta: T, populations: &[T]) -> Result<EnvFidelity<T>> {
    if !(eta >= T::zero() && eta <= T::one()) {
        return Err(Error::param("eta", "must lie in [0, 1]"));
    }
    if populations.iter().any(|p| !(*p >= T::zero())) {
        return Err(Error::param("populations", "must be non-negative"));
    }
    let s: T = populations.iter().copied().sum();
    if !((s - T::one()).abs() <= T::lit(1e-10).max(T::epsilon() * T::lit(64.0))) {
        return Err(Error::NotNormalized(s.as_f64()));
    }
    let coefficients: Vec<T> = (0..populations.len())
        .map(|n| environment_coefficient(eta, n))
        .collect();
    let base = (T::lit(3.0) + eta + T::lit(2.0) * eta.sqrt()) / T::lit(6.0);
    let loss: T = coefficients.iter().zip(populations).map(|(c, p)| *c * *p).sum();
    Ok(EnvFidelity {
        average: base - loss,
        coefficients,
    })
}
