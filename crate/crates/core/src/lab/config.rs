use serde::{Deserialize, Serialize};

use crate::coupler::{schedule, CouplerParams};
use crate::dynamics::{simulate, Detuning, ExtraDecay, FieldTrajectory, SimConfig, TransferOutcome};
use crate::error::{Error, Result};
use crate::pulse::{apply_deformations, DeformationSpec, NoiseKind, NoiseSpec, ProtocolParams};
use crate::reflections::{simulate_with_delay, DelayConfig};
use crate::scalar::Cx;

fn one() -> f64 {
    1.0
}

fn six() -> f64 {
    6.0
}

fn grid() -> usize {
    crate::pulse::DEFAULT_GRID_INTERVALS
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseKindConfig {
    #[default]
    None,
    Multiplicative,
    Additive,
}

impl From<NoiseKindConfig> for NoiseKind {
    fn from(k: NoiseKindConfig) -> Self {
        match k {
            NoiseKindConfig::None => NoiseKind::None,
            NoiseKindConfig::Multiplicative => NoiseKind::Multiplicative,
            NoiseKindConfig::Additive => NoiseKind::Additive,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    #[serde(default)]
    pub kind: NoiseKindConfig,
    #[serde(default)]
    pub amplitude: f64,
    #[serde(rename = "dt_grid_ns", default = "one")]
    pub dt_grid_ns: f64,
    /// Falls back to the experiment seed.
    #[serde(default)]
    pub seed: Option<u64>,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self {
            kind: NoiseKindConfig::None,
            amplitude: 0.0,
            dt_grid_ns: 1.0,
            seed: None,
        }
    }
}

/// Pulse imperfections relative to the design.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeformConfig {
    /// `δ|t_max|/|t_max|`
    #[serde(default)]
    pub t_max_e_rel: f64,
    #[serde(default)]
    pub t_max_r_rel: f64,
    /// `δτ/τ`
    #[serde(default)]
    pub tau_e_rel: f64,
    #[serde(default)]
    pub tau_r_rel: f64,
    #[serde(default)]
    pub t_m_e_shift_ns: f64,
    #[serde(default)]
    pub t_m_r_shift_ns: f64,
    #[serde(default)]
    pub alpha_e: f64,
    #[serde(default)]
    pub alpha_r: f64,
    #[serde(default)]
    pub sigma_ns: f64,
    #[serde(default)]
    pub noise: NoiseConfig,
    #[serde(default = "grid")]
    pub grid_intervals: usize,
}

impl Default for DeformConfig {
    fn default() -> Self {
        Self {
            t_max_e_rel: 0.0,
            t_max_r_rel: 0.0,
            tau_e_rel: 0.0,
            tau_r_rel: 0.0,
            t_m_e_shift_ns: 0.0,
            t_m_r_shift_ns: 0.0,
            alpha_e: 0.0,
            alpha_r: 0.0,
            sigma_ns: 0.0,
            noise: NoiseConfig::default(),
            grid_intervals: grid(),
        }
    }
}

impl DeformConfig {
    pub fn is_identity(&self) -> bool {
        let zero = [
            self.t_max_e_rel,
            self.t_max_r_rel,
            self.tau_e_rel,
            self.tau_r_rel,
            self.t_m_e_shift_ns,
            self.t_m_r_shift_ns,
            self.alpha_e,
            self.alpha_r,
            self.sigma_ns,
        ]
        .iter()
        .all(|&x| x == 0.0);
        zero && (self.noise.kind == NoiseKindConfig::None || self.noise.amplitude == 0.0)
    }

    fn to_spec(&self, p: &ProtocolParams<f64>, seed: u64) -> DeformationSpec<f64> {
        let scale = |t: Cx<f64>, rel: f64| (rel != 0.0).then(|| t * (1.0 + rel));
        let shift = |t: f64, d: f64| (d != 0.0).then_some(t + d);
        let rel = |t: f64, r: f64| (r != 0.0).then_some(t * (1.0 + r));
        DeformationSpec {
            t_max_e: scale(p.t_max_e, self.t_max_e_rel),
            t_max_r: scale(p.t_max_r, self.t_max_r_rel),
            tau_e: rel(p.tau_e, self.tau_e_rel),
            tau_r: rel(p.tau_r, self.tau_r_rel),
            t_m_e: shift(p.t_m_e, self.t_m_e_shift_ns),
            t_m_r: shift(p.t_m_r, self.t_m_r_shift_ns),
            alpha_e: self.alpha_e,
            alpha_r: self.alpha_r,
            sigma: self.sigma_ns,
            noise: NoiseSpec {
                kind: self.noise.kind.into(),
                amplitude: self.noise.amplitude,
                dt_grid: self.noise.dt_grid_ns,
                seed: self.noise.seed.unwrap_or(seed),
            },
            grid_intervals: self.grid_intervals,
        }
    }
}

/// Round-trip line delay; give exactly one of `td_ns` and `td_over_tau`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DelayConfigJson {
    #[serde(default)]
    pub td_ns: Option<f64>,
    /// Delay in units of the emitter buildup time.
    #[serde(default)]
    pub td_over_tau: Option<f64>,
    #[serde(default)]
    pub phi_rad: f64,
}

/// Coupler circuit in SI-flavoured units; frequency comes from the experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplerConfig {
    #[serde(rename = "R_res_Ohm")]
    pub r_res_ohm: f64,
    #[serde(rename = "R_tl_Ohm")]
    pub r_tl_ohm: f64,
    #[serde(rename = "L1g_pH")]
    pub l1g_ph: f64,
    #[serde(rename = "L2g_pH")]
    pub l2g_ph: f64,
    #[serde(rename = "Mg_pH")]
    pub mg_ph: f64,
    #[serde(rename = "Le_pH")]
    pub le_ph: f64,
    #[serde(rename = "Ic1_uA", default)]
    pub ic1_ua: Option<f64>,
    #[serde(rename = "Ic2_uA", default)]
    pub ic2_ua: Option<f64>,
}

impl Default for CouplerConfig {
    fn default() -> Self {
        let r = CouplerParams::<f64>::reference();
        Self {
            r_res_ohm: r.r_res,
            r_tl_ohm: r.r_tl,
            l1g_ph: r.l1g,
            l2g_ph: r.l2g,
            mg_ph: r.mg,
            le_ph: r.le,
            ic1_ua: None,
            ic2_ua: None,
        }
    }
}

impl CouplerConfig {
    pub fn params(&self, freq_ghz: f64) -> CouplerParams<f64> {
        CouplerParams {
            r_res: self.r_res_ohm,
            r_tl: self.r_tl_ohm,
            omega0: 2.0 * std::f64::consts::PI * freq_ghz,
            l1g: self.l1g_ph,
            l2g: self.l2g_ph,
            mg: self.mg_ph,
            le: self.le_ph,
            ic1: self.ic1_ua,
            ic2: self.ic2_ua,
        }
    }
}

/// Both pulses driven through identical circuit couplers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplerDrive {
    #[serde(default)]
    pub circuit: CouplerConfig,
    /// Fraction of the coupling-induced detuning that is cancelled.
    #[serde(default)]
    pub compensation: f64,
    #[serde(default = "grid")]
    pub grid_intervals: usize,
}

/// One transfer experiment as read from JSON.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub t_max_e_abs: f64,
    pub t_max_r_abs: f64,
    #[serde(default)]
    pub t_max_e_arg_rad: f64,
    #[serde(default)]
    pub t_max_r_arg_rad: f64,
    /// Quarter-wave resonator frequency; sets `τ_rt = 1/(2f)`.
    #[serde(rename = "freq_GHz", default = "six")]
    pub freq_ghz: f64,
    pub eta_design: f64,
    #[serde(default)]
    pub deform: DeformConfig,
    #[serde(default)]
    pub detuning_e_rad_per_ns: f64,
    #[serde(default)]
    pub detuning_r_rad_per_ns: f64,
    #[serde(default)]
    pub t1_e_ns: Option<f64>,
    #[serde(default)]
    pub t1_r_ns: Option<f64>,
    #[serde(default = "one")]
    pub eta_tl: f64,
    #[serde(default)]
    pub delay: Option<DelayConfigJson>,
    #[serde(default)]
    pub coupler: Option<CouplerDrive>,
    #[serde(default)]
    pub dt_ns: Option<f64>,
    #[serde(default)]
    pub seed: u64,
}

/// Ready-to-run configuration.
#[derive(Clone, Debug)]
pub struct BuiltExperiment {
    pub params: ProtocolParams<f64>,
    pub sim: SimConfig<f64>,
    pub delay: Option<DelayConfig<f64>>,
}

impl BuiltExperiment {
    pub fn run(&self) -> Result<(FieldTrajectory<f64>, TransferOutcome<f64>)> {
        match &self.delay {
            Some(d) => simulate_with_delay(&self.sim, d),
            None => simulate(&self.sim),
        }
    }
}

impl ExperimentConfig {
    /// Symmetric lossless design with the given amplitude.
    pub fn symmetric(t_max_abs: f64, eta_design: f64) -> Self {
        Self {
            t_max_e_abs: t_max_abs,
            t_max_r_abs: t_max_abs,
            t_max_e_arg_rad: 0.0,
            t_max_r_arg_rad: 0.0,
            freq_ghz: 6.0,
            eta_design,
            deform: DeformConfig::default(),
            detuning_e_rad_per_ns: 0.0,
            detuning_r_rad_per_ns: 0.0,
            t1_e_ns: None,
            t1_r_ns: None,
            eta_tl: 1.0,
            delay: None,
            coupler: None,
            dt_ns: None,
            seed: 0,
        }
    }

    pub fn tau_rt(&self) -> f64 {
        1.0 / (2.0 * self.freq_ghz)
    }

    pub fn protocol(&self) -> Result<ProtocolParams<f64>> {
        if !(self.freq_ghz > 0.0 && self.freq_ghz.is_finite()) {
            return Err(Error::param("freq_GHz", "must be positive"));
        }
        let te = Cx::from_polar(self.t_max_e_abs, self.t_max_e_arg_rad);
        let tr = Cx::from_polar(self.t_max_r_abs, self.t_max_r_arg_rad);
        crate::pulse::design_protocol(te, tr, self.tau_rt(), self.eta_design)
    }

    pub fn build(&self) -> Result<BuiltExperiment> {
        let p = self.protocol()?;
        let (mut e, mut r) = if self.deform.is_identity() {
            (p.emitter(), p.receiver())
        } else {
            apply_deformations(&p, &self.deform.to_spec(&p, self.seed))?
        };
        let mut sim = SimConfig::with_pulses(&p, e.clone(), r.clone());
        sim.detuning_e = Detuning::Constant(self.detuning_e_rad_per_ns);
        sim.detuning_r = Detuning::Constant(self.detuning_r_rad_per_ns);
        if let Some(c) = &self.coupler {
            let circuit = c.circuit.params(self.freq_ghz);
            let se = schedule(&circuit, &e, c.grid_intervals, c.compensation)?;
            let sr = schedule(&circuit, &r, c.grid_intervals, c.compensation)?;
            e = se.pulse;
            r = sr.pulse;
            sim.emitter = e;
            sim.receiver = r;
            let tau_rt = circuit.tau_rt();
            sim.tau_rt_e = tau_rt;
            sim.tau_rt_r = tau_rt;
            let add = |base: f64, s: crate::pulse::UniformSeries<f64, f64>| Detuning::Sampled(s.map(|_, v| v + base));
            sim.detuning_e = add(self.detuning_e_rad_per_ns, se.detuning);
            sim.detuning_r = add(self.detuning_r_rad_per_ns, sr.detuning);
        }
        sim.t1_e = self.t1_e_ns;
        sim.t1_r = self.t1_r_ns;
        sim.eta_tl = self.eta_tl;
        sim.dt = self.dt_ns;
        let delay = match &self.delay {
            None => None,
            Some(d) => {
                let td = match (d.td_ns, d.td_over_tau) {
                    (Some(t), None) => t,
                    (None, Some(x)) => x * p.tau_e,
                    _ => return Err(Error::param("delay", "give exactly one of td_ns and td_over_tau")),
                };
                Some(DelayConfig::new(td, d.phi_rad)?)
            }
        };
        sim.validate()?;
        Ok(BuiltExperiment { params: p, sim, delay })
    }

    /// Same experiment without imperfections in the pulses.
    pub fn undeformed(&self) -> Self {
        let mut c = self.clone();
        c.deform = DeformConfig {
            grid_intervals: self.deform.grid_intervals,
            ..DeformConfig::default()
        };
        c
    }
}

/// Effective-leakage prediction for noisy pulses: the noise is replaced by
/// extra resonator decay while the transfer term is kept.
pub fn noise_oracle(config: &ExperimentConfig, kind: NoiseKindConfig, amplitude: f64, xi_var: f64) -> Result<f64> {
    let mut c = config.clone();
    c.deform.noise = NoiseConfig::default();
    let mut built = c.build()?;
    let s = amplitude * amplitude * xi_var;
    match kind {
        NoiseKindConfig::None => {}
        NoiseKindConfig::Multiplicative => {
            built.sim.extra_decay_e = ExtraDecay::ProportionalToLeakage(s);
            built.sim.extra_decay_r = ExtraDecay::ProportionalToLeakage(s);
        }
        NoiseKindConfig::Additive => {
            let te = built.params.t_max_e.norm() * (1.0 + c.deform.t_max_e_rel);
            let tr = built.params.t_max_r.norm() * (1.0 + c.deform.t_max_r_rel);
            built.sim.extra_decay_e = ExtraDecay::Constant(s * te * te / built.sim.tau_rt_e);
            built.sim.extra_decay_r = ExtraDecay::Constant(s * tr * tr / built.sim.tau_rt_r);
        }
    }
    Ok(built.run()?.1.eta)
}
