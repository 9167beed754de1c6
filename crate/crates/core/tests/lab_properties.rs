use proptest::prelude::*;

use qxfer::lab::{fit_quadratic, io, run_sweep, summarize, Axis, ExperimentConfig, NoiseKindConfig, SweepSpec};
use qxfer::pulse::generate_noise_trace;

proptest! {
    #![proptest_config(ProptestConfig { failure_persistence: None, ..ProptestConfig::with_cases(64) })]

    #[test]
    fn fit_recovers_synthetic_surface(c1 in -5.0f64..5.0, c2 in -5.0f64..5.0, c3 in -5.0f64..5.0, w in 0.01f64..1.0) {
        let mut pts = Vec::new();
        let mut y = Vec::new();
        for i in -2..=2 {
            for j in -2..=2 {
                let (a, b) = (w * i as f64 / 2.0, w * j as f64 / 2.0);
                pts.push(vec![a, b]);
                y.push(c1 * a * a + c2 * b * b + c3 * a * b);
            }
        }
        let f = fit_quadratic(&pts, &y).unwrap();
        for (got, want) in f.coefficients.iter().zip([c1, c2, c3]) {
            prop_assert!((got - want).abs() < 1e-6);
        }
    }
}

fn noisy_spec(seed: u64) -> SweepSpec {
    let mut base = ExperimentConfig::symmetric(0.05, 0.99);
    base.deform.noise.kind = NoiseKindConfig::Multiplicative;
    base.deform.noise.amplitude = 0.05;
    base.deform.grid_intervals = 1 << 12;
    SweepSpec {
        base,
        axes: vec![Axis::values("deform.noise.dt_grid_ns", vec![1.0, 4.0])],
        overrides: vec![],
        master_seed: seed,
        realizations: 4,
    }
}

#[test]
fn sweeps_are_bitwise_deterministic() {
    let render = |s: &SweepSpec| {
        let mut buf = Vec::new();
        io::write_sweep(&mut buf, &run_sweep(s).unwrap()).unwrap();
        buf
    };
    let a = render(&noisy_spec(11));
    assert_eq!(a, render(&noisy_spec(11)));
    assert_ne!(a, render(&noisy_spec(12)));
}

#[test]
fn adding_an_axis_keeps_point_zero_seed() {
    let one = run_sweep(&noisy_spec(3)).unwrap();
    let mut spec = noisy_spec(3);
    spec.axes.push(Axis::values("deform.alpha_e", vec![0.0, 0.01]));
    let two = run_sweep(&spec).unwrap();
    assert_eq!(one.rows[0].seed, two.rows[0].seed);
    assert_eq!(one.rows[0].eta, two.rows[0].eta);
}

#[test]
fn error_bars_grow_with_grid_spacing() {
    let mut spec = noisy_spec(21);
    spec.realizations = 100;
    let s = summarize(&run_sweep(&spec).unwrap());
    let ratio = s[1].std_eta / s[0].std_eta;
    assert!((ratio - 2.0).abs() < 0.6, "spread ratio {ratio}");
}

/// Mean of ξ̄² for a natural cubic spline through i.i.d. unit normals:
/// the time average of Σ_k φ_k(t)², with φ_k the cardinal splines.
fn cardinal_variance(dt: f64, t_f: f64) -> f64 {
    let m = (t_f / dt).ceil() as usize + 1;
    let fine = 64;
    let mut acc = vec![0.0; (m - 1) * fine + 1];
    for k in 0..m {
        let mut nodes = vec![0.0; m];
        nodes[k] = 1.0;
        let tr = qxfer::pulse::NoiseTrace::from_nodes(dt, t_f, nodes);
        for (i, a) in acc.iter_mut().enumerate() {
            let v = tr.eval(dt * i as f64 / fine as f64);
            *a += v * v;
        }
    }
    // Simpson over [0, t_f] on the fine grid
    let h = dt / fine as f64;
    let n = ((t_f / h).floor() as usize) & !1;
    let mut s = acc[0] + acc[n];
    for (i, a) in acc.iter().enumerate().take(n).skip(1) {
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * a;
    }
    s * h / 3.0 / (n as f64 * h)
}

#[test]
fn measured_noise_variance_matches_cardinal_oracle() {
    let (dt, t_f) = (1.0, 120.0);
    let expect = cardinal_variance(dt, t_f);
    let n = 3000;
    let vals: Vec<f64> = (0..n)
        .map(|k| {
            generate_noise_trace(dt, t_f, 1000 + k as u64)
                .unwrap()
                .continuous_variance()
        })
        .collect();
    let mean = vals.iter().sum::<f64>() / n as f64;
    let sd = (vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt();
    let sem = sd / (n as f64).sqrt();
    assert!((mean - expect).abs() < 4.0 * sem, "{mean} vs {expect} (sem {sem})");
    assert!(expect > 0.8 && expect < 0.95, "{expect}");
}

#[test]
fn short_filters_cost_little() {
    let base = ExperimentConfig::symmetric(0.05, 0.999);
    let b = qxfer::lab::baseline_eta(&base).unwrap();
    for sigma in [0.25, 0.5, 1.0] {
        let mut c = base.clone();
        c.deform.sigma_ns = sigma;
        let eta = c.build().unwrap().run().unwrap().1.eta;
        assert!(b - eta < 1e-4, "sigma {sigma}: {}", b - eta);
    }
}
