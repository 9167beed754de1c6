use num_complex::Complex64 as C64;
use proptest::prelude::*;

use qxfer::quantum::{apply_channel, env_fidelity, environment_coefficient, Channel, FockVector};

fn state() -> impl Strategy<Value = FockVector<f64>> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..10).prop_filter_map("zero vector", |v| {
        FockVector::normalized(v.into_iter().map(|(a, b)| C64::new(a, b)).collect()).ok()
    })
}

proptest! {
    #![proptest_config(ProptestConfig { failure_persistence: None, ..ProptestConfig::with_cases(128) })]

    #[test]
    fn trace_and_positivity(psi in state(), eta in 0.0f64..=1.0, phi in 0.0f64..std::f64::consts::TAU) {
        let rho = apply_channel(&psi, &Channel::new(eta, phi).unwrap(), None).unwrap();
        prop_assert!((rho.trace() - 1.0).norm() < 1e-9);
        prop_assert!(rho.eigenvalues().iter().all(|&l| l >= -1e-9));
        prop_assert!(rho.hermiticity_error() < 1e-12);
    }

    #[test]
    fn phase_covariance(psi in state(), eta in 0.0f64..=1.0, phi in 0.0f64..3.0, d in 0.0f64..3.0) {
        let a = apply_channel(&psi, &Channel::new(eta, phi).unwrap(), None).unwrap();
        let b = apply_channel(&psi, &Channel::new(eta, phi + d).unwrap(), None).unwrap();
        for n in 0..a.dim() {
            prop_assert_eq!(a.get(n, n), b.get(n, n));
            for m in 0..a.dim() {
                let rot = C64::from_polar(1.0, (n as f64 - m as f64) * d);
                prop_assert!((a.get(n, m) * rot - b.get(n, m)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn thermal_environment_never_helps(eta in 0.0f64..=1.0, p in 0.0f64..1.0) {
        let vac = env_fidelity(eta, &[1.0]).unwrap().average;
        let th = env_fidelity(eta, &[1.0 - p, p * 0.7, p * 0.3]).unwrap().average;
        prop_assert!(th <= vac + 1e-15);
    }
}

#[test]
fn perfect_transfer_has_no_environment_effect() {
    for n in 0..=40 {
        assert_eq!(environment_coefficient(1.0f64, n), 0.0);
    }
}

#[test]
fn non_normalized_populations_rejected() {
    assert!(env_fidelity(0.9f64, &[0.5, 0.4]).is_err());
}
