use std::f64::consts::PI;

use fichera::certificate::{
    certify, radial_control_energy, run_certificate, solve_helmholtz_extension, CertificateDisc,
    EdgeTrace,
};
use proptest::prelude::*;

const PI2: f64 = PI * PI;

fn disc(degree: usize) -> CertificateDisc {
    CertificateDisc {
        degree,
        ..CertificateDisc::default()
    }
}

#[test]
fn ground_mode_trace_certifies() {
    let (cert, direct) = run_certificate(disc(6)).unwrap();
    assert!(cert.verdict);
    assert!(cert.j_psi0 < 0.0 && cert.rayleigh < PI2);
    assert!((cert.mu_shift - 0.5 * cert.j_psi0.abs()).abs() < 1e-15);
    let d = direct.unwrap();
    assert!((d.rayleigh - cert.rayleigh).abs() < 1e-6 * cert.rayleigh);
    let json = serde_json::to_value(&cert).unwrap();
    assert!(json.get("J_psi0").is_some());
}

#[test]
fn energy_is_stable_under_degree_refinement() {
    let a = solve_helmholtz_extension(disc(6), EdgeTrace::Mode(1))
        .unwrap()
        .j_psi0;
    let b = solve_helmholtz_extension(disc(8), EdgeTrace::Mode(1))
        .unwrap()
        .j_psi0;
    assert!((a - b).abs() < 1e-4 * b.abs());
}

#[test]
fn control_profile_has_nonzero_energy() {
    assert!(radial_control_energy() > 1.0);
}

#[test]
fn zero_trace_is_rejected() {
    let ext = solve_helmholtz_extension(disc(4), EdgeTrace::Zero).unwrap();
    let cert = certify(&ext);
    assert!(!cert.verdict);
    assert_eq!(cert.rayleigh, PI2);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// The extension minimizes the energy among functions with the same edge data.
    #[test]
    fn extension_minimizes_energy(a in -2.0f64..2.0, b in -2.0f64..2.0, k in 1u32..4) {
        let ext = solve_helmholtz_extension(disc(6), EdgeTrace::Mode(1)).unwrap();
        let bump = ext.interpolate(|x| {
            let r2 = x[0] * x[0] + x[1] * x[1];
            x[0] * x[1] * (1.0 - r2).max(0.0) * (a + b * (k as f64 * PI * x[0]).sin())
        });
        let trial: Vec<f64> = ext.coeffs.iter().zip(&bump).map(|(u, v)| u + v).collect();
        prop_assert!(ext.energy(&trial) >= ext.j_psi0 - 1e-10);
    }
}
