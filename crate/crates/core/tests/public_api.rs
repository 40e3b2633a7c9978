use spinbath::bath::{bath_spectrum, hamming_spectrum, product_weight, zero_temperature_index, N_MAX_ENUMERATE};
use spinbath::dynamics::{closed_evolution, dephasing_factor, evolve};
use spinbath::oracle::build_full_hamiltonian;
use spinbath::riccati::{riccati_f, riccati_f2};
use spinbath::{DensityMatrix2, Drive, Error, ModelParams, SpectrumPath};

#[test]
fn single_spin_modes_by_hand() {
    let p = ModelParams::uniform(1, 1.0, 0.5, Drive::new(0.0, 0.0, 0.0), 0.0).unwrap();
    let s = bath_spectrum(&p, 0.0).unwrap();
    let modes: Vec<_> = s.iter().map(|m| (m.e, m.omega, m.weight)).collect();
    assert_eq!(modes, vec![(0.5, 1.0, 0.5), (-0.5, -1.0, 0.5)]);
}

#[test]
fn two_spin_classes_by_hand() {
    let p = ModelParams::uniform(2, 0.4, 1.0, Drive::new(0.0, 0.0, 0.0), 0.0).unwrap();
    let s = hamming_spectrum(&p, 0.0).unwrap();
    let classes: Vec<_> = s.iter().map(|m| (m.e, m.multiplicity, m.weight)).collect();
    assert_eq!(classes, vec![(2.0, 1, 0.25), (0.0, 2, 0.5), (-2.0, 1, 0.25)]);
}

#[test]
fn scalar_weight_and_ground_index() {
    let p = ModelParams::uniform(1, 1.0, 0.0, Drive::new(0.0, 0.0, 0.0), 1.0).unwrap();
    let w = product_weight(&p, 0).unwrap();
    assert!((w - 0.5 * (1.0 + (-1.0f64).tanh())).abs() < 1e-15);
    let p = ModelParams::new(vec![1.0, -1.0], vec![0.0, 0.0], Drive::new(0.0, 0.0, 0.0), 1.0).unwrap();
    assert_eq!(zero_temperature_index(&p).unwrap(), 2);
}

#[test]
fn errors_surface_through_the_public_api() {
    let big = ModelParams::uniform(N_MAX_ENUMERATE + 1, 1.0, 0.1, Drive::new(0.1, 0.0, 0.0), 1.0).unwrap();
    assert!(matches!(bath_spectrum(&big, 0.0), Err(Error::Capacity { .. })));
    assert!(matches!(build_full_hamiltonian(&big, 0.0), Err(Error::Capacity { .. })));
    assert!(hamming_spectrum(&big, 0.0).is_ok());

    let mixed = ModelParams::new(vec![1.0, 2.0], vec![0.1, 0.1], Drive::new(0.1, 0.0, 0.0), 1.0).unwrap();
    assert!(matches!(hamming_spectrum(&mixed, 0.0), Err(Error::Contract(_))));
    assert!(matches!(closed_evolution(1.0, &mixed), Err(Error::Contract(_))));
    assert!(matches!(product_weight(&mixed, 4), Err(Error::Range { .. })));
    assert_eq!(riccati_f(1.0, 0.0), Err(Error::RiccatiBranch));
    assert_eq!(riccati_f2(1.0, 0.0), Err(Error::RiccatiBranch));
    assert!(ModelParams::uniform(1, 1.0, 0.1, Drive::new(f64::NAN, 0.0, 0.0), 1.0).is_err());
    assert!(ModelParams::uniform(1, 1.0, 0.1, Drive::new(0.0, 0.0, 0.0), -1.0).is_err());

    let rho = DensityMatrix2::ground();
    assert!(evolve(&mixed, &rho, &[0.0, 0.0], SpectrumPath::Auto).is_err());
}

#[test]
fn auto_path_picks_classes_only_for_large_uniform_baths() {
    let drive = Drive::new(0.3, 0.2, 0.1);
    let big = ModelParams::uniform(500, 1.0, 0.01, drive, 2.0).unwrap();
    assert!(SpectrumPath::Auto.uses_hamming(&big));
    assert_eq!(SpectrumPath::Auto.spectrum(&big, 0.0).unwrap().len(), 501);
    let small = ModelParams::uniform(4, 1.0, 0.01, drive, 2.0).unwrap();
    assert!(!SpectrumPath::Auto.uses_hamming(&small));
}

#[test]
fn dephasing_of_one_spin_at_infinite_temperature() {
    let g = 0.35;
    let p = ModelParams::uniform(1, 2.0, g, Drive::new(0.0, 0.0, 0.0), 0.0).unwrap();
    let plus = DensityMatrix2::from_bloch([1.0, 0.0, 0.0]).unwrap();
    let times: Vec<f64> = (0..50).map(|k| 0.2 * k as f64).collect();
    let traj = evolve(&p, &plus, &times, SpectrumPath::Enumerate).unwrap();
    for (t, c) in times.iter().zip(&traj.coherence) {
        let d = dephasing_factor(*t, &p, SpectrumPath::Enumerate).unwrap();
        assert!((d.re - (2.0 * g * t).cos()).abs() < 1e-15 && d.im.abs() < 1e-15);
        assert!((2.0 * c - (2.0 * g * t).cos().abs()).abs() < 1e-12);
    }
}
