//! Measures whose F-transform maps onto the half-plane minus a slit.

use loewner_core::evolution::monotone_family;
use loewner_core::loewner::{welding_with, FlowOptions};
use loewner_core::{Complex64, Driving64, Measure64};

fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..=n).map(|k| lo + (hi - lo) * k as f64 / n as f64).collect()
}

fn check_welded_density(m: &Measure64, pairs: &[(f64, f64)]) {
    for &(x, hx) in &pairs[1..pairs.len() - 1] {
        let (dx, dh) = (m.density_at(x).unwrap(), m.density_at(hx).unwrap());
        assert!(dx > 0.05);
        assert!((dx - dh).abs() < 1e-2, "x={x} h={hx}: {dx} vs {dh}");
    }
}

#[test]
fn slit_based_at_origin_has_welded_density_and_no_atom() {
    // the slit of phi_{0,T} is based at U(T) = 0
    let d = Driving64::atom_path(vec![0.0, 0.5, 1.0], vec![0.0, 0.6, 0.0]).unwrap();
    let w = welding_with(&d, 1.0, 8).unwrap();
    let m = monotone_family(d).sigma(0.0, 1.0, &grid(w.a - 0.3, w.b + 0.3, 3000), 1e-4).unwrap();
    let Measure64::Empirical(e) = &m else { panic!("empirical expected") };
    assert!(e.atoms().is_empty(), "{:?}", e.atoms());
    // support is the preimage interval of the slit
    assert!(m.density_at(w.a - 0.05).unwrap() < 1e-2);
    assert!(m.density_at(w.b + 0.05).unwrap() < 1e-2);
    check_welded_density(&m, &w.pairs);
}

#[test]
fn linear_driver_slit_carries_an_atom() {
    // slit based at U(T) = 0.8, away from the origin
    let d = Driving64::atom_path(vec![0.0, 1.0], vec![0.0, 0.8]).unwrap();
    let w = welding_with(&d, 1.0, 8).unwrap();
    let m = monotone_family(d.clone()).sigma(0.0, 1.0, &grid(w.a - 0.5, w.b + 0.3, 3000), 1e-4).unwrap();
    let Measure64::Empirical(e) = &m else { panic!("empirical expected") };
    assert_eq!(e.atoms().len(), 1);
    let (x0, mass) = e.atoms()[0];
    assert!(x0 < w.a || x0 > w.b);
    // the atom sits at the real zero of F
    let f = loewner_core::flow_reverse(&d, 0.0, 1.0, Complex64::new(x0, 0.0), &FlowOptions::default()).unwrap();
    assert!(f.norm() < 1e-6, "{f}");
    assert!(mass > 0.0 && mass < 1.0);
    check_welded_density(&m, &w.pairs);
}

#[test]
fn slit_off_the_origin_carries_an_atom() {
    // phi(z) = 1 + sqrt((z - 1)^2 - 1) vanishes at 1 - sqrt(2) with slope sqrt(2)
    let fam = monotone_family(Driving64::constant(1.0));
    let m = fam.sigma(0.0, 0.5, &grid(-1.0, 2.5, 3500), 1e-5).unwrap();
    let Measure64::Empirical(e) = &m else { panic!("empirical expected") };
    assert_eq!(e.atoms().len(), 1);
    let (x0, mass) = e.atoms()[0];
    assert!((x0 - (1.0 - 2f64.sqrt())).abs() < 1e-6);
    assert!((mass - 1.0 / 2f64.sqrt()).abs() < 1e-3);
    // density symmetric about u = 1 with h(x) = 2 - x
    for x in [0.2, 0.5, 0.8] {
        let (a, b) = (m.density_at(x).unwrap(), m.density_at(2.0 - x).unwrap());
        assert!((a - b).abs() < 1e-2);
    }
}

#[test]
fn f32_flows_run() {
    let d = loewner_core::Driving::<f32>::constant(0.0);
    let p =
        loewner_core::flow_forward(&d, loewner_core::Complex32::new(0.0, 2.0), 1.0, &FlowOptions::default()).unwrap();
    assert!((p.value - loewner_core::Complex32::new(0.0, 2f32.sqrt())).norm() < 1e-4);
    let g = loewner_core::cauchy(&loewner_core::Measure32::semicircle(1.0).unwrap());
    let v = g.eval(loewner_core::Complex32::new(0.0, 2.0)).unwrap();
    assert!((v.im + 0.414_213_56).abs() < 1e-5);
    let _ = Complex64::new(0.0, 0.0);
}
