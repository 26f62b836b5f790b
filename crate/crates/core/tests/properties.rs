use loewner_core::evolution::{anti_monotone_family, free_family, monotone_family};
use loewner_core::{convolve, f_transform, flow_reverse, Complex64, Driving64, FlowOptions64, Measure64};
use proptest::prelude::*;

fn driver(values: &[f64]) -> Driving64 {
    let n = values.len();
    let times = (0..n).map(|k| k as f64 / (n - 1) as f64).collect();
    let mut vals = values.to_vec();
    vals[0] = 0.0;
    Driving64::atom_path(times, vals).unwrap()
}

fn sorted3(a: f64, b: f64, c: f64) -> (f64, f64, f64) {
    let mut v = [a, b, c];
    v.sort_by(|x, y| x.partial_cmp(y).unwrap());
    (v[0], v[1], v[2])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn reverse_flow_composes(
        vals in prop::collection::vec(-1.0f64..1.0, 3..7),
        a in 0.0f64..1.0, b in 0.0f64..1.0, c in 0.0f64..1.0,
        x in -2.0f64..2.0, y in 0.5f64..2.0,
    ) {
        let d = driver(&vals);
        let (s, u, t) = sorted3(a, b, c);
        let z = Complex64::new(x, y);
        let o = FlowOptions64::default();
        let direct = flow_reverse(&d, s, t, z, &o).unwrap();
        let split = flow_reverse(&d, u, t, flow_reverse(&d, s, u, z, &o).unwrap(), &o).unwrap();
        prop_assert!((direct - split).norm() < 1e-7);
    }

    #[test]
    fn reverse_flow_is_lipschitz_in_time_and_raises_im(
        vals in prop::collection::vec(-1.0f64..1.0, 3..7),
        a in 0.0f64..1.0, b in 0.0f64..1.0, c in 0.0f64..1.0,
        x in -2.0f64..2.0, y in 0.5f64..2.0,
    ) {
        let d = driver(&vals);
        let (s, u, t) = sorted3(a, b, c);
        let z = Complex64::new(x, y);
        let o = FlowOptions64::default();
        let pu = flow_reverse(&d, s, u, z, &o).unwrap();
        let pt = flow_reverse(&d, s, t, z, &o).unwrap();
        prop_assert!((pu - pt).norm() <= 1.05 * (t - u) / y + 1e-9);
        prop_assert!(pt.im >= y - 1e-12);
    }

    #[test]
    fn anti_family_composes_in_reverse_order(
        vals in prop::collection::vec(-1.0f64..1.0, 3..6),
        a in 0.0f64..1.0, b in 0.0f64..1.0, c in 0.0f64..1.0,
        x in -2.0f64..2.0, y in 0.5f64..2.0,
    ) {
        let fam = anti_monotone_family(driver(&vals));
        let (s, u, t) = sorted3(a, b, c);
        let z = Complex64::new(x, y);
        let direct = fam.eval(s, t, z).unwrap();
        let split = fam.eval(s, u, fam.eval(u, t, z).unwrap()).unwrap();
        prop_assert!((direct - split).norm() < 1e-7);
    }

    #[test]
    fn free_family_is_additive(
        vals in prop::collection::vec(-1.0f64..1.0, 2..6),
        a in 0.0f64..1.0, b in 0.0f64..1.0, c in 0.0f64..1.0,
        x in -2.0f64..2.0, y in 0.3f64..2.0,
    ) {
        let fam = free_family(driver(&vals));
        let (s, u, t) = sorted3(a, b, c);
        let z = Complex64::new(x, -y);
        let sum = fam.eval(s, u, z).unwrap() + fam.eval(u, t, z).unwrap();
        prop_assert!((sum - fam.eval(s, t, z).unwrap()).norm() < 1e-10);
    }

    #[test]
    fn monotone_composition_is_associative(
        v in prop::collection::vec(0.1f64..2.0, 3),
        shifts in prop::collection::vec(-1.0f64..1.0, 3),
        x in -3.0f64..3.0, y in 0.1f64..3.0,
    ) {
        let f: Vec<_> = (0..3).map(|i| f_transform(&Measure64::arcsine(v[i]).unwrap().shift(shifts[i]))).collect();
        let z = Complex64::new(x, y);
        let left = convolve::monotone(&f[0], &convolve::monotone(&f[1], &f[2]).unwrap()).unwrap();
        let right = convolve::monotone(&convolve::monotone(&f[0], &f[1]).unwrap(), &f[2]).unwrap();
        prop_assert!((left.eval(z).unwrap() - right.eval(z).unwrap()).norm() < 1e-12);
    }

    #[test]
    fn shift_and_dilate_act_on_mean_and_variance(
        v in 0.1f64..3.0, a in -2.0f64..2.0, l in 0.2f64..3.0,
    ) {
        for m in [Measure64::semicircle(v).unwrap(), Measure64::arcsine(v).unwrap()] {
            let (mean, var) = m.shift(a).dilate(l).unwrap().mean_var().unwrap();
            prop_assert!((mean - a * l).abs() < 1e-10);
            prop_assert!((var - v * l * l).abs() < 1e-10 * (1.0 + var));
        }
    }
}

#[test]
fn monotone_family_weak_continuity_surrogate() {
    let fam = monotone_family(driver(&[0.0, 0.4, -0.3, 0.2]));
    let z = Complex64::new(0.3, 0.6);
    let at = fam.eval(0.1, 0.8, z).unwrap();
    for gap in [1e-2, 1e-3, 1e-4] {
        let near = fam.eval(0.1, 0.8 - gap, z).unwrap();
        assert!((near - at).norm() <= gap / z.im * 1.05);
    }
}
