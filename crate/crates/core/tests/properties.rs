use esdg::euler::log_mean;
use esdg::operators_1d::operator_residuals;
use esdg::{Conserved, Gas, NodeFamily, Operator1D, Primitive, TensorOperators};
use proptest::prelude::*;

fn primitive<const D: usize>() -> impl Strategy<Value = Primitive<D>> {
    (0.1f64..3.0, proptest::array::uniform3(-2.0f64..2.0), 0.1f64..3.0).prop_map(|(rho, v, p)| {
        let mut vel = [0.0; D];
        vel.copy_from_slice(&v[..D]);
        Primitive { rho, vel, p }
    })
}

fn family() -> impl Strategy<Value = NodeFamily> {
    prop_oneof![Just(NodeFamily::Gauss), Just(NodeFamily::Gll)]
}

fn check_flux<const D: usize>(a: Primitive<D>, b: Primitive<D>) -> Result<(), TestCaseError> {
    let gas = Gas::default();
    let (ul, ur): (Conserved<D>, Conserved<D>) = (gas.conserved(&a), gas.conserved(&b));
    for dir in 0..D {
        let r = gas.flux_residuals(&ul, &ur, dir).unwrap();
        prop_assert_eq!(r.symmetry, 0.0);
        prop_assert!(r.consistency <= 1e-14, "consistency {}", r.consistency);
        prop_assert!(r.shuffle <= 1e-11, "shuffle {}", r.shuffle);
    }
    Ok(())
}

proptest! {
    #[test]
    fn ec_flux_identities_1d(a in primitive::<1>(), b in primitive::<1>()) {
        check_flux(a, b)?;
    }

    #[test]
    fn ec_flux_identities_2d(a in primitive::<2>(), b in primitive::<2>()) {
        check_flux(a, b)?;
    }

    #[test]
    fn ec_flux_identities_3d(a in primitive::<3>(), b in primitive::<3>()) {
        check_flux(a, b)?;
    }

    #[test]
    fn entropy_variable_roundtrip(w in primitive::<3>()) {
        let gas = Gas::default();
        let u = gas.conserved(&w);
        let back = gas.conserved_from_entropy(&gas.entropy_vars(&u).unwrap()).unwrap();
        prop_assert!((back - u).max_abs() <= 1e-12 * (1.0 + u.max_abs()));
    }

    #[test]
    fn log_mean_bounded_and_symmetric(a in 1e-3f64..1e3, r in prop_oneof![0.5f64..2.0, 1.0 - 1e-6..1.0 + 1e-6]) {
        let b = a * r;
        let m = log_mean(a, b).unwrap();
        prop_assert_eq!(m, log_mean(b, a).unwrap());
        let (lo, hi) = (a.min(b), a.max(b));
        prop_assert!(m >= lo * (1.0 - 1e-15) && m <= hi * (1.0 + 1e-15));
        // the log mean lies below the arithmetic mean and above the geometric mean
        prop_assert!(m <= 0.5 * (a + b) * (1.0 + 1e-15));
        prop_assert!(m >= (a * b).sqrt() * (1.0 - 1e-15));
    }

    #[test]
    fn sbp_identities(n in 1usize..=15, fam in family()) {
        let r = operator_residuals(&Operator1D::new(n, fam).unwrap());
        prop_assert!(r.max() <= 1e-13, "{:?}", r);
    }

    #[test]
    fn tensor_derivative_exact_on_degree_n(n in 1usize..=6, fam in family(), c in proptest::array::uniform3(-1.0f64..1.0)) {
        let ops = TensorOperators::new(3, n, fam).unwrap();
        let f = |x: [f64; 3]| c[0] * x[0].powi(n as i32) + c[1] * x[0] * x[1] + c[2] * x[2];
        let df = |x: [f64; 3]| [c[0] * n as f64 * x[0].powi(n as i32 - 1) + c[1] * x[1], c[1] * x[0], c[2]];
        let vals: Vec<f64> = (0..ops.num_vol).map(|k| f(ops.vol_point(k))).collect();
        let mut out = vec![0.0; ops.num_vol];
        for dir in 0..3 {
            ops.apply_derivative(dir, &vals, &mut out);
            for (k, o) in out.iter().enumerate() {
                prop_assert!((o - df(ops.vol_point(k))[dir]).abs() < 1e-10);
            }
        }
    }
}
