use ncg_core::linalg::{dot, norm};
use ncg_core::oracle::{check_gradient_fd, check_hvp_fd};
use ncg_core::problems::{bench_quadratic_spectrum, Family, InfeasibilityRecipe, Instance};
use ncg_core::rng::NormalStream;
use ncg_core::ProblemOracle;
use proptest::prelude::*;

fn sample_instances() -> Vec<Instance> {
    let mut v = Vec::new();
    for seed in 0..3 {
        for p in [2.25, 2.5, 3.0] {
            v.push(Instance::generate(Family::Infeasibility, 12, 4, p, seed).unwrap());
            v.push(Instance::generate_with(Family::Infeasibility, 12, 4, p, seed, InfeasibilityRecipe::Gram).unwrap());
            v.push(Instance::generate(Family::Repu, 12, 6, p, seed).unwrap());
        }
        v.push(Instance::generate(Family::Quadratic, 12, 0, 0.0, seed).unwrap());
    }
    v
}

/// A point where the active `(·)_+` terms are away from their kinks.
fn probe_point(inst: &Instance, seed: u64) -> Vec<f64> {
    let mut rng = NormalStream::new(seed);
    let n = inst.dim();
    match inst {
        Instance::Repu(_) => rng.normal_vec(n).iter().map(|v| 0.5 * v).collect(),
        _ => rng.normal_vec(n),
    }
}

#[test]
fn analytic_derivatives_match_finite_differences() {
    for (k, inst) in sample_instances().iter().enumerate() {
        for s in 0..3 {
            let x = probe_point(inst, 100 * k as u64 + s);
            let scale = 1.0 + norm(&inst.gradient_new(&x));
            let gerr = check_gradient_fd(inst, &x, 1e-6 * (1.0 + norm(&x))).unwrap();
            assert!(gerr < 1e-6 * scale, "{} gradient: {gerr:e}", inst.family());
            let v = NormalStream::new(7 + s).unit_sphere(inst.dim());
            let herr = check_hvp_fd(inst, &x, &v, 1e-5).unwrap();
            assert!(herr < 1e-5 * scale, "{} hvp: {herr:e}", inst.family());
        }
    }
}

#[test]
fn frozen_hessian_matches_pointwise_products_and_is_symmetric() {
    for (k, inst) in sample_instances().iter().enumerate() {
        let n = inst.dim();
        let x = probe_point(inst, 900 + k as u64);
        let h = inst.hessian_at(&x);
        let mut rng = NormalStream::new(k as u64);
        let (u, v) = (rng.normal_vec(n), rng.normal_vec(n));
        let (hu, hv) = (h.apply_new(&u), h.apply_new(&v));
        let direct = inst.hvp_new(&x, &u);
        for i in 0..n {
            assert!((hu[i] - direct[i]).abs() <= 1e-12 * (1.0 + direct[i].abs()));
        }
        let (a, b) = (dot(&v, &hu), dot(&u, &hv));
        assert!((a - b).abs() <= 1e-11 * (1.0 + a.abs()), "{a} vs {b}");
    }
}

#[test]
fn objectives_match_direct_sums() {
    let inst = Instance::generate(Family::Infeasibility, 5, 3, 2.5, 4).unwrap();
    let Instance::Infeasibility(ref d) = inst else { unreachable!() };
    let x = [0.3, -1.0, 0.2, 0.9, -0.4];
    let mut expect = 0.0;
    for i in 0..3 {
        let mut q = d.c[i];
        for r in 0..5 {
            q += d.b[i][r] * x[r];
            for c in 0..5 {
                q += x[r] * d.a[i].get(r, c) * x[c];
            }
        }
        expect += q.max(0.0).powf(2.5) / 3.0;
    }
    assert!((inst.value(&x) - expect).abs() <= 1e-13 * (1.0 + expect));

    let inst = Instance::generate(Family::Repu, 5, 4, 3.0, 4).unwrap();
    let Instance::Repu(ref d) = inst else { unreachable!() };
    let mut expect = 0.0;
    for i in 0..4 {
        let z: f64 = (0..5).map(|r| d.a[i][r] * x[r]).sum();
        let t = z.max(0.0).powi(3) - d.b[i];
        expect += t * t / (1.0 + t * t) / 4.0;
    }
    assert!((inst.value(&x) - expect).abs() <= 1e-14);
    assert!(d.b.iter().all(|&b| b >= 0.0));
}

#[test]
fn start_points_follow_the_family() {
    let inf = Instance::generate(Family::Infeasibility, 8, 2, 2.5, 0).unwrap();
    assert_eq!(inf.start_point(), vec![0.0; 8]);
    let repu = Instance::generate(Family::Repu, 8, 2, 2.5, 0).unwrap();
    assert_eq!(repu.start_point(), vec![0.125; 8]);
    let q = Instance::generate(Family::Quadratic, 8, 0, 0.0, 0).unwrap();
    assert_eq!(q.start_point(), vec![1.0; 8]);
}

#[test]
fn bench_spectrum_is_positive_and_bounded() {
    let s = bench_quadratic_spectrum(200, 3);
    assert_eq!(s.len(), 200);
    assert!(s.iter().all(|&l| (0.01..=10.0).contains(&l)));
}

#[test]
fn invalid_sizes_are_rejected() {
    assert!(Instance::generate(Family::Infeasibility, 0, 3, 2.5, 0).is_err());
    assert!(Instance::generate(Family::Repu, 4, 0, 2.5, 0).is_err());
    assert!(Instance::generate(Family::Repu, 4, 2, 1.5, 0).is_err());
}

#[test]
fn malformed_instance_files_are_rejected() {
    for text in ["", "ncg-instance v2\n", "ncg-instance v1\nfamily repu\nn 2\nm 1\np 3\nseed 0\nvalues 3\n1\n2\n"] {
        assert!(Instance::read_from(text.as_bytes()).is_err(), "{text:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn serialization_round_trips(
        family in prop::sample::select(vec![Family::Infeasibility, Family::Repu, Family::Quadratic]),
        n in 1usize..12,
        m in 1usize..6,
        p in 2.01f64..3.0,
        seed in any::<u64>(),
    ) {
        let inst = Instance::generate(family, n, m, p, seed).unwrap();
        let mut buf = Vec::new();
        inst.write_to(&mut buf).unwrap();
        let back = Instance::read_from(buf.as_slice()).unwrap();
        prop_assert_eq!(&back, &inst);
        let x = vec![0.1; n];
        prop_assert_eq!(back.value(&x).to_bits(), inst.value(&x).to_bits());
    }

    #[test]
    fn generation_is_deterministic(n in 1usize..10, m in 1usize..5, seed in any::<u64>()) {
        let a = Instance::generate(Family::Infeasibility, n, m, 2.5, seed).unwrap();
        let b = Instance::generate(Family::Infeasibility, n, m, 2.5, seed).unwrap();
        prop_assert_eq!(a, b);
    }
}
