use super::*;
use crate::chaos_algebra::{multiply, ChaosVector};
use crate::grid_kernels::{symmetrize, zero_diagonal};
use crate::path_sim::{sample_path, wiener_integral, RngStream};

fn path(seed: u64, steps: usize) -> WienerPath {
    sample_path(&mut RngStream::new(seed, 0), steps).unwrap()
}

fn random_kernel(order: usize, m: usize, seed: u64) -> GridKernel {
    let mut rng = RngStream::new(seed, 7);
    GridKernel::from_fn(order, m, |_| rng.next_normal()).unwrap()
}

#[test]
fn first_order_is_wiener_integral() {
    let p = path(1, 32);
    let h = GridFunction::from_fn(8, |t| t * t - 0.3).unwrap();
    let k = GridKernel::from_function(&h);
    let a = multiple_integral(&k, &p).unwrap();
    let b = wiener_integral(&h, &p).unwrap();
    assert!((a - b).abs() < 1e-14);
}

#[test]
fn off_diagonal_square() {
    let m = 16;
    let p = path(2, m);
    let h = GridFunction::from_fn(m, |t| (3.0 * t).sin()).unwrap();
    let f = zero_diagonal(&GridKernel::tensor(&[&h, &h]).unwrap());
    let got = multiple_integral(&f, &p).unwrap();
    let lin: f64 = h.values().iter().zip(p.increments()).map(|(a, x)| a * x).sum();
    let quad: f64 = h.values().iter().zip(p.increments()).map(|(a, x)| a * a * x * x).sum();
    assert!((got - (lin * lin - quad)).abs() < 1e-12);
}

#[test]
fn distinct_sums_match_brute_force() {
    let (m, n_steps) = (4, 8);
    let p = path(3, n_steps);
    let x = p.increments();
    let r = n_steps / m;
    let f2 = random_kernel(2, m, 1);
    let mut brute = 0.0;
    for i in 0..n_steps {
        for j in 0..n_steps {
            if i != j {
                brute += f2.get(&[i / r, j / r]) * x[i] * x[j];
            }
        }
    }
    assert!((multiple_integral(&f2, &p).unwrap() - brute).abs() < 1e-12);
    let f3 = random_kernel(3, m, 2);
    let mut brute = 0.0;
    for i in 0..n_steps {
        for j in 0..n_steps {
            for k in 0..n_steps {
                if i != j && j != k && i != k {
                    brute += f3.get(&[i / r, j / r, k / r]) * x[i] * x[j] * x[k];
                }
            }
        }
    }
    assert!((multiple_integral(&f3, &p).unwrap() - brute).abs() < 1e-12);
}

#[test]
fn rank_one_square_is_hermite() {
    let p = path(4, 64);
    let h = GridFunction::indicator(4, 0.0, 0.5, std::f64::consts::SQRT_2).unwrap();
    let r = RankOnePower::new(h.clone(), 2, 1.0);
    let w = wiener_integral(&h, &p).unwrap();
    assert!((multiple_integral(&r, &p).unwrap() - (w * w - 1.0)).abs() < 1e-12);
}

#[test]
fn hermite_product_identity_per_path() {
    let h = GridFunction::from_fn(8, |t| 1.0 + (5.0 * t).cos()).unwrap();
    let nsq = h.norm_sq();
    for seed in 0..20 {
        let p = path(100 + seed, 64);
        let i1 = multiple_integral(&RankOnePower::new(h.clone(), 1, 1.0), &p).unwrap();
        for n in 1..=6 {
            let i = |k: usize| multiple_integral(&RankOnePower::new(h.clone(), k, 1.0), &p).unwrap();
            let lhs = i1 * i(n);
            let rhs = i(n + 1) + n as f64 * nsq * i(n - 1);
            assert!((lhs - rhs).abs() < 1e-10 * (1.0 + lhs.abs()), "n = {n}");
        }
    }
}

#[test]
fn product_evaluates_to_square() {
    let h = GridFunction::indicator(2, 0.5, 1.0, std::f64::consts::SQRT_2).unwrap();
    let x = ChaosVector::from_rank_one(RankOnePower::new(h.clone(), 1, 1.0)).unwrap();
    let sq = multiply(&x, &x).unwrap();
    for seed in 0..10 {
        let p = path(seed, 128);
        let w = wiener_integral(&h, &p).unwrap();
        assert!((evaluate_chaos(&sq, &p).unwrap() - w * w).abs() < 1e-10);
    }
    let c = ChaosVector::constant(2, -1.5).unwrap();
    assert_eq!(evaluate_chaos(&c, &path(0, 4)).unwrap(), -1.5);
}

#[test]
fn preconditions() {
    let p = path(5, 12);
    assert!(matches!(multiple_integral(&random_kernel(4, 2, 0), &p), Err(Error::Capacity(_))));
    assert!(matches!(multiple_integral(&random_kernel(2, 5, 0), &p), Err(Error::Capacity(_))));
    let a = GridFunction::new(vec![1.0, 1.0]).unwrap();
    let b = GridFunction::new(vec![1.0, 0.0]).unwrap();
    let f = FactoredKernel::new(1.0, vec![(a, 1), (b, 1)]).unwrap();
    assert!(matches!(multiple_integral(&f, &p), Err(Error::Precondition(_))));
}

#[test]
fn dense_integrand_reproduces_the_integral() {
    let (m, n_steps) = (4, 16);
    let mut f = ChaosVector::zero(m).unwrap();
    for n in 1..=3 {
        f.add_dense(symmetrize(&random_kernel(n, m, n as u64)).unwrap()).unwrap();
    }
    let ev = ChaosEvaluator::new(&f, n_steps).unwrap();
    let ie = IntegrandEvaluator::new(&f, n_steps).unwrap();
    for seed in 0..5 {
        let p = path(seed, n_steps);
        let u = ie.integrand(&p).unwrap();
        let ito: f64 = u.iter().zip(p.increments()).map(|(a, x)| a * x).sum();
        assert!((ito - ev.evaluate(&p).unwrap()).abs() < 1e-10);
        // the running Itô sum is the conditional expectation at every step
        let mut running = 0.0;
        for (i, (a, x)) in u.iter().zip(p.increments()).enumerate() {
            assert!((running - ev.conditional(&p, i).unwrap()).abs() < 1e-10);
            running += a * x;
        }
    }
}

#[test]
fn factored_integrand_converges() {
    // I_2(h1 ⊗~ h2) = W(h1) W(h2), with integrand h2(t) W(h1 1_{[0,t)})
    let s2 = std::f64::consts::SQRT_2;
    let h1 = GridFunction::indicator(2, 0.0, 0.5, s2).unwrap();
    let h2 = GridFunction::indicator(2, 0.5, 1.0, s2).unwrap();
    let f =
        ChaosVector::from_factored(FactoredKernel::new(1.0, vec![(h1.clone(), 1), (h2.clone(), 1)]).unwrap()).unwrap();
    let p = path(9, 64);
    let u = clark_ocone_on_path(&f, &p).unwrap();
    let w1 = wiener_integral(&h1, &p).unwrap();
    for (i, v) in u.iter().enumerate() {
        let expected = if i < 32 { 0.0 } else { s2 * w1 };
        assert!((v - expected).abs() < 1e-12);
    }
    let ev = ChaosEvaluator::new(&f, 64).unwrap();
    let ito: f64 = u.iter().zip(p.increments()).map(|(a, x)| a * x).sum();
    assert!((ito - ev.evaluate(&p).unwrap()).abs() < 1e-12);
    assert!((ev.conditional(&p, 64).unwrap() - ev.evaluate(&p).unwrap()).abs() < 1e-14);
}
