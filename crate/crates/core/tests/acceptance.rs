//! Acceptance suite: one line per criterion, nonzero exit if any fails.
//!
//! Monte Carlo criteria run the experiments at the reference configuration
//! (seed 42, N = 4096, m = 64, alpha = 0.01).

use std::process::ExitCode;

use chaoslab::chaos_algebra::{covariance, expectation, gamma_G, multiply};
use chaoslab::experiments::{run_all, ExperimentConfig, ExperimentReport};
use chaoslab::grid_kernels::{inner, symmetrize, zero_diagonal, GridFunction, GridKernel, RankOnePower};
use chaoslab::path_sim::{evaluate_chaos, multiple_integral, sample_path, wiener_integral};
use chaoslab::stat_tests::mean_se;
use chaoslab::{ChaosVector, Result, RngStream};
use rayon::prelude::*;

const SEED: u64 = 42;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn random_unit(rng: &mut RngStream, m: usize) -> Result<GridFunction> {
    let h = GridFunction::new((0..m).map(|_| rng.next_normal()).collect())?;
    Ok(h.scaled(1.0 / h.norm()))
}

fn random_symmetric(rng: &mut RngStream, order: usize, m: usize) -> Result<GridKernel> {
    symmetrize(&GridKernel::from_fn(order, m, |_| rng.next_normal())?)
}

fn exact_algebra() -> Result<Outcome> {
    let h1 = GridFunction::indicator(64, 0.0, 0.5, std::f64::consts::SQRT_2)?;
    let x = ChaosVector::first_order(&h1);
    let sq = multiply(&x, &x)?;
    let expected = GridKernel::tensor(&[&h1, &h1])?;
    let k = sq.kernel(2).map(|k| k.to_dense(2, 64, &Default::default())).transpose()?;
    let entry = match &k {
        Some(k) => k.values().iter().zip(expected.values()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max),
        None => f64::INFINITY,
    };
    let extra = sq.orders().any(|(n, _)| n != 0 && n != 2);
    let mean = (sq.mean() - 1.0).abs();
    Ok(outcome(
        entry <= 1e-12 && mean <= 1e-12 && !extra,
        format!("max kernel error {entry:.1e}, mean error {mean:.1e}"),
    ))
}

fn exact_duality() -> Result<Outcome> {
    let mut worst = 0.0f64;
    for s in 0..100u64 {
        let mut rng = RngStream::new(SEED, 1000 + s);
        let m = 4;
        let mut f = ChaosVector::constant(m, rng.next_normal())?;
        let top = 1 + (s % 3) as usize;
        for n in 1..=top {
            f.add_dense(random_symmetric(&mut rng, n, m)?)?;
        }
        worst = worst.max((expectation(&gamma_G(&f)?) - covariance(&f, &f)?).abs());
    }
    let mut gauss = 0.0f64;
    for s in 0..20u64 {
        let h = random_unit(&mut RngStream::new(SEED, 2000 + s), 64)?;
        let g = gamma_G(&ChaosVector::first_order(&h))?;
        let rest: f64 = g.orders().filter(|(n, _)| *n > 0).map(|(_, k)| k.norm_sq()).sum();
        gauss = gauss.max((g.mean() - 1.0).abs() + rest.sqrt());
    }
    Ok(outcome(
        worst <= 1e-12 && gauss <= 1e-12,
        format!("|E G - Var| max {worst:.1e} over 100 vectors, |G(I1(h)) - 1| max {gauss:.1e}"),
    ))
}

fn hermite(x: f64, n: usize) -> f64 {
    let (mut a, mut b) = (1.0, x);
    if n == 0 {
        return 1.0;
    }
    for k in 1..n {
        (a, b) = (b, x * b - k as f64 * a);
    }
    b
}

fn hermite_products() -> Result<Outcome> {
    let m = 64;
    let h = random_unit(&mut RngStream::new(SEED, 3000), m)?;
    let power = |p: usize| ChaosVector::from_rank_one(RankOnePower::new(h.clone(), p, 1.0));
    let powers = (0..=6).map(power).collect::<Result<Vec<_>>>()?;
    let mut products = Vec::new();
    for p in 1..=5 {
        for q in 1..=6 - p {
            products.push((p, q, multiply(&powers[p], &powers[q])?));
        }
    }
    let errs = (0..1000u64)
        .into_par_iter()
        .map(|i| {
            let path = sample_path(&mut RngStream::new(SEED, 4000 + i), m)?;
            let w = wiener_integral(&h, &path)?;
            let mut worst = 0.0f64;
            for (n, f) in powers.iter().enumerate() {
                worst = worst.max((evaluate_chaos(f, &path)? - hermite(w, n)).abs());
            }
            for (p, q, f) in &products {
                worst = worst.max((evaluate_chaos(f, &path)? - hermite(w, *p) * hermite(w, *q)).abs());
            }
            Ok(worst)
        })
        .collect::<Result<Vec<f64>>>()?;
    let worst = errs.into_iter().fold(0.0, f64::max);
    Ok(outcome(worst <= 1e-10, format!("max pathwise error {worst:.1e} over 1000 paths, orders <= 6")))
}

fn mc_isometry() -> Result<Outcome> {
    let m = 64;
    let paths = 200_000u64;
    let mut kernels = Vec::new();
    for j in 0..20u64 {
        let mut rng = RngStream::new(SEED, 5000 + j);
        let (n, o) = [(1, 1), (1, 2), (2, 1), (2, 2)][(j % 4) as usize];
        let mut draw = |order| -> Result<GridKernel> { Ok(zero_diagonal(&random_symmetric(&mut rng, order, m)?)) };
        let f = draw(n)?;
        let g = if n == o { f.scaled(0.8).add(&draw(o)?.scaled(0.6))? } else { draw(o)? };
        let f = f.scaled(1.0 / f.norm());
        let g = g.scaled(1.0 / g.norm());
        let target = if n == o { (1..=n).product::<usize>() as f64 * inner(&f, &g)? } else { 0.0 };
        kernels.push((f, g, target));
    }
    let products = (0..paths)
        .into_par_iter()
        .map(|i| {
            let path = sample_path(&mut RngStream::new(SEED, 1 << 32 | i), m)?;
            kernels
                .iter()
                .map(|(f, g, _)| Ok(multiple_integral(f, &path)? * multiple_integral(g, &path)?))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let mut worst = 0.0f64;
    for (j, (_, _, target)) in kernels.iter().enumerate() {
        let e = mean_se(&products.iter().map(|r| r[j]).collect::<Vec<_>>())?;
        worst = worst.max(e.z(*target).abs());
    }
    Ok(outcome(worst <= 4.0, format!("max |z| {worst:.2} over 20 kernel pairs, P = 2e5")))
}

fn report<'a>(reports: &'a [ExperimentReport], name: &str) -> &'a ExperimentReport {
    reports.iter().find(|r| r.name == name).expect("experiment ran")
}

/// All named verdicts pass; the detail lists each statistic against its threshold.
fn verdicts(r: &ExperimentReport, names: &[&str]) -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for n in names {
        match r.tests.get(*n) {
            Some(t) => {
                pass &= t.pass;
                parts.push(format!("{n} {:.4} {:?} {:.4}", t.statistic, t.rule, t.threshold));
            }
            None => {
                pass = false;
                parts.push(format!("{n} missing"));
            }
        }
    }
    outcome(pass, parts.join("; "))
}

fn estimate(r: &ExperimentReport, key: &str) -> f64 {
    r.estimates.get(key).map_or(f64::NAN, |e| e.value)
}

fn run_suite(threads: usize) -> Result<Vec<ExperimentReport>> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().expect("thread pool");
    pool.install(|| run_all(&ExperimentConfig { seed: SEED, ..Default::default() }))
}

fn main() -> ExitCode {
    let mut all = true;
    let mut line = |id: usize, name: &str, o: Result<Outcome>| {
        let o = o.unwrap_or_else(|e| outcome(false, format!("error: {e}")));
        all &= o.pass;
        println!("{} {id:>2} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
    };
    line(1, "exact algebra", exact_algebra());
    line(2, "exact duality", exact_duality());
    line(3, "pathwise Hermite products", hermite_products());
    line(4, "Monte Carlo isometry", mc_isometry());

    let threads = std::thread::available_parallelism().map_or(1, |n| n.get());
    let first = run_suite(threads);
    let reports = match &first {
        Ok(r) => r.clone(),
        Err(e) => {
            for id in 5..=12 {
                line(id, "experiments", Err(e.clone()));
            }
            return ExitCode::FAILURE;
        }
    };
    let r = |n| report(&reports, n);

    line(5, "sign-dds", Ok(verdicts(r("sign-dds"), &["bracket_exact", "ks_y_normal", "e_y4_is_3"])));

    let bessel = r("bessel");
    let dev = estimate(bessel, "bracket_max_deviation");
    let mut o = verdicts(bessel, &["ks_x_normal"]);
    o.pass &= dev <= 2f64.powi(-10) && bessel.config.dim == 3;
    o.detail = format!("max |bracket(1) - 1| {dev:.2e} <= 2^-10; {}", o.detail);
    line(6, "bessel (d = 3)", Ok(o));

    line(
        7,
        "counterexample",
        Ok(verdicts(
            r("counterexample"),
            &["ks_x_normal", "mean_t_is_1", "p_t_gt_1_excludes_0", "var_t_positive", "nested_oracle_m075"],
        )),
    );

    let sc = r("sign-chaos");
    let mut o = verdicts(sc, &["s_strictly_increasing", "s0_is_2_over_pi", "l2_error_matches_tail"]);
    o.pass &= sc.config.trunc.unwrap_or(5) == 5 && sc.samples["sq_error"].len() == 100_000;
    line(8, "sign chaos", Ok(o));

    let kl = r("kl-reconstruct");
    let mut o = verdicts(kl, &["recoveries_agree", "recovery_correlation"]);
    o.pass &= kl.config.kl_terms == 1000 && kl.samples["x1"].len() == 1000;
    line(9, "KL reconstruction", Ok(o));

    let fm = r("fourth-moment");
    let analytic = estimate(fm, "i2_rank_one_fourth_analytic");
    let mut names = Vec::new();
    for case in ["i2_rank_one", "i3_rank_one", "i2_dense", "i1_i2_dense", "i2_i3_dense", "i1_i2_i3_dense"] {
        names.push(format!("{case}_excess_positive"));
        names.push(format!("{case}_ks_rejects_normal"));
    }
    let names: Vec<&str> = names.iter().map(String::as_str).collect();
    let mut o = verdicts(fm, &names);
    let n_paths = fm.samples["i2_rank_one"].len();
    o.pass &= (analytic - 60.0).abs() <= 1e-9 && n_paths == 100_000;
    o.detail = format!("E I2(e1^2)^4 = {analytic}; {} vectors with positive excess and KS rejection", names.len() / 2);
    line(10, "fourth-moment battery", Ok(o));

    let ito = r("ito-identities");
    let mut o = verdicts(ito, &["exit_fourth_moment", "exit_t_times_square", "exit_time_bounded"]);
    o.pass &= ito.samples["exit_t"].len() == 100_000;
    line(11, "Ito identities", Ok(o));

    let alt = if threads == 1 { 3 } else { 1 };
    let det = run_suite(alt).map(|second| {
        let same = reports.len() == second.len()
            && reports.iter().zip(&second).all(|(a, b)| a.body_json() == b.body_json() && a.samples == b.samples);
        outcome(same, format!("report bodies with {threads} and {alt} worker threads identical: {same}"))
    });
    line(12, "determinism", det);

    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
