use hippa_core::functions::{make_relu_glm, make_rmtr, GlmConfig, RmtrConfig};
use hippa_core::rates::max_local_radius;
use hippa_core::{
    check_rate_bounds, estimate_rate, lookup, project_region, run_baseline, run_hippa, theorem_bounds, Ball,
    BaselineConfig, HippaConfig, Method, RateOptions, RegionDescriptor, RunTrace, SeedStream, Termination,
    TraceRecord, Vector,
};
use proptest::prelude::*;
use rand::Rng;

fn vec2() -> impl Strategy<Value = Vector> {
    (-5.0f64..5.0, -5.0f64..5.0).prop_map(|(a, b)| Vector::from_vec(vec![a, b]))
}

fn region() -> impl Strategy<Value = RegionDescriptor> {
    prop_oneof![
        (vec2(), 0.1f64..3.0).prop_map(|(c, r)| RegionDescriptor::ball(c, r)),
        (vec2(), 0.5f64..3.0, -1.0f64..1.0, -1.0f64..1.0, 1.5f64..3.0).prop_map(|(c, r1, dx, dy, r2)| {
            RegionDescriptor::TwoBalls {
                first: Ball::new(c.clone(), r1),
                second: Ball::new(&c + Vector::from_vec(vec![dx, dy]), r2),
            }
        }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn projection_is_feasible_idempotent_nonexpansive(reg in region(), x in vec2(), y in vec2()) {
        let px = project_region(&x, &reg).unwrap();
        let py = project_region(&y, &reg).unwrap();
        prop_assert!(reg.contains(&px, 1e-9));
        prop_assert!((project_region(&px, &reg).unwrap() - &px).norm() <= 1e-10);
        prop_assert!((&px - &py).norm() <= (&x - &y).norm() + 1e-8);
    }
}

fn synthetic(d: &[f64], gaps: &[f64]) -> RunTrace {
    RunTrace {
        records: d
            .iter()
            .zip(gaps)
            .enumerate()
            .map(|(k, (&d, &g))| TraceRecord {
                k,
                x: Vector::zeros(1),
                value: g,
                value_se: None,
                step_norm: 0.0,
                dist_to_min: Some(d),
                rel_err: None,
                inner_iters: 0,
                inner_converged: true,
                elapsed_s: 0.0,
            })
            .collect(),
        config_digest: String::new(),
        terminated_by: Termination::MaxIters,
        min_value: Some(0.0),
        inner_tol: 0.0,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn planted_rates_recovered(q in 0.05f64..0.95, order in 1.2f64..3.0, e in 0.3f64..3.0, noise in 0.0f64..0.01) {
        let d: Vec<f64> = (0..30).map(|k| q.powi(k) * (1.0 + noise * ((k * 7 % 5) as f64 - 2.0) / 2.0 * q.powi(k))).collect();
        let f = estimate_rate(&synthetic(&d, &d)).unwrap();
        prop_assert!((f.linear_ratio.unwrap() / q - 1.0).abs() < 0.01);

        let mut d = vec![0.5f64];
        while d.len() < 6 && *d.last().unwrap() > 1e-200 {
            let last = *d.last().unwrap();
            d.push(last.powf(order));
        }
        prop_assume!(d.iter().filter(|v| **v > 1e-12).count() >= 5);
        let f = estimate_rate(&synthetic(&d, &d)).unwrap();
        prop_assert!((f.superlinear_order.unwrap() / order - 1.0).abs() < 0.01);

        let g: Vec<f64> = (0..200).map(|k| 3.0 * (k as f64).max(1.0).powf(-e)).collect();
        let f = estimate_rate(&synthetic(&vec![1.0; 200], &g)).unwrap();
        prop_assert!((f.sublinear_exponent.unwrap() / -e - 1.0).abs() < 0.01);
    }
}

#[test]
fn zoo_runs_meet_rate_bounds() {
    for id in ["spiky", "dist_disk", "dist_cross", "star_flower", "abs", "square", "spiky_slice"] {
        let e = lookup(id).unwrap();
        let cert = e.certificate.as_ref().unwrap();
        for p in [1.5, 2.0, 3.0] {
            let mut cfg = HippaConfig::new(p, 1.0);
            cfg.prox.inner_tol = 1e-10;
            cfg.max_iters = 200;
            let t = run_hippa(&e.oracle, &e.default_start, &cfg).unwrap();
            let radius = (p < 2.0 && cert.gamma > 0.0).then(|| max_local_radius(p).unwrap());
            let rep = check_rate_bounds(&t, cert, &cfg, &RateOptions { radius, eps: 1e-6 }).unwrap();
            assert!(rep.passed(), "{id} p={p}: {:?}", rep.theorem_checks);
            if p == 2.0 && cert.gamma > 0.0 {
                let bound = theorem_bounds(cert, &cfg, None).unwrap().ratio.unwrap();
                if let Some(r) = rep.fitted.linear_ratio {
                    assert!(r <= bound * (1.0 + 1e-6), "{id}: {r} > {bound}");
                }
            }
        }
    }
}

#[test]
fn baseline_iterates_feasible() {
    let e = lookup("spiky").unwrap();
    let reg = RegionDescriptor::TwoBalls {
        first: Ball::new(Vector::from_vec(vec![1.0, 0.0]), 1.5),
        second: Ball::new(Vector::from_vec(vec![0.0, 1.0]), 1.5),
    };
    for m in [Method::Pgd, Method::Psg] {
        let cfg = BaselineConfig { region: Some(reg.clone()), max_iters: 200, ..BaselineConfig::new(m) };
        let t = run_baseline(&e.oracle, &Vector::from_vec(vec![4.0, -3.0]), &cfg).unwrap();
        assert!(t.records.iter().all(|r| reg.contains(&r.x, 1e-8)), "{m:?}");
    }
}

#[test]
fn glm_runs_reproduce_bitwise() {
    let gcfg = GlmConfig { n: 5, batch_eval: 2000, batch_full: 500, ..Default::default() };
    let run = || {
        let e = make_relu_glm(&gcfg).unwrap();
        let mut cfg = HippaConfig::new(2.0, 1.0);
        cfg.max_iters = 8;
        cfg.batch = 500;
        cfg.seed = 11;
        let t = run_hippa(&e.oracle, &e.default_start, &cfg).unwrap();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        // Timing is the last column and is not expected to repeat.
        let buf: Vec<String> = String::from_utf8(buf)
            .unwrap()
            .lines()
            .map(|l| l.rsplit_once(',').unwrap().0.to_string())
            .collect();
        let bits: Vec<Vec<u64>> = t.records.iter().map(|r| r.x.iter().map(|v| v.to_bits()).collect()).collect();
        (bits, buf)
    };
    let (a, csv_a) = run();
    let (b, csv_b) = run();
    assert_eq!(a, b);
    assert_eq!(csv_a, csv_b);
}

#[test]
fn rmtr_grows_quadratically_near_solution() {
    let cfg = RmtrConfig { d: 8, m: 3, samples: 40, ..Default::default() };
    let e = make_rmtr(&cfg).unwrap();
    let cert = e.certificate.as_ref().unwrap();
    let (q, k) = (cfg.q, cfg.kappa());
    // c_X^q R^{q−2}, recovered from γ.
    let modulus = cert.gamma * k / (2.0 * (q - k));
    let wstar = e.oracle.minimizer().unwrap().clone();
    let mut rng = SeedStream::new(5).rng();
    for _ in 0..2000 {
        let dir = Vector::from_fn(wstar.len(), |_, _| rng.random::<f64>() - 0.5);
        let r = cfg.radius * rng.random::<f64>();
        let w = &wstar + dir.normalize() * r;
        let lhs = e.oracle.value(&w);
        assert!(lhs >= modulus * r * r * (1.0 - 1e-12), "{lhs} < {}", modulus * r * r);
    }
}
