use chaoslab_web::{clock_histogram, counterexample_path, sign_curve};

#[test]
fn sign_curve_approaches_sign() {
    let c = sign_curve(30, 201, 2.0);
    assert_eq!(c.x.len(), 201);
    assert_eq!(c.norms.len(), 31);
    assert!(c.norms.windows(2).all(|w| w[1] > w[0] && w[1] < 1.0));
    // away from the jump the partial sum is close to +-1
    let at = |x: f64| c.partial[c.x.iter().position(|v| (v - x).abs() < 1e-9).unwrap()];
    assert!((at(1.0) - 1.0).abs() < 0.1 && (at(-1.0) + 1.0).abs() < 0.1);
    assert!(at(0.0).abs() < 1e-12);
}

#[test]
fn path_view_is_consistent() {
    let p = counterexample_path(1, 0, 255).unwrap();
    assert_eq!(p.t.len(), 257);
    assert_eq!(*p.m.last().unwrap(), p.x);
    assert_eq!(*p.bracket.last().unwrap(), p.clock);
    assert!(p.m[..=128].iter().all(|&v| v == 0.0));
}

#[test]
fn histogram_counts_every_path() {
    let h = clock_histogram(3, 500, 256, 20, 4.0).unwrap();
    assert_eq!(h.counts.iter().sum::<usize>(), 500);
    assert_eq!(h.edges.len(), 20);
    assert!(h.frac_above_one > 0.0 && h.frac_above_one < 1.0);
    let json = serde_json::to_string(&h).unwrap();
    assert!(json.contains("\"frac_above_one\""));
}
