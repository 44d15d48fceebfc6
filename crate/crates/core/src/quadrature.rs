//! Gauss–Legendre quadrature in f64, used only as an independent oracle in tests.

/// Nodes and weights of the `n`-point rule on [-1, 1].
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

/// Composite 20-point rule over `panels` equal panels of [lo, hi].
pub fn integrate(f: impl Fn(f64) -> f64, lo: f64, hi: f64, panels: usize) -> f64 {
    let rule = gauss_legendre(20);
    let h = (hi - lo) / panels as f64;
    (0..panels)
        .map(|p| {
            let mid = lo + (p as f64 + 0.5) * h;
            rule.iter().map(|(x, w)| w * f(mid + 0.5 * h * x)).sum::<f64>() * 0.5 * h
        })
        .sum()
}

#[test]
fn integrates_polynomials_and_exponentials() {
    assert!((integrate(|x| x.powi(5), 0.0, 2.0, 1) - 64.0 / 6.0).abs() < 1e-12);
    assert!((integrate(|x| (-x).exp(), 0.0, 60.0, 30) - 1.0).abs() < 1e-14);
}
