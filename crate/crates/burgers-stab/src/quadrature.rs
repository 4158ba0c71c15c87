//! Gaussian quadrature on triangles.
//!
//! Rules are conical products built from Gauss-Legendre and
//! Gauss-Jacobi(1,0) line rules through the Duffy map
//! `(u, v) -> (u, v(1-u))`, which collapses the unit square onto the
//! reference triangle `{x, y >= 0, x + y <= 1}`. A rule requested for
//! degree `d` uses `m = ceil((d+1)/2)` points per direction and is exact
//! for all polynomials of total degree `<= 2m - 1 >= d`.
//!
//! Line-rule nodes and weights come from the Golub-Welsch eigenvalue
//! problem on the three-term recurrence coefficients, so no tabulated
//! constants enter; the unit tests check exactness against closed-form
//! monomial integrals.

use std::sync::OnceLock;

/// Quadrature point on the reference triangle: coordinates and weight.
/// Weights sum to the reference area 1/2.
#[derive(Debug, Clone, Copy)]
pub struct QuadPoint {
    pub x: f64,
    pub y: f64,
    pub w: f64,
}

/// Requested polynomial exactness degree of a triangle rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuadDegree(pub usize);

impl QuadDegree {
    /// Default rule: exact for the polynomial integrands of the built-in
    /// steady states (quartic times P1 pairs has degree 5 < 6).
    pub const DEFAULT: QuadDegree = QuadDegree(6);
    /// Elevated rule for trigonometric steady states.
    pub const TRIG: QuadDegree = QuadDegree(8);
}

/// A quadrature rule on the reference triangle.
#[derive(Debug, Clone)]
pub struct TriangleRule {
    pub degree: usize,
    pub points: Vec<QuadPoint>,
}

impl TriangleRule {
    /// Build a rule exact for total degree `<= degree`.
    pub fn with_degree(degree: usize) -> TriangleRule {
        let m = degree / 2 + 1; // smallest m with 2m-1 >= degree
        let gl = gauss_legendre_01(m);
        let gj = gauss_jacobi10_01(m);
        let mut points = Vec::with_capacity(m * m);
        for &(u, wu) in &gj {
            for &(v, wv) in &gl {
                points.push(QuadPoint {
                    x: u,
                    y: v * (1.0 - u),
                    w: wu * wv,
                });
            }
        }
        TriangleRule { degree, points }
    }

    /// Shared rule instance for the two degrees the assembly uses.
    pub fn cached(degree: QuadDegree) -> &'static TriangleRule {
        static DEG6: OnceLock<TriangleRule> = OnceLock::new();
        static DEG8: OnceLock<TriangleRule> = OnceLock::new();
        static DEG2: OnceLock<TriangleRule> = OnceLock::new();
        match degree.0 {
            6 => DEG6.get_or_init(|| TriangleRule::with_degree(6)),
            8 => DEG8.get_or_init(|| TriangleRule::with_degree(8)),
            2 => DEG2.get_or_init(|| TriangleRule::with_degree(2)),
            d => {
                // uncached degrees are rare (verification paths only)
                Box::leak(Box::new(TriangleRule::with_degree(d)))
            }
        }
    }
}

/// Gauss-Legendre rule on [0, 1] with `m` points (weight 1).
pub fn gauss_legendre_01(m: usize) -> Vec<(f64, f64)> {
    // monic Legendre recurrence: a_k = 0, b_k^2 = k^2/(4k^2-1), mu0 = 2
    let diag = vec![0.0; m];
    let mut off = Vec::with_capacity(m.saturating_sub(1));
    for k in 1..m {
        let kf = k as f64;
        off.push((kf * kf / (4.0 * kf * kf - 1.0)).sqrt());
    }
    golub_welsch(&diag, &off, 2.0)
        .into_iter()
        .map(|(x, w)| (0.5 * (x + 1.0), 0.5 * w))
        .collect()
}

/// Gauss rule on [0, 1] for the weight function `(1 - u)` with `m` points,
/// i.e. Gauss-Jacobi with alpha = 1, beta = 0 mapped from [-1, 1].
pub fn gauss_jacobi10_01(m: usize) -> Vec<(f64, f64)> {
    // monic Jacobi(1,0) recurrence coefficients (Gautschi):
    //   a_0 = -1/3, a_k = -1/((2k+1)(2k+3)),
    //   b_k^2 = k(k+1)/(2k+1)^2, mu0 = 2
    let mut diag = Vec::with_capacity(m);
    for k in 0..m {
        let kf = k as f64;
        if k == 0 {
            diag.push(-1.0 / 3.0);
        } else {
            diag.push(-1.0 / ((2.0 * kf + 1.0) * (2.0 * kf + 3.0)));
        }
    }
    let mut off = Vec::with_capacity(m.saturating_sub(1));
    for k in 1..m {
        let kf = k as f64;
        off.push((kf * (kf + 1.0) / ((2.0 * kf + 1.0) * (2.0 * kf + 1.0))).sqrt());
    }
    // map [-1,1] -> [0,1]: u = (1+x)/2, weight (1-x) dx -> 4 (1-u) du / ...
    // total mass 2 maps to integral of (1-u) on [0,1] = 1/2, factor 1/4
    golub_welsch(&diag, &off, 2.0)
        .into_iter()
        .map(|(x, w)| (0.5 * (x + 1.0), 0.25 * w))
        .collect()
}

/// Nodes and weights from the symmetric tridiagonal Jacobi matrix by a
/// cyclic Jacobi eigensolver (matrices here are tiny, m <= ~12).
fn golub_welsch(diag: &[f64], off: &[f64], mu0: f64) -> Vec<(f64, f64)> {
    let n = diag.len();
    if n == 1 {
        return vec![(diag[0], mu0)];
    }
    let mut a = vec![0.0; n * n];
    for i in 0..n {
        a[i * n + i] = diag[i];
    }
    for i in 0..n - 1 {
        a[i * n + i + 1] = off[i];
        a[(i + 1) * n + i] = off[i];
    }
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    // cyclic Jacobi sweeps
    for _sweep in 0..60 {
        let mut offdiag = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                offdiag += a[p * n + q] * a[p * n + q];
            }
        }
        if offdiag.sqrt() < 1e-15 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut out: Vec<(f64, f64)> = (0..n)
        .map(|i| (a[i * n + i], mu0 * v[i] * v[i]))
        .collect();
    out.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn factorial(n: usize) -> f64 {
        (1..=n).map(|i| i as f64).product::<f64>().max(1.0)
    }

    /// Exact integral of x^a y^b over the reference triangle.
    fn monomial_integral(a: usize, b: usize) -> f64 {
        factorial(a) * factorial(b) / factorial(a + b + 2)
    }

    fn check_exactness(rule: &TriangleRule, degree: usize) {
        for a in 0..=degree {
            for b in 0..=(degree - a) {
                let approx: f64 = rule
                    .points
                    .iter()
                    .map(|q| q.w * q.x.powi(a as i32) * q.y.powi(b as i32))
                    .sum();
                let exact = monomial_integral(a, b);
                assert!(
                    (approx - exact).abs() <= 1e-14,
                    "degree-{degree} rule: x^{a} y^{b}: {approx} vs {exact}"
                );
            }
        }
    }

    #[test]
    fn rules_integrate_monomials_exactly() {
        check_exactness(&TriangleRule::with_degree(2), 2);
        check_exactness(&TriangleRule::with_degree(6), 6);
        check_exactness(&TriangleRule::with_degree(8), 8);
        check_exactness(&TriangleRule::with_degree(10), 10);
    }

    #[test]
    fn weights_sum_to_reference_area() {
        for d in [2usize, 6, 8] {
            let rule = TriangleRule::with_degree(d);
            let s: f64 = rule.points.iter().map(|q| q.w).sum();
            assert!((s - 0.5).abs() < 1e-14);
        }
    }

    #[test]
    fn points_lie_inside_reference_triangle() {
        let rule = TriangleRule::with_degree(8);
        for q in &rule.points {
            assert!(q.x > 0.0 && q.y > 0.0 && q.x + q.y < 1.0);
        }
    }

    #[test]
    fn low_degree_rule_is_not_degree_five_exact() {
        // the self-check path relies on a degree-2 rule breaking degree-5
        // integrands
        let rule = TriangleRule::with_degree(2);
        let approx: f64 = rule
            .points
            .iter()
            .map(|q| q.w * q.x.powi(5))
            .sum();
        assert!((approx - monomial_integral(5, 0)).abs() > 1e-6);
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let rule = gauss_legendre_01(4);
        for p in 0..=7 {
            let approx: f64 = rule.iter().map(|&(x, w)| w * x.powi(p)).sum();
            let exact = 1.0 / (p as f64 + 1.0);
            assert!((approx - exact).abs() < 1e-14, "x^{p}");
        }
    }

    #[test]
    fn gauss_jacobi_integrates_against_weight() {
        // integral of x^p (1-x) over [0,1] = 1/(p+1) - 1/(p+2)
        let rule = gauss_jacobi10_01(4);
        for p in 0..=7 {
            let approx: f64 = rule.iter().map(|&(x, w)| w * x.powi(p)).sum();
            let exact = 1.0 / (p as f64 + 1.0) - 1.0 / (p as f64 + 2.0);
            assert!((approx - exact).abs() < 1e-14, "x^{p}");
        }
    }
}
