//! Quadrature kernels shared by the analytic modules: adaptive Simpson for
//! one-off integrals and a composite Gauss-Legendre rule for the smooth
//! integrands evaluated inside fixed-point loops.

/// Adaptive Simpson integration of `f` on `[a, b]` to absolute tolerance `tol`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_rec(&f, a, b, fa, fm, fb, whole, tol, 60)
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        left + right + delta / 15.0
    } else {
        simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
}

/// 32-point Gauss-Legendre nodes/weights on [-1, 1], computed once by Newton
/// iteration on the Legendre polynomial.
fn gl32() -> &'static ([f64; 32], [f64; 32]) {
    use std::sync::OnceLock;
    static CELL: OnceLock<([f64; 32], [f64; 32])> = OnceLock::new();
    CELL.get_or_init(|| {
        const N: usize = 32;
        let mut nodes = [0.0; N];
        let mut weights = [0.0; N];
        for i in 0..N {
            // Tricomi initial guess for the i-th root.
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (N as f64 + 0.5)).cos();
            for _ in 0..100 {
                // Legendre recurrence for P_N(x) and P_{N-1}(x).
                let (mut p0, mut p1) = (1.0_f64, x);
                for k in 2..=N {
                    let kf = k as f64;
                    let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                    p0 = p1;
                    p1 = p2;
                }
                let deriv = (N as f64) * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / deriv;
                x -= dx;
                if dx.abs() < 1e-15 {
                    break;
                }
            }
            let (mut p0, mut p1) = (1.0_f64, x);
            for k in 2..=N {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let deriv = (N as f64) * (x * p1 - p0) / (x * x - 1.0);
            nodes[N - 1 - i] = x;
            weights[N - 1 - i] = 2.0 / ((1.0 - x * x) * deriv * deriv);
        }
        (nodes, weights)
    })
}

/// Composite 32-point Gauss-Legendre quadrature with panels of width at most
/// `panel`. Exact to machine precision for the smooth analytic integrands this
/// crate feeds it.
pub fn gauss_legendre<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panel: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let (nodes, weights) = gl32();
    let span = b - a;
    let n_panels = (span.abs() / panel).ceil().max(1.0) as usize;
    let h = span / n_panels as f64;
    let mut total = 0.0;
    for i in 0..n_panels {
        let lo = a + h * i as f64;
        let hi = lo + h;
        let c = 0.5 * (lo + hi);
        let r = 0.5 * (hi - lo);
        let mut acc = 0.0;
        for j in 0..32 {
            acc += weights[j] * f(c + r * nodes[j]);
        }
        total += acc * r;
    }
    total
}
