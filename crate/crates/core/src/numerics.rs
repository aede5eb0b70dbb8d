//! Small numerical kernels shared across the model: quadrature, scalar root
//! finding, the matrix exponential and piecewise-linear interpolation.

use nalgebra::{allocator::Allocator, DefaultAllocator, DimMin, DimName, OMatrix};

/// Adaptive Simpson quadrature of `f` over `[a, b]` to absolute tolerance `tol`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    fn recurse<F: Fn(f64) -> f64>(
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
            return left + right + delta / 15.0;
        }
        recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }

    if a == b {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    recurse(f, a, b, fa, fm, fb, whole, tol, 50)
}

/// Brent's method for a root of `f` in a bracketing interval `[a, b]`.
///
/// Returns `None` when the interval does not bracket a sign change or the
/// iteration budget is exhausted.
pub fn brent_root<F: FnMut(f64) -> f64>(
    mut f: F,
    mut a: f64,
    mut b: f64,
    xtol: f64,
    max_iter: usize,
) -> Option<f64> {
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == 0.0 {
        return Some(a);
    }
    if fb == 0.0 {
        return Some(b);
    }
    if fa.signum() == fb.signum() || !fa.is_finite() || !fb.is_finite() {
        return None;
    }
    if fa.abs() < fb.abs() {
        std::mem::swap(&mut a, &mut b);
        std::mem::swap(&mut fa, &mut fb);
    }
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut bisected = true;
    for _ in 0..max_iter {
        if fb == 0.0 || (b - a).abs() <= xtol {
            return Some(b);
        }
        let mut s = if fa != fc && fb != fc {
            a * fb * fc / ((fa - fb) * (fa - fc))
                + b * fa * fc / ((fb - fa) * (fb - fc))
                + c * fa * fb / ((fc - fa) * (fc - fb))
        } else {
            b - fb * (b - a) / (fb - fa)
        };
        let lo = (3.0 * a + b) / 4.0;
        let outside = if lo < b {
            s < lo || s > b
        } else {
            s > lo || s < b
        };
        let use_bisect = outside
            || (bisected && (s - b).abs() >= 0.5 * (b - c).abs())
            || (!bisected && (s - b).abs() >= 0.5 * (c - d).abs())
            || (bisected && (b - c).abs() < xtol)
            || (!bisected && (c - d).abs() < xtol);
        if use_bisect {
            s = 0.5 * (a + b);
        }
        bisected = use_bisect;
        let fs = f(s);
        if !fs.is_finite() {
            return None;
        }
        d = c;
        c = b;
        fc = fb;
        if fa.signum() != fs.signum() {
            b = s;
            fb = fs;
        } else {
            a = s;
            fa = fs;
        }
        if fa.abs() < fb.abs() {
            std::mem::swap(&mut a, &mut b);
            std::mem::swap(&mut fa, &mut fb);
        }
    }
    None
}

fn inf_norm<D: DimName>(m: &OMatrix<f64, D, D>) -> f64
where
    DefaultAllocator: Allocator<D, D>,
{
    (0..m.nrows())
        .map(|i| m.row(i).iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Matrix exponential by scaling and squaring around a diagonal [6/6] Padé
/// approximant. The scaled argument satisfies `||A / 2^s||_inf <= 1/2`, where
/// the [6/6] truncation error is below double precision.
pub fn expm<D: DimName + DimMin<D, Output = D>>(a: &OMatrix<f64, D, D>) -> OMatrix<f64, D, D>
where
    DefaultAllocator: Allocator<D, D> + Allocator<D>,
{
    const Q: usize = 6;
    let norm = inf_norm(a);
    let squarings = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as i32
    } else {
        0
    };
    let x = a * 0.5f64.powi(squarings);

    let identity = OMatrix::<f64, D, D>::identity();
    let mut numer = identity.clone();
    let mut denom = identity.clone();
    let mut power = identity.clone();
    let mut coeff = 1.0;
    for k in 1..=Q {
        coeff *= (Q - k + 1) as f64 / (k * (2 * Q - k + 1)) as f64;
        power = &power * &x;
        numer += &power * coeff;
        if k % 2 == 0 {
            denom += &power * coeff;
        } else {
            denom -= &power * coeff;
        }
    }
    let mut result = denom
        .lu()
        .solve(&numer)
        .expect("Pade denominator is nonsingular for ||X|| <= 1/2");
    for _ in 0..squarings {
        result = &result * &result;
    }
    result
}

/// Linear interpolation of `(xs, ys)` at `x`; `xs` must be increasing.
/// Values outside the range are held at the end points.
pub fn interp(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    debug_assert_eq!(xs.len(), ys.len());
    if xs.is_empty() {
        return f64::NAN;
    }
    if x <= xs[0] {
        return ys[0];
    }
    let last = xs.len() - 1;
    if x >= xs[last] {
        return ys[last];
    }
    let hi = xs.partition_point(|&v| v <= x);
    let lo = hi - 1;
    let w = (x - xs[lo]) / (xs[hi] - xs[lo]);
    ys[lo] + w * (ys[hi] - ys[lo])
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{Matrix2, Matrix3};

    #[test]
    fn simpson_integrates_exponential() {
        let v = adaptive_simpson(&|x: f64| (-x).exp(), 0.0, 5.0, 1e-12);
        assert!((v - (1.0 - (-5.0f64).exp())).abs() < 1e-11);
    }

    #[test]
    fn brent_finds_cubic_root() {
        let r = brent_root(|x| x * x * x - 2.0, 0.0, 2.0, 1e-14, 200).unwrap();
        assert!((r - 2f64.cbrt()).abs() < 1e-12);
        assert!(brent_root(|x| x * x + 1.0, -1.0, 1.0, 1e-12, 100).is_none());
    }

    #[test]
    fn expm_of_diagonal_and_rotation() {
        let d = Matrix3::from_diagonal(&nalgebra::Vector3::new(-3.0, 0.5, 10.0));
        let e = expm(&d);
        assert!((e[(0, 0)] - (-3.0f64).exp()).abs() < 1e-14);
        assert!((e[(2, 2)] / 10.0f64.exp() - 1.0).abs() < 1e-13);
        let theta = 2.5;
        let rot = Matrix2::new(0.0, -theta, theta, 0.0);
        let e = expm(&rot);
        assert!((e[(0, 0)] - theta.cos()).abs() < 1e-14);
        assert!((e[(1, 0)] - theta.sin()).abs() < 1e-14);
    }

    #[test]
    fn interp_clamps_and_interpolates() {
        let xs = [0.0, 1.0, 3.0];
        let ys = [0.0, 2.0, 6.0];
        assert_eq!(interp(&xs, &ys, -1.0), 0.0);
        assert_eq!(interp(&xs, &ys, 2.0), 4.0);
        assert_eq!(interp(&xs, &ys, 9.0), 6.0);
    }
}
