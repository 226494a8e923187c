use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Above this product `a*b` the Marcum Q-function switches from the Bessel
/// series to direct quadrature of the Rician tail.
pub const MARCUM_SERIES_LIMIT: f64 = 600.0;

// Power series and the large-argument expansion meet here; at 30 the
// smallest asymptotic term is ~e^-60, well under double precision.
const I0_SERIES_CUTOFF: f64 = 30.0;

/// Modified Bessel function of the first kind, order zero.
///
/// Overflows to `+inf` past x ≈ 713; use [`bessel_i0_scaled`] there.
pub fn bessel_i0(x: f64) -> f64 {
    let x = x.abs();
    if x <= I0_SERIES_CUTOFF {
        i0_series(x)
    } else {
        x.exp() * i0_asymptotic_scaled(x)
    }
}

/// Exponentially scaled Bessel function `exp(-|x|) * I0(x)`.
pub fn bessel_i0_scaled(x: f64) -> f64 {
    let x = x.abs();
    if x <= I0_SERIES_CUTOFF {
        i0_series(x) * (-x).exp()
    } else {
        i0_asymptotic_scaled(x)
    }
}

fn i0_series(x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 1.0;
    while term > 1e-17 * sum {
        term *= q / (k * k);
        sum += term;
        k += 1.0;
    }
    sum
}

fn i0_asymptotic_scaled(x: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 1.0;
    loop {
        let next = term * (2.0 * k - 1.0) * (2.0 * k - 1.0) / (8.0 * k * x);
        if next < 1e-17 * sum || next > term {
            break;
        }
        term = next;
        sum += term;
        k += 1.0;
    }
    sum / (2.0 * PI * x).sqrt()
}

/// Scaled Bessel values `exp(-x) I_k(x)` for `k = 0..=n`, `x > 0`.
///
/// Miller's backward recurrence normalised with `I0 + 2 sum I_k = e^x`.
pub fn scaled_bessel_sequence(x: f64, n: usize) -> Vec<f64> {
    debug_assert!(x > 0.0);
    let start = n + 20 + (12.0 * x.sqrt()) as usize;
    let mut v = vec![0.0f64; start + 2];
    v[start] = 1e-280;
    for k in (1..=start).rev() {
        v[k - 1] = (2.0 * k as f64 / x) * v[k] + v[k + 1];
        if v[k - 1] > 1e250 {
            for vj in v[k - 1..].iter_mut() {
                *vj *= 1e-250;
            }
        }
    }
    let norm = v[0] + 2.0 * v[1..=start].iter().sum::<f64>();
    v.truncate(n + 1);
    for vk in v.iter_mut() {
        *vk /= norm;
    }
    v
}

/// Complementary error function with the standard `2/sqrt(pi)` normalisation.
pub fn erfc(x: f64) -> f64 {
    libm::erfc(x)
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// First-order Marcum Q-function,
/// `Q1(a, b) = int_b^inf x exp(-(x^2 + a^2)/2) I0(a x) dx`.
pub fn marcum_q1(a: f64, b: f64) -> Result<f64> {
    if !(a >= 0.0 && b >= 0.0) || !a.is_finite() || b.is_nan() {
        return Err(Error::arg(format!(
            "marcum_q1 needs finite non-negative arguments, got ({a}, {b})"
        )));
    }
    if b == 0.0 {
        return Ok(1.0);
    }
    if b.is_infinite() {
        return Ok(0.0);
    }
    if a == 0.0 {
        return Ok((-0.5 * b * b).exp());
    }
    let q = if a * b > MARCUM_SERIES_LIMIT {
        marcum_quadrature(a, b)
    } else {
        marcum_series(a, b)
    };
    Ok(q.clamp(0.0, 1.0))
}

// Q1(a,b) = e^{-(a-b)^2/2} sum_k (a/b)^k e^{-ab} I_k(ab)            (a < b)
// Q1(a,b) = 1 - e^{-(a-b)^2/2} sum_{k>=1} (b/a)^k e^{-ab} I_k(ab)   (a >= b)
fn marcum_series(a: f64, b: f64) -> f64 {
    let x = a * b;
    let n = 30 + (12.0 * x.sqrt()) as usize;
    let seq = scaled_bessel_sequence(x, n);
    let pre = (-0.5 * (a - b) * (a - b)).exp();
    if a < b {
        let ratio = a / b;
        let mut pow = 1.0;
        let mut sum = 0.0;
        for &ik in &seq {
            sum += pow * ik;
            pow *= ratio;
            if pow < 1e-300 {
                break;
            }
        }
        pre * sum
    } else {
        let ratio = b / a;
        let mut pow = ratio;
        let mut sum = 0.0;
        for &ik in &seq[1..] {
            sum += pow * ik;
            pow *= ratio;
            if pow < 1e-300 {
                break;
            }
        }
        1.0 - pre * sum
    }
}

const GL10_NODES: [f64; 5] = [
    0.148_874_338_981_631_2,
    0.433_395_394_129_247_2,
    0.679_409_568_299_024_4,
    0.865_063_366_688_984_5,
    0.973_906_528_517_171_7,
];
const GL10_WEIGHTS: [f64; 5] = [
    0.295_524_224_714_752_9,
    0.269_266_719_309_996_4,
    0.219_086_362_515_982,
    0.149_451_349_150_580_6,
    0.066_671_344_308_688_1,
];

// Rician density written with the scaled Bessel function so nothing overflows.
fn rician_kernel(a: f64, x: f64) -> f64 {
    let d = x - a;
    x * (-0.5 * d * d).exp() * bessel_i0_scaled(a * x)
}

fn integrate_panels(a: f64, lo: f64, hi: f64) -> f64 {
    if hi <= lo {
        return 0.0;
    }
    let panels = (hi - lo).ceil().max(1.0) as usize;
    let h = (hi - lo) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let mid = lo + (p as f64 + 0.5) * h;
        let half = 0.5 * h;
        let mut s = 0.0;
        for (t, w) in GL10_NODES.iter().zip(GL10_WEIGHTS.iter()) {
            s += w * (rician_kernel(a, mid - half * t) + rician_kernel(a, mid + half * t));
        }
        total += s * half;
    }
    total
}

// The kernel is a unit-width bump around x = a; 40 standard deviations on
// either side carries everything representable.
fn marcum_quadrature(a: f64, b: f64) -> f64 {
    const REACH: f64 = 40.0;
    if a < b {
        integrate_panels(a, b, b.max(a + REACH))
    } else {
        1.0 - integrate_panels(a, (a - REACH).max(0.0), b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn i0_power_series(x: f64, terms: usize) -> f64 {
        let mut s = 1.0;
        let mut t = 1.0;
        for k in 1..terms {
            let k = k as f64;
            t *= 0.25 * x * x / (k * k);
            s += t;
        }
        s
    }

    // erfc via the Maclaurin series of erf (small x) or a Lentz continued
    // fraction (large x).
    fn erfc_oracle(x: f64) -> f64 {
        if x < 0.0 {
            return 2.0 - erfc_oracle(-x);
        }
        if x < 1.0 {
            let mut sum = 0.0;
            let mut term = x;
            let mut n = 0.0;
            while term.abs() > 1e-20 {
                sum += term / (2.0 * n + 1.0);
                n += 1.0;
                term *= -x * x / n;
            }
            1.0 - 2.0 / PI.sqrt() * sum
        } else {
            // erfc x = exp(-x^2)/sqrt(pi) * 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + ...))))
            let mut f = x;
            let tiny = 1e-300;
            let mut c = f;
            let mut d = 0.0;
            for k in 1..5000 {
                let a = k as f64 / 2.0;
                d = x + a * d;
                d = if d.abs() < tiny { tiny } else { d };
                c = x + a / c;
                c = if c.abs() < tiny { tiny } else { c };
                d = 1.0 / d;
                f *= c * d;
            }
            (-x * x).exp() / PI.sqrt() / f
        }
    }

    // Defining integral with I0 replaced by its angular integral; the inner
    // periodic integrand converges spectrally under the trapezoid rule.
    pub(crate) fn marcum_oracle(a: f64, b: f64) -> f64 {
        let inner = |x: f64| -> f64 {
            let n = 400;
            let mut s = 0.0;
            for j in 0..n {
                let th = PI * (j as f64 + 0.5) / n as f64;
                s += (-(x * x + a * a - 2.0 * a * x * th.cos()) / 2.0).exp();
            }
            x * s / n as f64
        };
        adaptive_simpson(&inner, b, a.max(b) + 40.0, 1e-13, 50)
    }

    fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
        fn rec(
            f: &dyn Fn(f64) -> f64,
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
            if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
                return left + right + (left + right - whole) / 15.0;
            }
            rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
                + rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
        }
        // Split into unit panels first so narrow bumps are never skipped.
        let panels = ((b - a).ceil() as usize).max(1);
        let h = (b - a) / panels as f64;
        (0..panels)
            .map(|p| {
                let lo = a + p as f64 * h;
                let hi = lo + h;
                let (fa, fm, fb) = (f(lo), f(0.5 * (lo + hi)), f(hi));
                let whole = h / 6.0 * (fa + 4.0 * fm + fb);
                rec(f, lo, hi, fa, fm, fb, whole, tol / panels as f64, depth)
            })
            .sum()
    }

    #[test]
    fn i0_values() {
        assert_eq!(bessel_i0(0.0), 1.0);
        let want = i0_power_series(1.0, 30);
        assert!((bessel_i0(1.0) - want).abs() / want < 1e-12);
        assert!((want - 1.266_065_877_7).abs() < 1e-9);
        assert_eq!(bessel_i0(-2.5), bessel_i0(2.5));
    }

    #[test]
    fn i0_scaled_matches_asymptotic_oracle_at_50() {
        let x = 50.0;
        let approx = (2.0 * PI * x).powf(-0.5) * (1.0 + 1.0 / (8.0 * x) + 9.0 / (128.0 * x * x));
        let got = bessel_i0_scaled(x);
        assert!((got - approx).abs() / approx < 1e-3);
        // 200-term series in extended form agrees to ~1e-13 here
        let series = i0_power_series(x, 200) * (-x).exp();
        assert!((got - series).abs() / series < 1e-12, "{got} vs {series}");
    }

    #[test]
    fn i0_matches_series_on_log_grid() {
        for i in 0..=40 {
            let x = 10f64.powf(-3.0 + 5.0 * i as f64 / 40.0);
            if x > 120.0 {
                continue;
            }
            let want = i0_power_series(x, 400);
            let got = bessel_i0(x);
            assert!((got - want).abs() / want < 1e-12, "x={x}: {got} vs {want}");
        }
    }

    #[test]
    fn i0_scaled_finite_for_huge_arguments() {
        let v = bessel_i0_scaled(1e6);
        assert!(v.is_finite() && v > 0.0);
        assert!((v * (2.0 * PI * 1e6).sqrt() - 1.0).abs() < 1e-6);
        assert!(bessel_i0(700.0).is_finite());
    }

    #[test]
    fn bessel_sequence_matches_direct_orders() {
        for &x in &[0.3, 2.0, 17.0, 250.0] {
            let seq = scaled_bessel_sequence(x, 40);
            assert!(
                (seq[0] - bessel_i0_scaled(x)).abs() / seq[0] < 1e-12,
                "x={x}"
            );
            // I_1 via its own power series for moderate x
            if x < 20.0 {
                let mut s = 0.0;
                let mut t = 0.5 * x;
                let mut k = 0.0f64;
                while t > 1e-30 {
                    s += t;
                    k += 1.0;
                    t *= 0.25 * x * x / (k * (k + 1.0));
                }
                let want = s * (-x).exp();
                assert!((seq[1] - want).abs() / want < 1e-12);
            }
        }
    }

    #[test]
    fn erfc_values_and_limits() {
        assert_eq!(erfc(0.0), 1.0);
        assert_eq!(erfc(f64::INFINITY), 0.0);
        assert_eq!(erfc(f64::NEG_INFINITY), 2.0);
        assert!((erfc(1.0) - 0.157_299_207_050_285_1).abs() < 1e-15);
        for i in 0..=60 {
            let x = -6.0 + 0.25 * i as f64;
            let want = erfc_oracle(x);
            let got = erfc(x);
            assert!((got - want).abs() <= 1e-12 * want, "x={x}: {got} vs {want}");
        }
    }

    #[test]
    fn marcum_edge_values() {
        for &a in &[0.0, 0.5, 3.0, 40.0] {
            assert_eq!(marcum_q1(a, 0.0).unwrap(), 1.0);
        }
        assert!((marcum_q1(0.0, 1.0).unwrap() - (-0.5f64).exp()).abs() < 1e-15);
        assert!(marcum_q1(-1.0, 1.0).is_err());
        assert!(marcum_q1(1.0, -0.1).is_err());
        assert_eq!(marcum_q1(2.0, f64::INFINITY).unwrap(), 0.0);
    }

    #[test]
    fn marcum_one_two_against_quadrature() {
        let want = marcum_oracle(1.0, 2.0);
        let got = marcum_q1(1.0, 2.0).unwrap();
        assert!((got - want).abs() < 1e-10, "{got} vs {want}");
        // scipy.stats.ncx2.sf(4, 2, 1) = 0.26901206...
        assert!((got - 0.269_012_06).abs() < 1e-8);
    }

    #[test]
    fn marcum_diagonal_identity() {
        // Q1(a,a) = (1 + e^{-a^2} I0(a^2)) / 2
        for &a in &[0.3, 1.0, 5.0, 20.0, 24.0, 25.0, 80.0, 300.0] {
            let want = 0.5 * (1.0 + bessel_i0_scaled(a * a));
            let got = marcum_q1(a, a).unwrap();
            assert!((got - want).abs() < 1e-10, "a={a}: {got} vs {want}");
        }
    }

    #[test]
    fn marcum_grid_against_defining_integral() {
        let pts = [0.05, 0.7, 1.9, 4.0, 8.5, 15.0, 24.0, 26.0, 35.0];
        for &a in &pts {
            for &b in &pts {
                let want = marcum_oracle(a, b);
                let got = marcum_q1(a, b).unwrap();
                assert!((got - want).abs() < 1e-10, "({a},{b}): {got} vs {want}");
            }
        }
    }

    #[test]
    fn series_and_quadrature_agree_at_the_switch() {
        for &(a, b) in &[(24.0, 24.9), (25.0, 24.0), (20.0, 29.0), (30.0, 19.9)] {
            let s = marcum_series(a, b);
            let q = marcum_quadrature(a, b);
            assert!((s - q).abs() < 1e-11, "({a},{b}): {s} vs {q}");
        }
    }
}
