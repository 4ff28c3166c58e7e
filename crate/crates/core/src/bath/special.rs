//! Special functions for the ring form factor.
//!
//! Two independent families of Bessel evaluations live here on purpose: the
//! exact spectral density uses Miller's backward recurrence, while the
//! angular-integral oracle uses power series and Hankel asymptotics.

use std::f64::consts::PI;

/// Neumaier-compensated running sum.
#[derive(Debug, Default, Clone, Copy)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Direct alternating series for `₁F₂(3/2; 5/2, 3; −x²)` using the term-ratio
/// recurrence. Accurate to ~1e-14 for `x ≤ 4`; cancellation grows like
/// `e^{2x}` beyond that.
pub fn ring_form_factor_series(x: f64) -> f64 {
    let z = -x * x;
    let mut term = 1.0;
    let mut acc = CompensatedSum::default();
    acc.add(term);
    let mut n = 0.0_f64;
    loop {
        term *= (1.5 + n) / ((2.5 + n) * (3.0 + n) * (n + 1.0)) * z;
        n += 1.0;
        acc.add(term);
        if n > x && term.abs() < 1e-18 * acc.value().abs() {
            break;
        }
        if n > 10_000.0 {
            break;
        }
    }
    acc.value()
}

/// `₁F₂(3/2; 5/2, 3; −x²)` through the Neumann series
/// `₁F₂ = (6/x³) Σ_{k≥0} J_{2k+3}(2x)`, which follows from
/// `₁F₂(a; a+1, b; −x²) = 2a x^{−2a} ∫₀ˣ t^{2a−1} ₀F₁(; b; −t²) dt` and
/// `∫₀^z J_2 = 2 Σ_k J_{2k+3}(z)`. All terms are bounded so there is no
/// cancellation at large `x`.
pub fn ring_form_factor_bessel_sum(x: f64) -> f64 {
    if x == 0.0 {
        return 1.0;
    }
    let z = 2.0 * x;
    let js = bessel_j_sequence(z, (z.ceil() + 40.0 + 12.0 * z.cbrt()) as usize);
    let mut acc = CompensatedSum::default();
    let mut k = 3;
    while k < js.len() {
        acc.add(js[k]);
        k += 2;
    }
    6.0 * acc.value() / (x * x * x)
}

/// `J_0(z) … J_nmax(z)` for `z ≥ 0` by Miller's backward recurrence,
/// normalized with `J_0 + 2 Σ_k J_{2k} = 1`.
pub fn bessel_j_sequence(z: f64, nmax: usize) -> Vec<f64> {
    let mut out = vec![0.0; nmax + 1];
    if z == 0.0 {
        out[0] = 1.0;
        return out;
    }
    let top = nmax.max(z.ceil() as usize);
    let mut start = top + 20 + (40.0 * top as f64).sqrt() as usize;
    start += start % 2;
    let mut j_next = 0.0; // J_{k+1}
    let mut j_cur = 1e-300; // J_k
    let mut norm = CompensatedSum::default();
    for k in (1..=start).rev() {
        let j_prev = (2.0 * k as f64 / z) * j_cur - j_next;
        j_next = j_cur;
        j_cur = j_prev;
        // j_cur now holds J_{k-1}
        let idx = k - 1;
        if idx <= nmax {
            out[idx] = j_cur;
        }
        if idx % 2 == 0 && idx > 0 {
            norm.add(2.0 * j_cur);
        }
        if j_cur.abs() > 1e250 {
            let s = 1e-250;
            j_cur *= s;
            j_next *= s;
            out.iter_mut().for_each(|v| *v *= s);
            let rescaled = norm.value() * s;
            norm = CompensatedSum::default();
            norm.add(rescaled);
        }
    }
    norm.add(j_cur); // J_0
    let scale = norm.value();
    out.iter_mut().for_each(|v| *v /= scale);
    out
}

/// `J_0` by power series / Hankel asymptotics.
pub fn bessel_j0(z: f64) -> f64 {
    bessel_j_small_order(0, z)
}

/// `J_1` by power series / Hankel asymptotics.
pub fn bessel_j1(z: f64) -> f64 {
    bessel_j_small_order(1, z)
}

const ASYMPTOTIC_THRESHOLD: f64 = 14.0;

fn bessel_j_small_order(nu: u32, z: f64) -> f64 {
    let (sign, z) = if z < 0.0 {
        (if nu % 2 == 1 { -1.0 } else { 1.0 }, -z)
    } else {
        (1.0, z)
    };
    let v = if z < ASYMPTOTIC_THRESHOLD {
        bessel_series(nu, z)
    } else {
        bessel_hankel(nu, z)
    };
    sign * v
}

fn bessel_series(nu: u32, z: f64) -> f64 {
    let half = 0.5 * z;
    let q = -half * half;
    let mut term = if nu == 0 { 1.0 } else { half };
    let mut acc = CompensatedSum::default();
    acc.add(term);
    let mut k = 1.0;
    while k < 200.0 {
        term *= q / (k * (k + f64::from(nu)));
        acc.add(term);
        if term.abs() < 1e-17 * acc.value().abs().max(1e-300) && k > half {
            break;
        }
        k += 1.0;
    }
    acc.value()
}

fn bessel_hankel(nu: u32, z: f64) -> f64 {
    let mu = 4.0 * f64::from(nu * nu);
    let mut p = 0.0;
    let mut q = 0.0;
    let mut term = 1.0_f64; // a_k(ν)/z^k
    let mut k = 0usize;
    let mut last = f64::INFINITY;
    loop {
        if term.abs() > last {
            break;
        }
        let signed = match k % 4 {
            0 | 1 => term,
            _ => -term,
        };
        if k % 2 == 0 {
            p += signed;
        } else {
            q += signed;
        }
        last = term.abs();
        if last < 1e-17 {
            break;
        }
        let odd = (2 * k + 1) as f64;
        term *= (mu - odd * odd) / ((k as f64 + 1.0) * 8.0 * z);
        k += 1;
        if k > 60 {
            break;
        }
    }
    let chi = z - (0.5 * f64::from(nu) + 0.25) * PI;
    (2.0 / (PI * z)).sqrt() * (p * chi.cos() - q * chi.sin())
}

#[cfg(test)]
mod tests {
    use super::*;

    // Reference values from arbitrary-precision evaluation (40 digits).
    const FORM_FACTOR: [(f64, f64); 7] = [
        (0.001, 0.999_999_800_000_017_9),
        (0.5, 0.951_101_726_397_437),
        (2.0, 0.433_807_805_815_389_3),
        (5.0, 0.023_521_579_478_856_336),
        (10.0, 0.002_774_137_719_208_283),
        (30.0, 1.061_013_299_171_056_5e-4),
        (100.0, 3.163_149_230_710_027e-6),
    ];

    #[test]
    fn form_factor_routes_match_reference() {
        for &(x, want) in &FORM_FACTOR {
            let b = ring_form_factor_bessel_sum(x);
            assert!(((b - want) / want).abs() < 1e-12, "bessel sum x={x}: {b} vs {want}");
            if x <= 4.0 {
                let s = ring_form_factor_series(x);
                assert!(((s - want) / want).abs() < 1e-13, "series x={x}: {s} vs {want}");
            }
        }
    }

    #[test]
    fn bessel_families_agree() {
        for i in 0..400 {
            let z = 0.05 + i as f64 * 0.1;
            let seq = bessel_j_sequence(z, 2);
            assert!((seq[0] - bessel_j0(z)).abs() < 5e-12, "J0({z})");
            assert!((seq[1] - bessel_j1(z)).abs() < 5e-12, "J1({z})");
        }
    }

    #[test]
    fn bessel_known_values() {
        assert!((bessel_j0(1.0) - 0.765_197_686_557_966_6).abs() < 1e-15);
        assert!((bessel_j1(1.0) - 0.440_050_585_744_933_5).abs() < 1e-15);
        assert!((bessel_j0(20.0) - 0.167_024_664_340_583_1).abs() < 1e-13);
        assert!((bessel_j1(20.0) - 0.066_833_124_175_850_04).abs() < 1e-13);
        assert_eq!(bessel_j1(0.0), 0.0);
        assert_eq!(bessel_j0(0.0), 1.0);
    }

    #[test]
    fn compensated_sum_recovers_cancellation() {
        let mut s = CompensatedSum::default();
        for x in [1e16, 1.0, -1e16] {
            s.add(x);
        }
        assert_eq!(s.value(), 1.0);
    }
}
