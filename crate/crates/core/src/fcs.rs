//! Full counting statistics of the up-outcome count.
//!
//! The generating function `Z(chi, n) = sum_k P(k, n) e^{i chi k}` evolves
//! under the tilted propagator `A_+ e^{i chi} + A_-`. Its first component is
//! a degree-`N` polynomial in `z = e^{i chi}`, so `N + 1` equispaced samples
//! on the unit circle invert it exactly. For small `theta` and `omega` the
//! tilted propagator reduces to `K(z)`, whose spectrum is known in closed
//! form and yields the binomial and two-binomial limiting distributions.

use std::io::Write;

use num_complex::Complex64;
use rustfft::FftPlanner;
use statrs::function::factorial::ln_binomial;

use crate::error::{Error, Result};
use crate::qubit::{ModelParams, Outcome};

pub type CMatrix3 = [[Complex64; 3]; 3];

/// Largest imaginary residue accepted when inverting a generating function.
pub const IMAG_RESIDUE_TOLERANCE: f64 = 1e-10;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn mat_vec(m: &CMatrix3, v: &[Complex64; 3]) -> [Complex64; 3] {
    [0, 1, 2].map(|i| m[i][0] * v[0] + m[i][1] * v[1] + m[i][2] * v[2])
}

/// Exact tilted propagator `A_+ e^{i chi} + A_-`.
pub fn tilted_propagator(params: &ModelParams, chi: f64) -> Result<CMatrix3> {
    let prop = params.propagator()?;
    let up = prop.matrix(Outcome::Up).entries;
    let down = prop.matrix(Outcome::Down).entries;
    let z = Complex64::from_polar(1.0, chi);
    let mut m = [[Complex64::default(); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            m[i][j] = z * up[i][j] + down[i][j];
        }
    }
    Ok(m)
}

/// `(A_+ e^{i chi} + A_-)^N p0`; the first component is `Z0(chi, N)`.
pub fn exact_generating_function(params: &ModelParams, chi: f64) -> Result<[Complex64; 3]> {
    params.validate()?;
    let m = tilted_propagator(params, chi)?;
    let p = params.initial;
    let mut v = [c(p.rho0), c(p.rhoz), c(p.rhox)];
    for _ in 0..params.n_meas {
        v = mat_vec(&m, &v);
    }
    Ok(v)
}

/// Angles `chi_j = 2 pi j / m` for `j = 0..m`.
pub fn unit_circle_angles(m: usize) -> impl Iterator<Item = f64> {
    (0..m).map(move |j| std::f64::consts::TAU * j as f64 / m as f64)
}

/// `Z0` at the `N + 1` equispaced angles needed for exact inversion.
pub fn exact_generating_samples(params: &ModelParams) -> Result<Vec<Complex64>> {
    unit_circle_angles(params.n_meas + 1)
        .map(|chi| exact_generating_function(params, chi).map(|v| v[0]))
        .collect()
}

/// Discrete Fourier inversion of `Z0` sampled at `m >= N + 1` equispaced
/// points of the unit circle. Returns `P(k)` for `k = 0..=N`.
pub fn invert_generating_function(samples: &[Complex64], n: usize) -> Result<Vec<f64>> {
    let m = samples.len();
    if m < n + 1 {
        return Err(Error::InsufficientSamples { got: m, need: n + 1 });
    }
    let mut buf = samples.to_vec();
    FftPlanner::new().plan_fft_forward(m).process(&mut buf);
    let scale = 1.0 / m as f64;
    let mut out = Vec::with_capacity(n + 1);
    for (k, v) in buf.iter().take(n + 1).enumerate() {
        let v = v * scale;
        if v.im.abs() > IMAG_RESIDUE_TOLERANCE {
            return Err(Error::NumericFailure(format!(
                "imaginary residue {:e} at count {k}",
                v.im
            )));
        }
        out.push(v.re);
    }
    Ok(out)
}

/// Small-angle tilted generator `K(z)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TiltedGenerator {
    pub z: Complex64,
    pub matrix: CMatrix3,
}

pub fn k_matrix(z: Complex64, theta: f64, omega: f64) -> TiltedGenerator {
    let s = z + 1.0;
    let d = z - 1.0;
    let h = 0.5;
    TiltedGenerator {
        z,
        matrix: [
            [s * h, d * theta * h, c(0.0)],
            [d * theta * h, s * h, -s * omega * h],
            [c(0.0), s * omega * h, s * h],
        ],
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumPoint {
    pub z: Complex64,
    /// `(E1, E2, E3)`; `E1` takes the `+` sign of the principal root.
    pub eigenvalues: [Complex64; 3],
    pub epsilon: Complex64,
}

/// `epsilon(z) = sqrt((z-1)^2 theta^2 - (z+1)^2 omega^2)`, principal branch.
pub fn epsilon(z: Complex64, theta: f64, omega: f64) -> Complex64 {
    let d = (z - 1.0) * theta;
    let s = (z + 1.0) * omega;
    (d * d - s * s).sqrt()
}

pub fn k_eigenvalues(z: Complex64, theta: f64, omega: f64) -> SpectrumPoint {
    let eps = epsilon(z, theta, omega);
    let s = z + 1.0;
    SpectrumPoint {
        z,
        eigenvalues: [(s + eps) * 0.5, (s - eps) * 0.5, s * 0.5],
        epsilon: eps,
    }
}

/// `Z0(z, N) = f_z E3^N + (1 - f_z)(E1^N + E2^N)/2` for `p0 = (1, 0, 1)`.
pub fn closed_form_z0(z: Complex64, theta: f64, omega: f64, n: usize) -> Result<Complex64> {
    let s = (z + 1.0) * omega;
    let denom = (z - 1.0) * theta + s;
    if denom.norm() < 1e-14 {
        return Err(Error::Pole { re: z.re, im: z.im });
    }
    let f = s / denom;
    let spec = k_eigenvalues(z, theta, omega);
    let [e1, e2, e3] = spec.eigenvalues;
    let n = n as i32;
    Ok(f * e3.powi(n) + (1.0 - f) * 0.5 * (e1.powi(n) + e2.powi(n)))
}

/// Distribution implied by the closed-form `Z0`, inverted on `N + 1` points.
pub fn closed_form_distribution(theta: f64, omega: f64, n: usize) -> Result<Vec<f64>> {
    let samples = unit_circle_angles(n + 1)
        .map(|chi| closed_form_z0(Complex64::from_polar(1.0, chi), theta, omega, n))
        .collect::<Result<Vec<_>>>()?;
    invert_generating_function(&samples, n)
}

/// Limit `theta << omega`: `P(k) = 2^{-N} C(N, k)`.
pub fn binomial_limit(n: usize) -> Vec<f64> {
    // The prefactor must be 2^{-N}; a k-dependent 2^{-k} would not normalize.
    let n64 = n as u64;
    let ln2 = std::f64::consts::LN_2;
    (0..=n64)
        .map(|k| (ln_binomial(n64, k) - n as f64 * ln2).exp())
        .collect()
}

/// `(q1, q2)` of the linearized `epsilon(z) = q2 + q1 z` near `z = 0`.
pub fn two_binomial_coefficients(theta: f64, omega: f64) -> Result<(f64, f64)> {
    if theta <= omega {
        return Err(Error::Domain(format!(
            "two-binomial limit needs theta > omega, got theta = {theta}, omega = {omega}"
        )));
    }
    let q2 = (theta * theta - omega * omega).sqrt();
    let q1 = (theta * theta + omega * omega) / q2;
    Ok((q1, q2))
}

/// Limit `theta >> omega`: mixture of two binomials, renormalized to unit
/// sum. The common prefactor is taken as `2^{-(N+1)}`, independent of `k`,
/// which is the normalization consistent with the two peak positions.
pub fn two_binomial_limit(theta: f64, omega: f64, n: usize) -> Result<Vec<f64>> {
    let (q1, q2) = two_binomial_coefficients(theta, omega)?;
    let n64 = n as u64;
    // Signed log-space terms; 1 - q can be negative far outside the regime.
    let signed_ln = |base: f64, power: u64| -> (f64, f64) {
        if power == 0 {
            return (1.0, 0.0);
        }
        let sign = if base < 0.0 && power % 2 == 1 { -1.0 } else { 1.0 };
        (sign, power as f64 * base.abs().ln())
    };
    let mut terms = Vec::with_capacity(2 * (n + 1));
    for k in 0..=n64 {
        let lc = ln_binomial(n64, k);
        let (s1a, l1a) = signed_ln(1.0 + q1, k);
        let (s1b, l1b) = signed_ln(1.0 - q2, n64 - k);
        let (s2a, l2a) = signed_ln(1.0 - q1, k);
        let (s2b, l2b) = signed_ln(1.0 + q2, n64 - k);
        terms.push((s1a * s1b, lc + l1a + l1b));
        terms.push((s2a * s2b, lc + l2a + l2b));
    }
    let shift = terms
        .iter()
        .map(|t| t.1)
        .filter(|v| v.is_finite())
        .fold(f64::NEG_INFINITY, f64::max);
    let raw: Vec<f64> = terms
        .chunks(2)
        .map(|pair| pair.iter().map(|(s, l)| s * (l - shift).exp()).sum())
        .collect();
    let total: f64 = raw.iter().sum();
    let dist: Vec<f64> = raw.iter().map(|v| v / total).collect();
    if dist.iter().any(|&v| v < -1e-12) || !total.is_finite() || total <= 0.0 {
        return Err(Error::Domain(format!(
            "two-binomial form is not a distribution at theta = {theta}, omega = {omega} (q1 = {q1}, q2 = {q2})"
        )));
    }
    Ok(dist)
}

/// The two large-`N` maxima of the two-binomial limit.
pub fn peak_positions(theta: f64, omega: f64, n: usize) -> Result<(f64, f64)> {
    let (q1, q2) = two_binomial_coefficients(theta, omega)?;
    let n = n as f64;
    Ok((
        n * (1.0 + q1) / (2.0 + q1 - q2),
        n * (1.0 - q1) / (2.0 - q1 + q2),
    ))
}

/// Spectrum of `K(e^{i chi})` at `samples` equispaced `chi` in `[0, 2 pi)`.
pub fn eigenvalue_locus(theta: f64, omega: f64, samples: usize) -> Vec<(f64, SpectrumPoint)> {
    unit_circle_angles(samples)
        .map(|chi| (chi, k_eigenvalues(Complex64::from_polar(1.0, chi), theta, omega)))
        .collect()
}

pub fn write_locus_csv<W: Write>(w: &mut W, locus: &[(f64, SpectrumPoint)]) -> std::io::Result<()> {
    writeln!(w, "chi,re_E1,im_E1,re_E2,im_E2,re_E3,im_E3")?;
    for (chi, sp) in locus {
        let [e1, e2, e3] = sp.eigenvalues;
        writeln!(
            w,
            "{chi},{:e},{:e},{:e},{:e},{:e},{:e}",
            e1.re, e1.im, e2.re, e2.im, e3.re, e3.im
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qubit::StateVector;
    use crate::stats::max_abs_diff;

    fn params(theta: f64, omega: f64, n: usize) -> ModelParams {
        ModelParams::new(theta, omega, 0.0, n, StateVector::plus_x()).unwrap()
    }

    #[test]
    fn generating_function_normalization_and_binomial_zero() {
        let z0 = exact_generating_function(&params(0.7, 1.3, 20), 0.0).unwrap()[0];
        assert!((z0 - 1.0).norm() < 1e-14);
        let z_pi = exact_generating_function(&params(0.0, 0.4, 20), std::f64::consts::PI).unwrap()[0];
        assert!(z_pi.norm() < 1e-14);
    }

    #[test]
    fn inversion_identities() {
        assert_eq!(
            invert_generating_function(&vec![c(1.0); 11], 10).unwrap()[0],
            1.0
        );
        let delta = invert_generating_function(&vec![c(1.0); 11], 10).unwrap();
        assert!(delta[1..].iter().all(|v| v.abs() < 1e-15));
        assert!(matches!(
            invert_generating_function(&[c(1.0); 5], 10),
            Err(Error::InsufficientSamples { got: 5, need: 11 })
        ));
        let p = params(0.0, 0.9, 16);
        let binom = invert_generating_function(&exact_generating_samples(&p).unwrap(), 16).unwrap();
        assert!(max_abs_diff(&binom, &binomial_limit(16)) < 1e-14);
    }

    #[test]
    fn inversion_rejects_complex_data() {
        let mut s = vec![c(1.0); 5];
        s[1] = Complex64::new(0.0, 1.0);
        assert!(matches!(
            invert_generating_function(&s, 4),
            Err(Error::NumericFailure(_))
        ));
    }

    #[test]
    fn k_matrix_substitutions() {
        let w = 0.3;
        let k1 = k_matrix(c(1.0), 0.2, w).matrix;
        let expect1 = [[1.0, 0.0, 0.0], [0.0, 1.0, -w], [0.0, w, 1.0]];
        let (t, w0) = (0.2, 0.3);
        let k0 = k_matrix(c(0.0), t, w0).matrix;
        let expect0 = [[0.5, -t / 2.0, 0.0], [-t / 2.0, 0.5, -w0 / 2.0], [0.0, w0 / 2.0, 0.5]];
        for i in 0..3 {
            for j in 0..3 {
                assert!((k1[i][j] - expect1[i][j]).norm() < 1e-15);
                assert!((k0[i][j] - expect0[i][j]).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn eigenvalue_special_points() {
        let w = 0.2;
        let sp = k_eigenvalues(c(1.0), 0.1, w);
        assert!((sp.epsilon - Complex64::new(0.0, 2.0 * w)).norm() < 1e-15);
        let mut pair = [sp.eigenvalues[0], sp.eigenvalues[1]];
        pair.sort_by(|a, b| a.im.partial_cmp(&b.im).unwrap());
        assert!((pair[0] - Complex64::new(1.0, -w)).norm() < 1e-15);
        assert!((pair[1] - Complex64::new(1.0, w)).norm() < 1e-15);
        assert_eq!(sp.eigenvalues[2], c(1.0));

        let degenerate = k_eigenvalues(c(0.0), 0.25, 0.25);
        assert!((degenerate.eigenvalues[0] - 0.5).norm() < 1e-15);
        assert!((degenerate.eigenvalues[1] - 0.5).norm() < 1e-15);

        let real = k_eigenvalues(c(0.0), 0.3, 0.1);
        let expect = 0.5 * (1.0 + (0.09f64 - 0.01).sqrt());
        assert!(real.eigenvalues.iter().all(|e| e.im.abs() < 1e-15));
        assert!((real.eigenvalues[0].re - expect).abs() < 1e-15);
        let cplx = k_eigenvalues(c(0.0), 0.1, 0.3);
        assert!((cplx.eigenvalues[0] - cplx.eigenvalues[1].conj()).norm() < 1e-15);
        assert!(cplx.eigenvalues[0].im.abs() > 0.1);
    }

    #[test]
    fn closed_form_simple_limits() {
        let z1 = closed_form_z0(c(1.0), 0.05, 0.03, 40).unwrap();
        assert!((z1 - 1.0).norm() < 1e-14);
        let z = Complex64::from_polar(1.0, 0.7);
        let pure = closed_form_z0(z, 0.0, 0.1, 12).unwrap();
        assert!((pure - ((z + 1.0) / 2.0).powi(12)).norm() < 1e-14);
        // (z - 1) theta + (z + 1) omega = 0 at z = (theta - omega)/(theta + omega).
        assert!(matches!(
            closed_form_z0(c(0.5), 0.3, 0.1, 5),
            Err(Error::Pole { .. })
        ));
    }

    #[test]
    fn closed_form_equals_k_power_on_plus_x() {
        // Eigen-decomposition of K(z) applied to (1, 0, 1) gives the closed
        // form exactly; compare with repeated multiplication.
        for (theta, omega, chi) in [(0.05, 0.03, 0.4), (0.2, 0.01, 2.0), (0.01, 0.2, 5.1)] {
            let z = Complex64::from_polar(1.0, chi);
            let k = k_matrix(z, theta, omega).matrix;
            let mut v = [c(1.0), c(0.0), c(1.0)];
            for _ in 0..30 {
                v = mat_vec(&k, &v);
            }
            let cf = closed_form_z0(z, theta, omega, 30).unwrap();
            assert!((v[0] - cf).norm() < 1e-13, "{v:?} vs {cf}");
        }
    }

    #[test]
    fn two_binomial_coefficients_arithmetic() {
        let (q1, q2) = two_binomial_coefficients(0.3, 0.001).unwrap();
        assert!((q1 - 0.300005).abs() < 1e-6);
        assert!((q2 - 0.299998).abs() < 1e-6);
        assert!(two_binomial_coefficients(0.1, 0.1).is_err());
        let (a, b) = peak_positions(0.3, 0.001, 100).unwrap();
        assert!((a - 65.0).abs() < 0.01 && (b - 35.0).abs() < 0.01);
        let (a, b) = peak_positions(0.2, 1e-9, 1000).unwrap();
        assert!((a - 600.0).abs() < 1e-6 && (b - 400.0).abs() < 1e-6);
    }

    #[test]
    fn two_binomial_static_limit_is_mixture() {
        let theta = 0.25;
        let d = two_binomial_limit(theta, 1e-12, 40).unwrap();
        let a = crate::stats::binomial_pmf(40, (1.0 + theta) / 2.0);
        let b = crate::stats::binomial_pmf(40, (1.0 - theta) / 2.0);
        let mix: Vec<f64> = a.iter().zip(&b).map(|(x, y)| 0.5 * (x + y)).collect();
        assert!(max_abs_diff(&d, &mix) < 1e-12);
        assert!((d.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn binomial_limit_sums_to_one() {
        let b = binomial_limit(4);
        assert!(max_abs_diff(&b, &[1.0 / 16.0, 0.25, 0.375, 0.25, 1.0 / 16.0]) < 1e-15);
        for n in [1, 10, 100, 1000] {
            assert!((binomial_limit(n).iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn locus_csv_header() {
        let locus = eigenvalue_locus(0.1, 0.2, 4);
        let mut buf = Vec::new();
        write_locus_csv(&mut buf, &locus).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("chi,re_E1,im_E1,re_E2,im_E2,re_E3,im_E3\n0,"));
        assert_eq!(text.lines().count(), 5);
    }
}
