//! The high-peak-tent probability density p(t) = (2/π)·ln|coth(πt/2)|:
//! point evaluation, quadrature oracles for its Fourier transform and
//! first absolute moment, an inverse-CDF sampler for t, and categorical
//! sampling of Hamiltonian term indices.
//!
//! p is even, has an integrable logarithmic singularity at t = 0, and decays
//! as (4/π)e^{-πt}. Its Fourier transform is tanh(ω/2)/(ω/2), which is what
//! the oracles here are tested against.

use crate::error::{Error, Result};
use rand::Rng;
use std::f64::consts::PI;

/// Upper integration limit for the quadrature oracles; the mass beyond it
/// (~1e-55) is added analytically from the exponential tail series.
const T_QUAD: f64 = 40.0;

/// First grid node of the sampler table; the mass below it is added
/// analytically from the small-t expansion p(t) ≈ (2/π)·ln(2/(πt)).
const T_FIRST: f64 = 1e-8;

/// p(t) = (2/π)·ln|coth(πt/2)|, with +∞ signalled at t = 0.
///
/// Evaluated as ln(1 + 2q/(1-q)) with q = e^{-π|t|}, which is stable both
/// near the singularity and deep in the tail.
pub fn pdf(t: f64) -> f64 {
    if t == 0.0 {
        return f64::INFINITY;
    }
    // q keeps the tail exact; 1 - q via exp_m1 keeps the peak exact
    let x = -PI * t.abs();
    let q = x.exp();
    let one_minus_q = -x.exp_m1();
    (2.0 / PI) * (2.0 * q / one_minus_q).ln_1p()
}

/// Tail series: p(t) = (4/π)·Σ_{m odd} e^{-mπt}/m for t > 0.
/// Mass of p on (t, ∞); accurate to ~1e-14 absolute for t ≥ 1.
fn tail_mass_beyond(t: f64) -> f64 {
    let mut sum = 0.0;
    let mut m = 1.0f64;
    while m <= 13.0 {
        sum += (-m * PI * t).exp() / (m * m);
        m += 2.0;
    }
    4.0 / (PI * PI) * sum
}

/// ∫_t^∞ p(s)·cos(ωs) ds from the tail series (for t ≥ 1).
fn tail_fourier_beyond(t: f64, omega: f64) -> f64 {
    let mut sum = 0.0;
    let mut m = 1.0f64;
    while m <= 13.0 {
        let a = m * PI;
        sum += (-a * t).exp() * (a * (omega * t).cos() - omega * (omega * t).sin())
            / (m * (a * a + omega * omega));
        m += 2.0;
    }
    4.0 / PI * sum
}

/// ∫_t^∞ s·p(s) ds from the tail series (for t ≥ 1).
fn tail_abs_moment_beyond(t: f64) -> f64 {
    let mut sum = 0.0;
    let mut m = 1.0f64;
    while m <= 13.0 {
        let a = m * PI;
        sum += (-a * t).exp() * (a * t + 1.0) / (m * a * a);
        m += 2.0;
    }
    4.0 / PI * sum
}

/// Tanh-sinh quadrature of `f` on [a, b] with level doubling.
///
/// Abscissas cluster doubly-exponentially at the endpoints, so integrable
/// endpoint singularities (like the log blow-up of p at 0) converge cleanly.
/// Endpoints themselves are never evaluated.
fn tanh_sinh<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> Result<f64> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut previous = f64::NAN;
    for level in 1..=12u32 {
        let h = 1.0 / f64::from(1u32 << level);
        let mut sum = 0.5 * PI * f(center);
        let mut j = 1u32;
        loop {
            let u = f64::from(j) * h;
            let s = 0.5 * PI * u.sinh();
            // 1 - tanh(s) and 1/cosh^2(s), both overflow-free
            let e = (-2.0 * s).exp();
            let offset = 2.0 * e / (1.0 + e);
            let sech2 = 4.0 * e / ((1.0 + e) * (1.0 + e));
            if offset == 0.0 {
                break;
            }
            let weight = 0.5 * PI * u.cosh() * sech2;
            if weight < 1e-250 {
                break;
            }
            let lo = a + half * offset;
            let hi = b - half * offset;
            if lo <= a || hi >= b {
                break;
            }
            sum += weight * (f(lo) + f(hi));
            j += 1;
            if u > 7.0 {
                break;
            }
        }
        let integral = half * h * sum;
        if level >= 3 && (integral - previous).abs() <= tol * integral.abs().max(1.0) {
            return Ok(integral);
        }
        previous = integral;
    }
    Err(Error::QuadratureNonConvergence(format!(
        "tanh-sinh on [{a}, {b}] stalled at {previous}"
    )))
}

/// Split [0, T_QUAD] into panels short enough that an oscillation with
/// angular frequency ω is well resolved per panel.
fn oscillation_panels(omega: f64) -> Vec<f64> {
    let step = if omega.abs() > 1.0 {
        (PI / omega.abs()).min(1.0)
    } else {
        1.0
    };
    let mut edges = vec![0.0, 0.25];
    let mut t = 0.25;
    while t < T_QUAD {
        t = (t + step).min(T_QUAD);
        edges.push(t);
    }
    edges
}

/// Adaptive quadrature of ∫ p(t)·e^{-iωt} dt over the whole real line.
///
/// The imaginary part vanishes because p is even, so only the cosine part is
/// integrated (doubled over the half line). Test oracle for the filter
/// identity against tanh(ω/2)/(ω/2).
pub fn fourier_oracle(omega: f64) -> Result<f64> {
    if !omega.is_finite() || omega.abs() > 100.0 {
        return Err(Error::InvalidArgument(format!(
            "fourier_oracle requires finite |omega| <= 100, got {omega}"
        )));
    }
    let f = |t: f64| pdf(t) * (omega * t).cos();
    let edges = oscillation_panels(omega);
    let mut total = 0.0;
    for pair in edges.windows(2) {
        total += tanh_sinh(&f, pair[0], pair[1], 1e-11)?;
    }
    total += tail_fourier_beyond(T_QUAD, omega);
    Ok(2.0 * total)
}

/// Quadrature of ∫ |t|·p(t) dt; lands at ≈ 0.2714.
pub fn abs_t_mean_oracle() -> Result<f64> {
    let f = |t: f64| t * pdf(t);
    let edges = oscillation_panels(0.0);
    let mut total = 0.0;
    for pair in edges.windows(2) {
        total += tanh_sinh(&f, pair[0], pair[1], 1e-11)?;
    }
    total += tail_abs_moment_beyond(T_QUAD);
    Ok(2.0 * total)
}

/// Quadrature CDF of the positive half line: mass of p on (0, t].
/// Independent reference for sampler-fidelity tests.
pub fn half_cdf_oracle(t: f64) -> Result<f64> {
    if t <= 0.0 {
        return Ok(0.0);
    }
    if t >= 1.0 {
        return Ok(0.5 - tail_mass_beyond(t));
    }
    tanh_sinh(&pdf, 0.0, t, 1e-11)
}

/// Inverse-CDF sampler for t ~ p(t).
///
/// Tabulates the cumulative mass of the positive half line on a geometric
/// grid (the log singularity at 0 needs geometric resolution); the mass below
/// the first node and beyond `t_max` is handled analytically. Symmetry is
/// realized by a random sign, never by a second table.
#[derive(Debug, Clone)]
pub struct HighPeakTentSampler {
    grid: Vec<f64>,
    cdf: Vec<f64>,
    tail_mass: f64,
    t_max: f64,
}

pub const DEFAULT_T_MAX: f64 = 15.0;
pub const DEFAULT_GRID_SIZE: usize = 65536;

// 8-point Gauss-Legendre nodes/weights on [-1, 1].
const GL8_X: [f64; 8] = [
    -0.960_289_856_497_536_2,
    -0.796_666_477_413_626_7,
    -0.525_532_409_916_329,
    -0.183_434_642_495_649_8,
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_2,
];
const GL8_W: [f64; 8] = [
    0.101_228_536_290_376_26,
    0.222_381_034_453_374_47,
    0.313_706_645_877_887_3,
    0.362_683_783_378_362,
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_47,
    0.101_228_536_290_376_26,
];

fn gl8_panel<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut acc = 0.0;
    for (x, w) in GL8_X.iter().zip(GL8_W.iter()) {
        acc += w * f(c + h * x);
    }
    acc * h
}

impl HighPeakTentSampler {
    /// Build a sampler table with truncation `t_max` (≥ 10) and `grid_size`
    /// (≥ 2048) geometric nodes.
    pub fn build(t_max: f64, grid_size: usize) -> Result<Self> {
        if t_max.is_nan() || t_max < 10.0 {
            return Err(Error::InvalidArgument(format!(
                "sampler t_max must be >= 10, got {t_max}"
            )));
        }
        if grid_size < 2048 {
            return Err(Error::InvalidArgument(format!(
                "sampler grid_size must be >= 2048, got {grid_size}"
            )));
        }
        let m = grid_size - 1;
        let log_ratio = (t_max / T_FIRST).ln();
        let mut grid = Vec::with_capacity(grid_size);
        for i in 0..grid_size {
            grid.push(T_FIRST * (log_ratio * i as f64 / m as f64).exp());
        }
        grid[m] = t_max;

        // Mass on (0, t0] from p(t) ≈ (2/π)·ln(2/(πt)); the omitted correction
        // is O(t0^3) ~ 1e-25.
        let head = (2.0 / PI) * T_FIRST * ((2.0 / (PI * T_FIRST)).ln() + 1.0);
        let mut cdf = Vec::with_capacity(grid_size);
        cdf.push(head);
        for i in 1..grid_size {
            let mass = gl8_panel(&pdf, grid[i - 1], grid[i]);
            cdf.push(cdf[i - 1] + mass);
        }
        let tail_mass = tail_mass_beyond(t_max);

        let total = cdf[m] + tail_mass;
        if (total - 0.5).abs() > 1e-9 {
            return Err(Error::Numerical(format!(
                "sampler half-line mass {total} deviates from 0.5"
            )));
        }
        Ok(HighPeakTentSampler {
            grid,
            cdf,
            tail_mass,
            t_max,
        })
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    pub fn tail_mass(&self) -> f64 {
        self.tail_mass
    }

    /// Tabulated cumulative masses (one per grid node).
    pub fn cdf_nodes(&self) -> &[f64] {
        &self.cdf
    }

    /// |t| with half-line mass `m` ∈ [0, 0.5) below it: grid interpolation
    /// inside the table, exact exponential law beyond `t_max`.
    pub fn quantile(&self, m: f64) -> f64 {
        let last = *self.cdf.last().unwrap();
        if m >= last {
            // Tail envelope (4/π)e^{-πt}, exactly invertible.
            let frac = ((m - last) / self.tail_mass).min(1.0 - 1e-16);
            return self.t_max - (1.0 - frac).ln() / PI;
        }
        if m <= self.cdf[0] {
            return self.grid[0] * (m / self.cdf[0]).max(0.0);
        }
        let i = self.cdf.partition_point(|&c| c <= m);
        let (c0, c1) = (self.cdf[i - 1], self.cdf[i]);
        let (t0, t1) = (self.grid[i - 1], self.grid[i]);
        t0 + (m - c0) / (c1 - c0) * (t1 - t0)
    }

    /// Draw t ~ p(t): inverse-CDF magnitude, then a random sign.
    pub fn sample_t<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.gen();
        let t = self.quantile(0.5 * u);
        if rng.gen::<bool>() {
            t
        } else {
            -t
        }
    }
}

/// Draw index k with probability α_k / Σα by cumulative-sum inversion.
pub fn sample_term_index<R: Rng + ?Sized>(alpha: &[f64], rng: &mut R) -> Result<usize> {
    if alpha.is_empty() {
        return Err(Error::InvalidArgument("empty coefficient vector".into()));
    }
    if alpha.iter().any(|&a| a.is_nan() || a <= 0.0 || !a.is_finite()) {
        return Err(Error::InvalidArgument(
            "coefficients must be strictly positive and finite".into(),
        ));
    }
    let total: f64 = alpha.iter().sum();
    let u = rng.gen::<f64>() * total;
    let mut acc = 0.0;
    for (k, &a) in alpha.iter().enumerate() {
        acc += a;
        if u < acc {
            return Ok(k);
        }
    }
    Ok(alpha.len() - 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::rngs::StdRng;
    use rand::SeedableRng;

    fn kappa(omega: f64) -> f64 {
        if omega.abs() < 1e-12 {
            1.0 - omega * omega / 12.0
        } else {
            (omega / 2.0).tanh() / (omega / 2.0)
        }
    }

    #[test]
    fn pdf_is_even_and_singular_at_zero() {
        for &t in &[0.01, 0.3, 1.0, 4.2] {
            assert_eq!(pdf(t), pdf(-t));
            assert!(pdf(t) > 0.0);
        }
        assert!(pdf(0.0).is_infinite());
    }

    #[test]
    fn pdf_matches_direct_formula() {
        // direct (2/π)·ln(coth(πt/2)) at t = 1
        let direct = (2.0 / PI) * (1.0 / (PI / 2.0).tanh()).ln();
        assert_abs_diff_eq!(pdf(1.0), direct, epsilon = 1e-15);
        assert_abs_diff_eq!(pdf(1.0), 0.05506, epsilon = 1e-5);
    }

    #[test]
    fn pdf_tail_matches_envelope() {
        // agreement with (4/π)e^{-πt} at t = 15 down to float rounding
        let t = 15.0;
        let envelope = 4.0 / PI * (-PI * t).exp();
        assert!((pdf(t) - envelope).abs() / envelope < 1e-12);
        // the true deviation is the next series term, e^{-2πt}/3 < 1e-20
        let log10_next_term = (-2.0 * PI * t - 3.0f64.ln()) / 10.0f64.ln();
        assert!(log10_next_term < -20.0);
    }

    #[test]
    fn fourier_oracle_total_mass() {
        assert_abs_diff_eq!(fourier_oracle(0.0).unwrap(), 1.0, epsilon = 1e-8);
    }

    #[test]
    fn fourier_oracle_matches_filter() {
        assert_abs_diff_eq!(fourier_oracle(2.0).unwrap(), 1.0f64.tanh(), epsilon = 1e-6);
        assert_abs_diff_eq!(
            fourier_oracle(10.0).unwrap(),
            5.0f64.tanh() / 5.0,
            epsilon = 1e-6
        );
        assert_abs_diff_eq!(fourier_oracle(-2.0).unwrap(), kappa(2.0), epsilon = 1e-6);
    }

    #[test]
    fn fourier_oracle_rejects_large_omega() {
        assert!(fourier_oracle(101.0).is_err());
        assert!(fourier_oracle(f64::NAN).is_err());
    }

    #[test]
    fn abs_t_mean_lands_on_expected_value() {
        let v = abs_t_mean_oracle().unwrap();
        assert_abs_diff_eq!(v, 0.2714, epsilon = 1e-3);
        // integrand spot value at t = 1
        assert_abs_diff_eq!(1.0 * pdf(1.0), 0.05506, epsilon = 1e-5);
        // second route: ∫t·p(t)dt over the half line is 7ζ(3)/(2π³)
        let zeta3 = 1.202_056_903_159_594_2;
        assert_abs_diff_eq!(v, 7.0 * zeta3 / (PI * PI * PI), epsilon = 1e-9);
    }

    #[test]
    fn positive_half_moment_is_half_of_total() {
        let f = |t: f64| t * pdf(t);
        let half = tanh_sinh(&f, 0.0, T_QUAD, 1e-11).unwrap() + tail_abs_moment_beyond(T_QUAD);
        assert_abs_diff_eq!(2.0 * half, abs_t_mean_oracle().unwrap(), epsilon = 1e-12);
    }

    #[test]
    fn tail_series_matches_quadrature() {
        // where the mass is non-negligible the series must agree with quadrature
        for &t in &[1.0, 2.0] {
            let quad = tanh_sinh(&pdf, t, T_QUAD, 1e-12).unwrap() + tail_mass_beyond(T_QUAD);
            assert_abs_diff_eq!(tail_mass_beyond(t), quad, epsilon = 1e-8);
        }
        // and the default truncation leaves only ~1e-21 behind
        assert!(tail_mass_beyond(DEFAULT_T_MAX) < 1e-20);
    }

    #[test]
    fn build_rejects_bad_parameters() {
        assert!(HighPeakTentSampler::build(9.0, 65536).is_err());
        assert!(HighPeakTentSampler::build(15.0, 1024).is_err());
    }

    #[test]
    fn sampler_cdf_monotone_and_normalized() {
        let s = HighPeakTentSampler::build(DEFAULT_T_MAX, DEFAULT_GRID_SIZE).unwrap();
        let cdf = s.cdf_nodes();
        assert!(cdf.windows(2).all(|w| w[1] >= w[0]));
        let total = 2.0 * (cdf.last().unwrap() + s.tail_mass());
        assert_abs_diff_eq!(total, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn quantile_matches_quadrature_inverse_at_median() {
        let s = HighPeakTentSampler::build(DEFAULT_T_MAX, DEFAULT_GRID_SIZE).unwrap();
        // |t| median: half-line mass 0.25. Invert the quadrature CDF by bisection.
        let target = 0.25;
        let (mut lo, mut hi) = (1e-12, DEFAULT_T_MAX);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if half_cdf_oracle(mid).unwrap() < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let oracle_median = 0.5 * (lo + hi);
        assert_abs_diff_eq!(s.quantile(target), oracle_median, epsilon = 1e-4);
    }

    #[test]
    fn empirical_moments() {
        let s = HighPeakTentSampler::build(DEFAULT_T_MAX, DEFAULT_GRID_SIZE).unwrap();
        let mut rng = StdRng::seed_from_u64(7);
        let n = 1_000_000usize;
        let mut sum = 0.0;
        let mut sum_abs = 0.0;
        let mut beyond = 0usize;
        for _ in 0..n {
            let t = s.sample_t(&mut rng);
            sum += t;
            sum_abs += t.abs();
            if t.abs() > 15.0 {
                beyond += 1;
            }
        }
        assert!((sum / n as f64).abs() < 0.002);
        assert_abs_diff_eq!(sum_abs / n as f64, 0.2714, epsilon = 3e-3);
        assert!(beyond as f64 / n as f64 <= 1e-6);
    }

    #[test]
    fn sampler_passes_ks_against_quadrature_cdf() {
        // Reference CDF on a fine geometric grid via tanh-sinh panels,
        // independent of the sampler's Gauss-Legendre table.
        let nodes = 2048usize;
        let mut ts = Vec::with_capacity(nodes);
        let log_ratio = (30.0f64 / 1e-9).ln();
        for i in 0..nodes {
            ts.push(1e-9 * (log_ratio * i as f64 / (nodes - 1) as f64).exp());
        }
        let mut ref_cdf = Vec::with_capacity(nodes);
        let head = (2.0 / PI) * 1e-9 * ((2.0 / (PI * 1e-9)).ln() + 1.0);
        ref_cdf.push(head);
        for i in 1..nodes {
            let m = tanh_sinh(&pdf, ts[i - 1], ts[i], 1e-12).unwrap();
            ref_cdf.push(ref_cdf[i - 1] + m);
        }
        // normalize to the conditional CDF of |t| (half-line mass 0.5)
        let cdf_at = |t: f64| -> f64 {
            if t <= ts[0] {
                return 2.0 * head * (t / ts[0]);
            }
            if t >= ts[nodes - 1] {
                return 1.0;
            }
            let i = ts.partition_point(|&x| x <= t);
            let frac = (t - ts[i - 1]) / (ts[i] - ts[i - 1]);
            2.0 * (ref_cdf[i - 1] + frac * (ref_cdf[i] - ref_cdf[i - 1]))
        };

        let s = HighPeakTentSampler::build(DEFAULT_T_MAX, DEFAULT_GRID_SIZE).unwrap();
        let mut rng = StdRng::seed_from_u64(12345);
        let n = 100_000usize;
        let mut draws: Vec<f64> = (0..n).map(|_| s.sample_t(&mut rng).abs()).collect();
        draws.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut d = 0.0f64;
        for (i, &x) in draws.iter().enumerate() {
            let f = cdf_at(x);
            d = d.max((f - i as f64 / n as f64).abs());
            d = d.max(((i + 1) as f64 / n as f64 - f).abs());
        }
        // two-sided KS critical value at significance 1e-3
        let critical = ((2.0f64 / 1e-3).ln() / (2.0 * n as f64)).sqrt();
        assert!(
            d <= critical,
            "KS statistic {d} exceeds critical {critical}"
        );
    }

    #[test]
    fn term_index_singleton_and_frequencies() {
        let mut rng = StdRng::seed_from_u64(3);
        for _ in 0..100 {
            assert_eq!(sample_term_index(&[1.0], &mut rng).unwrap(), 0);
        }
        let n = 100_000usize;
        let mut count0 = 0usize;
        for _ in 0..n {
            if sample_term_index(&[1.0, 1.0], &mut rng).unwrap() == 0 {
                count0 += 1;
            }
        }
        assert!((count0 as f64 / n as f64 - 0.5).abs() < 0.01);

        let mut count0 = 0usize;
        for _ in 0..n {
            if sample_term_index(&[3.0, 1.0], &mut rng).unwrap() == 0 {
                count0 += 1;
            }
        }
        assert!((count0 as f64 / n as f64 - 0.75).abs() < 0.01);
    }

    #[test]
    fn term_index_rejects_bad_alpha() {
        let mut rng = StdRng::seed_from_u64(1);
        assert!(sample_term_index(&[], &mut rng).is_err());
        assert!(sample_term_index(&[1.0, 0.0], &mut rng).is_err());
        assert!(sample_term_index(&[1.0, -2.0], &mut rng).is_err());
    }
}
