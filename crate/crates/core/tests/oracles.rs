mod common;

use std::f64::consts::PI;

use geolab::class_numbers::{class_number, trace_tallies, Discriminant};
use geolab::gallagher::{
    check_inequality, lhs_integral, random_spec, rhs_integral, rhs_modulus_bound,
    spectral_window_integral, window_application_spec, ExpSumSpec,
};
use geolab::geodesic_counts::{li, log_norm, read_cache, write_cache, TraceTable};
use geolab::spectral::{window_mean_square, zero_sum, ZeroTable};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{class_number_oracle, integrate, li_oracle};

#[test]
fn class_numbers_match_the_scan_for_small_discriminants() {
    for d in 5..=2000i64 {
        let Ok(disc) = Discriminant::new(d as i128) else {
            continue;
        };
        assert_eq!(class_number(disc), class_number_oracle(d), "D = {d}");
    }
}

#[test]
fn batch_tallies_match_the_scan() {
    let tallies = trace_tallies(3, 150).unwrap();
    for tally in tallies {
        let d = tally.d.value() as i64;
        assert_eq!(tally.class_count, class_number_oracle(d), "D = {d}");
    }
}

#[test]
fn li_matches_quadrature() {
    let two = li(2.0).unwrap();
    assert!((two - 1.045_163_780_1).abs() < 1e-10);
    assert!((two - li_oracle(2.0)).abs() < 1e-12);
    for &x in &[0.1, 0.5, 0.9, 1.1, 3.0, 10.0, 1e3, 1e6] {
        let got = li(x).unwrap();
        let want = li_oracle(x);
        assert!(
            (got - want).abs() <= 1e-10 * want.abs().max(1.0),
            "x = {x}: {got} vs {want}"
        );
    }
}

/// `|Σ_{±γ} x^ρ/ρ|²` evaluated naively.
fn zero_sum_square(x: f64, gammas: &[f64]) -> f64 {
    let mut s = Complex64::new(0.0, 0.0);
    for &g in gammas {
        for g in [g, -g] {
            let rho = Complex64::new(0.5, g);
            s += (rho * x.ln()).exp() / rho;
        }
    }
    s.norm_sqr()
}

#[test]
fn window_mean_square_matches_quadrature() {
    let bundled = ZeroTable::bundled();
    let gammas: Vec<f64> = bundled.zeros().iter().take(20).map(|z| z.gamma).collect();
    let table = ZeroTable::from_gammas(&gammas, "first 20").unwrap();
    for (n, count) in [(1u32, 1usize), (2, 3), (4, 8), (6, 20)] {
        let height = gammas[count - 1];
        let closed = window_mean_square(n, height, &table).unwrap();
        let lo = f64::from(n).exp();
        let hi = f64::from(n + 1).exp();
        let numeric = integrate(|x| zero_sum_square(x, &gammas[..count]), lo, hi, 1e-12);
        assert!(
            ((closed - numeric) / numeric).abs() < 1e-8,
            "n = {n}: {closed} vs {numeric}"
        );
    }
}

#[test]
fn collapsed_zero_sum_matches_naive_sum() {
    let table = ZeroTable::bundled();
    let gammas: Vec<f64> = table.zeros().iter().take(30).map(|z| z.gamma).collect();
    for &x in &[3.0, 47.0, 1e4, 1e7] {
        let mut naive = Complex64::new(0.0, 0.0);
        for &g in &gammas {
            for g in [g, -g] {
                let rho = Complex64::new(0.5, g);
                naive += (rho * f64::ln(x)).exp() / rho;
            }
        }
        let got = zero_sum(x, gammas[29], &table);
        assert!((got - naive.re).abs() < 1e-11 * x.sqrt() * 10.0);
    }
}

fn quadrature_sides(spec: &ExpSumSpec) -> (f64, f64) {
    let u = spec.u();
    let lhs = integrate(|v| spec.evaluate(v).norm_sqr(), -u, u, 1e-13);
    // window sum is piecewise constant; integrate each piece exactly by midpoint
    let window = spec.window();
    let mut breaks: Vec<f64> = spec
        .terms()
        .iter()
        .flat_map(|&(nu, _)| [nu - window, nu])
        .collect();
    breaks.sort_by(f64::total_cmp);
    let scale = u / spec.theta();
    let factor = (PI * spec.theta() / (PI * spec.theta()).sin()).powi(2);
    let mut rhs = 0.0;
    for pair in breaks.windows(2) {
        let piece = |t: f64| {
            let s: Complex64 = spec
                .terms()
                .iter()
                .filter(|&&(nu, _)| t <= nu && nu <= t + window)
                .map(|&(_, c)| c)
                .sum();
            (s * scale).norm_sqr()
        };
        if pair[1] > pair[0] {
            rhs += integrate(piece, pair[0], pair[1], 1e-13);
        }
    }
    (lhs, factor * rhs)
}

#[test]
fn gallagher_sides_match_quadrature() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..40 {
        let spec = random_spec(&mut rng, 8);
        let (lhs_q, rhs_q) = quadrature_sides(&spec);
        let lhs = lhs_integral(&spec);
        let rhs = rhs_integral(&spec);
        assert!(
            (lhs - lhs_q).abs() <= 1e-9 * lhs_q.max(1e-12),
            "{lhs} vs {lhs_q}"
        );
        assert!((rhs - rhs_q).abs() <= 1e-9 * rhs_q, "{rhs} vs {rhs_q}");
    }
}

#[test]
fn window_application_links_the_two_integrals() {
    let table = ZeroTable::bundled();
    for (n, height) in [(3u32, 20.0), (5, 40.0), (8, 60.0)] {
        let spec = window_application_spec(&table, n, height);
        let check = check_inequality(&spec);
        assert!(check.holds);
        assert!(check.rhs <= rhs_modulus_bound(&spec) * (1.0 + 1e-12));
        // ∫_{eⁿ}^{eⁿ⁺¹} |Σ x^{iγ}/ρ|² dx/x = 2π ∫_{-U}^{U} |S(u)|² du
        let gammas: Vec<f64> = table.up_to(height).iter().map(|z| z.gamma).collect();
        let direct = integrate(
            |v: f64| zero_sum_square(v.exp(), &gammas) / v.exp(),
            f64::from(n),
            f64::from(n + 1),
            1e-12,
        );
        let lhs = 2.0 * PI * check.lhs;
        assert!(((direct - lhs) / lhs).abs() < 1e-8, "{direct} vs {lhs}");
        // the unit-window form with |ρ| windows dominates the lemma's right side
        let factor = spec.sine_factor();
        assert!(check.rhs <= factor * spectral_window_integral(&table, height));
    }
}

#[test]
fn cache_file_round_trip() {
    let table = TraceTable::build(500).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("traces.bin");
    write_cache(&table, std::fs::File::create(&path).unwrap()).unwrap();
    let back = read_cache(std::fs::File::open(&path).unwrap()).unwrap();
    assert_eq!(back, table);
}

fn small_table() -> &'static TraceTable {
    use std::sync::OnceLock;
    static TABLE: OnceLock<TraceTable> = OnceLock::new();
    TABLE.get_or_init(|| TraceTable::build(3200).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn counts_are_monotone(a in 1.0f64..1e7, b in 1.0f64..1e7) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let t = small_table();
        prop_assert!(t.pi_count(lo).unwrap() <= t.pi_count(hi).unwrap());
        prop_assert!(t.theta(lo).unwrap() <= t.theta(hi).unwrap());
        prop_assert!(t.psi(lo).unwrap() <= t.psi(hi).unwrap());
        prop_assert!(t.theta(hi).unwrap() <= t.psi(hi).unwrap());
    }

    #[test]
    fn theta_jumps_at_norms(tr in 3u64..3000) {
        let t = small_table();
        let rec = *t.get(tr).unwrap();
        let below = f64::from_bits(rec.norm.to_bits() - 64);
        let above = f64::from_bits(rec.norm.to_bits() + 64);
        let jump = t.theta(above).unwrap() - t.theta(below).unwrap();
        let expected = rec.primitive_classes as f64 * log_norm(tr);
        prop_assert!((jump - expected).abs() <= 1e-9 * t.theta(above).unwrap());
    }
}
