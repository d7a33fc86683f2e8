//! Independent oracles shared by the integration tests.

#![allow(dead_code)]

use std::collections::HashMap;

const KRONROD_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const KRONROD_WEIGHTS: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
/// Gauss weights for Kronrod nodes 1, 3, 5, 7.
const GAUSS_WEIGHTS: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut kronrod = 0.0;
    let mut gauss = 0.0;
    for (i, (&x, &w)) in KRONROD_NODES.iter().zip(&KRONROD_WEIGHTS).enumerate() {
        let values = if x == 0.0 {
            vec![f(c)]
        } else {
            vec![f(c - h * x), f(c + h * x)]
        };
        let s: f64 = values.iter().sum();
        kronrod += w * s;
        if i % 2 == 1 {
            gauss += GAUSS_WEIGHTS[i / 2] * s;
        }
    }
    (kronrod * h, (kronrod - gauss).abs() * h)
}

/// Adaptive Gauss–Kronrod (7, 15) quadrature to relative tolerance `tol`.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let (whole, _) = gk15(&f, a, b);
    let floor = whole.abs().max(1e-300);
    let mut stack = vec![(a, b, 0u32)];
    let mut total = 0.0;
    let mut compensation = 0.0;
    while let Some((lo, hi, depth)) = stack.pop() {
        let (value, err) = gk15(&f, lo, hi);
        let width = (hi - lo) / (b - a);
        if err <= tol * floor * width.max(1e-6) || depth >= 48 {
            let y = value - compensation;
            let t = total + y;
            compensation = (t - total) - y;
            total = t;
        } else {
            let mid = 0.5 * (lo + hi);
            stack.push((mid, hi, depth + 1));
            stack.push((lo, mid, depth + 1));
        }
    }
    total
}

/// `li(x) = ∫₀^x (1/log t − 1/(t − 1)) dt + log|x − 1|`, a smooth integrand.
pub fn li_oracle(x: f64) -> f64 {
    let smooth = |t: f64| {
        if t == 0.0 {
            return 1.0;
        }
        let s = t - 1.0;
        if s.abs() < 1e-4 {
            // 1/log(1+s) − 1/s = 1/2 − s/12 + s²/24 − …
            0.5 - s / 12.0 + s * s / 24.0
        } else {
            1.0 / t.ln() - 1.0 / s
        }
    };
    let mut total = 0.0;
    let mut lo = 0.0;
    // split at 1 and geometrically beyond so each piece is well resolved
    let mut cuts = vec![0.5, 1.0];
    let mut c = 2.0;
    while c < x {
        cuts.push(c);
        c *= 4.0;
    }
    cuts.retain(|&v| v < x);
    cuts.push(x);
    for hi in cuts {
        total += integrate(smooth, lo, hi, 1e-14);
        lo = hi;
    }
    total + (x - 1.0).abs().ln()
}

fn isqrt(n: u64) -> u64 {
    let mut r = (n as f64).sqrt() as u64;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

/// Reduced forms `|√D − 2|a|| < b < √D` by scanning every `(a, b)` in the box.
pub fn reduced_forms_by_scan(d: i64) -> Vec<(i64, i64, i64)> {
    let root = (d as f64).sqrt();
    let mut out = Vec::new();
    let limit = root.ceil() as i64;
    for a in -limit..=limit {
        if a == 0 {
            continue;
        }
        for b in 1..=limit {
            if (b * b - d) % (4 * a) != 0 {
                continue;
            }
            let c = (b * b - d) / (4 * a);
            let bf = b as f64;
            if (root - 2.0 * a.abs() as f64).abs() < bf && bf < root {
                out.push((a, b, c));
            }
        }
    }
    out
}

/// Number of cycles of reduced forms, with each neighbor found by searching
/// the whole window for `b' ≡ −b (mod 2c)`.
pub fn class_number_oracle(d: i64) -> u64 {
    let forms = reduced_forms_by_scan(d);
    let index: HashMap<(i64, i64, i64), usize> =
        forms.iter().enumerate().map(|(i, &f)| (f, i)).collect();
    let root = (d as f64).sqrt();
    let s = isqrt(d as u64) as i64;
    let next = |&(_, b, c): &(i64, i64, i64)| -> (i64, i64, i64) {
        let m = 2 * c.abs();
        let lo = ((root - m as f64).floor() as i64).max(-s - m);
        let candidates: Vec<i64> = (lo..=s)
            .filter(|&bp| (bp + b).rem_euclid(m) == 0)
            .filter(|&bp| {
                let bf = bp as f64;
                (root - m as f64) < bf && bf < root
            })
            .collect();
        assert_eq!(candidates.len(), 1, "neighbor of ({b}, {c}) in D = {d}");
        let bp = candidates[0];
        (c, bp, (bp * bp - d) / (4 * c))
    };
    let mut seen = vec![false; forms.len()];
    let mut cycles = 0;
    for start in 0..forms.len() {
        if seen[start] {
            continue;
        }
        cycles += 1;
        let mut i = start;
        while !seen[i] {
            seen[i] = true;
            let f = next(&forms[i]);
            i = *index
                .get(&f)
                .expect("neighbor of a reduced form is reduced");
        }
    }
    cycles
}
