//! Quadrature rules used across the crate.
//!
//! Composite Gauss–Legendre for smooth integrands on a fixed interval,
//! adaptive Gauss–Kronrod (7/15) for integrands with sharp peaks, and
//! Simpson/trapezoid rules for tabulated samples.

const GL8_NODES: [f64; 4] = [
    0.183_434_642_495_649_8,
    0.525_532_409_916_329_0,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_2,
];
const GL8_WEIGHTS: [f64; 4] = [
    0.362_683_783_378_362_0,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_3,
];

/// Gauss–Legendre 8-point nodes mapped to [a, b] together with weights.
pub fn gauss_legendre_points(a: f64, b: f64, panels: usize) -> Vec<(f64, f64)> {
    let panels = panels.max(1);
    let h = (b - a) / panels as f64;
    let mut out = Vec::with_capacity(8 * panels);
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * h;
        let half = 0.5 * h;
        for k in 0..4 {
            out.push((mid - half * GL8_NODES[k], half * GL8_WEIGHTS[k]));
            out.push((mid + half * GL8_NODES[k], half * GL8_WEIGHTS[k]));
        }
    }
    out
}

/// Composite 8-point Gauss–Legendre on [a, b] with `panels` equal panels.
pub fn gauss_legendre<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, panels: usize) -> f64 {
    if a == b {
        return 0.0;
    }
    gauss_legendre_points(a, b, panels)
        .into_iter()
        .map(|(x, w)| w * f(x))
        .sum()
}

const GK15_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const K15_WEIGHTS: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
// Gauss 7-point weights at the odd Kronrod nodes (indices 1, 3, 5, 7).
const G7_WEIGHTS: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = K15_WEIGHTS[7] * fc;
    let mut gauss = G7_WEIGHTS[3] * fc;
    for k in 0..7 {
        let dx = h * GK15_NODES[k];
        let s = f(c - dx) + f(c + dx);
        kron += K15_WEIGHTS[k] * s;
        if k % 2 == 1 {
            gauss += G7_WEIGHTS[k / 2] * s;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

/// Adaptive Gauss–Kronrod integration. Returns (value, error estimate).
///
/// Intervals are bisected until the summed error estimate is below
/// `max(abs_tol, rel_tol * |value|)` or `max_intervals` is reached.
pub fn adaptive<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_intervals: usize,
) -> (f64, f64) {
    if a == b {
        return (0.0, 0.0);
    }
    let (v, e) = gk15(&mut f, a, b);
    let mut intervals = vec![(a, b, v, e)];
    loop {
        let total: f64 = intervals.iter().map(|s| s.2).sum();
        let err: f64 = intervals.iter().map(|s| s.3).sum();
        if err <= abs_tol.max(rel_tol * total.abs()) || intervals.len() >= max_intervals {
            return (total, err);
        }
        let (idx, _) = intervals
            .iter()
            .enumerate()
            .fold((0, -1.0), |acc, (i, s)| if s.3 > acc.1 { (i, s.3) } else { acc });
        let (lo, hi, _, _) = intervals.swap_remove(idx);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = gk15(&mut f, lo, mid);
        let (v2, e2) = gk15(&mut f, mid, hi);
        intervals.push((lo, mid, v1, e1));
        intervals.push((mid, hi, v2, e2));
    }
}

/// Composite Simpson rule on equally spaced samples with spacing `h`.
///
/// An even number of intervals uses plain Simpson; an odd number closes
/// the last three intervals with the 3/8 rule. Two samples fall back to
/// the trapezoid rule.
pub fn simpson(values: &[f64], h: f64) -> f64 {
    let n = values.len();
    match n {
        0 | 1 => 0.0,
        2 => 0.5 * h * (values[0] + values[1]),
        3 => h / 3.0 * (values[0] + 4.0 * values[1] + values[2]),
        _ => {
            let intervals = n - 1;
            let simpson_end = if intervals % 2 == 0 { n - 1 } else { n - 4 };
            let mut s = 0.0;
            if simpson_end > 0 {
                s += values[0] + values[simpson_end];
                for (i, v) in values.iter().enumerate().take(simpson_end).skip(1) {
                    s += if i % 2 == 1 { 4.0 * v } else { 2.0 * v };
                }
                s *= h / 3.0;
            }
            if simpson_end != n - 1 {
                let v = &values[n - 4..];
                s += 3.0 * h / 8.0 * (v[0] + 3.0 * v[1] + 3.0 * v[2] + v[3]);
            }
            s
        }
    }
}

/// Composite trapezoid rule on equally spaced samples.
pub fn trapezoid(values: &[f64], h: f64) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let inner: f64 = values[1..values.len() - 1].iter().sum();
    h * (inner + 0.5 * (values[0] + values[values.len() - 1]))
}

/// Trapezoid rule on a non-uniform abscissa.
pub fn trapezoid_nonuniform(x: &[f64], y: &[f64]) -> f64 {
    x.windows(2)
        .zip(y.windows(2))
        .map(|(xw, yw)| 0.5 * (xw[1] - xw[0]) * (yw[0] + yw[1]))
        .sum()
}
