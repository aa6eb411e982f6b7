use std::f64::consts::PI;
use std::sync::OnceLock;

use super::rs_tables;

/// Largest main-sum length supported; covers t up to 2π·4096² ≈ 1.05e8.
pub(crate) const TABLE_LEN: usize = 4096;

/// Gabcke-type bounds |R_k(t)| ≤ c_k t^{-(2k+3)/4} for the remainder after
/// corrections C_0..C_k (stated for t ≥ 200, used as the error model below
/// that as well).
const REMAINDER_BOUND: [f64; 5] = [0.127, 0.053, 0.011, 0.031, 0.017];

pub(crate) struct Tables {
    pub ln: Vec<f64>,
    pub inv_sqrt: Vec<f64>,
}

pub(crate) fn tables() -> &'static Tables {
    static TABLES: OnceLock<Tables> = OnceLock::new();
    TABLES.get_or_init(|| {
        let mut ln = Vec::with_capacity(TABLE_LEN + 1);
        let mut inv_sqrt = Vec::with_capacity(TABLE_LEN + 1);
        ln.push(f64::NAN);
        inv_sqrt.push(f64::NAN);
        for n in 1..=TABLE_LEN {
            let x = n as f64;
            ln.push(x.ln());
            inv_sqrt.push(1.0 / x.sqrt());
        }
        Tables { ln, inv_sqrt }
    })
}

pub(crate) fn remainder_bound(t: f64, order: usize) -> f64 {
    let k = order.min(REMAINDER_BOUND.len() - 1);
    REMAINDER_BOUND[k] * t.powf(-(2.0 * k as f64 + 3.0) / 4.0)
}

/// π split so that k·PI_A and k·PI_B are exact for |k| < 2^29.
const PI_A: f64 = 3.141_592_502_593_994_140_62;
const PI_B: f64 = 1.509_957_883_172_319_270_672e-7;
const PI_C: f64 = 1.078_060_571_631_623_810_58e-14;
/// Adding and subtracting this rounds a double of magnitude < 2^51 to an integer.
const ROUND_MAGIC: f64 = 6_755_399_441_055_744.0;

/// cos x for |x| < 1.6e9 with absolute error below 1e-15 + 2e-16·|x|.
///
/// Branch-free so the main sum vectorizes: x = kπ + r with |r| ≤ π/2, then
/// cos x = (−1)^k cos r, with cos r from its Taylor series through r²⁰.
#[inline(always)]
pub(crate) fn fast_cos(x: f64) -> f64 {
    let k = (x * std::f64::consts::FRAC_1_PI + ROUND_MAGIC) - ROUND_MAGIC;
    let r = ((x - k * PI_A) - k * PI_B) - k * PI_C;
    let half = (k * 0.5 + ROUND_MAGIC) - ROUND_MAGIC;
    let sign = 1.0 - 2.0 * (k - 2.0 * half).abs();
    let r2 = r * r;
    let p = COS_TAYLOR.iter().rev().fold(0.0, |acc, c| acc * r2 + c);
    sign * p
}

/// (−1)^j / (2j)!, j = 0..=10.
const COS_TAYLOR: [f64; 11] = [
    1.0,
    -0.5,
    0.041666666666666664,
    -0.001388888888888889,
    2.48015873015873e-05,
    -2.755731922398589e-07,
    2.08767569878681e-09,
    -1.1470745597729725e-11,
    4.779477332387385e-14,
    -1.5619206968586225e-16,
    4.110317623312165e-19,
];

#[cfg(test)]
fn horner(coeffs: &[f64], z: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * z + c)
}

/// Σ w_k cos(θ − t l_k) with eight lane accumulators, summed in a fixed order.
#[inline(always)]
fn main_sum_lanes(theta: f64, t: f64, w: &[f64], l: &[f64]) -> f64 {
    const LANES: usize = 8;
    let mut acc = [0.0; LANES];
    let (wc, wr) = w.split_at(w.len() - w.len() % LANES);
    let (lc, lr) = l.split_at(wc.len());
    for (wk, lk) in wc.chunks_exact(LANES).zip(lc.chunks_exact(LANES)) {
        for j in 0..LANES {
            acc[j] += wk[j] * fast_cos(theta - t * lk[j]);
        }
    }
    for (j, (wk, lk)) in wr.iter().zip(lr).enumerate() {
        acc[j] += wk * fast_cos(theta - t * lk);
    }
    ((acc[0] + acc[4]) + (acc[2] + acc[6])) + ((acc[1] + acc[5]) + (acc[3] + acc[7]))
}

#[cfg(target_arch = "x86_64")]
#[target_feature(enable = "avx2")]
unsafe fn main_sum_avx2(theta: f64, t: f64, w: &[f64], l: &[f64]) -> f64 {
    main_sum_lanes(theta, t, w, l)
}

/// Same arithmetic on every path (no fused operations), so results do not
/// depend on which one runs.
fn main_sum(theta: f64, t: f64, w: &[f64], l: &[f64]) -> f64 {
    #[cfg(target_arch = "x86_64")]
    {
        if std::arch::is_x86_feature_detected!("avx2") {
            // SAFETY: the feature was detected at runtime
            return unsafe { main_sum_avx2(theta, t, w, l) };
        }
    }
    main_sum_lanes(theta, t, w, l)
}

/// Σ_{k≤order} C_k(z) a^{-k}, with the Horner chains of all tables interleaved.
fn corrections(z: f64, inv_a: f64, order: usize) -> f64 {
    let tables: [&[f64]; 5] = [
        &rs_tables::C0,
        &rs_tables::C1,
        &rs_tables::C2,
        &rs_tables::C3,
        &rs_tables::C4,
    ];
    let used = order.min(4) + 1;
    let longest = tables[..used].iter().map(|c| c.len()).max().unwrap_or(0);
    let mut h = [0.0; 5];
    for i in (0..longest).rev() {
        for (k, c) in tables[..used].iter().enumerate() {
            h[k] = h[k] * z + c.get(i).copied().unwrap_or(0.0);
        }
    }
    h[..used].iter().rev().fold(0.0, |acc, v| acc * inv_a + v)
}

/// Z(t) from the main sum plus corrections C_0..C_order.
///
/// Caller guarantees `t >= 2π` and `sqrt(t/2π) <= TABLE_LEN`.
pub(crate) fn hardy_z_rs(t: f64, theta: f64, order: usize) -> f64 {
    let a = (t / (2.0 * PI)).sqrt();
    let n = a.floor() as usize;
    let p = a - n as f64;

    let tab = tables();
    let main = main_sum(theta, t, &tab.inv_sqrt[1..=n], &tab.ln[1..=n]);

    let inv_a = 1.0 / a;
    let corr = corrections(2.0 * p - 1.0, inv_a, order);
    let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
    2.0 * main + sign * inv_a.sqrt() * corr
}
