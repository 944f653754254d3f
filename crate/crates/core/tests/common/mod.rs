//! Test-only oracles, independent of the library's numerical paths.
#![allow(dead_code, clippy::excessive_precision)]

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

/// Exact moments m_k = ∫_{-1}^{1} (1-z)^a z^k dz, k = 0..=kmax, for a = num/den.
///
/// With x = 1 - z the moment is Σ_j C(k,j) (-1)^j 2^{a+j+1}/(a+j+1); the sum
/// without the 2^{a+1} factor is rational and is accumulated exactly.
pub fn kernel_moments(num: i64, den: i64, kmax: usize) -> Vec<f64> {
    let a = num as f64 / den as f64;
    let prefactor = 2f64.powf(a + 1.0);
    (0..=kmax)
        .map(|k| {
            let mut sum = BigRational::zero();
            let mut binom = BigInt::one();
            for j in 0..=k {
                // C(k, j) (-2)^j den / (num + den (j + 1))
                let sign = if j % 2 == 0 { 1 } else { -1 };
                let numer = &binom * BigInt::from(sign) * (BigInt::one() << j) * BigInt::from(den);
                let denom = BigInt::from(num + den * (j as i64 + 1));
                sum += BigRational::new(numer, denom);
                binom = binom * BigInt::from((k - j) as i64) / BigInt::from(j as i64 + 1);
            }
            prefactor * sum.to_f64().expect("finite rational")
        })
        .collect()
}

/// Composite Gauss–Legendre integration with `panels` equal panels, using a
/// hard-coded 10-point rule so the check does not depend on the library.
pub fn gauss_legendre_composite<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, panels: usize) -> f64 {
    const X: [f64; 5] = [
        0.148_874_338_981_631_21,
        0.433_395_394_129_247_19,
        0.679_409_568_299_024_41,
        0.865_063_366_688_984_51,
        0.973_906_528_517_171_72,
    ];
    const W: [f64; 5] = [
        0.295_524_224_714_752_87,
        0.269_266_719_309_996_36,
        0.219_086_362_515_982_04,
        0.149_451_349_150_580_59,
        0.066_671_344_308_688_14,
    ];
    let h = (hi - lo) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let mid = lo + (p as f64 + 0.5) * h;
        let half = 0.5 * h;
        for (x, w) in X.iter().zip(W) {
            total += w * half * (f(mid - half * x) + f(mid + half * x));
        }
    }
    total
}

/// Geometrically graded composite Gauss–Legendre on [lo, hi] for integrands
/// with an integrable endpoint singularity or kink at `lo`.
pub fn graded_integral<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, levels: usize) -> f64 {
    let mut total = 0.0;
    let mut right = hi;
    for _ in 0..levels {
        let left = lo + 0.5 * (right - lo);
        total += gauss_legendre_composite(&f, left, right, 2);
        right = left;
    }
    total + gauss_legendre_composite(&f, lo, right, 1)
}
