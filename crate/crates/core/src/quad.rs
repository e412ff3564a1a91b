//! Globally adaptive Gauss–Kronrod (7/15) quadrature.

use alloc::collections::BinaryHeap;
use core::cmp::Ordering;

use crate::math::{exp, fabs, log};

// Nodes and weights as tabulated, digits beyond f64 included.

#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
// Gauss weights for the odd-indexed Kronrod nodes 1, 3, 5 and the centre.
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Absolute and relative error targets; the integral is accepted when the
/// summed error estimate is below `max(abs, rel * |value|)`.
#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_intervals: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            abs: 1e-12,
            rel: 1e-10,
            max_intervals: 4000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
    pub converged: bool,
}

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let centre = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(centre);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let sum = f(centre - dx) + f(centre + dx);
        kronrod += WGK[j] * sum;
        if j % 2 == 1 {
            gauss += WG[j / 2] * sum;
        }
    }
    (kronrod * half, fabs((kronrod - gauss) * half))
}

/// Single non-adaptive 15-point Kronrod panel on `[a, b]`.
pub fn panel<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64) -> f64 {
    gk15(&mut f, a, b).0
}

struct Piece {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Integrates `f` over `[a, b]` (either orientation).
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: Tolerance) -> Integral {
    if a == b {
        return Integral {
            value: 0.0,
            error: 0.0,
            converged: true,
        };
    }
    if b < a {
        let r = integrate(f, b, a, tol);
        return Integral { value: -r.value, ..r };
    }
    let (value, error) = gk15(&mut f, a, b);
    let mut total = value;
    let mut total_err = error;
    let mut heap = BinaryHeap::new();
    heap.push(Piece { a, b, value, error });
    while total_err > tol.abs.max(tol.rel * fabs(total)) {
        if heap.len() >= tol.max_intervals {
            return Integral {
                value: total,
                error: total_err,
                converged: false,
            };
        }
        let worst = heap.pop().expect("nonempty heap");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // interval no longer representable
            heap.push(worst);
            return Integral {
                value: total,
                error: total_err,
                converged: false,
            };
        }
        let (v1, e1) = gk15(&mut f, worst.a, mid);
        let (v2, e2) = gk15(&mut f, mid, worst.b);
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.error;
        heap.push(Piece {
            a: worst.a,
            b: mid,
            value: v1,
            error: e1,
        });
        heap.push(Piece {
            a: mid,
            b: worst.b,
            value: v2,
            error: e2,
        });
    }
    // re-sum to shed the drift of the incremental updates
    let value = heap.iter().map(|p| p.value).sum();
    let error = heap.iter().map(|p| p.error).sum();
    Integral {
        value,
        error,
        converged: true,
    }
}

/// Integrates `f(s) ds` over `[a, b]` with `0 < a, b` using the substitution
/// `s = e^t`, which keeps integrands spanning several decades well resolved.
pub fn integrate_log<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: Tolerance) -> Integral {
    debug_assert!(a > 0.0 && b > 0.0);
    integrate(
        |t| {
            let s = exp(t);
            f(s) * s
        },
        log(a),
        log(b),
        tol,
    )
}

/// Integrates over `[0, hi]` by splitting at decades below `scale`, so that
/// features near the origin at scale `scale` are not missed.
pub fn integrate_from_zero<F: FnMut(f64) -> f64>(mut f: F, scale: f64, hi: f64, tol: Tolerance) -> Integral {
    let mut edges = alloc::vec![0.0];
    let mut x = scale.min(hi) * 1e-6;
    while x < hi {
        edges.push(x);
        x *= 10.0;
    }
    edges.push(hi);
    let mut out = Integral {
        value: 0.0,
        error: 0.0,
        converged: true,
    };
    for w in edges.windows(2) {
        let r = integrate(&mut f, w[0], w[1], tol);
        out.value += r.value;
        out.error += r.error;
        out.converged &= r.converged;
    }
    out
}
