//! Fixed-order Gauss–Legendre rules for integrating expressions between
//! nodes. Five points integrate polynomials up to degree nine exactly.

use crate::error::Result;

const NODES: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683_1,
    0.0,
    0.538_469_310_105_683_1,
    0.906_179_845_938_664,
];
const WEIGHTS: [f64; 5] = [
    0.236_926_885_056_189_1,
    0.478_628_670_499_366_5,
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_1,
];

/// Nodes on `[-1, 1]` and weights.
pub(crate) const GAUSS5: ([f64; 5], [f64; 5]) = (NODES, WEIGHTS);

/// `∫_a^b f` with the five-point rule.
pub(crate) fn gauss5(a: f64, b: f64, mut f: impl FnMut(f64) -> Result<f64>) -> Result<f64> {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut acc = 0.0;
    for (x, w) in NODES.iter().zip(WEIGHTS) {
        acc += w * f(mid + half * x)?;
    }
    Ok(acc * half)
}

/// `∫_a^b f` split into `pieces` equal panels.
pub(crate) fn gauss5_composite(
    a: f64,
    b: f64,
    pieces: usize,
    mut f: impl FnMut(f64) -> Result<f64>,
) -> Result<f64> {
    let pieces = pieces.max(1);
    let step = (b - a) / pieces as f64;
    let mut acc = 0.0;
    for k in 0..pieces {
        let lo = a + k as f64 * step;
        let hi = if k + 1 == pieces { b } else { lo + step };
        acc += gauss5(lo, hi, &mut f)?;
    }
    Ok(acc)
}
