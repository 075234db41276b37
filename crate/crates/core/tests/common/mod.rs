//! Independent reference implementations used by the integration tests and
//! the acceptance suite. Nothing here calls into the crate's numerics.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normal_vec(rng: &mut impl Rng, len: usize) -> Vec<f64> {
    (0..len).map(|_| rng.sample(StandardNormal)).collect()
}

pub fn normal_set(rng: &mut impl Rng, workers: usize, dim: usize) -> Vec<Vec<f64>> {
    (0..workers).map(|_| normal_vec(rng, dim)).collect()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Sorted-EMA momentum recomputed from scratch at every step.
///
/// Step `t` sorts every raw vector seen so far, forms the closed-form EMA
/// `beta^t s_0 + sum_{j=1..t} (1 - beta) beta^(t-j) s_j` per rank, and hands
/// rank `k` back to the worker that holds rank `k` at step `t`.
pub fn momentum_oracle(sequence: &[Vec<f64>], beta: f64) -> Vec<Vec<f64>> {
    let sorted: Vec<Vec<f64>> = sequence
        .iter()
        .map(|raw| {
            let mut v = raw.clone();
            v.sort_by(f64::total_cmp);
            v
        })
        .collect();
    let mut out = Vec::with_capacity(sequence.len());
    for (t, raw) in sequence.iter().enumerate() {
        let n = raw.len();
        let ema: Vec<f64> = (0..n)
            .map(|k| {
                let mut acc = beta.powi(t as i32) * sorted[0][k];
                for (j, s) in sorted.iter().enumerate().take(t + 1).skip(1) {
                    acc += (1.0 - beta) * beta.powi((t - j) as i32) * s[k];
                }
                acc
            })
            .collect();
        // rank of worker i = number of workers that sort strictly before it
        let smoothed = (0..n)
            .map(|i| {
                let rank = (0..n)
                    .filter(|&j| raw[j].total_cmp(&raw[i]).is_lt() || (raw[j] == raw[i] && j < i))
                    .count();
                ema[rank]
            })
            .collect();
        out.push(smoothed);
    }
    out
}

/// `A = E[ζζᵀ]` for `ζ ~ U[0,1]^d`: 1/3 on the diagonal, 1/4 elsewhere.
pub fn dense_second_moment(dim: usize) -> Vec<Vec<f64>> {
    (0..dim)
        .map(|i| {
            (0..dim)
                .map(|j| if i == j { 1.0 / 3.0 } else { 0.25 })
                .collect()
        })
        .collect()
}

pub fn mat_vec(m: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    m.iter().map(|row| dot(row, v)).collect()
}

/// Central finite differences of `f` at `x`.
pub fn finite_difference(f: impl Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|k| {
            probe[k] = x[k] + h;
            let up = f(&probe);
            probe[k] = x[k] - h;
            let down = f(&probe);
            probe[k] = x[k];
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// Double-double value `hi + lo`, enough precision that comparing two
/// nearby points of a quadratic is not swamped by rounding.
#[derive(Debug, Clone, Copy)]
struct Dd {
    hi: f64,
    lo: f64,
}

impl Dd {
    fn from(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }

    fn add(self, o: Dd) -> Dd {
        let s = self.hi + o.hi;
        let bb = s - self.hi;
        let err = (self.hi - (s - bb)) + (o.hi - bb);
        Dd::renorm(s, err + self.lo + o.lo)
    }

    fn mul(self, o: Dd) -> Dd {
        let p = self.hi * o.hi;
        let err = self.hi.mul_add(o.hi, -p);
        Dd::renorm(p, err + self.hi * o.lo + self.lo * o.hi)
    }

    fn renorm(hi: f64, lo: f64) -> Dd {
        let s = hi + lo;
        Dd {
            hi: s,
            lo: lo - (s - hi),
        }
    }

    fn lt(self, o: Dd) -> bool {
        self.hi < o.hi || (self.hi == o.hi && self.lo < o.lo)
    }
}

/// `24 * f(w - eta d)` for `f(w) = ½ wᵀAw` with the dense `A` above, written
/// as `sum r² + 3 (sum r)²`, in double-double.
fn scaled_objective_along(w: &[f64], d: &[f64], eta: f64) -> Dd {
    let mut sum = Dd::from(0.0);
    let mut sum_sq = Dd::from(0.0);
    let neg_eta = Dd::from(-eta);
    for (&wk, &dk) in w.iter().zip(d) {
        let r = Dd::from(wk).add(neg_eta.mul(Dd::from(dk)));
        sum = sum.add(r);
        sum_sq = sum_sq.add(r.mul(r));
    }
    sum_sq.add(Dd::from(3.0).mul(sum.mul(sum)))
}

/// Minimizer of `f(w - eta d)` by golden-section search on function values.
pub fn golden_section_step(w: &[f64], d: &[f64]) -> f64 {
    let f = |eta: f64| scaled_objective_along(w, d, eta);
    // bracket: by convexity the minimizer is below L once f rises past L/2
    let mut half = 1.0;
    while !(f(half / 2.0).lt(f(half)) && f(-half / 2.0).lt(f(-half))) {
        half *= 2.0;
        assert!(half < 1e12, "no bracket found");
    }
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (-half, half);
    let mut x1 = b - ratio * (b - a);
    let mut x2 = a + ratio * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..200 {
        if f1.lt(f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - ratio * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + ratio * (b - a);
            f2 = f(x2);
        }
        if b - a <= 1e-15 * half {
            break;
        }
    }
    0.5 * (a + b)
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    if v.len() % 2 == 1 {
        v[mid]
    } else {
        0.5 * (v[mid - 1] + v[mid])
    }
}
