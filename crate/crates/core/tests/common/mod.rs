#![allow(dead_code)]

use pathregret::path_model::{PathInstance, Scenario};
use pathregret::pwl::{Line, PwlFunction};
use pathregret::rational::{frac, int};
use pathregret::Q;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn qs(v: &[i64]) -> Vec<Q> {
    v.iter().map(|&x| int(x)).collect()
}

pub fn t1() -> PathInstance {
    PathInstance::new(qs(&[0, 1, 2]), qs(&[1, 2]), qs(&[0, 0, 0]), qs(&[2, 2, 2])).unwrap()
}

pub fn scenario(v: &[i64]) -> Scenario {
    Scenario::new(qs(v)).unwrap()
}

/// Uniform rational in `[lo, hi]` with denominator `den`.
pub fn rq(rng: &mut ChaCha8Rng, lo: i64, hi: i64, den: i64) -> Q {
    frac(rng.gen_range(lo * den..=hi * den), den)
}

/// Random instance: `n` edges, lengths and capacities in `[1/4, 4]`,
/// weight intervals starting in `[0, lo_max]` with widths up to `width`.
pub fn random_instance(rng: &mut ChaCha8Rng, n: usize, lo_max: i64, width: Q) -> PathInstance {
    let lengths: Vec<Q> = (0..n).map(|_| rq(rng, 1, 16, 4) / int(4)).collect();
    let caps: Vec<Q> = (0..n).map(|_| rq(rng, 1, 16, 4) / int(4)).collect();
    let lo: Vec<Q> = (0..=n).map(|_| rq(rng, 0, lo_max, 4)).collect();
    let hi: Vec<Q> = lo
        .iter()
        .map(|l| {
            let k = rng.gen_range(0..=8);
            l + &width * frac(k, 8)
        })
        .collect();
    PathInstance::from_lengths(&lengths, caps, lo, hi).unwrap()
}

pub fn random_scenario(rng: &mut ChaCha8Rng, p: &PathInstance) -> Scenario {
    let w = (0..=p.n())
        .map(|t| {
            let k = rng.gen_range(0..=8);
            p.lo(t) + (p.hi(t) - p.lo(t)) * frac(k, 8)
        })
        .collect();
    Scenario::new(w).unwrap()
}

/// Random good function on `[lo, lo + span]` with `size` pieces. `convex`
/// sorts the slopes; `flat_start` forces a zero first slope.
pub fn random_pwl(rng: &mut ChaCha8Rng, lo: &Q, span: i64, size: usize, convex: bool, flat_start: bool) -> PwlFunction {
    let hi = lo + int(span);
    let mut cuts: Vec<Q> = (1..size).map(|_| lo + rq(rng, 0, span, 16)).collect();
    cuts.retain(|c| c > lo && c < &hi);
    cuts.sort();
    cuts.dedup();
    let mut slopes: Vec<Q> = (0..=cuts.len()).map(|_| rq(rng, 1, 12, 4) / int(4)).collect();
    if convex {
        slopes.sort();
        slopes.dedup();
        while slopes.len() < cuts.len() + 1 {
            let s = slopes.last().unwrap() + frac(1, 3);
            slopes.push(s);
        }
    }
    if flat_start {
        slopes[0] = int(0);
        if convex {
            slopes.sort();
        }
    }
    let mut breaks = vec![lo.clone()];
    breaks.extend(cuts);
    breaks.push(hi);
    let mut lines = vec![];
    let mut v = rq(rng, 0, 4, 4);
    for (k, m) in slopes.iter().enumerate() {
        let b = &v - m * &breaks[k];
        lines.push(Line::new(m.clone(), b.clone()));
        v = m * &breaks[k + 1] + b;
    }
    PwlFunction::from_parts(breaks, lines).unwrap()
}
