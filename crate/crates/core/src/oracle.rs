//! Brute-force references: a time-stepped fluid simulation of evacuation,
//! grid enumeration of two-varying scenarios, dense-sweep minmax regret,
//! exact candidate-enumeration profile minima and SHIFT monotonicity checks.
//!
//! Nothing here uses the closed-form envelope or profile machinery.

use std::collections::VecDeque;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{precondition, Error, Result};
use crate::evacuation::{optimal_sink, theta};
use crate::path_model::{PathInstance, Scenario};
use crate::pwl::PwlFunction;
use crate::rational::{ceil_int, frac, int, max_q, min_q, zero, Q};

#[derive(Debug, Clone)]
pub struct SimConfig {
    pub dt: Q,
    pub max_time: Q,
}

impl SimConfig {
    pub fn new(dt: Q) -> SimConfig {
        SimConfig {
            dt,
            max_time: int(1_000_000),
        }
    }
}

#[derive(Debug, Clone)]
pub struct GridConfig {
    pub h: Q,
}

/// One hop of a chain toward the sink.
struct Hop {
    length: Q,
    capacity: Q,
}

/// Simulates one side: `weights[t]` starts at the t-th chain vertex and
/// leaves through `hops[t]`; the last hop ends at the sink. Returns the step
/// at which the last flow arrives (0 if there is nothing to move).
fn simulate_chain(weights: &[Q], hops: &[Hop], dt: &Q, max_steps: &BigInt) -> Result<u64> {
    if weights.iter().all(|w| w.is_zero()) {
        return Ok(0);
    }
    let mut scale = BigInt::one();
    for w in weights {
        scale = scale.lcm(w.denom());
    }
    for h in hops {
        scale = scale.lcm((&h.capacity * dt).denom());
    }
    let to_int = |x: &Q| -> Result<i128> {
        (x * Q::from_integer(scale.clone()))
            .to_integer()
            .to_i128()
            .ok_or_else(|| Error::Precondition("simulation amounts overflow".into()))
    };
    let mut buf: Vec<i128> = weights.iter().map(&to_int).collect::<Result<_>>()?;
    let cap: Vec<i128> = hops
        .iter()
        .map(|h| to_int(&(&h.capacity * dt)))
        .collect::<Result<_>>()?;
    let delay: Vec<u64> = hops
        .iter()
        .map(|h| ceil_int(&(&h.length / dt)).to_u64().unwrap_or(u64::MAX))
        .collect();
    let limit = max_steps.to_u64().unwrap_or(u64::MAX);
    let m = hops.len();
    let mut transit: Vec<VecDeque<(u64, i128)>> = vec![VecDeque::new(); m];
    let mut remaining: i128 = buf.iter().sum();
    let mut step: u64 = 0;
    let mut last = 0;
    loop {
        for t in 0..m {
            while let Some(&(due, amt)) = transit[t].front() {
                if due > step {
                    break;
                }
                transit[t].pop_front();
                if t + 1 == m {
                    remaining -= amt;
                    last = due;
                } else {
                    buf[t + 1] += amt;
                }
            }
        }
        if remaining == 0 {
            return Ok(last);
        }
        for t in 0..m {
            let a = buf[t].min(cap[t]);
            if a > 0 {
                buf[t] -= a;
                transit[t].push_back((step + 1 + delay[t], a));
            }
        }
        step += 1;
        if step > limit {
            return Err(Error::TimeCap(Q::from_integer(max_steps.clone()) * dt));
        }
    }
}

/// Evacuation time to `x` by time-stepped fluid simulation. The result is
/// a step boundary and overestimates the exact time by O(n dt).
pub fn simulate_evacuation(p: &PathInstance, x: &Q, s: &Scenario, cfg: &SimConfig) -> Result<Q> {
    p.check_point(x)?;
    if !cfg.dt.is_positive() {
        return precondition("dt must be positive");
    }
    if s.len() != p.n() + 1 {
        return precondition("scenario length does not match the instance");
    }
    let max_steps = ceil_int(&(&cfg.max_time / &cfg.dt));
    let left_end = p.count_left(x);
    let mut weights = vec![];
    let mut hops = vec![];
    for t in 0..left_end {
        weights.push(s.w(t).clone());
        let next = if t + 1 < left_end {
            p.x(t + 1).clone()
        } else {
            x.clone()
        };
        hops.push(Hop {
            length: next - p.x(t),
            capacity: p.capacities()[t].clone(),
        });
    }
    let left = simulate_chain(&weights, &hops, &cfg.dt, &max_steps)?;
    let right_start = p.count_at_or_left(x);
    let mut weights = vec![];
    let mut hops = vec![];
    for t in (right_start..=p.n()).rev() {
        weights.push(s.w(t).clone());
        let next = if t > right_start { p.x(t - 1).clone() } else { x.clone() };
        hops.push(Hop {
            length: p.x(t) - next,
            capacity: p.capacities()[t - 1].clone(),
        });
    }
    let right = simulate_chain(&weights, &hops, &cfg.dt, &max_steps)?;
    Ok(Q::from_integer(BigInt::from(left.max(right))) * &cfg.dt)
}

/// `lo, lo + h, ...` plus `hi` and every anchor inside `[lo, hi]`.
pub fn grid_points(lo: &Q, hi: &Q, h: &Q, anchors: &[Q]) -> Vec<Q> {
    let mut out = vec![];
    let mut v = lo.clone();
    while &v < hi {
        out.push(v.clone());
        v += h;
    }
    out.push(hi.clone());
    out.extend(anchors.iter().filter(|a| *a >= lo && *a <= hi).cloned());
    out.sort();
    out.dedup();
    out
}

/// Every grid scenario `s_{i,j}(alpha, beta)` of the two-varying families.
fn grid_scenarios(p: &PathInstance, cfg: &GridConfig) -> Vec<Scenario> {
    let n = p.n();
    let axes: Vec<Vec<Q>> = (0..=n)
        .map(|i| grid_points(p.lo(i), p.hi(i), &cfg.h, &[zero(), p.lo(i).clone(), p.hi(i).clone()]))
        .collect();
    let mut out = vec![];
    for i in 0..=n {
        for j in i..=n {
            for a in &axes[i] {
                if i == j {
                    out.push(p.two_varying(i, j, a.clone(), a.clone()).unwrap());
                    continue;
                }
                for b in &axes[j] {
                    out.push(p.two_varying(i, j, a.clone(), b.clone()).unwrap());
                }
            }
        }
    }
    out
}

/// Grid lower bound on `R_max(x)` for several sinks at once.
pub fn grid_rmax_many(p: &PathInstance, xs: &[Q], cfg: &GridConfig) -> Result<Vec<Q>> {
    for x in xs {
        p.check_point(x)?;
    }
    let mut best = vec![zero(); xs.len()];
    for s in grid_scenarios(p, cfg) {
        let opt = optimal_sink(p, &s)?.value;
        for (b, x) in best.iter_mut().zip(xs) {
            let r = theta(p, x, &s)?.theta - &opt;
            if r > *b {
                *b = r;
            }
        }
    }
    Ok(best)
}

/// Max regret at `x` over the grid of two-varying scenarios.
pub fn grid_rmax(p: &PathInstance, x: &Q, cfg: &GridConfig) -> Result<Q> {
    Ok(grid_rmax_many(p, std::slice::from_ref(x), cfg)?.remove(0))
}

/// Minimum of the grid `R_max` over all vertices plus `samples` uniform
/// points; the leftmost minimiser is returned.
pub fn sweep_ropt(p: &PathInstance, cfg: &GridConfig, samples: usize) -> Result<(Q, Q)> {
    if samples < p.n() + 1 {
        return precondition("need at least one sample per vertex");
    }
    let mut xs: Vec<Q> = p.positions().to_vec();
    for k in 0..=samples {
        xs.push(p.length() * frac(k as i64, samples as i64));
    }
    xs.sort();
    xs.dedup();
    let vals = grid_rmax_many(p, &xs, cfg)?;
    let mut best = 0;
    for k in 1..xs.len() {
        if vals[k] < vals[best] {
            best = k;
        }
    }
    Ok((xs[best].clone(), vals[best].clone()))
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ShiftReport {
    pub trials: usize,
    pub checked: usize,
    pub violations: Vec<String>,
}

fn random_in(rng: &mut ChaCha8Rng, lo: &Q, hi: &Q, den: i64) -> Q {
    let t = frac(rng.gen_range(0..=den), den);
    lo + (hi - lo) * t
}

/// Random valid SHIFT moves: weight moved rightwards never increases the
/// evacuation time to a sink at or beyond the receiving vertex, and
/// symmetrically to the left.
pub fn check_shift(p: &PathInstance, trials: usize, seed: u64) -> Result<ShiftReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = p.n();
    let mut report = ShiftReport {
        trials,
        ..Default::default()
    };
    if n == 0 {
        return Ok(report);
    }
    for _ in 0..trials {
        let w: Vec<Q> = (0..=n).map(|t| random_in(&mut rng, p.lo(t), p.hi(t), 8)).collect();
        let s = Scenario::new(w)?;
        let i = rng.gen_range(0..=n);
        let j = rng.gen_range(0..=n);
        if i == j {
            continue;
        }
        let room = min_q(&(s.w(i) - p.lo(i)), &(p.hi(j) - s.w(j)));
        let delta = random_in(&mut rng, &zero(), &room, 8);
        let s2 = p.shift(&s, i, j, &delta)?;
        let x = if i < j {
            random_in(&mut rng, p.x(j), p.length(), 16)
        } else {
            random_in(&mut rng, &zero(), p.x(j), 16)
        };
        let before = theta(p, &x, &s)?.theta;
        let after = theta(p, &x, &s2)?.theta;
        report.checked += 1;
        if after > before || (delta.is_zero() && after != before) {
            report
                .violations
                .push(format!("shift({i},{j},{delta}) at x={x}: {before} -> {after}"));
        }
    }
    Ok(report)
}

/// Exact `min over a + b = alpha` (inside the box) of `max(fL(a), fR(b))`,
/// by enumerating every kink of the objective in `a`.
pub fn exact_min_max(fl: &PwlFunction, fr: &PwlFunction, a: (&Q, &Q), b: (&Q, &Q), alpha: &Q) -> Option<Q> {
    let forms = [(int(1), zero(), zero()), (zero(), int(1), zero())];
    exact_split_min(fl, fr, a, b, alpha, &forms)
}

/// Exact `min over the box slice and y in [l, r]` of
/// `max(fL(a) + y, fR(b) - y)`, using that the inner minimum over `y` is
/// `max(fL + l, fR - r, (fL + fR) / 2)`.
pub fn exact_min_max_y(
    fl: &PwlFunction,
    fr: &PwlFunction,
    a: (&Q, &Q),
    b: (&Q, &Q),
    l: &Q,
    r: &Q,
    alpha: &Q,
) -> Option<Q> {
    let forms = [
        (int(1), zero(), l.clone()),
        (zero(), int(1), -r),
        (frac(1, 2), frac(1, 2), zero()),
    ];
    exact_split_min(fl, fr, a, b, alpha, &forms)
}

/// Minimises `max_k (cu_k * fL(a) + cv_k * fR(alpha - a) + e_k)` over the
/// feasible `a`. Each form is linear between consecutive breakpoints, so the
/// minimum sits at a breakpoint or where two forms cross.
fn exact_split_min(
    fl: &PwlFunction,
    fr: &PwlFunction,
    a: (&Q, &Q),
    b: (&Q, &Q),
    alpha: &Q,
    forms: &[(Q, Q, Q)],
) -> Option<Q> {
    let lo = max_q(a.0, &(alpha - b.1));
    let hi = min_q(a.1, &(alpha - b.0));
    if lo > hi {
        return None;
    }
    let obj_parts = |x: &Q| -> Vec<Q> {
        let u = fl.evaluate(x).unwrap();
        let v = fr.evaluate(&(alpha - x)).unwrap();
        forms.iter().map(|(cu, cv, e)| cu * &u + cv * &v + e).collect()
    };
    let mut cuts = vec![lo.clone(), hi.clone()];
    cuts.extend(fl.breakpoints().iter().cloned());
    cuts.extend(fr.breakpoints().iter().map(|q| alpha - q));
    cuts.retain(|c| c >= &lo && c <= &hi);
    cuts.sort();
    cuts.dedup();
    let mut cands = cuts.clone();
    for w in cuts.windows(2) {
        let (p0, p1) = (obj_parts(&w[0]), obj_parts(&w[1]));
        for x in 0..forms.len() {
            for y in x + 1..forms.len() {
                let d0 = &p0[x] - &p0[y];
                let d1 = &p1[x] - &p1[y];
                if (d0.is_positive() && d1.is_negative()) || (d0.is_negative() && d1.is_positive()) {
                    let t = &d0 / (&d0 - &d1);
                    cands.push(&w[0] + (&w[1] - &w[0]) * t);
                }
            }
        }
    }
    cands.iter().map(|x| obj_parts(x).into_iter().max().unwrap()).min()
}

/// Grid version of the profile: the minimum over `a` on a grid of spacing
/// `h` (box corners included) instead of the exact minimum.
pub fn grid_min_max(fl: &PwlFunction, fr: &PwlFunction, a: (&Q, &Q), b: (&Q, &Q), alpha: &Q, h: &Q) -> Option<Q> {
    let lo = max_q(a.0, &(alpha - b.1));
    let hi = min_q(a.1, &(alpha - b.0));
    if lo > hi {
        return None;
    }
    grid_points(&lo, &hi, h, &[a.0.clone(), a.1.clone()])
        .iter()
        .map(|x| max_q(&fl.evaluate(x).unwrap(), &fr.evaluate(&(alpha - x)).unwrap()))
        .min()
}

/// Grid version over `(a, y)`: `a` on the `h`-grid and `y` on the `h`-grid of
/// `[l, r]` (endpoints included).
#[allow(clippy::too_many_arguments)]
pub fn grid_min_max_y(
    fl: &PwlFunction,
    fr: &PwlFunction,
    a: (&Q, &Q),
    b: (&Q, &Q),
    l: &Q,
    r: &Q,
    alpha: &Q,
    h: &Q,
) -> Option<Q> {
    let lo = max_q(a.0, &(alpha - b.1));
    let hi = min_q(a.1, &(alpha - b.0));
    if lo > hi {
        return None;
    }
    let ys = grid_points(l, r, h, &[]);
    grid_points(&lo, &hi, h, &[a.0.clone(), a.1.clone()])
        .iter()
        .map(|x| {
            let u = fl.evaluate(x).unwrap();
            let v = fr.evaluate(&(alpha - x)).unwrap();
            ys.iter().map(|y| max_q(&(&u + y), &(&v - y))).min().unwrap()
        })
        .min()
}

/// Least evacuation time over sinks on edge `k` for `base` with `w_i = a`
/// and `w_j = alpha - a`, minimised over `a` on an `h`-grid of the box.
#[allow(clippy::too_many_arguments)]
pub fn grid_edge_profile(
    p: &PathInstance,
    base: &Scenario,
    i: usize,
    j: usize,
    k: usize,
    a: (&Q, &Q),
    b: (&Q, &Q),
    alpha: &Q,
    h: &Q,
) -> Result<Option<Q>> {
    let lo = max_q(a.0, &(alpha - b.1));
    let hi = min_q(a.1, &(alpha - b.0));
    if lo > hi {
        return Ok(None);
    }
    let mut best: Option<Q> = None;
    for a1 in grid_points(&lo, &hi, h, &[a.0.clone(), a.1.clone()]) {
        let s = base.substitute(i, a1.clone())?.substitute(j, alpha - &a1)?;
        let (_, v) = crate::evacuation::theta_min_on_edge(p, k, &s)?;
        if best.as_ref().is_none_or(|b| v < *b) {
            best = Some(v);
        }
    }
    Ok(best)
}
