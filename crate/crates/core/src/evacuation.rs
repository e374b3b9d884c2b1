//! Closed-form evacuation times, optimal sinks and per-scenario regret.

use num_traits::{Signed, Zero};

use crate::error::{precondition, Error, Result};
use crate::path_model::{PathInstance, Point, Scenario};
use crate::rational::{half, max_q, zero, Q};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvacResult {
    pub theta_left: Q,
    pub theta_right: Q,
    pub theta: Q,
    /// Left critical vertex; `None` when nothing left of the sink carries weight.
    pub lcv: Option<usize>,
    pub rcv: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OptSink {
    pub location: Point,
    pub value: Q,
}

fn check_scenario(p: &PathInstance, s: &Scenario) -> Result<()> {
    if s.len() != p.n() + 1 {
        return precondition(format!(
            "scenario has {} weights, instance has {} vertices",
            s.len(),
            p.n() + 1
        ));
    }
    Ok(())
}

/// `g_i(x)`: time for everything on `x_0..=x_i` to reach a sink at `x > x_i`.
pub fn g_term(p: &PathInstance, i: usize, x: &Q, s: &Scenario) -> Result<Q> {
    p.check_index(i)?;
    p.check_point(x)?;
    check_scenario(p, s)?;
    if p.x(i) >= x {
        return precondition("g_i requires x_i < x");
    }
    let w = s.range_weight(0, i + 1);
    if w.is_zero() {
        return Ok(zero());
    }
    let c = p.min_capacity_between(i, p.count_left(x)).expect("nonempty edge range");
    Ok(x - p.x(i) + w / c)
}

/// `h_i(x)`: time for everything on `x_i..=x_n` to reach a sink at `x < x_i`.
pub fn h_term(p: &PathInstance, i: usize, x: &Q, s: &Scenario) -> Result<Q> {
    p.check_index(i)?;
    p.check_point(x)?;
    check_scenario(p, s)?;
    if p.x(i) <= x {
        return precondition("h_i requires x < x_i");
    }
    let w = s.range_weight(i, p.n() + 1);
    if w.is_zero() {
        return Ok(zero());
    }
    let c = p
        .min_capacity_between(p.count_at_or_left(x) - 1, i)
        .expect("nonempty edge range");
    Ok(p.x(i) - x + w / c)
}

/// Left evacuation time at an arbitrary point by direct maximisation over
/// `g_i`, with its critical vertex (ties go to the index closest to `x`).
fn left_direct(p: &PathInstance, x: &Q, s: &Scenario) -> (Q, Option<usize>) {
    let j = p.count_left(x);
    let mut best = zero();
    let mut arg = None;
    let mut cap: Option<Q> = None;
    for i in (0..j).rev() {
        let c = match cap {
            Some(c) if &c <= p.capacities().get(i).unwrap() => c,
            _ => p.capacities()[i].clone(),
        };
        let w = s.range_weight(0, i + 1);
        if !w.is_zero() {
            let v = x - p.x(i) + &w / &c;
            if arg.is_none() || v > best {
                best = v;
                arg = Some(i);
            }
        }
        cap = Some(c);
    }
    (best, arg)
}

fn right_direct(p: &PathInstance, x: &Q, s: &Scenario) -> (Q, Option<usize>) {
    let start = p.count_at_or_left(x);
    let mut best = zero();
    let mut arg = None;
    let mut cap: Option<Q> = None;
    for i in start..=p.n() {
        let c = match cap {
            Some(c) if c <= p.capacities()[i - 1] => c,
            _ => p.capacities()[i - 1].clone(),
        };
        let w = s.range_weight(i, p.n() + 1);
        if !w.is_zero() {
            let v = p.x(i) - x + &w / &c;
            if arg.is_none() || v > best {
                best = v;
                arg = Some(i);
            }
        }
        cap = Some(c);
    }
    (best, arg)
}

/// Evacuation times at `x`. At a vertex the one-sided maxima are taken
/// directly; strictly inside edge `k` they are obtained from the endpoint
/// values by unit-slope translation.
pub fn theta(p: &PathInstance, x: &Q, s: &Scenario) -> Result<EvacResult> {
    p.check_point(x)?;
    check_scenario(p, s)?;
    let (theta_left, lcv, theta_right, rcv) = if p.vertex_at(x).is_some() {
        let (l, lc) = left_direct(p, x, s);
        let (r, rc) = right_direct(p, x, s);
        (l, lc, r, rc)
    } else {
        let k = p.count_left(x) - 1;
        let (l1, lc) = left_direct(p, p.x(k + 1), s);
        let (r0, rc) = right_direct(p, p.x(k), s);
        let l = max_q(&(l1 - (p.x(k + 1) - x)), &zero());
        let r = max_q(&(r0 - (x - p.x(k))), &zero());
        (l, lc, r, rc)
    };
    let theta = max_q(&theta_left, &theta_right);
    Ok(EvacResult {
        theta_left,
        theta_right,
        theta,
        lcv,
        rcv,
    })
}

/// Evacuation times at `x` by direct maximisation over all terms, valid at
/// any point; used to cross-check the edge-translation identities.
pub fn theta_direct(p: &PathInstance, x: &Q, s: &Scenario) -> Result<EvacResult> {
    p.check_point(x)?;
    check_scenario(p, s)?;
    let (theta_left, lcv) = left_direct(p, x, s);
    let (theta_right, rcv) = right_direct(p, x, s);
    let theta = max_q(&theta_left, &theta_right);
    Ok(EvacResult {
        theta_left,
        theta_right,
        theta,
        lcv,
        rcv,
    })
}

/// Minimum of `theta` over the closed edge `[x_k, x_{k+1}]` with its
/// leftmost minimiser.
pub fn theta_min_on_edge(p: &PathInstance, k: usize, s: &Scenario) -> Result<(Q, Q)> {
    p.check_edge(k)?;
    check_scenario(p, s)?;
    let (a, b) = (p.x(k), p.x(k + 1));
    let (l_a, _) = left_direct(p, a, s);
    let (r_a, _) = right_direct(p, a, s);
    let (l_b, _) = left_direct(p, b, s);
    let (r_b, _) = right_direct(p, b, s);
    let at_a = max_q(&l_a, &r_a);
    let at_b = max_q(&l_b, &r_b);
    let mut best = (a.clone(), at_a);
    let y = half(&(&r_a - &l_b + a + b));
    if &y > a && &y < b {
        let line = &r_a - (&y - a);
        let (loc, val) = if line.is_negative() {
            (a + &r_a, zero())
        } else {
            (y, line)
        };
        if val < best.1 {
            best = (loc, val);
        }
    }
    if at_b < best.1 {
        best = (b.clone(), at_b);
    }
    Ok(best)
}

/// The optimal sink: a binary search for the first vertex where the left
/// time dominates the right, then exact edge minimisation around it.
pub fn optimal_sink(p: &PathInstance, s: &Scenario) -> Result<OptSink> {
    check_scenario(p, s)?;
    let n = p.n();
    if n == 0 || s.total().is_zero() {
        return Ok(OptSink {
            location: p.vertex_point(0),
            value: zero(),
        });
    }
    let left_wins = |m: usize| {
        let (l, _) = left_direct(p, p.x(m), s);
        let (r, _) = right_direct(p, p.x(m), s);
        l >= r
    };
    let (mut lo, mut hi) = (0usize, n);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if left_wins(mid) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    let m = lo;
    let first = m.saturating_sub(2);
    let last = (m + 1).min(n);
    let mut best: Option<(Q, Q)> = None;
    for k in first..last {
        let (loc, val) = theta_min_on_edge(p, k, s)?;
        let better = match &best {
            None => true,
            Some((bl, bv)) => val < *bv || (val == *bv && loc < *bl),
        };
        if better {
            best = Some((loc, val));
        }
    }
    let (loc, value) = best.expect("at least one edge");
    Ok(OptSink {
        location: p.point(loc)?,
        value,
    })
}

/// `Theta(x : s) - Theta_OPT(s)`.
pub fn regret(p: &PathInstance, x: &Q, s: &Scenario) -> Result<Q> {
    let t = theta(p, x, s)?.theta;
    let opt = optimal_sink(p, s)?.value;
    let r = t - opt;
    if r.is_negative() {
        return Err(Error::Precondition(format!("negative regret {r}")));
    }
    Ok(r)
}
