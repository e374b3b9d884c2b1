//! Evacuation time at a fixed point as a function of one vertex weight.
//!
//! `LUE_{i,j}(alpha : s)` is the left evacuation time at `x_j` when `w_i` is
//! replaced by `alpha`; `RUE_{i,j}` is its right-hand mirror. Both are upper
//! envelopes of lines in `alpha`, one per vertex on that side of `x_j`.
//!
//! A term whose cumulative weight is zero contributes 0 instead of its
//! distance term, so a line whose only weight is `alpha` itself drops to 0 at
//! `alpha = 0`. [`Envelope`] carries that one-point drop next to the
//! continuous body built from the linear extensions.

use num_traits::{One, Signed, Zero};

use crate::error::{precondition, Result};
use crate::path_model::{PathInstance, Scenario};
use crate::pwl::{Line, PartialPwl, PwlFunction};
use crate::rational::{max_q, zero, Q};

/// A good function that may be lower at its left end than its body.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Envelope {
    pub body: PwlFunction,
    /// Actual value at `body.lo()` when it is strictly below the body there.
    pub drop: Option<Q>,
}

impl Envelope {
    pub fn evaluate(&self, alpha: &Q) -> Result<Q> {
        if alpha == self.body.lo() {
            if let Some(d) = &self.drop {
                return Ok(d.clone());
            }
        }
        self.body.evaluate(alpha)
    }

    pub fn lo(&self) -> &Q {
        self.body.lo()
    }

    pub fn hi(&self) -> &Q {
        self.body.hi()
    }

    pub fn add_const(&self, c: &Q) -> Envelope {
        Envelope {
            body: self.body.add_const(c),
            drop: self.drop.as_ref().map(|d| d + c),
        }
    }

    pub fn to_partial(&self) -> PartialPwl {
        let body = self.body.to_partial();
        match &self.drop {
            None => body,
            Some(d) => PartialPwl::merge_min(&[&body, &PartialPwl::point(self.body.lo().clone(), d.clone())]),
        }
    }

    /// Pointwise maximum on the common domain.
    pub fn max(&self, o: &Envelope) -> Result<Envelope> {
        let body = self.body.merge_max(&o.body)?;
        let lo = body.lo().clone();
        let at = |e: &Envelope| {
            if e.lo() == &lo {
                e.evaluate(&lo)
            } else {
                e.body.evaluate(&lo)
            }
        };
        let v = max_q(&at(self)?, &at(o)?);
        let drop = (v < body.value_at_lo()).then_some(v);
        Ok(Envelope { body, drop })
    }
}

/// One `g_t`/`h_t` term: distance plus weight over capacity, where the
/// weight is `base` or `base + alpha`.
#[derive(Debug, Clone)]
pub(crate) struct Term {
    pub tag: usize,
    pub dist: Q,
    pub cap: Q,
    pub base: Q,
    pub varies: bool,
}

/// Upper envelope of the terms over `[lo, hi]`. Varying terms must come in
/// nondecreasing order of `1 / cap`.
pub(crate) fn envelope_of_terms(terms: &[Term], lo: &Q, hi: &Q) -> Result<Envelope> {
    if lo.is_negative() || lo > hi {
        return precondition(format!("invalid weight domain [{lo}, {hi}]"));
    }
    let mut constant = zero();
    let mut lines = vec![];
    for t in terms {
        if t.varies {
            let slope = Q::one() / &t.cap;
            let intercept = &t.dist + &t.base * &slope;
            lines.push(Line::tagged(slope, intercept, t.tag));
        } else if !t.base.is_zero() {
            let v = &t.dist + &t.base / &t.cap;
            if v > constant {
                constant = v;
            }
        }
    }
    let mut all = Vec::with_capacity(lines.len() + 1);
    all.push(Line::constant(constant.clone()));
    all.extend(lines);
    let body = PwlFunction::upper_envelope(&all, lo, hi)?;
    let mut drop = None;
    if lo.is_zero() && terms.iter().any(|t| t.varies && t.base.is_zero()) {
        let mut v = constant;
        for t in terms.iter().filter(|t| t.varies && !t.base.is_zero()) {
            v = max_q(&v, &(&t.dist + &t.base / &t.cap));
        }
        if v < body.value_at_lo() {
            drop = Some(v);
        }
    }
    Ok(Envelope { body, drop })
}

/// Terms `g_t(x)` for every vertex `t` strictly left of `x`, nearest first.
/// The term varies with `alpha` when `t >= i`.
pub(crate) fn left_terms(p: &PathInstance, base: &Scenario, i: usize, x: &Q) -> Vec<Term> {
    let end = p.count_left(x);
    let wi = base.w(i);
    let mut out = Vec::with_capacity(end);
    let mut cap: Option<Q> = None;
    for t in (0..end).rev() {
        let c = match cap {
            Some(c) if c <= p.capacities()[t] => c,
            _ => p.capacities()[t].clone(),
        };
        let varies = t >= i;
        let mut w = base.range_weight(0, t + 1);
        if varies {
            w -= wi;
        }
        out.push(Term {
            tag: t,
            dist: x - p.x(t),
            cap: c.clone(),
            base: w,
            varies,
        });
        cap = Some(c);
    }
    out
}

/// Terms `h_t(x)` for every vertex `t` strictly right of `x`, nearest first.
/// The term varies with `alpha` when `t <= i`.
pub(crate) fn right_terms(p: &PathInstance, base: &Scenario, i: usize, x: &Q) -> Vec<Term> {
    let start = p.count_at_or_left(x);
    let wi = base.w(i);
    let mut out = Vec::with_capacity(p.n() + 1 - start);
    let mut cap: Option<Q> = None;
    for t in start..=p.n() {
        let c = match cap {
            Some(c) if c <= p.capacities()[t - 1] => c,
            _ => p.capacities()[t - 1].clone(),
        };
        let varies = t <= i;
        let mut w = base.range_weight(t, p.n() + 1);
        if varies {
            w -= wi;
        }
        out.push(Term {
            tag: t,
            dist: p.x(t) - x,
            cap: c.clone(),
            base: w,
            varies,
        });
        cap = Some(c);
    }
    out
}

fn check(p: &PathInstance, base: &Scenario, i: usize, j: usize) -> Result<()> {
    p.check_index(i)?;
    p.check_index(j)?;
    if base.len() != p.n() + 1 {
        return precondition("scenario length does not match the instance");
    }
    Ok(())
}

/// `LUE_{i,j}(alpha : base)` on `[lo, hi]`.
pub fn lue(p: &PathInstance, base: &Scenario, i: usize, j: usize, lo: &Q, hi: &Q) -> Result<Envelope> {
    check(p, base, i, j)?;
    envelope_of_terms(&left_terms(p, base, i, p.x(j)), lo, hi)
}

/// `RUE_{i,j}(alpha : base)` on `[lo, hi]`.
pub fn rue(p: &PathInstance, base: &Scenario, i: usize, j: usize, lo: &Q, hi: &Q) -> Result<Envelope> {
    check(p, base, i, j)?;
    envelope_of_terms(&right_terms(p, base, i, p.x(j)), lo, hi)
}

/// `Theta(x : base_{-i}(alpha))` on `[lo, hi]`, for any point `x`.
pub fn theta_of_alpha(p: &PathInstance, x: &Q, i: usize, base: &Scenario, lo: &Q, hi: &Q) -> Result<Envelope> {
    check(p, base, i, i)?;
    p.check_point(x)?;
    let left = envelope_of_terms(&left_terms(p, base, i, x), lo, hi)?;
    let right = envelope_of_terms(&right_terms(p, base, i, x), lo, hi)?;
    left.max(&right)
}
