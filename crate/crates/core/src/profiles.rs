//! Min-max evacuation profiles as functions of the total varying weight.
//!
//! For two good functions `fL`, `fR` and a box `[a1, a2] x [b1, b2]`, the
//! profile is `M(alpha) = min { max(fL(a), fR(b)) : a + b = alpha }` over the
//! box. It is assembled as the pointwise minimum of witness functions, each
//! exact wherever its structural condition holds at an optimum and an upper
//! bound elsewhere.

use num_traits::Signed;

use crate::envelopes::{lue, rue, Envelope};
use crate::error::{precondition, Error, Result};
use crate::path_model::{PathInstance, Scenario};
use crate::pwl::{clamp_below, PartialPwl, Piece, PwlFunction};
use crate::rational::{frac, zero, Q};

/// Feasible weights `[a1, a2]` at the left varying vertex and `[b1, b2]` at
/// the right one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightBox {
    pub a1: Q,
    pub a2: Q,
    pub b1: Q,
    pub b2: Q,
}

impl WeightBox {
    pub fn new(a1: Q, a2: Q, b1: Q, b2: Q) -> Result<WeightBox> {
        if a1 > a2 || b1 > b2 {
            return precondition("box requires a1 <= a2 and b1 <= b2");
        }
        Ok(WeightBox { a1, a2, b1, b2 })
    }

    pub fn alpha_lo(&self) -> Q {
        &self.a1 + &self.b1
    }

    pub fn alpha_hi(&self) -> Q {
        &self.a2 + &self.b2
    }
}

fn constant(lo: &Q, hi: &Q, v: Q) -> PwlFunction {
    PwlFunction::constant(lo.clone(), hi.clone(), v).expect("nonempty domain")
}

/// Good, with every piece after the first strictly increasing.
fn check_eventually_positive(f: &PwlFunction, name: &str) -> Result<()> {
    if !f.is_good() || f.lines().iter().skip(1).any(|l| !l.slope.is_positive()) {
        return Err(Error::NotPositive(format!("{name}: {f}")));
    }
    Ok(())
}

/// `alpha -> max(c, g(alpha - shift))`, the witness with one coordinate
/// pinned at a value where the other function reads `c`.
fn pinned(c: &Q, g: &PwlFunction, shift: &Q) -> PwlFunction {
    let moved = g.shift_arg(shift);
    moved
        .merge_max(&constant(moved.lo(), moved.hi(), c.clone()))
        .expect("same domain")
}

/// `M(alpha) = min over the box slice of max(fL(a), fR(alpha - a))`.
///
/// Both inputs must be good and strictly increasing after an optional
/// leading flat piece; they are restricted to the box sides first.
pub fn min_max_profile(f_l: &PwlFunction, f_r: &PwlFunction, bx: &WeightBox) -> Result<PwlFunction> {
    let fl = f_l.restrict(&bx.a1, &bx.a2)?;
    let fr = f_r.restrict(&bx.b1, &bx.b2)?;
    check_eventually_positive(&fl, "fL")?;
    check_eventually_positive(&fr, "fR")?;
    let mut ws: Vec<PwlFunction> = Vec::with_capacity(7);
    ws.push(pinned(&fl.value_at_lo(), &fr, &bx.a1));
    ws.push(pinned(&fl.value_at_hi(), &fr, &bx.a2));
    ws.push(pinned(&fr.value_at_lo(), &fl, &bx.b1));
    ws.push(pinned(&fr.value_at_hi(), &fl, &bx.b2));
    let pl = fl.flat_prefix_end().clone();
    let pr = fr.flat_prefix_end().clone();
    if pl > bx.a1 && pl < bx.a2 {
        ws.push(pinned(&fl.evaluate(&pl)?, &fr, &pl));
    }
    if pr > bx.b1 && pr < bx.b2 {
        ws.push(pinned(&fr.evaluate(&pr)?, &fl, &pr));
    }
    if pl < bx.a2 && pr < bx.b2 {
        let inv_l = fl.restrict(&pl, &bx.a2)?.inverse()?;
        let inv_r = fr.restrict(&pr, &bx.b2)?.inverse()?;
        match inv_l.add(&inv_r) {
            Ok(g) => ws.push(g.inverse()?),
            Err(Error::DisjointDomains) => {}
            Err(e) => return Err(e),
        }
    }
    let parts: Vec<PartialPwl> = ws.iter().map(|w| w.to_partial()).collect();
    let refs: Vec<&PartialPwl> = parts.iter().collect();
    let m = PartialPwl::merge_min(&refs).to_pwl()?;
    debug_assert_eq!((m.lo(), m.hi()), (&bx.alpha_lo(), &bx.alpha_hi()));
    Ok(m)
}

/// `alpha -> min over y in [l, r] of max(A(alpha) + y, B(alpha) - y)`, which
/// equals `max(A + l, B - r, (A + B) / 2)`.
fn balanced(a: &PwlFunction, b: &PwlFunction, l: &Q, r: &Q) -> PwlFunction {
    let neg_r = -r;
    let edges = a.add_const(l).merge_max(&b.add_const(&neg_r)).expect("same domain");
    let mid = a.add(b).expect("same domain").scale(&frac(1, 2)).expect("positive");
    edges.merge_max(&mid).expect("same domain")
}

/// Witnesses pinning the left function at each interior breakpoint, with
/// the right argument ranging over the pieces whose slopes fall between the
/// two slopes meeting there. `flip` swaps the roles of the two functions.
fn inflection_witnesses(fa: &PwlFunction, fb: &PwlFunction, l: &Q, r: &Q, flip: bool) -> Vec<PartialPwl> {
    let sa: Vec<&Q> = fa.lines().iter().map(|x| &x.slope).collect();
    let sb: Vec<&Q> = fb.lines().iter().map(|x| &x.slope).collect();
    let bb = fb.breakpoints();
    let mut out = Vec::new();
    for k in 1..sa.len() {
        let first = sb.partition_point(|m| *m < sa[k - 1]);
        let last = sb.partition_point(|m| *m <= sa[k]);
        if first >= last {
            continue;
        }
        let at = &fa.breakpoints()[k];
        let va = fa.evaluate(at).expect("breakpoint in domain");
        let part = fb.restrict(&bb[first], &bb[last]).expect("inside domain").shift_arg(at);
        let pin = constant(part.lo(), part.hi(), va);
        let w = if flip {
            balanced(&part, &pin, l, r)
        } else {
            balanced(&pin, &part, l, r)
        };
        out.push(w.to_partial());
    }
    out
}

/// Linear sweep over witnesses with nondecreasing domain ends: each new
/// function is min-merged only with the tail it overlaps.
fn sweep(hs: Vec<PartialPwl>) -> PartialPwl {
    let mut acc: Vec<Piece> = Vec::new();
    let mut ops = 0usize;
    let mut budget = 0usize;
    for h in hs {
        let Some((l, _)) = h.bounds() else { continue };
        let mut overlap: Vec<Piece> = Vec::new();
        while let Some(last) = acc.last() {
            if last.hi <= l {
                break;
            }
            let last = acc.pop().unwrap();
            if last.lo < l {
                acc.push(Piece {
                    lo: last.lo.clone(),
                    hi: l.clone(),
                    line: last.line.clone(),
                });
                overlap.push(Piece {
                    lo: l.clone(),
                    hi: last.hi,
                    line: last.line,
                });
                break;
            }
            overlap.push(last);
        }
        ops += overlap.len() + h.size();
        budget += 3 * h.size() + 2;
        if overlap.is_empty() {
            acc.extend(h.pieces().iter().cloned());
        } else {
            overlap.reverse();
            let prev = PartialPwl::from_pieces(overlap).expect("sorted tail");
            let merged = PartialPwl::merge_min(&[&prev, &h]);
            acc.extend(merged.pieces().iter().cloned());
        }
    }
    debug_assert!(ops <= budget, "sweep touched {ops} pieces, budget {budget}");
    let mut out = PartialPwl::from_pieces(acc).expect("sweep keeps pieces ordered");
    out.canonicalize();
    out
}

/// `M(alpha) = min over the box slice and y in [l, r] of
/// max(fL(a) + y, fR(alpha - a) - y)`.
///
/// Both inputs must be good with strictly increasing slopes.
pub fn min_max_y_profile(f_l: &PwlFunction, f_r: &PwlFunction, bx: &WeightBox, l: &Q, r: &Q) -> Result<PwlFunction> {
    if l > r {
        return precondition("y range requires l <= r");
    }
    let fl = f_l.restrict(&bx.a1, &bx.a2)?;
    let fr = f_r.restrict(&bx.b1, &bx.b2)?;
    for (f, name) in [(&fl, "fL"), (&fr, "fR")] {
        if !f.is_good() {
            return Err(Error::NotPositive(format!("{name}: {f}")));
        }
        if !f.is_strictly_convex() {
            return Err(Error::NotConvex(format!("{name}: {f}")));
        }
    }
    let neg_l = -l;
    let neg_r = -r;
    let mut ws: Vec<PartialPwl> = Vec::with_capacity(8);
    ws.push(min_max_profile(&fl.add_const(l), &fr.add_const(&neg_l), bx)?.to_partial());
    ws.push(min_max_profile(&fl.add_const(r), &fr.add_const(&neg_r), bx)?.to_partial());
    for (a, shift) in [(&bx.a1, &bx.a1), (&bx.a2, &bx.a2)] {
        let part = fr.shift_arg(shift);
        let pin = constant(part.lo(), part.hi(), fl.evaluate(a)?);
        ws.push(balanced(&pin, &part, l, r).to_partial());
    }
    for (b, shift) in [(&bx.b1, &bx.b1), (&bx.b2, &bx.b2)] {
        let part = fl.shift_arg(shift);
        let pin = constant(part.lo(), part.hi(), fr.evaluate(b)?);
        ws.push(balanced(&part, &pin, l, r).to_partial());
    }
    ws.push(sweep(inflection_witnesses(&fl, &fr, l, r, false)));
    ws.push(sweep(inflection_witnesses(&fr, &fl, l, r, true)));
    let refs: Vec<&PartialPwl> = ws.iter().collect();
    PartialPwl::merge_min(&refs).to_pwl()
}

/// Extra witnesses for the one-point drops of lower semicontinuous inputs:
/// the left argument sits at its dropped value, the right one at its dropped
/// value, or both.
fn drop_witnesses(
    f_l: &Envelope,
    f_r: &Envelope,
    bx: &WeightBox,
    pair: &dyn Fn(&PwlFunction, &PwlFunction) -> PwlFunction,
) -> Vec<PartialPwl> {
    let mut out = Vec::new();
    let fl = f_l.body.restrict(&bx.a1, &bx.a2).expect("box inside domain");
    let fr = f_r.body.restrict(&bx.b1, &bx.b2).expect("box inside domain");
    let dl = f_l.drop.as_ref().filter(|_| f_l.lo() == &bx.a1);
    let dr = f_r.drop.as_ref().filter(|_| f_r.lo() == &bx.b1);
    if let Some(d) = dl {
        let part = fr.shift_arg(&bx.a1);
        out.push(pair(&constant(part.lo(), part.hi(), d.clone()), &part).to_partial());
    }
    if let Some(d) = dr {
        let part = fl.shift_arg(&bx.b1);
        out.push(pair(&part, &constant(part.lo(), part.hi(), d.clone())).to_partial());
    }
    if let (Some(a), Some(b)) = (dl, dr) {
        let at = bx.alpha_lo();
        let v = pair(&constant(&at, &at, a.clone()), &constant(&at, &at, b.clone()));
        out.push(PartialPwl::point(at.clone(), v.value_at_lo()));
    }
    out
}

fn check_box_in(e: &Envelope, lo: &Q, hi: &Q) -> Result<()> {
    if lo < e.lo() || hi > e.hi() {
        return precondition("box side outside the envelope domain");
    }
    Ok(())
}

/// [`min_max_profile`] for envelopes that may drop at their left end.
pub fn min_max_profile_env(f_l: &Envelope, f_r: &Envelope, bx: &WeightBox) -> Result<PartialPwl> {
    check_box_in(f_l, &bx.a1, &bx.a2)?;
    check_box_in(f_r, &bx.b1, &bx.b2)?;
    let body = min_max_profile(&f_l.body, &f_r.body, bx)?.to_partial();
    let pair = |a: &PwlFunction, b: &PwlFunction| a.merge_max(b).expect("same domain");
    let mut ws = drop_witnesses(f_l, f_r, bx, &pair);
    ws.push(body);
    let refs: Vec<&PartialPwl> = ws.iter().collect();
    Ok(PartialPwl::merge_min(&refs))
}

/// [`min_max_y_profile`] for envelopes that may drop at their left end.
pub fn min_max_y_profile_env(f_l: &Envelope, f_r: &Envelope, bx: &WeightBox, l: &Q, r: &Q) -> Result<PartialPwl> {
    check_box_in(f_l, &bx.a1, &bx.a2)?;
    check_box_in(f_r, &bx.b1, &bx.b2)?;
    let body = min_max_y_profile(&f_l.body, &f_r.body, bx, l, r)?.to_partial();
    let pair = |a: &PwlFunction, b: &PwlFunction| balanced(a, b, l, r);
    let mut ws = drop_witnesses(f_l, f_r, bx, &pair);
    ws.push(body);
    let refs: Vec<&PartialPwl> = ws.iter().collect();
    Ok(PartialPwl::merge_min(&refs))
}

fn check_pair(p: &PathInstance, base: &Scenario, i: usize, j: usize) -> Result<()> {
    p.check_index(i)?;
    p.check_index(j)?;
    if base.len() != p.n() + 1 {
        return precondition("scenario length does not match the instance");
    }
    if i >= j {
        return precondition("varying vertices must satisfy i < j");
    }
    Ok(())
}

/// `M_k(alpha)`: the least evacuation time at `x_k` over the box slice, with
/// `w_i` and `w_j` varying on top of `base` (`i <= k <= j`).
pub fn m_k(p: &PathInstance, base: &Scenario, i: usize, j: usize, k: usize, bx: &WeightBox) -> Result<PartialPwl> {
    check_pair(p, base, i, j)?;
    if k < i || k > j {
        return precondition("m_k requires i <= k <= j");
    }
    let f_l = lue(p, base, i, k, &bx.a1, &bx.a2)?;
    let f_r = rue(p, base, j, k, &bx.b1, &bx.b2)?;
    min_max_profile_env(&f_l, &f_r, bx)
}

/// `M^{(k)}_{i,j}(alpha)`: the least evacuation time over sinks on edge
/// `[x_k, x_{k+1}]` and the box slice (`i <= k < j`).
pub fn m_edge(p: &PathInstance, base: &Scenario, i: usize, j: usize, k: usize, bx: &WeightBox) -> Result<PartialPwl> {
    check_pair(p, base, i, j)?;
    if k < i || k >= j {
        return precondition("m_edge requires i <= k < j");
    }
    let l_k = lue(p, base, i, k, &bx.a1, &bx.a2)?;
    let l_k1 = lue(p, base, i, k + 1, &bx.a1, &bx.a2)?;
    let r_k = rue(p, base, j, k, &bx.b1, &bx.b2)?;
    let r_k1 = rue(p, base, j, k + 1, &bx.b1, &bx.b2)?;
    let at_k = min_max_profile_env(&l_k, &r_k, bx)?;
    let at_k1 = min_max_profile_env(&l_k1, &r_k1, bx)?;
    let (xk, xk1) = (p.x(k), p.x(k + 1));
    let neg = -xk1;
    let inner = min_max_y_profile_env(&l_k1.add_const(&neg), &r_k.add_const(xk), bx, xk, xk1)?;
    let inner = clamp_below(&inner, &zero());
    Ok(PartialPwl::merge_min(&[&at_k, &at_k1, &inner]))
}

/// `M^{(k)}_v(alpha)`: the least evacuation time over sinks on edge `k`
/// when only `w_v` varies on `[lo, hi]`. An auxiliary vertex on the far
/// side of the edge is pinned at its base weight.
pub fn m_edge_single(p: &PathInstance, base: &Scenario, v: usize, k: usize, lo: &Q, hi: &Q) -> Result<PartialPwl> {
    p.check_index(v)?;
    p.check_edge(k)?;
    if lo > hi || lo.is_negative() {
        return precondition(format!("invalid weight domain [{lo}, {hi}]"));
    }
    if k < v {
        let w = base.w(k).clone();
        let bx = WeightBox::new(w.clone(), w.clone(), lo.clone(), hi.clone())?;
        Ok(m_edge(p, base, k, v, k, &bx)?.shift_arg(&-w))
    } else {
        let w = base.w(k + 1).clone();
        let bx = WeightBox::new(lo.clone(), hi.clone(), w.clone(), w.clone())?;
        Ok(m_edge(p, base, v, k + 1, k, &bx)?.shift_arg(&-w))
    }
}

/// Splits `alpha` between the two varying vertices so that the least
/// evacuation time over edge `k` equals `M^{(k)}_{i,j}(alpha)`. Exact: every
/// kink of the objective in the split is enumerated.
pub fn best_split(
    p: &PathInstance,
    base: &Scenario,
    i: usize,
    j: usize,
    k: usize,
    bx: &WeightBox,
    alpha: &Q,
) -> Result<(Q, Q)> {
    check_pair(p, base, i, j)?;
    let lo = crate::rational::max_q(&bx.a1, &(alpha - &bx.b2));
    let hi = crate::rational::min_q(&bx.a2, &(alpha - &bx.b1));
    if lo > hi {
        return precondition("alpha outside the box range");
    }
    let envs = [
        lue(p, base, i, k, &bx.a1, &bx.a2)?,
        lue(p, base, i, k + 1, &bx.a1, &bx.a2)?,
        rue(p, base, j, k, &bx.b1, &bx.b2)?,
        rue(p, base, j, k + 1, &bx.b1, &bx.b2)?,
    ];
    // Kinks in a1: envelope breakpoints (right ones mirrored through alpha).
    let mut cuts = vec![lo.clone(), hi.clone()];
    for (n, e) in envs.iter().enumerate() {
        for b in e.body.breakpoints() {
            cuts.push(if n < 2 { b.clone() } else { alpha - b });
        }
    }
    cuts.retain(|c| c >= &lo && c <= &hi);
    cuts.sort();
    cuts.dedup();
    let (xk, xk1) = (p.x(k), p.x(k + 1));
    let mut cands = cuts.clone();
    for w in cuts.windows(2) {
        let mid = (&w[0] + &w[1]) / Q::from_integer(2.into());
        // Component lines in a1 on this segment.
        let line_of = |n: usize| {
            let e = &envs[n];
            let at = if n < 2 { mid.clone() } else { alpha - &mid };
            let l = &e.body.lines()[e.body.pieces().position(|(a, b, _)| a <= &at && &at <= b).unwrap()];
            if n < 2 {
                (l.slope.clone(), l.intercept.clone())
            } else {
                (-&l.slope, &l.slope * alpha + &l.intercept)
            }
        };
        let (l0, l1, r0, r1) = (line_of(0), line_of(1), line_of(2), line_of(3));
        let mut comps = vec![l0, r1.clone(), l1.clone(), r0.clone(), (zero(), zero())];
        // Interior edge objective: (L1 - x_{k+1} + R0 + x_k) / 2 and its pieces.
        comps.push((
            (&l1.0 + &r0.0) / Q::from_integer(2.into()),
            (&l1.1 + &r0.1 - xk1 + xk) / Q::from_integer(2.into()),
        ));
        comps.push((l1.0.clone(), &l1.1 - xk1 + xk));
        comps.push((r0.0.clone(), &r0.1 - xk1 + xk));
        for a in 0..comps.len() {
            for b in a + 1..comps.len() {
                if comps[a].0 != comps[b].0 {
                    let z = (&comps[b].1 - &comps[a].1) / (&comps[a].0 - &comps[b].0);
                    if z > w[0] && z < w[1] {
                        cands.push(z);
                    }
                }
            }
        }
    }
    let mut best: Option<(Q, Q)> = None;
    for a1 in cands {
        let s = base.substitute(i, a1.clone())?.substitute(j, alpha - &a1)?;
        let (_, v) = crate::evacuation::theta_min_on_edge(p, k, &s)?;
        if best.as_ref().is_none_or(|(bv, ba)| v < *bv || (v == *bv && a1 < *ba)) {
            best = Some((v, a1));
        }
    }
    let (_, a1) = best.unwrap();
    let a2 = alpha - &a1;
    Ok((a1, a2))
}
