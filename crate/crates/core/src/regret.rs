//! Maximum regret at a point and the minmax-regret sink.
//!
//! `R_max(x) = max(G(x), H(x))`. `G(x)` collects three term families for
//! worst cases evacuating from the left of `x`; `H(x)` is the same on the
//! mirrored path. Every term is a maximum over a weight parameter of an
//! evacuation-time line (or envelope) minus a min-max profile, evaluated
//! exactly with [`PartialPwl::sup_difference`].

use std::cell::RefCell;
use std::fmt;

use crate::envelopes::{envelope_of_terms, left_terms, Envelope, Term};
use crate::error::{precondition, Result};
use crate::path_model::{PathInstance, Point, Scenario};
use crate::profiles::{best_split, m_edge, m_edge_single, WeightBox};
use crate::pwl::PartialPwl;
use crate::rational::{half, zero, Q};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    /// One varying vertex `j` left of `x`.
    GJ,
    /// `w_i` varying, `w_j` at its upper bound, `i < j`, both left of `x`.
    GIJ,
    /// Both `w_i` and `w_j` varying, `i < j`, both left of `x`.
    BarGIJ,
    HI,
    HIJ,
    BarHIJ,
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::GJ => "G_j",
            Family::GIJ => "G_ij",
            Family::BarGIJ => "barG_ij",
            Family::HI => "H_i",
            Family::HIJ => "H_ij",
            Family::BarHIJ => "barH_ij",
        }
    }

    fn mirrored(&self) -> Family {
        match self {
            Family::GJ => Family::HI,
            Family::GIJ => Family::HIJ,
            Family::BarGIJ => Family::BarHIJ,
            Family::HI => Family::GJ,
            Family::HIJ => Family::GIJ,
            Family::BarHIJ => Family::BarGIJ,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// The maximising term: family, vertex pair `i <= j`, sink edge `u` of the
/// inner minimisation, the weights placed on `i` and `j`, and the full
/// worst-case scenario.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witness {
    pub family: Family,
    pub i: usize,
    pub j: usize,
    pub u: usize,
    pub alpha: Q,
    pub beta: Q,
    pub scenario: Scenario,
    /// False when the term's supremum is approached but not attained; the
    /// scenario then only approximates the value.
    pub attained: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TermValue {
    pub value: Q,
    pub witness: Witness,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegretReport {
    pub value: Q,
    pub location: Point,
    pub witness: Option<Witness>,
}

fn better(cur: &Option<TermValue>, cand: &TermValue) -> bool {
    cur.as_ref().is_none_or(|c| cand.value > c.value)
}

fn keep_max(cur: &mut Option<TermValue>, cand: Option<TermValue>) {
    if let Some(c) = cand {
        if better(cur, &c) {
            *cur = Some(c);
        }
    }
}

fn check_left_of(p: &PathInstance, j: usize, x: &Q) -> Result<()> {
    p.check_index(j)?;
    p.check_point(x)?;
    if p.x(j) >= x {
        return precondition("term requires x_j < x");
    }
    Ok(())
}

/// The single `g_j(x)` term as a function of `w_v` (`v <= j`).
fn g_line(p: &PathInstance, base: &Scenario, v: usize, j: usize, x: &Q, lo: &Q, hi: &Q) -> Result<Envelope> {
    let term = left_terms(p, base, v, x)
        .into_iter()
        .find(|t| t.tag == j)
        .expect("x_j < x");
    envelope_of_terms(&[term], lo, hi)
}

/// `F_{i,j}(alpha)`: the left evacuation time to `x` contributed by vertices
/// from `j` up to `x`, with `alpha = w_i + w_j` added on top of
/// `s_{i,j}(0, 0)`.
pub fn f_upper(p: &PathInstance, i: usize, j: usize, x: &Q) -> Result<Envelope> {
    check_left_of(p, j, x)?;
    if i >= j {
        return precondition("f_upper requires i < j");
    }
    let base = p.two_varying(i, j, zero(), zero())?;
    let terms: Vec<Term> = left_terms(p, &base, i, x).into_iter().filter(|t| t.tag >= j).collect();
    envelope_of_terms(&terms, &(p.lo(i) + p.lo(j)), &(p.hi(i) + p.hi(j)))
}

fn sup_term(top: &Envelope, profile: &PartialPwl, lo: &Q, hi: &Q) -> Option<crate::pwl::SupResult> {
    PartialPwl::sup_difference(&top.to_partial(), profile, lo, hi)
}

/// `G_j(x)`: worst case with only `w_j` varying and the sink right of `x_j`.
pub fn eval_g_j(p: &PathInstance, j: usize, x: &Q) -> Result<TermValue> {
    check_left_of(p, j, x)?;
    let (lo, hi) = (p.lo(j), p.hi(j));
    let base = p.two_varying(j, j, zero(), zero())?;
    let top = g_line(p, &base, j, j, x, lo, hi)?;
    let mut best: Option<TermValue> = None;
    for u in j..p.n() {
        let m = m_edge_single(p, &base, j, u, lo, hi)?;
        if let Some(r) = sup_term(&top, &m, lo, hi) {
            let scenario = p.two_varying(j, j, r.arg.clone(), r.arg.clone())?;
            let witness = Witness {
                family: Family::GJ,
                i: j,
                j,
                u,
                alpha: r.arg.clone(),
                beta: r.arg,
                scenario,
                attained: r.attained,
            };
            keep_max(
                &mut best,
                Some(TermValue {
                    value: r.value,
                    witness,
                }),
            );
        }
    }
    Ok(best.expect("at least one edge right of x_j"))
}

/// `G_{i,j}(x)`: `w_i` varying, `w_j` at its upper bound.
pub fn eval_g_ij(p: &PathInstance, i: usize, j: usize, x: &Q) -> Result<TermValue> {
    check_left_of(p, j, x)?;
    if i >= j {
        return precondition("G_ij requires i < j");
    }
    let (lo, hi) = (p.lo(i), p.hi(i));
    let base = p.two_varying(i, j, zero(), p.hi(j).clone())?;
    let top = g_line(p, &base, i, j, x, lo, hi)?;
    let mut best: Option<TermValue> = None;
    for u in j..p.n() {
        let m = m_edge_single(p, &base, i, u, lo, hi)?;
        if let Some(r) = sup_term(&top, &m, lo, hi) {
            let scenario = p.two_varying(i, j, r.arg.clone(), p.hi(j).clone())?;
            let witness = Witness {
                family: Family::GIJ,
                i,
                j,
                u,
                alpha: r.arg,
                beta: p.hi(j).clone(),
                scenario,
                attained: r.attained,
            };
            keep_max(
                &mut best,
                Some(TermValue {
                    value: r.value,
                    witness,
                }),
            );
        }
    }
    Ok(best.expect("at least one edge right of x_j"))
}

/// `barG_{i,j}(x)`: both `w_i` and `w_j` varying, sink of the optimum
/// between them.
pub fn eval_barg_ij(p: &PathInstance, i: usize, j: usize, x: &Q) -> Result<TermValue> {
    check_left_of(p, j, x)?;
    if i >= j {
        return precondition("barG_ij requires i < j");
    }
    let bx = WeightBox::new(p.lo(i).clone(), p.hi(i).clone(), p.lo(j).clone(), p.hi(j).clone())?;
    let (lo, hi) = (bx.alpha_lo(), bx.alpha_hi());
    let base = p.two_varying(i, j, zero(), zero())?;
    let top = f_upper(p, i, j, x)?;
    let mut best: Option<(Q, crate::pwl::SupResult, usize)> = None;
    for u in i..j {
        let m = m_edge(p, &base, i, j, u, &bx)?;
        if let Some(r) = sup_term(&top, &m, &lo, &hi) {
            if best.as_ref().is_none_or(|(v, _, _)| r.value > *v) {
                best = Some((r.value.clone(), r, u));
            }
        }
    }
    let (value, r, u) = best.expect("at least one edge between i and j");
    let (a1, a2) = best_split(p, &base, i, j, u, &bx, &r.arg)?;
    let scenario = p.two_varying(i, j, a1.clone(), a2.clone())?;
    let witness = Witness {
        family: Family::BarGIJ,
        i,
        j,
        u,
        alpha: a1,
        beta: a2,
        scenario,
        attained: r.attained,
    };
    Ok(TermValue { value, witness })
}

/// `G(x)`: the largest left-side term, or `None` when no vertex lies left
/// of `x`.
pub fn g_side(p: &PathInstance, x: &Q) -> Result<Option<TermValue>> {
    p.check_point(x)?;
    let end = p.count_left(x);
    let mut best = None;
    for j in 0..end {
        keep_max(&mut best, Some(eval_g_j(p, j, x)?));
    }
    for j in 0..end {
        for i in 0..j {
            keep_max(&mut best, Some(eval_g_ij(p, i, j, x)?));
            keep_max(&mut best, Some(eval_barg_ij(p, i, j, x)?));
        }
    }
    Ok(best)
}

fn mirror_witness(p: &PathInstance, w: Witness) -> Witness {
    let n = p.n();
    Witness {
        family: w.family.mirrored(),
        i: n - w.j,
        j: n - w.i,
        u: n - 1 - w.u,
        alpha: w.beta,
        beta: w.alpha,
        scenario: w.scenario.mirrored(),
        attained: w.attained,
    }
}

/// `H(x)`: the largest right-side term, computed as `G` on the mirrored
/// path (`mirror` must be `p.mirrored()`).
pub fn h_side(p: &PathInstance, mirror: &PathInstance, x: &Q) -> Result<Option<TermValue>> {
    p.check_point(x)?;
    let g = g_side(mirror, &p.mirror_point(x))?;
    Ok(g.map(|t| TermValue {
        value: t.value,
        witness: mirror_witness(p, t.witness),
    }))
}

fn combine(g: Option<TermValue>, h: Option<TermValue>) -> Option<TermValue> {
    match (g, h) {
        (Some(a), Some(b)) => Some(if b.value > a.value { b } else { a }),
        (a, b) => a.or(b),
    }
}

/// `R_max(x)`, the maximum regret of a sink at `x` over all legal scenarios.
pub fn r_max(p: &PathInstance, x: &Q) -> Result<RegretReport> {
    let mirror = p.mirrored();
    let g = g_side(p, x)?;
    let h = h_side(p, &mirror, x)?;
    let location = p.point(x.clone())?;
    Ok(match combine(g, h) {
        Some(t) => RegretReport {
            value: t.value,
            location,
            witness: Some(t.witness),
        },
        None => RegretReport {
            value: zero(),
            location,
            witness: None,
        },
    })
}

type Sides = (Option<TermValue>, Option<TermValue>);

/// Memoised `(G, H)` at vertices for the search.
struct VertexSides<'a> {
    p: &'a PathInstance,
    mirror: PathInstance,
    cache: RefCell<Vec<Option<Sides>>>,
}

impl<'a> VertexSides<'a> {
    fn new(p: &'a PathInstance) -> Self {
        VertexSides {
            p,
            mirror: p.mirrored(),
            cache: RefCell::new(vec![None; p.n() + 1]),
        }
    }

    fn get(&self, v: usize) -> Result<Sides> {
        if let Some(hit) = &self.cache.borrow()[v] {
            return Ok(hit.clone());
        }
        let x = self.p.x(v);
        let pair = (g_side(self.p, x)?, h_side(self.p, &self.mirror, x)?);
        self.cache.borrow_mut()[v] = Some(pair.clone());
        Ok(pair)
    }
}

fn value_of(t: &Option<TermValue>) -> Option<&Q> {
    t.as_ref().map(|t| &t.value)
}

/// `R_OPT`: the minmax-regret sink. Binary search for the first vertex where
/// `G` reaches `H`, then exact minimisation over the neighbouring edges,
/// where `G` and `H` move with slopes +1 and -1.
pub fn r_opt(p: &PathInstance) -> Result<RegretReport> {
    let n = p.n();
    if n == 0 {
        return Ok(RegretReport {
            value: zero(),
            location: p.vertex_point(0),
            witness: None,
        });
    }
    let sides = VertexSides::new(p);
    let g_wins = |v: usize| -> Result<bool> {
        let (g, h) = sides.get(v)?;
        Ok(match (value_of(&g), value_of(&h)) {
            (_, None) => true,
            (None, Some(_)) => false,
            (Some(a), Some(b)) => a >= b,
        })
    };
    let (mut lo, mut hi) = (0usize, n);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if g_wins(mid)? {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    let m = lo;
    let mut best: Option<(Q, Q, Option<Witness>)> = None;
    let mut offer = |loc: Q, val: Q, w: Option<Witness>| {
        let take = match &best {
            None => true,
            Some((bl, bv, _)) => val < *bv || (val == *bv && loc < *bl),
        };
        if take {
            best = Some((loc, val, w));
        }
    };
    for v in m.saturating_sub(2)..=(m + 1).min(n) {
        let (g, h) = sides.get(v)?;
        match combine(g, h) {
            Some(t) => offer(p.x(v).clone(), t.value, Some(t.witness)),
            None => offer(p.x(v).clone(), zero(), None),
        }
    }
    for u in m.saturating_sub(2)..(m + 1).min(n) {
        let (g1, _) = sides.get(u + 1)?;
        let (_, h0) = sides.get(u)?;
        let (Some(g1), Some(h0)) = (g1, h0) else { continue };
        let (a, b) = (p.x(u), p.x(u + 1));
        let y = half(&(a + b + &h0.value - &g1.value));
        if &y > a && &y < b {
            let val = &g1.value - (b - &y);
            offer(y, val, Some(g1.witness));
        }
    }
    let (loc, value, witness) = best.expect("at least one candidate");
    Ok(RegretReport {
        value,
        location: p.point(loc)?,
        witness,
    })
}
