//! Exact piecewise-linear functions.
//!
//! [`PwlFunction`] is continuous on a closed interval. [`PartialPwl`] is a
//! lower semicontinuous function made of closed pieces with possible gaps;
//! its value at a point is the minimum over the pieces containing it, and a
//! point outside every piece counts as +infinity.

use std::fmt;

use num_traits::{Signed, Zero};

use crate::error::{precondition, Error, Result};
use crate::rational::{fmt as qfmt, max_q, min_q, zero, Q};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Line {
    pub slope: Q,
    pub intercept: Q,
    pub tag: Option<usize>,
}

impl Line {
    pub fn new(slope: Q, intercept: Q) -> Line {
        Line {
            slope,
            intercept,
            tag: None,
        }
    }

    pub fn tagged(slope: Q, intercept: Q, tag: usize) -> Line {
        Line {
            slope,
            intercept,
            tag: Some(tag),
        }
    }

    pub fn constant(v: Q) -> Line {
        Line::new(zero(), v)
    }

    pub fn eval(&self, x: &Q) -> Q {
        &self.slope * x + &self.intercept
    }

    /// Same slope and intercept, ignoring the tag.
    pub fn same(&self, o: &Line) -> bool {
        self.slope == o.slope && self.intercept == o.intercept
    }

    /// Abscissa where two non-parallel lines meet.
    pub fn crossing(&self, o: &Line) -> Option<Q> {
        if self.slope == o.slope {
            return None;
        }
        Some((&o.intercept - &self.intercept) / (&self.slope - &o.slope))
    }

    fn plus(&self, o: &Line) -> Line {
        Line {
            slope: &self.slope + &o.slope,
            intercept: &self.intercept + &o.intercept,
            tag: self.tag,
        }
    }

    fn shifted_arg(&self, c: &Q) -> Line {
        Line {
            slope: self.slope.clone(),
            intercept: &self.intercept - &self.slope * c,
            tag: self.tag,
        }
    }

    fn scaled(&self, c: &Q) -> Line {
        Line {
            slope: &self.slope * c,
            intercept: &self.intercept * c,
            tag: self.tag,
        }
    }

    fn plus_const(&self, c: &Q) -> Line {
        Line {
            slope: self.slope.clone(),
            intercept: &self.intercept + c,
            tag: self.tag,
        }
    }

    fn neg(&self) -> Line {
        Line {
            slope: -&self.slope,
            intercept: -&self.intercept,
            tag: self.tag,
        }
    }
}

/// Continuous piecewise-linear function on `[q_0, q_m]`. A single-point
/// domain `[a, a]` is stored as breakpoints `[a, a]` with one line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PwlFunction {
    breaks: Vec<Q>,
    lines: Vec<Line>,
}

impl PwlFunction {
    pub fn from_parts(breaks: Vec<Q>, lines: Vec<Line>) -> Result<PwlFunction> {
        if lines.is_empty() || breaks.len() != lines.len() + 1 {
            return precondition("need m >= 1 lines and m + 1 breakpoints");
        }
        let degenerate = lines.len() == 1 && breaks[0] == breaks[1];
        if !degenerate && breaks.windows(2).any(|w| w[0] >= w[1]) {
            return precondition("breakpoints must be strictly increasing");
        }
        for k in 1..lines.len() {
            if lines[k - 1].eval(&breaks[k]) != lines[k].eval(&breaks[k]) {
                return precondition(format!("discontinuity at {}", breaks[k]));
            }
        }
        let mut f = PwlFunction { breaks, lines };
        f.canonicalize();
        Ok(f)
    }

    pub fn linear(lo: Q, hi: Q, line: Line) -> Result<PwlFunction> {
        if lo > hi {
            return precondition("empty domain");
        }
        Ok(PwlFunction {
            breaks: vec![lo, hi],
            lines: vec![line],
        })
    }

    pub fn constant(lo: Q, hi: Q, v: Q) -> Result<PwlFunction> {
        Self::linear(lo, hi, Line::constant(v))
    }

    fn canonicalize(&mut self) {
        let mut breaks = vec![self.breaks[0].clone()];
        let mut lines: Vec<Line> = Vec::with_capacity(self.lines.len());
        for (k, l) in self.lines.iter().enumerate() {
            match lines.last() {
                Some(prev) if prev.same(l) => {
                    *breaks.last_mut().unwrap() = self.breaks[k + 1].clone();
                }
                _ => {
                    lines.push(l.clone());
                    breaks.push(self.breaks[k + 1].clone());
                }
            }
        }
        self.breaks = breaks;
        self.lines = lines;
    }

    pub fn lo(&self) -> &Q {
        &self.breaks[0]
    }

    pub fn hi(&self) -> &Q {
        self.breaks.last().unwrap()
    }

    pub fn size(&self) -> usize {
        self.lines.len()
    }

    pub fn breakpoints(&self) -> &[Q] {
        &self.breaks
    }

    pub fn lines(&self) -> &[Line] {
        &self.lines
    }

    pub fn is_degenerate(&self) -> bool {
        self.breaks[0] == self.breaks[1]
    }

    pub fn contains(&self, x: &Q) -> bool {
        self.lo() <= x && x <= self.hi()
    }

    /// Index of the piece used to evaluate at `x` (right piece at interior
    /// breakpoints).
    fn locate(&self, x: &Q) -> usize {
        let k = self.breaks[1..].partition_point(|b| b <= x);
        k.min(self.lines.len() - 1)
    }

    pub fn evaluate(&self, x: &Q) -> Result<Q> {
        if !self.contains(x) {
            return Err(Error::OutOfDomain {
                value: x.to_string(),
                lo: self.lo().to_string(),
                hi: self.hi().to_string(),
            });
        }
        Ok(self.lines[self.locate(x)].eval(x))
    }

    pub fn value_at_lo(&self) -> Q {
        self.lines[0].eval(self.lo())
    }

    pub fn value_at_hi(&self) -> Q {
        self.lines.last().unwrap().eval(self.hi())
    }

    pub fn is_good(&self) -> bool {
        self.lines.iter().all(|l| !l.slope.is_negative())
    }

    pub fn is_positive(&self) -> bool {
        self.lines.iter().all(|l| l.slope.is_positive())
    }

    /// Slopes strictly increasing from piece to piece.
    pub fn is_strictly_convex(&self) -> bool {
        self.lines.windows(2).all(|w| w[0].slope < w[1].slope)
    }

    /// Right end of the leading zero-slope piece, or `lo` if there is none.
    pub fn flat_prefix_end(&self) -> &Q {
        if self.lines[0].slope.is_zero() && !self.is_degenerate() {
            &self.breaks[1]
        } else {
            self.lo()
        }
    }

    /// Iterates over `(lo, hi, line)` for every piece.
    pub fn pieces(&self) -> impl Iterator<Item = (&Q, &Q, &Line)> {
        self.lines
            .iter()
            .enumerate()
            .map(move |(k, l)| (&self.breaks[k], &self.breaks[k + 1], l))
    }

    /// Pointwise maximum of slope-sorted lines on `[lo, hi]`, built by one
    /// stack sweep. Equal slopes keep the larger intercept.
    pub fn upper_envelope(lines: &[Line], lo: &Q, hi: &Q) -> Result<PwlFunction> {
        if lines.is_empty() {
            return Err(Error::Empty("upper envelope of no lines".into()));
        }
        if lo > hi {
            return precondition("empty domain");
        }
        if lines.windows(2).any(|w| w[0].slope > w[1].slope) {
            return precondition("envelope lines must be sorted by slope");
        }
        let mut hull: Vec<&Line> = Vec::with_capacity(lines.len());
        for l in lines {
            if let Some(top) = hull.last() {
                if top.slope == l.slope {
                    if top.intercept >= l.intercept {
                        continue;
                    }
                    hull.pop();
                }
            }
            while hull.len() >= 2 {
                let a = hull[hull.len() - 2];
                let b = hull[hull.len() - 1];
                if a.crossing(l).unwrap() <= a.crossing(b).unwrap() {
                    hull.pop();
                } else {
                    break;
                }
            }
            hull.push(l);
        }
        let cuts: Vec<Q> = hull.windows(2).map(|w| w[0].crossing(w[1]).unwrap()).collect();
        let first = cuts.partition_point(|z| z <= lo);
        if lo == hi {
            return Ok(PwlFunction {
                breaks: vec![lo.clone(), hi.clone()],
                lines: vec![hull[first].clone()],
            });
        }
        let last = cuts.partition_point(|z| z < hi);
        let mut breaks = vec![lo.clone()];
        breaks.extend(cuts[first..last].iter().cloned());
        breaks.push(hi.clone());
        let ls = hull[first..=last].iter().map(|l| (*l).clone()).collect();
        Ok(PwlFunction { breaks, lines: ls })
    }

    /// Inverse of a positive function, on `[f(lo), f(hi)]`.
    pub fn inverse(&self) -> Result<PwlFunction> {
        if self.is_degenerate() {
            let v = self.value_at_lo();
            return Ok(PwlFunction {
                breaks: vec![v.clone(), v],
                lines: vec![Line::constant(self.lo().clone())],
            });
        }
        if !self.is_positive() {
            return Err(Error::NotPositive("inverse needs strictly positive slopes".into()));
        }
        let mut breaks = Vec::with_capacity(self.breaks.len());
        breaks.push(self.value_at_lo());
        for (k, l) in self.lines.iter().enumerate() {
            breaks.push(l.eval(&self.breaks[k + 1]));
        }
        let lines = self
            .lines
            .iter()
            .map(|l| {
                let m = Q::from_integer(1.into()) / &l.slope;
                let b = -(&l.intercept * &m);
                Line {
                    slope: m,
                    intercept: b,
                    tag: l.tag,
                }
            })
            .collect();
        Ok(PwlFunction { breaks, lines })
    }

    pub fn restrict(&self, lo: &Q, hi: &Q) -> Result<PwlFunction> {
        if lo > hi || lo < self.lo() || hi > self.hi() {
            return precondition(format!(
                "cannot restrict [{}, {}] to [{lo}, {hi}]",
                self.lo(),
                self.hi()
            ));
        }
        let first = self.locate(lo);
        if lo == hi {
            return Ok(PwlFunction {
                breaks: vec![lo.clone(), hi.clone()],
                lines: vec![self.lines[first].clone()],
            });
        }
        let last = self.breaks[1..].partition_point(|b| b < hi).min(self.lines.len() - 1);
        let mut breaks = vec![lo.clone()];
        breaks.extend(self.breaks[first + 1..=last].iter().cloned());
        breaks.push(hi.clone());
        Ok(PwlFunction {
            breaks,
            lines: self.lines[first..=last].to_vec(),
        })
    }

    fn map_lines(&self, f: impl Fn(&Line) -> Line) -> PwlFunction {
        let mut g = PwlFunction {
            breaks: self.breaks.clone(),
            lines: self.lines.iter().map(f).collect(),
        };
        g.canonicalize();
        g
    }

    /// `c * f`, for `c > 0`.
    pub fn scale(&self, c: &Q) -> Result<PwlFunction> {
        if !c.is_positive() {
            return precondition("scale factor must be positive");
        }
        Ok(self.map_lines(|l| l.scaled(c)))
    }

    /// `alpha -> f(alpha - c)` on `[lo + c, hi + c]`.
    pub fn shift_arg(&self, c: &Q) -> PwlFunction {
        PwlFunction {
            breaks: self.breaks.iter().map(|b| b + c).collect(),
            lines: self.lines.iter().map(|l| l.shifted_arg(c)).collect(),
        }
    }

    pub fn add_const(&self, c: &Q) -> PwlFunction {
        PwlFunction {
            breaks: self.breaks.clone(),
            lines: self.lines.iter().map(|l| l.plus_const(c)).collect(),
        }
    }

    pub fn add_line(&self, line: &Line) -> PwlFunction {
        self.map_lines(|l| l.plus(line))
    }

    /// Restriction to the overlap of the two domains, piece-aligned.
    fn overlay<'a>(&'a self, g: &'a PwlFunction) -> Result<Vec<(Q, Q, &'a Line, &'a Line)>> {
        let lo = max_q(self.lo(), g.lo());
        let hi = min_q(self.hi(), g.hi());
        if lo > hi {
            return Err(Error::DisjointDomains);
        }
        if lo == hi {
            return Ok(vec![(
                lo.clone(),
                hi,
                &self.lines[self.locate(&lo)],
                &g.lines[g.locate(&lo)],
            )]);
        }
        let mut pts: Vec<Q> = self
            .breaks
            .iter()
            .chain(g.breaks.iter())
            .filter(|b| **b > lo && **b < hi)
            .cloned()
            .collect();
        pts.push(lo);
        pts.push(hi);
        pts.sort();
        pts.dedup();
        Ok(pts
            .windows(2)
            .map(|w| {
                (
                    w[0].clone(),
                    w[1].clone(),
                    &self.lines[self.locate(&w[0])],
                    &g.lines[g.locate(&w[0])],
                )
            })
            .collect())
    }

    /// Pointwise sum on the overlap of the domains.
    pub fn add(&self, g: &PwlFunction) -> Result<PwlFunction> {
        let segs = self.overlay(g)?;
        let mut breaks = vec![segs[0].0.clone()];
        let mut lines = Vec::with_capacity(segs.len());
        for (_, b, l1, l2) in segs {
            breaks.push(b);
            lines.push(l1.plus(l2));
        }
        let mut f = PwlFunction { breaks, lines };
        f.canonicalize();
        Ok(f)
    }

    fn merge_with(&self, g: &PwlFunction, take_max: bool) -> Result<PwlFunction> {
        let segs = self.overlay(g)?;
        let mut breaks = vec![segs[0].0.clone()];
        let mut lines = Vec::with_capacity(segs.len() + 2);
        let pick = |a: &Q, b: &Q| if take_max { a > b } else { a < b };
        for (a, b, l1, l2) in segs {
            let (v1, v2) = (l1.eval(&a), l2.eval(&a));
            let first = if v1 == v2 {
                pick(&l1.slope, &l2.slope)
            } else {
                pick(&v1, &v2)
            };
            let (p, q) = if first { (l1, l2) } else { (l2, l1) };
            if let Some(z) = p.crossing(q) {
                if z > a && z < b {
                    lines.push(p.clone());
                    breaks.push(z);
                    lines.push(q.clone());
                    breaks.push(b);
                    continue;
                }
            }
            lines.push(p.clone());
            breaks.push(b);
        }
        let mut f = PwlFunction { breaks, lines };
        f.canonicalize();
        Ok(f)
    }

    /// Pointwise maximum on the overlap of the domains.
    pub fn merge_max(&self, g: &PwlFunction) -> Result<PwlFunction> {
        self.merge_with(g, true)
    }

    /// Pointwise minimum on the overlap of the domains.
    pub fn merge_min(&self, g: &PwlFunction) -> Result<PwlFunction> {
        self.merge_with(g, false)
    }

    /// Maximum of `f - g` over `[lo, hi]` and its smallest maximiser.
    pub fn max_difference(&self, g: &PwlFunction, lo: &Q, hi: &Q) -> Result<(Q, Q)> {
        if lo > hi || !self.contains(lo) || !self.contains(hi) || !g.contains(lo) || !g.contains(hi) {
            return precondition("max_difference interval must lie in both domains");
        }
        let f = self.restrict(lo, hi)?;
        let gg = g.restrict(lo, hi)?;
        let mut best: Option<(Q, Q)> = None;
        for (a, b, l1, l2) in f.overlay(&gg)? {
            for x in [a, b] {
                let v = l1.eval(&x) - l2.eval(&x);
                if best.as_ref().is_none_or(|(bv, _)| v > *bv) {
                    best = Some((v, x));
                }
            }
        }
        Ok(best.unwrap())
    }

    pub fn to_partial(&self) -> PartialPwl {
        PartialPwl::from(self)
    }

    /// CSV rows `q,value,slope_right`; the final breakpoint has an empty slope.
    pub fn to_csv(&self) -> String {
        self.to_partial().to_csv()
    }
}

impl fmt::Display for PwlFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.to_partial(), f)
    }
}

/// A closed piece `[lo, hi]` of a [`PartialPwl`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Piece {
    pub lo: Q,
    pub hi: Q,
    pub line: Line,
}

/// Lower semicontinuous piecewise-linear function with gaps (+infinity).
/// Pieces are sorted by `(lo, hi)` and have pairwise disjoint interiors.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PartialPwl {
    pieces: Vec<Piece>,
}

impl From<&PwlFunction> for PartialPwl {
    fn from(f: &PwlFunction) -> Self {
        let pieces = f
            .pieces()
            .map(|(a, b, l)| Piece {
                lo: a.clone(),
                hi: b.clone(),
                line: l.clone(),
            })
            .collect();
        PartialPwl { pieces }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Op {
    Min,
    Max,
}

/// Result of a supremum query; `attained` is false when the supremum is
/// only approached as a one-sided limit at `arg`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SupResult {
    pub value: Q,
    pub arg: Q,
    pub attained: bool,
}

impl PartialPwl {
    pub fn empty() -> PartialPwl {
        PartialPwl::default()
    }

    pub fn point(x: Q, v: Q) -> PartialPwl {
        PartialPwl {
            pieces: vec![Piece {
                lo: x.clone(),
                hi: x,
                line: Line::constant(v),
            }],
        }
    }

    pub fn from_pieces(mut pieces: Vec<Piece>) -> Result<PartialPwl> {
        if pieces.iter().any(|p| p.lo > p.hi) {
            return precondition("piece with empty interval");
        }
        pieces.sort_by(|a, b| (&a.lo, &a.hi).cmp(&(&b.lo, &b.hi)));
        for w in pieces.windows(2) {
            if w[1].lo < w[0].hi {
                return precondition("overlapping pieces");
            }
        }
        Ok(PartialPwl { pieces })
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    pub fn size(&self) -> usize {
        self.pieces.len()
    }

    /// Smallest and largest points of the domain.
    pub fn bounds(&self) -> Option<(Q, Q)> {
        let lo = self.pieces.first()?.lo.clone();
        let hi = self.pieces.iter().map(|p| &p.hi).max().unwrap().clone();
        Some((lo, hi))
    }

    pub fn evaluate(&self, x: &Q) -> Option<Q> {
        let end = self.pieces.partition_point(|p| &p.lo <= x);
        let mut best: Option<Q> = None;
        for p in self.pieces[..end].iter().rev() {
            if &p.hi < x {
                break;
            }
            let v = p.line.eval(x);
            if best.as_ref().is_none_or(|b| v < *b) {
                best = Some(v);
            }
        }
        best
    }

    pub fn add_const(&self, c: &Q) -> PartialPwl {
        let pieces = self
            .pieces
            .iter()
            .map(|p| Piece {
                lo: p.lo.clone(),
                hi: p.hi.clone(),
                line: p.line.plus_const(c),
            })
            .collect();
        PartialPwl { pieces }
    }

    pub fn shift_arg(&self, c: &Q) -> PartialPwl {
        let pieces = self
            .pieces
            .iter()
            .map(|p| Piece {
                lo: &p.lo + c,
                hi: &p.hi + c,
                line: p.line.shifted_arg(c),
            })
            .collect();
        PartialPwl { pieces }
    }

    /// Restriction to `[lo, hi]`.
    pub fn restrict(&self, lo: &Q, hi: &Q) -> PartialPwl {
        let pieces = self
            .pieces
            .iter()
            .filter(|p| &p.hi >= lo && &p.lo <= hi)
            .map(|p| Piece {
                lo: max_q(&p.lo, lo),
                hi: min_q(&p.hi, hi),
                line: p.line.clone(),
            })
            .collect();
        let mut f = PartialPwl { pieces };
        f.canonicalize();
        f
    }

    /// Pointwise minimum; gaps count as +infinity, so the domain is the union.
    pub fn merge_min(fs: &[&PartialPwl]) -> PartialPwl {
        combine(fs, Op::Min)
    }

    /// Pointwise maximum on the intersection of the domains.
    pub fn merge_max(f: &PartialPwl, g: &PartialPwl) -> PartialPwl {
        combine(&[f, g], Op::Max)
    }

    /// Merges touching co-linear pieces and drops point pieces that do not
    /// lower the value represented by their neighbours.
    pub fn canonicalize(&mut self) {
        let src = std::mem::take(&mut self.pieces);
        let mut out: Vec<Piece> = Vec::with_capacity(src.len());
        for p in src {
            if p.lo == p.hi {
                let v = p.line.eval(&p.lo);
                if let Some(last) = out.last() {
                    if last.hi == p.lo && last.line.eval(&p.lo) <= v {
                        continue;
                    }
                }
            }
            if let Some(last) = out.last_mut() {
                if last.hi == p.lo && last.line.same(&p.line) {
                    last.hi = p.hi;
                    continue;
                }
                if last.lo == last.hi && last.hi == p.lo && p.line.eval(&p.lo) <= last.line.eval(&last.lo) {
                    out.pop();
                }
            }
            out.push(p);
        }
        self.pieces = out;
    }

    /// Converts to a continuous function; fails on gaps or jumps.
    pub fn to_pwl(&self) -> Result<PwlFunction> {
        let mut f = self.clone();
        f.canonicalize();
        if f.pieces.is_empty() {
            return Err(Error::Empty("function with empty domain".into()));
        }
        if f.pieces.len() > 1 && f.pieces.iter().any(|p| p.lo == p.hi) {
            return precondition("function has isolated point values");
        }
        let mut breaks = vec![f.pieces[0].lo.clone()];
        let mut lines = Vec::with_capacity(f.pieces.len());
        for (k, p) in f.pieces.iter().enumerate() {
            if k > 0 && f.pieces[k - 1].hi != p.lo {
                return precondition("function has a gap");
            }
            breaks.push(p.hi.clone());
            lines.push(p.line.clone());
        }
        PwlFunction::from_parts(breaks, lines)
    }

    /// True if every slope is nonnegative and no jump goes downwards.
    pub fn is_nondecreasing(&self) -> bool {
        if self.pieces.iter().any(|p| p.line.slope.is_negative()) {
            return false;
        }
        let mut prev: Option<(Q, Q)> = None;
        for p in &self.pieces {
            let here = self.evaluate(&p.lo).unwrap();
            if let Some((x, v)) = &prev {
                if *x > p.lo || *v > here {
                    return false;
                }
            }
            prev = Some((p.hi.clone(), p.line.eval(&p.hi)));
        }
        true
    }

    /// `sup (f - g)` over the common domain inside `[lo, hi]`; ties go to the
    /// smallest argument, preferring attained values. `None` when the
    /// domains do not meet.
    pub fn sup_difference(f: &PartialPwl, g: &PartialPwl, lo: &Q, hi: &Q) -> Option<SupResult> {
        let f = f.restrict(lo, hi);
        let g = g.restrict(lo, hi);
        let pts = breakpoints(&[&f, &g]);
        let mut cands: Vec<(Q, Q, bool)> = Vec::new();
        for x in &pts {
            if let (Some(a), Some(b)) = (f.evaluate(x), g.evaluate(x)) {
                cands.push((a - b, x.clone(), true));
            }
        }
        let mut cf = 0;
        let mut cg = 0;
        for w in pts.windows(2) {
            let lf = covering(&f.pieces, &mut cf, &w[0], &w[1]);
            let lg = covering(&g.pieces, &mut cg, &w[0], &w[1]);
            if let (Some(a), Some(b)) = (lf, lg) {
                cands.push((a.eval(&w[0]) - b.eval(&w[0]), w[0].clone(), false));
                cands.push((a.eval(&w[1]) - b.eval(&w[1]), w[1].clone(), false));
            }
        }
        let best = cands.iter().map(|c| &c.0).max()?.clone();
        let pick = cands
            .iter()
            .filter(|c| c.0 == best && c.2)
            .min_by(|a, b| a.1.cmp(&b.1))
            .or_else(|| cands.iter().filter(|c| c.0 == best).min_by(|a, b| a.1.cmp(&b.1)))
            .unwrap();
        Some(SupResult {
            value: best,
            arg: pick.1.clone(),
            attained: pick.2,
        })
    }

    /// CSV rows `q,value,slope_right`. A row with an empty slope closes a
    /// contiguous stretch (or is an isolated point value).
    pub fn to_csv(&self) -> String {
        let mut out = String::from("q,value,slope_right\n");
        for (k, p) in self.pieces.iter().enumerate() {
            if p.lo == p.hi {
                out.push_str(&format!("{},{},\n", qfmt(&p.lo), qfmt(&p.line.eval(&p.lo))));
                continue;
            }
            out.push_str(&format!(
                "{},{},{}\n",
                qfmt(&p.lo),
                qfmt(&p.line.eval(&p.lo)),
                qfmt(&p.line.slope)
            ));
            let continues = self.pieces.get(k + 1).is_some_and(|n| n.lo == p.hi && n.lo != n.hi);
            if !continues {
                out.push_str(&format!("{},{},\n", qfmt(&p.hi), qfmt(&p.line.eval(&p.hi))));
            }
        }
        out
    }
}

impl fmt::Display for PartialPwl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .pieces
            .iter()
            .map(|p| format!("[{}, {}]: {}*a + {}", p.lo, p.hi, p.line.slope, p.line.intercept))
            .collect();
        write!(f, "{}", parts.join("; "))
    }
}

fn breakpoints(fs: &[&PartialPwl]) -> Vec<Q> {
    let mut pts: Vec<Q> = fs
        .iter()
        .flat_map(|f| f.pieces.iter().flat_map(|p| [p.lo.clone(), p.hi.clone()]))
        .collect();
    pts.sort();
    pts.dedup();
    pts
}

/// The line of the piece covering the open interval `(a, b)`, advancing a
/// cursor that only moves forward.
fn covering<'a>(pieces: &'a [Piece], cur: &mut usize, a: &Q, b: &Q) -> Option<&'a Line> {
    while *cur < pieces.len() && &pieces[*cur].hi <= a {
        *cur += 1;
    }
    let mut k = *cur;
    while k < pieces.len() && &pieces[k].lo <= a {
        if &pieces[k].hi >= b {
            return Some(&pieces[k].line);
        }
        k += 1;
    }
    None
}

/// Lower envelope of a few lines on `[a, b]`.
fn lower_env(lines: &[&Line], a: &Q, b: &Q) -> Vec<(Q, Q, Line)> {
    let pick_start = |x: &Q| {
        let mut best = lines[0];
        let mut bv = best.eval(x);
        for l in &lines[1..] {
            let v = l.eval(x);
            if v < bv || (v == bv && l.slope < best.slope) {
                best = l;
                bv = v;
            }
        }
        best
    };
    let mut out = Vec::new();
    let mut x = a.clone();
    let mut cur = pick_start(&x);
    loop {
        let mut next: Option<(Q, &Line)> = None;
        for l in lines {
            if l.slope < cur.slope {
                let z = cur.crossing(l).unwrap();
                if z > x && &z < b {
                    let better = match &next {
                        None => true,
                        Some((nz, nl)) => z < *nz || (z == *nz && l.slope < nl.slope),
                    };
                    if better {
                        next = Some((z, l));
                    }
                }
            }
        }
        match next {
            Some((z, l)) => {
                out.push((x, z.clone(), cur.clone()));
                x = z;
                cur = l;
            }
            None => {
                out.push((x, b.clone(), cur.clone()));
                return out;
            }
        }
    }
}

fn combine(fs: &[&PartialPwl], op: Op) -> PartialPwl {
    let pts = breakpoints(fs);
    let mut cursors = vec![0usize; fs.len()];
    // Segment pieces between consecutive breakpoints, `None` for gaps.
    let mut segs: Vec<Option<Vec<(Q, Q, Line)>>> = Vec::with_capacity(pts.len());
    for w in pts.windows(2) {
        let mut ls: Vec<&Line> = Vec::with_capacity(fs.len());
        let mut missing = false;
        for (f, c) in fs.iter().zip(cursors.iter_mut()) {
            match covering(&f.pieces, c, &w[0], &w[1]) {
                Some(l) => ls.push(l),
                None => missing = true,
            }
        }
        let seg = match op {
            Op::Min if !ls.is_empty() => Some(lower_env(&ls, &w[0], &w[1])),
            Op::Max if !missing => {
                let neg: Vec<Line> = ls.iter().map(|l| l.neg()).collect();
                let refs: Vec<&Line> = neg.iter().collect();
                Some(
                    lower_env(&refs, &w[0], &w[1])
                        .into_iter()
                        .map(|(a, b, l)| (a, b, l.neg()))
                        .collect(),
                )
            }
            _ => None,
        };
        segs.push(seg);
    }
    let mut pieces = Vec::new();
    for (k, x) in pts.iter().enumerate() {
        let vals: Vec<Option<Q>> = fs.iter().map(|f| f.evaluate(x)).collect();
        let v = match op {
            Op::Min => vals.into_iter().flatten().min(),
            Op::Max => {
                if vals.iter().all(|v| v.is_some()) {
                    vals.into_iter().flatten().max()
                } else {
                    None
                }
            }
        };
        let left = if k > 0 {
            segs[k - 1].as_ref().map(|s| s.last().unwrap().2.eval(x))
        } else {
            None
        };
        let right = segs.get(k).and_then(|s| s.as_ref().map(|s| s[0].2.eval(x)));
        let represented = match (left, right) {
            (Some(a), Some(b)) => Some(min_q(&a, &b)),
            (a, b) => a.or(b),
        };
        if let Some(v) = v {
            if represented.is_none_or(|r| v < r) {
                pieces.push(Piece {
                    lo: x.clone(),
                    hi: x.clone(),
                    line: Line::constant(v),
                });
            }
        }
        if let Some(Some(seg)) = segs.get(k) {
            for (a, b, l) in seg {
                pieces.push(Piece {
                    lo: a.clone(),
                    hi: b.clone(),
                    line: l.clone(),
                });
            }
        }
    }
    let mut out = PartialPwl { pieces };
    out.canonicalize();
    out
}

/// Convenience for tests and callers that want `max(f, c)`.
pub fn clamp_below(f: &PartialPwl, c: &Q) -> PartialPwl {
    match f.bounds() {
        None => PartialPwl::empty(),
        Some((lo, hi)) => {
            let k = PwlFunction::constant(lo, hi, c.clone()).unwrap().to_partial();
            PartialPwl::merge_max(f, &k)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{frac, int};

    fn ln(m: i64, b: i64) -> Line {
        Line::new(int(m), int(b))
    }

    fn lnq(m: Q, b: Q) -> Line {
        Line::new(m, b)
    }

    #[test]
    fn envelope_examples() {
        let f = PwlFunction::upper_envelope(&[ln(0, 1), ln(1, 0)], &int(0), &int(2)).unwrap();
        assert_eq!(f.breakpoints(), &[int(0), int(1), int(2)]);
        assert_eq!(f.evaluate(&int(1)).unwrap(), int(1));
        assert_eq!(f.evaluate(&int(2)).unwrap(), int(2));
        assert_eq!(f.evaluate(&frac(1, 2)).unwrap(), int(1));
        let g = PwlFunction::upper_envelope(&[ln(0, 0), ln(1, -10)], &int(0), &int(2)).unwrap();
        assert_eq!(g.size(), 1);
        assert_eq!(g.lines()[0], ln(0, 0));
        let h = PwlFunction::upper_envelope(&[ln(2, 3)], &int(0), &int(2)).unwrap();
        assert_eq!(h.lines(), &[ln(2, 3)]);
        assert!(PwlFunction::upper_envelope(&[], &int(0), &int(1)).is_err());
        assert!(PwlFunction::upper_envelope(&[ln(1, 0), ln(0, 0)], &int(0), &int(1)).is_err());
        let d = PwlFunction::upper_envelope(&[ln(0, 1), ln(1, 0), ln(1, 2)], &int(3), &int(3)).unwrap();
        assert_eq!(d.evaluate(&int(3)).unwrap(), int(5));
    }

    #[test]
    fn inverse_examples() {
        let f = PwlFunction::linear(int(0), int(3), ln(2, 1)).unwrap();
        let g = f.inverse().unwrap();
        assert_eq!((g.lo(), g.hi()), (&int(1), &int(7)));
        assert_eq!(g.lines()[0], lnq(frac(1, 2), frac(-1, 2)));
        let f = PwlFunction::from_parts(vec![int(0), int(1), int(2)], vec![ln(1, 0), ln(2, -1)]).unwrap();
        let g = f.inverse().unwrap();
        assert_eq!(g.breakpoints(), &[int(0), int(1), int(3)]);
        assert_eq!(g.lines()[1], lnq(frac(1, 2), frac(1, 2)));
        assert_eq!(g.inverse().unwrap(), f);
        assert!(PwlFunction::constant(int(0), int(1), int(1))
            .unwrap()
            .inverse()
            .is_err());
    }

    #[test]
    fn arithmetic_examples() {
        let id = PwlFunction::linear(int(0), int(2), ln(1, 0)).unwrap();
        let one = PwlFunction::constant(int(0), int(2), int(1)).unwrap();
        assert_eq!(id.add(&one).unwrap().lines(), &[ln(1, 1)]);
        let s = id.shift_arg(&int(1));
        assert_eq!((s.lo(), s.hi()), (&int(1), &int(3)));
        assert_eq!(s.lines(), &[ln(1, -1)]);
        let two = PwlFunction::linear(int(0), int(1), ln(2, 0)).unwrap();
        assert_eq!(two.scale(&int(3)).unwrap().lines(), &[ln(6, 0)]);
        let far = PwlFunction::constant(int(5), int(6), int(1)).unwrap();
        assert_eq!(id.add(&far), Err(Error::DisjointDomains));
    }

    #[test]
    fn merge_examples() {
        let a = PwlFunction::linear(int(0), int(2), ln(1, 0)).unwrap();
        let b = PwlFunction::linear(int(0), int(2), ln(-1, 2)).unwrap();
        let m = PartialPwl::merge_min(&[&a.to_partial(), &b.to_partial()]);
        assert_eq!(m.to_pwl().unwrap().breakpoints(), &[int(0), int(1), int(2)]);
        assert_eq!(a.merge_min(&b).unwrap(), m.to_pwl().unwrap());
        let f = PwlFunction::linear(int(0), int(1), ln(1, 0)).unwrap().to_partial();
        let g = PwlFunction::linear(int(2), int(3), ln(1, 0)).unwrap().to_partial();
        let m = PartialPwl::merge_min(&[&f, &g]);
        assert_eq!(m.size(), 2);
        assert_eq!(m.evaluate(&frac(3, 2)), None);
        let one = PwlFunction::constant(int(0), int(2), int(1)).unwrap();
        let mx = a.merge_max(&one).unwrap();
        assert_eq!(mx.breakpoints(), &[int(0), int(1), int(2)]);
        assert_eq!(mx.lines(), &[ln(0, 1), ln(1, 0)]);
    }

    #[test]
    fn point_values_survive_min_merge() {
        let body = PwlFunction::linear(int(0), int(2), ln(1, 1)).unwrap().to_partial();
        let drop = PartialPwl::point(int(0), int(0));
        let m = PartialPwl::merge_min(&[&body, &drop]);
        assert_eq!(m.evaluate(&int(0)), Some(int(0)));
        assert_eq!(m.evaluate(&frac(1, 100)), Some(frac(101, 100)));
        assert!(m.to_pwl().is_err());
        assert!(m.is_nondecreasing());
        let mx = clamp_below(&m, &frac(1, 2));
        assert_eq!(mx.evaluate(&int(0)), Some(frac(1, 2)));
    }

    #[test]
    fn max_difference_examples() {
        let x = PwlFunction::linear(int(0), int(2), ln(1, 0)).unwrap();
        let one = PwlFunction::constant(int(0), int(2), int(1)).unwrap();
        assert_eq!(x.max_difference(&one, &int(0), &int(2)).unwrap(), (int(1), int(2)));
        assert_eq!(x.max_difference(&x, &int(0), &int(2)).unwrap(), (int(0), int(0)));
        let env = PwlFunction::upper_envelope(&[ln(0, 1), ln(1, 0)], &int(0), &int(2)).unwrap();
        let half = PwlFunction::linear(int(0), int(2), lnq(frac(1, 2), int(0))).unwrap();
        assert_eq!(env.max_difference(&half, &int(0), &int(2)).unwrap(), (int(1), int(0)));
    }

    #[test]
    fn sup_of_lower_semicontinuous_difference() {
        let f = PwlFunction::linear(int(0), int(1), ln(1, 1)).unwrap().to_partial();
        let g = PartialPwl::merge_min(&[
            &PwlFunction::linear(int(0), int(1), ln(0, 3)).unwrap().to_partial(),
            &PartialPwl::point(int(1), int(0)),
        ]);
        let r = PartialPwl::sup_difference(&f, &g, &int(0), &int(1)).unwrap();
        assert_eq!(
            r,
            SupResult {
                value: int(2),
                arg: int(1),
                attained: true
            }
        );
        let r = PartialPwl::sup_difference(&g, &f, &int(0), &int(1)).unwrap();
        assert_eq!(
            r,
            SupResult {
                value: int(2),
                arg: int(0),
                attained: true
            }
        );
        let h = PartialPwl::merge_min(&[
            &PwlFunction::linear(int(0), int(1), ln(0, 5)).unwrap().to_partial(),
            &PartialPwl::point(int(1), int(0)),
        ]);
        let r = PartialPwl::sup_difference(&f, &h.add_const(&int(-5)), &int(0), &int(1)).unwrap();
        assert_eq!(
            r,
            SupResult {
                value: int(7),
                arg: int(1),
                attained: true
            }
        );
        let k = PwlFunction::linear(int(0), int(1), ln(0, 0)).unwrap().to_partial();
        let dropped = PartialPwl::merge_min(&[&f, &PartialPwl::point(int(1), int(0))]);
        let r = PartialPwl::sup_difference(&dropped, &k, &int(0), &int(1)).unwrap();
        assert_eq!(
            r,
            SupResult {
                value: int(2),
                arg: int(1),
                attained: false
            }
        );
    }

    #[test]
    fn csv_dump() {
        let env = PwlFunction::upper_envelope(&[ln(0, 1), ln(1, 0)], &int(0), &int(2)).unwrap();
        assert_eq!(env.to_csv(), "q,value,slope_right\n0,1,0\n1,1,1\n2,2,\n");
    }
}
