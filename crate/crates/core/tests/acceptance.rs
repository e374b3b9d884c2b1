//! Acceptance criteria 1-6. Each test prints one PASS/FAIL line to stderr
//! (bypassing the harness capture) and then asserts.

mod common;

use std::io::Write;
use std::time::{Duration, Instant};

use common::*;
use pathregret::evacuation::{optimal_sink, theta};
use pathregret::oracle::{
    check_shift, exact_min_max, exact_min_max_y, grid_min_max, grid_min_max_y, grid_rmax_many, simulate_evacuation,
    GridConfig, SimConfig,
};
use pathregret::path_model::{PathInstance, Scenario};
use pathregret::profiles::{m_edge, m_k, min_max_profile, min_max_y_profile, WeightBox};
use pathregret::pwl::{Line, PartialPwl, PwlFunction};
use pathregret::rational::{frac, int, max_q, min_q, to_f64, zero};
use pathregret::regret::{g_side, h_side, r_max, r_opt};
use pathregret::Q;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn report(id: u32, ok: bool, detail: String) {
    let line = format!(
        "acceptance criterion {id}: {} ({detail})\n",
        if ok { "PASS" } else { "FAIL" }
    );
    std::io::stderr().lock().write_all(line.as_bytes()).unwrap();
    assert!(ok, "{line}");
}

fn random_sink(rng: &mut ChaCha8Rng, p: &PathInstance) -> Q {
    if rng.gen_bool(0.3) {
        p.x(rng.gen_range(0..=p.n())).clone()
    } else {
        p.length() * frac(rng.gen_range(0..=64), 64)
    }
}

fn c_min(p: &PathInstance) -> Q {
    p.capacities().iter().min().unwrap().clone()
}

#[test]
fn criterion_1_t1_end_to_end() {
    let p = t1();
    let start = Instant::now();
    let at_vertices: Vec<Q> = (0..=2).map(|i| r_max(&p, p.x(i)).unwrap().value).collect();
    let opt = r_opt(&p).unwrap();
    let elapsed = start.elapsed();
    let grid = grid_rmax_many(&p, p.positions(), &GridConfig { h: frac(1, 64) }).unwrap();
    let ok = at_vertices == qs(&[4, 3, 4])
        && grid == at_vertices
        && opt.value == int(3)
        && opt.location.value == int(1)
        && elapsed < Duration::from_secs(1);
    report(
        1,
        ok,
        format!(
            "R_max at vertices {:?}, R_OPT {} at {}, solver time {:?}",
            at_vertices.iter().map(|q| q.to_string()).collect::<Vec<_>>(),
            opt.value,
            opt.location.value,
            elapsed
        ),
    );
}

#[test]
fn criterion_2_closed_form_vs_simulation() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (dt1, dt2) = (frac(1, 256), frac(1, 512));
    let mut rows = vec![];
    for _ in 0..100 {
        let n = rng.gen_range(1..=6);
        let lengths: Vec<Q> = (0..n).map(|_| rq(&mut rng, 1, 16, 1) / int(4)).collect();
        let caps: Vec<Q> = (0..n).map(|_| rq(&mut rng, 1, 16, 1) / int(4)).collect();
        let w: Vec<Q> = (0..=n).map(|_| rq(&mut rng, 1, 16, 1) / int(4)).collect();
        let p = PathInstance::from_lengths(&lengths, caps, vec![zero(); n + 1], vec![int(4); n + 1]).unwrap();
        let s = Scenario::new(w).unwrap();
        let x = random_sink(&mut rng, &p);
        let exact = theta(&p, &x, &s).unwrap().theta;
        let e1 = simulate_evacuation(&p, &x, &s, &SimConfig::new(dt1.clone())).unwrap() - &exact;
        let e2 = simulate_evacuation(&p, &x, &s, &SimConfig::new(dt2.clone())).unwrap() - &exact;
        rows.push((n, e1, e2));
    }
    // C is the worst error at dt = 1/256 per unit of n * dt.
    let c = rows
        .iter()
        .map(|(n, e1, _)| e1 / (int(*n as i64) * &dt1))
        .max()
        .unwrap();
    let nonneg = rows.iter().all(|(_, e1, e2)| e1 >= &zero() && e2 >= &zero());
    let halves = rows.iter().all(|(n, _, e2)| e2 <= &(&c * int(*n as i64) * &dt2));
    let sum1: Q = rows.iter().map(|r| r.1.clone()).sum();
    let sum2: Q = rows.iter().map(|r| r.2.clone()).sum();
    let ratio = if sum1 > zero() { &sum2 / &sum1 } else { zero() };
    let elapsed = start.elapsed();
    let ok = nonneg && halves && c <= int(4) && ratio <= frac(3, 5) && elapsed < Duration::from_secs(120);
    report(
        2,
        ok,
        format!(
            "C = {:.3}, all errors within C*n*dt at dt = 1/512: {halves}, aggregate error ratio 1/512 vs 1/256 = {:.3}, {:?}",
            to_f64(&c),
            to_f64(&ratio),
            elapsed
        ),
    );
}

#[test]
fn criterion_3_grid_agreement() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let h = frac(1, 64);
    let mut worst = zero();
    let mut ok = true;
    let mut checks = 0;
    let mut nonzero = 0;
    for trial in 0..30 {
        let n = rng.gen_range(1..=5);
        // Interval ends off the 1/64 lattice; the grid still contains them as anchors.
        let lengths: Vec<Q> = (0..n).map(|_| rq(&mut rng, 1, 16, 1) / int(4)).collect();
        let caps: Vec<Q> = (0..n).map(|_| rq(&mut rng, 1, 16, 1) / int(4)).collect();
        let lo: Vec<Q> = (0..=n)
            .map(|_| if trial % 3 == 0 { zero() } else { rq(&mut rng, 0, 2, 3) })
            .collect();
        let hi: Vec<Q> = lo.iter().map(|l| l + frac(rng.gen_range(0..=4), 7)).collect();
        let p = PathInstance::from_lengths(&lengths, caps, lo, hi).unwrap();
        let xs: Vec<Q> = (0..5).map(|_| random_sink(&mut rng, &p)).collect();
        let grid = grid_rmax_many(&p, &xs, &GridConfig { h: h.clone() }).unwrap();
        let bound = int(2) * &h / c_min(&p);
        for (x, g) in xs.iter().zip(&grid) {
            let d = r_max(&p, x).unwrap().value - g;
            ok &= d >= zero() && d <= bound;
            nonzero += usize::from(d > zero());
            worst = max_q(&worst, &(d / &bound));
            checks += 1;
        }
    }
    let elapsed = start.elapsed();
    ok &= elapsed < Duration::from_secs(600);
    report(
        3,
        ok,
        format!(
            "{checks} sinks, {nonzero} with a positive gap, worst gap / (2h/c_min) = {:.3}, {:?}",
            to_f64(&worst),
            elapsed
        ),
    );
}

fn max_slope(f: &PwlFunction) -> Q {
    f.lines().iter().map(|l| l.slope.clone()).max().unwrap()
}

#[test]
fn criterion_4_profile_oracles() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let h = frac(1, 64);
    let mut ok = true;
    let mut checks = 0;
    for trial in 0..100 {
        let y = trial % 2 == 1;
        let mut pair = vec![];
        for _ in 0..2 {
            let lo = rq(&mut rng, 0, 2, 4);
            let size = rng.gen_range(1..=6);
            pair.push(random_pwl(&mut rng, &lo, 2, size, y, false));
        }
        let (fl, fr) = (&pair[0], &pair[1]);
        let bx = WeightBox::new(fl.lo().clone(), fl.hi().clone(), fr.lo().clone(), fr.hi().clone()).unwrap();
        let (a, b) = ((&bx.a1, &bx.a2), (&bx.b1, &bx.b2));
        let lip = max_q(&max_slope(fl), &max_slope(fr));
        let l = rq(&mut rng, -1, 1, 4);
        let r = &l + rq(&mut rng, 0, 1, 4);
        let prof = if y {
            min_max_y_profile(fl, fr, &bx, &l, &r)
        } else {
            min_max_profile(fl, fr, &bx)
        }
        .unwrap();
        let tol = if y { (&lip + int(1)) * &h } else { &lip * &h };
        // Anchors: alpha on a 1/8 grid; the exact oracle there, the brute
        // force grid within the Lipschitz tolerance.
        let (lo, hi) = (bx.alpha_lo(), bx.alpha_hi());
        let mut alpha = lo.clone();
        while alpha <= hi {
            let v = prof.evaluate(&alpha).unwrap();
            let (exact, grid) = if y {
                (
                    exact_min_max_y(fl, fr, a, b, &l, &r, &alpha),
                    grid_min_max_y(fl, fr, a, b, &l, &r, &alpha, &h),
                )
            } else {
                (
                    exact_min_max(fl, fr, a, b, &alpha),
                    grid_min_max(fl, fr, a, b, &alpha, &h),
                )
            };
            let grid = grid.unwrap();
            ok &= exact.as_ref() == Some(&v) && grid >= v && grid <= &v + &tol;
            checks += 1;
            alpha += frac(1, 8);
        }
    }
    let elapsed = start.elapsed();
    ok &= elapsed < Duration::from_secs(120);
    report(4, ok, format!("100 pairs, {checks} anchor points, {:?}", elapsed));
}

/// No strict interior maximum among the samples.
fn unimodal(v: &[Q]) -> bool {
    let m = (0..v.len()).min_by(|&a, &b| v[a].cmp(&v[b])).unwrap_or(0);
    v[..=m].windows(2).all(|w| w[0] >= w[1]) && v[m..].windows(2).all(|w| w[0] <= w[1])
}

fn check_pwl_exactness(rng: &mut ChaCha8Rng) -> bool {
    let mut ok = true;
    for _ in 0..100 {
        let count = rng.gen_range(1..=8);
        let mut lines = vec![];
        for _ in 0..count {
            let m = rq(rng, -3, 3, 4);
            lines.push(Line::new(m, rq(rng, -4, 4, 4)));
        }
        lines.sort_by(|a, b| a.slope.cmp(&b.slope));
        let lo = rq(rng, -2, 0, 4);
        let hi = rq(rng, 1, 3, 4);
        let env = PwlFunction::upper_envelope(&lines, &lo, &hi).unwrap();
        let mut fg = vec![];
        for _ in 0..2 {
            let start = rq(rng, 0, 1, 4);
            let size = rng.gen_range(1..=6);
            fg.push(random_pwl(rng, &start, 3, size, false, false));
        }
        let (f, g) = (&fg[0], &fg[1]);
        let inv = f.inverse().unwrap();
        let (mx, mn) = (
            PwlFunction::merge_max(f, g).unwrap(),
            PwlFunction::merge_min(f, g).unwrap(),
        );
        let pf = f.to_partial();
        let pg = g.to_partial();
        let pmin = PartialPwl::merge_min(&[&pf, &pg]);
        for k in 0..=48 {
            let t = frac(k, 48);
            let x = &lo + (&hi - &lo) * &t;
            let want = lines.iter().map(|l| l.eval(&x)).max().unwrap();
            ok &= env.evaluate(&x).unwrap() == want;
            let u = f.lo() + (f.hi() - f.lo()) * &t;
            let fu = f.evaluate(&u).unwrap();
            ok &= inv.evaluate(&fu).unwrap() == u;
            let z = max_q(f.lo(), g.lo()) + (min_q(f.hi(), g.hi()) - max_q(f.lo(), g.lo())) * &t;
            let (a, b) = (f.evaluate(&z).unwrap(), g.evaluate(&z).unwrap());
            ok &= mx.evaluate(&z).unwrap() == max_q(&a, &b) && mn.evaluate(&z).unwrap() == min_q(&a, &b);
            ok &= pmin.evaluate(&z) == Some(min_q(&a, &b));
        }
    }
    ok
}

#[test]
fn criterion_5_structural_invariants() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut theta_ok = true;
    let mut upper_ok = true;
    for _ in 0..100 {
        let n = rng.gen_range(1..=6);
        let p = random_instance(&mut rng, n, 2, int(2));
        let xs: Vec<Q> = (0..=96).map(|k| p.length() * frac(k, 96)).collect();
        let mut upper = vec![];
        for _ in 0..4 {
            let s = random_scenario(&mut rng, &p);
            let opt = optimal_sink(&p, &s).unwrap().value;
            let th: Vec<Q> = xs.iter().map(|x| theta(&p, x, &s).unwrap().theta).collect();
            theta_ok &= unimodal(&th);
            let reg: Vec<Q> = th.iter().map(|t| t - &opt).collect();
            if upper.is_empty() {
                upper = reg;
            } else {
                upper = upper.iter().zip(&reg).map(|(a, b)| max_q(a, b)).collect();
            }
        }
        upper_ok &= unimodal(&upper);
    }

    let mut rmax_ok = true;
    let mut gh_ok = true;
    let mut replay_ok = true;
    let mut replays = 0;
    let mut shift_ok = true;
    for trial in 0..20 {
        let n = rng.gen_range(1..=5);
        let p = random_instance(&mut rng, n, if trial % 2 == 0 { 0 } else { 2 }, int(2));
        let mirror = p.mirrored();
        let mut xs: Vec<Q> = (0..=24).map(|k| p.length() * frac(k, 24)).collect();
        xs.extend(p.positions().iter().cloned());
        xs.sort();
        xs.dedup();
        let reports: Vec<_> = xs.iter().map(|x| r_max(&p, x).unwrap()).collect();
        rmax_ok &= unimodal(&reports.iter().map(|r| r.value.clone()).collect::<Vec<_>>());
        for (x, rep) in xs.iter().zip(&reports) {
            if let Some(w) = rep.witness.as_ref().filter(|w| w.attained) {
                let s = &w.scenario;
                replay_ok &=
                    p.is_legal(s) && theta(&p, x, s).unwrap().theta - optimal_sink(&p, s).unwrap().value == rep.value;
                replays += 1;
            }
        }
        let g: Vec<Option<Q>> = (0..=n).map(|u| g_side(&p, p.x(u)).unwrap().map(|t| t.value)).collect();
        let hv: Vec<Option<Q>> = (0..=n)
            .map(|u| h_side(&p, &mirror, p.x(u)).unwrap().map(|t| t.value))
            .collect();
        for u in 0..n {
            let d = p.x(u + 1) - p.x(u);
            if let Some(gu) = &g[u] {
                gh_ok &= g[u + 1].as_ref().is_some_and(|g1| gu <= &(g1 - &d));
            }
            if let Some(h1) = &hv[u + 1] {
                gh_ok &= hv[u].as_ref().is_some_and(|h0| h1 <= &(h0 - &d));
            }
        }
        if trial < 10 {
            let r = check_shift(&p, 100, trial as u64).unwrap();
            shift_ok &= r.trials == 100 && r.violations.is_empty();
        }
    }
    let pwl_ok = check_pwl_exactness(&mut rng);
    let ok = theta_ok && upper_ok && rmax_ok && gh_ok && shift_ok && pwl_ok && replay_ok;
    report(
        5,
        ok,
        format!(
            "theta unimodal {theta_ok}, max of regret curves unimodal {upper_ok}, R_max unimodal {rmax_ok}, \
             G/H continuity {gh_ok}, shift monotone over 1000 trials {shift_ok}, pwl exact {pwl_ok}, \
             witness replay {replay_ok} ({replays} replays)"
        ),
    );
}

#[test]
fn criterion_6_size_and_timing() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst_mm = zero();
    let mut worst_y = zero();
    for trial in 0..200 {
        let y = trial % 2 == 1;
        let mut pair = vec![];
        for _ in 0..2 {
            let lo = rq(&mut rng, 0, 2, 4);
            let size = rng.gen_range(1..=8);
            pair.push(random_pwl(&mut rng, &lo, 4, size, y, trial % 5 == 0));
        }
        let (fl, fr) = (&pair[0], &pair[1]);
        let bx = WeightBox::new(fl.lo().clone(), fl.hi().clone(), fr.lo().clone(), fr.hi().clone()).unwrap();
        let inputs = int((fl.size() + fr.size()) as i64);
        if y {
            let l = rq(&mut rng, -2, 2, 4);
            let r = &l + rq(&mut rng, 0, 3, 4);
            let m = min_max_y_profile(fl, fr, &bx, &l, &r).unwrap();
            worst_y = max_q(&worst_y, &(int(m.size() as i64) / &inputs));
        } else {
            let m = min_max_profile(fl, fr, &bx).unwrap();
            worst_mm = max_q(&worst_mm, &(int(m.size() as i64) / &inputs));
        }
    }
    let mut worst_edge = zero();
    for _ in 0..20 {
        let n = rng.gen_range(2..=8);
        let p = random_instance(&mut rng, n, 2, int(2));
        for i in 0..n {
            for j in i + 1..=n {
                let base = p.two_varying(i, j, zero(), zero()).unwrap();
                let bx = WeightBox::new(p.lo(i).clone(), p.hi(i).clone(), p.lo(j).clone(), p.hi(j).clone()).unwrap();
                for k in i..j {
                    let a = m_k(&p, &base, i, j, k, &bx).unwrap().size();
                    let b = m_edge(&p, &base, i, j, k, &bx).unwrap().size();
                    worst_edge = max_q(&worst_edge, &(int(a.max(b) as i64) / int(n as i64 + 1)));
                }
            }
        }
    }
    let big = random_instance(&mut ChaCha8Rng::seed_from_u64(40), 40, 2, int(2));
    let start = Instant::now();
    let opt = r_opt(&big).unwrap();
    let elapsed = start.elapsed();
    let ok = worst_mm <= int(5) && worst_y <= int(10) && worst_edge <= int(20) && elapsed < Duration::from_secs(300);
    report(
        6,
        ok,
        format!(
            "pieces per input piece: min-max {:.2} (bound 5), y-profile {:.2} (bound 10); edge profiles per vertex {:.2} (bound 20); \
             n = 40 minmax-regret {} in {:?}",
            to_f64(&worst_mm),
            to_f64(&worst_y),
            to_f64(&worst_edge),
            opt.value,
            elapsed
        ),
    );
}
