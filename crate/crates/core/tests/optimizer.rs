mod common;

use common::random::{problem, Rng, Shape, LINK_RANGE};
use mmptol_core::param::Category;
use mmptol_core::{
    influence_coefficients, inner_max_min, worst_case_enumerate, worst_case_iterative, Assignment, Error, LinExpr,
    LinearConstraint, OptimizationProblem, ParamKind, Registry, SolverOptions, Status,
};

fn one_param(e: f64) -> OptimizationProblem {
    let mut registry = Registry::new();
    let id = registry.register(ParamKind::Tz, 6, 3, Category::Machining, Some((-e, e))).unwrap();
    let half = 0.25;
    let gaps = vec![LinExpr::constant(half) - LinExpr::param(id), LinExpr::constant(half) + LinExpr::param(id)];
    OptimizationProblem {
        registry,
        outer: vec![(id, Some((-e, e)))],
        outer_constraints: vec![],
        inner: vec![],
        inner_constraints: vec![],
        gaps,
    }
}

/// Largest value of a concave function on [lo, hi]: grid, then golden
/// section inside the best cell.
fn grid_max(f: impl Fn(f64) -> f64, lo: f64, hi: f64, points: usize) -> f64 {
    let h = (hi - lo) / (points - 1) as f64;
    let (mut best_y, mut best) = (lo, f(lo));
    for i in 1..points {
        let y = lo + h * i as f64;
        let v = f(y);
        if v > best {
            (best_y, best) = (y, v);
        }
    }
    let (mut a, mut b) = ((best_y - h).max(lo), (best_y + h).min(hi));
    let r = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..200 {
        let (c, d) = (b - r * (b - a), a + r * (b - a));
        if f(c) >= f(d) {
            b = d;
        } else {
            a = c;
        }
    }
    best.max(f(0.5 * (a + b)))
}

#[test]
fn zero_bounds_give_half_width() {
    let r = worst_case_enumerate(&one_param(0.0)).unwrap();
    assert_eq!(r.status, Status::Bounded);
    assert_eq!(r.value, 0.25);
}

#[test]
fn single_shift_stacks_linearly() {
    let r = worst_case_enumerate(&one_param(0.04)).unwrap();
    assert!((r.value - 0.21).abs() < 1e-15);
    let it = worst_case_iterative(&one_param(0.04), &SolverOptions::default()).unwrap();
    assert_eq!(it.value, r.value);
    // ties between ±e resolve to the lexicographically smallest point
    assert_eq!(r.outer.values().copied().collect::<Vec<_>>(), vec![-0.04]);
}

#[test]
fn symmetric_link_centres() {
    let mut registry = Registry::new();
    let y = registry.register(ParamKind::Tx, 1, 1, Category::GaugeLink, None).unwrap();
    let c = 0.3;
    let p = OptimizationProblem {
        registry,
        outer: vec![],
        outer_constraints: vec![],
        inner: vec![y],
        inner_constraints: vec![
            LinearConstraint::le(LinExpr::param(y), 1.0),
            LinearConstraint::ge(LinExpr::param(y), -1.0),
        ],
        gaps: vec![LinExpr::constant(c) + LinExpr::param(y), LinExpr::constant(c) - LinExpr::param(y)],
    };
    let (v, inner) = inner_max_min(&Assignment::new(), &p).unwrap().unwrap();
    assert!((v - c).abs() < 1e-15);
    assert!(inner[&y].abs() < 1e-15);
    // no outer parameters: the worst case is the inner optimum
    let r = worst_case_iterative(&p, &SolverOptions::default()).unwrap();
    assert!((r.value - c).abs() < 1e-15);
}

#[test]
fn inner_matches_grid_search() {
    let mut rng = Rng::new(7);
    for _ in 0..50 {
        let p = problem(&mut rng, Shape { outer: 3, links: 1, extra_gaps: 1, coupled: false });
        let x: Assignment = p.outer.iter().map(|&(id, b)| (id, rng.range(b.unwrap().0, b.unwrap().1))).collect();
        let (v, _) = inner_max_min(&x, &p).unwrap().unwrap();
        let y = p.inner[0];
        let f = |t: f64| {
            let mut a = x.clone();
            a.insert(y, t);
            p.gaps.iter().map(|g| g.evaluate_or_zero(&a)).fold(f64::INFINITY, f64::min)
        };
        let grid = grid_max(f, -LINK_RANGE, LINK_RANGE, 10_000);
        assert!((v - grid).abs() < 1e-6, "{v} vs {grid}");
    }
}

#[test]
fn enumerate_is_worst_corner() {
    let mut rng = Rng::new(11);
    for _ in 0..10 {
        let p = problem(&mut rng, Shape { outer: 6, links: 1, extra_gaps: 2, coupled: false });
        let r = worst_case_enumerate(&p).unwrap();
        // random interior points never go below the worst vertex
        for _ in 0..50 {
            let x: Assignment = p.outer.iter().map(|&(id, b)| (id, rng.range(b.unwrap().0, b.unwrap().1))).collect();
            let (v, _) = inner_max_min(&x, &p).unwrap().unwrap();
            assert!(v >= r.value - 1e-12);
        }
    }
}

#[test]
fn iterative_agrees_with_enumeration() {
    let mut rng = Rng::new(3);
    let opts = SolverOptions::default();
    for i in 0..60 {
        let shape = Shape { outer: 2 + i % 8, links: i % 3, extra_gaps: 2 + i % 4, coupled: i % 5 == 4 };
        let p = problem(&mut rng, shape);
        let e = worst_case_enumerate(&p).unwrap();
        let it = worst_case_iterative(&p, &opts).unwrap();
        assert!((e.value - it.value).abs() < 1e-9, "instance {i}: {} vs {}", e.value, it.value);
    }
}

#[test]
fn iterative_is_deterministic() {
    let mut rng = Rng::new(5);
    let p = problem(&mut rng, Shape { outer: 9, links: 2, extra_gaps: 3, coupled: false });
    let opts = SolverOptions { seed: 42, ..SolverOptions::default() };
    assert_eq!(worst_case_iterative(&p, &opts).unwrap(), worst_case_iterative(&p, &opts).unwrap());
}

#[test]
fn inner_value_is_concave() {
    let mut rng = Rng::new(13);
    for _ in 0..40 {
        let p = problem(&mut rng, Shape { outer: 4, links: 2, extra_gaps: 3, coupled: false });
        let pick = |rng: &mut Rng| -> Assignment {
            p.outer.iter().map(|&(id, b)| (id, rng.range(b.unwrap().0, b.unwrap().1))).collect()
        };
        let (x, y) = (pick(&mut rng), pick(&mut rng));
        let l = rng.unit();
        let mix: Assignment = x.keys().map(|k| (*k, l * x[k] + (1.0 - l) * y[k])).collect();
        let g = |a: &Assignment| inner_max_min(a, &p).unwrap().unwrap().0;
        assert!(g(&mix) >= l * g(&x) + (1.0 - l) * g(&y) - 1e-9);
    }
}

#[test]
fn widening_adds_half_delta() {
    let mut rng = Rng::new(17);
    for _ in 0..20 {
        let p = problem(&mut rng, Shape { outer: 5, links: 1, extra_gaps: 2, coupled: false });
        let delta = rng.range(0.01, 1.0);
        let a = worst_case_enumerate(&p).unwrap().value;
        let b = worst_case_enumerate(&p.widened(delta)).unwrap().value;
        assert!((b - a - delta / 2.0).abs() < 1e-12);
    }
}

#[test]
fn enlarging_bounds_never_helps() {
    let mut rng = Rng::new(19);
    let mut p = problem(&mut rng, Shape { outer: 6, links: 1, extra_gaps: 3, coupled: false });
    let mut last = worst_case_enumerate(&p).unwrap().value;
    for _ in 0..20 {
        let i = rng.below(p.outer.len());
        let (lo, hi) = p.outer[i].1.unwrap();
        p.outer[i].1 = Some((lo - rng.range(0.0, 0.2), hi + rng.range(0.0, 0.2)));
        let v = worst_case_enumerate(&p).unwrap().value;
        assert!(v <= last + 1e-12);
        last = v;
    }
}

#[test]
fn finite_differences_match_duals() {
    let mut rng = Rng::new(23);
    let opts = SolverOptions::default();
    let mut checked = 0;
    for _ in 0..30 {
        let p = problem(&mut rng, Shape { outer: 5, links: 1, extra_gaps: 3, coupled: false });
        let r = worst_case_enumerate(&p).unwrap();
        for inf in influence_coefficients(&p, &r, &opts).unwrap() {
            if !inf.degenerate {
                assert!(
                    (inf.coefficient - inf.dual.abs()).abs() < 1e-5,
                    "{} {} {}",
                    inf.name,
                    inf.coefficient,
                    inf.dual
                );
                checked += 1;
            }
        }
    }
    assert!(checked > 50);
}

#[test]
fn absent_parameter_has_zero_influence() {
    let mut p = one_param(0.01);
    let id = p.registry.register(ParamKind::Rx, 9, 3, Category::Machining, Some((-1.0, 1.0))).unwrap();
    p.outer.push((id, Some((-1.0, 1.0))));
    let r = worst_case_enumerate(&p).unwrap();
    let inf = influence_coefficients(&p, &r, &SolverOptions::default()).unwrap();
    assert_eq!(inf[1].coefficient, 0.0);
    assert!((inf[0].coefficient - 1.0).abs() < 1e-6);
}

#[test]
fn unbounded_parameter_diverges() {
    let mut p = one_param(0.01);
    p.outer[0].1 = None;
    for r in [worst_case_enumerate(&p).unwrap(), worst_case_iterative(&p, &SolverOptions::default()).unwrap()] {
        assert_eq!(r.status, Status::Divergent);
        assert_eq!(r.value, f64::NEG_INFINITY);
        assert!(r.ray.is_some());
    }
}

#[test]
fn enumeration_guard() {
    let mut rng = Rng::new(29);
    let p = problem(&mut rng, Shape { outer: 40, links: 1, extra_gaps: 2, coupled: false });
    assert!(matches!(worst_case_enumerate(&p), Err(Error::DimensionGuard { .. })));
}

#[test]
fn infeasible_outer_set() {
    let mut p = one_param(0.01);
    let id = p.outer[0].0;
    p.outer_constraints.push(LinearConstraint::ge(LinExpr::param(id), 1.0));
    assert_eq!(worst_case_enumerate(&p).unwrap().status, Status::Infeasible);
}
