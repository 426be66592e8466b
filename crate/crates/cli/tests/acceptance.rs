//! One PASS/FAIL line per acceptance criterion. Run with
//! `cargo test -p mmptol --test acceptance`.

#[path = "../../core/tests/common/random.rs"]
mod random;

use mmptol::plan::{load, Document};
use mmptol_core::param::{Category, ParamId};
use mmptol_core::torsor::GLOBAL_FRAME;
use mmptol_core::{
    build_mmp, classify_parameters, detect_redundant, influence_coefficients, inner_max_min, new_surface_torsor,
    propose_specs, size_tolerances, verify_specs, worst_case_enumerate, worst_case_iterative, Assignment, Completeness,
    Context, InfluenceTable, KindBounds, LinExpr, Mmp, OptimizationProblem, Registry, SolverKind, SolverOptions,
    SpecProposal, SpecType, Status, SurfaceClass, Torsor,
};
use random::{problem, Rng, Shape, LINK_RANGE};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

type Check = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

struct Fixture {
    doc: Document,
    mmp: Mmp,
    options: SolverOptions,
}

impl Fixture {
    fn load(name: &str) -> Fixture {
        let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name);
        let doc = load(&std::fs::read_to_string(path).unwrap()).unwrap();
        let mmp = build_mmp(&doc.plan).unwrap();
        Fixture { doc, mmp, options: SolverOptions::default() }
    }

    fn functional(&self) -> OptimizationProblem {
        OptimizationProblem::functional(&self.mmp, &self.doc.plan.part, &self.doc.functional).unwrap()
    }

    fn ctx(&self) -> Context<'_> {
        Context {
            plan: &self.doc.plan,
            mmp: &self.mmp,
            functional: &self.doc.functional,
            solver: SolverKind::Enumerate,
            options: &self.options,
        }
    }

    fn specs(&self) -> Vec<SpecProposal> {
        self.doc.specs.clone().unwrap()
    }

    fn proposals(&self) -> Vec<SpecProposal> {
        let p = self.functional();
        let r = worst_case_enumerate(&p).unwrap();
        let table = InfluenceTable::new(&p, &influence_coefficients(&p, &r, &self.options).unwrap());
        propose_specs(&classify_parameters(&table, &self.doc.plan)).0
    }
}

fn random_torsor(rng: &mut Rng) -> Torsor {
    let p = [rng.range(-100.0, 100.0), rng.range(-100.0, 100.0), rng.range(-100.0, 100.0)];
    let mut t = Torsor::zero(p, GLOBAL_FRAME);
    for i in 0..6 {
        let mut e = LinExpr::constant(rng.range(-1.0, 1.0));
        for j in 0..3 {
            e.add_term(ParamId::new(j), rng.range(-1.0, 1.0));
        }
        *t.component_mut(i) = e;
    }
    t
}

fn torsor_algebra() -> Check {
    let start = Instant::now();
    let mut rng = Rng::new(1);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let t = random_torsor(&mut rng);
        let b = [rng.range(-100.0, 100.0), rng.range(-100.0, 100.0), rng.range(-100.0, 100.0)];
        let back = t.transport(b).transport(t.point);
        ensure!(back.point == t.point && back.rotation == t.rotation, "round trip moved the rotation part");
        for i in 3..6 {
            let d = back.component(i) - t.component(i);
            worst = d.terms().map(|(_, c)| c.abs()).fold(worst.max(d.constant_part().abs()), f64::max);
        }
        ensure!(t.add(&Torsor::zero(t.point, GLOBAL_FRAME)).unwrap() == t, "t + 0 != t");
        ensure!(t.add(&t.negate()).unwrap().is_zero(), "t - t != 0");
        ensure!(t.negate().negate() == t, "--t != t");
    }
    ensure!(worst <= 1e-12, "transport round trip off by {worst:e}");
    let mut reg = Registry::new();
    let plane =
        new_surface_torsor(SurfaceClass::Plane, 6, 3, Category::Machining, &KindBounds::none(), &mut reg).unwrap();
    let cyl =
        new_surface_torsor(SurfaceClass::Cylinder, 4, 1, Category::Machining, &KindBounds::none(), &mut reg).unwrap();
    for _ in 0..1000 {
        let a: Assignment = (0..reg.len()).map(|i| (ParamId::new(i as u32), rng.range(-1.0, 1.0))).collect();
        let p = plane.torsor.evaluate(&a, false).unwrap().components();
        let c = cyl.torsor.evaluate(&a, false).unwrap().components();
        ensure!([p[2], p[3], p[4], c[2], c[5]] == [0.0; 5], "template null component not exactly zero");
    }
    let elapsed = start.elapsed();
    ensure!(elapsed < Duration::from_secs(1), "took {elapsed:?}");
    Ok(format!("1000 torsors, round-trip residue {worst:.1e}, {elapsed:.2?}"))
}

fn oracle_equivalence() -> Check {
    let start = Instant::now();
    let mut rng = Rng::new(2);
    let opts = SolverOptions::default();
    let mut worst: f64 = 0.0;
    let n = 120;
    for i in 0..n {
        let shape = Shape { outer: 2 + i % 11, links: i % 3, extra_gaps: 2 + i % 4, coupled: i % 4 == 3 };
        let p = problem(&mut rng, shape);
        let e = worst_case_enumerate(&p).map_err(|e| e.to_string())?;
        let it = worst_case_iterative(&p, &opts).map_err(|e| e.to_string())?;
        ensure!(e.status == it.status, "instance {i}: {:?} vs {:?}", e.status, it.status);
        worst = worst.max((e.value - it.value).abs());
    }
    let elapsed = start.elapsed();
    ensure!(worst <= 1e-9, "max difference {worst:e}");
    ensure!(elapsed < Duration::from_secs(60), "took {elapsed:?}");
    Ok(format!("{n} problems (2..12 outer, 0..2 links), max difference {worst:.1e}, {elapsed:.2?}"))
}

fn grid_max(f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
    let points = 10_000;
    let h = (hi - lo) / (points - 1) as f64;
    let (mut at, mut best) = (lo, f(lo));
    for i in 1..points {
        let y = lo + h * i as f64;
        if f(y) > best {
            (at, best) = (y, f(y));
        }
    }
    // golden section inside the best cell
    let (mut a, mut b) = ((at - h).max(lo), (at + h).min(hi));
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

fn inner_lp() -> Check {
    let mut rng = Rng::new(3);
    let mut worst: f64 = 0.0;
    let n = 150;
    for _ in 0..n {
        let p = problem(&mut rng, Shape { outer: 3, links: 1, extra_gaps: 2, coupled: false });
        let x: Assignment = p
            .outer
            .iter()
            .map(|&(id, b)| {
                let (lo, hi) = b.unwrap();
                (id, rng.range(lo, hi))
            })
            .collect();
        let (v, _) = inner_max_min(&x, &p).map_err(|e| e.to_string())?.ok_or("inner infeasible")?;
        let y = p.inner[0];
        let f = |t: f64| {
            let mut a = x.clone();
            a.insert(y, t);
            p.gaps.iter().map(|g| g.evaluate_or_zero(&a)).fold(f64::INFINITY, f64::min)
        };
        worst = worst.max((v - grid_max(f, -LINK_RANGE, LINK_RANGE)).abs());
    }
    ensure!(worst <= 1e-6, "max difference {worst:e}");
    Ok(format!("{n} one-link instances, max difference to grid {worst:.1e}"))
}

fn linearity() -> Check {
    let f = Fixture::load("block.json");
    let p = f.functional();
    let base = worst_case_enumerate(&p).unwrap().value;
    let mut rng = Rng::new(4);
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let delta = rng.range(0.001, 1.0);
        let v = worst_case_enumerate(&p.widened(delta)).unwrap().value;
        worst = worst.max((v - base - delta / 2.0).abs());
    }
    ensure!(worst <= 1e-12, "widening residue {worst:e}");
    let mut p = p;
    let mut last = base;
    for i in 0..50 {
        let k = rng.below(p.outer.len());
        if let Some((lo, hi)) = p.outer[k].1 {
            let grow = rng.range(0.0, 0.5) * (hi - lo).max(1e-3);
            p.outer[k].1 = Some((lo - grow * rng.unit(), hi + grow * rng.unit()));
        }
        let v = worst_case_enumerate(&p).unwrap().value;
        ensure!(v <= last + 1e-15, "enlargement {i} raised the worst case {last} -> {v}");
        last = v;
    }
    Ok(format!("widening residue {worst:.1e}; 50 enlargements monotone ({base:.6} -> {last:.6})"))
}

fn influence() -> Check {
    let mut rng = Rng::new(5);
    let opts = SolverOptions::default();
    let (mut checked, mut worst) = (0, 0.0f64);
    for _ in 0..40 {
        let p = problem(&mut rng, Shape { outer: 5, links: 1, extra_gaps: 3, coupled: false });
        let r = worst_case_enumerate(&p).unwrap();
        for inf in influence_coefficients(&p, &r, &opts).unwrap().iter().filter(|i| !i.degenerate) {
            worst = worst.max((inf.coefficient - inf.dual.abs()).abs());
            checked += 1;
        }
    }
    ensure!(worst <= 1e-5, "finite difference vs dual {worst:e}");
    let f = Fixture::load("block.json");
    let p = f.functional();
    let r = worst_case_enumerate(&p).unwrap();
    let list = influence_coefficients(&p, &r, &opts).unwrap();
    let blank: Vec<_> = list.iter().filter(|i| p.registry.get(i.param).setup == 1).collect();
    ensure!(!blank.is_empty() && blank.iter().all(|i| i.coefficient == 0.0), "set-up 1 not blank");
    for inf in list.iter().filter(|i| !i.degenerate) {
        worst = worst.max((inf.coefficient - inf.dual.abs()).abs());
        checked += 1;
    }
    ensure!(worst <= 1e-5, "fixture finite difference vs dual {worst:e}");
    Ok(format!(
        "{checked} non-degenerate coefficients, max |fd - dual| {worst:.1e}; {} absent parameters exactly 0",
        blank.len()
    ))
}

fn table_structure() -> Check {
    let f = Fixture::load("block.json");
    let p = f.functional();
    let r = worst_case_enumerate(&p).unwrap();
    let table = InfluenceTable::new(&p, &influence_coefficients(&p, &r, &f.options).unwrap());
    let get = |n: &str| table.rows.iter().find(|r| r.name == n).map(|r| r.coefficient).unwrap_or(f64::NAN);
    let tz6 = get("tz_6");
    ensure!((tz6 - 1.0).abs() < 1e-6, "tz_6 = {tz6}");
    let ratio = get("rx_3S3") / get("ry_3S3");
    ensure!((ratio / 3f64.sqrt() - 1.0).abs() < 0.01, "rx_3S3 / ry_3S3 = {ratio}");
    Ok(format!("tz_6 = {tz6:.6}; rx_3S3 : ry_3S3 = {:.2} : {:.2} (ratio {ratio:.4})", get("rx_3S3"), get("ry_3S3")))
}

fn synthesis_rules() -> Check {
    let f = Fixture::load("block_no_specs.json");
    let proposals = f.proposals();
    let s3: Vec<_> = proposals.iter().filter(|p| p.setup == 3).collect();
    ensure!(s3.len() == 1, "set-up 3 has {} specifications", s3.len());
    ensure!(s3[0].datums == [3, 4, 5], "datum system {:?}", s3[0].datums);
    ensure!(s3[0].toleranced == 6 && s3[0].spec_type == SpecType::Location, "{:?}", s3[0]);
    Ok(String::from("set-up 3: location of 6 wrt |3|4|5|"))
}

fn constrained() -> Check {
    let f = Fixture::load("block_missing_spec.json");
    let v = verify_specs(&f.ctx(), &f.specs()).unwrap();
    ensure!(
        v.result.status == Status::Divergent && v.completeness == Completeness::Incomplete,
        "missing spec gave {:?}",
        v.result.status
    );
    let f = Fixture::load("block_extra_spec.json");
    let flags = detect_redundant(&f.ctx(), &f.specs()).unwrap();
    ensure!(flags[0].toleranced == 5 && flags[0].unnecessary, "spec on 5 not flagged: {:?}", flags[0]);
    ensure!(flags[1..].iter().all(|fl| !fl.unnecessary), "required spec flagged");
    let f = Fixture::load("block.json");
    let s = size_tolerances(&f.ctx(), &f.specs()).unwrap();
    ensure!((-1e-6..=1e-3).contains(&s.worst), "sized worst case {}", s.worst);
    let f = Fixture::load("slab.json");
    let weights: Vec<SpecProposal> = f.specs().into_iter().map(|p| SpecProposal { value: Some(1.0), ..p }).collect();
    let slab = size_tolerances(&f.ctx(), &weights).unwrap();
    let t = f.doc.functional.width;
    let sized = slab.proposals[0].value.unwrap();
    ensure!((sized - t).abs() <= 1e-6, "closed form sized {sized} for t = {t}");
    Ok(format!(
        "missing spec DIVERGENT; spec on 5 unnecessary; fixture alpha {:.6} worst {:.1e}; closed form {sized:.9} vs t {t}",
        s.alpha, s.worst
    ))
}

fn determinism() -> Check {
    let plan = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join("block.json");
    let run = |cmd: &str| {
        Command::new(env!("CARGO_BIN_EXE_mmptol"))
            .args([cmd, plan.to_str().unwrap(), "--format", "json", "--solver", "iterative", "--seed", "1234"])
            .output()
            .unwrap()
    };
    for cmd in ["influence", "verify"] {
        let (a, b) = (run(cmd), run(cmd));
        ensure!(a.status.code() == Some(0), "{cmd} exited {:?}", a.status.code());
        ensure!(a.stdout == b.stdout, "{cmd}: reports differ");
    }
    Ok(String::from("influence and verify JSON byte-identical across two runs (seed 1234)"))
}

fn main() {
    let criteria: [(u32, &str, fn() -> Check); 9] = [
        (1, "torsor algebra", torsor_algebra),
        (2, "iterative vs enumeration", oracle_equivalence),
        (3, "inner LP vs grid", inner_lp),
        (4, "linearity and monotonicity", linearity),
        (5, "influence coefficients", influence),
        (6, "influence table structure", table_structure),
        (7, "synthesis rules", synthesis_rules),
        (8, "constrained problem", constrained),
        (9, "determinism", determinism),
    ];
    let mut failed = 0;
    for (n, name, check) in criteria {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        match outcome {
            Ok(detail) => println!("criterion {n} ({name}): PASS  {detail}"),
            Err(why) => {
                failed += 1;
                println!("criterion {n} ({name}): FAIL  {why}");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
