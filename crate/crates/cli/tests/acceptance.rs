//! End-to-end acceptance run: one PASS/FAIL line per criterion, non-zero
//! exit when any fails.

use std::path::Path;
use std::process::Command;
use std::time::Instant;

use rand::Rng;

use riesz_core::representation::{
    abel_identity_check, additivity_check, measure_from_function, roundtrip, weakly_compact_image_check,
    RoundtripOptions, StieltjesOperator,
};
use riesz_core::sample;
use riesz_core::semivariation::{semivariation, SemivariationOptions};
use riesz_core::space::polar_gauge;
use riesz_core::stieltjes::{exact_step_integral, integrate_g_dx, integrate_x_dg, per_partes, IntegralOptions, IntegralResult};
use riesz_core::{Field, PiecewiseFunction, Scalar, Seminorm, SeminormKind, SpaceModel, Vector};

type Check<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn seminorm<R: Rng>(rng: &mut R, kind: usize, dim: usize) -> Seminorm {
    let weights: Vec<f64> = (0..dim).map(|_| rng.gen_range(0.1..2.0)).collect();
    match kind % 3 {
        0 => Seminorm::weighted_sup(weights).unwrap(),
        1 => Seminorm::weighted_one(weights).unwrap(),
        _ => {
            let b: Vec<Vec<f64>> = (0..dim).map(|_| (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
            let m = (0..dim)
                .map(|i| (0..dim).map(|j| (0..dim).map(|k| b[i][k] * b[j][k]).sum()).collect())
                .collect();
            Seminorm::quadratic(m).unwrap()
        }
    }
}

fn all_kinds<R: Rng>(rng: &mut R, dim: usize, field: Field) -> SpaceModel {
    let ps = (0..3).map(|k| seminorm(rng, k, dim)).collect();
    SpaceModel::new(dim, field, ps).unwrap()
}

fn field(k: usize) -> Field {
    if k % 2 == 0 {
        Field::Real
    } else {
        Field::Complex
    }
}

fn max_gap(space: &SpaceModel, u: &Vector, v: &Vector) -> Vec<f64> {
    space.eval_all(&(u - v)).unwrap()
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut rng = sample::rng(101);
    let mut worst = 0.0f64;
    for case in 0..200 {
        let dim = rng.gen_range(1..=4);
        let f = field(case);
        let space = all_kinds(&mut rng, dim, f);
        // one of the two is continuous: kinds 1 and 2
        let (kx, kg) = if case % 2 == 0 { (case / 2, 1 + case % 4 / 2) } else { (1 + case % 4 / 2, case / 2) };
        let x = sample::integrator(&mut rng, kx, 0.0, 1.0, dim, f).unwrap();
        let g = sample::integrator(&mut rng, kg, 0.0, 1.0, 1, f).unwrap();
        let r = per_partes(&space, &x, &g, &IntegralOptions::default()).unwrap();
        worst = r.gaps.iter().copied().fold(worst, f64::max);
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(worst < 1e-6 && secs < 60.0, format!("max p(lhs - rhs) = {worst:.3e}, {secs:.1} s"))
}

/// `∫ x g' dt` by exact antiderivatives of the piece products.
fn closed_form_x_dg(x: &PiecewiseFunction, g: &PiecewiseFunction) -> Vector {
    let mut pts: Vec<f64> = x.breakpoints().iter().chain(g.breakpoints()).copied().collect();
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let mut out = vec![Scalar::new(0.0, 0.0); x.dim()];
    for w in pts.windows(2) {
        let mid = 0.5 * (w[0] + w[1]);
        let gp = &g.piece(g.locate(mid))[0];
        let dg: Vec<Scalar> = gp.coefficients().iter().enumerate().skip(1).map(|(k, c)| c * k as f64).collect();
        for (k, xp) in x.piece(x.locate(mid)).iter().enumerate() {
            let mut prod = vec![Scalar::new(0.0, 0.0); xp.coefficients().len() + dg.len()];
            for (i, a) in xp.coefficients().iter().enumerate() {
                for (j, b) in dg.iter().enumerate() {
                    prod[i + j] += a * b;
                }
            }
            let anti = |t: f64| prod.iter().enumerate().rev().fold(Scalar::new(0.0, 0.0), |acc, (i, c)| acc * t + c / (i + 1) as f64) * t;
            out[k] += anti(w[1]) - anti(w[0]);
        }
    }
    Vector::from_scalars(out)
}

/// Oracle-backed cases shared by criteria 2 and 5: the computed result and
/// the oracle value.
struct OracleCase {
    space: SpaceModel,
    result: IntegralResult,
    oracle: Vector,
    step: bool,
}

fn oracle_cases() -> Vec<OracleCase> {
    let mut rng = sample::rng(202);
    let mut cases = Vec::new();
    for case in 0..100 {
        let dim = rng.gen_range(1..=4);
        let f = field(case);
        let space = all_kinds(&mut rng, dim, f);
        let jumps = rng.gen_range(1..=20);
        let x = sample::step(&mut rng, 0.0, 1.0, dim, jumps, f).unwrap();
        let g = sample::integrator(&mut rng, 1 + case % 2, 0.0, 1.0, 1, f).unwrap();
        let result = integrate_g_dx(&space, &g, &x, &IntegralOptions::default()).unwrap();
        let oracle = exact_step_integral(&g, &x).unwrap();
        cases.push(OracleCase { space, result, oracle, step: true });
    }
    for case in 0..100 {
        let dim = rng.gen_range(1..=4);
        let f = field(case);
        let space = all_kinds(&mut rng, dim, f);
        let x = sample::integrator(&mut rng, 1 + case % 2, 0.0, 1.0, dim, f).unwrap();
        let g = sample::integrator(&mut rng, 1 + case / 2 % 2, 0.0, 1.0, 1, f).unwrap();
        let result = integrate_x_dg(&space, &x, &g, &IntegralOptions::default()).unwrap();
        let oracle = closed_form_x_dg(&x, &g);
        cases.push(OracleCase { space, result, oracle, step: false });
    }
    cases
}

fn criterion_2(cases: &[OracleCase]) -> Outcome {
    let worst = |step: bool| {
        cases
            .iter()
            .filter(|c| c.step == step)
            .flat_map(|c| max_gap(&c.space, &c.result.value, &c.oracle))
            .fold(0.0f64, f64::max)
    };
    let (s, p) = (worst(true), worst(false));
    outcome(s <= 1e-8 && p <= 1e-6, format!("step max gap = {s:.3e}, smooth max gap = {p:.3e}"))
}

fn sign_oracle(p: &Seminorm, jumps: &[Vector]) -> f64 {
    let mut best = 0.0f64;
    for mask in 0u32..(1 << jumps.len()) {
        let mut v = Vector::zeros(p.dim());
        for (j, d) in jumps.iter().enumerate() {
            let s = if mask & (1 << j) != 0 { -1.0 } else { 1.0 };
            v.axpy(Scalar::new(s, 0.0), d);
        }
        best = best.max(p.eval(&v).unwrap());
    }
    best
}

fn criterion_3() -> Outcome {
    let mut rng = sample::rng(303);
    let mut worst = 0.0f64;
    let mut all_exact = true;
    let mut count = 0;
    for m in 1..=12 {
        for _ in 0..4 {
            let dim = rng.gen_range(1..=4);
            let space = all_kinds(&mut rng, dim, Field::Real);
            let x = sample::step(&mut rng, 0.0, 1.0, dim, m, Field::Real).unwrap();
            let jumps: Vec<Vector> = x.jump_points().into_iter().map(|(_, j)| j).collect();
            for index in 0..3 {
                let r = semivariation(&space, index, &x, &SemivariationOptions::default()).unwrap();
                all_exact &= r.exact;
                worst = worst.max((r.value - sign_oracle(&space.seminorms()[index], &jumps)).abs());
                count += 1;
            }
        }
    }
    outcome(worst <= 1e-12 && all_exact, format!("{count} cases, max |difference| = {worst:.3e}"))
}

fn criterion_4() -> Outcome {
    let mut rng = sample::rng(404);
    let mut violation = f64::NEG_INFINITY;
    let mut polar = 0.0f64;
    let mut reach = f64::INFINITY;
    for case in 0..50 {
        let dim = rng.gen_range(1..=4);
        let space = all_kinds(&mut rng, dim, Field::Real);
        let x = sample::integrator(&mut rng, case, 0.0, 1.0, dim, Field::Real).unwrap();
        for (index, p) in space.seminorms().iter().enumerate() {
            let sv = semivariation(&space, index, &x, &SemivariationOptions::default()).unwrap().value;
            let set = p.bounding_set(Field::Real).unwrap();
            let duals = space.sample_dual_ball(&set, 100, case as u64).unwrap();
            let mut best = 0.0f64;
            for y in &duals {
                polar = polar.max(polar_gauge(&set, y).unwrap());
                let v = x.compose_dual(y).unwrap().scalar_variation().unwrap();
                violation = violation.max(v - sv);
                best = best.max(v);
            }
            if p.kind() == SeminormKind::WeightedSup && x.is_step() && sv > 0.0 {
                reach = reach.min(best / sv);
            }
        }
    }
    outcome(
        violation <= 1e-9 && polar <= 1.0 + 1e-12 && reach >= 0.95,
        format!("max var - semivariation = {violation:.3e}, max polar = {polar:.6}, min reach = {reach:.4}"),
    )
}

fn criterion_5(cases: &[OracleCase]) -> Outcome {
    let mut unsound = 0;
    let mut nonmonotone = 0;
    let mut worst_ratio = 0.0f64;
    for c in cases {
        let errors = max_gap(&c.space, &c.result.value, &c.oracle);
        for (e, est) in errors.iter().zip(&c.result.estimates) {
            if e > est {
                unsound += 1;
            }
            if *est > 0.0 {
                worst_ratio = worst_ratio.max(e / est);
            }
        }
        for w in c.result.trace.windows(2) {
            if w[1].estimates.iter().zip(&w[0].estimates).any(|(next, prev)| next > prev) {
                nonmonotone += 1;
            }
        }
    }
    outcome(
        unsound == 0 && nonmonotone == 0,
        format!(
            "{} cases, {unsound} estimates below the error, {nonmonotone} increasing steps, max error/estimate = {worst_ratio:.3}",
            cases.len()
        ),
    )
}

fn criterion_6() -> Outcome {
    let start = Instant::now();
    let mut rng = sample::rng(606);
    let (mut cumulative, mut pairing, mut additivity) = (0.0f64, 0.0f64, 0.0f64);
    for case in 0..50 {
        let dim = rng.gen_range(1..=3);
        let f = field(case / 4);
        let space = all_kinds(&mut rng, dim, f);
        let x = sample::integrator(&mut rng, case, 0.0, 1.0, dim, f).unwrap();
        let opts = RoundtripOptions { duals: 20, functions: 20, tol: 1e-6, seed: case as u64, ..RoundtripOptions::default() };
        let r = roundtrip(&space, &x, &opts).unwrap();
        cumulative = cumulative.max(r.cumulative_gap);
        pairing = pairing.max(r.pairing_gap);
        let m = measure_from_function(&x).unwrap();
        let cuts = sample::interior_points(&mut rng, 0.0, 1.0, 5);
        additivity = additivity.max(additivity_check(&m, &cuts).unwrap());
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        cumulative < 1e-10 && pairing < 1e-6 && additivity < 1e-12,
        format!("cumulative gap = {cumulative:.3e}, pairing gap = {pairing:.3e}, additivity gap = {additivity:.3e}, {secs:.1} s"),
    )
}

fn criterion_7() -> Outcome {
    let mut rng = sample::rng(707);
    let mut failures = 0;
    let mut reconstruction = 0.0f64;
    for case in 0..30 {
        let dim = rng.gen_range(1..=3);
        let space = all_kinds(&mut rng, dim, Field::Real);
        let jumps = rng.gen_range(1..=12);
        let x = sample::step(&mut rng, 0.0, 1.0, dim, jumps, Field::Real).unwrap();
        let op = StieltjesOperator::new(space, x).unwrap();
        let r = weakly_compact_image_check(&op, 30, case, 1e-9).unwrap();
        if !r.verdict {
            failures += 1;
        }
        reconstruction = reconstruction.max(r.max_reconstruction_error);
    }
    outcome(
        failures == 0 && reconstruction < 1e-9,
        format!("{failures} failing integrators, max reconstruction error = {reconstruction:.3e}"),
    )
}

fn criterion_8() -> Outcome {
    let mut rng = sample::rng(808);
    let (mut gap, mut sum) = (0.0f64, 0.0f64);
    for case in 0..1000 {
        let n = rng.gen_range(1..=10);
        let dim = rng.gen_range(1..=4);
        let values: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..=1.0)).collect();
        let incs: Vec<Vector> = (0..n).map(|_| sample::vector(&mut rng, dim, field(case))).collect();
        let r = abel_identity_check(&values, &incs).unwrap();
        gap = gap.max(r.gap);
        sum = sum.max(r.coefficient_sum);
    }
    outcome(gap <= 1e-12 && sum <= 1.0, format!("max gap = {gap:.3e}, max coefficient sum = {sum:.6}"))
}

fn criterion_9() -> Outcome {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("problems");
    let mut files: Vec<_> = std::fs::read_dir(&dir).unwrap().map(|e| e.unwrap().path()).collect();
    files.sort();
    let run = |p: &Path| {
        let out = Command::new(env!("CARGO_BIN_EXE_riesz")).arg("--input").arg(p).output().unwrap();
        (out.status.success(), out.stdout)
    };
    let mut differing = Vec::new();
    for f in &files {
        let (ok1, a) = run(f);
        let (ok2, b) = run(f);
        if !(ok1 && ok2 && a == b && !a.is_empty()) {
            differing.push(f.file_name().unwrap().to_string_lossy().into_owned());
        }
    }
    outcome(differing.is_empty() && !files.is_empty(), format!("{} files, differing or failing: {differing:?}", files.len()))
}

fn main() {
    let cases = oracle_cases();
    let criteria: Vec<Check> = vec![
        ("integration by parts", Box::new(criterion_1)),
        ("integration oracles", Box::new(|| criterion_2(&cases))),
        ("semivariation oracle", Box::new(criterion_3)),
        ("duality sandwich", Box::new(criterion_4)),
        ("error bound soundness", Box::new(|| criterion_5(&cases))),
        ("representation roundtrip", Box::new(criterion_6)),
        ("hull containment", Box::new(criterion_7)),
        ("summation by parts", Box::new(criterion_8)),
        ("cli determinism", Box::new(criterion_9)),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let o = check();
        println!("{} {}. {name}: {}", if o.pass { "PASS" } else { "FAIL" }, k + 1, o.detail);
        if !o.pass {
            failed += 1;
        }
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
