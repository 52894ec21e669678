use proptest::prelude::*;
use rand::Rng;

use riesz_core::function::real_poly;
use riesz_core::hull::hull_membership;
use riesz_core::partition::{TagRule, TaggedPartition};
use riesz_core::representation::{abel_identity_check, decompose, measure_from_function, StieltjesOperator};
use riesz_core::sample;
use riesz_core::semivariation::{
    dual_variation_bound, e_set, semivariation, semivariation_on_partition, ESetMode, SemivariationOptions,
};
use riesz_core::space::polar_gauge;
use riesz_core::stieltjes::{integrate_g_dx, integrate_x_dg, rearranged_sum, sum_x_dg, IntegralOptions};
use riesz_core::{DualVector, Field, PiecewiseFunction, Scalar, Seminorm, SpaceModel, Vector};

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

fn field(flag: bool) -> Field {
    if flag {
        Field::Complex
    } else {
        Field::Real
    }
}

fn all_kinds(dim: usize, field: Field, seed: u64) -> SpaceModel {
    let mut rng = sample::rng(seed);
    let ps = (0..3).map(|k| seminorm(&mut rng, k, dim)).collect();
    SpaceModel::new(dim, field, ps).unwrap()
}

fn cases(n: u32) -> ProptestConfig {
    ProptestConfig { cases: n, ..ProptestConfig::default() }
}

proptest! {
    #![proptest_config(cases(64))]

    #[test]
    fn seminorms_are_seminorms(seed in any::<u64>(), kind in 0usize..3, dim in 1usize..6, complex in any::<bool>()) {
        let mut rng = sample::rng(seed);
        let f = field(complex);
        let p = seminorm(&mut rng, kind, dim);
        let (v, w) = (sample::vector(&mut rng, dim, f), sample::vector(&mut rng, dim, f));
        let lambda = sample::scalar(&mut rng, f) * 3.0;
        prop_assert_eq!(p.eval(&Vector::zeros(dim)).unwrap(), 0.0);
        let pv = p.eval(&v).unwrap();
        let scaled = p.eval(&v.scaled(lambda)).unwrap();
        prop_assert!((scaled - lambda.norm() * pv).abs() <= 1e-12 * (1.0 + scaled.abs()));
        let sum = p.eval(&(&v + &w)).unwrap();
        prop_assert!(sum <= (pv + p.eval(&w).unwrap()) * (1.0 + 1e-12) + 1e-15);
    }

    #[test]
    fn polar_gauge_is_a_monotone_seminorm(seed in any::<u64>(), dim in 1usize..5, n in 1usize..6, complex in any::<bool>()) {
        let mut rng = sample::rng(seed);
        let f = field(complex);
        let small: Vec<Vector> = (0..n).map(|_| sample::vector(&mut rng, dim, f)).collect();
        let mut big = small.clone();
        big.extend((0..3).map(|_| sample::vector(&mut rng, dim, f)));
        let (y, z) = (sample::dual(&mut rng, dim, f), sample::dual(&mut rng, dim, f));
        let lambda = sample::scalar(&mut rng, f) * 2.0;
        let g = |s: &[Vector], d: &DualVector| polar_gauge(s, d).unwrap();
        let gy = g(&small, &y);
        prop_assert!((g(&small, &DualVector(y.0.scaled(lambda))) - lambda.norm() * gy).abs() <= 1e-12 * (1.0 + gy));
        prop_assert!(g(&small, &DualVector(&y.0 + &z.0)) <= (gy + g(&small, &z)) * (1.0 + 1e-12));
        prop_assert!(gy <= g(&big, &y));
    }

    #[test]
    fn pairing_is_linear(seed in any::<u64>(), dim in 1usize..6, complex in any::<bool>()) {
        let mut rng = sample::rng(seed);
        let f = field(complex);
        let y = sample::dual(&mut rng, dim, f);
        let (u, v) = (sample::vector(&mut rng, dim, f), sample::vector(&mut rng, dim, f));
        let alpha = sample::scalar(&mut rng, f);
        let mut w = u.scaled(alpha);
        w += &v;
        let lhs = y.pair(&w).unwrap();
        let rhs = alpha * y.pair(&u).unwrap() + y.pair(&v).unwrap();
        prop_assert!((lhs - rhs).norm() <= 1e-14);
    }

    #[test]
    fn partition_sums_stay_below_variation(seed in any::<u64>(), kind in 0usize..4, n in 1usize..40, complex in any::<bool>()) {
        let mut rng = sample::rng(seed);
        let x = sample::integrator(&mut rng, kind, 0.0, 1.0, 1, field(complex)).unwrap();
        let var = x.scalar_variation().unwrap();
        let p = TaggedPartition::uniform(0.0, 1.0, n, TagRule::Left).unwrap();
        let sum = |pts: &[f64]| -> f64 {
            pts.windows(2).map(|w| (x.evaluate_scalar(w[1]).unwrap() - x.evaluate_scalar(w[0]).unwrap()).norm()).sum()
        };
        prop_assert!(sum(p.points()) <= var + 1e-9);
        // breakpoints, critical points and points closing in on every
        // breakpoint from both sides; complex arcs also need chords refined
        let close_in = |eps: f64| {
            let bps = x.breakpoints();
            let mut pts: Vec<f64> = bps.iter().flat_map(|&b| [b - eps, b, b + eps]).filter(|t| (0.0..=1.0).contains(t)).collect();
            pts = riesz_core::function::merge_points(&pts, &x.critical_points());
            let mut fine = TaggedPartition::with_rule(pts, TagRule::Left).unwrap();
            for _ in 0..if complex { 10 } else { 0 } {
                fine = fine.refine();
            }
            sum(fine.points())
        };
        let sums: Vec<f64> = [1e-3, 1e-6, 1e-12].into_iter().map(close_in).collect();
        prop_assert!(sums.iter().all(|s| *s <= var + 1e-9));
        let slack = 1e-9 * (1.0 + var) + if complex { 1e-6 * var } else { 0.0 };
        prop_assert!((sums[2] - var).abs() <= slack);
    }

    #[test]
    fn jump_points_match_limits(seed in any::<u64>(), kind in 0usize..4) {
        let mut rng = sample::rng(seed);
        let x = sample::integrator(&mut rng, kind, 0.0, 1.0, 2, Field::Real).unwrap();
        let agree = x.breakpoints().iter().all(|&t| {
            let v = x.evaluate(t).unwrap();
            let (l, r) = x.one_sided_limits(t).unwrap();
            [l, r].into_iter().flatten().all(|u| u.distance_max(&v) <= 1e-12 * (1.0 + v.max_abs()))
        });
        prop_assert_eq!(x.jump_points().is_empty() && x.is_right_continuous(), agree);
    }

    #[test]
    fn refine_keeps_partitions_valid(n in 1usize..20, rule in 0usize..4, seed in any::<u64>()) {
        let p = match rule {
            0 => TaggedPartition::uniform(-1.0, 2.0, n, TagRule::Left).unwrap(),
            1 => TaggedPartition::uniform(-1.0, 2.0, n, TagRule::Right).unwrap(),
            2 => TaggedPartition::uniform(-1.0, 2.0, n, TagRule::Midpoint).unwrap(),
            _ => {
                let mut rng = sample::rng(seed);
                let pts = TaggedPartition::uniform(-1.0, 2.0, n, TagRule::Left).unwrap().points().to_vec();
                let tags = pts.windows(2).map(|w| rng.gen_range(w[0]..=w[1])).collect();
                TaggedPartition::new(pts, tags).unwrap()
            }
        };
        let r = p.refine();
        prop_assert!(TaggedPartition::new(r.points().to_vec(), r.tags().to_vec()).is_ok());
        prop_assert_eq!(r.cell_count(), 2 * p.cell_count());
        prop_assert_eq!(r.domain(), p.domain());
        prop_assert!(p.points().iter().all(|t| r.points().contains(t)));
    }
}

fn sign_oracle(p: &Seminorm, jumps: &[Vector]) -> f64 {
    let dim = p.dim();
    let m = jumps.len();
    let mut best = 0.0f64;
    for mask in 0u32..(1 << m) {
        let mut v = Vector::zeros(dim);
        for (j, d) in jumps.iter().enumerate() {
            let s = if mask & (1 << j) != 0 { -1.0 } else { 1.0 };
            v.axpy(Scalar::new(s, 0.0), d);
        }
        best = best.max(p.eval(&v).unwrap());
    }
    best
}

proptest! {
    #![proptest_config(cases(32))]

    #[test]
    fn refinement_never_decreases_partition_values(seed in any::<u64>(), kind in 0usize..4, n in 1usize..9, index in 0usize..3) {
        let space = all_kinds(2, Field::Real, seed);
        let mut rng = sample::rng(seed ^ 1);
        let x = sample::integrator(&mut rng, kind, 0.0, 1.0, 2, Field::Real).unwrap();
        let opts = SemivariationOptions::default();
        let p = TaggedPartition::uniform(0.0, 1.0, n, TagRule::Left).unwrap();
        let coarse = semivariation_on_partition(&space, index, &x, &p, &opts).unwrap().value;
        let fine = semivariation_on_partition(&space, index, &x, &p.refine(), &opts).unwrap().value;
        prop_assert!(fine >= coarse * (1.0 - 1e-12));
    }

    #[test]
    fn step_semivariation_matches_signs(seed in any::<u64>(), m in 1usize..9, index in 0usize..3, dim in 1usize..4) {
        let space = all_kinds(dim, Field::Real, seed);
        let mut rng = sample::rng(seed ^ 2);
        let x = sample::step(&mut rng, 0.0, 1.0, dim, m, Field::Real).unwrap();
        let jumps: Vec<Vector> = x.jump_points().into_iter().map(|(_, j)| j).collect();
        let oracle = sign_oracle(space.seminorm(index).unwrap(), &jumps);
        let r = semivariation(&space, index, &x, &SemivariationOptions::default()).unwrap();
        prop_assert!(r.exact);
        prop_assert!((r.value - oracle).abs() <= 1e-12 * (1.0 + oracle));
    }

    #[test]
    fn duality_sandwich(seed in any::<u64>(), kind in 0usize..4, index in 0usize..3) {
        let space = all_kinds(2, Field::Real, seed);
        let mut rng = sample::rng(seed ^ 3);
        let x = sample::integrator(&mut rng, kind, 0.0, 1.0, 2, Field::Real).unwrap();
        let r = semivariation(&space, index, &x, &SemivariationOptions::default()).unwrap();
        let set = space.seminorm(index).unwrap().bounding_set(Field::Real).unwrap();
        let duals = space.sample_dual_ball(&set, 20, seed).unwrap();
        for y in &duals {
            prop_assert!(polar_gauge(&set, y).unwrap() <= 1.0 + 1e-9);
            prop_assert!(x.compose_dual(y).unwrap().scalar_variation().unwrap() <= r.value + 1e-9);
        }
        prop_assert!(dual_variation_bound(&x, &set, &duals).unwrap() <= r.value + 1e-9);
    }

    #[test]
    fn e_set_stays_below_semivariation(seed in any::<u64>(), m in 1usize..7, index in 0usize..3) {
        let space = all_kinds(2, Field::Real, seed);
        let mut rng = sample::rng(seed ^ 4);
        let x = sample::step(&mut rng, 0.0, 1.0, 2, m, Field::Real).unwrap();
        let sv = semivariation(&space, index, &x, &SemivariationOptions::default()).unwrap().value;
        let p = space.seminorm(index).unwrap();
        for v in e_set(&x, ESetMode::Exact).unwrap() {
            prop_assert!(p.eval(&v).unwrap() <= sv * (1.0 + 1e-12));
        }
    }

    #[test]
    fn rearranged_sum_identity(seed in any::<u64>(), kx in 0usize..4, kg in 0usize..4, n in 1usize..30, complex in any::<bool>()) {
        let mut rng = sample::rng(seed);
        let f = field(complex);
        let x = sample::integrator(&mut rng, kx, 0.0, 1.0, 2, f).unwrap();
        let g = sample::integrator(&mut rng, kg, 0.0, 1.0, 1, f).unwrap();
        let pts = TaggedPartition::uniform(0.0, 1.0, n, TagRule::Left).unwrap().points().to_vec();
        let tags = pts.windows(2).map(|w| rng.gen_range(w[0]..=w[1])).collect();
        let p = TaggedPartition::new(pts, tags).unwrap();
        let s = sum_x_dg(&x, &g, &p).unwrap();
        let r = rearranged_sum(&x, &g, &p).unwrap();
        prop_assert!(s.distance_max(&r) <= 1e-12 * (1.0 + n as f64));
    }

    #[test]
    fn step_integrals_match_jump_sums(seed in any::<u64>(), m in 1usize..21, complex in any::<bool>()) {
        let f = field(complex);
        let space = all_kinds(3, f, seed);
        let mut rng = sample::rng(seed ^ 5);
        let x = sample::step(&mut rng, 0.0, 1.0, 3, m, f).unwrap();
        let g = sample::continuous(&mut rng, 0.0, 1.0, 1, 3, f).unwrap();
        let mut oracle = Vector::zeros(3);
        for (t, j) in x.jump_points() {
            oracle.axpy(g.evaluate_scalar(t).unwrap(), &j);
        }
        let r = integrate_g_dx(&space, &g, &x, &IntegralOptions::default()).unwrap();
        let d = &r.value - &oracle;
        for (p, e) in space.seminorms().iter().zip(&r.estimates) {
            let err = p.eval(&d).unwrap();
            prop_assert!(err <= 1e-8);
            prop_assert!(err <= *e);
        }
    }

    #[test]
    fn integrals_are_linear(seed in any::<u64>(), kx in 0usize..4, complex in any::<bool>()) {
        let f = field(complex);
        let space = all_kinds(2, f, seed);
        let mut rng = sample::rng(seed ^ 6);
        let x = sample::integrator(&mut rng, kx, 0.0, 1.0, 2, f).unwrap();
        let g = sample::continuous(&mut rng, 0.0, 1.0, 1, 2, f).unwrap();
        let h = sample::continuous(&mut rng, 0.0, 1.0, 1, 2, f).unwrap();
        let alpha = sample::scalar(&mut rng, f);
        let combo = g.scale(alpha).add(&h).unwrap();
        let opts = IntegralOptions { tol: 1e-11, ..Default::default() };
        let i = |g: &PiecewiseFunction| integrate_g_dx(&space, g, &x, &opts).unwrap().value;
        let mut expect = i(&g).scaled(alpha);
        expect += &i(&h);
        prop_assert!(i(&combo).distance_max(&expect) <= 1e-10);
        let j = |g: &PiecewiseFunction| integrate_x_dg(&space, &x, g, &opts).unwrap().value;
        let mut expect = j(&g).scaled(alpha);
        expect += &j(&h);
        prop_assert!(j(&combo).distance_max(&expect) <= 1e-10);
    }

    #[test]
    fn tag_rules_agree(seed in any::<u64>(), kx in 0usize..4) {
        let space = all_kinds(2, Field::Real, seed);
        let mut rng = sample::rng(seed ^ 7);
        let x = sample::integrator(&mut rng, kx, 0.0, 1.0, 2, Field::Real).unwrap();
        let g = sample::continuous(&mut rng, 0.0, 1.0, 1, 3, Field::Real).unwrap();
        let tol = 1e-8;
        let runs: Vec<_> = [TagRule::Left, TagRule::Right, TagRule::Midpoint]
            .into_iter()
            .map(|rule| integrate_g_dx(&space, &g, &x, &IntegralOptions { tol, tags: Some(rule), ..Default::default() }).unwrap())
            .collect();
        for a in &runs {
            for b in &runs {
                if a.converged && b.converged {
                    let d = &a.value - &b.value;
                    for p in space.seminorms() {
                        prop_assert!(p.eval(&d).unwrap() <= 2.0 * tol);
                    }
                }
            }
        }
    }

    #[test]
    fn decomposition_is_sound(seed in any::<u64>(), complex in any::<bool>(), pieces in 1usize..6) {
        let mut rng = sample::rng(seed);
        let g = sample::unit_ball_function(&mut rng, 0.0, 1.0, pieces, field(complex)).unwrap();
        let parts = decompose(&g).unwrap();
        for part in &parts {
            for (i, piece) in part.pieces().iter().enumerate() {
                let (lo, hi) = (part.breakpoints()[i], part.breakpoints()[i + 1]);
                let (min, max) = piece[0].re().range(lo, hi);
                prop_assert!(min >= 0.0 && max <= 1.0 + 1e-12);
                prop_assert!(piece[0].im().is_zero());
            }
            prop_assert!(part.values().iter().all(|v| v[0].re >= 0.0 && v[0].re <= 1.0 + 1e-12));
        }
        for k in 0..=1000 {
            let t = k as f64 / 1000.0;
            let v = |i: usize| parts[i].evaluate_scalar(t).unwrap();
            let rebuilt = v(0) - v(2) + Scalar::new(0.0, 1.0) * (v(1) - v(3));
            let z = g.evaluate_scalar(t).unwrap();
            prop_assert!((rebuilt.re - z.re).abs().max((rebuilt.im - z.im).abs()) < 1e-12);
        }
    }

    #[test]
    fn abel_identity(seed in any::<u64>(), n in 1usize..11, dim in 1usize..5, complex in any::<bool>()) {
        let mut rng = sample::rng(seed);
        let values: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..=1.0)).collect();
        let incs: Vec<Vector> = (0..n).map(|_| sample::vector(&mut rng, dim, field(complex))).collect();
        let r = abel_identity_check(&values, &incs).unwrap();
        prop_assert!(r.gap <= 1e-12);
        prop_assert!(r.coefficients.iter().all(|c| *c >= 0.0));
        let max = values.iter().copied().fold(0.0, f64::max);
        prop_assert!((r.coefficient_sum - max).abs() <= 1e-15 && r.coefficient_sum <= 1.0);
    }

    #[test]
    fn hull_membership_is_monotone(seed in any::<u64>(), dim in 1usize..4, n in 1usize..5) {
        let mut rng = sample::rng(seed);
        let small: Vec<Vector> = (0..n).map(|_| sample::vector(&mut rng, dim, Field::Real)).collect();
        let mut big = small.clone();
        big.extend((0..3).map(|_| sample::vector(&mut rng, dim, Field::Real)));
        let v = sample::vector(&mut rng, dim, Field::Real).scaled_real(0.5);
        if hull_membership(&v, &small, 1e-9).unwrap().member {
            prop_assert!(hull_membership(&v, &big, 1e-9).unwrap().member);
        }
    }

    #[test]
    fn operator_is_linear(seed in any::<u64>(), kx in 0usize..4) {
        let space = all_kinds(2, Field::Real, seed);
        let mut rng = sample::rng(seed ^ 8);
        let x = sample::integrator(&mut rng, kx, 0.0, 1.0, 2, Field::Real).unwrap();
        let t = StieltjesOperator::new(space.clone(), x).unwrap();
        let g = sample::continuous(&mut rng, 0.0, 1.0, 1, 3, Field::Real).unwrap();
        let h = sample::continuous(&mut rng, 0.0, 1.0, 1, 3, Field::Real).unwrap();
        let alpha = sample::scalar(&mut rng, Field::Real);
        let tol = 1e-8;
        let lhs = t.apply(&g.scale(alpha).add(&h).unwrap(), tol).unwrap();
        let mut rhs = t.apply(&g, tol).unwrap().scaled(alpha);
        rhs += &t.apply(&h, tol).unwrap();
        for p in space.seminorms() {
            prop_assert!(p.eval(&(&lhs - &rhs)).unwrap() <= 2.0 * tol * (1.0 + alpha.norm()));
        }
    }

    #[test]
    fn measures_ignore_constants(seed in any::<u64>(), m in 1usize..6, c in -8i32..8) {
        // dyadic data keeps every shift exact
        let mut rng = sample::rng(seed);
        let jumps: Vec<(f64, Vector)> = (1..=m)
            .map(|k| (k as f64 / 8.0, Vector::from_real(&[rng.gen_range(-16..16) as f64 / 4.0, rng.gen_range(-16..16) as f64 / 8.0])))
            .collect();
        let x = PiecewiseFunction::step(0.0, 1.0, &Vector::from_real(&[0.5, -0.25]), &jumps).unwrap()
            .add(&PiecewiseFunction::polynomial(0.0, 1.0, vec![real_poly(&[0.25, 0.5, -1.0]), real_poly(&[1.0, 0.0, 0.0, 2.0])]).unwrap())
            .unwrap();
        let shifted = x.shift(&Vector::from_real(&[c as f64 / 4.0, -(c as f64) / 2.0])).unwrap();
        prop_assert_eq!(measure_from_function(&x).unwrap(), measure_from_function(&shifted).unwrap());
    }
}
