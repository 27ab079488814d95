mod common;

use ambiguous_persuasion::lp::{
    lp_feasible, lp_solve, Constraint, LinearProgram, LpStatus, Relation,
};
use ambiguous_persuasion::vbp::{verify_vbp, SetDistribution};
use common::*;
use rand::Rng;

#[test]
fn small_examples() {
    let lp = LinearProgram::maximize(vec![1.0]).with_constraint(vec![1.0], Relation::Le, 1.0);
    let res = lp_solve(&lp).unwrap();
    assert!(res.is_optimal());
    assert!((res.value - 1.0).abs() < 1e-12);

    let lp =
        LinearProgram::maximize(vec![1.0, 1.0]).with_constraint(vec![1.0, 1.0], Relation::Eq, 1.0);
    assert!((lp_solve(&lp).unwrap().value - 1.0).abs() < 1e-12);

    let lp = LinearProgram::maximize(vec![1.0])
        .with_constraint(vec![1.0], Relation::Ge, 2.0)
        .with_constraint(vec![1.0], Relation::Le, 1.0);
    assert_eq!(lp_solve(&lp).unwrap().status, LpStatus::Infeasible);

    let lp =
        LinearProgram::maximize(vec![1.0, 0.0]).with_constraint(vec![1.0, -1.0], Relation::Le, 1.0);
    assert_eq!(lp_solve(&lp).unwrap().status, LpStatus::Unbounded);
}

#[test]
fn feasibility_examples() {
    let seg = [Constraint::new(vec![1.0, 1.0], Relation::Eq, 1.0)];
    let x = lp_feasible(2, &seg).unwrap().unwrap();
    assert!((x[0] + x[1] - 1.0).abs() < 1e-12 && x.iter().all(|v| *v >= 0.0));

    let none = [
        Constraint::new(vec![1.0, 1.0], Relation::Eq, 1.0),
        Constraint::new(vec![1.0, 0.0], Relation::Ge, 2.0),
    ];
    assert!(lp_feasible(2, &none).unwrap().is_none());
}

#[test]
fn singleton_support_recovers_prior() {
    let p0 = b(&[0.35, 0.65]);
    let mu = SetDistribution::new(vec![set(&[&[0.1, 0.9], &[0.9, 0.1]])], vec![1.0]).unwrap();
    let phi = verify_vbp(&mu, &p0).unwrap().unwrap();
    assert!(phi.picks()[0].distance_inf(&p0) < 1e-9);
}

/// Random `max c.x, Ax <= b, x >= 0` with `b > 0` (so feasible) and a box
/// row (so bounded).
fn random_lp(seed: u64) -> (LinearProgram, Vec<Vec<f64>>, Vec<f64>, Vec<f64>) {
    let mut r = rng(seed);
    let n = r.gen_range(2..6);
    let m = r.gen_range(1..6);
    let c: Vec<f64> = (0..n).map(|_| r.gen_range(-1.0..1.0)).collect();
    let mut a: Vec<Vec<f64>> = (0..m)
        .map(|_| (0..n).map(|_| r.gen_range(-1.0..1.0)).collect())
        .collect();
    let mut rhs: Vec<f64> = (0..m).map(|_| r.gen_range(0.1..2.0)).collect();
    a.push(vec![1.0; n]);
    rhs.push(5.0);
    let mut lp = LinearProgram::maximize(c.clone());
    for (row, bi) in a.iter().zip(&rhs) {
        lp.add_constraint(row.clone(), Relation::Le, *bi);
    }
    (lp, a, rhs, c)
}

#[test]
fn duality_and_complementary_slackness() {
    for seed in 0..200 {
        let (lp, a, rhs, c) = random_lp(seed);
        let res = lp_solve(&lp).unwrap();
        assert!(res.is_optimal(), "seed {seed}");
        let x = &res.solution;
        let y = &res.duals;
        assert!(lp.max_violation(x) < 1e-9);
        assert!(y.iter().all(|v| *v >= -1e-9), "seed {seed}: {y:?}");
        let dual_obj: f64 = y.iter().zip(&rhs).map(|(a, b)| a * b).sum();
        assert!((dual_obj - res.value).abs() < 1e-9, "seed {seed}");
        for j in 0..c.len() {
            let reduced: f64 = (0..a.len()).map(|i| a[i][j] * y[i]).sum::<f64>() - c[j];
            assert!(
                reduced >= -1e-9,
                "seed {seed}: dual infeasible in column {j}"
            );
            assert!((x[j] * reduced).abs() < 1e-9);
        }
        for i in 0..a.len() {
            let slack = rhs[i] - a[i].iter().zip(x).map(|(p, q)| p * q).sum::<f64>();
            assert!((y[i] * slack).abs() < 1e-9);
        }
    }
}

#[test]
fn minimization_mirrors_maximization() {
    for seed in 0..50 {
        let (lp, ..) = random_lp(seed);
        let mut neg = lp.clone();
        neg.sense = ambiguous_persuasion::lp::Sense::Minimize;
        neg.objective = lp.objective.iter().map(|c| -c).collect();
        let (a, b) = (lp_solve(&lp).unwrap(), lp_solve(&neg).unwrap());
        assert!((a.value + b.value).abs() < 1e-9);
    }
}

#[test]
fn solves_are_bit_identical() {
    for seed in 0..50 {
        let (lp, ..) = random_lp(seed);
        let a = lp_solve(&lp).unwrap();
        let b = lp_solve(&lp).unwrap();
        assert_eq!(a.value.to_bits(), b.value.to_bits());
        assert_eq!(
            a.solution.iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
            b.solution.iter().map(|v| v.to_bits()).collect::<Vec<_>>()
        );
        assert_eq!(
            a.duals.iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
            b.duals.iter().map(|v| v.to_bits()).collect::<Vec<_>>()
        );
    }
}
