mod common;

use common::{divergence, energy_flux, random_real_field, rel_diff};
use rmz_core::driver::{run_rmz, run_tmodel, InitialCondition};
use rmz_core::kernels::ic_sine;
use rmz_core::memory::{build_ladder, memory_term, reduced_rhs};
use rmz_core::renormalizer::{assemble_system, QuantitySet};
use rmz_core::spectral::{make_truncation, Filter, Projection};
use rmz_core::{BilinearKernel, Equation, RunConfig};

#[test]
fn full_rhs_conserves_energy() {
    for (eq, m) in [(Equation::Burgers, 32), (Equation::Burgers, 8), (Equation::Euler3d, 8), (Equation::Euler3d, 16)] {
        let t = make_truncation(m, eq.dim()).unwrap();
        let k = BilinearKernel::new(eq, &t).unwrap();
        for seed in 0..3 {
            let u = random_real_field(&t, eq.components(), Filter::All, seed);
            let r = k.full_rhs(&u).unwrap();
            let scale = u.norm_sq(Filter::All).sqrt() * r.norm_sq(Filter::All).sqrt();
            let flux = energy_flux(&u, &r);
            assert!(flux.abs() <= 1e-12 * scale, "{eq:?} M={m}: flux {flux:e}");
        }
    }
}

#[test]
fn markovian_term_conserves_resolved_energy() {
    for (eq, m) in [(Equation::Burgers, 32), (Equation::Euler3d, 8)] {
        let t = make_truncation(m, eq.dim()).unwrap();
        let k = BilinearKernel::new(eq, &t).unwrap();
        let u = random_real_field(&t, eq.components(), Filter::Resolved, 4);
        let markov = build_ladder(&u, 1, &k).unwrap().markovian();
        let scale = u.max_abs() * markov.max_abs() * t.len() as f64;
        assert!(energy_flux(&u, &markov).abs() <= 1e-13 * scale);
    }
}

#[test]
fn euler_outputs_are_divergence_free() {
    let t = make_truncation(8, 3).unwrap();
    let k = BilinearKernel::euler(&t).unwrap();
    for seed in 0..3 {
        let full = random_real_field(&t, 3, Filter::All, seed);
        assert!(divergence(&k.full_rhs(&full).unwrap()) <= 1e-12);
        let u = random_real_field(&t, 3, Filter::Resolved, 10 + seed);
        let ladder = build_ladder(&u, 3, &k).unwrap();
        for s in 1..=3 {
            assert!(divergence(ladder.term(s)) <= 1e-12);
            assert!(divergence(&memory_term(&ladder, s, &k).unwrap()) <= 1e-12);
        }
    }
}

#[test]
fn markovian_column_has_zero_energy_entry() {
    for (eq, m, order) in [(Equation::Burgers, 32, 3), (Equation::Euler3d, 8, 3), (Equation::Burgers, 16, 1)] {
        let t = make_truncation(m, eq.dim()).unwrap();
        let k = BilinearKernel::new(eq, &t).unwrap();
        for seed in 0..3 {
            let u = random_real_field(&t, eq.components(), Filter::All, seed);
            let sys = assemble_system(0.7, &u, order, &k, &QuantitySet::for_order(order)).unwrap();
            let scale = sys.matrix.amax();
            assert!(sys.matrix[(0, 0)].abs() <= 1e-12 * scale.max(1.0), "{eq:?}: {}", sys.matrix[(0, 0)]);
        }
    }
}

#[test]
fn matching_matrix_matches_finite_differences() {
    for (eq, m) in [(Equation::Burgers, 16), (Equation::Euler3d, 8)] {
        let t = make_truncation(m, eq.dim()).unwrap();
        let k = BilinearKernel::new(eq, &t).unwrap();
        let order = 3;
        let qset = QuantitySet::for_order(order);
        let u = random_real_field(&t, eq.components(), Filter::All, 21);
        let time = 0.9;
        let sys = assemble_system(time, &u, order, &k, &qset).unwrap();
        let uhat = u.project(Projection::P);
        let rate = |a: &[f64]| qset.rates(&uhat, &reduced_rhs(time, &uhat, a, order, &k).unwrap());
        let base = [1.0, 0.4, -0.3, 0.2];
        for j in 0..=order {
            let h = 0.5;
            let mut plus = base;
            let mut minus = base;
            plus[j] += h;
            minus[j] -= h;
            let (rp, rm) = (rate(&plus), rate(&minus));
            for i in 0..=order {
                let fd = (rp[i] - rm[i]) / (2.0 * h);
                let b = sys.matrix[(i, j)];
                let scale = b.abs().max(1e-300);
                if i == 0 && j == 0 {
                    assert!(fd.abs() <= 1e-12 * sys.matrix.amax());
                } else {
                    assert!((fd - b).abs() <= 1e-6 * scale, "{eq:?} B[{i},{j}] = {b:e}, fd {fd:e}");
                }
            }
        }
        // e is the rate of the full right-hand side
        let full = qset.rates(&uhat, &k.full_rhs(&u).unwrap());
        for i in 0..=order {
            assert_eq!(sys.rhs[i], full[i]);
        }
    }
}

#[test]
fn ladder_and_memory_homogeneity() {
    let lambda = 1.7f64;
    for (eq, m) in [(Equation::Burgers, 16), (Equation::Euler3d, 8)] {
        let t = make_truncation(m, eq.dim()).unwrap();
        let k = BilinearKernel::new(eq, &t).unwrap();
        let u = random_real_field(&t, eq.components(), Filter::Resolved, 5);
        let mut su = u.clone();
        su.scale(lambda);
        let (a, b) = (build_ladder(&u, 3, &k).unwrap(), build_ladder(&su, 3, &k).unwrap());
        for s in 0..=3 {
            let mut expect = a.term(s).clone();
            expect.scale(lambda.powi(s as i32 + 1));
            assert!(rel_diff(b.term(s), &expect) <= 1e-12, "{eq:?} rung {s}");
        }
        for l in 1..=3 {
            let mut expect = memory_term(&a, l, &k).unwrap();
            expect.scale(lambda.powi(l as i32 + 2));
            assert!(rel_diff(&memory_term(&b, l, &k).unwrap(), &expect) <= 1e-12, "{eq:?} order {l}");
        }
    }
}

#[test]
fn reduced_rhs_is_resolved_and_real() {
    let t = make_truncation(32, 1).unwrap();
    let k = BilinearKernel::burgers(&t).unwrap();
    let u = ic_sine(&t).unwrap();
    let r = reduced_rhs(0.5, &u, &[1.0, 0.2, 0.1, 0.05], 3, &k).unwrap();
    assert_eq!(r.project(Projection::Q).max_abs(), 0.0);
    assert!(r.reality_defect() < 1e-15);
}

fn tmodel_vs_forced(eq: Equation, n: usize, t_end: f64) {
    let mut cfg = RunConfig::new(eq);
    cfg.resolved = n;
    cfg.order = 1;
    cfg.t_end = t_end;
    cfg.sample_interval = t_end / 10.0;
    cfg.initial_condition = if eq == Equation::Burgers {
        InitialCondition::Sine
    } else {
        InitialCondition::TaylorGreen
    };
    let tm = run_tmodel(&cfg).unwrap();
    cfg.forced_coefficients = Some(vec![1.0, 1.0]);
    let rmz = run_rmz(&cfg).unwrap();
    assert!(tm.status.is_completed() && rmz.status.is_completed());
    assert_eq!(tm.samples.len(), rmz.samples.len());
    for (a, b) in tm.samples.iter().zip(&rmz.samples) {
        assert_eq!(a.t, b.t);
        assert!((a.energy - b.energy).abs() <= 1e-10, "{eq:?} t={} {} vs {}", a.t, a.energy, b.energy);
    }
    let (sa, sb) = (tm.final_state.unwrap(), rmz.final_state.unwrap());
    assert!(sa.distance(&sb) <= 1e-10);
}

#[test]
fn tmodel_equals_unit_coefficient_first_order_model() {
    tmodel_vs_forced(Equation::Burgers, 16, 5.0);
    tmodel_vs_forced(Equation::Euler3d, 4, 2.0);
}
