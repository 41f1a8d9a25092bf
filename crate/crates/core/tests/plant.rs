//! Plant integration checks against closed-form oracles: matrix-exponential
//! propagation of the LTI system, the analytic single-area steady state, and
//! self-convergence of the RK4 integrator.

use mfc_lfc::plant::{
    plant_derivative, rk4_step, LoadProfile, LoadStep, PlantInputs, PlantParams, PlantState,
};
use nalgebra::{SMatrix, SVector};

type Aug = SMatrix<f64, 12, 12>;

/// `d/dt [x; w] = [[A, B], [0, 0]] [x; w]` with `w = (u1, u2, L1, L2, 1)`
/// held constant. Written out independently of `plant_derivative`.
fn augmented(p: &PlantParams) -> Aug {
    let mut m = Aug::zeros();
    // state order: gov1 turb1 f1 gov2 turb2 f2 tie | u1 u2 L1 L2 one
    for i in 0..2 {
        let a = &p.areas[i];
        let (g, t, f) = (3 * i, 3 * i + 1, 3 * i + 2);
        let tie_sign = if i == 0 { -1.0 } else { 1.0 };
        m[(g, g)] = -1.0 / a.t_gov;
        m[(g, f)] = -1.0 / (a.r_droop * a.t_gov);
        m[(g, 7 + i)] = 1.0 / a.t_gov;
        m[(t, g)] = 1.0 / a.t_turb;
        m[(t, t)] = -1.0 / a.t_turb;
        m[(f, t)] = a.k_ps / a.t_ps;
        m[(f, f)] = -1.0 / a.t_ps;
        m[(f, 6)] = tie_sign * a.k_ps / a.t_ps;
        m[(f, 9 + i)] = -a.k_ps / a.t_ps;
    }
    let c = 2.0 * std::f64::consts::PI * p.t12;
    m[(6, 2)] = c;
    m[(6, 5)] = -c;
    m
}

fn sample_state() -> PlantState {
    PlantState {
        dp_gov: [0.02, -0.01],
        dp_turb: [0.015, 0.005],
        df: [-0.03, 0.01],
        dp_tie: 0.004,
    }
}

fn propagate(p: &PlantParams, x: PlantState, inputs: &PlantInputs, dt: f64, steps: usize) -> PlantState {
    (0..steps).fold(x, |x, _| rk4_step(p, &x, inputs, dt).unwrap())
}

#[test]
fn derivative_matches_hand_written_matrix() {
    let p = PlantParams::default();
    let x = sample_state();
    let inputs = PlantInputs {
        u: [0.03, -0.02],
        load: [0.01, 0.002],
    };
    let m = augmented(&p);
    let mut z = SVector::<f64, 12>::zeros();
    z.fixed_rows_mut::<7>(0).copy_from_slice(&x.to_array());
    z.fixed_rows_mut::<5>(7).copy_from_slice(&[inputs.u[0], inputs.u[1], inputs.load[0], inputs.load[1], 1.0]);
    let want = m * z;
    let got = plant_derivative(&p, &x, &inputs).to_array();
    for i in 0..7 {
        assert!((got[i] - want[i]).abs() < 1e-12, "component {i}: {} vs {}", got[i], want[i]);
    }
}

#[test]
fn rk4_matches_matrix_exponential() {
    let p = PlantParams::default();
    let x0 = sample_state();
    let inputs = PlantInputs {
        u: [0.03, -0.02],
        load: [0.01, 0.002],
    };
    let mut z0 = SVector::<f64, 12>::zeros();
    z0.fixed_rows_mut::<7>(0).copy_from_slice(&x0.to_array());
    z0.fixed_rows_mut::<5>(7).copy_from_slice(&[0.03, -0.02, 0.01, 0.002, 1.0]);
    let exact = augmented(&p).exp() * z0;

    let x1 = propagate(&p, x0, &inputs, 0.01, 100).to_array();
    for i in 0..7 {
        assert!((x1[i] - exact[i]).abs() < 1e-8, "component {i}: {} vs {}", x1[i], exact[i]);
    }
}

#[test]
fn rk4_is_fourth_order() {
    let p = PlantParams::default();
    let x0 = sample_state();
    let inputs = PlantInputs {
        u: [0.05, 0.0],
        load: [0.0, 0.01],
    };
    let reference = propagate(&p, x0, &inputs, 0.01 / 64.0, 64 * 100).to_array();
    let err = |dt: f64| {
        let steps = (1.0 / dt).round() as usize;
        let x = propagate(&p, x0, &inputs, dt, steps).to_array();
        x.iter().zip(&reference).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    };
    let ratio = err(0.01) / err(0.005);
    assert!((12.0..20.0).contains(&ratio), "ratio {ratio}");
}

#[test]
fn single_area_droop_steady_state() {
    let p = PlantParams {
        t12: 0.0,
        ..Default::default()
    };
    let a = p.areas[0];
    let load = 0.01;
    let inputs = PlantInputs {
        u: [0.0, 0.0],
        load: [load, 0.0],
    };
    let x = propagate(&p, PlantState::default(), &inputs, 0.01, 10_000);
    let want = -load * a.k_ps / (1.0 + a.k_ps / a.r_droop);
    assert!((x.df[0] - want).abs() < 1e-9, "{} vs {want}", x.df[0]);
    assert_eq!(x.df[1], 0.0);
    assert_eq!(x.dp_tie, 0.0);
}

#[test]
fn open_loop_superposition() {
    let p = PlantParams::default();
    let lp1 = LoadProfile::new(vec![
        LoadStep { t: 0.0, area1: 0.0, area2: 0.0 },
        LoadStep { t: 0.5, area1: 0.01, area2: 0.0 },
        LoadStep { t: 4.0, area1: -0.02, area2: 0.0 },
    ])
    .unwrap();
    let lp2 = LoadProfile::new(vec![
        LoadStep { t: 0.0, area1: 0.0, area2: 0.003 },
        LoadStep { t: 2.0, area1: 0.0, area2: 0.03 },
    ])
    .unwrap();
    let run = |lp: &dyn Fn(f64) -> [f64; 2]| {
        let mut x = PlantState::default();
        for k in 0..2000 {
            let inputs = PlantInputs {
                u: [0.0; 2],
                load: lp(k as f64 * 0.01),
            };
            x = rk4_step(&p, &x, &inputs, 0.01).unwrap();
        }
        x.to_array()
    };
    let a = run(&|t| lp1.load_at(t));
    let b = run(&|t| lp2.load_at(t));
    let sum = run(&|t| {
        let (l1, l2) = (lp1.load_at(t), lp2.load_at(t));
        [l1[0] + l2[0], l1[1] + l2[1]]
    });
    for i in 0..7 {
        assert!((sum[i] - a[i] - b[i]).abs() < 1e-9);
    }
}

#[test]
fn tie_line_antisymmetry_along_trajectory() {
    let p = PlantParams::default();
    let mut x = sample_state();
    let inputs = PlantInputs {
        u: [0.01, 0.02],
        load: [0.03, -0.01],
    };
    for _ in 0..500 {
        let with_tie = plant_derivative(&p, &x, &inputs);
        let no_tie = plant_derivative(&p, &PlantState { dp_tie: 0.0, ..x }, &inputs);
        let d1 = with_tie.df[0] - no_tie.df[0];
        let d2 = with_tie.df[1] - no_tie.df[1];
        assert!((d1 + d2).abs() < 1e-15);
        x = rk4_step(&p, &x, &inputs, 0.01).unwrap();
    }
}
