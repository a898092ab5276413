use energetic::models::plasticity::slip;
use energetic::models::{
    Boundary, ConvexPointwiseModel, ConvexPointwiseParams, DelaminationModel, DelaminationParams,
    EndLoading, GlueSite, GradientModel, GradientParams, PlasticityParams, PlasticityPointModel,
    TwoPhaseModel, TwoPhaseParams,
};
use energetic::trajectory::total_dissipation;
use energetic::verify::{sampled_stability, StabilityCheck, StabilityMode};
use energetic::{Continuity, Load, Model, StabilityVerdict, TimeGrid, Trajectory};
use proptest::prelude::*;
use proptest::strategy::ValueTree;

fn convex() -> ConvexPointwiseModel {
    ConvexPointwiseModel::new(
        ConvexPointwiseParams {
            weights: vec![0.5, 0.25, 0.25],
            alpha: vec![1.0, 2.0, 0.5],
            beta: 2.5,
            loads: vec![Load::affine(0.0, 2.0), Load::affine(0.5, -1.0), Load::affine(0.0, 0.5)],
            dissipation: 0.75,
        },
        2.0,
    )
    .unwrap()
}

fn gradient() -> GradientModel {
    GradientModel::new(
        GradientParams {
            nodes: 3,
            length: 1.0,
            loads: vec![Load::affine(0.0, 1.0); 3],
            dissipation: 0.5,
            left: Boundary::Natural,
            right: Boundary::Natural,
        },
        1.0,
    )
    .unwrap()
}

fn two_phase() -> TwoPhaseModel {
    TwoPhaseModel::new(
        TwoPhaseParams {
            weights: vec![0.5, 0.25, 0.25],
            modulus: 4.0,
            transformation_strain: 0.5,
            phase_energy: 0.25,
            sigma_plus: 0.5,
            sigma_minus: 0.75,
            loading: EndLoading::Displacement { load: Load::affine(0.0, 1.0) },
        },
        1.0,
    )
    .unwrap()
}

fn delamination() -> DelaminationModel {
    DelaminationModel::new(
        DelaminationParams {
            springs: vec![1.0, 2.0, 1.0],
            glue: (1..=3)
                .map(|node| GlueSite { node, stiffness: 1.5, area: 0.5 })
                .collect(),
            clamped: true,
            loading: EndLoading::Displacement { load: Load::affine(0.0, 1.0) },
            dissipation: 0.3,
        },
        1.0,
    )
    .unwrap()
}

fn plasticity() -> PlasticityPointModel {
    PlasticityPointModel::new(
        PlasticityParams {
            mu: 2.0,
            kappa: 0.5,
            weight: 1.0,
            shear: Load::affine(0.0, 1.0),
        },
        1.0,
    )
    .unwrap()
}

fn all_models() -> Vec<Box<dyn Model>> {
    vec![
        Box::new(convex()),
        Box::new(gradient()),
        Box::new(two_phase()),
        Box::new(delamination()),
        Box::new(plasticity()),
    ]
}

/// Maps unit-cube coordinates into the model's admissible box around `anchor`.
fn place(model: &dyn Model, anchor: &[f64], unit: &[f64]) -> Vec<f64> {
    model
        .search_box(anchor)
        .iter()
        .zip(unit)
        .map(|(&(lo, hi), u)| lo + u * (hi - lo))
        .collect()
}

fn weighted_l1(model: &dyn Model, a: &[f64], b: &[f64]) -> f64 {
    model.weights().iter().zip(a.iter().zip(b)).map(|(w, (x, y))| w * (x - y).abs()).sum()
}

fn units() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0..=1.0f64, 3)
}

proptest! {
    #[test]
    fn dissipation_is_a_quasi_distance(a in units(), b in units(), c in units()) {
        for model in all_models() {
            let m = model.as_ref();
            let full = vec![1.0; m.dim()];
            let x = place(m, &full, &a);
            // nested boxes keep monotone models on finite transitions
            let y = place(m, &x, &b);
            let z = place(m, &y, &c);
            prop_assert_eq!(m.dissipation(&x, &x), 0.0);
            let (xy, yz, xz) = (m.dissipation(&x, &y), m.dissipation(&y, &z), m.dissipation(&x, &z));
            prop_assert!(xz <= xy + yz + 1e-12 * (1.0 + xy + yz), "{}: {xz} > {xy} + {yz}", m.name());
            prop_assert!(xy >= m.coercivity_const() * weighted_l1(m, &x, &y) - 1e-12, "{}", m.name());
        }
    }

    #[test]
    fn dissipation_is_additive(states in prop::collection::vec(units(), 5), cut in 1usize..4) {
        for model in all_models() {
            let m = model.as_ref();
            let mut anchor = vec![1.0; m.dim()];
            let mut seq = Vec::new();
            for u in &states {
                anchor = place(m, &anchor, u);
                seq.push(m.make_state(anchor.clone()).unwrap());
            }
            let grid = TimeGrid::uniform(1.0, 4).unwrap();
            let traj = Trajectory::new(grid.clone(), seq, Continuity::Left).unwrap();
            let r = grid.time(cut);
            let whole = total_dissipation(m, &traj, 0.0, 1.0).unwrap();
            let parts = total_dissipation(m, &traj, 0.0, r).unwrap() + total_dissipation(m, &traj, r, 1.0).unwrap();
            prop_assert!((whole - parts).abs() <= 1e-12 * (1.0 + whole.abs()), "{}: {whole} vs {parts}", m.name());
        }
    }

    #[test]
    fn energy_is_nonnegative_on_the_box(u in units(), t in 0.0..=1.0f64) {
        for model in all_models() {
            let m = model.as_ref();
            let z = place(m, &vec![1.0; m.dim()], &u);
            let e = m.energy(t, &z);
            prop_assert!(e >= -1e-12, "{}: I({t}, {z:?}) = {e}", m.name());
        }
    }

    #[test]
    fn two_phase_dissipation_dominates_threshold(v in -2.0..2.0f64) {
        let m = two_phase();
        prop_assert!(m.psi(v) >= 0.5f64.min(0.75) * v.abs());
    }

    #[test]
    fn delamination_stored_energy_is_affine_in_glue(
        phi in prop::collection::vec(-2.0..2.0f64, 4),
        a in units(),
        b in units(),
        s in 0.0..=1.0f64,
        t in 0.0..=1.0f64,
    ) {
        use energetic::EquilibriumModel;
        let m = delamination();
        let mut field = phi.clone();
        field[0] = 0.0;
        field[3] = t;
        let mix: Vec<f64> = a.iter().zip(&b).map(|(x, y)| (1.0 - s) * x + s * y).collect();
        let lhs = m.stored_energy(t, &field, &mix);
        let rhs = (1.0 - s) * m.stored_energy(t, &field, &a) + s * m.stored_energy(t, &field, &b);
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()), "{lhs} vs {rhs}");
    }

    #[test]
    fn slips_are_unimodular(g in -10.0..10.0f64) {
        prop_assert_eq!(slip(g).determinant(), 1.0);
    }
}

#[test]
fn oracle_agrees_with_sampling() {
    let m = convex();
    let check = StabilityCheck { mode: StabilityMode::Sampled, ..StabilityCheck::default() };
    let mut runner = proptest::test_runner::TestRunner::deterministic();
    let mut stable = 0;
    for i in 0..1000u64 {
        let z = prop::collection::vec(-1.5..1.5f64, 3)
            .new_tree(&mut runner)
            .unwrap()
            .current();
        let t = (i % 9) as f64 * 0.25;
        match m.stability_oracle(t, &z) {
            StabilityVerdict::Stable => {
                stable += 1;
                let record = sampled_stability(&m, t, &z, &check, i);
                assert!(record.passed(), "oracle stable but sampling found {record:?} at t={t}, z={z:?}");
            }
            StabilityVerdict::Unstable(w) => {
                let again = m.energy(t, &z) - m.energy(t, &w.competitor) - m.dissipation(&z, &w.competitor);
                assert!(w.violation > 0.0 && (again - w.violation).abs() <= 1e-12);
            }
            StabilityVerdict::Unknown => panic!("convex oracle must decide"),
        }
    }
    assert!(stable > 0);
}
