use std::f64::consts::PI;

use proptest::prelude::*;

use rydgate::atomic_structure::{
    dipole_dipole_energy, dipole_force, stark_shift, InteractionGeometry, Length, PhysicalContext,
    StarkState,
};
use rydgate::gate_protocols::{
    adiabatic_schedule, analyze_gate, dressed_energies, model_b_schedule, wrap_phase, wrap_signed,
    AdiabaticPulse,
};
use rydgate::internal_dynamics::InternalModel;
use rydgate::motional_errors::{kick_bound, thermal_kick, thermal_trap, trap_mismatch_bound};

fn geometry(sep_a0: f64) -> InteractionGeometry {
    let ctx = PhysicalContext::new(0.0).unwrap();
    InteractionGeometry::new(
        Length::BohrRadii(sep_a0),
        Length::Meters(0.0),
        ctx.constants(),
    )
    .unwrap()
}

proptest! {
    #[test]
    fn stark_shift_is_odd_in_q(n in 2u32..60, frac in 0.0f64..1.0, field in 0.0f64..1e3) {
        // q runs over n-1, n-3, ..., -(n-1) for m = 0
        let k = ((n - 1) as f64 * frac) as i32;
        let q = n as i32 - 1 - 2 * k;
        let ctx = PhysicalContext::new(field).unwrap();
        let up = stark_shift(&StarkState::hydrogen(n, q, 0).unwrap(), &ctx);
        let down = stark_shift(&StarkState::hydrogen(n, -q, 0).unwrap(), &ctx);
        prop_assert!((up + down).abs() <= 1e-12 * up.abs().max(1.0));
    }

    #[test]
    fn interaction_scales_as_inverse_cube(n in 5u32..50, sep in 500.0f64..1e5) {
        let s = StarkState::extremal(n).unwrap();
        let ctx = PhysicalContext::new(0.0).unwrap();
        let near = dipole_dipole_energy(&s, &s, &geometry(sep), &ctx);
        let far = dipole_dipole_energy(&s, &s, &geometry(2.0 * sep), &ctx);
        prop_assert!((far / near - 0.125).abs() < 1e-12);
        let g = geometry(sep);
        let f = dipole_force(near, g.separation()).unwrap();
        prop_assert!((f * g.separation() / near - 3.0).abs() < 1e-12);
    }

    #[test]
    fn opposite_dipoles_repel(n in 5u32..50) {
        let s = StarkState::extremal(n).unwrap();
        let flipped = StarkState::hydrogen(n, -(n as i32 - 1), 0).unwrap();
        let ctx = PhysicalContext::new(0.0).unwrap();
        let same = dipole_dipole_energy(&s, &s, &geometry(2000.0), &ctx);
        let opposite = dipole_dipole_energy(&s, &flipped, &geometry(2000.0), &ctx);
        prop_assert!(same < 0.0 && opposite > 0.0);
        prop_assert!((same + opposite).abs() <= 1e-12 * same.abs());
    }

    #[test]
    fn thermal_scalings(p in 1e-9f64..1e-2, nbar in 0.0f64..20.0) {
        for (b, factor) in [
            (thermal_kick(p, nbar), 2.0 * nbar + 1.0),
            (thermal_trap(p, nbar), 2.0 * nbar * nbar + 2.0 * nbar + 1.0),
        ] {
            prop_assert!(b.value >= p && b.value <= 1.0);
            if b.clamped {
                prop_assert!(p * factor > 1.0);
            } else {
                prop_assert!((b.value - p * factor).abs() <= 1e-15 * b.value);
            }
        }
    }

    #[test]
    fn kick_bound_scales_with_duration_squared(eta in 1e-3f64..0.2, dt in 1e-7f64..1e-5) {
        let a = kick_bound(eta, 1e8, 1.8e9, dt).unwrap();
        let b = kick_bound(eta, 1e8, 1.8e9, 2.0 * dt).unwrap();
        if !a.clamped && !b.clamped {
            prop_assert!((b.value / a.value - 4.0).abs() < 1e-12);
        }
        prop_assert!(b.value <= 1.0);
    }

    #[test]
    fn trap_bound_vanishes_for_matched_traps(omega in 1e5f64..1e7, dt in 1e-7f64..1e-5) {
        prop_assert_eq!(trap_mismatch_bound(omega, omega, dt).unwrap().value, 0.0);
    }

    #[test]
    fn eg_energy_has_the_adiabatic_limits(omega in 1e6f64..1e8, delta in 1e10f64..1e12) {
        // far detuned: light shift Ω²/(4δ); flipping δ flips the sign
        let plus = dressed_energies(omega, delta, 1.8e9).unwrap().eg;
        let minus = dressed_energies(omega, -delta, 1.8e9).unwrap().eg;
        let light_shift = -omega * omega / (4.0 * delta);
        prop_assert!((plus - light_shift).abs() < 1e-3 * light_shift.abs());
        prop_assert!((plus + minus).abs() < 1e-12 * plus.abs());
    }

    #[test]
    fn wrapping_is_periodic(x in -100.0f64..100.0) {
        let w = wrap_phase(x);
        prop_assert!((0.0..2.0 * PI).contains(&w));
        let s = wrap_signed(x);
        prop_assert!(s > -PI && s <= PI);
        prop_assert!(((w - s) / (2.0 * PI)).fract().abs() < 1e-9 || ((w - s) / (2.0 * PI)).fract().abs() > 1.0 - 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn gamma_zero_preserves_norm(ratio in 10.0f64..40.0, asym in 0.8f64..1.2) {
        let omega = 1e8;
        let u = ratio * omega;
        let sched = model_b_schedule(omega, asym * omega, u).unwrap();
        let r = analyze_gate(&sched, &InternalModel::new(u, 0.0).unwrap(), 1e-9).unwrap();
        // unequal pulse areas leave Rydberg population behind, but never lose norm
        for s in &r.final_states {
            prop_assert!((s.norm_sqr() - 1.0).abs() < 1e-8, "norm {}", s.norm_sqr());
        }
    }

    #[test]
    fn adiabatic_phase_grows_with_duration(d in 2e-6f64..3.5e-6) {
        let model = InternalModel::new(1.8e9, 0.0).unwrap();
        let a = analyze_gate(&adiabatic_schedule(&AdiabaticPulse::REFERENCE, d).unwrap(), &model, 1e-9).unwrap();
        let b = analyze_gate(&adiabatic_schedule(&AdiabaticPulse::REFERENCE, d * 1.05).unwrap(), &model, 1e-9)
            .unwrap();
        // the phase is monotone in Δt across the calibration bracket
        prop_assert!(wrap_signed(b.entanglement_phase - a.entanglement_phase) > 0.0);
    }
}

#[test]
fn model_b_phase_approaches_pi_with_stronger_interaction() {
    let omega = 1e8;
    let deficits: Vec<f64> = [9e8, 1.8e9, 3.6e9]
        .iter()
        .map(|&u| {
            let r = analyze_gate(
                &model_b_schedule(omega, omega, u).unwrap(),
                &InternalModel::new(u, 0.0).unwrap(),
                1e-9,
            )
            .unwrap();
            wrap_signed(PI - r.entanglement_phase).abs()
        })
        .collect();
    assert!(
        deficits[0] > deficits[1] && deficits[1] > deficits[2],
        "{deficits:?}"
    );
}
