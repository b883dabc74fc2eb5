mod support;

use flowmap_fsi::grid::{solve_projection, BoundaryKind, MacGrid, ProjectionSettings};
use flowmap_fsi::{Mat2, Vec2};
use proptest::prelude::*;
use support::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn stencil_weights_sum_to_one(x in 0.0f64..1.0, y in 0.0f64..1.0, periodic in any::<bool>()) {
        partition_of_unity(x, y, periodic)?;
    }

    #[test]
    fn projection_is_idempotent_and_divergence_free(kind in 0u8..3, seed in any::<u64>(), heavy in 1.0f64..40.0) {
        projection_idempotent(kind, seed, heavy)?;
    }

    #[test]
    fn apic_transfer_reproduces_affine_fields(
        u0 in -1.0f64..1.0, v0 in -1.0f64..1.0,
        a in -1.0f64..1.0, b in -1.0f64..1.0, c in -1.0f64..1.0, d in -1.0f64..1.0,
        jitter in 0.0f64..1.0,
    ) {
        affine_reproduction(Vec2::new(u0, v0), Mat2::new(a, b, c, d), jitter)?;
    }

    #[test]
    fn delta_kernel_moments(x in 0.3f64..0.7, y in 0.3f64..0.7) {
        delta_moments(x, y)?;
    }

    #[test]
    fn spreading_is_adjoint_to_interpolation(
        x in 0.25f64..0.75, y in 0.25f64..0.75,
        fx in -1.0f64..1.0, fy in -1.0f64..1.0, seed in any::<u64>(),
    ) {
        spread_adjoint(x, y, Vec2::new(fx, fy), seed)?;
    }

    #[test]
    fn xpbd_keeps_pins_fixed(tilt in -1.0f64..1.0, steps in 1usize..20) {
        xpbd_pin(tilt, steps)?;
    }

    #[test]
    fn stretched_single_edge_returns_to_rest(angle in 0.0f64..6.28, stretch in 0.0f64..0.2) {
        xpbd_rest(angle, stretch)?;
    }

    #[test]
    fn dump_round_trip_is_bit_exact(kind in 0u8..3, seed in any::<u64>(), n in 2usize..10) {
        dump_round_trip(kind, seed, n)?;
    }
}

#[test]
fn cosine_kernel_first_moment_is_small() {
    let b = cosine_first_moment_bound();
    assert!(b > 0.02 && b < 0.022, "{b}");
}

#[test]
fn inflow_faces_keep_prescribed_velocity_after_projection() {
    let layout = layout_for(2, 12);
    let mut grid = MacGrid::new(layout, 1.0);
    grid.velocity = random_field(&layout, 7);
    solve_projection(&mut grid, 0.01, &ProjectionSettings::default()).unwrap();
    assert!(matches!(layout.boundaries.left, BoundaryKind::Inflow { .. }));
    for j in 0..layout.ny {
        assert_eq!(grid.velocity.u[layout.u_index(0, j)], 0.3);
    }
}
