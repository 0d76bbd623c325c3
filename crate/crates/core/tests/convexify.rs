use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use upsynth::synth::{convexify_bilinear, BilinearRole, ConvexPart};

#[test]
fn replacement_dominates_over_random_samples() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for role in [BilinearRole::Reach, BilinearRole::Cost] {
        for _ in 0..20_000 {
            let d = rng.random_range(1e-4..0.5);
            let (yh, zh) = (rng.random_range(0.0..1.0), rng.random_range(0.0..50.0));
            let (y, z) = (rng.random_range(0.0..1.0), rng.random_range(0.0..50.0));
            let s = convexify_bilinear(d, role, yh, zh).unwrap();
            let scale = 1.0 + d * (y * y + z * z + yh * yh + zh * zh);
            assert!(s.replacement(y, z) - s.concave_value(y, z) >= -1e-12 * scale);
            assert!((s.replacement(yh, zh) - s.concave_value(yh, zh)).abs() <= 1e-10 * scale);
            assert!(s.upper_bound(y, z) >= s.term(y, z) - 1e-12 * scale);
        }
    }
}

#[test]
fn convex_parts_follow_the_role() {
    assert_eq!(convexify_bilinear(0.1, BilinearRole::Reach, 0.0, 0.0).unwrap().convex, ConvexPart::SumOfSquares);
    assert_eq!(convexify_bilinear(0.1, BilinearRole::Cost, 0.0, 0.0).unwrap().convex, ConvexPart::SquareOfSum);
}

#[test]
fn reach_linearization_closed_form() {
    // d = 0.5, (ŷ, ẑ) = (0.4, 0.5): -d(y+z)² ≤ 0.405 - 0.9(y + z).
    let s = convexify_bilinear(0.5, BilinearRole::Reach, 0.4, 0.5).unwrap();
    assert!((s.constant - 0.405).abs() < 1e-15);
    assert!((s.lin_y + 0.9).abs() < 1e-15 && (s.lin_z + 0.9).abs() < 1e-15);
    assert!((s.replacement(1.0, 0.0) - (-0.495)).abs() < 1e-15);
}

proptest! {
    #[test]
    fn gap_is_a_square(d in 1e-6f64..1.0, yh in 0.0f64..1.0, zh in 0.0f64..10.0, y in 0.0f64..1.0, z in 0.0f64..10.0) {
        // Reach: gap = d((y+z) - (ŷ+ẑ))²; cost: gap = d((y-ŷ)² + (z-ẑ)²).
        let r = convexify_bilinear(d, BilinearRole::Reach, yh, zh).unwrap();
        let gap = r.replacement(y, z) - r.concave_value(y, z);
        let want = d * ((y + z) - (yh + zh)).powi(2);
        prop_assert!((gap - want).abs() <= 1e-12 * (1.0 + d * 400.0));
        let c = convexify_bilinear(d, BilinearRole::Cost, yh, zh).unwrap();
        let gap = c.replacement(y, z) - c.concave_value(y, z);
        let want = d * ((y - yh).powi(2) + (z - zh).powi(2));
        prop_assert!((gap - want).abs() <= 1e-12 * (1.0 + d * 400.0));
    }
}
