use nalgebra::{Matrix2, Vector2};

pub type Vec2 = Vector2<f64>;
pub type Mat2 = Matrix2<f64>;

/// Max-abs entry of a matrix.
pub fn max_abs(m: &Mat2) -> f64 {
    m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

/// Counter-based seed mixing (splitmix64 finalizer) so reseeding depends only
/// on `(seed, frame, cell)` and not on iteration order.
pub fn mix_seed(seed: u64, frame: u64, cell: u64) -> u64 {
    let mut z = seed
        .wrapping_add(frame.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(cell.wrapping_mul(0xD1B5_4A32_D192_ED03));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_mixing_separates_neighbouring_cells() {
        let a = mix_seed(7, 0, 10);
        let b = mix_seed(7, 0, 11);
        let c = mix_seed(7, 1, 10);
        assert_ne!(a, b);
        assert_ne!(a, c);
        assert_eq!(a, mix_seed(7, 0, 10));
    }
}
