//! Small deterministic hashing helpers shared by mocks and the simulated
//! backend.

use sha2::{Digest, Sha256};

pub(crate) fn digest_hex(parts: &[&[u8]]) -> String {
    let mut hasher = Sha256::new();
    for part in parts {
        hasher.update(part);
        hasher.update([0u8]);
    }
    hex::encode(hasher.finalize())
}

pub(crate) fn hash_u64(parts: &[&[u8]]) -> u64 {
    let mut hasher = Sha256::new();
    for part in parts {
        hasher.update(part);
        hasher.update([0u8]);
    }
    let bytes = hasher.finalize();
    u64::from_le_bytes(bytes[..8].try_into().expect("sha256 is at least 8 bytes"))
}

/// Uniform in [0, 1) from a hash.
pub(crate) fn unit_uniform(h: u64) -> f64 {
    (h >> 11) as f64 / (1u64 << 53) as f64
}

/// Standard normal deviate from a hash (Box-Muller on two derived uniforms).
pub(crate) fn unit_gaussian(h: u64) -> f64 {
    let u1 = unit_uniform(hash_u64(&[&h.to_le_bytes(), b"u1"])).max(1e-12);
    let u2 = unit_uniform(hash_u64(&[&h.to_le_bytes(), b"u2"]));
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hashes_are_stable_and_input_sensitive() {
        assert_eq!(digest_hex(&[b"a", b"b"]), digest_hex(&[b"a", b"b"]));
        assert_ne!(digest_hex(&[b"a", b"b"]), digest_hex(&[b"ab"]));
        let u = unit_uniform(hash_u64(&[b"x"]));
        assert!((0.0..1.0).contains(&u));
    }

    #[test]
    fn gaussian_moments_are_plausible() {
        let n = 20_000;
        let mut sum = 0.0;
        let mut sq = 0.0;
        for i in 0..n {
            let g = unit_gaussian(hash_u64(&[&(i as u64).to_le_bytes()]));
            sum += g;
            sq += g * g;
        }
        let mean = sum / n as f64;
        let var = sq / n as f64 - mean * mean;
        assert!(mean.abs() < 0.03, "mean {mean}");
        assert!((var - 1.0).abs() < 0.05, "var {var}");
    }
}
