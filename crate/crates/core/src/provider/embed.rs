use super::{EmbeddingVector, ProviderError, ProviderResult};
use crate::text::terms;

pub const MIN_EMBEDDING_DIMENSION: usize = 8;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

/// 64-bit FNV-1a over the bytes of `data`.
pub fn fnv1a_64(data: &[u8]) -> u64 {
    data.iter()
        .fold(FNV_OFFSET, |h, b| (h ^ u64::from(*b)).wrapping_mul(FNV_PRIME))
}

/// Signed feature hashing: each lowercase alphanumeric term adds ±1 to the
/// bucket `hash mod dimension`, negative when the hash's top bit is set. The
/// result is L2-normalized; text without terms yields the zero vector.
pub fn hashed_embedding(text: &str, dimension: usize) -> ProviderResult<EmbeddingVector> {
    if dimension < MIN_EMBEDDING_DIMENSION {
        return Err(ProviderError::Config(format!(
            "embedding dimension {dimension} is below {MIN_EMBEDDING_DIMENSION}"
        )));
    }
    let mut values = vec![0.0f64; dimension];
    for term in terms(text) {
        let hash = fnv1a_64(term.as_bytes());
        let bucket = (hash % dimension as u64) as usize;
        let sign = if hash >> 63 == 1 { -1.0 } else { 1.0 };
        values[bucket] += sign;
    }
    Ok(EmbeddingVector::normalized(values))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fnv_reference_values() {
        // Published FNV-1a 64 test vectors.
        assert_eq!(fnv1a_64(b""), 0xcbf29ce484222325);
        assert_eq!(fnv1a_64(b"a"), 0xaf63dc4c8601ec8c);
        assert_eq!(fnv1a_64(b"foobar"), 0x85944171f73967e8);
    }

    #[test]
    fn empty_text_is_zero_sentinel() {
        let v = hashed_embedding("", 256).unwrap();
        assert!(v.is_zero());
        assert_eq!(v.norm, 0.0);
        assert!(hashed_embedding("?? --", 256).unwrap().is_zero());
    }

    #[test]
    fn unit_norm() {
        let v = hashed_embedding("maize planting", 256).unwrap();
        assert!((v.norm - 1.0).abs() <= 1e-6);
    }
}
