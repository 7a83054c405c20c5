use mdimlab::bits::BitString;
use mdimlab::codec::{
    decode_int, decode_point, decode_point_exact, encode_int, encode_point, pair, unpair, DyadicRational,
    RationalPoint,
};
use proptest::prelude::*;

/// Gamma length of the zigzag index plus one, computed with plain integers.
fn int_code_len(z: i64) -> usize {
    let zig = if z < 0 { (-(z as i128)) * 2 - 1 } else { z as i128 * 2 } + 1;
    let width = 128 - zig.leading_zeros() as usize;
    2 * width - 1
}

fn point(mantissas: &[i64], exp: u32) -> RationalPoint {
    RationalPoint::new(mantissas.iter().map(|&m| DyadicRational::new(m, exp)).collect()).unwrap()
}

proptest! {
    #[test]
    fn int_round_trip(z in any::<i64>(), tail in proptest::collection::vec(any::<bool>(), 0..16)) {
        let mut bits = encode_int(z);
        prop_assert_eq!(bits.len(), int_code_len(z));
        let len = bits.len();
        bits.extend_bits(&tail);
        let (back, used) = decode_int(&bits).unwrap();
        prop_assert_eq!(back, z.into());
        prop_assert_eq!(used, len);
    }

    #[test]
    fn point_round_trip(ms in proptest::collection::vec(-1000i64..1000, 1..5), exp in 0u32..12) {
        let p = point(&ms, exp);
        let bits = encode_point(&p);
        prop_assert_eq!(decode_point_exact(&bits), Some(p.clone()));
        let (q, used) = decode_point(&bits).unwrap();
        prop_assert_eq!(q, p);
        prop_assert_eq!(used, bits.len());
    }

    #[test]
    fn pairing_round_trip(a in proptest::collection::vec(any::<bool>(), 0..40),
                          b in proptest::collection::vec(any::<bool>(), 0..40)) {
        let (a, b) = (BitString::from_bits(a), BitString::from_bits(b));
        let s = pair(&a, &b);
        prop_assert_eq!(s.len(), int_code_len(a.len() as i64) + a.len() + b.len());
        prop_assert_eq!(unpair(&s).unwrap(), (a, b));
    }

    #[test]
    fn encodings_are_prefix_free(x in -300i64..300, y in -300i64..300) {
        let (a, b) = (encode_int(x), encode_int(y));
        prop_assert!(x == y || !(a.is_proper_prefix_of(&b) || a == b));
    }
}

#[test]
fn equal_values_share_one_encoding() {
    // 2/4 and 1/2 are the same number.
    let a = point(&[2, 6], 2);
    let b = point(&[1, 3], 1);
    assert_eq!(a, b);
    assert_eq!(encode_point(&a), encode_point(&b));
}

#[test]
fn non_canonical_exponent_rejected() {
    // Dimension 1, exponent 1, mantissa 2 would be 2/2 = 1 written with a spare exponent.
    let mut bits = encode_int(1);
    bits.extend_from(&encode_int(1));
    bits.extend_from(&encode_int(2));
    assert!(decode_point_exact(&bits).is_none());
}

#[test]
fn truncated_input_rejected() {
    let bits = encode_point(&point(&[5, -3], 3));
    for cut in 0..bits.len() {
        let short = BitString::from_bits(bits.bits()[..cut].to_vec());
        assert!(decode_point(&short).is_err(), "cut {cut}");
    }
}
