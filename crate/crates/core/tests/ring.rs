use num_bigint::BigInt;
use padic_lab::ring::vector::{all_vectors, decode, encode, split, valuation};
use padic_lab::{DiagonalForm, LabError, Modulus, PointSet};
use proptest::prelude::*;

fn primes() -> impl Strategy<Value = u64> {
    prop::sample::select(vec![3u64, 5, 7, 11, 13, 101, 46337])
}

fn modulus() -> impl Strategy<Value = Modulus> {
    (primes(), 1u32..=4).prop_filter_map("q fits the cap", |(p, r)| Modulus::new(p, r).ok())
}

fn big_mod(x: BigInt, q: u64) -> u64 {
    let q = BigInt::from(q);
    let r = ((x % &q) + &q) % &q;
    r.try_into().unwrap()
}

proptest! {
    #[test]
    fn arithmetic_matches_bigint(m in modulus(), a in any::<u64>(), b in any::<u64>(), e in 0u64..200) {
        let q = m.q();
        let (a, b) = (a % q, b % q);
        let (ba, bb) = (BigInt::from(a), BigInt::from(b));
        prop_assert_eq!(m.add(a, b), big_mod(&ba + &bb, q));
        prop_assert_eq!(m.sub(a, b), big_mod(&ba - &bb, q));
        prop_assert_eq!(m.mul(a, b), big_mod(&ba * &bb, q));
        prop_assert_eq!(m.neg(a), big_mod(-&ba, q));
        prop_assert_eq!(m.pow(a, e), big_mod(ba.pow(e as u32), q));
    }

    #[test]
    fn signed_reduction(m in modulus(), x in any::<i64>()) {
        prop_assert_eq!(m.reduce_i64(x), big_mod(BigInt::from(x), m.q()));
        prop_assert_eq!(m.reduce_i128(x as i128 * 3), big_mod(BigInt::from(x) * 3, m.q()));
    }

    #[test]
    fn unit_inverses(m in modulus(), a in any::<u64>()) {
        let a = a % m.q();
        match m.unit_inverse(a) {
            Ok(inv) => prop_assert_eq!(m.mul(a, inv), 1),
            Err(_) => prop_assert_eq!(a % m.p(), 0),
        }
        prop_assert_eq!(m.is_unit(a), a % m.p() != 0);
    }

    #[test]
    fn ord_p_divides_exactly(m in modulus(), a in 1u64..) {
        let a = a % m.q();
        prop_assume!(a != 0);
        let v = m.ord_p(a);
        prop_assert_eq!(a % m.pow_p(v), 0);
        prop_assert_ne!((a / m.pow_p(v)) % m.p(), 0);
    }

    #[test]
    fn encode_decode_round_trip(q in 2u64..50, coords in prop::collection::vec(0u64..50, 1..5)) {
        let z: Vec<u64> = coords.iter().map(|c| c % q).collect();
        prop_assert_eq!(decode(q, encode(q, &z), z.len()), z);
    }

    #[test]
    fn split_recovers_vector(m in modulus(), coords in prop::collection::vec(any::<u64>(), 1..4)) {
        let z: Vec<u64> = coords.iter().map(|c| c % m.q()).collect();
        match split(&m, &z) {
            Ok((nu, prim)) => {
                prop_assert_eq!(valuation(&m, &z), nu);
                prop_assert!(prim.iter().any(|c| c % m.p() != 0));
                let back: Vec<u64> = prim.iter().map(|&c| m.mul(c, m.pow_p(nu))).collect();
                prop_assert_eq!(back, z);
            }
            Err(e) => {
                prop_assert!(matches!(e, LabError::ZeroVector));
                prop_assert!(z.iter().all(|&c| c == 0));
            }
        }
    }
}

#[test]
fn encoding_is_little_endian() {
    assert_eq!(encode(7, &[3, 1]), 3 + 7);
    let listed: Vec<Vec<u64>> = all_vectors(3, 2).collect();
    assert_eq!(listed[1], vec![1, 0]);
    assert_eq!(listed.len(), 9);
}

#[test]
fn invalid_moduli_are_rejected() {
    assert!(Modulus::new(2, 3).is_err());
    assert!(Modulus::new(9, 1).is_err());
    assert!(Modulus::new(3, 0).is_err());
    assert!(Modulus::new(46337, 3).is_err());
}

#[test]
fn truncation_reduces_levels() {
    let m = Modulus::new(5, 3).unwrap();
    let t = m.truncate(2);
    assert_eq!((t.p(), t.r(), t.q()), (5, 2, 25));
}

#[test]
fn form_evaluation_and_binding() {
    let m = Modulus::new(7, 2).unwrap();
    let f = DiagonalForm::new(vec![1, -2], vec![3, 2]).unwrap();
    assert_eq!(f.eval(&m, &[2, 3]).unwrap(), m.reduce_i64(8 - 18));
    assert!(f.eval(&m, &[1]).is_err());
    assert!(DiagonalForm::new(vec![1, 7], vec![2, 2]).unwrap().bind(&m).is_err());
    assert!(DiagonalForm::distance(3).is_smooth_mod(7));
}

#[test]
fn point_set_csv_round_trip() {
    let m = Modulus::new(5, 2).unwrap();
    let set = PointSet::from_points(&m, 2, vec![vec![24, 3], vec![0, 0], vec![7, 11]]).unwrap();
    let back = PointSet::from_csv(&m, 2, &set.to_csv()).unwrap();
    assert_eq!(back, set);
    assert!(PointSet::from_csv(&m, 2, "1,2,3\n").is_err());
    assert!(set.contains(&[24, 3]));
    assert_eq!(set.negated().negated(), set);
}
