use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use unbiased_bb::operators::{flip_k_where_different, random_where_different, update_op};
use unbiased_bb::{BitString, HammingAutomorphism, Permutation};

fn bits(max_len: usize) -> impl Strategy<Value = Vec<bool>> {
    prop::collection::vec(any::<bool>(), 1..=max_len)
}

/// Two or three strings of one common length.
fn same_len(count: usize) -> impl Strategy<Value = Vec<BitString>> {
    (1usize..=150).prop_flat_map(move |n| {
        prop::collection::vec(prop::collection::vec(any::<bool>(), n), count)
            .prop_map(|v| v.iter().map(|b| BitString::from_bits(b)).collect())
    })
}

fn automorphism(n: usize, seed: u64) -> HammingAutomorphism {
    HammingAutomorphism::random(n, &mut ChaCha8Rng::seed_from_u64(seed))
}

proptest! {
    #[test]
    fn automorphisms_preserve_distance(v in same_len(2), seed in any::<u64>()) {
        let a = automorphism(v[0].len(), seed);
        let d = v[0].hamming_distance(&v[1]).unwrap();
        prop_assert_eq!(a.apply(&v[0]).unwrap().hamming_distance(&a.apply(&v[1]).unwrap()).unwrap(), d);
    }

    #[test]
    fn automorphism_inverse_round_trips(b in bits(200), seed in any::<u64>()) {
        let x = BitString::from_bits(&b);
        let a = automorphism(x.len(), seed);
        prop_assert_eq!(a.inverse().apply(&a.apply(&x).unwrap()).unwrap(), x);
    }

    #[test]
    fn permutation_inverse(n in 1usize..300, seed in any::<u64>()) {
        let p = Permutation::random(n, &mut ChaCha8Rng::seed_from_u64(seed));
        let q = p.inverse();
        prop_assert!((0..n).all(|i| q.at(p.at(i)) == i));
    }

    #[test]
    fn complement_and_popcount(b in bits(300)) {
        let x = BitString::from_bits(&b);
        prop_assert_eq!(x.count_ones(), b.iter().filter(|&&v| v).count());
        prop_assert_eq!(x.count_ones() + x.complement().count_ones(), x.len());
        prop_assert_eq!(x.complement().complement(), x.clone());
        prop_assert_eq!(x.hamming_distance(&x.complement()).unwrap(), x.len());
    }

    #[test]
    fn string_form_parses_back(b in bits(130)) {
        let x = BitString::from_bits(&b);
        prop_assert_eq!(x.to_string().parse::<BitString>().unwrap(), x);
    }

    #[test]
    fn crossover_stays_between_parents(v in same_len(2), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let out = random_where_different(&v[0], &v[1], &mut rng).unwrap();
        let d = v[0].hamming_distance(&v[1]).unwrap();
        prop_assert_eq!(out.hamming_distance(&v[0]).unwrap() + out.hamming_distance(&v[1]).unwrap(), d);
    }

    #[test]
    fn flip_k_moves_exactly(v in same_len(2), ell in 0usize..20, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let out = flip_k_where_different(ell, &v[0], &v[1], &mut rng).unwrap();
        let d = v[0].hamming_distance(&v[1]).unwrap();
        let m = ell.min(d);
        prop_assert_eq!(out.hamming_distance(&v[1]).unwrap(), m);
        prop_assert_eq!(out.hamming_distance(&v[0]).unwrap(), d - m);
    }

    #[test]
    fn update_rule(v in same_len(3)) {
        let (a, b, c) = (&v[0], &v[1], &v[2]);
        let out = update_op(a, b, c).unwrap();
        for i in 0..a.len() {
            let expected = if a.get(i) == c.get(i) { b.get(i) } else { a.get(i) };
            prop_assert_eq!(out.get(i), expected);
        }
    }
}
